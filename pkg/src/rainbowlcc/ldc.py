"""Weight contraction for linear 2-query LDCs over a prime field, and the span procedures built on it.

One contraction step picks a uniformly random ``(gamma_0, a_0)`` and transports
it along the support ``i_1 < ... < i_w`` of ``x``: whenever ``a_{t-1}`` has a
partner ``b`` in ``H_{i_t}`` (edge ``E``, coefficients ``alpha``), the pair moves
to ``b`` with ``gamma_t = -gamma_{t-1} alpha_a^{-1} alpha_b`` and coordinate
``i_t`` becomes ``beta_t + gamma_{t-1} alpha_a^{-1}``; otherwise nothing changes.
Since ``e_i = alpha_a v_a + alpha_b v_b``, each move keeps
``gamma_{t-1} v_{a_{t-1}} + beta_t e_{i_t} = beta'_t e_{i_t} + gamma_t v_{a_t}``,
and summing gives ``x + gamma_0 v_{a_0} - gamma_w v_{a_w} = sum_t beta'_t e_{i_t}``.
Each ``beta'_t`` vanishes with probability at least ``2 delta / q``; draws are
repeated until the weight drops by that factor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import ConsistencyError, ContractionError, PreconditionError
from .instance import LdcInstance, effective_delta
from .rng import derive_seed, make_rng

__all__ = [
    "CouplingTrace",
    "ContractionResult",
    "SpanResult",
    "contraction_target",
    "default_retry_budget",
    "contraction_step",
    "sparse_span",
    "approx_span",
    "span_size_reference",
    "q_ary_entropy",
    "weight",
]


def weight(x: np.ndarray) -> int:
    return int(np.count_nonzero(x))


@dataclass
class CouplingTrace:
    """The chain of one draw: ``gammas[t], anchors[t]`` for ``t = 0..w``; per support position the rest."""

    support: list[int]
    betas: list[int]
    gammas: list[int] = field(default_factory=list)
    anchors: list[int] = field(default_factory=list)
    fired: list[bool] = field(default_factory=list)
    beta_prime: list[int] = field(default_factory=list)

    @property
    def zeroed(self) -> int:
        return sum(1 for b in self.beta_prime if b == 0)


@dataclass
class ContractionResult:
    """``x_new = x + g1 * v[a1] + g2 * v[a2]`` with ``wt(x_new) <= target``."""

    a1: int
    g1: int
    a2: int
    g2: int
    x_new: np.ndarray
    trace: CouplingTrace
    attempts: int
    target: int

    @property
    def weight(self) -> int:
        return weight(self.x_new)


@dataclass
class SpanResult:
    """``y = sum coeffs[i] * v[i]``; ``y == x`` in exact mode, ``d(x, y) <= k/4`` in approximate mode."""

    coeffs: dict[int, int]
    y: np.ndarray
    residual: np.ndarray
    steps: int
    retries_total: int
    weights: list[int]

    @property
    def indices(self) -> list[int]:
        return sorted(i for i, c in self.coeffs.items() if c)


def contraction_target(w: int, delta: Fraction, q: int) -> int:
    """Largest accepted weight: ``floor((1 - 2 delta / q) w)``, or ``w - 1`` if that floor equals ``w``."""
    bound = math.floor((1 - 2 * Fraction(delta) / q) * w)
    return bound if bound < w else w - 1


def default_retry_budget(delta: Fraction, q: int) -> int:
    return 64 * math.ceil(q / (2 * Fraction(delta)))


def _as_vector(ldc: LdcInstance, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.int64) % ldc.q
    if x.shape != (ldc.k,):
        raise PreconditionError(f"x must have shape ({ldc.k},), got {x.shape}")
    return x


def _check_ldc(ldc: LdcInstance) -> None:
    if ldc.r != 2:
        raise PreconditionError(f"weight contraction is defined for 2-query LDCs, got r={ldc.r}")


def _draw_chain(ldc: LdcInstance, x: np.ndarray, rng: np.random.Generator) -> tuple[CouplingTrace, np.ndarray]:
    q = ldc.q
    tables = ldc.partner_tables
    support = np.nonzero(x)[0].tolist()
    trace = CouplingTrace(support, [int(x[i]) for i in support])
    gamma = int(rng.integers(1, q))
    a = int(rng.integers(0, ldc.n))
    trace.gammas.append(gamma)
    trace.anchors.append(a)
    rows = ldc.rows
    for i, beta in zip(support, trace.betas):
        table = tables.get(i)
        b = int(table[0][a]) if table is not None else -1
        if b >= 0:
            inv = pow(int(table[1][a]), -1, q)
            new_beta = (beta + gamma * inv) % q
            new_gamma = (-gamma * inv * int(table[2][a])) % q
            # gamma_{t-1} v_{a_{t-1}} + beta_t e_{i_t} == beta'_t e_{i_t} + gamma_t v_{a_t}
            lhs = gamma * rows[a]
            lhs[i] += beta
            rhs = new_gamma * rows[b]
            rhs[i] += new_beta
            if np.any((lhs - rhs) % q):
                raise ConsistencyError(f"chain identity fails at index {i} (edge {a}, {b})")
            gamma, a = new_gamma, b
            trace.fired.append(True)
            trace.beta_prime.append(new_beta)
        else:
            trace.fired.append(False)
            trace.beta_prime.append(beta)
        trace.gammas.append(gamma)
        trace.anchors.append(a)
    x_new = (x + trace.gammas[0] * rows[trace.anchors[0]] - trace.gammas[-1] * rows[trace.anchors[-1]]) % q
    expected = np.zeros(ldc.k, dtype=np.int64)
    expected[support] = trace.beta_prime
    if not np.array_equal(x_new, expected):
        raise ConsistencyError("telescoped chain does not match x + g0 v[a0] - gw v[aw]")
    return trace, x_new


def contraction_step(ldc: LdcInstance, x, seed: int = 0, retry_budget: int | None = None) -> ContractionResult:
    """Sample couplings until ``wt(x') <= contraction_target(wt(x))``.

    Raises :class:`ContractionError` (with the best draw in ``.best``) when the
    retry budget (default ``64 * ceil(q / (2 delta))``) runs out.
    """
    _check_ldc(ldc)
    x = _as_vector(ldc, x)
    w = weight(x)
    if w == 0:
        raise PreconditionError("x must be nonzero")
    delta = effective_delta(ldc)
    target = contraction_target(w, delta, ldc.q)
    budget = default_retry_budget(delta, ldc.q) if retry_budget is None else retry_budget
    rng = make_rng(seed, "contraction")
    best = None
    for attempt in range(1, budget + 1):
        trace, x_new = _draw_chain(ldc, x, rng)
        res = ContractionResult(
            trace.anchors[0], trace.gammas[0], trace.anchors[-1], (-trace.gammas[-1]) % ldc.q,
            x_new, trace, attempt, target,
        )
        if best is None or res.weight < best.weight:
            best = res
        if res.weight <= target:
            return res
    raise ContractionError(
        f"no draw reached weight <= {target} from {w} in {budget} attempts (best {best.weight}); "
        f"delta={delta} may be overstated",
        best,
    )


def _span(ldc: LdcInstance, x, seed: int, stop_weight: int, retry_budget: int | None) -> SpanResult:
    _check_ldc(ldc)
    q = ldc.q
    x = _as_vector(ldc, x)
    residual = x.copy()
    coeffs: dict[int, int] = {}
    weights = [weight(residual)]
    steps = retries = 0
    while weight(residual) > stop_weight:
        res = contraction_step(ldc, residual, derive_seed(seed, "span", steps), retry_budget)
        # residual_new = residual + g1 v[a1] + g2 v[a2], so x gains -g1 v[a1] - g2 v[a2]
        for a, g in ((res.a1, res.g1), (res.a2, res.g2)):
            coeffs[a] = (coeffs.get(a, 0) - g) % q
        residual = res.x_new
        steps += 1
        retries += res.attempts
        weights.append(weight(residual))
    coeffs = {i: c for i, c in sorted(coeffs.items()) if c}
    y = np.zeros(ldc.k, dtype=np.int64)
    for i, c in coeffs.items():
        y = (y + c * ldc.rows[i]) % q
    if not np.array_equal((x - y) % q, residual):
        raise ConsistencyError("span coefficients do not reproduce x minus the residual")
    return SpanResult(coeffs, y, residual, steps, retries, weights)


def sparse_span(ldc: LdcInstance, x, seed: int = 0, retry_budget: int | None = None) -> SpanResult:
    """Coefficients on few rows with ``sum c_i v_i = x`` exactly (contract until the residual is 0)."""
    return _span(ldc, x, seed, 0, retry_budget)


def approx_span(ldc: LdcInstance, x, seed: int = 0, retry_budget: int | None = None) -> SpanResult:
    """Contract only until the residual has weight at most ``floor(k/4)``."""
    return _span(ldc, x, seed, ldc.k // 4, retry_budget)


def span_size_reference(k: int, delta: Fraction, q: int) -> int:
    """``2 * ceil(log k / log(1 / (1 - 2 delta / q))) + 2``, the index count implied by per-step contraction."""
    factor = 1 - 2 * Fraction(delta) / q
    if factor <= 0:
        return 2
    return 2 * math.ceil(math.log(max(k, 1)) / math.log(1 / float(factor))) + 2


def q_ary_entropy(x: float, q: int) -> float:
    """``h_q(x) = x log_q(q-1) - x log_q x - (1-x) log_q(1-x)``."""
    if not 0 < x < 1:
        raise ValueError(f"q-ary entropy needs 0 < x < 1, got {x}")
    if q < 2:
        raise ValueError(f"q must be at least 2, got {q}")
    lq = math.log(q)
    return (x * math.log(q - 1) - x * math.log(x) - (1 - x) * math.log(1 - x)) / lq
