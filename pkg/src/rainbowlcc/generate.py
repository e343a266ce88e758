"""Seeded generators for LCC/LDC instances and colored-graph fixtures.

Same arguments, same output: every random choice goes through
:func:`rainbowlcc.rng.make_rng` with labels naming the generator and the
target index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import GenerationError, PreconditionError
from .gf import BitMatrix, is_prime, kernel_basis
from .instance import LccInstance, LdcInstance
from .rainbow import ColoredGraph
from .rng import make_rng

__all__ = [
    "GenConfig",
    "gen_hadamard",
    "gen_constraint_kernel",
    "gen_hadamard_ldc",
    "gen_hypercube_graph",
    "pack_plane_triples",
    "constraint_rows",
]

DEFAULT_RETRIES = 32
_SCAN_LIMIT = 1 << 14


@dataclass(frozen=True)
class GenConfig:
    """Recorded alongside generated files so a run can be repeated."""

    variant: str
    seed: int
    size: int
    target_delta: Fraction | None = None
    extra: tuple = ()

    def __post_init__(self):
        if self.target_delta is not None and not 0 < self.target_delta <= Fraction(1, 3):
            raise PreconditionError("target_delta must lie in (0, 1/3] for 3-uniform generators")


def pack_plane_triples(k: int, rng: np.random.Generator, tries: int = 16) -> np.ndarray:
    """Greedy packing of disjoint triples ``{p, p', p ^ p'}`` of nonzero vectors of F_2^k.

    Each triple together with 0 is a 2-dimensional subspace, so translating the
    packing by any ``i`` gives triples ``{a, b, c}`` with ``a ^ b ^ c = i``
    that avoid ``i``.  For ``p`` in shuffled order we try a few random free
    partners and then, when the space is small enough, scan for any partner;
    the result is maximal for ``n <= 2^14``.
    """
    n = 1 << k
    free = np.ones(n, dtype=bool)
    free[0] = False
    pool = list(range(1, n))
    pos = np.arange(-1, n - 1)
    everything = np.arange(n)
    triples = []

    def take(v: int) -> None:
        free[v] = False
        j = pos[v]
        last = pool[-1]
        pool[j] = last
        pos[last] = j
        pool.pop()

    for p in rng.permutation(np.arange(1, n)).tolist():
        if not free[p]:
            continue
        take(p)
        partner = -1
        for u in rng.random(tries).tolist() if len(pool) >= 2 else ():
            cand = pool[int(u * len(pool))]
            if free[cand ^ p]:
                partner = cand
                break
        if partner < 0 and n <= _SCAN_LIMIT and len(pool) >= 2:
            ok = np.nonzero(free & free[everything ^ p])[0]
            if len(ok):
                partner = int(ok[rng.integers(len(ok))])
        if partner < 0:
            if n > _SCAN_LIMIT:
                # not proven dead; leave it available as someone else's partner
                free[p] = True
                pos[p] = len(pool)
                pool.append(p)
            continue
        third = partner ^ p
        take(partner)
        take(third)
        triples.append((p, partner, third))
    return np.array(triples, dtype=np.int64).reshape(-1, 3)


def _random_invertible(k: int, rng: np.random.Generator) -> list[int]:
    """Columns (images of ``e_0..e_{k-1}``) of a uniformly random invertible map over F_2."""
    while True:
        cols = [int(c) for c in rng.integers(0, 1 << k, size=k)]
        basis = []
        for c in cols:
            for b in basis:
                c = min(c, c ^ b)
            if c == 0:
                break
            basis.append(c)
        else:
            return cols


def _linear_image_table(cols: Sequence[int], k: int) -> np.ndarray:
    img = np.zeros(1 << k, dtype=np.int64)
    for j, c in enumerate(cols):
        img[1 << j : 2 << j] = img[: 1 << j] ^ c
    return img


def gen_hadamard(k: int, seed: int = 0, target_delta: Fraction | float | str = Fraction(1, 4),
                 retries: int = DEFAULT_RETRIES) -> LccInstance:
    """The Hadamard code as a 3-LCC: ``n = 2^k`` rows, row ``y`` is the vector ``y``.

    ``H_i`` consists of disjoint triples ``{a, b, a ^ b ^ i}`` avoiding ``i``.
    A greedy triple packing of the nonzero vectors is built once (reshuffled
    up to ``retries`` times until it is large enough) and each target gets its
    own uniformly random invertible linear image of it, translated by ``i``.
    """
    target_delta = Fraction(target_delta)
    if not 2 <= k <= 20:
        raise PreconditionError(f"gen_hadamard needs 2 <= k <= 20, got k={k}")
    if not 0 < target_delta <= Fraction(1, 4):
        raise PreconditionError(f"target_delta must lie in (0, 1/4], got {target_delta}")
    n = 1 << k
    need = math.ceil(target_delta * n)
    best = np.zeros((0, 3), dtype=np.int64)
    for attempt in range(retries):
        packing = pack_plane_triples(k, make_rng(seed, "hadamard", "packing", attempt))
        if len(packing) > len(best):
            best = packing
        if len(best) >= need:
            break
    else:
        raise GenerationError(
            f"packing shortfall for k={k}: best packing has {len(best)} triples, need {need} "
            f"(target delta {target_delta}) after {retries} attempts"
        )
    matchings = {}
    for i in range(n):
        rng = make_rng(seed, "hadamard", "map", i)
        img = _linear_image_table(_random_invertible(k, rng), k)
        matchings[i] = img[best] ^ i
    rows = BitMatrix(tuple(range(n)), k)
    return LccInstance(n, k, 3, rows, matchings, target_delta)


def constraint_rows(inst: LccInstance) -> list[int]:
    """One n-bit parity check ``1_{{i} u E}`` per hyperedge ``E`` of ``H_i``."""
    out = []
    for i, m in inst.matchings.items():
        for e in m:
            mask = 1 << i
            for a in e:
                mask ^= 1 << a
            out.append(mask)
    return out


def gen_constraint_kernel(n: int, targets: Sequence[int], per_target_edges: int, seed: int = 0) -> LccInstance:
    """Random local checks first, code second.

    For each target ``i`` a matching of ``per_target_edges`` random disjoint
    triples avoiding ``i`` is drawn; every triple ``E`` becomes the parity
    check ``{i} u E``.  The code is the null space of those checks and row
    ``i`` of the generator matrix holds coordinate ``i`` of each basis
    codeword, so ``v_i = v_a + v_b + v_c`` for every ``{a, b, c}`` in ``H_i``.
    """
    targets = sorted(set(int(t) for t in targets))
    if n < 4:
        raise PreconditionError("gen_constraint_kernel needs n >= 4")
    if per_target_edges < 1:
        raise PreconditionError("per_target_edges must be positive")
    if 3 * per_target_edges > n - 1:
        raise PreconditionError(f"{per_target_edges} disjoint triples do not fit in {n - 1} indices")
    if any(not 0 <= t < n for t in targets):
        raise PreconditionError("target index out of range")

    matchings = {}
    checks = []
    for i in targets:
        others = np.array([j for j in range(n) if j != i], dtype=np.int64)
        picked = make_rng(seed, "kernel", i).permutation(others)[: 3 * per_target_edges]
        edges = picked.reshape(per_target_edges, 3)
        matchings[i] = edges
        for e in edges.tolist():
            checks.append((1 << i) | (1 << e[0]) | (1 << e[1]) | (1 << e[2]))

    if checks:
        # row j of the transpose lists the checks containing coordinate j
        transpose = BitMatrix(
            tuple(sum(1 << c for c, mask in enumerate(checks) if mask >> j & 1) for j in range(n)),
            len(checks),
        )
        basis = [b.bits for b in kernel_basis(transpose)]
    else:
        basis = [1 << j for j in range(n)]
    k = len(basis)
    if k == 0:
        raise GenerationError(f"constraint kernel is trivial (n={n}, {len(checks)} checks)")
    rows = tuple(sum(1 << col for col, c in enumerate(basis) if c >> i & 1) for i in range(n))
    return LccInstance(n, k, 3, BitMatrix(rows, k), matchings, Fraction(per_target_edges, n))


def gen_hadamard_ldc(k: int, q: int = 2) -> LdcInstance:
    """All vectors of F_q^k as rows; ``H_i`` pairs ``y`` with ``y + e_i`` so that ``e_i = v_{y+e_i} - v_y``.

    Row index ``y`` encodes the vector with digits ``y_j`` in base ``q``
    (``j = 0`` least significant).  Along each line in direction ``e_i`` the
    points with offsets ``(0,1), (2,3), ...`` are paired, giving
    ``floor(q/2) * q^(k-1)`` edges per message index.
    """
    if not is_prime(q):
        raise PreconditionError(f"q={q} is not prime")
    if k < 1:
        raise PreconditionError("k must be positive")
    if q ** k > 1 << 16:
        raise PreconditionError(f"q^k = {q}^{k} exceeds the 2^16 row limit")
    n = q ** k
    idx = np.arange(n)
    rows = np.stack([(idx // q ** j) % q for j in range(k)], axis=1)
    matchings, coeffs = {}, {}
    for i in range(k):
        digit = rows[:, i]
        lows = idx[(digit % 2 == 0) & (digit < q - 1)]
        edges = np.stack([lows, lows + q ** i], axis=1)
        alpha = np.tile(np.array([q - 1, 1]), (len(lows), 1))
        matchings[i], coeffs[i] = edges, alpha
    delta = Fraction(min(len(e) for e in matchings.values()), n)
    return LdcInstance(n, k, 2, q, rows, matchings, coeffs, delta)


def gen_hypercube_graph(d: int) -> ColoredGraph:
    """Boolean hypercube on F_2^d with edge ``{y, y ^ e_j}`` colored ``j``."""
    if not 1 <= d <= 16:
        raise PreconditionError(f"hypercube dimension must lie in [1, 16], got {d}")
    edges = [(y, y | 1 << j, j) for y in range(1 << d) for j in range(d) if not y >> j & 1]
    return ColoredGraph(1 << d, edges)
