"""Combinatorial LCC / LDC instances: data model, validation and the JSON file format.

An LCC instance is a list of generator rows ``v_0..v_{n-1}`` in F_2^k together
with, for some (or all) targets ``i``, an r-uniform matching ``H_i`` whose
hyperedges ``{a_1..a_r}`` satisfy ``v_i = v_{a_1} + ... + v_{a_r}``.  An LDC
instance works over a prime field F_q, is indexed by message coordinates
``i < k``, and attaches nonzero coefficients to each hyperedge so that
``e_i = sum_s alpha_s v_{a_s}``.

Hyperedges are stored per matching as a read-only ``(m, r)`` integer array in
canonical order (each row ascending, rows lexicographic).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import Iterator, Mapping

import numpy as np

from .errors import FormatError, InstanceError, PreconditionError, VersionError
from .gf import BitMatrix, BitRow, is_prime, rank

FORMAT_VERSION = 1

__all__ = [
    "FORMAT_VERSION",
    "Matching",
    "LccInstance",
    "LdcInstance",
    "CheckResult",
    "ValidationReport",
    "validate_lcc",
    "validate_ldc",
    "effective_delta",
    "read_instance",
    "write_instance",
    "instance_to_dict",
    "instance_from_dict",
]


def _canonical_order(edges: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Sort each edge ascending, then edges lexicographically.

    Returns ``(sorted_edges, within_edge_argsort, edge_order)`` so parallel
    coefficient arrays can be permuted the same way.
    """
    within = np.argsort(edges, axis=1, kind="stable")
    sorted_edges = np.take_along_axis(edges, within, axis=1)
    if len(sorted_edges):
        order = np.lexsort(sorted_edges.T[::-1])
    else:
        order = np.arange(0)
    return sorted_edges[order], within, order


@dataclass(frozen=True, eq=False)
class Matching:
    """The hyperedges ``H_owner``; structural checks only (disjointness is checked by validation)."""

    owner: int
    edges: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.edges, dtype=np.int64)
        if arr.ndim == 1 and arr.size == 0:
            arr = arr.reshape(0, 0)
        if arr.ndim != 2:
            raise InstanceError(f"H_{self.owner}: edges must be a list of equal-length index lists")
        if arr.size:
            repeats = np.any(np.diff(np.sort(arr, axis=1), axis=1) == 0, axis=1)
            if repeats.any():
                bad = arr[int(np.nonzero(repeats)[0][0])].tolist()
                raise InstanceError(f"H_{self.owner}: edge {bad} repeats an index")
        arr, _, _ = _canonical_order(arr)
        arr = np.ascontiguousarray(arr)
        arr.setflags(write=False)
        object.__setattr__(self, "edges", arr)

    @property
    def r(self) -> int:
        return self.edges.shape[1]

    def __len__(self) -> int:
        return len(self.edges)

    def __iter__(self) -> Iterator[tuple[int, ...]]:
        return (tuple(e) for e in self.edges.tolist())

    def __eq__(self, other) -> bool:
        if not isinstance(other, Matching):
            return NotImplemented
        return (
            self.owner == other.owner
            and self.edges.shape == other.edges.shape
            and np.array_equal(self.edges, other.edges)
        )

    def check_range(self, n: int, r: int) -> None:
        if len(self.edges) == 0:
            return
        if self.r != r:
            raise InstanceError(f"H_{self.owner}: expected {r}-uniform edges, got size {self.r}")
        if self.edges.min() < 0 or self.edges.max() >= n:
            raise InstanceError(f"H_{self.owner}: index out of range [0, {n})")


def _as_matchings(raw: Mapping[int, object], r: int) -> dict[int, Matching]:
    out = {}
    for i in sorted(raw):
        m = raw[i]
        if isinstance(m, Matching) and len(m) == 0 and m.edges.shape[1] != r:
            m = Matching(m.owner, np.zeros((0, r), dtype=np.int64))
        if not isinstance(m, Matching):
            edges = np.asarray(m, dtype=np.int64)
            m = Matching(int(i), edges.reshape(0, r) if edges.size == 0 else edges)
        elif m.owner != i:
            raise InstanceError(f"matching stored under key {i} has owner {m.owner}")
        out[int(i)] = m
    return out


@dataclass(frozen=True, eq=False)
class LccInstance:
    n: int
    k: int
    r: int
    rows: BitMatrix
    matchings: Mapping[int, Matching]
    delta: Fraction = Fraction(1, 4)

    def __post_init__(self):
        object.__setattr__(self, "delta", Fraction(self.delta))
        object.__setattr__(self, "matchings", _as_matchings(self.matchings, self.r))
        if self.n < 1 or self.k < 1 or self.r < 1:
            raise InstanceError("n, k and r must be positive")
        if self.rows.n != self.n or self.rows.k != self.k:
            raise InstanceError(f"rows are {self.rows.n}x{self.rows.k}, expected {self.n}x{self.k}")
        if not 0 < self.delta <= 1:
            raise InstanceError(f"delta must lie in (0, 1], got {self.delta}")
        for i, m in self.matchings.items():
            if not 0 <= i < self.n:
                raise InstanceError(f"matching owner {i} out of range [0, {self.n})")
            m.check_range(self.n, self.r)

    def __eq__(self, other) -> bool:
        if not isinstance(other, LccInstance):
            return NotImplemented
        return (
            (self.n, self.k, self.r, self.delta) == (other.n, other.k, other.r, other.delta)
            and self.rows == other.rows
            and dict(self.matchings) == dict(other.matchings)
        )

    def has_matching(self, i: int) -> bool:
        m = self.matchings.get(i)
        return m is not None and len(m) > 0


@dataclass(frozen=True, eq=False)
class LdcInstance:
    n: int
    k: int
    r: int
    q: int
    rows: np.ndarray
    matchings: Mapping[int, Matching]
    coeffs: Mapping[int, np.ndarray]
    delta: Fraction = Fraction(1, 4)

    def __post_init__(self):
        object.__setattr__(self, "delta", Fraction(self.delta))
        if not is_prime(self.q) or self.q > 1 << 16:
            raise InstanceError(f"q={self.q} must be a prime <= 2^16")
        rows = np.array(self.rows, dtype=np.int64)
        if rows.shape != (self.n, self.k):
            raise InstanceError(f"rows have shape {rows.shape}, expected ({self.n}, {self.k})")
        if rows.size and (rows.min() < 0 or rows.max() >= self.q):
            raise InstanceError(f"row entries must be residues mod {self.q}")
        rows.setflags(write=False)
        object.__setattr__(self, "rows", rows)
        if not 0 < self.delta <= 1:
            raise InstanceError(f"delta must lie in (0, 1], got {self.delta}")
        if set(self.matchings) != set(self.coeffs):
            raise InstanceError("coeffs must be given for exactly the matchings present")
        matchings, coeffs = {}, {}
        for i in sorted(self.matchings):
            raw_edges = self.matchings[i]
            edges = raw_edges.edges if isinstance(raw_edges, Matching) else raw_edges
            edges = np.asarray(edges, dtype=np.int64)
            alpha = np.asarray(self.coeffs[i], dtype=np.int64)
            if edges.size == 0:
                edges = edges.reshape(0, self.r)
                alpha = alpha.reshape(0, self.r)
            if edges.ndim != 2 or alpha.shape != edges.shape:
                raise InstanceError(f"H_{i}: coefficient array does not parallel the edge array")
            if not 0 <= int(i) < self.k:
                raise InstanceError(f"message index {i} out of range [0, {self.k})")
            # coefficients travel with their indices through canonical sorting
            _, within, order = _canonical_order(edges)
            alpha = np.take_along_axis(alpha, within, axis=1)[order] % self.q
            m = Matching(int(i), edges)
            m.check_range(self.n, self.r)
            alpha = np.ascontiguousarray(alpha)
            alpha.setflags(write=False)
            matchings[int(i)], coeffs[int(i)] = m, alpha
        object.__setattr__(self, "matchings", matchings)
        object.__setattr__(self, "coeffs", coeffs)

    def __eq__(self, other) -> bool:
        if not isinstance(other, LdcInstance):
            return NotImplemented
        return (
            (self.n, self.k, self.r, self.q, self.delta)
            == (other.n, other.k, other.r, other.q, other.delta)
            and np.array_equal(self.rows, other.rows)
            and self.matchings == other.matchings
            and all(np.array_equal(self.coeffs[i], other.coeffs[i]) for i in self.coeffs)
        )

    @cached_property
    def partner_tables(self) -> dict[int, tuple[np.ndarray, np.ndarray, np.ndarray]]:
        """For 2-LDCs: ``i -> (partner, alpha_self, alpha_partner)`` arrays over ``[n]`` (-1 if unmatched)."""
        if self.r != 2:
            raise PreconditionError("partner tables are defined for r = 2 only")
        out = {}
        for i, m in self.matchings.items():
            partner = np.full(self.n, -1, dtype=np.int64)
            a_self = np.zeros(self.n, dtype=np.int64)
            a_partner = np.zeros(self.n, dtype=np.int64)
            e, al = m.edges, self.coeffs[i]
            if len(e):
                partner[e[:, 0]], partner[e[:, 1]] = e[:, 1], e[:, 0]
                a_self[e[:, 0]], a_self[e[:, 1]] = al[:, 0], al[:, 1]
                a_partner[e[:, 0]], a_partner[e[:, 1]] = al[:, 1], al[:, 0]
            out[i] = (partner, a_self, a_partner)
        return out


# ---------------------------------------------------------------- validation


@dataclass
class CheckResult:
    name: str
    passed: bool
    counterexample: object = None

    def __str__(self) -> str:
        status = "ok" if self.passed else "FAIL"
        tail = "" if self.passed or self.counterexample is None else f": {self.counterexample}"
        return f"{self.name}: {status}{tail}"


@dataclass
class ValidationReport:
    kind: str
    strict: bool
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __bool__(self) -> bool:
        return self.passed

    def __getitem__(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def failures(self) -> list[CheckResult]:
        return [c for c in self.checks if not c.passed]

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "strict": self.strict,
            "passed": self.passed,
            "checks": [
                {"name": c.name, "passed": c.passed, "counterexample": c.counterexample} for c in self.checks
            ],
        }

    def __str__(self) -> str:
        head = f"{self.kind} validation ({'strict' if self.strict else 'non-strict'}): "
        head += "PASS" if self.passed else "FAIL"
        return "\n".join([head] + ["  " + str(c) for c in self.checks])


def _disjoint_violation(m: Matching, n: int):
    """First pair of edges of ``m`` that share an index, or ``None``."""
    if len(m) == 0:
        return None
    counts = np.bincount(m.edges.ravel(), minlength=n)
    hot = np.nonzero(counts > 1)[0]
    if len(hot) == 0:
        return None
    v = int(hot[0])
    rows = np.nonzero(np.any(m.edges == v, axis=1))[0][:2]
    return {"target": m.owner, "edges": [m.edges[j].tolist() for j in rows], "shared": v}


def _structural_lcc(inst: LccInstance) -> None:
    for i, m in inst.matchings.items():
        if not 0 <= i < inst.n:
            raise InstanceError(f"matching owner {i} out of range")
        m.check_range(inst.n, inst.r)


def validate_lcc(inst: LccInstance, strict: bool = True) -> ValidationReport:
    """Check the combinatorial LCC conditions; raises :class:`InstanceError` on malformed input."""
    _structural_lcc(inst)
    report = ValidationReport("lcc", strict)

    bad = None
    for m in inst.matchings.values():
        bad = _disjoint_violation(m, inst.n)
        if bad:
            break
    report.checks.append(CheckResult("disjoint", bad is None, bad))

    bad = None
    for i, m in inst.matchings.items():
        if len(m) and np.any(m.edges == i):
            j = int(np.nonzero(np.any(m.edges == i, axis=1))[0][0])
            bad = {"target": i, "edge": m.edges[j].tolist()}
            break
    report.checks.append(CheckResult("owner_excluded", bad is None, bad))

    bad = None
    for i, m in inst.matchings.items():
        if len(m) < inst.delta * inst.n:
            bad = {"target": i, "size": len(m), "required": str(inst.delta * inst.n)}
            break
    report.checks.append(CheckResult("size", bad is None, bad))

    words = inst.rows.words
    bad = None
    for i, m in inst.matchings.items():
        if len(m) == 0:
            continue
        acc = np.bitwise_xor.reduce(words[m.edges], axis=1)
        ok = np.all(acc == words[i], axis=1)
        if not ok.all():
            j = int(np.nonzero(~ok)[0][0])
            bad = {"target": i, "edge": m.edges[j].tolist()}
            break
    report.checks.append(CheckResult("identity", bad is None, bad))

    rk = rank(inst.rows)
    report.checks.append(CheckResult("full_rank", rk == inst.k, None if rk == inst.k else {"rank": rk, "k": inst.k}))

    if strict:
        missing = [i for i in range(inst.n) if i not in inst.matchings]
        report.checks.append(
            CheckResult("complete", not missing, None if not missing else {"missing_target": missing[0]})
        )
    return report


def validate_ldc(inst: LdcInstance) -> ValidationReport:
    """Check the combinatorial LDC conditions over F_q."""
    report = ValidationReport("ldc", True)
    q = inst.q

    bad = None
    for m in inst.matchings.values():
        bad = _disjoint_violation(m, inst.n)
        if bad:
            break
    report.checks.append(CheckResult("disjoint", bad is None, bad))

    bad = None
    for i, alpha in inst.coeffs.items():
        if alpha.size and np.any(alpha % q == 0):
            j = int(np.nonzero(np.any(alpha % q == 0, axis=1))[0][0])
            bad = {"target": i, "edge": inst.matchings[i].edges[j].tolist(), "coeffs": alpha[j].tolist()}
            break
    report.checks.append(CheckResult("nonzero_coeffs", bad is None, bad))

    bad = None
    for i, m in inst.matchings.items():
        if len(m) < inst.delta * inst.n:
            bad = {"target": i, "size": len(m), "required": str(inst.delta * inst.n)}
            break
    report.checks.append(CheckResult("size", bad is None, bad))

    bad = None
    for i, m in inst.matchings.items():
        if len(m) == 0:
            continue
        alpha = inst.coeffs[i]
        combo = np.einsum("es,esk->ek", alpha, inst.rows[m.edges]) % q
        target = np.zeros(inst.k, dtype=np.int64)
        target[i] = 1
        ok = np.all(combo == target, axis=1)
        if not ok.all():
            j = int(np.nonzero(~ok)[0][0])
            bad = {"target": i, "edge": m.edges[j].tolist(), "coeffs": alpha[j].tolist()}
            break
    report.checks.append(CheckResult("identity", bad is None, bad))
    return report


def effective_delta(inst: LccInstance | LdcInstance) -> Fraction:
    """``min |H_i| / n`` over the matchings present."""
    if not inst.matchings:
        raise PreconditionError("instance has no matchings")
    return Fraction(min(len(m) for m in inst.matchings.values()), inst.n)


# ---------------------------------------------------------------- file format


def instance_to_dict(inst: LccInstance | LdcInstance) -> dict:
    if isinstance(inst, LccInstance):
        return {
            "format_version": FORMAT_VERSION,
            "kind": "lcc",
            "q": 2,
            "n": inst.n,
            "k": inst.k,
            "r": inst.r,
            "delta": str(inst.delta),
            "rows": [inst.rows.row(i).to_hex() for i in range(inst.n)],
            "matchings": {str(i): m.edges.tolist() for i, m in inst.matchings.items()},
        }
    if inst.q == 2:
        rows = [BitRow.from_bits(r).to_hex() for r in inst.rows.tolist()]
    else:
        rows = inst.rows.tolist()
    return {
        "format_version": FORMAT_VERSION,
        "kind": "ldc",
        "q": inst.q,
        "n": inst.n,
        "k": inst.k,
        "r": inst.r,
        "delta": str(inst.delta),
        "rows": rows,
        "matchings": {str(i): m.edges.tolist() for i, m in inst.matchings.items()},
        "coeffs": {str(i): a.tolist() for i, a in inst.coeffs.items()},
    }


def _require(d: dict, key: str):
    try:
        return d[key]
    except KeyError:
        raise FormatError(f"missing field {key!r}") from None


def instance_from_dict(d: dict) -> LccInstance | LdcInstance:
    if not isinstance(d, dict):
        raise FormatError("instance file must hold a JSON object")
    version = _require(d, "format_version")
    if version != FORMAT_VERSION:
        raise VersionError(f"unsupported format_version {version!r} (expected {FORMAT_VERSION})")
    kind = _require(d, "kind")
    try:
        n, k, r, q = int(_require(d, "n")), int(_require(d, "k")), int(_require(d, "r")), int(d.get("q", 2))
        delta = Fraction(_require(d, "delta"))
        raw_rows = _require(d, "rows")
        if len(raw_rows) != n:
            raise FormatError(f"expected {n} rows, found {len(raw_rows)}")
        matchings = {int(i): np.asarray(e, dtype=np.int64).reshape(-1, r) for i, e in _require(d, "matchings").items()}
        if kind == "lcc":
            if q != 2:
                raise FormatError("lcc instances are binary (q = 2)")
            rows = BitMatrix(tuple(BitRow.from_hex(h, k).bits for h in raw_rows), k)
            return LccInstance(n, k, r, rows, matchings, delta)
        if kind == "ldc":
            if q == 2:
                rows = [list(BitRow.from_hex(h, k)) for h in raw_rows]
            else:
                rows = raw_rows
            coeffs = {int(i): np.asarray(a, dtype=np.int64).reshape(-1, r) for i, a in _require(d, "coeffs").items()}
            return LdcInstance(n, k, r, q, np.asarray(rows, dtype=np.int64).reshape(n, k), matchings, coeffs, delta)
    except (InstanceError, FormatError):
        raise
    except (TypeError, ValueError, ZeroDivisionError, AttributeError) as exc:
        raise FormatError(f"malformed instance: {exc}") from exc
    raise FormatError(f"unknown instance kind {kind!r}")


def write_instance(inst: LccInstance | LdcInstance, path: str | Path) -> None:
    Path(path).write_text(json.dumps(instance_to_dict(inst), separators=(",", ":")) + "\n", encoding="utf-8")


def read_instance(path: str | Path) -> LccInstance | LdcInstance:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: {exc}") from exc
    return instance_from_dict(data)
