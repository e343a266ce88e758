"""Sparse representations of vectors as sums of generator rows, and their compression by shifts.

A *shift* of an index set ``T`` is a set ``T'`` with the same row sum and
``|T'| <= |T|``.  Shifts come from rainbow cycles: drop one designated index
``a_E`` from every hyperedge ``E`` of the matchings ``H_t`` (``t`` in ``T``);
the remaining pairs form a properly colored graph, and the colors
``t_1 .. t_m`` and hyperedges ``E_1 .. E_m`` of a rainbow cycle satisfy
``sum_s v_{t_s} = sum_s v_{a_{E_s}}``.  Replacing the ``t_s`` by the ``a_{E_s}``
gives a shift that contains each new ``a_{E_s}`` (unless it cancels).  When two
disjoint blocks of a representation have shifts through a common index ``j``,
both copies of ``j`` cancel and the representation gets shorter by two.

Multisets are reduced to sets immediately by cancelling equal pairs, which is
valid over F_2 and can only shorten them.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from .errors import ConsistencyError, PreconditionError
from .gf import BitRow, solve_combination, xor_rows
from .instance import LccInstance, effective_delta
from .rainbow import (
    DEFAULT_BUDGET,
    ColoredGraph,
    Found,
    check_proper,
    find_rainbow_cycle,
    find_rainbow_even_cover,
)
from .rng import derive_seed, make_rng

__all__ = [
    "SparseRep",
    "ShiftRecord",
    "CoverageState",
    "CompressConfig",
    "StepStats",
    "CompressTrace",
    "ShiftGraph",
    "CoverStats",
    "canonicalize",
    "initial_representation",
    "build_shift_graph",
    "shift_coverage",
    "verify_shift_record",
    "compress_step",
    "compress",
    "compress_general",
    "covering_radius_experiment",
]


def canonicalize(indices: Iterable[int]) -> tuple[int, ...]:
    """Reduce a multiset to the sorted set of indices with odd multiplicity."""
    return tuple(sorted(i for i, c in Counter(int(i) for i in indices).items() if c % 2))


@dataclass(frozen=True)
class SparseRep:
    """``x = sum of rows in support`` over F_2, checked on construction."""

    inst: LccInstance = field(repr=False, compare=False)
    x: BitRow
    support: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "support", canonicalize(self.support))
        if self.x.k != self.inst.k:
            raise PreconditionError(f"target has dimension {self.x.k}, instance has k={self.inst.k}")
        if self.support and (self.support[0] < 0 or self.support[-1] >= self.inst.n):
            raise PreconditionError("support index out of range")
        if xor_rows(self.inst.rows.rows, self.support) != self.x.bits:
            raise ConsistencyError(f"rows {list(self.support)} do not sum to x = {self.x.to_hex()}")

    def __len__(self) -> int:
        return len(self.support)


@dataclass(frozen=True)
class ShiftRecord:
    """``shift`` has the same row sum as ``source``, is no longer, and contains ``covered_index``."""

    covered_index: int
    shift: tuple[int, ...]
    source_part: int
    source: tuple[int, ...] = ()


def verify_shift_record(inst: LccInstance, rec: ShiftRecord) -> bool:
    rows = inst.rows.rows
    return (
        rec.covered_index in rec.shift
        and len(rec.shift) <= len(rec.source)
        and rec.shift == canonicalize(rec.shift)
        and xor_rows(rows, rec.shift) == xor_rows(rows, rec.source)
    )


@dataclass
class CoverageState:
    """Outcome of one coverage run on an index set ``T``."""

    T: tuple[int, ...]
    W: set[int] = field(default_factory=set)
    shift_map: dict[int, ShiftRecord] = field(default_factory=dict)
    designated_drop: dict[tuple[int, int], int] = field(default_factory=dict)
    outcome: str = "running"
    cycles_found: int = 0
    nodes_expanded: int = 0
    shortened: tuple[int, ...] | None = None


@dataclass(frozen=True)
class CompressConfig:
    """Knobs of the compression loop.

    ``p`` is the number of parts (``None``: ``ceil(4/delta)`` clipped to
    ``floor(#eligible / min_part_size)`` and raised to at least 2).  ``budget``
    caps each individual search; ``max_rounds`` is the number of consecutive
    failed, reseeded steps after which :func:`compress` stops.
    """

    p: int | None = None
    min_part_size: int = 8
    budget: int = DEFAULT_BUDGET
    max_rounds: int = 8
    seed: int = 0
    r: int | None = None
    coverage_target: int | None = None
    collect_records: bool = False

    def __post_init__(self):
        if self.p is not None and self.p < 2:
            raise PreconditionError(f"p must be at least 2, got {self.p}")
        if self.min_part_size < 1:
            raise PreconditionError("min_part_size must be positive")
        if self.budget < 1 or self.max_rounds < 1:
            raise PreconditionError("budget and max_rounds must be positive")


@dataclass
class StepStats:
    cycles_found: int = 0
    nodes_expanded: int = 0
    searches: int = 0
    records: list[ShiftRecord] = field(default_factory=list)
    how: str = ""


@dataclass
class CompressTrace:
    lengths: list[int] = field(default_factory=list)
    rounds: int = 0
    cycles_found: int = 0
    budget_spent: int = 0
    steps: list[str] = field(default_factory=list)
    records: list[ShiftRecord] = field(default_factory=list)

    @property
    def initial_len(self) -> int:
        return self.lengths[0]

    @property
    def final_len(self) -> int:
        return self.lengths[-1]


# ---------------------------------------------------------------- representations


def initial_representation(inst: LccInstance, x: BitRow) -> SparseRep:
    """Pivot-supported solution of ``sum_{i in I} v_i = x``; ``|I| <= k``."""
    y = solve_combination(inst.rows, x)
    if y is None:
        raise PreconditionError("x is not in the span of the rows (rows do not have full rank)")
    return SparseRep(inst, x, tuple(y.support()))


# ---------------------------------------------------------------- shift graphs


@dataclass(frozen=True)
class ShiftGraph:
    """Colored graph (``r = 3``) or colored hyperedge lists (``r >= 4``) with provenance.

    ``provenance[color][pos] = (hyperedge position in H_color, dropped index)``
    for the ``pos``-th surviving edge of that color.
    """

    graph: ColoredGraph | None
    hyperedges: dict[int, list[tuple[int, ...]]]
    provenance: dict[int, list[tuple[int, int]]]
    edge_index: tuple[tuple[int, int], ...] = ()


def _draw_drops(inst: LccInstance, T: Sequence[int], seed: int) -> dict[tuple[int, int], int]:
    drops = {}
    for t in T:
        m = inst.matchings[t]
        choice = make_rng(seed, "drop", t).integers(0, inst.r, size=len(m))
        for pos, (edge, c) in enumerate(zip(m.edges.tolist(), choice.tolist())):
            drops[(t, pos)] = edge[c]
    return drops


def build_shift_graph(inst: LccInstance, T: Iterable[int], W: Iterable[int] = (), seed: int = 0,
                      drops: dict[tuple[int, int], int] | None = None, blocked: Iterable[int] = ()) -> ShiftGraph:
    """Edge ``E \\ {a_E}`` of color ``t`` for every ``E`` in ``H_t`` whose drop ``a_E`` is outside ``W``.

    Drops are drawn from ``seed`` unless given.  ``blocked`` indices are
    treated like members of ``W``.
    """
    T = sorted(set(int(t) for t in T))
    missing = [t for t in T if not inst.has_matching(t)]
    if missing:
        raise PreconditionError(f"no matching for indices {missing}")
    if drops is None:
        drops = _draw_drops(inst, T, seed)
    excluded = set(W) | set(blocked)
    hyperedges: dict[int, list[tuple[int, ...]]] = {}
    provenance: dict[int, list[tuple[int, int]]] = {}
    for t in T:
        hs, prov = [], []
        for pos, edge in enumerate(inst.matchings[t].edges.tolist()):
            a = drops[(t, pos)]
            if a in excluded:
                continue
            hs.append(tuple(v for v in edge if v != a))
            prov.append((pos, a))
        hyperedges[t], provenance[t] = hs, prov
    graph, edge_index = None, ()
    if inst.r == 3:
        edges, index = [], []
        for t in T:
            for pos, (u, v) in enumerate(hyperedges[t]):
                edges.append((u, v, t))
                index.append((t, pos))
        graph = ColoredGraph(inst.n, tuple(edges))
        if not check_proper(graph):
            raise ConsistencyError("shift graph is not properly colored; matchings are not disjoint")
        edge_index = tuple(index)
    return ShiftGraph(graph, hyperedges, provenance, edge_index)


def _coverage_target(inst: LccInstance, cfg_target: int | None) -> int:
    if cfg_target is not None:
        return cfg_target
    return math.ceil(effective_delta(inst) / 2 * inst.n)


class _CoverageRun:
    """One shift-coverage run, advanced one search at a time."""

    def __init__(self, inst: LccInstance, T: Sequence[int], budget: int, seed: int, part: int = 0,
                 target: int | None = None):
        if inst.r < 3:
            raise PreconditionError(f"shift coverage needs r >= 3, got r={inst.r}")
        self.inst = inst
        self.part = part
        self.budget = budget
        self.target = _coverage_target(inst, target)
        self.state = CoverageState(tuple(sorted(set(int(t) for t in T))))
        missing = [t for t in self.state.T if not inst.has_matching(t)]
        if missing:
            raise PreconditionError(f"no matching for indices {missing}")
        self.state.designated_drop = _draw_drops(inst, self.state.T, seed)
        self.blocked: set[int] = set()
        self.searches = 0
        self.source_sum = xor_rows(inst.rows.rows, self.state.T)
        self.done = not self.state.T
        if self.done:
            self.state.outcome = "AbsentProven"

    def step(self) -> list[ShiftRecord] | None:
        """Run one search; return new records (possibly none), or ``None`` once the run is over."""
        if self.done:
            return None
        st = self.state
        self.searches += 1
        sg = build_shift_graph(self.inst, st.T, st.W, drops=st.designated_drop, blocked=self.blocked)
        if sg.graph is not None:
            out = find_rainbow_cycle(sg.graph, self.budget)
        else:
            out = find_rainbow_even_cover(sg.hyperedges, self.budget)
        st.nodes_expanded += out.nodes_expanded
        if not isinstance(out, Found):
            st.outcome = out.status
            self.done = True
            return None
        st.cycles_found += 1
        if sg.graph is not None:
            used = [sg.edge_index[e] for e in out.witness.edges]
        else:
            used = list(zip(out.witness.colors, out.witness.positions))
        colors = [t for t, _ in used]
        dropped = [sg.provenance[t][pos][1] for t, pos in used]
        multiset = Counter(st.T)
        for t in colors:
            multiset[t] -= 1
        for a in dropped:
            multiset[a] += 1
        shift = tuple(sorted(i for i, c in multiset.items() if c % 2))
        if xor_rows(self.inst.rows.rows, shift) != self.source_sum or len(shift) > len(st.T):
            raise ConsistencyError(f"shift {shift} does not preserve the row sum of {st.T}")
        if len(shift) < len(st.T) and st.shortened is None:
            st.shortened = shift
        in_shift = set(shift)
        records = []
        for a in dict.fromkeys(dropped):
            if a in in_shift and a not in st.W:
                rec = ShiftRecord(a, shift, self.part, st.T)
                st.W.add(a)
                st.shift_map[a] = rec
                records.append(rec)
        if not records:
            # every dropped index cancelled; exclude them so the search moves on
            self.blocked.update(dropped)
        if len(st.W) >= self.target:
            st.outcome = "TargetReached"
            self.done = True
        return records


def shift_coverage(inst: LccInstance, T: Iterable[int], budget: int = DEFAULT_BUDGET, seed: int = 0,
                   target: int | None = None) -> CoverageState:
    """Repeatedly find rainbow cycles (even covers for ``r >= 4``) avoiding covered drops and record the shifts.

    Stops when a search proves absence, runs out of budget, or ``|W|``
    reaches ``target`` (default ``ceil(delta n / 2)``).
    """
    run = _CoverageRun(inst, list(T), budget, seed, 0, target)
    while run.step() is not None:
        pass
    return run.state


# ---------------------------------------------------------------- compression


def _eligible(inst: LccInstance, support: Sequence[int]) -> tuple[list[int], list[int]]:
    eligible = [i for i in support if inst.has_matching(i)]
    fixed = [i for i in support if not inst.has_matching(i)]
    return eligible, fixed


def _num_parts(inst: LccInstance, n_eligible: int, cfg: CompressConfig) -> int:
    if cfg.p is not None:
        p = cfg.p
    else:
        p = math.ceil(4 / effective_delta(inst))
        p = min(p, n_eligible // cfg.min_part_size)
    return max(2, min(p, n_eligible))


def _check_mode(inst: LccInstance, cfg: CompressConfig) -> None:
    if cfg.r is not None and cfg.r != inst.r:
        raise PreconditionError(f"config expects r={cfg.r}, instance has r={inst.r}")


def compress_step(inst: LccInstance, rep: SparseRep, cfg: CompressConfig, seed: int | None = None,
                  stats: StepStats | None = None) -> SparseRep | None:
    """Try once to shorten ``rep`` by at least two.

    The support indices that own a matching are shuffled into ``p`` parts;
    the rest stay fixed.  Coverage runs on the parts advance round-robin.  The
    step succeeds as soon as two different blocks (parts, or the fixed block)
    have shifts through a common index, or some run finds a shift that is
    itself shorter.  Returns ``None`` when every run ends without that.
    """
    _check_mode(inst, cfg)
    seed = cfg.seed if seed is None else seed
    stats = stats if stats is not None else StepStats()
    eligible, fixed = _eligible(inst, rep.support)
    if len(eligible) < 2 * cfg.min_part_size:
        raise PreconditionError(
            f"{len(eligible)} matched support indices, need at least 2 * min_part_size = {2 * cfg.min_part_size}"
        )
    p = _num_parts(inst, len(eligible), cfg)
    order = make_rng(seed, "partition").permutation(np.array(eligible, dtype=np.int64)).tolist()
    parts = [tuple(sorted(chunk.tolist())) for chunk in np.array_split(np.array(order, dtype=np.int64), p)]
    blocks = {ell: parts[ell] for ell in range(p)}
    FIXED = -1
    if fixed:
        blocks[FIXED] = tuple(fixed)

    cover: dict[int, ShiftRecord] = {}
    for ell, block in blocks.items():
        for j in block:
            cover[j] = ShiftRecord(j, block, ell, block)

    def assemble(replacements: dict[int, Sequence[int]], how: str) -> SparseRep:
        pieces = []
        for ell, block in blocks.items():
            pieces.extend(replacements.get(ell, block))
        new = SparseRep(inst, rep.x, canonicalize(pieces))
        if len(new) > len(rep) - 2:
            raise ConsistencyError(f"compression produced length {len(new)} from {len(rep)}")
        stats.how = how
        return new

    target = cfg.coverage_target
    runs = [_CoverageRun(inst, parts[ell], cfg.budget, derive_seed(seed, "part", ell), ell, target) for ell in range(p)]
    try:
        while any(not run.done for run in runs):
            for run in runs:
                before = run.state.cycles_found
                records = run.step()
                stats.cycles_found += run.state.cycles_found - before
                if records is None:
                    continue
                if cfg.collect_records:
                    stats.records.extend(records)
                if run.state.shortened is not None:
                    return assemble({run.part: run.state.shortened}, "shorter-shift")
                for rec in records:
                    other = cover.get(rec.covered_index)
                    if other is not None and other.source_part != rec.source_part:
                        j = rec.covered_index
                        return assemble(
                            {
                                other.source_part: [i for i in other.shift if i != j],
                                rec.source_part: [i for i in rec.shift if i != j],
                            },
                            "intersection",
                        )
                    cover.setdefault(rec.covered_index, rec)
        return None
    finally:
        stats.nodes_expanded += sum(run.state.nodes_expanded for run in runs)
        stats.searches += sum(run.searches for run in runs)


def _compress_loop(inst: LccInstance, x: BitRow, cfg: CompressConfig, start: Sequence[int] | None) -> tuple[SparseRep, CompressTrace]:
    _check_mode(inst, cfg)
    rep = initial_representation(inst, x) if start is None else SparseRep(inst, x, tuple(start))
    trace = CompressTrace(lengths=[len(rep)])
    failures = 0
    while failures < cfg.max_rounds:
        eligible, _ = _eligible(inst, rep.support)
        if len(eligible) < 2 * cfg.min_part_size:
            trace.steps.append("too-short")
            break
        stats = StepStats()
        new = compress_step(inst, rep, cfg, derive_seed(cfg.seed, "round", trace.rounds), stats)
        trace.rounds += 1
        trace.cycles_found += stats.cycles_found
        trace.budget_spent += stats.nodes_expanded
        trace.records.extend(stats.records)
        if new is None:
            failures += 1
            trace.steps.append("no-intersection")
            continue
        if len(new) > len(rep) - 2:
            raise ConsistencyError("compress_step did not shorten the representation")
        failures = 0
        rep = new
        trace.lengths.append(len(rep))
        trace.steps.append(stats.how)
    return rep, trace


def compress(inst: LccInstance, x: BitRow, cfg: CompressConfig = CompressConfig(),
             start: Sequence[int] | None = None) -> tuple[SparseRep, CompressTrace]:
    """Shorten a representation of ``x`` until ``max_rounds`` reseeded steps in a row fail.

    Starts from :func:`initial_representation` unless ``start`` (any support
    summing to ``x``) is given.  3-query instances search rainbow cycles;
    use :func:`compress_general` for ``r >= 4``.
    """
    if inst.r != 3:
        raise PreconditionError(f"compress handles r = 3; use compress_general for r={inst.r}")
    return _compress_loop(inst, x, cfg, start)


def compress_general(inst: LccInstance, x: BitRow, cfg: CompressConfig = CompressConfig(),
                     start: Sequence[int] | None = None) -> tuple[SparseRep, CompressTrace]:
    """As :func:`compress` for ``r >= 4``, with rainbow even covers of the ``(r-1)``-sets ``E \\ {a_E}``."""
    if inst.r < 4:
        raise PreconditionError(f"compress_general needs r >= 4, got r={inst.r}")
    return _compress_loop(inst, x, cfg, start)


# ---------------------------------------------------------------- covering radius


@dataclass
class CoverStats:
    rows: list[dict] = field(default_factory=list)
    bound: float = 0.0

    @property
    def final_lengths(self) -> list[int]:
        return [row["final_len"] for row in self.rows]

    @property
    def max_len(self) -> int:
        return max(self.final_lengths, default=0)

    @property
    def mean_len(self) -> float:
        lens = self.final_lengths
        return sum(lens) / len(lens) if lens else 0.0

    @property
    def max_initial(self) -> int:
        return max((row["initial_len"] for row in self.rows), default=0)

    @property
    def histogram(self) -> dict[int, int]:
        return dict(sorted(Counter(self.final_lengths).items()))

    def report(self) -> str:
        return (
            f"x count {len(self.rows)}; final length max {self.max_len}, mean {self.mean_len:.3f}; "
            f"histogram {self.histogram}; reference delta^-2 log2 n log2 log2 n = {self.bound:.1f} "
            f"({'within' if self.max_len <= self.bound else 'above'})"
        )


def reference_bound(inst: LccInstance) -> float:
    """``delta^-2 * log2 n * log2 log2 n`` with the measured delta (reported, never enforced)."""
    d = float(effective_delta(inst))
    ln = math.log2(inst.n)
    return d ** -2 * ln * math.log2(ln) if ln > 1 else 0.0


def targets_for(inst: LccInstance, mode: str, count: int = 0, seed: int = 0) -> list[int]:
    """The packed targets ``x`` of an experiment: all of F_2^k or a seeded sample."""
    if mode == "exhaustive":
        if inst.k > 20:
            raise PreconditionError(f"exhaustive mode needs k <= 20, got k={inst.k}")
        return list(range(1 << inst.k))
    if mode == "sample":
        rng = make_rng(seed, "targets")
        nbytes = (inst.k + 7) // 8
        mask = (1 << inst.k) - 1
        return [int.from_bytes(rng.bytes(nbytes), "little") & mask for _ in range(count)]
    raise PreconditionError(f"unknown mode {mode!r}")


def compress_one(inst: LccInstance, x_id: int, x_bits: int, cfg: CompressConfig) -> dict:
    """One experiment row; the per-x seed depends only on ``(cfg.seed, x_id)``."""
    seed = derive_seed(cfg.seed, "x", x_id)
    run = compress if inst.r == 3 else compress_general
    rep, trace = run(inst, BitRow(x_bits, inst.k), replace(cfg, seed=seed))
    return {
        "x_id": x_id,
        "initial_len": trace.initial_len,
        "final_len": len(rep),
        "rounds": trace.rounds,
        "cycles_found": trace.cycles_found,
        "budget_spent": trace.budget_spent,
        "seed": seed,
    }


def covering_radius_experiment(inst: LccInstance, mode: str = "exhaustive", count: int = 0,
                               cfg: CompressConfig = CompressConfig()) -> CoverStats:
    """Compress every ``x`` in F_2^k (or ``count`` seeded samples) and summarise final lengths."""
    xs = targets_for(inst, mode, count, cfg.seed)
    stats = CoverStats(bound=reference_bound(inst))
    for x_id, bits in enumerate(xs):
        stats.rows.append(compress_one(inst, x_id, bits, cfg))
    return stats
