"""Rainbow cycles in properly edge-colored multigraphs and rainbow even covers of colored matchings.

Searches are exact: they either return a witness, prove absence by finishing
an exhaustive search, or stop when the node-expansion budget runs out.  The
order of exploration is fixed (colors ascending, vertices ascending, then edge
insertion order), so outcomes are reproducible.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path
from typing import Mapping, Sequence, Union

from .errors import ConsistencyError, FormatError, PreconditionError

__all__ = [
    "DEFAULT_BUDGET",
    "ColoredGraph",
    "RainbowCycle",
    "RainbowEvenCover",
    "Found",
    "AbsentProven",
    "BudgetExhausted",
    "SearchOutcome",
    "DirectSumGraph",
    "check_proper",
    "find_rainbow_cycle",
    "verify_rainbow_cycle",
    "find_rainbow_even_cover",
    "verify_even_cover",
    "direct_sum_graph",
    "lift_cycle_to_cover",
    "read_graph",
    "write_graph",
]

DEFAULT_BUDGET = 10**6


@dataclass(frozen=True)
class ColoredGraph:
    """Multigraph on ``range(n_vertices)``; ``edges[e] = (u, v, color)``."""

    n_vertices: int
    edges: tuple[tuple[int, int, int], ...]

    def __post_init__(self):
        edges = tuple((int(u), int(v), int(c)) for u, v, c in self.edges)
        for u, v, c in edges:
            if u == v:
                raise PreconditionError(f"self-loop at vertex {u}")
            if not (0 <= u < self.n_vertices and 0 <= v < self.n_vertices):
                raise PreconditionError(f"edge ({u}, {v}) leaves the vertex range [0, {self.n_vertices})")
        object.__setattr__(self, "edges", edges)

    @property
    def colors(self) -> list[int]:
        return sorted({c for _, _, c in self.edges})

    def to_dict(self) -> dict:
        return {"n": self.n_vertices, "edges": [list(e) for e in self.edges]}

    @classmethod
    def from_dict(cls, d: dict) -> ColoredGraph:
        try:
            return cls(int(d["n"]), tuple(tuple(e) for e in d["edges"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"malformed graph: {exc}") from exc


def write_graph(g: ColoredGraph, path: str | Path) -> None:
    Path(path).write_text(json.dumps(g.to_dict(), separators=(",", ":")) + "\n", encoding="utf-8")


def read_graph(path: str | Path) -> ColoredGraph:
    try:
        return ColoredGraph.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: {exc}") from exc


@dataclass(frozen=True)
class RainbowCycle:
    """Closed walk ``vertices[0] -> vertices[1] -> ... -> vertices[0]``; edge ``s`` is ``edges[s]``."""

    vertices: tuple[int, ...]
    edges: tuple[int, ...]
    colors: tuple[int, ...]

    @property
    def length(self) -> int:
        return len(self.edges)


@dataclass(frozen=True)
class RainbowEvenCover:
    """Hyperedges ``(color, edge)`` with pairwise distinct colors and empty symmetric difference."""

    edges: tuple[tuple[int, tuple[int, ...]], ...]
    positions: tuple[int, ...] = ()

    @property
    def size(self) -> int:
        return len(self.edges)

    @property
    def colors(self) -> tuple[int, ...]:
        return tuple(c for c, _ in self.edges)


@dataclass(frozen=True)
class Found:
    witness: Union[RainbowCycle, RainbowEvenCover]
    nodes_expanded: int = 0
    status = "Found"


@dataclass(frozen=True)
class AbsentProven:
    nodes_expanded: int = 0
    status = "AbsentProven"


@dataclass(frozen=True)
class BudgetExhausted:
    nodes_expanded: int = 0
    status = "BudgetExhausted"


SearchOutcome = Union[Found, AbsentProven, BudgetExhausted]


class _OutOfBudget(Exception):
    pass


class _Hit(Exception):
    def __init__(self, payload):
        self.payload = payload


# ---------------------------------------------------------------- graphs


def check_proper(g: ColoredGraph) -> bool:
    """True iff every color class is a matching."""
    seen = set()
    for u, v, c in g.edges:
        if (u, c) in seen or (v, c) in seen:
            return False
        seen.add((u, c))
        seen.add((v, c))
    return True


def _two_core(n: int, edges: Sequence[tuple[int, int, int]]) -> set[int]:
    deg = [0] * n
    nbrs: list[list[int]] = [[] for _ in range(n)]
    for u, v, _ in edges:
        deg[u] += 1
        deg[v] += 1
        nbrs[u].append(v)
        nbrs[v].append(u)
    stack = [v for v in range(n) if deg[v] < 2]
    removed = set(stack)
    while stack:
        v = stack.pop()
        for w in nbrs[v]:
            if w not in removed:
                deg[w] -= 1
                if deg[w] < 2:
                    removed.add(w)
                    stack.append(w)
    return {v for v in range(n) if v not in removed}


def find_rainbow_cycle(g: ColoredGraph, budget: int = DEFAULT_BUDGET) -> SearchOutcome:
    """Shortest rainbow cycle by iterative deepening, or a proof that none exists.

    Parallel edges (necessarily of distinct colors in a proper coloring) give
    an immediate cycle of length 2.  Otherwise, for lengths ``L = 3, 4, ...``
    up to ``min(#vertices on cycles, #colors)``, a DFS from every root grows
    simple paths through larger-numbered vertices with unused colors and
    closes them back at the root.  Each DFS call counts as one expansion.
    """
    if not check_proper(g):
        raise PreconditionError("graph is not properly edge-colored")
    first_on_pair: dict[tuple[int, int], int] = {}
    for idx, (u, v, c) in enumerate(g.edges):
        key = (u, v) if u < v else (v, u)
        other = first_on_pair.setdefault(key, idx)
        if other != idx:
            a = g.edges[other]
            return Found(RainbowCycle((a[0], a[1]), (other, idx), (a[2], c)), 0)

    core = _two_core(g.n_vertices, g.edges)
    colors = sorted({c for u, v, c in g.edges if u in core and v in core})
    max_len = min(len(core), len(colors))
    if max_len < 3:
        return AbsentProven(0)
    cbit = {c: 1 << j for j, c in enumerate(colors)}
    adj: dict[int, list[tuple[int, int, int, int]]] = {v: [] for v in core}
    for idx, (u, v, c) in enumerate(g.edges):
        if u in core and v in core:
            adj[u].append((c, v, idx, cbit[c]))
            adj[v].append((c, u, idx, cbit[c]))
    for v in adj:
        adj[v].sort(key=lambda t: (t[0], t[1], t[2]))
    roots = sorted(core)

    nodes = 0
    path_v: list[int] = []
    path_e: list[int] = []

    def dfs(u: int, depth: int, used: int, target_len: int, root: int) -> None:
        nonlocal nodes
        nodes += 1
        if nodes > budget:
            raise _OutOfBudget
        if depth == target_len - 1:
            for c, w, idx, bit in adj[u]:
                if w == root and not used & bit:
                    raise _Hit(idx)
            return
        for c, w, idx, bit in adj[u]:
            if w > root and not used & bit and w not in on_path:
                on_path.add(w)
                path_v.append(w)
                path_e.append(idx)
                dfs(w, depth + 1, used | bit, target_len, root)
                path_v.pop()
                path_e.pop()
                on_path.discard(w)

    try:
        for target_len in range(3, max_len + 1):
            for root in roots:
                on_path = {root}
                path_v[:] = [root]
                path_e[:] = []
                dfs(root, 0, 0, target_len, root)
    except _OutOfBudget:
        return BudgetExhausted(budget)
    except _Hit as hit:
        edge_ids = tuple(path_e) + (hit.payload,)
        return Found(RainbowCycle(tuple(path_v), edge_ids, tuple(g.edges[e][2] for e in edge_ids)), nodes)
    return AbsentProven(nodes)


def verify_rainbow_cycle(g: ColoredGraph, cycle: RainbowCycle) -> bool:
    m = len(cycle.edges)
    if m < 2 or len(cycle.vertices) != m or len(cycle.colors) != m:
        return False
    seen_colors = set()
    parity = 0
    for s, e in enumerate(cycle.edges):
        if not 0 <= e < len(g.edges):
            return False
        u, v, c = g.edges[e]
        a, b = cycle.vertices[s], cycle.vertices[(s + 1) % m]
        if {u, v} != {a, b} or c != cycle.colors[s] or c in seen_colors:
            return False
        seen_colors.add(c)
        parity ^= (1 << u) ^ (1 << v)
    return parity == 0


# ---------------------------------------------------------------- even covers


def _edge_mask(edge: Sequence[int]) -> int:
    mask = 0
    for x in edge:
        mask |= 1 << int(x)
    return mask


def find_rainbow_even_cover(matchings: Mapping[int, Sequence[Sequence[int]]],
                            budget: int = DEFAULT_BUDGET) -> SearchOutcome:
    """Nonempty set of hyperedges, at most one per color, whose symmetric difference is empty.

    ``matchings`` maps a color to its hyperedges (all of one size ``r``,
    pairwise disjoint within a color).  Search by cover size: identical
    hyperedges in two colors give size 2 directly; then, for ``L = 3, 4, ...``,
    the smallest-color hyperedge of the cover is fixed and the lowest index
    still covered an odd number of times is repaired by a hyperedge of a
    larger unused color containing it.
    """
    items = []  # (color rank, mask, color, position)
    sizes = set()
    color_list = sorted(matchings)
    for rank_c, color in enumerate(color_list):
        union = 0
        for pos, e in enumerate(matchings[color]):
            mask = _edge_mask(e)
            if mask.bit_count() != len(e):
                raise PreconditionError(f"color {color}: hyperedge {list(e)} repeats an index")
            if union & mask:
                raise PreconditionError(f"color {color} is not a matching")
            union |= mask
            sizes.add(len(e))
            items.append((rank_c, mask, color, pos))
    if len(sizes) > 1:
        raise PreconditionError("hyperedges must all have the same size")
    if not items:
        return AbsentProven(0)
    r = sizes.pop()

    first_with_mask: dict[int, int] = {}
    for j, it in enumerate(items):
        other = first_with_mask.setdefault(it[1], j)
        if other != j:
            return Found(_make_cover(items, [other, j]), 0)

    by_vertex: dict[int, list[int]] = {}
    for j, (_, mask, _, _) in enumerate(items):
        m = mask
        while m:
            low = m & -m
            by_vertex.setdefault(low.bit_length() - 1, []).append(j)
            m ^= low
    n_colors = len({it[0] for it in items})
    nodes = 0
    chosen: list[int] = []

    def dfs(mask: int, used: int, min_rank: int, depth: int, limit: int) -> None:
        nonlocal nodes
        nodes += 1
        if nodes > budget:
            raise _OutOfBudget
        if mask == 0:
            raise _Hit(list(chosen))
        if depth == limit or mask.bit_count() > (limit - depth) * r:
            return
        low = mask & -mask
        for j in by_vertex[low.bit_length() - 1]:
            rank_c, emask = items[j][0], items[j][1]
            if rank_c > min_rank and not used >> rank_c & 1:
                chosen.append(j)
                dfs(mask ^ emask, used | 1 << rank_c, min_rank, depth + 1, limit)
                chosen.pop()

    try:
        for limit in range(3, n_colors + 1):
            for j, (rank_c, mask, _, _) in enumerate(items):
                chosen[:] = [j]
                dfs(mask, 1 << rank_c, rank_c, 1, limit)
    except _OutOfBudget:
        return BudgetExhausted(budget)
    except _Hit as hit:
        return Found(_make_cover(items, hit.payload), nodes)
    return AbsentProven(nodes)


def _make_cover(items, picks: Sequence[int]) -> RainbowEvenCover:
    chosen = sorted((items[j] for j in picks), key=lambda it: it[0])
    edges = tuple((it[2], tuple(_positions(it[1]))) for it in chosen)
    return RainbowEvenCover(edges, tuple(it[3] for it in chosen))


def _positions(mask: int) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def verify_even_cover(cover: RainbowEvenCover, matchings: Mapping[int, Sequence[Sequence[int]]] | None = None) -> bool:
    """Check nonempty, one hyperedge per color, empty symmetric difference (and membership if ``matchings`` given)."""
    if not cover.edges:
        return False
    colors = [c for c, _ in cover.edges]
    if len(set(colors)) != len(colors):
        return False
    parity = 0
    for c, e in cover.edges:
        parity ^= _edge_mask(e)
        if matchings is not None:
            if c not in matchings or tuple(sorted(e)) not in {tuple(sorted(x)) for x in matchings[c]}:
                return False
    return parity == 0


# ---------------------------------------------------------------- direct sum


@dataclass(frozen=True)
class DirectSumGraph:
    """Proper subgraph of the direct-sum graph plus provenance of each edge.

    Vertex ``v`` is the subset ``subsets[v]``; edge ``e`` of ``graph`` joins two
    subsets whose symmetric difference is ``edge_map[e] = (color, hyperedge)``.
    """

    graph: ColoredGraph
    subsets: tuple[tuple[int, ...], ...]
    edge_map: tuple[tuple[int, tuple[int, ...]], ...]
    removed: int = 0
    vertex_of: dict = field(default_factory=dict, compare=False, repr=False)


def direct_sum_graph(matchings: Mapping[int, Sequence[Sequence[int]]], ell: int, n: int | None = None,
                     cap: int = DEFAULT_BUDGET) -> DirectSumGraph:
    """Edges ``{A, B}`` of color ``i`` between ``ell``-subsets with ``A xor B`` in ``H_i``.

    Edges incident to another edge of the same color are deleted, leaving a
    properly colored graph.  ``cap`` bounds both ``C(n, ell)`` and the number
    of edges materialized.
    """
    all_edges = [tuple(sorted(int(x) for x in e)) for c in matchings for e in matchings[c]]
    if n is None:
        n = max((e[-1] for e in all_edges), default=-1) + 1
    sizes = {len(e) for e in all_edges}
    if len(sizes) > 1:
        raise PreconditionError("hyperedges must all have the same size")
    if not all_edges:
        return DirectSumGraph(ColoredGraph(0, ()), (), ())
    r = sizes.pop()
    if r % 2:
        raise PreconditionError(f"direct sum needs even r, got r={r}")
    half = r // 2
    if not half <= ell <= n - half:
        raise PreconditionError(f"need r/2 <= ell <= n - r/2, got ell={ell} (r={r}, n={n})")
    if math.comb(n, ell) > cap:
        raise PreconditionError(f"C({n}, {ell}) = {math.comb(n, ell)} subsets exceeds the cap {cap}")
    per_edge = math.comb(r, half) // 2 * math.comb(n - r, ell - half)
    if per_edge * len(all_edges) > cap:
        raise PreconditionError(f"{per_edge * len(all_edges)} direct-sum edges exceed the cap {cap}")

    raw = []  # (maskA, maskB, color, hyperedge)
    for color in sorted(matchings):
        for e in matchings[color]:
            e = tuple(sorted(int(x) for x in e))
            emask = _edge_mask(e)
            rest = [x for x in range(n) if not emask >> x & 1]
            for s in combinations(e, half):
                if s[0] != e[0]:
                    continue  # {S, E\S} and {E\S, S} are the same edge
                smask = _edge_mask(s)
                for extra in combinations(rest, ell - half):
                    xmask = _edge_mask(extra)
                    raw.append((smask | xmask, (emask ^ smask) | xmask, color, e))

    degree: dict[tuple[int, int], int] = {}
    for a, b, c, _ in raw:
        degree[(a, c)] = degree.get((a, c), 0) + 1
        degree[(b, c)] = degree.get((b, c), 0) + 1
    kept = [t for t in raw if degree[(t[0], t[2])] == 1 and degree[(t[1], t[2])] == 1]

    masks = sorted({m for a, b, _, _ in kept for m in (a, b)}, key=lambda m: _positions(m))
    vertex_of = {m: v for v, m in enumerate(masks)}
    graph = ColoredGraph(len(masks), tuple((vertex_of[a], vertex_of[b], c) for a, b, c, _ in kept))
    if not check_proper(graph):
        raise ConsistencyError("direct-sum subgraph is not properly colored after filtering")
    return DirectSumGraph(
        graph,
        tuple(tuple(_positions(m)) for m in masks),
        tuple((c, e) for _, _, c, e in kept),
        len(raw) - len(kept),
        vertex_of,
    )


def lift_cycle_to_cover(cycle: RainbowCycle, ds: DirectSumGraph) -> RainbowEvenCover:
    """Turn a rainbow cycle ``A_1 .. A_m`` of the direct-sum graph into the cover ``{A_s xor A_{s+1}}``."""
    m = len(cycle.edges)
    picked = []
    for s, e in enumerate(cycle.edges):
        color, hyperedge = ds.edge_map[e]
        a = _edge_mask(ds.subsets[cycle.vertices[s]])
        b = _edge_mask(ds.subsets[cycle.vertices[(s + 1) % m]])
        if a ^ b != _edge_mask(hyperedge):
            raise ConsistencyError(f"edge {e}: subsets do not differ by its hyperedge {hyperedge}")
        picked.append((color, hyperedge))
    cover = RainbowEvenCover(tuple(sorted(picked)))
    if not verify_even_cover(cover):
        raise ConsistencyError(f"lifted cycle is not a rainbow even cover: {picked}")
    return cover
