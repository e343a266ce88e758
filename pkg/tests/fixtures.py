"""Seeded random inputs shared by several test modules."""

from __future__ import annotations

import numpy as np

from rainbowlcc.rainbow import ColoredGraph


def random_proper_graph(rng: np.random.Generator, n_vertices: int, n_edges: int, n_colors: int) -> ColoredGraph:
    """Up to ``n_edges`` random edges (parallel edges allowed), each given a color free at both ends."""
    edges = []
    used: set[tuple[int, int]] = set()
    for _ in range(n_edges):
        u, v = rng.choice(n_vertices, 2, replace=False).tolist()
        free = [c for c in range(n_colors) if (u, c) not in used and (v, c) not in used]
        if not free:
            continue
        c = free[int(rng.integers(len(free)))]
        used.update({(u, c), (v, c)})
        edges.append((u, v, c))
    return ColoredGraph(n_vertices, tuple(edges))


def random_matchings(rng: np.random.Generator, n: int, r: int, n_colors: int, per_color: int) -> dict[int, list[tuple[int, ...]]]:
    """``per_color`` disjoint random ``r``-sets of ``range(n)`` for each color."""
    out = {}
    for c in range(n_colors):
        picked = rng.permutation(n)[: r * per_color].reshape(per_color, r)
        out[c] = [tuple(sorted(e)) for e in picked.tolist()]
    return out


def xor_lcc(k: int, r: int, per_target: int, seed: int):
    """Rows ``0 .. 2^k - 1`` as vectors; ``H_i`` is a greedy packing of random disjoint ``r``-sets with XOR ``i``."""
    from fractions import Fraction

    from rainbowlcc.gf import BitMatrix
    from rainbowlcc.instance import LccInstance

    n = 1 << k
    matchings = {}
    for i in range(n):
        rng = np.random.default_rng([seed, i])
        used = {i}
        edges = []
        for _ in range(50 * per_target):
            if len(edges) == per_target:
                break
            head = [int(v) for v in rng.choice(n, r - 1, replace=False)]
            last = i
            for v in head:
                last ^= v
            edge = set(head) | {last}
            if len(edge) == r and not edge & used:
                used |= edge
                edges.append(sorted(edge))
        matchings[i] = edges
    return LccInstance(n, k, r, BitMatrix(tuple(range(n)), k), matchings, Fraction(per_target, n))


def random_support(rng: np.random.Generator, n: int, size: int) -> tuple[int, ...]:
    return tuple(sorted(rng.choice(n, size, replace=False).tolist()))
