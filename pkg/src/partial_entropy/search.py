"""Exact branch-and-bound searches on small graphs and set systems.

Vertex and element sets are Python ints used as bitsets, which keeps the
inner loops to a handful of integer operations for graphs of up to a few
dozen vertices.
"""

from __future__ import annotations

from typing import Sequence


def bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def popcount(mask: int) -> int:
    return bin(mask).count("1")


def _color_sort(P: int, nbr: Sequence[int]) -> tuple[list[int], list[int]]:
    """Greedy sequential colouring; vertices returned in nondecreasing colour."""
    order, colors = [], []
    uncolored = P
    color = 0
    while uncolored:
        color += 1
        Q = uncolored
        while Q:
            low = Q & -Q
            v = low.bit_length() - 1
            Q &= ~nbr[v] & ~low
            uncolored &= ~low
            order.append(v)
            colors.append(color)
    return order, colors


def max_clique(nbr: Sequence[int], P: int) -> int:
    """Vertex bitmask of a maximum clique inside ``P`` (colouring bound)."""
    best = [0, 0]  # size, mask

    def expand(size: int, R: int, P: int):
        order, colors = _color_sort(P, nbr)
        for v, col in zip(reversed(order), reversed(colors)):
            if size + col <= best[0]:
                return
            vb = 1 << v
            newP = P & nbr[v]
            if newP:
                expand(size + 1, R | vb, newP)
            elif size + 1 > best[0]:
                best[0], best[1] = size + 1, R | vb
            P &= ~vb

    if P:
        expand(0, 0, P)
    return best[1]


def max_independent_set(nbr: Sequence[int], P: int) -> int:
    """Maximum independent set inside ``P``, as a max clique of the complement."""
    comp = [(P & ~nb) & ~(1 << v) if (P >> v) & 1 else 0 for v, nb in enumerate(nbr)]
    return max_clique(comp, P)


def maximal_cliques(nbr: Sequence[int], P: int) -> list[int]:
    """All maximal cliques inside ``P`` (Bron-Kerbosch with pivoting)."""
    out: list[int] = []

    def bk(R: int, P: int, X: int):
        if not P and not X:
            out.append(R)
            return
        PX = P | X
        pivot = max(bits(PX), key=lambda u: popcount(P & nbr[u]))
        for v in bits(P & ~nbr[pivot]):
            vb = 1 << v
            bk(R | vb, P & nbr[v], X & nbr[v])
            P &= ~vb
            X |= vb

    if P:
        bk(0, P, 0)
    return out


def greedy_set_cover(universe: int, sets: Sequence[int]) -> list[int]:
    chosen = []
    left = universe
    while left:
        k = max(range(len(sets)), key=lambda i: popcount(sets[i] & left))
        if not sets[k] & left:
            raise ValueError("sets do not cover the universe")
        chosen.append(k)
        left &= ~sets[k]
    return chosen


def min_set_cover(universe: int, sets: Sequence[int]) -> list[int]:
    """Indices of a minimum-cardinality subfamily covering ``universe``."""
    if not universe:
        return []
    sets = list(sets)
    # drop members dominated by another member
    order = sorted(range(len(sets)), key=lambda i: -popcount(sets[i] & universe))
    kept: list[int] = []
    for i in order:
        s = sets[i] & universe
        if s and not any((s & ~sets[j]) == 0 for j in kept):
            kept.append(i)
    containing: dict[int, list[int]] = {}
    for i in kept:
        for e in bits(sets[i] & universe):
            containing.setdefault(e, []).append(i)
    if popcount(universe) != len(containing):
        raise ValueError("sets do not cover the universe")

    best = greedy_set_cover(universe, [sets[i] if i in kept else 0 for i in range(len(sets))])
    best_size = [len(best)]
    best_sol = [best]
    memo: dict[int, int] = {}

    def lower_bound(left: int) -> int:
        # elements pairwise sharing no covering set each need their own set
        packed = 0
        used = 0
        for e in bits(left):
            cover = 0
            for i in containing[e]:
                cover |= 1 << i
            if not cover & used:
                used |= cover
                packed += 1
        biggest = max(popcount(sets[i] & left) for e in bits(left) for i in containing[e])
        return max(packed, -(-popcount(left) // biggest))

    def search(left: int, chosen: list[int]):
        if not left:
            if len(chosen) < best_size[0]:
                best_size[0] = len(chosen)
                best_sol[0] = list(chosen)
            return
        if len(chosen) + lower_bound(left) >= best_size[0]:
            return
        seen = memo.get(left)
        if seen is not None and seen <= len(chosen):
            return
        memo[left] = len(chosen)
        e = min(bits(left), key=lambda x: len(containing[x]))
        for i in sorted(containing[e], key=lambda i: -popcount(sets[i] & left)):
            chosen.append(i)
            search(left & ~sets[i], chosen)
            chosen.pop()

    search(universe, [])
    return best_sol[0]


def min_dominating_set(nbr: Sequence[int], P: int) -> list[int]:
    """Minimum set ``D`` inside ``P`` with every vertex of ``P`` in ``D`` or next to it."""
    verts = list(bits(P))
    closed = [(nbr[v] | (1 << v)) & P for v in verts]
    return [verts[i] for i in min_set_cover(P, closed)]


def min_clique_cover(nbr: Sequence[int], P: int) -> list[int]:
    """Minimum number of cliques covering ``P``; returned as clique bitmasks."""
    cliques = maximal_cliques(nbr, P)
    return [cliques[i] for i in min_set_cover(P, cliques)]
