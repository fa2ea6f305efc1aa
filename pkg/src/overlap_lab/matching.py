"""Exact matching computations.

matching_number finds the largest set of pairwise disjoint members of one
family; rainbow_matching_number finds the largest set of distinct family
indices admitting pairwise disjoint representatives.  Both are bitmask
backtracking with memoization, exact at desk scale.  The bipartite solver
is plain augmenting paths with the alternating-reachability minimum cover.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .combinatorics import iter_bits
from .family import Chain, Family


def matching_number(fam: Family) -> int:
    """Largest number of pairwise disjoint members of the family."""
    return _max_disjoint(list(fam.members()), fam.n, fam.k, stop_at=None)


def has_matching_of_size(fam: Family, size: int) -> bool:
    """True iff the family contains `size` pairwise disjoint members."""
    if size <= 0:
        return True
    return _max_disjoint(list(fam.members()), fam.n, fam.k, stop_at=size) >= size


def _max_disjoint(masks: list[int], n: int, k: int, stop_at: int | None) -> int:
    best = 0
    count = len(masks)
    cap = n // k if k else 0

    def rec(i: int, used: int, size: int) -> None:
        nonlocal best
        if size > best:
            best = size
        if stop_at is not None and best >= stop_at:
            return
        if i == count:
            return
        free_cap = (n - used.bit_count()) // k if k else 0
        if size + min(count - i, free_cap) <= best:
            return
        for j in range(i, count):
            if not masks[j] & used:
                rec(j + 1, used | masks[j], size + 1)
                if stop_at is not None and best >= stop_at:
                    return

    if k == 0:
        return min(count, 1)
    rec(0, 0, 0)
    return min(best, cap) if cap else best


def _common_params(fams: Sequence[Family]) -> tuple[int, int]:
    if not fams:
        raise ValueError("need at least one family")
    n, k = fams[0].n, fams[0].k
    for f in fams[1:]:
        if (f.n, f.k) != (n, k):
            raise ValueError("families must share (n, k)")
    return n, k


def rainbow_matching_number(fams: Sequence[Family]) -> int:
    """Largest r such that r distinct indices admit pairwise disjoint representatives."""
    n, k = _common_params(fams)
    m = len(fams)
    # smallest families first: their representatives are the scarcest
    order = sorted(range(m), key=lambda i: (len(fams[i]), i))
    lists = [list(fams[i].members()) for i in order]
    memo: dict[tuple[int, int], int] = {}

    def rec(pos: int, used: int) -> int:
        if pos == m:
            return 0
        key = (pos, used)
        hit = memo.get(key)
        if hit is not None:
            return hit
        cap = m - pos
        if k:
            cap = min(cap, (n - used.bit_count()) // k)
        best = 0
        if cap:
            for mask in lists[pos]:
                if not mask & used:
                    got = 1 + rec(pos + 1, used | mask)
                    if got > best:
                        best = got
                        if best == cap:
                            break
            if best < cap:
                best = max(best, rec(pos + 1, used))
        memo[key] = best
        return best

    return rec(0, 0)


def has_rainbow_matching(fams: Sequence[Family], size: int) -> bool:
    """True iff `size` distinct indices admit pairwise disjoint representatives."""
    if size <= 0:
        return True
    n, k = _common_params(fams)
    m = len(fams)
    if size > m or (k and size > n // k):
        return False
    order = sorted(range(m), key=lambda i: (len(fams[i]), i))
    lists = [list(fams[i].members()) for i in order]

    def rec(pos: int, used: int, got: int) -> bool:
        if got == size:
            return True
        if m - pos < size - got:
            return False
        if k and (n - used.bit_count()) // k < size - got:
            return False
        for mask in lists[pos]:
            if not mask & used and rec(pos + 1, used | mask, got + 1):
                return True
        return rec(pos + 1, used, got)

    return rec(0, 0, 0)


def rainbow_matching_witness(fams: Sequence[Family]) -> list[tuple[int, int]]:
    """A maximum rainbow matching as (family index, member mask) pairs.

    Among maximum matchings, returns the one whose (index, colex rank)
    pair sequence is lexicographically least, so results are reproducible.
    """
    n, k = _common_params(fams)
    m = len(fams)
    lists = [list(f.members()) for f in fams]
    memo: dict[tuple[int, int], int] = {}

    def value(pos: int, used: int) -> int:
        if pos == m:
            return 0
        key = (pos, used)
        hit = memo.get(key)
        if hit is not None:
            return hit
        best = value(pos + 1, used)
        for mask in lists[pos]:
            if not mask & used:
                best = max(best, 1 + value(pos + 1, used | mask))
        memo[key] = best
        return best

    total = value(0, 0)
    witness: list[tuple[int, int]] = []
    used = 0
    need = total
    for pos in range(m):
        if need == 0:
            break
        taken = False
        for mask in lists[pos]:  # colex order: least-rank representative first
            if not mask & used and 1 + value(pos + 1, used | mask) == need:
                witness.append((pos, mask))
                used |= mask
                need -= 1
                taken = True
                break
        if not taken:
            assert value(pos + 1, used) == need
    return witness


def is_overlapping(chain: Chain) -> bool:
    """True iff the chain admits no rainbow matching of size s+1."""
    return not has_rainbow_matching(chain.families, chain.s + 1)


# ---------------------------------------------------------------------------
# bipartite matching and the minimum vertex cover
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BipartiteGraph:
    """Left/right labeled vertices; adj[u] is the bitmask of right neighbors of left u."""

    left: tuple
    right: tuple
    adj: tuple[int, ...]
    right_weights: tuple[Fraction, ...] | None = None

    def __post_init__(self) -> None:
        if len(self.adj) != len(self.left):
            raise ValueError("adjacency list length must match left side")
        nr = len(self.right)
        for row in self.adj:
            if row < 0 or row >> nr:
                raise ValueError("edge endpoints outside right side")
        if self.right_weights is not None and len(self.right_weights) != nr:
            raise ValueError("right_weights length must match right side")

    def edge_count(self) -> int:
        return sum(row.bit_count() for row in self.adj)


def max_bipartite_matching(g: BipartiteGraph) -> tuple[tuple[int, int], ...]:
    """Maximum matching as (left index, right index) pairs, via augmenting paths."""
    nl, nr = len(g.left), len(g.right)
    match_l = [-1] * nl
    match_r = [-1] * nr

    def augment(u: int, visited: list[bool]) -> bool:
        for v in iter_bits(g.adj[u]):
            if not visited[v]:
                visited[v] = True
                if match_r[v] < 0 or augment(match_r[v], visited):
                    match_l[u] = v
                    match_r[v] = u
                    return True
        return False

    for u in range(nl):
        augment(u, [False] * nr)
    return tuple((u, match_l[u]) for u in range(nl) if match_l[u] >= 0)


def min_vertex_cover(g: BipartiteGraph) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Minimum vertex cover as (left indices, right indices); |cover| = |max matching|.

    Alternating reachability from unmatched left vertices: the cover is the
    unreached left side plus the reached right side.
    """
    nl, nr = len(g.left), len(g.right)
    matching = max_bipartite_matching(g)
    match_l = [-1] * nl
    match_r = [-1] * nr
    for u, v in matching:
        match_l[u] = v
        match_r[v] = u

    reach_l = [match_l[u] < 0 for u in range(nl)]
    reach_r = [False] * nr
    frontier = [u for u in range(nl) if reach_l[u]]
    while frontier:
        nxt = []
        for u in frontier:
            for v in iter_bits(g.adj[u]):
                if not reach_r[v]:
                    reach_r[v] = True
                    w = match_r[v]
                    if w >= 0 and not reach_l[w]:
                        reach_l[w] = True
                        nxt.append(w)
        frontier = nxt

    lefts = tuple(u for u in range(nl) if not reach_l[u])
    rights = tuple(v for v in range(nr) if reach_r[v])
    return lefts, rights


def cover_is_valid(g: BipartiteGraph, cover: tuple[tuple[int, ...], tuple[int, ...]]) -> bool:
    """Every edge has an endpoint in the cover."""
    lefts, rights = set(cover[0]), 0
    for v in cover[1]:
        rights |= 1 << v
    for u, row in enumerate(g.adj):
        if u not in lefts and row & ~rights:
            return False
    return True
