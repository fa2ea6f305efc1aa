"""Cyclic-order averaging and random-partition verification harnesses.

A cyclic order sigma on [n] induces n arcs (windows of k consecutive
positions).  The harnesses here replay three averaging arguments on
concrete instances: the arc-chain inequality with its exact head-average
identity, the random-partition cover bound at n = (s+1)k, and the random
t-matching bound.  Every randomized report carries its seed and trial
count; identical seeds reproduce identical reports.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .combinatorics import binom, mask_from_elements
from .family import Chain, Family
from .matching import BipartiteGraph, is_overlapping, min_vertex_cover


@dataclass(frozen=True)
class CyclicOrder:
    """A cyclic permutation of [n], stored as the tuple (x_0, ..., x_{n-1})."""

    order: tuple[int, ...]

    def __post_init__(self) -> None:
        n = len(self.order)
        if n < 1 or sorted(self.order) != list(range(1, n + 1)):
            raise ValueError("order must be a permutation of 1..n")

    @classmethod
    def identity(cls, n: int) -> "CyclicOrder":
        return cls(tuple(range(1, n + 1)))

    @property
    def n(self) -> int:
        return len(self.order)


@dataclass(frozen=True)
class ArcFamily:
    """The n arcs of length k on a cyclic order, indexed by head position."""

    sigma: CyclicOrder
    k: int
    masks: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.masks)

    def family(self) -> Family:
        return Family.from_masks(self.sigma.n, self.k, set(self.masks))


def arcs(sigma: CyclicOrder, k: int) -> ArcFamily:
    """All n windows of k consecutive positions (mod n) as k-set masks."""
    n = sigma.n
    if not 1 <= k < n:
        raise ValueError(f"need 1 <= k < n, got k={k}, n={n}")
    masks = []
    for head in range(n):
        masks.append(mask_from_elements(sigma.order[(head + j) % n] for j in range(k)))
    return ArcFamily(sigma, k, tuple(masks))


def block_matching(sigma: CyclicOrder, k: int, head: int) -> list[int]:
    """t = floor(n/k) pairwise disjoint arcs starting at head, stepping by k."""
    n = sigma.n
    if not 0 <= head < n:
        raise ValueError(f"head {head} outside 0..{n - 1}")
    arc = arcs(sigma, k)
    t = n // k
    return [arc.masks[(head + j * k) % n] for j in range(t)]


# ---------------------------------------------------------------------------
# arc chains
# ---------------------------------------------------------------------------

def arc_chain_families(arc: ArcFamily, arc_sets: Sequence[int]) -> Chain:
    """Build a Chain from bitsets over arc head positions (nested, ascending)."""
    n, k = arc.sigma.n, arc.k
    fams = []
    for bits in arc_sets:
        masks = {arc.masks[i] for i in range(n) if bits >> i & 1}
        fams.append(Family.from_masks(n, k, masks))
    return Chain(tuple(fams))


def _arc_degrees(arc: ArcFamily, arc_sets: Sequence[int], p: int) -> list[int]:
    """Degree of each arc in the head-weighted incidence graph (head family counted p times)."""
    n = arc.sigma.n
    s = len(arc_sets) - 1
    deg = []
    for i in range(n):
        d = p * (arc_sets[0] >> i & 1)
        for j in range(1, s + 1):
            d += arc_sets[j] >> i & 1
        deg.append(d)
    return deg


def verify_cyclic_lemma(
    arc: ArcFamily,
    arc_sets: Sequence[int],
    p: int,
    trials: int = 0,
    seed: int = 0,
) -> dict:
    """Check the arc-chain inequality and the exact head-average identity.

    arc_sets are bitsets over head positions forming a nested chain
    B_0 <= ... <= B_s of sub-families of the arcs; the chain must be
    overlapping (checked, not assumed).  The inequality is
    p|B_0| + |B_1| + ... + |B_s| <= max{ns, (p+s)ks}.  The head average of
    e(M, Y) over all n block matchings M is compared exactly with
    (t/n) * e(X, Y); `trials` extra random heads report the sampled mean
    and maximum.
    """
    n, k = arc.sigma.n, arc.k
    s = len(arc_sets) - 1
    if p < 1:
        raise ValueError(f"head multiplicity p must be a positive integer, got {p}")
    for a, b in zip(arc_sets, arc_sets[1:]):
        if a & ~b:
            raise ValueError("arc chain is not nested")
    chain = arc_chain_families(arc, arc_sets)
    if not is_overlapping(chain):
        raise ValueError("arc chain is not overlapping")
    if n < (k + 1) * s:
        raise ValueError(f"need n >= (k+1)s, got n={n}, k={k}, s={s}")

    sizes = [bits.bit_count() for bits in arc_sets]
    lhs = p * sizes[0] + sum(sizes[1:])
    rhs = max(n * s, (p + s) * k * s)

    deg = _arc_degrees(arc, arc_sets, p)
    e_xy = sum(deg)
    t = n // k

    def block_weight(head: int) -> int:
        return sum(deg[(head + j * k) % n] for j in range(t))

    per_head = [block_weight(h) for h in range(n)]
    exact_average = Fraction(sum(per_head), n)
    expected = Fraction(t * e_xy, n)

    rng = random.Random(seed)
    sampled = [block_weight(rng.randrange(n)) for _ in range(trials)]
    return {
        "seed": seed,
        "trials": trials,
        "n": n,
        "k": k,
        "s": s,
        "p": p,
        "lhs": lhs,
        "rhs": rhs,
        "inequality_holds": lhs <= rhs,
        "edge_total": e_xy,
        "exact_expectation": str(expected),
        "head_average": str(exact_average),
        "identity_holds": exact_average == expected,
        "violations": [] if lhs <= rhs else [{"lhs": lhs, "rhs": rhs}],
        "mean": str(Fraction(sum(sampled), len(sampled))) if sampled else str(exact_average),
        "max_observed": max(sampled) if sampled else max(per_head),
    }


def random_overlapping_arc_chain(
    arc: ArcFamily, s: int, rng: random.Random
) -> tuple[int, ...]:
    """Rejection-sample a nested overlapping chain of arc sub-families.

    Each arc independently joins the chain at a random level (or never)
    with a per-trial random density, so sparse and near-critical instances
    both appear; non-overlapping draws are rejected and redrawn.
    """
    n, k = arc.sigma.n, arc.k
    while True:
        density = rng.random()
        arc_sets = [0] * (s + 1)
        for i in range(n):
            if rng.random() < density:
                level = rng.randrange(s + 1)
                for j in range(level, s + 1):
                    arc_sets[j] |= 1 << i
        chain = arc_chain_families(arc, arc_sets)
        if is_overlapping(chain):
            return tuple(arc_sets)


def run_cyclic_suite(
    cells: Sequence[tuple[int, int, int, int]],
    trials: int,
    seed: int,
) -> dict:
    """Run the arc-chain harness on random chains, spreading trials over cells.

    cells are (n, k, s, p); each gets its own deterministic sub-seed.
    The per-cell count rounds up so at least `trials` chains run in total.
    """
    per_cell = max(1, -(-trials // max(1, len(cells))))
    rows = []
    total_violations = 0
    identity_failures = 0
    for idx, (n, k, s, p) in enumerate(cells):
        arc = arcs(CyclicOrder.identity(n), k)
        rng = random.Random(seed * 1_000_003 + idx)
        worst = None
        for _ in range(per_cell):
            arc_sets = random_overlapping_arc_chain(arc, s, rng)
            rep = verify_cyclic_lemma(arc, arc_sets, p)
            if not rep["inequality_holds"]:
                total_violations += 1
            if not rep["identity_holds"]:
                identity_failures += 1
            margin = rep["rhs"] - rep["lhs"]
            if worst is None or margin < worst:
                worst = margin
        rows.append(
            {
                "n": n,
                "k": k,
                "s": s,
                "p": p,
                "trials": per_cell,
                "min_margin": worst,
                "status": "ok",
            }
        )
    status = "pass" if total_violations == 0 and identity_failures == 0 else "fail"
    return {
        "suite": "cyclic",
        "seed": seed,
        "rows": rows,
        "summary": {
            "trials": per_cell * len(cells),
            "violations": total_violations,
            "identity_failures": identity_failures,
            "status": status,
        },
    }


def case2_replay(arc: ArcFamily, arc_sets: Sequence[int], p: int) -> dict:
    """Deterministic replay of the degree-sorted block decomposition.

    Sorts arcs by degree (ties broken by head position), drops the r
    lowest-degree arcs (r = n - tk), groups the remaining heads into k
    interleaved block matchings, and reports the intermediate quantities.
    Purely observational; not part of any solver.
    """
    n, k = arc.sigma.n, arc.k
    t = n // k
    r = n - t * k
    deg = _arc_degrees(arc, arc_sets, p)
    order = sorted(range(n), key=lambda i: (deg[i], i))
    kept = sorted(order[r:])
    groups = []
    for j in range(k):
        heads = [kept[j + i * k] for i in range(t)]
        weight = sum(deg[h] for h in heads)
        groups.append({"heads": heads, "weight": weight})
    return {
        "degrees_sorted": [deg[i] for i in order],
        "deg_at_cut": deg[order[r - 1]] if r else None,
        "dropped_heads": sorted(order[:r]),
        "block_matchings": groups,
        "tie_break": "head position",
    }


# ---------------------------------------------------------------------------
# random partitions at n = (s+1)k
# ---------------------------------------------------------------------------

def _chain_weighted_graph(
    blocks: Sequence[int], chain: Chain, weights: Sequence[Fraction]
) -> BipartiteGraph:
    adj = []
    for mask in blocks:
        row = 0
        for j, fam in enumerate(chain.families):
            if mask in fam:
                row |= 1 << j
        adj.append(row)
    return BipartiteGraph(
        tuple(blocks),
        tuple(range(len(chain.families))),
        tuple(adj),
        tuple(Fraction(w) for w in weights),
    )


def _graph_weight(g: BipartiteGraph) -> Fraction:
    total = Fraction(0)
    for row in g.adj:
        for j in range(len(g.right)):
            if row >> j & 1:
                total += g.right_weights[j]
    return total


def random_partition(n: int, k: int, rng: random.Random) -> list[int]:
    """Uniform random ordered partition of [n] into n/k blocks of size k."""
    perm = list(range(1, n + 1))
    rng.shuffle(perm)
    return [mask_from_elements(perm[i * k : (i + 1) * k]) for i in range(n // k)]


def verify_partition_bound(chain: Chain, weights: Sequence, trials: int, seed: int) -> dict:
    """Random-partition replay of the cover-counting bound at n = (s+1)k.

    Per partition: total edge weight of the block-vs-family incidence graph
    is at most s * sum(w), and the minimum vertex cover has size at most s.
    The sampled mean is compared against the exact expectation
    sum_j w_j |B_j| (s+1) / C(n,k) and reported with a z-score.
    """
    from .bounds import weight_vector

    ws = weight_vector(weights)
    n, k, s = chain.n, chain.k, chain.s
    if len(ws) != s + 1:
        raise ValueError("weight vector length must be s+1")
    if n != (s + 1) * k:
        raise ValueError(f"partition bound needs n = (s+1)k, got n={n}")
    if not is_overlapping(chain):
        raise ValueError("chain is not overlapping")

    cap = s * sum(ws)
    expectation = sum(
        (w * len(f) for w, f in zip(ws, chain.families)), Fraction(0)
    ) * Fraction(s + 1, binom(n, k))

    rng = random.Random(seed)
    violations = []
    cover_violations = 0
    total = Fraction(0)
    total_sq = Fraction(0)
    max_observed = Fraction(0)
    for trial in range(trials):
        blocks = random_partition(n, k, rng)
        g = _chain_weighted_graph(blocks, chain, ws)
        w_total = _graph_weight(g)
        lefts, rights = min_vertex_cover(g)
        if len(lefts) + len(rights) > s:
            cover_violations += 1
        if w_total > cap:
            violations.append({"trial": trial, "weight": str(w_total)})
        total += w_total
        total_sq += w_total * w_total
        max_observed = max(max_observed, w_total)

    mean = total / trials if trials else Fraction(0)
    var = total_sq / trials - mean * mean if trials else Fraction(0)
    sigma_mean = float(var) ** 0.5 / trials**0.5 if trials else 0.0
    z = float(mean - expectation) / sigma_mean if sigma_mean else 0.0
    return {
        "seed": seed,
        "trials": trials,
        "violations": violations,
        "cover_size_violations": cover_violations,
        "per_partition_cap": str(cap),
        "mean": str(mean),
        "exact_expectation": str(expectation),
        "z_score": z,
        "max_observed": str(max_observed),
        "status": "pass" if not violations and not cover_violations and abs(z) <= 3 else "fail",
    }


# ---------------------------------------------------------------------------
# random matchings for general n
# ---------------------------------------------------------------------------

def random_matching(n: int, k: int, rng: random.Random) -> list[int]:
    """t = floor(n/k) disjoint k-sets by sequential uniform choice from the leftovers."""
    pool = list(range(1, n + 1))
    rng.shuffle(pool)
    t = n // k
    return [mask_from_elements(pool[i * k : (i + 1) * k]) for i in range(t)]


def verify_random_matching_bound(chain: Chain, weights: Sequence, trials: int, seed: int) -> dict:
    """Random t-matching replay of the tail-weight bound.

    Per sample: the total edge weight is at most t * (w_1 + ... + w_s)
    whenever n is above the proven threshold (reported either way), and the
    frequency of the first block landing in each family is compared with
    |B_j| / C(n,k), with z-scores.
    """
    from .bounds import thm4_threshold, weight_vector

    ws = weight_vector(weights)
    n, k, s = chain.n, chain.k, chain.s
    if len(ws) != s + 1:
        raise ValueError("weight vector length must be s+1")
    if not is_overlapping(chain):
        raise ValueError("chain is not overlapping")

    t = n // k
    threshold = thm4_threshold(k, ws)
    bound_applies = n >= threshold
    cap = t * sum(ws[1:], Fraction(0))
    total_sets = binom(n, k)
    # each of the t blocks is marginally uniform over C([n], k)
    expectation = sum(
        (t * w * Fraction(len(f), total_sets) for w, f in zip(ws, chain.families)),
        Fraction(0),
    )

    rng = random.Random(seed)
    violations = []
    hits = [0] * (s + 1)
    total = Fraction(0)
    total_sq = Fraction(0)
    max_observed = Fraction(0)
    for trial in range(trials):
        blocks = random_matching(n, k, rng)
        w_total = Fraction(0)
        for j, fam in enumerate(chain.families):
            for mask in blocks:
                if mask in fam:
                    w_total += ws[j]
            if blocks[0] in fam:
                hits[j] += 1
        if bound_applies and w_total > cap:
            violations.append({"trial": trial, "weight": str(w_total)})
        total += w_total
        total_sq += w_total * w_total
        max_observed = max(max_observed, w_total)

    freq_rows = []
    for j, fam in enumerate(chain.families):
        expected = Fraction(len(fam), total_sets)
        observed = Fraction(hits[j], trials) if trials else Fraction(0)
        p = float(expected)
        sigma = (p * (1 - p) / trials) ** 0.5 if trials and 0 < p < 1 else 0.0
        z = float(observed - expected) / sigma if sigma else 0.0
        freq_rows.append(
            {
                "family": j,
                "expected": str(expected),
                "observed": str(observed),
                "z_score": z,
            }
        )
    freq_ok = all(abs(row["z_score"]) <= 3 for row in freq_rows)
    mean = total / trials if trials else Fraction(0)
    var = total_sq / trials - mean * mean if trials else Fraction(0)
    sigma_mean = float(var) ** 0.5 / trials**0.5 if trials else 0.0
    mean_z = float(mean - expectation) / sigma_mean if sigma_mean else 0.0
    return {
        "seed": seed,
        "trials": trials,
        "bound_applies": bound_applies,
        "threshold_n": threshold,
        "cap": str(cap),
        "violations": violations,
        "mean": str(mean),
        "exact_expectation": str(expectation),
        "mean_z_score": mean_z,
        "max_observed": str(max_observed),
        "membership": freq_rows,
        "status": "pass" if not violations and freq_ok and abs(mean_z) <= 3 else "fail",
    }
