import random
from fractions import Fraction

import pytest

from _brute import pairwise_disjoint
from overlap_lab.combinatorics import binom, elements_of, mask_from_elements
from overlap_lab.cyclic import (
    CyclicOrder,
    arc_chain_families,
    arcs,
    block_matching,
    case2_replay,
    random_matching,
    random_overlapping_arc_chain,
    random_partition,
    run_cyclic_suite,
    verify_cyclic_lemma,
    verify_partition_bound,
    verify_random_matching_bound,
)
from overlap_lab.family import Chain, Family, construction_chain
from overlap_lab.matching import is_overlapping


def test_cyclic_order_validation():
    CyclicOrder((2, 3, 1))
    with pytest.raises(ValueError):
        CyclicOrder((1, 1, 2))
    assert CyclicOrder.identity(5).order == (1, 2, 3, 4, 5)


def test_arcs_identity_example():
    arc = arcs(CyclicOrder.identity(6), 2)
    got = [elements_of(m) for m in arc.masks]
    assert got == [(1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (1, 6)]
    assert len(arc) == 6


def test_arcs_element_coverage():
    for n, k in [(6, 2), (7, 3), (9, 4)]:
        arc = arcs(CyclicOrder.identity(n), k)
        assert len(arc) == n
        for e in range(1, n + 1):
            bit = 1 << (e - 1)
            assert sum(bool(m & bit) for m in arc.masks) == k


def test_arcs_respect_permutation():
    sigma = CyclicOrder((3, 1, 4, 2, 5))
    arc = arcs(sigma, 2)
    assert elements_of(arc.masks[0]) == (1, 3)
    assert elements_of(arc.masks[4]) == (3, 5)  # wraps to the head


def test_arcs_rejects_bad_k():
    with pytest.raises(ValueError):
        arcs(CyclicOrder.identity(5), 5)
    with pytest.raises(ValueError):
        arcs(CyclicOrder.identity(5), 0)


def test_block_matching_examples():
    sigma = CyclicOrder.identity(6)
    got = [elements_of(m) for m in block_matching(sigma, 2, 0)]
    assert got == [(1, 2), (3, 4), (5, 6)]
    sigma7 = CyclicOrder.identity(7)
    got7 = [elements_of(m) for m in block_matching(sigma7, 2, 0)]
    assert got7 == [(1, 2), (3, 4), (5, 6)]  # t = 3, element 7 unused


def test_block_matching_disjoint_all_heads():
    for n in range(2, 21):
        for k in range(1, n):
            sigma = CyclicOrder.identity(n)
            for head in range(n):
                assert pairwise_disjoint(block_matching(sigma, k, head))


def test_consecutive_arcs_pairwise_intersect():
    for n in range(4, 13):
        for k in range(2, n // 2 + 1):
            arc = arcs(CyclicOrder.identity(n), k)
            for i in range(n):
                window = [arc.masks[(i + d) % n] for d in range(k)]
                for a in range(k):
                    for b in range(a + 1, k):
                        assert window[a] & window[b], (n, k, i, a, b)


# ---------------------------------------------------------------------------
# the arc-chain inequality and exact head-average identity
# ---------------------------------------------------------------------------

def test_cyclic_lemma_all_arcs():
    # B_0 empty, every other level all arcs: the weighted count is n*s exactly
    n, k, s, p = 9, 2, 2, 3
    arc = arcs(CyclicOrder.identity(n), k)
    full = (1 << n) - 1
    rep = verify_cyclic_lemma(arc, (0, full, full), p)
    assert rep["lhs"] == n * s
    assert rep["inequality_holds"] and rep["identity_holds"]


def test_cyclic_lemma_rejects_bad_chains():
    arc = arcs(CyclicOrder.identity(8), 2)
    with pytest.raises(ValueError):
        verify_cyclic_lemma(arc, (0b11, 0b01), 1)  # not nested
    full = (1 << 8) - 1
    with pytest.raises(ValueError):
        verify_cyclic_lemma(arc, (full, full), 1)  # rainbow pair exists


def test_cyclic_lemma_identity_exact_random():
    rng = random.Random(42)
    for n, k, s, p in [(9, 2, 2, 1), (8, 2, 1, 3), (12, 3, 1, 2)]:
        arc = arcs(CyclicOrder.identity(n), k)
        for _ in range(200):
            arc_sets = random_overlapping_arc_chain(arc, s, rng)
            rep = verify_cyclic_lemma(arc, arc_sets, p, trials=5, seed=7)
            assert rep["identity_holds"], (n, k, s, p, arc_sets)
            assert rep["inequality_holds"], (n, k, s, p, arc_sets)
            assert Fraction(rep["head_average"]) == Fraction(rep["exact_expectation"])


def test_random_chain_sampler_output_contract():
    rng = random.Random(5)
    arc = arcs(CyclicOrder.identity(9), 2)
    for _ in range(100):
        arc_sets = random_overlapping_arc_chain(arc, 2, rng)
        assert len(arc_sets) == 3
        for a, b in zip(arc_sets, arc_sets[1:]):
            assert not a & ~b
        assert is_overlapping(arc_chain_families(arc, arc_sets))


def test_run_cyclic_suite_deterministic():
    cells = [(9, 2, 2, 1), (8, 2, 1, 2)]
    one = run_cyclic_suite(cells, 60, seed=9)
    two = run_cyclic_suite(cells, 60, seed=9)
    assert one == two
    assert one["summary"]["status"] == "pass"
    other = run_cyclic_suite(cells, 60, seed=10)
    assert other["summary"]["status"] == "pass"


def test_case2_replay_structure():
    n, k = 8, 2
    arc = arcs(CyclicOrder.identity(n), k)
    full = (1 << n) - 1
    rep = case2_replay(arc, (0b1111, full), p=2)
    t, r = n // k, n - (n // k) * k
    assert r == 0 and rep["dropped_heads"] == []
    assert len(rep["block_matchings"]) == k
    for group in rep["block_matchings"]:
        assert len(group["heads"]) == t
    assert rep["degrees_sorted"] == sorted(rep["degrees_sorted"])
    total = sum(g["weight"] for g in rep["block_matchings"])
    assert total == sum(rep["degrees_sorted"])
    assert rep["tie_break"] == "head position"


# ---------------------------------------------------------------------------
# random partitions
# ---------------------------------------------------------------------------

def test_random_partition_covers_ground_set():
    rng = random.Random(31)
    for _ in range(100):
        blocks = random_partition(6, 2, rng)
        assert len(blocks) == 3
        union = 0
        for b in blocks:
            assert not union & b
            union |= b
        assert union == (1 << 6) - 1


def test_partition_bound_on_clique_chain():
    chain = construction_chain("clique", 4, 2, 1)
    rep = verify_partition_bound(chain, (3, 1), trials=20000, seed=12)
    assert rep["status"] == "pass"
    assert rep["violations"] == [] and rep["cover_size_violations"] == 0
    assert abs(rep["z_score"]) <= 3
    exact = Fraction(rep["exact_expectation"])
    sizes = [len(f) for f in chain.families]
    assert exact == (3 * sizes[0] + 1 * sizes[1]) * Fraction(2, binom(4, 2))


def test_partition_bound_empty_chain():
    chain = Chain((Family.empty(4, 2), Family.empty(4, 2)))
    rep = verify_partition_bound(chain, (1, 1), trials=50, seed=3)
    assert rep["status"] == "pass"
    assert Fraction(rep["mean"]) == 0 == Fraction(rep["exact_expectation"])


def test_partition_bound_requires_exact_n():
    chain = construction_chain("cover", 6, 2, 1)
    with pytest.raises(ValueError):
        verify_partition_bound(chain, (1, 1), trials=10, seed=0)


def test_partition_reports_reproducible():
    chain = construction_chain("clique", 4, 2, 1)
    a = verify_partition_bound(chain, (2, 1), trials=500, seed=77)
    b = verify_partition_bound(chain, (2, 1), trials=500, seed=77)
    assert a == b


# ---------------------------------------------------------------------------
# random matchings
# ---------------------------------------------------------------------------

def test_random_matching_sampler_uniform():
    # n=5, k=2: ordered pairs of disjoint 2-sets; 10 * 3 = 30 outcomes
    rng = random.Random(2025)
    outcomes = {}
    trials = 30000
    for _ in range(trials):
        blocks = tuple(random_matching(5, 2, rng))
        outcomes[blocks] = outcomes.get(blocks, 0) + 1
    # support equals the exhaustive enumeration of ordered disjoint tuples
    table = [mask_from_elements(c) for c in [(a, b) for a in range(1, 6) for b in range(a + 1, 6)]]
    exhaustive = {
        (x, y) for x in table for y in table if not x & y
    }
    assert set(outcomes) == exhaustive and len(exhaustive) == 30
    expected = trials / 30
    chisq = sum((got - expected) ** 2 / expected for got in outcomes.values())
    # df = 29; the 0.999 quantile is ~58.3, far above any healthy seeded run
    assert chisq < 58.3, chisq


def test_random_matching_bound_empty_chain():
    chain = Chain((Family.empty(8, 2),) * 2)
    rep = verify_random_matching_bound(chain, (1, 1), trials=100, seed=5)
    assert rep["status"] == "pass"
    assert Fraction(rep["mean"]) == 0 and Fraction(rep["max_observed"]) == 0


def test_random_matching_bound_cover_chain():
    chain = construction_chain("cover", 8, 2, 1)
    rep = verify_random_matching_bound(chain, (1, 1), trials=20000, seed=6)
    assert rep["status"] == "pass"
    assert rep["bound_applies"] and rep["violations"] == []
    t = 8 // 2
    assert Fraction(rep["max_observed"]) <= t * 1
    for row in rep["membership"]:
        assert abs(row["z_score"]) <= 3
        assert Fraction(row["expected"]) == Fraction(len(chain.families[row["family"]]), binom(8, 2))


def test_random_matching_reports_reproducible():
    chain = construction_chain("cover", 9, 2, 2)
    a = verify_random_matching_bound(chain, (2, 1, 1), trials=400, seed=99)
    b = verify_random_matching_bound(chain, (2, 1, 1), trials=400, seed=99)
    assert a == b
