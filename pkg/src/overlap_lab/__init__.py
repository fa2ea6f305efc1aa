"""Exact desk-scale toolkit for weighted overlapping-chain extremal problems.

Computes the maximum weighted size sum over nested families of k-sets that
admit no full rainbow matching, by two independent exact solvers, and
replays the closed-form bounds, constructions, and randomized averaging
arguments that pin those optima down.
"""

__version__ = "0.1.0"

from .combinatorics import binom, colex_rank, colex_unrank, ksets, shift_leq
from .family import (
    Chain,
    Family,
    compress_pair,
    construction_chain,
    cover_family,
    enumerate_shifted_families,
    is_shifted,
    nestify,
    reduce_to_weighted,
    shift_closure,
    shift_ij,
)
from .matching import (
    BipartiteGraph,
    is_overlapping,
    matching_number,
    max_bipartite_matching,
    min_vertex_cover,
    rainbow_matching_number,
)
from .bounds import (
    bde_check,
    conj1_value,
    conj2_bound,
    d_vec,
    evaluate_bound,
    g,
    g_argmax,
    gb_emc_bound,
    hilton_bound,
    thm1_bound,
    thm2_value,
    thm3_value,
    thm4_value,
    u_eval,
    u_zero,
    weight_vector,
)
from .search import (
    ExtremalRecord,
    exact_f_shifted,
    hunt_conjectures,
    oracle_f,
    verify_theorem,
)
from .cyclic import (
    ArcFamily,
    CyclicOrder,
    arcs,
    block_matching,
    verify_cyclic_lemma,
    verify_partition_bound,
    verify_random_matching_bound,
)

__all__ = [name for name in dir() if not name.startswith("_")]
