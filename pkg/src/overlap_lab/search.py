"""Exact optimization of the weighted size sum over overlapping nested chains.

Two independent routes compute the same optimum:

* oracle_f enumerates entry-level maps (each k-set gets the first chain
  index containing it, or none), which is a bijection onto nested chains,
  with branch-and-bound pruning and an incremental rainbow-feasibility
  check per assignment.

* exact_f_shifted enumerates nested chains of shifted families top-down
  (B_s over all downsets of the shift order, each lower family over
  sub-downsets of its parent).

Agreement of the two on every co-runnable instance is a tested invariant,
not an assumption.  Witness tie-breaking is deterministic: smallest total
cardinality first, then the lexicographically least entry-level sequence
read in colex order.
"""
from __future__ import annotations

import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from . import bounds as _bounds
from .combinatorics import binom, ksets
from .family import (
    CONSTRUCTION_KINDS,
    Chain,
    Family,
    chain_to_dict,
    construction_chain,
    cover_family,
    downset_bitsets,
    reduce_to_weighted,
)
from .matching import has_matching_of_size, is_overlapping

ORACLE_CANDIDATE_LIMIT = 1 << 36


class InstanceTooLargeError(ValueError):
    """The raw search space exceeds the configured candidate guard."""


class NodeLimitError(RuntimeError):
    """The solver exceeded the configured node budget."""

    def __init__(self, message: str, nodes: int):
        super().__init__(message)
        self.nodes = nodes


@dataclass(frozen=True)
class ExtremalRecord:
    """Solver output: exact optimum, witness chain, and provenance."""

    n: int
    k: int
    s: int
    weights: tuple[Fraction, ...]
    optimum: Fraction
    witness: Chain
    solver: str
    nodes_explored: int
    wall_time: float
    m: int | None = None

    def to_dict(self, include_timing: bool = False) -> dict:
        out = {
            "n": self.n,
            "k": self.k,
            "s": self.s,
            "weights": [str(w) if w.denominator != 1 else int(w) for w in self.weights],
            "optimum": int(self.optimum) if self.optimum.denominator == 1 else str(self.optimum),
            "witness": chain_to_dict(self.witness),
            "solver": self.solver,
            "nodes_explored": self.nodes_explored,
        }
        if self.m is not None:
            out["m"] = self.m
        if include_timing:
            out["wall_time"] = self.wall_time
        return out


def _normalize_weights(s: int, weights: Sequence) -> tuple[Fraction, ...]:
    ws = _bounds.solver_weights(weights)
    if len(ws) != s + 1:
        raise ValueError(f"need s+1 = {s + 1} weights, got {len(ws)}")
    return ws


def best_construction(n: int, k: int, s: int, weights: Sequence) -> tuple[Fraction, str]:
    """Largest construction value among the named chains; used as a warm start."""
    ws = _normalize_weights(s, weights)
    best_val = Fraction(-1)
    best_kind = ""
    for kind in CONSTRUCTION_KINDS:
        if kind == "clique" and n < (s + 1) * k - 1:
            continue
        if kind == "cover":
            # for s > n every k-set already meets the ground set
            chain = Chain((cover_family(n, k, min(s, n)),) * (s + 1))
        else:
            chain = construction_chain(kind, n, k, s)
        val = chain.weighted_value(ws)
        if val > best_val:
            best_val, best_kind = val, kind
    return best_val, best_kind


def _disjointness(n: int, k: int) -> list[int]:
    table = ksets(n, k)
    count = len(table)
    out = [0] * count
    for i in range(count):
        mi = table[i]
        acc = 0
        for j in range(count):
            if not mi & table[j]:
                acc |= 1 << j
        out[i] = acc
    return out


def _validated_record(record: ExtremalRecord) -> ExtremalRecord:
    chain = record.witness
    if not is_overlapping(chain):
        raise AssertionError("solver returned a non-overlapping witness")
    if chain.weighted_value(record.weights) != record.optimum:
        raise AssertionError("witness value does not match reported optimum")
    return record


# ---------------------------------------------------------------------------
# oracle: entry-level maps over all nested chains
# ---------------------------------------------------------------------------

def oracle_f(
    n: int,
    k: int,
    s: int,
    weights: Sequence,
    *,
    limit_candidates: int = ORACLE_CANDIDATE_LIMIT,
    limit_nodes: int | None = None,
    warm_start: bool = True,
    m: int | None = None,
) -> ExtremalRecord:
    """Exact maximum of sum w_i |B_i| over all nested overlapping chains.

    Enumerates, with sound pruning, every map assigning each k-set the
    first index at which it enters the chain (or never).  The raw
    candidate count (s+2)^C(n,k) must stay within limit_candidates.
    """
    t0 = time.perf_counter()
    ws = _normalize_weights(s, weights)
    capacity = binom(n, k)
    raw = (s + 2) ** capacity
    if raw > limit_candidates:
        raise InstanceTooLargeError(
            f"oracle space (s+2)^C(n,k) = {raw} exceeds guard {limit_candidates}"
        )
    disj = _disjointness(n, k)
    sum_w = sum(ws)
    contrib = [sum(ws[lvl:], Fraction(0)) for lvl in range(s + 1)]
    lead0 = 0
    while lead0 <= s and ws[lead0] == 0:
        lead0 += 1
    # entry levels below lead0 add cardinality but no value: dominated, skip
    min_cards = s + 1 - lead0

    fam_bits = [0] * (s + 1)
    best_val = Fraction(-1)
    best_card: int | None = None
    best_chain: tuple[int, ...] | None = None
    if warm_start:
        best_val, _ = best_construction(n, k, s, ws)
    nodes = 0

    def completes_rainbow(rank: int, level: int) -> bool:
        # does adding this set at `level` create disjoint representatives
        # for all s+1 indices, with the new set standing at some index >= level?
        def rep_search(idx: int, avail: int, standing: int) -> bool:
            if idx == s + 1:
                return True
            if idx == standing:
                return rep_search(idx + 1, avail, standing)
            cand = fam_bits[idx] & avail
            while cand:
                low = cand & -cand
                r = low.bit_length() - 1
                if rep_search(idx + 1, avail & disj[r], standing):
                    return True
                cand ^= low
            return False

        for standing in range(level, s + 1):
            if rep_search(0, disj[rank], standing):
                return True
        return False

    def explore(pos: int, val: Fraction, card: int) -> None:
        nonlocal best_val, best_card, best_chain, nodes
        nodes += 1
        if limit_nodes is not None and nodes > limit_nodes:
            raise NodeLimitError(f"oracle exceeded {limit_nodes} nodes", nodes)
        if pos == capacity:
            if val > best_val or (val == best_val and (best_card is None or card < best_card)):
                best_val, best_card, best_chain = val, card, tuple(fam_bits)
            return
        rem = capacity - pos
        potential = val + rem * sum_w
        if potential < best_val:
            return
        if potential == best_val and best_card is not None and card + rem * min_cards >= best_card:
            # a value tie forces full-contribution levels for the rest, so the
            # cardinality cannot beat the incumbent; first-found ties are key-least
            return
        bit = 1 << pos
        for level in range(lead0, s + 1):
            if not completes_rainbow(pos, level):
                for i in range(level, s + 1):
                    fam_bits[i] |= bit
                explore(pos + 1, val + contrib[level], card + (s + 1 - level))
                for i in range(level, s + 1):
                    fam_bits[i] &= ~bit
        explore(pos + 1, val, card)

    explore(0, Fraction(0), 0)
    if best_chain is None:
        # warm value was optimal but ties were never completed; cannot happen
        # because the warm value comes from a feasible chain in the search space
        raise AssertionError("search completed without a witness")
    witness = Chain(tuple(Family(n, k, b) for b in best_chain))
    record = ExtremalRecord(
        n, k, s, ws, best_val, witness, "oracle", nodes, time.perf_counter() - t0, m
    )
    return _validated_record(record)


# ---------------------------------------------------------------------------
# shifted solver: top-down nested downset chains
# ---------------------------------------------------------------------------

def _level_key(chain_bits: Sequence[int], capacity: int, s: int) -> tuple[int, ...]:
    """Entry level of each rank (s+1 for absent): the canonical witness key."""
    key = []
    for r in range(capacity):
        lvl = s + 1
        for i, b in enumerate(chain_bits):
            if b >> r & 1:
                lvl = i
                break
        key.append(lvl)
    return tuple(key)


def exact_f_shifted(
    n: int,
    k: int,
    s: int,
    weights: Sequence,
    *,
    limit_downsets: int = 10**7,
    limit_nodes: int | None = None,
    warm_start: bool = True,
    m: int | None = None,
) -> ExtremalRecord:
    """Exact maximum of sum w_i |B_i| over nested chains of shifted families.

    B_s ranges over all downsets of the shift order, then each lower family
    over sub-downsets of its parent, largest first, with value-bound
    pruning.  Equals oracle_f whenever both run (the compression and
    shifting reductions preserve the optimum); that equality is enforced
    by tests rather than assumed here.
    """
    t0 = time.perf_counter()
    ws = _normalize_weights(s, weights)
    capacity = binom(n, k)
    downs = downset_bitsets(n, k, limit_downsets)
    by_size = sorted(downs, key=lambda d: (-d.bit_count(), d))
    disj = _disjointness(n, k)
    lead0 = 0
    while lead0 <= s and ws[lead0] == 0:
        lead0 += 1
    prefix_w = [sum(ws[: j + 1], Fraction(0)) for j in range(s + 1)]

    best_val = Fraction(-1)
    best_card: int | None = None
    best_key: tuple[int, ...] | None = None
    best_chain: tuple[int, ...] | None = None
    if warm_start:
        best_val, _ = best_construction(n, k, s, ws)
    nodes = 0
    chain_bits = [0] * (s + 1)

    def offer(val: Fraction, card: int) -> None:
        nonlocal best_val, best_card, best_key, best_chain
        if val < best_val:
            return
        key = None
        if val == best_val and best_card is not None:
            if card > best_card:
                return
            if card == best_card:
                key = _level_key(chain_bits, capacity, s)
                if best_key is not None and key >= best_key:
                    return
        best_val, best_card, best_chain = val, card, tuple(chain_bits)
        best_key = key if key is not None else _level_key(chain_bits, capacity, s)

    def suffix_has_full_rainbow(first: int) -> bool:
        # disjoint representatives for every index in chain_bits[first..s]
        def rep_search(idx: int, avail: int) -> bool:
            if idx > s:
                return True
            cand = chain_bits[idx] & avail
            while cand:
                low = cand & -cand
                r = low.bit_length() - 1
                if rep_search(idx + 1, avail & disj[r]):
                    return True
                cand ^= low
            return False

        return rep_search(first, (1 << capacity) - 1)

    def descend(j: int, val: Fraction, card: int) -> None:
        nonlocal nodes
        parent = chain_bits[j + 1] if j < s else None
        if j < lead0:
            # zero-weight head: the empty family is uniquely optimal in
            # (value, cardinality) and always feasible
            for i in range(j + 1):
                chain_bits[i] = 0
            offer(val, card)
            return
        if j == 0 and not suffix_has_full_rainbow(1):
            # no rainbow matching uses indices 1..s fully, so any B_0 works;
            # B_0 = B_1 maximizes the head term (its weight is positive here)
            chain_bits[0] = chain_bits[1]
            sz = chain_bits[0].bit_count()
            offer(val + ws[0] * sz, card + sz)
            return
        candidates = by_size if parent is None else [d for d in by_size if not d & ~parent]
        for d in candidates:
            nodes += 1
            if limit_nodes is not None and nodes > limit_nodes:
                raise NodeLimitError(f"shifted search exceeded {limit_nodes} nodes", nodes)
            size = d.bit_count()
            val2 = val + ws[j] * size
            card2 = card + size
            potential = val2 + (prefix_w[j - 1] * size if j else Fraction(0))
            if potential < best_val:
                continue
            if (
                potential == best_val
                and best_card is not None
                and card2 + max(j - lead0, 0) * size > best_card
            ):
                # a value tie fills every positive-weight level below with
                # copies of d and every zero-weight level with the empty family
                continue
            chain_bits[j] = d
            if j == 0:
                if not suffix_has_full_rainbow(0):
                    offer(val2, card2)
            else:
                descend(j - 1, val2, card2)
        chain_bits[j] = 0

    if s == 0:
        # a single family: overlapping means no rainbow 1-matching, i.e. B_0 empty
        chain_bits[0] = 0
        offer(Fraction(0), 0)
    else:
        descend(s, Fraction(0), 0)
    if best_chain is None:
        raise AssertionError("search completed without a witness")
    witness = Chain(tuple(Family(n, k, b) for b in best_chain))
    record = ExtremalRecord(
        n, k, s, ws, best_val, witness, "shifted", nodes, time.perf_counter() - t0, m
    )
    return _validated_record(record)


SOLVERS = {"oracle": oracle_f, "shifted": exact_f_shifted}


# ---------------------------------------------------------------------------
# theorem verification sweeps
# ---------------------------------------------------------------------------

THEOREM_SUITES = ("hilton", "thm1", "thm2-k1", "thm3", "thm4")

_THM34_VECTORS = ((1, 1), (2, 1), (3, 1), (1, 1, 1), (4, 2, 1))


def _f_str(v: Fraction) -> int | str:
    v = Fraction(v)
    return int(v) if v.denominator == 1 else str(v)


def verify_theorem(
    name: str,
    grid: dict | None = None,
    *,
    limit_nodes: int | None = None,
) -> dict:
    """Compare solver optima against a named closed form over a grid.

    Returns {"suite", "rows", "summary"}; each row records the parameters,
    both values, the expected relation, and ok/violation status.
    Violations are data, not errors.
    """
    grid = dict(grid or {})
    rows: list[dict] = []

    def emit(params: dict, solver_value: Fraction, formula_value, relation: str) -> None:
        solver_value = Fraction(solver_value)
        formula_value = Fraction(formula_value)
        ok = solver_value == formula_value if relation == "equal" else solver_value <= formula_value
        rows.append(
            {
                **params,
                "solver_value": _f_str(solver_value),
                "formula_value": _f_str(formula_value),
                "relation": relation,
                "status": "ok" if ok else "VIOLATION",
            }
        )

    if name == "hilton":
        for n in grid.get("n", range(4, 8)):
            for k in grid.get("k", (2,)):
                for mm in grid.get("m", range(1, 5)):
                    w = reduce_to_weighted(mm, 1)
                    rec = oracle_f(n, k, 1, w, limit_nodes=limit_nodes, m=mm)
                    emit(
                        {"n": n, "k": k, "m": mm, "weights": list(w)},
                        rec.optimum,
                        _bounds.hilton_bound(n, k, mm),
                        "equal",
                    )
    elif name == "thm1":
        for k in grid.get("k", (1, 2)):
            for s in grid.get("s", (1, 2)):
                for n in grid.get("n", range(2, 9)):
                    if n < (s + 1) * k:
                        continue
                    for p in grid.get("p", (1, 2, 3)):
                        w = (p,) + (1,) * s
                        rec = exact_f_shifted(n, k, s, w, limit_nodes=limit_nodes)
                        emit(
                            {"n": n, "k": k, "s": s, "p": p},
                            rec.optimum,
                            _bounds.thm1_bound(n, k, p, s),
                            "le",
                        )
    elif name == "thm2-k1":
        for s in grid.get("s", (1, 2)):
            for n in grid.get("n", range(2, 13)):
                if n < 4 * s:
                    continue
                for p in grid.get("p", range(1, 13)):
                    w = (p,) + (1,) * s
                    rec = exact_f_shifted(n, 1, s, w, limit_nodes=limit_nodes)
                    emit(
                        {"n": n, "k": 1, "s": s, "p": p},
                        rec.optimum,
                        _bounds.thm2_value(n, 1, p, s),
                        "equal",
                    )
    elif name == "thm3":
        for k, s in grid.get("ks", ((1, 1), (1, 2), (2, 1))):
            for w in grid.get("weights", _THM34_VECTORS):
                if len(w) != s + 1:
                    continue
                n = (s + 1) * k
                rec = exact_f_shifted(n, k, s, w, limit_nodes=limit_nodes)
                emit(
                    {"n": n, "k": k, "s": s, "weights": list(w)},
                    rec.optimum,
                    _bounds.thm3_value(k, s, w),
                    "equal",
                )
    elif name == "thm4":
        caps = grid.get("caps", {1: 12, 2: 6})
        for k in grid.get("k", (1, 2)):
            for w in grid.get("weights", _THM34_VECTORS):
                s = len(w) - 1
                lo = _bounds.thm4_threshold(k, w)
                hi = caps.get(k, 0)
                for n in range(lo, hi + 1):
                    rec = exact_f_shifted(n, k, s, w, limit_nodes=limit_nodes)
                    emit(
                        {"n": n, "k": k, "s": s, "weights": list(w)},
                        rec.optimum,
                        _bounds.thm4_value(n, k, w),
                        "equal",
                    )
    else:
        raise KeyError(f"unknown theorem suite {name!r}; known: {THEOREM_SUITES}")

    bad = sum(r["status"] != "ok" for r in rows)
    return {
        "suite": name,
        "rows": rows,
        "summary": {"rows": len(rows), "violations": bad, "status": "pass" if bad == 0 else "fail"},
    }


# ---------------------------------------------------------------------------
# conjecture hunts
# ---------------------------------------------------------------------------

def _default_conj1_cells() -> Iterable[tuple[int, int, int, int]]:
    for p in (1, 2, 3):
        for s in (1, 2):
            for n in range(s + 1, 13):
                yield n, 1, s, p
        for n in range(4, 9):
            yield n, 2, 1, p
        for n in range(6, 9):
            yield n, 2, 2, p


def _default_conj2_cells() -> Iterable[tuple[int, int, int]]:
    for s in (1, 2):
        for n in range(s + 1, 13):
            yield n, 1, s
        for n in range(2 * (s + 1), 11):
            yield n, 2, s
    for n in range(6, 9):
        yield n, 3, 1
    yield 9, 3, 2


def max_min_overlapping(n: int, k: int, s: int, limit_downsets: int = 10**7) -> tuple[int, Family]:
    """Maximum of min_i |B_i| over overlapping nested chains, with witness family.

    For nested chains min_i |B_i| = |B_0|, and enlarging any family only
    tightens the rainbow constraint, so B_1 = ... = B_s = B_0 is the
    optimal completion: the hunt reduces to the largest shifted family
    whose matching number is at most s.
    """
    best_size = -1
    best_bits = 0
    for bits in downset_bitsets(n, k, limit_downsets):
        size = bits.bit_count()
        if size <= best_size:
            continue
        fam = Family(n, k, bits)
        if not has_matching_of_size(fam, s + 1):
            best_size, best_bits = size, bits
    return best_size, Family(n, k, best_bits)


def hunt_conjectures(name: str, grid: dict | None = None, *, limit_nodes: int | None = None) -> dict:
    """Search solver-feasible grids for counterexamples to the conjectured values.

    conj1 compares the solver optimum for weights (p,1,...,1) against the
    three-term candidate maximum; conj2 maximizes min_i |B_i| over
    overlapping chains and compares against its conjectured cap.  Any
    counterexample row carries the witness chain verbatim.
    """
    grid = dict(grid or {})
    rows: list[dict] = []
    if name == "conj1":
        for n, k, s, p in grid.get("cells", _default_conj1_cells()):
            w = (p,) + (1,) * s
            rec = exact_f_shifted(n, k, s, w, limit_nodes=limit_nodes)
            expected = Fraction(_bounds.conj1_value(n, k, p, s))
            if rec.optimum == expected:
                status = "ok"
            elif rec.optimum > expected:
                status = "COUNTEREXAMPLE"
            else:
                status = "BELOW-CONSTRUCTION"  # would indicate a solver defect
            row = {
                "n": n,
                "k": k,
                "s": s,
                "p": p,
                "solver_value": _f_str(rec.optimum),
                "conjectured": _f_str(expected),
                "status": status,
            }
            if status != "ok":
                row["witness"] = chain_to_dict(rec.witness)
            rows.append(row)
    elif name == "conj2":
        for n, k, s in grid.get("cells", _default_conj2_cells()):
            value, fam = max_min_overlapping(n, k, s)
            cap = _bounds.conj2_bound(n, k, s)
            status = "ok" if value <= cap else "COUNTEREXAMPLE"
            row = {
                "n": n,
                "k": k,
                "s": s,
                "max_min_size": value,
                "conjectured_cap": cap,
                "status": status,
            }
            if status != "ok":
                row["witness"] = chain_to_dict(Chain((fam,) * (s + 1)))
            rows.append(row)
    else:
        raise KeyError(f"unknown conjecture {name!r}; known: conj1, conj2")

    bad = sum(r["status"] != "ok" for r in rows)
    return {
        "suite": name,
        "rows": rows,
        "summary": {"rows": len(rows), "violations": bad, "status": "pass" if bad == 0 else "fail"},
    }
