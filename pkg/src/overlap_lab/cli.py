"""Command-line front end: formula sweeps, extremal search, verification suites.

Exit codes: 0 pass, 1 violation found, 2 usage error, 3 resource limit.
Reports are deterministic: the same configuration (including seed) yields
byte-identical output files.  While a sweep runs, finished rows stream to
the output path as JSON lines; on completion the path is rewritten as a
single JSON document {tool_version, config, rows, summary} (or kept as CSV
with a fixed header).  --resume <file> skips rows already present.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

from . import __version__
from . import bounds as _bounds
from . import cyclic as _cyclic
from . import search as _search
from .family import DownsetLimitError, construction_chain, reduce_to_weighted

EXIT_PASS = 0
EXIT_VIOLATION = 1
EXIT_USAGE = 2
EXIT_LIMIT = 3

VERIFY_SUITES = (
    "hilton",
    "thm1",
    "thm2-k1",
    "thm3",
    "thm4",
    "bde",
    "cyclic",
    "partition",
    "random-matching",
    "conj1",
    "conj2",
    "all",
)

RANDOMIZED_SUITES = {"cyclic", "partition", "random-matching"}

CYCLIC_CELLS = tuple(
    (n, k, s, p) for (n, k, s) in ((9, 2, 2), (8, 2, 1), (12, 3, 1)) for p in (1, 2, 3)
)


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def parse_range(spec: str) -> list[int]:
    """Inclusive ranges `a..b` and comma lists `a,b,c` (mixable)."""
    out: list[int] = []
    for part in spec.split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..", 1)
            lo, hi = int(lo), int(hi)
            if hi < lo:
                raise ValueError(f"empty range {part!r}")
            out.extend(range(lo, hi + 1))
        elif part:
            out.append(int(part))
    if not out:
        raise ValueError(f"empty grid spec {spec!r}")
    return out


def parse_weights(spec: str) -> tuple[Fraction, ...]:
    """Comma-separated integers or a/b rationals."""
    ws = tuple(Fraction(part.strip()) for part in spec.split(",") if part.strip())
    if not ws:
        raise ValueError(f"empty weight spec {spec!r}")
    return ws


def _range_arg(spec: str) -> list[int]:
    try:
        return parse_range(spec)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _weights_arg(spec: str) -> tuple[Fraction, ...]:
    try:
        return parse_weights(spec)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(str(exc))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="overlap-lab",
        description="Exact solver and verification suites for overlapping-chain extremal values.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--out", help="output path (default: stdout)")
        p.add_argument("--resume", metavar="FILE", help="skip rows already present in FILE")
        p.add_argument("--jobs", type=int, default=1, help="parallel workers for grid cells")
        p.add_argument("--seed", type=int, default=None, help="RNG seed for randomized work")
        p.add_argument("--ci", action="store_true", help="require an explicit --seed for randomized work")
        p.add_argument("--limit-nodes", type=int, default=None)
        p.add_argument("--limit-downsets", type=int, default=10**7)
        p.add_argument("--warm-start", choices=("on", "off"), default="on")

    p_bounds = sub.add_parser("bounds", help="evaluate a named formula over a grid")
    add_common(p_bounds)
    p_bounds.add_argument("--name", required=True, help=f"one of {sorted(_bounds.FORMULAS)}")
    for flag in ("--n", "--k", "--m", "--p", "--s", "--i", "--l"):
        p_bounds.add_argument(flag, type=_range_arg)
    p_bounds.add_argument("--weights", type=_weights_arg)

    p_search = sub.add_parser("search", help="exact extremal search over a grid")
    add_common(p_search)
    p_search.add_argument("--n", type=_range_arg, required=True)
    p_search.add_argument("--k", type=_range_arg, required=True)
    p_search.add_argument("--s", type=_range_arg)
    p_search.add_argument("--weights", type=_weights_arg)
    p_search.add_argument("--m", type=_range_arg, help="use weights (m-s, 1, ..., 1)")
    p_search.add_argument("--solver", choices=("oracle", "shifted", "both"), default="shifted")

    p_verify = sub.add_parser("verify", help="run a named verification suite")
    add_common(p_verify)
    p_verify.add_argument("--suite", required=True, choices=VERIFY_SUITES)
    p_verify.add_argument("--trials", type=int, default=None, help="trial count for randomized suites")

    p_match = sub.add_parser("matching", help="matching numbers of a family or chain file")
    p_match.add_argument("--family", metavar="FILE", help="family JSON file")
    p_match.add_argument("--chain", metavar="FILE", help="chain JSON file")

    return parser


# ---------------------------------------------------------------------------
# deterministic report writing with row streaming and resume
# ---------------------------------------------------------------------------

def _canon(obj):
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


class ReportWriter:
    """Streams rows; finalizes to a canonical JSON document or CSV table."""

    def __init__(self, fmt: str, out: str | None, config: dict, resume: str | None = None):
        self.fmt = fmt
        self.out = out
        self.config = config
        self.rows: list[dict] = []
        self._done: dict[str, dict] = {}
        self._stream = None
        if resume:
            self._load_resume(resume)
        if out:
            self._stream = open(out, "w", encoding="utf-8")
            if fmt == "json":
                self._stream.write(_canon({"tool_version": __version__, "config": config}) + "\n")

    def _load_resume(self, path: str) -> None:
        if not os.path.exists(path):
            return
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
        rows: list[dict] = []
        try:
            doc = json.loads(text)
            rows = doc.get("rows", []) if isinstance(doc, dict) else []
        except json.JSONDecodeError:
            for line in text.splitlines():
                line = line.strip()
                if not line:
                    continue
                try:
                    obj = json.loads(line)
                except json.JSONDecodeError:
                    continue  # truncated tail line
                if isinstance(obj, dict) and "cell" in obj:
                    rows.append(obj)
        for row in rows:
            if isinstance(row, dict) and "cell" in row:
                self._done[row["cell"]] = row

    def lookup(self, cell_key: str) -> dict | None:
        return self._done.get(cell_key)

    def emit(self, row: dict) -> None:
        self.rows.append(row)
        if self._stream and self.fmt == "json":
            self._stream.write(_canon(row) + "\n")
            self._stream.flush()

    def finalize(self, summary: dict) -> None:
        if self.fmt == "json":
            doc = {
                "tool_version": __version__,
                "config": self.config,
                "rows": self.rows,
                "summary": summary,
            }
            payload = json.dumps(doc, sort_keys=True, indent=2) + "\n"
            if self._stream:
                self._stream.close()
                tmp = self.out + ".tmp"
                with open(tmp, "w", encoding="utf-8") as fh:
                    fh.write(payload)
                os.replace(tmp, self.out)
            else:
                sys.stdout.write(payload)
        else:
            header: list[str] = []
            for row in self.rows:
                for key in row:
                    if key not in header:
                        header.append(key)
            buf = io.StringIO()
            writer = csv.writer(buf, lineterminator="\n")
            writer.writerow(header)
            for row in self.rows:
                writer.writerow([_csv_cell(row.get(h)) for h in header])
            payload = buf.getvalue()
            if self._stream:
                self._stream.write(payload)
                self._stream.close()
            else:
                sys.stdout.write(payload)
            print(f"# summary: {_canon(summary)}", file=sys.stderr)


def _csv_cell(value):
    if value is None:
        return ""
    if isinstance(value, (dict, list)):
        return _canon(value)
    return value


def _run_cells(cells, worker, jobs: int):
    """Map worker over cells, preserving order; optional process pool."""
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            yield from pool.map(worker, cells)
    else:
        yield from map(worker, cells)


# ---------------------------------------------------------------------------
# bounds subcommand
# ---------------------------------------------------------------------------

def _bounds_cells(args) -> list[dict]:
    spec = _bounds.FORMULAS[args.name]
    cells = [{}]
    for pname in spec.params:
        if pname == "weights":
            if args.weights is None:
                raise ValueError(f"formula {args.name!r} needs --weights")
            cells = [dict(c, weights=[str(w) for w in args.weights]) for c in cells]
            continue
        values = getattr(args, pname, None)
        if values is None:
            raise ValueError(f"formula {args.name!r} needs --{pname}")
        cells = [dict(c, **{pname: v}) for c in cells for v in values]
    return cells


def cmd_bounds(args) -> int:
    if args.name not in _bounds.FORMULAS:
        print(f"unknown formula {args.name!r}; known: {sorted(_bounds.FORMULAS)}", file=sys.stderr)
        return EXIT_USAGE
    try:
        cells = _bounds_cells(args)
    except ValueError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    config = {"command": "bounds", "name": args.name, "cells": len(cells)}
    writer = ReportWriter(args.format, args.out, config, args.resume)
    for cell in cells:
        key = _canon(cell)
        row = writer.lookup(key)
        if row is None:
            params = dict(cell)
            if "weights" in params:
                params["weights"] = tuple(Fraction(w) for w in params["weights"])
            report = _bounds.evaluate_bound(args.name, **params)
            row = {"cell": key, **report.to_row()}
        writer.emit(row)
    summary = {"rows": len(writer.rows), "status": "pass"}
    writer.finalize(summary)
    return EXIT_PASS


# ---------------------------------------------------------------------------
# search subcommand
# ---------------------------------------------------------------------------

def _search_one(cell: dict) -> dict:
    n, k, s = cell["n"], cell["k"], cell["s"]
    weights = tuple(Fraction(w) for w in cell["weights"])
    kwargs = {"limit_nodes": cell["limit_nodes"], "warm_start": cell["warm_start"]}
    out = {"cell": cell["key"], "n": n, "k": k, "s": s, "weights": [str(w) for w in weights]}
    if cell.get("m") is not None:
        out["m"] = cell["m"]
    try:
        if cell["solver"] in ("oracle", "both"):
            rec_o = _search.oracle_f(n, k, s, weights, limit_candidates=cell["limit_candidates"], **kwargs)
            out["oracle"] = rec_o.to_dict()
        if cell["solver"] in ("shifted", "both"):
            rec_s = _search.exact_f_shifted(n, k, s, weights, limit_downsets=cell["limit_downsets"], **kwargs)
            out["shifted"] = rec_s.to_dict()
        if cell["solver"] == "both":
            agree = out["oracle"]["optimum"] == out["shifted"]["optimum"]
            out["solvers_agree"] = agree
            out["status"] = "ok" if agree else "VIOLATION"
        else:
            out["status"] = "ok"
        rec = out.get("shifted") or out.get("oracle")
        out["optimum"] = rec["optimum"]
    except (_search.NodeLimitError, DownsetLimitError, _search.InstanceTooLargeError) as exc:
        out["status"] = "incomplete"
        out["error"] = str(exc)
    return out


def cmd_search(args) -> int:
    if args.weights is None and args.m is None:
        print("search needs --weights or --m", file=sys.stderr)
        return EXIT_USAGE
    if args.weights is not None and args.m is not None:
        print("--weights and --m are mutually exclusive", file=sys.stderr)
        return EXIT_USAGE
    cells = []
    for n in args.n:
        for k in args.k:
            if args.m is not None:
                for s in args.s or [1]:
                    for m in args.m:
                        try:
                            weights = reduce_to_weighted(m, s)
                        except ValueError as exc:
                            print(str(exc), file=sys.stderr)
                            return EXIT_USAGE
                        cells.append({"n": n, "k": k, "s": s, "m": m, "weights": [str(w) for w in weights]})
            else:
                s = len(args.weights) - 1
                if args.s and args.s != [s]:
                    print("--s must match the weight vector length minus one", file=sys.stderr)
                    return EXIT_USAGE
                cells.append({"n": n, "k": k, "s": s, "m": None, "weights": [str(w) for w in args.weights]})
    for cell in cells:
        cell["key"] = _canon({p: cell[p] for p in ("n", "k", "s", "m", "weights")})
        cell["solver"] = args.solver
        cell["limit_nodes"] = args.limit_nodes
        cell["limit_downsets"] = args.limit_downsets
        cell["limit_candidates"] = _search.ORACLE_CANDIDATE_LIMIT
        cell["warm_start"] = args.warm_start == "on"
    config = {
        "command": "search",
        "solver": args.solver,
        "cells": [c["key"] for c in cells],
        "limit_nodes": args.limit_nodes,
        "warm_start": args.warm_start,
    }
    writer = ReportWriter(args.format, args.out, config, args.resume)
    pending = [c for c in cells if writer.lookup(c["key"]) is None]
    results = iter(_run_cells(pending, _search_one, args.jobs))
    exit_code = EXIT_PASS
    for cell in cells:
        row = writer.lookup(cell["key"])
        if row is None:
            row = next(results)
        writer.emit(row)
        if row["status"] == "VIOLATION":
            exit_code = max(exit_code, EXIT_VIOLATION)
        elif row["status"] == "incomplete":
            exit_code = max(exit_code, EXIT_LIMIT)
    bad = sum(r["status"] != "ok" for r in writer.rows)
    writer.finalize({"rows": len(writer.rows), "violations": bad, "status": "pass" if bad == 0 else "fail"})
    return exit_code


# ---------------------------------------------------------------------------
# verify subcommand
# ---------------------------------------------------------------------------

def _verify_bde() -> dict:
    rows = []
    failures = 0
    for m in range(2, 31):
        for s in range(1, m):
            for l in range(0, m - s):
                first, second = _bounds.bde_check(m, s, l)
                if not (first and second):
                    failures += 1
                    rows.append({"m": m, "s": s, "l": l, "status": "VIOLATION"})
    rows.append({"grid": "m<=30, 1<=s<m, 0<=l<m-s", "status": "ok" if failures == 0 else "fail"})
    return {
        "suite": "bde",
        "rows": rows,
        "summary": {"violations": failures, "status": "pass" if failures == 0 else "fail"},
    }


def _verify_partition(trials: int, seed: int) -> dict:
    rows = []
    failures = 0
    cases = [
        ((2, 1, 1), (1, 1)),
        ((3, 1, 2), (2, 1, 1)),
        ((4, 2, 1), (1, 1)),
        ((4, 2, 1), (3, 1)),
        ((6, 2, 2), (2, 1, 1)),
    ]
    for idx, ((n, k, s), ws) in enumerate(cases):
        chain = construction_chain("clique", n, k, s)
        rep = _cyclic.verify_partition_bound(chain, ws, trials, seed * 1_000_003 + idx)
        ok = rep["status"] == "pass"
        failures += 0 if ok else 1
        rows.append({"n": n, "k": k, "s": s, "weights": list(ws), **rep})
    return {
        "suite": "partition",
        "rows": rows,
        "summary": {"violations": failures, "status": "pass" if failures == 0 else "fail"},
    }


def _verify_random_matching(trials: int, seed: int) -> dict:
    rows = []
    failures = 0
    cases = [
        ((8, 2, 1), (1, 1), "cover"),
        ((8, 2, 1), (2, 1), "empty-then-full"),
        ((9, 2, 2), (1, 1, 1), "cover"),
        ((12, 3, 1), (2, 1), "cover"),
    ]
    for idx, ((n, k, s), ws, kind) in enumerate(cases):
        chain = construction_chain(kind, n, k, s)
        rep = _cyclic.verify_random_matching_bound(chain, ws, trials, seed * 1_000_003 + idx)
        ok = rep["status"] == "pass"
        failures += 0 if ok else 1
        rows.append({"n": n, "k": k, "s": s, "weights": list(ws), "construction": kind, **rep})
    return {
        "suite": "random-matching",
        "rows": rows,
        "summary": {"violations": failures, "status": "pass" if failures == 0 else "fail"},
    }


def run_suite(suite: str, trials: int | None, seed: int, limit_nodes: int | None = None) -> dict:
    if suite in _search.THEOREM_SUITES:
        return _search.verify_theorem(suite, limit_nodes=limit_nodes)
    if suite in ("conj1", "conj2"):
        return _search.hunt_conjectures(suite, limit_nodes=limit_nodes)
    if suite == "bde":
        return _verify_bde()
    if suite == "cyclic":
        return _cyclic.run_cyclic_suite(CYCLIC_CELLS, trials or 100_000, seed)
    if suite == "partition":
        return _verify_partition(trials or 20_000, seed)
    if suite == "random-matching":
        return _verify_random_matching(trials or 20_000, seed)
    raise KeyError(suite)


def cmd_verify(args) -> int:
    suites = list(VERIFY_SUITES[:-1]) if args.suite == "all" else [args.suite]
    needs_seed = any(s in RANDOMIZED_SUITES for s in suites)
    if args.ci and needs_seed and args.seed is None:
        print("--ci requires an explicit --seed for randomized suites", file=sys.stderr)
        return EXIT_USAGE
    seed = args.seed if args.seed is not None else 0
    config = {
        "command": "verify",
        "suite": args.suite,
        "seed": seed if needs_seed else None,
        "trials": args.trials,
    }
    writer = ReportWriter(args.format, args.out, config, args.resume)
    total_viol = 0
    for suite in suites:
        report = run_suite(suite, args.trials, seed, args.limit_nodes)
        summary = report["summary"]
        total_viol += summary.get("violations", 0)
        row = {
            "cell": _canon({"suite": suite}),
            "suite": suite,
            "summary": summary,
            "status": summary["status"],
        }
        if summary["status"] != "pass" or args.suite != "all":
            row["rows"] = report["rows"]
        writer.emit(row)
        print(f"[verify] {suite}: {summary['status']} ({_canon(summary)})", file=sys.stderr)
    status = "pass" if total_viol == 0 else "fail"
    writer.finalize({"suites": len(suites), "violations": total_viol, "status": status})
    return EXIT_PASS if status == "pass" else EXIT_VIOLATION


def cmd_matching(args) -> int:
    from .family import chain_from_dict, family_from_dict
    from .matching import is_overlapping, matching_number, rainbow_matching_number

    if bool(args.family) == bool(args.chain):
        print("matching needs exactly one of --family or --chain", file=sys.stderr)
        return EXIT_USAGE
    if args.family:
        with open(args.family, encoding="utf-8") as fh:
            fam = family_from_dict(json.load(fh))
        out = {
            "n": fam.n,
            "k": fam.k,
            "size": len(fam),
            "matching_number": matching_number(fam),
        }
    else:
        with open(args.chain, encoding="utf-8") as fh:
            chain = chain_from_dict(json.load(fh))
        out = {
            "n": chain.n,
            "k": chain.k,
            "s": chain.s,
            "sizes": [len(f) for f in chain.families],
            "rainbow_matching_number": rainbow_matching_number(chain.families),
            "is_overlapping": is_overlapping(chain),
        }
    print(json.dumps(out, sort_keys=True, indent=2))
    return EXIT_PASS


def _validate_limits(args) -> str | None:
    if getattr(args, "jobs", 1) < 1:
        return "--jobs must be positive"
    if getattr(args, "limit_nodes", None) is not None and args.limit_nodes < 1:
        return "--limit-nodes must be positive"
    if getattr(args, "limit_downsets", 1) < 1:
        return "--limit-downsets must be positive"
    if getattr(args, "trials", None) is not None and args.trials < 1:
        return "--trials must be positive"
    return None


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    problem = _validate_limits(args)
    if problem:
        print(problem, file=sys.stderr)
        return EXIT_USAGE
    try:
        if args.command == "bounds":
            return cmd_bounds(args)
        if args.command == "search":
            return cmd_search(args)
        if args.command == "verify":
            return cmd_verify(args)
        if args.command == "matching":
            return cmd_matching(args)
    except (_search.NodeLimitError, DownsetLimitError, _search.InstanceTooLargeError) as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return EXIT_LIMIT
    except (KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    parser.error(f"unknown command {args.command!r}")


if __name__ == "__main__":
    sys.exit(main())
