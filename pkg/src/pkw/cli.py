"""Command-line entry point: ``pkw <verb> ...``.

Every verb builds a :class:`RunReport`.  ``tables`` and ``sim`` print human
readable rows or CSV unless ``--json`` is given; the other verbs print the
report as JSON.

Exit codes: 0 success, 1 verification mismatch, 2 usage or input error,
3 internal or construction error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import platform
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

from . import __version__
from .bitcode import BinaryMatrix, format_matrix, load_binary_matrix
from .decomposition import (
    TABLE_III,
    ConstructionError,
    build_decomposition_16,
    build_decomposition_2,
    build_decomposition_shortened,
    build_decomposition_z4,
    validate_decomposition,
)
from .kernel import (
    KernelError,
    KernelTable,
    arikan_kernel,
    exponent_value,
    kernel_from_matrix,
    linear_partial_distances,
    partial_distances,
    polarization_check,
    truncate,
)
from .lp.bound import (
    SMALL_ANCHORS,
    TABLE_I,
    TABLE_II,
    LpSequence,
    lp_feasible,
    search_upper_bound,
)
from .sim import Channel, PolarCode, SimulationError, estimate_channels
from .workshop import TABLE_IV, RecipeError, base_matrix, lemma3_violations, run_recipe, shorten

EXIT_OK, EXIT_MISMATCH, EXIT_USAGE, EXIT_INTERNAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


@dataclass
class RunReport:
    verb: str
    parameters: dict[str, Any]
    results: dict[str, Any] = field(default_factory=dict)
    versions: dict[str, str] = field(default_factory=dict)
    wall_time: float = 0.0

    def to_json(self) -> str:
        return json.dumps(
            {
                "verb": self.verb,
                "parameters": self.parameters,
                "results": self.results,
                "versions": self.versions,
                "wall_time": round(self.wall_time, 3),
            },
            indent=2,
            default=_jsonable,
        )


def _jsonable(obj: Any) -> Any:
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, tuple):
        return list(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _versions() -> dict[str, str]:
    return {"pkw": __version__, "python": platform.python_version(), "numpy": np.__version__}


# ---------------------------------------------------------------------------
# kernel sources
# ---------------------------------------------------------------------------

KERNEL_NAMES = ("arikan", "dec1", "dec1-z4", "dec2", "dec3", "dec4")
MATRIX_NAMES = ("G", "G'", "C24", "A", "A'", "B", "F", "B-complete", "F-complete")
RECIPE_NAMES = tuple(f"l{n}" for n in TABLE_IV)


def resolve_source(name: str) -> KernelTable | BinaryMatrix:
    """A kernel table, or a generator matrix for the linear kernels of size > 16."""
    if name == "arikan":
        return arikan_kernel()
    if name == "dec1":
        return build_decomposition_16()[1]
    if name == "dec1-z4":
        return build_decomposition_z4()
    if name == "dec2":
        return build_decomposition_2()[1]
    if name in ("dec3", "dec4"):
        return build_decomposition_shortened(15 if name == "dec3" else 14)[1]
    if name in MATRIX_NAMES:
        return base_matrix(name)
    if name in RECIPE_NAMES:
        return run_recipe(TABLE_IV[int(name[1:])][0]).matrix
    path = Path(name)
    if not path.is_file():
        raise UsageError(f"unknown kernel {name!r} (not a built-in name or readable file)")
    try:
        text = path.read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {name}: {exc}") from None
    tokens = text.split()
    try:
        # kernel files: ell, then exactly 2^ell entries; anything else is a matrix
        if tokens and tokens[0].isdigit() and int(tokens[0]) <= 16 and len(tokens) == (1 << int(tokens[0])) + 1:
            return KernelTable.loads(text)
        return load_binary_matrix(path)
    except (KernelError, ValueError) as exc:
        raise UsageError(f"{name}: {exc}") from None


def _as_kernel(src: KernelTable | BinaryMatrix) -> KernelTable:
    if isinstance(src, KernelTable):
        return src
    if src.nrows != src.cols or src.rank != src.nrows:
        raise UsageError("matrix is not square and invertible")
    if src.cols > 16:
        raise UsageError("table kernels are limited to 16 inputs")
    return kernel_from_matrix(src)


def _profile(src: KernelTable | BinaryMatrix) -> tuple[tuple[int, ...], bool]:
    if isinstance(src, KernelTable):
        return partial_distances(src).d, polarization_check(src)
    if src.nrows != src.cols or src.rank != src.nrows:
        raise UsageError("matrix is not square and invertible, so it is not a kernel")
    d = linear_partial_distances(src).d
    return d, d[-1] >= 2


def _parse_seq(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.replace(" ", "").split(","))
    except ValueError:
        raise UsageError(f"bad sequence {text!r}") from None


# ---------------------------------------------------------------------------
# verbs
# ---------------------------------------------------------------------------


def cmd_pdist(args: argparse.Namespace) -> tuple[RunReport, int]:
    src = resolve_source(args.kernel)
    d, pol = _profile(src)
    e = exponent_value(d)
    rep = RunReport("pdist", {"kernel": args.kernel})
    rep.results = {"ell": len(d), "profile": list(d), "exponent": e, "exponent_5": truncate(e), "polarizing": pol}
    return rep, EXIT_OK


def cmd_exponent(args: argparse.Namespace) -> tuple[RunReport, int]:
    d = _parse_seq(args.seq)
    if any(x < 1 for x in d):
        raise UsageError("distances must be positive")
    e = exponent_value(d)
    rep = RunReport("exponent", {"seq": list(d)})
    rep.results = {"ell": len(d), "exponent": e, "exponent_5": truncate(e)}
    return rep, EXIT_OK


def _sequence(ell: int, q: int, text: str) -> LpSequence:
    try:
        return LpSequence(ell, q, _parse_seq(text))
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_lp_check(args: argparse.Namespace) -> tuple[RunReport, int]:
    seq = _sequence(args.l, args.q, args.seq)
    v = lp_feasible(seq)
    rep = RunReport("lp-check", {"l": args.l, "q": args.q, "seq": list(seq.d)})
    rep.results = {"feasible": v.feasible, "pivots": v.pivots, "exponent": seq.exponent}
    if v.feasible:
        assert v.point is not None
        rep.results["certificate"] = {f"B[{k},{i}]": str(x) for (k, i), x in sorted(v.point.items()) if x}
    else:
        rep.results["infeasibility"] = str(v.infeasibility)
    return rep, EXIT_OK


def cmd_lp_bound(args: argparse.Namespace) -> tuple[RunReport, int]:
    params: dict[str, Any] = {"l": args.l, "q": args.q}
    if args.verify_only:
        seq = _sequence(args.l, args.q, args.verify_only)
        v = lp_feasible(seq)
        params["verify_only"] = list(seq.d)
        rep = RunReport("lp-bound", params)
        rep.results = {"mode": "verify", "feasible": v.feasible, "bound": seq.exponent, "bound_5": truncate(seq.exponent), "witness": list(seq.d)}
        return rep, EXIT_OK if v.feasible else EXIT_MISMATCH
    if args.q == 2 and args.l > 25:
        raise UsageError("binary search is limited to l <= 25")
    res = search_upper_bound(args.l, args.q, workers=args.workers)
    rep = RunReport("lp-bound", params)
    rep.results = {
        "mode": "search",
        "bound": res.value,
        "bound_5": truncate(res.value),
        "witness": list(res.sequence.d),
        "lp_calls": res.lp_calls,
        "nodes": res.nodes,
    }
    return rep, EXIT_OK


def cmd_construct(args: argparse.Namespace) -> tuple[RunReport, int]:
    name = args.name
    rep = RunReport("construct", {"name": name})
    if name in ("dec1", "dec2", "dec3", "dec4"):
        if name == "dec1":
            dec, kernel = build_decomposition_16()
        elif name == "dec2":
            dec, kernel = build_decomposition_2()
        else:
            dec, kernel = build_decomposition_shortened(15 if name == "dec3" else 14)
        chain, paper = TABLE_III[int(name[-1])]
        report = validate_decomposition(dec, chain)
        d = partial_distances(kernel).d
        rep.results = {"chain": str(chain), "valid": report.ok, "failures": report.failures(), "profile": list(d)}
        src: KernelTable | BinaryMatrix = kernel
    elif name in RECIPE_NAMES:
        recipe, paper = TABLE_IV[int(name[1:])]
        res = run_recipe(recipe)
        d = res.profile.d
        rep.results = {"base": recipe.base, "steps": [str(s) for s in recipe.steps], "valid": True, "profile": list(d)}
        src = res.matrix
    else:
        raise UsageError(f"unknown construction {name!r}; choose from dec1..dec4, {', '.join(RECIPE_NAMES)}")
    e = exponent_value(d)
    rep.results.update({"exponent": e, "exponent_5": truncate(e), "paper": paper})
    if args.out:
        _write_source(src, args.out)
        rep.results["written"] = args.out
    return rep, EXIT_OK if rep.results["valid"] else EXIT_MISMATCH


def cmd_shorten(args: argparse.Namespace) -> tuple[RunReport, int]:
    src = resolve_source(args.matrix)
    if not isinstance(src, BinaryMatrix):
        raise UsageError("shorten needs a generator matrix")
    before = linear_partial_distances(src).d
    try:
        after_m = shorten(src, args.row, args.col)
    except RecipeError as exc:
        raise UsageError(str(exc)) from None
    after = linear_partial_distances(after_m).d
    bad = lemma3_violations(before, after, args.row)
    rep = RunReport("shorten", {"matrix": args.matrix, "row": args.row, "col": args.col})
    rep.results = {
        "before": list(before),
        "after": list(after),
        "exponent": exponent_value(after),
        "exponent_5": truncate(exponent_value(after)),
        "violations": bad,
        "matrix": after_m.to_strings(),
    }
    if args.out:
        _write_source(after_m, args.out)
    return rep, EXIT_MISMATCH if bad else EXIT_OK


def cmd_sim(args: argparse.Namespace) -> tuple[RunReport, int]:
    kernel = _as_kernel(resolve_source(args.kernel))
    try:
        channel = Channel.parse(args.channel)
    except SimulationError as exc:
        raise UsageError(str(exc)) from None
    trials = 0 if args.exact else args.trials
    if trials <= 0 and not args.exact:
        raise UsageError("give --trials T > 0 or --exact")
    code = PolarCode(kernel, args.levels)
    try:
        est = estimate_channels(code, channel, trials, args.seed, args.workers)
    except SimulationError as exc:
        raise UsageError(str(exc)) from None
    rep = RunReport(
        "sim",
        {"kernel": args.kernel, "levels": args.levels, "channel": str(channel), "trials": trials, "seed": args.seed},
    )
    rep.results = {
        "rows": [
            {"index": e.index, "z": e.bhattacharyya, "error_rate": e.error_probability, "capacity": e.capacity, "trials": e.trials}
            for e in est
        ],
        "capacity_sum": sum(e.capacity for e in est),
    }
    return rep, EXIT_OK


def _sim_csv(rep: RunReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["index", "z_estimate", "error_rate", "trials"])
    for r in rep.results["rows"]:
        w.writerow([r["index"], f"{r['z']:.12g}", f"{r['error_rate']:.12g}", r["trials"]])
    return buf.getvalue()


def _write_source(src: KernelTable | BinaryMatrix, path: str) -> None:
    try:
        if isinstance(src, KernelTable):
            src.save(path)
        else:
            Path(path).write_text(format_matrix(src))
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from None


def cmd_export(args: argparse.Namespace) -> tuple[RunReport, int]:
    src = resolve_source(args.kernel)
    _write_source(src, args.out)
    rep = RunReport("export", {"kernel": args.kernel, "out": args.out})
    if isinstance(src, KernelTable):
        rep.results = {"format": "kernel-table", "ell": src.ell, "lines": src.size + 1}
    else:
        rep.results = {"format": "matrix", "ell": src.cols, "lines": src.nrows}
    return rep, EXIT_OK


# ---------------------------------------------------------------------------
# tables
# ---------------------------------------------------------------------------


def row_status(value: float, paper: float, accept_rounded: bool) -> str:
    """``pass`` on 5-decimal truncation match, ``rounded`` when only rounding matches."""
    if truncate(value) == paper:
        return "pass"
    if accept_rounded and round(value, 5) == paper:
        return "rounded"
    return "FAIL"


def _rows_i_small(accept_rounded: bool, workers: int) -> list[dict[str, Any]]:
    rows = []
    for ell in range(3, 9):
        res = search_upper_bound(ell, 2, workers=workers)
        paper = SMALL_ANCHORS[ell] if ell in SMALL_ANCHORS else TABLE_I[ell][1]
        rows.append(
            {
                "row": f"l={ell}",
                "value": res.value,
                "value_5": truncate(res.value),
                "paper": paper,
                "witness": list(res.sequence.d),
                "status": row_status(res.value, paper, accept_rounded),
            }
        )
    for ell in range(2, 5):
        res = search_upper_bound(ell, 4, workers=workers)
        ok = res.sequence.d == tuple(range(1, ell + 1))
        rows.append(
            {
                "row": f"q=4 l={ell}",
                "value": res.value,
                "value_5": truncate(res.value),
                "paper": "1..l",
                "witness": list(res.sequence.d),
                "status": "pass" if ok else "FAIL",
            }
        )
    return rows


def _rows_verify(table: str, accept_rounded: bool) -> list[dict[str, Any]]:
    rows = []
    items: list[tuple[str, int, int, tuple[int, ...], float]]
    if table == "I-verify":
        items = [(f"l={ell}", 2, ell, seq, val) for ell, (seq, val, _) in TABLE_I.items() if 9 <= ell <= 16]
    else:
        items = [(f"q={q} l={ell}", q, ell, seq, val) for (q, ell), (seq, val) in TABLE_II.items()]
    for label, q, ell, seq, paper in items:
        s = LpSequence(ell, q, seq)
        v = lp_feasible(s)
        st = row_status(s.exponent, paper, accept_rounded) if v.feasible else "FAIL"
        rows.append(
            {"row": label, "value": s.exponent, "value_5": truncate(s.exponent), "paper": paper, "feasible": v.feasible, "status": st}
        )
    return rows


def _rows_iii(accept_rounded: bool) -> list[dict[str, Any]]:
    rows = []
    for k in (1, 2, 3, 4):
        chain, paper = TABLE_III[k]
        if k == 1:
            dec, kernel = build_decomposition_16()
        elif k == 2:
            dec, kernel = build_decomposition_2()
        else:
            dec, kernel = build_decomposition_shortened(15 if k == 3 else 14)
        ok = validate_decomposition(dec, chain).ok
        d = partial_distances(kernel).d
        e = exponent_value(d)
        st = row_status(e, paper, accept_rounded) if ok else "FAIL"
        rows.append({"row": f"#{k}", "chain": str(chain), "value": e, "value_5": truncate(e), "paper": paper, "valid": ok, "status": st})
    return rows


def _rows_iv(accept_rounded: bool) -> list[dict[str, Any]]:
    rows = []
    for ell, (recipe, paper) in TABLE_IV.items():
        try:
            res = run_recipe(recipe)
            e, d, st = res.exponent, list(res.profile.d), row_status(res.exponent, paper, accept_rounded)
        except RecipeError as exc:
            e, d, st = float("nan"), [str(exc)], "FAIL"
        rows.append({"row": f"l={ell}", "value": e, "value_5": truncate(e) if e == e else None, "paper": paper, "profile": d, "status": st})
    return rows


TABLE_IDS = ("I-small", "I-verify", "II-verify", "III", "IV")


def cmd_tables(args: argparse.Namespace) -> tuple[RunReport, int]:
    tid = args.table
    if tid == "I-small":
        rows = _rows_i_small(args.accept_rounded, args.workers)
    elif tid in ("I-verify", "II-verify"):
        rows = _rows_verify(tid, args.accept_rounded)
    elif tid == "III":
        rows = _rows_iii(args.accept_rounded)
    else:
        rows = _rows_iv(args.accept_rounded)
    bad = [r["row"] for r in rows if r["status"] == "FAIL"]
    rep = RunReport("tables", {"table": tid, "accept_rounded": args.accept_rounded})
    rep.results = {"rows": rows, "mismatches": bad}
    return rep, EXIT_MISMATCH if bad else EXIT_OK


def _tables_text(rep: RunReport) -> str:
    lines = [f"table {rep.parameters['table']}"]
    for r in rep.results["rows"]:
        v = r["value_5"]
        lines.append(f"  {r['row']:<12} computed {v!s:<9} paper {r['paper']!s:<9} {r['status']}")
    bad = rep.results["mismatches"]
    lines.append("mismatches: " + (", ".join(bad) if bad else "none"))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # exit code 2 with a one-line diagnostic
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="pkw", description="Polarization kernels: partial distances, LP bounds, constructions, SC simulation.")
    p.add_argument("--version", action="version", version=f"pkw {__version__}")
    sub = p.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    def add(name: str, fn: Callable, help_: str) -> argparse.ArgumentParser:
        sp = sub.add_parser(name, help=help_)
        sp.set_defaults(fn=fn)
        sp.add_argument("--json", action="store_true", help="print the JSON run report")
        return sp

    sp = add("pdist", cmd_pdist, "partial distance profile and exponent of a kernel")
    sp.add_argument("--kernel", required=True, help=f"{', '.join(KERNEL_NAMES + MATRIX_NAMES + RECIPE_NAMES)} or a file")

    sp = add("exponent", cmd_exponent, "exponent of a partial distance sequence")
    sp.add_argument("--seq", required=True)

    sp = add("lp-check", cmd_lp_check, "LP validity of a sequence")
    sp.add_argument("--l", type=int, required=True)
    sp.add_argument("--q", type=int, default=2)
    sp.add_argument("--seq", required=True)

    sp = add("lp-bound", cmd_lp_bound, "LP upper bound on the best exponent")
    sp.add_argument("--l", type=int, required=True)
    sp.add_argument("--q", type=int, default=2)
    sp.add_argument("--verify-only", metavar="SEQ", help="only check the given sequence")
    sp.add_argument("--workers", type=int, default=1)

    sp = add("construct", cmd_construct, "build and verify a decomposition or a large linear kernel")
    sp.add_argument("--name", required=True, help=f"dec1, dec2, dec3, dec4, {', '.join(RECIPE_NAMES)}")
    sp.add_argument("--out", help="write the kernel table or matrix here")

    sp = add("shorten", cmd_shorten, "shorten a generator matrix on (row, col)")
    sp.add_argument("--matrix", required=True)
    sp.add_argument("--row", type=int, required=True)
    sp.add_argument("--col", type=int, required=True)
    sp.add_argument("--out")

    sp = add("sim", cmd_sim, "per-index channel statistics of a polar code")
    sp.add_argument("--kernel", required=True)
    sp.add_argument("--levels", type=int, default=1)
    sp.add_argument("--channel", default="bec:0.5", help="bec:EPS or bsc:P")
    sp.add_argument("--trials", type=int, default=0)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--exact", action="store_true", help="exact BEC computation instead of Monte Carlo")
    sp.add_argument("--workers", type=int, default=1)

    sp = add("tables", cmd_tables, "reproduce a reference table")
    sp.add_argument("table", choices=TABLE_IDS)
    sp.add_argument("--accept-rounded", action="store_true", help="also accept rows that match only after rounding")
    sp.add_argument("--workers", type=int, default=1)

    sp = add("export", cmd_export, "write a kernel to a file")
    sp.add_argument("--kernel", required=True)
    sp.add_argument("--out", required=True)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    start = time.perf_counter()
    try:
        rep, code = args.fn(args)
    except UsageError as exc:
        print(f"pkw {args.verb}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"pkw {args.verb}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except (ConstructionError, RecipeError, SimulationError, KernelError, ValueError) as exc:
        print(f"pkw {args.verb}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    rep.versions = _versions()
    rep.wall_time = time.perf_counter() - start
    if args.json or args.verb not in ("tables", "sim"):
        sys.stdout.write(rep.to_json() + "\n")
    elif args.verb == "tables":
        sys.stdout.write(_tables_text(rep))
    else:
        sys.stdout.write(_sim_csv(rep))
    return code


if __name__ == "__main__":
    sys.exit(main())
