"""The ``gsip`` command line."""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from ..algo import Mode, SolveOptions, compare_modes, solve, verify_feasibility, worst_parameters
from ..core import GsipProblem, enumerate_branches
from ..numlin import numeric_rank
from . import corpus
from .problem_file import ProblemFileError, emit_problem, parse_problem

REPORT_SCHEMA = "gsip-report/1"
EXIT_CERTIFIED, EXIT_UNCERTIFIED, EXIT_FAILURE = 0, 2, 3
RESIDUAL_TOL = 1e-5

log = logging.getLogger("gsip")


def load_problem(ref: str) -> GsipProblem:
    """A problem file path, or the name of a built-in corpus instance."""
    path = Path(ref)
    if path.exists():
        return parse_problem(path)
    try:
        return corpus.get(ref).problem()
    except KeyError:
        raise ProblemFileError(ref, "no such file or corpus instance") from None


def options_from_args(args) -> SolveOptions:
    kw = {}
    for name, attr in (("order_max", "k_max"), ("max_iter", "max_inner_iter"), ("v_tol", "v_tol"),
                       ("jobs", "jobs"), ("ball", "ball_radius"), ("cuts", "cut_policy")):
        val = getattr(args, name, None)
        if val is not None:
            kw[attr] = val
    if getattr(args, "mode", None):
        kw["mode"] = Mode.parse(args.mode)
    return SolveOptions(**kw)


def _fmt_vec(v) -> str:
    if v is None:
        return "-"
    return "(" + ", ".join(f"{t:.4f}" for t in np.ravel(v)) + ")"


def summary_text(report) -> str:
    lines = [
        f"problem      {report.problem}",
        f"mode         {report.mode.value}",
        f"status       {report.status}",
        f"f*           {report.f_star:.6f}",
        f"x*           {_fmt_vec(report.x_star)}",
        f"winner       {report.winner or '-'}",
        f"certified    {'yes' if report.certified else 'no (best found)'}",
        f"v(x*)        {report.feasibility:.3e}",
        f"branches     {report.n_branches}",
        f"Phi0         {report.cut_source}{' (heuristic)' if report.heuristic_cuts else ''}",
        f"time         {report.time:.2f}s",
    ]
    em = report.emptiness
    if em is not None:
        lines.append(f"emptiness    {em.status} f={em.f_bar:.6f} bound={em.bound:.6f}")
    for note in report.notes:
        lines.append(f"note         {note}")
    lines.append("")
    lines.append(f"{'J':<22}{'status':<19}{'f_J':>14}{'iter':>6}{'cert':>6}{'time':>9}")
    for b in report.branches:
        lines.append(f"{b.label:<22}{b.status.value:<19}{b.f_J:>14.6f}{b.iterations:>6}"
                     f"{'yes' if b.certified else 'no':>6}{b.time:>8.2f}s")
    for v in report.local:
        lines.append(f"local        {v.branch}: verdict {v.verdict}, active set {v.active_set}")
    return "\n".join(lines) + "\n"


def report_dict(report) -> dict:
    out = report.to_dict()
    out["schema"] = REPORT_SCHEMA
    return out


def exit_code(report) -> int:
    if report.status not in ("ok",):
        return EXIT_FAILURE
    return EXIT_CERTIFIED if report.certified else EXIT_UNCERTIFIED


def cmd_solve(args) -> int:
    problem = load_problem(args.problem)
    options = options_from_args(args)
    report = solve(problem, options)
    text = summary_text(report)
    print(text, end="")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(json.dumps(report_dict(report), indent=1) + "\n")
    (out / "summary.txt").write_text(text)
    return exit_code(report)


def cmd_branches(args) -> int:
    problem = load_problem(args.problem)
    fam = enumerate_branches(problem.A)
    print(f"r = {numeric_rank(problem.A)}")
    print(f"|P| = {len(fam)}")
    for J in fam:
        print(str(J))
    return 0


def _bench_row(inst: corpus.Instance, options: SolveOptions) -> dict:
    exp = inst.expected
    t0 = time.perf_counter()
    try:
        report = solve(inst.problem(), options)
    except Exception as exc:  # per-instance isolation
        return {"name": inst.name, "ok": False, "error": f"{type(exc).__name__}: {exc}",
                "time": time.perf_counter() - t0}
    f_ok = bool(np.isfinite(report.f_star) and abs(report.f_star - exp.f_star) <= exp.f_tol)
    p_ok = exp.n_branches is None or report.n_branches == exp.n_branches
    v_ok = bool(report.feasibility >= -RESIDUAL_TOL) if np.isfinite(report.feasibility) else True
    return {"name": inst.name, "tier": inst.tier, "f_star": report.f_star, "expected": exp.f_star,
            "n_branches": report.n_branches, "expected_branches": exp.n_branches,
            "v": report.feasibility, "iterations": list(report.iterations), "certified": report.certified,
            "ok": f_ok and p_ok and v_ok, "f_ok": f_ok, "branches_ok": p_ok, "v_ok": v_ok,
            "time": time.perf_counter() - t0}


def cmd_bench(args) -> int:
    options = options_from_args(args)
    names = set(args.only or [])
    rows = []
    print(f"{'instance':<18}{'f*':>12}{'expected':>12}{'|P|':>6}{'v(x*)':>11}{'time':>9}  result")
    for inst in corpus.tier_instances(args.tier):
        if names and inst.name not in names:
            continue
        row = _bench_row(inst, options)
        rows.append(row)
        if "error" in row:
            print(f"{inst.name:<18}{'':>12}{'':>12}{'':>6}{'':>11}{row['time']:>8.1f}s  FAIL {row['error']}")
            continue
        print(f"{inst.name:<18}{row['f_star']:>12.4f}{row['expected']:>12.4f}{row['n_branches']:>6}"
              f"{row['v']:>11.2e}{row['time']:>8.1f}s  {'pass' if row['ok'] else 'FAIL'}")
    if args.modes:
        print()
        print(f"{'instance':<18}{'mode':<18}{'iterations':<18}{'time':>9}{'v(x*)':>12}")
        for inst in corpus.tier_instances(args.tier):
            if not inst.mode_study or (names and inst.name not in names):
                continue
            table = compare_modes(inst.problem(), SolveOptions(cut_policy="none"))
            for r in table.rows:
                its = ",".join(str(i) for i in r.iterations) if r.iterations else "-"
                print(f"{inst.name:<18}{r.mode:<18}{its:<18}{sum(r.times):>8.2f}s{r.feasibility:>12.2e}")
    if args.json:
        Path(args.json).write_text(json.dumps(rows, indent=1, default=float) + "\n")
    return min(sum(not r["ok"] for r in rows), 100)


def _read_point(path: str) -> np.ndarray:
    text = Path(path).read_text().strip()
    try:
        data = json.loads(text)
    except json.JSONDecodeError:
        data = text.replace(",", " ").split()
    if isinstance(data, dict):
        data = data.get("x_star", data.get("x"))
    return np.asarray(data, dtype=float).ravel()


def cmd_check(args) -> int:
    problem = load_problem(args.problem)
    x = _read_point(args.point)
    if x.size != problem.n:
        print(f"error: point has {x.size} entries, problem has n = {problem.n}", file=sys.stderr)
        return EXIT_FAILURE
    host = problem.X_violation(x)
    v = verify_feasibility(problem, x)
    print(f"v(x) = {v:.6e}")
    for i, res in enumerate(worst_parameters(problem, x)):
        u = "-" if res.u is None else _fmt_vec(res.u)
        print(f"  g{i + 1}: v = {res.v:.6e} ({res.status.value}) at u = {u}")
    if host > 1e-8:
        print(f"host set violated by {host:.3e}")
    feasible = v >= -RESIDUAL_TOL and host <= 1e-8
    print("feasible" if feasible else "infeasible")
    return 0 if feasible else 1


def geometry_text(problem: GsipProblem, x_star) -> str:
    meta = problem.metadata
    if meta.get("kind") != "gemstone":
        raise ValueError(f"{problem.name} is not a gemstone instance")
    x_star = np.asarray(x_star, float).ravel()
    center, size = x_star[:3], x_star[3]
    unit = np.asarray(meta["unit_vertices"], float)
    lines = ["# gemstone geometry, format gsip-geometry/1",
             "# v x y z         diamond vertex (center + size * unit vertex)",
             "# s a1 a2 a3 d    stone face a.u >= d",
             "# g a1 a2 a3 c    unit diamond face a.u >= c (before scaling)",
             "# b c1 c2 c3 r    excluded ball: |u - c|^2 >= r^2",
             f"# center {center[0]:.6f} {center[1]:.6f} {center[2]:.6f} size {size:.6f}"]
    for vt in unit:
        p = center + size * vt
        lines.append(f"v {p[0]:.6f} {p[1]:.6f} {p[2]:.6f}")
    for a, d in zip(meta["stone_B"], meta["stone_d"]):
        lines.append("s " + " ".join(f"{t:g}" for t in a) + f" {d:g}")
    for a, c in zip(meta["gem_A"], meta["gem_b"]):
        lines.append("g " + " ".join(f"{t:g}" for t in a) + f" {c:g}")
    if "ball_center" in meta:
        c = meta["ball_center"]
        lines.append(f"b {c[0]:g} {c[1]:g} {c[2]:g} {np.sqrt(meta['ball_radius_squared']):.6f}")
    return "\n".join(lines) + "\n"


def cmd_export_geometry(args) -> int:
    problem = load_problem(args.problem)
    x = _read_point(args.report)
    try:
        text = geometry_text(problem, x)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    if args.out:
        Path(args.out).write_text(text)
    else:
        print(text, end="")
    return 0


def cmd_corpus(args) -> int:
    if args.action == "list":
        for inst in corpus.INSTANCES:
            exp = inst.expected
            nb = "-" if exp.n_branches is None else exp.n_branches
            print(f"{inst.name:<18}{inst.tier:<10}f* = {exp.f_star:<10g}|P| = {nb}")
        return 0
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for inst in corpus.INSTANCES:
        if args.names and inst.name not in args.names:
            continue
        emit_problem(inst.problem(), out / f"{inst.name}.json")
        print(out / f"{inst.name}.json")
    return 0


def _solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--mode", choices=["kkt", "disjunctive-kkt", "fe-conservative", "fe-plain"])
    p.add_argument("--order-max", type=int, help="largest relaxation order")
    p.add_argument("--max-iter", type=int, help="cap on inner-loop cuts")
    p.add_argument("--v-tol", type=float, help="accept v(x) >= -v_tol")
    p.add_argument("--jobs", type=int, help="branches solved in parallel")
    p.add_argument("--ball", type=float, help="ball radius for unbounded parameter sets")
    p.add_argument("--cuts", choices=["auto", "none", "vertices"], help="initial cut policy")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gsip", description="Global solver for polynomial GSIPs "
                                     "with polyhedral parameter sets.")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve a problem file or corpus instance")
    p.add_argument("problem")
    _solver_flags(p)
    p.add_argument("--out", default=".", help="directory for report.json and summary.txt")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("branches", help="list the branch index family")
    p.add_argument("problem")
    p.set_defaults(func=cmd_branches)

    p = sub.add_parser("bench", help="run the benchmark corpus")
    p.add_argument("--tier", choices=corpus.TIERS, default="fast")
    p.add_argument("--only", nargs="*", help="restrict to these instances")
    p.add_argument("--modes", action="store_true", help="also compare the three solver modes")
    p.add_argument("--json", help="write the result rows to this file")
    _solver_flags(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("check", help="evaluate the robust constraints at a point")
    p.add_argument("problem")
    p.add_argument("point", help="JSON list, whitespace separated numbers, or a report.json")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("export-geometry", help="gemstone geometry for external plotting")
    p.add_argument("problem")
    p.add_argument("report", help="report.json (or a point file) holding x*")
    p.add_argument("--out")
    p.set_defaults(func=cmd_export_geometry)

    p = sub.add_parser("corpus", help="list or export the built-in instances")
    p.add_argument("action", choices=["list", "export"])
    p.add_argument("names", nargs="*")
    p.add_argument("--out", default="corpus")
    p.set_defaults(func=cmd_corpus)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ProblemFileError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
