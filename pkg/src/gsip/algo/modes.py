"""Plain exchange methods used for comparison with the disjunctive KKT driver."""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace

import numpy as np

from ..core import GsipProblem
from ..core.reform import conservative_pop, plain_pop
from .driver import _exchange, _feasibility, solve_gsip
from .options import BranchStatus, Mode, SolveOptions, SolveReport


def solve_fe(problem: GsipProblem, options: SolveOptions) -> SolveReport:
    """Exchange loop seeded from the conservative relaxation or from ``min f`` over X."""
    if problem.s != 1:
        raise ValueError("the comparison modes handle one robust constraint")
    t0 = time.perf_counter()
    if options.mode is Mode.FE_CONSERVATIVE:
        space = problem.xuspace
        blocks = {0: "u"}
        build = lambda cuts: conservative_pop(problem, 0, cuts.get(0, []))  # noqa: E731
    else:
        space = problem.xspace
        blocks = {}
        build = lambda cuts: plain_pop(problem, 0, cuts.get(0, []))  # noqa: E731
    res = _exchange(problem, (), space, build, blocks, [0], {0: []}, options)
    report = SolveReport(problem.name, options.mode, None, [res], np.nan, None, n_branches=1, cut_source="none")
    if res.converged:
        report.f_star, report.x_star, report.u_star = res.f_J, res.x_J, res.u_J
        report.winner = options.mode.value
        report.certified = res.certified
        report.feasibility = _feasibility(problem, res.x_J, options)
    else:
        report.status = res.status.value
        report.f_star = res.bound if res.status is BranchStatus.MAX_ITER else np.nan
        report.x_star = res.x_J
    report.time = time.perf_counter() - t0
    return report


@dataclass
class ModeRow:
    mode: str
    f_star: float
    iterations: tuple[int, ...]
    times: tuple[float, ...]
    feasibility: float
    status: str
    x_star: list[float] | None = None
    error: str = ""


@dataclass
class ModeComparison:
    problem: str
    rows: list[ModeRow] = field(default_factory=list)

    def row(self, mode: Mode | str) -> ModeRow:
        key = mode.value if isinstance(mode, Mode) else mode
        return next(r for r in self.rows if r.mode == key)

    def table(self) -> str:
        lines = [f"{self.problem}", f"{'method':<18}{'iterations':<22}{'time (s)':<28}{'v(x*)':>12}  f*"]
        for r in self.rows:
            it = ",".join(map(str, r.iterations))
            tm = ",".join(f"{t:.2f}" for t in r.times)
            lines.append(f"{r.mode:<18}{'(' + it + ')':<22}{'(' + tm + ')':<28}{r.feasibility:>12.3e}  "
                         f"{r.f_star:.4f}{'  ' + r.error if r.error else ''}")
        return "\n".join(lines)


def compare_modes(problem: GsipProblem, options: SolveOptions | None = None) -> ModeComparison:
    """Run the three modes on one problem; failures are isolated per mode."""
    options = options or SolveOptions()
    out = ModeComparison(problem.name)
    for mode in (Mode.KKT, Mode.FE_CONSERVATIVE, Mode.FE_PLAIN):
        try:
            rep = solve_gsip(problem, replace(options, mode=mode))
            times = tuple(b.time for b in rep.branches if b.status is not BranchStatus.INFEASIBLE or mode is Mode.KKT)
            out.rows.append(ModeRow(mode.value, rep.f_star, rep.iterations, times, rep.feasibility, rep.status,
                                    None if rep.x_star is None else [float(t) for t in rep.x_star]))
        except Exception as exc:  # isolate failures per mode
            out.rows.append(ModeRow(mode.value, np.nan, (), (), np.nan, "error", None, repr(exc)))
    return out
