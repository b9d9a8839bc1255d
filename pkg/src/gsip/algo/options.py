"""Solver options and result records."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from enum import Enum

import numpy as np

from ..core import BranchIndex, CutSet
from ..momentsos import HierarchyOptions
from ..momentsos.hierarchy import DEFAULT_K_MAX


class Mode(str, Enum):
    KKT = "disjunctive-kkt"
    FE_CONSERVATIVE = "fe-conservative"
    FE_PLAIN = "fe-plain"

    @classmethod
    def parse(cls, text: str) -> "Mode":
        aliases = {"kkt": cls.KKT, "disjunctive": cls.KKT}
        return aliases.get(text, None) or cls(text)


class BranchStatus(str, Enum):
    INFEASIBLE = "infeasible"
    CONVERGED = "converged"
    MAX_ITER = "max-iter"
    EXTENSION_MISSING = "extension-missing"
    UNBOUNDED_VF = "unbounded-vf"
    NUMERICAL = "numerical"


@dataclass
class SolveOptions:
    k_max: int = DEFAULT_K_MAX
    max_inner_iter: int = 20
    v_tol: float = 1e-6
    jobs: int = 1
    mode: Mode = Mode.KKT
    ball_radius: float | None = None
    product_cap: int = 512
    cut_policy: str = "auto"
    local_check: bool = True

    def __post_init__(self):
        self.mode = Mode.parse(self.mode) if isinstance(self.mode, str) else self.mode
        if self.v_tol <= 0:
            raise ValueError("v_tol must be positive")
        if self.max_inner_iter < 1:
            raise ValueError("max_inner_iter must be at least 1")
        if self.k_max < 1:
            raise ValueError("k_max must be at least 1")
        if self.cut_policy not in ("auto", "none", "vertices"):
            raise ValueError(f"unknown cut policy {self.cut_policy!r}")

    def hierarchy(self) -> HierarchyOptions:
        return HierarchyOptions(k_max=self.k_max, ball_radius=self.ball_radius)

    def value_hierarchy(self) -> HierarchyOptions:
        # the value-function ball is handled inside value_function
        return HierarchyOptions(k_max=self.k_max)


@dataclass
class TraceEntry:
    bound: float
    v: float
    x: list[float] | None = None
    flat: bool = False


@dataclass
class BranchResult:
    J: tuple[BranchIndex, ...]
    status: BranchStatus
    f_J: float = np.inf
    x_J: np.ndarray | None = None
    u_J: dict[int, np.ndarray] = field(default_factory=dict)
    iterations: int = 0
    cuts: dict[int, CutSet] = field(default_factory=dict)
    trace: list[TraceEntry] = field(default_factory=list)
    certified: bool = True
    minimizers: list[np.ndarray] = field(default_factory=list)
    v: float = np.nan
    order: int = 0
    time: float = 0.0
    message: str = ""

    @property
    def label(self) -> str:
        if len(self.J) == 1:
            return str(self.J[0])
        return "(" + ",".join(str(j) for j in self.J) + ")"

    @property
    def converged(self) -> bool:
        return self.status is BranchStatus.CONVERGED

    @property
    def bound(self) -> float:
        """Valid lower bound on the branch value (last relaxation bound)."""
        if self.status is BranchStatus.INFEASIBLE:
            return np.inf
        if self.trace:
            return self.trace[-1].bound
        return -np.inf

    def monotone(self, slack: float = 1e-7) -> bool:
        b = [t.bound for t in self.trace]
        return all(b2 >= b1 - slack * max(1.0, abs(b1)) for b1, b2 in zip(b, b[1:]))


@dataclass
class EmptinessResult:
    status: str
    f_bar: float = np.inf
    x_bar: np.ndarray | None = None
    y_bar: np.ndarray | None = None
    certified: bool = True
    bound: float = np.inf
    time: float = 0.0


@dataclass
class LocalVerdict:
    branch: str
    verdict: str
    active_set: list[int]
    slater: bool | None = None


@dataclass
class SolveReport:
    problem: str
    mode: Mode
    emptiness: EmptinessResult | None
    branches: list[BranchResult]
    f_star: float
    x_star: np.ndarray | None
    u_star: dict[int, np.ndarray] = field(default_factory=dict)
    winner: str = ""
    certified: bool = False
    feasibility: float = np.nan
    local: list[LocalVerdict] = field(default_factory=list)
    n_branches: int = 0
    cut_source: str = ""
    heuristic_cuts: bool = False
    status: str = "ok"
    time: float = 0.0
    notes: list[str] = field(default_factory=list)

    @property
    def iterations(self) -> tuple[int, ...]:
        return tuple(b.iterations for b in self.branches)

    def to_dict(self) -> dict:
        def clean(v):
            if isinstance(v, np.ndarray):
                return [clean(t) for t in v.tolist()]
            if isinstance(v, float):
                if np.isnan(v):
                    return None
                if np.isinf(v):
                    return "inf" if v > 0 else "-inf"
                return v
            if isinstance(v, (np.floating, np.integer)):
                return clean(v.item())
            if isinstance(v, Enum):
                return v.value
            if isinstance(v, dict):
                return {str(k): clean(t) for k, t in v.items()}
            if isinstance(v, (list, tuple)):
                return [clean(t) for t in v]
            if isinstance(v, BranchIndex):
                return [j + 1 for j in v.J]
            if isinstance(v, CutSet):
                return {"count": len(v), "source": v.source, "heuristic": v.heuristic}
            return v

        out = {
            "problem": self.problem,
            "mode": self.mode.value,
            "status": self.status,
            "f_star": clean(self.f_star),
            "x_star": clean(self.x_star),
            "u_star": clean(self.u_star),
            "winner": self.winner,
            "certified": self.certified,
            "feasibility": clean(self.feasibility),
            "n_branches": self.n_branches,
            "cut_source": self.cut_source,
            "heuristic_cuts": self.heuristic_cuts,
            "iterations": list(self.iterations),
            "time": self.time,
            "notes": list(self.notes),
            "emptiness": clean(asdict(self.emptiness)) if self.emptiness else None,
            "local": [clean(asdict(v)) for v in self.local],
            "branches": [],
        }
        for b in self.branches:
            out["branches"].append({
                "J": b.label,
                "status": b.status.value,
                "f_J": clean(b.f_J),
                "x_J": clean(b.x_J),
                "u_J": clean(b.u_J),
                "iterations": b.iterations,
                "certified": b.certified,
                "v": clean(b.v),
                "order": b.order,
                "time": b.time,
                "message": b.message,
                "trace": [clean(asdict(t)) for t in b.trace],
            })
        return out
