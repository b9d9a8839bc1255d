"""GSIP problem model: ``min f(x)  s.t.  x in X,  g_i(x,u) >= 0  for all u with Au >= b(x)``."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Sequence

import numpy as np

from ..poly import Polynomial, PolynomialMap, VariableSpace


class Structure(str, Enum):
    BOX = "box"
    SIMPLEX = "simplex"
    GENERIC = "generic"


class Convexity(str, Enum):
    CONVEX = "convex"
    CONCAVE = "concave"
    UNKNOWN = "unknown"


class ProblemError(ValueError):
    pass


ExtensionHook = Callable[["GsipProblem", np.ndarray, np.ndarray], PolynomialMap]


@dataclass
class GsipProblem:
    name: str
    n: int
    p: int
    f: Polynomial
    A: np.ndarray
    b: list[Polynomial]
    g: list[Polynomial]
    X_ineq: list[Polynomial] = field(default_factory=list)
    X_eq: list[Polynomial] = field(default_factory=list)
    structure: Structure = Structure.GENERIC
    lower: PolynomialMap | None = None
    upper: PolynomialMap | None = None
    simplex_upper: Polynomial | None = None
    convexity: list[Convexity | None] = field(default_factory=list)
    phi0: list[PolynomialMap] | None = None
    vertices: list[PolynomialMap] | None = None
    extension_hook: ExtensionHook | None = None
    options: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.A = np.atleast_2d(np.asarray(self.A, dtype=float))
        self.structure = Structure(self.structure)
        self.convexity = [None if c is None else Convexity(c) for c in self.convexity] or [None] * len(self.g)
        self.validate()

    # spaces -------------------------------------------------------------------
    @property
    def xspace(self) -> VariableSpace:
        return VariableSpace([("x", self.n)])

    @property
    def xuspace(self) -> VariableSpace:
        return VariableSpace([("x", self.n), ("u", self.p)])

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def s(self) -> int:
        return len(self.g)

    @property
    def is_sip(self) -> bool:
        return all(bj.degree == 0 for bj in self.b)

    def b_values(self, x) -> np.ndarray:
        return np.array([bj.eval(x) for bj in self.b])

    def b_constant(self) -> np.ndarray:
        return np.array([bj.constant_term() for bj in self.b])

    def g_at(self, i: int, x, u) -> float:
        return self.g[i].eval(np.concatenate([np.asarray(x, float).ravel(), np.asarray(u, float).ravel()]))

    def in_X(self, x, tol: float = 1e-6) -> bool:
        return (all(h.eval(x) >= -tol for h in self.X_ineq)
                and all(abs(h.eval(x)) <= tol for h in self.X_eq))

    def X_violation(self, x) -> float:
        worst = 0.0
        for h in self.X_ineq:
            worst = max(worst, -h.eval(x))
        for h in self.X_eq:
            worst = max(worst, abs(h.eval(x)))
        return worst

    # validation ---------------------------------------------------------------
    def validate(self) -> None:
        xs, xus = self.xspace, self.xuspace
        if self.A.shape[1] != self.p:
            raise ProblemError(f"A has {self.A.shape[1]} columns, expected p = {self.p}")
        if len(self.b) != self.A.shape[0]:
            raise ProblemError(f"A has {self.A.shape[0]} rows but b has {len(self.b)} entries")
        if self.f.space != xs:
            raise ProblemError("f must be a polynomial in x")
        for name, polys, space in (("b", self.b, xs), ("X_ineq", self.X_ineq, xs),
                                   ("X_eq", self.X_eq, xs), ("g", self.g, xus)):
            for j, h in enumerate(polys):
                if h.space != space:
                    raise ProblemError(f"{name}[{j}] is over {h.space.blocks}, expected {space.blocks}")
        if not self.g:
            raise ProblemError("at least one robust constraint g is required")
        if len(self.convexity) != len(self.g):
            raise ProblemError(f"{len(self.convexity)} convexity annotations for {len(self.g)} constraints")
        for maps in (self.phi0 or []), (self.vertices or []):
            for q in maps:
                if q.dim != self.p or q.space != xs:
                    raise ProblemError("cut maps must send x to a p-vector")
        hom = self.options.get("homothety")
        if hom is not None:
            idx = list(hom.get("center", [])) + [hom.get("scale", -1)]
            if len(idx) != self.p + 1 or not all(isinstance(k, int) and 0 <= k < self.n for k in idx):
                raise ProblemError("homothety needs p center indices and one scale index into x")
        if self.structure is Structure.BOX:
            self._check_box()
        elif self.structure is Structure.SIMPLEX:
            self._check_simplex()

    def _check_box(self) -> None:
        if self.lower is None or self.upper is None:
            raise ProblemError("box structure needs lower and upper maps")
        if self.m != 2 * self.p:
            raise ProblemError(f"box structure needs m = 2p rows, got m = {self.m}")
        seen = set()
        for j in range(self.m):
            row = self.A[j]
            nz = np.flatnonzero(row)
            if len(nz) != 1 or abs(abs(row[nz[0]]) - 1.0) > 0 or (nz[0], row[nz[0]] > 0) in seen:
                raise ProblemError(f"box structure: row {j + 1} of A is not a distinct +-unit row")
            i = int(nz[0])
            seen.add((i, row[i] > 0))
            expect = self.lower[i] if row[i] > 0 else -self.upper[i]
            if not self.b[j].almost_equal(expect, 1e-12):
                raise ProblemError(f"box structure: b[{j + 1}] = {self.b[j]} does not match bound {expect}")

    def _check_simplex(self) -> None:
        if self.lower is None or self.simplex_upper is None:
            raise ProblemError("simplex structure needs lower map and scalar upper bound")
        if self.m != self.p + 1:
            raise ProblemError(f"simplex structure needs m = p + 1 rows, got {self.m}")
        found_sum = False
        seen = set()
        for j in range(self.m):
            row = self.A[j]
            if np.allclose(row, -1.0):
                found_sum = True
                if not self.b[j].almost_equal(-self.simplex_upper, 1e-12):
                    raise ProblemError(f"simplex structure: b[{j + 1}] does not match -w(x)")
                continue
            nz = np.flatnonzero(row)
            if len(nz) != 1 or row[nz[0]] != 1.0 or nz[0] in seen:
                raise ProblemError(f"simplex structure: row {j + 1} of A is not a unit row")
            seen.add(int(nz[0]))
            if not self.b[j].almost_equal(self.lower[int(nz[0])], 1e-12):
                raise ProblemError(f"simplex structure: b[{j + 1}] does not match l(x)")
        if not found_sum:
            raise ProblemError("simplex structure: missing the -e^T u >= -w(x) row")

    # helpers --------------------------------------------------------------------
    def single(self, i: int) -> "GsipProblem":
        """The same problem keeping only robust constraint ``i``."""
        return GsipProblem(
            name=f"{self.name}[g{i + 1}]", n=self.n, p=self.p, f=self.f, A=self.A, b=list(self.b),
            g=[self.g[i]], X_ineq=list(self.X_ineq), X_eq=list(self.X_eq), structure=self.structure,
            lower=self.lower, upper=self.upper, simplex_upper=self.simplex_upper,
            convexity=[self.convexity[i]], phi0=self.phi0, vertices=self.vertices,
            extension_hook=self.extension_hook, options=dict(self.options), metadata=dict(self.metadata))


def box_problem_rows(lower: Sequence[Polynomial], upper: Sequence[Polynomial]):
    """``(A, b)`` for ``l(x) <= u <= w(x)`` with rows ``u_1 >= l_1, ..., -u_1 >= -w_1, ...``."""
    p = len(lower)
    A = np.vstack([np.eye(p), -np.eye(p)])
    b = list(lower) + [-w for w in upper]
    return A, b
