"""Built-in benchmark instances with their reference values.

Several instances are shipped after a change of variables that makes the
parameter set polyhedral; the ``substitution`` metadata field records it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..core import GsipProblem
from ..poly import Polynomial, PolynomialMap, VariableSpace

TIERS = ("fast", "standard", "extended")


@dataclass
class Expected:
    f_star: float
    n_branches: int | None = None
    x_star: list[list[float]] | None = None
    u_star: list[float] | None = None
    iterations: tuple[int, ...] | None = None
    winner: str | None = None
    f_tol: float = 1e-3
    x_tol: float = 1e-3
    from_emptiness: bool = False
    note: str = ""


@dataclass
class Instance:
    name: str
    tier: str
    build: Callable[[], GsipProblem]
    expected: Expected
    mode_study: bool = False
    aliases: tuple[str, ...] = ()
    tags: tuple[str, ...] = field(default_factory=tuple)

    def problem(self) -> GsipProblem:
        prob = self.build()
        prob.metadata.setdefault("tier", self.tier)
        return prob


class _Vars:
    def __init__(self, n: int, p: int):
        self.n, self.p = n, p
        self.xs = VariableSpace([("x", n)])
        self.xus = VariableSpace([("x", n), ("u", p)])
        self.x = self.xs.vars("x")
        self.X = self.xus.vars("x")
        self.U = self.xus.vars("u")

    def c(self, v: float, space=None) -> Polynomial:
        return Polynomial.constant(space or self.xs, v)

    def box(self, lower, upper):
        """Rows ``u_k >= l_k`` for every k, then ``-u_k >= -w_k``."""
        lower = [lo if isinstance(lo, Polynomial) else self.c(lo) for lo in lower]
        upper = [w if isinstance(w, Polynomial) else self.c(w) for w in upper]
        A = np.vstack([np.eye(self.p), -np.eye(self.p)])
        b = lower + [-w for w in upper]
        return dict(A=A, b=b, structure="box", lower=PolynomialMap(lower), upper=PolynomialMap(upper))

    def rows(self, rows):
        """Generic rows ``a_j^T u >= b_j(x)`` from ``[(a_j, b_j), ...]``."""
        A = np.array([r[0] for r in rows], float)
        b = [r[1] if isinstance(r[1], Polynomial) else self.c(r[1]) for r in rows]
        return dict(A=A, b=b, structure="generic")

    def interval(self, k, lo, hi):
        """``lo <= x_k <= hi`` as two inequalities."""
        return [self.x[k] - lo, hi - self.x[k]]


def _problem(name, v: _Vars, f, g, U, X_ineq=(), X_eq=(), **kw) -> GsipProblem:
    meta = kw.pop("metadata", {})
    return GsipProblem(name=name, n=v.n, p=v.p, f=f, g=list(g), X_ineq=list(X_ineq), X_eq=list(X_eq),
                       metadata=meta, **U, **kw)


# --- semi-infinite programs on boxes -----------------------------------------------

def watson7() -> GsipProblem:
    v = _Vars(3, 2)
    X, U = v.X, v.U
    f = v.x[0] ** 2 + v.x[1] ** 2 + v.x[2] ** 2
    g = (-1 - X[0] * (U[0] + U[1] ** 2 + 1) - X[1] * (U[0] * U[1] - U[1] ** 2)
         - X[2] * (U[0] * U[1] + U[1] ** 2 + U[1]))
    return _problem("watson7", v, f, [g], v.box([0, 0], [1, 1]))


def coope() -> GsipProblem:
    prob = watson7()
    prob.name = "coope"
    return prob


def yang2016() -> GsipProblem:
    v = _Vars(2, 1)
    X, U = v.X, v.U
    g = -X[0] * U[0] - X[1] * U[0] ** 3
    return _problem("yang2016", v, v.x[0], [g], v.box([-1], [1]),
                    X_ineq=v.interval(0, -10, 10) + v.interval(1, -10, 10))


def watson2() -> GsipProblem:
    v = _Vars(2, 1)
    X, U = v.X, v.U
    f = v.x[0] ** 2 / 3 + v.x[1] ** 2 + v.x[0] / 2
    g = X[0] * U[0] ** 2 + X[1] ** 2 - X[1] - (1 - X[0] ** 2 * U[0] ** 2) ** 2
    return _problem("watson2", v, f, [g], v.box([0], [1]))


def watson9() -> GsipProblem:
    v = _Vars(6, 2)
    X, U = v.X, v.U
    f = -4 * v.x[0] - (v.x[3] + v.x[5]) * (2 / 3)
    g = (3 + (U[0] - U[1]) ** 2 * (U[0] + U[1]) ** 2 - X[0] - X[1] * U[0] - X[2] * U[1]
         - X[3] * U[0] ** 2 - X[4] * U[0] * U[1] - X[5] * U[1] ** 2)
    X_ineq = [h for k in range(6) for h in v.interval(k, -10, 10)]
    return _problem("watson9", v, f, [g], v.box([-1, -1], [1, 1]), X_ineq=X_ineq)


def wangguo() -> GsipProblem:
    v = _Vars(2, 1)
    X, U = v.X, v.U
    g = -2 * X[0] ** 2 * U[0] ** 2 + U[0] ** 4 - X[0] ** 2 + X[1]
    return _problem("wangguo", v, v.x[1], [g], v.box([-1], [1]))


# --- generalized semi-infinite programs --------------------------------------------

def glibp1() -> GsipProblem:
    v = _Vars(2, 1)
    U = v.rows([([1], v.x[0]), ([1], v.x[1])])
    return _problem("glibp1", v, v.x[0] + v.x[1], [v.U[0]], U,
                    X_ineq=v.interval(0, -1, 1) + v.interval(1, -1, 1))


def glibp3() -> GsipProblem:
    v = _Vars(2, 1)
    X, U = v.X, v.U
    shift = 0.5 - 1 / (1 + np.sqrt(5))
    f = (v.x[0] + shift) ** 2 + (v.x[1] - 2.5) ** 2
    rows = v.rows([([2], -v.x[1] - 3), ([-1], 2 - v.x[0]), ([1], -5), ([-1], -5)])
    return _problem("glibp3", v, f, [X[0] - X[1] - U[0]], rows,
                    X_ineq=v.interval(0, -5, 5) + v.interval(1, -5, 5))


def glibp5() -> GsipProblem:
    v = _Vars(2, 2)
    X, U = v.X, v.U
    g = (U[0] - X[0]) ** 2 + (U[1] - X[1]) ** 2 - 1
    rows = v.rows([([1, 0], v.x[0]), ([0, 1], 0.0)])
    return _problem("glibp5", v, v.x[0] ** 2 + v.x[1] ** 2, [g], rows)


def glibp6() -> GsipProblem:
    v = _Vars(1, 1)
    x = v.x[0]
    return _problem("glibp6", v, x, [v.U[0] + v.X[0] + 1.75], v.box([-1 - x ** 2], [1 + x ** 2]),
                    X_ineq=v.interval(0, -1, 1))


def glibp8() -> GsipProblem:
    m = 5
    v = _Vars(m, 1)
    f = sum((v.x[i] ** 2 * (3 * (m - i) / m) - 2 * v.x[i] for i in range(m)), v.c(0.0))
    w = sum((v.x[i] ** 2 * (3 * (i + 1) / m) for i in range(m)), v.c(-6.0))
    norm = sum((v.X[i] ** 2 for i in range(m)), v.c(0.0, v.xus))
    return _problem("glibp8", v, f, [7 - norm - v.U[0]], v.box([-100.0], [w]))


def glibp10() -> GsipProblem:
    # case x1 >= 0 with x1 = x3^2, so that |u| <= sqrt(x1) becomes -x3 <= u <= x3
    v = _Vars(3, 1)
    x = v.x
    f = (x[0] - 0.25) ** 2 + x[1] ** 2
    return _problem("glibp10", v, f, [v.X[1] - v.U[0]], v.box([-x[2]], [x[2]]),
                    X_ineq=v.interval(0, 0, 1) + v.interval(1, -1, 1) + [x[2]],
                    X_eq=[x[0] - x[2] ** 2],
                    metadata={"substitution": "x1 = x3^2 with x3 >= 0 (the x1 < 0 case has U(x) empty "
                                              "and the same optimal value 0.0625)"})


def glibp16() -> GsipProblem:
    v = _Vars(2, 1)
    x = v.x
    rows = v.rows([([1], -32.0), ([-1], 0.0), ([1], 1 - 4 * x[0] ** 2 - x[1] ** 2)])
    return _problem("glibp16", v, -x[0], [v.U[0] - 3 * v.X[1] ** 2], rows,
                    X_ineq=v.interval(0, 0, 1) + v.interval(1, 0, 1),
                    metadata={"substitution": "y = u^5"})


def glibp11() -> GsipProblem:
    v = _Vars(2, 1)
    x = v.x
    rows = v.rows([([1], 2 * x[1] - x[0] ** 2), ([1], -1.0), ([-1], 0.0)])
    return _problem("glibp11", v, x[1], [v.U[0] - v.X[1]], rows,
                    X_ineq=v.interval(0, -1, 1) + v.interval(1, -1, 1),
                    metadata={"substitution": "y = u^3"})


def glibp15() -> GsipProblem:
    v = _Vars(2, 3)
    x = v.x
    f = 4 * x[0] ** 2 - x[1] - x[1] ** 2
    rows = v.rows([
        ([1, 1, 1], 0.0), ([-1, -1, 1], 0.0),
        ([-1, 0, 0], -x[0]), ([0, -1, 0], -x[0]),
        ([1, 0, 0], -4.0), ([-1, 0, 0], -4.0),
        ([0, 1, 0], -4.0), ([0, -1, 0], -4.0),
        ([0, 0, 1], 0.0), ([0, 0, -1], -4.0),
    ])
    return _problem("glibp15", v, f, [v.U[1] - v.X[1]], rows,
                    X_ineq=v.interval(0, -3, 2) + v.interval(1, -3, 2),
                    metadata={"substitution": "u3 = y^2 with y >= 0, parameter (u1, u2, y)"})


# --- worked examples -----------------------------------------------------------------

def copositive_sip() -> GsipProblem:
    v = _Vars(2, 4)
    X, U = v.X, v.U
    x1, x2 = X
    M = [
        [x1 + x2, x1, x2 ** 2, 2 * x1 + x2],
        [x1, 1 - x1, x1 ** 2, x2 - x1],
        [x2 ** 2, x1 ** 2, x2 + 2, x1],
        [2 * x1 + x2, x2 - x1, x1, x1 ** 2 + x2 ** 2],
    ]
    g = v.c(0.0, v.xus)
    for i in range(4):
        for j in range(4):
            g = g + M[i][j] * U[i] * U[j]
    rows = v.rows([([1, 0, 0, 0], 1.0), ([0, 1, 0, 0], 0.0), ([0, 0, 1, 0], 0.0), ([0, 0, 0, 1], 0.0),
                   ([1, -2, 0, 0], 0.0), ([0, 0, 1, -1], 0.0)])
    f = (v.x[0] - 1) ** 2 + v.x[0] * v.x[1] ** 2
    return _problem("copositive_sip", v, f, [g], rows, X_ineq=[v.x[0], v.x[1], v.x[1] - v.x[0]])


def minmax_epigraph() -> GsipProblem:
    v = _Vars(3, 2)
    X, U = v.X, v.U
    g1 = (X[2] - 5 * X[0] ** 2 - 5 * X[1] ** 2 + U[0] ** 2 + U[1] ** 2
          - X[0] * (U[1] - U[0] + 5) - X[1] * (U[0] - U[1] + 3))
    g2 = 0.2 - X[0] ** 2 - U[0] ** 2
    g3 = 0.1 - X[1] ** 2 - U[1] ** 2
    return _problem("minmax_epigraph", v, v.x[2], [g1, g2, g3], v.box([-0.2, -0.2], [0.2, 0.2]),
                    X_ineq=v.interval(0, -100, 100) + v.interval(1, -100, 100),
                    metadata={"substitution": "epigraph variable x3 for the inner maximum"})


def squared_param() -> GsipProblem:
    v = _Vars(2, 2)
    X, U = v.X, v.U
    x = v.x
    f = -0.5 * x[0] ** 4 + 2 * x[0] * x[1] - 2 * x[0] ** 2
    g = X[0] - X[0] ** 2 + X[1] - U[0] - U[1]
    rows = v.rows([([1, 0], 0.0), ([0, 1], 0.0), ([-1, 0], -1.0), ([0, -1], -1.0), ([-1, -1], -x[0])])
    return _problem("squared_param", v, f, [g], rows, X_ineq=v.interval(0, 0, 1) + v.interval(1, 0, 1),
                    metadata={"substitution": "z_i = u_i^2; the third parameter does not enter g "
                                              "and is dropped"})


POLYTOPE_A = np.array([
    [5, 9, 2, -14], [-15, -13, -18, -20], [13, 1, 7, 3], [-3, 7, 8, 2], [3, -1, 6, 7],
    [-20, 17, 4, 2], [1, 2, -3, 13], [11, 8, 2, -3], [-14, 5, -3, -6], [7, 2, 5, -1]], float)


def random_polytope() -> GsipProblem:
    v = _Vars(3, 4)
    x = v.x
    X, U = v.X, v.U
    f = x[0] ** 2 - x[1] * x[2] - x[1]
    bx = [x[0], -x[0] - x[1] - x[2], x[1] + x[2], v.c(-0.5), -x[0] - x[1], 2 * x[1], x[0] + x[2],
          2 * x[0], x[1] - 1, x[2] + 1]
    rows = v.rows([(POLYTOPE_A[j], 10 * bx[j]) for j in range(10)])
    s = X[0] + X[1] + X[2]
    g = -X[0] * U[0] + X[1] * U[1] - X[2] * U[2] + s ** 2
    return _problem("random_polytope", v, f, [g], rows,
                    X_ineq=[x[0] - x[1], x[1] - x[2] + 1, 9 - x[0] ** 2 - x[1] ** 2 - x[2] ** 2])


def design_centering() -> GsipProblem:
    v = _Vars(4, 2)
    x = v.x
    X, U = v.X, v.U
    f = -(x[2] - x[0]) * (x[3] - x[1])
    g = [(U[0] - 2) ** 2 + (U[1] + 0.5) ** 2 - 0.0625, 0.75 - 0.25 * U[0] - U[1], U[1] ** 2 + U[0], 1 + U[1]]
    return _problem("design_centering", v, f, g, v.box([x[0], x[1]], [x[2], x[3]]),
                    X_ineq=[x[2] - x[0] - 1e-6, x[3] - x[1] - 1e-6],
                    options={"ball_radius": 10.0})


# --- applications ----------------------------------------------------------------------

GEM_A = np.array([[0, -8, 3], [-8, 0, 3], [0, 8, 3], [8, 0, 3], [0, -5, -1], [-5, 0, -1], [0, 5, -1],
                  [5, 0, -1], [0, 0, -1]], float)
GEM_B = np.array([-12, -12, -12, -12, -7.5, -7.5, -7.5, -7.5, -0.5])
STONE_B = np.array([[0, -1, 0], [0, 0, -1], [1, 0, 0], [0, 1, 0], [-1, 0, 0], [0, 0, 1], [1, -5, 0],
                    [0, -2, -1], [-1, -10, 0], [0, -16, -1]], float)
STONE_D = np.array([-3, -5, -2, -2, -3, -6, -12, -11, -29, -42], float)
GEM_VERTICES = np.array([[1.5, 1.5, 0], [1.5, -1.5, 0], [-1.5, 1.5, 0], [-1.5, -1.5, 0],
                         [1.4, 1.4, 0.5], [1.4, -1.4, 0.5], [-1.4, 1.4, 0.5], [-1.4, -1.4, 0.5],
                         [0, 0, -4]], float)
GEM_BALLS = {"ii": ((-2.0, 3.0, -3.0), 6.0), "iii": ((0.0, 0.0, 0.0), 1.0)}


def gemstone(case: str) -> GsipProblem:
    """Largest diamond ``x + x0 * D`` inside a stone; variables ``(x1, x2, x3, x0)``."""
    v = _Vars(4, 3)
    x = v.x
    X, U = v.X, v.U
    center, size = x[:3], x[3]
    bx = []
    for j in range(GEM_A.shape[0]):
        h = size * GEM_B[j]
        for k in range(3):
            if GEM_A[j, k]:
                h = h + GEM_A[j, k] * center[k]
        bx.append(h)
    rows = v.rows([(GEM_A[j], bx[j]) for j in range(GEM_A.shape[0])])
    g = []
    if case in GEM_BALLS:
        c, r2 = GEM_BALLS[case]
        g.append(sum(((U[k] - c[k]) ** 2 for k in range(3)), v.c(-r2, v.xus)))
    for j in range(STONE_B.shape[0]):
        h = v.c(-STONE_D[j], v.xus)
        for k in range(3):
            if STONE_B[j, k]:
                h = h + STONE_B[j, k] * U[k]
        g.append(h)
    verts = [PolynomialMap([center[k] + size * float(vt[k]) for k in range(3)]) for vt in GEM_VERTICES]
    meta = {"stone_B": STONE_B.tolist(), "stone_d": STONE_D.tolist(), "unit_vertices": GEM_VERTICES.tolist(),
            "gem_A": GEM_A.tolist(), "gem_b": GEM_B.tolist(), "kind": "gemstone", "case": case}
    if case in GEM_BALLS:
        meta["ball_center"], meta["ball_radius_squared"] = list(GEM_BALLS[case][0]), GEM_BALLS[case][1]
    return _problem(f"gemstone_{case}", v, -size, g, rows, X_ineq=[size], vertices=verts, metadata=meta,
                    options={"homothety": {"center": [0, 1, 2], "scale": 3}})


def robust_control() -> GsipProblem:
    v = _Vars(3, 2)
    X, U = v.X, v.U
    w0, wref = np.array([-2.0, 0.0]), np.array([1.5, -0.5])
    d = w0 - wref
    g1 = (X[2] - 0.05 * (X[0] ** 2 + X[1] ** 2)
          - ((U[0] + X[0] + d[0]) ** 2 + (U[1] + X[1] + d[1]) ** 2))
    g2 = (-2 + X[0] + U[0]) ** 2 + (X[1] + U[1]) ** 2 - 2
    g3 = 1 + X[0] + U[0] + X[1] + U[1]
    return _problem("robust_control", v, v.x[2], [g1, g2, g3], v.box([-0.1, -0.2], [0.1, 0.2]),
                    X_ineq=v.interval(0, -1, 1) + v.interval(1, -1, 1),
                    metadata={"substitution": "epigraph variable x3 (gamma) for the worst-case cost"})


INSTANCES: list[Instance] = [
    Instance("glibp1", "fast", glibp1, Expected(-1.0, 2, [[0.0, -1.0], [-1.0, 0.0]])),
    Instance("glibp3", "fast", glibp3, Expected(0.25, 4, [[-0.1909, 2.0]], [-2.1909])),
    Instance("glibp5", "fast", glibp5, Expected(1.0, 1, [[0.0, -1.0]])),
    Instance("glibp6", "fast", glibp6, Expected(-0.5, 2, [[-0.5]], [-1.25])),
    Instance("glibp8", "fast", glibp8, Expected(-3.7938, 2, note="one printed optimizer coordinate is "
                                                                  "truncated; only f* is checked")),
    Instance("glibp10", "fast", glibp10, Expected(0.0625, 2, [[0.0, 0.0, 0.0]], [0.0])),
    Instance("glibp16", "fast", glibp16, Expected(-0.5, 3, [[0.5, 0.0]])),
    Instance("glibp11", "fast", glibp11, Expected(-1.0, 3, [[0.0, -1.0]], [-1.0])),
    Instance("glibp15", "standard", glibp15, Expected(-6.0, 66, [[0.0, 2.0]])),
    Instance("watson7", "standard", watson7, Expected(1.0, 4, [[-1.0, 0.0, 0.0]], [0.0, 0.0], (0, 0, 2, 2)),
             mode_study=True),
    Instance("coope", "standard", coope, Expected(1.0, 4, [[-1.0, 0.0, 0.0]], [0.0, 0.0], (0, 0, 2, 2)),
             mode_study=True),
    Instance("watson2", "standard", watson2, Expected(0.1945, 2, [[-0.75, -0.618]], [0.216], (2, 2)),
             mode_study=True),
    Instance("watson9", "standard", watson9, Expected(-12.0, 4, [[3.0, 0, 0, 0, 0, 0]], None, (1, 1, 1, 1)),
             mode_study=True),
    Instance("yang2016", "standard", yang2016, Expected(0.0, 2, [[0.0, 0.0]], None, (3, 3), f_tol=1e-6),
             mode_study=True),
    Instance("wangguo", "standard", wangguo, Expected(0.0, 2, [[0.0, 0.0]], [0.0], (0, 0), f_tol=1e-6),
             mode_study=True),
    Instance("copositive_sip", "standard", copositive_sip, Expected(0.3689, None, [[0.5486, 0.5486]])),
    Instance("minmax_epigraph", "standard", minmax_epigraph,
             Expected(-1.6228, 4, [[0.4, -0.2449, -1.6228]], [0.0775, -0.0775])),
    Instance("squared_param", "standard", squared_param, Expected(-0.5, None, [[1.0, 1.0]])),
    Instance("gemstone_i", "standard", lambda: gemstone("i"),
             Expected(-1.3889, None, [[0.9167, 0.0833, 0.4468, 1.3889]])),
    Instance("robust_control", "standard", robust_control,
             Expected(8.7820, 4, [[0.7338, -1.0, 8.7820]], [0.1, 0.2], winner="{3,4}")),
    Instance("random_polytope", "extended", random_polytope,
             Expected(-2.6667, None, [[1.3333, 1.3333, 2.3333]], from_emptiness=True)),
    Instance("design_centering", "extended", design_centering,
             Expected(-2.3360, None, [[0.0057, -0.9892, 1.8407, 0.2876]], winner="({1,2},{2,3})",
                      note="the listed optimizer violates the robust constraints; a grid and LP "
                           "oracle gives -2.296875")),
    Instance("gemstone_ii", "extended", lambda: gemstone("ii"),
             Expected(-1.3887, 64, [[0.9164, 0.0832, -0.1124, 1.3887]], [-1.2364, 1.2364, -2.2578],
                      winner="{1,4,5}")),
    Instance("gemstone_iii", "extended", lambda: gemstone("iii"),
             Expected(-1.1099, 64, [[0.1122, 0.1284, -1.4954, 1.1099]], [-0.1, -0.131, 0.5138],
                      winner="{4,5,9}", f_tol=1e-2, x_tol=1e-2)),
]

BY_NAME = {inst.name: inst for inst in INSTANCES}


def get(name: str) -> Instance:
    key = name.lower().removeprefix("corpus:")
    if key not in BY_NAME:
        raise KeyError(f"unknown corpus instance {name!r}; known: {', '.join(BY_NAME)}")
    return BY_NAME[key]


def tier_instances(tier: str) -> list[Instance]:
    if tier not in TIERS:
        raise ValueError(f"unknown tier {tier!r}")
    upto = TIERS.index(tier)
    return [inst for inst in INSTANCES if TIERS.index(inst.tier) <= upto]
