"""Polynomial optimization instances and their order-k moment relaxations."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from ..poly import Exponent, Polynomial, VariableSpace, monomial_exponents


class OrderTooSmall(ValueError):
    pass


@dataclass(frozen=True)
class PopInstance:
    """``min objective  s.t.  inequalities >= 0, equalities == 0``."""

    objective: Polynomial
    inequalities: tuple[Polynomial, ...] = ()
    equalities: tuple[Polynomial, ...] = ()
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "inequalities", tuple(self.inequalities))
        object.__setattr__(self, "equalities", tuple(self.equalities))
        space = self.objective.space
        for h in self.inequalities + self.equalities:
            if h.space != space:
                raise ValueError(f"constraint {h} is not over {space.blocks}")

    @property
    def space(self) -> VariableSpace:
        return self.objective.space

    @property
    def nvars(self) -> int:
        return self.space.dim

    def constraint_degree(self) -> int:
        return max((h.degree for h in self.inequalities + self.equalities), default=0)

    def with_constraints(self, inequalities=(), equalities=()) -> "PopInstance":
        return PopInstance(self.objective, self.inequalities + tuple(inequalities),
                           self.equalities + tuple(equalities), self.name)

    def violation(self, point) -> float:
        """Largest constraint violation at ``point`` (0 when feasible)."""
        worst = 0.0
        for h in self.inequalities:
            worst = max(worst, -h.eval(point))
        for h in self.equalities:
            worst = max(worst, abs(h.eval(point)))
        return worst


def min_order(pop: PopInstance) -> int:
    """Smallest admissible relaxation order ``max(ceil(deg h / 2), ceil(deg f / 2))``."""
    k = max(math.ceil(pop.objective.degree / 2), math.ceil(pop.constraint_degree() / 2))
    return max(k, 1)


def flat_gap(pop: PopInstance) -> int:
    """Degree shift used by the flat-truncation test (1 when unconstrained)."""
    d = max((math.ceil(h.degree / 2) for h in pop.inequalities + pop.equalities), default=1)
    return max(d, 1)


@dataclass
class PsdBlock:
    """Symmetric matrix ``sum_a y_a F_a`` stored as a sparse map from ``y`` to its
    lower triangle (row-major: (0,0), (1,0), (1,1), (2,0), ...)."""

    name: str
    size: int
    vech: sparse.csr_matrix

    def matrix(self, y: np.ndarray) -> np.ndarray:
        v = self.vech @ y
        M = np.zeros((self.size, self.size))
        rows, cols = np.tril_indices(self.size)
        order = np.lexsort((cols, rows))
        M[rows[order], cols[order]] = v
        return M + np.tril(M, -1).T


@dataclass
class ConicProgram:
    """Moment relaxation data: ``min c.y  s.t.  E y = e,  blocks(y) PSD``."""

    space: VariableSpace
    order: int
    monomials: list[Exponent]
    c: np.ndarray
    c0: float
    blocks: list[PsdBlock]
    E: sparse.csr_matrix
    e: np.ndarray
    index: dict[Exponent, int] = field(repr=False, default_factory=dict)

    @property
    def nmoments(self) -> int:
        return len(self.monomials)

    def moment_matrix(self, y: np.ndarray) -> np.ndarray:
        return self.blocks[0].matrix(y)


def _lower_pairs(n: int):
    for i in range(n):
        for j in range(i + 1):
            yield i, j


def _localizing_block(name: str, basis: list[Exponent], h: Polynomial,
                      index: dict[Exponent, int], nmom: int) -> PsdBlock:
    rows, cols, vals = [], [], []
    hterms = list(h.items())
    for r, (i, j) in enumerate(_lower_pairs(len(basis))):
        bij = tuple(a + b for a, b in zip(basis[i], basis[j]))
        for e, c in hterms:
            rows.append(r)
            cols.append(index[tuple(a + b for a, b in zip(bij, e))])
            vals.append(c)
    n = len(basis)
    vech = sparse.csr_matrix((vals, (rows, cols)), shape=(n * (n + 1) // 2, nmom))
    vech.sum_duplicates()
    return PsdBlock(name, n, vech)


def build_moment_relaxation(pop: PopInstance, k: int) -> ConicProgram:
    """Assemble the order-``k`` moment relaxation of ``pop``."""
    if k < min_order(pop):
        raise OrderTooSmall(f"order {k} < minimal order {min_order(pop)}")
    n = pop.nvars
    monomials = monomial_exponents(n, 2 * k)
    index = {e: i for i, e in enumerate(monomials)}
    L = len(monomials)

    c = np.zeros(L)
    for e, coef in pop.objective.items():
        c[index[e]] += coef

    basis_k = monomial_exponents(n, k)
    blocks = [_localizing_block("moment", basis_k, Polynomial.constant(pop.space, 1.0), index, L)]
    for i, h in enumerate(pop.inequalities):
        kb = k - math.ceil(h.degree / 2)
        blocks.append(_localizing_block(f"ineq{i}", monomial_exponents(n, kb), h, index, L))

    rows, cols, vals = [0], [0], [1.0]
    rhs = [1.0]
    r = 1
    for h in pop.equalities:
        for mono in monomial_exponents(n, 2 * k - h.degree):
            for e, coef in h.items():
                rows.append(r)
                cols.append(index[tuple(a + b for a, b in zip(mono, e))])
                vals.append(coef)
            rhs.append(0.0)
            r += 1
    E = sparse.csr_matrix((vals, (rows, cols)), shape=(r, L))
    E.sum_duplicates()
    E.eliminate_zeros()
    keep = np.diff(E.indptr) > 0
    keep[0] = True
    E = E[keep]
    e_vec = np.asarray(rhs)[keep]
    return ConicProgram(pop.space, k, monomials, c, 0.0, blocks, E, e_vec, index)


def moment_submatrix(M: np.ndarray, nvars: int, t: int) -> np.ndarray:
    """Leading principal block of a moment matrix: rows/cols of degree <= t."""
    s = math.comb(nvars + t, t)
    return M[:s, :s]
