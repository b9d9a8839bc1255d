"""Flat truncation and atom extraction from truncated moment vectors."""

from __future__ import annotations

import math

import numpy as np
from scipy import linalg

from ..poly import monomial_exponents

DEFAULT_FLAT_TOL = 1e-6
MERGE_TOL = 1e-4


class ExtractionError(RuntimeError):
    pass


def moment_matrix(y: np.ndarray, nvars: int, t: int, index=None) -> np.ndarray:
    """``M_t(y)`` for a graded-lex moment vector ``y``."""
    basis = monomial_exponents(nvars, t)
    if index is None:
        index = {e: i for i, e in enumerate(monomial_exponents(nvars, 2 * t))}
    s = len(basis)
    M = np.empty((s, s))
    for i in range(s):
        for j in range(i, s):
            M[i, j] = M[j, i] = y[index[tuple(a + b for a, b in zip(basis[i], basis[j]))]]
    return M


def psd_rank(M: np.ndarray, rel_tol: float = DEFAULT_FLAT_TOL) -> int:
    """Rank of a (nearly) PSD matrix from its eigenvalues relative to the largest."""
    if M.size == 0:
        return 0
    w = np.linalg.eigvalsh((M + M.T) / 2)
    top = w[-1]
    if top <= 0:
        return 0
    return int(np.sum(w > rel_tol * top))


def flat_order(y: np.ndarray, nvars: int, k: int, d: int, t_min: int = 1,
               rel_tol: float = DEFAULT_FLAT_TOL, index=None) -> int | None:
    """Largest ``t`` in ``[max(d, t_min), k]`` with ``rank M_{t-d} = rank M_t``, else None."""
    Mk = moment_matrix(y, nvars, k, index)
    ranks = {}

    def rank(t):
        if t not in ranks:
            s = math.comb(nvars + t, t)
            ranks[t] = psd_rank(Mk[:s, :s], rel_tol)
        return ranks[t]

    for t in range(k, max(d, t_min) - 1, -1):
        if rank(t - d) == rank(t):
            return t
    return None


def check_flat_truncation(y: np.ndarray, k: int, pop=None, *, nvars: int | None = None,
                          d: int | None = None, rel_tol: float = DEFAULT_FLAT_TOL) -> bool:
    """Whether ``y`` (from an order-``k`` solve) satisfies flat truncation."""
    from .relaxation import flat_gap, min_order

    if pop is not None:
        nvars = pop.nvars
        d = flat_gap(pop) if d is None else d
        t_min = max(min_order(pop), d)
    else:
        d = 1 if d is None else d
        t_min = d
    return flat_order(y, nvars, k, d, t_min, rel_tol) is not None


def _column_echelon(V: np.ndarray, tol: float) -> tuple[np.ndarray, list[int]]:
    """Reduced column echelon form ``U`` of ``V`` (rows = monomials) and pivot rows."""
    U = V.copy()
    s, r = U.shape
    pivots: list[int] = []
    col = 0
    for row in range(s):
        if col == r:
            break
        j = col + int(np.argmax(np.abs(U[row, col:])))
        if abs(U[row, j]) <= tol:
            U[row, col:] = 0.0
            continue
        U[:, [col, j]] = U[:, [j, col]]
        U[:, col] /= U[row, col]
        for jj in range(r):
            if jj != col:
                U[:, jj] -= U[row, jj] * U[:, col]
        pivots.append(row)
        col += 1
    if len(pivots) != r:
        raise ExtractionError("column echelon form lost rank")
    return U, pivots


def extract_minimizers(y: np.ndarray, nvars: int, t: int, rank: int | None = None,
                       rel_tol: float = DEFAULT_FLAT_TOL, seed: int = 0, index=None) -> list[np.ndarray]:
    """Recover the atoms of a flat moment matrix ``M_t(y)``.

    Factor ``M_t = V V^T``, reduce ``V`` to column echelon form, build the
    multiplication matrices of each variable on the pivot monomials and
    diagonalize a random combination of them with a real Schur decomposition.
    """
    M = moment_matrix(y, nvars, t, index)
    w, Q = np.linalg.eigh((M + M.T) / 2)
    if rank is None:
        rank = int(np.sum(w > rel_tol * w[-1]))
    if rank < 1:
        raise ExtractionError("moment matrix has rank 0")
    V = Q[:, -rank:] * np.sqrt(np.maximum(w[-rank:], 0.0))
    if rank == 1:
        y0 = V[0, 0] ** 2
        if y0 <= 0:
            raise ExtractionError("zero mass")
        point = np.array([M[0, 1 + i] / M[0, 0] for i in range(nvars)])
        return [point]

    basis = monomial_exponents(nvars, t)
    pos = {e: i for i, e in enumerate(basis)}
    U, pivots = _column_echelon(V, tol=1e-6 * max(1.0, np.max(np.abs(V))))
    piv_monos = [basis[i] for i in pivots]
    N = []
    for var in range(nvars):
        Ni = np.empty((rank, rank))
        for j, mono in enumerate(piv_monos):
            shifted = list(mono)
            shifted[var] += 1
            shifted = tuple(shifted)
            if shifted not in pos:
                raise ExtractionError("multiplication leaves the truncated basis; raise the order")
            Ni[j, :] = U[pos[shifted], :]
        N.append(Ni)
    rng = np.random.default_rng(seed)
    coeffs = rng.random(nvars)
    coeffs /= coeffs.sum()
    Nc = sum(c * Ni for c, Ni in zip(coeffs, N))
    T, Z = linalg.schur(Nc, output="real")
    if np.max(np.abs(np.diag(T, -1)), initial=0.0) > 1e-6 * max(1.0, np.max(np.abs(T))):
        raise ExtractionError("complex conjugate atoms found")
    points = []
    for j in range(rank):
        q = Z[:, j]
        points.append(np.array([q @ Ni @ q for Ni in N]))
    return points


def merge_points(points: list[np.ndarray], tol: float = MERGE_TOL) -> list[np.ndarray]:
    out: list[np.ndarray] = []
    for p in points:
        if all(np.max(np.abs(p - q)) > tol for q in out):
            out.append(p)
    return sorted(out, key=lambda p: tuple(np.round(p, 8)))
