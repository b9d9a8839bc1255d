"""Dense linear algebra helpers: SVD rank, Gram solves, symmetric eigensystems."""

from __future__ import annotations

import numpy as np
from scipy import linalg

DEFAULT_RANK_TOL = 1e-8


class RankDeficient(np.linalg.LinAlgError):
    pass


def singular_values(M) -> np.ndarray:
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.size == 0:
        return np.zeros(0)
    return linalg.svd(M, compute_uv=False)


def numeric_rank(M, rel_tol: float = DEFAULT_RANK_TOL) -> int:
    """Number of singular values above ``rel_tol * sigma_max``."""
    if not 0.0 < rel_tol < 1.0:
        raise ValueError("rel_tol must lie in (0, 1)")
    s = singular_values(M)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > rel_tol * s[0]))


def gram_solve(AJ, rel_tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """Return ``(AJ AJ^T)^{-1} AJ`` for a full-row-rank ``AJ``."""
    AJ = np.atleast_2d(np.asarray(AJ, dtype=float))
    r = AJ.shape[0]
    if numeric_rank(AJ, rel_tol) < r:
        raise RankDeficient(f"A_J ({AJ.shape[0]}x{AJ.shape[1]}) is not full row rank")
    G = AJ @ AJ.T
    return linalg.solve(G, AJ, assume_a="pos")


def sym_eig(M, sym_tol: float = 1e-10) -> tuple[np.ndarray, np.ndarray]:
    """Ascending eigenvalues and orthonormal eigenvectors of a symmetric matrix."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.shape[0] != M.shape[1]:
        raise ValueError("matrix is not square")
    scale = max(1.0, float(np.max(np.abs(M)))) if M.size else 1.0
    if np.max(np.abs(M - M.T), initial=0.0) > sym_tol * scale:
        raise ValueError("matrix is not symmetric")
    w, V = linalg.eigh((M + M.T) / 2)
    return w, V


def nullspace(M, rel_tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.size == 0:
        return np.eye(M.shape[1])
    _, s, Vt = linalg.svd(M)
    rank = int(np.sum(s > rel_tol * s[0])) if s.size and s[0] > 0 else 0
    return Vt[rank:].T
