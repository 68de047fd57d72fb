"""Symplectic linear algebra primitives.

Phase-space vectors are stored as ``(x_1..x_n, p_1..p_n)``; the conjugate
pair ``j`` lives at indices ``(j, n + j)``.
"""
from __future__ import annotations

import numpy as np

from .errors import DegenerateMatrix, InvalidDimension, InvalidInput

SYMPLECTIC_TOL = 1e-10
DEGENERATE_REL_TOL = 1e-12

# Higham (2005) scaling-and-squaring tables for double precision.
_PADE_COEFFS = {
    3: (120.0, 60.0, 12.0, 1.0),
    5: (30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0),
    7: (17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0),
    9: (17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0,
        2162160.0, 110880.0, 3960.0, 90.0, 1.0),
    13: (64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
         1187353796428800.0, 129060195264000.0, 10559470521600.0,
         670442572800.0, 33522128640.0, 1323241920.0, 40840800.0, 960960.0,
         16380.0, 182.0, 1.0),
}
_PADE_THETA = {
    3: 1.495585217958292e-2,
    5: 2.539398330063230e-1,
    7: 9.504178996162932e-1,
    9: 2.097847961257068e0,
    13: 5.371920351148152e0,
}


def standard_symplectic_form(n: int) -> np.ndarray:
    """Return ``J = [[0, I], [-I, 0]]`` with ``n x n`` blocks."""
    if int(n) != n or n < 1:
        raise InvalidDimension(f"degrees of freedom must be >= 1, got {n}")
    n = int(n)
    J = np.zeros((2 * n, 2 * n))
    J[:n, n:] = np.eye(n)
    J[n:, :n] = -np.eye(n)
    return J


def dof_of(S) -> int:
    """Number of degrees of freedom of a square even-dimensional matrix."""
    S = np.asarray(S)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise InvalidDimension(f"expected a square matrix, got shape {S.shape}")
    if S.shape[0] % 2 or S.shape[0] == 0:
        raise InvalidDimension(f"phase-space dimension must be even, got {S.shape[0]}")
    return S.shape[0] // 2


def symplectic_defect(S) -> float:
    """``max |S^T J S - J|`` entrywise."""
    S = np.asarray(S, dtype=float)
    J = standard_symplectic_form(dof_of(S))
    return float(np.max(np.abs(S.T @ J @ S - J)))


def is_symplectic(S, tol: float = SYMPLECTIC_TOL) -> bool:
    if tol <= 0:
        raise InvalidInput("tol must be positive")
    return symplectic_defect(S) <= tol


def random_symplectic(n: int, seed: int, scale: float = 1.0) -> np.ndarray:
    """Seeded ``exp(J M)`` with ``M`` symmetric, entries uniform in ``[-1, 1]``.

    ``scale`` multiplies ``M``; ``scale=0`` gives the identity.
    """
    J = standard_symplectic_form(n)
    rng = np.random.default_rng(seed)
    G = rng.uniform(-1.0, 1.0, size=(2 * n, 2 * n))
    M = np.triu(G) + np.triu(G, 1).T
    return matrix_exponential(scale * (J @ M))


def _pade(A, m, powers):
    b = _PADE_COEFFS[m]
    ident = np.eye(A.shape[0])
    if m == 13:
        A2, A4, A6 = powers[2], powers[4], powers[6]
        U = A @ (A6 @ (b[13] * A6 + b[11] * A4 + b[9] * A2)
                 + b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * ident)
        V = (A6 @ (b[12] * A6 + b[10] * A4 + b[8] * A2)
             + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * ident)
    else:
        U = b[1] * ident
        V = b[0] * ident
        for k in range(2, m + 1, 2):
            U = U + b[k + 1] * powers[k]
            V = V + b[k] * powers[k]
        U = A @ U
    return np.linalg.solve(V - U, V + U)


def matrix_exponential(A) -> np.ndarray:
    """``e^A`` by scaling and squaring with a diagonal Padé approximant."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InvalidInput(f"expected a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise InvalidInput("matrix has non-finite entries")
    if A.shape[0] == 0:
        return A.copy()
    norm = np.linalg.norm(A, 1)
    if norm == 0.0:
        return np.eye(A.shape[0])

    powers = {2: A @ A}
    for m in (3, 5, 7, 9):
        if m >= 5:
            powers[m - 1] = powers[m - 3] @ powers[2]
        if norm <= _PADE_THETA[m]:
            return _pade(A, m, powers)

    s = max(0, int(np.ceil(np.log2(norm / _PADE_THETA[13]))))
    As = A / 2.0 ** s
    scaled = {2: powers[2] / 4.0 ** s}
    scaled[4] = scaled[2] @ scaled[2]
    scaled[6] = scaled[4] @ scaled[2]
    X = _pade(As, 13, scaled)
    for _ in range(s):
        X = X @ X
    return X


def _check_symmetric(M, what="matrix"):
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise InvalidInput(f"{what} must be square, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise InvalidInput(f"{what} has non-finite entries")
    scale = max(np.max(np.abs(M)), np.finfo(float).tiny)
    if np.max(np.abs(M - M.T)) > 1e-12 * scale:
        raise InvalidInput(f"{what} is not symmetric")
    return 0.5 * (M + M.T)


def check_positive_definite(M, what="matrix"):
    """Symmetrized copy of ``M`` plus its eigendecomposition; raises if degenerate."""
    M = _check_symmetric(M, what)
    w, V = np.linalg.eigh(M)
    if w[-1] <= 0 or w[0] <= DEGENERATE_REL_TOL * w[-1]:
        raise DegenerateMatrix(
            f"{what} is not positive-definite (eigenvalues {w[0]:.3e} .. {w[-1]:.3e})")
    return M, w, V


def symplectic_eigenvalues(M) -> np.ndarray:
    """Positive ``lambda_j`` with ``+-i lambda_j`` the spectrum of ``J M``, ascending.

    The antisymmetric ``K = M^{1/2} J M^{1/2}`` is similar to ``J M``; the
    Hermitian ``iK`` gives the spectrum with a symmetric solver.  Each value is
    then refined by the Rayleigh quotient ``w* M w / |w* J w|`` of the
    eigenvector ``w = J M^{1/2} y`` of ``J M``, which avoids inverting the
    square root and keeps ill-conditioned inputs accurate.
    """
    M, w, V = check_positive_definite(M)
    n = dof_of(M)
    J = standard_symplectic_form(n)
    root = (V * np.sqrt(w)) @ V.T
    K = root @ J @ root
    lam, Y = np.linalg.eigh(1j * K)
    W = J @ root @ Y[:, n:]
    num = np.einsum("ij,ik,kj->j", W.conj(), M, W).real
    den = np.abs(np.einsum("ij,ik,kj->j", W.conj(), J, W))
    return np.sort(num / den)
