"""Symplectic capacities of ellipsoids and linear non-squeezing.

Gromov's theorem is taken as given: the cylinder capacity ``pi R^2`` is a
recorded constant.  What is computed here are its consequences in the
linear category, which are decidable in closed form.  On ellipsoids every
symplectic capacity (Gromov, Hofer-Zehnder, the linear one, the maximal one)
takes the same value, so a single :func:`ellipsoid_capacity` covers them.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidDimension, InvalidInput
from .linalg import check_positive_definite, dof_of, symplectic_eigenvalues


@dataclass(frozen=True)
class Ellipsoid:
    """``{z : (z - center)^T shape (z - center) <= 1}``."""

    center: np.ndarray
    shape: np.ndarray

    def __post_init__(self):
        shape, _, _ = check_positive_definite(self.shape, "ellipsoid shape")
        dof_of(shape)
        center = np.asarray(self.center, dtype=float).ravel()
        if center.size != shape.shape[0]:
            raise InvalidDimension("center length does not match the shape matrix")
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "center", center)

    @property
    def dim(self) -> int:
        return self.shape.shape[0]

    @classmethod
    def ball(cls, R: float, n: int = 1, center=None) -> "Ellipsoid":
        c = np.zeros(2 * n) if center is None else center
        return cls(c, np.eye(2 * n) / R ** 2)

    def scaled(self, lam: float) -> "Ellipsoid":
        """Dilation ``lam * E`` about the origin."""
        return Ellipsoid(lam * self.center, self.shape / lam ** 2)

    def transformed(self, S, d=None) -> "Ellipsoid":
        """Image under ``z -> S z + d``."""
        S = np.asarray(S, dtype=float)
        Sinv = np.linalg.inv(S)
        d = np.zeros(self.dim) if d is None else np.asarray(d, dtype=float)
        return Ellipsoid(S @ self.center + d, Sinv.T @ self.shape @ Sinv)

    def semiaxes(self) -> np.ndarray:
        return 1.0 / np.sqrt(np.linalg.eigvalsh(self.shape))[::-1]

    def boundary_points(self, directions) -> np.ndarray:
        """Boundary points along the given (row) directions."""
        u = np.atleast_2d(np.asarray(directions, dtype=float))
        scale = np.sqrt(np.einsum("ki,ij,kj->k", u, self.shape, u))
        return self.center + u / scale[:, None]


@dataclass(frozen=True)
class ShadowEntry:
    i: int
    j: int
    area: float
    conjugate: bool
    label: str = ""


@dataclass(frozen=True)
class ShadowReport:
    radius: float
    entries: list
    min_conjugate_area: float

    def violations(self, rtol: float = 1e-9) -> list:
        floor = math.pi * self.radius ** 2 * (1 - rtol)
        return [e for e in self.entries if e.conjugate and e.area < floor]


def _coord_name(k: int, n: int) -> str:
    return f"x{k + 1}" if k < n else f"p{k - n + 1}"


def ellipsoid_capacity(E: Ellipsoid) -> float:
    """``pi / lambda_max`` over the symplectic eigenvalues of the shape matrix."""
    return math.pi / float(symplectic_eigenvalues(E.shape)[-1])


def cylinder_capacity(R: float) -> float:
    """Capacity of ``Z_j(R) = {x_j^2 + p_j^2 <= R^2}``; Gromov's theorem gives ``pi R^2``."""
    if not R > 0:
        raise InvalidInput("radius must be positive")
    return math.pi * R ** 2


def shadow_area(S, r: float, i: int, j: int) -> float:
    """Area of the orthogonal projection of ``S B(r)`` onto the ``(i, j)`` plane."""
    S = np.asarray(S, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise InvalidInput("expected a square matrix")
    dim = S.shape[0]
    if i == j or not (0 <= i < dim and 0 <= j < dim):
        raise InvalidInput(f"invalid coordinate plane ({i}, {j}) for dimension {dim}")
    if not r > 0:
        raise InvalidInput("radius must be positive")
    rows = S[[i, j]]
    G = rows @ rows.T
    return math.pi * r ** 2 * math.sqrt(max(np.linalg.det(G), 0.0))


def nonsqueezing_report(S, r: float = 1.0) -> ShadowReport:
    """Shadow areas of ``S B(r)`` on every coordinate plane."""
    S = np.asarray(S, dtype=float)
    n = dof_of(S)
    entries = []
    for i, j in itertools.combinations(range(2 * n), 2):
        label = f"{_coord_name(i, n)}-{_coord_name(j, n)}"
        entries.append(ShadowEntry(i, j, shadow_area(S, r, i, j), j == i + n, label))
    min_conj = min(e.area for e in entries if e.conjugate)
    return ShadowReport(float(r), entries, min_conj)


def squeeze_matrix(lam: float, n: int = 2) -> np.ndarray:
    """``diag(lam, ..., 1/lam, ...)``: symplectic, shrinks mixed position planes."""
    return np.diag([lam] * n + [1.0 / lam] * n)
