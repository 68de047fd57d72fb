"""Planar convex hulls and maximal-volume inscribed (John) ellipsoids."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import linprog
from scipy.special import gammaln

from .capacity import Ellipsoid
from .errors import (DegenerateHull, DegenerateRegion, InvalidDimension, InvalidInput,
                     UnboundedRegion)
from .linalg import check_positive_definite

MAX_DIM = 6


@dataclass(frozen=True)
class Polytope:
    """``{z : A z <= b}`` with unit-length rows.

    ``vertices`` is filled (counterclockwise) when the polytope came from a
    planar hull.
    """

    A: np.ndarray
    b: np.ndarray
    vertices: Optional[np.ndarray] = None

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        b = np.asarray(self.b, dtype=float).ravel()
        if A.shape[0] != b.size:
            raise InvalidDimension("A and b have different numbers of rows")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
            raise InvalidInput("polytope has non-finite data")
        norms = np.linalg.norm(A, axis=1)
        if np.any(norms == 0):
            raise InvalidInput("polytope has a zero constraint row")
        object.__setattr__(self, "A", A / norms[:, None])
        object.__setattr__(self, "b", b / norms)

    @property
    def dim(self) -> int:
        return self.A.shape[1]

    def contains(self, z, tol: float = 1e-9) -> np.ndarray:
        z = np.atleast_2d(np.asarray(z, dtype=float))
        return np.all(z @ self.A.T <= self.b + tol, axis=1)

    def transformed(self, L, c) -> "Polytope":
        """Image under the invertible affine map ``z -> L z + c``."""
        Linv = np.linalg.inv(np.asarray(L, dtype=float))
        A = self.A @ Linv
        verts = None if self.vertices is None else self.vertices @ np.asarray(L).T + c
        return Polytope(A, self.b + A @ np.asarray(c, dtype=float), verts)


def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull_2d(points, area_tol: float = 1e-12) -> Polytope:
    """Monotone-chain hull of a planar cloud as an H-representation."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise InvalidInput(f"expected an (m, 2) array of points, got {pts.shape}")
    if pts.shape[0] < 3:
        raise DegenerateHull("a hull needs at least 3 points")
    if not np.all(np.isfinite(pts)):
        raise InvalidInput("point cloud has non-finite coordinates")
    order = sorted(set(map(tuple, pts)))
    if len(order) < 3:
        raise DegenerateHull("fewer than 3 distinct points")

    def chain(seq):
        out = []
        for p in seq:
            while len(out) >= 2 and _cross(out[-2], out[-1], p) <= 0:
                out.pop()
            out.append(p)
        return out

    lower = chain(order)
    upper = chain(reversed(order))
    hull = np.array(lower[:-1] + upper[:-1])
    x, y = hull[:, 0], hull[:, 1]
    area = 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))
    if len(hull) < 3 or area <= area_tol:
        raise DegenerateHull("points are collinear")

    edges = np.roll(hull, -1, axis=0) - hull
    normals = np.column_stack([edges[:, 1], -edges[:, 0]])
    b = np.einsum("ij,ij->i", normals, hull)
    return Polytope(normals, b, hull)


def _check_bounded(P: Polytope):
    for k in range(P.dim):
        for sign in (1.0, -1.0):
            c = np.zeros(P.dim)
            c[k] = -sign
            res = linprog(c, A_ub=P.A, b_ub=P.b, bounds=[(None, None)] * P.dim,
                          method="highs")
            if res.status == 3:
                raise UnboundedRegion(f"region is unbounded along coordinate {k}")
            if res.status == 2:
                raise DegenerateRegion("region is empty")
            if res.status != 0:
                raise DegenerateRegion(f"boundedness check failed: {res.message}")


def chebyshev_center(P: Polytope) -> tuple[np.ndarray, float]:
    """Point maximizing the minimum slack, and that slack."""
    m, dim = P.A.shape
    c = np.zeros(dim + 1)
    c[-1] = -1.0
    A_ub = np.hstack([P.A, np.ones((m, 1))])
    res = linprog(c, A_ub=A_ub, b_ub=P.b, bounds=[(None, None)] * dim + [(None, None)],
                  method="highs")
    if res.status != 0:
        raise DegenerateRegion(f"feasibility program failed: {res.message}")
    return res.x[:dim], float(res.x[-1])


@dataclass(frozen=True)
class JohnResult:
    ellipsoid: Ellipsoid
    duality_gap: float
    log_det: float
    newton_steps: int


def _sym_basis(dim):
    basis = []
    for i in range(dim):
        for j in range(i, dim):
            E = np.zeros((dim, dim))
            E[i, j] = E[j, i] = 1.0
            basis.append(E)
    return np.array(basis)


def john_ellipsoid_full(P: Polytope, gap_tol: float = 1e-8) -> JohnResult:
    """Maximal-volume inscribed ellipsoid ``{B u + d : |u| <= 1}`` by a barrier method.

    Minimizes ``-t log det B - sum_i log((b_i - a_i.d)^2 - |B a_i|^2)`` with
    damped Newton steps, raising ``t`` until the central-path gap ``2m / t``
    drops below ``gap_tol``.
    """
    dim = P.dim
    if dim % 2 or not 2 <= dim <= MAX_DIM:
        raise InvalidDimension(f"supported phase-space dimensions are 2, 4, 6; got {dim}")
    _check_bounded(P)
    center, slack = chebyshev_center(P)
    if slack <= 1e-12 * max(1.0, np.max(np.abs(P.b))):
        raise DegenerateRegion("region has empty interior")

    A, b = P.A, P.b
    m = A.shape[0]
    basis = _sym_basis(dim)
    nb = len(basis)
    G = np.einsum("kij,mj->mik", basis, A)  # G[i] @ xB == B a_i

    def unpack(x):
        return np.einsum("k,kij->ij", x[:nb], basis), x[nb:]

    def barrier(x, t):
        B, d = unpack(x)
        s = b - A @ d
        v = np.einsum("mik,k->mi", G, x[:nb])
        w = s ** 2 - np.einsum("mi,mi->m", v, v)
        sign, logdet = np.linalg.slogdet(B)
        if sign <= 0 or np.any(s <= 0) or np.any(w <= 0):
            return math.inf, None
        return -t * logdet - np.sum(np.log(w)), (B, s, v, w)

    def derivatives(x, t, parts):
        B, s, v, w = parts
        Binv = np.linalg.inv(B)
        BE = np.einsum("ij,kjl->kil", Binv, basis)
        grad = np.zeros(nb + dim)
        hess = np.zeros((nb + dim, nb + dim))
        grad[:nb] = -t * np.einsum("kii->k", BE)
        hess[:nb, :nb] = t * np.einsum("kij,lji->kl", BE, BE)
        gw = np.zeros((m, nb + dim))
        gw[:, :nb] = -2 * np.einsum("mik,mi->mk", G, v)
        gw[:, nb:] = -2 * s[:, None] * A
        grad -= np.sum(gw / w[:, None], axis=0)
        hess[:nb, :nb] += 2 * np.einsum("mik,mil,m->kl", G, G, 1 / w)
        hess[nb:, nb:] -= 2 * np.einsum("mi,mj,m->ij", A, A, 1 / w)
        hess += np.einsum("mk,ml,m->kl", gw, gw, 1 / w ** 2)
        return grad, hess

    x = np.concatenate([0.5 * slack * np.eye(dim)[np.triu_indices(dim)], center])
    t = 1.0
    steps = 0
    while True:
        for _ in range(200):
            f, parts = barrier(x, t)
            grad, hess = derivatives(x, t, parts)
            step = -np.linalg.solve(hess, grad)
            dec2 = float(-grad @ step)
            if dec2 / 2 <= 1e-14:
                break
            alpha = 1.0
            while True:
                f_new, _ = barrier(x + alpha * step, t)
                if f_new <= f - 0.25 * alpha * dec2 or alpha < 1e-12:
                    break
                alpha *= 0.5
            x = x + alpha * step
            steps += 1
        gap = 2 * m / t
        if gap <= gap_tol:
            break
        t *= 8.0

    B, d = unpack(x)
    Binv = np.linalg.inv(B)
    shape = Binv @ Binv
    E = Ellipsoid(d + 0.0, 0.5 * (shape + shape.T))
    return JohnResult(E, gap, float(np.linalg.slogdet(B)[1]), steps)


def john_ellipsoid(P: Polytope, gap_tol: float = 1e-8) -> Ellipsoid:
    return john_ellipsoid_full(P, gap_tol).ellipsoid


def unit_ball_volume(dim: int) -> float:
    return math.exp(0.5 * dim * math.log(math.pi) - gammaln(0.5 * dim + 1))


def ellipsoid_volume(E: Ellipsoid) -> float:
    _, w, _ = check_positive_definite(E.shape, "ellipsoid shape")
    return unit_ball_volume(E.dim) / math.sqrt(float(np.prod(w)))
