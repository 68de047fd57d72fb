"""Classical Hamiltonian dynamics.

Exact affine flows for quadratic Hamiltonians, fixed-step RK4 trajectories
and co-integrated variational flows for general ones, and the second-order
Taylor (nearby-orbit) Hamiltonian.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import BlowUp, InvalidDimension, InvalidInput
from .linalg import dof_of, matrix_exponential, standard_symplectic_form


@dataclass(frozen=True)
class PhasePoint:
    x: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        x = np.atleast_1d(np.asarray(self.x, dtype=float))
        p = np.atleast_1d(np.asarray(self.p, dtype=float))
        if x.ndim != 1 or x.shape != p.shape or x.size == 0:
            raise InvalidDimension("x and p must be vectors of equal length n >= 1")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "p", p)

    @property
    def n(self) -> int:
        return self.x.size

    @property
    def z(self) -> np.ndarray:
        return np.concatenate([self.x, self.p])

    @classmethod
    def from_z(cls, z) -> "PhasePoint":
        z = np.asarray(z, dtype=float)
        if z.ndim != 1 or z.size % 2 or z.size == 0:
            raise InvalidDimension(f"phase-space vector must have even length, got {z.shape}")
        n = z.size // 2
        return cls(z[:n], z[n:])


def as_z(point) -> np.ndarray:
    """Phase-space vector from a PhasePoint or array-like."""
    if isinstance(point, PhasePoint):
        return point.z
    z = np.asarray(point, dtype=float).ravel()
    if z.size % 2 or z.size == 0:
        raise InvalidDimension(f"phase-space vector must have even length, got {z.size}")
    return z


class Hamiltonian:
    """A Hamiltonian ``H(z, t)`` with gradient and Hessian.

    ``mass`` and ``potential`` are set for 1-dof ``p^2/2m + V(x)`` systems so
    that grid solvers can be driven from the same object.
    """

    def __init__(self, value: Callable, gradient: Callable, hessian: Callable, n: int,
                 autonomous: bool = True, name: str = "custom",
                 mass: Optional[float] = None, potential: Optional[Callable] = None):
        self._value = value
        self._gradient = gradient
        self._hessian = hessian
        self.n = int(n)
        self.autonomous = autonomous
        self.name = name
        self.mass = mass
        self.potential = potential

    def value(self, z, t=0.0) -> float:
        return float(self._value(np.asarray(z, dtype=float), t))

    def gradient(self, z, t=0.0) -> np.ndarray:
        return np.asarray(self._gradient(np.asarray(z, dtype=float), t), dtype=float)

    def hessian(self, z, t=0.0) -> np.ndarray:
        Hzz = np.asarray(self._hessian(np.asarray(z, dtype=float), t), dtype=float)
        return 0.5 * (Hzz + Hzz.T)

    def __repr__(self):
        return f"Hamiltonian(name={self.name!r}, n={self.n})"


def finite_difference_hamiltonian(value: Callable, n: int, scale: float = 1.0,
                                  autonomous: bool = True, name: str = "fd") -> Hamiltonian:
    """Wrap a bare ``H(z, t)`` with central-difference gradient and Hessian."""
    h = np.cbrt(np.finfo(float).eps) * scale
    dim = 2 * n

    def grad(z, t):
        g = np.empty(dim)
        for k in range(dim):
            e = np.zeros(dim)
            e[k] = h
            g[k] = (value(z + e, t) - value(z - e, t)) / (2 * h)
        return g

    def hess(z, t):
        Hzz = np.empty((dim, dim))
        for k in range(dim):
            e = np.zeros(dim)
            e[k] = h
            Hzz[k] = (grad(z + e, t) - grad(z - e, t)) / (2 * h)
        return 0.5 * (Hzz + Hzz.T)

    return Hamiltonian(value, grad, hess, n, autonomous=autonomous, name=name)


@dataclass(frozen=True)
class QuadraticHamiltonian:
    """``H(z) = 1/2 z^T M z + u^T z + c``; ``M`` is symmetrized on construction."""

    M: np.ndarray
    u: Optional[np.ndarray] = None
    c: float = 0.0

    def __post_init__(self):
        M = np.asarray(self.M, dtype=float)
        n = dof_of(M)
        u = np.zeros(2 * n) if self.u is None else np.asarray(self.u, dtype=float).ravel()
        if u.size != 2 * n:
            raise InvalidDimension(f"linear term must have length {2 * n}, got {u.size}")
        object.__setattr__(self, "M", 0.5 * (M + M.T))
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "c", float(self.c))

    @property
    def n(self) -> int:
        return self.M.shape[0] // 2

    autonomous = True
    name = "quadratic"

    def value(self, z, t=0.0) -> float:
        z = np.asarray(z, dtype=float)
        return float(0.5 * z @ self.M @ z + self.u @ z + self.c)

    def gradient(self, z, t=0.0) -> np.ndarray:
        return self.M @ np.asarray(z, dtype=float) + self.u

    def hessian(self, z, t=0.0) -> np.ndarray:
        return self.M.copy()


@dataclass(frozen=True)
class AffineSymplecticMap:
    """``z -> S z + d``."""

    S: np.ndarray
    d: np.ndarray

    def __post_init__(self):
        S = np.asarray(self.S, dtype=float)
        n = dof_of(S)
        d = np.asarray(self.d, dtype=float).ravel()
        if d.size != 2 * n:
            raise InvalidDimension("translation length does not match the matrix")
        object.__setattr__(self, "S", S)
        object.__setattr__(self, "d", d)

    @property
    def n(self) -> int:
        return self.S.shape[0] // 2

    def __call__(self, point):
        return self.S @ as_z(point) + self.d

    def compose(self, other: "AffineSymplecticMap") -> "AffineSymplecticMap":
        """``self o other``."""
        return AffineSymplecticMap(self.S @ other.S, self.S @ other.d + self.d)

    def inverse(self) -> "AffineSymplecticMap":
        J = standard_symplectic_form(self.n)
        Sinv = -J @ self.S.T @ J
        return AffineSymplecticMap(Sinv, -Sinv @ self.d)

    @classmethod
    def identity(cls, n: int) -> "AffineSymplecticMap":
        return cls(np.eye(2 * n), np.zeros(2 * n))


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    z: np.ndarray
    energy_drift: Optional[float] = None

    @property
    def points(self) -> list:
        return [PhasePoint.from_z(row) for row in self.z]

    @property
    def end(self) -> np.ndarray:
        return self.z[-1]


@dataclass(frozen=True)
class VariationalFlow:
    """Center trajectory, tangent maps and action integral per sample time."""

    times: np.ndarray
    centers: np.ndarray
    S: np.ndarray
    action: np.ndarray
    z0: np.ndarray = field(repr=False)

    def map(self, k: int) -> AffineSymplecticMap:
        """Affine map ``z -> S_k (z - z0) + z_k`` at sample ``k``."""
        return AffineSymplecticMap(self.S[k], self.centers[k] - self.S[k] @ self.z0)

    @property
    def maps(self) -> list:
        return [self.map(k) for k in range(len(self.times))]


def quadratic_flow(H: QuadraticHamiltonian, t: float) -> AffineSymplecticMap:
    """Exact flow of ``z' = J (M z + u)`` over time ``t``."""
    n = H.n
    J = standard_symplectic_form(n)
    gen = np.zeros((2 * n + 1, 2 * n + 1))
    gen[:2 * n, :2 * n] = t * (J @ H.M)
    gen[:2 * n, 2 * n] = t * (J @ H.u)
    E = matrix_exponential(gen)
    return AffineSymplecticMap(E[:2 * n, :2 * n], E[:2 * n, 2 * n])


def quadratic_action(H: QuadraticHamiltonian, z0, t: float) -> float:
    """``int_0^t (p . dx/dt - H) ds`` along the exact trajectory from ``z0``.

    The integrand is a quadratic form in ``(z, 1)``; the integral is read off a
    block matrix exponential (Van Loan).
    """
    n = H.n
    dim = 2 * n + 1
    J = standard_symplectic_form(n)
    A = np.zeros((dim, dim))
    A[:2 * n, :2 * n] = J @ H.M
    A[:2 * n, 2 * n] = J @ H.u
    E = np.zeros((2 * n, 2 * n))
    E[n:, n:] = np.eye(n)
    Q = np.zeros((dim, dim))
    Q[:2 * n, :2 * n] = 0.5 * (E @ H.M + H.M @ E) - 0.5 * H.M
    Q[:2 * n, 2 * n] = Q[2 * n, :2 * n] = 0.5 * (E @ H.u - H.u)
    Q[2 * n, 2 * n] = -H.c
    block = np.zeros((2 * dim, 2 * dim))
    block[:dim, :dim] = -A.T
    block[:dim, dim:] = Q
    block[dim:, dim:] = A
    F = matrix_exponential(t * block)
    W = F[dim:, dim:].T @ F[:dim, dim:]
    zt = np.append(as_z(z0), 1.0)
    return float(zt @ W @ zt)


def _steps(T: float, dt: float) -> tuple[int, float]:
    if not dt > 0:
        raise InvalidInput("dt must be positive")
    if T == 0:
        return 0, 0.0
    nsteps = max(1, math.ceil(abs(T) / dt - 1e-9))
    return nsteps, T / nsteps


def _rk4(rhs, y0, t0, T, dt):
    nsteps, h = _steps(T, dt)
    ys = np.empty((nsteps + 1, y0.size))
    ts = t0 + h * np.arange(nsteps + 1)
    ys[0] = y0
    y = y0
    for k in range(nsteps):
        t = ts[k]
        with np.errstate(over="ignore", invalid="ignore"):
            k1 = rhs(t, y)
            k2 = rhs(t + h / 2, y + h / 2 * k1)
            k3 = rhs(t + h / 2, y + h / 2 * k2)
            k4 = rhs(t + h, y + h * k3)
            y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(y)):
            raise BlowUp(f"non-finite state after t={t:.6g}", last_time=float(t))
        ys[k + 1] = y
    if T != 0:
        ts[-1] = t0 + T
    return ts, ys


def classical_trajectory(H, z0, T: float, dt: float, t0: float = 0.0) -> Trajectory:
    """Fixed-step RK4 solution of Hamilton's equations; negative ``T`` runs backward.

    The step is ``T / ceil(|T| / dt)`` so the endpoint is hit exactly.
    """
    z0 = as_z(z0)
    if z0.size != 2 * H.n:
        raise InvalidDimension("initial point does not match the Hamiltonian")
    J = standard_symplectic_form(H.n)
    times, zs = _rk4(lambda t, z: J @ H.gradient(z, t), z0, t0, T, dt)
    drift = None
    if H.autonomous:
        e0 = H.value(z0, t0)
        drift = max(abs(H.value(z, t0) - e0) for z in zs)
    return Trajectory(times, zs, drift)


def variational_flow(H, z0, T: float, dt: float, t0: float = 0.0) -> VariationalFlow:
    """Co-integrate the center, ``S' = J H''(z_t) S`` and the action along the center."""
    z0 = as_z(z0)
    n = H.n
    dim = 2 * n
    if z0.size != dim:
        raise InvalidDimension("initial point does not match the Hamiltonian")
    J = standard_symplectic_form(n)

    def rhs(t, y):
        z = y[:dim]
        S = y[dim:dim + dim * dim].reshape(dim, dim)
        g = H.gradient(z, t)
        zdot = J @ g
        Sdot = J @ H.hessian(z, t) @ S
        adot = z[n:] @ g[n:] - H.value(z, t)
        return np.concatenate([zdot, Sdot.ravel(), [adot]])

    y0 = np.concatenate([z0, np.eye(dim).ravel(), [0.0]])
    times, ys = _rk4(rhs, y0, t0, T, dt)
    return VariationalFlow(
        times=times,
        centers=ys[:, :dim],
        S=ys[:, dim:dim + dim * dim].reshape(-1, dim, dim),
        action=ys[:, -1],
        z0=z0,
    )


def taylor_quadratic(H, zc, t: float = 0.0) -> QuadraticHamiltonian:
    """Second-order Taylor expansion of ``H(., t)`` about ``zc``, expanded in ``z``."""
    zc = as_z(zc)
    h0 = H.value(zc, t)
    g = H.gradient(zc, t)
    Hzz = H.hessian(zc, t)
    return QuadraticHamiltonian(
        M=Hzz,
        u=g - Hzz @ zc,
        c=h0 - g @ zc + 0.5 * zc @ Hzz @ zc,
    )


def ehrenfest_classical(H: QuadraticHamiltonian, mean0, t: float) -> PhasePoint:
    """Means ``(<x>, <p>)`` at time ``t``; exact for quadratic Hamiltonians."""
    return PhasePoint.from_z(quadratic_flow(H, t)(mean0))
