"""Covariance matrices, Robertson-Schrodinger inequalities and quantum blobs.

Planck's constant is ``h = 2 pi hbar``, so the blob threshold ``h / 2`` is
``pi hbar``: the capacity of the ball ``B(sqrt(hbar))``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .capacity import Ellipsoid
from .errors import InvalidDimension, InvalidInput
from .flows import AffineSymplecticMap
from .geometry import JohnResult, Polytope, convex_hull_2d, john_ellipsoid_full
from .linalg import check_positive_definite, dof_of, standard_symplectic_form, \
    symplectic_eigenvalues

PSD_REL_TOL = 1e-10
RSUP_REL_TOL = 1e-10
BLOB_REL_TOL = 1e-10


@dataclass(frozen=True)
class CovarianceMatrix:
    sigma: np.ndarray

    def __post_init__(self):
        sigma, _, _ = check_positive_definite(self.sigma, "covariance matrix")
        dof_of(sigma)
        object.__setattr__(self, "sigma", sigma)

    @property
    def n(self) -> int:
        return self.sigma.shape[0] // 2

    @property
    def xx(self) -> np.ndarray:
        return self.sigma[:self.n, :self.n]

    @property
    def xp(self) -> np.ndarray:
        return self.sigma[:self.n, self.n:]

    @property
    def px(self) -> np.ndarray:
        return self.sigma[self.n:, :self.n]

    @property
    def pp(self) -> np.ndarray:
        return self.sigma[self.n:, self.n:]

    def cov_xx(self, j, k) -> float:
        return float(self.xx[j, k])

    def cov_xp(self, j, k) -> float:
        return float(self.xp[j, k])

    def cov_pp(self, j, k) -> float:
        return float(self.pp[j, k])

    def dx2(self, j) -> float:
        return self.cov_xx(j, j)

    def dp2(self, j) -> float:
        return self.cov_pp(j, j)


@dataclass(frozen=True)
class AxisMargin:
    j: int
    dx2: float
    dp2: float
    cov: float
    margin: float


@dataclass(frozen=True)
class RsupReport:
    axes: list
    all_pass: bool
    hbar: float


@dataclass(frozen=True)
class QuantumCondition:
    passed: bool
    min_eigenvalue: float

    def __iter__(self):
        return iter((self.passed, self.min_eigenvalue))


@dataclass(frozen=True)
class BlobVerdict:
    capacity: float
    is_blob: bool

    def __iter__(self):
        return iter((self.capacity, self.is_blob))


def covariance_from_john(E: Ellipsoid) -> CovarianceMatrix:
    """``Sigma = (2 shape)^-1`` so that ``E = {1/2 (z-z0)^T Sigma^-1 (z-z0) <= 1}``."""
    return CovarianceMatrix(np.linalg.inv(2.0 * E.shape))


def ellipsoid_from_covariance(Sigma: CovarianceMatrix, center=None) -> Ellipsoid:
    c = np.zeros(2 * Sigma.n) if center is None else center
    return Ellipsoid(c, 0.5 * np.linalg.inv(Sigma.sigma))


def rsup_check(Sigma: CovarianceMatrix, hbar: float, rtol: float = RSUP_REL_TOL) -> RsupReport:
    """Per-axis ``dX^2 dP^2 - Cov(X,P)^2 - hbar^2/4`` margins."""
    if not hbar > 0:
        raise InvalidInput("hbar must be positive")
    axes = []
    for j in range(Sigma.n):
        dx2, dp2, cov = Sigma.dx2(j), Sigma.dp2(j), Sigma.cov_xp(j, j)
        axes.append(AxisMargin(j, dx2, dp2, cov, dx2 * dp2 - cov ** 2 - 0.25 * hbar ** 2))
    tol = rtol * max(np.max(np.abs(Sigma.sigma)) ** 2, 0.25 * hbar ** 2)
    return RsupReport(axes, bool(all(a.margin >= -tol for a in axes)), float(hbar))


def quantum_condition(Sigma: CovarianceMatrix, hbar: float,
                      rtol: float = PSD_REL_TOL) -> QuantumCondition:
    """Smallest eigenvalue of the Hermitian ``Sigma + (i hbar / 2) J``."""
    if hbar < 0:
        raise InvalidInput("hbar must be non-negative")
    herm = Sigma.sigma + 0.5j * hbar * standard_symplectic_form(Sigma.n)
    lo = float(np.linalg.eigvalsh(herm)[0])
    tol = rtol * np.linalg.norm(Sigma.sigma, 2)
    return QuantumCondition(bool(lo >= -tol), lo)


def blob_capacity(Sigma: CovarianceMatrix, hbar: float,
                  rtol: float = BLOB_REL_TOL) -> BlobVerdict:
    """Capacity ``2 pi nu_min`` of the covariance ellipsoid versus ``h / 2 = pi hbar``."""
    if not hbar > 0:
        raise InvalidInput("hbar must be positive")
    cap = 2 * math.pi * float(symplectic_eigenvalues(Sigma.sigma)[0])
    return BlobVerdict(cap, bool(cap >= math.pi * hbar * (1 - rtol)))


def evolve_covariance(Sigma: CovarianceMatrix, flow) -> CovarianceMatrix:
    """``S Sigma S^T``; translations leave covariances alone.

    The congruence is accumulated in extended precision (where the platform
    has it) and rounded once, so ill-conditioned covariances keep their
    symplectic spectrum to the accuracy of the final rounding.
    """
    S = flow.S if isinstance(flow, AffineSymplecticMap) else np.asarray(flow, dtype=float)
    if S.shape != Sigma.sigma.shape:
        raise InvalidInput("map and covariance dimensions disagree")
    Sx = S.astype(np.longdouble)
    out = Sx @ Sigma.sigma.astype(np.longdouble) @ Sx.T
    return CovarianceMatrix((0.5 * (out + out.T)).astype(float))


def random_covariance(n: int, rng: np.random.Generator, hbar: float = 1.0,
                      nu_range=(0.1, 3.0)) -> CovarianceMatrix:
    """``G^T G + 1e-6 I`` rescaled so ``nu_min / hbar`` is uniform in ``nu_range``."""
    G = rng.standard_normal((2 * n, 2 * n))
    sigma = G.T @ G + 1e-6 * np.eye(2 * n)
    if nu_range is not None:
        target = rng.uniform(*nu_range) * hbar
        sigma *= target / symplectic_eigenvalues(sigma)[0]
    return CovarianceMatrix(sigma)


@dataclass
class EquivalenceTally:
    both_pass: int = 0
    sigpos_only: int = 0
    rsup_only: int = 0
    both_fail: int = 0
    blob_mismatch: int = 0

    @property
    def total(self) -> int:
        return self.both_pass + self.sigpos_only + self.rsup_only + self.both_fail

    def add(self, sigpos: bool, rsup: bool, blob: bool):
        if sigpos and rsup:
            self.both_pass += 1
        elif sigpos:
            self.sigpos_only += 1
        elif rsup:
            self.rsup_only += 1
        else:
            self.both_fail += 1
        self.blob_mismatch += int(blob != sigpos)


def equivalence_probe(n: int, samples: int, hbar: float = 1.0, seed: int = 0,
                      fixtures=()) -> EquivalenceTally:
    """Tally sigpos/RSUP verdict combinations over seeded random covariances.

    ``sigpos_only`` must stay zero.  ``rsup_only`` is the documented gap in the
    converse direction for ``n >= 2``.
    """
    if samples < 1:
        raise InvalidInput("samples must be >= 1")
    rng = np.random.default_rng(seed)
    tally = EquivalenceTally()
    items = list(fixtures) + [random_covariance(n, rng, hbar) for _ in range(samples)]
    for Sigma in items:
        tally.add(quantum_condition(Sigma, hbar).passed, rsup_check(Sigma, hbar).all_pass,
                  blob_capacity(Sigma, hbar).is_blob)
    return tally


@dataclass(frozen=True)
class CloudCertificate:
    hull: Polytope
    john: JohnResult
    covariance: CovarianceMatrix
    rsup: RsupReport
    quantum: QuantumCondition
    blob: BlobVerdict
    hbar: float = field(default=1.0)

    @property
    def ellipsoid(self) -> Ellipsoid:
        return self.john.ellipsoid


def certify_covariance(Sigma: CovarianceMatrix, hbar: float, rtol: float = PSD_REL_TOL):
    """RSUP, quantum condition and blob verdicts, all at relative tolerance ``rtol``."""
    return (rsup_check(Sigma, hbar, rtol), quantum_condition(Sigma, hbar, rtol),
            blob_capacity(Sigma, hbar, rtol))


def certify_cloud(cloud, hbar: float, rtol: float = PSD_REL_TOL) -> CloudCertificate:
    """Hull, John ellipsoid, covariance, then every uncertainty verdict."""
    points = np.asarray(cloud, dtype=float)
    if points.ndim != 2 or points.shape[1] != 2:
        raise InvalidDimension("point clouds are planar (x, p) pairs")
    hull = convex_hull_2d(points)
    john = john_ellipsoid_full(hull)
    Sigma = covariance_from_john(john.ellipsoid)
    rsup, quantum, blob = certify_covariance(Sigma, hbar, rtol)
    return CloudCertificate(hull, john, Sigma, rsup, quantum, blob, float(hbar))
