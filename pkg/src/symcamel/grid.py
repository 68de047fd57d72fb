"""Uniform 1-dof wavefunction grids and the distances used to compare them."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidGrid, InvalidInput


@dataclass(frozen=True)
class GridWavefunction:
    """Samples ``values[k] = psi(x0 + k dx)`` on a periodic grid."""

    x0: float
    dx: float
    values: np.ndarray
    hbar: float = 1.0

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if values.ndim != 1 or values.size < 8:
            raise InvalidGrid(f"grid needs at least 8 samples, got {values.shape}")
        if not self.dx > 0:
            raise InvalidGrid("dx must be positive")
        if not self.hbar > 0:
            raise InvalidInput("hbar must be positive")
        if not np.all(np.isfinite(values)):
            raise InvalidInput("wavefunction has non-finite samples")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "x0", float(self.x0))
        object.__setattr__(self, "dx", float(self.dx))
        object.__setattr__(self, "hbar", float(self.hbar))

    @property
    def N(self) -> int:
        return self.values.size

    @property
    def x(self) -> np.ndarray:
        return self.x0 + self.dx * np.arange(self.N)

    @property
    def norm2(self) -> float:
        return float(np.sum(np.abs(self.values) ** 2) * self.dx)

    def with_values(self, values) -> "GridWavefunction":
        return GridWavefunction(self.x0, self.dx, values, self.hbar)

    def normalized(self) -> "GridWavefunction":
        return self.with_values(self.values / np.sqrt(self.norm2))

    def same_grid(self, other: "GridWavefunction") -> bool:
        return (self.N == other.N and self.x0 == other.x0 and self.dx == other.dx)


def make_grid(N: int, lo: float, hi: float) -> tuple[float, float]:
    """``(x0, dx)`` for ``N`` periodic samples covering ``[lo, hi)``."""
    if N < 8:
        raise InvalidGrid("grid needs at least 8 samples")
    if not hi > lo:
        raise InvalidGrid("empty domain")
    return float(lo), (hi - lo) / N


def sample(fn, N: int, lo: float, hi: float, hbar: float = 1.0) -> GridWavefunction:
    """Grid wavefunction from a vectorized callable ``fn(x)``."""
    x0, dx = make_grid(N, lo, hi)
    return GridWavefunction(x0, dx, fn(x0 + dx * np.arange(N)), hbar)


def _check(a: GridWavefunction, b: GridWavefunction):
    if not a.same_grid(b):
        raise InvalidInput("wavefunctions live on different grids")


def overlap(a: GridWavefunction, b: GridWavefunction) -> complex:
    """``sum conj(a) b dx``."""
    _check(a, b)
    return complex(np.vdot(a.values, b.values) * a.dx)


def l2_distance(a: GridWavefunction, b: GridWavefunction) -> float:
    _check(a, b)
    return float(np.sqrt(np.sum(np.abs(a.values - b.values) ** 2) * a.dx))


def phase_aligned_distance(a: GridWavefunction, b: GridWavefunction) -> tuple[float, float]:
    """``min_theta ||a - e^{i theta} b||`` and the minimizing ``theta``.

    ``theta = arg <b, a>`` reads as the global phase of ``a`` relative to ``b``.
    """
    theta = float(np.angle(overlap(b, a)))
    aligned = b.with_values(b.values * np.exp(1j * theta))
    return l2_distance(a, aligned), theta
