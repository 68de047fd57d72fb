"""Split-step Fourier Schrodinger solver used as an independent oracle.

Deliberately shares nothing with the propagator beyond the grid container.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InvalidGrid, InvalidInput
from .grid import GridWavefunction, l2_distance, overlap, phase_aligned_distance

__all__ = ["PotentialSpec", "split_step_evolve", "evolve_to", "l2_distance", "overlap",
           "phase_aligned_distance"]


@dataclass(frozen=True)
class PotentialSpec:
    """``kind`` is one of zero, harmonic, quartic, pendulum, tabulated."""

    kind: str = "zero"
    m: float = 1.0
    omega: float = 1.0
    g: float = 0.0
    k: float = 0.0
    samples: Optional[np.ndarray] = None

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        if self.kind == "zero":
            return np.zeros_like(x)
        if self.kind == "harmonic":
            return 0.5 * self.m * self.omega ** 2 * x ** 2
        if self.kind == "quartic":
            return self.g * x ** 4
        if self.kind == "pendulum":
            return -self.k * np.cos(x)
        if self.kind == "tabulated":
            v = np.asarray(self.samples, dtype=float)
            if v.shape != x.shape:
                raise InvalidInput("tabulated potential length differs from the grid")
            return v
        raise InvalidInput(f"unknown potential kind {self.kind!r}")


def split_step_evolve(psi0: GridWavefunction, V: PotentialSpec, m: float, dt: float,
                      steps: int) -> GridWavefunction:
    """Strang splitting: half kick, spectral drift, half kick, ``steps`` times."""
    N = psi0.N
    if N & (N - 1):
        raise InvalidGrid(f"grid length must be a power of two, got {N}")
    if not (m > 0 and dt > 0):
        raise InvalidInput("m and dt must be positive")
    if int(steps) != steps or steps < 0:
        raise InvalidInput("steps must be a non-negative integer")
    if steps == 0:
        return psi0.with_values(psi0.values.copy())

    hbar = psi0.hbar
    k = 2 * np.pi * np.fft.fftfreq(N, d=psi0.dx)
    half_kick = np.exp(-0.5j * dt * V.evaluate(psi0.x) / hbar)
    drift = np.exp(-0.5j * dt * hbar * k ** 2 / m)
    psi = psi0.values.copy()
    for _ in range(int(steps)):
        psi *= half_kick
        psi = np.fft.ifft(drift * np.fft.fft(psi))
        psi *= half_kick
    return psi0.with_values(psi)


def evolve_to(psi0: GridWavefunction, V: PotentialSpec, m: float, t: float,
              dt: float) -> GridWavefunction:
    """Run to time ``t >= 0`` with the largest step ``<= dt`` that lands on ``t``."""
    if t < 0:
        raise InvalidInput("the reference solver runs forward in time only")
    if t == 0:
        return psi0.with_values(psi0.values.copy())
    steps = int(np.ceil(t / dt - 1e-9))
    return split_step_evolve(psi0, V, m, t / steps, steps)
