"""Quantum propagation assembled from classical flows.

Integral kernels for the free particle and the harmonic oscillator, exact
Gaussian propagation under (inhomogeneous) quadratic Hamiltonians, Heisenberg
translations and nearby-orbit Gaussian propagation for general Hamiltonians.

Kernel phases follow the continuous branch of ``sqrt(1 / (i t))`` (free) and
``sqrt(1 / (i sin wt))`` (oscillator) selected by ``K_t -> delta`` as
``t -> 0+``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .errors import (CausticCrossing, DegenerateState, GridMisalignment, InvalidDimension,
                     InvalidGrid, InvalidInput, SingularTime, UnderResolvedGrid)
from .flows import (QuadraticHamiltonian, as_z, quadratic_action, quadratic_flow,
                    variational_flow)
from .grid import GridWavefunction

CAUSTIC_COND = 1e12


@dataclass(frozen=True)
class GaussianWavepacket:
    """Normalized ``psi(x) = N exp[(i/2h)(x-q).A(x-q) + (i/h) p.(x-q) + (i/h) phase]``.

    ``width`` is the complex symmetric ``A`` with ``Im A`` positive-definite;
    ``phase`` carries units of action.
    """

    center_x: np.ndarray
    center_p: np.ndarray
    width: np.ndarray
    phase: float = 0.0
    hbar: float = 1.0

    def __post_init__(self):
        q = np.atleast_1d(np.asarray(self.center_x, dtype=float))
        p = np.atleast_1d(np.asarray(self.center_p, dtype=float))
        A = np.atleast_2d(np.asarray(self.width, dtype=complex))
        n = q.size
        if q.ndim != 1 or p.shape != q.shape or A.shape != (n, n):
            raise InvalidDimension("center and width dimensions disagree")
        if not self.hbar > 0:
            raise InvalidInput("hbar must be positive")
        scale = max(np.max(np.abs(A)), 1.0)
        if np.max(np.abs(A - A.T)) > 1e-10 * scale:
            raise InvalidInput("width matrix must be symmetric")
        A = 0.5 * (A + A.T)
        if np.linalg.eigvalsh(A.imag)[0] <= 0:
            raise InvalidInput("imaginary part of the width must be positive-definite")
        object.__setattr__(self, "center_x", q)
        object.__setattr__(self, "center_p", p)
        object.__setattr__(self, "width", A)
        object.__setattr__(self, "phase", float(self.phase))
        object.__setattr__(self, "hbar", float(self.hbar))

    @property
    def n(self) -> int:
        return self.center_x.size

    @property
    def z(self) -> np.ndarray:
        return np.concatenate([self.center_x, self.center_p])

    @classmethod
    def from_sigma(cls, x0, p0, sigma, hbar: float = 1.0, phase: float = 0.0):
        """Packet with position standard deviation ``sigma`` (scalar or per axis)."""
        x0 = np.atleast_1d(np.asarray(x0, dtype=float))
        sigma = np.broadcast_to(np.asarray(sigma, dtype=float), x0.shape)
        A = np.diag(1j * hbar / (2 * sigma ** 2))
        return cls(x0, p0, A, phase, hbar)

    def normalization(self) -> float:
        det = np.linalg.det(self.width.imag)
        return float(det ** 0.25 * (np.pi * self.hbar) ** (-self.n / 4))

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        pts = x[..., None] if self.n == 1 and (x.ndim == 0 or x.shape[-1] != 1) else x
        dq = pts - self.center_x
        quad = np.einsum("...i,ij,...j->...", dq, self.width, dq)
        lin = dq @ self.center_p
        expo = (0.5j * quad + 1j * lin + 1j * self.phase) / self.hbar
        return self.normalization() * np.exp(expo)

    def on_grid(self, x0: float, dx: float, N: int) -> GridWavefunction:
        if self.n != 1:
            raise InvalidDimension("grid sampling is 1-dof only")
        return GridWavefunction(x0, dx, self(x0 + dx * np.arange(N)), self.hbar)

    def covariance(self) -> np.ndarray:
        """Phase-space covariance ``[[Sxx, Sxp], [Spx, Spp]]`` of the packet."""
        h = self.hbar
        Ai = np.linalg.inv(self.width.imag)
        Ar = self.width.real
        sxx = 0.5 * h * Ai
        sxp = 0.5 * h * Ai @ Ar
        spp = 0.5 * h * (self.width.imag + Ar @ Ai @ Ar)
        return np.block([[sxx, sxp], [sxp.T, spp]])


@dataclass(frozen=True)
class KernelSpec:
    kind: str
    t: float
    m: float = 1.0
    omega: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        if self.kind not in ("free", "oscillator"):
            raise InvalidInput(f"unknown kernel kind {self.kind!r}")
        if not (self.m > 0 and self.hbar > 0 and self.omega > 0):
            raise InvalidInput("m, omega and hbar must be positive")

    def singular_index(self) -> Optional[int]:
        """``k`` when ``omega t = k pi`` (oscillator) or ``t = 0``; else ``None``."""
        if self.t == 0:
            return 0
        if self.kind == "oscillator":
            wt = self.omega * self.t
            k = round(wt / math.pi)
            if abs(wt - k * math.pi) <= 1e-12 * max(1.0, abs(wt)):
                return k
        return None

    def flow_blocks(self) -> tuple[float, float, float, float]:
        """``(A, B, C, D)`` of the classical flow matrix."""
        if self.kind == "free":
            return 1.0, self.t / self.m, 0.0, 1.0
        wt = self.omega * self.t
        mw = self.m * self.omega
        return math.cos(wt), math.sin(wt) / mw, -mw * math.sin(wt), math.cos(wt)


def free_kernel_value(spec: KernelSpec, x, y):
    if spec.kind != "free":
        raise InvalidInput("expected a free-particle kernel spec")
    t = spec.t
    if t == 0:
        raise SingularTime("free kernel is singular at t=0; the propagator is the identity")
    amp = math.sqrt(spec.m / (2 * math.pi * spec.hbar * abs(t)))
    branch = np.exp(-0.25j * math.pi * math.copysign(1.0, t))
    d = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    return amp * branch * np.exp(1j * spec.m * d ** 2 / (2 * spec.hbar * t))


def oscillator_kernel_value(spec: KernelSpec, x, y):
    """Mehler kernel with the continuously tracked Maslov branch."""
    if spec.kind != "oscillator":
        raise InvalidInput("expected an oscillator kernel spec")
    k = spec.singular_index()
    if k is not None:
        raise SingularTime(f"oscillator kernel is singular at omega t = {k} pi")
    wt = spec.omega * spec.t
    mw = spec.m * spec.omega
    s, c = math.sin(wt), math.cos(wt)
    amp = math.sqrt(mw / (2 * math.pi * spec.hbar * abs(s)))
    branch = np.exp(-0.25j * math.pi - 0.5j * math.pi * math.floor(wt / math.pi))
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    expo = mw * ((x ** 2 + y ** 2) * c - 2 * x * y) / (2 * spec.hbar * s)
    return amp * branch * np.exp(1j * expo)


def kernel_value(spec: KernelSpec, x, y):
    if spec.kind == "free":
        return free_kernel_value(spec, x, y)
    return oscillator_kernel_value(spec, x, y)


def _parity(psi: GridWavefunction) -> np.ndarray:
    x = psi.x
    pos = (-x - psi.x0) / psi.dx
    idx = np.rint(pos)
    if np.max(np.abs(pos - idx)) > 1e-9:
        raise InvalidGrid("grid is not symmetric under x -> -x")
    return psi.values[idx.astype(int) % psi.N]


def _support(values, tol):
    mag = np.abs(values)
    return mag >= tol * mag.max()


def _phase_step(psi0: GridWavefunction, spec: KernelSpec, support_tol: float) -> float:
    """Largest kernel phase increment between adjacent y samples on the relevant region.

    The region pairs the numerical support of ``psi0`` with the classical image
    of its phase-space support box.
    """
    y = psi0.x[_support(psi0.values, support_tol)]
    k = 2 * np.pi * np.fft.fftfreq(psi0.N, d=psi0.dx)
    p = psi0.hbar * k[_support(np.fft.fft(psi0.values), support_tol)]
    A, B, C, D = spec.flow_blocks()
    corners = [A * yy + B * pp for yy in (y.min(), y.max()) for pp in (p.min(), p.max())]
    xlo, xhi = max(min(corners), psi0.x[0]), min(max(corners), psi0.x[-1])
    xs = np.array([xlo, xhi])
    # d(phase)/dy is affine in (x, y); extremes sit at the corners
    if spec.kind == "free":
        slope = lambda xx, yy: spec.m * (yy - xx) / (spec.hbar * spec.t)
    else:
        wt = spec.omega * spec.t
        mw = spec.m * spec.omega
        slope = lambda xx, yy: mw * (yy * math.cos(wt) - xx) / (spec.hbar * math.sin(wt))
    grad = max(abs(slope(xx, yy)) for xx in xs for yy in (y.min(), y.max()))
    return grad * psi0.dx


def kernel_propagate(psi0: GridWavefunction, spec: KernelSpec, *,
                     max_phase_step: float = math.pi / 4, support_tol: float = 1e-8,
                     quadrature_tol: float = 1e-6, chunk: int = 1024) -> GridWavefunction:
    """``psi(x_j) = sum_k K(x_j, y_k) psi0(y_k) dx`` (trapezoid on a periodic grid).

    Singular oscillator times ``omega t = k pi`` use the exact limit
    ``exp(-i k pi / 2) P^k`` with ``P`` the parity operator.
    """
    if not math.isclose(spec.hbar, psi0.hbar, rel_tol=1e-15, abs_tol=0.0):
        raise InvalidInput("kernel and wavefunction use different hbar")
    k = spec.singular_index()
    if k is not None:
        if k == 0:
            return psi0.with_values(psi0.values.copy())
        vals = _parity(psi0) if k % 2 else psi0.values
        return psi0.with_values(np.exp(-0.5j * math.pi * k) * vals)

    step = _phase_step(psi0, spec, support_tol)
    if step > max_phase_step:
        need = psi0.N * step / max_phase_step
        min_n = 1 << math.ceil(math.log2(need))
        raise UnderResolvedGrid(
            f"kernel phase step {step:.3f} rad exceeds {max_phase_step:.3f}; "
            f"use at least N={min_n}", min_points=min_n)

    x = psi0.x
    out = np.empty(psi0.N, dtype=complex)
    weights = psi0.values * psi0.dx
    for start in range(0, psi0.N, chunk):
        rows = slice(start, start + chunk)
        out[rows] = kernel_value(spec, x[rows, None], x[None, :]) @ weights
    result = psi0.with_values(out)
    n0 = psi0.norm2
    if abs(result.norm2 - n0) > quadrature_tol * n0:
        raise UnderResolvedGrid(
            f"norm changed from {n0:.8g} to {result.norm2:.8g}; enlarge the domain "
            "or refine the grid")
    return result


def _blocks(S, n):
    return S[:n, :n], S[:n, n:], S[n:, :n], S[n:, n:]


def _width_update(S, A0, n):
    a, b, c, d = _blocks(S, n)
    Z = a + b @ A0
    cond = np.linalg.cond(Z)
    if not np.isfinite(cond) or cond > CAUSTIC_COND:
        raise CausticCrossing(f"width update is singular (condition number {cond:.3e})")
    At = np.linalg.solve(Z.T, (c + d @ A0).T).T
    return 0.5 * (At + At.T), Z


def _arg_increment(Z_prev, Z_next) -> float:
    return float(np.angle(np.linalg.det(np.linalg.solve(Z_prev, Z_next))))


def _tracked_arg_det(H: QuadraticHamiltonian, A0, t: float, n: int) -> float:
    """Continuous ``arg det(A_s + B_s A0)`` for ``s`` from 0 to ``t``."""
    if t == 0:
        return 0.0
    steps = 32
    while True:
        Zs = [np.eye(n, dtype=complex)]
        for s in np.linspace(0.0, t, steps + 1)[1:]:
            a, b, _, _ = _blocks(quadratic_flow(H, s).S, n)
            Zs.append(a + b @ A0)
        incs = [_arg_increment(Zs[k], Zs[k + 1]) for k in range(steps)]
        if max(abs(v) for v in incs) < math.pi / 4 or steps >= 1 << 16:
            return float(math.fsum(incs))
        steps *= 4


def gaussian_propagate(wp: GaussianWavepacket, H: QuadraticHamiltonian,
                       t: float) -> GaussianWavepacket:
    """Exact metaplectic evolution of a Gaussian under a quadratic Hamiltonian.

    Width: ``A_t = (C + D A)(A_S + B A)^{-1}``; phase gains the classical action
    along the center minus ``(hbar/2) arg det(A_S + B A)`` tracked continuously.
    """
    n = wp.n
    if H.n != n:
        raise InvalidDimension("Hamiltonian and wavepacket dimensions disagree")
    if t == 0:
        return wp
    flow = quadratic_flow(H, t)
    At, _ = _width_update(flow.S, wp.width, n)
    z = flow(wp.z)
    phase = (wp.phase + quadratic_action(H, wp.z, t)
             - 0.5 * wp.hbar * _tracked_arg_det(H, wp.width, t, n))
    return GaussianWavepacket(z[:n], z[n:], At, phase, wp.hbar)


def nearby_orbit_propagate(H, wp: GaussianWavepacket, T: float, dt: float,
                           t0: float = 0.0) -> GaussianWavepacket:
    """Gaussian carried by the affine flow of the Taylor Hamiltonian along its center.

    The second-order expansion is re-taken at every RK4 stage of the
    co-integrated center/tangent system, so the center is the classical
    trajectory and the width follows the linearized flow.
    """
    n = wp.n
    if H.n != n:
        raise InvalidDimension("Hamiltonian and wavepacket dimensions disagree")
    flow = variational_flow(H, wp.z, T, dt, t0)
    arg = 0.0
    Z_prev = np.eye(n, dtype=complex)
    for S in flow.S[1:]:
        _, Z = _width_update(S, wp.width, n)
        inc = _arg_increment(Z_prev, Z)
        if abs(inc) > math.pi / 2:
            raise InvalidInput("time step too large to track the metaplectic phase")
        arg += inc
        Z_prev = Z
    At, _ = _width_update(flow.S[-1], wp.width, n)
    z = flow.centers[-1]
    phase = wp.phase + flow.action[-1] - 0.5 * wp.hbar * arg
    return GaussianWavepacket(z[:n], z[n:], At, phase, wp.hbar)


def heisenberg_translate(psi, x0, p0, eps: Optional[float] = None):
    """``T(x0, p0) psi(x) = exp[(i/eps)(p0.x - p0.x0/2)] psi(x - x0)``.

    ``eps`` defaults to the state's ``hbar``.  Grid shifts must be whole
    multiples of ``dx``; the grid is treated as periodic.
    """
    if eps is None:
        eps = psi.hbar
    if not eps > 0:
        raise InvalidInput("eps must be positive")
    a = np.atleast_1d(np.asarray(x0, dtype=float))
    b = np.atleast_1d(np.asarray(p0, dtype=float))

    if isinstance(psi, GaussianWavepacket):
        if a.shape != psi.center_x.shape or b.shape != psi.center_p.shape:
            raise InvalidDimension("translation does not match the wavepacket")
        r = psi.hbar / eps
        phase = psi.phase + r * (b @ psi.center_x + 0.5 * a @ b)
        return replace(psi, center_x=psi.center_x + a, center_p=psi.center_p + r * b,
                       phase=phase)

    if a.size != 1 or b.size != 1:
        raise InvalidDimension("grid wavefunctions are 1-dof")
    a, b = float(a[0]), float(b[0])
    if a == 0.0 and b == 0.0:
        return psi.with_values(psi.values.copy())
    shift = a / psi.dx
    k = round(shift)
    if abs(shift - k) > 1e-9 * max(1.0, abs(shift)):
        raise GridMisalignment(f"shift {a} is not a multiple of dx={psi.dx}")
    shifted = np.roll(psi.values, k)
    if b == 0.0:
        return psi.with_values(shifted)
    return psi.with_values(np.exp(1j / eps * (b * psi.x - 0.5 * b * a)) * shifted)


def ehrenfest_means(psi: GridWavefunction) -> tuple[float, float, float, float]:
    """``(<x>, <p>, var x, var p)``; momentum moments are spectral."""
    rho = np.abs(psi.values) ** 2
    norm2 = rho.sum() * psi.dx
    if norm2 <= 1e-12:
        raise DegenerateState("wavefunction norm is too small for moments")
    x = psi.x
    mx = float(np.sum(x * rho) * psi.dx / norm2)
    vx = float(np.sum((x - mx) ** 2 * rho) * psi.dx / norm2)
    phat = np.abs(np.fft.fft(psi.values)) ** 2
    p = psi.hbar * 2 * np.pi * np.fft.fftfreq(psi.N, d=psi.dx)
    mp = float(np.sum(p * phat) / phat.sum())
    vp = float(np.sum((p - mp) ** 2 * phat) / phat.sum())
    return mx, mp, vx, vp


__all__ = [
    "GaussianWavepacket", "KernelSpec", "free_kernel_value", "oscillator_kernel_value",
    "kernel_value", "kernel_propagate", "gaussian_propagate", "nearby_orbit_propagate",
    "heisenberg_translate", "ehrenfest_means",
]
