"""Built-in named Hamiltonians.

=============== ========================= ==================================
name            parameters (defaults)     H(x, p)
=============== ========================= ==================================
free            m=1                       p^2/2m
oscillator      m=1, omega=1              p^2/2m + m omega^2 x^2/2
pendulum        m=1, k=1                  p^2/2m - k cos x
quartic         m=1, g=0.1                p^2/2m + g x^4
henon-heiles    lam=1                     (p1^2+p2^2+x1^2+x2^2)/2
                                          + lam (x1^2 x2 - x2^3/3)
=============== ========================= ==================================
"""
from __future__ import annotations

import numpy as np

from .errors import InvalidInput
from .flows import Hamiltonian, QuadraticHamiltonian

PARAMETERS = {
    "free": {"m": 1.0},
    "oscillator": {"m": 1.0, "omega": 1.0},
    "pendulum": {"m": 1.0, "k": 1.0},
    "quartic": {"m": 1.0, "g": 0.1},
    "henon-heiles": {"lam": 1.0},
}

QUADRATIC = ("free", "oscillator")


def _resolve(name, params):
    if name not in PARAMETERS:
        raise InvalidInput(f"unknown Hamiltonian {name!r}; choose from {sorted(PARAMETERS)}")
    unknown = set(params) - set(PARAMETERS[name])
    if unknown:
        raise InvalidInput(f"unknown parameters for {name!r}: {sorted(unknown)}")
    resolved = {**PARAMETERS[name], **{k: float(v) for k, v in params.items()}}
    if resolved.get("m", 1.0) <= 0:
        raise InvalidInput("mass must be positive")
    return resolved


def _one_dof(name, m, V, dV, d2V):
    return Hamiltonian(
        value=lambda z, t: z[1] ** 2 / (2 * m) + V(z[0]),
        gradient=lambda z, t: np.array([dV(z[0]), z[1] / m]),
        hessian=lambda z, t: np.array([[d2V(z[0]), 0.0], [0.0, 1.0 / m]]),
        n=1, name=name, mass=m, potential=V,
    )


def make_hamiltonian(name: str, **params) -> Hamiltonian:
    """Build a named Hamiltonian; see the module table for parameters."""
    q = _resolve(name, params)
    if name == "free":
        return _one_dof(name, q["m"], lambda x: 0.0 * x, lambda x: 0.0 * x,
                        lambda x: 0.0 * x)
    if name == "oscillator":
        kk = q["m"] * q["omega"] ** 2
        return _one_dof(name, q["m"], lambda x: 0.5 * kk * x ** 2, lambda x: kk * x,
                        lambda x: kk + 0.0 * x)
    if name == "pendulum":
        k = q["k"]
        return _one_dof(name, q["m"], lambda x: -k * np.cos(x), lambda x: k * np.sin(x),
                        lambda x: k * np.cos(x))
    if name == "quartic":
        g = q["g"]
        return _one_dof(name, q["m"], lambda x: g * x ** 4, lambda x: 4 * g * x ** 3,
                        lambda x: 12 * g * x ** 2)

    lam = q["lam"]

    def value(z, t):
        x1, x2, p1, p2 = z
        return 0.5 * (p1 ** 2 + p2 ** 2 + x1 ** 2 + x2 ** 2) + lam * (x1 ** 2 * x2 - x2 ** 3 / 3)

    def gradient(z, t):
        x1, x2, p1, p2 = z
        return np.array([x1 + 2 * lam * x1 * x2, x2 + lam * (x1 ** 2 - x2 ** 2), p1, p2])

    def hessian(z, t):
        x1, x2, _, _ = z
        Hzz = np.eye(4)
        Hzz[0, 0] = 1 + 2 * lam * x2
        Hzz[0, 1] = Hzz[1, 0] = 2 * lam * x1
        Hzz[1, 1] = 1 - 2 * lam * x2
        return Hzz

    return Hamiltonian(value, gradient, hessian, n=2, name=name)


def quadratic_hamiltonian(name: str, **params) -> QuadraticHamiltonian:
    """Matrix form of the quadratic named Hamiltonians."""
    if name not in QUADRATIC:
        raise InvalidInput(f"{name!r} is not quadratic")
    q = _resolve(name, params)
    kk = 0.0 if name == "free" else q["m"] * q["omega"] ** 2
    return QuadraticHamiltonian(np.diag([kk, 1.0 / q["m"]]))
