import numpy as np
import pytest

from symcamel.errors import InvalidInput
from symcamel.hamiltonians import PARAMETERS, make_hamiltonian, quadratic_hamiltonian


@pytest.mark.parametrize("name", sorted(PARAMETERS))
def test_named_hamiltonians_build(name):
    H = make_hamiltonian(name)
    z = np.linspace(0.1, 0.4, 2 * H.n)
    assert np.isfinite(H.value(z))
    assert np.allclose(H.hessian(z), H.hessian(z).T)


def test_values():
    z = np.array([0.5, 2.0])
    assert make_hamiltonian("free", m=2).value(z) == pytest.approx(1.0)
    assert make_hamiltonian("oscillator", m=2, omega=3).value(z) == pytest.approx(
        1.0 + 0.5 * 2 * 9 * 0.25)
    assert make_hamiltonian("pendulum", k=2).value(z) == pytest.approx(2.0 - 2 * np.cos(0.5))
    assert make_hamiltonian("quartic").value(z) == pytest.approx(2.0 + 0.1 * 0.5 ** 4)
    hh = make_hamiltonian("henon-heiles", lam=0.5)
    assert hh.n == 2
    assert hh.value([1.0, 1.0, 0.0, 0.0]) == pytest.approx(1.0 + 0.5 * (1 - 1 / 3))


def test_one_dof_metadata():
    H = make_hamiltonian("quartic", m=3, g=0.2)
    assert H.mass == 3.0
    assert H.potential(np.array([2.0])) == pytest.approx([3.2])


@pytest.mark.parametrize("name,params", [("free", {"m": 2.0}),
                                         ("oscillator", {"m": 0.5, "omega": 2.0})])
def test_quadratic_forms_agree(name, params, rng):
    H, Q = make_hamiltonian(name, **params), quadratic_hamiltonian(name, **params)
    for z in rng.standard_normal((5, 2)):
        assert Q.value(z) == pytest.approx(H.value(z), rel=1e-14)


def test_errors():
    with pytest.raises(InvalidInput):
        make_hamiltonian("morse")
    with pytest.raises(InvalidInput):
        make_hamiltonian("free", omega=1.0)
    with pytest.raises(InvalidInput):
        make_hamiltonian("oscillator", m=0.0)
    with pytest.raises(InvalidInput):
        quadratic_hamiltonian("quartic")
