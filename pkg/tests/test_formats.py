import json
from pathlib import Path

import jsonschema
import numpy as np
import pytest
from hypothesis import given, strategies as st

from symcamel import formats
from symcamel.capacity import Ellipsoid, nonsqueezing_report, squeeze_matrix
from symcamel.errors import InvalidInput
from symcamel.grid import GridWavefunction
from symcamel.propagator import GaussianWavepacket
from symcamel.uncertainty import CovarianceMatrix, certify_cloud, certify_covariance

from conftest import FIXTURES

SCHEMAS = Path(__file__).resolve().parents[1] / "docs" / "schemas"


def load_schema(kind):
    return json.loads((SCHEMAS / f"{kind}.schema.json").read_text())


def validate(doc, kind):
    """Validate the serialized form, resolving sibling-schema references."""
    from referencing import Registry, Resource

    registry = Registry().with_resources(
        (p.name, Resource.from_contents(json.loads(p.read_text())))
        for p in SCHEMAS.glob("*.schema.json"))
    jsonschema.Draft202012Validator(load_schema(kind), registry=registry).validate(
        json.loads(formats.dumps(doc)))


def test_every_schema_is_valid():
    for path in SCHEMAS.glob("*.schema.json"):
        jsonschema.Draft202012Validator.check_schema(json.loads(path.read_text()))


def test_matrix_roundtrip():
    M = np.array([[1.0, 2.5], [-3.0, 1e-300]])
    doc = formats.matrix_to_json(M)
    validate(doc, "matrix")
    assert np.array_equal(formats.matrix_from_json(formats.dumps(doc)), M)


def test_matrix_bare_list():
    assert formats.matrix_from_json("[[1, 0], [0, 1]]").tolist() == [[1, 0], [0, 1]]


@pytest.mark.parametrize("text", ["[1, 2, 3]", '{"data": [["a"]]}', "{not json", "[[1, 2], [3]]"])
def test_matrix_malformed(text):
    with pytest.raises(InvalidInput):
        formats.matrix_from_json(text)


def test_schema_mismatch():
    doc = formats.dumps(formats.matrix_to_json(np.eye(2)))
    with pytest.raises(InvalidInput, match="expected schema"):
        formats.covariance_from_json(doc)
    bumped = doc.replace("symcamel.matrix/1", "symcamel.matrix/2")
    with pytest.raises(InvalidInput):
        formats.matrix_from_json(bumped)


def test_wavefunction_json_roundtrip(rng):
    vals = rng.standard_normal(16) + 1j * rng.standard_normal(16)
    psi = GridWavefunction(-4.0, 0.5, vals, 0.7)
    doc = formats.wavefunction_to_json(psi)
    validate(doc, "wavefunction")
    back = formats.wavefunction_from_json(formats.dumps(doc))
    assert np.array_equal(back.values, psi.values)
    assert (back.x0, back.dx, back.hbar) == (psi.x0, psi.dx, psi.hbar)


def test_wavefunction_csv_roundtrip(rng):
    vals = rng.standard_normal(32) + 1j * rng.standard_normal(32)
    psi = GridWavefunction(-8.0, 0.5, vals, 1.0)
    back = formats.wavefunction_from_csv(formats.wavefunction_to_csv(psi))
    assert np.array_equal(back.values, psi.values)
    assert back.x0 == psi.x0 and back.dx == psi.dx


def test_wavefunction_csv_checks():
    with pytest.raises(InvalidInput, match="header"):
        formats.wavefunction_from_csv("x,real,imag\n0,1,0\n1,1,0\n")
    with pytest.raises(InvalidInput, match="uniform"):
        formats.wavefunction_from_csv("x,re,im\n0,1,0\n1,1,0\n3,1,0\n")
    with pytest.raises(InvalidInput):
        formats.wavefunction_from_csv("x,re,im\n0,1,0\n")
    with pytest.raises(InvalidInput):
        formats.wavefunction_from_csv("x,re,im\n0,1\n1,1\n")


def test_wavefunction_missing_field():
    with pytest.raises(InvalidInput):
        formats.wavefunction_from_json('{"x0": 0, "dx": 1, "re": [1, 2]}')


def test_gaussian_roundtrip():
    A = np.array([[0.3 + 1.0j, 0.1 + 0.2j], [0.1 + 0.2j, -0.5 + 2.0j]])
    wp = GaussianWavepacket([0.5, -1.0], [2.0, 0.25], A, phase=0.75, hbar=0.5)
    doc = formats.gaussian_to_json(wp)
    validate(doc, "gaussian")
    back = formats.gaussian_from_json(formats.dumps(doc))
    assert np.array_equal(back.width, wp.width)
    assert np.array_equal(back.z, wp.z)
    assert (back.phase, back.hbar) == (wp.phase, wp.hbar)


def test_gaussian_rejects_bad_width():
    doc = {"center_x": [0], "center_p": [0], "width": {"re": [[0]], "im": [[-1]]}}
    with pytest.raises(InvalidInput):
        formats.gaussian_from_json(json.dumps(doc))


def test_ellipsoid_roundtrip_and_default_center():
    E = Ellipsoid([1.0, 0.0, -2.0, 0.5], np.diag([1.0, 0.25, 4.0, 1.0]))
    doc = formats.ellipsoid_to_json(E)
    validate(doc, "ellipsoid")
    back = formats.ellipsoid_from_json(formats.dumps(doc))
    assert np.array_equal(back.center, E.center) and np.array_equal(back.shape, E.shape)
    plain = formats.ellipsoid_from_json('{"shape": [[1, 0], [0, 2]]}')
    assert plain.center.tolist() == [0.0, 0.0]


def test_polytope_roundtrip_from_fixture():
    P = formats.polytope_from_json(FIXTURES / "triangle.json")
    validate(formats.polytope_to_json(P), "polytope")
    back = formats.polytope_from_json(formats.dumps(formats.polytope_to_json(P)))
    assert np.allclose(back.A, P.A, rtol=0, atol=4e-16)
    assert np.allclose(back.b, P.b, rtol=0, atol=4e-16)
    assert np.allclose(np.linalg.norm(P.A, axis=1), 1.0)


def test_polytope_shape_mismatch():
    with pytest.raises(InvalidInput, match="different numbers of rows"):
        formats.polytope_from_json('{"A": [[1, 0], [0, 1]], "b": [1]}')


def test_covariance_roundtrip_and_n_check():
    S = CovarianceMatrix(np.array([[2.0, 0.3], [0.3, 1.0]]))
    doc = formats.covariance_to_json(S)
    validate(doc, "covariance")
    assert np.array_equal(formats.covariance_from_json(formats.dumps(doc)).sigma, S.sigma)
    with pytest.raises(InvalidInput, match="does not match"):
        formats.covariance_from_json('{"n": 2, "sigma": [[1, 0], [0, 1]]}')


def test_cloud_csv():
    pts = formats.cloud_from_csv(FIXTURES / "square_cloud.csv")
    assert pts.shape == (4, 2)
    assert np.array_equal(formats.cloud_from_csv(formats.cloud_to_csv(pts)), pts)
    with pytest.raises(InvalidInput):
        formats.cloud_from_csv(FIXTURES / "malformed.csv")
    with pytest.raises(InvalidInput, match="at least 3"):
        formats.cloud_from_csv("x,p\n0,0\n1,1\n")


def test_inline_and_path_loading_agree(tmp_path):
    text = formats.dumps(formats.matrix_to_json(np.eye(2)))
    path = tmp_path / "m.json"
    path.write_text(text)
    for source in (text, path, str(path)):
        assert np.array_equal(formats.matrix_from_json(source), np.eye(2))


def test_shadow_report_formats():
    report = nonsqueezing_report(squeeze_matrix(0.5, 2), 1.0)
    validate(formats.shadow_report_to_json(report), "shadow-report")
    lines = formats.shadow_report_to_csv(report, 12).splitlines()
    assert lines[0] == "plane,area,conjugate"
    assert len(lines) == 1 + 6


def test_certificates_validate():
    cloud = formats.cloud_from_csv(FIXTURES / "square_cloud.csv")
    validate(formats.certificate_to_json(certify_cloud(cloud, 1.0)), "certificate")
    S = formats.covariance_from_json(FIXTURES / "covariance_quarter.json")
    validate(formats.covariance_report(S, *certify_covariance(S, 1.0)), "certificate")
    csv_lines = formats.rsup_to_csv(certify_covariance(S, 1.0)[0]).splitlines()
    assert csv_lines[0] == "j,dx2,dp2,cov,margin"


def test_dumps_is_deterministic_and_plain():
    obj = {"b": np.float64(-0.0), "a": [np.int64(3), np.bool_(True)], "c": np.arange(3.0)}
    text = formats.dumps(obj, 12)
    assert text == formats.dumps(obj, 12)
    assert json.loads(text) == {"a": [3, True], "b": 0.0, "c": [0.0, 1.0, 2.0]}
    assert "-0.0" not in text
    assert list(json.loads(text)) == ["a", "b", "c"]


@given(st.floats(allow_nan=False, allow_infinity=False), st.integers(3, 17))
def test_rounder_is_idempotent(v, digits):
    fmt = formats.rounder(digits)
    once = fmt(v)
    assert fmt(once) == once
    if v != 0:
        assert abs(once - v) <= 10.0 ** (1 - digits) * abs(v)


def test_rounder_full_precision():
    assert formats.rounder(None)(np.float64(0.1)) == 0.1
