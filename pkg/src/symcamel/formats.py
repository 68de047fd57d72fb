"""JSON and CSV serialization; the schemas are described in docs/formats.md."""
from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Optional

import numpy as np

from .capacity import Ellipsoid, ShadowReport
from .errors import InvalidInput
from .geometry import Polytope
from .grid import GridWavefunction
from .propagator import GaussianWavepacket
from .uncertainty import CloudCertificate, CovarianceMatrix, RsupReport

SCHEMA_PREFIX = "symcamel"


def _schema(kind: str) -> str:
    return f"{SCHEMA_PREFIX}.{kind}/1"


def rounder(digits: Optional[int]):
    """Float formatter keeping ``digits`` significant digits (``None`` keeps all)."""
    if digits is None:
        return float

    def fmt(v):
        v = float(v)
        if v == 0.0 or not math.isfinite(v):
            return v + 0.0
        r = float(f"{v:.{digits}g}")
        return (r if math.isfinite(r) else v) + 0.0

    return fmt


def _clean(obj, fmt=float):
    """Numpy-free JSON tree with floats passed through ``fmt``."""
    if isinstance(obj, dict):
        return {k: _clean(v, fmt) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v, fmt) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist(), fmt)
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return fmt(obj)
    return obj


def dumps(obj, digits: Optional[int] = None) -> str:
    return json.dumps(_clean(obj, rounder(digits)), indent=2, sort_keys=True) + "\n"


def _text(source) -> str:
    """File contents for a path, or the string itself when it is inline data."""
    if isinstance(source, Path):
        return source.read_text()
    if "\n" in source or source.lstrip()[:1] in ("{", "["):
        return source
    return Path(source).read_text()


def _load(source):
    try:
        return json.loads(_text(source))
    except (TypeError, json.JSONDecodeError) as exc:
        raise InvalidInput(f"malformed JSON: {exc}") from exc


def _expect(doc, kind):
    schema = doc.get("schema") if isinstance(doc, dict) else None
    if schema is not None and schema != _schema(kind):
        raise InvalidInput(f"expected schema {_schema(kind)!r}, got {schema!r}")


def _matrix(data, what="matrix") -> np.ndarray:
    try:
        M = np.array(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise InvalidInput(f"{what} is not a numeric array: {exc}") from exc
    if M.ndim != 2:
        raise InvalidInput(f"{what} must be an array of rows")
    return M


def matrix_to_json(M) -> dict:
    M = np.asarray(M, dtype=float)
    return {"schema": _schema("matrix"), "rows": M.shape[0], "cols": M.shape[1], "data": M}


def matrix_from_json(source) -> np.ndarray:
    doc = _load(source)
    if isinstance(doc, list):
        return _matrix(doc)
    _expect(doc, "matrix")
    return _matrix(doc.get("data"))


def wavefunction_to_json(psi: GridWavefunction) -> dict:
    return {"schema": _schema("wavefunction"), "x0": psi.x0, "dx": psi.dx, "hbar": psi.hbar,
            "N": psi.N, "re": psi.values.real, "im": psi.values.imag}


def wavefunction_from_json(source) -> GridWavefunction:
    doc = _load(source)
    _expect(doc, "wavefunction")
    try:
        values = np.asarray(doc["re"], dtype=float) + 1j * np.asarray(doc["im"], dtype=float)
        return GridWavefunction(doc["x0"], doc["dx"], values, doc.get("hbar", 1.0))
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidInput(f"malformed wavefunction document: {exc}") from exc


def wavefunction_to_csv(psi: GridWavefunction, digits: Optional[int] = None) -> str:
    fmt = rounder(digits)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["x", "re", "im"])
    for x, v in zip(psi.x, psi.values):
        writer.writerow([repr(fmt(x)), repr(fmt(v.real)), repr(fmt(v.imag))])
    return buf.getvalue()


def _read_csv(source, columns):
    rows = list(csv.reader(io.StringIO(_text(source))))
    if not rows or [c.strip() for c in rows[0]] != columns:
        raise InvalidInput(f"CSV header must be {','.join(columns)}")
    body = [r for r in rows[1:] if r]
    try:
        data = np.array([[float(c) for c in r] for r in body], dtype=float)
    except ValueError as exc:
        raise InvalidInput(f"malformed CSV value: {exc}") from exc
    if data.size == 0 or data.shape[1] != len(columns):
        raise InvalidInput("CSV has no data rows or ragged rows")
    return data


def wavefunction_from_csv(source, hbar: float = 1.0) -> GridWavefunction:
    data = _read_csv(source, ["x", "re", "im"])
    x = data[:, 0]
    if x.size < 2:
        raise InvalidInput("need at least two grid points")
    dx = (x[-1] - x[0]) / (x.size - 1)
    if np.max(np.abs(np.diff(x) - dx)) > 1e-9 * max(1.0, abs(dx)):
        raise InvalidInput("grid is not uniform")
    return GridWavefunction(x[0], dx, data[:, 1] + 1j * data[:, 2], hbar)


def gaussian_to_json(wp: GaussianWavepacket) -> dict:
    return {"schema": _schema("gaussian"), "n": wp.n, "center_x": wp.center_x,
            "center_p": wp.center_p, "width": {"re": wp.width.real, "im": wp.width.imag},
            "phase": wp.phase, "hbar": wp.hbar}


def gaussian_from_json(source) -> GaussianWavepacket:
    doc = _load(source)
    _expect(doc, "gaussian")
    try:
        A = np.asarray(doc["width"]["re"], dtype=float) + 1j * np.asarray(
            doc["width"]["im"], dtype=float)
        return GaussianWavepacket(doc["center_x"], doc["center_p"], A, doc.get("phase", 0.0),
                                  doc.get("hbar", 1.0))
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidInput(f"malformed gaussian document: {exc}") from exc


def ellipsoid_to_json(E: Ellipsoid) -> dict:
    return {"schema": _schema("ellipsoid"), "center": E.center, "shape": E.shape}


def ellipsoid_from_json(source) -> Ellipsoid:
    doc = _load(source)
    _expect(doc, "ellipsoid")
    try:
        shape = _matrix(doc["shape"], "shape")
        center = doc.get("center")
        return Ellipsoid(np.zeros(shape.shape[0]) if center is None else center, shape)
    except (KeyError, TypeError) as exc:
        raise InvalidInput(f"malformed ellipsoid document: {exc}") from exc


def polytope_to_json(P: Polytope) -> dict:
    return {"schema": _schema("polytope"), "A": P.A, "b": P.b}


def polytope_from_json(source) -> Polytope:
    doc = _load(source)
    _expect(doc, "polytope")
    try:
        return Polytope(_matrix(doc["A"], "A"), np.asarray(doc["b"], dtype=float))
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidInput(f"malformed polytope document: {exc}") from exc


def covariance_to_json(Sigma: CovarianceMatrix) -> dict:
    return {"schema": _schema("covariance"), "n": Sigma.n, "sigma": Sigma.sigma}


def covariance_from_json(source) -> CovarianceMatrix:
    doc = _load(source)
    _expect(doc, "covariance")
    try:
        sigma = _matrix(doc["sigma"], "sigma")
    except (KeyError, TypeError) as exc:
        raise InvalidInput(f"malformed covariance document: {exc}") from exc
    if "n" in doc and sigma.shape != (2 * doc["n"], 2 * doc["n"]):
        raise InvalidInput("sigma does not match n")
    return CovarianceMatrix(sigma)


def cloud_from_csv(source) -> np.ndarray:
    data = _read_csv(source, ["x", "p"])
    if data.shape[0] < 3:
        raise InvalidInput("a cloud needs at least 3 points")
    return data


def cloud_to_csv(points) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["x", "p"])
    for x, p in np.asarray(points, dtype=float):
        writer.writerow([repr(float(x)), repr(float(p))])
    return buf.getvalue()


def shadow_report_to_json(report: ShadowReport) -> dict:
    return {
        "schema": _schema("shadow-report"),
        "radius": report.radius,
        "min_conjugate_area": report.min_conjugate_area,
        "planes": [{"i": e.i, "j": e.j, "plane": e.label, "area": e.area,
                    "conjugate": e.conjugate} for e in report.entries],
    }


def shadow_report_to_csv(report: ShadowReport, digits: Optional[int] = None) -> str:
    fmt = rounder(digits)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["plane", "area", "conjugate"])
    for e in report.entries:
        writer.writerow([e.label, repr(fmt(e.area)), int(e.conjugate)])
    return buf.getvalue()


def rsup_to_json(report: RsupReport) -> dict:
    return {"all_pass": report.all_pass, "hbar": report.hbar,
            "axes": [{"j": a.j, "dx2": a.dx2, "dp2": a.dp2, "cov": a.cov, "margin": a.margin}
                     for a in report.axes]}


def rsup_to_csv(report: RsupReport, digits: Optional[int] = None) -> str:
    fmt = rounder(digits)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["j", "dx2", "dp2", "cov", "margin"])
    for a in report.axes:
        writer.writerow([a.j] + [repr(fmt(v)) for v in (a.dx2, a.dp2, a.cov, a.margin)])
    return buf.getvalue()


def covariance_report(Sigma: CovarianceMatrix, rsup, quantum, blob) -> dict:
    return {
        "schema": _schema("certificate"),
        "hbar": rsup.hbar,
        "covariance": covariance_to_json(Sigma),
        "rsup": rsup_to_json(rsup),
        "quantum_condition": {"pass": quantum.passed, "min_eigenvalue": quantum.min_eigenvalue},
        "blob": {"capacity": blob.capacity, "threshold": math.pi * rsup.hbar,
                 "is_blob": blob.is_blob},
    }


def certificate_to_json(cert: CloudCertificate) -> dict:
    doc = covariance_report(cert.covariance, cert.rsup, cert.quantum, cert.blob)
    doc["hull"] = {"A": cert.hull.A, "b": cert.hull.b, "vertices": cert.hull.vertices}
    doc["john"] = {"ellipsoid": ellipsoid_to_json(cert.ellipsoid),
                   "duality_gap": cert.john.duality_gap, "log_det": cert.john.log_det}
    return doc
