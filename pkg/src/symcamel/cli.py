"""Command-line front end.

Exit codes: 0 success (physical verdicts are report content), 2 invalid
configuration or input, 3 numerical failure, 4 non-squeezing violation.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np
from threadpoolctl import threadpool_limits

from . import formats
from .capacity import (Ellipsoid, cylinder_capacity, ellipsoid_capacity, nonsqueezing_report,
                       squeeze_matrix)
from .errors import (BlowUp, CausticCrossing, DegenerateHull, DegenerateMatrix,
                     DegenerateRegion, DegenerateState, InvalidGrid, SingularTime,
                     SymcamelError, UnboundedRegion, UnderResolvedGrid)
from .flows import classical_trajectory, ehrenfest_classical
from .geometry import convex_hull_2d, ellipsoid_volume, john_ellipsoid_full
from .grid import GridWavefunction, l2_distance, make_grid, phase_aligned_distance
from .hamiltonians import PARAMETERS, QUADRATIC, make_hamiltonian, quadratic_hamiltonian
from .linalg import random_symplectic, symplectic_defect, symplectic_eigenvalues
from .propagator import (GaussianWavepacket, KernelSpec, ehrenfest_means, gaussian_propagate,
                         kernel_propagate, nearby_orbit_propagate)
from .reference import PotentialSpec, evolve_to, split_step_evolve
from .uncertainty import certify_cloud, certify_covariance

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_VIOLATION = 0, 2, 3, 4

NUMERICAL_ERRORS = (UnderResolvedGrid, BlowUp, CausticCrossing, DegenerateMatrix,
                    DegenerateHull, DegenerateRegion, UnboundedRegion, SingularTime,
                    DegenerateState)

GLOBAL_DEFAULTS = {
    "hbar": 1.0,
    "seed": 0,
    "out": "out",
    "format": "json",
    "threads": None,
    "digits": 12,
    "tol_symplectic": 1e-9,
    "tol_psd": 1e-10,
    "tol_quadrature": 1e-6,
    "tol_violation": 1e-9,
}

COMMAND_DEFAULTS = {
    "propagate": {"h": "free", "param": [], "method": "kernel", "oracle": False, "t": 1.0,
                  "dt": 1e-4, "orbit_dt": 1e-3, "N": 2048, "domain": [-20.0, 20.0],
                  "x0": 0.0, "p0": 0.0, "sigma": 1.0, "input": None},
    "ehrenfest": {"h": "oscillator", "param": [], "T": 2 * math.pi, "samples": 64,
                  "dt": 1e-3, "N": 2048, "domain": [-20.0, 20.0], "x0": 1.0, "p0": 0.0,
                  "sigma": None},
    "squeeze": {"matrix": None, "demo": False, "random": False, "lam": 0.5, "n": 2,
                "trials": 1000, "radius": 1.0},
    "certify": {"cloud": None, "covariance": None},
    "capacity": {"ellipsoid": None, "semiaxes": None},
    "john": {"polytope": None, "cloud": None},
}


class ConfigError(Exception):
    pass


def _param(text):
    name, sep, value = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected NAME=VALUE, got {text!r}")
    try:
        return name.strip(), float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"parameter value must be numeric: {text!r}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    g = common.add_argument_group("global options")
    g.add_argument("--hbar", type=float)
    g.add_argument("--seed", type=int)
    g.add_argument("--out", help="output directory")
    g.add_argument("--format", choices=["json", "csv"])
    g.add_argument("--threads", type=int, help="cap on BLAS threads")
    g.add_argument("--digits", type=int, help="significant digits in output files")
    g.add_argument("--tol-symplectic", dest="tol_symplectic", type=float)
    g.add_argument("--tol-psd", dest="tol_psd", type=float)
    g.add_argument("--tol-quadrature", dest="tol_quadrature", type=float)
    g.add_argument("--tol-violation", dest="tol_violation", type=float)
    g.add_argument("--config", help="JSON file of option defaults")
    g.add_argument("--dump-config", dest="dump_config", action="store_true",
                   help="print the resolved configuration and exit")

    parser = argparse.ArgumentParser(prog="symcamel", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name, help_text):
        return sub.add_parser(name, parents=[common], help=help_text,
                              argument_default=argparse.SUPPRESS)

    def state_options(p):
        p.add_argument("--h", choices=sorted(PARAMETERS), help="named Hamiltonian")
        p.add_argument("--param", action="append", type=_param, metavar="NAME=VALUE")
        p.add_argument("--N", type=int, help="grid points (power of two)")
        p.add_argument("--domain", type=float, nargs=2, metavar=("LO", "HI"))
        p.add_argument("--x0", type=float)
        p.add_argument("--p0", type=float)
        p.add_argument("--sigma", type=float, help="initial position spread")

    p = command("propagate", "propagate a wavefunction")
    state_options(p)
    p.add_argument("--method", choices=["kernel", "gaussian", "nearby"])
    p.add_argument("--oracle", action="store_true", help="also run the split-step solver")
    p.add_argument("--t", type=float)
    p.add_argument("--dt", type=float, help="reference-solver step")
    p.add_argument("--orbit-dt", dest="orbit_dt", type=float, help="nearby-orbit RK4 step")
    p.add_argument("--input", help="initial state (wavefunction CSV/JSON or gaussian JSON)")

    p = command("ehrenfest", "quantum means versus the classical trajectory")
    state_options(p)
    p.add_argument("--T", type=float)
    p.add_argument("--samples", type=int)
    p.add_argument("--dt", type=float)

    p = command("squeeze", "shadow areas of a symplectically deformed ball")
    p.add_argument("--matrix", help="JSON matrix")
    p.add_argument("--demo", action="store_true")
    p.add_argument("--random", action="store_true")
    p.add_argument("--lam", type=float)
    p.add_argument("--n", type=int, help="degrees of freedom")
    p.add_argument("--trials", type=int)
    p.add_argument("--radius", type=float)

    p = command("certify", "uncertainty certification of a cloud or covariance")
    p.add_argument("--cloud", help="CSV with x,p columns")
    p.add_argument("--covariance", help="covariance JSON")

    p = command("capacity", "symplectic capacity of an ellipsoid")
    p.add_argument("--ellipsoid", help="ellipsoid JSON")
    p.add_argument("--semiaxes", type=float, nargs="+", help="x1..xn p1..pn semiaxes")

    p = command("john", "John ellipsoid of a polytope or planar cloud")
    p.add_argument("--polytope", help="polytope JSON")
    p.add_argument("--cloud", help="CSV with x,p columns")
    return parser


def resolve_config(ns: argparse.Namespace) -> dict:
    """Flags over config file over defaults."""
    given = vars(ns).copy()
    command = given.pop("command")
    cfg = {**GLOBAL_DEFAULTS, **COMMAND_DEFAULTS[command]}
    config_path = given.pop("config", None)
    if config_path is not None:
        try:
            loaded = json.loads(Path(config_path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {config_path}: {exc}")
        if not isinstance(loaded, dict):
            raise ConfigError("config file must hold a JSON object")
        loaded = {k.replace("-", "_"): v for k, v in loaded.items()}
        unknown = set(loaded) - set(cfg)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg.update(loaded)
    cfg.update(given)
    cfg["command"] = command
    cfg.setdefault("dump_config", False)
    _validate(cfg)
    return cfg


def _validate(cfg):
    if not cfg["hbar"] > 0:
        raise ConfigError("--hbar must be positive")
    if cfg["threads"] is not None and cfg["threads"] < 1:
        raise ConfigError("--threads must be >= 1")
    if not 3 <= cfg["digits"] <= 17:
        raise ConfigError("--digits must lie in [3, 17]")
    for key in ("tol_symplectic", "tol_psd", "tol_quadrature", "tol_violation"):
        if not cfg[key] > 0:
            raise ConfigError(f"--{key.replace('_', '-')} must be positive")
    if "N" in cfg and cfg["N"] < 8:
        raise ConfigError("--N must be >= 8")
    if "domain" in cfg and not cfg["domain"][1] > cfg["domain"][0]:
        raise ConfigError("--domain must satisfy LO < HI")
    if "dt" in cfg and not cfg["dt"] > 0:
        raise ConfigError("--dt must be positive")
    inputs = [cfg.get(k) for k in ("input", "matrix", "cloud", "covariance", "ellipsoid",
                                   "polytope") if cfg.get(k)]
    if inputs and any(Path(cfg["out"]).resolve() == Path(i).resolve() for i in inputs):
        raise ConfigError("output path must differ from input paths")


class Writer:
    def __init__(self, cfg):
        self.dir = Path(cfg["out"])
        self.digits = cfg["digits"]
        self.written = []

    def text(self, name, content):
        self.dir.mkdir(parents=True, exist_ok=True)
        path = self.dir / name
        path.write_text(content)
        self.written.append(str(path))

    def json(self, name, obj):
        self.text(name, formats.dumps(obj, self.digits))

    def wavefunction(self, stem, psi, fmt):
        if fmt == "csv":
            self.text(f"{stem}.csv", formats.wavefunction_to_csv(psi, self.digits))
        else:
            self.json(f"{stem}.json", formats.wavefunction_to_json(psi))


def _params(cfg):
    params = dict(cfg["param"]) if cfg["param"] else {}
    try:
        H = make_hamiltonian(cfg["h"], **params)
    except SymcamelError as exc:
        raise ConfigError(str(exc))
    return H, {**PARAMETERS[cfg["h"]], **params}


def _potential(name, params):
    if name == "free":
        return PotentialSpec("zero")
    if name == "oscillator":
        return PotentialSpec("harmonic", m=params["m"], omega=params["omega"])
    if name == "quartic":
        return PotentialSpec("quartic", g=params["g"])
    if name == "pendulum":
        return PotentialSpec("pendulum", k=params["k"])
    raise ConfigError(f"{name!r} has no grid potential")


def _grid(cfg):
    N = cfg["N"]
    if N & (N - 1):
        raise ConfigError("--N must be a power of two")
    return make_grid(N, *cfg["domain"])


def _initial_gaussian(cfg, default_sigma):
    sigma = cfg["sigma"] if cfg["sigma"] is not None else default_sigma
    if not sigma > 0:
        raise ConfigError("--sigma must be positive")
    return GaussianWavepacket.from_sigma(cfg["x0"], cfg["p0"], sigma, cfg["hbar"])


def _load_initial(cfg, H):
    """Initial state as (gaussian or None, grid wavefunction or None)."""
    path = cfg["input"]
    if path is None:
        wp = _initial_gaussian(cfg, 1.0)
        if H.n != 1:
            return wp, None
        x0, dx = _grid(cfg)
        return wp, wp.on_grid(x0, dx, cfg["N"])
    text = Path(path).read_text()
    if path.endswith(".csv"):
        return None, formats.wavefunction_from_csv(text, cfg["hbar"])
    doc = formats._load(text)
    if isinstance(doc, dict) and doc.get("schema") == formats._schema("gaussian"):
        wp = formats.gaussian_from_json(text)
        if H.n != 1:
            return wp, None
        x0, dx = _grid(cfg)
        return wp, wp.on_grid(x0, dx, cfg["N"])
    return None, formats.wavefunction_from_json(text)


def _means(psi):
    mx, mp, vx, vp = ehrenfest_means(psi)
    return {"x": mx, "p": mp, "var_x": vx, "var_p": vp}


def cmd_propagate(cfg, out: Writer) -> int:
    H, params = _params(cfg)
    method, t = cfg["method"], cfg["t"]
    wp, psi0 = _load_initial(cfg, H)
    if psi0 is not None and not math.isclose(psi0.hbar, cfg["hbar"]):
        raise ConfigError("input state hbar differs from --hbar")
    summary = {"command": "propagate", "hamiltonian": cfg["h"], "params": params,
               "method": method, "t": t, "hbar": cfg["hbar"]}

    if method in ("kernel", "gaussian") and cfg["h"] not in QUADRATIC:
        raise ConfigError(f"--method {method} needs a quadratic Hamiltonian (free, oscillator)")
    if method == "kernel":
        if psi0 is None:
            raise ConfigError("kernel propagation needs a 1-dof grid state")
        spec = KernelSpec(cfg["h"], t, m=params["m"], omega=params.get("omega", 1.0),
                          hbar=cfg["hbar"])
        final = kernel_propagate(psi0, spec, quadrature_tol=cfg["tol_quadrature"])
    else:
        if wp is None:
            raise ConfigError(f"--method {method} needs a gaussian initial state")
        if method == "gaussian":
            wpt = gaussian_propagate(wp, quadratic_hamiltonian(cfg["h"], **dict(cfg["param"])), t)
        else:
            wpt = nearby_orbit_propagate(H, wp, t, cfg["orbit_dt"])
        out.json("gaussian.json", formats.gaussian_to_json(wpt))
        summary["center"] = {"x": wpt.center_x, "p": wpt.center_p}
        summary["center_shift"] = float(np.max(np.abs(wpt.z - wp.z)))
        final = None if psi0 is None else wpt.on_grid(psi0.x0, psi0.dx, psi0.N)

    if final is not None:
        out.wavefunction("state", final, cfg["format"])
        summary["grid"] = {"N": final.N, "x0": final.x0, "dx": final.dx}
        summary["norm2_initial"] = psi0.norm2
        summary["norm2_final"] = final.norm2
        summary["means"] = _means(final)
        summary["l2_to_initial"] = l2_distance(final, psi0)

    if cfg["oracle"]:
        if final is None:
            raise ConfigError("--oracle needs a 1-dof grid state")
        if t < 0:
            raise ConfigError("--oracle runs forward in time only")
        ref = evolve_to(psi0, _potential(cfg["h"], params), params.get("m", 1.0), t, cfg["dt"])
        dist, phase = phase_aligned_distance(final, ref)
        out.wavefunction("oracle", ref, cfg["format"])
        summary["oracle"] = {"dt": cfg["dt"], "l2_phase_aligned": dist,
                             "relative_phase": phase, "l2": l2_distance(final, ref)}
    out.json("summary.json", summary)
    return EXIT_OK


def cmd_ehrenfest(cfg, out: Writer) -> int:
    H, params = _params(cfg)
    if H.n != 1:
        raise ConfigError("ehrenfest runs on 1-dof Hamiltonians")
    if cfg["samples"] < 1 or not cfg["T"] > 0:
        raise ConfigError("--samples must be >= 1 and --T positive")
    wp = _initial_gaussian(cfg, math.sqrt(cfg["hbar"] / 2))
    x0, dx = _grid(cfg)
    psi = wp.on_grid(x0, dx, cfg["N"])
    V = _potential(cfg["h"], params)
    m = params.get("m", 1.0)
    times = np.linspace(0.0, cfg["T"], cfg["samples"] + 1)
    interval = cfg["T"] / cfg["samples"]
    steps = max(1, math.ceil(interval / cfg["dt"] - 1e-9))

    quadratic = cfg["h"] in QUADRATIC
    Hq = quadratic_hamiltonian(cfg["h"], **dict(cfg["param"])) if quadratic else None
    z = wp.z
    rows = []
    for k, t in enumerate(times):
        if k:
            psi = split_step_evolve(psi, V, m, interval / steps, steps)
            if quadratic:
                z = ehrenfest_classical(Hq, wp.z, t).z
            else:
                z = classical_trajectory(H, z, interval, interval / steps).end
        mx, mp, _, _ = ehrenfest_means(psi)
        rows.append((t, mx, mp, z[0], z[1], math.hypot(mx - z[0], mp - z[1])))

    fmt = formats.rounder(out.digits)
    lines = ["t,x_quantum,p_quantum,x_classical,p_classical,deviation"]
    lines += [",".join(repr(fmt(v)) for v in row) for row in rows]
    out.text("ehrenfest.csv", "\n".join(lines) + "\n")
    dev = [r[5] for r in rows]
    out.json("summary.json", {"command": "ehrenfest", "hamiltonian": cfg["h"],
                              "params": params, "T": cfg["T"], "samples": cfg["samples"],
                              "hbar": cfg["hbar"], "max_deviation": max(dev),
                              "final_deviation": dev[-1]})
    return EXIT_OK


def cmd_squeeze(cfg, out: Writer) -> int:
    r = cfg["radius"]
    if not r > 0:
        raise ConfigError("--radius must be positive")
    tol = cfg["tol_violation"]
    if cfg["random"]:
        if cfg["trials"] < 1 or cfg["n"] < 1:
            raise ConfigError("--trials and --n must be >= 1")
        rng = np.random.default_rng(cfg["seed"])
        seeds = rng.integers(0, 2 ** 63 - 1, size=cfg["trials"])
        floor = math.pi * r ** 2
        ratios, violations = [], 0
        for s in seeds:
            rep = nonsqueezing_report(random_symplectic(cfg["n"], int(s)), r)
            ratios.append(rep.min_conjugate_area / floor)
            violations += len(rep.violations(tol))
        summary = {"command": "squeeze", "mode": "random", "n": cfg["n"],
                   "trials": cfg["trials"], "seed": cfg["seed"], "radius": r,
                   "violations": violations, "min_conjugate_ratio": min(ratios)}
        if cfg["format"] == "csv":
            lines = ["trial,min_conjugate_ratio"]
            fmt = formats.rounder(out.digits)
            lines += [f"{k},{fmt(v)!r}" for k, v in enumerate(ratios)]
            out.text("trials.csv", "\n".join(lines) + "\n")
        out.json("summary.json", summary)
        return EXIT_VIOLATION if violations else EXIT_OK

    if cfg["matrix"]:
        S = formats.matrix_from_json(Path(cfg["matrix"]).read_text())
        defect = symplectic_defect(S)
        if defect > cfg["tol_symplectic"]:
            print(f"error: matrix is not symplectic (defect {defect:.3e})", file=sys.stderr)
            return EXIT_CONFIG
    else:
        if not cfg["lam"] > 0:
            raise ConfigError("--lam must be positive")
        S = squeeze_matrix(cfg["lam"], cfg["n"])
    report = nonsqueezing_report(S, r)
    if cfg["format"] == "csv":
        out.text("report.csv", formats.shadow_report_to_csv(report, out.digits))
    else:
        out.json("report.json", formats.shadow_report_to_json(report))
    return EXIT_VIOLATION if report.violations(tol) else EXIT_OK


def cmd_certify(cfg, out: Writer) -> int:
    hbar = cfg["hbar"]
    if bool(cfg["cloud"]) == bool(cfg["covariance"]):
        raise ConfigError("give exactly one of --cloud or --covariance")
    if cfg["cloud"]:
        cloud = formats.cloud_from_csv(Path(cfg["cloud"]).read_text())
        cert = certify_cloud(cloud, hbar, cfg["tol_psd"])
        rsup = cert.rsup
        doc = formats.certificate_to_json(cert)
    else:
        Sigma = formats.covariance_from_json(Path(cfg["covariance"]).read_text())
        rsup, quantum, blob = certify_covariance(Sigma, hbar, cfg["tol_psd"])
        doc = formats.covariance_report(Sigma, rsup, quantum, blob)
    out.json("report.json", doc)
    if cfg["format"] == "csv":
        out.text("margins.csv", formats.rsup_to_csv(rsup, out.digits))
    return EXIT_OK


def cmd_capacity(cfg, out: Writer) -> int:
    if bool(cfg["ellipsoid"]) == bool(cfg["semiaxes"]):
        raise ConfigError("give exactly one of --ellipsoid or --semiaxes")
    if cfg["ellipsoid"]:
        E = formats.ellipsoid_from_json(Path(cfg["ellipsoid"]).read_text())
    else:
        axes = np.asarray(cfg["semiaxes"], dtype=float)
        if axes.size % 2 or np.any(axes <= 0):
            raise ConfigError("--semiaxes needs an even number of positive values")
        E = Ellipsoid(np.zeros(axes.size), np.diag(axes ** -2.0))
    cap = ellipsoid_capacity(E)
    out.json("capacity.json", {
        "command": "capacity", "ellipsoid": formats.ellipsoid_to_json(E), "capacity": cap,
        "symplectic_eigenvalues": symplectic_eigenvalues(E.shape),
        "volume": ellipsoid_volume(E),
        "fits_cylinder_radius": math.sqrt(cap / math.pi),
        "cylinder_capacity": cylinder_capacity(math.sqrt(cap / math.pi)),
    })
    return EXIT_OK


def cmd_john(cfg, out: Writer) -> int:
    if bool(cfg["polytope"]) == bool(cfg["cloud"]):
        raise ConfigError("give exactly one of --polytope or --cloud")
    if cfg["polytope"]:
        P = formats.polytope_from_json(Path(cfg["polytope"]).read_text())
    else:
        P = convex_hull_2d(formats.cloud_from_csv(Path(cfg["cloud"]).read_text()))
    res = john_ellipsoid_full(P)
    out.json("john.json", {"command": "john", "polytope": formats.polytope_to_json(P),
                           "ellipsoid": formats.ellipsoid_to_json(res.ellipsoid),
                           "duality_gap": res.duality_gap, "log_det": res.log_det,
                           "volume": ellipsoid_volume(res.ellipsoid)})
    return EXIT_OK


COMMANDS = {"propagate": cmd_propagate, "ehrenfest": cmd_ehrenfest, "squeeze": cmd_squeeze,
            "certify": cmd_certify, "capacity": cmd_capacity, "john": cmd_john}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        cfg = resolve_config(ns)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if cfg.pop("dump_config"):
        print(json.dumps(formats._clean(cfg), indent=2, sort_keys=True))
        return EXIT_OK

    out = Writer(cfg)
    try:
        with threadpool_limits(limits=cfg["threads"]):
            code = COMMANDS[cfg["command"]](cfg, out)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (SymcamelError, OSError, InvalidGrid) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    for path in out.written:
        print(path)
    return code


def main_entry():
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
