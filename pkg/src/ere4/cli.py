"""Command-line front end: ``ere4 {solve-cc, reduce, stability, scan, trajectory}``.

Exit codes: 0 success, 2 input/schema/range error, 3 central configuration
solver failure, 4 collinear configuration, 5 integrator failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .centralconfig import (
    FAMILIES,
    RESIDUAL_TOL,
    family_seed,
    normalize,
    solve_cc,
)
from .errors import (
    CollinearDegeneracy,
    DegenerateGeometry,
    FGIdentityViolation,
    IntegrationError,
    InvalidMass,
    NoConvergence,
    SingularJacobian,
)
from .floquet import (
    DEFAULT_ATOL,
    DEFAULT_RTOL,
    decoupled_reports,
    monodromy,
    spectrum_distance,
)
from .linsys import OrbitParams, analytic_potential_hessian, essential_system, hessian_fd
from .orbit import ere_state, integrate_nbody, kepler_period, write_trajectory_csv
from .symbasis import build_basis, compute_betas

SCHEMA_VERSION = 1
E_MAX = 0.99
BETA12_ZERO = 1e-10

EXIT_OK = 0
EXIT_SCHEMA = 2
EXIT_NO_CONVERGENCE = 3
EXIT_COLLINEAR = 4
EXIT_INTEGRATOR = 5

# mass generator per family for scan specs: parameter t -> four masses
MASS_GENERATORS = {
    "square": lambda t: (1.0, t, 1.0, t),
    "collinear": lambda t: (1.0, t, t, 1.0),
    "triangle_plus_center": lambda t: (1.0, 1.0, 1.0, t),
}


class SchemaError(ValueError):
    pass


# ---------------------------------------------------------------------------
# deterministic JSON


def _fmt_float(x: float) -> str:
    x = float(x)
    if not math.isfinite(x):
        return "null"
    return "%.17g" % x


def _plain(obj):
    """Convert numpy and complex values into JSON-ready Python objects."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    return obj


def dumps(obj, indent: int = 2) -> str:
    """JSON text with every float written to 17 significant digits."""

    def enc(o, level):
        pad = " " * (indent * (level + 1))
        end = " " * (indent * level)
        if isinstance(o, dict):
            if not o:
                return "{}"
            items = [f"{pad}{json.dumps(k)}: {enc(v, level + 1)}" for k, v in o.items()]
            return "{\n" + ",\n".join(items) + "\n" + end + "}"
        if isinstance(o, list):
            if not o:
                return "[]"
            if all(not isinstance(v, (dict, list)) for v in o):
                return "[" + ", ".join(enc(v, level + 1) for v in o) + "]"
            return "[\n" + ",\n".join(pad + enc(v, level + 1) for v in o) + "\n" + end + "]"
        if isinstance(o, bool) or o is None:
            return json.dumps(o)
        if isinstance(o, float):
            return _fmt_float(o)
        return json.dumps(o)

    return enc(_plain(obj), 0) + "\n"


def _emit(text: str, out: str | None) -> None:
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="") as fh:
            fh.write(text)


# ---------------------------------------------------------------------------
# input handling


def _read_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path} is not valid JSON: {exc}") from None


def _check_masses(masses):
    if not isinstance(masses, list) or len(masses) != 4:
        raise SchemaError("'masses' must be a list of 4 numbers")
    try:
        m = [float(x) for x in masses]
    except (TypeError, ValueError):
        raise SchemaError("'masses' must be a list of 4 numbers") from None
    if not all(math.isfinite(x) and x > 0 for x in m):
        raise SchemaError("masses must be positive and finite")
    return m


def _check_positions(positions):
    ok = (
        isinstance(positions, list)
        and len(positions) == 4
        and all(isinstance(p, list) and len(p) == 2 for p in positions)
    )
    if not ok:
        raise SchemaError("'positions' must be a list of 4 [x, y] pairs")
    try:
        xy = np.array(positions, dtype=float)
    except (TypeError, ValueError):
        raise SchemaError("'positions' entries must be numbers") from None
    if not np.all(np.isfinite(xy)):
        raise SchemaError("positions must be finite")
    return xy


def load_problem(input_path: str | None, family: str | None):
    """Masses and seed configuration from a JSON file and/or a family name."""
    data = {} if input_path is None else _read_json(input_path)
    if not isinstance(data, dict):
        raise SchemaError("configuration must be a JSON object")
    family = family or data.get("family")
    masses = _check_masses(data["masses"]) if "masses" in data else None
    if "positions" in data and family in (None, "custom"):
        if masses is None:
            raise SchemaError("'masses' is required")
        return masses, normalize(masses, _check_positions(data["positions"]))
    if family in (None, "custom"):
        raise SchemaError("custom configurations need 'masses' and 'positions'")
    if family not in FAMILIES:
        raise SchemaError(f"unknown family {family!r}")
    seed = family_seed(family, masses)
    return list(seed.masses), seed


def _check_e(e: float) -> float:
    if not (0.0 <= e <= E_MAX) or not math.isfinite(e):
        raise SchemaError(f"eccentricity must lie in [0, {E_MAX}], got {e}")
    return e


def _check_p(p: float) -> float:
    if not (p > 0 and math.isfinite(p)):
        raise SchemaError(f"p must be positive, got {p}")
    return p


# ---------------------------------------------------------------------------
# pipeline pieces


def cc_record(cc) -> dict:
    return {
        "masses": cc.masses,
        "positions": [[z.real, z.imag] for z in cc.positions],
        "mu": cc.mu,
        "trD": cc.trace_D,
        "sigma": cc.sigma,
        "p": cc.p,
        "residual": cc.residual_norm,
        "iterations": cc.iterations,
        "collinear": cc.collinear,
    }


def reduction(cc):
    """Basis, betas and audit numbers for a solved configuration."""
    basis = build_basis(cc)
    betas = compute_betas(cc, basis)
    expected = np.array([cc.mu, 0.0, 0.0, cc.trace_D - cc.mu])
    d_eigs = np.sort(np.linalg.eigvals(cc.D).real)
    fd = hessian_fd(basis, cc.sigma)
    an = analytic_potential_hessian(cc.mu, cc.sigma, betas)
    record = {
        "basis": {"k": basis.k, "l": basis.l, "b": basis.v3, "c": basis.v4, "rho": basis.rho},
        "betas": {
            "beta1": betas.beta1,
            "beta2": betas.beta2,
            "beta11": betas.beta11,
            "beta12": betas.beta12,
            "beta22": betas.beta22,
        },
        "audits": {
            "ATMA_defect": basis.symplectic_defect(),
            "unitarity_defect": basis.unitarity_defect(),
            "D_spectrum": d_eigs,
            "D_spectrum_error": spectrum_distance(d_eigs, expected),
            "FG_defect": betas.fg_defect,
            "fd_hessian_defect": float(np.max(np.abs(fd - an))),
        },
    }
    return basis, betas, record


def _solve(args):
    masses, seed = load_problem(args.input, args.family)
    return solve_cc(masses, seed, args.tol, p=args.p)


def cmd_solve_cc(args) -> int:
    cc = _solve(args)
    _emit(dumps({"schema_version": SCHEMA_VERSION, "command": "solve-cc", "cc": cc_record(cc)}), args.out)
    return EXIT_OK


def cmd_reduce(args) -> int:
    cc = _solve(args)
    _, _, rec = reduction(cc)
    _emit(dumps({"schema_version": SCHEMA_VERSION, "command": "reduce", "cc": cc_record(cc), **rec}), args.out)
    return EXIT_OK


def stability_record(cc, betas, e: float, *, rtol: float, atol: float, method: str) -> dict:
    params = OrbitParams(e, cc.p)
    opts = {"rtol": rtol, "atol": atol, "method": method}
    rep = monodromy(essential_system(params, betas), **opts)
    out = {
        "system": {
            "e": e, "p": cc.p, "beta2": betas.beta2, "beta11": betas.beta11,
            "beta12": betas.beta12, "beta22": betas.beta22,
        },
        "essential": rep.to_dict(),
    }
    if abs(betas.beta12) <= BETA12_ZERO:
        d1, d2 = decoupled_reports(params, betas, **opts)
        union = np.concatenate([d1.eigenvalues, d2.eigenvalues])
        out["decoupled"] = [d1.to_dict(), d2.to_dict()]
        out["decoupled_union_distance"] = spectrum_distance(rep.eigenvalues, union)
    return out


def cmd_stability(args) -> int:
    e = _check_e(args.e)
    cc = _solve(args)
    _, betas, rec = reduction(cc)
    body = stability_record(cc, betas, e, rtol=args.rtol, atol=args.atol, method=args.method)
    doc = {"schema_version": SCHEMA_VERSION, "command": "stability", "cc": cc_record(cc), **rec, **body}
    _emit(dumps(doc), args.out)
    return EXIT_OK


def cmd_trajectory(args) -> int:
    e = _check_e(args.e)
    cc = _solve(args)
    if cc.collinear:
        raise CollinearDegeneracy("trajectory export needs a non-collinear configuration")
    params = OrbitParams(e, cc.p)
    T = args.periods * kepler_period(cc.mu, cc.p, e)
    traj = integrate_nbody(ere_state(0.0, cc, params), cc.masses, T, n_samples=args.samples)
    if args.out in (None, "-"):
        raise SchemaError("trajectory needs --out PATH for the CSV file")
    write_trajectory_csv(args.out, traj)
    return EXIT_OK


# ---------------------------------------------------------------------------
# scans


@dataclass(frozen=True)
class ScanSpec:
    family: str
    mass_points: tuple[tuple[float, ...], ...]
    params: tuple[float | None, ...]
    e_grid: tuple[float, ...]
    p: float = 1.0
    tol: float = RESIDUAL_TOL
    rtol: float = DEFAULT_RTOL
    atol: float = DEFAULT_ATOL
    positions: tuple | None = None
    outputs: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, d: dict) -> "ScanSpec":
        if not isinstance(d, dict):
            raise SchemaError("scan spec must be a JSON object")
        family = d.get("family", "square")
        if family != "custom" and family not in FAMILIES:
            raise SchemaError(f"unknown family {family!r}")
        positions = None
        if family == "custom":
            positions = tuple(map(tuple, _check_positions(d.get("positions")).tolist()))
        if "masses" in d and "mass_param" in d:
            raise SchemaError("give either 'masses' or 'mass_param', not both")
        if "mass_param" in d:
            if family == "custom":
                raise SchemaError("'mass_param' needs a named family")
            values = d["mass_param"]
            if not isinstance(values, list) or not values:
                raise SchemaError("'mass_param' must be a nonempty list")
            params = tuple(float(t) for t in values)
            points = tuple(tuple(_check_masses(list(MASS_GENERATORS[family](t)))) for t in params)
        elif "masses" in d:
            rows = d["masses"]
            if not isinstance(rows, list) or not rows:
                raise SchemaError("'masses' must be a nonempty list of mass vectors")
            points = tuple(tuple(_check_masses(r)) for r in rows)
            params = (None,) * len(points)
        else:
            if family == "custom":
                raise SchemaError("custom scans need 'masses'")
            points = (tuple(FAMILIES[family][1]),)
            params = (None,)
        e_grid = d.get("e_grid")
        if not isinstance(e_grid, list) or not e_grid:
            raise SchemaError("'e_grid' must be a nonempty list")
        try:
            e_vals = tuple(_check_e(float(e)) for e in e_grid)
        except (TypeError, ValueError) as exc:
            raise SchemaError(str(exc)) from None
        return cls(
            family=family, mass_points=points, params=params, e_grid=e_vals,
            p=_check_p(float(d.get("p", 1.0))), tol=float(d.get("tol", RESIDUAL_TOL)),
            rtol=float(d.get("rtol", DEFAULT_RTOL)), atol=float(d.get("atol", DEFAULT_ATOL)),
            positions=positions, outputs=dict(d.get("outputs", {})),
        )


SCAN_COLUMNS = (
    ["i_mass", "i_e", "param", "m1", "m2", "m3", "m4", "e",
     "beta2", "abs_beta11", "abs_beta12", "abs_beta22"]
    + [f"mod{k}" for k in range(1, 9)]
    + ["symplectic_defect", "determinant", "stability", "failure"]
)


def _scan_point(job) -> dict:
    spec, i_m, i_e = job
    masses = spec.mass_points[i_m]
    e = spec.e_grid[i_e]
    row = {"i_mass": i_m, "i_e": i_e, "param": spec.params[i_m], "e": e}
    row.update({f"m{k + 1}": m for k, m in enumerate(masses)})
    try:
        if spec.family == "custom":
            seed = normalize(masses, np.array(spec.positions))
        else:
            seed = family_seed(spec.family, masses)
        cc = solve_cc(masses, seed, spec.tol, p=spec.p)
        betas = compute_betas(cc, build_basis(cc))
        rep = monodromy(essential_system(OrbitParams(e, spec.p), betas), rtol=spec.rtol, atol=spec.atol)
        row.update(
            beta2=betas.beta2, abs_beta11=abs(betas.beta11), abs_beta12=abs(betas.beta12),
            abs_beta22=abs(betas.beta22), symplectic_defect=rep.symplectic_defect,
            determinant=rep.determinant, stability=rep.stability,
        )
        row.update({f"mod{k + 1}": v for k, v in enumerate(rep.moduli)})
    except (ArithmeticError, ValueError, RuntimeError) as exc:
        row["failure"] = f"{type(exc).__name__}: {exc}"
    return row


def _csv_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return _fmt_float(v) if math.isfinite(v) else "nan"
    return str(v)


def run_scan(spec: ScanSpec, threads: int = 1) -> list[dict]:
    jobs = [(spec, i, j) for i in range(len(spec.mass_points)) for j in range(len(spec.e_grid))]
    if threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(_scan_point, jobs))
    return [_scan_point(j) for j in jobs]


def scan_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SCAN_COLUMNS)
    for row in rows:
        w.writerow([_csv_cell(row.get(c)) for c in SCAN_COLUMNS])
    return buf.getvalue()


def cmd_scan(args) -> int:
    if args.input is None:
        raise SchemaError("scan needs --input SPEC.json")
    spec = ScanSpec.from_dict(_read_json(args.input))
    if args.threads < 1:
        raise SchemaError("--threads must be at least 1")
    rows = run_scan(spec, args.threads)
    _emit(scan_csv(rows), args.out or spec.outputs.get("csv"))
    failed = sum(1 for r in rows if r.get("failure"))
    if failed:
        print(f"{failed} of {len(rows)} scan points failed; see the 'failure' column", file=sys.stderr)
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", help="JSON configuration (or scan spec) path")
    common.add_argument("--family", choices=sorted(FAMILIES) + ["custom"], help="named seed family")
    common.add_argument("--p", type=float, default=1.0, help="semi-latus rectum (default 1)")
    common.add_argument("--tol", type=float, default=RESIDUAL_TOL, help="central configuration residual tolerance")
    common.add_argument("--out", help="output path (default stdout)")
    common.add_argument("--threads", type=int, default=1, help="worker processes for scans")

    orbit = argparse.ArgumentParser(add_help=False)
    orbit.add_argument("--e", type=float, default=0.0, help="eccentricity in [0, 0.99]")
    orbit.add_argument("--rtol", type=float, default=DEFAULT_RTOL)
    orbit.add_argument("--atol", type=float, default=DEFAULT_ATOL)
    orbit.add_argument("--method", choices=["gauss", "dop853"], default="gauss")

    parser = argparse.ArgumentParser(prog="ere4", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("solve-cc", parents=[common], help="solve a central configuration").set_defaults(func=cmd_solve_cc)
    sub.add_parser("reduce", parents=[common], help="reduction basis, betas and audits").set_defaults(func=cmd_reduce)
    sub.add_parser("stability", parents=[common, orbit], help="monodromy of the essential system").set_defaults(
        func=cmd_stability
    )
    sub.add_parser("scan", parents=[common], help="parameter grid to CSV").set_defaults(func=cmd_scan)
    traj = sub.add_parser("trajectory", parents=[common, orbit], help="nonlinear trajectory CSV from the ERE")
    traj.add_argument("--periods", type=float, default=1.0)
    traj.add_argument("--samples", type=int, default=201)
    traj.set_defaults(func=cmd_trajectory)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and EXIT_SCHEMA
    try:
        if hasattr(args, "p"):
            _check_p(args.p)
        return args.func(args)
    except (SchemaError, InvalidMass, DegenerateGeometry) as exc:
        code, msg = EXIT_SCHEMA, str(exc)
    except (NoConvergence, SingularJacobian, FGIdentityViolation) as exc:
        code, msg = EXIT_NO_CONVERGENCE, str(exc)
    except CollinearDegeneracy as exc:
        code, msg = EXIT_COLLINEAR, str(exc)
    except (IntegrationError, ZeroDivisionError) as exc:
        code, msg = EXIT_INTEGRATOR, str(exc)
    print(f"ere4: error: {msg}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
