"""Batch command line: verification suites, sweeps, solves and exports.

    alflab verify SUITE [--m M] [--k K] [--seed S] [--n N] [--out FILE]
    alflab solve --config FILE [--seed S] [--out FILE]
    alflab sweep KIND [--m M] [--n N] [--rmin A] [--rmax B] [--ale NAME] [--out FILE]
    alflab export [--m M] [--seed S] [--n N] [--out FILE]

CSV goes to ``--out`` (stdout when omitted); a run manifest is written next
to it as ``<out>.manifest.json`` (stderr when writing to stdout).  Exit codes:
0 success, 1 a verification check failed, 2 the continuity path stopped before
t = 1 (cone exit or Newton failure at the minimal step).
"""

import argparse
import copy
import csv
import hashlib
import io
import json
import logging
import sys
import time
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import __version__
from . import gluing as gl
from . import suites
from . import taubnut as tn
from . import monge_ampere as ma


@dataclass
class RunManifest:
    command: str
    config_hash: str
    seed: int
    version: str
    timestamp: str

    @classmethod
    def build(cls, command, config, seed):
        blob = json.dumps(config, sort_keys=True, default=str).encode()
        return cls(command, hashlib.sha256(blob).hexdigest()[:16], int(seed), __version__,
                   time.strftime("%Y-%m-%dT%H:%M:%S%z"))


def _write_csv(rows, fieldnames, out):
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=fieldnames, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(r)
    if out:
        Path(out).write_text(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())


def _write_manifest(manifest, out):
    text = json.dumps(asdict(manifest), indent=2)
    if out:
        Path(str(out) + ".manifest.json").write_text(text + "\n")
    else:
        sys.stderr.write(text + "\n")


def _fmt(v):
    return repr(float(v)) if isinstance(v, (float, np.floating)) else v


# -- verify -------------------------------------------------------------------

def cmd_verify(args):
    config = {"suite": args.suite, "m": args.m, "k": args.k, "n": args.n}
    rows = suites.run_suite(args.suite, m=args.m, seed=args.seed, n=args.n, k=args.k)
    fields = ["suite", "point", "check", "value", "tol", "mode", "passed", "identity"]
    _write_csv([r.row() for r in rows], fields, args.out)
    _write_manifest(RunManifest.build("verify", config, args.seed), args.out)
    bad = suites.first_failure(rows)
    n_bad = sum(not r.passed for r in rows)
    if bad is not None:
        tol = bad.tol if bad.mode != "in" else f"[{bad.tol[0]}, {bad.tol[1]}]"
        print(f"FAIL {args.suite}: {n_bad} of {len(rows)} checks; first: point {bad.point} "
              f"{bad.check} = {bad.value:.3e} (need {bad.mode} {tol}): {bad.identity}",
              file=sys.stderr)
        return 1
    print(f"OK {args.suite}: {len(rows)} checks passed", file=sys.stderr)
    return 0


# -- sweep --------------------------------------------------------------------

def sweep_comparison(args, rng):
    rows = []
    radii = np.geomspace(args.rmin or 0.1, args.rmax or 20.0, args.n)
    for R in radii:
        c = rng.uniform(-1, 1)
        ang = rng.uniform(0, 2 * np.pi)
        s = np.sqrt(1 - c * c)
        p = tn.point_from_moment(args.m, R * np.array([c, s * np.cos(ang), s * np.sin(ang)]),
                                 rng.uniform(0, 2 * np.pi))
        lo, hi, det = tn.metric_eigenvalues(p)
        with np.errstate(over="ignore"):
            upper = 2 * R * np.exp(4 * args.m * R)
        rows.append({"R": R, "y1_over_R": c, "r2": p.r2, "two_R": 2 * R, "upper": upper,
                     "lam_min": lo, "lam_max": hi, "det_e": det,
                     "ordered": int(2 * R * (1 - 1e-12) <= p.r2 <= upper * (1 + 1e-12))})
    return rows


def sweep_decay(args, rng):
    ale = gl.ALEModel(args.ale)
    K = 1.0
    cfg = gl.GluingConfig(args.m, K, gl.radius_for_level(args.m, K + 1), 0.5, ale)
    R0 = max(args.rmin or 0.0, 0.5 * (cfg.r0 + 2) ** 2)
    radii = np.geomspace(R0, args.rmax or 32 * R0, args.n)
    rep = gl.decay_report(cfg, radii)
    rows = []
    for j, R in enumerate(rep["R"]):
        p = tn.point_from_moment(args.m, [0.0, R, 0.0])
        P = gl.hermitian_parts(cfg, p.x)
        lam = gl.generalized_min_eig(P["h_m"], P["h_f"])[0]
        rows.append({"r": rep["r"][j], "R": R, "min_eig_vs_f": lam,
                     "deviation_f": rep["deviation"][j], "volume_deviation": rep["volume"][j],
                     "alpha0_f": rep["alpha0_f"][j]})
    return rows


def sweep_fiber(args, rng):
    radii = np.geomspace(args.rmin or 1.0, args.rmax or 1e4, args.n)
    lim = np.pi * np.sqrt(2 / args.m)
    return [{"R": R, "fiber_length": tn.fiber_length(args.m, R), "limit": lim,
             "relative_gap": tn.fiber_length(args.m, R) / lim - 1} for R in radii]


SWEEPS = {"comparison-bounds": sweep_comparison, "decay": sweep_decay,
          "fiber-length": sweep_fiber}


def cmd_sweep(args):
    rng = np.random.default_rng(np.random.SeedSequence(args.seed))
    rows = SWEEPS[args.kind](args, rng)
    config = {"kind": args.kind, "m": args.m, "n": args.n, "rmin": args.rmin,
              "rmax": args.rmax, "ale": args.ale}
    _write_csv([{k: _fmt(v) for k, v in r.items()} for r in rows], list(rows[0]), args.out)
    _write_manifest(RunManifest.build("sweep", config, args.seed), args.out)
    return 0


# -- export -------------------------------------------------------------------

def cmd_export(args):
    rng = np.random.default_rng(np.random.SeedSequence(args.seed))
    rows = []
    for p in tn.sample_points(rng, args.m, args.n):
        h = tn.hermitian_f(p)
        rows.append({k: _fmt(v) for k, v in {
            "x1": p.x[0], "x2": p.x[1], "x3": p.x[2], "x4": p.x[3], "u": p.u, "v": p.v,
            "y1": p.y1, "y2": p.y2, "y3": p.y3, "R": p.R, "V": p.V, "r2": p.r2,
            "phi": tn.potential_phi(p), "h11": h[0, 0].real, "h22": h[1, 1].real,
            "h12_re": h[0, 1].real, "h12_im": h[0, 1].imag,
            "fiber_length": tn.fiber_length(p.m, p.R)}.items()})
    _write_csv(rows, list(rows[0]), args.out)
    _write_manifest(RunManifest.build("export", {"m": args.m, "n": args.n}, args.seed), args.out)
    return 0


# -- solve --------------------------------------------------------------------

DEFAULT_SOLVE = {
    "domain": {"lower": -1.5, "upper": 1.5, "n": 17},
    "background": {"kind": "taubnut", "m": 1.0},
    "f": {"kind": "bump", "amplitude": 0.1, "center": [0.0, 0.0, 0.0, 0.0], "radius": 1.0},
    "schedule": {"dt": 0.1, "min_dt": 1 / 1024},
    "tolerances": {"residual": 1e-8, "linear": 1e-10},
    "initial_guess": {"amplitude": 0.0, "bumps": 3},
}


def _merge(base, over):
    out = copy.deepcopy(base)
    for k, v in over.items():
        out[k] = _merge(base[k], v) if isinstance(v, dict) and isinstance(base.get(k), dict) else v
    return out


def load_solve_config(path):
    with open(path) as fh:
        return _merge(DEFAULT_SOLVE, json.load(fh))


def _source(cfg, grid, bg):
    spec = cfg["f"]
    kind = spec.get("kind", "bump")
    if kind == "zero":
        return ma.GridField(grid), None
    if kind == "bump":
        return ma.GridField.from_function(
            grid, lambda x: ma.bump(x, spec["center"], spec["radius"], spec["amplitude"])), None
    if kind == "manufactured":
        exact, f = ma.manufactured_solution(grid, bg, spec.get("amplitude", 0.05))
        return f, exact
    raise ValueError(f"unknown source kind {kind!r}")


def _initial_guess(cfg, grid, rng):
    spec = cfg["initial_guess"]
    phi = ma.GridField(grid)
    if spec["amplitude"] == 0:
        return phi
    lo, up = np.asarray(grid.lower), np.asarray(grid.upper)
    x = grid.nodes()
    for _ in range(spec["bumps"]):
        c = lo + (up - lo) * rng.uniform(0.35, 0.65, size=4)
        phi.values += ma.bump(x, c, 0.25 * float(np.min(up - lo)),
                              spec["amplitude"] * rng.uniform(-1, 1))
    return phi


def run_solve(cfg, seed=0):
    """Run the continuity method for a solver config; returns ``(record, fields)``."""
    d = cfg["domain"]
    grid = ma.Grid((d["lower"],) * 4 if np.isscalar(d["lower"]) else tuple(d["lower"]),
                   (d["upper"],) * 4 if np.isscalar(d["upper"]) else tuple(d["upper"]),
                   int(d["n"]))
    bg = ma.BackgroundKahler(cfg["background"]["kind"], cfg["background"].get("m", 1.0))
    f, exact = _source(cfg, grid, bg)
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    phi0 = _initial_guess(cfg, grid, rng)
    tol = cfg["tolerances"]
    t0 = time.perf_counter()
    state = ma.continuity_method(bg, f, dt=cfg["schedule"]["dt"], min_dt=cfg["schedule"]["min_dt"],
                                 tol=tol["residual"], lin_rtol=tol["linear"], phi0=phi0,
                                 allow_boundary_source=exact is not None)
    record = state.record()
    record["elapsed_s"] = time.perf_counter() - t0
    record["grid"] = {"n": grid.n, "h": grid.h.tolist()}
    record["newton_ratio_max"] = max(state.newton_ratios(), default=0.0)
    if state.success:
        record["trace_bound"] = ma.trace_bound(state.phi, bg, f)
    if exact is not None:
        record["error_vs_exact"] = float(np.abs(state.phi.values - exact.values).max())
    fields = {"phi": state.phi.values, "f": f.values}
    return record, fields, grid


def cmd_solve(args):
    cfg = load_solve_config(args.config) if args.config else copy.deepcopy(DEFAULT_SOLVE)
    if args.m is not None:
        cfg["background"]["m"] = args.m
    record, fields, grid = run_solve(cfg, args.seed)
    manifest = RunManifest.build("solve", cfg, args.seed)
    record["config"] = cfg
    record["manifest"] = asdict(manifest)
    text = json.dumps(record, indent=2, default=float)
    if args.out:
        Path(args.out).write_text(text + "\n")
        x = grid.nodes().reshape(-1, 4)
        rows = [{"x1": _fmt(a[0]), "x2": _fmt(a[1]), "x3": _fmt(a[2]), "x4": _fmt(a[3]),
                 "phi": _fmt(p), "f": _fmt(q)}
                for a, p, q in zip(x, fields["phi"].ravel(), fields["f"].ravel())]
        _write_csv(rows, ["x1", "x2", "x3", "x4", "phi", "f"],
                   str(Path(args.out).with_suffix("")) + "_fields.csv")
    else:
        sys.stdout.write(text + "\n")
    if not record["success"]:
        print(f"solver stopped at t = {record['last_good_t']}: {record['message']}",
              file=sys.stderr)
        return 2
    return 0


def build_parser():
    ap = argparse.ArgumentParser(prog="alflab", description=__doc__.split("\n")[0])
    ap.add_argument("--version", action="version", version=__version__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, n=100):
        p.add_argument("--m", type=float, default=1.0)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--n", type=int, default=n)
        p.add_argument("--out", default=None)

    p = sub.add_parser("verify", help="run a randomised verification suite")
    p.add_argument("suite", choices=suites.SUITES)
    p.add_argument("--k", type=int, default=2)
    common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("solve", help="solve the Monge-Ampere continuity problem")
    p.add_argument("--config", default=None)
    p.add_argument("--m", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("sweep", help="radial sweeps for log-log tables")
    p.add_argument("kind", choices=sorted(SWEEPS))
    p.add_argument("--rmin", type=float, default=None)
    p.add_argument("--rmax", type=float, default=None)
    p.add_argument("--ale", choices=("euclidean", "synthetic"), default="synthetic")
    common(p, n=12)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("export", help="dump Taub-NUT point data")
    common(p, n=200)
    p.set_defaults(func=cmd_export)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
