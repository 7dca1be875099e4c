"""Command line interface.

Subcommands: build, spectrum, numrange, gapsweep, fermion-scan.
Exit codes: 0 success, 2 usage or precondition failure, 3 numerical failure.
Errors are reported as a JSON object on stderr. Arguments are validated
before numpy/scipy are imported and before any file is written.
"""
import argparse
import csv
import io
import json
import math
import os
import sys

from .errors import GapwitError, NumericalError, PreconditionError

EXACT_MAX_SITES = 16
OPERATOR_NAMES = ("sigma_x", "sigma_y", "sigma_z")


class UsageError(PreconditionError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _fmt(x):
    if isinstance(x, bool):
        return str(int(x))
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _json_default(x):
    try:
        import numpy as np

        if isinstance(x, np.generic):
            return x.item()
        if isinstance(x, np.ndarray):
            return x.tolist()
    except ImportError:
        pass
    raise TypeError(f"not serializable: {type(x).__name__}")


def _clean(obj):
    """Replace non-finite floats by None so the JSON stays standard."""
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def _dumps(obj):
    return json.dumps(_clean(json.loads(json.dumps(obj, default=_json_default))), indent=2) + "\n"


def _csv_text(columns, rows, config):
    buf = io.StringIO()
    buf.write("# config: " + json.dumps(config, sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r[c]) for c in columns])
    return buf.getvalue()


def _write_outputs(files):
    """Write all outputs at the end, so failures leave no partial files."""
    for path, text in files:
        d = os.path.dirname(path)
        if d:
            os.makedirs(d, exist_ok=True)
        with open(path, "w") as fh:
            fh.write(text)


# ---------------------------------------------------------------------------
# argument parsing


def _add_model(p):
    g = p.add_argument_group("model")
    g.add_argument("--model", choices=["xy"], help="built-in spin-chain model")
    g.add_argument("--N", type=int, help="number of bulk sites")
    g.add_argument("--m", type=int, default=0, help="taper length on each end")
    g.add_argument("--gamma", type=float, default=0.0, help="XY anisotropy")
    g.add_argument("--op", help="PauliSum JSON file used instead of --model")


def build_parser():
    fmt = argparse.ArgumentDefaultsHelpFormatter
    p = _Parser(prog="gapwit", description=__doc__.splitlines()[0], formatter_class=fmt)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    b = sub.add_parser("build", help="dump a Hamiltonian as PauliSum JSON", formatter_class=fmt)
    b.add_argument("--model", choices=["xy", "witness"], required=True)
    b.add_argument("--N", type=int, required=True)
    b.add_argument("--m", type=int, default=0)
    b.add_argument("--gamma", type=float, default=0.0)
    b.add_argument("--out", help="output file (default: stdout)")

    s = sub.add_parser("spectrum", help="ground energy and gap", formatter_class=fmt)
    _add_model(s)
    s.add_argument("--method", choices=["auto", "dense", "lanczos"], default="auto")
    s.add_argument("--degeneracy-tol", type=float, default=None,
                   help="absolute degeneracy tolerance (default 1e-8 x spectral range)")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", help="output prefix; writes PREFIX.json")

    n = sub.add_parser("numrange", help="joint numerical range boundary and cusps", formatter_class=fmt)
    _add_model(n)
    n.add_argument("--A", help=f"first operator: one of {OPERATOR_NAMES} or a PauliSum JSON file")
    n.add_argument("--B", help="second operator, as --A")
    n.add_argument("--angles", type=int, default=360, help="uniform support directions")
    n.add_argument("--no-adaptive", action="store_true", help="disable chord refinement")
    n.add_argument("--angle-min", type=float, default=None, help="minimum cusp cone width (default 3 x 2pi/angles)")
    n.add_argument("--point-tol", type=float, default=None, help="cusp stationarity tolerance (default 1e-8 x scale)")
    n.add_argument("--degeneracy-tol", type=float, default=None)
    n.add_argument("--out", default="numrange", help="output prefix")

    g = sub.add_parser("gapsweep", help="witness sweep of H + tV", formatter_class=fmt)
    _add_model(g)
    g.add_argument("--witness", choices=["model", "trivial", "random"], default="model",
                   help="model: three-spin witness; trivial: H0^2-H0; random: H0 Z H0")
    g.add_argument("--backend", choices=["exact", "fermion"], default="exact")
    g.add_argument("--t-max", type=float, default=2.0)
    g.add_argument("--n-grid", type=int, default=201)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--overlap-tol", type=float, default=1e-10)
    g.add_argument("--crossing-overlap", type=float, default=0.5)
    g.add_argument("--resolution", type=float, default=1e-8, help="bisection resolution / t_max")
    g.add_argument("--delta", type=float, default=1e-6, help="jump offset / t_max")
    g.add_argument("--residual-tol", type=float, default=1e-8)
    g.add_argument("--out", default="gapsweep", help="output prefix")

    f = sub.add_parser("fermion-scan", help="dispersion scan over (N, gamma, t)", formatter_class=fmt)
    f.add_argument("--N", type=int, nargs="+", required=True)
    f.add_argument("--gamma", type=float, nargs="+", required=True)
    f.add_argument("--t", type=float, nargs="+", default=[0.0])
    f.add_argument("--out", default="fermion_scan", help="output prefix")
    return p


def _require(cond, msg):
    if not cond:
        raise PreconditionError(msg)


def _finite(name, x):
    _require(x is None or math.isfinite(x), f"{name} must be finite")


def validate(args):
    """Check every precondition that does not need numerics; return the config."""
    cfg = {k: v for k, v in vars(args).items()}
    cmd = args.command
    for k, v in cfg.items():
        if isinstance(v, float):
            _finite(k, v)
    if cmd == "fermion-scan":
        _require(all(n >= 2 for n in args.N), "N must be >= 2")
        for x in args.gamma + args.t:
            _finite("gamma/t", x)
        return cfg
    if cmd == "build":
        _require(args.N >= (3 if args.model == "witness" else 2),
                 f"N must be >= {3 if args.model == 'witness' else 2} for model {args.model}")
        _require(args.m >= 0, "m must be >= 0")
        return cfg
    explicit = cmd == "numrange" and (args.A or args.B)
    if explicit:
        _require(args.A and args.B, "--A and --B must be given together")
        _require(args.model is None and args.op is None, "--A/--B exclude --model/--op")
    elif args.op:
        _require(args.model is None, "--op excludes --model")
        _require(os.path.isfile(args.op), f"operator file not found: {args.op}")
    else:
        _require(args.model is not None, "one of --model or --op is required")
        _require(args.N is not None, "--N is required with --model")
        need = 3 if cmd in ("numrange", "gapsweep") else 2
        _require(args.N >= need, f"N must be >= {need}, got {args.N}")
        _require(args.m >= 0, f"m must be >= 0, got {args.m}")
    if cmd == "numrange":
        _require(args.angles >= 3, "angles must be >= 3")
        if explicit:
            for x in (args.A, args.B):
                _require(x in OPERATOR_NAMES or os.path.isfile(x), f"unknown operator {x!r}")
    if cmd == "gapsweep":
        _require(args.t_max > 0, "t-max must be positive")
        _require(args.n_grid >= 8, "n-grid must be >= 8")
        _require(0 < args.crossing_overlap < 1, "crossing-overlap must lie in (0, 1)")
        _require(args.resolution > 0 and args.delta > 0, "resolution and delta must be positive")
        if args.model:
            sites = args.N + 2 * args.m
            if args.backend == "exact":
                _require(sites <= EXACT_MAX_SITES, f"exact backend supports at most {EXACT_MAX_SITES} sites, got {sites}")
            else:
                _require(args.witness == "model", "fermion backend needs the (quadratic) model witness")
        else:
            _require(args.backend == "exact", "fermion backend needs --model")
        if args.op:
            _require(args.witness != "model", "--op needs --witness trivial or random")
    return cfg


# ---------------------------------------------------------------------------
# commands


def _load_sum(path):
    from .pauli import PauliSum

    with open(path) as fh:
        return PauliSum.from_json(fh.read())


def _model_pair(args):
    from .pauli import build_tapered

    return build_tapered(args.N, args.m, args.gamma)


def _hamiltonian(args):
    if args.op:
        return _load_sum(args.op)
    return _model_pair(args)[0] if args.m else _build_xy(args)


def _build_xy(args):
    from .pauli import build_xy

    return build_xy(args.N, args.gamma)


def cmd_build(args, cfg):
    from .pauli import build_tapered

    if args.model == "xy":
        op = build_tapered(args.N, args.m, args.gamma)[0] if args.m else _build_xy(args)
    else:
        op = build_tapered(args.N, args.m, args.gamma)[1]
    text = op.to_json() + "\n"
    if args.out:
        return [(args.out, text)], None
    return [], text


def cmd_spectrum(args, cfg):
    from .pauli import to_matrix
    from .spectra import gap_report

    rep = gap_report(to_matrix(_hamiltonian(args)), args.degeneracy_tol, method=args.method, seed=args.seed)
    out = {"config": cfg, **rep.to_dict()}
    text = _dumps(out)
    return ([(args.out + ".json", text)] if args.out else []), text


def cmd_numrange(args, cfg):
    from .gapwitness import n_threads
    from .numrange import BOUNDARY_COLUMNS, detect_cusps, sample_boundary
    from .pauli import named_operator, to_matrix

    if args.A:
        A, B = (named_operator(x) if x in OPERATOR_NAMES else _load_sum(x) for x in (args.A, args.B))
    elif args.op:
        raise PreconditionError("numrange takes --model or --A/--B")
    else:
        H, V = _model_pair(args)
        A, B = V, H
    A, B = to_matrix(A), to_matrix(B)
    bd = sample_boundary(A, B, args.angles, not args.no_adaptive, degeneracy_tol=args.degeneracy_tol,
                         threads=n_threads())
    cusps = detect_cusps(bd, args.angle_min, args.point_tol)
    summary = {
        "config": cfg,
        "n_samples": len(bd),
        "convex": bd.is_convex(),
        "convexity_defect": bd.convexity_defect(),
        "scale": bd.scale,
        "cusps": [
            {"point": list(c.point), "normal_cone": list(c.normal_cone), "width": c.width, "facet_count": c.facet_count}
            for c in cusps
        ],
    }
    files = [
        (args.out + ".csv", _csv_text(BOUNDARY_COLUMNS, bd.csv_rows(), cfg)),
        (args.out + ".json", _dumps(summary)),
    ]
    return files, _dumps({k: summary[k] for k in ("n_samples", "convex", "cusps")})


def cmd_gapsweep(args, cfg):
    from .gapwitness import SWEEP_COLUMNS, WitnessSpec, gap_upper_bound, sweep
    from .pauli import to_matrix

    if args.model:
        H, V = _model_pair(args)
    else:
        H, V = _load_sum(args.op), None
    if args.witness != "model":
        kind = "trivial_h2_minus_h" if args.witness == "trivial" else "random_hzh"
        H = to_matrix(H)
        V = WitnessSpec(kind, args.seed).build(H)
    res = sweep(H, V, args.t_max, args.n_grid, backend=args.backend, overlap_tol=args.overlap_tol,
                crossing_overlap=args.crossing_overlap, resolution=args.resolution, delta=args.delta,
                residual_tol=args.residual_tol, seed=args.seed)
    summary = {"config": cfg, **res.summary(), "bound": gap_upper_bound(res), "max_step": res.max_step()}
    files = [
        (args.out + ".csv", _csv_text(SWEEP_COLUMNS, res.csv_rows(), cfg)),
        (args.out + ".json", _dumps(summary)),
    ]
    short = {k: summary[k] for k in ("t_star", "epsilon", "assumptions_ok", "certified")}
    return files, _dumps(short)


def cmd_fermion_scan(args, cfg):
    from .freefermion import SCAN_COLUMNS, dispersion_row

    rows = [dispersion_row(N, g, t) for N in args.N for g in args.gamma for t in args.t]
    return [(args.out + ".csv", _csv_text(SCAN_COLUMNS, rows, cfg))], f"{len(rows)} rows -> {args.out}.csv\n"


COMMANDS = {
    "build": cmd_build,
    "spectrum": cmd_spectrum,
    "numrange": cmd_numrange,
    "gapsweep": cmd_gapsweep,
    "fermion-scan": cmd_fermion_scan,
}


def _fail(exc, code):
    err = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    best = getattr(exc, "best_residual", None)
    if best is not None:
        err["best_residual"] = best
    sys.stderr.write(json.dumps(_clean(err)) + "\n")
    return code


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = validate(args)
        files, text = COMMANDS[args.command](args, cfg)
        _write_outputs(files)
    except PreconditionError as exc:
        return _fail(exc, 2)
    except NumericalError as exc:
        return _fail(exc, 3)
    except GapwitError as exc:  # pragma: no cover - every error is one of the above
        return _fail(exc, 3)
    if text:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
