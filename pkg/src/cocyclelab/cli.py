"""Command line front end: ``python -m cocyclelab <command> ...``.

Commands: profile, accelerate, dominate, approx, stochastic. Option values
come from flags first, then from a JSON ``--config`` file, then from the
defaults listed in ``--help``. Exit codes: 0 success, 2 user error, 3
numeric range failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import warnings

import numpy as np

from . import cocycle as cc
from . import domination, lyapunov, stochastic
from .exceptions import RangeError

EXIT_OK, EXIT_USER, EXIT_RANGE = 0, 2, 3

DEFAULTS = {
    "family": None,
    "cocycle": None,
    "param": [],
    "freq": None,
    "n": None,
    "grid": 2048,
    "t": None,
    "t0": 0.0,
    "eps0": 0.1,
    "levels": 8,
    "side": 1,
    "k": 1,
    "rho": None,
    "budget": 64,
    "gap_tol": domination.DEFAULT_GAP_TOL,
    "count": 6,
    "seed": None,
    "study": "obstacle",
    "walks": stochastic.DEFAULT_WALKS,
    "step": stochastic.DEFAULT_STEP,
    "indices": "4,5,6,7",
    "delta": 1 / 3,
    "eps": 0.02,
    "out": None,
    "format": None,
    "threads": os.cpu_count() or 1,
}

FORMATS = {"profile": "csv", "accelerate": "json", "dominate": "json", "approx": "csv",
           "stochastic": "csv"}


class UserError(Exception):
    pass


# ---------------------------------------------------------------- parsing


def _common(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group()
    src.add_argument("--cocycle", help="cocycle spec JSON file")
    src.add_argument("--family", help=f"built-in family: {', '.join(sorted(cc.FAMILIES))}")
    p.add_argument("--param", action="append", metavar="K=V",
                   help="family parameter, repeatable; values parsed as JSON (e.g. lam=3, values=[2,1])")
    p.add_argument("--freq", help="frequency as a float or p/q (default: golden mean for families)")
    p.add_argument("--n", type=int, help="iterate length (default: approximant denominator near 1000)")
    p.add_argument("--grid", type=int, help=f"phase grid size (default {DEFAULTS['grid']})")
    p.add_argument("--config", help="JSON file of option values; flags take precedence")
    p.add_argument("--out", help="output path (default stdout)")
    p.add_argument("--format", choices=["csv", "json"], help="output format (default per command)")
    p.add_argument("--threads", type=int, help="worker threads (default: available cores)")
    p.add_argument("--seed", type=int, help="random seed (required by stochastic)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cocyclelab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("profile", help="L^k along imaginary shifts t (CSV: t,k,L_k,L^k,err)")
    _common(p)
    p.add_argument("--t", help="comma-separated t values (default: t0 and t0 +- ladder)")
    p.add_argument("--t0", type=float, help="ladder centre (default 0)")
    p.add_argument("--eps0", type=float, help="largest ladder step (default 0.1)")
    p.add_argument("--levels", type=int, help="ladder levels (default 8)")

    p = sub.add_parser("accelerate", help="one-sided accelerations at t0 (JSON)")
    _common(p)
    p.add_argument("--t0", type=float, help="base point (default 0)")
    p.add_argument("--eps0", type=float, help="largest ladder step (default 0.1)")
    p.add_argument("--levels", type=int, help="ladder levels (default 8)")
    p.add_argument("--side", type=int, choices=[-1, 1], help="ladder side (default +1)")

    p = sub.add_parser("dominate", help="Oseledets classification with certificates (JSON)")
    _common(p)
    p.add_argument("--rho", help="comma-separated rho grid (default 1/4,1/8,1/16,1/32)")
    p.add_argument("--budget", type=int, help="largest n searched (default 64)")
    p.add_argument("--gap-tol", dest="gap_tol", type=float, help="exponent gap tolerance (default 1e-3)")

    p = sub.add_parser("approx", help="rational approximant study (CSV: p,q,L_rational,L_irrational,excess)")
    _common(p)
    p.add_argument("--count", type=int, help="number of approximants (default 6)")
    p.add_argument("--k", type=int, help="exponent sum index (default 1)")
    p.add_argument("--t", help="comma-separated t values for the excess (default 0)")

    p = sub.add_parser("stochastic", help="obstacle hitting or bad-set study (CSV)")
    _common(p)
    p.add_argument("--study", choices=["obstacle", "badset"], help="which study (default obstacle)")
    p.add_argument("--rho", help="comma-separated slab thicknesses (default 0.2,0.5,1.0)")
    p.add_argument("--walks", type=int, help=f"walks per obstacle (default {DEFAULTS['walks']})")
    p.add_argument("--step", type=float, help=f"walk time step (default {DEFAULTS['step']})")
    p.add_argument("--indices", help="approximant indices for badset (default 4,5,6,7)")
    p.add_argument("--delta", type=float, help="badset depth (default 1/3)")
    p.add_argument("--eps", type=float, help="badset half-width of the t band (default 0.02)")
    return parser


def resolve(args: argparse.Namespace) -> dict:
    """Merge flags over the config file over defaults."""
    config = {}
    if getattr(args, "config", None):
        try:
            with open(args.config, encoding="utf-8") as fh:
                config = json.load(fh)
        except (OSError, ValueError) as exc:
            raise UserError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(config, dict):
            raise UserError("config file must hold a JSON object")
        config = {k.replace("-", "_"): v for k, v in config.items()}
    out = {"command": args.command}
    for key, default in DEFAULTS.items():
        val = getattr(args, key, None)
        if val is None:
            val = config.get(key, default)
        out[key] = val
    if out["format"] is None:
        out["format"] = FORMATS[args.command]
    return out


def _floats(text, what: str) -> list[float]:
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    try:
        return [float(_fraction(v)) for v in str(text).split(",") if v.strip()]
    except ValueError as exc:
        raise UserError(f"bad {what} list {text!r}") from exc


def _fraction(v: str) -> float:
    v = v.strip()
    if "/" in v:
        a, b = v.split("/")
        return float(a) / float(b)
    return float(v)


def _params(items) -> dict:
    if isinstance(items, dict):
        return dict(items)
    out = {}
    for item in items or []:
        if "=" not in item:
            raise UserError(f"--param expects K=V, got {item!r}")
        key, val = item.split("=", 1)
        try:
            out[key.strip()] = json.loads(val)
        except ValueError:
            out[key.strip()] = val
    return out


def load_source(cfg: dict) -> cc.Cocycle:
    freq = cfg["freq"]
    try:
        freq = None if freq is None else cc.Frequency.parse(freq)
    except ValueError as exc:
        raise UserError(f"bad frequency {cfg['freq']!r}") from exc
    if cfg["cocycle"]:
        try:
            c = cc.load_cocycle(cfg["cocycle"])
        except OSError as exc:
            raise UserError(f"cannot read cocycle spec: {exc}") from exc
        except ValueError as exc:
            raise UserError(f"bad cocycle spec {cfg['cocycle']}: {exc}") from exc
        return c if freq is None else c.with_frequency(freq)
    if cfg["family"]:
        try:
            return cc.family(cfg["family"], freq=freq, **_params(cfg["param"]))
        except TypeError as exc:
            raise UserError(f"bad parameters for {cfg['family']}: {exc}") from exc
    raise UserError("one of --cocycle or --family is required")


# ---------------------------------------------------------------- output


def _clean(obj):
    """JSON-safe copy: non-finite floats become strings, arrays lists."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def render_json(obj) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n"


def render_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def render(header, rows, fmt: str) -> str:
    rows = list(rows)
    if fmt == "json":
        return render_json([dict(zip(header, r)) for r in rows])
    return render_csv(header, rows)


# ---------------------------------------------------------------- commands


def _n(cfg: dict, c: cc.Cocycle) -> int:
    return int(cfg["n"]) if cfg["n"] is not None else lyapunov.default_n(c.freq)


def _ladder_ts(cfg: dict) -> list[float]:
    if cfg["t"] is not None:
        return _floats(cfg["t"], "t")
    eps = lyapunov.ladder(float(cfg["eps0"]), int(cfg["levels"]))
    t0 = float(cfg["t0"])
    return sorted({t0, *(t0 + eps), *(t0 - eps)})


def profile_rows(prof: lyapunov.LyapunovProfile):
    return prof.to_rows()


PROFILE_HEADER = ["t", "k", "L_k", "L^k", "err"]
APPROX_HEADER = ["p", "q", "L_rational", "L_irrational", "excess"]


def cmd_profile(cfg: dict) -> str:
    c = load_source(cfg)
    prof = lyapunov.profile(c, _ladder_ts(cfg), _n(cfg, c), int(cfg["grid"]),
                            workers=int(cfg["threads"]))
    return render(PROFILE_HEADER, profile_rows(prof), cfg["format"])


def cmd_accelerate(cfg: dict) -> str:
    c = load_source(cfg)
    prof = lyapunov.acceleration_profile(c, _n(cfg, c), int(cfg["grid"]), float(cfg["t0"]),
                                         float(cfg["eps0"]), int(cfg["levels"]), int(cfg["side"]),
                                         workers=int(cfg["threads"]))
    det_one = _special_linear(c)
    rep = lyapunov.acceleration(prof, float(cfg["t0"]), int(cfg["side"]), special_linear=det_one)
    return render_json(rep.to_dict())


def _special_linear(c: cc.Cocycle) -> bool:
    x = np.arange(64) / 64
    return bool(np.allclose(np.linalg.det(cc.evaluate(c.map, x)), 1.0, atol=1e-12))


def cmd_dominate(cfg: dict) -> str:
    c = load_source(cfg)
    rhos = _floats(cfg["rho"], "rho") if cfg["rho"] is not None else domination.RHO_GRID
    if any(not 0 < r <= 0.25 for r in rhos):
        raise UserError("rho values must lie in (0, 1/4]")
    res = domination.oseledets_classification(
        c, budget=int(cfg["budget"]), gap_tol=float(cfg["gap_tol"]),
        n_est=cfg["n"], M_est=int(cfg["grid"]), rhos=rhos)
    return render_json(res.to_dict())


def approx_rows(c: cc.Cocycle, k: int, count: int, ts, n: int, M: int):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        approx = cc.approximants(c.freq, count)
    irr = [lyapunov.finite_scale_exponent(c.shifted(t), k, n, M) for t in ts]
    i0 = int(np.argmin(np.abs(np.asarray(ts))))
    for i, a in enumerate(approx, start=1):
        rat = c.with_frequency(cc.Frequency.rational(a.p, a.q))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            mean = lyapunov.rational_mean_exponent(rat, k, M)
        rep = lyapunov.rational_upper_bound_check(c, k, i, ts, M=max(64, M // 8), irrational=irr)
        yield a.p, a.q, mean, irr[i0], rep.excess


def cmd_approx(cfg: dict) -> str:
    c = load_source(cfg)
    if c.freq.is_rational:
        raise UserError(f"approx needs an irrational frequency, got {c.freq}; "
                        "rational frequencies have no infinite approximant sequence")
    ts = _floats(cfg["t"], "t") if cfg["t"] is not None else [0.0]
    rows = approx_rows(c, int(cfg["k"]), int(cfg["count"]), ts, _n(cfg, c), int(cfg["grid"]))
    return render(APPROX_HEADER, rows, cfg["format"])


def cmd_stochastic(cfg: dict) -> str:
    if cfg["seed"] is None:
        raise UserError("stochastic needs --seed")
    seed = int(cfg["seed"])
    if cfg["study"] == "obstacle":
        rhos = _floats(cfg["rho"], "rho") if cfg["rho"] is not None else [0.2, 0.5, 1.0]
        try:
            specs = [stochastic.ObstacleSpec.slab(r) for r in rhos]
        except ValueError as exc:
            raise UserError(str(exc)) from exc
        study = stochastic.obstacle_scaling_study(specs, int(cfg["walks"]), float(cfg["step"]),
                                                  seed, workers=int(cfg["threads"]))
        rows = [(r, e.estimate, e.ci_low, e.ci_high, e.estimate / r if r > 0 else math.nan)
                for r, e in zip(study.rho, study.estimates)]
        return render(["rho", "estimate", "ci_low", "ci_high", "ratio"], rows, cfg["format"])
    c = load_source(cfg)
    indices = [int(v) for v in _floats(cfg["indices"], "indices")]
    n = int(cfg["n"]) if cfg["n"] is not None else 34
    reps = stochastic.bad_set_series(c, n, indices, float(cfg["delta"]), float(cfg["eps"]),
                                     x_grid=min(int(cfg["grid"]), 256))
    rows = [(r.q, r.q_prev, r.measure) for r in reps]
    return render(["q", "q_prev", "measure"], rows, cfg["format"])


COMMANDS = {
    "profile": cmd_profile,
    "accelerate": cmd_accelerate,
    "dominate": cmd_dominate,
    "approx": cmd_approx,
    "stochastic": cmd_stochastic,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve(args)
        with np.errstate(all="ignore"):
            text = COMMANDS[cfg["command"]](cfg)
    except (RangeError, OverflowError, FloatingPointError) as exc:
        print(f"error: numeric range failure: {exc}", file=sys.stderr)
        return EXIT_RANGE
    except (UserError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USER
    if cfg["out"]:
        with open(cfg["out"], "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
