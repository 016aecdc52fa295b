"""Command-line driver.

All computation lives in the core modules; the CLI only parses arguments,
moves files, and prints. Exit codes: 0 success, 1 validation/usage error,
2 I/O error. The environment variable SCATTERLAB_SEED supplies a seed when
no --seed flag is given.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import sweep as sweepmod
from .channel import channel_from_mueller
from .mueller import coherency_from_mueller
from .errors import ConfigError, ScatterLabError
from .serialize import (
    density_matrix_to_obj,
    fmt12,
    load_counts,
    load_density_matrix,
    load_mueller,
    save_counts,
    write_counts,
)
from .tomography import clip_to_physical, mle_reconstruct, monte_carlo_errors, simulate_counts
from .qstate import PlanePoint

ENV_SEED = "SCATTERLAB_SEED"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems instead of calling sys.exit(2)."""

    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _resolve_seed(flag_value, config_value=None) -> int:
    if flag_value is not None:
        return flag_value
    if config_value is not None:
        return config_value
    env = os.environ.get(ENV_SEED)
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise ConfigError(f"{ENV_SEED}={env!r} is not an integer") from exc
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="scatterlab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_sweep = sub.add_parser("sweep", help="run a seeded random scattering sweep")
    p_sweep.add_argument("--config", required=True, help="key=value or JSON config file")
    p_sweep.add_argument("--seed", type=int, default=None)
    p_sweep.add_argument("--out", default=None, help="output CSV (overrides config)")

    p_curve = sub.add_parser("curve", help="emit a boundary curve as CSV")
    p_curve.add_argument("--kind", required=True, choices=["werner", "mems"])
    p_curve.add_argument("--samples", type=int, required=True)
    p_curve.add_argument("--out", default=None, help="output CSV (default: stdout)")

    p_dec = sub.add_parser("decompose", help="Kraus pairs of a Mueller matrix CSV")
    p_dec.add_argument("--mueller", required=True, help="4x4 CSV, row-major, no header")
    p_dec.add_argument("--json", action="store_true", help="machine-readable output")

    p_tomo = sub.add_parser("tomo", help="tomography subcommands")
    tomo_sub = p_tomo.add_subparsers(dest="tomo_command", required=True)

    p_sim = tomo_sub.add_parser("simulate", help="simulate coincidence counts")
    p_sim.add_argument("--state", required=True, help="density-matrix JSON file")
    p_sim.add_argument("--counts-per-setting", type=float, required=True)
    p_sim.add_argument("--poisson", action="store_true")
    p_sim.add_argument("--seed", type=int, default=None)
    p_sim.add_argument("--out", default=None, help="counts CSV (default: stdout)")

    p_rec = tomo_sub.add_parser("reconstruct", help="maximum-likelihood reconstruction")
    p_rec.add_argument("--counts", required=True, help="setting,count CSV")
    p_rec.add_argument("--out", default=None, help="result JSON (default: stdout)")

    p_err = tomo_sub.add_parser("errors", help="Monte Carlo error bars")
    p_err.add_argument("--counts", required=True, help="setting,count CSV")
    p_err.add_argument("--trials", type=int, default=1000)
    p_err.add_argument("--seed", type=int, default=None)
    p_err.add_argument("--out", default=None, help="result JSON (default: stdout)")

    p_serve = sub.add_parser("serve", help="run the HTTP service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)

    return parser


def _write_or_print(text: str, out) -> None:
    if out is None:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        with open(out, "w") as fh:
            fh.write(text)
            if not text.endswith("\n"):
                fh.write("\n")


def _cmd_sweep(args) -> int:
    cfg = sweepmod.config_from_file(args.config)
    cfg.seed = _resolve_seed(args.seed, cfg.seed)
    out = args.out or cfg.out
    if out is None:
        raise ConfigError("out: no output path (use --out or the config 'out' key)")
    records = sweepmod.run_sweep(cfg)
    sweepmod.emit_csv(records, out)
    print(f"wrote {len(records)} records to {out}")
    return 0


def _cmd_curve(args) -> int:
    if args.out is None:
        sweepmod.write_curve(args.kind, args.samples, sys.stdout)
    else:
        sweepmod.emit_curves(args.kind, args.samples, args.out)
    return 0


def _cmd_decompose(args) -> int:
    m = load_mueller(args.mueller)
    ch = channel_from_mueller(m)
    ks = ch.kraus
    spectrum = sorted(np.linalg.eigvalsh(coherency_from_mueller(m)), reverse=True)
    if args.json:
        obj = {
            "coherency_eigenvalues": [float(w) for w in spectrum],
            "weights": [float(w) for w in ks.weights],
            "jones": [
                [[[float(z.real) + 0.0, float(z.imag) + 0.0] for z in row] for row in t]
                for t in ks.jones
            ],
            "trace_preserving": ch.trace_preserving,
        }
        print(json.dumps(obj, indent=2))
        return 0
    print("coherency_eigenvalues = " + "  ".join(fmt12(float(w) + 0.0) for w in spectrum))
    for mu, (w, t) in enumerate(zip(ks.weights, ks.jones)):
        print(f"lambda_{mu} = {fmt12(float(w))}")
        for row in t:
            cells = "  ".join(
                f"{fmt12(z.real + 0.0)}{z.imag + 0.0:+.12g}j" for z in row
            )
            print(f"    [{cells}]")
    print(f"trace_preserving = {str(ch.trace_preserving).lower()}")
    return 0


def _cmd_tomo_simulate(args) -> int:
    rho = load_density_matrix(args.state)
    noise = "poisson" if args.poisson else "none"
    seed = _resolve_seed(args.seed) if args.poisson else None
    counts = simulate_counts(rho, args.counts_per_setting, noise=noise, seed=seed)
    if args.out is None:
        write_counts(counts, sys.stdout)
    else:
        save_counts(counts, args.out)
    return 0


def _cmd_tomo_reconstruct(args) -> int:
    counts = load_counts(args.counts)
    result = mle_reconstruct(counts)
    obj = density_matrix_to_obj(result.rho)
    obj["convergence"] = {
        "converged": result.converged,
        "objective": result.objective,
        "iterations": result.iterations,
        "grad_norm": result.grad_norm,
    }
    _write_or_print(json.dumps(obj, indent=2), args.out)
    return 0


def _cmd_tomo_errors(args) -> int:
    counts = load_counts(args.counts)
    res = monte_carlo_errors(counts, trials=args.trials, seed=_resolve_seed(args.seed))
    clipped = clip_to_physical(
        PlanePoint(s_l=res.sl_exp, t=res.t_exp, sigma_sl=res.sigma_sl, sigma_t=res.sigma_t)
    )
    obj = {
        "t_exp": res.t_exp,
        "sl_exp": res.sl_exp,
        "t_av": res.t_av,
        "sl_av": res.sl_av,
        "sigma_t": res.sigma_t,
        "sigma_sl": res.sigma_sl,
        "trials": res.trials,
        "dropped": res.dropped,
        "warning": res.warning,
        "clipped": {
            "sl_lo": clipped.sl_lo,
            "sl_hi": clipped.sl_hi,
            "t_lo": clipped.t_lo,
            "t_hi": clipped.t_hi,
        },
    }
    _write_or_print(json.dumps(obj, indent=2), args.out)
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service.app import app

    uvicorn.run(app, host=args.host, port=args.port)
    return 0


_HANDLERS = {
    "sweep": _cmd_sweep,
    "curve": _cmd_curve,
    "decompose": _cmd_decompose,
    "serve": _cmd_serve,
}

_TOMO_HANDLERS = {
    "simulate": _cmd_tomo_simulate,
    "reconstruct": _cmd_tomo_reconstruct,
    "errors": _cmd_tomo_errors,
}


def cli_dispatch(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "tomo":
            return _TOMO_HANDLERS[args.tomo_command](args)
        return _HANDLERS[args.command](args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except ScatterLabError as exc:
        print(f"scatterlab: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"scatterlab: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(cli_dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
