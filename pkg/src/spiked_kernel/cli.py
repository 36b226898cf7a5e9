"""Command-line front end: params | verify | eval | solve | bench.

Exit codes: 0 success (all checks pass), 1 verification failure,
2 usage or domain error.  CSV floats use repr (shortest round-trip form).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time

import numpy as np

from .checks import run_verify
from .config import RunConfig, load_config, parse_grid
from .kernel import kernel_diag, kernel_eval
from .oscillator import energies, make_params, psi_record
from .series import (
    SpectrumCollisionError,
    resolvent_kernel_sum,
    spectral_kernel_grid,
)
from .solver import make_grid, solve_on_grid, source_from_spec

__all__ = ["main", "build_parser", "HEADERS"]

HEADERS = {
    "params": ["A", "gamma", "nu", "a"] + [f"E{n}" for n in range(10)],
    "verify": ["check", "passed", "value", "threshold", "detail"],
    "kernel": ["x", "y", "value", "mantissa", "log_scale"],
    "diag": ["x", "value"],
    "psi": ["n", "x", "value", "log_abs", "sign", "underflow"],
    "resolvent": ["lambda", "x", "y", "value", "n_terms", "tail_bound", "converged"],
    "series": ["x", "y", "value", "closed_form", "abs_error", "n_terms", "tail_bound", "converged", "partial_sum", "majorant_bound"],
    "solve": ["x", "f", "u", "residual"],
    "bench": [
        "tolerance", "x", "y", "n_terms", "converged", "abs_error",
        "series_seconds", "closed_seconds", "plain_terms_estimate",
    ],
}

_SOLVE_SUMMARY = ["source", "residual_sup", "sup_ratio", "bound", "bound_ok", "step"]


class UsageError(Exception):
    pass


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (np.integer,)):
        return str(int(v))
    return str(v)


def _json_safe(v):
    if isinstance(v, dict):
        return {k: _json_safe(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_json_safe(x) for x in v]
    if isinstance(v, (np.bool_,)):
        return bool(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        # JSON has no inf/nan literals
        return v if math.isfinite(v) else repr(v)
    return v


def render(kind: str, rows: list, cfg: RunConfig, summary: dict | None = None, comments: list | None = None) -> str:
    header = HEADERS[kind]
    if cfg.output_format == "json":
        doc = {"command": kind, "config": cfg.to_dict(), "columns": header, "rows": [dict(zip(header, r)) for r in rows]}
        if summary is not None:
            doc["summary"] = summary
        return json.dumps(_json_safe(doc), indent=2) + "\n"
    buf = io.StringIO()
    for line in comments or []:
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_params(cfg: RunConfig, args) -> tuple:
    p = make_params(cfg.A)
    row = [p.A, p.gamma, p.nu, p.a] + list(energies(p, 10))
    return "params", [row], None, None, 0


def cmd_verify(cfg: RunConfig, args) -> tuple:
    results = run_verify(cfg)
    rows = [[r.name, r.passed, r.value, r.threshold, r.detail] for r in results]
    ok = all(r.passed for r in results)
    summary = {"all_passed": ok, "failed": [r.name for r in results if not r.passed]}
    comments = [f"all_passed={_fmt(ok)}"]
    return "verify", rows, summary, comments, 0 if ok else 1


def _points(args, cfg, name):
    val = getattr(args, name, None)
    if val is not None:
        return [float(t) for t in val.split(",")]
    return list(make_grid(cfg.grid.spec()))


def cmd_eval(cfg: RunConfig, args) -> tuple:
    p = make_params(cfg.A)
    mode = args.mode
    xs = _points(args, cfg, "x")
    rows = []
    if mode == "diag":
        rows = [[x, kernel_diag(p, x)] for x in xs]
    elif mode == "psi":
        if args.n is None:
            raise UsageError("eval --mode psi needs --n")
        for x in xs:
            r = psi_record(p, args.n, x)
            rows.append([r.n, r.x, r.value, r.log_abs, r.sign, r.underflow])
    elif mode in ("kernel", "resolvent", "series"):
        ys = _points(args, cfg, "y") if args.y is not None else xs
        if mode == "kernel":
            for x in xs:
                for y in ys:
                    k = kernel_eval(p, x, y)
                    rows.append([x, y, k.value, k.mantissa, k.log_scale])
        elif mode == "resolvent":
            if args.lam is None:
                raise UsageError("eval --mode resolvent needs --lam")
            for x in xs:
                for y in ys:
                    r = resolvent_kernel_sum(p, args.lam, x, y, cfg.max_terms, cfg.tolerance)
                    rows.append([args.lam, x, y, r.value, r.n_terms, r.tail_bound, r.converged])
        else:
            reps = spectral_kernel_grid(p, xs, ys, cfg.tolerance, cfg.max_terms)
            for i, x in enumerate(xs):
                for j, y in enumerate(ys):
                    r = reps[i][j]
                    k = kernel_eval(p, x, y).value
                    rows.append([x, y, r.value, k, abs(r.value - k), r.n_terms, r.tail_bound, r.converged, r.partial_sum, r.majorant_bound])
    else:
        raise UsageError(f"unknown mode {mode!r}")
    return mode, rows, None, None, 0


def cmd_solve(cfg: RunConfig, args) -> tuple:
    if not args.f:
        raise UsageError("solve needs --f (exp-decay, gaussian, bump, constant[:c], psi:n, csv:PATH)")
    p = make_params(cfg.A)
    f = source_from_spec(args.f, p)
    spec = cfg.grid.spec()
    if spec.x_min <= 0:
        raise UsageError("solve grid must start above 0")
    res = solve_on_grid(p, f, spec)
    rows = [[x, fx, u, r] for x, fx, u, r in zip(res.grid, res.f, res.u, res.residual)]
    summary = {
        "source": res.source,
        "residual_sup": res.residual_sup,
        "sup_ratio": res.sup_ratio,
        "bound": res.bound,
        "bound_ok": res.bound_ok,
        "step": res.step,
    }
    comments = [f"{k}={_fmt(summary[k])}" for k in _SOLVE_SUMMARY]
    return "solve", rows, summary, comments, 0


def cmd_bench(cfg: RunConfig, args) -> tuple:
    """Terms and time for the spectral sum against one closed-form evaluation."""
    p = make_params(cfg.A)
    xs = list(make_grid(cfg.grid.spec()))
    tols = sorted({1e-4, 1e-5, 1e-6, cfg.tolerance}, reverse=True)
    rows = []
    for tol in tols:
        for x in xs:
            t0 = time.perf_counter()
            r = spectral_kernel_grid(p, [x], [x], tol, cfg.max_terms)[0][0]
            t1 = time.perf_counter()
            k = kernel_eval(p, x, x).value
            t2 = time.perf_counter()
            # plain partial sums leave a remainder ~ N^-1/2 on the diagonal
            plain = r.n_terms * (r.majorant_bound / tol) ** 2 if r.majorant_bound > tol else r.n_terms
            rows.append([tol, x, x, r.n_terms, r.converged, abs(r.value - k), t1 - t0, t2 - t1, float(plain)])
    return "bench", rows, None, None, 0


COMMANDS = {"params": cmd_params, "verify": cmd_verify, "eval": cmd_eval, "solve": cmd_solve, "bench": cmd_bench}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--A", type=float, help="coupling A > 0 (default 0.75)")
    common.add_argument("--tol", type=float, dest="tolerance", help="series tolerance (default 1e-6)")
    common.add_argument("--max-terms", type=int, dest="max_terms", help="series truncation cap (default 20000)")
    common.add_argument("--grid", help="min:max:count[:log]")
    common.add_argument("--format", choices=("csv", "json"), dest="output_format")
    common.add_argument("--out", help="write output to this path instead of stdout")
    common.add_argument("--config", help="JSON file with RunConfig keys; flags override it")
    common.add_argument("--seed", type=int, help="seed for randomized sample points")

    parser = argparse.ArgumentParser(prog="spiked-kernel", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("params", parents=[common], help="gamma, nu, a and E_0..E_9")
    sub.add_parser("verify", parents=[common], help="run the verification suite")
    ev = sub.add_parser("eval", parents=[common], help="tabulate kernel, diag, psi, resolvent or series")
    ev.add_argument("--mode", required=True, choices=("kernel", "diag", "psi", "resolvent", "series"))
    ev.add_argument("--x", help="comma-separated x values (default: the grid)")
    ev.add_argument("--y", help="comma-separated y values (default: same as x)")
    ev.add_argument("--n", type=int, help="eigenfunction index for --mode psi")
    ev.add_argument("--lam", type=float, help="spectral parameter for --mode resolvent")
    so = sub.add_parser("solve", parents=[common], help="u = H0^-1 f on the grid")
    so.add_argument("--f", help="source: exp-decay | gaussian | bump | constant[:c] | psi:n | csv:PATH")
    sub.add_parser("bench", parents=[common], help="series vs closed-form cost")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        grid = parse_grid(args.grid) if args.grid else None
        cfg = load_config(
            args.config,
            A=args.A,
            tolerance=args.tolerance,
            max_terms=args.max_terms,
            grid=grid,
            output_format=args.output_format,
            seed=args.seed,
        )
        make_params(cfg.A)
        kind, rows, summary, comments, code = COMMANDS[args.command](cfg, args)
    except (UsageError, ValueError, OSError, SpectrumCollisionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    text = render(kind, rows, cfg, summary, comments)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
