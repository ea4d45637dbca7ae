"""Command-line surface.

Subcommands:
    attack        one perturbation for one input; tensors + JSON report
    bench         batch attack vs uniform-noise baseline; CSV + summary
    eig           eigensolver diagnostics on an oracle JVP operator
    oracle-check  handshake, determinism probe, shape echo, timing

Exit codes: 0 success, 1 error, 2 finished-but-unconverged (attack).
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .attack import (
    AttackConfig,
    apply_perturbation,
    default_delta,
    generate,
    uniform_baseline,
)
from .errors import PenetraError
from .jvp import JvpOperator
from .eigensolver import EigConfig, solve_largest_magnitude
from .linalg import l2_norm
from .metrics import dice, mean_variance, ssim
from .oracle import parse_oracle_spec
from .pgm import write_pgm
from .rng import derive_seed
from .tensorio import read_tensor, write_tensor

BENCH_COLUMNS = [
    "input_id",
    "method",
    "mode_index",
    "tol",
    "eigenvalue",
    "ssim",
    "dice",
    "oracle_evals",
    "restarts",
    "converged",
    "wall_time_ms",
    "note",
]


class _Parser(argparse.ArgumentParser):
    # The harness contract is exit 1 on usage errors, not argparse's 2.
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _parse_clamp(text):
    if not text:
        return None
    lo, _, hi = text.partition(":")
    try:
        return (float(lo), float(hi))
    except ValueError as exc:
        raise PenetraError(f"bad --clamp {text!r}, want lo:hi") from exc


def _parse_delta(text):
    if text is None or text == "auto":
        return None
    return float(text)


def _add_solver_flags(p):
    p.add_argument("--epsilon", type=float, default=1e-4, help="FD step (default 1e-4)")
    p.add_argument("--delta", default="auto", help="perturbation scale, number or 'auto' (2e-3 * n)")
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--itmax", type=int, default=100)
    p.add_argument("--ncv", type=int, default=None)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--mode-index", type=int, default=1)
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--sym", dest="mode", action="store_const", const="symmetric")
    mode.add_argument("--nonsym", dest="mode", action="store_const", const="nonsymmetric")
    p.set_defaults(mode="symmetric")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--clamp", default=None, help="pixel range lo:hi (default off)")


def build_parser():
    parser = _Parser(prog="penetra")
    sub = parser.add_subparsers(dest="command", required=True)

    p_attack = sub.add_parser("attack", help="generate one perturbation")
    p_attack.add_argument("--oracle", required=True)
    p_attack.add_argument("--input", required=True)
    p_attack.add_argument("--out-dir", required=True)
    p_attack.add_argument("--pgm", action="store_true", help="also export perturbation.pgm")
    _add_solver_flags(p_attack)

    p_bench = sub.add_parser("bench", help="batch attack + uniform baseline")
    p_bench.add_argument("--oracle", required=True)
    p_bench.add_argument("--inputs", required=True, help="directory of PTNSR01 tensors")
    p_bench.add_argument("--out-dir", required=True)
    p_bench.add_argument("--methods", default="penetrative,uniform")
    p_bench.add_argument("--ssim-range", type=float, default=1.0)
    p_bench.add_argument("--workers", type=int, default=1)
    _add_solver_flags(p_bench)

    p_eig = sub.add_parser("eig", help="eigensolver diagnostics")
    p_eig.add_argument("--oracle", required=True)
    p_eig.add_argument("--input", default=None, help="base point tensor (default zeros)")
    _add_solver_flags(p_eig)

    p_check = sub.add_parser("oracle-check", help="handshake and probe an oracle")
    p_check.add_argument("--oracle", required=True)
    p_check.add_argument("--expect-input", default=None, help="shape like 3,32,32")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = {
        "attack": cmd_attack,
        "bench": cmd_bench,
        "eig": cmd_eig,
        "oracle-check": cmd_oracle_check,
    }[args.command]
    try:
        return handler(args)
    except PenetraError as exc:
        print(f"penetra {args.command}: {exc}", file=sys.stderr)
        return 1


def _attack_config(args) -> AttackConfig:
    return AttackConfig(
        epsilon=args.epsilon,
        delta=_parse_delta(args.delta),
        tol=args.tol,
        itmax=args.itmax,
        ncv=args.ncv,
        k=args.k,
        mode_index=args.mode_index,
        clamp=_parse_clamp(args.clamp),
        seed=args.seed,
        solver_mode=args.mode,
    )


def cmd_attack(args) -> int:
    x = read_tensor(args.input)
    cfg = _attack_config(args)
    with parse_oracle_spec(args.oracle, expect_input_shape=x.shape) as oracle:
        result = generate(oracle, x, cfg)
        adversarial_output = oracle.eval(result.adversarial_input)
        queries = oracle.counter.total_evals
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_tensor(out / "perturbation.ptnsr", result.perturbation)
    write_tensor(out / "adversarial_input.ptnsr", result.adversarial_input)
    write_tensor(out / "adversarial_output.ptnsr", adversarial_output)
    if args.pgm:
        h, w = _operator_grid(oracle)
        write_pgm(out / "perturbation.pgm", result.perturbation.reshape(h, w))
    pair = result.eigenpairs.pairs[result.mode_index - 1]
    report = {
        "eigenvalue": pair.value,
        "residual": pair.residual,
        "queries": queries,
        "converged": result.eigenpairs.converged,
        "matvecs": result.eigenpairs.matvecs,
        "restarts": result.eigenpairs.restarts_used,
        "delta": result.delta,
        "config": {
            "oracle": args.oracle,
            "input": args.input,
            "epsilon": cfg.epsilon,
            "tol": cfg.tol,
            "itmax": cfg.itmax,
            "k": cfg.k,
            "mode_index": cfg.mode_index,
            "seed": cfg.seed,
            "solver_mode": cfg.solver_mode,
            "clamp": list(cfg.clamp) if cfg.clamp else None,
        },
    }
    (out / "report.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    return 0 if result.eigenpairs.converged else 2


def _operator_grid(oracle):
    shape = oracle.info.input_shape
    if len(shape) == 3:
        return shape[1], shape[2]
    n = int(np.prod(shape))
    side = int(np.sqrt(n))
    if side * side == n:
        return side, side
    return 1, n


def _bench_one(args, path: Path, methods):
    """All bench rows for one input file; runs inside a worker."""
    input_id = path.stem
    seed_i = derive_seed(args.seed, input_id)
    cfg = _attack_config(args)
    cfg.seed = seed_i
    rows = []
    with parse_oracle_spec(args.oracle) as oracle:
        x = read_tensor(path)
        evals_start = oracle.counter.total_evals
        clean_pred = oracle.eval(x)
        pending_evals = oracle.counter.total_evals - evals_start  # clean eval
        pen_magnitude = None

        if "penetrative" in methods:
            t0 = time.perf_counter()
            result = generate(oracle, x, cfg)
            solve_ms = (time.perf_counter() - t0) * 1000.0
            pending_evals += result.oracle_evals_total
            for m in range(1, cfg.k + 1):
                t1 = time.perf_counter()
                pair = result.eigenpairs.pairs[m - 1]
                adv = apply_perturbation(x, pair.vector, result.delta, oracle, cfg.clamp)
                before = oracle.counter.total_evals
                adv_pred = oracle.eval(adv)
                row_evals = oracle.counter.total_evals - before + pending_evals
                pending_evals = 0
                wall = (time.perf_counter() - t1) * 1000.0 + (solve_ms if m == 1 else 0.0)
                rows.append(
                    {
                        "input_id": input_id,
                        "method": "penetrative",
                        "mode_index": m,
                        "tol": cfg.tol,
                        "eigenvalue": pair.value,
                        "ssim": ssim(x, adv, args.ssim_range),
                        "dice": dice(clean_pred, adv_pred),
                        "oracle_evals": row_evals,
                        "restarts": result.eigenpairs.restarts_used,
                        "converged": result.eigenpairs.converged,
                        "wall_time_ms": wall,
                        "note": "",
                    }
                )
                if m == 1:
                    pen_magnitude = l2_norm(adv - x)

        if "uniform" in methods:
            t1 = time.perf_counter()
            if pen_magnitude is None or pen_magnitude == 0.0:
                delta = cfg.delta if cfg.delta is not None else default_delta(oracle)
                channels = (
                    oracle.info.input_shape[0] if len(oracle.info.input_shape) == 3 else 1
                )
                n_in = int(np.prod(oracle.info.input_shape))
                n_op = int(np.prod(oracle.info.output_shape))
                pen_magnitude = delta * np.sqrt(channels) if n_in != n_op else delta
            adv = uniform_baseline(x, pen_magnitude, derive_seed(seed_i, "uniform"))
            if cfg.clamp is not None:
                adv = np.clip(adv, cfg.clamp[0], cfg.clamp[1])
            before = oracle.counter.total_evals
            adv_pred = oracle.eval(adv)
            row_evals = oracle.counter.total_evals - before + pending_evals
            pending_evals = 0
            rows.append(
                {
                    "input_id": input_id,
                    "method": "uniform",
                    "mode_index": 0,
                    "tol": cfg.tol,
                    "eigenvalue": None,
                    "ssim": ssim(x, adv, args.ssim_range),
                    "dice": dice(clean_pred, adv_pred),
                    "oracle_evals": row_evals,
                    "restarts": None,
                    "converged": None,
                    "wall_time_ms": (time.perf_counter() - t1) * 1000.0,
                    "note": "",
                }
            )
    return rows


def run_bench(args):
    """Compute all bench rows; returns (rows, n_failed).  Used by tests too."""
    files = sorted(Path(args.inputs).glob("*.ptnsr"))
    if not files:
        raise PenetraError(f"no *.ptnsr inputs in {args.inputs}")
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    for m in methods:
        if m not in ("penetrative", "uniform"):
            raise PenetraError(f"unknown method {m!r}")

    def work(path):
        try:
            return _bench_one(args, path, methods)
        except PenetraError as exc:
            return [
                {
                    "input_id": path.stem,
                    "method": "error",
                    "mode_index": None,
                    "tol": args.tol,
                    "eigenvalue": None,
                    "ssim": None,
                    "dice": None,
                    "oracle_evals": None,
                    "restarts": None,
                    "converged": None,
                    "wall_time_ms": None,
                    "note": str(exc),
                }
            ]

    if args.workers > 1:
        with ThreadPoolExecutor(max_workers=args.workers) as pool:
            per_file = list(pool.map(work, files))
    else:
        per_file = [work(path) for path in files]
    rows = [row for rows in per_file for row in rows]
    failed = sum(1 for rows in per_file if rows and rows[0]["method"] == "error")
    if failed == len(files):
        raise PenetraError("every bench input failed")
    return rows, failed


def write_bench_outputs(rows, args, out_dir: Path):
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "bench.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(BENCH_COLUMNS)
        for row in rows:
            writer.writerow([_fmt(row[c]) for c in BENCH_COLUMNS])

    summary = {"methods": {}, "variance": "population", "config": {
        "oracle": args.oracle,
        "tol": args.tol,
        "epsilon": args.epsilon,
        "delta": args.delta,
        "k": args.k,
        "seed": args.seed,
        "methods": args.methods,
        "ssim_range": args.ssim_range,
    }}
    for method in ("penetrative", "uniform"):
        mrows = [r for r in rows if r["method"] == method]
        if not mrows:
            continue
        entry = {"count": len(mrows)}
        for metric in ("ssim", "dice", "eigenvalue", "oracle_evals"):
            vals = [r[metric] for r in mrows if r[metric] is not None]
            if vals:
                mean, var = mean_variance(vals)
                entry[metric] = {"mean": mean, "variance": var}
        summary["methods"][method] = entry
    (out_dir / "summary.json").write_text(
        json.dumps(summary, indent=2, sort_keys=True) + "\n"
    )
    return summary


def cmd_bench(args) -> int:
    rows, _ = run_bench(args)
    write_bench_outputs(rows, args, Path(args.out_dir))
    return 0


def cmd_eig(args) -> int:
    with parse_oracle_spec(args.oracle) as oracle:
        if args.input:
            x = read_tensor(args.input)
        else:
            x = np.zeros(oracle.info.input_shape)
        from .attack import _square_or_adapted

        adapter, _ = _square_or_adapted(oracle)
        op = JvpOperator(oracle, x, epsilon=args.epsilon, adapter=adapter)
        result = solve_largest_magnitude(
            op,
            EigConfig(
                k=args.k,
                tol=args.tol,
                itmax=args.itmax,
                ncv=args.ncv,
                mode=args.mode,
                seed=args.seed,
            ),
        )
    print(
        json.dumps(
            {
                "pairs": [
                    {"eigenvalue": p.value, "residual": p.residual}
                    for p in result.pairs
                ],
                "matvecs": result.matvecs,
                "restarts": result.restarts_used,
                "oracle_evals": result.oracle_evals,
                "converged": result.converged,
                "complex_ritz_seen": result.complex_ritz_seen,
            },
            indent=2,
            sort_keys=True,
        )
    )
    return 0


def cmd_oracle_check(args) -> int:
    expect = None
    if args.expect_input:
        expect = tuple(int(t) for t in args.expect_input.split(",") if t)
    with parse_oracle_spec(args.oracle, expect_input_shape=expect) as oracle:
        probe = np.zeros(oracle.info.input_shape)
        t0 = time.perf_counter()
        out = oracle.eval(probe)
        roundtrip_ms = (time.perf_counter() - t0) * 1000.0
        ok = out.shape == oracle.info.output_shape and bool(np.all(np.isfinite(out)))
        print(
            json.dumps(
                {
                    "name": oracle.info.name,
                    "input_shape": list(oracle.info.input_shape),
                    "output_shape": list(oracle.info.output_shape),
                    "deterministic": oracle.info.deterministic,
                    "roundtrip_ms": roundtrip_ms,
                    "ok": ok,
                },
                indent=2,
                sort_keys=True,
            )
        )
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
