"""Command line entry point: ``incoherent-frames {design,select,analyze,bench}``.

Every invocation writes a ``manifest.json`` next to its outputs (also when it
fails).  Exit codes: 0 success, 1 runtime or numerical failure, 2 usage error.
Progress goes to standard error, machine-readable results to files and to
standard output.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from . import io as fio
from .frame import coherence, fp_upper_bound, papr, welch_bound
from .harmonic import CoherenceOperator, HarmonicConfig, SelectionError, select_rows
from .oracle import BudgetExceeded, OracleBudget, exhaustive_select
from .recovery import random_frame, run_sweep
from .sidco import SidcoConfig, VariantSpec, make_fixed_support, run

log = logging.getLogger("incoherent_frames")

OUT_ENV = "INCOHERENT_FRAMES_OUT"
VARIANTS = {
    "r": "real", "c": "complex", "u": "unital", "nr": "nonneg_real", "nc": "nonneg_complex",
    "sr": "sparse_real", "sc": "sparse_complex",
}


class UsageError(Exception):
    pass


def _out_dir(args) -> Path:
    out = args.out or os.environ.get(OUT_ENV) or "."
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _s_range(text: str):
    try:
        if ".." in text:
            a, b = text.split("..")
            return list(range(int(a), int(b) + 1))
        return [int(v) for v in text.split(",")]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad sparsity range {text!r}; use a..b or a,b,c") from exc


# --------------------------------------------------------------------------
# design


def _design_one(m, n, variant, cfg, init, warm_start):
    if variant.is_sparse and init is None and warm_start and not variant.fixed_support:
        base = "complex" if variant.kind == "sparse_complex" else "real"
        init = run(m, n, VariantSpec(base), cfg).best_frame
    return run(m, n, variant, cfg, initial_frame=init)


def cmd_design(args, manifest):
    kind = VARIANTS[args.variant]
    if args.gamma is not None and kind != "unital":
        raise UsageError("--gamma only applies to --variant u")
    if args.lam is not None and not kind.startswith("sparse"):
        raise UsageError("--lambda only applies to --variant sr/sc")
    if args.sparsity_mode is not None and not kind.startswith("sparse"):
        raise UsageError("--sparsity-mode only applies to --variant sr/sc")
    mode = {"l1": "l1_penalty", "fixed": "fixed_support", None: "l1_penalty"}[args.sparsity_mode]
    if args.zeros_per_column is not None and mode != "fixed_support":
        raise UsageError("--zeros-per-column needs --sparsity-mode fixed")
    if mode == "fixed_support" and args.zeros_per_column is None:
        raise UsageError("--sparsity-mode fixed needs --zeros-per-column")
    if not args.n > args.m >= 1:
        raise UsageError("need --n > --m >= 1")
    if args.seeds < 1 or args.iters < 1:
        raise UsageError("--seeds and --iters must be >= 1")
    init = None
    if args.init:
        init, _ = fio.load_frame(args.init)
    out = _out_dir(args)
    results = []
    configs = []
    for k in range(args.seeds):
        seed = args.seed + k
        mask = None
        if mode == "fixed_support":
            mask = make_fixed_support(args.m, args.n, args.zeros_per_column, seed)
        variant = VariantSpec(kind, gamma=args.gamma if args.gamma is not None else 0.01,
                              lam=args.lam if args.lam is not None else (1.8 if kind.startswith("sparse") else 0.0),
                              sparsity_mode=mode, support_mask=mask)
        cfg = SidcoConfig(max_iterations=args.iters, rng_seed=seed, retraction_budget=args.retraction_budget)
        configs.append((args.m, args.n, variant, cfg, init, not args.no_warm_start))
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as ex:
            results = list(ex.map(_design_one, *zip(*configs)))
    else:
        for c in configs:
            log.info("design %s (%d,%d) seed %d", kind, args.m, args.n, c[3].rng_seed)
            results.append(_design_one(*c))
    values = [r.best_coherence for r in results]
    best = results[int(np.argmin(values))]
    wb = welch_bound(args.m, args.n)
    meta = {"variant": kind, "seed": best.seed, "coherence": best.best_coherence, "welch_bound": wb,
            "manifest": "manifest.json"}
    paths = {
        "frame": fio.save_frame(out / "frame.json", best.best_frame, meta),
        "report": fio.write_json(out / "report.json", {**best.to_dict(), "all_seeds": values,
                                                       "manifest": "manifest.json"}),
        "trajectory": out / "trajectory.csv",
    }
    paths["trajectory"].write_text(best.trajectory_csv())
    manifest["outputs"] = {k: str(v) for k, v in paths.items()}
    summary = {"variant": kind, "m": args.m, "n": args.n, "coherence": best.best_coherence,
               "welch_bound": wb, "best_seed": best.seed, "seed_coherences": values}
    print(json.dumps(summary))
    return 0


# --------------------------------------------------------------------------
# select


def _operator(source: str, n: int) -> CoherenceOperator:
    if source == "fourier":
        return CoherenceOperator("fourier", n)
    if source == "hadamard":
        return CoherenceOperator("hadamard", n)
    if source.startswith("custom:"):
        M, _ = fio.load_frame(source.split(":", 1)[1])
        op = CoherenceOperator("custom", matrix=M)
        if n is not None and op.n != n:
            raise UsageError(f"custom matrix has order {op.n}, --n says {n}")
        return op
    raise UsageError(f"unknown source {source!r}")


def cmd_select(args, manifest):
    if args.n is None and not args.source.startswith("custom:"):
        raise UsageError("--n is required for fourier and hadamard sources")
    op = _operator(args.source, args.n)
    n = op.n
    if not 1 <= args.m < n:
        raise UsageError("need 1 <= --m < n")
    cfg = HarmonicConfig(irl1_iters=args.irl1_iters, lam=args.lam, zeta=args.zeta,
                         local_search_width=args.local_width, support_epsilon=args.support_epsilon,
                         runs=args.runs, weight_rule=args.weight_rule, rng_seed=args.seed,
                         use_complement=not args.no_complement, fixpoint=not args.single_pass,
                         stop_at_bound=not args.all_runs)
    rep = select_rows(op, args.m, cfg, return_report=True)
    out = _out_dir(args)
    extra = {"coherence": rep.coherence, "welch_bound": rep.welch, "manifest": "manifest.json"}
    summary = {"source": op.describe(), "m": args.m, "n": n, "indices": list(rep.pattern.indices),
               "coherence": rep.coherence, "welch_bound": rep.welch, "runs_done": rep.runs_done}
    if args.oracle_check:
        pat, val = exhaustive_select(op, args.m)
        summary["oracle_coherence"] = val
        summary["oracle_indices"] = list(pat.indices)
        summary["matches_oracle"] = bool(abs(val - rep.coherence) <= 1e-12)
        extra["oracle_coherence"] = val
    paths = {
        "pattern": fio.save_pattern(out / "pattern.json", rep.pattern, op.describe(), extra),
        "frame": fio.save_frame(out / "frame.json", op.frame(rep.pattern),
                                {"source": op.describe(), "indices": list(rep.pattern.indices),
                                 "coherence": rep.coherence, "manifest": "manifest.json"}),
    }
    manifest["outputs"] = {k: str(v) for k, v in paths.items()}
    print(json.dumps(summary))
    if args.oracle_check and not summary["matches_oracle"]:
        return 1
    return 0


# --------------------------------------------------------------------------
# analyze


def analyze_frame(F: np.ndarray) -> dict:
    g = coherence(F)
    m, n = g.m, g.n
    wb, loose = welch_bound(m, n, return_flag=True) if n >= m else (0.0, False)
    ratio = g.coherence / wb if wb > 0 else float("inf")
    out = {
        "m": m,
        "n": n,
        "field": "complex" if np.iscomplexobj(F) else "real",
        "coherence": g.coherence,
        "argmax_pair": list(g.argmax_pair),
        "welch_bound": wb,
        "welch_bound_may_be_loose": loose,
        "welch_gap": g.coherence - wb,
        "frame_potential": g.frame_potential,
        "fp_minimum": n * n / m,
        "fp_excess": g.frame_potential / (n * n / m) - 1.0,
        "tightness_gap": g.tightness_gap,
        "frame_bounds": list(g.frame_bounds),
        "papr": [float(v) for v in papr(F)],
    }
    if wb > 0 and ratio >= 1:
        out["fp_upper_bound"] = fp_upper_bound(m, n, ratio)
    return out


def cmd_analyze(args, manifest):
    F, _ = fio.load_frame(args.frame)
    res = analyze_frame(F)
    print(json.dumps(res, indent=None if args.compact else 2))
    return 0


# --------------------------------------------------------------------------
# bench


def cmd_bench(args, manifest):
    if bool(args.frame) == bool(args.random):
        raise UsageError("give exactly one of --frame PATH or --random")
    if args.random:
        if args.m is None or args.n is None:
            raise UsageError("--random needs --m and --n")
        A = random_frame(args.m, args.n, args.field == "complex", args.frame_seed)
        label = "random"
    else:
        A, _ = fio.load_frame(args.frame)
        label = str(args.frame)
    m = A.shape[0]
    if max(args.s_range) > m:
        raise UsageError(f"sparsity {max(args.s_range)} exceeds m = {m}")
    if min(args.s_range) < 1:
        raise UsageError("sparsity must be >= 1")
    res = run_sweep(A, args.s_range, args.snr_db, args.trials, args.seed)
    out = _out_dir(args)
    path = out / (args.csv_name or "bench.csv")
    path.write_text(res.to_csv())
    manifest["outputs"] = {"csv": str(path)}
    manifest["frame"] = label
    sys.stdout.write(res.to_csv())
    return 0


# --------------------------------------------------------------------------
# oracle (not listed in --help)


def cmd_oracle(args, manifest):
    op = _operator(args.source, args.n)
    rows = []
    for m in args.m_values:
        try:
            pat, val = exhaustive_select(op, m, OracleBudget(max_patterns=args.max_patterns))
        except BudgetExceeded as exc:
            raise RuntimeError(str(exc)) from exc
        rows.append({"m": m, "coherence": val, "indices": list(pat.indices)})
        log.info("oracle m=%d: %.12f", m, val)
    out = _out_dir(args)
    path = fio.write_json(out / "oracle.json", {"source": op.describe(), "n": op.n, "results": rows,
                                                "manifest": "manifest.json"})
    manifest["outputs"] = {"oracle": str(path)}
    print(json.dumps(rows))
    return 0


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="incoherent-frames",
                                description="Design and select low-coherence frames.")
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true", help="progress messages on stderr")
    sub = p.add_subparsers(dest="command", metavar="{design,select,analyze,bench}")
    sub.required = True

    d = sub.add_parser("design", help="sequential decorrelation design of an m x n frame")
    d.add_argument("--variant", choices=sorted(VARIANTS), default="c")
    d.add_argument("--m", type=int, required=True)
    d.add_argument("--n", type=int, required=True)
    d.add_argument("--iters", type=int, default=2000)
    d.add_argument("--seeds", type=int, default=1, help="number of restarts (seeds seed..seed+k-1)")
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--gamma", type=float, default=None, help="unital modulus slack (default 0.01)")
    d.add_argument("--lambda", dest="lam", type=float, default=None, help="l1 weight (default 1.8)")
    d.add_argument("--sparsity-mode", choices=["l1", "fixed"], default=None)
    d.add_argument("--zeros-per-column", type=int, default=None)
    d.add_argument("--retraction-budget", type=int, default=None,
                   help="cap on restart heuristics per run (default: no cap)")
    d.add_argument("--init", default=None, help="frame file to start from")
    d.add_argument("--no-warm-start", action="store_true",
                   help="sparse l1 designs start from a random frame instead of a general design")
    d.add_argument("--jobs", type=int, default=1)
    d.add_argument("--out", default=None)
    d.set_defaults(func=cmd_design)

    s = sub.add_parser("select", help="incoherent row selection from a unital matrix")
    s.add_argument("--source", default="fourier", help="fourier, hadamard or custom:<frame file>")
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--n", type=int, default=None)
    s.add_argument("--runs", type=int, default=500)
    s.add_argument("--irl1-iters", type=int, default=7)
    s.add_argument("--lambda", dest="lam", type=float, default=None, help="default 1/m")
    s.add_argument("--zeta", type=float, default=0.1)
    s.add_argument("--local-width", type=int, default=None)
    s.add_argument("--support-epsilon", type=float, default=1e-3)
    s.add_argument("--weight-rule", default="one_minus_g",
                   choices=["one_minus_g", "inverse_magnitude", "one_minus_g_over_inf"])
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--no-complement", action="store_true")
    s.add_argument("--single-pass", action="store_true", help="one local-search pass instead of a fixpoint")
    s.add_argument("--all-runs", action="store_true", help="do not stop when the Welch bound is met")
    s.add_argument("--oracle-check", action="store_true", help="compare with exhaustive search")
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_select)

    a = sub.add_parser("analyze", help="coherence and Gram diagnostics of a frame file")
    a.add_argument("frame")
    a.add_argument("--compact", action="store_true")
    a.add_argument("--out", default=None)
    a.set_defaults(func=cmd_analyze)

    b = sub.add_parser("bench", help="OMP sparse recovery benchmark")
    b.add_argument("--frame", default=None)
    b.add_argument("--random", action="store_true")
    b.add_argument("--m", type=int, default=None)
    b.add_argument("--n", type=int, default=None)
    b.add_argument("--field", choices=["real", "complex"], default="complex")
    b.add_argument("--frame-seed", type=int, default=12345)
    b.add_argument("--s-range", type=_s_range, default=_s_range("1..10"))
    b.add_argument("--snr-db", type=float, default=15.0)
    b.add_argument("--trials", type=int, default=100_000)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--csv-name", default=None)
    b.add_argument("--out", default=None)
    b.set_defaults(func=cmd_bench)

    o = sub.add_parser("oracle")
    o.add_argument("--source", default="fourier")
    o.add_argument("--n", type=int, required=True)
    o.add_argument("--m", dest="m_values", type=int, nargs="+", required=True)
    o.add_argument("--max-patterns", type=int, default=10 ** 7)
    o.add_argument("--out", default=None)
    o.set_defaults(func=cmd_oracle)
    # keep the reference-value command out of the help listing
    sub._choices_actions = [c for c in sub._choices_actions if c.dest != "oracle"]
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr,
                        format="%(asctime)s %(message)s")
    manifest = {
        "command": args.command,
        "argv": list(sys.argv[1:] if argv is None else argv),
        "parameters": {k: v for k, v in vars(args).items() if k != "func"},
        "seed": getattr(args, "seed", None),
        "version": __version__,
        "started": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        "outputs": {},
        "status": "running",
    }
    code = 1
    try:
        code = args.func(args, manifest)
        manifest["status"] = "ok" if code == 0 else "failed"
    except UsageError as exc:
        manifest["status"] = "usage_error"
        manifest["error"] = str(exc)
        parser.print_usage(sys.stderr)
        print(f"{parser.prog} {args.command}: error: {exc}", file=sys.stderr)
        code = 2
    except (fio.FrameFileError, SelectionError, ValueError, RuntimeError, OSError) as exc:
        manifest["status"] = "error"
        manifest["error"] = f"{type(exc).__name__}: {exc}"
        print(f"{parser.prog} {args.command}: error: {exc}", file=sys.stderr)
        code = 1
    finally:
        manifest["finished"] = time.strftime("%Y-%m-%dT%H:%M:%S%z")
        manifest["exit_code"] = code
        try:
            out = Path(getattr(args, "out", None) or os.environ.get(OUT_ENV) or ".")
            out.mkdir(parents=True, exist_ok=True)
            fio.write_json(out / "manifest.json", manifest)
        except OSError as exc:
            print(f"could not write manifest: {exc}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
