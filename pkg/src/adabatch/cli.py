"""Command line front end: ``opt generate | run | demo-inconsistency | compare``.

Exit codes: 0 all runs ended in {budget_exhausted, converged}; 1 usage or
config error; 2 at least one run diverged or stalled (the partial traces are
kept, divergence is an observable result); 3 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import statistics
import sys
from concurrent.futures import ThreadPoolExecutor

from .config import ExperimentConfig, load_dataset
from .data import SyntheticSpec, write_synthetic
from .drivers import run as run_driver
from .errors import ConfigError
from .inconsistency import DemoSpec, demo_emit, demo_table, summarize
from .objectives import make_objective
from .traces import TraceSchemaError, read_csv

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DIVERGED = 2
EXIT_IO = 3

OUT_DIR_ENV = "OPT_OUT_DIR"


def _default_out_dir() -> str:
    return os.environ.get(OUT_DIR_ENV, ".")


def cmd_generate(args) -> int:
    if args.n_samples > args.max_rows:
        print(f"error: n_samples {args.n_samples} exceeds --max-rows {args.max_rows}",
              file=sys.stderr)
        return EXIT_USAGE
    spec = SyntheticSpec(args.n_samples, args.n_features, args.sigma, args.seed)
    write_synthetic(spec, args.out)
    print(f"wrote {args.out} and {args.out}.json")
    return EXIT_OK


def cmd_run(args) -> int:
    config = ExperimentConfig.load(args.config)
    if args.seed is not None:
        config.seeds = [args.seed]
    if args.trace_every is not None:
        for run_cfg in config.runs:
            run_cfg.trace_every = args.trace_every
    out_dir = args.out or config.out_dir or _default_out_dir()
    os.makedirs(out_dir, exist_ok=True)

    dataset = load_dataset(config.dataset, config.objective)
    objective = make_objective(config.objective, dataset,
                               fit_intercept=config.fit_intercept)

    pairs = [(run_cfg, seed) for run_cfg in config.runs for seed in config.seeds]

    def execute(pair):
        run_cfg, seed = pair
        import copy
        cfg = copy.deepcopy(run_cfg)
        cfg.seed = seed
        trace = run_driver(objective, cfg)
        stem = os.path.join(out_dir, f"{config.name}__{cfg.name}__seed{seed}")
        trace.write(stem + ".csv" if "csv" in config.emit else os.devnull,
                    stem + ".json" if "json" in config.emit else None)
        return cfg.name, seed, trace.status

    workers = min(args.jobs, len(pairs))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(execute, pairs))
    else:
        outcomes = [execute(p) for p in pairs]

    code = EXIT_OK
    for name, seed, status in outcomes:
        print(f"{name} seed={seed}: {status}")
        if status not in ("budget_exhausted", "converged"):
            code = EXIT_DIVERGED
    return code


def cmd_demo(args) -> int:
    spec = DemoSpec(w=args.w, batch_total=args.batch_total, theta_a=args.theta)
    rows = demo_table(spec)
    text = demo_emit(rows)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    summary = summarize(rows)
    print(json.dumps(summary), file=sys.stderr)
    return EXIT_OK


def _trace_stats(values):
    finite = [v for v in values if v is not None and math.isfinite(v)]
    if not finite:
        return None, None
    return finite[-1], min(finite)


def cmd_compare(args) -> int:
    by_method = {}
    for path in args.traces:
        trace = read_csv(path)
        name = trace.header.get("name") or os.path.basename(path).rsplit(".", 1)[0]
        final, best = _trace_stats(trace.column(args.metric))
        by_method.setdefault(name, []).append((final, best))

    lines = [f"{'method':<28} {'seeds':>5} {'final_mean':>14} {'final_std':>12} "
             f"{'best_mean':>14} {'best_std':>12}"]
    report = {}
    for name in sorted(by_method):
        finals = [f for f, _ in by_method[name] if f is not None]
        bests = [b for _, b in by_method[name] if b is not None]
        fm = statistics.fmean(finals) if finals else float("nan")
        fs = statistics.stdev(finals) if len(finals) > 1 else 0.0
        bm = statistics.fmean(bests) if bests else float("nan")
        bs = statistics.stdev(bests) if len(bests) > 1 else 0.0
        report[name] = {"seeds": len(by_method[name]), "final_mean": fm,
                        "final_std": fs, "best_mean": bm, "best_std": bs}
        lines.append(f"{name:<28} {len(by_method[name]):>5} {fm:>14.6g} {fs:>12.6g} "
                     f"{bm:>14.6g} {bs:>12.6g}")
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            json.dump({"metric": args.metric, "methods": report}, fh, indent=2)
        print(f"wrote {args.out}")
    sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="opt", description="adaptive-batch / adaptive-step SGD benchmarks")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write a seeded synthetic regression dataset")
    gen.add_argument("--n-samples", type=int, default=1000)
    gen.add_argument("--n-features", type=int, default=20)
    gen.add_argument("--sigma", type=float, default=4.0)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--max-rows", type=int, default=500_000)
    gen.add_argument("--out", required=True)

    runp = sub.add_parser("run", help="execute every (run x seed) pair of a config")
    runp.add_argument("--config", required=True)
    runp.add_argument("--seed", type=int, default=None,
                      help="override the config's seed list with a single seed")
    runp.add_argument("--out", default=None)
    runp.add_argument("--trace-every", type=int, default=None)
    runp.add_argument("--jobs", type=int, default=4)

    demo = sub.add_parser("demo-inconsistency",
                          help="emit the exact-vs-approximated test disagreement table")
    demo.add_argument("--w", type=float, default=0.5)
    demo.add_argument("--batch-total", type=int, default=20)
    demo.add_argument("--theta", type=float, default=1.0)
    demo.add_argument("--out", default=None)

    cmp_ = sub.add_parser("compare", help="summarize metrics across trace CSVs")
    cmp_.add_argument("traces", nargs="+")
    cmp_.add_argument("--metric", default="f",
                      choices=["f", "grad_norm_full", "grad_norm_batch",
                               "step_size", "batch_size"])
    cmp_.add_argument("--out", default=None)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    handlers = {
        "generate": cmd_generate,
        "run": cmd_run,
        "demo-inconsistency": cmd_demo,
        "compare": cmd_compare,
    }
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except TraceSchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
