"""Command-line front end: generate / verify / train / eval / bench.

Every command is a pure function of its flags, input files and seed, so
reruns produce byte-identical artifacts (wall-clock figures appear only in
reports, never in files). Exit codes: 0 ok, 2 usage, 3 I/O or file format,
4 dimension or parameter, 5 non-convergence, 6 enumeration size guard.
"""

from __future__ import annotations

import argparse
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import oracle, scenario, solver, surrogate
from .errors import (ConvergenceError, DataFormatError, DecodingError,
                     DimensionError, EncodingError, ParameterError,
                     SizeGuardError, SplitError, EXIT_CONVERGENCE,
                     EXIT_DIMENSION, EXIT_IO, EXIT_OK, EXIT_SIZE_GUARD)


def _parse_dims(text):
    parts = text.lower().split("x")
    if len(parts) != 3:
        raise ParameterError(f"dims must look like MxNxA, got {text!r}")
    try:
        m, n, a = (int(p) for p in parts)
    except ValueError as exc:
        raise ParameterError(f"dims must be integers, got {text!r}") from exc
    if m != a * n:
        raise DimensionError(f"need M = A*N, got {m}x{n}x{a}")
    return m, n, a


def _emit(headers, rows, fmt, out=sys.stdout):
    if fmt == "csv":
        print(",".join(headers), file=out)
        for row in rows:
            print(",".join(str(c) for c in row), file=out)
        return
    cells = [headers] + [[str(c) for c in row] for row in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(headers))]
    for r, row in enumerate(cells):
        line = "  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip()
        print(line, file=out)
        if r == 0:
            print("  ".join("-" * w for w in widths), file=out)


def _gen_instances(dims, count, seed, params, threads):
    """Effective gains and noise for ``count`` seeded instances; sample i is
    a pure function of (seed, i), so chunked generation merges by index."""
    m, n, a = dims
    gains = np.empty((count, m, n))
    noise = np.empty(count)

    def fill(lo, hi):
        for i in range(lo, hi):
            sc = scenario.scenario_for_sample(seed, i, dims, params)
            gains[i] = scenario.effective_gains(sc)
            noise[i] = sc.noise_power

    if threads > 1 and count > 1:
        bounds = np.linspace(0, count, threads + 1, dtype=int)
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(lambda se: fill(*se), zip(bounds[:-1], bounds[1:])))
    else:
        fill(0, count)
    return gains, noise


def cmd_generate(args):
    dims = _parse_dims(args.dims)
    cfg = solver.SolverConfig(max_iters=args.solver_iters)
    ds = scenario.generate_dataset(args.seed, args.count, dims, solver_cfg=cfg)
    scenario.save_dataset(ds, args.out)
    meta = ds.metadata
    _emit(["samples", "solver_converged", "solver_repaired", "oracle_fallback"],
          [[len(ds), meta["solver_converged"], meta["solver_repaired"],
            meta["oracle_fallback"]]], args.format)
    print(f"wrote {args.out} and {args.out}.norm")
    return EXIT_OK


def cmd_verify(args):
    dims = _parse_dims(args.dims)
    m, n, a = dims
    enum_size = oracle.count_assignments(m, n, a)
    if m > oracle.MAX_ENUM_USERS:
        raise SizeGuardError(f"M={m} exceeds the enumeration guard")
    gains, noise = _gen_instances(dims, args.count, args.seed, None, args.threads)
    t0 = time.perf_counter()
    batch = solver.solve_batch(gains, noise, scenario.ChannelParams().bandwidth_hz)
    solve_s = time.perf_counter() - t0
    orc = np.empty(args.count)
    for i in range(args.count):
        _, orc[i] = oracle.brute_force_rate(gains[i], noise[i],
                                            scenario.ChannelParams().bandwidth_hz, a)
    match = np.abs(batch.sum_rates - orc) <= 1e-6 * orc
    ratio = batch.sum_rates / orc
    _emit(["instances", "enum_size", "match_fraction", "mean_opt_ratio",
           "converged", "mean_iters", "max_iters", "solve_seconds"],
          [[args.count, enum_size, f"{match.mean():.6f}", f"{ratio.mean():.10f}",
            int(batch.converged.sum()), f"{batch.iterations.mean():.1f}",
            int(batch.iterations.max()), f"{solve_s:.3f}"]], args.format)
    return EXIT_OK


def cmd_train(args):
    ds = scenario.load_dataset(args.data)
    split_seed = args.split_seed if args.split_seed is not None else ds.seed
    split = scenario.split_dataset(ds, split_seed)
    base_cfg = None
    if args.epochs or args.optimizer or args.lr or args.batch_size:
        base_cfg = surrogate.TrainConfig(
            epochs=args.epochs or 40,
            batch_size=args.batch_size or 200,
            learning_rate=args.lr or 3e-3,
            optimizer=args.optimizer or "customize_switch",
            switch_epoch=args.switch_epoch)
    t0 = time.perf_counter()
    ensemble, info = surrogate.train_ensemble(split, base_cfg=base_cfg,
                                              seed=args.seed,
                                              augment_copies=args.augment)
    train_s = time.perf_counter() - t0
    manifest = surrogate.save_ensemble(ensemble, args.out_prefix)
    acc = info["val_accuracy"]
    _emit(["model", "val_accuracy"],
          [[k, f"{v:.6f}"] for k, v in sorted(acc.items())]
          + [["train_seconds", f"{train_s:.1f}"]], args.format)
    if args.timing_out:
        with open(args.timing_out, "w") as fh:
            fh.write(f"{train_s:.3f}\n")
    print(f"wrote {manifest}")
    return EXIT_OK


def cmd_eval(args):
    ds = scenario.load_dataset(args.data)
    ensemble = surrogate.load_ensemble(args.model)
    if tuple(ensemble.dims) != tuple(ds.dims):
        raise DimensionError(
            f"model dims {ensemble.dims} != dataset dims {ds.dims}")
    split_seed = args.split_seed if args.split_seed is not None else ds.seed
    split = scenario.split_dataset(ds, split_seed)
    part = getattr(split, args.split)
    feats, targets = part.features, part.targets
    row = []
    for k, base in enumerate(ensemble.base_models):
        raw = surrogate.mlp_forward(base, ensemble.transform.apply(feats))
        labels = surrogate.permutation_decode(raw, ensemble.dims)
        row.append(f"{surrogate.accuracy(labels, targets):.6f}")
    top_acc = surrogate.accuracy(surrogate.predict(ensemble, feats), targets)
    row.append(f"{top_acc:.6f}")
    if args.timing:
        with open(args.timing) as fh:
            row.append(fh.readline().strip() + "s")
    else:
        row.append("-")
    headers = [f"base{k + 1}" for k in range(len(ensemble.base_models))]
    headers += ["top", "training_time"]
    lines = _capture_table(headers, [row], args.format)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(lines)
    else:
        sys.stdout.write(lines)
    return EXIT_OK


def _capture_table(headers, rows, fmt):
    import io
    buf = io.StringIO()
    _emit(headers, rows, fmt, out=buf)
    return buf.getvalue()


def cmd_bench(args):
    dims = _parse_dims(args.dims)
    if args.count == 0:
        _emit(["method", "seconds", "per_sample_us", "speedup"], [], args.format)
        return EXIT_OK
    ensemble = surrogate.load_ensemble(args.model)
    if tuple(ensemble.dims) != dims:
        raise DimensionError(f"model dims {ensemble.dims} != bench dims {dims}")
    gains, noise = _gen_instances(dims, args.count, args.seed, None, args.threads)
    feats = gains.reshape(args.count, -1)

    t0 = time.perf_counter()
    solver.solve_batch(gains, noise, scenario.ChannelParams().bandwidth_hz,
                       solver.SolverConfig(max_iters=args.solver_iters))
    solver_s = time.perf_counter() - t0
    t0 = time.perf_counter()
    surrogate.predict(ensemble, feats)
    surro_s = time.perf_counter() - t0

    speedup = solver_s / surro_s if surro_s > 0 else float("inf")
    _emit(["method", "seconds", "per_sample_us", "speedup"],
          [["solver", f"{solver_s:.3f}", f"{1e6 * solver_s / args.count:.1f}", ""],
           ["surrogate", f"{surro_s:.3f}", f"{1e6 * surro_s / args.count:.1f}",
            f"{speedup:.1f}x"]], args.format)
    return EXIT_OK


def _add_common(p):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=("table", "csv"), default="table")
    p.add_argument("--threads", type=int, default=1)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="chanassign",
        description="Uplink subchannel assignment: exact solver, oracle "
                    "verification, and a learned surrogate.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate and label a dataset")
    p.add_argument("--dims", required=True, help="MxNxA, e.g. 4x2x2")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--solver-iters", type=int, default=400)
    _add_common(p)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("verify", help="check the solver against enumeration")
    p.add_argument("--dims", required=True)
    p.add_argument("--count", type=int, default=200)
    _add_common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("train", help="train the stacked surrogate")
    p.add_argument("--data", required=True)
    p.add_argument("--out-prefix", required=True)
    p.add_argument("--split-seed", type=int, default=None,
                   help="defaults to the dataset's generation seed")
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--batch-size", type=int, default=None)
    p.add_argument("--lr", type=float, default=None)
    p.add_argument("--optimizer",
                   choices=("adam", "sgd_momentum", "customize_switch"),
                   default=None)
    p.add_argument("--switch-epoch", type=int, default=None)
    p.add_argument("--augment", type=int, default=7,
                   help="permuted training replicas per sample")
    p.add_argument("--timing-out", default=None,
                   help="optional file for the wall-clock training time "
                        "(kept out of the model artifacts so reruns stay "
                        "byte-identical)")
    _add_common(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="accuracy table of a trained surrogate")
    p.add_argument("--data", required=True)
    p.add_argument("--model", required=True, help="ensemble manifest path")
    p.add_argument("--split", choices=("train", "validation", "test"),
                   default="test")
    p.add_argument("--split-seed", type=int, default=None)
    p.add_argument("--timing", default=None,
                   help="timing file written by train --timing-out")
    p.add_argument("--out", default=None, help="write the table to a file")
    _add_common(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("bench", help="time the solver against the surrogate")
    p.add_argument("--dims", required=True)
    p.add_argument("--count", type=int, default=10000)
    p.add_argument("--model", required=True)
    p.add_argument("--solver-iters", type=int, default=400)
    _add_common(p)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (OSError, DataFormatError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_IO
    except SizeGuardError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_SIZE_GUARD
    except ConvergenceError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except (DimensionError, ParameterError, SplitError, EncodingError,
            DecodingError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_DIMENSION


if __name__ == "__main__":
    sys.exit(main())
