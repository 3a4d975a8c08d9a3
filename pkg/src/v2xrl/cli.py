"""Command-line interface.

Subcommands: train, eval, baseline, sweep, validate-channel, bench.
Exit codes: 0 success, 2 configuration error, 3 joint-action capacity error.
"""

import argparse
import os
import sys

import numpy as np

from . import __version__
from .baselines import CapacityError
from .channel import sample_fast_fading, update_shadowing
from .config import (
    PAYLOAD_UNIT_BYTES,
    ConfigError,
    ExperimentSpec,
    load_config,
    save_config,
)
from .harness import (
    calibrate_reward,
    eval_seed_for,
    load_policy,
    make_baseline_policy,
    run_experiment,
    save_checkpoints,
)
from .metrics import metrics_from_eval, write_metrics_csv, write_training_log_csv
from .rngstreams import SeedHierarchy
from .trainer import GreedyMarlPolicy, GreedySarlPolicy, evaluate, train


def _add_common(p):
    p.add_argument("--config", help="experiment config file (key = value lines)")
    p.add_argument("--seed", type=int, help="master seed override")
    p.add_argument("--out", help="output directory override")
    p.add_argument("--scheme", help="scheme override (marl/sarl/random/maxv2v/nov2v)")
    p.add_argument("--payload-multiplier", type=int, help="evaluate a single payload multiplier")
    p.add_argument("--episodes", type=int, help="evaluation episode count override")


def _spec_from_args(args) -> ExperimentSpec:
    spec = load_config(args.config) if args.config else ExperimentSpec()
    if args.seed is not None:
        spec.seed = args.seed
    if args.scheme is not None:
        spec.scheme = args.scheme
    if args.out is not None:
        spec.output_dir = args.out
    if getattr(args, "payload_multiplier", None) is not None:
        spec.payload_multipliers = (args.payload_multiplier,)
    if getattr(args, "episodes", None) is not None:
        spec.eval_episodes = args.episodes
    spec.validate()
    return spec


def cmd_train(args):
    spec = _spec_from_args(args)
    if spec.scheme not in ("marl", "sarl"):
        raise ConfigError(f"scheme '{spec.scheme}' is not trainable; use marl or sarl")
    out = spec.output_dir
    os.makedirs(out, exist_ok=True)
    reward = calibrate_reward(spec)
    result = train(spec.sim, spec.train, reward, spec.seed, scheme=spec.scheme, progress_every=100)
    write_training_log_csv(result.log, os.path.join(out, "training_log.csv"))
    save_checkpoints(result, out)
    save_config(spec, os.path.join(out, "checkpoints", "config_resolved.cfg"))
    last = result.log[-1]
    print(
        f"trained {spec.scheme} for {spec.train.total_episodes} episodes; "
        f"final return {last.episode_return:.3f}; checkpoints in {out}/checkpoints"
    )
    return 0


def _evaluate_spec(spec: ExperimentSpec):
    if spec.scheme in ("marl", "sarl"):
        policy = load_policy(spec, spec.output_dir)
    else:
        policy = make_baseline_policy(spec)
    reward = calibrate_reward(spec)
    rows = []
    for mult in spec.payload_multipliers:
        payload = mult * PAYLOAD_UNIT_BYTES
        res = evaluate(
            policy,
            spec.sim,
            spec.eval_episodes,
            payload,
            eval_seed_for(spec, mult),
            reward,
            fingerprint_epsilon=spec.train.epsilon_final,
        )
        upper = res.upper_sum_bps if spec.scheme == "nov2v" else None
        row = metrics_from_eval(spec.scheme, payload, res, v2i_series=upper)
        rows.append(row)
        print(
            f"{spec.scheme}  payload={payload}B  "
            f"v2i={row.v2i_sum_capacity_bps_mean / 1e6:.3f} Mb/s  "
            f"delivery={row.delivery_probability:.3f}"
        )
    return rows


def cmd_eval(args):
    spec = _spec_from_args(args)
    os.makedirs(spec.output_dir, exist_ok=True)
    rows = _evaluate_spec(spec)
    path = os.path.join(spec.output_dir, "metrics.csv")
    write_metrics_csv(rows, path)
    print(f"wrote {path}")
    return 0


def cmd_baseline(args):
    spec = _spec_from_args(args)
    if spec.scheme not in ("random", "maxv2v", "nov2v"):
        raise ConfigError(
            f"'{spec.scheme}' is not a baseline scheme; use random, maxv2v or nov2v"
        )
    return cmd_eval(args)


def cmd_sweep(args):
    spec = _spec_from_args(args)
    rows = run_experiment(spec)
    for row in rows:
        print(
            f"{row.scheme}  payload={row.payload_bytes}B  "
            f"v2i={row.v2i_sum_capacity_bps_mean / 1e6:.3f} Mb/s  "
            f"delivery={row.delivery_probability:.3f}"
        )
    print(f"artifacts in {spec.output_dir}")
    return 0


def cmd_validate_channel(args):
    spec = _spec_from_args(args)
    out = spec.output_dir
    os.makedirs(out, exist_ok=True)
    rng = SeedHierarchy(spec.seed).stream("channel-validation")

    samples = sample_fast_fading(rng, 1_000_000)
    counts, edges = np.histogram(samples, bins=100, range=(0.0, 10.0))
    hist_path = os.path.join(out, "fading_histogram.csv")
    with open(hist_path, "w", encoding="utf-8") as fh:
        fh.write("bin_left,bin_right,count,density\n")
        width = float(edges[1] - edges[0])
        for i, c in enumerate(counts):
            density = float(c) / (len(samples) * width)
            fh.write(f"{float(edges[i])!r},{float(edges[i + 1])!r},{int(c)},{density!r}\n")

    shadow = 0.0
    std = spec.sim.v2v_shadow_std_db
    trace = np.empty(100_000)
    for i in range(trace.size):
        shadow = float(update_shadowing(shadow, 1.0, std, spec.sim.v2v_decorr_m, rng))
        trace[i] = shadow

    print(f"fast fading: mean={samples.mean():.4f} (target 1.0), P(h>1)={np.mean(samples > 1.0):.4f}")
    print(f"shadowing:   stationary std={trace[1000:].std(ddof=1):.3f} dB (target {std})")
    print(f"wrote {hist_path}")
    return 0


def cmd_bench(args):
    from .bench import run_benchmarks

    return run_benchmarks(repeats=args.repeats)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="v2xrl",
        description="Multi-agent RL spectrum sharing simulator for cellular V2X networks",
    )
    parser.add_argument("--version", action="version", version=f"v2xrl {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    commands = {
        "train": (cmd_train, "train the learned scheme and save checkpoints"),
        "eval": (cmd_eval, "evaluate a scheme (learned schemes need checkpoints in --out)"),
        "baseline": (cmd_baseline, "evaluate a non-learned baseline scheme"),
        "sweep": (cmd_sweep, "full experiment: train if needed, evaluate all payload sizes"),
        "validate-channel": (cmd_validate_channel, "dump empirical fading histograms as CSV"),
    }
    for name, (func, help_text) in commands.items():
        p = sub.add_parser(name, help=help_text)
        _add_common(p)
        p.set_defaults(func=func)

    bench = sub.add_parser("bench", help="compare compiled kernels against the numpy fallback")
    bench.add_argument("--repeats", type=int, default=2000)
    bench.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return int(args.func(args) or 0)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return 3
