"""Experiment orchestration: reward calibration, training, payload sweeps, artifacts.

run_experiment() is the single entry behind the CLI: it resolves the reward
parameters, trains if the scheme requires it, evaluates across payload sizes
on fresh seeded episodes, and writes the full artifact set (metrics CSV,
trace CSVs, training log, checkpoints, plot-data files, resolved config).
"""

import dataclasses
import os

import numpy as np

from .baselines import MaxV2VPolicy, RandomPolicy, SilentPolicy
from .config import PAYLOAD_UNIT_BYTES, ConfigError, ExperimentSpec, save_config
from .env import Env, RewardParams
from .metrics import (
    metrics_from_eval,
    write_metrics_csv,
    write_trace_csv,
    write_training_log_csv,
)
from .qnet import QNetwork
from .rngstreams import SeedHierarchy
from .trainer import GreedyMarlPolicy, GreedySarlPolicy, evaluate, train

CALIBRATION_STEPS = 1000


def calibrate_reward(spec: ExperimentSpec) -> RewardParams:
    """Resolve the reward parameters for an experiment.

    With auto_scale, runs random-policy episodes at the episode-0 channel
    conditions of the training payload, then sets beta to 1.5x the largest
    observed per-link rate and folds the random-policy means of both reward
    terms into the weights, so the configured lambdas weight dimensionless
    quantities while the step reward stays an exact weighted sum.
    """
    if not spec.reward_auto_scale:
        params = RewardParams(spec.reward_lambda_c, spec.reward_lambda_d, spec.reward_beta_bps)
        params.validate()
        return params

    cfg = dataclasses.replace(spec.sim, payload_bytes=spec.train.train_payload_bytes)
    h = SeedHierarchy(spec.seed)
    env = Env(
        cfg,
        h.stream("calibration-topology"),
        h.stream("calibration-shadowing"),
        h.stream("calibration-fading"),
    )
    rng = h.stream("calibration-actions")
    probe = RewardParams(1.0, 1.0, 1.0)

    steps = cfg.steps_per_episode
    episodes = max(1, (CALIBRATION_STEPS + steps - 1) // steps)
    rates = []
    v2i_sums = []
    delivered_before = []
    for e in range(episodes):
        env.reset(e, refresh_large_scale=(e == 0))
        for _ in range(steps):
            actions = rng.integers(0, cfg.num_actions, size=cfg.k_links)
            delivered_before.append(env.delivered.copy())
            out = env.step(actions, probe)
            rates.append(out.v2v_rate_bps.copy())
            v2i_sums.append(float(out.v2i_capacity_bps.sum()))

    rates = np.array(rates)  # (steps, K)
    delivered_before = np.array(delivered_before)
    beta = spec.reward_beta_bps if spec.reward_beta_bps > 0 else 1.5 * float(rates.max())
    if beta <= 0:
        beta = 1.0  # degenerate channel; keep the reward well-defined
    l_terms = np.where(delivered_before, beta, rates).sum(axis=1)
    c_norm = float(np.mean(v2i_sums))
    l_norm = float(l_terms.mean())
    params = RewardParams(
        lambda_c=spec.reward_lambda_c / c_norm if c_norm > 0 else spec.reward_lambda_c,
        lambda_d=spec.reward_lambda_d / l_norm if l_norm > 0 else spec.reward_lambda_d,
        beta_bps=beta,
    )
    params.validate()
    return params


def make_baseline_policy(spec: ExperimentSpec):
    if spec.scheme == "random":
        return RandomPolicy()
    if spec.scheme == "nov2v":
        return SilentPolicy()
    if spec.scheme == "maxv2v":
        return MaxV2VPolicy(spec.sim, spec.maxv2v_joint_cap)
    raise ConfigError(f"'{spec.scheme}' is not a baseline scheme")


def save_checkpoints(result, out_dir):
    ckpt_dir = os.path.join(out_dir, "checkpoints")
    os.makedirs(ckpt_dir, exist_ok=True)
    paths = []
    for i, net in enumerate(result.nets):
        path = os.path.join(ckpt_dir, f"agent_{i:02d}.npz")
        net.save(path)
        paths.append(path)
    return paths


def load_policy(spec: ExperimentSpec, out_dir):
    """Rebuild the greedy policy for a learned scheme from saved checkpoints."""
    ckpt_dir = os.path.join(out_dir, "checkpoints")
    count = spec.sim.k_links if spec.scheme == "marl" else 1
    nets = []
    for i in range(count):
        path = os.path.join(ckpt_dir, f"agent_{i:02d}.npz")
        if not os.path.exists(path):
            raise ConfigError(f"missing checkpoint {path}; run `v2xrl train` first")
        nets.append(QNetwork.load(path))
    return GreedyMarlPolicy(nets) if spec.scheme == "marl" else GreedySarlPolicy(nets[0])


def eval_seed_for(spec: ExperimentSpec, multiplier: int) -> int:
    return SeedHierarchy(spec.seed).child_seed("evaluation", multiplier)


def _write_plotdata(out_dir, rows, result, trace_rows, created):
    plot_dir = os.path.join(out_dir, "plotdata")
    os.makedirs(plot_dir, exist_ok=True)

    def emit(name, header, lines):
        path = os.path.join(plot_dir, name)
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(header + "\n")
            fh.writelines(line + "\n" for line in lines)
        created.append(path)

    emit(
        "v2i_capacity_vs_payload.csv",
        "payload_bytes,v2i_sum_capacity_bps_mean,v2i_ci95",
        [f"{r.payload_bytes},{r.v2i_sum_capacity_bps_mean!r},{r.v2i_ci95!r}" for r in rows],
    )
    emit(
        "delivery_vs_payload.csv",
        "payload_bytes,delivery_probability,delivery_ci95",
        [f"{r.payload_bytes},{r.delivery_probability!r},{r.delivery_ci95!r}" for r in rows],
    )
    if result is not None:
        emit(
            "training_return.csv",
            "episode,return",
            [f"{row.episode},{row.episode_return!r}" for row in result.log],
        )
    if trace_rows:
        first_episode = [r for r in trace_rows if r[0] == 0]
        emit(
            "remaining_payload_episode0.csv",
            "step,link,remaining_bits",
            [f"{r[1]},{r[2]},{r[6]!r}" for r in first_episode],
        )


def run_experiment(spec: ExperimentSpec, out_dir=None):
    """Execute an experiment spec end to end; returns the metrics rows.

    Artifacts land in out_dir (default spec.output_dir). On failure every
    file created by this run is removed.
    """
    spec.validate()
    out_dir = out_dir or spec.output_dir
    os.makedirs(out_dir, exist_ok=True)
    created = []
    try:
        return _run(spec, out_dir, created)
    except Exception:
        for path in created:
            try:
                os.remove(path)
            except OSError:
                pass
        raise


def _run(spec, out_dir, created):
    echo_path = os.path.join(out_dir, "config_resolved.cfg")
    save_config(spec, echo_path)
    created.append(echo_path)

    reward = calibrate_reward(spec)
    cal_path = os.path.join(out_dir, "reward_params.txt")
    with open(cal_path, "w", encoding="utf-8") as fh:
        fh.write(
            f"lambda_c = {reward.lambda_c!r}\n"
            f"lambda_d = {reward.lambda_d!r}\n"
            f"beta_bps = {reward.beta_bps!r}\n"
        )
    created.append(cal_path)

    result = None
    if spec.scheme in ("marl", "sarl"):
        result = train(spec.sim, spec.train, reward, spec.seed, scheme=spec.scheme)
        log_path = os.path.join(out_dir, "training_log.csv")
        write_training_log_csv(result.log, log_path)
        created.append(log_path)
        created.extend(save_checkpoints(result, out_dir))
        ckpt_cfg = os.path.join(out_dir, "checkpoints", "config_resolved.cfg")
        save_config(spec, ckpt_cfg)
        created.append(ckpt_cfg)
        policy = (
            GreedyMarlPolicy(result.nets)
            if spec.scheme == "marl"
            else GreedySarlPolicy(result.nets[0])
        )
    else:
        policy = make_baseline_policy(spec)

    rows = []
    first_trace = None
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
            collect_trace=True,
        )
        trace_path = os.path.join(out_dir, f"trace_{spec.scheme}_payload{payload}.csv")
        write_trace_csv(res.trace, trace_path)
        created.append(trace_path)
        if first_trace is None:
            first_trace = res.trace
        upper = res.upper_sum_bps if spec.scheme == "nov2v" else None
        rows.append(metrics_from_eval(spec.scheme, payload, res, v2i_series=upper))

    metrics_path = os.path.join(out_dir, "metrics.csv")
    write_metrics_csv(rows, metrics_path)
    created.append(metrics_path)
    _write_plotdata(out_dir, rows, result, first_trace, created)
    return rows
