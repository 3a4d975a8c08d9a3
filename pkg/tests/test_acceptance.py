"""Acceptance suite.

Runs every acceptance criterion at its stated tolerance and prints one
PASS line per criterion (use `pytest tests/test_acceptance.py -v -s`).

The desk-scale learned-scheme checks (criteria 6 and 7) share one training
run of the fixed desk configuration below; the seeds are pinned. The full
module takes a few minutes, dominated by that training run.
"""

import dataclasses
import time

import numpy as np
import pytest

from helpers import (
    finite_diff_grads,
    gradcheck_relative_errors,
    oracle_rates,
    sample_safe_gradcheck_case,
)
from v2xrl.baselines import MaxV2VPolicy, RandomPolicy, SilentPolicy, max_v2v_exhaustive
from v2xrl.channel import sample_fast_fading, update_shadowing
from v2xrl.config import ExperimentSpec, SimConfig, TrainConfig
from v2xrl.env import Env, RewardParams, observation_size
from v2xrl.harness import calibrate_reward
from v2xrl.kernels import link_rates
from v2xrl.qnet import QNetwork, backward
from v2xrl.trainer import (
    GreedyMarlPolicy,
    GreedySarlPolicy,
    epsilon_schedule,
    evaluate,
    train,
)

# ---- pinned desk-scale configuration (criteria 6 and 7) ---------------------
DESK_TRAIN_SEED = 3
DESK_EVAL_SEED = 11
DESK_SIM = dict(m_links=2, k_links=2, bandwidth_hz=4e5, num_vehicles=8, seed=DESK_TRAIN_SEED)
DESK_TRAIN = dict(
    total_episodes=1500,
    anneal_episodes=1200,
    updates_per_episode=20,
    learning_rate=3e-4,
    large_scale_refresh_period=5,
)
TRAIN_PAYLOAD_BYTES = 2 * 1060


def _report(criterion, detail):
    print(f"\nACCEPTANCE {criterion}: PASS ({detail})")


@pytest.fixture(scope="module")
def desk_model():
    """One desk-scale training run shared by the learned-scheme criteria."""
    sim = SimConfig(**DESK_SIM)
    tc = TrainConfig(**DESK_TRAIN)
    spec = ExperimentSpec(scheme="marl", seed=DESK_TRAIN_SEED, sim=sim, train=tc)
    reward = calibrate_reward(spec)
    start = time.perf_counter()
    result = train(sim, tc, reward, seed=DESK_TRAIN_SEED)
    elapsed = time.perf_counter() - start
    return sim, tc, reward, result, elapsed


def test_criterion_1_formula_oracle():
    """step() matches a straight-line evaluation of the SINR/capacity
    expressions to 1e-12 relative error on 1000 random frozen configs."""
    rng = np.random.default_rng(2024)
    reward = RewardParams(1e-7, 1e-6, 1e7)
    envs = {}
    start = time.perf_counter()
    worst = 0.0
    for trial in range(1000):
        m = int(rng.choice([1, 2, 4]))
        k = int(rng.choice([1, 2, 4]))
        if (m, k) not in envs:
            cfg = SimConfig(m_links=m, k_links=k, num_vehicles=max(m, k + 1) + 2)
            envs[(m, k)] = Env.from_seed(cfg, trial)
        env = envs[(m, k)]
        env.reset(trial, refresh_large_scale=False)

        def draw(shape):
            return np.exp(rng.uniform(np.log(1e-13), np.log(1e-7), size=shape))

        env.g_vv = draw((k, k, m))
        env.g_vb = draw((k, m))
        env.g_ib = draw(m)
        env.g_iv = draw((m, k))
        actions = rng.integers(0, env.cfg.num_actions, size=k)
        subband = actions // env.cfg.num_power_levels
        p_mw = env.power_levels_mw[actions % env.cfg.num_power_levels]
        expect = oracle_rates(
            env.g_vv.tolist(), env.g_vb.tolist(), env.g_ib.tolist(), env.g_iv.tolist(),
            subband.tolist(), p_mw.tolist(),
            env.pc_mw, env.noise_bs_mw, env.noise_veh_mw, env.cfg.subband_hz,
        )
        out = env.step(actions, reward)
        got = (out.v2i_sinr, out.v2v_sinr, out.interference_mw, out.v2i_capacity_bps, out.v2v_rate_bps)
        for g, e in zip(got, expect):
            e = np.asarray(e)
            rel = np.abs(g - e) / np.where(e == 0.0, 1.0, np.abs(e))
            worst = max(worst, float(rel.max()))
            assert np.all(rel <= 1e-12)
    elapsed = time.perf_counter() - start
    assert elapsed < 10.0, f"oracle sweep took {elapsed:.1f}s (budget 10s)"
    _report(1, f"1000 configs, worst relative error {worst:.2e}, {elapsed:.1f}s")


def test_criterion_2_gradient_check():
    """Analytic gradients match central finite differences to 1e-4 relative,
    per parameter, on 20 random [8,16,8,4] networks."""
    start = time.perf_counter()
    worst = 0.0
    for seed in range(20):
        rng = np.random.default_rng(1000 + seed)
        net, obs, actions, targets = sample_safe_gradcheck_case((8, 16, 8, 4), rng)
        analytic = backward(net, obs, actions, targets)
        numeric = finite_diff_grads(net, obs, actions, targets)
        errs = gradcheck_relative_errors(analytic, numeric)
        worst = max(worst, float(errs.max()))
        assert errs.max() <= 1e-4
    elapsed = time.perf_counter() - start
    assert elapsed < 30.0, f"gradient check took {elapsed:.1f}s (budget 30s)"
    _report(2, f"20 nets, worst relative error {worst:.2e}, {elapsed:.1f}s")


def test_criterion_3_schedule_exactness():
    """Exploration anneal hits its anchor values to machine precision."""
    cfg = TrainConfig()  # anneal 1 -> 0.02 over 2400 episodes
    assert epsilon_schedule(0, cfg) == 1.0
    assert abs(epsilon_schedule(1200, cfg) - 0.51) <= 1e-15
    for episode in (2400, 2401, 3000, 10_000):
        assert abs(epsilon_schedule(episode, cfg) - 0.02) <= 1e-15
    _report(3, "anchors 1.0 / 0.51 / 0.02 exact to 1e-15")


def test_criterion_4_upper_bound_dominance():
    """The interference-free V2I capacity dominates every scheme's stepped
    capacity on the same channel draws: 200 episodes, zero violations."""
    sim = SimConfig()  # default full-scale configuration, M = K = 4
    reward = RewardParams(1e-7, 1e-6, 1e7)
    obs_dim = observation_size(sim.m_links, sim.k_links)
    dims = (obs_dim, 64, 32, sim.num_actions)
    rng = np.random.default_rng(7)
    marl_nets = [QNetwork.init(dims, rng) for _ in range(sim.k_links)]
    sarl_net = QNetwork.init((obs_dim - 2, 64, 32, sim.num_actions), rng)
    schemes = {
        "random": RandomPolicy(),
        "maxv2v": MaxV2VPolicy(sim),
        "marl": GreedyMarlPolicy(marl_nets),
        "sarl": GreedySarlPolicy(sarl_net),
        "nov2v": SilentPolicy(),
    }
    upper_ref = None
    checked = 0
    for name, policy in schemes.items():
        res = evaluate(policy, sim, 200, TRAIN_PAYLOAD_BYTES, seed=404, reward=reward)
        assert np.all(res.v2i_sum_bps <= res.upper_sum_bps * (1.0 + 1e-12)), name
        if upper_ref is None:
            upper_ref = res.upper_sum_bps
        else:  # same channel draws for every scheme
            assert np.array_equal(res.upper_sum_bps, upper_ref)
        checked += res.v2i_sum_bps.size
    _report(4, f"{checked} scheme-steps dominated, zero violations")


def test_criterion_5_maxv2v_dominance():
    """Exhaustive search beats 1000 random joint actions on each of 100
    random steps (K = M = 2), zero violations."""
    sim = SimConfig(m_links=2, k_links=2, num_vehicles=8)
    reward = RewardParams(1e-7, 1e-6, 1e7)
    env = Env.from_seed(sim, 55)
    rng = np.random.default_rng(55)

    def joint_rate(actions):
        p = np.where(env.delivered, 0.0, env.power_levels_mw[actions % sim.num_power_levels])
        out = link_rates(
            env.g_vv, env.g_vb, env.g_ib, env.g_iv,
            actions // sim.num_power_levels, p,
            env.pc_mw, env.noise_bs_mw, env.noise_veh_mw, sim.subband_hz,
        )
        return float(out[4].sum())

    for step in range(100):
        if env.step_t >= sim.steps_per_episode:
            env.reset(step, refresh_large_scale=True)
        best = max_v2v_exhaustive(env)
        best_rate = joint_rate(best)
        for _ in range(1000):
            cand = rng.integers(0, sim.num_actions, sim.k_links)
            assert best_rate >= joint_rate(cand) * (1.0 - 1e-12)
        env.step(rng.integers(0, sim.num_actions, sim.k_links), reward)
    _report(5, "100 steps x 1000 random joint actions, zero violations")


def test_criterion_6_training_convergence(desk_model):
    """Desk-scale training (M=K=2, B=2x1060 bytes, 1500 episodes): mean
    return over the last 100 episodes exceeds the first 100 by >= 20%."""
    sim, tc, reward, result, elapsed = desk_model
    assert tc.train_payload_bytes == TRAIN_PAYLOAD_BYTES
    returns = result.returns()
    first = returns[:100].mean()
    last = returns[-100:].mean()
    improvement = last / first - 1.0
    assert elapsed < 1800.0, f"training took {elapsed:.0f}s (budget 30 min)"
    assert improvement >= 0.20, f"return improved only {improvement:.1%}"
    _report(6, f"return {first:.1f} -> {last:.1f} (+{improvement:.1%}), {elapsed:.0f}s, seed {DESK_TRAIN_SEED}")


def test_criterion_7_ordering_claim(desk_model):
    """Trained agents beat the random baseline on 200 paired evaluation
    episodes: delivery probability by >= 0.10 absolute, V2I capacity on mean."""
    sim, tc, reward, result, _ = desk_model
    policy = GreedyMarlPolicy(result.nets)
    marl = evaluate(
        policy, sim, 200, TRAIN_PAYLOAD_BYTES, DESK_EVAL_SEED, reward,
        fingerprint_epsilon=tc.epsilon_final,
    )
    rand = evaluate(RandomPolicy(), sim, 200, TRAIN_PAYLOAD_BYTES, DESK_EVAL_SEED, reward)
    assert np.array_equal(marl.upper_sum_bps, rand.upper_sum_bps)  # paired draws
    margin = marl.delivery_probability - rand.delivery_probability
    assert margin >= 0.10, (
        f"delivery {marl.delivery_probability:.3f} vs {rand.delivery_probability:.3f}"
    )
    assert marl.mean_v2i_sum_bps >= rand.mean_v2i_sum_bps, (
        f"v2i {marl.mean_v2i_sum_bps:.3e} vs {rand.mean_v2i_sum_bps:.3e}"
    )
    _report(
        7,
        f"delivery {marl.delivery_probability:.3f} vs {rand.delivery_probability:.3f} "
        f"(+{margin:.3f}), v2i {marl.mean_v2i_sum_bps / 1e6:.2f} vs "
        f"{rand.mean_v2i_sum_bps / 1e6:.2f} Mb/s, eval seed {DESK_EVAL_SEED}",
    )


def test_criterion_8_sweep_determinism(tmp_path):
    """Two sweep runs with an identical spec and seed produce byte-identical
    metrics CSVs."""
    from v2xrl.cli import main

    cfg = tmp_path / "sweep.cfg"
    cfg.write_text(
        "scheme = random\nseed = 12\neval_episodes = 6\npayload_multipliers = 1, 2\n"
        "sim.m_links = 2\nsim.k_links = 2\nsim.num_vehicles = 8\n"
    )
    assert main(["sweep", "--config", str(cfg), "--out", str(tmp_path / "a")]) == 0
    assert main(["sweep", "--config", str(cfg), "--out", str(tmp_path / "b")]) == 0
    a = (tmp_path / "a" / "metrics.csv").read_bytes()
    b = (tmp_path / "b" / "metrics.csv").read_bytes()
    assert a == b
    _report(8, f"metrics.csv byte-identical across runs ({len(a)} bytes)")


def test_criterion_9_distribution_checks():
    """Fast fading is unit-mean to 1% at 1e6 draws; the shadowing process is
    stationary with the configured standard deviation to 5%."""
    rng = np.random.default_rng(77)
    h = sample_fast_fading(rng, 1_000_000)
    assert 0.99 <= h.mean() <= 1.01

    std = 8.0
    value = 0.0
    trace = np.empty(100_000)
    for i in range(trace.size):
        value = float(update_shadowing(value, 1.0, std, 10.0, rng))
        trace[i] = value
    measured = trace[1000:].std(ddof=1)
    assert abs(measured - std) / std <= 0.05
    _report(9, f"fading mean {h.mean():.4f}, shadowing std {measured:.3f} dB vs {std}")
