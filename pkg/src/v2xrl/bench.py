"""Micro-benchmarks: compiled kernels vs the numpy fallback.

Times the two hot kernels (per-step link rates, single-observation forward)
and a full greedy evaluation episode under each backend.
"""

import time

import numpy as np

from . import kernels
from .config import SimConfig
from .env import Env, RewardParams, observation_size
from .qnet import QNetwork
from .rngstreams import SeedHierarchy
from .trainer import GreedyMarlPolicy, evaluate


def _time_call(fn, repeats):
    fn()  # warm up
    start = time.perf_counter()
    for _ in range(repeats):
        fn()
    return (time.perf_counter() - start) / repeats


def _bench_kernels(repeats):
    cfg = SimConfig()
    env = Env.from_seed(cfg, 1)
    rng = SeedHierarchy(1).stream("bench")
    subband = rng.integers(0, cfg.m_links, cfg.k_links).astype(np.int64)
    p_mw = env.power_levels_mw[rng.integers(0, cfg.num_power_levels, cfg.k_links)]
    args = (
        env.g_vv, env.g_vb, env.g_ib, env.g_iv, subband, p_mw,
        env.pc_mw, env.noise_bs_mw, env.noise_veh_mw, cfg.subband_hz,
    )

    obs_dim = observation_size(cfg.m_links, cfg.k_links)
    net = QNetwork.init((obs_dim, 500, 250, 120, cfg.num_actions), rng)
    x = rng.normal(size=obs_dim)

    from . import _kernels_np

    rows = []
    impls = [("numpy", _kernels_np)]
    if kernels.compiled_available():
        from . import _kernels

        impls.append(("cython", _kernels))
    for name, impl in impls:
        rows.append((f"link_rates ({name})", _time_call(lambda: impl.link_rates(*args), repeats)))
        rows.append(
            (
                f"qnet_forward_1 ({name})",
                _time_call(lambda: impl.qnet_forward_1(net.weights, net.biases, x), repeats),
            )
        )
    return rows


def _bench_episode(repeats):
    cfg = SimConfig(m_links=2, k_links=2, bandwidth_hz=2e6, num_vehicles=8)
    rng = SeedHierarchy(2).stream("bench-nets")
    obs_dim = observation_size(cfg.m_links, cfg.k_links)
    nets = [QNetwork.init((obs_dim, 500, 250, 120, cfg.num_actions), rng) for _ in range(cfg.k_links)]
    policy = GreedyMarlPolicy(nets)
    reward = RewardParams(1e-6, 1e-6, 1.0)
    episodes = max(1, repeats // 400)

    rows = []
    saved = kernels.current_backend()
    names = ["numpy"] + (["cython"] if kernels.compiled_available() else [])
    try:
        for name in names:
            kernels.set_backend(name)
            start = time.perf_counter()
            evaluate(policy, cfg, episodes, cfg.payload_bytes, 3, reward)
            elapsed = (time.perf_counter() - start) / episodes
            rows.append((f"greedy episode ({name})", elapsed))
    finally:
        kernels.set_backend(saved)
    return rows


def run_benchmarks(repeats=2000) -> int:
    print(f"kernel backend selected at import: {kernels.current_backend()}")
    if not kernels.compiled_available():
        print("compiled extension not available; timing the numpy fallback only")
    rows = _bench_kernels(repeats) + _bench_episode(repeats)
    width = max(len(name) for name, _ in rows)
    print(f"{'benchmark'.ljust(width)}  mean time")
    for name, seconds in rows:
        print(f"{name.ljust(width)}  {seconds * 1e6:10.1f} us")

    by_kernel = {}
    for name, seconds in rows:
        kernel, backend = name.rsplit(" (", 1)
        by_kernel.setdefault(kernel, {})[backend.rstrip(")")] = seconds
    for kernel, times in by_kernel.items():
        if "cython" in times and "numpy" in times:
            print(f"{kernel}: compiled speedup x{times['numpy'] / times['cython']:.1f}")
    return 0
