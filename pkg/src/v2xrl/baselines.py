"""Comparison schemes: random allocation, exhaustive joint search, silent bound.

The learned schemes (marl/sarl) live in the trainer; this module provides the
non-learned policies plus the interference-free V2I capacity used as the
upper bound.
"""

import numpy as np


class CapacityError(RuntimeError):
    """The exhaustive joint-action space exceeds the configured cap."""


def silent_joint_action(cfg) -> np.ndarray:
    """The joint action where every link picks the -100 dBm (off) level."""
    off = cfg.v2v_power_levels_dbm.index(-100.0)
    return np.full(cfg.k_links, off, dtype=np.int64)  # sub-band 0, off level


def no_v2v_capacities(env) -> np.ndarray:
    """Per-band V2I capacities with all V2V transmissions disabled (bits/s)."""
    sinr = env.pc_mw * env.g_ib / env.noise_bs_mw
    return env.cfg.subband_hz * np.log2(1.0 + sinr)


class RandomPolicy:
    """Uniform sub-band and power selection for every link, every step."""

    def act(self, env, obs_list, rng):
        return rng.integers(0, env.cfg.num_actions, size=env.cfg.k_links, dtype=np.int64)


class SilentPolicy:
    """All links off: drives the no-V2V upper-bound runs."""

    def act(self, env, obs_list, rng):
        return silent_joint_action(env.cfg)


def max_v2v_joint_size(cfg) -> int:
    return cfg.num_actions**cfg.k_links


# joint-action enumeration constants per (K, A, L); shared by every step.
# A peer's effect on link k is fully described by a (L+1)-valued state:
# 0 = different band, 1+l = same band at power level l. The flat lookup
# index of each joint into the per-step rate tables is action-independent
# of the channel, so it is computed once and cached.
_ENUM_CACHE = {}


def _enumeration(k_links, num_actions, num_levels):
    key = (k_links, num_actions, num_levels)
    if key not in _ENUM_CACHE:
        grid = np.meshgrid(*([np.arange(num_actions, dtype=np.int64)] * k_links), indexing="ij")
        joints = np.stack(grid, axis=-1).reshape(-1, k_links)
        bands = joints // num_levels
        levels = joints % num_levels
        n_states = num_levels + 1
        table_index = []
        for k in range(k_links):
            idx = joints[:, k] * n_states ** (k_links - 1)
            stride = 1
            for j in range(k_links - 1, -1, -1):
                if j == k:
                    continue
                state = np.where(bands[:, j] == bands[:, k], 1 + levels[:, j], 0)
                idx = idx + state * stride
                stride *= n_states
            table_index.append(idx)
        _ENUM_CACHE[key] = (joints, table_index)
    return _ENUM_CACHE[key]


def max_v2v_exhaustive(env) -> np.ndarray:
    """Joint action maximizing the summed V2V rates for the current gains.

    Requires global channel knowledge (reads the full environment state).
    Ties break to the lowest flat joint index, with agent 0 as the most
    significant digit. Links that already delivered transmit nothing, so any
    action of theirs is equivalent and the tie-break parks them at 0.
    """
    cfg = env.cfg
    K = cfg.k_links
    A = cfg.num_actions
    L = cfg.num_power_levels
    joints, table_index = _enumeration(K, A, L)

    subband_of = np.arange(A, dtype=np.int64) // L
    power_of = env.power_levels_mw[np.arange(A) % L]
    power_act = np.where(env.delivered[:, None], 0.0, power_of[None, :])  # (K, A)

    idx = np.arange(K)
    diag_g = env.g_vv[idx, idx, :]  # (K, M) own-signal gains
    sig_table = power_act * diag_g[:, subband_of]  # (K, A) signal power per own action
    v2i_table = env.pc_mw * env.g_iv.T[:, subband_of]  # (K, A) V2I interference per own action

    # rate_table[k]: own action x peer-state combinations -> spectral efficiency
    n_states = L + 1
    total = np.zeros(len(joints))
    for k in range(K):
        interf = np.broadcast_to(
            v2i_table[k][:, None], (A, n_states ** (K - 1))
        ).copy()  # (A, states)
        stride = 1
        for j in range(K - 1, -1, -1):
            if j == k:
                continue
            # peer contribution per state: 0 off-band, power level * gain on-band
            gain = env.g_vv[j, k, :][subband_of]  # gain of j into rx k per own action
            p_eff = np.where(env.delivered[j], 0.0, env.power_levels_mw)  # (L,)
            contrib = np.concatenate(
                [np.zeros((A, 1)), gain[:, None] * p_eff[None, :]], axis=1
            )  # (A, n_states)
            state = (np.arange(n_states ** (K - 1)) // stride) % n_states
            interf += contrib[:, state]
            stride *= n_states
        rate = np.log2(1.0 + sig_table[k][:, None] / (env.noise_veh_mw + interf))
        total += rate.ravel()[table_index[k]]

    best = int(np.argmax(total))
    return joints[best].copy()


class MaxV2VPolicy:
    """Centralized exhaustive search over all (4M)^K joint actions per step."""

    def __init__(self, cfg, joint_cap: int = 10_000_000):
        size = max_v2v_joint_size(cfg)
        if size > joint_cap:
            raise CapacityError(
                f"joint action space has {size} entries, exceeding the cap of {joint_cap}"
            )

    def act(self, env, obs_list, rng):
        return max_v2v_exhaustive(env)
