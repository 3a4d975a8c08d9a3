"""Episodic spectrum-sharing environment.

Holds the channel state for all link pairs, applies joint V2V actions,
computes SINRs / capacities / interference, tracks per-link payload and time
budgets, and assembles per-agent observations. One instance is single-writer
(reset/step mutate it in call order); observe() is read-only.
"""

import dataclasses
from dataclasses import dataclass

import numpy as np

from . import channel
from .config import SimConfig
from .kernels import link_rates
from .topology import drop_vehicles, nearest_neighbor_pairs, update_positions

# dB values entering observations are divided by this to keep inputs bounded
OBS_DB_SCALE = 120.0

_GAIN_FLOOR = 1e-36  # numerical guard before dB conversion


def observation_size(m_links: int, k_links: int) -> int:
    """Observation length: M(K+3) channel/interference entries plus
    remaining payload, remaining time, and the (episode, epsilon) fingerprint."""
    return m_links * (k_links + 3) + 4


@dataclass(frozen=True)
class Action:
    subband: int
    power_idx: int


def encode_action(subband, power_idx, num_levels):
    return subband * num_levels + power_idx


def decode_action(flat, num_levels):
    return flat // num_levels, flat % num_levels


@dataclass
class RewardParams:
    """Weights of the shared step reward and the post-delivery bonus rate.

    The reward is lambda_c * sum_m C_m + lambda_d * sum_k L_k where L_k is the
    link's effective rate until its payload is delivered and beta_bps after.
    """

    lambda_c: float
    lambda_d: float
    beta_bps: float

    def validate(self):
        if self.lambda_c <= 0 or self.lambda_d <= 0:
            raise ValueError("reward weights must be positive")
        if self.beta_bps <= 0:
            raise ValueError("beta_bps must be positive")


@dataclass
class LargeScaleState:
    """Path loss and shadowing (dB) per ordered pair family; frequency independent."""

    pl_vv: np.ndarray  # (K, K) tx of link j -> rx of link k
    shadow_vv: np.ndarray
    pl_vb: np.ndarray  # (K,) link tx -> BS
    shadow_vb: np.ndarray
    pl_ib: np.ndarray  # (M,) V2I vehicle -> BS
    shadow_ib: np.ndarray
    pl_iv: np.ndarray  # (M, K) V2I vehicle -> rx of link k
    shadow_iv: np.ndarray

    def alpha_db(self, family: str) -> np.ndarray:
        """Large-scale power gain in dB (antenna gains excluded)."""
        pl = getattr(self, f"pl_{family}")
        shadow = getattr(self, f"shadow_{family}")
        return -(pl + shadow)


@dataclass
class FastFadingState:
    """Per-pair, per-band small-scale power gains (unit-mean exponential)."""

    h_vv: np.ndarray  # (K, K, M)
    h_vb: np.ndarray  # (K, M)
    h_ib: np.ndarray  # (M,) band m for V2I link m
    h_iv: np.ndarray  # (M, K) band m for V2I tx m


@dataclass
class EnvState:
    """Inspection snapshot of the mutable environment."""

    large_scale: LargeScaleState
    fast_fading: FastFadingState
    remaining_bits: np.ndarray
    remaining_ms: np.ndarray
    step_t: int
    delivered: np.ndarray


@dataclass
class StepOutcome:
    reward: float
    v2i_capacity_bps: np.ndarray  # (M,)
    v2v_rate_bps: np.ndarray  # (K,) effective rate on the chosen band
    interference_mw: np.ndarray  # (K, M) measured at each V2V receiver
    v2i_sinr: np.ndarray
    v2v_sinr: np.ndarray
    done: bool


class Env:
    """Single-writer episodic environment over a fixed vehicle drop.

    Channel stream consumption is independent of the actions taken, so two
    environments built from identical streams see bit-identical channel draws
    regardless of the policies driving them (paired-evaluation contract).
    """

    def __init__(self, cfg: SimConfig, rng_topology, rng_shadow, rng_fading):
        cfg.validate()
        self.cfg = cfg
        self._rng_topology = rng_topology
        self._rng_shadow = rng_shadow
        self._rng_fading = rng_fading

        self.noise_bs_mw = channel.effective_noise_mw(cfg.noise_dbm, cfg.bs_noise_figure_db)
        self.noise_veh_mw = channel.effective_noise_mw(cfg.noise_dbm, cfg.veh_noise_figure_db)
        self.pc_mw = float(channel.dbm_to_mw(cfg.v2i_power_dbm))
        self.power_levels_mw = channel.dbm_to_mw(np.array(cfg.v2v_power_levels_dbm))

        self.topo = drop_vehicles(cfg, rng_topology)
        self._peers = [
            np.array([j for j in range(cfg.k_links) if j != k], dtype=np.int64)
            for k in range(cfg.k_links)
        ]
        self.large = self._initial_large_scale()
        self._compose_large_scale()

        self.remaining_bits = np.full(cfg.k_links, float(cfg.payload_bits))
        self.delivered = np.zeros(cfg.k_links, dtype=bool)
        self.step_t = 0
        self.last_interference_mw = np.full((cfg.k_links, cfg.m_links), self.noise_veh_mw)
        self._last_refresh_episode = 0
        self._redraw_fading()

    @classmethod
    def from_seed(cls, cfg: SimConfig, seed=None):
        from .rngstreams import SeedHierarchy

        h = SeedHierarchy(cfg.seed if seed is None else seed)
        return cls(cfg, h.stream("topology"), h.stream("shadowing"), h.stream("fading"))

    # --- channel state ------------------------------------------------------

    def _distances(self):
        pos = self.topo.positions
        tx = pos[self.topo.v2v_pairs[:, 0]]
        rx = pos[self.topo.v2v_pairs[:, 1]]
        iv = pos[self.topo.v2i_vehicles]
        bs = self.topo.bs_position
        d_vv = np.hypot(*(tx[:, None, :] - rx[None, :, :]).transpose(2, 0, 1))
        d_vb = np.hypot(*(tx - bs).T)
        d_ib = np.hypot(*(iv - bs).T)
        d_iv = np.hypot(*(iv[:, None, :] - rx[None, :, :]).transpose(2, 0, 1))
        return d_vv, d_vb, d_ib, d_iv

    def _pathloss(self):
        cfg = self.cfg
        d_vv, d_vb, d_ib, d_iv = self._distances()
        dz = cfg.bs_height_m - cfg.veh_height_m

        def to_bs(d_horizontal):
            return channel.pathloss_v2i(np.sqrt(d_horizontal**2 + dz**2) / 1000.0)

        def street(d):
            return channel.pathloss_v2v(
                d, cfg.carrier_ghz, cfg.veh_height_m, cfg.veh_height_m, cfg.min_v2v_distance_m
            )

        return street(d_vv), to_bs(d_vb), to_bs(d_ib), street(d_iv)

    def _initial_large_scale(self):
        cfg = self.cfg
        pl_vv, pl_vb, pl_ib, pl_iv = self._pathloss()
        rng = self._rng_shadow
        return LargeScaleState(
            pl_vv=pl_vv,
            shadow_vv=rng.normal(0.0, cfg.v2v_shadow_std_db, pl_vv.shape),
            pl_vb=pl_vb,
            shadow_vb=rng.normal(0.0, cfg.v2i_shadow_std_db, pl_vb.shape),
            pl_ib=pl_ib,
            shadow_ib=rng.normal(0.0, cfg.v2i_shadow_std_db, pl_ib.shape),
            pl_iv=pl_iv,
            shadow_iv=rng.normal(0.0, cfg.v2v_shadow_std_db, pl_iv.shape),
        )

    def _refresh_large_scale(self, episode_index):
        """Move vehicles and evolve correlated shadowing; recompute path loss.

        Receivers are re-paired to each transmitter's current nearest
        neighbor (links form between neighboring vehicles); shadowing
        history is kept for surviving pairs and drawn fresh for new ones.
        """
        cfg = self.cfg
        periods = max(episode_index - self._last_refresh_episode, 1)
        dt_s = periods * cfg.time_budget_ms / 1000.0
        old = self.topo.positions.copy()
        self.topo = update_positions(self.topo, dt_s, self._rng_topology)
        disp = np.hypot(*(self.topo.positions - old).T)

        rx_changed = np.zeros(cfg.k_links, dtype=bool)
        if cfg.repair_v2v_at_refresh:
            new_pairs = nearest_neighbor_pairs(self.topo)
            rx_changed = new_pairs[:, 1] != self.topo.v2v_pairs[:, 1]
            self.topo = dataclasses.replace(self.topo, v2v_pairs=new_pairs)

        tx_move = disp[self.topo.v2v_pairs[:, 0]]
        rx_move = disp[self.topo.v2v_pairs[:, 1]]
        iv_move = disp[self.topo.v2i_vehicles]

        ls = self.large
        rng = self._rng_shadow
        shadow_vv = channel.update_shadowing(
            ls.shadow_vv, tx_move[:, None] + rx_move[None, :],
            cfg.v2v_shadow_std_db, cfg.v2v_decorr_m, rng,
        )
        shadow_vb = channel.update_shadowing(
            ls.shadow_vb, tx_move, cfg.v2i_shadow_std_db, cfg.v2i_decorr_m, rng
        )
        shadow_ib = channel.update_shadowing(
            ls.shadow_ib, iv_move, cfg.v2i_shadow_std_db, cfg.v2i_decorr_m, rng
        )
        shadow_iv = channel.update_shadowing(
            ls.shadow_iv, iv_move[:, None] + rx_move[None, :],
            cfg.v2v_shadow_std_db, cfg.v2v_decorr_m, rng,
        )
        if rx_changed.any():  # no AR(1) history for freshly formed pairs
            cols = np.where(rx_changed)[0]
            shadow_vv[:, cols] = rng.normal(0.0, cfg.v2v_shadow_std_db, (cfg.k_links, cols.size))
            shadow_iv[:, cols] = rng.normal(0.0, cfg.v2v_shadow_std_db, (cfg.m_links, cols.size))
        pl_vv, pl_vb, pl_ib, pl_iv = self._pathloss()
        self.large = LargeScaleState(
            pl_vv, shadow_vv, pl_vb, shadow_vb, pl_ib, shadow_ib, pl_iv, shadow_iv
        )
        self._compose_large_scale()
        self._last_refresh_episode = episode_index

    def _compose_large_scale(self):
        """Cache linear large-scale gains including antenna gains."""
        cfg = self.cfg
        ls = self.large
        g_veh = 2.0 * cfg.veh_gain_dbi
        g_bs = cfg.veh_gain_dbi + cfg.bs_gain_dbi
        self._lin_vv = channel.db_to_linear(g_veh - ls.pl_vv - ls.shadow_vv)
        self._lin_vb = channel.db_to_linear(g_bs - ls.pl_vb - ls.shadow_vb)
        self._lin_ib = channel.db_to_linear(g_bs - ls.pl_ib - ls.shadow_ib)
        self._lin_iv = channel.db_to_linear(g_veh - ls.pl_iv - ls.shadow_iv)

    def _redraw_fading(self):
        cfg = self.cfg
        K, M = cfg.k_links, cfg.m_links
        rng = self._rng_fading
        self.fading = FastFadingState(
            h_vv=channel.sample_fast_fading(rng, (K, K, M)),
            h_vb=channel.sample_fast_fading(rng, (K, M)),
            h_ib=channel.sample_fast_fading(rng, M),
            h_iv=channel.sample_fast_fading(rng, (M, K)),
        )
        # composed per-step gains consumed by the rate kernel and observe()
        self.g_vv = self._lin_vv[:, :, None] * self.fading.h_vv
        self.g_vb = self._lin_vb[:, None] * self.fading.h_vb
        self.g_ib = self._lin_ib * self.fading.h_ib
        self.g_iv = self._lin_iv * self.fading.h_iv

    # --- episode API ----------------------------------------------------------

    @property
    def remaining_ms(self):
        left = self.cfg.time_budget_ms - self.step_t * self.cfg.step_ms
        return np.full(self.cfg.k_links, left)

    def state(self) -> EnvState:
        return EnvState(
            large_scale=self.large,
            fast_fading=self.fading,
            remaining_bits=self.remaining_bits.copy(),
            remaining_ms=self.remaining_ms,
            step_t=self.step_t,
            delivered=self.delivered.copy(),
        )

    def reset(self, episode_index=0, refresh_large_scale=True, e_frac=0.0, epsilon=1.0):
        """Start an episode: full payloads and budgets, fresh fast fading.

        Vehicle positions and large-scale fading advance only when
        refresh_large_scale is set (they are otherwise held fixed across
        episodes to stabilize training).
        """
        if refresh_large_scale:
            self._refresh_large_scale(episode_index)
        self.remaining_bits[:] = float(self.cfg.payload_bits)
        self.delivered[:] = False
        self.step_t = 0
        self.last_interference_mw[:] = self.noise_veh_mw
        self._redraw_fading()
        obs = [self.observe(k, e_frac, epsilon) for k in range(self.cfg.k_links)]
        return self.state(), obs

    def observe(self, k, e_frac, epsilon):
        """Local observation of agent k plus the (episode, epsilon) fingerprint.

        Channel entries are the current step's gains (delay-free local CSI);
        the interference entries are the previous step's measured values.
        """
        cfg = self.cfg

        def db_scaled(x):
            return 10.0 * np.log10(np.maximum(x, _GAIN_FLOOR)) / OBS_DB_SCALE

        own = self.g_vv[k, k, :]
        peers = self.g_vv[self._peers[k], k, :].reshape(-1)
        return np.concatenate(
            [
                db_scaled(own),
                db_scaled(peers),
                db_scaled(self.g_vb[k, :]),
                db_scaled(self.g_iv[:, k]),
                db_scaled(self.last_interference_mw[k, :]),
                [
                    self.remaining_bits[k] / cfg.payload_bits,
                    (cfg.time_budget_ms - self.step_t * cfg.step_ms) / cfg.time_budget_ms,
                    e_frac,
                    epsilon,
                ],
            ]
        )

    def step(self, flat_actions, reward: RewardParams) -> StepOutcome:
        """Apply the joint action for one coherence step.

        Decrements each undelivered link's payload by its delivered bits
        (floored at zero), pays beta for links that had already delivered,
        redraws fast fading for the next step, and reports done when the time
        budget is exhausted or every payload has been delivered.
        """
        cfg = self.cfg
        if self.step_t >= cfg.steps_per_episode:
            raise RuntimeError("episode time budget exhausted; call reset()")
        flat = np.asarray(flat_actions, dtype=np.int64)
        if flat.shape != (cfg.k_links,):
            raise ValueError(f"expected {cfg.k_links} actions, got shape {flat.shape}")
        if np.any((flat < 0) | (flat >= cfg.num_actions)):
            raise ValueError("action index out of range")

        subband = flat // cfg.num_power_levels
        power_idx = flat % cfg.num_power_levels
        # delivered links stop transmitting: no interference after delivery
        p_mw = np.where(self.delivered, 0.0, self.power_levels_mw[power_idx])

        v2i_sinr, v2v_sinr, interference, v2i_cap, v2v_cap = link_rates(
            self.g_vv, self.g_vb, self.g_ib, self.g_iv,
            subband, p_mw, self.pc_mw, self.noise_bs_mw, self.noise_veh_mw, cfg.subband_hz,
        )

        was_delivered = self.delivered.copy()
        per_link = np.where(was_delivered, reward.beta_bps, v2v_cap)
        step_reward = reward.lambda_c * float(v2i_cap.sum()) + reward.lambda_d * float(per_link.sum())

        self.remaining_bits = np.maximum(
            self.remaining_bits - v2v_cap * (cfg.step_ms / 1000.0), 0.0
        )
        self.delivered = was_delivered | (self.remaining_bits <= 0.0)
        self.last_interference_mw = interference
        self.step_t += 1
        done = self.step_t >= cfg.steps_per_episode or bool(self.delivered.all())
        self._redraw_fading()
        return StepOutcome(
            reward=step_reward,
            v2i_capacity_bps=v2i_cap,
            v2v_rate_bps=v2v_cap,
            interference_mw=interference,
            v2i_sinr=v2i_sinr,
            v2v_sinr=v2v_sinr,
            done=done,
        )

    # --- single-link helpers (straight formula evaluations) -------------------

    def compute_sinr_v2i(self, flat_actions, m) -> float:
        """Uplink SINR of V2I link m under the joint action (linear)."""
        cfg = self.cfg
        flat = np.asarray(flat_actions, dtype=np.int64)
        subband = flat // cfg.num_power_levels
        p_mw = np.where(self.delivered, 0.0, self.power_levels_mw[flat % cfg.num_power_levels])
        interf = float(np.sum(p_mw[subband == m] * self.g_vb[subband == m, m]))
        return float(self.pc_mw * self.g_ib[m] / (self.noise_bs_mw + interf))

    def compute_interference_v2v(self, flat_actions, k, m) -> float:
        """Interference power (mW) at the receiver of link k on band m."""
        cfg = self.cfg
        flat = np.asarray(flat_actions, dtype=np.int64)
        subband = flat // cfg.num_power_levels
        p_mw = np.where(self.delivered, 0.0, self.power_levels_mw[flat % cfg.num_power_levels])
        total = self.pc_mw * self.g_iv[m, k]
        for j in range(cfg.k_links):
            if j != k and subband[j] == m:
                total += p_mw[j] * self.g_vv[j, k, m]
        return float(total)


def compute_capacity(sinr_linear, w_hz):
    """Shannon capacity in bits/s for a linear SINR and bandwidth in Hz."""
    sinr = np.asarray(sinr_linear, dtype=float)
    if np.any(sinr < 0):
        raise ValueError("SINR must be non-negative")
    return w_hz * np.log2(1.0 + sinr)
