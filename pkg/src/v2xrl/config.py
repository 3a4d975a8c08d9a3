"""Experiment configuration: dataclasses, validation, key-value file parsing."""

from dataclasses import dataclass, field, fields

SCHEMES = ("marl", "sarl", "random", "maxv2v", "nov2v")

PAYLOAD_UNIT_BYTES = 1060


class ConfigError(ValueError):
    """A configuration value or file is invalid."""


@dataclass
class SimConfig:
    """Physical and protocol parameters of the simulated network.

    M V2I uplinks occupy orthogonal sub-bands (one each) at fixed power; K V2V
    sidelinks pick a sub-band and one of four power levels every coherence
    step. The area is an urban Manhattan grid with the height and width of the
    reference layout halved, so 3x3 blocks of 216.5 m x 125 m.
    """

    m_links: int = 4
    k_links: int = 4
    num_vehicles: int = 0  # 0 = m_links + k_links
    carrier_ghz: float = 2.0
    bandwidth_hz: float = 4e6
    bs_height_m: float = 25.0
    bs_gain_dbi: float = 8.0
    bs_noise_figure_db: float = 5.0
    veh_height_m: float = 1.5
    veh_gain_dbi: float = 3.0
    veh_noise_figure_db: float = 9.0
    speed_mps: float = 10.0
    v2i_power_dbm: float = 23.0
    v2v_power_levels_dbm: tuple = (23.0, 10.0, 5.0, -100.0)
    noise_dbm: float = -114.0
    time_budget_ms: float = 100.0
    step_ms: float = 1.0
    payload_bytes: int = 2 * PAYLOAD_UNIT_BYTES
    v2i_shadow_std_db: float = 8.0
    v2v_shadow_std_db: float = 3.0
    v2i_decorr_m: float = 50.0
    v2v_decorr_m: float = 10.0
    area_width_m: float = 649.5
    area_height_m: float = 375.0
    blocks_x: int = 3
    blocks_y: int = 3
    min_v2v_distance_m: float = 3.0
    repair_v2v_at_refresh: bool = True
    seed: int = 0

    def __post_init__(self):
        if isinstance(self.v2v_power_levels_dbm, list):
            self.v2v_power_levels_dbm = tuple(self.v2v_power_levels_dbm)
        if self.num_vehicles == 0:
            self.num_vehicles = self.m_links + self.k_links

    @property
    def subband_hz(self) -> float:
        return self.bandwidth_hz / self.m_links

    @property
    def steps_per_episode(self) -> int:
        return int(round(self.time_budget_ms / self.step_ms))

    @property
    def payload_bits(self) -> int:
        return 8 * self.payload_bytes

    @property
    def num_power_levels(self) -> int:
        return len(self.v2v_power_levels_dbm)

    @property
    def num_actions(self) -> int:
        return self.m_links * self.num_power_levels

    def validate(self):
        if self.m_links < 1:
            raise ConfigError("sim.m_links must be >= 1")
        if self.k_links < 1:
            raise ConfigError("sim.k_links must be >= 1")
        need = max(self.m_links, self.k_links + 1)
        if self.num_vehicles < need:
            raise ConfigError(
                f"sim.num_vehicles = {self.num_vehicles} cannot carry "
                f"{self.m_links} V2I and {self.k_links} V2V links (need >= {need})"
            )
        if self.carrier_ghz <= 0:
            raise ConfigError("sim.carrier_ghz must be positive")
        if self.bandwidth_hz <= 0:
            raise ConfigError("sim.bandwidth_hz must be positive")
        if self.veh_height_m <= 1.0:
            raise ConfigError("sim.veh_height_m must exceed 1 m (street-level model)")
        if self.bs_height_m <= self.veh_height_m:
            raise ConfigError("sim.bs_height_m must exceed sim.veh_height_m")
        if self.speed_mps < 0:
            raise ConfigError("sim.speed_mps must be non-negative")
        if self.time_budget_ms <= 0 or self.step_ms <= 0:
            raise ConfigError("sim.time_budget_ms and sim.step_ms must be positive")
        ratio = self.time_budget_ms / self.step_ms
        if abs(ratio - round(ratio)) > 1e-9:
            raise ConfigError("sim.time_budget_ms must be divisible by sim.step_ms")
        if self.payload_bytes <= 0:
            raise ConfigError("sim.payload_bytes must be positive")
        if not self.v2v_power_levels_dbm:
            raise ConfigError("sim.v2v_power_levels_dbm must not be empty")
        if not any(p == -100.0 for p in self.v2v_power_levels_dbm):
            raise ConfigError("sim.v2v_power_levels_dbm must include the -100 dBm (off) level")
        if self.v2i_shadow_std_db < 0 or self.v2v_shadow_std_db < 0:
            raise ConfigError("sim shadowing standard deviations must be non-negative")
        if self.v2i_decorr_m <= 0 or self.v2v_decorr_m <= 0:
            raise ConfigError("sim decorrelation distances must be positive")
        if self.area_width_m <= 0 or self.area_height_m <= 0:
            raise ConfigError("sim area dimensions must be positive")
        if self.blocks_x < 1 or self.blocks_y < 1:
            raise ConfigError("sim.blocks_x and sim.blocks_y must be >= 1")
        if self.min_v2v_distance_m <= 0:
            raise ConfigError("sim.min_v2v_distance_m must be positive")
        if self.seed < 0:
            raise ConfigError("sim.seed must be non-negative")


@dataclass
class TrainConfig:
    """Training-loop hyperparameters (exploration schedule, replay, optimizer)."""

    total_episodes: int = 3000
    anneal_episodes: int = 2400
    epsilon_final: float = 0.02
    gamma: float = 1.0
    target_sync_period: int = 4
    large_scale_refresh_period: int = 5
    batch_size: int = 32
    replay_capacity: int = 100_000
    updates_per_episode: int = 10
    learning_rate: float = 0.001
    rmsprop_decay: float = 0.9
    rmsprop_stabilizer: float = 1e-8
    hidden_layers: tuple = (500, 250, 120)
    train_payload_bytes: int = 2 * PAYLOAD_UNIT_BYTES

    def __post_init__(self):
        if isinstance(self.hidden_layers, list):
            self.hidden_layers = tuple(self.hidden_layers)

    def validate(self):
        if self.total_episodes < 1:
            raise ConfigError("train.total_episodes must be >= 1")
        if not 1 <= self.anneal_episodes <= self.total_episodes:
            raise ConfigError("train.anneal_episodes must lie in [1, train.total_episodes]")
        if not 0.0 <= self.epsilon_final <= 1.0:
            raise ConfigError("train.epsilon_final must lie in [0, 1]")
        if not 0.0 <= self.gamma <= 1.0:
            raise ConfigError("train.gamma must lie in [0, 1]")
        if self.target_sync_period < 1:
            raise ConfigError("train.target_sync_period must be >= 1")
        if self.large_scale_refresh_period < 1:
            raise ConfigError("train.large_scale_refresh_period must be >= 1")
        if self.batch_size < 1:
            raise ConfigError("train.batch_size must be >= 1")
        if self.replay_capacity < self.batch_size:
            raise ConfigError("train.replay_capacity must be >= train.batch_size")
        if self.updates_per_episode < 0:
            raise ConfigError("train.updates_per_episode must be non-negative")
        if self.learning_rate < 0:
            raise ConfigError("train.learning_rate must be non-negative")
        if not 0.0 <= self.rmsprop_decay < 1.0:
            raise ConfigError("train.rmsprop_decay must lie in [0, 1)")
        if self.rmsprop_stabilizer <= 0:
            raise ConfigError("train.rmsprop_stabilizer must be positive")
        if not self.hidden_layers or any(int(h) < 1 for h in self.hidden_layers):
            raise ConfigError("train.hidden_layers must be positive layer widths")
        if self.train_payload_bytes <= 0:
            raise ConfigError("train.train_payload_bytes must be positive")


@dataclass
class ExperimentSpec:
    """A full experiment: scheme, simulation/training parameters, evaluation plan."""

    scheme: str = "marl"
    seed: int = 0
    eval_episodes: int = 200
    payload_multipliers: tuple = (1, 2, 3, 4, 5, 6)
    output_dir: str = "runs"
    maxv2v_joint_cap: int = 10_000_000
    reward_lambda_c: float = 0.1
    reward_lambda_d: float = 0.9
    reward_beta_bps: float = 0.0  # 0 = calibrate from random rollouts
    reward_auto_scale: bool = True
    sim: SimConfig = field(default_factory=SimConfig)
    train: TrainConfig = field(default_factory=TrainConfig)

    def __post_init__(self):
        if isinstance(self.payload_multipliers, list):
            self.payload_multipliers = tuple(self.payload_multipliers)

    def validate(self):
        if self.scheme not in SCHEMES:
            raise ConfigError(f"scheme must be one of {SCHEMES}, got '{self.scheme}'")
        if self.seed < 0:
            raise ConfigError("seed must be non-negative")
        if self.eval_episodes < 1:
            raise ConfigError("eval_episodes must be >= 1")
        if not self.payload_multipliers or any(m < 1 for m in self.payload_multipliers):
            raise ConfigError("payload_multipliers must be positive integers")
        if self.maxv2v_joint_cap < 1:
            raise ConfigError("maxv2v_joint_cap must be >= 1")
        if self.reward_lambda_c <= 0 or self.reward_lambda_d <= 0:
            raise ConfigError("reward.lambda_c and reward.lambda_d must be positive")
        if self.reward_beta_bps < 0:
            raise ConfigError("reward.beta_bps must be non-negative (0 = auto)")
        if not self.reward_auto_scale and self.reward_beta_bps == 0:
            raise ConfigError("reward.beta_bps must be set when reward.auto_scale is false")
        self.sim.validate()
        self.train.validate()


# --- key-value config files -------------------------------------------------
#
# Format: one `key = value` per line, `#` comments, blank lines ignored.
# Sections are expressed with dotted prefixes (sim.*, train.*, reward.*);
# everything else is a top-level experiment key. Unknown keys are errors.

_TOP_KEYS = {
    "scheme": "scheme",
    "seed": "seed",
    "eval_episodes": "eval_episodes",
    "payload_multipliers": "payload_multipliers",
    "output_dir": "output_dir",
    "maxv2v_joint_cap": "maxv2v_joint_cap",
    "reward.lambda_c": "reward_lambda_c",
    "reward.lambda_d": "reward_lambda_d",
    "reward.beta_bps": "reward_beta_bps",
    "reward.auto_scale": "reward_auto_scale",
}


def _cast_like(key, default, raw):
    kind = type(default)
    try:
        if kind is bool:
            low = raw.lower()
            if low not in ("true", "false"):
                raise ValueError
            return low == "true"
        if kind is int:
            return int(raw)
        if kind is float:
            return float(raw)
        if kind is str:
            return raw
        if kind is tuple:
            elem = type(default[0]) if default else float
            parts = [tok.strip() for tok in raw.split(",") if tok.strip()]
            if not parts:
                raise ValueError
            return tuple(elem(tok) for tok in parts)
    except ValueError:
        raise ConfigError(f"bad value for key '{key}': {raw!r}") from None
    raise ConfigError(f"unsupported type for key '{key}'")


def _parse_lines(text, path):
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {line.strip()!r}")
        key, raw = stripped.split("=", 1)
        yield key.strip(), raw.strip()


def load_config(path) -> ExperimentSpec:
    """Parse a key-value experiment file; unset keys keep their defaults."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None

    spec = ExperimentSpec()
    sim_fields = {f.name: f for f in fields(SimConfig)}
    train_fields = {f.name: f for f in fields(TrainConfig)}

    for key, raw in _parse_lines(text, path):
        if key in _TOP_KEYS:
            attr = _TOP_KEYS[key]
            setattr(spec, attr, _cast_like(key, getattr(spec, attr), raw))
        elif key.startswith("sim."):
            name = key[4:]
            if name not in sim_fields:
                raise ConfigError(f"unknown config key '{key}'")
            setattr(spec.sim, name, _cast_like(key, getattr(spec.sim, name), raw))
        elif key.startswith("train."):
            name = key[6:]
            if name not in train_fields:
                raise ConfigError(f"unknown config key '{key}'")
            setattr(spec.train, name, _cast_like(key, getattr(spec.train, name), raw))
        else:
            raise ConfigError(f"unknown config key '{key}'")

    if spec.sim.num_vehicles == 0:
        spec.sim.num_vehicles = spec.sim.m_links + spec.sim.k_links
    spec.validate()
    return spec


def _format_value(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return ", ".join(_format_value(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def save_config(spec: ExperimentSpec, path):
    """Write the fully resolved spec; load_config() round-trips it exactly."""
    lines = ["# resolved experiment configuration"]
    for key, attr in _TOP_KEYS.items():
        lines.append(f"{key} = {_format_value(getattr(spec, attr))}")
    for f in fields(SimConfig):
        lines.append(f"sim.{f.name} = {_format_value(getattr(spec.sim, f.name))}")
    for f in fields(TrainConfig):
        lines.append(f"train.{f.name} = {_format_value(getattr(spec.train, f.name))}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
