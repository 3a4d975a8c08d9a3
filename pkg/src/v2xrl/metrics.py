"""Aggregate evaluation metrics and confidence intervals."""

from dataclasses import dataclass

import numpy as np

METRICS_HEADER = (
    "scheme,payload_bytes,episodes,v2i_sum_capacity_bps_mean,v2i_ci95,"
    "delivery_probability,delivery_ci95"
)


def normal_ci95_halfwidth(values) -> float:
    """Half-width of the normal-approximation 95% CI on the mean."""
    v = np.asarray(values, dtype=float)
    if v.size < 2:
        return 0.0
    return float(1.96 * v.std(ddof=1) / np.sqrt(v.size))


def wilson_ci95_halfwidth(successes: int, trials: int, z: float = 1.96) -> float:
    """Half-width of the Wilson score interval for a binomial proportion."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    p = successes / trials
    denom = 1.0 + z * z / trials
    half = z * np.sqrt(p * (1.0 - p) / trials + z * z / (4.0 * trials * trials)) / denom
    return float(half)


def delivery_success(delivered) -> tuple:
    """Per-link success booleans of one episode and the aggregate fraction."""
    d = np.asarray(delivered, dtype=bool)
    return d, float(d.mean())


@dataclass
class MetricsRow:
    scheme: str
    payload_bytes: int
    episodes: int
    v2i_sum_capacity_bps_mean: float
    v2i_ci95: float
    delivery_probability: float
    delivery_ci95: float

    def as_csv(self) -> str:
        return (
            f"{self.scheme},{self.payload_bytes},{self.episodes},"
            f"{self.v2i_sum_capacity_bps_mean!r},{self.v2i_ci95!r},"
            f"{self.delivery_probability!r},{self.delivery_ci95!r}"
        )


def metrics_from_eval(scheme, payload_bytes, result, v2i_series=None) -> MetricsRow:
    """Build a metrics row from an EvalResult.

    v2i_series overrides the per-step V2I sums (the silent upper-bound run
    reports the exact interference-free values instead of the stepped ones).
    """
    series = result.v2i_sum_bps if v2i_series is None else v2i_series
    per_episode = series.mean(axis=1)
    delivered = result.delivered
    return MetricsRow(
        scheme=scheme,
        payload_bytes=payload_bytes,
        episodes=delivered.shape[0],
        v2i_sum_capacity_bps_mean=float(per_episode.mean()),
        v2i_ci95=normal_ci95_halfwidth(per_episode),
        delivery_probability=float(delivered.mean()),
        delivery_ci95=wilson_ci95_halfwidth(int(delivered.sum()), delivered.size),
    )


def write_metrics_csv(rows, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(METRICS_HEADER + "\n")
        for row in rows:
            fh.write(row.as_csv() + "\n")


TRACE_HEADER = (
    "episode,step,link,subband,power_dbm,v2v_rate_bps,remaining_bits,"
    "v2i_sum_capacity_bps,reward"
)


def write_trace_csv(trace_rows, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(TRACE_HEADER + "\n")
        for episode, step, link, subband, power, rate, remaining, v2i, reward in trace_rows:
            fh.write(
                f"{episode},{step},{link},{subband},{power!r},{rate!r},"
                f"{remaining!r},{v2i!r},{reward!r}\n"
            )


TRAINING_LOG_HEADER = "episode,epsilon,return,mean_v2i_capacity,delivery_rate_so_far"


def write_training_log_csv(log_rows, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(TRAINING_LOG_HEADER + "\n")
        for row in log_rows:
            fh.write(
                f"{row.episode},{row.epsilon!r},{row.episode_return!r},"
                f"{row.mean_v2i_capacity_bps!r},{row.delivery_rate_so_far!r}\n"
            )
