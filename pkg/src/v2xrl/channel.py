"""Propagation models: path loss, correlated shadowing, Rayleigh fading, link budgets.

All formula operations are stateless and accept scalars or numpy arrays.
Powers are handled in linear milliwatts once converted from dBm.
"""

import numpy as np

SPEED_OF_LIGHT_MPS = 3.0e8


def dbm_to_mw(power_dbm):
    return 10.0 ** (np.asarray(power_dbm, dtype=float) / 10.0)


def db_to_linear(gain_db):
    return 10.0 ** (np.asarray(gain_db, dtype=float) / 10.0)


def effective_noise_mw(noise_dbm, noise_figure_db):
    """Thermal noise power in mW inflated by the receiver noise figure."""
    return float(dbm_to_mw(noise_dbm + noise_figure_db))


def pathloss_v2i(distance_km):
    """Macro-cell uplink path loss in dB; distance is the 3-D tx-rx range in km."""
    d = np.asarray(distance_km, dtype=float)
    if np.any(d <= 0):
        raise ValueError("pathloss_v2i requires distance > 0 km")
    return 128.1 + 37.6 * np.log10(d)


def breakpoint_distance_m(carrier_ghz, h_tx_m=1.5, h_rx_m=1.5):
    """Dual-slope breakpoint from effective antenna heights (h - 1 m)."""
    return 4.0 * (h_tx_m - 1.0) * (h_rx_m - 1.0) * carrier_ghz * 1e9 / SPEED_OF_LIGHT_MPS


def pathloss_v2v(distance_m, carrier_ghz=2.0, h_tx_m=1.5, h_rx_m=1.5, min_distance_m=3.0):
    """Street-level LOS path loss in dB (dual-slope urban microcell model).

    Below min_distance_m the distance is clamped, which keeps the expression
    finite for co-located radios. The two slopes are continuous at the
    breakpoint to within rounding of the published coefficients.
    """
    d = np.maximum(np.asarray(distance_m, dtype=float), min_distance_m)
    d_bp = breakpoint_distance_m(carrier_ghz, h_tx_m, h_rx_m)
    fc_term = np.log10(carrier_ghz / 5.0)
    near = 22.7 * np.log10(d) + 41.0 + 20.0 * fc_term
    far = (
        40.0 * np.log10(d)
        + 9.45
        - 17.3 * np.log10(h_tx_m - 1.0)
        - 17.3 * np.log10(h_rx_m - 1.0)
        + 2.7 * fc_term
    )
    return np.where(d < d_bp, near, far)


def update_shadowing(prev_db, delta_d_m, std_db, decorr_m, rng):
    """One correlated-shadowing step.

    The new value is rho * prev + sqrt(1 - rho^2) * n with rho =
    exp(-delta_d / decorr) and n ~ Normal(0, std^2), so the process is
    stationary with standard deviation std_db.
    """
    prev = np.asarray(prev_db, dtype=float)
    rho = np.exp(-np.asarray(delta_d_m, dtype=float) / decorr_m)
    noise = rng.normal(0.0, std_db, size=prev.shape)
    return rho * prev + np.sqrt(1.0 - rho * rho) * noise


def sample_fast_fading(rng, size=None):
    """Unit-mean exponential power gains (squared-envelope Rayleigh fading)."""
    return rng.exponential(1.0, size=size)


def compose_gain(pathloss_db, shadow_db, tx_gain_dbi, rx_gain_dbi, h_linear):
    """Linear power gain: dB link budget converted to linear, times fast fading."""
    budget_db = tx_gain_dbi + rx_gain_dbi - np.asarray(pathloss_db, dtype=float) - shadow_db
    return db_to_linear(budget_db) * h_linear
