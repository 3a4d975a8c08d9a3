"""Reference numpy implementations of the per-step hot kernels.

These are the pure-Python fallback for the compiled extension and the
behavioural reference in the backend parity tests.
"""

import numpy as np


def link_rates(g_vv, g_vb, g_ib, g_iv, subband, p_mw, pc_mw, noise_bs_mw, noise_veh_mw, w_hz):
    """SINRs, capacities and measured interference for one joint action.

    Shapes: g_vv (K, K, M) with [j, k, m] = gain from the transmitter of link
    j to the receiver of link k on band m; g_vb (K, M) link tx -> BS;
    g_ib (M,) V2I tx m -> BS on band m; g_iv (M, K) V2I tx m -> receiver of
    link k on band m. p_mw must already be 0 for links that do not transmit.

    Returns (v2i_sinr (M,), v2v_sinr (K,), interference (K, M),
    v2i_capacity (M,), v2v_capacity (K,)); capacities in bits/s.
    """
    K, _, M = g_vv.shape
    idx = np.arange(K)

    onehot = np.zeros((K, M))
    onehot[idx, subband] = 1.0
    pmask = p_mw[:, None] * onehot  # (K, M) transmit power per band

    v2i_interf = (pmask * g_vb).sum(axis=0)
    v2i_sinr = pc_mw * g_ib / (noise_bs_mw + v2i_interf)

    interference = np.empty((K, M))
    for k in range(K):
        peers = pmask.copy()
        peers[k] = 0.0
        interference[k] = pc_mw * g_iv[:, k] + np.einsum("jm,jm->m", peers, g_vv[:, k, :])

    diag_g = g_vv[idx, idx, :]  # (K, M) own-signal gains
    sig = p_mw * diag_g[idx, subband]
    v2v_sinr = sig / (noise_veh_mw + interference[idx, subband])

    v2i_capacity = w_hz * np.log2(1.0 + v2i_sinr)
    v2v_capacity = w_hz * np.log2(1.0 + v2v_sinr)
    return v2i_sinr, v2v_sinr, interference, v2i_capacity, v2v_capacity


def qnet_forward_1(weights, biases, x):
    """Action values for a single observation: affine + ReLU chain, linear head."""
    a = x
    last = len(weights) - 1
    for i, (w, b) in enumerate(zip(weights, biases)):
        a = a @ w + b
        if i != last:
            np.maximum(a, 0.0, out=a)
    return a
