"""Shared test helpers: straight-line rate oracle and finite-difference gradients.

These deliberately avoid the library's vectorized code paths: the rate oracle
is plain-Python loop arithmetic over the defining expressions, and the
gradient oracle is central finite differences of the scalar loss.
"""

import math

import numpy as np

from v2xrl.qnet import loss


def oracle_rates(g_vv, g_vb, g_ib, g_iv, subband, p_mw, pc_mw, noise_bs, noise_veh, w_hz):
    """Straight-line evaluation of the SINR/interference/capacity expressions."""
    K = len(subband)
    M = len(g_ib)

    v2i_sinr = []
    for m in range(M):
        interf = 0.0
        for j in range(K):
            if subband[j] == m:
                interf += p_mw[j] * g_vb[j][m]
        v2i_sinr.append(pc_mw * g_ib[m] / (noise_bs + interf))

    interference = [[0.0] * M for _ in range(K)]
    for k in range(K):
        for m in range(M):
            total = pc_mw * g_iv[m][k]
            for j in range(K):
                if j != k and subband[j] == m:
                    total += p_mw[j] * g_vv[j][k][m]
            interference[k][m] = total

    v2v_sinr = []
    for k in range(K):
        m = subband[k]
        v2v_sinr.append(p_mw[k] * g_vv[k][k][m] / (noise_veh + interference[k][m]))

    v2i_cap = [w_hz * math.log2(1.0 + s) for s in v2i_sinr]
    v2v_cap = [w_hz * math.log2(1.0 + s) for s in v2v_sinr]
    return v2i_sinr, v2v_sinr, interference, v2i_cap, v2v_cap


def finite_diff_grads(net, obs, actions, targets, h=1e-5):
    """Central-difference gradients of the sum-squared error."""
    grads = []
    for layer in range(len(net.weights)):
        for arrays in (net.weights, net.biases):
            param = arrays[layer]
            g = np.empty_like(param)
            flat = param.ravel()
            gflat = g.ravel()
            for i in range(flat.size):
                saved = flat[i]
                flat[i] = saved + h
                up = loss(net, obs, actions, targets)
                flat[i] = saved - h
                down = loss(net, obs, actions, targets)
                flat[i] = saved
                gflat[i] = (up - down) / (2.0 * h)
            grads.append(g)
    # reshape into the (dW, db) pair list the analytic path returns
    return [(grads[2 * i], grads[2 * i + 1]) for i in range(len(net.weights))]


def gradcheck_relative_errors(analytic, numeric, floor=1e-4):
    """Per-parameter relative error with a small-magnitude floor.

    The floor keeps finite-difference rounding noise (absolute level ~1e-9 for
    these loss scales) from dominating parameters whose true gradient is tiny.
    """
    errs = []
    for (aw, ab), (nw, nb) in zip(analytic, numeric):
        for a, n in ((aw, nw), (ab, nb)):
            denom = np.maximum(np.maximum(np.abs(a), np.abs(n)), floor)
            errs.append(np.abs(a - n) / denom)
    return np.concatenate([e.ravel() for e in errs])


def sample_safe_gradcheck_case(dims, rng, batch=8, margin=1e-3):
    """Random net and batch whose pre-activations stay clear of ReLU kinks.

    Central differences across a kink measure the average of two slopes, so
    cases with any |pre-activation| < margin are resampled (seeded, so the
    overall construction stays deterministic).
    """
    from v2xrl.qnet import QNetwork

    for _ in range(200):
        net = QNetwork.init(dims, rng)
        for b in net.biases:
            b += rng.normal(0.0, 0.1, size=b.shape)
        obs = rng.normal(size=(batch, dims[0]))
        actions = rng.integers(0, dims[-1], size=batch)
        targets = rng.normal(0.0, 3.0, size=batch)

        a = obs
        ok = True
        for i, (w, bias) in enumerate(zip(net.weights, net.biases)):
            z = a @ w + bias
            if i != len(net.weights) - 1:
                if np.any(np.abs(z) < margin):
                    ok = False
                    break
                a = np.maximum(z, 0.0)
        if ok:
            return net, obs, actions, targets
    raise AssertionError("could not sample a kink-free gradient-check case")
