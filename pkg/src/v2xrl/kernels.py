"""Kernel backend selection: compiled extension when built, numpy otherwise.

Set V2XRL_FORCE_NUMPY=1 to skip the extension, or call set_backend() to
switch at runtime (used by the benchmark and the parity tests). Batched
training linear algebra intentionally stays on numpy/BLAS in both modes;
only the small per-step kernels benefit from compilation.
"""

import os

from . import _kernels_np

try:
    from . import _kernels as _compiled
except ImportError:
    _compiled = None

_impl = _kernels_np
_backend = "numpy"
if _compiled is not None and not os.environ.get("V2XRL_FORCE_NUMPY"):
    _impl = _compiled
    _backend = "cython"


def compiled_available() -> bool:
    return _compiled is not None


def current_backend() -> str:
    return _backend


def set_backend(name: str) -> str:
    """Select 'numpy', 'cython', or 'auto'; returns the backend now active."""
    global _impl, _backend
    if name == "auto":
        name = "cython" if _compiled is not None else "numpy"
    if name == "numpy":
        _impl, _backend = _kernels_np, "numpy"
    elif name == "cython":
        if _compiled is None:
            raise RuntimeError("compiled kernels are not available")
        _impl, _backend = _compiled, "cython"
    else:
        raise ValueError(f"unknown backend {name!r}")
    return _backend


def link_rates(g_vv, g_vb, g_ib, g_iv, subband, p_mw, pc_mw, noise_bs_mw, noise_veh_mw, w_hz):
    return _impl.link_rates(
        g_vv, g_vb, g_ib, g_iv, subband, p_mw, pc_mw, noise_bs_mw, noise_veh_mw, w_hz
    )


def qnet_forward_1(weights, biases, x):
    return _impl.qnet_forward_1(weights, biases, x)
