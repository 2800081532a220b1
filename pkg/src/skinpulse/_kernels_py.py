"""Pure-Python (numpy/scipy) implementations of the hot kernels.

Signatures mirror ``_ckernels.pyx`` exactly; ``threads`` is accepted and ignored.
"""
from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy import signal
from scipy.special import expit

from .ccnn import correlate3

# windows per vectorised chunk are capped so one chunk holds ~4M pixels
_CHUNK_PIXELS = 1 << 22


def ccnn_window_real_sums(stim, decay, coupling, m_kernel, w_kernel, weights, threads=1):
    """Real-part sums for every 3-frame window of ``stim`` (T, H, W).

    Window ``k`` runs a freshly reset full-frame lattice through frames
    ``k, k+1, k+2``. ``decay`` is ``(exp(-alpha_f), exp(-alpha_l),
    exp(-alpha_e))`` and ``coupling`` is ``(v_f, v_l, v_e, beta)``.
    """
    stim = np.asarray(stim, dtype=np.float64)
    T, H, W = stim.shape
    df, dl, de = decay
    vf, vl, ve, beta = coupling
    n_win = T - 2
    out = np.empty((n_win, H, W))
    chunk = max(1, _CHUNK_PIXELS // max(1, H * W))
    for start in range(0, n_win, chunk):
        ks = np.arange(start, min(n_win, start + chunk))
        F = np.zeros((len(ks), H, W))
        L = np.zeros_like(F)
        E = np.zeros_like(F)
        Y = np.zeros_like(F)
        acc = np.zeros_like(F)
        for step in range(3):
            S = stim[ks + step]
            F = df * F + vf * correlate3(Y, m_kernel) + S
            L = dl * L + vl * correlate3(Y, w_kernel)
            U = F * (1.0 + beta * L)
            E = de * E + ve * Y
            Y = expit(U - E)
            acc += weights[step] * Y
        out[ks] = acc
    return out


def ccnn_patch_real_sums(stim, decay, coupling, m_kernel, w_kernel, weights, threads=1):
    """Like :func:`ccnn_window_real_sums`, but every pixel runs its own
    isolated 3x3 lattice fed by its edge-replicated neighbourhood."""
    stim = np.asarray(stim, dtype=np.float64)
    T, H, W = stim.shape
    df, dl, de = decay
    vf, vl, ve, beta = coupling
    n_win = T - 2
    out = np.empty((n_win, H, W))
    padded = np.pad(stim, ((0, 0), (1, 1), (1, 1)), mode="edge")
    patches = sliding_window_view(padded, (3, 3), axis=(1, 2))  # (T, H, W, 3, 3)
    chunk = max(1, _CHUNK_PIXELS // max(1, 9 * H * W))
    for start in range(0, n_win, chunk):
        ks = np.arange(start, min(n_win, start + chunk))
        F = np.zeros((len(ks), H, W, 3, 3))
        L = np.zeros_like(F)
        E = np.zeros_like(F)
        Y = np.zeros_like(F)
        acc = np.zeros((len(ks), H, W))
        for step in range(3):
            S = patches[ks + step]
            F = df * F + vf * correlate3(Y, m_kernel) + S
            L = dl * L + vl * correlate3(Y, w_kernel)
            U = F * (1.0 + beta * L)
            E = de * E + ve * Y
            Y = expit(U - E)
            acc += weights[step] * Y[..., 1, 1]
        out[ks] = acc
    return out


def sos_filter_rows(sos, zi, x, padlen, zero_phase=True, threads=1):
    """Filter each row of ``x`` with a second-order-section cascade.

    Zero-phase mode is forward-backward with odd extension of ``padlen``
    samples and steady-state initial conditions, i.e. ``scipy.signal.sosfiltfilt``.
    Single-pass mode seeds the state with ``zi * x[:, 0]``.
    """
    x = np.asarray(x, dtype=np.float64)
    if zero_phase:
        return signal.sosfiltfilt(sos, x, axis=-1, padtype="odd", padlen=padlen)
    zi0 = zi[:, None, :] * x[None, :, :1]
    y, _ = signal.sosfilt(sos, x, axis=-1, zi=zi0)
    return y
