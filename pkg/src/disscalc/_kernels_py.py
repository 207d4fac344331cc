"""Pure numpy versions of the compiled kernels in ``_kernels.pyx``."""

import numpy as np

DELTA_CARD = 1e-4
# i^k / k! for k = 1..12, lowest order first
_TAYLOR = np.array([1j ** k / np.prod(np.arange(1, k + 1, dtype=float)) for k in range(1, 13)])
_ROW_BLOCK = 256


def _card(e, w):
    w = np.asarray(w, dtype=complex)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = (e - 1.0) / w
    near = np.abs(w) < DELTA_CARD
    if np.any(near):
        wn = w[near]
        acc = np.zeros_like(wn)
        for c in _TAYLOR[::-1]:
            acc = acc * wn + c
        out[near] = acc
    return out


def cardinal_values(z, s, N):
    z = np.asarray(z, dtype=complex).ravel()
    js = np.arange(-N, N + 1)
    sz = s * z
    e = np.exp(1j * sz)[:, None]
    w = sz[:, None] - 2.0 * np.pi * js[None, :]
    return _card(np.broadcast_to(e, w.shape), w)


def cardinal_sumsq(x, s, N):
    x = np.asarray(x, dtype=float).ravel()
    out = np.empty(x.shape[0])
    for start in range(0, x.shape[0], 16):
        vals = cardinal_values(x[start:start + 16], s, N)
        out[start:start + 16] = np.sum(vals.real ** 2 + vals.imag ** 2, axis=1)
    return out


def cardinal_series(samples, s, z):
    samples = np.asarray(samples, dtype=complex)
    N = (samples.shape[0] - 1) // 2
    z = np.asarray(z, dtype=complex).ravel()
    out = np.empty(z.shape[0], dtype=complex)
    for start in range(0, z.shape[0], 16):
        vals = cardinal_values(z[start:start + 16], s, N)
        out[start:start + 16] = vals @ samples
    return out / 1j


def loewner_apply(u, du, Y):
    u = np.asarray(u, dtype=complex)
    du = np.asarray(du, dtype=complex)
    Y = np.ascontiguousarray(Y, dtype=complex)
    if Y.ndim != 2 or Y.shape[0] != u.shape[0] or du.shape[0] != u.shape[0]:
        raise ValueError("shape mismatch in loewner_apply")
    J, m = Y.shape
    yr = Y.view(float)
    uyr = np.ascontiguousarray(u[:, None] * Y).view(float)
    out = np.empty((J, m), dtype=complex)
    idx = np.arange(J)
    for start in range(0, J, _ROW_BLOCK):
        rows = idx[start:start + _ROW_BLOCK]
        d = (rows[:, None] - idx[None, :]).astype(float)
        with np.errstate(divide="ignore"):
            H = 1.0 / d
        H[d == 0] = 0.0
        a1 = (H @ yr).view(complex)
        a2 = (H @ uyr).view(complex)
        out[rows] = u[rows, None] * a1 - a2 + du[rows, None] * Y[rows]
    return out
