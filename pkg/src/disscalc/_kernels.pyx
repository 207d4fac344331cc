# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops. Semantics are mirrored exactly by ``_kernels_py``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin, exp, sqrt, M_PI

cnp.import_array()

cdef double DELTA_CARD = 1e-4

# coefficients of (e^{iw} - 1)/w = sum_{k=1}^{12} i^k w^{k-1} / k!, lowest order first
cdef double complex[12] _TAYLOR
_TAYLOR[:] = [1j, -1.0 / 2, -1j / 6, 1.0 / 24, 1j / 120, -1.0 / 720,
              -1j / 5040, 1.0 / 40320, 1j / 362880, -1.0 / 3628800,
              -1j / 39916800, 1.0 / 479001600]


cdef inline double complex _cexp(double complex z) noexcept nogil:
    cdef double r = exp(z.real)
    return r * cos(z.imag) + 1j * r * sin(z.imag)


cdef inline double complex _card(double complex e, double complex w) noexcept nogil:
    # (e^{iw} - 1)/w given e = e^{i s z}; Taylor branch inside DELTA_CARD
    cdef double complex acc = 0
    cdef int k
    cdef double n2 = w.real * w.real + w.imag * w.imag
    cdef double er, ei, inv
    if n2 < DELTA_CARD * DELTA_CARD:
        for k in range(11, -1, -1):
            acc = acc * w + _TAYLOR[k]
        return acc
    # explicit (e - 1) * conj(w) / |w|^2 avoids the scaled complex division
    er = e.real - 1.0
    ei = e.imag
    inv = 1.0 / n2
    acc.real = (er * w.real + ei * w.imag) * inv
    acc.imag = (ei * w.real - er * w.imag) * inv
    return acc


def cardinal_values(z, double s, long N):
    """Matrix ``out[p, j+N] = (e^{i s z_p} - 1)/(s z_p - 2 pi j)`` for ``|j| <= N``."""
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] zz = np.ascontiguousarray(z, dtype=np.complex128).ravel()
    cdef Py_ssize_t P = zz.shape[0], J = 2 * N + 1, p, idx
    out = np.empty((P, J), dtype=np.complex128)
    cdef double complex[:, ::1] o = out
    cdef double complex e, w, sz
    cdef double complex I = 1j
    with nogil:
        for p in range(P):
            sz = s * zz[p]
            e = _cexp(I * sz)
            for idx in range(J):
                w = sz - 2.0 * M_PI * (idx - N)
                o[p, idx] = _card(e, w)
    return out


def cardinal_sumsq(x, double s, long N):
    """``sum_{|j|<=N} |C_j(x_p)|^2`` for real points."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] xx = np.ascontiguousarray(x, dtype=np.float64).ravel()
    cdef Py_ssize_t P = xx.shape[0], p, idx
    out = np.empty(P, dtype=np.float64)
    cdef double[::1] o = out
    cdef double complex e, c
    cdef double w, acc, num
    with nogil:
        for p in range(P):
            e = cos(s * xx[p]) + 1j * sin(s * xx[p])
            # |e - 1|^2 is shared by the whole row for real points
            num = (e.real - 1.0) * (e.real - 1.0) + e.imag * e.imag
            acc = 0.0
            for idx in range(2 * N + 1):
                w = s * xx[p] - 2.0 * M_PI * (idx - N)
                if w < DELTA_CARD and w > -DELTA_CARD:
                    c = _card(e, w)
                    acc += c.real * c.real + c.imag * c.imag
                else:
                    acc += num / (w * w)
            o[p] = acc
    return out


def cardinal_series(samples, double s, z):
    """``sum_n samples[n+N] (e^{isz}-1)/(i(sz-2 pi n))``."""
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] smp = np.ascontiguousarray(samples, dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] zz = np.ascontiguousarray(z, dtype=np.complex128).ravel()
    cdef Py_ssize_t J = smp.shape[0], N = (J - 1) // 2, P = zz.shape[0], p, idx
    out = np.empty(P, dtype=np.complex128)
    cdef double complex[::1] o = out
    cdef double complex e, w, sz, acc
    cdef double complex I = 1j
    with nogil:
        for p in range(P):
            sz = s * zz[p]
            e = _cexp(I * sz)
            acc = 0
            for idx in range(J):
                w = sz - 2.0 * M_PI * (idx - N)
                acc = acc + smp[idx] * _card(e, w)
            o[p] = acc / I
    return out


def loewner_apply(u, du, Y):
    """Apply the Loewner matrix ``G[j,k] = (u_j-u_k)/(j-k)``, ``G[j,j] = du_j``.

    ``Y`` has shape (J, m); the result ``U[j] = sum_k G[j,k] Y[k]`` has the
    same shape. The off-diagonal part is split into two real Toeplitz sums so
    the inner loop runs over contiguous real storage.
    """
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] uu = np.ascontiguousarray(u, dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] dd = np.ascontiguousarray(du, dtype=np.complex128)
    Yc = np.ascontiguousarray(Y, dtype=np.complex128)
    if Yc.ndim != 2 or Yc.shape[0] != uu.shape[0] or dd.shape[0] != uu.shape[0]:
        raise ValueError("shape mismatch in loewner_apply")
    cdef Py_ssize_t J = Yc.shape[0], m = Yc.shape[1], m2 = 2 * Yc.shape[1]
    uY = uu[:, None] * Yc
    cdef double[:, ::1] yr = Yc.view(np.float64)
    cdef double[:, ::1] uyr = uY.view(np.float64)
    out = np.empty((J, m), dtype=np.complex128)
    cdef double[:, ::1] orr = out.view(np.float64)
    cdef Py_ssize_t B = 16
    acc_arr = np.zeros((2 * B, m2))
    cdef double[:, ::1] acc = acc_arr
    # recip[J - 1 + d] = 1/d, zero at d = 0
    recip_arr = np.zeros(2 * J + 1)
    cdef double[::1] recip = recip_arr
    cdef double* rc
    cdef Py_ssize_t j0, j, jend, k, c
    cdef double h
    cdef double complex a1, a2, r
    cdef double* y0
    cdef double* uy0
    cdef double* pacc
    cdef double* p1
    cdef double* p2
    cdef const double* yk
    cdef const double* uyk
    if J == 0:
        return out
    y0 = &yr[0, 0]
    uy0 = &uyr[0, 0]
    pacc = &acc[0, 0]
    rc = &recip[J - 1]
    with nogil:
        for k in range(1, J):
            rc[k] = 1.0 / <double>k
            rc[-k] = -1.0 / <double>k
        # rows are processed in blocks of B so each Y[k] is reused from cache;
        # per-row summation order over k is unchanged
        j0 = 0
        while j0 < J:
            jend = j0 + B
            if jend > J:
                jend = J
            for c in range(2 * B * m2):
                pacc[c] = 0.0
            for k in range(J):
                yk = y0 + k * m2
                uyk = uy0 + k * m2
                for j in range(j0, jend):
                    if k == j:
                        continue
                    h = rc[j - k]
                    p1 = pacc + (2 * (j - j0)) * m2
                    p2 = p1 + m2
                    for c in range(m2):
                        p1[c] += h * yk[c]
                        p2[c] += h * uyk[c]
            for j in range(j0, jend):
                p1 = pacc + (2 * (j - j0)) * m2
                p2 = p1 + m2
                for c in range(m):
                    a1 = p1[2 * c] + 1j * p1[2 * c + 1]
                    a2 = p2[2 * c] + 1j * p2[2 * c + 1]
                    r = uu[j] * a1 - a2 + dd[j] * (yr[j, 2 * c] + 1j * yr[j, 2 * c + 1])
                    orr[j, 2 * c] = r.real
                    orr[j, 2 * c + 1] = r.imag
            j0 = jend
    return out
