"""Holomorphic functional calculus for dissipative matrices and their pairs.

Atoms map to ordinary matrix functions; ``f(L, M)`` for an exponential sum is
the separable sum ``sum c e^{iaL} e^{ibM}`` with ``L`` always on the left.
"""

from __future__ import annotations

import math

import numpy as np

from .besov import analytic_check
from .errors import NotAnalytic
from .matrix_core import as_array
from .scalar_functions import (
    AnalyticExpSum2D,
    Cardinal,
    CayleyInv,
    Const,
    Exp,
    OneVarFunction,
)

# degree-13 diagonal Pade coefficients and its scaling threshold
_PADE13 = (
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
    1187353796428800.0, 129060195264000.0, 10559470521600.0,
    670442572800.0, 33522128640.0, 1323241920.0, 40840800.0,
    960960.0, 16380.0, 182.0, 1.0,
)
_THETA13 = 5.371920351148152
QUAD_TOL = 1e-10


def expm(A) -> np.ndarray:
    """Matrix exponential by scaling and squaring with the [13/13] Pade approximant."""
    A = np.asarray(A, dtype=complex)
    n = A.shape[0]
    I = np.eye(n, dtype=complex)
    norm1 = np.linalg.norm(A, 1) if n else 0.0
    s = 0
    if norm1 > _THETA13:
        s = max(0, int(math.ceil(math.log2(norm1 / _THETA13))))
        A = A / 2.0**s
    b = _PADE13
    A2 = A @ A
    A4 = A2 @ A2
    A6 = A4 @ A2
    U = A @ (A6 @ (b[13] * A6 + b[11] * A4 + b[9] * A2)
             + b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * I)
    V = A6 @ (b[12] * A6 + b[10] * A4 + b[8] * A2) + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * I
    F = np.linalg.solve(V - U, V + U)
    for _ in range(s):
        F = F @ F
    return F


def delta_inv(sL) -> float:
    return 1e-6 * (1.0 + np.linalg.norm(sL, 2))


def _gauss_legendre_panels(fn, tol=QUAD_TOL, order=16, max_panels=1024):
    """Composite Gauss-Legendre on [0, 1], doubling panels until the change is below tol."""
    nodes, weights = np.polynomial.legendre.leggauss(order)

    def composite(panels):
        total = None
        edges = np.linspace(0.0, 1.0, panels + 1)
        for lo, hi in zip(edges[:-1], edges[1:]):
            half = 0.5 * (hi - lo)
            for x, w in zip(nodes, weights):
                term = w * half * fn(lo + half * (x + 1.0))
                total = term if total is None else total + term
        return total

    panels = 1
    prev = composite(panels)
    while panels < max_panels:
        panels *= 2
        cur = composite(panels)
        if np.max(np.abs(cur - prev)) <= tol * (1.0 + np.max(np.abs(cur))):
            return cur
        prev = cur
    return prev


def cardinal_quadrature(L, j: int, s: float) -> np.ndarray:
    """``i * int_0^1 e^{its L} e^{-2 pi i j t} dt``, valid at every shift."""
    L = as_array(L)
    return 1j * _gauss_legendre_panels(
        lambda t: expm(1j * t * s * L) * np.exp(-2j * math.pi * j * t)
    )


def cardinal_matrix(L, j: int, s: float) -> np.ndarray:
    L = as_array(L)
    n = L.shape[0]
    S = s * L - 2.0 * math.pi * j * np.eye(n)
    smin = np.linalg.svd(S, compute_uv=False)[-1] if n else 1.0
    if smin >= delta_inv(s * L):
        return np.linalg.solve(S, expm(1j * s * L) - np.eye(n))
    return cardinal_quadrature(L, j, s)


def cardinal_family(L, s: float, N: int) -> np.ndarray:
    """Stack ``C_j(L)`` for ``|j| <= N`` with shape ``(2N+1, n, n)``."""
    L = as_array(L)
    n = L.shape[0]
    js = np.arange(-N, N + 1)
    I = np.eye(n)
    E = expm(1j * s * L) - I
    S = s * L[None, :, :] - (2.0 * math.pi * js)[:, None, None] * I[None, :, :]
    smin = np.linalg.svd(S, compute_uv=False)[:, -1]
    ok = smin >= delta_inv(s * L)
    out = np.empty((js.size, n, n), dtype=complex)
    if np.any(ok):
        out[ok] = np.linalg.solve(S[ok], np.broadcast_to(E, (int(ok.sum()), n, n)))
    for idx in np.flatnonzero(~ok):
        out[idx] = cardinal_quadrature(L, int(js[idx]), s)
    return out


def apply_atom(atom, L) -> np.ndarray:
    L = as_array(L)
    n = L.shape[0]
    if isinstance(atom, Exp):
        return expm(1j * atom.omega * L)
    if isinstance(atom, Cardinal):
        return cardinal_matrix(L, atom.j, atom.s)
    if isinstance(atom, CayleyInv):
        return np.linalg.solve(np.eye(n) - 1j * L, np.eye(n, dtype=complex))
    if isinstance(atom, Const):
        return complex(atom.c) * np.eye(n, dtype=complex)
    raise TypeError(f"unknown atom {atom!r}")


def apply_one_var(phi: OneVarFunction, L, cache=None) -> np.ndarray:
    """``phi(L)``: products become matrix products in written order."""
    L = as_array(L)
    cache = {} if cache is None else cache
    out = np.zeros(L.shape, dtype=complex)
    for w, atoms in phi.terms:
        term = w * np.eye(L.shape[0], dtype=complex)
        for atom in atoms:
            if atom not in cache:
                cache[atom] = apply_atom(atom, L)
            term = term @ cache[atom]
        out = out + term
    return out


def _require_analytic(f):
    if not analytic_check(f):
        raise NotAnalytic("function has a negative frequency")


def _exp_cache(freqs, L):
    L = as_array(L)
    return {w: expm(1j * w * L) for w in sorted(set(freqs))}


def apply_pair(f: AnalyticExpSum2D, L, M) -> np.ndarray:
    """``f(L, M) = sum_m c_m e^{i a_m L} e^{i b_m M}``."""
    _require_analytic(f)
    L, M = as_array(L), as_array(M)
    if L.shape != M.shape:
        raise ValueError("L and M must have the same shape")
    eL = _exp_cache([a for _, a, _ in f.terms], L)
    eM = _exp_cache([b for _, _, b in f.terms], M)
    out = np.zeros(L.shape, dtype=complex)
    for c, a, b in f.terms:
        out = out + c * (eL[a] @ eM[b])
    return out


def apply_pair_sharp(f: AnalyticExpSum2D, L, M) -> np.ndarray:
    """``f_sharp(L, M)`` with ``f_sharp(s, t) = f(s, t)/(1 - it)``.

    Each term is ``c e^{iaL} psi(M)`` with ``psi(t) = e^{ibt}/(1 - it)``
    evaluated through the one-variable calculus.
    """
    _require_analytic(f)
    L, M = as_array(L), as_array(M)
    eL = _exp_cache([a for _, a, _ in f.terms], L)
    cache: dict = {}
    out = np.zeros(L.shape, dtype=complex)
    if not f.terms:
        return out
    for c, a, b in f.terms:
        psi = apply_one_var(OneVarFunction.of(Exp(b), CayleyInv()), M, cache)
        out = out + c * (eL[a] @ psi)
    return out


def sharp_remark_identity(f: AnalyticExpSum2D, L, M, M0) -> float:
    """Operator-norm residual of
    ``f(L,M)(I-iM0)^{-1} = i f_sharp(L,M)(M0-M)(I-iM0)^{-1} + f_sharp(L,M)``.
    """
    L, M, M0 = as_array(L), as_array(M), as_array(M0)
    n = L.shape[0]
    R0 = np.linalg.solve(np.eye(n) - 1j * M0, np.eye(n, dtype=complex))
    fs = apply_pair_sharp(f, L, M)
    lhs = apply_pair(f, L, M) @ R0
    rhs = 1j * fs @ (M0 - M) @ R0 + fs
    return float(np.linalg.norm(lhs - rhs, 2))
