"""Dense complex matrices: dissipativity, regularisation, Schatten norms, RNG."""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .errors import SolveFailure

DISSIPATIVE_TOL = 1e-10
PRNG_NAME = "Philox4x64"
PRNG_VERSION = f"numpy.random.Philox/{'.'.join(np.__version__.split('.')[:2])}/v1"


def as_array(A) -> np.ndarray:
    if isinstance(A, DissipativeMatrix):
        return A.matrix
    return np.asarray(A, dtype=complex)


def imag_part(A) -> np.ndarray:
    """Hermitian imaginary part ``(A - A*)/(2i)``, Hermitian by construction."""
    A = as_array(A)
    K = (A - A.conj().T) / 2j
    return (K + K.conj().T) / 2


def is_dissipative(A, tol=DISSIPATIVE_TOL) -> bool:
    A = as_array(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("square matrix expected")
    return bool(np.linalg.eigvalsh(imag_part(A))[0] >= -tol)


class DissipativeMatrix:
    """Immutable square matrix whose imaginary part is positive semidefinite."""

    __slots__ = ("_L", "_K", "tol")

    def __init__(self, L, tol=DISSIPATIVE_TOL, check=True):
        L = np.array(as_array(L), dtype=complex, copy=True)
        if L.ndim != 2 or L.shape[0] != L.shape[1]:
            raise ValueError("square matrix expected")
        L.setflags(write=False)
        self._L = L
        self._K = None
        self.tol = tol
        if check and not is_dissipative(L, tol):
            lam = np.linalg.eigvalsh(imag_part(L))[0]
            raise ValueError(f"matrix is not dissipative (min eig of Im part {lam:.3e})")

    @property
    def matrix(self):
        return self._L

    @property
    def imag(self):
        if self._K is None:
            K = imag_part(self._L)
            K.setflags(write=False)
            self._K = K
        return self._K

    @property
    def n(self):
        return self._L.shape[0]

    @property
    def shape(self):
        return self._L.shape

    def __array__(self, dtype=None, copy=None):
        return self._L if dtype is None else self._L.astype(dtype)

    def __repr__(self):
        return f"DissipativeMatrix(n={self.n})"


def _gaussian(rng, shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2.0)


def make_rng(seed) -> np.random.Generator:
    """Counter-based generator keyed by an integer seed or a seed tuple."""
    if isinstance(seed, (tuple, list)):
        key = np.random.SeedSequence([int(s) for s in seed]).generate_state(2, np.uint64)
    else:
        key = np.random.SeedSequence(int(seed)).generate_state(2, np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def random_dissipative(n: int, seed, scale: float = 1.0, hermitian=False) -> DissipativeMatrix:
    """``H + iG`` with ``H`` Hermitian Gaussian and ``G = BB*/n``, rescaled to norm ``scale``."""
    if n < 1 or not scale > 0:
        raise ValueError("need n >= 1 and scale > 0")
    rng = make_rng(seed)
    A = _gaussian(rng, (n, n))
    B = _gaussian(rng, (n, n))
    H = (A + A.conj().T) / 2
    L = H if hermitian else H + 1j * (B @ B.conj().T) / n
    L = L * (scale / np.linalg.norm(L, 2))
    return DissipativeMatrix(L, check=False)


def random_unitary(n: int, seed) -> np.ndarray:
    rng = make_rng(seed)
    Q, R = np.linalg.qr(_gaussian(rng, (n, n)))
    d = np.diag(R)
    return Q * (d / np.abs(d))


def resolvent_reg(L, eps: float, return_cond=False):
    """``(I - i eps L)^{-1}`` by a direct solve."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    L = as_array(L)
    S = np.eye(L.shape[0]) - 1j * eps * L
    try:
        out = np.linalg.solve(S, np.eye(L.shape[0], dtype=complex))
    except np.linalg.LinAlgError as exc:
        raise SolveFailure(str(exc)) from None
    if not np.all(np.isfinite(out)):
        raise SolveFailure("non-finite resolvent")
    if return_cond:
        return out, float(np.linalg.cond(S))
    return out


def regularize(L, eps: float) -> DissipativeMatrix:
    """``L(eps) = L (I - i eps L)^{-1}``, a bounded dissipative matrix."""
    A = as_array(L)
    return DissipativeMatrix(A @ resolvent_reg(A, eps), tol=1e-9)


def schatten_norm(A, p=2) -> float:
    """Schatten ``p``-norm from singular values; ``p = inf`` is the operator norm."""
    p = float(p)
    if not p >= 1:
        raise ValueError("Schatten index must satisfy p >= 1")
    s = np.linalg.svd(as_array(A), compute_uv=False)
    if s.size == 0:
        return 0.0
    if math.isinf(p):
        return float(s[0])
    top = s[0]
    if top == 0:
        return 0.0
    # scale before powering so large p cannot overflow
    return float(top * np.sum((s / top) ** p) ** (1.0 / p))


def cayley(L) -> np.ndarray:
    """``(L - iI)(L + iI)^{-1}``; a contraction for dissipative ``L``."""
    L = as_array(L)
    I = np.eye(L.shape[0])
    return np.linalg.solve((L + 1j * I).T, (L - 1j * I).T).T


def matrix_to_json(A) -> dict:
    A = as_array(A)
    return {"n": int(A.shape[0]), "re": A.real.tolist(), "im": A.imag.tolist()}


def matrix_from_json(data) -> np.ndarray:
    if not isinstance(data, dict):
        data = json.loads(Path(data).read_text(encoding="utf-8"))
    re = np.array(data["re"], dtype=float)
    im = np.array(data["im"], dtype=float)
    n = int(data["n"])
    if re.shape != (n, n) or im.shape != (n, n):
        raise ValueError(f"matrix JSON: expected {n}x{n} 're' and 'im'")
    return re + 1j * im
