"""Littlewood-Paley window, dyadic pieces and B^1_{inf,1} norms.

For exponential sums every piece is again an exponential sum: the Fourier
transform of ``exp(i(a x + b y))`` is a point mass at ``(a, b)``, so the
convolution with the window kernel just rescales the coefficient by
``w(sqrt(a^2 + b^2) / 2^n)``. A sampled-grid FFT path exists for
cross-checking and for functions that are only known on a grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConstantTermPresent, NyquistViolation
from .scalar_functions import AnalyticExpSum2D

WINDOW_ID = "smoothstep-exp(-1/u)/v1"
GRID_START = 64
GRID_MAX = 4096
GRID_RTOL = 0.01


def _theta(u):
    # g(u)/(g(u)+g(1-u)) with g(u) = exp(-1/u) on u > 0, written to avoid 0/0
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    inside = (u > 0) & (u < 1)
    ui = u[inside]
    with np.errstate(over="ignore"):
        out[inside] = 1.0 / (1.0 + np.exp(1.0 / ui - 1.0 / (1.0 - ui)))
    out[u >= 1] = 1.0
    return out


@dataclass(frozen=True)
class LPWindow:
    """Smooth ``w`` supported on ``[1/2, 2]`` with ``w(t) + w(t/2) = 1`` on ``[1, 2]``."""

    window_id: str = WINDOW_ID

    def theta(self, u):
        return _theta(u)

    def __call__(self, t):
        scalar = np.ndim(t) == 0
        t = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.zeros_like(t)
        lo = (t > 0.5) & (t <= 1.0)
        hi = (t > 1.0) & (t < 2.0)
        out[lo] = _theta(np.log2(2.0 * t[lo]))
        out[hi] = 1.0 - _theta(np.log2(t[hi]))
        return float(out[0]) if scalar else out

    def low_pass(self, r):
        """Multiplier of ``f^[0]``: ``1 - sum_{n>=1} w(r/2^n)``."""
        scalar = np.ndim(r) == 0
        r = np.atleast_1d(np.asarray(r, dtype=float))
        total = np.zeros_like(r)
        top = int(math.ceil(math.log2(max(float(np.max(r, initial=1.0)), 1.0)))) + 2
        for n in range(1, top + 1):
            total = total + self(r / 2.0**n)
        out = 1.0 - total
        out[r <= 1.0] = 1.0
        return float(out[0]) if scalar else out


def build_window() -> LPWindow:
    return LPWindow()


def _dyadic(r, n):
    """``r / 2^n`` without underflow of ``2^n``; saturates to inf."""
    try:
        return math.ldexp(r, -n)
    except OverflowError:
        return math.inf


def _active_levels(r):
    """Dyadic levels ``n`` with ``w(r/2^n) != 0`` (at most two for ``r > 0``)."""
    if r <= 0:
        return []
    k = math.floor(math.log2(r))
    return [n for n in (k - 1, k, k + 1) if 0.5 < _dyadic(r, n) < 2.0]


def lp_piece(f: AnalyticExpSum2D, n: int, win: LPWindow) -> AnalyticExpSum2D:
    return f.map_coefs(lambda r: win(_dyadic(r, n)))


def f0_piece(f: AnalyticExpSum2D, win: LPWindow) -> AnalyticExpSum2D:
    return f.map_coefs(win.low_pass)


def analytic_check(f: AnalyticExpSum2D) -> bool:
    return all(a >= 0 and b >= 0 for _, a, b in f.terms)


# ---------------------------------------------------------------------------
# sup norms


def _grid_periods(f: AnalyticExpSum2D):
    freqs = f.freqs
    sigma = max(float(np.max(np.hypot(freqs[:, 0], freqs[:, 1]))), 1e-12)
    periods = []
    for axis in range(2):
        vals = np.unique(freqs[:, axis])
        gaps = np.diff(vals)
        gap = float(np.min(gaps)) if gaps.size else sigma
        periods.append(2.0 * math.pi / max(gap, sigma / 64.0))
    return periods


def _grid_max(f: AnalyticExpSum2D, R: int) -> float:
    px, py = _grid_periods(f)
    x = np.arange(R) * (px / R)
    y = np.arange(R) * (py / R)
    c = f.coefs
    Ey = np.exp(1j * np.outer(f.freqs[:, 1], y)) * c[:, None]
    best = 0.0
    for start in range(0, R, 512):
        Ex = np.exp(1j * np.outer(x[start:start + 512], f.freqs[:, 0]))
        best = max(best, float(np.max(np.abs(Ex @ Ey))))
    return best


def sup_norm(f: AnalyticExpSum2D, mode="coef_sum", max_resolution=GRID_MAX) -> float:
    """Sup norm estimate on the plane.

    ``coef_sum`` gives the upper bound ``sum |c|``. ``grid`` maximises over a
    uniform grid spanning one period of the smallest frequency gap, doubling
    the resolution until two successive values agree to 1% (a lower bound).
    """
    if not f.terms:
        return 0.0
    if mode == "coef_sum":
        return f.coef_l1()
    if mode != "grid":
        raise ValueError(f"unknown sup mode {mode!r}")
    if len(f.terms) == 1:
        return abs(f.terms[0][0])
    R = GRID_START
    prev = _grid_max(f, R)
    while R < max_resolution:
        R *= 2
        cur = _grid_max(f, R)
        if abs(cur - prev) <= GRID_RTOL * cur:
            return cur
        prev = cur
    return prev


# ---------------------------------------------------------------------------
# decomposition and norms


@dataclass
class BesovDecomposition:
    f0: AnalyticExpSum2D
    pieces: dict[int, AnalyticExpSum2D]
    sup_f0: float
    sup_norms: dict[int, float]
    norm_inhomogeneous: float
    norm_homogeneous: float | None
    sup_mode: str = "coef_sum"
    window_id: str = WINDOW_ID
    homogeneous_pieces: dict[int, float] = field(default_factory=dict)

    def reconstruct(self) -> AnalyticExpSum2D:
        out = self.f0
        for piece in self.pieces.values():
            out = out + piece
        return out


def decompose(f: AnalyticExpSum2D, win: LPWindow | None = None, sup_mode="coef_sum",
              max_resolution=GRID_MAX) -> BesovDecomposition:
    win = win or build_window()
    levels = sorted({n for _, a, b in f.terms for n in _active_levels(math.hypot(a, b))})
    f0 = f0_piece(f, win)
    pieces = {n: lp_piece(f, n, win) for n in levels if n >= 1}
    pieces = {n: p for n, p in pieces.items() if len(p)}
    sup_f0 = sup_norm(f0, sup_mode, max_resolution)
    sups = {n: sup_norm(p, sup_mode, max_resolution) for n, p in pieces.items()}
    inhom = sup_f0 + sum(2.0**n * s for n, s in sups.items())

    has_const = any(a == 0 and b == 0 for _, a, b in f.terms)
    hom = None
    hom_pieces = {}
    if not has_const:
        for n in levels:
            piece = pieces.get(n) if n >= 1 else lp_piece(f, n, win)
            if piece is not None and len(piece):
                hom_pieces[n] = sups[n] if n in sups else sup_norm(piece, sup_mode, max_resolution)
        hom = sum(2.0**n * s for n, s in hom_pieces.items())
    return BesovDecomposition(f0, pieces, sup_f0, sups, inhom, hom, sup_mode,
                              win.window_id, hom_pieces)


def besov_norm_inhomogeneous(f: AnalyticExpSum2D, win: LPWindow | None = None,
                             sup_mode="coef_sum", max_resolution=GRID_MAX) -> float:
    return decompose(f, win, sup_mode, max_resolution).norm_inhomogeneous


def besov_norm_homogeneous(f: AnalyticExpSum2D, win: LPWindow | None = None,
                           sup_mode="coef_sum", max_resolution=GRID_MAX) -> float:
    for idx, (c, a, b) in enumerate(f.terms):
        if a == 0 and b == 0:
            raise ConstantTermPresent(f"term {idx} is constant (c={c}); strip it first")
    return decompose(f, win, sup_mode, max_resolution).norm_homogeneous


# ---------------------------------------------------------------------------
# sampled functions


@dataclass
class SampledFunction2D:
    """Samples ``values[p, q] = f(x0 + p h, y0 + q h)`` on an R x R grid."""

    origin: tuple[float, float]
    spacing: float
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        R = self.values.shape[0]
        if self.values.ndim != 2 or self.values.shape[1] != R:
            raise ValueError("samples must form a square grid")
        if R & (R - 1) or R == 0:
            raise ValueError("grid extent must be a power of two")
        if not self.spacing > 0:
            raise ValueError("spacing must be positive")

    @classmethod
    def sample(cls, f: AnalyticExpSum2D, origin=(0.0, 0.0), spacing=None, size=64):
        if spacing is None:
            spacing = 2.0 * math.pi / size
        x = origin[0] + spacing * np.arange(size)
        y = origin[1] + spacing * np.arange(size)
        return cls(origin, spacing, f(x[:, None], y[None, :]))

    @property
    def size(self):
        return self.values.shape[0]

    @property
    def nyquist(self):
        return math.pi / self.spacing

    def radial_frequency(self):
        t = 2.0 * math.pi * np.fft.fftfreq(self.size, d=self.spacing)
        return np.hypot(t[:, None], t[None, :])


def lp_piece_fft(f: SampledFunction2D, n: int, win: LPWindow) -> SampledFunction2D:
    """Apply the level-``n`` window multiplier through the 2-D FFT.

    numpy's forward transform carries ``exp(-i(x, t))``, matching the sign
    convention used for the window.
    """
    if 2.0 ** (n + 1) > f.nyquist:
        raise NyquistViolation(
            f"level {n} needs frequencies up to {2.0 ** (n + 1)}, grid resolves {f.nyquist}"
        )
    spec = np.fft.fft2(f.values)
    spec *= win(f.radial_frequency() / 2.0**n)
    return SampledFunction2D(f.origin, f.spacing, np.fft.ifft2(spec))


def besov_norms_sampled(f: SampledFunction2D, win: LPWindow | None = None):
    """Norms from FFT pieces; levels beyond the grid's Nyquist range are reported, not summed."""
    win = win or build_window()
    top = math.floor(math.log2(f.nyquist)) - 1
    fund = 2.0 * math.pi / (f.size * f.spacing)
    bottom = math.floor(math.log2(fund)) - 1
    spec = np.fft.fft2(f.values)
    rad = f.radial_frequency()
    sups = {}
    for n in range(bottom, top + 1):
        piece = np.fft.ifft2(spec * win(rad / 2.0**n))
        sups[n] = float(np.max(np.abs(piece)))
    f0 = np.fft.ifft2(spec * win.low_pass(rad))
    inhom = float(np.max(np.abs(f0))) + sum(2.0**n * s for n, s in sups.items() if n >= 1)
    hom = sum(2.0**n * s for n, s in sups.items())
    return {
        "norm_inhomogeneous": inhom,
        "norm_homogeneous": hom,
        "levels": [bottom, top],
        "omitted": f"n > {top}",
    }
