"""Band-limited analytic functions of one and two real variables.

Two-variable functions are finite sums of exponentials
``c * exp(i(a x + b y))``; one-variable functions are sums of products of a
handful of atoms that are analytic and bounded on the closed upper
half-plane. Both are exact, which keeps every downstream oracle exact.
"""

from __future__ import annotations

import json
import math
from collections.abc import Callable, Mapping
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import kernels
from .errors import NotAnalytic

DELTA_CARD = 1e-4
TWO_PI = 2.0 * math.pi


def delta_dd(x1, x2):
    """Switch-over distance between difference quotient and derivative."""
    return 1e-6 * (1.0 + abs(x1) + abs(x2))


# ---------------------------------------------------------------------------
# two variables


@dataclass(frozen=True)
class AnalyticExpSum2D:
    """``f(x, y) = sum_m c_m exp(i(a_m x + b_m y))``.

    Terms sharing a frequency pair are merged and exact zeros dropped.
    Negative frequencies are accepted here so that :func:`analytic_check`
    has something to reject; the JSON loader and the functional calculus
    refuse them.
    """

    terms: tuple[tuple[complex, float, float], ...] = ()

    def __post_init__(self):
        merged: dict[tuple[float, float], complex] = {}
        for c, a, b in self.terms:
            a, b = float(a), float(b)
            if not (math.isfinite(a) and math.isfinite(b)):
                raise ValueError("frequencies must be finite")
            key = (a + 0.0, b + 0.0)  # folds -0.0 into 0.0
            merged[key] = merged.get(key, 0j) + complex(c)
        clean = tuple((c, a, b) for (a, b), c in merged.items() if c != 0)
        object.__setattr__(self, "terms", clean)

    @classmethod
    def from_terms(cls, terms):
        return cls(tuple(terms))

    @property
    def coefs(self):
        return np.array([t[0] for t in self.terms], dtype=complex)

    @property
    def freqs(self):
        if not self.terms:
            return np.zeros((0, 2))
        return np.array([(t[1], t[2]) for t in self.terms], dtype=float)

    def __call__(self, x, y):
        return eval2d(self, x, y)

    def __add__(self, other):
        return AnalyticExpSum2D(self.terms + other.terms)

    def __sub__(self, other):
        return self + (-1) * other

    def __mul__(self, scalar):
        return AnalyticExpSum2D(tuple((scalar * c, a, b) for c, a, b in self.terms))

    __rmul__ = __mul__

    def __len__(self):
        return len(self.terms)

    def coef_l1(self):
        return float(np.sum(np.abs(self.coefs)))

    def band_radius(self):
        return band_radius(self)

    def map_coefs(self, fn: Callable[[float], float]):
        """Scale each term by ``fn(radius)``; used for spectral multipliers."""
        return AnalyticExpSum2D(
            tuple((c * fn(math.hypot(a, b)), a, b) for c, a, b in self.terms)
        )

    def partial_x(self):
        return AnalyticExpSum2D(tuple((1j * a * c, a, b) for c, a, b in self.terms))

    def partial_y(self):
        return AnalyticExpSum2D(tuple((1j * b * c, a, b) for c, a, b in self.terms))

    def to_json(self):
        return {
            "terms": [
                {"re": c.real, "im": c.imag, "a": a, "b": b} for c, a, b in self.terms
            ]
        }


def eval2d(f: AnalyticExpSum2D, x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    out = np.zeros(np.broadcast(x, y).shape, dtype=complex)
    for c, a, b in f.terms:
        out = out + c * np.exp(1j * (a * x + b * y))
    if out.ndim == 0:
        return complex(out)
    return out


def band_radius(f: AnalyticExpSum2D) -> float:
    if not f.terms:
        return 0.0
    return max(math.hypot(a, b) for _, a, b in f.terms)


def divided_diff_1(f: AnalyticExpSum2D, x1, x2, y):
    """First-variable divided difference, the partial derivative on the diagonal."""
    if abs(x1 - x2) > delta_dd(x1, x2):
        return (eval2d(f, x1, y) - eval2d(f, x2, y)) / (x1 - x2)
    return eval2d(f.partial_x(), x1, y)


def divided_diff_2(f: AnalyticExpSum2D, x, y1, y2):
    if abs(y1 - y2) > delta_dd(y1, y2):
        return (eval2d(f, x, y1) - eval2d(f, x, y2)) / (y1 - y2)
    return eval2d(f.partial_y(), x, y1)


def load_function(source) -> AnalyticExpSum2D:
    """Read a function spec from a path, JSON string or already-parsed dict.

    Negative frequencies are rejected with the offending term index.
    """
    if isinstance(source, Mapping):
        data = source
    else:
        text = str(source)
        if text.lstrip().startswith("{"):
            data = json.loads(text)
        else:
            data = json.loads(Path(text).read_text(encoding="utf-8"))
    if "terms" not in data or not isinstance(data["terms"], list):
        raise ValueError("function spec needs a 'terms' list")
    terms = []
    for idx, term in enumerate(data["terms"]):
        try:
            c = complex(float(term.get("re", 0.0)), float(term.get("im", 0.0)))
            a, b = float(term["a"]), float(term["b"])
        except (AttributeError, KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"term {idx}: malformed ({exc})") from None
        if a < 0 or b < 0:
            raise NotAnalytic(f"term {idx}: negative frequency (a={a}, b={b})")
        terms.append((c, a, b))
    return AnalyticExpSum2D(tuple(terms))


def dump_function(f: AnalyticExpSum2D, path):
    Path(path).write_text(json.dumps(f.to_json(), indent=2), encoding="utf-8")


# ---------------------------------------------------------------------------
# one variable


@dataclass(frozen=True)
class Exp:
    omega: float

    def __post_init__(self):
        if self.omega < 0:
            raise NotAnalytic("Exp atom needs a nonnegative frequency")

    def __call__(self, z):
        return np.exp(1j * self.omega * np.asarray(z, dtype=complex))


@dataclass(frozen=True)
class Cardinal:
    """``z -> (exp(i s z) - 1)/(s z - 2 pi j)``; equals ``i`` at ``z = 2 pi j/s``."""

    j: int
    s: float = 1.0

    def __post_init__(self):
        if not self.s > 0:
            raise ValueError("Cardinal scale must be positive")

    def __call__(self, z):
        return cardinal_eval(self.j, self.s, z)


@dataclass(frozen=True)
class CayleyInv:
    def __call__(self, z):
        return 1.0 / (1.0 - 1j * np.asarray(z, dtype=complex))


@dataclass(frozen=True)
class Const:
    c: complex

    def __call__(self, z):
        return np.full(np.shape(z), complex(self.c)) if np.ndim(z) else complex(self.c)


OneVarAtom = Exp | Cardinal | CayleyInv | Const


@dataclass(frozen=True)
class OneVarFunction:
    """Finite sum of scaled products of atoms: ``sum_i w_i * prod(atoms_i)``.

    Products keep their written order, which the matrix calculus respects.
    """

    terms: tuple[tuple[complex, tuple[OneVarAtom, ...]], ...] = field(default=())

    @classmethod
    def of(cls, *atoms, coef=1.0):
        return cls(((complex(coef), tuple(atoms)),))

    @classmethod
    def const(cls, c):
        return cls(((complex(c), ()),))

    @classmethod
    def exp_sum(cls, pairs):
        """From ``(coef, omega)`` pairs."""
        return cls(tuple((complex(c), (Exp(float(w)),)) for c, w in pairs))

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.zeros(z.shape, dtype=complex)
        for w, atoms in self.terms:
            val = np.full(z.shape, w, dtype=complex)
            for atom in atoms:
                val = val * atom(z)
            out = out + val
        return complex(out) if out.ndim == 0 else out

    def __add__(self, other):
        if not isinstance(other, OneVarFunction):
            other = OneVarFunction.const(other)
        return OneVarFunction(self.terms + other.terms)

    __radd__ = __add__

    def __mul__(self, other):
        if isinstance(other, OneVarFunction):
            return OneVarFunction(
                tuple(
                    (w1 * w2, a1 + a2)
                    for w1, a1 in self.terms
                    for w2, a2 in other.terms
                )
            )
        if isinstance(other, (Exp, Cardinal, CayleyInv, Const)):
            return OneVarFunction(tuple((w, a + (other,)) for w, a in self.terms))
        return OneVarFunction(tuple((complex(other) * w, a) for w, a in self.terms))

    def __rmul__(self, other):
        if isinstance(other, (Exp, Cardinal, CayleyInv, Const)):
            return OneVarFunction(tuple((w, (other,) + a) for w, a in self.terms))
        return self * other


ONE = OneVarFunction.const(1.0)


# ---------------------------------------------------------------------------
# cardinal basis


def cardinal_eval(j: int, s: float, z):
    """``(e^{isz} - 1)/(sz - 2 pi j)`` with a Taylor branch near the removable point."""
    if not s > 0:
        raise ValueError("scale must be positive")
    z = np.asarray(z, dtype=complex)
    sz = s * z
    w = sz - TWO_PI * j
    e = np.exp(1j * sz)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.asarray((e - 1.0) / w, dtype=complex)
    near = np.abs(w) < DELTA_CARD
    if np.any(near):
        out = np.array(out, dtype=complex, ndmin=1)
        wn = np.array(w, ndmin=1)[np.array(near, ndmin=1)]
        out[np.array(near, ndmin=1)] = _card_taylor(wn)
        out = out.reshape(z.shape)
    return complex(out) if np.ndim(out) == 0 else out


def _card_taylor(w):
    acc = np.zeros_like(w, dtype=complex)
    for k in range(12, 0, -1):
        acc = acc * w + 1j ** k / math.factorial(k)
    return acc


def cardinal_reconstruct_1d(samples, s: float, z, N: int):
    """Partial sum ``sum_{|n|<=N} F(2 pi n/s) (e^{isz}-1)/(i(sz - 2 pi n))``.

    ``samples`` is a mapping ``n -> F(2 pi n / s)`` or a callable of ``n``.
    For band ``[0, s]`` interior frequencies this converges to ``F(z)``; the
    two band-edge frequencies 0 and ``s`` share their samples and both
    reconstruct to the midpoint ``(1 + e^{isz})/2``.
    """
    ns = range(-N, N + 1)
    if callable(samples):
        vals = np.array([samples(n) for n in ns], dtype=complex)
    else:
        vals = np.array([samples.get(n, 0.0) for n in ns], dtype=complex)
    out = kernels.cardinal_series(vals, float(s), np.atleast_1d(z))
    return complex(out[0]) if np.ndim(z) == 0 else out.reshape(np.shape(z))


def cardinal_row_sumsq(x, N: int, s: float = 1.0):
    """``sum_{|j|<=N} |C_j(x)|^2``; tends to 1 on the real line."""
    return kernels.cardinal_sumsq(np.atleast_1d(np.asarray(x, dtype=float)), float(s), int(N))
