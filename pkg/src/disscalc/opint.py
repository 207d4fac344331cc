"""Triple operator integrals at matrix scale.

A representation ``Psi = sum_{j,k} alpha . beta . gamma`` is stored as two
*list families* (functions indexed by one index) and one *matrix family*
(indexed by two). A matrix family is kept in expanded form

    family[j, k](t) = sum_g G_g[j, k] * psi_g(t)

with scalar kernels ``G_g`` and one-variable functions ``psi_g``. Every
evaluator then reduces to applying ``G_g`` to a stack of small matrices,
which is the hot loop handled by :mod:`disscalc.kernels`. Divided-difference
representations produce Loewner kernels ``(u_j - u_k)/(j - k)`` that never
need to be materialised.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
import numpy as np

from . import kernels
from .besov import analytic_check
from .errors import DimensionMismatch, NotAnalytic
from .funcalc import apply_one_var, cardinal_family
from .matrix_core import as_array
from .scalar_functions import AnalyticExpSum2D, OneVarFunction, band_radius

TWO_PI = 2.0 * math.pi


def pairwise_sum(stack: np.ndarray) -> np.ndarray:
    """Sum along axis 0 by repeated halving; order depends only on the length."""
    stack = np.asarray(stack)
    if stack.shape[0] == 0:
        return np.zeros(stack.shape[1:], dtype=stack.dtype)
    while stack.shape[0] > 1:
        if stack.shape[0] % 2:
            head = stack[:-1:2] + stack[1::2]
            stack = np.concatenate([head, stack[-1:]], axis=0)
        else:
            stack = stack[0::2] + stack[1::2]
    return stack[0]


def _stack_product_sum(X, U):
    """``sum_j X[j] @ U[j]`` with a fixed pairwise reduction."""
    if X.shape[0] == 0:
        return np.zeros((X.shape[1], U.shape[2]), dtype=complex)
    return pairwise_sum(np.matmul(X, U))


# ---------------------------------------------------------------------------
# scalar kernels


class DenseKernel:
    def __init__(self, G):
        self.G = np.asarray(G, dtype=complex)

    @property
    def shape(self):
        return self.G.shape

    def apply(self, Y):
        Y = np.asarray(Y, dtype=complex)
        K = Y.shape[0]
        out = self.G @ Y.reshape(K, -1)
        return out.reshape((self.G.shape[0],) + Y.shape[1:])

    def transpose(self):
        return DenseKernel(self.G.T)

    def dense(self):
        return self.G

    def op_norm(self):
        if self.G.size == 0:
            return 0.0
        return float(np.linalg.norm(self.G, 2))


class LoewnerKernel:
    """``G[j,k] = (u_j - u_k)/(j - k)`` off the diagonal and ``du_j`` on it.

    Symmetric, so :meth:`transpose` returns ``self``. For ``u_j =
    exp(2 pi i theta j)`` the off-diagonal part is a diagonally modulated
    Hilbert-type Toeplitz matrix and the operator norm stays bounded
    uniformly in the size.
    """

    def __init__(self, u, du, theta=None):
        self.u = np.ascontiguousarray(u, dtype=complex)
        self.du = np.ascontiguousarray(du, dtype=complex)
        self.theta = theta

    @classmethod
    def exponential(cls, theta: float, N: int):
        """``u_j = exp(2 pi i theta j)``, ``du_j = 2 pi i theta u_j`` for ``|j| <= N``."""
        j = np.arange(-N, N + 1)
        u = np.exp(TWO_PI * 1j * theta * j)
        return cls(u, TWO_PI * 1j * theta * u, theta=float(theta))

    @property
    def shape(self):
        return (self.u.size, self.u.size)

    def apply(self, Y):
        Y = np.asarray(Y, dtype=complex)
        J = Y.shape[0]
        out = kernels.loewner_apply(self.u, self.du, Y.reshape(J, -1))
        return out.reshape(Y.shape)

    def transpose(self):
        return self

    def dense(self):
        J = self.u.size
        idx = np.arange(J)
        d = idx[:, None] - idx[None, :]
        with np.errstate(divide="ignore", invalid="ignore"):
            G = (self.u[:, None] - self.u[None, :]) / d
        G[idx, idx] = self.du
        return G

    def op_norm(self):
        if self.theta is not None:
            return symbol_norm(self.theta)
        return float(np.linalg.norm(self.dense(), 2)) if self.u.size else 0.0


def symbol_norm(theta: float) -> float:
    """Norm bound for every finite section of the exponential Loewner kernel.

    ``diag(conj u) G`` is Toeplitz with entries ``(1 - e^{-2 pi i theta m})/m``
    and ``2 pi i theta`` on the diagonal. Its symbol takes only the values
    ``2 pi i floor(theta)`` and ``2 pi i (floor(theta) + 1)``, so the bound is
    tight as the size grows and equals ``2 pi`` for ``0 < theta <= 1``.
    """
    k = math.floor(theta)
    if theta == k:
        return TWO_PI * abs(k)
    return TWO_PI * max(abs(k), abs(k + 1))


# ---------------------------------------------------------------------------
# families


class ExplicitList:
    """List family given function by function."""

    def __init__(self, funcs):
        self.funcs = list(funcs)

    @property
    def size(self):
        return len(self.funcs)

    def values(self, x):
        x = np.atleast_1d(np.asarray(x, dtype=complex))
        out = np.zeros((x.size, self.size), dtype=complex)
        for j, fn in enumerate(self.funcs):
            out[:, j] = fn(x)
        return out

    def at(self, A):
        A = as_array(A)
        cache: dict = {}
        if not self.funcs:
            return np.zeros((0,) + A.shape, dtype=complex)
        return np.stack([apply_one_var(fn, A, cache) for fn in self.funcs])

    def l2_sup(self, grid):
        if not self.funcs:
            return 0.0
        vals = self.values(grid)
        return float(np.sqrt(np.max(np.sum(np.abs(vals) ** 2, axis=1))))


class CardinalFamily:
    """``C_j(t) = (e^{ist} - 1)/(st - 2 pi j)`` for ``|j| <= N``."""

    def __init__(self, s: float, N: int):
        if not s > 0:
            raise ValueError("scale must be positive")
        self.s = float(s)
        self.N = int(N)

    @property
    def size(self):
        return 2 * self.N + 1

    def values(self, x):
        return kernels.cardinal_values(np.atleast_1d(x), self.s, self.N)

    def at(self, A):
        return cardinal_family(A, self.s, self.N)

    def l2_sup(self, grid):
        grid = np.asarray(grid, dtype=float)
        return float(np.sqrt(np.max(kernels.cardinal_sumsq(grid, self.s, self.N))))


class ExplicitMatrix:
    """Matrix family given entry by entry (small truncations only)."""

    def __init__(self, funcs):
        self.funcs = [list(row) for row in funcs]
        self._shape = (len(self.funcs), len(self.funcs[0]) if self.funcs else 0)

    @property
    def shape(self):
        return self._shape

    def expansion(self):
        J, K = self.shape
        out = []
        for j in range(J):
            for k in range(K):
                G = np.zeros((J, K), dtype=complex)
                G[j, k] = 1.0
                out.append((DenseKernel(G), self.funcs[j][k]))
        return out

    def values(self, x):
        x = np.atleast_1d(np.asarray(x, dtype=complex))
        J, K = self.shape
        out = np.zeros((x.size, J, K), dtype=complex)
        for j in range(J):
            for k in range(K):
                out[:, j, k] = self.funcs[j][k](x)
        return out

    def transpose(self):
        J, K = self.shape
        return ExplicitMatrix([[self.funcs[j][k] for j in range(J)] for k in range(K)])

    def op_sup(self, grid):
        if 0 in self.shape:
            return 0.0
        vals = self.values(grid)
        return float(max(np.linalg.norm(v, 2) for v in vals))


class KernelMatrix:
    """Matrix family ``sum_g G_g psi_g(t)`` in expanded form."""

    def __init__(self, groups, size):
        self.groups = list(groups)
        self.size = int(size)

    @property
    def shape(self):
        return (self.size, self.size)

    def expansion(self):
        return self.groups

    def values(self, x):
        x = np.atleast_1d(np.asarray(x, dtype=complex))
        out = np.zeros((x.size, self.size, self.size), dtype=complex)
        for G, psi in self.groups:
            out += np.asarray(psi(x))[:, None, None] * G.dense()[None]
        return out

    def transpose(self):
        return KernelMatrix([(G.transpose(), psi) for G, psi in self.groups], self.size)

    def op_sup(self, grid):
        """``sup_t sum_g ||G_g|| |psi_g(t)|``; exact when there is one group."""
        if not self.groups:
            return 0.0
        grid = np.asarray(grid, dtype=complex)
        total = np.zeros(grid.size)
        for G, psi in self.groups:
            total += G.op_norm() * np.abs(np.asarray(psi(grid)))
        return float(np.max(total))


def _matrix_family_from(obj):
    if isinstance(obj, (ExplicitMatrix, KernelMatrix)):
        return obj
    return ExplicitMatrix(obj)


def _list_family_from(obj):
    if isinstance(obj, (ExplicitList, CardinalFamily)):
        return obj
    return ExplicitList(obj)


# ---------------------------------------------------------------------------
# representations


@dataclass
class HaagerupRep3:
    """``Psi(x1, x2, x3) = sum_{j,k} alpha_j(x1) beta_jk(x2) gamma_k(x3)``."""

    alpha: object
    beta: object
    gamma: object

    def __post_init__(self):
        self.alpha = _list_family_from(self.alpha)
        self.beta = _matrix_family_from(self.beta)
        self.gamma = _list_family_from(self.gamma)
        if self.beta.shape != (self.alpha.size, self.gamma.size):
            raise DimensionMismatch("beta must be len(alpha) x len(gamma)")

    def __call__(self, x1, x2, x3):
        a = self.alpha.values(x1)
        c = self.gamma.values(x3)
        x2 = np.atleast_1d(np.asarray(x2, dtype=complex))
        out = np.zeros(a.shape[0], dtype=complex)
        for G, psi in self.beta.expansion():
            U = G.apply(c.T)
            out += np.asarray(psi(x2)) * np.sum(a.T * U, axis=0)
        return out

    def families(self):
        return [self.alpha, self.beta, self.gamma]


@dataclass
class HaagerupLikeRep1:
    """``Psi(x1, x2, x3) = sum_{j,k} alpha_j(x1) beta_k(x2) gamma_jk(x3)``."""

    alpha: object
    beta: object
    gamma: object

    def __post_init__(self):
        self.alpha = _list_family_from(self.alpha)
        self.beta = _list_family_from(self.beta)
        self.gamma = _matrix_family_from(self.gamma)
        if self.gamma.shape != (self.alpha.size, self.beta.size):
            raise DimensionMismatch("gamma must be len(alpha) x len(beta)")

    def __call__(self, x1, x2, x3):
        a = self.alpha.values(x1)
        b = self.beta.values(x2)
        x3 = np.atleast_1d(np.asarray(x3, dtype=complex))
        out = np.zeros(a.shape[0], dtype=complex)
        for G, psi in self.gamma.expansion():
            U = G.apply(b.T)
            out += np.asarray(psi(x3)) * np.sum(a.T * U, axis=0)
        return out

    def rearranged(self) -> HaagerupRep3:
        """The same function read as ``(x2, x3, x1) -> Psi`` in Haagerup form."""
        return HaagerupRep3(self.beta, self.gamma.transpose(), self.alpha)

    def families(self):
        return [self.alpha, self.beta, self.gamma]


@dataclass
class HaagerupLikeRep2:
    """``Psi(x1, x2, x3) = sum_{j,k} alpha_jk(x1) beta_j(x2) gamma_k(x3)``."""

    alpha: object
    beta: object
    gamma: object

    def __post_init__(self):
        self.alpha = _matrix_family_from(self.alpha)
        self.beta = _list_family_from(self.beta)
        self.gamma = _list_family_from(self.gamma)
        if self.alpha.shape != (self.beta.size, self.gamma.size):
            raise DimensionMismatch("alpha must be len(beta) x len(gamma)")

    def __call__(self, x1, x2, x3):
        b = self.beta.values(x2)
        c = self.gamma.values(x3)
        x1 = np.atleast_1d(np.asarray(x1, dtype=complex))
        out = np.zeros(b.shape[0], dtype=complex)
        for G, psi in self.alpha.expansion():
            U = G.apply(c.T)
            out += np.asarray(psi(x1)) * np.sum(b.T * U, axis=0)
        return out

    def rearranged(self) -> HaagerupRep3:
        """The same function read as ``(x3, x1, x2) -> Psi`` in Haagerup form."""
        return HaagerupRep3(self.gamma, self.alpha.transpose(), self.beta)

    def families(self):
        return [self.alpha, self.beta, self.gamma]


# ---------------------------------------------------------------------------
# evaluation


def _check_dims(*mats):
    arrs = [as_array(m) for m in mats]
    n = arrs[0].shape[0]
    for A in arrs:
        if A.ndim != 2 or A.shape != (n, n):
            raise DimensionMismatch("all operators must be square of the same size")
    return arrs


def evaluate_triple_h(rep: HaagerupRep3, A, B, C, T, R) -> np.ndarray:
    """``sum_{j,k} alpha_j(A) T beta_jk(B) R gamma_k(C)``."""
    A, B, C, T, R = _check_dims(A, B, C, T, R)
    X = rep.alpha.at(A) @ T
    Z = rep.gamma.at(C)
    W = np.zeros(A.shape, dtype=complex)
    cache: dict = {}
    for G, psi in rep.beta.expansion():
        U = G.apply(Z)
        mid = apply_one_var(psi, B, cache) @ R
        W += _stack_product_sum(X @ mid, U)
    return W


def evaluate_triple_like1(rep: HaagerupLikeRep1, A, T, B, R, C) -> np.ndarray:
    """``sum_{j,k} alpha_j(A) T beta_k(B) R gamma_jk(C)``."""
    A, T, B, R, C = _check_dims(A, T, B, R, C)
    X = rep.alpha.at(A) @ T
    Y = rep.beta.at(B) @ R
    W = np.zeros(A.shape, dtype=complex)
    cache: dict = {}
    for G, psi in rep.gamma.expansion():
        U = G.apply(Y)
        W += _stack_product_sum(X, U) @ apply_one_var(psi, C, cache)
    return W


def evaluate_triple_like2(rep: HaagerupLikeRep2, A, T, B, R, C) -> np.ndarray:
    """``sum_{j,k} alpha_jk(A) T beta_j(B) R gamma_k(C)``."""
    A, T, B, R, C = _check_dims(A, T, B, R, C)
    P = rep.beta.at(B) @ R
    Q = rep.gamma.at(C)
    W = np.zeros(A.shape, dtype=complex)
    cache: dict = {}
    for G, psi in rep.alpha.expansion():
        U = G.apply(Q)
        W += apply_one_var(psi, A, cache) @ T @ _stack_product_sum(P, U)
    return W


# ---------------------------------------------------------------------------
# divided differences


def _loewner_groups(f: AnalyticExpSum2D, s: float, N: int, sampled: str, sign: float):
    """Groups for ``sign * s * [f(2 pi j/s, .) - f(2 pi k/s, .)]/(2 pi (j - k))``.

    ``sampled`` names the variable that is sampled on the grid ``2 pi j/s``;
    the other variable stays free and carries the exponential.
    """
    by_freq: dict[float, list] = {}
    for c, a, b in f.terms:
        fixed, free = (a, b) if sampled == "x" else (b, a)
        if fixed == 0:
            continue
        by_freq.setdefault(fixed, []).append((sign * s * c / TWO_PI, free))
    groups = []
    for fixed in sorted(by_freq):
        psi = OneVarFunction.exp_sum(by_freq[fixed])
        groups.append((LoewnerKernel.exponential(fixed / s, N), psi))
    return groups


def _require(f):
    if not analytic_check(f):
        raise NotAnalytic("function has a negative frequency")


def _empty_like1():
    return HaagerupLikeRep1(ExplicitList([]), ExplicitList([]), KernelMatrix([], 0))


def _empty_like2():
    return HaagerupLikeRep2(KernelMatrix([], 0), ExplicitList([]), ExplicitList([]))


def build_dd1_rep(f: AnalyticExpSum2D, N: int, sign: float = -1.0) -> HaagerupLikeRep1:
    """First-kind representation of the first-variable divided difference.

    Cardinal factors in ``x1`` and ``x2`` at scale ``s = band_radius(f)`` and
    ``gamma_jk(y) = -s [f(2 pi j/s, y) - f(2 pi k/s, y)]/(2 pi (j - k))``,
    with ``-d/dx f(2 pi j/s, y)`` on the diagonal.
    """
    _require(f)
    s = band_radius(f)
    if s == 0:
        return _empty_like1()
    card = CardinalFamily(s, N)
    return HaagerupLikeRep1(card, CardinalFamily(s, N),
                            KernelMatrix(_loewner_groups(f, s, N, "x", sign), card.size))


def build_dd2_rep(f: AnalyticExpSum2D, N: int, sign: float = -1.0) -> HaagerupLikeRep2:
    """Second-kind representation of the second-variable divided difference."""
    _require(f)
    s = band_radius(f)
    if s == 0:
        return _empty_like2()
    card = CardinalFamily(s, N)
    return HaagerupLikeRep2(KernelMatrix(_loewner_groups(f, s, N, "y", sign), card.size),
                            card, CardinalFamily(s, N))


# ---------------------------------------------------------------------------
# norm certificates


def default_grid(rep, points=4096):
    """Real-axis grid for :func:`rep_norm_bound`."""
    cards = [fam for fam in rep.families() if isinstance(fam, CardinalFamily)]
    if cards:
        half = min(2.0 * TWO_PI * cards[0].N / (64.0 * cards[0].s), 50.0)
    else:
        half = 10.0
    return np.linspace(-half, half, points)


def _family_norm(fam, grid):
    if isinstance(fam, (ExplicitList, CardinalFamily)):
        return fam.l2_sup(grid)
    return fam.op_sup(grid)


def rep_norm_bound(rep, grid=None) -> float:
    """Product of the family norms of a truncated representation.

    List families contribute ``sup_t (sum_j |phi_j(t)|^2)^{1/2}`` and matrix
    families ``sup_t ||[phi_jk(t)]||`` over the grid. Certifies the truncated
    representation only; it is not the infimal tensor norm.
    """
    grid = default_grid(rep) if grid is None else np.asarray(grid, dtype=float)
    total = 1.0
    for fam in rep.families():
        val = _family_norm(fam, grid)
        if val == 0.0:
            return 0.0
        total *= val
    return total
