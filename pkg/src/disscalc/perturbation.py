"""Perturbation identities and Lipschitz-type estimates for functions of pairs.

Left-hand sides always come from the exact separable calculus, so residuals
measure only the truncation of the operator-integral series.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .besov import analytic_check, besov_norm_inhomogeneous
from .errors import DimensionMismatch, NotAnalytic, ZeroPerturbation
from .funcalc import apply_pair
from .matrix_core import as_array, regularize, schatten_norm
from .opint import (
    build_dd1_rep,
    build_dd2_rep,
    evaluate_triple_h,
    evaluate_triple_like1,
    evaluate_triple_like2,
    rep_norm_bound,
)
from .scalar_functions import AnalyticExpSum2D, band_radius

K_EMP = 10.0
CERT_FACTOR = 1.05
DD1_SIGN = -1.0


@lru_cache(maxsize=64)
def dd1_rep(f: AnalyticExpSum2D, N: int, sign: float = DD1_SIGN):
    return build_dd1_rep(f, N, sign)


@lru_cache(maxsize=64)
def dd2_rep(f: AnalyticExpSum2D, N: int, sign: float = DD1_SIGN):
    return build_dd2_rep(f, N, sign)


@lru_cache(maxsize=64)
def rep_bounds(f: AnalyticExpSum2D, N: int, sign: float = DD1_SIGN):
    """Certificate norms of the first- and second-kind representations."""
    return rep_norm_bound(dd1_rep(f, N, sign)), rep_norm_bound(dd2_rep(f, N, sign))


def _prepare(f, *mats):
    if not analytic_check(f):
        raise NotAnalytic("function has a negative frequency")
    arrs = [as_array(m) for m in mats]
    n = arrs[0].shape
    if any(A.shape != n or A.ndim != 2 or n[0] != n[1] for A in arrs):
        raise DimensionMismatch("all matrices must be square of the same size")
    return arrs


def _result(lhs, rhs):
    return {"lhs": lhs, "rhs": rhs, "residual_s2": schatten_norm(lhs - rhs, 2)}


def first_rhs(f, L1, L2, M, N, sign=DD1_SIGN):
    I = np.eye(L1.shape[0], dtype=complex)
    return evaluate_triple_like1(dd1_rep(f, N, sign), L1, L1 - L2, L2, I, M)


def second_rhs(f, L, M1, M2, N, sign=DD1_SIGN):
    I = np.eye(L.shape[0], dtype=complex)
    return evaluate_triple_like2(dd2_rep(f, N, sign), L, I, M1, M1 - M2, M2)


def identity_first(f, L1, L2, M, N, sign=DD1_SIGN):
    """``f(L1,M) - f(L2,M)`` against the first-kind triple integral."""
    L1, L2, M = _prepare(f, L1, L2, M)
    lhs = apply_pair(f, L1, M) - apply_pair(f, L2, M)
    return _result(lhs, first_rhs(f, L1, L2, M, N, sign))


def identity_second(f, L, M1, M2, N, sign=DD1_SIGN):
    """``f(L,M1) - f(L,M2)`` against the second-kind triple integral."""
    L, M1, M2 = _prepare(f, L, M1, M2)
    lhs = apply_pair(f, L, M1) - apply_pair(f, L, M2)
    return _result(lhs, second_rhs(f, L, M1, M2, N, sign))


def identity_full(f, L1, L2, M1, M2, N, order="ab12", sign=DD1_SIGN):
    """``f(L1,M1) - f(L2,M2)`` split through ``f(L2,M1)`` (ab12) or ``f(L1,M2)`` (ba21)."""
    L1, L2, M1, M2 = _prepare(f, L1, L2, M1, M2)
    lhs = apply_pair(f, L1, M1) - apply_pair(f, L2, M2)
    if order == "ab12":
        first = first_rhs(f, L1, L2, M1, N, sign)
        second = second_rhs(f, L2, M1, M2, N, sign)
    elif order == "ba21":
        first = first_rhs(f, L1, L2, M2, N, sign)
        second = second_rhs(f, L1, M1, M2, N, sign)
    else:
        raise ValueError(f"order must be 'ab12' or 'ba21', got {order!r}")
    out = _result(lhs, first + second)
    out["first"] = first
    out["second"] = second
    return out


def residual_schedule_ok(residuals, scale, floor=1e-8, rel=5e-2):
    """Nonincreasing, final below ``max(rel * scale, floor)``, final at most half the first."""
    r = list(residuals)
    monotone = all(b <= a for a, b in zip(r, r[1:]))
    return bool(monotone and r[-1] <= max(rel * scale, floor) and r[-1] <= r[0] / 2)


def regularization_convergence(L1, L2, eps_list):
    """``err(eps) = ||(L1(eps) - L2(eps)) - (L1 - L2)||_{S_2}`` for each eps."""
    A, B = as_array(L1), as_array(L2)
    out = []
    for eps in eps_list:
        if not eps > 0:
            raise ValueError("eps must be positive")
        D = regularize(A, eps).matrix - regularize(B, eps).matrix
        out.append({"eps": float(eps), "err": schatten_norm(D - (A - B), 2)})
    return out


def regularization_contract_ok(rows, factor=2.0):
    """``err(eps) <= factor * err(eps0)/eps0 * eps`` for every later eps."""
    eps0, err0 = rows[0]["eps"], rows[0]["err"]
    C = factor * err0 / eps0
    return all(r["err"] <= C * r["eps"] for r in rows[1:])


def lipschitz_ratio(f, L1, M1, L2, M2, p=2, besov_mode="coef_sum"):
    """``||f(L1,M1) - f(L2,M2)||_{S_p}`` over ``||f||_B * max(||dL||_{S_p}, ||dM||_{S_p})``."""
    L1, M1, L2, M2 = _prepare(f, L1, M1, L2, M2)
    pert = max(schatten_norm(L1 - L2, p), schatten_norm(M1 - M2, p))
    if pert == 0:
        raise ZeroPerturbation("both perturbations vanish")
    num = schatten_norm(apply_pair(f, L1, M1) - apply_pair(f, L2, M2), p)
    den = besov_norm_inhomogeneous(f, sup_mode=besov_mode) * pert
    ratio = num / den if den > 0 else 0.0
    return {"ratio": ratio, "numerator": num, "denominator": den}


def elementary_bound_check(f, L1, L2, M, p=2, N=None, K_emp=K_EMP):
    """``||f(L1,M) - f(L2,M)||_{S_p} <= K_emp * sigma * sum|c| * ||L1 - L2||_{S_p}``.

    With ``N`` given, the truncated representation bound is reported as well.
    """
    L1, L2, M = _prepare(f, L1, L2, M)
    lhs = schatten_norm(apply_pair(f, L1, M) - apply_pair(f, L2, M), p)
    scale = band_radius(f) * f.coef_l1() * schatten_norm(L1 - L2, p)
    out = {
        "lhs_norm": lhs,
        "bound": K_emp * scale,
        "ok": bool(lhs <= K_emp * scale),
        "k_min": lhs / scale if scale > 0 else 0.0,
    }
    if N is not None:
        out["rep_bound"] = rep_bounds(f, N)[0] * schatten_norm(L1 - L2, p)
    return out


def _cert(kind, p, lhs, bound, factor):
    return {"kind": kind, "p": p, "lhs": lhs, "bound": bound,
            "ok": bool(lhs <= factor * bound)}


def schatten_certificates(f, L1, L2, M1, M2, N, ps=(1, 2), factor=CERT_FACTOR,
                          sign=DD1_SIGN):
    """Truncated Schatten bounds for both divided-difference integrals.

    ``like1``: ``||W||_p <= B ||L1 - L2||_p``; ``like2``: ``||W||_p <= B ||M1 - M2||_p``;
    ``h``: the rearranged first-kind representation as a Haagerup integral with
    the perturbation in the right slot.
    """
    L1, L2, M1, M2 = _prepare(f, L1, L2, M1, M2)
    n = L1.shape[0]
    I = np.eye(n, dtype=complex)
    r1, r2 = dd1_rep(f, N, sign), dd2_rep(f, N, sign)
    b1, b2 = rep_bounds(f, N, sign)
    dL, dM = L1 - L2, M1 - M2
    W1 = evaluate_triple_like1(r1, L1, dL, L2, I, M1)
    W2 = evaluate_triple_like2(r2, L2, I, M1, dM, M2)
    Wh = evaluate_triple_h(r1.rearranged(), L2, M1, L1, I, dL)
    out = []
    for p in ps:
        out.append(_cert("like1", p, schatten_norm(W1, p), b1 * schatten_norm(dL, p), factor))
        out.append(_cert("like2", p, schatten_norm(W2, p), b2 * schatten_norm(dM, p), factor))
        out.append(_cert("h", p, schatten_norm(Wh, p), b1 * schatten_norm(dL, p), factor))
    return out


def standard_functions():
    """Three analytic exponential sums with band radius at most 1."""
    return {
        "single": AnalyticExpSum2D(((1.0, 0.3, 0.4),)),
        "mixed": AnalyticExpSum2D(((1.0, 0.6, 0.0), (0.5, 0.2, 0.5), (-0.3j, 0.0, 0.8))),
        "edge": AnalyticExpSum2D(((0.7, 1.0, 0.0), (0.3j, 0.0, 1.0), (0.2, 0.5, 0.5))),
    }


def convex_perturbation(L, D, t):
    """``(1 - t) L + t D``, dissipative whenever both ends are."""
    return (1.0 - t) * as_array(L) + t * as_array(D)


def max_pert_s2(L1, L2, M1=None, M2=None):
    val = schatten_norm(as_array(L1) - as_array(L2), 2)
    if M1 is not None:
        val = max(val, schatten_norm(as_array(M1) - as_array(M2), 2))
    return val


__all__ = [
    "CERT_FACTOR",
    "K_EMP",
    "convex_perturbation",
    "elementary_bound_check",
    "identity_first",
    "identity_full",
    "identity_second",
    "lipschitz_ratio",
    "max_pert_s2",
    "regularization_contract_ok",
    "regularization_convergence",
    "residual_schedule_ok",
    "schatten_certificates",
    "standard_functions",
]
