import numpy as np
import pytest

from disscalc.errors import DimensionMismatch, NotAnalytic, ZeroPerturbation
from disscalc.matrix_core import random_dissipative, schatten_norm
from disscalc.perturbation import (
    convex_perturbation,
    elementary_bound_check,
    identity_first,
    identity_full,
    identity_second,
    lipschitz_ratio,
    max_pert_s2,
    regularization_contract_ok,
    regularization_convergence,
    residual_schedule_ok,
    schatten_certificates,
    standard_functions,
)
from disscalc.scalar_functions import AnalyticExpSum2D

F = AnalyticExpSum2D.from_terms
NS = (256, 512, 1024, 2048)
JORDAN = np.array([[1j, 1], [0, 1j]])
# frozen 30-digit lhs for f = e^{i(0.3x + 0.4y)}, L2 = L1 + diag(0.1, 0), M = diag(0, 1)
LHS_FIRST = np.array([
    [0.000333343197441891462486446817 - 0.022221213088470944591072379398j,
     0.00305731278282013261080239621158 + 0.00132880341647271598152596174183j],
    [0, 0],
])


def _quad(seed, n=4, t=0.1):
    L1, M1, D, E = (random_dissipative(n, (seed, k)).matrix for k in range(4))
    return L1, convex_perturbation(L1, D, t), M1, convex_perturbation(M1, E, t)


def test_identity_first_trivial():
    f = F([(1, 0.3, 0.4), (0.5, 0.9, 0)])
    L1, _, M, _ = _quad(0)
    res = identity_first(f, L1, L1, M, 256)
    assert res["residual_s2"] <= 1e-12 and np.all(res["rhs"] == 0)
    L1, L2, M, _ = _quad(1)
    res = identity_first(F([(3, 0, 0)]), L1, L2, M, 256)
    assert np.all(res["lhs"] == 0) and np.all(res["rhs"] == 0)


def test_identity_first_derived_example():
    f = F([(1, 0.3, 0.4)])
    L2 = JORDAN + np.diag([0.1, 0])
    M = np.diag([0.0, 1.0])
    res = {N: identity_first(f, JORDAN, L2, M, N) for N in NS}
    assert np.max(np.abs(res[256]["lhs"] - LHS_FIRST)) <= 1e-15
    r = [res[N]["residual_s2"] for N in NS]
    assert r[2] <= 5e-2 * schatten_norm(JORDAN - L2, 2)
    assert r[3] <= r[0] / 2
    assert all(b <= a for a, b in zip(r, r[1:]))


def test_identity_second_trivial_and_mirror():
    f = F([(1, 0.3, 0.4)])
    L, M1, M2, _ = _quad(2)
    assert identity_second(f, L, M1, M1, 256)["residual_s2"] <= 1e-12
    res = identity_second(F([(1, 0.8, 0)]), L, M1, M2, 256)
    assert np.max(np.abs(res["lhs"])) <= 1e-15 and np.all(res["rhs"] == 0)
    # mirrored version of the derived first-variable example
    swapped = F([(1, 0.4, 0.3)])
    M2 = JORDAN + np.diag([0.1, 0])
    r = [identity_second(swapped, np.diag([0.0, 1.0]), JORDAN, M2, N)["residual_s2"] for N in NS]
    assert all(b <= a for a, b in zip(r, r[1:])) and r[3] <= r[0] / 2
    assert r[2] <= 5e-2 * schatten_norm(JORDAN - M2, 2)


def test_identity_full_examples():
    f = F([(1, 0.6, 0.0), (0.5, 0.2, 0.5)])
    L1, L2, M1, M2 = _quad(3)
    zero = identity_full(f, L1, L1, M1, M1, 256)
    assert zero["residual_s2"] <= 1e-12
    same_m = identity_full(f, L1, L2, M1, M1, 256)
    assert abs(same_m["residual_s2"] - identity_first(f, L1, L2, M1, 256)["residual_s2"]) <= 1e-12
    for order in ("ab12", "ba21"):
        r = [identity_full(f, L1, L2, M1, M2, N, order)["residual_s2"] for N in NS]
        assert residual_schedule_ok(r, max_pert_s2(L1, L2, M1, M2))
    res = identity_full(f, L1, L2, M1, M2, 512, "ab12")
    parts = identity_first(f, L1, L2, M1, 512)["rhs"] + identity_second(f, L2, M1, M2, 512)["rhs"]
    assert np.max(np.abs(res["rhs"] - parts)) <= 1e-12
    res = identity_full(f, L1, L2, M1, M2, 512, "ba21")
    parts = identity_first(f, L1, L2, M2, 512)["rhs"] + identity_second(f, L1, M1, M2, 512)["rhs"]
    assert np.max(np.abs(res["rhs"] - parts)) <= 1e-12
    with pytest.raises(ValueError):
        identity_full(f, L1, L2, M1, M2, 64, "ab21")


def test_identity_errors():
    L1, L2, M, _ = _quad(4)
    with pytest.raises(NotAnalytic):
        identity_first(F([(1, -0.3, 0)]), L1, L2, M, 64)
    with pytest.raises(DimensionMismatch):
        identity_first(F([(1, 0.3, 0)]), L1, L2, np.eye(3), 64)


def test_residual_schedule_rules():
    assert residual_schedule_ok([4, 2, 1, 0.5], 100)
    assert not residual_schedule_ok([4, 2, 3, 0.5], 100)
    assert not residual_schedule_ok([1, 0.9, 0.8, 0.7], 100)
    assert not residual_schedule_ok([4, 2, 1, 0.5], 1)
    assert residual_schedule_ok([0, 0, 0, 0], 0)


def test_regularization_examples():
    eps = [0.1, 1e-2, 1e-3, 1e-4]
    rows = regularization_convergence(np.eye(3) * 1j, np.eye(3) * 1j, eps)
    assert all(r["err"] == 0 for r in rows)
    rows = regularization_convergence([[1j]], [[2j]], eps)
    for r in rows:
        e = r["eps"]
        assert r["err"] == pytest.approx(abs(1j / (1 + e) - 2j / (1 + 2 * e) + 1j), rel=1e-9)
    L1, L2 = (random_dissipative(6, (5, k)) for k in range(2))
    rows = regularization_convergence(L1, L2, eps)
    assert regularization_contract_ok(rows)
    with pytest.raises(ValueError):
        regularization_convergence(L1, L2, [0.0])


def test_lipschitz_examples():
    L1, L2, M1, M2 = _quad(6)
    out = lipschitz_ratio(F([(1, 0.7, 0)]), L1, M1, L1, M2, 2)
    assert out["numerator"] == 0 and out["ratio"] == 0
    assert lipschitz_ratio(F([(1, 0, 0)]), L1, M1, L2, M2, 1)["numerator"] == 0
    with pytest.raises(ZeroPerturbation):
        lipschitz_ratio(F([(1, 0.7, 0)]), L1, M1, L1, M1, 2)
    f = standard_functions()["mixed"]
    full = lipschitz_ratio(f, L1, M1, L2, M2, 2)
    half = lipschitz_ratio(f, L1, M1, convex_perturbation(L1, L2, 0.5),
                           convex_perturbation(M1, M2, 0.5), 2)
    assert 0.35 <= half["numerator"] / full["numerator"] <= 0.75
    assert np.isfinite(full["ratio"]) and full["ratio"] < 100


def test_degenerate_direction():
    f = F([(1, 0.7, 0), (2j, 0.1, 0)])
    for seed in range(5):
        L1, _, M1, M2 = _quad(seed)
        assert lipschitz_ratio(f, L1, M1, L1, M2, 2)["numerator"] == 0


def test_elementary_bound_examples():
    f = standard_functions()["edge"]
    L1, L2, M, _ = _quad(7)
    same = elementary_bound_check(f, L1, L1, M)
    assert same["lhs_norm"] == 0 and same["ok"]
    const = elementary_bound_check(F([(2, 0, 0)]), L1, L2, M)
    assert const["lhs_norm"] == 0 and const["bound"] == 0 and const["ok"]
    for seed in range(10):
        L1, L2, M, _ = _quad(seed)
        for p in (1, 2):
            chk = elementary_bound_check(f, L1, L2, M, p, N=256)
            assert chk["ok"] and chk["k_min"] <= 10
            assert chk["lhs_norm"] <= 1.05 * chk["rep_bound"]


def test_certificates_hold():
    for name, f in standard_functions().items():
        L1, L2, M1, M2 = _quad(11)
        certs = schatten_certificates(f, L1, L2, M1, M2, 512)
        assert {c["kind"] for c in certs} == {"like1", "like2", "h"}
        assert all(c["ok"] for c in certs), (name, certs)


def test_standard_functions_band():
    for f in standard_functions().values():
        assert 0 < f.band_radius() <= 1
