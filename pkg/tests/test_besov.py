import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from disscalc.besov import (
    LPWindow,
    SampledFunction2D,
    analytic_check,
    besov_norm_homogeneous,
    besov_norm_inhomogeneous,
    besov_norms_sampled,
    build_window,
    decompose,
    f0_piece,
    lp_piece,
    lp_piece_fft,
    sup_norm,
)
from disscalc.errors import ConstantTermPresent, NyquistViolation
from disscalc.scalar_functions import AnalyticExpSum2D

F = AnalyticExpSum2D.from_terms
W = build_window()

# frozen 30-digit evaluations of the window
W_125 = 0.83637691855487515318
W_150 = 0.33183228244282071401


def test_window_examples():
    assert W(1.0) == 1.0
    assert W(0.5) == 0.0 and W(2.0) == 0.0
    assert W(math.sqrt(2)) + W(math.sqrt(2) / 2) == pytest.approx(1, abs=1e-15)
    assert W(1.25) == pytest.approx(W_125, abs=1e-15)
    assert W(1.5) == pytest.approx(W_150, abs=1e-15)


def test_window_support_and_equation():
    t = np.linspace(0.01, 4, 2000)
    w = W(t)
    assert np.all(w[(t <= 0.5) | (t >= 2)] == 0)
    assert np.all((w >= 0) & (w <= 1))
    band = np.linspace(1, 2, 500)
    assert np.max(np.abs(W(band) - (1 - W(band / 2)))) <= 1e-12


def test_partition_of_unity():
    t = np.logspace(-10, 10, 10_000, base=2.0)
    total = sum(W(t / 2.0**n) for n in range(-20, 21))
    assert np.max(np.abs(total - 1)) <= 1e-12


def test_lp_piece_examples():
    p = lp_piece(F([(1, 3, 4)]), 2, W)
    assert p.terms[0][0] == pytest.approx(W_125, abs=1e-15)
    assert len(lp_piece(F([(1, 0, 0)]), 1, W)) == 0
    assert lp_piece(F([(1, 2, 0)]), 1, W) == F([(1, 2, 0)])


def test_f0_piece_examples():
    assert f0_piece(F([(1, 0.3, 0.4)]), W) == F([(1, 0.3, 0.4)])
    assert len(f0_piece(F([(1, 2, 0)]), W)) == 0
    # at r = 1.5 only level 1 is active: 1 - w(0.75) = w(1.5)
    f0 = f0_piece(F([(1, 1.2, 0.9)]), W)
    assert f0.terms[0][0] == pytest.approx(1 - W(0.75), abs=1e-15)
    assert f0.terms[0][0] == pytest.approx(W_150, abs=1e-15)


def test_inhomogeneous_examples():
    for mode in ("coef_sum", "grid"):
        assert besov_norm_inhomogeneous(F([(1, 0.3, 0.4)]), sup_mode=mode) == pytest.approx(1)
        assert besov_norm_inhomogeneous(F([(1, 2, 0)]), sup_mode=mode) == pytest.approx(2)
    assert besov_norm_inhomogeneous(F([])) == 0


def test_homogeneous_examples():
    assert besov_norm_homogeneous(F([(1, 1, 0)])) == pytest.approx(1)
    assert besov_norm_homogeneous(F([(1, 2, 0)])) == pytest.approx(2)
    assert besov_norm_homogeneous(F([(3, 0.6, 0.8)])) == pytest.approx(3)
    with pytest.raises(ConstantTermPresent, match="term 0"):
        besov_norm_homogeneous(F([(1, 0, 0), (1, 1, 0)]))


def test_analytic_check():
    assert analytic_check(F([(1, 1, 1)]))
    assert not analytic_check(F([(1, -1, 0)]))
    assert analytic_check(F([]))


def test_sup_norm_bracket(rng):
    for _ in range(10):
        k = rng.integers(2, 5)
        f = F([(rng.normal() + 1j * rng.normal(), *rng.integers(0, 5, 2) / 2) for _ in range(k)])
        assert sup_norm(f, "grid", 512) <= sup_norm(f, "coef_sum") + 1e-12
    single = F([(2 - 1j, 0.7, 0.2)])
    assert sup_norm(single, "grid") == pytest.approx(sup_norm(single, "coef_sum"), abs=1e-9)
    with pytest.raises(ValueError):
        sup_norm(single, "bogus")


def test_grid_sup_of_aligned_sum():
    # 1 + e^{ix} peaks at 2 on the grid point x = 0
    assert sup_norm(F([(1, 0, 0), (1, 1, 0)]), "grid") == pytest.approx(2)


def test_decompose_levels_and_reconstruction():
    dec = decompose(F([(1, 3, 4), (0.5, 0.2, 0.1)]))
    assert set(dec.pieces) == {2, 3}
    assert dec.window_id == W.window_id
    assert dec.norm_inhomogeneous == pytest.approx(
        dec.sup_f0 + sum(2**n * s for n, s in dec.sup_norms.items())
    )


coef = st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False)
freq = st.floats(0, 40, allow_nan=False)


@given(st.lists(st.tuples(coef, freq, freq), min_size=1, max_size=6))
def test_reconstruction_coefficientwise(terms):
    f = F(terms)
    rec = dict(((a, b), c) for c, a, b in decompose(f).reconstruct().terms)
    for c, a, b in f.terms:
        assert abs(rec.get((a, b), 0) - c) <= 1e-12 * max(1, abs(c))


@given(st.lists(st.tuples(coef, freq, freq), max_size=4),
       st.lists(st.tuples(coef, freq, freq), max_size=4))
def test_inhomogeneous_triangle(t1, t2):
    f, g = F(t1), F(t2)
    lhs = besov_norm_inhomogeneous(f + g)
    assert lhs <= besov_norm_inhomogeneous(f) + besov_norm_inhomogeneous(g) + 1e-9


def test_subnormal_frequency_levels():
    f = F([(1, 0.0, 5e-324), (2, 3.0, 0.0)])
    rec = dict(((a, b), c) for c, a, b in decompose(f).reconstruct().terms)
    assert abs(rec[(0.0, 5e-324)] - 1) <= 1e-12 and abs(rec[(3.0, 0.0)] - 2) <= 1e-12
    assert math.isfinite(besov_norm_inhomogeneous(f))


def test_fft_piece_matches_exact():
    f = F([(1, 3, 4)])
    samp = SampledFunction2D.sample(f, size=64)
    piece = lp_piece_fft(samp, 2, W)
    exact = SampledFunction2D.sample(lp_piece(f, 2, W), size=64)
    assert np.max(np.abs(piece.values - exact.values)) <= 1e-6
    mixed = F([(1, 3, 4), (0.5j, 1, 0), (0.2, 6, 2)])
    samp = SampledFunction2D.sample(mixed, size=64)
    for n in range(-1, 4):
        got = lp_piece_fft(samp, n, W).values
        want = SampledFunction2D.sample(lp_piece(mixed, n, W), size=64).values
        assert np.max(np.abs(got - want)) <= 1e-6


def test_fft_trivial_cases():
    const = SampledFunction2D((0, 0), 2 * np.pi / 32, np.ones((32, 32)))
    assert np.max(np.abs(lp_piece_fft(const, 1, W).values)) <= 1e-12
    zero = SampledFunction2D((0, 0), 2 * np.pi / 32, np.zeros((32, 32)))
    assert np.all(lp_piece_fft(zero, 1, W).values == 0)
    with pytest.raises(NyquistViolation):
        lp_piece_fft(zero, 5, W)


def test_sampled_validation():
    with pytest.raises(ValueError):
        SampledFunction2D((0, 0), 0.1, np.zeros((6, 6)))
    with pytest.raises(ValueError):
        SampledFunction2D((0, 0), 0.1, np.zeros((8, 4)))


def test_sampled_norms_report_range():
    f = F([(1, 2, 0)])
    out = besov_norms_sampled(SampledFunction2D.sample(f, size=64))
    assert out["norm_inhomogeneous"] == pytest.approx(2, abs=1e-9)
    assert out["omitted"].startswith("n >")


def test_window_is_value_type():
    assert LPWindow() == build_window()
