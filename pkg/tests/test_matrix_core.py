import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from disscalc.errors import SolveFailure
from disscalc.matrix_core import (
    PRNG_VERSION,
    DissipativeMatrix,
    cayley,
    imag_part,
    is_dissipative,
    make_rng,
    matrix_from_json,
    matrix_to_json,
    random_dissipative,
    random_unitary,
    regularize,
    resolvent_reg,
    schatten_norm,
)


def test_is_dissipative_examples(rng):
    H = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    assert is_dissipative(H + H.conj().T)
    A = np.array([[1j, 1], [0, 1j]])
    assert is_dissipative(A)
    assert np.allclose(np.linalg.eigvalsh(imag_part(A)), [0.5, 1.5])
    assert not is_dissipative(np.array([[-1j, 0], [0, 0]]))


def test_dissipative_matrix_guards():
    with pytest.raises(ValueError, match="not dissipative"):
        DissipativeMatrix([[-1j]])
    with pytest.raises(ValueError):
        DissipativeMatrix(np.zeros((2, 3)))
    L = DissipativeMatrix([[1j, 1], [0, 1j]])
    assert L.n == 2 and L.shape == (2, 2)
    with pytest.raises(ValueError):
        L.matrix[0, 0] = 0
    assert np.array_equal(np.asarray(L), L.matrix)


def test_random_dissipative_examples():
    for n in (1, 3, 8):
        L = random_dissipative(n, 7, scale=2.0)
        assert is_dissipative(L, tol=1e-12)
        assert np.linalg.norm(L.matrix, 2) == pytest.approx(2.0)
    assert np.array_equal(random_dissipative(5, 3).matrix, random_dissipative(5, 3).matrix)
    assert not np.array_equal(random_dissipative(5, 3).matrix, random_dissipative(5, 4).matrix)
    z = random_dissipative(1, 11).matrix[0, 0]
    assert z.imag >= 0
    H = random_dissipative(4, 1, hermitian=True).matrix
    assert np.allclose(H, H.conj().T)


def test_rng_keys():
    a = make_rng((1, 2)).standard_normal(3)
    assert np.array_equal(a, make_rng([1, 2]).standard_normal(3))
    assert not np.array_equal(a, make_rng((2, 1)).standard_normal(3))
    assert PRNG_VERSION.startswith("numpy.random.Philox/")


def test_resolvent_examples():
    assert np.allclose(resolvent_reg(1j * np.eye(3), 1.0), np.eye(3) / 2)
    assert np.allclose(resolvent_reg(np.zeros((2, 2)), 0.3), np.eye(2))
    assert np.allclose(resolvent_reg(np.diag([2j]), 0.5), [[0.5]])
    R, cond = resolvent_reg(np.diag([2j]), 0.5, return_cond=True)
    assert cond == pytest.approx(1.0)
    with pytest.raises(ValueError):
        resolvent_reg(np.eye(2), 0.0)
    # I - i eps L singular when L = -i/eps (not dissipative, but exercised)
    with pytest.raises(SolveFailure):
        resolvent_reg(np.array([[-1j, 0], [0, -1j]]), 1.0)


def test_regularize_examples():
    for eps in (0.1, 1.0, 3.0):
        assert np.allclose(regularize(1j * np.eye(2), eps).matrix, 1j / (1 + eps) * np.eye(2))
    lam = np.array([-2.0, 0.5, 3.0])
    eps = 0.2
    Le = regularize(np.diag(lam), eps).matrix
    assert np.allclose(np.diag(Le), lam / (1 - 1j * eps * lam))
    assert np.allclose(np.diag(Le).imag, eps * lam**2 / (1 + eps**2 * lam**2))
    for seed in range(10):
        L = random_dissipative(5, seed, scale=3.0)
        assert is_dissipative(regularize(L, 0.05))


def test_regularize_norm_growth():
    for seed in range(20):
        L = random_dissipative(5, seed, scale=2.0).matrix
        nL = np.linalg.norm(L, 2)
        for eps in (0.01, 0.1, 0.24):
            assert eps * nL < 0.5
            assert np.linalg.norm(regularize(L, eps).matrix, 2) <= nL / (1 - eps * nL) + 1e-12


def test_schatten_examples():
    assert schatten_norm(np.eye(2), 2) == pytest.approx(math.sqrt(2))
    assert schatten_norm(np.diag([3, 4]), math.inf) == 4
    assert schatten_norm(np.array([[0, 1], [0, 0]]), 1) == pytest.approx(1)
    assert schatten_norm(np.zeros((3, 3)), 1) == 0
    with pytest.raises(ValueError):
        schatten_norm(np.eye(2), 0.5)


def test_schatten_trace_oracles(rng):
    A = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
    assert schatten_norm(A, 2) == pytest.approx(np.sqrt(np.trace(A.conj().T @ A).real))
    # S_1 via the trace of the positive square root of A*A
    w = np.linalg.eigvalsh(A.conj().T @ A)
    assert schatten_norm(A, 1) == pytest.approx(np.sum(np.sqrt(np.clip(w, 0, None))))
    assert schatten_norm(1e200 * A, 50) < math.inf


def test_schatten_monotone_invariant_triangle(rng):
    for k in range(100):
        A = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        B = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        vals = [schatten_norm(A, p) for p in (1, 1.5, 2, 4, math.inf)]
        assert all(a >= b - 1e-12 for a, b in zip(vals, vals[1:]))
        U, V = random_unitary(4, (k, 0)), random_unitary(4, (k, 1))
        for p in (1, 2, math.inf):
            assert abs(schatten_norm(U @ A @ V, p) - schatten_norm(A, p)) <= 1e-10 * vals[0]
            assert schatten_norm(A + B, p) <= schatten_norm(A, p) + schatten_norm(B, p) + 1e-10


def test_cayley_contraction():
    for seed in range(200):
        L = random_dissipative(1 + seed % 6, seed, scale=1 + seed % 5)
        assert np.linalg.norm(cayley(L), 2) <= 1 + 1e-10


def test_matrix_json_roundtrip(tmp_path):
    A = random_dissipative(3, 1).matrix
    data = matrix_to_json(A)
    assert np.array_equal(matrix_from_json(data), A)
    import json
    path = tmp_path / "m.json"
    path.write_text(json.dumps(data))
    assert np.array_equal(matrix_from_json(path), A)
    with pytest.raises(ValueError):
        matrix_from_json({"n": 2, "re": [[1]], "im": [[0]]})


@given(st.integers(1, 6), st.integers(0, 2**32), st.floats(0.1, 10))
def test_random_dissipative_property(n, seed, scale):
    L = random_dissipative(n, seed, scale=scale)
    assert is_dissipative(L, tol=1e-12 * scale)
