import importlib

import numpy as np
import pytest

from disscalc import _kernels_py, kernels

BACKENDS = [_kernels_py]
try:
    from disscalc import _kernels as _compiled

    BACKENDS.append(_compiled)
except ImportError:  # pragma: no cover - extension not built
    _compiled = None

ids = [b.__name__.rsplit(".", 1)[-1] for b in BACKENDS]


def _dense_loewner(u, du):
    J = u.size
    idx = np.arange(J)
    d = idx[:, None] - idx[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        G = (u[:, None] - u[None, :]) / d
    G[idx, idx] = du
    return G


@pytest.mark.parametrize("mod", BACKENDS, ids=ids)
def test_cardinal_values(mod):
    z = np.array([0.0, 1e-6, np.pi, -3.3, 2 * np.pi * 2 / 1.5, 7.1])
    N, s = 4, 1.5
    got = mod.cardinal_values(z, s, N)
    js = np.arange(-N, N + 1)
    w = s * z[:, None] - 2 * np.pi * js[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        want = (np.exp(1j * s * z[:, None]) - 1) / w
    want[np.abs(w) < 1e-12] = 1j
    small = np.abs(w) < 1e-4
    want[small] = (1j + 1j**2 * w[small] / 2 + 1j**3 * w[small] ** 2 / 6)
    assert np.allclose(got, want, atol=1e-14)


@pytest.mark.parametrize("mod", BACKENDS, ids=ids)
def test_sumsq_and_series(mod, rng):
    x = rng.uniform(-10, 10, 13)
    vals = mod.cardinal_values(x, 1.0, 50)
    assert np.allclose(mod.cardinal_sumsq(x, 1.0, 50), np.sum(np.abs(vals) ** 2, axis=1), atol=1e-14)
    samples = rng.normal(size=101) + 1j * rng.normal(size=101)
    assert np.allclose(mod.cardinal_series(samples, 1.0, x), vals @ samples / 1j, atol=1e-12)


@pytest.mark.parametrize("mod", BACKENDS, ids=ids)
@pytest.mark.parametrize("J,m", [(0, 3), (1, 1), (7, 4), (65, 16), (300, 9)])
def test_loewner_matches_dense(mod, J, m, rng):
    theta = 0.37
    j = np.arange(J) - J // 2
    u = np.exp(2j * np.pi * theta * j)
    du = 2j * np.pi * theta * u
    Y = rng.normal(size=(J, m)) + 1j * rng.normal(size=(J, m))
    got = mod.loewner_apply(u, du, Y)
    assert got.shape == (J, m)
    if J:
        want = _dense_loewner(u, du) @ Y
        assert np.max(np.abs(got - want)) <= 1e-12 * (1 + np.max(np.abs(want)))


@pytest.mark.skipif(_compiled is None, reason="extension not built")
def test_backends_agree(rng):
    J, m = 1025, 16
    u = np.exp(2j * np.pi * 0.61 * np.arange(J))
    du = 2j * np.pi * 0.61 * u
    Y = rng.normal(size=(J, m)) + 1j * rng.normal(size=(J, m))
    a = _compiled.loewner_apply(u, du, Y)
    b = _kernels_py.loewner_apply(u, du, Y)
    assert np.max(np.abs(a - b)) <= 1e-11
    x = rng.uniform(-10, 10, 40)
    assert np.allclose(_compiled.cardinal_sumsq(x, 1.0, 2000),
                       _kernels_py.cardinal_sumsq(x, 1.0, 2000), atol=1e-13)


def test_pure_python_switch(monkeypatch):
    monkeypatch.setenv("DISSCALC_PURE_PYTHON", "1")
    mod = importlib.reload(kernels)
    try:
        assert mod.BACKEND == "numpy"
        assert mod.loewner_apply is _kernels_py.loewner_apply
    finally:
        monkeypatch.delenv("DISSCALC_PURE_PYTHON")
        importlib.reload(kernels)
    assert kernels.BACKEND == ("cython" if _compiled is not None else "numpy")
