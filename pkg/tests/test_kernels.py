import importlib
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from polylab import _fallback, kernels

try:
    from polylab import _accel
except ImportError:  # extension not built
    _accel = None

BACKENDS = [_fallback] + ([_accel] if _accel is not None else [])
ids = [b.__name__.rsplit(".", 1)[-1] for b in BACKENDS]


def loop_energy_grad(x, s):
    """Direct double loop over pairs."""
    n, d = x.shape
    e = 0.0
    g = np.zeros_like(x)
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            diff = x[i] - x[j]
            r = math.sqrt(diff @ diff)
            e += -math.log(r) if s == 0 else r ** (-s) / s
            g[i] -= diff * r ** (-s - 2)
    return e, g


def loop_grad_hess(y, pos, q, s):
    d = y.shape[1]
    grads, hesses = [], []
    for t in y:
        g = np.zeros(d)
        h = np.zeros((d, d))
        for p, c in zip(pos, q):
            diff = t - p
            r2 = diff @ diff
            g -= c * diff * r2 ** (-s / 2 - 1)
            h += c * ((s + 2) * np.outer(diff, diff) * r2 ** (-s / 2 - 2) - np.eye(d) * r2 ** (-s / 2 - 1))
        grads.append(g)
        hesses.append(h)
    return np.array(grads), np.array(hesses)


def test_backend_reported():
    assert kernels.BACKEND in ("compiled", "python")
    if _accel is not None:
        assert kernels.BACKEND == "compiled"


def test_env_forces_fallback(monkeypatch):
    monkeypatch.setenv("POLYLAB_NO_EXT", "1")
    mod = importlib.reload(kernels)
    try:
        assert mod.BACKEND == "python" and mod.aberth is _fallback.aberth
    finally:
        monkeypatch.delenv("POLYLAB_NO_EXT")
        importlib.reload(kernels)


@pytest.mark.parametrize("backend", BACKENDS, ids=ids)
@pytest.mark.parametrize("s", [0.0, 1.0, 2.5, -1.0])
def test_energy_grad_matches_loops(backend, s):
    x = np.random.default_rng(3).normal(size=(12, 3))
    e, g = backend.riesz_energy_grad(np.ascontiguousarray(x), s)
    e_ref, g_ref = loop_energy_grad(x, s)
    assert e == pytest.approx(e_ref, rel=1e-12)
    assert np.allclose(g, g_ref, rtol=1e-11, atol=1e-13)


@pytest.mark.parametrize("backend", BACKENDS, ids=ids)
@pytest.mark.parametrize("s", [0.0, 1.0, 3.0])
def test_grad_hess_matches_loops(backend, s):
    rng = np.random.default_rng(5)
    pos = rng.normal(size=(4, 3))
    q = rng.uniform(-1, 2, 4)
    y = rng.normal(size=(6, 3)) * 2
    g, h = backend.coulomb_grad_hess(np.ascontiguousarray(y), np.ascontiguousarray(pos), q, s)
    g_ref, h_ref = loop_grad_hess(y, pos, q, s)
    assert np.allclose(g, g_ref, rtol=1e-11, atol=1e-13)
    assert np.allclose(h, h_ref, rtol=1e-11, atol=1e-13)


@pytest.mark.parametrize("backend", BACKENDS, ids=ids)
def test_aberth_finds_roots_of_unity(backend):
    n = 7
    coeffs = np.zeros(n + 1, complex)
    coeffs[0], coeffs[-1] = -1, 1
    z0 = 0.4 + 0.9 * np.exp(2j * np.pi * (np.arange(n) + 0.25) / n)
    z, iters = backend.aberth(coeffs, z0, 500, 1e-15)
    exact = np.exp(2j * np.pi * np.arange(n) / n)
    assert iters < 500
    assert all(np.min(np.abs(z - w)) <= 1e-13 for w in exact)


@pytest.mark.skipif(_accel is None, reason="extension not built")
@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 12))
def test_backends_agree_on_random_polynomials(seed, n):
    rng = np.random.default_rng(seed)
    coeffs = rng.normal(size=n + 1) + 1j * rng.normal(size=n + 1)
    z0 = 1.3 * np.exp(2j * np.pi * (np.arange(n) + 0.25) / n) + 0.1
    za, _ = _accel.aberth(coeffs, z0, 800, 1e-15)
    zf, _ = _fallback.aberth(coeffs, z0, 800, 1e-15)
    scale = max(1.0, float(np.max(np.abs(zf))))
    assert all(np.min(np.abs(za - w)) <= 1e-9 * scale for w in zf)
