import numpy as np
import pytest

from noisebeam import kernels
from noisebeam._kernels_py import posterior_mean as py_posterior_mean


def _random_inputs(seed, n=12, d=64):
    rng = np.random.default_rng(seed)
    corpus = rng.normal(size=(n, d))
    v = rng.normal(size=d)
    alpha = rng.uniform(0.2, 1.0, size=d)
    inv = rng.uniform(0.0, 50.0, size=d)
    inv[rng.random(d) < 0.1] = 0.0  # sigma=0 entries must drop out
    return v, corpus, alpha, inv


def test_backend_name_is_declared():
    assert kernels.backend_name() in ("numpy", "cython")


def test_backends_agree():
    if kernels.backend_name() == "numpy":
        pytest.skip("compiled backend not built")
    for seed in range(5):
        v, corpus, alpha, inv = _random_inputs(seed)
        m_c, w_c = kernels.posterior_mean(v, corpus, alpha, inv)
        m_p, w_p = py_posterior_mean(v, corpus, alpha, inv)
        np.testing.assert_allclose(m_c, m_p, rtol=1e-12, atol=1e-15)
        np.testing.assert_allclose(w_c, w_p, rtol=1e-12, atol=1e-15)


def test_weights_sum_to_one():
    v, corpus, alpha, inv = _random_inputs(42)
    _, w = kernels.posterior_mean(v, corpus, alpha, inv)
    assert w.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.all(w >= 0)


def test_accepts_read_only_inputs():
    v, corpus, alpha, inv = _random_inputs(7)
    for arr in (v, corpus, alpha, inv):
        arr.flags.writeable = False
    m, w = kernels.posterior_mean(v, corpus, alpha, inv)
    assert np.all(np.isfinite(m)) and np.all(np.isfinite(w))


def test_zero_inv_entries_are_ignored():
    # entries with inv_two_sigma_sq == 0 cannot influence the weights
    rng = np.random.default_rng(8)
    corpus = rng.normal(size=(5, 10))
    v = rng.normal(size=10)
    alpha = np.ones(10)
    inv = np.ones(10) * 3.0
    inv[4:] = 0.0
    v2 = v.copy()
    v2[4:] = 999.0  # wild values where inv is zero
    _, w1 = kernels.posterior_mean(v, corpus, alpha, inv)
    _, w2 = kernels.posterior_mean(v2, corpus, alpha, inv)
    np.testing.assert_allclose(w1, w2, rtol=1e-12)


def test_extreme_logits_stay_finite():
    # widely separated clips at tiny sigma: naive exponentials overflow
    corpus = np.stack([np.zeros(6), np.full(6, 100.0)])
    v = np.full(6, 0.01)
    alpha = np.ones(6)
    inv = np.full(6, 5e3)
    m, w = kernels.posterior_mean(v, corpus, alpha, inv)
    assert np.all(np.isfinite(m))
    assert w[0] == pytest.approx(1.0, abs=1e-12)
