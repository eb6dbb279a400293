import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from randchan import montecarlo as mc
from randchan.errors import CapacityError, SizeMismatchError
from randchan.moments import bi_channel_conjugate_moment, rank_one_output_moment
from randchan.predictions import bell_eigenvalues
from randchan.weingarten import wg_exact


def within(rep, target, n_se=3.0):
    return abs(rep.mean - target) <= n_se * rep.stderr


def test_ginibre_normalization():
    g = mc.sample_ginibre(100_000, 1, np.random.default_rng(1))[:, 0]
    sq = np.abs(g) ** 2
    assert abs(sq.mean() - 1) < 3 * sq.std() / math.sqrt(sq.size)
    assert abs(g.real.mean()) < 3 * g.real.std() / math.sqrt(g.size)
    assert abs(g.imag.var() - 0.5) < 0.01
    rep = mc.estimate(lambda rng: float(np.sum(np.abs(mc.sample_ginibre(8, 8, rng)) ** 2)), 4000, seed=2)
    assert within(rep, 64)


def test_haar_unitarity_and_degree_two_moments():
    m = 6
    rng = np.random.default_rng(3)
    u = mc.sample_haar_unitary(m, rng)
    assert np.allclose(u @ u.conj().T, np.eye(m), atol=1e-10)
    draws = np.array([mc.sample_haar_unitary(m, rng)[:2, :2] for _ in range(30_000)])
    a, b = np.abs(draws[:, 0, 0]) ** 2, np.abs(draws[:, 1, 1]) ** 2
    wg = wg_exact(m, 2)
    targets = {
        "E|U11|^2": (a, float(wg_exact(m, 1)((1,)))),
        "E|U11|^2|U22|^2": (a * b, float(wg((1, 1)))),
        "E|U11|^4": (a * a, float(2 * wg((1, 1)) + 2 * wg((2,)))),
    }
    for name, (x, target) in targets.items():
        assert abs(x.mean() - target) < 3.5 * x.std() / math.sqrt(x.size), name


def test_isometry_shape():
    v = mc.sample_haar_isometry(12, 3, np.random.default_rng(0))
    assert np.allclose(v.conj().T @ v, np.eye(3), atol=1e-10)
    with pytest.raises(ValueError):
        mc.sample_haar_isometry(2, 3, np.random.default_rng(0))


@given(st.integers(1, 5), st.integers(1, 5), st.integers(0, 2 ** 32))
def test_channel_output_is_a_state(n, k, seed):
    rng = np.random.default_rng(seed)
    x = mc.sample_ginibre(n, n, rng)
    x = x @ x.conj().T
    x /= np.trace(x)
    z = mc.channel_apply(mc.sample_haar_unitary(n * k, rng), x, k)
    assert abs(np.trace(z) - 1) < 1e-9
    assert mc.spectrum((z + z.conj().T) / 2).min() >= 0


def test_channel_apply_errors():
    with pytest.raises(SizeMismatchError):
        mc.channel_apply(np.eye(5), np.eye(2) / 2, 2)


def test_gaussianization_two_pathways():
    n, k, samples = 4, 5, 4000
    a, _ = mc.estimate_vector(mc.moment_statistic("single", n, k, [2, 3]), samples, seed=10)
    b, _ = mc.estimate_vector(mc.moment_statistic("wishart", n, k, [2, 3]), samples, seed=20)
    for x, y in zip(a, b):
        assert abs(x.mean - y.mean) < 3 * math.hypot(x.stderr, y.stderr)


def test_regime_one_flattening():
    # spectrum edges sit near (1 +- sqrt(n/k))^2 / n, so 0.05 needs k well above 200
    eig = mc.sample_spectrum("single", 4, 2000, np.random.default_rng(4))
    assert np.all(np.abs(eig - 0.25) < 0.05)
    wide = [np.abs(mc.sample_spectrum("single", 4, 200, mc.sample_rng(4, i)) - 0.25).max()
            for i in range(200)]
    assert np.median(wide) < 0.1


@pytest.mark.parametrize("mode", ["independent", "conjugate"])
def test_bi_channel_output_is_a_state(mode):
    rng = np.random.default_rng(5)
    z = mc.bi_channel_output(mode, 3, 2, rng)
    assert abs(np.trace(z) - 1) < 1e-9
    assert mc.spectrum(z).min() >= 0
    eig = mc.bi_channel_spectrum(mode, 3, 2, rng)
    assert eig.size == 9 and abs(eig.sum() - 1) < 1e-9


def test_bi_channel_guard():
    with pytest.raises(CapacityError):
        mc.bi_channel_factor("conjugate", mc.BI_CHANNEL_MAX_N + 1, 2, np.random.default_rng(0))


def test_spectrum():
    assert np.allclose(mc.spectrum(np.eye(4) / 4), [0.25] * 4)
    assert np.allclose(mc.spectrum(np.diag([0.3, 0.7])), [0.7, 0.3])
    rng = np.random.default_rng(6)
    for _ in range(20):
        g = mc.sample_ginibre(3, 3, rng)
        h = g + g.conj().T
        roots = np.sort(np.roots(np.poly(h)).real)[::-1]
        assert np.allclose(mc.spectrum(h), roots, atol=1e-8)
    with pytest.raises(ValueError):
        mc.spectrum(np.array([[0, 1], [0, 0]], dtype=float))
    assert mc.spectrum(np.diag([1.0, -1e-12]))[-1] == 0.0


def test_vn_entropy():
    n = 5
    assert mc.vn_entropy(np.full(n * n, 1 / n ** 2)) == pytest.approx(2 * math.log(n))
    assert mc.vn_entropy([1, 0, 0]) == 0.0
    eig = [float(v) for v, m in bell_eigenvalues(2) for _ in range(m)]
    assert mc.vn_entropy(eig) == pytest.approx(-(5 / 8) * math.log(5 / 8) - 3 * (1 / 8) * math.log(1 / 8))
    with pytest.raises(ValueError):
        mc.vn_entropy([1.1, -0.1])


@pytest.mark.parametrize("mode", ["independent", "conjugate"])
def test_qzq_interlacing(mode):
    rng = np.random.default_rng(7)
    for n, k in [(2, 2), (3, 2), (3, 4), (4, 3)]:
        z = mc.bi_channel_output(mode, n, k, rng)
        lam = mc.spectrum(z)
        bulk, kernel = mc.qzq_spectrum(z, n)
        assert abs(kernel) < 1e-12 and bulk.size == n * n - 1
        tol = 1e-12
        assert np.all(lam[:-1] + tol >= bulk) and np.all(bulk + tol >= lam[1:])
    with pytest.raises(SizeMismatchError):
        mc.qzq_spectrum(np.eye(4), 3)


def test_estimator_against_exact():
    rep = mc.estimate(lambda rng: float(np.sum(mc.sample_spectrum("single", 8, 8, rng) ** 2)), 10_000, seed=8)
    assert within(rep, float(rank_one_output_moment(2, 8, 8)))
    assert rank_one_output_moment(2, 8, 8) == pytest.approx(16 / 65)
    rep = mc.estimate(lambda rng: float(np.sum(mc.sample_spectrum("bi-conj", 6, 6, rng) ** 2)), 1000, seed=9)
    assert within(rep, float(bi_channel_conjugate_moment(2, 6, 6)))


def test_estimator_determinism():
    stat = mc.moment_statistic("single", 3, 4, [2, 3])
    a, va = mc.estimate_vector(stat, 40, seed=123, threads=1)
    b, vb = mc.estimate_vector(stat, 40, seed=123, threads=4)
    assert np.array_equal(va, vb)
    assert [(r.mean, r.stderr) for r in a] == [(r.mean, r.stderr) for r in b]
    c, _ = mc.estimate_vector(stat, 40, seed=124)
    assert c[0].mean != a[0].mean
    with pytest.raises(ValueError):
        mc.estimate(lambda rng: 1.0, 1, seed=0)


def test_report_fields():
    rep = mc.estimate(lambda rng: rng.standard_normal(), 400, seed=1, target=0.0)
    assert rep.count == 400 and rep.within(4)
    values = [mc.sample_rng(1, i).standard_normal() for i in range(400)]
    assert rep.stderr == pytest.approx(np.std(values, ddof=1) / 20)


def test_pairwise_sum():
    x = np.random.default_rng(0).standard_normal((1001, 3))
    assert np.allclose(mc.pairwise_sum(x), x.sum(axis=0))


def test_spectral_sample():
    s = mc.SpectralSample.draw("bi-indep", 3, 3, seed=4)
    assert s.eigenvalues.size == 9 and np.all(np.diff(s.eigenvalues) <= 0)
    assert abs(s.eigenvalues.sum() - 1) < 1e-9
    with pytest.raises(ValueError):
        mc.sample_spectrum("nope", 2, 2, np.random.default_rng(0))
