from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from randchan import montecarlo as mc
from randchan.errors import DomainError
from randchan.freeprob import (
    DistKind, LimitingDistribution, boxplus_power, dilate_mu_k, free_cumulants_to_moments,
    moments_to_free_cumulants, mp_density, mp_entropy_K, mp_entropy_K_quadrature, mp_moment,
    mp_moment_nc, mp_moment_quadrature, mp_support, narayana,
)
from randchan.moments import MomentSequence
from randchan.symgroup import noncrossing_partitions

fractions = st.fractions(min_value=-5, max_value=5, max_denominator=20)


def test_mp_moment_small():
    c = Fraction(3, 7)
    assert mp_moment(1, c) == c
    assert mp_moment(2, c) == c + c ** 2
    assert mp_moment(3, c) == c + 3 * c ** 2 + c ** 3
    assert [mp_moment(p, 1) for p in range(1, 8)] == [1, 2, 5, 14, 42, 132, 429]


def test_mp_moment_oracles():
    for p in range(1, 7):
        for c in (Fraction(1, 3), Fraction(2), Fraction(5, 2)):
            assert mp_moment(p, c) == mp_moment_nc(p, c)
            assert mp_moment(p, c) == sum(narayana(p, j) * c ** j for j in range(1, p + 1))


def cumulants_by_mobius(m):
    """Free cumulants from moments by brute Mobius inversion over NC(p)."""
    kappa = []
    for p in range(1, len(m) + 1):
        rest = Fraction(0)
        for pi in noncrossing_partitions(p):
            if len(pi) == 1:
                continue
            term = Fraction(1)
            for b in pi.blocks:
                term *= kappa[len(b) - 1]
            rest += term
        kappa.append(m[p - 1] - rest)
    return kappa


@given(st.lists(fractions, min_size=1, max_size=6))
def test_transform_matches_nc_enumeration(m):
    assert moments_to_free_cumulants(m) == cumulants_by_mobius(m)


@given(st.lists(fractions, min_size=1, max_size=10))
def test_round_trip(seq):
    assert free_cumulants_to_moments(moments_to_free_cumulants(seq)) == seq
    assert moments_to_free_cumulants(free_cumulants_to_moments(seq)) == seq


def test_transform_known_cases():
    c = Fraction(2, 5)
    assert free_cumulants_to_moments([c] * 6) == [mp_moment(p, c) for p in range(1, 7)]
    assert moments_to_free_cumulants([1] * 6) == [1, 0, 0, 0, 0, 0]
    assert moments_to_free_cumulants(MomentSequence("x", [Fraction(1)] * 3)) == [1, 0, 0]
    with pytest.raises(ValueError):
        moments_to_free_cumulants([1] * 11)


def test_density_edges_and_normalization():
    assert mp_density(4.0, 1.0)[0] == 0.0
    assert mp_density(-1.0, 2.0)[0] == 0.0
    for c in (0.25, 1.0, 4.0):
        lo, hi = mp_support(c)
        assert lo == pytest.approx((1 - np.sqrt(c)) ** 2) and hi == pytest.approx((1 + np.sqrt(c)) ** 2)
        assert mp_density(hi + 1e-9, c)[0] == 0.0
        assert mp_density((lo + hi) / 2, c)[0] > 0
        assert mp_density(1.0, c)[1] == max(1 - c, 0)
        assert mp_moment_quadrature(0, c) == pytest.approx(1.0, abs=1e-8)
    with pytest.raises(DomainError):
        mp_density(1.0, 0.0)


@pytest.mark.parametrize("c", [0.5, 1.0, 2.0])
def test_quadrature_moments(c):
    for p in range(1, 6):
        assert abs(mp_moment_quadrature(p, c) - mp_moment(p, c)) < 1e-6


def test_density_against_plain_quadrature():
    from scipy import integrate
    c = 2.0
    lo, hi = mp_support(c)
    val, _ = integrate.quad(lambda x: x ** 2 * mp_density(x, c)[0], lo, hi, limit=200)
    assert val == pytest.approx(mp_moment(2, c), abs=1e-6)


def test_entropy_K():
    assert mp_entropy_K(1.0) == 0.5
    assert mp_entropy_K(0.5) == 0.125
    for c in (0.3, 1.0, 2.5):
        assert abs(mp_entropy_K_quadrature(c) - mp_entropy_K(c)) < 1e-6
    # continuity across the branch point
    assert mp_entropy_K(1 - 1e-9) == pytest.approx(mp_entropy_K(1.0), abs=1e-8)


def test_dilation():
    m = MomentSequence("x", [Fraction(2), Fraction(5), Fraction(14)])
    assert dilate_mu_k(m, 1).moments == m.moments
    assert dilate_mu_k([1, 1, 1], 2).moments == [Fraction(1, 2)] * 3
    with pytest.raises(DomainError):
        dilate_mu_k(m, 0)


def test_dilation_kappa_identity():
    # k^{-#sigma} phi_sigma(x) = phi_sigma(mu_(k)) for every sigma in NC(p)
    mu = [Fraction(1), Fraction(3), Fraction(2), Fraction(7), Fraction(1, 2), Fraction(4)]
    k = 3
    dil = dilate_mu_k(mu, k).moments
    for p in range(1, 7):
        for pi in noncrossing_partitions(p):
            lhs = Fraction(1, k ** len(pi))
            rhs = Fraction(1)
            for b in pi.blocks:
                lhs *= mu[len(b) - 1]
                rhs *= dil[len(b) - 1]
            assert lhs == rhs


def test_boxplus():
    m = [Fraction(1), Fraction(3), Fraction(2)]
    assert boxplus_power(m, 1).moments == m
    c, t = Fraction(1, 2), 3
    fp = [mp_moment(p, c) for p in range(1, 7)]
    out = boxplus_power(fp, t)
    assert moments_to_free_cumulants(out.moments) == [t * c] * 6
    assert out.moments == [mp_moment(p, t * c) for p in range(1, 7)]
    with pytest.raises(DomainError):
        boxplus_power(m, Fraction(1, 2))


def test_boxplus_of_dilated_dirac_matches_monte_carlo():
    # X = I/n through a random channel with k = 2: (1/n) trace((k n Z)^p) -> nu
    k, n = 2, 300
    nu = boxplus_power(dilate_mu_k([1, 1, 1], k), k * k).moments
    x = np.eye(n, dtype=complex) / n

    def stat(rng):
        z = mc.channel_apply_isometry(mc.sample_haar_isometry(n * k, n, rng), x, k)
        eig = np.linalg.eigvalsh((z + z.conj().T) / 2) * k * n
        return [np.mean(eig ** p) for p in (1, 2, 3)]

    reports, _ = mc.estimate_vector(mc.Statistic(["1", "2", "3"], stat), 4, seed=2)
    for rep, target in zip(reports, nu):
        assert rep.mean == pytest.approx(float(target), rel=0.03)


def test_limiting_distribution():
    fp = LimitingDistribution.free_poisson(Fraction(2), order=4)
    assert fp.kind is DistKind.FREE_POISSON and fp.moment(7) == mp_moment(7, Fraction(2))
    at = LimitingDistribution.atomic([(Fraction(1, 4), 0), (Fraction(3, 4), 2)])
    assert at.moment(2) == 3
    with pytest.raises(ValueError):
        LimitingDistribution.atomic([(0.5, 1.0)])
    assert LimitingDistribution.dirac(Fraction(1, 5)).to_dict()["param"] == "1/5"
