from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from randchan import montecarlo as mc
from randchan.errors import CapacityError, SingularityError, SizeMismatchError
from randchan.freeprob import mp_moment
from randchan.moments import (
    TraceFunctional, bi_channel_asymmetric_limit_moment, bi_channel_conjugate_moment,
    bi_channel_independent_moment, general_input_moment, moment_rank_r, moment_sequence,
    qzq_moment, rank_one_output_moment, vertical_cancellation_sum, wishart_moment,
)
from randchan.symgroup import Kind, Permutation, canonical, is_vertical, symmetric_group
from randchan.weingarten import solve_exact


def richardson(ns, values):
    """Fit L + a_1/n + ... through the points and return L."""
    rows = [[Fraction(1, n ** j) for j in range(len(ns))] for n in ns]
    return float(solve_exact(rows, [Fraction(v) for v in values])[0])


# -- Wishart ---------------------------------------------------------------------

def test_wishart_small_values():
    n, k = 3, 4
    assert wishart_moment(Permutation.identity(1), None, n, [k]) == n * k
    assert wishart_moment(canonical(Kind.GAMMA, 2), None, n, [k]) == n * k * (n + k)
    assert wishart_moment(Permutation.identity(2), None, n, [k]) == (n * k) ** 2 + n * k


@given(st.integers(1, 5), st.integers(1, 6), st.integers(1, 6))
def test_wishart_trace_power_is_gamma_moment(p, n, k):
    # trace W is a sum of nk unit exponentials, so E (trace W)^p = nk (nk+1) ... (nk+p-1)
    expected = 1
    for j in range(p):
        expected *= n * k + j
    assert wishart_moment(Permutation.identity(p), None, n, [k]) == expected


def test_wishart_two_matrices():
    # E W_j = k_j I and independence give E trace(W_1 W_2) = n k_1 k_2
    assert wishart_moment(canonical(Kind.GAMMA, 2), [1, 2], 3, [2, 5]) == 3 * 2 * 5
    # E trace(W_1) trace(W_2) = (n k_1)(n k_2)
    assert wishart_moment(Permutation.identity(2), [1, 2], 3, [2, 5]) == 3 * 2 * 3 * 5
    with pytest.raises(ValueError):
        wishart_moment(Permutation.identity(2), [1, 3], 3, [2, 5])


# -- single channel ------------------------------------------------------------------

def test_rank_one_small_values():
    assert rank_one_output_moment(1, 4, 7) == 1
    assert rank_one_output_moment(2, 2, 2) == Fraction(4, 5)
    for n, k in [(2, 3), (5, 4), (8, 8)]:
        assert rank_one_output_moment(2, n, k) == Fraction(n + k, n * k + 1)


@pytest.mark.parametrize("n,k", [(2, 3), (3, 3), (1, 5), (4, 2)])
def test_gaussianization(n, k):
    for p in range(1, 5):
        if n * k >= p:
            assert general_input_moment(p, n, k, TraceFunctional.rank_one(p)) == \
                rank_one_output_moment(p, n, k)


def test_rank_r_inputs():
    for p in range(1, 4):
        assert moment_rank_r(p, 3, 2, 1) == rank_one_output_moment(p, 3, 2)
        tf_flat = TraceFunctional.from_spectrum(p, [1, 1])
        assert general_input_moment(p, 3, 2, tf_flat) == moment_rank_r(p, 3, 2, 2)
    assert moment_rank_r(1, 3, 2, 3) == 1
    with pytest.raises(SizeMismatchError):
        general_input_moment(2, 3, 2, TraceFunctional.rank_one(3))
    with pytest.raises(SingularityError):
        general_input_moment(4, 1, 2, TraceFunctional.rank_one(4))


def test_general_input_against_monte_carlo():
    n, k = 3, 2
    eig = [Fraction(1, 2), Fraction(1, 3), Fraction(1, 6)]
    x = np.diag([float(e) for e in eig]).astype(complex)

    def stat(rng):
        z = mc.channel_apply(mc.sample_haar_unitary(n * k, rng), x, k)
        return [np.real(np.trace(z @ z)), np.real(np.trace(z @ z @ z))]

    reports, _ = mc.estimate_vector(mc.Statistic(["p2", "p3"], stat), 6000, seed=11)
    for p, rep in zip((2, 3), reports):
        exact = general_input_moment(p, n, k, TraceFunctional.from_spectrum(p, eig))
        assert abs(rep.mean - float(exact)) < 4 * rep.stderr


def test_single_channel_free_poisson_limit():
    # n^{p-1} E trace Z^p = E tracenorm((nZ)^p) -> mp_moment(p, 1) at k = n
    ns = (8, 16, 32)
    for p in range(1, 5):
        vals = [Fraction(n) ** (p - 1) * rank_one_output_moment(p, n, n) for n in ns]
        assert richardson(ns, vals) == pytest.approx(mp_moment(p, 1), rel=0.02)


# -- bi-channels ---------------------------------------------------------------------

def test_trace_one_everywhere():
    for n, k in [(2, 2), (3, 4)]:
        assert bi_channel_independent_moment(1, n, k) == 1
        assert bi_channel_conjugate_moment(1, n, k) == 1


@pytest.mark.parametrize("mode,exact_fn", [
    ("independent", bi_channel_independent_moment),
    ("conjugate", bi_channel_conjugate_moment),
])
def test_bi_channel_against_monte_carlo(mode, exact_fn):
    n, k = 2, 3

    def stat(rng):
        eig = mc.bi_channel_spectrum(mode, n, k, rng)
        return [np.sum(eig ** 2), np.sum(eig ** 3)]

    reports, _ = mc.estimate_vector(mc.Statistic(["p2", "p3"], stat), 8000, seed=5)
    for p, rep in zip((2, 3), reports):
        assert abs(rep.mean - float(exact_fn(p, n, k))) < 4 * rep.stderr


def test_independent_scaling_limit():
    # n^{2p-2} E trace Z^p -> mp_moment(p, c^2) at c = 1
    ns = (6, 8, 12, 16)
    for p, target in ((2, 2), (3, 5)):
        vals = [Fraction(n) ** (2 * p - 2) * bi_channel_independent_moment(p, n, n) for n in ns]
        assert richardson(ns, vals) == pytest.approx(target, abs=0.05)


def test_asymmetric_limit():
    assert bi_channel_asymmetric_limit_moment(1, Fraction(3, 2), 4) == Fraction(9, 4)
    for p in range(1, 6):
        c = Fraction(2, 3)
        assert bi_channel_asymmetric_limit_moment(p, c, 1) == mp_moment(p, c) ** 2
    assert bi_channel_asymmetric_limit_moment(3, 1.0, 10 ** 6) == pytest.approx(mp_moment(3, 1), abs=1e-4)
    assert bi_channel_asymmetric_limit_moment(4, Fraction(1), 10 ** 9) == pytest.approx(14, abs=1e-6)


def test_qzq_first_moment_against_monte_carlo():
    n = k = 8
    psi = np.zeros(n * n)
    psi[:: n + 1] = 1 / np.sqrt(n)

    def stat(rng):
        z = mc.bi_channel_output("conjugate", n, k, rng)
        return float(np.real(1 - psi @ z @ psi))

    rep = mc.estimate(stat, 2000, seed=3)
    assert abs(rep.mean - float(qzq_moment(1, n, k))) < 3.5 * rep.stderr


def test_qzq_second_moment_limit():
    ns = (6, 8, 12)
    vals = [Fraction(n) ** 2 * qzq_moment(2, n, n) for n in ns]
    assert richardson(ns, vals) == pytest.approx(2, abs=0.15)


def test_caps():
    with pytest.raises(CapacityError):
        bi_channel_conjugate_moment(5, 6, 6)
    with pytest.raises(CapacityError):
        qzq_moment(4, 6, 6)
    with pytest.raises(CapacityError):
        bi_channel_independent_moment(6, 6, 6)
    with pytest.raises(CapacityError):
        rank_one_output_moment(9, 2, 2)
    with pytest.raises(SingularityError):
        bi_channel_conjugate_moment(2, 1, 3)


# -- vertical cancellation -------------------------------------------------------------

def test_vertical_cancellation_on_delta():
    for p in range(1, 6):
        for n in (3, 7):
            assert vertical_cancellation_sum(p, n, canonical(Kind.DELTA, p)) == 0


def test_non_vertical_does_not_cancel():
    assert vertical_cancellation_sum(2, 3, canonical(Kind.GAMMA_TB, 2)) != 0
    with pytest.raises(SizeMismatchError):
        vertical_cancellation_sum(2, 3, Permutation.identity(3))


@given(st.permutations(list(range(6))), st.integers(2, 9))
def test_vertical_cancellation_sampled(mapping, n):
    a = Permutation(mapping)
    if is_vertical(a, 3):
        assert vertical_cancellation_sum(3, n, a) == 0


def test_moment_sequence():
    seq = moment_sequence("single", 3, 2, 2)
    assert seq[1] == 1 and seq[2] == Fraction(4, 5) and len(seq) == 3
    assert moment_sequence("bi-conj", 2, 3, 3).moments[0] == 1
    with pytest.raises(ValueError):
        moment_sequence("nope", 2, 2, 2)
