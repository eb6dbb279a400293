"""Exact finite-(n, k) moments of Wishart matrices and random channel outputs.

All sums over permutations are evaluated as integer histograms of cycle
statistics (see ``_tables``), then folded with exact rationals.  The
Weingarten-weighted inner sums are class functions of the outer permutation,
so e.g. sum_beta n^{#(beta delta)} Wg(alpha beta^-1) is one lookup
F(class(alpha delta)) with F = Wg * n^{#}.  This turns the nominal
|S_2p|^2 double sums into single passes over S_2p.

Rough cost on one core: rank-one p=8 < 1 s; conjugate bi-channel p=4 about
2 s (S_8 structure constants); independent bi-channel p=5 < 1 s.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence, Union

import numpy as np

from randchan import _tables
from randchan.errors import CapacityError, SizeMismatchError
from randchan.symgroup import (
    Choice, ChoiceFunction, Kind, Permutation, build_f_hat, canonical, length,
)
from randchan.weingarten import ClassFunction, convolve, power_class_function, wg_exact

__all__ = [
    "Caps", "CAPS", "Provenance", "TraceFunctional", "MomentSequence",
    "wishart_moment", "rank_one_output_moment", "general_input_moment",
    "moment_rank_r", "bi_channel_independent_moment",
    "bi_channel_asymmetric_limit_moment", "bi_channel_conjugate_moment",
    "qzq_moment", "vertical_cancellation_sum", "moment_sequence",
]

Number = Union[int, Fraction]


@dataclass
class Caps:
    """Largest p accepted by each family of sums.

    The defaults bound worst-case runtime to about a minute on one core.
    """

    single: int = 8       # sums over S_p (Wishart, rank-one, general input)
    quadruple: int = 5    # independent bi-channel, formally |S_p|^4
    conjugate: int = 4    # conjugate bi-channel, formally |S_2p|^2
    qzq: int = 3          # 2^p choice functions times |S_2p|^2


CAPS = Caps()


def _check_cap(p: int, cap: int, what: str) -> None:
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    if p > cap:
        raise CapacityError(f"{what}: p={p} exceeds the configured cap {cap}")


def _fold(hist: np.ndarray, weight: Callable[..., Fraction]) -> Fraction:
    total = Fraction(0)
    for idx in zip(*np.nonzero(hist)):
        total += int(hist[idx]) * weight(*(int(i) for i in idx))
    return total


def _hist(*cols: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    flat = np.ravel_multi_index(cols, shape)
    return np.bincount(flat, minlength=int(np.prod(shape))).reshape(shape)


def _cycles_after(perms: np.ndarray, right: Permutation | Sequence[int]) -> np.ndarray:
    """#(a . right) for every row a."""
    counts, _ = _tables.cycle_stats(_tables.compose_rows(perms, list(right)))
    return counts


def _cycles_before(left: Permutation | Sequence[int], perms: np.ndarray) -> np.ndarray:
    """#(left . a) for every row a."""
    counts, _ = _tables.cycle_stats(np.asarray(list(left))[perms])
    return counts


# -- Wishart -------------------------------------------------------------------

def wishart_moment(sigma: Permutation, t: Sequence[int] | None, n: int, ks: Sequence[int]) -> int:
    """E[trace_{sigma,t}(W_1, ..., W_s)] for independent unit-covariance Wisharts.

    ``t`` is 1-based: ``t[i-1]`` in 1..s says which W_j sits at position i.
    W_j is n x n with k_j = ks[j-1] degrees of freedom.
    """
    p = sigma.size
    _check_cap(p, CAPS.single, "wishart_moment")
    s = len(ks)
    t = np.ones(p, dtype=np.int64) if t is None else np.asarray(t, dtype=np.int64)
    if t.shape != (p,) or t.min() < 1 or t.max() > s:
        raise ValueError(f"t must map 1..{p} into 1..{s}")
    level = t - 1
    perms = _tables.all_perms(p)
    keep = np.all(level[perms] == level, axis=1)
    alphas = perms[keep]
    n_exp = _cycles_before(sigma.inverse(), alphas)
    # leaders of the cycles of alpha, bucketed by the level set they live in
    x = alphas.astype(np.int64)
    low = np.broadcast_to(np.arange(p), x.shape).copy()
    for _ in range(p):
        np.minimum(low, x, out=low)
        x = np.take_along_axis(alphas.astype(np.int64), x, axis=1)
    leader = low == np.arange(p)
    per_level = np.stack([(leader & (level == j)).sum(axis=1) for j in range(s)], axis=1)
    total = 0
    cols = [per_level[:, j] for j in range(s)] + [n_exp]
    hist = _hist(*cols, shape=(p + 1,) * (s + 1))
    for idx in zip(*np.nonzero(hist)):
        term = int(hist[idx]) * n ** int(idx[-1])
        for kj, e in zip(ks, idx[:-1]):
            term *= kj ** int(e)
        total += term
    return total


# -- single channel ------------------------------------------------------------

def rank_one_output_moment(p: int, n: int, k: int) -> Fraction:
    """E[trace Z^p] for a random channel applied to a pure state (Wick route)."""
    _check_cap(p, CAPS.single, "rank_one_output_moment")
    perms = _tables.all_perms(p)
    cyc, _ = _tables.group_stats(p)
    gamma_inv = canonical(Kind.GAMMA, p).inverse()
    hist = _hist(cyc, _cycles_before(gamma_inv, perms), shape=(p + 1, p + 1))
    numer = _tables.exact_polynomial_sum(hist, [k, n])
    denom = 1
    for j in range(p):
        denom *= n * k + j
    return Fraction(numer, denom)


class Provenance(enum.Enum):
    RANK_ONE = "rank_one"
    RANK_R = "rank_r"
    MACROSCOPIC = "macroscopic"
    CUSTOM = "custom"


@dataclass(frozen=True)
class TraceFunctional:
    """beta -> trace_beta(X) for a fixed input X, as a class function on S_p."""

    p: int
    values: ClassFunction
    tag: Provenance = Provenance.CUSTOM
    params: tuple = field(default=())

    def __call__(self, beta: Permutation) -> Fraction:
        return self.values(beta)

    @classmethod
    def rank_one(cls, p: int) -> "TraceFunctional":
        return cls(p, ClassFunction.from_callable(p, lambda q: 1), Provenance.RANK_ONE)

    @classmethod
    def rank_r(cls, p: int, r: int) -> "TraceFunctional":
        """X = (rank-r projector)/r, so trace_beta(X) = r^{-|beta|}."""
        return cls(p, ClassFunction.from_callable(p, lambda q: Fraction(1, r ** (p - len(q)))),
                   Provenance.RANK_R, (r,))

    @classmethod
    def from_trace_powers(cls, p: int, powers: Sequence[Number],
                          tag: Provenance = Provenance.CUSTOM) -> "TraceFunctional":
        """From exact values powers[j-1] = trace(X^j), j = 1..p."""
        if len(powers) < p:
            raise ValueError(f"need trace(X^j) for j <= {p}")
        pw = [Fraction(x) for x in powers]

        def value(q: tuple[int, ...]) -> Fraction:
            out = Fraction(1)
            for part in q:
                out *= pw[part - 1]
            return out

        return cls(p, ClassFunction.from_callable(p, value), tag, tuple(pw[:p]))

    @classmethod
    def from_spectrum(cls, p: int, eigenvalues: Sequence[Number]) -> "TraceFunctional":
        eig = [Fraction(x) for x in eigenvalues]
        total = sum(eig)
        eig = [x / total for x in eig]
        return cls.from_trace_powers(p, [sum(x ** j for x in eig) for j in range(1, p + 1)])

    @classmethod
    def macroscopic(cls, p: int, phi: Sequence[Number], n: int) -> "TraceFunctional":
        """Normalized input X/trace(X) with trace(X^j) = n * phi_j (phi_j moments of x)."""
        ph = [Fraction(x) for x in phi]
        norm = n * ph[0]
        return cls.from_trace_powers(p, [n * ph[j - 1] / norm ** j for j in range(1, p + 1)],
                                     Provenance.MACROSCOPIC)


def general_input_moment(p: int, n: int, k: int, tf: TraceFunctional) -> Fraction:
    """E[trace Z^p] for Z = Phi(X), from the Weingarten double sum over S_p^2."""
    _check_cap(p, CAPS.single, "general_input_moment")
    if tf.p != p:
        raise SizeMismatchError(f"trace functional is for p={tf.p}, not {p}")
    wg = wg_exact(n * k, p)
    inner = convolve(wg, tf.values).vector()  # alpha -> sum_beta trace_beta Wg(alpha beta^-1)
    perms = _tables.all_perms(p)
    cyc, cls = _tables.group_stats(p)
    gamma_inv = canonical(Kind.GAMMA, p).inverse()
    hist = _hist(cyc, _cycles_before(gamma_inv, perms), cls,
                 shape=(p + 1, p + 1, len(inner)))
    return _fold(hist, lambda a, b, c: k ** a * n ** b * inner[c])


def moment_rank_r(p: int, n: int, k: int, r: int) -> Fraction:
    return general_input_moment(p, n, k, TraceFunctional.rank_r(p, r))


# -- bi-channels -----------------------------------------------------------------

def bi_channel_independent_moment(p: int, n: int, k: int) -> Fraction:
    """E[trace Z^p] for Z = (Phi^U (x) Phi^V)(E_n) with U, V independent."""
    _check_cap(p, CAPS.quadruple, "bi_channel_independent_moment")
    wg = wg_exact(n * k, p).vector()
    perms = _tables.all_perms(p)
    cyc, _ = _tables.group_stats(p)
    gamma_inv = canonical(Kind.GAMMA, p).inverse()
    n_cyc = _cycles_before(gamma_inv, perms)
    n_cls = len(wg)
    # A(beta) = sum_alpha k^#alpha n^#(gamma^-1 alpha) Wg(alpha beta^-1)
    inv = _tables.inverse_rows(perms)
    a_vals = []
    for beta_inv in inv:
        _, cls = _tables.cycle_stats(_tables.compose_rows(perms, beta_inv))
        hist = _hist(cyc, n_cyc, cls, shape=(p + 1, p + 1, n_cls))
        a_vals.append(_fold(hist, lambda a, b, c: k ** a * n ** b * wg[c]))
    # sum_{u, v} A(u) A(v) n^{#(u^-1 v)}
    total = Fraction(0)
    for u_inv, a_u in zip(inv, a_vals):
        if a_u == 0:
            continue
        cyc_uv, _ = _tables.cycle_stats(u_inv[perms])
        for c in np.unique(cyc_uv):
            total += a_u * n ** int(c) * sum((a_vals[j] for j in np.flatnonzero(cyc_uv == c)), Fraction(0))
    return total / n ** p


def _geodesic_rows(p: int) -> np.ndarray:
    perms = _tables.all_perms(p)
    cyc, _ = _tables.group_stats(p)
    n_cyc = _cycles_before(canonical(Kind.GAMMA, p).inverse(), perms)
    return perms[cyc + n_cyc == p + 1]


def bi_channel_asymmetric_limit_moment(p: int, c, d: int):
    """Limit of (1/n^2) E trace (c^2 n^2 Z)^p for the independent bi-channel with
    fixed input dimension d: sum over geodesic pairs of c^{#a+#b} d^{-|a^-1 b|}.

    Exact when ``c`` is an int or Fraction, float otherwise.
    """
    _check_cap(p, CAPS.single, "bi_channel_asymmetric_limit_moment")
    geo = _geodesic_rows(p)
    cyc, _ = _tables.cycle_stats(geo)
    inv = _tables.inverse_rows(geo)
    hist = np.zeros((2 * p + 1, p), dtype=np.int64)
    for u_inv, cu in zip(inv, cyc):
        uv, _ = _tables.cycle_stats(u_inv[geo])
        np.add.at(hist, (cu + cyc, p - uv), 1)
    exact = isinstance(c, (int, Fraction)) and not isinstance(c, bool)
    one = Fraction(1) if exact else 1.0
    total = 0 * one
    for a, ln in zip(*np.nonzero(hist)):
        total += int(hist[a, ln]) * (one * c) ** int(a) / (one * d) ** int(ln)
    return total


def _conjugate_kernel(p: int, n: int, k: int) -> tuple[np.ndarray, np.ndarray, list[Fraction]]:
    """Shared pieces of the S_2p sums: #alpha, class(alpha delta), F = Wg * n^#."""
    m = 2 * p
    perms = _tables.all_perms(m)
    cyc, _ = _tables.group_stats(m)
    _, cls_delta = _tables.cycle_stats(_tables.compose_rows(perms, list(canonical(Kind.DELTA, p))))
    f_vals = convolve(wg_exact(n * k, m), power_class_function(m, n)).vector()
    return cyc, cls_delta, f_vals


def bi_channel_conjugate_moment(p: int, n: int, k: int) -> Fraction:
    """E[trace Z^p] for Z = (Phi (x) conj(Phi))(E_n):

    sum over alpha, beta in S_2p of k^#alpha n^{#(alpha gamma^-1) + #(beta delta) - p}
    Wg(nk, alpha beta^-1), with gamma = gamma^T (+) gamma^B.
    """
    _check_cap(p, CAPS.conjugate, "bi_channel_conjugate_moment")
    # f = I everywhere gives f_hat = gamma^T (+) gamma^B
    return _choice_sum(p, n, k, [ChoiceFunction((Choice.IDENTITY,) * p)], signed=False)


def _choice_sum(p: int, n: int, k: int, choices: list[ChoiceFunction], signed: bool) -> Fraction:
    m = 2 * p
    perms = _tables.all_perms(m)
    cyc, cls_delta, f_vals = _conjugate_kernel(p, n, k)
    total = Fraction(0)
    for f in choices:
        f_hat_inv = build_f_hat(f).inverse()
        hist = _hist(cyc, _cycles_after(perms, f_hat_inv), cls_delta,
                     shape=(m + 1, m + 1, len(f_vals)))
        part = _fold(hist, lambda a, b, c: k ** a * Fraction(n) ** (b - p) * f_vals[c])
        if signed:
            e = f.bell_count()
            part *= Fraction((-1) ** e, n ** e)
        total += part
    return total


def qzq_moment(p: int, n: int, k: int) -> Fraction:
    """E[trace (QZQ)^p] with Q = I - E_n and Z the conjugate bi-channel output."""
    _check_cap(p, CAPS.qzq, "qzq_moment")
    return _choice_sum(p, n, k, list(ChoiceFunction.all(p)), signed=True)


def vertical_cancellation_sum(p: int, n: int, alpha: Permutation) -> Fraction:
    """sum_f (-1)^{|f^-1(E)|} n^{-(|f^-1(E)| + |alpha f_hat^-1|)} over all 2^p choices."""
    if alpha.size != 2 * p:
        raise SizeMismatchError(f"alpha must have size {2 * p}, got {alpha.size}")
    total = Fraction(0)
    for f in ChoiceFunction.all(p):
        e = f.bell_count()
        expo = e + length(alpha * build_f_hat(f).inverse())
        total += Fraction((-1) ** e, n ** expo)
    return total


# -- sequences -------------------------------------------------------------------

@dataclass
class MomentSequence:
    """Moments m_1..m_P of a spectral distribution plus how they were scaled."""

    model: str
    moments: list
    scaling: str = "raw"

    def __getitem__(self, p: int):
        """1-based: seq[p] is the p-th moment."""
        return self.moments[p - 1]

    def __len__(self) -> int:
        return len(self.moments)

    def as_floats(self) -> list[float]:
        return [float(x) for x in self.moments]


_MODELS: dict[str, Callable[..., Fraction]] = {
    "single": lambda p, n, k, r: rank_one_output_moment(p, n, k),
    "rank-r": lambda p, n, k, r: moment_rank_r(p, n, k, r),
    "bi-indep": lambda p, n, k, r: bi_channel_independent_moment(p, n, k),
    "bi-conj": lambda p, n, k, r: bi_channel_conjugate_moment(p, n, k),
    "qzq": lambda p, n, k, r: qzq_moment(p, n, k),
}


def moment_sequence(model: str, max_p: int, n: int, k: int, r: int = 1) -> MomentSequence:
    """Raw exact moments E[trace Z^p], p = 1..max_p, for a named channel model."""
    if model not in _MODELS:
        raise ValueError(f"unknown model {model!r}; choose from {sorted(_MODELS)}")
    fn = _MODELS[model]
    return MomentSequence(model, [fn(p, n, k, r) for p in range(1, max_p + 1)])
