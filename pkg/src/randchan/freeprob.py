"""Free Poisson (Marchenko-Pastur) law and single-variable free cumulants.

Distributions are carried as moment sequences m_1..m_P.  The moment-cumulant
relation m_n = sum over NC(n) of prod kappa_|block| is evaluated with the
first-block recursion

    m_n = sum_{s=1}^{n} kappa_s * sum_{i_1 + ... + i_s = n - s} m_{i_1} ... m_{i_s}

(m_0 = 1), which is exact on rationals and needs no partition enumeration.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence, Union

import numpy as np
from scipy import integrate

from randchan.errors import DomainError
from randchan.moments import MomentSequence
from randchan.symgroup import noncrossing_partitions

__all__ = [
    "MAX_ORDER", "DistKind", "LimitingDistribution", "mp_moment", "mp_moment_nc",
    "narayana", "mp_density", "mp_support", "mp_moment_quadrature", "mp_entropy_K",
    "mp_entropy_K_quadrature", "free_cumulants_to_moments",
    "moments_to_free_cumulants", "dilate_mu_k", "boxplus_power",
]

MAX_ORDER = 10

Scalar = Union[int, float, Fraction]


def _check_order(p: int) -> None:
    if p < 0 or p > MAX_ORDER:
        raise ValueError(f"order must be in 0..{MAX_ORDER}, got {p}")


def _compositions_sum(m: list, total: int, parts: int) -> list:
    """c[t] = sum over i_1+...+i_parts = t of prod m_i, for t = 0..total."""
    conv = [m[0] * 0 + 1] + [m[0] * 0] * total
    for _ in range(parts):
        conv = [sum((conv[a] * m[t - a] for a in range(t + 1)), m[0] * 0) for t in range(total + 1)]
    return conv


def free_cumulants_to_moments(kappa: Sequence[Scalar]) -> list:
    """m_1..m_P from kappa_1..kappa_P."""
    big_p = len(kappa)
    _check_order(big_p)
    zero = kappa[0] * 0 if big_p else 0
    m = [zero + 1] + [zero] * big_p
    for n in range(1, big_p + 1):
        total = zero
        for s in range(1, n + 1):
            total += kappa[s - 1] * _compositions_sum(m[: n - s + 1], n - s, s)[n - s]
        m[n] = total
    return m[1:]


def moments_to_free_cumulants(moments: Sequence[Scalar] | MomentSequence) -> list:
    """kappa_1..kappa_P from m_1..m_P (inverse of the recursion above)."""
    m_list = list(moments.moments if isinstance(moments, MomentSequence) else moments)
    big_p = len(m_list)
    _check_order(big_p)
    zero = m_list[0] * 0 if big_p else 0
    m = [zero + 1] + m_list
    kappa: list = []
    for n in range(1, big_p + 1):
        rest = zero
        for s in range(1, n):
            rest += kappa[s - 1] * _compositions_sum(m[: n - s + 1], n - s, s)[n - s]
        kappa.append(m[n] - rest)  # the s = n term is kappa_n * m_0^n
    return kappa


def mp_moment(p: int, c: Scalar) -> Scalar:
    """p-th moment of the free Poisson law with rate c (all free cumulants c)."""
    _check_order(p)
    if p == 0:
        return c * 0 + 1
    return free_cumulants_to_moments([c] * p)[-1]


def mp_moment_nc(p: int, c: Scalar) -> Scalar:
    """Same value by brute enumeration of NC(p): sum of c^{#blocks}."""
    return sum(c ** len(pi.blocks) for pi in noncrossing_partitions(p))


def narayana(p: int, j: int) -> int:
    return math.comb(p, j) * math.comb(p, j - 1) // p


def mp_support(c: float) -> tuple[float, float]:
    r = math.sqrt(c)
    return (1 - r) ** 2, (1 + r) ** 2


def mp_density(x: float, c: float) -> tuple[float, float]:
    """(absolutely continuous density at x, atom weight at 0)."""
    if c <= 0:
        raise DomainError(f"c must be positive, got {c}")
    atom = max(1.0 - c, 0.0)
    lo, hi = mp_support(c)
    if x <= lo or x >= hi or x <= 0:
        return 0.0, atom
    return math.sqrt(4 * c - (x - 1 - c) ** 2) / (2 * math.pi * x), atom


def _quad_theta(g, c: float) -> float:
    """integral of g(x) against the continuous part, via x = 1 + c + 2 sqrt(c) cos(theta).

    The substitution removes the square-root edge singularities.
    """
    r = math.sqrt(c)

    def integrand(theta: float) -> float:
        x = 1 + c + 2 * r * math.cos(theta)
        if x <= 0:
            return 0.0
        dens = (2 * r * math.sin(theta)) / (2 * math.pi * x)
        return g(x) * dens * 2 * r * math.sin(theta)

    val, _ = integrate.quad(integrand, 0.0, math.pi, epsabs=1e-12, epsrel=1e-12, limit=200)
    return val


def mp_moment_quadrature(p: int, c: float) -> float:
    """integral of x^p d pi_c by quadrature (the atom at 0 contributes only for p = 0)."""
    atom = max(1.0 - c, 0.0)
    return _quad_theta(lambda x: x ** p, c) + (atom if p == 0 else 0.0)


def mp_entropy_K(c: float) -> float:
    """K_c = integral of x log x d pi_c."""
    if c <= 0:
        raise DomainError(f"c must be positive, got {c}")
    return 0.5 + c * math.log(c) if c >= 1 else c * c / 2


def mp_entropy_K_quadrature(c: float) -> float:
    if c <= 0:
        raise DomainError(f"c must be positive, got {c}")
    return _quad_theta(lambda x: x * math.log(x), c)


def dilate_mu_k(m: MomentSequence | Sequence[Scalar], k: int) -> MomentSequence:
    """Moments of (1 - 1/k) delta_0 + (1/k) mu."""
    if k < 1:
        raise DomainError(f"k must be >= 1, got {k}")
    seq = m if isinstance(m, MomentSequence) else MomentSequence("custom", list(m))
    return MomentSequence(seq.model, [x / Fraction(k) if not isinstance(x, float) else x / k
                                      for x in seq.moments], f"dilated({k})/{seq.scaling}")


def boxplus_power(m: MomentSequence | Sequence[Scalar], t: Scalar) -> MomentSequence:
    """Moments of the free convolution power mu^{boxplus t}, t >= 1."""
    if t < 1:
        raise DomainError(f"free convolution powers are only supported for t >= 1, got {t}")
    seq = m if isinstance(m, MomentSequence) else MomentSequence("custom", list(m))
    kappa = moments_to_free_cumulants(seq.moments)
    return MomentSequence(seq.model, free_cumulants_to_moments([t * x for x in kappa]),
                          f"boxplus({t})/{seq.scaling}")


class DistKind(enum.Enum):
    FREE_POISSON = "free_poisson"
    DIRAC = "dirac"
    ATOMIC = "atomic"
    MOMENT_ONLY = "moment_only"


@dataclass
class LimitingDistribution:
    kind: DistKind
    param: object = None
    moments: MomentSequence | None = None
    atoms: list[tuple[Scalar, Scalar]] = field(default_factory=list)  # (weight, location)

    @classmethod
    def free_poisson(cls, c: Scalar, order: int = 6) -> "LimitingDistribution":
        seq = MomentSequence("free_poisson", [mp_moment(p, c) for p in range(1, order + 1)])
        return cls(DistKind.FREE_POISSON, c, seq)

    @classmethod
    def dirac(cls, x: Scalar, order: int = 6) -> "LimitingDistribution":
        return cls(DistKind.DIRAC, x, MomentSequence("dirac", [x ** p for p in range(1, order + 1)]),
                   [(1, x)])

    @classmethod
    def atomic(cls, atoms: Sequence[tuple[Scalar, Scalar]], order: int = 6) -> "LimitingDistribution":
        total = sum(w for w, _ in atoms)
        if not np.isclose(float(total), 1.0, atol=1e-12):
            raise ValueError(f"atom weights sum to {total}, not 1")
        seq = MomentSequence("atomic", [sum(w * x ** p for w, x in atoms) for p in range(1, order + 1)])
        return cls(DistKind.ATOMIC, None, seq, list(atoms))

    @classmethod
    def from_moments(cls, m: MomentSequence) -> "LimitingDistribution":
        return cls(DistKind.MOMENT_ONLY, None, m)

    def moment(self, p: int):
        if self.kind is DistKind.FREE_POISSON and (self.moments is None or p > len(self.moments)):
            return mp_moment(p, self.param)
        return self.moments[p]

    def to_dict(self) -> dict:
        out: dict = {"kind": self.kind.value}
        if self.param is not None:
            out["param"] = _jsonable(self.param)
        if self.atoms:
            out["atoms"] = [[_jsonable(w), _jsonable(x)] for w, x in self.atoms]
        if self.moments is not None:
            out["moments"] = [_jsonable(x) for x in self.moments.moments]
        return out


def _jsonable(x):
    if isinstance(x, Fraction):
        return str(x) if x.denominator != 1 else x.numerator
    return x
