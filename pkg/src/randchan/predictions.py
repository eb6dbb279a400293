"""Closed-form limits for channel outputs: regime laws, eigenvalue lists, entropies."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from randchan.errors import DomainError
from randchan.freeprob import (
    LimitingDistribution, boxplus_power, dilate_mu_k, mp_entropy_K, _jsonable,
)
from randchan.moments import MomentSequence

__all__ = [
    "Model", "Regime", "RegimePrediction", "predict", "bell_eigenvalues",
    "entropy_asymptotic", "page_mean_entropy",
]


class Model(enum.Enum):
    SINGLE_RANK1 = "single_rank1"
    SINGLE_RANK_R = "single_rank_r"
    SINGLE_MACRO = "single_macro"
    BI_INDEP = "bi_indep"
    BI_CONJ = "bi_conj"
    BELL_FIXED_K = "bell_fixed_k"


class Regime(enum.Enum):
    I = "I"      # n fixed, k -> infinity
    II = "II"    # k fixed, n -> infinity
    III = "III"  # k / n -> c


@dataclass
class RegimePrediction:
    """Limit object for one (model, regime).

    ``scaling`` names the matrix whose law is described, e.g. "cnZ".
    ``eigenvalues`` is a list of (value, multiplicity); ``outlier`` describes
    an isolated eigenvalue living on a different scale from the bulk.
    """

    model: Model
    regime: Regime
    scaling: str
    distribution: LimitingDistribution | None = None
    eigenvalues: list[tuple[Fraction, int]] | None = None
    outlier: dict | None = None
    convergence: str = "almost sure"
    entropy: dict | None = None
    params: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out: dict = {
            "model": self.model.value, "regime": self.regime.value,
            "scaling": self.scaling, "convergence": self.convergence,
            "params": {key: _jsonable(v) for key, v in self.params.items()},
        }
        if self.distribution is not None:
            out["distribution"] = self.distribution.to_dict()
        if self.eigenvalues is not None:
            out["eigenvalues"] = [[_jsonable(v), m] for v, m in self.eigenvalues]
        if self.outlier is not None:
            out["outlier"] = {key: _jsonable(v) for key, v in self.outlier.items()}
        if self.entropy is not None:
            out["entropy"] = self.entropy
        return out


def _need(params: dict, *names: str):
    missing = [x for x in names if params.get(x) is None]
    if missing:
        raise ValueError(f"missing parameter(s): {', '.join(missing)}")
    return [params[x] for x in names]


def _as_exact(x):
    return Fraction(x) if isinstance(x, (int, Fraction)) else x


def _entropy_terms(model: str, c: float) -> dict:
    """H = log_n_coeff * log n + constant + o(1)."""
    m = 1 if model == "SINGLE" else 2
    return {"log_n_coeff": m, "constant": entropy_asymptotic(model, c, 1),
            "branch": "c>=1" if c >= 1 else "c<1"}


def predict(model: Model | str, regime: Regime | str, params: dict | None = None) -> RegimePrediction:
    """Limit law for (model, regime).

    params: ``n`` (regime I), ``k`` (regime II), ``c`` (regime III), ``r`` for
    rank-r inputs, ``phi`` (input moments phi_1.. of the macroscopic input).
    """
    model = Model(model.lower() if isinstance(model, str) else model)
    regime = Regime(regime.upper() if isinstance(regime, str) else regime)
    params = dict(params or {})
    order = int(params.get("order", 6))
    single = model in (Model.SINGLE_RANK1, Model.SINGLE_RANK_R, Model.SINGLE_MACRO)
    r = int(params.get("r") or 1)

    if single and regime is Regime.I:
        (n,) = _need(params, "n")
        return RegimePrediction(model, regime, "Z", LimitingDistribution.dirac(Fraction(1, n), order),
                                eigenvalues=[(Fraction(1, n), n)], params=params)

    if model in (Model.SINGLE_RANK1, Model.SINGLE_RANK_R):
        rank = 1 if model is Model.SINGLE_RANK1 else r
        if regime is Regime.II:
            (k,) = _need(params, "k")
            eig = [(Fraction(1, rank * k), rank * k)]
            n = params.get("n")
            if n is not None:
                eig.append((Fraction(0), int(n) - rank * k))
            return RegimePrediction(model, regime, "Z", eigenvalues=eig, params=params)
        (c,) = _need(params, "c")
        rc = _as_exact(c) * rank
        scaling = "cnZ" if model is Model.SINGLE_RANK1 else "rkZ"
        return RegimePrediction(model, regime, scaling, LimitingDistribution.free_poisson(rc, order),
                                entropy=_entropy_terms("SINGLE", float(rc)) if rank == 1 else None,
                                params=params)

    if model is Model.SINGLE_MACRO:
        if regime is Regime.II:
            k, phi = _need(params, "k", "phi")
            phi = [_as_exact(x) for x in phi]
            mu = MomentSequence("input", phi)
            nu = boxplus_power(dilate_mu_k(mu, int(k)), int(k) ** 2)
            return RegimePrediction(model, regime, "mean(mu) k n Z",
                                    LimitingDistribution.from_moments(nu), params=params)
        return RegimePrediction(model, regime, "nZ", LimitingDistribution.dirac(Fraction(1), order),
                                params=params)

    if model is Model.BI_INDEP:
        if regime is not Regime.III:
            raise ValueError(f"no stated limit for {model.value} in regime {regime.value}")
        (c,) = _need(params, "c")
        c2 = _as_exact(c) ** 2
        return RegimePrediction(model, regime, "c^2 n^2 Z", LimitingDistribution.free_poisson(c2, order),
                                entropy=_entropy_terms("BI", float(c)), params=params)

    # conjugate bi-channel
    if regime is Regime.I and model is Model.BI_CONJ:
        (n,) = _need(params, "n")
        return RegimePrediction(model, regime, "Z", LimitingDistribution.dirac(Fraction(1, n * n), order),
                                eigenvalues=[(Fraction(1, n * n), n * n)], params=params)
    if regime is Regime.II:
        (k,) = _need(params, "k")
        n = params.get("n")
        eig = bell_eigenvalues(int(k), int(n) if n is not None else None)
        return RegimePrediction(model, regime, "Z", eigenvalues=eig, params=params)
    if regime is Regime.III and model is Model.BI_CONJ:
        (c,) = _need(params, "c")
        c2 = _as_exact(c) ** 2
        return RegimePrediction(
            model, regime, "c^2 n^2 lambda_i, i >= 2", LimitingDistribution.free_poisson(c2, order),
            outlier={"scaling": "cn lambda_1", "limit": 1}, convergence="in probability",
            entropy=_entropy_terms("BI", float(c)), params=params)
    raise ValueError(f"no stated limit for {model.value} in regime {regime.value}")


def bell_eigenvalues(k: int, n: int | None = None) -> list[tuple[Fraction, int]]:
    """Limit eigenvalues of the conjugate bi-channel output for fixed k, as (value, multiplicity)."""
    if k < 1:
        raise DomainError(f"k must be >= 1, got {k}")
    if n is not None and n < k:
        raise DomainError(f"need n >= k, got n={n}, k={k}")
    kk = Fraction(k)
    out = [(1 / kk + 1 / kk ** 2 - 1 / kk ** 3, 1)]
    if k > 1:
        out.append((1 / kk ** 2 - 1 / kk ** 3, k * k - 1))
    if n is not None and n > k:
        out.append((Fraction(0), n * n - k * k))
    return out


def entropy_asymptotic(model: str, c: float, n: int) -> float:
    """Leading entropy of a channel output with k = cn, through order 1.

    SINGLE: log(cn) - K_c / c;  BI: log(c^2 n^2) - K_{c^2} / c^2.
    """
    if c <= 0:
        raise DomainError(f"c must be positive, got {c}")
    model = model.upper()
    if model == "SINGLE":
        return math.log(c * n) - mp_entropy_K(c) / c
    if model == "BI":
        c2 = c * c
        return math.log(c2 * n * n) - mp_entropy_K(c2) / c2
    raise ValueError(f"model must be SINGLE or BI, got {model!r}")


def page_mean_entropy(n: int, k: int) -> tuple[Fraction, float]:
    """Exact mean entropy of an n-dimensional reduced state of a Haar vector in C^n (x) C^k."""
    if n < 1 or k < 1:
        raise DomainError("n and k must be >= 1")
    if n > k:
        raise DomainError(f"formula stated for n <= k, got n={n}, k={k}")
    num, den = _harmonic_split(k + 1, n * k + 1)
    exact = Fraction(num, den) - Fraction(n - 1, 2 * k)
    return exact, float(exact)


def _harmonic_split(a: int, b: int) -> tuple[int, int]:
    """sum_{a <= j < b} 1/j as an unreduced (num, den), by binary splitting."""
    if b - a <= 0:
        return 0, 1
    if b - a == 1:
        return 1, a
    mid = (a + b) // 2
    p1, q1 = _harmonic_split(a, mid)
    p2, q2 = _harmonic_split(mid, b)
    return p1 * q2 + p2 * q1, q1 * q2
