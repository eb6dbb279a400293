"""Unitary Weingarten function, exact and to first order.

Wg(n, .) is the inverse of sigma -> n^{#sigma} in the group algebra of S_p.
Both functions are central, so the inversion is done on the class algebra:
a linear system of size #partitions(p) solved in exact rationals.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import Callable, Mapping, Union

import numpy as np

from randchan import _tables
from randchan.errors import CapacityError, SingularityError
from randchan.symgroup import Permutation, catalan, length

__all__ = [
    "ClassFunction", "WG_MAX_P", "wg_exact", "wg_cycle_closed_form", "mobius",
    "wg_asymptotic", "power_class_function", "convolve", "solve_exact",
]

# largest p accepted by wg_exact; S_10 structure constants take a few minutes
WG_MAX_P = 10

Number = Union[int, Fraction]


@dataclass(frozen=True)
class ClassFunction:
    """Exact-valued function on the conjugacy classes of S_p.

    ``values`` maps each partition of p (a non-increasing tuple) to a value.
    """

    p: int
    values: Mapping[tuple[int, ...], Fraction]

    def __post_init__(self) -> None:
        if set(self.values) != set(_tables.partitions(self.p)):
            raise ValueError(f"keys must be exactly the partitions of {self.p}")

    def __call__(self, s: Permutation | tuple[int, ...]) -> Fraction:
        if isinstance(s, Permutation):
            if s.size != self.p:
                raise ValueError(f"permutation of size {s.size} for a function on S_{self.p}")
            s = s.cycle_type()
        return self.values[tuple(s)]

    def vector(self) -> list[Fraction]:
        """Values in the order of ``partitions(p)`` (class index order)."""
        return [self.values[q] for q in _tables.partitions(self.p)]

    @classmethod
    def from_vector(cls, p: int, vec) -> "ClassFunction":
        return cls(p, dict(zip(_tables.partitions(p), vec)))

    @classmethod
    def from_callable(cls, p: int, fn: Callable[[tuple[int, ...]], Number]) -> "ClassFunction":
        return cls(p, {q: Fraction(fn(q)) for q in _tables.partitions(p)})

    def rows(self) -> list[tuple[str, Fraction]]:
        return [("+".join(map(str, q)), self.values[q]) for q in _tables.partitions(self.p)]


def power_class_function(p: int, n: Number) -> ClassFunction:
    """sigma -> n^{#sigma}."""
    return ClassFunction.from_callable(p, lambda q: Fraction(n) ** len(q))


def convolve(f: ClassFunction, g: ClassFunction) -> ClassFunction:
    """(f * g)(x) = sum over s in S_p of f(s) g(s^-1 x); again a class function."""
    if f.p != g.p:
        raise ValueError("class functions on different groups")
    counts = _tables.structure_counts(f.p)
    fv, gv = f.vector(), g.vector()
    out = []
    for mu in range(len(fv)):
        total = Fraction(0)
        for lam, nu in zip(*np.nonzero(counts[mu])):
            total += int(counts[mu, lam, nu]) * fv[lam] * gv[nu]
        out.append(total)
    return ClassFunction.from_vector(f.p, out)


def solve_exact(a: list[list[Fraction]], b: list[Fraction]) -> list[Fraction]:
    """Gauss-Jordan elimination over the rationals; raises on a singular matrix."""
    size = len(a)
    m = [list(map(Fraction, row)) + [Fraction(rhs)] for row, rhs in zip(a, b)]
    for col in range(size):
        pivot = next((r for r in range(col, size) if m[r][col] != 0), None)
        if pivot is None:
            raise SingularityError("singular class-algebra system")
        m[col], m[pivot] = m[pivot], m[col]
        inv = 1 / m[col][col]
        m[col] = [x * inv for x in m[col]]
        for r in range(size):
            if r != col and m[r][col] != 0:
                factor = m[r][col]
                m[r] = [x - factor * y for x, y in zip(m[r], m[col])]
    return [row[-1] for row in m]


@lru_cache(maxsize=256)
def wg_exact(n: int, p: int) -> ClassFunction:
    """Exact Wg(n, .) on S_p, for n >= p."""
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    if p > WG_MAX_P:
        raise CapacityError(f"wg_exact supports p <= {WG_MAX_P}, got {p}")
    if n < p:
        raise SingularityError(f"Gram system sigma -> n^#sigma is singular for n={n} < p={p}")
    counts = _tables.structure_counts(p)
    parts = _tables.partitions(p)
    npow = [n ** len(q) for q in parts]
    # row mu: sum_lam Wg(lam) * sum_{s in lam} n^{#(x_mu s^-1)}
    matrix = [[Fraction(int(np.dot(counts[mu, lam], npow)))
               for lam in range(len(parts))] for mu in range(len(parts))]
    ident = parts.index((1,) * p)
    rhs = [Fraction(int(mu == ident)) for mu in range(len(parts))]
    return ClassFunction.from_vector(p, solve_exact(matrix, rhs))


def wg_cycle_closed_form(n: int, d: int) -> Fraction:
    """Wg(n, full d-cycle) = (-1)^(d-1) Cat(d-1) / prod_{|j|<d} (n - j)."""
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    if n < d:
        raise SingularityError(f"pole: factor (n - j) vanishes for n={n} < d={d}")
    denom = 1
    for j in range(-d + 1, d):
        denom *= n - j
    return Fraction((-1) ** (d - 1) * catalan(d - 1), denom)


def mobius(s: Permutation | tuple[int, ...]) -> int:
    """Product over cycles of length d of (-1)^(d-1) Cat(d-1)."""
    parts = s.cycle_type() if isinstance(s, Permutation) else s
    out = 1
    for d in parts:
        out *= (-1) ** (d - 1) * comb(2 * d - 2, d - 1) // d
    return out


def wg_asymptotic(n: int, s: Permutation) -> float:
    return float(n) ** -(s.size + length(s)) * mobius(s)
