"""Permutations, the Cayley metric, geodesics and non-crossing partitions.

Conventions
-----------
* Points are 0-based internally; cycle notation is rendered 1-based.
* Composition is ``(a * b)(i) == a(b(i))``: the right factor acts first.
* For permutations of 2p points carrying top/bottom labels, ``i^T`` is index
  ``i - 1`` and ``i^B`` is index ``p + i - 1`` (``i`` 1-based, taken mod p).
"""

from __future__ import annotations

import enum
import itertools
import re
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Sequence

from randchan.errors import SizeMismatchError

__all__ = [
    "Permutation", "NonCrossingPartition", "Choice", "ChoiceFunction", "Kind",
    "compose", "length", "distance", "is_geodesic", "enumerate_geodesics",
    "symmetric_group", "perm_to_nc", "nc_to_perm", "kreweras",
    "noncrossing_partitions", "canonical", "top", "bottom", "build_f_hat",
    "is_vertical", "catalan",
]


def catalan(n: int) -> int:
    from math import comb
    return comb(2 * n, n) // (n + 1)


class Permutation:
    """Immutable bijection of {0, ..., m-1}."""

    __slots__ = ("_map", "__dict__")

    def __init__(self, mapping: Iterable[int]):
        mp = tuple(int(x) for x in mapping)
        if sorted(mp) != list(range(len(mp))):
            raise ValueError(f"not a bijection on 0..{len(mp) - 1}: {mp}")
        if not mp:
            raise ValueError("permutation size must be positive")
        self._map = mp

    @classmethod
    def identity(cls, m: int) -> "Permutation":
        return cls(range(m))

    @classmethod
    def from_cycles(cls, m: int, cycles: Iterable[Sequence[int]], one_based: bool = True) -> "Permutation":
        """Build from disjoint cycles; each cycle maps c[j] -> c[j+1]."""
        mp = list(range(m))
        seen: set[int] = set()
        shift = 1 if one_based else 0
        for cyc in cycles:
            pts = [c - shift for c in cyc]
            if seen.intersection(pts) or len(set(pts)) != len(pts):
                raise ValueError(f"cycles are not disjoint: {cycles}")
            seen.update(pts)
            for a, b in zip(pts, pts[1:] + pts[:1]):
                if not 0 <= a < m:
                    raise ValueError(f"point {a + shift} out of range for size {m}")
                mp[a] = b
        return cls(mp)

    @classmethod
    def parse(cls, text: str, m: int | None = None) -> "Permutation":
        """Parse 1-based cycle notation such as ``"(3 2 1)(6 5 4)"``.

        ``"()"`` or an empty string is the identity and needs ``m``.
        """
        cycles = [[int(x) for x in grp.replace(",", " ").split()]
                  for grp in re.findall(r"\(([^()]*)\)", text)]
        cycles = [c for c in cycles if c]
        if re.sub(r"\([^()]*\)", "", text).strip():
            raise ValueError(f"malformed cycle notation: {text!r}")
        size = m if m is not None else max((max(c) for c in cycles), default=0)
        if size == 0:
            raise ValueError("size of an identity permutation must be given")
        return cls.from_cycles(size, cycles)

    # -- basic protocol ----------------------------------------------------

    @property
    def size(self) -> int:
        return len(self._map)

    @property
    def mapping(self) -> tuple[int, ...]:
        return self._map

    def __call__(self, i: int) -> int:
        return self._map[i]

    def __len__(self) -> int:
        return len(self._map)

    def __iter__(self) -> Iterator[int]:
        return iter(self._map)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Permutation) and self._map == other._map

    def __hash__(self) -> int:
        return hash(self._map)

    def __mul__(self, other: "Permutation") -> "Permutation":
        return compose(self, other)

    def __repr__(self) -> str:
        return f"Permutation.parse({str(self)!r}, {self.size})"

    def __str__(self) -> str:
        cyc = [c for c in self.cycles() if len(c) > 1]
        if not cyc:
            return "()"
        return "".join("(" + " ".join(str(x + 1) for x in c) + ")" for c in cyc)

    # -- derived data --------------------------------------------------------

    def inverse(self) -> "Permutation":
        inv = [0] * self.size
        for i, j in enumerate(self._map):
            inv[j] = i
        return Permutation(inv)

    def cycles(self) -> list[tuple[int, ...]]:
        """Cycles (0-based), each starting at its smallest point."""
        return list(self._cycles)

    @cached_property
    def _cycles(self) -> tuple[tuple[int, ...], ...]:
        seen = [False] * self.size
        out = []
        for start in range(self.size):
            if seen[start]:
                continue
            cyc = []
            i = start
            while not seen[i]:
                seen[i] = True
                cyc.append(i)
                i = self._map[i]
            out.append(tuple(cyc))
        return tuple(out)

    def cycle_count(self) -> int:
        return len(self._cycles)

    def cycle_type(self) -> tuple[int, ...]:
        return tuple(sorted((len(c) for c in self._cycles), reverse=True))

    def fixed_points(self) -> list[int]:
        return [i for i, j in enumerate(self._map) if i == j]

    def direct_sum(self, other: "Permutation") -> "Permutation":
        """Act by ``self`` on the first block and ``other`` on the shifted second block."""
        m = self.size
        return Permutation(self._map + tuple(m + j for j in other._map))


def _check_sizes(a: Permutation, b: Permutation) -> None:
    if a.size != b.size:
        raise SizeMismatchError(f"sizes differ: {a.size} vs {b.size}")


def compose(a: Permutation, b: Permutation) -> Permutation:
    """``a . b``, i.e. i -> a(b(i))."""
    _check_sizes(a, b)
    am = a.mapping
    return Permutation(am[j] for j in b.mapping)


def length(s: Permutation) -> int:
    """Minimal number of transpositions: size minus number of cycles."""
    return s.size - s.cycle_count()


def distance(s: Permutation, t: Permutation) -> int:
    _check_sizes(s, t)
    return length(compose(s.inverse(), t))


def is_geodesic(a: Permutation, target: Permutation) -> bool:
    """True iff ``a`` lies on a shortest path from the identity to ``target``."""
    return length(a) + distance(a, target) == length(target)


def symmetric_group(m: int) -> Iterator[Permutation]:
    """Stream S_m in lexicographic order of the one-line form."""
    for mp in itertools.permutations(range(m)):
        yield Permutation(mp)


def enumerate_geodesics(target: Permutation) -> Iterator[Permutation]:
    goal = length(target)
    inv_target = target.inverse()
    for a in symmetric_group(target.size):
        # |a| + |a^-1 target| == |target|, using |a^-1 t| == |t^-1 a|
        if length(a) + length(compose(inv_target, a)) == goal:
            yield a


# -- non-crossing partitions -------------------------------------------------

def _crosses(x: Sequence[int], y: Sequence[int]) -> bool:
    for a, c in itertools.combinations(sorted(x), 2):
        inside = [b for b in y if a < b < c]
        outside = [b for b in y if b < a or b > c]
        if inside and outside:
            return True
    return False


@dataclass(frozen=True)
class NonCrossingPartition:
    """Non-crossing set partition of {1, ..., p} (blocks are 1-based)."""

    p: int
    blocks: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        blocks = tuple(sorted(tuple(sorted(b)) for b in self.blocks))
        object.__setattr__(self, "blocks", blocks)
        pts = [x for b in blocks for x in b]
        if sorted(pts) != list(range(1, self.p + 1)):
            raise ValueError(f"blocks do not partition 1..{self.p}: {blocks}")
        for x, y in itertools.combinations(blocks, 2):
            if _crosses(x, y):
                raise ValueError(f"blocks {x} and {y} cross")

    def __len__(self) -> int:
        return len(self.blocks)

    def block_of(self, i: int) -> tuple[int, ...]:
        return next(b for b in self.blocks if i in b)

    def refines(self, other: "NonCrossingPartition") -> bool:
        """Lattice order: every block of self sits inside a block of other."""
        return all(set(b) <= set(other.block_of(b[0])) for b in self.blocks)

    def rotate(self, shift: int = 1) -> "NonCrossingPartition":
        return NonCrossingPartition(
            self.p, tuple(tuple((x - 1 + shift) % self.p + 1 for x in b) for b in self.blocks))


def perm_to_nc(a: Permutation, p: int | None = None) -> NonCrossingPartition:
    """Cycle partition of a geodesic permutation ``id -> a -> gamma_p``."""
    p = a.size if p is None else p
    if a.size != p:
        raise SizeMismatchError(f"permutation of size {a.size} given for p={p}")
    if not is_geodesic(a, canonical(Kind.GAMMA, p)):
        raise ValueError(f"{a} is not on a geodesic from id to the full cycle")
    return NonCrossingPartition(p, tuple(tuple(x + 1 for x in c) for c in a.cycles()))


def nc_to_perm(pi: NonCrossingPartition) -> Permutation:
    """Inverse of :func:`perm_to_nc`: each block becomes a decreasing cycle."""
    return Permutation.from_cycles(pi.p, [tuple(reversed(b)) for b in pi.blocks])


def kreweras(pi: NonCrossingPartition) -> NonCrossingPartition:
    a = nc_to_perm(pi)
    return perm_to_nc(compose(a.inverse(), canonical(Kind.GAMMA, pi.p)))


def noncrossing_partitions(p: int) -> list[NonCrossingPartition]:
    """NC(p) obtained by filtering the geodesics to the full cycle."""
    return [perm_to_nc(a) for a in enumerate_geodesics(canonical(Kind.GAMMA, p))]


# -- canonical permutations --------------------------------------------------

class Kind(enum.Enum):
    GAMMA = "gamma"              # (p p-1 ... 1) in S_p
    GAMMA2 = "gamma2"            # (p ... 1)(2p ... p+1) in S_2p
    GAMMA_TB = "gamma_tb"        # (p^T ... 1^T)(1^B ... p^B) in S_2p
    GAMMA_TILDE = "gamma_tilde"  # (p^T ... 1^T 1^B ... p^B) in S_2p
    DELTA = "delta"              # prod_i (i^T i^B)


def top(i: int, p: int) -> int:
    """0-based index of ``i^T`` (``i`` is 1-based and read mod p)."""
    return (i - 1) % p


def bottom(i: int, p: int) -> int:
    return p + (i - 1) % p


def canonical(kind: Kind | str, p: int) -> Permutation:
    kind = Kind(kind)
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    down = [(i - 1) % p for i in range(p)]  # i -> i-1 mod p
    if kind is Kind.GAMMA:
        return Permutation(down)
    if kind is Kind.GAMMA2:
        return Permutation(down + [p + j for j in down])
    if kind is Kind.GAMMA_TB:
        return Permutation(down + [p + (i + 1) % p for i in range(p)])
    if kind is Kind.GAMMA_TILDE:
        cyc = [top(i, p) for i in range(p, 0, -1)] + [bottom(i, p) for i in range(1, p + 1)]
        return Permutation.from_cycles(2 * p, [cyc], one_based=False)
    return Permutation([p + i for i in range(p)] + list(range(p)))


# -- choice functions ----------------------------------------------------------

class Choice(enum.Enum):
    IDENTITY = "I"
    BELL = "E"


@dataclass(frozen=True)
class ChoiceFunction:
    """Map {1..p} -> {IDENTITY, BELL}; ``choice[i-1]`` is the value at i."""

    choice: tuple[Choice, ...]

    @property
    def p(self) -> int:
        return len(self.choice)

    def __call__(self, i: int) -> Choice:
        return self.choice[(i - 1) % self.p]

    def bell_count(self) -> int:
        return sum(c is Choice.BELL for c in self.choice)

    def flip(self, i: int) -> "ChoiceFunction":
        ch = list(self.choice)
        j = (i - 1) % self.p
        ch[j] = Choice.IDENTITY if ch[j] is Choice.BELL else Choice.BELL
        return ChoiceFunction(tuple(ch))

    @classmethod
    def all(cls, p: int) -> Iterator["ChoiceFunction"]:
        for ch in itertools.product((Choice.IDENTITY, Choice.BELL), repeat=p):
            yield cls(ch)


def build_f_hat(f: ChoiceFunction) -> Permutation:
    """Permutation of S_2p wiring p copies of the output according to ``f``.

    i^T -> (i-1)^T if f(i) = I, else i^B;  i^B -> (i+1)^B if f(i+1) = I, else i^T.
    """
    p = f.p
    mp = [0] * (2 * p)
    for i in range(1, p + 1):
        mp[top(i, p)] = top(i - 1, p) if f(i) is Choice.IDENTITY else bottom(i, p)
        mp[bottom(i, p)] = bottom(i + 1, p) if f(i + 1) is Choice.IDENTITY else top(i, p)
    return Permutation(mp)


def is_vertical(a: Permutation, p: int) -> bool:
    """True iff a . delta fixes a point, i.e. a(i^T) = i^B or a(i^B) = i^T."""
    if a.size != 2 * p:
        raise SizeMismatchError(f"expected size {2 * p}, got {a.size}")
    return bool(compose(a, canonical(Kind.DELTA, p)).fixed_points())
