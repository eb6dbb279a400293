"""Vectorized enumeration tables for small symmetric groups.

Everything here works on the one-line form of permutations stored as rows of
an integer array (0-based).  The moment engines never loop over S_m in Python;
they reduce to integer histograms computed from these tables and only then
switch to exact arithmetic.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

# rows processed per block in cycle computations (bounds peak memory at m=10)
_CHUNK = 1 << 18


def partitions(m: int) -> list[tuple[int, ...]]:
    """Integer partitions of m as non-increasing tuples, in decreasing lex order.

    >>> partitions(3)
    [(3,), (2, 1), (1, 1, 1)]
    """
    out: list[tuple[int, ...]] = []

    def rec(rest: int, largest: int, acc: tuple[int, ...]) -> None:
        if rest == 0:
            out.append(acc)
            return
        for part in range(min(rest, largest), 0, -1):
            rec(rest - part, part, acc + (part,))

    rec(m, m, ())
    return out


def partition_key(part: tuple[int, ...], m: int) -> int:
    base = m + 1
    return sum(base ** (x - 1) for x in part)


@lru_cache(maxsize=None)
def class_keys(m: int) -> tuple[np.ndarray, np.ndarray]:
    """Sorted cycle-type keys and, aligned with them, class indices."""
    parts = partitions(m)
    keys = np.array([partition_key(q, m) for q in parts], dtype=np.int64)
    order = np.argsort(keys)
    return keys[order], order.astype(np.int64)


@lru_cache(maxsize=None)
def all_perms(m: int) -> np.ndarray:
    """All of S_m in lexicographic order, shape (m!, m), dtype int8."""
    if m == 0:
        return np.zeros((1, 0), dtype=np.int8)
    base = all_perms(m - 1).astype(np.int16)
    blocks = []
    for first in range(m):
        rest = np.where(base >= first, base + 1, base)
        head = np.full((rest.shape[0], 1), first, dtype=np.int16)
        blocks.append(np.hstack([head, rest]))
    out = np.vstack(blocks).astype(np.int8)
    out.setflags(write=False)
    return out


def cycle_stats(perms: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Cycle counts and conjugacy-class indices for each row of ``perms``."""
    perms = np.asarray(perms)
    n_rows, m = perms.shape
    counts = np.empty(n_rows, dtype=np.int64)
    classes = np.empty(n_rows, dtype=np.int64)
    if m == 0:
        counts[:] = 0
        classes[:] = 0
        return counts, classes
    keys, key_class = class_keys(m)
    powers = (m + 1) ** np.arange(m, dtype=np.int64)
    ident = np.arange(m)
    for start in range(0, n_rows, _CHUNK):
        block = perms[start:start + _CHUNK].astype(np.int64)
        x = block.copy()
        low = np.broadcast_to(ident, block.shape).copy()
        ret = np.zeros(block.shape, dtype=np.int64)
        for t in range(1, m + 1):
            hit = (x == ident) & (ret == 0)
            ret[hit] = t
            np.minimum(low, x, out=low)
            x = np.take_along_axis(block, x, axis=1)
        leader = low == ident
        counts[start:start + _CHUNK] = leader.sum(axis=1)
        key = np.where(leader, powers[ret - 1], 0).sum(axis=1)
        classes[start:start + _CHUNK] = key_class[np.searchsorted(keys, key)]
    return counts, classes


@lru_cache(maxsize=None)
def group_stats(m: int) -> tuple[np.ndarray, np.ndarray]:
    """Cycle counts and class indices of every element of ``all_perms(m)``."""
    counts, classes = cycle_stats(all_perms(m))
    counts.setflags(write=False)
    classes.setflags(write=False)
    return counts, classes


def representative(part: tuple[int, ...]) -> np.ndarray:
    """A permutation with the given cycle type: consecutive blocks, each i -> i+1."""
    m = sum(part)
    rep = np.empty(m, dtype=np.int64)
    start = 0
    for length in part:
        block = np.arange(start, start + length)
        rep[block] = np.roll(block, -1)
        start += length
    return rep


@lru_cache(maxsize=None)
def structure_counts(m: int) -> np.ndarray:
    """N[mu, lam, nu] = #{s in class lam : x_mu . s in class nu}.

    ``x_mu`` is any fixed element of class mu; the count does not depend on the
    choice.  Cost is one pass over S_m per class (about a minute at m = 10).
    """
    parts = partitions(m)
    n_cls = len(parts)
    perms = all_perms(m)
    _, cls = group_stats(m)
    table = np.zeros((n_cls, n_cls, n_cls), dtype=np.int64)
    for mu, part in enumerate(parts):
        rep = representative(part)
        _, prod_cls = cycle_stats(rep[perms])
        flat = np.bincount(cls * n_cls + prod_cls, minlength=n_cls * n_cls)
        table[mu] = flat.reshape(n_cls, n_cls)
    table.setflags(write=False)
    return table


def compose_rows(perms: np.ndarray, right: np.ndarray) -> np.ndarray:
    """Row-wise a . right (apply ``right`` first) for every row a."""
    return perms[:, np.asarray(right)]


def inverse_rows(perms: np.ndarray) -> np.ndarray:
    return np.argsort(perms, axis=1).astype(perms.dtype)


def exact_polynomial_sum(hist: np.ndarray, bases: list[int]) -> int:
    """Sum of hist[i, j, ...] * bases[0]**i * bases[1]**j ... with Python ints."""
    total = 0
    for idx in zip(*np.nonzero(hist)):
        term = int(hist[idx])
        for b, e in zip(bases, idx):
            term *= b ** int(e)
        total += term
    return total
