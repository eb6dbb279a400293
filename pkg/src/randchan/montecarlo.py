"""Monte Carlo oracle: Gaussian and Haar ensembles, channel outputs, spectra.

Conventions
-----------
* Ginibre entries have E|G_ij|^2 = 1 (real and imaginary parts N(0, 1/2)).
* C^n (x) C^k is flattened with index i * k + a (system index first).
* The environment state Y and the pure input X are projectors onto the first
  basis vectors.
* Per-sample random streams: sample i of master seed s uses
  ``SeedSequence(s, spawn_key=(i,))`` feeding PCG64, so results do not depend
  on which worker ran which index.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from randchan.errors import CapacityError, SizeMismatchError

__all__ = [
    "Mode", "SpectralSample", "EstimatorReport", "Statistic", "BI_CHANNEL_MAX_N",
    "sample_rng", "sample_ginibre", "sample_haar_unitary", "sample_haar_isometry",
    "channel_apply", "channel_apply_isometry", "bi_channel_factor", "bi_channel_output",
    "bi_channel_spectrum", "spectrum", "vn_entropy", "qzq_spectrum", "sample_spectrum",
    "pairwise_sum", "estimate", "estimate_vector", "moment_statistic", "entropy_statistic",
    "wishart_trace_statistic", "EIG_TOL",
]

BI_CHANNEL_MAX_N = 80
# eigenvalues in [-EIG_TOL * scale, 0) are solver noise and clamped to 0
EIG_TOL = 1e-10


class Mode(enum.Enum):
    INDEPENDENT = "independent"
    CONJUGATE = "conjugate"


def sample_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(index,))))


def sample_ginibre(rows: int, cols: int, rng: np.random.Generator) -> np.ndarray:
    if rows < 1 or cols < 1:
        raise ValueError("rows and cols must be >= 1")
    z = rng.standard_normal((rows, 2 * cols))
    return (z[:, :cols] + 1j * z[:, cols:]) * np.sqrt(0.5)


def sample_haar_isometry(rows: int, cols: int, rng: np.random.Generator) -> np.ndarray:
    """First ``cols`` columns of a Haar unitary of size ``rows``."""
    if cols > rows:
        raise ValueError(f"isometry needs cols <= rows, got {cols} > {rows}")
    q, r = np.linalg.qr(sample_ginibre(rows, cols, rng))
    d = np.diagonal(r)
    # without the phase fix QR output is not Haar distributed
    return q * (d / np.abs(d))


def sample_haar_unitary(m: int, rng: np.random.Generator) -> np.ndarray:
    if m < 1:
        raise ValueError("m must be >= 1")
    return sample_haar_isometry(m, m, rng)


def channel_apply_isometry(v: np.ndarray, x: np.ndarray, k: int) -> np.ndarray:
    """trace_k[V X V*] for an nk x n isometry V."""
    nk, n = v.shape
    if nk != n * k or x.shape != (n, n):
        raise SizeMismatchError(f"V is {v.shape}, X is {x.shape}, k={k}")
    blocks = v.reshape(n, k, n).transpose(1, 0, 2)  # blocks[a] = <a|_env V
    return np.sum(blocks @ x @ blocks.conj().transpose(0, 2, 1), axis=0)


def channel_apply(u: np.ndarray, x: np.ndarray, k: int) -> np.ndarray:
    """Phi(X) = trace_k[U (X (x) Y) U*] with Y the projector onto the first environment vector."""
    n = x.shape[0]
    if u.shape != (n * k, n * k):
        raise SizeMismatchError(f"U must be {n * k} x {n * k}, got {u.shape}")
    return channel_apply_isometry(u[:, 0::k], x, k)


def bi_channel_factor(mode: Mode | str, n: int, k: int, rng: np.random.Generator) -> np.ndarray:
    """M (n^2 x k^2) with Z = M M* = (Phi^U (x) Phi^V)(E_n)."""
    mode = Mode(mode)
    if n > BI_CHANNEL_MAX_N:
        raise CapacityError(f"bi-channel output limited to n <= {BI_CHANNEL_MAX_N}, got {n}")
    vu = sample_haar_isometry(n * k, n, rng)
    vv = vu.conj() if mode is Mode.CONJUGATE else sample_haar_isometry(n * k, n, rng)
    # (V_U (x) V_V) applied to the Bell vector sum_m e_m (x) e_m / sqrt(n)
    t = (vu @ vv.T).reshape(n, k, n, k) / np.sqrt(n)
    return t.transpose(0, 2, 1, 3).reshape(n * n, k * k)


def bi_channel_output(mode: Mode | str, n: int, k: int, rng: np.random.Generator) -> np.ndarray:
    m = bi_channel_factor(mode, n, k, rng)
    return m @ m.conj().T


def _gram_spectrum(m: np.ndarray) -> np.ndarray:
    """Spectrum of M M*, padded with zeros, via the smaller Gram matrix."""
    rows, cols = m.shape
    small = m.conj().T @ m if cols < rows else m @ m.conj().T
    eig = spectrum(small)
    return np.concatenate([eig, np.zeros(rows - eig.size)])


def bi_channel_spectrum(mode: Mode | str, n: int, k: int, rng: np.random.Generator) -> np.ndarray:
    return _gram_spectrum(bi_channel_factor(mode, n, k, rng))


def spectrum(h: np.ndarray) -> np.ndarray:
    """Eigenvalues of a Hermitian matrix, descending, with solver noise clamped."""
    h = np.asarray(h)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise SizeMismatchError(f"square matrix expected, got shape {h.shape}")
    scale = max(1.0, float(np.max(np.abs(h)))) if h.size else 1.0
    if np.max(np.abs(h - h.conj().T), initial=0.0) > EIG_TOL * scale:
        raise ValueError("matrix is not Hermitian")
    eig = np.linalg.eigvalsh(h)[::-1]
    return np.where((eig < 0) & (eig >= -EIG_TOL * scale), 0.0, eig)


def vn_entropy(eigs: Sequence[float]) -> float:
    """-sum l log l with 0 log 0 = 0."""
    eigs = np.asarray(eigs, dtype=float)
    if np.any(eigs < -EIG_TOL):
        raise ValueError(f"negative eigenvalue {eigs.min():.3e} beyond tolerance")
    pos = eigs[eigs > 0]
    return float(-math.fsum(pos * np.log(pos)))


def _bell_vector(n: int) -> np.ndarray:
    psi = np.zeros(n * n)
    psi[:: n + 1] = 1 / np.sqrt(n)
    return psi


def qzq_spectrum(z: np.ndarray, n: int) -> tuple[np.ndarray, float]:
    """Spectrum of QZQ on the complement of the Bell vector, Q = I - E_n.

    Returns the n^2 - 1 eigenvalues (descending) and, separately, the
    eigenvalue along the Bell vector (zero up to rounding).
    """
    if z.shape != (n * n, n * n):
        raise SizeMismatchError(f"Z must be {n * n} x {n * n}, got {z.shape}")
    psi = _bell_vector(n)
    zp = z @ psi
    s = psi @ zp
    qzq = z - np.outer(psi, zp.conj()) - np.outer(zp, psi) + s * np.outer(psi, psi)
    w, vecs = np.linalg.eigh((qzq + qzq.conj().T) / 2)
    drop = int(np.argmax(np.abs(psi @ vecs)))
    kernel = float(w[drop])
    bulk = np.delete(w, drop)[::-1]
    return np.where((bulk < 0) & (bulk >= -EIG_TOL), 0.0, bulk), kernel


def sample_spectrum(model: str, n: int, k: int, rng: np.random.Generator) -> np.ndarray:
    """Descending spectrum of one random output.

    Models: ``single`` (channel on a pure state), ``wishart`` (W / trace W),
    ``bi-indep`` and ``bi-conj`` (product channel on the Bell state).
    """
    if model == "single":
        z = channel_apply_isometry(sample_haar_isometry(n * k, n, rng), _pure(n), k)
        return spectrum((z + z.conj().T) / 2)
    if model == "wishart":
        g = sample_ginibre(n, k, rng)
        return _gram_spectrum(g / np.linalg.norm(g))
    if model == "bi-indep":
        return bi_channel_spectrum(Mode.INDEPENDENT, n, k, rng)
    if model == "bi-conj":
        return bi_channel_spectrum(Mode.CONJUGATE, n, k, rng)
    raise ValueError(f"unknown model {model!r}")


def _pure(n: int) -> np.ndarray:
    x = np.zeros((n, n), dtype=complex)
    x[0, 0] = 1
    return x


@dataclass
class SpectralSample:
    model: str
    n: int
    k: int
    seed: int
    eigenvalues: np.ndarray

    @classmethod
    def draw(cls, model: str, n: int, k: int, seed: int, index: int = 0) -> "SpectralSample":
        eig = sample_spectrum(model, n, k, sample_rng(seed, index))
        return cls(model, n, k, seed, eig)


# -- estimation ------------------------------------------------------------------

def pairwise_sum(values: np.ndarray) -> np.ndarray:
    """Sum along axis 0 by a fixed balanced binary tree over the index order."""
    values = np.asarray(values, dtype=float)
    if values.shape[0] == 1:
        return values[0]
    mid = values.shape[0] // 2
    return pairwise_sum(values[:mid]) + pairwise_sum(values[mid:])


@dataclass
class EstimatorReport:
    name: str
    mean: float
    stderr: float
    count: int
    target: float | None = None
    target_source: str = ""

    @property
    def z_score(self) -> float:
        if self.target is None:
            return float("nan")
        if self.stderr == 0:
            return 0.0 if self.mean == self.target else float("inf")
        return (self.mean - self.target) / self.stderr

    def within(self, n_se: float = 3.0) -> bool:
        return abs(self.z_score) <= n_se


@dataclass
class Statistic:
    """Named vector-valued function of one random draw."""

    names: list[str]
    fn: Callable[[np.random.Generator], np.ndarray]
    targets: list[float | None] = field(default_factory=list)
    target_source: str = ""


def _draw_all(stat: Statistic, samples: int, seed: int, threads: int) -> np.ndarray:
    def one(i: int) -> np.ndarray:
        return np.atleast_1d(np.asarray(stat.fn(sample_rng(seed, i)), dtype=float))

    if threads <= 1:
        rows = [one(i) for i in range(samples)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(one, range(samples)))
    return np.vstack(rows)


def estimate_vector(stat: Statistic, samples: int, seed: int,
                    threads: int = 1) -> tuple[list[EstimatorReport], np.ndarray]:
    """Reports for every component of ``stat`` plus the raw per-sample values."""
    if samples < 2:
        raise ValueError("need at least 2 samples")
    values = _draw_all(stat, samples, seed, threads)
    mean = pairwise_sum(values) / samples
    var = pairwise_sum((values - mean) ** 2) / (samples - 1)
    se = np.sqrt(var / samples)
    targets = stat.targets or [None] * len(stat.names)
    reports = [EstimatorReport(name, float(m), float(s), samples, t, stat.target_source)
               for name, m, s, t in zip(stat.names, mean, se, targets)]
    return reports, values


def estimate(stat: Statistic | Callable[[np.random.Generator], float], samples: int,
             seed: int, threads: int = 1, name: str = "stat",
             target: float | None = None) -> EstimatorReport:
    if not isinstance(stat, Statistic):
        stat = Statistic([name], stat, [target])
    reports, _ = estimate_vector(stat, samples, seed, threads)
    return reports[0]


def moment_statistic(model: str, n: int, k: int, powers: Sequence[int],
                     scale: float = 1.0, normalized: bool = False) -> Statistic:
    """trace (scale * Z)^p for each p; ``normalized`` divides by the dimension."""
    dim = n * n if model.startswith("bi") else n

    def fn(rng: np.random.Generator) -> np.ndarray:
        eig = sample_spectrum(model, n, k, rng) * scale
        out = np.array([np.sum(eig ** p) for p in powers])
        return out / dim if normalized else out

    return Statistic([f"tr^{p}" for p in powers], fn)


def entropy_statistic(model: str, n: int, k: int) -> Statistic:
    return Statistic(["entropy"], lambda rng: vn_entropy(sample_spectrum(model, n, k, rng)))


def wishart_trace_statistic(n: int, k: int, powers: Sequence[int]) -> Statistic:
    """trace W^p for an unnormalized Wishart W = G G*, G n x k."""
    def fn(rng: np.random.Generator) -> np.ndarray:
        g = sample_ginibre(n, k, rng)
        w = g @ g.conj().T
        return np.array([np.real(np.trace(np.linalg.matrix_power(w, p))) for p in powers])

    return Statistic([f"trW^{p}" for p in powers], fn)
