"""Seeded Monte Carlo sampling of homogeneous sums and empirical distances.

Reproducibility contract: draw j of a run with master seed s reads from its
own counter-based stream, Philox keyed by (s, j).  Sample values therefore
depend only on (seed, draw index), never on batching or worker count;
blocks are written into a preallocated array at fixed offsets and all
reductions run over that array in index order, so summaries are bitwise
reproducible across worker counts.
"""

from __future__ import annotations

import concurrent.futures
import math
import multiprocessing
import struct
from dataclasses import dataclass, field

import numpy as np
from numpy.random import Generator, Philox
from scipy.special import gammainc, ndtr

from . import kernels
from .errors import DimensionMismatch, InvalidDegrees, ParameterOutOfRange, ValidationError
from .kernels import SymmetricKernel

LAW_TAGS = ("gaussian", "rademacher", "uniform", "shifted_exponential", "two_point")

_SQRT3 = math.sqrt(3.0)
_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class DistributionSpec:
    """Centered unit-variance input law with analytic moment metadata."""

    tag: str
    abs_moment3: float
    moment3: float
    moment4: float
    p: float | None = None  # two_point parameter

    def sample(self, gen: Generator, size: int) -> np.ndarray:
        if self.tag == "gaussian":
            return gen.standard_normal(size)
        if self.tag == "rademacher":
            return gen.integers(0, 2, size).astype(np.float64) * 2.0 - 1.0
        if self.tag == "uniform":
            return gen.uniform(-_SQRT3, _SQRT3, size)
        if self.tag == "shifted_exponential":
            return gen.standard_exponential(size) - 1.0
        if self.tag == "two_point":
            hi = math.sqrt((1.0 - self.p) / self.p)
            lo = -math.sqrt(self.p / (1.0 - self.p))
            return np.where(gen.random(size) < self.p, hi, lo)
        raise ParameterOutOfRange(f"unknown law tag {self.tag!r}")

    @property
    def name(self) -> str:
        return f"two_point:{self.p!r}" if self.tag == "two_point" else self.tag


def get_law(name: str) -> DistributionSpec:
    """Law by name; two_point takes its atom probability as 'two_point:p'."""
    if name.startswith("two_point"):
        try:
            p = float(name.split(":", 1)[1])
        except (IndexError, ValueError):
            raise ParameterOutOfRange(
                f"two_point law needs a probability, e.g. 'two_point:0.3', got {name!r}"
            ) from None
        if not 0.0 < p < 1.0:
            raise ParameterOutOfRange(f"two_point probability must be in (0,1), got {p}")
        q = 1.0 - p
        return DistributionSpec(
            tag="two_point",
            abs_moment3=(q * q + p * p) / math.sqrt(p * q),
            moment3=(1.0 - 2.0 * p) / math.sqrt(p * q),
            moment4=(q ** 3 + p ** 3) / (p * q),
            p=p,
        )
    table = {
        "gaussian": DistributionSpec("gaussian", 2.0 * math.sqrt(2.0 / math.pi), 0.0, 3.0),
        "rademacher": DistributionSpec("rademacher", 1.0, 0.0, 1.0),
        "uniform": DistributionSpec("uniform", 3.0 * _SQRT3 / 4.0, 0.0, 1.8),
        "shifted_exponential": DistributionSpec(
            "shifted_exponential", 12.0 / math.e - 2.0, 2.0, 9.0
        ),
    }
    if name not in table:
        raise ParameterOutOfRange(f"unknown law {name!r}; know {LAW_TAGS}")
    return table[name]


def law_moment_profile(dist: DistributionSpec):
    from .bounds import MomentProfile

    return MomentProfile(beta3=dist.abs_moment3, beta4=dist.moment4)


@dataclass(frozen=True)
class SampleConfig:
    n: int
    seed: int
    workers: int = 1
    batch_size: int = 1024

    def __post_init__(self):
        if self.n < 1 or self.seed < 0 or self.workers < 1 or self.batch_size < 1:
            raise ParameterOutOfRange(f"bad sample config {self}")


def _draw_generator(seed: int, draw_index: int) -> Generator:
    return Generator(Philox(key=((seed & _MASK64) << 64) | (draw_index & _MASK64)))


@dataclass
class SampleSummary:
    """Empirical moments with standard errors plus the retained sample."""

    n: int
    law: str
    seed: int
    samples: np.ndarray
    moments: np.ndarray = field(init=False)  # E[Q^k], k = 1..4
    standard_errors: np.ndarray = field(init=False)
    _sorted: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        powers = np.vstack([self.samples ** k for k in range(1, 5)])
        self.moments = powers.mean(axis=1)
        self.standard_errors = powers.std(axis=1, ddof=1) / math.sqrt(self.n)

    def moment(self, k: int) -> float:
        return float(self.moments[k - 1])

    def standard_error(self, k: int) -> float:
        return float(self.standard_errors[k - 1])

    def sorted_samples(self) -> np.ndarray:
        if self._sorted is None:
            self._sorted = np.sort(self.samples)
        return self._sorted


@dataclass
class VectorSampleSummary:
    """Joint samples of several sums sharing each input draw."""

    n: int
    law: str
    seed: int
    samples: np.ndarray  # shape (n, m)

    def empirical_covariance(self) -> np.ndarray:
        return self.samples.T @ self.samples / self.n

    def marginal(self, j: int) -> SampleSummary:
        return SampleSummary(n=self.n, law=self.law, seed=self.seed, samples=self.samples[:, j])


def _compute_block(kernel_list, dist, seed, lo, hi, n_inputs) -> np.ndarray:
    X = np.empty((hi - lo, n_inputs))
    for j in range(lo, hi):
        X[j - lo] = dist.sample(_draw_generator(seed, j), n_inputs)
    block = np.empty((hi - lo, len(kernel_list)))
    for col, f in enumerate(kernel_list):
        block[:, col] = kernels.evaluate_sum_batch(f, X[:, : f.N])
    return block


def _compute_block_span(kernel_list, dist, seed, span, n_inputs):
    return [(lo, _compute_block(kernel_list, dist, seed, lo, hi, n_inputs)) for lo, hi in span]


def _sample_matrix(kernel_list, dist: DistributionSpec, config: SampleConfig) -> np.ndarray:
    """(n, m) matrix of sums.  Every block is computed identically whatever
    the worker count (per-draw streams, per-block evaluation), and blocks
    land at fixed offsets, so the result is bitwise worker-independent."""
    n_inputs = max(f.N for f in kernel_list)
    out = np.empty((config.n, len(kernel_list)))
    blocks = [
        (lo, min(lo + config.batch_size, config.n))
        for lo in range(0, config.n, config.batch_size)
    ]
    if config.workers == 1 or len(blocks) == 1:
        for lo, hi in blocks:
            out[lo:hi] = _compute_block(kernel_list, dist, config.seed, lo, hi, n_inputs)
        return out
    spans = [blocks[w :: config.workers] for w in range(config.workers)]
    spans = [s for s in spans if s]
    method = "fork" if "fork" in multiprocessing.get_all_start_methods() else None
    ctx = multiprocessing.get_context(method)
    with concurrent.futures.ProcessPoolExecutor(
        max_workers=len(spans), mp_context=ctx
    ) as pool:
        futures = [
            pool.submit(_compute_block_span, kernel_list, dist, config.seed, span, n_inputs)
            for span in spans
        ]
        for fut in futures:
            for lo, block in fut.result():
                out[lo : lo + block.shape[0]] = block
    return out


def sample_sums(f: SymmetricKernel, dist: DistributionSpec, config: SampleConfig) -> SampleSummary:
    """n evaluations of the sum on fresh i.i.d. input vectors."""
    q = _sample_matrix([f], dist, config)[:, 0]
    return SampleSummary(n=config.n, law=dist.name, seed=config.seed, samples=q)


def sample_vector_sums(kernel_list, dist: DistributionSpec, config: SampleConfig) -> VectorSampleSummary:
    """Joint samples: every kernel is evaluated on the same input draw
    (smaller kernels read a prefix of the shared vector)."""
    if not kernel_list:
        raise DimensionMismatch("need at least one kernel")
    q = _sample_matrix(kernel_list, dist, config)
    return VectorSampleSummary(n=config.n, law=dist.name, seed=config.seed, samples=q)


# ---------------------------------------------------------------------------
# Distances
# ---------------------------------------------------------------------------

def ks_statistic(sorted_samples: np.ndarray, target_cdf_values: np.ndarray) -> float:
    """One-sample Kolmogorov statistic from sorted samples and the target CDF
    evaluated at them: max over jump points of both one-sided gaps."""
    n = sorted_samples.size
    grid = np.arange(1, n + 1) / n
    d_plus = float((grid - target_cdf_values).max())
    d_minus = float((target_cdf_values - grid + 1.0 / n).max())
    return max(d_plus, d_minus, 0.0)


def ks_normal(summary: SampleSummary) -> float:
    s = summary.sorted_samples()
    return ks_statistic(s, ndtr(s))


def centered_chi2_cdf(x, nu: int):
    """P(Z <= x) for Z = (chi-square with nu degrees) - nu; zero at and
    below -nu; regularized lower incomplete gamma elsewhere."""
    if int(nu) != nu or nu < 1:
        raise InvalidDegrees(f"degrees of freedom must be a positive integer, got {nu}")
    x = np.asarray(x, dtype=np.float64)
    shifted = np.maximum(x + nu, 0.0)
    out = gammainc(nu / 2.0, shifted / 2.0)
    return out if out.ndim else float(out)


def ks_chi2(summary: SampleSummary, nu: int) -> float:
    s = summary.sorted_samples()
    return ks_statistic(s, centered_chi2_cdf(s, nu))


def dkw_epsilon(n: int, delta: float = 0.01) -> float:
    """Two-sided DKW band half-width: empirical CDF is within this of the
    truth with probability >= 1 - delta."""
    return math.sqrt(math.log(2.0 / delta) / (2.0 * n))


def gaussian_vector_sample(V: np.ndarray, config: SampleConfig) -> np.ndarray:
    """Reference sample of N(0, V) rows under the same per-draw streams."""
    V = np.asarray(V, dtype=np.float64)
    m = V.shape[0]
    eigvals, vecs = np.linalg.eigh(V)
    A = vecs * np.sqrt(np.maximum(eigvals, 0.0))
    out = np.empty((config.n, m))
    for j in range(config.n):
        out[j] = A @ _draw_generator(config.seed, j).standard_normal(m)
    return out


def ks_joint_two_sample(a: np.ndarray, b: np.ndarray, max_points: int = 256) -> float:
    """Two-sample joint Kolmogorov statistic sup_z |F_a(z) - F_b(z)| over
    componentwise-orthant indicators, evaluated on a fixed subset of the
    pooled sample points (desk-scale surrogate for the full sup)."""
    a = np.atleast_2d(a)
    b = np.atleast_2d(b)
    if a.shape[1] != b.shape[1]:
        raise DimensionMismatch("samples must share the vector dimension")
    half = max_points // 2
    points = np.vstack([a[:half], b[:half]])
    d = 0.0
    for z in points:
        fa = float((a <= z).all(axis=1).mean())
        fb = float((b <= z).all(axis=1).mean())
        d = max(d, abs(fa - fb))
    return d


# ---------------------------------------------------------------------------
# Raw sample dump (flat binary, little endian)
# ---------------------------------------------------------------------------

SAMPLE_MAGIC = b"HSUMRAW1"


def write_samples(path, samples: np.ndarray) -> None:
    data = np.ascontiguousarray(samples, dtype="<f8")
    with open(path, "wb") as fh:
        fh.write(SAMPLE_MAGIC)
        fh.write(struct.pack("<Q", data.size))
        fh.write(data.tobytes())


def read_samples(path) -> np.ndarray:
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != SAMPLE_MAGIC:
            raise ValidationError(f"not a raw sample file (magic {magic!r})")
        (count,) = struct.unpack("<Q", fh.read(8))
        data = np.frombuffer(fh.read(count * 8), dtype="<f8")
    if data.size != count:
        raise ValidationError(f"truncated sample file: header {count}, got {data.size}")
    return data.astype(np.float64)
