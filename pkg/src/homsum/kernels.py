"""Symmetric coefficient kernels on [N]^d vanishing on diagonals.

A kernel f assigns a real coefficient to every d-tuple of distinct indices
from [N] = {1, ..., N}, invariant under permutations of the tuple and zero
whenever two indices coincide.  Storage is sparse-canonical: only strictly
increasing tuples with nonzero coefficients are kept; the symmetric
extension is implied.

The associated degree-d multilinear form is

    Q_d(N, f, x) = d! * sum_{i1 < ... < id} f(i1, ..., id) x_{i1} ... x_{id},

equivalently the sum of f * x-products over all ordered tuples.  Under
independent unit-variance inputs, E[Q_d^2] = d! * ||f||_d^2 with
||f||_d^2 the sum of f^2 over all ordered tuples.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .errors import (
    DimensionMismatch,
    DuplicateTuple,
    IndexOutOfRange,
    NonCanonicalTuple,
    ParameterOutOfRange,
    UnsupportedFamilyParameters,
    ZeroKernel,
)

FAMILY_TAGS = ("single_pair", "constant", "disjoint_pairs", "walsh", "random_sparse")


@dataclass(frozen=True, eq=False)
class SymmetricKernel:
    """Sparse-canonical symmetric kernel (immutable after construction)."""

    d: int
    N: int
    entries: dict  # {strictly increasing 1-based tuple: nonzero float}

    # Parallel array form, built once; used by the vectorized evaluators.
    index_array: np.ndarray = field(init=False, repr=False, compare=False)
    value_array: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        items = sorted(self.entries.items())
        if items:
            idx = np.array([t for t, _ in items], dtype=np.int64) - 1
            vals = np.array([v for _, v in items], dtype=np.float64)
        else:
            idx = np.empty((0, self.d), dtype=np.int64)
            vals = np.empty(0, dtype=np.float64)
        object.__setattr__(self, "index_array", idx)
        object.__setattr__(self, "value_array", vals)

    def __eq__(self, other):
        if not isinstance(other, SymmetricKernel):
            return NotImplemented
        return self.d == other.d and self.N == other.N and self.entries == other.entries

    @property
    def entry_count(self) -> int:
        return len(self.entries)

    def __repr__(self):
        return f"SymmetricKernel(d={self.d}, N={self.N}, entries={self.entry_count})"


def _validate_tuple(t, d: int, N: int) -> tuple:
    t = tuple(int(i) for i in t)
    if len(t) != d:
        raise DimensionMismatch(f"entry tuple {t} has length {len(t)}, expected {d}")
    for i in t:
        if not 1 <= i <= N:
            raise IndexOutOfRange(f"index {i} outside 1..{N} in entry {t}")
    if any(a >= b for a, b in zip(t, t[1:])):
        raise NonCanonicalTuple(f"entry tuple {t} is not strictly increasing")
    return t


def make_kernel(d: int, N: int, canonical_entries) -> SymmetricKernel:
    """Build a kernel from canonical (strictly increasing tuple -> value) entries.

    Accepts a mapping or an iterable of (tuple, value) pairs.  Exact-zero
    coefficients are dropped (sparse canonical form).  Rejects unsorted or
    diagonal tuples, out-of-range indices, and repeated tuples.
    """
    if int(d) != d or d < 1:
        raise ParameterOutOfRange(f"order d must be a positive integer, got {d}")
    if int(N) != N or N < d:
        raise ParameterOutOfRange(f"dimension N must satisfy N >= d, got N={N}, d={d}")
    d, N = int(d), int(N)
    if isinstance(canonical_entries, Mapping):
        items: Iterable = canonical_entries.items()
    else:
        items = canonical_entries
    entries: dict = {}
    for t, v in items:
        t = _validate_tuple(t, d, N)
        if t in entries:
            raise DuplicateTuple(f"entry tuple {t} supplied twice")
        v = float(v)
        if v != 0.0:
            entries[t] = v
    return SymmetricKernel(d=d, N=N, entries=entries)


def evaluate(f: SymmetricKernel, idx) -> float:
    """Kernel value at an arbitrary ordered tuple (0 on diagonals)."""
    t = tuple(int(i) for i in idx)
    if len(t) != f.d:
        raise DimensionMismatch(f"tuple length {len(t)} != order {f.d}")
    for i in t:
        if not 1 <= i <= f.N:
            raise IndexOutOfRange(f"index {i} outside 1..{f.N}")
    s = tuple(sorted(t))
    if any(a == b for a, b in zip(s, s[1:])):
        return 0.0
    return f.entries.get(s, 0.0)


def squared_norm(f: SymmetricKernel) -> float:
    """||f||_d^2: sum of f^2 over all ordered tuples = d! * sum of canonical f^2."""
    return math.factorial(f.d) * float(np.dot(f.value_array, f.value_array))


def second_moment(f: SymmetricKernel) -> float:
    """E[Q_d(X)^2] for unit-variance independent inputs: d! * ||f||_d^2."""
    return math.factorial(f.d) * squared_norm(f)


def evaluate_sum(f: SymmetricKernel, x) -> float:
    """Q_d(N, f, x) for one input vector of length N."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (f.N,):
        raise DimensionMismatch(f"input vector has shape {x.shape}, expected ({f.N},)")
    return float(evaluate_sum_batch(f, x[None, :])[0])


def evaluate_sum_batch(f: SymmetricKernel, X: np.ndarray) -> np.ndarray:
    """Q_d over a batch of input rows, shape (n, N) -> (n,).

    For order 2 with many entries a dense quadratic-form (GEMM) path is
    used; otherwise products are gathered sparsely entry by entry.  Both
    paths reduce in a fixed order, so results do not depend on batching.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != f.N:
        raise DimensionMismatch(f"batch has shape {X.shape}, expected (n, {f.N})")
    if f.entry_count == 0:
        return np.zeros(X.shape[0])
    dfact = float(math.factorial(f.d))
    if f.d == 2 and f.entry_count > f.N and f.N <= 1024:
        F = dense_tensor(f)
        return ((X @ F) * X).sum(axis=1)  # = sum_{i,j} f(i,j) x_i x_j, includes d!
    # row chunking keeps the gathered product in cache; the chunk size is a
    # function of the kernel alone, so results are independent of batching
    chunk = min(4096, max(16, 4_000_000 // (f.entry_count * f.d)))
    out = np.empty(X.shape[0])
    for lo in range(0, X.shape[0], chunk):
        rows = X[lo : lo + chunk]
        prod = rows[:, f.index_array[:, 0]].copy()
        for k in range(1, f.d):
            prod *= rows[:, f.index_array[:, k]]
        out[lo : lo + chunk] = prod @ f.value_array
    out *= dfact
    return out


def dense_tensor(f: SymmetricKernel) -> np.ndarray:
    """Dense (N,)*d array of kernel values over all ordered tuples (cached)."""
    cached = getattr(f, "_dense", None)
    if cached is not None:
        return cached
    F = np.zeros((f.N,) * f.d)
    for t, v in f.entries.items():
        for p in itertools.permutations(t):
            F[tuple(i - 1 for i in p)] = v
    object.__setattr__(f, "_dense", F)
    return F


def normalize_to_variance(f: SymmetricKernel, sigma2: float) -> SymmetricKernel:
    """Scale so that E[Q_d^2] = d! * ||f||_d^2 equals sigma2."""
    if sigma2 <= 0:
        raise ParameterOutOfRange(f"target second moment must be positive, got {sigma2}")
    cur = second_moment(f)
    if cur == 0.0:
        raise ZeroKernel("cannot normalize a kernel with zero norm")
    lam = math.sqrt(sigma2 / cur)
    return SymmetricKernel(d=f.d, N=f.N, entries={t: lam * v for t, v in f.entries.items()})


def is_normalized(f: SymmetricKernel, sigma2: float, rtol: float = 1e-9) -> bool:
    return abs(second_moment(f) - sigma2) <= rtol * sigma2


# ---------------------------------------------------------------------------
# Named kernel families
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class KernelFamilySpec:
    """Parameters for a named family; `size` is N (constant, walsh,
    random_sparse) or the pair count m (disjoint_pairs)."""

    family: str
    d: int = 2
    size: int = 2
    sigma2: float = 1.0
    seed: int = 0


def single_pair(sigma2: float = 1.0) -> SymmetricKernel:
    # E[Q^2] = 4 v^2
    return make_kernel(2, 2, {(1, 2): math.sqrt(sigma2) / 2.0})


def constant_kernel(N: int, sigma2: float = 1.0) -> SymmetricKernel:
    """Order-2 kernel constant off the diagonal, E[Q^2] = sigma2."""
    if N < 2:
        raise UnsupportedFamilyParameters(f"constant family needs N >= 2, got {N}")
    c = math.sqrt(sigma2 / (2.0 * N * (N - 1)))
    return make_kernel(2, N, {(i, j): c for i in range(1, N + 1) for j in range(i + 1, N + 1)})


def disjoint_pairs(m: int, sigma2: float = 1.0) -> SymmetricKernel:
    """m disjoint index pairs (2k-1, 2k), each with weight sqrt(sigma2)/(2 sqrt(m))."""
    if m < 1:
        raise UnsupportedFamilyParameters(f"disjoint_pairs needs m >= 1, got {m}")
    v = math.sqrt(sigma2 / (4.0 * m))
    return make_kernel(2, 2 * m, {(2 * k - 1, 2 * k): v for k in range(1, m + 1)})


def walsh_kernel(d: int, N: int, sigma2: float = 1.0) -> SymmetricKernel:
    """Kernel of x_1 ... x_{d-1} * sum_{i>=d} x_i / sqrt(N-d+1), E[Q^2] = sigma2."""
    if d < 2 or N <= d:
        raise UnsupportedFamilyParameters(f"walsh family needs N > d >= 2, got d={d}, N={N}")
    head = tuple(range(1, d))
    v = math.sqrt(sigma2) / (math.factorial(d) * math.sqrt(N - d + 1))
    return make_kernel(d, N, {head + (i,): v for i in range(d, N + 1)})


def random_sparse_kernel(
    d: int,
    N: int,
    *,
    seed: int = 0,
    sigma2: float = 1.0,
    entry_count: int | None = None,
) -> SymmetricKernel:
    """Seeded random support with standard-normal weights, normalized to sigma2."""
    if d < 1 or N < d:
        raise UnsupportedFamilyParameters(f"random_sparse needs N >= d >= 1, got d={d}, N={N}")
    total = math.comb(N, d)
    if entry_count is None:
        entry_count = min(total, max(2 * N, 8))
    if not 1 <= entry_count <= total:
        raise UnsupportedFamilyParameters(
            f"entry_count {entry_count} outside 1..{total} for d={d}, N={N}"
        )
    rng = np.random.default_rng(seed)
    if total <= 200_000:
        support = list(itertools.combinations(range(1, N + 1), d))
        chosen = [support[i] for i in rng.choice(total, size=entry_count, replace=False)]
    else:
        seen: set = set()
        while len(seen) < entry_count:
            t = tuple(sorted(rng.choice(N, size=d, replace=False) + 1))
            seen.add(t)
        chosen = sorted(seen)
    values = rng.standard_normal(entry_count)
    values[values == 0.0] = 1.0  # keep the support size deterministic
    raw = make_kernel(d, N, {t: v for t, v in zip(chosen, values)})
    return normalize_to_variance(raw, sigma2)


def generate_family(spec: KernelFamilySpec) -> SymmetricKernel:
    if spec.family == "single_pair":
        return single_pair(spec.sigma2)
    if spec.family == "constant":
        if spec.d != 2:
            raise UnsupportedFamilyParameters("constant family requires d = 2")
        return constant_kernel(spec.size, spec.sigma2)
    if spec.family == "disjoint_pairs":
        if spec.d != 2:
            raise UnsupportedFamilyParameters("disjoint_pairs family requires d = 2")
        return disjoint_pairs(spec.size, spec.sigma2)
    if spec.family == "walsh":
        return walsh_kernel(spec.d, spec.size, spec.sigma2)
    if spec.family == "random_sparse":
        return random_sparse_kernel(spec.d, spec.size, seed=spec.seed, sigma2=spec.sigma2)
    raise UnsupportedFamilyParameters(f"unknown family {spec.family!r}; know {FAMILY_TAGS}")


# ---------------------------------------------------------------------------
# Kernel file format
# ---------------------------------------------------------------------------

KERNEL_MAGIC = "artifact-kernel v1"


def format_kernel(f: SymmetricKernel) -> str:
    """Canonical text form: header, then one `i1 ... id value` record per entry.

    Values are written with repr(), which round-trips doubles exactly, and
    records are sorted, so write -> read -> write is byte identical.
    """
    lines = [KERNEL_MAGIC, f"d {f.d}", f"N {f.N}"]
    for t in sorted(f.entries):
        lines.append(" ".join(str(i) for i in t) + " " + repr(f.entries[t]))
    return "\n".join(lines) + "\n"


def parse_kernel(text: str) -> SymmetricKernel:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != KERNEL_MAGIC:
        raise ParameterOutOfRange(f"not a kernel file (expected header {KERNEL_MAGIC!r})")
    try:
        d = int(lines[1].split()[1])
        N = int(lines[2].split()[1])
    except (IndexError, ValueError) as exc:
        raise ParameterOutOfRange(f"malformed kernel header: {exc}") from None
    entries = []
    for ln in lines[3:]:
        parts = ln.split()
        if len(parts) != d + 1:
            raise ParameterOutOfRange(f"malformed kernel record {ln!r}")
        entries.append((tuple(int(p) for p in parts[:d]), float(parts[d])))
    return make_kernel(d, N, entries)


def write_kernel(f: SymmetricKernel, path) -> None:
    with open(path, "w") as fh:
        fh.write(format_kernel(f))


def read_kernel(path) -> SymmetricKernel:
    with open(path) as fh:
        return parse_kernel(fh.read())
