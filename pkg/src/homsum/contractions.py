"""Contractions of a kernel with itself, their norms, influences, and the
chi-square defect statistic.

The rank-r contraction pairs r coordinates of two copies of f:

    (f *_r f)(j_1, ..., j_{2d-2r})
        = sum over a in [N]^r of f(a, j_1, ..., j_{d-r}) * f(a, j_{d-r+1}, ...)

r = d collapses to the squared norm ||f||_d^2, r = 0 is the tensor product.
The result is generally neither symmetric nor vanishing on diagonals.

Norms come in two flavors:

* `contraction_norm` uses the Gram identity
      ||f *_r f||^2 = sum_{a,b in [N]^r} <f(a,.), f(b,.)>^2
  on the sparse slice structure, never materializing the output; cost is
  quadratic in the number of distinct r-subsets carrying support.
* `symmetrized_contraction_norm` needs the dense tensor (there is no Gram
  shortcut after averaging over coordinate permutations), except for output
  arity 2 where the contraction is already symmetric.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse

from . import kernels
from .errors import MaterializationTooLarge, OddOrder, ParameterOutOfRange, RankOutOfRange
from .kernels import SymmetricKernel

DEFAULT_MATERIALIZATION_CAP = 10_000_000


@dataclass(frozen=True)
class ContractionTensor:
    """Materialized contraction, dense over [N]^arity."""

    arity: int
    N: int
    values: np.ndarray
    symmetric: bool = False

    def frobenius_norm(self) -> float:
        return float(np.sqrt((self.values ** 2).sum()))


@dataclass(frozen=True)
class InfluenceProfile:
    """Per-index influence: total squared canonical mass on tuples containing i."""

    values: np.ndarray

    @property
    def max_influence(self) -> float:
        return float(self.values.max()) if self.values.size else 0.0

    @property
    def total(self) -> float:
        return float(self.values.sum())


def _check_rank(f: SymmetricKernel, r: int) -> int:
    if int(r) != r or not 0 <= r <= f.d:
        raise RankOutOfRange(f"contraction rank {r} outside 0..{f.d}")
    return int(r)


def contract(f: SymmetricKernel, r: int, cap: int = DEFAULT_MATERIALIZATION_CAP) -> ContractionTensor:
    """Materialize f *_r f as a dense tensor on [N]^{2d-2r}."""
    r = _check_rank(f, r)
    if r == f.d:
        scalar = np.array(kernels.squared_norm(f))
        return ContractionTensor(arity=0, N=f.N, values=scalar, symmetric=True)
    out_arity = 2 * f.d - 2 * r
    if max(f.N ** f.d, f.N ** out_arity) > cap:
        raise MaterializationTooLarge(
            f"contraction d={f.d}, r={r}, N={f.N} needs {max(f.N**f.d, f.N**out_arity)} "
            f"values, cap is {cap}"
        )
    dense = kernels.dense_tensor(f)
    M = dense.reshape(f.N ** r, f.N ** (f.d - r))
    out = (M.T @ M).reshape((f.N,) * out_arity)
    return ContractionTensor(arity=out_arity, N=f.N, values=out, symmetric=(out_arity <= 2))


def _slice_matrix(f: SymmetricKernel, r: int):
    """Sparse matrix S over (complement (d-r)-subset, r-subset) -> value."""
    row_ids: dict = {}
    col_ids: dict = {}
    rows, cols, vals = [], [], []
    for t, v in f.entries.items():
        for s in itertools.combinations(t, r):
            u = tuple(i for i in t if i not in s)
            rows.append(row_ids.setdefault(u, len(row_ids)))
            cols.append(col_ids.setdefault(s, len(col_ids)))
            vals.append(v)
    S = scipy.sparse.coo_matrix(
        (vals, (rows, cols)), shape=(len(row_ids), len(col_ids))
    ).tocsr()
    return S


def contraction_norm(f: SymmetricKernel, r: int) -> float:
    """||f *_r f||_{2d-2r} via the Gram identity, without materialization.

    Over unordered r-subsets A, B with slice vectors S_A, S_B (indexed by
    unordered complements), the ordered-tuple sums factor as

        ||f *_r f||^2 = r!^2 (d-r)!^2 * sum_{A,B} <S_A, S_B>^2,

    i.e. r! (d-r)! times the Frobenius norm of the slice Gram matrix.
    """
    r = _check_rank(f, r)
    if r == f.d or r == 0:
        return kernels.squared_norm(f)
    if f.entry_count == 0:
        return 0.0
    S = _slice_matrix(f, r)
    W = (S.T @ S).tocoo()
    gram_sq = float((W.data ** 2).sum())
    return math.factorial(r) * math.factorial(f.d - r) * math.sqrt(gram_sq)


def symmetrize(T: ContractionTensor) -> ContractionTensor:
    """Average over all coordinate permutations of the tensor."""
    if T.arity <= 1 or T.symmetric:
        return ContractionTensor(T.arity, T.N, T.values, symmetric=True)
    acc = np.zeros_like(T.values)
    for p in itertools.permutations(range(T.arity)):
        acc += np.transpose(T.values, p)
    acc /= math.factorial(T.arity)
    return ContractionTensor(T.arity, T.N, acc, symmetric=True)


def symmetrized_contraction_norm(
    f: SymmetricKernel, r: int, cap: int = DEFAULT_MATERIALIZATION_CAP
) -> float:
    """Frobenius norm of the symmetrization of f *_r f.

    Always <= contraction_norm(f, r).  Output arity 2 (r = d-1) is already
    symmetric, so the Gram path applies and no materialization is needed.
    """
    r = _check_rank(f, r)
    if r == f.d or r == f.d - 1:
        return contraction_norm(f, r)
    return symmetrize(contract(f, r, cap)).frobenius_norm()


def influence_profile(f: SymmetricKernel) -> InfluenceProfile:
    """Influence of each index: sum of squared canonical entries containing it.

    Equals (d-1)!^{-1} times the ordered-tuple sum of f^2 over tuples whose
    first coordinate is i.  The influences sum to ||f||_d^2 / (d-1)!.
    """
    acc = np.zeros(f.N)
    for t, v in f.entries.items():
        vv = v * v
        for i in t:
            acc[i - 1] += vv
    return InfluenceProfile(values=acc)


def max_influence(f: SymmetricKernel) -> float:
    return influence_profile(f).max_influence


def chi_square_match_constant(d: int) -> float:
    """The constant c_d = 4 ((d/2)!)^3 / (d!)^2 in the chi-square criterion."""
    if d % 2 != 0 or d < 2:
        raise OddOrder(f"chi-square constant needs even order >= 2, got d={d}")
    return 4.0 * math.factorial(d // 2) ** 3 / math.factorial(d) ** 2


def chi_square_defect(f: SymmetricKernel, cap: int = DEFAULT_MATERIALIZATION_CAP) -> float:
    """|| sym(f *_{d/2} f) - c_d * f ||_d over all ordered tuples of [N]^d.

    The symmetrized half-contraction carries diagonal mass; f is extended by
    zero there, so the defect norm runs over the full cube.
    """
    if f.d % 2 != 0:
        raise OddOrder(f"chi-square defect needs even order, got d={f.d}")
    c_d = chi_square_match_constant(f.d)
    T = symmetrize(contract(f, f.d // 2, cap))
    diff = T.values - c_d * kernels.dense_tensor(f)
    return float(np.sqrt((diff ** 2).sum()))


def crux_gap(f: SymmetricKernel) -> tuple:
    """(||f *_{d-1} f||_2^2, ((d-1)! * max influence)^2); first >= second always.

    The squared rank-(d-1) contraction norm dominates the sum of squared
    diagonal entries, whose maximum is ((d-1)! * max_i Inf_i)^2.
    """
    if f.d < 2:
        raise ParameterOutOfRange(f"crux gap needs d >= 2, got d={f.d}")
    lhs = contraction_norm(f, f.d - 1) ** 2
    rhs = (math.factorial(f.d - 1) * max_influence(f)) ** 2
    return lhs, rhs


def all_contraction_norms(f: SymmetricKernel) -> dict:
    """{r: ||f *_r f||} for r = 1..d-1 (empty for d = 1)."""
    return {r: contraction_norm(f, r) for r in range(1, f.d)}
