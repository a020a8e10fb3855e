"""Explicit approximation bounds for homogeneous sums.

Univariate normal: the contraction statistic t1 with its smooth-test
constant c_star, the fourth-moment statistic t2 (t1 <= t2), the full
smooth-test bound combining the invariance term with the Gaussian-chaos
term, and the Wasserstein bound with its applicability threshold.

Chi-square: t3/t4 for even order and the corresponding smooth-test bound
with the max(sqrt(2 pi / nu), 1/nu + 2/nu^2) prefactor.

Multivariate: the pairwise contraction statistic delta_ij, the smooth-test
bound over vectors of sums, and the convex-sets (hence Kolmogorov) bound.

All bounds are plain floats assembled into BoundReport records whose totals
recompute exactly from their serialized components.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import contractions, kernels
from .contractions import DEFAULT_MATERIALIZATION_CAP
from .errors import (
    InvalidCovariance,
    InvalidDegrees,
    MaterializationTooLarge,
    NotNormalized,
    NotNormalizedToTwoNu,
    OddOrder,
    OrderMismatch,
    ParameterOutOfRange,
)
from .kernels import SymmetricKernel

MAX_ORDER = 12  # factorial/binomial arithmetic kept in exact-integer range

EXACT = "exact"
UPPER_BOUND = "upper-bound"
MONTE_CARLO = "monte-carlo"


def _check_order(d: int) -> None:
    if d > MAX_ORDER:
        raise ParameterOutOfRange(f"bounds support order d <= {MAX_ORDER}, got d={d}")


def _require_unit(f: SymmetricKernel) -> None:
    got = kernels.second_moment(f)
    if abs(got - 1.0) > 1e-9:
        raise NotNormalized(f"kernel second moment is {got!r}, expected 1.0")


@dataclass(frozen=True)
class TestFunctionBudget:
    """Derivative budget of the test function: a = |phi'(0)|, b = |phi''(0)|,
    b3 = sup |phi'''|; b2m/b3m are the multivariate sup norms under the
    multi-index normalization."""

    a: float = 0.0
    b: float = 0.0
    b3: float = 0.0
    b2m: float = 0.0
    b3m: float = 0.0

    def __post_init__(self):
        for name in ("a", "b", "b3", "b2m", "b3m"):
            if getattr(self, name) < 0:
                raise ParameterOutOfRange(f"budget field {name} must be >= 0")


@dataclass(frozen=True)
class MomentProfile:
    """Uniform input-moment bounds: beta3 >= sup E|X_i|^3, beta4 >= sup E X_i^4."""

    beta3: float
    beta4: float
    gamma_q: float | None = None

    def __post_init__(self):
        if self.beta3 < 1.0 or self.beta4 < 1.0:
            raise ParameterOutOfRange(
                "unit-variance laws force beta3 >= 1 and beta4 >= 1, got "
                f"beta3={self.beta3}, beta4={self.beta4}"
            )

    @property
    def alpha(self) -> float:
        return max(3.0, self.beta4)


@dataclass
class BoundReport:
    """Evaluated bound with its named components.

    `components` carries plain floats under stable names; `recompute_total`
    reassembles the headline bound from them, and serialization preserves
    doubles exactly, so totals are reproducible from a written report.
    """

    kind: str
    components: dict
    exactness: dict = field(default_factory=dict)
    total: float = float("nan")
    applicable: bool = True
    delta: np.ndarray | None = None
    mc_standard_error: float | None = None

    def recompute_total(self) -> float:
        c = self.components
        if self.kind == "normal":
            factor = math.sqrt((c["d"] - 1) / (3.0 * c["d"]))
            return c["invariance"] + c["c_star"] * factor * (
                c["moment_term"] + c["influence_term"]
            )
        if self.kind == "chi2":
            factor = math.sqrt((c["d"] - 1) / (3.0 * c["d"]))
            return c["invariance"] + c["prefactor"] * factor * (
                c["moment_term"] + c["influence_term"]
            )
        if self.kind == "wasserstein":
            if not self.applicable:
                return float("nan")
            return 4.0 * (c["b1"] + c["b2"]) ** (1.0 / 3.0)
        if self.kind == "multivariate":
            return c["b2m"] * c["delta_total"] + c["b3m"] * c["mixing_term"]
        if self.kind == "convex_sets":
            return (
                8.0
                * (c["b_scale"] ** 2 * c["b1"] + c["b_scale"] ** 3 * c["b2"]) ** 0.25
                * c["m"] ** 0.375
            )
        raise ParameterOutOfRange(f"unknown report kind {self.kind!r}")


# ---------------------------------------------------------------------------
# Univariate normal approximation
# ---------------------------------------------------------------------------

def c_star(budget: TestFunctionBudget, d: int) -> float:
    """Smooth-test constant:

        4 sqrt(2) (1 + 5^{3d/2})
          * max(1.5 b + (b3/3)(2 sqrt(2)/sqrt(pi)), 2 a + b3/3).
    """
    if d < 1:
        raise ParameterOutOfRange(f"c_star needs d >= 1, got {d}")
    _check_order(d)
    inner = max(
        1.5 * budget.b + (budget.b3 / 3.0) * (2.0 * math.sqrt(2.0) / math.sqrt(math.pi)),
        2.0 * budget.a + budget.b3 / 3.0,
    )
    return 4.0 * math.sqrt(2.0) * (1.0 + 5.0 ** (1.5 * d)) * inner


def _symmetrized_norms(f, ranks, cap):
    """{r: norm} using exact symmetrized norms where materializable and the
    unsymmetrized Gram norm (an upper bound) elsewhere; flags the fallback."""
    norms, exact = {}, True
    for r in ranks:
        try:
            norms[r] = contractions.symmetrized_contraction_norm(f, r, cap)
        except MaterializationTooLarge:
            norms[r] = contractions.contraction_norm(f, r)
            exact = False
    return norms, exact


def t1(f: SymmetricKernel, cap: int = DEFAULT_MATERIALIZATION_CAP) -> tuple:
    """Contraction statistic for the normal approximation of a unit-variance
    kernel:

        sqrt(d^2 sum_{r=1}^{d-1} (r-1)!^2 C(d-1,r-1)^4 (2d-2r)!
             || sym(f *_r f) ||^2).

    Returns (value, exactness); when a symmetrized norm cannot be
    materialized its unsymmetrized upper bound is substituted and the
    result is flagged "upper-bound" (still a valid bound).
    """
    if f.d < 2:
        raise ParameterOutOfRange(f"t1 needs d >= 2, got d={f.d}")
    _check_order(f.d)
    _require_unit(f)
    norms, exact = _symmetrized_norms(f, range(1, f.d), cap)
    acc = sum(
        math.factorial(r - 1) ** 2
        * math.comb(f.d - 1, r - 1) ** 4
        * math.factorial(2 * f.d - 2 * r)
        * norms[r] ** 2
        for r in range(1, f.d)
    )
    return math.sqrt(f.d ** 2 * acc), EXACT if exact else UPPER_BOUND


def t2(f: SymmetricKernel, fourth_moment: float) -> float:
    """Fourth-moment statistic sqrt(((d-1)/(3d)) |E F^4 - 3|); >= t1 when the
    fourth moment is the exact Gaussian-input value."""
    if f.d < 2:
        raise ParameterOutOfRange(f"t2 needs d >= 2, got d={f.d}")
    _require_unit(f)
    return math.sqrt((f.d - 1) / (3.0 * f.d) * abs(fourth_moment - 3.0))


def invariance_bound(f: SymmetricKernel, beta3: float, b3: float) -> float:
    """Distance between input laws: b3 * (30 beta3)^d * d! * sqrt(max influence),
    with beta3 >= sup E|X_i|^3."""
    if beta3 < 1.0 or b3 < 0.0:
        raise ParameterOutOfRange(f"need beta3 >= 1 and b3 >= 0, got {beta3}, {b3}")
    _check_order(f.d)
    return (
        b3
        * (30.0 * beta3) ** f.d
        * math.factorial(f.d)
        * math.sqrt(contractions.max_influence(f))
    )


def _influence_term_normal(d: int, alpha: float, max_inf: float) -> float:
    return (
        4.0
        * math.sqrt(2.0)
        * 144.0 ** (d - 0.5)
        * alpha ** (d / 2.0)
        * math.sqrt(d)
        * math.factorial(d)
        * max_inf ** 0.25
    )


def normal_smooth_bound(
    f: SymmetricKernel,
    profile: MomentProfile,
    budget: TestFunctionBudget,
    eq4x: float,
    eq4x_exactness: str = EXACT,
    eq4x_se: float | None = None,
) -> BoundReport:
    """Smooth-test distance to the standard normal for unit-variance kernels:

        invariance + c_star * sqrt((d-1)/(3d)) * (moment_term + influence_term)

    with invariance = b3 (30 beta4)^d d! sqrt(max Inf), moment_term =
    sqrt(|E Q^4 - 3|), and the influence_term carrying the alpha^{d/2}
    (max Inf)^{1/4} correction.  eq4x is supplied by the caller (exact
    enumeration, the Gaussian contraction identity, or Monte Carlo with a
    standard error).
    """
    _check_order(f.d)
    _require_unit(f)
    max_inf = contractions.max_influence(f)
    inv = budget.b3 * (30.0 * profile.beta4) ** f.d * math.factorial(f.d) * math.sqrt(max_inf)
    cstar = c_star(budget, f.d)
    moment_term = math.sqrt(abs(eq4x - 3.0))
    influence_term = _influence_term_normal(f.d, profile.alpha, max_inf)
    components = {
        "d": float(f.d),
        "c_star": cstar,
        "invariance": inv,
        "moment_term": moment_term,
        "influence_term": influence_term,
        "eq4x": eq4x,
        "max_influence": max_inf,
    }
    report = BoundReport(
        kind="normal",
        components=components,
        exactness={"eq4x": eq4x_exactness},
        mc_standard_error=eq4x_se,
    )
    report.total = report.recompute_total()
    return report


def wasserstein_bound(
    f: SymmetricKernel,
    profile: MomentProfile,
    eq4x: float,
    eq4x_exactness: str = EXACT,
    eq4x_se: float | None = None,
) -> BoundReport:
    """Wasserstein distance to the standard normal: 4 (B1 + B2)^{1/3},
    valid only when B1 + B2 <= 3/(4 sqrt(2)); otherwise the report is
    marked inapplicable and carries no number."""
    _check_order(f.d)
    _require_unit(f)
    max_inf = contractions.max_influence(f)
    b1 = 2.0 * (30.0 * profile.beta4) ** f.d * math.factorial(f.d) * math.sqrt(max_inf)
    factor = math.sqrt((f.d - 1) / (3.0 * f.d)) if f.d > 1 else 0.0
    b2 = (
        12.0
        * math.sqrt(2.0)
        * (1.0 + 5.0 ** (1.5 * f.d))
        * factor
        * (math.sqrt(abs(eq4x - 3.0)) + _influence_term_normal(f.d, profile.alpha, max_inf))
    )
    threshold = 3.0 / (4.0 * math.sqrt(2.0))
    applicable = b1 + b2 <= threshold
    report = BoundReport(
        kind="wasserstein",
        components={"d": float(f.d), "b1": b1, "b2": b2, "threshold": threshold},
        exactness={"eq4x": eq4x_exactness},
        applicable=applicable,
        mc_standard_error=eq4x_se,
    )
    report.total = report.recompute_total()
    return report


# ---------------------------------------------------------------------------
# Chi-square approximation
# ---------------------------------------------------------------------------

def _check_chi2_preconditions(f: SymmetricKernel, nu: int) -> None:
    if int(nu) != nu or nu < 1:
        raise InvalidDegrees(f"degrees of freedom must be a positive integer, got {nu}")
    if f.d % 2 != 0:
        raise OddOrder(f"chi-square approximation needs even order, got d={f.d}")
    got = kernels.second_moment(f)
    if abs(got - 2.0 * nu) > 1e-9 * 2.0 * nu:
        raise NotNormalizedToTwoNu(f"kernel second moment is {got!r}, expected {2.0 * nu!r}")


def t3(f: SymmetricKernel, nu: int, cap: int = DEFAULT_MATERIALIZATION_CAP) -> tuple:
    """Chi-square contraction statistic for a kernel with E[Q^2] = 2 nu:

        [ 4 d! || f - (1/c_d) sym(f *_{d/2} f) ||_d^2
          + d^2 sum_{r != d/2} (r-1)!^2 C(d-1,r-1)^4 (2d-2r)!
                || sym(f *_r f) ||^2 ]^{1/2}

    with c_d = 4 ((d/2)!)^3 / (d!)^2.  Returns (value, exactness); the
    critical d/2 term always requires materialization.
    """
    _check_order(f.d)
    _check_chi2_preconditions(f, nu)
    c_d = contractions.chi_square_match_constant(f.d)
    defect = contractions.chi_square_defect(f, cap)
    first = 4.0 * math.factorial(f.d) * (defect / c_d) ** 2
    off_ranks = [r for r in range(1, f.d) if r != f.d // 2]
    norms, exact = _symmetrized_norms(f, off_ranks, cap)
    rest = f.d ** 2 * sum(
        math.factorial(r - 1) ** 2
        * math.comb(f.d - 1, r - 1) ** 4
        * math.factorial(2 * f.d - 2 * r)
        * norms[r] ** 2
        for r in off_ranks
    )
    return math.sqrt(first + rest), EXACT if exact else UPPER_BOUND


def t4(eq3: float, eq4: float, nu: int, d: int) -> float:
    """Chi-square moment statistic
    sqrt(((d-1)/(3d)) |E F^4 - 12 E F^3 - 12 nu^2 + 48 nu|); >= t3 with
    exact Gaussian-input moments."""
    if int(nu) != nu or nu < 1:
        raise InvalidDegrees(f"degrees of freedom must be a positive integer, got {nu}")
    if d % 2 != 0 or d < 2:
        raise OddOrder(f"t4 needs even order >= 2, got d={d}")
    return math.sqrt((d - 1) / (3.0 * d) * abs(eq4 - 12.0 * eq3 - 12.0 * nu ** 2 + 48.0 * nu))


def chi2_prefactor(nu: int) -> float:
    return max(math.sqrt(2.0 * math.pi / nu), 1.0 / nu + 2.0 / nu ** 2)


def chi_square_smooth_bound(
    f: SymmetricKernel,
    profile: MomentProfile,
    budget: TestFunctionBudget,
    nu: int,
    eq3x: float,
    eq4x: float,
    moments_exactness: str = EXACT,
    moments_se: float | None = None,
) -> BoundReport:
    """Smooth-test distance to the centered chi-square (nu degrees) for
    kernels with E[Q^2] = 2 nu; the test function additionally satisfies
    sup|phi| <= 1 and sup|phi'| <= 1 (recorded, not enforced here):

        invariance
        + max(sqrt(2 pi/nu), 1/nu + 2/nu^2) * sqrt((d-1)/(3d))
          * (moment_term + influence_term).
    """
    _check_order(f.d)
    _check_chi2_preconditions(f, nu)
    max_inf = contractions.max_influence(f)
    inv = budget.b3 * (30.0 * profile.beta4) ** f.d * math.factorial(f.d) * math.sqrt(max_inf)
    moment_term = math.sqrt(abs(eq4x - 12.0 * eq3x - 12.0 * nu ** 2 + 48.0 * nu))
    influence_term = (
        4.0
        * math.sqrt(f.d)
        * math.factorial(f.d)
        * (
            math.sqrt(2.0) * 144.0 ** (f.d - 0.5) * profile.alpha ** (f.d / 2.0)
            + math.sqrt(nu)
            * (2.0 * math.sqrt(2.0)) ** (3.0 * (2 * f.d - 1) / 2.0)
            * profile.alpha ** (1.5 * f.d)
        )
        * max_inf ** 0.25
    )
    components = {
        "d": float(f.d),
        "nu": float(nu),
        "prefactor": chi2_prefactor(nu),
        "invariance": inv,
        "moment_term": moment_term,
        "influence_term": influence_term,
        "eq3x": eq3x,
        "eq4x": eq4x,
        "max_influence": max_inf,
    }
    report = BoundReport(
        kind="chi2",
        components=components,
        exactness={"moments": moments_exactness},
        mc_standard_error=moments_se,
    )
    report.total = report.recompute_total()
    return report


# ---------------------------------------------------------------------------
# Multivariate bounds
# ---------------------------------------------------------------------------

def delta_ij(f_i: SymmetricKernel, f_j: SymmetricKernel) -> float:
    """Pairwise contraction statistic for vectors of unit-variance sums
    (requires d_i <= d_j):

        (d_j/sqrt(2)) sum_{r=1}^{d_i-1} (r-1)! C(d_i-1,r-1) C(d_j-1,r-1)
            sqrt((d_i+d_j-2r)!) (||f_i *_{d_i-r} f_i||_{2r}
                                 + ||f_j *_{d_j-r} f_j||_{2r})
        + [d_i < d_j] sqrt(d_j! C(d_j,d_i) ||f_j *_{d_j-d_i} f_j||_{2 d_i}).
    """
    if f_i.d > f_j.d:
        raise OrderMismatch(f"need d_i <= d_j, got d_i={f_i.d}, d_j={f_j.d}")
    _check_order(f_j.d)
    _require_unit(f_i)
    _require_unit(f_j)
    di, dj = f_i.d, f_j.d
    acc = 0.0
    for r in range(1, di):
        acc += (
            math.factorial(r - 1)
            * math.comb(di - 1, r - 1)
            * math.comb(dj - 1, r - 1)
            * math.sqrt(math.factorial(di + dj - 2 * r))
            * (
                contractions.contraction_norm(f_i, di - r)
                + contractions.contraction_norm(f_j, dj - r)
            )
        )
    total = dj / math.sqrt(2.0) * acc
    if di < dj:
        total += math.sqrt(
            math.factorial(dj)
            * math.comb(dj, di)
            * contractions.contraction_norm(f_j, dj - di)
        )
    return total


def delta_matrix(kernel_list) -> np.ndarray:
    m = len(kernel_list)
    delta = np.zeros((m, m))
    for i in range(m):
        for j in range(i, m):
            a, b = kernel_list[i], kernel_list[j]
            if a.d > b.d:
                a, b = b, a
            delta[i, j] = delta[j, i] = delta_ij(a, b)
    return delta


def _joint_influence_stats(kernel_list) -> tuple:
    """(C, max-max influence) with C = sum_i max_j Inf_i(f_j)."""
    n_max = max(f.N for f in kernel_list)
    stacked = np.zeros((len(kernel_list), n_max))
    for j, f in enumerate(kernel_list):
        stacked[j, : f.N] = contractions.influence_profile(f).values
    per_index_max = stacked.max(axis=0)
    return float(per_index_max.sum()), float(per_index_max.max())


def multivariate_smooth_bound(
    kernel_list, profile: MomentProfile, budget: TestFunctionBudget
) -> BoundReport:
    """Smooth-test distance between a vector of unit-variance sums and the
    Gaussian vector with the matching covariance:

        b2m * (sum_i Delta_ii + 2 sum_{i<j} Delta_ij)
        + C * b3m * (beta3 + sqrt(8/pi))
            * [sum_j (16 sqrt(2) beta3)^{(d_j-1)/3} d_j!]^3
            * sqrt(max_j max_i Inf_i(f_j)),

    with C = sum_i max_j Inf_i(f_j).
    """
    if not kernel_list:
        raise ParameterOutOfRange("need at least one kernel")
    for f in kernel_list:
        _check_order(f.d)
        _require_unit(f)
    delta = delta_matrix(kernel_list)
    delta_total = float(np.trace(delta) + 2.0 * np.triu(delta, k=1).sum())
    c_sum, max_max_inf = _joint_influence_stats(kernel_list)
    cube = sum(
        (16.0 * math.sqrt(2.0) * profile.beta3) ** ((f.d - 1) / 3.0) * math.factorial(f.d)
        for f in kernel_list
    )
    mixing = (
        c_sum
        * (profile.beta3 + math.sqrt(8.0 / math.pi))
        * cube ** 3
        * math.sqrt(max_max_inf)
    )
    components = {
        "m": float(len(kernel_list)),
        "b2m": budget.b2m,
        "b3m": budget.b3m,
        "delta_total": delta_total,
        "c_influence_sum": c_sum,
        "max_max_influence": max_max_inf,
        "mixing_term": mixing,
    }
    report = BoundReport(kind="multivariate", components=components, delta=delta)
    report.total = report.recompute_total()
    return report


def validate_covariance(V: np.ndarray, m: int) -> np.ndarray:
    V = np.asarray(V, dtype=np.float64)
    if V.shape != (m, m):
        raise InvalidCovariance(f"covariance shape {V.shape}, expected ({m}, {m})")
    if not np.allclose(V, V.T, atol=1e-12):
        raise InvalidCovariance("covariance must be symmetric")
    eigvals = np.linalg.eigvalsh(V)
    if eigvals.min() < -1e-9 * max(1.0, eigvals.max()):
        raise InvalidCovariance(f"covariance must be nonnegative, eigenvalues {eigvals}")
    return V


def rank_data_from_covariance(V: np.ndarray) -> tuple:
    """(k, eigenvalues, column-orthonormal B, b) for V = B diag(lam) B^T;
    b is the largest magnitude entry of lam^{-1/2} B^T."""
    eigvals, vecs = np.linalg.eigh(V)
    tol = 1e-10 * max(1.0, float(eigvals.max()))
    keep = eigvals > tol
    lam = eigvals[keep]
    B = vecs[:, keep]
    b = float(np.abs(B.T / np.sqrt(lam)[:, None]).max())
    return int(keep.sum()), lam, B, b


def convex_sets_bound(
    kernel_list, profile: MomentProfile, V, rank_data=None
) -> BoundReport:
    """Distance over indicators of convex sets (dominates the Kolmogorov
    distance): 8 (b^2 B1 + b^3 B2)^{1/4} m^{3/8}, with b = 1 for identity
    covariance, B1 = (1/2) sum_i Delta_ii + sum_{i<j} Delta_ij, and B2 the
    joint invariance term."""
    if not kernel_list:
        raise ParameterOutOfRange("need at least one kernel")
    m = len(kernel_list)
    V = validate_covariance(V, m)
    for f in kernel_list:
        _check_order(f.d)
        _require_unit(f)
    delta = delta_matrix(kernel_list)
    b1 = float(0.5 * np.trace(delta) + np.triu(delta, k=1).sum())
    c_sum, max_max_inf = _joint_influence_stats(kernel_list)
    cube = sum(
        (16.0 * math.sqrt(2.0) * profile.beta3) ** ((f.d - 1) / 3.0) * math.factorial(f.d)
        for f in kernel_list
    )
    b2 = (
        c_sum
        * (profile.beta3 + math.sqrt(8.0 / math.pi))
        * cube ** 3
        * math.sqrt(max_max_inf)
    )
    if rank_data is None:
        if np.array_equal(V, np.eye(m)):
            rank, b_scale = m, 1.0
        else:
            rank, _, _, b_scale = rank_data_from_covariance(V)
    else:
        rank, _, _, b_scale = rank_data
    components = {
        "m": float(m),
        "b1": b1,
        "b2": b2,
        "b_scale": float(b_scale),
        "rank": float(rank),
    }
    report = BoundReport(kind="convex_sets", components=components, delta=delta)
    report.total = report.recompute_total()
    return report
