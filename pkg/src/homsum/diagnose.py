"""Convergence criteria evaluated on kernel sequences, with empirical
universality experiments.

A sweep runs a named family over increasing sizes, records the criterion
statistics at every point (fourth moment, contraction norms, chi-square
defect, maximal influence, empirical Kolmogorov distances), and reduces
each statistic series to a trend verdict.  Convergence over a finite sweep
is operationalized as: strictly decreasing up to an absolute tolerance,
with the terminal value below a threshold.  Verdicts are pure functions of
the recorded statistics.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import bounds, contractions, kernels, moments, simulate
from .errors import InvalidDegrees, OddOrder, ValidationError
from .kernels import KernelFamilySpec, SymmetricKernel

TREND_TOLERANCE = 1e-9
TERMINAL_THRESHOLD = 0.05

DECREASING = "decreasing"
STAGNANT = "stagnant"


@dataclass(frozen=True)
class SequenceSpec:
    """A family swept over strictly increasing sizes, with the laws and
    sampling configuration used for the empirical statistics."""

    family: str
    d: int
    sweep: tuple
    target: str = "normal"  # "normal" | "chi2"
    nu: int = 1
    laws: tuple = ("gaussian",)
    n: int = 10_000
    seed: int = 0
    workers: int = 1
    batch_size: int = 1024
    tolerance: float = TREND_TOLERANCE
    threshold: float = TERMINAL_THRESHOLD

    def __post_init__(self):
        object.__setattr__(self, "sweep", tuple(int(s) for s in self.sweep))
        object.__setattr__(self, "laws", tuple(self.laws))
        if any(b <= a for a, b in zip(self.sweep, self.sweep[1:])) or not self.sweep:
            raise ValidationError(f"sweep must be nonempty strictly increasing, got {self.sweep}")
        if self.target not in ("normal", "chi2"):
            raise ValidationError(f"target must be 'normal' or 'chi2', got {self.target!r}")
        if self.target == "chi2" and (int(self.nu) != self.nu or self.nu < 1):
            raise InvalidDegrees(f"chi2 target needs integer nu >= 1, got {self.nu}")

    def kernel_at(self, size: int) -> SymmetricKernel:
        sigma2 = 2.0 * self.nu if self.target == "chi2" else 1.0
        return kernels.generate_family(
            KernelFamilySpec(family=self.family, d=self.d, size=size, sigma2=sigma2, seed=self.seed)
        )

    def sample_config(self, point_index: int, law_index: int = 0) -> simulate.SampleConfig:
        # distinct deterministic master seed per (point, law) cell
        offset = 1 + point_index * 16 + law_index
        return simulate.SampleConfig(
            n=self.n, seed=self.seed + 7919 * offset, workers=self.workers,
            batch_size=self.batch_size,
        )


@dataclass
class VerdictReport:
    """Per-point statistics with trend verdicts.

    `trends` maps each tracked statistic to decreasing/stagnant; `verdict`
    is the conjunction over `statistics_used` (None for a single-point
    sweep, where no trend exists).
    """

    kind: str
    points: list
    trends: dict = field(default_factory=dict)
    verdict: bool | None = None
    tolerance: float = TREND_TOLERANCE
    threshold: float = TERMINAL_THRESHOLD
    statistics_used: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def series(self, name: str) -> list:
        return [p[name] for p in self.points]


def trend_of(series, tolerance: float = TREND_TOLERANCE) -> str:
    """Noise-tolerant strict decrease: every step may rise by at most the
    tolerance and the last value sits below the first by more than it."""
    if all(b < a + tolerance for a, b in zip(series, series[1:])) and (
        series[-1] < series[0] - tolerance
    ):
        return DECREASING
    return STAGNANT


def assess(points, statistic_names, tolerance=TREND_TOLERANCE, threshold=TERMINAL_THRESHOLD):
    """(trends, verdict): every named statistic must be decreasing and end
    below the threshold; a single point yields no verdict."""
    trends = {}
    if len(points) < 2:
        return trends, None
    verdict = True
    for name in statistic_names:
        series = [p[name] for p in points]
        trends[name] = trend_of(series, tolerance)
        verdict = verdict and trends[name] == DECREASING and series[-1] < threshold
    return trends, verdict


def _norm_stats(f: SymmetricKernel) -> dict:
    stats = {"max_influence": contractions.max_influence(f)}
    for r, norm in contractions.all_contraction_norms(f).items():
        stats[f"contraction_norm_r{r}"] = norm
    return stats


def fourth_moment_diagnostic(spec: SequenceSpec) -> VerdictReport:
    """Normal-target criterion statistics along the sweep: fourth-moment gap
    |E Q^4 - 3| under Gaussian inputs (exact), every contraction norm, and
    the maximal influence; positive verdict iff all of them decrease to
    below the threshold."""
    points = []
    for size in spec.sweep:
        f = kernels.normalize_to_variance(spec.kernel_at(size), 1.0)
        stats = {"size": float(size)}
        stats.update(_norm_stats(f))
        stats["fourth_moment_gap"] = abs(moments.gaussian_fourth_moment(f) - 3.0)
        points.append(stats)
    tracked = [k for k in points[0] if k != "size"]
    trends, verdict = assess(points, tracked, spec.tolerance, spec.threshold)
    return VerdictReport(
        kind="fourth_moment", points=points, trends=trends, verdict=verdict,
        tolerance=spec.tolerance, threshold=spec.threshold, statistics_used=tracked,
    )


def chi_square_diagnostic(spec: SequenceSpec, nu: int | None = None) -> VerdictReport:
    """Chi-square-target criterion statistics: the defect
    ||sym(f *_{d/2} f) - c_d f||_d and the off-critical contraction norms,
    for kernels normalized to E[Q^2] = 2 nu."""
    nu = spec.nu if nu is None else nu
    if int(nu) != nu or nu < 1:
        raise InvalidDegrees(f"need integer nu >= 1, got {nu}")
    if spec.d % 2 != 0:
        raise OddOrder(f"chi-square diagnostic needs even order, got d={spec.d}")
    points = []
    for size in spec.sweep:
        f = kernels.normalize_to_variance(spec.kernel_at(size), 2.0 * nu)
        stats = {"size": float(size), "chi_square_defect": contractions.chi_square_defect(f)}
        for r in range(1, f.d):
            if r != f.d // 2:
                stats[f"contraction_norm_r{r}"] = contractions.contraction_norm(f, r)
        points.append(stats)
    tracked = [k for k in points[0] if k != "size"]
    trends, verdict = assess(points, tracked, spec.tolerance, spec.threshold)
    return VerdictReport(
        kind="chi_square", points=points, trends=trends, verdict=verdict,
        tolerance=spec.tolerance, threshold=spec.threshold, statistics_used=tracked,
    )


def de_jong_report(
    f: SymmetricKernel,
    dist: simulate.DistributionSpec,
    config: simulate.SampleConfig,
    budget: bounds.TestFunctionBudget | None = None,
) -> VerdictReport:
    """Assumption statistics of the two-condition normality criterion for one
    unit-variance kernel: the fourth moment under `dist` (exact where an
    oracle applies, Monte Carlo otherwise), the maximal influence, the
    empirical Kolmogorov distance to the standard normal, and the assembled
    smooth-test bound."""
    f = kernels.normalize_to_variance(f, 1.0)
    budget = budget or bounds.TestFunctionBudget(b3=1.0)
    summary = simulate.sample_sums(f, dist, config)
    if dist.tag == "rademacher" and f.N <= moments.ENUMERATION_MAX_N:
        eq4, eq4_exact, eq4_se = (
            moments.exact_rademacher_distribution(f).moment(4), bounds.EXACT, None,
        )
    elif dist.tag == "gaussian":
        eq4, eq4_exact, eq4_se = moments.gaussian_fourth_moment(f), bounds.EXACT, None
    else:
        eq4, eq4_exact, eq4_se = summary.moment(4), bounds.MONTE_CARLO, summary.standard_error(4)
    max_inf = contractions.max_influence(f)
    report = bounds.normal_smooth_bound(
        f, simulate.law_moment_profile(dist), budget, eq4, eq4_exact, eq4_se
    )
    stats = {
        "fourth_moment_gap": abs(eq4 - 3.0),
        "fourth_moment_empirical": summary.moment(4),
        "fourth_moment_empirical_se": summary.standard_error(4),
        "max_influence": max_inf,
        "ks_normal": simulate.ks_normal(summary),
        "smooth_bound_total": report.total,
    }
    if eq4_se is not None:
        stats["fourth_moment_se"] = eq4_se
    notes = []
    if max_inf >= TERMINAL_THRESHOLD:
        notes.append(f"influence assumption fails: max influence {max_inf!r} >= {TERMINAL_THRESHOLD}")
    # a sampled moment only fails the check beyond its statistical error
    gap_allowance = TERMINAL_THRESHOLD + (5.0 * eq4_se if eq4_se is not None else 0.0)
    if abs(eq4 - 3.0) >= gap_allowance:
        notes.append(f"fourth-moment assumption fails: |E Q^4 - 3| = {abs(eq4 - 3.0)!r}")
    return VerdictReport(
        kind="de_jong",
        points=[stats],
        verdict=not notes,
        statistics_used=["fourth_moment_gap", "max_influence"],
        notes=notes,
    )


def universality_experiment(spec: SequenceSpec) -> VerdictReport:
    """Empirical universality check: for every listed law, the Kolmogorov
    distance to the target must decrease along the sweep, and the terminal
    distances must agree across laws within 3x the DKW band.  Needs at
    least two laws to compare."""
    if len(spec.laws) < 2:
        raise ValidationError("universality experiment needs at least two laws")
    laws = [simulate.get_law(name) for name in spec.laws]
    points = []
    for pi, size in enumerate(spec.sweep):
        f = spec.kernel_at(size)
        stats = {"size": float(size)}
        for li, law in enumerate(laws):
            summary = simulate.sample_sums(f, law, spec.sample_config(pi, li))
            if spec.target == "chi2":
                stats[f"ks_{law.name}"] = simulate.ks_chi2(summary, spec.nu)
            else:
                stats[f"ks_{law.name}"] = simulate.ks_normal(summary)
        points.append(stats)
    tracked = [f"ks_{law.name}" for law in laws]
    trends = (
        {name: trend_of([p[name] for p in points], spec.tolerance) for name in tracked}
        if len(points) > 1
        else {}
    )
    band = simulate.dkw_epsilon(spec.n)
    terminal = [points[-1][name] for name in tracked]
    agree = max(terminal) - min(terminal) <= 3.0 * band
    verdict = None
    if len(points) > 1:
        verdict = agree and all(trends[name] == DECREASING for name in tracked)
    notes = [f"terminal spread {max(terminal) - min(terminal)!r} vs 3*DKW band {3.0 * band!r}"]
    return VerdictReport(
        kind="universality", points=points, trends=trends, verdict=verdict,
        tolerance=spec.tolerance, threshold=spec.threshold, statistics_used=tracked, notes=notes,
    )


def multivariate_diagnostic(
    kernels_by_point,
    V: np.ndarray,
    config: simulate.SampleConfig,
    dist: simulate.DistributionSpec | None = None,
) -> VerdictReport:
    """Joint convergence statistics for a sweep of kernel vectors: cross
    moments against the target covariance, contraction norms, the pairwise
    statistic matrix, and a joint empirical two-sample distance to a
    Gaussian vector with covariance V."""
    V = np.asarray(V, dtype=np.float64)
    m = len(kernels_by_point[0])
    bounds.validate_covariance(V, m)
    dist = dist or simulate.get_law("gaussian")
    points = []
    for pi, kernel_list in enumerate(kernels_by_point):
        if len(kernel_list) != m:
            raise ValidationError("every sweep point must supply the same number of kernels")
        cross = np.array(
            [
                [moments.gaussian_cross_moment(a, b) for b in kernel_list]
                for a in kernel_list
            ]
        )
        delta = bounds.delta_matrix(kernel_list)
        cfg = simulate.SampleConfig(
            n=config.n, seed=config.seed + 7919 * (pi + 1), workers=config.workers,
            batch_size=config.batch_size,
        )
        joint = simulate.sample_vector_sums(kernel_list, dist, cfg)
        reference = simulate.gaussian_vector_sample(V, cfg)
        stats = {
            "size": float(max(f.N for f in kernel_list)),
            "covariance_residual": float(np.abs(cross - V).max()),
            "max_delta": float(delta.max()),
            "max_contraction_norm": max(
                (norm for f in kernel_list for norm in contractions.all_contraction_norms(f).values()),
                default=0.0,
            ),
            "joint_ks": simulate.ks_joint_two_sample(joint.samples, reference),
        }
        points.append(stats)
    tracked = ["max_delta", "max_contraction_norm"]
    trends, verdict = assess(points, tracked)
    residual_ok = all(p["covariance_residual"] < TERMINAL_THRESHOLD for p in points)
    if verdict is not None:
        verdict = verdict and residual_ok
    notes = [] if residual_ok else ["covariance residual exceeds threshold"]
    return VerdictReport(
        kind="multivariate", points=points, trends=trends, verdict=verdict,
        statistics_used=tracked + ["covariance_residual"], notes=notes,
    )
