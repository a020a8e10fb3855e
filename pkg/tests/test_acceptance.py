"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Two clauses are mathematically unattainable as stated and are marked as
strict expected failures with the analysis that certifies it (see also
tests/oracles.py and the companion evidence test):

* criterion 6, defect bracket at N = 10: the defect of the order-2
  constant kernel is exactly 1.1162 * N^{-1/2} there (closed form,
  cross-checked against the materialized tensor), outside [0.9, 1.1].
  The bracket holds from N = 50 on.
* criterion 6, Kolmogorov distance at N = 250: the true distance between
  the law of the sum and the centered chi-square is ~ 0.085 (the exact
  spectral decomposition gives Q = c(N-1) Z^2 - c W, whose distance to
  chi-square(1) - 1 decays like N^{-1/4} because of the density
  singularity at the left endpoint), so no sample of it can sit at 0.03.
"""

import math
import time

import numpy as np
import pytest

from homsum import bounds, cli, contractions, kernels, moments, reportio, simulate
from conftest import random_kernels
from oracles import (
    constant_kernel_q_cdf,
    ks_constant_kernel_vs_centered_chi2,
    ks_product_normal_vs_standard_normal,
)

WORKERS = 2


def report(number, ok, detail):
    print(f"ACCEPTANCE {number}: {'PASS' if ok else 'FAIL'} - {detail}")


def test_criterion_01_contraction_engine():
    start = time.time()
    rng = np.random.default_rng(20_240_001)
    checked = 0
    worst = 0.0
    for f in random_kernels(rng, 1000, d_range=(1, 4), n_max=8):
        for r in range(1, f.d):
            gram = contractions.contraction_norm(f, r)
            mat = contractions.contract(f, r).frobenius_norm()
            rel = abs(gram - mat) / max(mat, 1e-300)
            worst = max(worst, rel)
            checked += 1
    elapsed = time.time() - start
    report(1, worst <= 1e-12 and elapsed < 30,
           f"{checked} norm pairs on 1000 kernels, worst rel err {worst:.2e}, {elapsed:.1f}s")
    assert worst <= 1e-12
    assert elapsed < 30


def test_criterion_02_closed_form_fixtures():
    start = time.time()
    p2 = kernels.single_pair()
    t1_value, t1_flag = bounds.t1(p2)
    t2_value = bounds.t2(p2, moments.gaussian_fourth_moment(p2))
    assert abs(t1_value - 1.0) <= 1e-9 and abs(t2_value - 1.0) <= 1e-9
    assert t1_flag == bounds.EXACT

    for m in (1, 10, 100, 10_000):
        f = kernels.disjoint_pairs(m)
        assert contractions.max_influence(f) == pytest.approx(1 / (4 * m), rel=1e-12)
        assert contractions.contraction_norm(f, 1) == pytest.approx(
            (8 * m) ** -0.5, rel=1e-12
        )
        assert moments.gaussian_fourth_moment(f) == pytest.approx(3 + 6 / m, rel=1e-12)

    # Monte Carlo cross-check of the contraction identity, 10^6 draws
    f = kernels.disjoint_pairs(10)
    s = simulate.sample_sums(
        f, simulate.get_law("gaussian"),
        simulate.SampleConfig(n=1_000_000, seed=202, workers=WORKERS),
    )
    gap = abs(s.moment(4) - (3 + 6 / 10))
    assert gap <= 5 * s.standard_error(4)
    elapsed = time.time() - start
    report(2, elapsed < 60,
           f"P2 t1=t2=1; D(m) closed forms exact; MC gap {gap:.4f} <= 5se "
           f"({5 * s.standard_error(4):.4f}), {elapsed:.1f}s")
    assert elapsed < 60


def test_criterion_03_inequality_suites():
    rng = np.random.default_rng(20_240_003)
    violations = 0
    for f in random_kernels(rng, 500, d_range=(2, 3), n_max=8, sigma2=1.0):
        v1, _ = bounds.t1(f)
        v2 = bounds.t2(f, moments.gaussian_fourth_moment(f))
        if v1 > v2 * (1 + 1e-10) + 1e-12:
            violations += 1
        lhs, rhs = contractions.crux_gap(f)
        if lhs < rhs - 1e-12 * max(1.0, lhs):
            violations += 1
    for trial in range(150):
        d = 2 if trial % 3 else 4
        nu = int(rng.integers(1, 4))
        f = random_kernels(rng, 1, d_range=(d, d), n_max=7, sigma2=2.0 * nu)[0]
        comb = moments.gaussian_chi_square_combination(f, nu)
        v3, _ = bounds.t3(f, nu)
        v4 = math.sqrt((d - 1) / (3 * d) * abs(comb - 12 * nu ** 2 + 48 * nu))
        if v3 > v4 * (1 + 1e-10) + 1e-12:
            violations += 1
    report(3, violations == 0,
           f"t1<=t2 (500 kernels), t3<=t4 (150 even-order), crux chain: {violations} violations")
    assert violations == 0


def test_criterion_04_oracle_equivalence():
    rng = np.random.default_rng(20_240_004)
    suite = random_kernels(rng, 120, d_range=(1, 3), n_max=12)
    suite += [kernels.single_pair(), kernels.constant_kernel(8), kernels.disjoint_pairs(6),
              kernels.walsh_kernel(2, 12), kernels.walsh_kernel(3, 10)]
    worst = 0.0
    for f in suite:
        enum = moments.exact_rademacher_distribution(f).moment(2)
        exact = math.factorial(f.d) * kernels.squared_norm(f)
        gauss = moments.gaussian_second_moment(f)
        scale = max(exact, 1e-12)
        worst = max(worst, abs(enum - exact) / scale, abs(enum - gauss) / scale)
    report(4, worst <= 1e-12,
           f"{len(suite)} kernels with N <= 12: enumeration vs closed form, worst rel {worst:.2e}")
    assert worst <= 1e-12


def test_criterion_05_universality_at_desk_scale():
    start = time.time()
    laws = ("gaussian", "rademacher", "uniform")
    sweep = (100, 1000, 10_000)
    n = 100_000
    ks = {law: [] for law in laws}
    for pi, m in enumerate(sweep):
        f = kernels.disjoint_pairs(m)
        for li, law in enumerate(laws):
            cfg = simulate.SampleConfig(
                n=n, seed=500 + 16 * pi + li, workers=WORKERS, batch_size=512
            )
            s = simulate.sample_sums(f, simulate.get_law(law), cfg)
            ks[law].append(simulate.ks_normal(s))
    band = simulate.dkw_epsilon(n)
    # decrease is asserted up to the sampling band once the true distance
    # sits below the noise floor; the lattice law stays above it, so there
    # the decrease must be strict (see decisions ledger)
    ok = True
    for law in laws:
        series = ks[law]
        ok = ok and all(b <= a + band for a, b in zip(series, series[1:]))
        ok = ok and series[-1] <= 0.02
    ok = ok and ks["rademacher"][0] > ks["rademacher"][1] > ks["rademacher"][2]
    elapsed = time.time() - start
    detail = "; ".join(f"{law}: " + "->".join(f"{v:.4f}" for v in ks[law]) for law in laws)
    report(5, ok and elapsed < 300, f"{detail}; {elapsed:.0f}s")
    for law in laws:
        series = ks[law]
        for a, b in zip(series, series[1:]):
            assert b <= a + band, (law, series)
        assert series[-1] <= 0.02, (law, series)
    assert ks["rademacher"][0] > ks["rademacher"][1] > ks["rademacher"][2]
    assert elapsed < 300


@pytest.mark.xfail(
    strict=True,
    reason="spec defect: the defect of CONST2(10) is exactly "
    "1.1162 * 10^{-1/2} (closed form, materialized-tensor oracle), outside "
    "[0.9, 1.1]; the bracket holds for N >= 50 (see companion evidence test "
    "and the decisions ledger)",
)
def test_criterion_06_defect_bracket_as_stated():
    ratios = {}
    for N in (10, 50, 250):
        f = kernels.constant_kernel(N, sigma2=2.0)
        ratios[N] = contractions.chi_square_defect(f) * math.sqrt(N)
    report(6, False,
           "defect bracket [0.9,1.1]*N^{-1/2} on {10,50,250}: ratios "
           + ", ".join(f"N={N}: {r:.4f}" for N, r in ratios.items())
           + " (expected FAIL at N=10; exact value outside the bracket)")
    for N, ratio in ratios.items():
        assert 0.9 <= ratio <= 1.1, (N, ratio)


@pytest.mark.xfail(
    strict=True,
    reason="spec defect: the true Kolmogorov distance between the CONST2(250) "
    "sum under Gaussian inputs and the centered chi-square(1) is ~0.085 "
    "(spectral quadrature oracle; N^{-1/4} rate from the left-endpoint "
    "density singularity), so KS <= 0.03 cannot hold at N=250",
)
def test_criterion_06_chi2_ks_as_stated():
    f = kernels.constant_kernel(250, sigma2=2.0)
    cfg = simulate.SampleConfig(n=100_000, seed=600, workers=WORKERS, batch_size=512)
    s = simulate.sample_sums(f, simulate.get_law("gaussian"), cfg)
    ks = simulate.ks_chi2(s, 1)
    report(6, False,
           f"KS to centered chi2(1) at N=250, n=1e5: {ks:.4f} vs required 0.03 "
           "(expected FAIL; true distance ~0.085 certified by oracle)")
    assert ks <= 0.03


def test_criterion_06_supporting_evidence():
    """The attainable parts of criterion 6, plus the oracle certificates for
    the two expected failures."""
    start = time.time()
    # defect rate: decreasing over the stated sweep, bracket holds from 50 on
    defects = {}
    for N in (10, 50, 100, 200, 250):
        defects[N] = contractions.chi_square_defect(kernels.constant_kernel(N, sigma2=2.0))
    assert defects[10] > defects[50] > defects[250]
    for N in (50, 100, 200, 250):
        assert 0.9 <= defects[N] * math.sqrt(N) <= 1.1
    assert defects[10] * math.sqrt(10) == pytest.approx(1.1162, abs=2e-4)

    # sampler agrees with the exact spectral law at N=250 within DKW
    f = kernels.constant_kernel(250, sigma2=2.0)
    cfg = simulate.SampleConfig(n=100_000, seed=600, workers=WORKERS, batch_size=512)
    s = simulate.sample_sums(f, simulate.get_law("gaussian"), cfg)
    grid = np.quantile(s.samples, np.linspace(0.02, 0.98, 21))
    emp_err = max(
        abs(float(np.mean(s.samples <= x)) - constant_kernel_q_cdf(float(x), 250))
        for x in grid
    )
    assert emp_err <= simulate.dkw_epsilon(100_000)

    # the true distance is far above the criterion's 0.03
    true_ks = ks_constant_kernel_vs_centered_chi2(250, grid_size=400)
    assert true_ks >= 0.07
    ks = simulate.ks_chi2(s, 1)
    assert abs(ks - true_ks) <= 0.02  # empirical sits near the true distance
    elapsed = time.time() - start
    report(6, elapsed < 180,
           f"evidence: defect ratios ok from N=50, sampler-vs-oracle err {emp_err:.4f} "
           f"<= DKW, true KS {true_ks:.4f} >= 0.07 (so 0.03 unattainable), {elapsed:.0f}s")
    assert elapsed < 180


def test_criterion_07_walsh_non_universality():
    start = time.time()
    # the product-normal oracle certifies the separation before sampling
    true_gap = ks_product_normal_vs_standard_normal(1001)
    assert true_gap >= 0.06
    f = kernels.walsh_kernel(2, 10_000)
    n = 30_000
    rad = simulate.sample_sums(
        f, simulate.get_law("rademacher"),
        simulate.SampleConfig(n=n, seed=700, workers=WORKERS, batch_size=512),
    )
    gau = simulate.sample_sums(
        f, simulate.get_law("gaussian"),
        simulate.SampleConfig(n=n, seed=701, workers=WORKERS, batch_size=512),
    )
    ks_rad = simulate.ks_normal(rad)
    ks_gau = simulate.ks_normal(gau)
    elapsed = time.time() - start
    ok = ks_rad <= 0.02 and ks_gau >= 0.05 and elapsed < 120
    report(7, ok,
           f"W(2,1e4): sign-input KS {ks_rad:.4f} <= 0.02, gaussian-input KS {ks_gau:.4f} "
           f">= 0.05 (oracle distance {true_gap:.4f}), {elapsed:.0f}s")
    assert ks_rad <= 0.02
    assert ks_gau >= 0.05
    assert elapsed < 120


def test_criterion_08_bound_pipeline_regression():
    assert bounds.c_star(bounds.TestFunctionBudget(), 2) == 0.0
    assert bounds.chi2_prefactor(1) == 3.0
    for m in (4, 100, 900):
        f = kernels.disjoint_pairs(m)
        assert abs(bounds.delta_ij(f, f) - math.sqrt(2 / m)) <= 1e-9

    profile = bounds.MomentProfile(beta3=1.0, beta4=1.0)
    budget = bounds.TestFunctionBudget(a=0.2, b=0.3, b3=1.0, b2m=1.0, b3m=1.0)
    d100 = kernels.disjoint_pairs(100)
    c20 = kernels.constant_kernel(20, sigma2=2.0)
    reports = [
        bounds.normal_smooth_bound(d100, profile, budget, eq4x=3.06),
        bounds.chi_square_smooth_bound(c20, profile, budget, 1, 7.9, 59.0),
        bounds.wasserstein_bound(d100, profile, eq4x=3.06),
        bounds.multivariate_smooth_bound([d100, d100], profile, budget),
    ]
    for rep in reports:
        text = reportio.format_sections(
            reportio.REPORT_MAGIC, [("bound", reportio.bound_report_section(rep))]
        )
        [(_, parsed)] = reportio.parse_sections(text, reportio.REPORT_MAGIC)
        rebuilt = bounds.BoundReport(
            kind=rep.kind,
            components={k: parsed[k] for k in rep.components},
            applicable=parsed["applicable"],
        )
        recomputed = rebuilt.recompute_total()
        if math.isnan(recomputed):
            assert math.isnan(parsed["total"])
        else:
            assert recomputed == parsed["total"]
    report(8, True, "c_star(0)=0, prefactor(1)=3, delta=sqrt(2/m), all 4 report "
                    "totals recompute exactly from serialized components")


def test_criterion_09_hypercontractivity():
    family = [
        kernels.single_pair(),
        kernels.constant_kernel(8),
        kernels.disjoint_pairs(5),
        kernels.walsh_kernel(2, 12),
        kernels.walsh_kernel(3, 9),
        kernels.random_sparse_kernel(2, 12, seed=9),
        kernels.random_sparse_kernel(3, 9, seed=10),
    ]
    failures = []
    rad = simulate.get_law("rademacher")
    gau = simulate.get_law("gaussian")
    for f in family:
        m2 = kernels.second_moment(f)
        # exact sign enumeration, q in {3, 4}; sup E|eps|^q = 1
        dist = moments.exact_rademacher_distribution(f)
        for q in (3, 4):
            ok, _ = moments.hypercontractivity_check(dist.abs_moment(q), m2, q, f.d, 1.0)
            if not ok:
                failures.append((f, "rademacher", q))
        # gaussian: exact fourth moment via the contraction identity
        f1 = kernels.normalize_to_variance(f, 1.0)
        ok, _ = moments.hypercontractivity_check(
            moments.gaussian_fourth_moment(f1), 1.0, 4, f.d, gau.moment4
        )
        if not ok:
            failures.append((f, "gaussian", 4))
        # gaussian q=3 by Monte Carlo with 5-SE slack
        s = simulate.sample_sums(f1, gau, simulate.SampleConfig(n=50_000, seed=900, workers=WORKERS))
        abs3 = np.abs(s.samples) ** 3
        est, se = float(abs3.mean()), float(abs3.std(ddof=1)) / math.sqrt(s.n)
        ok, _ = moments.hypercontractivity_check(est - 5 * se, 1.0, 3, f.d, gau.abs_moment3)
        if not ok:
            failures.append((f, "gaussian", 3))
    report(9, not failures,
           f"{len(family)} family kernels x (q=3,4) x (signs exact, gaussian): "
           f"{len(failures)} violations")
    assert not failures


def test_criterion_10_reproducibility(tmp_path):
    kern = tmp_path / "d.kern"
    kernels.write_kernel(kernels.disjoint_pairs(50), kern)
    spec_path = tmp_path / "sweep.txt"
    spec_path.write_text(reportio.format_sections(reportio.DIAGNOSE_MAGIC, [(
        "sequence",
        {"kind": "universality", "family": "disjoint_pairs", "d": 2,
         "sweep": [4, 32], "laws": ["rademacher", "shifted_exponential"],
         "n": 2000, "seed": 5},
    )]))
    manifests = {
        "simulate": ["simulate", "--kernel", str(kern), "--law", "uniform",
                     "--n", "4000", "--seed", "77"],
        "bound-normal": ["bound", "normal", "--kernel", str(kern), "--law", "rademacher",
                         "--n", "4000", "--seed", "78", "--budget", "0,0,1"],
        "diagnose": ["diagnose", "--spec", str(spec_path)],
    }
    all_ok = True
    for name, argv in manifests.items():
        outputs = []
        for w in (1, 4, 8):
            out = tmp_path / f"{name}-{w}.txt"
            code = cli.main(argv + ["--workers", str(w), "--out", str(out)])
            assert code == 0
            outputs.append(out.read_bytes())
        all_ok = all_ok and outputs[0] == outputs[1] == outputs[2]
        assert outputs[0] == outputs[1] == outputs[2], name
    report(10, all_ok, "simulate, bound and diagnose reports byte-identical "
                       "across --workers 1, 4, 8")
