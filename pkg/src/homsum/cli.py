"""Command-line surface: kernel generation and inspection, bound
evaluation, simulation, and diagnostics, each emitting a deterministic
report.

Exit codes: 0 success, 1 usage, 2 validation, 3 capacity.
"""

from __future__ import annotations

import argparse
import sys

from . import bounds, contractions, diagnose, kernels, moments, reportio, simulate
from .errors import CapacityError, HomsumError, ValidationError


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _add_sampling_flags(p, default_n=100_000):
    p.add_argument("--law", default="gaussian")
    p.add_argument("--n", type=int, default=default_n)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--batch", type=int, default=1024)


def build_parser() -> _Parser:
    parser = _Parser(prog="homsum")
    sub = parser.add_subparsers(dest="command", required=True)

    k = sub.add_parser("kernel")
    ksub = k.add_subparsers(dest="action", required=True)
    kg = ksub.add_parser("generate")
    kg.add_argument("--family", required=True, choices=kernels.FAMILY_TAGS)
    kg.add_argument("--d", type=int, default=2)
    kg.add_argument("--m", type=int, help="pair count for disjoint_pairs")
    kg.add_argument("-N", type=int, help="dimension for constant/walsh/random_sparse")
    kg.add_argument("--sigma2", type=float, default=1.0)
    kg.add_argument("--seed", type=int, default=0)
    kg.add_argument("--out", required=True)
    ki = ksub.add_parser("inspect")
    ki.add_argument("--kernel", required=True)
    ki.add_argument("--out")
    kn = ksub.add_parser("normalize")
    kn.add_argument("--kernel", required=True)
    kn.add_argument("--sigma2", type=float, default=1.0)
    kn.add_argument("--out", required=True)

    b = sub.add_parser("bound")
    b.add_argument("kind", choices=("normal", "chi2", "wasserstein", "multi"))
    b.add_argument("--kernel", action="append", required=True)
    b.add_argument("--profile", help="beta3,beta4 (default: from --law)")
    b.add_argument("--budget", default="0,0,1", help="a,b,B3 (multi: b2m,b3m)")
    b.add_argument("--nu", type=int, default=1)
    b.add_argument("--out")
    _add_sampling_flags(b)

    s = sub.add_parser("simulate")
    s.add_argument("--kernel", action="append", required=True)
    s.add_argument("--nu", type=int, help="also report the centered chi-square distance")
    s.add_argument("--dump-samples")
    s.add_argument("--out")
    _add_sampling_flags(s)

    d = sub.add_parser("diagnose")
    d.add_argument("--spec", required=True)
    d.add_argument("--out")
    d.add_argument("--workers", type=int)
    return parser


def _emit(text: str, out_path) -> None:
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _parse_floats(s: str, count: int, what: str):
    parts = [p for p in s.split(",") if p != ""]
    if len(parts) != count:
        raise ValidationError(f"{what} needs {count} comma-separated numbers, got {s!r}")
    return [float(p) for p in parts]


def cmd_kernel(args) -> int:
    if args.action == "generate":
        size = args.m if args.family == "disjoint_pairs" else args.N
        if args.family == "single_pair":
            size = 2
        if size is None:
            raise ValidationError(f"family {args.family} needs --m or -N")
        spec = kernels.KernelFamilySpec(
            family=args.family, d=args.d, size=size, sigma2=args.sigma2, seed=args.seed
        )
        f = kernels.generate_family(spec)
        kernels.write_kernel(f, args.out)
        print(f"wrote {args.out}: d={f.d} N={f.N} entries={f.entry_count}")
        return 0
    if args.action == "normalize":
        f = kernels.normalize_to_variance(kernels.read_kernel(args.kernel), args.sigma2)
        kernels.write_kernel(f, args.out)
        print(f"wrote {args.out}: second moment {kernels.second_moment(f)!r}")
        return 0
    f = kernels.read_kernel(args.kernel)
    prof = contractions.influence_profile(f)
    manifest = reportio.RunManifest("kernel-inspect", {"kernel": args.kernel})
    section = {
        "d": f.d,
        "N": f.N,
        "entries": f.entry_count,
        "squared_norm": kernels.squared_norm(f),
        "second_moment": kernels.second_moment(f),
        "max_influence": prof.max_influence,
        "min_influence": float(prof.values.min()) if f.N else 0.0,
        "influence_sum": prof.total,
    }
    text = reportio.format_sections(
        reportio.REPORT_MAGIC, [("manifest", manifest.to_section()), ("kernel", section)]
    )
    _emit(text, args.out)
    return 0


def _estimate_moments(f, law, config, need_third):
    """(eq3, eq4, exactness, se) under the requested input law; exact where
    an oracle applies, Monte Carlo otherwise."""
    if law.tag == "rademacher" and f.N <= moments.ENUMERATION_MAX_N:
        dist = moments.exact_rademacher_distribution(f)
        return dist.moment(3), dist.moment(4), bounds.EXACT, None
    if law.tag == "gaussian" and not need_third:
        return float("nan"), moments.gaussian_fourth_moment(f), bounds.EXACT, None
    summary = simulate.sample_sums(f, law, config)
    return summary.moment(3), summary.moment(4), bounds.MONTE_CARLO, summary.standard_error(4)


def _attach_statistics(report, f, kind, nu) -> None:
    """Add the contraction/moment statistics (and the total-variation bound
    2*t1) to a univariate bound report when they are computable."""
    try:
        if kind in ("normal", "wasserstein") and f.d >= 2:
            value, flag = bounds.t1(f)
            report.components["t1"] = value
            report.components["tv_bound"] = 2.0 * value
            report.exactness["t1"] = flag
            report.components["t2"] = bounds.t2(f, moments.gaussian_fourth_moment(f))
        elif kind == "chi2":
            value, flag = bounds.t3(f, nu)
            report.components["t3"] = value
            report.exactness["t3"] = flag
            # t4 from the exact fourth-minus-twelve-third combination
            comb = moments.gaussian_chi_square_combination(f, nu)
            report.components["t4"] = bounds.t4(0.0, comb, nu, f.d)
    except CapacityError:
        pass  # statistics stay absent when materialization is infeasible


def cmd_bound(args) -> int:
    kernel_list = [kernels.read_kernel(p) for p in args.kernel]
    law = simulate.get_law(args.law)
    if args.profile:
        beta3, beta4 = _parse_floats(args.profile, 2, "--profile")
        profile = bounds.MomentProfile(beta3=beta3, beta4=beta4)
    else:
        profile = simulate.law_moment_profile(law)
    config = simulate.SampleConfig(
        n=args.n, seed=args.seed, workers=args.workers, batch_size=args.batch
    )
    params = {
        "kind": args.kind,
        "kernel": list(args.kernel) if len(args.kernel) > 1 else args.kernel[0],
        "law": args.law,
        "profile": [profile.beta3, profile.beta4],
        "budget": args.budget,
        "n": args.n,
    }
    if args.kind == "multi":
        b2m, b3m = _parse_floats(args.budget, 2, "--budget (multi)")
        budget = bounds.TestFunctionBudget(b2m=b2m, b3m=b3m)
        normalized = [kernels.normalize_to_variance(f, 1.0) for f in kernel_list]
        report = bounds.multivariate_smooth_bound(normalized, profile, budget)
    else:
        a, bb, b3 = _parse_floats(args.budget, 3, "--budget")
        budget = bounds.TestFunctionBudget(a=a, b=bb, b3=b3)
        f = kernel_list[0]
        if args.kind == "chi2":
            params["nu"] = args.nu
            f = kernels.normalize_to_variance(f, 2.0 * args.nu)
            eq3, eq4, exactness, se = _estimate_moments(f, law, config, need_third=True)
            report = bounds.chi_square_smooth_bound(
                f, profile, budget, args.nu, eq3, eq4, exactness, se
            )
        else:
            f = kernels.normalize_to_variance(f, 1.0)
            _, eq4, exactness, se = _estimate_moments(f, law, config, need_third=False)
            if args.kind == "normal":
                report = bounds.normal_smooth_bound(f, profile, budget, eq4, exactness, se)
            else:
                report = bounds.wasserstein_bound(f, profile, eq4, exactness, se)
        _attach_statistics(report, f, args.kind, args.nu)
        if exactness == bounds.MONTE_CARLO:
            params["seed"] = args.seed
    manifest = reportio.RunManifest(f"bound-{args.kind}", params, seed=args.seed)
    text = reportio.format_sections(
        reportio.REPORT_MAGIC,
        [("manifest", manifest.to_section()), ("bound", reportio.bound_report_section(report))],
    )
    _emit(text, args.out)
    return 0


def cmd_simulate(args) -> int:
    kernel_list = [kernels.read_kernel(p) for p in args.kernel]
    law = simulate.get_law(args.law)
    config = simulate.SampleConfig(
        n=args.n, seed=args.seed, workers=args.workers, batch_size=args.batch
    )
    params = {
        "kernel": list(args.kernel) if len(args.kernel) > 1 else args.kernel[0],
        "law": args.law,
        "n": args.n,
        "batch": args.batch,
    }
    if args.nu is not None:
        params["nu"] = args.nu
    manifest = reportio.RunManifest("simulate", params, seed=args.seed)
    sections = [("manifest", manifest.to_section())]
    if len(kernel_list) == 1:
        summary = simulate.sample_sums(kernel_list[0], law, config)
        extra = {"ks_normal": simulate.ks_normal(summary)}
        if args.nu is not None:
            extra["ks_chi2"] = simulate.ks_chi2(summary, args.nu)
        sections.append(("summary", reportio.summary_section(summary, extra)))
        raw = summary.samples
    else:
        joint = simulate.sample_vector_sums(kernel_list, law, config)
        cov = joint.empirical_covariance()
        head = {"law": joint.law, "n": joint.n, "seed": joint.seed, "m": len(kernel_list)}
        head.update(reportio.matrix_items("covariance", cov))
        sections.append(("joint", head))
        for j in range(len(kernel_list)):
            marg = joint.marginal(j)
            sections.append(
                (f"marginal.{j}", reportio.summary_section(marg, {"ks_normal": simulate.ks_normal(marg)}))
            )
        raw = joint.samples
    if args.dump_samples:
        simulate.write_samples(args.dump_samples, raw)
    _emit(reportio.format_sections(reportio.REPORT_MAGIC, sections), args.out)
    return 0


def cmd_diagnose(args) -> int:
    with open(args.spec) as fh:
        sections = reportio.parse_sections(fh.read(), reportio.DIAGNOSE_MAGIC)
    body = dict(sections)
    if "sequence" not in body:
        raise ValidationError("diagnose spec needs a [sequence] section")
    seq = body["sequence"]
    kind = seq.get("kind", "universality")
    laws = seq.get("laws", "gaussian")
    laws = tuple(laws) if isinstance(laws, list) else (laws,)
    sweep = seq.get("sweep", [])
    sweep = tuple(sweep) if isinstance(sweep, list) else (sweep,)
    spec = diagnose.SequenceSpec(
        family=seq.get("family", "disjoint_pairs"),
        d=int(seq.get("d", 2)),
        sweep=sweep,
        target=seq.get("target", "normal"),
        nu=int(seq.get("nu", 1)),
        laws=laws,
        n=int(seq.get("n", 10_000)),
        seed=int(seq.get("seed", 0)),
        workers=int(args.workers if args.workers else seq.get("workers", 1)),
        batch_size=int(seq.get("batch", 1024)),
    )
    if kind == "universality":
        report = diagnose.universality_experiment(spec)
    elif kind == "fourth_moment":
        report = diagnose.fourth_moment_diagnostic(spec)
    elif kind == "chi_square":
        report = diagnose.chi_square_diagnostic(spec)
    elif kind == "de_jong":
        f = spec.kernel_at(spec.sweep[-1])
        report = diagnose.de_jong_report(
            f, simulate.get_law(spec.laws[0]), spec.sample_config(len(spec.sweep) - 1)
        )
    else:
        raise ValidationError(f"unknown diagnose kind {kind!r}")
    params = {k: seq[k] for k in sorted(seq) if k != "workers"}
    manifest = reportio.RunManifest("diagnose", params, seed=spec.seed)
    text = reportio.format_sections(
        reportio.REPORT_MAGIC,
        [("manifest", manifest.to_section())] + reportio.verdict_sections(report),
    )
    _emit(text, args.out)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "kernel":
            return cmd_kernel(args)
        if args.command == "bound":
            return cmd_bound(args)
        if args.command == "simulate":
            return cmd_simulate(args)
        return cmd_diagnose(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return 3
    except (ValidationError, HomsumError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
