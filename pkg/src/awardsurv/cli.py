"""Command-line entry points.

Subcommands cover the full pipeline: ``gestimate`` (structural estimate and
survival advantage), ``sensitivity`` (estimates under assumed residual
association), ``compare`` (conventional hazard and person-years analyses),
``diagnose`` (covariate-balance quantiles), ``simulate`` (null calibration
of every method) and ``simtables`` (replicated mortality cell rates).

Results are written as a report directory (``--out``, or the
``AWARDSURV_REPORT_DIR`` environment variable, default ``./report``); scalar
results are also printed to standard output, warnings to standard error.
"""

from __future__ import annotations

import argparse
import os
import sys
from datetime import date
from pathlib import Path
from typing import Sequence

from .clogit import DesignConfig, score_test
from .domain import AwardStratum, Performer, build_candidate_records, years_between
from .errors import AwardSurvError
from .gestimation import (
    DEFAULT_SEARCH,
    DEFAULT_STEP,
    GEstimator,
    SensitivityConfig,
    apply_exclusion_rule,
    sensitivity_analysis,
)
from .io import DEFAULT_CENSOR_DATE, IngestResult, ingest
from .report import ComparisonRow, build_report, dataset_hash, write_report
from .simulation import METHODS, SimConfig, mortality_tables, replicate
from .survival import CoxSpec, SurvivalRecord, cox_fit, person_years

__all__ = ["main"]

_COMPARE_SPECS = (
    ("cox-static-birthday", CoxSpec(status="static", time_zero="birthday")),
    (
        "cox-dynamic-birthday",
        CoxSpec(status="dynamic", time_zero="birthday", covariates=("yob",)),
    ),
    (
        "cox-dynamic-nomination",
        CoxSpec(status="dynamic", time_zero="nomination-day", covariates=("yob",)),
    ),
    (
        "cox-dynamic-nomination-history",
        CoxSpec(
            status="dynamic",
            time_zero="nomination-day",
            covariates=("yob", "numnom", "numwins"),
        ),
    ),
)


def _parse_pair(text: str, flag: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"{flag} expects two comma-separated values")
    try:
        lo, hi = float(parts[0]), float(parts[1])
    except ValueError:
        raise argparse.ArgumentTypeError(f"{flag} expects numbers, got {text!r}") from None
    return lo, hi


def _parse_range(text: str) -> tuple[float, float]:
    return _parse_pair(text, "--range")


def _parse_caps(text: str) -> tuple[int, int]:
    lo, hi = _parse_pair(text, "--caps")
    return int(lo), int(hi)


def _parse_floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _parse_date(text: str) -> date:
    try:
        return date.fromisoformat(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected ISO date, got {text!r}") from None


def _parse_methods(text: str) -> tuple[str, ...]:
    methods = tuple(m.strip() for m in text.split(",") if m.strip())
    unknown = [m for m in methods if m not in METHODS]
    if unknown:
        raise argparse.ArgumentTypeError(
            f"unknown methods {unknown}; choose from {sorted(METHODS)}"
        )
    return methods


def _report_dir(args: argparse.Namespace) -> Path:
    if args.out is not None:
        return Path(args.out)
    env = os.environ.get("AWARDSURV_REPORT_DIR")
    return Path(env) if env else Path("report")


def _load(args: argparse.Namespace) -> tuple[IngestResult, list[AwardStratum]]:
    result = ingest(args.data, censor_date=args.censor_date)
    print(result.summary())
    strata = build_candidate_records(result.performers, result.nominations)
    return result, strata


def _survival_records(result: IngestResult) -> list[SurvivalRecord]:
    """Per-performer follow-up on the age axis, for hazard-style analyses."""
    noms: dict[str, list[float]] = {}
    wins: dict[str, list[float]] = {}
    by_id: dict[str, Performer] = {p.id: p for p in result.performers}
    for n in result.nominations:
        p = by_id[n.performer_id]
        age = years_between(p.birth, n.award_date)
        noms.setdefault(p.id, []).append(age)
        if n.won:
            wins.setdefault(p.id, []).append(age)
    records = []
    for pid in sorted(noms):
        p = by_id[pid]
        end_date = p.death if p.death is not None else p.censor_date
        records.append(
            SurvivalRecord(
                end=years_between(p.birth, end_date),
                event=p.death is not None,
                nomination_ages=tuple(sorted(noms[pid])),
                win_ages=tuple(sorted(wins.get(pid, ()))),
                covariates={"yob": float(p.birth.year)},
            )
        )
    return records


def _base_metadata(args: argparse.Namespace, **extra) -> dict[str, str]:
    meta = {f"config.{k}": str(v) for k, v in extra.items()}
    if getattr(args, "data", None):
        meta["dataset.sha256"] = dataset_hash(args.data)
        meta["dataset.path"] = str(args.data)
    return meta


def _cmd_gestimate(args: argparse.Namespace) -> int:
    result, strata = _load(args)
    est = GEstimator(
        basis=args.basis, search=args.range, step=args.step, level=args.level
    ).fit(strata)
    analysis = est.analysis_strata_
    _, p_zero = score_test(analysis, 0.0, DesignConfig(nomage_basis=args.basis))
    g = est.estimate_
    adv = est.advantage_
    lo_m, hi_m = g.survival_multiplier_ci
    meta = _base_metadata(
        args,
        basis=args.basis,
        range=f"{args.range[0]},{args.range[1]}",
        step=args.step,
        level=args.level,
        censor_date=args.censor_date.isoformat(),
    )
    meta.update(
        {
            "result.p_at_zero": format(p_zero, ".10g"),
            "result.psi_hat": format(g.psi_hat, ".10g"),
            "result.psi_ci": f"{g.ci[0]:.10g},{g.ci[1]:.10g}",
            "result.survival_multiplier_ci": f"{lo_m:.10g},{hi_m:.10g}",
            "result.advantage_years": format(adv.years, ".10g"),
            "result.advantage_ci": f"{adv.ci_years[0]:.10g},{adv.ci_years[1]:.10g}",
            "result.median_actual": format(adv.median_actual, ".10g"),
            "result.median_latent": format(adv.median_latent, ".10g"),
            "exclusion.records": str(len(est.exclusion_.dropped_records)),
            "exclusion.strata": str(len(est.exclusion_.dropped_strata)),
        }
    )
    bundle = build_report(
        meta,
        theta_curve=g.theta_curve,
        diagnostics=est.diagnose(),
        warnings=tuple(result.exclusions) + g.warnings,
        require=("theta_curve", "diagnostics"),
    )
    paths = write_report(bundle, _report_dir(args))
    print(f"p-value for no effect (psi=0): {p_zero:.4g}")
    print(f"psi_hat = {g.psi_hat:.4f}, {args.level:.0%} CI [{g.ci[0]:.4f}, {g.ci[1]:.4f}]")
    print(f"lifetime multiplier exp(-psi) CI [{lo_m:.4f}, {hi_m:.4f}]")
    print(
        f"survival advantage {adv.years:.1f} years, "
        f"CI [{adv.ci_years[0]:.1f}, {adv.ci_years[1]:.1f}]"
    )
    _emit_warnings(bundle.warnings)
    print(f"report written to {paths[-1].parent}")
    return 0


def _cmd_sensitivity(args: argparse.Namespace) -> int:
    result, strata = _load(args)
    analysis, _ = apply_exclusion_rule(strata)
    rows = sensitivity_analysis(
        analysis,
        strata,
        SensitivityConfig.from_odds_ratios(args.theta_star_or),
        config=DesignConfig(nomage_basis=args.basis),
        search=args.range,
        step=args.step,
        level=args.level,
    )
    meta = _base_metadata(
        args,
        basis=args.basis,
        odds_ratios=",".join(str(v) for v in args.theta_star_or),
        level=args.level,
    )
    bundle = build_report(
        meta,
        sensitivity=rows,
        warnings=result.exclusions,
        require=("sensitivity",),
    )
    paths = write_report(bundle, _report_dir(args))
    for row in rows:
        if row.error:
            print(f"OR={row.odds_ratio:g}: failed ({row.error})")
        else:
            e, a = row.estimate, row.advantage
            print(
                f"OR={row.odds_ratio:g}: psi [{e.ci[0]:.4f}, {e.ci[1]:.4f}], "
                f"advantage {a.years:.1f} [{a.ci_years[0]:.1f}, {a.ci_years[1]:.1f}]"
            )
    _emit_warnings(bundle.warnings)
    print(f"report written to {paths[-1].parent}")
    return 0


def _cmd_compare(args: argparse.Namespace) -> int:
    result, _ = _load(args)
    records = _survival_records(result)
    rows = []
    warnings: list[str] = list(result.exclusions)
    for name, spec in _COMPARE_SPECS:
        fit = cox_fit(records, spec, level=args.level)
        red, (lo, hi) = fit.mortality_reduction("winner")
        rows.append(
            ComparisonRow(
                method=name,
                status=spec.status,
                time_zero=spec.time_zero,
                estimate=100.0 * red,
                ci_low=100.0 * lo,
                ci_high=100.0 * hi,
            )
        )
    py = person_years(records, level=args.level)
    red, (lo, hi) = py.mortality_reduction()
    rows.append(
        ComparisonRow(
            method="person-years",
            status="static",
            time_zero="nomination-day",
            estimate=100.0 * red,
            ci_low=100.0 * lo,
            ci_high=100.0 * hi,
        )
    )
    meta = _base_metadata(args, level=args.level, censor_date=args.censor_date.isoformat())
    bundle = build_report(meta, comparison=rows, warnings=warnings, require=("comparison",))
    paths = write_report(bundle, _report_dir(args))
    for row in rows:
        print(
            f"{row.method}: mortality reduction {row.estimate:.1f}% "
            f"[{row.ci_low:.1f}, {row.ci_high:.1f}]"
        )
    _emit_warnings(bundle.warnings)
    print(f"report written to {paths[-1].parent}")
    return 0


def _cmd_diagnose(args: argparse.Namespace) -> int:
    result, strata = _load(args)
    est = GEstimator(
        basis=args.basis, search=args.range, step=args.step, level=args.level
    ).fit(strata)
    rows = est.diagnose(groups=args.groups)
    meta = _base_metadata(args, groups=args.groups, basis=args.basis)
    meta["result.psi_hat"] = format(est.estimate_.psi_hat, ".10g")
    bundle = build_report(
        meta,
        diagnostics=rows,
        warnings=tuple(result.exclusions) + est.estimate_.warnings,
        require=("diagnostics",),
    )
    paths = write_report(bundle, _report_dir(args))
    print(f"psi_hat = {est.estimate_.psi_hat:.4f}; {len(rows)} diagnostic rows")
    _emit_warnings(bundle.warnings)
    print(f"report written to {paths[-1].parent}")
    return 0


def _cmd_simulate(args: argparse.Namespace) -> int:
    config = SimConfig(scenario=args.scenario, seed=args.seed, caps=args.caps)
    outcome = replicate(config, args.reps, methods=args.methods)
    rows = [
        ComparisonRow(method=m, status="", time_zero="", estimate=outcome.mean(m))
        for m in args.methods
    ]
    meta = _base_metadata(
        args, scenario=args.scenario, reps=args.reps, seed=args.seed,
        methods=",".join(args.methods),
        caps="none" if args.caps is None else f"{args.caps[0]},{args.caps[1]}",
    )
    warnings = tuple(
        f"{m}: {k} of {args.reps} replications failed"
        for m, k in sorted(outcome.failures.items())
        if k
    )
    bundle = build_report(
        meta,
        comparison=rows,
        samples=outcome.p_values,
        warnings=warnings,
        require=("comparison", "samples"),
    )
    paths = write_report(bundle, _report_dir(args))
    for row in rows:
        print(f"{row.method}: mean p = {row.estimate:.3f}")
    _emit_warnings(bundle.warnings)
    print(f"report written to {paths[-1].parent}")
    return 0


def _cmd_simtables(args: argparse.Namespace) -> int:
    config = SimConfig(scenario=args.scenario, seed=args.seed, caps=args.caps)
    tables = mortality_tables(config, args.reps)
    meta = _base_metadata(
        args,
        scenario=args.scenario,
        reps=args.reps,
        seed=args.seed,
        caps="none" if args.caps is None else f"{args.caps[0]},{args.caps[1]}",
    )
    bundle = build_report(meta, mortality=tables.cells, require=("mortality",))
    paths = write_report(bundle, _report_dir(args))
    print(f"{len(tables.cells)} mortality cells over {args.reps} replications")
    print(f"report written to {paths[-1].parent}")
    return 0


def _emit_warnings(warnings: Sequence[str]) -> None:
    for w in warnings:
        print(f"warning: {w}", file=sys.stderr)


def _add_data_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--data", required=True, help="dataset file path")
    p.add_argument(
        "--censor-date",
        type=_parse_date,
        default=DEFAULT_CENSOR_DATE,
        help="censoring date for performers with no recorded death",
    )


def _add_inversion_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--range", type=_parse_range, default=DEFAULT_SEARCH,
                   help="search interval as lo,hi")
    p.add_argument("--step", type=float, default=DEFAULT_STEP, help="grid step")
    p.add_argument("--level", type=float, default=0.95, help="confidence level")
    p.add_argument("--basis", default="poly3",
                   help="age basis: poly3 or spline:K (K interior knots, 1-4)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="awardsurv",
        description="Survival analysis of award winning with structural correction "
        "for survivor and immortal-time bias.",
    )
    parser.add_argument("--out", default=None, help="report output directory")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gestimate", help="structural estimate and survival advantage")
    _add_data_flags(p)
    _add_inversion_flags(p)
    p.set_defaults(func=_cmd_gestimate)

    p = sub.add_parser("sensitivity", help="estimates under assumed residual association")
    _add_data_flags(p)
    _add_inversion_flags(p)
    p.add_argument(
        "--theta-star-or",
        type=_parse_floats,
        required=True,
        help="comma-separated win odds ratios per 10 latent years, e.g. 0.9,1.0,1.2",
    )
    p.set_defaults(func=_cmd_sensitivity)

    p = sub.add_parser("compare", help="conventional hazard and person-years analyses")
    _add_data_flags(p)
    p.add_argument("--level", type=float, default=0.95)
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("diagnose", help="covariate balance across latent-time groups")
    _add_data_flags(p)
    _add_inversion_flags(p)
    p.add_argument("--groups", type=int, default=5, help="number of quantile groups")
    p.set_defaults(func=_cmd_diagnose)

    p = sub.add_parser("simulate", help="null calibration of analysis methods")
    p.add_argument("--scenario", choices=("table3", "table8"), default="table3")
    p.add_argument("--reps", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument(
        "--methods",
        type=_parse_methods,
        default=tuple(METHODS),
        help=f"comma-separated subset of {sorted(METHODS)}",
    )
    p.add_argument("--caps", type=_parse_caps, default=None,
                   help="nomination,win caps, e.g. 2,2")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("simtables", help="replicated mortality cell rates")
    p.add_argument("--scenario", choices=("table3", "table8"), default="table3")
    p.add_argument("--reps", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--caps", type=_parse_caps, default=None,
                   help="nomination,win caps, e.g. 2,2")
    p.set_defaults(func=_cmd_simtables)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (AwardSurvError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
