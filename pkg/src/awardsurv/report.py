"""Report assembly and deterministic serialization.

A report is a directory of UTF-8 tab-separated tables plus a manifest:
``manifest.txt``, ``comparison.tsv``, ``sensitivity.tsv``, ``theta_curve.tsv``,
``diagnostics.tsv``, and, when produced, ``p_values.tsv`` and
``mortality.tsv``.  Warnings go to ``log.txt``.  Output contains no
timestamps and all rows are sorted, so identical inputs serialize to
byte-identical files.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from . import __version__
from .errors import PartialReportError
from .gestimation import DiagnosticRow, SensitivityRow, ThetaPoint
from .simulation import CellStat

__all__ = [
    "ComparisonRow",
    "ReportBundle",
    "build_report",
    "write_report",
    "dataset_hash",
    "SECTION_FILES",
]

SECTION_FILES = {
    "comparison": "comparison.tsv",
    "sensitivity": "sensitivity.tsv",
    "theta_curve": "theta_curve.tsv",
    "diagnostics": "diagnostics.tsv",
    "samples": "p_values.tsv",
    "mortality": "mortality.tsv",
}


@dataclass(frozen=True)
class ComparisonRow:
    """One analysis summarized on a common scale.

    ``estimate`` is either a mortality-reduction percentage with its
    confidence bounds or, for calibration studies, a mean p-value with the
    bounds left empty.
    """

    method: str
    status: str
    time_zero: str
    estimate: float
    ci_low: float | None = None
    ci_high: float | None = None


@dataclass(frozen=True)
class ReportBundle:
    """All tables of one run plus the metadata that produced them."""

    metadata: Mapping[str, str]
    comparison: tuple[ComparisonRow, ...] | None = None
    sensitivity: tuple[SensitivityRow, ...] | None = None
    theta_curve: tuple[ThetaPoint, ...] | None = None
    diagnostics: tuple[DiagnosticRow, ...] | None = None
    samples: Mapping[str, np.ndarray] | None = None
    mortality: Mapping[tuple, CellStat] | None = None
    warnings: tuple[str, ...] = ()

    def sections(self) -> tuple[str, ...]:
        return tuple(name for name in SECTION_FILES if getattr(self, name) is not None)


def build_report(
    metadata: Mapping[str, str],
    *,
    comparison: Sequence[ComparisonRow] | None = None,
    sensitivity: Sequence[SensitivityRow] | None = None,
    theta_curve: Sequence[ThetaPoint] | None = None,
    diagnostics: Sequence[DiagnosticRow] | None = None,
    samples: Mapping[str, np.ndarray] | None = None,
    mortality: Mapping[tuple, CellStat] | None = None,
    warnings: Sequence[str] = (),
    require: Sequence[str] = (),
) -> ReportBundle:
    """Assemble a bundle, checking that the expected sections arrived.

    ``require`` names the sections the caller's pipeline was supposed to
    produce; any that are missing, or an entirely empty bundle, raise a
    partial-report error listing them.
    """
    present = {
        "comparison": comparison,
        "sensitivity": sensitivity,
        "theta_curve": theta_curve,
        "diagnostics": diagnostics,
        "samples": samples,
        "mortality": mortality,
    }
    missing = [name for name in require if present.get(name) is None]
    if missing:
        raise PartialReportError(
            f"missing report sections: {', '.join(missing)}", missing=tuple(missing)
        )
    if all(v is None for v in present.values()):
        raise PartialReportError(
            "no report sections produced", missing=tuple(SECTION_FILES)
        )
    meta = dict(metadata)
    meta.setdefault("version", __version__)
    for name, value in present.items():
        if value is not None:
            meta.setdefault(f"provenance.{name}", name)
    return ReportBundle(
        metadata=meta,
        comparison=tuple(comparison) if comparison is not None else None,
        sensitivity=tuple(sensitivity) if sensitivity is not None else None,
        theta_curve=tuple(theta_curve) if theta_curve is not None else None,
        diagnostics=tuple(diagnostics) if diagnostics is not None else None,
        samples=dict(samples) if samples is not None else None,
        mortality=dict(mortality) if mortality is not None else None,
        warnings=tuple(warnings),
    )


def dataset_hash(path: str | Path) -> str:
    """SHA-256 of the raw dataset bytes, for provenance metadata."""
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return format(value, ".10g")
    return str(value)


def _tsv(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    lines = ["\t".join(header)]
    lines.extend("\t".join(_fmt(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def _comparison_tsv(rows: Sequence[ComparisonRow]) -> str:
    return _tsv(
        ["method", "status", "time_zero", "estimate", "ci_low", "ci_high"],
        [(r.method, r.status, r.time_zero, r.estimate, r.ci_low, r.ci_high) for r in rows],
    )


def _sensitivity_tsv(rows: Sequence[SensitivityRow]) -> str:
    flat = []
    for r in rows:
        est = r.estimate
        adv = r.advantage
        flat.append(
            (
                r.odds_ratio,
                r.theta_star,
                est.psi_hat if est else None,
                est.ci[0] if est else None,
                est.ci[1] if est else None,
                adv.years if adv else None,
                adv.ci_years[0] if adv else None,
                adv.ci_years[1] if adv else None,
                r.error or "",
            )
        )
    return _tsv(
        [
            "odds_ratio",
            "theta_star",
            "psi_hat",
            "psi_lo",
            "psi_hi",
            "advantage_years",
            "advantage_lo",
            "advantage_hi",
            "error",
        ],
        flat,
    )


def _theta_curve_tsv(points: Sequence[ThetaPoint]) -> str:
    return _tsv(
        ["psi", "theta_hat", "p_value"],
        [(p.psi, p.theta, p.p_value) for p in points],
    )


def _diagnostics_tsv(rows: Sequence[DiagnosticRow]) -> str:
    return _tsv(
        ["group", "age_low", "age_high", "winner", "n", "min", "q1", "median", "q3", "max"],
        [
            (
                r.group,
                r.age_low,
                r.age_high,
                int(r.winner),
                r.n,
                r.minimum,
                r.q1,
                r.median,
                r.q3,
                r.maximum,
            )
            for r in rows
        ],
    )


def _samples_tsv(samples: Mapping[str, np.ndarray]) -> str:
    rows = []
    for method in sorted(samples):
        for rep, p in enumerate(np.asarray(samples[method], dtype=float)):
            rows.append((method, rep, float(p)))
    return _tsv(["method", "rep", "p_value"], rows)


def _mortality_tsv(cells: Mapping[tuple, CellStat]) -> str:
    rows = []
    for (age, keying, key), stat in sorted(cells.items()):
        rows.append(
            (
                age,
                keying,
                ",".join(str(k) for k in key),
                stat.mean,
                stat.lo,
                stat.hi,
                stat.n_reps,
            )
        )
    return _tsv(["age", "keying", "key", "mean", "lo", "hi", "n_reps"], rows)


_WRITERS = {
    "comparison": _comparison_tsv,
    "sensitivity": _sensitivity_tsv,
    "theta_curve": _theta_curve_tsv,
    "diagnostics": _diagnostics_tsv,
    "samples": _samples_tsv,
    "mortality": _mortality_tsv,
}


def write_report(bundle: ReportBundle, directory: str | Path) -> list[Path]:
    """Write every present section, the log, and the manifest.

    Returns the written paths.  Reruns with identical inputs overwrite the
    same files with identical bytes.
    """
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    manifest_lines = ["awardsurv-report"]
    for key in sorted(bundle.metadata):
        manifest_lines.append(f"meta\t{key}\t{bundle.metadata[key]}")
    for name in bundle.sections():
        content = _WRITERS[name](getattr(bundle, name))
        path = out / SECTION_FILES[name]
        path.write_text(content, encoding="utf-8")
        written.append(path)
        n_rows = content.count("\n") - 1
        manifest_lines.append(f"section\t{name}\t{SECTION_FILES[name]}\trows={n_rows}")
    log_path = out / "log.txt"
    log_path.write_text("".join(w + "\n" for w in bundle.warnings), encoding="utf-8")
    written.append(log_path)
    manifest_lines.append(f"log\tlog.txt\tlines={len(bundle.warnings)}")
    manifest = out / "manifest.txt"
    manifest.write_text("\n".join(manifest_lines) + "\n", encoding="utf-8")
    written.append(manifest)
    return written
