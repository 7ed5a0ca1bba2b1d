"""Text and CSV renderings of results."""

from __future__ import annotations

import csv
import io

from .keyrate import KeyRateResult
from .optimizer import SweepResult
from .source import SourceEnsemble

CSV_HEADER = (
    "z_km",
    "L",
    "delta",
    "mu",
    "nu1",
    "nu2",
    "nu3",
    "Q_mu",
    "E_mu",
    "Q0L",
    "Q1L",
    "Q2L",
    "rate",
    "rate_ratio",
    "feasible",
)


def fmt(value) -> str:
    """12 significant digits, '.' as decimal point; None renders empty."""
    if value is None:
        return ""
    return f"{float(value):.12g}"


def sweep_rows(result: SweepResult):
    for r in result.records:
        intens = r.intensities or (None,) * 4
        qb = r.q_bounds or (None,) * 3
        yield [
            fmt(r.z_km),
            str(r.L),
            fmt(r.delta),
            *(fmt(v) for v in intens),
            fmt(r.q_mu),
            fmt(r.e_mu),
            *(fmt(v) for v in qb),
            fmt(r.rate),
            fmt(r.rate_ratio),
            "1" if r.feasible else "0",
        ]


def write_sweep_csv(result: SweepResult, fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    writer.writerows(sweep_rows(result))


def sweep_csv_text(result: SweepResult) -> str:
    buf = io.StringIO()
    write_sweep_csv(result, buf)
    return buf.getvalue()


def keyrate_report(ensemble: SourceEnsemble, result: KeyRateResult, L: int, delta: float, z: float) -> str:
    mu, n1, n2, n3 = ensemble.intensities
    obs = result.observed
    lines = [
        f"z_km: {fmt(z)}",
        f"L: {L}",
        f"delta: {fmt(delta)}",
        f"mu: {fmt(mu)}",
        f"nu1: {fmt(n1)}",
        f"nu2: {fmt(n2)}",
        f"nu3: {fmt(n3)}",
        f"Q_mu: {fmt(obs.q_mu)}",
        f"E_mu: {fmt(obs.e_mu)}",
        f"Q0L: {fmt(result.q_bounds[0])}",
        f"Q1L: {fmt(result.q_bounds[1])}",
        f"Q2L: {fmt(result.q_bounds[2])}",
        f"e_ph0: {fmt(result.phase_errors[0])}",
        f"e_ph1: {fmt(result.phase_errors[1])}",
        f"e_ph2: {fmt(result.phase_errors[2])}",
        f"ec_cost: {fmt(result.ec_cost)}",
        f"rate_scope: {result.scope}",
        f"raw_rate: {fmt(result.raw_rate)}",
        f"rate: {fmt(result.rate)}",
        f"feasible: {'true' if result.feasible else 'false'}",
        f"conditions: {result.diagnostics.summary() if result.diagnostics else 'unchecked'}",
    ]
    return "\n".join(lines) + "\n"
