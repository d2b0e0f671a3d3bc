"""CSV and key=value report files written and read by the CLI."""

import logging
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from copula_app.copulas import Copula, TailCurve
from copula_app.distributions import GpdFit
from copula_app.empirical import LossSample
from copula_app.errors import DataFileError
from copula_app.study import StudyReport

SAMPLE_HEADER = "x1,x2"


def _fmt(value: float) -> str:
    return format(float(value), ".17g")


def _ensure_parent(path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)


def write_loss_sample(path: str | Path, sample: LossSample) -> None:
    path = Path(path)
    _ensure_parent(path)
    np.savetxt(path, sample.data, delimiter=",", fmt="%.17g", header=SAMPLE_HEADER, comments="")
    logging.info(f"Artifacts // wrote {sample.n} pairs to {path}")


def read_loss_sample(path: str | Path) -> LossSample:
    """Read an x1,x2 CSV.

    Raises:
        DataFileError: If the file is missing, has the wrong header or holds
            anything but finite (x1, x2) rows
    """
    path = Path(path)
    try:
        with open(path, "r") as f:
            header = f.readline().strip()
    except OSError as e:
        raise DataFileError(f"cannot read {path}: {e}") from e
    if header.replace(" ", "") != SAMPLE_HEADER:
        raise DataFileError(f"{path}: expected header '{SAMPLE_HEADER}', got '{header}'")
    try:
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2, dtype=float)
    except ValueError as e:
        raise DataFileError(f"{path}: malformed CSV: {e}") from e
    if data.size == 0:
        raise DataFileError(f"{path}: no data rows")
    if data.shape[1] != 2:
        raise DataFileError(f"{path}: expected 2 columns, got {data.shape[1]}")
    if not np.all(np.isfinite(data)):
        raise DataFileError(f"{path}: non-finite values")
    return LossSample(data)


def write_report(path: str | Path, entries: Mapping[str, object]) -> None:
    path = Path(path)
    _ensure_parent(path)
    lines = [f"{key}={value_text(value)}" for key, value in entries.items()]
    path.write_text("\n".join(lines) + "\n")
    logging.info(f"Artifacts // wrote report ({len(lines)} entries) to {path}")


def value_text(value: object) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return _fmt(value)
    return str(value).replace("\n", " ")


def copula_entries(prefix: str, copula: Copula) -> dict[str, object]:
    entries: dict[str, object] = {f"{prefix}.{k}": v for k, v in copula.params.items()}
    entries.update(lambda_u_entries(prefix, copula.lambda_u()))
    return entries


def lambda_u_entries(prefix: str, value: float | TailCurve) -> dict[str, object]:
    if isinstance(value, TailCurve):
        i = int(np.argmin(value.t))
        entries: dict[str, object] = {
            f"{prefix}.lambda_u_verdict": value.verdict,
            f"{prefix}.lambda_u_t_min": float(value.t[i]),
            f"{prefix}.lambda_u_at_t_min": float(value.values[i]),
        }
        if value.limit is not None:
            entries[f"{prefix}.lambda_u"] = value.limit
        return entries
    return {f"{prefix}.lambda_u": float(value)}


def margin_entries(fits: Iterable[GpdFit]) -> dict[str, object]:
    entries: dict[str, object] = {}
    for i, fit in enumerate(fits, start=1):
        entries[f"margin{i}.xi"] = fit.params.xi
        entries[f"margin{i}.sigma"] = fit.params.sigma
        entries[f"margin{i}.log_likelihood"] = fit.log_likelihood
    return entries


def study_entries(report: StudyReport) -> dict[str, object]:
    entries: dict[str, object] = {"n": report.n}
    if report.seed is not None:
        entries["seed"] = report.seed
    if report.model is not None:
        entries["model.alpha1"] = report.model.tc.alpha1
        entries["model.alpha2"] = report.model.tc.alpha2
        entries["model.sigma1"] = report.model.sigma1
        entries["model.sigma2"] = report.model.sigma2
    entries["beta"] = report.beta
    entries["tau_hat"] = report.tau_hat
    if report.margin_fits is not None:
        entries.update(margin_entries(report.margin_fits))

    for r in report.results:
        f = r.family
        if r.fitted is not None:
            entries[f"{f}.status"] = "ok"
            entries.update({f"{f}.{k}": v for k, v in r.fitted.params.items()})
            entries.update(lambda_u_entries(f, r.lambda_u))
        else:
            entries[f"{f}.status"] = "fit_invalid"
            entries[f"{f}.fit_error"] = r.fit_error
        if r.gof is not None:
            g = r.gof
            entries.update({f"{f}.gof.{k}": v for k, v in g.fitted_params.items()})
            entries[f"{f}.gof.statistic"] = g.observed_statistic
            entries[f"{f}.gof.p_value"] = g.p_value
            entries[f"{f}.gof.valid_iterations"] = g.valid_iterations
            entries[f"{f}.gof.skipped_iterations"] = g.skipped_iterations
            if g.tc_estimator is not None:
                entries[f"{f}.gof.tc_estimator"] = g.tc_estimator
        else:
            entries[f"{f}.gof.status"] = "test_fails"
            entries[f"{f}.gof.error"] = r.gof_error

    for name, p in report.external_p_values.items():
        entries[f"external.{name}.p_value"] = p
    if report.bh is not None:
        entries["bh.m"] = report.bh.m
        entries["bh.threshold"] = report.bh.threshold
        for name, reject in report.bh.decisions:
            entries[f"bh.{name}.reject"] = reject
    return entries


def write_histogram(path: str | Path, report: StudyReport) -> None:
    """family,statistic,observed rows; observed=1 marks the observed statistic."""
    path = Path(path)
    _ensure_parent(path)
    lines = ["family,statistic,observed"]
    for g in report.gof_reports:
        lines.extend(f"{g.family},{_fmt(s)},0" for s in g.bootstrap_statistics)
        lines.append(f"{g.family},{_fmt(g.observed_statistic)},1")
    path.write_text("\n".join(lines) + "\n")
    logging.info(f"Artifacts // wrote bootstrap statistics to {path}")


def write_density_grid(path: str | Path, u: np.ndarray, v: np.ndarray, c: np.ndarray) -> None:
    path = Path(path)
    _ensure_parent(path)
    np.savetxt(path, np.column_stack([u, v, c]), delimiter=",", fmt="%.17g", header="u,v,c", comments="")


def write_tail_curve(path: str | Path, curve: TailCurve) -> None:
    path = Path(path)
    _ensure_parent(path)
    lines = ["t,lambda_u_t"]
    lines.extend(f"{_fmt(t)},{_fmt(value)}" for t, value in zip(curve.t, curve.values))
    lines.append(f"verdict,{curve.verdict}")
    path.write_text("\n".join(lines) + "\n")


def write_surfaces(path: str | Path, u: np.ndarray, v: np.ndarray, surfaces: Mapping[str, np.ndarray]) -> None:
    path = Path(path)
    _ensure_parent(path)
    names = list(surfaces)
    columns = np.column_stack([u, v] + [surfaces[name] for name in names])
    np.savetxt(path, columns, delimiter=",", fmt="%.17g", header=",".join(["u", "v"] + names), comments="")
