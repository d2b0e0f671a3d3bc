"""Command-line front end.

Exit codes: 0 ok, 2 usage/config/domain, 3 I/O or parse, 4 fit validity.
"""

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from copula_app import artifacts
from copula_app.copulas import TailCurve, TwoComponentCopula, get_copula
from copula_app.copulas.two_component import (
    TAIL_POINTS,
    TAIL_T_MAX,
    TAIL_T_MIN,
    TwoComponentParams,
    fit_margin_gpds,
    tc_density,
    tc_lambda_u_curve,
    tc_sample,
)
from copula_app.empirical import copula_surfaces, kendall_tau, pseudo_observations
from copula_app.errors import (
    ConfigError,
    DataFileError,
    DegenerateSampleError,
    DomainError,
    FitError,
)
from copula_app.rng import stream
from copula_app.settings import StudySettings, load_settings
from copula_app.study import analyse_sample, draw_model_params, headline_fit, run_study
from copula_app.study_rerun import StudyRerun

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_FIT = 4


def _settings(args: argparse.Namespace, **overrides) -> StudySettings:
    common = {
        "model.alpha1": getattr(args, "alpha1", None),
        "model.alpha2": getattr(args, "alpha2", None),
        "model.sigma1": getattr(args, "sigma1", None),
        "model.sigma2": getattr(args, "sigma2", None),
        "seed": getattr(args, "seed", None),
        "n": getattr(args, "n", None),
        "bootstrap_k": getattr(args, "bootstrap_k", None),
        "beta": getattr(args, "beta", None),
        "threads": getattr(args, "threads", None),
        "tc_estimator": getattr(args, "tc_estimator", None),
    }
    family = getattr(args, "family", None)
    if family is not None:
        common["families"] = [family]
    common.update(overrides)
    return load_settings(args.config, common)


def _recorder(args: argparse.Namespace) -> StudyRerun | None:
    if not getattr(args, "rerun", None):
        return None
    recorder = StudyRerun("tailcopula", args.rerun)
    recorder.init()
    return recorder


def _require_path(path: Path | None, what: str) -> Path:
    if path is None:
        raise ConfigError(f"no {what} path: pass --out or set output.{what} in the config")
    return path


def _data_path(args: argparse.Namespace, settings: StudySettings) -> Path:
    if args.data is not None:
        return Path(args.data)
    if settings.output.data is not None:
        return settings.output.data
    raise ConfigError("no input data: pass --data or set output.data in the config")


def cmd_simulate(args: argparse.Namespace) -> int:
    settings = _settings(args, **{"output.data": args.out})
    model = settings.model
    if args.random_alpha:
        model = draw_model_params(stream(settings.seed, 1), settings.model.sigma1, settings.model.sigma2)
        logging.info(f"Simulate // random model {model}")
    sample = tc_sample(model, settings.n, stream(settings.seed, 0))
    artifacts.write_loss_sample(_require_path(settings.output.data, "data"), sample)
    return EXIT_OK


def cmd_fit(args: argparse.Namespace) -> int:
    settings = _settings(args)
    cls = get_copula(args.family)
    sample = artifacts.read_loss_sample(_data_path(args, settings))
    tau_hat = kendall_tau(sample)
    margin_fits = fit_margin_gpds(sample) if cls is TwoComponentCopula else None
    copula = headline_fit(cls.name, sample, tau_hat, margin_fits)

    entries: dict[str, object] = {"family": cls.name, "n": sample.n, "tau_hat": tau_hat}
    if margin_fits is not None:
        entries.update(artifacts.margin_entries(margin_fits))
    entries.update(artifacts.copula_entries(cls.name, copula))
    logging.info(f"Fit // {copula.describe()}")
    _emit_report(args.out or settings.output.report, entries)
    return EXIT_OK


def _emit_report(path: Path | str | None, entries: dict[str, object]) -> None:
    if path is None:
        for key, value in entries.items():
            print(f"{key}={artifacts.value_text(value)}")
    else:
        artifacts.write_report(path, entries)


def cmd_gof(args: argparse.Namespace) -> int:
    settings = _settings(args, **{"output.report": args.out, "output.histogram": args.histogram})
    if not settings.families:
        raise ConfigError("no copula families configured")
    sample = artifacts.read_loss_sample(_data_path(args, settings))
    report = analyse_sample(
        sample, settings.gof_configs(), beta=settings.beta, external_p_values=settings.external_p_values
    )
    report.seed = settings.seed
    _write_study_outputs(settings, report, recorder=_recorder(args))
    if not report.gof_reports:
        logging.error("Gof // no family completed its test")
        return EXIT_FIT
    return EXIT_OK


def cmd_study(args: argparse.Namespace) -> int:
    settings = _settings(args, **{"output.data": args.out})
    if not settings.families:
        raise ConfigError("no copula families configured")
    sample, report = run_study(
        settings.model, settings.n, settings.gof_configs(), beta=settings.beta,
        seed=settings.seed, external_p_values=settings.external_p_values,
    )
    if settings.output.data is not None:
        artifacts.write_loss_sample(settings.output.data, sample)
    _write_study_outputs(settings, report, recorder=_recorder(args))
    return EXIT_OK if report.gof_reports else EXIT_FIT


def _write_study_outputs(settings: StudySettings, report, recorder: StudyRerun | None) -> None:
    _emit_report(settings.output.report, artifacts.study_entries(report))
    if settings.output.histogram is not None:
        artifacts.write_histogram(settings.output.histogram, report)
    if recorder is not None:
        recorder.log_bootstrap(report)
        recorder.log_dict("study/report", artifacts.study_entries(report))
        for family, value in report.lambda_u_estimates:
            if isinstance(value, TailCurve):
                recorder.log_tail_curve(f"tail/{family}", value)
        recorder.close()


def _tc_params(args: argparse.Namespace) -> TwoComponentParams:
    try:
        return TwoComponentParams(alpha1=args.alpha1, alpha2=args.alpha2)
    except DomainError as e:
        raise ConfigError(str(e)) from None


def cmd_density_grid(args: argparse.Namespace) -> int:
    params = _tc_params(args)
    if args.grid_n < 2:
        raise ConfigError(f"--grid-n must be >= 2, got {args.grid_n}")
    axis = np.arange(1, args.grid_n + 1) / (args.grid_n + 1.0)
    uu, vv = np.meshgrid(axis, axis, indexing="ij")
    u, v = uu.ravel(), vv.ravel()
    c = tc_density(params, u, v)
    artifacts.write_density_grid(_out(args, "grid"), u, v, c)
    recorder = _recorder(args)
    if recorder is not None:
        recorder.log_surface("density", u, v, c)
        recorder.close()
    return EXIT_OK


def cmd_tail_curve(args: argparse.Namespace) -> int:
    params = _tc_params(args)
    if not 0.0 < args.t_min < args.t_max <= TAIL_T_MAX:
        raise ConfigError(f"need 0 < t_min < t_max <= {TAIL_T_MAX}, got [{args.t_min}, {args.t_max}]")
    if args.points < 2:
        raise ConfigError(f"--points must be >= 2, got {args.points}")
    curve = tc_lambda_u_curve(params, np.geomspace(args.t_min, args.t_max, args.points))
    artifacts.write_tail_curve(_out(args, "curve"), curve)
    print(f"verdict={curve.verdict}")
    recorder = _recorder(args)
    if recorder is not None:
        recorder.log_tail_curve("tail/two-component", curve)
        recorder.close()
    return EXIT_OK


def cmd_copula_grid(args: argparse.Namespace) -> int:
    settings = _settings(args, **{"output.surfaces": args.out})
    if args.grid_n < 2:
        raise ConfigError(f"--grid-n must be >= 2, got {args.grid_n}")
    sample = artifacts.read_loss_sample(_data_path(args, settings))
    tau_hat = kendall_tau(sample)
    fits = {}
    for family in settings.families:
        try:
            fits[family] = headline_fit(family, sample, tau_hat)
        except FitError as e:
            logging.warning(f"CopulaGrid // skipping {family}: {e}")
    u, v, surfaces = copula_surfaces(pseudo_observations(sample), fits, args.grid_n)
    artifacts.write_surfaces(_require_path(settings.output.surfaces, "surfaces"), u, v, surfaces)
    recorder = _recorder(args)
    if recorder is not None:
        for name, values in surfaces.items():
            recorder.log_surface(f"copula/{name}", u, v, values)
        recorder.close()
    return EXIT_OK


def _out(args: argparse.Namespace, what: str) -> Path:
    if args.out:
        return Path(args.out)
    path = getattr(load_settings(args.config).output, what) if args.config else None
    return _require_path(path, what)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tailcopula", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, study: bool = False):
        p.add_argument("--config", help="Lua study config file")
        p.add_argument("--seed", type=int, help="64-bit unsigned seed")
        p.add_argument("--out", help="output file")
        p.add_argument("--rerun", metavar="PATH", help="also record to a rerun .rrd file")
        if study:
            p.add_argument("--family", help="restrict to one copula family")
            p.add_argument("--bootstrap-k", type=int, help="bootstrap iterations K")
            p.add_argument("--beta", type=float, help="BH significance level")
            p.add_argument("--threads", type=int, help="bootstrap worker threads")
            p.add_argument("--tc-estimator", choices=["pseudo_likelihood", "margin_mle"])

    def model_args(p: argparse.ArgumentParser):
        for name in ("alpha1", "alpha2", "sigma1", "sigma2"):
            p.add_argument(f"--{name}", type=float, help=f"loss model {name}")

    p = sub.add_parser("simulate", help="simulate loss pairs from the Two-component model")
    common(p)
    model_args(p)
    p.add_argument("--n", type=int, help="number of pairs")
    p.add_argument("--random-alpha", action="store_true", help="draw xi_i uniformly on (0, 1]")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit", help="fit one copula family to a loss CSV")
    common(p)
    p.add_argument("--data", help="x1,x2 CSV")
    p.add_argument("--family", required=True, help="gaussian | gumbel | two-component")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("gof", help="bootstrap goodness-of-fit tests on a loss CSV")
    common(p, study=True)
    p.add_argument("--data", help="x1,x2 CSV")
    p.add_argument("--histogram", help="bootstrap statistics CSV")
    p.set_defaults(func=cmd_gof)

    p = sub.add_parser("study", help="simulate, fit, test and correct in one run")
    common(p, study=True)
    model_args(p)
    p.add_argument("--n", type=int, help="number of pairs")
    p.set_defaults(func=cmd_study)

    p = sub.add_parser("density-grid", help="Two-component density on an interior grid")
    common(p)
    p.add_argument("--alpha1", type=float, required=True)
    p.add_argument("--alpha2", type=float, required=True)
    p.add_argument("--grid-n", type=int, default=50)
    p.set_defaults(func=cmd_density_grid)

    p = sub.add_parser("tail-curve", help="lambda_U(t) curve and verdict")
    common(p)
    p.add_argument("--alpha1", type=float, required=True)
    p.add_argument("--alpha2", type=float, required=True)
    p.add_argument("--t-min", type=float, default=TAIL_T_MIN)
    p.add_argument("--t-max", type=float, default=TAIL_T_MAX)
    p.add_argument("--points", type=int, default=TAIL_POINTS)
    p.set_defaults(func=cmd_tail_curve)

    p = sub.add_parser("copula-grid", help="empirical vs fitted copulas on an interior grid")
    common(p)
    p.add_argument("--data", help="x1,x2 CSV")
    p.add_argument("--family", help="restrict to one copula family")
    p.add_argument("--grid-n", type=int, default=20)
    p.set_defaults(func=cmd_copula_grid)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    if args.verbose:
        logging.getLogger().setLevel(logging.DEBUG)

    try:
        return args.func(args)
    except (FitError, DegenerateSampleError) as e:
        logging.error(f"Cli // {args.command}: {e}")
        return EXIT_FIT
    except (DataFileError, OSError) as e:
        logging.error(f"Cli // {args.command}: {e}")
        return EXIT_IO
    except (ConfigError, ValueError) as e:
        logging.error(f"Cli // {args.command}: {e}")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
