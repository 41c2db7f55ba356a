"""Command-line harness: run or sweep INI-configured experiments.

Commands:
    run <config>          execute one experiment, write report + series
    sweep <config>        run the config's refinement ladder level by level
                          and fit the observed convergence order
    list-experiments      table of registered kinds

Exit codes: 0 all verdicts PASS or diagnostic-only, 1 FAIL, 2 usage or
config error, 3 numerical blow-up (partial report written), 4 INCONCLUSIVE.

The output directory resolves as --output flag, else $BIVIRIAL_OUTPUT_ROOT,
else ./results, with one subdirectory per experiment label.  Reports embed
the config echo, grid parameters, the constants-manifest hash, and wall
clock; CSV series contain no timing, so a fixed config and seed reproduces
them bit for bit.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys
import time

from .domain import StepRejectedError
from .engine import BlowUpError
from .experiments import (
    ConfigError,
    ExperimentConfig,
    LadderSpec,
    config_to_ini,
    ladder_levels,
    list_experiments,
    read_config,
    run_experiment,
    write_config,
)
from .grids import WrapGuardError
from .reporting import VerificationReport, worst_verdict
from .verify import fit_order

__all__ = ["main"]

OUTPUT_ROOT_ENV = "BIVIRIAL_OUTPUT_ROOT"

# Summary keys probed, in order, for the scalar a sweep fits its order on.
_RESIDUAL_KEYS = ("max_residual", "finest_residual", "residual", "ratio_spread")


def _output_dir(args: argparse.Namespace, cfg: ExperimentConfig) -> str:
    root = args.output or os.environ.get(OUTPUT_ROOT_ENV) or "results"
    return os.path.join(root, cfg.name)


def _persist(report: VerificationReport, cfg: ExperimentConfig, out_dir: str, verbose: bool) -> None:
    report.params = {
        **report.params,
        "experiment_label": cfg.name,
        "seed": cfg.seed,
        "grid": dataclasses.asdict(cfg.grid),
        "config_echo": config_to_ini(cfg).splitlines(),
    }
    paths = report.write(out_dir)
    write_config(cfg, os.path.join(out_dir, "config_echo.ini"))
    print(f"{cfg.name}: {report.verdict}  ({paths['json']})")
    if verbose:
        for key, val in report.summary.items():
            print(f"  {key} = {val}")


def _partial_report(cfg: ExperimentConfig, exc: Exception, started: float) -> VerificationReport:
    return VerificationReport(
        experiment=cfg.kind,
        params={},
        verdict="INCONCLUSIVE",
        tolerances={},
        runtime_s=time.perf_counter() - started,
        summary={"aborted": type(exc).__name__},
        notes=(str(exc),),
    )


def _cmd_run(args: argparse.Namespace) -> int:
    cfg = read_config(args.config)
    out_dir = _output_dir(args, cfg)
    started = time.perf_counter()
    try:
        report = run_experiment(cfg)
    except (BlowUpError, StepRejectedError) as exc:
        _persist(_partial_report(cfg, exc, started), cfg, out_dir, args.verbose)
        print(f"numerical blow-up: {exc}", file=sys.stderr)
        return 3
    except WrapGuardError as exc:
        _persist(_partial_report(cfg, exc, started), cfg, out_dir, args.verbose)
        print(f"wrap guard: {exc}", file=sys.stderr)
        return 4
    _persist(report, cfg, out_dir, args.verbose)
    return report.exit_code()


def _sweep_spacings(cfg: ExperimentConfig) -> list[float]:
    """Refinement parameter per level: dt when it varies, else cell size."""
    levels = ladder_levels(cfg)
    dts = [e.dt for _, e in levels]
    if len(set(dts)) > 1:
        return dts
    return [2.0 * g.half_length / g.points_per_axis for g, _ in levels]


def _cmd_sweep(args: argparse.Namespace) -> int:
    cfg = read_config(args.config)
    levels = ladder_levels(cfg)
    if len(levels) < 2:
        raise ConfigError("sweep needs a [ladder] with at least two levels")
    out_dir = _output_dir(args, cfg)
    spacings = _sweep_spacings(cfg)
    reports: list[VerificationReport] = []
    started = time.perf_counter()
    for i, (gspec, espec) in enumerate(levels):
        level_cfg = dataclasses.replace(
            cfg, grid=gspec, evolution=espec, ladder=LadderSpec(), label=f"{cfg.name}-level{i}"
        )
        try:
            rep = run_experiment(level_cfg)
        except (BlowUpError, StepRejectedError) as exc:
            _persist(_partial_report(level_cfg, exc, started), cfg, out_dir, args.verbose)
            print(f"numerical blow-up at level {i}: {exc}", file=sys.stderr)
            return 3
        if rep.series is not None:
            os.makedirs(out_dir, exist_ok=True)
            rep.series.write_csv(os.path.join(out_dir, f"level{i}_series.csv"))
        reports.append(rep)

    residuals = []
    for rep in reports:
        val = next((rep.summary[k] for k in _RESIDUAL_KEYS if k in rep.summary), None)
        residuals.append(val)
    convergence = [
        {
            "level": i,
            "points_per_axis": g.points_per_axis,
            "dt": e.dt,
            "spacing": s,
            "verdict": rep.verdict,
            "residual": res,
        }
        for i, ((g, e), s, rep, res) in enumerate(zip(levels, spacings, reports, residuals))
    ]
    summary: dict = {"level_residuals": residuals}
    notes: tuple[str, ...] = ()
    if all(r is not None and r > 0 for r in residuals):
        order = fit_order(spacings, residuals)
        summary["fitted_order"] = order
        monotone = all(b <= a * 1.05 for a, b in zip(residuals, residuals[1:]))
        summary["residual_nonincreasing"] = monotone
    else:
        notes = ("no scalar residual exposed by this experiment kind; order fit skipped",)
    aggregate = VerificationReport(
        experiment=cfg.kind,
        params={"levels": len(levels)},
        verdict=worst_verdict([r.verdict for r in reports]),
        tolerances=reports[-1].tolerances,
        runtime_s=time.perf_counter() - started,
        convergence=convergence,
        summary=summary,
        notes=notes,
    )
    _persist(aggregate, cfg, out_dir, args.verbose)
    if args.verbose:
        for row in convergence:
            print(
                f"  level {row['level']}: N={row['points_per_axis']} dt={row['dt']:g}"
                f" residual={row['residual']} [{row['verdict']}]"
            )
    return aggregate.exit_code()


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bivirial",
        description="Dispersive-identity verification harness (config-driven experiments).",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in (("run", _cmd_run), ("sweep", _cmd_sweep)):
        p = sub.add_parser(name, help=f"{name} an experiment config")
        p.add_argument("config", help="path to an INI experiment config")
        p.add_argument("-o", "--output", default=None, help="output root directory")
        p.add_argument("-v", "--verbose", action="store_true")
        p.set_defaults(func=fn)
    p_list = sub.add_parser("list-experiments", help="print the registered experiment kinds")
    p_list.set_defaults(func=lambda args: print(list_experiments()) or 0)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 on --help; pass both through.
        return int(exc.code or 0)
    try:
        result = args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"invalid request: {exc}", file=sys.stderr)
        return 2
    return int(result or 0)


if __name__ == "__main__":
    sys.exit(main())
