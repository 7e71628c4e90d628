"""Command-line entrypoint: argument parsing, logging setup and error-to-exit mapping."""

from __future__ import annotations

import argparse
from collections.abc import Sequence
import logging
from pathlib import Path
import sys

from pydantic import ValidationError as PydanticValidationError

from idealpoint.commands.analysis_command import run_diagnose, run_pivots, run_ppc, run_summarize
from idealpoint.commands.fit_command import run_fit
from idealpoint.commands.simulate_command import run_simulate
from idealpoint.src.errors import IdealPointError
from idealpoint.src.exporter import write_error
from idealpoint.src.schemas import (
    AnalysisSettings,
    AnchorInput,
    DataSettings,
    ErrorResponse,
    RunConfig,
    SamplerSettings,
    SynthSpec,
)
from idealpoint.src.settings import environment_defaults, load_run_config


logger = logging.getLogger("idealpoint")

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2


def _int_list(value: str) -> list[int]:
    try:
        return [int(item) for item in value.split(",") if item.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got '{value}'") from exc


def _float_list(value: str) -> list[float]:
    try:
        return [float(item) for item in value.split(",") if item.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got '{value}'") from exc


def _anchor(value: str) -> AnchorInput:
    legislator_id, sep, position = value.partition("=")
    if not sep or not legislator_id:
        raise argparse.ArgumentTypeError(f"anchors look like ID=POS[,POS...], got '{value}'")
    return AnchorInput(legislator_id=legislator_id, position=_float_list(position))


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--seed", type=int, help="random seed (overrides the config file)")
    common.add_argument("--out", help="output directory")
    common.add_argument("--threads", type=int, help="worker threads for chains; 1 is bit-reproducible")
    common.add_argument("--quiet", action="store_true", help="log warnings and errors only")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_options()
    parser = argparse.ArgumentParser(
        prog="idealpoint",
        description="Bayesian ideal point estimation for roll-call votes.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    fit = commands.add_parser("fit", parents=[common], help="estimate ideal points from a vote file")
    fit.add_argument("--data", help="roll-call file (overrides data.path)")
    fit.add_argument("--format", choices=["csv", "json"], help="roll-call file format")
    fit.add_argument("--anchor", action="append", type=_anchor, default=[], help="anchor as ID=POS[,POS...]")

    simulate = commands.add_parser("simulate", parents=[common], help="write a synthetic dataset with its truth")
    simulate.add_argument("--n", type=int, default=100, help="legislators")
    simulate.add_argument("--m", type=int, default=300, help="motions")
    simulate.add_argument("--d", type=int, default=1, help="dimensions")
    simulate.add_argument("--alpha-scale", type=float, default=1.0)
    simulate.add_argument("--mu-scale", type=float, default=0.5)
    simulate.add_argument("--missing-rate", type=float, default=0.0)
    simulate.add_argument("--zero-alpha-fraction", type=float, default=0.0)
    simulate.add_argument("--group-fraction", type=float, default=0.0)
    simulate.add_argument("--delta-values", type=_float_list, help="comma-separated party incentives, cycled")

    summarize = commands.add_parser("summarize", parents=[common], help="posterior summaries of a fit")
    summarize.add_argument("draws_dir")
    summarize.add_argument("--level", type=float, help="credible level (default: analysis.ci_level)")
    summarize.add_argument("--truth", help="truth_beta.csv for recovery correlation")

    pivots = commands.add_parser("pivots", parents=[common], help="rank occupancy of sorted ideal points")
    pivots.add_argument("draws_dir")
    pivots.add_argument("--ranks", type=_int_list, help="comma-separated 1-based ranks (default: analysis.ranks)")

    ppc = commands.add_parser("ppc", parents=[common], help="posterior predictive checks")
    ppc.add_argument("draws_dir")
    ppc.add_argument("--data", help="analysed vote file (defaults to the fit's filtered_votes.csv)")
    ppc.add_argument("--statistics", help="comma-separated statistic names")
    ppc.add_argument("--replicates", type=int, help="predictive replicates (default: analysis.ppc_replicates)")

    diagnose = commands.add_parser("diagnose", parents=[common], help="split R-hat and effective sample size")
    diagnose.add_argument("draws_dir")
    return parser


def _fit_config(args: argparse.Namespace, parser: argparse.ArgumentParser) -> RunConfig:
    if args.config:
        config = load_run_config(args.config, seed=args.seed, output_dir=args.out, threads=args.threads)
        updates: dict[str, object] = {}
        if args.data:
            updates["data"] = config.data.model_copy(update={"path": args.data})
        if args.format:
            updates["data"] = (updates.get("data") or config.data).model_copy(update={"format": args.format})
        if args.anchor:
            updates["anchors"] = args.anchor
        return config.model_copy(update=updates) if updates else config

    if not args.data:
        parser.error("fit needs a data path: pass --config or --data")
    if not args.anchor:
        parser.error("fit without --config needs at least one --anchor ID=POS")
    env = environment_defaults()
    sampler = SamplerSettings()
    seed = args.seed if args.seed is not None else env.get("seed")
    if seed is not None:
        sampler = sampler.model_copy(update={"seed": seed})
    return RunConfig(
        data=DataSettings(path=args.data, format=args.format or "csv"),
        anchors=args.anchor,
        sampler=sampler,
        output_dir=args.out or env.get("output_dir", "runs/latest"),
        threads=args.threads or env.get("threads", 1),
    )


def _analysis_settings(args: argparse.Namespace) -> AnalysisSettings:
    if not args.config:
        return AnalysisSettings()
    return load_run_config(args.config, seed=args.seed, output_dir=args.out, threads=args.threads).analysis


def _dispatch(args: argparse.Namespace, parser: argparse.ArgumentParser, context: dict[str, Path]) -> Path | None:
    if args.command == "fit":
        config = _fit_config(args, parser)
        context["out"] = Path(config.output_dir)
        result = run_fit(config)
        if result.summary.recovery is not None:
            print(f"recovery correlation: {result.summary.recovery.correlation:.4f}")
        return result.output_dir

    if args.command == "simulate":
        env = environment_defaults()
        seed = args.seed if args.seed is not None else env.get("seed", 0)
        spec = SynthSpec(
            n=args.n,
            m=args.m,
            d=args.d,
            alpha_scale=args.alpha_scale,
            mu_scale=args.mu_scale,
            missing_rate=args.missing_rate,
            zero_alpha_fraction=args.zero_alpha_fraction,
            seed=seed,
            group_fraction=args.group_fraction,
            delta_values=args.delta_values,
        )
        out = args.out or env.get("output_dir", "runs/synthetic")
        result = run_simulate(spec, out, threads=args.threads or env.get("threads", 1))
        print(result.config_path)
        return result.output_dir

    out = Path(args.out) if args.out else Path(args.draws_dir)
    analysis = _analysis_settings(args)
    if args.command == "summarize":
        level = args.level if args.level is not None else analysis.ci_level
        artifacts = run_summarize(args.draws_dir, out=out, level=level, truth_path=args.truth)
        if artifacts.recovery is not None:
            print(f"recovery correlation: {artifacts.recovery.correlation:.4f}")
    elif args.command == "pivots":
        ranks = args.ranks or analysis.ranks
        if not ranks:
            parser.error("pivots needs --ranks or analysis.ranks in the config")
        for report in run_pivots(args.draws_dir, ranks, out=out):
            leader, share = next(iter(report.occupancy.items()))
            print(f"rank {report.rank}: {leader} ({share:.3f})")
    elif args.command == "ppc":
        statistics = [item.strip() for item in args.statistics.split(",")] if args.statistics else analysis.ppc_statistics
        for report in run_ppc(
            args.draws_dir,
            data_path=args.data,
            statistics=statistics,
            replicates=args.replicates if args.replicates is not None else analysis.ppc_replicates,
            seed=args.seed,
            out=out,
        ):
            print(f"{report.statistic_name}: p = {report.p_value:.3f}")
    elif args.command == "diagnose":
        rows = run_diagnose(args.draws_dir, out=out)
        print(f"{len(rows)} parameters checked")
    return out


def _output_dir(args: argparse.Namespace, context: dict[str, Path]) -> Path | None:
    if "out" in context:
        return context["out"]
    if getattr(args, "out", None):
        return Path(args.out)
    if getattr(args, "draws_dir", None):
        return Path(args.draws_dir)
    return None


def _fail(response: ErrorResponse, out: Path | None) -> None:
    print(response.model_dump_json(), file=sys.stderr)
    if out is None:
        return
    try:
        write_error(response, out)
    except OSError:
        logger.debug("Could not write error.json to %s", out)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING if args.quiet else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        force=True,
    )
    if args.threads is not None and args.threads < 1:
        parser.error("--threads must be at least 1")

    context: dict[str, Path] = {}
    try:
        _dispatch(args, parser, context)
    except IdealPointError as exc:
        _fail(ErrorResponse(detail=exc.detail, code=exc.code), _output_dir(args, context))
        return exc.exit_code
    except PydanticValidationError as exc:
        _fail(ErrorResponse(detail=str(exc), code="VALIDATION_ERROR"), _output_dir(args, context))
        return EXIT_USAGE
    except FileNotFoundError as exc:
        _fail(ErrorResponse(detail=str(exc), code="FILE_NOT_FOUND"), _output_dir(args, context))
        return EXIT_USAGE
    except ValueError as exc:
        _fail(ErrorResponse(detail=str(exc), code="BAD_REQUEST"), _output_dir(args, context))
        return EXIT_USAGE
    except Exception:
        logger.exception("Unexpected failure")
        _fail(ErrorResponse(detail="Unexpected runtime error", code="INTERNAL_ERROR"), _output_dir(args, context))
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
