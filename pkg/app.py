"""
Delayed-rejection MCMC toolkit, command-line front end.

Subcommands:
1. sample: run one chain from an experiment config
2. calibrate: sweep an asymmetric-proposal, central-proposal-evolution or validity loss map
3. diagnose: autocorrelation report for a chain file
4. compare: baseline and delayed-rejection modes at a shared evaluation budget

Exit codes: 0 ok, 1 invalid configuration or input, 2 runtime failure.
"""

import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence, Type, TypeVar

from dotenv import load_dotenv
from pydantic import BaseModel, ValidationError

from src.analysis import compare_modes, loss_grid, ordering_counts, summarize_chain
from src.models import CalibrationConfig, CompareConfig, ExperimentConfig
from src.sampling import run_chain, summarize_run
from src.ui import (
    ProgressCounter,
    display_comparison,
    display_diagnostics,
    display_error,
    display_grid_result,
    display_summary,
)
from src.utils import (
    GridCache,
    configure_logging,
    content_hash,
    get_logger,
    read_states,
    write_chain_csv,
    write_json,
    write_loss_grid,
)

# Load environment variables
load_dotenv()

logger = get_logger("app")

ConfigT = TypeVar("ConfigT", bound=BaseModel)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2


def load_config(model: Type[ConfigT], path: str, **overrides) -> ConfigT:
    """Parse a JSON config file, applying command-line overrides before validation."""
    text = Path(path).read_text(encoding="utf-8")
    if not overrides:
        return model.model_validate_json(text)
    # Re-validate so overrides obey the same constraints as file values
    payload = model.model_validate_json(text).model_dump(mode="json")
    for dotted, value in overrides.items():
        section = payload
        *parents, leaf = dotted.split(".")
        for key in parents:
            section = section[key]
        section[leaf] = value
    return model.model_validate(payload)


def _seed_override(args, key: str) -> dict:
    return {} if args.seed is None else {key: args.seed}


def cmd_sample(args) -> int:
    """Run one chain and write its CSV and JSON summary."""
    config = load_config(ExperimentConfig, args.config, **_seed_override(args, "run.seed"))
    chain_config = config.to_chain_config()
    out_dir = Path(args.out or config.output.directory)

    chain = run_chain(chain_config, progress=ProgressCounter("sample"))
    config_hash = content_hash(chain_config)
    chain_path = write_chain_csv(chain, out_dir / config.output.chain_file, config_hash)
    summary = summarize_run(chain, chain_config)
    summary_path = write_json(summary, out_dir / config.output.summary_file)

    display_summary(summary, str(chain_path), str(summary_path))
    return EXIT_OK


def cmd_calibrate(args) -> int:
    """Evaluate a loss map, reusing cached cells."""
    config = load_config(CalibrationConfig, args.config, **_seed_override(args, "seed"))
    cache = GridCache.from_env(args.cache)
    out_dir = Path(args.out or "output")

    grid = loss_grid(
        config, cache=cache, threads=args.threads, progress=ProgressCounter("calibrate")
    )
    violations = grid.positivity_violations()
    if violations:
        logger.warning("%d cells exceed zero by more than 3 standard errors", violations)

    name = config.name or f"{config.kind.value}_grid"
    path = write_loss_grid(grid, out_dir / f"{name}.csv", content_hash(config))
    display_grid_result(
        config.kind.value, grid.values.size, cache.stats if cache else None, str(path)
    )
    return EXIT_OK


def cmd_diagnose(args) -> int:
    """Per-dimension autocorrelation report of a chain file."""
    chain_path = Path(args.chain)
    states = read_states(chain_path)
    diagnostics = summarize_chain(
        states, discard=args.discard, max_lag=args.max_lag, source=chain_path.name
    )
    out_dir = Path(args.out) if args.out else chain_path.parent
    path = write_json(diagnostics, out_dir / f"{chain_path.stem}_diagnostics.json")
    display_diagnostics(diagnostics, str(path))
    return EXIT_OK


def cmd_compare(args) -> int:
    """Modes A, B and C at a shared target-evaluation budget."""
    overrides = _seed_override(args, "seed")
    if args.repeats is not None:
        overrides["repeats"] = args.repeats
    config = load_config(CompareConfig, args.config, **overrides)
    out_dir = Path(args.out or config.output.directory)

    report = compare_modes(config, threads=args.threads, progress=ProgressCounter("compare"))
    path = write_json(report, out_dir / config.output.summary_file)
    display_comparison(report, str(path), ordering=ordering_counts(report))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="drmc", description="Delayed-rejection MCMC sampling and calibration"
    )
    parser.add_argument("--log-level", default=None, help="overrides DRMC_LOG_LEVEL")
    subparsers = parser.add_subparsers(dest="command", required=True)

    sample = subparsers.add_parser("sample", help="run one chain")
    sample.add_argument("--config", required=True)
    sample.add_argument("--seed", type=int, default=None)
    sample.add_argument("--out", default=None)
    sample.set_defaults(handler=cmd_sample)

    calibrate = subparsers.add_parser("calibrate", help="sweep a loss map")
    calibrate.add_argument("--config", required=True)
    calibrate.add_argument("--seed", type=int, default=None)
    calibrate.add_argument("--out", default=None)
    calibrate.add_argument("--threads", type=int, default=1)
    calibrate.add_argument("--cache", default=None, help="defaults to DRMC_CACHE_DIR")
    calibrate.set_defaults(handler=cmd_calibrate)

    diagnose = subparsers.add_parser("diagnose", help="autocorrelation report")
    diagnose.add_argument("chain")
    diagnose.add_argument("--discard", type=int, default=0)
    diagnose.add_argument("--max-lag", type=int, default=None)
    diagnose.add_argument("--out", default=None)
    diagnose.set_defaults(handler=cmd_diagnose)

    compare = subparsers.add_parser("compare", help="fixed-budget mode comparison")
    compare.add_argument("--config", required=True)
    compare.add_argument("--seed", type=int, default=None)
    compare.add_argument("--repeats", type=int, default=None)
    compare.add_argument("--out", default=None)
    compare.add_argument("--threads", type=int, default=1)
    compare.set_defaults(handler=cmd_compare)

    return parser


def _validation_issues(error: ValidationError) -> list:
    return [
        {"key": ".".join(str(part) for part in issue["loc"]), "message": issue["msg"]}
        for issue in error.errors()
    ]


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Parse arguments, dispatch the subcommand and map failures to exit codes."""
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)

    try:
        return args.handler(args)
    except ValidationError as e:
        display_error({"error": "validation", "issues": _validation_issues(e)})
        return EXIT_VALIDATION
    except ValueError as e:
        display_error(
            {"error": "validation", "issues": [{"key": None, "message": str(e)}]}
        )
        return EXIT_VALIDATION
    except Exception as e:
        logger.exception("Command %s failed", args.command)
        display_error({"error": "runtime", "type": type(e).__name__, "message": str(e)})
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
