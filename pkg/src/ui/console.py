"""
Console rendering for the delayed-rejection toolkit.
"""

import json
import sys
from typing import Optional

from src.models.chain_models import ChainSummary
from src.models.diagnostics_models import ChainDiagnostics
from src.models.experiment_models import ComparisonReport


def _fmt(value, spec: str = ".3f") -> str:
    return "-" if value is None else format(value, spec)


def display_header(title: str, subtitle: Optional[str] = None):
    """Display a section header."""
    print(f"\n== {title} ==")
    if subtitle:
        print(subtitle)


def display_summary(summary: ChainSummary, chain_path: str, summary_path: str):
    """Display the outcome of a sampling run."""
    display_header(
        f"Chain finished (mode {summary.mode.label})",
        f"{summary.n_iterations} iterations, {summary.total_target_evals} target evaluations",
    )

    # Acceptance by proposal kind
    for kind, stats in summary.acceptance_rates.items():
        if stats["proposed"]:
            print(
                f"  {kind:<9} proposed {stats['proposed']:>8}  "
                f"accepted {stats['accepted']:>8}  rate {_fmt(stats['rate'])}"
            )

    if summary.dr.entries:
        print(
            f"  DR entries {summary.dr.entries}, acceptances {summary.dr.acceptances}, "
            f"mean accepted stage {_fmt(summary.dr.mean_accepted_stage, '.1f')}, "
            f"{summary.dr.target_evals} evaluations inside DR"
        )

    for note in summary.notes:
        print(f"  note: {note}")

    print(f"  chain   -> {chain_path}")
    print(f"  summary -> {summary_path}")


def display_diagnostics(diagnostics: ChainDiagnostics, output_path: Optional[str] = None):
    """Display per-dimension autocorrelation results."""
    display_header(
        "Chain diagnostics",
        f"{diagnostics.n_samples} samples after discarding {diagnostics.discard}, "
        f"max lag {diagnostics.max_lag}",
    )
    print(f"  {'dim':<5}{'tau_int':>10}{'tau_exp':>10}{'window':>8}{'ESS':>12}  flags")
    for name, dim in diagnostics.dimensions.items():
        print(
            f"  {name:<5}{_fmt(dim.tau_int, '10.2f')}{_fmt(dim.tau_exp, '10.2f')}"
            f"{_fmt(dim.window, '8d')}{_fmt(dim.effective_sample_size, '12.1f')}  "
            f"{','.join(dim.flags) or '-'}"
        )
    if output_path:
        print(f"  report -> {output_path}")


def display_comparison(
    report: ComparisonReport,
    output_path: Optional[str] = None,
    ordering: Optional[dict] = None,
):
    """Display the per-mode comparison table at a shared evaluation budget."""
    display_header(
        f"Fixed-budget comparison ({report.budget} target evaluations)",
        f"dominant mode {report.dominant_center:g} +- {report.dominant_half_width:g} "
        f"on x{report.monitor_dim}",
    )
    print(
        f"  {'mode':<6}{'repeat':>7}{'iterations':>12}{'evals':>10}"
        f"{'tau_int':>10}{'transitions':>13}{'first pass':>12}"
    )
    for row in report.rows:
        print(
            f"  {row.label:<6}{row.repeat:>7}{row.n_iterations:>12}"
            f"{row.total_target_evals:>10}{_fmt(row.tau_int, '10.1f')}"
            f"{row.mode_transitions:>13}{_fmt(row.first_passage, '12d')}"
        )
    if ordering:
        print(
            f"  C mixes faster than B in {ordering['mixing']}/{ordering['repeats']} repeats, "
            f"arrives 10x sooner than A in {ordering['passage']}/{ordering['repeats']}"
        )
    if output_path:
        print(f"  comparison -> {output_path}")


def display_grid_result(kind: str, n_cells: int, cache_stats: Optional[dict], output_path: str):
    """Display the outcome of a calibration sweep."""
    display_header(f"Calibration grid: {kind}", f"{n_cells} cells")
    if cache_stats:
        print(f"  cache hits {cache_stats['hits']}, misses {cache_stats['misses']}")
    print(f"  grid -> {output_path}")


def display_error(payload: dict):
    """Write a machine-readable error document to stderr."""
    print(json.dumps(payload, indent=2, default=str), file=sys.stderr)


class ProgressCounter:
    """Textual progress counter printing every ``step`` percent."""

    def __init__(self, label: str, step: int = 10, stream=None):
        self.label = label
        self.step = step
        self.stream = stream or sys.stderr
        self._next = step

    def __call__(self, done: int, total: Optional[int]):
        if not total:
            return
        percent = 100 * done // total
        while percent >= self._next:
            print(f"{self.label}: {self._next}%", file=self.stream)
            self._next += self.step
