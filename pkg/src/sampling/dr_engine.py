"""
General n-stage delayed-rejection acceptance.

The alpha table is built one row per stage. Entry (j, k) belongs to the
sub-chain s_j .. s_k of the states s_0 = lambda, s_1 = beta_1, ... and holds
its numerator N, denominator D and acceptance alpha. Denominators extend the
entry above (same start, one stage shorter); numerators are accumulated from
the right of the row using the reverse-order alphas of the entries already
built. Every probability lives in log space with exact zeros counted
separately.
"""

import math
from typing import List, Optional, Tuple

import numpy as np

from src.models.dr_models import DrOutcome, TableEntry, ZeroAwareLog
from src.models.errors import (
    ConfigMismatchError,
    DimensionMismatchError,
    TargetEvaluationError,
)
from src.models.proposal_models import ProposalSpec
from src.sampling.proposal import CentralTracker, stage_proposal
from src.sampling.targets import as_target, evaluate_log_target
from src.utils.logging_utils import get_logger

logger = get_logger(__name__)

LN2 = math.log(2.0)


def _log_acceptance(
    num_log: float, num_zeros: int, den_log: float, den_zeros: int
) -> Tuple[float, bool]:
    if num_zeros > den_zeros:
        return -math.inf, False
    if den_zeros > num_zeros:
        return 0.0, True
    ratio = num_log - den_log
    if ratio >= 0.0:
        return 0.0, True
    return ratio, False


def _log_acceptance_rows(num_log, num_zeros, den_log, den_zeros):
    ratio = num_log - den_log
    log_alpha = np.where(
        num_zeros > den_zeros,
        -np.inf,
        np.where(den_zeros > num_zeros, 0.0, np.minimum(ratio, 0.0)),
    )
    alpha_is_one = (den_zeros > num_zeros) | ((den_zeros == num_zeros) & (ratio >= 0.0))
    return log_alpha, alpha_is_one


def _log_one_minus(log_alpha: float, alpha_is_one: bool) -> Tuple[float, int]:
    """log(1 - alpha) as (magnitude, zero count)."""
    if alpha_is_one:
        return 0.0, 1
    if log_alpha == -math.inf:
        return 0.0, 0
    if log_alpha > -LN2:
        return math.log(-math.expm1(log_alpha)), 0
    return math.log1p(-math.exp(log_alpha)), 0


def _log_one_minus_rows(log_alpha: np.ndarray, alpha_is_one: np.ndarray):
    with np.errstate(divide="ignore", invalid="ignore"):
        near = np.log(-np.expm1(log_alpha))
        far = np.log1p(-np.exp(log_alpha))
    magnitude = np.where(alpha_is_one, 0.0, np.where(log_alpha > -LN2, near, far))
    return magnitude, alpha_is_one.astype(np.int64)


def _split(values: np.ndarray):
    """Log-densities to (magnitude, zero count) arrays; -inf is one exact zero."""
    zero = np.isneginf(values)
    return np.where(zero, 0.0, values), zero.astype(np.int64)


def acceptance_alpha(num: ZeroAwareLog, den: ZeroAwareLog) -> Tuple[float, bool]:
    """
    min(1, num / den) under zero-count semantics.

    Args:
        num: Numerator in zero-aware log form
        den: Denominator in zero-aware log form

    Returns:
        (alpha, alpha_is_one); alpha_is_one is exact, never a tolerance test
    """
    log_alpha, is_one = _log_acceptance(
        num.log_magnitude, num.zero_count, den.log_magnitude, den.zero_count
    )
    return (1.0 if is_one else math.exp(log_alpha)), is_one


class MixtureKernel:
    """
    Proposal densities for one table row under the 3-Gaussian stage rule.

    For the sub-chain s_j .. s_k with m = k - j >= 2 stages, the forward
    proposal of s_k and the reverse proposal of s_j share the anchor
    mean(s_{j+1} .. s_{k-1}); a single-stage sub-chain uses q_a on the
    neighbouring state.
    """

    def __init__(self, spec: ProposalSpec):
        self.spec = spec
        self.ndim = spec.ndim
        self.big_jump = stage_proposal(spec, 1)
        self.small_step = stage_proposal(spec, 2)

    def sample(self, rng: np.random.Generator, stage: int, anchor: np.ndarray) -> np.ndarray:
        proposal = self.big_jump if stage == 1 else self.small_step
        return proposal.sample(rng, anchor)

    def row_logpdfs(self, states: np.ndarray, k: int) -> Tuple[np.ndarray, np.ndarray]:
        """
        Forward and reverse proposal log-densities for every entry of row k.

        Args:
            states: s_0 .. s_k, shape (k + 1, ndim)
            k: Row index (stage of the newest state)

        Returns:
            (forward, reverse), each of length k and indexed by sub-chain start j
        """
        newest = states[k]
        single = self.big_jump.logpdf(states[k - 1], newest)
        if k == 1:
            return np.array([single]), np.array([single])
        inner = states[1:k]
        suffix_sums = np.cumsum(inner[::-1], axis=0)[::-1]
        counts = np.arange(k - 1, 0, -1)[:, np.newaxis]
        anchors = suffix_sums / counts
        forward = self.small_step.logpdf(anchors, newest)
        reverse = self.small_step.logpdf(anchors, states[: k - 1])
        return np.append(forward, single), np.append(reverse, single)


class _Row:
    """Columns of one table row, indexed by sub-chain start."""

    __slots__ = ("num_log", "num_zeros", "den_log", "den_zeros", "log_alpha", "alpha_is_one")

    def __init__(self, num_log, num_zeros, den_log, den_zeros, log_alpha, alpha_is_one):
        self.num_log = num_log
        self.num_zeros = num_zeros
        self.den_log = den_log
        self.den_zeros = den_zeros
        self.log_alpha = log_alpha
        self.alpha_is_one = alpha_is_one

    def entry(self, j: int) -> TableEntry:
        return TableEntry(
            log_num=ZeroAwareLog(float(self.num_log[j]), int(self.num_zeros[j])),
            log_den=ZeroAwareLog(float(self.den_log[j]), int(self.den_zeros[j])),
            log_alpha=float(self.log_alpha[j]),
            alpha_is_one=bool(self.alpha_is_one[j]),
        )


class AlphaTable:
    """
    Triangular table of delayed-rejection acceptance quantities.

    With ``history=False`` only the previous row and the leftmost entry of
    every row are retained, which keeps long excursions at linear memory.

    ``n_pair_evals`` counts table entries, one forward/reverse density pair
    per entry, so row k adds k. It is not the number of ``logpdf`` calls: the
    single-stage entry shares one q_a density between both directions, so a
    row evaluates 2k - 1 densities.
    """

    def __init__(
        self,
        kernel,
        initial_state,
        log_target_initial: float,
        history: bool = True,
    ):
        initial_state = np.asarray(initial_state, dtype=float).reshape(-1)
        if len(initial_state) != kernel.ndim:
            raise DimensionMismatchError("initial state and proposal differ in dimension")
        self.kernel = kernel
        self.history = history
        self._states = np.empty((8, kernel.ndim))
        self._states[0] = initial_state
        self._log_targets: List[float] = [float(log_target_initial)]
        self._rows: List[_Row] = []
        self._previous: Optional[_Row] = None
        self._leftmost: List[TableEntry] = []
        self.n_pair_evals = 0

    @property
    def n_rows(self) -> int:
        return len(self._leftmost)

    @property
    def states(self) -> np.ndarray:
        return self._states[: self.n_rows + 1]

    @property
    def log_targets(self) -> Tuple[float, ...]:
        return tuple(self._log_targets)

    def copy(self) -> "AlphaTable":
        twin = AlphaTable.__new__(AlphaTable)
        twin.kernel = self.kernel
        twin.history = self.history
        twin._states = self._states.copy()
        twin._log_targets = list(self._log_targets)
        # Rows are never mutated after construction
        twin._rows = list(self._rows)
        twin._previous = self._previous
        twin._leftmost = list(self._leftmost)
        twin.n_pair_evals = self.n_pair_evals
        return twin

    def _append_state(self, new_state: np.ndarray) -> None:
        size = self.n_rows + 1
        if size == len(self._states):
            grown = np.empty((2 * size, self.kernel.ndim))
            grown[:size] = self._states[:size]
            self._states = grown
        self._states[size] = new_state

    def push(self, new_state, log_target_new: float) -> float:
        """
        Add the next proposed state as a new row and return its stage alpha.

        Args:
            new_state: beta_k
            log_target_new: log pi(beta_k); -inf is allowed (zero density)

        Returns:
            alpha of the leftmost entry, the stage-k acceptance probability
        """
        new_state = np.asarray(new_state, dtype=float).reshape(-1)
        if len(new_state) != self.kernel.ndim:
            raise DimensionMismatchError("new state and proposal differ in dimension")
        log_target_new = float(log_target_new)
        if math.isnan(log_target_new) or log_target_new == math.inf:
            raise TargetEvaluationError(f"log target {log_target_new} is not usable")

        k = self.n_rows + 1
        self._append_state(new_state)
        self._log_targets.append(log_target_new)
        forward, reverse = self.kernel.row_logpdfs(self._states[: k + 1], k)
        self.n_pair_evals += k
        fwd_log, fwd_zeros = _split(np.asarray(forward, dtype=float))
        rev_log, rev_zeros = _split(np.asarray(reverse, dtype=float))

        den_log = np.empty(k)
        den_zeros = np.empty(k, dtype=np.int64)
        start_log, start_zeros = _split(np.array(self._log_targets[k - 1]))
        den_log[k - 1] = start_log + fwd_log[k - 1]
        den_zeros[k - 1] = start_zeros + fwd_zeros[k - 1]
        if k > 1:
            above = self._previous
            miss_log, miss_zeros = _log_one_minus_rows(above.log_alpha, above.alpha_is_one)
            den_log[: k - 1] = above.den_log + miss_log + fwd_log[: k - 1]
            den_zeros[: k - 1] = above.den_zeros + miss_zeros + fwd_zeros[: k - 1]

        # Sequential right-to-left scan on plain lists; numpy scalars are slow here
        den_list, den_zero_list = den_log.tolist(), den_zeros.tolist()
        rev_list, rev_zero_list = rev_log.tolist(), rev_zeros.tolist()
        num_list = [0.0] * k
        num_zero_list = [0] * k
        end_log, end_zeros = _split(np.array(log_target_new))
        acc_log = float(end_log) + rev_list[k - 1]
        acc_zeros = int(end_zeros) + rev_zero_list[k - 1]
        num_list[k - 1] = acc_log
        num_zero_list[k - 1] = acc_zeros
        for j in range(k - 2, -1, -1):
            # Reverse alpha of sub-chain j+1..k is D/N of that entry
            rev_alpha, rev_one = _log_acceptance(
                den_list[j + 1], den_zero_list[j + 1], acc_log, acc_zeros
            )
            miss_log, miss_zeros = _log_one_minus(rev_alpha, rev_one)
            acc_log += miss_log + rev_list[j]
            acc_zeros += miss_zeros + rev_zero_list[j]
            num_list[j] = acc_log
            num_zero_list[j] = acc_zeros
        num_log = np.array(num_list)
        num_zeros = np.array(num_zero_list, dtype=np.int64)

        log_alpha, alpha_is_one = _log_acceptance_rows(num_log, num_zeros, den_log, den_zeros)
        row = _Row(num_log, num_zeros, den_log, den_zeros, log_alpha, alpha_is_one)
        self._previous = row
        if self.history:
            self._rows.append(row)
        leftmost = row.entry(0)
        self._leftmost.append(leftmost)
        return leftmost.alpha

    def _check_row(self, k: int) -> None:
        if not 1 <= k <= self.n_rows:
            raise IndexError(f"row {k} outside 1..{self.n_rows}")

    def row(self, k: int) -> List[TableEntry]:
        """Entries of row k ordered by sub-chain start j = 0 .. k-1."""
        self._check_row(k)
        if self.history:
            source = self._rows[k - 1]
        elif k == self.n_rows:
            source = self._previous
        else:
            raise IndexError(f"row {k} was not retained; build the table with history=True")
        return [source.entry(j) for j in range(k)]

    def entry(self, j: int, k: int) -> TableEntry:
        if not 0 <= j < k:
            raise IndexError(f"sub-chain start {j} outside row {k}")
        if j == 0:
            self._check_row(k)
            return self._leftmost[k - 1]
        return self.row(k)[j]

    def leftmost(self, k: int) -> TableEntry:
        self._check_row(k)
        return self._leftmost[k - 1]


def extend_table(
    table: AlphaTable,
    new_state,
    log_target_new: float,
    spec: Optional[ProposalSpec] = None,
) -> Tuple[AlphaTable, float]:
    """
    Non-mutating row extension.

    Args:
        table: Table holding rows 1 .. k-1
        new_state: beta_k
        log_target_new: log pi(beta_k)
        spec: When given, must match the table's proposal spec

    Returns:
        (extended copy, stage-k alpha)
    """
    if spec is not None and getattr(table.kernel, "spec", spec) != spec:
        raise ConfigMismatchError("proposal spec differs from the one the table was built with")
    extended = table.copy()
    alpha = extended.push(new_state, log_target_new)
    return extended, alpha


def forward_reverse_ratio(table: AlphaTable, row: int) -> float:
    """N / D of the leftmost entry of ``row``; inf when only D holds an exact zero."""
    entry = table.leftmost(row)
    num, den = entry.log_num, entry.log_den
    if num.zero_count > den.zero_count:
        return 0.0
    if den.zero_count > num.zero_count:
        return math.inf
    return math.exp(num.log_magnitude - den.log_magnitude)


def dr_step(
    rng: np.random.Generator,
    current,
    log_target_current: float,
    target,
    spec: ProposalSpec,
    n_dr: int,
    history: bool = False,
) -> DrOutcome:
    """
    Run one delayed-rejection excursion from ``current``.

    Stage 1 proposes from q_a at the current state, later stages from q_b at
    the running mean of the rejected candidates. Each stage builds its table
    row first and then draws the acceptance uniform.

    Args:
        rng: Random stream
        current: Present state lambda
        log_target_current: log pi(lambda), finite
        target: TargetSpec or built target
        spec: Proposal description
        n_dr: Maximum number of stages
        history: Keep every table row (tests); otherwise rolling storage

    Returns:
        DrOutcome with the accepted state and stage, or no state if every
        stage was rejected
    """
    if n_dr < 1:
        raise ValueError("n_dr must be at least 1")
    target = as_target(target)
    kernel = MixtureKernel(spec)
    if kernel.ndim != target.ndim:
        raise DimensionMismatchError(
            f"proposal spec has {kernel.ndim} dimensions, target has {target.ndim}"
        )
    current = np.asarray(current, dtype=float).reshape(-1)
    table = AlphaTable(kernel, current, log_target_current, history=history)
    tracker = CentralTracker(kernel.ndim)

    for stage in range(1, n_dr + 1):
        anchor = current if stage == 1 else tracker.running_mean
        candidate = kernel.sample(rng, stage, anchor)
        log_target = evaluate_log_target(target, candidate)
        alpha = table.push(candidate, log_target)
        if rng.random() < alpha:
            logger.debug(
                "DR accepted at stage %d (%d pair evaluations)", stage, table.n_pair_evals
            )
            return DrOutcome(
                accepted_state=candidate,
                accepted_stage=stage,
                log_target=log_target,
                n_target_evals=stage,
                n_proposal_evals=table.n_pair_evals,
                stages_run=stage,
            )
        tracker.push(candidate)

    logger.debug("DR rejected all %d stages", n_dr)
    return DrOutcome(
        n_target_evals=n_dr,
        n_proposal_evals=table.n_pair_evals,
        stages_run=n_dr,
    )
