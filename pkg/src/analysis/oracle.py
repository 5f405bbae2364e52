"""
Brute-force verifiers for the delayed-rejection engine.

direct_alpha evaluates the stage acceptance probability literally, recursing
into every nested sub-chain alpha with no reuse. build_discrete_kernel
enumerates every proposal path and acceptance branch of an excursion on a
small lattice and returns the exact transition matrix.
"""

import math
from typing import List, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from src.models.errors import DimensionMismatchError, OracleLimitError
from src.models.proposal_models import ProposalSpec
from src.models.target_models import DiscreteLattice
from src.sampling.dr_engine import AlphaTable, extend_table
from src.sampling.proposal import stage_proposal
from src.sampling.targets import as_target, build_target

MAX_DIRECT_STAGES = 5
MAX_LATTICE_POINTS = 31
MAX_KERNEL_STAGES = 3

# (log magnitude, number of exact zero factors)
LogValue = Tuple[float, int]


def _as_log_value(log_value: float) -> LogValue:
    return (0.0, 1) if log_value == -math.inf else (float(log_value), 0)


def _ratio(num: LogValue, den: LogValue) -> Tuple[float, bool]:
    if num[1] != den[1]:
        return (-math.inf, False) if num[1] > den[1] else (0.0, True)
    diff = num[0] - den[0]
    return (0.0, True) if diff >= 0 else (diff, False)


def _complement(log_alpha: float, is_one: bool) -> LogValue:
    if is_one:
        return 0.0, 1
    return math.log(-math.expm1(log_alpha)), 0


class _DirectEvaluator:
    def __init__(self, target, spec: ProposalSpec):
        self.target = as_target(target)
        self.spec = spec

    def log_q(self, path: Sequence[np.ndarray], i: int) -> float:
        """Stage-i proposal of path[i] given path[:i]."""
        if i == 1:
            return stage_proposal(self.spec, 1).logpdf(path[0], path[1])
        anchor = np.mean(np.stack(path[1:i]), axis=0)
        return stage_proposal(self.spec, i).logpdf(anchor, path[i])

    def log_path_weight(self, path: Sequence[np.ndarray]) -> LogValue:
        """pi(path[0]) times every proposal and rejection factor along the path."""
        magnitude, zeros = _as_log_value(float(self.target.log_density(path[0])))
        m = len(path) - 1
        for i in range(1, m + 1):
            q_mag, q_zeros = _as_log_value(self.log_q(path, i))
            magnitude += q_mag
            zeros += q_zeros
            if i < m:
                c_mag, c_zeros = _complement(*self.log_alpha(path[: i + 1]))
                magnitude += c_mag
                zeros += c_zeros
        return magnitude, zeros

    def terms(self, path: Sequence[np.ndarray]) -> Tuple[LogValue, LogValue]:
        return self.log_path_weight(path[::-1]), self.log_path_weight(path)

    def log_alpha(self, path: Sequence[np.ndarray]) -> Tuple[float, bool]:
        num, den = self.terms(path)
        return _ratio(num, den)


def _as_path(states) -> List[np.ndarray]:
    path = [np.atleast_1d(np.asarray(s, dtype=float)) for s in states]
    if len(path) < 2:
        raise ValueError("need lambda and at least one proposed state")
    if len(path) - 1 > MAX_DIRECT_STAGES:
        raise OracleLimitError(
            f"direct evaluation is limited to {MAX_DIRECT_STAGES} stages, got {len(path) - 1}"
        )
    return path


def direct_log_alpha(states, target, spec: ProposalSpec) -> Tuple[float, bool]:
    """(log alpha, alpha_is_one) of the last stage, evaluated from scratch."""
    return _DirectEvaluator(target, spec).log_alpha(_as_path(states))


def direct_alpha(states, target, spec: ProposalSpec) -> float:
    """
    Stage-k acceptance probability for lambda, beta_1 .. beta_k.

    Args:
        states: Sequence of k + 1 points, lambda first; k <= 5
        target: TargetSpec or built target
        spec: Proposal description

    Returns:
        alpha_k in [0, 1]
    """
    log_alpha, is_one = direct_log_alpha(states, target, spec)
    return 1.0 if is_one else math.exp(log_alpha)


def direct_terms(states, target, spec: ProposalSpec) -> Tuple[LogValue, LogValue]:
    """Numerator and denominator of the last stage as (log magnitude, zeros) pairs."""
    return _DirectEvaluator(target, spec).terms(_as_path(states))


class DiscreteKernel(BaseModel):
    """Row-stochastic transition matrix over lattice points."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    states: np.ndarray
    matrix: np.ndarray

    @model_validator(mode="after")
    def _check_stochastic(self):
        n = len(self.states)
        if self.matrix.shape != (n, n):
            raise ValueError(f"matrix must be {n}x{n}")
        if np.any(self.matrix < 0):
            raise ValueError("transition probabilities must be non-negative")
        if np.max(np.abs(self.matrix.sum(axis=1) - 1.0)) > 1e-12:
            raise ValueError("rows must sum to 1")
        return self


def _lattice_proposal(points: np.ndarray, pitch: float, spec: ProposalSpec, stage: int):
    """Symmetric discretized proposal; the diagonal takes the remaining mass."""
    distances = np.abs(points[:, np.newaxis] - points[np.newaxis, :])
    matrix = np.exp(stage_proposal(spec, stage).logpdf(0.0, distances[..., np.newaxis])) * pitch
    np.fill_diagonal(matrix, 0.0)
    largest = matrix.sum(axis=1).max()
    if largest > 1.0:
        # One lattice-wide factor keeps the matrix symmetric
        matrix /= largest
    np.fill_diagonal(matrix, np.clip(1.0 - matrix.sum(axis=1), 0.0, None))
    return matrix


class LatticeKernel:
    """
    Table kernel for proposals discretized onto a lattice.

    The running-mean anchor is snapped to the nearest lattice index with
    exact integer arithmetic (halves round up), so forward and reverse paths
    always agree on it.
    """

    ndim = 1

    def __init__(self, lattice: DiscreteLattice, spec: ProposalSpec):
        if spec.ndim != 1:
            raise DimensionMismatchError("lattice kernels need a 1-dimension proposal spec")
        self.target = build_target(lattice)
        self.points = self.target.points
        self.big_jump = _lattice_proposal(self.points, lattice.pitch, spec, 1)
        self.small_step = _lattice_proposal(self.points, lattice.pitch, spec, 2)
        with np.errstate(divide="ignore"):
            self.log_big_jump = np.log(self.big_jump)
            self.log_small_step = np.log(self.small_step)

    @staticmethod
    def anchor_index(indices: Sequence[int]) -> int:
        total, count = int(sum(indices)), len(indices)
        return (2 * total + count) // (2 * count)

    def indices(self, states: np.ndarray) -> np.ndarray:
        idx = self.target.index_of(np.asarray(states, dtype=float)[:, 0])
        if np.any(idx < 0):
            raise ValueError("states must lie on the lattice")
        return idx

    def row_logpdfs(self, states: np.ndarray, k: int) -> Tuple[np.ndarray, np.ndarray]:
        idx = self.indices(states[: k + 1])
        single = self.log_big_jump[idx[k - 1], idx[k]]
        forward = np.empty(k)
        reverse = np.empty(k)
        forward[k - 1] = reverse[k - 1] = single
        for j in range(k - 1):
            anchor = self.anchor_index(idx[j + 1 : k])
            forward[j] = self.log_small_step[anchor, idx[k]]
            reverse[j] = self.log_small_step[anchor, idx[j]]
        return forward, reverse


def build_discrete_kernel(
    lattice: DiscreteLattice, spec: ProposalSpec, n_dr: int
) -> DiscreteKernel:
    """
    Exact transition matrix of the delayed-rejection chain on a lattice.

    Every proposal path of up to n_dr stages is enumerated; the probability
    of rejecting all stages stays on the diagonal.

    Raises:
        OracleLimitError: more than 31 points or more than 3 stages
    """
    n = len(lattice.points)
    if n > MAX_LATTICE_POINTS:
        raise OracleLimitError(f"lattice has {n} points; the limit is {MAX_LATTICE_POINTS}")
    if not 1 <= n_dr <= MAX_KERNEL_STAGES:
        raise OracleLimitError(f"n_dr must lie in 1..{MAX_KERNEL_STAGES}, got {n_dr}")

    kernel = LatticeKernel(lattice, spec)
    target = kernel.target
    points = kernel.points
    matrix = np.zeros((n, n))

    def explore(origin: int, table: AlphaTable, path: List[int], weight: float) -> None:
        stage = len(path)
        if stage == 1:
            row = kernel.big_jump[path[0]]
        else:
            row = kernel.small_step[LatticeKernel.anchor_index(path[1:])]
        for c in np.flatnonzero(row):
            extended, alpha = extend_table(table, [points[c]], target.log_probabilities[c])
            reached = weight * row[c]
            matrix[origin, c] += reached * alpha
            rest = reached * (1.0 - alpha)
            if stage < n_dr:
                explore(origin, extended, path + [int(c)], rest)
            else:
                matrix[origin, origin] += rest

    for x in range(n):
        if target.probabilities[x] == 0:
            matrix[x, x] = 1.0
            continue
        table = AlphaTable(kernel, [points[x]], target.log_probabilities[x], history=False)
        explore(x, table, [x], 1.0)

    return DiscreteKernel(states=points.copy(), matrix=matrix)


def discrete_mh_kernel(lattice: DiscreteLattice, spec: ProposalSpec) -> DiscreteKernel:
    """Closed-form Metropolis-Hastings kernel with the discretized q_a proposal."""
    kernel = LatticeKernel(lattice, spec)
    pi = kernel.target.probabilities
    proposal = kernel.big_jump
    with np.errstate(divide="ignore", invalid="ignore"):
        acceptance = np.minimum(1.0, pi[np.newaxis, :] / pi[:, np.newaxis])
    matrix = np.where(pi[:, np.newaxis] > 0, proposal * np.nan_to_num(acceptance), 0.0)
    np.fill_diagonal(matrix, 0.0)
    np.fill_diagonal(matrix, 1.0 - matrix.sum(axis=1))
    return DiscreteKernel(states=kernel.points.copy(), matrix=matrix)


def stationarity_residual(kernel, pi) -> Tuple[float, float]:
    """
    Max-norm residuals of pi P = pi and of detailed balance.

    Args:
        kernel: DiscreteKernel or square transition matrix
        pi: Target weights (normalized here)

    Returns:
        (max |pi P - pi|, max |pi_i P_ij - pi_j P_ji|)
    """
    matrix = kernel.matrix if isinstance(kernel, DiscreteKernel) else np.asarray(kernel, float)
    pi = np.asarray(pi, dtype=float)
    if matrix.ndim != 2 or matrix.shape != (len(pi), len(pi)):
        raise DimensionMismatchError(
            f"kernel shape {matrix.shape} does not match {len(pi)} probabilities"
        )
    pi = pi / pi.sum()
    flow = pi[:, np.newaxis] * matrix
    stationarity = float(np.max(np.abs(pi @ matrix - pi)))
    balance = float(np.max(np.abs(flow - flow.T)))
    return stationarity, balance
