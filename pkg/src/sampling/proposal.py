"""
Symmetric 3-Gaussian proposal densities and the running-mean central location.
"""

import math
from functools import lru_cache
from typing import Optional, Sequence, Union

import numpy as np
from scipy.special import logsumexp

from src.models.errors import DimensionMismatchError
from src.models.proposal_models import ProposalRole, ProposalSpec, ThreeGaussianParams

LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)

ArrayLike = Union[float, Sequence[float], np.ndarray]


def _gaussian_log_kernel(d, sigma):
    return -0.5 * (d / sigma) ** 2 - np.log(sigma) - LOG_SQRT_2PI


def mixture_logpdf(offset, sigma1, sigma2, mu, weight_center) -> np.ndarray:
    """
    Log-density of the 3-Gaussian mixture at ``offset`` from its centre.

    Evaluated on |offset| so that q(c, c + d) == q(c, c - d) holds exactly.
    Components with zero weight enter as -inf and drop out of the log-sum-exp.

    Args:
        offset: x - center, any shape
        sigma1: Width of the central Gaussian (broadcasts against offset)
        sigma2: Width of the side Gaussians
        mu: Distance of the side modes from the centre
        weight_center: Weight N of the central Gaussian

    Returns:
        Array of log-densities with the broadcast shape of the inputs
    """
    d = np.abs(np.asarray(offset, dtype=float))
    w = np.asarray(weight_center, dtype=float)
    with np.errstate(divide="ignore"):
        log_wc = np.log(w)
        log_ws = np.log((1.0 - w) / 2.0)
    central = log_wc + _gaussian_log_kernel(d, sigma1)
    near = log_ws + _gaussian_log_kernel(d - mu, sigma2)
    far = log_ws + _gaussian_log_kernel(d + mu, sigma2)
    return logsumexp(np.stack(np.broadcast_arrays(central, near, far)), axis=0)


def mixture_offsets(rng: np.random.Generator, sigma1, sigma2, mu, weight_center, shape):
    """
    Draw offsets from the mixture.

    One uniform picks the component: central with probability N, otherwise the
    side is chosen uniformly at random. One standard normal gives the deviate.
    """
    u = rng.random(shape)
    z = rng.standard_normal(shape)
    w = np.asarray(weight_center, dtype=float)
    central = u < w
    sign = np.where(u < w + (1.0 - w) / 2.0, 1.0, -1.0)
    return np.where(central, sigma1 * z, sign * mu + sigma2 * z)


def three_gaussian_logpdf(center: ArrayLike, x: ArrayLike, params: ThreeGaussianParams):
    """
    Log of the symmetric 3-Gaussian mixture centred at ``center``, evaluated at ``x``.

    Args:
        center: Mixture centre
        x: Evaluation point (scalars or broadcastable arrays)
        params: Validated mixture parameters

    Returns:
        Log-density; a float for scalar input
    """
    value = mixture_logpdf(
        np.asarray(x, dtype=float) - np.asarray(center, dtype=float),
        params.sigma1,
        params.sigma2,
        params.mu,
        params.weight_center,
    )
    return float(value) if np.ndim(value) == 0 else value


def three_gaussian_sample(
    rng: np.random.Generator,
    center: ArrayLike,
    params: ThreeGaussianParams,
    size: Optional[Union[int, tuple]] = None,
):
    """Draw from the mixture centred at ``center``; deterministic given rng state."""
    shape = np.shape(center) if size is None else size
    offsets = mixture_offsets(
        rng, params.sigma1, params.sigma2, params.mu, params.weight_center, shape
    )
    value = np.asarray(center, dtype=float) + offsets
    return float(value) if np.ndim(value) == 0 else value


class MixtureProposal:
    """Product over dimensions of independent 1-dimension 3-Gaussian mixtures."""

    def __init__(self, sigma1, sigma2, mu, weight_center):
        self.sigma1 = np.asarray(sigma1, dtype=float)
        self.sigma2 = np.asarray(sigma2, dtype=float)
        self.mu = np.asarray(mu, dtype=float)
        self.weight_center = np.asarray(weight_center, dtype=float)
        self.ndim = len(self.sigma1)

    @classmethod
    def from_params(cls, params: Sequence[ThreeGaussianParams]) -> "MixtureProposal":
        return cls(
            [p.sigma1 for p in params],
            [p.sigma2 for p in params],
            [p.mu for p in params],
            [p.weight_center for p in params],
        )

    def _check(self, point: np.ndarray) -> np.ndarray:
        point = np.asarray(point, dtype=float)
        if point.ndim == 0:
            point = point.reshape(1)
        if point.shape[-1] != self.ndim:
            raise DimensionMismatchError(
                f"point has {point.shape[-1]} coordinates, proposal has {self.ndim}"
            )
        return point

    def logpdf(self, anchor: ArrayLike, x: ArrayLike):
        """
        Joint log-density of proposing ``x`` from ``anchor``.

        Leading axes broadcast, so many anchors or candidates can be evaluated
        in one call; the last axis is the parameter dimension.
        """
        offsets = self._check(x) - self._check(anchor)
        per_dim = mixture_logpdf(
            offsets, self.sigma1, self.sigma2, self.mu, self.weight_center
        )
        value = per_dim.sum(axis=-1)
        return float(value) if np.ndim(value) == 0 else value

    def sample(self, rng: np.random.Generator, anchor: ArrayLike) -> np.ndarray:
        anchor = self._check(anchor)
        return anchor + mixture_offsets(
            rng, self.sigma1, self.sigma2, self.mu, self.weight_center, anchor.shape
        )


class GaussianProposal(MixtureProposal):
    """Symmetric per-dimension Gaussian used by ordinary MH steps."""

    def __init__(self, widths: Sequence[float]):
        widths = np.asarray(widths, dtype=float)
        if widths.ndim != 1 or np.any(widths <= 0):
            raise ValueError("Gaussian proposal widths must be positive")
        super().__init__(widths, widths, np.zeros_like(widths), np.ones_like(widths))


def stage_role(stage: int) -> ProposalRole:
    if stage < 1:
        raise ValueError(f"DR stages start at 1, got {stage}")
    return ProposalRole.BIG_JUMP if stage == 1 else ProposalRole.SMALL_STEP


@lru_cache(maxsize=64)
def _role_proposal(spec: ProposalSpec, role: ProposalRole) -> MixtureProposal:
    return MixtureProposal.from_params([dim.params_for(role) for dim in spec.dimensions])


def stage_proposal(spec: ProposalSpec, stage: int) -> MixtureProposal:
    """q_a for stage 1, q_b for every later stage."""
    return _role_proposal(spec, stage_role(stage))


def dr_proposal_logpdf(
    stage: int, anchor: ArrayLike, candidate: ArrayLike, spec: ProposalSpec
) -> float:
    """
    Log-density of proposing ``candidate`` at DR stage ``stage``.

    Args:
        stage: Stage number (1 uses q_a, later stages q_b)
        anchor: Current state at stage 1, the central-tracker mean afterwards
        candidate: Proposed point
        spec: Per-dimension proposal description

    Returns:
        Sum over dimensions of the per-dimension log-densities
    """
    return stage_proposal(spec, stage).logpdf(anchor, candidate)


def dr_proposal_sample(
    rng: np.random.Generator, stage: int, anchor: ArrayLike, spec: ProposalSpec
) -> np.ndarray:
    return stage_proposal(spec, stage).sample(rng, anchor)


class CentralTracker:
    """
    Running mean of the DR elements after the first state.

    Sums are Neumaier-compensated, so the mean matches a batch recomputation
    to about 1e-15 relative regardless of push order.
    """

    def __init__(self, ndim: int):
        self.count = 0
        self._sum = np.zeros(ndim)
        self._compensation = np.zeros(ndim)

    @property
    def ndim(self) -> int:
        return len(self._sum)

    @property
    def running_mean(self) -> np.ndarray:
        if self.count == 0:
            raise ValueError("running mean of an empty tracker is undefined")
        return (self._sum + self._compensation) / self.count

    def push(self, value: ArrayLike) -> "CentralTracker":
        """Add one element in place and return the tracker."""
        value = np.asarray(value, dtype=float).reshape(-1)
        if len(value) != self.ndim:
            raise DimensionMismatchError("tracker and pushed value differ in dimension")
        total = self._sum + value
        big = np.abs(self._sum) >= np.abs(value)
        self._compensation += np.where(
            big, (self._sum - total) + value, (value - total) + self._sum
        )
        self._sum = total
        self.count += 1
        return self

    def copy(self) -> "CentralTracker":
        twin = CentralTracker(self.ndim)
        twin.count = self.count
        twin._sum = self._sum.copy()
        twin._compensation = self._compensation.copy()
        return twin


def central_push(tracker: CentralTracker, value: ArrayLike) -> CentralTracker:
    """Return a new tracker holding ``value`` in addition to the old elements."""
    return tracker.copy().push(value)
