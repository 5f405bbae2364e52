"""
Built-in analytic target densities.

Mixture and island-comb targets are exposed normalized (constant 1); the
lattice target returns log p_i unnormalized, with normalization sum(p).
"""

from functools import lru_cache
from typing import Union

import numpy as np
from scipy.special import logsumexp
from scipy.stats import norm

from src.models.errors import (
    DimensionMismatchError,
    TargetEvaluationError,
    UnsupportedTargetError,
)
from src.models.target_models import (
    DiscreteLattice,
    GaussianMixture1D,
    IslandComb,
    TargetSpec,
)


def _as_points(x, ndim: int) -> np.ndarray:
    """Coerce to shape (..., ndim); a scalar is one 1-dimension point."""
    points = np.asarray(x, dtype=float)
    if points.ndim == 0:
        points = points.reshape(1)
    if points.shape[-1] != ndim:
        raise DimensionMismatchError(
            f"point has {points.shape[-1]} coordinates, target has {ndim}"
        )
    return points


def _scalar_or_array(value):
    return float(value) if np.ndim(value) == 0 else value


def _normalized_log_weights(weights) -> np.ndarray:
    weights = np.asarray(weights, dtype=float)
    return np.log(weights) - np.log(weights.sum())


def _island_weights(spec: IslandComb) -> tuple:
    return tuple(spec.weight_decay**k for k in range(spec.n_modes))


def _island_centers(spec: IslandComb) -> tuple:
    return tuple(spec.first_center + k * spec.spacing for k in range(spec.n_modes))


class _GaussianComponents:
    """1-dimension weighted Gaussian sum shared by the mixture and comb targets."""

    def __init__(self, weights, centers, widths):
        self.log_weights = _normalized_log_weights(weights)
        self.weights = np.exp(self.log_weights)
        self.centers = np.asarray(centers, dtype=float)
        self.widths = np.asarray(widths, dtype=float)

    def log_density(self, values: np.ndarray) -> np.ndarray:
        terms = self.log_weights + norm.logpdf(
            values[..., np.newaxis], self.centers, self.widths
        )
        return logsumexp(terms, axis=-1)

    def cdf(self, values: np.ndarray) -> np.ndarray:
        terms = self.weights * norm.cdf(values[..., np.newaxis], self.centers, self.widths)
        return np.clip(terms.sum(axis=-1), 0.0, 1.0)


class MixtureTarget:
    def __init__(self, spec: GaussianMixture1D):
        self.spec = spec
        self.ndim = 1
        self.components = _GaussianComponents(spec.weights, spec.centers, spec.widths)

    def log_density(self, x):
        points = _as_points(x, self.ndim)
        return _scalar_or_array(self.components.log_density(points[..., 0]))


class IslandCombTarget:
    """Comb dimensions carry the islands; the rest are Gaussian nuisance coordinates."""

    def __init__(self, spec: IslandComb):
        self.spec = spec
        self.ndim = spec.n_dims
        self.components = _GaussianComponents(
            _island_weights(spec),
            _island_centers(spec),
            (spec.mode_width,) * spec.n_modes,
        )
        self.comb_mask = np.zeros(spec.n_dims, dtype=bool)
        self.comb_mask[list(spec.comb_dims)] = True

    def log_density(self, x):
        points = _as_points(x, self.ndim)
        per_dim = np.where(
            self.comb_mask,
            self.components.log_density(points),
            norm.logpdf(points, self.spec.nuisance_center, self.spec.nuisance_width),
        )
        return _scalar_or_array(per_dim.sum(axis=-1))


class LatticeTarget:
    """Point masses on an equally spaced grid; -inf off the grid."""

    def __init__(self, spec: DiscreteLattice):
        self.spec = spec
        self.ndim = 1
        self.points = np.asarray(spec.points, dtype=float)
        self.probabilities = np.asarray(spec.probabilities, dtype=float)
        self.pitch = spec.pitch
        with np.errstate(divide="ignore"):
            self.log_probabilities = np.log(self.probabilities)

    def index_of(self, values) -> np.ndarray:
        """Lattice index of each value, -1 where the value is off the grid."""
        values = np.asarray(values, dtype=float)
        idx = np.rint((values - self.points[0]) / self.pitch).astype(int)
        inside = (idx >= 0) & (idx < len(self.points))
        safe = np.clip(idx, 0, len(self.points) - 1)
        on_grid = inside & (np.abs(self.points[safe] - values) <= 1e-9 * self.pitch)
        return np.where(on_grid, safe, -1)

    def log_density(self, x):
        points = _as_points(x, self.ndim)
        idx = self.index_of(points[..., 0])
        value = np.where(idx >= 0, self.log_probabilities[np.maximum(idx, 0)], -np.inf)
        return _scalar_or_array(value)


Target = Union[MixtureTarget, IslandCombTarget, LatticeTarget]


@lru_cache(maxsize=32)
def build_target(spec: TargetSpec) -> Target:
    """Evaluator object for a declarative target description."""
    if isinstance(spec, GaussianMixture1D):
        return MixtureTarget(spec)
    if isinstance(spec, IslandComb):
        return IslandCombTarget(spec)
    if isinstance(spec, DiscreteLattice):
        return LatticeTarget(spec)
    raise UnsupportedTargetError(f"unknown target variant {type(spec).__name__}")


def as_target(target):
    """Accept either a spec or anything exposing ``ndim`` and ``log_density``."""
    if hasattr(target, "log_density") and hasattr(target, "ndim"):
        return target
    return build_target(target)


def log_density(target, x):
    """
    Log of the target density at ``x``.

    Args:
        target: TargetSpec or built target
        x: One point, or a stack of points with the dimension on the last axis

    Returns:
        Log-density (float for one point); -inf outside the support
    """
    return as_target(target).log_density(x)


def _mixture_components(target) -> _GaussianComponents:
    built = as_target(target)
    if isinstance(built, MixtureTarget):
        return built.components
    if isinstance(built, IslandCombTarget) and built.ndim == 1:
        return built.components
    raise UnsupportedTargetError("cdf is defined for 1-dimension Gaussian mixtures only")


def cdf(target, x):
    """Weighted sum of Gaussian CDFs for the 1-dimension mixture variants."""
    components = _mixture_components(target)
    return _scalar_or_array(components.cdf(np.asarray(x, dtype=float)))


def mode_centers(target) -> np.ndarray:
    spec = as_target(target).spec
    if isinstance(spec, GaussianMixture1D):
        return np.asarray(spec.centers, dtype=float)
    if isinstance(spec, IslandComb):
        return np.asarray(_island_centers(spec), dtype=float)
    raise UnsupportedTargetError("mode centers are defined for mixture and comb targets")


def mode_weights(target) -> np.ndarray:
    """Normalized weights matching mode_centers."""
    spec = as_target(target).spec
    if isinstance(spec, GaussianMixture1D):
        weights = np.asarray(spec.weights, dtype=float)
    elif isinstance(spec, IslandComb):
        weights = np.asarray(_island_weights(spec), dtype=float)
    else:
        raise UnsupportedTargetError("mode weights are defined for mixture and comb targets")
    return weights / weights.sum()


def normalization(target) -> float:
    spec = as_target(target).spec
    if isinstance(spec, DiscreteLattice):
        return float(sum(spec.probabilities))
    return 1.0


def evaluate_log_target(target, x) -> float:
    """
    Log-density of one point, rejecting values a sampler cannot use.

    Raises:
        TargetEvaluationError: the target returned NaN or +inf
    """
    value = float(as_target(target).log_density(x))
    if np.isnan(value) or value == np.inf:
        raise TargetEvaluationError(f"target returned {value} at {np.asarray(x).tolist()}")
    return value
