"""Domain types and shared numerics.

Conventions used across the package:

* variance is always the population form (divisor m, not m - 1), which only
  has to be applied consistently for direction scores to be meaningful;
* samples are immutable after construction, arrays are stored read-only;
* preprocessing maps each variable separately onto a reference family
  (unit-interval uniform, or standard Gaussian, or isotropic Gaussian for
  multivariate work).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import (
    ConstantInputError,
    DataError,
    DimensionMismatchError,
    DomainError,
    SingularCovarianceError,
    SupportMismatchError,
    TooFewRowsError,
)

__all__ = [
    "Direction",
    "ReferenceFamily",
    "SamplePair",
    "MultiSample",
    "normalize_uniform",
    "standardize_gaussian",
    "whiten",
    "digamma",
    "discrete_kl",
    "kl_additivity_gap",
]


class Direction(Enum):
    """Outcome of a direction inference."""

    X_TO_Y = "x->y"
    Y_TO_X = "y->x"
    UNDECIDED = "undecided"

    def flipped(self) -> "Direction":
        if self is Direction.X_TO_Y:
            return Direction.Y_TO_X
        if self is Direction.Y_TO_X:
            return Direction.X_TO_Y
        return self


class ReferenceFamily(Enum):
    """Reference distribution a variable is mapped onto before scoring."""

    UNIFORM_UNIT = "uniform"
    GAUSSIAN = "gaussian"
    ISOTROPIC_GAUSSIAN = "isotropic"


def _as_finite_vector(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise DimensionMismatchError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.size and not np.all(np.isfinite(arr)):
        raise DataError(f"{name} contains non-finite values")
    return arr


@dataclass(frozen=True)
class SamplePair:
    """Paired observations of two scalar variables."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self) -> None:
        x = _as_finite_vector(self.x, "x")
        y = _as_finite_vector(self.y, "y")
        if x.shape != y.shape:
            raise DimensionMismatchError(f"x has {x.size} rows, y has {y.size}")
        if x.size < 3:
            raise TooFewRowsError(f"need at least 3 paired rows, got {x.size}")
        x.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def m(self) -> int:
        return self.x.size

    def swapped(self) -> "SamplePair":
        return SamplePair(self.y, self.x)


@dataclass(frozen=True)
class MultiSample:
    """m observations of a d-dimensional variable, rows are observations."""

    data: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim != 2:
            raise DimensionMismatchError(f"data must be m x d, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise DataError("data contains non-finite values")
        # m > d is required for a nonsingular empirical covariance.
        if arr.shape[0] <= arr.shape[1]:
            raise SingularCovarianceError(
                f"{arr.shape[0]} observations in {arr.shape[1]} dimensions cannot have full-rank covariance"
            )
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @property
    def m(self) -> int:
        return self.data.shape[0]

    @property
    def d(self) -> int:
        return self.data.shape[1]


def normalize_uniform(values) -> np.ndarray:
    """Affinely map values onto [0, 1] with min 0 and max 1 exactly.

    Idempotent: a second application returns the input unchanged.
    """
    arr = _as_finite_vector(values, "values")
    if arr.size == 0:
        raise DataError("cannot normalize an empty sample")
    lo = float(arr.min())
    hi = float(arr.max())
    if hi == lo:
        raise ConstantInputError("all values identical, range normalization undefined")
    return (arr - lo) / (hi - lo)


def standardize_gaussian(values) -> tuple[np.ndarray, float, float]:
    """Map values to mean 0 and variance 1, returning (standardized, mean, std).

    Uses the population variance (divisor m). The original sample is
    recovered as standardized * std + mean.
    """
    arr = _as_finite_vector(values, "values")
    if arr.size == 0:
        raise DataError("cannot standardize an empty sample")
    mean = float(arr.mean())
    std = float(arr.std())
    if std == 0.0:
        raise ConstantInputError("zero variance, standardization undefined")
    return (arr - mean) / std, mean, std


# Relative eigenvalue threshold below which a covariance counts as singular.
_WHITEN_RTOL = 1e-12


def whiten(sample: MultiSample) -> tuple[np.ndarray, np.ndarray]:
    """Center multivariate data and map its covariance to the identity.

    Returns (whitened, transform) with whitened = (data - mean) @ transform.
    The transform is the symmetric inverse square root of the population
    covariance, so the result does not depend on eigenvector ordering or
    sign choices and no arbitrary rotation is introduced.
    """
    centered = sample.data - sample.data.mean(axis=0)
    cov = centered.T @ centered / sample.m
    evals, evecs = np.linalg.eigh(cov)
    if evals[-1] <= 0.0 or evals[0] <= _WHITEN_RTOL * evals[-1]:
        raise SingularCovarianceError("covariance is singular or too ill-conditioned to whiten")
    transform = (evecs / np.sqrt(evals)) @ evecs.T
    return centered @ transform, transform


# Switch-over point for the asymptotic series; below it the recurrence
# psi(x) = psi(x + 1) - 1/x lifts the argument.
_DIGAMMA_ASYMPTOTIC = 10.0


def digamma(x: float) -> float:
    """Digamma function for real x > 0.

    Upward recurrence into the de Moivre asymptotic region, then the
    Bernoulli-coefficient series through x**-12. Absolute error stays below
    1e-10 on [1e-3, 1e6].
    """
    x = float(x)
    if not math.isfinite(x) or x <= 0.0:
        raise DomainError(f"digamma requires x > 0, got {x}")
    acc = 0.0
    while x < _DIGAMMA_ASYMPTOTIC:
        acc -= 1.0 / x
        x += 1.0
    u = 1.0 / (x * x)
    tail = u * (
        1.0 / 12.0
        - u * (1.0 / 120.0 - u * (1.0 / 252.0 - u * (1.0 / 240.0 - u * (1.0 / 132.0 - u * (691.0 / 32760.0)))))
    )
    return acc + math.log(x) - 0.5 / x - tail


def _as_probability_vector(values, name: str) -> np.ndarray:
    arr = _as_finite_vector(values, name)
    if arr.size == 0 or np.any(arr < 0.0):
        raise DataError(f"{name} must be a nonnegative probability vector")
    if abs(float(arr.sum()) - 1.0) > 1e-8:
        raise DataError(f"{name} must sum to 1 within 1e-8, got {float(arr.sum())!r}")
    return arr


def discrete_kl(p, q) -> float:
    """Kullback-Leibler divergence sum(p * log(p / q)) over a shared support.

    Zero p entries contribute nothing; a positive p entry where q is zero
    means the supports differ and raises SupportMismatchError.
    """
    p = _as_probability_vector(p, "p")
    q = _as_probability_vector(q, "q")
    if p.size != q.size:
        raise SupportMismatchError(f"length {p.size} vs {q.size}")
    live = p > 0.0
    if np.any(q[live] == 0.0):
        raise SupportMismatchError("p has mass where q has none")
    value = float(np.sum(p[live] * np.log(p[live] / q[live])))
    # Rounding can leave a tiny negative residue when p == q.
    if -1e-12 < value < 0.0:
        return 0.0
    return value


def kl_additivity_gap(q, r, s) -> tuple[float, float]:
    """Two routes to the same divergence difference, for identity checking.

    Returns (a, b) with a = D(q||s) - D(q||r) - D(r||s) computed from three
    divergences and b = sum((q - r) * log(r / s)) computed directly. For
    strictly positive vectors on a shared support the two agree to rounding.
    """
    qv = _as_probability_vector(q, "q")
    rv = _as_probability_vector(r, "r")
    sv = _as_probability_vector(s, "s")
    if not (qv.size == rv.size == sv.size):
        raise SupportMismatchError("q, r, s must share one support")
    if np.any(rv == 0.0) or np.any(sv == 0.0):
        raise SupportMismatchError("r and s must be strictly positive")
    via_divergences = discrete_kl(qv, sv) - discrete_kl(qv, rv) - discrete_kl(rv, sv)
    log_ratio = np.log(rv / sv)
    direct = float(np.sum(qv * log_ratio) - np.sum(rv * log_ratio))
    return via_divergences, direct
