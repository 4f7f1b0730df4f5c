"""Synthetic benchmark harness.

Everything here is driven by one integer seed through Philox counter-based
substreams, so results are bit-reproducible across runs and platforms: the
stream for a grid cell is derived from (seed, row index, column index,
repetition index) and never depends on execution order.

The benchmark grid crosses five input distributions on [0, 1] (uniform,
three truncated Gaussians at 0, 0.5 and 1, and a truncated two-component
Gaussian mixture) with five monotone mechanisms (three power laws, a square
root, and a random convex combination of Gaussian CDFs refreshed every
repetition). Truncation is by rejection, not clamping, so no probability
mass piles up at the interval ends. Additive noise is optional and scaled
by a single multiplier.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

import numpy as np
from scipy.special import ndtr

from .core import Direction, ReferenceFamily, SamplePair, _as_finite_vector
from .errors import (
    ConstantInputError,
    DomainError,
    IgciError,
    SamplingStalledError,
    TooFewRowsError,
)
from .estimators import EstimatorKind, igci_score, spacing_entropy

__all__ = [
    "InputKind",
    "InputDist",
    "MechanismKind",
    "CdfMixParams",
    "MechanismSpec",
    "NoiseKind",
    "NoiseSpec",
    "CellTally",
    "SimGridResult",
    "SineResult",
    "NoiseBoundCheck",
    "GRID_INPUTS",
    "GRID_MECHANISMS",
    "SINE_INPUTS",
    "substream",
    "sample_input",
    "apply_mechanism",
    "run_grid",
    "run_sine",
    "estimate_fisher_information",
    "verify_noise_bound",
    "noise_variance_budget",
]

_MAX_CONSECUTIVE_REJECTS = 1_000_000
_MIN_CHUNK = 1024


def substream(seed: int, *path: int) -> np.random.Generator:
    """Independent generator for a coordinate path under one base seed.

    Philox is counter-based, so streams derived from distinct paths are
    statistically independent and identical across platforms and runs.
    """
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(p) for p in path))
    return np.random.Generator(np.random.Philox(ss))


class InputKind(Enum):
    UNIFORM = "uniform"
    GAUSS_AT_ZERO = "gauss_at_zero"
    GAUSS_CENTERED = "gauss_centered"
    GAUSS_AT_ONE = "gauss_at_one"
    GAUSS_MIXTURE = "gauss_mixture"


_GAUSS_MEANS = {
    InputKind.GAUSS_AT_ZERO: 0.0,
    InputKind.GAUSS_CENTERED: 0.5,
    InputKind.GAUSS_AT_ONE: 1.0,
}

_MIXTURE_MEANS = (0.3, 0.7)


@dataclass(frozen=True)
class InputDist:
    """Input distribution spec; sigma scales every non-uniform variant."""

    kind: InputKind
    sigma: float = 0.2

    def __post_init__(self) -> None:
        if not (self.sigma > 0.0 and math.isfinite(self.sigma)):
            raise ValueError(f"sigma must be positive, got {self.sigma!r}")


def _propose(dist: InputDist, rng: np.random.Generator, n: int) -> np.ndarray:
    if dist.kind is InputKind.UNIFORM:
        return rng.random(n)
    if dist.kind is InputKind.GAUSS_MIXTURE:
        # Equal-weight two-component mixture, component width sigma / 2.
        means = np.where(rng.random(n) < 0.5, _MIXTURE_MEANS[0], _MIXTURE_MEANS[1])
        return rng.normal(means, dist.sigma / 2.0)
    return rng.normal(_GAUSS_MEANS[dist.kind], dist.sigma, n)


def _draw(dist: InputDist, m: int, rng: np.random.Generator, truncate: bool) -> np.ndarray:
    if not truncate:
        return _propose(dist, rng, m)
    out = np.empty(m, dtype=np.float64)
    filled = 0
    consecutive_rejects = 0
    while filled < m:
        chunk = _propose(dist, rng, max(m - filled, _MIN_CHUNK))
        accepted = chunk[(chunk >= 0.0) & (chunk <= 1.0)]
        if accepted.size == 0:
            consecutive_rejects += chunk.size
            if consecutive_rejects >= _MAX_CONSECUTIVE_REJECTS:
                raise SamplingStalledError(
                    f"no acceptances in {consecutive_rejects} consecutive draws for {dist}"
                )
            continue
        consecutive_rejects = 0
        take = min(accepted.size, m - filled)
        out[filled : filled + take] = accepted[:take]
        filled += take
    return out


def sample_input(dist: InputDist, m: int, rng_seed: int, truncate: bool = True) -> np.ndarray:
    """Draw m values, rejection-truncated to [0, 1] unless truncate=False."""
    if m < 1:
        raise TooFewRowsError(f"m must be at least 1, got {m}")
    return _draw(dist, m, substream(rng_seed), truncate)


class MechanismKind(Enum):
    CUBE_ROOT = "cube_root"
    SQRT = "sqrt"
    SQUARE = "square"
    CUBE = "cube"
    CDF_MIX = "cdf_mix"


@dataclass(frozen=True)
class CdfMixParams:
    """Convex combination of Gaussian CDFs: weights, locations, widths."""

    weights: tuple
    means: tuple
    widths: tuple

    def __post_init__(self) -> None:
        w = tuple(float(v) for v in self.weights)
        mu = tuple(float(v) for v in self.means)
        sd = tuple(float(v) for v in self.widths)
        if not (len(w) == len(mu) == len(sd)) or len(w) == 0:
            raise ValueError("weights, means, widths must be equal-length and nonempty")
        if any(v < 0.0 for v in w) or abs(sum(w) - 1.0) > 1e-8:
            raise ValueError("weights must be nonnegative and sum to 1")
        if any(not (0.0 <= v <= 1.0) for v in mu):
            raise ValueError("means must lie in [0, 1]")
        if any(not (0.0 <= v <= 0.1) for v in sd):
            raise ValueError("widths must lie in [0, 0.1]")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "means", mu)
        object.__setattr__(self, "widths", sd)


# Widths below this are floored when drawing random mixture parameters so
# the mechanism stays resolvable at benchmark sample sizes.
_MIN_CDF_WIDTH = 1e-4


@dataclass(frozen=True)
class MechanismSpec:
    kind: MechanismKind
    cdf_mix: Optional[CdfMixParams] = None

    def __post_init__(self) -> None:
        if (self.kind is MechanismKind.CDF_MIX) != (self.cdf_mix is not None):
            raise ValueError("cdf_mix parameters are required exactly when kind is CDF_MIX")

    @staticmethod
    def random_cdf_mix(rng: np.random.Generator, components: int = 5) -> "MechanismSpec":
        """Fresh random CDF-mixture mechanism: normalized uniform weights,
        uniform locations, widths uniform on [0, 0.1] floored at 1e-4."""
        raw = rng.random(components)
        weights = raw / raw.sum()
        means = rng.random(components)
        widths = np.maximum(rng.random(components) * 0.1, _MIN_CDF_WIDTH)
        return MechanismSpec(
            MechanismKind.CDF_MIX,
            CdfMixParams(tuple(weights), tuple(means), tuple(widths)),
        )


def apply_mechanism(spec: MechanismSpec, x) -> np.ndarray:
    """Evaluate a benchmark mechanism on values in [0, 1].

    All mechanisms map [0, 1] into [0, 1] and are monotone nondecreasing
    (strictly increasing except for zero-width CDF components, which act
    as steps).
    """
    arr = _as_finite_vector(x, "x")
    if arr.size and (arr.min() < 0.0 or arr.max() > 1.0):
        raise DomainError("mechanism inputs must lie in [0, 1]")
    kind = spec.kind
    if kind is MechanismKind.CUBE_ROOT:
        return np.cbrt(arr)
    if kind is MechanismKind.SQRT:
        return np.sqrt(arr)
    if kind is MechanismKind.SQUARE:
        return arr * arr
    if kind is MechanismKind.CUBE:
        return arr * arr * arr
    params = spec.cdf_mix
    out = np.zeros_like(arr)
    for w, mu, sd in zip(params.weights, params.means, params.widths):
        if sd == 0.0:
            out += w * (arr >= mu).astype(np.float64)
        else:
            out += w * ndtr((arr - mu) / sd)
    return out


class NoiseKind(Enum):
    NONE = "none"
    UNIFORM_UNIT = "uniform"
    STD_NORMAL = "normal"
    LAPLACE = "laplace"


@dataclass(frozen=True)
class NoiseSpec:
    """Additive noise: y = f(x) + lam * E."""

    kind: NoiseKind = NoiseKind.NONE
    lam: float = 0.0
    laplace_scale: float = 0.2

    def __post_init__(self) -> None:
        if self.lam < 0.0 or not math.isfinite(self.lam):
            raise ValueError(f"lam must be finite and nonnegative, got {self.lam!r}")
        if self.laplace_scale <= 0.0:
            raise ValueError("laplace_scale must be positive")
        # A deterministic run is spelled with both fields off, never half.
        if (self.lam == 0.0) != (self.kind is NoiseKind.NONE):
            raise ValueError("lam == 0 exactly when kind is NONE")


def _draw_noise(noise: NoiseSpec, m: int, rng: np.random.Generator) -> np.ndarray:
    if noise.kind is NoiseKind.UNIFORM_UNIT:
        return rng.random(m)
    if noise.kind is NoiseKind.STD_NORMAL:
        return rng.standard_normal(m)
    return rng.laplace(0.0, noise.laplace_scale, m)


@dataclass
class CellTally:
    correct: int = 0
    wrong: int = 0
    undecided: int = 0

    @property
    def total(self) -> int:
        return self.correct + self.wrong + self.undecided

    @property
    def accuracy_pct(self) -> float:
        # Undecided outcomes count against accuracy; they are also
        # reported on their own so the choice is visible.
        return 100.0 * self.correct / self.total if self.total else float("nan")


GRID_INPUTS: tuple = (
    ("A", InputDist(InputKind.UNIFORM)),
    ("B", InputDist(InputKind.GAUSS_AT_ZERO)),
    ("C", InputDist(InputKind.GAUSS_CENTERED)),
    ("D", InputDist(InputKind.GAUSS_AT_ONE)),
    ("E", InputDist(InputKind.GAUSS_MIXTURE)),
)

GRID_MECHANISMS: tuple = (
    ("a", MechanismKind.CUBE_ROOT),
    ("b", MechanismKind.SQRT),
    ("c", MechanismKind.SQUARE),
    ("d", MechanismKind.CUBE),
    ("e", MechanismKind.CDF_MIX),
)

# Inputs for the small-flutter experiment; these are NOT truncated.
SINE_INPUTS: tuple = (
    ("normal(0,1)", InputDist(InputKind.GAUSS_AT_ZERO, sigma=1.0)),
    ("normal(0,0.04)", InputDist(InputKind.GAUSS_AT_ZERO)),
    ("normal(0.5,0.04)", InputDist(InputKind.GAUSS_CENTERED)),
    ("normal(1,0.04)", InputDist(InputKind.GAUSS_AT_ONE)),
    ("mixture(0.3,0.7)", InputDist(InputKind.GAUSS_MIXTURE)),
)


@dataclass(frozen=True)
class SimGridResult:
    cells: dict
    m: int
    repetitions: int
    noise: NoiseSpec
    estimator: EstimatorKind
    reference: ReferenceFamily
    seed: int

    def to_records(self) -> list:
        records = [
            {
                "record": "config",
                "m": self.m,
                "repetitions": self.repetitions,
                "noise": self.noise.kind.value,
                "lambda": self.noise.lam,
                "laplace_scale": self.noise.laplace_scale,
                "estimator": self.estimator.value,
                "reference": self.reference.value,
                "seed": self.seed,
            }
        ]
        for (row, col), tally in self.cells.items():
            records.append(
                {
                    "record": "cell",
                    "row": row,
                    "col": col,
                    "correct": tally.correct,
                    "wrong": tally.wrong,
                    "undecided": tally.undecided,
                    "accuracy_pct": tally.accuracy_pct,
                }
            )
        return records


def _mechanism_for_rep(col_kind: MechanismKind, rng: np.random.Generator) -> MechanismSpec:
    if col_kind is MechanismKind.CDF_MIX:
        return MechanismSpec.random_cdf_mix(rng)
    return MechanismSpec(col_kind)


def _score_tally(
    x: np.ndarray,
    y: np.ndarray,
    tally: CellTally,
    estimator: EstimatorKind,
    reference: ReferenceFamily,
) -> None:
    try:
        report = igci_score(SamplePair(x, y), reference, estimator)
    except IgciError:
        tally.undecided += 1
        return
    if report.direction is Direction.X_TO_Y:
        tally.correct += 1
    elif report.direction is Direction.Y_TO_X:
        tally.wrong += 1
    else:
        tally.undecided += 1


def run_grid(
    noise: NoiseSpec = NoiseSpec(),
    m: int = 1000,
    repetitions: int = 100,
    estimator: EstimatorKind = EstimatorKind.ENTROPY_SPACING,
    reference: ReferenceFamily = ReferenceFamily.UNIFORM_UNIT,
    seed: int = 0,
) -> SimGridResult:
    """Run the full 5 x 5 input-by-mechanism benchmark.

    Ground truth is x -> y everywhere. Mixture-of-CDF mechanism parameters
    are redrawn for every repetition; the per-repetition draw order is
    fixed (mechanism parameters, then x, then noise) as part of the
    reproducibility contract. Estimator errors inside a repetition are
    tallied as undecided.
    """
    if m < 3:
        raise TooFewRowsError(f"m must be at least 3, got {m}")
    if repetitions < 1:
        raise ValueError("repetitions must be positive")
    cells = {}
    for i, (row_label, dist) in enumerate(GRID_INPUTS):
        for j, (col_label, col_kind) in enumerate(GRID_MECHANISMS):
            tally = CellTally()
            for rep in range(repetitions):
                rng = substream(seed, i, j, rep)
                spec = _mechanism_for_rep(col_kind, rng)
                x = _draw(dist, m, rng, truncate=True)
                y = apply_mechanism(spec, x)
                if noise.kind is not NoiseKind.NONE:
                    y = y + noise.lam * _draw_noise(noise, m, rng)
                _score_tally(x, y, tally, estimator, reference)
            cells[(row_label, col_label)] = tally
    return SimGridResult(
        cells=cells,
        m=m,
        repetitions=repetitions,
        noise=noise,
        estimator=estimator,
        reference=reference,
        seed=seed,
    )


@dataclass(frozen=True)
class SineResult:
    entries: tuple
    epsilon: float
    omega: float
    m: int
    repetitions: int
    estimator: EstimatorKind
    reference: ReferenceFamily
    seed: int

    @property
    def mean_accuracy_pct(self) -> float:
        return float(np.mean([tally.accuracy_pct for _, tally in self.entries]))

    def to_records(self) -> list:
        records = [
            {
                "record": "config",
                "epsilon": self.epsilon,
                "omega": self.omega,
                "m": self.m,
                "repetitions": self.repetitions,
                "estimator": self.estimator.value,
                "reference": self.reference.value,
                "seed": self.seed,
            }
        ]
        for label, tally in self.entries:
            records.append(
                {
                    "record": "cell",
                    "input": label,
                    "correct": tally.correct,
                    "wrong": tally.wrong,
                    "undecided": tally.undecided,
                    "accuracy_pct": tally.accuracy_pct,
                }
            )
        return records


def run_sine(
    epsilon: float = 0.005,
    omega: float = 40.0,
    dists: Optional[Sequence] = None,
    m: int = 1000,
    repetitions: int = 100,
    estimator: EstimatorKind = EstimatorKind.ENTROPY_SPACING,
    reference: ReferenceFamily = ReferenceFamily.UNIFORM_UNIT,
    seed: int = 0,
) -> SineResult:
    """Score y = x + epsilon * sin(omega * x) across input distributions.

    The flutter keeps the map strictly increasing as long as
    epsilon * omega < 1, which is enforced. Inputs are drawn without
    truncation. epsilon = 0 makes y equal x exactly, so every repetition
    scores 0 and lands in the undecided tally.
    """
    if epsilon < 0.0 or omega <= 0.0:
        raise DomainError("epsilon must be nonnegative and omega positive")
    if epsilon * omega >= 1.0:
        raise DomainError(f"epsilon * omega = {epsilon * omega!r} must stay below 1 to keep the map increasing")
    if m < 3:
        raise TooFewRowsError(f"m must be at least 3, got {m}")
    chosen = tuple(dists) if dists is not None else SINE_INPUTS
    entries = []
    for i, (label, dist) in enumerate(chosen):
        tally = CellTally()
        for rep in range(repetitions):
            rng = substream(seed, i, rep)
            x = _draw(dist, m, rng, truncate=False)
            y = x + epsilon * np.sin(omega * x)
            _score_tally(x, y, tally, estimator, reference)
        entries.append((label, tally))
    return SineResult(
        entries=tuple(entries),
        epsilon=epsilon,
        omega=omega,
        m=m,
        repetitions=repetitions,
        estimator=estimator,
        reference=reference,
        seed=seed,
    )


def estimate_fisher_information(
    values,
    bandwidth: Optional[float] = None,
    grid_size: int = 4096,
    deconvolve: bool = True,
) -> float:
    """Plug-in Fisher information of a scalar density from a sample.

    A binned Gaussian kernel density (Silverman reference bandwidth by
    default) supplies the score function; the integral of score**2 times
    density is taken on the grid. Kernel smoothing biases the result low
    by roughly the bandwidth variance, and for a Gaussian shape exactly so
    (1/J grows by h**2 under h-smoothing); deconvolve=True removes that
    term and is exact in the Gaussian case.
    """
    arr = _as_finite_vector(values, "values")
    m = arr.size
    if m < 16:
        raise TooFewRowsError(f"need at least 16 values, got {m}")
    std = float(arr.std())
    if std == 0.0:
        raise ConstantInputError("constant sample has no density")
    if bandwidth is None:
        q25, q75 = np.percentile(arr, [25.0, 75.0])
        iqr = float(q75 - q25)
        spread = min(std, iqr / 1.349) if iqr > 0.0 else std
        bandwidth = 0.9 * spread * m ** (-0.2)
    h = float(bandwidth)
    if not (h > 0.0 and math.isfinite(h)):
        raise DomainError(f"bandwidth must be positive, got {h!r}")
    lo = float(arr.min()) - 5.0 * h
    hi = float(arr.max()) + 5.0 * h
    edges = np.linspace(lo, hi, grid_size + 1)
    delta = float(edges[1] - edges[0])
    counts, _ = np.histogram(arr, bins=edges)
    radius = int(math.ceil(6.0 * h / delta))
    offsets = np.arange(-radius, radius + 1) * delta
    kernel = np.exp(-0.5 * (offsets / h) ** 2)
    kernel /= kernel.sum()
    density = np.convolve(counts / (m * delta), kernel, mode="same")
    slope = np.gradient(density, delta)
    mask = density > density.max() * 1e-12
    info = float(np.sum(slope[mask] ** 2 / density[mask]) * delta)
    if deconvolve and info > 0.0:
        inv = 1.0 / info - h * h
        if inv > 0.0:
            info = 1.0 / inv
    return info


@dataclass(frozen=True)
class NoiseBoundCheck:
    sigma: float
    entropy_base: float
    entropy_noisy: float
    fisher: float
    bound: float
    gap: float
    holds: bool


def verify_noise_bound(
    x,
    sigma_levels: Sequence[float] = (0.01, 0.1, 1.0),
    rng_seed: int = 0,
    fisher: Optional[float] = None,
    tolerance: float = 0.05,
) -> list:
    """Check S(x + sqrt(sigma) Z) <= S(x) + 0.5 * log(sigma * J(x) + 1).

    Entropies are spacing estimates, J(x) is the plug-in Fisher information
    unless supplied. The bound is tight when x itself is Gaussian, so the
    reported gap (bound minus noisy entropy) doubles as a tightness probe.
    holds allows the stated tolerance for estimation error.
    """
    arr = _as_finite_vector(x, "x")
    base = spacing_entropy(arr)
    info = float(fisher) if fisher is not None else estimate_fisher_information(arr)
    if info <= 0.0:
        raise DomainError(f"Fisher information must be positive, got {info!r}")
    checks = []
    for idx, sigma in enumerate(sigma_levels):
        sigma = float(sigma)
        if sigma <= 0.0:
            raise DomainError(f"sigma levels must be positive, got {sigma!r}")
        rng = substream(rng_seed, idx)
        noisy = arr + math.sqrt(sigma) * rng.standard_normal(arr.size)
        noisy_entropy = spacing_entropy(noisy)
        bound = base + 0.5 * math.log(sigma * info + 1.0)
        checks.append(
            NoiseBoundCheck(
                sigma=sigma,
                entropy_base=base,
                entropy_noisy=noisy_entropy,
                fisher=info,
                bound=bound,
                gap=bound - noisy_entropy,
                holds=noisy_entropy <= bound + tolerance,
            )
        )
    return checks


def noise_variance_budget(entropy_x: float, entropy_y: float, fisher_y: float) -> float:
    """Largest noise variance guaranteed not to flip an entropy comparison.

    For S(y) < S(x), additive Gaussian noise of variance sigma keeps the
    noisy S(y) below S(x) whenever sigma < (e**(2 S(x) - 2 S(y)) - 1) / J(y).
    Returns that threshold; nonpositive means no budget exists.
    """
    if fisher_y <= 0.0:
        raise DomainError(f"fisher_y must be positive, got {fisher_y!r}")
    return (math.exp(2.0 * (entropy_x - entropy_y)) - 1.0) / fisher_y
