"""Seedable sampling of random interaction matrices and deterministic growth vectors.

Every ensemble draws i.i.d. entries standardized to mean 0, variance 1:

``gaussian``
    Standard normal entries.
``bernoulli_pm1``
    Entries -1 or +1 with equal probability (bounded/discrete probe; the
    theory for this case is open, the ensemble is included for empirical
    comparison only).
``logconcave``
    Standard hyperbolic secant law, density ``f(x) = (1/2) sech(pi x / 2)``,
    sampled by the exact inverse CDF ``F^{-1}(u) = (2/pi) log(tan(pi u / 2))``.
    It is already standardized (mean 0, variance 1, kurtosis 5) and is a
    smooth log-concave law.

Reproducibility contract: all sampling goes through :class:`SeedScheme`,
which hashes ``(master_seed, trial_index)`` with splitmix64 and keys a
counter-based numpy ``Philox`` generator.  The same pair always yields the
same matrix, bit for bit, independent of scheduling or worker count.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError

ENSEMBLE_KINDS = ("gaussian", "bernoulli_pm1", "logconcave")

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15  # splitmix64 golden-ratio increment


def _mix64(z: int) -> int:
    """splitmix64 finalizer: bijective 64-bit mix."""
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_seed(master_seed: int, index: int) -> int:
    """Pure 64-bit sub-seed for stream `index` of `master_seed` (splitmix64)."""
    if index < 0:
        raise ConfigurationError(f"trial index must be >= 0, got {index}")
    return _mix64(master_seed + (index + 1) * _GAMMA)


@dataclass(frozen=True)
class SeedScheme:
    """Addressing of one pseudo-random stream: (master seed, trial index).

    ``sub_seed`` is a pure function of the pair, so trials may be run in any
    order, on any worker, with identical results.
    """

    master_seed: int
    trial_index: int = 0

    def __post_init__(self):
        if not 0 <= self.master_seed <= _MASK64:
            raise ConfigurationError(f"master_seed must be a u64, got {self.master_seed}")
        if self.trial_index < 0:
            raise ConfigurationError(f"trial_index must be >= 0, got {self.trial_index}")

    def sub_seed(self) -> int:
        return derive_seed(self.master_seed, self.trial_index)

    def generator(self) -> np.random.Generator:
        """Counter-based generator (Philox) keyed by the sub-seed."""
        return np.random.Generator(np.random.Philox(key=self.sub_seed()))

    def derive(self, index: int) -> "SeedScheme":
        """Child scheme: this stream's sub-seed becomes the child's master seed."""
        return SeedScheme(self.sub_seed(), index)


@dataclass(frozen=True)
class EnsembleSpec:
    """Which i.i.d. entry law to sample, and the matrix dimension."""

    kind: str
    n: int

    def __post_init__(self):
        if self.kind not in ENSEMBLE_KINDS:
            raise ConfigurationError(
                f"unsupported ensemble kind {self.kind!r}; expected one of {ENSEMBLE_KINDS}"
            )
        if self.n < 1:
            raise ConfigurationError(f"matrix dimension must be >= 1, got {self.n}")


def _hsech_from_uniform(u: np.ndarray) -> np.ndarray:
    # Inverse CDF of the standard hyperbolic secant law; u must be in (0, 1).
    return (2.0 / np.pi) * np.log(np.tan(0.5 * np.pi * u))


def sample_entries(spec: EnsembleSpec, rng: np.random.Generator, size) -> np.ndarray:
    """Draw i.i.d. standardized entries of the given law into shape `size`."""
    if spec.kind == "gaussian":
        return rng.standard_normal(size)
    if spec.kind == "bernoulli_pm1":
        return 2.0 * rng.integers(0, 2, size=size).astype(np.float64) - 1.0
    if spec.kind == "logconcave":
        u = rng.random(size)
        # random() is in [0,1); keep the inverse CDF finite at the boundary
        np.clip(u, 2.0**-53, 1.0 - 2.0**-53, out=u)
        return _hsech_from_uniform(u)
    raise ConfigurationError(f"unsupported ensemble kind {spec.kind!r}")


def sample_matrix(spec: EnsembleSpec, seed: SeedScheme) -> np.ndarray:
    """Sample the n x n interaction matrix for one trial.

    Deterministic given (spec, seed); entries are i.i.d. with mean 0 and
    variance 1.
    """
    return sample_entries(spec, seed.generator(), (spec.n, spec.n))


@dataclass(frozen=True)
class GrowthVector:
    """Deterministic positive growth vector (all ones in the homogeneous case)."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 1 or v.size == 0:
            raise ConfigurationError("growth vector must be a nonempty 1-d array")
        if not np.all(np.isfinite(v)) or np.any(v <= 0.0):
            raise ConfigurationError("growth vector components must be finite and > 0")
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return self.values.size

    @classmethod
    def ones(cls, n: int) -> "GrowthVector":
        return cls(np.ones(n))

    @classmethod
    def from_file(cls, path) -> "GrowthVector":
        return cls(np.loadtxt(path, dtype=np.float64, ndmin=1))


def uniform_growth_vector(n: int) -> GrowthVector:
    """Growth rates spread evenly over (1, 3]: component i is 1 + 2i/n, i = 1..n."""
    if n < 1:
        raise ConfigurationError(f"n must be >= 1, got {n}")
    i = np.arange(1, n + 1, dtype=np.float64)
    return GrowthVector(1.0 + 2.0 * i / n)


def vector_stats(r: GrowthVector) -> tuple[float, float, float]:
    """(r_min, r_max, sigma_r) with sigma_r = sqrt(mean of squared components).

    By norm ordering r_min <= sigma_r <= r_max always holds.
    """
    v = r.values
    return float(v.min()), float(v.max()), float(np.sqrt(np.mean(v * v)))
