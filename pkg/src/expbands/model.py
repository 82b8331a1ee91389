"""Progressively type-II censored experiments under the two-parameter
exponential model: schemes and their risk-set coefficients, maximum
likelihood and UMVU estimation, sample simulation, and monotone data
transforms for related location-scale families (e.g. Pareto via log).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
import numpy as np

from .errors import (
    DegenerateSampleError,
    DomainError,
    InvalidSchemeError,
    InvalidTransformError,
    ParseError,
)
from .streams import replicate_batches


@dataclass(frozen=True)
class CensoringScheme:
    """Design of a progressively type-II censored life test.

    n units start on test; at the j-th observed failure, removals[j-1] intact
    units are withdrawn, and the test stops after m observed failures. The
    derived coefficients gamma_j = sum_{i>=j} (removals[i] + 1) are the
    effective risk-set weights; gamma_1 equals n.
    """

    n: int
    m: int
    removals: tuple[int, ...]

    def __post_init__(self):
        if int(self.m) != self.m or int(self.n) != self.n:
            raise InvalidSchemeError("n and m must be integers")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "removals", tuple(int(r) for r in self.removals))
        if not 1 < self.m <= self.n:
            raise InvalidSchemeError(f"need 1 < m <= n, got m={self.m}, n={self.n}")
        if len(self.removals) != self.m:
            raise InvalidSchemeError(
                f"removal vector has length {len(self.removals)}, expected m={self.m}")
        if any(r < 0 for r in self.removals):
            raise InvalidSchemeError("removal counts must be nonnegative")
        if sum(self.removals) != self.n - self.m:
            raise InvalidSchemeError(
                f"removals sum to {sum(self.removals)}, expected n - m = {self.n - self.m}")

    @classmethod
    def complete(cls, n: int) -> "CensoringScheme":
        """Complete sample: every unit observed to failure."""
        return cls(n, n, (0,) * n)

    @classmethod
    def type2_right(cls, n: int, m: int) -> "CensoringScheme":
        """Conventional type-II right censoring: all withdrawals at the end."""
        return cls(n, m, (0,) * (m - 1) + (n - m,))

    @property
    def gammas(self) -> tuple[float, ...]:
        out = []
        acc = 0
        for r in reversed(self.removals):
            acc += r + 1
            out.append(float(acc))
        return tuple(reversed(out))

    @property
    def effective_n(self) -> float:
        return float(self.n)


@dataclass(frozen=True)
class GeneralizedScheme:
    """Ordered-data model given directly by positive risk-set coefficients.

    Covers sequential order statistics, where gamma_j = (n-j+1) * alpha_j for
    hazard factors alpha_j; only the gamma vector matters downstream.
    """

    gamma: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "gamma", tuple(float(g) for g in self.gamma))
        if len(self.gamma) < 2:
            raise InvalidSchemeError("need at least two coefficients (m > 1)")
        if any(not g > 0 for g in self.gamma):
            raise InvalidSchemeError("all gamma coefficients must be positive")

    @property
    def m(self) -> int:
        return len(self.gamma)

    @property
    def gammas(self) -> tuple[float, ...]:
        return self.gamma

    @property
    def effective_n(self) -> float:
        # the first coefficient plays the role of n in every pivot law
        return self.gamma[0]


Scheme = CensoringScheme | GeneralizedScheme


def gammas(scheme: Scheme) -> tuple[float, ...]:
    """Risk-set coefficients gamma_j of a scheme."""
    return scheme.gammas


@dataclass(frozen=True)
class LocScale:
    """Location-scale parameter point (mu, sigma), sigma > 0."""

    mu: float
    sigma: float

    def __post_init__(self):
        object.__setattr__(self, "mu", float(self.mu))
        object.__setattr__(self, "sigma", float(self.sigma))
        if not self.sigma > 0 or not math.isfinite(self.sigma) or not math.isfinite(self.mu):
            raise DomainError(f"need finite mu and sigma > 0, got ({self.mu}, {self.sigma})")

    def cdf(self, x):
        """Exponential location-scale cdf at x (vectorized)."""
        x = np.asarray(x, dtype=float)
        z = (x - self.mu) / self.sigma
        out = -np.expm1(-np.maximum(z, 0.0))
        return out if out.ndim else float(out)


@dataclass(frozen=True)
class MleEstimate:
    """Maximum likelihood estimate (mu_hat, sigma_hat)."""

    mu_hat: float
    sigma_hat: float

    def __post_init__(self):
        if not self.sigma_hat > 0:
            raise DegenerateSampleError(
                f"sigma_hat must be positive, got {self.sigma_hat}")

    @property
    def theta(self) -> LocScale:
        return LocScale(self.mu_hat, self.sigma_hat)


@dataclass(frozen=True)
class ProgressiveSample:
    """Ordered observed failure times under a scheme."""

    scheme: Scheme
    x: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "x", tuple(float(v) for v in self.x))
        if len(self.x) != self.scheme.m:
            raise DomainError(
                f"sample has {len(self.x)} observations, scheme expects m={self.scheme.m}")
        if any(b < a for a, b in zip(self.x, self.x[1:])):
            raise DomainError("failure times must be nondecreasing")


def mle(sample: ProgressiveSample) -> MleEstimate:
    """MLE of (mu, sigma): the first failure time and the mean of the
    gamma-weighted spacings."""
    g = sample.scheme.gammas
    m = sample.scheme.m
    x = sample.x
    total = 0.0
    for j in range(1, m):
        total += g[j] * (x[j] - x[j - 1])
    sigma_hat = total / m
    if sigma_hat <= 0.0:
        raise DegenerateSampleError("all failure times equal; scale estimate is zero")
    return MleEstimate(mu_hat=x[0], sigma_hat=sigma_hat)


def umvue(est: MleEstimate, scheme: Scheme) -> tuple[float, float]:
    """UMVU estimates (mu_tilde, sigma_tilde) from the MLE."""
    m = scheme.m
    sigma_tilde = m * est.sigma_hat / (m - 1)
    mu_tilde = est.mu_hat - sigma_tilde / scheme.effective_n
    return mu_tilde, sigma_tilde


def simulate_sample(theta: LocScale, scheme: Scheme,
                    rng: np.random.Generator) -> ProgressiveSample:
    """Draw one sample via the normalized-spacings construction:
    X_j = mu + sigma * sum_{i<=j} E_i / gamma_i with E_i iid standard
    exponential, which is sorted by construction."""
    g = np.asarray(scheme.gammas)
    e = rng.standard_exponential(scheme.m)
    x = theta.mu + theta.sigma * np.cumsum(e / g)
    return ProgressiveSample(scheme=scheme, x=tuple(x))


def simulate_mles(theta: LocScale, scheme: Scheme, replicates: int,
                  seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Simulate `replicates` samples and return their MLE vectors.

    Goes through the same spacings construction and spacing-sum estimator as
    simulate_sample/mle, vectorized over replicate batches under the
    deterministic stream contract.
    """
    g = np.asarray(scheme.gammas)
    m = scheme.m
    mu_hats = np.empty(replicates)
    sigma_hats = np.empty(replicates)
    for start, count, rng in replicate_batches(seed, replicates):
        e = rng.standard_exponential((count, m))
        x = theta.mu + theta.sigma * np.cumsum(e / g, axis=1)
        mu_hats[start:start + count] = x[:, 0]
        sigma_hats[start:start + count] = np.diff(x, axis=1) @ g[1:] / m
    return mu_hats, sigma_hats


# ---------------------------------------------------------------------------
# Monotone data transforms (general location-scale families)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MonotoneTransform:
    """Strictly increasing map applied elementwise before estimation.

    kind "identity" and "log" are closed-form; kind "table" interpolates a
    user-supplied strictly increasing table of (x, g(x)) pairs linearly and
    is invertible on its range.
    """

    kind: str
    table_x: tuple[float, ...] = field(default=())
    table_y: tuple[float, ...] = field(default=())

    def __post_init__(self):
        if self.kind not in ("identity", "log", "table"):
            raise InvalidTransformError(f"unknown transform kind {self.kind!r}")
        if self.kind == "table":
            xs, ys = self.table_x, self.table_y
            if len(xs) < 2 or len(xs) != len(ys):
                raise InvalidTransformError("table transform needs >= 2 (x, y) pairs")
            if any(b <= a for a, b in zip(xs, xs[1:])) or any(b <= a for a, b in zip(ys, ys[1:])):
                raise InvalidTransformError("table transform must be strictly increasing")

    def apply(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "identity":
            out = x.copy()
        elif self.kind == "log":
            if np.any(x <= 0):
                raise InvalidTransformError("log transform requires positive data")
            out = np.log(x)
        else:
            if np.any(x < self.table_x[0]) or np.any(x > self.table_x[-1]):
                raise InvalidTransformError("data outside the transform table range")
            out = np.interp(x, self.table_x, self.table_y)
        return out if out.ndim else float(out)

    def invert(self, y):
        """Back-transform band x-coordinates to the original scale."""
        y = np.asarray(y, dtype=float)
        if self.kind == "identity":
            out = y.copy()
        elif self.kind == "log":
            out = np.exp(y)
        else:
            out = np.interp(y, self.table_y, self.table_x)
        return out if out.ndim else float(out)


IDENTITY = MonotoneTransform("identity")
LOG = MonotoneTransform("log")


def g_transform(sample: ProgressiveSample, g: MonotoneTransform) -> ProgressiveSample:
    """Apply a strictly increasing map to the failure times so downstream
    machinery runs on the transformed scale."""
    return ProgressiveSample(scheme=sample.scheme, x=tuple(g.apply(np.asarray(sample.x))))


# ---------------------------------------------------------------------------
# Sample file format
# ---------------------------------------------------------------------------

def read_sample_csv(path: str | Path) -> ProgressiveSample:
    """Read a sample from CSV with header ``time,removed``, one row per
    observed failure; n is inferred as m + sum(removed)."""
    path = Path(path)
    times: list[float] = []
    removed: list[int] = []
    try:
        with path.open(newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != ["time", "removed"]:
                raise ParseError(f"{path}: expected header 'time,removed', got {reader.fieldnames}")
            for lineno, row in enumerate(reader, start=2):
                try:
                    times.append(float(row["time"]))
                    removed.append(int(row["removed"]))
                except (TypeError, ValueError) as exc:
                    raise ParseError(f"{path}:{lineno}: bad row {row!r}") from exc
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    if len(times) < 2:
        raise ParseError(f"{path}: need at least two observed failures")
    m = len(times)
    scheme = CensoringScheme(n=m + sum(removed), m=m, removals=tuple(removed))
    return ProgressiveSample(scheme=scheme, x=tuple(times))


def write_sample_csv(sample: ProgressiveSample, path: str | Path) -> None:
    if not isinstance(sample.scheme, CensoringScheme):
        raise DomainError("only integer-removal censoring schemes have a CSV form")
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["time", "removed"])
        for t, r in zip(sample.x, sample.scheme.removals):
            writer.writerow([repr(t), r])


def load_insulating_fluid() -> ProgressiveSample:
    """Bundled insulating-fluid breakdown data: m=8 failures out of n=19
    units with removal scheme (0,0,3,0,3,0,0,5)."""
    ref = resources.files("expbands.data").joinpath("insulating_fluid.csv")
    with resources.as_file(ref) as path:
        return read_sample_csv(path)
