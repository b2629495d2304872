"""Noise families, exponential tilts, and planted-submatrix instances.

All three built-in base measures have mean 0 and variance 1: the standard
normal, a centered unit Poisson, and the symmetric two-point (Rademacher)
distribution.  Tilting by ``theta`` reweights the density by
``exp(x * theta - log_mgf(theta))``, which shifts mass upward and models the
elevated block.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .stats import SubmatrixSupport

__all__ = [
    "NoiseFamily",
    "PlantedInstance",
    "TiltedDistribution",
    "generate_instance",
    "log_mgf",
    "sample_tilted",
]


class NoiseFamily(enum.Enum):
    """Mean-zero, unit-variance base measures with finite two-sided mgf."""

    GAUSSIAN = "gaussian"
    CENTERED_POISSON = "centered-poisson"
    RADEMACHER = "rademacher"

    @property
    def theta_star(self) -> float:
        """Upper limit of valid tilt parameters (infinite for all built-ins)."""
        return math.inf

    @property
    def code(self) -> int:
        return _FAMILY_CODES[self]

    @classmethod
    def parse(cls, name) -> "NoiseFamily":
        if isinstance(name, cls):
            return name
        key = str(name).strip().lower().replace("_", "-")
        for member in cls:
            if member.value == key:
                return member
        raise ValueError(
            f"unknown noise family {name!r}; choose from "
            f"{[m.value for m in cls]}"
        )


_FAMILY_CODES = {
    NoiseFamily.GAUSSIAN: _kernels.FAMILY_GAUSSIAN,
    NoiseFamily.CENTERED_POISSON: _kernels.FAMILY_CENTERED_POISSON,
    NoiseFamily.RADEMACHER: _kernels.FAMILY_RADEMACHER,
}


def log_mgf(family: NoiseFamily, theta: float) -> float:
    """Log moment generating function of the base measure at ``theta``.

    Closed forms: theta^2/2 (Gaussian), e^theta - 1 - theta (centered
    Poisson), log cosh theta (Rademacher).  Negative theta is permitted.
    """
    family = NoiseFamily.parse(family)
    theta = float(theta)
    if not math.isfinite(theta):
        raise ValueError(f"theta must be finite, got {theta}")
    if family is NoiseFamily.GAUSSIAN:
        return 0.5 * theta * theta
    if family is NoiseFamily.CENTERED_POISSON:
        return math.expm1(theta) - theta
    a = abs(theta)
    # log cosh in overflow-safe form.
    return a + math.log1p(math.exp(-2.0 * a)) - math.log(2.0)


@dataclass(frozen=True)
class TiltedDistribution:
    """A noise family tilted upward by a nonnegative parameter."""

    family: NoiseFamily
    theta: float

    def __post_init__(self):
        object.__setattr__(self, "family", NoiseFamily.parse(self.family))
        theta = float(self.theta)
        if not math.isfinite(theta) or theta < 0.0:
            raise ValueError(f"theta must be finite and nonnegative, got {self.theta}")
        if theta >= self.family.theta_star:
            raise ValueError(f"theta={theta} is not below theta_star")
        object.__setattr__(self, "theta", theta)


def sample_tilted(dist: TiltedDistribution, count: int, seed: int) -> np.ndarray:
    """IID draws from the tilted distribution; count 0 gives an empty vector.

    The tilted laws are Normal(theta, 1), Pois(e^theta) - 1, and +/-1 with
    P(+1) = e^theta / (e^theta + e^-theta).
    """
    count = int(count)
    if count < 0:
        raise ValueError(f"count must be nonnegative, got {count}")
    return _kernels.tilted_draws(dist.family.code, dist.theta, count, int(seed))


@dataclass(frozen=True)
class PlantedInstance:
    """A generated data matrix with the planted block's ground truth."""

    data: np.ndarray
    support: SubmatrixSupport | None
    theta: float
    family: NoiseFamily
    seed: int


def generate_instance(
    M: int, N: int, m: int, n: int, theta: float, family: NoiseFamily, seed: int
) -> PlantedInstance:
    """M-by-N noise matrix whose top-left m-by-n block is tilted by theta.

    Entry (i, j) owns its own seed stream derived from (seed, i, j), so the
    output is independent of generation order.  theta = 0 or an empty block
    yields pure noise with the support recorded as absent.
    """
    M, N, m, n = int(M), int(N), int(m), int(n)
    if M < 1 or N < 1:
        raise ValueError(f"matrix dimensions must be positive, got ({M}, {N})")
    if not 0 <= m <= M:
        raise ValueError(f"m must lie in [0, M]={M}, got {m}")
    if not 0 <= n <= N:
        raise ValueError(f"n must lie in [0, N]={N}, got {n}")
    family = NoiseFamily.parse(family)
    theta = float(theta)
    if not math.isfinite(theta) or theta < 0.0:
        raise ValueError(f"theta must be finite and nonnegative, got {theta}")
    seed = int(seed)
    data = _kernels.generate_matrix(family.code, theta, M, N, m, n, seed)
    planted = theta > 0.0 and m > 0 and n > 0
    support = SubmatrixSupport(rows=range(m), cols=range(n)) if planted else None
    return PlantedInstance(
        data=data, support=support, theta=theta, family=family, seed=seed
    )
