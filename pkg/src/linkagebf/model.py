"""Observed data, chromosome geometry, and priors on the recombination rate.

Rates ``rho`` and map positions ``x`` are plain floats, validated where they
enter. Prior densities accept scalars or numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Mapping, Tuple, Union

import numpy as np

from .exceptions import DomainError, ImproperPriorError
from .numerics import log_beta

__all__ = [
    "UNLINKED_RHO",
    "CrossCount",
    "haldane_map",
    "haldane_inverse",
    "distance_prior_density",
    "ContinuousPrior",
    "FlatHaldane",
    "ScaledBeta",
    "HaldaneDistance",
    "ImproperOneOverRho",
    "ImproperOneOverRhoOneMinusRho",
    "MixturePrior",
    "primrose_mixture",
    "prior_density",
    "prior_support",
    "prior_from_dict",
    "mixture_from_dict",
]

UNLINKED_RHO = 0.5

ArrayLike = Union[float, np.ndarray]


@dataclass(frozen=True)
class CrossCount:
    """``n_crossovers`` recombinant meioses out of ``n_meioses``."""

    n_meioses: int
    n_crossovers: int

    def __post_init__(self):
        for name in ("n_meioses", "n_crossovers"):
            value = getattr(self, name)
            if isinstance(value, bool) or int(value) != value:
                raise DomainError(f"{name} must be an integer, got {value!r}")
            object.__setattr__(self, name, int(value))
        if not 0 <= self.n_crossovers <= self.n_meioses:
            raise DomainError(
                f"need 0 <= n_crossovers <= n_meioses, got "
                f"{self.n_crossovers} of {self.n_meioses}"
            )

    @property
    def n_parental(self) -> int:
        return self.n_meioses - self.n_crossovers


def check_rho(rho: float) -> float:
    rho = float(rho)
    if not 0.0 <= rho <= UNLINKED_RHO:
        raise DomainError(f"recombination rate must lie in [0, 1/2], got {rho}")
    return rho


def _check_length(L: float) -> float:
    L = float(L)
    if not (L > 0 and math.isfinite(L)):
        raise DomainError(f"chromosome length must be positive, got {L}")
    return L


def haldane_map(x: ArrayLike, L: float = 1.0) -> ArrayLike:
    """Recombination rate between loci a fraction ``x`` of a chromosome apart.

    ``L`` is the chromosome length in Morgan. rho = (1 - exp(-2 L x)) / 2.
    """
    L = _check_length(L)
    xa = np.asarray(x, dtype=float)
    if np.any((xa < 0) | (xa > 1)) or np.any(np.isnan(xa)):
        raise DomainError("map position must lie in [0, 1]")
    rho = -0.5 * np.expm1(-2.0 * L * xa)
    return float(rho) if np.ndim(rho) == 0 else rho


def haldane_inverse(rho: ArrayLike, L: float = 1.0) -> ArrayLike:
    """Map position (fraction of the chromosome) giving recombination rate ``rho``.

    Unlinked loci (rho = 1/2) have no finite distance and raise DomainError.
    The result can exceed 1 when rho is beyond the chromosome's largest rate.
    """
    L = _check_length(L)
    ra = np.asarray(rho, dtype=float)
    if np.any((ra < 0) | (ra >= UNLINKED_RHO)) or np.any(np.isnan(ra)):
        raise DomainError("haldane_inverse requires 0 <= rho < 1/2")
    x = -np.log1p(-2.0 * ra) / (2.0 * L)
    return float(x) if np.ndim(x) == 0 else x


def distance_prior_density(x: ArrayLike) -> ArrayLike:
    """Beta(1, 2) density 2(1 - x) of the distance between two uniform loci."""
    xa = np.asarray(x, dtype=float)
    dens = np.where((xa >= 0) & (xa <= 1), 2.0 * (1.0 - xa), 0.0)
    return float(dens) if np.ndim(dens) == 0 else dens


def _as_output(values: np.ndarray) -> ArrayLike:
    return float(values) if np.ndim(values) == 0 else values


class ContinuousPrior:
    """Base for the continuous priors on rho.

    Subclasses implement ``_density`` on numpy arrays that already lie in the
    support.
    """

    type_name: str = ""
    is_proper: bool = True
    is_sampleable: bool = False

    def support(self) -> Tuple[float, float]:
        return (0.0, UNLINKED_RHO)

    def density(self, rho: ArrayLike) -> ArrayLike:
        ra = np.asarray(rho, dtype=float)
        lo, hi = self.support()
        inside = (ra >= lo) & (ra <= hi)
        with np.errstate(divide="ignore", invalid="ignore"):
            dens = np.where(inside, self._density(np.where(inside, ra, lo)), 0.0)
        return _as_output(dens)

    def log_density(self, rho: ArrayLike) -> ArrayLike:
        with np.errstate(divide="ignore"):
            return _as_output(np.log(np.asarray(self.density(rho), dtype=float)))

    def sample(self, u: np.ndarray) -> np.ndarray:
        """Transform uniforms on [0, 1] into draws from this prior."""
        raise ImproperPriorError(f"cannot sample from the {self.type_name} prior")

    def _density(self, rho: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def to_dict(self) -> dict:
        return {"type": self.type_name}


@dataclass(frozen=True)
class FlatHaldane(ContinuousPrior):
    """Uniform density 2 on [0, 1/2)."""

    type_name = "flat"
    is_sampleable = True

    def _density(self, rho):
        return np.full_like(rho, 2.0)

    def sample(self, u):
        return UNLINKED_RHO * np.asarray(u, dtype=float)


@dataclass(frozen=True)
class ScaledBeta(ContinuousPrior):
    """Beta(alpha, beta) on [0, 1] stretched linearly onto [0, 1/2]."""

    alpha: float = 1.0
    beta: float = 1.0
    type_name = "scaled_beta"
    is_sampleable = True

    def __post_init__(self):
        for name in ("alpha", "beta"):
            value = float(getattr(self, name))
            if not (value > 0 and math.isfinite(value)):
                raise DomainError(f"{name} must be positive, got {value}")
            object.__setattr__(self, name, value)

    def _density(self, rho):
        u = 2.0 * rho
        a, b = self.alpha, self.beta
        # 0 ** 0 == 1 keeps the a == 1 or b == 1 endpoints finite.
        return 2.0 * np.exp(-log_beta(a, b)) * u ** (a - 1.0) * (1.0 - u) ** (b - 1.0)

    def sample(self, u):
        from scipy.special import betaincinv

        return UNLINKED_RHO * betaincinv(self.alpha, self.beta, np.asarray(u, dtype=float))

    def to_dict(self):
        return {"type": self.type_name, "alpha": self.alpha, "beta": self.beta}


@dataclass(frozen=True)
class HaldaneDistance(ContinuousPrior):
    """Prior on rho induced by a Beta(1, 2) map distance and Haldane's map.

    Both loci fall uniformly on a chromosome of ``L`` Morgan. With
    x(rho) = -ln(1 - 2 rho) / (2 L) the density is
    2 (1 - x(rho)) / (L (1 - 2 rho)), which for L = 1 is
    (2 + ln(1 - 2 rho)) / (1 - 2 rho).
    """

    L: float = 1.0
    type_name = "haldane_distance"
    is_sampleable = True

    def __post_init__(self):
        object.__setattr__(self, "L", _check_length(self.L))

    def support(self):
        return (0.0, -0.5 * math.expm1(-2.0 * self.L))

    def _density(self, rho):
        t = 1.0 - 2.0 * rho
        x = -np.log1p(-2.0 * rho) / (2.0 * self.L)
        return np.maximum(2.0 * (1.0 - x), 0.0) / (self.L * t)

    def cdf(self, rho: ArrayLike) -> ArrayLike:
        """Closed-form CDF, 1 - (1 - x(rho))**2 clipped to the support."""
        ra = np.asarray(rho, dtype=float)
        lo, hi = self.support()
        r = np.clip(ra, lo, hi)
        x = np.minimum(-np.log1p(-2.0 * r) / (2.0 * self.L), 1.0)
        return _as_output(1.0 - (1.0 - x) ** 2)

    def sample(self, u):
        from .montecarlo import distance_from_uniform

        return haldane_map(distance_from_uniform(u), self.L)

    def to_dict(self):
        return {"type": self.type_name, "L": self.L}


@dataclass(frozen=True)
class ImproperOneOverRho(ContinuousPrior):
    """Unnormalized density 1/rho; infinite at rho = 0."""

    type_name = "improper_1_over_rho"
    is_proper = False

    def _density(self, rho):
        return 1.0 / rho


@dataclass(frozen=True)
class ImproperOneOverRhoOneMinusRho(ContinuousPrior):
    """Unnormalized density 1/(rho (1 - rho)); infinite at rho = 0."""

    type_name = "improper_1_over_rho_1mrho"
    is_proper = False

    def _density(self, rho):
        return 1.0 / (rho * (1.0 - rho))


_PRIOR_TYPES = {
    cls.type_name: cls
    for cls in (
        FlatHaldane,
        ScaledBeta,
        HaldaneDistance,
        ImproperOneOverRho,
        ImproperOneOverRhoOneMinusRho,
    )
}


def prior_density(prior: ContinuousPrior, rho: ArrayLike) -> ArrayLike:
    """Density of ``prior`` at ``rho``; zero outside the prior's support.

    Improper priors return their unnormalized density, ``inf`` at rho = 0.
    """
    return prior.density(rho)


def prior_support(prior: ContinuousPrior) -> Tuple[float, float]:
    return prior.support()


def prior_from_dict(spec: Mapping[str, Any]) -> ContinuousPrior:
    """Build a prior from its JSON object form, e.g. ``{"type": "haldane_distance", "L": 1}``."""
    if not isinstance(spec, Mapping):
        raise DomainError(f"prior specification must be an object, got {spec!r}")
    kind = spec.get("type")
    if kind not in _PRIOR_TYPES:
        raise DomainError(
            f"unknown prior type {kind!r}; expected one of {sorted(_PRIOR_TYPES)}"
        )
    if kind == "scaled_beta":
        if "alpha" not in spec or "beta" not in spec:
            raise DomainError("scaled_beta prior needs 'alpha' and 'beta'")
        return ScaledBeta(spec["alpha"], spec["beta"])
    if kind == "haldane_distance":
        return HaldaneDistance(spec.get("L", 1.0))
    return _PRIOR_TYPES[kind]()


@dataclass(frozen=True)
class MixturePrior:
    """Point mass at ``point_mass_location`` plus a proper continuous prior.

    The point mass is the unlinked hypothesis, the continuous part the linked
    one.
    """

    point_mass_weight: float
    continuous: ContinuousPrior
    point_mass_location: float = UNLINKED_RHO

    def __post_init__(self):
        w = float(self.point_mass_weight)
        if not 0.0 <= w <= 1.0:
            raise DomainError(f"point mass weight must lie in [0, 1], got {w}")
        object.__setattr__(self, "point_mass_weight", w)
        object.__setattr__(self, "point_mass_location", check_rho(self.point_mass_location))
        if not isinstance(self.continuous, ContinuousPrior):
            raise DomainError("continuous component must be a ContinuousPrior")
        if not self.continuous.is_proper:
            raise ImproperPriorError(
                f"mixture components must be proper, got {self.continuous.type_name}"
            )

    @property
    def continuous_weight(self) -> float:
        return 1.0 - self.point_mass_weight

    def to_dict(self) -> dict:
        return {
            "point_mass_weight": self.point_mass_weight,
            "point_mass_location": self.point_mass_location,
            "continuous": self.continuous.to_dict(),
        }


def mixture_from_dict(spec: Mapping[str, Any]) -> MixturePrior:
    if not isinstance(spec, Mapping) or "continuous" not in spec:
        raise DomainError("mixture specification needs a 'continuous' prior object")
    return MixturePrior(
        point_mass_weight=spec.get("point_mass_weight", 11.0 / 12.0),
        continuous=prior_from_dict(spec["continuous"]),
        point_mass_location=spec.get("point_mass_location", UNLINKED_RHO),
    )


def primrose_mixture(continuous: ContinuousPrior = None) -> MixturePrior:
    """Twelve equal chromosomes: mass 11/12 on rho = 1/2, the rest linked."""
    return MixturePrior(11.0 / 12.0, continuous if continuous is not None else FlatHaldane())
