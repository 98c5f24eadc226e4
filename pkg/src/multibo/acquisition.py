"""Acquisition functions over the joint (value, gradient) posterior.

The joint families score a candidate by the product of an improvement factor
for the value and the probability that the gradient lies inside the band
(-epsilon, epsilon):

    joint PI: Q((xi - mu) / sigma) * band
    joint EI: [(mu - xi) Q((xi - mu)/sigma) + sigma phi((xi - mu)/sigma)] * band

where (mu, sigma) describe the value conditioned on gradient 0 — the center
of the band, which is narrow by construction. The vanilla families apply the
same improvement formulas to the unconditioned value marginal with no band
factor, and ``derivative_only`` keeps the band factor alone.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import gp
from .errors import ConfigError
from .numerics import normal_pdf, q_function

FAMILIES = ("joint_pi", "joint_ei", "vanilla_pi", "vanilla_ei", "derivative_only")

_BAND_FAMILIES = ("joint_pi", "joint_ei", "derivative_only")


@dataclass(frozen=True)
class AcquisitionConfig:
    """Family name plus improvement threshold ``threshold`` (objective units)
    and gradient band half-width ``epsilon``."""

    family: str
    threshold: float
    epsilon: float

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ConfigError(
                f"unknown acquisition family {self.family!r}; expected one of {FAMILIES}"
            )
        if not np.isfinite(self.threshold):
            raise ConfigError("threshold must be finite")
        if self.family in _BAND_FAMILIES and not self.epsilon > 0:
            raise ConfigError(f"epsilon must be positive for family {self.family!r}")

    @property
    def uses_value(self) -> bool:
        return self.family != "derivative_only"

    @property
    def uses_band(self) -> bool:
        return self.family in _BAND_FAMILIES


def improvement_probability(mean: float, std: float, threshold: float) -> float:
    """P(value > threshold) for a Gaussian value; degenerates to an indicator."""
    if std > 0.0:
        return q_function((threshold - mean) / std)
    if mean > threshold:
        return 1.0
    return 0.5 if mean == threshold else 0.0


def expected_improvement(mean: float, std: float, threshold: float) -> float:
    """E[(value - threshold)+] for a Gaussian value, in closed form."""
    if std > 0.0:
        z = (threshold - mean) / std
        return (mean - threshold) * q_function(z) + std * normal_pdf(z)
    return max(mean - threshold, 0.0)


def joint_pi_value(j: gp.JointGaussian, cfg: AcquisitionConfig) -> float:
    cond = gp.condition_value_on_gradient(j, np.zeros(j.dim))
    band = gp.gradient_band_probability(j, cfg.epsilon)
    return improvement_probability(cond.mean, cond.std, cfg.threshold) * band


def joint_ei_value(j: gp.JointGaussian, cfg: AcquisitionConfig) -> float:
    cond = gp.condition_value_on_gradient(j, np.zeros(j.dim))
    band = gp.gradient_band_probability(j, cfg.epsilon)
    return expected_improvement(cond.mean, cond.std, cfg.threshold) * band


def joint_pi(state: gp.GPState, x, cfg: AcquisitionConfig) -> float:
    """Joint probability of improvement at ``x``."""
    return joint_pi_value(gp.joint_posterior(state, x), cfg)


def joint_ei(state: gp.GPState, x, cfg: AcquisitionConfig) -> float:
    """Joint expected improvement at ``x``."""
    return joint_ei_value(gp.joint_posterior(state, x), cfg)


def vanilla_pi(state: gp.GPState, x, cfg: AcquisitionConfig) -> float:
    """Probability of improvement of the unconditioned value posterior."""
    mean, var = gp.value_posterior(state, x)
    return improvement_probability(mean, float(np.sqrt(var)), cfg.threshold)


def vanilla_ei(state: gp.GPState, x, cfg: AcquisitionConfig) -> float:
    """Expected improvement of the unconditioned value posterior."""
    mean, var = gp.value_posterior(state, x)
    return expected_improvement(mean, float(np.sqrt(var)), cfg.threshold)


def derivative_only(state: gp.GPState, x, cfg: AcquisitionConfig) -> float:
    """Gradient-band probability alone (ablation family)."""
    return gp.gradient_band_probability(gp.joint_posterior(state, x), cfg.epsilon)


_DISPATCH = {
    "joint_pi": joint_pi,
    "joint_ei": joint_ei,
    "vanilla_pi": vanilla_pi,
    "vanilla_ei": vanilla_ei,
    "derivative_only": derivative_only,
}


def evaluate(state: gp.GPState, x, cfg: AcquisitionConfig) -> float:
    """Evaluate the configured acquisition family at one point."""
    return _DISPATCH[cfg.family](state, x, cfg)
