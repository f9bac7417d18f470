"""Error propagation for resonator frequency, length, and Kerr-strength estimates.

A single interferometer run reports P_e; repeating M times gives the binomial
standard error sqrt(P_e (1 - P_e) / M), which propagates to any parameter x as

    |delta x| = sqrt(P_e (1 - P_e)) / (sqrt(M) |dP_e/dx|).

The closed-form optima below evaluate this at the fringe zero crossing
(P_e = 1/2, maximal slope).  Without loss the frequency uncertainty is
eps^(1-N) / (sqrt(M) N tau); with loss, optimizing the interrogation time at
tau = 1/(Gamma N) leaves e Gamma eps^(1-N)/sqrt(M) independent of N.  The
Kerr strength enters the accumulated phase through the shifted frequency, and
its quoted minimum e eps^(1-N) Gamma / (sqrt(M) N) uses the large-N count of
phase-sensitive photon pairs (exact propagation carries N-1 in place of N).
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

from .dynamics import ResonatorParams

__all__ = [
    "DivergentUncertaintyError",
    "MetrologyConfig",
    "MetrologyResult",
    "uncertainty_omega",
    "min_uncertainty_omega",
    "length_uncertainty",
    "min_uncertainty_chi",
]


class DivergentUncertaintyError(RuntimeError):
    """The response curve has no usable slope at the operating point."""


@dataclass(frozen=True)
class MetrologyConfig:
    """Measurement budget and circuit settings for one estimation task."""

    shots: int
    res: ResonatorParams = field(default_factory=ResonatorParams)
    photons: int = 1
    epsilon: float = 1.0
    tau: float | None = None  # interrogation time; required for lossless optima
    length: float | None = None

    def __post_init__(self):
        if self.shots < 1:
            raise ValueError(f"need at least one measurement, got {self.shots}")
        if self.photons < 1:
            raise ValueError(f"photon number must be >= 1, got {self.photons}")
        if not 0.0 < self.epsilon <= 1.0:
            raise ValueError(f"epsilon must be in (0, 1], got {self.epsilon}")
        if self.tau is not None and self.tau <= 0:
            raise ValueError("interrogation time must be positive")
        if self.length is not None and self.length <= 0:
            raise ValueError("resonator length must be positive")


@dataclass(frozen=True)
class MetrologyResult:
    delta_omega: float
    tau_opt: float
    delta_length: float | None = None
    delta_chi: float | None = None
    phase_condition: str = "omega*tau at a fringe zero crossing (odd multiple of pi/2 for the cosine branch)"

    def to_json(self) -> str:
        payload = {
            "delta_omega": self.delta_omega,
            "tau_opt": self.tau_opt,
            "delta_length": self.delta_length,
            "delta_chi": self.delta_chi,
            "phase_condition": self.phase_condition,
        }
        return json.dumps(payload, indent=2) + "\n"


def uncertainty_omega(
    pe_curve: Callable[[float], float],
    omega: float,
    cfg: MetrologyConfig,
    rel_step: float = 1e-6,
) -> float:
    """Propagate binomial noise through a measured P_e(omega) curve.

    The slope is a central difference at step rel_step*omega refined by one
    Richardson extrapolation, so smooth curves are differentiated to O(h^4).
    """
    h = rel_step * omega
    p0 = min(max(pe_curve(omega), 0.0), 1.0)
    d1 = (pe_curve(omega + h) - pe_curve(omega - h)) / (2.0 * h)
    d2 = (pe_curve(omega + 0.5 * h) - pe_curve(omega - 0.5 * h)) / h
    slope = (4.0 * d2 - d1) / 3.0
    if abs(slope) < 1e-14:
        raise DivergentUncertaintyError(
            f"|dP/domega| = {abs(slope):.2e} at omega = {omega}; "
            "operating point sits on a fringe extremum"
        )
    return math.sqrt(p0 * (1.0 - p0)) / (math.sqrt(cfg.shots) * abs(slope))


def min_uncertainty_omega(cfg: MetrologyConfig) -> MetrologyResult:
    """Closed-form optimum of the frequency uncertainty.

    Lossless: eps^(1-N) / (sqrt(M) N tau) at the given tau.  With loss the
    optimum interrogation time is 1/(Gamma N) and the value
    e * eps^(1-N) * Gamma / sqrt(M) no longer improves with photon number.
    """
    eps_factor = cfg.epsilon ** (1 - cfg.photons)
    if cfg.epsilon < 1.0:
        warnings.warn(
            "imperfect gates scale the uncertainty up by epsilon^(1-N)",
            UserWarning,
            stacklevel=2,
        )
    root_m = math.sqrt(cfg.shots)
    if cfg.res.gamma == 0:
        if cfg.tau is None:
            raise ValueError("lossless optimum needs an interrogation time tau")
        delta = eps_factor / (root_m * cfg.photons * cfg.tau)
        tau_opt = cfg.tau
    else:
        delta = math.e * eps_factor * cfg.res.gamma / root_m
        tau_opt = 1.0 / (cfg.res.gamma * cfg.photons)
    d_len = None
    if cfg.length is not None:
        d_len = cfg.length * delta / cfg.res.omega
    return MetrologyResult(delta_omega=delta, tau_opt=tau_opt, delta_length=d_len)


def length_uncertainty(cfg: MetrologyConfig, delta_omega: float) -> float:
    """|delta L| = L |delta omega| / omega for a half-wave resonator."""
    if cfg.length is None:
        raise ValueError("no resonator length configured")
    return cfg.length * delta_omega / cfg.res.omega


def min_uncertainty_chi(cfg: MetrologyConfig) -> float:
    """Closed-form optimum e * eps^(1-N) * Gamma / (sqrt(M) N) for the Kerr strength.

    Needs N >= 2: with fewer than two photons the Kerr phase n(n-1)chi*t
    never accumulates.  The N in the denominator is the large-N photon-pair
    count; exact propagation through the phase chi*N(N-1)*tau replaces it
    with N-1.
    """
    if cfg.photons < 2:
        raise ValueError("Kerr strength is unobservable with fewer than two photons")
    eps_factor = cfg.epsilon ** (1 - cfg.photons)
    return math.e * eps_factor * cfg.res.gamma / (math.sqrt(cfg.shots) * cfg.photons)
