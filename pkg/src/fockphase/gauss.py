"""Truncated Gauss-sum factor checking driven by the phase-measurement protocols.

A trial divisor n_trial of the target N_target is probed by accumulating the
quadratic phases 2 pi k^2 N_target / n_trial, k = 0..K, one interferometer
run per term.  Averaging the measured cosine terms gives

    R = eps^(N-1)/(K+1) * sum_k exp(-2 pi k^2 Gamma N_target / (w_eff n_trial))
                               * cos(2 pi k^2 N_target / n_trial),

which equals eps^(N-1) exactly when n_trial divides N_target and stays below
1/sqrt(2) for non-factors once K is moderately large.  Larger photon numbers
raise the Kerr-shifted w_eff and so shorten every wait, which is what makes
the damped sum usable for bigger targets.

Phase arithmetic reduces k^2 N_target mod n_trial in exact integers before
any trigonometry, so targets far beyond 2^53 classify without precision loss.
"""
from __future__ import annotations

import json
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .dynamics import QubitParams, ResonatorParams, effective_frequency
from .gates import CouplerParams
from .protocols import SystemParams, measured_pe_after_free

__all__ = [
    "UnboundedEstimateError",
    "GaussConfig",
    "GaussRow",
    "GaussReport",
    "FACTOR_THRESHOLD",
    "gauss_sum",
    "wait_times",
    "truncated_real_sum",
    "simulated_term",
    "truncated_real_sum_simulated",
    "classify_factors",
    "estimate_max_factorizable",
]

FACTOR_THRESHOLD = 1.0 / math.sqrt(2.0)

_SIMULATED_MAX_PHOTONS = 8
_SIMULATED_MAX_TERMS = 6


class UnboundedEstimateError(ValueError):
    """No damping means no finite bound on the factorizable target size."""


@dataclass(frozen=True)
class GaussConfig:
    """One factor-checking run: target, truncation K, and the physical knobs."""

    n_target: int
    k_terms: int = 4
    photons: int = 1
    res: ResonatorParams = field(default_factory=ResonatorParams)
    epsilon: float = 1.0
    mode: str = "analytic"

    def __post_init__(self):
        if self.n_target < 2:
            raise ValueError(f"target must be >= 2, got {self.n_target}")
        if self.k_terms < 0:
            raise ValueError(f"K must be nonnegative, got {self.k_terms}")
        if self.photons < 1:
            raise ValueError(f"photon number must be >= 1, got {self.photons}")
        if not 0.0 < self.epsilon <= 1.0:
            raise ValueError(f"epsilon must be in (0, 1], got {self.epsilon}")
        if self.mode not in ("analytic", "simulated"):
            raise ValueError(f"mode must be analytic or simulated, got {self.mode!r}")
        if self.mode == "simulated":
            if self.photons > _SIMULATED_MAX_PHOTONS:
                raise ValueError(
                    f"simulated mode supports at most {_SIMULATED_MAX_PHOTONS} photons"
                )
            if self.k_terms > _SIMULATED_MAX_TERMS:
                raise ValueError(
                    f"simulated mode supports at most K={_SIMULATED_MAX_TERMS}"
                )

    def effective_omega(self) -> float:
        return effective_frequency(self.res, self.photons)


@dataclass(frozen=True)
class GaussRow:
    trial: int
    value: float
    is_factor: bool


@dataclass(frozen=True)
class GaussReport:
    rows: tuple[GaussRow, ...]
    threshold: float
    scan_range: tuple[int, int]
    n_target: int

    def candidates(self) -> list[int]:
        return [r.trial for r in self.rows if r.is_factor]

    def to_csv(self) -> str:
        lines = ["trial,value,is_factor"]
        for r in self.rows:
            lines.append(f"{r.trial},{r.value:.12g},{int(r.is_factor)}")
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        payload = {
            "n_target": self.n_target,
            "threshold": self.threshold,
            "scan_range": list(self.scan_range),
            "rows": [
                {"trial": r.trial, "value": float(f"{r.value:.12g}"), "is_factor": r.is_factor}
                for r in self.rows
            ],
            "candidates": self.candidates(),
        }
        return json.dumps(payload, indent=2) + "\n"


def _reduced_phase(k: int, n_target: int, trial: int) -> float:
    """2 pi (k^2 n_target mod trial) / trial, exact in integer arithmetic."""
    return 2.0 * math.pi * ((k * k * n_target) % trial) / trial


def gauss_sum(n_target: int, trial: int) -> complex:
    """Full normalized quadratic sum; |result| = 1 iff trial divides n_target."""
    if trial < 2:
        raise ValueError(f"trial divisor must be >= 2, got {trial}")
    total = 0j
    for k in range(trial):
        total += np.exp(-1j * _reduced_phase(k, n_target, trial))
    return complex(total / trial)


def wait_times(cfg: GaussConfig, trial: int) -> np.ndarray:
    """Free-evolution times 2 pi k^2 N_target / (trial * w_eff * photons), k = 0..K."""
    if trial < 2:
        raise ValueError(f"trial divisor must be >= 2, got {trial}")
    k = np.arange(cfg.k_terms + 1, dtype=float)
    w_eff = cfg.effective_omega()
    return 2.0 * math.pi * k * k * cfg.n_target / (trial * w_eff * cfg.photons)


def _damping_exponent(cfg: GaussConfig, trial: int, k: int) -> float:
    # Gamma * N * tau_k collapses to 2 pi k^2 Gamma N_target / (w_eff * trial)
    return 2.0 * math.pi * k * k * cfg.res.gamma * cfg.n_target / (cfg.effective_omega() * trial)


def truncated_real_sum(cfg: GaussConfig, trial: int) -> float:
    """Closed-form damped cosine average (the measured signal, no simulation)."""
    if trial < 2:
        raise ValueError(f"trial divisor must be >= 2, got {trial}")
    total = 0.0
    for k in range(cfg.k_terms + 1):
        total += math.exp(-_damping_exponent(cfg, trial, k)) * math.cos(
            _reduced_phase(k, cfg.n_target, trial)
        )
    return cfg.epsilon ** (cfg.photons - 1) * total / (cfg.k_terms + 1)


def _simulation_params(cfg: GaussConfig) -> SystemParams:
    res = cfg.res
    if res.dim < cfg.photons + 2:
        res = ResonatorParams(
            omega=res.omega, gamma=res.gamma, chi=res.chi, dim=cfg.photons + 2
        )
    q = QubitParams(omega0=res.omega, g=0.02 * res.omega, rabi=0.02 * res.omega)
    return SystemParams(
        res=res,
        qubit1=q,
        qubit2=q,
        coupler=CouplerParams(lam=0.05 * res.omega),
        epsilon=cfg.epsilon,
    )


def simulated_term(cfg: GaussConfig, trial: int, k: int) -> float:
    """One protocol run at the k-th wait, inverted to the damped cosine term.

    Odd photon numbers measure the cosine quadrature directly.  Even photon
    numbers measure the sine, so their wait is extended by a quarter fringe
    (pi / (2 w_eff N)) and the known extra damping of that quarter period is
    divided back out; the branch sign then maps 2 P_e - 1 onto the term.
    """
    if cfg.mode != "simulated":
        raise ValueError("simulated_term requires mode='simulated'")
    if not 0 <= k <= cfg.k_terms:
        raise ValueError(f"term index {k} outside 0..{cfg.k_terms}")
    tau = float(wait_times(cfg, trial)[k])
    params = _simulation_params(cfg)
    n = cfg.photons
    if n % 2 == 0:
        shift = 0.5 * math.pi / (cfg.effective_omega() * n)
        compensation = math.exp(cfg.res.gamma * n * shift)
        sign = 1.0 if n % 4 == 2 else -1.0
        tau += shift
    else:
        compensation = 1.0
        sign = 1.0 if n % 4 == 3 else -1.0
    record = measured_pe_after_free(n, tau, params)
    return sign * (2.0 * record.p_excited - 1.0) * compensation


def truncated_real_sum_simulated(cfg: GaussConfig, trial: int) -> float:
    vals = [simulated_term(cfg, trial, k) for k in range(cfg.k_terms + 1)]
    return float(np.mean(vals))


def classify_factors(cfg: GaussConfig, workers: int = 1) -> GaussReport:
    """Scan trial divisors 2..floor(sqrt(N_target)) and threshold |R| at 1/sqrt(2)."""
    if cfg.n_target < 4:
        raise ValueError(f"need a composite-sized target >= 4, got {cfg.n_target}")
    hi = math.isqrt(cfg.n_target)
    trials = list(range(2, hi + 1))
    if trials and cfg.k_terms >= trials[0]:
        warnings.warn(
            "K is not smaller than the smallest trial divisor; the non-factor "
            "bound 1/sqrt(2) is asymptotic in K and may be approached",
            UserWarning,
            stacklevel=2,
        )

    value = truncated_real_sum if cfg.mode == "analytic" else truncated_real_sum_simulated

    def one(trial: int) -> GaussRow:
        v = abs(value(cfg, trial))
        return GaussRow(trial=trial, value=v, is_factor=v >= FACTOR_THRESHOLD)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            rows = list(ex.map(one, trials))
    else:
        rows = [one(t) for t in trials]
    rows.sort(key=lambda r: r.trial)
    return GaussReport(
        rows=tuple(rows),
        threshold=FACTOR_THRESHOLD,
        scan_range=(2, hi),
        n_target=cfg.n_target,
    )


def estimate_max_factorizable(res: ResonatorParams, photons: int, k_max: int) -> int:
    """Largest target whose k_max-th damping exponent stays below 1 at trial 2.

    The rule 2 pi k^2 Gamma N / (w_eff * 2) <= 1 keeps the last term's
    exponential factor above 1/e, giving N_max = floor(w_eff / (pi k_max^2 Gamma)).
    """
    if photons < 1:
        raise ValueError(f"photon number must be >= 1, got {photons}")
    if k_max < 1:
        raise ValueError(f"k_max must be >= 1, got {k_max}")
    if res.gamma == 0:
        raise UnboundedEstimateError(
            "no photon loss: the factorizable size is unbounded by damping"
        )
    w_eff = effective_frequency(res, photons)
    return int(w_eff / (math.pi * k_max * k_max * res.gamma))
