import math

import pytest

from fockphase.dynamics import ResonatorParams
from fockphase.metrology import (
    DivergentUncertaintyError,
    MetrologyConfig,
    MetrologyResult,
    length_uncertainty,
    min_uncertainty_chi,
    min_uncertainty_omega,
    uncertainty_omega,
)
from fockphase.protocols import SystemParams, run_protocol, single_photon_schedule


def _single_photon_curve(tau: float, gamma_tau: float = 0.0):
    def pe(omega: float) -> float:
        return 0.5 * (1 - math.exp(-gamma_tau) * math.cos(omega * tau))

    return pe


def test_uncertainty_at_quadrature_is_inverse_tau():
    tau = 0.5 * math.pi  # omega*tau = pi/2 at omega = 1
    cfg = MetrologyConfig(shots=1)
    got = uncertainty_omega(_single_photon_curve(tau), 1.0, cfg)
    assert got == pytest.approx(1.0 / tau, rel=1e-8)


def test_uncertainty_on_simulated_curve():
    tau = 0.5 * math.pi
    params = SystemParams.default(photons=1, g=2.0, rabi=2.0)

    def pe(omega: float) -> float:
        import dataclasses

        p = dataclasses.replace(
            params, res=dataclasses.replace(params.res, omega=omega)
        )
        return run_protocol(single_photon_schedule(tau, p), p).p_excited

    cfg = MetrologyConfig(shots=1)
    got = uncertainty_omega(pe, 1.0, cfg)
    assert got == pytest.approx(1.0 / tau, rel=1e-6)


def test_divergence_at_fringe_extremum():
    tau = math.pi  # omega*tau = pi: cos slope vanishes
    cfg = MetrologyConfig(shots=1)
    with pytest.raises(DivergentUncertaintyError):
        uncertainty_omega(_single_photon_curve(tau), 1.0, cfg)


def test_shot_scaling():
    tau = 0.5 * math.pi
    one = uncertainty_omega(_single_photon_curve(tau), 1.0, MetrologyConfig(shots=1))
    hundred = uncertainty_omega(_single_photon_curve(tau), 1.0, MetrologyConfig(shots=100))
    assert hundred == pytest.approx(one / 10.0, rel=1e-10)


def test_derivative_matches_analytic_slope():
    tau = 1.7
    pe = _single_photon_curve(tau, gamma_tau=0.3)
    cfg = MetrologyConfig(shots=1)
    got = uncertainty_omega(pe, 1.0, cfg)
    slope = 0.5 * math.exp(-0.3) * tau * math.sin(tau)
    p0 = pe(1.0)
    want = math.sqrt(p0 * (1 - p0)) / abs(slope)
    assert got == pytest.approx(want, rel=1e-6)


def test_min_uncertainty_lossless():
    cfg = MetrologyConfig(shots=1, tau=2.0)
    assert min_uncertainty_omega(cfg).delta_omega == pytest.approx(0.5)
    cfg4 = MetrologyConfig(shots=1, photons=4, tau=2.0)
    assert min_uncertainty_omega(cfg4).delta_omega == pytest.approx(0.125)
    cfg_eps = MetrologyConfig(shots=1, photons=4, epsilon=0.99, tau=1.0)
    with pytest.warns(UserWarning):
        r = min_uncertainty_omega(cfg_eps)
    assert r.delta_omega == pytest.approx(0.99 ** (-3) / 4)
    assert r.delta_omega == pytest.approx(0.2576, abs=2e-4)


def test_min_uncertainty_lossless_needs_tau():
    with pytest.raises(ValueError):
        min_uncertainty_omega(MetrologyConfig(shots=1))


def test_min_uncertainty_lossy():
    gamma = 1e-3
    cfg = MetrologyConfig(shots=1, res=ResonatorParams(gamma=gamma))
    r = min_uncertainty_omega(cfg)
    assert r.delta_omega == pytest.approx(math.e * gamma, rel=1e-12)
    assert r.tau_opt == pytest.approx(1.0 / gamma)
    cfg_m = MetrologyConfig(shots=100, res=ResonatorParams(gamma=gamma))
    assert min_uncertainty_omega(cfg_m).delta_omega == pytest.approx(math.e * gamma / 10)


def test_min_uncertainty_lossy_photon_independent_at_perfect_gates():
    gamma = 2e-4
    single = min_uncertainty_omega(MetrologyConfig(shots=1, res=ResonatorParams(gamma=gamma)))
    multi = min_uncertainty_omega(
        MetrologyConfig(shots=1, photons=6, res=ResonatorParams(gamma=gamma))
    )
    assert multi.delta_omega == pytest.approx(single.delta_omega, rel=1e-12)


def test_one_over_n_scaling_exact():
    values = [
        min_uncertainty_omega(MetrologyConfig(shots=1, photons=n, tau=1.0)).delta_omega
        for n in (1, 2, 4, 8)
    ]
    for n, v in zip((1, 2, 4, 8), values):
        assert v * n == pytest.approx(values[0], rel=1e-14)


def test_length_uncertainty():
    cfg = MetrologyConfig(shots=1, length=1.0)
    assert length_uncertainty(cfg, 0.0) == 0.0
    assert length_uncertainty(cfg, 1e-6) == pytest.approx(1e-6)
    cfg_half = MetrologyConfig(shots=1, res=ResonatorParams(omega=0.5), length=1.0)
    assert length_uncertainty(cfg_half, 1e-6) == pytest.approx(2e-6)
    with pytest.raises(ValueError):
        length_uncertainty(MetrologyConfig(shots=1), 1e-6)


def test_length_included_in_result():
    cfg = MetrologyConfig(shots=1, res=ResonatorParams(gamma=1e-3), length=2.0)
    r = min_uncertainty_omega(cfg)
    assert r.delta_length == pytest.approx(2.0 * r.delta_omega)


def test_chi_uncertainty_value():
    # frozen from direct evaluation: e * 0.95^-4 * 1e-3 / 5
    cfg = MetrologyConfig(
        shots=1, photons=5, epsilon=0.95, res=ResonatorParams(gamma=1e-3)
    )
    assert min_uncertainty_chi(cfg) == pytest.approx(6.674673959737069e-4, rel=1e-12)


def test_chi_uncertainty_scaling():
    gamma = 1e-3
    v4 = min_uncertainty_chi(MetrologyConfig(shots=1, photons=4, res=ResonatorParams(gamma=gamma)))
    v8 = min_uncertainty_chi(MetrologyConfig(shots=1, photons=8, res=ResonatorParams(gamma=gamma)))
    assert v8 == pytest.approx(v4 / 2)


def test_chi_needs_two_photons():
    with pytest.raises(ValueError):
        min_uncertainty_chi(MetrologyConfig(shots=1, photons=1))


def test_chi_formula_reduces_to_omega_form():
    gamma = 5e-4
    cfg2 = MetrologyConfig(shots=1, photons=2, res=ResonatorParams(gamma=gamma))
    omega_style = math.e * gamma / 2
    assert min_uncertainty_chi(cfg2) == pytest.approx(omega_style)


def test_result_json_round_trip():
    import json

    r = MetrologyResult(delta_omega=0.1, tau_opt=2.0, delta_chi=0.05)
    payload = json.loads(r.to_json())
    assert payload["delta_omega"] == 0.1
    assert payload["delta_chi"] == 0.05
    assert payload["delta_length"] is None


def test_config_validation():
    with pytest.raises(ValueError):
        MetrologyConfig(shots=0)
    with pytest.raises(ValueError):
        MetrologyConfig(shots=1, photons=0)
    with pytest.raises(ValueError):
        MetrologyConfig(shots=1, epsilon=1.5)
