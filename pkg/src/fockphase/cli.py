"""Command-line front end: factor scans, phase sweeps, visibility, metrology.

All frequencies are entered as ratios to the resonator frequency, which is
fixed to 1 internally; --omega-hz only rescales printed time/frequency units.
Exit codes: 0 success, 1 tolerance exceeded, 2 configuration error,
3 numeric overflow, 4 Fock-truncation/leakage failure.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from dataclasses import dataclass
from typing import IO

from .dynamics import ResonatorParams, effective_frequency
from .gauss import GaussConfig, classify_factors, estimate_max_factorizable
from .metrology import MetrologyConfig, min_uncertainty_chi, min_uncertainty_omega
from .protocols import (
    SystemParams,
    TruncationError,
    measured_pe_after_free,
    multi_photon_schedule,
    predicted_pe,
    run_protocol,
    sample_excited,
    single_photon_schedule,
    visibility_multi,
    visibility_numeric,
    visibility_single,
)

EXIT_OK = 0
EXIT_TOLERANCE = 1
EXIT_CONFIG = 2
EXIT_OVERFLOW = 3
EXIT_TRUNCATION = 4


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    """Parsed and validated invocation, handed to one cmd_* entry point."""

    command: str
    args: argparse.Namespace
    out: IO[str]


def _resonator(args, photons: int) -> ResonatorParams:
    gamma = getattr(args, "gamma_over_omega", 0.0)
    chi = getattr(args, "chi_over_omega", 0.0)
    if gamma < 0 or chi < 0:
        raise ConfigError("physical rates must be nonnegative")
    return ResonatorParams(omega=1.0, gamma=gamma, chi=chi, dim=photons + 2)


def _time_scale(args) -> float:
    """Multiply internal times (units of 1/omega) by this to print."""
    omega_hz = getattr(args, "omega_hz", None)
    if omega_hz is None:
        return 1.0
    if omega_hz <= 0:
        raise ConfigError("--omega-hz must be positive")
    return 1.0 / (2.0 * math.pi * omega_hz)


def cmd_factor(cfg: RunConfig) -> int:
    a = cfg.args
    if a.n < 4:
        raise ConfigError("factor targets start at 4")
    res = _resonator(a, a.photons)
    gauss_cfg = GaussConfig(
        n_target=a.n,
        k_terms=a.k,
        photons=a.photons,
        res=res,
        epsilon=a.epsilon,
        mode=a.mode,
    )
    report = classify_factors(gauss_cfg, workers=a.workers)
    if a.format == "json":
        cfg.out.write(report.to_json())
    else:
        cfg.out.write(report.to_csv())
    print(f"candidates: {report.candidates()}", file=sys.stderr)
    return EXIT_OK


def cmd_phase(cfg: RunConfig) -> int:
    a = cfg.args
    if a.photons < 1:
        raise ConfigError("need at least one photon")
    if a.points < 1:
        raise ConfigError("sweep needs at least one point")
    if a.tau_stop < a.tau_start or a.tau_start < 0:
        raise ConfigError("bad tau range")
    res = _resonator(a, a.photons)
    params = SystemParams.default(
        photons=a.photons, gamma=res.gamma, chi=res.chi, epsilon=a.epsilon
    )
    scale = _time_scale(a)
    n = a.photons
    w_eff = effective_frequency(res, n)
    rows = ["tau,pe_simulated,pe_predicted,abs_err" + (",pe_sampled" if a.shots else "")]
    max_err = 0.0
    for i in range(a.points):
        if a.points == 1:
            tau = a.tau_start
        else:
            tau = a.tau_start + (a.tau_stop - a.tau_start) * i / (a.points - 1)
        if res.gamma > 0:
            record = measured_pe_after_free(n, tau, params)
        elif n == 1:
            record = run_protocol(single_photon_schedule(tau, params), params)
        else:
            record = run_protocol(multi_photon_schedule(n, tau, params), params)
        phi = w_eff * n * tau
        pe_pred = predicted_pe(n, phi, gamma_tau=res.gamma * tau, epsilon=a.epsilon)
        err = abs(record.p_excited - pe_pred)
        max_err = max(max_err, err)
        row = f"{tau * scale:.12g},{record.p_excited:.12g},{pe_pred:.12g},{err:.12g}"
        if a.shots:
            row += f",{sample_excited(record.p_excited, a.shots, a.seed) / a.shots:.12g}"
        rows.append(row)
    cfg.out.write("\n".join(rows) + "\n")
    if max_err > a.tolerance:
        print(f"max abs_err {max_err:.3e} exceeds tolerance {a.tolerance:.3e}", file=sys.stderr)
        return EXIT_TOLERANCE
    return EXIT_OK


def cmd_visibility(cfg: RunConfig) -> int:
    a = cfg.args
    try:
        photon_list = [int(x) for x in a.photons_list.split(",") if x]
    except ValueError as exc:
        raise ConfigError(f"bad photon list: {a.photons_list!r}") from exc
    if not photon_list or any(n < 1 for n in photon_list):
        raise ConfigError("photon list must contain integers >= 1")
    rows = ["N,chi,gamma,epsilon,V_closed,V_numeric"]
    for n in photon_list:
        res = _resonator(a, n)
        closed = visibility_single(res) if n == 1 else visibility_multi(n, res, a.epsilon)
        numeric = visibility_numeric(n, res, a.epsilon)
        rows.append(
            f"{n},{res.chi:.12g},{res.gamma:.12g},{a.epsilon:.12g},"
            f"{closed.value:.12g},{numeric.value:.12g}"
        )
    cfg.out.write("\n".join(rows) + "\n")
    return EXIT_OK


def cmd_metrology(cfg: RunConfig) -> int:
    a = cfg.args
    if a.chi_uncertainty and a.photons < 2:
        raise ConfigError("Kerr-strength estimation needs at least two photons")
    res = _resonator(a, a.photons)
    mcfg = MetrologyConfig(
        shots=a.shots,
        res=res,
        photons=a.photons,
        epsilon=a.epsilon,
        tau=a.tau,
        length=a.length,
    )
    result = min_uncertainty_omega(mcfg)
    if a.chi_uncertainty:
        result = dataclasses.replace(result, delta_chi=min_uncertainty_chi(mcfg))
    scale = _time_scale(a)
    if scale != 1.0:
        # rescale to physical units: times multiply, rates divide
        result = dataclasses.replace(
            result,
            delta_omega=result.delta_omega / scale,
            tau_opt=result.tau_opt * scale,
            delta_chi=None if result.delta_chi is None else result.delta_chi / scale,
        )
    cfg.out.write(result.to_json())
    return EXIT_OK


def cmd_selftest(cfg: RunConfig) -> int:
    """Fast internal battery; prints one line per check."""
    checks: list[tuple[str, bool]] = []

    report = classify_factors(GaussConfig(n_target=1001, k_terms=4))
    checks.append(("factor scan 1001 -> {7, 11, 13}", report.candidates() == [7, 11, 13]))

    params = SystemParams.default(photons=1)
    rec = run_protocol(single_photon_schedule(math.pi, params), params)
    checks.append(("single-photon fringe at phi=pi", abs(rec.p_excited - 1.0) < 1e-8))

    params4 = SystemParams.default(photons=4)
    tau = (0.25 * math.pi + 2.0 * math.pi) / 4.0
    rec4 = run_protocol(multi_photon_schedule(4, tau, params4), params4)
    want = predicted_pe(4, 4.0 * tau)
    checks.append(("four-photon branch vs closed form", abs(rec4.p_excited - want) < 1e-8))

    v = visibility_single(ResonatorParams(gamma=6.92e-6))
    vn = visibility_numeric(1, ResonatorParams(gamma=6.92e-6))
    checks.append(("visibility closed vs numeric", abs(v.value - vn.value) < 1e-8))

    ok = True
    for name, passed in checks:
        print(f"{'PASS' if passed else 'FAIL'}  {name}", file=cfg.out)
        ok = ok and passed
    return EXIT_OK if ok else EXIT_TOLERANCE


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="fockphase",
        description=(
            "Qubit-resonator phase measurement: Gauss-sum factor scans, "
            "interference sweeps, visibility and metrology figures."
        ),
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=None, help="output file (default: stdout)")
    common.add_argument("--omega-hz", type=float, default=None, dest="omega_hz",
                        help="resonator frequency in Hz; only rescales printed units")
    sub = p.add_subparsers(dest="command", required=True)

    f = sub.add_parser("factor", parents=[common],
                       help="scan trial divisors with the truncated Gauss sum")
    f.add_argument("--n", type=int, required=True, help="integer to factor")
    f.add_argument("--k", type=int, default=4, help="truncation K (K+1 terms)")
    f.add_argument("--gamma-over-omega", type=float, default=0.0, dest="gamma_over_omega")
    f.add_argument("--chi-over-omega", type=float, default=0.0, dest="chi_over_omega")
    f.add_argument("--photons", type=int, default=1)
    f.add_argument("--epsilon", type=float, default=1.0)
    f.add_argument("--mode", choices=("analytic", "simulated"), default="analytic")
    f.add_argument("--workers", type=int, default=1)
    f.add_argument("--format", choices=("csv", "json"), default="csv")

    ph = sub.add_parser("phase", parents=[common], help="sweep the interrogation time and compare to closed form")
    ph.add_argument("--photons", type=int, default=1)
    ph.add_argument("--epsilon", type=float, default=1.0)
    ph.add_argument("--gamma-over-omega", type=float, default=0.0, dest="gamma_over_omega")
    ph.add_argument("--chi-over-omega", type=float, default=0.0, dest="chi_over_omega")
    ph.add_argument("--tau-start", type=float, default=0.0, dest="tau_start")
    ph.add_argument("--tau-stop", type=float, default=2.0 * math.pi, dest="tau_stop")
    ph.add_argument("--points", type=int, default=0, help="number of sweep points")
    ph.add_argument("--tolerance", type=float, default=1e-6)
    ph.add_argument("--shots", type=int, default=0, help="optional binomial sampling")
    ph.add_argument("--seed", type=int, default=None)

    v = sub.add_parser("visibility", parents=[common], help="closed-form vs numeric fringe visibility")
    v.add_argument("--photons-list", default="1", dest="photons_list",
                   help="comma-separated photon numbers")
    v.add_argument("--gamma-over-omega", type=float, default=0.0, dest="gamma_over_omega")
    v.add_argument("--chi-over-omega", type=float, default=0.0, dest="chi_over_omega")
    v.add_argument("--epsilon", type=float, default=1.0)

    m = sub.add_parser("metrology", parents=[common], help="minimum parameter uncertainties")
    m.add_argument("--shots", type=int, default=1)
    m.add_argument("--photons", type=int, default=1)
    m.add_argument("--gamma-over-omega", type=float, default=0.0, dest="gamma_over_omega")
    m.add_argument("--chi-over-omega", type=float, default=0.0, dest="chi_over_omega")
    m.add_argument("--epsilon", type=float, default=1.0)
    m.add_argument("--tau", type=float, default=None, help="interrogation time (1/omega units)")
    m.add_argument("--length", type=float, default=None, help="resonator length")
    m.add_argument("--chi", action="store_true", dest="chi_uncertainty",
                   help="also report the Kerr-strength uncertainty")

    sub.add_parser("selftest", parents=[common], help="run a fast internal check battery")
    return p


_COMMANDS = {
    "factor": cmd_factor,
    "phase": cmd_phase,
    "visibility": cmd_visibility,
    "metrology": cmd_metrology,
    "selftest": cmd_selftest,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad flags, which matches the config-error code
        return int(exc.code) if exc.code else EXIT_OK
    out = sys.stdout
    opened = None
    try:
        if args.out:
            opened = open(args.out, "w", encoding="utf-8")
            out = opened
        cfg = RunConfig(command=args.command, args=args, out=out)
        return _COMMANDS[args.command](cfg)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OverflowError as exc:
        print(f"numeric overflow: {exc}", file=sys.stderr)
        return EXIT_OVERFLOW
    except TruncationError as exc:
        print(f"truncation failure: {exc}", file=sys.stderr)
        return EXIT_TRUNCATION
    finally:
        if opened is not None:
            opened.close()


if __name__ == "__main__":
    raise SystemExit(main())
