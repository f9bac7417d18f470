"""Phase measurement of vacuum/Fock superpositions in a qubit-resonator circuit.

The package simulates two driven Josephson-style qubits exchanging photons
with a single resonator mode at the density-matrix level, predicts the
interference fringes in closed form, runs truncated Gauss-sum factor scans
on top of the phase read-out, and propagates measurement noise to frequency
and Kerr-strength estimates.
"""

from .dynamics import (
    DressedPair,
    QubitParams,
    ResonatorParams,
    damped_superposition_multi,
    damped_superposition_single,
    dressed_states,
    effective_frequency,
    lindblad_evolve,
    u_drive,
    u_free,
    u_jc,
    u_kerr,
)
from .gates import (
    CnotChannel,
    CouplerParams,
    apply_channel,
    choi_matrix,
    ideal_cnot,
    imperfect_cnot,
    iswap_cnot_time,
)
from .gauss import (
    GaussConfig,
    GaussReport,
    GaussRow,
    classify_factors,
    estimate_max_factorizable,
    gauss_sum,
    simulated_term,
    truncated_real_sum,
    wait_times,
)
from .hilbert import (
    FockSpace,
    Operator,
    QuantumState,
    fidelity,
    fock_state,
    ladder_ops,
    partial_trace,
    product_state,
    tensor,
    trace_distance,
)
from .metrology import (
    MetrologyConfig,
    MetrologyResult,
    length_uncertainty,
    min_uncertainty_chi,
    min_uncertainty_omega,
    uncertainty_omega,
)
from .protocols import (
    MeasurementRecord,
    PulseSchedule,
    SystemParams,
    VisibilityResult,
    disentangle_schedule,
    law_eberly_schedule,
    measured_pe_after_free,
    multi_photon_schedule,
    predicted_pe,
    run_protocol,
    schedule_to_text,
    single_photon_schedule,
    visibility_multi,
    visibility_numeric,
    visibility_single,
)

__version__ = "0.1.0"
