"""Simulator and analysis toolkit for cyclic graph-state teleportation on a
regenerating ring of reusable qubits."""

from .backend import COMPILED, backend_name
from .experiment import (
    ExperimentConfig,
    ResultRow,
    calibrate_p2,
    emit_results,
    load_config,
    load_results,
    parse_config,
    run_experiment,
    run_hop_count,
)
from .metrics import (
    BootstrapResult,
    bootstrap_ci,
    fidelity_pure,
    mixed_variant_density,
    negativity,
    negativity_trace_norm,
    partial_transpose,
    two_qubit_graph_state,
    variant_targets,
)
from .noise import (
    NoiseModel,
    build_calibration,
    corrupt_readout,
    estimate_calibration,
    sample_gate_fault,
)
from .protocol import (
    ByproductOperator,
    MeasurementRecord,
    ProtocolRun,
    WheelConfig,
    begin_run,
    build_initial_state,
    byproduct_for,
    discriminator,
    final_holder,
    perform_hop,
    regenerate_wheel,
    run_protocol,
)
from .sim import (
    Gate,
    Graph,
    StateVector,
    apply_gate,
    build_graph_state,
    exact_distribution,
    measure_x,
    measure_z,
    reduced_density_matrix,
    reset,
    zero_state,
)
from .tomography import (
    CountsTable,
    linear_inversion_qst,
    michelot_project,
    qst_settings,
    rem_correct,
    sample_counts,
    smolin_project,
    tomograph,
    tomograph_buckets,
)

__version__ = "0.1.0"
