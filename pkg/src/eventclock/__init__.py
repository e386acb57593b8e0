"""eventclock: when does a measurement or event occur, numerically.

A deterministic simulator and diagnostic library for measurement-time
statistics in small quantum systems: the detection-record projector and its
probability curve, repeated-interrogation detection protocols with Zeno
freezing and the resolvability threshold, and the time-of-arrival current
with its quantum-backflow pathology.
"""

from ._kernels import USING_NUMBA, backend
from .arrival import (
    ArrivalSeries,
    BackflowCandidate,
    BackflowScanResult,
    GridWavepacket,
    arrival_series,
    backflow_packet,
    backflow_scan,
    boundary_mass,
    current_at_origin,
    current_series,
    default_backflow_candidates,
    default_backflow_times,
    evolve_free,
    gaussian_packet,
    p_plus,
    time_integral_demo,
)
from .detector import (
    CommutatorDiagnostics,
    CorrelationSpec,
    NormalizationDiagnostics,
    TimeSeries,
    build_correlation_projector,
    commutator_diagnostics,
    m_of_t,
    normalization_diagnostics,
    pm_of_t,
)
from .hilbert import (
    CertificationError,
    DenseOperator,
    PiecewiseHamiltonian,
    Segment,
    StateVector,
    basis_state,
    evolve,
    expectation,
    expm_hermitian,
    heisenberg,
    identity,
    overlap,
    propagator,
    sigma_x,
    sigma_y,
    sigma_z,
    tensor,
)
from .protocol import (
    ChainExpectations,
    CollapseOutcome,
    DetectionDistribution,
    DetectionSchedule,
    ResolvabilityReport,
    ZenoSweepRow,
    chain_operators,
    collapse_step,
    detection_distribution,
    energy_variance,
    operator_chain,
    resolvability_report,
    sample_detection_distribution,
    zeno_sweep,
)
from .spin_example import (
    SpinExampleConfig,
    SpinModel,
    analytic_survival,
    build as build_spin_example,
    coupling_strength,
)

__version__ = "0.1.0"
