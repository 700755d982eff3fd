"""Construction and analysis of 1 -> 2 qudit cloning machines."""

from .qudit import (
    Ket,
    Op,
    basis_ket,
    bell_state,
    max_entangled,
    partial_trace,
    partial_transpose,
    symmetric_ket,
    tensor,
)
from .maps import (
    ChoiOp,
    apply_map,
    choi_from_isometry,
    clone_fidelities,
    is_trace_preserving,
    mean_fidelity,
)
from .merit import (
    EigenspaceReport,
    max_eigenspace,
    r_fourier,
    r_phase_covariant,
    r_universal,
    verify_conjectured_eigenstates,
)
from .economical import (
    FeasibilityReport,
    feasibility_search,
    gamma_pc,
    niu_griffiths,
    suboptimal_economical,
    theta_fidelity,
    universal_nogo_residual,
)
from .ansatz import (
    AmplitudeMatrix,
    XParams,
    amp_fourier,
    amp_phase_covariant,
    amp_universal,
    cloning_state,
    constraint_residuals,
    fourier_recurrence_check,
    pc_system_check,
    reduced_choi,
    support_states,
)

__version__ = "0.1.0"
