"""Exact free-fermion solution of the periodic spin-1/2 XX chain with a
chiral three-spin interaction, with quantum-information metrics over the
(alpha, h) phase diagram and a small-chain ED cross-check."""

__version__ = "0.1.0"

from .errors import NumericalError, TruncationError
from .model import (
    DegeneratePhasePoint,
    FermiSea,
    ModelParams,
    MomentumGrid,
    Phase,
    PhaseLabel,
    build_grid,
    classify_phase,
    critical_fields,
    dispersion,
    fermi_sea,
    ground_energy_per_site,
    magnetization_z,
)
from .correlators import ContractionTable, build_table, zz_correlator
from .pfaffian import (
    OperatorString,
    assemble,
    operator_string,
    pfaffian,
    spin_correlator,
    string_correlators,
)
from .observables import (
    MetricsRecord,
    ReducedTwoSite,
    SpinCorrelators,
    compute_spin_correlators,
    concurrence,
    entanglement_entropy,
    l1_coherence_scaled,
    spin_squeezing,
    two_site_rdm,
    wineland_ssp,
)
from .analysis import (
    ScalingFit,
    SweepResult,
    TransitionPoint,
    central_charge,
    detect_transitions,
    detect_transitions_xy,
    evaluate_point,
    scaling_fit,
    sweep,
)
from . import oracle

__all__ = [name for name in dir() if not name.startswith("_")]
