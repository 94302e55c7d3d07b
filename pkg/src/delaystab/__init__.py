"""Spectral stability analysis and simulation of a delayed transport loop."""

from .characteristic import (
    ExclusionReport,
    char_fn,
    char_fn_no_delay,
    char_num,
    char_num_prime,
    exclusions,
)
from .eigensolver import (
    BelowThreshold,
    ContourBox,
    Root,
    RootSet,
    UnresolvedCell,
    count_zeros,
    default_box,
    find_roots,
    spectral_bound,
    spectrum,
)
from .params import (
    DecayCertificate,
    SystemParams,
    decay_certificate,
    eig_bound_radius,
    monotonicity_margin,
    threshold_gain,
)
from .region import (
    BoundaryPoint,
    Evidence,
    FastPath,
    FastPathResult,
    Label,
    RegionLabel,
    SweepNode,
    TraceResult,
    axis_crossing_candidates,
    beta_on_axis,
    classify,
    oscillation_fast_path,
    phase_residual,
    sweep,
    trace_boundary,
)
from .simulator import (
    EnergySample,
    EnergyTrace,
    FitResult,
    SimConfig,
    SimState,
    SimTrace,
    energy,
    fit_decay_rate,
    init_state,
    run,
    sine_profile,
    state_norm_sq,
    step,
    zero_fn,
)

__all__ = [
    "BelowThreshold",
    "BoundaryPoint",
    "ContourBox",
    "DecayCertificate",
    "EnergySample",
    "EnergyTrace",
    "Evidence",
    "ExclusionReport",
    "FastPath",
    "FastPathResult",
    "FitResult",
    "Label",
    "RegionLabel",
    "Root",
    "RootSet",
    "SimConfig",
    "SimState",
    "SimTrace",
    "SweepNode",
    "SystemParams",
    "TraceResult",
    "UnresolvedCell",
    "axis_crossing_candidates",
    "beta_on_axis",
    "char_fn",
    "char_fn_no_delay",
    "char_num",
    "char_num_prime",
    "classify",
    "count_zeros",
    "decay_certificate",
    "default_box",
    "eig_bound_radius",
    "energy",
    "exclusions",
    "find_roots",
    "fit_decay_rate",
    "init_state",
    "monotonicity_margin",
    "oscillation_fast_path",
    "phase_residual",
    "run",
    "sine_profile",
    "spectral_bound",
    "spectrum",
    "state_norm_sq",
    "step",
    "sweep",
    "threshold_gain",
    "trace_boundary",
    "zero_fn",
]

__version__ = "0.1.0"
