# weaktrace/__init__.py
# SPDX-License-Identifier: MIT
# Copyright (c) 2026 The weaktrace developers
"""Public package interface for weaktrace."""

from ._version import __version__

# 1) Import each function into this namespace
from .config       import config, MODES
from .firstorder   import EPS, truncate, to_complex
from .hilbert      import (
    CHI,
    CHI_PERP,
    BasisLabel,
    Registry,
    StateVector,
    OperatorSpec,
    basis_state,
    state_from_terms,
    inner_product,
    projector,
    identity,
    linear_combination,
    reduced_mirror_state,
    WeaktraceError,
    RegistryError,
    DegenerateStateError,
)
from .optics       import (
    Element,
    MirrorCoupling,
    pbs,
    pol_filter_pbs,
    hwp,
    mirror,
    shutter,
    detector,
    WiringError,
)
from .engine       import (
    Stage,
    Circuit,
    evolve_forward,
    evolve_backward,
    outcome_probability,
    postselect_policy,
    transfer_matrix,
    ImpossibleBranchError,
    AmbiguityError,
)
from .tsvf         import (
    TwoStateVector,
    two_state_vector,
    two_state_vector_at,
    weak_value,
    postselection_ensemble,
    mixed_weak_value,
    weak_value_sum_check,
    UndefinedWeakValueError,
    CompletenessError,
)
from .trace        import (
    TraceReport,
    classify_trace,
    trace_first_order,
    trace_exact,
    mirror_state_at,
    fidelity_deficit,
    strategy_c_branches,
)
from .scenarios    import (
    ScenarioConfig,
    ScenarioReport,
    build_salih_fig1,
    build_one_cycle_fig2,
    cycle_transfer_maps,
    run_scenario,
    ScenarioConfigError,
)
from .circuitfile  import parse, serialize, Diagnostic, CircuitParseError
from .cli          import run_command


# 2) Define __all__ so that `from weaktrace import *` also picks them up
__all__ = [
    "config",
    "MODES",
    "EPS",
    "truncate",
    "to_complex",
    "CHI",
    "CHI_PERP",
    "BasisLabel",
    "Registry",
    "StateVector",
    "OperatorSpec",
    "basis_state",
    "state_from_terms",
    "inner_product",
    "projector",
    "identity",
    "linear_combination",
    "reduced_mirror_state",
    "Element",
    "MirrorCoupling",
    "pbs",
    "pol_filter_pbs",
    "hwp",
    "mirror",
    "shutter",
    "detector",
    "Stage",
    "Circuit",
    "evolve_forward",
    "evolve_backward",
    "outcome_probability",
    "postselect_policy",
    "transfer_matrix",
    "TwoStateVector",
    "two_state_vector",
    "two_state_vector_at",
    "weak_value",
    "postselection_ensemble",
    "mixed_weak_value",
    "weak_value_sum_check",
    "TraceReport",
    "classify_trace",
    "trace_first_order",
    "trace_exact",
    "mirror_state_at",
    "fidelity_deficit",
    "strategy_c_branches",
    "ScenarioConfig",
    "ScenarioReport",
    "build_salih_fig1",
    "build_one_cycle_fig2",
    "cycle_transfer_maps",
    "run_scenario",
    "parse",
    "serialize",
    "Diagnostic",
    "run_command",
    "WeaktraceError",
    "RegistryError",
    "DegenerateStateError",
    "WiringError",
    "ImpossibleBranchError",
    "AmbiguityError",
    "UndefinedWeakValueError",
    "CompletenessError",
    "ScenarioConfigError",
    "CircuitParseError",
]
