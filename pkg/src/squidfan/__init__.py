"""Design and verification toolkit for SQUID neurons with dendritic fan-in trees.

Capping every SQUID's input flux at half a flux quantum keeps its
response monotonic but forces a large fraction of inputs to be active
before a point neuron can fire.  This package evaluates those activity
fractions, simulates the underlying SQUID flux dynamics, solves the
circuit-inductance constraints that enforce the flux cap, and
brute-force-verifies the tree-depth scaling of the minimum activity on
small dendritic trees.
"""

from .constants import PHI0, format_current, format_inductance
from .design import (
    CollectionLoopDesign,
    DrLoopSpec,
    NoCollectionDesign,
    applied_flux_collection,
    check_feasibility,
    collection_design_from_json,
    crosstalk_current,
    design_ldi2_collection,
    design_no_collection,
    design_to_json,
    no_collection_design_from_json,
    sfq_coupling,
    sfq_ic_consistency,
    size_squid,
    threshold_fraction_circuit,
    vary_ic_no_collection,
    verify_collection_design,
)
from .errors import (
    CapacityError,
    ConstraintViolationError,
    IntegrationError,
    NoThresholdError,
    SaturationError,
    UnreachableThresholdError,
)
from .fanin import (
    ACTIVITY_PREFACTOR,
    UNREACHABLE_BIAS,
    ActivityResult,
    TreeGeometry,
    TreeTopology,
    activity_requirement,
    point_activity_fraction,
    synapse_flux_quota,
    total_unit_fraction,
    tree_activity_fraction,
    tree_geometry,
)
from .squid import (
    ResponseCurve,
    SquidParams,
    find_threshold_flux,
    simulate_rfq,
    sweep_response,
)
from .tree import (
    DendriticTree,
    PropagationResult,
    SynapseState,
    build_tree,
    min_active_synapses,
    propagate_binary,
    propagate_dynamical,
)

__version__ = "0.1.0"

__all__ = [
    "PHI0",
    "format_current",
    "format_inductance",
    "ACTIVITY_PREFACTOR",
    "UNREACHABLE_BIAS",
    "ActivityResult",
    "TreeGeometry",
    "TreeTopology",
    "activity_requirement",
    "point_activity_fraction",
    "synapse_flux_quota",
    "total_unit_fraction",
    "tree_activity_fraction",
    "tree_geometry",
    "ResponseCurve",
    "SquidParams",
    "find_threshold_flux",
    "simulate_rfq",
    "sweep_response",
    "CollectionLoopDesign",
    "DrLoopSpec",
    "NoCollectionDesign",
    "applied_flux_collection",
    "check_feasibility",
    "collection_design_from_json",
    "crosstalk_current",
    "design_ldi2_collection",
    "design_no_collection",
    "design_to_json",
    "no_collection_design_from_json",
    "sfq_coupling",
    "sfq_ic_consistency",
    "size_squid",
    "threshold_fraction_circuit",
    "vary_ic_no_collection",
    "verify_collection_design",
    "DendriticTree",
    "PropagationResult",
    "SynapseState",
    "build_tree",
    "min_active_synapses",
    "propagate_binary",
    "propagate_dynamical",
    "CapacityError",
    "ConstraintViolationError",
    "IntegrationError",
    "NoThresholdError",
    "SaturationError",
    "UnreachableThresholdError",
]
