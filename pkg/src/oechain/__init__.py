"""Simulation and analysis toolkit for pairs of phase oscillators relayed
through chains of excitable cells, with a conductance-based analogue."""

__version__ = "0.1.0"

from .analysis import (LockPattern, LyapunovEstimate, RotationEstimate,
                       classify_locking, lyapunov_exponent, protocol_ic,
                       rotation_number, synchrony_manifold_run)
from .backend import active as active_backend
from .integrate import (ML_CONFIG, IntegratorConfig, Trajectory,
                        detect_firings, integrate, poincare_section)
from .ml import (MLNetwork, MLParams, ml_classify, ml_region_scan,
                 ml_vector_field, oeeo_network, rest_state, run_ml)
from .model import (ChainSpec, ExcitableParams, chain, chain_vector_field,
                    oe_fixed_point, oe_pair, oeeo, oeo, saddle_node_c_eo,
                    snic_to_b)
from .sweep import (AttractorSet, BoundaryCurve, HomotopyLine,
                    bistability_scan, classification_grid, max_heterogeneity,
                    pitchfork_diagram, trace_boundary)
from .weak_coupling import (GFunctionTable, ReductionInputs, build_table,
                            coupling_G, critical_coe, forced_response_W,
                            interaction_H, periodic_orbit_U,
                            symmetry_breaking_check)

__all__ = [
    "__version__", "active_backend",
    "ChainSpec", "ExcitableParams", "chain", "chain_vector_field",
    "oe_fixed_point", "oe_pair", "oeo", "oeeo", "saddle_node_c_eo",
    "snic_to_b",
    "IntegratorConfig", "ML_CONFIG", "Trajectory", "detect_firings",
    "integrate", "poincare_section",
    "LockPattern", "LyapunovEstimate", "RotationEstimate",
    "classify_locking", "lyapunov_exponent", "protocol_ic",
    "rotation_number", "synchrony_manifold_run",
    "AttractorSet", "BoundaryCurve", "HomotopyLine", "bistability_scan",
    "classification_grid", "max_heterogeneity", "pitchfork_diagram",
    "trace_boundary",
    "GFunctionTable", "ReductionInputs", "build_table", "coupling_G",
    "critical_coe", "forced_response_W", "interaction_H",
    "periodic_orbit_U", "symmetry_breaking_check",
    "MLNetwork", "MLParams", "ml_classify", "ml_region_scan",
    "ml_vector_field", "oeeo_network", "rest_state", "run_ml",
]
