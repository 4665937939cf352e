"""Shortest-network solvers: Euclidean Steiner trees and maximal-distance minimizers."""

from .geometry import (
    DEFAULT_TOL,
    GeometryError,
    ToleranceConfig,
    angle_at,
    distance,
    dist_point_to_segment,
    fermat_point,
)
from .topology import (
    Topology,
    TopologyError,
    canonical_key,
    count_full_topologies,
    enumerate_full_topologies,
)
from .steiner import (
    MIN_BRANCH_ANGLE,
    CrossingReport,
    EmbeddedTree,
    SolveResult,
    TreeReport,
    count_branching_in_ball,
    count_crossings,
    instance_scale,
    length_in_ball,
    relax_topology,
    solve_exact,
    verify_tree,
)
from .ratio import (
    MstResult,
    caterpillar_ratio,
    caterpillar_topology,
    mst,
    sausage_points,
    simplex_points,
    steiner_ratio,
)
from .mdm import (
    CompactSetDescriptor,
    CoverageReport,
    EnergeticSet,
    MdmError,
    MdmNetwork,
    MdmReport,
    NumericConfig,
    NumericResult,
    coverage_check,
    energetic_points,
    horseshoe_circle,
    horseshoe_stadium,
    resample_path_network,
    sample_compact,
    solve_mdm_finite,
    solve_mdm_numeric,
    stadium_competitor,
    verify_mdm,
)
from .experiments import (
    ExperimentError,
    ExperimentRun,
    fit_power_law,
    heuristic_steiner,
    hex_lattice_instance,
    homothety_instance,
    random_instance,
    run_suite,
    zigzag_instance,
)
from .io import (
    InstanceFile,
    IoError,
    ResultFile,
    instance_digest,
    parse_instance,
    parse_result,
    serialize_instance,
    serialize_result,
)
from .svg import render_svg

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_TOL",
    "GeometryError",
    "ToleranceConfig",
    "angle_at",
    "distance",
    "dist_point_to_segment",
    "fermat_point",
    "Topology",
    "TopologyError",
    "canonical_key",
    "count_full_topologies",
    "enumerate_full_topologies",
    "MIN_BRANCH_ANGLE",
    "CrossingReport",
    "EmbeddedTree",
    "SolveResult",
    "TreeReport",
    "count_branching_in_ball",
    "count_crossings",
    "instance_scale",
    "length_in_ball",
    "relax_topology",
    "solve_exact",
    "verify_tree",
    "MstResult",
    "caterpillar_ratio",
    "caterpillar_topology",
    "mst",
    "sausage_points",
    "simplex_points",
    "steiner_ratio",
    "CompactSetDescriptor",
    "CoverageReport",
    "EnergeticSet",
    "MdmError",
    "MdmNetwork",
    "MdmReport",
    "NumericConfig",
    "NumericResult",
    "coverage_check",
    "energetic_points",
    "horseshoe_circle",
    "horseshoe_stadium",
    "resample_path_network",
    "sample_compact",
    "solve_mdm_finite",
    "solve_mdm_numeric",
    "stadium_competitor",
    "verify_mdm",
    "ExperimentError",
    "ExperimentRun",
    "fit_power_law",
    "heuristic_steiner",
    "hex_lattice_instance",
    "homothety_instance",
    "random_instance",
    "run_suite",
    "zigzag_instance",
    "InstanceFile",
    "IoError",
    "ResultFile",
    "instance_digest",
    "parse_instance",
    "parse_result",
    "serialize_instance",
    "serialize_result",
    "render_svg",
    "__version__",
]
