"""Connectivity experiments for random geometric graphs on Poisson point sets.

The package builds k-nearest-neighbour and disc graphs over Poisson
samples of the plane, detects the local obstruction events that govern
their connectivity, and runs the Monte Carlo campaigns (thresholds,
sharpness, fault tolerance) around them.
"""

from .points import PointSet, Region, delete_points, read_csv, sample_fixed, sample_poisson, write_csv
from .rng import Stream, derive_key, poisson_count, stream, substream
from .knn import (
    GridIndex,
    NeighborGraph,
    UndefinedRadiusError,
    build_gilbert,
    build_index,
    build_knn,
    kth_nn_radius,
    longest_edge,
    restrict_k,
    write_graph_csv,
)
from .analysis import (
    ComponentDecomposition,
    component_labels,
    connected_components,
    count_components,
    is_connected,
    is_s_connected,
    isolated_vertices,
    vertex_connectivity,
)
from .local_events import (
    BoxSpec,
    Cover,
    DenseTileEvent,
    HexHull,
    LocalityReport,
    RegionTooSmallError,
    TileGrid,
    build_covers,
    build_tiles,
    confined_components,
    confined_dense_tiles,
    has_confined_component,
    hex_hull,
    locality_check,
    make_box,
    quarter_cover_uncovered,
    reflected_cap_empty,
    sample_box,
    small_components_report,
    tiles_met_by_polyline,
)
from .constants import (
    decay_step,
    fault_tolerance_increment,
    prescribed_tile_count,
    sharpness_coefficient,
    threshold_constant_band,
)
from .experiments import (
    EstimateResult,
    estimate_connectivity,
    estimate_threshold_constant,
    gilbert_penrose_compare,
    local_event_rate,
    ratio_decay,
    s_connectivity_experiment,
    sharpness_width,
    threshold_profile,
    threshold_samples,
    wilson_interval,
)

__version__ = "0.1.0"
