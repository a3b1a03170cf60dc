//! Mountain-pass paths on `(0,∞) × SO(3)²`.

mod bounded;
pub mod fixtures;
mod minmax;
mod path;
mod pseudomin;
mod sublevel;

pub use bounded::{
    bounded_minmax_path, bounded_minmax_path_with, select_l_cut, BoundedOptions, BoundedPathReport, SpliceMode,
    BOUND_TOL, DELTA_HALVINGS, EDGE_CHECKS,
};
pub use minmax::{
    check_local_minimum, minmax_optimize, minmax_optimize_with, relax, LocalMinReport, MinMaxOptions, MinMaxResult,
    ENDPOINT_DELTA,
};
pub use path::{interpolate, path_max, segment_length, PathOnConfigSpace, ANGLE_MARGIN, DEFAULT_SAMPLES};
pub use pseudomin::{
    criterion_directions, descend_to_pseudo_minimum, descent_directions, negativity_at_pseudomin,
    pseudo_min_criterion, Descent, NegativityReport, PseudoMinReport, DEFAULT_RANDOM_DIRECTIONS, STEP_LADDER,
};
pub use sublevel::{
    connection_radius, coverage_radius, pair_distance, so3_ball_fraction, sublevel_connectivity, SublevelReport,
    EMPTY_BALL_PROBABILITY,
};
