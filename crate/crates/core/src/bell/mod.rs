//! CHSH tests where each party chooses between binned homodyne detection and
//! photodetection: Bell operator, optimal states, bin-width optimization and
//! critical efficiencies.

mod operator;
mod optimize;
mod scenario;
mod threshold;

pub use operator::{
    bell_operator_from, build_bell_operator, canonical_phase, chsh_value, is_violation, two_photon_subspace,
    PartyObservables, StateSource, TSIRELSON_BOUND, VIOLATION_MARGIN,
};
pub use optimize::{
    evaluate, golden_section, maximize_on_grid, maximize_scalar, optimize_delta, BellResult, DeltaOptimum,
    DELTA_GRID_POINTS, DELTA_RANGE, DELTA_TOLERANCE,
};
pub use scenario::{BellScenario, Party, Symmetry, DEFAULT_CUTOFF};
pub use threshold::{
    bisect_threshold, critical_efficiency, region_boundary, scenario_for, threshold_of, Bisection, BoundaryPoint,
    SolverOptions, ThresholdSolve, ThresholdTarget, BISECTION_TOLERANCE,
};
