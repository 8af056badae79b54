use cvbell_core::bell::{region_boundary, SolverOptions, StateSource, Symmetry};
use cvbell_core::source::{log_spaced, optimize_source, source_region_boundary, SourceConfig, SourceSearch};

fn search() -> SourceSearch {
    SourceSearch {
        squeezing: vec![0.02, 0.05, 0.1],
        transmission: log_spaced(1e-4, 0.999, 24),
        refine: true,
    }
}

fn base() -> SourceConfig {
    SourceConfig {
        cutoff: 3,
        ..Default::default()
    }
}

#[test]
fn lossless_coupling_follows_optimal_subspace_boundary() {
    let options = SolverOptions::default();
    let grid = [1.0, 0.8];
    let source = source_region_boundary(&grid, Symmetry::Symmetric, &base(), &search(), &options).unwrap();
    let ideal = region_boundary(&grid, Symmetry::Symmetric, &StateSource::OptimalSubspace, &options).unwrap();
    for (s, i) in source.iter().zip(&ideal) {
        assert_eq!(s.detection_efficiency, i.detection_efficiency);
        let (a, b) = (s.critical_transmission().unwrap(), i.critical_transmission().unwrap());
        // the source can only approach the optimal states from below
        assert!(a >= b - options.tolerance);
        assert!(a - b < 0.01, "η_d={}: {a} vs {b}", s.detection_efficiency);
        let opt = s.optimum.as_ref().unwrap();
        assert!(opt.chsh > 2.0);
        assert!(opt.success_probability > 0.0 && opt.success_probability < 1.0);
    }
}

#[test]
fn optimum_violates_above_threshold_only() {
    let options = SolverOptions::default();
    let above = optimize_source(&base(), &search(), 0.9, 1.0, Symmetry::Symmetric, &options).unwrap();
    let below = optimize_source(&base(), &search(), 0.75, 1.0, Symmetry::Symmetric, &options).unwrap();
    assert!(above.chsh > 2.0);
    assert!(below.chsh < 2.0);
    // a balanced optimum needs a large gain at small squeezing
    assert!(above.transmission < 0.01);
}

#[test]
fn empty_grid_gives_empty_boundary() {
    let out = source_region_boundary(&[], Symmetry::Symmetric, &base(), &search(), &SolverOptions::default()).unwrap();
    assert!(out.is_empty());
    let empty = SourceSearch {
        squeezing: vec![],
        ..search()
    };
    assert!(source_region_boundary(&[1.0], Symmetry::Symmetric, &base(), &empty, &SolverOptions::default()).is_err());
}
