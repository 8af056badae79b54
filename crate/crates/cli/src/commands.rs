use cvbell_core::bell::{
    critical_efficiency, region_boundary, BellResult, StateSource, ThresholdSolve, ThresholdTarget,
};
use cvbell_core::fock::DensityOperator;
use cvbell_core::local::{filtered_critical_transmission, multi_filter_curve, psi2, FilterConfig};
use cvbell_core::source::{amplifier_gain, source_region_boundary, HeraldDetector, SourceConfig, SourceSearch};
use cvbell_core::Result;
use serde_json::{json, Value};

use crate::config::{RunConfig, StateChoice};
use crate::output::{Cell, Table};

pub struct Outcome {
    pub table: Table,
    pub assumptions: Vec<&'static str>,
    pub results: Value,
}

const SOLVE_COLUMNS: [&str; 5] = [
    "threshold",
    "bracket_lower",
    "bracket_upper",
    "bracket_width",
    "iterations",
];

fn solve_cells(s: &ThresholdSolve) -> Vec<Cell> {
    let b = &s.bisection;
    vec![
        Cell::opt(b.threshold),
        Cell::Float(b.lower),
        Cell::Float(b.upper),
        Cell::Float(b.bracket_width()),
        Cell::Int(b.iterations as u64),
    ]
}

const RESULT_COLUMNS: [&str; 8] = [
    "chsh", "delta", "c00_re", "c00_im", "c20_re", "c20_im", "c02_re", "c02_im",
];

fn result_cells(r: Option<&BellResult>) -> Vec<Cell> {
    let mut cells = vec![
        Cell::opt(r.map(|r| r.chsh_value)),
        Cell::opt(r.map(|r| r.optimal_delta)),
    ];
    let state = r.and_then(|r| r.optimal_state.as_ref());
    for o in [[0, 0], [2, 0], [0, 2]] {
        let a = state.map(|s| s.amplitude(&o));
        cells.push(Cell::opt(a.map(|a| a.re)));
        cells.push(Cell::opt(a.map(|a| a.im)));
    }
    cells
}

fn state_source(choice: StateChoice) -> StateSource {
    match choice {
        StateChoice::Optimal => StateSource::OptimalSubspace,
        StateChoice::Psi2 => StateSource::Pure(psi2()),
    }
}

fn header(lead: &[&'static str], tail: &[&[&'static str]]) -> Vec<&'static str> {
    let mut h = lead.to_vec();
    for t in tail {
        h.extend_from_slice(t);
    }
    h
}

pub fn threshold(config: &RunConfig) -> Result<Outcome> {
    let t = &config.threshold;
    let options = config.solver.options();
    let fixed = match t.target {
        ThresholdTarget::Transmission => t.eta_d,
        ThresholdTarget::Detection => t.eta_t,
    };
    let solve = critical_efficiency(t.target, fixed, t.symmetry, &state_source(t.state), &options)?;
    let mut table = Table::new(header(
        &[
            "symmetry",
            "target",
            "fixed_efficiency",
            "state",
            "cutoff",
            "homodyne_efficiency",
        ],
        &[&SOLVE_COLUMNS, &RESULT_COLUMNS],
    ));
    let mut row = vec![
        Cell::text(t.symmetry.as_str()),
        Cell::text(match t.target {
            ThresholdTarget::Transmission => "transmission",
            ThresholdTarget::Detection => "detection",
        }),
        Cell::Float(fixed),
        Cell::text(t.state.as_str()),
        Cell::Int(options.cutoff as u64),
        Cell::Float(options.homodyne_efficiency),
    ];
    row.extend(solve_cells(&solve));
    row.extend(result_cells(solve.at_threshold.as_ref()));
    table.push(row);
    Ok(Outcome {
        table,
        assumptions: vec![],
        results: json!({ "violation_found": solve.threshold().is_some() }),
    })
}

pub fn region(config: &RunConfig) -> Result<Outcome> {
    let r = &config.region;
    let options = config.solver.options();
    let points = region_boundary(&r.eta_d, r.symmetry, &state_source(r.state), &options)?;
    let mut table = Table::new(header(
        &["symmetry", "eta_d", "state", "cutoff", "homodyne_efficiency"],
        &[&SOLVE_COLUMNS, &RESULT_COLUMNS],
    ));
    for p in &points {
        let mut row = vec![
            Cell::text(r.symmetry.as_str()),
            Cell::Float(p.detection_efficiency),
            Cell::text(r.state.as_str()),
            Cell::Int(options.cutoff as u64),
            Cell::Float(options.homodyne_efficiency),
        ];
        row.extend(solve_cells(&p.solve));
        row.extend(result_cells(p.solve.at_threshold.as_ref()));
        table.push(row);
    }
    Ok(Outcome {
        table,
        assumptions: vec![],
        results: json!({ "points": points.len() }),
    })
}

pub fn source_amp(config: &RunConfig) -> Result<Outcome> {
    let a = &config.source_amp;
    let options = config.solver.options();
    let detector = if a.photon_counting {
        HeraldDetector::PhotonCounting {
            efficiency: a.herald_efficiency,
        }
    } else {
        HeraldDetector::Bucket {
            efficiency: a.herald_efficiency,
        }
    };
    let base = SourceConfig {
        coupling: a.eta_c,
        ancilla: a.ancilla,
        detector,
        pattern: a.pattern,
        feed_forward: a.feed_forward,
        phase_plate: a.phase_plate,
        cutoff: a.cutoff,
        ..Default::default()
    };
    let search = SourceSearch {
        squeezing: a.squeezing.clone(),
        transmission: a.transmission.clone(),
        refine: a.refine,
    };
    let points = source_region_boundary(&a.eta_d, a.symmetry, &base, &search, &options)?;
    let mut table = Table::new(header(
        &["symmetry", "eta_d", "eta_c", "source_cutoff"],
        &[
            &SOLVE_COLUMNS,
            &[
                "chsh",
                "delta",
                "squeezing",
                "amplifier_transmission",
                "gain",
                "success_probability",
            ],
        ],
    ));
    for p in &points {
        let b = &p.bisection;
        let o = p.optimum.as_ref();
        table.push(vec![
            Cell::text(a.symmetry.as_str()),
            Cell::Float(p.detection_efficiency),
            Cell::Float(a.eta_c),
            Cell::Int(a.cutoff as u64),
            Cell::opt(b.threshold),
            Cell::Float(b.lower),
            Cell::Float(b.upper),
            Cell::Float(b.bracket_width()),
            Cell::Int(b.iterations as u64),
            Cell::opt(o.map(|o| o.chsh)),
            Cell::opt(o.map(|o| o.delta)),
            Cell::opt(o.map(|o| o.squeezing)),
            Cell::opt(o.map(|o| o.transmission)),
            Cell::opt(o.map(|o| amplifier_gain(o.transmission))),
            Cell::opt(o.map(|o| o.success_probability)),
        ]);
    }
    Ok(Outcome {
        table,
        assumptions: vec!["coupling loss acts on both outputs of the squeezed pair before the amplifier"],
        results: json!({ "points": points.len() }),
    })
}

const FILTER_COLUMNS: [&str; 5] = ["g", "m", "eta_d", "eta_c", "symmetry"];

pub fn local_amp(config: &RunConfig) -> Result<Outcome> {
    let l = &config.local_amp;
    let options = config.solver.options();
    let filter = FilterConfig {
        gain: l.g,
        applications: l.m,
        detection_efficiency: l.eta_d,
        coupling: l.eta_c,
        symmetry: l.symmetry,
    };
    let input = DensityOperator::from_pure(&psi2());
    let solve = filtered_critical_transmission(&input, &filter, &options)?;
    let mut table = Table::new(header(&FILTER_COLUMNS, &[&SOLVE_COLUMNS, &["chsh", "delta"]]));
    let mut row = vec![
        Cell::Float(l.g),
        Cell::Int(l.m as u64),
        Cell::Float(l.eta_d),
        Cell::Float(l.eta_c),
        Cell::text(l.symmetry.as_str()),
    ];
    row.extend(solve_cells(&solve));
    let r = solve.at_threshold.as_ref();
    row.push(Cell::opt(r.map(|r| r.chsh_value)));
    row.push(Cell::opt(r.map(|r| r.optimal_delta)));
    table.push(row);
    Ok(Outcome {
        table,
        assumptions: vec!["input (|20>+|02>)/sqrt2; filtered state renormalized by its computed trace"],
        results: json!({ "violation_found": solve.threshold().is_some() }),
    })
}

pub fn multi_filter(config: &RunConfig) -> Result<Outcome> {
    let f = &config.multi_filter;
    let options = config.solver.options();
    let filter = FilterConfig {
        gain: f.g,
        applications: 1,
        detection_efficiency: 1.0,
        coupling: f.eta_c,
        symmetry: cvbell_core::bell::Symmetry::Symmetric,
    };
    let curve = multi_filter_curve(&filter, f.max_m, &options)?;
    let mut table = Table::new(header(&FILTER_COLUMNS, &[&SOLVE_COLUMNS, &["chsh", "delta"]]));
    for p in &curve.points {
        let b = &p.bisection;
        table.push(vec![
            Cell::Float(f.g),
            Cell::Int(p.applications as u64),
            Cell::Float(1.0),
            Cell::Float(f.eta_c),
            Cell::text("symmetric"),
            Cell::opt(b.threshold),
            Cell::Float(b.lower),
            Cell::Float(b.upper),
            Cell::Float(b.bracket_width()),
            Cell::Int(b.iterations as u64),
            Cell::opt(p.chsh),
            Cell::opt(p.delta),
        ]);
    }
    Ok(Outcome {
        table,
        assumptions: vec!["detection efficiency eta_d = 1 (not stated for the repeated-filter curve)"],
        results: json!({ "log_threshold_fit": curve.log_fit }),
    })
}
