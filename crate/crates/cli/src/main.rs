mod commands;
mod config;
mod output;
mod reproduce;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use cvbell_core::bell::{Symmetry, ThresholdTarget};
use cvbell_core::measurement::HomodyneConvention;
use cvbell_core::source::HeraldPattern;
use serde::de::DeserializeOwned;

use config::{ConfigError, Origin, RunConfig, StateChoice};

/// Parse a kebab-case enum value through its serde representation.
fn kebab<T: DeserializeOwned>(s: &str) -> Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|e| e.to_string())
}

#[derive(Parser, Debug)]
#[command(
    name = "cvbell",
    version,
    about = "Critical efficiencies of hybrid-measurement CHSH tests"
)]
struct Cli {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// CSV output path (a `.json` sidecar is written next to it).
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Reserved; all algorithms are deterministic.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(flatten)]
    solver: SolverFlags,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct SolverFlags {
    /// Photon cutoff per mode of the measurement operators.
    #[arg(long, global = true)]
    cutoff: Option<usize>,
    #[arg(long, global = true)]
    homodyne_efficiency: Option<f64>,
    /// quarter-turn or real-hermite.
    #[arg(long, global = true, value_parser = kebab::<HomodyneConvention>)]
    convention: Option<HomodyneConvention>,
    /// Bisection bracket width.
    #[arg(long, global = true)]
    tolerance: Option<f64>,
}

#[derive(Args, Debug)]
struct SymmetryFlags {
    #[arg(long, conflicts_with = "asymmetric")]
    symmetric: bool,
    /// Alice sits at the source and sees no channel loss.
    #[arg(long)]
    asymmetric: bool,
}

impl SymmetryFlags {
    fn apply(&self, target: &mut Symmetry) {
        if self.symmetric {
            *target = Symmetry::Symmetric;
        }
        if self.asymmetric {
            *target = Symmetry::Asymmetric;
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Critical transmission or detection efficiency.
    Threshold {
        #[command(flatten)]
        symmetry: SymmetryFlags,
        /// transmission or detection.
        #[arg(long, value_parser = kebab::<ThresholdTarget>)]
        target: Option<ThresholdTarget>,
        #[arg(long)]
        eta_d: Option<f64>,
        #[arg(long)]
        eta_t: Option<f64>,
        /// optimal or psi2.
        #[arg(long, value_parser = kebab::<StateChoice>)]
        state: Option<StateChoice>,
    },
    /// Critical transmission over a grid of detection efficiencies.
    Region {
        #[command(flatten)]
        symmetry: SymmetryFlags,
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        eta_d: Option<Vec<f64>>,
        #[arg(long, value_parser = kebab::<StateChoice>)]
        state: Option<StateChoice>,
    },
    /// Violation region of the amplified source, optimized over squeezing and
    /// amplifier transmission.
    SourceAmp {
        #[command(flatten)]
        symmetry: SymmetryFlags,
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        eta_d: Option<Vec<f64>>,
        #[arg(long)]
        eta_c: Option<f64>,
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        squeezing: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        amp_transmission: Option<Vec<f64>>,
        /// Skip the log-t refinement around the best grid point.
        #[arg(long)]
        no_refine: bool,
        /// Photon cutoff of the squeezed pair.
        #[arg(long)]
        source_cutoff: Option<usize>,
        #[arg(long)]
        herald_efficiency: Option<f64>,
        #[arg(long)]
        photon_counting: bool,
        /// d1, d2 or either.
        #[arg(long, value_parser = kebab::<HeraldPattern>)]
        pattern: Option<HeraldPattern>,
    },
    /// Critical transmission with local filters on (|20>+|02>)/√2.
    LocalAmp {
        #[command(flatten)]
        symmetry: SymmetryFlags,
        #[arg(long)]
        g: Option<f64>,
        #[arg(long)]
        m: Option<u32>,
        #[arg(long)]
        eta_d: Option<f64>,
        #[arg(long)]
        eta_c: Option<f64>,
    },
    /// Critical transmission against the number of filter applications.
    MultiFilter {
        #[arg(long)]
        g: Option<f64>,
        #[arg(long)]
        max_m: Option<u32>,
        #[arg(long)]
        eta_c: Option<f64>,
    },
    /// Compare every reference value with its computed counterpart.
    ReproduceAll,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Self::Threshold { .. } => "threshold",
            Self::Region { .. } => "region",
            Self::SourceAmp { .. } => "source-amp",
            Self::LocalAmp { .. } => "local-amp",
            Self::MultiFilter { .. } => "multi-filter",
            Self::ReproduceAll => "reproduce-all",
        }
    }
}

fn set<T: Clone>(target: &mut T, value: &Option<T>) {
    if let Some(v) = value {
        *target = v.clone();
    }
}

fn apply_flags(cli: &Cli, c: &mut RunConfig) {
    if cli.output.is_some() {
        c.output = cli.output.clone();
    }
    if cli.workers.is_some() {
        c.workers = cli.workers;
    }
    set(&mut c.seed, &cli.seed);
    set(&mut c.solver.cutoff, &cli.solver.cutoff);
    set(&mut c.solver.homodyne_efficiency, &cli.solver.homodyne_efficiency);
    set(&mut c.solver.convention, &cli.solver.convention);
    set(&mut c.solver.tolerance, &cli.solver.tolerance);
    match &cli.command {
        Command::Threshold {
            symmetry,
            target,
            eta_d,
            eta_t,
            state,
        } => {
            let t = &mut c.threshold;
            symmetry.apply(&mut t.symmetry);
            set(&mut t.target, target);
            set(&mut t.eta_d, eta_d);
            set(&mut t.eta_t, eta_t);
            set(&mut t.state, state);
        }
        Command::Region { symmetry, eta_d, state } => {
            let r = &mut c.region;
            symmetry.apply(&mut r.symmetry);
            set(&mut r.eta_d, eta_d);
            set(&mut r.state, state);
        }
        Command::SourceAmp {
            symmetry,
            eta_d,
            eta_c,
            squeezing,
            amp_transmission,
            no_refine,
            source_cutoff,
            herald_efficiency,
            photon_counting,
            pattern,
        } => {
            let a = &mut c.source_amp;
            symmetry.apply(&mut a.symmetry);
            set(&mut a.eta_d, eta_d);
            set(&mut a.eta_c, eta_c);
            set(&mut a.squeezing, squeezing);
            set(&mut a.transmission, amp_transmission);
            if *no_refine {
                a.refine = false;
            }
            set(&mut a.cutoff, source_cutoff);
            set(&mut a.herald_efficiency, herald_efficiency);
            if *photon_counting {
                a.photon_counting = true;
            }
            set(&mut a.pattern, pattern);
        }
        Command::LocalAmp {
            symmetry,
            g,
            m,
            eta_d,
            eta_c,
        } => {
            let l = &mut c.local_amp;
            symmetry.apply(&mut l.symmetry);
            set(&mut l.g, g);
            set(&mut l.m, m);
            set(&mut l.eta_d, eta_d);
            set(&mut l.eta_c, eta_c);
        }
        Command::MultiFilter { g, max_m, eta_c } => {
            let f = &mut c.multi_filter;
            set(&mut f.g, g);
            set(&mut f.max_m, max_m);
            set(&mut f.eta_c, eta_c);
        }
        Command::ReproduceAll => {}
    }
}

fn effective_config(cli: &Cli) -> Result<RunConfig, ConfigError> {
    let mut config = match &cli.config {
        Some(path) => {
            let (config, origin) = config::load(path)?;
            config.validate(&origin)?;
            config
        }
        None => RunConfig::default(),
    };
    apply_flags(cli, &mut config);
    config.validate(&Origin::flags())?;
    Ok(config)
}

enum Failure {
    Validation(String),
    Gate,
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let config = effective_config(cli).map_err(|e| Failure::Validation(e.to_string()))?;
    if let Some(n) = config.workers {
        // fails only if a pool already exists, which keeps its own size
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let simulation = |e: cvbell_core::Error| Failure::Validation(e.to_string());
    let mut gate_passed = true;
    let outcome = match &cli.command {
        Command::Threshold { .. } => commands::threshold(&config).map_err(simulation)?,
        Command::Region { .. } => commands::region(&config).map_err(simulation)?,
        Command::SourceAmp { .. } => commands::source_amp(&config).map_err(simulation)?,
        Command::LocalAmp { .. } => commands::local_amp(&config).map_err(simulation)?,
        Command::MultiFilter { .. } => commands::multi_filter(&config).map_err(simulation)?,
        Command::ReproduceAll => {
            let (outcome, passed) = reproduce::run(&config.solver.options()).map_err(simulation)?;
            print!("{}", reproduce::render(&outcome.table));
            gate_passed = passed;
            outcome
        }
    };
    let csv = outcome
        .table
        .to_csv()
        .map_err(|e| Failure::Validation(format!("cannot format results: {e}")))?;
    match &config.output {
        Some(path) => {
            let meta = output::sidecar(cli.command.name(), &config, &outcome.assumptions, outcome.results);
            let json = serde_json::to_vec_pretty(&meta).expect("metadata serializes");
            output::write_all_or_nothing(&[(path.clone(), csv), (output::sidecar_path(path), json)])
                .map_err(|e| Failure::Validation(format!("cannot write {}: {e}", path.display())))?;
        }
        None if matches!(cli.command, Command::ReproduceAll) => {}
        None => print!("{}", String::from_utf8_lossy(&csv)),
    }
    if gate_passed {
        Ok(())
    } else {
        Err(Failure::Gate)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // usage errors share the validation exit code; 2 is reserved for the reproduction gate
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
        Err(Failure::Gate) => {
            eprintln!("reproduction gate failed");
            ExitCode::from(2)
        }
    }
}
