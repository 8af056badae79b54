//! Run configuration: a TOML file with one table per command, overridden by
//! command-line flags.

use std::path::{Path, PathBuf};

use cvbell_core::bell::{SolverOptions, Symmetry, ThresholdTarget, BISECTION_TOLERANCE, DEFAULT_CUTOFF};
use cvbell_core::measurement::HomodyneConvention;
use cvbell_core::source::{log_spaced, AncillaModel, HeraldPattern, PhasePlate};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}:{line}: {message}")]
    Invalid { path: String, line: usize, message: String },
    #[error("after command-line overrides: {0}")]
    Flag(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
#[derive(Default)]
pub struct RunConfig {
    /// CSV path; the JSON sidecar sits next to it. Without it the CSV goes to
    /// standard output.
    pub output: Option<PathBuf>,
    /// Worker threads; all cores when absent.
    pub workers: Option<usize>,
    /// Reserved: every algorithm is deterministic.
    pub seed: u64,
    pub solver: SolverSection,
    pub threshold: ThresholdSection,
    pub region: RegionSection,
    pub source_amp: SourceAmpSection,
    pub local_amp: LocalAmpSection,
    pub multi_filter: MultiFilterSection,
}


#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    /// Per-mode photon cutoff of the measurement operators.
    pub cutoff: usize,
    pub homodyne_efficiency: f64,
    pub convention: HomodyneConvention,
    /// Bisection bracket width.
    pub tolerance: f64,
}

impl Default for SolverSection {
    fn default() -> Self {
        Self {
            cutoff: DEFAULT_CUTOFF,
            homodyne_efficiency: 1.0,
            convention: HomodyneConvention::default(),
            tolerance: BISECTION_TOLERANCE,
        }
    }
}

impl SolverSection {
    pub fn options(&self) -> SolverOptions {
        SolverOptions {
            cutoff: self.cutoff,
            homodyne_efficiency: self.homodyne_efficiency,
            convention: self.convention,
            tolerance: self.tolerance,
        }
    }
}

/// State measured by the threshold and region commands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StateChoice {
    /// Best state with at most two photons in total.
    Optimal,
    /// `(|20> + |02>)/√2`.
    Psi2,
}

impl StateChoice {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Optimal => "optimal",
            Self::Psi2 => "psi2",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThresholdSection {
    pub symmetry: Symmetry,
    pub target: ThresholdTarget,
    /// Detection efficiency, held fixed when solving for transmission.
    pub eta_d: f64,
    /// Transmission, held fixed when solving for detection efficiency.
    pub eta_t: f64,
    pub state: StateChoice,
}

impl Default for ThresholdSection {
    fn default() -> Self {
        Self {
            symmetry: Symmetry::Symmetric,
            target: ThresholdTarget::Transmission,
            eta_d: 1.0,
            eta_t: 1.0,
            state: StateChoice::Optimal,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegionSection {
    pub symmetry: Symmetry,
    /// Detection efficiencies at which the critical transmission is solved.
    pub eta_d: Vec<f64>,
    pub state: StateChoice,
}

fn efficiency_grid() -> Vec<f64> {
    (0..=20).map(|i| 1.0 - 0.025 * i as f64).collect()
}

impl Default for RegionSection {
    fn default() -> Self {
        Self {
            symmetry: Symmetry::Symmetric,
            eta_d: efficiency_grid(),
            state: StateChoice::Optimal,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SourceAmpSection {
    pub symmetry: Symmetry,
    pub eta_d: Vec<f64>,
    pub eta_c: f64,
    /// Squeezing grid.
    pub squeezing: Vec<f64>,
    /// Amplifier transmission grid.
    pub transmission: Vec<f64>,
    pub refine: bool,
    /// Photon cutoff of the squeezed pair.
    pub cutoff: usize,
    pub herald_efficiency: f64,
    /// Photon-number-resolving herald detectors instead of bucket detectors.
    pub photon_counting: bool,
    pub pattern: HeraldPattern,
    pub feed_forward: bool,
    pub phase_plate: PhasePlate,
    pub ancilla: AncillaModel,
}

impl Default for SourceAmpSection {
    fn default() -> Self {
        Self {
            symmetry: Symmetry::Symmetric,
            eta_d: efficiency_grid(),
            eta_c: 1.0,
            squeezing: (1..=40).map(|i| 0.01 * i as f64).collect(),
            transmission: log_spaced(1e-4, 0.999, 60),
            refine: true,
            cutoff: 6,
            herald_efficiency: 1.0,
            photon_counting: false,
            pattern: HeraldPattern::Either,
            feed_forward: true,
            phase_plate: PhasePlate::Alice,
            ancilla: AncillaModel::IdealSinglePhoton,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LocalAmpSection {
    pub g: f64,
    pub m: u32,
    pub eta_d: f64,
    pub eta_c: f64,
    pub symmetry: Symmetry,
}

impl Default for LocalAmpSection {
    fn default() -> Self {
        Self {
            g: 2.0,
            m: 1,
            eta_d: 1.0,
            eta_c: 1.0,
            symmetry: Symmetry::Symmetric,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MultiFilterSection {
    pub g: f64,
    /// Largest number of filter applications.
    pub max_m: u32,
    pub eta_c: f64,
}

impl Default for MultiFilterSection {
    fn default() -> Self {
        Self {
            g: 2.0,
            max_m: 4,
            eta_c: 1.0,
        }
    }
}

/// Where a config value came from, for diagnostics.
pub struct Origin {
    pub path: Option<PathBuf>,
    pub text: String,
}

impl Origin {
    pub fn flags() -> Self {
        Self {
            path: None,
            text: String::new(),
        }
    }

    fn name(&self) -> String {
        self.path
            .as_ref()
            .map(|p| p.display().to_string())
            .unwrap_or_else(|| "<flags>".into())
    }

    /// Line of `key` inside `[section]`, or of the section header, or 1.
    fn line_of(&self, section: &str, key: &str) -> usize {
        let mut current = String::new();
        let mut header = None;
        for (i, raw) in self.text.lines().enumerate() {
            let line = raw.trim();
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                current = name.trim().to_string();
                if current == section {
                    header = Some(i + 1);
                }
                continue;
            }
            if current == section {
                if let Some((k, _)) = line.split_once('=') {
                    if k.trim() == key {
                        return i + 1;
                    }
                }
            }
        }
        header.unwrap_or(1)
    }

    pub fn invalid(&self, section: &str, key: &str, message: impl Into<String>) -> ConfigError {
        let message = message.into();
        let message = if section.is_empty() {
            format!("`{key}`: {message}")
        } else {
            format!("`{section}.{key}`: {message}")
        };
        if self.path.is_none() {
            return ConfigError::Flag(message);
        }
        ConfigError::Invalid {
            path: self.name(),
            line: self.line_of(section, key),
            message,
        }
    }
}

pub fn load(path: &Path) -> Result<(RunConfig, Origin), ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let origin = Origin {
        path: Some(path.to_path_buf()),
        text,
    };
    let config = parse(&origin)?;
    Ok((config, origin))
}

pub fn parse(origin: &Origin) -> Result<RunConfig, ConfigError> {
    toml::from_str(&origin.text).map_err(|e| {
        let line = e
            .span()
            .map(|s| {
                origin.text.as_bytes()[..s.start.min(origin.text.len())]
                    .iter()
                    .filter(|&&b| b == b'\n')
                    .count()
                    + 1
            })
            .unwrap_or(1);
        ConfigError::Invalid {
            path: origin.name(),
            line,
            message: e.message().to_string(),
        }
    })
}

fn check_unit(origin: &Origin, section: &str, key: &str, value: f64) -> Result<(), ConfigError> {
    if value.is_finite() && (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(origin.invalid(section, key, format!("must lie in [0, 1], got {value}")))
    }
}

fn check_grid(origin: &Origin, section: &str, key: &str, values: &[f64]) -> Result<(), ConfigError> {
    for &v in values {
        check_unit(origin, section, key, v)?;
    }
    Ok(())
}

impl RunConfig {
    /// Range checks of every field, reported against the config file.
    pub fn validate(&self, origin: &Origin) -> Result<(), ConfigError> {
        if self.workers == Some(0) {
            return Err(origin.invalid("", "workers", "must be at least 1"));
        }
        let s = &self.solver;
        if s.cutoff < 2 {
            return Err(origin.invalid("solver", "cutoff", "must be at least 2"));
        }
        if s.cutoff > 12 {
            return Err(origin.invalid("solver", "cutoff", "must be at most 12"));
        }
        check_unit(origin, "solver", "homodyne_efficiency", s.homodyne_efficiency)?;
        if !(s.tolerance.is_finite() && s.tolerance > 0.0 && s.tolerance < 1.0) {
            return Err(origin.invalid("solver", "tolerance", "must lie in (0, 1)"));
        }

        check_unit(origin, "threshold", "eta_d", self.threshold.eta_d)?;
        check_unit(origin, "threshold", "eta_t", self.threshold.eta_t)?;
        check_grid(origin, "region", "eta_d", &self.region.eta_d)?;

        let a = &self.source_amp;
        check_grid(origin, "source_amp", "eta_d", &a.eta_d)?;
        check_unit(origin, "source_amp", "eta_c", a.eta_c)?;
        check_unit(origin, "source_amp", "herald_efficiency", a.herald_efficiency)?;
        if a.squeezing.is_empty() || a.squeezing.iter().any(|&l| !(l.is_finite() && (0.0..1.0).contains(&l))) {
            return Err(origin.invalid("source_amp", "squeezing", "needs values in [0, 1)"));
        }
        if a.transmission.is_empty() || a.transmission.iter().any(|&t| !(t.is_finite() && t > 0.0 && t <= 1.0)) {
            return Err(origin.invalid("source_amp", "transmission", "needs values in (0, 1]"));
        }
        if a.cutoff == 0 || a.cutoff > 10 {
            return Err(origin.invalid("source_amp", "cutoff", "must lie in 1..=10"));
        }

        let l = &self.local_amp;
        if !(l.g.is_finite() && l.g >= 1.0) {
            return Err(origin.invalid("local_amp", "g", format!("must be at least 1, got {}", l.g)));
        }
        if l.m == 0 {
            return Err(origin.invalid("local_amp", "m", "must be at least 1"));
        }
        check_unit(origin, "local_amp", "eta_d", l.eta_d)?;
        check_unit(origin, "local_amp", "eta_c", l.eta_c)?;

        let f = &self.multi_filter;
        if !(f.g.is_finite() && f.g >= 1.0) {
            return Err(origin.invalid("multi_filter", "g", format!("must be at least 1, got {}", f.g)));
        }
        if f.max_m == 0 {
            return Err(origin.invalid("multi_filter", "max_m", "must be at least 1"));
        }
        check_unit(origin, "multi_filter", "eta_c", f.eta_c)
    }
}
