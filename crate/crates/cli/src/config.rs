//! Session configuration. Every section rejects unknown keys.
//!
//! ```toml
//! [network]
//! n_users = 4
//! loss_db = 30.0
//! pair_loss_db = { AB = 30.6, CD = 29.3 }
//!
//! [source]
//! hom_visibility = 0.467
//!
//! [protocol]
//! n_pulses = 3_000_000_000_000
//! z = { mu = 0.636, probability = 0.754 }
//!
//! [sim]
//! mode = "analytic_poisson"
//! seed = 7
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use qnet_core::finite_key::{PipelineOptions, DEFAULT_N_CUT};
use qnet_core::network::{user_label, Scheme};
use qnet_core::optimize::{OptimizerOptions, ProtocolMode};
use qnet_core::sim::{coherence_factor, kappa_for_visibility, SimMode};
use qnet_core::{IntensityClass, IntensityProtocol, LinkModel, Tag};
use serde::Deserialize;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SessionConfig {
    pub network: NetworkSection,
    #[serde(default)]
    pub source: SourceSection,
    #[serde(default)]
    pub detectors: DetectorSection,
    #[serde(default)]
    pub protocol: ProtocolSection,
    #[serde(default)]
    pub analysis: AnalysisSection,
    #[serde(default)]
    pub sim: SimSection,
    #[serde(default)]
    pub optimize: OptimizeSection,
    #[serde(default)]
    pub curve: CurveSection,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSection {
    pub n_users: usize,
    #[serde(default = "default_clock")]
    pub clock_hz: f64,
    /// Total loss of every pair not listed in `pair_loss_db`.
    #[serde(default = "default_loss")]
    pub loss_db: f64,
    #[serde(default)]
    pub pair_loss_db: BTreeMap<String, f64>,
    #[serde(default = "default_scheme")]
    pub scheme: Scheme,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SourceSection {
    pub linewidth_hz: f64,
    pub mode_overlap: Option<f64>,
    /// Sets ζ from `V = κ²/2`; excludes `mode_overlap` and `linewidth_hz`.
    pub hom_visibility: Option<f64>,
    pub bin_separation_s: f64,
    pub pulse_width_s: f64,
}

impl Default for SourceSection {
    fn default() -> Self {
        let link = LinkModel::default();
        SourceSection {
            linewidth_hz: 0.0,
            mode_overlap: None,
            hom_visibility: None,
            bin_separation_s: link.bin_separation_s,
            pulse_width_s: link.pulse_width_s,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectorSection {
    pub efficiency: f64,
    pub dark_prob: f64,
    pub coincidence_window_s: f64,
}

impl Default for DetectorSection {
    fn default() -> Self {
        let link = LinkModel::default();
        DetectorSection {
            efficiency: link.detector_efficiency,
            dark_prob: link.dark_prob,
            coincidence_window_s: link.coincidence_window_s,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassSection {
    pub mu: f64,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProtocolSection {
    pub n_pulses: u64,
    pub z: ClassSection,
    pub y: ClassSection,
    pub x: ClassSection,
    pub o: ClassSection,
}

impl Default for ProtocolSection {
    fn default() -> Self {
        let p = IntensityProtocol::baseline();
        let class = |t| ClassSection { mu: p.mu(t), probability: p.probability(t) };
        ProtocolSection { n_pulses: p.n_pulses, z: class(Tag::Z), y: class(Tag::Y), x: class(Tag::X), o: class(Tag::O) }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisSection {
    pub epsilon: f64,
    pub f: f64,
    pub n_cut: usize,
    pub grid_points: usize,
    pub refine_steps: usize,
    pub vacuum_error_half: bool,
    /// Relative paths resolve against the config file's directory.
    pub gain_table: Option<PathBuf>,
}

impl Default for AnalysisSection {
    fn default() -> Self {
        let p = PipelineOptions::default();
        AnalysisSection {
            epsilon: p.epsilon,
            f: p.f,
            n_cut: DEFAULT_N_CUT,
            grid_points: p.grid_points,
            refine_steps: p.refine_steps,
            vacuum_error_half: p.vacuum_error_half,
            gain_table: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimSection {
    pub mode: SimMode,
    /// Rounds per pair; defaults to `protocol.n_pulses`.
    pub n_rounds: Option<u64>,
    pub seed: u64,
    pub shards: usize,
}

impl Default for SimSection {
    fn default() -> Self {
        SimSection {
            mode: SimMode::AnalyticPoisson,
            n_rounds: None,
            seed: 0,
            shards: qnet_core::sim::montecarlo::DEFAULT_SHARDS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizeSection {
    /// Defaults to `network.loss_db`.
    pub loss_db: Option<f64>,
    pub restarts: usize,
    pub max_sweeps: usize,
    pub min_step: f64,
}

impl Default for OptimizeSection {
    fn default() -> Self {
        let o = OptimizerOptions::default();
        OptimizeSection { loss_db: None, restarts: o.restarts, max_sweeps: o.max_sweeps, min_step: o.min_step }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CurveSection {
    pub losses_db: Vec<f64>,
    pub mode: ProtocolMode,
}

impl Default for CurveSection {
    fn default() -> Self {
        CurveSection { losses_db: (0..=10).map(|i| 5.0 * i as f64).collect(), mode: ProtocolMode::Fixed }
    }
}

fn default_clock() -> f64 {
    1e8
}

fn default_loss() -> f64 {
    30.0
}

fn default_scheme() -> Scheme {
    Scheme::Tdm
}

/// A user pair of the configured network.
#[derive(Debug, Clone, PartialEq)]
pub struct Pair {
    pub index: usize,
    pub users: [usize; 2],
    pub label: String,
    pub loss_db: f64,
}

/// A parsed and validated configuration.
#[derive(Debug, Clone)]
pub struct Session {
    pub config: SessionConfig,
    pub base_dir: PathBuf,
    pub protocol: IntensityProtocol,
    pub pairs: Vec<Pair>,
    link: LinkModel,
}

pub fn pair_label(u: usize, v: usize, n: usize) -> String {
    if n <= 26 {
        format!("{}{}", user_label(u, n, None), user_label(v, n, None))
    } else {
        format!("{}-{}", user_label(u, n, None), user_label(v, n, None))
    }
}

impl Session {
    pub fn load(path: &Path) -> Result<Session> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Session::parse(&text, base_dir)
    }

    pub fn parse(text: &str, base_dir: PathBuf) -> Result<Session> {
        let config: SessionConfig = toml::from_str(text).map_err(CliError::config)?;
        Session::new(config, base_dir)
    }

    pub fn new(config: SessionConfig, base_dir: PathBuf) -> Result<Session> {
        let net = &config.network;
        if net.n_users < 2 {
            return Err(CliError::Config(format!("network.n_users = {} must be >= 2", net.n_users)));
        }
        let p = &config.protocol;
        let class = |tag, c: ClassSection| IntensityClass { tag, mu: c.mu, probability: c.probability };
        let protocol = IntensityProtocol::new(
            [class(Tag::Z, p.z), class(Tag::Y, p.y), class(Tag::X, p.x), class(Tag::O, p.o)],
            net.clock_hz,
            p.n_pulses,
        )
        .map_err(CliError::config)?;

        let link = link_model(&config)?;
        let n = net.n_users;
        let mut pairs = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                let label = pair_label(u, v, n);
                let loss_db = net.pair_loss_db.get(&label).copied().unwrap_or(net.loss_db);
                pairs.push(Pair { index: pairs.len(), users: [u, v], label, loss_db });
            }
        }
        for (label, loss) in &net.pair_loss_db {
            if !pairs.iter().any(|p| &p.label == label) {
                return Err(CliError::Config(format!("network.pair_loss_db: no pair {label} among {n} users")));
            }
            if !(*loss >= 0.0 && loss.is_finite()) {
                return Err(CliError::Config(format!("network.pair_loss_db.{label} = {loss} must be >= 0")));
            }
        }
        for p in &pairs {
            link.with_total_loss(p.loss_db).validate().map_err(CliError::config)?;
        }

        let sim = &config.sim;
        if sim.n_rounds == Some(0) {
            return Err(CliError::Config("sim.n_rounds must be > 0".into()));
        }
        if sim.shards == 0 {
            return Err(CliError::Config("sim.shards must be > 0".into()));
        }
        let a = &config.analysis;
        if !(a.epsilon > 0.0 && a.epsilon < 1.0) {
            return Err(CliError::Config(format!("analysis.epsilon = {} must lie in (0, 1)", a.epsilon)));
        }
        if !(a.f >= 1.0 && a.f.is_finite()) {
            return Err(CliError::Config(format!("analysis.f = {} must be >= 1", a.f)));
        }
        if a.grid_points < 2 {
            return Err(CliError::Config("analysis.grid_points must be >= 2".into()));
        }
        let c = &config.curve;
        if c.losses_db.is_empty() || c.losses_db.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CliError::Config("curve.losses_db must be non-empty and strictly increasing".into()));
        }
        Ok(Session { config, base_dir, protocol, pairs, link })
    }

    /// Link of a pair with the given total loss, split evenly.
    pub fn link(&self, loss_db: f64) -> LinkModel {
        self.link.with_total_loss(loss_db)
    }

    pub fn pipeline_options(&self) -> PipelineOptions {
        let a = &self.config.analysis;
        PipelineOptions {
            epsilon: a.epsilon,
            f: a.f,
            n_cut: a.n_cut,
            grid_points: a.grid_points,
            refine_steps: a.refine_steps,
            vacuum_error_half: a.vacuum_error_half,
        }
    }

    pub fn optimizer_options(&self) -> OptimizerOptions {
        let o = &self.config.optimize;
        OptimizerOptions {
            start: self.protocol.params(),
            restarts: o.restarts,
            seed: self.config.sim.seed,
            clock_hz: self.config.network.clock_hz,
            min_step: o.min_step,
            max_sweeps: o.max_sweeps,
            pipeline: self.pipeline_options(),
            ..OptimizerOptions::default()
        }
    }

    pub fn n_rounds(&self) -> u64 {
        self.config.sim.n_rounds.unwrap_or(self.protocol.n_pulses)
    }

    pub fn gain_table_path(&self) -> Option<PathBuf> {
        self.config.analysis.gain_table.as_ref().map(|p| self.base_dir.join(p))
    }

    /// Pairs named in `filter` (comma-separated labels), or all pairs.
    pub fn select_pairs(&self, filter: Option<&str>) -> Result<Vec<&Pair>> {
        match filter {
            None => Ok(self.pairs.iter().collect()),
            Some(f) => parse_filter(f)?
                .iter()
                .map(|l| {
                    self.pairs
                        .iter()
                        .find(|p| &p.label == l)
                        .ok_or_else(|| CliError::Config(format!("--pairs: no pair {l} in the network")))
                })
                .collect(),
        }
    }
}

pub fn parse_filter(filter: &str) -> Result<Vec<String>> {
    let labels: Vec<String> = filter.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
    if labels.is_empty() {
        return Err(CliError::Config("--pairs is empty".into()));
    }
    Ok(labels)
}

fn link_model(config: &SessionConfig) -> Result<LinkModel> {
    let s = &config.source;
    let d = &config.detectors;
    let (mode_overlap, coherence) = match (s.hom_visibility, s.mode_overlap) {
        (Some(_), Some(_)) => {
            return Err(CliError::Config("source: give either hom_visibility or mode_overlap, not both".into()))
        }
        (Some(_), None) if s.linewidth_hz != 0.0 => {
            return Err(CliError::Config("source: hom_visibility already fixes the contrast; drop linewidth_hz".into()))
        }
        (Some(v), None) => (kappa_for_visibility(v).map_err(CliError::config)?, 1.0),
        (None, m) => {
            (m.unwrap_or(1.0), coherence_factor(s.linewidth_hz, s.bin_separation_s).map_err(CliError::config)?)
        }
    };
    let link = LinkModel {
        detector_efficiency: d.efficiency,
        dark_prob: d.dark_prob,
        mode_overlap,
        coherence_factor: coherence,
        coincidence_window_s: d.coincidence_window_s,
        bin_separation_s: s.bin_separation_s,
        pulse_width_s: s.pulse_width_s,
        ..LinkModel::symmetric(config.network.loss_db)
    };
    link.validate().map_err(CliError::config)?;
    Ok(link)
}
