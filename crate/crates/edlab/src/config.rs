//! Experiment configuration: TOML `key = value` files with sections
//! `[experiment]`, `[grid]`, `[physics]`, `[run]`. Unknown keys, duplicate
//! keys, keys not consumed by the named experiment, and out-of-range values
//! are all rejected with the offending key path.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid1D, PhysicalParams};

/// The eight named experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    FreePacket,
    Harmonic,
    HybridStatic,
    EnsembleConsistency,
    ClassicalLimitScan,
    RegraduationCheck,
    DriftUrScan,
    UrCorpus,
}

impl ExperimentKind {
    pub fn all() -> [ExperimentKind; 8] {
        [
            ExperimentKind::FreePacket,
            ExperimentKind::Harmonic,
            ExperimentKind::HybridStatic,
            ExperimentKind::EnsembleConsistency,
            ExperimentKind::ClassicalLimitScan,
            ExperimentKind::RegraduationCheck,
            ExperimentKind::DriftUrScan,
            ExperimentKind::UrCorpus,
        ]
    }

    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::FreePacket => "free_packet",
            ExperimentKind::Harmonic => "harmonic",
            ExperimentKind::HybridStatic => "hybrid_static",
            ExperimentKind::EnsembleConsistency => "ensemble_consistency",
            ExperimentKind::ClassicalLimitScan => "classical_limit_scan",
            ExperimentKind::RegraduationCheck => "regraduation_check",
            ExperimentKind::DriftUrScan => "drift_ur_scan",
            ExperimentKind::UrCorpus => "ur_corpus",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Self::all()
            .into_iter()
            .find(|k| k.name() == name)
            .ok_or_else(|| {
                Error::config(
                    "[experiment].name",
                    format!(
                        "unknown experiment {name:?}; known: {}",
                        Self::all().map(|k| k.name()).join(", ")
                    ),
                )
            })
    }

    /// Keys of the `[experiment]` section consumed by this experiment.
    pub fn experiment_keys(&self) -> &'static [&'static str] {
        match self {
            ExperimentKind::FreePacket => &["sigma0", "x0", "p0"],
            ExperimentKind::Harmonic => &["omega"],
            ExperimentKind::HybridStatic => &["sigma0"],
            ExperimentKind::EnsembleConsistency => &["sigma0", "x0", "p0"],
            ExperimentKind::ClassicalLimitScan => &["hbar_scan", "sigma0"],
            ExperimentKind::RegraduationCheck => &["kappa", "sigma0"],
            ExperimentKind::DriftUrScan => &["sigma_list", "curvature"],
            ExperimentKind::UrCorpus => &["states", "corpus_seed"],
        }
    }

    fn is_sampled(&self) -> bool {
        matches!(
            self,
            ExperimentKind::HybridStatic
                | ExperimentKind::EnsembleConsistency
                | ExperimentKind::ClassicalLimitScan
        )
    }

    fn is_timed(&self) -> bool {
        !matches!(
            self,
            ExperimentKind::DriftUrScan | ExperimentKind::UrCorpus
        )
    }

    /// Keys of the `[run]` section consumed by this experiment.
    pub fn run_keys(&self) -> Vec<&'static str> {
        let mut keys = vec!["seed"];
        if self.is_timed() {
            keys.extend(["dt", "t_final", "output_stride"]);
        }
        if self.is_sampled() {
            keys.push("walkers");
        }
        keys
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    experiment: RawExperiment,
    grid: Option<RawGrid>,
    physics: Option<RawPhysics>,
    run: Option<RawRun>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExperiment {
    name: String,
    sigma0: Option<f64>,
    x0: Option<f64>,
    p0: Option<f64>,
    omega: Option<f64>,
    kappa: Option<f64>,
    hbar_scan: Option<Vec<f64>>,
    sigma_list: Option<Vec<f64>>,
    curvature: Option<f64>,
    states: Option<usize>,
    corpus_seed: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    n: Option<usize>,
    x_min: Option<f64>,
    x_max: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPhysics {
    hbar: Option<f64>,
    m: Option<f64>,
    mu: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRun {
    dt: Option<f64>,
    t_final: Option<f64>,
    output_stride: Option<usize>,
    walkers: Option<usize>,
    seed: Option<u64>,
}

/// Fully resolved and validated experiment configuration.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub grid: Grid1D,
    pub params: PhysicalParams,
    pub dt: f64,
    pub t_final: f64,
    pub output_stride: usize,
    pub walkers: usize,
    pub seed: u64,
    pub sigma0: f64,
    pub x0: f64,
    pub p0: f64,
    pub omega: f64,
    pub kappa: f64,
    pub hbar_scan: Vec<f64>,
    pub sigma_list: Vec<f64>,
    pub curvature: f64,
    pub corpus_states: usize,
    pub corpus_seed: u64,
}

struct Defaults {
    n: usize,
    x_min: f64,
    x_max: f64,
    /// `None` means "equal to the mass".
    mu: Option<f64>,
    dt: f64,
    t_final: f64,
}

fn defaults_for(kind: ExperimentKind) -> Defaults {
    let mut d = Defaults {
        n: 1024,
        x_min: -20.0,
        x_max: 20.0,
        mu: None,
        dt: 1e-3,
        t_final: 2.0,
    };
    match kind {
        ExperimentKind::Harmonic => {
            // Smaller step keeps the stationary-density check at 1e-8.
            d.dt = 5e-4;
            d.t_final = 1.0;
        }
        ExperimentKind::HybridStatic => d.mu = Some(0.0),
        ExperimentKind::ClassicalLimitScan => d.t_final = 0.5,
        ExperimentKind::RegraduationCheck => {
            d.mu = Some(0.25);
            d.dt = 2e-4;
            d.t_final = 1.0;
        }
        ExperimentKind::DriftUrScan => {
            d.n = 4096;
            d.x_min = -10.0;
            d.x_max = 10.0;
        }
        _ => {}
    }
    d
}

fn require_positive(value: f64, path: &str) -> Result<f64> {
    if !(value > 0.0) || !value.is_finite() {
        return Err(Error::config(path, format!("must be positive, got {value}")));
    }
    Ok(value)
}

/// Parse and validate a config text, resolving defaults.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let raw: RawConfig = toml::from_str(text)
        .map_err(|e| Error::config("config", e.to_string().trim().replace('\n', " ")))?;
    resolve(raw)
}

/// Read and parse a config file.
pub fn load_config(path: &std::path::Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text)
}

fn resolve(raw: RawConfig) -> Result<ExperimentConfig> {
    let kind = ExperimentKind::parse(&raw.experiment.name)?;
    let d = defaults_for(kind);

    // Reject experiment-section keys the named experiment ignores.
    let exp = &raw.experiment;
    let allowed = kind.experiment_keys();
    for (name, set) in [
        ("sigma0", exp.sigma0.is_some()),
        ("x0", exp.x0.is_some()),
        ("p0", exp.p0.is_some()),
        ("omega", exp.omega.is_some()),
        ("kappa", exp.kappa.is_some()),
        ("hbar_scan", exp.hbar_scan.is_some()),
        ("sigma_list", exp.sigma_list.is_some()),
        ("curvature", exp.curvature.is_some()),
        ("states", exp.states.is_some()),
        ("corpus_seed", exp.corpus_seed.is_some()),
    ] {
        if set && !allowed.contains(&name) {
            return Err(Error::config(
                format!("[experiment].{name}"),
                format!("key not used by experiment {}", kind.name()),
            ));
        }
    }

    let grid_raw = raw.grid.unwrap_or_default();
    let n = grid_raw.n.unwrap_or(d.n);
    let x_min = grid_raw.x_min.unwrap_or(d.x_min);
    let x_max = grid_raw.x_max.unwrap_or(d.x_max);
    let grid = Grid1D::new(n, x_min, x_max)
        .map_err(|e| Error::config("[grid]", e.to_string()))?;

    let phys = raw.physics.unwrap_or_default();
    let hbar = require_positive(phys.hbar.unwrap_or(1.0), "[physics].hbar")?;
    let m = require_positive(phys.m.unwrap_or(1.0), "[physics].m")?;
    let mu = phys.mu.unwrap_or_else(|| d.mu.unwrap_or(m));
    if !(mu >= 0.0) || !mu.is_finite() {
        return Err(Error::config(
            "[physics].mu",
            format!("must be >= 0, got {mu}"),
        ));
    }
    let params = PhysicalParams::new(hbar, m, mu)
        .map_err(|e| Error::config("[physics]", e.to_string()))?;

    // Per-experiment coupling constraints.
    match kind {
        ExperimentKind::FreePacket
        | ExperimentKind::Harmonic
        | ExperimentKind::EnsembleConsistency
        | ExperimentKind::ClassicalLimitScan => {
            if (mu - m).abs() > 1e-12 {
                return Err(Error::config(
                    "[physics].mu",
                    format!(
                        "experiment {} evolves the linear theory and requires mu = m ({m}), got {mu}",
                        kind.name()
                    ),
                ));
            }
        }
        ExperimentKind::HybridStatic => {
            if mu != 0.0 {
                return Err(Error::config(
                    "[physics].mu",
                    format!("hybrid_static is the mu = 0 theory, got {mu}"),
                ));
            }
        }
        ExperimentKind::RegraduationCheck => {
            if !(mu > 0.0) {
                return Err(Error::config(
                    "[physics].mu",
                    "regraduation requires mu > 0".to_string(),
                ));
            }
        }
        _ => {}
    }

    let run = raw.run.unwrap_or_default();
    if run.walkers.is_some() && !kind.run_keys().contains(&"walkers") {
        return Err(Error::config(
            "[run].walkers",
            format!("key not used by experiment {}", kind.name()),
        ));
    }
    if !kind.is_timed() {
        for (name, set) in [
            ("dt", run.dt.is_some()),
            ("t_final", run.t_final.is_some()),
            ("output_stride", run.output_stride.is_some()),
        ] {
            if set {
                return Err(Error::config(
                    format!("[run].{name}"),
                    format!("key not used by experiment {}", kind.name()),
                ));
            }
        }
    }

    let dt = require_positive(run.dt.unwrap_or(d.dt), "[run].dt")?;
    let t_final = require_positive(run.t_final.unwrap_or(d.t_final), "[run].t_final")?;
    let output_stride = run.output_stride.unwrap_or(100);
    if output_stride == 0 {
        return Err(Error::config("[run].output_stride", "must be >= 1"));
    }
    let walkers = run.walkers.unwrap_or(100_000);
    if walkers == 0 {
        return Err(Error::config("[run].walkers", "must be >= 1"));
    }
    let seed = run.seed.unwrap_or(12345);

    let sigma0 = require_positive(exp.sigma0.unwrap_or(1.0), "[experiment].sigma0")?;
    let x0 = exp.x0.unwrap_or(0.0);
    let p0 = exp.p0.unwrap_or(0.0);
    let omega = require_positive(exp.omega.unwrap_or(1.0), "[experiment].omega")?;
    let kappa = require_positive(exp.kappa.unwrap_or(2.0), "[experiment].kappa")?;
    let hbar_scan = exp
        .hbar_scan
        .clone()
        .unwrap_or_else(|| vec![1.0, 0.1, 0.01]);
    if hbar_scan.len() < 2 || hbar_scan.iter().any(|&h| !(h > 0.0) || !h.is_finite()) {
        return Err(Error::config(
            "[experiment].hbar_scan",
            "needs at least two positive entries",
        ));
    }
    let sigma_list = exp
        .sigma_list
        .clone()
        .unwrap_or_else(|| vec![1.0, 0.5, 0.2, 0.1, 0.05]);
    if sigma_list.is_empty() {
        return Err(Error::config("[experiment].sigma_list", "must be nonempty"));
    }
    if kind == ExperimentKind::DriftUrScan {
        let limit = 4.0 * grid.dx();
        for &s in &sigma_list {
            if s < limit {
                return Err(Error::config(
                    "[experiment].sigma_list",
                    format!("sigma = {s} is below the grid resolution limit 4 dx = {limit}"),
                ));
            }
        }
    }
    let curvature = exp.curvature.unwrap_or(1.0);
    if !curvature.is_finite() {
        return Err(Error::config("[experiment].curvature", "must be finite"));
    }
    let corpus_states = exp.states.unwrap_or(50);
    if corpus_states == 0 {
        return Err(Error::config("[experiment].states", "must be >= 1"));
    }
    let corpus_seed = exp.corpus_seed.unwrap_or(7);

    Ok(ExperimentConfig {
        kind,
        grid,
        params,
        dt,
        t_final,
        output_stride,
        walkers,
        seed,
        sigma0,
        x0,
        p0,
        omega,
        kappa,
        hbar_scan,
        sigma_list,
        curvature,
        corpus_states,
        corpus_seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_stanza_resolves_defaults() {
        let cfg = parse_config("[experiment]\nname = \"free_packet\"\n").unwrap();
        assert_eq!(cfg.kind, ExperimentKind::FreePacket);
        assert_eq!(cfg.grid.n(), 1024);
        assert_eq!(cfg.grid.x_min(), -20.0);
        assert_eq!(cfg.dt, 1e-3);
        assert_eq!(cfg.walkers, 100_000);
        assert_eq!(cfg.params.mu, cfg.params.m);
    }

    #[test]
    fn unknown_experiment_and_keys_are_rejected() {
        let err = parse_config("[experiment]\nname = \"warp_drive\"\n").unwrap_err();
        assert!(err.to_string().contains("unknown experiment"));

        let err = parse_config("[experiment]\nname = \"free_packet\"\nbogus = 1\n").unwrap_err();
        assert!(err.to_string().contains("bogus"), "{err}");

        let err =
            parse_config("[experiment]\nname = \"free_packet\"\nomega = 2.0\n").unwrap_err();
        assert!(err.to_string().contains("omega"), "{err}");
    }

    #[test]
    fn duplicate_key_is_rejected() {
        let text = "[experiment]\nname = \"free_packet\"\nsigma0 = 1.0\nsigma0 = 2.0\n";
        assert!(parse_config(text).is_err());
    }

    #[test]
    fn range_errors_name_the_key() {
        let text = "[experiment]\nname = \"hybrid_static\"\n[physics]\nmu = -1.0\n";
        let err = parse_config(text).unwrap_err();
        assert!(err.to_string().contains("mu"), "{err}");

        let text = "[experiment]\nname = \"free_packet\"\n[run]\ndt = 0.0\n";
        let err = parse_config(text).unwrap_err();
        assert!(err.to_string().contains("dt"), "{err}");

        let text = "[experiment]\nname = \"free_packet\"\n[grid]\nn = 100\n";
        let err = parse_config(text).unwrap_err();
        assert!(err.to_string().contains("power of two"), "{err}");
    }

    #[test]
    fn mu_coupling_rules() {
        let text = "[experiment]\nname = \"free_packet\"\n[physics]\nmu = 0.5\n";
        assert!(parse_config(text).is_err());

        let text = "[experiment]\nname = \"hybrid_static\"\n[physics]\nmu = 0.0\n";
        assert!(parse_config(text).is_ok());

        let text = "[experiment]\nname = \"regraduation_check\"\n";
        let cfg = parse_config(text).unwrap();
        assert_eq!(cfg.params.mu, 0.25);
    }

    #[test]
    fn scan_experiments_reject_time_keys() {
        let text = "[experiment]\nname = \"ur_corpus\"\n[run]\ndt = 1e-3\n";
        let err = parse_config(text).unwrap_err();
        assert!(err.to_string().contains("dt"), "{err}");

        let text = "[experiment]\nname = \"drift_ur_scan\"\n[run]\nwalkers = 10\n";
        let err = parse_config(text).unwrap_err();
        assert!(err.to_string().contains("walkers"), "{err}");
    }

    #[test]
    fn narrow_sigma_rejected_at_parse_time() {
        let text =
            "[experiment]\nname = \"drift_ur_scan\"\nsigma_list = [0.001]\n";
        let err = parse_config(text).unwrap_err();
        assert!(err.to_string().contains("sigma"), "{err}");
    }
}
