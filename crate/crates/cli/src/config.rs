//! Flat key-value experiment configuration with `[problem]`, `[optimizer]`,
//! `[adapt]` and `[run]` sections. Unknown keys are rejected with their line
//! number; command-line flags override file values.

use std::fmt;
use std::path::{Path, PathBuf};

use polyadapt::types::{AdaptConfig, Cadence, MetricHyper, MetricKind, NoiseMode};

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

type Result<T> = std::result::Result<T, ConfigError>;

#[derive(Debug, Clone, PartialEq)]
pub enum ProblemKind {
    Quadratic,
    Rosenbrock,
    LogReg,
}

/// Problem section: which objective to build and its parameters.
#[derive(Debug, Clone)]
pub struct ProblemConfig {
    pub kind: ProblemKind,
    /// Quadratic: dimension.
    pub dim: usize,
    /// Quadratic: condition number of the log-spaced spectrum.
    pub cond: f64,
    /// Starting point; defaults depend on the problem.
    pub theta0: Option<Vec<f64>>,
    /// LogReg: synthetic dataset size.
    pub examples: usize,
    /// LogReg: feature count.
    pub features: usize,
    /// LogReg: class separation of the synthetic clusters.
    pub separation: f64,
    pub batch_size: usize,
    pub l2: f64,
    /// LogReg: CSV dataset path overriding the synthetic generator.
    pub data: Option<PathBuf>,
    /// Additive Gaussian value-noise variance (0 disables the wrapper).
    pub value_noise: f64,
}

impl Default for ProblemConfig {
    fn default() -> Self {
        Self {
            kind: ProblemKind::Quadratic,
            dim: 10,
            cond: 100.0,
            theta0: None,
            examples: 2000,
            features: 20,
            separation: 8.0,
            batch_size: 100,
            l2: 1e-4,
            data: None,
            value_noise: 0.0,
        }
    }
}

/// Run section: loop length, seeding, output, stopping.
#[derive(Debug, Clone)]
pub struct RunSection {
    pub max_iters: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
    pub loss_tol: Option<f64>,
    pub grad_tol: Option<f64>,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            max_iters: 500,
            seed: 0,
            out: None,
            out_dir: None,
            loss_tol: None,
            grad_tol: None,
        }
    }
}

/// Full experiment configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub problem: ProblemConfig,
    pub optimizer: MetricKind,
    pub hyper: MetricHyper,
    pub adapt: AdaptConfig,
    /// When false, the ratio thresholds are pushed to ±∞ (fixed η baseline).
    pub adapt_enabled: bool,
    pub run: RunSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            problem: ProblemConfig::default(),
            optimizer: MetricKind::Sgd,
            hyper: MetricHyper::default(),
            adapt: AdaptConfig::default(),
            adapt_enabled: true,
            run: RunSection::default(),
        }
    }
}

/// Command-line overrides applied after the file is parsed.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub eta0: Option<f64>,
    pub optimizer: Option<String>,
    pub f_star: Option<f64>,
    pub noise: Option<String>,
    pub iters: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

pub fn parse_noise_mode(s: &str) -> Result<NoiseMode> {
    let lower = s.to_ascii_lowercase();
    if lower == "zero" {
        return Ok(NoiseMode::Zero);
    }
    if lower == "clt" {
        return Ok(NoiseMode::Clt);
    }
    if let Some(v) = lower.strip_prefix("fixed:") {
        let r: f64 = v
            .parse()
            .map_err(|_| ConfigError(format!("invalid fixed noise value '{v}'")))?;
        return Ok(NoiseMode::Fixed(r));
    }
    if let Some(v) = lower.strip_prefix("prop:") {
        let c: f64 = v
            .parse()
            .map_err(|_| ConfigError(format!("invalid proportional noise value '{v}'")))?;
        return Ok(NoiseMode::ProportionalToLoss(c));
    }
    Err(ConfigError(format!(
        "unknown noise mode '{s}' (expected zero, fixed:R, clt or prop:C)"
    )))
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str, line: usize) -> Result<T> {
    value.trim().parse().map_err(|_| {
        ConfigError(format!(
            "line {line}: key '{key}' has invalid value '{value}'"
        ))
    })
}

fn parse_vec(key: &str, value: &str, line: usize) -> Result<Vec<f64>> {
    value
        .split(',')
        .map(|p| {
            p.trim().parse().map_err(|_| {
                ConfigError(format!(
                    "line {line}: key '{key}' has non-numeric component '{}'",
                    p.trim()
                ))
            })
        })
        .collect()
}

fn parse_bool(key: &str, value: &str, line: usize) -> Result<bool> {
    match value.trim() {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        other => Err(ConfigError(format!(
            "line {line}: key '{key}' expects true/false, got '{other}'"
        ))),
    }
}

/// Parses the configuration file format. Lines are `key = value`, sections
/// are `[name]`, `#` starts a comment.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    let mut section = String::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('[') && line.ends_with(']') {
            section = line[1..line.len() - 1].trim().to_ascii_lowercase();
            match section.as_str() {
                "problem" | "optimizer" | "adapt" | "run" => continue,
                other => {
                    return Err(ConfigError(format!(
                        "line {line_no}: unknown section '[{other}]'"
                    )))
                }
            }
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            ConfigError(format!(
                "line {line_no}: expected 'key = value', got '{line}'"
            ))
        })?;
        let key = key.trim().to_ascii_lowercase();
        let value = value.trim();
        match (section.as_str(), key.as_str()) {
            ("problem", "kind") => {
                cfg.problem.kind = match value.to_ascii_lowercase().as_str() {
                    "quadratic" => ProblemKind::Quadratic,
                    "rosenbrock" => ProblemKind::Rosenbrock,
                    "logreg" => ProblemKind::LogReg,
                    other => {
                        return Err(ConfigError(format!(
                            "line {line_no}: unknown problem kind '{other}'"
                        )))
                    }
                }
            }
            ("problem", "dim") => cfg.problem.dim = parse_num("dim", value, line_no)?,
            ("problem", "cond") => cfg.problem.cond = parse_num("cond", value, line_no)?,
            ("problem", "theta0") => cfg.problem.theta0 = Some(parse_vec("theta0", value, line_no)?),
            ("problem", "examples") => cfg.problem.examples = parse_num("examples", value, line_no)?,
            ("problem", "features") => cfg.problem.features = parse_num("features", value, line_no)?,
            ("problem", "separation") => {
                cfg.problem.separation = parse_num("separation", value, line_no)?
            }
            ("problem", "batch_size") => {
                cfg.problem.batch_size = parse_num("batch_size", value, line_no)?
            }
            ("problem", "l2") => cfg.problem.l2 = parse_num("l2", value, line_no)?,
            ("problem", "data") => cfg.problem.data = Some(PathBuf::from(value)),
            ("problem", "value_noise") => {
                cfg.problem.value_noise = parse_num("value_noise", value, line_no)?
            }
            ("optimizer", "kind") => {
                cfg.optimizer = MetricKind::parse(value)
                    .map_err(|e| ConfigError(format!("line {line_no}: {e}")))?
            }
            ("optimizer", "beta") => cfg.hyper.beta = parse_num("beta", value, line_no)?,
            ("optimizer", "beta1") => cfg.hyper.beta1 = parse_num("beta1", value, line_no)?,
            ("optimizer", "beta2") => cfg.hyper.beta2 = parse_num("beta2", value, line_no)?,
            ("optimizer", "alpha") => cfg.hyper.alpha = parse_num("alpha", value, line_no)?,
            ("optimizer", "epsilon") => cfg.hyper.epsilon = parse_num("epsilon", value, line_no)?,
            ("adapt", "eta0") => cfg.adapt.eta0 = parse_num("eta0", value, line_no)?,
            ("adapt", "alpha_up") => cfg.adapt.alpha_up = parse_num("alpha_up", value, line_no)?,
            ("adapt", "alpha_down") => {
                cfg.adapt.alpha_down = parse_num("alpha_down", value, line_no)?
            }
            ("adapt", "ratio_hi") => cfg.adapt.ratio_hi = parse_num("ratio_hi", value, line_no)?,
            ("adapt", "ratio_lo") => cfg.adapt.ratio_lo = parse_num("ratio_lo", value, line_no)?,
            ("adapt", "fstar") => cfg.adapt.f_star = Some(parse_num("fstar", value, line_no)?),
            ("adapt", "noise") => {
                cfg.adapt.noise_mode = parse_noise_mode(value)
                    .map_err(|e| ConfigError(format!("line {line_no}: {}", e.0)))?
            }
            ("adapt", "cadence") => {
                cfg.adapt.cadence = match value.to_ascii_lowercase().as_str() {
                    "every-step" => Cadence::EveryStep,
                    "pow2-epochs" => Cadence::PowerOfTwoEpochs,
                    other => {
                        return Err(ConfigError(format!(
                            "line {line_no}: unknown cadence '{other}' (expected every-step or pow2-epochs)"
                        )))
                    }
                }
            }
            ("adapt", "phi_eps") => cfg.adapt.phi_eps = parse_num("phi_eps", value, line_no)?,
            ("adapt", "eta_min") => cfg.adapt.eta_min = parse_num("eta_min", value, line_no)?,
            ("adapt", "eta_max") => cfg.adapt.eta_max = parse_num("eta_max", value, line_no)?,
            ("adapt", "enabled") => cfg.adapt_enabled = parse_bool("enabled", value, line_no)?,
            ("run", "max_iters") => cfg.run.max_iters = parse_num("max_iters", value, line_no)?,
            ("run", "seed") => cfg.run.seed = parse_num("seed", value, line_no)?,
            ("run", "out") => cfg.run.out = Some(PathBuf::from(value)),
            ("run", "out_dir") => cfg.run.out_dir = Some(PathBuf::from(value)),
            ("run", "loss_tol") => cfg.run.loss_tol = Some(parse_num("loss_tol", value, line_no)?),
            ("run", "grad_tol") => cfg.run.grad_tol = Some(parse_num("grad_tol", value, line_no)?),
            ("", k) => {
                return Err(ConfigError(format!(
                    "line {line_no}: key '{k}' appears before any section"
                )))
            }
            (s, k) => {
                return Err(ConfigError(format!(
                    "line {line_no}: unknown key '{k}' in section '[{s}]'"
                )))
            }
        }
    }
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}

impl RunConfig {
    pub fn apply_overrides(&mut self, ov: &Overrides) -> Result<()> {
        if let Some(eta0) = ov.eta0 {
            self.adapt.eta0 = eta0;
        }
        if let Some(name) = &ov.optimizer {
            self.optimizer = MetricKind::parse(name).map_err(|e| ConfigError(e.to_string()))?;
        }
        if let Some(f_star) = ov.f_star {
            self.adapt.f_star = Some(f_star);
        }
        if let Some(noise) = &ov.noise {
            self.adapt.noise_mode = parse_noise_mode(noise)?;
        }
        if let Some(iters) = ov.iters {
            self.run.max_iters = iters;
        }
        if let Some(seed) = ov.seed {
            self.run.seed = seed;
        }
        if let Some(out) = &ov.out {
            self.run.out = Some(out.clone());
        }
        Ok(())
    }

    /// The adaptation config actually handed to the optimizer; disabling
    /// adaptation maps to inert ratio thresholds.
    pub fn effective_adapt(&self) -> AdaptConfig {
        let mut adapt = self.adapt.clone();
        if !self.adapt_enabled {
            adapt.ratio_hi = f64::INFINITY;
            adapt.ratio_lo = f64::NEG_INFINITY;
        }
        adapt
    }
}
