//! Flat `key = value` run configuration with dotted section prefixes.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::analysis::{predicted_exponent, validate_sigma1, Quantity};
use crate::lpbesov::{validate_hybrid_p, Grid};
use crate::model::ModelParams;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Nonlinear,
    LinearOracle,
    Crosscheck,
    InequalityBench,
}

impl ExperimentKind {
    fn parse(s: &str) -> Result<Self> {
        match s {
            "nonlinear" => Ok(Self::Nonlinear),
            "linear_oracle" => Ok(Self::LinearOracle),
            "crosscheck" => Ok(Self::Crosscheck),
            "inequality_bench" => Ok(Self::InequalityBench),
            other => Err(Error::Config(format!(
                "experiment.kind: unknown kind '{other}' (expected nonlinear, linear_oracle, crosscheck or inequality_bench)"
            ))),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Nonlinear => "nonlinear",
            Self::LinearOracle => "linear_oracle",
            Self::Crosscheck => "crosscheck",
            Self::InequalityBench => "inequality_bench",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialKind {
    LocalizedBump,
    BandLimited,
    BesovProfile,
}

impl InitialKind {
    fn parse(s: &str) -> Result<Self> {
        match s {
            "localized_bump" => Ok(Self::LocalizedBump),
            "band_limited" => Ok(Self::BandLimited),
            "besov_profile" => Ok(Self::BesovProfile),
            other => Err(Error::Config(format!(
                "experiment.initial: unknown kind '{other}' (expected localized_bump, band_limited or besov_profile)"
            ))),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::LocalizedBump => "localized_bump",
            Self::BandLimited => "band_limited",
            Self::BesovProfile => "besov_profile",
        }
    }
}

/// Fully resolved run configuration. Every field has a documented default
/// except the grid block and the final time, which must be given.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    // model block
    pub c0: f64,
    pub k0: f64,
    pub a0: f64,
    pub alpha: f64,
    pub m_inf: f64,
    pub n_inf: f64,
    // grid block
    pub dim: usize,
    pub n: usize,
    pub box_len: f64,
    // solver block
    pub dt: f64,
    pub t_end: f64,
    pub dealias: bool,
    pub output_every: usize,
    pub cfl: f64,
    // experiment block
    pub kind: ExperimentKind,
    pub p: f64,
    pub sigma: f64,
    pub sigma1: f64,
    pub amplitude: f64,
    pub seed: u64,
    pub initial: InitialKind,
    pub j0: i32,
    pub corpus: usize,
    pub fit_tol: f64,
    // output block
    pub out_dir: PathBuf,
    pub plot: bool,
}

impl RunConfig {
    pub fn model_params(&self) -> Result<ModelParams<f64>> {
        ModelParams::new(
            self.c0, self.k0, self.a0, self.alpha, self.m_inf, self.n_inf,
        )
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.dim, self.n, self.box_len)
    }

    /// Box-artifact time bound: the relaxation time of the slow heat-like
    /// mode at the smallest resolvable wavenumber, `alpha L^2 / (4 pi^2
    /// kappa2^2)`.
    pub fn t_box(&self) -> Result<f64> {
        let params = self.model_params()?;
        let k2 = params.kappa2;
        Ok(self.alpha * self.box_len * self.box_len
            / (4.0 * std::f64::consts::PI.powi(2) * k2 * k2))
    }

    /// Emits the flat resolved-config text; parsing it back reproduces the
    /// identical configuration.
    pub fn resolved_text(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            s.push_str(k);
            s.push_str(" = ");
            s.push_str(&v);
            s.push('\n');
        };
        kv("model.c0", format!("{}", self.c0));
        kv("model.k0", format!("{}", self.k0));
        kv("model.a0", format!("{}", self.a0));
        kv("model.alpha", format!("{}", self.alpha));
        kv("model.m_inf", format!("{}", self.m_inf));
        kv("model.n_inf", format!("{}", self.n_inf));
        kv("grid.dim", format!("{}", self.dim));
        kv("grid.n", format!("{}", self.n));
        kv("grid.box_len", format!("{}", self.box_len));
        kv("solver.dt", format!("{}", self.dt));
        kv("solver.t_end", format!("{}", self.t_end));
        kv("solver.dealias", format!("{}", self.dealias));
        kv("solver.output_every", format!("{}", self.output_every));
        kv("solver.cfl", format!("{}", self.cfl));
        kv("experiment.kind", self.kind.as_str().into());
        kv("experiment.p", format!("{}", self.p));
        kv("experiment.sigma", format!("{}", self.sigma));
        kv("experiment.sigma1", format!("{}", self.sigma1));
        kv("experiment.amplitude", format!("{}", self.amplitude));
        kv("experiment.seed", format!("{}", self.seed));
        kv("experiment.initial", self.initial.as_str().into());
        kv("experiment.j0", format!("{}", self.j0));
        kv("experiment.corpus", format!("{}", self.corpus));
        kv("experiment.fit_tol", format!("{}", self.fit_tol));
        kv("output.dir", self.out_dir.display().to_string());
        kv("output.plot", format!("{}", self.plot));
        s
    }
}

struct Raw {
    map: BTreeMap<String, String>,
    consumed: std::collections::BTreeSet<String>,
}

impl Raw {
    fn get(&mut self, key: &str) -> Option<&str> {
        let v = self.map.get(key).map(String::as_str);
        if v.is_some() {
            self.consumed.insert(key.to_string());
        }
        v
    }

    fn parse_with<T>(
        &mut self,
        key: &str,
        default: Option<T>,
        f: impl Fn(&str) -> Option<T>,
    ) -> Result<T> {
        match self.get(key) {
            Some(raw) => {
                f(raw).ok_or_else(|| Error::Config(format!("{key}: cannot parse value '{raw}'")))
            }
            None => default.ok_or_else(|| Error::Config(format!("{key}: required key missing"))),
        }
    }

    fn f64(&mut self, key: &str, default: Option<f64>) -> Result<f64> {
        self.parse_with(key, default, |s| s.parse().ok())
    }

    fn usize(&mut self, key: &str, default: Option<usize>) -> Result<usize> {
        self.parse_with(key, default, |s| s.parse().ok())
    }

    fn u64(&mut self, key: &str, default: Option<u64>) -> Result<u64> {
        self.parse_with(key, default, |s| s.parse().ok())
    }

    fn i32(&mut self, key: &str, default: Option<i32>) -> Result<i32> {
        self.parse_with(key, default, |s| s.parse().ok())
    }

    fn bool(&mut self, key: &str, default: Option<bool>) -> Result<bool> {
        self.parse_with(key, default, |s| match s {
            "true" => Some(true),
            "false" => Some(false),
            _ => None,
        })
    }

    fn string(&mut self, key: &str, default: Option<&str>) -> Result<String> {
        self.parse_with(key, default.map(str::to_string), |s| Some(s.to_string()))
    }
}

/// Parses and fully validates a configuration file.
pub fn parse_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config_text(&text)
}

pub fn parse_config_text(text: &str) -> Result<RunConfig> {
    let mut map = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Error::Config(format!(
                "line {}: expected 'key = value', got '{line}'",
                lineno + 1
            )));
        };
        let key = k.trim().to_string();
        if map.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(Error::Config(format!("{key}: duplicate key")));
        }
    }
    let mut raw = Raw {
        map,
        consumed: Default::default(),
    };

    let cfg = RunConfig {
        c0: raw.f64("model.c0", Some(0.5))?,
        k0: raw.f64("model.k0", Some(1.0))?,
        a0: raw.f64("model.a0", Some(0.25))?,
        alpha: raw.f64("model.alpha", Some(1.0))?,
        m_inf: raw.f64("model.m_inf", Some(2.0))?,
        n_inf: raw.f64("model.n_inf", Some(1.0))?,
        dim: raw.usize("grid.dim", None)?,
        n: raw.usize("grid.n", None)?,
        box_len: raw.f64("grid.box_len", None)?,
        dt: raw.f64("solver.dt", Some(0.0))?,
        t_end: raw.f64("solver.t_end", None)?,
        dealias: raw.bool("solver.dealias", Some(true))?,
        output_every: raw.usize("solver.output_every", Some(10))?,
        cfl: raw.f64("solver.cfl", Some(0.4))?,
        kind: ExperimentKind::parse(&raw.string("experiment.kind", Some("nonlinear"))?)?,
        p: raw.f64("experiment.p", Some(2.0))?,
        sigma: raw.f64("experiment.sigma", Some(0.0))?,
        sigma1: raw.f64("experiment.sigma1", Some(1.0))?,
        amplitude: raw.f64("experiment.amplitude", Some(1e-3))?,
        seed: raw.u64("experiment.seed", Some(0))?,
        initial: InitialKind::parse(&raw.string("experiment.initial", Some("band_limited"))?)?,
        j0: raw.i32("experiment.j0", Some(0))?,
        corpus: raw.usize("experiment.corpus", Some(32))?,
        fit_tol: raw.f64("experiment.fit_tol", Some(0.2))?,
        out_dir: PathBuf::from(raw.string("output.dir", Some("out"))?),
        plot: raw.bool("output.plot", Some(false))?,
    };

    if let Some(unknown) = raw.map.keys().find(|k| !raw.consumed.contains(*k)) {
        return Err(Error::Config(format!(
            "{unknown}: unknown configuration key"
        )));
    }
    validate(&cfg)?;
    Ok(cfg)
}

fn validate(cfg: &RunConfig) -> Result<()> {
    cfg.model_params()?;
    cfg.grid()?;
    if !(cfg.t_end > 0.0) {
        return Err(Error::Config(format!(
            "solver.t_end = {} must be positive",
            cfg.t_end
        )));
    }
    if cfg.output_every == 0 {
        return Err(Error::Config(
            "solver.output_every must be at least 1".into(),
        ));
    }
    if !(cfg.cfl > 0.0) {
        return Err(Error::Config(format!(
            "solver.cfl = {} must be positive",
            cfg.cfl
        )));
    }
    if cfg.amplitude < 0.0 {
        return Err(Error::Config(format!(
            "experiment.amplitude = {} must be nonnegative",
            cfg.amplitude
        )));
    }
    if !(cfg.fit_tol > 0.0) {
        return Err(Error::Config(format!(
            "experiment.fit_tol = {} must be positive",
            cfg.fit_tol
        )));
    }
    validate_hybrid_p(cfg.p, cfg.dim).map_err(|e| Error::Config(format!("experiment.p: {e}")))?;
    match cfg.kind {
        ExperimentKind::Nonlinear | ExperimentKind::LinearOracle => {
            // decay experiments need an admissible (sigma, sigma1) pair
            validate_sigma1(cfg.sigma1, cfg.dim, cfg.p)
                .map_err(|e| Error::Config(format!("experiment.sigma1: {e}")))?;
            predicted_exponent(cfg.sigma, cfg.sigma1, cfg.dim, cfg.p, Quantity::Pressure)
                .map_err(|e| Error::Config(format!("experiment.sigma: {e}")))?;
            predicted_exponent(cfg.sigma, cfg.sigma1, cfg.dim, cfg.p, Quantity::Velocity)
                .map_err(|e| Error::Config(format!("experiment.sigma: {e}")))?;
        }
        ExperimentKind::Crosscheck | ExperimentKind::InequalityBench => {}
    }
    if cfg.kind == ExperimentKind::Nonlinear {
        // keep the run inside the box-artifact window: the slow mode at the
        // smallest wavenumber must not have relaxed by t_end
        let t_box = cfg.t_box()?;
        if cfg.t_end > 0.2 * t_box {
            return Err(Error::Config(format!(
                "solver.t_end = {} exceeds 0.2 * t_box = {} (t_box = alpha L^2 / (4 pi^2 kappa2^2) = {t_box}); enlarge the box or shorten the run",
                cfg.t_end,
                0.2 * t_box
            )));
        }
    }
    Ok(())
}
