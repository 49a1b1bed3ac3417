//! Experiment configuration: a TOML document with `study`, `[parameters]` and
//! `[solver]`. Configs are normalized (defaults filled in, unused fields
//! rejected) before hashing, so equivalent command lines share a cache entry.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Study {
    Tg,
    Calogero,
    Spectrum2d,
    Convergence,
    Variational,
    Hardy,
    GaugeChecks,
}

impl Study {
    pub fn name(self) -> &'static str {
        match self {
            Study::Tg => "tg",
            Study::Calogero => "calogero",
            Study::Spectrum2d => "spectrum2d",
            Study::Convergence => "convergence",
            Study::Variational => "variational",
            Study::Hardy => "hardy",
            Study::GaugeChecks => "gauge-checks",
        }
    }
}

impl fmt::Display for Study {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Invalid configuration; the message starts with the offending field path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage<T>(msg: impl Into<String>) -> Result<T, UsageError> {
    Err(UsageError(msg.into()))
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Parameters {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub occupations: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub levels: Option<Vec<u32>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub core: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exponent: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub extrapolate: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Solver {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// `NXxNY`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<String>,
    #[serde(rename = "box", skip_serializing_if = "Option::is_none")]
    pub half_width: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chains: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub study: Study,
    #[serde(default)]
    pub parameters: Parameters,
    #[serde(default)]
    pub solver: Solver,
}

pub fn parse_grid(s: &str) -> Option<(usize, usize)> {
    let (a, b) = s.split_once('x')?;
    Some((a.trim().parse().ok()?, b.trim().parse().ok()?))
}

fn check_list<T>(path: &str, v: &[T], ok: impl Fn(&T) -> bool, what: &str) -> Result<(), UsageError> {
    if v.is_empty() {
        return usage(format!("{path}: must not be empty"));
    }
    match v.iter().position(|x| !ok(x)) {
        Some(i) => usage(format!("{path}[{i}]: {what}")),
        None => Ok(()),
    }
}

macro_rules! reject {
    ($study:expr, $($section:ident . $field:ident),+) => {
        $(
            if $section.$field.is_some() {
                let key = stringify!($field);
                let key = if key == "half_width" { "box" } else { key };
                let section = if stringify!($section) == "p" { "parameters" } else { "solver" };
                return usage(format!("{section}.{key}: not used by study {}", $study));
            }
        )+
    };
}

impl ExperimentConfig {
    pub fn new(study: Study) -> Self {
        ExperimentConfig {
            study,
            parameters: Parameters::default(),
            solver: Solver::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, UsageError> {
        toml::from_str(text).map_err(|e| UsageError(format!("config: {}", e.message())))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the normalized TOML text.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml().as_bytes()))
    }

    /// Studies whose values are sample estimates.
    pub fn is_monte_carlo(&self) -> bool {
        match self.study {
            Study::Variational | Study::GaugeChecks => true,
            Study::Hardy => self.parameters.n == Some(3),
            _ => false,
        }
    }

    /// Fill defaults, reject fields the study does not read and validate
    /// every value.
    pub fn normalize(mut self) -> Result<Self, UsageError> {
        let study = self.study;
        let p = &mut self.parameters;
        let s = &mut self.solver;
        match study {
            Study::Tg => {
                reject!(study, p.alpha, p.eps, p.occupations, p.levels, p.core, p.exponent, p.extrapolate);
                reject!(study, s.tol, s.max_iter, s.seed, s.grid, s.half_width, s.samples, s.chains);
                p.n.get_or_insert(2);
                p.count.get_or_insert(4);
            }
            Study::Calogero => {
                reject!(study, p.eps, p.count, p.occupations, p.levels, p.core, p.exponent, p.extrapolate);
                reject!(study, s.tol, s.max_iter, s.seed, s.grid, s.half_width, s.samples, s.chains);
                p.alpha.get_or_insert_with(|| vec![0.25, 0.5, 1.0, 1.5]);
                p.n.get_or_insert(2);
            }
            Study::Spectrum2d | Study::Convergence => {
                reject!(study, p.n, p.occupations, p.levels, p.core, p.exponent);
                reject!(study, s.samples, s.chains);
                if study == Study::Spectrum2d {
                    reject!(study, p.extrapolate);
                    p.alpha.get_or_insert_with(|| vec![1.0]);
                    p.eps.get_or_insert_with(|| vec![0.5]);
                    p.count.get_or_insert(4);
                } else {
                    reject!(study, p.count);
                    p.alpha.get_or_insert_with(|| vec![0.0, 0.5, 1.0]);
                    p.eps.get_or_insert_with(|| vec![0.5, 0.25, 0.125]);
                    p.extrapolate.get_or_insert(true);
                }
                s.tol.get_or_insert(1e-7);
                s.max_iter.get_or_insert(200_000);
                s.seed.get_or_insert(2024);
                s.grid.get_or_insert_with(|| format!("{}x{}", anyonlab::pair::DEFAULT_NX, anyonlab::pair::DEFAULT_NY));
                s.half_width.get_or_insert(anyonlab::pair::DEFAULT_HALF_WIDTH_X);
            }
            Study::Variational => {
                reject!(study, p.count, p.levels, p.core, p.exponent, p.extrapolate);
                reject!(study, s.tol, s.max_iter, s.grid, s.half_width);
                if let Some(n) = p.n.take() {
                    if p.occupations.is_some() {
                        return usage("parameters.n: give either n or occupations");
                    }
                    p.occupations = Some((0..n).collect());
                }
                p.occupations.get_or_insert_with(|| vec![0, 1, 2]);
                p.alpha.get_or_insert_with(|| vec![0.0, 0.5, 1.0]);
                p.eps.get_or_insert_with(|| vec![0.25]);
                s.samples.get_or_insert(1_000_000);
                s.chains.get_or_insert(16);
            }
            Study::Hardy => {
                reject!(study, p.eps, p.count, p.occupations, p.extrapolate);
                p.alpha.get_or_insert_with(|| vec![0.5, 1.0]);
                match *p.n.get_or_insert(2) {
                    2 => {
                        reject!(study, p.core, p.exponent, s.samples, s.chains);
                        if s.grid.is_some() || s.half_width.is_some() {
                            reject!(study, p.levels);
                            s.grid.get_or_insert_with(|| "80x80".into());
                            s.half_width.get_or_insert(8.0);
                        } else {
                            p.levels.get_or_insert_with(|| vec![0, 1, 2]);
                        }
                        s.tol.get_or_insert(1e-7);
                        s.max_iter.get_or_insert(200_000);
                        s.seed.get_or_insert(2024);
                    }
                    3 => {
                        reject!(study, p.levels, s.tol, s.max_iter, s.grid, s.half_width);
                        p.core.get_or_insert(1.0);
                        p.exponent.get_or_insert(1.0);
                        s.samples.get_or_insert(1_000_000);
                        s.chains.get_or_insert(16);
                    }
                    n => return usage(format!("parameters.n: hardy supports 2 or 3 particles, got {n}")),
                }
            }
            Study::GaugeChecks => {
                reject!(study, p.eps, p.n, p.occupations, p.levels, p.core, p.exponent, p.extrapolate);
                reject!(study, s.tol, s.max_iter, s.grid, s.half_width, s.samples, s.chains);
                p.alpha.get_or_insert_with(|| vec![0.3, 0.7, 1.0]);
                p.count.get_or_insert(10_000);
            }
        }
        if self.is_monte_carlo() && self.solver.seed.is_none() {
            return usage(format!("solver.seed: required for the sampled study {study}"));
        }
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<(), UsageError> {
        let p = &self.parameters;
        let s = &self.solver;
        if let Some(a) = &p.alpha {
            check_list("parameters.alpha", a, |x| x.is_finite(), "must be finite")?;
        }
        if let Some(e) = &p.eps {
            check_list("parameters.eps", e, |x| x.is_finite() && *x > 0.0, "must be positive")?;
            if self.study == Study::Convergence && e.windows(2).any(|w| w[1] >= w[0]) {
                return usage("parameters.eps: must be strictly descending");
            }
        }
        if let Some(n) = p.n {
            let max = match self.study {
                Study::Tg => anyonlab::tonks::MAX_PARTICLES,
                _ => 64,
            };
            if n == 0 || n > max {
                return usage(format!("parameters.n: must be in 1..={max}"));
            }
        }
        if let Some(c) = p.count {
            if c == 0 {
                return usage("parameters.count: must be positive");
            }
            if self.study == Study::Tg && c > anyonlab::tonks::MAX_LEVEL_COUNT {
                return usage(format!("parameters.count: at most {}", anyonlab::tonks::MAX_LEVEL_COUNT));
            }
        }
        if let Some(o) = &p.occupations {
            anyonlab::tonks::OccupationSet::new(o.clone())
                .map_err(|e| UsageError(format!("parameters.occupations: {e}")))?;
            if o.len() > anyonlab::vmc::MAX_MC_PARTICLES {
                return usage(format!("parameters.occupations: at most {} particles", anyonlab::vmc::MAX_MC_PARTICLES));
            }
        }
        if let Some(l) = &p.levels {
            check_list("parameters.levels", l, |x| *x <= 4, "must be at most 4")?;
        }
        for (name, v) in [("parameters.core", p.core), ("parameters.exponent", p.exponent)] {
            if let Some(x) = v {
                if !(x.is_finite() && x > 0.0) {
                    return usage(format!("{name}: must be positive"));
                }
            }
        }
        if let Some(t) = s.tol {
            if !(t > 0.0 && t < 1.0) {
                return usage("solver.tol: must lie in (0, 1)");
            }
        }
        if s.max_iter == Some(0) {
            return usage("solver.max_iter: must be positive");
        }
        if let Some(g) = &s.grid {
            match parse_grid(g) {
                Some((a, b)) if a >= 4 && b >= 4 && a % 2 == 0 && b % 2 == 0 => {}
                _ => return usage(format!("solver.grid: expected NXxNY with even counts ≥ 4, got {g:?}")),
            }
        }
        if let Some(b) = s.half_width {
            if !(b.is_finite() && b > 0.0) {
                return usage("solver.box: must be positive");
            }
        }
        if let Some(c) = s.chains {
            if c < 2 {
                return usage("solver.chains: at least 2 are needed for an error bar");
            }
            if s.samples.is_some_and(|n| n < 100 * c) {
                return usage("solver.samples: need at least 100 per chain");
            }
        }
        Ok(())
    }

    pub fn alphas(&self) -> &[f64] {
        self.parameters.alpha.as_deref().unwrap_or_default()
    }

    pub fn epsilons(&self) -> &[f64] {
        self.parameters.eps.as_deref().unwrap_or_default()
    }

    pub fn grid(&self) -> Option<(usize, usize)> {
        self.solver.grid.as_deref().and_then(parse_grid)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_round_trip() {
        let c = ExperimentConfig::new(Study::Convergence).normalize().unwrap();
        assert_eq!(c.epsilons(), &[0.5, 0.25, 0.125]);
        let back = ExperimentConfig::from_toml(&c.to_toml()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.hash(), c.hash());
    }

    #[test]
    fn errors_name_the_field() {
        let mut c = ExperimentConfig::new(Study::Convergence);
        c.parameters.eps = Some(vec![0.5, -1.0]);
        assert!(c.normalize().unwrap_err().0.starts_with("parameters.eps[1]"));
        let mut c = ExperimentConfig::new(Study::Tg);
        c.parameters.alpha = Some(vec![1.0]);
        assert!(c.normalize().unwrap_err().0.starts_with("parameters.alpha"));
        let c = ExperimentConfig::new(Study::Variational);
        assert!(c.normalize().unwrap_err().0.starts_with("solver.seed"));
        let mut c = ExperimentConfig::new(Study::Spectrum2d);
        c.solver.grid = Some("41x40".into());
        assert!(c.normalize().unwrap_err().0.starts_with("solver.grid"));
    }

    #[test]
    fn n_expands_to_lowest_occupations() {
        let mut c = ExperimentConfig::new(Study::Variational);
        c.parameters.n = Some(2);
        c.solver.seed = Some(1);
        let c = c.normalize().unwrap();
        assert_eq!(c.parameters.occupations, Some(vec![0, 1]));
        assert_eq!(c.parameters.n, None);
    }
}
