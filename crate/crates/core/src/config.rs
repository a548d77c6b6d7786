//! Run configuration and its flat `key = value` text form.
//!
//! Keys match the command-line flags with dashes replaced by underscores:
//! `algorithm`, `k`, `alpha`, `psi`, `sweeps`, `rejuvenation`, `particles`,
//! `ess_threshold`, `lambda0`, `tau_strategy`, `implicit_absence`,
//! `pair_mode`, `decorrelate`, `seed`, `fold`, `stream`, `masks`, `out`.
//! `alpha` is one value (symmetric) or `k` comma-separated values; `psi` is
//! `psi_one,psi_zero`.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::drift::TauStrategy;
use crate::error::{Error, Result};
use crate::gibbs::PairMode;
use crate::model::Hyperparams;

pub const DEFAULT_SWEEPS: usize = 100;
pub const DEFAULT_PARTICLES: usize = 24;
pub const DEFAULT_ESS_THRESHOLD: f64 = 8.0;
pub const DEFAULT_LAMBDA_THRESHOLD: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    BatchGibbs,
    IncrementalGibbs,
    ParticleFilter,
    TdIncrementalGibbs,
    TdParticleFilter,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::BatchGibbs,
        Algorithm::IncrementalGibbs,
        Algorithm::ParticleFilter,
        Algorithm::TdIncrementalGibbs,
        Algorithm::TdParticleFilter,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::BatchGibbs => "batch_gibbs",
            Algorithm::IncrementalGibbs => "incremental_gibbs",
            Algorithm::ParticleFilter => "particle_filter",
            Algorithm::TdIncrementalGibbs => "td_incremental_gibbs",
            Algorithm::TdParticleFilter => "td_particle_filter",
        }
    }

    pub fn uses_particles(self) -> bool {
        matches!(self, Algorithm::ParticleFilter | Algorithm::TdParticleFilter)
    }

    pub fn is_time_dependent(self) -> bool {
        matches!(self, Algorithm::TdIncrementalGibbs | Algorithm::TdParticleFilter)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown algorithm {s:?}")))
    }
}

/// Everything needed to reproduce one run.
///
/// `particles` and `ess_threshold` may only be set for particle algorithms,
/// `lambda_threshold` and `tau_strategy` only for time-dependent ones; unset
/// values fall back to the defaults above.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub algorithm: Algorithm,
    pub hyper: Hyperparams,
    /// Warm-start sweeps, and sweeps per refit for batch Gibbs.
    pub sweeps: usize,
    pub rejuvenation: usize,
    pub particles: Option<usize>,
    pub ess_threshold: Option<f64>,
    pub lambda_threshold: Option<f64>,
    pub tau_strategy: Option<TauStrategy>,
    pub implicit_absence: bool,
    pub pair_mode: PairMode,
    pub decorrelate: bool,
    pub seed: u64,
    pub fold: usize,
    pub stream: Option<PathBuf>,
    pub masks: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            algorithm: Algorithm::IncrementalGibbs,
            hyper: Hyperparams::default(),
            sweeps: DEFAULT_SWEEPS,
            rejuvenation: 0,
            particles: None,
            ess_threshold: None,
            lambda_threshold: None,
            tau_strategy: None,
            implicit_absence: true,
            pair_mode: PairMode::Alternating,
            decorrelate: false,
            seed: 0,
            fold: 0,
            stream: None,
            masks: None,
            out: None,
        }
    }
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse {value:?}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim() {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        other => Err(Error::Config(format!("{key}: expected a boolean, got {other:?}"))),
    }
}

fn parse_list(key: &str, value: &str) -> Result<Vec<f64>> {
    value
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| parse_num(key, s))
        .collect()
}

fn join(values: &[f64]) -> String {
    values.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
}

impl TauStrategy {
    pub fn as_str(self) -> &'static str {
        match self {
            TauStrategy::InverseRate => "inverse_rate",
            TauStrategy::Deficit => "deficit",
        }
    }
}

impl FromStr for TauStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "inverse_rate" => Ok(TauStrategy::InverseRate),
            "deficit" => Ok(TauStrategy::Deficit),
            _ => Err(Error::Config(format!("unknown tau strategy {s:?}"))),
        }
    }
}

impl PairMode {
    pub fn as_str(self) -> &'static str {
        match self {
            PairMode::Alternating => "alternating",
            PairMode::Joint => "joint",
        }
    }
}

impl FromStr for PairMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "alternating" => Ok(PairMode::Alternating),
            "joint" => Ok(PairMode::Joint),
            _ => Err(Error::Config(format!("unknown pair mode {s:?}"))),
        }
    }
}

/// Parses `key = value` lines; `#` starts a comment. Later keys win.
pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key = value", i + 1)))?;
        out.insert(key.trim().to_owned(), value.trim().to_owned());
    }
    Ok(out)
}

impl RunConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_pairs(&parse_key_values(&text)?)
    }

    /// Defaults overridden by `pairs`, then validated.
    pub fn from_pairs(pairs: &BTreeMap<String, String>) -> Result<Self> {
        let mut c = Self::default();
        c.apply(pairs)?;
        Ok(c)
    }

    /// Applies overrides and re-validates.
    pub fn apply(&mut self, pairs: &BTreeMap<String, String>) -> Result<()> {
        let get = |key: &str| pairs.get(key).map(String::as_str);
        let k = match get("k") {
            Some(v) => parse_num("k", v)?,
            None => self.hyper.k(),
        };
        let alpha = match get("alpha") {
            Some(v) => {
                let values = parse_list("alpha", v)?;
                match values[..] {
                    [a] => vec![a; k],
                    _ => values,
                }
            }
            None if k == self.hyper.k() => self.hyper.alpha().to_vec(),
            None => vec![self.hyper.alpha()[0]; k],
        };
        let (psi_one, psi_zero) = match get("psi") {
            Some(v) => match parse_list("psi", v)?[..] {
                [a, b] => (a, b),
                _ => return Err(Error::Config("psi: expected two values".into())),
            },
            None => (self.hyper.psi_one(), self.hyper.psi_zero()),
        };
        if alpha.len() != k {
            return Err(Error::Config(format!("alpha has {} entries but k = {k}", alpha.len())));
        }
        self.hyper = Hyperparams::new(alpha, psi_one, psi_zero)
            .map_err(|e| Error::Config(e.to_string()))?;

        for (key, value) in pairs {
            let v = value.as_str();
            match key.as_str() {
                "k" | "alpha" | "psi" => {}
                "algorithm" => self.algorithm = v.parse()?,
                "sweeps" => self.sweeps = parse_num(key, v)?,
                "rejuvenation" => self.rejuvenation = parse_num(key, v)?,
                "particles" => self.particles = Some(parse_num(key, v)?),
                "ess_threshold" => self.ess_threshold = Some(parse_num(key, v)?),
                "lambda0" => self.lambda_threshold = Some(parse_num(key, v)?),
                "tau_strategy" => self.tau_strategy = Some(v.parse()?),
                "implicit_absence" => self.implicit_absence = parse_bool(key, v)?,
                "pair_mode" => self.pair_mode = v.parse()?,
                "decorrelate" => self.decorrelate = parse_bool(key, v)?,
                "seed" => self.seed = parse_num(key, v)?,
                "fold" => self.fold = parse_num(key, v)?,
                "stream" => self.stream = Some(PathBuf::from(v)),
                "masks" => self.masks = Some(PathBuf::from(v)),
                "out" => self.out = Some(PathBuf::from(v)),
                other => return Err(Error::Config(format!("unknown key {other:?}"))),
            }
        }
        self.validate()
    }

    pub fn with_override(&self, key: &str, value: &str) -> Result<Self> {
        let mut c = self.clone();
        c.apply(&BTreeMap::from([(key.to_owned(), value.to_owned())]))?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.sweeps == 0 {
            return fail("sweeps must be >= 1".into());
        }
        if !self.algorithm.uses_particles() {
            if self.particles.is_some() {
                return fail(format!("particles is only valid for particle algorithms, not {}", self.algorithm));
            }
            if self.ess_threshold.is_some() {
                return fail(format!("ess_threshold is only valid for particle algorithms, not {}", self.algorithm));
            }
            if self.decorrelate {
                return fail(format!("decorrelate is only valid for particle algorithms, not {}", self.algorithm));
            }
        }
        if !self.algorithm.is_time_dependent() {
            if self.lambda_threshold.is_some() {
                return fail(format!("lambda0 is only valid for time-dependent algorithms, not {}", self.algorithm));
            }
            if self.tau_strategy.is_some() {
                return fail(format!("tau_strategy is only valid for time-dependent algorithms, not {}", self.algorithm));
            }
        }
        if self.algorithm == Algorithm::BatchGibbs && self.rejuvenation > 0 {
            return fail("rejuvenation does not apply to batch_gibbs".into());
        }
        if self.particles == Some(0) {
            return fail("particles must be >= 1".into());
        }
        if let Some(e) = self.ess_threshold {
            if !(e > 0.0 && e.is_finite()) {
                return fail(format!("ess_threshold must be positive, got {e}"));
            }
        }
        if let Some(l) = self.lambda_threshold {
            if !(l >= 0.0 && l.is_finite()) {
                return fail(format!("lambda0 must be non-negative, got {l}"));
            }
        }
        Ok(())
    }

    pub fn particle_count(&self) -> usize {
        self.particles.unwrap_or(DEFAULT_PARTICLES)
    }

    pub fn ess(&self) -> f64 {
        self.ess_threshold.unwrap_or(DEFAULT_ESS_THRESHOLD)
    }

    pub fn lambda0(&self) -> f64 {
        self.lambda_threshold.unwrap_or(DEFAULT_LAMBDA_THRESHOLD)
    }

    pub fn tau(&self) -> TauStrategy {
        self.tau_strategy.unwrap_or_default()
    }

    /// The `|R| = 0` incremental Gibbs run that shares this run's model,
    /// masks and seeds.
    pub fn baseline(&self) -> Self {
        Self {
            algorithm: Algorithm::IncrementalGibbs,
            rejuvenation: 0,
            particles: None,
            ess_threshold: None,
            lambda_threshold: None,
            tau_strategy: None,
            decorrelate: false,
            ..self.clone()
        }
    }

    /// Resolved settings, with defaults made explicit, as key-value pairs.
    pub fn to_pairs(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        let mut put = |k: &str, v: String| {
            m.insert(k.to_owned(), v);
        };
        put("algorithm", self.algorithm.as_str().into());
        put("k", self.hyper.k().to_string());
        put("alpha", join(self.hyper.alpha()));
        put("psi", join(&[self.hyper.psi_one(), self.hyper.psi_zero()]));
        put("sweeps", self.sweeps.to_string());
        put("rejuvenation", self.rejuvenation.to_string());
        if self.algorithm.uses_particles() {
            put("particles", self.particle_count().to_string());
            put("ess_threshold", self.ess().to_string());
            put("decorrelate", self.decorrelate.to_string());
        }
        if self.algorithm.is_time_dependent() {
            put("lambda0", self.lambda0().to_string());
            put("tau_strategy", self.tau().as_str().into());
        }
        put("implicit_absence", self.implicit_absence.to_string());
        put("pair_mode", self.pair_mode.as_str().into());
        put("seed", self.seed.to_string());
        put("fold", self.fold.to_string());
        for (k, v) in [("stream", &self.stream), ("masks", &self.masks), ("out", &self.out)] {
            if let Some(p) = v {
                put(k, p.display().to_string());
            }
        }
        m
    }

    pub fn to_text(&self) -> String {
        self.to_pairs()
            .into_iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pairs(items: &[(&str, &str)]) -> BTreeMap<String, String> {
        items.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn defaults() {
        let c = RunConfig::default();
        assert_eq!(c.sweeps, 100);
        assert_eq!(c.particle_count(), 24);
        assert_eq!(c.ess(), 8.0);
        assert!(c.implicit_absence);
        c.validate().unwrap();
    }

    #[test]
    fn text_round_trip() {
        let text = "algorithm = td_particle_filter # comment\nk = 3\nalpha = 0.2\npsi = 2, 3\n\
                    particles = 4\nlambda0 = 1.2\ntau_strategy = deficit\nseed = 9\n";
        let c = RunConfig::from_pairs(&parse_key_values(text).unwrap()).unwrap();
        assert_eq!(c.hyper.alpha(), &[0.2, 0.2, 0.2]);
        assert_eq!(c.hyper.psi_zero(), 3.0);
        assert_eq!(c.tau(), TauStrategy::Deficit);
        let again = RunConfig::from_pairs(&parse_key_values(&c.to_text()).unwrap()).unwrap();
        assert_eq!(again.to_pairs(), c.to_pairs());
    }

    #[test]
    fn mismatched_fields_rejected() {
        for bad in [
            pairs(&[("algorithm", "incremental_gibbs"), ("particles", "4")]),
            pairs(&[("algorithm", "particle_filter"), ("lambda0", "1.1")]),
            pairs(&[("algorithm", "batch_gibbs"), ("ess_threshold", "4")]),
            pairs(&[("k", "3"), ("alpha", "0.1,0.2")]),
            pairs(&[("psi", "1")]),
            pairs(&[("bogus", "1")]),
            pairs(&[("sweeps", "0")]),
            pairs(&[("algorithm", "nope")]),
        ] {
            assert!(matches!(RunConfig::from_pairs(&bad), Err(Error::Config(_))), "{bad:?}");
        }
    }

    #[test]
    fn baseline_strips_algorithm_fields() {
        let c = RunConfig::from_pairs(&pairs(&[
            ("algorithm", "td_particle_filter"),
            ("rejuvenation", "10"),
            ("particles", "8"),
            ("seed", "4"),
        ]))
        .unwrap();
        let b = c.baseline();
        b.validate().unwrap();
        assert_eq!(b.algorithm, Algorithm::IncrementalGibbs);
        assert_eq!(b.rejuvenation, 0);
        assert_eq!(b.seed, 4);
    }
}
