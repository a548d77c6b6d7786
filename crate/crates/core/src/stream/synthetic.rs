//! Synthetic dynamic networks drawn from the MMSB generative process with a
//! block matrix that switches on a schedule.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, Gamma};

use super::{NamedRecord, ObservationStream};
use crate::error::{Error, Result};
use crate::model::Assignment;
use crate::rng::{self, Lane};

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticConfig {
    pub nodes: usize,
    pub groups: usize,
    pub intervals: u32,
    /// Symmetric Dirichlet parameter for node memberships.
    pub alpha_gen: f64,
    /// `(start_interval, B)` pairs; `B` applies from its start until the next.
    pub schedule: Vec<(u32, Vec<Vec<f64>>)>,
    pub records_per_interval: usize,
    pub seed: u64,
}

/// `diag` on the diagonal, `off` elsewhere.
pub fn assortative(groups: usize, diag: f64, off: f64) -> Vec<Vec<f64>> {
    (0..groups)
        .map(|g| (0..groups).map(|h| if g == h { diag } else { off }).collect())
        .collect()
}

/// Cyclic column shift: `B'[g][h] = B[g][(h + shift) mod K]`.
pub fn shift_columns(b: &[Vec<f64>], shift: usize) -> Vec<Vec<f64>> {
    let k = b.len();
    b.iter()
        .map(|row| (0..k).map(|h| row[(h + shift) % k]).collect())
        .collect()
}

impl SyntheticConfig {
    /// Static assortative network.
    pub fn assortative(
        nodes: usize,
        groups: usize,
        intervals: u32,
        records_per_interval: usize,
        seed: u64,
    ) -> Self {
        Self {
            nodes,
            groups,
            intervals,
            alpha_gen: 0.1,
            schedule: vec![(1, assortative(groups, 0.9, 0.05))],
            records_per_interval,
            seed,
        }
    }

    /// Adds a switch to the column-shifted block matrix at interval `start`.
    pub fn with_shift_at(mut self, start: u32) -> Self {
        let base = self.schedule[0].1.clone();
        self.schedule.push((start, shift_columns(&base, 1)));
        self
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.nodes < 2 || self.groups < 1 || self.intervals < 1 {
            return fail("need nodes >= 2, groups >= 1, intervals >= 1".into());
        }
        if !(self.alpha_gen > 0.0) {
            return fail(format!("alpha_gen must be positive, got {}", self.alpha_gen));
        }
        if self.schedule.first().map(|s| s.0) != Some(1) {
            return fail("schedule must start at interval 1".into());
        }
        if self.schedule.windows(2).any(|w| w[1].0 <= w[0].0) {
            return fail("schedule start intervals must strictly increase".into());
        }
        for (start, b) in &self.schedule {
            let square = b.len() == self.groups && b.iter().all(|r| r.len() == self.groups);
            if !square {
                return fail(format!("block matrix at {start} is not {0}x{0}", self.groups));
            }
            if b.iter().flatten().any(|x| !(*x > 0.0 && *x < 1.0)) {
                return fail(format!("block matrix at {start} has entries outside (0, 1)"));
            }
        }
        Ok(())
    }

    /// Block matrix in force during interval `t`.
    pub fn block_at(&self, t: u32) -> &[Vec<f64>] {
        let i = self.schedule.partition_point(|(start, _)| *start <= t);
        &self.schedule[i.saturating_sub(1)].1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub config: SyntheticConfig,
    /// Membership vector per node name.
    pub memberships: Vec<(String, Vec<f64>)>,
}

/// Output of [`generate_synthetic`]. `latent[i]` is the group pair that
/// generated `stream.records()[i]`.
#[derive(Debug, Clone)]
pub struct SyntheticData {
    pub stream: ObservationStream,
    pub truth: GroundTruth,
    pub latent: Vec<Assignment>,
}

fn node_name(i: usize) -> String {
    format!("v{i}")
}

fn draw_membership<R: Rng + ?Sized>(groups: usize, gamma: &Gamma<f64>, rng: &mut R) -> Vec<f64> {
    let mut pi: Vec<f64> = (0..groups).map(|_| gamma.sample(rng)).collect();
    let total: f64 = pi.iter().sum();
    if total > 0.0 && total.is_finite() {
        pi.iter_mut().for_each(|x| *x /= total);
    } else {
        // every gamma draw underflowed
        pi.iter_mut().for_each(|x| *x = 0.0);
        pi[rng.random_range(0..groups)] = 1.0;
    }
    pi
}

fn draw_group<R: Rng + ?Sized>(pi: &[f64], rng: &mut R) -> usize {
    let mut u: f64 = rng.random();
    for (g, p) in pi.iter().enumerate() {
        if u < *p {
            return g;
        }
        u -= p;
    }
    pi.iter().rposition(|p| *p > 0.0).unwrap_or(0)
}

/// Each interval observes `records_per_interval` distinct dyads drawn
/// uniformly; a dyad may be observed again in later intervals.
pub fn generate_synthetic(config: &SyntheticConfig) -> Result<SyntheticData> {
    config.validate()?;
    let n = config.nodes;
    let universe = n * (n - 1);
    if config.records_per_interval > universe {
        return Err(Error::Config(format!(
            "{} records per interval requested but only {universe} dyads exist",
            config.records_per_interval
        )));
    }
    let mut rng = rng::stream(config.seed, Lane::Generate, 0, 0);
    let gamma = Gamma::new(config.alpha_gen, 1.0)
        .map_err(|e| Error::Config(format!("alpha_gen: {e}")))?;
    let memberships: Vec<Vec<f64>> = (0..n)
        .map(|_| draw_membership(config.groups, &gamma, &mut rng))
        .collect();

    let total = config.records_per_interval * config.intervals as usize;
    let mut named = Vec::with_capacity(total);
    let mut latent = Vec::with_capacity(total);
    for t in 1..=config.intervals {
        let block = config.block_at(t);
        for flat in index::sample(&mut rng, universe, config.records_per_interval) {
            let p = flat / (n - 1);
            let r = flat % (n - 1);
            let q = if r < p { r } else { r + 1 };
            let a = Assignment::new(
                draw_group(&memberships[p], &mut rng),
                draw_group(&memberships[q], &mut rng),
            );
            named.push(NamedRecord {
                interval: t,
                from: node_name(p),
                to: node_name(q),
                present: rng.random_bool(block[a.send_group][a.recv_group]),
            });
            latent.push(a);
        }
    }
    let stream = ObservationStream::from_named(named)?;
    let truth = GroundTruth {
        config: config.clone(),
        memberships: memberships
            .into_iter()
            .enumerate()
            .map(|(i, pi)| (node_name(i), pi))
            .collect(),
    };
    Ok(SyntheticData {
        stream,
        truth,
        latent,
    })
}

fn join(xs: &[f64]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

/// Key-value sidecar: `key = value` lines, `#` comments.
pub fn write_ground_truth(truth: &GroundTruth) -> String {
    let c = &truth.config;
    let mut out = String::from("# synthetic MMSB ground truth\nversion = 1\n");
    let _ = writeln!(out, "nodes = {}", c.nodes);
    let _ = writeln!(out, "groups = {}", c.groups);
    let _ = writeln!(out, "intervals = {}", c.intervals);
    let _ = writeln!(out, "alpha_gen = {}", c.alpha_gen);
    let _ = writeln!(out, "records_per_interval = {}", c.records_per_interval);
    let _ = writeln!(out, "seed = {}", c.seed);
    for (start, b) in &c.schedule {
        let flat: Vec<f64> = b.iter().flatten().copied().collect();
        let _ = writeln!(out, "block {start} = {}", join(&flat));
    }
    for (name, pi) in &truth.memberships {
        let _ = writeln!(out, "membership {name} = {}", join(pi));
    }
    out
}

pub fn save_ground_truth(truth: &GroundTruth, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, write_ground_truth(truth)).map_err(|e| Error::io(path, e))
}

pub fn load_ground_truth(path: impl AsRef<Path>) -> Result<GroundTruth> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_ground_truth(&text, path)
}

pub fn parse_ground_truth(text: &str, origin: &Path) -> Result<GroundTruth> {
    let mut config = SyntheticConfig {
        nodes: 0,
        groups: 0,
        intervals: 0,
        alpha_gen: 0.0,
        schedule: Vec::new(),
        records_per_interval: 0,
        seed: 0,
    };
    let mut memberships = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fail = |msg: &str| Error::Parse {
            path: origin.to_path_buf(),
            line: i + 1,
            msg: msg.to_owned(),
        };
        let (key, value) = line.split_once('=').ok_or_else(|| fail("expected key = value"))?;
        let key: Vec<&str> = key.split_whitespace().collect();
        let value = value.trim();
        let floats = || -> Result<Vec<f64>> {
            value
                .split_whitespace()
                .map(|x| x.parse().map_err(|_| fail("bad number")))
                .collect()
        };
        let int = || value.parse::<u64>().map_err(|_| fail("bad integer"));
        match key[..] {
            ["version"] => {
                if value != "1" {
                    return Err(fail("unsupported version"));
                }
            }
            ["nodes"] => config.nodes = int()? as usize,
            ["groups"] => config.groups = int()? as usize,
            ["intervals"] => config.intervals = int()? as u32,
            ["alpha_gen"] => config.alpha_gen = value.parse().map_err(|_| fail("bad number"))?,
            ["records_per_interval"] => config.records_per_interval = int()? as usize,
            ["seed"] => config.seed = int()?,
            ["block", start] => {
                let start: u32 = start.parse().map_err(|_| fail("bad block start"))?;
                let flat = floats()?;
                if config.groups == 0 || flat.len() != config.groups * config.groups {
                    return Err(fail("block matrix size does not match groups"));
                }
                let rows = flat.chunks(config.groups).map(<[f64]>::to_vec).collect();
                config.schedule.push((start, rows));
            }
            ["membership", name] => memberships.push((name.to_owned(), floats()?)),
            _ => return Err(fail("unknown key")),
        }
    }
    Ok(GroundTruth {
        config,
        memberships,
    })
}
