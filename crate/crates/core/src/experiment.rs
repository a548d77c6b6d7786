//! End-to-end runs: warm start, streaming, per-interval evaluation.
//!
//! Interval 1's training records warm-start every algorithm through batch
//! Gibbs. For each later interval `t` the driver closes interval `t − 1`
//! (drift tests and history deletion), scores the test and validation
//! records of `t` against that snapshot, then streams the training records of
//! `t` into the model. Random streams are keyed by the run seed and the
//! position of each training record in the stream.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::Arc;

use indexmap::IndexMap;
use rand::RngCore;
use rayon::prelude::*;

use crate::config::{Algorithm, RunConfig};
use crate::drift::DriftTracker;
use crate::error::{Error, Result};
use crate::eval::{mean_loglik, testset_loglik, EvalReport, IntervalScore, RunMetadata};
use crate::gibbs::{self, GibbsConfig, OnlineOptions, RejuvenationPolicy};
use crate::model::{Dyad, DyadRecord, ModelState};
use crate::rng::{self, Lane};
use crate::smc::{self, ParticleSet, SmcConfig};
use crate::stream::{ObservationStream, Role, SplitMask};

/// Per-interval scores of a single run, without a baseline.
#[derive(Debug, Clone, PartialEq)]
pub struct Scores {
    pub test: Vec<IntervalScore>,
    pub validation: Vec<IntervalScore>,
    pub discards: usize,
    /// Training records skipped because they would flip an observed link to
    /// absent.
    pub rejected: usize,
}

enum Engine {
    Single {
        state: ModelState,
        tracker: Option<DriftTracker>,
    },
    Particles(ParticleSet),
    Batch {
        state: ModelState,
        seen: IndexMap<Dyad, DyadRecord>,
        config: GibbsConfig,
    },
}

struct Runner {
    engine: Engine,
    opts: OnlineOptions,
    seed: u64,
    discards: usize,
}

impl Runner {
    fn new(config: &RunConfig, warm_records: &[DyadRecord], opts: OnlineOptions) -> Result<Self> {
        let gibbs_config = GibbsConfig {
            sweeps: config.sweeps,
            hyper: config.hyper.clone(),
            seed: config.seed,
            pair_mode: config.pair_mode,
        };
        let warm = gibbs::warm_start(warm_records, &gibbs_config, &opts)?;
        let tracker = if config.algorithm.is_time_dependent() {
            Some(DriftTracker::new(1, config.lambda0(), config.tau())?)
        } else {
            None
        };
        let engine = match config.algorithm {
            Algorithm::IncrementalGibbs | Algorithm::TdIncrementalGibbs => Engine::Single {
                state: warm,
                tracker,
            },
            Algorithm::ParticleFilter | Algorithm::TdParticleFilter => {
                let smc = SmcConfig {
                    particles: config.particle_count(),
                    ess_threshold: config.ess(),
                    seed: config.seed,
                    decorrelate: config.decorrelate,
                };
                Engine::Particles(ParticleSet::init(&warm, &smc, opts.clone(), tracker)?)
            }
            Algorithm::BatchGibbs => Engine::Batch {
                state: warm,
                seen: warm_records.iter().map(|r| (r.dyad, *r)).collect(),
                config: gibbs_config,
            },
        };
        Ok(Self {
            engine,
            opts,
            seed: config.seed,
            discards: 0,
        })
    }

    fn observe(&mut self, record: DyadRecord, step: u64) -> Result<()> {
        let (opts, seed) = (&self.opts, self.seed);
        match &mut self.engine {
            Engine::Single { state, tracker } => {
                if let Some(tracker) = tracker {
                    let lp = state.predictive_of(record.dyad, record.present).ln();
                    tracker.record_loglik(record.interval, lp)?;
                }
                let mut rng = rng::stream(seed, Lane::Assign, 0, step);
                gibbs::assign_observation(state, record, opts, &mut rng)?;
                let mut rng = rng::stream(seed, Lane::Rejuvenate, 0, step);
                gibbs::rejuvenate_random(state, opts.rejuvenation, opts.pair_mode, &mut rng)?;
            }
            Engine::Particles(set) => {
                set.step(record, step)?;
            }
            Engine::Batch { seen, .. } => {
                seen.insert(record.dyad, record);
            }
        }
        Ok(())
    }

    fn end_interval(&mut self, t: u32) -> Result<()> {
        match &mut self.engine {
            Engine::Single {
                state,
                tracker: Some(tracker),
            } => {
                if smc::close_interval(state, tracker, t, self.seed, 0)? {
                    self.discards += 1;
                }
            }
            Engine::Single { tracker: None, .. } => {}
            Engine::Particles(set) => self.discards += set.end_interval(t)?,
            Engine::Batch { state, seen, config } if t > 1 => {
                let records: Vec<DyadRecord> = seen.values().copied().collect();
                let refit = GibbsConfig {
                    seed: rng::stream(self.seed, Lane::Refit, 0, u64::from(t)).next_u64(),
                    ..config.clone()
                };
                *state = gibbs::warm_start(&records, &refit, &self.opts)?;
            }
            Engine::Batch { .. } => {}
        }
        Ok(())
    }

    fn predictive(&self, dyad: Dyad) -> f64 {
        match &self.engine {
            Engine::Single { state, .. } | Engine::Batch { state, .. } => state.predictive_prob(dyad),
            Engine::Particles(set) => set.predictive(dyad),
        }
    }
}

/// Runs `config` over the stream and scores every interval from 2 on.
pub fn score_run(config: &RunConfig, stream: &ObservationStream, mask: &SplitMask) -> Result<Scores> {
    config.validate()?;
    if stream.is_empty() {
        return Err(Error::Data("observation stream is empty".into()));
    }
    let held_out: HashSet<Dyad> = mask.held_out();
    let opts = OnlineOptions {
        rejuvenation: RejuvenationPolicy::new(config.rejuvenation),
        pair_mode: config.pair_mode,
        implicit_absence: config.implicit_absence,
        held_out: Arc::new(held_out),
    };

    let split = |t: u32| {
        let mut by_role: HashMap<Role, Vec<DyadRecord>> = HashMap::new();
        for r in stream.interval(t) {
            by_role.entry(mask.role(r.dyad)).or_default().push(*r);
        }
        by_role
    };

    let mut first = split(1);
    let warm = first.remove(&Role::Train).unwrap_or_default();
    let mut last_present: HashMap<Dyad, bool> = warm.iter().map(|r| (r.dyad, r.present)).collect();
    let mut runner = Runner::new(config, &warm, opts)?;

    let mut scores = Scores {
        test: Vec::new(),
        validation: Vec::new(),
        discards: 0,
        rejected: 0,
    };
    let mut step = 0u64;
    for t in 2..=stream.horizon() {
        runner.end_interval(t - 1)?;
        let mut roles = split(t);
        let predictive = |d: Dyad| runner.predictive(d);
        let test = roles.remove(&Role::Test).unwrap_or_default();
        let validation = roles.remove(&Role::Validation).unwrap_or_default();
        scores.test.push(testset_loglik(predictive, t, &test));
        scores.validation.push(testset_loglik(predictive, t, &validation));

        for r in roles.remove(&Role::Train).unwrap_or_default() {
            if last_present.get(&r.dyad) == Some(&true) && !r.present {
                scores.rejected += 1;
                continue;
            }
            last_present.insert(r.dyad, r.present);
            runner.observe(r, step)?;
            step += 1;
        }
    }
    scores.discards = runner.discards;
    Ok(scores)
}

fn metadata(config: &RunConfig, grid: Vec<BTreeMap<String, String>>, discards: usize) -> RunMetadata {
    RunMetadata {
        algorithm: config.algorithm.as_str().into(),
        seed: config.seed,
        config: config.to_pairs(),
        grid,
        first_interval: 2,
        discards,
    }
}

/// Scores `config` and its `|R| = 0` incremental Gibbs baseline.
pub fn run_experiment(config: &RunConfig, stream: &ObservationStream, mask: &SplitMask) -> Result<EvalReport> {
    let target = score_run(config, stream, mask)?;
    let base_config = config.baseline();
    let baseline = if base_config == *config {
        target.test.clone()
    } else {
        score_run(&base_config, stream, mask)?.test
    };
    EvalReport::new(
        target.test,
        baseline,
        target.validation,
        metadata(config, Vec::new(), target.discards),
    )
}

/// Cartesian product of `key = v1,v2,...` axes, first axis varying slowest.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GridSpec {
    pub axes: Vec<(String, Vec<String>)>,
}

impl GridSpec {
    /// Parses `key=v1,v2,...`.
    pub fn parse_axis(spec: &str) -> Result<(String, Vec<String>)> {
        let (key, values) = spec
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("grid axis {spec:?} must look like key=v1,v2")))?;
        let values: Vec<String> = values
            .split(',')
            .map(|v| v.trim().to_owned())
            .filter(|v| !v.is_empty())
            .collect();
        if values.is_empty() {
            return Err(Error::Config(format!("grid axis {key:?} has no values")));
        }
        Ok((key.trim().to_owned(), values))
    }

    pub fn cells(&self) -> Vec<BTreeMap<String, String>> {
        let mut cells = vec![BTreeMap::new()];
        for (key, values) in &self.axes {
            cells = cells
                .into_iter()
                .flat_map(|cell| {
                    values.iter().map(move |v| {
                        let mut c = cell.clone();
                        c.insert(key.clone(), v.clone());
                        c
                    })
                })
                .collect();
        }
        cells
    }
}

#[derive(Debug, Clone)]
pub struct GridCell {
    pub config: RunConfig,
    /// Mean per-interval validation log-likelihood; `None` without
    /// validation records.
    pub validation: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct GridOutcome {
    pub cells: Vec<GridCell>,
    pub best_index: usize,
    pub report: EvalReport,
}

/// Runs every cell, picks the highest mean validation log-likelihood (ties
/// and missing scores resolve to the lowest index) and reports test results
/// for the winner.
pub fn run_grid(
    base: &RunConfig,
    grid: &GridSpec,
    stream: &ObservationStream,
    mask: &SplitMask,
) -> Result<GridOutcome> {
    let overrides = grid.cells();
    if grid.axes.is_empty() || overrides.is_empty() {
        return Err(Error::Config("grid is empty".into()));
    }
    if mask.count(Role::Validation) == 0 {
        return Err(Error::Data("grid search needs validation dyads in the mask".into()));
    }
    let configs: Vec<RunConfig> = overrides
        .iter()
        .map(|o| {
            let mut c = base.clone();
            c.apply(o)?;
            Ok(c)
        })
        .collect::<Result<_>>()?;
    let runs: Vec<Scores> = configs
        .par_iter()
        .map(|c| score_run(c, stream, mask))
        .collect::<Result<_>>()?;

    let cells: Vec<GridCell> = configs
        .iter()
        .zip(&runs)
        .map(|(c, s)| GridCell {
            config: c.clone(),
            validation: mean_loglik(&s.validation),
        })
        .collect();
    let mut best_index = 0;
    for (i, cell) in cells.iter().enumerate() {
        let better = match (cell.validation, cells[best_index].validation) {
            (Some(v), Some(b)) => v > b,
            (Some(_), None) => true,
            _ => false,
        };
        if better {
            best_index = i;
        }
    }

    let winner = &runs[best_index];
    let config = &configs[best_index];
    let base_config = config.baseline();
    let baseline = if base_config == *config {
        winner.test.clone()
    } else {
        score_run(&base_config, stream, mask)?.test
    };
    let report = EvalReport::new(
        winner.test.clone(),
        baseline,
        winner.validation.clone(),
        metadata(config, configs.iter().map(RunConfig::to_pairs).collect(), winner.discards),
    )?;
    Ok(GridOutcome {
        cells,
        best_index,
        report,
    })
}
