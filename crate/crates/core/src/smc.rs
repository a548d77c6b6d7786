//! Particle filter over collapsed MMSB states.
//!
//! Each particle is a full [`ModelState`]. Per observation, every particle's
//! weight is multiplied by its predictive probability of the observed value
//! (computed before the dyad is assigned), the record is assigned within the
//! particle, weights are normalized, and the population is resampled
//! multinomially when the effective sample size falls to the threshold.
//! Rejuvenation then runs independently in every particle.
//!
//! Particle loops run in parallel. Every random draw comes from a stream
//! keyed by `(seed, particle slot, step)`, so results do not depend on
//! scheduling.

use rand::Rng;
use rayon::prelude::*;

use crate::drift::{self, DriftTracker};
use crate::error::{Error, Result};
use crate::gibbs::{self, OnlineOptions};
use crate::model::{Dyad, DyadRecord, ModelState};
use crate::rng::{self, Lane};

#[derive(Debug, Clone)]
pub struct Particle {
    pub state: ModelState,
    pub weight: f64,
    pub drift: Option<DriftTracker>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmcConfig {
    pub particles: usize,
    pub ess_threshold: f64,
    pub seed: u64,
    /// Run one full sweep per particle, each with its own stream, before
    /// filtering starts.
    pub decorrelate: bool,
}

impl Default for SmcConfig {
    fn default() -> Self {
        Self {
            particles: 24,
            ess_threshold: 8.0,
            seed: 0,
            decorrelate: false,
        }
    }
}

/// Per-step diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport {
    pub ess: f64,
    pub resampled: bool,
}

#[derive(Debug, Clone)]
pub struct ParticleSet {
    particles: Vec<Particle>,
    ess_threshold: f64,
    opts: OnlineOptions,
    seed: u64,
    resamples: usize,
}

/// `1 / Σ ω²` of normalized weights.
pub fn ess(weights: &[f64]) -> Result<f64> {
    let sq: f64 = weights.iter().map(|w| w * w).sum();
    if weights.is_empty() || sq == 0.0 || !sq.is_finite() {
        return Err(Error::InvalidWeights("zero or non-finite weight vector".into()));
    }
    Ok(1.0 / sq)
}

/// `P` multinomial draws of particle indices from normalized weights.
pub fn multinomial_indices<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> Vec<usize> {
    let mut cumulative = Vec::with_capacity(weights.len());
    let mut acc = 0.0;
    for w in weights {
        acc += w;
        cumulative.push(acc);
    }
    let last_positive = weights.iter().rposition(|w| *w > 0.0).unwrap_or(0);
    (0..weights.len())
        .map(|_| {
            let u = rng.random::<f64>() * acc;
            cumulative
                .partition_point(|c| *c <= u)
                .min(last_positive)
        })
        .collect()
}

/// Normalizes log weights in place into linear weights.
fn normalize_log(log_weights: &[f64]) -> Result<Vec<f64>> {
    let max = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Err(Error::InvalidWeights("all particle weights vanished".into()));
    }
    let mut w: Vec<f64> = log_weights.iter().map(|lw| (lw - max).exp()).collect();
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
    Ok(w)
}

impl ParticleSet {
    /// `P` copies of `warm`, each weighted `1/P`.
    pub fn init(
        warm: &ModelState,
        config: &SmcConfig,
        opts: OnlineOptions,
        drift: Option<DriftTracker>,
    ) -> Result<Self> {
        if config.particles == 0 {
            return Err(Error::Config("particle count must be >= 1".into()));
        }
        if !(config.ess_threshold > 0.0) {
            return Err(Error::Config("ESS threshold must be positive".into()));
        }
        let w = 1.0 / config.particles as f64;
        let mut particles: Vec<Particle> = (0..config.particles)
            .map(|_| Particle {
                state: warm.clone(),
                weight: w,
                drift: drift.clone(),
            })
            .collect();
        if config.decorrelate {
            let (seed, mode) = (config.seed, opts.pair_mode);
            particles
                .par_iter_mut()
                .enumerate()
                .try_for_each(|(k, part)| {
                    let mut rng = rng::stream(seed, Lane::Decorrelate, k as u64, 0);
                    gibbs::sweep(&mut part.state, mode, &mut rng)
                })?;
        }
        Ok(Self {
            particles,
            ess_threshold: config.ess_threshold,
            opts,
            seed: config.seed,
            resamples: 0,
        })
    }

    /// Assembles a set from explicit particles; weights are normalized.
    pub fn from_particles(
        mut particles: Vec<Particle>,
        ess_threshold: f64,
        opts: OnlineOptions,
        seed: u64,
    ) -> Result<Self> {
        let total: f64 = particles.iter().map(|p| p.weight).sum();
        if particles.is_empty() || !(total > 0.0 && total.is_finite()) {
            return Err(Error::InvalidWeights("need at least one positive weight".into()));
        }
        particles.iter_mut().for_each(|p| p.weight /= total);
        Ok(Self {
            particles,
            ess_threshold,
            opts,
            seed,
            resamples: 0,
        })
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn particles(&self) -> &[Particle] {
        &self.particles
    }

    pub fn weights(&self) -> Vec<f64> {
        self.particles.iter().map(|p| p.weight).collect()
    }

    pub fn ess(&self) -> f64 {
        ess(&self.weights()).expect("weights stay normalized")
    }

    pub fn ess_threshold(&self) -> f64 {
        self.ess_threshold
    }

    pub fn resample_count(&self) -> usize {
        self.resamples
    }

    /// Multinomial resampling; duplicates are independent deep copies and all
    /// weights are reset to `1/P`.
    pub fn resample<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let picks = multinomial_indices(&self.weights(), rng);
        let w = 1.0 / self.particles.len() as f64;
        self.particles = picks
            .into_iter()
            .map(|i| {
                let mut p = self.particles[i].clone();
                p.weight = w;
                p
            })
            .collect();
        self.resamples += 1;
    }

    /// Processes one streamed record. `step` is the record's position in the
    /// stream and keys every random stream used here.
    pub fn step(&mut self, record: DyadRecord, step: u64) -> Result<StepReport> {
        let (seed, opts) = (self.seed, &self.opts);
        let log_factors: Vec<f64> = self
            .particles
            .par_iter_mut()
            .enumerate()
            .map(|(k, part)| {
                let lp = part.state.predictive_of(record.dyad, record.present).ln();
                if let Some(tracker) = part.drift.as_mut() {
                    tracker.record_loglik(record.interval, lp)?;
                }
                let mut rng = rng::stream(seed, Lane::Assign, k as u64, step);
                gibbs::assign_observation(&mut part.state, record, opts, &mut rng)?;
                Ok(lp)
            })
            .collect::<Result<_>>()?;

        let log_weights: Vec<f64> = self
            .particles
            .iter()
            .zip(&log_factors)
            .map(|(p, lf)| p.weight.ln() + lf)
            .collect();
        for (p, w) in self.particles.iter_mut().zip(normalize_log(&log_weights)?) {
            p.weight = w;
        }

        let ess = self.ess();
        let resampled = ess <= self.ess_threshold;
        if resampled {
            let mut rng = rng::stream(seed, Lane::Resample, 0, step);
            self.resample(&mut rng);
        }

        let (policy, mode) = (self.opts.rejuvenation, self.opts.pair_mode);
        if policy.size > 0 {
            self.particles
                .par_iter_mut()
                .enumerate()
                .try_for_each(|(k, part)| {
                    let mut rng = rng::stream(seed, Lane::Rejuvenate, k as u64, step);
                    gibbs::rejuvenate_random(&mut part.state, policy, mode, &mut rng)
                })?;
        }
        Ok(StepReport { ess, resampled })
    }

    /// Closes interval `t` in every particle's drift tracker and applies
    /// history deletion where that particle's change test fires. Returns the
    /// number of particles that discarded history.
    pub fn end_interval(&mut self, t: u32) -> Result<usize> {
        let seed = self.seed;
        let discarded: Vec<bool> = self
            .particles
            .par_iter_mut()
            .enumerate()
            .map(|(k, part)| match part.drift.as_mut() {
                Some(tracker) => close_interval(&mut part.state, tracker, t, seed, k as u64),
                None => Ok(false),
            })
            .collect::<Result<_>>()?;
        Ok(discarded.into_iter().filter(|d| *d).count())
    }

    /// Weighted mixture of the particles' predictive probabilities.
    pub fn predictive(&self, dyad: Dyad) -> f64 {
        self.particles
            .iter()
            .map(|p| p.weight * p.state.predictive_prob(dyad))
            .sum()
    }
}

/// Shared by the particle filter and the single-state sampler.
pub(crate) fn close_interval(
    state: &mut ModelState,
    tracker: &mut DriftTracker,
    t: u32,
    seed: u64,
    slot: u64,
) -> Result<bool> {
    tracker.advance_to(t)?;
    if !tracker.should_discard(t) {
        return Ok(false);
    }
    let mut rng = rng::stream(seed, Lane::Drift, slot, t as u64);
    match tracker.sample_cut(t, &mut rng) {
        Some(tau) => {
            drift::discard_history(state, tracker, tau, &mut rng)?;
            Ok(true)
        }
        None => Ok(false),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Assignment, Hyperparams};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn state(psi_one: f64, psi_zero: f64) -> ModelState {
        ModelState::new(Hyperparams::symmetric(2, 0.1, psi_one, psi_zero).unwrap())
    }

    fn particle(s: ModelState, weight: f64) -> Particle {
        Particle {
            state: s,
            weight,
            drift: None,
        }
    }

    #[test]
    fn ess_examples() {
        assert!((ess(&[1.0 / 24.0; 24]).unwrap() - 24.0).abs() < 1e-9);
        assert_eq!(ess(&[1.0, 0.0, 0.0, 0.0]).unwrap(), 1.0);
        assert!((ess(&[0.5, 0.3, 0.2]).unwrap() - 1.0 / 0.38).abs() < 1e-12);
        assert!(ess(&[0.0, 0.0]).is_err());
        assert!(ess(&[]).is_err());
    }

    #[test]
    fn init_weights_and_copies() {
        let warm = state(1.0, 1.0);
        let set = ParticleSet::init(&warm, &SmcConfig::default(), OnlineOptions::default(), None).unwrap();
        assert_eq!(set.len(), 24);
        assert!(set.weights().iter().all(|w| (*w - 1.0 / 24.0).abs() < 1e-15));
        assert!(set.particles().iter().all(|p| p.state == warm));
        let zero = SmcConfig {
            particles: 0,
            ..SmcConfig::default()
        };
        assert!(ParticleSet::init(&warm, &zero, OnlineOptions::default(), None).is_err());
    }

    #[test]
    fn decorrelation_diversifies_particles() {
        let mut warm = state(1.0, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for p in 0..6u32 {
            for q in 0..6u32 {
                if p != q {
                    let r = DyadRecord::new(Dyad::of(p, q), (p + q) % 2 == 0, 1);
                    warm.instantiate(r, Assignment::uniform(2, &mut rng)).unwrap();
                }
            }
        }
        let config = SmcConfig {
            particles: 4,
            decorrelate: true,
            seed: 5,
            ..SmcConfig::default()
        };
        let set = ParticleSet::init(&warm, &config, OnlineOptions::default(), None).unwrap();
        assert!(set.particles().iter().any(|p| p.state != warm));
        assert_ne!(set.particles()[0].state, set.particles()[1].state);
    }

    #[test]
    fn degenerate_resampling() {
        let mut set = ParticleSet::from_particles(
            vec![particle(state(1.0, 1.0), 1.0), particle(state(2.0, 1.0), 0.0), particle(state(3.0, 1.0), 0.0)],
            1.0,
            OnlineOptions::default(),
            0,
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        set.resample(&mut rng);
        assert!(set.particles().iter().all(|p| p.state == state(1.0, 1.0)));
        assert!(set.weights().iter().all(|w| (*w - 1.0 / 3.0).abs() < 1e-15));
    }

    #[test]
    fn uniform_resampling_expected_once_each() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let trials = 20_000;
        let mut counts = [0usize; 4];
        for _ in 0..trials {
            for i in multinomial_indices(&[0.25; 4], &mut rng) {
                counts[i] += 1;
            }
        }
        for c in counts {
            assert!((c as f64 / trials as f64 - 1.0).abs() < 0.03);
        }
    }

    #[test]
    fn weight_update_example() {
        let mut set = ParticleSet::from_particles(
            vec![particle(state(9.0, 1.0), 0.5), particle(state(1.0, 1.0), 0.5)],
            0.5,
            OnlineOptions::default(),
            7,
        )
        .unwrap();
        let report = set.step(DyadRecord::new(Dyad::of(0, 1), true, 1), 0).unwrap();
        assert!(!report.resampled);
        let w = set.weights();
        assert!((w[0] - 0.9 / 1.4).abs() < 1e-12);
        assert!((w[1] - 0.5 / 1.4).abs() < 1e-12);
    }

    #[test]
    fn single_particle_weight_stays_one() {
        let set = ParticleSet::init(
            &state(1.0, 3.0),
            &SmcConfig {
                particles: 1,
                ..SmcConfig::default()
            },
            OnlineOptions::default(),
            None,
        );
        let mut set = set.unwrap();
        for (i, p) in [(0, 1), (1, 2), (2, 0)].into_iter().enumerate() {
            set.step(DyadRecord::new(Dyad::of(p.0, p.1), i % 2 == 0, 1), i as u64)
                .unwrap();
            assert_eq!(set.weights(), vec![1.0]);
        }
    }

    #[test]
    fn identical_particles_keep_equal_weights() {
        let config = SmcConfig {
            particles: 2,
            ess_threshold: 1.5,
            ..SmcConfig::default()
        };
        let mut set = ParticleSet::init(&state(1.0, 1.0), &config, OnlineOptions::default(), None).unwrap();
        // Assignment draws diverge the particles, so weights are only equal
        // while the states are; check the first step.
        set.step(DyadRecord::new(Dyad::of(0, 1), true, 1), 0).unwrap();
        assert_eq!(set.weights(), vec![0.5, 0.5]);
        assert_eq!(set.ess(), 2.0);
        assert_eq!(set.resample_count(), 0);
    }

    #[test]
    fn mixture_predictive() {
        let set = ParticleSet::from_particles(
            vec![particle(state(1.0, 4.0), 1.0), particle(state(3.0, 2.0), 1.0)],
            1.0,
            OnlineOptions::default(),
            0,
        )
        .unwrap();
        assert!((set.predictive(Dyad::of(0, 1)) - 0.4).abs() < 1e-12);

        let set = ParticleSet::from_particles(
            vec![particle(state(4.0, 1.0), 0.75), particle(state(2.0, 3.0), 0.25)],
            1.0,
            OnlineOptions::default(),
            0,
        )
        .unwrap();
        assert!((set.predictive(Dyad::of(0, 1)) - 0.7).abs() < 1e-12);

        let same = ParticleSet::init(&state(2.0, 5.0), &SmcConfig::default(), OnlineOptions::default(), None).unwrap();
        assert!((same.predictive(Dyad::of(3, 4)) - 2.0 / 7.0).abs() < 1e-12);
    }
}
