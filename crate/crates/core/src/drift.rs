//! Change detection on per-interval predictive likelihood and history
//! deletion.
//!
//! `L_t` is summarized per interval as the geometric-mean predictive
//! likelihood of the records processed in it, `G_t = exp(mean log p)`, so the
//! change rate `λ_t = G_t / G_{t-1}` does not scale with interval size.

use std::collections::HashSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Assignment, Dyad, DyadRecord, ModelState, NodeId, Origin};

/// Offset added to every component under [`TauStrategy::Deficit`].
pub const DEFICIT_EPSILON: f64 = 1e-6;

/// Weights used to pick the cut interval from the retained change rates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TauStrategy {
    /// `w_j ∝ 1 / λ_j`
    #[default]
    InverseRate,
    /// `w_j ∝ max(λ₀ − λ_j, 0) + ε`
    Deficit,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct IntervalLik {
    sum: f64,
    count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DriftTracker {
    first_interval: u32,
    // intervals[i] belongs to first_interval + i
    intervals: Vec<IntervalLik>,
    lambda_threshold: f64,
    strategy: TauStrategy,
    // no trigger may use an interval closed before this one
    fresh_from: u32,
}

/// Outcome of [`discard_history`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DiscardSummary {
    pub flipped: usize,
    pub deregistered: Vec<NodeId>,
    pub removed: usize,
}

impl DriftTracker {
    pub fn new(first_interval: u32, lambda_threshold: f64, strategy: TauStrategy) -> Result<Self> {
        if !(lambda_threshold >= 0.0 && lambda_threshold.is_finite()) {
            return Err(Error::Config(format!(
                "lambda threshold must be a finite non-negative number, got {lambda_threshold}"
            )));
        }
        Ok(Self {
            first_interval,
            intervals: vec![IntervalLik::default()],
            lambda_threshold,
            strategy,
            fresh_from: first_interval,
        })
    }

    pub fn first_interval(&self) -> u32 {
        self.first_interval
    }

    pub fn current_interval(&self) -> u32 {
        self.first_interval + self.intervals.len() as u32 - 1
    }

    pub fn lambda_threshold(&self) -> f64 {
        self.lambda_threshold
    }

    pub fn strategy(&self) -> TauStrategy {
        self.strategy
    }

    /// Opens intervals up to `interval` without recording anything.
    pub fn advance_to(&mut self, interval: u32) -> Result<()> {
        let current = self.current_interval();
        if interval < current {
            return Err(Error::OutOfOrder {
                got: interval,
                current,
            });
        }
        let len = (interval - self.first_interval + 1) as usize;
        self.intervals.resize(len, IntervalLik::default());
        Ok(())
    }

    pub fn record_loglik(&mut self, interval: u32, log_prob: f64) -> Result<()> {
        self.advance_to(interval)?;
        let slot = self.intervals.last_mut().expect("non-empty");
        slot.sum += log_prob;
        slot.count += 1;
        Ok(())
    }

    /// `(Σ log p, record count)` for a retained interval.
    pub fn interval_summary(&self, t: u32) -> Option<(f64, usize)> {
        let i = t.checked_sub(self.first_interval)? as usize;
        self.intervals.get(i).map(|s| (s.sum, s.count))
    }

    /// Per-record geometric-mean likelihood `G_t`; `None` for an empty interval.
    pub fn geometric_mean(&self, t: u32) -> Option<f64> {
        match self.interval_summary(t)? {
            (_, 0) => None,
            (sum, count) => Some((sum / count as f64).exp()),
        }
    }

    /// `λ_t = G_t / G_{t-1}`, or `None` (no decision) when either interval
    /// is empty or no longer retained.
    pub fn change_rate(&self, t: u32) -> Option<f64> {
        if t <= self.first_interval {
            return None;
        }
        Some(self.geometric_mean(t)? / self.geometric_mean(t - 1)?)
    }

    /// `λ_t < λ₀`. Always false while cooling down after a discard.
    pub fn should_discard(&self, t: u32) -> bool {
        if t == 0 || t - 1 < self.fresh_from {
            return false;
        }
        self.change_rate(t)
            .is_some_and(|lambda| lambda < self.lambda_threshold)
    }

    /// Candidate cut intervals `τ = j − 1` for every defined `λ_j`,
    /// `j ∈ (i, t]`, with normalized selection probabilities.
    pub fn cut_distribution(&self, t: u32) -> Vec<(u32, f64)> {
        let mut out: Vec<(u32, f64)> = (self.first_interval + 1..=t)
            .filter_map(|j| {
                let lambda = self.change_rate(j)?;
                let w = match self.strategy {
                    TauStrategy::InverseRate => 1.0 / lambda,
                    TauStrategy::Deficit => {
                        (self.lambda_threshold - lambda).max(0.0) + DEFICIT_EPSILON
                    }
                };
                Some((j - 1, w))
            })
            .collect();
        let total: f64 = out.iter().map(|(_, w)| w).sum();
        out.iter_mut().for_each(|(_, w)| *w /= total);
        out
    }

    /// Samples `τ`; intervals `[i, τ]` are then discarded. `None` when no
    /// component of `Λ_{i,t}` is defined.
    pub fn sample_cut<R: Rng + ?Sized>(&self, t: u32, rng: &mut R) -> Option<u32> {
        let dist = self.cut_distribution(t);
        if dist.is_empty() {
            return None;
        }
        let mut u: f64 = rng.random();
        for (tau, p) in &dist {
            if u < *p {
                return Some(*tau);
            }
            u -= p;
        }
        dist.last().map(|(tau, _)| *tau)
    }

    fn forget_through(&mut self, tau: u32) {
        let drop = (tau + 1 - self.first_interval) as usize;
        self.intervals.drain(..drop);
        self.first_interval = tau + 1;
        self.fresh_from = self.current_interval() + 1;
    }
}

/// Deletes history up to and including interval `tau`.
///
/// Present links observed in `[i, τ]` become absences with fresh uniform
/// assignments. Nodes that lost a present link this way and have none left
/// are then dropped together with all of their dyads.
pub fn discard_history<R: Rng + ?Sized>(
    state: &mut ModelState,
    tracker: &mut DriftTracker,
    tau: u32,
    rng: &mut R,
) -> Result<DiscardSummary> {
    let (first, current) = (tracker.first_interval(), tracker.current_interval());
    if tau < first || tau >= current {
        return Err(Error::CutOutOfRange {
            tau,
            first,
            last: current.saturating_sub(1),
        });
    }
    let k = state.k();
    let stale: Vec<(Dyad, u32)> = state
        .entries()
        .filter(|(_, e)| e.present && e.interval <= tau)
        .map(|(d, e)| (d, e.interval))
        .collect();

    let mut touched = HashSet::new();
    for &(dyad, interval) in &stale {
        state.remove(dyad)?;
        let reset = DyadRecord::new(dyad, false, interval);
        state.instantiate_with_origin(reset, Assignment::uniform(k, rng), Origin::Reset)?;
        touched.insert(dyad.initiator());
        touched.insert(dyad.receiver());
    }

    let mut summary = DiscardSummary {
        flipped: stale.len(),
        ..Default::default()
    };
    if !touched.is_empty() {
        let linked: HashSet<NodeId> = state
            .entries()
            .filter(|(_, e)| e.present)
            .flat_map(|(d, _)| [d.initiator(), d.receiver()])
            .collect();
        let mut dropped: Vec<NodeId> = touched.difference(&linked).copied().collect();
        dropped.sort_unstable();
        let dropped_set: HashSet<NodeId> = dropped.iter().copied().collect();
        let doomed: Vec<Dyad> = state
            .entries()
            .filter(|(d, _)| {
                dropped_set.contains(&d.initiator()) || dropped_set.contains(&d.receiver())
            })
            .map(|(d, _)| d)
            .collect();
        for d in &doomed {
            state.remove(*d)?;
        }
        summary.removed = doomed.len();
        summary.deregistered = dropped;
    }

    tracker.forget_through(tau);
    Ok(summary)
}
