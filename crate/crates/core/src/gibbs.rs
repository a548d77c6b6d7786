//! Batch and incremental collapsed Gibbs sampling.

use std::collections::HashSet;
use std::sync::Arc;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Assignment, Dyad, DyadRecord, Hyperparams, ModelState, Origin};
use crate::rng::{self, Lane};

/// How a single dyad's two group indicators are redrawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairMode {
    /// Draw the sender group given the receiver group, then the receiver
    /// group given the new sender group.
    #[default]
    Alternating,
    /// Draw both from the joint `K × K` conditional.
    Joint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Selection {
    #[default]
    UniformWithoutReplacement,
}

/// `|R(p,q)|`: how many already-instantiated dyads to redraw after each
/// observation. Sizes above the number of instantiated dyads are clamped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RejuvenationPolicy {
    pub size: usize,
    pub selection: Selection,
}

impl RejuvenationPolicy {
    pub fn new(size: usize) -> Self {
        Self {
            size,
            selection: Selection::UniformWithoutReplacement,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GibbsConfig {
    pub sweeps: usize,
    pub hyper: Hyperparams,
    pub seed: u64,
    pub pair_mode: PairMode,
}

/// Options shared by the online samplers.
#[derive(Debug, Clone, Default)]
pub struct OnlineOptions {
    pub rejuvenation: RejuvenationPolicy,
    pub pair_mode: PairMode,
    /// Instantiate never-streamed dyads as absences when a node first appears.
    pub implicit_absence: bool,
    /// Dyads that must never be instantiated implicitly (validation/test).
    pub held_out: Arc<HashSet<Dyad>>,
}

impl OnlineOptions {
    pub fn eligible(&self, dyad: Dyad) -> bool {
        !self.held_out.contains(&dyad)
    }
}

/// What [`assign_observation`] did with a record.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Observed {
    /// Fresh dyad; `implicit` absences were created for new endpoints.
    New { implicit: usize },
    /// Implicit/reset absence (or an observed absence turning present)
    /// replaced by the observed value.
    Reassigned,
    /// Re-observation of the same value in a later interval.
    Retagged,
}

/// Redraws the groups of the dyad stored at `index` from its exclusion
/// conditionals.
pub(crate) fn redraw_at<R: Rng + ?Sized>(
    state: &mut ModelState,
    index: usize,
    mode: PairMode,
    scratch: &mut Vec<f64>,
    rng: &mut R,
) -> Result<()> {
    let (dyad, entry) = state.entry_at(index);
    state.sub_counts(dyad, entry.assignment, entry.present)?;
    let a = match mode {
        PairMode::Alternating => {
            state.draw_alternating_detached(dyad, entry.present, entry.assignment, scratch, rng)
        }
        PairMode::Joint => state.draw_pair_detached(dyad, entry.present, scratch, rng),
    };
    state.add_counts(dyad, a, entry.present);
    state.set_assignment_at(index, a);
    Ok(())
}

/// Draws a pair of groups for a dyad that is not (or no longer) instantiated
/// and instantiates it.
fn instantiate_drawn<R: Rng + ?Sized>(
    state: &mut ModelState,
    record: DyadRecord,
    origin: Origin,
    scratch: &mut Vec<f64>,
    rng: &mut R,
) -> Result<()> {
    let a = state.draw_pair_detached(record.dyad, record.present, scratch, rng);
    state.instantiate_with_origin(record, a, origin)
}

/// Instantiates `records` with uniformly random assignments.
pub fn init_random<R: Rng + ?Sized>(
    state: &mut ModelState,
    records: &[DyadRecord],
    origin: Origin,
    rng: &mut R,
) -> Result<()> {
    let k = state.k();
    for r in records {
        state.instantiate_with_origin(*r, Assignment::uniform(k, rng), origin)?;
    }
    Ok(())
}

/// One full Gibbs sweep over every instantiated dyad, in storage order.
pub fn sweep<R: Rng + ?Sized>(state: &mut ModelState, mode: PairMode, rng: &mut R) -> Result<()> {
    let mut scratch = Vec::new();
    for i in 0..state.len() {
        redraw_at(state, i, mode, &mut scratch, rng)?;
    }
    Ok(())
}

/// Batch collapsed Gibbs: random initialization followed by `sweeps` sweeps.
pub fn run_batch(records: &[DyadRecord], config: &GibbsConfig) -> Result<ModelState> {
    warm_start(records, config, &OnlineOptions::default())
}

/// Batch run that starts the online samplers. With implicit absences on,
/// every unobserved eligible ordered pair among the records' nodes enters
/// as an absence tagged with the last record interval.
pub fn warm_start(
    records: &[DyadRecord],
    config: &GibbsConfig,
    opts: &OnlineOptions,
) -> Result<ModelState> {
    if config.sweeps == 0 {
        return Err(Error::Config("sweeps must be >= 1".into()));
    }
    let mut rng = rng::stream(config.seed, Lane::Warm, 0, 0);
    let mut state = ModelState::new(config.hyper.clone());
    init_random(&mut state, records, Origin::Observed, &mut rng)?;
    if opts.implicit_absence {
        let interval = records.iter().map(|r| r.interval).max().unwrap_or(1);
        let nodes = state.registered_nodes();
        let mut absent = Vec::new();
        for &p in &nodes {
            for &q in &nodes {
                if p == q {
                    continue;
                }
                let d = Dyad::new(p, q)?;
                if !state.contains(d) && opts.eligible(d) {
                    absent.push(DyadRecord::new(d, false, interval));
                }
            }
        }
        init_random(&mut state, &absent, Origin::Implicit, &mut rng)?;
    }
    for _ in 0..config.sweeps {
        sweep(&mut state, config.pair_mode, &mut rng)?;
    }
    Ok(state)
}

/// Redraws the listed dyads in order.
pub fn rejuvenate<R: Rng + ?Sized>(
    state: &mut ModelState,
    dyads: &[Dyad],
    mode: PairMode,
    rng: &mut R,
) -> Result<()> {
    let mut scratch = Vec::new();
    for d in dyads {
        let i = state.index_of(*d).ok_or(Error::UnknownDyad(*d))?;
        redraw_at(state, i, mode, &mut scratch, rng)?;
    }
    Ok(())
}

/// Redraws `policy.size` dyads chosen uniformly without replacement.
pub fn rejuvenate_random<R: Rng + ?Sized>(
    state: &mut ModelState,
    policy: RejuvenationPolicy,
    mode: PairMode,
    rng: &mut R,
) -> Result<()> {
    let amount = policy.size.min(state.len());
    if amount == 0 {
        return Ok(());
    }
    let picks = index::sample(rng, state.len(), amount);
    let mut scratch = Vec::new();
    for i in picks.iter() {
        redraw_at(state, i, mode, &mut scratch, rng)?;
    }
    Ok(())
}

/// Places one streamed record into the state: the assignment steps of the
/// incremental sampler, without rejuvenation.
///
/// A dyad already present as an implicit or reset absence is replaced by the
/// observation. A dyad observed earlier is retagged if the value repeats, and
/// may flip from absent to present but never from present to absent.
pub fn assign_observation<R: Rng + ?Sized>(
    state: &mut ModelState,
    record: DyadRecord,
    opts: &OnlineOptions,
    rng: &mut R,
) -> Result<Observed> {
    let dyad = record.dyad;
    let mut scratch = Vec::new();
    if let Some(existing) = state.entry(dyad).copied() {
        if existing.origin == Origin::Observed {
            if existing.interval == record.interval {
                return Err(Error::DuplicateDyad(dyad));
            }
            if existing.present && !record.present {
                return Err(Error::RejectedFlip(dyad));
            }
            if existing.present == record.present {
                state.retag(dyad, record.interval, Origin::Observed)?;
                return Ok(Observed::Retagged);
            }
        }
        state.remove(dyad)?;
        instantiate_drawn(state, record, Origin::Observed, &mut scratch, rng)?;
        return Ok(Observed::Reassigned);
    }

    let (p, q) = (dyad.initiator(), dyad.receiver());
    let new_ends: Vec<_> = [p, q]
        .into_iter()
        .filter(|n| !state.is_registered(*n))
        .collect();
    let prior = if opts.implicit_absence && !new_ends.is_empty() {
        state.registered_nodes()
    } else {
        Vec::new()
    };

    instantiate_drawn(state, record, Origin::Observed, &mut scratch, rng)?;

    let mut implicit = 0;
    for end in new_ends {
        let other = if end == p { q } else { p };
        for &r in prior.iter().filter(|r| **r != other) {
            for d in [Dyad::new(end, r)?, Dyad::new(r, end)?] {
                if state.contains(d) || !opts.eligible(d) {
                    continue;
                }
                let absent = DyadRecord::new(d, false, record.interval);
                instantiate_drawn(state, absent, Origin::Implicit, &mut scratch, rng)?;
                implicit += 1;
            }
        }
    }
    Ok(Observed::New { implicit })
}

/// Incremental Gibbs step: assignment followed by rejuvenation.
pub fn incremental_observe<R: Rng + ?Sized>(
    state: &mut ModelState,
    record: DyadRecord,
    opts: &OnlineOptions,
    rng: &mut R,
) -> Result<Observed> {
    let observed = assign_observation(state, record, opts, rng)?;
    rejuvenate_random(state, opts.rejuvenation, opts.pair_mode, rng)?;
    Ok(observed)
}
