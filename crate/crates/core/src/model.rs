//! MMSB data model and collapsed sufficient statistics.
//!
//! Memberships `π` and the block matrix `B` are integrated out. A
//! [`ModelState`] keeps, for every instantiated dyad, its pair of group
//! assignments together with three count tables:
//!
//! * `n[p][g]`: role assignments of node `p` to group `g`, pooling the
//!   initiator and receiver roles (both are drawn from the same `π_p`);
//! * `m1[g][h]` / `m0[g][h]`: instantiated dyads with a present / absent
//!   link whose (initiator, receiver) groups are `(g, h)`.
//!
//! All conditionals and predictive probabilities are computed from these
//! tables, excluding the queried dyad's own contribution when it is
//! instantiated.

use std::collections::BTreeMap;
use std::fmt;

use indexmap::IndexMap;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// An ordered node pair `(p, q)` with `p != q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Dyad {
    initiator: NodeId,
    receiver: NodeId,
}

impl Dyad {
    pub fn new(initiator: NodeId, receiver: NodeId) -> Result<Self> {
        if initiator == receiver {
            return Err(Error::SelfLoop(initiator));
        }
        Ok(Self {
            initiator,
            receiver,
        })
    }

    /// Shorthand for tests and fixtures; panics on a self-loop.
    pub fn of(initiator: u32, receiver: u32) -> Self {
        Self::new(NodeId(initiator), NodeId(receiver)).expect("self-loop dyad")
    }

    #[inline]
    pub fn initiator(self) -> NodeId {
        self.initiator
    }

    #[inline]
    pub fn receiver(self) -> NodeId {
        self.receiver
    }

    pub fn reversed(self) -> Self {
        Self {
            initiator: self.receiver,
            receiver: self.initiator,
        }
    }

    pub fn touches(self, node: NodeId) -> bool {
        self.initiator == node || self.receiver == node
    }
}

impl fmt::Display for Dyad {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}->{}", self.initiator, self.receiver)
    }
}

/// One observation `Y(p, q)` made during interval `interval`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DyadRecord {
    pub dyad: Dyad,
    pub present: bool,
    pub interval: u32,
}

impl DyadRecord {
    pub fn new(dyad: Dyad, present: bool, interval: u32) -> Self {
        Self {
            dyad,
            present,
            interval,
        }
    }
}

/// Latent groups of the initiator (`z_{p→q}`) and receiver (`z_{p←q}`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Assignment {
    pub send_group: usize,
    pub recv_group: usize,
}

impl Assignment {
    pub fn new(send_group: usize, recv_group: usize) -> Self {
        Self {
            send_group,
            recv_group,
        }
    }

    pub fn uniform<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Self {
        Self {
            send_group: rng.random_range(0..k),
            recv_group: rng.random_range(0..k),
        }
    }
}

/// How a dyad came to be instantiated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Origin {
    /// Streamed as an explicit record.
    Observed,
    /// Created as an absence when one of its endpoints first appeared.
    Implicit,
    /// A present link flipped to absent by history deletion.
    Reset,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DyadEntry {
    pub assignment: Assignment,
    pub present: bool,
    pub interval: u32,
    pub origin: Origin,
}

/// Dirichlet concentration `α`, Beta pseudo-counts `ψ = (ψ₁, ψ₀)` and the
/// number of groups `K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawHyperparams", into = "RawHyperparams")]
pub struct Hyperparams {
    k: usize,
    alpha: Vec<f64>,
    psi_one: f64,
    psi_zero: f64,
    alpha_sum: f64,
}

#[derive(Serialize, Deserialize)]
struct RawHyperparams {
    k: usize,
    alpha: Vec<f64>,
    psi_one: f64,
    psi_zero: f64,
}

impl TryFrom<RawHyperparams> for Hyperparams {
    type Error = Error;

    fn try_from(raw: RawHyperparams) -> Result<Self> {
        if raw.alpha.len() != raw.k {
            return Err(Error::InvalidHyperparams(format!(
                "alpha has {} entries but K = {}",
                raw.alpha.len(),
                raw.k
            )));
        }
        Hyperparams::new(raw.alpha, raw.psi_one, raw.psi_zero)
    }
}

impl From<Hyperparams> for RawHyperparams {
    fn from(h: Hyperparams) -> Self {
        Self {
            k: h.k,
            alpha: h.alpha,
            psi_one: h.psi_one,
            psi_zero: h.psi_zero,
        }
    }
}

impl Hyperparams {
    pub fn new(alpha: Vec<f64>, psi_one: f64, psi_zero: f64) -> Result<Self> {
        let k = alpha.len();
        if k < 2 {
            return Err(Error::InvalidHyperparams(format!("K = {k}, need K >= 2")));
        }
        if let Some(a) = alpha.iter().find(|a| !(a.is_finite() && **a > 0.0)) {
            return Err(Error::InvalidHyperparams(format!(
                "alpha entries must be positive, got {a}"
            )));
        }
        for (name, v) in [("psi_one", psi_one), ("psi_zero", psi_zero)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidHyperparams(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        let alpha_sum = alpha.iter().sum();
        Ok(Self {
            k,
            alpha,
            psi_one,
            psi_zero,
            alpha_sum,
        })
    }

    pub fn symmetric(k: usize, alpha: f64, psi_one: f64, psi_zero: f64) -> Result<Self> {
        Self::new(vec![alpha; k], psi_one, psi_zero)
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    #[inline]
    pub fn alpha_sum(&self) -> f64 {
        self.alpha_sum
    }

    #[inline]
    pub fn psi_one(&self) -> f64 {
        self.psi_one
    }

    #[inline]
    pub fn psi_zero(&self) -> f64 {
        self.psi_zero
    }

    #[inline]
    fn psi(&self, present: bool) -> f64 {
        if present {
            self.psi_one
        } else {
            self.psi_zero
        }
    }

    /// Prior predictive `ψ₁ / (ψ₁ + ψ₀)`.
    pub fn prior_link_prob(&self) -> f64 {
        self.psi_one / (self.psi_one + self.psi_zero)
    }
}

impl Default for Hyperparams {
    fn default() -> Self {
        Self::symmetric(10, 0.1, 1.0, 1.0).expect("valid defaults")
    }
}

/// Point estimates of memberships and block link probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorEstimate {
    pub pi_hat: BTreeMap<NodeId, Vec<f64>>,
    pub b_hat: Vec<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct ModelState {
    hyper: Hyperparams,
    entries: IndexMap<Dyad, DyadEntry>,
    // node-major, K entries per node; grows on registration
    node_counts: Vec<u32>,
    node_totals: Vec<u32>,
    link_counts: Vec<u32>,
    nonlink_counts: Vec<u32>,
    registered: usize,
}

/// Counts seen from one dyad, optionally minus that dyad's own contribution.
struct CountView<'a> {
    state: &'a ModelState,
    p: usize,
    q: usize,
    own: Option<(Assignment, bool)>,
}

impl CountView<'_> {
    #[inline]
    fn send_count(&self, g: usize) -> f64 {
        let c = self.state.raw_node_count(self.p, g);
        match self.own {
            Some((a, _)) if a.send_group == g => (c - 1) as f64,
            _ => c as f64,
        }
    }

    #[inline]
    fn recv_count(&self, h: usize) -> f64 {
        let c = self.state.raw_node_count(self.q, h);
        match self.own {
            Some((a, _)) if a.recv_group == h => (c - 1) as f64,
            _ => c as f64,
        }
    }

    #[inline]
    fn send_total(&self) -> f64 {
        let t = self.state.raw_node_total(self.p);
        (if self.own.is_some() { t - 1 } else { t }) as f64
    }

    #[inline]
    fn recv_total(&self) -> f64 {
        let t = self.state.raw_node_total(self.q);
        (if self.own.is_some() { t - 1 } else { t }) as f64
    }

    /// `(m1[g][h], m0[g][h])` after exclusion.
    #[inline]
    fn block(&self, g: usize, h: usize) -> (f64, f64) {
        let i = g * self.state.hyper.k + h;
        let mut one = self.state.link_counts[i];
        let mut zero = self.state.nonlink_counts[i];
        if let Some((a, present)) = self.own {
            if a.send_group == g && a.recv_group == h {
                if present {
                    one -= 1;
                } else {
                    zero -= 1;
                }
            }
        }
        (one as f64, zero as f64)
    }

    /// `(m_value[g][h] + ψ_value) / (m1 + m0 + ψ₁ + ψ₀)`.
    #[inline]
    fn block_term(&self, g: usize, h: usize, present: bool) -> f64 {
        let hyper = &self.state.hyper;
        let (one, zero) = self.block(g, h);
        let num = if present { one } else { zero } + hyper.psi(present);
        num / (one + zero + hyper.psi_one + hyper.psi_zero)
    }

    fn send_weights(&self, present: bool, h: usize, out: &mut [f64]) -> f64 {
        let alpha = self.state.hyper.alpha();
        let mut total = 0.0;
        for (g, w) in out.iter_mut().enumerate() {
            *w = (self.send_count(g) + alpha[g]) * self.block_term(g, h, present);
            total += *w;
        }
        total
    }

    fn recv_weights(&self, present: bool, g: usize, out: &mut [f64]) -> f64 {
        let alpha = self.state.hyper.alpha();
        let mut total = 0.0;
        for (h, w) in out.iter_mut().enumerate() {
            *w = (self.recv_count(h) + alpha[h]) * self.block_term(g, h, present);
            total += *w;
        }
        total
    }

    fn pair_weights(&self, present: bool, out: &mut [f64]) -> f64 {
        let k = self.state.hyper.k;
        let alpha = self.state.hyper.alpha();
        let mut total = 0.0;
        for g in 0..k {
            let sf = self.send_count(g) + alpha[g];
            for h in 0..k {
                let w = sf * (self.recv_count(h) + alpha[h]) * self.block_term(g, h, present);
                out[g * k + h] = w;
                total += w;
            }
        }
        total
    }

    fn predictive(&self) -> f64 {
        let hyper = &self.state.hyper;
        let k = hyper.k;
        let alpha = hyper.alpha();
        let send_norm = self.send_total() + hyper.alpha_sum;
        let recv_norm = self.recv_total() + hyper.alpha_sum;
        let mut prob = 0.0;
        for g in 0..k {
            let sp = (self.send_count(g) + alpha[g]) / send_norm;
            let mut row = 0.0;
            for h in 0..k {
                let sq = (self.recv_count(h) + alpha[h]) / recv_norm;
                let (one, zero) = self.block(g, h);
                row += sq * (one + hyper.psi_one) / (one + zero + hyper.psi_one + hyper.psi_zero);
            }
            prob += sp * row;
        }
        prob
    }
}

/// Draws an index with probability proportional to `weights`.
pub(crate) fn sample_weighted<R: Rng + ?Sized>(weights: &[f64], total: f64, rng: &mut R) -> usize {
    let mut u = rng.random::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        if u < *w {
            return i;
        }
        u -= w;
    }
    // rounding left u marginally above the last bucket
    weights.iter().rposition(|w| *w > 0.0).unwrap_or(0)
}

fn normalized(mut v: Vec<f64>, total: f64) -> Vec<f64> {
    v.iter_mut().for_each(|x| *x /= total);
    v
}

impl ModelState {
    /// Empty state: no dyads, all counts zero, no registered nodes.
    pub fn new(hyper: Hyperparams) -> Self {
        let k = hyper.k();
        Self {
            hyper,
            entries: IndexMap::new(),
            node_counts: Vec::new(),
            node_totals: Vec::new(),
            link_counts: vec![0; k * k],
            nonlink_counts: vec![0; k * k],
            registered: 0,
        }
    }

    #[inline]
    pub fn hyper(&self) -> &Hyperparams {
        &self.hyper
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.hyper.k
    }

    /// Number of instantiated dyads.
    #[inline]
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    #[inline]
    pub fn contains(&self, dyad: Dyad) -> bool {
        self.entries.contains_key(&dyad)
    }

    #[inline]
    pub fn entry(&self, dyad: Dyad) -> Option<&DyadEntry> {
        self.entries.get(&dyad)
    }

    pub fn entries(&self) -> impl Iterator<Item = (Dyad, &DyadEntry)> + '_ {
        self.entries.iter().map(|(d, e)| (*d, e))
    }

    #[inline]
    pub fn index_of(&self, dyad: Dyad) -> Option<usize> {
        self.entries.get_index_of(&dyad)
    }

    #[inline]
    pub fn dyad_at(&self, index: usize) -> Option<Dyad> {
        self.entries.get_index(index).map(|(d, _)| *d)
    }

    /// A node is registered while it takes part in at least one instantiated dyad.
    #[inline]
    pub fn is_registered(&self, node: NodeId) -> bool {
        self.raw_node_total(node.index()) > 0
    }

    pub fn registered_count(&self) -> usize {
        self.registered
    }

    /// Registered nodes in ascending id order.
    pub fn registered_nodes(&self) -> Vec<NodeId> {
        self.node_totals
            .iter()
            .enumerate()
            .filter(|(_, t)| **t > 0)
            .map(|(i, _)| NodeId(i as u32))
            .collect()
    }

    pub fn node_count(&self, node: NodeId, group: usize) -> u32 {
        self.raw_node_count(node.index(), group)
    }

    pub fn node_total(&self, node: NodeId) -> u32 {
        self.raw_node_total(node.index())
    }

    pub fn link_count(&self, g: usize, h: usize) -> u32 {
        self.link_counts[g * self.hyper.k + h]
    }

    pub fn nonlink_count(&self, g: usize, h: usize) -> u32 {
        self.nonlink_counts[g * self.hyper.k + h]
    }

    #[inline]
    fn raw_node_count(&self, node: usize, g: usize) -> u32 {
        self.node_counts
            .get(node * self.hyper.k + g)
            .copied()
            .unwrap_or(0)
    }

    #[inline]
    fn raw_node_total(&self, node: usize) -> u32 {
        self.node_totals.get(node).copied().unwrap_or(0)
    }

    fn check_assignment(&self, a: Assignment) -> Result<()> {
        let k = self.hyper.k;
        for group in [a.send_group, a.recv_group] {
            if group >= k {
                return Err(Error::GroupOutOfRange { group, k });
            }
        }
        Ok(())
    }

    fn ensure_node(&mut self, node: usize) {
        if node >= self.node_totals.len() {
            self.node_totals.resize(node + 1, 0);
            self.node_counts.resize((node + 1) * self.hyper.k, 0);
        }
    }

    pub(crate) fn add_counts(&mut self, dyad: Dyad, a: Assignment, present: bool) {
        let k = self.hyper.k;
        let (p, q) = (dyad.initiator.index(), dyad.receiver.index());
        self.ensure_node(p.max(q));
        for (node, g) in [(p, a.send_group), (q, a.recv_group)] {
            if self.node_totals[node] == 0 {
                self.registered += 1;
            }
            self.node_totals[node] += 1;
            self.node_counts[node * k + g] += 1;
        }
        let block = a.send_group * k + a.recv_group;
        if present {
            self.link_counts[block] += 1;
        } else {
            self.nonlink_counts[block] += 1;
        }
    }

    pub(crate) fn sub_counts(&mut self, dyad: Dyad, a: Assignment, present: bool) -> Result<()> {
        let k = self.hyper.k;
        let (p, q) = (dyad.initiator.index(), dyad.receiver.index());
        let block = a.send_group * k + a.recv_group;
        let table = if present {
            &self.link_counts
        } else {
            &self.nonlink_counts
        };
        if self.raw_node_count(p, a.send_group) == 0
            || self.raw_node_count(q, a.recv_group) == 0
            || table[block] == 0
        {
            return Err(Error::CountUnderflow(dyad));
        }
        for (node, g) in [(p, a.send_group), (q, a.recv_group)] {
            self.node_totals[node] -= 1;
            self.node_counts[node * k + g] -= 1;
            if self.node_totals[node] == 0 {
                self.registered -= 1;
            }
        }
        if present {
            self.link_counts[block] -= 1;
        } else {
            self.nonlink_counts[block] -= 1;
        }
        Ok(())
    }

    /// Adds a dyad with the given assignment, registering its endpoints.
    pub fn instantiate(&mut self, record: DyadRecord, assignment: Assignment) -> Result<()> {
        self.instantiate_with_origin(record, assignment, Origin::Observed)
    }

    pub fn instantiate_with_origin(
        &mut self,
        record: DyadRecord,
        assignment: Assignment,
        origin: Origin,
    ) -> Result<()> {
        self.check_assignment(assignment)?;
        if self.entries.contains_key(&record.dyad) {
            return Err(Error::DuplicateDyad(record.dyad));
        }
        self.add_counts(record.dyad, assignment, record.present);
        self.entries.insert(
            record.dyad,
            DyadEntry {
                assignment,
                present: record.present,
                interval: record.interval,
                origin,
            },
        );
        Ok(())
    }

    /// Exact inverse of [`instantiate`](Self::instantiate). Nodes left with
    /// no dyads are deregistered.
    pub fn remove(&mut self, dyad: Dyad) -> Result<DyadEntry> {
        let entry = *self.entries.get(&dyad).ok_or(Error::UnknownDyad(dyad))?;
        self.sub_counts(dyad, entry.assignment, entry.present)?;
        self.entries.swap_remove(&dyad);
        Ok(entry)
    }

    /// Moves an instantiated dyad to a new group pair, keeping its value.
    pub fn reassign(&mut self, dyad: Dyad, assignment: Assignment) -> Result<()> {
        self.check_assignment(assignment)?;
        let entry = *self.entries.get(&dyad).ok_or(Error::UnknownDyad(dyad))?;
        self.sub_counts(dyad, entry.assignment, entry.present)?;
        self.add_counts(dyad, assignment, entry.present);
        self.entries[&dyad].assignment = assignment;
        Ok(())
    }

    /// Moves the interval tag of an instantiated dyad.
    pub fn retag(&mut self, dyad: Dyad, interval: u32, origin: Origin) -> Result<()> {
        let entry = self
            .entries
            .get_mut(&dyad)
            .ok_or(Error::UnknownDyad(dyad))?;
        entry.interval = interval;
        entry.origin = origin;
        Ok(())
    }

    pub(crate) fn set_assignment_at(&mut self, index: usize, assignment: Assignment) {
        self.entries[index].assignment = assignment;
    }

    pub(crate) fn entry_at(&self, index: usize) -> (Dyad, DyadEntry) {
        let (d, e) = self.entries.get_index(index).expect("index in range");
        (*d, *e)
    }

    fn view(&self, dyad: Dyad) -> CountView<'_> {
        CountView {
            state: self,
            p: dyad.initiator.index(),
            q: dyad.receiver.index(),
            own: self
                .entries
                .get(&dyad)
                .map(|e| (e.assignment, e.present)),
        }
    }

    /// View for a dyad whose contribution has already been subtracted.
    fn detached_view(&self, dyad: Dyad) -> CountView<'_> {
        CountView {
            state: self,
            p: dyad.initiator.index(),
            q: dyad.receiver.index(),
            own: None,
        }
    }

    /// `P(z_{p→q} = g | rest)` with the receiver group fixed at `recv_group`.
    pub fn conditional_send(&self, dyad: Dyad, present: bool, recv_group: usize) -> Result<Vec<f64>> {
        let k = self.k();
        if recv_group >= k {
            return Err(Error::GroupOutOfRange {
                group: recv_group,
                k,
            });
        }
        let mut w = vec![0.0; k];
        let total = self.view(dyad).send_weights(present, recv_group, &mut w);
        Ok(normalized(w, total))
    }

    /// `P(z_{p←q} = h | rest)` with the sender group fixed at `send_group`.
    pub fn conditional_recv(&self, dyad: Dyad, present: bool, send_group: usize) -> Result<Vec<f64>> {
        let k = self.k();
        if send_group >= k {
            return Err(Error::GroupOutOfRange {
                group: send_group,
                k,
            });
        }
        let mut w = vec![0.0; k];
        let total = self.view(dyad).recv_weights(present, send_group, &mut w);
        Ok(normalized(w, total))
    }

    /// Joint conditional over `(g, h)`, row-major `K × K`.
    pub fn conditional_pair(&self, dyad: Dyad, present: bool) -> Vec<f64> {
        let k = self.k();
        let mut w = vec![0.0; k * k];
        let total = self.view(dyad).pair_weights(present, &mut w);
        normalized(w, total)
    }

    /// Predictive probability that `Y(dyad) = 1`, excluding the dyad itself
    /// if instantiated. Unseen nodes fall back to prior membership.
    pub fn predictive_prob(&self, dyad: Dyad) -> f64 {
        self.view(dyad).predictive()
    }

    /// Predictive probability of the given value.
    pub fn predictive_of(&self, dyad: Dyad, present: bool) -> f64 {
        let p = self.predictive_prob(dyad);
        if present {
            p
        } else {
            1.0 - p
        }
    }

    pub fn posterior_estimates(&self) -> PosteriorEstimate {
        let k = self.k();
        let hyper = &self.hyper;
        let pi_hat = self
            .registered_nodes()
            .into_iter()
            .map(|node| (node, self.membership(node)))
            .collect();
        let b_hat = (0..k)
            .map(|g| {
                (0..k)
                    .map(|h| {
                        let one = self.link_count(g, h) as f64;
                        let zero = self.nonlink_count(g, h) as f64;
                        (one + hyper.psi_one) / (one + zero + hyper.psi_one + hyper.psi_zero)
                    })
                    .collect()
            })
            .collect();
        PosteriorEstimate { pi_hat, b_hat }
    }

    /// Posterior mean membership of one node; the prior mean for unseen nodes.
    pub fn membership(&self, node: NodeId) -> Vec<f64> {
        let hyper = &self.hyper;
        let norm = self.node_total(node) as f64 + hyper.alpha_sum;
        (0..self.k())
            .map(|g| (self.node_count(node, g) as f64 + hyper.alpha[g]) / norm)
            .collect()
    }

    // Sampling primitives for the drivers. The dyad's counts must already be
    // subtracted.

    pub(crate) fn draw_pair_detached<R: Rng + ?Sized>(
        &self,
        dyad: Dyad,
        present: bool,
        scratch: &mut Vec<f64>,
        rng: &mut R,
    ) -> Assignment {
        let k = self.k();
        scratch.resize(k * k, 0.0);
        let total = self.detached_view(dyad).pair_weights(present, scratch);
        let i = sample_weighted(scratch, total, rng);
        Assignment::new(i / k, i % k)
    }

    pub(crate) fn draw_alternating_detached<R: Rng + ?Sized>(
        &self,
        dyad: Dyad,
        present: bool,
        current: Assignment,
        scratch: &mut Vec<f64>,
        rng: &mut R,
    ) -> Assignment {
        let k = self.k();
        scratch.resize(k, 0.0);
        let view = self.detached_view(dyad);
        let total = view.send_weights(present, current.recv_group, scratch);
        let send_group = sample_weighted(scratch, total, rng);
        let total = view.recv_weights(present, send_group, scratch);
        let recv_group = sample_weighted(scratch, total, rng);
        Assignment::new(send_group, recv_group)
    }
}

impl PartialEq for ModelState {
    /// Compares logical content; trailing zero capacity in the node tables is ignored.
    fn eq(&self, other: &Self) -> bool {
        if self.hyper != other.hyper
            || self.entries != other.entries
            || self.link_counts != other.link_counts
            || self.nonlink_counts != other.nonlink_counts
            || self.registered != other.registered
        {
            return false;
        }
        let nodes = self.node_totals.len().max(other.node_totals.len());
        (0..nodes).all(|n| {
            self.raw_node_total(n) == other.raw_node_total(n)
                && (0..self.k()).all(|g| self.raw_node_count(n, g) == other.raw_node_count(n, g))
        })
    }
}
