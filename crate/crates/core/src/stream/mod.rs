//! Observation streams: ingestion, synthetic generation and dyad splits.

mod edgelist;
mod split;
mod synthetic;

use std::collections::{BTreeMap, HashMap, HashSet};

pub use edgelist::{load_edge_list, parse_edge_list, save_edge_list, write_edge_list};
pub use split::{cv_split, load_masks, save_masks, Role, SplitMask};
pub use synthetic::{
    assortative, generate_synthetic, load_ground_truth, parse_ground_truth, save_ground_truth,
    shift_columns, write_ground_truth, GroundTruth, SyntheticConfig, SyntheticData,
};

use crate::error::{Error, Result};
use crate::model::{Dyad, DyadRecord, NodeId};

/// Node names, with ids assigned in order of first appearance.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NodeRegistry {
    names: Vec<String>,
    first_seen: Vec<u32>,
    index: HashMap<String, NodeId>,
}

impl NodeRegistry {
    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn id(&self, name: &str) -> Option<NodeId> {
        self.index.get(name).copied()
    }

    pub fn name(&self, id: NodeId) -> &str {
        &self.names[id.index()]
    }

    pub fn first_seen(&self, id: NodeId) -> u32 {
        self.first_seen[id.index()]
    }

    fn intern(&mut self, name: &str, interval: u32) -> NodeId {
        if let Some(id) = self.index.get(name) {
            return *id;
        }
        let id = NodeId(self.names.len() as u32);
        self.names.push(name.to_owned());
        self.first_seen.push(interval);
        self.index.insert(name.to_owned(), id);
        id
    }
}

/// Time-ordered dyad observations over intervals `1..=horizon`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ObservationStream {
    records: Vec<DyadRecord>,
    horizon: u32,
    nodes: NodeRegistry,
}

/// A record before node ids are assigned.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NamedRecord {
    pub interval: u32,
    pub from: String,
    pub to: String,
    pub present: bool,
}

impl ObservationStream {
    /// Sorts by interval (stable), collapses repeated observations of a dyad
    /// within one interval (present wins) and assigns node ids in order of
    /// first appearance.
    pub fn from_named(mut named: Vec<NamedRecord>) -> Result<Self> {
        for r in &named {
            if r.interval == 0 {
                return Err(Error::Data(format!("interval must be >= 1 ({} {})", r.from, r.to)));
            }
            if r.from == r.to {
                return Err(Error::Data(format!("self-loop on node {}", r.from)));
            }
        }
        named.sort_by_key(|r| r.interval);

        let mut nodes = NodeRegistry::default();
        let mut records: Vec<DyadRecord> = Vec::with_capacity(named.len());
        let mut seen: HashMap<(u32, Dyad), usize> = HashMap::new();
        for r in &named {
            let p = nodes.intern(&r.from, r.interval);
            let q = nodes.intern(&r.to, r.interval);
            let dyad = Dyad::new(p, q)?;
            match seen.get(&(r.interval, dyad)) {
                Some(&i) => records[i].present |= r.present,
                None => {
                    seen.insert((r.interval, dyad), records.len());
                    records.push(DyadRecord::new(dyad, r.present, r.interval));
                }
            }
        }
        let horizon = records.last().map_or(0, |r| r.interval);
        Ok(Self {
            records,
            horizon,
            nodes,
        })
    }

    pub fn records(&self) -> &[DyadRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn horizon(&self) -> u32 {
        self.horizon
    }

    pub fn nodes(&self) -> &NodeRegistry {
        &self.nodes
    }

    /// Records of interval `t`, in stream order.
    pub fn interval(&self, t: u32) -> &[DyadRecord] {
        let lo = self.records.partition_point(|r| r.interval < t);
        let hi = self.records.partition_point(|r| r.interval <= t);
        &self.records[lo..hi]
    }

    /// Distinct dyads in order of first observation.
    pub fn dyad_universe(&self) -> Vec<Dyad> {
        let mut seen = HashSet::new();
        self.records
            .iter()
            .filter(|r| seen.insert(r.dyad))
            .map(|r| r.dyad)
            .collect()
    }

    /// Merges every `width` consecutive intervals into one.
    pub fn coarsen(&self, width: u32) -> Result<Self> {
        if width == 0 {
            return Err(Error::Config("interval width must be >= 1".into()));
        }
        let named = self
            .records
            .iter()
            .map(|r| NamedRecord {
                interval: (r.interval - 1) / width + 1,
                from: self.nodes.name(r.dyad.initiator()).to_owned(),
                to: self.nodes.name(r.dyad.receiver()).to_owned(),
                present: r.present,
            })
            .collect();
        Self::from_named(named)
    }

    /// Record counts per interval, for summaries.
    pub fn interval_sizes(&self) -> BTreeMap<u32, usize> {
        let mut out = BTreeMap::new();
        for r in &self.records {
            *out.entry(r.interval).or_insert(0) += 1;
        }
        out
    }
}
