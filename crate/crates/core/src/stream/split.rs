//! Five-fold dyad-level train/validation/test splits.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::NodeRegistry;
use crate::error::{Error, Result};
use crate::model::Dyad;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Train,
    Validation,
    Test,
}

impl Role {
    fn as_str(self) -> &'static str {
        match self {
            Role::Train => "train",
            Role::Validation => "validation",
            Role::Test => "test",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "train" => Some(Role::Train),
            "validation" => Some(Role::Validation),
            "test" => Some(Role::Test),
            _ => None,
        }
    }
}

/// Role of every dyad in the universe for one fold. Dyads outside the
/// universe count as training-eligible.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitMask {
    pub fold: usize,
    roles: BTreeMap<Dyad, Role>,
}

impl SplitMask {
    pub fn new(fold: usize, roles: BTreeMap<Dyad, Role>) -> Self {
        Self { fold, roles }
    }

    /// Everything in the universe is training data.
    pub fn all_train(universe: &[Dyad]) -> Self {
        Self::new(0, universe.iter().map(|d| (*d, Role::Train)).collect())
    }

    pub fn role(&self, dyad: Dyad) -> Role {
        self.roles.get(&dyad).copied().unwrap_or(Role::Train)
    }

    pub fn len(&self) -> usize {
        self.roles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roles.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Dyad, Role)> + '_ {
        self.roles.iter().map(|(d, r)| (*d, *r))
    }

    pub fn count(&self, role: Role) -> usize {
        self.roles.values().filter(|r| **r == role).count()
    }

    /// Validation and test dyads.
    pub fn held_out(&self) -> HashSet<Dyad> {
        self.iter()
            .filter(|(_, r)| *r != Role::Train)
            .map(|(d, _)| d)
            .collect()
    }
}

/// Shuffles `universe` into `folds` near-equal folds. Mask `f` holds fold `f`
/// out, splitting it into validation (the first `round(len · fraction)`
/// dyads) and test; every other fold is training data.
pub fn cv_split<R: Rng + ?Sized>(
    universe: &[Dyad],
    folds: usize,
    validation_fraction: f64,
    rng: &mut R,
) -> Result<Vec<SplitMask>> {
    if universe.is_empty() {
        return Err(Error::Data("cannot split an empty dyad universe".into()));
    }
    if folds < 2 {
        return Err(Error::Config(format!("need at least 2 folds, got {folds}")));
    }
    if !(0.0..=1.0).contains(&validation_fraction) {
        return Err(Error::Config(format!(
            "validation fraction must lie in [0, 1], got {validation_fraction}"
        )));
    }
    let mut shuffled = universe.to_vec();
    shuffled.sort_unstable();
    shuffled.dedup();
    shuffled.shuffle(rng);
    let fold_of: Vec<Vec<Dyad>> = (0..folds)
        .map(|f| shuffled.iter().skip(f).step_by(folds).copied().collect())
        .collect();

    Ok((0..folds)
        .map(|f| {
            let mut roles = BTreeMap::new();
            for (g, members) in fold_of.iter().enumerate() {
                if g != f {
                    roles.extend(members.iter().map(|d| (*d, Role::Train)));
                    continue;
                }
                let n_val = (members.len() as f64 * validation_fraction).round() as usize;
                for (i, d) in members.iter().enumerate() {
                    roles.insert(*d, if i < n_val { Role::Validation } else { Role::Test });
                }
            }
            SplitMask::new(f, roles)
        })
        .collect())
}

/// Writes `fold node_from node_to role` lines.
pub fn save_masks(masks: &[SplitMask], nodes: &NodeRegistry, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::from("# fold node_from node_to role\n");
    for m in masks {
        for (d, role) in m.iter() {
            let _ = writeln!(
                out,
                "{} {} {} {}",
                m.fold,
                nodes.name(d.initiator()),
                nodes.name(d.receiver()),
                role.as_str()
            );
        }
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn load_masks(path: impl AsRef<Path>, nodes: &NodeRegistry) -> Result<Vec<SplitMask>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut by_fold: BTreeMap<usize, BTreeMap<Dyad, Role>> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fail = |msg: String| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            msg,
        };
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [fold, from, to, role] = fields[..] else {
            return Err(fail(format!("expected 4 fields, found {}", fields.len())));
        };
        let fold: usize = fold
            .parse()
            .map_err(|_| fail(format!("bad fold index {fold:?}")))?;
        let p = nodes.id(from).ok_or_else(|| fail(format!("unknown node {from:?}")))?;
        let q = nodes.id(to).ok_or_else(|| fail(format!("unknown node {to:?}")))?;
        let role = Role::parse(role).ok_or_else(|| fail(format!("unknown role {role:?}")))?;
        let dyad = Dyad::new(p, q).map_err(|e| fail(e.to_string()))?;
        by_fold.entry(fold).or_default().insert(dyad, role);
    }
    Ok(by_fold
        .into_iter()
        .map(|(fold, roles)| SplitMask::new(fold, roles))
        .collect())
}
