//! Brute-force posterior predictive by enumerating every joint assignment.
//!
//! Deliberately shares no code with [`crate::model`]: counts, marginal
//! weights and the predictive are all recomputed here from the records.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{Dyad, DyadRecord, Hyperparams, NodeId};

/// Largest number of joint configurations the oracle will enumerate.
pub const ENUMERATION_BUDGET: f64 = 1e7;

/// `ln Γ(a + n) − ln Γ(a)` as a sum of logs.
fn ln_rising(a: f64, n: u32) -> f64 {
    (0..n).map(|i| (a + i as f64).ln()).sum()
}

/// Exact `p(Y_query = 1 | records)` under the collapsed model.
pub fn exact_posterior_oracle(records: &[DyadRecord], hyper: &Hyperparams, query: Dyad) -> Result<f64> {
    exact_predictive(records, hyper.alpha(), hyper.psi_one(), hyper.psi_zero(), query)
}

/// As [`exact_posterior_oracle`] with raw parameters, so that `K = 1` can be
/// checked against the conjugate closed form.
pub fn exact_predictive(
    records: &[DyadRecord],
    alpha: &[f64],
    psi_one: f64,
    psi_zero: f64,
    query: Dyad,
) -> Result<f64> {
    let k = alpha.len();
    if k == 0 || alpha.iter().any(|a| !(*a > 0.0)) || !(psi_one > 0.0 && psi_zero > 0.0) {
        return Err(Error::InvalidHyperparams("oracle needs K >= 1 and positive parameters".into()));
    }
    let mut seen = std::collections::HashSet::new();
    for r in records {
        if !seen.insert(r.dyad) {
            return Err(Error::DuplicateDyad(r.dyad));
        }
    }
    if seen.contains(&query) {
        return Err(Error::Data(format!("query dyad {query} is among the records")));
    }
    let digits = 2 * records.len();
    let configurations = (k as f64).powi(digits as i32);
    if configurations > ENUMERATION_BUDGET {
        return Err(Error::BudgetExceeded {
            configurations,
            limit: ENUMERATION_BUDGET,
        });
    }

    let mut local: BTreeMap<NodeId, usize> = BTreeMap::new();
    for n in records
        .iter()
        .flat_map(|r| [r.dyad.initiator(), r.dyad.receiver()])
        .chain([query.initiator(), query.receiver()])
    {
        let next = local.len();
        local.entry(n).or_insert(next);
    }
    let ends: Vec<(usize, usize, bool)> = records
        .iter()
        .map(|r| (local[&r.dyad.initiator()], local[&r.dyad.receiver()], r.present))
        .collect();
    let (qp, qq) = (local[&query.initiator()], local[&query.receiver()]);
    let nodes = local.len();
    let alpha_sum: f64 = alpha.iter().sum();
    let psi_sum = psi_one + psi_zero;

    let mut z = vec![0usize; digits];
    let mut n = vec![0u32; nodes * k];
    let mut m1 = vec![0u32; k * k];
    let mut m0 = vec![0u32; k * k];
    let mut terms: Vec<(f64, f64)> = Vec::with_capacity(configurations as usize);
    loop {
        n.iter_mut().for_each(|c| *c = 0);
        m1.iter_mut().for_each(|c| *c = 0);
        m0.iter_mut().for_each(|c| *c = 0);
        for (i, &(p, q, y)) in ends.iter().enumerate() {
            let (g, h) = (z[2 * i], z[2 * i + 1]);
            n[p * k + g] += 1;
            n[q * k + h] += 1;
            if y {
                m1[g * k + h] += 1;
            } else {
                m0[g * k + h] += 1;
            }
        }

        let mut log_w = 0.0;
        for p in 0..nodes {
            let row = &n[p * k..(p + 1) * k];
            let total: u32 = row.iter().sum();
            log_w -= ln_rising(alpha_sum, total);
            for g in 0..k {
                log_w += ln_rising(alpha[g], row[g]);
            }
        }
        for b in 0..k * k {
            log_w += ln_rising(psi_one, m1[b]) + ln_rising(psi_zero, m0[b])
                - ln_rising(psi_sum, m1[b] + m0[b]);
        }

        let send = |g: usize| (n[qp * k + g] as f64 + alpha[g]) / (row_total(&n, qp, k) + alpha_sum);
        let recv = |h: usize| (n[qq * k + h] as f64 + alpha[h]) / (row_total(&n, qq, k) + alpha_sum);
        let mut pred = 0.0;
        for g in 0..k {
            for h in 0..k {
                let b = g * k + h;
                let link = (m1[b] as f64 + psi_one) / ((m1[b] + m0[b]) as f64 + psi_sum);
                pred += send(g) * recv(h) * link;
            }
        }
        terms.push((log_w, pred));

        // odometer increment
        let mut pos = 0;
        while pos < digits {
            z[pos] += 1;
            if z[pos] < k {
                break;
            }
            z[pos] = 0;
            pos += 1;
        }
        if pos == digits {
            break;
        }
    }

    let max = terms.iter().map(|t| t.0).fold(f64::NEG_INFINITY, f64::max);
    let (mut num, mut den) = (0.0, 0.0);
    for (lw, pred) in terms {
        let w = (lw - max).exp();
        num += w * pred;
        den += w;
    }
    Ok(num / den)
}

fn row_total(n: &[u32], p: usize, k: usize) -> f64 {
    n[p * k..(p + 1) * k].iter().sum::<u32>() as f64
}

/// A small named instance with its stored oracle value.
///
/// Text form, one `key = value` per line (`#` comments):
/// `alpha = a1,a2,...`, `psi = psi_one,psi_zero`, `query = from to`,
/// `expected = p` (optional) and one `record = from to value` per record.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleFixture {
    pub alpha: Vec<f64>,
    pub psi_one: f64,
    pub psi_zero: f64,
    pub records: Vec<(String, String, bool)>,
    pub query: (String, String),
    pub expected: Option<f64>,
}

impl OracleFixture {
    /// Records and query with node ids by first appearance.
    pub fn resolve(&self) -> (Vec<DyadRecord>, Dyad) {
        let mut ids: HashMap<String, u32> = HashMap::new();
        let mut id = |name: &str| -> u32 {
            let next = ids.len() as u32;
            *ids.entry(name.to_owned()).or_insert(next)
        };
        let records = self
            .records
            .iter()
            .map(|(a, b, y)| DyadRecord::new(Dyad::of(id(a), id(b)), *y, 1))
            .collect();
        let query = Dyad::of(id(&self.query.0), id(&self.query.1));
        (records, query)
    }

    pub fn compute(&self) -> Result<f64> {
        let (records, query) = self.resolve();
        exact_predictive(&records, &self.alpha, self.psi_one, self.psi_zero, query)
    }

    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let fail = |line: usize, msg: String| Error::Parse {
            path: origin.to_path_buf(),
            line,
            msg,
        };
        let nums = |line: usize, v: &str| -> Result<Vec<f64>> {
            v.split(',')
                .map(|x| x.trim().parse::<f64>().map_err(|_| fail(line, format!("bad number {x:?}"))))
                .collect()
        };
        let (mut alpha, mut psi, mut query, mut expected) = (None, None, None, None);
        let mut records = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let n = i + 1;
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| fail(n, "expected key = value".into()))?;
            let value = value.trim();
            let words: Vec<&str> = value.split_whitespace().collect();
            match key.trim() {
                "alpha" => alpha = Some(nums(n, value)?),
                "psi" => match nums(n, value)?[..] {
                    [a, b] => psi = Some((a, b)),
                    _ => return Err(fail(n, "psi needs two values".into())),
                },
                "query" => match words[..] {
                    [a, b] if a != b => query = Some((a.to_owned(), b.to_owned())),
                    _ => return Err(fail(n, "query needs two distinct nodes".into())),
                },
                "expected" => expected = Some(nums(n, value)?[0]),
                "record" => match words[..] {
                    [a, b, y @ ("0" | "1")] if a != b => {
                        records.push((a.to_owned(), b.to_owned(), y == "1"))
                    }
                    _ => return Err(fail(n, "record needs `from to 0|1`".into())),
                },
                other => return Err(fail(n, format!("unknown key {other:?}"))),
            }
        }
        let missing = |what: &str| Error::Data(format!("{}: missing {what}", origin.display()));
        let (psi_one, psi_zero) = psi.ok_or_else(|| missing("psi"))?;
        Ok(Self {
            alpha: alpha.ok_or_else(|| missing("alpha"))?,
            psi_one,
            psi_zero,
            records,
            query: query.ok_or_else(|| missing("query"))?,
            expected,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn to_text(&self) -> String {
        let join = |xs: &[f64]| xs.iter().map(f64::to_string).collect::<Vec<_>>().join(",");
        let mut out = String::new();
        let _ = writeln!(out, "alpha = {}", join(&self.alpha));
        let _ = writeln!(out, "psi = {}", join(&[self.psi_one, self.psi_zero]));
        let _ = writeln!(out, "query = {} {}", self.query.0, self.query.1);
        if let Some(e) = self.expected {
            let _ = writeln!(out, "expected = {e}");
        }
        for (a, b, y) in &self.records {
            let _ = writeln!(out, "record = {a} {b} {}", u8::from(*y));
        }
        out
    }
}
