//! Whitespace-separated edge lists: `interval node_from node_to value`.
//!
//! Blank lines and anything after `#` are ignored. Intervals are positive
//! integers and values are `0` or `1`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{NamedRecord, ObservationStream};
use crate::error::{Error, Result};

pub fn load_edge_list(path: impl AsRef<Path>) -> Result<ObservationStream> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_edge_list(&text, path)
}

/// Parses edge-list text; `origin` is only used in error messages.
pub fn parse_edge_list(text: &str, origin: &Path) -> Result<ObservationStream> {
    let mut named = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fail = |msg: String| Error::Parse {
            path: origin.to_path_buf(),
            line: i + 1,
            msg,
        };
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [interval, from, to, value] = fields[..] else {
            return Err(fail(format!("expected 4 fields, found {}", fields.len())));
        };
        let interval: u32 = match interval.parse() {
            Ok(t) if t >= 1 => t,
            _ => return Err(fail(format!("interval must be a positive integer, got {interval:?}"))),
        };
        let present = match value {
            "0" => false,
            "1" => true,
            other => return Err(fail(format!("value must be 0 or 1, got {other:?}"))),
        };
        if from == to {
            return Err(fail(format!("self-loop on node {from:?}")));
        }
        named.push(NamedRecord {
            interval,
            from: from.to_owned(),
            to: to.to_owned(),
            present,
        });
    }
    ObservationStream::from_named(named)
}

pub fn write_edge_list(stream: &ObservationStream) -> String {
    let mut out = String::from("# interval node_from node_to value\n");
    let nodes = stream.nodes();
    for r in stream.records() {
        let _ = writeln!(
            out,
            "{} {} {} {}",
            r.interval,
            nodes.name(r.dyad.initiator()),
            nodes.name(r.dyad.receiver()),
            u8::from(r.present)
        );
    }
    out
}

pub fn save_edge_list(stream: &ObservationStream, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, write_edge_list(stream)).map_err(|e| Error::io(path, e))
}
