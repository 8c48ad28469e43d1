//! Line-oriented text formats for couplings, distributions and kernels.
//!
//! ```text
//! #redi coupling v1
//! n=2 d=2 mask=none
//! 0 0 | 0 0 | 0.125
//! ```
//!
//! Writers emit canonical order and shortest round-trip decimals; readers accept
//! any row order and renormalize.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::coupling::{CouplingEntry, PairCoupling};
use crate::dist::{DenseDistribution, SparseDistribution};
use crate::error::{Error, Result};
use crate::flow::DenseKernel;
use crate::space::{SequenceState, StateSpace, Token};

pub const COUPLING_HEADER: &str = "#redi coupling v1";
pub const DIST_HEADER: &str = "#redi dist v1";
pub const KERNEL_HEADER: &str = "#redi kernel v1";

fn space_line(space: &StateSpace) -> String {
    space.to_string()
}

fn parse_space_line(line: &str, lineno: usize) -> Result<StateSpace> {
    let mut n = None;
    let mut d = None;
    let mut mask = None;
    for field in line.split_whitespace() {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| Error::parse(lineno, format!("expected key=value, got '{field}'")))?;
        match key {
            "n" => n = Some(value.parse::<usize>().map_err(|e| Error::parse(lineno, e))?),
            "d" => d = Some(value.parse::<usize>().map_err(|e| Error::parse(lineno, e))?),
            "mask" => {
                mask = Some(match value {
                    "none" => None,
                    v => Some(v.parse::<Token>().map_err(|e| Error::parse(lineno, e))?),
                })
            }
            other => return Err(Error::parse(lineno, format!("unknown header key '{other}'"))),
        }
    }
    match (n, d, mask) {
        (Some(n), Some(d), Some(mask)) => StateSpace::with_mask(n, d, mask),
        _ => Err(Error::parse(lineno, "header must define n, d and mask")),
    }
}

fn parse_tokens(field: &str, space: &StateSpace, lineno: usize) -> Result<SequenceState> {
    let tokens = field
        .split_whitespace()
        .map(|t| {
            t.parse::<Token>()
                .map_err(|e| Error::parse(lineno, format!("bad token '{t}': {e}")))
        })
        .collect::<Result<Vec<_>>>()?;
    space.state(tokens).map_err(|e| Error::parse(lineno, e))
}

fn parse_weight(field: &str, lineno: usize) -> Result<f64> {
    let w = field
        .trim()
        .parse::<f64>()
        .map_err(|e| Error::parse(lineno, format!("bad weight '{}': {e}", field.trim())))?;
    if !(w >= 0.0) || !w.is_finite() {
        return Err(Error::parse(lineno, format!("weight {w} must be nonnegative")));
    }
    Ok(w)
}

/// Splits a document into its space header and `(line number, data line)` rows.
fn split_document<'a>(text: &'a str, magic: &str) -> Result<(StateSpace, Vec<(usize, &'a str)>)> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    match lines.next() {
        Some((_, l)) if l.trim() == magic => {}
        Some((i, l)) => return Err(Error::parse(i, format!("expected '{magic}', got '{l}'"))),
        None => return Err(Error::parse(1, "empty file")),
    }
    let (lineno, header) = lines.next().ok_or_else(|| Error::parse(2, "missing space header"))?;
    let space = parse_space_line(header, lineno)?;
    let rows = lines.filter(|(_, l)| !l.trim().is_empty()).collect();
    Ok((space, rows))
}

pub fn format_coupling(c: &PairCoupling) -> String {
    let mut out = format!("{COUPLING_HEADER}\n{}\n", space_line(c.space()));
    for e in c.entries() {
        writeln!(out, "{} | {} | {}", e.x0, e.x1, e.weight).unwrap();
    }
    out
}

pub fn parse_coupling(text: &str) -> Result<PairCoupling> {
    let (space, rows) = split_document(text, COUPLING_HEADER)?;
    let mut entries = Vec::with_capacity(rows.len());
    for (lineno, line) in rows {
        let fields: Vec<&str> = line.split('|').collect();
        if fields.len() != 3 {
            return Err(Error::parse(lineno, "expected '<x0> | <x1> | <weight>'"));
        }
        entries.push(CouplingEntry::new(
            parse_tokens(fields[0], &space, lineno)?,
            parse_tokens(fields[1], &space, lineno)?,
            parse_weight(fields[2], lineno)?,
        ));
    }
    PairCoupling::from_entries(space, entries)
}

pub fn format_sparse_dist(d: &SparseDistribution) -> String {
    let mut out = format!("{DIST_HEADER}\n{}\n", space_line(d.space()));
    for (s, p) in d.iter() {
        writeln!(out, "{s} | {p}").unwrap();
    }
    out
}

/// Writes every state of the space, including zero-mass ones.
pub fn format_dense_dist(d: &DenseDistribution) -> String {
    let space = d.space();
    let mut out = format!("{DIST_HEADER}\n{}\n", space_line(space));
    for (i, p) in d.weights().iter().enumerate() {
        writeln!(out, "{} | {p}", space.state_at(i)).unwrap();
    }
    out
}

pub fn parse_dist(text: &str) -> Result<SparseDistribution> {
    let (space, rows) = split_document(text, DIST_HEADER)?;
    let mut weights = Vec::with_capacity(rows.len());
    for (lineno, line) in rows {
        let (state, w) = line
            .split_once('|')
            .ok_or_else(|| Error::parse(lineno, "expected '<tokens> | <weight>'"))?;
        weights.push((parse_tokens(state, &space, lineno)?, parse_weight(w, lineno)?));
    }
    SparseDistribution::from_weights(space, weights)
}

pub fn format_kernel(k: &DenseKernel) -> String {
    let space = k.space();
    let mut out = format!("{KERNEL_HEADER}\n{}\n", space_line(space));
    for (x0, row) in k.rows() {
        for (j, &p) in row.iter().enumerate() {
            if p > 0.0 {
                writeln!(out, "{x0} | {} | {p}", space.state_at(j)).unwrap();
            }
        }
    }
    out
}

pub fn parse_kernel(text: &str) -> Result<DenseKernel> {
    let (space, rows) = split_document(text, KERNEL_HEADER)?;
    let size = space.require_dense()?;
    let mut table: BTreeMap<SequenceState, Vec<f64>> = BTreeMap::new();
    for (lineno, line) in rows {
        let fields: Vec<&str> = line.split('|').collect();
        if fields.len() != 3 {
            return Err(Error::parse(lineno, "expected '<x0> | <x1> | <prob>'"));
        }
        let x0 = parse_tokens(fields[0], &space, lineno)?;
        let x1 = parse_tokens(fields[1], &space, lineno)?;
        let p = parse_weight(fields[2], lineno)?;
        table.entry(x0).or_insert_with(|| vec![0.0; size])[space.index_of(&x1)] += p;
    }
    for row in table.values_mut() {
        let total: f64 = row.iter().sum();
        if !(total > 0.0) {
            return Err(Error::Validation("kernel row has zero mass".into()));
        }
        if (total - 1.0).abs() > 1e-12 {
            row.iter_mut().for_each(|p| *p /= total);
        }
    }
    DenseKernel::from_rows(space, table)
}

pub fn read_coupling(path: &Path) -> Result<PairCoupling> {
    parse_coupling(&fs::read_to_string(path)?)
}

pub fn write_coupling(path: &Path, c: &PairCoupling) -> Result<()> {
    fs::write(path, format_coupling(c))?;
    Ok(())
}

pub fn read_dist(path: &Path) -> Result<SparseDistribution> {
    parse_dist(&fs::read_to_string(path)?)
}

pub fn write_dist(path: &Path, d: &SparseDistribution) -> Result<()> {
    fs::write(path, format_sparse_dist(d))?;
    Ok(())
}

pub fn read_kernel(path: &Path) -> Result<DenseKernel> {
    parse_kernel(&fs::read_to_string(path)?)
}

pub fn write_kernel(path: &Path, k: &DenseKernel) -> Result<()> {
    fs::write(path, format_kernel(k))?;
    Ok(())
}
