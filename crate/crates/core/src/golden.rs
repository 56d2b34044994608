//! Published reference counts for totally real cubic fields with
//! discriminant below `2 * 10^6`, embedded from `data/reference_tables.csv`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

pub const REFERENCE_MAX_DISC: u64 = 2_000_000;

const RAW: &str = include_str!("../data/reference_tables.csv");

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReferenceTables {
    /// Counts per residue class, keyed by modulus.
    pub progressions: BTreeMap<u64, Vec<u64>>,
    pub total: u64,
}

fn parse_err(line: usize, reason: &str) -> Error {
    Error::Internal(format!("reference table line {line}: {reason}"))
}

pub fn reference_tables() -> Result<ReferenceTables> {
    let mut progressions: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
    let mut total = None;
    for (i, line) in RAW.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let [kind, modulus, residue, count] = fields[..] else {
            return Err(parse_err(i + 1, "expected four fields"));
        };
        let num = |s: &str| s.parse::<u64>().map_err(|_| parse_err(i + 1, "bad integer"));
        let (modulus, residue, count) = (num(modulus)?, num(residue)?, num(count)?);
        match kind {
            "progression" => {
                let row = progressions.entry(modulus).or_default();
                if residue as usize != row.len() {
                    return Err(parse_err(i + 1, "residues out of order"));
                }
                row.push(count);
            }
            "total" => total = Some(count),
            _ => return Err(parse_err(i + 1, "unknown kind")),
        }
    }
    let total = total.ok_or_else(|| parse_err(0, "missing total"))?;
    for (m, row) in &progressions {
        if row.len() as u64 != *m || row.iter().sum::<u64>() != total {
            return Err(parse_err(0, "progression row inconsistent with total"));
        }
    }
    Ok(ReferenceTables { progressions, total })
}
