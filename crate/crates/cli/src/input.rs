//! Input parsing: inline comma-separated distributions, named arrays from a
//! JSON document, row-wise reduction instances, and injection files.
//! Everything is validated; nothing is renormalized.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use dcs_core::Pmf;

pub type InputResult<T> = Result<T, String>;

/// Named PMF arrays loaded from `--pmf-file`; when present, `--p`/`--q`/`--r`
/// take names instead of inline values.
pub struct PmfSource {
    named: Option<BTreeMap<String, Vec<f64>>>,
}

impl PmfSource {
    pub fn inline() -> Self {
        Self { named: None }
    }

    pub fn from_file(path: &Path) -> InputResult<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| format!("cannot read pmf file {}: {e}", path.display()))?;
        let named: BTreeMap<String, Vec<f64>> = serde_json::from_str(&text)
            .map_err(|e| format!("pmf file {}: expected an object of name -> array: {e}", path.display()))?;
        Ok(Self { named: Some(named) })
    }

    pub fn resolve(&self, label: &str, arg: &str, sum_tolerance: f64) -> InputResult<Pmf> {
        let raw = match &self.named {
            Some(named) => named
                .get(arg)
                .cloned()
                .ok_or_else(|| format!("pmf file has no entry named {arg:?} (for --{label})"))?,
            None => parse_values(arg).map_err(|e| format!("--{label}: {e}"))?,
        };
        Pmf::new(raw, sum_tolerance).map_err(|e| format!("--{label} ({arg}): {e}"))
    }
}

fn parse_values(text: &str) -> InputResult<Vec<f64>> {
    text.split(',')
        .map(|part| {
            let part = part.trim();
            part.parse::<f64>()
                .map_err(|_| format!("entry {part:?} is not a number"))
        })
        .collect()
}

/// A row-wise list of exactly three values, e.g. `0.5,0.1,0.2`.
pub fn parse_row(label: &str, text: &str) -> InputResult<[f64; 3]> {
    let values = parse_values(text).map_err(|e| format!("--{label}: {e}"))?;
    values
        .try_into()
        .map_err(|v: Vec<f64>| format!("--{label}: expected exactly 3 values, got {}", v.len()))
}

/// Injection file: a JSON array of `[P, Q, R]` triples.
pub fn load_injection(path: &Path, sum_tolerance: f64) -> InputResult<Vec<(Pmf, Pmf, Pmf)>> {
    let text = fs::read_to_string(path)
        .map_err(|e| format!("cannot read injection file {}: {e}", path.display()))?;
    let raw: Vec<[Vec<f64>; 3]> = serde_json::from_str(&text)
        .map_err(|e| format!("injection file {}: expected [[P,Q,R], ...]: {e}", path.display()))?;
    raw.into_iter()
        .enumerate()
        .map(|(i, [p, q, r])| {
            let build = |name: &str, values: Vec<f64>| {
                Pmf::new(values, sum_tolerance)
                    .map_err(|e| format!("injection entry {i}, {name}: {e}"))
            };
            Ok((build("P", p)?, build("Q", q)?, build("R", r)?))
        })
        .collect()
}
