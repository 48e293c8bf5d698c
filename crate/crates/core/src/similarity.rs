//! Cosine distance, two-group silhouette score, and silhouette parameter sweeps.

use std::fmt;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::GroupedCorpus;
use crate::error::{Error, Result};
use crate::vectorize::{vectorize, FeatureKind, FeatureMatrix, VectorMode};

/// `1 - cos(u, v)`, clamped to `[0, 2]`. Any all-zero vector is at distance 1.
pub fn cosine_distance(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::LengthMismatch { left: u.len(), right: v.len() });
    }
    Ok(cosine_with_norms(u, v, squared_norm(u), squared_norm(v)))
}

fn squared_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

// Takes squared norms: sqrt(s * s) == s exactly, so identical vectors get
// distance exactly 0.
fn cosine_with_norms(u: &[f64], v: &[f64], su: f64, sv: f64) -> f64 {
    if su == 0.0 || sv == 0.0 {
        return 1.0;
    }
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    (1.0 - dot / (su * sv).sqrt()).clamp(0.0, 2.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepParams {
    pub window: Option<usize>,
    pub max_size: Option<usize>,
    pub mode: Option<VectorMode>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SilhouetteResult {
    pub score: f64,
    pub per_point: Vec<f64>,
    pub params: SweepParams,
}

/// Mean silhouette of a matrix holding exactly two groups of at least two
/// rows each, using cosine distance.
///
/// For row `i`, `a` is its mean distance to the other rows of its group and
/// `b` its mean distance to the rows of the other group; `s = (b - a) /
/// max(a, b)`, or 0 when both are 0.
pub fn silhouette_score(matrix: &FeatureMatrix) -> Result<SilhouetteResult> {
    let params = SweepParams {
        window: matrix.window,
        max_size: matrix.max_size,
        mode: match matrix.kind {
            FeatureKind::KGram(mode) => Some(mode),
            FeatureKind::Length => None,
        },
    };
    let per_point = silhouette_values(&matrix.rows, &matrix.labels)?;
    let score = per_point.iter().sum::<f64>() / per_point.len() as f64;
    Ok(SilhouetteResult { score, per_point, params })
}

/// Per-point silhouette values for rows labelled with exactly two groups.
pub fn silhouette_values(rows: &[Vec<f64>], labels: &[String]) -> Result<Vec<f64>> {
    if rows.len() != labels.len() {
        return Err(Error::LengthMismatch { left: rows.len(), right: labels.len() });
    }
    let mut groups: Vec<&str> = labels.iter().map(String::as_str).collect();
    groups.sort_unstable();
    groups.dedup();
    if groups.len() != 2 {
        return Err(Error::InvalidParameter(format!(
            "silhouette needs exactly two groups, found {}",
            groups.len()
        )));
    }
    let member: Vec<bool> = labels.iter().map(|l| l == groups[1]).collect();
    let sizes = [member.iter().filter(|m| !**m).count(), member.iter().filter(|m| **m).count()];
    if sizes.iter().any(|&n| n < 2) {
        return Err(Error::InvalidParameter("each group needs at least two members".into()));
    }
    if let Some(width) = rows.first().map(Vec::len) {
        if let Some(bad) = rows.iter().find(|r| r.len() != width) {
            return Err(Error::LengthMismatch { left: width, right: bad.len() });
        }
    }
    let norms: Vec<f64> = rows.iter().map(|r| squared_norm(r)).collect();

    Ok((0..rows.len())
        .into_par_iter()
        .map(|i| {
            let mut sums = [0.0f64; 2];
            for j in 0..rows.len() {
                if j != i {
                    sums[member[j] as usize] += cosine_with_norms(&rows[i], &rows[j], norms[i], norms[j]);
                }
            }
            let own = member[i] as usize;
            let a = sums[own] / (sizes[own] - 1) as f64;
            let b = sums[1 - own] / sizes[1 - own] as f64;
            let denom = a.max(b);
            if denom == 0.0 {
                0.0
            } else {
                (b - a) / denom
            }
        })
        .collect())
}

/// Requested vocabulary cap for one sweep row. Serialized as the number or `all`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum VectorLength {
    Top(usize),
    All,
}

impl VectorLength {
    pub fn as_cap(self) -> Option<usize> {
        match self {
            Self::Top(n) => Some(n),
            Self::All => None,
        }
    }
}

impl fmt::Display for VectorLength {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Top(n) => write!(f, "{n}"),
            Self::All => f.write_str("all"),
        }
    }
}

impl From<VectorLength> for String {
    fn from(value: VectorLength) -> Self {
        value.to_string()
    }
}

impl TryFrom<String> for VectorLength {
    type Error = Error;

    fn try_from(value: String) -> Result<Self> {
        value.parse()
    }
}

impl std::str::FromStr for VectorLength {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "all" {
            return Ok(Self::All);
        }
        match s.parse::<usize>() {
            Ok(n) if n > 0 => Ok(Self::Top(n)),
            _ => Err(Error::InvalidParameter(format!("invalid vector length `{s}`"))),
        }
    }
}

pub const DEFAULT_SWEEP_WINDOWS: [usize; 4] = [2, 3, 4, 5];
pub const DEFAULT_SWEEP_LENGTHS: [VectorLength; 3] =
    [VectorLength::Top(10), VectorLength::Top(100), VectorLength::Top(1000)];
pub const DEFAULT_SWEEP_MODES: [VectorMode; 2] = [VectorMode::TfIsf, VectorMode::Binary];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub w: usize,
    pub vector_length: VectorLength,
    pub mode: VectorMode,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    /// Highest-scoring row; the first one on ties.
    pub fn best(&self) -> Option<&SweepRow> {
        self.rows
            .iter()
            .reduce(|best, row| if row.score > best.score { row } else { best })
    }

    pub fn score(&self, w: usize, vector_length: VectorLength, mode: VectorMode) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.w == w && r.vector_length == vector_length && r.mode == mode)
            .map(|r| r.score)
    }

    /// CSV `w,vector_length,mode,score`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "w,vector_length,mode,score")?;
        for r in &self.rows {
            writeln!(out, "{},{},{},{}", r.w, r.vector_length, r.mode, r.score)?;
        }
        Ok(())
    }
}

/// Silhouette score for every (window, length, mode) combination, each on a
/// vocabulary built afresh from the two selected groups.
pub fn silhouette_sweep(
    corpus: &GroupedCorpus,
    group_pair: (&str, &str),
    windows: &[usize],
    lengths: &[VectorLength],
    modes: &[VectorMode],
) -> Result<SweepTable> {
    let (a, b) = group_pair;
    if a == b {
        return Err(Error::InvalidParameter("silhouette needs two distinct groups".into()));
    }
    for g in [a, b] {
        if !corpus.groups().contains(g) {
            return Err(Error::InvalidParameter(format!("group `{g}` not present in corpus")));
        }
    }
    let pair = corpus.restrict_to_groups(&[a, b]);
    let mut rows = Vec::with_capacity(windows.len() * lengths.len() * modes.len());
    for &w in windows {
        for &vector_length in lengths {
            for &mode in modes {
                let matrix = vectorize(&pair, w, vector_length.as_cap(), mode)?;
                let score = silhouette_score(&matrix)?.score;
                rows.push(SweepRow { w, vector_length, mode, score });
            }
        }
    }
    Ok(SweepTable { rows })
}
