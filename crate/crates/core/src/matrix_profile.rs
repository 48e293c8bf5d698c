//! Distance matrices and matrix profiles for discrete sequences.
//!
//! For a sequence of length `l` and window `w` there are `n = l - w + 1`
//! windows. `D[i][j]` is the Hamming distance between windows `i` and `j`,
//! except inside the exclusion zone `|i - j| < ceil(w / 2)`, where it keeps
//! the initial value `w` (the largest possible distance). The profile is the
//! row minimum of `D`.

use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{EventSequence, GroupedCorpus};
use crate::error::{Error, Result};
use crate::stats::{descriptive, mann_whitney_u, Alternative, UTestResult};

/// Window size for long team-activity style corpora.
pub const TEAM_WINDOW: usize = 20;
/// Window size for short action style corpora.
pub const ACTION_WINDOW: usize = 5;
/// Leading positions kept in aggregate profiles.
pub const DEFAULT_AGGREGATE_CUTOFF: usize = 1000;

/// Distance between two equal-length windows of encoded symbols.
pub trait WindowDistance: Sync {
    fn distance(&self, a: &[u32], b: &[u32]) -> u32;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Hamming;

impl WindowDistance for Hamming {
    fn distance(&self, a: &[u32], b: &[u32]) -> u32 {
        a.iter().zip(b).filter(|(x, y)| x != y).count() as u32
    }
}

/// Number of positions at which two equal-length windows differ.
pub fn hamming<T: PartialEq>(a: &[T], b: &[T]) -> Result<u32> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch { left: a.len(), right: b.len() });
    }
    Ok(a.iter().zip(b).filter(|(x, y)| x != y).count() as u32)
}

pub fn exclusion_radius(w: usize) -> usize {
    w.div_ceil(2)
}

fn window_count(seq: &EventSequence, w: usize) -> Result<usize> {
    if w == 0 {
        return Err(Error::InvalidParameter("window size must be at least 1".into()));
    }
    if seq.len() < w + 1 {
        return Err(Error::SequenceTooShort {
            id: seq.id().to_string(),
            length: seq.len(),
            required: w + 1,
        });
    }
    Ok(seq.len() - w + 1)
}

/// Dense symmetric `n x n` matrix of window distances.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceMatrix {
    n: usize,
    window: usize,
    radius: usize,
    cells: Vec<u32>,
}

impl DistanceMatrix {
    pub fn size(&self) -> usize {
        self.n
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.cells[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[u32] {
        &self.cells[i * self.n..(i + 1) * self.n]
    }

    fn set_pair(&mut self, i: usize, j: usize, d: u32) {
        self.cells[i * self.n + j] = d;
        self.cells[j * self.n + i] = d;
    }

    /// Plain CSV grid, one matrix row per line.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        for i in 0..self.n {
            let row: Vec<String> = self.row(i).iter().map(u32::to_string).collect();
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Walks every pair `(i, i + k)` with `k` in `offsets`, maintaining the
/// Hamming distance incrementally along each diagonal.
fn for_each_hamming_pair(
    codes: &[u32],
    w: usize,
    offsets: std::ops::Range<usize>,
    mut visit: impl FnMut(usize, usize, u32),
) {
    let n = codes.len() - w + 1;
    for k in offsets {
        let mut d = Hamming.distance(&codes[..w], &codes[k..k + w]);
        visit(0, k, d);
        for i in 1..n - k {
            d -= u32::from(codes[i - 1] != codes[i - 1 + k]);
            d += u32::from(codes[i + w - 1] != codes[i + w - 1 + k]);
            visit(i, i + k, d);
        }
    }
}

/// Hamming distance matrix of `seq` with the exclusion zone left at `w`.
pub fn distance_matrix(seq: &EventSequence, w: usize) -> Result<DistanceMatrix> {
    let n = window_count(seq, w)?;
    let radius = exclusion_radius(w);
    let mut matrix = DistanceMatrix {
        n,
        window: w,
        radius,
        cells: vec![w as u32; n * n],
    };
    let codes = seq.encode();
    for_each_hamming_pair(&codes, w, radius..n, |i, j, d| matrix.set_pair(i, j, d));
    Ok(matrix)
}

/// Distance matrix for an arbitrary window distance, computing each
/// unordered pair outside the exclusion zone once.
pub fn distance_matrix_with<D: WindowDistance>(seq: &EventSequence, w: usize, distance: &D) -> Result<DistanceMatrix> {
    let n = window_count(seq, w)?;
    let radius = exclusion_radius(w);
    let mut matrix = DistanceMatrix {
        n,
        window: w,
        radius,
        cells: vec![w as u32; n * n],
    };
    let codes = seq.encode();
    for i in 0..n {
        for j in (i + radius)..n {
            let d = distance.distance(&codes[i..i + w], &codes[j..j + w]).min(w as u32);
            matrix.set_pair(i, j, d);
        }
    }
    Ok(matrix)
}

/// Per-window distance to the nearest non-trivial match.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct MatrixProfile {
    pub values: Vec<u32>,
    pub window: usize,
}

impl MatrixProfile {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// First position holding the profile minimum.
    pub fn motif(&self) -> Option<(usize, u32)> {
        self.values
            .iter()
            .enumerate()
            .min_by_key(|&(i, v)| (*v, i))
            .map(|(i, v)| (i, *v))
    }

    /// First position holding the profile maximum.
    pub fn discord(&self) -> Option<(usize, u32)> {
        self.values
            .iter()
            .enumerate()
            .max_by_key(|&(i, v)| (*v, std::cmp::Reverse(i)))
            .map(|(i, v)| (i, *v))
    }
}

pub fn matrix_profile(matrix: &DistanceMatrix) -> MatrixProfile {
    let values = (0..matrix.n)
        .map(|i| matrix.row(i).iter().copied().min().unwrap_or(matrix.window as u32))
        .collect();
    MatrixProfile {
        values,
        window: matrix.window,
    }
}

/// Same profile as `matrix_profile(&distance_matrix(seq, w)?)` in `O(n)`
/// memory. Diagonals are split across worker threads.
pub fn streaming_profile(seq: &EventSequence, w: usize) -> Result<MatrixProfile> {
    let n = window_count(seq, w)?;
    let radius = exclusion_radius(w);
    let codes = seq.encode();
    let init = vec![w as u32; n];
    if radius >= n {
        return Ok(MatrixProfile { values: init, window: w });
    }
    // Chunks of diagonals; `min` is order-independent so the result is deterministic.
    let chunk = ((n - radius) / (4 * rayon::current_num_threads()).max(1)).max(16);
    let starts: Vec<usize> = (radius..n).step_by(chunk).collect();
    let values = starts
        .into_par_iter()
        .map(|start| {
            let mut local = vec![w as u32; n];
            for_each_hamming_pair(&codes, w, start..(start + chunk).min(n), |i, j, d| {
                local[i] = local[i].min(d);
                local[j] = local[j].min(d);
            });
            local
        })
        .reduce(
            || init.clone(),
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x = (*x).min(y));
                a
            },
        );
    Ok(MatrixProfile { values, window: w })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileStats {
    pub minimum: f64,
    pub maximum: f64,
    pub mean: f64,
    pub variance: f64,
}

impl ProfileStats {
    pub fn metric(&self, metric: ProfileMetric) -> f64 {
        match metric {
            ProfileMetric::Variance => self.variance,
            ProfileMetric::Mean => self.mean,
            ProfileMetric::Minimum => self.minimum,
            ProfileMetric::Maximum => self.maximum,
        }
    }
}

/// Population statistics of the profile values.
pub fn profile_stats(profile: &MatrixProfile) -> Result<ProfileStats> {
    let values: Vec<f64> = profile.values.iter().map(|&v| f64::from(v)).collect();
    let d = descriptive(&values)?;
    Ok(ProfileStats {
        minimum: d.min,
        maximum: d.max,
        mean: d.mean,
        variance: d.variance,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateProfile {
    pub mean: Vec<f64>,
    pub support: Vec<usize>,
}

impl AggregateProfile {
    pub fn len(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean.is_empty()
    }

    /// CSV `position,mean,support`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "position,mean,support")?;
        for (p, (m, s)) in self.mean.iter().zip(&self.support).enumerate() {
            writeln!(out, "{p},{m},{s}")?;
        }
        Ok(())
    }
}

/// Positionwise mean over the first `cutoff` positions, each averaging only
/// the profiles long enough to have that position.
pub fn aggregate_profiles(profiles: &[MatrixProfile], cutoff: usize) -> Result<AggregateProfile> {
    if profiles.is_empty() {
        return Err(Error::InvalidParameter("aggregate of zero profiles".into()));
    }
    let len = profiles.iter().map(MatrixProfile::len).max().unwrap_or(0).min(cutoff);
    let mut sums = vec![0u64; len];
    let mut support = vec![0usize; len];
    for profile in profiles {
        for (p, &v) in profile.values.iter().take(len).enumerate() {
            sums[p] += u64::from(v);
            support[p] += 1;
        }
    }
    let mean = sums.iter().zip(&support).map(|(&s, &c)| s as f64 / c as f64).collect();
    Ok(AggregateProfile { mean, support })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileMetric {
    Variance,
    Mean,
    Minimum,
    Maximum,
}

impl ProfileMetric {
    pub const ALL: [ProfileMetric; 4] = [Self::Variance, Self::Mean, Self::Minimum, Self::Maximum];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceProfile {
    pub id: String,
    pub group: String,
    #[serde(skip)]
    pub profile: MatrixProfile,
    pub stats: ProfileStats,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedSequence {
    pub id: String,
    pub group: String,
    pub length: usize,
}

/// Profiles of every sequence long enough for the window, in corpus order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusProfiles {
    pub window: usize,
    pub profiles: Vec<SequenceProfile>,
    pub skipped: Vec<SkippedSequence>,
}

impl CorpusProfiles {
    pub fn compute(corpus: &GroupedCorpus, w: usize) -> Result<Self> {
        if w == 0 {
            return Err(Error::InvalidParameter("window size must be at least 1".into()));
        }
        let (long, short): (Vec<&EventSequence>, Vec<&EventSequence>) =
            corpus.sequences().iter().partition(|s| s.len() > w);
        if long.is_empty() {
            return Err(Error::InvalidParameter(format!(
                "no sequence has the {} events needed for window {w}",
                w + 1
            )));
        }
        let profiles = long
            .par_iter()
            .map(|seq| {
                let profile = streaming_profile(seq, w)?;
                let stats = profile_stats(&profile)?;
                Ok(SequenceProfile {
                    id: seq.id().to_string(),
                    group: seq.group().to_string(),
                    profile,
                    stats,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let skipped = short
            .into_iter()
            .map(|s| SkippedSequence {
                id: s.id().to_string(),
                group: s.group().to_string(),
                length: s.len(),
            })
            .collect();
        Ok(Self { window: w, profiles, skipped })
    }

    pub fn group<'a>(&'a self, group: &'a str) -> impl Iterator<Item = &'a SequenceProfile> + 'a {
        self.profiles.iter().filter(move |p| p.group == group)
    }

    /// CSV `seq_id,position,value` for every analyzed sequence.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "seq_id,position,value")?;
        for p in &self.profiles {
            let id = crate::vectorize::csv_field(&p.id);
            for (pos, v) in p.profile.values.iter().enumerate() {
                writeln!(out, "{id},{pos},{v}")?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupReport {
    pub group: String,
    pub analyzed: usize,
    /// Mean over the group's sequences of each profile statistic.
    pub mean_stats: ProfileStats,
    pub sequences: Vec<SequenceProfile>,
    pub aggregate: AggregateProfile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricComparison {
    pub metric: ProfileMetric,
    pub group_a_mean: f64,
    pub group_b_mean: f64,
    pub test: UTestResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairComparison {
    pub group_a: String,
    pub group_b: String,
    pub metrics: Vec<MetricComparison>,
}

impl PairComparison {
    pub fn metric(&self, metric: ProfileMetric) -> &MetricComparison {
        self.metrics
            .iter()
            .find(|m| m.metric == metric)
            .expect("every metric is compared")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub window: usize,
    pub aggregate_cutoff: usize,
    pub groups: Vec<GroupReport>,
    pub comparisons: Vec<PairComparison>,
    pub skipped: Vec<SkippedSequence>,
}

impl ComparisonReport {
    pub fn group(&self, name: &str) -> Option<&GroupReport> {
        self.groups.iter().find(|g| g.group == name)
    }
}

fn group_report(profiles: &CorpusProfiles, group: &str, cutoff: usize) -> Result<GroupReport> {
    let members: Vec<&SequenceProfile> = profiles.group(group).collect();
    if members.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "group `{group}` has no sequence long enough for window {}",
            profiles.window
        )));
    }
    let mean_of = |metric: ProfileMetric| {
        members.iter().map(|p| p.stats.metric(metric)).sum::<f64>() / members.len() as f64
    };
    let curves: Vec<MatrixProfile> = members.iter().map(|p| p.profile.clone()).collect();
    Ok(GroupReport {
        group: group.to_string(),
        analyzed: members.len(),
        mean_stats: ProfileStats {
            minimum: mean_of(ProfileMetric::Minimum),
            maximum: mean_of(ProfileMetric::Maximum),
            mean: mean_of(ProfileMetric::Mean),
            variance: mean_of(ProfileMetric::Variance),
        },
        sequences: members.into_iter().cloned().collect(),
        aggregate: aggregate_profiles(&curves, cutoff)?,
    })
}

fn compare_groups(a: &GroupReport, b: &GroupReport) -> Result<PairComparison> {
    let metrics = ProfileMetric::ALL
        .iter()
        .map(|&metric| {
            let xs: Vec<f64> = a.sequences.iter().map(|p| p.stats.metric(metric)).collect();
            let ys: Vec<f64> = b.sequences.iter().map(|p| p.stats.metric(metric)).collect();
            Ok(MetricComparison {
                metric,
                group_a_mean: a.mean_stats.metric(metric),
                group_b_mean: b.mean_stats.metric(metric),
                test: mann_whitney_u(&xs, &ys, Alternative::TwoSided)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PairComparison {
        group_a: a.group.clone(),
        group_b: b.group.clone(),
        metrics,
    })
}

/// Profiles every sequence and compares every pair of groups on the four
/// profile statistics. Needs at least two groups.
pub fn pairwise_profile_comparison(corpus: &GroupedCorpus, w: usize, cutoff: usize) -> Result<ComparisonReport> {
    if corpus.groups().len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "profile comparison needs at least two groups, found {}",
            corpus.groups().len()
        )));
    }
    let profiles = CorpusProfiles::compute(corpus, w)?;
    comparison_from_profiles(&profiles, corpus.groups().iter().map(String::as_str), cutoff)
}

/// Two-group form of [`pairwise_profile_comparison`].
pub fn group_profile_comparison(corpus: &GroupedCorpus, w: usize, cutoff: usize) -> Result<ComparisonReport> {
    if corpus.groups().len() != 2 {
        return Err(Error::InvalidParameter(format!(
            "group comparison needs exactly two groups, found {}",
            corpus.groups().len()
        )));
    }
    pairwise_profile_comparison(corpus, w, cutoff)
}

/// Builds group reports for `groups` (sorted) and compares all pairs.
pub fn comparison_from_profiles<'a>(
    profiles: &CorpusProfiles,
    groups: impl IntoIterator<Item = &'a str>,
    cutoff: usize,
) -> Result<ComparisonReport> {
    let names: BTreeMap<&str, ()> = groups.into_iter().map(|g| (g, ())).collect();
    let reports = names
        .keys()
        .map(|g| group_report(profiles, g, cutoff))
        .collect::<Result<Vec<_>>>()?;
    let mut comparisons = Vec::new();
    for i in 0..reports.len() {
        for j in i + 1..reports.len() {
            comparisons.push(compare_groups(&reports[i], &reports[j])?);
        }
    }
    Ok(ComparisonReport {
        window: profiles.window,
        aggregate_cutoff: cutoff,
        groups: reports,
        comparisons,
        skipped: profiles.skipped.clone(),
    })
}
