//! K-gram extraction and fixed-length vectorization of sequences.
//!
//! A sequence of length `l` yields `l - w + 1` overlapping windows of size
//! `w`. The vocabulary ranks windows by their total count over the corpus.
//! Vectors are either TF-ISF weighted (`count * ln(N / N_j)`, where `N_j` is
//! the number of sequences containing k-gram `j`) or binary presence flags.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::corpus::{EventSequence, GroupedCorpus, Symbol};
use crate::error::{Error, Result};

/// A window of exactly `w` consecutive symbols.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct KGram(Vec<Symbol>);

impl KGram {
    pub fn symbols(&self) -> &[Symbol] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl From<&[Symbol]> for KGram {
    fn from(window: &[Symbol]) -> Self {
        Self(window.to_vec())
    }
}

// Hash and Eq agree with the underlying slice, so lookups need no allocation.
impl std::borrow::Borrow<[Symbol]> for KGram {
    fn borrow(&self) -> &[Symbol] {
        &self.0
    }
}

/// Symbols joined with `|`.
impl fmt::Display for KGram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("|")?;
            }
            f.write_str(s.as_str())?;
        }
        Ok(())
    }
}

fn check_window(w: usize) -> Result<()> {
    if w == 0 {
        return Err(Error::InvalidParameter("window size must be at least 1".into()));
    }
    Ok(())
}

/// All windows of size `w`, the i-th starting at position i.
pub fn extract_kgrams(seq: &EventSequence, w: usize) -> Result<Vec<KGram>> {
    check_window(w)?;
    if w > seq.len() {
        return Err(Error::WindowTooLong { window: w, length: seq.len() });
    }
    Ok(seq.events().windows(w).map(KGram::from).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VectorMode {
    TfIsf,
    Binary,
}

impl fmt::Display for VectorMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::TfIsf => "tf_isf",
            Self::Binary => "binary",
        })
    }
}

impl std::str::FromStr for VectorMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tf_isf" => Ok(Self::TfIsf),
            "binary" => Ok(Self::Binary),
            other => Err(Error::InvalidParameter(format!("unknown vector mode `{other}`"))),
        }
    }
}

/// Ordered k-gram vocabulary, most frequent first.
#[derive(Debug, Clone, PartialEq)]
pub struct KGramVocabulary {
    window: usize,
    entries: Vec<KGram>,
    counts: Vec<u64>,
    index: HashMap<KGram, usize>,
    skipped: Vec<String>,
}

impl KGramVocabulary {
    pub fn window(&self) -> usize {
        self.window
    }

    pub fn entries(&self) -> &[KGram] {
        &self.entries
    }

    /// Corpus-wide occurrence count of each entry.
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn position(&self, kgram: &KGram) -> Option<usize> {
        self.index.get(kgram).copied()
    }

    /// Ids of the sequences that were shorter than the window.
    pub fn skipped(&self) -> &[String] {
        &self.skipped
    }

    fn position_of(&self, window: &[Symbol]) -> Option<usize> {
        self.index.get(window).copied()
    }
}

/// Ranks every distinct k-gram by total count (ties: lexicographic on the
/// symbol tokens) and keeps the first `max_size`, or all when `None`.
pub fn build_vocabulary(corpus: &GroupedCorpus, w: usize, max_size: Option<usize>) -> Result<KGramVocabulary> {
    check_window(w)?;
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if max_size == Some(0) {
        return Err(Error::InvalidParameter("vector length must be at least 1".into()));
    }
    let mut counts: HashMap<&[Symbol], u64> = HashMap::new();
    let mut skipped = Vec::new();
    for seq in corpus.sequences() {
        if seq.len() < w {
            skipped.push(seq.id().to_string());
            continue;
        }
        for window in seq.events().windows(w) {
            *counts.entry(window).or_insert(0) += 1;
        }
    }
    if !skipped.is_empty() {
        log::warn!("{} sequence(s) shorter than window {w} contribute no k-grams", skipped.len());
    }
    if counts.is_empty() {
        return Err(Error::EmptyVocabulary { window: w });
    }
    let mut ranked: Vec<(&[Symbol], u64)> = counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    if let Some(limit) = max_size {
        ranked.truncate(limit);
    }
    let entries: Vec<KGram> = ranked.iter().map(|(k, _)| KGram::from(*k)).collect();
    let index = entries.iter().enumerate().map(|(i, k)| (k.clone(), i)).collect();
    Ok(KGramVocabulary {
        window: w,
        counts: ranked.iter().map(|(_, c)| *c).collect(),
        entries,
        index,
        skipped,
    })
}

/// Raw window counts of `seq` against the vocabulary. A sequence shorter
/// than the window gets the zero vector.
pub fn term_frequency(seq: &EventSequence, vocab: &KGramVocabulary) -> Vec<u32> {
    let mut tf = vec![0u32; vocab.len()];
    if seq.len() < vocab.window {
        log::warn!("sequence `{}` is shorter than window {}; using a zero vector", seq.id(), vocab.window);
        return tf;
    }
    for window in seq.events().windows(vocab.window) {
        if let Some(j) = vocab.position_of(window) {
            tf[j] += 1;
        }
    }
    tf
}

/// `ln(N / N_j)` per vocabulary entry.
pub fn inverse_sequence_frequency(corpus: &GroupedCorpus, vocab: &KGramVocabulary) -> Result<Vec<f64>> {
    let mut containing = vec![0usize; vocab.len()];
    for seq in corpus.sequences() {
        if seq.len() < vocab.window {
            continue;
        }
        let present: HashSet<usize> = seq
            .events()
            .windows(vocab.window)
            .filter_map(|w| vocab.position_of(w))
            .collect();
        for j in present {
            containing[j] += 1;
        }
    }
    let n = corpus.len() as f64;
    containing
        .iter()
        .zip(vocab.entries())
        .map(|(&nj, kgram)| {
            if nj == 0 {
                return Err(Error::Inconsistent(format!("k-gram `{kgram}` occurs in no sequence")));
            }
            Ok((n / nj as f64).ln())
        })
        .collect()
}

/// One row per sequence, one column per vocabulary entry (or per feature).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub ids: Vec<String>,
    pub labels: Vec<String>,
    pub kind: FeatureKind,
    /// Window size, for k-gram features.
    pub window: Option<usize>,
    /// Requested vocabulary cap, for k-gram features.
    pub max_size: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    KGram(VectorMode),
    Length,
}

impl FeatureMatrix {
    pub fn width(&self) -> usize {
        self.columns.len()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// CSV with a `group,id` prefix followed by one column per feature.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        write!(out, "group,id")?;
        for c in &self.columns {
            write!(out, ",{}", csv_field(c))?;
        }
        writeln!(out)?;
        for ((row, id), label) in self.rows.iter().zip(&self.ids).zip(&self.labels) {
            write!(out, "{},{}", csv_field(label), csv_field(id))?;
            for v in row {
                write!(out, ",{v}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Quotes a CSV field when it contains a delimiter, quote, or line break.
pub fn csv_field(field: &str) -> std::borrow::Cow<'_, str> {
    if field.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", field.replace('"', "\"\"")).into()
    } else {
        field.into()
    }
}

/// Vocabulary plus ISF weights fitted on one corpus, applicable to any other.
#[derive(Debug, Clone, PartialEq)]
pub struct KGramVectorizer {
    vocab: KGramVocabulary,
    isf: Vec<f64>,
    mode: VectorMode,
    max_size: Option<usize>,
}

impl KGramVectorizer {
    pub fn fit(corpus: &GroupedCorpus, w: usize, max_size: Option<usize>, mode: VectorMode) -> Result<Self> {
        let vocab = build_vocabulary(corpus, w, max_size)?;
        let isf = inverse_sequence_frequency(corpus, &vocab)?;
        Ok(Self { vocab, isf, mode, max_size })
    }

    pub fn vocabulary(&self) -> &KGramVocabulary {
        &self.vocab
    }

    pub fn isf(&self) -> &[f64] {
        &self.isf
    }

    pub fn vector(&self, seq: &EventSequence) -> Vec<f64> {
        let tf = term_frequency(seq, &self.vocab);
        match self.mode {
            VectorMode::TfIsf => tf.iter().zip(&self.isf).map(|(&c, &w)| f64::from(c) * w).collect(),
            VectorMode::Binary => tf.iter().map(|&c| if c > 0 { 1.0 } else { 0.0 }).collect(),
        }
    }

    pub fn transform(&self, corpus: &GroupedCorpus) -> FeatureMatrix {
        use rayon::prelude::*;
        let rows = corpus.sequences().par_iter().map(|s| self.vector(s)).collect();
        FeatureMatrix {
            columns: self.vocab.entries().iter().map(ToString::to_string).collect(),
            rows,
            ids: corpus.sequences().iter().map(|s| s.id().to_string()).collect(),
            labels: corpus.labels(),
            kind: FeatureKind::KGram(self.mode),
            window: Some(self.vocab.window),
            max_size: self.max_size,
        }
    }
}

/// Fits a vocabulary on `corpus` and vectorizes every sequence of it.
pub fn vectorize(corpus: &GroupedCorpus, w: usize, max_size: Option<usize>, mode: VectorMode) -> Result<FeatureMatrix> {
    Ok(KGramVectorizer::fit(corpus, w, max_size, mode)?.transform(corpus))
}
