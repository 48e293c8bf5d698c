//! Quantifying how labelled groups of discrete event sequences differ.
//!
//! * [`vectorize`] and [`similarity`]: k-gram TF-ISF or binary vectors and
//!   the two-group silhouette score under cosine distance.
//! * [`matrix_profile`]: Hamming-distance matrix profiles, their summary
//!   statistics, positionwise group aggregates, and Mann–Whitney comparisons.
//! * [`classify`]: a logistic classifier on k-gram features next to a
//!   length-only baseline, scored by stratified cross-validation.

pub mod classify;
pub mod corpus;
pub mod error;
pub mod matrix_profile;
pub mod similarity;
pub mod stats;
pub mod synth;
pub mod vectorize;

pub use corpus::{
    alphabet, collapse_repeats, filter_min_length, parse_corpus, parse_corpus_str, write_corpus, EventSequence,
    Format, GroupedCorpus, Symbol,
};
pub use error::{Error, Result};
