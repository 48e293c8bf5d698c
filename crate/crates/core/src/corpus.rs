//! Sequences, grouped corpora, the two on-disk record formats, and the
//! preprocessing transforms (run collapsing and the minimum-length filter).
//!
//! TSV records are `group<TAB>id<TAB>space separated symbols`; blank lines
//! and lines starting with `#` are skipped. JSONL records are objects of the
//! form `{"group": .., "id": .., "events": [..]}`, one per line.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One event type. Opaque: only equality and ordering of tokens matter.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Symbol(String);

impl Symbol {
    pub fn new(token: impl Into<String>) -> Result<Self> {
        let token = token.into();
        if token.is_empty() || token.chars().any(char::is_whitespace) {
            return Err(Error::InvalidSymbol(token));
        }
        Ok(Self(token))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for Symbol {
    type Error = Error;

    fn try_from(value: String) -> Result<Self> {
        Self::new(value)
    }
}

impl From<Symbol> for String {
    fn from(value: Symbol) -> Self {
        value.0
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// An ordered, non-empty list of events carrying its group label and id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventSequence {
    id: String,
    group: String,
    events: Vec<Symbol>,
}

fn check_label(kind: &str, value: &str) -> Result<()> {
    if value.is_empty() {
        return Err(Error::InvalidRecord(format!("{kind} must not be empty")));
    }
    if value.contains(['\t', '\n', '\r']) {
        return Err(Error::InvalidRecord(format!(
            "{kind} `{}` contains a tab or line break",
            value.escape_debug()
        )));
    }
    Ok(())
}

impl EventSequence {
    pub fn new(id: impl Into<String>, group: impl Into<String>, events: Vec<Symbol>) -> Result<Self> {
        let id = id.into();
        let group = group.into();
        check_label("id", &id)?;
        check_label("group", &group)?;
        if events.is_empty() {
            return Err(Error::InvalidRecord(format!("sequence `{id}` has no events")));
        }
        Ok(Self { id, group, events })
    }

    /// Builds a sequence from whitespace separated tokens.
    pub fn from_tokens(id: impl Into<String>, group: impl Into<String>, tokens: &str) -> Result<Self> {
        let events = tokens
            .split_whitespace()
            .map(Symbol::new)
            .collect::<Result<Vec<_>>>()?;
        Self::new(id, group, events)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn group(&self) -> &str {
        &self.group
    }

    pub fn events(&self) -> &[Symbol] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    /// Always false; kept for API symmetry with `len`.
    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Maps every event to a dense integer code. Equal symbols share a code,
    /// so any equality-based distance is unchanged by the encoding.
    pub fn encode(&self) -> Vec<u32> {
        let mut codes: std::collections::HashMap<&Symbol, u32> = std::collections::HashMap::new();
        self.events
            .iter()
            .map(|s| {
                let next = codes.len() as u32;
                *codes.entry(s).or_insert(next)
            })
            .collect()
    }
}

/// Sequences partitioned into named groups. Ids are unique.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GroupedCorpus {
    sequences: Vec<EventSequence>,
    groups: BTreeSet<String>,
}

impl GroupedCorpus {
    pub fn new(sequences: Vec<EventSequence>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(sequences.len());
        for seq in &sequences {
            if !seen.insert(seq.id.as_str()) {
                return Err(Error::DuplicateId(seq.id.clone()));
            }
        }
        let groups = sequences.iter().map(|s| s.group.clone()).collect();
        Ok(Self { sequences, groups })
    }

    pub fn sequences(&self) -> &[EventSequence] {
        &self.sequences
    }

    pub fn groups(&self) -> &BTreeSet<String> {
        &self.groups
    }

    /// Total number of sequences.
    pub fn len(&self) -> usize {
        self.sequences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequences.is_empty()
    }

    pub fn labels(&self) -> Vec<String> {
        self.sequences.iter().map(|s| s.group.clone()).collect()
    }

    /// Sequences of one group, in corpus order.
    pub fn group_members<'a>(&'a self, group: &'a str) -> impl Iterator<Item = &'a EventSequence> + 'a {
        self.sequences.iter().filter(move |s| s.group == group)
    }

    /// Keeps only the sequences whose group is listed, preserving order.
    pub fn restrict_to_groups(&self, groups: &[&str]) -> Self {
        self.retain(|s| groups.contains(&s.group()))
    }

    /// Sub-corpus made of the given positions, in the given order.
    pub fn select(&self, indices: &[usize]) -> Self {
        let sequences: Vec<_> = indices.iter().map(|&i| self.sequences[i].clone()).collect();
        let groups = sequences.iter().map(|s| s.group.clone()).collect();
        Self { sequences, groups }
    }

    fn retain(&self, keep: impl Fn(&EventSequence) -> bool) -> Self {
        let sequences: Vec<_> = self.sequences.iter().filter(|s| keep(s)).cloned().collect();
        let groups = sequences.iter().map(|s| s.group.clone()).collect();
        Self { sequences, groups }
    }

    /// Applies `collapse_repeats` to every sequence.
    pub fn collapse_repeats(&self) -> Self {
        Self {
            sequences: self.sequences.iter().map(collapse_repeats).collect(),
            groups: self.groups.clone(),
        }
    }

    /// Number of sequences per group.
    pub fn group_counts(&self) -> BTreeMap<&str, usize> {
        let mut counts = BTreeMap::new();
        for seq in &self.sequences {
            *counts.entry(seq.group.as_str()).or_insert(0) += 1;
        }
        counts
    }
}

/// On-disk record layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Tsv,
    Jsonl,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tsv" => Ok(Self::Tsv),
            "jsonl" => Ok(Self::Jsonl),
            other => Err(Error::InvalidParameter(format!("unknown format `{other}`"))),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Tsv => "tsv",
            Self::Jsonl => "jsonl",
        })
    }
}

#[derive(Serialize, Deserialize)]
struct JsonRecord {
    group: String,
    id: String,
    events: Vec<String>,
}

fn parse_tsv_line(line: &str, line_no: usize) -> Result<EventSequence> {
    let parse_err = |message: String| Error::Parse { line: line_no, message };
    let fields: Vec<&str> = line.split('\t').collect();
    if fields.len() != 3 {
        return Err(parse_err(format!("expected 3 tab-separated fields, found {}", fields.len())));
    }
    let (group, id, events) = (fields[0], fields[1], fields[2]);
    if events.split_whitespace().next().is_none() {
        return Err(parse_err("empty symbol list".into()));
    }
    EventSequence::from_tokens(id, group, events).map_err(|e| parse_err(e.to_string()))
}

fn parse_jsonl_line(line: &str, line_no: usize) -> Result<EventSequence> {
    let parse_err = |message: String| Error::Parse { line: line_no, message };
    let record: JsonRecord = serde_json::from_str(line).map_err(|e| parse_err(e.to_string()))?;
    if record.events.is_empty() {
        return Err(parse_err("empty symbol list".into()));
    }
    let events = record
        .events
        .into_iter()
        .map(Symbol::new)
        .collect::<Result<Vec<_>>>()
        .map_err(|e| parse_err(e.to_string()))?;
    EventSequence::new(record.id, record.group, events).map_err(|e| parse_err(e.to_string()))
}

/// Reads a whole corpus. Fails on the first malformed record, on duplicate
/// ids, and on input with no records at all.
pub fn parse_corpus<R: BufRead>(reader: R, format: Format) -> Result<GroupedCorpus> {
    let mut sequences = Vec::new();
    let mut seen: HashSet<String> = HashSet::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| match e.kind() {
            std::io::ErrorKind::InvalidData => Error::Parse {
                line: line_no,
                message: "invalid UTF-8".into(),
            },
            _ => Error::Io(e),
        })?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.trim().is_empty() {
            continue;
        }
        let seq = match format {
            Format::Tsv if line.starts_with('#') => continue,
            Format::Tsv => parse_tsv_line(line, line_no)?,
            Format::Jsonl => parse_jsonl_line(line, line_no)?,
        };
        if !seen.insert(seq.id.clone()) {
            return Err(Error::Parse {
                line: line_no,
                message: Error::DuplicateId(seq.id).to_string(),
            });
        }
        sequences.push(seq);
    }
    if sequences.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    GroupedCorpus::new(sequences)
}

pub fn parse_corpus_str(input: &str, format: Format) -> Result<GroupedCorpus> {
    parse_corpus(input.as_bytes(), format)
}

/// Writes a corpus in the given format; `parse_corpus` reads it back unchanged.
pub fn write_corpus<W: Write>(corpus: &GroupedCorpus, format: Format, mut out: W) -> Result<()> {
    for seq in &corpus.sequences {
        match format {
            Format::Tsv => {
                if seq.group.starts_with('#') {
                    return Err(Error::InvalidRecord(format!(
                        "group `{}` would be read back as a TSV comment",
                        seq.group
                    )));
                }
                let events: Vec<&str> = seq.events.iter().map(Symbol::as_str).collect();
                writeln!(out, "{}\t{}\t{}", seq.group, seq.id, events.join(" "))?;
            }
            Format::Jsonl => {
                let record = JsonRecord {
                    group: seq.group.clone(),
                    id: seq.id.clone(),
                    events: seq.events.iter().map(|s| s.0.clone()).collect(),
                };
                let line = serde_json::to_string(&record).map_err(|e| Error::InvalidRecord(e.to_string()))?;
                writeln!(out, "{line}")?;
            }
        }
    }
    Ok(())
}

/// Replaces every maximal run of identical consecutive events with one event.
pub fn collapse_repeats(seq: &EventSequence) -> EventSequence {
    let mut events = seq.events.clone();
    events.dedup();
    EventSequence {
        id: seq.id.clone(),
        group: seq.group.clone(),
        events,
    }
}

/// Keeps the sequences with at least `min_len` events. The result may be empty.
pub fn filter_min_length(corpus: &GroupedCorpus, min_len: usize) -> GroupedCorpus {
    corpus.retain(|s| s.len() >= min_len)
}

/// Distinct symbols appearing anywhere in the corpus.
pub fn alphabet(corpus: &GroupedCorpus) -> BTreeSet<Symbol> {
    corpus
        .sequences
        .iter()
        .flat_map(|s| s.events.iter().cloned())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn seq(id: &str, group: &str, tokens: &str) -> EventSequence {
        EventSequence::from_tokens(id, group, tokens).unwrap()
    }

    fn tokens(s: &EventSequence) -> Vec<&str> {
        s.events().iter().map(Symbol::as_str).collect()
    }

    #[test]
    fn parses_single_tsv_record() {
        let corpus = parse_corpus_str("A\tseq1\ta b c", Format::Tsv).unwrap();
        assert_eq!(corpus.len(), 1);
        let s = &corpus.sequences()[0];
        assert_eq!(s.group(), "A");
        assert_eq!(s.id(), "seq1");
        assert_eq!(tokens(s), ["a", "b", "c"]);
        assert_eq!(corpus.groups().iter().collect::<Vec<_>>(), ["A"]);
    }

    #[test]
    fn empty_stream_is_rejected() {
        for format in [Format::Tsv, Format::Jsonl] {
            let err = parse_corpus_str("", format).unwrap_err();
            assert_eq!(err.to_string(), "empty corpus");
        }
        let err = parse_corpus_str("# only a comment\n\n", Format::Tsv).unwrap_err();
        assert!(matches!(err, Error::EmptyCorpus));
    }

    #[test]
    fn duplicate_id_is_rejected() {
        let err = parse_corpus_str("A\tseq1\ta\nB\tseq1\tb\n", Format::Tsv).unwrap_err();
        assert!(err.to_string().contains("duplicate sequence id `seq1`"), "{err}");
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        assert!(matches!(
            GroupedCorpus::new(vec![seq("x", "A", "a"), seq("x", "B", "b")]),
            Err(Error::DuplicateId(_))
        ));
    }

    #[test]
    fn malformed_lines_name_their_line_number() {
        let err = parse_corpus_str("A\ts1\ta b\nA\ts2\n", Format::Tsv).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = parse_corpus_str("# c\nA\ts1\t   \n", Format::Tsv).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = parse_corpus_str("{\"group\":\"A\",\"id\":\"s\",\"events\":[]}", Format::Jsonl).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");
        let err = parse_corpus_str("{\"group\":\"A\",\"id\":\"s\",\"events\":[\"a b\"]}", Format::Jsonl)
            .unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");
        let err = parse_corpus_str("not json", Format::Jsonl).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");
    }

    #[test]
    fn tsv_comments_and_crlf() {
        let corpus = parse_corpus_str("# header\r\nA\ts1\ta b\r\n\r\nB\ts2\tc\r\n", Format::Tsv).unwrap();
        assert_eq!(corpus.len(), 2);
        assert_eq!(tokens(&corpus.sequences()[0]), ["a", "b"]);
    }

    #[test]
    fn jsonl_record() {
        let corpus = parse_corpus_str(
            "{\"group\":\"G\",\"id\":\"1\",\"events\":[\"push\",\"pull\",\"push\"]}\n",
            Format::Jsonl,
        )
        .unwrap();
        assert_eq!(tokens(&corpus.sequences()[0]), ["push", "pull", "push"]);
    }

    #[test]
    fn collapse_examples() {
        let s = collapse_repeats(&seq("1", "g", "a a a b b c c c d"));
        assert_eq!(tokens(&s), ["a", "b", "c", "d"]);
        let s = collapse_repeats(&seq("1", "g", "a b a b"));
        assert_eq!(tokens(&s), ["a", "b", "a", "b"]);
        let s = collapse_repeats(&seq("1", "g", "x x x x"));
        assert_eq!(tokens(&s), ["x"]);
    }

    #[test]
    fn filter_examples() {
        let corpus = GroupedCorpus::new(vec![
            seq("1", "A", "a b c"),
            seq("2", "A", "a b c d e"),
            seq("3", "B", "a b c d e f g h i"),
        ])
        .unwrap();
        let kept = filter_min_length(&corpus, 5);
        let lengths: Vec<_> = kept.sequences().iter().map(EventSequence::len).collect();
        assert_eq!(lengths, [5, 9]);
        assert_eq!(filter_min_length(&corpus, 1), corpus);
        let none = filter_min_length(&corpus, 10);
        assert!(none.is_empty());
        assert!(none.groups().is_empty());

        let only_b = filter_min_length(&corpus, 6);
        assert_eq!(only_b.groups().iter().collect::<Vec<_>>(), ["B"]);
    }

    #[test]
    fn alphabet_examples() {
        let corpus = GroupedCorpus::new(vec![seq("1", "A", "a b"), seq("2", "A", "b c")]).unwrap();
        let got: Vec<_> = alphabet(&corpus).into_iter().map(String::from).collect();
        assert_eq!(got, ["a", "b", "c"]);
        assert!(alphabet(&GroupedCorpus::default()).is_empty());
        let one = GroupedCorpus::new(vec![seq("1", "A", "a a a")]).unwrap();
        assert_eq!(alphabet(&one).len(), 1);
    }

    #[test]
    fn tsv_writer_refuses_comment_like_groups() {
        let corpus = GroupedCorpus::new(vec![seq("1", "#g", "a")]).unwrap();
        assert!(write_corpus(&corpus, Format::Tsv, Vec::new()).is_err());
        assert!(write_corpus(&corpus, Format::Jsonl, Vec::new()).is_ok());
    }

    fn arb_sequence() -> impl Strategy<Value = Vec<String>> {
        prop::collection::vec(prop::sample::select(vec!["a", "b", "c", "push", "P"]), 1..30)
            .prop_map(|v| v.into_iter().map(String::from).collect())
    }

    fn arb_corpus() -> impl Strategy<Value = GroupedCorpus> {
        prop::collection::vec(("[A-Za-z][A-Za-z0-9_-]{0,6}", arb_sequence()), 1..12).prop_map(|records| {
            let sequences = records
                .into_iter()
                .enumerate()
                .map(|(i, (group, events))| {
                    let events = events.into_iter().map(|t| Symbol::new(t).unwrap()).collect();
                    EventSequence::new(format!("seq{i}"), group, events).unwrap()
                })
                .collect();
            GroupedCorpus::new(sequences).unwrap()
        })
    }

    proptest! {
        #[test]
        fn collapse_is_idempotent_and_never_grows(events in arb_sequence()) {
            let s = EventSequence::from_tokens("x", "g", &events.join(" ")).unwrap();
            let once = collapse_repeats(&s);
            prop_assert_eq!(collapse_repeats(&once.clone()), once.clone());
            prop_assert!(once.len() <= s.len());
            prop_assert!(once.events().windows(2).all(|w| w[0] != w[1]));
        }

        #[test]
        fn corpus_round_trips(corpus in arb_corpus()) {
            for format in [Format::Tsv, Format::Jsonl] {
                let mut buf = Vec::new();
                write_corpus(&corpus, format, &mut buf).unwrap();
                let back = parse_corpus(buf.as_slice(), format).unwrap();
                prop_assert_eq!(&back, &corpus);
            }
            prop_assert_eq!(filter_min_length(&corpus, 1), corpus);
        }
    }
}
