//! Seeded synthetic corpora with known group differences, used by the test
//! suites and benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{EventSequence, GroupedCorpus, Symbol};

/// Parameters of a two-group corpus where only the first group carries a
/// planted motif.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantedMotif {
    pub per_group: usize,
    pub min_len: usize,
    pub max_len: usize,
    /// Background symbols; the motif symbols are part of the alphabet too.
    pub alphabet: Vec<String>,
    pub motif: Vec<String>,
    /// Per-position probability of starting a motif occurrence.
    pub rate: f64,
    pub groups: (String, String),
}

impl Default for PlantedMotif {
    fn default() -> Self {
        let mut alphabet: Vec<String> = ('a'..='k').map(String::from).collect();
        alphabet.extend(["x", "y", "z"].map(String::from));
        Self {
            per_group: 150,
            min_len: 100,
            max_len: 300,
            alphabet,
            motif: ["x", "y", "z"].map(String::from).to_vec(),
            rate: 0.1,
            groups: ("motif".into(), "plain".into()),
        }
    }
}

impl PlantedMotif {
    /// Both groups draw lengths from the same distribution. The motif group
    /// starts a motif at each free position with probability `rate`; the
    /// other group never contains the motif.
    pub fn generate(&self, seed: u64) -> GroupedCorpus {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut sequences = Vec::with_capacity(2 * self.per_group);
        for i in 0..2 * self.per_group {
            // alternate groups so both see the same stream of lengths
            let planted = i % 2 == 0;
            let len = rng.gen_range(self.min_len..=self.max_len);
            let events = if planted {
                self.planted_events(len, &mut rng)
            } else {
                self.plain_events(len, &mut rng)
            };
            let group = if planted { &self.groups.0 } else { &self.groups.1 };
            let seq = EventSequence::new(format!("{group}-{}", i / 2), group.clone(), to_symbols(events))
                .expect("generated sequences are non-empty");
            sequences.push(seq);
        }
        GroupedCorpus::new(sequences).expect("generated ids are unique")
    }

    fn background<'a>(&'a self, rng: &mut ChaCha8Rng) -> &'a str {
        &self.alphabet[rng.gen_range(0..self.alphabet.len())]
    }

    fn planted_events(&self, len: usize, rng: &mut ChaCha8Rng) -> Vec<&str> {
        let mut out = Vec::with_capacity(len);
        while out.len() < len {
            if out.len() + self.motif.len() <= len && rng.gen_bool(self.rate) {
                out.extend(self.motif.iter().map(String::as_str));
            } else {
                out.push(self.background(rng));
            }
        }
        out
    }

    fn plain_events(&self, len: usize, rng: &mut ChaCha8Rng) -> Vec<&str> {
        let m = self.motif.len();
        let mut out: Vec<&str> = Vec::with_capacity(len);
        while out.len() < len {
            let next = self.background(rng);
            out.push(next);
            if out.len() >= m && out[out.len() - m..].iter().zip(&self.motif).all(|(a, b)| *a == b) {
                out.pop();
            }
        }
        out
    }
}

fn to_symbols(tokens: Vec<&str>) -> Vec<Symbol> {
    tokens
        .into_iter()
        .map(|t| Symbol::new(t).expect("generator symbols are valid"))
        .collect()
}

/// Group `periodic` repeats a random unit of 2 to 5 symbols; group `random`
/// draws every symbol uniformly. All sequences have length `len`.
pub fn periodic_vs_random(per_group: usize, len: usize, alphabet_size: usize, seed: u64) -> GroupedCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let alphabet: Vec<String> = (0..alphabet_size).map(|i| format!("e{i}")).collect();
    let mut sequences = Vec::with_capacity(2 * per_group);
    for i in 0..per_group {
        let period = rng.gen_range(2..=5);
        let unit: Vec<&str> = (0..period).map(|_| alphabet[rng.gen_range(0..alphabet_size)].as_str()).collect();
        let events: Vec<&str> = unit.iter().copied().cycle().take(len).collect();
        sequences.push(EventSequence::new(format!("periodic-{i}"), "periodic", to_symbols(events)).unwrap());
    }
    for i in 0..per_group {
        let events: Vec<&str> = (0..len).map(|_| alphabet[rng.gen_range(0..alphabet_size)].as_str()).collect();
        sequences.push(EventSequence::new(format!("random-{i}"), "random", to_symbols(events)).unwrap());
    }
    GroupedCorpus::new(sequences).unwrap()
}

/// Uniform random sequences of fixed length spread over `groups` labels.
pub fn uniform_corpus(groups: &[&str], per_group: usize, len: usize, alphabet_size: usize, seed: u64) -> GroupedCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let alphabet: Vec<String> = (0..alphabet_size).map(|i| format!("e{i}")).collect();
    let sequences = groups
        .iter()
        .flat_map(|g| (0..per_group).map(move |i| (g, i)))
        .map(|(g, i)| {
            let events: Vec<&str> = (0..len).map(|_| alphabet[rng.gen_range(0..alphabet_size)].as_str()).collect();
            EventSequence::new(format!("{g}-{i}"), *g, to_symbols(events)).unwrap()
        })
        .collect();
    GroupedCorpus::new(sequences).unwrap()
}
