use std::collections::BTreeSet;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use seqdiff_core::classify::{self, EvalReport, Featurizer, Hyperparameters};
use seqdiff_core::matrix_profile::{self, ComparisonReport, CorpusProfiles, ProfileMetric};
use seqdiff_core::similarity::{self, SweepTable};
use seqdiff_core::{alphabet, filter_min_length, parse_corpus, EventSequence, GroupedCorpus};

use crate::config::{ClassifyArgs, Cli, Command, ProfileArgs, Shared, SilhouetteArgs};
use crate::Failure;

type Outcome<T = ()> = Result<T, Failure>;

pub fn run(cli: Cli) -> Outcome {
    let command = &cli.command;
    validate(command)?;
    let corpus = load(command.shared())?;
    let out = &command.shared().out;
    fs::create_dir_all(out).map_err(|e| Failure::Data(format!("{}: {e}", out.display())))?;
    match command {
        Command::Inspect { .. } => inspect(command, &corpus, out),
        Command::Silhouette { args, .. } => silhouette(args, &corpus, out),
        Command::Profile { args, .. } => profile(command, args, &corpus, out),
        Command::Classify { shared, args } => classify(command, shared, args, &corpus, out),
    }?;
    write_json(&out.join("run_config.json"), command)
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn validate(command: &Command) -> Outcome {
    if command.shared().min_length == Some(0) {
        return Err(usage("--min-length must be at least 1"));
    }
    match command {
        Command::Inspect { .. } => {}
        Command::Silhouette { args, .. } => {
            if args.windows.is_empty() || args.windows.contains(&0) {
                return Err(usage("--w needs window sizes of at least 1"));
            }
            if let Some(groups) = &args.groups {
                if groups.len() != 2 || groups[0] == groups[1] {
                    return Err(usage("--groups takes exactly two distinct group names"));
                }
            }
        }
        Command::Profile { args, .. } => {
            if args.window == 0 {
                return Err(usage("--w must be at least 1"));
            }
            if args.aggregate_cutoff == 0 {
                return Err(usage("--aggregate-cutoff must be at least 1"));
            }
        }
        Command::Classify { args, .. } => {
            if args.window == 0 {
                return Err(usage("--w must be at least 1"));
            }
            if args.folds < 2 {
                return Err(usage("--folds must be at least 2"));
            }
            if args.epochs == 0 {
                return Err(usage("--epochs must be at least 1"));
            }
            if !(args.learning_rate.is_finite() && args.learning_rate > 0.0) {
                return Err(usage("--lr must be a positive number"));
            }
            if !(args.l2.is_finite() && args.l2 >= 0.0) {
                return Err(usage("--l2 must be a non-negative number"));
            }
        }
    }
    Ok(())
}

/// Reads and concatenates every input, then applies the opt-in preprocessing.
fn load(shared: &Shared) -> Outcome<GroupedCorpus> {
    let mut sequences: Vec<EventSequence> = Vec::new();
    for path in &shared.input {
        let file = File::open(path).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
        let corpus = parse_corpus(BufReader::new(file), shared.format)
            .map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
        sequences.extend(corpus.sequences().iter().cloned());
    }
    let mut corpus = GroupedCorpus::new(sequences)?;
    if shared.collapse {
        corpus = corpus.collapse_repeats();
    }
    if let Some(min) = shared.min_length {
        corpus = filter_min_length(&corpus, min);
    }
    if corpus.is_empty() {
        return Err(Failure::Data("no sequences left after preprocessing".into()));
    }
    Ok(corpus)
}

fn create(path: &Path) -> Outcome<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

fn io_failure(path: &Path) -> impl Fn(std::io::Error) -> Failure + '_ {
    move |e| Failure::Data(format!("{}: {e}", path.display()))
}

fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Outcome {
    let mut out = create(path)?;
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| Failure::Data(e.to_string()))?;
    writeln!(out).and_then(|_| out.flush()).map_err(io_failure(path))
}

fn write_with(path: &Path, write: impl FnOnce(&mut BufWriter<File>) -> seqdiff_core::Result<()>) -> Outcome {
    let mut out = create(path)?;
    write(&mut out)?;
    out.flush().map_err(io_failure(path))
}

#[derive(Serialize)]
struct LengthSummary {
    min: usize,
    max: usize,
    mean: f64,
    median: f64,
}

impl LengthSummary {
    fn of(mut lengths: Vec<usize>) -> Self {
        lengths.sort_unstable();
        let n = lengths.len();
        let median = if n % 2 == 1 {
            lengths[n / 2] as f64
        } else {
            (lengths[n / 2 - 1] + lengths[n / 2]) as f64 / 2.0
        };
        Self {
            min: lengths[0],
            max: lengths[n - 1],
            mean: lengths.iter().sum::<usize>() as f64 / n as f64,
            median,
        }
    }
}

#[derive(Serialize)]
struct GroupSummary {
    group: String,
    count: usize,
    length: LengthSummary,
}

#[derive(Serialize)]
struct CorpusSummary<'a> {
    config: &'a Command,
    sequences: usize,
    alphabet_size: usize,
    alphabet: Vec<String>,
    length: LengthSummary,
    groups: Vec<GroupSummary>,
}

fn inspect(command: &Command, corpus: &GroupedCorpus, out: &Path) -> Outcome {
    let symbols: Vec<String> = alphabet(corpus).into_iter().map(String::from).collect();
    let groups: Vec<GroupSummary> = corpus
        .groups()
        .iter()
        .map(|g| {
            let lengths: Vec<usize> = corpus.group_members(g).map(EventSequence::len).collect();
            GroupSummary {
                group: g.clone(),
                count: lengths.len(),
                length: LengthSummary::of(lengths),
            }
        })
        .collect();
    let summary = CorpusSummary {
        config: command,
        sequences: corpus.len(),
        alphabet_size: symbols.len(),
        alphabet: symbols,
        length: LengthSummary::of(corpus.sequences().iter().map(EventSequence::len).collect()),
        groups,
    };
    println!("{} sequences, {} groups, alphabet size {}", summary.sequences, summary.groups.len(), summary.alphabet_size);
    println!("group\tcount\tmin_len\tmedian_len\tmean_len\tmax_len");
    for g in &summary.groups {
        println!(
            "{}\t{}\t{}\t{}\t{:.2}\t{}",
            g.group, g.count, g.length.min, g.length.median, g.length.mean, g.length.max
        );
    }
    write_json(&out.join("summary.json"), &summary)
}

fn two_groups<'a>(requested: Option<&'a [String]>, corpus: &'a GroupedCorpus) -> Outcome<(&'a str, &'a str)> {
    match requested {
        Some([a, b]) => Ok((a, b)),
        Some(_) => Err(usage("--groups takes exactly two group names")),
        None => {
            let groups: Vec<&String> = corpus.groups().iter().collect();
            match groups.as_slice() {
                [a, b] => Ok((a, b)),
                _ => Err(Failure::Data(format!(
                    "silhouette compares exactly two groups but the corpus has {}; choose two with --groups",
                    groups.len()
                ))),
            }
        }
    }
}

fn silhouette(args: &SilhouetteArgs, corpus: &GroupedCorpus, out: &Path) -> Outcome {
    let pair = two_groups(args.groups.as_deref(), corpus)?;
    let table: SweepTable = similarity::silhouette_sweep(corpus, pair, &args.windows, &args.vector_lengths, &args.modes)?;
    let path = out.join("silhouette_sweep.csv");
    write_with(&path, |w| table.write_csv(w))?;
    let mut stdout = Vec::new();
    table.write_csv(&mut stdout)?;
    print!("{}", String::from_utf8_lossy(&stdout));
    if let Some(best) = table.best() {
        println!(
            "best: w={} vector_length={} mode={} score={}",
            best.w, best.vector_length, best.mode, best.score
        );
    }
    Ok(())
}

/// File-name-safe rendering of a group label.
fn file_stem(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

#[derive(Serialize)]
struct ProfileOutput<'a> {
    config: &'a Command,
    report: &'a ComparisonReport,
}

fn profile(command: &Command, args: &ProfileArgs, corpus: &GroupedCorpus, out: &Path) -> Outcome {
    let profiles = CorpusProfiles::compute(corpus, args.window)?;
    for s in &profiles.skipped {
        log::warn!("skipped `{}` ({} events, window {})", s.id, s.length, args.window);
    }
    write_with(&out.join("profiles.csv"), |w| profiles.write_csv(w))?;

    let report = matrix_profile::comparison_from_profiles(
        &profiles,
        corpus.groups().iter().map(String::as_str),
        args.aggregate_cutoff,
    )?;
    let mut used = BTreeSet::new();
    for group in &report.groups {
        let mut stem = file_stem(&group.group);
        while !used.insert(stem.clone()) {
            stem.push('_');
        }
        write_with(&out.join(format!("aggregate_{stem}.csv")), |w| group.aggregate.write_csv(w))?;
    }
    write_json(&out.join("comparison.json"), &ProfileOutput { config: command, report: &report })?;

    if let Some(id) = &args.distance_matrix {
        let seq = corpus
            .sequences()
            .iter()
            .find(|s| s.id() == id)
            .ok_or_else(|| Failure::Data(format!("no sequence with id `{id}`")))?;
        let matrix = matrix_profile::distance_matrix(seq, args.window)?;
        write_with(&out.join("distance_matrix.csv"), |w| matrix.write_csv(w))?;
    }

    println!("window {}, {} profiled, {} skipped", report.window, profiles.profiles.len(), report.skipped.len());
    println!("group\tanalyzed\tvariance\tmean\tminimum\tmaximum");
    for g in &report.groups {
        let s = g.mean_stats;
        println!(
            "{}\t{}\t{:.4}\t{:.4}\t{:.4}\t{:.4}",
            g.group, g.analyzed, s.variance, s.mean, s.minimum, s.maximum
        );
    }
    for cmp in &report.comparisons {
        let p: Vec<String> = ProfileMetric::ALL
            .iter()
            .map(|&m| format!("{:?}={:.4}", m, cmp.metric(m).test.p_value).to_lowercase())
            .collect();
        println!("{} vs {}: {}", cmp.group_a, cmp.group_b, p.join(" "));
    }
    Ok(())
}

#[derive(Serialize)]
struct FoldAssignment<'a> {
    id: &'a str,
    fold: usize,
}

#[derive(Serialize)]
struct ModelReport {
    model: &'static str,
    featurizer: Featurizer,
    hyperparameters: Hyperparameters,
    report: EvalReport,
}

#[derive(Serialize)]
struct ClassifyOutput<'a> {
    config: &'a Command,
    folds: Vec<FoldAssignment<'a>>,
    models: Vec<ModelReport>,
}

fn classify(command: &Command, shared: &Shared, args: &ClassifyArgs, corpus: &GroupedCorpus, out: &Path) -> Outcome {
    if corpus.groups().len() < 2 {
        return Err(Failure::Data(format!(
            "classification needs at least two groups, found {}",
            corpus.groups().len()
        )));
    }
    let hyper = Hyperparameters {
        epochs: args.epochs,
        learning_rate: args.learning_rate,
        l2: args.l2,
        seed: shared.seed,
    };
    let folds = classify::stratified_folds(&corpus.labels(), args.folds, shared.seed)?;
    let featurizers = [
        (
            "tf_isf_logistic",
            Featurizer::TfIsf {
                window: args.window,
                max_size: args.vector_length.as_cap(),
            },
        ),
        ("length_logistic", Featurizer::Length),
    ];
    let models = featurizers
        .into_iter()
        .map(|(model, featurizer)| {
            let report = classify::k_fold_cv_with_folds(corpus, featurizer, &folds, hyper)?;
            Ok(ModelReport {
                model,
                featurizer,
                hyperparameters: hyper,
                report,
            })
        })
        .collect::<Outcome<Vec<_>>>()?;
    let output = ClassifyOutput {
        config: command,
        folds: corpus
            .sequences()
            .iter()
            .zip(&folds)
            .map(|(s, &fold)| FoldAssignment { id: s.id(), fold })
            .collect(),
        models,
    };
    write_json(&out.join("classification.json"), &output)?;
    println!("model\tprecision\trecall\tf1\taccuracy");
    for m in &output.models {
        let r = &m.report;
        println!("{}\t{:.4}\t{:.4}\t{:.4}\t{:.4}", m.model, r.precision, r.recall, r.f1, r.accuracy);
    }
    Ok(())
}
