//! Logistic classification over k-gram or length features, with
//! precision/recall/F1 evaluation and stratified k-fold cross-validation.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::GroupedCorpus;
use crate::error::{Error, Result};
use crate::vectorize::{FeatureKind, FeatureMatrix, KGramVectorizer, VectorMode};

/// Single-column matrix of sequence lengths.
pub fn length_features(corpus: &GroupedCorpus) -> FeatureMatrix {
    FeatureMatrix {
        columns: vec!["length".into()],
        rows: corpus.sequences().iter().map(|s| vec![s.len() as f64]).collect(),
        ids: corpus.sequences().iter().map(|s| s.id().to_string()).collect(),
        labels: corpus.labels(),
        kind: FeatureKind::Length,
        window: None,
        max_size: None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperparameters {
    pub epochs: usize,
    pub learning_rate: f64,
    pub l2: f64,
    pub seed: u64,
}

impl Default for Hyperparameters {
    fn default() -> Self {
        Self {
            epochs: 500,
            learning_rate: 0.1,
            l2: 1e-4,
            seed: 0,
        }
    }
}

/// Logistic model on standardized features. Two classes use one weight
/// vector; more classes use one-vs-rest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub classes: Vec<String>,
    /// Per scorer: one weight per feature, then the bias.
    pub weights: Vec<Vec<f64>>,
    pub feature_mean: Vec<f64>,
    pub feature_scale: Vec<f64>,
    pub training: Hyperparameters,
}

impl LinearModel {
    pub fn feature_count(&self) -> usize {
        self.feature_mean.len()
    }

    fn standardize(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(&self.feature_mean)
            .zip(&self.feature_scale)
            .map(|((x, m), s)| (x - m) / s)
            .collect()
    }

    /// Positive-class probability of every scorer.
    pub fn probabilities(&self, row: &[f64]) -> Result<Vec<f64>> {
        if row.len() != self.feature_count() {
            return Err(Error::LengthMismatch { left: row.len(), right: self.feature_count() });
        }
        let z = self.standardize(row);
        Ok(self.weights.iter().map(|w| sigmoid(linear(w, &z))).collect())
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn linear(weights: &[f64], x: &[f64]) -> f64 {
    let (bias, w) = weights.split_last().expect("weights carry a bias");
    w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + bias
}

/// Full-batch gradient descent on the L2-regularized log loss.
fn fit_binary(x: &[Vec<f64>], y: &[f64], hyper: &Hyperparameters, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let d = x.first().map_or(0, Vec::len);
    let m = x.len() as f64;
    let mut w: Vec<f64> = (0..=d).map(|_| rng.gen_range(-0.01..0.01)).collect();
    let mut grad = vec![0.0; d + 1];
    for _ in 0..hyper.epochs {
        grad.iter_mut().for_each(|g| *g = 0.0);
        for (row, &target) in x.iter().zip(y) {
            let err = sigmoid(linear(&w, row)) - target;
            for (g, v) in grad.iter_mut().zip(row) {
                *g += err * v;
            }
            grad[d] += err;
        }
        for j in 0..=d {
            let penalty = if j < d { hyper.l2 * w[j] } else { 0.0 };
            w[j] -= hyper.learning_rate * (grad[j] / m + penalty);
        }
    }
    w
}

/// Trains a logistic model on the rows of `x` labelled by `y`.
pub fn train_logistic(x: &[Vec<f64>], y: &[String], hyper: Hyperparameters) -> Result<LinearModel> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch { left: x.len(), right: y.len() });
    }
    let classes: Vec<String> = y.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    if classes.len() < 2 {
        return Err(Error::InvalidParameter("training needs at least two classes".into()));
    }
    let d = x[0].len();
    if let Some(bad) = x.iter().find(|r| r.len() != d) {
        return Err(Error::LengthMismatch { left: d, right: bad.len() });
    }
    let m = x.len() as f64;
    let feature_mean: Vec<f64> = (0..d).map(|j| x.iter().map(|r| r[j]).sum::<f64>() / m).collect();
    let feature_scale: Vec<f64> = (0..d)
        .map(|j| {
            let var = x.iter().map(|r| (r[j] - feature_mean[j]).powi(2)).sum::<f64>() / m;
            if var > 0.0 {
                var.sqrt()
            } else {
                1.0
            }
        })
        .collect();
    let mut model = LinearModel {
        classes,
        weights: Vec::new(),
        feature_mean,
        feature_scale,
        training: hyper,
    };
    let z: Vec<Vec<f64>> = x.iter().map(|r| model.standardize(r)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(hyper.seed);
    let positives: Vec<&String> = if model.classes.len() == 2 {
        vec![&model.classes[1]]
    } else {
        model.classes.iter().collect()
    };
    let weights = positives
        .into_iter()
        .map(|positive| {
            let targets: Vec<f64> = y.iter().map(|l| f64::from(u8::from(l == positive))).collect();
            fit_binary(&z, &targets, &hyper, &mut rng)
        })
        .collect();
    model.weights = weights;
    Ok(model)
}

/// Predicted label per row: threshold 0.5 for two classes, otherwise the
/// class whose one-vs-rest scorer is most confident.
pub fn predict(model: &LinearModel, x: &[Vec<f64>]) -> Result<Vec<String>> {
    x.iter()
        .map(|row| {
            let p = model.probabilities(row)?;
            let class = if model.classes.len() == 2 {
                &model.classes[usize::from(p[0] >= 0.5)]
            } else {
                let best = p
                    .iter()
                    .enumerate()
                    .fold(0, |best, (i, v)| if *v > p[best] { i } else { best });
                &model.classes[best]
            };
            Ok(class.clone())
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub classes: Vec<String>,
    /// `counts[t][p]`: items of true class `t` predicted as `p`.
    pub counts: Vec<Vec<usize>>,
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    fn add(&mut self, other: &ConfusionMatrix) {
        for (row, o) in self.counts.iter_mut().zip(&other.counts) {
            for (c, v) in row.iter_mut().zip(o) {
                *c += v;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldScore {
    pub fold: usize,
    pub test_size: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy: f64,
    /// Set for two-class reports; multiclass metrics are macro averages.
    pub positive_class: Option<String>,
    pub confusion: ConfusionMatrix,
    pub folds: Vec<FoldScore>,
    /// Standard deviation of the per-fold F1 scores.
    pub f1_std: Option<f64>,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn harmonic(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// Scores predictions over the union of the observed labels.
pub fn evaluate(y_true: &[String], y_pred: &[String]) -> Result<EvalReport> {
    let classes: Vec<String> = y_true.iter().chain(y_pred).cloned().collect::<BTreeSet<_>>().into_iter().collect();
    evaluate_with_classes(y_true, y_pred, &classes)
}

/// Scores predictions against a fixed, sorted class list. With two classes
/// the second one is the positive class.
pub fn evaluate_with_classes(y_true: &[String], y_pred: &[String], classes: &[String]) -> Result<EvalReport> {
    if y_true.len() != y_pred.len() {
        return Err(Error::LengthMismatch { left: y_true.len(), right: y_pred.len() });
    }
    if y_true.is_empty() {
        return Err(Error::InvalidParameter("nothing to evaluate".into()));
    }
    let index = |label: &String| {
        classes
            .iter()
            .position(|c| c == label)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown class `{label}`")))
    };
    let k = classes.len();
    let mut counts = vec![vec![0usize; k]; k];
    for (t, p) in y_true.iter().zip(y_pred) {
        counts[index(t)?][index(p)?] += 1;
    }
    let per_class = |c: usize| {
        let tp = counts[c][c];
        let predicted: usize = (0..k).map(|t| counts[t][c]).sum();
        let actual: usize = counts[c].iter().sum();
        (ratio(tp, predicted), ratio(tp, actual))
    };
    let correct: usize = (0..k).map(|c| counts[c][c]).sum();
    let accuracy = ratio(correct, y_true.len());
    let (precision, recall, f1, positive_class) = if k <= 2 {
        let positive = k - 1;
        let (p, r) = per_class(positive);
        (p, r, harmonic(p, r), Some(classes[positive].clone()))
    } else {
        let scores: Vec<(f64, f64)> = (0..k).map(per_class).collect();
        let kf = k as f64;
        (
            scores.iter().map(|s| s.0).sum::<f64>() / kf,
            scores.iter().map(|s| s.1).sum::<f64>() / kf,
            scores.iter().map(|s| harmonic(s.0, s.1)).sum::<f64>() / kf,
            None,
        )
    };
    Ok(EvalReport {
        precision,
        recall,
        f1,
        accuracy,
        positive_class,
        confusion: ConfusionMatrix {
            classes: classes.to_vec(),
            counts,
        },
        folds: Vec::new(),
        f1_std: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Featurizer {
    TfIsf { window: usize, max_size: Option<usize> },
    Length,
}

/// Fold index of every item. Each class is shuffled with the seed and dealt
/// round-robin, so fold sizes per class differ by at most one.
pub fn stratified_folds(labels: &[String], k: usize, seed: u64) -> Result<Vec<usize>> {
    if k < 2 {
        return Err(Error::InvalidParameter("cross-validation needs k >= 2".into()));
    }
    let classes: BTreeSet<&String> = labels.iter().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![0usize; labels.len()];
    for class in classes {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| &labels[i] == class).collect();
        if members.len() < k {
            return Err(Error::InvalidParameter(format!(
                "class `{class}` has {} members, fewer than k = {k}",
                members.len()
            )));
        }
        members.shuffle(&mut rng);
        for (pos, &i) in members.iter().enumerate() {
            folds[i] = pos % k;
        }
    }
    Ok(folds)
}

/// Features for one fold, fitted on the training part only.
#[derive(Debug, Clone)]
pub struct FoldFeatures {
    pub train: FeatureMatrix,
    pub test: FeatureMatrix,
    pub vectorizer: Option<KGramVectorizer>,
}

pub fn fold_features(
    corpus: &GroupedCorpus,
    train_idx: &[usize],
    test_idx: &[usize],
    featurizer: Featurizer,
) -> Result<FoldFeatures> {
    let train = corpus.select(train_idx);
    let test = corpus.select(test_idx);
    Ok(match featurizer {
        Featurizer::Length => FoldFeatures {
            train: length_features(&train),
            test: length_features(&test),
            vectorizer: None,
        },
        Featurizer::TfIsf { window, max_size } => {
            let vectorizer = KGramVectorizer::fit(&train, window, max_size, VectorMode::TfIsf)?;
            FoldFeatures {
                train: vectorizer.transform(&train),
                test: vectorizer.transform(&test),
                vectorizer: Some(vectorizer),
            }
        }
    })
}

/// Stratified k-fold cross-validation. Reported metrics are the means of
/// the per-fold metrics; the confusion matrix is summed over folds.
pub fn k_fold_cv(corpus: &GroupedCorpus, featurizer: Featurizer, k: usize, hyper: Hyperparameters) -> Result<EvalReport> {
    let folds = stratified_folds(&corpus.labels(), k, hyper.seed)?;
    k_fold_cv_with_folds(corpus, featurizer, &folds, hyper)
}

/// Cross-validation over a precomputed fold assignment.
pub fn k_fold_cv_with_folds(
    corpus: &GroupedCorpus,
    featurizer: Featurizer,
    folds: &[usize],
    hyper: Hyperparameters,
) -> Result<EvalReport> {
    if folds.len() != corpus.len() {
        return Err(Error::LengthMismatch { left: folds.len(), right: corpus.len() });
    }
    let k = folds.iter().max().map_or(0, |m| m + 1);
    let classes: Vec<String> = corpus.groups().iter().cloned().collect();
    let fold_results = (0..k)
        .into_par_iter()
        .map(|fold| {
            let train_idx: Vec<usize> = (0..folds.len()).filter(|&i| folds[i] != fold).collect();
            let test_idx: Vec<usize> = (0..folds.len()).filter(|&i| folds[i] == fold).collect();
            let features = fold_features(corpus, &train_idx, &test_idx, featurizer)?;
            let model = train_logistic(&features.train.rows, &features.train.labels, hyper)?;
            let predicted = predict(&model, &features.test.rows)?;
            evaluate_with_classes(&features.test.labels, &predicted, &classes)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut confusion = ConfusionMatrix {
        classes: classes.clone(),
        counts: vec![vec![0; classes.len()]; classes.len()],
    };
    let scores: Vec<FoldScore> = fold_results
        .iter()
        .enumerate()
        .map(|(fold, r)| {
            confusion.add(&r.confusion);
            FoldScore {
                fold,
                test_size: r.confusion.total(),
                precision: r.precision,
                recall: r.recall,
                f1: r.f1,
                accuracy: r.accuracy,
            }
        })
        .collect();
    let kf = scores.len() as f64;
    let mean = |f: fn(&FoldScore) -> f64| scores.iter().map(f).sum::<f64>() / kf;
    let f1 = mean(|s| s.f1);
    let f1_std = (scores.iter().map(|s| (s.f1 - f1).powi(2)).sum::<f64>() / kf).sqrt();
    Ok(EvalReport {
        precision: mean(|s| s.precision),
        recall: mean(|s| s.recall),
        f1,
        accuracy: mean(|s| s.accuracy),
        positive_class: (classes.len() == 2).then(|| classes[1].clone()),
        confusion,
        folds: scores,
        f1_std: Some(f1_std),
    })
}
