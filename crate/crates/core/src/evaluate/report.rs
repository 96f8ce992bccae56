//! Validation report: base classifiers trained once on generated labels and
//! once on true labels, scored on a held-out test set.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize, Serializer};
use serde_json::value::RawValue;

use super::knn::knn_classify;
use super::tree::{decision_tree_classify, DEFAULT_MAX_DEPTH};
use crate::dataset::TimeSeriesDataset;
use crate::error::{Error, Result};
use crate::labeling::LabelVector;
use crate::scalar::Scalar;

/// Rounds to the 6 decimals the report is written with.
pub fn round6(v: f64) -> f64 {
    format!("{v:.6}").parse().expect("formatted float parses")
}

fn six<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    RawValue::from_string(format!("{v:.6}")).map_err(serde::ser::Error::custom)?.serialize(s)
}

fn six_opt<S: Serializer>(v: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(v) => six(v, s),
        None => s.serialize_none(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Classifier {
    Knn { k: usize },
    DecisionTree { max_depth: usize },
}

impl Classifier {
    pub fn name(&self) -> &'static str {
        match self {
            Classifier::Knn { .. } => "knn",
            Classifier::DecisionTree { .. } => "decision_tree",
        }
    }

    pub fn predict<T: Scalar>(
        &self,
        train: &TimeSeriesDataset<T>,
        labels: &[usize],
        test: &TimeSeriesDataset<T>,
    ) -> Result<Vec<usize>> {
        match *self {
            Classifier::Knn { k } => knn_classify(train.instances(), labels, test.instances(), k),
            Classifier::DecisionTree { max_depth } => {
                decision_tree_classify(train.instances(), labels, test.instances(), max_depth)
            }
        }
    }
}

impl fmt::Display for Classifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Classifier::Knn { k } => write!(f, "knn(k={k})"),
            Classifier::DecisionTree { max_depth } => write!(f, "decision_tree(max_depth={max_depth})"),
        }
    }
}

/// Parses `knn` or `tree`/`dt`/`decision_tree` with default parameters.
impl FromStr for Classifier {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "knn" => Ok(Classifier::Knn { k: 1 }),
            "tree" | "dt" | "decision_tree" | "decision-tree" => Ok(Classifier::DecisionTree { max_depth: DEFAULT_MAX_DEPTH }),
            other => Err(Error::Config(format!("unknown classifier '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierScore {
    pub classifier: Classifier,
    #[serde(serialize_with = "six")]
    pub accuracy_generated: f64,
    #[serde(serialize_with = "six")]
    pub accuracy_true: f64,
    /// `accuracy_true - accuracy_generated`.
    #[serde(serialize_with = "six")]
    pub gap: f64,
}

impl ClassifierScore {
    pub fn new(classifier: Classifier, accuracy_generated: f64, accuracy_true: f64) -> Self {
        let (g, t) = (round6(accuracy_generated), round6(accuracy_true));
        ClassifierScore { classifier, accuracy_generated: g, accuracy_true: t, gap: round6(t - g) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub dataset: String,
    #[serde(serialize_with = "six")]
    pub rep_fraction: f64,
    /// Agreement of the generated train labels with the true ones.
    #[serde(serialize_with = "six_opt")]
    pub label_accuracy: Option<f64>,
    pub train_size: usize,
    pub test_size: usize,
    pub classifiers: Vec<ClassifierScore>,
    /// Where the self-correction log of the generated labels lives.
    pub iterations: Option<String>,
}

impl EvaluationReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

pub fn accuracy(predicted: &[usize], truth: &[usize]) -> Result<f64> {
    if predicted.len() != truth.len() || truth.is_empty() {
        return Err(Error::Contract(format!("{} predictions for {} references", predicted.len(), truth.len())));
    }
    Ok(predicted.iter().zip(truth).filter(|(a, b)| a == b).count() as f64 / truth.len() as f64)
}

/// Trains every classifier on the generated and on the true train labels
/// and scores both on `test`, whose labels must share the train class ids.
pub fn evaluate_pipeline<T: Scalar>(
    train: &TimeSeriesDataset<T>,
    test: &TimeSeriesDataset<T>,
    generated: &LabelVector,
    true_train_labels: &[usize],
    classifiers: &[Classifier],
    rep_fraction: f64,
) -> Result<EvaluationReport> {
    if generated.len() != train.len() {
        return Err(Error::Contract(format!(
            "{} generated labels for {} training instances",
            generated.len(),
            train.len()
        )));
    }
    if true_train_labels.len() != train.len() {
        return Err(Error::Contract(format!(
            "{} true labels for {} training instances",
            true_train_labels.len(),
            train.len()
        )));
    }
    let test_labels = test
        .labels()
        .ok_or_else(|| Error::Contract(format!("test set '{}' has no labels", test.name)))?;
    let mut scores = Vec::with_capacity(classifiers.len());
    for c in classifiers {
        let gen = accuracy(&c.predict(train, &generated.labels, test)?, test_labels)?;
        let tru = accuracy(&c.predict(train, true_train_labels, test)?, test_labels)?;
        scores.push(ClassifierScore::new(*c, gen, tru));
    }
    Ok(EvaluationReport {
        dataset: train.name.clone(),
        rep_fraction: round6(rep_fraction),
        label_accuracy: Some(round6(generated.accuracy(true_train_labels)?)),
        train_size: train.len(),
        test_size: test.len(),
        classifiers: scores,
        iterations: None,
    })
}
