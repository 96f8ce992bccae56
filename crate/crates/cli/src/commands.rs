//! The four subcommands. Each reports failures together with the stage
//! that failed.

use std::fs;
use std::path::{Path, PathBuf};

use autolabel_core::aecs::{encode, train_aecs_with, AecsConfig, AecsModel};
use autolabel_core::clustering::best_clustering;
use autolabel_core::dataset::{load_ucr_dir, load_ucr_tsv, TimeSeriesDataset};
use autolabel_core::evaluate::{evaluate_pipeline, export_embedding_2d};
use autolabel_core::labeling::{LabelVector, SelfCorrectConfig, VaeConfig};
use autolabel_core::neuralnet::Checkpoint;
use autolabel_core::pipeline::{prepare, run_labeling, LabelOptions};
use autolabel_core::seed::SeedStream;
use autolabel_core::{Error, Result, Scalar};
use log::info;
use serde_json::json;

use crate::config::PipelineConfig;

pub const LABELS_FILE: &str = "labels.csv";
pub const ITERATIONS_FILE: &str = "iterations.json";
pub const EMBEDDING_FILE: &str = "embedding.csv";
pub const REPORT_FILE: &str = "report.json";
pub const META_FILE: &str = "run_meta.json";
pub const MODEL_FILE: &str = "aecs_model.json";
pub const AECS_FILE: &str = "aecs.csv";
pub const CLUSTERING_FILE: &str = "clustering.json";
pub const DENDROGRAM_FILE: &str = "dendrogram.json";

#[derive(Debug)]
pub struct Failure {
    pub stage: &'static str,
    pub error: Error,
}

pub type Outcome<R> = std::result::Result<R, Failure>;

trait Stage<R> {
    fn stage(self, stage: &'static str) -> Outcome<R>;
}

impl<R> Stage<R> for Result<R> {
    fn stage(self, stage: &'static str) -> Outcome<R> {
        self.map_err(|error| Failure { stage, error })
    }
}

/// Loads a UCR file, or a directory holding `<name>_dim<i>.tsv` channels.
pub fn load_dataset<T: Scalar>(path: &Path, config: &PipelineConfig) -> Result<TimeSeriesDataset<T>> {
    if path.is_dir() {
        let name = match &config.dataset_name {
            Some(n) => n.clone(),
            None => path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default(),
        };
        return load_ucr_dir(path, &name, config.has_header);
    }
    load_ucr_tsv(path, config.has_header)
}

fn required<'a>(path: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path> {
    path.as_deref().ok_or_else(|| Error::Config(format!("missing --{flag}")))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Io { path: path.to_path_buf(), source: e })
}

fn output_dir(config: &PipelineConfig) -> Outcome<&Path> {
    let dir = config.output_dir.as_path();
    fs::create_dir_all(dir)
        .map_err(|e| Error::Io { path: dir.to_path_buf(), source: e })
        .stage("creating the output directory")?;
    Ok(dir)
}

fn write_meta(config: &PipelineConfig, command: &str, outputs: &[&str]) -> Outcome<()> {
    let meta = json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "config": config,
        "threads": rayon::current_num_threads(),
        "outputs": outputs,
    });
    let text = serde_json::to_string_pretty(&meta).map_err(Error::from).stage("writing run metadata")?;
    write(&config.output_dir.join(META_FILE), &text).stage("writing run metadata")
}

/// `instance_index,label` rows with the original class names.
pub fn labels_csv(labels: &LabelVector, class_names: &[String]) -> String {
    let mut out = String::from("instance_index,label\n");
    for (i, &l) in labels.labels.iter().enumerate() {
        out.push_str(&format!("{i},{}\n", class_names[l]));
    }
    out
}

/// Reads a labels file written by `label`, mapping names to the class ids
/// of `train`.
pub fn read_labels<T: Scalar>(path: &Path, train: &TimeSeriesDataset<T>) -> Result<LabelVector> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io { path: path.to_path_buf(), source: e })?;
    let n = train.len();
    let mut labels: Vec<Option<usize>> = vec![None; n];
    let mut count = 0;
    for (row, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (row == 0 && line.starts_with("instance_index")) {
            continue;
        }
        let (idx, name) = line
            .split_once(',')
            .ok_or_else(|| Error::Parse { row: row + 1, message: format!("expected 'index,label', got '{line}'") })?;
        let idx: usize = idx
            .trim()
            .parse()
            .map_err(|_| Error::Parse { row: row + 1, message: format!("invalid instance index '{idx}'") })?;
        let class = train
            .class_names()
            .iter()
            .position(|c| c == name.trim())
            .ok_or_else(|| Error::Contract(format!("label '{}' at row {} is not a training class", name.trim(), row + 1)))?;
        if idx >= n || labels[idx].is_some() {
            return Err(Error::Contract(format!("instance index {idx} at row {} is out of range or repeated", row + 1)));
        }
        labels[idx] = Some(class);
        count += 1;
    }
    if count != n {
        return Err(Error::Contract(format!(
            "labels file {} holds {count} labels but the training set has {n} instances",
            path.display()
        )));
    }
    Ok(LabelVector { labels: labels.into_iter().map(|l| l.expect("all filled")).collect(), iteration: 0 })
}

pub fn label_options(config: &PipelineConfig) -> LabelOptions {
    LabelOptions {
        rep_fraction: config.rep_fraction,
        compact_length: config.compact_length,
        aecs_epochs: config.aecs_epochs,
        normalize: config.normalize,
        seed: config.seed,
        self_correct: SelfCorrectConfig {
            tau: config.tau,
            max_iterations: config.max_iterations,
            linkage: config.linkage,
            merge: config.merge,
            vae: VaeConfig { hidden_size: config.vae_hidden, epochs: config.vae_epochs, ..VaeConfig::default() },
            seed: 0,
        },
    }
}

fn label_stage<T: Scalar>(config: &PipelineConfig, train: &TimeSeriesDataset<T>, dir: &Path) -> Outcome<LabelVector> {
    let run = run_labeling(train, &label_options(config)).stage("generating labels")?;
    let names = train.class_names();
    write(&dir.join(LABELS_FILE), &labels_csv(&run.outcome.labels, names)).stage("writing labels")?;
    let log = serde_json::to_string_pretty(&run.outcome.log).map_err(Error::from).stage("writing the iteration log")?;
    write(&dir.join(ITERATIONS_FILE), &log).stage("writing the iteration log")?;
    let label_names: Vec<String> = run.outcome.labels.labels.iter().map(|&l| names[l].clone()).collect();
    export_embedding_2d(&run.outcome.space.unlabeled.embeddings, &label_names, dir.join(EMBEDDING_FILE))
        .stage("exporting the embedding")?;
    run.model.to_checkpoint().save(dir.join(MODEL_FILE)).stage("saving the autoencoder")?;
    info!(
        "{} labels after {} iteration(s){}",
        run.outcome.labels.len(),
        run.outcome.log.len(),
        if run.outcome.saturated { ", saturated" } else { "" }
    );
    Ok(run.outcome.labels)
}

pub fn cmd_label<T: Scalar>(config: &PipelineConfig) -> Outcome<()> {
    let path = required(&config.train_path, "train").stage("reading the configuration")?;
    let train: TimeSeriesDataset<T> = load_dataset(path, config).stage("loading the training set")?;
    let dir = output_dir(config)?;
    label_stage(config, &train, dir)?;
    write_meta(config, "label", &[LABELS_FILE, ITERATIONS_FILE, EMBEDDING_FILE, MODEL_FILE])
}

pub fn cmd_evaluate<T: Scalar>(config: &PipelineConfig) -> Outcome<()> {
    let train_path = required(&config.train_path, "train").stage("reading the configuration")?;
    let test_path = required(&config.test_path, "test").stage("reading the configuration")?;
    let classifiers = config.classifier_list().stage("reading the configuration")?;
    let train: TimeSeriesDataset<T> = load_dataset(train_path, config).stage("loading the training set")?;
    let test: TimeSeriesDataset<T> = load_dataset(test_path, config).stage("loading the test set")?;
    let test = test.align_labels_to(&train).stage("loading the test set")?;
    let dir = output_dir(config)?;
    let mut outputs = vec![REPORT_FILE];
    let generated = match &config.labels_path {
        Some(p) => read_labels(p, &train).stage("reading generated labels")?,
        None => {
            outputs.extend([LABELS_FILE, ITERATIONS_FILE, EMBEDDING_FILE, MODEL_FILE]);
            label_stage(config, &train, dir)?
        }
    };
    let truth = train
        .labels()
        .ok_or_else(|| Error::Contract("training set has no labels".into()))
        .stage("evaluating")?
        .to_vec();
    let (train_p, test_p) = (prepare(&train, config.normalize), prepare(&test, config.normalize));
    let mut report = evaluate_pipeline(&train_p, &test_p, &generated, &truth, &classifiers, config.rep_fraction)
        .stage("evaluating")?;
    if dir.join(ITERATIONS_FILE).exists() {
        report.iterations = Some(ITERATIONS_FILE.into());
    }
    let text = report.to_json().stage("writing the report")?;
    write(&dir.join(REPORT_FILE), &(text + "\n")).stage("writing the report")?;
    for s in &report.classifiers {
        info!("{}: generated {:.4} true {:.4}", s.classifier, s.accuracy_generated, s.accuracy_true);
    }
    write_meta(config, "evaluate", &outputs)
}

fn autoencoder<T: Scalar>(config: &PipelineConfig, data: &TimeSeriesDataset<T>) -> Outcome<AecsModel<T>> {
    if let Some(path) = &config.model_path {
        let ck = Checkpoint::load(path).stage("loading the autoencoder")?;
        return AecsModel::from_checkpoint(&ck).stage("loading the autoencoder");
    }
    let aecs = AecsConfig {
        compact_length: config.compact_length,
        epochs: config.aecs_epochs,
        seed: SeedStream::new(config.seed).derive("aecs"),
        ..AecsConfig::default()
    };
    train_aecs_with(data.instances(), &aecs).stage("training the autoencoder")
}

pub fn cmd_encode<T: Scalar>(config: &PipelineConfig) -> Outcome<()> {
    let path = required(&config.train_path, "train").stage("reading the configuration")?;
    let train: TimeSeriesDataset<T> = load_dataset(path, config).stage("loading the training set")?;
    let data = prepare(&train, config.normalize);
    let dir = output_dir(config)?;
    let model = autoencoder(config, &data)?;
    let codes = encode(&model, &data).stage("encoding")?;
    codes.write_csv(dir.join(AECS_FILE)).stage("writing embeddings")?;
    model.to_checkpoint().save(dir.join(MODEL_FILE)).stage("saving the autoencoder")?;
    write_meta(config, "encode", &[AECS_FILE, MODEL_FILE])
}

pub fn cmd_cluster<T: Scalar>(config: &PipelineConfig) -> Outcome<()> {
    let path = required(&config.train_path, "train").stage("reading the configuration")?;
    let train: TimeSeriesDataset<T> = load_dataset(path, config).stage("loading the training set")?;
    let k = config
        .clusters
        .or_else(|| train.class_count())
        .ok_or_else(|| Error::Config("set --clusters for an unlabeled dataset".into()))
        .stage("reading the configuration")?;
    let data = prepare(&train, config.normalize);
    let dir = output_dir(config)?;
    let model = autoencoder(config, &data)?;
    let codes = encode(&model, &data).stage("encoding")?;
    let ranked = best_clustering(&codes.embeddings, k, config.linkage).stage("clustering")?;
    let best = &ranked.best;
    let scores: serde_json::Map<String, serde_json::Value> =
        ranked.scores.iter().map(|(m, t)| (m.name().to_string(), json!(t.as_f64()))).collect();
    let summary = json!({
        "k": k,
        "linkage": config.linkage,
        "measure": best.measure.kind(),
        "hubert": best.hubert.as_f64(),
        "scores": scores,
        "sizes": best.sizes(),
        "assignments": best.assignments,
    });
    let text = serde_json::to_string_pretty(&summary).map_err(Error::from).stage("writing the clustering")?;
    write(&dir.join(CLUSTERING_FILE), &text).stage("writing the clustering")?;
    if let Some(d) = &best.dendrogram {
        write(&dir.join(DENDROGRAM_FILE), &d.to_json().to_string()).stage("writing the dendrogram")?;
    }
    info!("best measure {} with T = {:.6}", best.measure.kind(), best.hubert.as_f64());
    write_meta(config, "cluster", &[CLUSTERING_FILE, DENDROGRAM_FILE, MODEL_FILE])
}
