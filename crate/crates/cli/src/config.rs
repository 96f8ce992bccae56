//! Resolved run configuration: defaults, then an optional TOML file, then
//! command-line flags.

use std::fs;
use std::path::{Path, PathBuf};

use autolabel_core::clustering::Linkage;
use autolabel_core::evaluate::Classifier;
use autolabel_core::{Error, Result};
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    F32,
    #[default]
    F64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub train_path: Option<PathBuf>,
    pub test_path: Option<PathBuf>,
    /// Generated labels to evaluate instead of running the labeling stage.
    pub labels_path: Option<PathBuf>,
    /// Autoencoder checkpoint to encode with instead of training one.
    pub model_path: Option<PathBuf>,
    pub output_dir: PathBuf,
    /// File prefix when an input path is a directory of `<name>_dim<i>.tsv`.
    pub dataset_name: Option<String>,
    pub has_header: bool,
    pub rep_fraction: f64,
    pub tau: f64,
    pub compact_length: usize,
    pub seed: u64,
    pub max_iterations: usize,
    pub aecs_epochs: usize,
    pub vae_epochs: usize,
    pub vae_hidden: usize,
    pub linkage: Linkage,
    pub normalize: bool,
    pub merge: bool,
    /// Number of clusters for `cluster`; defaults to the class count.
    pub clusters: Option<usize>,
    pub classifiers: Vec<String>,
    pub knn_k: usize,
    pub tree_depth: usize,
    pub precision: Precision,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            train_path: None,
            test_path: None,
            labels_path: None,
            model_path: None,
            output_dir: PathBuf::from("autolabel-out"),
            dataset_name: None,
            has_header: false,
            rep_fraction: 0.15,
            tau: 0.05,
            compact_length: 12,
            seed: 42,
            max_iterations: 10,
            aecs_epochs: 150,
            vae_epochs: 150,
            vae_hidden: 32,
            linkage: Linkage::Average,
            normalize: true,
            merge: true,
            clusters: None,
            classifiers: vec!["knn".into(), "tree".into()],
            knn_k: 1,
            tree_depth: autolabel_core::evaluate::DEFAULT_MAX_DEPTH,
            precision: Precision::F64,
        }
    }
}

/// Flags shared by every command; each overrides the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// TOML file with any of the settings below (snake_case keys)
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub train: Option<PathBuf>,
    #[arg(long)]
    pub test: Option<PathBuf>,
    /// labels.csv from an earlier `label` run
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Autoencoder checkpoint to reuse
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long, short = 'o')]
    pub output_dir: Option<PathBuf>,
    #[arg(long)]
    pub dataset_name: Option<String>,
    /// Skip the first line of every input file
    #[arg(long)]
    pub has_header: bool,
    #[arg(long, visible_alias = "rep-fraction")]
    pub rep_frac: Option<f64>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long, short = 'p')]
    pub compact_length: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub max_iterations: Option<usize>,
    #[arg(long)]
    pub aecs_epochs: Option<usize>,
    #[arg(long)]
    pub vae_epochs: Option<usize>,
    #[arg(long)]
    pub vae_hidden: Option<usize>,
    #[arg(long)]
    pub linkage: Option<String>,
    #[arg(long, overrides_with = "no_normalize")]
    pub normalize: bool,
    #[arg(long)]
    pub no_normalize: bool,
    #[arg(long, overrides_with = "no_merge")]
    pub merge: bool,
    /// Cluster the unlabeled set without the representatives
    #[arg(long)]
    pub no_merge: bool,
    #[arg(long)]
    pub clusters: Option<usize>,
    /// knn or tree; repeat for several
    #[arg(long = "classifier")]
    pub classifiers: Vec<String>,
    #[arg(long)]
    pub knn_k: Option<usize>,
    #[arg(long)]
    pub tree_depth: Option<usize>,
    #[arg(long, value_enum)]
    pub precision: Option<Precision>,
}

impl PipelineConfig {
    pub fn from_toml_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Io { path: path.to_path_buf(), source: e })?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Defaults, overlaid by the `--config` file, overlaid by flags.
    pub fn resolve(args: &ConfigArgs) -> Result<Self> {
        let mut c = match &args.config {
            Some(path) => Self::from_toml_file(path)?,
            None => PipelineConfig::default(),
        };
        macro_rules! overlay {
            ($($flag:ident => $field:ident),* $(,)?) => {
                $(if let Some(v) = args.$flag.clone() { c.$field = v.into(); })*
            };
        }
        overlay!(
            rep_frac => rep_fraction,
            tau => tau,
            compact_length => compact_length,
            seed => seed,
            max_iterations => max_iterations,
            aecs_epochs => aecs_epochs,
            vae_epochs => vae_epochs,
            vae_hidden => vae_hidden,
            knn_k => knn_k,
            tree_depth => tree_depth,
            output_dir => output_dir,
            precision => precision,
        );
        if args.train.is_some() {
            c.train_path = args.train.clone();
        }
        if args.test.is_some() {
            c.test_path = args.test.clone();
        }
        if args.labels.is_some() {
            c.labels_path = args.labels.clone();
        }
        if args.model.is_some() {
            c.model_path = args.model.clone();
        }
        if args.dataset_name.is_some() {
            c.dataset_name = args.dataset_name.clone();
        }
        if args.clusters.is_some() {
            c.clusters = args.clusters;
        }
        if let Some(l) = &args.linkage {
            c.linkage = l.parse()?;
        }
        if args.has_header {
            c.has_header = true;
        }
        if args.normalize {
            c.normalize = true;
        }
        if args.no_normalize {
            c.normalize = false;
        }
        if args.merge {
            c.merge = true;
        }
        if args.no_merge {
            c.merge = false;
        }
        if !args.classifiers.is_empty() {
            c.classifiers = args.classifiers.clone();
        }
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if !(self.rep_fraction > 0.0 && self.rep_fraction <= 1.0) {
            return fail(format!("rep_fraction must lie in (0, 1], got {}", self.rep_fraction));
        }
        if !(0.0..1.0).contains(&self.tau) {
            return fail(format!("tau must lie in [0, 1), got {}", self.tau));
        }
        if self.compact_length < 2 {
            return fail(format!("compact_length must be at least 2, got {}", self.compact_length));
        }
        for (name, v) in [
            ("max_iterations", self.max_iterations),
            ("aecs_epochs", self.aecs_epochs),
            ("vae_epochs", self.vae_epochs),
            ("vae_hidden", self.vae_hidden),
            ("knn_k", self.knn_k),
            ("tree_depth", self.tree_depth),
        ] {
            if v == 0 {
                return fail(format!("{name} must be positive"));
            }
        }
        if self.clusters.is_some_and(|k| k < 2) {
            return fail("clusters must be at least 2".into());
        }
        self.classifier_list()?;
        Ok(())
    }

    pub fn classifier_list(&self) -> Result<Vec<Classifier>> {
        if self.classifiers.is_empty() {
            return Err(Error::Config("no classifier selected".into()));
        }
        self.classifiers
            .iter()
            .map(|name| {
                Ok(match name.parse::<Classifier>()? {
                    Classifier::Knn { .. } => Classifier::Knn { k: self.knn_k },
                    Classifier::DecisionTree { .. } => Classifier::DecisionTree { max_depth: self.tree_depth },
                })
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file_override_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        fs::write(&path, "seed = 7\ntau = 0.1\nlinkage = \"complete\"\nclassifiers = [\"knn\"]\n").unwrap();
        let args = ConfigArgs { config: Some(path.clone()), seed: Some(9), ..ConfigArgs::default() };
        let c = PipelineConfig::resolve(&args).unwrap();
        assert_eq!(c.seed, 9);
        assert_eq!(c.tau, 0.1);
        assert_eq!(c.linkage, Linkage::Complete);
        assert_eq!(c.rep_fraction, 0.15);
        assert_eq!(c.classifier_list().unwrap(), vec![Classifier::Knn { k: 1 }]);
    }

    #[test]
    fn invalid_values_are_config_errors() {
        for args in [
            ConfigArgs { rep_frac: Some(0.0), ..ConfigArgs::default() },
            ConfigArgs { tau: Some(1.0), ..ConfigArgs::default() },
            ConfigArgs { compact_length: Some(1), ..ConfigArgs::default() },
            ConfigArgs { linkage: Some("ward".into()), ..ConfigArgs::default() },
            ConfigArgs { classifiers: vec!["mlp".into()], ..ConfigArgs::default() },
        ] {
            assert!(matches!(PipelineConfig::resolve(&args), Err(Error::Config(_))), "{args:?}");
        }
    }

    #[test]
    fn unknown_file_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.toml");
        fs::write(&path, "learning_rate = 0.1\n").unwrap();
        let args = ConfigArgs { config: Some(path), ..ConfigArgs::default() };
        assert!(matches!(PipelineConfig::resolve(&args), Err(Error::Config(_))));
    }

    #[test]
    fn config_serializes_to_toml_and_back() {
        let c = PipelineConfig { train_path: Some("a.tsv".into()), ..PipelineConfig::default() };
        let text = toml::to_string(&c).unwrap();
        assert_eq!(toml::from_str::<PipelineConfig>(&text).unwrap(), c);
    }
}
