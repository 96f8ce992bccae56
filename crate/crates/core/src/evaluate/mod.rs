//! Validation of generated labels with simple base classifiers, and a 2-D
//! embedding export for plotting.

pub mod knn;
pub mod pca;
pub mod report;
pub mod tree;

pub use knn::knn_classify;
pub use pca::{export_embedding_2d, project_2d, Pca};
pub use report::{accuracy, evaluate_pipeline, round6, Classifier, ClassifierScore, EvaluationReport};
pub use tree::{decision_tree_classify, DecisionTree, DEFAULT_MAX_DEPTH};
