//! Label generation for unlabeled time-series collections from a small
//! expert-labeled subset.
//!
//! The pipeline encodes every series with an under-complete LSTM
//! autoencoder, clusters the codes under three distance measures, keeps the
//! clustering with the highest modified Hubert statistic, maps clusters to
//! classes through the labeled representatives, and refines the labels with
//! VAE-generated representatives until they stop changing.
//!
//! Numerical code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the scalar for the common cases.

pub mod aecs;
pub mod clustering;
pub mod dataset;
pub mod error;
pub mod evaluate;
pub mod labeling;
pub mod linalg;
pub mod matrix;
pub mod neuralnet;
pub mod pipeline;
pub mod scalar;
pub mod seed;
pub mod synthetic;

pub use error::{Error, Result};
pub use matrix::Matrix;
pub use scalar::Scalar;

pub type TimeSeries = dataset::TimeSeries<f64>;
pub type TimeSeriesDataset = dataset::TimeSeriesDataset<f64>;
pub type RepresentativeSet = dataset::RepresentativeSet<f64>;
pub type AecsModel = aecs::AecsModel<f64>;
pub type CompactMatrix = aecs::CompactMatrix<f64>;
pub type ClusteringResult = clustering::ClusteringResult<f64>;
pub type VaeModel = labeling::VaeModel<f64>;
pub type LabelRun = pipeline::LabelRun<f64>;

pub type TimeSeriesF32 = dataset::TimeSeries<f32>;
pub type TimeSeriesDatasetF32 = dataset::TimeSeriesDataset<f32>;
pub type RepresentativeSetF32 = dataset::RepresentativeSet<f32>;
pub type AecsModelF32 = aecs::AecsModel<f32>;
pub type CompactMatrixF32 = aecs::CompactMatrix<f32>;
pub type ClusteringResultF32 = clustering::ClusteringResult<f32>;
pub type VaeModelF32 = labeling::VaeModel<f32>;
pub type LabelRunF32 = pipeline::LabelRun<f32>;
