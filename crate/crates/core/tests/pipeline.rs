use autolabel_core::aecs::{encode, AecsModel, CompactMatrix};
use autolabel_core::dataset::{load_ucr_tsv, write_ucr_tsv};
use autolabel_core::evaluate::{evaluate_pipeline, Classifier, EvaluationReport};
use autolabel_core::labeling::{sample_vae, VaeModel};
use autolabel_core::neuralnet::{Checkpoint, Parameters};
use autolabel_core::pipeline::{prepare, run_labeling, LabelOptions};
use autolabel_core::synthetic::{benchmark, SyntheticSpec};
use autolabel_core::{Error, LabelRunF32};

fn small_options() -> LabelOptions {
    let mut options = LabelOptions { compact_length: 4, aecs_epochs: 20, rep_fraction: 0.25, ..LabelOptions::default() };
    options.self_correct.vae.epochs = 10;
    options.self_correct.vae.hidden_size = 8;
    options.self_correct.max_iterations = 3;
    options
}

fn spec() -> SyntheticSpec {
    SyntheticSpec { per_class: 10, length: 24, ..SyntheticSpec::default() }
}

#[test]
fn single_precision_pipeline_labels_everything() {
    let ds = benchmark::<f32>(&spec()).unwrap();
    let run: LabelRunF32 = run_labeling(&ds, &small_options()).unwrap();
    assert_eq!(run.outcome.labels.len(), 30);
    assert!(run.outcome.labels.labels.iter().all(|&l| l < 3));
    assert!(run.model.loss_history.iter().all(|l| l.is_finite()));
    let last = run.outcome.log.last().unwrap();
    assert_eq!(last.iteration, run.outcome.log.len());
    assert_eq!(run.outcome.labels, *run.outcome.history.last().unwrap());
}

#[test]
fn ucr_file_round_trip_feeds_the_evaluation() {
    let dir = tempfile::tempdir().unwrap();
    let (train_path, test_path) = (dir.path().join("S_TRAIN.tsv"), dir.path().join("S_TEST.tsv"));
    write_ucr_tsv(&benchmark::<f64>(&spec()).unwrap(), &train_path).unwrap();
    write_ucr_tsv(&benchmark::<f64>(&SyntheticSpec { per_class: 5, seed: 3, ..spec() }).unwrap(), &test_path).unwrap();
    let train = load_ucr_tsv::<f64>(&train_path, false).unwrap();
    let test = load_ucr_tsv::<f64>(&test_path, false).unwrap().align_labels_to(&train).unwrap();
    assert_eq!(train.class_names(), ["1", "2", "3"]);

    let run = run_labeling(&train, &small_options()).unwrap();
    let classifiers = [Classifier::Knn { k: 1 }, Classifier::DecisionTree { max_depth: 4 }];
    let report = evaluate_pipeline(
        &prepare(&train, true),
        &prepare(&test, true),
        &run.outcome.labels,
        train.labels().unwrap(),
        &classifiers,
        0.25,
    )
    .unwrap();
    assert_eq!((report.train_size, report.test_size), (30, 15));
    assert_eq!(report.classifiers.len(), 2);
    for score in &report.classifiers {
        assert!((score.gap - (score.accuracy_true - score.accuracy_generated)).abs() < 1e-9);
    }
    let back = EvaluationReport::from_json(&report.to_json().unwrap()).unwrap();
    assert_eq!(back, report);

    let mut short = run.outcome.labels.clone();
    short.labels.pop();
    let err = evaluate_pipeline(&train, &test, &short, train.labels().unwrap(), &classifiers, 0.25).unwrap_err();
    assert!(matches!(err, Error::Contract(_)));
}

#[test]
fn checkpoints_reload_bit_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let ds = benchmark::<f64>(&spec()).unwrap();
    let mut options = small_options();
    options.self_correct.tau = 0.0;
    let run = run_labeling(&ds, &options).unwrap();

    let path = dir.path().join("aecs.json");
    run.model.to_checkpoint().save(&path).unwrap();
    let model = AecsModel::<f64>::from_checkpoint(&Checkpoint::load(&path).unwrap()).unwrap();
    assert_eq!(model.net.flatten(), run.model.net.flatten());
    let data = prepare(&ds, true);
    let a = encode(&run.model, &data).unwrap();
    let b = encode(&model, &data).unwrap();
    assert_eq!(a, b);

    let csv = dir.path().join("codes.csv");
    a.write_csv(&csv).unwrap();
    let read = CompactMatrix::<f64>::read_csv(&csv).unwrap();
    assert_eq!(read.embeddings.rows(), 30);
    for (x, y) in read.embeddings.as_slice().iter().zip(a.embeddings.as_slice()) {
        assert!((x - y).abs() <= 1e-8 * y.abs().max(1e-3));
    }

    let vae = autolabel_core::labeling::train_vae_with(
        &run.representatives,
        1,
        &autolabel_core::labeling::VaeConfig { hidden_size: 6, epochs: 4, seed: 8, ..Default::default() },
    )
    .unwrap();
    let vpath = dir.path().join("vae.json");
    vae.to_checkpoint().save(&vpath).unwrap();
    let back = VaeModel::<f64>::from_checkpoint(&Checkpoint::load(&vpath).unwrap()).unwrap();
    assert_eq!(back.net.flatten(), vae.net.flatten());
    assert_eq!(back.conditioning, vae.conditioning);
    assert_eq!(sample_vae(&back, 5, 1).unwrap(), sample_vae(&vae, 5, 1).unwrap());
}
