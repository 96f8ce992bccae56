//! Runs the labeling pipeline on the three-class synthetic benchmark and
//! prints the label accuracy of every self-correction iteration.
//!
//! `cargo run --release --example synthetic_benchmark -- [seed] [rep_fraction]`

use std::time::Instant;

use autolabel_core::pipeline::{run_labeling, LabelOptions};
use autolabel_core::synthetic::{benchmark, SyntheticSpec};

fn main() {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().map_or(42, |a| a.parse().expect("seed"));
    let fraction: f64 = args.next().map_or(0.10, |a| a.parse().expect("fraction"));
    let ds = benchmark::<f64>(&SyntheticSpec::default()).expect("benchmark");
    let truth = ds.labels().expect("labeled").to_vec();
    let options = LabelOptions { rep_fraction: fraction, seed, ..LabelOptions::default() };
    let start = Instant::now();
    let run = run_labeling(&ds, &options).expect("pipeline");
    for (rec, labels) in run.outcome.log.iter().zip(&run.outcome.history) {
        println!(
            "iteration {} pool {} mismatch {:.4} reward {} accuracy {:.4}",
            rec.iteration,
            rec.pool_size,
            rec.mismatch,
            rec.reward.value(),
            labels.accuracy(&truth).unwrap()
        );
    }
    let scores: Vec<String> = run
        .outcome
        .space
        .ranked
        .scores
        .iter()
        .map(|(m, t)| format!("{}={t:.4}", m.abbreviation()))
        .collect();
    println!("hubert {}; chosen {}", scores.join(" "), run.outcome.log[0].measure);
    println!("elapsed {:?}", start.elapsed());
}

