//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any
//! gating criterion fails.
//!
//! Criterion 7 needs the UCR DistalPhalanxOutlineAgeGroup files; point
//! `AUTOLABEL_UCR_DIR` at a directory holding
//! `DistalPhalanxOutlineAgeGroup_TRAIN.tsv` and `_TEST.tsv` to run it.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use autolabel_core::aecs::{encode_instances, AecsModel, AecsNet};
use autolabel_core::clustering::{
    modified_hubert, ClusteringResult, DistanceMeasure, Linkage, MahalanobisMetric, MeasureKind,
};
use autolabel_core::dataset::{load_ucr_tsv, write_ucr_tsv, RepresentativeSet, TimeSeries, TimeSeriesDataset};
use autolabel_core::evaluate::knn_classify;
use autolabel_core::labeling::{
    cluster_class_associate, kl_standard_normal, label_discriminator, sample_with_noise, train_vae_with, LabelVector,
    Reward, VaeConfig, VaeNet,
};
use autolabel_core::neuralnet::Parameters;
use autolabel_core::pipeline::{prepare, run_labeling, LabelOptions};
use autolabel_core::synthetic::{benchmark, SyntheticSpec};
use autolabel_core::Matrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Verdict = Result<String, String>;

fn check(cond: bool, pass: String, fail: String) -> Verdict {
    if cond {
        Ok(pass)
    } else {
        Err(fail)
    }
}

fn within(elapsed: Duration, limit_s: f64) -> Result<(), String> {
    if elapsed.as_secs_f64() < limit_s {
        Ok(())
    } else {
        Err(format!("took {:.1} s, limit {limit_s} s", elapsed.as_secs_f64()))
    }
}

fn quad(a: &[f64], b: &[f64], s: &nalgebra::DMatrix<f64>) -> f64 {
    let d = nalgebra::DVector::from_iterator(a.len(), a.iter().zip(b).map(|(x, y)| x - y));
    (d.transpose() * s * &d)[(0, 0)].max(0.0).sqrt()
}

/// Regularized inverse sample covariance, computed with nalgebra.
fn inverse_covariance(rows: &[Vec<f64>]) -> nalgebra::DMatrix<f64> {
    let n = rows.len();
    let p = rows[0].len();
    let x = nalgebra::DMatrix::from_fn(n, p, |i, j| rows[i][j]);
    let mean = x.row_mean();
    let centered = nalgebra::DMatrix::from_fn(n, p, |i, j| x[(i, j)] - mean[j]);
    let mut cov = centered.transpose() * &centered / (n as f64 - 1.0);
    let trace = cov.trace();
    if trace <= 0.0 {
        return nalgebra::DMatrix::identity(p, p);
    }
    for i in 0..p {
        cov[(i, i)] += 1e-6 * trace / p as f64;
    }
    cov.try_inverse().expect("regularized covariance is invertible")
}

fn centroids(rows: &[Vec<f64>], assign: &[usize], k: usize) -> Vec<Vec<f64>> {
    let p = rows[0].len();
    let mut cent = vec![vec![0.0; p]; k];
    let mut size = vec![0.0; k];
    for (row, &a) in rows.iter().zip(assign) {
        size[a] += 1.0;
        for j in 0..p {
            cent[a][j] += row[j];
        }
    }
    for c in 0..k {
        cent[c].iter_mut().for_each(|v| *v /= size[c]);
    }
    cent
}

/// Ordered-pair double sum over `i != j`, divided by n(n - 1).
fn hubert_oracle(rows: &[Vec<f64>], assign: &[usize], cent: &[Vec<f64>], s: &nalgebra::DMatrix<f64>) -> f64 {
    let n = rows.len();
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                sum += quad(&rows[i], &rows[j], s) * quad(&cent[assign[i]], &cent[assign[j]], s);
            }
        }
    }
    sum / (n * (n - 1)) as f64
}

fn relative(got: f64, want: f64) -> f64 {
    if want == 0.0 {
        got.abs()
    } else {
        ((got - want) / want).abs()
    }
}

struct HubertCase {
    rows: Vec<Vec<f64>>,
    assign: Vec<usize>,
    k: usize,
}

fn hubert_case(rng: &mut ChaCha8Rng, full_rank: bool) -> HubertCase {
    let p = rng.random_range(1..=12);
    let n = if full_rank { rng.random_range(p + 1..=60) } else { rng.random_range(2..=p.max(2)) };
    let k = rng.random_range(1..=n.min(6));
    let rows = (0..n).map(|_| (0..p).map(|_| rng.random_range(-4.0..4.0)).collect()).collect();
    let assign = (0..n).map(|i| if i < k { i } else { rng.random_range(0..k) }).collect();
    HubertCase { rows, assign, k }
}

/// Worst relative error against the oracle with the fitted inverse
/// covariance and against the oracle with an independently computed one.
fn hubert_errors(case: &HubertCase) -> (f64, f64) {
    let HubertCase { rows, assign, k } = case;
    let p = rows[0].len();
    let x = Matrix::from_rows(rows).unwrap();
    let r = ClusteringResult::from_assignments(&x, assign.clone(), *k, DistanceMeasure::Chebyshev).unwrap();
    let got = modified_hubert(&x, &r).unwrap();
    let cent = centroids(rows, assign, *k);
    let fitted = MahalanobisMetric::fit(&x).unwrap();
    let inv = fitted.inverse_covariance();
    let shared = nalgebra::DMatrix::from_fn(p, p, |i, j| inv[(i, j)]);
    let own = inverse_covariance(rows);
    (
        relative(got, hubert_oracle(rows, assign, &cent, &shared)),
        relative(got, hubert_oracle(rows, assign, &cent, &own)),
    )
}

fn criterion_1() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut shared, mut own): (f64, f64) = (0.0, 0.0);
    for _ in 0..100 {
        let (a, b) = hubert_errors(&hubert_case(&mut rng, true));
        shared = shared.max(a);
        own = own.max(b);
    }
    let elapsed = start.elapsed();
    // With n <= p only the ridge keeps the covariance invertible; reported, not gated.
    let mut deficient: f64 = 0.0;
    for _ in 0..20 {
        let (a, b) = hubert_errors(&hubert_case(&mut rng, false));
        deficient = deficient.max(a).max(b);
    }
    within(elapsed, 10.0)?;
    check(
        shared <= 1e-12 && own <= 1e-12,
        format!(
            "100 instances with n > p, max relative error {shared:.2e} (fitted inverse) / {own:.2e} (independent inverse), {:.2} s; rank-deficient n <= p: {deficient:.1e}",
            elapsed.as_secs_f64()
        ),
        format!("max relative error {shared:.2e} (fitted inverse) / {own:.2e} (independent inverse), limit 1e-12"),
    )
}

fn random_series(rng: &mut ChaCha8Rng, len: usize) -> TimeSeries<f64> {
    let v: Vec<f64> = (0..len).map(|_| rng.random_range(-2.0..2.0)).collect();
    TimeSeries::univariate(&v).unwrap()
}

/// Algorithm 1 written out: nearest centroid per representative, modal
/// class per cluster (smallest class on ties), nearest representative for
/// clusters nobody votes for, then every instance takes its cluster's class.
fn cca_oracle(centroids: &Matrix<f64>, assign: &[usize], reps: &Matrix<f64>, labels: &[usize], measure: &DistanceMeasure<f64>) -> Vec<usize> {
    let s = match measure {
        DistanceMeasure::Mahalanobis(m) => {
            let inv = m.inverse_covariance();
            Some(nalgebra::DMatrix::from_fn(inv.rows(), inv.cols(), |i, j| inv[(i, j)]))
        }
        _ => None,
    };
    let d = |a: &[f64], b: &[f64]| -> f64 {
        match measure.kind() {
            MeasureKind::Chebyshev => a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max),
            MeasureKind::Manhattan => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
            MeasureKind::Mahalanobis => quad(a, b, s.as_ref().unwrap()),
        }
    };
    let k = centroids.rows();
    let classes = labels.iter().max().unwrap() + 1;
    let mut votes = vec![vec![0usize; classes]; k];
    for r in 0..reps.rows() {
        let dists: Vec<f64> = (0..k).map(|c| d(centroids.row(c), reps.row(r))).collect();
        let best = (0..k).fold(0, |b, c| if dists[c] < dists[b] { c } else { b });
        votes[best][labels[r]] += 1;
    }
    let class: Vec<usize> = (0..k)
        .map(|c| {
            let top = *votes[c].iter().max().unwrap();
            if top > 0 {
                votes[c].iter().position(|&v| v == top).unwrap()
            } else {
                let dists: Vec<f64> = (0..reps.rows()).map(|r| d(centroids.row(c), reps.row(r))).collect();
                labels[(0..reps.rows()).fold(0, |b, r| if dists[r] < dists[b] { r } else { b })]
            }
        })
        .collect();
    assign.iter().map(|&a| class[a]).collect()
}

fn criterion_2() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut measures = [0usize; 3];
    for case in 0..100u64 {
        let n = rng.random_range(6..30);
        let k = rng.random_range(2..5);
        let m = rng.random_range(k..3 * k + 1);
        let p = rng.random_range(2..5);
        let x_u: Vec<TimeSeries<f64>> = (0..n).map(|_| { let l = rng.random_range(6..10); random_series(&mut rng, l) }).collect();
        let reps: Vec<TimeSeries<f64>> = (0..m).map(|_| random_series(&mut rng, 8)).collect();
        let labels: Vec<usize> = (0..m).map(|i| if i < k { i } else { rng.random_range(0..k) }).collect();
        let x_u = TimeSeriesDataset::unlabeled("cca", x_u).unwrap();
        let reps = RepresentativeSet::from_expert(reps, labels.clone(), k).unwrap();
        let model = AecsModel { net: AecsNet::new(1, p, case), seed: case, loss_history: Vec::new() };
        let merge = case % 2 == 0;
        let out = cluster_class_associate(&x_u, &reps, &model, Linkage::Average, merge)
            .map_err(|e| format!("case {case}: {e}"))?;
        let clustering = out.space.clustering();
        measures[clustering.measure.kind() as usize] += 1;
        let rep_codes = encode_instances(&model, reps.instances()).unwrap();
        let expected = cca_oracle(&clustering.centroids, &clustering.assignments, &rep_codes.embeddings, &labels, &clustering.measure);
        if out.labels.labels[..] != expected[..n] {
            return Err(format!("case {case}: label vectors differ"));
        }
    }
    within(start.elapsed(), 30.0)?;
    Ok(format!(
        "100 instances match (CH/MN/ML chosen {}/{}/{} times), {:.2} s",
        measures[0],
        measures[1],
        measures[2],
        start.elapsed().as_secs_f64()
    ))
}

fn toy_series() -> Vec<TimeSeries<f64>> {
    [[0.1, 0.5, -0.3, 0.8, 0.2, -0.6], [-0.4, 0.0, 0.9, -0.1, 0.3, 0.7], [0.6, -0.8, 0.4, 0.0, -0.5, 0.2]]
        .iter()
        .map(|v| TimeSeries::univariate(v).unwrap())
        .collect()
}

/// Largest violation ratio |fd − g| / max(1e-4, 1e-2·|g|) over all parameters.
fn fd_ratio<N: Parameters<f64>>(net: &mut N, analytic: &[f64], loss: impl Fn(&N) -> f64) -> f64 {
    let base = net.flatten();
    let eps = 1e-5;
    let mut worst: f64 = 0.0;
    for (i, &g) in analytic.iter().enumerate() {
        let mut p = base.clone();
        p[i] = base[i] + eps;
        net.assign_flat(&p).unwrap();
        let up = loss(net);
        p[i] = base[i] - eps;
        net.assign_flat(&p).unwrap();
        let down = loss(net);
        let fd = (up - down) / (2.0 * eps);
        worst = worst.max((fd - g).abs() / 1e-4_f64.max(1e-2 * g.abs()));
    }
    net.assign_flat(&base).unwrap();
    worst
}

fn criterion_3() -> Verdict {
    let start = Instant::now();
    let data = toy_series();
    let batch: Vec<&TimeSeries<f64>> = data.iter().collect();

    let mut aecs = AecsNet::<f64>::new(1, 3, 11);
    let (_, g) = aecs.loss_and_gradients(&batch).unwrap();
    let aecs_ratio = fd_ratio(&mut aecs, &g.flatten(), |n| n.loss(&batch).unwrap());

    let mut vae = VaeNet::<f64>::new(1, 6, 3, 12);
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let noise = Matrix::from_vec(3, 6, (0..18).map(|_| rng.random_range(-1.5..1.5)).collect()).unwrap();
    let (_, g) = vae.loss_and_gradients(&batch, &noise).unwrap();
    let vae_ratio = fd_ratio(&mut vae, &g.flatten(), |n| n.loss_with_noise(&batch, &noise).unwrap());

    within(start.elapsed(), 60.0)?;
    check(
        aecs_ratio <= 1.0 && vae_ratio <= 1.0,
        format!(
            "autoencoder {} and VAE {} parameters within tolerance (worst ratio {aecs_ratio:.3}, {vae_ratio:.3})",
            aecs.parameter_count(),
            vae.parameter_count()
        ),
        format!("worst tolerance ratio autoencoder {aecs_ratio:.3}, VAE {vae_ratio:.3}"),
    )
}

fn criterion_4() -> Verdict {
    let reps = RepresentativeSet::from_expert(toy_series(), vec![0, 0, 1], 2).unwrap();
    let config = VaeConfig { hidden_size: 8, epochs: 5, seed: 4, ..VaeConfig::default() };
    let model = train_vae_with(&reps, 0, &config).map_err(|e| e.to_string())?;
    for i in 0..model.conditioning.len() {
        let (z, _) = sample_with_noise(&model, i, &[0.0; 6]).map_err(|e| e.to_string())?;
        let (mu, _) = model.net.encode_distribution(&model.conditioning[i]).unwrap();
        if z != mu {
            return Err(format!("conditioning instance {i}: z != mu with zero noise"));
        }
    }
    let kl0: f64 = kl_standard_normal(&[0.0], &[0.0]);
    let kl1: f64 = kl_standard_normal(&[1.0], &[0.0]);
    check(
        kl0.abs() <= 1e-12 && (kl1 - 0.5).abs() <= 1e-12,
        format!("z == mu bitwise for every conditioning instance; KL(0,1) = {kl0}, KL(1,1) = {kl1}"),
        format!("KL(0,1) = {kl0}, KL(1,1) = {kl1}"),
    )
}

fn criterion_5() -> Verdict {
    let start = Instant::now();
    let ds = benchmark::<f64>(&SyntheticSpec::default()).unwrap();
    let options = LabelOptions { rep_fraction: 0.10, seed: 42, ..LabelOptions::default() };
    let run = run_labeling(&ds, &options).map_err(|e| e.to_string())?;
    let truth = ds.labels().unwrap();
    let final_acc = run.outcome.labels.accuracy(truth).unwrap();
    let first_acc = run.outcome.history[0].accuracy(truth).unwrap();
    within(start.elapsed(), 300.0)?;
    check(
        final_acc >= 0.90 && final_acc >= first_acc,
        format!(
            "accuracy {final_acc:.4} (iteration 1: {first_acc:.4}) after {} iteration(s), {:.1} s",
            run.outcome.log.len(),
            start.elapsed().as_secs_f64()
        ),
        format!("final accuracy {final_acc:.4}, iteration 1 accuracy {first_acc:.4}"),
    )
}

const SEED_SWEEP_AECS_EPOCHS: usize = 20;
const SEED_SWEEP_VAE_EPOCHS: usize = 30;

fn criterion_6() -> Verdict {
    let n = 20;
    let tau = 0.05;
    let previous = LabelVector { labels: vec![0; n], iteration: 1 };
    let mut one = previous.labels.clone();
    one[0] = 1;
    let mut two = one.clone();
    two[1] = 1;
    let (m1, r1) = label_discriminator(&LabelVector { labels: one, iteration: 2 }, Some(&previous), tau).unwrap();
    let (m2, r2) = label_discriminator(&LabelVector { labels: two, iteration: 2 }, Some(&previous), tau).unwrap();
    if m1 != tau || r1 != Reward::Saturated {
        return Err(format!("mismatch {m1} gave reward {}", r1.value()));
    }
    if r2 != Reward::Continue {
        return Err(format!("mismatch {m2} gave reward {}", r2.value()));
    }
    let start = Instant::now();
    let mut iterations = Vec::new();
    for seed in 1..=20u64 {
        let ds = benchmark::<f64>(&SyntheticSpec { seed, ..SyntheticSpec::default() }).unwrap();
        let mut options = LabelOptions {
            rep_fraction: 0.10,
            seed,
            aecs_epochs: SEED_SWEEP_AECS_EPOCHS,
            ..LabelOptions::default()
        };
        options.self_correct.vae.epochs = SEED_SWEEP_VAE_EPOCHS;
        let cap = options.self_correct.max_iterations;
        let run = run_labeling(&ds, &options).map_err(|e| format!("seed {seed}: {e}"))?;
        if run.outcome.log.len() > cap {
            return Err(format!("seed {seed}: {} iterations exceed the cap {cap}", run.outcome.log.len()));
        }
        iterations.push(run.outcome.log.len());
    }
    Ok(format!(
        "mismatch tau -> 0, tau+1/n -> 1; seeds 1..20 stopped after {iterations:?} iterations ({} / {} epochs, {:.1} s)",
        SEED_SWEEP_AECS_EPOCHS,
        SEED_SWEEP_VAE_EPOCHS,
        start.elapsed().as_secs_f64()
    ))
}

/// `None` when the data is not available.
fn criterion_7() -> Option<Verdict> {
    let dir = PathBuf::from(std::env::var_os("AUTOLABEL_UCR_DIR")?);
    let name = "DistalPhalanxOutlineAgeGroup";
    let find = |split: &str| -> Option<PathBuf> {
        [dir.join(format!("{name}_{split}.tsv")), dir.join(name).join(format!("{name}_{split}.tsv"))]
            .into_iter()
            .find(|p| p.exists())
    };
    let (train_path, test_path) = (find("TRAIN")?, find("TEST")?);
    Some((|| {
        let train = load_ucr_tsv::<f64>(&train_path, false).map_err(|e| e.to_string())?;
        let test = load_ucr_tsv::<f64>(&test_path, false).and_then(|t| t.align_labels_to(&train)).map_err(|e| e.to_string())?;
        let options = LabelOptions { rep_fraction: 0.15, ..LabelOptions::default() };
        let run = run_labeling(&train, &options).map_err(|e| e.to_string())?;
        let ranked = &run.outcome.space.ranked;
        let max = ranked.scores.iter().map(|s| s.1).fold(f64::MIN, f64::max);
        if ranked.best.hubert != max {
            return Err("selected measure does not have the largest Hubert score".into());
        }
        let (tr, te) = (prepare(&train, true), prepare(&test, true));
        let truth = test.labels().unwrap();
        let score = |labels: &[usize]| -> f64 {
            let pred = knn_classify(tr.instances(), labels, te.instances(), 1).unwrap();
            pred.iter().zip(truth).filter(|(a, b)| a == b).count() as f64 / truth.len() as f64
        };
        let generated = score(&run.outcome.labels.labels);
        let true_acc = score(train.labels().unwrap());
        let scores: Vec<String> = ranked.scores.iter().map(|(m, t)| format!("{}={t:.3}", m.abbreviation())).collect();
        check(
            (true_acc - generated).abs() <= 0.15,
            format!("best {} ({}), 1-NN generated {generated:.3} vs true {true_acc:.3}", ranked.best.measure.kind(), scores.join(" ")),
            format!("1-NN generated {generated:.3} vs true {true_acc:.3}, gap above 0.15"),
        )
    })())
}

fn autolabel() -> Command {
    Command::new(env!("CARGO_BIN_EXE_autolabel"))
}

fn write_benchmark(dir: &Path) -> (PathBuf, PathBuf) {
    let train = benchmark::<f64>(&SyntheticSpec::default()).unwrap();
    let test = benchmark::<f64>(&SyntheticSpec { per_class: 30, seed: 4242, ..SyntheticSpec::default() }).unwrap();
    let (a, b) = (dir.join("SYN_TRAIN.tsv"), dir.join("SYN_TEST.tsv"));
    write_ucr_tsv(&train, &a).unwrap();
    write_ucr_tsv(&test, &b).unwrap();
    (a, b)
}

fn criterion_8() -> Verdict {
    let tmp = tempfile::tempdir().unwrap();
    let (train, test) = write_benchmark(tmp.path());
    let start = Instant::now();
    let mut outputs = Vec::new();
    for (run, threads) in [("run-a", None), ("run-b", Some("3"))] {
        let out = tmp.path().join(run);
        let mut cmd = autolabel();
        cmd.arg("evaluate").arg("--train").arg(&train).arg("--test").arg(&test).arg("--output-dir").arg(&out);
        if let Some(t) = threads {
            cmd.env("AUTOLABEL_THREADS", t);
        }
        let status = cmd.output().map_err(|e| e.to_string())?;
        if !status.status.success() {
            return Err(format!("{run} failed: {}", String::from_utf8_lossy(&status.stderr)));
        }
        outputs.push(out);
    }
    for file in ["labels.csv", "iterations.json", "report.json"] {
        let a = std::fs::read(outputs[0].join(file)).map_err(|e| format!("{file}: {e}"))?;
        let b = std::fs::read(outputs[1].join(file)).map_err(|e| format!("{file}: {e}"))?;
        if a != b {
            return Err(format!("{file} differs between runs"));
        }
    }
    Ok(format!(
        "labels.csv, iterations.json, report.json byte-identical across two CLI runs (default and 3 threads), {:.1} s",
        start.elapsed().as_secs_f64()
    ))
}

fn criterion_9() -> Verdict {
    let ds = benchmark::<f64>(&SyntheticSpec { per_class: 10, length: 12, ..SyntheticSpec::default() }).unwrap();
    let options = LabelOptions { compact_length: 12, ..LabelOptions::default() };
    let start = Instant::now();
    match run_labeling(&ds, &options) {
        Err(autolabel_core::Error::Config(_)) => {}
        other => return Err(format!("library returned {:?}", other.map(|_| ()))),
    }
    let core_time = start.elapsed();

    let tmp = tempfile::tempdir().unwrap();
    let train = tmp.path().join("SHORT_TRAIN.tsv");
    write_ucr_tsv(&ds, &train).unwrap();
    let out_dir = tmp.path().join("out");
    let out = autolabel()
        .args(["label", "--compact-length", "12", "--train"])
        .arg(&train)
        .arg("--output-dir")
        .arg(&out_dir)
        .output()
        .map_err(|e| e.to_string())?;
    let stderr = String::from_utf8_lossy(&out.stderr);
    let trained = out_dir.join("aecs_model.json").exists();
    check(
        out.status.code() == Some(2) && stderr.contains("configuration error") && !trained && core_time.as_millis() < 100,
        format!("p = 12 on length-12 series: configuration error in {} us, CLI exit 2, no model written", core_time.as_micros()),
        format!("exit {:?}, stderr '{}', model written {trained}", out.status.code(), stderr.trim()),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 8] = [
        ("1 hubert oracle", criterion_1),
        ("2 cca oracle", criterion_2),
        ("3 gradient check", criterion_3),
        ("4 reparameterization", criterion_4),
        ("5 synthetic benchmark", criterion_5),
        ("6 discriminator boundary", criterion_6),
        ("8 determinism", criterion_8),
        ("9 compact length guard", criterion_9),
    ];
    let mut failed = 0;
    let mut report = |name: &str, verdict: Verdict| match verdict {
        Ok(detail) => println!("PASS criterion {name}: {detail}"),
        Err(detail) => {
            failed += 1;
            println!("FAIL criterion {name}: {detail}");
        }
    };
    for (name, run) in &criteria[..6] {
        report(name, catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into())));
    }
    match criterion_7() {
        Some(Ok(detail)) => println!("PASS criterion 7 distal phalanx (non-gating): {detail}"),
        Some(Err(detail)) => println!("FAIL criterion 7 distal phalanx (non-gating): {detail}"),
        None => println!("SKIP criterion 7 distal phalanx (non-gating): set AUTOLABEL_UCR_DIR to the UCR files"),
    }
    for (name, run) in &criteria[6..] {
        report(name, catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into())));
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
