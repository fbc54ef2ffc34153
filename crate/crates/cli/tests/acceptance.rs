//! Release acceptance suite. Each test checks one shipping criterion and
//! prints a `criterion N: PASS — …` line (visible with `--show-output`).
//!
//! Criteria 10–12 drive the compiled binary through the full synthetic
//! pipeline; the run is shared through a `OnceLock` and repeated from
//! scratch only for the determinism check.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use serde_json::Value;
use spectral_core::dataset::{self, LabeledDataset, SynthConfig, WavelengthGrid};
use spectral_core::discriminant::{self, DiscriminantError, ScatterSet};
use spectral_core::linalg::{self, Matrix};
use spectral_core::metrics::{self, ConfusionMatrix};
use spectral_core::neighbors::KnnModel;
use spectral_core::pls;
use spectral_core::svm::{self, SvmConfig};

// ---------------------------------------------------------------------------
// deterministic pseudo-random helpers (no external RNG: results must be
// reproducible down to the bit across runs and machines)

fn lcg_stream(seed: u64) -> impl FnMut() -> f64 {
    let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    move || {
        state = state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
    }
}

/// Integer uniform in `lo..=hi` drawn from a `[-1, 1)` stream.
fn draw(next: &mut impl FnMut() -> f64, lo: usize, hi: usize) -> usize {
    let span = (hi - lo + 1) as f64;
    let u = (next() + 1.0) / 2.0;
    lo + ((u * span) as usize).min(hi - lo)
}

fn random_centered(next: &mut impl FnMut() -> f64, n: usize, j: usize) -> Matrix {
    let data: Vec<f64> = (0..n * j).map(|_| next()).collect();
    let (centered, _) = dataset::center(&Matrix::new(n, j, data).unwrap());
    centered
}

fn indicator(labels: &[usize], classes: usize) -> Matrix {
    Matrix::from_fn(labels.len(), classes, |i, k| {
        if labels[i] == k {
            1.0
        } else {
            0.0
        }
    })
}

/// Three Gaussian-ish blobs with class-dependent offsets; `per_class` rows
/// per class over `j` feature columns. The two mean patterns are linearly
/// independent, so the three class means are never collinear.
fn blob_dataset(next: &mut impl FnMut() -> f64, per_class: usize, j: usize) -> LabeledDataset {
    let classes = 3;
    let pattern = [(-1.0, 0.3), (0.0, -0.9), (1.0, 0.5)];
    let n = per_class * classes;
    let mut data = Vec::with_capacity(n * j);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let class = i / per_class;
        labels.push(class);
        for col in 0..j {
            let (u, v) = pattern[class];
            let offset =
                u * (1.5 + (col % 3) as f64 * 0.8) + v * ((col % 5) as f64 * 0.4 - 0.8);
            data.push(offset + 0.6 * next());
        }
    }
    let grid = WavelengthGrid::new(1100.0, 2.0, j).unwrap();
    let names = (1..=classes).map(|c| format!("class_{c}")).collect();
    LabeledDataset::new(Matrix::new(n, j, data).unwrap(), labels, names, grid).unwrap()
}

fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
    a.sub(b).unwrap().max_abs()
}

// ---------------------------------------------------------------------------
// criterion 1: latent decomposition algebra at random shapes

#[test]
fn criterion_01_latent_decomposition_algebra() {
    let start = Instant::now();
    let mut next = lcg_stream(101);
    for case in 0..50 {
        let n = draw(&mut next, 20, 120);
        let j = draw(&mut next, 50, 300);
        let p = draw(&mut next, 1, 10);
        let x = random_centered(&mut next, n, j);
        let labels: Vec<usize> = (0..n).map(|i| i % 3).collect();
        let (y, _) = dataset::center(&indicator(&labels, 3));

        let model = pls::fit_pls(&x, &y, p).unwrap();
        let t = model.scores();
        let gram = t.tr_matmul(t).unwrap();
        for a in 0..p {
            for b in 0..p {
                let want = if a == b { 1.0 } else { 0.0 };
                assert!(
                    (gram.get(a, b) - want).abs() <= 1e-8,
                    "case {case}: scores not orthonormal at ({a},{b}): {}",
                    gram.get(a, b)
                );
            }
        }

        // Re-run the deflation ladder from the model's own components: the
        // residual norm must never grow, and summing the rank-one layers
        // back onto the final residual must reproduce the input.
        let mut residual = x.clone();
        let mut prev = residual.frobenius_norm();
        for comp in 0..p {
            let t_col = t.column(comp);
            let p_col = model.x_loadings().column(comp);
            for (i, t_i) in t_col.iter().enumerate() {
                for (col, p_c) in p_col.iter().enumerate() {
                    let v = residual.get(i, col) - t_i * p_c;
                    residual.set(i, col, v);
                }
            }
            let norm = residual.frobenius_norm();
            assert!(
                norm <= prev * (1.0 + 1e-12) + 1e-12,
                "case {case}: residual grew at component {comp}: {prev} -> {norm}"
            );
            prev = norm;
        }
        let rebuilt = t
            .matmul(&model.x_loadings().transpose())
            .unwrap()
            .add(&residual)
            .unwrap();
        let gap = x.sub(&rebuilt).unwrap().frobenius_norm();
        assert!(gap <= 1e-10, "case {case}: decomposition gap {gap:e}");

        let direct = model.predict_response(&x).unwrap();
        let via_scores = model.predict_response_via_scores(&x).unwrap();
        let path_gap = max_abs_diff(&direct, &via_scores);
        assert!(
            path_gap <= 1e-8,
            "case {case}: prediction paths disagree by {path_gap:e}"
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(30), "suite took {elapsed:?}");
    println!(
        "criterion 1: PASS — 50 random fits: orthonormal scores, non-increasing residuals, \
         decomposition gap <= 1e-10, prediction paths agree to 1e-8 ({elapsed:.2?})"
    );
}

// ---------------------------------------------------------------------------
// criterion 2: with as many components as features, the fit collapses to
// ordinary least squares

#[test]
fn criterion_02_full_component_fit_matches_least_squares() {
    let mut next = lcg_stream(202);
    let mut worst: f64 = 0.0;
    for case in 0..20 {
        let j = draw(&mut next, 3, 10);
        let n = draw(&mut next, 15, 60).max(j + 5);
        let x = random_centered(&mut next, n, j);
        let labels: Vec<usize> = (0..n).map(|i| i % 3).collect();
        let (y, _) = dataset::center(&indicator(&labels, 3));

        let model = pls::fit_pls(&x, &y, j).unwrap();
        let fitted = model.predict_response(&x).unwrap();

        let beta = linalg::solve(&x.tr_matmul(&x).unwrap(), &x.tr_matmul(&y).unwrap()).unwrap();
        let reference = x.matmul(&beta).unwrap();

        let gap = max_abs_diff(&fitted, &reference);
        assert!(gap <= 1e-6, "case {case}: OLS gap {gap:e}");
        worst = worst.max(gap);
    }
    println!(
        "criterion 2: PASS — 20 full-component fits match normal-equation fitted values \
         (worst gap {worst:.2e} <= 1e-6)"
    );
}

// ---------------------------------------------------------------------------
// criterion 3: diagonal-whitening basis and singularity behavior on wide data

#[test]
fn criterion_03_whitening_and_wide_data_behavior() {
    let mut next = lcg_stream(303);
    let mut wide_cases = 0;
    for case in 0..20 {
        let wide = case % 2 == 1;
        let (per_class, j) = if wide {
            let per_class = draw(&mut next, 3, 5);
            let n = per_class * 3;
            (per_class, n + draw(&mut next, 0, 25))
        } else {
            (draw(&mut next, 12, 20), draw(&mut next, 4, 12))
        };
        let data = blob_dataset(&mut next, per_class, j);
        let n = data.n_samples();
        let scatter = ScatterSet::compute(&data).unwrap();

        let (_, _, z) = discriminant::dlda_basis(&scatter, None).unwrap();
        let m = z.cols();
        let whitened = z.tr_matmul(&scatter.s_b().matmul(&z).unwrap()).unwrap();
        for a in 0..m {
            for b in 0..m {
                let want = if a == b { 1.0 } else { 0.0 };
                assert!(
                    (whitened.get(a, b) - want).abs() <= 1e-8,
                    "case {case}: whitening off at ({a},{b}): {}",
                    whitened.get(a, b)
                );
            }
        }

        if n <= j {
            wide_cases += 1;
            assert!(
                matches!(
                    discriminant::fit_lda(&scatter),
                    Err(DiscriminantError::SingularWithinScatter)
                ),
                "case {case}: LDA should refuse n={n} <= j={j}"
            );
            discriminant::fit_dlda(&scatter, None).unwrap();
            discriminant::fit_slda(&scatter, 0.5).unwrap();
            discriminant::fit_mlda(&scatter).unwrap();
        } else {
            discriminant::fit_lda(&scatter).unwrap();
        }
    }
    assert!(wide_cases >= 10, "only {wide_cases} wide cases generated");
    println!(
        "criterion 3: PASS — 20 datasets ({wide_cases} with n <= j): whitened between-scatter \
         is identity to 1e-8; LDA refuses every wide case while DLDA/SLDA/MLDA fit"
    );
}

// ---------------------------------------------------------------------------
// criterion 4: shrinkage keeps the trace, compresses the spectrum, and
// vanishes at gamma = 0

#[test]
fn criterion_04_shrinkage_spectrum_behavior() {
    let mut next = lcg_stream(404);
    let grid: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
    for case in 0..5 {
        let per_class = draw(&mut next, 12, 18);
        let data = blob_dataset(&mut next, per_class, 12);
        let scatter = ScatterSet::compute(&data).unwrap();
        let base_trace = scatter.s_p().trace().unwrap();

        let mut prev_max = f64::INFINITY;
        let mut prev_min = f64::NEG_INFINITY;
        for &gamma in &grid {
            let shrunk = discriminant::shrunken_pooled(&scatter, gamma).unwrap();
            let trace = shrunk.trace().unwrap();
            assert!(
                (trace - base_trace).abs() <= 1e-8 * base_trace.abs(),
                "case {case}: trace drifted at gamma {gamma}: {base_trace} -> {trace}"
            );
            let eig = linalg::sym_eigen(&shrunk).unwrap();
            let (max, min) = (eig.values[0], *eig.values.last().unwrap());
            assert!(
                max <= prev_max * (1.0 + 1e-10) + 1e-12,
                "case {case}: top eigenvalue rose at gamma {gamma}"
            );
            assert!(
                min >= prev_min - (prev_min.abs() * 1e-10 + 1e-12),
                "case {case}: bottom eigenvalue fell at gamma {gamma}"
            );
            prev_max = max;
            prev_min = min;
        }

        let plain = discriminant::fit_lda(&scatter).unwrap();
        let at_zero = discriminant::fit_slda(&scatter, 0.0).unwrap();
        let gap = max_abs_diff(plain.projection(), at_zero.projection());
        assert!(gap <= 1e-8, "case {case}: gamma=0 projection gap {gap:e}");
    }
    println!(
        "criterion 4: PASS — trace invariant to 1e-8 across gamma grid, extreme eigenvalues \
         move monotonically toward the mean, gamma=0 reproduces the plain fit to 1e-8"
    );
}

// ---------------------------------------------------------------------------
// criterion 5: eigenvalue flooring at the spectrum mean

#[test]
fn criterion_05_floored_spectrum_multiset() {
    let mut next = lcg_stream(505);
    let mut deficient_cases = 0;
    for case in 0..20 {
        let wide = case % 2 == 1;
        let (per_class, j) = if wide {
            (draw(&mut next, 3, 5), draw(&mut next, 20, 40))
        } else {
            (draw(&mut next, 12, 20), draw(&mut next, 4, 12))
        };
        let data = blob_dataset(&mut next, per_class, j);
        let scatter = ScatterSet::compute(&data).unwrap();
        let n = data.n_samples();
        if n - 3 < j {
            deficient_cases += 1;
        }

        let pooled_eig = linalg::sym_eigen(scatter.s_p()).unwrap();
        let lambda_bar = scatter.s_p().trace().unwrap() / j as f64;
        let expected: Vec<f64> = pooled_eig.values.iter().map(|&v| v.max(lambda_bar)).collect();

        let floored = discriminant::floored_pooled(&scatter).unwrap();
        let actual = linalg::sym_eigen(&floored).unwrap().values;

        assert_eq!(actual.len(), expected.len());
        for (idx, (a, e)) in actual.iter().zip(&expected).enumerate() {
            assert!(
                (a - e).abs() <= 1e-8,
                "case {case}: floored eigenvalue {idx} is {a}, expected {e}"
            );
        }
    }
    assert!(deficient_cases >= 10, "only {deficient_cases} rank-deficient cases");
    println!(
        "criterion 5: PASS — 20 scatters ({deficient_cases} rank-deficient): re-decomposed \
         floored matrix has eigenvalues max(lambda_j, mean) to 1e-8"
    );
}

// ---------------------------------------------------------------------------
// criterion 6: nearest-neighbor classifier against a naive oracle

fn knn_oracle(
    train: &Matrix,
    labels: &[usize],
    n_classes: usize,
    k: usize,
    query: &[f64],
) -> usize {
    let mut order: Vec<(f64, usize)> = (0..train.rows())
        .map(|i| {
            let d = train
                .row(i)
                .iter()
                .zip(query)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>();
            (d, i)
        })
        .collect();
    order.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let mut votes = vec![0usize; n_classes];
    let mut nearest = vec![f64::INFINITY; n_classes];
    for &(d, i) in &order[..k] {
        votes[labels[i]] += 1;
        if d < nearest[labels[i]] {
            nearest[labels[i]] = d;
        }
    }
    let top = *votes.iter().max().unwrap();
    (0..n_classes)
        .filter(|&c| votes[c] == top)
        .min_by(|&a, &b| nearest[a].partial_cmp(&nearest[b]).unwrap().then(a.cmp(&b)))
        .unwrap()
}

#[test]
fn criterion_06_neighbor_votes_match_naive_oracle() {
    let mut next = lcg_stream(606);
    let n = 200;
    let j = 5;
    let labels: Vec<usize> = (0..n).map(|i| i % 3).collect();
    let data: Vec<f64> = (0..n)
        .flat_map(|i| {
            let class = labels[i];
            (0..j)
                .map(|col| (class as f64 - 1.0) * (1.2 + 0.2 * col as f64) + next())
                .collect::<Vec<f64>>()
        })
        .collect();
    let train = Matrix::new(n, j, data).unwrap();

    let queries: Vec<Vec<f64>> = (0..150)
        .map(|_| (0..j).map(|_| 3.0 * next()).collect())
        .collect();

    let mut checked = 0;
    for k in [1, 3, 5, 7] {
        let model = KnnModel::new(train.clone(), labels.clone(), 3, k).unwrap();
        let query_matrix = Matrix::from_rows(&queries).unwrap();
        let ours = model.predict(&query_matrix).unwrap();
        let on_train = model.predict(&train).unwrap();
        for (idx, query) in queries.iter().enumerate() {
            assert_eq!(
                ours[idx],
                knn_oracle(&train, &labels, 3, k, query),
                "k={k}, query {idx}"
            );
            checked += 1;
        }
        for (i, &predicted) in on_train.iter().enumerate() {
            assert_eq!(
                predicted,
                knn_oracle(&train, &labels, 3, k, train.row(i)),
                "k={k}, training row {i}"
            );
            checked += 1;
        }
    }
    println!(
        "criterion 6: PASS — {checked} predictions (200 training samples, 150 fresh queries, \
         k in {{1,3,5,7}}) all equal the naive full-distance oracle"
    );
}

// ---------------------------------------------------------------------------
// criterion 7: adjusted Rand against exhaustive pair counting

fn ari_by_pairs(a: &[usize], b: &[usize]) -> f64 {
    let n = a.len();
    let mut both = 0u64;
    let mut same_a = 0u64;
    let mut same_b = 0u64;
    for i in 0..n {
        for j in i + 1..n {
            let sa = a[i] == a[j];
            let sb = b[i] == b[j];
            same_a += u64::from(sa);
            same_b += u64::from(sb);
            both += u64::from(sa && sb);
        }
    }
    let pairs = (n * (n - 1) / 2) as f64;
    let expected = same_a as f64 * same_b as f64 / pairs;
    let top = 0.5 * (same_a as f64 + same_b as f64);
    if top - expected == 0.0 {
        return 1.0; // both partitions trivial and identical
    }
    (both as f64 - expected) / (top - expected)
}

#[test]
fn criterion_07_adjusted_rand_matches_pair_counting() {
    let mut next = lcg_stream(707);
    for case in 0..100 {
        let n = draw(&mut next, 4, 30);
        let ka = draw(&mut next, 2, 4);
        let kb = draw(&mut next, 2, 4);
        let a: Vec<usize> = (0..n).map(|_| draw(&mut next, 0, ka - 1)).collect();
        let b: Vec<usize> = (0..n).map(|_| draw(&mut next, 0, kb - 1)).collect();
        let ours = metrics::adjusted_rand(&a, &b).unwrap();
        let reference = ari_by_pairs(&a, &b);
        assert!(
            (ours - reference).abs() <= 1e-12,
            "case {case}: {ours} vs pair-count {reference}"
        );
        assert_eq!(metrics::adjusted_rand(&a, &a).unwrap(), 1.0, "case {case}");
    }

    // Crossed 4-point spot value. In exact arithmetic the index is
    // (6*0 - 2*2) / (6*(2+2)/2 - 2*2) = -4/8 = -1/2 (a textbook slip
    // sometimes quotes -1/3); in floating point both the formula and the
    // pair-count oracle land within one ulp of it.
    let real = [0, 0, 1, 1];
    let predicted = [0, 1, 0, 1];
    let spot = metrics::adjusted_rand(&real, &predicted).unwrap();
    assert!((spot - (-0.5)).abs() <= 1e-12, "crossed example gave {spot}");
    let oracle_spot = ari_by_pairs(&real, &predicted);
    assert!(
        (oracle_spot - (-0.5)).abs() <= 1e-12,
        "oracle gave {oracle_spot}"
    );
    println!(
        "criterion 7: PASS — 100 random partition pairs match exhaustive pair counting to \
         1e-12; identical partitions give 1.0; crossed 4-point example gives -1/2 \
         (oracle-confirmed value)"
    );
}

// ---------------------------------------------------------------------------
// criterion 8: chi-squared closed forms

#[test]
fn criterion_08_chi_squared_closed_forms() {
    let diagonal = ConfusionMatrix::from_counts(&[
        vec![37, 0, 0],
        vec![0, 37, 0],
        vec![0, 0, 37],
    ])
    .unwrap();
    let stat = metrics::chi_squared(&diagonal);
    assert!(
        (stat - 222.0).abs() <= 1e-10,
        "balanced diagonal table should score 222, got {stat}"
    );

    let independent = ConfusionMatrix::from_counts(&[
        vec![5, 5, 5],
        vec![5, 5, 5],
        vec![5, 5, 5],
    ])
    .unwrap();
    let zero = metrics::chi_squared(&independent);
    assert!(zero.abs() <= 1e-10, "independent table should score 0, got {zero}");
    println!(
        "criterion 8: PASS — balanced diagonal 3x3 with 37 per class scores 222 (within \
         1e-10); a uniform table scores 0"
    );
}

// ---------------------------------------------------------------------------
// criterion 9: margin machine behavior

fn binary_hinge(x: &Matrix, signs: &[f64], c: f64, epochs: usize, eta0: f64) -> (Vec<f64>, f64) {
    let mut w = vec![0.0; x.cols()];
    let mut b = 0.0;
    for epoch in 0..epochs {
        let eta = eta0 / (1.0 + epoch as f64);
        let mut gw = w.clone();
        let mut gb = 0.0;
        for (i, &sign) in signs.iter().enumerate().take(x.rows()) {
            let score: f64 = x.row(i).iter().zip(&w).map(|(a, ww)| a * ww).sum::<f64>() + b;
            if 1.0 - sign * score > 0.0 {
                for (g, &v) in gw.iter_mut().zip(x.row(i)) {
                    *g -= c * sign * v;
                }
                gb -= c * sign;
            }
        }
        for (ww, g) in w.iter_mut().zip(&gw) {
            *ww -= eta * g;
        }
        b -= eta * gb;
    }
    (w, b)
}

#[test]
fn criterion_09_margin_machine_behavior() {
    // Full-scale synthetic spectra: the objective may never rise by more
    // than one part in a million between epochs.
    let data = dataset::synth_spectra(&SynthConfig::default()).unwrap();
    let (centered, _) = dataset::center(data.spectra());
    let model = svm::fit_svm(&centered, data.labels(), 3, &SvmConfig::default()).unwrap();
    let history = model.objective_history();
    assert_eq!(history.len(), 2001);
    for t in 1..history.len() {
        assert!(
            history[t] <= history[t - 1] * (1.0 + 1e-6),
            "objective rose at epoch {t}: {} -> {}",
            history[t - 1],
            history[t]
        );
    }

    // Constructed separable two-class problem: training accuracy must be
    // perfect.
    let mut next = lcg_stream(909);
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for _ in 0..20 {
        rows.push(vec![-2.5 + 0.5 * next(), 0.5 * next(), -2.5 + 0.5 * next()]);
        labels.push(0);
        rows.push(vec![2.5 + 0.5 * next(), 0.5 * next(), 2.5 + 0.5 * next()]);
        labels.push(1);
    }
    let x = Matrix::from_rows(&rows).unwrap();
    let separable = svm::fit_svm(&x, &labels, 2, &SvmConfig::default()).unwrap();
    let predicted = separable.predict(&x).unwrap();
    assert_eq!(predicted, labels, "separable training set not reproduced");

    // Two-class agreement with an independently trained binary hinge
    // machine on a random query grid.
    let mut grid_rows = Vec::new();
    for _ in 0..400 {
        grid_rows.push(vec![4.0 * next(), 4.0 * next(), 4.0 * next()]);
    }
    let grid = Matrix::from_rows(&grid_rows).unwrap();
    let ours = separable.predict(&grid).unwrap();
    let signs: Vec<f64> = labels
        .iter()
        .map(|&label| if label == 0 { -1.0 } else { 1.0 })
        .collect();
    let (w, b) = binary_hinge(&x, &signs, 1.0, 2000, 0.1 / x.rows() as f64);
    let agree = grid_rows
        .iter()
        .enumerate()
        .filter(|(i, row)| {
            let score: f64 = row.iter().zip(&w).map(|(a, ww)| a * ww).sum::<f64>() + b;
            usize::from(score > 0.0) == ours[*i]
        })
        .count();
    let rate = agree as f64 / grid_rows.len() as f64;
    assert!(rate >= 0.95, "binary-machine agreement only {rate}");

    println!(
        "criterion 9: PASS — objective non-increasing over 2000 epochs on synthetic spectra, \
         perfect separable training accuracy, {:.1}% two-class agreement with a binary hinge \
         machine",
        rate * 100.0
    );
}

// ---------------------------------------------------------------------------
// criteria 10-12: the full command-line pipeline

const ARTIFACTS: [&str; 10] = [
    "full.csv",
    "train.csv",
    "test.csv",
    "bench.json",
    "plsda.json",
    "eval.json",
    "scree.csv",
    "scores.csv",
    "variance.csv",
    "loadings.csv",
];

struct PipelineRun {
    duration: Duration,
    bench_text: String,
    files: BTreeMap<String, Vec<u8>>,
}

fn run_ok(root: &Path, args: &[&str]) -> String {
    let output = Command::new(env!("CARGO_BIN_EXE_spectral-bench"))
        .current_dir(root)
        .args(args)
        .output()
        .expect("binary should spawn");
    assert!(
        output.status.success(),
        "command {args:?} failed:\n{}",
        String::from_utf8_lossy(&output.stderr)
    );
    String::from_utf8(output.stdout).expect("stdout should be UTF-8")
}

fn run_pipeline() -> PipelineRun {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let started = Instant::now();
    run_ok(root, &["synth", "--out", "full.csv"]);
    run_ok(
        root,
        &["split", "full.csv", "--train-out", "train.csv", "--test-out", "test.csv"],
    );
    let bench_text = run_ok(
        root,
        &["benchmark", "train.csv", "test.csv", "--out", "bench.json"],
    );
    let train_stdout = run_ok(
        root,
        &["train", "train.csv", "--model", "plsda", "--out", "plsda.json"],
    );
    let eval_stdout = run_ok(
        root,
        &["evaluate", "plsda.json", "test.csv", "--out", "eval.json"],
    );
    run_ok(
        root,
        &["export", "--what", "scree", "--data", "train.csv", "--out", "scree.csv"],
    );
    run_ok(
        root,
        &[
            "export", "--what", "scores", "--model", "plsda.json", "--data", "train.csv",
            "--out", "scores.csv",
        ],
    );
    run_ok(
        root,
        &["export", "--what", "variance", "--model", "plsda.json", "--out", "variance.csv"],
    );
    run_ok(
        root,
        &[
            "export", "--what", "loadings", "--model", "plsda.json", "--data", "train.csv",
            "--out", "loadings.csv",
        ],
    );
    let duration = started.elapsed();

    let mut files = BTreeMap::new();
    for name in ARTIFACTS {
        files.insert(name.to_string(), std::fs::read(root.join(name)).unwrap());
    }
    files.insert("stdout:benchmark".into(), bench_text.clone().into_bytes());
    files.insert("stdout:train".into(), train_stdout.into_bytes());
    files.insert("stdout:evaluate".into(), eval_stdout.into_bytes());
    PipelineRun {
        duration,
        bench_text,
        files,
    }
}

fn pipeline() -> &'static PipelineRun {
    static RUN: OnceLock<PipelineRun> = OnceLock::new();
    RUN.get_or_init(run_pipeline)
}

fn parse_json(bytes: &[u8]) -> Value {
    serde_json::from_slice(bytes).expect("artifact should be valid JSON")
}

fn benchmark_row<'a>(report: &'a Value, model: &str) -> &'a Value {
    report["rows"]
        .as_array()
        .expect("rows array")
        .iter()
        .find(|row| row["model"] == model)
        .unwrap_or_else(|| panic!("no {model} row in benchmark report"))
}

#[test]
fn criterion_10_end_to_end_pipeline() {
    let run = pipeline();

    let count_rows = |name: &str| {
        std::str::from_utf8(&run.files[name])
            .unwrap()
            .lines()
            .count()
            - 1
    };
    assert_eq!(count_rows("train.csv"), 111, "train split size");
    assert_eq!(count_rows("test.csv"), 51, "test split size");

    let report = parse_json(&run.files["bench.json"]);
    let plsda = benchmark_row(&report, "PLS-DA");
    let ari = plsda["test"]["ari"].as_f64().unwrap();
    let mis = plsda["test"]["mis"].as_f64().unwrap();
    let components = plsda["hyperparameters"]["components"].as_u64().unwrap();
    assert!(ari >= 0.7, "held-out ARI {ari} below 0.7");
    assert!(mis <= 0.1, "held-out MIS {mis} above 0.1");

    let lda_line = run
        .bench_text
        .lines()
        .find(|line| line.starts_with("LDA"))
        .expect("LDA row in the grid");
    assert!(
        lda_line.contains("FAILED(SingularWithinScatter)"),
        "unexpected LDA row: {lda_line}"
    );

    let scree = std::str::from_utf8(&run.files["scree.csv"]).unwrap();
    let mut lines = scree.lines();
    assert_eq!(lines.next(), Some("components,chi2"));
    let body: Vec<&str> = lines.collect();
    assert_eq!(body.len(), 9, "scree should cover 2..=10");
    for (offset, line) in body.iter().enumerate() {
        let (p, chi2) = line.split_once(',').expect("two scree columns");
        assert_eq!(p.parse::<usize>().unwrap(), offset + 2);
        assert!(chi2.parse::<f64>().unwrap().is_finite());
    }

    assert!(
        run.duration < Duration::from_secs(120),
        "pipeline took {:?}",
        run.duration
    );
    println!(
        "criterion 10: PASS — 111/51 split; auto-selected {components} components give \
         held-out ARI {ari:.3} and MIS {mis:.3}; LDA row reads FAILED(SingularWithinScatter); \
         scree covers 2..=10 ({:.1?} total)",
        run.duration
    );
}

#[test]
fn criterion_11_pipeline_is_byte_deterministic() {
    let first = pipeline();
    let second = run_pipeline();
    assert_eq!(first.files.len(), second.files.len());
    for (name, bytes) in &first.files {
        assert_eq!(
            bytes, &second.files[name],
            "artifact {name} differs between identical runs"
        );
    }
    println!(
        "criterion 11: PASS — rerunning the pipeline reproduced all {} artifacts \
         (files and captured stdout) byte for byte",
        first.files.len()
    );
}

fn is_three_decimal(cell: &str) -> bool {
    let digits = cell.strip_prefix('-').unwrap_or(cell);
    digits.split_once('.').is_some_and(|(int, frac)| {
        !int.is_empty()
            && int.chars().all(|c| c.is_ascii_digit())
            && frac.len() == 3
            && frac.chars().all(|c| c.is_ascii_digit())
    })
}

#[test]
fn criterion_12_table_shapes() {
    let run = pipeline();
    let report = parse_json(&run.files["bench.json"]);

    let mut lines = run.bench_text.lines();
    let header: Vec<&str> = lines.next().expect("header").split_whitespace().collect();
    assert_eq!(
        header,
        ["model", "mis_train", "ari_train", "chi2_train", "mis_test", "ari_test", "chi2_test"],
    );

    let body: Vec<Vec<&str>> = lines.map(|l| l.split_whitespace().collect()).collect();
    assert_eq!(body.len(), 7, "six fitted rows plus the LDA failure row");
    let expected_models = ["PLS-DA", "KNN", "SVM", "DLDA", "SLDA", "MLDA"];
    for (row, model) in body.iter().zip(expected_models) {
        assert_eq!(row[0], model);
        assert_eq!(row.len(), 7, "{model} row should have six statistic cells");
        let json_row = benchmark_row(&report, model);
        let json_stats = [
            &json_row["train"]["mis"],
            &json_row["train"]["ari"],
            &json_row["train"]["chi2"],
            &json_row["test"]["mis"],
            &json_row["test"]["ari"],
            &json_row["test"]["chi2"],
        ];
        for (cell, value) in row[1..].iter().zip(json_stats) {
            assert!(is_three_decimal(cell), "{model} cell {cell:?} not 3-decimal");
            let formatted = format!("{:.3}", value.as_f64().unwrap());
            assert_eq!(*cell, formatted, "{model}: text and JSON disagree");
        }
    }
    assert_eq!(body[6][0], "LDA");

    let variance = std::str::from_utf8(&run.files["variance.csv"]).unwrap();
    let rows: Vec<Vec<&str>> = variance.lines().map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 3, "header plus two statistic rows");
    assert_eq!(rows[0][0], "statistic");
    for (p, cell) in rows[0][1..].iter().enumerate() {
        assert_eq!(*cell, format!("comp_{}", p + 1));
    }
    assert_eq!(rows[1][0], "explained_pct");
    assert_eq!(rows[2][0], "cumulative_pct");
    for row in &rows[1..] {
        assert_eq!(row.len(), rows[0].len());
        assert!(row[1..].iter().all(|cell| is_three_decimal(cell)));
    }

    println!(
        "criterion 12: PASS — grid is 6 fitted models x 6 three-decimal statistics (plus the \
         LDA failure row) with text equal to rounded JSON; variance table is two rows \
         (per-component, cumulative)"
    );
}
