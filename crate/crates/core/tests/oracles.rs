//! Worked examples checked against independent recomputation.

use abstainer::attached::{
    knn_outlier_score, make_chow_rejector, make_pre_rejector, post_pipeline_decide, pre_pipeline_decide,
    CountingModel,
};
use abstainer::dataset::{gen_gaussian_mixture, split, Dataset, GaussianSpec, LabelSpace, Scaler};
use abstainer::decision::{AbstentionReason, Decision};
use abstainer::evaluation::{compare_architectures, sweep_alpha, sweep_tau, AlphaMethod, Architecture, CompareConfig};
use abstainer::fixtures;
use abstainer::merged::{
    abstain_loss, band_candidates, band_for, band_total_loss, bayes_decision, fit_labeled, fit_unlabeled_direct,
    fit_unlabeled_plugin, AbstainModel, AlphaConfig,
};
use abstainer::predictor::{
    empirical_risk, fit_surrogate, grid_search_argmin, zero_one_loss, GridSpec, LinearModel, ProbVector,
    SurrogateConfig,
};
use ndarray::{array, Array2};

fn names2() -> Vec<String> {
    vec!["x1".into(), "x2".into()]
}

/// All probability vectors with entries `k / 20`, as integer numerators.
fn simplex_grid(m: usize) -> Vec<Vec<u32>> {
    fn rec(m: usize, left: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if m == 1 {
            prefix.push(left);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for k in 0..=left {
            prefix.push(k);
            rec(m - 1, left - k, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(m, 20, &mut Vec::new(), &mut out);
    out
}

#[test]
fn chow_rule_minimizes_expected_loss_on_the_simplex() {
    // alpha = a / 100. Expected loss of answering j is 1 - k_j/20, of
    // abstaining alpha; compared exactly as 5 (20 - k_j) vs a.
    for m in 2..=4usize {
        let bound = 100 * (m as u32 - 1) / m as u32;
        let alphas: Vec<u32> = (1..=bound).step_by(3).collect();
        assert!(alphas.len() >= 10);
        for ks in simplex_grid(m) {
            let p = ProbVector::new(ks.iter().map(|&k| k as f64 / 20.0).collect()).unwrap();
            let kmax = *ks.iter().max().unwrap();
            for &a in &alphas {
                let answer_cost = 5 * (20 - kmax);
                let d = bayes_decision(&p, &AlphaConfig::Uniform(a as f64 / 100.0)).unwrap();
                if answer_cost == a {
                    continue;
                }
                assert_eq!(d.is_abstained(), a < answer_cost, "m={m} p={ks:?} alpha={a}/100");
                if let Some(l) = d.label() {
                    assert_eq!(ks[l], kmax);
                }
            }
        }
    }
}

#[test]
fn loss_value_from_the_running_example() {
    let s = LabelSpace::new(["benign", "malignant"]).unwrap();
    let mal = s.index_of("malignant").unwrap();
    assert_eq!(abstain_loss(&s, mal, None, &AlphaConfig::Uniform(0.2)).unwrap(), 0.2);
}

#[test]
fn hand_built_boundary_misclassifies_one_of_three() {
    // Boundary x = 0.5: predicts class 1 right of it.
    let data = Dataset::new(
        array![[0.0], [1.0], [2.0]],
        vec![0, 0, 1],
        LabelSpace::new(["a", "b"]).unwrap(),
        vec!["x".into()],
    )
    .unwrap();
    let m = LinearModel::new(array![[0.0], [1.0]], array![0.0, -0.5], data.label_space().clone(), Scaler::identity(vec!["x".into()])).unwrap();
    let preds: Vec<usize> = (0..3).map(|i| m.predict(&data.row_vec(i)).unwrap()).collect();
    assert_eq!(preds, vec![0, 1, 1]);
    assert_eq!(empirical_risk(&m, &data, zero_one_loss).unwrap(), 1.0);
}

#[test]
fn constant_predictor_on_balanced_ten() {
    let data = Dataset::new(
        Array2::from_shape_fn((10, 1), |(i, _)| i as f64),
        (0..10).map(|i| i % 2).collect(),
        LabelSpace::new(["a", "b"]).unwrap(),
        vec!["x".into()],
    )
    .unwrap();
    let m = LinearModel::new(Array2::zeros((2, 1)), array![1.0, 0.0], data.label_space().clone(), Scaler::identity(vec!["x".into()])).unwrap();
    assert_eq!(empirical_risk(&m, &data, zero_one_loss).unwrap(), 5.0);
}

#[test]
fn softmax_of_log_three() {
    let p = ProbVector::from_scores(&[3f64.ln(), 0.0]).unwrap();
    assert!((p.as_slice()[0] - 0.75).abs() < 1e-12);
    assert!((p.as_slice()[1] - 0.25).abs() < 1e-12);
}

#[test]
fn square_center_distance() {
    let side = 2.0;
    let sq = array![[0.0, 0.0], [side, 0.0], [0.0, side], [side, side]];
    let s = knn_outlier_score(sq.view(), &[1.0, 1.0], 4).unwrap();
    assert!((s - side * 2f64.sqrt() / 2.0).abs() < 1e-12);
}

#[test]
fn outlier_fixture_rejects_only_the_outlier() {
    let train = fixtures::fig1(7).unwrap();
    let fresh = fixtures::fig1(8).unwrap();
    // Same seed: the appended rows are far from this training sample.
    let with_outlier = fixtures::outliers(7).unwrap();
    let r = make_pre_rejector(&train, 5, 3.0).unwrap();
    let scaler = Scaler::fit(&train);
    let z = scaler.apply_matrix(train.features());
    let brute = |x: &[f64]| {
        let zx = scaler.apply(x).unwrap();
        let mut d: Vec<f64> = z
            .rows()
            .into_iter()
            .map(|r| r.iter().zip(&zx).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt())
            .collect();
        d.sort_by(f64::total_cmp);
        d[..5].iter().sum::<f64>() / 5.0
    };
    for i in 0..fresh.n() {
        let x = fresh.row_vec(i);
        assert!(brute(&x) < 3.0);
        assert!(r.screen_input(&x).unwrap().is_none(), "clean point {i} rejected");
    }
    let model = CountingModel::new(fit_surrogate(&train, &SurrogateConfig::default()).unwrap());
    for o in train.n()..with_outlier.n() {
        let x = with_outlier.row_vec(o);
        assert!(brute(&x) >= fixtures::OUTLIER_DISTANCE);
        let before = model.evaluations();
        let d = pre_pipeline_decide(&r, &model, &x).unwrap();
        assert_eq!(d.reason(), Some(AbstentionReason::Outlier));
        assert_eq!(model.evaluations(), before);
    }
}

#[test]
fn injected_outlier_rejected_by_its_own_training_screen() {
    let data = fixtures::fig1(3).unwrap();
    let outl = abstainer::dataset::inject_outliers(&data, 1, 5.0, 9).unwrap();
    let r = make_pre_rejector(&data, 5, 3.0).unwrap();
    let x = outl.row_vec(data.n());
    let s = match &r {
        abstainer::attached::Rejector::KnnDistance(k) => k.score(&x).unwrap(),
        _ => unreachable!(),
    };
    assert!(s >= 5.0);
    assert!(r.screen_input(&x).unwrap().is_some());
}

#[test]
fn symmetric_model_midpoint_abstains() {
    let m = LinearModel::new(
        array![[1.0, 0.0], [-1.0, 0.0]],
        array![0.0, 0.0],
        LabelSpace::new(["a", "b"]).unwrap(),
        Scaler::identity(names2()),
    )
    .unwrap();
    let x = [0.0, 3.7];
    assert_eq!(m.predict_proba(&x).unwrap().max(), 0.5);
    let d = post_pipeline_decide(&m, &make_chow_rejector(0.6).unwrap(), &x).unwrap();
    assert!(d.is_abstained());
}

#[test]
fn labeled_model_abstains_in_the_middle_band() {
    let data = fixtures::bands(4).unwrap();
    let (train, test) = split(&data, 0.5, 1).unwrap();
    let model = fit_labeled(&train, &SurrogateConfig::default()).unwrap();
    let abst = data.label_space().abstention_index().unwrap();
    let middle: Vec<usize> = (0..test.n()).filter(|&i| test.labels()[i] == abst).collect();
    let hit = middle
        .iter()
        .filter(|&&i| {
            let d = model.decide(&test.row_vec(i)).unwrap();
            d.is_abstained() && d.is_labeled_abstention()
        })
        .count();
    assert!(hit as f64 >= 0.9 * middle.len() as f64, "{hit}/{}", middle.len());
}

#[test]
fn labeled_model_is_equivariant_under_class_renaming() {
    let data = fixtures::bands(5).unwrap();
    let model = fit_labeled(&data, &SurrogateConfig::default()).unwrap();
    // Swap the two defined class names; indices in the sorted space swap.
    let swapped: Vec<usize> = data.labels().iter().map(|&l| if l < 2 { 1 - l } else { l }).collect();
    let renamed = data.relabel(swapped, data.label_space().clone()).unwrap();
    let model2 = fit_labeled(&renamed, &SurrogateConfig::default()).unwrap();
    for i in 0..data.n() {
        let x = data.row_vec(i);
        let a = model.decide(&x).unwrap().label();
        let b = model2.decide(&x).unwrap().label();
        assert_eq!(a.map(|l| 1 - l), b, "row {i}");
    }
}

#[test]
fn labeled_model_without_abstention_examples_reproduces_training_labels() {
    let data = fixtures::separable(2).unwrap();
    let ystar = data.label_space().with_abstention();
    let train = data.relabel(data.labels().to_vec(), ystar).unwrap();
    let model = fit_labeled(&train, &SurrogateConfig::default()).unwrap();
    for i in 0..train.n() {
        assert_eq!(model.decide(&train.row_vec(i)).unwrap(), Decision::Predicted(train.labels()[i]));
    }
}

#[test]
fn plugin_at_the_alpha_bound_rarely_abstains() {
    let data = fixtures::fig1(11).unwrap();
    let (train, test) = split(&data, 0.5, 2).unwrap();
    let m = fit_unlabeled_plugin(&train, &AlphaConfig::Uniform(0.5), &SurrogateConfig::default()).unwrap();
    let abst = (0..test.n()).filter(|&i| m.decide(&test.row_vec(i)).unwrap().is_abstained()).count();
    assert_eq!(abst, 0);
}

#[test]
fn plugin_with_cheap_abstention_covers_the_overlap() {
    let data = fixtures::overlap(3).unwrap();
    let m = fit_unlabeled_plugin(&data, &AlphaConfig::Uniform(0.01), &SurrogateConfig::default()).unwrap();
    let AbstainModel::PlugIn { base, .. } = &m else { unreachable!() };
    let mut abst = 0;
    let mut total = 0;
    for i in 0..20 {
        for j in 0..20 {
            let x = [0.12 + 0.04 * i as f64 / 19.0, 110.0 + 20.0 * j as f64 / 19.0];
            let max_p = base.predict_proba(&x).unwrap().max();
            let d = m.decide(&x).unwrap();
            assert_eq!(d.is_abstained(), max_p < 0.99);
            abst += d.is_abstained() as usize;
            total += 1;
        }
    }
    assert!(abst as f64 > 0.5 * total as f64, "{abst}/{total}");
}


#[test]
fn plugin_at_half_abstains_only_on_exact_ties() {
    let alpha = AlphaConfig::Uniform(0.5);
    for k in 0..=100 {
        let p0 = k as f64 / 100.0;
        let p = ProbVector::new(vec![p0, 1.0 - p0]).unwrap();
        let d = bayes_decision(&p, &alpha).unwrap();
        assert!(!d.is_abstained(), "p0 = {p0}");
    }
}

#[test]
fn direct_fit_at_the_bound_is_a_plain_line_on_separable_data() {
    let data = fixtures::separable(1).unwrap();
    let grid = GridSpec::line(36, -3.0, 3.0, 31);
    let step = 6.0 / 30.0;
    let fit = fit_unlabeled_direct(&data, &AlphaConfig::Uniform(0.5), &grid).unwrap();
    assert_eq!(fit.total_loss, 0.0);
    assert!(fit.band.upper - fit.band.lower <= step + 1e-12);
    let abst = (0..data.n()).filter(|&i| fit.band.decide(&data.row_vec(i)).unwrap().is_abstained()).count();
    assert_eq!(abst, 0);
}

#[test]
fn direct_fit_with_cheap_abstention_covers_the_overlap() {
    let data = fixtures::overlap(6).unwrap();
    let grid = GridSpec::line(36, -3.0, 3.0, 31);
    let alpha = AlphaConfig::Uniform(0.05);
    let fit = fit_unlabeled_direct(&data, &alpha, &grid).unwrap();
    // Best degenerate band = best single line.
    let mut best_line = f64::INFINITY;
    let mut line_errors = 0usize;
    for (angle, lo, hi) in band_candidates(&grid).unwrap() {
        if lo == hi {
            let total = band_total_loss(&band_for(&data, angle, lo, hi).unwrap(), &data, &alpha).unwrap();
            if total < best_line {
                best_line = total;
                line_errors = total as usize;
            }
        }
    }
    assert!(fit.total_loss <= best_line);
    let decisions: Vec<Decision> = (0..data.n()).map(|i| fit.band.decide(&data.row_vec(i)).unwrap()).collect();
    let abstained = decisions.iter().filter(|d| d.is_abstained()).count();
    let errors = decisions
        .iter()
        .zip(data.labels())
        .filter(|(d, y)| d.label().is_some_and(|l| l != **y))
        .count();
    assert!(abstained > 0);
    assert!(errors < line_errors, "band errors {errors}, line errors {line_errors}");
    // Every point removed from the error count costs an abstention.
    assert!(abstained >= line_errors - errors);
}

#[test]
fn grid_oracle_beats_or_ties_the_surrogate() {
    let data = fixtures::separable(4).unwrap();
    let surrogate = fit_surrogate(&data, &SurrogateConfig::default()).unwrap();
    let w = surrogate.weights();
    let b = surrogate.bias();
    let (vx, vy) = (w[[1, 0]] - w[[0, 0]], w[[1, 1]] - w[[0, 1]]);
    let norm = vx.hypot(vy);
    let angle = vy.atan2(vx).rem_euclid(std::f64::consts::TAU);
    let offset = (b[1] - b[0]) / norm;
    let mut grid = GridSpec::line(36, -3.0, 3.0, 31);
    grid.axes[0].values.push(angle);
    grid.axes[1].values.push(offset);
    let fit = grid_search_argmin(&data, zero_one_loss, &grid).unwrap();
    let s_risk = empirical_risk(&surrogate, &data, zero_one_loss).unwrap();
    assert!(fit.risk <= s_risk);
    assert_eq!(s_risk, 0.0);
}

#[test]
fn tau_sweep_limits() {
    let data = fixtures::overlap(2).unwrap();
    let m = fit_surrogate(&data, &SurrogateConfig::default()).unwrap();
    assert_eq!(sweep_tau(&m, &data, &[1e-9]).unwrap()[0].coverage, 1.0);
    let all = sweep_tau(&m, &data, &[1.0]).unwrap();
    assert_eq!(all[0].coverage, 0.0);
    assert_eq!(all[0].selective_risk, None);
}

#[test]
fn tau_sweep_sets_are_nested() {
    let data = fixtures::overlap(9).unwrap();
    let m = fit_surrogate(&data, &SurrogateConfig::default()).unwrap();
    let taus: Vec<f64> = (1..=20).map(|i| 0.45 + 0.5 * i as f64 / 20.0).collect();
    let mut previous: Option<Vec<bool>> = None;
    for &t in &taus {
        let r = make_chow_rejector(t).unwrap();
        let set: Vec<bool> = (0..data.n())
            .map(|i| post_pipeline_decide(&m, &r, &data.row_vec(i)).unwrap().is_abstained())
            .collect();
        if let Some(prev) = &previous {
            assert!(prev.iter().zip(&set).all(|(a, b)| !a || *b));
        }
        previous = Some(set);
    }
}

#[test]
fn alpha_sweep_extremes_and_tau_bridge() {
    let data = fixtures::overlap(5).unwrap();
    let (train, test) = split(&data, 0.5, 3).unwrap();
    let cfg = SurrogateConfig::default();
    let alphas = [0.01, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5];
    let grid = GridSpec::line(8, -1.0, 1.0, 5);
    let pts = sweep_alpha(&train, &test, &alphas, AlphaMethod::PlugIn, &cfg, &grid).unwrap();
    let max_rate = pts.iter().map(|p| p.abstention_rate).fold(f64::MIN, f64::max);
    let min_rate = pts.iter().map(|p| p.abstention_rate).fold(f64::MAX, f64::min);
    assert_eq!(pts[0].abstention_rate, max_rate);
    assert_eq!(pts.last().unwrap().abstention_rate, min_rate);

    let model = fit_surrogate(&train, &cfg).unwrap();
    let mut taus: Vec<f64> = alphas.iter().map(|a| 1.0 - a).collect();
    taus.reverse();
    let mut tau_pts = sweep_tau(&model, &test, &taus).unwrap();
    tau_pts.reverse();
    for (a, t) in pts.iter().zip(&tau_pts) {
        assert_eq!((a.coverage, a.selective_risk), (t.coverage, t.selective_risk));
    }
}

#[test]
fn comparison_on_separable_and_outlier_fixtures() {
    let data = fixtures::separable(3).unwrap();
    let (train, test) = split(&data, 0.5, 0).unwrap();
    let cfg = CompareConfig {
        architectures: Architecture::ALL.to_vec(),
        ..CompareConfig::default()
    };
    let table = compare_architectures(&train, &test, &cfg).unwrap();
    assert_eq!(table.rows.len(), Architecture::ALL.len());
    for row in &table.rows {
        assert_eq!(row.selective_risk, Some(0.0), "{:?}", row.architecture);
    }
    assert_eq!(table, compare_architectures(&train, &test, &cfg).unwrap());

    let clean = fixtures::fig1(21).unwrap();
    let (train, test) = split(&clean, 0.5, 1).unwrap();
    let test = abstainer::dataset::inject_outliers(&test, fixtures::OUTLIER_COUNT, fixtures::OUTLIER_DISTANCE, 4).unwrap();
    let cfg = CompareConfig {
        architectures: vec![Architecture::PreAttached],
        ..CompareConfig::default()
    };
    // The injected points are far from the test half; the screen is built
    // on the training half, so check their brute-force scores first.
    let r = make_pre_rejector(&train, cfg.k, cfg.delta).unwrap();
    for o in test.n() - fixtures::OUTLIER_COUNT..test.n() {
        assert!(r.screen_input(&test.row_vec(o)).unwrap().is_some());
    }
    let row = &compare_architectures(&train, &test, &cfg).unwrap().rows[0];
    assert_eq!(row.outlier_abstentions, fixtures::OUTLIER_COUNT);
}

#[test]
fn mixture_example_counts() {
    let d = gen_gaussian_mixture(
        &[
            GaussianSpec::axis_aligned("malignant", vec![0.20, 160.0], vec![0.02, 10.0], 50),
            GaussianSpec::axis_aligned("benign", vec![0.08, 90.0], vec![0.02, 10.0], 50),
        ],
        7,
    )
    .unwrap();
    assert_eq!(d.class_counts(), vec![50, 50]);
}
