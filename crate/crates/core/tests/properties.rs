use abstainer::attached::{
    make_chow_rejector, make_pre_rejector, post_pipeline_decide, pre_pipeline_decide, Rejector,
};
use abstainer::dataset::{
    corrupt_labels, inject_outliers, load_csv, save_csv, split, standardize, Dataset, LabelSpace, NoiseMode,
    Scaler,
};
use abstainer::evaluation::{coverage, selective_risk};
use abstainer::explanation::{occlusion_attribution, weight_attribution};
use abstainer::merged::{abstain_loss, bayes_decision, AbstainModel, AlphaConfig};
use abstainer::predictor::{
    cross_entropy, cross_entropy_gradient, empirical_risk, zero_one_loss, LinearModel, ProbVector,
};
use abstainer::decision::{AbstentionReason, Decision};
use ndarray::{Array1, Array2};
use proptest::prelude::*;

const NAMES: [&str; 4] = ["benign", "malignant", "unclear", "abstention"];

fn dataset_strategy() -> impl Strategy<Value = Dataset> {
    (1usize..15, 1usize..4, 1usize..4, any::<bool>()).prop_flat_map(|(n, d, m, with_abst)| {
        let mut labels: Vec<&str> = NAMES[..m].to_vec();
        if with_abst {
            labels.push("abstention");
        }
        let c = labels.len();
        (
            proptest::collection::vec(-1e3f64..1e3, n * d),
            proptest::collection::vec(0..c, n),
        )
            .prop_map(move |(values, ys)| {
                let space = LabelSpace::new(labels.clone()).unwrap();
                Dataset::new(
                    Array2::from_shape_vec((n, d), values).unwrap(),
                    ys,
                    space,
                    (1..=d).map(|j| format!("f{j}")).collect(),
                )
                .unwrap()
            })
    })
}

fn model_strategy(c: usize, d: usize) -> impl Strategy<Value = LinearModel> {
    (
        proptest::collection::vec(-3.0f64..3.0, c * d),
        proptest::collection::vec(-3.0f64..3.0, c),
    )
        .prop_map(move |(w, b)| {
            let labels: Vec<String> = (0..c).map(|i| format!("c{i}")).collect();
            LinearModel::new(
                Array2::from_shape_vec((c, d), w).unwrap(),
                Array1::from(b),
                LabelSpace::new(labels).unwrap(),
                Scaler::identity((1..=d).map(|j| format!("x{j}")).collect()),
            )
            .unwrap()
        })
}

fn probes(d: usize, n: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    proptest::collection::vec(proptest::collection::vec(-4.0f64..4.0, d), n)
}

fn proba_strategy(m: usize) -> impl Strategy<Value = ProbVector> {
    proptest::collection::vec(0.001f64..1.0, m).prop_map(|v| {
        let s: f64 = v.iter().sum();
        ProbVector::new(v.iter().map(|x| x / s).collect()).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn csv_round_trip_is_identity(data in dataset_strategy()) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        save_csv(&data, &path).unwrap();
        let back = load_csv(&path, "label").unwrap();
        prop_assert_eq!(back.n(), data.n());
        prop_assert_eq!(back.feature_names(), data.feature_names());
        // The reloaded space holds exactly the labels that occur.
        let present = LabelSpace::sorted(data.labels().iter().map(|&l| data.label_space().name(l).unwrap())).unwrap();
        prop_assert_eq!(back.label_space(), &present);
        for i in 0..data.n() {
            let a = data.label_space().name(data.labels()[i]).unwrap();
            let b = back.label_space().name(back.labels()[i]).unwrap();
            prop_assert_eq!(a, b);
            for j in 0..data.d() {
                prop_assert!((data.row(i)[j] - back.row(i)[j]).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn standardized_columns_have_zero_mean_unit_std(data in dataset_strategy()) {
        prop_assume!(data.n() >= 2);
        let (z, scaler) = standardize(&data);
        for j in 0..data.d() {
            let col = z.features().column(j).to_vec();
            let n = col.len() as f64;
            let mean = col.iter().sum::<f64>() / n;
            if scaler.is_passthrough(j) {
                prop_assert_eq!(col, data.features().column(j).to_vec());
            } else {
                let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
                prop_assert!(mean.abs() < 1e-9);
                prop_assert!((var.sqrt() - 1.0).abs() < 1e-9);
            }
        }
        // The stored map reproduces the standardized set.
        for i in 0..data.n() {
            let again = scaler.apply(&data.row_vec(i)).unwrap();
            prop_assert_eq!(again, z.row_vec(i));
        }
    }

    #[test]
    fn predict_is_shift_invariant(model in model_strategy(3, 2), x in probes(2, 1), shift in -50.0f64..50.0) {
        let shifted = LinearModel::new(
            model.weights().clone(),
            model.bias().mapv(|b| b + shift),
            model.label_space().clone(),
            model.scaler().clone(),
        ).unwrap();
        let p = model.predict_proba(&x[0]).unwrap();
        let q = shifted.predict_proba(&x[0]).unwrap();
        prop_assert_eq!(model.predict(&x[0]).unwrap(), shifted.predict(&x[0]).unwrap());
        for (a, b) in p.as_slice().iter().zip(q.as_slice()) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn empirical_risk_equals_recount(model in model_strategy(2, 2), xs in probes(2, 12), ys in proptest::collection::vec(0usize..2, 12)) {
        let data = Dataset::new(
            Array2::from_shape_vec((12, 2), xs.concat()).unwrap(),
            ys.clone(),
            model.label_space().clone(),
            vec!["x1".into(), "x2".into()],
        ).unwrap();
        let recount = xs.iter().zip(&ys).filter(|(x, y)| model.predict(x).unwrap() != **y).count();
        prop_assert_eq!(empirical_risk(&model, &data, zero_one_loss).unwrap(), recount as f64);
    }

    #[test]
    fn gradient_matches_central_differences(
        n in 1usize..=10, d in 1usize..=3, c in 2usize..=3,
        values in proptest::collection::vec(-2.0f64..2.0, 10 * 3 + 3 * 3 + 3),
        ys in proptest::collection::vec(0usize..3, 10),
    ) {
        let z = Array2::from_shape_vec((n, d), values[..n * d].to_vec()).unwrap();
        let w = Array2::from_shape_vec((c, d), values[30..30 + c * d].to_vec()).unwrap();
        let b = Array1::from(values[39..39 + c].to_vec());
        let labels: Vec<usize> = ys[..n].iter().map(|y| y % c).collect();
        let (gw, gb) = cross_entropy_gradient(w.view(), b.view(), z.view(), &labels);
        let h = 1e-5;
        let f = |w: &Array2<f64>, b: &Array1<f64>| cross_entropy(w.view(), b.view(), z.view(), &labels);
        let check = |analytic: f64, numeric: f64| {
            (analytic - numeric).abs() <= 1e-5 * analytic.abs().max(numeric.abs()).max(1e-3)
        };
        for k in 0..c {
            for j in 0..d {
                let (mut wp, mut wm) = (w.clone(), w.clone());
                wp[[k, j]] += h;
                wm[[k, j]] -= h;
                let num = (f(&wp, &b) - f(&wm, &b)) / (2.0 * h);
                prop_assert!(check(gw[[k, j]], num), "w[{k},{j}]: {} vs {num}", gw[[k, j]]);
            }
            let (mut bp, mut bm) = (b.clone(), b.clone());
            bp[k] += h;
            bm[k] -= h;
            let num = (f(&w, &bp) - f(&w, &bm)) / (2.0 * h);
            prop_assert!(check(gb[k], num), "b[{k}]: {} vs {num}", gb[k]);
        }
    }

    #[test]
    fn chow_abstention_sets_are_nested_in_tau(model in model_strategy(3, 2), xs in probes(2, 30), t1 in 0.01f64..1.0, t2 in 0.01f64..1.0) {
        let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        let (r_lo, r_hi) = (make_chow_rejector(lo).unwrap(), make_chow_rejector(hi).unwrap());
        for x in &xs {
            let a = post_pipeline_decide(&model, &r_lo, x).unwrap();
            let b = post_pipeline_decide(&model, &r_hi, x).unwrap();
            prop_assert!(!a.is_abstained() || b.is_abstained());
            // Passed-through answers are the plain predictor's.
            if let Some(l) = a.label() {
                prop_assert_eq!(l, model.predict(x).unwrap());
            }
            if let Some(reason) = b.reason() {
                prop_assert_eq!(reason, AbstentionReason::Ambiguity);
            }
        }
    }

    #[test]
    fn bayes_abstention_shrinks_as_alpha_grows(p in proba_strategy(3), a1 in 0.01f64..0.66, a2 in 0.01f64..0.66) {
        let (lo, hi) = if a1 <= a2 { (a1, a2) } else { (a2, a1) };
        let abst_hi = bayes_decision(&p, &AlphaConfig::Uniform(hi)).unwrap().is_abstained();
        let abst_lo = bayes_decision(&p, &AlphaConfig::Uniform(lo)).unwrap().is_abstained();
        prop_assert!(!abst_hi || abst_lo);
    }

    #[test]
    fn abstain_loss_range(y in 0usize..2, pred in 0usize..3, a0 in 0.01f64..0.99, a1 in 0.01f64..0.99) {
        let space = LabelSpace::new(["benign", "malignant", "abstention"]).unwrap();
        let alpha = AlphaConfig::PerClass(vec![a0, a1]);
        let l = abstain_loss(&space, y, Some(pred), &alpha).unwrap();
        if pred == 2 {
            prop_assert_eq!(l, alpha.for_class(y));
        } else {
            prop_assert!(l == 0.0 || l == 1.0);
            prop_assert_eq!(l == 0.0, pred == y);
        }
    }

    #[test]
    fn outlier_screen_ignores_labels_and_shrinks_in_delta(
        xs in probes(2, 20), probe in probes(2, 25),
        seed in any::<u64>(), d1 in 0.05f64..3.0, d2 in 0.05f64..3.0, k in 1usize..6,
    ) {
        let data = Dataset::new(
            Array2::from_shape_vec((20, 2), xs.concat()).unwrap(),
            (0..20).map(|i| i % 2).collect(),
            LabelSpace::new(["a", "b"]).unwrap(),
            vec!["x1".into(), "x2".into()],
        ).unwrap();
        let mut perm = data.labels().to_vec();
        abstainer::rng::Rng::new(seed).shuffle(&mut perm);
        let permuted = data.relabel(perm, data.label_space().clone()).unwrap();
        let (lo, hi) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
        let r = make_pre_rejector(&data, k, lo).unwrap();
        let rp = make_pre_rejector(&permuted, k, lo).unwrap();
        let r_hi = make_pre_rejector(&data, k, hi).unwrap();
        prop_assert_eq!(&r, &rp);
        for x in &probe {
            let a = r.screen_input(x).unwrap().is_some();
            prop_assert_eq!(a, rp.screen_input(x).unwrap().is_some());
            prop_assert!(a || r_hi.screen_input(x).unwrap().is_none());
        }
    }

    #[test]
    fn coverage_and_risk_match_recount(raw in proptest::collection::vec((0usize..3, any::<bool>(), 0usize..2), 1..40)) {
        let decisions: Vec<Decision> = raw.iter().map(|(l, a, _)| if *a {
            Decision::abstained(AbstentionReason::Ambiguity, vec![])
        } else {
            Decision::Predicted(*l)
        }).collect();
        let truths: Vec<usize> = raw.iter().map(|r| r.2).collect();
        let predicted: Vec<usize> = (0..raw.len()).filter(|&i| !raw[i].1).collect();
        prop_assert_eq!(coverage(&decisions).unwrap(), predicted.len() as f64 / raw.len() as f64);
        let risk = selective_risk(&decisions, &truths).unwrap();
        if predicted.is_empty() {
            prop_assert!(risk.is_none());
        } else {
            let wrong = predicted.iter().filter(|&&i| raw[i].0 != raw[i].2).count();
            prop_assert_eq!(risk, Some(wrong as f64 / predicted.len() as f64));
        }
    }

    #[test]
    fn weight_attribution_reconstructs_class_score(model in model_strategy(3, 3), x in probes(3, 1), c in 0usize..3) {
        let a = weight_attribution(&model, &x[0], Some(c)).unwrap();
        let score = model.scores(&x[0]).unwrap()[c];
        prop_assert!((a.scores.iter().sum::<f64>() + model.bias()[c] - score).abs() <= 1e-9);
    }

    #[test]
    fn occlusion_is_zero_on_unused_features(model in model_strategy(2, 3), x in probes(3, 1), dead in 0usize..3) {
        let mut w = model.weights().clone();
        w.column_mut(dead).fill(0.0);
        let base = LinearModel::new(w, model.bias().clone(), model.label_space().clone(), model.scaler().clone()).unwrap();
        let m = AbstainModel::PlugIn { base, alpha: AlphaConfig::Uniform(0.3) };
        let a = occlusion_attribution(&m, &x[0], None).unwrap();
        prop_assert_eq!(a.scores[dead], 0.0);
    }

    #[test]
    fn corruption_contract(n in 10usize..60, p in 0.05f64..0.95, seed in any::<u64>()) {
        let data = Dataset::new(
            Array2::from_shape_fn((n, 2), |(i, j)| (i * 3 + j) as f64),
            (0..n).map(|i| i % 3).collect(),
            LabelSpace::new(["a", "b", "c"]).unwrap(),
            vec!["x1".into(), "x2".into()],
        ).unwrap();
        let out = corrupt_labels(&data, &NoiseMode::Fraction(p), true, seed).unwrap();
        prop_assert_eq!(out.dataset.n(), n);
        prop_assert_eq!(out.dataset.d(), 3);
        let col = out.dataset.features().column(2).to_vec();
        prop_assert!(col.iter().all(|&v| v == 0.0 || v == 1.0));
        prop_assert_eq!(col.iter().sum::<f64>() as usize, out.corrupted.len());
        for i in 0..n {
            if !out.corrupted.contains(&i) {
                prop_assert_eq!(out.dataset.labels()[i], data.labels()[i]);
            }
        }
    }

    #[test]
    fn injected_outliers_keep_their_distance(xs in probes(2, 15), count in 1usize..4, dist in 0.5f64..6.0, seed in any::<u64>()) {
        let data = Dataset::new(
            Array2::from_shape_vec((15, 2), xs.concat()).unwrap(),
            vec![0; 15],
            LabelSpace::new(["a"]).unwrap(),
            vec!["x1".into(), "x2".into()],
        ).unwrap();
        let out = inject_outliers(&data, count, dist, seed).unwrap();
        prop_assert_eq!(out.n(), 15 + count);
        let scaler = Scaler::fit(&data);
        for o in 15..out.n() {
            let zo = scaler.apply(&out.row_vec(o)).unwrap();
            for i in 0..15 {
                let zi = scaler.apply(&data.row_vec(i)).unwrap();
                let dd = zo.iter().zip(&zi).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
                prop_assert!(dd >= dist, "outlier {o} at {dd} from row {i}");
            }
        }
    }

    #[test]
    fn split_is_a_stratified_partition(n in 2usize..80, f in 0.05f64..0.95, seed in any::<u64>()) {
        let data = Dataset::new(
            Array2::from_shape_fn((n, 1), |(i, _)| i as f64),
            (0..n).map(|i| i % 2).collect(),
            LabelSpace::new(["a", "b"]).unwrap(),
            vec!["id".into()],
        ).unwrap();
        let want = (n as f64 * f).floor() as usize;
        match split(&data, f, seed) {
            Ok((tr, te)) => {
                prop_assert_eq!(tr.n(), want);
                let mut ids: Vec<i64> = tr.features().iter().chain(te.features().iter()).map(|v| *v as i64).collect();
                ids.sort_unstable();
                prop_assert_eq!(ids, (0..n as i64).collect::<Vec<_>>());
            }
            Err(_) => prop_assert!(want == 0 || want == n),
        }
    }

    #[test]
    fn pre_pipeline_skips_predictor_on_rejection(xs in probes(2, 10), probe in probes(2, 10)) {
        let data = Dataset::new(
            Array2::from_shape_vec((10, 2), xs.concat()).unwrap(),
            (0..10).map(|i| i % 2).collect(),
            LabelSpace::new(["a", "b"]).unwrap(),
            vec!["x1".into(), "x2".into()],
        ).unwrap();
        let model = LinearModel::new(Array2::zeros((2, 2)), Array1::zeros(2), data.label_space().clone(), Scaler::fit(&data)).unwrap();
        let counting = abstainer::attached::CountingModel::new(model);
        let r = make_pre_rejector(&data, 2, 0.5).unwrap();
        for x in &probe {
            let before = counting.evaluations();
            let d = pre_pipeline_decide(&r, &counting, x).unwrap();
            prop_assert_eq!(counting.evaluations() - before, usize::from(!d.is_abstained()));
            prop_assert!(matches!(r, Rejector::KnnDistance(_)));
        }
    }
}
