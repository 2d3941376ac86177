use cislunar_core::channel::simulate_trace;
use cislunar_core::cnn::{Architecture, CnnModel, CnnParams, TrainConfig};
use cislunar_core::dataset::{self, GenerationGrid};
use cislunar_core::dtree::{DecisionTree, TreeNode, TreeParams};
use cislunar_core::link_budget::{fspl, mean_snr_db, operational_temperature};
use cislunar_core::{
    ConfusionMatrix, InterferenceModel, InterferenceSpec, Label, PhaseAngle, RngStream, ScenarioConfig,
    Standardizer,
};
use proptest::prelude::*;

fn scenario() -> impl Strategy<Value = ScenarioConfig> {
    prop_oneof![Just(ScenarioConfig::gateway()), Just(ScenarioConfig::llo())]
}

fn model() -> impl Strategy<Value = InterferenceModel> {
    prop_oneof![Just(InterferenceModel::Model1), Just(InterferenceModel::Model2)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sinr_never_exceeds_snr(
        cfg in scenario(),
        model in model(),
        psi in 0.0..360.0f64,
        power in -130.0..-100.0f64,
        p in 0.0..=1.0f64,
        seed in any::<u64>(),
    ) {
        let spec = InterferenceSpec::new(model, power, p).unwrap();
        let stream = RngStream::new(seed, 1);
        let clean = simulate_trace(&cfg, PhaseAngle::new(psi), None, 64, stream).unwrap();
        let noisy = simulate_trace(&cfg, PhaseAngle::new(psi), Some(&spec), 64, stream).unwrap();
        for (c, n) in clean.iter().zip(&noisy) {
            prop_assert_eq!(c.fading_power, n.fading_power);
            prop_assert!(n.sinr_db <= c.sinr_db);
            if n.alpha == 0 {
                prop_assert_eq!(n.sinr_db, c.sinr_db);
            }
        }
    }

    #[test]
    fn phase_normalization(deg in -1.0e4..1.0e4f64, k in -5i32..5) {
        let a = PhaseAngle::new(deg).degrees();
        prop_assert!((0.0..360.0).contains(&a));
        let shifted = PhaseAngle::new(deg + 360.0 * f64::from(k)).degrees();
        let diff = (a - shifted).abs();
        prop_assert!(diff < 1e-9 || (360.0 - diff) < 1e-9);
    }

    #[test]
    fn noise_temperature_and_snr_periodic(cfg in scenario(), psi in 0.0..360.0f64) {
        let t0 = operational_temperature(&cfg, PhaseAngle::new(psi)).unwrap();
        let t1 = operational_temperature(&cfg, PhaseAngle::new(psi + 360.0)).unwrap();
        prop_assert!((t0 - t1).abs() < 1e-9 * t0);
        prop_assert!(t0 > 0.0);
        let s0 = mean_snr_db(&cfg, PhaseAngle::new(psi)).unwrap();
        prop_assert!(s0.is_finite());
    }

    #[test]
    fn path_loss_grows_with_distance(d in 1.0e3..1.0e9f64, f in 1.0e9..1.0e11f64, r in 1.001..10.0f64) {
        prop_assert!(fspl(d * r, f).unwrap() > fspl(d, f).unwrap());
    }

    #[test]
    fn metrics_match_raw_predictions(pairs in prop::collection::vec((any::<bool>(), any::<bool>()), 1..200)) {
        let lab = |b: bool| if b { Label::Interfered } else { Label::Clean };
        let cm = ConfusionMatrix::from_pairs(pairs.iter().map(|&(a, p)| (lab(a), lab(p))));
        prop_assert_eq!(cm.total() as usize, pairs.len());
        let correct = pairs.iter().filter(|(a, p)| a == p).count();
        let m = cm.metrics().unwrap();
        prop_assert_eq!(m.accuracy, correct as f64 / pairs.len() as f64);
        for v in [m.precision, m.recall, m.f1].into_iter().flatten() {
            prop_assert!((0.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn standardizer_inverts(values in prop::collection::vec(-50.0..50.0f64, 2..64)) {
        prop_assume!(values.iter().any(|v| *v != values[0]));
        let st = Standardizer::fit([values.as_slice()]).unwrap();
        let back = st.invert(&st.apply(&values));
        for (a, b) in values.iter().zip(&back) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }
}

fn labelled_rows(seed: u64, n: usize, d: usize) -> (Vec<Vec<f64>>, Vec<usize>) {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.random_range(-3.0..3.0)).collect()).collect();
    let labels = rows.iter().map(|r| usize::from(r[0] + 0.5 * r[d - 1] > rng.random_range(-0.5..0.5))).collect();
    (rows, labels)
}

fn structure(tree: &DecisionTree) -> Vec<Option<(usize, usize, usize)>> {
    tree.nodes
        .iter()
        .map(|n| match n {
            TreeNode::Split { feature, left, right, .. } => Some((*feature, *left, *right)),
            TreeNode::Leaf { .. } => None,
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn tree_structure_survives_monotone_rescaling(seed in any::<u64>(), scale in 0.1..10.0f64, shift in -5.0..5.0f64) {
        let (rows, labels) = labelled_rows(seed, 60, 4);
        let refs: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
        let tree = DecisionTree::fit(&refs, &labels, TreeParams::default()).unwrap();
        let scaled: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|v| v * scale + shift).collect()).collect();
        let srefs: Vec<&[f64]> = scaled.iter().map(Vec::as_slice).collect();
        let stree = DecisionTree::fit(&srefs, &labels, TreeParams::default()).unwrap();
        prop_assert_eq!(structure(&tree), structure(&stree));
        for (r, s) in refs.iter().zip(&srefs) {
            prop_assert_eq!(tree.predict(r).unwrap(), stree.predict(s).unwrap());
        }
    }

    #[test]
    fn tree_respects_depth_cap_and_is_deterministic(seed in any::<u64>(), depth in 1usize..6) {
        let (rows, labels) = labelled_rows(seed, 80, 6);
        let refs: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
        let params = TreeParams { max_depth: depth, ..TreeParams::default() };
        let a = DecisionTree::fit(&refs, &labels, params).unwrap();
        let b = DecisionTree::fit(&refs, &labels, params).unwrap();
        prop_assert!(a.depth() <= depth);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn windows_regenerate_from_metadata(seed in any::<u64>(), model in model(), cfg in scenario()) {
        let mut grid = GenerationGrid::new(cfg, model, 8, 48);
        grid.powers_dbw = vec![-120.0, -100.0];
        grid.psis_deg = vec![0.0, 250.0];
        let ds = dataset::generate(&grid, seed).unwrap();
        for i in [0, 13, 29, 47] {
            prop_assert_eq!(&ds.regenerate(i).unwrap(), &ds.windows[i]);
        }
    }

    #[test]
    fn cnn_outputs_are_distributions(seed in any::<u64>(), len in 5usize..40) {
        use rand::{Rng, SeedableRng};
        let arch = Architecture { input_len: len, filters: 3, kernel: 5, hidden: 4, classes: 2 };
        let params = CnnParams::init_uniform(arch, seed).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<f64> = (0..len).map(|_| rng.random_range(-4.0..4.0)).collect();
        let p = params.predict_proba(&[&x, &x]).unwrap();
        prop_assert_eq!(&p[0], &p[1]);
        prop_assert!((p[0].iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(p[0].iter().all(|v| (0.0..=1.0).contains(v)));
        prop_assert_eq!(arch.conv_len(), len - 4);

        // persisted standardization + prediction equals the end-to-end raw path
        let model = CnnModel { params, standardizer: Standardizer { mean: 1.5, std: 2.0 }, train_config: TrainConfig::default() };
        let scaled = model.standardizer.apply(&x);
        let direct = model.params.predict_proba(&[&scaled]).unwrap().remove(0);
        prop_assert_eq!(model.predict_raw(&x).unwrap().1, direct);
    }
}
