use infoproc_core::features::EnumerationMode;
use infoproc_core::predict::{
    nonlocality, permutation_baseline, prediction_report, select_principal, BaselineConfig, ClassTable,
    FeaturePool, SearchMode, Symbolization,
};

fn pool(t: usize) -> FeaturePool {
    FeaturePool::new(t, EnumerationMode::PerStep, Symbolization::default()).unwrap()
}

#[test]
fn one_step_principal_sets() {
    let classes = ClassTable::bundled();
    let p = pool(1);
    let s1 = select_principal(&p, &classes, 1, SearchMode::Auto).unwrap();
    assert_eq!(s1.features, vec!["S111"]);
    assert!((s1.power - 0.365).abs() < 0.02, "{}", s1.power);
    let s2 = select_principal(&p, &classes, 2, SearchMode::Auto).unwrap();
    assert!((s2.power - 0.43).abs() < 0.02, "{}", s2.power);
    let s4 = select_principal(&p, &classes, 4, SearchMode::Auto).unwrap();
    let total = p.full_power(&classes).unwrap();
    assert!((total - 0.49).abs() < 0.02, "{total}");
    assert!((s4.power - total).abs() < 1e-9);
    let s3 = select_principal(&p, &classes, 3, SearchMode::Auto).unwrap();
    assert!(s3.power < total - 1e-9);
}

#[test]
fn two_and_three_step_principal_sets() {
    let classes = ClassTable::bundled();
    let p2 = pool(2);
    let s1 = select_principal(&p2, &classes, 1, SearchMode::Auto).unwrap();
    assert!(s1.features[0].contains(":S"), "{:?}", s1.features);
    assert!((s1.power - 0.90).abs() < 0.02, "{}", s1.power);
    let s3 = select_principal(&p2, &classes, 3, SearchMode::Auto).unwrap();
    let total = p2.full_power(&classes).unwrap();
    assert!((total - 0.98).abs() < 0.02);
    assert!((s3.power - total).abs() < 1e-9);
    let p3 = pool(3);
    let s2 = select_principal(&p3, &classes, 2, SearchMode::Auto).unwrap();
    assert!((s2.power - 1.0).abs() < 1e-9);
}

#[test]
fn nonlocality_saturates_at_third_step() {
    let nl = nonlocality(3, &ClassTable::bundled(), Symbolization::default()).unwrap();
    let powers: Vec<f64> = nl.curve.iter().map(|p| p.power).collect();
    assert!((powers[0] - 0.49).abs() < 0.02);
    assert!((powers[1] - 0.98).abs() < 0.02);
    assert!((powers[2] - 1.0).abs() < 1e-9);
    assert_eq!(nl.saturation_step, 3);
    assert_eq!(nl.saturation_transitions, 2);
}

#[test]
fn baseline_sits_below_observed_power() {
    let classes = ClassTable::bundled();
    let p = pool(1);
    let sel = select_principal(&p, &classes, 1, SearchMode::Auto).unwrap();
    let a = permutation_baseline(&p, &classes, &sel.indices, 1000, 1, None).unwrap();
    let b = permutation_baseline(&p, &classes, &sel.indices, 1000, 2, None).unwrap();
    assert!(sel.power > a.hi);
    assert!((a.lo - b.lo).abs() < 0.02 && (a.hi - b.hi).abs() < 0.02);
}

#[test]
fn null_calibration() {
    // with labels already random, the observed power is a draw from the null
    use rand::SeedableRng;
    let classes = ClassTable::bundled();
    let p = pool(1);
    let idx = vec![p.index_of("S111").unwrap()];
    let mut inside = 0;
    let reps = 40;
    for rep in 0..reps {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1000 + rep);
        let shuffled = classes.permuted(&mut rng);
        let observed = p.power(&idx, &shuffled).unwrap();
        let null = permutation_baseline(&p, &shuffled, &idx, 200, rep, None).unwrap();
        if observed >= null.lo && observed <= null.hi {
            inside += 1;
        }
    }
    assert!(inside >= 33, "{inside}/{reps}");
}

#[test]
fn report_is_monotone_and_serializes() {
    let classes = ClassTable::bundled();
    let p = pool(1);
    let cfg = BaselineConfig {
        permutations: 100,
        seed: 3,
        reselect: false,
    };
    let r = prediction_report(&p, &classes, 4, SearchMode::Auto, Some(cfg)).unwrap();
    assert!(r.entries.windows(2).all(|w| w[1].power >= w[0].power - 1e-12));
    let json = serde_json::to_value(&r).unwrap();
    let e = &json["entries"][0];
    for key in ["t", "n", "features", "power"] {
        assert!(e.get(key).is_some(), "{key}");
    }
    for key in ["mean", "lo", "hi"] {
        assert!(e["baseline"].get(key).is_some(), "{key}");
    }
}

#[test]
fn superset_never_loses_power() {
    let classes = ClassTable::bundled();
    let p = pool(2);
    for a in (0..p.len()).step_by(7) {
        for b in (0..p.len()).step_by(11) {
            let single = p.power(&[a], &classes).unwrap();
            let mut pair = vec![a, b];
            pair.sort();
            pair.dedup();
            assert!(p.power(&pair, &classes).unwrap() >= single - 1e-9);
        }
    }
}
