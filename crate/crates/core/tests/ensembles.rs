use infoproc_core::cluster::complete_linkage;
use infoproc_core::eca::RuleTable;
use infoproc_core::features::{enumerate_descriptors, feature_vector, summary_vector, EnumerationMode};
use infoproc_core::stationary::{attractor_ensemble, stationary_features};
use num_rational::Ratio;

/// A rule whose ring update is a bijection leaves the uniform state
/// distribution in place, so stationary and iid one-step features agree.
#[test]
fn bijective_rules_keep_iid_features() {
    let descriptors = enumerate_descriptors(1, EnumerationMode::PerStep).unwrap();
    for rule in [15u8, 51, 85, 170, 204, 240] {
        let table = RuleTable::from_number(rule);
        let n = 9;
        let e = attractor_ensemble(&table, n).unwrap();
        assert_eq!(e.states().len(), 1 << n, "rule {rule}");
        let stationary = stationary_features(&e).unwrap();
        let iid = feature_vector(rule, &descriptors).unwrap();
        for d in &descriptors {
            let (a, b) = (stationary.get(d).unwrap(), iid.get(d).unwrap());
            assert!((a - b).abs() < 1e-12, "rule {rule} {}: {a} vs {b}", d.name());
        }
    }
}

#[test]
fn homogeneous_rules_collapse_to_fixed_points() {
    for rule in [0u8, 255] {
        let e = attractor_ensemble(&RuleTable::from_number(rule), 10).unwrap();
        assert_eq!(e.states().len(), 1, "rule {rule}");
        assert_eq!(e.total_mass(), 1.0);
        let f = stationary_features(&e).unwrap();
        assert!(f.values().iter().all(|v| v.abs() < 1e-12));
    }
}

/// Under rule 128 only the all-ones ring escapes the zero fixed point.
#[test]
fn rule_128_masses() {
    let n = 10;
    let e = attractor_ensemble(&RuleTable::from_number(128), n).unwrap();
    let ones = (1u64 << n) - 1;
    assert_eq!(e.states().keys().copied().collect::<Vec<_>>(), vec![0, ones]);
    assert_eq!(e.mass(ones), Ratio::new(1, 1 << n));
    assert_eq!(e.mass(0), Ratio::new((1 << n) - 1, 1 << n));
}

#[test]
fn symmetric_rules_merge_at_zero() {
    for t in 1..=2 {
        let vectors: Vec<(u8, Vec<f64>)> = (0..=255u8).map(|r| (r, summary_vector(r, t).unwrap())).collect();
        let d = complete_linkage(vectors).unwrap();
        for r in 0..=255u8 {
            let table = RuleTable::from_number(r);
            for partner in [table.mirror().number(), table.complement().number()] {
                assert_eq!(d.cophenetic(&r, &partner), Some(0.0), "t={t}: {r} vs {partner}");
            }
        }
    }
}

#[test]
fn ensembles_are_invariant_across_ring_sizes() {
    for rule in [30u8, 54, 110, 184] {
        for n in [5, 8, 11] {
            let e = attractor_ensemble(&RuleTable::from_number(rule), n).unwrap();
            assert_eq!(e.step(), e, "rule {rule} N={n}");
            assert!((e.total_mass() - 1.0).abs() < 1e-12);
        }
    }
}
