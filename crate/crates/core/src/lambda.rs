//! Langton's λ, its restricted variants and closed forms for the one-step
//! information features.
//!
//! λ is the fraction of ones in the rule table. Restricted parameters count
//! the ones among the four table entries with one input held fixed, still
//! divided by 8, so that `λ0 + λ1 = λ` for each input.

use num_rational::Ratio;
use serde::Serialize;

use crate::eca::RuleTable;
use crate::error::Result;
use crate::features::{feature_vector, FeatureDescriptor, FeatureKind};
use crate::numfmt::format_significant;
use crate::predict::{predictive_power, ClassTable};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LambdaProfile {
    pub lambda: Ratio<u32>,
    pub lambda0: Ratio<u32>,
    pub lambda1: Ratio<u32>,
    pub lambda0_left: Ratio<u32>,
    pub lambda1_left: Ratio<u32>,
    pub lambda0_right: Ratio<u32>,
    pub lambda1_right: Ratio<u32>,
}

/// Bit of the neighborhood code holding each input.
const LEFT: usize = 4;
const CENTER: usize = 2;
const RIGHT: usize = 1;

fn restricted(rule: &RuleTable, input: usize, value: usize) -> Ratio<u32> {
    let ones = (0..8)
        .filter(|&code| (code & input != 0) as usize == value)
        .filter(|&code| rule.apply_code(code) == 1)
        .count() as u32;
    Ratio::new(ones, 8)
}

pub fn lambda_profile(rule: &RuleTable) -> LambdaProfile {
    LambdaProfile {
        lambda: Ratio::new(rule.ones(), 8),
        lambda0: restricted(rule, CENTER, 0),
        lambda1: restricted(rule, CENTER, 1),
        lambda0_left: restricted(rule, LEFT, 0),
        lambda1_left: restricted(rule, LEFT, 1),
        lambda0_right: restricted(rule, RIGHT, 0),
        lambda1_right: restricted(rule, RIGHT, 1),
    }
}

/// One-step information quantities in nats.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ClosedFormFeatures {
    pub i_tot: f64,
    pub i_mem: f64,
    pub i_trans_left: f64,
    pub i_trans_right: f64,
}

fn to_f64(r: Ratio<u32>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// `c ln(num/den)`, zero when the coefficient vanishes.
fn term(c: f64, num: f64, den: f64) -> f64 {
    if c == 0.0 {
        0.0
    } else {
        c * (num / den).ln()
    }
}

fn binary_entropy(lambda: f64) -> f64 {
    -term(lambda, lambda, 1.0) - term(1.0 - lambda, 1.0 - lambda, 1.0)
}

/// Information between the next state and one input, given the split
/// `(q0, q1)` of λ over the two values of that input.
fn split_information(lambda: f64, q0: f64, q1: f64) -> f64 {
    [q0, q1]
        .iter()
        .map(|&q| term(0.5 - q, 1.0 - 2.0 * q, 1.0 - lambda) + term(q, 2.0 * q, lambda))
        .sum()
}

pub fn closed_form_features(rule: &RuleTable) -> ClosedFormFeatures {
    let p = lambda_profile(rule);
    let lambda = to_f64(p.lambda);
    ClosedFormFeatures {
        i_tot: binary_entropy(lambda),
        i_mem: split_information(lambda, to_f64(p.lambda0), to_f64(p.lambda1)),
        i_trans_left: split_information(lambda, to_f64(p.lambda0_left), to_f64(p.lambda1_left)),
        i_trans_right: split_information(lambda, to_f64(p.lambda0_right), to_f64(p.lambda1_right)),
    }
}

/// The same four quantities from the exact t=1 features, converted to nats.
pub fn exact_one_step_features(rule: &RuleTable) -> Result<ClosedFormFeatures> {
    let masks = [0b111, 0b010, 0b100, 0b001];
    let descriptors = masks
        .iter()
        .map(|&m| FeatureDescriptor::new(FeatureKind::I, 1, m))
        .collect::<Result<Vec<_>>>()?;
    let v = feature_vector(rule.number(), &descriptors)?;
    let ln2 = std::f64::consts::LN_2;
    let nats = |i: usize| v.get(&descriptors[i]).expect("descriptor computed") * ln2;
    Ok(ClosedFormFeatures {
        i_tot: nats(0),
        i_mem: nats(1),
        i_trans_left: nats(2),
        i_trans_right: nats(3),
    })
}

/// Largest absolute difference between closed-form and exact values.
pub fn cross_check(rule: &RuleTable) -> Result<f64> {
    let a = closed_form_features(rule);
    let b = exact_one_step_features(rule)?;
    Ok([
        a.i_tot - b.i_tot,
        a.i_mem - b.i_mem,
        a.i_trans_left - b.i_trans_left,
        a.i_trans_right - b.i_trans_right,
    ]
    .iter()
    .fold(0.0f64, |m, d| m.max(d.abs())))
}

/// Predictive power of λ alone. λ is symbolized exactly by its count of ones.
pub fn lambda_predictive_power(classes: &ClassTable) -> Result<f64> {
    let values: Vec<Vec<i64>> = (0..=255u8)
        .map(|r| vec![i64::from(RuleTable::from_number(r).ones())])
        .collect();
    predictive_power(&values, classes)
}

/// Table over all rules: "rule,lambda,i_tot,i_mem,i_trans_l,i_trans_r,cross_check".
pub fn lambda_table_csv() -> Result<String> {
    let mut out = String::from("rule,lambda,i_tot,i_mem,i_trans_l,i_trans_r,cross_check\n");
    for r in 0..=255u8 {
        let rule = RuleTable::from_number(r);
        let p = lambda_profile(&rule);
        let f = closed_form_features(&rule);
        let dev = cross_check(&rule)?;
        out.push_str(&format!(
            "{r},{},{},{},{},{},{}\n",
            p.lambda,
            format_significant(f.i_tot, 12),
            format_significant(f.i_mem, 12),
            format_significant(f.i_trans_left, 12),
            format_significant(f.i_trans_right, 12),
            format_significant(dev, 3),
        ));
    }
    Ok(out)
}
