//! Entropy, mutual information and whole-minus-sum synergy on discrete
//! joint distributions.
//!
//! A [`JointDistribution`] keeps its support in canonical (lexicographic
//! outcome) order, so every sum below runs in the same order on every call
//! and results are reproducible bit for bit. Exact distributions carry
//! integer counts; they are converted to floating point only when a
//! measure is evaluated.

use std::collections::BTreeMap;

use crate::error::{domain, Error, Result};

/// Tolerance on the total mass of real-weighted distributions.
pub const MASS_TOLERANCE: f64 = 1e-12;

/// Negative mutual information within this distance of zero is clamped.
pub const NEGATIVE_MI_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum Unit {
    #[default]
    Bits,
    Nats,
}

impl Unit {
    #[inline]
    fn log(self, x: f64) -> f64 {
        match self {
            Unit::Bits => x.log2(),
            Unit::Nats => x.ln(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Weights {
    Exact { counts: Vec<u64>, total: u64 },
    Real(Vec<f64>),
}

/// A probability table over tuples of labelled discrete variables.
#[derive(Clone, Debug, PartialEq)]
pub struct JointDistribution {
    variables: Vec<String>,
    outcomes: Vec<Vec<u32>>,
    weights: Weights,
}

fn check_arity(variables: &[String], outcome: &[u32]) -> Result<()> {
    if outcome.len() != variables.len() {
        return domain(format!(
            "outcome of arity {} does not match {} variables",
            outcome.len(),
            variables.len()
        ));
    }
    Ok(())
}

impl JointDistribution {
    /// Exact distribution from integer counts; probabilities are `count / Σ counts`.
    pub fn from_counts<I>(variables: Vec<String>, support: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, u64)>,
    {
        let mut merged: BTreeMap<Vec<u32>, u64> = BTreeMap::new();
        for (outcome, count) in support {
            check_arity(&variables, &outcome)?;
            if count > 0 {
                *merged.entry(outcome).or_insert(0) += count;
            }
        }
        let total: u64 = merged.values().sum();
        if total == 0 {
            return domain("distribution has no mass");
        }
        let (outcomes, counts) = merged.into_iter().unzip();
        Ok(JointDistribution {
            variables,
            outcomes,
            weights: Weights::Exact { counts, total },
        })
    }

    /// Real-weighted distribution; weights must be non-negative and sum to 1.
    pub fn from_probabilities<I>(variables: Vec<String>, support: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, f64)>,
    {
        let mut merged: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
        for (outcome, p) in support {
            check_arity(&variables, &outcome)?;
            if !p.is_finite() || p < 0.0 {
                return domain(format!("invalid probability {p}"));
            }
            if p > 0.0 {
                *merged.entry(outcome).or_insert(0.0) += p;
            }
        }
        let total: f64 = merged.values().sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return domain(format!("probabilities sum to {total}, not 1"));
        }
        let (outcomes, probs) = merged.into_iter().unzip();
        Ok(JointDistribution {
            variables,
            outcomes,
            weights: Weights::Real(probs),
        })
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn arity(&self) -> usize {
        self.variables.len()
    }

    /// Size of the support.
    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.weights, Weights::Exact { .. })
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v == name)
    }

    /// `(count, total)` of an outcome for exact distributions.
    pub fn exact_weight(&self, outcome: &[u32]) -> Option<(u64, u64)> {
        match &self.weights {
            Weights::Exact { counts, total } => {
                let idx = self.outcomes.binary_search_by(|o| o.as_slice().cmp(outcome));
                Some((idx.map(|i| counts[i]).unwrap_or(0), *total))
            }
            Weights::Real(_) => None,
        }
    }

    /// Outcomes with their probabilities, in canonical order.
    pub fn iter(&self) -> impl Iterator<Item = (&[u32], f64)> + '_ {
        self.outcomes
            .iter()
            .enumerate()
            .map(move |(i, o)| (o.as_slice(), self.probability_at(i)))
    }

    #[inline]
    fn probability_at(&self, i: usize) -> f64 {
        match &self.weights {
            Weights::Exact { counts, total } => counts[i] as f64 / *total as f64,
            Weights::Real(p) => p[i],
        }
    }

    /// Marginal over the given variable indices, in the given order.
    pub fn marginal(&self, indices: &[usize]) -> Result<JointDistribution> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.arity()) {
            return domain(format!("variable index {bad} out of range"));
        }
        let variables: Vec<String> = indices.iter().map(|&i| self.variables[i].clone()).collect();
        let project = |o: &Vec<u32>| indices.iter().map(|&i| o[i]).collect::<Vec<u32>>();
        match &self.weights {
            Weights::Exact { counts, total } => {
                let mut merged: BTreeMap<Vec<u32>, u64> = BTreeMap::new();
                for (o, &c) in self.outcomes.iter().zip(counts) {
                    *merged.entry(project(o)).or_insert(0) += c;
                }
                let (outcomes, counts) = merged.into_iter().unzip();
                Ok(JointDistribution {
                    variables,
                    outcomes,
                    weights: Weights::Exact {
                        counts,
                        total: *total,
                    },
                })
            }
            Weights::Real(probs) => {
                let mut merged: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
                for (o, &p) in self.outcomes.iter().zip(probs) {
                    *merged.entry(project(o)).or_insert(0.0) += p;
                }
                let (outcomes, probs) = merged.into_iter().unzip();
                Ok(JointDistribution {
                    variables,
                    outcomes,
                    weights: Weights::Real(probs),
                })
            }
        }
    }

    fn entropy_raw(&self, unit: Unit) -> f64 {
        let mut h = 0.0;
        for i in 0..self.len() {
            let p = self.probability_at(i);
            if p > 0.0 {
                h -= p * unit.log(p);
            }
        }
        // -0.0 for point masses
        h.max(0.0)
    }
}

/// Shannon entropy of the full joint, `-Σ p log p` with `0 log 0 = 0`.
pub fn entropy(d: &JointDistribution, unit: Unit) -> Result<f64> {
    Ok(d.entropy_raw(unit))
}

fn check_part(d: &JointDistribution, part: &[usize], what: &str) -> Result<()> {
    if part.is_empty() {
        return domain(format!("{what} must not be empty"));
    }
    for (k, &i) in part.iter().enumerate() {
        if i >= d.arity() {
            return domain(format!("{what} references variable {i} of {}", d.arity()));
        }
        if part[..k].contains(&i) {
            return domain(format!("{what} lists variable {i} twice"));
        }
    }
    Ok(())
}

fn check_disjoint(a: &[usize], b: &[usize]) -> Result<()> {
    if let Some(i) = a.iter().find(|i| b.contains(i)) {
        return domain(format!("variable {i} appears in both parts"));
    }
    Ok(())
}

/// `H(A | B) = -Σ_b p(b) Σ_a p(a|b) log p(a|b)`, evaluated directly from the conditionals.
pub fn conditional_entropy(
    d: &JointDistribution,
    part_a: &[usize],
    part_b: &[usize],
    unit: Unit,
) -> Result<f64> {
    check_part(d, part_a, "part A")?;
    check_part(d, part_b, "part B")?;
    check_disjoint(part_a, part_b)?;
    let mut both: Vec<usize> = part_b.to_vec();
    both.extend_from_slice(part_a);
    let joint = d.marginal(&both)?;
    let nb = part_b.len();
    // group the (b, a) joint by b; support is sorted so groups are contiguous
    let mut h = 0.0;
    let mut start = 0;
    let rows: Vec<(&[u32], f64)> = joint.iter().collect();
    while start < rows.len() {
        let key = &rows[start].0[..nb];
        let mut end = start;
        while end < rows.len() && &rows[end].0[..nb] == key {
            end += 1;
        }
        let pb: f64 = rows[start..end].iter().map(|(_, p)| p).sum();
        let mut inner = 0.0;
        for (_, p) in &rows[start..end] {
            let cond = p / pb;
            if cond > 0.0 {
                inner -= cond * unit.log(cond);
            }
        }
        h += pb * inner;
        start = end;
    }
    Ok(h.max(0.0))
}

/// `I(A:B) = H(A) + H(B) - H(A,B)` over the marginalized joint.
pub fn mutual_information(
    d: &JointDistribution,
    part_a: &[usize],
    part_b: &[usize],
    unit: Unit,
) -> Result<f64> {
    check_part(d, part_a, "part A")?;
    check_part(d, part_b, "part B")?;
    check_disjoint(part_a, part_b)?;
    // canonical operand order keeps I(A:B) and I(B:A) bit-identical
    let (part_a, part_b) = if part_a <= part_b {
        (part_a, part_b)
    } else {
        (part_b, part_a)
    };
    let mut both: Vec<usize> = part_a.to_vec();
    both.extend_from_slice(part_b);
    both.sort_unstable();
    let ha = d.marginal(part_a)?.entropy_raw(unit);
    let hb = d.marginal(part_b)?.entropy_raw(unit);
    let hab = d.marginal(&both)?.entropy_raw(unit);
    clamp_mi(ha + hb - hab)
}

pub(crate) fn clamp_mi(value: f64) -> Result<f64> {
    if value >= 0.0 {
        Ok(value)
    } else if value >= -NEGATIVE_MI_TOLERANCE {
        Ok(0.0)
    } else {
        Err(Error::Consistency(format!(
            "mutual information evaluated to {value:e}"
        )))
    }
}

/// Whole-minus-sum synergy `I(target : inputs) - Σ_i I(target : input_i)`.
pub fn wms_synergy(d: &JointDistribution, target: usize, inputs: &[usize], unit: Unit) -> Result<f64> {
    check_part(d, inputs, "inputs")?;
    check_disjoint(&[target], inputs)?;
    let whole = mutual_information(d, &[target], inputs, unit)?;
    let mut sum = 0.0;
    for &i in inputs {
        sum += mutual_information(d, &[target], &[i], unit)?;
    }
    Ok(whole - sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn vars(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("v{i}")).collect()
    }

    fn bits2(weights: [u64; 4]) -> JointDistribution {
        JointDistribution::from_counts(
            vars(2),
            [
                (vec![0, 0], weights[0]),
                (vec![0, 1], weights[1]),
                (vec![1, 0], weights[2]),
                (vec![1, 1], weights[3]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn entropy_examples() {
        let fair = JointDistribution::from_counts(vars(1), [(vec![0], 1), (vec![1], 1)]).unwrap();
        assert_eq!(entropy(&fair, Unit::Bits).unwrap(), 1.0);
        let point = JointDistribution::from_counts(vars(1), [(vec![1], 7)]).unwrap();
        assert_eq!(entropy(&point, Unit::Bits).unwrap(), 0.0);
        let biased = JointDistribution::from_counts(vars(1), [(vec![0], 3), (vec![1], 5)]).unwrap();
        assert!((entropy(&biased, Unit::Nats).unwrap() - 0.66156).abs() < 5e-6);
    }

    #[test]
    fn mi_examples() {
        let indep = bits2([1, 1, 1, 1]);
        assert_eq!(mutual_information(&indep, &[0], &[1], Unit::Bits).unwrap(), 0.0);
        let copy = bits2([1, 0, 0, 1]);
        assert_eq!(mutual_information(&copy, &[0], &[1], Unit::Bits).unwrap(), 1.0);
        // (output, centre) joint of rule 110 at t=1
        let r110 = bits2([2, 1, 2, 3]);
        let mi = mutual_information(&r110, &[0], &[1], Unit::Nats).unwrap();
        assert!((mi - 0.03382).abs() < 5e-6, "{mi}");
    }

    #[test]
    fn overlapping_parts_rejected() {
        let d = bits2([1, 1, 1, 1]);
        assert!(matches!(
            mutual_information(&d, &[0], &[0], Unit::Bits),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            mutual_information(&d, &[], &[1], Unit::Bits),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            wms_synergy(&d, 0, &[0, 1], Unit::Bits),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn synergy_examples() {
        // target = a XOR b
        let xor = JointDistribution::from_counts(
            vars(3),
            (0..4u32).map(|ab| {
                let (a, b) = (ab >> 1, ab & 1);
                (vec![a ^ b, a, b], 1)
            }),
        )
        .unwrap();
        assert_eq!(wms_synergy(&xor, 0, &[1, 2], Unit::Bits).unwrap(), 1.0);
        let copy = bits2([1, 0, 0, 1]);
        assert_eq!(wms_synergy(&copy, 0, &[1], Unit::Bits).unwrap(), 0.0);
    }

    #[test]
    fn invalid_distributions() {
        assert!(JointDistribution::from_counts(vars(1), [(vec![0], 0)]).is_err());
        assert!(JointDistribution::from_probabilities(vars(1), [(vec![0], 0.4), (vec![1], 0.4)]).is_err());
        assert!(JointDistribution::from_probabilities(vars(1), [(vec![0], -0.1), (vec![1], 1.1)]).is_err());
        assert!(JointDistribution::from_counts(vars(2), [(vec![0], 1)]).is_err());
    }

    #[test]
    fn clamp_behaviour() {
        assert_eq!(clamp_mi(-5e-13).unwrap(), 0.0);
        assert!(matches!(clamp_mi(-1e-9), Err(Error::Consistency(_))));
    }

    fn arb_joint() -> impl Strategy<Value = JointDistribution> {
        // three variables over small alphabets with random counts
        proptest::collection::vec(0u64..6, 12).prop_filter_map("needs mass", |counts| {
            let support = counts.iter().enumerate().map(|(i, &c)| {
                let i = i as u32;
                (vec![i % 2, (i / 2) % 2, i / 4], c)
            });
            JointDistribution::from_counts(vars(3), support).ok()
        })
    }

    proptest! {
        #[test]
        fn mi_symmetric(d in arb_joint()) {
            let ab = mutual_information(&d, &[0], &[1, 2], Unit::Bits).unwrap();
            let ba = mutual_information(&d, &[1, 2], &[0], Unit::Bits).unwrap();
            prop_assert_eq!(ab, ba);
        }

        #[test]
        fn chain_rule(d in arb_joint()) {
            let hab = entropy(&d.marginal(&[0, 1]).unwrap(), Unit::Bits).unwrap();
            let hb = entropy(&d.marginal(&[1]).unwrap(), Unit::Bits).unwrap();
            let h_a_given_b = conditional_entropy(&d, &[0], &[1], Unit::Bits).unwrap();
            prop_assert!((hab - (hb + h_a_given_b)).abs() < 1e-12);
        }

        #[test]
        fn mi_bounded_by_marginal_entropies(d in arb_joint()) {
            let mi = mutual_information(&d, &[0, 2], &[1], Unit::Bits).unwrap();
            let ha = entropy(&d.marginal(&[0, 2]).unwrap(), Unit::Bits).unwrap();
            let hb = entropy(&d.marginal(&[1]).unwrap(), Unit::Bits).unwrap();
            prop_assert!(mi >= 0.0);
            prop_assert!(mi <= ha.min(hb) + 1e-12);
        }

        #[test]
        fn unit_conversion(d in arb_joint()) {
            let ln2 = std::f64::consts::LN_2;
            let h = entropy(&d, Unit::Bits).unwrap();
            prop_assert!((entropy(&d, Unit::Nats).unwrap() - h * ln2).abs() < 1e-12);
            let mi = mutual_information(&d, &[0], &[1, 2], Unit::Bits).unwrap();
            prop_assert!((mutual_information(&d, &[0], &[1, 2], Unit::Nats).unwrap() - mi * ln2).abs() < 1e-12);
            let s = wms_synergy(&d, 0, &[1, 2], Unit::Bits).unwrap();
            prop_assert!((wms_synergy(&d, 0, &[1, 2], Unit::Nats).unwrap() - s * ln2).abs() < 1e-12);
        }

        #[test]
        fn exact_and_real_agree(d in arb_joint()) {
            let real = JointDistribution::from_probabilities(
                d.variables().to_vec(),
                d.iter().map(|(o, p)| (o.to_vec(), p)),
            ).unwrap();
            let a = mutual_information(&d, &[0], &[1], Unit::Bits).unwrap();
            let b = mutual_information(&real, &[0], &[1], Unit::Bits).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn deterministic_repeats() {
        let d = bits2([3, 1, 4, 1]);
        let a = mutual_information(&d, &[0], &[1], Unit::Bits).unwrap();
        for _ in 0..10 {
            assert_eq!(
                a.to_bits(),
                mutual_information(&d, &[0], &[1], Unit::Bits).unwrap().to_bits()
            );
        }
    }
}
