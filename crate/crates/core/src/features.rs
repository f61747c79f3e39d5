//! Information features of ECA rules.
//!
//! A feature is either a mutual information `I(X^t : s)` between the center
//! cell at time `t` and a subset `s` of its initial light cone, or the
//! whole-minus-sum integration `I(X^t : s) - Σ_{x ∈ s} I(X^t : x)` of such a
//! subset. Features are named by kind letter and window mask, e.g. `I010`
//! (memory at t=1) or `t2:S11111`.

use std::collections::hash_map::Entry;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eca::{light_cone_map, LightConeMap, RuleTable};
use crate::error::{domain, Error, Result};
use crate::info::{mutual_information, wms_synergy, Unit};

/// Largest time step for which whole feature matrices are computed.
pub const MAX_FEATURE_STEPS: usize = 5;

/// Tolerance of the whole-minus-sum identity between S and I entries.
pub const WMS_IDENTITY_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FeatureKind {
    /// Mutual information with the masked cells.
    I,
    /// Whole-minus-sum integration of the masked cells.
    S,
}

impl FeatureKind {
    fn letter(self) -> char {
        match self {
            FeatureKind::I => 'I',
            FeatureKind::S => 'S',
        }
    }
}

/// One feature: kind, time step and a mask over the `2t'+1`-cell initial window.
///
/// Ordering is by time step, then kind (I before S), then mask, which matches
/// lexicographic order of the canonical names for `t' ≤ 9`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FeatureDescriptor {
    t_prime: usize,
    kind: FeatureKind,
    mask: u32,
}

impl FeatureDescriptor {
    pub fn new(kind: FeatureKind, t_prime: usize, mask: u32) -> Result<Self> {
        if t_prime == 0 {
            return domain("feature time step must be at least 1");
        }
        if t_prime > 15 {
            return domain(format!("feature time step {t_prime} is too large"));
        }
        let width = 2 * t_prime + 1;
        if u64::from(mask) >= 1u64 << width {
            return domain(format!("mask {mask:#b} does not fit a {width}-cell window"));
        }
        let size = mask.count_ones();
        match kind {
            FeatureKind::I if size < 1 => domain("an I feature needs at least one cell"),
            FeatureKind::S if size < 2 => domain("an S feature needs at least two cells"),
            _ => Ok(FeatureDescriptor { t_prime, kind, mask }),
        }
    }

    pub fn kind(&self) -> FeatureKind {
        self.kind
    }

    pub fn t_prime(&self) -> usize {
        self.t_prime
    }

    pub fn mask(&self) -> u32 {
        self.mask
    }

    pub fn width(&self) -> usize {
        2 * self.t_prime + 1
    }

    pub fn name(&self) -> String {
        self.to_string()
    }

    /// The same feature with its window reflected left to right.
    pub fn mirrored(&self) -> FeatureDescriptor {
        FeatureDescriptor {
            mask: crate::eca::reverse_bits(self.mask, self.width()),
            ..*self
        }
    }
}

impl fmt::Display for FeatureDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.t_prime > 1 {
            write!(f, "t{}:", self.t_prime)?;
        }
        write!(
            f,
            "{}{:0width$b}",
            self.kind.letter(),
            self.mask,
            width = self.width()
        )
    }
}

impl FromStr for FeatureDescriptor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (t_prime, rest) = match s.strip_prefix('t') {
            Some(tail) => {
                let (t, rest) = tail
                    .split_once(':')
                    .ok_or_else(|| Error::Domain(format!("malformed feature name {s:?}")))?;
                let t: usize = t
                    .parse()
                    .map_err(|_| Error::Domain(format!("malformed time step in {s:?}")))?;
                if t < 2 {
                    return domain(format!("time prefix is only written for t > 1: {s:?}"));
                }
                (t, rest)
            }
            None => (1, s),
        };
        let mut chars = rest.chars();
        let kind = match chars.next() {
            Some('I') => FeatureKind::I,
            Some('S') => FeatureKind::S,
            _ => return domain(format!("feature name {s:?} must start with I or S")),
        };
        let bits = chars.as_str();
        if bits.len() != 2 * t_prime + 1 || !bits.chars().all(|c| c == '0' || c == '1') {
            return domain(format!("feature name {s:?} needs a {}-bit mask", 2 * t_prime + 1));
        }
        let mask = u32::from_str_radix(bits, 2).expect("validated binary digits");
        FeatureDescriptor::new(kind, t_prime, mask)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnumerationMode {
    /// Features of time step `t` only.
    #[default]
    PerStep,
    /// Features of all time steps `1..=t`.
    Cumulative,
}

impl FromStr for EnumerationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "per-step" => Ok(EnumerationMode::PerStep),
            "cumulative" => Ok(EnumerationMode::Cumulative),
            other => domain(format!("unknown enumeration mode {other:?}")),
        }
    }
}

fn descriptors_at(t_prime: usize) -> Vec<FeatureDescriptor> {
    let width = 2 * t_prime + 1;
    let masks = 1u32..(1u32 << width);
    let mut out: Vec<FeatureDescriptor> = masks
        .clone()
        .map(|m| FeatureDescriptor {
            t_prime,
            kind: FeatureKind::I,
            mask: m,
        })
        .collect();
    out.extend(masks.filter(|m| m.count_ones() >= 2).map(|m| FeatureDescriptor {
        t_prime,
        kind: FeatureKind::S,
        mask: m,
    }));
    out
}

/// All feature descriptors for step `t`, in canonical order.
pub fn enumerate_descriptors(t: usize, mode: EnumerationMode) -> Result<Vec<FeatureDescriptor>> {
    if t == 0 {
        return domain("time step must be at least 1");
    }
    if t > 15 {
        return domain(format!("time step {t} is too large to enumerate"));
    }
    Ok(match mode {
        EnumerationMode::PerStep => descriptors_at(t),
        EnumerationMode::Cumulative => (1..=t).flat_map(descriptors_at).collect(),
    })
}

/// Mutual information (bits) of the center output with every window mask,
/// indexed by mask; entry 0 is the empty set.
fn mi_by_mask(cone: &LightConeMap) -> Vec<f64> {
    let width = cone.width();
    let windows = 1usize << width;
    let total = windows as f64;
    let plogp = |c: u64| {
        if c == 0 {
            0.0
        } else {
            let p = c as f64 / total;
            -p * p.log2()
        }
    };
    let ones = cone.ones();
    let h_out = plogp(ones) + plogp(windows as u64 - ones);
    let mut out = vec![0.0; windows];
    let mut ones_by_group = vec![0u64; windows];
    for mask in 1..windows {
        ones_by_group.iter_mut().for_each(|c| *c = 0);
        for (w, &b) in cone.table().iter().enumerate() {
            ones_by_group[w & mask] += u64::from(b);
        }
        // every group of `w & mask` holds 2^(width - |mask|) windows
        let group_size = 1u64 << (width - mask.count_ones() as usize);
        let mut h_joint = 0.0;
        let mut h_in = 0.0;
        for g in (0..windows).filter(|g| g & !mask == 0) {
            let n1 = ones_by_group[g];
            h_joint += plogp(n1) + plogp(group_size - n1);
            h_in += plogp(group_size);
        }
        let mi = h_out + h_in - h_joint;
        // exactly independent groups leave sub-ulp residue
        out[mask] = if mi.abs() < 1e-14 { 0.0 } else { mi.max(0.0) };
    }
    out
}

fn singles(mask: u32) -> impl Iterator<Item = u32> {
    (0..32).map(|b| 1u32 << b).filter(move |bit| mask & bit != 0)
}

/// Value of one feature, in bits, through the generic joint-distribution route.
pub fn compute_feature(rule: u8, descriptor: &FeatureDescriptor) -> Result<f64> {
    let rule = RuleTable::from_number(rule);
    let cone = light_cone_map(&rule, descriptor.t_prime)?;
    let joint = cone.joint(descriptor.mask)?;
    let inputs: Vec<usize> = (1..joint.arity()).collect();
    match descriptor.kind {
        FeatureKind::I => mutual_information(&joint, &[0], &inputs, Unit::Bits),
        FeatureKind::S => wms_synergy(&joint, 0, &inputs, Unit::Bits),
    }
}

/// Feature values of one rule, keyed by descriptor.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureVector {
    rule: u8,
    entries: BTreeMap<FeatureDescriptor, f64>,
}

impl FeatureVector {
    pub fn rule(&self) -> u8 {
        self.rule
    }

    pub fn get(&self, d: &FeatureDescriptor) -> Option<f64> {
        self.entries.get(d).copied()
    }

    /// Look up a feature by canonical name.
    pub fn value(&self, name: &str) -> Result<f64> {
        let d: FeatureDescriptor = name.parse()?;
        self.get(&d)
            .ok_or_else(|| Error::Domain(format!("feature {name} is not part of this vector")))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&FeatureDescriptor, f64)> + '_ {
        self.entries.iter().map(|(d, &v)| (d, v))
    }

    pub fn values(&self) -> Vec<f64> {
        self.entries.values().copied().collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub(crate) fn from_entries(rule: u8, entries: BTreeMap<FeatureDescriptor, f64>) -> Self {
        FeatureVector { rule, entries }
    }
}

/// Features of `rule` for the given descriptors, computed from the exact
/// light-cone counts (one cone per time step).
pub fn feature_vector(rule: u8, descriptors: &[FeatureDescriptor]) -> Result<FeatureVector> {
    let table = RuleTable::from_number(rule);
    let mut by_step: HashMap<usize, Vec<f64>> = HashMap::new();
    let mut entries = BTreeMap::new();
    for d in descriptors {
        if d.t_prime > MAX_FEATURE_STEPS {
            return Err(Error::Resource(format!(
                "feature step {} exceeds the batch bound of {MAX_FEATURE_STEPS}",
                d.t_prime
            )));
        }
        let mi = match by_step.entry(d.t_prime) {
            Entry::Occupied(e) => e.into_mut(),
            Entry::Vacant(e) => e.insert(mi_by_mask(&light_cone_map(&table, d.t_prime)?)),
        };
        let value = match d.kind {
            FeatureKind::I => mi[d.mask as usize],
            FeatureKind::S => mi[d.mask as usize] - singles(d.mask).map(|b| mi[b as usize]).sum::<f64>(),
        };
        entries.insert(*d, value);
    }
    Ok(FeatureVector { rule, entries })
}

/// The 256 × D matrix of feature values (bits), rows ordered by rule number.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMatrix {
    descriptors: Vec<FeatureDescriptor>,
    rows: Vec<Vec<f64>>,
}

impl FeatureMatrix {
    pub fn descriptors(&self) -> &[FeatureDescriptor] {
        &self.descriptors
    }

    pub fn names(&self) -> Vec<String> {
        self.descriptors.iter().map(|d| d.name()).collect()
    }

    pub fn row(&self, rule: u8) -> &[f64] {
        &self.rows[rule as usize]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// Values of one feature across all 256 rules.
    pub fn column(&self, index: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[index]).collect()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        let d: FeatureDescriptor = name.parse().ok()?;
        self.descriptors.iter().position(|x| *x == d)
    }

    pub fn width(&self) -> usize {
        self.descriptors.len()
    }

    /// CSV with header `rule,<names>` and values at 12 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("rule");
        for d in &self.descriptors {
            out.push(',');
            out.push_str(&d.name());
        }
        out.push('\n');
        for (rule, row) in self.rows.iter().enumerate() {
            out.push_str(&rule.to_string());
            for v in row {
                out.push(',');
                out.push_str(&crate::numfmt::format_significant(*v, 12));
            }
            out.push('\n');
        }
        out
    }
}

pub fn feature_matrix(t: usize, mode: EnumerationMode) -> Result<FeatureMatrix> {
    if t > MAX_FEATURE_STEPS {
        return Err(Error::Resource(format!(
            "feature matrices are limited to t ≤ {MAX_FEATURE_STEPS}, got {t}"
        )));
    }
    let descriptors = enumerate_descriptors(t, mode)?;
    let rows = (0..=255u8)
        .into_par_iter()
        .map(|r| feature_vector(r, &descriptors).map(|v| v.values()))
        .collect::<Result<Vec<_>>>()?;
    Ok(FeatureMatrix { descriptors, rows })
}

/// Memory, transfer and integration of one rule at one time step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryTriple {
    pub memory: f64,
    pub transfer: f64,
    pub integration: f64,
}

/// Memory is the center-cell I, transfer sums the I of every other single
/// cell of the window (the two neighbors at t=1), and integration is S over
/// the whole window.
pub fn summary_triple(rule: u8, t_prime: usize) -> Result<SummaryTriple> {
    if t_prime == 0 {
        return domain("time step must be at least 1");
    }
    let width = 2 * t_prime + 1;
    let center = 1u32 << t_prime;
    let full = (1u32 << width) - 1;
    let mut descriptors = vec![
        FeatureDescriptor::new(FeatureKind::I, t_prime, center)?,
        FeatureDescriptor::new(FeatureKind::S, t_prime, full)?,
    ];
    let others: Vec<FeatureDescriptor> = (0..width)
        .map(|b| 1u32 << b)
        .filter(|&m| m != center)
        .map(|m| FeatureDescriptor::new(FeatureKind::I, t_prime, m))
        .collect::<Result<_>>()?;
    descriptors.extend(&others);
    let v = feature_vector(rule, &descriptors)?;
    Ok(SummaryTriple {
        memory: v.get(&descriptors[0]).unwrap_or_default(),
        transfer: others.iter().filter_map(|d| v.get(d)).sum(),
        integration: v.get(&descriptors[1]).unwrap_or_default(),
    })
}

impl SummaryTriple {
    /// Summary of a one-step feature vector (window of three cells).
    pub fn from_one_step(v: &FeatureVector) -> Result<SummaryTriple> {
        Ok(SummaryTriple {
            memory: v.value("I010")?,
            transfer: v.value("I100")? + v.value("I001")?,
            integration: v.value("S111")?,
        })
    }

    pub fn to_vec(&self) -> Vec<f64> {
        vec![self.memory, self.transfer, self.integration]
    }
}

/// Summary triples for steps `1..=t`, concatenated.
pub fn summary_vector(rule: u8, t: usize) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(3 * t);
    for tp in 1..=t {
        out.extend(summary_triple(rule, tp)?.to_vec());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn desc(name: &str) -> FeatureDescriptor {
        name.parse().unwrap()
    }

    #[test]
    fn descriptor_counts() {
        let t1 = enumerate_descriptors(1, EnumerationMode::PerStep).unwrap();
        assert_eq!(t1.len(), 11);
        assert_eq!(t1.iter().filter(|d| d.kind == FeatureKind::I).count(), 7);
        let t2 = enumerate_descriptors(2, EnumerationMode::PerStep).unwrap();
        assert_eq!(t2.len(), 57);
        assert_eq!(t2.iter().filter(|d| d.kind == FeatureKind::S).count(), 26);
        // independent count: non-empty subsets plus subsets of size ≥ 2
        let t3 = enumerate_descriptors(3, EnumerationMode::PerStep).unwrap();
        let brute = (1u32..128).filter(|m| m.count_ones() >= 1).count()
            + (1u32..128).filter(|m| m.count_ones() >= 2).count();
        assert_eq!(t3.len(), brute);
        assert_eq!(t3.len(), 247);
        let cum = enumerate_descriptors(2, EnumerationMode::Cumulative).unwrap();
        assert_eq!(cum.len(), 68);
        assert!(enumerate_descriptors(0, EnumerationMode::PerStep).is_err());
    }

    #[test]
    fn descriptor_order_matches_names() {
        let cum = enumerate_descriptors(3, EnumerationMode::Cumulative).unwrap();
        let names: Vec<String> = cum.iter().map(|d| d.name()).collect();
        let mut sorted = names.clone();
        sorted.sort();
        assert_eq!(names, sorted);
        let mut by_ord = cum.clone();
        by_ord.sort();
        assert_eq!(by_ord, cum);
    }

    #[test]
    fn names_roundtrip() {
        for d in enumerate_descriptors(3, EnumerationMode::Cumulative).unwrap() {
            assert_eq!(d.name().parse::<FeatureDescriptor>().unwrap(), d);
        }
        assert_eq!(desc("S111").name(), "S111");
        assert_eq!(desc("t2:I10101").mask(), 0b10101);
        assert!("S010".parse::<FeatureDescriptor>().is_err());
        assert!("I000".parse::<FeatureDescriptor>().is_err());
        assert!("I01".parse::<FeatureDescriptor>().is_err());
        assert!("t1:I010".parse::<FeatureDescriptor>().is_err());
        assert!("X010".parse::<FeatureDescriptor>().is_err());
    }

    #[test]
    fn feature_examples() {
        assert_eq!(compute_feature(105, &desc("S111")).unwrap(), 1.0);
        assert_eq!(compute_feature(105, &desc("I100")).unwrap(), 0.0);
        assert_eq!(compute_feature(204, &desc("I010")).unwrap(), 1.0);
        assert_eq!(compute_feature(204, &desc("I100")).unwrap(), 0.0);
    }

    #[test]
    fn fast_route_matches_generic_route() {
        for t in 1..=2 {
            let descriptors = enumerate_descriptors(t, EnumerationMode::PerStep).unwrap();
            for rule in [0u8, 18, 30, 54, 60, 105, 110, 184, 232] {
                let v = feature_vector(rule, &descriptors).unwrap();
                for d in &descriptors {
                    let generic = compute_feature(rule, d).unwrap();
                    let fast = v.get(d).unwrap();
                    assert!(
                        (generic - fast).abs() < 1e-12,
                        "rule {rule} {d}: {generic} vs {fast}"
                    );
                }
            }
        }
    }

    #[test]
    fn matrix_shape_and_examples() {
        let m = feature_matrix(1, EnumerationMode::PerStep).unwrap();
        assert_eq!(m.rows().len(), 256);
        assert_eq!(m.width(), 11);
        assert!(m.row(0).iter().all(|&v| v == 0.0));
        // the additive rules differ cell-by-cell but not in summary
        assert_ne!(m.row(90), m.row(60));
        for t in 1..=3 {
            let base = summary_vector(60, t).unwrap();
            assert_eq!(base.len(), 3 * t);
            for r in [90u8, 105, 150] {
                assert_eq!(summary_vector(r, t).unwrap(), base);
            }
        }
        let csv = m.to_csv();
        assert!(csv.starts_with("rule,I001,I010,I011,I100,I101,I110,I111,S011,S101,S110,S111\n"));
        assert_eq!(csv.lines().count(), 257);
    }

    #[test]
    fn summary_examples() {
        let s = summary_triple(204, 1).unwrap();
        assert_eq!((s.memory, s.transfer, s.integration), (1.0, 0.0, 0.0));
        let s = summary_triple(105, 1).unwrap();
        assert_eq!((s.memory, s.transfer, s.integration), (0.0, 0.0, 1.0));
        let s = summary_triple(170, 1).unwrap();
        assert_eq!((s.memory, s.transfer, s.integration), (0.0, 1.0, 0.0));
    }

    #[test]
    fn locality_outside_cone_is_zero() {
        // embed the t=1 cone in a 5-cell window: outer cells never matter
        use crate::info::JointDistribution;
        for rule in [30u8, 110, 150] {
            let cone = light_cone_map(&RuleTable::from_number(rule), 1).unwrap();
            for outer in [0b10000u32, 0b00001, 0b10001] {
                let support = (0..32usize).map(|w| {
                    let y = cone.get((w >> 1) & 7) as u32;
                    (vec![y, (w & outer as usize) as u32], 1u64)
                });
                let joint = JointDistribution::from_counts(vec!["y".into(), "s".into()], support).unwrap();
                assert!(mutual_information(&joint, &[0], &[1], Unit::Bits).unwrap() < 1e-15);
            }
        }
    }
}
