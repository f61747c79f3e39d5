//! Attractor ensembles of finite rings and one-step-delay features.
//!
//! A ring of `N` cells is packed into a `u64` (cell `i` is bit `i`). Starting
//! from the uniform distribution over all `2^N` states, every state's mass
//! ends up spread evenly over the cycle its trajectory falls into; the result
//! is the stationary (attractor) ensemble.

use std::collections::{BTreeMap, HashMap};

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::eca::RuleTable;
use crate::error::{domain, Error, Result};
use crate::features::{enumerate_descriptors, EnumerationMode, FeatureKind, FeatureVector};
use crate::info::{mutual_information, wms_synergy, JointDistribution, Unit};
use crate::lambda::ClosedFormFeatures;
use crate::numfmt::format_significant;

pub const MAX_EXACT_RING: usize = 20;
pub const MIN_RING: usize = 3;
pub const MIN_MONTE_CARLO_SAMPLES: usize = 10_000;

/// Samples per independently seeded Monte-Carlo block.
const BLOCK: usize = 1024;

fn ring_mask(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// Stationary distribution over ring states.
#[derive(Clone, Debug, PartialEq)]
pub struct AttractorEnsemble {
    rule: RuleTable,
    n: usize,
    states: BTreeMap<u64, Ratio<u64>>,
}

impl AttractorEnsemble {
    pub fn rule(&self) -> &RuleTable {
        &self.rule
    }

    pub fn ring_size(&self) -> usize {
        self.n
    }

    pub fn states(&self) -> &BTreeMap<u64, Ratio<u64>> {
        &self.states
    }

    pub fn mass(&self, state: u64) -> Ratio<u64> {
        self.states
            .get(&state)
            .copied()
            .unwrap_or_else(|| Ratio::from_integer(0))
    }

    pub fn total_mass(&self) -> f64 {
        self.states
            .values()
            .map(|m| *m.numer() as f64 / *m.denom() as f64)
            .sum()
    }

    /// The ensemble pushed through one synchronous update.
    pub fn step(&self) -> AttractorEnsemble {
        let mut states = BTreeMap::new();
        for (&s, &m) in &self.states {
            let next = self.rule.step_packed(s, self.n);
            let slot = states.entry(next).or_insert_with(|| Ratio::from_integer(0));
            *slot += m;
        }
        AttractorEnsemble {
            rule: self.rule,
            n: self.n,
            states,
        }
    }

    /// Per-pattern probabilities of `(next_i, left, center, right)` at cell `i`,
    /// indexed `8 * next + 4 * left + 2 * center + right`.
    fn patterns_at(&self, cell: usize) -> [f64; 16] {
        let n = self.n;
        let mut w = [0.0f64; 16];
        let left_bit = (cell + n - 1) % n;
        let right_bit = (cell + 1) % n;
        for (&s, m) in &self.states {
            let code = (((s >> left_bit) & 1) << 2) | (((s >> cell) & 1) << 1) | ((s >> right_bit) & 1);
            let y = self.rule.apply_code(code as usize) as u64;
            w[(y * 8 + code) as usize] += *m.numer() as f64 / *m.denom() as f64;
        }
        let total: f64 = w.iter().sum();
        w.iter_mut().for_each(|x| *x /= total);
        w
    }
}

/// Exact ensemble by following every initial state to its cycle.
///
/// The state graph is a functional graph, so a single pass with a
/// per-walk stamp array finds every cycle and every basin size.
pub fn attractor_ensemble(rule: &RuleTable, n: usize) -> Result<AttractorEnsemble> {
    if !(MIN_RING..=MAX_EXACT_RING).contains(&n) {
        return Err(Error::Resource(format!(
            "exact attractor enumeration supports {MIN_RING} ≤ N ≤ {MAX_EXACT_RING}, got {n}"
        )));
    }
    let size = 1usize << n;
    const UNSEEN: u32 = u32::MAX;
    // cycle index per state once resolved; walk stamp while on the current path
    let mut cycle_of = vec![UNSEEN; size];
    let mut stamp = vec![UNSEEN; size];
    let mut cycles: Vec<Vec<u64>> = Vec::new();
    let mut basin: Vec<u64> = Vec::new();
    let mut path: Vec<u64> = Vec::new();
    for start in 0..size {
        if cycle_of[start] != UNSEEN {
            continue;
        }
        path.clear();
        let mut s = start as u64;
        let walk = start as u32;
        let cycle = loop {
            let si = s as usize;
            if cycle_of[si] != UNSEEN {
                break cycle_of[si];
            }
            if stamp[si] == walk {
                let pos = path
                    .iter()
                    .position(|&p| p == s)
                    .expect("stamped state is on the path");
                let id = cycles.len() as u32;
                cycles.push(path[pos..].to_vec());
                basin.push(0);
                break id;
            }
            stamp[si] = walk;
            path.push(s);
            s = rule.step_packed(s, n);
        };
        for &p in &path {
            cycle_of[p as usize] = cycle;
        }
        basin[cycle as usize] += path.len() as u64;
    }
    let mut states = BTreeMap::new();
    for (cycle, &b) in cycles.iter().zip(&basin) {
        let mass = Ratio::new(b, size as u64 * cycle.len() as u64);
        for &s in cycle {
            states.insert(s, mass);
        }
    }
    Ok(AttractorEnsemble {
        rule: *rule,
        n,
        states,
    })
}

/// Ensemble estimated from `samples` random initial states, for rings up to 64 cells.
pub fn sampled_attractor_ensemble(
    rule: &RuleTable,
    n: usize,
    samples: usize,
    seed: u64,
    max_steps: usize,
) -> Result<AttractorEnsemble> {
    if !(MIN_RING..=64).contains(&n) {
        return domain(format!("ring size {n} outside {MIN_RING}..=64"));
    }
    if samples == 0 {
        return domain("at least one sample is required");
    }
    let total = samples as u64;
    let blocks = samples.div_ceil(BLOCK);
    let per_block = (0..blocks)
        .into_par_iter()
        .map(|b| -> Result<Vec<Vec<u64>>> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b as u64);
            let count = BLOCK.min(samples - b * BLOCK);
            let mut out = Vec::with_capacity(count);
            for _ in 0..count {
                let mut s = rng.random::<u64>() & ring_mask(n);
                let mut seen: HashMap<u64, usize> = HashMap::new();
                let mut path = Vec::new();
                loop {
                    if let Some(&pos) = seen.get(&s) {
                        out.push(path[pos..].to_vec());
                        break;
                    }
                    if path.len() >= max_steps {
                        return Err(Error::Resource(format!(
                            "no cycle found within {max_steps} steps"
                        )));
                    }
                    seen.insert(s, path.len());
                    path.push(s);
                    s = rule.step_packed(s, n);
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    // hits per cycle, keyed by the cycle's smallest state
    let mut hits: BTreeMap<u64, (Vec<u64>, u64)> = BTreeMap::new();
    for cycle in per_block.into_iter().flatten() {
        let key = *cycle.iter().min().expect("cycles are non-empty");
        hits.entry(key).or_insert_with(|| (cycle, 0)).1 += 1;
    }
    let mut states = BTreeMap::new();
    for (cycle, h) in hits.into_values() {
        let mass = Ratio::new(h, total * cycle.len() as u64);
        for s in cycle {
            states.insert(s, mass);
        }
    }
    Ok(AttractorEnsemble {
        rule: *rule,
        n,
        states,
    })
}

fn pattern_variables() -> Vec<String> {
    ["y", "x-1", "x+0", "x+1"].iter().map(|s| s.to_string()).collect()
}

/// Input indices (into the pattern variables) selected by a window mask.
fn inputs_of(mask: u32) -> Vec<usize> {
    [(0b100, 1), (0b010, 2), (0b001, 3)]
        .iter()
        .filter(|(bit, _)| mask & bit != 0)
        .map(|&(_, idx)| idx)
        .collect()
}

/// The 11 one-step features (bits) of a `(next, left, center, right)` joint.
fn one_step_features(rule: u8, joint: &JointDistribution) -> Result<FeatureVector> {
    let mut entries = BTreeMap::new();
    for d in enumerate_descriptors(1, EnumerationMode::PerStep)? {
        let inputs = inputs_of(d.mask());
        let v = match d.kind() {
            FeatureKind::I => mutual_information(joint, &[0], &inputs, Unit::Bits)?,
            FeatureKind::S => wms_synergy(joint, 0, &inputs, Unit::Bits)?,
        };
        entries.insert(d, v);
    }
    Ok(FeatureVector::from_entries(rule, entries))
}

fn pattern_joint(weights: &[f64; 16]) -> Result<JointDistribution> {
    JointDistribution::from_probabilities(
        pattern_variables(),
        (0..16u32).map(|k| {
            (
                vec![k >> 3, (k >> 2) & 1, (k >> 1) & 1, k & 1],
                weights[k as usize],
            )
        }),
    )
}

/// One-step-delay features of cell `cell` under the ensemble.
pub fn stationary_features_at(ensemble: &AttractorEnsemble, cell: usize) -> Result<FeatureVector> {
    if cell >= ensemble.n {
        return domain(format!("cell {cell} outside ring of {}", ensemble.n));
    }
    one_step_features(
        ensemble.rule.number(),
        &pattern_joint(&ensemble.patterns_at(cell))?,
    )
}

/// One-step-delay features averaged over all cells of the ring.
pub fn stationary_features(ensemble: &AttractorEnsemble) -> Result<FeatureVector> {
    let per_cell = (0..ensemble.n)
        .map(|i| stationary_features_at(ensemble, i))
        .collect::<Result<Vec<_>>>()?;
    let mut entries = BTreeMap::new();
    for (d, _) in per_cell[0].iter() {
        let mean = per_cell
            .iter()
            .map(|v| v.get(d).expect("same descriptors"))
            .sum::<f64>()
            / ensemble.n as f64;
        entries.insert(*d, mean);
    }
    Ok(FeatureVector::from_entries(ensemble.rule.number(), entries))
}

/// Counts of `(next, left, center, right)` over all cells of one transition.
fn add_pattern_counts(rule: &RuleTable, state: u64, next: u64, n: usize, counts: &mut [u64; 16]) {
    let full = ring_mask(n);
    let left = ((state << 1) | (state >> (n - 1))) & full;
    let right = ((state >> 1) | (state << (n - 1))) & full;
    for code in 0..8 {
        let l = if code & 4 != 0 { left } else { !left };
        let c = if code & 2 != 0 { state } else { !state };
        let r = if code & 1 != 0 { right } else { !right };
        let cells = l & c & r & full;
        if cells == 0 {
            continue;
        }
        debug_assert_eq!((cells & next) == cells, rule.apply_code(code) == 1);
        counts[8 + code] += u64::from((cells & next).count_ones());
        counts[code] += u64::from((cells & !next).count_ones());
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransientStep {
    pub step: usize,
    /// Quantities in nats.
    pub features: ClosedFormFeatures,
}

fn quantities(counts: &[u64; 16]) -> Result<ClosedFormFeatures> {
    let joint = JointDistribution::from_counts(
        pattern_variables(),
        (0..16u32).map(|k| {
            (
                vec![k >> 3, (k >> 2) & 1, (k >> 1) & 1, k & 1],
                counts[k as usize],
            )
        }),
    )?;
    Ok(ClosedFormFeatures {
        i_tot: mutual_information(&joint, &[0], &[1, 2, 3], Unit::Nats)?,
        i_mem: mutual_information(&joint, &[0], &[2], Unit::Nats)?,
        i_trans_left: mutual_information(&joint, &[0], &[1], Unit::Nats)?,
        i_trans_right: mutual_information(&joint, &[0], &[3], Unit::Nats)?,
    })
}

/// Whether [`transient_features`] will enumerate every initial state.
pub fn transient_is_exhaustive(n: usize, samples: usize) -> bool {
    n < 64 && (1u128 << n) <= samples as u128
}

/// One-step-delay quantities at steps `1..=t_max` from i.i.d. uniform
/// initial states. Step `t` relates the states at `t-1` and `t`; counts are
/// pooled over all cells of the ring.
///
/// Every initial state is enumerated when `2^N ≤ samples`; otherwise
/// `samples` states are drawn, in blocks seeded from `seed` by stream.
pub fn transient_features(
    rule: &RuleTable,
    n: usize,
    t_max: usize,
    samples: usize,
    seed: u64,
) -> Result<Vec<TransientStep>> {
    if !(MIN_RING..=64).contains(&n) {
        return domain(format!("ring size {n} outside {MIN_RING}..=64"));
    }
    if t_max == 0 {
        return domain("t_max must be at least 1");
    }
    let exhaustive = transient_is_exhaustive(n, samples);
    if !exhaustive && samples < MIN_MONTE_CARLO_SAMPLES {
        return domain(format!(
            "Monte-Carlo estimation needs at least {MIN_MONTE_CARLO_SAMPLES} samples, got {samples}"
        ));
    }
    let run = |states: &mut dyn Iterator<Item = u64>| {
        let mut counts = vec![[0u64; 16]; t_max];
        for mut s in states {
            for c in counts.iter_mut() {
                let next = rule.step_packed(s, n);
                add_pattern_counts(rule, s, next, n, c);
                s = next;
            }
        }
        counts
    };
    let (total_states, block_count) = if exhaustive {
        let total = 1usize << n;
        (total, total.div_ceil(BLOCK))
    } else {
        (samples, samples.div_ceil(BLOCK))
    };
    let blocks: Vec<Vec<[u64; 16]>> = (0..block_count)
        .into_par_iter()
        .map(|b| {
            let lo = b * BLOCK;
            let hi = (lo + BLOCK).min(total_states);
            if exhaustive {
                run(&mut (lo as u64..hi as u64))
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(b as u64);
                let full = ring_mask(n);
                run(&mut (lo..hi).map(move |_| rng.random::<u64>() & full))
            }
        })
        .collect();
    let mut totals = vec![[0u64; 16]; t_max];
    for block in blocks {
        for (t, c) in totals.iter_mut().zip(block) {
            for (a, b) in t.iter_mut().zip(c) {
                *a += b;
            }
        }
    }
    totals
        .iter()
        .enumerate()
        .map(|(i, c)| {
            Ok(TransientStep {
                step: i + 1,
                features: quantities(c)?,
            })
        })
        .collect()
}

pub fn transient_csv(steps: &[TransientStep]) -> String {
    let mut out = String::from("step,i_tot,i_mem,i_trans_l,i_trans_r\n");
    for s in steps {
        let f = &s.features;
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            s.step,
            format_significant(f.i_tot, 12),
            format_significant(f.i_mem, 12),
            format_significant(f.i_trans_left, 12),
            format_significant(f.i_trans_right, 12),
        ));
    }
    out
}

/// Least-squares slope of `values` against their index.
pub fn trend_slope(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    if values.len() < 2 {
        return 0.0;
    }
    let mean_x = (n - 1.0) / 2.0;
    let mean_y = values.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (i, &y) in values.iter().enumerate() {
        let dx = i as f64 - mean_x;
        sxy += dx * (y - mean_y);
        sxx += dx * dx;
    }
    sxy / sxx
}

pub const TREND_WINDOW: usize = 10;
pub const TREND_TOLERANCE: f64 = 1e-4;

/// No changing trend: the slope over the last [`TREND_WINDOW`] values is
/// below [`TREND_TOLERANCE`] per step in magnitude.
pub fn has_settled(values: &[f64]) -> bool {
    values.len() >= TREND_WINDOW
        && trend_slope(&values[values.len() - TREND_WINDOW..]).abs() < TREND_TOLERANCE
}
