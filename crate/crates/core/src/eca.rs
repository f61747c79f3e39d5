//! Elementary cellular automata: rule tables, ring evolution and light cones.
//!
//! Bit conventions used throughout the crate:
//!
//! - A neighborhood `(left, center, right)` has code `4·left + 2·center + right`,
//!   and bit `code` of the Wolfram rule number is the rule's output for it.
//! - An initial window of `2t+1` cells is packed into an integer with the
//!   leftmost cell as the most significant bit. Masks over a window use the
//!   same packing, so the mask `0b010` of a 3-cell window selects the center.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::info::JointDistribution;

/// Largest light-cone depth supported; the table has `2^(2t+1)` entries.
pub const MAX_LIGHT_CONE_STEPS: usize = 12;

/// The 8-entry lookup table of an elementary CA rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RuleTable {
    number: u8,
    outputs: [u8; 8],
}

/// Decode a Wolfram rule number into its lookup table.
pub fn rule_table(n: u32) -> Result<RuleTable> {
    if n > 255 {
        return domain(format!("rule number {n} is outside 0..=255"));
    }
    Ok(RuleTable::from_number(n as u8))
}

impl RuleTable {
    pub fn from_number(number: u8) -> Self {
        let mut outputs = [0u8; 8];
        for (code, out) in outputs.iter_mut().enumerate() {
            *out = (number >> code) & 1;
        }
        RuleTable { number, outputs }
    }

    /// Build a rule from its outputs, indexed by neighborhood code.
    pub fn from_outputs(outputs: [u8; 8]) -> Result<Self> {
        let mut number = 0u8;
        for (code, &out) in outputs.iter().enumerate() {
            if out > 1 {
                return domain(format!("rule output {out} for neighborhood {code} is not a bit"));
            }
            number |= out << code;
        }
        Ok(RuleTable { number, outputs })
    }

    pub fn number(&self) -> u8 {
        self.number
    }

    pub fn outputs(&self) -> &[u8; 8] {
        &self.outputs
    }

    #[inline]
    pub fn apply(&self, left: u8, center: u8, right: u8) -> u8 {
        self.outputs[((left << 2) | (center << 1) | right) as usize]
    }

    #[inline]
    pub fn apply_code(&self, code: usize) -> u8 {
        self.outputs[code & 7]
    }

    /// Number of neighborhoods mapped to 1.
    pub fn ones(&self) -> u32 {
        self.number.count_ones()
    }

    /// Left-right reflection: the output for `(l, c, r)` becomes the old output for `(r, c, l)`.
    pub fn mirror(&self) -> RuleTable {
        let mut outputs = [0u8; 8];
        for (code, out) in outputs.iter_mut().enumerate() {
            *out = self.outputs[reverse_bits(code as u32, 3) as usize];
        }
        RuleTable::from_outputs(outputs).expect("mirrored outputs are bits")
    }

    /// 0/1 conjugation: complement both the inputs and the output.
    pub fn complement(&self) -> RuleTable {
        let mut outputs = [0u8; 8];
        for (code, out) in outputs.iter_mut().enumerate() {
            *out = 1 - self.outputs[7 - code];
        }
        RuleTable::from_outputs(outputs).expect("complemented outputs are bits")
    }

    /// Advance a packed ring state of `n` cells (cell `i` is bit `i`, its left
    /// neighbor is cell `i-1`) by one synchronous update.
    pub fn step_packed(&self, state: u64, n: usize) -> u64 {
        debug_assert!((3..=64).contains(&n));
        let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        let state = state & full;
        // bit i of `left` holds cell i-1, bit i of `right` holds cell i+1
        let left = ((state << 1) | (state >> (n - 1))) & full;
        let right = ((state >> 1) | (state << (n - 1))) & full;
        let mut next = 0u64;
        for code in 0..8 {
            if self.outputs[code] == 0 {
                continue;
            }
            let l = if code & 4 != 0 { left } else { !left };
            let c = if code & 2 != 0 { state } else { !state };
            let r = if code & 1 != 0 { right } else { !right };
            next |= l & c & r;
        }
        next & full
    }
}

impl fmt::Display for RuleTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "rule {}", self.number)
    }
}

pub(crate) fn reverse_bits(value: u32, width: usize) -> u32 {
    let mut out = 0;
    for b in 0..width {
        if value & (1 << b) != 0 {
            out |= 1 << (width - 1 - b);
        }
    }
    out
}

/// A finite periodic configuration of cells.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Configuration {
    cells: Vec<u8>,
}

impl Configuration {
    pub fn new(cells: Vec<u8>) -> Result<Self> {
        if cells.len() < 3 {
            return domain(format!("a ring needs at least 3 cells, got {}", cells.len()));
        }
        if let Some(bad) = cells.iter().find(|&&c| c > 1) {
            return domain(format!("cell state {bad} is not a bit"));
        }
        Ok(Configuration { cells })
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Configuration::new(vec![0; n])
    }

    /// Unpack a ring state where cell `i` is bit `i`.
    pub fn from_packed(state: u64, n: usize) -> Result<Self> {
        if n > 64 {
            return domain(format!("packed rings are limited to 64 cells, got {n}"));
        }
        Configuration::new((0..n).map(|i| ((state >> i) & 1) as u8).collect())
    }

    pub fn to_packed(&self) -> Option<u64> {
        if self.cells.len() > 64 {
            return None;
        }
        Some(
            self.cells
                .iter()
                .enumerate()
                .fold(0u64, |acc, (i, &c)| acc | (u64::from(c) << i)),
        )
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cells(&self) -> &[u8] {
        &self.cells
    }
}

impl FromStr for Configuration {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let cells = s
            .chars()
            .map(|ch| match ch {
                '0' => Ok(0),
                '1' => Ok(1),
                other => domain(format!("invalid cell character {other:?}")),
            })
            .collect::<Result<Vec<u8>>>()?;
        Configuration::new(cells)
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &c in &self.cells {
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// One synchronous update of a periodic ring.
pub fn step_ring(config: &Configuration, rule: &RuleTable) -> Configuration {
    let cells = &config.cells;
    let n = cells.len();
    let next = (0..n)
        .map(|i| rule.apply(cells[(i + n - 1) % n], cells[i], cells[(i + 1) % n]))
        .collect();
    Configuration { cells: next }
}

/// Center-cell state after `t` steps as a function of the `2t+1` initial cells.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LightConeMap {
    rule: u8,
    t: usize,
    table: Vec<u8>,
}

impl LightConeMap {
    pub fn rule(&self) -> u8 {
        self.rule
    }

    pub fn steps(&self) -> usize {
        self.t
    }

    /// Window width `2t+1`.
    pub fn width(&self) -> usize {
        2 * self.t + 1
    }

    pub fn table(&self) -> &[u8] {
        &self.table
    }

    #[inline]
    pub fn get(&self, window: usize) -> u8 {
        self.table[window]
    }

    /// Number of windows that map to 1.
    pub fn ones(&self) -> u64 {
        self.table.iter().map(|&b| u64::from(b)).sum()
    }

    /// Exact joint distribution of the center output and the masked initial cells.
    ///
    /// Variables are `"y"` followed by one variable per selected cell, left to
    /// right, labelled by their offset from the center (`"x-1"`, `"x+0"`, ...).
    pub fn joint(&self, mask: u32) -> Result<JointDistribution> {
        let width = self.width();
        if u64::from(mask) >= 1u64 << width {
            return domain(format!(
                "mask {mask:#b} references cells outside the {width}-cell light cone"
            ));
        }
        let positions: Vec<usize> = (0..width)
            .filter(|&p| mask & (1 << (width - 1 - p)) != 0)
            .collect();
        let mut variables = vec!["y".to_string()];
        variables.extend(
            positions
                .iter()
                .map(|&p| format!("x{:+}", p as i64 - self.t as i64)),
        );
        // counts indexed by (output, masked window bits)
        let mut counts = vec![[0u64; 2]; 1 << width];
        for (window, &out) in self.table.iter().enumerate() {
            counts[window & mask as usize][out as usize] += 1;
        }
        let mut support = Vec::new();
        for (masked, pair) in counts.iter().enumerate() {
            for (out, &count) in pair.iter().enumerate() {
                if count == 0 {
                    continue;
                }
                let mut outcome = Vec::with_capacity(positions.len() + 1);
                outcome.push(out as u32);
                outcome.extend(
                    positions
                        .iter()
                        .map(|&p| ((masked >> (width - 1 - p)) & 1) as u32),
                );
                support.push((outcome, count));
            }
        }
        JointDistribution::from_counts(variables, support)
    }
}

/// Apply the rule at every interior position of a `width`-cell window,
/// producing the `width-2`-cell window one step later.
#[inline]
fn shrink_window(rule: &RuleTable, window: usize, width: usize) -> usize {
    let mut out = 0usize;
    for shift in 0..width - 2 {
        out |= (rule.apply_code(window >> shift) as usize) << shift;
    }
    out
}

/// Compose the rule `t` times over the dependency cone of the center cell.
pub fn light_cone_map(rule: &RuleTable, t: usize) -> Result<LightConeMap> {
    if t == 0 {
        return domain("light cone depth must be at least 1");
    }
    if t > MAX_LIGHT_CONE_STEPS {
        return Err(Error::Resource(format!(
            "light cone depth {t} exceeds the supported maximum of {MAX_LIGHT_CONE_STEPS} \
             (table size 2^{})",
            2 * t + 1
        )));
    }
    let mut table: Vec<u8> = rule.outputs().to_vec();
    for depth in 2..=t {
        let width = 2 * depth + 1;
        let previous = &table;
        let next: Vec<u8> = if width >= 17 {
            (0..1usize << width)
                .into_par_iter()
                .map(|w| previous[shrink_window(rule, w, width)])
                .collect()
        } else {
            (0..1usize << width)
                .map(|w| previous[shrink_window(rule, w, width)])
                .collect()
        };
        table = next;
    }
    Ok(LightConeMap {
        rule: rule.number(),
        t,
        table,
    })
}

/// Exact joint distribution of `(X^t_center, masked X^0 cells)` from uniform i.i.d. initial cells.
pub fn joint_counts(rule: &RuleTable, t: usize, mask: u32) -> Result<JointDistribution> {
    light_cone_map(rule, t)?.joint(mask)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::info::{entropy, Unit};

    #[test]
    fn rule_110_lookup() {
        let r = rule_table(110).unwrap();
        assert_eq!(r.apply(1, 1, 0), 1);
        assert_eq!(r.apply(1, 1, 1), 0);
        assert_eq!(r.apply(0, 0, 0), 0);
        assert_eq!(r.apply(0, 0, 1), 1);
        // full table as printed for rule 110
        let expected = [0, 1, 1, 1, 0, 1, 1, 0];
        assert_eq!(r.outputs(), &expected);
    }

    #[test]
    fn rule_0_and_204() {
        assert_eq!(rule_table(0).unwrap().outputs(), &[0; 8]);
        let id = rule_table(204).unwrap();
        for code in 0..8usize {
            assert_eq!(id.apply_code(code), ((code >> 1) & 1) as u8);
        }
    }

    #[test]
    fn out_of_range_rule() {
        assert!(matches!(rule_table(256), Err(Error::Domain(_))));
    }

    #[test]
    fn number_roundtrip() {
        for n in 0..=255u32 {
            let r = rule_table(n).unwrap();
            let sum: u32 = r
                .outputs()
                .iter()
                .enumerate()
                .map(|(i, &b)| u32::from(b) << i)
                .sum();
            assert_eq!(sum, n);
            assert_eq!(RuleTable::from_outputs(*r.outputs()).unwrap(), r);
        }
    }

    #[test]
    fn mirror_and_complement_examples() {
        // 110 <-> 124 under reflection, 110 <-> 137 under conjugation
        assert_eq!(rule_table(110).unwrap().mirror().number(), 124);
        assert_eq!(rule_table(110).unwrap().complement().number(), 137);
        assert_eq!(rule_table(30).unwrap().mirror().number(), 86);
        assert_eq!(rule_table(90).unwrap().mirror().number(), 90);
    }

    #[test]
    fn step_examples() {
        let id = rule_table(204).unwrap();
        let c: Configuration = "0110100".parse().unwrap();
        assert_eq!(step_ring(&c, &id), c);

        let shift = rule_table(170).unwrap();
        let c: Configuration = "00010".parse().unwrap();
        assert_eq!(step_ring(&c, &shift).to_string(), "00100");

        let null = rule_table(0).unwrap();
        let c: Configuration = "10111".parse().unwrap();
        assert_eq!(step_ring(&c, &null).to_string(), "00000");
    }

    #[test]
    fn short_ring_rejected() {
        assert!(Configuration::new(vec![0, 1]).is_err());
        assert!("01".parse::<Configuration>().is_err());
    }

    #[test]
    fn packed_step_matches_ring_step() {
        for n in [3usize, 5, 8, 13] {
            for rule in [30u32, 54, 90, 110, 170, 184] {
                let r = rule_table(rule).unwrap();
                for state in (0..1u64 << n).step_by(7) {
                    let c = Configuration::from_packed(state, n).unwrap();
                    let stepped = step_ring(&c, &r).to_packed().unwrap();
                    assert_eq!(
                        r.step_packed(state, n),
                        stepped,
                        "rule {rule} n {n} state {state}"
                    );
                }
            }
        }
    }

    #[test]
    fn light_cone_examples() {
        let id = rule_table(204).unwrap();
        let m = light_cone_map(&id, 2).unwrap();
        for j in 0..32usize {
            assert_eq!(m.get(j), ((j >> 2) & 1) as u8);
        }
        let r110 = rule_table(110).unwrap();
        assert_eq!(light_cone_map(&r110, 1).unwrap().table(), &r110.outputs()[..]);
    }

    #[test]
    fn rule_90_two_steps_is_outer_xor() {
        // brute force: evolve each 5-cell window by hand
        let r90 = rule_table(90).unwrap();
        let m = light_cone_map(&r90, 2).unwrap();
        for j in 0..32usize {
            let bits: Vec<u8> = (0..5).map(|p| ((j >> (4 - p)) & 1) as u8).collect();
            let mid: Vec<u8> = (1..4).map(|i| bits[i - 1] ^ bits[i + 1]).collect();
            let center = mid[0] ^ mid[2];
            assert_eq!(m.get(j), center);
            assert_eq!(m.get(j), bits[0] ^ bits[4]);
        }
    }

    #[test]
    fn light_cone_bounds() {
        let r = rule_table(30).unwrap();
        assert!(matches!(light_cone_map(&r, 0), Err(Error::Domain(_))));
        assert!(matches!(
            light_cone_map(&r, MAX_LIGHT_CONE_STEPS + 1),
            Err(Error::Resource(_))
        ));
    }

    #[test]
    fn joint_examples() {
        let r105 = rule_table(105).unwrap();
        let d = joint_counts(&r105, 1, 0b111).unwrap();
        assert_eq!(d.len(), 8);
        for (outcome, p) in d.iter() {
            assert_eq!(p, 0.125);
            let parity = (outcome[1] + outcome[2] + outcome[3]) % 2;
            assert_eq!(outcome[0], 1 - parity);
        }

        let r0 = rule_table(0).unwrap();
        for mask in 0..8 {
            let d = joint_counts(&r0, 1, mask).unwrap();
            let y = d.marginal(&[0]).unwrap();
            assert_eq!(y.len(), 1);
            assert_eq!(entropy(&y, Unit::Bits).unwrap(), 0.0);
        }

        let r110 = rule_table(110).unwrap();
        let d = joint_counts(&r110, 1, 0b010).unwrap();
        let probs: Vec<(Vec<u32>, f64)> = d.iter().map(|(o, p)| (o.to_vec(), p)).collect();
        // (y, center): centre 0 -> ones 2/8, centre 1 -> ones 3/8
        assert_eq!(
            probs,
            vec![
                (vec![0, 0], 2.0 / 8.0),
                (vec![0, 1], 1.0 / 8.0),
                (vec![1, 0], 2.0 / 8.0),
                (vec![1, 1], 3.0 / 8.0),
            ]
        );
        let y = d.marginal(&[0]).unwrap();
        let py: Vec<f64> = y.iter().map(|(_, p)| p).collect();
        assert_eq!(py, vec![3.0 / 8.0, 5.0 / 8.0]);
    }

    #[test]
    fn mask_outside_window_rejected() {
        let r = rule_table(110).unwrap();
        assert!(matches!(joint_counts(&r, 1, 0b1000), Err(Error::Domain(_))));
    }
}
