//! Predicting the Wolfram class of a rule from its information features.
//!
//! The predictive power of a set of features is `I(F : C) / H(C)` where the
//! rule `r` is uniform over 0..=255, `F` is the tuple of (rounded) feature
//! values of `r` and `C` its class. Only the partition of rules induced by
//! `F` matters, which is what the fast search path works with: each feature
//! becomes a [`Partition`] of the 256 rules and feature sets are scored by
//! refining partitions.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::features::{feature_matrix, EnumerationMode, FeatureMatrix};
use crate::info::{entropy, mutual_information, JointDistribution, Unit};

pub const RULES: usize = 256;

/// Class counts of the bundled table, classes 1 through 4.
pub const BUNDLED_CLASS_COUNTS: [usize; 4] = [24, 196, 26, 10];

/// Largest number of candidate sets an exhaustive search may visit: the
/// number of triples drawn from the 247 features of the t=3 pool.
pub const EXHAUSTIVE_LIMIT: u128 = 2_481_115;

pub const DEFAULT_BEAM_WIDTH: usize = 10;

/// Powers closer than this are treated as tied.
const TIE_TOLERANCE: f64 = 1e-12;

const BUNDLED_CLASSES: &str = include_str!("../data/wolfram_classes.csv");

/// Wolfram class (1..=4) of each of the 256 rules.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassTable {
    class_of: [u8; RULES],
}

impl ClassTable {
    /// The table shipped with the crate.
    pub fn bundled() -> ClassTable {
        ClassTable::parse_csv(BUNDLED_CLASSES).expect("bundled class table is valid")
    }

    pub fn from_classes(class_of: [u8; RULES]) -> Result<ClassTable> {
        if let Some((rule, c)) = class_of.iter().enumerate().find(|(_, &c)| !(1..=4).contains(&c)) {
            return Err(Error::Format(format!(
                "rule {rule} has class {c}, expected 1..=4"
            )));
        }
        Ok(ClassTable { class_of })
    }

    /// Parse `rule,class` CSV with a header line and one row per rule.
    pub fn parse_csv(text: &str) -> Result<ClassTable> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        match lines.next() {
            Some(h) if h.replace(' ', "") == "rule,class" => {}
            Some(h) => {
                return Err(Error::Format(format!(
                    "expected header \"rule,class\", got {h:?}"
                )))
            }
            None => return Err(Error::Format("class table is empty".into())),
        }
        let mut class_of: [Option<u8>; RULES] = [None; RULES];
        for (lineno, line) in lines.enumerate() {
            let row = lineno + 2;
            let (rule, class) = line
                .split_once(',')
                .ok_or_else(|| Error::Format(format!("line {row}: expected two fields")))?;
            let rule: usize = rule
                .trim()
                .parse()
                .map_err(|_| Error::Format(format!("line {row}: bad rule number {rule:?}")))?;
            let class: u8 = class
                .trim()
                .parse()
                .map_err(|_| Error::Format(format!("line {row}: bad class {class:?}")))?;
            if rule >= RULES {
                return Err(Error::Format(format!("line {row}: rule {rule} outside 0..=255")));
            }
            if !(1..=4).contains(&class) {
                return Err(Error::Format(format!("line {row}: class {class} outside 1..=4")));
            }
            if class_of[rule].replace(class).is_some() {
                return Err(Error::Format(format!("line {row}: duplicate rule {rule}")));
            }
        }
        let missing: Vec<usize> = (0..RULES).filter(|&r| class_of[r].is_none()).collect();
        if !missing.is_empty() {
            return Err(Error::Format(format!(
                "{} rules missing from class table (first: {})",
                missing.len(),
                missing[0]
            )));
        }
        let mut out = [0u8; RULES];
        for (o, c) in out.iter_mut().zip(class_of) {
            *o = c.expect("checked above");
        }
        Ok(ClassTable { class_of: out })
    }

    pub fn class_of(&self, rule: u8) -> u8 {
        self.class_of[rule as usize]
    }

    pub fn classes(&self) -> &[u8; RULES] {
        &self.class_of
    }

    /// Number of rules in classes 1, 2, 3 and 4.
    pub fn counts(&self) -> [usize; 4] {
        let mut counts = [0; 4];
        for &c in &self.class_of {
            counts[c as usize - 1] += 1;
        }
        counts
    }

    /// `H(C_r)` in bits with `r` uniform.
    pub fn entropy_bits(&self) -> f64 {
        self.counts()
            .iter()
            .filter(|&&c| c > 0)
            .map(|&c| {
                let p = c as f64 / RULES as f64;
                -p * p.log2()
            })
            .sum()
    }

    /// A uniformly random re-pairing of rules and class labels.
    pub fn permuted<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> ClassTable {
        let mut class_of = self.class_of;
        class_of.shuffle(rng);
        ClassTable { class_of }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("rule,class\n");
        for (r, c) in self.class_of.iter().enumerate() {
            out.push_str(&format!("{r},{c}\n"));
        }
        out
    }
}

pub fn load_class_table(path: impl AsRef<Path>) -> Result<ClassTable> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    ClassTable::parse_csv(&text).map_err(|e| match e {
        Error::Format(m) => Error::Format(format!("{}: {m}", path.display())),
        other => other,
    })
}

/// Rounding of real feature values to symbols before grouping.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Symbolization {
    precision: u32,
}

impl Default for Symbolization {
    fn default() -> Self {
        Symbolization { precision: 10 }
    }
}

impl Symbolization {
    pub fn new(precision: u32) -> Result<Self> {
        if !(6..=15).contains(&precision) {
            return domain(format!("symbolization precision {precision} outside 6..=15"));
        }
        Ok(Symbolization { precision })
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    /// Value rounded to `precision` decimal places, as an integer symbol.
    pub fn symbol(&self, value: f64) -> i64 {
        let scaled = (value * 10f64.powi(self.precision as i32)).round();
        // -0 and 0 are the same symbol
        scaled as i64
    }
}

fn check_class_entropy(classes: &ClassTable) -> Result<f64> {
    let h = classes.entropy_bits();
    if h <= 0.0 {
        return domain("class table has a single class; predictive power is undefined");
    }
    Ok(h)
}

/// `I(F : C) / H(C)` from the empirical joint over the 256 rules, where
/// `values[r]` is the tuple of already-symbolized feature values of rule `r`.
pub fn predictive_power(values: &[Vec<i64>], classes: &ClassTable) -> Result<f64> {
    if values.len() != RULES {
        return domain(format!("expected {RULES} value tuples, got {}", values.len()));
    }
    let h_class = check_class_entropy(classes)?;
    let mut ids: BTreeMap<&[i64], u32> = BTreeMap::new();
    for v in values {
        let next = ids.len() as u32;
        ids.entry(v.as_slice()).or_insert(next);
    }
    let joint = JointDistribution::from_counts(
        vec!["features".into(), "class".into()],
        values
            .iter()
            .zip(classes.classes())
            .map(|(v, &c)| (vec![ids[v.as_slice()], u32::from(c)], 1u64)),
    )?;
    let mi = mutual_information(&joint, &[0], &[1], Unit::Bits)?;
    let h = entropy(&joint.marginal(&[1])?, Unit::Bits)?;
    debug_assert!((h - h_class).abs() < 1e-12);
    Ok((mi / h).clamp(0.0, 1.0))
}

/// Partition of the 256 rules into groups, labelled by first occurrence.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Partition {
    labels: [u16; RULES],
    groups: u16,
}

impl Partition {
    pub fn from_symbols(symbols: &[i64]) -> Result<Partition> {
        if symbols.len() != RULES {
            return domain(format!("expected {RULES} symbols, got {}", symbols.len()));
        }
        let mut ids: BTreeMap<i64, u16> = BTreeMap::new();
        let mut labels = [0u16; RULES];
        for (l, s) in labels.iter_mut().zip(symbols) {
            let next = ids.len() as u16;
            *l = *ids.entry(*s).or_insert(next);
        }
        Ok(Partition {
            labels,
            groups: ids.len() as u16,
        })
    }

    /// The trivial one-group partition.
    pub fn whole() -> Partition {
        Partition {
            labels: [0; RULES],
            groups: 1,
        }
    }

    pub fn groups(&self) -> usize {
        self.groups as usize
    }

    pub fn labels(&self) -> &[u16; RULES] {
        &self.labels
    }

    /// Common refinement of two partitions.
    pub fn refine(&self, other: &Partition, scratch: &mut Scratch) -> Partition {
        scratch.generation = scratch.generation.wrapping_add(1);
        if scratch.generation == 0 {
            scratch.stamp.iter_mut().for_each(|s| *s = 0);
            scratch.generation = 1;
        }
        let width = other.groups as usize;
        let mut labels = [0u16; RULES];
        let mut groups = 0u16;
        for (r, label) in labels.iter_mut().enumerate() {
            let key = self.labels[r] as usize * width + other.labels[r] as usize;
            if scratch.stamp[key] != scratch.generation {
                scratch.stamp[key] = scratch.generation;
                scratch.slot[key] = groups;
                groups += 1;
            }
            *label = scratch.slot[key];
        }
        Partition { labels, groups }
    }
}

/// Reusable buffers for partition refinement and scoring.
pub struct Scratch {
    stamp: Vec<u32>,
    slot: Vec<u16>,
    generation: u32,
    group_counts: Vec<u32>,
    joint_counts: Vec<u32>,
}

impl Scratch {
    pub fn new() -> Scratch {
        Scratch {
            stamp: vec![0; RULES * RULES],
            slot: vec![0; RULES * RULES],
            generation: 0,
            group_counts: vec![0; RULES],
            joint_counts: vec![0; RULES * 4],
        }
    }
}

impl Default for Scratch {
    fn default() -> Self {
        Scratch::new()
    }
}

/// Fast predictive-power evaluation for a fixed class table.
#[derive(Clone, Debug)]
pub struct Scorer {
    class_index: [u8; RULES],
    h_class: f64,
    plogp: Vec<f64>,
}

impl Scorer {
    pub fn new(classes: &ClassTable) -> Result<Scorer> {
        let h_class = check_class_entropy(classes)?;
        let mut class_index = [0u8; RULES];
        for (ci, &c) in class_index.iter_mut().zip(classes.classes()) {
            *ci = c - 1;
        }
        let plogp = (0..=RULES)
            .map(|c| {
                if c == 0 {
                    0.0
                } else {
                    let p = c as f64 / RULES as f64;
                    -p * p.log2()
                }
            })
            .collect();
        Ok(Scorer {
            class_index,
            h_class,
            plogp,
        })
    }

    pub fn class_entropy(&self) -> f64 {
        self.h_class
    }

    /// Normalized predictive power of the partition.
    pub fn power(&self, p: &Partition, scratch: &mut Scratch) -> f64 {
        let g = p.groups as usize;
        let groups = &mut scratch.group_counts[..g];
        groups.iter_mut().for_each(|c| *c = 0);
        let joint = &mut scratch.joint_counts[..g * 4];
        joint.iter_mut().for_each(|c| *c = 0);
        for r in 0..RULES {
            let l = p.labels[r] as usize;
            groups[l] += 1;
            joint[l * 4 + self.class_index[r] as usize] += 1;
        }
        let h_f: f64 = groups.iter().map(|&c| self.plogp[c as usize]).sum();
        let h_fc: f64 = joint.iter().map(|&c| self.plogp[c as usize]).sum();
        ((h_f + self.h_class - h_fc) / self.h_class).clamp(0.0, 1.0)
    }
}

/// A pool of candidate features, one partition per feature, sorted by name.
#[derive(Clone, Debug)]
pub struct FeaturePool {
    t: usize,
    mode: EnumerationMode,
    names: Vec<String>,
    partitions: Vec<Partition>,
}

impl FeaturePool {
    /// The feature pool of time step `t`.
    pub fn new(t: usize, mode: EnumerationMode, symbolization: Symbolization) -> Result<FeaturePool> {
        let matrix = feature_matrix(t, mode)?;
        FeaturePool::from_matrix(t, mode, &matrix, symbolization)
    }

    pub fn from_matrix(
        t: usize,
        mode: EnumerationMode,
        matrix: &FeatureMatrix,
        symbolization: Symbolization,
    ) -> Result<FeaturePool> {
        let columns = (0..matrix.width()).map(|i| matrix.column(i)).collect();
        let mut pool = FeaturePool::from_columns(matrix.names(), columns, symbolization)?;
        pool.t = t;
        pool.mode = mode;
        Ok(pool)
    }

    /// Pool from arbitrary named per-rule columns.
    pub fn from_columns(
        names: Vec<String>,
        columns: Vec<Vec<f64>>,
        symbolization: Symbolization,
    ) -> Result<FeaturePool> {
        if names.len() != columns.len() {
            return domain("one name per column is required");
        }
        let mut pairs: Vec<(String, Partition)> = names
            .into_iter()
            .zip(columns)
            .map(|(n, col)| {
                let symbols: Vec<i64> = col.iter().map(|&v| symbolization.symbol(v)).collect();
                Partition::from_symbols(&symbols).map(|p| (n, p))
            })
            .collect::<Result<_>>()?;
        pairs.sort_by(|a, b| a.0.cmp(&b.0));
        let (names, partitions) = pairs.into_iter().unzip();
        Ok(FeaturePool {
            t: 0,
            mode: EnumerationMode::PerStep,
            names,
            partitions,
        })
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn mode(&self) -> EnumerationMode {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn partition(&self, index: usize) -> &Partition {
        &self.partitions[index]
    }

    pub fn joint_partition(&self, indices: &[usize]) -> Partition {
        let mut scratch = Scratch::new();
        indices.iter().fold(Partition::whole(), |acc, &i| {
            acc.refine(&self.partitions[i], &mut scratch)
        })
    }

    pub fn power(&self, indices: &[usize], classes: &ClassTable) -> Result<f64> {
        let scorer = Scorer::new(classes)?;
        Ok(scorer.power(&self.joint_partition(indices), &mut Scratch::new()))
    }

    /// Power of the whole pool.
    pub fn full_power(&self, classes: &ClassTable) -> Result<f64> {
        let all: Vec<usize> = (0..self.len()).collect();
        self.power(&all, classes)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SearchMode {
    /// Exhaustive within [`EXHAUSTIVE_LIMIT`], beam search beyond it.
    #[default]
    Auto,
    Exhaustive,
    Beam {
        width: usize,
    },
}

/// The best feature set of a given size.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub n: usize,
    pub features: Vec<String>,
    pub indices: Vec<usize>,
    pub power: f64,
    pub search: SearchMode,
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// `true` when `(pa, a)` beats `(pb, b)`: higher power, ties to the smaller index list.
fn better(pa: f64, a: &[usize], pb: f64, b: &[usize]) -> bool {
    if pa > pb + TIE_TOLERANCE {
        true
    } else if pb > pa + TIE_TOLERANCE {
        false
    } else {
        a < b
    }
}

type Candidate = (f64, Vec<usize>);

fn pick(a: Option<Candidate>, b: Option<Candidate>) -> Option<Candidate> {
    match (a, b) {
        (Some(x), Some(y)) => Some(if better(y.0, &y.1, x.0, &x.1) { y } else { x }),
        (x, None) => x,
        (None, y) => y,
    }
}

struct Dfs<'a> {
    pool: &'a FeaturePool,
    scorer: &'a Scorer,
    n: usize,
}

impl Dfs<'_> {
    fn run(
        &self,
        prefix: &mut Vec<usize>,
        part: &Partition,
        start: usize,
        scratch: &mut Scratch,
        best: &mut Option<Candidate>,
    ) {
        if prefix.len() == self.n {
            let p = self.scorer.power(part, scratch);
            let replace = match best {
                Some((bp, bi)) => better(p, prefix, *bp, bi),
                None => true,
            };
            if replace {
                *best = Some((p, prefix.clone()));
            }
            return;
        }
        let remaining = self.n - prefix.len();
        for i in start..=self.pool.len() - remaining {
            let next = part.refine(&self.pool.partitions[i], scratch);
            prefix.push(i);
            self.run(prefix, &next, i + 1, scratch, best);
            prefix.pop();
        }
    }
}

fn exhaustive(pool: &FeaturePool, scorer: &Scorer, n: usize) -> Candidate {
    let dfs = Dfs { pool, scorer, n };
    (0..=pool.len() - n)
        .into_par_iter()
        .map_init(Scratch::new, |scratch, first| {
            let mut best = None;
            let part = Partition::whole().refine(&pool.partitions[first], scratch);
            dfs.run(&mut vec![first], &part, first + 1, scratch, &mut best);
            best
        })
        .reduce(|| None, pick)
        .expect("pool holds at least n features")
}

fn beam(pool: &FeaturePool, scorer: &Scorer, n: usize, width: usize) -> Candidate {
    let mut frontier: Vec<Candidate> = vec![(0.0, Vec::new())];
    for _ in 0..n {
        let expansions: BTreeSet<Vec<usize>> = frontier
            .iter()
            .flat_map(|(_, set)| {
                (0..pool.len()).filter(|i| !set.contains(i)).map(move |i| {
                    let mut s = set.clone();
                    s.push(i);
                    s.sort_unstable();
                    s
                })
            })
            .collect();
        let mut scored: Vec<Candidate> = expansions
            .into_par_iter()
            .map_init(Scratch::new, |scratch, set| {
                let part = set.iter().fold(Partition::whole(), |acc, &i| {
                    acc.refine(&pool.partitions[i], scratch)
                });
                (scorer.power(&part, scratch), set)
            })
            .collect();
        scored.sort_by(|a, b| {
            if better(a.0, &a.1, b.0, &b.1) {
                std::cmp::Ordering::Less
            } else if better(b.0, &b.1, a.0, &a.1) {
                std::cmp::Ordering::Greater
            } else {
                std::cmp::Ordering::Equal
            }
        });
        scored.truncate(width);
        frontier = scored;
    }
    frontier.into_iter().next().expect("beam is never empty")
}

/// The principal set of `n` features: highest predictive power, ties to the
/// lexicographically smallest list of names.
pub fn select_principal(
    pool: &FeaturePool,
    classes: &ClassTable,
    n: usize,
    search: SearchMode,
) -> Result<Selection> {
    if n == 0 {
        return domain("feature set size must be at least 1");
    }
    if n > pool.len() {
        return domain(format!("cannot select {n} of {} features", pool.len()));
    }
    let scorer = Scorer::new(classes)?;
    let combos = binomial(pool.len(), n);
    let resolved = match search {
        SearchMode::Auto if combos <= EXHAUSTIVE_LIMIT => SearchMode::Exhaustive,
        SearchMode::Auto => SearchMode::Beam {
            width: DEFAULT_BEAM_WIDTH,
        },
        SearchMode::Exhaustive if combos > EXHAUSTIVE_LIMIT => {
            return Err(Error::Resource(format!(
                "exhaustive search over C({}, {n}) = {combos} sets exceeds the bound of {EXHAUSTIVE_LIMIT}",
                pool.len()
            )))
        }
        SearchMode::Beam { width: 0 } => return domain("beam width must be at least 1"),
        other => other,
    };
    let (power, indices) = match resolved {
        SearchMode::Exhaustive => exhaustive(pool, &scorer, n),
        SearchMode::Beam { width } => beam(pool, &scorer, n, width),
        SearchMode::Auto => unreachable!("resolved above"),
    };
    Ok(Selection {
        n,
        features: indices.iter().map(|&i| pool.names[i].clone()).collect(),
        indices,
        power,
        search: resolved,
    })
}

/// Null distribution of predictive power under random class re-pairing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Baseline {
    pub mean: f64,
    /// 2.5th percentile.
    pub lo: f64,
    /// 97.5th percentile.
    pub hi: f64,
    pub permutations: usize,
    pub seed: u64,
    pub reselect: bool,
}

/// Linear-interpolation percentile of sorted data, `q` in [0, 1].
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty());
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// Permutation baseline for a selected feature set.
///
/// Class labels are shuffled `permutations` times; permutation `k` draws from
/// a ChaCha8 stream `k` of `seed`, so results do not depend on thread count.
/// With `reselect`, the principal set of the same size is searched anew for
/// every permutation instead of keeping `indices` fixed.
pub fn permutation_baseline(
    pool: &FeaturePool,
    classes: &ClassTable,
    indices: &[usize],
    permutations: usize,
    seed: u64,
    reselect: Option<SearchMode>,
) -> Result<Baseline> {
    if permutations < 100 {
        return domain(format!(
            "at least 100 permutations are required, got {permutations}"
        ));
    }
    if indices.is_empty() {
        return domain("baseline needs a non-empty feature set");
    }
    let fixed = pool.joint_partition(indices);
    let powers = (0..permutations)
        .into_par_iter()
        .map_init(Scratch::new, |scratch, k| -> Result<f64> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let shuffled = classes.permuted(&mut rng);
            match reselect {
                Some(search) => Ok(select_principal(pool, &shuffled, indices.len(), search)?.power),
                None => Ok(Scorer::new(&shuffled)?.power(&fixed, scratch)),
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    let mean = powers.iter().sum::<f64>() / permutations as f64;
    let mut sorted = powers;
    sorted.sort_by(|a, b| a.total_cmp(b));
    Ok(Baseline {
        mean,
        lo: percentile(&sorted, 0.025),
        hi: percentile(&sorted, 0.975),
        permutations,
        seed,
        reselect: reselect.is_some(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictionEntry {
    pub t: usize,
    pub n: usize,
    pub features: Vec<String>,
    pub power: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub baseline: Option<Baseline>,
}

/// Principal sets for `n = 1..=n_max` at one time step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictionReport {
    pub t: usize,
    pub mode: EnumerationMode,
    pub pool_size: usize,
    pub full_power: f64,
    pub entries: Vec<PredictionEntry>,
    pub searches: Vec<SearchMode>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaselineConfig {
    pub permutations: usize,
    pub seed: u64,
    pub reselect: bool,
}

pub fn prediction_report(
    pool: &FeaturePool,
    classes: &ClassTable,
    n_max: usize,
    search: SearchMode,
    baseline: Option<BaselineConfig>,
) -> Result<PredictionReport> {
    let mut entries = Vec::new();
    let mut searches = Vec::new();
    let mut last_power = 0.0f64;
    for n in 1..=n_max.min(pool.len()) {
        let sel = select_principal(pool, classes, n, search)?;
        debug_assert!(sel.power + TIE_TOLERANCE >= last_power);
        last_power = last_power.max(sel.power);
        let baseline = match baseline {
            Some(cfg) => Some(permutation_baseline(
                pool,
                classes,
                &sel.indices,
                cfg.permutations,
                cfg.seed,
                cfg.reselect.then_some(sel.search),
            )?),
            None => None,
        };
        searches.push(sel.search);
        entries.push(PredictionEntry {
            t: pool.t(),
            n,
            features: sel.features,
            power: sel.power,
            baseline,
        });
    }
    Ok(PredictionReport {
        t: pool.t(),
        mode: pool.mode(),
        pool_size: pool.len(),
        full_power: pool.full_power(classes)?,
        entries,
        searches,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerPoint {
    pub t: usize,
    pub power: f64,
}

/// Predictive power of the full feature pool against time, with the step at
/// which it saturates.
///
/// `saturation_step` counts time steps from 1 (the first step whose pool
/// reaches the maximum); `saturation_transitions` counts the steps of
/// processing beyond the first, i.e. `saturation_step - 1`. Both conventions
/// are in use for the same quantity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NonLocality {
    pub curve: Vec<PowerPoint>,
    pub max_power: f64,
    pub saturation_step: usize,
    pub saturation_transitions: usize,
}

/// Saturation tolerance on the power curve.
pub const SATURATION_TOLERANCE: f64 = 1e-9;

pub fn nonlocality_from_curve(curve: Vec<PowerPoint>) -> Result<NonLocality> {
    if curve.is_empty() {
        return domain("power curve is empty");
    }
    let max_power = curve.iter().map(|p| p.power).fold(f64::MIN, f64::max);
    let saturation_step = curve
        .iter()
        .find(|p| p.power >= max_power - SATURATION_TOLERANCE)
        .map(|p| p.t)
        .expect("maximum is attained");
    Ok(NonLocality {
        curve,
        max_power,
        saturation_step,
        saturation_transitions: saturation_step.saturating_sub(1),
    })
}

/// Informational non-locality over per-step feature pools `t = 1..=t_max`.
pub fn nonlocality(t_max: usize, classes: &ClassTable, symbolization: Symbolization) -> Result<NonLocality> {
    if t_max < 2 {
        return domain("non-locality needs t_max ≥ 2");
    }
    let curve = (1..=t_max)
        .map(|t| {
            let pool = FeaturePool::new(t, EnumerationMode::PerStep, symbolization)?;
            Ok(PowerPoint {
                t,
                power: pool.full_power(classes)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    nonlocality_from_curve(curve)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn symbols_of(col: &[f64]) -> Vec<Vec<i64>> {
        let s = Symbolization::default();
        col.iter().map(|&v| vec![s.symbol(v)]).collect()
    }

    #[test]
    fn bundled_counts_and_entropy() {
        let t = ClassTable::bundled();
        assert_eq!(t.counts(), BUNDLED_CLASS_COUNTS);
        // independent recomputation from the counts alone
        let h: f64 = [24.0f64, 196.0, 26.0, 10.0]
            .iter()
            .map(|c| -(c / 256.0) * (c / 256.0).log2())
            .sum();
        assert!((t.entropy_bits() - h).abs() < 1e-15);
        assert!((h - 1.133).abs() < 5e-4);
        assert_eq!(t.class_of(110), 4);
        assert_eq!(t.class_of(30), 3);
        for r in [60, 90, 105, 150] {
            assert_eq!(t.class_of(r), 3);
        }
        assert_eq!(t.class_of(106), 4);
        assert_eq!(t.class_of(154), 2);
    }

    #[test]
    fn class_table_errors() {
        let full = ClassTable::bundled().to_csv();
        let short: String = full.lines().take(256).map(|l| format!("{l}\n")).collect();
        assert!(matches!(ClassTable::parse_csv(&short), Err(Error::Format(_))));
        let dup = full.replace("\n1,2\n", "\n0,2\n");
        assert!(matches!(ClassTable::parse_csv(&dup), Err(Error::Format(_))));
        let bad = full.replace("\n1,2\n", "\n1,5\n");
        assert!(matches!(ClassTable::parse_csv(&bad), Err(Error::Format(_))));
        assert!(matches!(ClassTable::parse_csv(""), Err(Error::Format(_))));
        assert_eq!(ClassTable::parse_csv(&full).unwrap(), ClassTable::bundled());
    }

    #[test]
    fn power_extremes() {
        let classes = ClassTable::bundled();
        let constant = vec![vec![7i64]; 256];
        assert_eq!(predictive_power(&constant, &classes).unwrap(), 0.0);
        let labels: Vec<Vec<i64>> = classes.classes().iter().map(|&c| vec![c as i64]).collect();
        assert!((predictive_power(&labels, &classes).unwrap() - 1.0).abs() < 1e-12);
        let single = ClassTable::from_classes([2; 256]).unwrap();
        assert!(predictive_power(&labels, &single).is_err());
    }

    #[test]
    fn fast_and_reference_routes_agree() {
        let classes = ClassTable::bundled();
        let m = feature_matrix(1, EnumerationMode::PerStep).unwrap();
        let pool =
            FeaturePool::from_matrix(1, EnumerationMode::PerStep, &m, Symbolization::default()).unwrap();
        let sym = Symbolization::default();
        for set in [
            vec![0usize],
            vec![3, 10],
            vec![0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10],
            vec![2, 5, 9],
        ] {
            let fast = pool.power(&set, &classes).unwrap();
            let tuples: Vec<Vec<i64>> = (0..=255u8)
                .map(|r| {
                    set.iter()
                        .map(|&i| sym.symbol(m.row(r)[m.column_index(&pool.names()[i]).unwrap()]))
                        .collect()
                })
                .collect();
            let reference = predictive_power(&tuples, &classes).unwrap();
            assert!((fast - reference).abs() < 1e-12, "{set:?}: {fast} vs {reference}");
        }
    }

    #[test]
    fn relabeling_invariance() {
        let classes = ClassTable::bundled();
        let m = feature_matrix(1, EnumerationMode::PerStep).unwrap();
        let col = m.column(m.column_index("S111").unwrap());
        let base = predictive_power(&symbols_of(&col), &classes).unwrap();
        let transformed: Vec<f64> = col.iter().map(|v| (3.0 * v + 1.0).exp()).collect();
        let moved = predictive_power(&symbols_of(&transformed), &classes).unwrap();
        assert_eq!(base, moved);
    }

    #[test]
    fn exhaustive_matches_brute_force_and_beam() {
        let classes = ClassTable::bundled();
        let pool = FeaturePool::new(1, EnumerationMode::PerStep, Symbolization::default()).unwrap();
        for n in 1..=4 {
            let sel = select_principal(&pool, &classes, n, SearchMode::Exhaustive).unwrap();
            // brute force with explicit tie-break over sorted name lists
            let mut best: Option<(f64, Vec<String>)> = None;
            let d = pool.len();
            for mask in 0u32..(1 << d) {
                if mask.count_ones() as usize != n {
                    continue;
                }
                let idx: Vec<usize> = (0..d).filter(|i| mask & (1 << i) != 0).collect();
                let p = pool.power(&idx, &classes).unwrap();
                let names: Vec<String> = idx.iter().map(|&i| pool.names()[i].clone()).collect();
                best = match best {
                    None => Some((p, names)),
                    Some((bp, bn)) => {
                        if p > bp + 1e-12 || ((p - bp).abs() <= 1e-12 && names < bn) {
                            Some((p, names))
                        } else {
                            Some((bp, bn))
                        }
                    }
                };
            }
            let (bp, bn) = best.unwrap();
            assert_eq!(sel.features, bn);
            assert!((sel.power - bp).abs() < 1e-12);
            let b = select_principal(&pool, &classes, n, SearchMode::Beam { width: 10 }).unwrap();
            assert!(b.power <= sel.power + 1e-12);
        }
    }

    #[test]
    fn exhaustive_bound_enforced() {
        let classes = ClassTable::bundled();
        let names: Vec<String> = (0..300).map(|i| format!("f{i:03}")).collect();
        let cols: Vec<Vec<f64>> = (0..300)
            .map(|i| (0..256).map(|r| ((r * (i + 1)) % 7) as f64).collect())
            .collect();
        let pool = FeaturePool::from_columns(names, cols, Symbolization::default()).unwrap();
        assert!(matches!(
            select_principal(&pool, &classes, 3, SearchMode::Exhaustive),
            Err(Error::Resource(_))
        ));
        let auto = select_principal(&pool, &classes, 3, SearchMode::Auto).unwrap();
        assert_eq!(
            auto.search,
            SearchMode::Beam {
                width: DEFAULT_BEAM_WIDTH
            }
        );
    }

    #[test]
    fn baseline_determinism_and_bounds() {
        let classes = ClassTable::bundled();
        let pool = FeaturePool::new(1, EnumerationMode::PerStep, Symbolization::default()).unwrap();
        let s111 = pool.index_of("S111").unwrap();
        let a = permutation_baseline(&pool, &classes, &[s111], 200, 7, None).unwrap();
        let b = permutation_baseline(&pool, &classes, &[s111], 200, 7, None).unwrap();
        assert_eq!(a, b);
        assert!(a.lo <= a.mean && a.mean <= a.hi);
        assert!(permutation_baseline(&pool, &classes, &[s111], 99, 7, None).is_err());
    }

    #[test]
    fn nonlocality_conventions() {
        let flat = nonlocality_from_curve(vec![
            PowerPoint { t: 1, power: 0.5 },
            PowerPoint { t: 2, power: 0.5 },
        ])
        .unwrap();
        assert_eq!(flat.saturation_step, 1);
        let rising = nonlocality_from_curve(vec![
            PowerPoint { t: 1, power: 0.49 },
            PowerPoint { t: 2, power: 0.98 },
            PowerPoint { t: 3, power: 1.0 },
        ])
        .unwrap();
        assert_eq!(rising.saturation_step, 3);
        assert_eq!(rising.saturation_transitions, 2);
        assert!(nonlocality(1, &ClassTable::bundled(), Symbolization::default()).is_err());
    }

    #[test]
    fn symbolization_precision_bounds() {
        assert!(Symbolization::new(5).is_err());
        let s = Symbolization::new(6).unwrap();
        assert_eq!(s.symbol(0.1234564), s.symbol(0.1234565 - 1e-9));
        assert_eq!(
            Symbolization::default().symbol(-0.0),
            Symbolization::default().symbol(0.0)
        );
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(247, 3), EXHAUSTIVE_LIMIT);
        assert_eq!(binomial(11, 4), 330);
        assert_eq!(binomial(3, 5), 0);
    }
}
