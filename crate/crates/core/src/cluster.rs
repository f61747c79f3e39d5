//! Complete-linkage agglomerative clustering with dendrogram export.

use std::collections::BTreeSet;
use std::fmt::Display;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::numfmt::format_significant;

/// One agglomeration step. Ids below the leaf count are leaves; merge `i`
/// creates cluster `leaves + i`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub a: usize,
    pub b: usize,
    pub height: f64,
    pub size: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dendrogram<L> {
    leaves: Vec<L>,
    merges: Vec<Merge>,
}

/// Nested tree form used for JSON export.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Node<L> {
    Internal {
        left: Box<Node<L>>,
        right: Box<Node<L>>,
        height: f64,
    },
    Leaf {
        label: L,
        height: f64,
    },
}

impl<L> Node<L> {
    pub fn height(&self) -> f64 {
        match self {
            Node::Internal { height, .. } | Node::Leaf { height, .. } => *height,
        }
    }
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Cluster labelled vectors by complete linkage on Euclidean distance.
///
/// Leaves are sorted by label first. Among equally close pairs the one with
/// the smallest `(min key, max key)` merges first, where a cluster's key is
/// its smallest label, so the result does not depend on input order.
pub fn complete_linkage<L: Ord + Clone>(items: Vec<(L, Vec<f64>)>) -> Result<Dendrogram<L>> {
    if items.len() < 2 {
        return domain("clustering needs at least two vectors");
    }
    let dim = items[0].1.len();
    if let Some((_, v)) = items.iter().find(|(_, v)| v.len() != dim) {
        return domain(format!("vector of dimension {} among dimension {dim}", v.len()));
    }
    if items.iter().any(|(_, v)| v.iter().any(|x| !x.is_finite())) {
        return domain("feature vectors must be finite");
    }
    let mut items = items;
    items.sort_by(|a, b| a.0.cmp(&b.0));
    if items.windows(2).any(|w| w[0].0 == w[1].0) {
        return domain("duplicate leaf label");
    }
    let n = items.len();
    let mut dist = vec![vec![0.0f64; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let d = euclidean(&items[i].1, &items[j].1);
            dist[i][j] = d;
            dist[j][i] = d;
        }
    }
    // slot -> (cluster id, key leaf index, size); leaf index order is label order
    let mut active: Vec<Option<(usize, usize, usize)>> = (0..n).map(|i| Some((i, i, 1))).collect();
    let mut merges = Vec::with_capacity(n - 1);
    for step in 0..n - 1 {
        let mut best: Option<(f64, usize, usize, usize, usize)> = None;
        for i in 0..n {
            let Some((_, ki, _)) = active[i] else { continue };
            for j in i + 1..n {
                let Some((_, kj, _)) = active[j] else { continue };
                let d = dist[i][j];
                let (lo, hi) = (ki.min(kj), ki.max(kj));
                let better = match best {
                    None => true,
                    Some((bd, blo, bhi, _, _)) => d < bd || (d == bd && (lo, hi) < (blo, bhi)),
                };
                if better {
                    best = Some((d, lo, hi, i, j));
                }
            }
        }
        let (height, _, _, i, j) = best.expect("two active clusters remain");
        let (ci, ki, si) = active[i].expect("active");
        let (cj, kj, sj) = active[j].expect("active");
        let (a, b) = if ki < kj { (ci, cj) } else { (cj, ci) };
        merges.push(Merge {
            a,
            b,
            height,
            size: si + sj,
        });
        for k in 0..n {
            if k != i && k != j && active[k].is_some() {
                let d = dist[i][k].max(dist[j][k]);
                dist[i][k] = d;
                dist[k][i] = d;
            }
        }
        active[i] = Some((n + step, ki.min(kj), si + sj));
        active[j] = None;
    }
    Ok(Dendrogram {
        leaves: items.into_iter().map(|(l, _)| l).collect(),
        merges,
    })
}

impl<L: Clone + Ord> Dendrogram<L> {
    /// Leaves in label order.
    pub fn leaves(&self) -> &[L] {
        &self.leaves
    }

    pub fn merges(&self) -> &[Merge] {
        &self.merges
    }

    fn members(&self, id: usize) -> Vec<usize> {
        if id < self.leaves.len() {
            return vec![id];
        }
        let m = &self.merges[id - self.leaves.len()];
        let mut out = self.members(m.a);
        out.extend(self.members(m.b));
        out
    }

    /// Flat clusters formed by all merges at height ≤ `height`, each sorted,
    /// ordered by their smallest label.
    pub fn cut(&self, height: f64) -> Vec<Vec<L>> {
        let n = self.leaves.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            let mut y = x;
            while p[y] != r {
                let next = p[y];
                p[y] = r;
                y = next;
            }
            r
        }
        for m in self.merges.iter().filter(|m| m.height <= height) {
            let a = self.members(m.a)[0];
            let b = self.members(m.b)[0];
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            parent[ra.max(rb)] = ra.min(rb);
        }
        let mut groups: Vec<Vec<L>> = Vec::new();
        let mut root_of: Vec<Option<usize>> = vec![None; n];
        for leaf in 0..n {
            let r = find(&mut parent, leaf);
            match root_of[r] {
                Some(g) => groups[g].push(self.leaves[leaf].clone()),
                None => {
                    root_of[r] = Some(groups.len());
                    groups.push(vec![self.leaves[leaf].clone()]);
                }
            }
        }
        groups
    }

    /// Height at which two leaves first share a cluster.
    pub fn cophenetic(&self, a: &L, b: &L) -> Option<f64> {
        let ia = self.leaves.binary_search(a).ok()?;
        let ib = self.leaves.binary_search(b).ok()?;
        if ia == ib {
            return Some(0.0);
        }
        let n = self.leaves.len();
        let mut sets: Vec<BTreeSet<usize>> = Vec::new();
        for m in &self.merges {
            let mut s = if m.a < n {
                BTreeSet::from([m.a])
            } else {
                sets[m.a - n].clone()
            };
            if m.b < n {
                s.insert(m.b);
            } else {
                s.extend(sets[m.b - n].iter().copied());
            }
            if s.contains(&ia) && s.contains(&ib) {
                return Some(m.height);
            }
            sets.push(s);
        }
        None
    }

    pub fn to_tree(&self) -> Node<L> {
        self.node(self.leaves.len() + self.merges.len() - 1)
    }

    fn node(&self, id: usize) -> Node<L> {
        let n = self.leaves.len();
        if id < n {
            return Node::Leaf {
                label: self.leaves[id].clone(),
                height: 0.0,
            };
        }
        let m = &self.merges[id - n];
        Node::Internal {
            left: Box::new(self.node(m.a)),
            right: Box::new(self.node(m.b)),
            height: m.height,
        }
    }
}

impl<L: Clone + Ord + Serialize> Dendrogram<L> {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(&self.to_tree())
            .map_err(|e| crate::Error::Format(format!("dendrogram serialization: {e}")))
    }
}

impl<L: Clone + Ord + Display> Dendrogram<L> {
    /// Newick text; branch lengths are differences of merge heights.
    pub fn to_newick(&self) -> String {
        fn write<L: Display>(node: &Node<L>, parent: Option<f64>, out: &mut String) {
            match node {
                Node::Leaf { label, .. } => out.push_str(&label.to_string()),
                Node::Internal { left, right, .. } => {
                    out.push('(');
                    write(left, Some(node.height()), out);
                    out.push(',');
                    write(right, Some(node.height()), out);
                    out.push(')');
                }
            }
            if let Some(p) = parent {
                out.push(':');
                out.push_str(&format_significant(p - node.height(), 12));
            }
        }
        let mut out = String::new();
        write(&self.to_tree(), None, &mut out);
        out.push(';');
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExportFormat {
    Json,
    Newick,
}

impl std::str::FromStr for ExportFormat {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(ExportFormat::Json),
            "newick" => Ok(ExportFormat::Newick),
            other => domain(format!("unknown dendrogram format {other:?} (json | newick)")),
        }
    }
}

pub fn export_dendrogram<L>(d: &Dendrogram<L>, format: ExportFormat) -> Result<String>
where
    L: Clone + Ord + Display + Serialize,
{
    match format {
        ExportFormat::Json => d.to_json(),
        ExportFormat::Newick => Ok(d.to_newick()),
    }
}
