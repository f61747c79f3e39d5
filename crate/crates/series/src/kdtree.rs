//! Exact neighbor queries under the maximum norm.

const LEAF_SIZE: usize = 12;

#[derive(Clone, Debug)]
struct Node {
    start: usize,
    end: usize,
    /// Per-dimension bounding box, `lo[d]..=hi[d]`.
    lo: Vec<f64>,
    hi: Vec<f64>,
    children: Option<(usize, usize)>,
}

/// k-d tree over `n` points of dimension `dim` stored row-major.
#[derive(Clone, Debug)]
pub struct KdTree<'a> {
    data: &'a [f64],
    dim: usize,
    order: Vec<usize>,
    nodes: Vec<Node>,
}

pub fn max_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

impl<'a> KdTree<'a> {
    pub fn new(data: &'a [f64], dim: usize) -> KdTree<'a> {
        assert!(dim > 0 && data.len().is_multiple_of(dim));
        let n = data.len() / dim;
        let mut tree = KdTree {
            data,
            dim,
            order: (0..n).collect(),
            nodes: Vec::new(),
        };
        if n > 0 {
            tree.build(0, n);
        }
        tree
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    fn build(&mut self, start: usize, end: usize) -> usize {
        let mut lo = vec![f64::INFINITY; self.dim];
        let mut hi = vec![f64::NEG_INFINITY; self.dim];
        for &i in &self.order[start..end] {
            for d in 0..self.dim {
                let v = self.data[i * self.dim + d];
                lo[d] = lo[d].min(v);
                hi[d] = hi[d].max(v);
            }
        }
        let id = self.nodes.len();
        self.nodes.push(Node {
            start,
            end,
            lo,
            hi,
            children: None,
        });
        if end - start <= LEAF_SIZE {
            return id;
        }
        let node = &self.nodes[id];
        let split = (0..self.dim)
            .max_by(|&a, &b| (node.hi[a] - node.lo[a]).total_cmp(&(node.hi[b] - node.lo[b])))
            .expect("dim > 0");
        if node.hi[split] == node.lo[split] {
            // all points coincide
            return id;
        }
        let mid = start + (end - start) / 2;
        let (data, dim) = (self.data, self.dim);
        self.order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            data[a * dim + split].total_cmp(&data[b * dim + split])
        });
        let left = self.build(start, mid);
        let right = self.build(mid, end);
        self.nodes[id].children = Some((left, right));
        id
    }

    fn box_distance(&self, node: &Node, q: &[f64]) -> f64 {
        (0..self.dim).fold(0.0f64, |m, d| m.max(node.lo[d] - q[d]).max(q[d] - node.hi[d]))
    }

    fn box_far(&self, node: &Node, q: &[f64]) -> f64 {
        (0..self.dim).fold(0.0f64, |m, d| {
            m.max((q[d] - node.lo[d]).abs()).max((node.hi[d] - q[d]).abs())
        })
    }

    /// Distance from point `i` to its `k`-th nearest other point.
    pub fn kth_neighbor_distance(&self, i: usize, k: usize) -> f64 {
        assert!(k >= 1 && k < self.len());
        let q = self.point(i).to_vec();
        // sorted ascending, at most k entries
        let mut best: Vec<f64> = Vec::with_capacity(k + 1);
        let mut stack = vec![0usize];
        while let Some(id) = stack.pop() {
            let node = &self.nodes[id];
            let bound = if best.len() == k {
                best[k - 1]
            } else {
                f64::INFINITY
            };
            if self.box_distance(node, &q) > bound {
                continue;
            }
            match node.children {
                Some((l, r)) => {
                    let dl = self.box_distance(&self.nodes[l], &q);
                    let dr = self.box_distance(&self.nodes[r], &q);
                    if dl <= dr {
                        stack.push(r);
                        stack.push(l);
                    } else {
                        stack.push(l);
                        stack.push(r);
                    }
                }
                None => {
                    for &j in &self.order[node.start..node.end] {
                        if j == i {
                            continue;
                        }
                        let d = max_distance(&q, self.point(j));
                        if best.len() < k || d < best[best.len() - 1] {
                            let pos = best.partition_point(|&b| b <= d);
                            best.insert(pos, d);
                            best.truncate(k);
                        }
                    }
                }
            }
        }
        best[k - 1]
    }

    /// Number of points strictly closer than `radius` to `q`.
    pub fn count_within(&self, q: &[f64], radius: f64) -> usize {
        let mut count = 0;
        let mut stack = vec![0usize];
        while let Some(id) = stack.pop() {
            let node = &self.nodes[id];
            if self.box_distance(node, q) >= radius {
                continue;
            }
            if self.box_far(node, q) < radius {
                count += node.end - node.start;
                continue;
            }
            match node.children {
                Some((l, r)) => {
                    stack.push(l);
                    stack.push(r);
                }
                None => {
                    count += self.order[node.start..node.end]
                        .iter()
                        .filter(|&&j| max_distance(q, self.point(j)) < radius)
                        .count();
                }
            }
        }
        count
    }
}
