//! Static k-d tree with toroidal pruning.
//!
//! Each node covers an axis-aligned box `[lo, hi]` of the unit cube. On the
//! torus the box is not wrapped, so the distance from a query to any point in
//! it is bounded below, per axis, by the circular distance to the nearer box
//! edge (zero when the query coordinate lies inside).

use super::Nearest;
use crate::torus::circular_diff_unchecked;

const LEAF_SIZE: usize = 8;

#[derive(Debug, Clone)]
enum Node {
    Leaf { start: u32, end: u32 },
    Split { axis: u32, value: f64, left: u32, right: u32 },
}

#[derive(Debug, Clone)]
pub(super) struct KdTree {
    nodes: Vec<Node>,
}

impl KdTree {
    /// Builds the tree and returns coordinates and labels permuted into leaf
    /// order.
    pub(super) fn build(coords: Vec<f64>, labels: Vec<u32>, dim: usize) -> (Self, Vec<f64>, Vec<u32>) {
        let n = labels.len();
        let mut order: Vec<u32> = (0..n as u32).collect();
        let mut nodes = Vec::with_capacity(2 * n / LEAF_SIZE + 1);
        build_node(&coords, dim, &mut order, 0, &mut nodes);
        let mut sorted_coords = Vec::with_capacity(coords.len());
        let mut sorted_labels = Vec::with_capacity(n);
        for &i in &order {
            let i = i as usize;
            sorted_coords.extend_from_slice(&coords[i * dim..(i + 1) * dim]);
            sorted_labels.push(labels[i]);
        }
        (KdTree { nodes }, sorted_coords, sorted_labels)
    }

    pub(super) fn search(&self, coords: &[f64], labels: &[u32], dim: usize, query: &[f64], out: &mut Nearest) {
        let mut lo = vec![0.0; dim];
        let mut hi = vec![1.0; dim];
        let mut search = Search { tree: self, coords, labels, dim, query, out, lo: &mut lo, hi: &mut hi };
        search.visit(0);
    }
}

fn build_node(coords: &[f64], dim: usize, order: &mut [u32], offset: usize, nodes: &mut Vec<Node>) -> u32 {
    let id = nodes.len() as u32;
    if order.len() <= LEAF_SIZE {
        nodes.push(Node::Leaf { start: offset as u32, end: (offset + order.len()) as u32 });
        return id;
    }
    // split the axis of widest spread at the median
    let mut axis = 0;
    let mut widest = -1.0;
    for a in 0..dim {
        let (mut min, mut max) = (f64::INFINITY, f64::NEG_INFINITY);
        for &i in order.iter() {
            let c = coords[i as usize * dim + a];
            min = min.min(c);
            max = max.max(c);
        }
        if max - min > widest {
            widest = max - min;
            axis = a;
        }
    }
    let mid = order.len() / 2;
    let key = |i: &u32| coords[*i as usize * dim + axis];
    order.select_nth_unstable_by(mid, |a, b| key(a).total_cmp(&key(b)));
    let value = key(&order[mid]);
    nodes.push(Node::Split { axis: axis as u32, value, left: 0, right: 0 });
    let (left_part, right_part) = order.split_at_mut(mid);
    let left = build_node(coords, dim, left_part, offset, nodes);
    let right = build_node(coords, dim, right_part, offset + mid, nodes);
    nodes[id as usize] = Node::Split { axis: axis as u32, value, left, right };
    id
}

struct Search<'a> {
    tree: &'a KdTree,
    coords: &'a [f64],
    labels: &'a [u32],
    dim: usize,
    query: &'a [f64],
    out: &'a mut Nearest,
    lo: &'a mut [f64],
    hi: &'a mut [f64],
}

impl Search<'_> {
    /// Lower bound on the squared distance from the query to the current box.
    ///
    /// Summed in axis order with per-axis terms no larger than a contained
    /// point's, so it never exceeds that point's computed squared distance.
    fn box_bound(&self) -> f64 {
        let mut sum = 0.0;
        for a in 0..self.dim {
            let q = self.query[a];
            let (lo, hi) = (self.lo[a], self.hi[a]);
            if q < lo || q > hi {
                let d = circular_diff_unchecked(q, lo).min(circular_diff_unchecked(q, hi));
                sum += d * d;
            }
        }
        sum
    }

    fn pruned(&self, bound: f64) -> bool {
        matches!(self.out.worst(), Some(w) if bound > w)
    }

    fn visit(&mut self, node: u32) {
        match self.tree.nodes[node as usize] {
            Node::Leaf { start, end } => {
                for i in start as usize..end as usize {
                    let p = &self.coords[i * self.dim..(i + 1) * self.dim];
                    let d2 = crate::torus::squared_distance_slices(p, self.query);
                    self.out.offer(d2, self.labels[i]);
                }
            }
            Node::Split { axis, value, left, right } => {
                let a = axis as usize;
                let (lo, hi) = (self.lo[a], self.hi[a]);

                self.hi[a] = value;
                let left_bound = self.box_bound();
                self.hi[a] = hi;
                self.lo[a] = value;
                let right_bound = self.box_bound();
                self.lo[a] = lo;

                let children = if left_bound <= right_bound {
                    [(left, left_bound, true), (right, right_bound, false)]
                } else {
                    [(right, right_bound, false), (left, left_bound, true)]
                };
                for (child, bound, is_left) in children {
                    if self.pruned(bound) {
                        continue;
                    }
                    if is_left {
                        self.hi[a] = value;
                    } else {
                        self.lo[a] = value;
                    }
                    self.visit(child);
                    self.lo[a] = lo;
                    self.hi[a] = hi;
                }
            }
        }
    }
}
