//! Indexed binary max-heap of variables keyed by activity.
//!
//! Equal activities order by lower variable offset, so branching is
//! deterministic.

#[derive(Debug, Clone, Default)]
pub(super) struct VarHeap {
    heap: Vec<u32>,
    // position in `heap`, or NONE
    pos: Vec<u32>,
}

const NONE: u32 = u32::MAX;

#[inline]
fn before(act: &[f64], a: u32, b: u32) -> bool {
    let (x, y) = (act[a as usize], act[b as usize]);
    x > y || (x == y && a < b)
}

impl VarHeap {
    pub(super) fn new(n: usize) -> Self {
        VarHeap { heap: Vec::with_capacity(n), pos: vec![NONE; n] }
    }

    #[inline]
    pub(super) fn contains(&self, v: u32) -> bool {
        self.pos[v as usize] != NONE
    }

    pub(super) fn len(&self) -> usize {
        self.heap.len()
    }

    pub(super) fn get(&self, i: usize) -> u32 {
        self.heap[i]
    }

    pub(super) fn insert(&mut self, v: u32, act: &[f64]) {
        if self.contains(v) {
            return;
        }
        self.pos[v as usize] = self.heap.len() as u32;
        self.heap.push(v);
        self.sift_up(self.heap.len() - 1, act);
    }

    /// Restores order after `v`'s activity increased.
    pub(super) fn increased(&mut self, v: u32, act: &[f64]) {
        if self.contains(v) {
            self.sift_up(self.pos[v as usize] as usize, act);
        }
    }

    pub(super) fn pop(&mut self, act: &[f64]) -> Option<u32> {
        let top = *self.heap.first()?;
        let last = self.heap.pop().expect("non-empty");
        self.pos[top as usize] = NONE;
        if !self.heap.is_empty() {
            self.heap[0] = last;
            self.pos[last as usize] = 0;
            self.sift_down(0, act);
        }
        Some(top)
    }

    fn sift_up(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        while i > 0 {
            let parent = (i - 1) / 2;
            let p = self.heap[parent];
            if !before(act, v, p) {
                break;
            }
            self.heap[i] = p;
            self.pos[p as usize] = i as u32;
            i = parent;
        }
        self.heap[i] = v;
        self.pos[v as usize] = i as u32;
    }

    fn sift_down(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        let len = self.heap.len();
        loop {
            let left = 2 * i + 1;
            if left >= len {
                break;
            }
            let right = left + 1;
            let child = if right < len && before(act, self.heap[right], self.heap[left]) {
                right
            } else {
                left
            };
            let c = self.heap[child];
            if !before(act, c, v) {
                break;
            }
            self.heap[i] = c;
            self.pos[c as usize] = i as u32;
            i = child;
        }
        self.heap[i] = v;
        self.pos[v as usize] = i as u32;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pops_by_activity_then_index() {
        let mut act = vec![0.0, 3.0, 1.0, 3.0, 0.5];
        let mut h = VarHeap::new(5);
        for v in 0..5 {
            h.insert(v, &act);
        }
        assert_eq!(h.pop(&act), Some(1));
        act[4] = 10.0;
        h.increased(4, &act);
        let order: Vec<u32> = std::iter::from_fn(|| h.pop(&act)).collect();
        assert_eq!(order, vec![4, 3, 2, 0]);
    }
}
