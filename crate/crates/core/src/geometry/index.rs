//! Spatial index over atoms: a `2^n`-ary tree (a quadtree in the plane)
//! answering box and sup-metric nearest-neighbour queries.

use crate::scalar::Real;

const LEAF_SIZE: usize = 8;
const MAX_DEPTH: usize = 60;

/// Boundary convention of a query box.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoxKind {
    /// `lo <= x <= hi`
    Closed,
    /// `lo < x < hi`
    Open,
    /// `lo <= x < hi`
    HalfOpen,
}

impl BoxKind {
    #[inline]
    fn admits<T: Real>(self, lo: T, hi: T, x: T) -> bool {
        match self {
            BoxKind::Closed => lo <= x && x <= hi,
            BoxKind::Open => lo < x && x < hi,
            BoxKind::HalfOpen => lo <= x && x < hi,
        }
    }

    #[inline]
    fn misses<T: Real>(self, lo: T, hi: T, nlo: T, nhi: T) -> bool {
        match self {
            BoxKind::Closed => nhi < lo || nlo > hi,
            BoxKind::Open => nhi <= lo || nlo >= hi,
            BoxKind::HalfOpen => nhi < lo || nlo >= hi,
        }
    }
}

#[derive(Clone, Debug)]
struct Node<T> {
    lo: Vec<T>,
    hi: Vec<T>,
    start: usize,
    end: usize,
    first_child: usize,
    n_children: usize,
}

#[derive(Clone, Debug)]
pub struct AtomIndex<T> {
    n: usize,
    pts: Vec<T>,
    ids: Vec<usize>,
    nodes: Vec<Node<T>>,
}

impl<T: Real> AtomIndex<T> {
    /// Builds the tree over `points`, a flat array of `n`-vectors.
    pub fn build(points: &[T], n: usize) -> Self {
        assert!(n > 0 && points.len().is_multiple_of(n));
        let m = points.len() / n;
        let mut ids: Vec<usize> = (0..m).collect();
        let mut nodes = Vec::new();
        if m > 0 {
            Self::build_node(points, n, &mut ids, 0, m, 0, &mut nodes);
        }
        let mut pts = Vec::with_capacity(points.len());
        for &i in &ids {
            pts.extend_from_slice(&points[i * n..(i + 1) * n]);
        }
        Self { n, pts, ids, nodes }
    }

    fn bbox(points: &[T], n: usize, ids: &[usize]) -> (Vec<T>, Vec<T>) {
        let mut lo = vec![T::infinity(); n];
        let mut hi = vec![T::neg_infinity(); n];
        for &i in ids {
            for a in 0..n {
                let x = points[i * n + a];
                lo[a] = lo[a].min(x);
                hi[a] = hi[a].max(x);
            }
        }
        (lo, hi)
    }

    fn build_node(
        points: &[T],
        n: usize,
        ids: &mut [usize],
        start: usize,
        end: usize,
        depth: usize,
        nodes: &mut Vec<Node<T>>,
    ) -> usize {
        let (lo, hi) = Self::bbox(points, n, &ids[start..end]);
        let me = nodes.len();
        nodes.push(Node { lo: lo.clone(), hi: hi.clone(), start, end, first_child: 0, n_children: 0 });
        let degenerate = (0..n).all(|a| lo[a] == hi[a]);
        if end - start <= LEAF_SIZE || depth >= MAX_DEPTH || degenerate {
            return me;
        }
        let mid: Vec<T> = (0..n).map(|a| (lo[a] + hi[a]) / T::lit(2.0)).collect();
        let bucket = |i: usize| -> usize {
            (0..n).fold(0usize, |b, a| b | (((points[i * n + a] > mid[a]) as usize) << a))
        };
        let slice = &mut ids[start..end];
        slice.sort_by_key(|&i| (bucket(i), i));
        let mut ranges = Vec::new();
        let mut s = start;
        while s < end {
            let b = bucket(ids[s]);
            let mut e = s + 1;
            while e < end && bucket(ids[e]) == b {
                e += 1;
            }
            ranges.push((s, e));
            s = e;
        }
        // Children must be contiguous in `nodes`; reserve slots first.
        let first = nodes.len();
        for _ in &ranges {
            nodes.push(Node { lo: Vec::new(), hi: Vec::new(), start: 0, end: 0, first_child: 0, n_children: 0 });
        }
        nodes[me].first_child = first;
        nodes[me].n_children = ranges.len();
        for (c, &(s, e)) in ranges.iter().enumerate() {
            let mut sub = Vec::new();
            let root = Self::build_node(points, n, ids, s, e, depth + 1, &mut sub);
            debug_assert_eq!(root, 0);
            // Re-base the subtree into the main arena.
            let offset = nodes.len();
            let mut subroot = sub[0].clone();
            if subroot.n_children > 0 {
                subroot.first_child += offset - 1;
            }
            nodes[first + c] = subroot;
            for node in sub.into_iter().skip(1) {
                let mut node = node;
                if node.n_children > 0 {
                    node.first_child += offset - 1;
                }
                nodes.push(node);
            }
        }
        me
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    #[inline]
    fn point(&self, slot: usize) -> &[T] {
        &self.pts[slot * self.n..(slot + 1) * self.n]
    }

    fn node_inside(&self, node: &Node<T>, lo: &[T], hi: &[T], kind: BoxKind) -> bool {
        (0..self.n).all(|a| kind.admits(lo[a], hi[a], node.lo[a]) && kind.admits(lo[a], hi[a], node.hi[a]))
    }

    fn node_misses(&self, node: &Node<T>, lo: &[T], hi: &[T], kind: BoxKind) -> bool {
        (0..self.n).any(|a| kind.misses(lo[a], hi[a], node.lo[a], node.hi[a]))
    }

    fn point_in(&self, slot: usize, lo: &[T], hi: &[T], kind: BoxKind) -> bool {
        let p = self.point(slot);
        (0..self.n).all(|a| kind.admits(lo[a], hi[a], p[a]))
    }

    /// Calls `f(atom_index)` for every atom inside the box (unspecified order).
    pub fn for_each_in_box<F: FnMut(usize)>(&self, lo: &[T], hi: &[T], kind: BoxKind, mut f: F) {
        if self.nodes.is_empty() {
            return;
        }
        let mut stack = vec![0usize];
        while let Some(ni) = stack.pop() {
            let node = &self.nodes[ni];
            if self.node_misses(node, lo, hi, kind) {
                continue;
            }
            if self.node_inside(node, lo, hi, kind) {
                for slot in node.start..node.end {
                    f(self.ids[slot]);
                }
                continue;
            }
            if node.n_children == 0 {
                for slot in node.start..node.end {
                    if self.point_in(slot, lo, hi, kind) {
                        f(self.ids[slot]);
                    }
                }
            } else {
                stack.extend(node.first_child..node.first_child + node.n_children);
            }
        }
    }

    /// Atom indices inside the box, sorted ascending.
    pub fn indices_in_box(&self, lo: &[T], hi: &[T], kind: BoxKind) -> Vec<usize> {
        let mut out = Vec::new();
        self.for_each_in_box(lo, hi, kind, |i| out.push(i));
        out.sort_unstable();
        out
    }

    pub fn count_in_box(&self, lo: &[T], hi: &[T], kind: BoxKind) -> usize {
        let mut c = 0;
        self.for_each_in_box(lo, hi, kind, |_| c += 1);
        c
    }

    /// Whether any atom lies in the box.
    pub fn any_in_box(&self, lo: &[T], hi: &[T], kind: BoxKind) -> bool {
        if self.nodes.is_empty() {
            return false;
        }
        let mut stack = vec![0usize];
        while let Some(ni) = stack.pop() {
            let node = &self.nodes[ni];
            if self.node_misses(node, lo, hi, kind) {
                continue;
            }
            if self.node_inside(node, lo, hi, kind) {
                return true;
            }
            if node.n_children == 0 {
                if (node.start..node.end).any(|s| self.point_in(s, lo, hi, kind)) {
                    return true;
                }
            } else {
                stack.extend(node.first_child..node.first_child + node.n_children);
            }
        }
        false
    }

    fn box_dist(&self, node: &Node<T>, x: &[T]) -> T {
        (0..self.n).fold(T::zero(), |m, a| {
            let d = (node.lo[a] - x[a]).max(x[a] - node.hi[a]).max(T::zero());
            m.max(d)
        })
    }

    /// Nearest atom in the sup metric; ties go to the lowest atom index.
    /// `skip` excludes one atom (used for nearest-other-atom queries).
    pub fn nearest(&self, x: &[T], skip: Option<usize>) -> Option<(usize, T)> {
        if self.nodes.is_empty() {
            return None;
        }
        let mut best: Option<(usize, T)> = None;
        let mut stack = vec![0usize];
        while let Some(ni) = stack.pop() {
            let node = &self.nodes[ni];
            if let Some((_, bd)) = best {
                if self.box_dist(node, x) > bd {
                    continue;
                }
            }
            if node.n_children == 0 {
                for slot in node.start..node.end {
                    let id = self.ids[slot];
                    if Some(id) == skip {
                        continue;
                    }
                    let d = crate::scalar::sup_dist(self.point(slot), x);
                    let better = match best {
                        None => true,
                        Some((bi, bd)) => d < bd || (d == bd && id < bi),
                    };
                    if better {
                        best = Some((id, d));
                    }
                }
            } else {
                let mut kids: Vec<(T, usize)> = (node.first_child..node.first_child + node.n_children)
                    .map(|c| (self.box_dist(&self.nodes[c], x), c))
                    .collect();
                // Farthest pushed first so the nearest is explored first.
                kids.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal));
                stack.extend(kids.into_iter().map(|(_, c)| c));
            }
        }
        best
    }
}
