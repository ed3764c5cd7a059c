//! Quotient of the subset lattice by determination and symmetry equalities.
//!
//! Every equality of the form `H(S) = H(T)` is an edge between subsets; the
//! connected components become the coordinates of the reduced space and the
//! component of `∅` is identically zero. A spanning forest of the recorded
//! edges lets a reduced-space certificate be lifted back to the full space.

use std::collections::BTreeMap;

use num_traits::Zero;

use super::{ConstraintId, Form, ProblemInstance, ProverError};
use crate::Rational;

pub(crate) const ZERO_CLASS: u32 = u32::MAX;

#[derive(Debug, Clone, Copy)]
enum Edge {
    Det { rule: u32, set: u32 },
    Sym { group: u16, permutation: u16, set: u32 },
}

impl Edge {
    /// `(a, b)` with the constraint reading `H(a) − H(b) = 0`.
    fn ends(&self, pi: &ProblemInstance) -> (u32, u32) {
        match *self {
            Edge::Det { rule, set } => {
                let t = pi.ground.determinations[rule as usize].target;
                (set | 1 << t, set)
            }
            Edge::Sym { group, permutation, set } => {
                let img = pi.symmetry[group as usize]
                    .image(permutation as usize, set)
                    .expect("recorded symmetry edge");
                (set, img)
            }
        }
    }

    fn id(&self) -> ConstraintId {
        match *self {
            Edge::Det { rule, set } => ConstraintId::Determination { set, rule: rule as usize },
            Edge::Sym { group, permutation, set } => ConstraintId::Symmetry {
                set,
                group: group as usize,
                permutation: permutation as usize,
            },
        }
    }
}

struct UnionFind {
    parent: Vec<u32>,
    rank: Vec<u8>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n as u32).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let p = self.parent[x as usize];
            self.parent[x as usize] = self.parent[p as usize];
            x = p;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (ka, kb) = (self.rank[ra as usize], self.rank[rb as usize]);
        if ka < kb {
            self.parent[ra as usize] = rb;
        } else {
            self.parent[rb as usize] = ra;
            if ka == kb {
                self.rank[ra as usize] += 1;
            }
        }
        true
    }
}

pub(crate) struct Reduction {
    /// Reduced coordinate of each subset, or [`ZERO_CLASS`].
    pub class_of: Vec<u32>,
    pub classes: usize,
    pub logs: usize,
    tree_parent: Vec<u32>,
    tree_edge: Vec<Option<Edge>>,
    order: Vec<u32>,
}

impl Reduction {
    pub fn build(pi: &ProblemInstance) -> Reduction {
        let n = pi.n();
        let size = 1usize << n;
        let full = pi.full_mask();
        let mut uf = UnionFind::new(size);
        let mut edges: Vec<(u32, u32, Edge)> = Vec::new();
        for (rule, d) in pi.ground.determinations.iter().enumerate() {
            let pm = d.parent_mask();
            let t = 1u32 << d.target;
            let free = full & !pm & !t;
            let mut sub = free;
            loop {
                let set = pm | sub;
                if uf.union(set, set | t) {
                    edges.push((set, set | t, Edge::Det { rule: rule as u32, set }));
                }
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & free;
            }
        }
        for (g, group) in pi.symmetry.iter().enumerate() {
            for k in 0..group.permutations.len() {
                for set in 1..size as u32 {
                    if let Some(img) = group.image(k, set) {
                        if uf.union(set, img) {
                            let e = Edge::Sym { group: g as u16, permutation: k as u16, set };
                            edges.push((set, img, e));
                        }
                    }
                }
            }
        }
        let mut adj: Vec<Vec<(u32, usize)>> = vec![Vec::new(); size];
        for (k, &(a, b, _)) in edges.iter().enumerate() {
            adj[a as usize].push((b, k));
            adj[b as usize].push((a, k));
        }
        let mut class_of = vec![u32::MAX - 1; size];
        let mut tree_parent = vec![u32::MAX; size];
        let mut tree_edge = vec![None; size];
        let mut order = Vec::with_capacity(size);
        let mut classes = 0u32;
        for root in 0..size as u32 {
            if class_of[root as usize] != u32::MAX - 1 {
                continue;
            }
            let class = if root == 0 {
                ZERO_CLASS
            } else {
                classes += 1;
                classes - 1
            };
            class_of[root as usize] = class;
            let start = order.len();
            order.push(root);
            let mut head = start;
            while head < order.len() {
                let v = order[head];
                head += 1;
                for &(w, k) in &adj[v as usize] {
                    if class_of[w as usize] == u32::MAX - 1 {
                        class_of[w as usize] = class;
                        tree_parent[w as usize] = v;
                        tree_edge[w as usize] = Some(edges[k].2);
                        order.push(w);
                    }
                }
            }
        }
        Reduction {
            class_of,
            classes: classes as usize,
            logs: pi.log_names.len(),
            tree_parent,
            tree_edge,
            order,
        }
    }

    /// Total number of reduced coordinates: classes, logs, constant.
    pub fn dim(&self) -> usize {
        self.classes + self.logs + 1
    }

    pub fn constant_coord(&self) -> usize {
        self.classes + self.logs
    }

    /// Coordinates of a form in the reduced space.
    pub fn reduce(&self, f: &Form) -> BTreeMap<usize, Rational> {
        let mut out: BTreeMap<usize, Rational> = BTreeMap::new();
        for (m, c) in &f.sets {
            let k = self.class_of[*m as usize];
            if k != ZERO_CLASS {
                *out.entry(k as usize).or_insert_with(Rational::zero) += c;
            }
        }
        for (i, c) in &f.logs {
            *out.entry(self.classes + i).or_insert_with(Rational::zero) += c;
        }
        if !f.constant.is_zero() {
            out.insert(self.constant_coord(), f.constant.clone());
        }
        out.retain(|_, v| !v.is_zero());
        out
    }

    /// Determination and symmetry multipliers that cancel a residual whose
    /// reduced image is zero.
    pub fn lift(
        &self,
        pi: &ProblemInstance,
        residual: &Form,
    ) -> Result<Vec<(ConstraintId, Rational)>, ProverError> {
        if !residual.logs.is_empty() || !residual.constant.is_zero() {
            return Err(ProverError::Internal("residual outside the subset coordinates".into()));
        }
        let mut acc: Vec<Rational> = vec![Rational::zero(); self.class_of.len()];
        for (m, c) in &residual.sets {
            acc[*m as usize] = c.clone();
        }
        let mut out = Vec::new();
        for &v in self.order.iter().rev() {
            let s = std::mem::take(&mut acc[v as usize]);
            if s.is_zero() {
                continue;
            }
            let Some(edge) = self.tree_edge[v as usize] else {
                if v != 0 {
                    return Err(ProverError::Internal(format!(
                        "residual {s} left on class of {}",
                        pi.ground.describe_mask(v)
                    )));
                }
                continue;
            };
            let (a, _) = edge.ends(pi);
            let mult = if a == v { s.clone() } else { -s.clone() };
            out.push((edge.id(), mult));
            acc[self.tree_parent[v as usize] as usize] += s;
        }
        Ok(out)
    }
}
