use std::collections::{HashMap, HashSet};

use crate::error::{Error, Result};
use crate::union_find::DisjointSet;

use super::{CopulaVertex, VarSet, VariableVertex, Violation, MAX_DIM};

/// The graph of a vine without attached copulas.
///
/// Construction validates, so every value of this type is a valid VCG.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VineStructure {
    d: usize,
    levels: Vec<Vec<CopulaVertex>>,
    by_full: HashMap<VarSet, (usize, usize)>,
}

impl VineStructure {
    /// Groups `vertices` into levels by conditioning-set size and validates.
    pub fn new(d: usize, vertices: Vec<CopulaVertex>) -> Result<Self> {
        let violations = validate(d, &vertices);
        if !violations.is_empty() {
            return Err(Error::InvalidStructure(violations));
        }
        let mut levels = vec![Vec::new(); d - 1];
        for v in vertices {
            levels[v.level()].push(v);
        }
        for level in &mut levels {
            level.sort();
        }
        let by_full = levels
            .iter()
            .enumerate()
            .flat_map(|(k, l)| l.iter().enumerate().map(move |(i, e)| (e.full(), (k, i))))
            .collect();
        Ok(VineStructure { d, levels, by_full })
    }

    /// A C-vine whose level-`k` star is centred on `order[k]`.
    pub fn cvine(order: &[usize]) -> Result<Self> {
        let d = order.len();
        check_permutation(order)?;
        let mut vertices = Vec::new();
        let mut cond = VarSet::EMPTY;
        for (k, &c) in order.iter().enumerate().take(d.saturating_sub(1)) {
            for &x in &order[k + 1..] {
                vertices.push(CopulaVertex::pair(c, x, cond));
            }
            cond = cond.with(c);
        }
        VineStructure::new(d, vertices)
    }

    /// A D-vine on the level-0 path `path`.
    pub fn dvine(path: &[usize]) -> Result<Self> {
        let d = path.len();
        check_permutation(path)?;
        let mut vertices = Vec::new();
        for k in 0..d.saturating_sub(1) {
            for i in 0..d - k - 1 {
                let cond: VarSet = path[i + 1..=i + k].iter().collect();
                vertices.push(CopulaVertex::pair(path[i], path[i + k + 1], cond));
            }
        }
        VineStructure::new(d, vertices)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Copula vertices of levels `0..d-1`, each sorted.
    pub fn levels(&self) -> &[Vec<CopulaVertex>] {
        &self.levels
    }

    pub fn level(&self, k: usize) -> &[CopulaVertex] {
        &self.levels[k]
    }

    pub fn vertex(&self, level: usize, idx: usize) -> &CopulaVertex {
        &self.levels[level][idx]
    }

    /// All copula vertices, level by level.
    pub fn vertices(&self) -> impl Iterator<Item = &CopulaVertex> {
        self.levels.iter().flatten()
    }

    pub fn num_vertices(&self) -> usize {
        self.d * (self.d - 1) / 2
    }

    /// Position of the copula vertex with the given full variable set.
    pub fn find_full(&self, full: VarSet) -> Option<(usize, usize)> {
        self.by_full.get(&full).copied()
    }

    pub fn find(&self, v: &CopulaVertex) -> Option<(usize, usize)> {
        self.find_full(v.full())
            .filter(|&(k, i)| self.levels[k][i] == *v)
    }

    /// Copula vertex producing `v`, or `None` for top vertices and vertices
    /// absent from the graph.
    pub fn producer(&self, v: &VariableVertex) -> Option<(usize, usize)> {
        if v.cond().is_empty() {
            return None;
        }
        let (k, i) = self.find_full(v.full())?;
        self.levels[k][i].opposite(v.var()).map(|_| (k, i))
    }

    /// Whether `v` is a variable vertex of this graph.
    pub fn contains(&self, v: &VariableVertex) -> bool {
        if v.var() >= self.d || !v.cond().is_subset(VarSet::full(self.d)) {
            return false;
        }
        v.cond().is_empty() || self.producer(v).is_some()
    }

    /// Re-runs [`validate`]; empty for every constructed value.
    pub fn validate(&self) -> Vec<Violation> {
        validate(self.d, &self.vertices().copied().collect::<Vec<_>>())
    }
}

fn check_permutation(p: &[usize]) -> Result<()> {
    let mut seen = vec![false; p.len()];
    for &x in p {
        if x >= p.len() || std::mem::replace(&mut seen[x], true) {
            return Err(Error::InvalidInput(format!(
                "{p:?} is not a permutation of 0..{}",
                p.len()
            )));
        }
    }
    Ok(())
}

/// Skeleton node of one level: a variable vertex or a copula vertex.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum Node {
    Var(VariableVertex),
    Cop(VarSet),
}

/// Lists every violated VCG condition of `vertices` in dimension `d`.
pub fn validate(d: usize, vertices: &[CopulaVertex]) -> Vec<Violation> {
    if d < 2 {
        return vec![Violation::DimensionTooSmall { d }];
    }
    if d > MAX_DIM {
        return vec![Violation::DimensionTooLarge { d }];
    }
    let mut out = Vec::new();
    let all = VarSet::full(d);
    let mut levels: Vec<Vec<CopulaVertex>> = vec![Vec::new(); d - 1];
    for v in vertices {
        let bad = |reason: &str| Violation::BadVertex {
            vertex: v.to_string(),
            reason: reason.to_string(),
        };
        if v.left() >= d || v.right() >= d || !v.cond().is_subset(all) {
            out.push(bad(&format!("variable index outside 0..{}", d - 1)));
        } else if v.left() >= v.right() {
            out.push(bad("conditioned pair must satisfy left < right"));
        } else if !v.conditioned().is_disjoint(v.cond()) {
            out.push(bad("conditioned pair intersects the conditioning set"));
        } else {
            levels[v.level()].push(*v);
        }
    }

    for (k, level) in levels.iter().enumerate() {
        if level.len() != d - k - 1 {
            out.push(Violation::EdgeCount {
                level: k,
                expected: d - k - 1,
                got: level.len(),
            });
        }
        let mut seen = HashSet::new();
        for e in level {
            if !seen.insert(e.full()) {
                out.push(Violation::DuplicateFullSet {
                    level: k,
                    vertex: e.to_string(),
                });
            }
        }
    }

    for k in 0..d - 1 {
        let produced: HashSet<VariableVertex> = if k == 0 {
            (0..d).map(VariableVertex::top).collect()
        } else {
            levels[k - 1].iter().flat_map(|e| e.children()).collect()
        };
        let mut ds = DisjointSet::new();
        let mut cycle = false;
        for v in &produced {
            ds.insert(Node::Var(*v));
        }
        if k > 0 {
            for e in &levels[k - 1] {
                ds.insert(Node::Cop(e.full()));
                for c in e.children() {
                    cycle |= !ds.union(&Node::Cop(e.full()), &Node::Var(c));
                }
            }
        }
        for e in &levels[k] {
            let node = Node::Cop(e.full());
            if ds.contains(&node) {
                // duplicate full set, already reported
                continue;
            }
            ds.insert(node);
            for p in e.parents() {
                if produced.contains(&p) {
                    cycle |= !ds.union(&node, &Node::Var(p));
                } else {
                    out.push(Violation::Proximity {
                        vertex: e.to_string(),
                        parent: p.to_string(),
                    });
                }
            }
        }
        if cycle {
            out.push(Violation::NotSpanningTree {
                level: k,
                reason: "contains a cycle".into(),
            });
        }
        let components = ds.components();
        if components > 1 {
            out.push(Violation::NotSpanningTree {
                level: k,
                reason: format!("is disconnected ({components} components)"),
            });
        }
    }
    out
}
