//! The vine computational graph.
//!
//! Level `k` holds variable vertices `{l|S}` with `|S| = k` and copula
//! vertices `{l,r;S}`. A copula vertex reads its two parents `{l|S}` and
//! `{r|S}` and produces the children `{l|S+r}` (first h-function) and
//! `{r|S+l}` (second h-function).

mod dot;
mod fixtures;
mod model;
mod structure;
mod varset;

use std::fmt;

pub use dot::export_dot;
pub use fixtures::{appendix_path3, fig1a};
pub use model::VineModel;
pub use structure::{validate, VineStructure};
pub use varset::{VarSet, MAX_DIM};

/// A conditioned variable and its conditioning set, `{l|S}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VariableVertex {
    cond: VarSet,
    var: usize,
}

impl VariableVertex {
    pub fn new(var: usize, cond: VarSet) -> Self {
        debug_assert!(!cond.contains(var));
        VariableVertex { cond, var }
    }

    pub fn top(var: usize) -> Self {
        VariableVertex::new(var, VarSet::EMPTY)
    }

    pub fn var(&self) -> usize {
        self.var
    }

    pub fn cond(&self) -> VarSet {
        self.cond
    }

    pub fn level(&self) -> usize {
        self.cond.len()
    }

    /// Conditioned and conditioning variables together.
    pub fn full(&self) -> VarSet {
        self.cond.with(self.var)
    }

    pub fn key(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for VariableVertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.cond.is_empty() {
            write!(f, "{}", self.var)
        } else {
            write!(f, "{}|{}", self.var, self.cond)
        }
    }
}

/// A pair-copula vertex `{left,right;S}`.
///
/// Ordered by level, then conditioned pair, then conditioning set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CopulaVertex {
    left: usize,
    right: usize,
    cond: VarSet,
}

impl CopulaVertex {
    /// Stores the pair as given; [`validate`] reports `left >= right`.
    pub fn new(left: usize, right: usize, cond: VarSet) -> Self {
        CopulaVertex { left, right, cond }
    }

    /// Builds the vertex with its conditioned pair sorted.
    pub fn pair(a: usize, b: usize, cond: VarSet) -> Self {
        CopulaVertex::new(a.min(b), a.max(b), cond)
    }

    pub fn left(&self) -> usize {
        self.left
    }

    pub fn right(&self) -> usize {
        self.right
    }

    pub fn cond(&self) -> VarSet {
        self.cond
    }

    pub fn level(&self) -> usize {
        self.cond.len()
    }

    pub fn conditioned(&self) -> VarSet {
        VarSet::singleton(self.left).with(self.right)
    }

    /// Conditioned pair and conditioning set together.
    pub fn full(&self) -> VarSet {
        self.cond.with(self.left).with(self.right)
    }

    pub fn parents(&self) -> [VariableVertex; 2] {
        [
            VariableVertex::new(self.left, self.cond),
            VariableVertex::new(self.right, self.cond),
        ]
    }

    /// `{left|S+right}` then `{right|S+left}`.
    pub fn children(&self) -> [VariableVertex; 2] {
        [
            VariableVertex::new(self.left, self.cond.with(self.right)),
            VariableVertex::new(self.right, self.cond.with(self.left)),
        ]
    }

    /// The other conditioned variable, if `var` is one of the pair.
    pub fn opposite(&self, var: usize) -> Option<usize> {
        if var == self.left {
            Some(self.right)
        } else if var == self.right {
            Some(self.left)
        } else {
            None
        }
    }

    pub fn key(&self) -> String {
        self.to_string()
    }
}

impl Ord for CopulaVertex {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.level(), self.left, self.right, self.cond).cmp(&(
            other.level(),
            other.left,
            other.right,
            other.cond,
        ))
    }
}

impl PartialOrd for CopulaVertex {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for CopulaVertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.cond.is_empty() {
            write!(f, "{},{}", self.left, self.right)
        } else {
            write!(f, "{},{};{}", self.left, self.right, self.cond)
        }
    }
}

/// One failed structural condition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    DimensionTooSmall { d: usize },
    DimensionTooLarge { d: usize },
    /// A copula vertex is malformed on its own.
    BadVertex { vertex: String, reason: String },
    EdgeCount { level: usize, expected: usize, got: usize },
    /// A parent of a copula vertex is not a variable vertex of its level.
    Proximity { vertex: String, parent: String },
    DuplicateFullSet { level: usize, vertex: String },
    NotSpanningTree { level: usize, reason: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DimensionTooSmall { d } => write!(f, "dimension {d} is below 2"),
            Violation::DimensionTooLarge { d } => {
                write!(f, "dimension {d} exceeds the supported maximum {MAX_DIM}")
            }
            Violation::BadVertex { vertex, reason } => write!(f, "vertex {{{vertex}}}: {reason}"),
            Violation::EdgeCount { level, expected, got } => write!(
                f,
                "cardinality: level {level} has |E_{level}| = {got} != {expected} copula vertices"
            ),
            Violation::Proximity { vertex, parent } => write!(
                f,
                "proximity: parent {{{parent}}} of {{{vertex}}} is not a variable vertex of its level"
            ),
            Violation::DuplicateFullSet { level, vertex } => write!(
                f,
                "level {level}: {{{vertex}}} repeats the variable set of another copula vertex"
            ),
            Violation::NotSpanningTree { level, reason } => {
                write!(f, "spanning tree: level {level} skeleton {reason}")
            }
        }
    }
}
