//! Sampling orders, source vertices and h-call scheduling.
//!
//! A traversal [`Plan`] is a dry run of the sampling walk over a structure.
//! The sampler executes the same plan, so the h-call count of an order is
//! known before any copula is evaluated.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::vcg::{VarSet, VariableVertex, VineStructure};

/// An ordered tuple of variables to sample, plus the conditioning variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SamplingOrder {
    d: usize,
    order: Vec<usize>,
    cond: VarSet,
}

impl SamplingOrder {
    pub fn new(d: usize, order: Vec<usize>, cond: VarSet) -> Result<Self> {
        if !cond.is_subset(VarSet::full(d.min(crate::vcg::MAX_DIM))) {
            return Err(Error::InvalidInput(format!(
                "conditioning set {{{cond}}} has indices outside 0..{}",
                d.saturating_sub(1)
            )));
        }
        let mut seen = VarSet::EMPTY;
        for &x in &order {
            if x >= d {
                return Err(Error::InvalidInput(format!(
                    "order variable {x} outside 0..{}",
                    d.saturating_sub(1)
                )));
            }
            if seen.contains(x) {
                return Err(Error::InvalidInput(format!("order repeats variable {x}")));
            }
            if cond.contains(x) {
                return Err(Error::InvalidInput(format!(
                    "order variable {x} is in the conditioning set"
                )));
            }
            seen = seen.with(x);
        }
        Ok(SamplingOrder { d, order, cond })
    }

    pub fn unconditional(d: usize, order: Vec<usize>) -> Result<Self> {
        SamplingOrder::new(d, order, VarSet::EMPTY)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn cond(&self) -> VarSet {
        self.cond
    }

    /// Variables neither in the order nor conditioned on.
    pub fn rest(&self) -> VarSet {
        VarSet::full(self.d)
            .difference(self.cond)
            .difference(self.order.iter().collect())
    }

    /// Whether every free variable but at most one is ordered.
    pub fn is_complete(&self) -> bool {
        self.rest().len() <= 1
    }

    #[must_use]
    pub fn extended(&self, x: usize) -> SamplingOrder {
        let mut order = self.order.clone();
        order.push(x);
        SamplingOrder {
            d: self.d,
            order,
            cond: self.cond,
        }
    }
}

impl fmt::Display for SamplingOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, x) in self.order.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{x}")?;
        }
        f.write_str(")")
    }
}

/// Source vertex of each variable, indexed by variable.
///
/// `order[i]` is conditioned on every variable not among `order[..=i]`;
/// all other variables start at their top vertex.
pub fn get_source(order: &SamplingOrder, s: &VineStructure) -> Result<Vec<VariableVertex>> {
    let d = s.d();
    if order.d() != d {
        return Err(Error::InvalidInput(format!(
            "order is for dimension {}, vine has {d}",
            order.d()
        )));
    }
    let mut sources: Vec<VariableVertex> = (0..d).map(VariableVertex::top).collect();
    let mut taken = VarSet::EMPTY;
    for &x in order.order() {
        taken = taken.with(x);
        let v = VariableVertex::new(x, VarSet::full(d).difference(taken));
        if !s.contains(&v) {
            return Err(Error::Infeasible(format!(
                "order {order} needs source vertex {{{v}}}, which is not in the vine"
            )));
        }
        sources[x] = v;
    }
    Ok(sources)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Step {
    /// Fresh uniforms for a source vertex of variable `var`.
    Seed { vertex: usize, var: usize },
    /// Observed values of conditioning variable `var`.
    Given { vertex: usize, var: usize },
    /// `target = hinv(child | opposite)` through copula `(level, idx)`.
    Up {
        target: usize,
        child: usize,
        opposite: usize,
        level: usize,
        idx: usize,
        left: bool,
    },
    /// `target = h(parent | opposite)` through copula `(level, idx)`.
    Down {
        target: usize,
        parent: usize,
        opposite: usize,
        level: usize,
        idx: usize,
        left: bool,
    },
    /// Copies `vertex` into output column `var`.
    Emit { var: usize, vertex: usize },
}

impl Step {
    pub(crate) fn reads(&self) -> impl Iterator<Item = usize> {
        let (a, b) = match *self {
            Step::Seed { .. } | Step::Given { .. } => (None, None),
            Step::Up { child, opposite, .. } => (Some(child), Some(opposite)),
            Step::Down { parent, opposite, .. } => (Some(parent), Some(opposite)),
            Step::Emit { vertex, .. } => (Some(vertex), None),
        };
        a.into_iter().chain(b)
    }

    pub(crate) fn writes(&self) -> Option<usize> {
        match *self {
            Step::Seed { vertex, .. } | Step::Given { vertex, .. } => Some(vertex),
            Step::Up { target, .. } | Step::Down { target, .. } => Some(target),
            Step::Emit { .. } => None,
        }
    }
}

/// A dry-run traversal with per-vertex consumer counts.
#[derive(Debug, Clone)]
pub(crate) struct Plan {
    pub(crate) steps: Vec<Step>,
    pub(crate) vertices: Vec<VariableVertex>,
    /// Number of steps reading each vertex.
    pub(crate) reads: Vec<usize>,
    pub(crate) h_calls: usize,
    pub(crate) hinv_calls: usize,
    pub(crate) peak_live: usize,
}

struct Planner<'a> {
    s: &'a VineStructure,
    ids: HashMap<VariableVertex, usize>,
    vertices: Vec<VariableVertex>,
    visited: Vec<bool>,
    used_up: HashSet<(usize, usize)>,
    steps: Vec<Step>,
    h_calls: usize,
    hinv_calls: usize,
}

impl<'a> Planner<'a> {
    fn new(s: &'a VineStructure) -> Self {
        Planner {
            s,
            ids: HashMap::new(),
            vertices: Vec::new(),
            visited: Vec::new(),
            used_up: HashSet::new(),
            steps: Vec::new(),
            h_calls: 0,
            hinv_calls: 0,
        }
    }

    fn id(&mut self, v: VariableVertex) -> usize {
        *self.ids.entry(v).or_insert_with(|| {
            self.vertices.push(v);
            self.visited.push(false);
            self.vertices.len() - 1
        })
    }

    fn is_visited(&mut self, v: VariableVertex) -> bool {
        let id = self.id(v);
        self.visited[id]
    }

    fn producer(&self, v: &VariableVertex) -> Result<(usize, usize)> {
        self.s
            .producer(v)
            .ok_or_else(|| Error::Infeasible(format!("vertex {{{v}}} is not in the vine")))
    }

    fn ensure(&mut self, v: VariableVertex) -> Result<usize> {
        if !self.is_visited(v) {
            self.down(v)?;
        }
        Ok(self.id(v))
    }

    /// Computes `v` from its producing copula by an h-function.
    fn down(&mut self, v: VariableVertex) -> Result<usize> {
        if v.cond().is_empty() {
            return Err(Error::Infeasible(format!(
                "top vertex {{{v}}} is needed before it is sampled"
            )));
        }
        let (level, idx) = self.producer(&v)?;
        let e = *self.s.vertex(level, idx);
        let oppo = e.opposite(v.var()).expect("producer holds the variable");
        let own = self.ensure(VariableVertex::new(v.var(), e.cond()))?;
        let opposite = self.ensure(VariableVertex::new(oppo, e.cond()))?;
        let target = self.id(v);
        self.steps.push(Step::Down {
            target,
            parent: own,
            opposite,
            level,
            idx,
            left: v.var() == e.left(),
        });
        self.visited[target] = true;
        self.h_calls += 1;
        Ok(target)
    }

    /// Moves from `v` to its parent with the same conditioned variable.
    fn up(&mut self, v: VariableVertex) -> Result<VariableVertex> {
        let (level, idx) = self.producer(&v)?;
        let e = *self.s.vertex(level, idx);
        let oppo = e.opposite(v.var()).expect("producer holds the variable");
        let opposite = self.ensure(VariableVertex::new(oppo, e.cond()))?;
        let up = VariableVertex::new(v.var(), e.cond());
        if !self.used_up.insert((level, idx)) || self.is_visited(up) {
            return Err(Error::Infeasible(format!(
                "two source paths meet at copula vertex {{{e}}}"
            )));
        }
        let child = self.id(v);
        let target = self.id(up);
        self.steps.push(Step::Up {
            target,
            child,
            opposite,
            level,
            idx,
            left: v.var() == e.left(),
        });
        self.visited[target] = true;
        self.hinv_calls += 1;
        Ok(up)
    }

    fn start(&mut self, v: VariableVertex, given: bool) -> Result<()> {
        let vertex = self.id(v);
        if self.visited[vertex] {
            return Err(Error::Infeasible(format!("source {{{v}}} is already computed")));
        }
        self.visited[vertex] = true;
        self.steps.push(if given {
            Step::Given { vertex, var: v.var() }
        } else {
            Step::Seed { vertex, var: v.var() }
        });
        Ok(())
    }

    fn finish(mut self) -> Plan {
        self.steps = low_memory_order(&self.steps, self.vertices.len());
        let mut reads = vec![0; self.vertices.len()];
        for st in &self.steps {
            for r in st.reads() {
                reads[r] += 1;
            }
        }
        let peak_live = simulate_live(&self.steps, &reads);
        Plan {
            steps: self.steps,
            vertices: self.vertices,
            reads,
            h_calls: self.h_calls,
            hinv_calls: self.hinv_calls,
            peak_live,
        }
    }
}

/// Secondary preference among ready steps with the same net memory change.
#[derive(Debug, Clone, Copy)]
enum TieBreak {
    Original,
    SeedsLast,
    DownsFirst,
    NearRelease,
    ShortLived,
    LongLived,
}

/// Reorders `steps` topologically so that stored vertices are released
/// early. A greedy list schedule runs under each [`TieBreak`] rule and the
/// order with the lowest peak wins; h-function counts are unaffected.
fn low_memory_order(steps: &[Step], n_vertices: usize) -> Vec<Step> {
    let rules = [
        TieBreak::Original,
        TieBreak::SeedsLast,
        TieBreak::DownsFirst,
        TieBreak::NearRelease,
        TieBreak::ShortLived,
        TieBreak::LongLived,
    ];
    rules
        .iter()
        .map(|&r| greedy_order(steps, n_vertices, r))
        .min_by_key(|o| {
            let mut reads = vec![0; n_vertices];
            for st in o {
                for r in st.reads() {
                    reads[r] += 1;
                }
            }
            simulate_live(o, &reads)
        })
        .unwrap_or_default()
}

fn greedy_order(steps: &[Step], n_vertices: usize, rule: TieBreak) -> Vec<Step> {
    let distinct = |st: &Step| {
        let mut r: Vec<usize> = st.reads().collect();
        r.sort_unstable();
        r.dedup();
        r
    };
    let inputs: Vec<Vec<usize>> = steps.iter().map(distinct).collect();
    let mut producer = vec![usize::MAX; n_vertices];
    for (i, st) in steps.iter().enumerate() {
        if let Some(w) = st.writes() {
            producer[w] = i;
        }
    }
    let mut consumers = vec![Vec::new(); n_vertices];
    let mut readers_left = vec![0usize; n_vertices];
    let mut pending = vec![0usize; steps.len()];
    for (i, ins) in inputs.iter().enumerate() {
        for &r in ins {
            consumers[r].push(i);
            readers_left[r] += 1;
            if producer[r] != usize::MAX {
                pending[i] += 1;
            }
        }
    }
    let key = |i: usize, readers_left: &[usize]| {
        let freed = inputs[i].iter().filter(|&&r| readers_left[r] == 1).count() as isize;
        let delta = steps[i].writes().is_some() as isize - freed;
        let fanout = steps[i].writes().map_or(0, |w| consumers[w].len()) as isize;
        let second = match rule {
            TieBreak::Original => 0,
            TieBreak::SeedsLast => matches!(steps[i], Step::Seed { .. } | Step::Given { .. }) as isize,
            TieBreak::DownsFirst => -(matches!(steps[i], Step::Down { .. }) as isize),
            TieBreak::NearRelease => {
                -(inputs[i].iter().filter(|&&r| readers_left[r] == 2).count() as isize)
            }
            TieBreak::ShortLived => fanout,
            TieBreak::LongLived => -fanout,
        };
        (delta, second, i)
    };
    let mut ready: BTreeSet<usize> = (0..steps.len()).filter(|&i| pending[i] == 0).collect();
    let mut out = Vec::with_capacity(steps.len());
    while let Some(i) = ready.iter().copied().min_by_key(|&i| key(i, &readers_left)) {
        ready.remove(&i);
        for &r in &inputs[i] {
            readers_left[r] -= 1;
        }
        if let Some(w) = steps[i].writes() {
            for &c in &consumers[w] {
                pending[c] -= 1;
                if pending[c] == 0 {
                    ready.insert(c);
                }
            }
        }
        out.push(steps[i]);
    }
    debug_assert_eq!(out.len(), steps.len());
    out
}

/// Largest number of simultaneously stored vertices when entries are freed
/// after their last read.
fn simulate_live(steps: &[Step], reads: &[usize]) -> usize {
    let mut left = reads.to_vec();
    let (mut live, mut peak) = (0usize, 0usize);
    for st in steps {
        if st.writes().is_some() {
            live += 1;
            peak = peak.max(live);
        }
        for r in st.reads() {
            left[r] -= 1;
            if left[r] == 0 {
                live -= 1;
            }
        }
        if let Some(w) = st.writes() {
            if left[w] == 0 {
                live -= 1;
            }
        }
    }
    peak
}

fn sorted_sources(sources: &[VariableVertex]) -> Vec<VariableVertex> {
    let mut v = sources.to_vec();
    v.sort_by_key(|s| (s.level(), s.var()));
    v
}

/// Plans sampling: sources are seeded from shallowest to deepest and walked
/// up to the top level. With `given_cond`, top vertices of the conditioning
/// variables are observed instead of sampled.
pub(crate) fn plan_sampling(order: &SamplingOrder, s: &VineStructure, given_cond: bool) -> Result<Plan> {
    let sources = get_source(order, s)?;
    let mut p = Planner::new(s);
    for src in sorted_sources(&sources) {
        let given = given_cond && src.cond().is_empty() && order.cond().contains(src.var());
        p.start(src, given)?;
        let mut cur = src;
        while !cur.cond().is_empty() {
            cur = p.up(cur)?;
        }
        // emitting at once lets the top column be freed after its last read
        let vertex = p.id(cur);
        p.steps.push(Step::Emit { var: cur.var(), vertex });
    }
    Ok(p.finish())
}

/// Plans the forward transform: all top vertices are observed and each
/// source is reached by h-functions.
pub(crate) fn plan_forward(order: &SamplingOrder, s: &VineStructure) -> Result<Plan> {
    let sources = get_source(order, s)?;
    let mut p = Planner::new(s);
    for j in 0..s.d() {
        p.start(VariableVertex::top(j), true)?;
    }
    for src in sorted_sources(&sources) {
        let vertex = p.ensure(src)?;
        p.steps.push(Step::Emit { var: src.var(), vertex });
    }
    Ok(p.finish())
}

/// Counts and memory figures of a sampling run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TraversalStats {
    pub h_calls: usize,
    pub hinv_calls: usize,
    pub peak_live: usize,
}

impl From<&Plan> for TraversalStats {
    fn from(p: &Plan) -> Self {
        TraversalStats {
            h_calls: p.h_calls,
            hinv_calls: p.hinv_calls,
            peak_live: p.peak_live,
        }
    }
}

/// Number of h-function evaluations sampling with `order` performs.
pub fn query(order: &SamplingOrder, s: &VineStructure) -> Result<usize> {
    Ok(plan_sampling(order, s, false)?.h_calls)
}

/// Full counts of the dry run for `order`.
pub fn traversal_stats(order: &SamplingOrder, s: &VineStructure) -> Result<TraversalStats> {
    Ok(TraversalStats::from(&plan_sampling(order, s, true)?))
}

/// Greedy bottom-up choice of a sampling order.
///
/// Starting from the deepest copula vertex, one conditioned variable is
/// peeled off per level: a free variable when only one of the pair is free,
/// otherwise the one whose extended order needs fewer h-calls (the left one
/// on ties). `worst` picks the costlier variable instead.
pub fn schedule(s: &VineStructure, cond: VarSet, worst: bool) -> Result<SamplingOrder> {
    let d = s.d();
    if !cond.is_subset(VarSet::full(d)) {
        return Err(Error::InvalidInput(format!(
            "conditioning set {{{cond}}} has indices outside 0..{}",
            d - 1
        )));
    }
    let free = VarSet::full(d).difference(cond);
    if free.is_empty() {
        return Err(Error::InvalidInput("no free variable to sample".into()));
    }
    let mut order = SamplingOrder::new(d, Vec::new(), cond)?;
    let mut remaining = VarSet::full(d);
    while remaining.len() > 1 && order.order().len() < free.len() {
        let (k, i) = s.find_full(remaining).ok_or_else(|| {
            Error::Infeasible(format!("no copula vertex joins {{{remaining}}}"))
        })?;
        let e = s.vertex(k, i);
        let (l, r) = (e.left(), e.right());
        let pick = match (free.contains(l), free.contains(r)) {
            (true, false) => l,
            (false, true) => r,
            (false, false) => {
                return Err(Error::Infeasible(format!(
                    "no feasible conditional order for {{{cond}}}: copula vertex {{{e}}} \
                     couples two conditioning variables"
                )))
            }
            (true, true) => {
                let ql = query(&order.extended(l), s)?;
                let qr = query(&order.extended(r), s)?;
                let take_left = if worst { ql >= qr } else { ql <= qr };
                if take_left {
                    l
                } else {
                    r
                }
            }
        };
        order = order.extended(pick);
        remaining = remaining.without(pick);
    }
    if order.order().len() < free.len() {
        let last = remaining.iter().next().expect("one variable remains");
        if !free.contains(last) {
            return Err(Error::Infeasible(format!(
                "no feasible conditional order for {{{cond}}}"
            )));
        }
        order = order.extended(last);
    }
    Ok(order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vcg::{appendix_path3, fig1a};

    fn ord(d: usize, o: &[usize]) -> SamplingOrder {
        SamplingOrder::unconditional(d, o.to_vec()).unwrap()
    }

    #[test]
    fn reference_vine_counts() {
        let s = fig1a();
        assert_eq!(query(&ord(5, &[0]), &s).unwrap(), 7);
        assert_eq!(query(&ord(5, &[0, 1]), &s).unwrap(), 4);
        assert_eq!(query(&ord(5, &[0, 3]), &s).unwrap(), 5);
        assert_eq!(query(&ord(5, &[0, 1, 3, 2, 4]), &s).unwrap(), 1);
        let best = schedule(&s, VarSet::EMPTY, false).unwrap();
        assert_eq!(best.order(), &[0, 1, 3, 2, 4]);
    }

    #[test]
    fn reference_vine_sources() {
        let s = fig1a();
        let src = get_source(&ord(5, &[0, 1, 3, 2, 4]), &s).unwrap();
        let keys: Vec<String> = src.iter().map(|v| v.key()).collect();
        assert_eq!(keys, ["0|1,2,3,4", "1|2,3,4", "2|4", "3|2,4", "4"]);
        let src = get_source(&ord(5, &[0]), &s).unwrap();
        let keys: Vec<String> = src.iter().map(|v| v.key()).collect();
        assert_eq!(keys, ["0|1,2,3,4", "1", "2", "3", "4"]);
    }

    #[test]
    fn path_vine_counts() {
        let s = appendix_path3();
        let a = plan_sampling(&ord(3, &[2, 1, 0]), &s, false).unwrap();
        let b = plan_sampling(&ord(3, &[0, 2, 1]), &s, false).unwrap();
        assert_eq!((a.h_calls, a.hinv_calls), (1, 3));
        assert_eq!((b.h_calls, b.hinv_calls), (0, 3));
    }

    #[test]
    fn infeasible_source_is_named() {
        let s = fig1a();
        let err = query(&ord(5, &[2]), &s).unwrap_err();
        assert!(err.to_string().contains("2|0,1,3,4"), "{err}");
    }

    #[test]
    fn conditional_schedule_uses_free_variables() {
        let s = fig1a();
        let cond: VarSet = [2, 4].into_iter().collect();
        let o = schedule(&s, cond, false).unwrap();
        assert_eq!(o.order().len(), 3);
        assert!(o.order().iter().all(|x| !cond.contains(*x)));
    }

    #[test]
    fn two_dimensional_order() {
        let s = VineStructure::dvine(&[0, 1]).unwrap();
        let src = get_source(&ord(2, &[0]), &s).unwrap();
        assert_eq!(src[0].key(), "0|1");
        assert_eq!(src[1].key(), "1");
        assert_eq!(query(&ord(2, &[0]), &s).unwrap(), 0);
    }
}
