use std::cmp::Ordering;

use crate::deptools::kendall_tau;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::union_find::DisjointSet;
use crate::vcg::{CopulaVertex, VarSet, VariableVertex};

/// A possible copula vertex and its selection weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate<T> {
    pub vertex: CopulaVertex,
    pub weight: T,
}

/// Heaviest first; ties by vertex order.
pub fn sort_candidates<T: Scalar>(c: &mut [Candidate<T>]) {
    c.sort_by(|a, b| {
        b.weight
            .partial_cmp(&a.weight)
            .unwrap_or(Ordering::Equal)
            .then_with(|| a.vertex.cmp(&b.vertex))
    });
}

/// Every pair of level vertices with equal conditioning sets, weighted by
/// `|tau|` of their pseudo-observations, sorted for [`kruskal_two_stage`].
pub fn candidate_edges<T: Scalar>(level: &[(VariableVertex, Vec<T>)]) -> Result<Vec<Candidate<T>>> {
    let mut out = Vec::new();
    for (i, (a, xa)) in level.iter().enumerate() {
        for (b, xb) in &level[i + 1..] {
            if a.cond() != b.cond() {
                continue;
            }
            let tau = kendall_tau(xa, xb).map_err(|e| {
                Error::InvalidInput(format!("cannot weigh pair {{{a}}}, {{{b}}}: {e}"))
            })?;
            out.push(Candidate {
                vertex: CopulaVertex::pair(a.var(), b.var(), a.cond()),
                weight: tau.abs(),
            });
        }
    }
    sort_candidates(&mut out);
    Ok(out)
}

/// Maximum spanning tree of one level, admitting a conditioning set.
///
/// Stage 1 scans only candidates whose variables all lie in `cond` and
/// stops after `|cond| - k - 1` edges; stage 2 scans everything left until
/// the level has `d - k - 1` edges. `candidates` must be sorted.
pub fn kruskal_two_stage<T: Scalar>(
    candidates: &[Candidate<T>],
    cond: VarSet,
    k: usize,
    d: usize,
) -> Result<Vec<CopulaVertex>> {
    let target = d - k - 1;
    let quota = cond.len().saturating_sub(k + 1);
    let mut ds = DisjointSet::new();
    let mut chosen = vec![false; candidates.len()];
    let mut out = Vec::with_capacity(target);

    let mut try_add = |i: usize, chosen: &mut [bool], out: &mut Vec<CopulaVertex>| {
        let [p, q] = candidates[i].vertex.parents();
        if ds.union(&p.full(), &q.full()) {
            chosen[i] = true;
            out.push(candidates[i].vertex);
        }
    };

    for (i, c) in candidates.iter().enumerate() {
        if out.len() >= quota {
            break;
        }
        if c.vertex.full().is_subset(cond) {
            try_add(i, &mut chosen, &mut out);
        }
    }
    if out.len() < quota {
        return Err(Error::Selection {
            level: k,
            reason: format!(
                "only {} of {quota} copula vertices fit inside the conditioning set {{{cond}}}",
                out.len()
            ),
        });
    }
    for i in 0..candidates.len() {
        if out.len() >= target {
            break;
        }
        if !chosen[i] {
            try_add(i, &mut chosen, &mut out);
        }
    }
    if out.len() < target {
        return Err(Error::Selection {
            level: k,
            reason: format!(
                "proximity allows only {} of {target} copula vertices",
                out.len()
            ),
        });
    }
    Ok(out)
}
