//! Structure selection and level-by-level fitting.
//!
//! Each level pairs variable vertices that share a conditioning set, fits a
//! pair-copula to the parents' pseudo-observations and derives the children
//! with h-functions. R-vines use a two-stage maximum spanning tree that
//! keeps the conditioning variables together on the deepest levels, which
//! is what makes conditional sampling on them possible.

mod dvine;
mod kruskal;

use std::collections::HashMap;

use crate::bicop::{fit, CopulaFamily, FitOptions};
use crate::deptools::{kendall_tau, PseudoObs};
use crate::error::{Error, Result};
use crate::scalar::{lit, Scalar};
use crate::scheduler::schedule;
use crate::vcg::{CopulaVertex, VarSet, VariableVertex, VineModel, VineStructure};

pub use dvine::dvine_path;
pub use kruskal::{candidate_edges, kruskal_two_stage, sort_candidates, Candidate};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StructureKind {
    #[default]
    RVine,
    CVine,
    DVine,
}

impl std::str::FromStr for StructureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rvine" => Ok(StructureKind::RVine),
            "cvine" => Ok(StructureKind::CVine),
            "dvine" => Ok(StructureKind::DVine),
            _ => Err(Error::InvalidInput(format!("unknown structure `{s}`"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BuildConfig<T> {
    /// Variables to be conditioned on when sampling later.
    pub cond_set: VarSet,
    pub kind: StructureKind,
    pub families: Vec<CopulaFamily>,
    pub fit: FitOptions<T>,
    /// Keeps the D-vine travel cost finite for independent pairs.
    pub tsp_epsilon: T,
}

impl<T: Scalar> Default for BuildConfig<T> {
    fn default() -> Self {
        BuildConfig {
            cond_set: VarSet::EMPTY,
            kind: StructureKind::RVine,
            families: CopulaFamily::ALL.to_vec(),
            fit: FitOptions::default(),
            tsp_epsilon: lit(1e-6),
        }
    }
}

impl<T: Scalar> BuildConfig<T> {
    fn check(&self, d: usize) -> Result<()> {
        if d < 2 {
            return Err(Error::InvalidInput(format!("need at least 2 variables, got {d}")));
        }
        if d > crate::vcg::MAX_DIM {
            return Err(Error::InvalidInput(format!(
                "at most {} variables are supported, got {d}",
                crate::vcg::MAX_DIM
            )));
        }
        if !self.cond_set.is_subset(VarSet::full(d)) {
            return Err(Error::InvalidInput(format!(
                "conditioning set {{{}}} has indices outside 0..{}",
                self.cond_set,
                d - 1
            )));
        }
        if self.cond_set.len() >= d {
            return Err(Error::InvalidInput(format!(
                "conditioning set {{{}}} leaves no variable to sample",
                self.cond_set
            )));
        }
        if !(self.fit.independence_threshold >= T::zero() && self.fit.independence_threshold <= T::one()) {
            return Err(Error::InvalidInput("independence test level must lie in [0, 1]".into()));
        }
        if self.families.is_empty() {
            return Err(Error::EmptyFamilySet);
        }
        Ok(())
    }
}

type Level<T> = Vec<(VariableVertex, Vec<T>)>;

/// Selects a structure of the configured kind and fits it.
pub fn build<T: Scalar>(obs: &PseudoObs<T>, cfg: &BuildConfig<T>) -> Result<VineModel<T>> {
    cfg.check(obs.d())?;
    let model = match cfg.kind {
        StructureKind::RVine => build_rvine(obs, cfg)?,
        StructureKind::CVine => build_cvine(obs, cfg)?,
        StructureKind::DVine => build_dvine(obs, cfg)?,
    };
    finish(model, cfg.cond_set)
}

/// Attaches the conditioning set and the scheduled default order.
fn finish<T: Scalar>(model: VineModel<T>, cond: VarSet) -> Result<VineModel<T>> {
    let order = schedule(model.structure(), cond, false)?;
    let cond = (!cond.is_empty()).then_some(cond);
    Ok(model
        .with_cond_set(cond)
        .with_default_order(Some(order.order().to_vec())))
}

/// Two-stage Kruskal R-vine.
pub fn build_rvine<T: Scalar>(obs: &PseudoObs<T>, cfg: &BuildConfig<T>) -> Result<VineModel<T>> {
    cfg.check(obs.d())?;
    let d = obs.d();
    grow(obs, cfg, |k, level| {
        let cands = candidate_edges(level)?;
        kruskal_two_stage(&cands, cfg.cond_set, k, d)
    })
}

/// C-vine whose centres are chosen by largest total `|tau|`.
pub fn build_cvine<T: Scalar>(obs: &PseudoObs<T>, cfg: &BuildConfig<T>) -> Result<VineModel<T>> {
    cfg.check(obs.d())?;
    let mut centres = VarSet::EMPTY;
    grow(obs, cfg, |k, level| {
        let star: Vec<&(VariableVertex, Vec<T>)> =
            level.iter().filter(|(v, _)| v.cond() == centres).collect();
        let want_cond = k < cfg.cond_set.len();
        let mut best: Option<(T, usize)> = None;
        for (i, (c, xc)) in star.iter().enumerate() {
            if cfg.cond_set.contains(c.var()) != want_cond {
                continue;
            }
            let mut score = T::zero();
            for (j, (_, xo)) in star.iter().enumerate() {
                if i != j {
                    score = score + kendall_tau(xc, xo)?.abs();
                }
            }
            if best.is_none_or(|(b, _)| score > b) {
                best = Some((score, i));
            }
        }
        let (_, ci) = best.ok_or_else(|| Error::Selection {
            level: k,
            reason: "no admissible centre variable".into(),
        })?;
        let centre = star[ci].0.var();
        let edges = star
            .iter()
            .filter(|(v, _)| v.var() != centre)
            .map(|(v, _)| CopulaVertex::pair(centre, v.var(), centres))
            .collect();
        centres = centres.with(centre);
        Ok(edges)
    })
}

/// Absolute Kendall's tau between every pair of columns.
pub fn tau_matrix<T: Scalar>(obs: &PseudoObs<T>) -> Result<Vec<Vec<T>>> {
    let d = obs.d();
    let mut w = vec![vec![T::zero(); d]; d];
    for i in 0..d {
        for j in i + 1..d {
            let t = kendall_tau(obs.column(i), obs.column(j))
                .map_err(|e| Error::InvalidInput(format!("columns {i} and {j}: {e}")))?
                .abs();
            w[i][j] = t;
            w[j][i] = t;
        }
    }
    Ok(w)
}

/// D-vine on a short Hamiltonian path with the conditioning variables adjacent.
pub fn build_dvine<T: Scalar>(obs: &PseudoObs<T>, cfg: &BuildConfig<T>) -> Result<VineModel<T>> {
    cfg.check(obs.d())?;
    let w = tau_matrix(obs)?;
    let path = dvine_path(&w, cfg.cond_set, cfg.tsp_epsilon);
    let structure = VineStructure::dvine(&path)?;
    fit_structure(obs, &structure, cfg)
}

/// Fits pair-copulas on a given structure.
pub fn fit_structure<T: Scalar>(
    obs: &PseudoObs<T>,
    structure: &VineStructure,
    cfg: &BuildConfig<T>,
) -> Result<VineModel<T>> {
    if structure.d() != obs.d() {
        return Err(Error::InvalidInput(format!(
            "structure has dimension {}, data has {} columns",
            structure.d(),
            obs.d()
        )));
    }
    grow(obs, cfg, |k, _| Ok(structure.level(k).to_vec()))
}

/// Level loop shared by all builders; `select` picks the copula vertices of
/// level `k` from that level's variable vertices.
fn grow<T: Scalar>(
    obs: &PseudoObs<T>,
    cfg: &BuildConfig<T>,
    mut select: impl FnMut(usize, &Level<T>) -> Result<Vec<CopulaVertex>>,
) -> Result<VineModel<T>> {
    let d = obs.d();
    let mut level: Level<T> = (0..d)
        .map(|j| (VariableVertex::top(j), obs.column(j).to_vec()))
        .collect();
    let mut pairs = Vec::with_capacity(d * (d - 1) / 2);
    for k in 0..d - 1 {
        let edges = select(k, &level)?;
        let index: HashMap<VariableVertex, usize> =
            level.iter().enumerate().map(|(i, (v, _))| (*v, i)).collect();
        let mut next: Level<T> = Vec::with_capacity(2 * edges.len());
        for e in edges {
            let [pl, pr] = e.parents();
            let (Some(&il), Some(&ir)) = (index.get(&pl), index.get(&pr)) else {
                return Err(Error::Selection {
                    level: k,
                    reason: format!("parents of {{{e}}} are not vertices of level {k}"),
                });
            };
            let (u, v) = (&level[il].1, &level[ir].1);
            let c = fit(&cfg.families, u, v, &cfg.fit)?;
            if k + 2 < d {
                let [cl, cr] = e.children();
                next.push((cl, u.iter().zip(v).map(|(&a, &b)| c.hfunc1(a, b)).collect()));
                next.push((cr, u.iter().zip(v).map(|(&a, &b)| c.hfunc2(a, b)).collect()));
            }
            pairs.push((e, c));
        }
        next.sort_by_key(|(v, _)| (v.cond(), v.var()));
        level = next;
    }
    VineModel::from_vertices(d, pairs)
}

/// Structure-only two-stage Kruskal R-vine with caller-supplied weights.
pub fn rvine_structure<F>(d: usize, cond: VarSet, mut weight: F) -> Result<VineStructure>
where
    F: FnMut(&CopulaVertex) -> f64,
{
    if d < 2 {
        return Err(Error::InvalidInput(format!("need at least 2 variables, got {d}")));
    }
    let mut level: Vec<VariableVertex> = (0..d).map(VariableVertex::top).collect();
    let mut all = Vec::new();
    for k in 0..d - 1 {
        let mut cands = Vec::new();
        for (i, a) in level.iter().enumerate() {
            for b in &level[i + 1..] {
                if a.cond() == b.cond() {
                    let vertex = CopulaVertex::pair(a.var(), b.var(), a.cond());
                    cands.push(Candidate {
                        vertex,
                        weight: weight(&vertex),
                    });
                }
            }
        }
        sort_candidates(&mut cands);
        let edges = kruskal_two_stage(&cands, cond, k, d)?;
        level = edges.iter().flat_map(|e| e.children()).collect();
        level.sort_by_key(|v| (v.cond(), v.var()));
        all.extend(edges);
    }
    VineStructure::new(d, all)
}
