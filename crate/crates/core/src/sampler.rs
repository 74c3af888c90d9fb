//! Inverse Rosenblatt sampling, the forward transform and vine densities.
//!
//! Every column kernel runs over whole batches. Intermediate columns live in
//! a workspace indexed by plan vertex and are freed after their last read.
//!
//! Uniforms for a source vertex come from a ChaCha8 stream selected by
//! `seed` and the FNV-1a hash of the vertex key (`"3|2,4"`); row `i` uses the
//! `i`-th 64-bit word, mapped to `((x >> 11) + 0.5) / 2^53`. Results thus
//! depend only on the seed and the source vertices, not on traversal order.

use std::collections::HashMap;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::deptools::{PseudoObs, SampleBatch};
use crate::error::{Error, Result};
use crate::scalar::{clip_unit, lit, Scalar};
use crate::scheduler::{plan_forward, plan_sampling, Plan, SamplingOrder, Step, TraversalStats};
use crate::vcg::{VarSet, VariableVertex, VineModel};

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| {
        (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3)
    })
}

/// The uniforms a sampling run with `seed` assigns to `source`.
pub fn source_uniforms<T: Scalar>(seed: u64, source: &VariableVertex, n: usize) -> Vec<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(fnv1a(source.key().as_bytes()));
    (0..n)
        .map(|_| {
            let x = rng.next_u64() >> 11;
            clip_unit(lit((x as f64 + 0.5) * (-53f64).exp2()))
        })
        .collect()
}

struct Workspace<T> {
    memo: Vec<Option<Vec<T>>>,
    left: Vec<usize>,
    live: usize,
    peak: usize,
}

impl<T: Scalar> Workspace<T> {
    fn new(plan: &Plan) -> Self {
        Workspace {
            memo: vec![None; plan.vertices.len()],
            left: plan.reads.clone(),
            live: 0,
            peak: 0,
        }
    }

    fn store(&mut self, id: usize, col: Vec<T>) {
        self.memo[id] = Some(col);
        self.live += 1;
        self.peak = self.peak.max(self.live);
        if self.left[id] == 0 {
            self.drop_entry(id);
        }
    }

    fn get(&self, id: usize) -> &[T] {
        self.memo[id].as_deref().expect("plan reads only computed vertices")
    }

    fn release(&mut self, id: usize) {
        self.left[id] -= 1;
        if self.left[id] == 0 {
            self.drop_entry(id);
        }
    }

    fn drop_entry(&mut self, id: usize) {
        if self.memo[id].take().is_some() {
            self.live -= 1;
        }
    }
}

/// Runs `plan`; `init` supplies the columns of seeded and observed vertices.
fn execute<T: Scalar>(
    m: &VineModel<T>,
    plan: &Plan,
    mut init: impl FnMut(&Step, &VariableVertex) -> Vec<T>,
) -> Result<(Vec<Option<Vec<T>>>, TraversalStats)> {
    let mut ws = Workspace::new(plan);
    let mut out: Vec<Option<Vec<T>>> = vec![None; m.d()];
    let mut stats = TraversalStats::default();
    for st in &plan.steps {
        match *st {
            Step::Seed { vertex, .. } | Step::Given { vertex, .. } => {
                let col = init(st, &plan.vertices[vertex]);
                ws.store(vertex, col);
            }
            Step::Up {
                target,
                child,
                opposite,
                level,
                idx,
                left,
            } => {
                let c = m.copula(level, idx);
                let (p, o) = (ws.get(child), ws.get(opposite));
                let col = p
                    .iter()
                    .zip(o)
                    .map(|(&p, &o)| if left { c.hinv1(p, o) } else { c.hinv2(p, o) })
                    .collect::<Result<Vec<T>>>()?;
                stats.hinv_calls += 1;
                ws.store(target, col);
                ws.release(child);
                ws.release(opposite);
            }
            Step::Down {
                target,
                parent,
                opposite,
                level,
                idx,
                left,
            } => {
                let c = m.copula(level, idx);
                let (p, o) = (ws.get(parent), ws.get(opposite));
                let col: Vec<T> = p
                    .iter()
                    .zip(o)
                    .map(|(&p, &o)| if left { c.hfunc1(p, o) } else { c.hfunc2(o, p) })
                    .collect();
                stats.h_calls += 1;
                ws.store(target, col);
                ws.release(parent);
                ws.release(opposite);
            }
            Step::Emit { var, vertex } => {
                out[var] = Some(ws.get(vertex).to_vec());
                ws.release(vertex);
            }
        }
    }
    stats.peak_live = ws.peak;
    Ok((out, stats))
}

fn check_order<T: Scalar>(m: &VineModel<T>, order: &SamplingOrder) -> Result<()> {
    if order.d() != m.d() {
        return Err(Error::InvalidInput(format!(
            "order is for dimension {}, model has {}",
            order.d(),
            m.d()
        )));
    }
    if !order.is_complete() {
        return Err(Error::InvalidInput(format!(
            "order {order} leaves more than one free variable unordered"
        )));
    }
    Ok(())
}

fn collect_columns<T: Scalar>(out: Vec<Option<Vec<T>>>) -> SampleBatch<T> {
    PseudoObs::from_columns_unchecked(
        out.into_iter()
            .map(|c| c.expect("every variable is emitted"))
            .collect(),
    )
}

/// Draws `n` samples; column `j` is variable `j`.
pub fn sample<T: Scalar>(
    m: &VineModel<T>,
    n: usize,
    order: &SamplingOrder,
    seed: u64,
) -> Result<SampleBatch<T>> {
    Ok(sample_with_stats(m, n, order, seed)?.0)
}

/// [`sample`] plus the counts measured while it ran.
pub fn sample_with_stats<T: Scalar>(
    m: &VineModel<T>,
    n: usize,
    order: &SamplingOrder,
    seed: u64,
) -> Result<(SampleBatch<T>, TraversalStats)> {
    if !order.cond().is_empty() {
        return Err(Error::InvalidInput(
            "order is conditional; use sample_conditional".into(),
        ));
    }
    sample_impl(m, n, order, seed, &HashMap::new())
}

fn sample_impl<T: Scalar>(
    m: &VineModel<T>,
    n: usize,
    order: &SamplingOrder,
    seed: u64,
    given: &HashMap<usize, T>,
) -> Result<(SampleBatch<T>, TraversalStats)> {
    if n == 0 {
        return Err(Error::InvalidInput("sample size must be at least 1".into()));
    }
    check_order(m, order)?;
    let plan = plan_sampling(order, m.structure(), true)?;
    let (out, stats) = execute(m, &plan, |st, v| match st {
        Step::Given { var, .. } => vec![given[var]; n],
        _ => source_uniforms(seed, v, n),
    })?;
    Ok((collect_columns(out), stats))
}

fn check_conditioning<T: Scalar>(order: &SamplingOrder, values: &[(usize, T)]) -> Result<HashMap<usize, T>> {
    let keys: VarSet = values.iter().map(|p| p.0).filter(|&k| k < order.d()).collect();
    if keys != order.cond() || values.len() != order.cond().len() {
        return Err(Error::InvalidInput(format!(
            "conditioning values are given for {:?}, the order conditions on {{{}}}",
            values.iter().map(|p| p.0).collect::<Vec<_>>(),
            order.cond()
        )));
    }
    for &(var, u) in values {
        if !(u > T::zero() && u < T::one()) {
            return Err(Error::OutsideUnitInterval {
                row: 0,
                col: var,
                value: u.to_f64().unwrap_or(f64::NAN),
            });
        }
    }
    Ok(values.iter().copied().collect())
}

/// Draws `n` samples of the free variables given fixed values of the
/// conditioning variables; conditioned columns repeat the given values.
pub fn sample_conditional<T: Scalar>(
    m: &VineModel<T>,
    n: usize,
    values: &[(usize, T)],
    order: &SamplingOrder,
    seed: u64,
) -> Result<SampleBatch<T>> {
    Ok(sample_conditional_with_stats(m, n, values, order, seed)?.0)
}

pub fn sample_conditional_with_stats<T: Scalar>(
    m: &VineModel<T>,
    n: usize,
    values: &[(usize, T)],
    order: &SamplingOrder,
    seed: u64,
) -> Result<(SampleBatch<T>, TraversalStats)> {
    let given = check_conditioning(order, values)?;
    sample_impl(m, n, order, seed, &given)
}

/// Quantiles of the single free variable given the conditioning values.
pub fn conditional_quantile<T: Scalar>(
    m: &VineModel<T>,
    values: &[(usize, T)],
    alphas: &[T],
    order: &SamplingOrder,
) -> Result<Vec<T>> {
    let given = check_conditioning(order, values)?;
    check_order(m, order)?;
    let free = VarSet::full(m.d()).difference(order.cond());
    if free.len() != 1 || order.order().len() != 1 {
        return Err(Error::InvalidInput(format!(
            "conditional quantiles need exactly one free variable, found {}",
            free.len()
        )));
    }
    if alphas.is_empty() {
        return Ok(Vec::new());
    }
    if let Some(i) = alphas.iter().position(|&a| !(a > T::zero() && a < T::one())) {
        return Err(Error::OutsideUnitInterval {
            row: i,
            col: order.order()[0],
            value: alphas[i].to_f64().unwrap_or(f64::NAN),
        });
    }
    let n = alphas.len();
    let plan = plan_sampling(order, m.structure(), true)?;
    let (mut out, _) = execute(m, &plan, |st, _| match st {
        Step::Given { var, .. } => vec![given[var]; n],
        _ => alphas.to_vec(),
    })?;
    Ok(out[order.order()[0]].take().expect("free variable is emitted"))
}

/// Maps data to the independent uniforms that `order` would have seeded.
pub fn rosenblatt<T: Scalar>(
    m: &VineModel<T>,
    data: &PseudoObs<T>,
    order: &SamplingOrder,
) -> Result<PseudoObs<T>> {
    if data.d() != m.d() {
        return Err(Error::InvalidInput(format!(
            "data has {} columns, model has {}",
            data.d(),
            m.d()
        )));
    }
    check_order(m, order)?;
    let plan = plan_forward(order, m.structure())?;
    let (out, _) = execute(m, &plan, |_, v| data.column(v.var()).to_vec())?;
    Ok(collect_columns(out))
}

/// Log copula density of each row.
pub fn log_density<T: Scalar>(m: &VineModel<T>, data: &PseudoObs<T>) -> Result<Vec<T>> {
    if data.d() != m.d() {
        return Err(Error::InvalidInput(format!(
            "data has {} columns, model has {}",
            data.d(),
            m.d()
        )));
    }
    let n = data.n();
    let mut cols: HashMap<VariableVertex, Vec<T>> = (0..m.d())
        .map(|j| (VariableVertex::top(j), data.column(j).to_vec()))
        .collect();
    let mut total = vec![T::zero(); n];
    for (k, level) in m.structure().levels().iter().enumerate() {
        let mut next = HashMap::new();
        for (i, e) in level.iter().enumerate() {
            let c = m.copula(k, i);
            let [pl, pr] = e.parents();
            let (u, v) = (&cols[&pl], &cols[&pr]);
            if !c.is_independence() {
                for (t, (&a, &b)) in total.iter_mut().zip(u.iter().zip(v)) {
                    *t = *t + c.log_pdf(a, b);
                }
            }
            if k + 2 < m.d() {
                let [cl, cr] = e.children();
                next.insert(cl, u.iter().zip(v).map(|(&a, &b)| c.hfunc1(a, b)).collect());
                next.insert(cr, u.iter().zip(v).map(|(&a, &b)| c.hfunc2(a, b)).collect());
            }
        }
        cols = next;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bicop::BivariateCopula;
    use crate::scheduler::query;
    use crate::vcg::{fig1a, VineStructure};

    fn gaussian_fig1a() -> VineModel<f64> {
        VineModel::uniform(fig1a(), BivariateCopula::gaussian(0.4).unwrap())
    }

    #[test]
    fn independence_passes_uniforms_through() {
        let s = VineStructure::dvine(&[0, 1]).unwrap();
        let m = VineModel::<f64>::independence(s);
        let order = SamplingOrder::unconditional(2, vec![0, 1]).unwrap();
        let x = sample(&m, 1000, &order, 7).unwrap();
        let u0 = source_uniforms::<f64>(7, &VariableVertex::new(0, VarSet::singleton(1)), 1000);
        let u1 = source_uniforms::<f64>(7, &VariableVertex::top(1), 1000);
        assert_eq!(x.column(0), &u0[..]);
        assert_eq!(x.column(1), &u1[..]);
    }

    #[test]
    fn instrumented_count_matches_query() {
        let m = gaussian_fig1a();
        let order = SamplingOrder::unconditional(5, vec![0, 1, 3, 2, 4]).unwrap();
        let (_, stats) = sample_with_stats(&m, 10, &order, 1).unwrap();
        assert_eq!(stats.h_calls, 1);
        assert_eq!(stats.h_calls, query(&order, m.structure()).unwrap());
    }

    #[test]
    fn conditional_columns_are_constant() {
        let m = gaussian_fig1a();
        let cond: VarSet = [2, 4].into_iter().collect();
        let order = SamplingOrder::new(5, vec![0, 1, 3], cond).unwrap();
        let x = sample_conditional(&m, 50, &[(2, 0.3), (4, 0.8)], &order, 3).unwrap();
        assert!(x.column(2).iter().all(|&v| v == 0.3));
        assert!(x.column(4).iter().all(|&v| v == 0.8));
    }

    #[test]
    fn rosenblatt_inverts_sampling() {
        let m = gaussian_fig1a();
        let order = SamplingOrder::unconditional(5, vec![0, 1, 3, 2, 4]).unwrap();
        let x = sample(&m, 100, &order, 11).unwrap();
        let w = rosenblatt(&m, &x, &order).unwrap();
        let sources = crate::scheduler::get_source(&order, m.structure()).unwrap();
        for (j, src) in sources.iter().enumerate() {
            let u = source_uniforms::<f64>(11, src, 100);
            for (a, b) in w.column(j).iter().zip(&u) {
                assert!((a - b).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn independence_density_is_zero() {
        let m = VineModel::<f64>::independence(fig1a());
        let data = PseudoObs::from_rows(&[vec![0.1, 0.2, 0.3, 0.4, 0.5]]).unwrap();
        assert_eq!(log_density(&m, &data).unwrap(), vec![0.0]);
    }
}
