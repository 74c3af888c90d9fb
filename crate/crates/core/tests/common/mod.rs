//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use statrs::distribution::{ContinuousCDF, Normal};

use vinecop::builder::rvine_structure;
use vinecop::{
    query, BivariateCopula, SamplingOrder, VarSet, VariableVertex, VineModel, VineStructure,
};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// R-vine selected by two-stage Kruskal on random weights.
pub fn random_rvine(d: usize, cond: VarSet, rng: &mut StdRng) -> VineStructure {
    rvine_structure(d, cond, |_| rng.random::<f64>()).expect("random weights always admit a vine")
}

/// Random R-, C- or D-vine.
pub fn random_vine(d: usize, rng: &mut StdRng) -> VineStructure {
    let mut perm: Vec<usize> = (0..d).collect();
    for i in (1..d).rev() {
        perm.swap(i, rng.random_range(0..=i));
    }
    match rng.random_range(0..3) {
        0 => VineStructure::cvine(&perm).unwrap(),
        1 => VineStructure::dvine(&perm).unwrap(),
        _ => random_rvine(d, VarSet::EMPTY, rng),
    }
}

/// Gaussian copula on every vertex with partial correlations from `rhos`.
pub fn gaussian_model(s: VineStructure, mut rho: impl FnMut() -> f64) -> VineModel<f64> {
    let copulas = s
        .levels()
        .iter()
        .map(|l| l.iter().map(|_| BivariateCopula::gaussian(rho()).unwrap()).collect())
        .collect();
    VineModel::new(s, copulas).unwrap()
}

fn submatrix(m: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
}

/// Correlation matrix of a Gaussian vine: each vertex parameter is the
/// partial correlation of its pair given its conditioning set.
pub fn gaussian_correlation(m: &VineModel<f64>) -> DMatrix<f64> {
    let d = m.d();
    let mut sig = DMatrix::<f64>::identity(d, d);
    for (e, c) in m.pairs() {
        let partial = if c.is_independence() { 0.0 } else { c.theta() };
        let (l, r) = (e.left(), e.right());
        let s = e.cond().to_vec();
        let value = if s.is_empty() {
            partial
        } else {
            let inv = submatrix(&sig, &s, &s).try_inverse().expect("positive definite");
            let a = submatrix(&sig, &[l], &s);
            let b = submatrix(&sig, &[r], &s);
            let va = 1.0 - (&a * &inv * a.transpose())[(0, 0)];
            let vb = 1.0 - (&b * &inv * b.transpose())[(0, 0)];
            (&a * &inv * b.transpose())[(0, 0)] + partial * (va * vb).sqrt()
        };
        sig[(l, r)] = value;
        sig[(r, l)] = value;
    }
    sig
}

pub fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).unwrap()
}

/// Log density of the Gaussian copula with correlation `sig` at `u`.
pub fn gaussian_copula_log_density(sig: &DMatrix<f64>, u: &[f64]) -> f64 {
    let n = std_normal();
    let z = DVector::from_iterator(u.len(), u.iter().map(|&x| n.inverse_cdf(x)));
    let inv = sig.clone().try_inverse().unwrap();
    let quad = (z.transpose() * (inv - DMatrix::identity(u.len(), u.len())) * &z)[(0, 0)];
    -0.5 * sig.determinant().ln() - 0.5 * quad
}

/// Brute-force Kendall tau-b.
pub fn tau_brute(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len();
    let (mut s, mut tx, mut ty) = (0i64, 0i64, 0i64);
    for i in 0..n {
        for j in i + 1..n {
            let a = (x[i] - x[j]).partial_cmp(&0.0).unwrap() as i64;
            let b = (y[i] - y[j]).partial_cmp(&0.0).unwrap() as i64;
            s += a * b;
            tx += (a != 0) as i64;
            ty += (b != 0) as i64;
        }
    }
    s as f64 / ((tx as f64) * (ty as f64)).sqrt()
}

/// Asymptotic standard error of sample Kendall's tau from the first-order
/// projection of its U-statistic kernel, estimated against `m` reference rows.
pub fn tau_std_error(x: &[f64], y: &[f64], m: usize) -> f64 {
    let n = x.len();
    let step = (n / m).max(1);
    let refs: Vec<usize> = (0..n).step_by(step).collect();
    let h: Vec<f64> = (0..n)
        .map(|i| {
            let s: f64 = refs
                .iter()
                .map(|&j| ((x[i] - x[j]) * (y[i] - y[j])).signum())
                .sum();
            s / refs.len() as f64
        })
        .collect();
    let mean = h.iter().sum::<f64>() / n as f64;
    let var = h.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (4.0 * var / n as f64).sqrt()
}

/// Every feasible order over the free variables, found by depth-first search
/// on the rule that the next variable, conditioned on all remaining ones,
/// must be a vertex of the graph.
pub fn feasible_orders(s: &VineStructure, cond: VarSet) -> Vec<Vec<usize>> {
    fn go(s: &VineStructure, cond: VarSet, rest: VarSet, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest == cond {
            out.push(cur.clone());
            return;
        }
        for x in rest.difference(cond).iter() {
            if s.contains(&VariableVertex::new(x, rest.without(x))) {
                cur.push(x);
                go(s, cond, rest.without(x), cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(s, cond, VarSet::full(s.d()), &mut Vec::new(), &mut out);
    out
}

/// Minimum and maximum h-call counts over all feasible orders.
pub fn exhaustive_extremes(s: &VineStructure, cond: VarSet) -> Option<(usize, usize)> {
    feasible_orders(s, cond)
        .into_iter()
        .map(|o| query(&SamplingOrder::new(s.d(), o, cond).unwrap(), s).unwrap())
        .fold(None, |acc, q| match acc {
            None => Some((q, q)),
            Some((lo, hi)) => Some((lo.min(q), hi.max(q))),
        })
}

/// Random family, rotation and tau on every vertex.
pub fn mixed_model(s: VineStructure, rng: &mut StdRng) -> VineModel<f64> {
    use vinecop::{CopulaFamily, Rotation};
    let copulas = s
        .levels()
        .iter()
        .map(|l| {
            l.iter()
                .map(|_| {
                    let family = CopulaFamily::ALL[rng.random_range(0..5)];
                    if family == CopulaFamily::Independence {
                        return BivariateCopula::independence();
                    }
                    let rotation = if family.is_rotatable() {
                        [Rotation::R0, Rotation::R90, Rotation::R180, Rotation::R270][rng.random_range(0..4)]
                    } else {
                        Rotation::R0
                    };
                    let mag = rng.random_range(0.05..0.8);
                    let tau = match rotation {
                        Rotation::R90 | Rotation::R270 => -mag,
                        _ if family.is_rotatable() => mag,
                        _ if rng.random::<bool>() => -mag,
                        _ => mag,
                    };
                    BivariateCopula::from_tau(family, rotation, tau).unwrap()
                })
                .collect()
        })
        .collect();
    VineModel::new(s, copulas).unwrap()
}
