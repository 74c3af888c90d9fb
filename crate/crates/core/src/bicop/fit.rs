use crate::deptools::{kendall_tau, tau_independence_p_value};
use crate::error::{Error, Result};
use crate::scalar::{lit, Scalar};
use crate::special::brent_minimize;

use super::{tau_to_theta, BivariateCopula, CopulaFamily, Rotation};

/// Minimum number of observation pairs accepted by [`fit`].
pub const MIN_OBSERVATIONS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FitMethod {
    /// Inversion of Kendall's tau.
    #[default]
    Itau,
    /// Maximum likelihood seeded at the tau-inversion estimate.
    Mle,
}

#[derive(Debug, Clone, Copy)]
pub struct FitOptions<T> {
    pub method: FitMethod,
    /// Significance level of the Kendall's tau independence test; pairs
    /// whose p-value exceeds it are modelled as independent.
    pub independence_threshold: T,
}

impl<T: Scalar> Default for FitOptions<T> {
    fn default() -> Self {
        FitOptions {
            method: FitMethod::Itau,
            independence_threshold: lit(0.01),
        }
    }
}

/// Selects and fits a pair-copula to `(u, v)` pseudo-observations.
///
/// Each family is fitted by tau inversion (and optionally refined by maximum
/// likelihood); the candidate with the largest log-likelihood wins. Rotations
/// of Clayton/Gumbel are chosen from the sign of the empirical tau.
pub fn fit<T: Scalar>(
    families: &[CopulaFamily],
    u: &[T],
    v: &[T],
    options: &FitOptions<T>,
) -> Result<BivariateCopula<T>> {
    if families.is_empty() {
        return Err(Error::EmptyFamilySet);
    }
    if u.len() != v.len() {
        return Err(Error::InvalidInput(format!(
            "observation columns differ in length ({} vs {})",
            u.len(),
            v.len()
        )));
    }
    if u.len() < MIN_OBSERVATIONS {
        return Err(Error::TooFewObservations {
            needed: MIN_OBSERVATIONS,
            got: u.len(),
        });
    }
    for (col, data) in [u, v].into_iter().enumerate() {
        if let Some(row) = data.iter().position(|&x| !(x > T::zero() && x < T::one())) {
            return Err(Error::OutsideUnitInterval {
                row,
                col,
                value: data[row].to_f64().unwrap_or(f64::NAN),
            });
        }
    }

    let tau = kendall_tau(u, v)?;
    if tau_independence_p_value(tau, u.len()) > options.independence_threshold {
        return Ok(BivariateCopula::independence());
    }
    let tau = tau.max(lit(-0.999)).min(lit(0.999));

    let mut best: Option<(T, BivariateCopula<T>)> = None;
    for &family in families {
        if family == CopulaFamily::Independence {
            if best.as_ref().is_none_or(|(b, _)| T::zero() > *b) {
                best = Some((T::zero(), BivariateCopula::independence()));
            }
            continue;
        }
        for rotation in candidate_rotations(family, tau) {
            let Ok(theta) = tau_to_theta(family, rotation, tau) else {
                continue;
            };
            let Ok(mut cop) = BivariateCopula::new(family, rotation, theta) else {
                continue;
            };
            if options.method == FitMethod::Mle {
                cop = refine_mle(cop, u, v);
            }
            let ll = cop.log_likelihood(u, v);
            if !ll.is_finite() {
                continue;
            }
            if best.as_ref().is_none_or(|(b, _)| ll > *b) {
                best = Some((ll, cop));
            }
        }
    }
    best.map(|(_, c)| c).ok_or_else(|| {
        Error::InvalidInput(format!(
            "no family in {families:?} can represent Kendall's tau {tau}"
        ))
    })
}

fn candidate_rotations<T: Scalar>(family: CopulaFamily, tau: T) -> Vec<Rotation> {
    if !family.is_rotatable() {
        return vec![Rotation::R0];
    }
    if tau > T::zero() {
        vec![Rotation::R0, Rotation::R180]
    } else {
        vec![Rotation::R90, Rotation::R270]
    }
}

fn parameter_bounds<T: Scalar>(family: CopulaFamily, start: T) -> (T, T) {
    match family {
        CopulaFamily::Gaussian => (lit(-0.9999), lit(0.9999)),
        CopulaFamily::Clayton => (lit(1e-4), lit(200.0)),
        CopulaFamily::Gumbel => (T::one(), lit(100.0)),
        CopulaFamily::Frank if start < T::zero() => (lit(-200.0), lit(-1e-4)),
        CopulaFamily::Frank => (lit(1e-4), lit(200.0)),
        CopulaFamily::Independence => (T::zero(), T::zero()),
    }
}

fn refine_mle<T: Scalar>(start: BivariateCopula<T>, u: &[T], v: &[T]) -> BivariateCopula<T> {
    let (family, rotation) = (start.family(), start.rotation());
    let (lo, hi) = parameter_bounds(family, start.theta());
    let x0 = start.theta().max(lo).min(hi);
    let neg_ll = |theta: T| match BivariateCopula::new(family, rotation, theta) {
        Ok(c) => {
            let ll = c.log_likelihood(u, v);
            if ll.is_finite() {
                -ll
            } else {
                T::infinity()
            }
        }
        Err(_) => T::infinity(),
    };
    let tol = lit::<T>(1e-8).max(T::epsilon().sqrt());
    let (theta, value) = brent_minimize(neg_ll, lo, hi, x0, tol, 200);
    match BivariateCopula::new(family, rotation, theta) {
        Ok(c) if value <= -start.log_likelihood(u, v) => c,
        _ => start,
    }
}
