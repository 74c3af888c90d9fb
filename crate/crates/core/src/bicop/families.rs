//! Unrotated kernels of each parametric family.
//!
//! Inputs are already clipped to the open unit square. `h1` is the conditional
//! CDF of the first argument given the second (`dC/dv`); all families here are
//! exchangeable at rotation 0, so the second h-function is `h1` with swapped
//! arguments.

use crate::scalar::{lit, Scalar};
use crate::special::{bvn_upper, newton_bisect, norm_cdf, norm_quantile, NoConvergence};

use super::CopulaFamily;

/// `ln(1 + e^x)` without overflow.
fn softplus<T: Scalar>(x: T) -> T {
    if x > lit(35.0) {
        x + (-x).exp()
    } else {
        x.exp().ln_1p()
    }
}

/// `ln(e^a + e^b - 1)` for `a, b >= 0`.
fn log_sum_exp_minus_one<T: Scalar>(a: T, b: T) -> T {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + ((lo - hi).exp() - (-hi).exp()).ln_1p()
}

pub(super) fn log_pdf<T: Scalar>(family: CopulaFamily, theta: T, u: T, v: T) -> T {
    match family {
        CopulaFamily::Independence => T::zero(),
        CopulaFamily::Gaussian => {
            let rho = theta;
            let (x, y) = (norm_quantile(u), norm_quantile(v));
            let one_m = T::one() - rho * rho;
            -one_m.ln() * lit(0.5)
                - (rho * rho * (x * x + y * y) - lit::<T>(2.0) * rho * x * y) / (lit::<T>(2.0) * one_m)
        }
        CopulaFamily::Clayton => {
            let (lu, lv) = (u.ln(), v.ln());
            let lt = log_sum_exp_minus_one(-theta * lu, -theta * lv);
            theta.ln_1p() - (T::one() + theta) * (lu + lv) - (lit::<T>(2.0) + theta.recip()) * lt
        }
        CopulaFamily::Gumbel => {
            let (x, y) = (-u.ln(), -v.ln());
            let (lx, ly) = (x.ln(), y.ln());
            let la = gumbel_log_a(theta, lx, ly);
            let a = la.exp();
            -a + x + y + (theta - T::one()) * (lx + ly) + (T::one() - lit::<T>(2.0) * theta) * la
                + (a + theta - T::one()).ln()
        }
        CopulaFamily::Frank => {
            let (theta, v) = frank_positive(theta, v);
            let a = -(-theta).exp_m1();
            theta.ln() + a.ln() - theta * (u + v) - lit::<T>(2.0) * frank_gap(theta, u, v).ln()
        }
    }
}

pub(super) fn cdf<T: Scalar>(family: CopulaFamily, theta: T, u: T, v: T) -> T {
    match family {
        CopulaFamily::Independence => u * v,
        CopulaFamily::Gaussian => bvn_upper(-norm_quantile(u), -norm_quantile(v), theta),
        CopulaFamily::Clayton => {
            let lt = log_sum_exp_minus_one(-theta * u.ln(), -theta * v.ln());
            (-lt / theta).exp()
        }
        CopulaFamily::Gumbel => {
            let (x, y) = (-u.ln(), -v.ln());
            (-gumbel_log_a(theta, x.ln(), y.ln()).exp()).exp()
        }
        CopulaFamily::Frank => {
            if theta < T::zero() {
                // C_{-t}(u, v) = u - C_t(u, 1 - v)
                return u - cdf(family, -theta, u, T::one() - v);
            }
            let a = -(-theta).exp_m1();
            (a.ln() - frank_gap(theta, u, v).ln()) / theta
        }
    }
}

/// `dC/dv`: conditional CDF of the first argument given the second.
pub(super) fn h1<T: Scalar>(family: CopulaFamily, theta: T, u: T, v: T) -> T {
    let h = match family {
        CopulaFamily::Independence => u,
        CopulaFamily::Gaussian => {
            let (x, y) = (norm_quantile(u), norm_quantile(v));
            norm_cdf((x - theta * y) / (T::one() - theta * theta).sqrt())
        }
        CopulaFamily::Clayton => {
            let lv = v.ln();
            let lt = log_sum_exp_minus_one(-theta * u.ln(), -theta * lv);
            (-(theta + T::one()) * lv - (theta.recip() + T::one()) * lt).exp()
        }
        CopulaFamily::Gumbel => {
            let (x, y) = (-u.ln(), -v.ln());
            let ly = y.ln();
            let la = gumbel_log_a(theta, x.ln(), ly);
            (-la.exp() + (T::one() - theta) * la + (theta - T::one()) * ly + y).exp()
        }
        CopulaFamily::Frank => {
            let (theta, v) = frank_positive(theta, v);
            let pu = -(-theta * u).exp_m1();
            pu * (-theta * v).exp() / frank_gap(theta, u, v)
        }
    };
    h.max(T::zero()).min(T::one())
}

/// Inverse of [`h1`] in its first argument.
pub(super) fn hinv1<T: Scalar>(family: CopulaFamily, theta: T, p: T, v: T) -> Result<T, NoConvergence> {
    let x = match family {
        CopulaFamily::Independence => p,
        CopulaFamily::Gaussian => {
            let s = (T::one() - theta * theta).sqrt();
            norm_cdf(norm_quantile(p) * s + theta * norm_quantile(v))
        }
        CopulaFamily::Clayton => {
            // u^-t = 1 + v^-t (p^(-t/(1+t)) - 1)
            let a = (-theta / (T::one() + theta) * p.ln()).exp_m1();
            if a <= T::zero() {
                T::zero()
            } else {
                (-softplus(a.ln() - theta * v.ln()) / theta).exp()
            }
        }
        CopulaFamily::Frank => {
            let (theta, v) = frank_positive(theta, v);
            let ev = (-theta * v).exp();
            let num = (T::one() - p) + p * (-theta * (T::one() - v)).exp();
            let den = ev + p * (T::one() - ev);
            v - (num.ln() - den.ln()) / theta
        }
        CopulaFamily::Gumbel => {
            let eps = T::clip_eps();
            let (lo, hi) = (eps, T::one() - eps);
            if h1(family, theta, lo, v) >= p {
                return Ok(lo);
            }
            if h1(family, theta, hi, v) <= p {
                return Ok(hi);
            }
            newton_bisect(
                |u| (h1(family, theta, u, v) - p, log_pdf(family, theta, u, v).exp()),
                lo,
                hi,
                p,
                T::root_tol(),
                200,
            )?
        }
    };
    Ok(x.max(T::zero()).min(T::one()))
}

/// Frank with a negative parameter is the positive one reflected in `v`.
fn frank_positive<T: Scalar>(theta: T, v: T) -> (T, T) {
    if theta < T::zero() {
        (-theta, T::one() - v)
    } else {
        (theta, v)
    }
}

/// `(1 - e^-t) - (1 - e^-tu)(1 - e^-tv)` as a sum of non-negative terms.
fn frank_gap<T: Scalar>(theta: T, u: T, v: T) -> T {
    let eu = (-theta * u).exp();
    let ev = (-theta * v).exp();
    -eu * (-theta * v).exp_m1() - ev * (-theta * (T::one() - v)).exp_m1()
}

/// `ln A` with `A = (x^t + y^t)^(1/t)`, given `ln x` and `ln y`.
fn gumbel_log_a<T: Scalar>(theta: T, lx: T, ly: T) -> T {
    let (a, b) = (theta * lx, theta * ly);
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    (hi + (lo - hi).exp().ln_1p()) / theta
}
