//! Parametric bivariate (pair) copulas.
//!
//! A [`BivariateCopula`] couples the two parents `(u, v)` of a copula vertex.
//! `hfunc1` is the conditional CDF of `u` given `v`, `hfunc2` the conditional
//! CDF of `v` given `u`; `hinv1`/`hinv2` invert them in the conditioned
//! argument. All uniform inputs are clipped to `[eps, 1 - eps]` first.

mod families;
mod fit;

use std::fmt;
use std::str::FromStr;

pub use fit::{fit, FitMethod, FitOptions};

use crate::error::{Error, Result};
use crate::scalar::{clip_unit, lit, Scalar};
use crate::special::debye1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CopulaFamily {
    Independence,
    Gaussian,
    Clayton,
    Gumbel,
    Frank,
}

impl CopulaFamily {
    pub const ALL: [CopulaFamily; 5] = [
        CopulaFamily::Independence,
        CopulaFamily::Gaussian,
        CopulaFamily::Clayton,
        CopulaFamily::Gumbel,
        CopulaFamily::Frank,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CopulaFamily::Independence => "independence",
            CopulaFamily::Gaussian => "gaussian",
            CopulaFamily::Clayton => "clayton",
            CopulaFamily::Gumbel => "gumbel",
            CopulaFamily::Frank => "frank",
        }
    }

    /// Families that need rotations to reach negative dependence.
    pub fn is_rotatable(self) -> bool {
        matches!(self, CopulaFamily::Clayton | CopulaFamily::Gumbel)
    }

    pub fn parameter_count(self) -> usize {
        match self {
            CopulaFamily::Independence => 0,
            _ => 1,
        }
    }
}

impl fmt::Display for CopulaFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CopulaFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CopulaFamily::ALL
            .into_iter()
            .find(|f| f.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidInput(format!("unknown copula family `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub enum Rotation {
    #[default]
    R0,
    R90,
    R180,
    R270,
}

impl Rotation {
    pub fn degrees(self) -> u16 {
        match self {
            Rotation::R0 => 0,
            Rotation::R90 => 90,
            Rotation::R180 => 180,
            Rotation::R270 => 270,
        }
    }

    pub fn from_degrees(deg: i64) -> Option<Rotation> {
        match deg {
            0 => Some(Rotation::R0),
            90 => Some(Rotation::R90),
            180 => Some(Rotation::R180),
            270 => Some(Rotation::R270),
            _ => None,
        }
    }

    /// 90 and 270 degree rotations flip the sign of dependence.
    fn is_negative(self) -> bool {
        matches!(self, Rotation::R90 | Rotation::R270)
    }
}

impl fmt::Display for Rotation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.degrees())
    }
}

/// An immutable, validated pair-copula.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BivariateCopula<T> {
    family: CopulaFamily,
    rotation: Rotation,
    theta: T,
    tau: T,
}

impl<T: Scalar> BivariateCopula<T> {
    pub fn independence() -> Self {
        BivariateCopula {
            family: CopulaFamily::Independence,
            rotation: Rotation::R0,
            theta: T::zero(),
            tau: T::zero(),
        }
    }

    pub fn new(family: CopulaFamily, rotation: Rotation, theta: T) -> Result<Self> {
        check_rotation(family, rotation)?;
        check_parameter(family, theta)?;
        let theta = if family == CopulaFamily::Independence { T::zero() } else { theta };
        Ok(BivariateCopula {
            family,
            rotation,
            theta,
            tau: theta_to_tau(family, rotation, theta),
        })
    }

    pub fn gaussian(rho: T) -> Result<Self> {
        Self::new(CopulaFamily::Gaussian, Rotation::R0, rho)
    }

    pub fn from_tau(family: CopulaFamily, rotation: Rotation, tau: T) -> Result<Self> {
        let theta = tau_to_theta(family, rotation, tau)?;
        Self::new(family, rotation, theta)
    }

    pub fn family(&self) -> CopulaFamily {
        self.family
    }

    pub fn rotation(&self) -> Rotation {
        self.rotation
    }

    pub fn theta(&self) -> T {
        self.theta
    }

    /// Kendall's tau implied by the parameter.
    pub fn tau(&self) -> T {
        self.tau
    }

    pub fn is_independence(&self) -> bool {
        self.family == CopulaFamily::Independence
    }

    pub fn pdf(&self, u: T, v: T) -> T {
        self.log_pdf(u, v).exp()
    }

    pub fn log_pdf(&self, u: T, v: T) -> T {
        let (u, v) = (clip_unit(u), clip_unit(v));
        let one = T::one();
        let (a, b) = match self.rotation {
            Rotation::R0 => (u, v),
            Rotation::R90 => (one - u, v),
            Rotation::R180 => (one - u, one - v),
            Rotation::R270 => (u, one - v),
        };
        families::log_pdf(self.family, self.theta, a, b)
    }

    pub fn cdf(&self, u: T, v: T) -> T {
        let one = T::one();
        if u <= T::zero() || v <= T::zero() {
            return T::zero();
        }
        if u >= one {
            return v.min(one);
        }
        if v >= one {
            return u;
        }
        let (u, v) = (clip_unit(u), clip_unit(v));
        let base = |a: T, b: T| families::cdf(self.family, self.theta, a, b);
        let c = match self.rotation {
            Rotation::R0 => base(u, v),
            Rotation::R90 => v - base(one - u, v),
            Rotation::R180 => u + v - one + base(one - u, one - v),
            Rotation::R270 => u - base(u, one - v),
        };
        c.max(T::zero()).min(u.min(v))
    }

    /// Conditional CDF of the first argument given the second, `dC(u, v)/dv`.
    pub fn hfunc1(&self, u: T, v: T) -> T {
        if u <= T::zero() {
            return T::zero();
        }
        if u >= T::one() {
            return T::one();
        }
        let (u, v) = (clip_unit(u), clip_unit(v));
        let one = T::one();
        let h = |a: T, b: T| families::h1(self.family, self.theta, a, b);
        match self.rotation {
            Rotation::R0 => h(u, v),
            Rotation::R90 => one - h(one - u, v),
            Rotation::R180 => one - h(one - u, one - v),
            Rotation::R270 => h(u, one - v),
        }
    }

    /// Conditional CDF of the second argument given the first, `dC(u, v)/du`.
    pub fn hfunc2(&self, u: T, v: T) -> T {
        if v <= T::zero() {
            return T::zero();
        }
        if v >= T::one() {
            return T::one();
        }
        let (u, v) = (clip_unit(u), clip_unit(v));
        let one = T::one();
        // exchangeable at rotation 0: dC/du (u, v) = h1(v | u)
        let h = |a: T, b: T| families::h1(self.family, self.theta, b, a);
        match self.rotation {
            Rotation::R0 => h(u, v),
            Rotation::R90 => h(one - u, v),
            Rotation::R180 => one - h(one - u, one - v),
            Rotation::R270 => one - h(u, one - v),
        }
    }

    /// Solves `hfunc1(u, v) = p` for `u`.
    pub fn hinv1(&self, p: T, v: T) -> Result<T> {
        let (pc, v) = (clip_unit(p), clip_unit(v));
        let one = T::one();
        let inv = |q: T, b: T| {
            families::hinv1(self.family, self.theta, q, b).map_err(|_| Error::NonConvergence {
                family: self.family,
                p: p.to_f64().unwrap_or(f64::NAN),
                v: v.to_f64().unwrap_or(f64::NAN),
            })
        };
        Ok(match self.rotation {
            Rotation::R0 => inv(pc, v)?,
            Rotation::R90 => one - inv(one - pc, v)?,
            Rotation::R180 => one - inv(one - pc, one - v)?,
            Rotation::R270 => inv(pc, one - v)?,
        })
    }

    /// Solves `hfunc2(u, v) = p` for `v`.
    pub fn hinv2(&self, p: T, u: T) -> Result<T> {
        let (pc, u) = (clip_unit(p), clip_unit(u));
        let one = T::one();
        let inv = |q: T, a: T| {
            families::hinv1(self.family, self.theta, q, a).map_err(|_| Error::NonConvergence {
                family: self.family,
                p: p.to_f64().unwrap_or(f64::NAN),
                v: u.to_f64().unwrap_or(f64::NAN),
            })
        };
        Ok(match self.rotation {
            Rotation::R0 => inv(pc, u)?,
            Rotation::R90 => inv(pc, one - u)?,
            Rotation::R180 => one - inv(one - pc, one - u)?,
            Rotation::R270 => one - inv(one - pc, u)?,
        })
    }

    /// Sum of log densities over paired observations.
    pub fn log_likelihood(&self, u: &[T], v: &[T]) -> T {
        if self.is_independence() {
            return T::zero();
        }
        u.iter().zip(v).map(|(&a, &b)| self.log_pdf(a, b)).sum()
    }
}

fn check_rotation(family: CopulaFamily, rotation: Rotation) -> Result<()> {
    if rotation != Rotation::R0 && !family.is_rotatable() {
        return Err(Error::InvalidInput(format!(
            "{family} copula only supports rotation 0, got {rotation}"
        )));
    }
    Ok(())
}

fn check_parameter<T: Scalar>(family: CopulaFamily, theta: T) -> Result<()> {
    let bound = match family {
        CopulaFamily::Independence => return Ok(()),
        CopulaFamily::Gaussian if !(theta > -T::one() && theta < T::one()) => "rho in (-1, 1)",
        CopulaFamily::Clayton if !(theta > T::zero() && theta.is_finite()) => "theta in (0, inf)",
        CopulaFamily::Gumbel if !(theta >= T::one() && theta.is_finite()) => "theta in [1, inf)",
        CopulaFamily::Frank if !(theta != T::zero() && theta.is_finite()) => "theta in R \\ {0}",
        _ => return Ok(()),
    };
    Err(Error::Domain {
        family,
        theta: theta.to_f64().unwrap_or(f64::NAN),
        bound,
    })
}

/// Kendall's tau implied by a parameter, rotation included.
pub fn theta_to_tau<T: Scalar>(family: CopulaFamily, rotation: Rotation, theta: T) -> T {
    let two: T = lit(2.0);
    let tau = match family {
        CopulaFamily::Independence => T::zero(),
        CopulaFamily::Gaussian => two / T::PI() * theta.asin(),
        CopulaFamily::Clayton => theta / (theta + two),
        CopulaFamily::Gumbel => T::one() - theta.recip(),
        CopulaFamily::Frank => frank_tau(theta),
    };
    if rotation.is_negative() {
        -tau
    } else {
        tau
    }
}

fn frank_tau<T: Scalar>(theta: T) -> T {
    if theta < T::zero() {
        return -frank_tau(-theta);
    }
    if theta < lit(1e-3) {
        return theta / lit(9.0) - theta.powi(3) / lit(900.0);
    }
    let four: T = lit(4.0);
    T::one() - four / theta + four * debye1(theta) / theta
}

fn frank_tau_derivative<T: Scalar>(theta: T) -> T {
    if theta < lit(1e-3) {
        return T::one() / lit(9.0) - theta * theta / lit(300.0);
    }
    let four: T = lit(4.0);
    let t2 = theta * theta;
    four / t2 + four / (theta * theta.exp_m1()) - lit::<T>(8.0) * debye1(theta) / t2
}

/// Parameter attaining a given Kendall's tau (`|tau| <= 0.999`).
pub fn tau_to_theta<T: Scalar>(family: CopulaFamily, rotation: Rotation, tau: T) -> Result<T> {
    check_rotation(family, rotation)?;
    let out_of_range = || Error::TauOutOfRange {
        family,
        rotation,
        tau: tau.to_f64().unwrap_or(f64::NAN),
    };
    if !(tau.abs() <= lit(0.999)) {
        return Err(out_of_range());
    }
    // tau of the unrotated family
    let t = if rotation.is_negative() { -tau } else { tau };
    let two: T = lit(2.0);
    match family {
        CopulaFamily::Independence => {
            if t == T::zero() {
                Ok(T::zero())
            } else {
                Err(out_of_range())
            }
        }
        CopulaFamily::Gaussian => Ok((T::PI() * t / two).sin()),
        CopulaFamily::Clayton => {
            if t > T::zero() {
                Ok(two * t / (T::one() - t))
            } else {
                Err(out_of_range())
            }
        }
        CopulaFamily::Gumbel => {
            if t >= T::zero() {
                Ok((T::one() - t).recip())
            } else {
                Err(out_of_range())
            }
        }
        CopulaFamily::Frank => {
            if t == T::zero() {
                return Err(out_of_range());
            }
            let target = t.abs();
            // tau ~ theta/9 near 0 and ~ 1 - 4/theta for large theta
            let guess = if target < lit(0.1) {
                target * lit(9.0)
            } else {
                lit::<T>(4.0) / (T::one() - target)
            };
            let theta = crate::special::newton_bisect(
                |x| (frank_tau(x) - target, frank_tau_derivative(x)),
                T::zero(),
                lit(1e5),
                guess,
                lit::<T>(1e-12).max(T::epsilon() * lit(16.0)),
                200,
            )
            .map_err(|_| out_of_range())?;
            Ok(if t < T::zero() { -theta } else { theta })
        }
    }
}

#[cfg(test)]
mod tests;
