//! Special functions and small numerical routines shared by the copula kernels.
//!
//! Everything here is generic over [`Scalar`]; coefficients are stored as `f64`
//! and converted on use.

use crate::scalar::{lit, Scalar};

const SQRT_2PI: f64 = 2.506_628_274_631_000_5;

/// Standard normal density.
pub fn norm_pdf<T: Scalar>(x: T) -> T {
    (-(x * x) * lit(0.5)).exp() / lit(SQRT_2PI)
}

/// Standard normal CDF, Hart's double precision rational approximation.
pub fn norm_cdf<T: Scalar>(x: T) -> T {
    let upper_tail = norm_upper_tail(x.abs());
    if x > T::zero() {
        T::one() - upper_tail
    } else {
        upper_tail
    }
}

/// `P(Z > x)` for `x >= 0`.
fn norm_upper_tail<T: Scalar>(ax: T) -> T {
    if ax > lit(37.0) {
        return T::zero();
    }
    let e = (-(ax * ax) * lit(0.5)).exp();
    if ax < lit(7.071_067_811_865_47) {
        const NUM: [f64; 7] = [
            3.526_249_659_989_11e-2,
            0.700_383_064_443_688,
            6.373_962_203_531_65,
            33.912_866_078_383,
            112.079_291_497_871,
            221.213_596_169_931,
            220.206_867_912_376,
        ];
        const DEN: [f64; 8] = [
            8.838_834_764_831_84e-2,
            1.755_667_163_182_64,
            16.064_177_579_207,
            86.780_732_202_946_1,
            296.564_248_779_674,
            637.333_633_378_831,
            793.826_512_519_948,
            440.413_735_824_752,
        ];
        e * horner(&NUM, ax) / horner(&DEN, ax)
    } else {
        let mut b = ax + lit(0.65);
        b = ax + lit::<T>(4.0) / b;
        b = ax + lit::<T>(3.0) / b;
        b = ax + lit::<T>(2.0) / b;
        b = ax + T::one() / b;
        e / b / lit(SQRT_2PI)
    }
}

/// Evaluates a polynomial with coefficients ordered from highest degree down.
fn horner<T: Scalar>(coef: &[f64], x: T) -> T {
    coef.iter().fold(T::zero(), |acc, &c| acc * x + lit(c))
}

/// Standard normal quantile (Wichura's AS241, PPND16).
pub fn norm_quantile<T: Scalar>(p: T) -> T {
    if p <= T::zero() {
        return T::neg_infinity();
    }
    if p >= T::one() {
        return T::infinity();
    }
    let pf = p.to_f64().unwrap_or(0.5);
    let q = pf - 0.5;
    let x = if q.abs() <= 0.425 {
        let r = 0.180_625 - q * q;
        q * horner_rev(&AS241_A, r) / horner_rev(&AS241_B, r)
    } else {
        let mut r = if q < 0.0 { pf } else { 1.0 - pf };
        r = (-r.ln()).sqrt();
        let val = if r <= 5.0 {
            let r = r - 1.6;
            horner_rev(&AS241_C, r) / horner_rev(&AS241_D, r)
        } else {
            let r = r - 5.0;
            horner_rev(&AS241_E, r) / horner_rev(&AS241_F, r)
        };
        if q < 0.0 {
            -val
        } else {
            val
        }
    };
    lit(x)
}

fn horner_rev(coef: &[f64; 8], x: f64) -> f64 {
    coef.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

const AS241_A: [f64; 8] = [
    3.387_132_872_796_366_5,
    133.141_667_891_784_38,
    1_971.590_950_306_551_3,
    13_731.693_765_509_46,
    45_921.953_931_549_87,
    67_265.770_927_008_7,
    33_430.575_583_588_13,
    2_509.080_928_730_122_7,
];
const AS241_B: [f64; 8] = [
    1.0,
    42.313_330_701_600_91,
    687.187_007_492_057_9,
    5_394.196_021_424_751,
    21_213.794_301_586_597,
    39_307.895_800_092_71,
    28_729.085_735_721_943,
    5_226.495_278_852_854,
];
const AS241_C: [f64; 8] = [
    1.423_437_110_749_683_5,
    4.630_337_846_156_546,
    5.769_497_221_460_691,
    3.647_848_324_763_204_5,
    1.270_458_252_452_368_4,
    0.241_780_725_177_450_6,
    2.272_384_498_926_918_4e-2,
    7.745_450_142_783_414e-4,
];
const AS241_D: [f64; 8] = [
    1.0,
    2.053_191_626_637_759,
    1.676_384_830_183_803_8,
    0.689_767_334_985_1,
    0.148_103_976_427_480_08,
    1.519_866_656_361_645_7e-2,
    5.475_938_084_995_345e-4,
    1.050_750_071_644_416_9e-9,
];
const AS241_E: [f64; 8] = [
    6.657_904_643_501_103,
    5.463_784_911_164_114,
    1.784_826_539_917_291_3,
    0.296_560_571_828_504_87,
    2.653_218_952_657_612_4e-2,
    1.242_660_947_388_078_4e-3,
    2.711_555_568_743_487_6e-5,
    2.010_334_399_292_288_1e-7,
];
const AS241_F: [f64; 8] = [
    1.0,
    0.599_832_206_555_888,
    0.136_929_880_922_735_8,
    1.487_536_129_085_061_5e-2,
    7.868_691_311_456_133e-4,
    1.846_318_317_510_054_8e-5,
    1.421_511_758_316_446e-7,
    2.044_263_103_389_939_7e-15,
];

const GL_W: [&[f64]; 3] = [
    &[0.171_324_492_379_170_5, 0.360_761_573_048_138_4, 0.467_913_934_572_690_4],
    &[
        0.047_175_336_386_511_77,
        0.106_939_325_995_318_3,
        0.160_078_328_543_346_4,
        0.203_167_426_723_065_9,
        0.233_492_536_538_354_7,
        0.249_147_045_813_402_9,
    ],
    &[
        0.017_614_007_139_152_12,
        0.040_601_429_800_386_94,
        0.062_672_048_334_109_06,
        0.083_276_741_576_704_75,
        0.101_930_119_817_240_4,
        0.118_194_531_961_518_4,
        0.131_688_638_449_176_6,
        0.142_096_109_318_382_1,
        0.149_172_986_472_603_7,
        0.152_753_387_130_725_9,
    ],
];
const GL_X: [&[f64]; 3] = [
    &[-0.932_469_514_203_152_2, -0.661_209_386_466_264_7, -0.238_619_186_083_197],
    &[
        -0.981_560_634_246_719_1,
        -0.904_117_256_370_475,
        -0.769_902_674_194_305,
        -0.587_317_954_286_617_1,
        -0.367_831_498_998_180_2,
        -0.125_233_408_511_469_2,
    ],
    &[
        -0.993_128_599_185_094_9,
        -0.963_971_927_277_913_8,
        -0.912_234_428_251_326,
        -0.839_116_971_822_218_8,
        -0.746_331_906_460_150_8,
        -0.636_053_680_726_515,
        -0.510_867_001_950_827_1,
        -0.373_706_088_715_419_6,
        -0.227_785_851_141_645_1,
        -0.076_526_521_133_497_33,
    ],
];

/// `P(X > h, Y > k)` for standard bivariate normal with correlation `r` (Genz's BVND).
pub fn bvn_upper<T: Scalar>(h: T, k: T, r: T) -> T {
    let two_pi: T = lit(std::f64::consts::TAU);
    let ar = r.abs();
    let ng = if ar < lit(0.3) {
        0
    } else if ar < lit(0.75) {
        1
    } else {
        2
    };
    let (wts, xs) = (GL_W[ng], GL_X[ng]);
    let mut k = k;
    let mut hk = h * k;
    let mut bvn = T::zero();
    if ar < lit(0.925) {
        let hs = (h * h + k * k) * lit(0.5);
        let asr = r.asin();
        for (&w, &x) in wts.iter().zip(xs) {
            let (w, x): (T, T) = (lit(w), lit(x));
            for sign in [T::one(), -T::one()] {
                let sn = (asr * (sign * x + T::one()) * lit(0.5)).sin();
                bvn = bvn + w * ((sn * hk - hs) / (T::one() - sn * sn)).exp();
            }
        }
        bvn = bvn * asr / (lit::<T>(2.0) * two_pi) + norm_cdf(-h) * norm_cdf(-k);
    } else {
        if r < T::zero() {
            k = -k;
            hk = -hk;
        }
        if ar < T::one() {
            let as_ = (T::one() - r) * (T::one() + r);
            let mut a = as_.sqrt();
            let bs = (h - k) * (h - k);
            let c = (lit::<T>(4.0) - hk) / lit(8.0);
            let d = (lit::<T>(12.0) - hk) / lit(16.0);
            let five: T = lit(5.0);
            let three: T = lit(3.0);
            bvn = a
                * (-(bs / as_ + hk) * lit(0.5)).exp()
                * (T::one() - c * (bs - as_) * (T::one() - d * bs / five) / three
                    + c * d * as_ * as_ / five);
            if hk > lit(-160.0) {
                let b = bs.sqrt();
                bvn = bvn
                    - (-hk * lit(0.5)).exp()
                        * lit(SQRT_2PI)
                        * norm_cdf(-b / a)
                        * b
                        * (T::one() - c * bs * (T::one() - d * bs / five) / three);
            }
            a = a * lit(0.5);
            for (&w, &x) in wts.iter().zip(xs) {
                let (w, x): (T, T) = (lit(w), lit(x));
                for sign in [T::one(), -T::one()] {
                    let xs_ = (a * (sign * x + T::one())).powi(2);
                    let rs = (T::one() - xs_).sqrt();
                    let asr = -(bs / xs_ + hk) * lit(0.5);
                    if asr > lit(-100.0) {
                        let sp = T::one() + c * xs_ * (T::one() + d * xs_);
                        let ep = (-hk * (T::one() - rs) / (lit::<T>(2.0) * (T::one() + rs))).exp() / rs;
                        bvn = bvn + a * w * asr.exp() * (ep - sp);
                    }
                }
            }
            bvn = -bvn / two_pi;
        }
        if r > T::zero() {
            bvn = bvn + norm_cdf(-h.max(k));
        } else {
            bvn = -bvn;
            if k > h {
                if h < T::zero() {
                    bvn = bvn + norm_cdf(k) - norm_cdf(h);
                } else {
                    bvn = bvn + norm_cdf(-h) - norm_cdf(-k);
                }
            }
        }
    }
    bvn.max(T::zero()).min(T::one())
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson<T: Scalar, F: Fn(T) -> T>(f: &F, a: T, b: T, tol: T) -> T {
    let half: T = lit(0.5);
    let m = (a + b) * half;
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / lit(6.0) * (fa + lit::<T>(4.0) * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 50)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<T: Scalar, F: Fn(T) -> T>(
    f: &F,
    a: T,
    b: T,
    fa: T,
    fm: T,
    fb: T,
    whole: T,
    tol: T,
    depth: u32,
) -> T {
    let half: T = lit(0.5);
    let m = (a + b) * half;
    let (lm, rm) = ((a + m) * half, (m + b) * half);
    let (flm, frm) = (f(lm), f(rm));
    let six: T = lit(6.0);
    let four: T = lit(4.0);
    let left = (m - a) / six * (fa + four * flm + fm);
    let right = (b - m) / six * (fm + four * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= lit::<T>(15.0) * tol {
        return left + right + delta / lit(15.0);
    }
    simpson_step(f, a, m, fa, flm, fm, left, tol * half, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, tol * half, depth - 1)
}

/// First Debye function `D1(x) = (1/x) * int_0^x t / (e^t - 1) dt`, any real `x`.
pub fn debye1<T: Scalar>(x: T) -> T {
    if x == T::zero() {
        return T::one();
    }
    if x < T::zero() {
        // D1(-x) = D1(x) + x/2
        return debye1(-x) - x * lit(0.5);
    }
    if x < lit(1e-3) {
        let x2 = x * x;
        return T::one() - x / lit(4.0) + x2 / lit(36.0) - x2 * x2 / lit(3600.0);
    }
    let integrand = |t: T| {
        if t == T::zero() {
            T::one()
        } else {
            t / t.exp_m1()
        }
    };
    // integrand is below 1e-30 past t = 80
    let upper = x.min(lit(80.0));
    let tol = lit::<T>(1e-13).max(T::epsilon() * lit(16.0));
    let mut integral = adaptive_simpson(&integrand, T::zero(), upper, tol);
    if x > upper {
        // remaining mass: int_upper^inf t e^-t dt ~ (upper+1) e^-upper
        integral = integral + (upper + T::one()) * (-upper).exp();
    }
    integral / x
}

/// Outcome of a failed bracketed root search.
#[derive(Debug, Clone, Copy)]
pub(crate) struct NoConvergence;

/// Safeguarded Newton iteration for an increasing function on `[lo, hi]`.
///
/// `f_df` returns `(f(x), f'(x))`; `f(lo) <= 0 <= f(hi)` is assumed. Steps
/// that leave the bracket or shrink it too slowly fall back to bisection.
pub(crate) fn newton_bisect<T: Scalar, F: FnMut(T) -> (T, T)>(
    mut f_df: F,
    mut lo: T,
    mut hi: T,
    x0: T,
    xtol: T,
    max_iter: usize,
) -> Result<T, NoConvergence> {
    let half: T = lit(0.5);
    let mut x = if x0 > lo && x0 < hi { x0 } else { (lo + hi) * half };
    let mut last_step = hi - lo;
    for _ in 0..max_iter {
        let (fx, dfx) = f_df(x);
        if fx == T::zero() {
            return Ok(x);
        }
        if fx < T::zero() {
            lo = x;
        } else {
            hi = x;
        }
        let newton = if dfx > T::zero() && dfx.is_finite() {
            Some(x - fx / dfx)
        } else {
            None
        };
        let next = match newton {
            Some(nx) if nx > lo && nx < hi && (nx - x).abs() * lit(2.0) < last_step => nx,
            _ => (lo + hi) * half,
        };
        last_step = (next - x).abs();
        x = next;
        if last_step <= xtol || hi - lo <= xtol {
            return Ok(x);
        }
    }
    Err(NoConvergence)
}

/// Brent's method: minimises `f` on `[a, b]` starting from `x0`.
pub(crate) fn brent_minimize<T: Scalar, F: FnMut(T) -> T>(
    mut f: F,
    mut a: T,
    mut b: T,
    x0: T,
    tol: T,
    max_iter: usize,
) -> (T, T) {
    let golden: T = lit(0.381_966_011_250_105_1);
    let zeps = T::epsilon() * lit(1e-3);
    let half: T = lit(0.5);
    let mut x = if x0 > a && x0 < b { x0 } else { a + golden * (b - a) };
    let (mut w, mut v) = (x, x);
    let mut fx = f(x);
    let (mut fw, mut fv) = (fx, fx);
    let mut d = T::zero();
    let mut e = T::zero();
    for _ in 0..max_iter {
        let xm = (a + b) * half;
        let tol1 = tol * x.abs() + zeps;
        let tol2 = tol1 * lit(2.0);
        if (x - xm).abs() <= tol2 - half * (b - a) {
            break;
        }
        let mut use_golden = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = (q - r) * lit(2.0);
            if q > T::zero() {
                p = -p;
            }
            q = q.abs();
            let etemp = e;
            e = d;
            if !(p.abs() >= (half * q * etemp).abs() || p <= q * (a - x) || p >= q * (b - x)) {
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = if xm >= x { tol1 } else { -tol1 };
                }
                use_golden = false;
            }
        }
        if use_golden {
            e = if x >= xm { a - x } else { b - x };
            d = golden * e;
        }
        let u = if d.abs() >= tol1 {
            x + d
        } else if d >= T::zero() {
            x + tol1
        } else {
            x - tol1
        };
        let fu = f(u);
        if fu <= fx {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    (x, fx)
}
