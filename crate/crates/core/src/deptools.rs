//! Rank transforms and Kendall's tau.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::scalar::{lit, Scalar};
use crate::special::norm_cdf;

/// An `n x d` matrix of values strictly inside `(0, 1)`, stored by column.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoObs<T> {
    n: usize,
    columns: Vec<Vec<T>>,
}

/// Samples returned by the sampler share the pseudo-observation layout.
pub type SampleBatch<T> = PseudoObs<T>;

impl<T: Scalar> PseudoObs<T> {
    /// Wraps columns after checking lengths and the open unit interval.
    pub fn from_columns(columns: Vec<Vec<T>>) -> Result<Self> {
        let n = columns.first().map_or(0, Vec::len);
        for (col, c) in columns.iter().enumerate() {
            if c.len() != n {
                return Err(Error::InvalidInput(format!(
                    "column {col} has {} rows, expected {n}",
                    c.len()
                )));
            }
            if let Some(row) = c.iter().position(|&x| !(x > T::zero() && x < T::one())) {
                return Err(Error::OutsideUnitInterval {
                    row,
                    col,
                    value: c[row].to_f64().unwrap_or(f64::NAN),
                });
            }
        }
        Ok(PseudoObs { n, columns })
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        Self::from_columns(transpose(rows)?)
    }

    pub(crate) fn from_columns_unchecked(columns: Vec<Vec<T>>) -> Self {
        let n = columns.first().map_or(0, Vec::len);
        PseudoObs { n, columns }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, j: usize) -> &[T] {
        &self.columns[j]
    }

    pub fn columns(&self) -> &[Vec<T>] {
        &self.columns
    }

    pub fn into_columns(self) -> Vec<Vec<T>> {
        self.columns
    }

    pub fn row(&self, i: usize) -> Vec<T> {
        self.columns.iter().map(|c| c[i]).collect()
    }

    pub fn rows(&self) -> Vec<Vec<T>> {
        (0..self.n).map(|i| self.row(i)).collect()
    }
}

fn transpose<T: Scalar>(rows: &[Vec<T>]) -> Result<Vec<Vec<T>>> {
    let d = rows.first().map_or(0, Vec::len);
    let mut cols = vec![Vec::with_capacity(rows.len()); d];
    for (i, r) in rows.iter().enumerate() {
        if r.len() != d {
            return Err(Error::InvalidInput(format!(
                "row {i} has {} values, expected {d}",
                r.len()
            )));
        }
        for (c, &x) in cols.iter_mut().zip(r) {
            c.push(x);
        }
    }
    Ok(cols)
}

/// Average ranks of `x` (1-based).
pub fn average_ranks<T: Scalar>(x: &[T]) -> Vec<T> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].partial_cmp(&x[b]).unwrap_or(Ordering::Equal));
    let mut ranks = vec![T::zero(); x.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i + 1;
        while j < idx.len() && x[idx[j]] == x[idx[i]] {
            j += 1;
        }
        // positions i..j (0-based) share the mean of ranks i+1..=j
        let rank: T = lit((i + j + 1) as f64 / 2.0);
        for &k in &idx[i..j] {
            ranks[k] = rank;
        }
        i = j;
    }
    ranks
}

/// Rank-transforms each column of an `n x d` row-major matrix to `rank / (n + 1)`.
pub fn to_pseudo_obs<T: Scalar>(rows: &[Vec<T>]) -> Result<PseudoObs<T>> {
    if rows.len() < 2 {
        return Err(Error::TooFewObservations {
            needed: 2,
            got: rows.len(),
        });
    }
    let cols = transpose(rows)?;
    for (col, c) in cols.iter().enumerate() {
        if let Some(row) = c.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite { row, col });
        }
    }
    let scale: T = lit((rows.len() + 1) as f64);
    let columns = cols
        .iter()
        .map(|c| average_ranks(c).into_iter().map(|r| r / scale).collect())
        .collect();
    Ok(PseudoObs::from_columns_unchecked(columns))
}

/// Number of tied pairs among consecutive equal runs of a sorted sequence.
fn tied_pairs<I: Iterator<Item = bool>>(same_as_prev: I) -> u64 {
    let mut total = 0u64;
    let mut run = 1u64;
    for same in same_as_prev {
        if same {
            run += 1;
        } else {
            total += run * (run - 1) / 2;
            run = 1;
        }
    }
    total + run * (run - 1) / 2
}

/// Sorts `y` by merge sort and returns the number of swaps (discordant pairs).
fn merge_sort_swaps<T: Scalar>(y: &mut [T], buf: &mut [T]) -> u64 {
    let n = y.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut swaps = {
        let (l, r) = y.split_at_mut(mid);
        let (bl, br) = buf.split_at_mut(mid);
        merge_sort_swaps(l, bl) + merge_sort_swaps(r, br)
    };
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if y[j] < y[i] {
            buf[k] = y[j];
            swaps += (mid - i) as u64;
            j += 1;
        } else {
            buf[k] = y[i];
            i += 1;
        }
        k += 1;
    }
    buf[k..k + mid - i].copy_from_slice(&y[i..mid]);
    let k = k + mid - i;
    buf[k..].copy_from_slice(&y[j..]);
    y.copy_from_slice(&buf[..n]);
    swaps
}

/// Kendall's tau-b in `O(n log n)` (Knight's algorithm).
pub fn kendall_tau<T: Scalar>(x: &[T], y: &[T]) -> Result<T> {
    if x.len() != y.len() {
        return Err(Error::InvalidInput(format!(
            "Kendall's tau needs equal lengths, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    let n = x.len();
    if n < 2 {
        return Err(Error::TooFewObservations { needed: 2, got: n });
    }
    if x.iter().chain(y).any(|v| v.is_nan()) {
        return Err(Error::InvalidInput("Kendall's tau input contains NaN".into()));
    }
    let mut pairs: Vec<(T, T)> = x.iter().copied().zip(y.iter().copied()).collect();
    pairs.sort_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .unwrap_or(Ordering::Equal)
            .then(a.1.partial_cmp(&b.1).unwrap_or(Ordering::Equal))
    });
    let total = (n as u64) * (n as u64 - 1) / 2;
    let ties_x = tied_pairs(pairs.windows(2).map(|w| w[0].0 == w[1].0));
    let ties_xy = tied_pairs(pairs.windows(2).map(|w| w[0] == w[1]));
    let mut ys: Vec<T> = pairs.iter().map(|p| p.1).collect();
    let mut buf = ys.clone();
    let swaps = merge_sort_swaps(&mut ys, &mut buf);
    let ties_y = tied_pairs(ys.windows(2).map(|w| w[0] == w[1]));

    if ties_x == total {
        return Err(Error::UndefinedTau("first argument"));
    }
    if ties_y == total {
        return Err(Error::UndefinedTau("second argument"));
    }
    let concordant_minus_discordant =
        total as f64 - ties_x as f64 - ties_y as f64 + ties_xy as f64 - 2.0 * swaps as f64;
    let denom = ((total - ties_x) as f64 * (total - ties_y) as f64).sqrt();
    Ok(lit::<T>((concordant_minus_discordant / denom).clamp(-1.0, 1.0)))
}

/// Two-sided p-value of the asymptotic normal test of `tau = 0` on `n` pairs.
pub fn tau_independence_p_value<T: Scalar>(tau: T, n: usize) -> T {
    let n = n as f64;
    let sd = (2.0 * (2.0 * n + 5.0) / (9.0 * n * (n - 1.0))).sqrt();
    let z: T = tau.abs() / lit(sd);
    lit::<T>(2.0) * norm_cdf(-z)
}
