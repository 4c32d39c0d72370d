//! Wasserstein distances in one dimension and the two estimators of the
//! W1 distance to the exact solution.
//!
//! [`psi_grid_free`] integrates `|F^N - F|` by trapezoids whose abscissae are
//! the sorted particles. It only covers `[y_1, y_N]`: the tail masses
//! `int_{-inf}^{y_1} F` and `int_{y_N}^{inf} (1 - F)` are not included.
//!
//! [`phi_grid`] works on a fixed grid of exact quantiles, replacing `F` by
//! the midpoint level `(2k + 1) / (2K)` on each quantile cell. It only needs
//! the averaged empirical CDF at the `K` midpoint quantiles.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::exact::BurgersSolution;
use crate::scalar::Scalar;

fn sorted_copy<S: Scalar>(v: &[S]) -> Vec<S> {
    let mut out = v.to_vec();
    out.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    out
}

fn check_sorted<S: Scalar>(v: &[S]) -> Result<()> {
    match v.windows(2).position(|w| w[1] < w[0]) {
        Some(i) => Err(Error::NotSorted { index: i + 1 }),
        None => Ok(()),
    }
}

/// `W_rho` between two empirical measures with the same number of atoms:
/// `((1/N) sum |a_(i) - b_(i)|^rho)^(1/rho)` over order statistics.
pub fn w_rho_empirical<S: Scalar>(a: &[S], b: &[S], rho: S) -> Result<S> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.is_empty() {
        return Err(Error::EmptyInput);
    }
    if !(rho >= S::one()) {
        return Err(Error::domain("rho", rho.as_f64(), "[1, inf)"));
    }
    let sa = sorted_copy(a);
    let sb = sorted_copy(b);
    let n = S::from_count(a.len());
    let sum: S = if rho == S::one() {
        sa.iter().zip(&sb).map(|(x, y)| (*x - *y).abs()).sum()
    } else {
        sa.iter().zip(&sb).map(|(x, y)| (*x - *y).abs().powf(rho)).sum()
    };
    Ok((sum / n).powf(rho.recip()))
}

/// `int |F_a - F_b| dx` over the two piecewise-constant empirical CDFs,
/// by a sweep over the merged atoms. The atom counts may differ.
pub fn w1_cdf_form<S: Scalar>(a: &[S], b: &[S]) -> Result<S> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyInput);
    }
    let sa = sorted_copy(a);
    let sb = sorted_copy(b);
    let (na, nb) = (S::from_count(sa.len()), S::from_count(sb.len()));
    let (mut i, mut j) = (0, 0);
    let mut prev = sa[0].min(sb[0]);
    let mut total = S::zero();
    while i < sa.len() || j < sb.len() {
        let next = match (sa.get(i), sb.get(j)) {
            (Some(&x), Some(&y)) => x.min(y),
            (Some(&x), None) => x,
            (None, Some(&y)) => y,
            (None, None) => unreachable!(),
        };
        let gap = (S::from_count(i) / na - S::from_count(j) / nb).abs();
        total = total + gap * (next - prev);
        while i < sa.len() && sa[i] == next {
            i += 1;
        }
        while j < sb.len() && sb[j] == next {
            j += 1;
        }
        prev = next;
    }
    Ok(total)
}

/// Grid-free trapezoid estimate of `int |F^N - F| dx` from sorted positions:
///
/// `sum_{i=1}^{N-1} (y_{i+1} - y_i) (|F(y_{i+1}) - i/N| + |F(y_i) - i/N|) / 2`.
///
/// For `N < 2` the sum is empty: the result is 0 and a warning is logged.
pub fn psi_grid_free<S, F>(sorted_positions: &[S], exact_cdf: F) -> Result<S>
where
    S: Scalar,
    F: Fn(S) -> S,
{
    let n = sorted_positions.len();
    if n < 2 {
        log::warn!("grid-free estimator called with degenerate input (N = {n}); returning 0");
        return Ok(S::zero());
    }
    check_sorted(sorted_positions)?;
    let nn = S::from_count(n);
    let half = S::lit(0.5);
    let mut f_left = exact_cdf(sorted_positions[0]);
    let mut total = S::zero();
    for i in 1..n {
        let level = S::from_count(i) / nn;
        let f_right = exact_cdf(sorted_positions[i]);
        let width = sorted_positions[i] - sorted_positions[i - 1];
        total = total + half * width * ((f_right - level).abs() + (f_left - level).abs());
        f_left = f_right;
    }
    Ok(total)
}

/// Fraction of positions `<= x`.
pub fn empirical_cdf_at<S: Scalar>(positions: &[S], x: S) -> S {
    if positions.is_empty() {
        return S::zero();
    }
    let count = positions.iter().filter(|&&p| p <= x).count();
    S::from_count(count) / S::from_count(positions.len())
}

/// Empirical CDF of `sorted_positions` at every entry of the nondecreasing
/// `abscissae`, in one merge pass.
pub fn empirical_cdf_sorted<S: Scalar>(sorted_positions: &[S], abscissae: &[S], out: &mut [S]) {
    debug_assert_eq!(abscissae.len(), out.len());
    let n = S::from_count(sorted_positions.len().max(1));
    let mut count = 0;
    for (x, slot) in abscissae.iter().zip(out.iter_mut()) {
        while count < sorted_positions.len() && sorted_positions[count] <= *x {
            count += 1;
        }
        *slot = S::from_count(count) / n;
    }
}

/// Quantile grid of a reference law for the grid estimator.
#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec<S> {
    k_points: usize,
    /// `F^{-1}(k/K)` for `k = 1..K-1`.
    quantile_grid: Vec<S>,
    /// `F^{-1}((2k+1)/(2K))` for `k = 0..K-1`.
    midpoint_quantiles: Vec<S>,
}

impl<S: Scalar> GridSpec<S> {
    /// Builds the grid from a quantile function; `K >= 2`.
    pub fn from_quantile<Q>(k_points: usize, quantile: Q) -> Result<Self>
    where
        Q: Fn(S) -> Result<S>,
    {
        if k_points < 2 {
            return Err(Error::InvalidConfig(format!(
                "grid needs K >= 2 cells, got {k_points}"
            )));
        }
        let kk = S::from_count(k_points);
        let quantile_grid = (1..k_points)
            .map(|k| quantile(S::from_count(k) / kk))
            .collect::<Result<Vec<_>>>()?;
        let midpoint_quantiles = (0..k_points)
            .map(|k| quantile(S::from_count(2 * k + 1) / (kk + kk)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(quantile_grid, midpoint_quantiles)
    }

    /// Grid of the exact Burgers solution at time `t`.
    pub fn burgers(solution: &BurgersSolution<S>, t: S, k_points: usize) -> Result<Self> {
        Self::from_quantile(k_points, |u| solution.quantile(t, u))
    }

    /// Grid from precomputed quantiles; both vectors must be strictly
    /// increasing with lengths `K - 1` and `K`.
    pub fn new(quantile_grid: Vec<S>, midpoint_quantiles: Vec<S>) -> Result<Self> {
        let k_points = midpoint_quantiles.len();
        if k_points < 2 || quantile_grid.len() + 1 != k_points {
            return Err(Error::LengthMismatch {
                left: quantile_grid.len(),
                right: k_points,
            });
        }
        for v in [&quantile_grid, &midpoint_quantiles] {
            if let Some(i) = v.windows(2).position(|w| !(w[0] < w[1])) {
                return Err(Error::NonMonotoneGrid { index: i + 1 });
            }
        }
        Ok(Self {
            k_points,
            quantile_grid,
            midpoint_quantiles,
        })
    }

    pub fn k_points(&self) -> usize {
        self.k_points
    }

    pub fn quantile_grid(&self) -> &[S] {
        &self.quantile_grid
    }

    pub fn midpoint_quantiles(&self) -> &[S] {
        &self.midpoint_quantiles
    }
}

/// Grid estimate of `int |u(x) - F(x)| dx` from the averaged empirical CDF
/// values `u_k` at the midpoint quantiles:
///
/// `sum_{k=1}^{K-2} |u_k - (2k+1)/(2K)| (q_{k+1} - q_k)`
/// `+ 2 |u_0 - 1/(2K)| (q_1 - m_0) + 2 |u_{K-1} - (1 - 1/(2K))| (m_{K-1} - q_{K-1})`
///
/// with `q_k = F^{-1}(k/K)` and `m_k = F^{-1}((2k+1)/(2K))`.
pub fn phi_grid<S: Scalar>(mean_cdf_values: &[S], grid: &GridSpec<S>) -> Result<S> {
    let k_points = grid.k_points;
    if mean_cdf_values.len() != k_points {
        return Err(Error::LengthMismatch {
            left: mean_cdf_values.len(),
            right: k_points,
        });
    }
    if let Some(u) = mean_cdf_values
        .iter()
        .find(|u| !(**u >= S::zero() && **u <= S::one()))
    {
        return Err(Error::domain("mean CDF value", u.as_f64(), "[0, 1]"));
    }
    let q = &grid.quantile_grid;
    let m = &grid.midpoint_quantiles;
    let two_k = S::from_count(2 * k_points);
    let level = |k: usize| S::from_count(2 * k + 1) / two_k;
    let two = S::lit(2.0);

    let mut total = S::zero();
    for k in 1..k_points - 1 {
        total = total + (mean_cdf_values[k] - level(k)).abs() * (q[k] - q[k - 1]);
    }
    let last = k_points - 1;
    total = total + two * (mean_cdf_values[0] - level(0)).abs() * (q[0] - m[0]);
    total = total + two * (mean_cdf_values[last] - level(last)).abs() * (m[last] - q[last - 1]);
    Ok(total)
}
