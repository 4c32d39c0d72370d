//! Closed-form reference for the Burgers-type conservation law
//! `dF/dt + dF/dx (1 - F) = (sigma^2 / 2) d2F/dx2`, `F(0, x) = 1{x >= 0}`.
//!
//! With `a = x / (sigma sqrt t)` and `b = (t - x) / (sigma sqrt t)` the
//! Cole–Hopf solution is
//!
//! `F(t, x) = 1 - N(b) / (N(b) + exp((2x - t) / (2 sigma^2)) N(a))`,
//!
//! where `N` is the standard normal CDF. It is evaluated as the logistic
//! function of `g = (2x - t) / (2 sigma^2) + ln N(a) - ln N(b)`, which never
//! overflows.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::special::log_normal_cdf;

pub use crate::special::normal_cdf;

/// Bracket expansions attempted by [`BurgersSolution::quantile`].
pub const MAX_BRACKET_EXPANSIONS: usize = 200;

/// Target `|F(t, x) - u|` for [`BurgersSolution::quantile`].
pub const QUANTILE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BurgersSolution<S> {
    sigma: S,
}

#[inline]
fn logistic<S: Scalar>(g: S) -> S {
    if g >= S::zero() {
        (S::one() + (-g).exp()).recip()
    } else {
        let e = g.exp();
        e / (S::one() + e)
    }
}

impl<S: Scalar> BurgersSolution<S> {
    pub fn new(sigma: S) -> Result<Self> {
        if !(sigma.is_finite() && sigma > S::zero()) {
            return Err(Error::domain("sigma", sigma.as_f64(), "(0, inf)"));
        }
        Ok(Self { sigma })
    }

    pub fn from_sigma2(sigma2: S) -> Result<Self> {
        if !(sigma2 > S::zero()) {
            return Err(Error::domain("sigma^2", sigma2.as_f64(), "(0, inf)"));
        }
        Self::new(sigma2.sqrt())
    }

    pub fn sigma(&self) -> S {
        self.sigma
    }

    fn check_time(t: S) -> Result<()> {
        if t > S::zero() && t.is_finite() {
            Ok(())
        } else {
            Err(Error::domain("t", t.as_f64(), "(0, inf)"))
        }
    }

    pub(crate) fn cdf_unchecked(&self, t: S, x: S) -> S {
        let s = self.sigma;
        let scale = s * t.sqrt();
        let a = x / scale;
        let b = (t - x) / scale;
        let g = (x + x - t) / (S::lit(2.0) * s * s) + log_normal_cdf(a) - log_normal_cdf(b);
        logistic(g)
    }

    /// `F(t, x)` for `t > 0`.
    pub fn cdf(&self, t: S, x: S) -> Result<S> {
        Self::check_time(t)?;
        Ok(self.cdf_unchecked(t, x))
    }

    /// `x` with `F(t, x) = u`, by bisection.
    ///
    /// The bracket starts at `[t/2 - 1, t/2 + 1]` and doubles its half-width
    /// until it straddles `u`. Bisection stops once `|F - u| <= 1e-12` or
    /// the bracket can no longer be split.
    pub fn quantile(&self, t: S, u: S) -> Result<S> {
        Self::check_time(t)?;
        if !(u > S::zero() && u < S::one()) {
            return Err(Error::domain("u", u.as_f64(), "(0, 1)"));
        }
        let center = t * S::lit(0.5);
        let mut half = S::one();
        let mut expansions = 0;
        let (mut lo, mut hi) = loop {
            let lo = center - half;
            let hi = center + half;
            if self.cdf_unchecked(t, lo) < u && self.cdf_unchecked(t, hi) >= u {
                break (lo, hi);
            }
            expansions += 1;
            if expansions > MAX_BRACKET_EXPANSIONS || !half.is_finite() {
                return Err(Error::BracketFailure {
                    u: u.as_f64(),
                    expansions,
                });
            }
            half = half + half;
        };
        let tol = S::lit(QUANTILE_TOL);
        loop {
            let mid = lo + (hi - lo) * S::lit(0.5);
            if mid <= lo || mid >= hi {
                break;
            }
            let f = self.cdf_unchecked(t, mid);
            if (f - u).abs() <= tol {
                return Ok(mid);
            }
            if f < u {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        // bracket exhausted at floating-point resolution
        let flo = (self.cdf_unchecked(t, lo) - u).abs();
        let fhi = (self.cdf_unchecked(t, hi) - u).abs();
        Ok(if flo <= fhi { lo } else { hi })
    }

    /// Centered finite-difference value of
    /// `dF/dt + d(Lambda(F))/dx - (sigma^2 / 2) d2F/dx2` with
    /// `Lambda(u) = -(1 - u)^2 / 2`, stencil width `delta`.
    pub fn pde_residual(&self, t: S, x: S, delta: S) -> Result<S> {
        if !(delta > S::zero()) {
            return Err(Error::domain("delta", delta.as_f64(), "(0, inf)"));
        }
        if !(t > delta + delta) {
            return Err(Error::domain("t", t.as_f64(), "(2 delta, inf)"));
        }
        let f = |tt: S, xx: S| self.cdf_unchecked(tt, xx);
        let flux = |u: S| {
            let v = S::one() - u;
            -S::lit(0.5) * v * v
        };
        let two = S::lit(2.0);
        let dt = (f(t + delta, x) - f(t - delta, x)) / (two * delta);
        let right = f(t, x + delta);
        let left = f(t, x - delta);
        let center = f(t, x);
        let dflux = (flux(right) - flux(left)) / (two * delta);
        let dxx = (right - two * center + left) / (delta * delta);
        Ok(dt + dflux - self.sigma * self.sigma * S::lit(0.5) * dxx)
    }
}
