//! Gaussian heat kernel `G_t(x) = exp(-x^2 / (2 sigma^2 t)) / sqrt(2 pi sigma^2 t)`
//! and the closed-form norms used as quadrature oracles.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HeatKernel<S> {
    sigma: S,
}

impl<S: Scalar> HeatKernel<S> {
    pub fn new(sigma: S) -> Result<Self> {
        if !(sigma.is_finite() && sigma > S::zero()) {
            return Err(Error::domain("sigma", sigma.as_f64(), "(0, inf)"));
        }
        Ok(Self { sigma })
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

    /// Standard deviation `sigma sqrt(t)` of `G_t`.
    pub fn spread(&self, t: S) -> S {
        self.sigma * t.sqrt()
    }

    /// `G_t(x)`, the density of `N(0, sigma^2 t)`.
    pub fn g(&self, t: S, x: S) -> Result<S> {
        Self::check_time(t)?;
        let var = self.sigma * self.sigma * t;
        Ok((-x * x / (var + var)).exp() / (S::TAU() * var).sqrt())
    }

    /// `dG_t/dx (x) = -x / (sigma^2 t) G_t(x)`.
    pub fn dg_dx(&self, t: S, x: S) -> Result<S> {
        let g = self.g(t, x)?;
        Ok(-x / (self.sigma * self.sigma * t) * g)
    }

    /// `||dG_t/dx||_{L1} = sqrt(2 / (pi sigma^2 t))`.
    pub fn dx_l1_norm(&self, t: S) -> S {
        (S::lit(2.0) / (S::PI() * self.sigma * self.sigma * t)).sqrt()
    }

    /// `||G_t||^2_{L2} = 1 / (2 sigma sqrt(pi t))`.
    pub fn l2_norm_sq(&self, t: S) -> S {
        (S::lit(2.0) * self.sigma * (S::PI() * t).sqrt()).recip()
    }

    /// `||dG_t/dx||^2_{L2} = 1 / (4 sigma^3 t^{3/2} sqrt(pi))`.
    pub fn dx_l2_norm_sq(&self, t: S) -> S {
        let s = self.sigma;
        (S::lit(4.0) * s * s * s * t * t.sqrt() * S::PI().sqrt()).recip()
    }

    /// `int_R int_0^t G_{t-s}(y(s) - x)^2 ds dx = sqrt(t / pi) / sigma`, for any path `y`.
    pub fn squared_time_integral(&self, t: S) -> S {
        (t / S::PI()).sqrt() / self.sigma
    }
}
