//! Flux functions on [0, 1] and the discrete rank-drift coefficients they induce.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Shape of the flux `Lambda`.
#[derive(Clone, Debug, PartialEq)]
pub enum FluxKind<S> {
    /// `Lambda(u) = -(1 - u)^2 / 2`, `lambda(u) = 1 - u`.
    Burgers,
    /// `Lambda(u) = u^2 / 2`, `lambda(u) = u`.
    Quadratic,
    /// `Lambda(u) = sum_k c[k] u^k` with monomial coefficients `c`.
    Polynomial(Vec<S>),
}

/// C¹ flux `Lambda: [0, 1] -> R` together with its derivative `lambda`.
#[derive(Clone, Debug, PartialEq)]
pub struct FluxFunction<S> {
    kind: FluxKind<S>,
    /// Coefficients of `lambda = Lambda'` (polynomial kind only).
    derivative: Vec<S>,
    sup_abs_lambda: S,
    lipschitz_lambda: S,
}

fn check_unit<S: Scalar>(u: S) -> Result<()> {
    if u >= S::zero() && u <= S::one() {
        Ok(())
    } else {
        Err(Error::domain("u", u.as_f64(), "[0, 1]"))
    }
}

fn poly_eval<S: Scalar>(coeffs: &[S], u: S) -> S {
    coeffs.iter().rev().fold(S::zero(), |acc, &c| acc * u + c)
}

fn poly_derivative<S: Scalar>(coeffs: &[S]) -> Vec<S> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, &c)| S::from_count(k) * c)
        .collect()
}

/// Upper bound of `sup_{[0,1]} |p|`: maximum on a uniform grid plus the
/// Lipschitz slack `sup|p'| * spacing / 2`, with `sup|p'| <= sum |p'_k|`.
fn poly_sup_abs<S: Scalar>(coeffs: &[S]) -> S {
    const GRID: usize = 4096;
    let slope: S = poly_derivative(coeffs).iter().map(|c| c.abs()).sum();
    let spacing = S::from_count(GRID).recip();
    let grid_max = (0..=GRID)
        .map(|j| poly_eval(coeffs, S::from_count(j) * spacing).abs())
        .fold(S::zero(), S::max);
    grid_max + slope * spacing * S::lit(0.5)
}

impl<S: Scalar> FluxFunction<S> {
    pub fn burgers() -> Self {
        Self {
            kind: FluxKind::Burgers,
            derivative: Vec::new(),
            sup_abs_lambda: S::one(),
            lipschitz_lambda: S::one(),
        }
    }

    pub fn quadratic() -> Self {
        Self {
            kind: FluxKind::Quadratic,
            derivative: Vec::new(),
            sup_abs_lambda: S::one(),
            lipschitz_lambda: S::one(),
        }
    }

    /// Polynomial flux from the monomial coefficients of `Lambda`.
    ///
    /// `lambda`'s coefficients are derived here, so `lambda = Lambda'` holds
    /// by construction.
    pub fn polynomial(coeffs: Vec<S>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidConfig(
                "polynomial flux needs at least one coefficient".into(),
            ));
        }
        if let Some(c) = coeffs.iter().find(|c| !c.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "non-finite flux coefficient {c}"
            )));
        }
        let derivative = poly_derivative(&coeffs);
        let sup_abs_lambda = poly_sup_abs(&derivative);
        let lipschitz_lambda = poly_derivative(&derivative)
            .iter()
            .map(|c| c.abs())
            .sum();
        Ok(Self {
            kind: FluxKind::Polynomial(coeffs),
            derivative,
            sup_abs_lambda,
            lipschitz_lambda,
        })
    }

    /// `Lambda(u) = c u`: every particle drifts at speed `c`.
    pub fn linear(c: S) -> Self {
        Self::polynomial(vec![S::zero(), c]).expect("finite coefficient")
    }

    pub fn kind(&self) -> &FluxKind<S> {
        &self.kind
    }

    pub fn is_burgers(&self) -> bool {
        matches!(self.kind, FluxKind::Burgers)
    }

    /// `L_Lambda = sup_{[0,1]} |lambda|` (an upper bound for polynomial fluxes).
    pub fn sup_abs_lambda(&self) -> S {
        self.sup_abs_lambda
    }

    /// Lipschitz constant of `lambda` (an upper bound for polynomial fluxes).
    pub fn lipschitz_lambda(&self) -> S {
        self.lipschitz_lambda
    }

    fn capital_unchecked(&self, u: S) -> S {
        match &self.kind {
            FluxKind::Burgers => {
                let v = S::one() - u;
                -S::lit(0.5) * v * v
            }
            FluxKind::Quadratic => S::lit(0.5) * u * u,
            FluxKind::Polynomial(c) => poly_eval(c, u),
        }
    }

    fn lambda_unchecked(&self, u: S) -> S {
        match &self.kind {
            FluxKind::Burgers => S::one() - u,
            FluxKind::Quadratic => u,
            FluxKind::Polynomial(_) => poly_eval(&self.derivative, u),
        }
    }

    /// `Lambda(u)` for `u` in [0, 1].
    pub fn eval_capital_lambda(&self, u: S) -> Result<S> {
        check_unit(u)?;
        Ok(self.capital_unchecked(u))
    }

    /// `lambda(u) = Lambda'(u)` for `u` in [0, 1].
    pub fn eval_lambda(&self, u: S) -> Result<S> {
        check_unit(u)?;
        Ok(self.lambda_unchecked(u))
    }

    /// Rank coefficients `N (Lambda(i/N) - Lambda((i-1)/N))` for `i = 1..=N`.
    ///
    /// Burgers and quadratic fluxes use the closed forms
    /// `1 - (2i-1)/(2N)` and `(2i-1)/(2N)`, which avoid the cancellation of
    /// differencing at large `N`.
    pub fn rank_coefficients(&self, n: usize) -> Result<Vec<S>> {
        if n == 0 {
            return Err(Error::domain("N", 0.0, "N >= 1"));
        }
        let nn = S::from_count(n);
        let two_n = nn + nn;
        let coeffs = match &self.kind {
            FluxKind::Burgers => (1..=n)
                .map(|i| S::one() - S::from_count(2 * i - 1) / two_n)
                .collect(),
            FluxKind::Quadratic => (1..=n)
                .map(|i| S::from_count(2 * i - 1) / two_n)
                .collect(),
            FluxKind::Polynomial(_) => {
                let mut prev = self.capital_unchecked(S::zero());
                (1..=n)
                    .map(|i| {
                        let next = self.capital_unchecked(S::from_count(i) / nn);
                        let c = nn * (next - prev);
                        prev = next;
                        c
                    })
                    .collect()
            }
        };
        Ok(coeffs)
    }

    /// Drift `lambda(i/N)` of the fractional-rank variant, `i = 1..=N`.
    pub fn fractional_rank_drifts(&self, n: usize) -> Result<Vec<S>> {
        if n == 0 {
            return Err(Error::domain("N", 0.0, "N >= 1"));
        }
        let nn = S::from_count(n);
        Ok((1..=n)
            .map(|i| self.lambda_unchecked(S::from_count(i) / nn))
            .collect())
    }
}

impl<S: Scalar> std::str::FromStr for FluxFunction<S> {
    type Err = Error;

    /// Parses `burgers`, `quadratic` or `poly:c0,c1,...`.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "burgers" => Ok(Self::burgers()),
            "quadratic" => Ok(Self::quadratic()),
            other => {
                let list = other.strip_prefix("poly:").ok_or_else(|| {
                    Error::InvalidConfig(format!(
                        "unknown flux '{other}' (expected burgers, quadratic or poly:c0,c1,...)"
                    ))
                })?;
                let coeffs = list
                    .split(',')
                    .map(|c| {
                        c.trim()
                            .parse::<f64>()
                            .map(S::lit)
                            .map_err(|e| Error::InvalidConfig(format!("flux coefficient '{c}': {e}")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Self::polynomial(coeffs)
            }
        }
    }
}
