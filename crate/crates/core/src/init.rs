//! Initial law `m` of the particles and the two initialization rules.

use crate::error::{Error, Result};
use crate::quad::{integrate, Tolerance};
use crate::rng::NoiseStream;
use crate::scalar::Scalar;
use crate::special::{normal_cdf, normal_quantile};

/// Relative accuracy of the per-cell quadrature in [`init_w1_to_m`].
pub const INIT_W1_REL_TOL: f64 = 1e-9;

/// Probability distribution on the real line, described by its CDF and
/// quantile function.
#[derive(Clone, Debug, PartialEq)]
pub enum InitialDistribution<S> {
    DiracAtZero,
    Uniform {
        lo: S,
        hi: S,
    },
    /// Finitely many atoms `atoms[j]` with cumulative probabilities
    /// `cumulative[j] = P(X <= atoms[j])`; the last entry is exactly 1.
    QuantileTable {
        atoms: Vec<S>,
        cumulative: Vec<S>,
    },
    Gaussian {
        mean: S,
        sd: S,
    },
}

impl<S: Scalar> InitialDistribution<S> {
    pub fn uniform(lo: S, hi: S) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidConfig(format!(
                "uniform law needs finite c < d, got [{lo}, {hi}]"
            )));
        }
        Ok(Self::Uniform { lo, hi })
    }

    pub fn gaussian(mean: S, sd: S) -> Result<Self> {
        if !(mean.is_finite() && sd.is_finite() && sd > S::zero()) {
            return Err(Error::InvalidConfig(format!(
                "gaussian law needs finite mean and sd > 0, got ({mean}, {sd})"
            )));
        }
        Ok(Self::Gaussian { mean, sd })
    }

    /// Discrete law from strictly increasing atoms and positive probabilities
    /// summing to one (within 1e-12).
    pub fn table(atoms: Vec<S>, probabilities: Vec<S>) -> Result<Self> {
        if atoms.is_empty() || atoms.len() != probabilities.len() {
            return Err(Error::InvalidConfig(
                "quantile table needs matching, non-empty atoms and probabilities".into(),
            ));
        }
        if atoms.windows(2).any(|w| !(w[0] < w[1])) || atoms.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidConfig(
                "quantile table atoms must be finite and strictly increasing".into(),
            ));
        }
        if probabilities.iter().any(|p| !(*p > S::zero())) {
            return Err(Error::InvalidConfig(
                "quantile table probabilities must be positive".into(),
            ));
        }
        let mut acc = S::zero();
        let mut cumulative: Vec<S> = probabilities
            .iter()
            .map(|&p| {
                acc = acc + p;
                acc
            })
            .collect();
        if (acc - S::one()).abs() > S::lit(1e-12) {
            return Err(Error::InvalidConfig(format!(
                "quantile table probabilities sum to {acc}, not 1"
            )));
        }
        *cumulative.last_mut().unwrap() = S::one();
        Ok(Self::QuantileTable { atoms, cumulative })
    }

    /// `F_0(x) = m((-inf, x])`.
    pub fn cdf(&self, x: S) -> S {
        match self {
            Self::DiracAtZero => {
                if x >= S::zero() {
                    S::one()
                } else {
                    S::zero()
                }
            }
            Self::Uniform { lo, hi } => ((x - *lo) / (*hi - *lo)).max(S::zero()).min(S::one()),
            Self::QuantileTable { atoms, cumulative } => {
                let count = atoms.partition_point(|a| *a <= x);
                if count == 0 {
                    S::zero()
                } else {
                    cumulative[count - 1]
                }
            }
            Self::Gaussian { mean, sd } => normal_cdf((x - *mean) / *sd),
        }
    }

    /// `F_0^{-1}(u) = inf { x : F_0(x) >= u }` for `u` in (0, 1).
    pub fn quantile(&self, u: S) -> Result<S> {
        if !(u > S::zero() && u < S::one()) {
            return Err(Error::domain("u", u.as_f64(), "(0, 1)"));
        }
        Ok(self.quantile_unchecked(u))
    }

    fn quantile_unchecked(&self, u: S) -> S {
        match self {
            Self::DiracAtZero => S::zero(),
            Self::Uniform { lo, hi } => *lo + u * (*hi - *lo),
            Self::QuantileTable { atoms, cumulative } => {
                let j = cumulative.partition_point(|c| *c < u).min(atoms.len() - 1);
                atoms[j]
            }
            Self::Gaussian { mean, sd } => *mean + *sd * normal_quantile(u),
        }
    }

    /// Smallest interval `[c, d]` with `m([c, d]) = 1`, when bounded.
    pub fn support(&self) -> Option<(S, S)> {
        match self {
            Self::DiracAtZero => Some((S::zero(), S::zero())),
            Self::Uniform { lo, hi } => Some((*lo, *hi)),
            Self::QuantileTable { atoms, .. } => Some((atoms[0], *atoms.last().unwrap())),
            Self::Gaussian { .. } => None,
        }
    }

    /// Levels `u` in (0, 1) where the quantile function jumps.
    fn quantile_jumps(&self) -> Vec<S> {
        match self {
            Self::QuantileTable { cumulative, .. } => {
                cumulative[..cumulative.len() - 1].to_vec()
            }
            _ => Vec::new(),
        }
    }
}

impl<S: Scalar> std::str::FromStr for InitialDistribution<S> {
    type Err = Error;

    /// Parses `dirac0`, `uniform:c,d` or `gauss:mu,sd`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "dirac0" {
            return Ok(Self::DiracAtZero);
        }
        let (kind, args) = s.split_once(':').ok_or_else(|| {
            Error::InvalidConfig(format!(
                "unknown distribution '{s}' (expected dirac0, uniform:c,d or gauss:mu,sd)"
            ))
        })?;
        let nums = args
            .split(',')
            .map(|a| {
                a.trim()
                    .parse::<f64>()
                    .map(S::lit)
                    .map_err(|e| Error::InvalidConfig(format!("distribution parameter '{a}': {e}")))
            })
            .collect::<Result<Vec<S>>>()?;
        match (kind, nums.as_slice()) {
            ("uniform", [c, d]) => Self::uniform(*c, *d),
            ("gauss", [mu, sd]) => Self::gaussian(*mu, *sd),
            _ => Err(Error::InvalidConfig(format!("malformed distribution '{s}'"))),
        }
    }
}

/// Deterministic quantile placement `x_i = F_0^{-1}((2i - 1) / (2N))`,
/// the W1-optimal N-point approximation of `m`.
pub fn optimal_positions<S: Scalar>(m: &InitialDistribution<S>, n: usize) -> Vec<S> {
    let two_n = S::from_count(2 * n);
    (1..=n)
        .map(|i| m.quantile_unchecked(S::from_count(2 * i - 1) / two_n))
        .collect()
}

/// Inverse-transform sampling of `N` i.i.d. draws from `m`; draw `i` uses
/// stream position `i`.
pub fn iid_positions<S: Scalar>(
    m: &InitialDistribution<S>,
    n: usize,
    stream: &NoiseStream,
) -> Vec<S> {
    (0..n as u64)
        .map(|i| m.quantile_unchecked(stream.uniform(i)))
        .collect()
}

/// W1 distance between the empirical measure of `positions` and `m`,
/// `int_0^1 |x_(ceil(uN)) - F_0^{-1}(u)| du`, integrated cell by cell.
///
/// Each cell `[(i-1)/N, i/N]` is split where the integrand has a kink
/// (`u = F_0(x_i)`) or the quantile jumps, then integrated adaptively to
/// [`INIT_W1_REL_TOL`].
pub fn init_w1_to_m<S: Scalar>(positions: &[S], m: &InitialDistribution<S>) -> Result<S> {
    if positions.is_empty() {
        return Err(Error::EmptyInput);
    }
    if let Some(index) = positions.windows(2).position(|w| w[1] < w[0]) {
        return Err(Error::NotSorted { index: index + 1 });
    }
    let n = positions.len();
    let nn = S::from_count(n);
    let jumps = m.quantile_jumps();
    let mut total = S::zero();
    for (i, &x) in positions.iter().enumerate() {
        let lo = S::from_count(i) / nn;
        let hi = S::from_count(i + 1) / nn;
        let mut cuts = vec![lo, hi];
        let kink = m.cdf(x);
        cuts.extend(
            std::iter::once(kink)
                .chain(jumps.iter().copied())
                .filter(|&u| u > lo && u < hi),
        );
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        cuts.dedup();
        let width = hi - lo;
        let tol = Tolerance::relative(INIT_W1_REL_TOL)
            .with_abs((1e-15 * width.as_f64() * (1.0 + x.abs().as_f64())).max(f64::MIN_POSITIVE));
        for w in cuts.windows(2) {
            let q = integrate(|u| (x - m.quantile_unchecked(u)).abs(), w[0], w[1], tol)?;
            total = total + q.value;
        }
    }
    Ok(total)
}

/// How a simulation places its particles at time 0.
#[derive(Clone, Debug, PartialEq)]
pub enum Initialization<S> {
    /// All particles at the origin.
    Dirac,
    /// Quantile placement for the given law.
    Optimal(InitialDistribution<S>),
    /// I.i.d. inverse-transform samples from the given law.
    Iid(InitialDistribution<S>),
}

impl<S: Scalar> Initialization<S> {
    pub fn law(&self) -> InitialDistribution<S> {
        match self {
            Self::Dirac => InitialDistribution::DiracAtZero,
            Self::Optimal(m) | Self::Iid(m) => m.clone(),
        }
    }

    /// True when every particle starts at the origin regardless of sampling.
    pub fn is_dirac_at_zero(&self) -> bool {
        matches!(self.law(), InitialDistribution::DiracAtZero)
    }

    pub fn positions(&self, n: usize, stream: &NoiseStream) -> Vec<S> {
        match self {
            Self::Dirac => vec![S::zero(); n],
            Self::Optimal(m) => optimal_positions(m, n),
            Self::Iid(m) => iid_positions(m, n, stream),
        }
    }

    /// Combines an `--init` rule name (`dirac`, `optimal`, `iid`) with a law.
    pub fn from_rule(rule: &str, law: InitialDistribution<S>) -> Result<Self> {
        match rule.trim() {
            "dirac" => Ok(Self::Dirac),
            "optimal" => Ok(Self::Optimal(law)),
            "iid" => Ok(Self::Iid(law)),
            other => Err(Error::InvalidConfig(format!(
                "unknown init rule '{other}' (expected dirac, optimal or iid)"
            ))),
        }
    }
}
