//! Euler discretization of the mean-field rank-based particle system.
//!
//! Between grid times every particle moves with a drift that depends only on
//! its rank among the current positions, plus independent Brownian noise:
//!
//! `x_i <- x_i + drift(rank_i) * dt + sigma * sqrt(dt) * xi_i`.
//!
//! Increment `xi_i` at step `k` is read from position `k * N + i` of the
//! run's [`NoiseStream`]; i.i.d. initial positions come from the child stream
//! `derive(INIT_STREAM)`.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::flux::FluxFunction;
use crate::init::Initialization;
use crate::rng::{GaussianSource, NoiseStream};
use crate::scalar::Scalar;

/// Child-stream index reserved for i.i.d. initial positions.
pub const INIT_STREAM: u64 = u64::MAX;

/// Relative slack when deciding whether `T / h` is an integer.
const DIVISIBILITY_TOL: f64 = 1e-9;

/// Which drift a particle of rank `r` receives.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum DriftScheme {
    /// `lambda^N(r) = N (Lambda(r/N) - Lambda((r-1)/N))`.
    #[default]
    RankCoefficient,
    /// `lambda(r / N)`.
    FractionalRank,
}

impl std::str::FromStr for DriftScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "rank" => Ok(Self::RankCoefficient),
            "frac" => Ok(Self::FractionalRank),
            other => Err(Error::InvalidConfig(format!(
                "unknown scheme '{other}' (expected rank or frac)"
            ))),
        }
    }
}

/// How ranks are assigned to particles sharing a position.
///
/// Ties only arise from degenerate initial laws (all particles at the
/// origin, atoms of a discrete law); after one step with noise positions
/// are distinct almost surely.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum TieRule {
    /// Ranks `1..=N` of the sort by (position, particle index): tied
    /// particles receive distinct consecutive ranks.
    #[default]
    Ordinal,
    /// `r_i = #{ j : x_j <= x_i }`: tied particles all receive the largest
    /// rank of their group.
    Count,
}

impl std::str::FromStr for TieRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "ordinal" => Ok(Self::Ordinal),
            "count" => Ok(Self::Count),
            other => Err(Error::InvalidConfig(format!(
                "unknown tie rule '{other}' (expected ordinal or count)"
            ))),
        }
    }
}

/// Everything needed to reproduce one simulation run.
#[derive(Clone, Debug, PartialEq)]
pub struct SimulationConfig<S> {
    pub n_particles: usize,
    /// Time step `h`.
    pub step: S,
    /// Horizon `T`.
    pub horizon: S,
    /// Diffusion coefficient `sigma` (not its square).
    pub sigma: S,
    pub flux: FluxFunction<S>,
    pub scheme: DriftScheme,
    pub init: Initialization<S>,
    pub ties: TieRule,
    pub seed: u64,
}

/// Decomposition of `[0, T]` into `full_steps` steps of length `step`
/// followed by an optional shorter final step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepSchedule<S> {
    pub full_steps: u64,
    pub step: S,
    pub remainder: Option<S>,
}

impl<S: Scalar> StepSchedule<S> {
    pub fn total_steps(&self) -> u64 {
        self.full_steps + u64::from(self.remainder.is_some())
    }

    /// Length of step `k` (0-based).
    pub fn dt(&self, k: u64) -> S {
        if k < self.full_steps {
            self.step
        } else {
            self.remainder.unwrap_or(self.step)
        }
    }
}

impl<S: Scalar> SimulationConfig<S> {
    /// Burgers flux, rank coefficients, Dirac initialization, ordinal ties, seed 0.
    pub fn new(n_particles: usize, step: S, horizon: S, sigma: S) -> Self {
        Self {
            n_particles,
            step,
            horizon,
            sigma,
            flux: FluxFunction::burgers(),
            scheme: DriftScheme::RankCoefficient,
            init: Initialization::Dirac,
            ties: TieRule::Ordinal,
            seed: 0,
        }
    }

    pub fn with_flux(mut self, flux: FluxFunction<S>) -> Self {
        self.flux = flux;
        self
    }

    pub fn with_scheme(mut self, scheme: DriftScheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn with_init(mut self, init: Initialization<S>) -> Self {
        self.init = init;
        self
    }

    pub fn with_ties(mut self, ties: TieRule) -> Self {
        self.ties = ties;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_particles == 0 {
            return Err(Error::InvalidConfig("N must be at least 1".into()));
        }
        if self.n_particles > u32::MAX as usize {
            return Err(Error::InvalidConfig(format!(
                "N = {} exceeds the supported maximum",
                self.n_particles
            )));
        }
        if !(self.horizon.is_finite() && self.horizon > S::zero()) {
            return Err(Error::InvalidConfig(format!(
                "horizon T must be positive, got {}",
                self.horizon
            )));
        }
        if !(self.step > S::zero() && self.step <= self.horizon) {
            return Err(Error::InvalidConfig(format!(
                "step h must satisfy 0 < h <= T, got h = {} with T = {}",
                self.step, self.horizon
            )));
        }
        if !(self.sigma.is_finite() && self.sigma > S::zero()) {
            return Err(Error::InvalidConfig(format!(
                "sigma must be positive, got {}",
                self.sigma
            )));
        }
        Ok(())
    }

    /// `floor(T / h)` steps of length `h`, then one step of `T - floor(T/h) h`
    /// when that is positive. A ratio within a relative 1e-9 of an integer
    /// counts as divisible.
    pub fn schedule(&self) -> StepSchedule<S> {
        let q = (self.horizon / self.step).as_f64();
        let nearest = q.round();
        if (q - nearest).abs() <= DIVISIBILITY_TOL * q.max(1.0) {
            return StepSchedule {
                full_steps: nearest as u64,
                step: self.step,
                remainder: None,
            };
        }
        let full = q.floor();
        let rest = self.horizon - S::lit(full) * self.step;
        StepSchedule {
            full_steps: full as u64,
            step: self.step,
            remainder: (rest > S::zero()).then_some(rest),
        }
    }

    /// Drift of the particle of rank `r` is entry `r - 1`.
    pub fn drift_table(&self) -> Result<Vec<S>> {
        match self.scheme {
            DriftScheme::RankCoefficient => self.flux.rank_coefficients(self.n_particles),
            DriftScheme::FractionalRank => self.flux.fractional_rank_drifts(self.n_particles),
        }
    }

    pub fn noise(&self) -> NoiseStream {
        NoiseStream::new(self.seed)
    }

    pub fn initial_positions(&self) -> Vec<S> {
        self.init
            .positions(self.n_particles, &self.noise().derive(INIT_STREAM))
    }
}

/// Particle positions at one time, in original particle order.
#[derive(Clone, Debug, PartialEq)]
pub struct ParticleEnsemble<S> {
    pub time: S,
    pub positions: Vec<S>,
}

impl<S: Scalar> ParticleEnsemble<S> {
    pub fn new(time: S, positions: Vec<S>) -> Self {
        Self { time, positions }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Order statistics: a nondecreasing copy of the positions.
    pub fn sorted_view(&self) -> Vec<S> {
        sorted_view(&self.positions)
    }
}

#[inline]
fn cmp_scalar<S: Scalar>(a: &S, b: &S) -> Ordering {
    a.partial_cmp(b).unwrap_or(Ordering::Equal)
}

/// Nondecreasing copy of `positions` (stable sort).
pub fn sorted_view<S: Scalar>(positions: &[S]) -> Vec<S> {
    let mut v = positions.to_vec();
    v.sort_by(cmp_scalar);
    v
}

/// Indices that sort `positions`, ties broken by index.
fn sort_order<S: Scalar>(positions: &[S]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..positions.len()).collect();
    idx.sort_by(|&a, &b| cmp_scalar(&positions[a], &positions[b]).then(a.cmp(&b)));
    idx
}

/// `r_i = #{ j : x_j <= x_i }`.
pub fn rank_counts<S: Scalar>(positions: &[S]) -> Vec<usize> {
    let order = sort_order(positions);
    let mut ranks = vec![0; positions.len()];
    let mut start = 0;
    while start < order.len() {
        let value = positions[order[start]];
        let end = start
            + order[start..]
                .iter()
                .take_while(|&&i| positions[i] == value)
                .count();
        for &i in &order[start..end] {
            ranks[i] = end;
        }
        start = end;
    }
    ranks
}

/// Ranks `1..=N` by (position, index).
pub fn ordinal_ranks<S: Scalar>(positions: &[S]) -> Vec<usize> {
    let mut ranks = vec![0; positions.len()];
    for (r, i) in sort_order(positions).into_iter().enumerate() {
        ranks[i] = r + 1;
    }
    ranks
}

/// Reusable stepping state for one run.
pub struct Simulator<S, G = NoiseStream> {
    config: SimulationConfig<S>,
    drifts: Vec<S>,
    noise: G,
    /// (position, particle) pairs, kept in the previous step's sorted order
    /// so the next sort starts from nearly sorted input.
    keyed: Vec<(S, u32)>,
}

impl<S: Scalar> Simulator<S, NoiseStream> {
    pub fn new(config: SimulationConfig<S>) -> Result<Self> {
        let noise = config.noise();
        Self::with_noise(config, noise)
    }
}

impl<S: Scalar, G: GaussianSource<S>> Simulator<S, G> {
    /// Simulator driven by an arbitrary Gaussian source (coupled or
    /// noiseless runs).
    pub fn with_noise(config: SimulationConfig<S>, noise: G) -> Result<Self> {
        config.validate()?;
        let drifts = config.drift_table()?;
        let keyed = (0..config.n_particles as u32)
            .map(|i| (S::zero(), i))
            .collect();
        Ok(Self {
            config,
            drifts,
            noise,
            keyed,
        })
    }

    pub fn config(&self) -> &SimulationConfig<S> {
        &self.config
    }

    pub fn initial_ensemble(&self) -> ParticleEnsemble<S> {
        ParticleEnsemble::new(S::zero(), self.config.initial_positions())
    }

    /// Advances `state` by `dt` in place, reading noise for step `step_index`.
    pub fn step(&mut self, state: &mut ParticleEnsemble<S>, step_index: u64, dt: S) {
        let n = self.drifts.len();
        debug_assert_eq!(state.positions.len(), n);
        let positions = &mut state.positions;
        for entry in self.keyed.iter_mut() {
            entry.0 = positions[entry.1 as usize];
        }
        self.keyed
            .sort_unstable_by(|a, b| cmp_scalar(&a.0, &b.0).then(a.1.cmp(&b.1)));

        let diffusion = self.config.sigma * dt.sqrt();
        let base = step_index * n as u64;
        let mut start = 0;
        while start < n {
            let end = match self.config.ties {
                TieRule::Ordinal => start + 1,
                TieRule::Count => {
                    let v = self.keyed[start].0;
                    start + self.keyed[start..].iter().take_while(|e| e.0 == v).count()
                }
            };
            for j in start..end {
                // ordinal: rank j + 1; count: rank `end` for the whole group
                let drift = match self.config.ties {
                    TieRule::Ordinal => self.drifts[j],
                    TieRule::Count => self.drifts[end - 1],
                };
                let p = self.keyed[j].1 as usize;
                let xi = self.noise.standard_normal(base + p as u64);
                positions[p] = positions[p] + drift * dt + diffusion * xi;
            }
            start = end;
        }
        state.time = state.time + dt;
    }

    /// Runs from the initial ensemble to the horizon.
    pub fn run(&mut self) -> ParticleEnsemble<S> {
        self.run_observed(|_| {})
    }

    /// Like [`run`](Self::run), calling `observe` on the initial ensemble and
    /// after every step.
    pub fn run_observed<F: FnMut(&ParticleEnsemble<S>)>(&mut self, mut observe: F) -> ParticleEnsemble<S> {
        let schedule = self.config.schedule();
        let mut state = self.initial_ensemble();
        observe(&state);
        for k in 0..schedule.total_steps() {
            let dt = schedule.dt(k);
            self.step(&mut state, k, dt);
            // only the last step can be partial
            state.time = if k + 1 == schedule.total_steps() {
                self.config.horizon
            } else {
                S::lit((k + 1) as f64) * schedule.step
            };
            observe(&state);
        }
        state
    }
}

/// One Euler step from `state`, with ranks taken from `state`'s positions.
pub fn euler_step<S: Scalar, G: GaussianSource<S>>(
    state: &ParticleEnsemble<S>,
    config: &SimulationConfig<S>,
    dt: S,
    step_index: u64,
    noise: &G,
) -> Result<ParticleEnsemble<S>> {
    if !(dt > S::zero() && dt <= config.step) {
        return Err(Error::domain("dt", dt.as_f64(), "(0, h]"));
    }
    if state.positions.len() != config.n_particles {
        return Err(Error::LengthMismatch {
            left: state.positions.len(),
            right: config.n_particles,
        });
    }
    let mut sim = Simulator::with_noise(config.clone(), NoiseRef(noise))?;
    let mut next = state.clone();
    sim.step(&mut next, step_index, dt);
    Ok(next)
}

struct NoiseRef<'a, G>(&'a G);

impl<S, G: GaussianSource<S>> GaussianSource<S> for NoiseRef<'_, G> {
    #[inline]
    fn standard_normal(&self, position: u64) -> S {
        self.0.standard_normal(position)
    }
}

/// Simulates `config` to its horizon.
pub fn simulate<S: Scalar>(config: &SimulationConfig<S>) -> Result<ParticleEnsemble<S>> {
    Ok(Simulator::new(config.clone())?.run())
}
