//! Monte-Carlo convergence studies: strong and weak error estimates with
//! 95% precision, swept over `N` or `h`, and table output.
//!
//! Run `r` of a study point uses seed `NoiseStream::new(point_seed).derive(r)`.
//! Each sweep value gets its own point seed `derive(sweep_index)` of the base
//! seed unless common random numbers are requested, in which case every
//! point reuses the base seed. Runs execute on a rayon pool; their results
//! are collected in run-index order before any reduction, so tables do not
//! depend on the number of worker threads.

use std::io::Write;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{simulate, SimulationConfig};
use crate::error::{Error, Result};
use crate::exact::BurgersSolution;
use crate::metrics::{empirical_cdf_sorted, phi_grid, psi_grid_free, GridSpec};
use crate::rng::NoiseStream;
use crate::scalar::Scalar;
use crate::stats::{log_log_slope, mean_and_variance, precision, KahanSum};

/// Default number of quantile cells of the weak estimator.
pub const DEFAULT_GRID_K: usize = 5000;

/// Runs simulated concurrently before their CDF vectors are folded into
/// the batch accumulators.
const WEAK_CHUNK: usize = 64;

#[derive(Clone, Debug, PartialEq)]
pub enum Sweep<S> {
    /// Particle counts at the base step.
    OverN(Vec<usize>),
    /// Time steps at the base particle count.
    OverH(Vec<S>),
}

impl<S: Scalar> Sweep<S> {
    pub fn len(&self) -> usize {
        match self {
            Sweep::OverN(v) => v.len(),
            Sweep::OverH(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn parameter(&self, i: usize) -> f64 {
        match self {
            Sweep::OverN(v) => v[i] as f64,
            Sweep::OverH(v) => v[i].as_f64(),
        }
    }

    fn apply(&self, i: usize, base: &SimulationConfig<S>) -> SimulationConfig<S> {
        let mut cfg = base.clone();
        match self {
            Sweep::OverN(v) => cfg.n_particles = v[i],
            Sweep::OverH(v) => cfg.step = v[i],
        }
        cfg
    }
}

impl<S: Scalar> std::str::FromStr for Sweep<S> {
    type Err = Error;

    /// `n:250,1000,4000` or `h:0.5,0.25`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidConfig(format!("malformed sweep '{s}' (expected n:... or h:...)"));
        let (axis, values) = s.split_once(':').ok_or_else(bad)?;
        let items = values.split(',').map(str::trim).filter(|v| !v.is_empty());
        let sweep = match axis.trim() {
            "n" | "N" => Sweep::OverN(
                items
                    .map(|v| v.parse::<usize>().map_err(|_| bad()))
                    .collect::<Result<_>>()?,
            ),
            "h" => Sweep::OverH(
                items
                    .map(|v| v.parse::<f64>().map(S::lit).map_err(|_| bad()))
                    .collect::<Result<_>>()?,
            ),
            _ => return Err(bad()),
        };
        if sweep.is_empty() {
            return Err(bad());
        }
        Ok(sweep)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorKind {
    /// `E[W1(mu^N_T, mu_T)]` via the grid-free estimator.
    Strong,
    /// `W1(E[mu^N_T], mu_T)` via the grid estimator.
    Weak,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StudySpec<S> {
    /// Horizon, sigma, flux, scheme, init, seed, and the non-swept parameter.
    pub base: SimulationConfig<S>,
    pub sweep: Sweep<S>,
    pub kind: ErrorKind,
    pub runs: usize,
    /// Weak studies only; must divide `runs`.
    pub batches: usize,
    /// Weak studies only.
    pub grid_k: usize,
    /// Worker threads; `None` uses the global rayon pool.
    pub threads: Option<usize>,
    pub common_random_numbers: bool,
}

/// `min(100, R / 10)`.
pub fn default_batches(runs: usize) -> usize {
    (runs / 10).min(100)
}

impl<S: Scalar> StudySpec<S> {
    pub fn strong(base: SimulationConfig<S>, sweep: Sweep<S>, runs: usize) -> Self {
        Self {
            base,
            sweep,
            kind: ErrorKind::Strong,
            runs,
            batches: default_batches(runs),
            grid_k: DEFAULT_GRID_K,
            threads: None,
            common_random_numbers: false,
        }
    }

    pub fn weak(
        base: SimulationConfig<S>,
        sweep: Sweep<S>,
        runs: usize,
        batches: usize,
        grid_k: usize,
    ) -> Self {
        Self {
            kind: ErrorKind::Weak,
            batches,
            grid_k,
            ..Self::strong(base, sweep, runs)
        }
    }

    pub fn with_threads(mut self, threads: Option<usize>) -> Self {
        self.threads = threads;
        self
    }

    pub fn with_common_random_numbers(mut self, on: bool) -> Self {
        self.common_random_numbers = on;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.sweep.is_empty() {
            return Err(Error::InvalidConfig("empty sweep".into()));
        }
        check_runs(self.runs)?;
        if self.kind == ErrorKind::Weak {
            check_batches(self.runs, self.batches)?;
            if self.grid_k < 2 {
                return Err(Error::InvalidConfig(format!(
                    "grid needs K >= 2 cells, got {}",
                    self.grid_k
                )));
            }
        }
        if self.threads == Some(0) {
            return Err(Error::InvalidConfig("thread count must be positive".into()));
        }
        reference(&self.base).map(|_| ())
    }
}

fn check_runs(runs: usize) -> Result<()> {
    if runs < 2 {
        return Err(Error::InvalidConfig(format!("need at least 2 runs, got {runs}")));
    }
    Ok(())
}

fn check_batches(runs: usize, batches: usize) -> Result<()> {
    if batches < 2 || !runs.is_multiple_of(batches) {
        return Err(Error::InvalidConfig(format!(
            "batches must be >= 2 and divide the run count ({runs}), got {batches}"
        )));
    }
    Ok(())
}

/// Estimate of an error with its 95% precision half-width.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointEstimate {
    pub estimation: f64,
    pub precision: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorRow {
    pub parameter: f64,
    pub estimation: f64,
    pub precision: f64,
    /// Previous row's estimation over this one's; absent on the first row.
    pub ratio: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ErrorTable {
    pub rows: Vec<ErrorRow>,
}

impl ErrorTable {
    pub fn from_points(points: &[(f64, PointEstimate)]) -> Self {
        let rows = points
            .iter()
            .enumerate()
            .map(|(i, (parameter, p))| ErrorRow {
                parameter: *parameter,
                estimation: p.estimation,
                precision: p.precision,
                ratio: (i > 0).then(|| points[i - 1].1.estimation / p.estimation),
            })
            .collect();
        Self { rows }
    }

    /// Least-squares slope of `log(estimation)` against `log(parameter)`.
    pub fn log_log_slope(&self) -> Option<f64> {
        let xs: Vec<f64> = self.rows.iter().map(|r| r.parameter).collect();
        let ys: Vec<f64> = self.rows.iter().map(|r| r.estimation).collect();
        log_log_slope(&xs, &ys)
    }
}

/// Seed of run `r` of a study point.
pub fn run_seed(point_seed: u64, run: usize) -> u64 {
    NoiseStream::new(point_seed).derive(run as u64).key()
}

/// Exact Burgers solution for configurations that have one.
pub fn reference<S: Scalar>(config: &SimulationConfig<S>) -> Result<BurgersSolution<S>> {
    if !config.flux.is_burgers() {
        return Err(Error::UnsupportedReference(format!(
            "flux {:?}",
            config.flux.kind()
        )));
    }
    if !config.init.is_dirac_at_zero() {
        return Err(Error::UnsupportedReference(format!(
            "initial law {:?}",
            config.init.law()
        )));
    }
    BurgersSolution::new(config.sigma)
}

/// Strong error against the exact Burgers solution at the horizon.
pub fn strong_error_point<S: Scalar>(config: &SimulationConfig<S>, runs: usize) -> Result<PointEstimate> {
    let solution = reference(config)?;
    let t = config.horizon;
    strong_error_point_with(config, runs, |x| solution.cdf_unchecked(t, x))
}

/// Strong error against an arbitrary reference CDF at the horizon.
pub fn strong_error_point_with<S, F>(config: &SimulationConfig<S>, runs: usize, cdf: F) -> Result<PointEstimate>
where
    S: Scalar,
    F: Fn(S) -> S + Sync,
{
    config.validate()?;
    check_runs(runs)?;
    let values = (0..runs)
        .into_par_iter()
        .map(|r| {
            let cfg = config.clone().with_seed(run_seed(config.seed, r));
            let sorted = simulate(&cfg)?.sorted_view();
            Ok(psi_grid_free(&sorted, &cdf)?.as_f64())
        })
        .collect::<Result<Vec<f64>>>()?;
    let (mean, var) = mean_and_variance(&values).ok_or(Error::EmptyInput)?;
    Ok(PointEstimate {
        estimation: mean,
        precision: precision(var, runs),
    })
}

/// Weak error against the exact Burgers solution at the horizon on a
/// `grid_k`-cell quantile grid.
pub fn weak_error_point<S: Scalar>(
    config: &SimulationConfig<S>,
    runs: usize,
    batches: usize,
    grid_k: usize,
) -> Result<PointEstimate> {
    let solution = reference(config)?;
    let grid = GridSpec::burgers(&solution, config.horizon, grid_k)?;
    weak_error_point_with(config, runs, batches, &grid)
}

/// Weak error on a precomputed grid.
///
/// Per-run empirical CDFs at the midpoint quantiles are summed into one
/// compensated accumulator per (batch, cell). The estimation is the grid
/// estimator of the overall mean vector; the precision is
/// `1.96 sqrt(s_B^2 / B)` with `s_B^2` the unbiased variance of the `B`
/// batch-level estimates.
pub fn weak_error_point_with<S: Scalar>(
    config: &SimulationConfig<S>,
    runs: usize,
    batches: usize,
    grid: &GridSpec<S>,
) -> Result<PointEstimate> {
    config.validate()?;
    check_runs(runs)?;
    check_batches(runs, batches)?;
    let k = grid.k_points();
    let mids = grid.midpoint_quantiles();
    let per_batch = runs / batches;

    let mut sums = vec![KahanSum::new(); batches * k];
    for b in 0..batches {
        let acc = &mut sums[b * k..(b + 1) * k];
        let first = b * per_batch;
        let last = first + per_batch;
        let mut start = first;
        while start < last {
            let end = (start + WEAK_CHUNK).min(last);
            let chunk = (start..end)
                .into_par_iter()
                .map(|r| {
                    let cfg = config.clone().with_seed(run_seed(config.seed, r));
                    let sorted = simulate(&cfg)?.sorted_view();
                    let mut cdf = vec![S::zero(); k];
                    empirical_cdf_sorted(&sorted, mids, &mut cdf);
                    Ok(cdf)
                })
                .collect::<Result<Vec<Vec<S>>>>()?;
            for cdf in &chunk {
                for (a, v) in acc.iter_mut().zip(cdf) {
                    a.add(v.as_f64());
                }
            }
            start = end;
        }
    }

    let to_cdf = |x: f64| S::lit(x.clamp(0.0, 1.0));
    let batch_phis = (0..batches)
        .map(|b| {
            let mean: Vec<S> = sums[b * k..(b + 1) * k]
                .iter()
                .map(|s| to_cdf(s.value() / per_batch as f64))
                .collect();
            Ok(phi_grid(&mean, grid)?.as_f64())
        })
        .collect::<Result<Vec<f64>>>()?;
    let overall: Vec<S> = (0..k)
        .map(|j| {
            let total: KahanSum = (0..batches).map(|b| sums[b * k + j].value()).collect();
            to_cdf(total.value() / runs as f64)
        })
        .collect();
    let estimation = phi_grid(&overall, grid)?.as_f64();
    let (_, var) = mean_and_variance(&batch_phis).ok_or(Error::EmptyInput)?;
    Ok(PointEstimate {
        estimation,
        precision: precision(var, batches),
    })
}

/// Runs every point of the sweep in order.
pub fn run_study<S: Scalar>(spec: &StudySpec<S>) -> Result<ErrorTable> {
    spec.validate()?;
    match spec.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::ThreadPool(e.to_string()))?
            .install(|| study_points(spec)),
        None => study_points(spec),
    }
}

fn study_points<S: Scalar>(spec: &StudySpec<S>) -> Result<ErrorTable> {
    let grid = match spec.kind {
        ErrorKind::Weak => {
            let solution = reference(&spec.base)?;
            Some(GridSpec::burgers(&solution, spec.base.horizon, spec.grid_k)?)
        }
        ErrorKind::Strong => None,
    };
    let mut points = Vec::with_capacity(spec.sweep.len());
    for i in 0..spec.sweep.len() {
        let parameter = spec.sweep.parameter(i);
        let seed = if spec.common_random_numbers {
            spec.base.seed
        } else {
            NoiseStream::new(spec.base.seed).derive(i as u64).key()
        };
        let cfg = spec.sweep.apply(i, &spec.base).with_seed(seed);
        let point = match &grid {
            Some(g) => weak_error_point_with(&cfg, spec.runs, spec.batches, g),
            None => strong_error_point(&cfg, spec.runs),
        }
        .map_err(|e| Error::AtPoint {
            parameter,
            source: Box::new(e),
        })?;
        log::info!(
            "parameter {parameter}: estimation {:.8e} precision {:.3e}",
            point.estimation,
            point.precision
        );
        points.push((parameter, point));
    }
    Ok(ErrorTable::from_points(&points))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::InvalidConfig(format!(
                "unknown format '{other}' (expected csv or json)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Destination {
    Stdout,
    Path(PathBuf),
}

/// `value` with 8 significant digits in positional notation.
pub fn format_sig8(value: f64) -> String {
    if !value.is_finite() {
        return value.to_string();
    }
    if value == 0.0 {
        return "0.0000000".into();
    }
    let sci = format!("{:.7e}", value);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => ("-", m),
        None => ("", mantissa),
    };
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();
    let body = if exp < 0 {
        format!("0.{}{}", "0".repeat((-exp - 1) as usize), digits)
    } else if (exp as usize) < digits.len() - 1 {
        let (int, frac) = digits.split_at(exp as usize + 1);
        format!("{int}.{frac}")
    } else {
        format!("{}{}", digits, "0".repeat(exp as usize + 1 - digits.len()))
    };
    format!("{sign}{body}")
}

fn rounded(v: f64) -> f64 {
    format_sig8(v).parse().unwrap_or(v)
}

fn render(table: &ErrorTable, format: Format) -> Result<Vec<u8>> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let ser = |e: csv::Error| Error::Serialize(e.to_string());
            w.write_record(["parameter", "estimation", "precision", "ratio"])
                .map_err(ser)?;
            for row in &table.rows {
                w.write_record([
                    row.parameter.to_string(),
                    format_sig8(row.estimation),
                    format_sig8(row.precision),
                    row.ratio.map(format_sig8).unwrap_or_default(),
                ])
                .map_err(ser)?;
            }
            w.into_inner().map_err(|e| Error::Serialize(e.to_string()))
        }
        Format::Json => {
            let rows: Vec<ErrorRow> = table
                .rows
                .iter()
                .map(|r| ErrorRow {
                    parameter: r.parameter,
                    estimation: rounded(r.estimation),
                    precision: rounded(r.precision),
                    ratio: r.ratio.map(rounded),
                })
                .collect();
            let mut out = serde_json::to_vec_pretty(&rows).map_err(|e| Error::Serialize(e.to_string()))?;
            out.push(b'\n');
            Ok(out)
        }
    }
}

/// Writes `table` as CSV (`parameter,estimation,precision,ratio`, empty
/// ratio on the first row) or as a JSON array of rows with a null first ratio.
pub fn emit(table: &ErrorTable, format: Format, destination: &Destination) -> Result<()> {
    let bytes = render(table, format)?;
    match destination {
        Destination::Stdout => {
            let mut out = std::io::stdout().lock();
            out.write_all(&bytes)
                .and_then(|_| out.flush())
                .map_err(|source| Error::Io {
                    path: PathBuf::from("<stdout>"),
                    source,
                })
        }
        Destination::Path(path) => std::fs::write(path, bytes).map_err(|source| Error::Io {
            path: path.clone(),
            source,
        }),
    }
}

/// Parses a JSON table written by [`emit`].
pub fn parse_json(text: &str) -> Result<ErrorTable> {
    let rows: Vec<ErrorRow> = serde_json::from_str(text).map_err(|e| Error::Serialize(e.to_string()))?;
    Ok(ErrorTable { rows })
}

/// Named study presets. The default settings are reduced so that each
/// table runs on a desktop; `full` restores the full reference settings.
///
/// | name      | sweep                      | fixed     | runs (desk / full) | batches |
/// |-----------|----------------------------|-----------|--------------------|---------|
/// | `strong-n`| N = 250, 1000, 4000 (16000)| h = 0.002 | 100                |         |
/// | `strong-h`| h = 1/2 .. 1/16            | N = 5e4 / 5e5 | 100            |         |
/// | `weak-n`  | N = 100, 200, 400          | h = 0.002 | 5000 / 20000       | 50 / 100|
/// | `weak-h`  | h = 1/2 .. 1/16            | N = 2e4 / 1e5 | 1000           | 20      |
///
/// All use T = 1, sigma^2 = 0.2, Burgers flux, Dirac initialization,
/// K = 5000 and base seed 42.
pub fn preset(name: &str, full: bool) -> Result<StudySpec<f64>> {
    let base = |n: usize, h: f64| SimulationConfig::new(n, h, 1.0, 0.2f64.sqrt()).with_seed(42);
    let halvings = || Sweep::OverH(vec![0.5, 0.25, 0.125, 0.0625]);
    let spec = match name {
        "strong-n" => {
            let ns = if full {
                vec![250, 1000, 4000, 16000]
            } else {
                vec![250, 1000, 4000]
            };
            StudySpec::strong(base(250, 0.002), Sweep::OverN(ns), 100)
        }
        "strong-h" => StudySpec::strong(base(if full { 500_000 } else { 50_000 }, 0.5), halvings(), 100),
        "weak-n" => {
            let (runs, batches) = if full { (20_000, 100) } else { (5000, 50) };
            StudySpec::weak(
                base(100, 0.002),
                Sweep::OverN(vec![100, 200, 400]),
                runs,
                batches,
                DEFAULT_GRID_K,
            )
        }
        "weak-h" => StudySpec::weak(
            base(if full { 100_000 } else { 20_000 }, 0.5),
            halvings(),
            1000,
            20,
            DEFAULT_GRID_K,
        ),
        other => {
            return Err(Error::InvalidConfig(format!(
                "unknown preset '{other}' (expected strong-n, strong-h, weak-n or weak-h)"
            )))
        }
    };
    Ok(spec)
}
