use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rankflow::harness::{default_batches, preset, reference, DEFAULT_GRID_K};
use rankflow::{
    emit, psi_grid_free, run_study, simulate, Burgers, Config, Destination, DriftScheme,
    Distribution, Error, Flux, Format, Init, StudySpec, Sweep, TieRule,
};

#[derive(Parser)]
#[command(name = "rankflow", version, about = "Rank-based particle simulation of viscous conservation laws")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one particle system to the horizon.
    Simulate(SimulateArgs),
    /// Tabulate quantiles of the exact Burgers solution.
    Exact(ExactArgs),
    /// Strong-error convergence study.
    Strong(StudyArgs),
    /// Weak-error convergence study.
    Weak(StudyArgs),
}

#[derive(Args, Clone)]
struct ModelArgs {
    /// Flux: burgers, quadratic or poly:c0,c1,...
    #[arg(long, default_value = "burgers")]
    flux: Flux,
    /// Drift scheme: rank or frac.
    #[arg(long, default_value = "rank")]
    scheme: DriftScheme,
    /// Initialization rule: dirac, optimal or iid.
    #[arg(long, default_value = "dirac")]
    init: String,
    /// Initial law: dirac0, uniform:c,d or gauss:mu,sd.
    #[arg(long, default_value = "dirac0")]
    dist: Distribution,
    /// Tie rule for equal positions: ordinal or count.
    #[arg(long, default_value = "ordinal")]
    ties: TieRule,
}

impl ModelArgs {
    fn apply(&self, cfg: Config) -> Result<Config, Error> {
        Ok(cfg
            .with_flux(self.flux.clone())
            .with_scheme(self.scheme)
            .with_init(Init::from_rule(&self.init, self.dist.clone())?)
            .with_ties(self.ties))
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    particles: usize,
    #[arg(long)]
    step: f64,
    #[arg(long, default_value_t = 1.0)]
    horizon: f64,
    #[arg(long, default_value_t = 0.2)]
    sigma2: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    model: ModelArgs,
    /// Write final positions as CSV (index,position).
    #[arg(long)]
    emit_positions: Option<PathBuf>,
}

#[derive(Args)]
struct ExactArgs {
    #[arg(long, default_value_t = 0.2)]
    sigma2: f64,
    #[arg(long, default_value_t = 1.0)]
    horizon: f64,
    /// Number of quantile cells K.
    #[arg(long, default_value_t = 100)]
    grid: usize,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct StudyArgs {
    /// n:N1,N2,... or h:h1,h2,...
    #[arg(long)]
    sweep: Option<Sweep<f64>>,
    /// Start from a named preset (n or h); explicit flags override it.
    #[arg(long, value_parser = ["n", "h"])]
    preset: Option<String>,
    /// Use the full reference settings of the preset instead of the reduced ones.
    #[arg(long)]
    full: bool,
    #[arg(long)]
    particles: Option<usize>,
    #[arg(long)]
    step: Option<f64>,
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long)]
    sigma2: Option<f64>,
    #[arg(long)]
    runs: Option<usize>,
    /// Weak studies: batches dividing the run count.
    #[arg(long)]
    batches: Option<usize>,
    /// Weak studies: quantile cells K.
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    model: ModelArgs,
    /// Reuse the same random numbers at every sweep value.
    #[arg(long)]
    common_random_numbers: bool,
    #[arg(long, default_value = "csv")]
    format: Format,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, env = "RANKFLOW_THREADS")]
    threads: Option<usize>,
}

fn io_error(path: &std::path::Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn run_simulate(args: SimulateArgs) -> Result<(), Error> {
    let cfg = Config::new(args.particles, args.step, args.horizon, sigma_of(args.sigma2)?)
        .with_seed(args.seed);
    let cfg = args.model.apply(cfg)?;
    let out = simulate(&cfg)?;
    let sorted = out.sorted_view();
    let mean = out.positions.iter().sum::<f64>() / out.len() as f64;
    print!(
        "time {} particles {} mean {:.8} min {:.8} max {:.8}",
        out.time,
        out.len(),
        mean,
        sorted[0],
        sorted[sorted.len() - 1]
    );
    if let Ok(sol) = reference(&cfg) {
        let psi = psi_grid_free(&sorted, |x| sol.cdf(cfg.horizon, x).unwrap_or(f64::NAN))?;
        print!(" w1_to_exact {psi:.8}");
    }
    println!();
    if let Some(path) = &args.emit_positions {
        let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
        w.write_record(["index", "position"]).map_err(|e| csv_error(path, e))?;
        for (i, x) in out.positions.iter().enumerate() {
            w.write_record([i.to_string(), x.to_string()])
                .map_err(|e| csv_error(path, e))?;
        }
        w.flush().map_err(io_error(path))?;
    }
    Ok(())
}

fn csv_error(path: &std::path::Path, e: csv::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source: e.into(),
    }
}

fn sigma_of(sigma2: f64) -> Result<f64, Error> {
    if sigma2 > 0.0 && sigma2.is_finite() {
        Ok(sigma2.sqrt())
    } else {
        Err(Error::InvalidConfig(format!("sigma^2 must be positive, got {sigma2}")))
    }
}

fn run_exact(args: ExactArgs) -> Result<(), Error> {
    let sol = Burgers::new(sigma_of(args.sigma2)?)?;
    if args.grid < 2 {
        return Err(Error::InvalidConfig(format!("grid needs K >= 2 cells, got {}", args.grid)));
    }
    let rows = (1..args.grid)
        .map(|k| {
            let u = k as f64 / args.grid as f64;
            sol.quantile(args.horizon, u).map(|x| (u, x))
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let sink: Box<dyn std::io::Write> = match &args.out {
        Some(path) => Box::new(std::fs::File::create(path).map_err(io_error(path))?),
        None => Box::new(std::io::stdout().lock()),
    };
    let label = args.out.clone().unwrap_or_else(|| PathBuf::from("<stdout>"));
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(["level", "quantile"]).map_err(|e| csv_error(&label, e))?;
    for (u, x) in rows {
        w.write_record([u.to_string(), format!("{x:.15e}")])
            .map_err(|e| csv_error(&label, e))?;
    }
    w.flush().map_err(io_error(&label))
}

fn study_spec(args: &StudyArgs, weak: bool) -> Result<StudySpec<f64>, Error> {
    let kind = if weak { "weak" } else { "strong" };
    let axis = match (&args.preset, &args.sweep) {
        (Some(p), _) => Some(p.clone()),
        (None, Some(Sweep::OverN(_))) if args.full => Some("n".to_string()),
        (None, Some(Sweep::OverH(_))) if args.full => Some("h".to_string()),
        _ => None,
    };
    let mut spec = match axis {
        Some(axis) => preset(&format!("{kind}-{axis}"), args.full)?,
        None => {
            let sweep = args.sweep.clone().ok_or_else(|| {
                Error::InvalidConfig("either --sweep or --preset is required".into())
            })?;
            let base = Config::new(1000, 0.002, 1.0, 0.2f64.sqrt()).with_seed(42);
            if weak {
                StudySpec::weak(base, sweep, 1000, default_batches(1000), DEFAULT_GRID_K)
            } else {
                StudySpec::strong(base, sweep, 100)
            }
        }
    };
    if let Some(sweep) = &args.sweep {
        spec.sweep = sweep.clone();
    }
    if let Some(n) = args.particles {
        spec.base.n_particles = n;
    }
    if let Some(h) = args.step {
        spec.base.step = h;
    }
    if let Some(t) = args.horizon {
        spec.base.horizon = t;
    }
    if let Some(s2) = args.sigma2 {
        spec.base.sigma = sigma_of(s2)?;
    }
    if let Some(r) = args.runs {
        spec.runs = r;
        if args.batches.is_none() {
            spec.batches = default_batches(r);
        }
    }
    if let Some(b) = args.batches {
        spec.batches = b;
    }
    if let Some(k) = args.grid {
        spec.grid_k = k;
    }
    if let Some(seed) = args.seed {
        spec.base.seed = seed;
    }
    spec.base = args.model.apply(spec.base)?;
    spec.threads = args.threads;
    spec.common_random_numbers = args.common_random_numbers;
    Ok(spec)
}

fn run_study_command(args: StudyArgs, weak: bool) -> Result<(), Error> {
    let spec = study_spec(&args, weak)?;
    let table = run_study(&spec)?;
    let dest = match args.out {
        Some(p) => Destination::Path(p),
        None => Destination::Stdout,
    };
    emit(&table, args.format, &dest)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => run_simulate(a),
        Command::Exact(a) => run_exact(a),
        Command::Strong(a) => run_study_command(a, false),
        Command::Weak(a) => run_study_command(a, true),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config() {
                ExitCode::from(2)
            } else if e.is_numerical() {
                ExitCode::from(3)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
