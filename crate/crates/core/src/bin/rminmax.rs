use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use rminmax::harness::{
    grid_search, plot_rows, solve_reference, write_plot_csv, write_plot_svg, EtaSpec, Experiment, GridSpec,
    ProblemKind, ReferenceOptions, ReferenceRecord, RunConfig, Trace,
};
use rminmax::par::Execution;
use rminmax::solvers::SolverKind;
use rminmax::Error;

/// Riemannian min-max experiments.
#[derive(Parser, Debug)]
#[command(name = "rminmax", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one solver and write its per-iteration trace.
    Run(RunArgs),
    /// Rank step-size candidates by final gradient norm.
    GridSearch(GridArgs),
    /// Compute (or refine) a reference saddle point.
    Reference(ReferenceArgs),
    /// Turn traces into long-format plot data and an optional SVG.
    Plot(PlotArgs),
}

#[derive(Args, Debug, Default)]
struct RunArgs {
    /// Flat JSON config; flags given on the command line override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    problem: Option<ProblemKind>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    reg: Option<f64>,
    /// Instance JSON to load instead of generating data.
    #[arg(long)]
    instance: Option<PathBuf>,
    #[arg(long)]
    data_seed: Option<u64>,
    #[arg(long)]
    solver: Option<SolverKind>,
    /// A step size, `auto` (1/(2ℓ̂)) or `theorem`.
    #[arg(long)]
    eta: Option<EtaSpec>,
    /// Use the decaying rule min{η, a/t}.
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    ell: Option<f64>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    lipschitz: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    diameter: Option<f64>,
    #[arg(long)]
    d0: Option<f64>,
    #[arg(long)]
    estimate_samples: Option<usize>,
    #[arg(long)]
    estimate_radius: Option<f64>,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Reference saddle JSON for the distance-gap columns.
    #[arg(long)]
    reference: Option<PathBuf>,
    /// JSON with `x` and `y` point records to start from.
    #[arg(long)]
    init_from: Option<PathBuf>,
    /// Record wall-clock time per row.
    #[arg(long)]
    timings: bool,
    /// Disable the thread pool.
    #[arg(long)]
    sequential: bool,
}

#[derive(Args, Debug)]
struct GridArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Comma-separated smoothness candidates; each gives η = 1/(2ℓ).
    #[arg(long, value_delimiter = ',', required = true)]
    ell_grid: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    a_grid: Vec<f64>,
    /// Seeds averaged per candidate; defaults to `--seed`, else 0.
    #[arg(long, value_delimiter = ',')]
    seeds: Vec<u64>,
}

#[derive(Args, Debug)]
struct ReferenceArgs {
    #[command(flatten)]
    run: RunArgs,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 20_000)]
    max_iters: usize,
}

#[derive(Args, Debug)]
struct PlotArgs {
    /// `PATH` or `LABEL=PATH`; repeatable.
    #[arg(long = "trace", required = true)]
    traces: Vec<String>,
    /// Also plot the time-average iterate.
    #[arg(long)]
    avg: bool,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    svg: Option<PathBuf>,
}

fn build_config(a: &RunArgs) -> rminmax::Result<RunConfig> {
    let mut c = match &a.config {
        Some(path) => RunConfig::from_json_file(path)?,
        None => RunConfig::default(),
    };
    macro_rules! set {
        ($($field:ident),*) => {$(
            if let Some(v) = a.$field.clone() {
                c.$field = v;
            }
        )*};
    }
    macro_rules! set_opt {
        ($($field:ident),*) => {$(
            if a.$field.is_some() {
                c.$field = a.$field.clone();
            }
        )*};
    }
    set!(problem, d, n, alpha, gamma, reg, data_seed, solver, eta, iters, diameter, estimate_samples, estimate_radius);
    set_opt!(instance, a, ell, mu, lipschitz, sigma, batch_size, seed, d0, out, reference, init_from);
    c.timings |= a.timings;
    if a.sequential {
        c.execution = Execution::Sequential;
    }
    c.validate()?;
    Ok(c)
}

fn write_output(path: Option<&Path>, f: impl FnOnce(&mut dyn Write) -> rminmax::Result<()>) -> rminmax::Result<()> {
    match path {
        Some(p) => {
            let file = std::fs::File::create(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
            let mut w = std::io::BufWriter::new(file);
            f(&mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut w = stdout.lock();
            f(&mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn cmd_run(a: &RunArgs) -> rminmax::Result<()> {
    let cfg = build_config(a)?;
    cfg.seed_or_err()?;
    let exp = Experiment::prepare(&cfg)?;
    let report = exp.run()?;
    write_output(cfg.out.as_deref(), |w| report.trace.write(w))?;
    match report.failure {
        None => Ok(()),
        Some((step, e)) => {
            log::error!("run stopped at step {step}; partial trace written");
            Err(e)
        }
    }
}

fn cmd_grid(g: &GridArgs) -> rminmax::Result<()> {
    let cfg = build_config(&g.run)?;
    let seeds = if g.seeds.is_empty() { vec![cfg.seed.unwrap_or(0)] } else { g.seeds.clone() };
    let spec = GridSpec { ells: g.ell_grid.clone(), a_values: g.a_grid.clone(), seeds };
    let report = grid_search(&cfg, &spec)?;
    write_output(cfg.out.as_deref(), |w| report.write_csv(w))?;
    let best = report.best()?;
    match best.a {
        Some(a) => eprintln!("best: ell={} a={} eta_0={}", best.ell, a, best.eta_0),
        None => eprintln!("best: ell={} eta_0={}", best.ell, best.eta_0),
    }
    Ok(())
}

fn cmd_reference(r: &ReferenceArgs) -> rminmax::Result<()> {
    let cfg = build_config(&r.run)?;
    let out = cfg.out.clone().ok_or_else(|| Error::Config("reference needs --out".into()))?;
    let exp = Experiment::prepare(&RunConfig { reference: None, ..cfg })?;
    let previous = if out.exists() { Some(ReferenceRecord::read(&out)?) } else { None };
    let opts = ReferenceOptions { tol: r.tol, max_iters: r.max_iters };
    let rec = solve_reference(&exp, &opts, previous.as_ref())?;
    rec.write(&out)?;
    eprintln!("reference gradient norm {:e} after {} iterations", rec.grad_norm, rec.iterations);
    Ok(())
}

fn cmd_plot(p: &PlotArgs) -> rminmax::Result<()> {
    let mut traces = Vec::with_capacity(p.traces.len());
    for spec in &p.traces {
        let (label, path) = match spec.split_once('=') {
            Some((l, path)) if !Path::new(spec).exists() => (Some(l.to_string()), PathBuf::from(path)),
            _ => (None, PathBuf::from(spec)),
        };
        traces.push((label, Trace::read_file(&path)?));
    }
    let rows = plot_rows(&traces, p.avg)?;
    write_plot_csv(&rows, &p.out)?;
    if let Some(svg) = &p.svg {
        write_plot_svg(&rows, svg)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::GridSearch(g) => cmd_grid(g),
        Command::Reference(r) => cmd_reference(r),
        Command::Plot(p) => cmd_plot(p),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numeric() { 3 } else { 2 })
        }
    }
}
