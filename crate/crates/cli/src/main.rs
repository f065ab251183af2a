use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use log::info;

use qnoise::config::{Document, Loaded};
use qnoise::experiments::{bounds_report, exact_series, initial_density, sampling_error, sweep_dt};
use qnoise::export;
use qnoise::linalg::DensityMatrix;
use qnoise::trajectory::run_ensemble;

/// Exact reference columns are skipped above this many qubits.
const EXACT_MAX_QUBITS: usize = 5;

#[derive(Parser, Debug)]
#[command(
    name = "qnoise",
    version,
    about = "Single-ancilla stochastic-gate Lindblad simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a trajectory ensemble and write result.csv.
    Simulate(Common),
    /// Compare the averaged gate and the Euler step against the exact solution over a range of dt.
    SweepDt(Common),
    /// Measure how the estimation error shrinks with the number of trajectories.
    SamplingError(Common),
    /// Print analytic error bounds and the gate-count estimate.
    Bounds(Common),
}

#[derive(Args, Debug)]
struct Common {
    /// JSON configuration file.
    config: PathBuf,
    /// Override run.seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override run.threads.
    #[arg(long)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long, env = "QNOISE_OUT", default_value = "out")]
    out_dir: PathBuf,
}

impl Common {
    fn load(&self) -> anyhow::Result<Loaded> {
        let doc = Document::load(&self.config).with_context(|| format!("loading {}", self.config.display()))?;
        let mut loaded = doc
            .resolve()
            .with_context(|| format!("validating {}", self.config.display()))?;
        if let Some(s) = self.seed {
            loaded.run.master_seed = s;
        }
        if let Some(t) = self.threads {
            if t == 0 {
                bail!(qnoise::Error::InvalidArgument("--threads must be >= 1".into()));
            }
            loaded.run.threads = Some(t);
        }
        Ok(loaded)
    }
}

fn write(dir: &Path, name: &str, contents: &str) -> anyhow::Result<()> {
    let path =
        export::write_file(dir, name, contents).with_context(|| format!("writing {}", dir.join(name).display()))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn simulate(c: &Common) -> anyhow::Result<()> {
    let l = c.load()?;
    let start = Instant::now();
    let res = run_ensemble(&l.model, &l.run)?;
    info!(
        "{} trajectories x {} steps in {:.2?}",
        l.run.n_realizations,
        l.run.n_steps,
        start.elapsed()
    );
    if let Some(rhos) = &res.rho_mean {
        for (step, rho) in rhos.iter().enumerate() {
            DensityMatrix::new(rho.clone())
                .map_err(|e| qnoise::Error::Invariant(format!("averaged state at step {step}: {e}")))?;
        }
    }
    write(&c.out_dir, "result.csv", &export::result_csv(&res))?;
    write(&c.out_dir, "result.gp", &export::result_gp(&res))?;
    if let Some(js) = export::rho_steps_json(&res) {
        write(&c.out_dir, "rho_steps.json", &js)?;
    }

    let exact = if l.model.n() <= EXACT_MAX_QUBITS {
        Some(exact_series(&l.model, &l.run)?)
    } else {
        None
    };
    let last = res.n_steps();
    println!(
        "final step {last} (t = {:e} s), N_r = {}, seed = {}, mode = {}",
        res.times[last], res.n_realizations, res.master_seed, res.mode
    );
    for (k, o) in res.observables.iter().enumerate() {
        match &exact {
            Some(ex) => println!(
                "  {:<12} {:+.6} ± {:.6}   exact {:+.6}",
                o.label, o.mean[last], o.stderr[last], ex[k][last]
            ),
            None => println!("  {:<12} {:+.6} ± {:.6}", o.label, o.mean[last], o.stderr[last]),
        }
    }
    Ok(())
}

fn sweep(c: &Common) -> anyhow::Result<()> {
    let l = c.load()?;
    let Some(spec) = &l.sweep else {
        bail!(qnoise::Error::config(
            "experiment.sweep_dt",
            "section is required for sweep-dt"
        ));
    };
    let rho0 = initial_density(&l.run)?;
    let r = sweep_dt(&l.model, &rho0, spec, l.run.trotter, l.run.substeps)?;
    write(&c.out_dir, "sweep.csv", &export::sweep_csv(&r))?;
    write(&c.out_dir, "sweep.gp", &export::sweep_gp())?;
    write(&c.out_dir, "sweep_fit.json", &export::sweep_fit_json(&r))?;
    println!(
        "{:>12} {:>8} {:>12} {:>12} {:>12}",
        "gamma_dt", "steps", "T_qn", "T_sa", "bound_qn"
    );
    for p in &r.points {
        println!(
            "{:>12.3e} {:>8} {:>12.3e} {:>12.3e} {:>12.3e}",
            p.gamma_dt, p.n_steps, p.t_qn, p.t_sa, p.bound_qn
        );
    }
    let show = |s: Option<f64>| s.map_or("n/a".to_string(), |v| format!("{v:.3}"));
    println!("log-log slope: QN {}, SA {}", show(r.slope_qn), show(r.slope_sa));
    Ok(())
}

fn sampling(c: &Common) -> anyhow::Result<()> {
    let l = c.load()?;
    let Some(spec) = &l.sampling else {
        bail!(qnoise::Error::config(
            "experiment.sampling_error",
            "section is required for sampling-error"
        ));
    };
    let r = sampling_error(&l.model, &l.run, spec)?;
    write(&c.out_dir, "sampling.csv", &export::sampling_csv(&r))?;
    write(&c.out_dir, "sampling.gp", &export::sampling_gp())?;
    write(&c.out_dir, "sampling_fit.json", &export::sampling_fit_json(&r))?;
    println!("observable {} at step {}, exact {:+.6}", r.observable, r.step, r.exact);
    println!("{:>10} {:>12} {:>12} {:>12}", "N_r", "mean eta", "std eta", "stderr");
    for row in &r.rows {
        println!(
            "{:>10} {:>12.4e} {:>12.4e} {:>12.4e}",
            row.n_realizations, row.mean_eta, row.std_eta, row.mean_stderr
        );
    }
    match r.slope {
        Some(s) => println!("log-log slope: {s:.3}"),
        None => println!("log-log slope: n/a"),
    }
    Ok(())
}

fn bounds(c: &Common) -> anyhow::Result<()> {
    let l = c.load()?;
    let report = bounds_report(&l.model, &l.run, &l.bounds)?;
    println!("{report}");
    let json = report.to_json();
    println!("{json}");
    write(&c.out_dir, "bounds.json", &json)?;
    Ok(())
}

/// 2 for configuration or argument problems, 3 for invariant violations,
/// 1 for everything else.
fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<qnoise::Error>() {
        Some(qnoise::Error::Config { .. } | qnoise::Error::InvalidArgument(_) | qnoise::Error::InvalidModel(_)) => 2,
        Some(qnoise::Error::Invariant(_) | qnoise::Error::InvalidDensityMatrix(_)) => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate(c) => simulate(c),
        Command::SweepDt(c) => sweep(c),
        Command::SamplingError(c) => sampling(c),
        Command::Bounds(c) => bounds(c),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
