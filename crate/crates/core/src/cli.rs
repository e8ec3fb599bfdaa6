//! Command-line front end. `run` returns the process exit status: 0 on
//! success, 1 for usage or configuration errors, 2 for runtime failures.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::Error;
use crate::experiment::{
    front_path, regenerate_report, run_one, run_sweep, write_front_csv, write_manifest, write_sweep,
    CandidateEvaluator, RunInfo, SweepSpec,
};
use crate::frac_tf::{band_error, oustaloup_approx, ApproxConfig};
use crate::metrics::{self, display_j1};
use crate::sim_engine::Topology;

/// Environment variable holding the worker thread count.
pub const WORKERS_ENV: &str = "FRAC_SMITH_WORKERS";

#[derive(Debug, Parser)]
#[command(
    name = "frac-smith",
    version,
    about = "Fractional (PI)^lambda control with a fractional Smith-like predictor"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Oustaloup approximation of s^order: coefficients and band error.
    Approx {
        #[arg(long, allow_hyphen_values = true)]
        order: f64,
        #[arg(long)]
        wb: Option<f64>,
        #[arg(long)]
        wh: Option<f64>,
        #[arg(long)]
        sections: Option<usize>,
    },
    /// Simulate one closed loop and write its trajectory and objectives.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        kp: Option<f64>,
        #[arg(long)]
        ki: Option<f64>,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        chi: Option<f64>,
        #[arg(long, value_enum)]
        topology: Option<TopologyArg>,
    },
    /// Tune the controller for one chi and write the Pareto front.
    Tune {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        chi: Option<f64>,
    },
    /// Tune every chi of the config and write fronts, trajectories and the report.
    Sweep {
        #[command(flatten)]
        common: Common,
    },
    /// Rebuild summary, comparison and plot files of a finished sweep.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TopologyArg {
    Fig1,
    Fig3,
}

/// Config file, output directory and overrides shared by the run commands.
#[derive(Debug, Args)]
struct Common {
    /// TOML config; a previous run's manifest.toml also works.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long)]
    pop_size: Option<usize>,
    #[arg(long)]
    generations: Option<usize>,
    #[arg(long)]
    crossover_prob: Option<f64>,
    #[arg(long)]
    mutation_prob: Option<f64>,
    #[arg(long)]
    pareto_fraction: Option<f64>,
    #[arg(long)]
    omega_low: Option<f64>,
    #[arg(long)]
    omega_high: Option<f64>,
    #[arg(long)]
    sections: Option<usize>,
    #[arg(long)]
    gain: Option<f64>,
    #[arg(long)]
    time_constant: Option<f64>,
    #[arg(long)]
    order: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    setpoint_amp: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    disturbance_amp: Option<f64>,
}

impl Common {
    fn spec(&self) -> Result<SweepSpec, Error> {
        let mut s = match &self.config {
            Some(p) => SweepSpec::load(p)?,
            None => SweepSpec::default(),
        };
        macro_rules! set {
            ($($flag:ident => $($field:ident).+),* $(,)?) => {
                $(if let Some(v) = self.$flag { s.$($field).+ = v; })*
            };
        }
        set!(
            seed => ga.rng_seed,
            dt => sim.dt,
            horizon => sim.horizon,
            pop_size => ga.pop_size,
            generations => ga.generations,
            crossover_prob => ga.crossover_prob,
            mutation_prob => ga.mutation_prob,
            pareto_fraction => ga.pareto_fraction,
            omega_low => approx.omega_low,
            omega_high => approx.omega_high,
            sections => approx.n_sections,
            gain => plant.gain,
            time_constant => plant.time_constant,
            order => plant.order,
            setpoint_amp => sim.setpoint_amp,
            disturbance_amp => sim.disturbance_amp,
        );
        Ok(s)
    }
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(_) | Error::Improper { .. } => Failure::Usage(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

fn configure_workers() -> Result<(), Failure> {
    let Ok(v) = std::env::var(WORKERS_ENV) else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Usage(format!("{WORKERS_ENV} must be a positive integer, got '{v}'")))?;
    // a second call in the same process keeps the first pool
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let outcome = configure_workers().and_then(|_| dispatch(cli.command));
    match outcome {
        Ok(()) => 0,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            1
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("failed: {m}");
            2
        }
    }
}

fn dispatch(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Approx { order, wb, wh, sections } => approx(order, wb, wh, sections),
        Command::Simulate { common, kp, ki, lambda, chi, topology } => {
            let mut spec = common.spec()?;
            macro_rules! set {
                ($($v:ident => $f:ident),*) => { $(if let Some(x) = $v { spec.candidate.$f = x; })* };
            }
            set!(kp => k_p, ki => k_i, lambda => lambda, chi => chi);
            if let Some(t) = topology {
                spec.sim.topology = match t {
                    TopologyArg::Fig1 => Topology::Fig1Predictor,
                    TopologyArg::Fig3 => Topology::Fig3Equivalent,
                };
            }
            simulate(spec, &common.out)
        }
        Command::Tune { common, chi } => {
            let mut spec = common.spec()?;
            match (chi, spec.chi_values.as_slice()) {
                (Some(c), _) => spec.chi_values = vec![c],
                (None, [_]) => {}
                (None, _) => return Err(Failure::Usage("tune needs --chi (or a config with one chi value)".into())),
            }
            tune(spec, &common.out)
        }
        Command::Sweep { common } => sweep(common.spec()?, &common.out),
        Command::Report { input } => {
            let report = regenerate_report(&input)?;
            println!("{}", report.verdict());
            Ok(())
        }
    }
}

fn approx(order: f64, wb: Option<f64>, wh: Option<f64>, sections: Option<usize>) -> Result<(), Failure> {
    let d = ApproxConfig::default();
    let cfg = ApproxConfig {
        omega_low: wb.unwrap_or(d.omega_low),
        omega_high: wh.unwrap_or(d.omega_high),
        n_sections: sections.unwrap_or(d.n_sections),
        fit_grid_points: d.fit_grid_points.max(4 * (2 * sections.unwrap_or(d.n_sections) + 1)),
        ..d
    };
    let block = oustaloup_approx(order, &cfg)?;
    let fmt = |c: &[f64]| c.iter().map(|v| format!("{v:e}")).collect::<Vec<_>>().join(", ");
    println!("s^{order} over [{:e}, {:e}] rad/s, {} sections", cfg.omega_low, cfg.omega_high, cfg.n_sections);
    println!("num = [{}]", fmt(block.tf().num()));
    println!("den = [{}]", fmt(block.tf().den()));
    let exact = |w: f64| Complex64::new(0.0, w).powf(order);
    let (lo, hi) = (cfg.omega_low.log10(), cfg.omega_high.log10());
    let mid = 0.5 * (lo + hi);
    for (label, a, b) in [("full band", lo, hi), ("central decade", mid - 0.5, mid + 0.5)] {
        let (a, b) = (10f64.powf(a), 10f64.powf(b));
        let e = band_error(|w| block.freq_response(w), exact, a, b, 201);
        println!(
            "{label} [{a:e}, {b:e}]: max magnitude error {:.4}%, max phase error {:.4} deg",
            100.0 * e.max_rel_magnitude,
            e.max_phase_deg
        );
    }
    Ok(())
}

fn ensure_dir(dir: &Path) -> Result<(), Failure> {
    std::fs::create_dir_all(dir).map_err(|e| Failure::Runtime(format!("creating {}: {e}", dir.display())))
}

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::Runtime(format!("writing {}: {e}", path.display())))
}

#[derive(Serialize)]
struct SimulationMetrics {
    j1: f64,
    j2: f64,
    j1_display: f64,
    penalized: bool,
    diverged: bool,
    samples: usize,
}

fn simulate(mut spec: SweepSpec, out: &Path) -> Result<(), Failure> {
    spec.run = Some(RunInfo::new("simulate"));
    spec.chi_values = vec![spec.candidate.chi];
    spec.validate()?;
    let c = spec.candidate;
    let ev = CandidateEvaluator::new(&spec.plant.to_plant()?, c.chi, &spec.approx, &spec.sim)?;
    let traj = ev.trajectory(&[c.k_p, c.k_i, c.lambda])?;
    let o = metrics::objectives(&traj);
    ensure_dir(out)?;
    write_manifest(out, &spec)?;
    traj.save_csv(&out.join("trajectory.csv"))?;
    let m = SimulationMetrics {
        j1: o.j1_itae,
        j2: o.j2_energy,
        j1_display: display_j1(o.j1_itae),
        penalized: o.penalized,
        diverged: traj.diverged,
        samples: traj.len(),
    };
    let json = serde_json::to_string_pretty(&m).map_err(|e| Failure::Runtime(e.to_string()))?;
    write_text(&out.join("metrics.json"), &(json + "\n"))?;
    println!(
        "J1 {:.6e} (display {:.6e})  J2 {:.6e}{}",
        m.j1,
        m.j1_display,
        m.j2,
        if m.diverged { "  [diverged]" } else { "" }
    );
    Ok(())
}

fn tune(mut spec: SweepSpec, out: &Path) -> Result<(), Failure> {
    spec.run = Some(RunInfo::new("tune"));
    spec.validate()?;
    let chi = spec.chi_values[0];
    let lines = Mutex::new(Vec::new());
    let log = |_: f64, s: &crate::moga::GenerationStats| {
        eprintln!("{s}");
        lines.lock().unwrap().push(s.to_string());
    };
    let outcome = run_one(&spec.plant.to_plant()?, chi, &spec, &log)?;
    ensure_dir(out)?;
    write_manifest(out, &spec)?;
    write_front_csv(&front_path(out, chi), chi, &outcome.front)?;
    write_text(&out.join("ga_log.txt"), &(lines.into_inner().unwrap().join("\n") + "\n"))?;
    if let Some(note) = outcome.note {
        return Err(Failure::Runtime(format!("chi {chi}: {note}")));
    }
    println!("chi {chi}: {} front points", outcome.front.len());
    Ok(())
}

fn sweep(mut spec: SweepSpec, out: &Path) -> Result<(), Failure> {
    spec.run = Some(RunInfo::new("sweep"));
    spec.validate()?;
    let lines: Mutex<Vec<(f64, String)>> = Mutex::new(Vec::new());
    let log = |chi: f64, s: &crate::moga::GenerationStats| {
        eprintln!("chi {chi}: {s}");
        lines.lock().unwrap().push((chi, s.to_string()));
    };
    let result = run_sweep(&spec, &log)?;
    ensure_dir(out)?;
    let report = write_sweep(out, &spec, &result)?;
    // one GA runs per chi, so each chi's lines arrive in generation order
    let mut by_chi: BTreeMap<usize, Vec<String>> = BTreeMap::new();
    for (chi, line) in lines.into_inner().unwrap() {
        let k = spec.chi_values.iter().position(|&c| c == chi).unwrap_or(usize::MAX);
        by_chi.entry(k).or_default().push(format!("chi {chi}: {line}"));
    }
    let log_text: Vec<String> = by_chi.into_values().flatten().collect();
    write_text(&out.join("ga_log.txt"), &(log_text.join("\n") + "\n"))?;
    for o in &result.outcomes {
        if let Some(n) = &o.note {
            eprintln!("chi {}: {n}", o.chi);
        }
    }
    println!("{}", report.verdict());
    if result.outcomes.iter().all(|o| o.front.is_empty()) {
        return Err(Failure::Runtime("every chi produced an empty front".into()));
    }
    Ok(())
}
