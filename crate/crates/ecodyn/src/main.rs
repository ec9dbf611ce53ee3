//! Command-line front end: equilibrium tables, stability and persistence
//! reports, and trajectory simulation with CSV/JSON export.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use ecodyn::dynamics::IntegratorOptions;
use ecodyn::error::{Error, Result};
use ecodyn::report::{
    export_json, export_report_json, export_trajectory_csv, load_config, resolve_preset,
    run_analysis, run_simulation, AnalysisReport, AnalysisSettings, ScenarioConfig, SimulationRun,
};

#[derive(Parser)]
#[command(
    name = "ecodyn",
    version,
    about = "Equilibria, stability, persistence and simulation of a prey / susceptible-predator / infected-predator system"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate every equilibrium branch with feasibility and residuals
    Equilibria(CommonArgs),
    /// Classify feasible equilibria: eigenvalues, screening conditions, Routh-Hurwitz
    Stability(CommonArgs),
    /// Evaluate the persistence conditions and boundary growth rates
    Persistence(CommonArgs),
    /// Integrate the configured initial conditions and report convergence
    Simulate(CommonArgs),
    /// Run every analysis and produce the full report
    Report(CommonArgs),
}

impl Command {
    fn args(&self) -> &CommonArgs {
        match self {
            Command::Equilibria(a)
            | Command::Stability(a)
            | Command::Persistence(a)
            | Command::Simulate(a)
            | Command::Report(a) => a,
        }
    }
}

#[derive(Args)]
struct CommonArgs {
    /// Built-in parameter set (S1..S4) or a name resolved in $ECODYN_PRESET_DIR
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,

    /// Scenario file (flat `key = value` format)
    #[arg(long)]
    config: Option<PathBuf>,

    /// Write machine-readable output here (JSON, or CSV for trajectories)
    #[arg(long)]
    out: Option<PathBuf>,

    /// Output format (default: json for reports, csv for trajectories)
    #[arg(long, value_enum)]
    format: Option<Format>,

    /// Integration horizon override
    #[arg(long = "t-end")]
    t_end: Option<f64>,

    /// Relative integration tolerance override
    #[arg(long)]
    rtol: Option<f64>,

    /// Absolute integration tolerance override
    #[arg(long)]
    atol: Option<f64>,

    /// Upper grid bound for the global-stability check (default: a1/b1)
    #[arg(long = "x-max")]
    x_max: Option<f64>,

    /// Grid sample count for the global-stability check
    #[arg(long, default_value_t = 1000)]
    samples: usize,

    /// Persistence weights, comma separated
    #[arg(long, default_value = "1,1,1", value_parser = parse_gammas)]
    gamma: Gammas,
}

#[derive(Clone, Copy, Debug)]
struct Gammas([f64; 3]);

fn parse_gammas(s: &str) -> std::result::Result<Gammas, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected three comma-separated weights, got `{s}`"));
    }
    let mut g = [0.0; 3];
    for (slot, part) in g.iter_mut().zip(&parts) {
        *slot = part
            .parse::<f64>()
            .map_err(|_| format!("invalid weight `{part}`"))?;
    }
    Ok(Gammas(g))
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ecodyn: {e}");
            ExitCode::FAILURE
        }
    }
}

fn load_scenario(args: &CommonArgs) -> Result<ScenarioConfig> {
    let mut config = match (&args.preset, &args.config) {
        (Some(name), None) => resolve_preset(name),
        (None, Some(path)) => load_config(path),
        _ => Err(Error::Validation(
            "exactly one of --preset or --config is required".into(),
        )),
    }?;
    if args.t_end.is_some() || args.rtol.is_some() || args.atol.is_some() {
        let base = config.integrator_options();
        let t_end = args.t_end.unwrap_or(base.t_end);
        let scale = t_end / base.t_end;
        config.integrator = Some(IntegratorOptions::with(
            args.rtol.unwrap_or(base.rel_tol),
            args.atol.unwrap_or(base.abs_tol),
            t_end,
            base.max_step * scale,
            base.output_stride * scale,
        )?);
    }
    config.validate()?;
    Ok(config)
}

fn settings_from(args: &CommonArgs) -> AnalysisSettings {
    AnalysisSettings {
        x_max: args.x_max,
        samples: args.samples,
        gammas: args.gamma.0,
        ..AnalysisSettings::default()
    }
}

fn run(command: &Command) -> Result<()> {
    let args = command.args();
    let config = load_scenario(args)?;
    let settings = settings_from(args);

    match command {
        Command::Simulate(_) => {
            let runs = run_simulation(&config, &settings)?;
            print_simulation(&config, &runs);
            match (args.out.as_deref(), args.format.unwrap_or(Format::Csv)) {
                (Some(path), Format::Csv) => write_trajectories_csv(&runs, path)?,
                (Some(path), Format::Json) => {
                    export_json(&runs, BufWriter::new(File::create(path)?))?
                }
                (None, _) => {}
            }
        }
        _ => {
            let report = run_analysis(&config, &settings)?;
            match command {
                Command::Equilibria(_) => print_equilibria(&report),
                Command::Stability(_) => print_stability(&report),
                Command::Persistence(_) => print_persistence(&report),
                Command::Report(_) => {
                    print_equilibria(&report);
                    print_stability(&report);
                    print_persistence(&report);
                    print_notes(&report);
                }
                Command::Simulate(_) => unreachable!(),
            }
            if let Some(path) = args.out.as_deref() {
                if args.format == Some(Format::Csv) {
                    return Err(Error::Validation(
                        "analysis reports export as JSON; csv applies to trajectories".into(),
                    ));
                }
                export_report_json(&report, BufWriter::new(File::create(path)?))?;
            }
        }
    }
    Ok(())
}

fn write_trajectories_csv(runs: &[SimulationRun], path: &Path) -> Result<()> {
    if runs.len() == 1 {
        return export_trajectory_csv(&runs[0].trajectory, BufWriter::new(File::create(path)?));
    }
    let stem = path.file_stem().unwrap_or_default().to_string_lossy();
    let ext = path.extension().map(|e| e.to_string_lossy().into_owned());
    for (i, run) in runs.iter().enumerate() {
        let mut name = format!("{stem}_{}", i + 1);
        if let Some(ext) = &ext {
            name.push('.');
            name.push_str(ext);
        }
        let target = path.with_file_name(name);
        export_trajectory_csv(&run.trajectory, BufWriter::new(File::create(&target)?))?;
        println!("wrote {}", target.display());
    }
    Ok(())
}

fn print_equilibria(report: &AnalysisReport) {
    println!("scenario {}", report.scenario);
    println!(
        "{:<7} {:>18} {:>18} {:>18}  {:<10} {:>10}",
        "branch", "x", "y", "z", "feasible", "residual"
    );
    for eq in &report.equilibria {
        println!(
            "{:<7} {:>18.10} {:>18.10} {:>18.10}  {:<10} {:>10.2e}",
            eq.label(),
            eq.state.x,
            eq.state.y,
            eq.state.z,
            if eq.feasible { "yes" } else { "no" },
            eq.residual
        );
    }
    println!();
}

fn print_stability(report: &AnalysisReport) {
    println!(
        "{:<7} {:<10} {:>44}  conditions",
        "branch", "verdict", "eigenvalue real parts"
    );
    for s in &report.stability {
        let res: Vec<String> = s
            .eigenvalues
            .iter()
            .map(|l| format!("{:+.4e}", l.re))
            .collect();
        let flags: Vec<String> = s
            .condition_flags
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        let mut extra = flags.join(" ");
        if let Some(rh) = &s.rh {
            extra = format!(
                "A1={:.4} A2={:.4} A3={:.4} A1A2-A3={:.4} {}",
                rh.a1, rh.a2, rh.a3, rh.a1a2_minus_a3, extra
            );
        }
        println!(
            "{:<7} {:<10} {:>44}  {}",
            s.equilibrium.label(),
            s.verdict.to_string(),
            res.join(" "),
            extra
        );
    }
    println!();
}

fn print_persistence(report: &AnalysisReport) {
    let Some(p) = &report.persistence else {
        return;
    };
    println!("persistence (gammas = {:?})", p.gammas);
    println!("  condition 1: {:?}", p.cond1);
    println!("  condition 2: {:?}", p.cond2);
    println!("  condition 3: {:?}", p.cond3);
    println!("  condition 4: {:?}", p.cond4);
    println!("  boundary growth rates:");
    for (label, pi) in &p.pi_values {
        println!("    {label:<7} {pi:+.6}");
    }
    println!();
}

fn print_notes(report: &AnalysisReport) {
    if report.notes.is_empty() {
        return;
    }
    println!("notes:");
    for n in &report.notes {
        println!("  - {n}");
    }
}

fn print_simulation(config: &ScenarioConfig, runs: &[SimulationRun]) {
    println!("scenario {}", config.name);
    for run in runs {
        println!(
            "from ({}, {}, {}): {} samples over t = [0, {}], {} accepted / {} rejected steps",
            run.initial.x,
            run.initial.y,
            run.initial.z,
            run.trajectory.times.len(),
            run.trajectory.final_time(),
            run.trajectory.accepted_steps,
            run.trajectory.rejected_steps
        );
        let mut any = false;
        for v in &run.verdicts {
            if v.converged {
                any = true;
                println!(
                    "  -> converged to {} ({:.6}, {:.6}, {:.6}) at t = {:.2}",
                    v.target.label(),
                    v.target.state.x,
                    v.target.state.y,
                    v.target.state.z,
                    v.t_converged.unwrap_or_default()
                );
            }
        }
        if !any {
            let f = run.trajectory.final_state();
            println!(
                "  -> no convergence to a stable equilibrium; final state ({:.6}, {:.6}, {:.6})",
                f.x, f.y, f.z
            );
        }
        // flag planar runs so in-plane convergence is visible next to the verdicts
        if run.initial.z == 0.0 || run.initial.y == 0.0 || run.initial.x == 0.0 {
            println!("  (initial condition lies on an invariant coordinate plane)");
        }
    }
}
