use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dirac_core::catalog;
use dirac_core::dynamics::{HamiltonianKind, MultiplierFn};
use dirac_core::pipeline::{analyze, run_integrate, run_quantize, Overrides, PipelineError};
use dirac_core::report::{render, AnalysisReport, Format, IntegrateReport, QuantizeReport};
use dirac_core::system_file::{parse, parse_multiplier_fn, SystemFile};

/// Constraint analysis, reduction and dynamics of singular Lagrangian systems.
#[derive(Parser)]
#[command(name = "dirac", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Constraint chain, classification, gauge fixing and reduction.
    Analyze(Common),
    /// Classical trajectory by fixed-step RK4.
    Integrate(Common),
    /// Grid quantization with Crank–Nicolson evolution.
    Quantize(Common),
    /// List built-in systems, or print one as a system file.
    Catalog {
        id: Option<String>,
        /// Write every built-in system file into this directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    /// Path to a system file, or a built-in id.
    system: String,
    /// Step size (time step for integrate and quantize).
    #[arg(long)]
    h: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    /// Replaces the seed of every random multiplier.
    #[arg(long)]
    seed: Option<u64>,
    /// Multiplier function for every multiplier, e.g. `zero`, `constant(0.5)`,
    /// `random(seed=3, amplitude=1, cutoff=2)`.
    #[arg(long, value_parser = parse_multiplier_fn)]
    policy: Option<MultiplierFn>,
    /// total, fixed or extended.
    #[arg(long, value_parser = |s: &str| s.parse::<HamiltonianKind>())]
    hamiltonian: Option<HamiltonianKind>,
    /// Directory for CSV output.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "text", value_parser = |s: &str| s.parse::<Format>())]
    format: Format,
}

struct Failure {
    module: &'static str,
    location: String,
    message: String,
    code: u8,
}

impl Failure {
    fn io(path: &Path, e: std::io::Error) -> Self {
        Failure { module: "cli_reporting", location: path.display().to_string(), message: e.to_string(), code: 1 }
    }

    fn pipeline(input: &str, e: PipelineError) -> Self {
        let (module, section) = e.provenance();
        let (location, code) = match &e {
            PipelineError::Parse(p) => (format!("{input}:{}:{}", p.line, p.column), 2),
            _ => (format!("{input} [{section}]"), 1),
        };
        Failure { module, location, message: e.to_string(), code }
    }
}

fn load(system: &str) -> Result<SystemFile, Failure> {
    let path = Path::new(system);
    if path.exists() {
        let text = fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
        return parse(&text).map_err(|e| Failure::pipeline(system, e.into()));
    }
    catalog::get(system).map(|e| e.file).map_err(|e| Failure {
        module: "systems_catalog",
        location: system.to_string(),
        message: format!("{e}; no file with this path either"),
        code: 2,
    })
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::io(dir, e))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Failure::io(&path, e))
}

fn run(cli: Cli) -> Result<String, Failure> {
    let (kind, c) = match cli.command {
        Command::Catalog { id, out } => return catalog_command(id, out),
        Command::Analyze(c) => ("analyze", c),
        Command::Integrate(c) => ("integrate", c),
        Command::Quantize(c) => ("quantize", c),
    };
    let file = load(&c.system)?;
    let fail = |e: PipelineError| Failure::pipeline(&c.system, e);
    let overrides =
        Overrides { h: c.h, steps: c.steps, seed: c.seed, policy: c.policy.clone(), hamiltonian: c.hamiltonian };
    overrides.validate().map_err(fail)?;
    let analysis = analyze(&file).map_err(fail)?;
    match kind {
        "analyze" => Ok(render(&AnalysisReport::new(&analysis), AnalysisReport::to_text, c.format)),
        "integrate" => {
            let cfg = overrides.integrate_config(&file);
            let run = run_integrate(&analysis, &cfg, &overrides.policy(&file)).map_err(fail)?;
            if let Some(dir) = &c.out {
                write(dir, "trajectory.csv", &run.trajectory.to_csv())?;
            }
            let report = IntegrateReport::new(analysis.name.clone(), &run);
            Ok(render(&report, IntegrateReport::to_text, c.format))
        }
        _ => {
            let cfg = overrides.quantum_config(&file);
            let run = run_quantize(&analysis, &cfg).map_err(fail)?;
            if let Some(dir) = &c.out {
                write(dir, "psi_initial.csv", &run.initial.to_csv(&run.representation))?;
                write(dir, "psi_final.csv", &run.final_state.to_csv(&run.representation))?;
            }
            let report = QuantizeReport::new(analysis.name.clone(), &run);
            Ok(render(&report, QuantizeReport::to_text, c.format))
        }
    }
}

fn catalog_command(id: Option<String>, out: Option<PathBuf>) -> Result<String, Failure> {
    if let Some(dir) = out {
        for e in catalog::all() {
            write(&dir, &format!("{}.sys", e.id), &e.file.to_text())?;
        }
    }
    match id {
        Some(id) => catalog::get(&id).map(|e| e.file.to_text()).map_err(|e| Failure {
            module: "systems_catalog",
            location: id.clone(),
            message: e.to_string(),
            code: 2,
        }),
        None => Ok(catalog::all().iter().map(|e| format!("{:<20} {}\n", e.id, e.summary)).collect()),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error in {} at {}: {}", f.module, f.location, f.message);
            ExitCode::from(f.code)
        }
    }
}
