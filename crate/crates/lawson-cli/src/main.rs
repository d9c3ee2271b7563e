//! Command-line driver for convergence studies of exponential integrators
//! on 1-D reaction-diffusion problems: custom runs, the named table presets,
//! stability-constant audits, and registry listings.
//!
//! Exit codes: 0 on success, 1 on usage or configuration errors, 2 when a
//! requested run blew up numerically (the CSV still records the rows).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use lawson::boundary::BoundaryMode;
use lawson::integrators::{scheme_names, SchemeKind};
use lawson::problems::problem_names;
use lawson::study::{
    assumption_audit, csv_string, emit_csv, preset, preset_names, run_study, ErrorReport,
    SpaceSpec, StudyConfig, ROW_BLOWUP,
};
use lawson::tableau::{builtin, builtin_names};

#[derive(Parser)]
#[command(
    name = "lawson",
    version,
    about = "Convergence studies for boundary-corrected Lawson integrators"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a custom convergence study over a list of step sizes.
    Run(RunArgs),
    /// Run one of the named presets of the standard experiment matrix.
    Preset(PresetArgs),
    /// Print sampled stability constants for a space discretization.
    Audit(AuditArgs),
    /// List the available problems, presets, schemes, tableaus and spaces.
    List,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SchemeArg {
    Classical,
    Corrected2,
    Corrected3,
    Corrected4,
}

impl From<SchemeArg> for SchemeKind {
    fn from(s: SchemeArg) -> SchemeKind {
        match s {
            SchemeArg::Classical => SchemeKind::Classical,
            SchemeArg::Corrected2 => SchemeKind::Corrected2,
            SchemeArg::Corrected3 => SchemeKind::Corrected3,
            SchemeArg::Corrected4 => SchemeKind::Corrected4,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SpaceArg {
    /// Second-order differences, Dirichlet data at both ends.
    FdDirichlet,
    /// Second-order differences, Dirichlet at x=0 and Neumann at x=1.
    FdMixed,
    /// Gauss-Lobatto collocation.
    Collocation,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    /// Boundary traces evaluated from the known exact solution.
    Oracle,
    /// Boundary traces recovered from problem data and the numerical
    /// solution (numerical differentiation where needed).
    Data,
}

impl From<ModeArg> for BoundaryMode {
    fn from(m: ModeArg) -> BoundaryMode {
        match m {
            ModeArg::Oracle => BoundaryMode::ExactOracle,
            ModeArg::Data => BoundaryMode::FromData,
        }
    }
}

#[derive(Args)]
struct SpaceFlags {
    /// Space discretization kind.
    #[arg(long, value_enum)]
    space: SpaceArg,
    /// Mesh width for the finite-difference spaces.
    #[arg(long)]
    h: Option<f64>,
    /// Node count for the collocation space.
    #[arg(long)]
    nodes: Option<usize>,
}

impl SpaceFlags {
    fn to_spec(&self) -> Result<SpaceSpec, String> {
        match self.space {
            SpaceArg::Collocation => {
                if self.h.is_some() {
                    return Err("--h does not apply to collocation; use --nodes".into());
                }
                let nodes = self.nodes.ok_or("collocation needs --nodes")?;
                Ok(SpaceSpec::Collocation { nodes })
            }
            fd => {
                if self.nodes.is_some() {
                    return Err("--nodes only applies to collocation; use --h".into());
                }
                let h = self.h.ok_or("finite-difference spaces need --h")?;
                let h_list = vec![h];
                Ok(match fd {
                    SpaceArg::FdDirichlet => SpaceSpec::FdDirichlet { h_list },
                    _ => SpaceSpec::FdMixed { h_list },
                })
            }
        }
    }
}

#[derive(Args)]
struct RunArgs {
    /// Manufactured problem id (see `lawson list`).
    #[arg(long)]
    problem: String,
    /// Time-stepping scheme.
    #[arg(long, value_enum)]
    scheme: SchemeArg,
    /// Butcher tableau name.
    #[arg(long)]
    tableau: String,
    #[command(flatten)]
    space: SpaceFlags,
    /// Comma-separated step sizes, strictly descending.
    #[arg(long, value_delimiter = ',', required = true)]
    k: Vec<f64>,
    /// Integration horizon.
    #[arg(long = "T")]
    t_end: f64,
    /// Source of the boundary trace values.
    #[arg(long, value_enum, default_value = "data")]
    boundary_mode: ModeArg,
    /// Flag rows whose ratio k/h exceeds this bound.
    #[arg(long)]
    cfl_bound: Option<f64>,
    /// CSV output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PresetArgs {
    /// Preset name, table2 through table10.
    #[arg(long)]
    name: String,
    /// CSV output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AuditArgs {
    #[command(flatten)]
    space: SpaceFlags,
    /// Comma-separated step sizes to sample, strictly descending.
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.05")]
    k: Vec<f64>,
}

/// Warn when the correction's local order outruns what the tableau can
/// support globally (order p needs a tableau of classical order >= p-1).
fn warn_on_order_mismatch(scheme: SchemeKind, tableau_name: &str) {
    if let (Some(p), Ok(tab)) = (scheme.correction_order(), builtin(tableau_name)) {
        let q = tab.classical_order();
        if q + 1 < p {
            eprintln!(
                "warning: {} boundary corrections target local order {p}, but \
                 tableau {tableau_name} has classical order {q}; the extra \
                 corrections cannot raise the global order",
                scheme.name()
            );
        }
    }
}

/// Writes to stdout, treating a closed pipe as an orderly early exit:
/// `lawson list | head` must truncate quietly, not panic. Other write
/// failures are real errors.
fn print_stdout(text: &str) {
    use std::io::{ErrorKind, Write};
    let mut so = std::io::stdout().lock();
    if let Err(e) = so.write_all(text.as_bytes()).and_then(|()| so.flush()) {
        if e.kind() == ErrorKind::BrokenPipe {
            std::process::exit(0);
        }
        eprintln!("error: writing to stdout: {e}");
        std::process::exit(1);
    }
}

fn deliver(report: &ErrorReport, out: Option<&PathBuf>) -> Result<ExitCode, String> {
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    match out {
        Some(path) => emit_csv(report, path).map_err(|e| e.to_string())?,
        None => print_stdout(&csv_string(report)),
    }
    if report.rows.iter().any(|r| r.status == ROW_BLOWUP) {
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_run(args: &RunArgs) -> Result<ExitCode, String> {
    let scheme = SchemeKind::from(args.scheme);
    warn_on_order_mismatch(scheme, &args.tableau);
    let cfg = StudyConfig {
        problem: args.problem.clone(),
        scheme,
        tableau: args.tableau.clone(),
        mode: args.boundary_mode.into(),
        space: args.space.to_spec()?,
        k_list: args.k.clone(),
        t_end: args.t_end,
        want_local: true,
        want_global: true,
        cfl_bound: args.cfl_bound,
    };
    let report = run_study(&cfg).map_err(|e| e.to_string())?;
    deliver(&report, args.out.as_ref())
}

fn cmd_preset(args: &PresetArgs) -> Result<ExitCode, String> {
    let cfg = preset(&args.name).map_err(|e| e.to_string())?;
    warn_on_order_mismatch(cfg.scheme, &cfg.tableau);
    let report = run_study(&cfg).map_err(|e| e.to_string())?;
    deliver(&report, args.out.as_ref())
}

fn cmd_audit(args: &AuditArgs) -> Result<ExitCode, String> {
    let spaces = args.space.to_spec()?.build_all().map_err(|e| e.to_string())?;
    for space in &spaces {
        let record = assumption_audit(space, &args.k).map_err(|e| e.to_string())?;
        let mut text = format!("h = {}\n", record.h);
        for (name, value) in record.values() {
            text.push_str(&format!("  {name} = {value:.6e}\n"));
        }
        print_stdout(&text);
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_list() -> ExitCode {
    let mut text = String::new();
    let sections: [(&str, &[&str]); 5] = [
        ("problems", problem_names()),
        ("presets", preset_names()),
        ("schemes", scheme_names()),
        ("tableaus", builtin_names()),
        ("spaces", &["fd-dirichlet", "fd-mixed", "collocation"]),
    ];
    for (title, names) in sections {
        text.push_str(title);
        text.push_str(":\n");
        for name in names {
            text.push_str("  ");
            text.push_str(name);
            text.push('\n');
        }
    }
    print_stdout(&text);
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are successes, not usage errors.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match &cli.cmd {
        Cmd::Run(args) => cmd_run(args),
        Cmd::Preset(args) => cmd_preset(args),
        Cmd::Audit(args) => cmd_audit(args),
        Cmd::List => return cmd_list(),
    };
    match outcome {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
