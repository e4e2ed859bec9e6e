//! `annealfem solve|oracle|export-graph` command implementations.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::box_solver::{
    bound_for, box_graph, planar_error_bound, run_box, stiffness_spectrum, BoxRun, BoxState, MoveKind,
};
use crate::error::Error;
use crate::fem::{classical_fem_solve, functional_value, NodalState};
use crate::input::{BuiltProblem, ProblemFile};
use crate::sampler::SamplerKind;

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;
pub const EXIT_CAPACITY: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "annealfem",
    version,
    about = "Box-algorithm Ising solver for 1D boundary-value problems"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the box algorithm and write history.csv, solution.csv and summary.txt
    Solve(CommonArgs),
    /// Print the exact discrete minimizer and its functional value
    Oracle(CommonArgs),
    /// Write the assembled Ising graph for one box as an edge list
    ExportGraph {
        #[command(flatten)]
        common: CommonArgs,
        /// Box center, comma separated, one value per node
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        center: Option<Vec<f64>>,
        /// Box slack
        #[arg(long)]
        slack: Option<f64>,
    },
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Problem file (JSON)
    pub input: PathBuf,
    /// Output directory
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Annealer seed, overrides the file
    #[arg(long, env = "ANNEALFEM_SEED")]
    pub seed: Option<u64>,
    /// exact or sa
    #[arg(long)]
    pub sampler: Option<SamplerKind>,
    /// Initial box slack
    #[arg(long)]
    pub r_init: Option<f64>,
    /// Stop once the slack drops to this
    #[arg(long)]
    pub r_min: Option<f64>,
    /// One-hot penalty relative to the largest coupling
    #[arg(long)]
    pub gap_factor: Option<f64>,
}

/// Failure of a command, carrying its exit status.
#[derive(Debug)]
pub struct CommandError {
    pub code: i32,
    pub message: String,
}

impl CommandError {
    fn parse(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_PARSE,
            message: message.into(),
        }
    }
}

impl From<Error> for CommandError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Capacity { .. } => EXIT_CAPACITY,
            _ => EXIT_PARSE,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CommandError {
    fn from(e: std::io::Error) -> Self {
        Self::parse(e.to_string())
    }
}

/// Parses arguments, runs the command and returns the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_PARSE } else { EXIT_OK };
        }
    };
    let result = match &cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Oracle(args) => cmd_oracle(args),
        Command::ExportGraph { common, center, slack } => cmd_export_graph(common, center.as_deref(), *slack),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

/// Reads the problem file, applies flag overrides and builds the problem.
pub fn load(args: &CommonArgs) -> Result<(ProblemFile, BuiltProblem), CommandError> {
    let text =
        fs::read_to_string(&args.input).map_err(|e| CommandError::parse(format!("{}: {e}", args.input.display())))?;
    let mut input =
        ProblemFile::from_json(&text).map_err(|e| CommandError::parse(format!("{}: {e}", args.input.display())))?;
    if let Some(seed) = args.seed {
        input.solver.seed = seed;
    }
    if let Some(sampler) = args.sampler {
        input.solver.sampler = sampler;
    }
    if let Some(r) = args.r_init {
        input.solver.r_init = r;
    }
    if let Some(r) = args.r_min {
        input.solver.r_min = r;
    }
    if let Some(g) = args.gap_factor {
        input.solver.gap_factor = g;
    }
    let built = input
        .build(Some(&text))
        .map_err(|e| CommandError::parse(format!("{}: {e}", args.input.display())))?;
    Ok((input, built))
}

/// Numbers in output files: 17 significant digits.
pub fn fmt_num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn cmd_solve(args: &CommonArgs) -> Result<i32, CommandError> {
    let (_, problem) = load(args)?;
    let out_dir = args.out.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&out_dir)?;

    let run = run_box(
        &problem.elements,
        problem.u_l,
        problem.u_r,
        &problem.config,
        problem.init_center.as_deref(),
    )?;
    let oracle = classical_fem_solve(&problem.elements, problem.u_l, problem.u_r)?;
    let bound = bound_for(&problem.elements, run.slack)?;

    fs::write(out_dir.join("history.csv"), history_csv(&problem, &run)?)?;
    fs::write(
        out_dir.join("solution.csv"),
        solution_csv(&problem, &run.center, &oracle, bound),
    )?;
    let summary = summary_text(&problem, &run, &oracle, bound)?;
    fs::write(out_dir.join("summary.txt"), &summary)?;
    print!("{summary}");

    Ok(if run.converged { EXIT_OK } else { EXIT_NOT_CONVERGED })
}

pub fn history_csv(problem: &BuiltProblem, run: &BoxRun) -> Result<String, Error> {
    let n_nodes = problem.nodes.len();
    let mut out = String::from("iter,move,r,energy,feasible_fraction");
    for i in 0..n_nodes {
        let _ = write!(out, ",u_{i}");
    }
    out.push('\n');

    let initial_energy = functional_value(&problem.elements, &run.initial_center)?;
    let _ = write!(
        out,
        "0,init,{},{},",
        fmt_num(problem.config.r_init),
        fmt_num(initial_energy)
    );
    push_values(&mut out, &run.initial_center);
    for rec in &run.history {
        let _ = write!(
            out,
            "{},{},{},{},{}",
            rec.iteration,
            rec.move_kind.as_str(),
            fmt_num(rec.slack_after),
            fmt_num(rec.energy_after),
            fmt_num(rec.feasible_fraction)
        );
        push_values(&mut out, &rec.center);
    }
    Ok(out)
}

fn push_values(out: &mut String, values: &[f64]) {
    for v in values {
        out.push(',');
        out.push_str(&fmt_num(*v));
    }
    out.push('\n');
}

pub fn solution_csv(problem: &BuiltProblem, center: &[f64], oracle: &[f64], bound: f64) -> String {
    let mut out = String::from("node,x,box,oracle,difference,bound\n");
    for (i, ((x, b), o)) in problem.nodes.iter().zip(center).zip(oracle).enumerate() {
        let _ = writeln!(
            out,
            "{i},{},{},{},{},{}",
            fmt_num(*x),
            fmt_num(*b),
            fmt_num(*o),
            fmt_num((b - o).abs()),
            fmt_num(bound)
        );
    }
    out
}

fn summary_text(problem: &BuiltProblem, run: &BoxRun, oracle: &[f64], bound: f64) -> Result<String, Error> {
    let box_energy = functional_value(&problem.elements, &run.center)?;
    let oracle_energy = functional_value(&problem.elements, oracle)?;
    let translations = run
        .history
        .iter()
        .filter(|r| r.move_kind == MoveKind::Translate)
        .count();
    let l2: f64 = run
        .center
        .iter()
        .zip(oracle)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    let linf = run
        .center
        .iter()
        .zip(oracle)
        .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));

    let mut s = String::new();
    let _ = writeln!(
        s,
        "status: {}",
        if run.converged { "converged" } else { "not converged" }
    );
    let _ = writeln!(
        s,
        "iterations: {} ({} translations, {} contractions)",
        run.history.len(),
        translations,
        run.history.len() - translations
    );
    let _ = writeln!(s, "final slack: {}", fmt_num(run.slack));
    let _ = writeln!(s, "functional (box): {}", fmt_num(box_energy));
    let _ = writeln!(s, "functional (oracle): {}", fmt_num(oracle_energy));
    let _ = writeln!(s, "max nodal difference: {}", fmt_num(linf));
    let _ = writeln!(s, "l2 difference: {}", fmt_num(l2));
    if problem.elements.len() >= 2 {
        let sp = stiffness_spectrum(&problem.elements)?;
        let _ = writeln!(s, "free unknowns: {}", sp.free_unknowns);
        let _ = writeln!(s, "lambda_min: {}", fmt_num(sp.lambda_min));
        let _ = writeln!(s, "lambda_max: {}", fmt_num(sp.lambda_max));
        if sp.free_unknowns == 2 {
            let planar = planar_error_bound(run.slack, sp.lambda_max, sp.lambda_min)?;
            let _ = writeln!(s, "planar bound: {}", fmt_num(planar));
        }
    }
    let _ = writeln!(s, "error bound: {}", fmt_num(bound));
    Ok(s)
}

pub fn cmd_oracle(args: &CommonArgs) -> Result<i32, CommandError> {
    let (_, problem) = load(args)?;
    let a = classical_fem_solve(&problem.elements, problem.u_l, problem.u_r)?;
    let energy = functional_value(&problem.elements, &a)?;
    let mut out = String::from("node,x,a\n");
    for (i, (x, v)) in problem.nodes.iter().zip(a.iter()).enumerate() {
        let _ = writeln!(out, "{i},{},{}", fmt_num(*x), fmt_num(*v));
    }
    let _ = writeln!(out, "Pi_N = {}", fmt_num(energy));
    print!("{out}");
    if let Some(dir) = &args.out {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("oracle.csv"), &out)?;
    }
    Ok(EXIT_OK)
}

pub fn cmd_export_graph(args: &CommonArgs, center: Option<&[f64]>, slack: Option<f64>) -> Result<i32, CommandError> {
    let (_, problem) = load(args)?;
    let n_nodes = problem.nodes.len();
    let mut center = match center.or(problem.init_center.as_deref()) {
        Some(c) if c.len() != n_nodes => {
            return Err(CommandError::parse(format!(
                "center has {} values, the mesh has {n_nodes} nodes",
                c.len()
            )))
        }
        Some(c) => NodalState(c.to_vec()),
        None => NodalState::linear(problem.u_l, problem.u_r, n_nodes),
    };
    center.0[0] = problem.u_l;
    center.0[n_nodes - 1] = problem.u_r;
    let state = BoxState::new(center, slack.unwrap_or(problem.config.r_init))?;
    let graph = box_graph(&state, &problem.elements, &problem.config)?;
    let text = graph.to_edge_list();
    match &args.out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            fs::write(dir.join("graph.txt"), text)?;
        }
        None => print!("{text}"),
    }
    Ok(EXIT_OK)
}
