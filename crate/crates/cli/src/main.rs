use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use catbary::problem::{self, ProblemFile, ResultRecord, SequenceFile};
use catbary::report::{failures, Report};
use catbary::retraction::{BallCover, CoverOptions, FieldSample};
use catbary::gh::barycenter_limit;
use catbary::solver::{SolveError, SolverOptions};
use catbary::suites::{self, Suite};
use catbary::Error;

/// Weighted minimax barycenters in CAT(k) spaces.
#[derive(Parser)]
#[command(name = "catbary", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Barycenter of the weighted points in a problem file.
    Barycenter(SolveArgs),
    /// Circumcenter (smallest enclosing ball) of the points in a problem file; weights are ignored.
    Circumcenter(SolveArgs),
    /// Run a seeded verification suite and print one JSON report per line.
    Verify {
        #[arg(value_parser = parse_suite)]
        suite: Suite,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Instances per space family.
        #[arg(long, default_value_t = 20)]
        count: usize,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Barycenters along a converging sequence (the dyadic grid demo unless a sequence file is given).
    GhDemo {
        /// Sequence file; `-` reads standard input.
        #[arg(long)]
        sequence: Option<PathBuf>,
        /// Write the demo sequence to this file.
        #[arg(long)]
        write_sequence: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Retract [-2, 2]^2 onto the unit disk and report the checks.
    RetractionDemo {
        /// Write the sampled field (grid point -> image) to this file.
        #[arg(long)]
        field: Option<PathBuf>,
        /// Field grid points per axis.
        #[arg(long, default_value_t = 81)]
        grid: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverArgs,
    },
}

#[derive(Args)]
struct SolverArgs {
    /// Accuracy of the barycenter, as a distance.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, default_value_t = 50_000)]
    max_iter: usize,
}

impl SolverArgs {
    fn options(&self) -> SolverOptions {
        SolverOptions::default().with_tol(self.tol).with_max_iter(self.max_iter)
    }
}

#[derive(Args)]
struct SolveArgs {
    /// Problem file; `-` or nothing reads standard input.
    input: Option<PathBuf>,
    /// Also run the reference oracle and report the discrepancy.
    #[arg(long)]
    oracle: bool,
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverArgs,
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    s.parse().map_err(|_| {
        let names: Vec<_> = Suite::ALL.iter().map(|s| s.name()).collect();
        format!("unknown suite; expected one of {}", names.join(", "))
    })
}

enum Failure {
    Verification(usize),
    Input(Error),
    NonConvergence(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NonConvergence { .. } => Failure::NonConvergence(e.to_string()),
            e => Failure::Input(e),
        }
    }
}

fn io_error(path: &Path, e: io::Error) -> Failure {
    Failure::Input(Error::InvalidInput(format!("{}: {e}", path.display())))
}

fn read_input(path: Option<&Path>) -> Result<String, Failure> {
    match path {
        None => read_stdin(),
        Some(p) if p == Path::new("-") => read_stdin(),
        Some(p) => fs::read_to_string(p).map_err(|e| io_error(p, e)),
    }
}

fn read_stdin() -> Result<String, Failure> {
    let mut s = String::new();
    io::stdin().read_to_string(&mut s).map_err(|e| io_error(Path::new("<stdin>"), e))?;
    Ok(s)
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, format!("{text}\n")).map_err(|e| io_error(p, e)),
        None => writeln!(io::stdout(), "{text}").map_err(|e| io_error(Path::new("<stdout>"), e)),
    }
}

fn solve(args: &SolveArgs, circumcenter: bool) -> Result<(), Failure> {
    let mut file: ProblemFile = problem::parse(&read_input(args.input.as_deref())?)?;
    if circumcenter {
        file.weights = None;
        file.exponent = None;
    }
    let loaded = file.load()?;
    let record: ResultRecord = match loaded.solve(&args.solver.options(), args.oracle) {
        Ok(r) => r,
        Err(SolveError::Invalid(e)) => return Err(e.into()),
        Err(SolveError::NonConvergence { best }) => {
            let msg = format!(
                "no convergence after {} iterations (residual {:e}); best iterate {}",
                best.iterations,
                best.residual,
                serde_json::to_string(&best.barycenter).unwrap_or_default()
            );
            return Err(Failure::NonConvergence(msg));
        }
    };
    write_output(args.output.as_deref(), &problem::to_json(&record)?)
}

fn emit_reports(reports: &[Report]) -> Result<(), Failure> {
    let mut out = io::stdout().lock();
    for r in reports {
        writeln!(out, "{}", r.to_json_line()?).map_err(|e| io_error(Path::new("<stdout>"), e))?;
    }
    match failures(reports) {
        0 => Ok(()),
        n => Err(Failure::Verification(n)),
    }
}

#[derive(Serialize)]
struct GhOutput<P> {
    stage_barycenters: Vec<P>,
    limit_barycenter: P,
    distances: Vec<f64>,
    ladder: Vec<(f64, Option<usize>)>,
    gh_bounds: Vec<f64>,
    reports: Vec<Report>,
}

fn gh_demo(
    sequence: Option<&Path>,
    write_sequence: Option<&Path>,
    output: Option<&Path>,
    opts: &SolverOptions,
) -> Result<(), Failure> {
    let (text, reports) = match sequence {
        None => {
            let demo = suites::gh_demo(opts)?;
            if let Some(p) = write_sequence {
                let seq = SequenceFile::from_model(&demo.space, &demo.sequence);
                fs::write(p, problem::to_json(&seq)?).map_err(|e| io_error(p, e))?;
            }
            let l = demo.limit;
            let out = GhOutput {
                stage_barycenters: l.stage_barycenters.iter().map(problem::model_point_spec).collect(),
                limit_barycenter: problem::model_point_spec(&l.limit_barycenter),
                distances: l.distances,
                ladder: l.ladder,
                gh_bounds: l.gh_bounds,
                reports: demo.reports.clone(),
            };
            (problem::to_json(&out)?, demo.reports)
        }
        Some(path) => {
            let file: SequenceFile = problem::parse(&read_input(Some(path))?)?;
            let label = path.display().to_string();
            if file.is_tree() {
                let (tree, seq) = file.load_tree()?;
                let l = barycenter_limit(&tree, &seq, opts)?;
                let reports = l.reports(&label);
                let out = GhOutput {
                    stage_barycenters: l.stage_barycenters.iter().map(problem::tree_point_spec).collect(),
                    limit_barycenter: problem::tree_point_spec(&l.limit_barycenter),
                    distances: l.distances,
                    ladder: l.ladder,
                    gh_bounds: l.gh_bounds,
                    reports: reports.clone(),
                };
                (problem::to_json(&out)?, reports)
            } else {
                let (space, seq) = file.load_model()?;
                let l = barycenter_limit(&space, &seq, opts)?;
                let reports = l.reports(&label);
                let out = GhOutput {
                    stage_barycenters: l.stage_barycenters.iter().map(problem::model_point_spec).collect(),
                    limit_barycenter: problem::model_point_spec(&l.limit_barycenter),
                    distances: l.distances,
                    ladder: l.ladder,
                    gh_bounds: l.gh_bounds,
                    reports: reports.clone(),
                };
                (problem::to_json(&out)?, reports)
            }
        }
    };
    write_output(output, &text)?;
    match failures(&reports) {
        0 => Ok(()),
        n => Err(Failure::Verification(n)),
    }
}

#[derive(Serialize)]
struct FieldFile {
    target: &'static str,
    window: (Vec<f64>, Vec<f64>),
    collar: f64,
    members: usize,
    samples: Vec<FieldSample>,
}

#[derive(Serialize)]
struct RetractionOutput {
    members: usize,
    collar: f64,
    reports: Vec<Report>,
}

fn retraction_demo(
    field: Option<&Path>,
    grid: usize,
    seed: u64,
    output: Option<&Path>,
    opts: &SolverOptions,
) -> Result<(), Failure> {
    if grid < 2 {
        return Err(Failure::Input(Error::InvalidInput("--grid must be at least 2".into())));
    }
    let disk = suites::unit_disk()?;
    let (lo, hi) = suites::retraction_window();
    let cover = BallCover::build(
        &disk,
        lo.clone(),
        hi.clone(),
        CoverOptions::new(suites::RETRACTION_PACKING).with_collar(suites::RETRACTION_COLLAR),
    )?;
    let boundary = catbary::retraction::circle_samples(1.0, suites::BOUNDARY_SAMPLES);
    let reports = suites::retraction_reports(&cover, &boundary, "disk", seed, opts)?;
    if let Some(p) = field {
        let file = FieldFile {
            target: "unit-disk",
            window: (lo, hi),
            collar: cover.collar(),
            members: cover.members().len(),
            samples: cover.sample_field(grid, opts)?,
        };
        fs::write(p, problem::to_json(&file)?).map_err(|e| io_error(p, e))?;
    }
    let out = RetractionOutput { members: cover.members().len(), collar: cover.collar(), reports: reports.clone() };
    write_output(output, &problem::to_json(&out)?)?;
    match failures(&reports) {
        0 => Ok(()),
        n => Err(Failure::Verification(n)),
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Barycenter(args) => solve(&args, false),
        Command::Circumcenter(args) => solve(&args, true),
        Command::Verify { suite, seed, count, solver } => {
            emit_reports(&suites::run(suite, seed, count, &solver.options())?)
        }
        Command::GhDemo { sequence, write_sequence, output, solver } => {
            gh_demo(sequence.as_deref(), write_sequence.as_deref(), output.as_deref(), &solver.options())
        }
        Command::RetractionDemo { field, grid, seed, output, solver } => {
            retraction_demo(field.as_deref(), grid, seed, output.as_deref(), &solver.options())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification(n)) => {
            eprintln!("catbary: {n} check(s) failed");
            ExitCode::from(1)
        }
        Err(Failure::Input(e)) => {
            eprintln!("catbary: {e}");
            ExitCode::from(2)
        }
        Err(Failure::NonConvergence(msg)) => {
            eprintln!("catbary: {msg}");
            ExitCode::from(3)
        }
    }
}
