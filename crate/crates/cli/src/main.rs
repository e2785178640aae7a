//! Command-line driver for the benchmark problems.
//!
//! Exit codes: 0 on success, 1 on invalid input or I/O failure, 2 when a
//! solver does not converge (or, for `study`, when any refinement fails).

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use meshless::assembly::{write_solution_csv, write_stencils_csv};
use meshless::cases::BenchmarkCase;
use meshless::metrics::ErrorNorm;
use meshless::study::{run_study, solve_case_fields, RowStatus, StartGuess, StudyConfig};
use meshless::{
    condition_number_2norm, generate, nodal_spacing, Discretization, DiscretizationConfig, Distribution, Method,
    OperatorSpec, PolyDegree, StarRule,
};

#[derive(Parser, Debug)]
#[command(name = "meshless", version, about = "Hybrid GFD / RBF-FD solvers for the convection-diffusion benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve one benchmark on one node set and write the nodal solution.
    Solve {
        #[command(flatten)]
        common: Common,
        /// Nodes per axis (the grid has nodes x nodes points).
        #[arg(long, default_value_t = 11)]
        nodes: usize,
        /// Also compute the 2-norm condition number of the system matrix.
        #[arg(long)]
        condition: bool,
    },
    /// Run a convergence study over several refinements.
    Study {
        #[command(flatten)]
        common: Common,
        /// Nodes per axis for each refinement level.
        #[arg(long, value_delimiter = ',', default_value = "11,21,41")]
        refine: Vec<usize>,
        /// Compute condition numbers (dense SVD; slow beyond a few thousand nodes).
        #[arg(long)]
        condition: bool,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// Benchmark problem.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    example: u8,
    #[arg(long, default_value = "hybrid")]
    method: Method,
    #[arg(long, default_value = "uniform")]
    dist: Distribution,
    /// Star size for first-order terms.
    #[arg(long, default_value_t = 5)]
    ng: usize,
    /// Star size for second-order terms.
    #[arg(long, default_value_t = 5)]
    nr: usize,
    /// Multiquadric shape parameter; defaults to the value used for the example and distribution.
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long, default_value = "1")]
    poly_degree: PolyDegree,
    /// Neighbour selection rule for hybrid stars.
    #[arg(long)]
    star_rule: Option<StarRule>,
    /// Picard tolerance on the RMS change of the interior iterate.
    #[arg(long)]
    tol: Option<f64>,
    /// Relative residual tolerance of Bi-CGSTAB.
    #[arg(long)]
    linear_tol: Option<f64>,
    /// Maximum number of Picard iterations.
    #[arg(long)]
    max_picard: Option<usize>,
    /// Starting state of the nonlinear iteration.
    #[arg(long, default_value = "auto")]
    start: StartGuess,
    #[arg(long, default_value = "interior")]
    error_norm: ErrorNorm,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Output file; standard output when omitted.
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Write the (last) system matrix in Matrix Market format.
    #[arg(long)]
    dump_system: Option<PathBuf>,
    /// Write per-node stencil weights as CSV.
    #[arg(long)]
    dump_stencils: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Csv,
    Json,
}

impl Common {
    fn case(&self) -> BenchmarkCase {
        BenchmarkCase::new(self.example).expect("range-checked by clap")
    }

    fn config(&self) -> Result<StudyConfig> {
        let case = self.case();
        let epsilon = self.epsilon.unwrap_or_else(|| case.default_epsilon(self.dist));
        let mut disc = match self.method {
            Method::Hybrid => DiscretizationConfig::hybrid(self.ng, self.nr, epsilon),
            Method::Gfd => DiscretizationConfig::gfd(),
            Method::Cd2 => DiscretizationConfig::cd2(),
        };
        disc.poly_degree = self.poly_degree;
        if let Some(rule) = self.star_rule {
            disc.star_rule = rule;
        }
        disc.validate()?;
        let mut config = StudyConfig { disc, norm: self.error_norm, start: self.start, ..StudyConfig::default() };
        if let Some(tol) = self.tol {
            config.picard.tol = tol;
        }
        if let Some(n) = self.max_picard {
            config.picard.max_iter = n;
        }
        if let Some(tol) = self.linear_tol {
            if tol.is_nan() || tol <= 0.0 {
                bail!("--linear-tol must be positive");
            }
            config.solver.rel_tol = tol;
        }
        if self.dist == Distribution::Imported {
            bail!("--dist must be uniform or chebyshev");
        }
        Ok(config)
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).with_context(|| format!("cannot create {}", path.display()))?))
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(create(p)?),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn solve(common: &Common, n: usize, condition: bool) -> Result<ExitCode> {
    let case = common.case();
    let config = common.config()?;
    let nodes = generate(common.dist, n, n, case.domain())?;
    if let Some(path) = &common.dump_stencils {
        let d = Discretization::new(&nodes, config.disc, OperatorSpec::laplacian())?;
        write_stencils_csv(create(path)?, &d)?;
    }
    let solution = solve_case_fields(&case, &nodes, &config)?;
    if let Some(path) = &common.dump_system {
        solution.system.write_matrix_market(create(path)?)?;
    }
    let errors = solution.errors(&nodes, config.norm)?;
    let cond = condition.then(|| condition_number_2norm(&solution.system.matrix));
    let fields: Vec<&[f64]> = solution.fields.iter().map(|f| f.values.as_slice()).collect();
    let exact: Vec<&[f64]> = solution.exact.iter().map(Vec::as_slice).collect();

    let mut out = output(common.out.as_deref())?;
    match common.format {
        Format::Csv => write_solution_csv(&mut out, &nodes, &fields, &exact)?,
        Format::Json => {
            let doc = serde_json::json!({
                "example": case.id(),
                "config": config,
                "distribution": common.dist.to_string(),
                "node_count": nodes.len(),
                "h": nodal_spacing(&nodes)?,
                "errors": errors,
                "condition_number": cond,
                "picard_iterations": solution.fields[0].outer_iterations,
                "linear_iterations": solution.fields.iter().map(|f| f.linear_iterations).sum::<usize>(),
                "x": nodes.nodes().iter().map(|p| p.x).collect::<Vec<_>>(),
                "y": nodes.nodes().iter().map(|p| p.y).collect::<Vec<_>>(),
                "fields": fields,
                "exact": exact,
            });
            serde_json::to_writer_pretty(&mut out, &doc)?;
            writeln!(out)?;
        }
    }
    out.flush()?;

    let names = ["u", "v"];
    let summary: Vec<String> = errors.iter().enumerate().map(|(k, e)| format!("{} error {e:.4e}", names[k])).collect();
    eprintln!(
        "example {} | {} | {} nodes | {} | {} Picard iterations{}",
        case.id(),
        config.disc.method,
        nodes.len(),
        summary.join(", "),
        solution.fields[0].outer_iterations,
        cond.map(|c| format!(" | C.N. {c:.4}")).unwrap_or_default()
    );
    Ok(ExitCode::SUCCESS)
}

fn study(common: &Common, refine: &[usize], condition: bool) -> Result<ExitCode> {
    if refine.is_empty() {
        bail!("--refine needs at least one level");
    }
    let case = common.case();
    let config = common.config()?.with_condition(condition);
    let report = run_study(&case, common.dist, refine, &config)?;

    let mut out = output(common.out.as_deref())?;
    match common.format {
        Format::Csv => report.write_csv(&mut out)?,
        Format::Json => {
            report.write_json(&mut out)?;
            writeln!(out)?;
        }
    }
    out.flush()?;
    eprint!("{report}");

    if let Some(path) = &common.dump_system {
        // The finest level's system.
        let n = *refine.last().expect("non-empty");
        let nodes = generate(common.dist, n, n, case.domain())?;
        let solution = solve_case_fields(&case, &nodes, &config)?;
        solution.system.write_matrix_market(create(path)?)?;
    }
    if let Some(path) = &common.dump_stencils {
        let n = *refine.last().expect("non-empty");
        let nodes = generate(common.dist, n, n, case.domain())?;
        write_stencils_csv(create(path)?, &Discretization::new(&nodes, config.disc, OperatorSpec::laplacian())?)?;
    }

    Ok(if report.rows.iter().all(|r| r.status == RowStatus::Ok) { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn is_broken_pipe(err: &anyhow::Error) -> bool {
    err.chain().any(|e| {
        let io = e.downcast_ref::<io::Error>().or_else(|| match e.downcast_ref::<meshless::Error>() {
            Some(meshless::Error::Io(io)) => Some(io),
            _ => None,
        });
        io.is_some_and(|io| io.kind() == io::ErrorKind::BrokenPipe)
    })
}

fn exit_code(err: &anyhow::Error) -> ExitCode {
    match err.downcast_ref::<meshless::Error>() {
        Some(e) if e.is_non_convergence() => ExitCode::from(2),
        _ => ExitCode::from(1),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match &cli.command {
        Command::Solve { common, nodes, condition } => solve(common, *nodes, *condition),
        Command::Study { common, refine, condition } => study(common, refine, *condition),
    };
    result.unwrap_or_else(|e| {
        if is_broken_pipe(&e) {
            // A closed downstream pipe (e.g. `| head`) is not a failure.
            return ExitCode::SUCCESS;
        }
        eprintln!("error: {e:#}");
        exit_code(&e)
    })
}
