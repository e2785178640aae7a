//! Convergence studies over node refinements and their CSV/JSON reports.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::assembly::{
    solve_coupled_with, Discretization, DiscretizationConfig, InitialGuess, LinearSystem, Method, PicardParams,
    SolutionField,
};
use crate::cases::{BenchmarkCase, CaseProblem};
use crate::error::{Error, Result};
use crate::linalg::{condition_number_2norm, BicgstabParams};
use crate::metrics::{error_norm, observed_order, ErrorNorm};
use crate::nodes::{generate, nodal_spacing, Distribution, NodeSet};

/// Starting state for the nonlinear cases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StartGuess {
    /// Harmonic extension of the boundary data for case 2; zero interior for case 3.
    #[default]
    Auto,
    Zero,
    Harmonic,
    Exact,
}

impl FromStr for StartGuess {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "auto" => Ok(StartGuess::Auto),
            "zero" => Ok(StartGuess::Zero),
            "harmonic" => Ok(StartGuess::Harmonic),
            "exact" => Ok(StartGuess::Exact),
            other => Err(Error::Parse(format!("unknown initial guess `{other}`"))),
        }
    }
}

/// Everything needed to solve one case on one node set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub disc: DiscretizationConfig,
    pub norm: ErrorNorm,
    pub picard: PicardParams,
    #[serde(skip, default)]
    pub solver: BicgstabParams,
    pub start: StartGuess,
    /// Compute the 2-norm condition number of the (last) system matrix.
    pub condition: bool,
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig {
            disc: DiscretizationConfig::default(),
            norm: ErrorNorm::default(),
            picard: PicardParams::default(),
            solver: BicgstabParams::default(),
            start: StartGuess::Auto,
            condition: false,
        }
    }
}

impl StudyConfig {
    pub fn hybrid(ng: usize, nr: usize, epsilon: f64) -> Self {
        StudyConfig { disc: DiscretizationConfig::hybrid(ng, nr, epsilon), ..Self::default() }
    }

    pub fn gfd() -> Self {
        StudyConfig { disc: DiscretizationConfig::gfd(), ..Self::default() }
    }

    pub fn cd2() -> Self {
        StudyConfig { disc: DiscretizationConfig::cd2(), ..Self::default() }
    }

    pub fn with_norm(mut self, norm: ErrorNorm) -> Self {
        self.norm = norm;
        self
    }

    pub fn with_condition(mut self, condition: bool) -> Self {
        self.condition = condition;
        self
    }
}

/// Solved fields of a case with their exact nodal values.
#[derive(Debug, Clone)]
pub struct CaseSolution {
    pub fields: Vec<SolutionField>,
    pub exact: Vec<Vec<f64>>,
    /// Last assembled system (of the first field for coupled problems).
    pub system: LinearSystem,
}

impl CaseSolution {
    pub fn errors(&self, nodes: &NodeSet, norm: ErrorNorm) -> Result<Vec<f64>> {
        self.fields.iter().zip(&self.exact).map(|(f, e)| error_norm(norm, nodes, &f.values, e)).collect()
    }
}

fn exact_values(case: &BenchmarkCase, nodes: &NodeSet) -> Vec<Vec<f64>> {
    (0..case.field_count()).map(|k| nodes.nodes().iter().map(|p| case.exact(p.x, p.y)[k]).collect()).collect()
}

fn initial_guess(case: &BenchmarkCase, start: StartGuess, exact: &[f64]) -> InitialGuess {
    match start {
        StartGuess::Auto if case.id() == 2 => InitialGuess::Harmonic,
        StartGuess::Auto | StartGuess::Zero => InitialGuess::Zero,
        StartGuess::Harmonic => InitialGuess::Harmonic,
        StartGuess::Exact => InitialGuess::Given(exact.to_vec()),
    }
}

/// Discretizes and solves a benchmark case on the given nodes.
pub fn solve_case_fields(case: &BenchmarkCase, nodes: &NodeSet, config: &StudyConfig) -> Result<CaseSolution> {
    let exact = exact_values(case, nodes);
    let solver = &config.solver;
    match case.problem() {
        CaseProblem::Scalar(p) => {
            let d = Discretization::new(nodes, config.disc, p.diffusion)?;
            let start = initial_guess(case, config.start, &exact[0]);
            let solved = d.solve_picard(&p, &config.picard, &start, solver)?;
            Ok(CaseSolution { fields: vec![solved.solution], exact, system: solved.system })
        }
        CaseProblem::Coupled(p) => {
            let d0 = Discretization::new(nodes, config.disc, p.fields[0].diffusion)?;
            let d1 = if p.fields[1].diffusion == p.fields[0].diffusion {
                None
            } else {
                Some(Discretization::new(nodes, config.disc, p.fields[1].diffusion)?)
            };
            let starts = [initial_guess(case, config.start, &exact[0]), initial_guess(case, config.start, &exact[1])];
            let solved = solve_coupled_with(&d0, d1.as_ref().unwrap_or(&d0), &p, &config.picard, &starts, solver)?;
            Ok(CaseSolution { fields: solved.solution.to_vec(), exact, system: solved.system })
        }
    }
}

/// Outcome of one refinement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "message")]
pub enum RowStatus {
    Ok,
    /// An iterative solver ran out of iterations.
    NotConvergent(String),
    Failed(String),
}

impl RowStatus {
    pub fn is_ok(&self) -> bool {
        matches!(self, RowStatus::Ok)
    }

    fn label(&self) -> &'static str {
        match self {
            RowStatus::Ok => "ok",
            RowStatus::NotConvergent(_) => "N.C.",
            RowStatus::Failed(_) => "failed",
        }
    }
}

impl fmt::Display for RowStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RowStatus::Ok => f.write_str("ok"),
            RowStatus::NotConvergent(m) | RowStatus::Failed(m) => write!(f, "{}: {m}", self.label()),
        }
    }
}

mod non_finite {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(x) if x.is_finite() => Repr::Num(*x).serialize(s),
            Some(x) => Repr::Text(super::fmt_float(*x)).serialize(s),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        match Option::<Repr>::deserialize(d)? {
            None => Ok(None),
            Some(Repr::Num(x)) => Ok(Some(x)),
            Some(Repr::Text(t)) => t.parse().map(Some).map_err(serde::de::Error::custom),
        }
    }
}

/// One refinement level of a study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyRow {
    pub nx: usize,
    pub ny: usize,
    pub node_count: usize,
    /// Nodal spacing `max_i min_j |x_i - x_j|`.
    pub h: f64,
    /// One error per field; empty for failed rows.
    pub errors: Vec<f64>,
    /// Observed order per field against the previous row; absent on the first row.
    pub orders: Vec<Option<f64>>,
    #[serde(with = "non_finite")]
    pub condition_number: Option<f64>,
    pub picard_iterations: usize,
    pub linear_iterations: usize,
    /// Seconds spent building stencils, assembling and solving.
    pub wall_time: f64,
    pub status: RowStatus,
}

/// Solves one case on one node set and measures it.
pub fn solve_case(case: &BenchmarkCase, nodes: &NodeSet, config: &StudyConfig) -> Result<StudyRow> {
    let start = Instant::now();
    let solution = solve_case_fields(case, nodes, config)?;
    let wall_time = start.elapsed().as_secs_f64();
    let errors = solution.errors(nodes, config.norm)?;
    let condition_number = config.condition.then(|| condition_number_2norm(&solution.system.matrix));
    let grid = nodes.grid();
    Ok(StudyRow {
        nx: grid.map_or(0, |g| g.nx),
        ny: grid.map_or(0, |g| g.ny),
        node_count: nodes.len(),
        h: nodal_spacing(nodes)?,
        orders: vec![None; errors.len()],
        errors,
        condition_number,
        picard_iterations: solution.fields[0].outer_iterations,
        linear_iterations: solution.fields.iter().map(|f| f.linear_iterations).sum(),
        wall_time,
        status: RowStatus::Ok,
    })
}

/// Study parameters recorded with a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportConfig {
    pub case: u8,
    pub method: Method,
    pub distribution: Distribution,
    pub ng: usize,
    pub nr: usize,
    pub epsilon: f64,
    pub poly_degree: crate::rbf::PolyDegree,
    pub star_rule: crate::star::StarRule,
    pub norm: ErrorNorm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub config: ReportConfig,
    pub rows: Vec<StudyRow>,
}

/// Runs `case` on `n x n` grids for each `n` in `refine`. Failed levels are
/// recorded in the report rather than aborting the study.
pub fn run_study(
    case: &BenchmarkCase,
    distribution: Distribution,
    refine: &[usize],
    config: &StudyConfig,
) -> Result<ConvergenceReport> {
    if refine.is_empty() {
        return Err(Error::invalid("refinement list is empty"));
    }
    if distribution == Distribution::Imported {
        return Err(Error::invalid("studies generate their own nodes; choose uniform or chebyshev"));
    }
    let fields = case.field_count();
    let mut rows: Vec<StudyRow> = Vec::with_capacity(refine.len());
    for &n in refine {
        let nodes = generate(distribution, n, n, case.domain())?;
        let mut row = match solve_case(case, &nodes, config) {
            Ok(row) => row,
            Err(e) => {
                let status = if e.is_non_convergence() {
                    RowStatus::NotConvergent(e.to_string())
                } else {
                    RowStatus::Failed(e.to_string())
                };
                StudyRow {
                    nx: n,
                    ny: n,
                    node_count: nodes.len(),
                    h: nodal_spacing(&nodes)?,
                    errors: Vec::new(),
                    orders: vec![None; fields],
                    condition_number: None,
                    picard_iterations: 0,
                    linear_iterations: 0,
                    wall_time: 0.0,
                    status,
                }
            }
        };
        if let Some(prev) = rows.last() {
            if prev.status.is_ok() && row.status.is_ok() {
                row.orders =
                    (0..fields).map(|k| observed_order(prev.errors[k], row.errors[k], prev.h, row.h)).collect();
            }
        }
        rows.push(row);
    }
    let d = &config.disc;
    Ok(ConvergenceReport {
        config: ReportConfig {
            case: case.id(),
            method: d.method,
            distribution,
            ng: d.ng,
            nr: d.nr,
            epsilon: d.epsilon,
            poly_degree: d.poly_degree,
            star_rule: d.star_rule,
            norm: config.norm,
        },
        rows,
    })
}

fn fmt_float(v: f64) -> String {
    // Debug formatting is the shortest representation that parses back exactly.
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{v:?}")
    }
}

fn parse_float(s: &str) -> Result<f64> {
    s.parse().map_err(|_| Error::Parse(format!("bad number `{s}`")))
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_float).unwrap_or_default()
}

const CSV_HEADER: &str = "node_count,nx,ny,h,error_u,error_v,order_u,order_v,condition_number,picard_iterations,linear_iterations,wall_time_s,status,message";

impl ConvergenceReport {
    pub fn write_json<W: Write>(&self, out: W) -> Result<()> {
        serde_json::to_writer_pretty(out, self)?;
        Ok(())
    }

    pub fn read_json<R: std::io::Read>(input: R) -> Result<Self> {
        Ok(serde_json::from_reader(input)?)
    }

    /// One line of `# key=value` metadata, then a header and one line per row.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let c = &self.config;
        writeln!(
            out,
            "# case={} method={} distribution={} ng={} nr={} epsilon={} poly_degree={} star_rule={} norm={}",
            c.case,
            c.method,
            c.distribution,
            c.ng,
            c.nr,
            fmt_float(c.epsilon),
            c.poly_degree,
            c.star_rule,
            c.norm
        )?;
        writeln!(out, "{CSV_HEADER}")?;
        for r in &self.rows {
            let err = |k: usize| r.errors.get(k).map(|v| fmt_float(*v)).unwrap_or_default();
            let ord = |k: usize| opt(r.orders.get(k).copied().flatten());
            let message = match &r.status {
                RowStatus::Ok => String::new(),
                // Messages are kept on one line so every row stays one record.
                RowStatus::NotConvergent(m) | RowStatus::Failed(m) => {
                    format!("\"{}\"", m.replace(['\n', '\r'], " ").replace('"', "\"\""))
                }
            };
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                r.node_count,
                r.nx,
                r.ny,
                fmt_float(r.h),
                err(0),
                err(1),
                ord(0),
                ord(1),
                opt(r.condition_number),
                r.picard_iterations,
                r.linear_iterations,
                fmt_float(r.wall_time),
                r.status.label(),
                message
            )?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines();
        let meta = lines.next().ok_or_else(|| Error::Parse("empty report".into()))??;
        let meta = meta.strip_prefix("# ").ok_or_else(|| Error::Parse("missing report metadata line".into()))?;
        let get = |key: &str| -> Result<String> {
            meta.split_whitespace()
                .find_map(|kv| kv.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
                .map(str::to_owned)
                .ok_or_else(|| Error::Parse(format!("metadata lacks `{key}`")))
        };
        let int = |s: String| s.parse::<usize>().map_err(|_| Error::Parse(format!("bad integer `{s}`")));
        let config = ReportConfig {
            case: get("case")?.parse().map_err(|_| Error::Parse("bad case id".into()))?,
            method: get("method")?.parse()?,
            distribution: get("distribution")?.parse()?,
            ng: int(get("ng")?)?,
            nr: int(get("nr")?)?,
            epsilon: parse_float(&get("epsilon")?)?,
            poly_degree: get("poly_degree")?.parse()?,
            star_rule: get("star_rule")?.parse()?,
            norm: get("norm")?.parse()?,
        };
        let fields = if config.case == 3 { 2 } else { 1 };
        let header = lines.next().ok_or_else(|| Error::Parse("missing header".into()))??;
        if header.trim() != CSV_HEADER {
            return Err(Error::Parse(format!("unexpected report header `{header}`")));
        }
        let mut rows = Vec::new();
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let (head, message) = match line.find(",\"") {
                Some(p) => {
                    let quoted = line[p + 2..].trim_end();
                    let body = quoted
                        .strip_suffix('"')
                        .ok_or_else(|| Error::Parse(format!("unterminated message in `{line}`")))?;
                    (&line[..p], body.replace("\"\"", "\""))
                }
                None => (line.trim_end_matches(','), String::new()),
            };
            let f: Vec<&str> = head.split(',').collect();
            if f.len() != 13 {
                return Err(Error::Parse(format!("report row has {} columns: `{line}`", f.len())));
            }
            let optf = |s: &str| -> Result<Option<f64>> {
                if s.is_empty() {
                    Ok(None)
                } else {
                    parse_float(s).map(Some)
                }
            };
            let status = match f[12] {
                "ok" => RowStatus::Ok,
                "N.C." => RowStatus::NotConvergent(message),
                "failed" => RowStatus::Failed(message),
                other => return Err(Error::Parse(format!("unknown row status `{other}`"))),
            };
            let errors: Vec<f64> = if status.is_ok() {
                (0..fields).map(|k| parse_float(f[4 + k])).collect::<Result<_>>()?
            } else {
                Vec::new()
            };
            rows.push(StudyRow {
                node_count: int(f[0].into())?,
                nx: int(f[1].into())?,
                ny: int(f[2].into())?,
                h: parse_float(f[3])?,
                errors,
                orders: (0..fields).map(|k| optf(f[6 + k])).collect::<Result<_>>()?,
                condition_number: optf(f[8])?,
                picard_iterations: int(f[9].into())?,
                linear_iterations: int(f[10].into())?,
                wall_time: parse_float(f[11])?,
                status,
            });
        }
        Ok(ConvergenceReport { config, rows })
    }
}

impl fmt::Display for ConvergenceReport {
    /// Table layout: nodes, h, errors, orders and condition number.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = &self.config;
        writeln!(
            f,
            "case {} | {} | {} | N_G={} N_R={} eps={} | {} error",
            c.case, c.method, c.distribution, c.ng, c.nr, c.epsilon, c.norm
        )?;
        writeln!(
            f,
            "{:>6} {:>10} {:>24} {:>16} {:>12} {:>8}",
            "nodes", "h", "error(s)", "order(s)", "C.N.", "time(s)"
        )?;
        for r in &self.rows {
            let errs = if r.status.is_ok() {
                r.errors.iter().map(|e| format!("{e:.4e}")).collect::<Vec<_>>().join(" ")
            } else {
                r.status.label().to_string()
            };
            let ords =
                r.orders.iter().map(|o| o.map_or("-".into(), |q| format!("{q:.4}"))).collect::<Vec<_>>().join(" ");
            let cn = r.condition_number.map_or("-".into(), |v| format!("{v:.4}"));
            writeln!(
                f,
                "{:>6} {:>10.4e} {:>24} {:>16} {:>12} {:>8.3}",
                r.node_count, r.h, errs, ords, cn, r.wall_time
            )?;
        }
        Ok(())
    }
}
