//! Assembly of the sparse system and the linear, Picard and coupled solve drivers.
//!
//! Every interior node contributes one row
//! `b . (G u) + a (R u) + r u_0 = f`, where `G` are the gradient weights and
//! `R` the second-order operator weights of the node's stencils. Members that
//! are boundary nodes move to the right-hand side with their Dirichlet values.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baseline::cd2_stencils;
use crate::error::{Error, Result};
use crate::gfd::{self, gfd_full_weights, gfd_gradient_weights};
use crate::linalg::{bicgstab, write_matrix_market, BicgstabParams, CsrMatrix};
use crate::nodes::NodeSet;
use crate::problem::{CoupledProblem, FieldSample, FrozenState, PointState, ProblemSpec};
use crate::rbf::{rbf_operator_weights, OperatorSpec, PolyDegree};
use crate::star::{select_star, StarRule};

/// Which weights approximate the derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// GFD gradients with RBF-FD second-order terms.
    #[default]
    Hybrid,
    /// Second-order GFD for all derivatives.
    Gfd,
    /// Central differences on a uniform tensor grid.
    Cd2,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Hybrid => "hybrid",
            Method::Gfd => "gfd",
            Method::Cd2 => "cd2",
        })
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "hybrid" => Ok(Method::Hybrid),
            "gfd" => Ok(Method::Gfd),
            "cd2" => Ok(Method::Cd2),
            other => Err(Error::Parse(format!("unknown method `{other}`"))),
        }
    }
}

/// Stencil parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscretizationConfig {
    pub method: Method,
    /// Star size for first-order terms (and for all terms with [`Method::Gfd`]).
    pub ng: usize,
    /// Star size for second-order terms.
    pub nr: usize,
    pub epsilon: f64,
    pub poly_degree: PolyDegree,
    pub star_rule: StarRule,
}

impl Default for DiscretizationConfig {
    fn default() -> Self {
        Self::hybrid(5, 5, 0.5)
    }
}

impl DiscretizationConfig {
    pub fn hybrid(ng: usize, nr: usize, epsilon: f64) -> Self {
        DiscretizationConfig {
            method: Method::Hybrid,
            ng,
            nr,
            epsilon,
            poly_degree: PolyDegree::One,
            star_rule: StarRule::Quadrant,
        }
    }

    /// Pure GFD on 9-node stars built from the nearest node on each half-axis and in each quadrant.
    pub fn gfd() -> Self {
        DiscretizationConfig { method: Method::Gfd, ng: 9, nr: 9, star_rule: StarRule::AxisQuadrant, ..Self::default() }
    }

    pub fn cd2() -> Self {
        DiscretizationConfig { method: Method::Cd2, ng: 5, nr: 5, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        match self.method {
            Method::Hybrid => {
                for n in [self.ng, self.nr] {
                    if n != 5 && n != 9 {
                        return Err(Error::invalid(format!("star sizes must be 5 or 9, got {n}")));
                    }
                }
                if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
                    return Err(Error::invalid(format!("shape parameter must be positive, got {}", self.epsilon)));
                }
            }
            Method::Gfd if self.ng != 9 => {
                return Err(Error::invalid(format!("pure GFD needs 9-node stars, got {}", self.ng)));
            }
            _ => {}
        }
        Ok(())
    }
}

/// Gradient and second-order weights of one interior node. Member lists start with the node itself.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeStencil {
    pub node: usize,
    pub grad_members: Vec<usize>,
    pub wx: Vec<f64>,
    pub wy: Vec<f64>,
    pub op_members: Vec<usize>,
    pub op_weights: Vec<f64>,
}

impl NodeStencil {
    pub fn gradient(&self, u: &[f64]) -> [f64; 2] {
        let mut g = [0.0, 0.0];
        for (k, &j) in self.grad_members.iter().enumerate() {
            g[0] += self.wx[k] * u[j];
            g[1] += self.wy[k] * u[j];
        }
        g
    }

    pub fn operator(&self, u: &[f64]) -> f64 {
        self.op_members.iter().zip(&self.op_weights).map(|(&j, w)| w * u[j]).sum()
    }
}

/// Assembled interior system.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    /// Node index of each unknown, ascending.
    pub interior: Vec<usize>,
}

impl LinearSystem {
    pub fn unknowns(&self) -> usize {
        self.interior.len()
    }

    pub fn write_matrix_market<W: Write>(&self, out: W) -> Result<()> {
        write_matrix_market(&self.matrix, out)
    }
}

/// A solved field over all nodes; boundary entries hold the Dirichlet data.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionField {
    pub values: Vec<f64>,
    /// Relative residual of the last linear solve.
    pub residual_norm: f64,
    /// Krylov iterations summed over all linear solves.
    pub linear_iterations: usize,
    /// Outer (Picard) iterations; 1 for a linear problem.
    pub outer_iterations: usize,
    /// RMS iterate change after each outer iteration.
    pub change_history: Vec<f64>,
}

/// Starting state of a fixed-point iteration. Boundary entries are always reset to `g`.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum InitialGuess {
    #[default]
    Zero,
    /// Solution of `L u = 0` with the problem's boundary data, on the same stencils.
    Harmonic,
    Given(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PicardParams {
    /// Bound on the interior RMS of `u_new - u_old`.
    pub tol: f64,
    pub max_iter: usize,
    /// Under-relaxation `u <- (1 - w) u_old + w u_new`.
    pub relaxation: f64,
}

impl Default for PicardParams {
    fn default() -> Self {
        PicardParams { tol: 1e-10, max_iter: 100, relaxation: 1.0 }
    }
}

impl PicardParams {
    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || self.max_iter == 0 || !(self.relaxation > 0.0 && self.relaxation <= 1.0) {
            return Err(Error::invalid(format!("bad Picard parameters {self:?}")));
        }
        Ok(())
    }
}

/// Solution together with the last assembled system.
#[derive(Debug, Clone)]
pub struct Solved<T> {
    pub solution: T,
    pub system: LinearSystem,
}

/// Precomputed stencils for a node set, configuration and second-order operator.
#[derive(Debug, Clone)]
pub struct Discretization<'a> {
    nodes: &'a NodeSet,
    config: DiscretizationConfig,
    operator: OperatorSpec,
    stencils: Vec<NodeStencil>,
    unknown_of: Vec<Option<usize>>,
    interior: Vec<usize>,
}

fn at_node(node: usize) -> impl Fn(Error) -> Error {
    move |e| Error::Discretization { node, source: Box::new(e) }
}

fn build_stencil(nodes: &NodeSet, c: usize, config: &DiscretizationConfig, op: &OperatorSpec) -> Result<NodeStencil> {
    let fail = at_node(c);
    match config.method {
        Method::Hybrid => {
            let gstar = select_star(c, nodes, config.ng, config.star_rule).map_err(&fail)?;
            let g = gfd_gradient_weights(&gstar).map_err(&fail)?;
            let rstar = if config.nr == config.ng {
                gstar
            } else {
                select_star(c, nodes, config.nr, config.star_rule).map_err(&fail)?
            };
            let r = rbf_operator_weights(&rstar, op, config.epsilon, config.poly_degree).map_err(&fail)?;
            Ok(NodeStencil {
                node: c,
                grad_members: g.star.members().collect(),
                wx: g.wx,
                wy: g.wy,
                op_members: r.star.members().collect(),
                op_weights: r.c,
            })
        }
        Method::Gfd => {
            let star = select_star(c, nodes, config.ng, config.star_rule).map_err(&fail)?;
            let s = gfd_full_weights(&star).map_err(&fail)?;
            let w = &s.weights;
            let op_weights = (0..star.size())
                .map(|k| op.xx * w[gfd::DXX][k] + op.yy * w[gfd::DYY][k] + op.xy * w[gfd::DXY][k])
                .collect();
            let members: Vec<usize> = star.members().collect();
            Ok(NodeStencil {
                node: c,
                grad_members: members.clone(),
                wx: s.weights[gfd::DX].clone(),
                wy: s.weights[gfd::DY].clone(),
                op_members: members,
                op_weights,
            })
        }
        Method::Cd2 => unreachable!("grid stencils are built in bulk"),
    }
}

impl<'a> Discretization<'a> {
    pub fn new(nodes: &'a NodeSet, config: DiscretizationConfig, operator: OperatorSpec) -> Result<Self> {
        config.validate()?;
        let interior = nodes.interior_indices();
        if interior.is_empty() {
            return Err(Error::invalid("node set has no interior nodes"));
        }
        let stencils = match config.method {
            Method::Cd2 => cd2_stencils(nodes, &operator)?,
            _ => {
                interior.par_iter().map(|&c| build_stencil(nodes, c, &config, &operator)).collect::<Result<Vec<_>>>()?
            }
        };
        let mut unknown_of = vec![None; nodes.len()];
        for (k, &i) in interior.iter().enumerate() {
            unknown_of[i] = Some(k);
        }
        Ok(Discretization { nodes, config, operator, stencils, unknown_of, interior })
    }

    pub fn nodes(&self) -> &NodeSet {
        self.nodes
    }

    pub fn config(&self) -> &DiscretizationConfig {
        &self.config
    }

    pub fn operator(&self) -> &OperatorSpec {
        &self.operator
    }

    /// Stencils in ascending interior-node order.
    pub fn stencils(&self) -> &[NodeStencil] {
        &self.stencils
    }

    pub fn interior(&self) -> &[usize] {
        &self.interior
    }

    /// Discrete gradient at every node; zero at boundary nodes.
    pub fn gradients(&self, u: &[f64]) -> Vec<[f64; 2]> {
        let mut g = vec![[0.0, 0.0]; self.nodes.len()];
        for s in &self.stencils {
            g[s.node] = s.gradient(u);
        }
        g
    }

    /// Freezes values and discrete gradients of the given fields.
    pub fn freeze(&self, fields: &[&[f64]]) -> FrozenState {
        FrozenState::new(
            fields
                .iter()
                .map(|u| {
                    self.gradients(u)
                        .into_iter()
                        .zip(u.iter())
                        .map(|(grad, &value)| FieldSample { value, grad })
                        .collect()
                })
                .collect(),
        )
    }

    pub fn boundary_values(&self, problem: &ProblemSpec) -> Vec<f64> {
        self.nodes.nodes().iter().map(|p| if p.is_interior() { 0.0 } else { (problem.dirichlet)(p.x, p.y) }).collect()
    }

    /// Assembles the interior system; `frozen` feeds state-dependent coefficients.
    pub fn assemble(&self, problem: &ProblemSpec, frozen: &FrozenState) -> Result<LinearSystem> {
        if problem.diffusion != self.operator {
            return Err(Error::invalid("problem operator differs from the discretized operator"));
        }
        if problem.is_state_dependent() && frozen.field_count() == 0 {
            return Err(Error::invalid("state-dependent problem needs a frozen state"));
        }
        let g = self.boundary_values(problem);
        let rows: Vec<(Vec<(usize, f64)>, f64)> =
            self.stencils.par_iter().map(|s| self.assemble_row(s, problem, frozen, &g)).collect::<Result<_>>()?;
        let (rows, rhs): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
        Ok(LinearSystem {
            matrix: CsrMatrix::from_rows(self.interior.len(), rows)?,
            rhs,
            interior: self.interior.clone(),
        })
    }

    fn assemble_row(
        &self,
        s: &NodeStencil,
        problem: &ProblemSpec,
        frozen: &FrozenState,
        g: &[f64],
    ) -> Result<(Vec<(usize, f64)>, f64)> {
        let p = self.nodes.node(s.node);
        let state = PointState { x: p.x, y: p.y, node: s.node, frozen };
        let bx = problem.convection[0].eval(&state);
        let by = problem.convection[1].eval(&state);
        let a = problem.diffusion_multiplier.eval(&state);
        let r = problem.reaction.eval(&state);
        let f = problem.source.eval(&state);
        if ![bx, by, a, r, f].iter().all(|v| v.is_finite()) {
            return Err(at_node(s.node)(Error::invalid("non-finite coefficient")));
        }

        let mut terms: Vec<(usize, f64)> = Vec::with_capacity(s.grad_members.len() + s.op_members.len() + 1);
        if bx != 0.0 || by != 0.0 {
            for (k, &j) in s.grad_members.iter().enumerate() {
                terms.push((j, bx * s.wx[k] + by * s.wy[k]));
            }
        }
        if a != 0.0 {
            terms.extend(s.op_members.iter().zip(&s.op_weights).map(|(&j, w)| (j, a * w)));
        }
        terms.push((s.node, r));
        // Stable sort keeps the summation order fixed.
        terms.sort_by_key(|t| t.0);

        let mut row = Vec::with_capacity(terms.len());
        let mut rhs = f;
        let mut k = 0;
        while k < terms.len() {
            let j = terms[k].0;
            let mut v = 0.0;
            while k < terms.len() && terms[k].0 == j {
                v += terms[k].1;
                k += 1;
            }
            match self.unknown_of[j] {
                Some(col) => row.push((col, v)),
                None => rhs -= v * g[j],
            }
        }
        Ok((row, rhs))
    }

    /// Solves an assembled system and scatters the result over all nodes.
    pub fn solve_system(
        &self,
        system: &LinearSystem,
        problem: &ProblemSpec,
        x0: Option<&[f64]>,
        params: &BicgstabParams,
    ) -> Result<SolutionField> {
        let sol = bicgstab(&system.matrix, &system.rhs, x0, params)?;
        let mut values = self.boundary_values(problem);
        for (k, &i) in system.interior.iter().enumerate() {
            values[i] = sol.x[k];
        }
        Ok(SolutionField {
            values,
            residual_norm: sol.relative_residual(),
            linear_iterations: sol.iterations,
            outer_iterations: 1,
            change_history: Vec::new(),
        })
    }

    pub fn solve_linear(&self, problem: &ProblemSpec, params: &BicgstabParams) -> Result<Solved<SolutionField>> {
        if problem.is_state_dependent() {
            return Err(Error::invalid("problem has state-dependent coefficients; use the Picard solver"));
        }
        let system = self.assemble(problem, &FrozenState::empty())?;
        let solution = self.solve_system(&system, problem, None, params)?;
        Ok(Solved { solution, system })
    }

    /// Full nodal vector for an initial guess.
    pub fn initial_values(
        &self,
        problem: &ProblemSpec,
        guess: &InitialGuess,
        params: &BicgstabParams,
    ) -> Result<Vec<f64>> {
        let g = self.boundary_values(problem);
        match guess {
            InitialGuess::Zero => Ok(g),
            InitialGuess::Harmonic => {
                let dirichlet = problem.dirichlet.clone();
                let mut harmonic = ProblemSpec::new(self.operator);
                harmonic.dirichlet = dirichlet;
                Ok(self.solve_linear(&harmonic, params)?.solution.values)
            }
            InitialGuess::Given(v) => {
                if v.len() != self.nodes.len() {
                    return Err(Error::invalid(format!(
                        "initial guess has {} values for {} nodes",
                        v.len(),
                        self.nodes.len()
                    )));
                }
                Ok(v.iter()
                    .zip(self.nodes.nodes())
                    .zip(&g)
                    .map(|((&vi, p), &gi)| if p.is_interior() { vi } else { gi })
                    .collect())
            }
        }
    }

    fn interior_of(&self, u: &[f64]) -> Vec<f64> {
        self.interior.iter().map(|&i| u[i]).collect()
    }

    fn rms_change(&self, a: &[f64], b: &[f64]) -> f64 {
        let s: f64 = self.interior.iter().map(|&i| (a[i] - b[i]).powi(2)).sum();
        (s / self.interior.len() as f64).sqrt()
    }

    fn relax(&self, old: &[f64], new: &mut [f64], w: f64) {
        if w != 1.0 {
            for &i in &self.interior {
                new[i] = (1.0 - w) * old[i] + w * new[i];
            }
        }
    }

    /// Lagged-coefficient fixed-point iteration. A linear problem takes a single solve.
    pub fn solve_picard(
        &self,
        problem: &ProblemSpec,
        picard: &PicardParams,
        initial: &InitialGuess,
        params: &BicgstabParams,
    ) -> Result<Solved<SolutionField>> {
        picard.validate()?;
        if !problem.is_state_dependent() {
            return self.solve_linear(problem, params);
        }
        let mut u = self.initial_values(problem, initial, params)?;
        let mut history = Vec::new();
        let mut linear = 0;
        for it in 1..=picard.max_iter {
            let frozen = self.freeze(&[&u]);
            let system = self.assemble(problem, &frozen)?;
            let x0 = self.interior_of(&u);
            let mut step = self.solve_system(&system, problem, Some(&x0), params)?;
            linear += step.linear_iterations;
            self.relax(&u, &mut step.values, picard.relaxation);
            let change = self.rms_change(&step.values, &u);
            history.push(change);
            u = std::mem::take(&mut step.values);
            if change <= picard.tol {
                return Ok(Solved {
                    solution: SolutionField {
                        values: u,
                        residual_norm: step.residual_norm,
                        linear_iterations: linear,
                        outer_iterations: it,
                        change_history: history,
                    },
                    system,
                });
            }
        }
        Err(Error::PicardNonConvergence {
            iterations: picard.max_iter,
            last_change: history.last().copied().unwrap_or(f64::NAN),
            history,
        })
    }
}

/// Two discretizations sharing nodes and configuration, one per field operator.
fn coupled_discretizations<'a>(
    problem: &CoupledProblem,
    nodes: &'a NodeSet,
    config: &DiscretizationConfig,
) -> Result<(Discretization<'a>, Option<Discretization<'a>>)> {
    let d0 = Discretization::new(nodes, *config, problem.fields[0].diffusion)?;
    let d1 = if problem.fields[1].diffusion == problem.fields[0].diffusion {
        None
    } else {
        Some(Discretization::new(nodes, *config, problem.fields[1].diffusion)?)
    };
    Ok((d0, d1))
}

/// Block Gauss-Seidel Picard iteration for a two-field problem.
pub fn solve_coupled_with(
    d0: &Discretization,
    d1: &Discretization,
    problem: &CoupledProblem,
    picard: &PicardParams,
    initials: &[InitialGuess; 2],
    params: &BicgstabParams,
) -> Result<Solved<[SolutionField; 2]>> {
    picard.validate()?;
    let [p0, p1] = &problem.fields;
    let mut u = d0.initial_values(p0, &initials[0], params)?;
    let mut v = d1.initial_values(p1, &initials[1], params)?;
    let nonlinear = p0.is_state_dependent() || p1.is_state_dependent();
    let mut history = Vec::new();
    let mut linear = [0usize; 2];
    for it in 1..=picard.max_iter {
        let s0 = d0.assemble(p0, &d0.freeze(&[&u, &v]))?;
        let mut a = d0.solve_system(&s0, p0, Some(&d0.interior_of(&u)), params)?;
        d0.relax(&u, &mut a.values, picard.relaxation);
        let s1 = d1.assemble(p1, &d0.freeze(&[&a.values, &v]))?;
        let mut b = d1.solve_system(&s1, p1, Some(&d1.interior_of(&v)), params)?;
        d1.relax(&v, &mut b.values, picard.relaxation);
        linear[0] += a.linear_iterations;
        linear[1] += b.linear_iterations;
        let change = d0.rms_change(&a.values, &u).max(d1.rms_change(&b.values, &v));
        history.push(change);
        u = a.values.clone();
        v = b.values.clone();
        if !nonlinear || change <= picard.tol {
            let finish = |mut f: SolutionField, lin: usize| {
                f.linear_iterations = lin;
                f.outer_iterations = it;
                f.change_history = history.clone();
                f
            };
            // The first field's system is the one reported.
            return Ok(Solved { solution: [finish(a, linear[0]), finish(b, linear[1])], system: s0 });
        }
    }
    Err(Error::PicardNonConvergence {
        iterations: picard.max_iter,
        last_change: history.last().copied().unwrap_or(f64::NAN),
        history,
    })
}

/// Assembles the system of `problem` on `nodes`.
pub fn discretize(
    problem: &ProblemSpec,
    nodes: &NodeSet,
    config: &DiscretizationConfig,
    frozen: Option<&FrozenState>,
) -> Result<LinearSystem> {
    let d = Discretization::new(nodes, *config, problem.diffusion)?;
    d.assemble(problem, frozen.unwrap_or(&FrozenState::empty()))
}

pub fn solve_linear(
    problem: &ProblemSpec,
    nodes: &NodeSet,
    config: &DiscretizationConfig,
    params: &BicgstabParams,
) -> Result<SolutionField> {
    Ok(Discretization::new(nodes, *config, problem.diffusion)?.solve_linear(problem, params)?.solution)
}

pub fn solve_picard(
    problem: &ProblemSpec,
    nodes: &NodeSet,
    config: &DiscretizationConfig,
    picard: &PicardParams,
    initial: &InitialGuess,
    params: &BicgstabParams,
) -> Result<SolutionField> {
    let d = Discretization::new(nodes, *config, problem.diffusion)?;
    Ok(d.solve_picard(problem, picard, initial, params)?.solution)
}

pub fn solve_coupled(
    problem: &CoupledProblem,
    nodes: &NodeSet,
    config: &DiscretizationConfig,
    picard: &PicardParams,
    initials: &[InitialGuess; 2],
    params: &BicgstabParams,
) -> Result<[SolutionField; 2]> {
    let (d0, d1) = coupled_discretizations(problem, nodes, config)?;
    let d1 = d1.as_ref().unwrap_or(&d0);
    Ok(solve_coupled_with(&d0, d1, problem, picard, initials, params)?.solution)
}

/// Writes `index,x,y,<field...>,<exact...>,<abs_error...>`.
/// One field uses the columns `u,exact,abs_error`; two fields use
/// `u,v,exact_u,exact_v,abs_error_u,abs_error_v`.
pub fn write_solution_csv<W: Write>(mut out: W, nodes: &NodeSet, fields: &[&[f64]], exact: &[&[f64]]) -> Result<()> {
    if fields.is_empty() || fields.len() > 2 || exact.len() != fields.len() {
        return Err(Error::invalid("solution dump needs one or two fields with matching exact values"));
    }
    let names = ["u", "v"];
    let mut header = String::from("index,x,y");
    for name in &names[..fields.len()] {
        header.push(',');
        header.push_str(name);
    }
    if fields.len() == 1 {
        header.push_str(",exact,abs_error");
    } else {
        header.push_str(",exact_u,exact_v,abs_error_u,abs_error_v");
    }
    writeln!(out, "{header}")?;
    for p in nodes.nodes() {
        write!(out, "{},{:.17e},{:.17e}", p.index, p.x, p.y)?;
        for f in fields {
            write!(out, ",{:.17e}", f[p.index])?;
        }
        for e in exact {
            write!(out, ",{:.17e}", e[p.index])?;
        }
        for (f, e) in fields.iter().zip(exact) {
            write!(out, ",{:.17e}", (f[p.index] - e[p.index]).abs())?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Writes `center,neighbor,wx,wy,w_op`, one row per member of each node's stencil union.
pub fn write_stencils_csv<W: Write>(mut out: W, d: &Discretization) -> Result<()> {
    writeln!(out, "center,neighbor,wx,wy,w_op")?;
    for s in d.stencils() {
        let mut members: Vec<usize> = s.grad_members.iter().chain(&s.op_members).copied().collect();
        members.sort_unstable();
        members.dedup();
        let find = |list: &[usize], w: &[f64], j: usize| list.iter().position(|&m| m == j).map_or(0.0, |k| w[k]);
        for j in members {
            writeln!(
                out,
                "{},{},{:.17e},{:.17e},{:.17e}",
                s.node,
                j,
                find(&s.grad_members, &s.wx, j),
                find(&s.grad_members, &s.wy, j),
                find(&s.op_members, &s.op_weights, j)
            )?;
        }
    }
    Ok(())
}
