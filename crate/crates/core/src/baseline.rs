//! Comparison discretizations: central differences on uniform grids and pure second-order GFD.

use crate::assembly::NodeStencil;
use crate::cases::BenchmarkCase;
use crate::error::{Error, Result};
use crate::nodes::{generate_uniform, Distribution, NodeSet};
use crate::rbf::OperatorSpec;
use crate::study::{solve_case_fields, CaseSolution, StudyConfig};

const SPACING_TOL: f64 = 1e-9;

fn uniform_step(coords: &[f64], axis: &str) -> Result<f64> {
    let h = coords[1] - coords[0];
    for w in coords.windows(2) {
        if ((w[1] - w[0]) - h).abs() > SPACING_TOL * h {
            return Err(Error::invalid(format!("central differences need uniform {axis} spacing")));
        }
    }
    Ok(h)
}

/// Five-point gradient and operator stencils (nine-point when `op` has a cross term).
pub fn cd2_stencils(nodes: &NodeSet, op: &OperatorSpec) -> Result<Vec<NodeStencil>> {
    if nodes.distribution() == Distribution::Chebyshev {
        return Err(Error::invalid("central differences are defined on uniform grids only"));
    }
    let grid = nodes.grid().ok_or_else(|| Error::invalid("central differences need a tensor-product grid"))?;
    let xs: Vec<f64> = (0..grid.nx).map(|i| nodes.node(grid.index(i, 0)).x).collect();
    let ys: Vec<f64> = (0..grid.ny).map(|j| nodes.node(grid.index(0, j)).y).collect();
    let hx = uniform_step(&xs, "x")?;
    let hy = uniform_step(&ys, "y")?;

    let (cx, cy) = (op.xx / (hx * hx), op.yy / (hy * hy));
    let cxy = op.xy / (4.0 * hx * hy);
    let mut out = Vec::with_capacity(nodes.interior_count());
    for j in 1..grid.ny - 1 {
        for i in 1..grid.nx - 1 {
            let at = |di: isize, dj: isize| grid.index((i as isize + di) as usize, (j as isize + dj) as usize);
            let c = at(0, 0);
            let cross = [c, at(1, 0), at(0, 1), at(-1, 0), at(0, -1)];
            let mut op_members = cross.to_vec();
            let mut op_weights = vec![-2.0 * (cx + cy), cx, cy, cx, cy];
            if op.xy != 0.0 {
                op_members.extend([at(1, 1), at(-1, 1), at(-1, -1), at(1, -1)]);
                op_weights.extend([cxy, -cxy, cxy, -cxy]);
            }
            let (gx, gy) = (0.5 / hx, 0.5 / hy);
            out.push(NodeStencil {
                node: c,
                grad_members: cross.to_vec(),
                wx: vec![0.0, gx, 0.0, -gx, 0.0],
                wy: vec![0.0, 0.0, gy, 0.0, -gy],
                op_members,
                op_weights,
            });
        }
    }
    Ok(out)
}

/// Central-difference solution of a benchmark case on an `nx x ny` uniform grid.
pub fn cd2_solve(case: &BenchmarkCase, nx: usize, ny: usize, config: &StudyConfig) -> Result<CaseSolution> {
    let nodes = generate_uniform(nx, ny, case.domain())?;
    let config = StudyConfig { disc: crate::assembly::DiscretizationConfig::cd2(), ..config.clone() };
    solve_case_fields(case, &nodes, &config)
}

/// Pure second-order GFD solution of a benchmark case on 9-node stars.
pub fn gfd_solve(case: &BenchmarkCase, nodes: &NodeSet, config: &StudyConfig) -> Result<CaseSolution> {
    let config = StudyConfig { disc: crate::assembly::DiscretizationConfig::gfd(), ..config.clone() };
    solve_case_fields(case, nodes, &config)
}
