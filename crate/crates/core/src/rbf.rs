//! Multiquadric RBF-FD weights for second-order operators with polynomial augmentation.
//!
//! The weights `c` of a star solve the saddle system
//! `[[Phi, P], [P^T, 0]] [c; mu] = [L phi(x0 - x_j); L p_k(x0)]`.
//! Monomials are taken in coordinates relative to the star center.
//!
//! [`rbf_operator_weights`] solves an equivalent, much better conditioned form:
//! the star is rescaled to unit radius (the multiquadric depends on `eps * r`
//! only) and, since constants are always augmented and hence `sum c = 0`, the
//! kernel `phi` is replaced by `(phi - 1) / eps^2 = r^2 / (1 + phi)`. This keeps
//! the system regular in the flat limit `eps -> 0`, where the textbook matrix
//! becomes singular. [`build_saddle_system`] and [`lagrange_cardinal`] use the
//! textbook matrix.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::star::Star;

/// Largest tolerated 1-norm condition number of the saddle matrix.
pub const MAX_SADDLE_CONDITION: f64 = 1e12;
/// Largest supported `N + M`.
pub const MAX_SADDLE_SIZE: usize = 50;

/// Constant coefficients of `xx * d2/dx2 + yy * d2/dy2 + xy * d2/dxdy`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatorSpec {
    pub xx: f64,
    pub yy: f64,
    pub xy: f64,
}

impl OperatorSpec {
    pub fn new(xx: f64, yy: f64, xy: f64) -> Result<Self> {
        if ![xx, yy, xy].iter().all(|v| v.is_finite()) {
            return Err(Error::invalid("operator coefficients must be finite"));
        }
        if xx == 0.0 && yy == 0.0 && xy == 0.0 {
            return Err(Error::invalid("operator needs at least one nonzero coefficient"));
        }
        Ok(OperatorSpec { xx, yy, xy })
    }

    pub fn laplacian() -> Self {
        OperatorSpec { xx: 1.0, yy: 1.0, xy: 0.0 }
    }

    /// Applies the operator to the monomial list `{1, x, y, x^2, xy, y^2}` at the origin.
    fn on_monomials(&self) -> [f64; 6] {
        [0.0, 0.0, 0.0, 2.0 * self.xx, self.xy, 2.0 * self.yy]
    }
}

/// Total degree of the augmenting polynomial space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum PolyDegree {
    #[serde(rename = "0")]
    Zero,
    #[default]
    #[serde(rename = "1")]
    One,
    #[serde(rename = "2")]
    Two,
}

impl PolyDegree {
    pub fn from_degree(d: u32) -> Result<Self> {
        match d {
            0 => Ok(PolyDegree::Zero),
            1 => Ok(PolyDegree::One),
            2 => Ok(PolyDegree::Two),
            _ => Err(Error::invalid(format!("polynomial degree must be 0, 1 or 2, got {d}"))),
        }
    }

    pub fn degree(self) -> u32 {
        self as u32
    }

    /// Number of monomials `M = (d + 1)(d + 2) / 2`.
    pub fn monomial_count(self) -> usize {
        let d = self.degree() as usize;
        (d + 1) * (d + 2) / 2
    }
}

impl fmt::Display for PolyDegree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.degree())
    }
}

impl FromStr for PolyDegree {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let d: u32 = s.trim().parse().map_err(|_| Error::invalid(format!("bad polynomial degree {s:?}")))?;
        Self::from_degree(d)
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("shape parameter must be positive, got {epsilon}")))
    }
}

/// `sqrt(1 + eps^2 r^2)`.
pub fn multiquadric(r: f64, epsilon: f64) -> Result<f64> {
    check_epsilon(epsilon)?;
    if !(r >= 0.0) {
        return Err(Error::invalid(format!("radius must be non-negative, got {r}")));
    }
    Ok(phi(r * r, epsilon))
}

#[inline]
fn phi(r2: f64, eps: f64) -> f64 {
    (1.0 + eps * eps * r2).sqrt()
}

/// `(phi - 1) / eps^2`, evaluated without cancellation.
#[inline]
fn phi_shifted(r2: f64, eps: f64) -> f64 {
    r2 / (1.0 + phi(r2, eps))
}

/// `L phi / eps^2` at displacement `d = x0 - xi`.
fn operator_over_eps2(op: &OperatorSpec, d: [f64; 2], eps: f64) -> f64 {
    let r2 = d[0] * d[0] + d[1] * d[1];
    let p = phi(r2, eps);
    let e2 = eps * eps;
    let p3 = p * p * p;
    op.xx * (1.0 / p - e2 * d[0] * d[0] / p3) + op.yy * (1.0 / p - e2 * d[1] * d[1] / p3)
        - op.xy * e2 * d[0] * d[1] / p3
}

/// Applies `op` to `x -> phi(|x - xi|)` and evaluates at `x0`.
pub fn multiquadric_operator(op: &OperatorSpec, x0: [f64; 2], xi: [f64; 2], epsilon: f64) -> Result<f64> {
    check_epsilon(epsilon)?;
    Ok(epsilon * epsilon * operator_over_eps2(op, [x0[0] - xi[0], x0[1] - xi[1]], epsilon))
}

fn monomials(p: [f64; 2], m: usize) -> [f64; 6] {
    let (x, y) = (p[0], p[1]);
    let all = [1.0, x, y, x * x, x * y, y * y];
    let mut out = [0.0; 6];
    out[..m].copy_from_slice(&all[..m]);
    out
}

/// Textbook saddle matrix over points given relative to the star center (center first).
pub fn build_saddle_system_points(points: &[[f64; 2]], epsilon: f64, degree: PolyDegree) -> Result<DenseMatrix> {
    check_epsilon(epsilon)?;
    let n = points.len();
    let m = degree.monomial_count();
    if n == 0 {
        return Err(Error::invalid("saddle system needs at least one node"));
    }
    if n + m > MAX_SADDLE_SIZE {
        return Err(Error::invalid(format!("saddle system of size {} exceeds {MAX_SADDLE_SIZE}", n + m)));
    }
    let mut q = DenseMatrix::zeros(n + m, n + m);
    for i in 0..n {
        for j in 0..=i {
            let dx = points[i][0] - points[j][0];
            let dy = points[i][1] - points[j][1];
            let v = phi(dx * dx + dy * dy, epsilon);
            q[(i, j)] = v;
            q[(j, i)] = v;
        }
        let mono = monomials(points[i], m);
        for k in 0..m {
            q[(i, n + k)] = mono[k];
            q[(n + k, i)] = mono[k];
        }
    }
    Ok(q)
}

/// Textbook saddle matrix `[[Phi, P], [P^T, 0]]` for a star.
pub fn build_saddle_system(star: &Star, epsilon: f64, degree: PolyDegree) -> Result<DenseMatrix> {
    build_saddle_system_points(&star.local_points(), epsilon, degree)
}

/// Right-hand side `[L phi(x0 - x_j); L p_k(x0)]` of the weight system.
pub fn operator_rhs(points: &[[f64; 2]], op: &OperatorSpec, epsilon: f64, degree: PolyDegree) -> Result<Vec<f64>> {
    check_epsilon(epsilon)?;
    let m = degree.monomial_count();
    let mut rhs: Vec<f64> =
        points.iter().map(|p| epsilon * epsilon * operator_over_eps2(op, [-p[0], -p[1]], epsilon)).collect();
    rhs.extend_from_slice(&op.on_monomials()[..m]);
    Ok(rhs)
}

/// Second-order operator weights over a star, center first.
#[derive(Debug, Clone, PartialEq)]
pub struct RbfStencil {
    pub star: Star,
    pub c: Vec<f64>,
    /// Lagrange multipliers of the polynomial constraints, in the textbook scaling.
    pub multipliers: Vec<f64>,
    pub epsilon: f64,
    pub poly_degree: PolyDegree,
    /// 1-norm condition number of the system that was actually solved.
    pub condition: f64,
}

impl RbfStencil {
    pub fn apply_local(&self, values: &[f64]) -> f64 {
        self.c.iter().zip(values).map(|(a, b)| a * b).sum()
    }

    pub fn apply(&self, field: &[f64]) -> f64 {
        self.star.members().zip(&self.c).map(|(j, w)| w * field[j]).sum()
    }
}

/// Solves for the operator weights of a star.
pub fn rbf_operator_weights(star: &Star, op: &OperatorSpec, epsilon: f64, degree: PolyDegree) -> Result<RbfStencil> {
    let (c, multipliers, condition) = solve_weights(&star.local_points(), op, epsilon, degree, star.center())?;
    Ok(RbfStencil { star: star.clone(), c, multipliers, epsilon, poly_degree: degree, condition })
}

fn solve_weights(
    points: &[[f64; 2]],
    op: &OperatorSpec,
    epsilon: f64,
    degree: PolyDegree,
    center: usize,
) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    check_epsilon(epsilon)?;
    let n = points.len();
    let m = degree.monomial_count();
    if n + m > MAX_SADDLE_SIZE {
        return Err(Error::invalid(format!("saddle system of size {} exceeds {MAX_SADDLE_SIZE}", n + m)));
    }
    let rho = points.iter().map(|p| p[0].hypot(p[1])).fold(0.0, f64::max);
    let rho = if rho > 0.0 { rho } else { 1.0 };
    let unit: Vec<[f64; 2]> = points.iter().map(|p| [p[0] / rho, p[1] / rho]).collect();
    let e = epsilon * rho;

    let mut q = DenseMatrix::zeros(n + m, n + m);
    for i in 0..n {
        for j in 0..=i {
            let dx = unit[i][0] - unit[j][0];
            let dy = unit[i][1] - unit[j][1];
            let v = phi_shifted(dx * dx + dy * dy, e);
            q[(i, j)] = v;
            q[(j, i)] = v;
        }
        let mono = monomials(unit[i], m);
        for k in 0..m {
            q[(i, n + k)] = mono[k];
            q[(n + k, i)] = mono[k];
        }
    }
    let mut rhs: Vec<f64> = unit.iter().map(|p| operator_over_eps2(op, [-p[0], -p[1]], e)).collect();
    rhs.extend_from_slice(&op.on_monomials()[..m]);

    let lu = q.lu().map_err(|_| Error::SingularSaddle { center, condition: f64::INFINITY })?;
    let condition = lu.condition_1norm();
    if !(condition <= MAX_SADDLE_CONDITION) {
        return Err(Error::SingularSaddle { center, condition });
    }
    let sol = lu.solve(&rhs);
    let scale = 1.0 / (rho * rho);
    let c = sol[..n].iter().map(|v| v * scale).collect();
    let mu = sol[n..]
        .iter()
        .enumerate()
        .map(|(k, v)| {
            let d = match k {
                0 => 0,
                1 | 2 => 1,
                _ => 2,
            };
            epsilon * epsilon * v / rho.powi(d)
        })
        .collect();
    Ok((c, mu, condition))
}

/// Interpolation basis row `[phi(|x - x_j|); p_k(x)]` at a point relative to the center.
fn basis_row(points: &[[f64; 2]], x: [f64; 2], epsilon: f64, m: usize) -> Vec<f64> {
    let mut row: Vec<f64> = points
        .iter()
        .map(|p| {
            let dx = x[0] - p[0];
            let dy = x[1] - p[1];
            phi(dx * dx + dy * dy, epsilon)
        })
        .collect();
    row.extend_from_slice(&monomials(x, m)[..m]);
    row
}

fn factor_textbook(star: &Star, epsilon: f64, degree: PolyDegree) -> Result<crate::linalg::LuFactors> {
    let q = build_saddle_system(star, epsilon, degree)?;
    let center = star.center();
    let lu = q.lu().map_err(|_| Error::SingularSaddle { center, condition: f64::INFINITY })?;
    let condition = lu.condition_1norm();
    if !(condition <= MAX_SADDLE_CONDITION) {
        return Err(Error::SingularSaddle { center, condition });
    }
    Ok(lu)
}

/// Cardinal function `psi_i` of the augmented interpolant, evaluated at `x`
/// (coordinates relative to the star center). `i` indexes star nodes, center first.
pub fn lagrange_cardinal(star: &Star, epsilon: f64, degree: PolyDegree, i: usize, x: [f64; 2]) -> Result<f64> {
    let n = star.size();
    if i >= n {
        return Err(Error::invalid(format!("cardinal index {i} out of range for a star of {n} nodes")));
    }
    let lu = factor_textbook(star, epsilon, degree)?;
    let mut e = vec![0.0; lu.dim()];
    e[i] = 1.0;
    let y = lu.solve_transpose(&e);
    let b = basis_row(&star.local_points(), x, epsilon, degree.monomial_count());
    Ok(y.iter().zip(&b).map(|(p, q)| p * q).sum())
}

/// Operator weights obtained by applying `op` to each cardinal function at the center.
/// Algebraically equal to [`rbf_operator_weights`]; computed on the textbook matrix.
pub fn cardinal_operator_weights(star: &Star, op: &OperatorSpec, epsilon: f64, degree: PolyDegree) -> Result<Vec<f64>> {
    let lu = factor_textbook(star, epsilon, degree)?;
    let lb = operator_rhs(&star.local_points(), op, epsilon, degree)?;
    let mut e = vec![0.0; lu.dim()];
    Ok((0..star.size())
        .map(|i| {
            e.fill(0.0);
            e[i] = 1.0;
            let y = lu.solve_transpose(&e);
            y.iter().zip(&lb).map(|(p, q)| p * q).sum()
        })
        .collect())
}
