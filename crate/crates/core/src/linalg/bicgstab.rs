use super::sparse::CsrMatrix;
use super::{dot, norm2};
use crate::error::{Error, Result};

const BREAKDOWN: f64 = 1e-30;

/// Stopping and preconditioning controls for [`bicgstab`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BicgstabParams {
    /// Relative residual target `||b - Ax|| / ||b||`.
    pub rel_tol: f64,
    /// Iteration cap; `None` means `10 * n`.
    pub max_iter: Option<usize>,
    /// Left-multiply by the inverse diagonal. Off by default.
    pub jacobi: bool,
}

impl Default for BicgstabParams {
    fn default() -> Self {
        BicgstabParams { rel_tol: 1e-12, max_iter: None, jacobi: false }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BicgstabSolution {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Relative residual after each iteration, starting with the initial guess.
    pub residual_history: Vec<f64>,
    pub restarts: usize,
}

impl BicgstabSolution {
    pub fn relative_residual(&self) -> f64 {
        self.residual_history.last().copied().unwrap_or(0.0)
    }
}

enum Outcome {
    Converged,
    Breakdown,
    Exhausted,
}

/// Unpreconditioned (by default) Bi-CGSTAB of van der Vorst.
///
/// Dot products are sequential, so results are bitwise reproducible.
/// On a breakdown the recurrence restarts once from the current iterate.
pub fn bicgstab(a: &CsrMatrix, b: &[f64], x0: Option<&[f64]>, params: &BicgstabParams) -> Result<BicgstabSolution> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::invalid("Bi-CGSTAB needs a square matrix"));
    }
    if b.len() != n || x0.is_some_and(|x| x.len() != n) {
        return Err(Error::invalid("Bi-CGSTAB vector length mismatch"));
    }
    if !(params.rel_tol > 0.0) {
        return Err(Error::invalid("rel_tol must be positive"));
    }
    let max_iter = params.max_iter.unwrap_or(10 * n.max(1));
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        return Ok(BicgstabSolution { x: vec![0.0; n], iterations: 0, residual_history: vec![0.0], restarts: 0 });
    }

    let inv_diag: Option<Vec<f64>> = if params.jacobi {
        let d = a.diagonal();
        if let Some(column) = d.iter().position(|v| *v == 0.0) {
            return Err(Error::SingularMatrix { column });
        }
        Some(d.iter().map(|v| 1.0 / v).collect())
    } else {
        None
    };
    let precondition = |v: &[f64], out: &mut [f64]| match &inv_diag {
        Some(d) => out.iter_mut().zip(v).zip(d).for_each(|((o, vi), di)| *o = vi * di),
        None => out.copy_from_slice(v),
    };

    let mut state = Solver { x: x0.map_or_else(|| vec![0.0; n], <[f64]>::to_vec), history: Vec::new(), iterations: 0 };
    let mut r = residual(a, b, &state.x);
    state.history.push(norm2(&r) / bnorm);
    let tol = params.rel_tol;
    if state.history[0] <= tol {
        return Ok(state.finish(0));
    }

    let mut restarts = 0;
    loop {
        match state.run(a, &mut r, bnorm, tol, max_iter, &precondition) {
            Outcome::Converged => return Ok(state.finish(restarts)),
            Outcome::Breakdown if restarts == 0 => {
                restarts += 1;
                r = residual(a, b, &state.x);
            }
            Outcome::Breakdown | Outcome::Exhausted => {
                return Err(Error::NonConvergence {
                    iterations: state.iterations,
                    final_residual: *state.history.last().unwrap(),
                    history: state.history,
                })
            }
        }
    }
}

fn residual(a: &CsrMatrix, b: &[f64], x: &[f64]) -> Vec<f64> {
    let ax = a.matvec(x);
    b.iter().zip(ax).map(|(bi, vi)| bi - vi).collect()
}

struct Solver {
    x: Vec<f64>,
    history: Vec<f64>,
    iterations: usize,
}

impl Solver {
    fn finish(self, restarts: usize) -> BicgstabSolution {
        BicgstabSolution { x: self.x, iterations: self.iterations, residual_history: self.history, restarts }
    }

    fn run(
        &mut self,
        a: &CsrMatrix,
        r: &mut [f64],
        bnorm: f64,
        tol: f64,
        max_iter: usize,
        precondition: &dyn Fn(&[f64], &mut [f64]),
    ) -> Outcome {
        let n = r.len();
        let r_hat = r.to_vec();
        let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
        let mut p = vec![0.0; n];
        let mut v = vec![0.0; n];
        let mut y = vec![0.0; n];
        let mut z = vec![0.0; n];
        let mut s = vec![0.0; n];
        let mut t = vec![0.0; n];
        while self.iterations < max_iter {
            let rho_new = dot(&r_hat, r);
            if rho_new.abs() < BREAKDOWN {
                return Outcome::Breakdown;
            }
            let beta = (rho_new / rho) * (alpha / omega);
            for i in 0..n {
                p[i] = r[i] + beta * (p[i] - omega * v[i]);
            }
            precondition(&p, &mut y);
            a.matvec_into(&y, &mut v);
            let rv = dot(&r_hat, &v);
            if rv.abs() < BREAKDOWN {
                return Outcome::Breakdown;
            }
            alpha = rho_new / rv;
            for i in 0..n {
                s[i] = r[i] - alpha * v[i];
            }
            self.iterations += 1;
            let snorm = norm2(&s) / bnorm;
            if snorm <= tol {
                for (xi, yi) in self.x.iter_mut().zip(&y) {
                    *xi += alpha * yi;
                }
                r.copy_from_slice(&s);
                self.history.push(snorm);
                return Outcome::Converged;
            }
            precondition(&s, &mut z);
            a.matvec_into(&z, &mut t);
            let tt = dot(&t, &t);
            omega = if tt > 0.0 { dot(&t, &s) / tt } else { 0.0 };
            for i in 0..n {
                self.x[i] += alpha * y[i] + omega * z[i];
                r[i] = s[i] - omega * t[i];
            }
            let rel = norm2(r) / bnorm;
            self.history.push(rel);
            if rel <= tol {
                return Outcome::Converged;
            }
            if omega.abs() < BREAKDOWN {
                return Outcome::Breakdown;
            }
            rho = rho_new;
        }
        Outcome::Exhausted
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::{DMatrix, DVector};
    use rand::{Rng, SeedableRng};

    #[test]
    fn identity_converges_in_one_iteration() {
        let b = vec![1.0, -2.0, 0.5];
        let sol = bicgstab(&CsrMatrix::identity(3), &b, None, &BicgstabParams::default()).unwrap();
        assert_eq!(sol.iterations, 1);
        assert_eq!(sol.x, b);
    }

    #[test]
    fn two_by_two() {
        let a = CsrMatrix::from_rows(2, vec![vec![(0, 4.0), (1, 1.0)], vec![(0, 1.0), (1, 3.0)]]).unwrap();
        let sol = bicgstab(&a, &[1.0, 2.0], None, &BicgstabParams::default()).unwrap();
        assert_relative_eq!(sol.x[0], 1.0 / 11.0, max_relative = 1e-12);
        assert_relative_eq!(sol.x[1], 7.0 / 11.0, max_relative = 1e-12);
    }

    #[test]
    fn zero_rhs_short_circuits() {
        let a = CsrMatrix::from_rows(2, vec![vec![(0, 4.0), (1, 1.0)], vec![(0, 1.0), (1, 3.0)]]).unwrap();
        let sol = bicgstab(&a, &[0.0, 0.0], Some(&[5.0, 5.0]), &BicgstabParams::default()).unwrap();
        assert_eq!(sol.iterations, 0);
        assert_eq!(sol.x, vec![0.0, 0.0]);
    }

    #[test]
    fn exhaustion_reports_history() {
        // A rotation needs two iterations; allow one.
        let a = CsrMatrix::from_rows(3, vec![vec![(1, 1.0)], vec![(2, 1.0)], vec![(0, 1.0)]]).unwrap();
        let params = BicgstabParams { max_iter: Some(1), ..Default::default() };
        match bicgstab(&a, &[1.0, 2.0, 3.0], None, &params) {
            Err(Error::NonConvergence { history, .. }) => assert!(!history.is_empty()),
            Ok(sol) => assert!(sol.relative_residual() <= 1e-12),
            Err(e) => panic!("unexpected error {e}"),
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        let a = CsrMatrix::identity(2);
        assert!(bicgstab(&a, &[1.0], None, &BicgstabParams::default()).is_err());
        let p = BicgstabParams { rel_tol: 0.0, ..Default::default() };
        assert!(bicgstab(&a, &[1.0, 1.0], None, &p).is_err());
    }

    fn random_dominant(n: usize, rng: &mut impl Rng) -> (CsrMatrix, DMatrix<f64>) {
        let mut rows = Vec::with_capacity(n);
        let mut dense = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            let mut row = Vec::new();
            let mut off = 0.0;
            for _ in 0..rng.gen_range(0..6) {
                let j = rng.gen_range(0..n);
                if j != i {
                    let v: f64 = rng.gen_range(-1.0..1.0);
                    row.push((j, v));
                    off += v.abs();
                }
            }
            row.push((i, off + rng.gen_range(0.5..2.0)));
            for &(j, v) in &row {
                dense[(i, j)] += v;
            }
            rows.push(row);
        }
        (CsrMatrix::from_rows(n, rows).unwrap(), dense)
    }

    #[test]
    fn jacobi_hook_solves_scaled_system() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let (a, _) = random_dominant(60, &mut rng);
        let b: Vec<f64> = (0..60).map(|i| i as f64).collect();
        let p = BicgstabParams { jacobi: true, ..Default::default() };
        let sol = bicgstab(&a, &b, None, &p).unwrap();
        let r = residual(&a, &b, &sol.x);
        assert!(norm2(&r) <= 1e-11 * norm2(&b));
    }

    #[test]
    fn matches_dense_oracle_on_random_systems() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed);
        for _ in 0..100 {
            let n = rng.gen_range(1..=500);
            let (a, dense) = random_dominant(n, &mut rng);
            let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let sol = bicgstab(&a, &b, None, &BicgstabParams::default()).unwrap();
            assert!(sol.relative_residual() <= 1e-12);
            let oracle = dense.lu().solve(&DVector::from_vec(b)).unwrap();
            let diff: Vec<f64> = sol.x.iter().zip(oracle.iter()).map(|(p, q)| p - q).collect();
            assert!(norm2(&diff) <= 1e-8 * oracle.norm());
        }
    }
}
