//! Generalized finite difference weights from weighted moving least squares.
//!
//! For a star with offsets `(h_i, k_i)` the truncated Taylor expansion gives
//! `A D = du`, where row `i` of `A` holds the monomial terms of offset `i`,
//! `D` the unknown derivatives at the center and `du_i = u_i - u_0`.
//! Minimizing `sum_i w_i^2 (A_i D - du_i)^2` yields `D = S^-1 A^T W^2 du`
//! with `S = A^T W^2 A`. The center weight of each row is minus the sum of
//! the neighbour weights.

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::star::Star;

/// Largest tolerated 1-norm condition number of the (normalized) normal matrix.
pub const MAX_NORMAL_CONDITION: f64 = 1e12;

/// Inverse-square distance weight.
pub fn mls_weight(distance: f64) -> Result<f64> {
    if !(distance > 0.0) || !distance.is_finite() {
        return Err(Error::invalid(format!("MLS weight needs a positive distance, got {distance}")));
    }
    Ok(1.0 / (distance * distance))
}

fn default_weight(d: f64) -> f64 {
    1.0 / (d * d)
}

/// First-derivative weights over a star, center first.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientStencil {
    pub star: Star,
    pub wx: Vec<f64>,
    pub wy: Vec<f64>,
}

impl GradientStencil {
    /// Applies the weights to values listed in star order (center first).
    pub fn apply_local(&self, values: &[f64]) -> [f64; 2] {
        [dot(&self.wx, values), dot(&self.wy, values)]
    }

    /// Applies the weights to a field indexed by global node id.
    pub fn apply(&self, field: &[f64]) -> [f64; 2] {
        let v: Vec<f64> = self.star.members().map(|j| field[j]).collect();
        self.apply_local(&v)
    }
}

/// Rows of [`FullGfdStencil::weights`].
pub const DX: usize = 0;
pub const DY: usize = 1;
pub const DXX: usize = 2;
pub const DYY: usize = 3;
pub const DXY: usize = 4;

/// Second-order GFD weights for `(d/dx, d/dy, d2/dx2, d2/dy2, d2/dxdy)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FullGfdStencil {
    pub star: Star,
    pub weights: [Vec<f64>; 5],
}

impl FullGfdStencil {
    pub fn apply_local(&self, row: usize, values: &[f64]) -> f64 {
        dot(&self.weights[row], values)
    }

    pub fn apply(&self, row: usize, field: &[f64]) -> f64 {
        let v: Vec<f64> = self.star.members().map(|j| field[j]).collect();
        self.apply_local(row, &v)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Gradient weights with the default `1/d^2` kernel.
pub fn gfd_gradient_weights(star: &Star) -> Result<GradientStencil> {
    gfd_gradient_weights_with(star, &default_weight)
}

/// Gradient weights with a caller-supplied distance kernel.
pub fn gfd_gradient_weights_with(star: &Star, weight: &dyn Fn(f64) -> f64) -> Result<GradientStencil> {
    let [wx, wy] = <[Vec<f64>; 2]>::try_from(solve_mls(star, 2, weight)?).expect("two rows");
    Ok(GradientStencil { star: star.clone(), wx, wy })
}

/// Full second-order weights with the default kernel. Needs at least six star nodes.
pub fn gfd_full_weights(star: &Star) -> Result<FullGfdStencil> {
    gfd_full_weights_with(star, &default_weight)
}

pub fn gfd_full_weights_with(star: &Star, weight: &dyn Fn(f64) -> f64) -> Result<FullGfdStencil> {
    if star.size() < 6 {
        return Err(Error::invalid(format!("full GFD stencil needs at least 6 nodes, star has {}", star.size())));
    }
    let weights = <[Vec<f64>; 5]>::try_from(solve_mls(star, 5, weight)?).expect("five rows");
    Ok(FullGfdStencil { star: star.clone(), weights })
}

/// Monomial row for an offset already divided by the star radius.
fn taylor_row(h: f64, k: f64, unknowns: usize) -> [f64; 5] {
    let row = [h, k, 0.5 * h * h, 0.5 * k * k, h * k];
    if unknowns == 2 {
        [h, k, 0.0, 0.0, 0.0]
    } else {
        row
    }
}

/// Solves the weighted normal equations on radius-normalized offsets and
/// returns one weight row (center first) per unknown derivative.
fn solve_mls(star: &Star, unknowns: usize, weight: &dyn Fn(f64) -> f64) -> Result<Vec<Vec<f64>>> {
    let center = star.center();
    let rho = star.radius();
    let offsets = star.offsets();
    let m = offsets.len();

    let mut rows = Vec::with_capacity(m);
    let mut w2 = Vec::with_capacity(m);
    for o in offsets {
        let d = o[0].hypot(o[1]);
        let w = weight(d);
        if !(w.is_finite() && w > 0.0) {
            return Err(Error::invalid(format!("weight kernel gave {w} at distance {d} (star {center})")));
        }
        rows.push(taylor_row(o[0] / rho, o[1] / rho, unknowns));
        w2.push(w * w);
    }

    // Scale W^2 so its largest entry is one; B is invariant under this.
    let wmax = w2.iter().copied().fold(0.0, f64::max);
    w2.iter_mut().for_each(|w| *w /= wmax);

    let mut s = DenseMatrix::zeros(unknowns, unknowns);
    for (row, &w) in rows.iter().zip(&w2) {
        for a in 0..unknowns {
            for b in 0..unknowns {
                s[(a, b)] += w * row[a] * row[b];
            }
        }
    }
    let lu = match s.lu() {
        Ok(lu) => lu,
        Err(_) => return Err(Error::IllConditionedStar { center, condition: f64::INFINITY }),
    };
    let condition = lu.condition_1norm();
    if !(condition <= MAX_NORMAL_CONDITION) {
        return Err(Error::IllConditionedStar { center, condition });
    }

    // Column i of S^-1 A^T W^2 is S^-1 (w_i^2 A_i^T).
    let mut out = vec![vec![0.0; m + 1]; unknowns];
    for (i, (row, &w)) in rows.iter().zip(&w2).enumerate() {
        let rhs: Vec<f64> = row[..unknowns].iter().map(|v| v * w).collect();
        let col = lu.solve(&rhs);
        for (r, value) in col.into_iter().enumerate() {
            out[r][i + 1] = value;
        }
    }
    for (r, weights) in out.iter_mut().enumerate() {
        let order = if r < 2 { 1 } else { 2 };
        let scale = rho.powi(order);
        for v in weights[1..].iter_mut() {
            *v /= scale;
        }
        weights[0] = -weights[1..].iter().sum::<f64>();
    }
    Ok(out)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::DMatrix;
    use proptest::prelude::*;

    fn cross(h: f64) -> Star {
        Star::from_offsets(vec![[h, 0.0], [0.0, h], [-h, 0.0], [0.0, -h]]).unwrap()
    }

    fn ring(h: f64) -> Star {
        Star::from_offsets(vec![[h, 0.0], [h, h], [0.0, h], [-h, h], [-h, 0.0], [-h, -h], [0.0, -h], [h, -h]]).unwrap()
    }

    fn samples(star: &Star, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        star.local_points().iter().map(|p| f(p[0], p[1])).collect()
    }

    /// Independent route: D = pinv(W A) W du via SVD, in unscaled coordinates.
    fn pinv_oracle(star: &Star, unknowns: usize) -> Vec<Vec<f64>> {
        let offs = star.offsets();
        let m = offs.len();
        let mut wa = DMatrix::<f64>::zeros(m, unknowns);
        let mut w = DMatrix::<f64>::zeros(m, m);
        for (i, o) in offs.iter().enumerate() {
            let (h, k) = (o[0], o[1]);
            let full = [h, k, h * h / 2.0, k * k / 2.0, h * k];
            let wi = 1.0 / (h * h + k * k);
            for c in 0..unknowns {
                wa[(i, c)] = wi * full[c];
            }
            w[(i, i)] = wi;
        }
        let b = wa.pseudo_inverse(1e-300).unwrap() * w;
        (0..unknowns)
            .map(|r| {
                let nb: Vec<f64> = (0..m).map(|i| b[(r, i)]).collect();
                std::iter::once(-nb.iter().sum::<f64>()).chain(nb).collect()
            })
            .collect()
    }

    #[test]
    fn weight_kernel() {
        assert_eq!(mls_weight(1.0).unwrap(), 1.0);
        assert_eq!(mls_weight(0.5).unwrap(), 4.0);
        assert_relative_eq!(mls_weight(0.1).unwrap(), 100.0, max_relative = 1e-14);
        assert!(mls_weight(0.0).is_err());
        assert!(mls_weight(-1.0).is_err());
    }

    #[test]
    fn cross_gives_central_differences() {
        let h = 0.1;
        let g = gfd_gradient_weights(&cross(h)).unwrap();
        let want_x = [0.0, 1.0 / (2.0 * h), 0.0, -1.0 / (2.0 * h), 0.0];
        let want_y = [0.0, 0.0, 1.0 / (2.0 * h), 0.0, -1.0 / (2.0 * h)];
        for i in 0..5 {
            assert!((g.wx[i] - want_x[i]).abs() < 1e-12 / h);
            assert!((g.wy[i] - want_y[i]).abs() < 1e-12 / h);
        }
    }

    #[test]
    fn ring_full_stencil() {
        let h = 0.05;
        let s = gfd_full_weights(&ring(h)).unwrap();
        let x2 = samples(&s.star, |x, _| x * x);
        assert_relative_eq!(s.apply_local(DXX, &x2), 2.0, max_relative = 1e-12);
        let ones = vec![1.0; 9];
        for r in 0..5 {
            assert!(s.apply_local(r, &ones).abs() < 1e-9);
        }
        // order: center, E, NE, N, NW, W, SW, S, SE
        // The x-derivative decouples by symmetry into D = sum w^2 h_i du_i / sum w^2 h_i^2
        // with w^2 = 1/h^4 on the axes and 1/(4h^4) on the diagonals: E/W get 1/(3h),
        // the four corners 1/(12h).
        for (i, w) in s.weights[DX].iter().enumerate() {
            let want = match i {
                1 => 1.0 / (3.0 * h),
                2 | 8 => 1.0 / (12.0 * h),
                4 | 6 => -1.0 / (12.0 * h),
                5 => -1.0 / (3.0 * h),
                _ => 0.0,
            };
            assert!((w - want).abs() < 1e-10 / h, "node {i}: {w} vs {want}");
        }
    }

    #[test]
    fn full_stencil_needs_six_nodes() {
        assert!(matches!(gfd_full_weights(&cross(1.0)), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn degenerate_normal_matrix_is_rejected() {
        // Six nodes on two lines through the center cannot resolve the cross term.
        let star =
            Star::from_offsets(vec![[1.0, 0.0], [2.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, 2.0], [0.0, -1.0]]).unwrap();
        assert!(matches!(gfd_full_weights(&star), Err(Error::IllConditionedStar { .. })));
    }

    #[test]
    fn custom_kernel_hook() {
        let star = cross(0.2);
        let uniform = gfd_gradient_weights_with(&star, &|_| 1.0).unwrap();
        let f = samples(&star, |x, y| 3.0 - x + 4.0 * y);
        let g = uniform.apply_local(&f);
        assert_relative_eq!(g[0], -1.0, max_relative = 1e-12);
        assert_relative_eq!(g[1], 4.0, max_relative = 1e-12);
        assert!(gfd_gradient_weights_with(&star, &|_| f64::NAN).is_err());
    }

    prop_compose! {
        /// `per` points in each quadrant at radii in [0.3, 1] times `scale`, with
        /// angles drawn from disjoint sub-ranges so no two points coincide.
        fn quadrant_star(per: usize)(
            scale in 1e-3f64..10.0,
            raw in proptest::collection::vec((0.3f64..1.0, 0.0f64..1.0), 4 * per),
        ) -> Star {
            Star::from_offsets(spread_offsets(&raw, per, scale)).unwrap()
        }
    }

    pub(crate) fn spread_offsets(raw: &[(f64, f64)], per: usize, scale: f64) -> Vec<[f64; 2]> {
        let width = (std::f64::consts::FRAC_PI_2 - 0.2) / per as f64;
        raw.iter()
            .enumerate()
            .map(|(i, (r, t))| {
                let (quadrant, slot) = (i % 4, i / 4);
                let angle = 0.1 + quadrant as f64 * std::f64::consts::FRAC_PI_2 + width * (slot as f64 + 0.1 + 0.8 * t);
                [scale * r * angle.cos(), scale * r * angle.sin()]
            })
            .collect()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn gradient_affine_exactness(star in quadrant_star(1), a in -5.0f64..5.0, b in -5.0f64..5.0, c in -5.0f64..5.0) {
            let g = gfd_gradient_weights(&star).unwrap();
            let vals = samples(&star, |x, y| a + b * x + c * y);
            let d = g.apply_local(&vals);
            let scale = b.abs().max(c.abs()).max(1.0);
            prop_assert!((d[0] - b).abs() <= 1e-10 * scale);
            prop_assert!((d[1] - c).abs() <= 1e-10 * scale);
        }

        #[test]
        fn zero_row_sums(star in quadrant_star(2)) {
            let g = gfd_gradient_weights(&star).unwrap();
            let f = gfd_full_weights(&star).unwrap();
            for row in [&g.wx, &g.wy].into_iter().chain(f.weights.iter()) {
                let max = row.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                prop_assert!(row.iter().sum::<f64>().abs() <= 1e-12 * max);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]

        #[test]
        fn full_quadratic_exactness(star in quadrant_star(2), c in proptest::array::uniform6(-3.0f64..3.0)) {
            let s = gfd_full_weights(&star).unwrap();
            let f = |x: f64, y: f64| c[0] + c[1] * x + c[2] * y + c[3] * x * x + c[4] * y * y + c[5] * x * y;
            let vals = samples(&star, f);
            let want = [c[1], c[2], 2.0 * c[3], 2.0 * c[4], c[5]];
            for (row, w) in want.iter().enumerate() {
                // Relative to the magnitude of the summed terms, which bounds the rounding error.
                let terms: f64 = s.weights[row].iter().zip(&vals).map(|(a, b)| (a * b).abs()).sum();
                prop_assert!((s.apply_local(row, &vals) - w).abs() <= 1e-8 * terms.max(w.abs()), "row {row}");
            }
        }

        #[test]
        fn scale_covariance(star in quadrant_star(2), s in 0.01f64..100.0) {
            let g0 = gfd_gradient_weights(&star).unwrap();
            let g1 = gfd_gradient_weights(&star.scaled(s)).unwrap();
            let f0 = gfd_full_weights(&star).unwrap();
            let f1 = gfd_full_weights(&star.scaled(s)).unwrap();
            let check = |a: &[f64], b: &[f64], p: i32| {
                let max = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                a.iter().zip(b).all(|(x, y)| (x / s.powi(p) - y).abs() <= 1e-10 * max / s.powi(p))
            };
            prop_assert!(check(&g0.wx, &g1.wx, 1) && check(&g0.wy, &g1.wy, 1));
            for r in 0..5 {
                let order = if r < 2 { 1 } else { 2 };
                prop_assert!(check(&f0.weights[r], &f1.weights[r], order), "row {}", r);
            }
        }

        #[test]
        fn matches_pseudo_inverse_oracle(star in quadrant_star(2)) {
            let g = gfd_gradient_weights(&star).unwrap();
            let f = gfd_full_weights(&star).unwrap();
            let og = pinv_oracle(&star, 2);
            let of = pinv_oracle(&star, 5);
            let close = |a: &[f64], b: &[f64]| {
                let max = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-10 * max)
            };
            prop_assert!(close(&g.wx, &og[0]) && close(&g.wy, &og[1]));
            for (r, (w, o)) in f.weights.iter().zip(&of).enumerate() {
                prop_assert!(close(w, o), "row {r}");
            }
        }
    }
}
