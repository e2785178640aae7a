use nalgebra::DMatrix;

use super::sparse::CsrMatrix;

/// Spectral condition number `sigma_max / sigma_min` from a dense SVD.
/// Returns infinity when the matrix is numerically singular.
pub fn condition_number_2norm(m: &CsrMatrix) -> f64 {
    let (r, c) = (m.nrows(), m.ncols());
    if r == 0 || c == 0 {
        return f64::NAN;
    }
    let mut d = DMatrix::<f64>::zeros(r, c);
    for (i, j, v) in m.triplets() {
        d[(i, j)] = v;
    }
    condition_of_dense(d)
}

pub(crate) fn condition_of_dense(d: DMatrix<f64>) -> f64 {
    let sv = d.singular_values();
    let max = sv.iter().copied().fold(0.0, f64::max);
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if max == 0.0 || min < 1e-14 * max {
        f64::INFINITY
    } else {
        max / min
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn known_values() {
        assert_relative_eq!(condition_number_2norm(&CsrMatrix::identity(4)), 1.0, epsilon = 1e-14);
        let d = CsrMatrix::from_rows(2, vec![vec![(0, 4.0)], vec![(1, 2.0)]]).unwrap();
        assert_relative_eq!(condition_number_2norm(&d), 2.0, epsilon = 1e-14);
        let t = CsrMatrix::from_rows(
            3,
            vec![vec![(0, 2.0), (1, -1.0)], vec![(0, -1.0), (1, 2.0), (2, -1.0)], vec![(1, -1.0), (2, 2.0)]],
        )
        .unwrap();
        let s = 2f64.sqrt();
        assert_relative_eq!(condition_number_2norm(&t), (2.0 + s) / (2.0 - s), max_relative = 1e-12);
    }

    #[test]
    fn singular_is_infinite() {
        let m = CsrMatrix::from_rows(2, vec![vec![(0, 1.0), (1, 1.0)], vec![(0, 1.0), (1, 1.0)]]).unwrap();
        assert!(condition_number_2norm(&m).is_infinite());
    }

    #[test]
    fn permutation_invariant() {
        let a =
            CsrMatrix::from_rows(3, vec![vec![(0, 3.0), (1, 1.0)], vec![(1, 5.0)], vec![(0, 1.0), (2, 0.5)]]).unwrap();
        let p =
            CsrMatrix::from_rows(3, vec![vec![(0, 1.0), (2, 0.5)], vec![(0, 3.0), (1, 1.0)], vec![(1, 5.0)]]).unwrap();
        assert_relative_eq!(condition_number_2norm(&a), condition_number_2norm(&p), max_relative = 1e-12);
    }
}
