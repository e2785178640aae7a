//! Linear algebra: small dense LU solves, CSR storage, Bi-CGSTAB and condition numbers.

mod bicgstab;
mod condition;
mod dense;
mod market;
mod sparse;

pub use bicgstab::{bicgstab, BicgstabParams, BicgstabSolution};
pub use condition::condition_number_2norm;
pub use dense::{dense_solve, DenseMatrix, LuFactors};
pub use market::{read_matrix_market, write_matrix_market};
pub use sparse::{CsrMatrix, TripletBuilder};

/// Sequential dot product; summation order is fixed so results are reproducible.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
