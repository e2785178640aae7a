//! Meshless solvers for second-order convection-diffusion problems on scattered 2-D nodes.
//!
//! The hybrid discretization approximates first-order (convective) terms with
//! generalized finite differences (weighted moving least squares over a star of
//! neighbours) and second-order (diffusive) terms with multiquadric RBF-FD
//! weights. Classical central differences (CD2) and a pure second-order GFD
//! discretization are included as baselines.
//!
//! Typical use:
//!
//! ```
//! use meshless::{cases::BenchmarkCase, nodes::{generate_uniform, Rect}, study::*};
//!
//! let case = BenchmarkCase::new(1).unwrap();
//! let nodes = generate_uniform(11, 11, case.domain()).unwrap();
//! let config = StudyConfig::hybrid(5, 5, 0.5);
//! let row = solve_case(&case, &nodes, &config).unwrap();
//! assert!(row.errors[0] < 1e-3);
//! # let _ = Rect::unit();
//! ```

// Negated float comparisons (`!(x > 0.0)`) are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod assembly;
pub mod baseline;
pub mod cases;
pub mod error;
pub mod gfd;
pub mod linalg;
pub mod metrics;
pub mod nodes;
pub mod problem;
pub mod rbf;
pub mod star;
pub mod study;

pub use assembly::{
    discretize, solve_coupled, solve_linear, solve_picard, Discretization, DiscretizationConfig, InitialGuess,
    LinearSystem, Method, PicardParams, SolutionField,
};
pub use error::{Error, Result};
pub use linalg::{bicgstab, condition_number_2norm, dense_solve, BicgstabParams, CsrMatrix};
pub use nodes::{
    generate, generate_chebyshev, generate_uniform, nodal_spacing, Distribution, Node, NodeKind, NodeSet, Rect,
};
pub use problem::{Coefficient, CoupledProblem, FrozenState, PointState, ProblemSpec};
pub use rbf::{OperatorSpec, PolyDegree};
pub use star::{select_star, Star, StarRule};
