//! The three benchmark problems with closed-form solutions.
//!
//! 1. `-2 u_x + 2 u_y - Lap u = 0` on the unit square,
//!    `U = (e^{2(1-x)} + e^{2y} - 2) / (e - 1)`.
//! 2. `u_x^2 + u_y^2 + u Lap u = 2 u^4` on the unit square, `U = 1 / sqrt((x+1)^2 + (y+1)^2)`.
//! 3. `u u_x + v u_y - Lap u = f1`, `u v_x + v v_y - Lap v = f2` on `[0, pi]^2`,
//!    `U = -cos x sin y`, `V = sin x cos y`.

use std::f64::consts::{E, PI};

use crate::error::{Error, Result};
use crate::nodes::{Distribution, Rect};
use crate::problem::{Coefficient, CoupledProblem, ProblemSpec};
use crate::rbf::OperatorSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BenchmarkCase {
    id: u8,
}

/// The PDE of a case, ready to discretize.
#[derive(Debug, Clone)]
pub enum CaseProblem {
    Scalar(ProblemSpec),
    Coupled(CoupledProblem),
}

pub fn exact1(x: f64, y: f64) -> f64 {
    ((2.0 * (1.0 - x)).exp() + (2.0 * y).exp() - 2.0) / (E - 1.0)
}

pub fn exact2(x: f64, y: f64) -> f64 {
    1.0 / ((x + 1.0).powi(2) + (y + 1.0).powi(2)).sqrt()
}

pub fn exact3(x: f64, y: f64) -> [f64; 2] {
    [-x.cos() * y.sin(), x.sin() * y.cos()]
}

/// Sources of case 3: `U U_x + V U_y - Lap U` and `U V_x + V V_y - Lap V`.
pub fn source3(x: f64, y: f64) -> [f64; 2] {
    let (sx, cx, sy, cy) = (x.sin(), x.cos(), y.sin(), y.cos());
    [-sx * cx - 2.0 * cx * sy, -sy * cy + 2.0 * sx * cy]
}

impl BenchmarkCase {
    pub fn new(id: u8) -> Result<Self> {
        match id {
            1..=3 => Ok(BenchmarkCase { id }),
            _ => Err(Error::invalid(format!("benchmark case must be 1, 2 or 3, got {id}"))),
        }
    }

    pub fn all() -> [BenchmarkCase; 3] {
        [BenchmarkCase { id: 1 }, BenchmarkCase { id: 2 }, BenchmarkCase { id: 3 }]
    }

    pub fn id(&self) -> u8 {
        self.id
    }

    pub fn domain(&self) -> Rect {
        match self.id {
            3 => Rect::square(PI),
            _ => Rect::unit(),
        }
    }

    /// Number of unknown fields (2 for the coupled case).
    pub fn field_count(&self) -> usize {
        if self.id == 3 {
            2
        } else {
            1
        }
    }

    pub fn is_nonlinear(&self) -> bool {
        self.id != 1
    }

    /// Exact field values; entries past [`field_count`](Self::field_count) are zero.
    pub fn exact(&self, x: f64, y: f64) -> [f64; 2] {
        match self.id {
            1 => [exact1(x, y), 0.0],
            2 => [exact2(x, y), 0.0],
            _ => exact3(x, y),
        }
    }

    pub fn source(&self, x: f64, y: f64) -> [f64; 2] {
        match self.id {
            3 => source3(x, y),
            _ => [0.0, 0.0],
        }
    }

    /// Shape parameters used for the published tables.
    pub fn default_epsilon(&self, distribution: Distribution) -> f64 {
        let chebyshev = distribution == Distribution::Chebyshev;
        match (self.id, chebyshev) {
            (1, false) => 0.5,
            (1, true) => 0.9,
            (2, false) => 0.6,
            (2, true) => 0.5,
            _ => 0.3,
        }
    }

    pub fn problem(&self) -> CaseProblem {
        let lap = OperatorSpec::laplacian();
        match self.id {
            1 => CaseProblem::Scalar(
                ProblemSpec::new(lap).with_convection(-2.0, 2.0).with_diffusion_multiplier(-1.0).with_dirichlet(exact1),
            ),
            2 => CaseProblem::Scalar(
                ProblemSpec::new(lap)
                    .with_convection(Coefficient::state(|s| s.grad(0)[0]), Coefficient::state(|s| s.grad(0)[1]))
                    .with_diffusion_multiplier(Coefficient::state(|s| s.value(0)))
                    .with_reaction(Coefficient::state(|s| -2.0 * s.value(0).powi(3)))
                    .with_dirichlet(exact2),
            ),
            _ => {
                let field = |k: usize| {
                    ProblemSpec::new(lap)
                        .with_convection(Coefficient::state(|s| s.value(0)), Coefficient::state(|s| s.value(1)))
                        .with_diffusion_multiplier(-1.0)
                        .with_source(Coefficient::spatial(move |x, y| source3(x, y)[k]))
                        .with_dirichlet(move |x, y| exact3(x, y)[k])
                };
                CaseProblem::Coupled(CoupledProblem::new(field(0), field(1)))
            }
        }
    }
}
