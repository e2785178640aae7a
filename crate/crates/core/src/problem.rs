//! Problem definitions: `b . grad u + a L u + r u = f` in the interior, `u = g` on the boundary.
//!
//! `L` is a constant-coefficient second-order operator; `b`, `a`, `r` and `f`
//! may depend on position and, for nonlinear problems, on a frozen state.

use std::fmt;
use std::sync::Arc;

use crate::rbf::OperatorSpec;

/// Value and gradient of one field at one node.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FieldSample {
    pub value: f64,
    pub grad: [f64; 2],
}

/// Linearization state: `samples[field][node]`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FrozenState {
    samples: Vec<Vec<FieldSample>>,
}

impl FrozenState {
    pub fn new(samples: Vec<Vec<FieldSample>>) -> Self {
        FrozenState { samples }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn field_count(&self) -> usize {
        self.samples.len()
    }

    pub fn sample(&self, field: usize, node: usize) -> FieldSample {
        self.samples[field][node]
    }
}

/// Everything a coefficient may look at when evaluated at a node.
#[derive(Debug, Clone, Copy)]
pub struct PointState<'a> {
    pub x: f64,
    pub y: f64,
    pub node: usize,
    pub frozen: &'a FrozenState,
}

impl PointState<'_> {
    /// Frozen value of `field` at this node.
    ///
    /// # Panics
    /// If the frozen state has no such field.
    pub fn value(&self, field: usize) -> f64 {
        self.frozen.sample(field, self.node).value
    }

    pub fn grad(&self, field: usize) -> [f64; 2] {
        self.frozen.sample(field, self.node).grad
    }
}

pub type SpatialFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
pub type StateFn = Arc<dyn Fn(&PointState) -> f64 + Send + Sync>;

/// A scalar coefficient field.
#[derive(Clone)]
pub enum Coefficient {
    Constant(f64),
    Spatial(SpatialFn),
    /// Depends on the frozen state; makes the problem nonlinear.
    State(StateFn),
}

impl Coefficient {
    pub fn spatial(f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Coefficient::Spatial(Arc::new(f))
    }

    pub fn state(f: impl Fn(&PointState) -> f64 + Send + Sync + 'static) -> Self {
        Coefficient::State(Arc::new(f))
    }

    pub fn eval(&self, p: &PointState) -> f64 {
        match self {
            Coefficient::Constant(c) => *c,
            Coefficient::Spatial(f) => f(p.x, p.y),
            Coefficient::State(f) => f(p),
        }
    }

    pub fn is_state_dependent(&self) -> bool {
        matches!(self, Coefficient::State(_))
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Coefficient::Constant(c) if *c == 0.0)
    }
}

impl fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::Constant(c) => write!(f, "Constant({c})"),
            Coefficient::Spatial(_) => f.write_str("Spatial(..)"),
            Coefficient::State(_) => f.write_str("State(..)"),
        }
    }
}

impl From<f64> for Coefficient {
    fn from(c: f64) -> Self {
        Coefficient::Constant(c)
    }
}

/// A scalar boundary-value problem.
#[derive(Clone)]
pub struct ProblemSpec {
    pub convection: [Coefficient; 2],
    pub diffusion: OperatorSpec,
    pub diffusion_multiplier: Coefficient,
    pub reaction: Coefficient,
    pub source: Coefficient,
    pub dirichlet: SpatialFn,
}

impl ProblemSpec {
    /// `L u = 0` with zero boundary data; refine with the `with_*` methods.
    pub fn new(diffusion: OperatorSpec) -> Self {
        ProblemSpec {
            convection: [Coefficient::Constant(0.0), Coefficient::Constant(0.0)],
            diffusion,
            diffusion_multiplier: Coefficient::Constant(1.0),
            reaction: Coefficient::Constant(0.0),
            source: Coefficient::Constant(0.0),
            dirichlet: Arc::new(|_, _| 0.0),
        }
    }

    pub fn with_convection(mut self, bx: impl Into<Coefficient>, by: impl Into<Coefficient>) -> Self {
        self.convection = [bx.into(), by.into()];
        self
    }

    pub fn with_diffusion_multiplier(mut self, a: impl Into<Coefficient>) -> Self {
        self.diffusion_multiplier = a.into();
        self
    }

    pub fn with_reaction(mut self, r: impl Into<Coefficient>) -> Self {
        self.reaction = r.into();
        self
    }

    pub fn with_source(mut self, f: impl Into<Coefficient>) -> Self {
        self.source = f.into();
        self
    }

    pub fn with_dirichlet(mut self, g: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        self.dirichlet = Arc::new(g);
        self
    }

    pub fn is_state_dependent(&self) -> bool {
        self.convection.iter().any(Coefficient::is_state_dependent)
            || self.diffusion_multiplier.is_state_dependent()
            || self.reaction.is_state_dependent()
            || self.source.is_state_dependent()
    }

    pub fn has_convection(&self) -> bool {
        self.convection.iter().any(|c| !c.is_zero())
    }
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("convection", &self.convection)
            .field("diffusion", &self.diffusion)
            .field("diffusion_multiplier", &self.diffusion_multiplier)
            .field("reaction", &self.reaction)
            .field("source", &self.source)
            .finish_non_exhaustive()
    }
}

/// Two scalar problems coupled through their state-dependent coefficients.
/// Field `k`'s coefficients see the frozen state of both fields (indices 0 and 1).
#[derive(Debug, Clone)]
pub struct CoupledProblem {
    pub fields: [ProblemSpec; 2],
}

impl CoupledProblem {
    pub fn new(first: ProblemSpec, second: ProblemSpec) -> Self {
        CoupledProblem { fields: [first, second] }
    }
}
