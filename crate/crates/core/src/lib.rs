//! Numerical laboratory for semilinear damped wave dynamics on weighted graphs.
//!
//! The crate models a weighted graph as the triple (V, ω, μ) — a vertex set,
//! symmetric nonnegative edge weights, and a positive node measure — and builds
//! everything on top of the graph Laplacian
//!
//! ```text
//! Δf(x) = (1/μ(x)) · Σ_{y∼x} ω(x,y) (f(y) − f(x)).
//! ```
//!
//! On top of that sit:
//!
//! * [`graph`] — graph construction (including ℤⁿ lattice truncations), the
//!   Laplacian, the integration-by-parts identity, structural validation, and
//!   a plain-text graph file format;
//! * [`metric`] — distance functions, balls and volumes, volume-growth fits,
//!   and the decay check for the Laplacian of the distance function;
//! * [`cutoff`] — the smooth space-time cutoff Φ_R built from an exponential
//!   partition-of-unity step, its closed-form derivatives, and numerical
//!   verification of the three decay bounds it satisfies;
//! * [`solver`] — an adaptive Dormand–Prince integrator for the damped wave
//!   equation u_tt − Δu + u_t = |u|^p (scalar, weakly coupled system, and a
//!   double-damping variant), with blow-up detection via a threshold ladder
//!   and lifespan extrapolation;
//! * [`functionals`] — space-time functionals of computed trajectories (P_R,
//!   support measures, the logarithmic average 𝓗, weak-form residuals) and the
//!   inequality chains that link them;
//! * [`scaling`] — critical exponents, predicted lifespan scaling laws, and
//!   least-squares fits of measured lifespans against those laws.
//!
//! Everything is deterministic: same inputs, same bits. The crate has no
//! global state and graphs are immutable after construction, so all read-side
//! operations are safe to run in parallel.

// Validation guards are written as `!(x > 0.0)` on purpose: the negated form
// rejects NaN along with the out-of-range values, where `x <= 0.0` would not.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod csv;
pub mod cutoff;
pub mod error;
pub mod functionals;
pub mod graph;
pub mod metric;
pub mod scaling;
pub mod solver;

pub use error::{CutoffError, FunctionalError, GraphError, MetricError, ScalingError, SolverError};
pub use graph::{GraphBuilder, GraphFunction, ValidationReport, VertexId, WeightedGraph};
pub use metric::{BallTable, DecayReport, GraphMetric, MetricKind};
pub use cutoff::{CutoffDecayReport, CutoffParams};
pub use functionals::{FunctionalReport, WeakFormCheck};
pub use solver::{
    LifespanRecord, Problem, ProblemKind, SolverControls, Trajectory, Verdict,
};
pub use scaling::{LifespanModel, LinearFit, ScalingFit};
