//! Error types, one enum per module.
//!
//! Everything is `thiserror`-derived and carries enough context to act on:
//! offending vertex labels, measured vs. allowed values, line numbers for the
//! graph file parser.

use thiserror::Error;

/// Errors from graph construction, validation, and file I/O.
#[derive(Debug, Error)]
pub enum GraphError {
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),

    #[error("vertex `{0}` defined twice")]
    DuplicateVertex(String),

    #[error("edge {0} -- {1} given twice")]
    DuplicateEdge(String, String),

    #[error("edge {a} -- {b} has negative weight {weight}")]
    NegativeWeight { a: String, b: String, weight: f64 },

    #[error("self-loop on `{0}` with nonzero weight (the diagonal of ω must vanish)")]
    SelfLoop(String),

    #[error("node measure at `{vertex}` must be positive and finite, got {mu}")]
    BadMeasure { vertex: String, mu: f64 },

    #[error("graph is not connected: only {reachable} of {total} vertices reachable from `{root}`")]
    Disconnected {
        root: String,
        reachable: usize,
        total: usize,
    },

    #[error("lattice with n={n}, radius={radius} would hold {would_have} vertices, above the cap of {cap}")]
    TooLarge {
        n: usize,
        radius: u32,
        would_have: u128,
        cap: usize,
    },

    #[error("support touches vertex `{0}`, whose neighborhood is incomplete (truncation boundary)")]
    IncompleteNeighborhood(String),

    #[error("function has a nonzero default value ({0}); this operation needs compact support")]
    NotCompactlySupported(f64),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Errors from metric construction, ball tables, and decay checks.
#[derive(Debug, Error)]
pub enum MetricError {
    #[error("graph is not connected; distances from `{0}` are undefined on the far component")]
    Disconnected(String),

    #[error("metric kind requires lattice coordinates, but the graph is not a lattice build")]
    NotALattice,

    #[error("radius {radius} exceeds the trusted radius {trusted} of the truncation (ball would be clipped)")]
    RadiusOutsideTrusted { radius: f64, trusted: f64 },

    #[error("custom distance table rejected: {0}")]
    BadCustomMetric(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),
}

/// Errors from cutoff construction and bound verification.
#[derive(Debug, Error)]
pub enum CutoffError {
    #[error("cutoff argument must be nonnegative, got {0}")]
    NegativeArgument(f64),

    #[error("invalid cutoff parameters: {0}")]
    BadParams(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),
}

/// Errors from time integration.
#[derive(Debug, Error)]
pub enum SolverError {
    #[error("invalid problem: {0}")]
    BadProblem(String),

    #[error("invalid solver controls: {0}")]
    BadControls(String),

    #[error("numeric failure at t={t}: {msg}")]
    Numeric { t: f64, msg: String },
}

/// Errors from trajectory functionals.
#[derive(Debug, Error)]
pub enum FunctionalError {
    #[error("trajectory covers [0, {have}] but the cutoff's time support needs [0, {need}] (and the run did not end in blow-up)")]
    Coverage { need: f64, have: f64 },

    #[error("ball of radius {radius} is clipped by the truncation (trusted radius {trusted})")]
    BallClipped { radius: f64, trusted: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("trajectory has no snapshots (was it recorded with a snapshot cadence?)")]
    NoSnapshots,
}

/// Errors from scaling-law prediction and fitting.
#[derive(Debug, Error)]
pub enum ScalingError {
    #[error("Γ(p,q) needs pq > 1, got p={p}, q={q}")]
    GammaDomain { p: f64, q: f64 },

    #[error("no prediction: parameters are supercritical ({0})")]
    NoPrediction(String),

    #[error("insufficient data: need at least {need} points, got {got}")]
    InsufficientData { need: usize, got: usize },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
}
