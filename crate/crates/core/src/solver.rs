//! Adaptive time integration of damped nonlinear wave equations on a graph,
//! with blow-up detection and lifespan estimation.
//!
//! Three problem shapes share one integrator:
//!
//! ```text
//! scalar:           u_tt − Δu + u_t = |u|^p
//! double damping:   u_tt − Δu + u_t − Δu_t = |u|^p
//! system:           u_tt − Δu + u_t = |v|^p,   v_tt − Δv + v_t = |u|^q
//! ```
//!
//! with initial data (u, u_t)(0) = ε(u₀, u₁) (and ε(v₀, v₁) for systems).
//! On a truncated graph the Laplacian extends by zero past the rim (absorbing
//! ghost values), and a boundary monitor aborts the run the moment any flagged
//! truncation vertex carries visible amplitude — results from such a run
//! would describe the box, not the infinite graph.
//!
//! The integrator is the classic Dormand–Prince 5(4) embedded Runge–Kutta
//! pair with the first-same-as-last optimization and a standard proportional
//! step controller on the weighted-RMS error norm. Near blow-up an extra step
//! cap proportional to the local profile timescale `sup^{−(p−1)/2}` keeps
//! several accepted steps per e-fold of growth, so threshold crossing times
//! stay well resolved all the way up the ladder.
//!
//! Blow-up is detected by a ladder of sup-norm thresholds (decades from 1e2
//! to 1e8 by default). Each crossing time T(M) is recorded by log-linear
//! interpolation inside the step that crossed it, and the finite blow-up time
//! is extrapolated from the ladder by Aitken Δ² acceleration (exact on
//! geometrically converging sequences, which these are).

use crate::error::SolverError;
use crate::graph::{GraphFunction, VertexId, WeightedGraph};
use serde::Serialize;

/// Which equation is being integrated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    Scalar,
    ScalarDoubleDamping,
    System,
}

/// An initial-value problem on a graph.
///
/// The data functions are stored unscaled; the run starts from ε·(u₀, u₁).
/// All data must be compactly supported (zero default value).
#[derive(Debug, Clone)]
pub struct Problem<'g> {
    pub graph: &'g WeightedGraph,
    pub kind: ProblemKind,
    pub p: f64,
    /// Second nonlinearity exponent; equal to `p` for scalar kinds.
    pub q: f64,
    pub epsilon: f64,
    pub u0: GraphFunction,
    pub u1: GraphFunction,
    pub v0: GraphFunction,
    pub v1: GraphFunction,
}

impl<'g> Problem<'g> {
    pub fn scalar(
        graph: &'g WeightedGraph,
        p: f64,
        epsilon: f64,
        u0: GraphFunction,
        u1: GraphFunction,
    ) -> Result<Self, SolverError> {
        let problem = Problem {
            graph,
            kind: ProblemKind::Scalar,
            p,
            q: p,
            epsilon,
            u0,
            u1,
            v0: GraphFunction::zero(),
            v1: GraphFunction::zero(),
        };
        problem.validate()?;
        Ok(problem)
    }

    pub fn scalar_double_damping(
        graph: &'g WeightedGraph,
        p: f64,
        epsilon: f64,
        u0: GraphFunction,
        u1: GraphFunction,
    ) -> Result<Self, SolverError> {
        let mut problem = Self::scalar(graph, p, epsilon, u0, u1)?;
        problem.kind = ProblemKind::ScalarDoubleDamping;
        Ok(problem)
    }

    #[allow(clippy::too_many_arguments)]
    pub fn system(
        graph: &'g WeightedGraph,
        p: f64,
        q: f64,
        epsilon: f64,
        u0: GraphFunction,
        u1: GraphFunction,
        v0: GraphFunction,
        v1: GraphFunction,
    ) -> Result<Self, SolverError> {
        let problem = Problem {
            graph,
            kind: ProblemKind::System,
            p,
            q,
            epsilon,
            u0,
            u1,
            v0,
            v1,
        };
        problem.validate()?;
        Ok(problem)
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        if !(self.p > 1.0) || !self.p.is_finite() {
            return Err(SolverError::BadProblem(format!(
                "exponent p = {} must be a finite number above 1",
                self.p
            )));
        }
        if !(self.q > 1.0) || !self.q.is_finite() {
            return Err(SolverError::BadProblem(format!(
                "exponent q = {} must be a finite number above 1",
                self.q
            )));
        }
        if !(self.epsilon >= 0.0) || !self.epsilon.is_finite() {
            return Err(SolverError::BadProblem(format!(
                "data size epsilon = {} must be a finite nonnegative number",
                self.epsilon
            )));
        }
        let n = self.graph.vertex_count();
        for (name, f) in [
            ("u0", &self.u0),
            ("u1", &self.u1),
            ("v0", &self.v0),
            ("v1", &self.v1),
        ] {
            if f.default_value() != 0.0 {
                return Err(SolverError::BadProblem(format!(
                    "initial data {name} has nonzero default value; data must be compactly \
                     supported"
                )));
            }
            for v in f.support() {
                if v.index() >= n {
                    return Err(SolverError::BadProblem(format!(
                        "initial data {name} refers to vertex index {} outside the graph",
                        v.index()
                    )));
                }
                if !f.get(v).is_finite() {
                    return Err(SolverError::BadProblem(format!(
                        "initial data {name} has a non-finite value at {}",
                        self.graph.label(v)
                    )));
                }
            }
        }
        Ok(())
    }

    /// The decay exponent of T∞ − T(M) in the threshold M for this problem's
    /// blow-up profile: (p−1)/2 for scalar equations, 1/(2Γ(p,q)) for systems
    /// (the faster component grows like (T−t)^{−2Γ}).
    pub fn profile_exponent(&self) -> f64 {
        match self.kind {
            ProblemKind::Scalar | ProblemKind::ScalarDoubleDamping => (self.p - 1.0) / 2.0,
            ProblemKind::System => {
                let gamma = (self.p.max(self.q) + 1.0) / (self.p * self.q - 1.0);
                1.0 / (2.0 * gamma)
            }
        }
    }

    /// A deterministic fingerprint of the problem plus controls, for keying
    /// resumable result stores. Identical inputs hash identically; any change
    /// to the equation, data, graph size, or tolerances changes the hash.
    pub fn settings_hash(&self, controls: &SolverControls) -> u64 {
        let mut text = String::new();
        use std::fmt::Write;
        let _ = write!(
            text,
            "kind={:?};p={:016x};q={:016x};eps={:016x};graph={},{:016x};",
            self.kind,
            self.p.to_bits(),
            self.q.to_bits(),
            self.epsilon.to_bits(),
            self.graph.vertex_count(),
            self.graph.total_volume().to_bits(),
        );
        for (name, f) in [
            ("u0", &self.u0),
            ("u1", &self.u1),
            ("v0", &self.v0),
            ("v1", &self.v1),
        ] {
            let mut entries: Vec<(usize, u64)> =
                f.support().map(|v| (v.index(), f.get(v).to_bits())).collect();
            entries.sort_unstable();
            let _ = write!(text, "{name}=");
            for (i, bits) in entries {
                let _ = write!(text, "{i}:{bits:016x},");
            }
            text.push(';');
        }
        let _ = write!(
            text,
            "rtol={:016x};atol={:016x};dt0={:016x};dtmax={:016x};tmax={:016x};btol={:016x};\
             scale={:016x};thresholds=",
            controls.rtol.to_bits(),
            controls.atol.to_bits(),
            controls.dt_initial.to_bits(),
            controls.dt_max.to_bits(),
            controls.t_max.to_bits(),
            controls.boundary_tol.to_bits(),
            controls.nonlinearity_scale.to_bits(),
        );
        for m in &controls.thresholds {
            let _ = write!(text, "{:016x},", m.to_bits());
        }
        fnv1a64(text.as_bytes())
    }
}

/// 64-bit FNV-1a over a byte string.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

/// Equal bump data on the hop ball of radius 2 around `center`: indicator
/// functions u₀ = u₁ = c·1_B scaled so that Σ μ(u₀ + u₁) = `mass`.
pub fn default_bump(
    graph: &WeightedGraph,
    center: VertexId,
    mass: f64,
) -> Result<(GraphFunction, GraphFunction), SolverError> {
    if !(mass > 0.0) || !mass.is_finite() {
        return Err(SolverError::BadProblem(format!(
            "bump mass {mass} must be positive and finite"
        )));
    }
    let mut ball = vec![center];
    let mut seen = std::collections::HashSet::from([center]);
    let mut frontier = vec![center];
    for _ in 0..2 {
        let mut next = Vec::new();
        for &v in &frontier {
            for &(w, _) in graph.neighbors(v) {
                if seen.insert(w) {
                    ball.push(w);
                    next.push(w);
                }
            }
        }
        frontier = next;
    }
    let volume: f64 = ball.iter().map(|&v| graph.mu(v)).sum();
    let c = mass / (2.0 * volume);
    let u0 = GraphFunction::from_pairs(ball.iter().map(|&v| (v, c)));
    let u1 = GraphFunction::from_pairs(ball.iter().map(|&v| (v, c)));
    Ok((u0, u1))
}

/// Integration tolerances, caps, and instrumentation cadence.
#[derive(Debug, Clone, Serialize)]
pub struct SolverControls {
    pub rtol: f64,
    pub atol: f64,
    pub dt_initial: f64,
    /// Upper step bound. The double-damping equation carries the Laplacian on
    /// the velocity too and is happier with 1.0 than the default 2.0.
    pub dt_max: f64,
    /// Give up (verdict: global candidate) when this time is reached.
    pub t_max: f64,
    /// Increasing sup-norm thresholds for the blow-up ladder.
    pub thresholds: Vec<f64>,
    /// Record full solution snapshots every this often (None: none at all).
    pub snapshot_dt: Option<f64>,
    /// Stop recording snapshots past this time (they keep memory bounded on
    /// long runs whose early window is all the functionals need).
    pub snapshot_t_max: f64,
    /// Amplitude at a flagged truncation vertex that counts as contamination.
    pub boundary_tol: f64,
    /// Multiplier on the nonlinear term. 1 is the equation itself; 0 switches
    /// the forcing off, leaving the exactly conservative/dissipative linear
    /// part — useful as a test oracle.
    pub nonlinearity_scale: f64,
}

impl Default for SolverControls {
    fn default() -> Self {
        SolverControls {
            rtol: 1e-6,
            atol: 1e-9,
            dt_initial: 1e-3,
            dt_max: 2.0,
            t_max: 1e4,
            thresholds: (2..=8).map(|k| 10f64.powi(k)).collect(),
            snapshot_dt: None,
            snapshot_t_max: f64::INFINITY,
            boundary_tol: 1e-6,
            nonlinearity_scale: 1.0,
        }
    }
}

impl SolverControls {
    pub fn validate(&self) -> Result<(), SolverError> {
        let bad = |msg: String| Err(SolverError::BadControls(msg));
        if !(self.rtol > 0.0 && self.rtol < 1.0) {
            return bad(format!("rtol = {} out of (0, 1)", self.rtol));
        }
        if !(self.atol > 0.0) {
            return bad(format!("atol = {} must be positive", self.atol));
        }
        if !(self.dt_initial > 0.0 && self.dt_initial <= self.dt_max) {
            return bad(format!(
                "dt_initial = {} must be positive and at most dt_max = {}",
                self.dt_initial, self.dt_max
            ));
        }
        if !(self.t_max > 0.0) || !self.t_max.is_finite() {
            return bad(format!("t_max = {} must be positive and finite", self.t_max));
        }
        let mut prev = 0.0;
        for &m in &self.thresholds {
            if !(m > prev) || !m.is_finite() {
                return bad(format!("thresholds must be increasing and positive, found {m}"));
            }
            prev = m;
        }
        if let Some(dt) = self.snapshot_dt {
            if !(dt > 0.0) {
                return bad(format!("snapshot_dt = {dt} must be positive"));
            }
        }
        if !(self.boundary_tol > 0.0) {
            return bad(format!("boundary_tol = {} must be positive", self.boundary_tol));
        }
        if !(self.nonlinearity_scale >= 0.0) || !self.nonlinearity_scale.is_finite() {
            return bad(format!(
                "nonlinearity_scale = {} must be finite and nonnegative",
                self.nonlinearity_scale
            ));
        }
        Ok(())
    }
}

/// One recorded threshold crossing of the sup norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Crossing {
    pub threshold: f64,
    pub time: f64,
}

/// How a run ended.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    /// The sup norm climbed through the whole threshold ladder.
    BlowUp {
        estimated_lifespan: f64,
        /// Set when fewer than two crossings were available, so the estimate
        /// is just the last crossing time rather than an extrapolation.
        low_confidence: bool,
    },
    /// Reached `t_max` with bounded sup norm — consistent with (not proof of)
    /// global existence.
    GlobalCandidate { t_reached: f64 },
    /// Visible amplitude reached a truncation boundary vertex; past this time
    /// the finite box no longer represents the infinite graph.
    TruncationContaminated { t: f64, boundary_vertex: String },
}

/// Summary of one lifespan measurement, the unit of a data-size sweep.
#[derive(Debug, Clone, Serialize)]
pub struct LifespanRecord {
    pub epsilon: f64,
    pub verdict: Verdict,
    pub crossings: Vec<Crossing>,
    pub steps_accepted: usize,
    pub steps_rejected: usize,
    pub t_end: f64,
    pub sup_end: f64,
    pub settings_hash: u64,
}

impl LifespanRecord {
    /// The estimated blow-up time, when the run blew up.
    pub fn lifespan(&self) -> Option<f64> {
        match self.verdict {
            Verdict::BlowUp {
                estimated_lifespan, ..
            } => Some(estimated_lifespan),
            _ => None,
        }
    }
}

/// A computed trajectory: verdict, crossing ladder, sup-norm series, and
/// (when a cadence was requested) full solution snapshots.
#[derive(Debug, Clone)]
pub struct Trajectory {
    /// Snapshot times (empty unless `snapshot_dt` was set).
    pub times: Vec<f64>,
    /// u values per snapshot, indexed like the graph's vertices.
    pub snapshots: Vec<Vec<f64>>,
    /// u_t values per snapshot, aligned with `snapshots`.
    pub snapshots_velocity: Vec<Vec<f64>>,
    /// v values per snapshot, for system runs.
    pub snapshots_second: Option<Vec<Vec<f64>>>,
    /// v_t values per snapshot, for system runs.
    pub snapshots_second_velocity: Option<Vec<Vec<f64>>>,
    /// Full integrator state at `t_end`, blocks of vertex-indexed values:
    /// [u, u_t] for scalar kinds, [u, u_t, v, v_t] for systems.
    pub final_state: Vec<f64>,
    /// (t, sup) at every accepted step.
    pub sup_series: Vec<(f64, f64)>,
    pub crossings: Vec<Crossing>,
    pub verdict: Verdict,
    pub steps_accepted: usize,
    pub steps_rejected: usize,
    pub t_end: f64,
    pub sup_end: f64,
    pub settings_hash: u64,
}

impl Trajectory {
    pub fn record(&self, epsilon: f64) -> LifespanRecord {
        LifespanRecord {
            epsilon,
            verdict: self.verdict.clone(),
            crossings: self.crossings.clone(),
            steps_accepted: self.steps_accepted,
            steps_rejected: self.steps_rejected,
            t_end: self.t_end,
            sup_end: self.sup_end,
            settings_hash: self.settings_hash,
        }
    }
}

/// Extrapolates the finite blow-up time from a ladder of threshold crossings.
///
/// With three or more crossings, Aitken Δ² on the last three times: the gaps
/// T∞ − T(M) shrink geometrically along a decade ladder, and Aitken is exact
/// on geometric sequences. With two, the known gap ratio
/// ρ = (M₂/M₁)^exponent turns the last difference into the remaining gap
/// (`profile_exponent` is (p−1)/2 for scalar problems — see
/// [`Problem::profile_exponent`]). With fewer, the last crossing itself is
/// returned and flagged low-confidence.
pub fn extrapolate_blowup_time(crossings: &[Crossing], profile_exponent: f64) -> (f64, bool) {
    if crossings.len() >= 3 {
        let t3 = crossings[crossings.len() - 1].time;
        let t2 = crossings[crossings.len() - 2].time;
        let t1 = crossings[crossings.len() - 3].time;
        let d1 = t2 - t1;
        let d2 = t3 - t2;
        if d1 > d2 && d2 > 0.0 {
            return (t3 + d2 * d2 / (d1 - d2), false);
        }
    }
    if crossings.len() >= 2 {
        let last = crossings[crossings.len() - 1];
        let prev = crossings[crossings.len() - 2];
        let rho = (last.threshold / prev.threshold).powf(profile_exponent);
        if rho > 1.0 && last.time > prev.time {
            return (last.time + (last.time - prev.time) / (rho - 1.0), false);
        }
    }
    match crossings.last() {
        Some(c) => (c.time, true),
        None => (f64::NAN, true),
    }
}

/// |x|^p with fast paths for the common exponents.
fn abs_pow(x: f64, p: f64) -> f64 {
    let a = x.abs();
    if p == 2.0 {
        a * a
    } else if p == 3.0 {
        a * a * a
    } else if p == 1.5 {
        a * a.sqrt()
    } else {
        a.powf(p)
    }
}

// Dormand–Prince 5(4) tableau.
const A2: [f64; 1] = [1.0 / 5.0];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [
    19372.0 / 6561.0,
    -25360.0 / 2187.0,
    64448.0 / 6561.0,
    -212.0 / 729.0,
];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
const B: [f64; 6] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
];
/// Difference between the 5th- and 4th-order weights (error estimator).
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Past this sup norm the blow-up step cap engages: at most
/// `NONLINEAR_STEP_SAFETY · sup^{−(p−1)/2}`, i.e. a fixed fraction of the
/// local profile timescale, so each e-fold of growth gets several steps and
/// crossing interpolation stays accurate. Below it the error controller alone
/// governs (the cap would only throttle the smooth phase).
const NONLINEAR_CAP_ONSET: f64 = 10.0;
const NONLINEAR_STEP_SAFETY: f64 = 1.0;

struct Workspace<'g> {
    graph: &'g WeightedGraph,
    kind: ProblemKind,
    p: f64,
    q: f64,
    scale: f64,
    n: usize,
}

impl Workspace<'_> {
    /// Graph Laplacian of the state block starting at `off`, extended by zero
    /// across the truncation rim (the clipped degree acts on the center).
    fn laplacian_block(&self, y: &[f64], off: usize, dy: &mut [f64], dy_off: usize) {
        for v in self.graph.vertices() {
            let i = v.index();
            let yi = y[off + i];
            let mut acc = -self.graph.missing_weight(v) * yi;
            for &(w, weight) in self.graph.neighbors(v) {
                acc += weight * (y[off + w.index()] - yi);
            }
            dy[dy_off + i] += acc / self.graph.mu(v);
        }
    }

    fn rhs(&self, y: &[f64], dy: &mut [f64]) {
        let n = self.n;
        dy.fill(0.0);
        match self.kind {
            ProblemKind::Scalar => {
                dy[..n].copy_from_slice(&y[n..2 * n]);
                self.laplacian_block(y, 0, dy, n);
                for i in 0..n {
                    dy[n + i] += -y[n + i] + self.scale * abs_pow(y[i], self.p);
                }
            }
            ProblemKind::ScalarDoubleDamping => {
                dy[..n].copy_from_slice(&y[n..2 * n]);
                self.laplacian_block(y, 0, dy, n);
                self.laplacian_block(y, n, dy, n);
                for i in 0..n {
                    dy[n + i] += -y[n + i] + self.scale * abs_pow(y[i], self.p);
                }
            }
            ProblemKind::System => {
                dy[..n].copy_from_slice(&y[n..2 * n]);
                dy[2 * n..3 * n].copy_from_slice(&y[3 * n..4 * n]);
                self.laplacian_block(y, 0, dy, n);
                self.laplacian_block(y, 2 * n, dy, 3 * n);
                for i in 0..n {
                    dy[n + i] += -y[n + i] + self.scale * abs_pow(y[2 * n + i], self.p);
                    dy[3 * n + i] += -y[3 * n + i] + self.scale * abs_pow(y[i], self.q);
                }
            }
        }
    }

    /// Sup norm over the displacement blocks (u, and v for systems).
    fn sup(&self, y: &[f64]) -> f64 {
        let n = self.n;
        let mut sup = 0.0f64;
        for &v in &y[..n] {
            sup = sup.max(v.abs());
        }
        if self.kind == ProblemKind::System {
            for &v in &y[2 * n..3 * n] {
                sup = sup.max(v.abs());
            }
        }
        sup
    }
}

/// Integrates the problem and returns the full trajectory.
pub fn integrate(problem: &Problem, controls: &SolverControls) -> Result<Trajectory, SolverError> {
    problem.validate()?;
    controls.validate()?;
    let graph = problem.graph;
    let n = graph.vertex_count();
    let blocks = if problem.kind == ProblemKind::System { 4 } else { 2 };
    let dim = blocks * n;

    let ws = Workspace {
        graph,
        kind: problem.kind,
        p: problem.p,
        q: problem.q,
        scale: controls.nonlinearity_scale,
        n,
    };

    // ε-scaled initial state.
    let mut y = vec![0.0f64; dim];
    let eps = problem.epsilon;
    let fill = |dst: &mut [f64], f: &GraphFunction| {
        for v in f.support() {
            dst[v.index()] = eps * f.get(v);
        }
    };
    fill(&mut y[..n], &problem.u0);
    fill(&mut y[n..2 * n], &problem.u1);
    if blocks == 4 {
        fill(&mut y[2 * n..3 * n], &problem.v0);
        fill(&mut y[3 * n..4 * n], &problem.v1);
    }

    let boundary: Vec<VertexId> = graph.boundary_vertices().collect();
    let dt_max = match problem.kind {
        ProblemKind::ScalarDoubleDamping => controls.dt_max.min(1.0),
        _ => controls.dt_max,
    };
    let min_exponent = 0.5 * (problem.p.min(problem.q) - 1.0);

    let mut k: Vec<Vec<f64>> = (0..7).map(|_| vec![0.0; dim]).collect();
    let mut ytmp = vec![0.0f64; dim];
    let mut ynew = vec![0.0f64; dim];

    let mut t = 0.0f64;
    let mut sup = ws.sup(&y);
    let mut dt_prop = controls.dt_initial.min(dt_max);
    let mut accepted = 0usize;
    let mut rejected = 0usize;

    // Snapshot buffers: per-block state slices at the recorded times.
    #[derive(Default)]
    struct SnapBufs {
        times: Vec<f64>,
        u: Vec<Vec<f64>>,
        ut: Vec<Vec<f64>>,
        v: Vec<Vec<f64>>,
        vt: Vec<Vec<f64>>,
    }
    let mut snap = SnapBufs::default();
    // Snapshot times are k · dt by multiplication, not accumulation: a
    // running `+=` drifts by an ulp per snapshot, which eventually parks a
    // snapshot one ulp short of the horizon and strands a degenerate step.
    let mut snap_count = 0usize;
    let next_snap_time = |count: usize| match controls.snapshot_dt {
        Some(dt) => count as f64 * dt,
        None => f64::INFINITY,
    };
    let mut next_snap = next_snap_time(0);
    let record_snapshot = |t: f64, y: &[f64], snap: &mut SnapBufs| {
        snap.times.push(t);
        snap.u.push(y[..n].to_vec());
        snap.ut.push(y[n..2 * n].to_vec());
        if blocks == 4 {
            snap.v.push(y[2 * n..3 * n].to_vec());
            snap.vt.push(y[3 * n..4 * n].to_vec());
        }
    };
    if next_snap == 0.0 && 0.0 <= controls.snapshot_t_max {
        record_snapshot(0.0, &y, &mut snap);
        snap_count = 1;
        next_snap = next_snap_time(1);
    }

    let mut sup_series = vec![(0.0, sup)];
    let mut crossings: Vec<Crossing> = Vec::new();
    let mut next_threshold = 0usize;

    let hash = problem.settings_hash(controls);
    let finish = |verdict: Verdict,
                  t: f64,
                  sup: f64,
                  y: &[f64],
                  snap: SnapBufs,
                  sup_series: Vec<(f64, f64)>,
                  crossings: Vec<Crossing>,
                  accepted: usize,
                  rejected: usize| Trajectory {
        times: snap.times,
        snapshots: snap.u,
        snapshots_velocity: snap.ut,
        snapshots_second: if blocks == 4 { Some(snap.v) } else { None },
        snapshots_second_velocity: if blocks == 4 { Some(snap.vt) } else { None },
        final_state: y.to_vec(),
        sup_series,
        crossings,
        verdict,
        steps_accepted: accepted,
        steps_rejected: rejected,
        t_end: t,
        sup_end: sup,
        settings_hash: hash,
    };

    // Thresholds the data itself already exceeds are crossed at t = 0.
    while next_threshold < controls.thresholds.len()
        && controls.thresholds[next_threshold] <= sup
    {
        crossings.push(Crossing {
            threshold: controls.thresholds[next_threshold],
            time: 0.0,
        });
        next_threshold += 1;
    }
    if next_threshold >= controls.thresholds.len() && !controls.thresholds.is_empty() {
        let (t_inf, low) = extrapolate_blowup_time(&crossings, problem.profile_exponent());
        let verdict = Verdict::BlowUp {
            estimated_lifespan: t_inf,
            low_confidence: low,
        };
        return Ok(finish(
            verdict, t, sup, &y, snap, sup_series, crossings, accepted, rejected,
        ));
    }

    ws.rhs(&y, &mut k[0]); // FSAL seed

    loop {
        // Within a relative 1e-9 of the horizon counts as reaching it; a
        // clipped step can land an ulp short, and integrating the remaining
        // sliver is meaningless.
        if t >= controls.t_max * (1.0 - 1e-9) {
            let verdict = Verdict::GlobalCandidate {
                t_reached: controls.t_max,
            };
            return Ok(finish(
                verdict, t, sup, &y, times, snapshots, snapshots_second, sup_series, crossings,
                accepted, rejected,
            ));
        }

        // Step size: controller proposal, capped by the blow-up timescale and
        // clipped to land exactly on snapshot times and the horizon.
        let mut h = dt_prop.min(dt_max);
        if sup > NONLINEAR_CAP_ONSET {
            h = h.min(NONLINEAR_STEP_SAFETY * sup.powf(-min_exponent));
        }
        // A clipped step remembers its exact landing time so that t_new does
        // not round to one ulp short of the target (which would leave a
        // degenerate sliver for the next step).
        let mut clip_target = None;
        if t + h >= controls.t_max {
            h = controls.t_max - t;
            clip_target = Some(controls.t_max);
        }
        if next_snap <= controls.snapshot_t_max && t + h > next_snap - 1e-12 && next_snap > t {
            h = next_snap - t;
            clip_target = Some(next_snap);
        }
        let clipped = clip_target.is_some();
        if !(h > 0.0) || h < 1e-14 * (1.0 + t.abs()) {
            return Err(SolverError::Numeric {
                t,
                msg: format!("step size collapsed to {h}"),
            });
        }

        // The six fresh stages (k1 is inherited: first-same-as-last).
        let stage = |ytmp: &mut [f64], y: &[f64], k: &[Vec<f64>], h: f64, coef: &[f64]| {
            for i in 0..dim {
                let mut acc = 0.0;
                for (j, &c) in coef.iter().enumerate() {
                    acc += c * k[j][i];
                }
                ytmp[i] = y[i] + h * acc;
            }
        };
        stage(&mut ytmp, &y, &k, h, &A2);
        ws.rhs(&ytmp, &mut k[1]);
        stage(&mut ytmp, &y, &k, h, &A3);
        ws.rhs(&ytmp, &mut k[2]);
        stage(&mut ytmp, &y, &k, h, &A4);
        ws.rhs(&ytmp, &mut k[3]);
        stage(&mut ytmp, &y, &k, h, &A5);
        ws.rhs(&ytmp, &mut k[4]);
        stage(&mut ytmp, &y, &k, h, &A6);
        ws.rhs(&ytmp, &mut k[5]);

        // 5th-order solution and its embedded error estimate.
        for i in 0..dim {
            let mut acc = 0.0;
            for (j, &c) in B.iter().enumerate() {
                acc += c * k[j][i];
            }
            ynew[i] = y[i] + h * acc;
        }
        ws.rhs(&ynew, &mut k[6]);

        let mut err_sq = 0.0f64;
        for i in 0..dim {
            let mut e = 0.0;
            for (j, &c) in E.iter().enumerate() {
                e += c * k[j][i];
            }
            e *= h;
            let tol = controls.atol + controls.rtol * y[i].abs().max(ynew[i].abs());
            err_sq += (e / tol) * (e / tol);
        }
        let err = (err_sq / dim as f64).sqrt();

        if !err.is_finite() {
            // Overflow inside the stages: retreat hard.
            rejected += 1;
            dt_prop = h * 0.2;
            continue;
        }
        if err > 1.0 {
            rejected += 1;
            dt_prop = h * (0.9 * err.powf(-0.2)).max(0.2);
            continue;
        }

        // Accepted.
        let t_new = clip_target.unwrap_or(t + h);
        std::mem::swap(&mut y, &mut ynew);
        k.swap(0, 6); // FSAL: last stage is next step's first
        accepted += 1;
        let sup_new = ws.sup(&y);
        sup_series.push((t_new, sup_new));

        // Threshold crossings, log-interpolated inside the step.
        while next_threshold < controls.thresholds.len()
            && controls.thresholds[next_threshold] <= sup_new
        {
            let m = controls.thresholds[next_threshold];
            let time = if sup > 0.0 && sup_new > sup {
                t + h * ((m.ln() - sup.ln()) / (sup_new.ln() - sup.ln()))
            } else {
                t_new
            };
            crossings.push(Crossing { threshold: m, time });
            next_threshold += 1;
        }

        // Snapshot cadence (steps are clipped to land exactly on the grid).
        if t_new >= next_snap - 1e-9 && next_snap <= controls.snapshot_t_max {
            record_snapshot(
                t_new,
                &y,
                &mut times,
                &mut snapshots,
                &mut snapshots_second,
            );
            snap_count += 1;
            next_snap = next_snap_time(snap_count);
        }

        // Boundary contamination monitor.
        for &b in &boundary {
            let i = b.index();
            let amp = if blocks == 4 {
                y[i].abs().max(y[2 * n + i].abs())
            } else {
                y[i].abs()
            };
            if amp > controls.boundary_tol {
                let verdict = Verdict::TruncationContaminated {
                    t: t_new,
                    boundary_vertex: graph.label(b).to_string(),
                };
                return Ok(finish(
                    verdict, t_new, sup_new, &y, times, snapshots, snapshots_second, sup_series,
                    crossings, accepted, rejected,
                ));
            }
        }

        // Full ladder crossed: blow-up.
        if next_threshold >= controls.thresholds.len() && !controls.thresholds.is_empty() {
            let (t_inf, low) = extrapolate_blowup_time(&crossings, problem.profile_exponent());
            let verdict = Verdict::BlowUp {
                estimated_lifespan: t_inf,
                low_confidence: low,
            };
            return Ok(finish(
                verdict, t_new, sup_new, &y, times, snapshots, snapshots_second, sup_series,
                crossings, accepted, rejected,
            ));
        }

        t = t_new;
        sup = sup_new;
        let fac = (0.9 * err.max(1e-10).powf(-0.2)).clamp(0.2, 5.0);
        let candidate = (h * fac).min(dt_max);
        // A step clipped short for a snapshot or the horizon says nothing
        // about the controller's own proposal: don't let it shrink dt_prop
        // unless the error actually asked for a shrink.
        dt_prop = if clipped && fac >= 1.0 {
            dt_prop.max(candidate)
        } else {
            candidate
        };
    }
}

/// Integrates with snapshots switched off and summarizes into a
/// [`LifespanRecord`] — the cheap form for ε sweeps.
pub fn estimate_lifespan(
    problem: &Problem,
    controls: &SolverControls,
) -> Result<LifespanRecord, SolverError> {
    let mut lean = controls.clone();
    lean.snapshot_dt = None;
    let trajectory = integrate(problem, &lean)?;
    Ok(trajectory.record(problem.epsilon))
}
