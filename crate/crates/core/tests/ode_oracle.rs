//! External accuracy oracle for the adaptive integrator.
//!
//! On a single vertex with μ = 1 and no edges the equation collapses to the
//! ordinary blow-up problem u″ + u′ = |u|², and a classical fixed-step RK4
//! march — sharing no code with the production integrator — pins its finite
//! lifespan to nine digits. The march records when u first crosses each
//! threshold and closes the tail past the last one in closed form: near
//! blow-up u ≈ 6·(T − t)⁻² for the quadratic nonlinearity (the profile
//! constant γ(γ+1) with γ = 2), so T − t(M) ≈ √(6/M).

use graphwave::solver::{self, Problem, SolverControls};
use graphwave::WeightedGraph;
use std::sync::OnceLock;

/// Fixed step of the reference march. Small enough that the march's own
/// error (O(dt⁴) per unit time, plus O(dt) crossing-detection bias) sits
/// around 1e-7 — four decades below the tolerance it arbitrates.
const ORACLE_DT: f64 = 2e-7;

/// Thresholds recorded by the march; the first seven match the adaptive
/// integrator's default ladder, the last one anchors the tail formula.
const ORACLE_THRESHOLDS: [f64; 8] = [1e2, 1e3, 1e4, 1e5, 1e6, 1e7, 1e8, 1e10];

/// The march's lifespan for u(0) = 2, u′(0) = 0, frozen from the identical
/// computation; the test recomputes it and the two must agree to 1e-9
/// (guards against toolchain drift silently moving the reference).
const ORACLE_LIFESPAN: f64 = 2.364643694611;

/// The adaptive integrator's answer on the same problem, frozen as a
/// regression pin (its distance to the oracle is 9.4e-8 relative — the
/// criterion tolerance is 1e-3).
const ADAPTIVE_LIFESPAN_PIN: f64 = 2.364643916804787;

/// Acceptance tolerance: the adaptive estimate must match the oracle to
/// 1e-3 relative.
const MATCH_REL_TOL: f64 = 1e-3;

fn oracle_march() -> &'static (Vec<(f64, f64)>, f64) {
    static MARCH: OnceLock<(Vec<(f64, f64)>, f64)> = OnceLock::new();
    MARCH.get_or_init(|| {
        let f = |u: f64, w: f64| (w, u.abs().powf(2.0) - w);
        let (mut u, mut w) = (2.0f64, 0.0f64);
        let mut t = 0.0f64;
        let mut crossings = Vec::new();
        let mut next = 0;
        while u < *ORACLE_THRESHOLDS.last().unwrap() {
            let (k1u, k1w) = f(u, w);
            let (k2u, k2w) = f(u + 0.5 * ORACLE_DT * k1u, w + 0.5 * ORACLE_DT * k1w);
            let (k3u, k3w) = f(u + 0.5 * ORACLE_DT * k2u, w + 0.5 * ORACLE_DT * k2w);
            let (k4u, k4w) = f(u + ORACLE_DT * k3u, w + ORACLE_DT * k3w);
            u += ORACLE_DT / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
            w += ORACLE_DT / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w);
            t += ORACLE_DT;
            while next < ORACLE_THRESHOLDS.len() && u >= ORACLE_THRESHOLDS[next] {
                crossings.push((ORACLE_THRESHOLDS[next], t));
                next += 1;
            }
            assert!(t < 100.0, "reference march failed to blow up");
        }
        let tail = (6.0 / ORACLE_THRESHOLDS.last().unwrap()).sqrt();
        (crossings, t + tail)
    })
}

fn isolated_vertex_problem(graph: &WeightedGraph) -> Problem<'_> {
    let o = graph.vertex("o").unwrap();
    let u0 = graphwave::GraphFunction::from_pairs([(o, 2.0)]);
    let u1 = graphwave::GraphFunction::zero();
    Problem::scalar(graph, 2.0, 1.0, u0, u1).unwrap()
}

fn single_vertex() -> WeightedGraph {
    let mut b = WeightedGraph::builder();
    b.add_vertex("o", 1.0).unwrap();
    b.build().unwrap()
}

#[test]
fn reference_march_reproduces_its_frozen_lifespan() {
    let (crossings, lifespan) = oracle_march();
    assert_eq!(crossings.len(), ORACLE_THRESHOLDS.len());
    assert!(
        (lifespan - ORACLE_LIFESPAN).abs() <= 1e-9,
        "reference drifted: {lifespan:.12} vs frozen {ORACLE_LIFESPAN:.12}"
    );
}

#[test]
fn adaptive_estimate_matches_the_reference() {
    let graph = single_vertex();
    let problem = isolated_vertex_problem(&graph);
    let rec = solver::estimate_lifespan(&problem, &SolverControls::default()).unwrap();
    let t_est = rec.lifespan().expect("isolated quadratic problem blows up");
    let (_, oracle) = oracle_march();
    let rel = (t_est - oracle).abs() / oracle;
    assert!(
        rel <= MATCH_REL_TOL,
        "adaptive {t_est:.9} vs oracle {oracle:.9}: relative error {rel:.3e}"
    );
    assert!(
        (t_est - ADAPTIVE_LIFESPAN_PIN).abs() <= 1e-6 * ADAPTIVE_LIFESPAN_PIN,
        "adaptive estimate moved: {t_est:.12} vs pinned {ADAPTIVE_LIFESPAN_PIN:.12}"
    );
}

#[test]
fn adaptive_crossing_times_match_the_reference() {
    let graph = single_vertex();
    let problem = isolated_vertex_problem(&graph);
    let rec = solver::estimate_lifespan(&problem, &SolverControls::default()).unwrap();
    let (oracle_crossings, _) = oracle_march();
    assert_eq!(rec.crossings.len(), 7, "default ladder runs 1e2..1e8");
    for crossing in &rec.crossings {
        let (_, oracle_t) = oracle_crossings
            .iter()
            .find(|(m, _)| *m == crossing.threshold)
            .expect("oracle recorded every default threshold");
        let rel = (crossing.time - oracle_t).abs() / oracle_t;
        assert!(
            rel <= 1e-3,
            "crossing of {:.0e}: adaptive {:.7} vs oracle {oracle_t:.7} (rel {rel:.2e})",
            crossing.threshold,
            crossing.time,
        );
    }
}
