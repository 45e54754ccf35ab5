//! Randomized cross-module invariants.
//!
//! The unit tests inside each module pin hand-computed examples; the tests
//! here hammer the *identities* — statements that must hold for every
//! admissible input — with seeded random data, so a structural mistake
//! cannot hide behind a lucky example. All randomness is seeded: failures
//! reproduce bit-for-bit.

use graphwave::solver::{self, Problem, SolverControls, Trajectory, Verdict};
use graphwave::{
    functionals, CutoffParams, GraphFunction, GraphMetric, VertexId, WeightedGraph,
};
use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};

/// The summation identity Σ μ (Δf·g − f·Δg) = 0 is algebraically exact; the
/// only room is f64 rounding across a few thousand products, which stays
/// below 1e-13 of the term scale on these supports. 1e-10 leaves three
/// decades of slack and still catches any structural error outright.
const IBP_REL_TOL: f64 = 1e-10;

/// A random function supported on `support_size` random interior vertices,
/// values uniform in [−1, 1).
fn random_function(
    interior: &[VertexId],
    rng: &mut StdRng,
    support_size: usize,
) -> GraphFunction {
    GraphFunction::from_pairs((0..support_size).map(|_| {
        let v = interior[rng.random_range(0..interior.len())];
        (v, rng.random_range(-1.0..1.0))
    }))
}

fn interior_vertices(graph: &WeightedGraph) -> Vec<VertexId> {
    graph.vertices().filter(|&v| !graph.is_boundary(v)).collect()
}

/// The natural magnitude of the two sides being cancelled:
/// Σ μ (|Δf·g| + |f·Δg|) over the union of supports.
fn ibp_scale(graph: &WeightedGraph, f: &GraphFunction, g: &GraphFunction) -> f64 {
    let mut support: Vec<VertexId> = f.support().chain(g.support()).collect();
    support.sort_unstable();
    support.dedup();
    let mut scale = 0.0;
    for &x in &support {
        let lf = graph.laplacian_at(f, x).unwrap();
        let lg = graph.laplacian_at(g, x).unwrap();
        scale += graph.mu(x) * ((lf * g.get(x)).abs() + (f.get(x) * lg).abs());
    }
    scale
}

#[test]
fn ibp_identity_on_seeded_lattice_pairs() {
    for (n, radius) in [(1usize, 32u32), (2, 12), (3, 8)] {
        let graph = WeightedGraph::build_lattice(n, radius).unwrap();
        let interior = interior_vertices(&graph);
        let mut rng = StdRng::seed_from_u64(0xC0FFEE + n as u64);
        for trial in 0..100 {
            let (sf, sg) = (rng.random_range(1..=12), rng.random_range(1..=12));
            let f = random_function(&interior, &mut rng, sf);
            let g = random_function(&interior, &mut rng, sg);
            let defect = graph.integration_by_parts_defect(&f, &g).unwrap();
            let scale = ibp_scale(&graph, &f, &g).max(1e-30);
            assert!(
                defect.abs() <= IBP_REL_TOL * scale,
                "lattice n={n} trial {trial}: defect {defect:.3e} vs scale {scale:.3e}"
            );
        }
    }
}

#[test]
fn ibp_identity_on_seeded_irregular_graphs() {
    let mut rng = StdRng::seed_from_u64(0x1BAD5EED);
    for trial in 0..40 {
        // Random tree plus a handful of chords: connected by construction,
        // with rough weights and measures to stress the μ-weighting.
        let size = rng.random_range(30..=120);
        let mut b = WeightedGraph::builder();
        for i in 0..size {
            b.add_vertex(&format!("v{i}"), rng.random_range(0.25..4.0))
                .unwrap();
        }
        for i in 1..size {
            let parent = rng.random_range(0..i);
            b.add_edge(VertexId(i), VertexId(parent), rng.random_range(0.1..5.0))
                .unwrap();
        }
        for _ in 0..rng.random_range(0..20usize) {
            let a = rng.random_range(0..size);
            let c = rng.random_range(0..size);
            if a != c {
                // Parallel edges overwrite rather than duplicate; either way
                // the result is still a symmetric weighted graph.
                let _ = b.add_edge(VertexId(a), VertexId(c), rng.random_range(0.1..5.0));
            }
        }
        let graph = b.build().unwrap();
        let interior = interior_vertices(&graph);
        for _ in 0..4 {
            let (sf, sg) = (rng.random_range(1..=10), rng.random_range(1..=10));
            let f = random_function(&interior, &mut rng, sf);
            let g = random_function(&interior, &mut rng, sg);
            let defect = graph.integration_by_parts_defect(&f, &g).unwrap();
            let scale = ibp_scale(&graph, &f, &g).max(1e-30);
            assert!(
                defect.abs() <= IBP_REL_TOL * scale,
                "irregular trial {trial}: defect {defect:.3e} vs scale {scale:.3e}"
            );
        }
    }
}

#[test]
fn ibp_defect_flips_sign_exactly_when_arguments_swap() {
    // Term by term the swapped defect is the IEEE negation of the original
    // (products commute, subtraction is sign-antisymmetric, and the
    // evaluation order over the sorted support union is identical), so the
    // equality here is exact, not approximate.
    let graph = WeightedGraph::build_lattice(2, 10).unwrap();
    let interior = interior_vertices(&graph);
    let mut rng = StdRng::seed_from_u64(0x5117);
    for _ in 0..20 {
        let f = random_function(&interior, &mut rng, 8);
        let g = random_function(&interior, &mut rng, 8);
        let fg = graph.integration_by_parts_defect(&f, &g).unwrap();
        let gf = graph.integration_by_parts_defect(&g, &f).unwrap();
        assert_eq!(fg, -gf, "defect(f,g) = {fg:e}, defect(g,f) = {gf:e}");
    }
}

#[test]
fn blowup_crossing_ladders_are_monotone_with_shrinking_gaps() {
    // Any blow-up verdict must come with an internally consistent ladder:
    // crossing times nondecreasing in the threshold, successive gaps
    // shrinking (the sup norm accelerates), and the extrapolated lifespan
    // past the last crossing.
    let graph = WeightedGraph::build_lattice(1, 128).unwrap();
    let center = graph.vertex("0").unwrap();
    let (u0, u1) = solver::default_bump(&graph, center, 3.0).unwrap();
    let mut rng = StdRng::seed_from_u64(0xB10FF);
    let mut blew_up = 0;
    for p in [1.7f64, 2.1, 2.5, 2.9] {
        let eps = rng.random_range(0.35..0.65);
        let problem = Problem::scalar(&graph, p, eps, u0.clone(), u1.clone()).unwrap();
        let controls = SolverControls { t_max: 2e3, ..SolverControls::default() };
        let rec = solver::estimate_lifespan(&problem, &controls).unwrap();
        let Verdict::BlowUp {
            estimated_lifespan,
            low_confidence,
        } = rec.verdict
        else {
            continue;
        };
        blew_up += 1;
        assert!(!low_confidence, "p={p} eps={eps:.3}: full ladder expected");
        for pair in rec.crossings.windows(2) {
            assert!(pair[1].threshold > pair[0].threshold);
            assert!(
                pair[1].time >= pair[0].time,
                "p={p}: crossing times must be nondecreasing"
            );
        }
        let gaps: Vec<f64> = rec.crossings.windows(2).map(|w| w[1].time - w[0].time).collect();
        for pair in gaps.windows(2) {
            assert!(
                pair[1] < pair[0],
                "p={p} eps={eps:.3}: gaps {gaps:?} must shrink toward blow-up"
            );
        }
        assert!(
            estimated_lifespan >= rec.crossings.last().unwrap().time,
            "p={p}: extrapolation cannot precede the last crossing"
        );
    }
    assert!(
        blew_up >= 3,
        "expected at least 3 of 4 configurations to blow up, got {blew_up}"
    );
}

#[test]
fn log_average_stays_below_its_cap_on_synthetic_trajectories() {
    // 𝓗(R) ≤ (ln 2 / 4) · P_R holds snapshot by snapshot for *any* field —
    // the scale-integrated kernel is pointwise below (ln 2 / 4) Φ_R — so it
    // must survive arbitrary (even unphysical) snapshot data.
    let graph = WeightedGraph::build_lattice(1, 12).unwrap();
    let center = graph.vertex("0").unwrap();
    let metric = GraphMetric::hop(&graph, center).unwrap();
    let (u0, u1) = solver::default_bump(&graph, center, 1.0).unwrap();
    let problem = Problem::scalar(&graph, 2.0, 0.1, u0, u1).unwrap();
    let params = CutoffParams::auto(1.0, 2.0, None, 4.0).unwrap();
    let mut rng = StdRng::seed_from_u64(0x4EA5);
    for trial in 0..25 {
        let times: Vec<f64> = (0..=34).map(|k| k as f64 * 0.5).collect();
        let snapshots: Vec<Vec<f64>> = times
            .iter()
            .map(|_| {
                (0..graph.vertex_count())
                    .map(|_| rng.random_range(-5.0..5.0))
                    .collect()
            })
            .collect();
        let t_end = *times.last().unwrap();
        let traj = Trajectory {
            times,
            snapshots,
            snapshots_second: None,
            final_state: Vec::new(),
            sup_series: Vec::new(),
            crossings: Vec::new(),
            verdict: Verdict::GlobalCandidate { t_reached: t_end },
            steps_accepted: 0,
            steps_rejected: 0,
            t_end,
            sup_end: 5.0,
            settings_hash: 0,
        };
        let report = functionals::functional_report(&traj, &problem, &metric, &params).unwrap();
        assert!(
            report.h <= report.h_cap * (1.0 + 1e-12),
            "trial {trial}: H = {} exceeds cap {}",
            report.h,
            report.h_cap
        );
    }
}
