//! Distance functions, balls, volumes, and the distance-Laplacian decay check.
//!
//! A [`GraphMetric`] fixes a base vertex x₀ and stores d(x₀, x) for every
//! vertex, together with the jump size L = sup over edges of |d(x) − d(y)|.
//! Three kinds are supported:
//!
//! * **Hop** — unit-weight shortest-path distance (BFS). On the ℓ¹-ball
//!   truncation of ℤⁿ this equals the ℓ¹ distance, because the truncation is
//!   geodesic: a shortest lattice path can always walk coordinate-wise toward
//!   the target without leaving the ball.
//! * **LatticeEuclidean** — d(x) = ‖x − x₀‖₂ from lattice coordinates. The
//!   jump size is still 1 (reverse triangle inequality on unit steps), and
//!   the Laplacian of this distance decays like 1/d, which makes it the right
//!   choice for the decay check on ℤⁿ with n ≥ 2 — the hop distance's
//!   Laplacian stalls at a constant on the axes there and decays only for
//!   n = 1.
//! * **Custom** — caller-supplied per-vertex distances, validated for the
//!   jump-size bound; the triangle inequality is the caller's contract.
//!
//! Every metric carries a `trusted_radius`: balls up to that radius are
//! provably unclipped by the truncation, so their volumes are the true
//! (untruncated) ones. Volume queries beyond it are refused rather than
//! silently undercounted.

use crate::csv;
use crate::error::MetricError;
use crate::graph::{VertexId, WeightedGraph};
use crate::scaling;
use std::collections::VecDeque;

/// Which distance function a [`GraphMetric`] stores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum MetricKind {
    Hop,
    LatticeEuclidean,
    Custom,
}

/// Distances from a base vertex, with jump size and trusted-radius metadata.
#[derive(Debug, Clone)]
pub struct GraphMetric {
    base: VertexId,
    dist: Vec<f64>,
    jump_size: f64,
    kind: MetricKind,
    trusted_radius: f64,
}

impl GraphMetric {
    /// Unit-weight shortest-path (BFS) distances from `x0`.
    ///
    /// The trusted radius is the distance to the nearest boundary-flagged
    /// vertex (infinite when there is none): any unstored vertex lies behind
    /// a boundary vertex, so balls up to that radius are complete. For
    /// ball-truncated lattice builds this is exact; for arbitrary user
    /// truncations it additionally assumes stored shortest paths are true
    /// shortest paths (no shortcut through unstored territory), which holds
    /// for geodesic truncations.
    pub fn hop(graph: &WeightedGraph, x0: VertexId) -> Result<GraphMetric, MetricError> {
        let n = graph.vertex_count();
        let mut dist = vec![f64::INFINITY; n];
        let mut queue = VecDeque::new();
        dist[x0.index()] = 0.0;
        queue.push_back(x0);
        while let Some(x) = queue.pop_front() {
            for &(y, w) in graph.neighbors(x) {
                if w > 0.0 && dist[y.index()].is_infinite() {
                    dist[y.index()] = dist[x.index()] + 1.0;
                    queue.push_back(y);
                }
            }
        }
        if dist.iter().any(|d| d.is_infinite()) {
            return Err(MetricError::Disconnected(graph.label(x0).to_string()));
        }
        let trusted = min_boundary_dist(graph, &dist).unwrap_or(f64::INFINITY);
        Ok(GraphMetric {
            base: x0,
            dist,
            jump_size: 1.0,
            kind: MetricKind::Hop,
            trusted_radius: trusted,
        })
    }

    /// Euclidean distances ‖x − x₀‖₂ from lattice coordinates.
    ///
    /// Balls B₂(x₀, r) sit inside the stored ℓ¹ ball as long as
    /// √n·r + ‖x₀‖₁ ≤ truncation radius, which gives the trusted radius.
    pub fn lattice_euclidean(
        graph: &WeightedGraph,
        x0: VertexId,
    ) -> Result<GraphMetric, MetricError> {
        let info = graph.lattice().ok_or(MetricError::NotALattice)?;
        let c0 = &info.coords[x0.index()];
        let dist: Vec<f64> = info
            .coords
            .iter()
            .map(|c| {
                c.iter()
                    .zip(c0)
                    .map(|(&a, &b)| ((a - b) as f64).powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .collect();
        let x0_l1: i64 = c0.iter().map(|v| v.abs()).sum();
        let trusted = (info.radius as f64 - x0_l1 as f64) / (info.n as f64).sqrt();
        Ok(GraphMetric {
            base: x0,
            dist,
            jump_size: 1.0,
            kind: MetricKind::LatticeEuclidean,
            trusted_radius: trusted,
        })
    }

    /// Wraps caller-supplied distances. Validates d(x₀) = 0, nonnegativity,
    /// finiteness, and the jump-size bound on every edge; the triangle
    /// inequality is a precondition on the caller's side.
    pub fn custom(
        graph: &WeightedGraph,
        x0: VertexId,
        dist: Vec<f64>,
        jump_size: f64,
    ) -> Result<GraphMetric, MetricError> {
        if dist.len() != graph.vertex_count() {
            return Err(MetricError::BadCustomMetric(format!(
                "distance table has {} entries for {} vertices",
                dist.len(),
                graph.vertex_count()
            )));
        }
        if dist[x0.index()] != 0.0 {
            return Err(MetricError::BadCustomMetric(format!(
                "d(x0) must be 0, got {}",
                dist[x0.index()]
            )));
        }
        if let Some(bad) = dist.iter().position(|d| !d.is_finite() || *d < 0.0) {
            return Err(MetricError::BadCustomMetric(format!(
                "d({}) = {} is not a nonnegative finite value",
                graph.label(VertexId(bad)),
                dist[bad]
            )));
        }
        for x in graph.vertices() {
            for &(y, w) in graph.neighbors(x) {
                if w > 0.0 {
                    let jump = (dist[x.index()] - dist[y.index()]).abs();
                    if jump > jump_size + 1e-12 {
                        return Err(MetricError::BadCustomMetric(format!(
                            "edge {} -- {} jumps by {jump}, above the declared jump size {jump_size}",
                            graph.label(x),
                            graph.label(y)
                        )));
                    }
                }
            }
        }
        let trusted = min_boundary_dist(graph, &dist)
            .map(|d| d - jump_size)
            .unwrap_or(f64::INFINITY);
        Ok(GraphMetric {
            base: x0,
            dist,
            jump_size,
            kind: MetricKind::Custom,
            trusted_radius: trusted,
        })
    }

    pub fn base(&self) -> VertexId {
        self.base
    }

    pub fn dist(&self, v: VertexId) -> f64 {
        self.dist[v.index()]
    }

    pub fn distances(&self) -> &[f64] {
        &self.dist
    }

    pub fn jump_size(&self) -> f64 {
        self.jump_size
    }

    pub fn kind(&self) -> MetricKind {
        self.kind
    }

    /// Largest ball radius whose volume is provably untruncated.
    pub fn trusted_radius(&self) -> f64 {
        self.trusted_radius
    }

    /// Measured sup over positive-weight edges of |d(x) − d(y)|.
    pub fn measured_jump(&self, graph: &WeightedGraph) -> f64 {
        let mut sup: f64 = 0.0;
        for x in graph.vertices() {
            for &(y, w) in graph.neighbors(x) {
                if w > 0.0 {
                    sup = sup.max((self.dist[x.index()] - self.dist[y.index()]).abs());
                }
            }
        }
        sup
    }
}

fn min_boundary_dist(graph: &WeightedGraph, dist: &[f64]) -> Option<f64> {
    graph
        .boundary_vertices()
        .map(|v| dist[v.index()])
        .min_by(|a, b| a.total_cmp(b))
}

/// Ball volumes Vol(B(x₀, r)) = Σ_{d(x₀,x) ≤ r} μ(x) at a ladder of radii.
#[derive(Debug, Clone)]
pub struct BallTable {
    pub radii: Vec<f64>,
    pub counts: Vec<usize>,
    pub volumes: Vec<f64>,
}

impl BallTable {
    /// Serializes as `r,count,volume` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,count,volume\n");
        for i in 0..self.radii.len() {
            out.push_str(&csv::row(&[
                self.radii[i].to_string(),
                self.counts[i].to_string(),
                self.volumes[i].to_string(),
            ]));
            out.push('\n');
        }
        out
    }
}

/// Computes Vol(B(x₀, r)) and vertex counts for each requested radius.
/// Radii must be nondecreasing and must stay within the metric's trusted
/// radius — a clipped ball would silently undercount.
pub fn ball_volumes(
    graph: &WeightedGraph,
    metric: &GraphMetric,
    radii: &[f64],
) -> Result<BallTable, MetricError> {
    if radii.is_empty() {
        return Err(MetricError::InsufficientData("no radii given".into()));
    }
    if radii.windows(2).any(|w| w[0] > w[1]) {
        return Err(MetricError::InsufficientData(
            "radii must be nondecreasing".into(),
        ));
    }
    let largest = *radii.last().unwrap();
    if largest > metric.trusted_radius() {
        return Err(MetricError::RadiusOutsideTrusted {
            radius: largest,
            trusted: metric.trusted_radius(),
        });
    }

    // One sorted pass, then prefix sums.
    let mut by_dist: Vec<(f64, f64)> = graph
        .vertices()
        .map(|v| (metric.dist(v), graph.mu(v)))
        .collect();
    by_dist.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut prefix_vol = Vec::with_capacity(by_dist.len());
    let mut acc = 0.0;
    for &(_, mu) in &by_dist {
        acc += mu;
        prefix_vol.push(acc);
    }

    let mut counts = Vec::with_capacity(radii.len());
    let mut volumes = Vec::with_capacity(radii.len());
    for &r in radii {
        let k = by_dist.partition_point(|&(d, _)| d <= r);
        counts.push(k);
        volumes.push(if k == 0 { 0.0 } else { prefix_vol[k - 1] });
    }
    Ok(BallTable {
        radii: radii.to_vec(),
        counts,
        volumes,
    })
}

/// Least-squares slope of log Vol against log r over radii ≥ `r_min`,
/// with the coefficient of determination. Needs at least 4 usable radii
/// with distinct volumes.
pub fn fit_volume_growth(table: &BallTable, r_min: f64) -> Result<(f64, f64), MetricError> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for i in 0..table.radii.len() {
        if table.radii[i] >= r_min && table.radii[i] > 0.0 && table.volumes[i] > 0.0 {
            xs.push(table.radii[i].ln());
            ys.push(table.volumes[i].ln());
        }
    }
    let mut distinct = ys.clone();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if xs.len() < 4 || distinct.len() < 4 {
        return Err(MetricError::InsufficientData(format!(
            "need at least 4 radii >= {r_min} with distinct volumes, have {} ({} distinct)",
            xs.len(),
            distinct.len()
        )));
    }
    let fit = scaling::linear_fit(&xs, &ys)
        .map_err(|e| MetricError::InsufficientData(e.to_string()))?;
    Ok((fit.slope, fit.r_squared))
}

/// One tested vertex of the decay check.
#[derive(Debug, Clone)]
pub struct DecayRow {
    pub vertex: String,
    pub d: f64,
    /// |Δ d(x₀,·)(x)|
    pub lap_abs: f64,
    /// |Δ d(x₀,·)(x)| · d(x₀,x)^ν
    pub product: f64,
}

/// Report of the distance-Laplacian decay check: how fast Δ d(x₀,·) falls off
/// with distance, measured as sup |Δd|·d^ν over interior vertices beyond R₀.
#[derive(Debug, Clone)]
pub struct DecayReport {
    pub nu: f64,
    pub r0: f64,
    pub threshold: f64,
    pub rows: Vec<DecayRow>,
    /// sup over tested vertices of |Δd|·d^ν — the measured decay constant.
    pub sup_product: f64,
    pub argmax: Option<String>,
    pub pass: bool,
}

/// Default pass threshold for [`check_distance_laplacian_decay`].
pub const DEFAULT_DECAY_THRESHOLD: f64 = 10.0;

impl DecayReport {
    /// Serializes as `vertex,d,abs_lap,product` rows (product = |Δd|·d^ν).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("vertex,d,abs_lap,product\n");
        for row in &self.rows {
            out.push_str(&csv::row(&[
                row.vertex.clone(),
                row.d.to_string(),
                row.lap_abs.to_string(),
                row.product.to_string(),
            ]));
            out.push('\n');
        }
        out
    }
}

/// Evaluates |Δ d(x₀,·)(x)| · d(x₀,x)^ν over every interior vertex with
/// d(x₀,x) > r0 and reports the sup against `threshold`. Boundary vertices
/// are excluded — their truncated neighborhoods would fake the Laplacian.
pub fn check_distance_laplacian_decay(
    graph: &WeightedGraph,
    metric: &GraphMetric,
    nu: f64,
    r0: f64,
    threshold: f64,
) -> Result<DecayReport, MetricError> {
    let mut rows = Vec::new();
    let mut sup = f64::NEG_INFINITY;
    let mut argmax = None;
    for x in graph.vertices() {
        if graph.is_boundary(x) || metric.dist(x) <= r0 {
            continue;
        }
        let d = metric.dist(x);
        let mut acc = 0.0;
        for &(y, w) in graph.neighbors(x) {
            acc += w * (metric.dist(y) - d);
        }
        let lap_abs = (acc / graph.mu(x)).abs();
        let product = lap_abs * d.powf(nu);
        if product > sup {
            sup = product;
            argmax = Some(graph.label(x).to_string());
        }
        rows.push(DecayRow {
            vertex: graph.label(x).to_string(),
            d,
            lap_abs,
            product,
        });
    }
    if rows.is_empty() {
        return Err(MetricError::InsufficientData(format!(
            "no interior vertices beyond r0 = {r0}"
        )));
    }
    rows.sort_by(|a, b| a.d.total_cmp(&b.d).then_with(|| a.vertex.cmp(&b.vertex)));
    Ok(DecayReport {
        nu,
        r0,
        threshold,
        sup_product: sup,
        argmax,
        pass: sup <= threshold,
        rows,
    })
}
