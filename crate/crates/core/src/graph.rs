//! Weighted graphs (V, ω, μ), their Laplacian, and structural validation.
//!
//! A graph here is a finite store with three ingredients: a vertex set V, a
//! symmetric edge weight ω: V×V → [0,∞) with zero diagonal, and a positive
//! node measure μ: V → (0,∞). The Laplacian acts on functions f: V → ℝ by
//!
//! ```text
//! Δf(x) = (1/μ(x)) · Σ_{y∼x} ω(x,y) (f(y) − f(x))
//! ```
//!
//! where y∼x ranges over stored neighbors with ω(x,y) > 0.
//!
//! The mathematical model is an *infinite* locally finite graph; what we store
//! is a finite truncation. Vertices whose neighborhood was clipped by the
//! truncation carry a `boundary` flag plus the weight they lost
//! (`missing_weight`), so downstream code can either avoid them (exact
//! analysis wants complete neighborhoods) or close the system with a Dirichlet
//! convention (the solver treats the missing neighbors as frozen at zero).
//!
//! Graphs are immutable after construction. [`GraphBuilder`] enforces the
//! structural invariants (symmetry by construction, positive μ, connectivity);
//! [`WeightedGraph::from_raw_parts`] deliberately skips them so audit tooling
//! can inspect malformed inputs with [`WeightedGraph::validate_structure`].

use std::collections::HashMap;
use std::collections::VecDeque;
use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::GraphError;

/// Dense index of a vertex within one graph. Only meaningful together with
/// the graph that issued it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexId(pub usize);

impl VertexId {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Extra bookkeeping carried by lattice builds: dimension, truncation radius,
/// and the integer coordinates of every vertex (indexed by `VertexId`).
#[derive(Debug, Clone)]
pub struct LatticeInfo {
    pub n: usize,
    pub radius: u32,
    pub coords: Vec<Vec<i64>>,
}

/// A finite weighted graph: the triple (V, ω, μ) plus truncation metadata.
#[derive(Debug, Clone)]
pub struct WeightedGraph {
    labels: Vec<String>,
    index: HashMap<String, VertexId>,
    mu: Vec<f64>,
    /// Per-vertex neighbor list `(y, ω(x,y))`. Built symmetric; `from_raw_parts`
    /// may store anything (that is the point of the audit path).
    adj: Vec<Vec<(VertexId, f64)>>,
    /// True where the truncation clipped the neighborhood.
    boundary: Vec<bool>,
    /// Total ω(x, ·) lost to clipped neighbors; 0 at interior vertices.
    missing_weight: Vec<f64>,
    lattice: Option<LatticeInfo>,
}

/// Default cap on lattice vertex counts; [`WeightedGraph::build_lattice_capped`]
/// accepts an explicit one.
pub const DEFAULT_VERTEX_CAP: usize = 20_000_000;

impl WeightedGraph {
    pub fn builder() -> GraphBuilder {
        GraphBuilder::new()
    }

    /// Assembles a graph from already-indexed parts without any validation —
    /// no symmetry, connectivity, or positivity checks. This exists so that
    /// [`validate_structure`](Self::validate_structure) has something to catch;
    /// everything else should go through the builder.
    pub fn from_raw_parts(
        labels: Vec<String>,
        mu: Vec<f64>,
        adj: Vec<Vec<(VertexId, f64)>>,
        boundary: Vec<bool>,
    ) -> Self {
        let index = labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.clone(), VertexId(i)))
            .collect();
        let n = labels.len();
        WeightedGraph {
            labels,
            index,
            mu,
            adj,
            boundary,
            missing_weight: vec![0.0; n],
            lattice: None,
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.labels.len()
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> {
        (0..self.labels.len()).map(VertexId)
    }

    pub fn label(&self, v: VertexId) -> &str {
        &self.labels[v.0]
    }

    /// Looks a vertex up by its label.
    pub fn vertex(&self, label: &str) -> Option<VertexId> {
        self.index.get(label).copied()
    }

    pub fn mu(&self, v: VertexId) -> f64 {
        self.mu[v.0]
    }

    pub fn neighbors(&self, v: VertexId) -> &[(VertexId, f64)] {
        &self.adj[v.0]
    }

    pub fn is_boundary(&self, v: VertexId) -> bool {
        self.boundary[v.0]
    }

    pub fn boundary_vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.labels.len())
            .map(VertexId)
            .filter(|v| self.boundary[v.0])
    }

    /// Weight to neighbors lost by the truncation (0 at interior vertices).
    pub fn missing_weight(&self, v: VertexId) -> f64 {
        self.missing_weight[v.0]
    }

    pub fn lattice(&self) -> Option<&LatticeInfo> {
        self.lattice.as_ref()
    }

    /// Σμ over the whole stored vertex set.
    pub fn total_volume(&self) -> f64 {
        self.mu.iter().sum()
    }

    /// The Laplacian Δf(x) = (1/μ(x)) Σ_{y∼x} ω(x,y)(f(y) − f(x)) over stored
    /// neighbors. At boundary vertices this is the *induced subgraph* value,
    /// which differs from the untruncated one — callers that need exactness
    /// must stay interior (see [`Self::is_boundary`]).
    pub fn laplacian_at(&self, f: &GraphFunction, x: VertexId) -> Result<f64, GraphError> {
        if x.0 >= self.labels.len() {
            return Err(GraphError::UnknownVertex(format!("#{}", x.0)));
        }
        let fx = f.get(x);
        let mut acc = 0.0;
        for &(y, w) in &self.adj[x.0] {
            acc += w * (f.get(y) - fx);
        }
        Ok(acc / self.mu[x.0])
    }

    /// Defect of the integration-by-parts identity,
    /// Σ_x Δf(x) g(x) μ(x) − Σ_x f(x) Δg(x) μ(x), which vanishes (up to
    /// rounding) whenever f and g are compactly supported with complete
    /// neighborhoods.
    ///
    /// Errors if either support touches a boundary vertex: the identity is a
    /// statement about the untruncated graph, and Δ at a clipped vertex is not
    /// the true value.
    pub fn integration_by_parts_defect(
        &self,
        f: &GraphFunction,
        g: &GraphFunction,
    ) -> Result<f64, GraphError> {
        if f.default != 0.0 {
            return Err(GraphError::NotCompactlySupported(f.default));
        }
        if g.default != 0.0 {
            return Err(GraphError::NotCompactlySupported(g.default));
        }
        // Δf·g is supported on supp g and f·Δg on supp f, so the evaluation
        // set is the union of the two supports; each of those vertices must
        // have a complete neighborhood.
        let mut support: Vec<VertexId> = f.support().chain(g.support()).collect();
        support.sort_unstable();
        support.dedup();
        for &x in &support {
            if x.0 >= self.labels.len() {
                return Err(GraphError::UnknownVertex(format!("#{}", x.0)));
            }
            if self.boundary[x.0] {
                return Err(GraphError::IncompleteNeighborhood(
                    self.labels[x.0].clone(),
                ));
            }
        }
        let mut defect = 0.0;
        for &x in &support {
            let lf = self.laplacian_at(f, x)?;
            let lg = self.laplacian_at(g, x)?;
            defect += (lf * g.get(x) - f.get(x) * lg) * self.mu[x.0];
        }
        Ok(defect)
    }

    /// Builds the induced subgraph of the n-dimensional integer lattice ℤⁿ on
    /// the ℓ¹ ball of the given radius around the origin: vertices are integer
    /// tuples with Σ|xᵢ| ≤ radius, ω ≡ 1 on nearest-neighbor pairs, μ ≡ 2n.
    /// Vertices at ℓ¹ distance exactly `radius` are flagged as boundary.
    pub fn build_lattice(n: usize, radius: u32) -> Result<WeightedGraph, GraphError> {
        Self::build_lattice_capped(n, radius, DEFAULT_VERTEX_CAP)
    }

    /// [`build_lattice`](Self::build_lattice) with an explicit vertex cap.
    pub fn build_lattice_capped(
        n: usize,
        radius: u32,
        cap: usize,
    ) -> Result<WeightedGraph, GraphError> {
        assert!(n >= 1, "lattice dimension must be at least 1");
        assert!(radius >= 1, "lattice radius must be at least 1");
        let count = l1_ball_cardinality(n, radius);
        if count > cap as u128 {
            return Err(GraphError::TooLarge {
                n,
                radius,
                would_have: count,
                cap,
            });
        }
        let count = count as usize;

        // Enumerate the ball lexicographically (first coordinate outermost) so
        // vertex ids are reproducible.
        let mut coords: Vec<Vec<i64>> = Vec::with_capacity(count);
        let mut current = vec![0i64; n];
        enumerate_l1_ball(n, radius as i64, 0, radius as i64, &mut current, &mut coords);
        debug_assert_eq!(coords.len(), count);

        let mut coord_index: HashMap<&[i64], usize> = HashMap::with_capacity(count);
        for (i, c) in coords.iter().enumerate() {
            coord_index.insert(c.as_slice(), i);
        }

        let mu = vec![2.0 * n as f64; count];
        let mut labels = Vec::with_capacity(count);
        let mut boundary = Vec::with_capacity(count);
        let mut adj: Vec<Vec<(VertexId, f64)>> = vec![Vec::with_capacity(2 * n); count];
        for (i, c) in coords.iter().enumerate() {
            labels.push(coord_label(c));
            let norm: i64 = c.iter().map(|v| v.abs()).sum();
            boundary.push(norm == radius as i64);
            // Add each edge once, from the + side, into both lists.
            let mut probe = c.clone();
            for k in 0..n {
                probe[k] += 1;
                if let Some(&j) = coord_index.get(probe.as_slice()) {
                    adj[i].push((VertexId(j), 1.0));
                    adj[j].push((VertexId(i), 1.0));
                }
                probe[k] -= 1;
            }
        }

        let missing_weight = adj
            .iter()
            .map(|nbrs| 2.0 * n as f64 - nbrs.iter().map(|&(_, w)| w).sum::<f64>())
            .collect();

        let index = labels
            .iter()
            .enumerate()
            .map(|(i, l): (usize, &String)| (l.clone(), VertexId(i)))
            .collect();

        Ok(WeightedGraph {
            labels,
            index,
            mu,
            adj,
            boundary,
            missing_weight,
            lattice: Some(LatticeInfo {
                n,
                radius,
                coords,
            }),
        })
    }

    /// Audits the structural assumptions without failing: symmetry of ω, zero
    /// diagonal, connectivity, and the weight/measure ratio
    /// sup_x Σ_y ω(x,y)/μ(x) compared against `c_bound`.
    pub fn validate_structure(&self, c_bound: f64) -> ValidationReport {
        let nv = self.labels.len();

        // ω(x,y) == ω(y,x), bit for bit, both directions present.
        let mut symmetric = true;
        'outer: for x in 0..nv {
            for &(y, w) in &self.adj[x] {
                if y.0 == x {
                    continue; // diagonal handled below
                }
                let back = self.adj[y.0]
                    .iter()
                    .find(|&&(z, _)| z.0 == x)
                    .map(|&(_, w)| w);
                if back != Some(w) {
                    symmetric = false;
                    break 'outer;
                }
            }
        }

        let zero_diagonal = (0..nv)
            .all(|x| self.adj[x].iter().all(|&(y, w)| y.0 != x || w == 0.0));

        let connected = if nv == 0 {
            true
        } else {
            self.reachable_from(VertexId(0)) == nv
        };

        let mut ratio_sup = 0.0;
        let mut ratio_argmax = None;
        for x in 0..nv {
            let total: f64 = self.adj[x].iter().map(|&(_, w)| w).sum();
            let ratio = total / self.mu[x];
            if ratio > ratio_sup {
                ratio_sup = ratio;
                ratio_argmax = Some(VertexId(x));
            }
        }

        ValidationReport {
            symmetric,
            zero_diagonal,
            connected,
            weight_measure_ratio: ratio_sup,
            ratio_argmax,
            c_bound,
            ratio_within_bound: ratio_sup <= c_bound,
        }
    }

    fn reachable_from(&self, root: VertexId) -> usize {
        let mut seen = vec![false; self.labels.len()];
        let mut queue = VecDeque::new();
        seen[root.0] = true;
        queue.push_back(root);
        let mut count = 1;
        while let Some(x) = queue.pop_front() {
            for &(y, w) in &self.adj[x.0] {
                if w > 0.0 && !seen[y.0] {
                    seen[y.0] = true;
                    count += 1;
                    queue.push_back(y);
                }
            }
        }
        count
    }

    /// Writes the graph in the line-oriented text format:
    ///
    /// ```text
    /// graph <num_vertices>
    /// v <label> <mu>
    /// e <label1> <label2> <omega>
    /// ```
    ///
    /// `#` starts a comment. Weights and measures are serialized with 17
    /// significant digits, so the format round-trips f64 values exactly.
    /// Boundary flags are *not* part of the format: a loaded graph is treated
    /// as complete.
    pub fn to_writer<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "graph {}", self.labels.len())?;
        for (i, label) in self.labels.iter().enumerate() {
            writeln!(w, "v {} {:.16e}", label, self.mu[i])?;
        }
        for x in 0..self.labels.len() {
            for &(y, weight) in &self.adj[x] {
                if x < y.0 {
                    writeln!(
                        w,
                        "e {} {} {:.16e}",
                        self.labels[x], self.labels[y.0], weight
                    )?;
                }
            }
        }
        Ok(())
    }

    pub fn write_to(&self, path: &Path) -> Result<(), GraphError> {
        let wrap = |source| GraphError::Io {
            path: path.display().to_string(),
            source,
        };
        let mut file = std::io::BufWriter::new(std::fs::File::create(path).map_err(wrap)?);
        self.to_writer(&mut file).map_err(wrap)?;
        file.flush().map_err(wrap)
    }

    /// Parses the text format written by [`Self::to_writer`]. Strict: unknown
    /// directives, duplicate vertices or edges, references to undeclared
    /// vertices, and malformed numbers are all errors with line numbers.
    /// Edges with ω = 0 are dropped (they are not edges).
    pub fn from_reader<R: BufRead>(reader: R, origin: &str) -> Result<WeightedGraph, GraphError> {
        let mut builder = GraphBuilder::new();
        let mut declared: Option<usize> = None;

        let fail = |line: usize, msg: String| GraphError::Parse {
            path: origin.to_string(),
            line,
            msg,
        };

        for (lineno, line) in reader.lines().enumerate() {
            let lineno = lineno + 1;
            let line = line.map_err(|source| GraphError::Io {
                path: origin.to_string(),
                source,
            })?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            match parts.next() {
                Some("graph") => {
                    let n: usize = parts
                        .next()
                        .ok_or_else(|| fail(lineno, "missing vertex count".into()))?
                        .parse()
                        .map_err(|e| fail(lineno, format!("bad vertex count: {e}")))?;
                    declared = Some(n);
                }
                Some("v") => {
                    let label = parts
                        .next()
                        .ok_or_else(|| fail(lineno, "missing vertex label".into()))?;
                    let mu: f64 = parts
                        .next()
                        .ok_or_else(|| fail(lineno, "missing node measure".into()))?
                        .parse()
                        .map_err(|e| fail(lineno, format!("bad node measure: {e}")))?;
                    builder
                        .add_vertex(label, mu)
                        .map_err(|e| fail(lineno, e.to_string()))?;
                }
                Some("e") => {
                    let a = parts
                        .next()
                        .ok_or_else(|| fail(lineno, "missing edge endpoint".into()))?;
                    let b = parts
                        .next()
                        .ok_or_else(|| fail(lineno, "missing edge endpoint".into()))?;
                    let weight: f64 = parts
                        .next()
                        .ok_or_else(|| fail(lineno, "missing edge weight".into()))?
                        .parse()
                        .map_err(|e| fail(lineno, format!("bad edge weight: {e}")))?;
                    builder
                        .add_edge_by_label(a, b, weight)
                        .map_err(|e| fail(lineno, e.to_string()))?;
                }
                Some(other) => {
                    return Err(fail(lineno, format!("unknown directive `{other}`")));
                }
                None => unreachable!("empty lines are skipped"),
            }
            if let Some(extra) = parts.next() {
                if !extra.starts_with('#') {
                    return Err(fail(lineno, format!("trailing token `{extra}`")));
                }
            }
        }

        if let Some(n) = declared {
            if n != builder.labels.len() {
                return Err(GraphError::Parse {
                    path: origin.to_string(),
                    line: 0,
                    msg: format!(
                        "header declares {n} vertices but {} were defined",
                        builder.labels.len()
                    ),
                });
            }
        }
        builder.build()
    }

    pub fn read_from(path: &Path) -> Result<WeightedGraph, GraphError> {
        let file = std::fs::File::open(path).map_err(|source| GraphError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_reader(std::io::BufReader::new(file), &path.display().to_string())
    }
}

/// Number of lattice points with Σ|xᵢ| ≤ r, via the standard cross-polytope
/// recurrence N(n, r) = N(n−1, r) + N(n, r−1) + N(n−1, r−1).
fn l1_ball_cardinality(n: usize, r: u32) -> u128 {
    let r = r as usize;
    let mut row = vec![1u128; r + 1]; // n = 0: only the origin at every radius
    for _ in 1..=n {
        let mut next = Vec::with_capacity(r + 1);
        next.push(1u128); // radius 0
        for radius in 1..=r {
            let val = row[radius] + next[radius - 1] + row[radius - 1];
            next.push(val);
        }
        row = next;
    }
    row[r]
}

fn enumerate_l1_ball(
    n: usize,
    radius: i64,
    dim: usize,
    budget: i64,
    current: &mut Vec<i64>,
    out: &mut Vec<Vec<i64>>,
) {
    if dim == n {
        out.push(current.clone());
        return;
    }
    let _ = radius;
    for v in -budget..=budget {
        current[dim] = v;
        enumerate_l1_ball(n, radius, dim + 1, budget - v.abs(), current, out);
    }
    current[dim] = 0;
}

fn coord_label(c: &[i64]) -> String {
    let mut s = String::new();
    for (i, v) in c.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        let _ = write!(s, "{v}");
    }
    s
}

/// Incremental, validating graph construction. Edges are stored in both
/// directions with the same weight, so symmetry holds by construction;
/// `build()` additionally checks connectivity.
pub struct GraphBuilder {
    labels: Vec<String>,
    index: HashMap<String, VertexId>,
    mu: Vec<f64>,
    adj: Vec<Vec<(VertexId, f64)>>,
    boundary: Vec<bool>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        GraphBuilder {
            labels: Vec::new(),
            index: HashMap::new(),
            mu: Vec::new(),
            adj: Vec::new(),
            boundary: Vec::new(),
        }
    }

    pub fn add_vertex(&mut self, label: &str, mu: f64) -> Result<VertexId, GraphError> {
        if self.index.contains_key(label) {
            return Err(GraphError::DuplicateVertex(label.to_string()));
        }
        if !(mu > 0.0) || !mu.is_finite() {
            return Err(GraphError::BadMeasure {
                vertex: label.to_string(),
                mu,
            });
        }
        let id = VertexId(self.labels.len());
        self.labels.push(label.to_string());
        self.index.insert(label.to_string(), id);
        self.mu.push(mu);
        self.adj.push(Vec::new());
        self.boundary.push(false);
        Ok(id)
    }

    /// Marks a vertex as truncation boundary (incomplete neighborhood).
    pub fn mark_boundary(&mut self, v: VertexId) {
        self.boundary[v.0] = true;
    }

    pub fn add_edge(&mut self, a: VertexId, b: VertexId, weight: f64) -> Result<(), GraphError> {
        let label = |v: VertexId| self.labels[v.0].clone();
        if a == b {
            if weight != 0.0 {
                return Err(GraphError::SelfLoop(label(a)));
            }
            return Ok(()); // an explicit zero diagonal entry is a no-op
        }
        if !(weight >= 0.0) || !weight.is_finite() {
            return Err(GraphError::NegativeWeight {
                a: label(a),
                b: label(b),
                weight,
            });
        }
        if self.adj[a.0].iter().any(|&(y, _)| y == b) {
            return Err(GraphError::DuplicateEdge(label(a), label(b)));
        }
        if weight == 0.0 {
            return Ok(()); // ω = 0 means "no edge"
        }
        self.adj[a.0].push((b, weight));
        self.adj[b.0].push((a, weight));
        Ok(())
    }

    pub fn add_edge_by_label(&mut self, a: &str, b: &str, weight: f64) -> Result<(), GraphError> {
        let a = *self
            .index
            .get(a)
            .ok_or_else(|| GraphError::UnknownVertex(a.to_string()))?;
        let b = *self
            .index
            .get(b)
            .ok_or_else(|| GraphError::UnknownVertex(b.to_string()))?;
        self.add_edge(a, b, weight)
    }

    pub fn build(self) -> Result<WeightedGraph, GraphError> {
        let n = self.labels.len();
        let graph = WeightedGraph {
            labels: self.labels,
            index: self.index,
            mu: self.mu,
            adj: self.adj,
            boundary: self.boundary,
            missing_weight: vec![0.0; n],
            lattice: None,
        };
        if n > 0 {
            let reachable = graph.reachable_from(VertexId(0));
            if reachable != n {
                return Err(GraphError::Disconnected {
                    root: graph.labels[0].clone(),
                    reachable,
                    total: n,
                });
            }
        }
        Ok(graph)
    }
}

impl Default for GraphBuilder {
    fn default() -> Self {
        Self::new()
    }
}

/// A real-valued function on the vertex set, stored sparsely: explicit values
/// on finitely many vertices, `default` elsewhere. Compactly supported data
/// uses `default = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphFunction {
    values: HashMap<VertexId, f64>,
    default: f64,
}

impl GraphFunction {
    pub fn zero() -> Self {
        GraphFunction {
            values: HashMap::new(),
            default: 0.0,
        }
    }

    pub fn constant(c: f64) -> Self {
        GraphFunction {
            values: HashMap::new(),
            default: c,
        }
    }

    pub fn from_pairs<I: IntoIterator<Item = (VertexId, f64)>>(pairs: I) -> Self {
        GraphFunction {
            values: pairs.into_iter().collect(),
            default: 0.0,
        }
    }

    pub fn set(&mut self, v: VertexId, value: f64) {
        self.values.insert(v, value);
    }

    pub fn get(&self, v: VertexId) -> f64 {
        self.values.get(&v).copied().unwrap_or(self.default)
    }

    pub fn default_value(&self) -> f64 {
        self.default
    }

    /// Vertices carrying an explicit value. (For compact-support semantics the
    /// default must be zero; explicit zeros are harmless.)
    pub fn support(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.values.keys().copied()
    }

    pub fn support_len(&self) -> usize {
        self.values.len()
    }
}

/// Report from [`WeightedGraph::validate_structure`]: the audited structural
/// facts plus the measured weight/measure ratio.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ValidationReport {
    /// ω(x,y) = ω(y,x) for every stored pair, both directions present.
    pub symmetric: bool,
    /// No vertex carries a nonzero self-weight.
    pub zero_diagonal: bool,
    /// Every vertex reachable from the first one along positive weights.
    pub connected: bool,
    /// Measured sup_x Σ_y ω(x,y) / μ(x).
    pub weight_measure_ratio: f64,
    #[serde(skip)]
    pub ratio_argmax: Option<VertexId>,
    /// The bound the ratio was compared against.
    pub c_bound: f64,
    pub ratio_within_bound: bool,
}

impl ValidationReport {
    pub fn passes(&self) -> bool {
        self.symmetric && self.zero_diagonal && self.connected && self.ratio_within_bound
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lattice_fn(graph: &WeightedGraph, f: impl Fn(&[i64]) -> f64) -> GraphFunction {
        let info = graph.lattice().expect("lattice graph");
        GraphFunction::from_pairs(
            graph
                .vertices()
                .map(|v| (v, f(&info.coords[v.index()]))),
        )
    }

    #[test]
    fn laplacian_of_square_is_one_on_interior_of_z1() {
        // μ = 2, ω = 1: Δx² = ((x+1)² + (x−1)² − 2x²)/2 = 1 at every interior x.
        let g = WeightedGraph::build_lattice(1, 6).unwrap();
        let f = lattice_fn(&g, |c| (c[0] * c[0]) as f64);
        for v in g.vertices().filter(|&v| !g.is_boundary(v)) {
            let lap = g.laplacian_at(&f, v).unwrap();
            assert_eq!(lap, 1.0, "Δx² at {}", g.label(v));
        }
    }

    #[test]
    fn laplacian_of_constant_vanishes() {
        let g = WeightedGraph::build_lattice(2, 3).unwrap();
        let f = GraphFunction::constant(4.25);
        for v in g.vertices() {
            assert_eq!(g.laplacian_at(&f, v).unwrap(), 0.0);
        }
    }

    #[test]
    fn laplacian_two_vertex_example() {
        // ω(a,b) = 3, μ(a) = 1, f(a) = 0, f(b) = 2 → Δf(a) = 3·(2−0)/1 = 6.
        let mut b = WeightedGraph::builder();
        let a = b.add_vertex("a", 1.0).unwrap();
        let bb = b.add_vertex("b", 5.0).unwrap();
        b.add_edge(a, bb, 3.0).unwrap();
        let g = b.build().unwrap();
        let f = GraphFunction::from_pairs([(bb, 2.0)]);
        assert_eq!(g.laplacian_at(&f, a).unwrap(), 6.0);
    }

    #[test]
    fn laplacian_of_affine_functions_vanishes_on_interior() {
        for n in 1..=3 {
            let g = WeightedGraph::build_lattice(n, 4).unwrap();
            let coeffs: Vec<f64> = (0..n).map(|k| 1.5 - 0.7 * k as f64).collect();
            let f = lattice_fn(&g, |c| {
                2.0 + c
                    .iter()
                    .zip(&coeffs)
                    .map(|(&x, &a)| a * x as f64)
                    .sum::<f64>()
            });
            for v in g.vertices().filter(|&v| !g.is_boundary(v)) {
                let lap = g.laplacian_at(&f, v).unwrap();
                assert!(
                    lap.abs() < 1e-13,
                    "affine function should be harmonic at {}, got {lap}",
                    g.label(v)
                );
            }
        }
    }

    #[test]
    fn lattice_z1_radius_2_enumeration() {
        let g = WeightedGraph::build_lattice(1, 2).unwrap();
        assert_eq!(g.vertex_count(), 5);
        let edges: usize = g.vertices().map(|v| g.neighbors(v).len()).sum();
        assert_eq!(edges / 2, 4);
        for v in g.vertices() {
            assert_eq!(g.mu(v), 2.0);
        }
        assert!(g.vertex("-2").is_some() && g.vertex("2").is_some());
        assert!(g.is_boundary(g.vertex("2").unwrap()));
        assert!(!g.is_boundary(g.vertex("1").unwrap()));
    }

    #[test]
    fn lattice_z2_radius_1_enumeration_and_volume() {
        let g = WeightedGraph::build_lattice(2, 1).unwrap();
        assert_eq!(g.vertex_count(), 5); // origin + 4 unit vectors
        let edges: usize = g.vertices().map(|v| g.neighbors(v).len()).sum();
        assert_eq!(edges / 2, 4);
        for v in g.vertices() {
            assert_eq!(g.mu(v), 4.0);
        }
        assert_eq!(g.total_volume(), 20.0); // 5 vertices × μ = 4
    }

    #[test]
    fn lattice_counts_match_direct_enumeration() {
        // Independent oracle: count tuples in the enclosing box with Σ|xᵢ| ≤ r.
        for n in 1..=3usize {
            for r in 1..=6u32 {
                let g = WeightedGraph::build_lattice(n, r).unwrap();
                let mut count = 0usize;
                let side = 2 * r as i64 + 1;
                let total = (side as u128).pow(n as u32);
                for code in 0..total {
                    let mut rem = code;
                    let mut norm = 0i64;
                    for _ in 0..n {
                        let v = (rem % side as u128) as i64 - r as i64;
                        rem /= side as u128;
                        norm += v.abs();
                    }
                    if norm <= r as i64 {
                        count += 1;
                    }
                }
                assert_eq!(g.vertex_count(), count, "n={n} r={r}");
            }
        }
    }

    #[test]
    fn lattice_missing_weight_tracks_clipped_degree() {
        let g = WeightedGraph::build_lattice(2, 2).unwrap();
        for v in g.vertices() {
            let stored: f64 = g.neighbors(v).iter().map(|&(_, w)| w).sum();
            assert_eq!(g.missing_weight(v), 4.0 - stored);
            if !g.is_boundary(v) {
                assert_eq!(g.missing_weight(v), 0.0);
            } else {
                assert!(g.missing_weight(v) > 0.0);
            }
        }
    }

    #[test]
    fn lattice_cap_is_enforced() {
        let err = WeightedGraph::build_lattice_capped(3, 50, 1000).unwrap_err();
        match err {
            GraphError::TooLarge { would_have, .. } => assert!(would_have > 1000),
            other => panic!("expected TooLarge, got {other:?}"),
        }
    }

    #[test]
    fn validate_structure_passes_on_lattice() {
        let g = WeightedGraph::build_lattice(2, 3).unwrap();
        let report = g.validate_structure(1.0);
        assert!(report.passes(), "{report:?}");
        assert_eq!(report.weight_measure_ratio, 1.0); // 2n/2n at interior vertices
    }

    #[test]
    fn validate_structure_detects_injected_asymmetry() {
        let labels = vec!["a".into(), "b".into()];
        let mu = vec![1.0, 1.0];
        let adj = vec![
            vec![(VertexId(1), 3.0)],
            vec![(VertexId(0), 5.0)], // ω(b,a) ≠ ω(a,b)
        ];
        let g = WeightedGraph::from_raw_parts(labels, mu, adj, vec![false, false]);
        let report = g.validate_structure(10.0);
        assert!(!report.symmetric);
        assert!(!report.passes());
    }

    #[test]
    fn validate_structure_detects_nonzero_diagonal_and_disconnection() {
        let labels = vec!["a".into(), "b".into(), "c".into()];
        let mu = vec![1.0, 1.0, 1.0];
        let adj = vec![
            vec![(VertexId(0), 2.0), (VertexId(1), 1.0)],
            vec![(VertexId(0), 1.0)],
            vec![], // isolated
        ];
        let g = WeightedGraph::from_raw_parts(labels, mu, adj, vec![false; 3]);
        let report = g.validate_structure(10.0);
        assert!(!report.zero_diagonal);
        assert!(!report.connected);
    }

    #[test]
    fn validate_structure_single_vertex() {
        let mut b = WeightedGraph::builder();
        b.add_vertex("only", 2.0).unwrap();
        let g = b.build().unwrap();
        let report = g.validate_structure(1.0);
        assert!(report.passes());
        assert_eq!(report.weight_measure_ratio, 0.0);
    }

    #[test]
    fn builder_rejects_malformed_input() {
        let mut b = WeightedGraph::builder();
        b.add_vertex("a", 1.0).unwrap();
        assert!(matches!(
            b.add_vertex("a", 1.0),
            Err(GraphError::DuplicateVertex(_))
        ));
        assert!(matches!(
            b.add_vertex("bad", -1.0),
            Err(GraphError::BadMeasure { .. })
        ));
        let a = b.add_vertex("b", 1.0).unwrap();
        let first = VertexId(0);
        assert!(matches!(
            b.add_edge(first, a, -2.0),
            Err(GraphError::NegativeWeight { .. })
        ));
        assert!(matches!(
            b.add_edge(a, a, 1.0),
            Err(GraphError::SelfLoop(_))
        ));
        b.add_edge(first, a, 1.0).unwrap();
        assert!(matches!(
            b.add_edge(a, first, 1.0),
            Err(GraphError::DuplicateEdge(_, _))
        ));
    }

    #[test]
    fn builder_rejects_disconnected_graphs() {
        let mut b = WeightedGraph::builder();
        b.add_vertex("a", 1.0).unwrap();
        b.add_vertex("b", 1.0).unwrap();
        let err = b.build().unwrap_err();
        assert!(matches!(err, GraphError::Disconnected { .. }));
    }

    #[test]
    fn zero_weight_edges_are_dropped() {
        let mut b = WeightedGraph::builder();
        let a = b.add_vertex("a", 1.0).unwrap();
        let c = b.add_vertex("c", 1.0).unwrap();
        b.add_edge(a, c, 0.0).unwrap();
        // ω = 0 is "no edge", so the graph is disconnected.
        assert!(b.build().is_err());
    }

    #[test]
    fn ibp_defect_vanishes_for_indicator_pair() {
        let g = WeightedGraph::build_lattice(1, 4).unwrap();
        let f = GraphFunction::from_pairs([(g.vertex("0").unwrap(), 1.0)]);
        let h = GraphFunction::from_pairs([(g.vertex("1").unwrap(), 1.0)]);
        let defect = g.integration_by_parts_defect(&f, &h).unwrap();
        assert!(defect.abs() < 1e-12, "defect = {defect}");
    }

    #[test]
    fn ibp_defect_is_exactly_zero_for_equal_arguments() {
        let g = WeightedGraph::build_lattice(2, 3).unwrap();
        let f = lattice_fn(&g, |c| (c[0] - c[1]) as f64);
        // restrict to the interior so the precondition holds
        let f = GraphFunction::from_pairs(
            g.vertices()
                .filter(|&v| !g.is_boundary(v))
                .map(|v| (v, f.get(v))),
        );
        assert_eq!(g.integration_by_parts_defect(&f, &f).unwrap(), 0.0);
    }

    #[test]
    fn ibp_rejects_support_on_the_boundary() {
        let g = WeightedGraph::build_lattice(1, 3).unwrap();
        let f = GraphFunction::from_pairs([(g.vertex("3").unwrap(), 1.0)]);
        let gfun = GraphFunction::from_pairs([(g.vertex("0").unwrap(), 1.0)]);
        assert!(matches!(
            g.integration_by_parts_defect(&f, &gfun),
            Err(GraphError::IncompleteNeighborhood(_))
        ));
    }

    #[test]
    fn ibp_rejects_nonzero_default() {
        let g = WeightedGraph::build_lattice(1, 3).unwrap();
        let f = GraphFunction::constant(1.0);
        let gfun = GraphFunction::from_pairs([(g.vertex("0").unwrap(), 1.0)]);
        assert!(matches!(
            g.integration_by_parts_defect(&f, &gfun),
            Err(GraphError::NotCompactlySupported(_))
        ));
    }

    #[test]
    fn laplacian_has_zero_mean_against_mu_for_interior_support() {
        // Σ_x μ(x)·Δf(x) = 0 when supp f stays away from the boundary: this is
        // integration by parts against g ≡ 1 on the support's neighborhood.
        let g = WeightedGraph::build_lattice(2, 5).unwrap();
        let info = g.lattice().unwrap();
        let f = GraphFunction::from_pairs(g.vertices().filter_map(|v| {
            let c = &info.coords[v.index()];
            let norm: i64 = c.iter().map(|x| x.abs()).sum();
            (norm <= 3).then(|| (v, ((c[0] * 2 + c[1]) as f64).sin()))
        }));
        let mut total = 0.0;
        for v in g.vertices() {
            total += g.mu(v) * g.laplacian_at(&f, v).unwrap();
        }
        assert!(total.abs() < 1e-12, "Σ μ·Δf = {total}");
    }

    #[test]
    fn file_format_round_trips_exactly() {
        let mut b = WeightedGraph::builder();
        let a = b.add_vertex("alpha", 0.1).unwrap(); // 0.1 is not dyadic
        let c = b.add_vertex("beta", 2.0 / 3.0).unwrap();
        let d = b.add_vertex("gamma", 1.0).unwrap();
        b.add_edge(a, c, std::f64::consts::PI).unwrap();
        b.add_edge(c, d, 1e-17).unwrap();
        let g = b.build().unwrap();

        let mut buf = Vec::new();
        g.to_writer(&mut buf).unwrap();
        let g2 = WeightedGraph::from_reader(std::io::Cursor::new(&buf), "mem").unwrap();

        assert_eq!(g.vertex_count(), g2.vertex_count());
        for v in g.vertices() {
            assert_eq!(g.label(v), g2.label(v));
            assert_eq!(g.mu(v).to_bits(), g2.mu(v).to_bits());
            let mut n1 = g.neighbors(v).to_vec();
            let mut n2 = g2.neighbors(v).to_vec();
            n1.sort_by_key(|&(y, _)| y);
            n2.sort_by_key(|&(y, _)| y);
            assert_eq!(n1.len(), n2.len());
            for (&(y1, w1), &(y2, w2)) in n1.iter().zip(&n2) {
                assert_eq!(g.label(y1), g2.label(y2));
                assert_eq!(w1.to_bits(), w2.to_bits());
            }
        }

        // A second write must be byte-identical.
        let mut buf2 = Vec::new();
        g2.to_writer(&mut buf2).unwrap();
        assert_eq!(buf, buf2);
    }

    #[test]
    fn lattice_file_labels_survive_round_trip() {
        let g = WeightedGraph::build_lattice(2, 2).unwrap();
        let mut buf = Vec::new();
        g.to_writer(&mut buf).unwrap();
        let g2 = WeightedGraph::from_reader(std::io::Cursor::new(&buf), "mem").unwrap();
        assert_eq!(g2.vertex_count(), 13);
        assert!(g2.vertex("1,-1").is_some());
        // Loaded graphs are treated as complete: no boundary flags.
        assert!(g2.vertices().all(|v| !g2.is_boundary(v)));
    }

    #[test]
    fn parser_reports_line_numbers_and_rejects_garbage() {
        let text = "graph 2\nv a 1.0\nv b 1.0\nq what\n";
        let err = WeightedGraph::from_reader(std::io::Cursor::new(text), "mem").unwrap_err();
        match err {
            GraphError::Parse { line, .. } => assert_eq!(line, 4),
            other => panic!("expected parse error, got {other:?}"),
        }

        let dup = "v a 1.0\nv a 2.0\n";
        assert!(WeightedGraph::from_reader(std::io::Cursor::new(dup), "mem").is_err());

        let unknown = "v a 1.0\ne a b 1.0\n";
        assert!(WeightedGraph::from_reader(std::io::Cursor::new(unknown), "mem").is_err());

        let header_mismatch = "graph 3\nv a 1.0\n";
        assert!(WeightedGraph::from_reader(std::io::Cursor::new(header_mismatch), "mem").is_err());
    }

    #[test]
    fn parser_skips_comments_and_blank_lines() {
        let text = "# a tiny path\n\ngraph 2\nv a 1.0\nv b 2.0\n\n# the only edge\ne a b 1.5\n";
        let g = WeightedGraph::from_reader(std::io::Cursor::new(text), "mem").unwrap();
        assert_eq!(g.vertex_count(), 2);
        assert_eq!(g.neighbors(g.vertex("a").unwrap())[0].1, 1.5);
    }
}
