//! Finite geodesic metric graphs and the primitive metric quantities every
//! estimator consumes: BFS distances, lexicographically tie-broken geodesics,
//! neighborhoods, Hausdorff distance, and a four-point hyperbolicity probe.

use std::collections::VecDeque;
use std::fmt::Write as _;
use std::sync::atomic::{AtomicU64, Ordering};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

pub const UNREACHED: u32 = u32::MAX;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("edge list is empty")]
    EmptyEdgeList,
    #[error("self loop at vertex {0}")]
    SelfLoop(u32),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(u32, u32),
    #[error("graph is disconnected")]
    DisconnectedGraph,
    #[error("invalid vertex {0}")]
    InvalidVertex(u32),
    #[error("vertex set is empty")]
    EmptySet,
    #[error("path endpoints coincide; slope undefined")]
    ZeroDisplacement,
    #[error("vertex sequence is not a path: {0} and {1} are not adjacent")]
    NotAPath(u32, u32),
    #[error("malformed graph text: {0}")]
    Parse(String),
}

/// Construction provenance carried by every graph. `radius` and `boundary`
/// are set for ball-like constructions so estimators can enforce trusted
/// margins; hand-built graphs leave them empty.
#[derive(Debug, Clone, Default)]
pub struct GraphMeta {
    pub provenance: String,
    pub radius: Option<u32>,
    /// Outermost sphere / layer of a truncated construction.
    pub boundary: Vec<u32>,
}

static NEXT_GRAPH_ID: AtomicU64 = AtomicU64::new(1);

/// Immutable finite unit-weight geodesic graph. Connected, simple, with
/// symmetric adjacency; safely shareable across threads.
#[derive(Debug)]
pub struct MetricGraph {
    adj: Vec<Vec<u32>>,
    labels: Vec<String>,
    meta: GraphMeta,
    id: u64,
}

impl MetricGraph {
    pub fn build(edges: &[(u32, u32)], labels: Option<Vec<String>>) -> Result<Self, GraphError> {
        Self::build_with_meta(edges, labels, GraphMeta::default())
    }

    pub fn build_with_meta(
        edges: &[(u32, u32)],
        labels: Option<Vec<String>>,
        meta: GraphMeta,
    ) -> Result<Self, GraphError> {
        if edges.is_empty() {
            return Err(GraphError::EmptyEdgeList);
        }
        let n = edges
            .iter()
            .map(|&(u, v)| u.max(v) as usize + 1)
            .max()
            .unwrap();
        let mut adj = vec![Vec::new(); n];
        let mut seen = std::collections::HashSet::new();
        for &(u, v) in edges {
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            let key = (u.min(v), u.max(v));
            if !seen.insert(key) {
                return Err(GraphError::DuplicateEdge(key.0, key.1));
            }
            adj[u as usize].push(v);
            adj[v as usize].push(u);
        }
        for nbrs in &mut adj {
            nbrs.sort_unstable();
        }
        let g = MetricGraph {
            adj,
            labels: labels.unwrap_or_default(),
            meta,
            id: NEXT_GRAPH_ID.fetch_add(1, Ordering::Relaxed),
        };
        // Connectivity check doubles as a check for isolated vertices.
        let d = g.dist_from(0)?;
        if d.iter().any(|&x| x == UNREACHED) {
            return Err(GraphError::DisconnectedGraph);
        }
        Ok(g)
    }

    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(|n| n.len()).sum::<usize>() / 2
    }

    pub fn neighbors(&self, v: u32) -> &[u32] {
        &self.adj[v as usize]
    }

    pub fn label(&self, v: u32) -> Option<&str> {
        self.labels.get(v as usize).map(|s| s.as_str())
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn meta(&self) -> &GraphMeta {
        &self.meta
    }

    /// Session-unique identity used to tie `PathRec`s to their owning graph.
    pub fn id(&self) -> u64 {
        self.id
    }

    fn check_vertex(&self, v: u32) -> Result<(), GraphError> {
        if (v as usize) < self.adj.len() {
            Ok(())
        } else {
            Err(GraphError::InvalidVertex(v))
        }
    }

    /// Exact single-source shortest-path distances (unit weights).
    pub fn dist_from(&self, source: u32) -> Result<Vec<u32>, GraphError> {
        self.check_vertex(source)?;
        let mut dist = vec![UNREACHED; self.adj.len()];
        dist[source as usize] = 0;
        let mut queue = VecDeque::new();
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            let du = dist[u as usize];
            for &v in &self.adj[u as usize] {
                if dist[v as usize] == UNREACHED {
                    dist[v as usize] = du + 1;
                    queue.push_back(v);
                }
            }
        }
        Ok(dist)
    }

    /// Multi-source BFS distances to the nearest vertex of `sources`.
    pub fn dist_from_set(&self, sources: &VertexSet) -> Result<Vec<u32>, GraphError> {
        if sources.is_empty() {
            return Err(GraphError::EmptySet);
        }
        let mut dist = vec![UNREACHED; self.adj.len()];
        let mut queue = VecDeque::new();
        for &s in sources.iter() {
            self.check_vertex(s)?;
            dist[s as usize] = 0;
            queue.push_back(s);
        }
        while let Some(u) = queue.pop_front() {
            let du = dist[u as usize];
            for &v in &self.adj[u as usize] {
                if dist[v as usize] == UNREACHED {
                    dist[v as usize] = du + 1;
                    queue.push_back(v);
                }
            }
        }
        Ok(dist)
    }

    /// BFS restricted to vertices outside `forbidden` (sources/targets inside
    /// the forbidden set are unreachable).
    pub fn dist_from_avoiding(&self, source: u32, forbidden: &[bool]) -> Vec<u32> {
        let mut dist = vec![UNREACHED; self.adj.len()];
        if forbidden[source as usize] {
            return dist;
        }
        dist[source as usize] = 0;
        let mut queue = VecDeque::new();
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            let du = dist[u as usize];
            for &v in &self.adj[u as usize] {
                if dist[v as usize] == UNREACHED && !forbidden[v as usize] {
                    dist[v as usize] = du + 1;
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    pub fn dist(&self, a: u32, b: u32) -> Result<u32, GraphError> {
        Ok(self.dist_from(a)?[b as usize])
    }

    /// The geodesic from `a` to `b` whose vertex-id sequence is
    /// lexicographically smallest among all geodesics. Deterministic, so all
    /// downstream constants are reproducible.
    pub fn shortest_path(&self, a: u32, b: u32) -> Result<PathRec, GraphError> {
        self.check_vertex(a)?;
        self.check_vertex(b)?;
        let dist_to_b = self.dist_from(b)?;
        let total = dist_to_b[a as usize];
        debug_assert_ne!(total, UNREACHED);
        let mut verts = Vec::with_capacity(total as usize + 1);
        let mut cur = a;
        verts.push(cur);
        while cur != b {
            let d = dist_to_b[cur as usize];
            // Neighbor lists are sorted, so the first descending neighbor is
            // the lexicographic choice.
            let next = *self.adj[cur as usize]
                .iter()
                .find(|&&v| dist_to_b[v as usize] + 1 == d)
                .expect("connected graph");
            verts.push(next);
            cur = next;
        }
        Ok(PathRec {
            graph_id: self.id,
            arclength: total,
            endpoint_dist: total,
            verts,
        })
    }

    /// Lexicographically smallest geodesic avoiding `forbidden`, or `None`
    /// when no such path exists. Endpoints must themselves be allowed.
    pub fn shortest_path_avoiding(&self, a: u32, b: u32, forbidden: &[bool]) -> Option<PathRec> {
        if forbidden[a as usize] || forbidden[b as usize] {
            return None;
        }
        let dist_to_b = self.dist_from_avoiding(b, forbidden);
        let total = dist_to_b[a as usize];
        if total == UNREACHED {
            return None;
        }
        let mut verts = Vec::with_capacity(total as usize + 1);
        let mut cur = a;
        verts.push(cur);
        while cur != b {
            let d = dist_to_b[cur as usize];
            let next = *self.adj[cur as usize]
                .iter()
                .find(|&&v| !forbidden[v as usize] && dist_to_b[v as usize] + 1 == d)
                .expect("reachable");
            verts.push(next);
            cur = next;
        }
        let endpoint_dist = self.dist(a, b).expect("valid vertices");
        Some(PathRec {
            graph_id: self.id,
            arclength: total,
            endpoint_dist,
            verts,
        })
    }

    /// All vertices within distance `k` of `s`. `k = 0` returns `s`.
    pub fn neighborhood(&self, s: &VertexSet, k: u32) -> Result<VertexSet, GraphError> {
        let dist = self.dist_from_set(s)?;
        Ok(VertexSet::from_iter(
            (0..self.adj.len() as u32).filter(|&v| dist[v as usize] <= k),
        ))
    }

    /// min D with A ⊆ N_D(B) and B ⊆ N_D(A).
    pub fn hausdorff(&self, a: &VertexSet, b: &VertexSet) -> Result<u32, GraphError> {
        let da = self.dist_from_set(a)?;
        let db = self.dist_from_set(b)?;
        let one = a.iter().map(|&v| db[v as usize]).max().unwrap();
        let two = b.iter().map(|&v| da[v as usize]).max().unwrap();
        Ok(one.max(two))
    }

    /// A `PathRec` for an explicit vertex sequence; validates adjacency and
    /// computes the endpoint distance.
    pub fn path(&self, verts: Vec<u32>) -> Result<PathRec, GraphError> {
        assert!(!verts.is_empty());
        for w in verts.windows(2) {
            self.check_vertex(w[0])?;
            self.check_vertex(w[1])?;
            if self.adj[w[0] as usize].binary_search(&w[1]).is_err() {
                return Err(GraphError::NotAPath(w[0], w[1]));
            }
        }
        self.check_vertex(verts[0])?;
        let endpoint_dist = self.dist(verts[0], *verts.last().unwrap())?;
        Ok(PathRec {
            graph_id: self.id,
            arclength: verts.len() as u32 - 1,
            endpoint_dist,
            verts,
        })
    }

    /// Plain-text adjacency serialization: header line with vertex count and
    /// provenance, then one `u v` line per edge, sorted.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(
            out,
            "# vertices={} provenance={}",
            self.adj.len(),
            self.meta.provenance
        )
        .unwrap();
        if let Some(r) = self.meta.radius {
            writeln!(out, "# radius={}", r).unwrap();
        }
        if !self.meta.boundary.is_empty() {
            let b: Vec<String> = self.meta.boundary.iter().map(|v| v.to_string()).collect();
            writeln!(out, "# boundary={}", b.join(",")).unwrap();
        }
        if !self.labels.is_empty() {
            for (i, l) in self.labels.iter().enumerate() {
                writeln!(out, "# label {} {}", i, l).unwrap();
            }
        }
        let mut edges = Vec::with_capacity(self.edge_count());
        for (u, nbrs) in self.adj.iter().enumerate() {
            for &v in nbrs {
                if (u as u32) < v {
                    edges.push((u as u32, v));
                }
            }
        }
        edges.sort_unstable();
        for (u, v) in edges {
            writeln!(out, "{} {}", u, v).unwrap();
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, GraphError> {
        let mut meta = GraphMeta::default();
        let mut labels: Vec<(u32, String)> = Vec::new();
        let mut expected_vertices: Option<usize> = None;
        let mut edges = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let rest = rest.trim();
                if let Some(kv) = rest.strip_prefix("vertices=") {
                    let (count, prov) = kv
                        .split_once(" provenance=")
                        .ok_or_else(|| GraphError::Parse("bad header".into()))?;
                    expected_vertices =
                        Some(count.parse().map_err(|_| {
                            GraphError::Parse(format!("bad vertex count {count:?}"))
                        })?);
                    meta.provenance = prov.to_string();
                } else if let Some(r) = rest.strip_prefix("radius=") {
                    meta.radius =
                        Some(r.parse().map_err(|_| {
                            GraphError::Parse(format!("bad radius {r:?}"))
                        })?);
                } else if let Some(b) = rest.strip_prefix("boundary=") {
                    for part in b.split(',') {
                        meta.boundary.push(part.parse().map_err(|_| {
                            GraphError::Parse(format!("bad boundary entry {part:?}"))
                        })?);
                    }
                } else if let Some(l) = rest.strip_prefix("label ") {
                    let (idx, name) = l
                        .split_once(' ')
                        .ok_or_else(|| GraphError::Parse("bad label line".into()))?;
                    labels.push((
                        idx.parse()
                            .map_err(|_| GraphError::Parse(format!("bad label index {idx:?}")))?,
                        name.to_string(),
                    ));
                }
                continue;
            }
            let (u, v) = line
                .split_once(' ')
                .ok_or_else(|| GraphError::Parse(format!("bad edge line {line:?}")))?;
            edges.push((
                u.parse()
                    .map_err(|_| GraphError::Parse(format!("bad vertex {u:?}")))?,
                v.parse()
                    .map_err(|_| GraphError::Parse(format!("bad vertex {v:?}")))?,
            ));
        }
        let label_vec = if labels.is_empty() {
            None
        } else {
            let n = labels.iter().map(|(i, _)| *i as usize + 1).max().unwrap();
            let mut out = vec![String::new(); n];
            for (i, l) in labels {
                out[i as usize] = l;
            }
            Some(out)
        };
        let g = Self::build_with_meta(&edges, label_vec, meta)?;
        if let Some(n) = expected_vertices {
            if n != g.vertex_count() {
                return Err(GraphError::Parse(format!(
                    "header says {} vertices, edges span {}",
                    n,
                    g.vertex_count()
                )));
            }
        }
        Ok(g)
    }
}

/// Ordered vertex sequence with arclength ‖p‖ and endpoint distance |p|.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PathRec {
    pub verts: Vec<u32>,
    /// Edge count ‖p‖.
    pub arclength: u32,
    /// Graph distance |p| between the first and last vertex.
    pub endpoint_dist: u32,
    pub graph_id: u64,
}

impl PathRec {
    pub fn start(&self) -> u32 {
        self.verts[0]
    }

    pub fn end(&self) -> u32 {
        *self.verts.last().unwrap()
    }

    pub fn vertex_set(&self) -> VertexSet {
        VertexSet::from_iter(self.verts.iter().copied())
    }

    /// ‖p‖ / |p|, always ≥ 1.
    pub fn slope(&self) -> Result<f64, GraphError> {
        if self.endpoint_dist == 0 {
            return Err(GraphError::ZeroDisplacement);
        }
        Ok(self.arclength as f64 / self.endpoint_dist as f64)
    }
}

/// Sorted, duplicate-free vertex ids.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct VertexSet(Vec<u32>);

impl VertexSet {
    pub fn new(mut ids: Vec<u32>) -> Self {
        ids.sort_unstable();
        ids.dedup();
        VertexSet(ids)
    }

    pub fn from_iter<I: IntoIterator<Item = u32>>(iter: I) -> Self {
        Self::new(iter.into_iter().collect())
    }

    pub fn singleton(v: u32) -> Self {
        VertexSet(vec![v])
    }

    pub fn contains(&self, v: u32) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, u32> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        self.0.iter().all(|&v| other.contains(v))
    }
}

/// Exact nonnegative rational, used for the parameters t and C so threshold
/// comparisons against integer distances never round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Frac {
    pub num: u64,
    pub den: u64,
}

impl Frac {
    pub fn new(num: u64, den: u64) -> Self {
        assert!(den > 0, "zero denominator");
        Frac { num, den }
    }

    pub fn int(n: u64) -> Self {
        Frac { num: n, den: 1 }
    }

    pub fn as_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// self · n, rounded down.
    pub fn mul_floor(&self, n: u64) -> u64 {
        self.num * n / self.den
    }

    /// x ≥ self · n, exactly.
    pub fn le_times(&self, x: u64, n: u64) -> bool {
        x as u128 * self.den as u128 >= self.num as u128 * n as u128
    }

    /// x ≤ self · n, exactly.
    pub fn ge_times(&self, x: u64, n: u64) -> bool {
        x as u128 * self.den as u128 <= self.num as u128 * n as u128
    }

    pub fn parse(s: &str) -> Option<Frac> {
        let s = s.trim();
        if let Some((n, d)) = s.split_once('/') {
            let num = n.trim().parse().ok()?;
            let den: u64 = d.trim().parse().ok()?;
            if den == 0 {
                return None;
            }
            Some(Frac { num, den })
        } else if let Some(dot) = s.find('.') {
            // Decimal literals like 0.49 stay exact as fractions over 10^k.
            let whole: u64 = if dot == 0 { 0 } else { s[..dot].parse().ok()? };
            let frac = &s[dot + 1..];
            if frac.is_empty() || frac.len() > 9 {
                return None;
            }
            let fnum: u64 = frac.parse().ok()?;
            let den = 10u64.pow(frac.len() as u32);
            Some(Frac {
                num: whole * den + fnum,
                den,
            })
        } else {
            Some(Frac {
                num: s.parse().ok()?,
                den: 1,
            })
        }
    }
}

impl std::fmt::Display for Frac {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

/// Four-point hyperbolicity defect for one quadruple: with the three pairwise
/// sums sorted S1 ≥ S2 ≥ S3, the defect is (S1 − S2) / 2.
fn fourpoint_defect(d: [[u32; 4]; 4]) -> f64 {
    let s = [
        d[0][1] + d[2][3],
        d[0][2] + d[1][3],
        d[0][3] + d[1][2],
    ];
    let mut s = s;
    s.sort_unstable();
    (s[2] - s[1]) as f64 / 2.0
}

/// Lower bound on the Gromov δ of the graph via the four-point condition.
///
/// When every 4-subset of vertices fits inside `sample_count` tuples the sweep
/// is exhaustive. Otherwise an anchor pool is drawn deterministically from
/// `seed` — a mix of spread-out vertices, uniform samples, and geodesic
/// midpoints of anchor pairs (midpoints land on the branch/median structure
/// where the defect is realized) — and `sample_count` 4-subsets of the pool
/// are scored.
pub fn delta_fourpoint(g: &MetricGraph, sample_count: usize, seed: u64) -> f64 {
    assert!(sample_count >= 1);
    let n = g.vertex_count();
    let exhaustive_tuples = if n < 4 {
        0u128
    } else {
        let n = n as u128;
        n * (n - 1) * (n - 2) * (n - 3) / 24
    };
    if exhaustive_tuples == 0 {
        return 0.0;
    }
    if exhaustive_tuples <= sample_count as u128 {
        let dist: Vec<Vec<u32>> = (0..n as u32).map(|v| g.dist_from(v).unwrap()).collect();
        let mut best = 0.0f64;
        for a in 0..n {
            for b in a + 1..n {
                for c in b + 1..n {
                    for e in c + 1..n {
                        let idx = [a, b, c, e];
                        let mut d = [[0u32; 4]; 4];
                        for i in 0..4 {
                            for j in 0..4 {
                                d[i][j] = dist[idx[i]][idx[j]];
                            }
                        }
                        best = best.max(fourpoint_defect(d));
                    }
                }
            }
        }
        return best;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pool_target = ((sample_count as f64 * 24.0).powf(0.25).ceil() as usize + 8).min(n);

    // Spread anchors: farthest-point sampling from vertex 0.
    let mut anchors: Vec<u32> = vec![0];
    let mut min_dist = g.dist_from(0).unwrap();
    while anchors.len() < pool_target / 3 {
        let far = (0..n as u32)
            .max_by_key(|&v| (min_dist[v as usize], std::cmp::Reverse(v)))
            .unwrap();
        if min_dist[far as usize] == 0 {
            break;
        }
        anchors.push(far);
        let d = g.dist_from(far).unwrap();
        for v in 0..n {
            min_dist[v] = min_dist[v].min(d[v]);
        }
    }
    // Uniform fill.
    while anchors.len() < 2 * pool_target / 3 {
        anchors.push(rng.gen_range(0..n as u32));
    }
    // Midpoint-spread enrichment.  The approximate midpoint set of a pair
    // is a single vertex in a tree but spreads along a diagonal in a flat;
    // its extremes are corners of fat quadrilaterals, exactly what the
    // four-point defect measures.  Pairs are drawn from the growing pool so
    // a second round can pair up extremes found in the first, and each
    // enrichment quadruple (a, b, m1, m2) is scored explicitly below.
    let mut seeded: Vec<[u32; 4]> = Vec::new();
    let rounds = pool_target.max(12);
    for _ in 0..rounds {
        let a = *anchors.choose(&mut rng).unwrap();
        let b = *anchors.choose(&mut rng).unwrap();
        if a == b {
            continue;
        }
        let da = g.dist_from(a).unwrap();
        let db = g.dist_from(b).unwrap();
        let d = da[b as usize];
        if d < 2 {
            continue;
        }
        let mids: Vec<u32> = (0..n as u32)
            .filter(|&v| {
                let (x, y) = (da[v as usize], db[v as usize]);
                x + y <= d + 1 && x.abs_diff(y) <= 1
            })
            .collect();
        let m1 = *mids.choose(&mut rng).unwrap();
        let dm = g.dist_from(m1).unwrap();
        let m2 = *mids
            .iter()
            .max_by_key(|&&v| (dm[v as usize], std::cmp::Reverse(v)))
            .unwrap();
        anchors.push(m1);
        anchors.push(m2);
        seeded.push([a, b, m1, m2]);
    }
    anchors.sort_unstable();
    anchors.dedup();

    let dist: Vec<Vec<u32>> = anchors.iter().map(|&v| g.dist_from(v).unwrap()).collect();
    let m = anchors.len();
    let mut best = 0.0f64;
    for q in &seeded {
        let mut d = [[0u32; 4]; 4];
        for i in 0..4 {
            let row = &dist[anchors.binary_search(&q[i]).unwrap()];
            for j in 0..4 {
                d[i][j] = row[q[j] as usize];
            }
        }
        best = best.max(fourpoint_defect(d));
    }
    let pool_tuples = if m < 4 {
        0u128
    } else {
        let m = m as u128;
        m * (m - 1) * (m - 2) * (m - 3) / 24
    };
    if pool_tuples <= sample_count as u128 {
        for a in 0..m {
            for b in a + 1..m {
                for c in b + 1..m {
                    for e in c + 1..m {
                        let idx = [a, b, c, e];
                        let mut d = [[0u32; 4]; 4];
                        for i in 0..4 {
                            for j in 0..4 {
                                d[i][j] = dist[idx[i]][anchors[idx[j]] as usize];
                            }
                        }
                        best = best.max(fourpoint_defect(d));
                    }
                }
            }
        }
    } else {
        for _ in 0..sample_count {
            let mut idx = [0usize; 4];
            loop {
                for slot in idx.iter_mut() {
                    *slot = rng.gen_range(0..m);
                }
                idx.sort_unstable();
                if idx.windows(2).all(|w| w[0] != w[1]) {
                    break;
                }
            }
            let mut d = [[0u32; 4]; 4];
            for i in 0..4 {
                for j in 0..4 {
                    d[i][j] = dist[idx[i]][anchors[idx[j]] as usize];
                }
            }
            best = best.max(fourpoint_defect(d));
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path_graph(n: u32) -> MetricGraph {
        let edges: Vec<(u32, u32)> = (0..n - 1).map(|i| (i, i + 1)).collect();
        MetricGraph::build(&edges, None).unwrap()
    }

    fn cycle_graph(n: u32) -> MetricGraph {
        let mut edges: Vec<(u32, u32)> = (0..n - 1).map(|i| (i, i + 1)).collect();
        edges.push((n - 1, 0));
        MetricGraph::build(&edges, None).unwrap()
    }

    #[test]
    fn build_smallest() {
        let g = MetricGraph::build(&[(0, 1)], None).unwrap();
        assert_eq!(g.vertex_count(), 2);
        assert_eq!(g.dist(0, 1).unwrap(), 1);
    }

    #[test]
    fn build_rejects_bad_input() {
        assert_eq!(
            MetricGraph::build(&[(0, 1), (2, 3)], None).unwrap_err(),
            GraphError::DisconnectedGraph
        );
        assert_eq!(
            MetricGraph::build(&[(0, 0)], None).unwrap_err(),
            GraphError::SelfLoop(0)
        );
        assert_eq!(
            MetricGraph::build(&[(0, 1), (1, 0)], None).unwrap_err(),
            GraphError::DuplicateEdge(0, 1)
        );
        assert_eq!(
            MetricGraph::build(&[], None).unwrap_err(),
            GraphError::EmptyEdgeList
        );
    }

    #[test]
    fn cycle_metric() {
        let g = cycle_graph(4);
        assert_eq!(g.dist(0, 2).unwrap(), 2);
        let d = g.dist_from(0).unwrap();
        assert_eq!(d.iter().max(), Some(&2));
    }

    #[test]
    fn dist_on_path() {
        let g = path_graph(3);
        assert_eq!(g.dist_from(0).unwrap(), vec![0, 1, 2]);
    }

    #[test]
    fn shortest_path_degenerate() {
        let g = path_graph(3);
        let p = g.shortest_path(1, 1).unwrap();
        assert_eq!(p.arclength, 0);
        assert_eq!(p.verts, vec![1]);
    }

    #[test]
    fn shortest_path_lex_tiebreak() {
        // 4-cycle 0-1-2-3: two geodesics 0→2; lex picks 0,1,2.
        let g = cycle_graph(4);
        let p = g.shortest_path(0, 2).unwrap();
        assert_eq!(p.verts, vec![0, 1, 2]);
    }

    #[test]
    fn slope_of_geodesic_is_one() {
        let g = path_graph(5);
        let p = g.shortest_path(0, 4).unwrap();
        assert_eq!(p.slope().unwrap(), 1.0);
    }

    #[test]
    fn slope_rejects_loop() {
        let g = cycle_graph(4);
        let p = g.path(vec![0, 1, 2, 3, 0]).unwrap();
        assert_eq!(p.slope().unwrap_err(), GraphError::ZeroDisplacement);
    }

    #[test]
    fn neighborhood_cases() {
        let g = path_graph(11);
        let s = VertexSet::singleton(5);
        assert_eq!(g.neighborhood(&s, 0).unwrap(), s);
        assert_eq!(
            g.neighborhood(&s, 2).unwrap(),
            VertexSet::new(vec![3, 4, 5, 6, 7])
        );
        assert_eq!(g.neighborhood(&s, 100).unwrap().len(), 11);
        assert_eq!(
            g.neighborhood(&VertexSet::default(), 1).unwrap_err(),
            GraphError::EmptySet
        );
    }

    #[test]
    fn hausdorff_cases() {
        let g = path_graph(11);
        let a = VertexSet::singleton(0);
        let b = VertexSet::singleton(10);
        assert_eq!(g.hausdorff(&a, &a).unwrap(), 0);
        assert_eq!(g.hausdorff(&a, &b).unwrap(), 10);
        let b2 = VertexSet::new(vec![0, 10]);
        assert_eq!(g.hausdorff(&a, &b2).unwrap(), 10);
    }

    #[test]
    fn delta_tree_is_zero() {
        // A small tree: star with legs.
        let g = MetricGraph::build(&[(0, 1), (0, 2), (0, 3), (1, 4), (2, 5)], None).unwrap();
        assert_eq!(delta_fourpoint(&g, 1_000_000, 7), 0.0);
    }

    #[test]
    fn delta_four_cycle() {
        let g = cycle_graph(4);
        assert_eq!(delta_fourpoint(&g, 1_000_000, 7), 1.0);
    }

    #[test]
    fn text_roundtrip() {
        let g = MetricGraph::build_with_meta(
            &[(0, 1), (1, 2), (2, 0)],
            Some(vec!["e".into(), "a".into(), "b".into()]),
            GraphMeta {
                provenance: "triangle".into(),
                radius: Some(1),
                boundary: vec![1, 2],
            },
        )
        .unwrap();
        let text = g.to_text();
        let h = MetricGraph::from_text(&text).unwrap();
        assert_eq!(h.to_text(), text);
        assert_eq!(h.meta().provenance, "triangle");
        assert_eq!(h.meta().boundary, vec![1, 2]);
        assert_eq!(h.label(1), Some("a"));
    }

    #[test]
    fn frac_parsing() {
        assert_eq!(Frac::parse("1/3"), Some(Frac::new(1, 3)));
        assert_eq!(Frac::parse("0.49"), Some(Frac::new(49, 100)));
        assert_eq!(Frac::parse("3"), Some(Frac::int(3)));
        assert_eq!(Frac::parse("1/0"), None);
    }
}
