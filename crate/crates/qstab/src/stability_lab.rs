//! Effective stability machinery: t-middles, middle-recurrence constants,
//! stability constants, projections, contraction profiles, the contraction
//! lemma verifier, and the Property-5 tester.
//!
//! All estimators are deterministic: graph BFS inherits the lexicographic
//! tie-break of `metric_core`, and every reported constant carries a witness.

use crate::metric_core::{Frac, GraphError, MetricGraph, PathRec, VertexSet};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StabilityError {
    #[error("t must satisfy 0 < t < 1/2, got {0}")]
    BadT(Frac),
    #[error("slope budget C must be at least 1, got {0}")]
    BadC(Frac),
    #[error("path endpoint {0} is within the untrusted margin of the graph boundary")]
    MarginViolation(u32),
    #[error("exact oracle limit exceeded ({0})")]
    TooLarge(usize),
    #[error("reference path is not a geodesic")]
    NotGeodesic,
    #[error("empty vertex set")]
    EmptySet,
    #[error("lemma hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("internal invariant violated: {0}")]
    InvariantViolated(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

type Result<T> = std::result::Result<T, StabilityError>;

/// Quasigeodesic parameters (κ, λ) with κ ≥ 1, λ ≥ 0, kept rational so the
/// discrete pairwise constraints are exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct QgParams {
    pub kappa: Frac,
    pub lambda: Frac,
}

impl QgParams {
    pub fn new(kappa: Frac, lambda: Frac) -> Result<Self> {
        if kappa.num < kappa.den {
            return Err(StabilityError::InvariantViolated(format!(
                "kappa must be >= 1, got {kappa}"
            )));
        }
        Ok(QgParams { kappa, lambda })
    }

    /// Upper constraint d(v_i, v_j) ≤ κ|i−j| + λ, exact.
    fn upper_ok(&self, d: u32, sep: u32) -> bool {
        let (kn, kd) = (self.kappa.num as u128, self.kappa.den as u128);
        let (ln, ld) = (self.lambda.num as u128, self.lambda.den as u128);
        (d as u128) * kd * ld <= kn * (sep as u128) * ld + ln * kd
    }

    /// Lower constraint (1/κ)|i−j| − λ ≤ d(v_i, v_j), i.e.
    /// |i−j| ≤ κ·(d + λ), exact.
    fn lower_ok(&self, d: u32, sep: u32) -> bool {
        let (kn, kd) = (self.kappa.num as u128, self.kappa.den as u128);
        let (ln, ld) = (self.lambda.num as u128, self.lambda.den as u128);
        (sep as u128) * kd * ld <= kn * ((d as u128) * ld + ln)
    }

    /// Longest admissible index separation for endpoint distance `d`:
    /// ⌊κ(d + λ)⌋.
    fn max_separation(&self, d: u32) -> u64 {
        let (kn, kd) = (self.kappa.num, self.kappa.den);
        let (ln, ld) = (self.lambda.num, self.lambda.den);
        kn * (d as u64 * ld + ln) / (kd * ld)
    }
}

/// Reject paths whose endpoints sit inside the untrusted margin (within
/// `radius/4` of the recorded construction boundary).  Graphs without
/// radius/boundary metadata are fully trusted.
fn check_margin(g: &MetricGraph, endpoints: &[u32]) -> Result<()> {
    let meta = g.meta();
    let Some(radius) = meta.radius else { return Ok(()) };
    if meta.boundary.is_empty() {
        return Ok(());
    }
    let margin = radius / 4;
    if margin == 0 {
        return Ok(());
    }
    let db = g.dist_from_set(&VertexSet::from_iter(meta.boundary.iter().copied()))?;
    for &v in endpoints {
        if db[v as usize] < margin {
            return Err(StabilityError::MarginViolation(v));
        }
    }
    Ok(())
}

fn validate_t(t: Frac) -> Result<()> {
    if t.num == 0 || 2 * t.num >= t.den {
        return Err(StabilityError::BadT(t));
    }
    Ok(())
}

fn validate_c(c: Frac) -> Result<()> {
    if c.num < c.den {
        return Err(StabilityError::BadC(c));
    }
    Ok(())
}

/// Vertices x of `p` with min{d(x,a), d(x,b)} ≥ t·d(a,b), computed with the
/// ambient graph metric and exact rational comparison.  Degenerate paths
/// (|p| = 0) yield the empty set.
pub fn t_middle(g: &MetricGraph, p: &PathRec, t: Frac) -> Result<VertexSet> {
    validate_t(t)?;
    let d = p.endpoint_dist;
    if d == 0 {
        return Ok(VertexSet::default());
    }
    let da = g.dist_from(p.start())?;
    let db = g.dist_from(p.end())?;
    Ok(VertexSet::from_iter(p.verts.iter().copied().filter(|&x| {
        let m = da[x as usize].min(db[x as usize]);
        // m ≥ t·d, exact.
        t.le_times(m as u64, d as u64)
    })))
}

/// Result of the middle-recurrence estimator.
#[derive(Debug, Clone, Serialize)]
pub struct RecurrenceResult {
    /// Largest K such that some path within the slope budget avoids
    /// N_K(t-middle); 0 when every budget path meets the middle itself.
    pub m_hat: u32,
    /// Detour achieving `m_hat`; `None` when no budget path avoids even the
    /// middle (the geodesic itself is then the only relevant path).
    pub witness: Option<PathRec>,
    /// |p| = 0 or empty t-middle.
    pub degenerate: bool,
    /// Arclength budget ⌊C·d(a,b)⌋.
    pub budget: u64,
    /// Shortest avoiding arclength per K, for the monotonicity audit.
    pub lengths: Vec<(u32, u32)>,
}

/// Middle-recurrence estimator: sweep K upward, deleting N_K(t-middle) and
/// taking the shortest surviving path, until the detour disconnects or blows
/// the budget ‖p‖ ≤ C·d(a,b).  The deletion lengths L(K) are nondecreasing,
/// which makes the returned K exact for the discrete definition.
pub fn recurrence_constant(
    g: &MetricGraph,
    p: &PathRec,
    t: Frac,
    c: Frac,
) -> Result<RecurrenceResult> {
    validate_t(t)?;
    validate_c(c)?;
    check_margin(g, &[p.start(), p.end()])?;
    let d = p.endpoint_dist;
    let middle = t_middle(g, p, t)?;
    let budget = c.mul_floor(d as u64);
    if d == 0 || middle.is_empty() {
        return Ok(RecurrenceResult {
            m_hat: 0,
            witness: None,
            degenerate: true,
            budget,
            lengths: Vec::new(),
        });
    }
    let dmid = g.dist_from_set(&middle)?;
    let mut best: Option<(u32, PathRec)> = None;
    let mut lengths = Vec::new();
    for k in 0.. {
        let forbidden: Vec<bool> = dmid.iter().map(|&x| x <= k).collect();
        let Some(q) = g.shortest_path_avoiding(p.start(), p.end(), &forbidden) else {
            break;
        };
        if q.arclength as u64 > budget {
            break;
        }
        if let Some(&(_, last)) = lengths.last() {
            if q.arclength < last {
                return Err(StabilityError::InvariantViolated(format!(
                    "deletion length decreased at K={k}"
                )));
            }
        }
        lengths.push((k, q.arclength));
        best = Some((k, q));
    }
    match best {
        Some((m_hat, witness)) => Ok(RecurrenceResult {
            m_hat,
            witness: Some(witness),
            degenerate: false,
            budget,
            lengths,
        }),
        None => Ok(RecurrenceResult {
            m_hat: 0,
            witness: None,
            degenerate: false,
            budget,
            lengths,
        }),
    }
}

/// Brute-force cross-validation oracle for [`recurrence_constant`]:
/// enumerate every simple path within the budget and maximize the minimum
/// distance to the t-middle.  Only for graphs of at most 60 vertices.
pub fn recurrence_oracle(g: &MetricGraph, p: &PathRec, t: Frac, c: Frac) -> Result<u32> {
    const MAX_VERTS: usize = 60;
    if g.vertex_count() > MAX_VERTS {
        return Err(StabilityError::TooLarge(g.vertex_count()));
    }
    validate_t(t)?;
    validate_c(c)?;
    let d = p.endpoint_dist;
    let middle = t_middle(g, p, t)?;
    if d == 0 || middle.is_empty() {
        return Ok(0);
    }
    let budget = c.mul_floor(d as u64) as u32;
    let dmid = g.dist_from_set(&middle)?;
    let to_b = g.dist_from(p.end())?;

    // DFS over simple paths from a to b with arclength ≤ budget, tracking
    // the best (maximal) minimum distance to the middle along the way.
    fn dfs(
        g: &MetricGraph,
        cur: u32,
        b: u32,
        used: &mut Vec<bool>,
        len: u32,
        min_mid: u32,
        budget: u32,
        to_b: &[u32],
        dmid: &[u32],
        best: &mut u32,
    ) {
        let min_mid = min_mid.min(dmid[cur as usize]);
        // Even best-case completion cannot beat the current record by
        // passing through only far-from-middle vertices; no admissible
        // pruning on min_mid is available beyond the trivial one:
        if min_mid <= *best && *best > 0 {
            // Extending can only keep min_mid ≤ best; still may need to
            // finish for correctness of max — but the max over paths only
            // improves when min_mid > best, so prune.
            if min_mid < *best || cur == b {
                if cur == b {
                    *best = (*best).max(min_mid);
                }
                return;
            }
        }
        if cur == b {
            *best = (*best).max(min_mid);
            return;
        }
        used[cur as usize] = true;
        for &v in g.neighbors(cur) {
            if !used[v as usize] && len + 1 + to_b[v as usize] <= budget {
                dfs(g, v, b, used, len + 1, min_mid, budget, to_b, dmid, best);
            }
        }
        used[cur as usize] = false;
    }

    let mut best = 0u32;
    let mut used = vec![false; g.vertex_count()];
    dfs(
        g,
        p.start(),
        p.end(),
        &mut used,
        0,
        u32::MAX,
        budget,
        &to_b,
        &dmid,
        &mut best,
    );
    Ok(best.saturating_sub(1))
}

/// How a stability constant was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StabilityMode {
    /// Exhaustive enumeration of discrete quasigeodesics (small graphs).
    ExactOracle,
    /// Certified detour constructions; yields a lower bound for D̂ only.
    Probe,
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilityResult {
    pub d_hat: u32,
    /// Vertex sequence of the quasigeodesic realizing `d_hat`.
    pub witness: Vec<u32>,
    pub mode: StabilityMode,
    /// True in probe mode (and in exact mode if the node budget ran out).
    pub lower_bound_only: bool,
    /// Largest one-sided excursion max_q d(q, p) over enumerated
    /// quasigeodesics (exact mode only; equals d_hat contribution term 1).
    pub max_excursion: u32,
}

/// Check the full pairwise discrete quasigeodesic condition for a vertex
/// sequence: (1/κ)|i−j| − λ ≤ d(v_i, v_j) ≤ κ|i−j| + λ for all i, j.
pub fn is_discrete_quasigeodesic(
    g: &MetricGraph,
    seq: &[u32],
    params: &QgParams,
) -> Result<bool> {
    let mut dists: std::collections::HashMap<u32, Vec<u32>> = std::collections::HashMap::new();
    for &v in seq {
        if let std::collections::hash_map::Entry::Vacant(e) = dists.entry(v) {
            e.insert(g.dist_from(v)?);
        }
    }
    for i in 0..seq.len() {
        for j in i + 1..seq.len() {
            let d = dists[&seq[i]][seq[j] as usize];
            let sep = (j - i) as u32;
            if !params.upper_ok(d, sep) || !params.lower_ok(d, sep) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Exhaustive scan state for the exact stability oracle.
struct ExactScan<'a> {
    g: &'a MetricGraph,
    dmat: Vec<Vec<u32>>,
    p_verts: &'a [u32],
    d_to_p: Vec<u32>,
    params: QgParams,
    b: u32,
    nmax: usize,
    node_budget: usize,
    nodes: usize,
    best_haus: u32,
    best_wit: Vec<u32>,
    max_excursion: u32,
    exhausted: bool,
}

impl ExactScan<'_> {
    /// `mins[k]` = min over current sequence of d(p_verts[k], v).
    fn recurse(&mut self, seq: &mut Vec<u32>, mins: &mut Vec<u32>) {
        if !self.exhausted {
            return;
        }
        let cur = *seq.last().unwrap();
        if cur == self.b && seq.len() >= 2 {
            let term1 = seq
                .iter()
                .map(|&v| self.d_to_p[v as usize])
                .max()
                .unwrap();
            let term2 = mins.iter().copied().max().unwrap();
            let haus = term1.max(term2);
            self.max_excursion = self.max_excursion.max(term1);
            if haus > self.best_haus || self.best_wit.is_empty() {
                self.best_haus = haus;
                self.best_wit = seq.clone();
            }
        }
        if seq.len() - 1 >= self.nmax {
            return;
        }
        let remaining = (self.nmax - seq.len()) as u32;
        'cand: for v in 0..self.g.vertex_count() as u32 {
            // Must still be able to reach b within the index budget.
            if !self.params.upper_ok(self.dmat[v as usize][self.b as usize], remaining) {
                continue;
            }
            let sep_base = seq.len();
            for (i, &u) in seq.iter().enumerate() {
                let sep = (sep_base - i) as u32;
                let d = self.dmat[u as usize][v as usize];
                if !self.params.upper_ok(d, sep) || !self.params.lower_ok(d, sep) {
                    continue 'cand;
                }
            }
            self.nodes += 1;
            if self.nodes > self.node_budget {
                self.exhausted = false;
                return;
            }
            seq.push(v);
            let mut undo: Vec<(usize, u32)> = Vec::new();
            for (k, &pv) in self.p_verts.iter().enumerate() {
                let d = self.dmat[pv as usize][v as usize];
                if d < mins[k] {
                    undo.push((k, mins[k]));
                    mins[k] = d;
                }
            }
            self.recurse(seq, mins);
            for (k, old) in undo {
                mins[k] = old;
            }
            seq.pop();
        }
    }
}

/// Maximal Hausdorff distance from the geodesic `p` over discrete
/// (κ,λ)-quasigeodesics with the same endpoints.
///
/// * `ExactOracle`: exhaustive prefix search with pairwise pruning, for
///   graphs of at most 60 vertices; exact unless the node budget trips
///   (then `lower_bound_only`).
/// * `Probe`: certified detour constructions — the geodesic itself plus
///   shortest paths around growing neighborhoods of the 1/3-middle, each
///   verified to satisfy the pairwise condition before use.  Lower bound.
pub fn stability_constant(
    g: &MetricGraph,
    p: &PathRec,
    params: &QgParams,
    mode: StabilityMode,
) -> Result<StabilityResult> {
    if p.arclength != p.endpoint_dist {
        return Err(StabilityError::NotGeodesic);
    }
    check_margin(g, &[p.start(), p.end()])?;
    match mode {
        StabilityMode::ExactOracle => stability_exact(g, p, params),
        StabilityMode::Probe => stability_probe(g, p, params),
    }
}

const EXACT_MAX_VERTS: usize = 60;
const EXACT_NODE_BUDGET: usize = 20_000_000;

fn stability_exact(g: &MetricGraph, p: &PathRec, params: &QgParams) -> Result<StabilityResult> {
    let n = g.vertex_count();
    if n > EXACT_MAX_VERTS {
        return Err(StabilityError::TooLarge(n));
    }
    let mut dmat = Vec::with_capacity(n);
    for v in 0..n as u32 {
        dmat.push(g.dist_from(v)?);
    }
    let d_to_p = g.dist_from_set(&p.vertex_set())?;
    let nmax = params.max_separation(p.endpoint_dist) as usize;
    let mut scan = ExactScan {
        g,
        dmat,
        p_verts: &p.verts,
        d_to_p,
        params: *params,
        b: p.end(),
        nmax,
        node_budget: EXACT_NODE_BUDGET,
        nodes: 0,
        best_haus: 0,
        best_wit: Vec::new(),
        max_excursion: 0,
        exhausted: true,
    };
    let mut seq = vec![p.start()];
    let mut mins: Vec<u32> = p
        .verts
        .iter()
        .map(|&pv| scan.dmat[pv as usize][p.start() as usize])
        .collect();
    scan.recurse(&mut seq, &mut mins);
    Ok(StabilityResult {
        d_hat: scan.best_haus,
        witness: scan.best_wit,
        mode: StabilityMode::ExactOracle,
        lower_bound_only: !scan.exhausted,
        max_excursion: scan.max_excursion,
    })
}

fn stability_probe(g: &MetricGraph, p: &PathRec, params: &QgParams) -> Result<StabilityResult> {
    // The geodesic itself is always a certified member: D̂ ≥ 0.
    let mut best = StabilityResult {
        d_hat: 0,
        witness: p.verts.clone(),
        mode: StabilityMode::Probe,
        lower_bound_only: true,
        max_excursion: 0,
    };
    let middle = t_middle(g, p, Frac::new(1, 3))?;
    if middle.is_empty() {
        return Ok(best);
    }
    let dmid = g.dist_from_set(&middle)?;
    let p_set = p.vertex_set();
    for s in 0.. {
        let forbidden: Vec<bool> = dmid.iter().map(|&x| x <= s).collect();
        let Some(q) = g.shortest_path_avoiding(p.start(), p.end(), &forbidden) else {
            break;
        };
        if !is_discrete_quasigeodesic(g, &q.verts, params)? {
            break;
        }
        let haus = g.hausdorff(&p_set, &q.vertex_set())?;
        let excursion = {
            let dp = g.dist_from_set(&p_set)?;
            q.verts.iter().map(|&v| dp[v as usize]).max().unwrap()
        };
        if haus > best.d_hat {
            best.d_hat = haus;
            best.witness = q.verts.clone();
        }
        best.max_excursion = best.max_excursion.max(excursion);
    }
    Ok(best)
}

/// ε-closest-point projection: {y ∈ Y : d(x,y) ≤ d(x,Y) + ε}.
pub fn projection(g: &MetricGraph, y: &VertexSet, x: u32, eps: u32) -> Result<VertexSet> {
    if y.is_empty() {
        return Err(StabilityError::EmptySet);
    }
    let dx = g.dist_from(x)?;
    let dxy = y.iter().map(|&v| dx[v as usize]).min().unwrap();
    Ok(VertexSet::from_iter(
        y.iter().copied().filter(|&v| dx[v as usize] <= dxy + eps),
    ))
}

#[derive(Debug, Clone, Serialize)]
pub struct SublinearVerdict {
    pub sublinear: bool,
    /// Fitted exponent β of ρ̄(r) ≈ a·r^β over the top half of the r-range.
    pub exponent: f64,
    /// ρ̄(r_max)/r_max.
    pub ratio_at_max: f64,
}

/// Empirical contraction data for a subset Y: ρ̂ per distance r, the
/// sublinear envelope ρ̄, and a finite-scale sublinearity verdict.
#[derive(Debug, Clone, Serialize)]
pub struct ContractionProfile {
    pub epsilon: u32,
    /// (r, ρ̂(r)) for every r ≥ 1 realized by some vertex.
    pub samples: Vec<(u32, u32)>,
    /// (r, ρ̄(r)) with ρ̄(r) = r · max_{s ≥ r} ρ̂(s)/s over sampled s.
    pub envelope: Vec<(u32, f64)>,
    pub verdict: SublinearVerdict,
}

impl ContractionProfile {
    /// Envelope value at K, extended conservatively: at a sampled r it is
    /// ρ̄(r); between samples it scales down linearly from the next sample
    /// (an underestimate, since ρ̄(r)/r is nonincreasing); beyond the data
    /// it extends linearly from the last sample.
    pub fn envelope_at(&self, k: f64) -> f64 {
        assert!(k > 0.0);
        if self.envelope.is_empty() {
            return 0.0;
        }
        for &(r, v) in &self.envelope {
            if r as f64 >= k {
                return v * k / r as f64;
            }
        }
        let &(r, v) = self.envelope.last().unwrap();
        v * k / r as f64
    }
}

/// Thresholds for the finite-scale sublinearity verdict (declared,
/// versioned): fitted exponent ≤ 0.5 and ρ̄(r_max)/r_max ≤ 0.5.
pub const SUBLINEAR_EXPONENT_MAX: f64 = 0.5;
pub const SUBLINEAR_RATIO_MAX: f64 = 0.5;

const CONTRACTION_MAX_VERTS: usize = 5_000;

/// Measure (ρ,ε)-contraction of Y: for each r, the largest projection-union
/// diameter over pairs (x, x′) with d(x,Y) = r and d(x,x′) ≤ r.
pub fn contraction_profile(g: &MetricGraph, y: &VertexSet, eps: u32) -> Result<ContractionProfile> {
    if y.is_empty() {
        return Err(StabilityError::EmptySet);
    }
    let n = g.vertex_count();
    if n > CONTRACTION_MAX_VERTS {
        return Err(StabilityError::TooLarge(n));
    }
    let mut dmat = Vec::with_capacity(n);
    for v in 0..n as u32 {
        dmat.push(g.dist_from(v)?);
    }
    let dy: Vec<u32> = (0..n)
        .map(|v| y.iter().map(|&w| dmat[v][w as usize]).min().unwrap())
        .collect();
    // Projections for every vertex.
    let projections: Vec<Vec<u32>> = (0..n)
        .map(|v| {
            y.iter()
                .copied()
                .filter(|&w| dmat[v][w as usize] <= dy[v] + eps)
                .collect()
        })
        .collect();
    let union_diam = |a: &[u32], b: &[u32]| -> u32 {
        let mut m = 0;
        for &u in a.iter().chain(b.iter()) {
            for &v in a.iter().chain(b.iter()) {
                m = m.max(dmat[u as usize][v as usize]);
            }
        }
        m
    };

    let rmax = dy.iter().copied().max().unwrap();
    let mut samples = Vec::new();
    for r in 1..=rmax {
        let class: Vec<u32> = (0..n as u32).filter(|&v| dy[v as usize] == r).collect();
        if class.is_empty() {
            continue;
        }
        let mut rho = 0u32;
        for &x in &class {
            for x2 in 0..n as u32 {
                if dmat[x as usize][x2 as usize] <= r {
                    rho = rho.max(union_diam(
                        &projections[x as usize],
                        &projections[x2 as usize],
                    ));
                }
            }
        }
        samples.push((r, rho));
    }

    // Envelope: ρ̄(r) = r · max_{s ≥ r} ρ̂(s)/s, so ρ̄(r)/r is nonincreasing
    // and ρ̄ ≥ ρ̂ by construction.
    let mut envelope = vec![(0u32, 0f64); samples.len()];
    let mut sup = 0f64;
    for (i, &(r, rho)) in samples.iter().enumerate().rev() {
        sup = sup.max(rho as f64 / r as f64);
        envelope[i] = (r, sup * r as f64);
    }

    let verdict = if let Some(&(r_last, v_last)) = envelope.last() {
        let ratio_at_max = v_last / r_last as f64;
        let half = &envelope[envelope.len() / 2..];
        let pts: Vec<(f64, f64)> = half
            .iter()
            .map(|&(r, v)| ((r as f64).ln(), v.max(0.5).ln()))
            .collect();
        let m = pts.len() as f64;
        let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), &(x, y)| (a + x, b + y));
        let sxx: f64 = pts.iter().map(|&(x, _)| x * x).sum();
        let sxy: f64 = pts.iter().map(|&(x, y)| x * y).sum();
        let denom = m * sxx - sx * sx;
        let exponent = if denom.abs() < 1e-12 {
            0.0
        } else {
            (m * sxy - sx * sy) / denom
        };
        SublinearVerdict {
            sublinear: exponent <= SUBLINEAR_EXPONENT_MAX && ratio_at_max <= SUBLINEAR_RATIO_MAX,
            exponent,
            ratio_at_max,
        }
    } else {
        // Y touches everything: no admissible r — vacuously sublinear.
        SublinearVerdict { sublinear: true, exponent: 0.0, ratio_at_max: 0.0 }
    };

    Ok(ContractionProfile { epsilon: eps, samples, envelope, verdict })
}

/// One piece of the greedy maximal-ball decomposition.
#[derive(Debug, Clone, Serialize)]
pub struct LemmaPiece {
    /// Index into `h.verts` of the piece's initial endpoint x_i.
    pub start: usize,
    /// r_i = d(x_i, γ).
    pub radius: u32,
    /// Endpoint distance |h_i| of the piece.
    pub endpoint_dist: u32,
}

/// Report of the contraction-lemma verifier.
#[derive(Debug, Clone, Serialize)]
pub struct LemmaReport {
    pub k: u32,
    pub pieces: Vec<LemmaPiece>,
    /// Proof property (1): |h_i| = d(x_i, γ) for all i < m, exactly.
    pub property1_ok: bool,
    /// Proof property (2): h_i stays in the closed r_i-ball about x_i.
    pub property2_ok: bool,
    /// LHS ρ(K)/K from the supplied envelope.
    pub lhs: f64,
    /// RHS (1 − (2K + ρ(K))/|h|)/sl(h).
    pub rhs: f64,
    pub holds: bool,
    /// |h| = 0: the inequality is vacuous (slope undefined).
    pub degenerate: bool,
}

/// Verify the contraction-lemma inequality
/// ρ(K)/K ≥ (1 − (2K + ρ(K))/|h|)/sl(h) on a concrete excursion `h`,
/// building the greedy maximal-ball decomposition from the proof and
/// checking its properties (1)–(2) exactly.
///
/// `rho` is a sampled envelope with ρ(r)/r nonincreasing, evaluated at K via
/// the conservative extension of [`ContractionProfile::envelope_at`].
pub fn verify_contract_lemma(
    g: &MetricGraph,
    gamma: &VertexSet,
    h: &PathRec,
    rho: &ContractionProfile,
) -> Result<LemmaReport> {
    if gamma.is_empty() {
        return Err(StabilityError::EmptySet);
    }
    let dg = g.dist_from_set(gamma)?;
    let k = dg[h.start() as usize];
    if dg[h.end() as usize] != k {
        return Err(StabilityError::HypothesisViolated(format!(
            "endpoints at distances {} and {} from gamma, expected both exactly K",
            k,
            dg[h.end() as usize]
        )));
    }
    if let Some(&v) = h.verts.iter().find(|&&v| dg[v as usize] < k) {
        return Err(StabilityError::HypothesisViolated(format!(
            "path dips to distance {} < K = {k} at vertex {v}",
            dg[v as usize]
        )));
    }
    if k == 0 {
        return Err(StabilityError::HypothesisViolated(
            "K = 0 is degenerate in the discrete setting (empty balls)".into(),
        ));
    }

    // Greedy decomposition: each piece is the maximal subpath inside the
    // closed d(x_i, γ)-ball about its start.
    let mut pieces = Vec::new();
    let mut property1_ok = true;
    let mut property2_ok = true;
    let mut i = 0usize;
    while i + 1 < h.verts.len() {
        let x = h.verts[i];
        let r = dg[x as usize];
        let dx = g.dist_from(x)?;
        let mut j = i + 1;
        while j < h.verts.len() && dx[h.verts[j] as usize] <= r {
            j += 1;
        }
        let end = j - 1; // last index still inside the ball
        let last = j >= h.verts.len();
        for &v in &h.verts[i..=end] {
            if dx[v as usize] > r {
                property2_ok = false;
            }
        }
        let ep = dx[h.verts[end] as usize];
        if !last && ep != r {
            property1_ok = false;
        }
        pieces.push(LemmaPiece { start: i, radius: r, endpoint_dist: ep });
        if end == i {
            // Cannot happen for r ≥ 1 on a unit-step path, but guard against
            // an infinite loop.
            return Err(StabilityError::InvariantViolated(
                "empty decomposition piece".into(),
            ));
        }
        i = end;
    }

    let rho_k = rho.envelope_at(k as f64);
    let lhs = rho_k / k as f64;
    let (rhs, holds, degenerate) = if h.endpoint_dist == 0 {
        (f64::NEG_INFINITY, true, true)
    } else {
        let sl = h.arclength as f64 / h.endpoint_dist as f64;
        let rhs = (1.0 - (2.0 * k as f64 + rho_k) / h.endpoint_dist as f64) / sl;
        (rhs, lhs >= rhs - 1e-9, false)
    };

    Ok(LemmaReport { k, pieces, property1_ok, property2_ok, lhs, rhs, holds, degenerate })
}

/// Result of the Property-5 tester.
#[derive(Debug, Clone, Serialize)]
pub struct Property5Result {
    /// Smallest K such that every budget-respecting detour found by the
    /// deletion search covers the geodesic within K (i.e. the largest cover
    /// defect over the detour family).
    pub k_hat: u32,
    /// Detour realizing `k_hat`; `None` when the geodesic cannot be avoided
    /// at all (trees), which forces `k_hat` = 0.
    pub witness: Option<PathRec>,
    pub degenerate: bool,
    pub budget: u64,
}

/// Property-5 tester: sweep detours around growing balls at the geodesic
/// midpoint (shortest path avoiding N_s(midpoint), within ‖p‖ ≤ C·d(a,b)),
/// and take the worst coverage max_{x ∈ p} d(x, detour) over the family.
/// Property 5 holds at scale exactly when this stays bounded.
pub fn property5_constant(g: &MetricGraph, p: &PathRec, c: Frac) -> Result<Property5Result> {
    validate_c(c)?;
    check_margin(g, &[p.start(), p.end()])?;
    let d = p.endpoint_dist;
    let budget = c.mul_floor(d as u64);
    if d == 0 {
        return Ok(Property5Result { k_hat: 0, witness: None, degenerate: true, budget });
    }
    let midpoint = p.verts[p.verts.len() / 2];
    let dmid = g.dist_from(midpoint)?;
    let mut k_hat = 0u32;
    let mut witness = None;
    for s in 0.. {
        let forbidden: Vec<bool> = dmid.iter().map(|&x| x <= s).collect();
        let Some(q) = g.shortest_path_avoiding(p.start(), p.end(), &forbidden) else {
            break;
        };
        if q.arclength as u64 > budget {
            break;
        }
        let dq = g.dist_from_set(&q.vertex_set())?;
        let cover = p.verts.iter().map(|&v| dq[v as usize]).max().unwrap();
        if cover > k_hat || witness.is_none() {
            k_hat = cover;
            witness = Some(q);
        }
    }
    Ok(Property5Result { k_hat, witness, degenerate: false, budget })
}

/// Report for the effective "middle recurrence implies stability" direction:
/// every exact (κ′,κ′)-quasigeodesic must stay within d + 4κ′d/t + κ′ of the
/// geodesic, where d = max(m̂_t(4κ′+1), 1).
#[derive(Debug, Clone, Serialize)]
pub struct Thm31Report {
    pub d: u32,
    pub bound: f64,
    pub max_excursion: u32,
    pub holds: bool,
    /// False if the exact scan hit its node budget (bound still reported).
    pub exhaustive: bool,
}

pub fn theorem31_check(
    g: &MetricGraph,
    p: &PathRec,
    t: Frac,
    kappa_prime: Frac,
) -> Result<Thm31Report> {
    validate_t(t)?;
    // C = 4κ′ + 1.
    let c = Frac::new(4 * kappa_prime.num + kappa_prime.den, kappa_prime.den);
    let rec = recurrence_constant(g, p, t, c)?;
    let d = rec.m_hat.max(1);
    let params = QgParams::new(kappa_prime, kappa_prime)?;
    let scan = stability_exact(g, p, &params)?;
    let bound =
        d as f64 + 4.0 * kappa_prime.as_f64() * d as f64 / t.as_f64() + kappa_prime.as_f64();
    Ok(Thm31Report {
        d,
        bound,
        max_excursion: scan.max_excursion,
        holds: (scan.max_excursion as f64) <= bound,
        exhaustive: !scan.lower_bound_only,
    })
}

/// Report for the "stable implies middle recurrent" constant chain: with
/// K = (1/8)[(1−2t)L/(κ²C) − 2λ], the measured envelope must satisfy
/// ρ̄(K)/K ≥ 3κ⁻²(1−2t)/(16C) whenever L is large enough that K ≥ 1 and
/// ρ̄(K)/K ≤ 1.
#[derive(Debug, Clone, Serialize)]
pub struct Thm32Report {
    pub k: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// True when L is in the regime where the chain applies.
    pub applicable: bool,
    pub holds: bool,
}

pub fn theorem32_check(
    rho: &ContractionProfile,
    t: Frac,
    kappa: Frac,
    lambda: Frac,
    c: Frac,
    l: u32,
) -> Result<Thm32Report> {
    validate_t(t)?;
    validate_c(c)?;
    let (tf, kf, lf, cf) = (t.as_f64(), kappa.as_f64(), lambda.as_f64(), c.as_f64());
    let k = ((1.0 - 2.0 * tf) * l as f64 / (kf * kf * cf) - 2.0 * lf) / 8.0;
    if k < 1.0 {
        return Ok(Thm32Report { k, lhs: f64::NAN, rhs: f64::NAN, applicable: false, holds: true });
    }
    let lhs = rho.envelope_at(k) / k;
    let rhs = 3.0 * (1.0 - 2.0 * tf) / (kf * kf * 16.0 * cf);
    let applicable = lhs <= 1.0;
    Ok(Thm32Report { k, lhs, rhs, applicable, holds: !applicable || lhs >= rhs - 1e-9 })
}

/// A recurrence profile across slope budgets at fixed t, with the
/// monotonicity invariant enforced on push.
#[derive(Debug, Clone, Serialize)]
pub struct RecurrenceProfile {
    pub t: Frac,
    pub samples: Vec<(Frac, RecurrenceResult)>,
}

impl RecurrenceProfile {
    pub fn new(t: Frac) -> Self {
        RecurrenceProfile { t, samples: Vec::new() }
    }

    /// Push a (C, result) sample; C must increase and m̂ must be
    /// nondecreasing in C.
    pub fn push(&mut self, c: Frac, result: RecurrenceResult) -> Result<()> {
        if let Some((pc, prev)) = self.samples.last() {
            let increasing = (c.num as u128) * (pc.den as u128) > (pc.num as u128) * (c.den as u128);
            if !increasing {
                return Err(StabilityError::InvariantViolated(
                    "C samples must strictly increase".into(),
                ));
            }
            if result.m_hat < prev.m_hat {
                return Err(StabilityError::InvariantViolated(format!(
                    "m_hat decreased from {} to {} as C grew to {c}",
                    prev.m_hat, result.m_hat
                )));
            }
        }
        self.samples.push((c, result));
        Ok(())
    }
}

/// A stability profile across (κ,λ) grids, with D̂ monotone in the
/// parameters whenever they are comparable.
#[derive(Debug, Clone, Serialize)]
pub struct StabilityProfile {
    pub mode: StabilityMode,
    pub samples: Vec<(QgParams, StabilityResult)>,
}

impl StabilityProfile {
    pub fn new(mode: StabilityMode) -> Self {
        StabilityProfile { mode, samples: Vec::new() }
    }

    pub fn push(&mut self, params: QgParams, result: StabilityResult) -> Result<()> {
        for (pp, pr) in &self.samples {
            let le = |a: Frac, b: Frac| (a.num as u128) * (b.den as u128) <= (b.num as u128) * (a.den as u128);
            if le(pp.kappa, params.kappa)
                && le(pp.lambda, params.lambda)
                && result.d_hat < pr.d_hat
                && !result.lower_bound_only
                && !pr.lower_bound_only
            {
                return Err(StabilityError::InvariantViolated(
                    "D-hat decreased along a comparable parameter increase".into(),
                ));
            }
        }
        self.samples.push((params, result));
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group_spaces::{cayley_ball, GroupSpec};
    use crate::metric_core::MetricGraph;

    fn line(n: u32) -> MetricGraph {
        let edges: Vec<(u32, u32)> = (0..n).map(|i| (i, i + 1)).collect();
        MetricGraph::build(&edges, None).unwrap()
    }

    fn z2_ball(r: u32) -> crate::group_spaces::CayleyBall {
        cayley_ball(&GroupSpec::FreeAbelian(2), r).unwrap()
    }

    /// The x-axis geodesic a^{-n} .. a^n inside a Z^2 ball.
    fn axis(ball: &crate::group_spaces::CayleyBall, n: i32) -> PathRec {
        let verts: Vec<u32> = (-n..=n)
            .map(|k| {
                let w: Vec<i16> = std::iter::repeat(if k >= 0 { 1 } else { -1 })
                    .take(k.unsigned_abs() as usize)
                    .collect();
                ball.vertex_of(&w).unwrap().unwrap()
            })
            .collect();
        ball.graph.path(verts).unwrap()
    }

    #[test]
    fn t_middle_on_lines() {
        let g = line(12);
        let p = g.shortest_path(0, 12).unwrap();
        let mid = t_middle(&g, &p, Frac::new(1, 3)).unwrap();
        assert_eq!(mid.as_slice(), &[4, 5, 6, 7, 8]);
        let mid = t_middle(&g, &p, Frac::parse("0.49").unwrap()).unwrap();
        assert_eq!(mid.as_slice(), &[6]);
        // Single edge: no vertex is t-far from both endpoints.
        let g = line(1);
        let p = g.shortest_path(0, 1).unwrap();
        assert!(t_middle(&g, &p, Frac::new(1, 3)).unwrap().is_empty());
        // Bad t values.
        assert!(matches!(
            t_middle(&g, &p, Frac::new(1, 2)),
            Err(StabilityError::BadT(_))
        ));
        assert!(matches!(
            t_middle(&g, &p, Frac::new(0, 3)),
            Err(StabilityError::BadT(_))
        ));
    }

    #[test]
    fn recurrence_zero_on_trees() {
        let ball = cayley_ball(&GroupSpec::Free(2), 5).unwrap();
        let a = ball.vertex_of(&[1, 1, 1]).unwrap().unwrap();
        let b = ball.vertex_of(&[-1, -1, -1]).unwrap().unwrap();
        let p = ball.graph.shortest_path(a, b).unwrap();
        for c in [2u64, 3, 5] {
            let r = recurrence_constant(&ball.graph, &p, Frac::new(1, 3), Frac::int(c)).unwrap();
            assert_eq!(r.m_hat, 0);
            assert!(r.witness.is_none());
            assert!(!r.degenerate);
        }
    }

    #[test]
    fn recurrence_grows_on_flat_plane() {
        let ball = z2_ball(9);
        let p = axis(&ball, 6);
        let r = recurrence_constant(&ball.graph, &p, Frac::new(1, 3), Frac::int(3)).unwrap();
        assert!(r.m_hat >= 2, "m_hat = {} should grow on Z^2", r.m_hat);
        let w = r.witness.unwrap();
        assert!(w.arclength as u64 <= r.budget);
        // The witness avoids N_{m_hat}(middle).
        let mid = t_middle(&ball.graph, &p, Frac::new(1, 3)).unwrap();
        let dmid = ball.graph.dist_from_set(&mid).unwrap();
        assert!(w.verts.iter().all(|&v| dmid[v as usize] > r.m_hat));
    }

    #[test]
    fn recurrence_matches_oracle_on_cycle_with_chord() {
        // 6-cycle 0..5 plus chord (0,3): geodesic across the chord has
        // detours around either side of the cycle.
        let g = MetricGraph::build(
            &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0), (0, 3)],
            None,
        )
        .unwrap();
        let p = g.path(vec![0, 3]).unwrap();
        for c in [1u64, 2, 3] {
            let est = recurrence_constant(&g, &p, Frac::new(1, 3), Frac::int(c)).unwrap();
            let ora = recurrence_oracle(&g, &p, Frac::new(1, 3), Frac::int(c)).unwrap();
            assert_eq!(est.m_hat, ora, "C = {c}");
        }
    }

    #[test]
    fn recurrence_degenerate_inputs() {
        let g = line(1);
        let p = g.path(vec![0]).unwrap();
        let r = recurrence_constant(&g, &p, Frac::new(1, 3), Frac::int(2)).unwrap();
        assert!(r.degenerate);
        assert_eq!(r.m_hat, 0);
        // Nonzero displacement but empty middle (single edge).
        let p = g.shortest_path(0, 1).unwrap();
        let r = recurrence_constant(&g, &p, Frac::new(1, 3), Frac::int(2)).unwrap();
        assert!(r.degenerate);
    }

    #[test]
    fn margin_violation_detected() {
        let ball = cayley_ball(&GroupSpec::Free(2), 8).unwrap();
        // Endpoint on the outer sphere, margin = 8/4 = 2.
        let far = ball.vertex_of(&[1; 8]).unwrap().unwrap();
        let p = ball.graph.shortest_path(0, far).unwrap();
        assert!(matches!(
            recurrence_constant(&ball.graph, &p, Frac::new(1, 3), Frac::int(2)),
            Err(StabilityError::MarginViolation(_))
        ));
    }

    #[test]
    fn stability_zero_on_tree_geodesics() {
        let ball = cayley_ball(&GroupSpec::Free(2), 3).unwrap();
        let a = ball.vertex_of(&[1, 2]).unwrap().unwrap();
        let b = ball.vertex_of(&[-2, -1]).unwrap().unwrap();
        let p = ball.graph.shortest_path(a, b).unwrap();
        let params = QgParams::new(Frac::int(1), Frac::int(0)).unwrap();
        let exact = stability_constant(&ball.graph, &p, &params, StabilityMode::ExactOracle).unwrap();
        assert_eq!(exact.d_hat, 0);
        assert!(!exact.lower_bound_only);
        let probe = stability_constant(&ball.graph, &p, &params, StabilityMode::Probe).unwrap();
        assert_eq!(probe.d_hat, 0);
    }

    #[test]
    fn stability_probe_grows_on_flat_plane() {
        let params = QgParams::new(Frac::int(3), Frac::int(0)).unwrap();
        let mut values = Vec::new();
        for n in [3i32, 5, 7] {
            let ball = z2_ball((n as u32) * 2);
            let p = axis(&ball, n);
            let r = stability_constant(&ball.graph, &p, &params, StabilityMode::Probe).unwrap();
            assert!(is_discrete_quasigeodesic(&ball.graph, &r.witness, &params).unwrap());
            values.push(r.d_hat);
        }
        assert!(values[2] > values[0], "probe D-hat should grow: {values:?}");
    }

    #[test]
    fn probe_is_dominated_by_exact_oracle() {
        // 6-cycle with chord: both modes run; probe never exceeds exact.
        let g = MetricGraph::build(
            &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0), (0, 3)],
            None,
        )
        .unwrap();
        let p = g.path(vec![0, 3]).unwrap();
        for (kn, ln) in [(1u64, 0u64), (2, 0), (2, 1), (3, 1)] {
            let params = QgParams::new(Frac::int(kn), Frac::int(ln)).unwrap();
            let exact = stability_constant(&g, &p, &params, StabilityMode::ExactOracle).unwrap();
            let probe = stability_constant(&g, &p, &params, StabilityMode::Probe).unwrap();
            assert!(
                probe.d_hat <= exact.d_hat,
                "probe {} > exact {} at kappa={kn} lambda={ln}",
                probe.d_hat,
                exact.d_hat
            );
            assert!(!exact.lower_bound_only);
        }
    }

    #[test]
    fn exact_oracle_rejects_large_graphs() {
        let ball = cayley_ball(&GroupSpec::Free(2), 4).unwrap();
        let p = ball.graph.shortest_path(0, 1).unwrap();
        let params = QgParams::new(Frac::int(1), Frac::int(0)).unwrap();
        assert!(matches!(
            stability_constant(&ball.graph, &p, &params, StabilityMode::ExactOracle),
            Err(StabilityError::TooLarge(_))
        ));
    }

    #[test]
    fn projection_examples() {
        // Z^2 ball: Y = x-axis, x = (0,n) projects near the origin.
        let ball = z2_ball(6);
        let y = axis(&ball, 4).vertex_set();
        let x = ball.vertex_of(&[2, 2, 2, 2]).unwrap().unwrap(); // b^4 = (0,4)
        let proj = projection(&ball.graph, &y, x, 1).unwrap();
        let labels: Vec<&str> = proj
            .iter()
            .map(|&v| ball.graph.label(v).unwrap())
            .collect();
        assert_eq!(labels, vec!["1", "a", "A"]);
        // x in Y with eps = 0 contains x.
        let proj = projection(&ball.graph, &y, 0, 0).unwrap();
        assert!(proj.contains(0));
        // Tree, eps = 0: a single gate vertex.
        let f2 = cayley_ball(&GroupSpec::Free(2), 4).unwrap();
        let yy = {
            let a2 = f2.vertex_of(&[1, 1]).unwrap().unwrap();
            f2.graph.shortest_path(0, a2).unwrap().vertex_set()
        };
        let x = f2.vertex_of(&[2, 1, 1]).unwrap().unwrap();
        let proj = projection(&f2.graph, &yy, x, 0).unwrap();
        assert_eq!(proj.len(), 1);
        assert!(projection(&f2.graph, &VertexSet::default(), 0, 1).is_err());
    }

    #[test]
    fn contraction_dichotomy() {
        // Tree geodesic: rho-hat ≤ 2 everywhere, sublinear verdict.
        let f2 = cayley_ball(&GroupSpec::Free(2), 6).unwrap();
        let tip = f2.vertex_of(&[1; 4]).unwrap().unwrap();
        let tip2 = f2.vertex_of(&[-1; 4]).unwrap().unwrap();
        let gamma = f2.graph.shortest_path(tip2, tip).unwrap().vertex_set();
        let prof = contraction_profile(&f2.graph, &gamma, 1).unwrap();
        assert!(prof.samples.iter().all(|&(_, rho)| rho <= 2), "{:?}", prof.samples);
        assert!(prof.verdict.sublinear);
        // Z^2 axis: rho-hat(r) ≥ r − 1 for r ≥ 3, in the range the ball
        // does not truncate (witness pairs (±⌊r/2⌋, r) need radius 3r/2).
        let ball = z2_ball(9);
        let gamma = axis(&ball, 6).vertex_set();
        let prof = contraction_profile(&ball.graph, &gamma, 1).unwrap();
        for &(r, rho) in prof.samples.iter().filter(|&&(r, _)| (3..=6).contains(&r)) {
            assert!(rho + 1 >= r, "rho({r}) = {rho}");
        }
        assert!(!prof.verdict.sublinear, "{:?}", prof.verdict);
        // Envelope invariants.
        for (&(r, rho), &(_, env)) in prof.samples.iter().zip(prof.envelope.iter()) {
            assert!(env + 1e-9 >= rho as f64);
            let _ = r;
        }
        for w in prof.envelope.windows(2) {
            let (r1, v1) = w[0];
            let (r2, v2) = w[1];
            assert!(v1 / r1 as f64 + 1e-9 >= v2 / r2 as f64, "envelope ratio must not increase");
        }
        // Y = everything: empty r-range, vacuous verdict.
        let all = VertexSet::from_iter(0..f2.graph.vertex_count() as u32);
        let prof = contraction_profile(&f2.graph, &all, 1).unwrap();
        assert!(prof.samples.is_empty());
        assert!(prof.verdict.sublinear);
    }

    #[test]
    fn lemma_verifier_on_plane_arc() {
        // γ = x-axis segment in Z^2; h = the horizontal path at height 2,
        // which stays at distance exactly K = 2 from γ throughout.
        let ball = z2_ball(8);
        let gamma = axis(&ball, 5).vertex_set();
        let h_verts: Vec<u32> = (-3i32..=3)
            .map(|j| {
                let mut w: Vec<i16> = std::iter::repeat(if j >= 0 { 1 } else { -1 })
                    .take(j.unsigned_abs() as usize)
                    .collect();
                w.extend([2, 2]);
                ball.vertex_of(&w).unwrap().unwrap()
            })
            .collect();
        let h = ball.graph.path(h_verts).unwrap();
        let rho = contraction_profile(&ball.graph, &gamma, 1).unwrap();
        let report = verify_contract_lemma(&ball.graph, &gamma, &h, &rho).unwrap();
        assert_eq!(report.k, 2);
        assert!(report.property1_ok && report.property2_ok);
        assert!(report.holds, "lhs {} rhs {}", report.lhs, report.rhs);
        assert!(report.pieces.iter().all(|p| p.radius >= report.k));
    }

    #[test]
    fn lemma_verifier_rejects_dips() {
        let f2 = cayley_ball(&GroupSpec::Free(2), 5).unwrap();
        let b2 = f2.vertex_of(&[2, 2]).unwrap().unwrap();
        let gamma = f2.graph.shortest_path(0, b2).unwrap().vertex_set();
        // Path that touches gamma in its interior.
        let h_verts: Vec<u32> = [vec![1, 1], vec![1], vec![], vec![-1], vec![-1, -1]]
            .iter()
            .map(|w| f2.vertex_of(w).unwrap().unwrap())
            .collect();
        let h = f2.graph.path(h_verts).unwrap();
        let rho = contraction_profile(&f2.graph, &gamma, 1).unwrap();
        assert!(matches!(
            verify_contract_lemma(&f2.graph, &gamma, &h, &rho),
            Err(StabilityError::HypothesisViolated(_))
        ));
    }

    #[test]
    fn property5_zero_on_trees_and_growing_on_plane() {
        let f2 = cayley_ball(&GroupSpec::Free(2), 6).unwrap();
        let a = f2.vertex_of(&[1, 1]).unwrap().unwrap();
        let b = f2.vertex_of(&[-1, -1]).unwrap().unwrap();
        let p = f2.graph.shortest_path(a, b).unwrap();
        let r = property5_constant(&f2.graph, &p, Frac::int(3)).unwrap();
        assert_eq!(r.k_hat, 0);
        assert!(r.witness.is_none());

        let mut ks = Vec::new();
        for n in [3i32, 5, 7] {
            let ball = z2_ball((n as u32) * 2);
            let p = axis(&ball, n);
            ks.push(property5_constant(&ball.graph, &p, Frac::int(3)).unwrap().k_hat);
        }
        assert!(ks[0] < ks[1] && ks[1] < ks[2], "K-hat should grow on Z^2: {ks:?}");
    }

    #[test]
    fn theorem31_holds_on_small_fixtures() {
        let g = MetricGraph::build(
            &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0), (0, 3)],
            None,
        )
        .unwrap();
        let p = g.path(vec![0, 3]).unwrap();
        let report = theorem31_check(&g, &p, Frac::new(1, 3), Frac::int(2)).unwrap();
        assert!(report.exhaustive);
        assert!(report.holds, "excursion {} > bound {}", report.max_excursion, report.bound);
    }

    #[test]
    fn theorem32_chain_with_measured_envelope() {
        let f2 = cayley_ball(&GroupSpec::Free(2), 6).unwrap();
        let tip = f2.vertex_of(&[1; 4]).unwrap().unwrap();
        let tip2 = f2.vertex_of(&[-1; 4]).unwrap().unwrap();
        let gamma = f2.graph.shortest_path(tip2, tip).unwrap().vertex_set();
        let rho = contraction_profile(&f2.graph, &gamma, 1).unwrap();
        for l in [1u32, 10, 50, 200] {
            let report = theorem32_check(
                &rho,
                Frac::new(1, 3),
                Frac::int(1),
                Frac::int(0),
                Frac::int(3),
                l,
            )
            .unwrap();
            assert!(report.holds, "L = {l}: lhs {} rhs {}", report.lhs, report.rhs);
        }
    }

    #[test]
    fn profiles_enforce_monotonicity() {
        let ball = z2_ball(9);
        let p = axis(&ball, 6);
        let mut prof = RecurrenceProfile::new(Frac::new(1, 3));
        for c in [2u64, 3, 5] {
            let r = recurrence_constant(&ball.graph, &p, Frac::new(1, 3), Frac::int(c)).unwrap();
            prof.push(Frac::int(c), r).unwrap();
        }
        assert_eq!(prof.samples.len(), 3);
        // Duplicate C rejected.
        let r = recurrence_constant(&ball.graph, &p, Frac::new(1, 3), Frac::int(5)).unwrap();
        assert!(prof.push(Frac::int(5), r).is_err());
    }
}
