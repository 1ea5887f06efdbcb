//! Relatively hyperbolic machinery: peripheral coset structures, coned-off
//! graphs, combinatorial cusped spaces, almost-projections, and the
//! three-verdict stability criterion runner.
//!
//! Peripherals are given by subsets of the ambient generating set; the
//! built-in families (free factors, sub-lattices) all have the property
//! that a normal form lies in the peripheral exactly when it uses only
//! peripheral letters, which is what the membership and intrinsic-metric
//! routines rely on.

use std::collections::HashMap;

use crate::group_spaces::words::{concat, inverse, Word};
use crate::group_spaces::{
    cayley_ball, distortion_profile, orbit_map, CayleyBall, DistortionVerdict, GroupError,
    GroupSpec,
};
use crate::metric_core::{Frac, GraphError, GraphMeta, MetricGraph, VertexSet};
use crate::stability_lab::{recurrence_constant, StabilityError};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RelHypError {
    #[error("peripheral generator {0} is not an ambient generator")]
    PeripheralNotSubgenerated(u16),
    #[error("peripheral must have at least one generator")]
    EmptyPeripheral,
    #[error("coset index out of range")]
    CosetOutsideBall,
    #[error("element {0} is not in the peripheral subgroup")]
    NotPeripheralElement(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Stability(#[from] StabilityError),
}

type Result<T> = std::result::Result<T, RelHypError>;

/// One peripheral coset intersected with the ball.
#[derive(Debug, Clone, Serialize)]
pub struct Coset {
    /// Canonical (shortlex-minimal) representative word.
    pub rep: Word,
    /// Ball vertices in the coset, ascending.
    pub members: Vec<u32>,
    /// True when the coset enters the ball only near the boundary (its
    /// closest point to the basepoint is beyond 3/4 of the radius), so its
    /// trace and projections are clipped; partial cosets are excluded from
    /// diameter trends.
    pub partial: bool,
}

/// Coset decomposition of a Cayley ball along a family of peripheral
/// subgroups, each generated by a subset of the ambient generators.
#[derive(Debug, Clone, Serialize)]
pub struct PeripheralStructure {
    /// Positive generator indices per peripheral.
    pub peripherals: Vec<Vec<u16>>,
    /// `cosets[i]` = cosets of peripheral i meeting the ball.
    pub cosets: Vec<Vec<Coset>>,
    /// `coset_of[i][v]` = index into `cosets[i]` of vertex v's coset.
    pub coset_of: Vec<Vec<u32>>,
}

/// Shortlex-minimal coset representative of `w · ⟨pgens⟩`, found by BFS over
/// right multiplication by peripheral letters along nonincreasing normal
/// forms (minimal representatives of our families are always reachable that
/// way, since stripping the peripheral tail never lengthens a word).
fn coset_rep(spec: &GroupSpec, w: &Word, pgens: &[u16]) -> Result<Word> {
    use std::collections::BTreeSet;
    let mut letters = Vec::new();
    for &g in pgens {
        letters.push(g as i16);
        letters.push(-(g as i16));
    }
    let mut seen: BTreeSet<Word> = BTreeSet::new();
    let mut frontier = vec![spec.normal_form(w)?];
    let mut best = frontier[0].clone();
    seen.insert(best.clone());
    while let Some(cur) = frontier.pop() {
        for &l in &letters {
            let next = spec.normal_form(&concat(&cur, &[l]))?;
            if next.len() > cur.len() || seen.contains(&next) {
                continue;
            }
            if crate::group_spaces::words::shortlex_cmp(&next, &best).is_lt() {
                best = next.clone();
            }
            seen.insert(next.clone());
            frontier.push(next);
        }
    }
    Ok(best)
}

impl PeripheralStructure {
    pub fn new(ball: &CayleyBall, peripherals: &[Vec<u16>]) -> Result<Self> {
        let gen_count = ball.spec.gen_count() as u16;
        for p in peripherals {
            if p.is_empty() {
                return Err(RelHypError::EmptyPeripheral);
            }
            for &g in p {
                if g == 0 || g > gen_count {
                    return Err(RelHypError::PeripheralNotSubgenerated(g));
                }
            }
        }
        let n = ball.graph.vertex_count();
        let mut cosets = Vec::with_capacity(peripherals.len());
        let mut coset_of = Vec::with_capacity(peripherals.len());
        for pgens in peripherals {
            let mut by_rep: HashMap<Word, u32> = HashMap::new();
            let mut list: Vec<Coset> = Vec::new();
            let mut of = vec![0u32; n];
            for v in 0..n {
                let rep = coset_rep(&ball.spec, &ball.words[v], pgens)?;
                let id = *by_rep.entry(rep.clone()).or_insert_with(|| {
                    list.push(Coset { rep, members: Vec::new(), partial: false });
                    (list.len() - 1) as u32
                });
                list[id as usize].members.push(v as u32);
                of[v] = id;
            }
            // Partial flag: the coset only grazes the ball near the
            // boundary, so its trace is clipped.
            for c in &mut list {
                let nearest = c.members.iter().map(|&v| ball.word_length(v)).min().unwrap();
                c.partial = nearest > 3 * ball.radius / 4;
            }
            cosets.push(list);
            coset_of.push(of);
        }
        Ok(PeripheralStructure { peripherals: peripherals.to_vec(), cosets, coset_of })
    }

    /// Intrinsic peripheral word metric between two vertices of the same
    /// coset: the length of the normal form of u⁻¹v, which for the built-in
    /// families is the geodesic length inside the peripheral.
    pub fn intrinsic_dist(&self, ball: &CayleyBall, pi: usize, u: u32, v: u32) -> Result<u32> {
        let diff = ball
            .spec
            .normal_form(&concat(&inverse(&ball.words[u as usize]), &ball.words[v as usize]))?;
        let pgens = &self.peripherals[pi];
        if diff.iter().any(|&l| !pgens.contains(&(l.unsigned_abs() as u16))) {
            return Err(RelHypError::NotPeripheralElement(
                crate::group_spaces::words::word_to_string(&diff),
            ));
        }
        Ok(diff.len() as u32)
    }
}

fn base_edges(g: &MetricGraph) -> Vec<(u32, u32)> {
    let mut edges = Vec::with_capacity(g.edge_count());
    for u in 0..g.vertex_count() as u32 {
        for &v in g.neighbors(u) {
            if u < v {
                edges.push((u, v));
            }
        }
    }
    edges
}

/// Coned-off graph: the base ball plus a clique on every peripheral coset,
/// so every coset has diameter 1.  Vertex ids coincide with the base.
#[derive(Debug)]
pub struct ConedGraph {
    pub graph: MetricGraph,
    pub base_vertex_count: usize,
    pub clique_edge_count: usize,
}

pub fn cone_off(ball: &CayleyBall, ps: &PeripheralStructure) -> Result<ConedGraph> {
    let mut edges = base_edges(&ball.graph);
    let before = edges.len();
    for cosets in &ps.cosets {
        for c in cosets {
            for (i, &u) in c.members.iter().enumerate() {
                for &v in &c.members[i + 1..] {
                    edges.push((u, v));
                }
            }
        }
    }
    edges.sort_unstable();
    edges.dedup();
    let clique_edge_count = edges.len() - before;
    let base_meta = ball.graph.meta();
    let meta = GraphMeta {
        provenance: format!("cone_off of [{}]", base_meta.provenance),
        radius: base_meta.radius,
        boundary: base_meta.boundary.clone(),
    };
    let graph = MetricGraph::build_with_meta(&edges, Some(ball.graph.labels().to_vec()), meta)?;
    Ok(ConedGraph { graph, base_vertex_count: ball.graph.vertex_count(), clique_edge_count })
}

/// A horoball vertex above a coset member.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct HoroVertex {
    pub peripheral: usize,
    pub coset: u32,
    /// Base vertex this column sits over.
    pub base: u32,
    /// Depth n ≥ 1 (depth 0 is the base vertex itself).
    pub depth: u32,
}

/// Groves–Manning cusped space: combinatorial horoballs attached along
/// every peripheral coset, truncated at `depth_cap`.  Base vertex ids are
/// preserved; horoball vertices are appended.
#[derive(Debug)]
pub struct CuspedGraph {
    pub graph: MetricGraph,
    pub base_vertex_count: usize,
    pub depth_cap: u32,
    /// Horoball vertex data, indexed by id − base_vertex_count.
    pub horoballs: Vec<HoroVertex>,
}

impl CuspedGraph {
    /// The 1-Lipschitz comparison map to the coned-off graph on the same
    /// data: base vertices map to themselves, horoball vertices retract to
    /// the base member under their column.
    pub fn cone_comparison_map(&self) -> Vec<u32> {
        let mut map: Vec<u32> = (0..self.base_vertex_count as u32).collect();
        map.extend(self.horoballs.iter().map(|h| h.base));
        map
    }
}

/// Depth cap beyond which horoball shortcuts cannot improve any in-ball
/// distance: ⌈log₂(2·radius)⌉ + 1 (a depth-n hop spans 2ⁿ, and no in-ball
/// pair is farther apart than the ball diameter).
pub fn default_depth_cap(ball: &CayleyBall) -> u32 {
    let diam = (2 * ball.radius).max(1);
    (u32::BITS - (diam - 1).leading_zeros()) + 1
}

pub fn cusp_space(ball: &CayleyBall, ps: &PeripheralStructure, n_max: u32) -> Result<CuspedGraph> {
    let base_n = ball.graph.vertex_count();
    let mut edges = base_edges(&ball.graph);
    let mut labels = ball.graph.labels().to_vec();
    let mut horoballs = Vec::new();
    let mut next_id = base_n as u32;
    for (pi, cosets) in ps.cosets.iter().enumerate() {
        for (ci, c) in cosets.iter().enumerate() {
            if n_max == 0 {
                continue;
            }
            // Intrinsic pairwise distances inside the coset, reused at
            // every depth.
            let m = c.members.len();
            let mut dp = vec![vec![0u32; m]; m];
            for i in 0..m {
                for j in i + 1..m {
                    let d = ps.intrinsic_dist(ball, pi, c.members[i], c.members[j])?;
                    dp[i][j] = d;
                    dp[j][i] = d;
                }
            }
            // Column ids: depth 0 is the base member itself.
            let mut prev: Vec<u32> = c.members.clone();
            for depth in 1..=n_max {
                let level: Vec<u32> = (0..m)
                    .map(|i| {
                        let id = next_id;
                        next_id += 1;
                        horoballs.push(HoroVertex {
                            peripheral: pi,
                            coset: ci as u32,
                            base: c.members[i],
                            depth,
                        });
                        labels.push(format!(
                            "{}@{}",
                            ball.graph.label(c.members[i]).unwrap_or(""),
                            depth
                        ));
                        id
                    })
                    .collect();
                // Vertical edges.
                for i in 0..m {
                    edges.push((prev[i].min(level[i]), prev[i].max(level[i])));
                }
                // Horizontal edges: intrinsic distance ≤ 2^depth.
                let span = 1u32 << depth.min(31);
                for i in 0..m {
                    for j in i + 1..m {
                        if dp[i][j] <= span {
                            edges.push((level[i], level[j]));
                        }
                    }
                }
                prev = level;
            }
        }
    }
    let base_meta = ball.graph.meta();
    let meta = GraphMeta {
        provenance: format!("cusp_space depth_cap={n_max} of [{}]", base_meta.provenance),
        radius: base_meta.radius,
        boundary: base_meta.boundary.clone(),
    };
    let graph = MetricGraph::build_with_meta(&edges, Some(labels), meta)?;
    Ok(CuspedGraph { graph, base_vertex_count: base_n, depth_cap: n_max, horoballs })
}

/// Check the 1-Lipschitz property of the cusp → cone comparison map on
/// every cusp edge: images are at cone distance ≤ 1.
pub fn comparison_is_lipschitz(cusp: &CuspedGraph, cone: &ConedGraph) -> Result<bool> {
    let map = cusp.cone_comparison_map();
    // Adjacency check in the cone for the mapped endpoints of every edge.
    for u in 0..cusp.graph.vertex_count() as u32 {
        for &v in cusp.graph.neighbors(u) {
            if u >= v {
                continue;
            }
            let (a, b) = (map[u as usize], map[v as usize]);
            if a != b && !cone.graph.neighbors(a).contains(&b) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// An almost-projection to a peripheral coset: the +1-almost-nearest coset
/// vertices, with diameter in the coset's intrinsic metric.
#[derive(Debug, Clone, Serialize)]
pub struct ProjectionSet {
    pub peripheral: usize,
    pub coset: u32,
    pub verts: VertexSet,
    pub diam: u32,
}

pub fn almost_projection(
    ball: &CayleyBall,
    ps: &PeripheralStructure,
    pi: usize,
    ci: usize,
    x: u32,
) -> Result<ProjectionSet> {
    let coset = ps
        .cosets
        .get(pi)
        .and_then(|cs| cs.get(ci))
        .ok_or(RelHypError::CosetOutsideBall)?;
    let dx = ball.graph.dist_from(x)?;
    let nearest = coset.members.iter().map(|&v| dx[v as usize]).min().unwrap();
    let verts: Vec<u32> = coset
        .members
        .iter()
        .copied()
        .filter(|&v| dx[v as usize] <= nearest + 1)
        .collect();
    let mut diam = 0;
    for (i, &u) in verts.iter().enumerate() {
        for &v in &verts[i + 1..] {
            diam = diam.max(ps.intrinsic_dist(ball, pi, u, v)?);
        }
    }
    Ok(ProjectionSet { peripheral: pi, coset: ci as u32, verts: VertexSet::new(verts), diam })
}

#[derive(Debug, Clone, Serialize)]
pub struct DiamRow {
    pub peripheral: usize,
    pub coset: u32,
    pub diam: u32,
    pub partial: bool,
}

/// Per-coset diameters of the union of almost-projections of an orbit.
#[derive(Debug, Clone, Serialize)]
pub struct DiamTable {
    pub rows: Vec<DiamRow>,
    /// Max over cosets fully inside the ball; `None` when every coset is
    /// partial.
    pub max_full: Option<u32>,
}

pub fn peripheral_diam(
    ball: &CayleyBall,
    ps: &PeripheralStructure,
    h_orbit: &VertexSet,
) -> Result<DiamTable> {
    if h_orbit.is_empty() {
        return Err(RelHypError::Graph(GraphError::EmptySet));
    }
    // One BFS per orbit point; accumulate the union of almost-projections
    // per coset.
    let mut unions: Vec<Vec<std::collections::BTreeSet<u32>>> = ps
        .cosets
        .iter()
        .map(|cs| vec![std::collections::BTreeSet::new(); cs.len()])
        .collect();
    for &x in h_orbit.iter() {
        let dx = ball.graph.dist_from(x)?;
        for (pi, cosets) in ps.cosets.iter().enumerate() {
            for (ci, c) in cosets.iter().enumerate() {
                let nearest = c.members.iter().map(|&v| dx[v as usize]).min().unwrap();
                for &v in &c.members {
                    if dx[v as usize] <= nearest + 1 {
                        unions[pi][ci].insert(v);
                    }
                }
            }
        }
    }
    let mut rows = Vec::new();
    let mut max_full: Option<u32> = None;
    for (pi, cosets) in ps.cosets.iter().enumerate() {
        for (ci, c) in cosets.iter().enumerate() {
            let verts: Vec<u32> = unions[pi][ci].iter().copied().collect();
            let mut diam = 0;
            for (i, &u) in verts.iter().enumerate() {
                for &v in &verts[i + 1..] {
                    diam = diam.max(ps.intrinsic_dist(ball, pi, u, v)?);
                }
            }
            if !c.partial {
                max_full = Some(max_full.map_or(diam, |m| m.max(diam)));
            }
            rows.push(DiamRow { peripheral: pi, coset: ci as u32, diam, partial: c.partial });
        }
    }
    Ok(DiamTable { rows, max_full })
}

/// Stabilization rule shared with `distortion_profile`: the top three
/// samples agree within 5%.
fn stabilized(values: &[f64]) -> bool {
    let k = values.len().min(3);
    if k == 0 {
        return false;
    }
    let top = &values[values.len() - k..];
    let max = top.iter().cloned().fold(f64::MIN, f64::max);
    let min = top.iter().cloned().fold(f64::MAX, f64::min);
    max - min <= 0.05 * max.abs().max(1.0)
}

#[derive(Debug, Clone, Serialize)]
pub struct CriterionRadiusRow {
    pub radius: u32,
    pub m_hat: u32,
    pub cusp_undistorted: bool,
    pub cone_undistorted: bool,
    pub peripheral_diam: u32,
}

/// Output of the three-verdict criterion runner.
#[derive(Debug, Clone, Serialize)]
pub struct CriterionReport {
    pub rows: Vec<CriterionRadiusRow>,
    /// The H-orbit lies inside a single peripheral coset.
    pub orbit_in_peripheral: bool,
    /// (1) recurrence constants of H-geodesics bounded across radii, and
    /// the orbit is not carried by a peripheral coset.
    pub verdict_recurrence: bool,
    /// (2) the orbit map into the cusped space is undistorted.
    pub verdict_cusp: bool,
    /// (3) the orbit map into the coned-off graph is undistorted and the
    /// peripheral projection diameters stay bounded.
    pub verdict_cone: bool,
    /// All three verdicts agree.
    pub consistent: bool,
}

impl CriterionReport {
    pub fn positive(&self) -> bool {
        self.verdict_recurrence && self.verdict_cusp && self.verdict_cone
    }
}

/// Run the three equivalent stability tests for a subgroup H against a
/// peripheral structure, across a schedule of ball radii.
pub fn criterion_runner(
    spec: &GroupSpec,
    peripherals: &[Vec<u16>],
    h_gens: &[Word],
    radii: &[u32],
) -> Result<CriterionReport> {
    assert!(!radii.is_empty(), "radii schedule must be nonempty");
    let mut rows = Vec::new();
    let mut orbit_in_peripheral = false;
    let mut last_cusp = false;
    let mut last_cone = false;
    for &r in radii {
        let ball = cayley_ball(spec, r)?;
        let ps = PeripheralStructure::new(&ball, peripherals)?;
        // Keep the H-ball inside the trusted margin (endpoints must sit at
        // distance ≥ r/4 from the boundary).
        let max_gen_len = h_gens.iter().map(|g| g.len()).max().unwrap_or(1).max(1) as u32;
        let h_radius = ((3 * r / 4) / max_gen_len).max(1);
        let orbit = orbit_map(&ball, h_gens, h_radius)?;

        // Farthest orbit pair in the ambient metric, lex tie-break.
        let mut distinct: Vec<u32> = orbit.image.clone();
        distinct.sort_unstable();
        distinct.dedup();
        let mut best = (0u32, distinct[0], distinct[0]);
        for &u in &distinct {
            let du = ball.graph.dist_from(u)?;
            for &v in &distinct {
                if v > u && du[v as usize] > best.0 {
                    best = (du[v as usize], u, v);
                }
            }
        }
        let geo = ball.graph.shortest_path(best.1, best.2)?;
        let rec = recurrence_constant(&ball.graph, &geo, Frac::new(1, 3), Frac::int(3))?;

        // Is the whole orbit carried by one coset of one peripheral?
        for (pi, of) in ps.coset_of.iter().enumerate() {
            let c0 = of[orbit.image[0] as usize];
            if orbit.image.iter().all(|&v| of[v as usize] == c0) {
                orbit_in_peripheral = true;
                let _ = pi;
            }
        }

        let cone = cone_off(&ball, &ps)?;
        let cusp = cusp_space(&ball, &ps, default_depth_cap(&ball))?;
        let cusp_prof = distortion_profile(&orbit, &cusp.graph)?;
        let cone_prof = distortion_profile(&orbit, &cone.graph)?;
        last_cusp = matches!(cusp_prof.verdict, DistortionVerdict::Undistorted);
        last_cone = matches!(cone_prof.verdict, DistortionVerdict::Undistorted);

        let orbit_set = VertexSet::from_iter(orbit.image.iter().copied());
        let diam = peripheral_diam(&ball, &ps, &orbit_set)?.max_full.unwrap_or(0);

        rows.push(CriterionRadiusRow {
            radius: r,
            m_hat: rec.m_hat,
            cusp_undistorted: last_cusp,
            cone_undistorted: last_cone,
            peripheral_diam: diam,
        });
    }
    let m_hats: Vec<f64> = rows.iter().map(|r| r.m_hat as f64).collect();
    let diams: Vec<f64> = rows.iter().map(|r| r.peripheral_diam as f64).collect();
    let verdict_recurrence = stabilized(&m_hats) && !orbit_in_peripheral;
    let verdict_cusp = last_cusp;
    let verdict_cone = last_cone && stabilized(&diams);
    let consistent =
        verdict_recurrence == verdict_cusp && verdict_cusp == verdict_cone;
    Ok(CriterionReport {
        rows,
        orbit_in_peripheral,
        verdict_recurrence,
        verdict_cusp,
        verdict_cone,
        consistent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group_spaces::words::parse_word;

    fn f2(r: u32) -> CayleyBall {
        cayley_ball(&GroupSpec::Free(2), r).unwrap()
    }

    fn a_peripheral(ball: &CayleyBall) -> PeripheralStructure {
        PeripheralStructure::new(ball, &[vec![1]]).unwrap()
    }

    #[test]
    fn coset_enumeration_partitions_the_ball() {
        let ball = f2(4);
        let ps = a_peripheral(&ball);
        let total: usize = ps.cosets[0].iter().map(|c| c.members.len()).sum();
        assert_eq!(total, ball.graph.vertex_count());
        // The ⟨a⟩-coset of the identity is the a-line through 1.
        let id_coset = ps.coset_of[0][0] as usize;
        let c = &ps.cosets[0][id_coset];
        assert!(c.rep.is_empty());
        assert_eq!(c.members.len(), 9); // a^-4 .. a^4
        assert!(!c.partial);
        // A coset met only near the boundary is flagged partial.
        let deep = ball.vertex_of(&[2; 4]).unwrap().unwrap();
        let deep_coset = ps.coset_of[0][deep as usize] as usize;
        assert!(ps.cosets[0][deep_coset].partial);
        // Intrinsic metric along the line.
        let a2 = ball.vertex_of(&[1, 1]).unwrap().unwrap();
        let am1 = ball.vertex_of(&[-1]).unwrap().unwrap();
        assert_eq!(ps.intrinsic_dist(&ball, 0, a2, am1).unwrap(), 3);
        assert!(ps.intrinsic_dist(&ball, 0, 0, ball.vertex_of(&[2]).unwrap().unwrap()).is_err());
        // Bad peripheral generator.
        assert!(matches!(
            PeripheralStructure::new(&ball, &[vec![3]]),
            Err(RelHypError::PeripheralNotSubgenerated(3))
        ));
    }

    #[test]
    fn cone_collapses_peripheral_cosets() {
        let ball = f2(5);
        let ps = a_peripheral(&ball);
        let cone = cone_off(&ball, &ps).unwrap();
        // d_cone(1, a^5) = 1 via the coset clique.
        let a5 = ball.vertex_of(&[1; 5]).unwrap().unwrap();
        assert_eq!(cone.graph.dist(0, a5).unwrap(), 1);
        // No a-coset shortcut helps a pure-b word: d_cone(1, b^n) = n.
        for n in 1..=4 {
            let bn = ball.vertex_of(&vec![2; n]).unwrap().unwrap();
            assert_eq!(cone.graph.dist(0, bn).unwrap(), n as u32);
        }
        // Peripheral = whole group: diameter 1.
        let whole = PeripheralStructure::new(&ball, &[vec![1, 2]]).unwrap();
        assert_eq!(whole.cosets[0].len(), 1);
        let cone = cone_off(&ball, &whole).unwrap();
        let far = ball.vertex_of(&[1, 2, 1, 2, 1]).unwrap().unwrap();
        assert_eq!(cone.graph.dist(0, far).unwrap(), 1);
    }

    #[test]
    fn cusp_distances_are_logarithmic_in_the_horoball() {
        // One horoball over the full group Z = ⟨a⟩: d_cusp(1, a^{2^k}) is
        // within ±2 of 2k.
        let ball = cayley_ball(&GroupSpec::Free(1), 16).unwrap();
        let ps = PeripheralStructure::new(&ball, &[vec![1]]).unwrap();
        let cusp = cusp_space(&ball, &ps, default_depth_cap(&ball)).unwrap();
        for k in 2u32..=4 {
            let target = ball.vertex_of(&vec![1; 1 << k]).unwrap().unwrap();
            let d = cusp.graph.dist(0, target).unwrap();
            assert!(
                (d as i64 - 2 * k as i64).abs() <= 2,
                "d_cusp(1, a^{}) = {d}, expected ≈ {}",
                1 << k,
                2 * k
            );
        }
        // Depth cap 0: metric identical to the base on base vertices.
        let flat = cusp_space(&ball, &ps, 0).unwrap();
        assert_eq!(flat.graph.vertex_count(), ball.graph.vertex_count());
        let a9 = ball.vertex_of(&vec![1; 9]).unwrap().unwrap();
        assert_eq!(flat.graph.dist(0, a9).unwrap(), 9);
    }

    #[test]
    fn cusp_cone_comparison_and_metric_order() {
        let ball = f2(4);
        let ps = a_peripheral(&ball);
        let cone = cone_off(&ball, &ps).unwrap();
        let cusp = cusp_space(&ball, &ps, default_depth_cap(&ball)).unwrap();
        assert!(comparison_is_lipschitz(&cusp, &cone).unwrap());
        // d_cone ≤ d_cusp ≤ d_base pairwise on base vertices.
        for u in 0..ball.graph.vertex_count() as u32 {
            let db = ball.graph.dist_from(u).unwrap();
            let dc = cone.graph.dist_from(u).unwrap();
            let dh = cusp.graph.dist_from(u).unwrap();
            for v in 0..ball.graph.vertex_count() {
                assert!(dc[v] <= dh[v] && dh[v] <= db[v], "order violated at ({u},{v})");
            }
        }
    }

    #[test]
    fn almost_projection_examples() {
        let ball = f2(6);
        let ps = a_peripheral(&ball);
        let id_coset = ps.coset_of[0][0] as usize;
        // π_⟨a⟩(b^n) = {1, a, a⁻¹}, diameter 2.
        for n in 2..=4 {
            let bn = ball.vertex_of(&vec![2; n]).unwrap().unwrap();
            let proj = almost_projection(&ball, &ps, 0, id_coset, bn).unwrap();
            let labels: Vec<&str> =
                proj.verts.iter().map(|&v| ball.graph.label(v).unwrap()).collect();
            assert_eq!(labels, ["1", "a", "A"]);
            assert_eq!(proj.diam, 2);
        }
        // π_⟨a⟩((ab)^n) = {1, a, a²}, diameter 2, independent of n.
        for n in 1..=3 {
            let w: Word = parse_word(&"ab".repeat(n), 2).unwrap();
            let x = ball.vertex_of(&w).unwrap().unwrap();
            let proj = almost_projection(&ball, &ps, 0, id_coset, x).unwrap();
            let labels: Vec<&str> =
                proj.verts.iter().map(|&v| ball.graph.label(v).unwrap()).collect();
            assert_eq!(labels, ["1", "a", "aa"], "n = {n}");
            assert_eq!(proj.diam, 2);
        }
        // x in the coset: projection contains x, diameter ≤ 2.
        let a3 = ball.vertex_of(&[1, 1, 1]).unwrap().unwrap();
        let proj = almost_projection(&ball, &ps, 0, id_coset, a3).unwrap();
        assert!(proj.verts.contains(a3));
        assert!(proj.diam <= 2);
        assert!(matches!(
            almost_projection(&ball, &ps, 0, 10_000, 0),
            Err(RelHypError::CosetOutsideBall)
        ));
    }

    #[test]
    fn peripheral_diam_signatures() {
        let ball = f2(6);
        let ps = a_peripheral(&ball);
        // H = ⟨b⟩: flat signature, max diameter 2.
        let orbit: Vec<u32> = (-4i32..=4)
            .map(|k| {
                let w: Vec<i16> = std::iter::repeat(if k >= 0 { 2 } else { -2 })
                    .take(k.unsigned_abs() as usize)
                    .collect();
                ball.vertex_of(&w).unwrap().unwrap()
            })
            .collect();
        let table = peripheral_diam(&ball, &ps, &VertexSet::new(orbit)).unwrap();
        assert!(table.max_full.unwrap() <= 2);
        // H = ⟨a⟩ against its own coset: unbounded signature (≈ 2·radius).
        let orbit: Vec<u32> = (-4i32..=4)
            .map(|k| {
                let w: Vec<i16> = std::iter::repeat(if k >= 0 { 1 } else { -1 })
                    .take(k.unsigned_abs() as usize)
                    .collect();
                ball.vertex_of(&w).unwrap().unwrap()
            })
            .collect();
        let table = peripheral_diam(&ball, &ps, &VertexSet::new(orbit)).unwrap();
        let id_coset = ps.coset_of[0][0];
        let row = table.rows.iter().find(|r| r.coset == id_coset).unwrap();
        assert!(row.diam >= 8, "diam = {}", row.diam);
        // H = {1}: every diameter ≤ 2.
        let table = peripheral_diam(&ball, &ps, &VertexSet::singleton(0)).unwrap();
        assert!(table.rows.iter().all(|r| r.diam <= 2));
    }

    #[test]
    fn peripheral_diam_is_equivariant() {
        let ball = f2(4);
        let ps = a_peripheral(&ball);
        let orbit: Vec<u32> = [vec![], vec![2], vec![-2]]
            .iter()
            .map(|w| ball.vertex_of(w).unwrap().unwrap())
            .collect();
        let table = peripheral_diam(&ball, &ps, &VertexSet::new(orbit)).unwrap();
        // Translate by g = a: same multiset of diameters on full cosets.
        let g: Word = vec![1];
        let translated: Vec<u32> = [vec![], vec![2], vec![-2]]
            .iter()
            .map(|w| {
                let gw = ball.spec.normal_form(&concat(&g, w)).unwrap();
                ball.vertex_of(&gw).unwrap().unwrap()
            })
            .collect();
        let table2 = peripheral_diam(&ball, &ps, &VertexSet::new(translated)).unwrap();
        let mut d1: Vec<u32> =
            table.rows.iter().filter(|r| !r.partial).map(|r| r.diam).collect();
        let mut d2: Vec<u32> =
            table2.rows.iter().filter(|r| !r.partial).map(|r| r.diam).collect();
        d1.sort_unstable();
        d2.sort_unstable();
        assert_eq!(d1, d2);
    }

    #[test]
    fn criterion_free_factor_is_positive() {
        let report =
            criterion_runner(&GroupSpec::Free(2), &[vec![1]], &[vec![2]], &[4, 5, 6, 7, 8])
                .unwrap();
        assert!(report.verdict_recurrence, "{report:?}");
        assert!(report.verdict_cusp, "{report:?}");
        assert!(report.verdict_cone, "{report:?}");
        assert!(report.consistent && report.positive());
    }

    #[test]
    fn criterion_peripheral_subgroup_is_negative() {
        let report =
            criterion_runner(&GroupSpec::Free(2), &[vec![1]], &[vec![1]], &[4, 5, 6, 7, 8])
                .unwrap();
        assert!(report.orbit_in_peripheral);
        assert!(!report.verdict_recurrence, "{report:?}");
        assert!(!report.verdict_cusp, "{report:?}");
        assert!(!report.verdict_cone, "{report:?}");
        assert!(report.consistent && !report.positive());
    }

    #[test]
    fn criterion_free_factor_over_flat_is_positive() {
        let spec = GroupSpec::FreeProduct(
            Box::new(GroupSpec::FreeAbelian(2)),
            Box::new(GroupSpec::Free(1)),
        );
        let report = criterion_runner(&spec, &[vec![1, 2]], &[vec![3]], &[3, 4, 5, 6]).unwrap();
        assert!(report.consistent && report.positive(), "{report:?}");
    }
}
