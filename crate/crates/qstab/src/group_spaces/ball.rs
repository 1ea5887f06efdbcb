//! Breadth-first construction of metric balls in Cayley graphs.

use super::spec::GroupSpec;
use super::words::{concat, shortlex_cmp, word_to_string, Word};
use super::GroupError;
use crate::metric_core::{GraphMeta, MetricGraph};
use std::collections::{BTreeSet, HashMap};

/// Default cap on the number of vertices a ball may contain.
pub const DEFAULT_VERTEX_BUDGET: usize = 2_000_000;

/// A ball of given radius around the identity in a Cayley graph, with the
/// word data needed to interpret vertices as group elements.
///
/// Vertices are numbered sphere by sphere, shortlex within each sphere, so
/// vertex 0 is the identity and the numbering is deterministic.
#[derive(Debug)]
pub struct CayleyBall {
    pub graph: MetricGraph,
    /// Normal form of each vertex, indexed by vertex id.
    pub words: Vec<Word>,
    /// Inverse lookup: normal form -> vertex id.
    pub index: HashMap<Word, u32>,
    pub spec: GroupSpec,
    pub radius: u32,
    /// `spheres[r]` is the half-open vertex-id range of the sphere of radius `r`.
    pub spheres: Vec<std::ops::Range<u32>>,
}

impl CayleyBall {
    /// Vertex id of a group element given by any word, if it lies in the ball.
    pub fn vertex_of(&self, w: &[i16]) -> Result<Option<u32>, GroupError> {
        Ok(self.index.get(&self.spec.normal_form(w)?).copied())
    }

    /// Word length (= graph distance from the identity) of a vertex.
    pub fn word_length(&self, v: u32) -> u32 {
        self.words[v as usize].len() as u32
    }
}

/// Build the radius-`radius` ball with the default vertex budget.
pub fn cayley_ball(spec: &GroupSpec, radius: u32) -> Result<CayleyBall, GroupError> {
    cayley_ball_with_budget(spec, radius, DEFAULT_VERTEX_BUDGET)
}

/// Build the radius-`radius` ball, failing with [`GroupError::BallTooLarge`]
/// if more than `budget` vertices would be needed.
pub fn cayley_ball_with_budget(
    spec: &GroupSpec,
    radius: u32,
    budget: usize,
) -> Result<CayleyBall, GroupError> {
    let k = spec.gen_count() as i16;
    let letters: Vec<i16> = (1..=k).flat_map(|g| [g, -g]).collect();

    let mut words: Vec<Word> = vec![Vec::new()];
    let mut index: HashMap<Word, u32> = HashMap::new();
    index.insert(Vec::new(), 0);
    let mut spheres = vec![0u32..1u32];
    let mut frontier: Vec<u32> = vec![0];

    for r in 1..=radius {
        let mut layer: BTreeSet<Word> = BTreeSet::new();
        for &v in &frontier {
            for &l in &letters {
                let nf = spec.normal_form(&concat(&words[v as usize], &[l]))?;
                if nf.len() as u32 == r && !index.contains_key(&nf) {
                    layer.insert(nf);
                } else if nf.len() as u32 > r {
                    return Err(GroupError::OracleInconsistent(format!(
                        "one letter lengthened {} by more than 1",
                        word_to_string(&words[v as usize])
                    )));
                }
            }
        }
        // BTreeSet orders words lexicographically on raw letters; re-sort by
        // shortlex letter ranking (all the same length here, so this only
        // reorders inverse-vs-next-generator ties).
        let mut layer: Vec<Word> = layer.into_iter().collect();
        layer.sort_by(|a, b| shortlex_cmp(a, b));
        let start = words.len() as u32;
        if words.len() + layer.len() > budget {
            return Err(GroupError::BallTooLarge(budget));
        }
        frontier = Vec::with_capacity(layer.len());
        for w in layer {
            let id = words.len() as u32;
            index.insert(w.clone(), id);
            words.push(w);
            frontier.push(id);
        }
        spheres.push(start..words.len() as u32);
    }

    // Edges: v -- v*l whenever both endpoints are in the ball.
    let mut edges: BTreeSet<(u32, u32)> = BTreeSet::new();
    for (v, w) in words.iter().enumerate() {
        for &l in &letters {
            let nf = spec.normal_form(&concat(w, &[l]))?;
            if let Some(&u) = index.get(&nf) {
                let v = v as u32;
                if u != v {
                    edges.insert((v.min(u), v.max(u)));
                }
            }
        }
    }

    let labels: Vec<String> = words.iter().map(|w| word_to_string(w)).collect();
    let meta = GraphMeta {
        provenance: format!("cayley_ball spec={spec} radius={radius}"),
        radius: Some(radius),
        boundary: spheres.last().map_or(Vec::new(), |r| r.clone().collect()),
    };
    let edges: Vec<(u32, u32)> = edges.into_iter().collect();
    let graph = MetricGraph::build_with_meta(&edges, Some(labels), meta)
        .map_err(|e| GroupError::OracleInconsistent(format!("ball graph invalid: {e}")))?;
    if graph.vertex_count() != words.len() {
        return Err(GroupError::OracleInconsistent(
            "ball graph has isolated vertices".into(),
        ));
    }

    // The BFS layering of the graph must agree with word length; this is the
    // cheap online check that the oracle really is geodesic.
    let dist = graph
        .dist_from(0)
        .map_err(|e| GroupError::OracleInconsistent(e.to_string()))?;
    for (v, w) in words.iter().enumerate() {
        if dist[v] as usize != w.len() {
            return Err(GroupError::OracleInconsistent(format!(
                "graph distance {} != word length {} at {}",
                dist[v],
                w.len(),
                word_to_string(w)
            )));
        }
    }

    Ok(CayleyBall { graph, words, index, spec: spec.clone(), radius, spheres })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_group_ball_counts() {
        // |B_R| in F_2 is 1 + 4 * (3^R - 1) / 2: radius 2 gives 17.
        let b = cayley_ball(&GroupSpec::parse("free(2)").unwrap(), 2).unwrap();
        assert_eq!(b.graph.vertex_count(), 17);
        assert_eq!(b.spheres[1], 1..5);
        assert_eq!(b.spheres[2], 5..17);
        // A tree: edges = vertices - 1.
        assert_eq!(b.graph.edge_count(), 16);
    }

    #[test]
    fn abelian_ball_counts() {
        // |B_R| in Z^2 is 2R^2 + 2R + 1.
        for r in 1..=5u32 {
            let b = cayley_ball(&GroupSpec::parse("free_abelian(2)").unwrap(), r).unwrap();
            assert_eq!(b.graph.vertex_count() as u32, 2 * r * r + 2 * r + 1);
        }
    }

    #[test]
    fn vertex_lookup_and_ordering() {
        let b = cayley_ball(&GroupSpec::parse("free(2)").unwrap(), 3).unwrap();
        // Identity first, then shortlex: a, A, b, B.
        assert_eq!(b.graph.label(0), Some("1"));
        assert_eq!(b.graph.label(1), Some("a"));
        assert_eq!(b.graph.label(2), Some("A"));
        assert_eq!(b.graph.label(3), Some("b"));
        assert_eq!(b.graph.label(4), Some("B"));
        let w = b.spec.parse_element("abA").unwrap();
        let v = b.vertex_of(&w).unwrap().unwrap();
        assert_eq!(b.word_length(v), 3);
        // Outside the ball.
        let w = b.spec.parse_element("abab").unwrap();
        assert_eq!(b.vertex_of(&w).unwrap(), None);
    }

    #[test]
    fn budget_is_enforced() {
        assert_eq!(
            cayley_ball_with_budget(&GroupSpec::Free(2), 5, 100).unwrap_err(),
            GroupError::BallTooLarge(100)
        );
    }

    #[test]
    fn small_cancellation_ball_is_vertex_transitive_locally() {
        // Genus-2 surface group: every vertex well inside the ball has
        // degree 8 (four generators and inverses, no two coincide).
        let g = GroupSpec::parse("small_cancellation(abABcdCD)").unwrap();
        let b = cayley_ball(&g, 3).unwrap();
        for v in b.spheres[0].clone().chain(b.spheres[1].clone()) {
            assert_eq!(b.graph.neighbors(v).len(), 8, "vertex {v}");
        }
    }

    #[test]
    fn free_product_ball_growth() {
        // Z^2 * Z mixes flat and branching growth; check against a
        // brute-force enumeration by normal forms at small radius.
        let g = GroupSpec::parse("free_product(free_abelian(2),free(1))").unwrap();
        let b = cayley_ball(&g, 3).unwrap();
        // Sphere 1 has 6 elements (a, A, b, B, c, C).
        assert_eq!(b.spheres[1].len(), 6);
        let dist = b.graph.dist_from(0).unwrap();
        assert!(dist.iter().all(|&d| d <= 3));
    }
}
