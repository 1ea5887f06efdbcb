//! Regular `{p,q}` tilings of the hyperbolic plane, built layer by layer
//! (concentric coronas of faces around a central `p`-gon), together with a
//! long geodesic through the center for use as a test quasigeodesic.
//!
//! The corona recursion supports `p >= 4`, `q >= 4`: every boundary vertex
//! then needs `q - deg - 1 >= 0` new "vertex faces", which fails for
//! triangle-adjacent types; those are rejected with
//! [`GroupError::UnsupportedTiling`].

use super::GroupError;
use crate::metric_core::{GraphMeta, MetricGraph, PathRec};

/// A ball in a `{p,q}` tiling: the graph, the vertex-id range of each layer,
/// and a geodesic through the central face realizing (close to) a diameter.
#[derive(Debug)]
pub struct TilingGraph {
    pub graph: MetricGraph,
    pub p: u32,
    pub q: u32,
    pub layers: Vec<std::ops::Range<u32>>,
    pub central_geodesic: PathRec,
}

/// Build `layers` coronas of the `{p,q}` tiling around a central `p`-gon.
pub fn tiling_graph(p: u32, q: u32, layers: u32) -> Result<TilingGraph, GroupError> {
    if (p.saturating_sub(2)) * (q.saturating_sub(2)) <= 4 {
        return Err(GroupError::NotHyperbolicType(p, q));
    }
    if p < 4 || q < 4 {
        return Err(GroupError::UnsupportedTiling(p, q));
    }

    let mut edges: Vec<(u32, u32)> = Vec::new();
    let mut deg: Vec<u32> = vec![0; p as usize];
    let mut next_id: u32 = p;
    let add_edge = |edges: &mut Vec<(u32, u32)>, deg: &mut Vec<u32>, u: u32, v: u32| {
        edges.push((u.min(v), u.max(v)));
        deg[u as usize] += 1;
        deg[v as usize] += 1;
    };

    // Layer 0: the central p-cycle.
    let mut boundary: Vec<u32> = (0..p).collect();
    for i in 0..p {
        add_edge(&mut edges, &mut deg, i, (i + 1) % p);
    }
    let mut layer_ranges = vec![0..p];

    for _ in 0..layers {
        let m = boundary.len();
        let layer_start = next_id;
        // Anchors: at boundary vertex v of degree d there are
        // k = q - d - 1 vertex-faces, hence k + 1 anchor vertices shared by
        // consecutive new faces around v.
        let mut anchors: Vec<Vec<u32>> = Vec::with_capacity(m);
        for &v in &boundary {
            let k = q
                .checked_sub(deg[v as usize] + 1)
                .expect("boundary degree exceeds q") as usize;
            let mut a = Vec::with_capacity(k + 1);
            for _ in 0..=k {
                a.push(next_id);
                deg.push(0);
                next_id += 1;
            }
            for &x in &a {
                add_edge(&mut edges, &mut deg, v, x);
            }
            anchors.push(a);
        }
        let mut new_boundary: Vec<u32> = Vec::new();
        for i in 0..m {
            let av = &anchors[i];
            // Vertex faces at boundary[i]: p-gons spanning consecutive
            // anchors with p - 3 fresh vertices in between.
            for j in 1..av.len() {
                let mut prev = av[j - 1];
                new_boundary.push(prev);
                for _ in 0..p - 3 {
                    let f = next_id;
                    deg.push(0);
                    next_id += 1;
                    add_edge(&mut edges, &mut deg, prev, f);
                    new_boundary.push(f);
                    prev = f;
                }
                add_edge(&mut edges, &mut deg, prev, av[j]);
            }
            new_boundary.push(*av.last().unwrap());
            // Edge face over (boundary[i], boundary[i+1]): path from the
            // last anchor of boundary[i] to the first anchor of the next
            // vertex with p - 4 fresh vertices.
            let aw = &anchors[(i + 1) % m];
            let mut prev = *av.last().unwrap();
            for _ in 0..p - 4 {
                let g = next_id;
                deg.push(0);
                next_id += 1;
                add_edge(&mut edges, &mut deg, prev, g);
                new_boundary.push(g);
                prev = g;
            }
            add_edge(&mut edges, &mut deg, prev, aw[0]);
        }
        boundary = new_boundary;
        layer_ranges.push(layer_start..next_id);
    }

    let meta = GraphMeta {
        provenance: format!("tiling p={p} q={q} layers={layers}"),
        radius: Some(layers),
        boundary: boundary.clone(),
    };
    let graph = MetricGraph::build_with_meta(&edges, None, meta)
        .map_err(|e| GroupError::OracleInconsistent(format!("tiling graph invalid: {e}")))?;

    // Interior degrees must equal q: everything except the final boundary.
    let mut on_boundary = vec![false; graph.vertex_count()];
    for &v in &boundary {
        on_boundary[v as usize] = true;
    }
    for v in 0..graph.vertex_count() as u32 {
        let d = graph.neighbors(v).len() as u32;
        if !on_boundary[v as usize] && d != q {
            return Err(GroupError::OracleInconsistent(format!(
                "interior vertex {v} has degree {d}, expected {q}"
            )));
        }
    }

    let central_geodesic = central_geodesic(&graph, p)?;
    Ok(TilingGraph { graph, p, q, layers: layer_ranges, central_geodesic })
}

/// Grow a geodesic through the central face: start with the path
/// `0, 1, ..., floor(p/2)` along the central cycle (a geodesic, since the
/// layer-0 cycle is isometrically embedded for q >= 4), then greedily extend
/// both ends while the extension stays a geodesic, preferring
/// smaller-numbered neighbours for determinism.
fn central_geodesic(graph: &MetricGraph, p: u32) -> Result<PathRec, GroupError> {
    let mut verts: Vec<u32> = (0..=p / 2).collect();
    let err = |e: crate::metric_core::GraphError| GroupError::OracleInconsistent(e.to_string());
    loop {
        let mut extended = false;
        for end in [true, false] {
            let (tip, far) = if end {
                (*verts.last().unwrap(), verts[0])
            } else {
                (verts[0], *verts.last().unwrap())
            };
            let dist_far = graph.dist_from(far).map_err(err)?;
            let want = verts.len() as u32; // current length + 1
            if let Some(&next) = graph
                .neighbors(tip)
                .iter()
                .find(|&&n| dist_far[n as usize] == want)
            {
                if end {
                    verts.push(next);
                } else {
                    verts.insert(0, next);
                }
                extended = true;
            }
        }
        if !extended {
            break;
        }
    }
    graph.path(verts).map_err(err)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent layer recursion counting vertices only through boundary
    /// degree statistics: n2/n3 boundary vertices of degree 2/3 produce
    /// n2(q-2)+n3(q-3) anchors, (n2(q-3)+n3(q-4))(p-3) fresh vertex-face
    /// vertices, and (n2+n3)(p-4) fresh edge-face vertices; anchors have
    /// degree 3 and fresh vertices degree 2 on the new boundary.
    fn expected_counts(p: u64, q: u64, layers: u32) -> u64 {
        let (mut n2, mut n3) = (p, 0u64);
        let mut total = p;
        for _ in 0..layers {
            let anchors = n2 * (q - 2) + n3 * (q - 3);
            let fresh_v = (n2 * (q - 3) + n3 * (q - 4)) * (p - 3);
            let fresh_e = (n2 + n3) * (p - 4);
            total += anchors + fresh_v + fresh_e;
            n3 = anchors;
            n2 = fresh_v + fresh_e;
        }
        total
    }

    #[test]
    fn rejects_non_hyperbolic_and_unsupported() {
        assert_eq!(tiling_graph(4, 4, 2).unwrap_err(), GroupError::NotHyperbolicType(4, 4));
        assert_eq!(tiling_graph(3, 6, 2).unwrap_err(), GroupError::NotHyperbolicType(3, 6));
        assert_eq!(tiling_graph(3, 7, 2).unwrap_err(), GroupError::UnsupportedTiling(3, 7));
        assert_eq!(tiling_graph(7, 3, 2).unwrap_err(), GroupError::UnsupportedTiling(7, 3));
    }

    #[test]
    fn first_corona_of_4_5_matches_hand_count() {
        let t = tiling_graph(4, 5, 1).unwrap();
        // Central square (4) + 12 anchors + 8 vertex-face vertices = 24.
        assert_eq!(t.graph.vertex_count(), 24);
        assert_eq!(expected_counts(4, 5, 1), 24);
        // All four central vertices now have full degree 5.
        for v in 0..4 {
            assert_eq!(t.graph.neighbors(v).len(), 5);
        }
    }

    #[test]
    fn layer_recursion_matches_construction() {
        for (p, q, layers) in [(4u32, 5u32, 4u32), (5, 4, 4), (4, 6, 3), (6, 4, 3), (5, 5, 3)] {
            let t = tiling_graph(p, q, layers).unwrap();
            assert_eq!(
                t.graph.vertex_count() as u64,
                expected_counts(p as u64, q as u64, layers),
                "{{{p},{q}}} x{layers}"
            );
            // Exponential growth: each corona more than 1.5x the last.
            for w in t.layers.windows(2).skip(1) {
                assert!(w[1].len() as f64 > 1.5 * w[0].len() as f64);
            }
        }
    }

    #[test]
    fn central_geodesic_is_a_long_geodesic() {
        let t = tiling_graph(4, 5, 3).unwrap();
        let g = &t.central_geodesic;
        assert_eq!(
            t.graph.dist(g.start(), g.end()).unwrap() as usize,
            g.verts.len() - 1
        );
        // It should span most of the ball: at least one step per layer on
        // each side of the central face.
        assert!(g.verts.len() as u32 >= 2 * 3 + 4 / 2);
    }

    #[test]
    fn layers_agree_with_bfs_rings() {
        // Every layer-k vertex is within graph distance k+1 of the center
        // face and layer indices are nondecreasing along BFS.
        let t = tiling_graph(4, 5, 3).unwrap();
        let d0 = t.graph.dist_from(0).unwrap();
        for (k, range) in t.layers.iter().enumerate() {
            for v in range.clone() {
                assert!(
                    (d0[v as usize] as usize) <= 2 * (k + 1),
                    "layer {k} vertex {v} too far"
                );
            }
        }
    }
}
