//! Space construction for scenarios: Cayley balls and hyperbolic tilings,
//! with text (de)serialization so built graphs live in the cache.

use qstab::group_spaces::{cayley_ball_with_budget, tiling_graph, CayleyBall, GroupSpec, TilingGraph};
use qstab::group_spaces::words::{parse_word, word_to_string};
use qstab::metric_core::{MetricGraph, PathRec};
#[derive(Debug, Clone, PartialEq)]
pub enum SpaceSpec {
    Group(GroupSpec),
    Tiling { p: u32, q: u32 },
}

impl SpaceSpec {
    pub fn parse(s: &str) -> Result<Self, String> {
        let s = s.trim();
        if let Some(args) = s.strip_prefix("tiling(").and_then(|r| r.strip_suffix(')')) {
            let parts: Vec<&str> = args.split(',').map(str::trim).collect();
            if parts.len() != 2 {
                return Err(format!("tiling takes (p,q), got {s:?}"));
            }
            let p = parts[0].parse().map_err(|_| format!("bad p in {s:?}"))?;
            let q = parts[1].parse().map_err(|_| format!("bad q in {s:?}"))?;
            return Ok(SpaceSpec::Tiling { p, q });
        }
        GroupSpec::parse(s).map(SpaceSpec::Group).map_err(|e| e.to_string())
    }
}

impl std::fmt::Display for SpaceSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SpaceSpec::Group(g) => write!(f, "{g}"),
            SpaceSpec::Tiling { p, q } => write!(f, "tiling({p},{q})"),
        }
    }
}

/// A built experiment space.
pub enum Space {
    Ball(CayleyBall),
    Tiling(TilingGraph),
}

impl Space {
    pub fn graph(&self) -> &MetricGraph {
        match self {
            Space::Ball(b) => &b.graph,
            Space::Tiling(t) => &t.graph,
        }
    }
}

/// Smallest ball radius whose margin rule (`radius/4` from the boundary)
/// trusts a vertex at word length `n`.
pub fn radius_for_wordlen(n: u32) -> u32 {
    let mut r = n.max(1);
    while r - n < r / 4 {
        r += 1;
    }
    r
}

/// Build the space at a given size (ball radius, or corona count for
/// tilings).
pub fn build_space(spec: &SpaceSpec, size: u32, vertex_cap: usize) -> Result<Space, String> {
    match spec {
        SpaceSpec::Group(g) => cayley_ball_with_budget(g, size, vertex_cap)
            .map(Space::Ball)
            .map_err(|e| e.to_string()),
        SpaceSpec::Tiling { p, q } => {
            tiling_graph(*p, *q, size).map(Space::Tiling).map_err(|e| e.to_string())
        }
    }
}

/// Reference geodesic of endpoint distance `len` in the space: the
/// first-generator axis through the identity in a ball, or the centered
/// subpath of the central geodesic in a tiling.
pub fn reference_geodesic(space: &Space, len: u32) -> Result<PathRec, String> {
    match space {
        Space::Ball(ball) => {
            let n1 = (len / 2) as i32;
            let n2 = (len - len / 2) as i32;
            let verts: Vec<u32> = (-n1..=n2)
                .map(|k| {
                    let w: Vec<i16> = std::iter::repeat(if k >= 0 { 1 } else { -1 })
                        .take(k.unsigned_abs() as usize)
                        .collect();
                    ball.vertex_of(&w)
                        .map_err(|e| e.to_string())?
                        .ok_or_else(|| format!("axis point a^{k} outside ball"))
                })
                .collect::<Result<_, String>>()?;
            let p = ball.graph.path(verts).map_err(|e| e.to_string())?;
            if p.endpoint_dist != len {
                return Err(format!(
                    "axis path has endpoint distance {} ≠ {len}; not a geodesic axis",
                    p.endpoint_dist
                ));
            }
            Ok(p)
        }
        Space::Tiling(t) => {
            let full = &t.central_geodesic;
            let total = full.endpoint_dist;
            if len > total {
                return Err(format!(
                    "central geodesic has length {total}, cannot cut length {len}"
                ));
            }
            let off = ((total - len) / 2) as usize;
            let verts = full.verts[off..off + len as usize + 1].to_vec();
            t.graph.path(verts).map_err(|e| e.to_string())
        }
    }
}

/// Serialize a Cayley ball (spec, radius, vertex words, graph) for the
/// cache.
pub fn ball_to_text(ball: &CayleyBall) -> String {
    let mut out = String::new();
    out.push_str(&format!("ball spec={} radius={}\n", ball.spec, ball.radius));
    out.push_str(&format!("words {}\n", ball.words.len()));
    for w in &ball.words {
        out.push_str(&word_to_string(w));
        out.push('\n');
    }
    out.push_str(&ball.graph.to_text());
    out
}

pub fn ball_from_text(text: &str) -> Result<CayleyBall, String> {
    let mut lines = text.lines();
    let header = lines.next().ok_or("empty ball payload")?;
    let rest = header.strip_prefix("ball spec=").ok_or("bad ball header")?;
    let (spec_s, radius_s) =
        rest.rsplit_once(" radius=").ok_or("bad ball header (radius)")?;
    let spec = GroupSpec::parse(spec_s).map_err(|e| e.to_string())?;
    let radius: u32 = radius_s.parse().map_err(|_| "bad radius")?;
    let count: usize = lines
        .next()
        .and_then(|l| l.strip_prefix("words "))
        .ok_or("bad words header")?
        .parse()
        .map_err(|_| "bad word count")?;
    let mut words = Vec::with_capacity(count);
    for _ in 0..count {
        let l = lines.next().ok_or("truncated word list")?;
        words.push(parse_word(l, spec.gen_count()).map_err(|e| e.to_string())?);
    }
    let graph_text: String = lines.collect::<Vec<_>>().join("\n");
    let graph = MetricGraph::from_text(&graph_text).map_err(|e| e.to_string())?;
    if graph.vertex_count() != words.len() {
        return Err("word/vertex count mismatch".into());
    }
    let index = words
        .iter()
        .enumerate()
        .map(|(i, w)| (w.clone(), i as u32))
        .collect();
    // Vertices are stored in sphere order; recover the sphere ranges from
    // the (nondecreasing) word lengths.
    let mut spheres = Vec::new();
    let mut start = 0u32;
    let mut cur = 0usize;
    for (i, w) in words.iter().enumerate() {
        if w.len() != cur {
            if w.len() != cur + 1 {
                return Err("words not in sphere order".into());
            }
            spheres.push(start..i as u32);
            start = i as u32;
            cur = w.len();
        }
    }
    spheres.push(start..words.len() as u32);
    Ok(CayleyBall { graph, words, index, spec, radius, spheres })
}

/// Serialize a tiling (p, q, layer ranges, central geodesic, graph).
pub fn tiling_to_text(t: &TilingGraph) -> String {
    let layers: Vec<String> =
        t.layers.iter().map(|r| format!("{}..{}", r.start, r.end)).collect();
    let central: Vec<String> =
        t.central_geodesic.verts.iter().map(|v| v.to_string()).collect();
    format!(
        "tiling p={} q={}\nlayers {}\ncentral {}\n{}",
        t.p,
        t.q,
        layers.join(";"),
        central.join(","),
        t.graph.to_text()
    )
}

pub fn tiling_from_text(text: &str) -> Result<TilingGraph, String> {
    let mut lines = text.lines();
    let header = lines.next().ok_or("empty tiling payload")?;
    let rest = header.strip_prefix("tiling p=").ok_or("bad tiling header")?;
    let (p_s, q_s) = rest.split_once(" q=").ok_or("bad tiling header (q)")?;
    let p: u32 = p_s.parse().map_err(|_| "bad p")?;
    let q: u32 = q_s.parse().map_err(|_| "bad q")?;
    let layers = lines
        .next()
        .and_then(|l| l.strip_prefix("layers "))
        .ok_or("bad layers line")?
        .split(';')
        .map(|r| {
            let (a, b) = r.split_once("..").ok_or("bad layer range")?;
            Ok(a.parse().map_err(|_| "bad layer start")?..b.parse().map_err(|_| "bad layer end")?)
        })
        .collect::<Result<Vec<_>, &str>>()
        .map_err(String::from)?;
    let central: Vec<u32> = lines
        .next()
        .and_then(|l| l.strip_prefix("central "))
        .ok_or("bad central line")?
        .split(',')
        .map(|v| v.parse().map_err(|_| "bad central vertex".to_string()))
        .collect::<Result<_, _>>()?;
    let graph_text: String = lines.collect::<Vec<_>>().join("\n");
    let graph = MetricGraph::from_text(&graph_text).map_err(|e| e.to_string())?;
    let central_geodesic = graph.path(central).map_err(|e| e.to_string())?;
    Ok(TilingGraph { graph, p, q, layers, central_geodesic })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_roundtrip() {
        for s in ["free(2)", "free_abelian(2)", "tiling(4,5)", "free_product(free_abelian(2),free(1))"] {
            let spec = SpaceSpec::parse(s).unwrap();
            assert_eq!(spec.to_string(), s);
        }
        assert!(SpaceSpec::parse("tiling(4)").is_err());
    }

    #[test]
    fn ball_text_roundtrip() {
        let Space::Ball(ball) = build_space(&SpaceSpec::parse("free(2)").unwrap(), 3, 10_000).unwrap()
        else {
            unreachable!()
        };
        let text = ball_to_text(&ball);
        let back = ball_from_text(&text).unwrap();
        assert_eq!(back.words, ball.words);
        assert_eq!(back.graph.to_text(), ball.graph.to_text());
        assert_eq!(back.spheres, ball.spheres);
        assert_eq!(ball_to_text(&back), text);
    }

    #[test]
    fn tiling_text_roundtrip() {
        let Space::Tiling(t) = build_space(&SpaceSpec::parse("tiling(4,5)").unwrap(), 3, 10_000_000)
            .unwrap()
        else {
            unreachable!()
        };
        let text = tiling_to_text(&t);
        let back = tiling_from_text(&text).unwrap();
        assert_eq!(back.graph.to_text(), t.graph.to_text());
        assert_eq!(back.central_geodesic.verts, t.central_geodesic.verts);
        assert_eq!(tiling_to_text(&back), text);
    }

    #[test]
    fn reference_geodesics() {
        let space = build_space(&SpaceSpec::parse("free_abelian(2)").unwrap(), 9, 10_000).unwrap();
        let p = reference_geodesic(&space, 12).unwrap();
        assert_eq!(p.endpoint_dist, 12);
        assert_eq!(p.arclength, 12);
        let space = build_space(&SpaceSpec::parse("tiling(4,5)").unwrap(), 4, 10_000_000).unwrap();
        let p = reference_geodesic(&space, 8).unwrap();
        assert_eq!(p.endpoint_dist, 8);
        assert!(reference_geodesic(&space, 100).is_err());
    }

    #[test]
    fn margin_safe_radius() {
        for n in [1u32, 6, 9, 18] {
            let r = radius_for_wordlen(n);
            assert!(r - n >= r / 4, "n={n} r={r}");
            // Minimality: either r is already the floor, or r-1 violates the margin.
            assert!(r == n.max(1) || (r - 1) - n < (r - 1) / 4, "n={n} r={r}");
        }
    }
}
