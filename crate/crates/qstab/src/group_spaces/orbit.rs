//! Orbit maps of finitely generated subgroups into ambient balls, and
//! empirical distortion measurement.

use super::ball::CayleyBall;
use super::words::{concat, inverse, shortlex_cmp, word_to_string, Word};
use super::GroupError;
use crate::metric_core::{GraphMeta, MetricGraph};
use std::collections::{BTreeSet, HashMap};

/// The orbit of the identity under a finitely generated subgroup `H`,
/// restricted to an ambient ball.
///
/// `domain` is the intrinsic Cayley ball of `H` on the given generators
/// (word metric where each `h_gen` is one step); `image[v]` is the ambient
/// ball vertex realizing domain vertex `v`.
#[derive(Debug)]
pub struct OrbitMap {
    pub domain: MetricGraph,
    /// Ambient normal form of each domain vertex.
    pub domain_words: Vec<Word>,
    /// Ambient ball vertex id of each domain vertex.
    pub image: Vec<u32>,
    pub h_gens: Vec<Word>,
    pub h_radius: u32,
}

/// κ̂ and λ̂ estimates per intrinsic radius for an orbit map, with a verdict.
#[derive(Debug, Clone)]
pub struct DistortionProfile {
    /// `(radius, kappa_hat, lambda_hat)`, radius = 1..=h_radius.
    pub rows: Vec<(u32, f64, f64)>,
    pub verdict: DistortionVerdict,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DistortionVerdict {
    /// κ̂ stabilizes (top radii agree within 5%).
    Undistorted,
    /// κ̂ keeps growing; `exponent` is the log-log slope over the top half
    /// of the radii.
    Distorted { exponent: f64 },
}

/// Enumerate the `H`-ball of radius `h_radius` inside `ambient`, mapping
/// each `H`-element to its ambient vertex.  Fails with
/// [`GroupError::ImageEscapesBall`] if any product leaves the ambient ball.
pub fn orbit_map(
    ambient: &CayleyBall,
    h_gens: &[Word],
    h_radius: u32,
) -> Result<OrbitMap, GroupError> {
    if h_gens.is_empty() {
        return Err(GroupError::BadSpec("subgroup needs at least one generator".into()));
    }
    let spec = &ambient.spec;
    let gens: Vec<Word> = h_gens
        .iter()
        .map(|g| spec.normal_form(g))
        .collect::<Result<_, _>>()?;
    if gens.iter().any(|g| g.is_empty()) {
        return Err(GroupError::BadSpec("trivial subgroup generator".into()));
    }
    let steps: Vec<Word> = gens.iter().flat_map(|g| [g.clone(), inverse(g)]).collect();

    let mut words: Vec<Word> = vec![Vec::new()];
    let mut index: HashMap<Word, u32> = HashMap::new();
    index.insert(Vec::new(), 0);
    let mut frontier: Vec<u32> = vec![0];
    for _ in 1..=h_radius {
        let mut layer: BTreeSet<Word> = BTreeSet::new();
        for &v in &frontier {
            for s in &steps {
                let nf = spec.normal_form(&concat(&words[v as usize], s))?;
                if !index.contains_key(&nf) {
                    layer.insert(nf);
                }
            }
        }
        let mut layer: Vec<Word> = layer.into_iter().collect();
        layer.retain(|w| !index.contains_key(w));
        layer.sort_by(|a, b| shortlex_cmp(a, b));
        frontier = Vec::with_capacity(layer.len());
        for w in layer {
            let id = words.len() as u32;
            index.insert(w.clone(), id);
            words.push(w);
            frontier.push(id);
        }
    }

    // Intrinsic edges and the ambient image.
    let mut edges: BTreeSet<(u32, u32)> = BTreeSet::new();
    let mut image = Vec::with_capacity(words.len());
    for (v, w) in words.iter().enumerate() {
        image.push(
            ambient
                .index
                .get(w)
                .copied()
                .ok_or(GroupError::ImageEscapesBall)?,
        );
        for s in &steps {
            let nf = spec.normal_form(&concat(w, s))?;
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
        provenance: format!(
            "orbit spec={} h_gens={} h_radius={h_radius}",
            spec,
            gens.iter().map(|g| word_to_string(g)).collect::<Vec<_>>().join(",")
        ),
        radius: Some(h_radius),
        boundary: Vec::new(),
    };
    let edges: Vec<(u32, u32)> = edges.into_iter().collect();
    let domain = MetricGraph::build_with_meta(&edges, Some(labels), meta)
        .map_err(|e| GroupError::OracleInconsistent(format!("orbit domain invalid: {e}")))?;
    if domain.vertex_count() != words.len() {
        return Err(GroupError::OracleInconsistent(
            "orbit domain has isolated vertices".into(),
        ));
    }

    Ok(OrbitMap { domain, domain_words: words, image, h_gens: gens, h_radius })
}

/// Measure distortion of an orbit map against a target metric graph whose
/// vertex ids agree with the ambient ball's base vertices (the ambient ball
/// itself, or a coned-off / cusped space built over it).
///
/// For each radius `r`, the pairs `(u, v)` of domain vertices inside the
/// intrinsic `r`-ball are tested against the two-sided quasi-isometry
/// inequality; `lambda_hat` is forced by pairs whose images coincide and
/// `kappa_hat` is the smallest multiplicative constant making both sides
/// hold with that additive constant.
pub fn distortion_profile(
    orbit: &OrbitMap,
    target: &MetricGraph,
) -> Result<DistortionProfile, GroupError> {
    let n = orbit.domain.vertex_count();
    let err = |e: crate::metric_core::GraphError| GroupError::OracleInconsistent(e.to_string());

    // Intrinsic all-pairs distances (domain graphs are small).
    let mut dom = Vec::with_capacity(n);
    for v in 0..n as u32 {
        dom.push(orbit.domain.dist_from(v).map_err(err)?);
    }
    let from_base = orbit.domain.dist_from(0).map_err(err)?;

    // Target distances from each distinct image vertex.
    let mut tgt: HashMap<u32, Vec<u32>> = HashMap::new();
    for &img in &orbit.image {
        if !tgt.contains_key(&img) {
            tgt.insert(img, target.dist_from(img).map_err(err)?);
        }
    }

    let mut rows = Vec::new();
    for r in 1..=orbit.h_radius {
        let members: Vec<u32> = (0..n as u32).filter(|&v| from_base[v as usize] <= r).collect();
        let mut lambda: f64 = 0.0;
        for (i, &u) in members.iter().enumerate() {
            for &v in &members[i + 1..] {
                if orbit.image[u as usize] == orbit.image[v as usize] {
                    lambda = lambda.max(dom[u as usize][v as usize] as f64);
                }
            }
        }
        let mut kappa: f64 = 1.0;
        for (i, &u) in members.iter().enumerate() {
            for &v in &members[i + 1..] {
                let dd = dom[u as usize][v as usize] as f64;
                let dt = tgt[&orbit.image[u as usize]][orbit.image[v as usize] as usize] as f64;
                // Upper bound: dt <= kappa * dd + lambda.
                if dt > lambda {
                    kappa = kappa.max((dt - lambda) / dd);
                }
                // Lower bound: dd <= kappa * (dt + lambda); dt + lambda > 0
                // unless the pair both coincides and forces lambda = 0,
                // which cannot happen for u != v.
                kappa = kappa.max(dd / (dt + lambda));
            }
        }
        rows.push((r, kappa, lambda));
    }

    // Verdict: compare kappa over the top three radii.
    let verdict = {
        let ks: Vec<f64> = rows.iter().map(|&(_, k, _)| k).collect();
        let top = &ks[ks.len().saturating_sub(3)..];
        let (lo, hi) = top
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), &k| (lo.min(k), hi.max(k)));
        if hi <= lo * 1.05 {
            DistortionVerdict::Undistorted
        } else {
            // Log-log slope over the top half of the radii.
            let half = &rows[rows.len() / 2..];
            let pts: Vec<(f64, f64)> =
                half.iter().map(|&(r, k, _)| ((r as f64).ln(), k.ln())).collect();
            let m = pts.len() as f64;
            let (sx, sy): (f64, f64) =
                pts.iter().fold((0.0, 0.0), |(a, b), &(x, y)| (a + x, b + y));
            let sxx: f64 = pts.iter().map(|&(x, _)| x * x).sum();
            let sxy: f64 = pts.iter().map(|&(x, y)| x * y).sum();
            let denom = m * sxx - sx * sx;
            let exponent = if denom.abs() < 1e-12 { 0.0 } else { (m * sxy - sx * sy) / denom };
            DistortionVerdict::Distorted { exponent }
        }
    };

    Ok(DistortionProfile { rows, verdict })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group_spaces::{cayley_ball, GroupSpec};

    #[test]
    fn cyclic_subgroup_of_free_group_is_undistorted() {
        let ambient = cayley_ball(&GroupSpec::Free(2), 8).unwrap();
        let a = ambient.spec.parse_element("a").unwrap();
        let orbit = orbit_map(&ambient, &[a], 8).unwrap();
        assert_eq!(orbit.domain.vertex_count(), 17); // a^-8 ... a^8
        let prof = distortion_profile(&orbit, &ambient.graph).unwrap();
        assert_eq!(prof.verdict, DistortionVerdict::Undistorted);
        for &(_, k, l) in &prof.rows {
            assert_eq!(k, 1.0);
            assert_eq!(l, 0.0);
        }
    }

    #[test]
    fn generator_words_longer_than_one() {
        // H = <ab> in F_2: still undistorted, kappa = 2 (one H-step is two
        // ambient steps and the orbit is 2-separated, and d_H <= d_ambient).
        let ambient = cayley_ball(&GroupSpec::Free(2), 8).unwrap();
        let ab = ambient.spec.parse_element("ab").unwrap();
        let orbit = orbit_map(&ambient, &[ab], 4).unwrap();
        let prof = distortion_profile(&orbit, &ambient.graph).unwrap();
        assert_eq!(prof.verdict, DistortionVerdict::Undistorted);
        for &(_, k, _) in &prof.rows {
            assert_eq!(k, 2.0);
        }
    }

    #[test]
    fn escape_is_detected() {
        let ambient = cayley_ball(&GroupSpec::Free(2), 3).unwrap();
        let a = ambient.spec.parse_element("a").unwrap();
        assert_eq!(orbit_map(&ambient, &[a], 4).unwrap_err(), GroupError::ImageEscapesBall);
    }

    #[test]
    fn rank2_subgroup_domain_is_a_tree_ball() {
        // H = <a, b^2>: free of rank 2, so the intrinsic 2-ball has
        // 1 + 4 + 12 = 17 vertices, and the map embeds.
        let ambient = cayley_ball(&GroupSpec::Free(2), 6).unwrap();
        let a = ambient.spec.parse_element("a").unwrap();
        let b2 = ambient.spec.parse_element("bb").unwrap();
        let orbit = orbit_map(&ambient, &[a, b2], 2).unwrap();
        assert_eq!(orbit.domain.vertex_count(), 17);
        let mut images = orbit.image.clone();
        images.sort_unstable();
        images.dedup();
        assert_eq!(images.len(), 17, "orbit map should be injective here");
    }
}
