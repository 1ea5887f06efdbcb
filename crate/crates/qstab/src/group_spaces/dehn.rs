//! C'(1/6) small-cancellation presentations and Dehn's algorithm.
//!
//! For a C'(1/6) presentation, Dehn's algorithm (repeatedly replace any
//! subword that is more than half of a defining relator by the shorter
//! complement) terminates in a geodesic word.  Distinct geodesic words for
//! the same element differ by swapping exact relator halves, so closing a
//! geodesic under half-swaps and taking the shortlex minimum yields a
//! canonical normal form.

use super::words::{
    free_reduce, inverse, shortlex_cmp, word_to_string, Word,
};
use super::GroupError;
use std::collections::{BTreeSet, VecDeque};

/// How many geodesic representatives the half-swap closure may visit before
/// we give up.  For the shipped presentations a geodesic class has at most a
/// handful of members; hitting this cap indicates an oracle bug.
const SWAP_CLOSURE_CAP: usize = 50_000;

/// A validated C'(1/6) presentation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Presentation {
    gen_count: usize,
    relators: Vec<Word>,
    /// All cyclic rotations of the relators and their inverses, deduplicated,
    /// in a fixed sorted order (for deterministic Dehn scans).
    symmetrized: Vec<Word>,
}

impl Presentation {
    /// Validate and build.  Relators must be nonempty, cyclically reduced,
    /// and jointly satisfy C'(1/6): every piece (common prefix of two
    /// distinct symmetrized relators) is shorter than one sixth of each
    /// relator it sits in.
    pub fn new(relators: Vec<Word>) -> Result<Self, GroupError> {
        if relators.is_empty() {
            return Err(GroupError::BadSpec("small_cancellation needs at least one relator".into()));
        }
        let mut gen_count = 0usize;
        for r in &relators {
            let red = free_reduce(r);
            if red.len() != r.len() {
                return Err(GroupError::BadSpec(format!(
                    "relator {} is not freely reduced",
                    word_to_string(r)
                )));
            }
            if r.is_empty() || r.first() == Some(&-*r.last().unwrap()) {
                return Err(GroupError::BadSpec(format!(
                    "relator {} is not cyclically reduced",
                    word_to_string(r)
                )));
            }
            for &l in r {
                gen_count = gen_count.max(l.unsigned_abs() as usize);
            }
        }

        let mut sym: BTreeSet<Word> = BTreeSet::new();
        for r in &relators {
            for base in [r.clone(), inverse(r)] {
                for i in 0..base.len() {
                    let mut rot = base[i..].to_vec();
                    rot.extend_from_slice(&base[..i]);
                    sym.insert(rot);
                }
            }
        }
        let symmetrized: Vec<Word> = sym.into_iter().collect();

        // Piece check: the longest common prefix of two distinct symmetrized
        // relators is a piece; C'(1/6) demands 6 * |piece| < |relator| for
        // both relators containing it.
        for (i, u) in symmetrized.iter().enumerate() {
            for v in &symmetrized[i + 1..] {
                let lcp = u.iter().zip(v.iter()).take_while(|(a, b)| a == b).count();
                if lcp > 0 && (6 * lcp >= u.len() || 6 * lcp >= v.len()) {
                    return Err(GroupError::NotSmallCancellation(format!(
                        "piece {} of length {lcp} is too long for relators of lengths {} and {}",
                        word_to_string(&u[..lcp]),
                        u.len(),
                        v.len()
                    )));
                }
            }
        }

        Ok(Presentation { gen_count, relators, symmetrized })
    }

    pub fn gen_count(&self) -> usize {
        self.gen_count
    }

    pub fn relators(&self) -> &[Word] {
        &self.relators
    }

    /// Dehn's algorithm: freely reduce, then repeatedly replace the first
    /// subword that is strictly more than half of a symmetrized relator by
    /// the inverse of the complement.  The result is geodesic.
    pub fn dehn_reduce(&self, w: &[i16]) -> Word {
        let mut w = free_reduce(w);
        'outer: loop {
            for i in 0..w.len() {
                // Longest match at position i wins; the sorted symmetrized
                // order breaks ties deterministically.
                let mut best: Option<(usize, &Word)> = None;
                for r in &self.symmetrized {
                    let lcp = w[i..].iter().zip(r.iter()).take_while(|(a, b)| a == b).count();
                    if 2 * lcp > r.len() && best.map_or(true, |(bl, _)| lcp > bl) {
                        best = Some((lcp, r));
                    }
                }
                if let Some((l, r)) = best {
                    // w[i..i+l] == r[..l]; replace by inverse(r[l..]).
                    let mut next = w[..i].to_vec();
                    next.extend(inverse(&r[l..]));
                    next.extend_from_slice(&w[i + l..]);
                    w = free_reduce(&next);
                    continue 'outer;
                }
            }
            return w;
        }
    }

    /// Canonical geodesic normal form: Dehn-reduce, then close under
    /// length-preserving half-relator swaps and take the shortlex minimum.
    pub fn normal_form(&self, w: &[i16]) -> Result<Word, GroupError> {
        let start = self.dehn_reduce(w);
        let mut seen: BTreeSet<Word> = BTreeSet::new();
        let mut queue: VecDeque<Word> = VecDeque::new();
        seen.insert(start.clone());
        queue.push_back(start.clone());
        let mut best = start;
        while let Some(cur) = queue.pop_front() {
            if seen.len() > SWAP_CLOSURE_CAP {
                return Err(GroupError::OracleInconsistent(format!(
                    "half-swap closure of {} exceeded {SWAP_CLOSURE_CAP} words",
                    word_to_string(&best)
                )));
            }
            for i in 0..cur.len() {
                for r in &self.symmetrized {
                    if r.len() % 2 != 0 {
                        continue;
                    }
                    let h = r.len() / 2;
                    if i + h > cur.len() || cur[i..i + h] != r[..h] {
                        continue;
                    }
                    let mut next = cur[..i].to_vec();
                    next.extend(inverse(&r[h..]));
                    next.extend_from_slice(&cur[i + h..]);
                    let next = free_reduce(&next);
                    if next.len() < cur.len() {
                        // A cancellation exposed a further Dehn reduction;
                        // restart the closure from the shorter word.
                        return self.normal_form(&next);
                    }
                    if seen.insert(next.clone()) {
                        if shortlex_cmp(&next, &best) == std::cmp::Ordering::Less {
                            best = next.clone();
                        }
                        queue.push_back(next);
                    }
                }
            }
        }
        Ok(best)
    }
}
