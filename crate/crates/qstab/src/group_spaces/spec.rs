//! Group family specifications and their geodesic word oracles.

use super::dehn::Presentation;
use super::words::{free_reduce, parse_word, shift, word_to_string, Word};
use super::GroupError;
use std::fmt;

/// A built-in group family.  Every family carries a word oracle producing a
/// canonical geodesic normal form, so word length equals Cayley-graph
/// distance from the identity and equal elements have equal normal forms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GroupSpec {
    /// Free group of the given rank.
    Free(usize),
    /// Free abelian group of the given rank.
    FreeAbelian(usize),
    /// Free product; the right factor's generators are shifted past the
    /// left factor's in the combined alphabet.
    FreeProduct(Box<GroupSpec>, Box<GroupSpec>),
    /// Direct product, alphabet combined as for free products.
    DirectProduct(Box<GroupSpec>, Box<GroupSpec>),
    /// One-relator-or-more C'(1/6) small-cancellation group.
    SmallCancellation(Presentation),
}

impl GroupSpec {
    /// Number of generators in the combined alphabet.
    pub fn gen_count(&self) -> usize {
        match self {
            GroupSpec::Free(k) | GroupSpec::FreeAbelian(k) => *k,
            GroupSpec::FreeProduct(a, b) | GroupSpec::DirectProduct(a, b) => {
                a.gen_count() + b.gen_count()
            }
            GroupSpec::SmallCancellation(p) => p.gen_count(),
        }
    }

    /// Canonical geodesic normal form of `w`.
    pub fn normal_form(&self, w: &[i16]) -> Result<Word, GroupError> {
        match self {
            GroupSpec::Free(_) => Ok(free_reduce(w)),
            GroupSpec::FreeAbelian(k) => {
                let mut exp = vec![0i64; *k];
                for &l in w {
                    exp[(l.unsigned_abs() - 1) as usize] += if l > 0 { 1 } else { -1 };
                }
                let mut out = Word::new();
                for (i, &e) in exp.iter().enumerate() {
                    let letter = if e >= 0 { i as i16 + 1 } else { -(i as i16 + 1) };
                    out.extend(std::iter::repeat(letter).take(e.unsigned_abs() as usize));
                }
                Ok(out)
            }
            GroupSpec::FreeProduct(a, b) => {
                let ka = a.gen_count() as i16;
                // Split into maximal syllables from one factor, normalize
                // each, and freely merge: a normal form is an alternating
                // product of nontrivial factor normal forms.
                let mut syllables: Vec<(bool, Word)> = Vec::new(); // (is_left, raw letters)
                for &l in w {
                    let left = l.abs() <= ka;
                    match syllables.last_mut() {
                        Some((sl, s)) if *sl == left => s.push(l),
                        _ => syllables.push((left, vec![l])),
                    }
                }
                // Normalize syllables and merge neighbours that collapse.
                let mut stack: Vec<(bool, Word)> = Vec::new();
                for (left, raw) in syllables {
                    let nf = if left {
                        a.normal_form(&raw)?
                    } else {
                        shift(&b.normal_form(&shift(&raw, -ka))?, ka)
                    };
                    if nf.is_empty() {
                        continue;
                    }
                    match stack.last_mut() {
                        Some((sl, s)) if *sl == left => {
                            let merged = if left {
                                a.normal_form(&[s.clone(), nf].concat())?
                            } else {
                                let joined = [shift(s, -ka), shift(&nf, -ka)].concat();
                                shift(&b.normal_form(&joined)?, ka)
                            };
                            if merged.is_empty() {
                                stack.pop();
                            } else {
                                *s = merged;
                            }
                        }
                        _ => stack.push((left, nf)),
                    }
                }
                // Collapses can make previously separated same-factor
                // syllables adjacent; iterate until stable.
                loop {
                    let mut changed = false;
                    let mut merged_stack: Vec<(bool, Word)> = Vec::new();
                    for (left, s) in stack {
                        match merged_stack.last_mut() {
                            Some((pl, p)) if *pl == left => {
                                changed = true;
                                let joined = if left {
                                    a.normal_form(&[p.clone(), s].concat())?
                                } else {
                                    shift(
                                        &b.normal_form(
                                            &[shift(p, -ka), shift(&s, -ka)].concat(),
                                        )?,
                                        ka,
                                    )
                                };
                                if joined.is_empty() {
                                    merged_stack.pop();
                                } else {
                                    *p = joined;
                                }
                            }
                            _ => merged_stack.push((left, s)),
                        }
                    }
                    stack = merged_stack;
                    if !changed {
                        break;
                    }
                }
                Ok(stack.into_iter().flat_map(|(_, s)| s).collect())
            }
            GroupSpec::DirectProduct(a, b) => {
                let ka = a.gen_count() as i16;
                let (mut wa, mut wb) = (Word::new(), Word::new());
                for &l in w {
                    if l.abs() <= ka {
                        wa.push(l);
                    } else {
                        wb.push(l);
                    }
                }
                let mut out = a.normal_form(&wa)?;
                out.extend(shift(&b.normal_form(&shift(&wb, -ka))?, ka));
                Ok(out)
            }
            GroupSpec::SmallCancellation(p) => p.normal_form(w),
        }
    }

    /// Parse a word in this family's alphabet.
    pub fn parse_element(&self, s: &str) -> Result<Word, GroupError> {
        parse_word(s, self.gen_count())
    }

    /// Parse a spec string such as `free(2)`, `free_abelian(2)`,
    /// `free_product(free_abelian(2), free(1))`,
    /// `direct_product(free(1), free(1))`, or
    /// `small_cancellation(abABcdCD)` (relators separated by `;`).
    pub fn parse(s: &str) -> Result<GroupSpec, GroupError> {
        let s = s.trim();
        let (head, body) = s
            .split_once('(')
            .ok_or_else(|| GroupError::BadSpec(format!("missing '(' in {s:?}")))?;
        let body = body
            .strip_suffix(')')
            .ok_or_else(|| GroupError::BadSpec(format!("missing ')' in {s:?}")))?;
        match head.trim() {
            "free" => Ok(GroupSpec::Free(parse_rank(body)?)),
            "free_abelian" => Ok(GroupSpec::FreeAbelian(parse_rank(body)?)),
            "free_product" | "direct_product" => {
                let (l, r) = split_top_level(body)
                    .ok_or_else(|| GroupError::BadSpec(format!("expected two factors in {s:?}")))?;
                let l = Box::new(GroupSpec::parse(l)?);
                let r = Box::new(GroupSpec::parse(r)?);
                Ok(if head.trim() == "free_product" {
                    GroupSpec::FreeProduct(l, r)
                } else {
                    GroupSpec::DirectProduct(l, r)
                })
            }
            "small_cancellation" => {
                let relators = body
                    .split(';')
                    .map(|r| parse_word(r, 26))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(GroupSpec::SmallCancellation(Presentation::new(relators)?))
            }
            other => Err(GroupError::BadSpec(format!("unknown family {other:?}"))),
        }
    }
}

fn parse_rank(s: &str) -> Result<usize, GroupError> {
    let k: usize = s
        .trim()
        .parse()
        .map_err(|_| GroupError::BadSpec(format!("bad rank {s:?}")))?;
    if k == 0 || k > 26 {
        return Err(GroupError::BadSpec(format!("rank {k} out of range 1..=26")));
    }
    Ok(k)
}

/// Split `"x, y"` at the top-level comma (ignoring commas inside parens).
fn split_top_level(s: &str) -> Option<(&str, &str)> {
    let mut depth = 0usize;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth = depth.checked_sub(1)?,
            ',' if depth == 0 => return Some((&s[..i], &s[i + 1..])),
            _ => {}
        }
    }
    None
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupSpec::Free(k) => write!(f, "free({k})"),
            GroupSpec::FreeAbelian(k) => write!(f, "free_abelian({k})"),
            GroupSpec::FreeProduct(a, b) => write!(f, "free_product({a},{b})"),
            GroupSpec::DirectProduct(a, b) => write!(f, "direct_product({a},{b})"),
            GroupSpec::SmallCancellation(p) => {
                let rs: Vec<String> = p.relators().iter().map(|r| word_to_string(r)).collect();
                write!(f, "small_cancellation({})", rs.join(";"))
            }
        }
    }
}
