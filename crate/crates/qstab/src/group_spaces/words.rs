//! Words over a finite generating alphabet.
//!
//! A letter is a nonzero `i16`: `k` (`k > 0`) is the `k`-th generator and
//! `-k` is its inverse.  Generator `k` is printed as the lowercase letter
//! `'a' + k - 1` and its inverse as the corresponding uppercase letter, so
//! the alphabet supports up to 26 generators, far beyond anything the
//! built-in families need.

use super::GroupError;

/// A word as a reduced-or-not sequence of letters.
pub type Word = Vec<i16>;

/// The inverse word: reverse order, each letter negated.
pub fn inverse(w: &[i16]) -> Word {
    w.iter().rev().map(|&l| -l).collect()
}

/// Free reduction: cancel adjacent `l, -l` pairs until none remain.
pub fn free_reduce(w: &[i16]) -> Word {
    let mut out: Word = Vec::with_capacity(w.len());
    for &l in w {
        debug_assert!(l != 0, "0 is not a letter");
        if out.last() == Some(&-l) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    out
}

/// Concatenate and freely reduce.
pub fn concat(a: &[i16], b: &[i16]) -> Word {
    let mut w = a.to_vec();
    w.extend_from_slice(b);
    free_reduce(&w)
}

/// Rank a letter for lexicographic purposes: `1 < -1 < 2 < -2 < ...`
/// (each generator precedes its own inverse).
pub fn letter_key(l: i16) -> u32 {
    debug_assert!(l != 0);
    (l.unsigned_abs() as u32 - 1) * 2 + u32::from(l < 0)
}

/// Shortlex comparison: shorter words first, ties broken letterwise by
/// [`letter_key`].
pub fn shortlex_cmp(a: &[i16], b: &[i16]) -> std::cmp::Ordering {
    a.len()
        .cmp(&b.len())
        .then_with(|| a.iter().map(|&l| letter_key(l)).cmp(b.iter().map(|&l| letter_key(l))))
}

/// Render a word; the empty word prints as `"1"`.
pub fn word_to_string(w: &[i16]) -> String {
    if w.is_empty() {
        return "1".to_string();
    }
    w.iter()
        .map(|&l| {
            let idx = (l.unsigned_abs() - 1) as u8;
            let c = if l > 0 { b'a' + idx } else { b'A' + idx };
            c as char
        })
        .collect()
}

/// Parse a word over `gen_count` generators.  Accepts `"1"` or `""` for the
/// identity, lowercase letters for generators and uppercase for inverses.
pub fn parse_word(s: &str, gen_count: usize) -> Result<Word, GroupError> {
    let s = s.trim();
    if s.is_empty() || s == "1" {
        return Ok(Vec::new());
    }
    let mut w = Word::with_capacity(s.len());
    for c in s.chars() {
        let l = match c {
            'a'..='z' => (c as u8 - b'a') as i16 + 1,
            'A'..='Z' => -((c as u8 - b'A') as i16 + 1),
            _ => return Err(GroupError::BadWord(format!("invalid character {c:?} in {s:?}"))),
        };
        if l.unsigned_abs() as usize > gen_count {
            return Err(GroupError::BadWord(format!(
                "letter {c:?} exceeds generator count {gen_count} in {s:?}"
            )));
        }
        w.push(l);
    }
    Ok(w)
}

/// Shift every letter's generator index up by `offset` (used to embed the
/// right factor of a product into the combined alphabet).
pub fn shift(w: &[i16], offset: i16) -> Word {
    w.iter().map(|&l| if l > 0 { l + offset } else { l - offset }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduce_and_inverse() {
        let w = vec![1, 2, -2, -1, 1, 3];
        assert_eq!(free_reduce(&w), vec![1, 3]);
        assert_eq!(inverse(&[1, 3]), vec![-3, -1]);
        assert_eq!(concat(&[1, 2], &[-2, -1, 3]), vec![3]);
        assert!(free_reduce(&[1, -1]).is_empty());
    }

    #[test]
    fn shortlex_order() {
        use std::cmp::Ordering::*;
        assert_eq!(shortlex_cmp(&[], &[1]), Less);
        assert_eq!(shortlex_cmp(&[1], &[-1]), Less);
        assert_eq!(shortlex_cmp(&[-1], &[2]), Less);
        assert_eq!(shortlex_cmp(&[1, 1], &[2]), Greater);
        assert_eq!(shortlex_cmp(&[1, 2], &[1, 2]), Equal);
    }

    #[test]
    fn printing_and_parsing() {
        assert_eq!(word_to_string(&[]), "1");
        assert_eq!(word_to_string(&[1, -2, 3]), "aBc");
        assert_eq!(parse_word("aBc", 3).unwrap(), vec![1, -2, 3]);
        assert_eq!(parse_word("1", 2).unwrap(), Vec::<i16>::new());
        assert!(parse_word("ax", 2).is_err());
        assert!(parse_word("a b", 2).is_err());
    }
}
