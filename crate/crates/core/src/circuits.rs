//! Exact circuit counting at finite dimension.
//!
//! A circuit of length `k` at dimension `n` is a closed index walk `pi(0),
//! ..., pi(k)` with `pi(k) = pi(0)`, each vertex in `1..=n`. Every position
//! `i` carries the link value `L(pi(i-1), pi(i))`. A word `w` describes an
//! equality pattern on those link values, and the number of circuits
//! realizing the pattern, scaled by `n^(k/2 + 1)`, is what converges to the
//! word's limit contribution `p(w)`.
//!
//! Two matching semantics are implemented. `Relaxed` requires equal letters
//! to carry equal link values. `Strict` additionally requires distinct
//! letters to carry distinct values, which makes the circuit classes of
//! different words disjoint; the two counts differ only at lower order in
//! `n`.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::pattern::{LinkValue, Pattern};
use crate::words::{ColoredWord, Word, MAX_WORD_LEN};

/// Matching semantics for [`count_circuits`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CountMode {
    /// Equal letters carry equal link values and distinct letters carry
    /// distinct values.
    Strict,
    /// Equal letters carry equal link values; distinct letters are
    /// unconstrained.
    Relaxed,
}

/// A closed index walk: `vertices[0..=k]` with `vertices[k] = vertices[0]`,
/// all coordinates in `1..=n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Circuit {
    vertices: Vec<u32>,
    n: u32,
}

impl Circuit {
    pub fn new(vertices: Vec<u32>, n: u32) -> Result<Circuit> {
        if vertices.len() < 2 {
            return Err(Error::InvalidArgument(
                "a circuit has at least one step".into(),
            ));
        }
        if vertices.first() != vertices.last() {
            return Err(Error::InvalidArgument(
                "a circuit closes: first and last vertex must agree".into(),
            ));
        }
        if let Some(v) = vertices.iter().find(|v| **v == 0 || **v > n) {
            return Err(Error::IndexOutOfRange { i: *v, j: *v, n });
        }
        Ok(Circuit { vertices, n })
    }

    /// Number of steps `k`.
    pub fn len(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn vertices(&self) -> &[u32] {
        &self.vertices
    }

    /// Link value carried by each step under `pattern`.
    pub fn link_values(&self, pattern: Pattern) -> Vec<LinkValue> {
        (0..self.len())
            .map(|i| pattern.link_unchecked(self.vertices[i], self.vertices[i + 1], self.n))
            .collect()
    }

    /// Does this circuit realize the equality pattern of `word`?
    ///
    /// Relaxed: positions with equal letters carry equal link values.
    /// Strict: additionally, positions with distinct letters carry distinct
    /// values. This predicate is the definition; [`count_circuits`] counts
    /// the circuits satisfying it without enumerating them.
    pub fn matches_word(&self, pattern: Pattern, word: &Word, mode: CountMode) -> bool {
        if word.len() != self.len() {
            return false;
        }
        let values = self.link_values(pattern);
        let letters = word.letters();
        for i in 0..letters.len() {
            for j in i + 1..letters.len() {
                let same_letter = letters[i] == letters[j];
                let same_value = values[i] == values[j];
                if same_letter && !same_value {
                    return false;
                }
                if mode == CountMode::Strict && !same_letter && same_value {
                    return false;
                }
            }
        }
        true
    }
}

/// Result of an exact count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CircuitCount {
    /// The (color-free) word that was counted.
    pub word: Word,
    pub pattern: Pattern,
    pub n: u32,
    pub mode: CountMode,
    pub count: BigUint,
}

impl CircuitCount {
    /// The count normalized by `n^(k/2 + 1)`.
    pub fn normalized(&self) -> f64 {
        let k = self.word.len();
        let scale = BigUint::from(self.n).pow(k as u32 / 2 + 1);
        BigRational::new(self.count.clone().into(), scale.into())
            .to_f64()
            .unwrap_or(f64::NAN)
    }
}

const MAX_LETTERS: usize = MAX_WORD_LEN / 2;

/// Count the circuits of length `w.len()` at dimension `n` matching `w`.
///
/// The word must be pair-matched. The search fixes the starting vertex, walks
/// the word left to right, branches over all of `1..=n` at each first letter
/// occurrence and over the (at most `delta`) preimages of the letter's link
/// value at each repeat, and closes the walk with a final membership check;
/// the work is at most `n^(k/2 + 1) * delta^(k/2 - 1)` node visits.
pub fn count_circuits(
    pattern: Pattern,
    word: &Word,
    n: u32,
    mode: CountMode,
) -> Result<CircuitCount> {
    if !word.is_pair_matched() {
        return Err(Error::NotPairMatched(word.to_string()));
    }
    if word.len() > MAX_WORD_LEN {
        return Err(Error::LengthCap {
            len: word.len(),
            max: MAX_WORD_LEN,
        });
    }
    if n == 0 {
        return Err(Error::DimensionTooSmall {
            n,
            reason: "circuits need at least one index".into(),
        });
    }
    let letters = word.letters();
    let mut seen = [false; MAX_LETTERS];
    let mut is_first = vec![false; letters.len()];
    for (pos, l) in letters.iter().enumerate() {
        let l = *l as usize;
        if !seen[l] {
            seen[l] = true;
            is_first[pos] = true;
        }
    }
    debug_assert!(!is_first[letters.len() - 1], "pair-matched words never end on a first occurrence");

    let total: u128 = (1..=n)
        .into_par_iter()
        .map(|start| {
            let mut state = DfsState {
                pattern,
                n,
                letters,
                is_first: &is_first,
                strict: mode == CountMode::Strict,
                start,
                assigned: 0,
                letter_value: [LinkValue::Scalar(i64::MIN); MAX_LETTERS],
            };
            state.count_from(0, start)
        })
        .sum();

    Ok(CircuitCount {
        word: word.clone(),
        pattern,
        n,
        mode,
        count: BigUint::from(total),
    })
}

/// Count circuits for a colored word: positions match within colors only,
/// but since letters already pair within a color, the circuit class is the
/// one of the color-free word. Delegates to [`count_circuits`] on
/// `w.drop_colors()`.
pub fn count_colored_circuits(
    pattern: Pattern,
    word: &ColoredWord,
    n: u32,
    mode: CountMode,
) -> Result<CircuitCount> {
    if !word.is_pair_matched() {
        return Err(Error::NotPairMatched(word.to_string()));
    }
    count_circuits(pattern, &word.drop_colors(), n, mode)
}

/// `count_circuits` normalized by `n^(k/2 + 1)`: the finite-`n` value whose
/// large-`n` limit is the word's contribution `p(w)`.
pub fn p_finite(pattern: Pattern, word: &Word, n: u32, mode: CountMode) -> Result<f64> {
    Ok(count_circuits(pattern, word, n, mode)?.normalized())
}

struct DfsState<'a> {
    pattern: Pattern,
    n: u32,
    letters: &'a [u8],
    is_first: &'a [bool],
    strict: bool,
    start: u32,
    assigned: u16,
    letter_value: [LinkValue; MAX_LETTERS],
}

impl DfsState<'_> {
    /// Ways to extend a partial circuit sitting at vertex `prev` before
    /// position `pos` (0-based) into a full match.
    fn count_from(&mut self, pos: usize, prev: u32) -> u128 {
        let letter = self.letters[pos] as usize;
        if pos + 1 == self.letters.len() {
            // Closing step: the vertex is forced back to the start, so the
            // step only checks that the link value realizes the letter.
            let v = self.pattern.link_unchecked(prev, self.start, self.n);
            return u128::from(v == self.letter_value[letter]);
        }
        let mut total = 0u128;
        if self.is_first[pos] {
            for cand in 1..=self.n {
                let v = self.pattern.link_unchecked(prev, cand, self.n);
                if self.strict && self.value_clashes(letter, v) {
                    continue;
                }
                self.letter_value[letter] = v;
                self.assigned |= 1 << letter;
                total += self.count_from(pos + 1, cand);
                self.assigned &= !(1 << letter);
            }
        } else {
            let v = self.letter_value[letter];
            for cand in self.pattern.inverse_link(prev, v, self.n) {
                total += self.count_from(pos + 1, cand);
            }
        }
        total
    }

    /// Is `v` already taken by a different letter? Only strict mode cares.
    fn value_clashes(&self, letter: usize, v: LinkValue) -> bool {
        (0..MAX_LETTERS).any(|l| {
            l != letter && self.assigned & (1 << l) != 0 && self.letter_value[l] == v
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::enumerate_pair_matched;

    /// Reference counter: enumerate all `n^k` walks and apply the matching
    /// predicate. Exponential, so only for tiny `n` and `k`.
    fn brute_force(pattern: Pattern, word: &Word, n: u32, mode: CountMode) -> u128 {
        let k = word.len();
        let mut count = 0u128;
        let mut vertices = vec![1u32; k + 1];
        loop {
            vertices[k] = vertices[0];
            let circuit = Circuit::new(vertices.clone(), n).unwrap();
            if circuit.matches_word(pattern, word, mode) {
                count += 1;
            }
            // Odometer over the k free coordinates.
            let mut pos = 0;
            loop {
                if pos == k {
                    return count;
                }
                if vertices[pos] < n {
                    vertices[pos] += 1;
                    break;
                }
                vertices[pos] = 1;
                pos += 1;
            }
        }
    }

    #[test]
    fn toeplitz_aabb_at_n2() {
        let word = Word::parse("aabb").unwrap();
        let relaxed = count_circuits(Pattern::Toeplitz, &word, 2, CountMode::Relaxed).unwrap();
        assert_eq!(relaxed.count, BigUint::from(8u32));
        assert_eq!(relaxed.normalized(), 1.0);
        assert_eq!(p_finite(Pattern::Toeplitz, &word, 2, CountMode::Relaxed).unwrap(), 1.0);
        let strict = count_circuits(Pattern::Toeplitz, &word, 2, CountMode::Strict).unwrap();
        assert_eq!(strict.count, BigUint::from(4u32));
    }

    #[test]
    fn single_pair_word_counts_every_walk() {
        // For w = aa every (start, step) pair closes by symmetry of the link.
        let word = Word::parse("aa").unwrap();
        for pattern in Pattern::ALL {
            for n in [1u32, 2, 5, 8] {
                for mode in [CountMode::Strict, CountMode::Relaxed] {
                    let c = count_circuits(pattern, &word, n, mode).unwrap();
                    assert_eq!(c.count, BigUint::from(n as u64 * n as u64));
                }
            }
        }
    }

    #[test]
    fn dfs_agrees_with_brute_force_k4() {
        for word in enumerate_pair_matched(4).unwrap() {
            for pattern in Pattern::ALL {
                for n in [2u32, 3, 5] {
                    for mode in [CountMode::Strict, CountMode::Relaxed] {
                        let fast = count_circuits(pattern, &word, n, mode).unwrap();
                        let slow = brute_force(pattern, &word, n, mode);
                        assert_eq!(
                            fast.count,
                            BigUint::from(slow),
                            "{pattern} {word} n={n} {mode:?}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn dfs_agrees_with_brute_force_k6() {
        for name in ["abcabc", "abcbca", "aabbcc", "abccba"] {
            let word = Word::parse(name).unwrap();
            for pattern in Pattern::ALL {
                for n in [2u32, 3] {
                    for mode in [CountMode::Strict, CountMode::Relaxed] {
                        let fast = count_circuits(pattern, &word, n, mode).unwrap();
                        let slow = brute_force(pattern, &word, n, mode);
                        assert_eq!(
                            fast.count,
                            BigUint::from(slow),
                            "{pattern} {word} n={n} {mode:?}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn strict_is_dominated_by_relaxed() {
        let word = Word::parse("abab").unwrap();
        for pattern in Pattern::ALL {
            for n in [2u32, 4, 9] {
                let strict = count_circuits(pattern, &word, n, CountMode::Strict).unwrap();
                let relaxed = count_circuits(pattern, &word, n, CountMode::Relaxed).unwrap();
                assert!(strict.count <= relaxed.count);
            }
        }
    }

    #[test]
    fn colored_counting_delegates_to_the_dropped_word() {
        let q = crate::words::Monomial::parse("1,2,1,2").unwrap();
        let colored = crate::words::enumerate_colored_pair_matched(&q).unwrap();
        for cw in &colored {
            for mode in [CountMode::Strict, CountMode::Relaxed] {
                let via_colored =
                    count_colored_circuits(Pattern::Toeplitz, cw, 6, mode).unwrap();
                let via_plain =
                    count_circuits(Pattern::Toeplitz, &cw.drop_colors(), 6, mode).unwrap();
                assert_eq!(via_colored, via_plain);
            }
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let odd = Word::parse("aba").unwrap();
        assert!(matches!(
            count_circuits(Pattern::Wigner, &odd, 4, CountMode::Relaxed),
            Err(Error::NotPairMatched(_))
        ));
        let word = Word::parse("aa").unwrap();
        assert!(matches!(
            count_circuits(Pattern::Wigner, &word, 0, CountMode::Relaxed),
            Err(Error::DimensionTooSmall { .. })
        ));
    }

    #[test]
    fn circuit_validation() {
        assert!(Circuit::new(vec![1, 2, 1], 3).is_ok());
        assert!(Circuit::new(vec![1, 2, 3], 3).is_err(), "must close");
        assert!(Circuit::new(vec![1, 4, 1], 3).is_err(), "vertex out of range");
        assert!(Circuit::new(vec![1], 3).is_err(), "needs a step");
        let c = Circuit::new(vec![2, 3, 2], 5).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(
            c.link_values(Pattern::Toeplitz),
            vec![LinkValue::Scalar(1), LinkValue::Scalar(1)]
        );
        assert!(c.matches_word(Pattern::Toeplitz, &Word::parse("aa").unwrap(), CountMode::Strict));
    }

    #[test]
    fn wigner_catalan_words_approach_one() {
        // Catalan words dominate for Wigner: normalized counts approach 1
        // from below as n grows.
        let word = Word::parse("aabb").unwrap();
        let p16 = p_finite(Pattern::Wigner, &word, 16, CountMode::Strict).unwrap();
        let p64 = p_finite(Pattern::Wigner, &word, 64, CountMode::Strict).unwrap();
        assert!(p16 < p64 && p64 < 1.0, "p16 = {p16}, p64 = {p64}");
        assert!(1.0 - p64 < 0.1);
    }
}
