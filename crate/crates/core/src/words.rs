//! Words, colored words and monomials.
//!
//! A word of length `k` records which positions of a closed walk must carry
//! equal link values: positions share a letter exactly when they are matched.
//! Words are kept in canonical form (letters named by first occurrence, so
//! the first letter is `a`, the next new one `b`, and so on). A word is
//! *pair-matched* when every letter occurs exactly twice; only pair-matched
//! words contribute to limiting moments.
//!
//! A monomial assigns a color (an independent matrix) to each position of a
//! product; colored pair-matched words additionally match positions only
//! within a color. Dropping colors maps the colored words of a monomial
//! injectively into plain pair-matched words.

use serde::{Serialize, Serializer};
use std::collections::BTreeMap;
use std::collections::HashMap;
use std::fmt;
use std::hash::Hash;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Maximum word / monomial length accepted by the enumeration and assembly
/// routines. Pair-matched words grow as `(k - 1)!!`, so 16 (about 2 million
/// words) is where exhaustive work stops being interactive.
pub const MAX_WORD_LEN: usize = 16;

fn check_len(len: usize) -> Result<()> {
    if len > MAX_WORD_LEN {
        Err(Error::LengthCap {
            len,
            max: MAX_WORD_LEN,
        })
    } else {
        Ok(())
    }
}

/// A word in canonical form. Letters are stored as 0-based ids; id 0 prints
/// as `a`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    letters: Vec<u8>,
}

impl Word {
    /// Canonicalize an arbitrary symbol sequence: letters are renamed in
    /// order of first occurrence. The result is invariant under any
    /// injective renaming of the input symbols.
    pub fn canonicalize<T: Eq + Hash>(symbols: &[T]) -> Word {
        let mut ids: HashMap<&T, u8> = HashMap::new();
        let mut letters = Vec::with_capacity(symbols.len());
        for s in symbols {
            let next = ids.len() as u8;
            letters.push(*ids.entry(s).or_insert(next));
        }
        Word { letters }
    }

    /// Parse a word given as lowercase letters, e.g. `"abba"`. The input
    /// must already be canonical so that the word printed back is the word
    /// that was asked for.
    pub fn parse(s: &str) -> Result<Word> {
        if s.is_empty() {
            return Err(Error::InvalidWord("empty word".into()));
        }
        let mut symbols = Vec::with_capacity(s.len());
        for c in s.chars() {
            if !c.is_ascii_lowercase() {
                return Err(Error::InvalidWord(format!(
                    "{s:?} contains {c:?}; words use lowercase letters a-z"
                )));
            }
            symbols.push(c);
        }
        let canonical = Word::canonicalize(&symbols);
        if canonical.to_string() != s {
            return Err(Error::InvalidWord(format!(
                "{s:?} is not canonical (letters must be named by first occurrence); did you mean {canonical}?"
            )));
        }
        Ok(canonical)
    }

    /// 0-based letter ids, one per position.
    pub fn letters(&self) -> &[u8] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Number of distinct letters.
    pub fn distinct_letters(&self) -> usize {
        self.letters.iter().map(|l| *l as usize + 1).max().unwrap_or(0)
    }

    /// True when every letter occurs exactly twice.
    pub fn is_pair_matched(&self) -> bool {
        if self.letters.is_empty() || self.letters.len() % 2 != 0 {
            return false;
        }
        let mut counts = vec![0usize; self.distinct_letters()];
        for l in &self.letters {
            counts[*l as usize] += 1;
        }
        counts.iter().all(|&c| c == 2)
    }

    /// True when the word reduces to nothing by repeatedly deleting adjacent
    /// equal pairs. For pair-matched words these are exactly the words whose
    /// pairing is noncrossing (the Catalan words).
    pub fn is_catalan(&self) -> bool {
        let mut stack: Vec<u8> = Vec::with_capacity(self.letters.len());
        for l in &self.letters {
            if stack.last() == Some(l) {
                stack.pop();
            } else {
                stack.push(*l);
            }
        }
        !self.letters.is_empty() && stack.is_empty()
    }

    /// True when every letter occurs equally often at odd and at even
    /// (1-based) positions. For a pair-matched word: one odd and one even
    /// position per letter.
    pub fn is_symmetric(&self) -> bool {
        if self.letters.is_empty() {
            return false;
        }
        let mut balance = vec![0i64; self.distinct_letters()];
        for (pos, l) in self.letters.iter().enumerate() {
            // pos is 0-based, so even pos means odd 1-based position.
            balance[*l as usize] += if pos % 2 == 0 { 1 } else { -1 };
        }
        balance.iter().all(|&b| b == 0)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.letters {
            if *l < 26 {
                write!(f, "{}", (b'a' + l) as char)?;
            } else {
                write!(f, "({l})")?;
            }
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Word> {
        Word::parse(s)
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Number of pair-matched words of length `k`: `(k - 1)!! = k! / ((k/2)!
/// 2^(k/2))` for even `k`, 0 for odd `k`.
pub fn pair_matched_count(k: usize) -> u128 {
    if k == 0 || k % 2 != 0 {
        return 0;
    }
    (1..k as u128).step_by(2).product()
}

/// All pair-matched words of length `k` in lexicographic order. Odd `k`
/// yields no words; `k > MAX_WORD_LEN` is rejected.
pub fn enumerate_pair_matched(k: usize) -> Result<Vec<Word>> {
    check_len(k)?;
    if k == 0 || k % 2 != 0 {
        return Ok(Vec::new());
    }
    let mut words = Vec::with_capacity(pair_matched_count(k) as usize);
    let mut partner = vec![usize::MAX; k];
    fill_matchings(&mut partner, &mut |partner| {
        words.push(word_from_partner(partner));
    });
    words.sort_unstable();
    Ok(words)
}

/// Enumerate perfect matchings of the unmatched positions in `partner`,
/// invoking `emit` on each complete assignment.
fn fill_matchings(partner: &mut [usize], emit: &mut dyn FnMut(&[usize])) {
    let first = match partner.iter().position(|p| *p == usize::MAX) {
        None => {
            emit(partner);
            return;
        }
        Some(p) => p,
    };
    for second in first + 1..partner.len() {
        if partner[second] != usize::MAX {
            continue;
        }
        partner[first] = second;
        partner[second] = first;
        fill_matchings(partner, emit);
        partner[first] = usize::MAX;
        partner[second] = usize::MAX;
    }
}

/// Canonical word whose equal-letter pairs are exactly the matched position
/// pairs in `partner`.
fn word_from_partner(partner: &[usize]) -> Word {
    let mut letters = vec![u8::MAX; partner.len()];
    let mut next = 0u8;
    for p in 0..partner.len() {
        if letters[p] == u8::MAX {
            letters[p] = next;
            letters[partner[p]] = next;
            next += 1;
        }
    }
    Word { letters }
}

/// All noncrossing perfect pairings of `1..=k`, each pairing a list of
/// `(left, right)` position pairs sorted by left endpoint. Odd `k` yields no
/// pairings; there are `Catalan(k/2)` of them for even `k`.
pub fn noncrossing_pairings(k: usize) -> Result<Vec<Vec<(usize, usize)>>> {
    check_len(k)?;
    if k % 2 != 0 {
        return Ok(Vec::new());
    }
    let positions: Vec<usize> = (1..=k).collect();
    let mut out = noncrossing_on(&positions);
    for pairing in &mut out {
        pairing.sort_unstable();
    }
    Ok(out)
}

fn noncrossing_on(positions: &[usize]) -> Vec<Vec<(usize, usize)>> {
    if positions.is_empty() {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    // The first position pairs with a partner at odd distance; the pairing
    // splits into independent inner and outer segments.
    for idx in (1..positions.len()).step_by(2) {
        let inner = noncrossing_on(&positions[1..idx]);
        let outer = noncrossing_on(&positions[idx + 1..]);
        for inner_pairing in &inner {
            for outer_pairing in &outer {
                let mut pairing = Vec::with_capacity(positions.len() / 2);
                pairing.push((positions[0], positions[idx]));
                pairing.extend_from_slice(inner_pairing);
                pairing.extend_from_slice(outer_pairing);
                out.push(pairing);
            }
        }
    }
    out
}

/// Per-color counts of even and odd (1-based) positions in a monomial.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SymmetryProfile {
    /// color -> (occurrences at even positions, occurrences at odd positions)
    pub even_odd: BTreeMap<u32, (usize, usize)>,
}

impl SymmetryProfile {
    /// True when every color balances its even and odd occurrences.
    pub fn is_symmetric(&self) -> bool {
        self.even_odd.values().all(|(e, o)| e == o)
    }
}

/// A monomial in independent matrices: the sequence of colors
/// `q = (c_1, ..., c_k)`, standing for the product `X_{c_1} ... X_{c_k}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    colors: Vec<u32>,
}

impl Monomial {
    /// Colors are 1-based ids; the monomial must be nonempty.
    pub fn new(colors: Vec<u32>) -> Result<Monomial> {
        if colors.is_empty() {
            return Err(Error::InvalidMonomial("empty monomial".into()));
        }
        if colors.contains(&0) {
            return Err(Error::InvalidMonomial(
                "colors are positive integers".into(),
            ));
        }
        Ok(Monomial { colors })
    }

    /// Parse comma-separated colors, e.g. `"1,2,1,2"`.
    pub fn parse(s: &str) -> Result<Monomial> {
        let colors = s
            .split(',')
            .map(|part| {
                part.trim()
                    .parse::<u32>()
                    .map_err(|_| Error::InvalidMonomial(format!("bad color {part:?} in {s:?}")))
            })
            .collect::<Result<Vec<u32>>>()?;
        Monomial::new(colors)
    }

    pub fn colors(&self) -> &[u32] {
        &self.colors
    }

    pub fn len(&self) -> usize {
        self.colors.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Occurrences of each color.
    pub fn color_multiplicities(&self) -> BTreeMap<u32, usize> {
        let mut counts = BTreeMap::new();
        for c in &self.colors {
            *counts.entry(*c).or_insert(0) += 1;
        }
        counts
    }

    /// True when every color occurs an even number of times. Monomials
    /// failing this have limiting moment zero.
    pub fn is_balanced(&self) -> bool {
        self.color_multiplicities().values().all(|m| m % 2 == 0)
    }

    /// Even/odd position counts per color, positions 1-based.
    pub fn symmetry_profile(&self) -> SymmetryProfile {
        let mut even_odd: BTreeMap<u32, (usize, usize)> = BTreeMap::new();
        for (idx, c) in self.colors.iter().enumerate() {
            let entry = even_odd.entry(*c).or_insert((0, 0));
            if (idx + 1) % 2 == 0 {
                entry.0 += 1;
            } else {
                entry.1 += 1;
            }
        }
        SymmetryProfile { even_odd }
    }

    /// True when every color occurs equally often at even and odd positions.
    pub fn is_symmetric(&self) -> bool {
        self.symmetry_profile().is_symmetric()
    }

    /// Cyclic rotation by `r` positions: `(c_{r+1}, ..., c_k, c_1, ..., c_r)`.
    pub fn rotate(&self, r: usize) -> Monomial {
        let k = self.colors.len();
        let r = r % k;
        let mut colors = Vec::with_capacity(k);
        colors.extend_from_slice(&self.colors[r..]);
        colors.extend_from_slice(&self.colors[..r]);
        Monomial { colors }
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (idx, c) in self.colors.iter().enumerate() {
            if idx > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl FromStr for Monomial {
    type Err = Error;

    fn from_str(s: &str) -> Result<Monomial> {
        Monomial::parse(s)
    }
}

impl Serialize for Monomial {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.colors.iter())
    }
}

/// A word together with a color per position. Positions sharing a letter
/// always share the color, so dropping colors loses no matching structure.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ColoredWord {
    letters: Vec<u8>,
    colors: Vec<u32>,
}

impl ColoredWord {
    pub fn new(letters: Vec<u8>, colors: Vec<u32>) -> Result<ColoredWord> {
        if letters.is_empty() || letters.len() != colors.len() {
            return Err(Error::InvalidWord(
                "colored word needs one color per letter".into(),
            ));
        }
        if colors.contains(&0) {
            return Err(Error::InvalidMonomial(
                "colors are positive integers".into(),
            ));
        }
        let word = Word {
            letters: letters.clone(),
        };
        if Word::canonicalize(&letters) != word {
            return Err(Error::InvalidWord(format!(
                "letters of {word} are not canonical"
            )));
        }
        let mut color_of_letter: HashMap<u8, u32> = HashMap::new();
        for (l, c) in letters.iter().zip(&colors) {
            match color_of_letter.entry(*l) {
                std::collections::hash_map::Entry::Occupied(e) if *e.get() != *c => {
                    return Err(Error::InvalidWord(format!(
                        "letter {} carries two colors",
                        (b'a' + l) as char
                    )));
                }
                std::collections::hash_map::Entry::Vacant(e) => {
                    e.insert(*c);
                }
                _ => {}
            }
        }
        Ok(ColoredWord { letters, colors })
    }

    pub fn letters(&self) -> &[u8] {
        &self.letters
    }

    pub fn colors(&self) -> &[u32] {
        &self.colors
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Forget the colors. Injective on the colored pair-matched words of any
    /// fixed monomial: the letters alone determine the matching.
    pub fn drop_colors(&self) -> Word {
        Word {
            letters: self.letters.clone(),
        }
    }

    pub fn is_pair_matched(&self) -> bool {
        self.drop_colors().is_pair_matched()
    }

    pub fn is_catalan(&self) -> bool {
        self.drop_colors().is_catalan()
    }

    pub fn is_symmetric(&self) -> bool {
        self.drop_colors().is_symmetric()
    }

    /// True when the color sequence equals the monomial.
    pub fn matches_monomial(&self, q: &Monomial) -> bool {
        self.colors == q.colors()
    }
}

impl fmt::Display for ColoredWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (l, c) in self.letters.iter().zip(&self.colors) {
            if *l < 26 {
                write!(f, "{}{c}", (b'a' + l) as char)?;
            } else {
                write!(f, "({l}){c}")?;
            }
        }
        Ok(())
    }
}

impl Serialize for ColoredWord {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// All colored pair-matched words of a monomial, sorted by letters: positions
/// are matched in pairs within each color class. There are
/// `prod_c (m_c - 1)!!` of them when every color multiplicity `m_c` is even,
/// none otherwise.
pub fn enumerate_colored_pair_matched(q: &Monomial) -> Result<Vec<ColoredWord>> {
    check_len(q.len())?;
    let k = q.len();
    if k % 2 != 0 || !q.is_balanced() {
        return Ok(Vec::new());
    }
    // Group positions by color, then enumerate matchings color by color into
    // a shared partner table.
    let mut by_color: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (pos, c) in q.colors().iter().enumerate() {
        by_color.entry(*c).or_default().push(pos);
    }
    let groups: Vec<&Vec<usize>> = by_color.values().collect();
    let mut partner = vec![usize::MAX; k];
    let mut words = Vec::new();
    fill_color_matchings(&groups, 0, &mut partner, &mut |partner| {
        let word = word_from_partner(partner);
        words.push(ColoredWord {
            letters: word.letters,
            colors: q.colors().to_vec(),
        });
    });
    words.sort_unstable();
    Ok(words)
}

fn fill_color_matchings(
    groups: &[&Vec<usize>],
    group_idx: usize,
    partner: &mut [usize],
    emit: &mut dyn FnMut(&[usize]),
) {
    if group_idx == groups.len() {
        emit(partner);
        return;
    }
    let positions = groups[group_idx];
    fill_group(positions, partner, &mut |partner| {
        fill_color_matchings(groups, group_idx + 1, partner, emit);
    });
}

/// Enumerate perfect matchings of `positions` (writing into the global
/// partner table), calling `done` for each.
fn fill_group(positions: &[usize], partner: &mut [usize], done: &mut dyn FnMut(&mut [usize])) {
    let first = match positions.iter().find(|p| partner[**p] == usize::MAX) {
        None => {
            done(partner);
            return;
        }
        Some(p) => *p,
    };
    let later: Vec<usize> = positions
        .iter()
        .copied()
        .filter(|p| *p > first && partner[*p] == usize::MAX)
        .collect();
    for second in later {
        partner[first] = second;
        partner[second] = first;
        fill_group(positions, partner, done);
        partner[first] = usize::MAX;
        partner[second] = usize::MAX;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn words_to_strings(words: &[Word]) -> Vec<String> {
        words.iter().map(|w| w.to_string()).collect()
    }

    #[test]
    fn canonicalize_examples() {
        assert_eq!(Word::canonicalize(&['x', 'y', 'x', 'y']).to_string(), "abab");
        assert_eq!(Word::canonicalize(&[7, 7, 9, 9]).to_string(), "aabb");
        assert_eq!(
            Word::canonicalize(&["q", "r", "s", "s", "r", "q"]).to_string(),
            "abccba"
        );
    }

    #[test]
    fn parse_requires_canonical_form() {
        assert_eq!(Word::parse("abba").unwrap().to_string(), "abba");
        assert!(Word::parse("baab").is_err());
        assert!(Word::parse("aBba").is_err());
        assert!(Word::parse("").is_err());
        assert!(Word::parse("a1b").is_err());
    }

    #[test]
    fn pair_matched_detection() {
        assert!(Word::parse("abab").unwrap().is_pair_matched());
        assert!(!Word::parse("aba").unwrap().is_pair_matched());
        assert!(!Word::parse("aabbb").unwrap().is_pair_matched());
        assert!(!Word::parse("abc").unwrap().is_pair_matched());
    }

    #[test]
    fn enumerate_length_four() {
        let words = enumerate_pair_matched(4).unwrap();
        assert_eq!(words_to_strings(&words), vec!["aabb", "abab", "abba"]);
    }

    #[test]
    fn enumeration_counts_match_double_factorial() {
        let expected = [(2usize, 1u128), (4, 3), (6, 15), (8, 105), (10, 945)];
        for (k, count) in expected {
            let words = enumerate_pair_matched(k).unwrap();
            assert_eq!(words.len() as u128, count, "k = {k}");
            assert_eq!(pair_matched_count(k), count);
            assert!(words.iter().all(|w| w.is_pair_matched()));
            // Enumeration yields distinct canonical words in sorted order.
            let mut sorted = words.clone();
            sorted.dedup();
            assert_eq!(sorted.len(), words.len());
        }
        assert!(enumerate_pair_matched(5).unwrap().is_empty());
        assert!(matches!(
            enumerate_pair_matched(18),
            Err(Error::LengthCap { .. })
        ));
    }

    #[test]
    fn catalan_words_are_counted_by_catalan_numbers() {
        let catalan = [1usize, 2, 5, 14, 42];
        for (idx, k) in [2usize, 4, 6, 8, 10].into_iter().enumerate() {
            let count = enumerate_pair_matched(k)
                .unwrap()
                .iter()
                .filter(|w| w.is_catalan())
                .count();
            assert_eq!(count, catalan[idx], "k = {k}");
        }
        assert!(Word::parse("abba").unwrap().is_catalan());
        assert!(Word::parse("aabb").unwrap().is_catalan());
        assert!(!Word::parse("abab").unwrap().is_catalan());
        assert!(!Word::parse("abcabc").unwrap().is_catalan());
        assert!(Word::parse("abccba").unwrap().is_catalan());
    }

    #[test]
    fn symmetric_words_are_counted_by_factorials() {
        let factorials = [1usize, 2, 6, 24, 120];
        for (idx, k) in [2usize, 4, 6, 8, 10].into_iter().enumerate() {
            let count = enumerate_pair_matched(k)
                .unwrap()
                .iter()
                .filter(|w| w.is_symmetric())
                .count();
            assert_eq!(count, factorials[idx], "k = {k}");
        }
        // a occupies positions 1 and 3 in abab, both odd.
        assert!(!Word::parse("abab").unwrap().is_symmetric());
        assert!(Word::parse("abba").unwrap().is_symmetric());
        assert!(Word::parse("aabb").unwrap().is_symmetric());
        assert!(Word::parse("abcabc").unwrap().is_symmetric());
    }

    #[test]
    fn the_only_symmetric_noncatalan_word_of_length_six_is_abcabc() {
        let words = enumerate_pair_matched(6).unwrap();
        let special: Vec<String> = words
            .iter()
            .filter(|w| w.is_symmetric() && !w.is_catalan())
            .map(|w| w.to_string())
            .collect();
        assert_eq!(special, vec!["abcabc"]);
    }

    #[test]
    fn noncrossing_pairing_counts_are_catalan() {
        let catalan = [1usize, 2, 5, 14, 42];
        for (idx, k) in [2usize, 4, 6, 8, 10].into_iter().enumerate() {
            let pairings = noncrossing_pairings(k).unwrap();
            assert_eq!(pairings.len(), catalan[idx]);
            for pairing in &pairings {
                assert_eq!(pairing.len(), k / 2);
                // No two pairs cross.
                for (a, b) in pairing {
                    for (c, d) in pairing {
                        let crosses = a < c && c < b && b < d;
                        assert!(!crosses, "({a},{b}) crosses ({c},{d})");
                    }
                }
            }
        }
        let four = noncrossing_pairings(4).unwrap();
        assert!(four.contains(&vec![(1, 2), (3, 4)]));
        assert!(four.contains(&vec![(1, 4), (2, 3)]));
        assert!(!four.contains(&vec![(1, 3), (2, 4)]));
    }

    #[test]
    fn monomial_parsing_and_profiles() {
        let q = Monomial::parse("1,2,1,2").unwrap();
        assert_eq!(q.len(), 4);
        assert!(q.is_balanced());
        assert!(!q.is_symmetric(), "color 1 occurs at two odd positions");
        assert_eq!(q.to_string(), "1,2,1,2");

        let q = Monomial::parse("1,2,2,1").unwrap();
        assert!(q.is_balanced());
        assert!(q.is_symmetric());

        let q = Monomial::parse("1,2,3,3,1,2").unwrap();
        assert!(q.is_balanced());
        assert!(!q.is_symmetric());

        let q = Monomial::parse("1,2,3,1,2,3").unwrap();
        assert!(q.is_symmetric());
        let profile = q.symmetry_profile();
        assert_eq!(profile.even_odd[&1], (1, 1));

        assert!(Monomial::parse("").is_err());
        assert!(Monomial::parse("1,0,2").is_err());
        assert!(Monomial::parse("1,x").is_err());
    }

    #[test]
    fn colored_enumeration_single_color_matches_plain_words() {
        for k in [2usize, 4, 6, 8] {
            let q = Monomial::new(vec![1; k]).unwrap();
            let colored = enumerate_colored_pair_matched(&q).unwrap();
            let plain = enumerate_pair_matched(k).unwrap();
            let dropped: Vec<Word> = colored.iter().map(|w| w.drop_colors()).collect();
            assert_eq!(dropped, plain);
        }
    }

    #[test]
    fn colored_enumeration_counts_are_products_of_double_factorials() {
        let cases = [
            ("1,2,1,2", 1usize),
            ("1,2,2,1", 1),
            ("1,1,1,1", 3),
            ("1,1,2,2,1,1", 3),
            ("1,2,3,1,2,3", 1),
            ("1,1,1,1,2,2", 3),
            ("1,1,1,1,1,1", 15),
        ];
        for (q, expected) in cases {
            let q = Monomial::parse(q).unwrap();
            let words = enumerate_colored_pair_matched(&q).unwrap();
            assert_eq!(words.len(), expected, "monomial {q}");
            for w in &words {
                assert!(w.is_pair_matched());
                assert!(w.matches_monomial(&q));
            }
            // Dropping colors is injective within a monomial.
            let mut dropped: Vec<Word> = words.iter().map(|w| w.drop_colors()).collect();
            dropped.sort_unstable();
            dropped.dedup();
            assert_eq!(dropped.len(), words.len());
        }
    }

    #[test]
    fn unbalanced_monomials_have_no_colored_words() {
        for q in ["1,2,1", "1,1,2", "1,2,3,1"] {
            let q = Monomial::parse(q).unwrap();
            assert!(enumerate_colored_pair_matched(&q).unwrap().is_empty());
        }
    }

    #[test]
    fn colored_word_example() {
        let q = Monomial::parse("1,2,1,2").unwrap();
        let words = enumerate_colored_pair_matched(&q).unwrap();
        assert_eq!(words.len(), 1);
        assert_eq!(words[0].to_string(), "a1b2a1b2");
        assert_eq!(words[0].drop_colors().to_string(), "abab");
    }

    #[test]
    fn colored_word_validation() {
        // Positions with the same letter must share a color.
        assert!(ColoredWord::new(vec![0, 0], vec![1, 2]).is_err());
        assert!(ColoredWord::new(vec![0, 1, 0, 1], vec![1, 2, 1, 2]).is_ok());
        // Letters must be canonical.
        assert!(ColoredWord::new(vec![1, 0], vec![1, 1]).is_err());
        assert!(ColoredWord::new(vec![0], vec![0]).is_err());
        assert!(ColoredWord::new(vec![0, 0], vec![1]).is_err());
    }

    #[test]
    fn rotation_preserves_multiset() {
        let q = Monomial::parse("1,2,3,1,2,3").unwrap();
        let r = q.rotate(2);
        assert_eq!(r.to_string(), "3,1,2,3,1,2");
        assert_eq!(q.color_multiplicities(), r.color_multiplicities());
        assert_eq!(q.rotate(6), q);
    }

    proptest! {
        #[test]
        fn canonicalize_is_idempotent(symbols in proptest::collection::vec(0u8..6, 1..12)) {
            let once = Word::canonicalize(&symbols);
            let twice = Word::canonicalize(once.letters());
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn canonicalize_ignores_symbol_names(
            symbols in proptest::collection::vec(0u8..6, 1..12),
            offset in 1u16..1000,
        ) {
            // Any injective renaming of symbols leaves the canonical form
            // unchanged.
            let renamed: Vec<u16> = symbols.iter().map(|s| *s as u16 * 7 + offset).collect();
            prop_assert_eq!(Word::canonicalize(&symbols), Word::canonicalize(&renamed));
        }

        #[test]
        fn random_matchings_are_pair_matched(k2 in 1usize..7, seed in any::<u64>()) {
            // Build a word from a random perfect matching of 2*k2 positions.
            use rand::prelude::*;
            let k = 2 * k2;
            let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
            let mut positions: Vec<usize> = (0..k).collect();
            positions.shuffle(&mut rng);
            let mut partner = vec![usize::MAX; k];
            for pair in positions.chunks(2) {
                partner[pair[0]] = pair[1];
                partner[pair[1]] = pair[0];
            }
            let word = word_from_partner(&partner);
            prop_assert!(word.is_pair_matched());
            prop_assert_eq!(Word::canonicalize(word.letters()), word);
        }
    }
}
