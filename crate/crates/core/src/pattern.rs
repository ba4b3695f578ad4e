//! Link functions, input sequences and patterned-matrix construction.
//!
//! A symmetric link function `L` maps a position `(i, j)` (1-based, `i, j <=
//! n`) to an index value; the matrix entry at `(i, j)` is the input-sequence
//! value attached to `L(i, j)`. Entries are therefore constant on the level
//! sets of `L`, and the combinatorics of those level sets is what drives the
//! limiting moments computed elsewhere in the crate.

use arrayvec::ArrayVec;
use ndarray::Array2;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// The five supported symmetric patterned ensembles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Pattern {
    /// `L(i, j) = (min(i, j), max(i, j))`: every entry above the diagonal is
    /// its own level set.
    Wigner,
    /// `L(i, j) = |i - j|`: constant diagonals.
    Toeplitz,
    /// `L(i, j) = i + j`: constant anti-diagonals.
    Hankel,
    /// `L(i, j) = (i + j) mod n`: anti-diagonals wrapped around the edge.
    ReverseCirculant,
    /// `L(i, j) = min(|i - j|, n - |i - j|)`: circulant distance.
    SymmetricCirculant,
}

/// Value of a link function: a scalar or an ordered pair of coordinates.
///
/// Scalars cover Toeplitz, Hankel and the two circulant links; the Wigner
/// link keeps the full (sorted) position pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum LinkValue {
    Scalar(i64),
    Pair(i64, i64),
}

impl fmt::Display for LinkValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LinkValue::Scalar(t) => write!(f, "{t}"),
            LinkValue::Pair(a, b) => write!(f, "({a}, {b})"),
        }
    }
}

impl Pattern {
    /// All patterns, in a fixed order.
    pub const ALL: [Pattern; 5] = [
        Pattern::Wigner,
        Pattern::Toeplitz,
        Pattern::Hankel,
        Pattern::ReverseCirculant,
        Pattern::SymmetricCirculant,
    ];

    /// Stable lowercase name, used by the CLI and serialization.
    pub fn name(self) -> &'static str {
        match self {
            Pattern::Wigner => "wigner",
            Pattern::Toeplitz => "toeplitz",
            Pattern::Hankel => "hankel",
            Pattern::ReverseCirculant => "reverse_circulant",
            Pattern::SymmetricCirculant => "symmetric_circulant",
        }
    }

    /// Maximum number of solutions `j` of `L(i, j) = t` over all `i, t, n`.
    ///
    /// This is the constant that controls the universal moment bound: 2 for
    /// Toeplitz and symmetric circulant (a diagonal offset can be realized on
    /// either side of `i`), 1 for the rest.
    pub fn delta(self) -> u32 {
        match self {
            Pattern::Toeplitz | Pattern::SymmetricCirculant => 2,
            _ => 1,
        }
    }

    /// Maximum of `#{ j : L(i, j) = t }` actually attained at dimension `n`.
    pub fn empirical_delta(self, n: u32) -> u32 {
        let mut max = 0u32;
        for i in 1..=n {
            for t in self.link_values(n) {
                let count = self.inverse_link(i, t, n).len() as u32;
                max = max.max(count);
            }
        }
        max
    }

    /// Link value at position `(i, j)`, 1-based. Errors when a coordinate is
    /// outside `1..=n`.
    pub fn link(self, i: u32, j: u32, n: u32) -> Result<LinkValue> {
        if i == 0 || j == 0 || i > n || j > n {
            return Err(Error::IndexOutOfRange { i, j, n });
        }
        Ok(self.link_unchecked(i, j, n))
    }

    /// Link value without the range check; callers guarantee `1 <= i, j <= n`.
    #[inline]
    pub(crate) fn link_unchecked(self, i: u32, j: u32, n: u32) -> LinkValue {
        let (i, j, n) = (i as i64, j as i64, n as i64);
        match self {
            Pattern::Wigner => LinkValue::Pair(i.min(j), i.max(j)),
            Pattern::Toeplitz => LinkValue::Scalar((i - j).abs()),
            Pattern::Hankel => LinkValue::Scalar(i + j),
            Pattern::ReverseCirculant => LinkValue::Scalar((i + j).rem_euclid(n)),
            Pattern::SymmetricCirculant => {
                let d = (i - j).abs();
                LinkValue::Scalar(d.min(n - d))
            }
        }
    }

    /// All positions `j` in `1..=n` with `L(i, j) = t`, sorted ascending.
    ///
    /// The result never has more than [`Pattern::delta`] elements; it is empty
    /// when `t` is not attained in row `i`.
    pub fn inverse_link(self, i: u32, t: LinkValue, n: u32) -> ArrayVec<u32, 4> {
        let mut out = ArrayVec::new();
        if i == 0 || i > n {
            return out;
        }
        let (ii, nn) = (i as i64, n as i64);
        let mut push = |j: i64| {
            if (1..=nn).contains(&j) {
                let j = j as u32;
                if !out.contains(&j) {
                    out.push(j);
                }
            }
        };
        match (self, t) {
            (Pattern::Wigner, LinkValue::Pair(a, b)) => {
                if a <= b && a >= 1 && b <= nn {
                    if ii == a {
                        push(b);
                    } else if ii == b {
                        push(a);
                    }
                }
            }
            (Pattern::Toeplitz, LinkValue::Scalar(d)) => {
                if d >= 0 {
                    push(ii - d);
                    push(ii + d);
                }
            }
            (Pattern::Hankel, LinkValue::Scalar(s)) => push(s - ii),
            (Pattern::ReverseCirculant, LinkValue::Scalar(r)) => {
                if (0..nn).contains(&r) {
                    let j = (r - ii).rem_euclid(nn);
                    push(if j == 0 { nn } else { j });
                }
            }
            (Pattern::SymmetricCirculant, LinkValue::Scalar(t)) => {
                if (0..=nn / 2).contains(&t) {
                    push(ii - t);
                    push(ii + t);
                    push(ii - (nn - t));
                    push(ii + (nn - t));
                }
            }
            // Scalar query against the Wigner pair link (or vice versa): no
            // position attains it.
            _ => {}
        }
        out.sort_unstable();
        out
    }

    /// Number of distinct link values at dimension `n`.
    pub(crate) fn link_value_count(self, n: u32) -> usize {
        let n = n as usize;
        match self {
            Pattern::Wigner => n * (n + 1) / 2,
            Pattern::Toeplitz => n,
            Pattern::Hankel => 2 * n - 1,
            Pattern::ReverseCirculant => n,
            Pattern::SymmetricCirculant => n / 2 + 1,
        }
    }

    /// Dense index of a link value in the canonical enumeration order; `None`
    /// when the value is not attained at dimension `n`.
    pub(crate) fn link_index(self, t: LinkValue, n: u32) -> Option<usize> {
        let nn = n as i64;
        match (self, t) {
            (Pattern::Wigner, LinkValue::Pair(a, b)) => {
                if 1 <= a && a <= b && b <= nn {
                    let (a, b, nn) = (a as usize, b as usize, n as usize);
                    Some((a - 1) * (nn + 1) - a * (a - 1) / 2 + (b - a))
                } else {
                    None
                }
            }
            (Pattern::Toeplitz, LinkValue::Scalar(d)) => {
                (0..nn).contains(&d).then(|| d as usize)
            }
            (Pattern::Hankel, LinkValue::Scalar(s)) => {
                (2..=2 * nn).contains(&s).then(|| (s - 2) as usize)
            }
            (Pattern::ReverseCirculant, LinkValue::Scalar(r)) => {
                (0..nn).contains(&r).then(|| r as usize)
            }
            (Pattern::SymmetricCirculant, LinkValue::Scalar(t)) => {
                (0..=nn / 2).contains(&t).then(|| t as usize)
            }
            _ => None,
        }
    }

    /// Canonical enumeration of all link values at dimension `n`, in index
    /// order. Input sequences draw their values in this order.
    pub fn link_values(self, n: u32) -> Vec<LinkValue> {
        let nn = n as i64;
        match self {
            Pattern::Wigner => {
                let mut out = Vec::with_capacity(self.link_value_count(n));
                for a in 1..=nn {
                    for b in a..=nn {
                        out.push(LinkValue::Pair(a, b));
                    }
                }
                out
            }
            Pattern::Toeplitz => (0..nn).map(LinkValue::Scalar).collect(),
            Pattern::Hankel => (2..=2 * nn).map(LinkValue::Scalar).collect(),
            Pattern::ReverseCirculant => (0..nn).map(LinkValue::Scalar).collect(),
            Pattern::SymmetricCirculant => (0..=nn / 2).map(LinkValue::Scalar).collect(),
        }
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Pattern {
    type Err = Error;

    /// Accepts the canonical names plus short aliases (`w`, `t`, `h`, `rc`,
    /// `sc`); case and `-`/`_` separators are ignored.
    fn from_str(s: &str) -> Result<Pattern> {
        let key: String = s
            .chars()
            .filter(|c| *c != '-' && *c != '_')
            .flat_map(|c| c.to_lowercase())
            .collect();
        match key.as_str() {
            "wigner" | "w" => Ok(Pattern::Wigner),
            "toeplitz" | "t" => Ok(Pattern::Toeplitz),
            "hankel" | "h" => Ok(Pattern::Hankel),
            "reversecirculant" | "rc" => Ok(Pattern::ReverseCirculant),
            "symmetriccirculant" | "sc" => Ok(Pattern::SymmetricCirculant),
            _ => Err(Error::InvalidArgument(format!(
                "unknown pattern {s:?}; expected one of wigner, toeplitz, hankel, reverse_circulant, symmetric_circulant"
            ))),
        }
    }
}

/// Entry distribution for input sequences. Both choices have mean zero and
/// variance one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InputDistribution {
    /// Uniform on `{-1, +1}`.
    Rademacher,
    /// Standard normal.
    StandardGaussian,
}

impl FromStr for InputDistribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<InputDistribution> {
        match s.to_ascii_lowercase().as_str() {
            "rademacher" => Ok(InputDistribution::Rademacher),
            "gaussian" | "standard_gaussian" | "normal" => Ok(InputDistribution::StandardGaussian),
            _ => Err(Error::InvalidArgument(format!(
                "unknown distribution {s:?}; expected rademacher or gaussian"
            ))),
        }
    }
}

/// An i.i.d. input sequence: one real value per link value of a pattern at a
/// fixed dimension, drawn in canonical link order from a seeded stream.
#[derive(Debug, Clone)]
pub struct InputSequence {
    pattern: Pattern,
    n: u32,
    distribution: InputDistribution,
    seed: u64,
    values: Vec<f64>,
}

impl InputSequence {
    /// Draw the full sequence for `pattern` at dimension `n`. The same
    /// `(pattern, n, distribution, seed)` always yields the same values.
    pub fn generate(
        pattern: Pattern,
        n: u32,
        distribution: InputDistribution,
        seed: u64,
    ) -> Result<InputSequence> {
        if n == 0 {
            return Err(Error::DimensionTooSmall {
                n,
                reason: "input sequences need n >= 1".into(),
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let count = pattern.link_value_count(n);
        let values = (0..count)
            .map(|_| match distribution {
                InputDistribution::Rademacher => {
                    if rng.gen::<bool>() {
                        1.0
                    } else {
                        -1.0
                    }
                }
                InputDistribution::StandardGaussian => rng.sample(StandardNormal),
            })
            .collect();
        Ok(InputSequence {
            pattern,
            n,
            distribution,
            seed,
            values,
        })
    }

    pub fn pattern(&self) -> Pattern {
        self.pattern
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn distribution(&self) -> InputDistribution {
        self.distribution
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of stored values (one per link value).
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Value attached to a link value; `None` when `t` is not attained for
    /// this sequence's pattern and dimension.
    pub fn value(&self, t: LinkValue) -> Option<f64> {
        self.pattern
            .link_index(t, self.n)
            .map(|idx| self.values[idx])
    }
}

/// A realized patterned matrix: the pattern, its dimension and the dense
/// symmetric entries.
#[derive(Debug, Clone)]
pub struct PatternedMatrix {
    pattern: Pattern,
    n: u32,
    entries: Array2<f64>,
}

impl PatternedMatrix {
    pub fn pattern(&self) -> Pattern {
        self.pattern
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Entry at 1-based position `(i, j)`.
    pub fn entry(&self, i: u32, j: u32) -> f64 {
        self.entries[((i - 1) as usize, (j - 1) as usize)]
    }

    pub fn as_array(&self) -> &Array2<f64> {
        &self.entries
    }
}

/// Fill an `n x n` matrix of `pattern` from an input sequence.
///
/// The sequence must have been generated for the same pattern. For Wigner,
/// Toeplitz and Hankel the link values at dimension `n` embed into those at
/// any larger dimension, so a sequence generated at `input.n() >= n` works;
/// the circulant links depend on `n` itself, so those require an exact match.
pub fn build_matrix(pattern: Pattern, n: u32, input: &InputSequence) -> Result<PatternedMatrix> {
    let compatible = input.pattern() == pattern
        && match pattern {
            Pattern::ReverseCirculant | Pattern::SymmetricCirculant => input.n() == n,
            _ => input.n() >= n,
        };
    if n == 0 || !compatible {
        return Err(Error::InputMismatch {
            requested: pattern,
            requested_n: n,
            found: input.pattern(),
            found_n: input.n(),
        });
    }
    let size = n as usize;
    let mut data = Vec::with_capacity(size * size);
    for i in 1..=n {
        for j in 1..=n {
            let t = pattern.link_unchecked(i, j, n);
            // Compatibility was checked above, so every link value resolves.
            let v = input.value(t).ok_or(Error::InputMismatch {
                requested: pattern,
                requested_n: n,
                found: input.pattern(),
                found_n: input.n(),
            })?;
            data.push(v);
        }
    }
    let entries = Array2::from_shape_vec((size, size), data)
        .expect("row-major fill matches the (n, n) shape");
    Ok(PatternedMatrix {
        pattern,
        n,
        entries,
    })
}
