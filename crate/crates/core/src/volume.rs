//! Monte Carlo volume evaluation of Toeplitz and Hankel limits.
//!
//! Rescaling circuit vertices by `1/n` turns the matching constraints of a
//! pair-matched word into linear relations among points of `[0, 1]`: a
//! Toeplitz step repeats the first occurrence's difference up to sign, a
//! Hankel step repeats its sum. For each sign assignment whose closure
//! relation holds identically, the limit contribution is the volume of the
//! region where every dependent vertex stays inside `[0, 1]`; `p(w)` is the
//! sum of those volumes. This route is independent of circuit counting and
//! serves as its cross-check.

use num_rational::Rational64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::limits::{Diagnostics, Method, PEstimate};
use crate::pattern::Pattern;
use crate::words::{Word, MAX_WORD_LEN};

/// Linear form over the free variables, integer coefficients.
type Form = Vec<i64>;

fn add(a: &Form, b: &Form, sign: i64) -> Form {
    a.iter().zip(b).map(|(x, y)| x + sign * y).collect()
}

/// Dependent-vertex forms of one retained sign assignment.
struct Retained {
    dependent: Vec<Form>,
}

/// Estimate `p(w)` for Toeplitz or Hankel by Monte Carlo integration of the
/// rescaled constraint system, using `samples` points from a stream seeded
/// with `seed`.
///
/// Degenerate systems resolve exactly: no retained sign assignment yields an
/// exact 0, and a system with no nontrivial constraint (Catalan words)
/// yields an exact 1 with zero standard error.
pub fn mc_volume(pattern: Pattern, word: &Word, samples: u64, seed: u64) -> Result<PEstimate> {
    match pattern {
        Pattern::Toeplitz | Pattern::Hankel => {}
        _ => {
            return Err(Error::Unsupported {
                pattern,
                operation: "mc_volume (the other patterns have exact closed forms)",
            })
        }
    }
    if !word.is_pair_matched() {
        return Err(Error::NotPairMatched(word.to_string()));
    }
    if word.len() > MAX_WORD_LEN {
        return Err(Error::LengthCap {
            len: word.len(),
            max: MAX_WORD_LEN,
        });
    }
    if samples == 0 {
        return Err(Error::InvalidArgument(
            "mc_volume needs at least one sample".into(),
        ));
    }

    let letters = word.letters();
    let k = letters.len();
    let n_letters = word.distinct_letters();
    let n_free = k / 2 + 1;

    // Sign choices only exist for Toeplitz; Hankel's sum constraint leaves a
    // single candidate assignment.
    let candidates: usize = match pattern {
        Pattern::Toeplitz => 1 << n_letters,
        _ => 1,
    };

    let mut retained: Vec<Retained> = Vec::new();
    for assignment in 0..candidates {
        if let Some(r) = propagate(pattern, letters, n_free, assignment) {
            retained.push(r);
        }
    }

    let diagnostics = |samples: u64, retained: usize| Diagnostics::McVolume {
        samples,
        retained,
        candidates,
        seed,
    };

    if retained.is_empty() {
        return Ok(PEstimate {
            value: 0.0,
            exact: Some(Rational64::from_integer(0)),
            method: Method::McVolume,
            std_error: 0.0,
            flagged: false,
            diagnostics: diagnostics(0, 0),
        });
    }

    // Constant forms never leave [0, 1]; drop them so a fully degenerate
    // system is recognized as an exact count of assignments.
    let mut systems: Vec<Vec<Form>> = Vec::new();
    let mut exact_hits = 0u64;
    for r in &retained {
        let live: Vec<Form> = r
            .dependent
            .iter()
            .filter(|f| !is_unit_vertex(f))
            .cloned()
            .collect();
        if live.is_empty() {
            exact_hits += 1;
        } else {
            systems.push(live);
        }
    }
    if systems.is_empty() {
        return Ok(PEstimate {
            value: exact_hits as f64,
            exact: Some(Rational64::from_integer(exact_hits as i64)),
            method: Method::McVolume,
            std_error: 0.0,
            flagged: false,
            diagnostics: diagnostics(0, retained.len()),
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = vec![0.0f64; n_free];
    let mut sum = 0.0f64;
    let mut sum_sq = 0.0f64;
    for _ in 0..samples {
        for xi in x.iter_mut() {
            *xi = rng.gen::<f64>();
        }
        let mut s = exact_hits as f64;
        for system in &systems {
            let inside = system.iter().all(|form| {
                let v: f64 = form
                    .iter()
                    .zip(&x)
                    .map(|(c, xi)| *c as f64 * xi)
                    .sum();
                (0.0..=1.0).contains(&v)
            });
            if inside {
                s += 1.0;
            }
        }
        sum += s;
        sum_sq += s * s;
    }
    let m = samples as f64;
    let mean = sum / m;
    let variance = ((sum_sq / m - mean * mean) * m / (m - 1.0).max(1.0)).max(0.0);
    let std_error = (variance / m).sqrt();
    Ok(PEstimate {
        value: mean,
        exact: None,
        method: Method::McVolume,
        std_error,
        flagged: false,
        diagnostics: diagnostics(samples, retained.len()),
    })
}

/// A form that is exactly one of the sampled vertices (a single +1
/// coefficient) is inside `[0, 1]` by construction.
fn is_unit_vertex(form: &Form) -> bool {
    form.iter().filter(|c| **c != 0).count() == 1 && form.iter().any(|c| *c == 1)
}

/// Walk the word once, expressing every vertex as a linear form over the
/// free variables; returns the dependent (repeat-position) forms when the
/// closure relation holds identically under this sign assignment, `None`
/// otherwise. Bit `l` of `assignment` picks the sign for letter `l`
/// (Toeplitz only).
fn propagate(
    pattern: Pattern,
    letters: &[u8],
    n_free: usize,
    assignment: usize,
) -> Option<Retained> {
    let k = letters.len();
    let unit = |idx: usize| -> Form {
        let mut f = vec![0i64; n_free];
        f[idx] = 1;
        f
    };
    // letter -> the sum/difference form fixed at its first occurrence
    let mut letter_form: Vec<Option<Form>> = vec![None; MAX_WORD_LEN / 2];
    let mut current = unit(0);
    let mut next_free = 1usize;
    let mut dependent: Vec<Form> = Vec::new();
    for (pos, l) in letters.iter().enumerate() {
        let l = *l as usize;
        let next = match &letter_form[l] {
            None => {
                let fresh = unit(next_free);
                next_free += 1;
                letter_form[l] = Some(match pattern {
                    // difference: fresh - current
                    Pattern::Toeplitz => add(&fresh, &current, -1),
                    // sum: fresh + current
                    _ => add(&fresh, &current, 1),
                });
                fresh
            }
            Some(form) => {
                let next = match pattern {
                    Pattern::Toeplitz => {
                        let sign = if assignment >> l & 1 == 1 { 1 } else { -1 };
                        add(&current, form, sign)
                    }
                    _ => add(form, &current, -1),
                };
                dependent.push(next.clone());
                next
            }
        };
        current = next;
        if pos + 1 == k {
            // Closure: the final vertex must be identically the start.
            let mut closure = current.clone();
            closure[0] -= 1;
            if closure.iter().any(|c| *c != 0) {
                return None;
            }
        }
    }
    Some(Retained { dependent })
}
