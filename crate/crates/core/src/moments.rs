//! Limiting joint moments and the three reference independence functionals.
//!
//! `limit_joint_moment` assembles `alpha(q) = sum p(drop_colors(w))` over the
//! colored pair-matched words of a monomial. The reference functionals for
//! free, classical and half independence are computed straight from their
//! defining formulas (noncrossing pairing counts, double factorials,
//! factorials of half multiplicities), never through the word machinery, so
//! comparing them against `limit_joint_moment` is a genuine cross-check of
//! two independent code paths. `classify` runs that comparison over a
//! battery of monomials and reports verdicts with witnesses.

use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::ToPrimitive;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::limits::{p_limit, serialize_opt_rational, LimitConfig, PEstimate};
use crate::pattern::Pattern;
use crate::simulate::{replicate_seed, SimulationStats};
use crate::words::{
    enumerate_colored_pair_matched, noncrossing_pairings, pair_matched_count, ColoredWord,
    Monomial, MAX_WORD_LEN,
};

/// A limiting joint moment together with its per-word decomposition.
#[derive(Debug, Clone, Serialize)]
pub struct MomentValue {
    /// Sum of the contribution values.
    pub value: f64,
    /// Exact rational total, present when every contribution is exact.
    #[serde(serialize_with = "serialize_opt_rational")]
    pub exact: Option<Rational64>,
    /// Root sum of squares of the contribution standard errors.
    pub std_error: f64,
    /// True when any contribution came back flagged.
    pub flagged: bool,
    /// One `(colored word, p estimate)` pair per pair-matched colored word,
    /// in enumeration order.
    pub contributions: Vec<(ColoredWord, PEstimate)>,
}

impl MomentValue {
    fn exact_value(r: Rational64) -> MomentValue {
        MomentValue {
            value: rational_to_f64(r),
            exact: Some(r),
            std_error: 0.0,
            flagged: false,
            contributions: Vec::new(),
        }
    }
}

fn rational_to_f64(r: Rational64) -> f64 {
    r.to_f64().expect("rational representable as f64")
}

fn exact_from_u128(x: u128) -> MomentValue {
    let exact = i64::try_from(x).ok().map(Rational64::from_integer);
    MomentValue {
        value: x as f64,
        exact,
        std_error: 0.0,
        flagged: false,
        contributions: Vec::new(),
    }
}

/// `alpha(q)` for one pattern: the sum of `p(drop_colors(w))` over all
/// colored pair-matched words of the monomial. Odd length or an odd color
/// multiplicity leaves nothing to enumerate and the moment is exactly zero.
/// Per-word limits are evaluated in parallel; the summation order is the
/// enumeration order, so totals are bit-reproducible.
pub fn limit_joint_moment(
    pattern: Pattern,
    q: &Monomial,
    config: &LimitConfig,
) -> Result<MomentValue> {
    limit_joint_moment_with(pattern, q, |p, w| p_limit(p, w, config))
}

/// [`limit_joint_moment`] with a caller-chosen per-word estimator, so the
/// same decomposition can be assembled from forced extrapolation or Monte
/// Carlo volume estimates instead of the default dispatch.
pub fn limit_joint_moment_with<F>(
    pattern: Pattern,
    q: &Monomial,
    estimator: F,
) -> Result<MomentValue>
where
    F: Fn(Pattern, &crate::words::Word) -> Result<PEstimate> + Sync,
{
    let words = enumerate_colored_pair_matched(q)?;
    if words.is_empty() {
        return Ok(MomentValue::exact_value(Rational64::from_integer(0)));
    }
    let contributions: Vec<(ColoredWord, PEstimate)> = words
        .into_par_iter()
        .map(|w| {
            let estimate = estimator(pattern, &w.drop_colors())?;
            Ok((w, estimate))
        })
        .collect::<Result<_>>()?;
    let mut value = 0.0;
    let mut exact = Some(Rational64::from_integer(0));
    let mut var = 0.0;
    let mut flagged = false;
    for (_, est) in &contributions {
        value += est.value;
        exact = match (exact, est.exact) {
            (Some(acc), Some(e)) => Some(acc + e),
            _ => None,
        };
        var += est.std_error * est.std_error;
        flagged |= est.flagged;
    }
    Ok(MomentValue {
        value,
        exact,
        std_error: var.sqrt(),
        flagged,
        contributions,
    })
}

/// Count of noncrossing pairings of a color sequence whose every pair joins
/// equal colors, by interval recursion: position `start` pairs with some `j`
/// of equal color splitting the rest into two even segments.
fn color_respecting_nc_count(colors: &[u32]) -> u128 {
    let k = colors.len();
    if k == 0 {
        return 1;
    }
    if k % 2 != 0 {
        return 0;
    }
    let mut total = 0u128;
    for j in (1..k).step_by(2) {
        if colors[j] == colors[0] {
            total += color_respecting_nc_count(&colors[1..j])
                * color_respecting_nc_count(&colors[j + 1..]);
        }
    }
    total
}

/// Joint moment of a free semicircular family: the number of noncrossing
/// pairings of the positions in which every pair joins equal colors.
pub fn free_semicircular_moment(q: &Monomial) -> MomentValue {
    let k = q.len();
    if k % 2 != 0 {
        return MomentValue::exact_value(Rational64::from_integer(0));
    }
    if k <= MAX_WORD_LEN {
        let colors = q.colors();
        let count = noncrossing_pairings(k)
            .expect("k is within the enumeration cap")
            .iter()
            .filter(|pairing| {
                pairing
                    .iter()
                    .all(|(i, j)| colors[i - 1] == colors[j - 1])
            })
            .count();
        exact_from_u128(count as u128)
    } else {
        // Beyond the enumerator's cap the same quantity is counted without
        // materializing the pairings.
        exact_from_u128(color_respecting_nc_count(q.colors()))
    }
}

/// Joint moment of independent standard Gaussians: the product over colors
/// of the Gaussian moment `(m_c - 1)!!`, zero when any multiplicity is odd.
pub fn classical_gaussian_moment(q: &Monomial) -> MomentValue {
    if q.len() % 2 != 0 || !q.is_balanced() {
        return MomentValue::exact_value(Rational64::from_integer(0));
    }
    let product = q
        .color_multiplicities()
        .values()
        .map(|m| pair_matched_count(*m))
        .product::<u128>();
    exact_from_u128(product)
}

/// Joint moment of a half independent family with Rayleigh-type marginals:
/// zero for nonsymmetric monomials, otherwise the product of `(m_c / 2)!`.
pub fn half_independent_rayleigh_moment(q: &Monomial) -> MomentValue {
    if !q.is_symmetric() {
        return MomentValue::exact_value(Rational64::from_integer(0));
    }
    let product = q
        .color_multiplicities()
        .values()
        .map(|m| (1..=(*m as u128) / 2).product::<u128>())
        .product::<u128>();
    exact_from_u128(product)
}

/// Monte Carlo realization of the canonical half independent family: 2x2
/// matrices `a_i = [[0, eta_i], [conj(eta_i), 0]]` with independent standard
/// complex Gaussians (real and imaginary parts independent, variance 1/2
/// each). Each replicate evaluates `Re(Tr(a_{c_1} ... a_{c_k})) / 2`; the
/// replicate mean converges to [`half_independent_rayleigh_moment`].
pub fn simulate_half_independent_model(
    q: &Monomial,
    reps: u64,
    seed: u64,
) -> Result<SimulationStats> {
    if reps < 1 {
        return Err(Error::InvalidArgument(
            "half-independence model needs reps >= 1".into(),
        ));
    }
    let colors: Vec<u32> = q.color_multiplicities().keys().copied().collect();
    let per_replicate: Vec<f64> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let scale = std::f64::consts::FRAC_1_SQRT_2;
            let mut etas = std::collections::BTreeMap::new();
            for c in &colors {
                let mut rng = ChaCha8Rng::seed_from_u64(replicate_seed(seed, r, *c));
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                etas.insert(*c, Complex64::new(re * scale, im * scale));
            }
            // Fold the 2x2 product; matrices are [[m00, m01], [m10, m11]].
            let mut m = [
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(1.0, 0.0),
            ];
            for c in q.colors() {
                let eta = etas[c];
                let a = [Complex64::new(0.0, 0.0), eta, eta.conj(), Complex64::new(0.0, 0.0)];
                m = [
                    m[0] * a[0] + m[1] * a[2],
                    m[0] * a[1] + m[1] * a[3],
                    m[2] * a[0] + m[3] * a[2],
                    m[2] * a[1] + m[3] * a[3],
                ];
            }
            0.5 * (m[0] + m[3]).re
        })
        .collect();
    Ok(SimulationStats::summarize(
        None,
        q.clone(),
        2,
        None,
        seed,
        per_replicate,
    ))
}

/// The three reference independence notions an ensemble is compared against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceLaw {
    FreeSemicircular,
    ClassicalGaussian,
    HalfIndependentRayleigh,
}

impl ReferenceLaw {
    pub const ALL: [ReferenceLaw; 3] = [
        ReferenceLaw::FreeSemicircular,
        ReferenceLaw::ClassicalGaussian,
        ReferenceLaw::HalfIndependentRayleigh,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ReferenceLaw::FreeSemicircular => "free",
            ReferenceLaw::ClassicalGaussian => "classical",
            ReferenceLaw::HalfIndependentRayleigh => "half_independent",
        }
    }

    pub fn moment(&self, q: &Monomial) -> MomentValue {
        match self {
            ReferenceLaw::FreeSemicircular => free_semicircular_moment(q),
            ReferenceLaw::ClassicalGaussian => classical_gaussian_moment(q),
            ReferenceLaw::HalfIndependentRayleigh => half_independent_rayleigh_moment(q),
        }
    }
}

impl std::fmt::Display for ReferenceLaw {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Outcome of comparing an ensemble against one reference functional.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// No battery monomial separated the ensemble from the reference.
    Consistent,
    /// At least one unflagged monomial differs beyond tolerance.
    Refuted,
    /// No clean witness, but some estimate was flagged as unreliable.
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Consistent => "consistent",
            Verdict::Refuted => "refuted",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

/// One monomial separating the ensemble from a reference functional.
#[derive(Debug, Clone, Serialize)]
pub struct Witness {
    pub monomial: Monomial,
    pub ensemble: f64,
    pub reference: f64,
}

/// Verdict for one reference law, with every witness that supports it.
#[derive(Debug, Clone, Serialize)]
pub struct FunctionalVerdict {
    pub law: ReferenceLaw,
    pub verdict: Verdict,
    pub witnesses: Vec<Witness>,
}

/// Ensemble and reference values for one battery monomial.
#[derive(Debug, Clone, Serialize)]
pub struct BatteryRow {
    pub monomial: Monomial,
    pub ensemble: f64,
    #[serde(serialize_with = "serialize_opt_rational")]
    pub ensemble_exact: Option<Rational64>,
    pub std_error: f64,
    pub flagged: bool,
    pub free: f64,
    pub classical: f64,
    pub half_independent: f64,
}

/// Battery comparison of one pattern's limit against all three references.
#[derive(Debug, Clone, Serialize)]
pub struct ClassificationReport {
    pub pattern: Pattern,
    pub tolerance: f64,
    pub rows: Vec<BatteryRow>,
    pub free: FunctionalVerdict,
    pub classical: FunctionalVerdict,
    pub half_independent: FunctionalVerdict,
    /// Scope reminder attached to every report: consistency on a finite
    /// battery is not a proof.
    pub note: String,
}

impl ClassificationReport {
    pub fn verdict(&self, law: ReferenceLaw) -> &FunctionalVerdict {
        match law {
            ReferenceLaw::FreeSemicircular => &self.free,
            ReferenceLaw::ClassicalGaussian => &self.classical,
            ReferenceLaw::HalfIndependentRayleigh => &self.half_independent,
        }
    }
}

/// The battery used when the caller does not supply one.
pub fn default_battery() -> Vec<Monomial> {
    [
        "1,2,1,2",
        "1,2,2,1",
        "1,2,3,1,2,3",
        "1,2,3,2,3,1",
        "1,2,3,3,1,2",
        "1,1,1,1",
    ]
    .iter()
    .map(|s| Monomial::parse(s).expect("battery monomials are valid"))
    .collect()
}

/// Compare a pattern's limiting moments against the three reference
/// functionals on a battery of monomials.
///
/// A monomial witnesses against a reference when its estimate is unflagged
/// and `|ensemble - reference| > max(tolerance, 3 * std_error)`. Any witness
/// refutes the law. Without one, a flagged battery row leaves the verdict
/// inconclusive (the flagged estimate might have been the separating one);
/// otherwise the law is consistent with the battery.
pub fn classify(
    pattern: Pattern,
    battery: &[Monomial],
    tolerance: f64,
    config: &LimitConfig,
) -> Result<ClassificationReport> {
    if !(tolerance >= 0.0 && tolerance.is_finite()) {
        return Err(Error::InvalidArgument(
            "classification tolerance must be finite and nonnegative".into(),
        ));
    }
    for q in battery {
        if q.len() % 2 != 0 {
            return Err(Error::InvalidMonomial(format!(
                "battery monomial {q} has odd length; its moment is trivially 0"
            )));
        }
        if !q.is_balanced() {
            return Err(Error::InvalidMonomial(format!(
                "battery monomial {q} has a color of odd multiplicity; its moment is trivially 0"
            )));
        }
    }
    let mut rows = Vec::with_capacity(battery.len());
    for q in battery {
        let ensemble = limit_joint_moment(pattern, q, config)?;
        rows.push(BatteryRow {
            monomial: q.clone(),
            ensemble: ensemble.value,
            ensemble_exact: ensemble.exact,
            std_error: ensemble.std_error,
            flagged: ensemble.flagged,
            free: free_semicircular_moment(q).value,
            classical: classical_gaussian_moment(q).value,
            half_independent: half_independent_rayleigh_moment(q).value,
        });
    }
    let any_flagged = rows.iter().any(|r| r.flagged);
    let judge = |law: ReferenceLaw| -> FunctionalVerdict {
        let witnesses: Vec<Witness> = rows
            .iter()
            .filter(|row| !row.flagged)
            .filter_map(|row| {
                let reference = match law {
                    ReferenceLaw::FreeSemicircular => row.free,
                    ReferenceLaw::ClassicalGaussian => row.classical,
                    ReferenceLaw::HalfIndependentRayleigh => row.half_independent,
                };
                let threshold = tolerance.max(3.0 * row.std_error);
                ((row.ensemble - reference).abs() > threshold).then(|| Witness {
                    monomial: row.monomial.clone(),
                    ensemble: row.ensemble,
                    reference,
                })
            })
            .collect();
        let verdict = if !witnesses.is_empty() {
            Verdict::Refuted
        } else if any_flagged {
            Verdict::Inconclusive
        } else {
            Verdict::Consistent
        };
        FunctionalVerdict {
            law,
            verdict,
            witnesses,
        }
    };
    let free = judge(ReferenceLaw::FreeSemicircular);
    let classical = judge(ReferenceLaw::ClassicalGaussian);
    let half_independent = judge(ReferenceLaw::HalfIndependentRayleigh);
    Ok(ClassificationReport {
        pattern,
        tolerance,
        rows,
        free,
        classical,
        half_independent,
        note: format!(
            "verdicts are scoped to the supplied battery of {} monomial(s); \
             a consistent verdict means no battery monomial separated the \
             ensemble from the reference, not a proof of that independence notion",
            battery.len()
        ),
    })
}
