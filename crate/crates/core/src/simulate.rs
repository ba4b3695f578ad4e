//! Monte Carlo verification by direct matrix simulation.
//!
//! One replicate draws an independent input sequence per distinct color,
//! builds the corresponding patterned matrices, and evaluates the normalized
//! trace `n^-(1 + k/2) * Tr(X_{c_1} ... X_{c_k})`. Replicate means converge
//! to the limiting joint moment, and the fourth central moment of the
//! replicate values decays like `n^-2`, which [`fourth_moment_decay`] checks
//! through a log-log fit.

use ndarray::Array2;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::limits::fit_line;
use crate::pattern::{build_matrix, InputDistribution, InputSequence, Pattern};
use crate::words::Monomial;

/// Replicate-level summary of a simulation run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationStats {
    /// `None` for model simulations that are not tied to a matrix pattern
    /// (the 2x2 half-independence model).
    pub pattern: Option<Pattern>,
    pub monomial: Monomial,
    pub n: u32,
    pub reps: u64,
    /// `None` when the model fixes its own input law.
    pub distribution: Option<InputDistribution>,
    pub seed: u64,
    /// One normalized trace per replicate, in replicate order.
    pub per_replicate: Vec<f64>,
    pub mean: f64,
    /// Standard error of the mean.
    pub std_error: f64,
}

impl SimulationStats {
    pub(crate) fn summarize(
        pattern: Option<Pattern>,
        monomial: Monomial,
        n: u32,
        distribution: Option<InputDistribution>,
        seed: u64,
        per_replicate: Vec<f64>,
    ) -> SimulationStats {
        let reps = per_replicate.len() as u64;
        let m = reps as f64;
        let mean = per_replicate.iter().sum::<f64>() / m;
        let variance = if reps > 1 {
            per_replicate
                .iter()
                .map(|v| (v - mean) * (v - mean))
                .sum::<f64>()
                / (m - 1.0)
        } else {
            0.0
        };
        SimulationStats {
            pattern,
            monomial,
            n,
            reps,
            distribution,
            seed,
            per_replicate,
            mean,
            std_error: (variance / m).sqrt(),
        }
    }
}

/// Log-log decay fit of the fourth central moment of replicate traces.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayFit {
    pub pattern: Pattern,
    pub monomial: Monomial,
    pub n_grid: Vec<u32>,
    /// `E|trace - mean|^4` estimate at each grid dimension.
    pub fourth_moment_estimates: Vec<f64>,
    /// Least squares slope of log(estimate) against log(n); `None` when the
    /// fit degenerates.
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    /// Why the fit could not be made, when it could not.
    pub fit_error: Option<String>,
    pub reps: u64,
    pub seed: u64,
}

/// Splitmix64: the standard 64-bit mixing step, used to derive independent
/// stream seeds from a master seed.
fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E3779B97F4A7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Stateless per-(replicate, color) seed: a splitmix chain over the master
/// seed, the replicate index and the color. Identical inputs give identical
/// seeds regardless of execution order, which is what makes parallel
/// replicates bit-reproducible.
pub fn replicate_seed(master: u64, replicate: u64, color: u32) -> u64 {
    let a = splitmix64(master);
    let b = splitmix64(a ^ replicate);
    splitmix64(b ^ u64::from(color))
}

/// Derived master seed for an auxiliary stream (per-dimension streams of the
/// decay test).
fn stream_seed(master: u64, stream: u64) -> u64 {
    splitmix64(splitmix64(master ^ 0xA0761D6478BD642F) ^ stream)
}

/// One realization of the normalized trace of the monomial product:
/// `n^-(1 + k/2) * Tr(X_{c_1} ... X_{c_k})`, with one prebuilt input
/// sequence per distinct color.
pub fn trace_moment_replicate(
    pattern: Pattern,
    q: &Monomial,
    n: u32,
    inputs: &BTreeMap<u32, InputSequence>,
) -> Result<f64> {
    if n < 2 {
        return Err(Error::DimensionTooSmall {
            n,
            reason: "simulation needs n >= 2".into(),
        });
    }
    let mut matrices: BTreeMap<u32, Array2<f64>> = BTreeMap::new();
    for color in q.color_multiplicities().keys() {
        let input = inputs.get(color).ok_or_else(|| {
            Error::InvalidArgument(format!("no input sequence supplied for color {color}"))
        })?;
        matrices.insert(*color, build_matrix(pattern, n, input)?.as_array().clone());
    }
    let colors = q.colors();
    let k = colors.len();
    let trace = if k == 1 {
        matrices[&colors[0]].diag().sum()
    } else {
        // Multiply the first k-1 factors, then contract with the last one:
        // Tr(P A) = sum_ij P_ij A_ij for symmetric A.
        let mut product = matrices[&colors[0]].clone();
        for c in &colors[1..k - 1] {
            product = product.dot(&matrices[c]);
        }
        let last = &matrices[&colors[k - 1]];
        product
            .iter()
            .zip(last.iter())
            .map(|(p, a)| p * a)
            .sum()
    };
    let scale = (n as f64).powf(1.0 + k as f64 / 2.0);
    Ok(trace / scale)
}

/// `reps` independent replicates of [`trace_moment_replicate`], with input
/// sequences seeded by [`replicate_seed`] from the master seed. Replicates
/// are evaluated in parallel but summarized in replicate order, so results
/// are bit-identical for identical arguments regardless of thread schedule.
pub fn simulate_moment(
    pattern: Pattern,
    q: &Monomial,
    n: u32,
    reps: u64,
    distribution: InputDistribution,
    seed: u64,
) -> Result<SimulationStats> {
    if reps < 2 {
        return Err(Error::InvalidArgument(
            "simulate_moment needs reps >= 2".into(),
        ));
    }
    let colors: Vec<u32> = q.color_multiplicities().keys().copied().collect();
    let per_replicate: Vec<f64> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut inputs = BTreeMap::new();
            for c in &colors {
                let input =
                    InputSequence::generate(pattern, n, distribution, replicate_seed(seed, r, *c))?;
                inputs.insert(*c, input);
            }
            trace_moment_replicate(pattern, q, n, &inputs)
        })
        .collect::<Result<_>>()?;
    Ok(SimulationStats::summarize(
        Some(pattern),
        q.clone(),
        n,
        Some(distribution),
        seed,
        per_replicate,
    ))
}

/// Estimate the fourth central moment of the replicate trace at each grid
/// dimension and fit its log-log decay rate. The population mean is proxied
/// by the replicate sample mean, which costs only a lower-order term.
pub fn fourth_moment_decay(
    pattern: Pattern,
    q: &Monomial,
    n_grid: &[u32],
    reps: u64,
    distribution: InputDistribution,
    seed: u64,
) -> Result<DecayFit> {
    if n_grid.len() < 3 {
        return Err(Error::InvalidArgument(
            "decay fit needs at least three grid dimensions".into(),
        ));
    }
    if !n_grid.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::InvalidArgument(
            "decay grid must be strictly increasing".into(),
        ));
    }
    if reps < 50 {
        return Err(Error::InvalidArgument(
            "decay fit needs reps >= 50 for a usable fourth-moment estimate".into(),
        ));
    }
    let mut estimates = Vec::with_capacity(n_grid.len());
    for (idx, n) in n_grid.iter().enumerate() {
        let stats = simulate_moment(
            pattern,
            q,
            *n,
            reps,
            distribution,
            stream_seed(seed, idx as u64),
        )?;
        let mean = stats.mean;
        let fourth = stats
            .per_replicate
            .iter()
            .map(|v| {
                let d = v - mean;
                d * d * d * d
            })
            .sum::<f64>()
            / stats.reps as f64;
        estimates.push(fourth);
    }
    let (slope, intercept, fit_error) = if estimates.iter().any(|e| *e <= 0.0) {
        (
            None,
            None,
            Some("fourth-moment estimate vanished (all replicates equal); log fit undefined".into()),
        )
    } else {
        let points: Vec<(f64, f64)> = n_grid
            .iter()
            .zip(&estimates)
            .map(|(n, e)| ((*n as f64).ln(), e.ln()))
            .collect();
        let fit = fit_line(&points);
        (Some(fit.slope), Some(fit.intercept), None)
    };
    Ok(DecayFit {
        pattern,
        monomial: q.clone(),
        n_grid: n_grid.to_vec(),
        fourth_moment_estimates: estimates,
        slope,
        intercept,
        fit_error,
        reps,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn monomial(s: &str) -> Monomial {
        Monomial::parse(s).unwrap()
    }

    #[test]
    fn replicate_seeds_are_stable_and_spread() {
        assert_eq!(replicate_seed(1, 2, 3), replicate_seed(1, 2, 3));
        let mut seeds = std::collections::HashSet::new();
        for r in 0..50u64 {
            for c in 1..=4u32 {
                seeds.insert(replicate_seed(7, r, c));
            }
        }
        assert_eq!(seeds.len(), 200, "derived seeds should not collide");
    }

    #[test]
    fn second_moment_of_every_pattern_is_one() {
        // alpha((1,1)) = p(aa) = 1 for all patterns; n = 150 with a few
        // replicates sits well within 3 standard errors.
        let q = monomial("1,1");
        for pattern in Pattern::ALL {
            let stats =
                simulate_moment(pattern, &q, 150, 40, InputDistribution::Rademacher, 5).unwrap();
            assert!(
                (stats.mean - 1.0).abs() < 3.0 * stats.std_error + 0.02,
                "{pattern}: mean = {}, se = {}",
                stats.mean,
                stats.std_error
            );
        }
    }

    #[test]
    fn odd_monomials_average_to_zero() {
        let q = monomial("1");
        let stats = simulate_moment(
            Pattern::Wigner,
            &q,
            100,
            60,
            InputDistribution::StandardGaussian,
            9,
        )
        .unwrap();
        assert!(stats.mean.abs() < 3.0 * stats.std_error + 0.01);
    }

    #[test]
    fn simulation_is_bit_reproducible() {
        let q = monomial("1,2,1,2");
        let a = simulate_moment(Pattern::Toeplitz, &q, 60, 12, InputDistribution::Rademacher, 42)
            .unwrap();
        let b = simulate_moment(Pattern::Toeplitz, &q, 60, 12, InputDistribution::Rademacher, 42)
            .unwrap();
        assert_eq!(a, b);
        let c = simulate_moment(Pattern::Toeplitz, &q, 60, 12, InputDistribution::Rademacher, 43)
            .unwrap();
        assert_ne!(a.per_replicate, c.per_replicate);
    }

    #[test]
    fn trace_replicate_validates_inputs() {
        let q = monomial("1,2");
        let mut inputs = BTreeMap::new();
        inputs.insert(
            1,
            InputSequence::generate(Pattern::Wigner, 10, InputDistribution::Rademacher, 1).unwrap(),
        );
        // Missing color 2.
        assert!(trace_moment_replicate(Pattern::Wigner, &q, 10, &inputs).is_err());
        // Dimension too small.
        assert!(matches!(
            trace_moment_replicate(Pattern::Wigner, &q, 1, &inputs),
            Err(Error::DimensionTooSmall { .. })
        ));
        inputs.insert(
            2,
            InputSequence::generate(Pattern::Wigner, 10, InputDistribution::Rademacher, 2).unwrap(),
        );
        assert!(trace_moment_replicate(Pattern::Wigner, &q, 10, &inputs).is_ok());
    }

    #[test]
    fn simulate_moment_validates_arguments() {
        let q = monomial("1,1");
        assert!(simulate_moment(Pattern::Wigner, &q, 50, 1, InputDistribution::Rademacher, 1)
            .is_err());
    }

    #[test]
    fn decay_arguments_are_validated() {
        let q = monomial("1,1");
        let dist = InputDistribution::Rademacher;
        assert!(fourth_moment_decay(Pattern::Wigner, &q, &[16, 32], 60, dist, 1).is_err());
        assert!(fourth_moment_decay(Pattern::Wigner, &q, &[32, 16, 64], 60, dist, 1).is_err());
        assert!(fourth_moment_decay(Pattern::Wigner, &q, &[16, 32, 64], 10, dist, 1).is_err());
    }

    #[test]
    fn second_moment_fourth_central_moment_shrinks_with_n() {
        let q = monomial("1,1");
        let fit = fourth_moment_decay(
            Pattern::Wigner,
            &q,
            &[16, 32, 64],
            80,
            InputDistribution::StandardGaussian,
            3,
        )
        .unwrap();
        assert_eq!(fit.fourth_moment_estimates.len(), 3);
        assert!(fit.fourth_moment_estimates.iter().all(|e| *e >= 0.0));
        let first = fit.fourth_moment_estimates[0];
        let last = fit.fourth_moment_estimates[2];
        assert!(last < first, "fourth moment should shrink: {first} -> {last}");
        assert!(fit.slope.unwrap() < 0.0);
    }

    #[test]
    fn degenerate_replicates_report_a_fit_error() {
        // Rademacher entries square to 1, so Tr(X^2)/n^2 is identically 1 for
        // the full Wigner pattern: every replicate is equal and the fourth
        // central moment vanishes. The fit must report that, not panic.
        let q = monomial("1,1");
        let fit = fourth_moment_decay(
            Pattern::Wigner,
            &q,
            &[16, 32, 64],
            60,
            InputDistribution::Rademacher,
            3,
        )
        .unwrap();
        assert!(fit.fourth_moment_estimates.iter().all(|e| *e == 0.0));
        assert_eq!(fit.slope, None);
        assert_eq!(fit.intercept, None);
        assert!(fit.fit_error.is_some());
    }
}
