//! Limits of normalized circuit counts: `p(w) = lim count / n^(k/2 + 1)`.
//!
//! Every pattern sends Catalan words to 1. Beyond that, the patterns split:
//! Wigner kills everything else; symmetric circulant sends every pair-matched
//! word to 1; reverse circulant keeps exactly the symmetric words; Hankel
//! kills nonsymmetric words and needs numerics for symmetric non-Catalan
//! ones; Toeplitz needs numerics for every non-Catalan word. The numeric
//! path evaluates exact counts on a dimension grid and extrapolates the
//! `a + b/n` trend.

use num_rational::Rational64;
use serde::{Serialize, Serializer};

use crate::circuits::{p_finite, CountMode};
use crate::error::{Error, Result};
use crate::pattern::Pattern;
use crate::words::Word;

/// How a [`PEstimate`] was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    Extrapolation,
    McVolume,
}

impl Method {
    /// Stable snake_case name, matching the serialized form.
    pub fn name(self) -> &'static str {
        match self {
            Method::ClosedForm => "closed_form",
            Method::Extrapolation => "extrapolation",
            Method::McVolume => "mc_volume",
        }
    }
}

/// Method-specific evidence attached to an estimate.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Diagnostics {
    /// Which dispatch rule produced the exact value.
    ClosedForm { rule: &'static str },
    /// Grid data and fit quality for the `a + b/n` extrapolation.
    Extrapolation {
        n_grid: Vec<u32>,
        p_values: Vec<f64>,
        mode: CountMode,
        fit_points: usize,
        slope: f64,
        /// Residual RMS per degree of freedom of the linear fit.
        residual: f64,
    },
    /// Sample count and constraint-system size for Monte Carlo volumes.
    McVolume {
        samples: u64,
        /// Sign assignments whose closure constraint holds identically.
        retained: usize,
        /// All candidate sign assignments.
        candidates: usize,
        seed: u64,
    },
}

/// An estimate of a limit value, with provenance and uncertainty.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PEstimate {
    /// Best estimate; always nonnegative.
    pub value: f64,
    /// Present when the value is exact (closed forms, and volumes that
    /// degenerate to exactly 0 or 1).
    #[serde(serialize_with = "serialize_opt_rational")]
    pub exact: Option<Rational64>,
    pub method: Method,
    /// Zero for exact values; intercept standard error for extrapolation;
    /// sampling standard error for Monte Carlo.
    pub std_error: f64,
    /// Set when the method's own quality check failed; flagged values should
    /// not be trusted silently.
    pub flagged: bool,
    pub diagnostics: Diagnostics,
}

impl PEstimate {
    pub(crate) fn closed(value: Rational64, rule: &'static str) -> PEstimate {
        PEstimate {
            value: *value.numer() as f64 / *value.denom() as f64,
            exact: Some(value),
            method: Method::ClosedForm,
            std_error: 0.0,
            flagged: false,
            diagnostics: Diagnostics::ClosedForm { rule },
        }
    }
}

pub(crate) fn serialize_opt_rational<S: Serializer>(
    r: &Option<Rational64>,
    serializer: S,
) -> std::result::Result<S::Ok, S::Error> {
    match r {
        Some(r) => serializer.serialize_some(&format!("{r}")),
        None => serializer.serialize_none(),
    }
}

/// Configuration for the numeric limit path.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitConfig {
    /// Dimensions at which exact counts are evaluated; strictly increasing,
    /// at least three entries, each at least 2.
    pub n_grid: Vec<u32>,
    /// Matching semantics for the exact counts; `None` picks strict for
    /// words up to length 6 and relaxed above (strict's pairwise exclusion
    /// costs more per node, and both converge to the same limit).
    pub mode: Option<CountMode>,
    /// Fit residual above which the estimate is flagged.
    pub residual_tolerance: f64,
}

impl Default for LimitConfig {
    fn default() -> LimitConfig {
        LimitConfig {
            n_grid: vec![16, 32, 64, 128],
            mode: None,
            residual_tolerance: 5e-3,
        }
    }
}

impl LimitConfig {
    /// Check the grid shape once up front; extrapolation calls this too.
    pub fn validate(&self) -> Result<()> {
        if self.n_grid.len() < FIT_POINTS {
            return Err(Error::InvalidArgument(format!(
                "dimension grid needs at least {FIT_POINTS} points, got {}",
                self.n_grid.len()
            )));
        }
        if self.n_grid[0] < 2 {
            return Err(Error::InvalidArgument(
                "dimension grid entries must be at least 2".into(),
            ));
        }
        if !self.n_grid.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidArgument(
                "dimension grid must be strictly increasing".into(),
            ));
        }
        Ok(())
    }
}

/// Number of trailing grid points used by the linear fit.
const FIT_POINTS: usize = 3;

/// Exact limit value when the pattern admits one for this word, with the
/// name of the rule that fired. `None` means the limit needs numerics.
pub fn closed_form_p(pattern: Pattern, word: &Word) -> Option<(Rational64, &'static str)> {
    if !word.is_pair_matched() {
        return None;
    }
    let one = Rational64::from_integer(1);
    let zero = Rational64::from_integer(0);
    match pattern {
        Pattern::Wigner => {
            if word.is_catalan() {
                Some((one, "wigner: catalan word"))
            } else {
                Some((zero, "wigner: non-catalan word"))
            }
        }
        Pattern::SymmetricCirculant => Some((one, "symmetric circulant: every pair-matched word")),
        Pattern::ReverseCirculant => {
            if word.is_symmetric() {
                Some((one, "reverse circulant: symmetric word"))
            } else {
                Some((zero, "reverse circulant: nonsymmetric word"))
            }
        }
        Pattern::Hankel => {
            if !word.is_symmetric() {
                Some((zero, "hankel: nonsymmetric word"))
            } else if word.is_catalan() {
                Some((one, "hankel: catalan word"))
            } else {
                None
            }
        }
        Pattern::Toeplitz => {
            if word.is_catalan() {
                Some((one, "toeplitz: catalan word"))
            } else {
                None
            }
        }
    }
}

/// Limit of the normalized count for a pair-matched word: closed form when
/// available, otherwise grid extrapolation under `config`.
pub fn p_limit(pattern: Pattern, word: &Word, config: &LimitConfig) -> Result<PEstimate> {
    if !word.is_pair_matched() {
        return Err(Error::NotPairMatched(word.to_string()));
    }
    if let Some((value, rule)) = closed_form_p(pattern, word) {
        return Ok(PEstimate::closed(value, rule));
    }
    extrapolated_p(pattern, word, config)
}

/// Numeric limit: exact normalized counts on `config.n_grid`, then a least
/// squares fit of `p = a + b/n` through the last [`FIT_POINTS`] grid points.
/// The estimate is flagged when the fit residual exceeds the configured
/// tolerance.
pub fn extrapolated_p(pattern: Pattern, word: &Word, config: &LimitConfig) -> Result<PEstimate> {
    if !word.is_pair_matched() {
        return Err(Error::NotPairMatched(word.to_string()));
    }
    config.validate()?;
    let mode = config.mode.unwrap_or(if word.len() <= 6 {
        CountMode::Strict
    } else {
        CountMode::Relaxed
    });
    let p_values: Vec<f64> = config
        .n_grid
        .iter()
        .map(|n| p_finite(pattern, word, *n, mode))
        .collect::<Result<_>>()?;
    let tail = &config.n_grid[config.n_grid.len() - FIT_POINTS..];
    let tail_p = &p_values[p_values.len() - FIT_POINTS..];
    let points: Vec<(f64, f64)> = tail
        .iter()
        .zip(tail_p)
        .map(|(n, p)| (1.0 / *n as f64, *p))
        .collect();
    let fit = fit_line(&points);
    let flagged = fit.residual > config.residual_tolerance;
    Ok(PEstimate {
        value: fit.intercept.max(0.0),
        exact: None,
        method: Method::Extrapolation,
        std_error: fit.intercept_se,
        flagged,
        diagnostics: Diagnostics::Extrapolation {
            n_grid: config.n_grid.clone(),
            p_values,
            mode,
            fit_points: FIT_POINTS,
            slope: fit.slope,
            residual: fit.residual,
        },
    })
}

pub(crate) struct LineFit {
    pub intercept: f64,
    pub slope: f64,
    /// sqrt(SSE / (m - 2)): residual RMS per degree of freedom.
    pub residual: f64,
    pub intercept_se: f64,
}

/// Ordinary least squares for `y = intercept + slope * x` over at least
/// three points.
pub(crate) fn fit_line(points: &[(f64, f64)]) -> LineFit {
    let m = points.len() as f64;
    let mean_x = points.iter().map(|(x, _)| x).sum::<f64>() / m;
    let mean_y = points.iter().map(|(_, y)| y).sum::<f64>() / m;
    let sxx: f64 = points.iter().map(|(x, _)| (x - mean_x) * (x - mean_x)).sum();
    let sxy: f64 = points
        .iter()
        .map(|(x, y)| (x - mean_x) * (y - mean_y))
        .sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let sse: f64 = points
        .iter()
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    let dof = (points.len() - 2).max(1) as f64;
    let sigma = (sse / dof).sqrt();
    let intercept_se = sigma * (1.0 / m + mean_x * mean_x / sxx).sqrt();
    LineFit {
        intercept,
        slope,
        residual: sigma,
        intercept_se,
    }
}
