//! Limiting joint moments of independent patterned random matrices.
//!
//! An `n x n` real symmetric random matrix is *patterned* when its entries are
//! constant on the level sets of a link function `L(i, j)`: Wigner, Toeplitz,
//! Hankel, reverse circulant and symmetric circulant matrices all arise this
//! way. For independent families of such matrices (one i.i.d. input sequence
//! per color, mean zero, variance one), the normalized expected trace of any
//! word in the matrices converges as `n -> infinity`, and the limit is a sum
//! of combinatorial contributions `p(w)` over colored pair-matched words `w`.
//!
//! The crate computes these limits three ways and cross-checks them:
//!
//! * exact circuit counting at finite `n` with extrapolation in `1/n`
//!   ([`count_circuits`], [`p_limit`]),
//! * closed forms where the pattern admits one (Catalan words, symmetric
//!   words, circulant structure),
//! * Monte Carlo volume integration of the linear constraint systems that
//!   the Toeplitz and Hankel links induce ([`mc_volume`]).
//!
//! On top of the word calculus sit the moment assembler
//! ([`limit_joint_moment`]), reference moment functionals for free,
//! classical and half independence, a classifier that compares an ensemble
//! against those references on a battery of monomials, and a direct matrix
//! simulator for Monte Carlo verification of the limits.

pub mod circuits;
pub mod error;
pub mod limits;
pub mod moments;
pub mod pattern;
pub mod simulate;
pub mod volume;
pub mod words;

pub use circuits::{count_circuits, count_colored_circuits, p_finite, Circuit, CircuitCount, CountMode};
pub use error::{Error, Result};
pub use limits::{
    closed_form_p, extrapolated_p, p_limit, Diagnostics, LimitConfig, Method, PEstimate,
};
pub use moments::{
    classical_gaussian_moment, classify, default_battery, free_semicircular_moment,
    half_independent_rayleigh_moment, limit_joint_moment, limit_joint_moment_with,
    simulate_half_independent_model, ClassificationReport, FunctionalVerdict, MomentValue,
    ReferenceLaw, Verdict, Witness,
};
pub use pattern::{build_matrix, InputDistribution, InputSequence, LinkValue, Pattern, PatternedMatrix};
pub use simulate::{
    fourth_moment_decay, replicate_seed, simulate_moment, trace_moment_replicate, DecayFit,
    SimulationStats,
};
pub use volume::mc_volume;
pub use words::{
    enumerate_colored_pair_matched, enumerate_pair_matched, noncrossing_pairings, ColoredWord,
    Monomial, SymmetryProfile, Word, MAX_WORD_LEN,
};
