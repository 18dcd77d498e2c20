//! Smallest singular value functions of polynomial matrices.
//!
//! For a polynomial matrix `F: Rⁿ → R^{p×q}` with `p ≤ q`, the function
//! `f(x) = σ_min(F(x))` satisfies a nonsmooth Łojasiewicz gradient
//! inequality with an explicit exponent. This crate evaluates `f`, estimates
//! its nonsmooth slope, computes the explicit exponents exactly and checks
//! the resulting inequalities empirically on user-supplied matrices.

pub mod cli;
pub mod error;
pub mod exponents;
pub mod numlin;
pub mod poly;
pub mod polymatrix;
pub mod sampling;
pub mod subdiff;
pub mod verify;

pub use error::{Error, Result};
pub use exponents::{ExponentBound, ExponentKind, ExponentTable};
pub use poly::{parse_polynomial, Monomial, Polynomial};
pub use polymatrix::PolyMatrix;
pub use subdiff::{AuxiliarySetup, MinimizerSet, SlopeEstimate, SlopeOptions};
pub use verify::{SamplePlan, VerificationReport, Verdict};
