//! Diagnosis and repair of SDPs that fail strict feasibility.
//!
//! The crate is organised bottom-up:
//!
//! - [`exactnum`]: exact arithmetic over ℚ and ℚ(√5), exact PSD tests and
//!   kernels, rational reconstruction of floats.
//! - [`sdp`]: pencil-based problem model and the JSON problem format.
//! - [`solver`]: a dense primal-dual interior-point method that reports
//!   pathological iterates instead of hiding them.
//! - [`facial`]: reducing certificates from the theorem of the alternative,
//!   implied linear constraints and their substitution.
//! - [`bell`]: the 2-party, 2-setting, 2-outcome moment-matrix problems.
//! - [`certify`]: exact checks of primal points and bound certificates.
//! - [`reproduce`]: end-to-end runs over the built-in problems.

pub mod exactnum;
pub mod sdp;
pub mod solver;
pub mod bell;
pub mod facial;
pub mod certify;
pub mod reproduce;
