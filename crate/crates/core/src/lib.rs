//! Construction and numerical verification of mean curvature flow
//! self-expanders, `H = ½⟨F, ν⟩`, with emphasis on hypersurfaces that are
//! asymptotic to round cones.
//!
//! The crate is `no_std` (it needs `alloc`). File formats, the command line
//! and everything else touching the outside world live in `expander-cli`.
//!
//! Modules, bottom-up:
//!
//! - [`cone`]: closed-form geometry of the round cone `C_α` and of
//!   hyperspherical charts of `S^{n-1}`.
//! - [`surface`]: finite-difference extrinsic geometry of sampled parametric
//!   patches (fundamental forms, normal, `H`, `|A|²`, gradient,
//!   Laplace–Beltrami, the stability operator).
//! - [`conegraph`]: closed-form geometry of normal graphs over `C_α` and
//!   annulus-by-annulus asymptotics reports.
//! - [`profiles`]: the O(n)-invariant reduction of the expander equation,
//!   an adaptive Dormand–Prince integrator, shooting and critical-angle search.
//! - [`verify`]: residual checks of the expander identities, variation
//!   formulas, quotient identity and the maximum-principle certificate.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod cone;
pub mod conegraph;
mod error;
pub mod linalg;
pub(crate) mod math;
pub mod profiles;
pub mod surface;
pub mod verify;

pub use error::{Error, Result};
