//! Factorization of second-order ODEs `u'' + γu' + F(u) = 0` with polynomial
//! nonlinearities into first-order brackets `[D − φ2][D − φ1]u = 0`.
//!
//! The factorization fixes the admissible velocity `γ` and yields kinks from
//! the compatible flow `u' = φ1·u`. Swapping the brackets produces a partner
//! equation with a different nonlinearity whose kink travels at the same `γ`.
//! Everything is checked numerically by [`verify`]: closed-form residuals, RK4
//! integration and an explicit reaction-diffusion solver.
//!
//! ```
//! use kinkpair::{pipeline::{run_preset, RunOptions}, presets::Preset};
//!
//! let run = run_preset(&Preset::Mt6, &RunOptions::default()).unwrap();
//! assert!((run.pair.gamma - 2.5).abs() < 1e-12);
//! assert!(run.passed());
//! ```
//!
//! The `parallel` feature (on by default) runs grid sweeps and the PDE stepper
//! on rayon. Results are bitwise identical to [`exec::Execution::Sequential`].

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod exec;
pub mod factorizer;
pub mod figures;
pub mod kinks;
pub mod pipeline;
pub mod powerpoly;
pub mod presets;
pub mod susy;
pub mod verify;

pub use error::{Error, Result};
pub use exec::Execution;
pub use factorizer::{FactorAnsatz, FactorizationPair, Family, GammaSign, OdeSpec};
pub use kinks::{KinkBranch, KinkProfile, Realization};
pub use powerpoly::{Exponent, PowerPoly};
pub use presets::Preset;
pub use susy::PartnerResult;
