//! Reversed-bracket partner equations.
//!
//! Given `[D − φ2][D − φ1]u = 0` with constant `γ`, the reversed product
//! `[D − φ1][D − φ2]u` equals
//!
//! ```text
//! u'' + γu' + (u·φ1' − u·φ2')·u' + φ1φ2·u
//! ```
//!
//! The middle term is a u-dependent friction. On solutions of the new inner
//! flow `u' = φ2·u` it becomes `(u·φ1' − u·φ2')·φ2·u`, which folds into the
//! nonlinearity and leaves a constant-`γ` partner
//!
//! ```text
//! F̃(u) = u·[ φ1φ2 + (u·φ1' − u·φ2')·φ2 ]
//! ```
//!
//! whose solutions include every solution of `u' = φ2·u`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::factorizer::{
    solve_scale_condition, FactorAnsatz, FactorizationPair, OdeSpec, CONDITION_TOL,
};
use crate::kinks::{solve_binomial_flow, solve_binomial_flow_formal, KinkBranch, KinkProfile};
use crate::powerpoly::{Exponent, PowerPoly};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartnerResult {
    pub partner: OdeSpec,
    /// `φ2` of the source: the partner kink solves `u' = φ2·u`.
    pub compatible_phi: PowerPoly,
    pub source: FactorizationPair,
}

impl PartnerResult {
    /// Kink of the partner's compatible flow. Fails when that flow has no
    /// real kink.
    pub fn kink(&self, shift: f64) -> Result<KinkProfile> {
        solve_binomial_flow(&self.compatible_phi, self.source.branch, shift, KinkBranch::Plus)
    }

    /// The partner kink, falling back to the formal magnitude profile.
    pub fn kink_or_formal(&self, shift: f64) -> Result<KinkProfile> {
        solve_binomial_flow_formal(&self.compatible_phi, self.source.branch, shift, KinkBranch::Plus)
    }
}

/// Builds the partner equation of `pair` by swapping the bracket order.
pub fn reverse_partner(pair: &FactorizationPair) -> Result<PartnerResult> {
    let r = pair.condition_residual();
    if r > CONDITION_TOL {
        return Err(Error::Inconsistent(format!(
            "source pair violates the constant-friction condition by {r}"
        )));
    }
    let (f1, f2) = (&pair.phi1, &pair.phi2);
    let friction_gap = &f1.u_deriv() - &f2.u_deriv();
    let reduced = &f1.mul(f2) + &friction_gap.mul(f2);
    Ok(PartnerResult {
        partner: OdeSpec::from_f_over_u(pair.gamma, &reduced),
        compatible_phi: f2.clone(),
        source: pair.clone(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolvableKind {
    /// `n = 0`: the templates are constant and the equation is linear.
    Linear,
    /// `n = −4`: the Milne–Pinney case; kinks are not generated for it.
    MilnePinney,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ObstructionStatus {
    Solvable { kind: SolvableKind },
    /// The matched velocity differs from the partner's; `mismatch` is
    /// `γ̃² − γ²`.
    Obstructed { mismatch: f64 },
    /// `n = −2` makes `h_n = 0` and the templates undefined.
    Degenerate,
}

/// Whether the Fisher partner `u(1 + u^{n/2})(1 − h_n⁴u^{n/2})` at its fixed
/// `γ = ±(h_n + 1/h_n)` admits a second factorization of the same type.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObstructionReport {
    pub n: i64,
    /// `h_n² = n/2 + 1`.
    pub h_squared: f64,
    /// `|γ|` of the partner, when `h_n` is real and nonzero.
    pub partner_gamma: Option<f64>,
    /// `|γ̃|` demanded by the second factorization, when real.
    pub reversed_gamma: Option<f64>,
    #[serde(flatten)]
    pub status: ObstructionStatus,
}

impl ObstructionReport {
    pub fn is_obstructed(&self) -> bool {
        matches!(self.status, ObstructionStatus::Obstructed { .. })
    }
}

/// Tries to factor the generalized-Fisher partner once more with
/// `φ̃1 = ã⁻¹(1 − h⁴u^{n/2})`, `φ̃2 = ã(1 + u^{n/2})`.
///
/// Coefficient matching gives `ã² = h⁶`, and the velocity condition
/// `ã + 1/ã = ±(h + 1/h)` squares to `H³ + H⁻³ = H + H⁻¹` with `H = h²`,
/// i.e. `(H² − 1)²(H² + 1) = 0`. The only integer solutions are `H = ±1`,
/// `n ∈ {0, −4}`.
pub fn second_reversal_check(n: i64) -> ObstructionReport {
    let hh = (n as f64 + 2.0) / 2.0;
    let partner_gamma = (hh > 0.0).then(|| hh.sqrt() + 1.0 / hh.sqrt());

    // Exercise the same coefficient matching used for first factorizations
    // whenever the templates have a positive exponent and a real scale.
    let reversed_gamma = if n > 0 && hh > 0.0 {
        let m = crate::factorizer::half_integer(n as u32);
        let ansatz = FactorAnsatz {
            p: PowerPoly::canonicalize([(Exponent::ZERO, 1.0), (m, -hh * hh)]),
            q: PowerPoly::canonicalize([(Exponent::ZERO, 1.0), (m, 1.0)]),
        };
        solve_scale_condition(&ansatz)
            .ok()
            .map(|pairs| pairs[0].gamma.abs())
    } else {
        None
    };

    let status = if (n + 2) * (n + 2) == 4 {
        ObstructionStatus::Solvable {
            kind: if n == 0 {
                SolvableKind::Linear
            } else {
                SolvableKind::MilnePinney
            },
        }
    } else if n == -2 {
        ObstructionStatus::Degenerate
    } else {
        let mismatch = hh.powi(3) + hh.powi(-3) - hh - 1.0 / hh;
        ObstructionStatus::Obstructed { mismatch }
    };

    ObstructionReport {
        n,
        h_squared: hh,
        partner_gamma,
        reversed_gamma,
        status,
    }
}
