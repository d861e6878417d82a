//! Closed-form kinks of the first-order flows `u' = φ(u)·u` with binomial
//! `φ(u) = β(λ − u^m)`.
//!
//! With `w = u^m` the flow is logistic, `w' = mβ w(λ − w)`, so
//!
//! ```text
//! u(ξ) = ( λ / (1 ± e^{r(ξ − ξ0)}) )^{1/m},   r = −mβλ = −m·φ(0)
//! ```
//!
//! The integration constant is absorbed into `ξ0`. A negative `λ` puts the
//! second fixed point at `u^m = λ < 0`; that state is real only when `m = p/q`
//! with both `p` and `q` odd, in which case the kink is the reflection
//! `u = −(|λ| / (1 ± e^{r(ξ−ξ0)}))^{1/m}`. Otherwise no real kink exists and
//! only the formal magnitude profile (the `(−1)^{1/m}` prefactor dropped) is
//! available for display.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::factorizer::{FactorizationPair, GammaSign};
use crate::powerpoly::{pow, Exponent, PowerPoly};

/// Sign in the denominator `1 ± e^{r(ξ−ξ0)}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum KinkBranch {
    /// Globally defined, `tanh` form.
    Plus,
    /// Singular at `ξ0`, `coth` form.
    Minus,
}

/// How the closed form relates to a real solution of the flow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Realization {
    /// `u = (λ/(1 ± e))^{1/m}` with `λ > 0`.
    Real,
    /// `u = −(|λ|/(1 ± e))^{1/m}`, the real odd-root branch for `λ < 0`.
    Reflected,
    /// Magnitude of a solution that carries a non-real `(−1)^{1/m}` factor.
    /// It does not solve the flow over the reals.
    Formal,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KinkProfile {
    /// `|λ|`.
    pub amplitude: f64,
    /// `r` in `e^{r(ξ−ξ0)}`.
    pub rate: f64,
    /// `1/m`.
    pub inv_exponent: Exponent,
    /// `ξ0`.
    pub shift: f64,
    pub branch: KinkBranch,
    pub gamma_sign: GammaSign,
    pub realization: Realization,
}

/// `u`, `u'`, `u''` at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KinkState {
    pub u: f64,
    pub du: f64,
    pub d2u: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Hyperbolic {
    Tanh,
    Coth,
}

/// `u = prefactor · (½ − ½·T(half_rate·(ξ − ξ0)))^power`, `T` = tanh or coth.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HyperbolicForm {
    pub prefactor: f64,
    pub function: Hyperbolic,
    pub half_rate: f64,
    pub shift: f64,
    pub power: Exponent,
}

impl HyperbolicForm {
    pub fn eval(&self, xi: f64) -> f64 {
        let x = self.half_rate * (xi - self.shift);
        let t = match self.function {
            Hyperbolic::Tanh => x.tanh(),
            Hyperbolic::Coth => 1.0 / x.tanh(),
        };
        self.prefactor * (0.5 - 0.5 * t).powf(self.power.value())
    }
}

fn odd(k: i64) -> bool {
    k.rem_euclid(2) == 1
}

/// Splits a binomial `c0 + c1·u^m` (`m > 0`) into `(c0, c1, m)`.
pub(crate) fn binomial_parts(phi: &PowerPoly) -> Result<(f64, f64, Exponent)> {
    match phi.terms() {
        [(e0, c0), (m, c1)] if e0.is_zero() => Ok((*c0, *c1, *m)),
        _ => Err(Error::Unsupported(format!(
            "flow factor {phi} is not of the form β(λ − u^m) with m > 0"
        ))),
    }
}

/// The nonzero fixed point `u*` of `u' = φ(u)u` for binomial `φ`, when real.
pub fn flow_fixed_point(phi: &PowerPoly) -> Result<f64> {
    let (c0, c1, m) = binomial_parts(phi)?;
    let lambda = -c0 / c1;
    let q = m.recip()?;
    if lambda > 0.0 {
        Ok(lambda.powf(q.value()))
    } else if odd(m.numer()) && odd(m.denom()) {
        Ok(-(-lambda).powf(q.value()))
    } else {
        Err(Error::NoRealKink(format!(
            "u^{{{m}}} = {lambda} has no real root"
        )))
    }
}

fn solve_flow(
    phi: &PowerPoly,
    gamma_sign: GammaSign,
    shift: f64,
    branch: KinkBranch,
    allow_formal: bool,
) -> Result<KinkProfile> {
    let (c0, c1, m) = binomial_parts(phi)?;
    let lambda = -c0 / c1;
    if lambda == 0.0 || !lambda.is_finite() {
        return Err(Error::Unsupported(format!(
            "flow factor {phi} has λ = {lambda}; no kink between distinct fixed points"
        )));
    }
    let realization = if lambda > 0.0 {
        Realization::Real
    } else if odd(m.numer()) && odd(m.denom()) {
        Realization::Reflected
    } else if allow_formal {
        Realization::Formal
    } else {
        return Err(Error::NoRealKink(format!(
            "flow u' = ({phi})u: λ = {lambda} < 0 and u^{{{m}}} has no real negative branch"
        )));
    };
    Ok(KinkProfile {
        amplitude: lambda.abs(),
        rate: -m.value() * c0,
        inv_exponent: m.recip()?,
        shift,
        branch,
        gamma_sign,
        realization,
    })
}

/// Integrates `u' = φ(u)·u` for `φ = β(λ − u^m)` in closed form.
///
/// Fails with [`Error::NoRealKink`] when `λ < 0` and `u^m` has no real
/// negative branch; see [`solve_binomial_flow_formal`] for that case.
pub fn solve_binomial_flow(
    phi: &PowerPoly,
    gamma_sign: GammaSign,
    shift: f64,
    branch: KinkBranch,
) -> Result<KinkProfile> {
    solve_flow(phi, gamma_sign, shift, branch, false)
}

/// Like [`solve_binomial_flow`], but returns the magnitude profile with
/// [`Realization::Formal`] instead of failing when no real kink exists.
pub fn solve_binomial_flow_formal(
    phi: &PowerPoly,
    gamma_sign: GammaSign,
    shift: f64,
    branch: KinkBranch,
) -> Result<KinkProfile> {
    solve_flow(phi, gamma_sign, shift, branch, true)
}

/// Kink of the compatible flow `u' = φ1·u` of a factorization.
pub fn kink_for_pair(pair: &FactorizationPair, shift: f64) -> Result<KinkProfile> {
    solve_binomial_flow(&pair.phi1, pair.branch, shift, KinkBranch::Plus)
}

impl KinkProfile {
    fn sign(&self) -> f64 {
        match self.realization {
            Realization::Reflected => -1.0,
            Realization::Real | Realization::Formal => 1.0,
        }
    }

    /// `1/|rate|`.
    pub fn natural_width(&self) -> f64 {
        1.0 / self.rate.abs()
    }

    /// The nonzero asymptote `±|λ|^{1/m}`.
    pub fn upper_state(&self) -> f64 {
        self.sign() * self.amplitude.powf(self.inv_exponent.value())
    }

    /// `(u(−∞), u(+∞))` for the plus branch.
    pub fn asymptotes(&self) -> (f64, f64) {
        if self.rate > 0.0 {
            (self.upper_state(), 0.0)
        } else {
            (0.0, self.upper_state())
        }
    }

    /// Value, slope and curvature from the closed form.
    ///
    /// With `g = ±e^x/(1 ± e^x)` (`x = r(ξ−ξ0)`, `q = 1/m`):
    /// `u' = −r·q·u·g` and `u'' = r²·q·u·g·((q+1)g − 1)`.
    pub fn eval(&self, xi: f64) -> Result<KinkState> {
        let x = self.rate * (xi - self.shift);
        // core = 1/(1 ± e^x), g = 1 − core
        let (core, g) = match self.branch {
            KinkBranch::Plus => {
                if x > 0.0 {
                    let e = (-x).exp();
                    (e / (1.0 + e), 1.0 / (1.0 + e))
                } else {
                    let e = x.exp();
                    (1.0 / (1.0 + e), e / (1.0 + e))
                }
            }
            KinkBranch::Minus => {
                if !(x < 0.0) {
                    return Err(Error::Domain(format!(
                        "coth-branch kink is real only for r(ξ − ξ0) < 0; got {x} at ξ = {xi}"
                    )));
                }
                let e = x.exp();
                let d = -(x.exp_m1());
                (1.0 / d, -e / d)
            }
        };
        let q = self.inv_exponent.value();
        let base = self.amplitude * core;
        let u = if base == 0.0 {
            0.0
        } else if self.inv_exponent.is_integer() {
            self.sign() * pow(base, self.inv_exponent)?
        } else {
            self.sign() * (q * base.ln()).exp()
        };
        let r = self.rate;
        Ok(KinkState {
            u,
            du: -r * q * u * g,
            d2u: r * r * q * u * g * ((q + 1.0) * g - 1.0),
        })
    }

    pub fn value(&self, xi: f64) -> Result<f64> {
        self.eval(xi).map(|s| s.u)
    }

    /// Same profile in `½ ∓ ½ tanh` / `coth` form.
    pub fn to_hyperbolic(&self) -> HyperbolicForm {
        HyperbolicForm {
            prefactor: self.upper_state(),
            function: match self.branch {
                KinkBranch::Plus => Hyperbolic::Tanh,
                KinkBranch::Minus => Hyperbolic::Coth,
            },
            half_rate: self.rate / 2.0,
            shift: self.shift,
            power: self.inv_exponent,
        }
    }

    /// The opposite-γ kink: `ξ − ξ0` negated.
    pub fn mirrored(&self) -> KinkProfile {
        KinkProfile {
            rate: -self.rate,
            gamma_sign: self.gamma_sign.flipped(),
            ..self.clone()
        }
    }

    /// The positive magnitude profile, marked [`Realization::Formal`] unless
    /// it is already real.
    pub fn magnitude(&self) -> KinkProfile {
        KinkProfile {
            realization: match self.realization {
                Realization::Real => Realization::Real,
                _ => Realization::Formal,
            },
            ..self.clone()
        }
    }

    pub fn with_shift(&self, shift: f64) -> KinkProfile {
        KinkProfile { shift, ..self.clone() }
    }
}

/// `xi,u,du,d2u` rows over `count` evenly spaced points of `[xi_min, xi_max]`.
pub fn kink_csv(kink: &KinkProfile, xi_min: f64, xi_max: f64, count: usize) -> Result<String> {
    if count < 2 {
        return Err(Error::Domain("need at least two sample points".into()));
    }
    let mut out = String::from("xi,u,du,d2u\n");
    for i in 0..count {
        let xi = xi_min + (xi_max - xi_min) * i as f64 / (count - 1) as f64;
        let s = kink.eval(xi)?;
        writeln!(out, "{xi:.16e},{:.16e},{:.16e},{:.16e}", s.u, s.du, s.d2u)
            .expect("write to String");
    }
    Ok(out)
}
