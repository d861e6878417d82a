//! Factorization of `u'' + γu' + F(u) = 0` into `[D − φ2][D − φ1]u = 0`.
//!
//! Expanding the brackets gives `u'' − (u·φ1' + φ1 + φ2)u' + φ1φ2·u = 0`, so a
//! factorization exists when
//!
//! * `φ1·φ2 = F(u)/u`, and
//! * `u·dφ1/du + φ1 + φ2 = −γ` is constant in `u`.
//!
//! The first condition is met by splitting `F/u` into two templates `P·Q` and
//! setting `φ1 = a·P`, `φ2 = Q/a`. The second then fixes the scale `a` by
//! coefficient matching, and the leftover constant fixes `γ`.

use std::fmt;

use num_rational::Rational64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::powerpoly::{Exponent, PowerPoly, STRUCTURAL_TOL};

/// Tolerance on the u-dependent part of `u·φ1' + φ1 + φ2`.
pub const CONDITION_TOL: f64 = 1e-10;

/// Sign of the friction/velocity coefficient, i.e. which branch of a
/// `±`-pair of factorizations is meant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GammaSign {
    Positive,
    Negative,
}

impl GammaSign {
    pub fn flipped(self) -> Self {
        match self {
            GammaSign::Positive => GammaSign::Negative,
            GammaSign::Negative => GammaSign::Positive,
        }
    }

    pub fn of(gamma: f64) -> Self {
        if gamma < 0.0 {
            GammaSign::Negative
        } else {
            GammaSign::Positive
        }
    }
}

impl fmt::Display for GammaSign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GammaSign::Positive => "positive",
            GammaSign::Negative => "negative",
        })
    }
}

/// Which family `F(u)/u` belongs to. Required because some nonlinearities
/// belong to several families at once (`1 − u²` is Fisher `n = 2` and
/// FitzHugh–Nagumo `a = −1`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    /// `F/u = 1 − u^n`, split as `(1 − u^{n/2})(1 + u^{n/2})`.
    Fisher { n: Exponent },
    /// `F/u = A − u^{n−2}`, split as `(√A − u^{n/2−1})(√A + u^{n/2−1})`.
    Dto { a: f64, n: Exponent },
    /// `F/u = c·(u − r1)(u − r2)` with real roots.
    Quadratic { roots: [f64; 2] },
}

/// A split `F/u = P·Q` before the scale is fixed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FactorAnsatz {
    pub p: PowerPoly,
    pub q: PowerPoly,
}

/// A solved factorization `[D − φ2][D − φ1]u = 0` of an equation with
/// constant coefficient `gamma`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FactorizationPair {
    pub phi1: PowerPoly,
    pub phi2: PowerPoly,
    pub scale_a: f64,
    pub gamma: f64,
    pub branch: GammaSign,
}

impl FactorizationPair {
    /// `u·φ1' + φ1 + φ2`, which must reduce to the constant `−γ`.
    pub fn condition_poly(&self) -> PowerPoly {
        &(&self.phi1.u_deriv() + &self.phi1) + &self.phi2
    }

    /// Largest violation of the constant-friction condition: the biggest
    /// non-constant coefficient, or the mismatch between the constant and `−γ`.
    pub fn condition_residual(&self) -> f64 {
        let c = self.condition_poly();
        let varying = c
            .non_constant_part()
            .terms()
            .iter()
            .fold(0.0_f64, |m, (_, k)| m.max(k.abs()));
        varying.max((c.constant_term() + self.gamma).abs())
    }
}

/// A concrete equation `u'' + γu' + F(u) = 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OdeSpec {
    pub gamma: f64,
    pub nonlinearity: PowerPoly,
}

impl OdeSpec {
    pub fn new(gamma: f64, nonlinearity: PowerPoly) -> Self {
        OdeSpec { gamma, nonlinearity }
    }

    /// Builds `F = u·(F/u)`.
    pub fn from_f_over_u(gamma: f64, f_over_u: &PowerPoly) -> Self {
        OdeSpec::new(gamma, f_over_u.shift(Exponent::ONE))
    }

    /// `F(u)/u`; requires every term of `F` to carry at least one power of `u`.
    pub fn f_over_u(&self) -> Result<PowerPoly> {
        let lowered = self
            .nonlinearity
            .terms()
            .iter()
            .map(|&(p, c)| p.checked_sub(Exponent::ONE).map(|q| (q, c)))
            .collect::<Result<Vec<_>>>()
            .map_err(|_| Error::Domain(format!("F = {} is not divisible by u", self.nonlinearity)))?;
        Ok(PowerPoly::canonicalize(lowered))
    }

    /// `u'' + γu' + F(u)`.
    pub fn residual(&self, u: f64, du: f64, d2u: f64) -> Result<f64> {
        Ok(d2u + self.gamma * du + self.nonlinearity.eval(u)?)
    }
}

impl fmt::Display for OdeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "u'' + {} u' + ({}) = 0", self.gamma, self.nonlinearity)
    }
}

fn half(e: Exponent) -> Exponent {
    Exponent::from_ratio(e.ratio() / 2).expect("half of a non-negative exponent")
}

fn binomial(c0: f64, c1: f64, p: Exponent) -> PowerPoly {
    PowerPoly::canonicalize([(Exponent::ZERO, c0), (p, c1)])
}

fn expect_structure(f_over_u: &PowerPoly, expected: &PowerPoly, family: &str) -> Result<()> {
    if f_over_u.approx_eq(expected, STRUCTURAL_TOL) {
        Ok(())
    } else {
        Err(Error::Unsupported(format!(
            "F/u = {f_over_u} is not of the {family} form {expected}"
        )))
    }
}

/// Every supported ordered split `F/u = P·Q` for the given family, including
/// the assignment with the two factors swapped.
pub fn split_nonlinearity(f_over_u: &PowerPoly, family: Family) -> Result<Vec<FactorAnsatz>> {
    match family {
        Family::Fisher { n } => {
            if n.is_zero() {
                return Err(Error::Unsupported("Fisher family needs n > 0".into()));
            }
            expect_structure(f_over_u, &binomial(1.0, -1.0, n), "Fisher 1 − u^n")?;
            let m = half(n);
            let minus = binomial(1.0, -1.0, m);
            let plus = binomial(1.0, 1.0, m);
            Ok(vec![
                FactorAnsatz { p: minus.clone(), q: plus.clone() },
                FactorAnsatz { p: plus, q: minus },
            ])
        }
        Family::Dto { a, n } => {
            if !(a > 0.0) {
                return Err(Error::Unsupported(format!("DTO family needs A > 0, got {a}")));
            }
            let two = Exponent::integer(2);
            let k = n.checked_sub(two).ok().filter(|k| !k.is_zero()).ok_or_else(|| {
                Error::Unsupported(format!("DTO family needs n > 2, got {n}"))
            })?;
            expect_structure(f_over_u, &binomial(a, -1.0, k), "DTO A − u^{n−2}")?;
            let m = half(k);
            let root = a.sqrt();
            let minus = binomial(root, -1.0, m);
            let plus = binomial(root, 1.0, m);
            Ok(vec![
                FactorAnsatz { p: minus.clone(), q: plus.clone() },
                FactorAnsatz { p: plus, q: minus },
            ])
        }
        Family::Quadratic { roots: [r1, r2] } => {
            let lead = f_over_u.coeff(Exponent::integer(2));
            if lead.abs() < STRUCTURAL_TOL {
                return Err(Error::Unsupported(format!("F/u = {f_over_u} is not quadratic")));
            }
            let first = binomial(-r1, 1.0, Exponent::ONE);
            let second = binomial(-lead * r2, lead, Exponent::ONE);
            expect_structure(f_over_u, &first.mul(&second), "quadratic c(u − r1)(u − r2)")?;
            // Leading coefficient rides on the r2 factor: FHN roots (1, a)
            // give (u − 1, a − u) and (a − u, u − 1).
            Ok(vec![
                FactorAnsatz { p: first.clone(), q: second.clone() },
                FactorAnsatz { p: second, q: first },
            ])
        }
    }
}

/// Solves `u·d(aP)/du + aP + Q/a = −γ` for the scale `a` by requiring every
/// u-dependent coefficient to vanish. Each such coefficient reads
/// `a·(e+1)·p_e + q_e/a = 0`, i.e. `a² = −q_e / ((e+1)·p_e)`; all exponents
/// must agree on `a²`. Returns both real roots, sorted by `a` ascending.
pub fn solve_scale_condition(ansatz: &FactorAnsatz) -> Result<Vec<FactorizationPair>> {
    if ansatz.p.len() > 2 || ansatz.q.len() > 2 {
        return Err(Error::Unsupported(
            "scale condition is solved for binomial templates only".into(),
        ));
    }
    // (e + 1)·p_e
    let lifted = &ansatz.p.u_deriv() + &ansatz.p;

    let mut exps: Vec<Exponent> = lifted
        .terms()
        .iter()
        .chain(ansatz.q.terms())
        .map(|(e, _)| *e)
        .filter(|e| !e.is_zero())
        .collect();
    exps.sort();
    exps.dedup();
    if exps.is_empty() {
        return Err(Error::Unsupported(
            "templates are constant; the scale is undetermined".into(),
        ));
    }

    let mut a_squared: Option<f64> = None;
    for e in exps {
        let (lp, q) = (lifted.coeff(e), ansatz.q.coeff(e));
        if lp == 0.0 {
            return Err(Error::Infeasible(format!(
                "u^{{{e}}} appears only in Q and cannot be cancelled"
            )));
        }
        let s2 = -q / lp;
        match a_squared {
            None => a_squared = Some(s2),
            Some(prev) if (prev - s2).abs() <= CONDITION_TOL * prev.abs().max(1.0) => {}
            Some(prev) => {
                return Err(Error::Infeasible(format!(
                    "exponents demand different scales: a² = {prev} and a² = {s2}"
                )))
            }
        }
    }
    let s2 = a_squared.expect("at least one exponent");
    if s2 == 0.0 {
        return Err(Error::Infeasible("only the root a = 0 exists".into()));
    }
    if s2 < 0.0 {
        return Err(Error::Infeasible(format!("a² = {s2} has no real root")));
    }

    let root = s2.sqrt();
    let (lp0, q0) = (lifted.constant_term(), ansatz.q.constant_term());
    let pairs = [-root, root]
        .into_iter()
        .map(|a| {
            let gamma = -(a * lp0 + q0 / a);
            let pair = FactorizationPair {
                phi1: ansatz.p.scale(a),
                phi2: ansatz.q.scale(1.0 / a),
                scale_a: a,
                gamma,
                branch: branch_tag(gamma, a),
            };
            let r = pair.condition_residual();
            if r > CONDITION_TOL {
                return Err(Error::Inconsistent(format!(
                    "scale a = {a} leaves condition residual {r}"
                )));
            }
            Ok(pair)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(pairs)
}

// γ = 0 (e.g. FHN at a = 1/2) is tagged by the scale sign, so the two roots
// still land on opposite branches.
fn branch_tag(gamma: f64, a: f64) -> GammaSign {
    if gamma.abs() > CONDITION_TOL {
        GammaSign::of(gamma)
    } else if a < 0.0 {
        GammaSign::Positive
    } else {
        GammaSign::Negative
    }
}

/// Split and solve in one go: every pair for every ordered split.
pub fn factorize(f_over_u: &PowerPoly, family: Family) -> Result<Vec<FactorizationPair>> {
    let mut out = Vec::new();
    for ansatz in split_nonlinearity(f_over_u, family)? {
        out.extend(solve_scale_condition(&ansatz)?);
    }
    Ok(out)
}

/// Second-order operator `u'' + friction(u)·u' + potential(u)·u`.
#[derive(Debug, Clone, PartialEq)]
pub struct SecondOrderOperator {
    pub friction: PowerPoly,
    pub potential: PowerPoly,
}

/// Expands `[D − outer][D − inner]u` term by term:
/// `u'' − (u·inner' + inner + outer)·u' + outer·inner·u`.
pub fn expand_brackets(outer: &PowerPoly, inner: &PowerPoly) -> SecondOrderOperator {
    let friction = -&(&(&inner.u_deriv() + inner) + outer);
    SecondOrderOperator {
        friction,
        potential: outer.mul(inner),
    }
}

/// Multiplies the brackets back out and returns the equation they factor.
pub fn expand_grouping(pair: &FactorizationPair) -> Result<OdeSpec> {
    let op = expand_brackets(&pair.phi2, &pair.phi1);
    let varying = op.friction.non_constant_part();
    if let Some(&(e, c)) = varying
        .terms()
        .iter()
        .find(|(_, c)| c.abs() > CONDITION_TOL)
    {
        return Err(Error::Inconsistent(format!(
            "u' coefficient depends on u (coefficient {c} at u^{{{e}}})"
        )));
    }
    let friction = op.friction.constant_term();
    if (friction - pair.gamma).abs() > CONDITION_TOL {
        return Err(Error::Inconsistent(format!(
            "u' coefficient {friction} differs from gamma = {}",
            pair.gamma
        )));
    }
    Ok(OdeSpec::from_f_over_u(pair.gamma, &op.potential))
}

/// Berkovich-style factor functions `(f1b, f2b)` with `f1b = φ1` and
/// `f2b = φ2 + u·dφ1/du`, so that `f1b + f2b = −γ`.
pub fn berkovich_convert(pair: &FactorizationPair) -> (PowerPoly, PowerPoly) {
    (pair.phi1.clone(), &pair.phi2 + &pair.phi1.u_deriv())
}

/// Inverse of [`berkovich_convert`]: `φ2 = f2b − u·df1b/du`.
pub fn from_berkovich(f1b: &PowerPoly, f2b: &PowerPoly) -> (PowerPoly, PowerPoly) {
    (f1b.clone(), f2b - &f1b.u_deriv())
}

/// Travelling coordinate `ξ = k(x − vt)`: returns `(γ/k, F/k²)`.
pub fn rescale_frame(ode: &OdeSpec, k: f64) -> Result<OdeSpec> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::Domain(format!("frame scale k must be positive, got {k}")));
    }
    Ok(OdeSpec::new(ode.gamma / k, ode.nonlinearity.scale(1.0 / (k * k))))
}

/// `n/2` for an integer `n` as an exponent.
pub fn half_integer(n: u32) -> Exponent {
    Exponent::from_ratio(Rational64::new(i64::from(n), 2)).expect("non-negative")
}
