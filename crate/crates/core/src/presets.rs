//! Named equations from the classic kink families.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::factorizer::{half_integer, Family};
use crate::powerpoly::{Exponent, PowerPoly};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Preset {
    /// Generalized Fisher `u'' + γu' + u(1 − u^n) = 0`.
    Fisher { n: u32 },
    /// Microtubule polymerization front, Fisher with `n = 6`.
    Mt6,
    /// Damped anharmonic oscillator `u'' + γu' + Au − u^{n−1} = 0`.
    Dto { a: f64, n: u32 },
    /// FitzHugh–Nagumo `u'' + γu' + u(u − 1)(a − u) = 0`; `branch` selects
    /// which factor carries the scale (1: `u − 1`, 2: `a − u`).
    Fhn { a: f64, branch: u8 },
    /// `u'' + γu' + u − u³ = 0`, i.e. FHN with `a = −1`.
    NewellWhitehead,
}

impl Preset {
    /// The presets with closed-form kinks checked by the acceptance suite.
    pub fn catalog() -> Vec<Preset> {
        vec![
            Preset::Fisher { n: 1 },
            Preset::Fisher { n: 2 },
            Preset::Mt6,
            Preset::Dto { a: 2.0 / 9.0, n: 4 },
            Preset::Dto { a: 3.0 / 16.0, n: 6 },
            Preset::Fhn { a: 3.0, branch: 1 },
            Preset::Fhn { a: 3.0, branch: 2 },
            Preset::NewellWhitehead,
        ]
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Preset::Fisher { n } if n < 1 => Err(Error::Domain("fisher needs n >= 1".into())),
            Preset::Dto { a, .. } if !(a > 0.0 && a.is_finite()) => {
                Err(Error::Domain(format!("dto needs A > 0, got {a}")))
            }
            Preset::Dto { n, .. } if n < 4 || n % 2 != 0 => {
                Err(Error::Domain(format!("dto needs an even n >= 4, got {n}")))
            }
            Preset::Fhn { a, .. } if !a.is_finite() => Err(Error::Domain("fhn needs a finite a".into())),
            Preset::Fhn { branch, .. } if branch != 1 && branch != 2 => {
                Err(Error::Domain(format!("fhn branch must be 1 or 2, got {branch}")))
            }
            _ => Ok(()),
        }
    }

    pub fn f_over_u(&self) -> PowerPoly {
        match *self {
            Preset::Fisher { n } => {
                PowerPoly::canonicalize([(Exponent::ZERO, 1.0), (Exponent::integer(n), -1.0)])
            }
            Preset::Mt6 => Preset::Fisher { n: 6 }.f_over_u(),
            Preset::Dto { a, n } => {
                PowerPoly::canonicalize([(Exponent::ZERO, a), (Exponent::integer(n - 2), -1.0)])
            }
            Preset::Fhn { a, .. } => {
                // (u − 1)(a − u) = −a + (1 + a)u − u²
                PowerPoly::canonicalize([
                    (Exponent::ZERO, -a),
                    (Exponent::ONE, 1.0 + a),
                    (Exponent::integer(2), -1.0),
                ])
            }
            Preset::NewellWhitehead => Preset::Fhn { a: -1.0, branch: 1 }.f_over_u(),
        }
    }

    pub fn family(&self) -> Family {
        match *self {
            Preset::Fisher { n } => Family::Fisher { n: Exponent::integer(n) },
            Preset::Mt6 => Family::Fisher { n: Exponent::integer(6) },
            Preset::Dto { a, n } => Family::Dto { a, n: Exponent::integer(n) },
            Preset::Fhn { a, .. } => Family::Quadratic { roots: [1.0, a] },
            Preset::NewellWhitehead => Family::Quadratic { roots: [1.0, -1.0] },
        }
    }

    /// Index into the ordered splits returned by `split_nonlinearity`.
    pub fn ansatz_index(&self) -> usize {
        match *self {
            Preset::Fhn { branch, .. } => usize::from(branch - 1),
            _ => 0,
        }
    }

    /// `n/2` for the Fisher-type presets.
    pub fn fisher_half_power(&self) -> Option<Exponent> {
        match *self {
            Preset::Fisher { n } => Some(half_integer(n)),
            Preset::Mt6 => Some(half_integer(6)),
            _ => None,
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Preset::Fisher { n } => write!(f, "fisher({n})"),
            Preset::Mt6 => f.write_str("mt6"),
            Preset::Dto { a, n } => write!(f, "dto({a},{n})"),
            Preset::Fhn { a, branch } => write!(f, "fhn({a},{branch})"),
            Preset::NewellWhitehead => f.write_str("newell_whitehead"),
        }
    }
}

fn parse_real(s: &str) -> Result<f64> {
    let s = s.trim();
    let bad = || Error::Parse { pos: 0, msg: format!("bad number {s:?}") };
    match s.split_once('/') {
        Some((num, den)) => {
            let num: f64 = num.trim().parse().map_err(|_| bad())?;
            let den: f64 = den.trim().parse().map_err(|_| bad())?;
            Ok(num / den)
        }
        None => s.parse().map_err(|_| bad()),
    }
}

impl FromStr for Preset {
    type Err = Error;

    /// Accepts `fisher(1)`, `mt6`, `dto(2/9,4)`, `fhn(3,1)`,
    /// `newell_whitehead`; `name:args` works in place of `name(args)`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let (name, args) = match s.find(['(', ':']) {
            Some(i) => (&s[..i], s[i + 1..].trim_end_matches(')')),
            None => (s.as_str(), ""),
        };
        let args: Vec<&str> = if args.is_empty() { vec![] } else { args.split(',').collect() };
        let bad = |msg: &str| Error::Parse { pos: 0, msg: format!("{msg} in preset {s:?}") };
        let int = |x: &str| x.trim().parse::<u32>().map_err(|_| bad("expected an integer"));
        let preset = match (name.trim(), args.as_slice()) {
            ("fisher", [n]) => Preset::Fisher { n: int(n)? },
            ("mt6", []) => Preset::Mt6,
            ("dto", [a, n]) => Preset::Dto { a: parse_real(a)?, n: int(n)? },
            ("fhn", [a]) => Preset::Fhn { a: parse_real(a)?, branch: 1 },
            ("fhn", [a, b]) => {
                let branch = u8::try_from(int(b)?).map_err(|_| bad("branch out of range"))?;
                Preset::Fhn { a: parse_real(a)?, branch }
            }
            ("newell_whitehead" | "nw", []) => Preset::NewellWhitehead,
            _ => return Err(bad("unknown preset or wrong argument count")),
        };
        preset.validate()?;
        Ok(preset)
    }
}
