//! End-to-end run of a preset: factor, kink, partner, residuals and
//! (optionally) front propagation.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::factorizer::{
    berkovich_convert, expand_grouping, solve_scale_condition, split_nonlinearity,
    FactorizationPair, GammaSign, OdeSpec,
};
use crate::kinks::{kink_for_pair, KinkProfile, Realization};
use crate::powerpoly::PowerPoly;
use crate::presets::Preset;
use crate::susy::{reverse_partner, PartnerResult};
use crate::verify::{
    residual_max, simulate_front, FrontSimConfig, FrontSimResult, Grid, ResidualReport,
    RESIDUAL_TOL,
};

/// Residual grids span this many natural widths on each side of `ξ0`.
pub const RESIDUAL_WIDTHS: f64 = 10.0;
pub const RESIDUAL_POINTS: usize = 2001;

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub xi0: f64,
    pub gamma_sign: GammaSign,
    pub simulate: Option<FrontSimConfig>,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            xi0: 0.0,
            gamma_sign: GammaSign::Positive,
            simulate: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrontComparison {
    pub original: FrontSimResult,
    pub partner: Option<FrontSimResult>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PresetRun {
    pub preset: Preset,
    pub f_over_u: PowerPoly,
    /// Every pair of every ordered split.
    pub pairs: Vec<FactorizationPair>,
    pub pair: FactorizationPair,
    pub ode: OdeSpec,
    pub kink: KinkProfile,
    pub residual: ResidualReport,
    pub partner: PartnerResult,
    /// Real or reflected when the partner flow has a real kink, formal otherwise.
    pub partner_kink: KinkProfile,
    /// `None` when the partner kink is formal.
    pub partner_residual: Option<ResidualReport>,
    /// Original kink substituted into the partner equation.
    pub negative_control: Option<ResidualReport>,
    /// Worst coefficient error between the chosen nonlinearity and the
    /// expansion of every other pair. Different splits may admit different γ
    /// but must all reproduce the same `F`.
    pub alternate_roundtrip_error: f64,
    pub fronts: Option<FrontComparison>,
}

impl PresetRun {
    pub fn passed(&self) -> bool {
        self.residual.passes(RESIDUAL_TOL)
            && self.partner_residual.as_ref().is_none_or(|r| r.passes(RESIDUAL_TOL))
            && self.alternate_roundtrip_error < 1e-12
    }

    pub fn rate_ratio(&self) -> f64 {
        self.partner_kink.rate / self.kink.rate
    }

    pub fn report(&self) -> PresetReport {
        let hyp = self.kink.to_hyperbolic();
        let partner_hyp = self.partner_kink.to_hyperbolic();
        let (f1b, f2b) = berkovich_convert(&self.pair);
        PresetReport {
            preset: self.preset.to_string(),
            f_over_u: self.f_over_u.to_string(),
            phi1: self.pair.phi1.to_string(),
            phi2: self.pair.phi2.to_string(),
            scale_a: self.pair.scale_a,
            gamma: self.pair.gamma,
            branch: self.pair.branch,
            nonlinearity: self.ode.nonlinearity.to_string(),
            kink_amplitude: self.kink.amplitude,
            kink_rate: self.kink.rate,
            kink_inv_exponent: self.kink.inv_exponent.to_string(),
            kink_shift: self.kink.shift,
            kink_realization: self.kink.realization,
            kink_prefactor: hyp.prefactor,
            kink_half_rate: hyp.half_rate,
            partner_nonlinearity: self.partner.partner.nonlinearity.to_string(),
            partner_phi: self.partner.compatible_phi.to_string(),
            partner_rate: self.partner_kink.rate,
            partner_half_rate: partner_hyp.half_rate,
            partner_prefactor: partner_hyp.prefactor,
            partner_realization: self.partner_kink.realization,
            rate_ratio: self.rate_ratio(),
            berkovich_f1b: f1b.to_string(),
            berkovich_f2b: f2b.to_string(),
            alternate_factorizations: self.pairs.len(),
            alternate_roundtrip_error: self.alternate_roundtrip_error,
            original_speed: self.fronts.as_ref().map(|f| f.original.fitted_speed),
            partner_speed: self
                .fronts
                .as_ref()
                .and_then(|f| f.partner.as_ref())
                .map(|p| p.fitted_speed),
            passed: self.passed(),
            residual: self.residual.clone(),
            partner_residual: self.partner_residual.clone(),
            negative_control: self.negative_control.clone(),
        }
    }
}

/// Flat record of a run: named scalars plus nested residual reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PresetReport {
    pub preset: String,
    pub f_over_u: String,
    pub phi1: String,
    pub phi2: String,
    pub scale_a: f64,
    pub gamma: f64,
    pub branch: GammaSign,
    pub nonlinearity: String,
    pub kink_amplitude: f64,
    pub kink_rate: f64,
    pub kink_inv_exponent: String,
    pub kink_shift: f64,
    pub kink_realization: Realization,
    pub kink_prefactor: f64,
    pub kink_half_rate: f64,
    pub partner_nonlinearity: String,
    pub partner_phi: String,
    pub partner_rate: f64,
    pub partner_half_rate: f64,
    pub partner_prefactor: f64,
    pub partner_realization: Realization,
    pub rate_ratio: f64,
    pub berkovich_f1b: String,
    pub berkovich_f2b: String,
    pub alternate_factorizations: usize,
    pub alternate_roundtrip_error: f64,
    pub original_speed: Option<f64>,
    pub partner_speed: Option<f64>,
    pub passed: bool,
    pub residual: ResidualReport,
    pub partner_residual: Option<ResidualReport>,
    pub negative_control: Option<ResidualReport>,
}

/// All pairs of `preset`, and the one selected by its split index and the
/// requested γ sign.
pub fn preset_pairs(
    preset: &Preset,
    gamma_sign: GammaSign,
) -> Result<(Vec<FactorizationPair>, FactorizationPair)> {
    preset.validate()?;
    let splits = split_nonlinearity(&preset.f_over_u(), preset.family())?;
    let mut all = Vec::new();
    let mut chosen = None;
    for (i, ansatz) in splits.iter().enumerate() {
        let pairs = solve_scale_condition(ansatz)?;
        if i == preset.ansatz_index() {
            chosen = pairs.iter().find(|p| p.branch == gamma_sign).cloned();
        }
        all.extend(pairs);
    }
    let chosen = chosen.ok_or_else(|| {
        Error::Infeasible(format!("{preset} has no factorization on the {gamma_sign} branch"))
    })?;
    Ok((all, chosen))
}

fn residual_grid(kink: &KinkProfile) -> Result<Grid> {
    Grid::around(kink, RESIDUAL_WIDTHS, RESIDUAL_POINTS)
}

/// Centre the travel of a front with speed `gamma` inside the domain.
pub fn centred_start(cfg: &FrontSimConfig, gamma: f64) -> f64 {
    0.5 * (cfg.x_min + cfg.x_max) - 0.5 * gamma * cfg.t_final
}

pub fn run_preset(preset: &Preset, opts: &RunOptions) -> Result<PresetRun> {
    let (pairs, pair) = preset_pairs(preset, opts.gamma_sign)?;
    let ode = expand_grouping(&pair)?;

    let alternate_roundtrip_error = pairs
        .iter()
        .map(|p| expand_grouping(p).map(|o| o.nonlinearity.max_coeff_diff(&ode.nonlinearity)))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);

    let kink = kink_for_pair(&pair, opts.xi0)?;
    let residual = residual_max(&ode, &kink, residual_grid(&kink)?)?;

    let partner = reverse_partner(&pair)?;
    let partner_kink = partner.kink_or_formal(opts.xi0)?;
    let partner_residual = match partner_kink.realization {
        Realization::Formal => None,
        _ => Some(residual_max(&partner.partner, &partner_kink, residual_grid(&partner_kink)?)?),
    };
    let negative_control = residual_max(&partner.partner, &kink, residual_grid(&kink)?).ok();

    let fronts = match &opts.simulate {
        None => None,
        Some(cfg) => {
            let start = centred_start(cfg, pair.gamma);
            let original = simulate_front(&ode.nonlinearity, &kink.with_shift(start), cfg)?;
            let partner_front = match partner_kink.realization {
                Realization::Formal => None,
                _ => Some(simulate_front(
                    &partner.partner.nonlinearity,
                    &partner_kink.with_shift(start),
                    cfg,
                )?),
            };
            Some(FrontComparison {
                original,
                partner: partner_front,
            })
        }
    };

    Ok(PresetRun {
        preset: *preset,
        f_over_u: preset.f_over_u(),
        pairs,
        pair,
        ode,
        kink,
        residual,
        partner,
        partner_kink,
        partner_residual,
        negative_control,
        alternate_roundtrip_error,
        fronts,
    })
}

/// Runs several presets, in parallel when the `parallel` feature is on.
/// Output order follows input order.
pub fn run_presets(presets: &[Preset], opts: &RunOptions) -> Vec<Result<PresetRun>> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        presets.par_iter().map(|p| run_preset(p, opts)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        presets.iter().map(|p| run_preset(p, opts)).collect()
    }
}
