//! Acceptance criteria. Runs without the libtest harness so every criterion
//! prints its PASS/FAIL line even when all of them succeed.

use std::process::ExitCode;
use std::time::Instant;

use kinkpair::factorizer::{expand_grouping, solve_scale_condition, split_nonlinearity};
use kinkpair::figures::FigureData;
use kinkpair::pipeline::{run_preset, PresetRun, RunOptions};
use kinkpair::susy::{reverse_partner, second_reversal_check, ObstructionStatus};
use kinkpair::verify::{residual_max, rk4_flow, FrontSimConfig, Grid};
use kinkpair::{
    Exponent, GammaSign, KinkBranch, KinkProfile, OdeSpec, PowerPoly, Preset, Realization,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn run(preset: Preset) -> Result<PresetRun, String> {
    run_preset(&preset, &RunOptions::default()).map_err(|e| format!("{preset}: {e}"))
}

fn poly(terms: &[(i64, i64, f64)]) -> PowerPoly {
    PowerPoly::from_fractions(terms).unwrap()
}

/// `h_n = √(n/2 + 1)`.
fn h(n: u32) -> f64 {
    (n as f64 / 2.0 + 1.0).sqrt()
}

/// Positive-branch velocity from the closed-form scale constants.
fn expected_gamma(p: Preset) -> f64 {
    match p {
        Preset::Fisher { n } => h(n) + 1.0 / h(n),
        Preset::Mt6 => h(6) + 1.0 / h(6),
        Preset::Dto { a, n } => {
            let g = (n as f64 / 2.0).sqrt();
            a.sqrt() * (g + 1.0 / g)
        }
        Preset::Fhn { a, branch: 1 } => (2.0 * a - 1.0).abs() / 2f64.sqrt(),
        Preset::Fhn { a, .. } => (a - 2.0).abs() / 2f64.sqrt(),
        Preset::NewellWhitehead => 3.0 / 2f64.sqrt(),
    }
}

/// `F(u)` written out term by term for each preset.
fn expected_nonlinearity(p: Preset) -> PowerPoly {
    match p {
        Preset::Fisher { n } => poly(&[(1, 1, 1.0), (n as i64 + 1, 1, -1.0)]),
        Preset::Mt6 => poly(&[(1, 1, 1.0), (7, 1, -1.0)]),
        Preset::Dto { a, n } => poly(&[(1, 1, a), (n as i64 - 1, 1, -1.0)]),
        Preset::Fhn { a, .. } => poly(&[(1, 1, -a), (2, 1, 1.0 + a), (3, 1, -1.0)]),
        Preset::NewellWhitehead => poly(&[(1, 1, 1.0), (3, 1, -1.0)]),
    }
}

fn catalog() -> Vec<Preset> {
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

fn velocity_quantization() -> Outcome {
    let mut detail = Vec::new();
    for (preset, n, exact) in [
        (Preset::Fisher { n: 1 }, 1, 5.0 * 6f64.sqrt() / 6.0),
        (Preset::Mt6, 6, 2.5),
    ] {
        let ansatz = &split_nonlinearity(&preset.f_over_u(), preset.family())
            .map_err(|e| e.to_string())?[0];
        let pairs = solve_scale_condition(ansatz).map_err(|e| e.to_string())?;
        let oracle = h(n) + 1.0 / h(n);
        ensure((oracle - exact).abs() < 1e-14, || format!("oracle {oracle} vs {exact}"))?;
        ensure(pairs.len() == 2, || format!("{preset}: {} pairs", pairs.len()))?;
        for pair in &pairs {
            let err = (pair.gamma.abs() - exact).abs();
            ensure(err < 1e-12, || format!("{preset}: gamma {} error {err:e}", pair.gamma))?;
        }
        ensure(pairs[0].gamma == -pairs[1].gamma, || format!("{preset}: branches not opposite"))?;
        detail.push(format!("{preset} gamma = ±{:.12}", pairs[1].gamma.abs()));
    }
    Ok(detail.join(", "))
}

fn kink_exactness() -> Outcome {
    let mut worst: f64 = 0.0;
    for preset in catalog() {
        let run = run(preset)?;
        // The equation is rebuilt here from the preset definition and the
        // known velocity; only the kink comes from the library.
        let ode = OdeSpec::new(expected_gamma(preset), expected_nonlinearity(preset));
        ensure((run.pair.gamma - ode.gamma).abs() < 1e-12, || {
            format!("{preset}: gamma {} expected {}", run.pair.gamma, ode.gamma)
        })?;
        let grid = Grid::new(
            run.kink.shift - 10.0 * run.kink.natural_width(),
            run.kink.shift + 10.0 * run.kink.natural_width(),
            2001,
        )
        .map_err(|e| e.to_string())?;
        let rep = residual_max(&ode, &run.kink, grid).map_err(|e| e.to_string())?;
        ensure(rep.max_abs_residual < 1e-9, || {
            format!("{preset}: residual {:e} at {}", rep.max_abs_residual, rep.argmax_xi)
        })?;

        // Finite-difference cross-check of the analytic derivatives.
        let step = 1e-4 * run.kink.natural_width();
        for i in 0..=40 {
            let xi = grid.xi_min + (grid.xi_max - grid.xi_min) * i as f64 / 40.0;
            let v = |x: f64| run.kink.value(x).unwrap();
            let d2 = (v(xi + step) - 2.0 * v(xi) + v(xi - step)) / (step * step);
            let d1 = (v(xi + step) - v(xi - step)) / (2.0 * step);
            let r = d2 + ode.gamma * d1 + ode.nonlinearity.eval(v(xi)).unwrap();
            ensure(r.abs() < 1e-4, || format!("{preset}: finite-difference residual {r:e} at {xi}"))?;
        }
        worst = worst.max(rep.max_abs_residual);
    }
    Ok(format!("8 presets, worst residual {worst:.2e}"))
}

fn partner_identities() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut check = |label: &str, got: &PowerPoly, want: &PowerPoly| -> Result<(), String> {
        let err = got.max_coeff_diff(want);
        worst = worst.max(err);
        ensure(err < 1e-12, || format!("{label}: got {got}, want {want}, error {err:e}"))
    };
    let partner_f_over_u = |p: Preset| -> Result<PowerPoly, String> {
        let run = run(p)?;
        ensure(run.partner.partner.gamma == run.pair.gamma, || format!("{p}: partner gamma differs"))?;
        run.partner.partner.f_over_u().map_err(|e| e.to_string())
    };

    check("fisher(1)", &partner_f_over_u(Preset::Fisher { n: 1 })?, &poly(&[(0, 1, 1.0), (1, 2, -1.25), (1, 1, -2.25)]))?;
    check("mt6", &partner_f_over_u(Preset::Mt6)?, &poly(&[(0, 1, 1.0), (3, 1, -15.0), (6, 1, -16.0)]))?;
    for n in [1u32, 2, 4, 6] {
        // (1 + u^{n/2})(1 − h⁴u^{n/2}) = 1 + (1 − h⁴)u^{n/2} − h⁴u^n
        let h4 = h(n).powi(4);
        let want = poly(&[(0, 1, 1.0), (n as i64, 2, 1.0 - h4), (n as i64, 1, -h4)]);
        check(&format!("fisher({n})"), &partner_f_over_u(Preset::Fisher { n })?, &want)?;
    }
    for (a, n) in [(2.0 / 9.0, 4u32), (3.0 / 16.0, 6), (0.5, 8)] {
        // (√A + u^k)(√A − (n²/4)u^k), k = n/2 − 1
        let c = (n * n) as f64 / 4.0;
        let k = n as i64 / 2 - 1;
        let want = poly(&[(0, 1, a), (k, 1, a.sqrt() * (1.0 - c)), (2 * k, 1, -c)]);
        check(&format!("dto({a},{n})"), &partner_f_over_u(Preset::Dto { a, n })?, &want)?;
    }
    for a in [3.0, 0.25, -2.0] {
        // (4u − 1)(a − u) = −a + (4a + 1)u − 4u²
        let want = poly(&[(0, 1, -a), (1, 1, 4.0 * a + 1.0), (2, 1, -4.0)]);
        check(&format!("fhn({a},1)"), &partner_f_over_u(Preset::Fhn { a, branch: 1 })?, &want)?;
    }
    Ok(format!("16 partner equations, worst coefficient error {worst:.2e}"))
}

fn erratum_resolution() -> Outcome {
    let a = 3.0;
    let r2 = 2f64.sqrt();
    // u = 1/(1 + e^{√2(ξ−ξ0)}) satisfies u' = −√2·u(1 − u); substituting
    // into u'' + γu' + u(u − 1)(a − 4u) fixes γ = (2 − a)/√2.
    let gamma = (2.0 - a) / r2;
    let kink = KinkProfile {
        amplitude: 1.0,
        rate: r2,
        inv_exponent: Exponent::ONE,
        shift: 0.0,
        branch: KinkBranch::Plus,
        gamma_sign: GammaSign::of(gamma),
        realization: Realization::Real,
    };
    let grid = Grid::new(-10.0 / r2, 10.0 / r2, 2001).map_err(|e| e.to_string())?;
    // u(u − 1)(a − 4u) = −a·u + (a + 4)u² − 4u³
    let derived = OdeSpec::new(gamma, poly(&[(1, 1, -a), (2, 1, a + 4.0), (3, 1, -4.0)]));
    // u(u − 1)(a − u − 3u²) = −a·u + (a + 1)u² + 2u³ − 3u⁴
    let quartic = OdeSpec::new(gamma, poly(&[(1, 1, -a), (2, 1, a + 1.0), (3, 1, 2.0), (4, 1, -3.0)]));
    let good = residual_max(&derived, &kink, grid).map_err(|e| e.to_string())?;
    let bad = residual_max(&quartic, &kink, grid).map_err(|e| e.to_string())?;
    ensure(good.max_abs_residual < 1e-9, || format!("derived residual {:e}", good.max_abs_residual))?;
    ensure(bad.max_abs_residual > 1e-3, || format!("quartic-form residual {:e}", bad.max_abs_residual))?;

    // The library's own reversal of the second FHN split must land on the
    // derived equation and the same kink.
    let opts = RunOptions { gamma_sign: GammaSign::of(gamma), ..RunOptions::default() };
    let lib = run_preset(&Preset::Fhn { a, branch: 2 }, &opts).map_err(|e| e.to_string())?;
    let err = lib.partner.partner.nonlinearity.max_coeff_diff(&derived.nonlinearity);
    ensure(err < 1e-12, || format!("library partner {} differs by {err:e}", lib.partner.partner.nonlinearity))?;
    ensure((lib.partner.partner.gamma - gamma).abs() < 1e-12, || "library partner gamma differs".into())?;
    for i in 0..=20 {
        let xi = -5.0 + 0.5 * i as f64;
        let d = (lib.partner_kink.value(xi).unwrap() - kink.value(xi).unwrap()).abs();
        ensure(d < 1e-14, || format!("library partner kink differs by {d:e} at {xi}"))?;
    }
    Ok(format!(
        "derived residual {:.2e}, quartic-form residual {:.3}",
        good.max_abs_residual, bad.max_abs_residual
    ))
}

/// Partner-equation kink `−(√A/(1 + e^{rξ}))^{2/(n−2)}` of the distorted
/// oscillator, real for odd `n/2 − 1`.
fn dto_partner_profile(a: f64, n: u32, rate: f64) -> KinkProfile {
    KinkProfile {
        amplitude: a.sqrt(),
        rate,
        inv_exponent: Exponent::new(2, n as i64 - 2).unwrap(),
        shift: 0.0,
        branch: KinkBranch::Plus,
        gamma_sign: GammaSign::Positive,
        realization: Realization::Reflected,
    }
}

fn rate_ratio_law() -> Outcome {
    let mut detail = Vec::new();
    let mut cases: Vec<(Preset, f64)> = [1u32, 2, 3, 4, 6, 10]
        .into_iter()
        .map(|n| (Preset::Fisher { n }, n as f64 / 2.0 + 1.0))
        .collect();
    cases.push((Preset::Mt6, 4.0));
    // (n/2)/(n/2 − 1) at n = 4. For larger n the partner rate carries the
    // extra factor n/2 − 1 from u^{n/2−1}, and the ratio is g² = n/2.
    cases.push((Preset::Dto { a: 2.0 / 9.0, n: 4 }, 2.0 / (2.0 - 1.0)));
    for n in [6u32, 8] {
        cases.push((Preset::Dto { a: 2.0 / 9.0, n }, n as f64 / 2.0));
    }
    for (preset, want) in cases {
        let got = run(preset)?.rate_ratio();
        ensure((got - want).abs() < 1e-12, || format!("{preset}: ratio {got}, want {want}"))?;
        if matches!(preset, Preset::Fisher { n: 1 } | Preset::Mt6 | Preset::Dto { n: 4, .. }) {
            detail.push(format!("{preset} {got}"));
        }
    }

    // Evidence for the n > 4 law: at n = 8 only the rate with the extra
    // factor solves the partner equation.
    let (a, n) = (2.0f64 / 9.0, 8u32);
    let g = (n as f64 / 2.0).sqrt();
    let k = n as i64 / 2 - 1;
    let c = (n * n) as f64 / 4.0;
    // u(√A + u^k)(√A − (n²/4)u^k)
    let partner = OdeSpec::new(
        a.sqrt() * (g + 1.0 / g),
        poly(&[(1, 1, a), (k + 1, 1, a.sqrt() * (1.0 - c)), (2 * k + 1, 1, -c)]),
    );
    let residual = |rate: f64| -> Result<f64, String> {
        let kink = dto_partner_profile(a, n, rate);
        let grid = Grid::new(-10.0 / rate, 10.0 / rate, 2001).map_err(|e| e.to_string())?;
        Ok(residual_max(&partner, &kink, grid).map_err(|e| e.to_string())?.max_abs_residual)
    };
    let (with_factor, without) = (residual(a.sqrt() * g * k as f64)?, residual(a.sqrt() * g)?);
    ensure(with_factor < 1e-9 && without > 1e-3, || {
        format!("dto(n = 8) partner residuals {with_factor:e} and {without:e}")
    })?;
    detail.push(format!("dto n = 6, 8 follow n/2 (n = 8 with rate √A·g: residual {without:.3})"));
    Ok(detail.join(", "))
}

/// Sup error of RK4 from the kink's centre out to ±10 widths.
fn flow_error(phi: &PowerPoly, kink: &KinkProfile, step: f64) -> Result<f64, String> {
    let w = kink.natural_width();
    let u0 = kink.value(kink.shift).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for end in [kink.shift + 10.0 * w, kink.shift - 10.0 * w] {
        let t = rk4_flow(phi, u0, kink.shift, end, step).map_err(|e| e.to_string())?;
        worst = worst.max(t.sup_error(kink).map_err(|e| e.to_string())?);
    }
    Ok(worst)
}

fn flow_oracle() -> Outcome {
    let (mut worst, mut lo, mut hi) = (0.0f64, f64::INFINITY, 0.0f64);
    let mut count = 0;
    for preset in catalog() {
        let run = run(preset)?;
        let mut kinks = vec![(run.pair.phi1.clone(), run.kink.clone())];
        if run.partner_kink.realization != Realization::Formal {
            kinks.push((run.partner.compatible_phi.clone(), run.partner_kink.clone()));
        }
        for (phi, kink) in kinks {
            let err = flow_error(&phi, &kink, 1e-3)?;
            ensure(err < 1e-8, || format!("{preset}: sup error {err:e}"))?;
            let coarse = 0.05 * kink.natural_width();
            let ratio = flow_error(&phi, &kink, coarse)? / flow_error(&phi, &kink, coarse / 2.0)?;
            ensure((12.0..=20.0).contains(&ratio), || format!("{preset}: halving ratio {ratio}"))?;
            worst = worst.max(err);
            lo = lo.min(ratio);
            hi = hi.max(ratio);
            count += 1;
        }
    }
    Ok(format!("{count} kinks, worst sup error {worst:.2e}, halving ratios {lo:.2}..{hi:.2}"))
}

fn front_speed() -> Outcome {
    let cfg = FrontSimConfig {
        x_min: -40.0,
        x_max: 40.0,
        dx: 0.05,
        dt: 1e-3,
        t_final: 5.0,
        ..FrontSimConfig::default()
    };
    let opts = RunOptions { simulate: Some(cfg), ..RunOptions::default() };
    let started = Instant::now();
    let run = run_preset(&Preset::Fisher { n: 6 }, &opts).map_err(|e| e.to_string())?;
    ensure(run.partner_kink.realization == Realization::Reflected, || {
        format!("partner kink is {:?}", run.partner_kink.realization)
    })?;
    let fronts = run.fronts.as_ref().ok_or("no front simulation")?;
    let original = fronts.original.fitted_speed;
    let partner = fronts.partner.as_ref().ok_or("partner front missing")?.fitted_speed;
    for (label, v) in [("original", original), ("partner", partner)] {
        ensure((2.45..=2.55).contains(&v), || format!("{label} speed {v}"))?;
    }
    Ok(format!(
        "speeds {original:.4} and {partner:.4}, widths {:.4} and {:.4}, {:.1}s",
        run.kink.natural_width(),
        run.partner_kink.natural_width(),
        started.elapsed().as_secs_f64()
    ))
}

fn obstruction() -> Outcome {
    for n in 1..=10 {
        let rep = second_reversal_check(n);
        ensure(rep.is_obstructed(), || format!("n = {n}: {:?}", rep.status))?;
        // (H² − 1)²(H² + 1)/H³ with H = n/2 + 1
        let hh = n as f64 / 2.0 + 1.0;
        let want = (hh * hh - 1.0).powi(2) * (hh * hh + 1.0) / hh.powi(3);
        if let ObstructionStatus::Obstructed { mismatch } = rep.status {
            ensure((mismatch.abs() - want).abs() < 1e-9 * want, || {
                format!("n = {n}: mismatch {mismatch}, want {want}")
            })?;
        }
    }
    let solvable: Vec<i64> = (-20..=20)
        .filter(|&n| matches!(second_reversal_check(n).status, ObstructionStatus::Solvable { .. }))
        .collect();
    ensure(solvable == vec![-4, 0], || format!("solvable at {solvable:?}"))?;
    Ok("obstructed for n = 1..10, solvable only at n = -4, 0 in -20..20".into())
}

/// First sign change of `a − b`, linearly interpolated: `(ξ, u)`.
fn crossing(csv: &str) -> Option<(f64, f64)> {
    let rows: Vec<[f64; 3]> = csv
        .lines()
        .skip(1)
        .map(|l| {
            let v: Vec<f64> = l.split(',').map(|s| s.parse().unwrap()).collect();
            [v[0], v[1], v[2]]
        })
        .collect();
    rows.windows(2).find_map(|w| {
        let (d0, d1) = (w[0][1] - w[0][2], w[1][1] - w[1][2]);
        if d0 == 0.0 {
            return Some((w[0][0], w[0][1]));
        }
        (d0 * d1 < 0.0).then(|| {
            let t = d0 / (d0 - d1);
            (w[0][0] + t * (w[1][0] - w[0][0]), w[0][1] + t * (w[1][1] - w[0][1]))
        })
    })
}

fn figure_crossings() -> Outcome {
    let mut detail = Vec::new();
    for (preset, xi0, level) in [
        (Preset::Fisher { n: 1 }, 0.0, 0.25),
        (Preset::Mt6, 0.0, 2f64.powf(-1.0 / 3.0)),
        (Preset::Mt6, 1.5, 2f64.powf(-1.0 / 3.0)),
    ] {
        let opts = RunOptions { xi0, ..RunOptions::default() };
        let run = run_preset(&preset, &opts).map_err(|e| e.to_string())?;
        let csv = FigureData::from_run(&run).map_err(|e| e.to_string())?.to_csv();
        ensure(csv.starts_with("xi,u_original,u_susy\n"), || "bad CSV header".into())?;
        ensure(csv.lines().count() == 1002, || "expected 1001 rows".into())?;
        let (x, u) = crossing(&csv).ok_or(format!("{preset}: curves do not cross"))?;
        ensure((x - xi0).abs() < 1e-6 && (u - level).abs() < 1e-6, || {
            format!("{preset}: crossing ({x}, {u}), want ({xi0}, {level})")
        })?;
        detail.push(format!("{preset} at ({x:.3e}, {u:.9})"));
    }
    Ok(detail.join(", "))
}

fn main() -> ExitCode {
    // Guard against a silent mismatch between this file's preset list and
    // the one the library exposes.
    assert_eq!(
        catalog().iter().map(ToString::to_string).collect::<Vec<_>>(),
        Preset::catalog().iter().map(ToString::to_string).collect::<Vec<_>>()
    );
    // A reversed pair must reproduce its own partner equation when expanded.
    let pair = &kinkpair::factorizer::factorize(&Preset::Mt6.f_over_u(), Preset::Mt6.family()).unwrap()[0];
    let partner = reverse_partner(pair).unwrap();
    assert!(expand_grouping(pair).unwrap().gamma == partner.partner.gamma);

    let criteria: [Criterion; 9] = [
        ("C1 velocity quantization", velocity_quantization),
        ("C2 kink exactness", kink_exactness),
        ("C3 partner identities", partner_identities),
        ("C4 erratum resolution", erratum_resolution),
        ("C5 rate-ratio law", rate_ratio_law),
        ("C6 flow-integration oracle", flow_oracle),
        ("C7 front speed", front_speed),
        ("C8 obstruction check", obstruction),
        ("C9 figure crossings", figure_crossings),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name}: {why}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
