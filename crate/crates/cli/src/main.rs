use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use kinkpair::factorizer::{expand_grouping, factorize, FactorizationPair, CONDITION_TOL};
use kinkpair::figures::FigureData;
use kinkpair::kinks::kink_csv;
use kinkpair::pipeline::{run_preset, PresetReport, PresetRun, RunOptions, RESIDUAL_POINTS, RESIDUAL_WIDTHS};
use kinkpair::verify::{rk4_flow, FrontSimConfig, Trajectory};
use kinkpair::{Execution, Exponent, Family, GammaSign, KinkProfile, PowerPoly, Preset, Realization};

/// RK4 step and sup-norm bound used by `verify`.
const FLOW_STEP: f64 = 1e-3;
const FLOW_TOL: f64 = 1e-8;

#[derive(Parser)]
#[command(name = "kinkpair", version, about = "Factorized kinks and their partner equations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Factor F(u)/u into bracket pairs and report the admissible velocities.
    Factor(FactorArgs),
    /// Closed-form kink of a preset and its residual.
    Kink(Common),
    /// Reversed-bracket partner equation and its kink.
    Partner(Common),
    /// Residuals plus an RK4 integration of the kink flows.
    Verify(Common),
    /// Reaction-diffusion runs from the exact kinks; fitted front speeds.
    Simulate(SimArgs),
    /// CSV and SVG of the kink and its partner side by side.
    Figures(Common),
}

#[derive(Args, Clone, Default)]
struct Common {
    /// fisher(N), mt6, dto(A,N), fhn(A,BRANCH), newell_whitehead
    #[arg(long)]
    preset: Option<String>,
    /// Kink centre.
    #[arg(long, allow_negative_numbers = true)]
    xi0: Option<f64>,
    /// Sign of the velocity.
    #[arg(long, value_enum)]
    branch: Option<Branch>,
    /// Directory for CSV/SVG output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print a one-line JSON record instead of text.
    #[arg(long)]
    json: bool,
    /// JSON file with the same fields as the flags; flags take precedence.
    #[arg(long)]
    scenario: Option<PathBuf>,
}

#[derive(Args)]
struct FactorArgs {
    #[command(flatten)]
    common: Common,
    /// Custom F(u)/u, e.g. "1 - u^{3/2}". Requires --family.
    #[arg(long, allow_hyphen_values = true)]
    f_over_u: Option<String>,
    /// fisher:N, dto:A,N or quadratic:R1,R2
    #[arg(long)]
    family: Option<String>,
}

#[derive(Args)]
struct SimArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, allow_negative_numbers = true)]
    x_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    x_max: Option<f64>,
    #[arg(long)]
    dx: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    t_final: Option<f64>,
    #[arg(long)]
    sample_interval: Option<f64>,
    /// Run the stepper on one thread.
    #[arg(long)]
    sequential: bool,
    /// Also write the full field at every sample time.
    #[arg(long)]
    snapshots: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Branch {
    Positive,
    Negative,
}

impl From<Branch> for GammaSign {
    fn from(b: Branch) -> Self {
        match b {
            Branch::Positive => GammaSign::Positive,
            Branch::Negative => GammaSign::Negative,
        }
    }
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct Scenario {
    preset: Option<String>,
    xi0: Option<f64>,
    branch: Option<Branch>,
    out: Option<PathBuf>,
    json: Option<bool>,
    f_over_u: Option<String>,
    family: Option<String>,
    x_min: Option<f64>,
    x_max: Option<f64>,
    dx: Option<f64>,
    dt: Option<f64>,
    t_final: Option<f64>,
    sample_interval: Option<f64>,
    sequential: Option<bool>,
    snapshots: Option<bool>,
}

/// Flags merged over the scenario file.
struct Settings {
    preset: Option<String>,
    xi0: f64,
    branch: GammaSign,
    out: Option<PathBuf>,
    json: bool,
    scenario: Scenario,
}

impl Settings {
    fn resolve(flags: &Common) -> Result<Self> {
        let scenario = match &flags.scenario {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .with_context(|| format!("reading scenario {}", path.display()))?;
                serde_json::from_str(&text)
                    .with_context(|| format!("parsing scenario {}", path.display()))?
            }
            None => Scenario::default(),
        };
        Ok(Settings {
            preset: flags.preset.clone().or_else(|| scenario.preset.clone()),
            xi0: flags.xi0.or(scenario.xi0).unwrap_or(0.0),
            branch: flags.branch.or(scenario.branch).unwrap_or(Branch::Positive).into(),
            out: flags.out.clone().or_else(|| scenario.out.clone()),
            json: flags.json || scenario.json.unwrap_or(false),
            scenario,
        })
    }

    fn preset(&self) -> Result<Preset> {
        let name = self.preset.as_deref().ok_or_else(|| anyhow!("--preset is required"))?;
        Ok(name.parse()?)
    }

    fn options(&self) -> RunOptions {
        RunOptions {
            xi0: self.xi0,
            gamma_sign: self.branch,
            simulate: None,
        }
    }

    fn run(&self, opts: &RunOptions) -> Result<PresetRun> {
        let preset = self.preset()?;
        run_preset(&preset, opts).with_context(|| format!("running {preset}"))
    }
}

/// File-name stem for a preset: `dto(0.25,4)` becomes `dto-0.25-4`.
fn slug(preset: &Preset) -> String {
    let raw: String = preset
        .to_string()
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '.' || c == '_' { c } else { '-' })
        .collect();
    raw.trim_matches('-').replace("--", "-")
}

struct Output {
    dir: Option<PathBuf>,
    files: Vec<String>,
}

impl Output {
    fn new(dir: Option<PathBuf>) -> Result<Self> {
        if let Some(d) = &dir {
            fs::create_dir_all(d).with_context(|| format!("creating {}", d.display()))?;
        }
        Ok(Output { dir, files: Vec::new() })
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        if let Some(dir) = &self.dir {
            let path = dir.join(name);
            fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
            self.files.push(path.display().to_string());
        }
        Ok(())
    }
}

#[derive(Serialize)]
struct Record<'a, E: Serialize> {
    command: &'a str,
    #[serde(flatten)]
    report: PresetReport,
    #[serde(flatten)]
    extra: E,
    files: Vec<String>,
}

#[derive(Serialize)]
struct NoExtra {}

fn emit<E: Serialize>(command: &str, settings: &Settings, run: &PresetRun, extra: E, out: Output, lines: &[String]) -> Result<bool> {
    let report = run.report();
    let passed = report.passed;
    if settings.json {
        let record = Record { command, report, extra, files: out.files };
        println!("{}", serde_json::to_string(&record)?);
    } else {
        for line in lines {
            println!("{line}");
        }
        for f in &out.files {
            println!("wrote {f}");
        }
        let partner = report
            .partner_residual
            .as_ref()
            .map_or("n/a".to_string(), |r| format!("{:.3e}", r.max_abs_residual));
        println!(
            "summary command={command} preset={} gamma={:.15} residual={:.3e} partner_residual={partner} passed={passed}",
            report.preset, report.gamma, report.residual.max_abs_residual
        );
    }
    Ok(passed)
}

/// `xi - c` with the sign folded in.
fn offset(shift: f64) -> String {
    if shift == 0.0 {
        "xi".into()
    } else if shift < 0.0 {
        format!("xi + {}", -shift)
    } else {
        format!("xi - {shift}")
    }
}

fn describe_kink(label: &str, k: &KinkProfile) -> Vec<String> {
    let h = k.to_hyperbolic();
    vec![
        format!(
            "{label}: u = {}({:.15}/(1 {} exp({:.15}({}))))^{}",
            if k.realization == Realization::Reflected { "-" } else { "" },
            k.amplitude,
            match k.branch {
                kinkpair::KinkBranch::Plus => "+",
                kinkpair::KinkBranch::Minus => "-",
            },
            k.rate,
            offset(k.shift),
            k.inv_exponent
        ),
        format!(
            "{label}: u = {:.15} (1/2 - 1/2 {}({:.15}({})))^{}  [{:?}]",
            h.prefactor,
            match h.function {
                kinkpair::kinks::Hyperbolic::Tanh => "tanh",
                kinkpair::kinks::Hyperbolic::Coth => "coth",
            },
            h.half_rate,
            offset(h.shift),
            h.power,
            k.realization
        ),
    ]
}

fn residual_grid_csv(k: &KinkProfile) -> Result<String> {
    let w = RESIDUAL_WIDTHS * k.natural_width();
    Ok(kink_csv(k, k.shift - w, k.shift + w, RESIDUAL_POINTS)?)
}

fn cmd_kink(flags: &Common) -> Result<bool> {
    let s = Settings::resolve(flags)?;
    let run = s.run(&s.options())?;
    let mut out = Output::new(s.out.clone())?;
    out.write(&format!("{}_kink.csv", slug(&run.preset)), &residual_grid_csv(&run.kink)?)?;
    let mut lines = vec![
        format!("ode: {}", run.ode),
        format!("flow: u' = ({}) u", run.pair.phi1),
    ];
    lines.extend(describe_kink("kink", &run.kink));
    emit("kink", &s, &run, NoExtra {}, out, &lines)
}

fn cmd_partner(flags: &Common) -> Result<bool> {
    let s = Settings::resolve(flags)?;
    let run = s.run(&s.options())?;
    let mut out = Output::new(s.out.clone())?;
    out.write(&format!("{}_partner_kink.csv", slug(&run.preset)), &residual_grid_csv(&run.partner_kink)?)?;
    let mut lines = vec![
        format!("ode: {}", run.ode),
        format!("partner: {}", run.partner.partner),
        format!("partner flow: u' = ({}) u", run.partner.compatible_phi),
        format!("rate ratio: {}", run.rate_ratio()),
    ];
    lines.extend(describe_kink("partner kink", &run.partner_kink));
    emit("partner", &s, &run, NoExtra {}, out, &lines)
}

/// RK4 from the kink centre out to ±10 widths; returns the sup error and
/// the trajectory joined in increasing ξ.
fn flow_check(phi: &PowerPoly, kink: &KinkProfile) -> Result<(f64, Trajectory)> {
    let w = RESIDUAL_WIDTHS * kink.natural_width();
    let u0 = kink.value(kink.shift)?;
    let left = rk4_flow(phi, u0, kink.shift, kink.shift - w, FLOW_STEP)?;
    let right = rk4_flow(phi, u0, kink.shift, kink.shift + w, FLOW_STEP)?;
    let err = left.sup_error(kink)?.max(right.sup_error(kink)?);
    let mut joined = Trajectory::default();
    for (xi, u) in left.xi.iter().zip(&left.u).rev().chain(right.xi.iter().zip(&right.u).skip(1)) {
        joined.xi.push(*xi);
        joined.u.push(*u);
    }
    Ok((err, joined))
}

#[derive(Serialize)]
struct VerifyExtra {
    flow_sup_error: f64,
    partner_flow_sup_error: Option<f64>,
    negative_control_residual: Option<f64>,
}

fn cmd_verify(flags: &Common) -> Result<bool> {
    let s = Settings::resolve(flags)?;
    let run = s.run(&s.options())?;
    let mut out = Output::new(s.out.clone())?;
    let stem = slug(&run.preset);
    let (flow_err, traj) = flow_check(&run.pair.phi1, &run.kink)?;
    out.write(&format!("{stem}_flow.csv"), &traj.to_csv())?;
    let partner_flow = match run.partner_kink.realization {
        Realization::Formal => None,
        _ => {
            let (err, traj) = flow_check(&run.partner.compatible_phi, &run.partner_kink)?;
            out.write(&format!("{stem}_partner_flow.csv"), &traj.to_csv())?;
            Some(err)
        }
    };
    let negative = run.negative_control.as_ref().map(|r| r.max_abs_residual);
    let lines = vec![
        format!("ode: {}", run.ode),
        format!("kink residual: {:.3e} at xi = {}", run.residual.max_abs_residual, run.residual.argmax_xi),
        format!("rk4 flow sup error: {flow_err:.3e}"),
        format!("partner rk4 flow sup error: {}", partner_flow.map_or("n/a".into(), |e| format!("{e:.3e}"))),
        format!("original kink in partner equation: {}", negative.map_or("n/a".into(), |e| format!("{e:.3e}"))),
        format!("alternate factorization round trip: {:.3e}", run.alternate_roundtrip_error),
    ];
    let flows_ok = flow_err < FLOW_TOL && partner_flow.is_none_or(|e| e < FLOW_TOL);
    let extra = VerifyExtra {
        flow_sup_error: flow_err,
        partner_flow_sup_error: partner_flow,
        negative_control_residual: negative,
    };
    Ok(emit("verify", &s, &run, extra, out, &lines)? && flows_ok)
}

#[derive(Serialize)]
struct SimExtra {
    original_fit_residual: f64,
    partner_fit_residual: Option<f64>,
    front_level: f64,
}

fn cmd_simulate(args: &SimArgs) -> Result<bool> {
    let s = Settings::resolve(&args.common)?;
    let sc = &s.scenario;
    let d = FrontSimConfig::default();
    let sequential = args.sequential || sc.sequential.unwrap_or(false);
    let snapshots = args.snapshots || sc.snapshots.unwrap_or(false);
    let cfg = FrontSimConfig {
        x_min: args.x_min.or(sc.x_min).unwrap_or(d.x_min),
        x_max: args.x_max.or(sc.x_max).unwrap_or(d.x_max),
        dx: args.dx.or(sc.dx).unwrap_or(d.dx),
        dt: args.dt.or(sc.dt).unwrap_or(d.dt),
        t_final: args.t_final.or(sc.t_final).unwrap_or(d.t_final),
        sample_interval: args.sample_interval.or(sc.sample_interval).unwrap_or(d.sample_interval),
        keep_snapshots: snapshots,
        execution: if sequential { Execution::Sequential } else { Execution::default() },
    };
    let opts = RunOptions { simulate: Some(cfg), ..s.options() };
    let run = s.run(&opts)?;
    let fronts = run.fronts.as_ref().expect("simulation requested");
    let mut out = Output::new(s.out.clone())?;
    let stem = slug(&run.preset);
    out.write(&format!("{stem}_front.csv"), &fronts.original.front_csv())?;
    if snapshots {
        out.write(&format!("{stem}_field.csv"), &fronts.original.field_csv())?;
    }
    let mut lines = vec![
        format!("ode: {}", run.ode),
        format!("partner: {}", run.partner.partner),
        format!(
            "grid: [{}, {}] dx = {} dt = {} T = {}",
            cfg.x_min, cfg.x_max, cfg.dx, cfg.dt, cfg.t_final
        ),
        format!(
            "original front speed: {:.6} (rms {:.2e})",
            fronts.original.fitted_speed, fronts.original.fit_residual
        ),
    ];
    if let Some(p) = &fronts.partner {
        out.write(&format!("{stem}_partner_front.csv"), &p.front_csv())?;
        if snapshots {
            out.write(&format!("{stem}_partner_field.csv"), &p.field_csv())?;
        }
        lines.push(format!("partner front speed: {:.6} (rms {:.2e})", p.fitted_speed, p.fit_residual));
    } else {
        lines.push("partner front: no real partner kink".into());
    }
    let extra = SimExtra {
        original_fit_residual: fronts.original.fit_residual,
        partner_fit_residual: fronts.partner.as_ref().map(|p| p.fit_residual),
        front_level: fronts.original.level,
    };
    emit("simulate", &s, &run, extra, out, &lines)
}

fn cmd_figures(flags: &Common) -> Result<bool> {
    let s = Settings::resolve(flags)?;
    let run = s.run(&s.options())?;
    let fig = FigureData::from_run(&run)?;
    let dir = s.out.clone().unwrap_or_else(|| PathBuf::from("."));
    let mut out = Output::new(Some(dir))?;
    let stem = slug(&run.preset);
    out.write(&format!("{stem}.csv"), &fig.to_csv())?;
    out.write(&format!("{stem}.svg"), &fig.to_svg())?;
    let lines = vec![format!("{} points over xi0 +/- {} widths", fig.xi.len(), kinkpair::figures::FIGURE_WIDTHS)];
    emit("figures", &s, &run, NoExtra {}, out, &lines)
}

fn parse_exponent(s: &str) -> Result<Exponent> {
    let s = s.trim();
    let (p, q) = s.split_once('/').unwrap_or((s, "1"));
    Ok(Exponent::new(p.trim().parse()?, q.trim().parse()?)?)
}

fn parse_family(s: &str) -> Result<Family> {
    let (name, args) = s.split_once(':').ok_or_else(|| anyhow!("family must look like name:args, got {s:?}"))?;
    let args: Vec<&str> = args.split(',').map(str::trim).collect();
    match (name.trim().to_ascii_lowercase().as_str(), args.as_slice()) {
        ("fisher", [n]) => Ok(Family::Fisher { n: parse_exponent(n)? }),
        ("dto", [a, n]) => Ok(Family::Dto { a: a.parse()?, n: parse_exponent(n)? }),
        ("quadratic", [r1, r2]) => Ok(Family::Quadratic { roots: [r1.parse()?, r2.parse()?] }),
        _ => bail!("unknown family {s:?}; expected fisher:N, dto:A,N or quadratic:R1,R2"),
    }
}

#[derive(Serialize)]
struct FactorPairRecord {
    phi1: String,
    phi2: String,
    scale_a: f64,
    gamma: f64,
    branch: GammaSign,
    condition_residual: f64,
    nonlinearity: String,
}

#[derive(Serialize)]
struct FactorRecord {
    command: &'static str,
    f_over_u: String,
    pairs: Vec<FactorPairRecord>,
    passed: bool,
}

fn cmd_factor(args: &FactorArgs) -> Result<bool> {
    let s = Settings::resolve(&args.common)?;
    let custom = args.f_over_u.clone().or_else(|| s.scenario.f_over_u.clone());
    let (f_over_u, pairs): (PowerPoly, Vec<FactorizationPair>) = match custom {
        Some(text) => {
            let family = args
                .family
                .clone()
                .or_else(|| s.scenario.family.clone())
                .ok_or_else(|| anyhow!("--f-over-u needs --family"))?;
            let poly: PowerPoly = text.parse()?;
            let pairs = factorize(&poly, parse_family(&family)?)?;
            (poly, pairs)
        }
        None => {
            let preset = s.preset()?;
            (preset.f_over_u(), factorize(&preset.f_over_u(), preset.family())?)
        }
    };
    let pairs: Vec<FactorizationPair> = pairs.into_iter().filter(|p| p.branch == s.branch).collect();
    if pairs.is_empty() {
        bail!("no factorization of {f_over_u} on the {} branch", s.branch);
    }
    let mut records = Vec::new();
    for p in &pairs {
        let ode = expand_grouping(p)?;
        records.push(FactorPairRecord {
            phi1: p.phi1.to_string(),
            phi2: p.phi2.to_string(),
            scale_a: p.scale_a,
            gamma: p.gamma,
            branch: p.branch,
            condition_residual: p.condition_residual(),
            nonlinearity: ode.nonlinearity.to_string(),
        });
    }
    let passed = records.iter().all(|r| r.condition_residual < CONDITION_TOL);
    if s.json {
        let rec = FactorRecord { command: "factor", f_over_u: f_over_u.to_string(), pairs: records, passed };
        println!("{}", serde_json::to_string(&rec)?);
    } else {
        println!("F(u)/u = {f_over_u}");
        for r in &records {
            println!(
                "[D - ({})][D - ({})]u = 0  a = {:.15}  gamma = {:.15}  F(u) = {}",
                r.phi2, r.phi1, r.scale_a, r.gamma, r.nonlinearity
            );
        }
        let gammas: Vec<String> = records.iter().map(|r| format!("{:.15}", r.gamma)).collect();
        println!(
            "summary command=factor f_over_u=\"{f_over_u}\" pairs={} gamma={} passed={passed}",
            records.len(),
            gammas.join(",")
        );
    }
    Ok(passed)
}

fn dispatch(cli: &Cli) -> Result<bool> {
    match &cli.command {
        Command::Factor(a) => cmd_factor(a),
        Command::Kink(c) => cmd_kink(c),
        Command::Partner(c) => cmd_partner(c),
        Command::Verify(c) => cmd_verify(c),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Figures(c) => cmd_figures(c),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slugs_are_file_safe() {
        assert_eq!(slug(&Preset::Fisher { n: 1 }), "fisher-1");
        assert_eq!(slug(&Preset::Dto { a: 0.25, n: 4 }), "dto-0.25-4");
        assert_eq!(slug(&Preset::NewellWhitehead), "newell_whitehead");
    }

    #[test]
    fn families_parse() {
        assert_eq!(parse_family("fisher:3/2").unwrap(), Family::Fisher { n: Exponent::new(3, 2).unwrap() });
        assert_eq!(
            parse_family("dto:0.5,6").unwrap(),
            Family::Dto { a: 0.5, n: Exponent::integer(6) }
        );
        assert!(parse_family("heat:1").is_err());
        assert!(parse_family("fisher").is_err());
    }

    #[test]
    fn scenario_rejects_unknown_fields() {
        assert!(serde_json::from_str::<Scenario>(r#"{"preset":"mt6","speed":3}"#).is_err());
        let sc: Scenario = serde_json::from_str(r#"{"preset":"mt6","branch":"negative"}"#).unwrap();
        assert!(sc.branch == Some(Branch::Negative));
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
