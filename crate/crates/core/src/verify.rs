//! Numerical checks: closed-form residuals, RK4 integration of the flows and
//! of the full second-order equation, and an explicit 1D reaction-diffusion
//! solver that measures front speed.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::{argmax, fill_indexed, Execution};
use crate::factorizer::OdeSpec;
use crate::kinks::{flow_fixed_point, KinkProfile};
use crate::powerpoly::PowerPoly;

/// Threshold used throughout for "the kink solves the equation".
pub const RESIDUAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    pub xi_min: f64,
    pub xi_max: f64,
    pub count: usize,
}

impl Grid {
    pub fn new(xi_min: f64, xi_max: f64, count: usize) -> Result<Self> {
        if count < 3 {
            return Err(Error::Domain(format!("grid needs at least 3 points, got {count}")));
        }
        if !(xi_max > xi_min) {
            return Err(Error::Domain(format!("empty grid [{xi_min}, {xi_max}]")));
        }
        Ok(Grid { xi_min, xi_max, count })
    }

    /// `ξ0 ± widths/|rate|`.
    pub fn around(kink: &KinkProfile, widths: f64, count: usize) -> Result<Self> {
        let half = widths * kink.natural_width();
        Grid::new(kink.shift - half, kink.shift + half, count)
    }

    pub fn point(&self, i: usize) -> f64 {
        self.xi_min + (self.xi_max - self.xi_min) * i as f64 / (self.count - 1) as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    pub max_abs_residual: f64,
    pub argmax_xi: f64,
    pub grid: Grid,
}

impl ResidualReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_abs_residual < tol
    }
}

/// `max |u'' + γu' + F(u)|` over the grid, with `u', u''` from the closed form.
pub fn residual_max(ode: &OdeSpec, kink: &KinkProfile, grid: Grid) -> Result<ResidualReport> {
    residual_max_with(ode, kink, grid, Execution::default())
}

pub fn residual_max_with(
    ode: &OdeSpec,
    kink: &KinkProfile,
    grid: Grid,
    exec: Execution,
) -> Result<ResidualReport> {
    let (i, r) = argmax(exec, grid.count, |i| {
        let s = kink.eval(grid.point(i))?;
        Ok(ode.residual(s.u, s.du, s.d2u)?.abs())
    })?;
    Ok(ResidualReport {
        max_abs_residual: r,
        argmax_xi: grid.point(i),
        grid,
    })
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub xi: Vec<f64>,
    pub u: Vec<f64>,
    /// `u'`, filled by second-order integration only.
    pub du: Vec<f64>,
}

impl Trajectory {
    /// Sup-norm distance to a closed-form kink at the trajectory's nodes.
    pub fn sup_error(&self, kink: &KinkProfile) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for (&xi, &u) in self.xi.iter().zip(&self.u) {
            worst = worst.max((u - kink.value(xi)?).abs());
        }
        Ok(worst)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(if self.du.is_empty() { "xi,u\n" } else { "xi,u,du\n" });
        for i in 0..self.xi.len() {
            write!(out, "{:.16e},{:.16e}", self.xi[i], self.u[i]).expect("write to String");
            if let Some(d) = self.du.get(i) {
                write!(out, ",{d:.16e}").expect("write to String");
            }
            out.push('\n');
        }
        out
    }
}

fn step_count(xi_start: f64, xi_end: f64, step: f64) -> Result<(usize, f64)> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::Domain(format!("step must be positive, got {step}")));
    }
    let span = xi_end - xi_start;
    let n = (span.abs() / step).round().max(1.0) as usize;
    Ok((n, span / n as f64))
}

/// Classical RK4 on `u' = φ(u)·u` from `xi_start` to `xi_end`. The step is
/// adjusted to land exactly on `xi_end`.
pub fn rk4_flow(phi: &PowerPoly, u0: f64, xi_start: f64, xi_end: f64, step: f64) -> Result<Trajectory> {
    let (n, h) = step_count(xi_start, xi_end, step)?;
    // Invariant interval between 0 and the nonzero fixed point.
    let (lo, hi) = match flow_fixed_point(phi) {
        Ok(star) => (star.min(0.0), star.max(0.0)),
        Err(_) if u0 >= 0.0 => (0.0, f64::INFINITY),
        Err(_) => (f64::NEG_INFINITY, 0.0),
    };
    let guard = |xi: f64, u: f64| {
        if !u.is_finite() || u < lo - 1e-6 || u > hi + 1e-6 {
            Err(Error::Instability { xi, value: u })
        } else {
            Ok(())
        }
    };
    guard(xi_start, u0)?;

    let f = |u: f64| -> Result<f64> { Ok(phi.eval(u)? * u) };
    let mut traj = Trajectory {
        xi: Vec::with_capacity(n + 1),
        u: Vec::with_capacity(n + 1),
        du: Vec::new(),
    };
    let mut u = u0;
    traj.xi.push(xi_start);
    traj.u.push(u);
    for k in 1..=n {
        let k1 = f(u)?;
        let k2 = f(u + 0.5 * h * k1)?;
        let k3 = f(u + 0.5 * h * k2)?;
        let k4 = f(u + h * k3)?;
        u += h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0;
        let xi = xi_start + h * k as f64;
        guard(xi, u)?;
        traj.xi.push(xi);
        traj.u.push(u);
    }
    Ok(traj)
}

/// Classical RK4 on the system `u' = v`, `v' = −γv − F(u)`.
pub fn rk4_second_order(
    ode: &OdeSpec,
    u0: f64,
    v0: f64,
    xi_start: f64,
    xi_end: f64,
    step: f64,
) -> Result<Trajectory> {
    const BLOW_UP: f64 = 1e6;
    let (n, h) = step_count(xi_start, xi_end, step)?;
    let accel = |u: f64, v: f64| -> Result<f64> { Ok(-ode.gamma * v - ode.nonlinearity.eval(u)?) };
    let mut traj = Trajectory {
        xi: Vec::with_capacity(n + 1),
        u: Vec::with_capacity(n + 1),
        du: Vec::with_capacity(n + 1),
    };
    let (mut u, mut v) = (u0, v0);
    traj.xi.push(xi_start);
    traj.u.push(u);
    traj.du.push(v);
    for k in 1..=n {
        let (ku1, kv1) = (v, accel(u, v)?);
        let (ku2, kv2) = (v + 0.5 * h * kv1, accel(u + 0.5 * h * ku1, v + 0.5 * h * kv1)?);
        let (ku3, kv3) = (v + 0.5 * h * kv2, accel(u + 0.5 * h * ku2, v + 0.5 * h * kv2)?);
        let (ku4, kv4) = (v + h * kv3, accel(u + h * ku3, v + h * kv3)?);
        u += h * (ku1 + 2.0 * ku2 + 2.0 * ku3 + ku4) / 6.0;
        v += h * (kv1 + 2.0 * kv2 + 2.0 * kv3 + kv4) / 6.0;
        let xi = xi_start + h * k as f64;
        if !(u.abs() <= BLOW_UP && v.abs() <= BLOW_UP) {
            return Err(Error::Instability { xi, value: u });
        }
        traj.xi.push(xi);
        traj.u.push(u);
        traj.du.push(v);
    }
    Ok(traj)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrontSimConfig {
    pub x_min: f64,
    pub x_max: f64,
    pub dx: f64,
    pub dt: f64,
    pub t_final: f64,
    /// Time between recorded front positions.
    pub sample_interval: f64,
    pub keep_snapshots: bool,
    pub execution: Execution,
}

impl Default for FrontSimConfig {
    fn default() -> Self {
        FrontSimConfig {
            x_min: -40.0,
            x_max: 40.0,
            dx: 0.05,
            dt: 1e-3,
            t_final: 5.0,
            sample_interval: 0.05,
            keep_snapshots: false,
            execution: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrontSimResult {
    pub times: Vec<f64>,
    pub front_positions: Vec<f64>,
    pub fitted_speed: f64,
    /// RMS deviation of the positions from the fitted line.
    pub fit_residual: f64,
    pub grid: (f64, f64, f64),
    pub dt: f64,
    /// Level whose crossing defines the front.
    pub level: f64,
    #[serde(skip)]
    pub snapshots: Vec<Vec<f64>>,
}

impl FrontSimResult {
    pub fn front_csv(&self) -> String {
        let mut out = String::from("t,front_position\n");
        for (t, x) in self.times.iter().zip(&self.front_positions) {
            writeln!(out, "{t:.16e},{x:.16e}").expect("write to String");
        }
        out
    }

    /// `t,x,u` rows for every kept snapshot.
    pub fn field_csv(&self) -> String {
        let (x_min, _, dx) = self.grid;
        let mut out = String::from("t,x,u\n");
        for (t, snap) in self.times.iter().zip(&self.snapshots) {
            for (i, u) in snap.iter().enumerate() {
                let x = x_min + dx * i as f64;
                writeln!(out, "{t:.16e},{x:.16e},{u:.16e}").expect("write to String");
            }
        }
        out
    }
}

/// One forward-Euler step of `u_t = u_xx + F(u)` on the interior nodes; the
/// two boundary values are copied unchanged.
pub fn ftcs_step(
    reaction: &PowerPoly,
    src: &[f64],
    dst: &mut [f64],
    dx: f64,
    dt: f64,
    exec: Execution,
) -> Result<()> {
    let n = src.len();
    assert_eq!(n, dst.len());
    assert!(n >= 3, "need at least one interior node");
    let coef = dt / (dx * dx);
    dst[0] = src[0];
    dst[n - 1] = src[n - 1];
    fill_indexed(exec, &mut dst[1..n - 1], 1, |i| {
        let lap = src[i + 1] - 2.0 * src[i] + src[i - 1];
        Ok(src[i] + coef * lap + dt * reaction.eval(src[i])?)
    })
}

/// First crossing of `level`, linearly interpolated, as a fractional index.
fn crossing(u: &[f64], level: f64) -> Option<f64> {
    u.windows(2).enumerate().find_map(|(i, w)| {
        let (a, b) = (w[0] - level, w[1] - level);
        if a == 0.0 {
            Some(i as f64)
        } else if a * b < 0.0 || b == 0.0 {
            Some(i as f64 + a / (a - b))
        } else {
            None
        }
    })
}

fn least_squares(ts: &[f64], xs: &[f64]) -> (f64, f64) {
    let n = ts.len() as f64;
    let tm = ts.iter().sum::<f64>() / n;
    let xm = xs.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (t, x) in ts.iter().zip(xs) {
        sxx += (t - tm) * (t - tm);
        sxy += (t - tm) * (x - xm);
    }
    let slope = sxy / sxx;
    let rms = (ts
        .iter()
        .zip(xs)
        .map(|(t, x)| (x - xm - slope * (t - tm)).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    (slope, rms)
}

/// Relative departure from the asymptote tolerated next to a boundary.
pub const BOUNDARY_TOL: f64 = 1e-3;

/// Evolves `u_t = u_xx + F(u)` from the exact kink profile and tracks the
/// crossing of the kink's own midpoint value `u(ξ0)`. Boundaries are pinned
/// to the kink's asymptotic states. The speed is the least-squares slope of
/// position against time over the second half of the run.
pub fn simulate_front(
    reaction: &PowerPoly,
    initial: &KinkProfile,
    cfg: &FrontSimConfig,
) -> Result<FrontSimResult> {
    let bound = cfg.dx * cfg.dx / 2.0;
    if !(cfg.dt > 0.0 && cfg.dt <= bound) {
        return Err(Error::Cfl { dt: cfg.dt, bound });
    }
    if !(cfg.dx > 0.0 && cfg.x_max > cfg.x_min && cfg.t_final > 0.0 && cfg.sample_interval > 0.0) {
        return Err(Error::Domain("invalid simulation grid or horizon".into()));
    }
    let cells = ((cfg.x_max - cfg.x_min) / cfg.dx).round() as usize;
    let n = cells + 1;
    if n < 16 {
        return Err(Error::Domain("simulation grid needs at least 16 nodes".into()));
    }
    let x = |i: usize| cfg.x_min + cfg.dx * i as f64;

    let (left, right) = initial.asymptotes();
    let mut cur = vec![0.0; n];
    fill_indexed(Execution::Sequential, &mut cur, 0, |i| initial.value(x(i)))?;
    cur[0] = left;
    cur[n - 1] = right;
    let mut next = cur.clone();

    let level = initial.value(initial.shift)?;
    let margin = 5.0;
    // The run is void once the field next to either pinned boundary departs
    // from its asymptote: the boundary then shapes the front.
    let edge = margin as usize;
    let edge_tol = BOUNDARY_TOL * (left - right).abs().max(f64::MIN_POSITIVE);
    let mut times = Vec::new();
    let mut fronts = Vec::new();
    let mut snapshots = Vec::new();
    let mut record = |t: f64, u: &[f64]| -> Result<()> {
        let pos = crossing(u, level).ok_or(Error::TruncatedRun { time: t })?;
        if pos < margin
            || pos > (n - 1) as f64 - margin
            || (u[edge] - left).abs() > edge_tol
            || (u[n - 1 - edge] - right).abs() > edge_tol
        {
            return Err(Error::TruncatedRun { time: t });
        }
        times.push(t);
        fronts.push(cfg.x_min + cfg.dx * pos);
        if cfg.keep_snapshots {
            snapshots.push(u.to_vec());
        }
        Ok(())
    };
    record(0.0, &cur)?;

    let steps = (cfg.t_final / cfg.dt).round() as usize;
    let stride = ((cfg.sample_interval / cfg.dt).round() as usize).max(1);
    for k in 1..=steps {
        ftcs_step(reaction, &cur, &mut next, cfg.dx, cfg.dt, cfg.execution)?;
        std::mem::swap(&mut cur, &mut next);
        if k % stride == 0 || k == steps {
            record(k as f64 * cfg.dt, &cur)?;
        }
    }

    let half = cfg.t_final / 2.0;
    let start = times.iter().position(|&t| t >= half).unwrap_or(0);
    if times.len() - start < 2 {
        return Err(Error::Domain("too few samples in the second half to fit a speed".into()));
    }
    let (fitted_speed, fit_residual) = least_squares(&times[start..], &fronts[start..]);
    Ok(FrontSimResult {
        times,
        front_positions: fronts,
        fitted_speed,
        fit_residual,
        grid: (cfg.x_min, cfg.x_min + cfg.dx * cells as f64, cfg.dx),
        dt: cfg.dt,
        level,
        snapshots,
    })
}
