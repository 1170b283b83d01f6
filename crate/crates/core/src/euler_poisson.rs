//! Radial Euler–Poisson dynamics by characteristics (Poisson coupling
//! γ = n − 2).
//!
//! The enclosed mass m₀(R) = ∫₀^R ρ₀ s^{n−1} ds is carried along X(τ,R),
//! which solves X″ = λτ^{n−4} m₀(R)/X^{n−1}, X(0) = R, X′(0) = 0. The
//! indicator Γ = ∂_R X follows the variational equation
//! Γ″ = λτ^{n−4}(m₀′(R)/X^{n−1} − (n−1)m₀Γ/Xⁿ), Γ(0) = 1, Γ′(0) = 0, and the
//! flow breaks down where Γ first reaches 0.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{ComplexField, Parity, RadialGrid, RealField};
use crate::quadrature::{cubic_segment, cumulative_cubic, gauss_legendre, lagrange4, mapped};

/// m₀ at the grid nodes: cumulative cubic quadrature of ρ r^{n−1}, with the
/// first half cell closed by parity ghosts.
pub fn enclosed_mass(grid: &RadialGrid, rho: &[f64]) -> Vec<f64> {
    let r = grid.nodes();
    let n = grid.n as i32;
    let f: Vec<f64> = rho.iter().zip(r).map(|(v, r)| v * r.powi(n - 1)).collect();
    let s = if grid.n % 2 == 1 { 1.0 } else { -1.0 };
    let head = cubic_segment([-r[1], -r[0], r[0], r[1]], [s * f[1], s * f[0], f[0], f[1]], 0.0, r[0]);
    cumulative_cubic(r, &f, head)
}

/// M₀ = m₀/rⁿ at the grid nodes.
pub fn mean_mass(a0: &ComplexField) -> Vec<f64> {
    let g = &a0.grid;
    let rho: Vec<f64> = a0.values.iter().map(|z| z.norm_sqr()).collect();
    enclosed_mass(g, &rho).iter().zip(g.nodes()).map(|(m, r)| m / r.powi(g.n as i32)).collect()
}

/// 2M₀ − |a₀|² at the grid nodes.
pub fn condition_margin(a0: &ComplexField) -> Vec<f64> {
    mean_mass(a0).iter().zip(&a0.values).map(|(m, z)| 2.0 * m - z.norm_sqr()).collect()
}

/// Local cubic interpolation of cell-centred values, `sign` being the parity
/// used for ghost cells left of the origin.
fn interp(values: &[f64], sign: f64, dr: f64, r: f64) -> f64 {
    let m = values.len() as isize;
    let i0 = (r / dr - 0.5).floor() as isize;
    let s = (i0 - 1).min(m - 4);
    let mut xs = [0.0; 4];
    let mut fs = [0.0; 4];
    for k in 0..4 {
        let j = s + k as isize;
        xs[k] = (j as f64 + 0.5) * dr;
        fs[k] = if j < 0 { sign * values[(-j - 1) as usize] } else { values[j as usize] };
    }
    lagrange4(&xs, &fs, r)
}

type Profile = Arc<dyn Fn(f64) -> (f64, f64) + Send + Sync>;

/// ρ₀ and m₀ as functions of the launch radius.
#[derive(Clone)]
pub struct InitialMass {
    pub n: usize,
    /// Largest admissible launch radius.
    pub r_max: f64,
    /// True when ρ₀ vanishes identically.
    pub zero: bool,
    profile: Profile,
}

impl std::fmt::Debug for InitialMass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("InitialMass").field("n", &self.n).field("r_max", &self.r_max).finish()
    }
}

impl InitialMass {
    /// From a grid amplitude; off-grid radii are served by local cubics.
    pub fn from_field(a0: &ComplexField) -> Result<Self> {
        let g = a0.grid.clone();
        if !a0.is_finite() {
            return Err(Error::InvalidArgument("initial amplitude is not finite".into()));
        }
        let rho: Vec<f64> = a0.values.iter().map(|z| z.norm_sqr()).collect();
        let zero = rho.iter().all(|&v| v == 0.0);
        let m0 = enclosed_mass(&g, &rho);
        let sign_m = if g.n % 2 == 0 { 1.0 } else { -1.0 };
        let dr = g.dr;
        let profile: Profile = Arc::new(move |r| (interp(&rho, 1.0, dr, r), interp(&m0, sign_m, dr, r)));
        Ok(InitialMass { n: g.n, r_max: g.nodes()[g.m - 1], zero, profile })
    }

    /// From a density given in closed form; m₀ by 16-point Gauss panels of
    /// width at most 1/32.
    pub fn from_density(n: usize, rho0: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        let (x, w) = gauss_legendre(16);
        let profile: Profile = Arc::new(move |r: f64| {
            let panels = (32.0 * r).ceil().max(1.0) as usize;
            let mut m = 0.0;
            for p in 0..panels {
                let (a, b) = (r * p as f64 / panels as f64, r * (p + 1) as f64 / panels as f64);
                m += mapped(&x, &w, a, b).map(|(s, ws)| ws * rho0(s) * s.powi(n as i32 - 1)).sum::<f64>();
            }
            (rho0(r), m)
        });
        InitialMass { n, r_max: f64::INFINITY, zero: false, profile }
    }

    /// (ρ₀(R), m₀(R), m₀′(R) = ρ₀R^{n−1}).
    pub fn eval(&self, r: f64) -> Result<(f64, f64, f64)> {
        if !(r > 0.0 && r <= self.r_max * (1.0 + 1e-12)) {
            return Err(Error::InvalidArgument(format!("launch radius {r} outside (0, {}]", self.r_max)));
        }
        let (rho, m) = (self.profile)(r);
        Ok((rho, m, rho * r.powi(self.n as i32 - 1)))
    }
}

/// `k` log-spaced launch radii in [r_lo, r_hi].
pub fn log_radii(r_lo: f64, r_hi: f64, k: usize) -> Vec<f64> {
    if k == 1 {
        return vec![r_lo];
    }
    let (a, b) = (r_lo.ln(), r_hi.ln());
    (0..k).map(|i| (a + (b - a) * i as f64 / (k - 1) as f64).exp()).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    /// Γ reached 0: neighbouring characteristics cross.
    Crossing,
    /// X reached 0: attractive collapse onto the origin.
    Collapse,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct CharEvent {
    pub kind: EventKind,
    pub tau: f64,
    pub r: f64,
}

/// One characteristic: (X, X′, Γ, Γ′).
#[derive(Clone, Copy)]
struct Ray {
    n: i32,
    lambda: f64,
    m0: f64,
    dm0: f64,
}

impl Ray {
    fn rhs(&self, tau: f64, y: [f64; 4]) -> [f64; 4] {
        let w = self.lambda * tau.powi(self.n - 4);
        let xn1 = y[0].powi(self.n - 1);
        [y[1], w * self.m0 / xn1, y[3], w * (self.dm0 / xn1 - (self.n - 1) as f64 * self.m0 * y[2] / (xn1 * y[0]))]
    }

    /// One RK4 step; None if a stage leaves X > 0, or X moves by more than a
    /// quarter of itself (the step is then split).
    fn rk4(&self, t: f64, y: [f64; 4], h: f64) -> Option<[f64; 4]> {
        let ok = |z: &[f64; 4]| z[0] > 0.0 && z.iter().all(|v| v.is_finite());
        let add = |a: [f64; 4], b: [f64; 4], c: f64| [a[0] + c * b[0], a[1] + c * b[1], a[2] + c * b[2], a[3] + c * b[3]];
        let k1 = self.rhs(t, y);
        let y2 = add(y, k1, 0.5 * h);
        if !ok(&y2) {
            return None;
        }
        let k2 = self.rhs(t + 0.5 * h, y2);
        let y3 = add(y, k2, 0.5 * h);
        if !ok(&y3) {
            return None;
        }
        let k3 = self.rhs(t + 0.5 * h, y3);
        let y4 = add(y, k3, h);
        if !ok(&y4) {
            return None;
        }
        let k4 = self.rhs(t + h, y4);
        let mut out = y;
        for i in 0..4 {
            out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        let finite = out.iter().all(|v| v.is_finite());
        (finite && (out[0] - y[0]).abs() <= 0.25 * y[0]).then_some(out)
    }

    /// Advances by h, splitting the step near a collapse; reports the first
    /// event inside the step.
    fn advance(&self, r: f64, t: f64, y: [f64; 4], h: f64, depth: u32) -> ([f64; 4], Option<CharEvent>) {
        match self.rk4(t, y, h) {
            Some(y1) => {
                let crossing = (y1[2] <= 0.0).then(|| hermite_root(t, h, y[2], y[3], y1[2], y1[3]));
                let collapse = (y1[0] <= 0.0).then(|| hermite_root(t, h, y[0], y[1], y1[0], y1[1]));
                let ev = match (crossing, collapse) {
                    (Some(a), Some(b)) if b < a => Some(CharEvent { kind: EventKind::Collapse, tau: b, r }),
                    (Some(a), _) => Some(CharEvent { kind: EventKind::Crossing, tau: a, r }),
                    (None, Some(b)) => Some(CharEvent { kind: EventKind::Collapse, tau: b, r }),
                    (None, None) => None,
                };
                (y1, ev)
            }
            None if depth >= 48 => (y, Some(CharEvent { kind: EventKind::Collapse, tau: t, r })),
            None => {
                let (ym, ev) = self.advance(r, t, y, 0.5 * h, depth + 1);
                if ev.is_some() {
                    return (ym, ev);
                }
                self.advance(r, t + 0.5 * h, ym, 0.5 * h, depth + 1)
            }
        }
    }
}

/// Root of the cubic Hermite interpolant of (f, f′) on [t, t+h], with
/// f(t) > 0 ≥ f(t+h), by bisection.
fn hermite_root(t: f64, h: f64, f0: f64, d0: f64, f1: f64, d1: f64) -> f64 {
    let p = |s: f64| {
        let (s2, s3) = (s * s, s * s * s);
        (2.0 * s3 - 3.0 * s2 + 1.0) * f0 + (s3 - 2.0 * s2 + s) * h * d0 + (-2.0 * s3 + 3.0 * s2) * f1 + (s3 - s2) * h * d1
    };
    let (mut a, mut b) = (0.0, 1.0);
    while (b - a) * h > 1e-13 * (1.0 + t) {
        let c = 0.5 * (a + b);
        if p(c) > 0.0 {
            a = c;
        } else {
            b = c;
        }
    }
    t + 0.5 * (a + b) * h
}

/// Integrates one characteristic; samples every `stride` steps (and the
/// final time) until `tau_end` or its first event.
fn trace_ray(ray: &Ray, r: f64, tau_end: f64, dt: f64, stride: usize) -> (Vec<[f64; 4]>, Option<CharEvent>) {
    let steps = (tau_end / dt).ceil().max(1.0) as usize;
    let h = tau_end / steps as f64;
    let mut y = [r, 0.0, 1.0, 0.0];
    let mut samples = vec![y];
    for k in 0..steps {
        let (y1, ev) = ray.advance(r, k as f64 * h, y, h, 0);
        if ev.is_some() {
            return (samples, ev);
        }
        y = y1;
        if (k + 1) % stride == 0 || k + 1 == steps {
            samples.push(y);
        }
    }
    (samples, None)
}

/// Snapshot of the characteristic bundle at one time.
#[derive(Clone, Debug, Serialize)]
pub struct CharField {
    pub tau: f64,
    pub n: usize,
    pub lambda: f64,
    pub r: Vec<f64>,
    pub rho0: Vec<f64>,
    pub m0: Vec<f64>,
    pub dm0: Vec<f64>,
    pub x: Vec<f64>,
    pub xdot: Vec<f64>,
    pub gamma: Vec<f64>,
    pub gammadot: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct CharTrace {
    /// Snapshots up to the first event (or τ_end).
    pub snapshots: Vec<CharField>,
    /// First event per launch radius.
    pub events: Vec<Option<CharEvent>>,
    /// Earliest event over all radii.
    pub first_event: Option<CharEvent>,
}

impl CharTrace {
    pub fn last(&self) -> &CharField {
        self.snapshots.last().expect("a trace holds at least the initial snapshot")
    }
}

fn check_trace_args(n: usize, tau_end: f64, dt: f64) -> Result<()> {
    if n < 4 {
        return Err(Error::InvalidParams(format!("characteristic tracing needs n >= 4 (tau^(n-4) is not integrable for n = {n})")));
    }
    if !(tau_end > 0.0 && dt > 0.0 && tau_end.is_finite()) {
        return Err(Error::InvalidArgument(format!("need tau_end > 0 and dt > 0, got {tau_end}, {dt}")));
    }
    Ok(())
}

/// Traces all launch radii (in parallel) with RK4 step `dt`, sampling every
/// `stride` steps.
pub fn trace(mass: &InitialMass, radii: &[f64], lambda: f64, tau_end: f64, dt: f64, stride: usize) -> Result<CharTrace> {
    check_trace_args(mass.n, tau_end, dt)?;
    if radii.is_empty() || radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("launch radii must be non-empty and strictly increasing".into()));
    }
    let stride = stride.max(1);
    let data: Vec<(f64, f64, f64)> = radii.iter().map(|&r| mass.eval(r)).collect::<Result<_>>()?;
    let n = mass.n as i32;
    let runs: Vec<(Vec<[f64; 4]>, Option<CharEvent>)> = radii
        .par_iter()
        .zip(&data)
        .map(|(&r, &(_, m0, dm0))| trace_ray(&Ray { n, lambda, m0, dm0 }, r, tau_end, dt, stride))
        .collect();
    let events: Vec<Option<CharEvent>> = runs.iter().map(|(_, e)| *e).collect();
    let first_event = events.iter().flatten().copied().min_by(|a, b| a.tau.total_cmp(&b.tau));
    let count = runs.iter().map(|(s, _)| s.len()).min().unwrap_or(0);
    let steps = (tau_end / dt).ceil().max(1.0) as usize;
    let h = tau_end / steps as f64;
    let snapshots = (0..count)
        .map(|k| {
            let tau = if k * stride >= steps { tau_end } else { (k * stride) as f64 * h };
            let col = |i: usize| runs.iter().map(|(s, _)| s[k][i]).collect::<Vec<f64>>();
            CharField {
                tau,
                n: mass.n,
                lambda,
                r: radii.to_vec(),
                rho0: data.iter().map(|d| d.0).collect(),
                m0: data.iter().map(|d| d.1).collect(),
                dm0: data.iter().map(|d| d.2).collect(),
                x: col(0),
                xdot: col(1),
                gamma: col(2),
                gammadot: col(3),
            }
        })
        .collect();
    Ok(CharTrace { snapshots, events, first_event })
}

/// First event time of the characteristic launched at `r`; characteristics
/// that survive to τ_end get the penalty τ_end + 1 + Γ(τ_end).
fn event_time(mass: &InitialMass, lambda: f64, r: f64, tau_end: f64, dt: f64) -> Result<(f64, Option<CharEvent>)> {
    let (_, m0, dm0) = mass.eval(r)?;
    let (s, ev) = trace_ray(&Ray { n: mass.n as i32, lambda, m0, dm0 }, r, tau_end, dt, usize::MAX);
    Ok(match ev {
        Some(e) => (e.tau, Some(e)),
        None => (tau_end + 1.0 + s.last().map_or(0.0, |y| y[2]), None),
    })
}

/// Golden-section refinement of the earliest event over R between the
/// neighbours of the earliest traced radius.
pub fn refine_first_event(mass: &InitialMass, radii: &[f64], tr: &CharTrace, lambda: f64, tau_end: f64, dt: f64) -> Result<Option<CharEvent>> {
    let Some(first) = tr.first_event else { return Ok(None) };
    let k = radii.iter().position(|&r| r == first.r).unwrap_or(0);
    let (mut a, mut b) = (radii[k.saturating_sub(1)], radii[(k + 1).min(radii.len() - 1)]);
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut best = first;
    let probe = |r: f64, best: &mut CharEvent| -> Result<f64> {
        let (t, ev) = event_time(mass, lambda, r, tau_end, dt)?;
        if let Some(e) = ev {
            if e.tau < best.tau {
                *best = e;
            }
        }
        Ok(t)
    };
    let (mut c, mut d) = (b - phi * (b - a), a + phi * (b - a));
    let (mut fc, mut fd) = (probe(c, &mut best)?, probe(d, &mut best)?);
    while (b - a) > 1e-10 * (1.0 + b.abs()) {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = probe(c, &mut best)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = probe(d, &mut best)?;
        }
    }
    Ok(Some(best))
}

/// Exact n = 4 characteristic quantities.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ClosedForm {
    pub x: f64,
    pub xdot: f64,
    pub gamma: f64,
}

/// X = √(R² + λm₀τ²/R²), X′ = λm₀τ/(R²X),
/// Γ = (1 + λ(½ρ₀ − M₀)τ²)/√(1 + λM₀τ²) with M₀ = m₀/R⁴. None once the
/// radicand is no longer positive (collapse, λ < 0).
pub fn closed_form_n4(r: f64, tau: f64, lambda: f64, m0: f64, rho0: f64) -> Option<ClosedForm> {
    let mean = m0 / r.powi(4);
    let q = 1.0 + lambda * mean * tau * tau;
    if !(r > 0.0 && q > 0.0) {
        return None;
    }
    let x = r * q.sqrt();
    Some(ClosedForm { x, xdot: lambda * m0 * tau / (r * r * x), gamma: (1.0 + lambda * (0.5 * rho0 - mean) * tau * tau) / q.sqrt() })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BlowupStatus {
    Global,
    Blowup,
    Undetermined,
}

#[derive(Clone, Debug, Serialize)]
pub struct BlowupReport {
    pub status: BlowupStatus,
    /// First breakdown time found by tracing (or the closed form for the
    /// margin-only report).
    pub tau_star: Option<f64>,
    pub r_star: Option<f64>,
    pub event: Option<EventKind>,
    /// Upper bound on the breakdown time for λ < 0.
    pub bound_t_star: Option<f64>,
    /// (2/(λ max(2M₀ − |a₀|²)))^{1/2} for n = 4, λ > 0.
    pub tau_c_closed: Option<f64>,
    /// Maximiser of 2M₀ − |a₀|².
    pub r_c: Option<f64>,
    /// max(2M₀ − |a₀|²) vanishes to rounding: global, but only just.
    pub borderline: bool,
    pub condition_margin: Vec<f64>,
}

/// Maximum of a sampled even function, refined by Newton on the quartic
/// through the five nodes around the largest sample.
fn refined_max(grid: &RadialGrid, f: &[f64]) -> (f64, f64) {
    let i = f.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).map_or(0, |(i, _)| i);
    let c = (i as isize).clamp(2, grid.m as isize - 3);
    let at = |j: isize| if j < 0 { f[(-j - 1) as usize] } else { f[j as usize] };
    let (fm2, fm1, f0, f1, f2) = (at(c - 2), at(c - 1), at(c), at(c + 1), at(c + 2));
    let c1 = (fm2 - 8.0 * fm1 + 8.0 * f1 - f2) / 12.0;
    let c2 = (-fm2 + 16.0 * fm1 - 30.0 * f0 + 16.0 * f1 - f2) / 24.0;
    let c3 = (-fm2 + 2.0 * fm1 - 2.0 * f1 + f2) / 12.0;
    let c4 = (fm2 - 4.0 * fm1 + 6.0 * f0 - 4.0 * f1 + f2) / 24.0;
    let p = |s: f64| f0 + s * (c1 + s * (c2 + s * (c3 + s * c4)));
    let mut s = (i as isize - c) as f64;
    for _ in 0..50 {
        let dp = c1 + s * (2.0 * c2 + s * (3.0 * c3 + s * 4.0 * c4));
        let ddp = 2.0 * c2 + s * (6.0 * c3 + s * 12.0 * c4);
        if ddp >= 0.0 {
            break;
        }
        let next = (s - dp / ddp).clamp(-2.0, 2.0);
        if (next - s).abs() < 1e-15 {
            s = next;
            break;
        }
        s = next;
    }
    let r = grid.nodes()[c as usize] + s * grid.dr;
    if p(s) >= f[i] {
        (r, p(s))
    } else {
        (grid.nodes()[i], f[i])
    }
}

/// Global-existence test for n = 4, λ > 0: global iff |a₀|² ≥ 2M₀
/// everywhere; otherwise breakdown at τ_c.
pub fn repulsive_critical_n4(a0: &ComplexField, lambda: f64) -> Result<BlowupReport> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidParams(format!("repulsive criterion needs lambda > 0, got {lambda}")));
    }
    if a0.grid.n != 4 {
        return Err(Error::InvalidParams(format!("repulsive criterion is for n = 4, got n = {}", a0.grid.n)));
    }
    let margin = condition_margin(a0);
    let scale = a0.values.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max);
    let (r_c, max) = refined_max(&a0.grid, &margin);
    let mut rep = BlowupReport {
        status: BlowupStatus::Global,
        tau_star: None,
        r_star: None,
        event: None,
        bound_t_star: None,
        tau_c_closed: None,
        r_c: None,
        borderline: scale > 0.0 && max.abs() <= 1e-12 * scale,
        condition_margin: margin,
    };
    if max > 1e-12 * scale && scale > 0.0 {
        let tau_c = (2.0 / (lambda * max)).sqrt();
        rep.status = BlowupStatus::Blowup;
        rep.tau_star = Some(tau_c);
        rep.r_star = Some(r_c);
        rep.event = Some(EventKind::Crossing);
        rep.tau_c_closed = Some(tau_c);
        rep.r_c = Some(r_c);
    }
    Ok(rep)
}

/// Upper bound T* = ((n−2)(n−3)/(|λ| sup M₀))^{1/(n−2)} on the breakdown
/// time of attractive flows.
pub fn attractive_bound(a0: &ComplexField, lambda: f64) -> Result<f64> {
    let n = a0.grid.n;
    if !(lambda < 0.0) {
        return Err(Error::InvalidParams(format!("attractive bound needs lambda < 0, got {lambda}")));
    }
    if n < 4 {
        return Err(Error::InvalidParams(format!("attractive bound needs n >= 4, got {n}")));
    }
    let sup = mean_mass(a0).into_iter().fold(0.0, f64::max);
    if sup <= 0.0 {
        return Err(Error::InvalidArgument("a0 vanishes identically: no finite bound".into()));
    }
    let nf = n as f64;
    Ok(((nf - 2.0) * (nf - 3.0) / (lambda.abs() * sup)).powf(1.0 / (nf - 2.0)))
}

/// Full breakdown analysis: trace from `mass` (built from `a0`, or from the
/// same density in closed form), refine the first event over R, and attach
/// the closed-form time (n = 4, λ > 0) or the bound (λ < 0).
pub fn blowup_report(a0: &ComplexField, mass: &InitialMass, radii: &[f64], lambda: f64, tau_end: f64, dt: f64, stride: usize) -> Result<(BlowupReport, CharTrace)> {
    if mass.n != a0.grid.n {
        return Err(Error::InvalidArgument(format!("launch data for n = {} but grid n = {}", mass.n, a0.grid.n)));
    }
    let tr = trace(mass, radii, lambda, tau_end, dt, stride)?;
    let n = a0.grid.n;
    let mut rep = if n == 4 && lambda > 0.0 {
        repulsive_critical_n4(a0, lambda)?
    } else {
        BlowupReport {
            status: BlowupStatus::Undetermined,
            tau_star: None,
            r_star: None,
            event: None,
            bound_t_star: None,
            tau_c_closed: None,
            r_c: None,
            borderline: false,
            condition_margin: condition_margin(a0),
        }
    };
    let certified_global = mass.zero || lambda == 0.0 || (rep.status == BlowupStatus::Global && n == 4 && lambda > 0.0);
    if lambda < 0.0 && !mass.zero {
        rep.bound_t_star = Some(attractive_bound(a0, lambda)?);
    }
    match refine_first_event(mass, radii, &tr, lambda, tau_end, dt)? {
        Some(e) => {
            rep.status = BlowupStatus::Blowup;
            rep.tau_star = Some(e.tau);
            rep.r_star = Some(e.r);
            rep.event = Some(e.kind);
        }
        None => {
            rep.status = if certified_global { BlowupStatus::Global } else { BlowupStatus::Undetermined };
            rep.tau_star = None;
            rep.r_star = None;
            rep.event = None;
        }
    }
    Ok((rep, tr))
}

/// One point of the density reconstruction along the flow.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct DensityPoint {
    pub r: f64,
    pub x: f64,
    pub v: f64,
    pub gamma: f64,
    pub rho: f64,
}

/// ρ(τ, X) = ρ₀(R)R^{n−1}/(X^{n−1}Γ), v = X′.
pub fn density_along(field: &CharField) -> Result<Vec<DensityPoint>> {
    if let Some(i) = field.gamma.iter().position(|&g| g <= 0.0) {
        return Err(Error::InvalidArgument(format!("Gamma <= 0 at R = {} (tau = {}): past breakdown", field.r[i], field.tau)));
    }
    let p = field.n as i32 - 1;
    Ok((0..field.r.len())
        .map(|i| {
            let (r, x, g) = (field.r[i], field.x[i], field.gamma[i]);
            DensityPoint { r, x, v: field.xdot[i], gamma: g, rho: field.rho0[i] * r.powi(p) / (x.powi(p) * g) }
        })
        .collect())
}

/// m(τ, X(τ,R)) rebuilt from the density on the image points: m₀ at the
/// innermost radius plus the cumulative cubic integral of ρX^{n−1} dX.
pub fn mass_along(field: &CharField) -> Result<Vec<f64>> {
    let pts = density_along(field)?;
    if pts.len() < 4 {
        return Err(Error::InvalidArgument("need at least four launch radii".into()));
    }
    let x: Vec<f64> = pts.iter().map(|p| p.x).collect();
    let f: Vec<f64> = pts.iter().map(|p| p.rho * p.x.powi(field.n as i32 - 1)).collect();
    Ok(cumulative_cubic(&x, &f, field.m0[0]))
}

/// v₀ = √(2|λ| m₀(r)/((n−2) r^{n−2})): the outward velocity for which an
/// attractive flow is global.
pub fn autonomous_global_velocity(rho0: &RealField, lambda: f64) -> Result<RealField> {
    if !(lambda < 0.0) {
        return Err(Error::InvalidParams(format!("escape velocity needs lambda < 0, got {lambda}")));
    }
    let g = &rho0.grid;
    if g.n < 3 {
        return Err(Error::InvalidParams(format!("escape velocity needs n >= 3, got {}", g.n)));
    }
    let m0 = enclosed_mass(g, &rho0.values);
    let nf = g.n as f64;
    let values = m0
        .iter()
        .zip(g.nodes())
        .map(|(m, r)| (2.0 * lambda.abs() * m.max(0.0) / ((nf - 2.0) * r.powf(nf - 2.0))).sqrt())
        .collect();
    Ok(RealField { grid: g.clone(), values, parity: Parity::Odd })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_root_of_a_line() {
        let t = hermite_root(1.0, 0.5, 1.0, -3.0, -0.5, -3.0);
        assert!((t - (1.0 + 1.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn enclosed_mass_of_constant_density() {
        let g = RadialGrid::new(2.0, 200, 4).unwrap();
        let m0 = enclosed_mass(&g, &vec![1.0; 200]);
        for (m, r) in m0.iter().zip(g.nodes()) {
            assert!((m - r.powi(4) / 4.0).abs() < 1e-13);
        }
    }
}
