//! Generic amplitude–velocity–phase integrator.
//!
//! Every system handled here has the shape
//!
//! ```text
//! ∂_t b = c₁Q₁(b,w) + Q₁(B₁,w) + Q₁(b,W₁) + R₁ + i r Δb
//! ∂_t w = c₂Q₂(w,w) + Q₂(W₂,w) + Q₂(w,W₂) + f(t)(c₂Q₃(b,b) + Q₃(B₂,b) + Q₃(b,B₂)) + R₂
//! ```
//!
//! with Q₁(a,v) = −v∂a − ½a∇·v, Q₂(v₁,v₂) = −v₁∂v₂, Q₃(a₁,a₂) = −λ∇(|x|^{−γ}∗a₁ā₂).
//! All velocity terms are gradients, so the phase φ with w = ∂_rφ obeys
//! ∂_tφ = Π with Π = −½c₂w² − W₂w − λf(c₂K∗|b|² + K∗2Re(bB̄₂)) + S. The
//! integrator evaluates Π once and sets ∂_t w = ∂_r Π; the discrete identity
//! w = ∂_rφ is then preserved exactly by every linear stage of RK4.

pub mod systems;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{d1, laplacian, ComplexField, Parity, RadialGrid, RealField};
use crate::potential::RieszKernel;
use crate::tridiag::CrankNicolson;

pub use systems::*;

/// Q₁(a,v) = −v ∂_r a − ½ a (∂_r v + (n−1) v/r).
pub fn q1(a: &ComplexField, v: &RealField) -> Result<ComplexField> {
    a.check_grid(v)?;
    let g = &a.grid;
    let da = d1(&a.values, a.parity, g.dr);
    let div = divergence(g, &v.values);
    let values = (0..g.m).map(|j| -(da[j] * v.values[j]) - a.values[j] * (0.5 * div[j])).collect();
    Ok(ComplexField { grid: g.clone(), values, parity: Parity::Even })
}

/// Q₂(v₁,v₂) = −v₁ ∂_r v₂.
pub fn q2(v1: &RealField, v2: &RealField) -> Result<RealField> {
    v1.check_grid(v2)?;
    let dv = d1(&v2.values, v2.parity, v2.grid.dr);
    let values = v1.values.iter().zip(dv).map(|(a, b)| -a * b).collect();
    Ok(RealField { grid: v1.grid.clone(), values, parity: Parity::Odd })
}

/// Q₃(a₁,a₂) = −λ ∂_r (|x|^{−γ} ∗ Re(a₁ā₂)). Callers needing the symmetric
/// combination pass both orders; the imaginary part never enters a velocity.
pub fn q3(a1: &ComplexField, a2: &ComplexField, kernel: &RieszKernel, lambda: f64) -> Result<RealField> {
    a1.check_grid(a2)?;
    kernel.check_field(a1)?;
    let rho: Vec<f64> = a1.values.iter().zip(&a2.values).map(|(x, y)| (x * y.conj()).re).collect();
    let pot = kernel.apply_slice(&rho);
    let values = d1(&pot, Parity::Even, a1.grid.dr).into_iter().map(|x| -lambda * x).collect();
    Ok(RealField { grid: a1.grid.clone(), values, parity: Parity::Odd })
}

/// ∂_r v + (n−1)v/r for odd v.
fn divergence(g: &RadialGrid, v: &[f64]) -> Vec<f64> {
    let dv = d1(v, Parity::Odd, g.dr);
    let nm1 = g.n as f64 - 1.0;
    dv.iter().zip(v).zip(g.nodes()).map(|((d, v), r)| d + nm1 * v / r).collect()
}

/// Second-order upwind derivative of `a` against the velocity field `v`.
fn upwind_d1(a: &[Complex64], v: &[f64], parity: Parity, dr: f64) -> Vec<Complex64> {
    let m = a.len();
    let sign = if parity == Parity::Even { 1.0 } else { -1.0 };
    let at = |j: isize| -> Complex64 {
        if j < 0 {
            a[(-j - 1) as usize] * sign
        } else {
            a[(j as usize).min(m - 1)]
        }
    };
    (0..m as isize)
        .map(|j| {
            if v[j as usize] >= 0.0 {
                (at(j) * 3.0 - at(j - 1) * 4.0 + at(j - 2)) / (2.0 * dr)
            } else if (j as usize) + 2 < m {
                (-at(j + 2) + at(j + 1) * 4.0 - at(j) * 3.0) / (2.0 * dr)
            } else {
                (at(j) * 3.0 - at(j - 1) * 4.0 + at(j - 2)) / (2.0 * dr)
            }
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct HydroState {
    pub tau: f64,
    pub a: ComplexField,
    pub v: RealField,
    pub phi: RealField,
}

impl HydroState {
    pub fn zeros(grid: &std::sync::Arc<RadialGrid>, tau: f64) -> Self {
        HydroState {
            tau,
            a: ComplexField::zeros(grid, Parity::Even),
            v: RealField::zeros(grid, Parity::Odd),
            phi: RealField::zeros(grid, Parity::Even),
        }
    }

    /// Amplitude-only initial state (w = φ = 0).
    pub fn from_amplitude(a: ComplexField, tau: f64) -> Self {
        let g = a.grid.clone();
        HydroState { tau, a, v: RealField::zeros(&g, Parity::Odd), phi: RealField::zeros(&g, Parity::Even) }
    }

    /// ‖∂_r φ − v‖ in weighted L².
    pub fn gradient_residual(&self) -> f64 {
        let dphi = d1(&self.phi.values, Parity::Even, self.phi.grid.dr);
        let diff: Vec<f64> = dphi.iter().zip(&self.v.values).map(|(a, b)| a - b).collect();
        RealField { grid: self.v.grid.clone(), values: diff, parity: Parity::Odd }.l2()
    }

    /// a·exp(iφ/h).
    pub fn reconstruct(&self, h: f64) -> ComplexField {
        let values = self.a.values.iter().zip(&self.phi.values).map(|(a, p)| a * Complex64::from_polar(1.0, p / h)).collect();
        ComplexField { grid: self.a.grid.clone(), values, parity: Parity::Even }
    }

    fn lincomb(&self, other: &[&StateRate], coefs: &[f64], dt: f64, tau: f64) -> HydroState {
        let mut a = self.a.values.clone();
        let mut v = self.v.values.clone();
        let mut phi = self.phi.values.clone();
        for (k, &c) in other.iter().zip(coefs) {
            let s = c * dt;
            for j in 0..a.len() {
                a[j] += k.amp[j] * s;
                v[j] += k.vel[j] * s;
                phi[j] += k.phase[j] * s;
            }
        }
        HydroState {
            tau,
            a: ComplexField { grid: self.a.grid.clone(), values: a, parity: Parity::Even },
            v: RealField { grid: self.a.grid.clone(), values: v, parity: Parity::Odd },
            phi: RealField { grid: self.a.grid.clone(), values: phi, parity: Parity::Even },
        }
    }

    fn is_finite(&self) -> bool {
        self.a.is_finite() && self.v.is_finite() && self.phi.is_finite()
    }
}

#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct StepDiagnostics {
    pub tau: f64,
    pub courant: f64,
    pub gradient_residual: f64,
    pub max_da: f64,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub states: Vec<HydroState>,
    pub diagnostics: Vec<StepDiagnostics>,
}

impl Trajectory {
    pub fn start(&self) -> f64 {
        self.states[0].tau
    }

    pub fn end(&self) -> f64 {
        self.states.last().map(|s| s.tau).unwrap_or(f64::NAN)
    }

    pub fn last(&self) -> &HydroState {
        self.states.last().expect("trajectory holds at least one state")
    }

    pub fn grid(&self) -> &std::sync::Arc<RadialGrid> {
        &self.states[0].a.grid
    }

    /// State at time `t`, by cubic Lagrange interpolation through the four
    /// nearest stored states (exact at stored times).
    pub fn at(&self, t: f64) -> Result<HydroState> {
        let (start, end) = (self.start(), self.end());
        let slack = 1e-9 * (end - start).abs().max(1e-300);
        if t < start - slack || t > end + slack {
            return Err(Error::OutOfWindow { t, start, end });
        }
        let k = self.states.partition_point(|s| s.tau <= t);
        let hit = |i: usize| (self.states[i].tau - t).abs() <= 1e-12 * (1.0 + t.abs());
        if k > 0 && hit(k - 1) {
            return Ok(self.states[k - 1].clone());
        }
        if k < self.states.len() && hit(k) {
            return Ok(self.states[k].clone());
        }
        let len = self.states.len();
        if len == 1 {
            return Ok(self.states[0].clone());
        }
        let pts = len.min(4);
        let lo = (k.saturating_sub(2)).min(len - pts);
        let idx: Vec<usize> = (lo..lo + pts).collect();
        let times: Vec<f64> = idx.iter().map(|&i| self.states[i].tau).collect();
        let weights: Vec<f64> = (0..pts)
            .map(|i| (0..pts).filter(|&j| j != i).map(|j| (t - times[j]) / (times[i] - times[j])).product())
            .collect();
        let g = self.grid().clone();
        let m = g.m;
        let mut a = vec![Complex64::default(); m];
        let mut v = vec![0.0; m];
        let mut phi = vec![0.0; m];
        for (&i, &w) in idx.iter().zip(&weights) {
            let s = &self.states[i];
            for j in 0..m {
                a[j] += s.a.values[j] * w;
                v[j] += s.v.values[j] * w;
                phi[j] += s.phi.values[j] * w;
            }
        }
        Ok(HydroState {
            tau: t,
            a: ComplexField { grid: g.clone(), values: a, parity: Parity::Even },
            v: RealField { grid: g.clone(), values: v, parity: Parity::Odd },
            phi: RealField { grid: g, values: phi, parity: Parity::Even },
        })
    }

    pub fn max_gradient_residual(&self) -> f64 {
        self.diagnostics.iter().map(|d| d.gradient_residual).fold(0.0, f64::max)
    }
}

/// Time weight f(t) multiplying the nonlocal force.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TimeWeight {
    Constant(f64),
    /// (t + offset)^exponent.
    Power { offset: f64, exponent: f64 },
}

impl TimeWeight {
    /// τ^{γ−2} in the system's own time.
    pub fn hartree(gamma: f64) -> Self {
        TimeWeight::Power { offset: 0.0, exponent: gamma - 2.0 }
    }

    pub fn value(&self, t: f64) -> f64 {
        match *self {
            TimeWeight::Constant(c) => c,
            TimeWeight::Power { offset, exponent } => {
                if exponent == 0.0 {
                    1.0
                } else {
                    (t + offset).powf(exponent)
                }
            }
        }
    }

    /// ∫_a^b f.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        match *self {
            TimeWeight::Constant(c) => c * (b - a),
            TimeWeight::Power { offset, exponent } => {
                let q = exponent + 1.0;
                if q.abs() < 1e-14 {
                    ((b + offset) / (a + offset)).ln()
                } else {
                    ((b + offset).powf(q) - (a + offset).powf(q)) / q
                }
            }
        }
    }

    fn singular_near(&self, t: f64, dt: f64) -> bool {
        matches!(*self, TimeWeight::Power { offset, exponent } if exponent < 0.0 && t + offset < dt)
    }

    /// Effective f for the four RK4 stages of the step [t, t+dt]. Point
    /// values where f is smooth; next to an integrable singularity each stage
    /// receives the mean of f over its share of the Simpson weights
    /// ([0,⅙], [⅙,½], [½,⅚], [⅚,1]), so the step integrates f exactly.
    pub fn stage_values(&self, t: f64, dt: f64) -> [f64; 4] {
        if self.singular_near(t, dt) {
            let cuts = [0.0, 1.0 / 6.0, 0.5, 5.0 / 6.0, 1.0];
            let mut out = [0.0; 4];
            for i in 0..4 {
                let (a, b) = (t + cuts[i] * dt, t + cuts[i + 1] * dt);
                out[i] = self.integral(a, b) / (b - a);
            }
            out
        } else {
            [self.value(t), self.value(t + 0.5 * dt), self.value(t + 0.5 * dt), self.value(t + dt)]
        }
    }
}

/// Sources at one instant: R₁ (amplitude), and R₂ = ∂_r(S + f·S_f) given
/// through its potentials S (`phase`) and S_f (`phase_weighted`).
#[derive(Clone, Debug)]
pub struct SourceTerms {
    pub amp: Vec<Complex64>,
    pub phase: Vec<f64>,
    pub phase_weighted: Vec<f64>,
}

pub type SourceFn<'a> = Box<dyn Fn(f64) -> Result<SourceTerms> + 'a>;

pub struct GenericSystemSpec<'a> {
    pub c1: Complex64,
    pub c2: f64,
    pub r_coef: f64,
    pub weight: TimeWeight,
    pub lambda: f64,
    pub kernel: &'a RieszKernel,
    /// Background amplitudes B₁, B₂ (taken from the `a` component).
    pub b1: Option<&'a Trajectory>,
    pub b2: Option<&'a Trajectory>,
    /// Background velocities W₁, W₂ (taken from the `v` component).
    pub w1: Option<&'a Trajectory>,
    pub w2: Option<&'a Trajectory>,
    pub source: Option<SourceFn<'a>>,
}

#[derive(Clone, Copy, Debug)]
pub struct HydroOptions {
    pub stride: usize,
    pub cfl_max: f64,
    pub upwind: bool,
}

impl Default for HydroOptions {
    fn default() -> Self {
        HydroOptions { stride: 1, cfl_max: 0.5, upwind: false }
    }
}

struct StateRate {
    amp: Vec<Complex64>,
    vel: Vec<f64>,
    phase: Vec<f64>,
}

struct Backgrounds {
    b1: Option<Vec<Complex64>>,
    b2: Option<Vec<Complex64>>,
    w1: Option<Vec<f64>>,
    w2: Option<Vec<f64>>,
}

impl<'a> GenericSystemSpec<'a> {
    fn backgrounds(&self, t: f64) -> Result<Backgrounds> {
        let amp = |tr: Option<&Trajectory>| -> Result<Option<Vec<Complex64>>> { tr.map(|tr| tr.at(t).map(|s| s.a.values)).transpose() };
        let vel = |tr: Option<&Trajectory>| -> Result<Option<Vec<f64>>> { tr.map(|tr| tr.at(t).map(|s| s.v.values)).transpose() };
        Ok(Backgrounds { b1: amp(self.b1)?, b2: amp(self.b2)?, w1: vel(self.w1)?, w2: vel(self.w2)? })
    }

    fn max_background_speed(&self, t: f64) -> Result<f64> {
        let mut s = 0.0;
        for tr in [self.w1, self.w2].into_iter().flatten() {
            s += tr.at(t)?.v.max_abs();
        }
        Ok(s)
    }

    fn rate(&self, t: f64, f: f64, y: &HydroState, upwind: bool) -> Result<StateRate> {
        let g = &y.a.grid;
        let m = g.m;
        let bg = self.backgrounds(t)?;
        let (b, w) = (&y.a.values, &y.v.values);
        let mut amp = vec![Complex64::default(); m];

        let w_eff: Vec<f64> = match &bg.w1 {
            Some(w1) => w.iter().zip(w1).map(|(a, b)| self.c1.re * a + b).collect(),
            None => w.iter().map(|a| self.c1.re * a).collect(),
        };
        let db = if upwind { upwind_d1(b, &w_eff, Parity::Even, g.dr) } else { d1(b, Parity::Even, g.dr) };
        let div_w = divergence(g, w);

        // c₁Q₁(b,w) + Q₁(b,W₁)
        if self.c1 != Complex64::default() || bg.w1.is_some() {
            let div_w1 = bg.w1.as_ref().map(|w1| divergence(g, w1));
            for j in 0..m {
                let mut acc = self.c1 * (-(db[j] * w[j]) - b[j] * (0.5 * div_w[j]));
                if let (Some(w1), Some(dw1)) = (&bg.w1, &div_w1) {
                    acc += -(db[j] * w1[j]) - b[j] * (0.5 * dw1[j]);
                }
                amp[j] = acc;
            }
        }
        // Q₁(B₁,w)
        if let Some(b1) = &bg.b1 {
            let db1 = d1(b1, Parity::Even, g.dr);
            for j in 0..m {
                amp[j] += -(db1[j] * w[j]) - b1[j] * (0.5 * div_w[j]);
            }
        }

        // phase rate Π
        let mut pi: Vec<f64> = w.iter().map(|x| -0.5 * self.c2 * x * x).collect();
        if let Some(w2) = &bg.w2 {
            for j in 0..m {
                pi[j] -= w2[j] * w[j];
            }
        }
        if self.lambda != 0.0 && f != 0.0 && (self.c2 != 0.0 || bg.b2.is_some()) {
            let rho: Vec<f64> = (0..m)
                .map(|j| {
                    let mut r = self.c2 * b[j].norm_sqr();
                    if let Some(b2) = &bg.b2 {
                        r += 2.0 * (b[j] * b2[j].conj()).re;
                    }
                    r
                })
                .collect();
            let pot = self.kernel.apply_slice(&rho);
            for j in 0..m {
                pi[j] -= self.lambda * f * pot[j];
            }
        }
        if let Some(src) = &self.source {
            let s = src(t)?;
            for j in 0..m {
                amp[j] += s.amp[j];
                pi[j] += s.phase[j] + f * s.phase_weighted[j];
            }
        }
        let vel = d1(&pi, Parity::Even, g.dr);
        Ok(StateRate { amp, vel, phase: pi })
    }
}

/// Integrates `spec` from `init` to `t_end` with uniform steps no larger
/// than `dt`. RK4 on the transport/force part; if r ≠ 0 the dispersive term
/// is split off as ½ Crank–Nicolson | RK4 | ½ Crank–Nicolson.
pub fn integrate(spec: &GenericSystemSpec, init: &HydroState, t_end: f64, dt: f64, opts: HydroOptions) -> Result<Trajectory> {
    spec.kernel.check_field(&init.a)?;
    init.a.check_grid(&init.v)?;
    init.a.check_grid(&init.phi)?;
    if init.a.parity != Parity::Even || init.v.parity != Parity::Odd || init.phi.parity != Parity::Even {
        return Err(Error::InvalidArgument("expected even amplitude, odd velocity, even phase".into()));
    }
    if !(dt > 0.0) || t_end < init.tau {
        return Err(Error::InvalidArgument(format!("bad time window [{}, {t_end}] with dt = {dt}", init.tau)));
    }
    if let TimeWeight::Power { offset, exponent } = spec.weight {
        if exponent <= -1.0 && init.tau + offset <= 0.0 {
            return Err(Error::InvalidArgument("time weight is not integrable at the start time".into()));
        }
    }
    let g = init.a.grid.clone();
    let steps = ((t_end - init.tau) / dt - 1e-9).ceil().max(0.0) as usize;
    let mut traj = Trajectory { states: vec![init.clone()], diagnostics: vec![diagnose(init, 0.0)] };
    if steps == 0 {
        return Ok(traj);
    }
    let dt = (t_end - init.tau) / steps as f64;
    let cn = if spec.r_coef != 0.0 {
        Some(CrankNicolson::new(&g, spec.r_coef, 0.5 * dt).ok_or(Error::LinearSolve { step: 0 })?)
    } else {
        None
    };
    let mut y = init.clone();
    for step in 1..=steps {
        let t = init.tau + (step - 1) as f64 * dt;
        let speed = y.v.max_abs() * spec.c1.norm().max(spec.c2.abs()) + spec.max_background_speed(t)?;
        let courant = dt * speed / g.dr;
        if courant > opts.cfl_max {
            return Err(Error::Cfl { step, t, courant });
        }
        if let Some(cn) = &cn {
            cn.step(&mut y.a.values);
        }
        let fw = spec.weight.stage_values(t, dt);
        let th = t + 0.5 * dt;
        let k1 = spec.rate(t, fw[0], &y, opts.upwind)?;
        let y2 = y.lincomb(&[&k1], &[0.5], dt, th);
        let k2 = spec.rate(th, fw[1], &y2, opts.upwind)?;
        let y3 = y.lincomb(&[&k2], &[0.5], dt, th);
        let k3 = spec.rate(th, fw[2], &y3, opts.upwind)?;
        let y4 = y.lincomb(&[&k3], &[1.0], dt, t + dt);
        let k4 = spec.rate(t + dt, fw[3], &y4, opts.upwind)?;
        let t_next = init.tau + step as f64 * dt;
        y = y.lincomb(&[&k1, &k2, &k3, &k4], &[1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0], dt, t_next);
        if let Some(cn) = &cn {
            cn.step(&mut y.a.values);
        }
        if !y.is_finite() {
            return Err(Error::NonFinite { step, t: t_next });
        }
        if step % opts.stride.max(1) == 0 || step == steps {
            traj.diagnostics.push(diagnose(&y, courant));
            traj.states.push(y.clone());
        }
    }
    Ok(traj)
}

fn diagnose(y: &HydroState, courant: f64) -> StepDiagnostics {
    let da = d1(&y.a.values, Parity::Even, y.a.grid.dr);
    StepDiagnostics {
        tau: y.tau,
        courant,
        gradient_residual: y.gradient_residual(),
        max_da: da.iter().map(|z| z.norm()).fold(0.0, f64::max),
    }
}

/// (i r) Δ applied to an amplitude (used as a source term).
pub fn i_laplacian(grid: &RadialGrid, a: &[Complex64], r: f64) -> Vec<Complex64> {
    laplacian(grid, a).into_iter().map(|z| z * Complex64::new(0.0, r)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::RadialGrid;

    #[test]
    fn q_operator_examples() {
        let g = RadialGrid::new(2.0, 40, 4).unwrap();
        let one = ComplexField::from_fn(&g, Parity::Even, |_| Complex64::new(1.0, 0.0));
        let lin = RealField::from_fn(&g, Parity::Odd, |r| r);
        for v in q1(&one, &lin).unwrap().values {
            assert!((v - Complex64::new(-2.0, 0.0)).norm() < 1e-12);
        }
        let q = q2(&lin, &lin).unwrap();
        for (v, r) in q.values.iter().zip(g.nodes()) {
            assert!((v + r).abs() < 1e-12);
        }
        let zero = RealField::zeros(&g, Parity::Odd);
        assert!(q1(&one, &zero).unwrap().max_abs() == 0.0);
    }

    #[test]
    fn stage_weights_integrate_singular_weight_exactly() {
        let w = TimeWeight::hartree(1.5);
        let f = w.stage_values(0.0, 0.1);
        let simpson = 0.1 * (f[0] + 2.0 * f[1] + 2.0 * f[2] + f[3]) / 6.0;
        assert!((simpson - w.integral(0.0, 0.1)).abs() < 1e-14);
        let smooth = TimeWeight::hartree(3.0).stage_values(0.2, 0.1);
        assert_eq!(smooth, [0.2, 0.25, 0.25, 0.30000000000000004]);
    }
}
