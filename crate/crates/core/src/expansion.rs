//! Small-time Taylor coefficients of the limit system:
//! b₀ ≍ Σ τ^{γj} a_j, w₀ ≍ Σ τ^{γj−1} v_j, φ₀ ≍ Σ τ^{γj−1} φ_j.
//!
//! The velocity coefficients are taken as v_j = ∂_r φ_j, i.e. the Q₂ and Q₃
//! sums are evaluated in their gradient form −½∂(Σ v v) and −λ∂(Σ K∗aā).
//! This is the Taylor expansion of exactly the discrete system integrated by
//! [`crate::hydro`], so residual slopes are not polluted by stencil mismatch.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{d1, ComplexField, Parity, RealField};
use crate::hydro::{q1, Trajectory};
use crate::params::ModelParams;
use crate::potential::RieszKernel;

#[derive(Clone, Debug)]
pub struct ExpansionTable {
    pub j_max: usize,
    /// a[0] = a₀, …, a[J].
    pub a: Vec<ComplexField>,
    /// v[0] ≡ 0, v[1..=J].
    pub v: Vec<RealField>,
    /// phi[0] ≡ 0, phi[1..=J].
    pub phi: Vec<RealField>,
    pub params: ModelParams,
}

pub fn expand(a0: &ComplexField, params: &ModelParams, kernel: &RieszKernel, j_max: usize) -> Result<ExpansionTable> {
    kernel.check_field(a0)?;
    let gamma = params.gamma();
    if (gamma - kernel.gamma).abs() > 1e-14 {
        return Err(Error::InvalidArgument(format!("kernel gamma {} vs params gamma {gamma}", kernel.gamma)));
    }
    if (gamma - 1.0).abs() < 1e-12 {
        return Err(Error::InvalidParams("expansion needs gamma != 1".into()));
    }
    if j_max == 0 {
        return Err(Error::InvalidArgument("expansion order must be at least 1".into()));
    }
    let g = a0.grid.clone();
    let m = g.m;
    let lambda = params.lambda;
    let mut a = vec![a0.clone()];
    let mut v = vec![RealField::zeros(&g, Parity::Odd)];
    let mut phi = vec![RealField::zeros(&g, Parity::Even)];
    for j in 1..=j_max {
        // φ_j from the already known a_0..a_{j−1}, v_1..v_{j−1}
        let mut s = vec![0.0; m];
        for k1 in 1..j {
            let (x, y) = (&v[k1].values, &v[j - k1].values);
            for i in 0..m {
                s[i] += 0.5 * x[i] * y[i];
            }
        }
        let mut rho = vec![0.0; m];
        for k1 in 0..j {
            let (x, y) = (&a[k1].values, &a[j - 1 - k1].values);
            for i in 0..m {
                rho[i] += (x[i] * y[i].conj()).re;
            }
        }
        let pot = kernel.apply_slice(&rho);
        let scale = 1.0 / (1.0 - gamma * j as f64);
        let phi_j: Vec<f64> = (0..m).map(|i| scale * (s[i] + lambda * pot[i])).collect();
        let v_j = d1(&phi_j, Parity::Even, g.dr);
        phi.push(RealField { grid: g.clone(), values: phi_j, parity: Parity::Even });
        v.push(RealField { grid: g.clone(), values: v_j, parity: Parity::Odd });
        // a_j = (1/γj) Σ_{k1+k2=j, k2≥1} Q₁(a_{k1}, v_{k2})
        let mut acc = vec![Complex64::default(); m];
        for k2 in 1..=j {
            let q = q1(&a[j - k2], &v[k2])?;
            for i in 0..m {
                acc[i] += q.values[i];
            }
        }
        let inv = 1.0 / (gamma * j as f64);
        a.push(ComplexField { grid: g.clone(), values: acc.into_iter().map(|z| z * inv).collect(), parity: Parity::Even });
    }
    Ok(ExpansionTable { j_max, a, v, phi, params: *params })
}

impl ExpansionTable {
    /// Σ_{j≤J} τ^{γj} a_j.
    pub fn amplitude_sum(&self, tau: f64, j: usize) -> ComplexField {
        let g = self.params.gamma();
        let mut out = self.a[0].clone();
        for k in 1..=j.min(self.j_max) {
            let c = tau.powf(g * k as f64);
            for (o, x) in out.values.iter_mut().zip(&self.a[k].values) {
                *o += x * c;
            }
        }
        out
    }

    /// Σ_{1≤j≤J} τ^{γj−1} v_j.
    pub fn velocity_sum(&self, tau: f64, j: usize) -> RealField {
        self.real_sum(&self.v, tau, j)
    }

    /// Σ_{1≤j≤J} τ^{γj−1} φ_j.
    pub fn phase_sum(&self, tau: f64, j: usize) -> RealField {
        self.real_sum(&self.phi, tau, j)
    }

    fn real_sum(&self, fields: &[RealField], tau: f64, j: usize) -> RealField {
        let g = self.params.gamma();
        let mut out = fields[0].clone();
        for k in 1..=j.min(self.j_max) {
            let c = tau.powf(g * k as f64 - 1.0);
            for (o, x) in out.values.iter_mut().zip(&fields[k].values) {
                *o += x * c;
            }
        }
        out
    }

    /// max_j ‖∂_rφ_j − v_j‖ / (1 + ‖v_j‖).
    pub fn gradient_mismatch(&self) -> f64 {
        (1..=self.j_max)
            .map(|j| {
                let d = self.phi[j].derivative(1).expect("order 1 is valid").sub(&self.v[j]);
                d.l2() / (1.0 + self.v[j].l2())
            })
            .fold(0.0, f64::max)
    }
}

/// φ₂ = −λ²/(2(γ−1)²(2γ−1)) |∇U|² − λ²/(γ(γ−1)(2γ−1)) K∗(∇·(|a₀|²∇U)),
/// U = K∗|a₀|², assembled directly from kernel and gradient primitives.
pub fn phi2_closed_form(a0: &ComplexField, params: &ModelParams, kernel: &RieszKernel) -> Result<RealField> {
    kernel.check_field(a0)?;
    let g = &a0.grid;
    let (gam, lam) = (params.gamma(), params.lambda);
    let rho = a0.abs2_field();
    let u = kernel.apply(&rho)?;
    let du = d1(&u.values, Parity::Even, g.dr);
    // ∇|a₀|² by the chain rule, ΔU = ∂_r(∂_rU) + (n−1)∂_rU/r
    let da = d1(&a0.values, Parity::Even, g.dr);
    let ddu = d1(&du, Parity::Odd, g.dr);
    let nm1 = g.n as f64 - 1.0;
    let div: Vec<f64> = (0..g.m)
        .map(|i| {
            let grad_rho = 2.0 * (a0.values[i].conj() * da[i]).re;
            let lap_u = ddu[i] + nm1 * du[i] / g.nodes()[i];
            grad_rho * du[i] + rho.values[i] * lap_u
        })
        .collect();
    let kdiv = kernel.apply_slice(&div);
    let c1 = -lam * lam / (2.0 * (gam - 1.0).powi(2) * (2.0 * gam - 1.0));
    let c2 = -lam * lam / (gam * (gam - 1.0) * (2.0 * gam - 1.0));
    let values = (0..g.m).map(|i| c1 * du[i] * du[i] + c2 * kdiv[i]).collect();
    Ok(RealField { grid: g.clone(), values, parity: Parity::Even })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct OrderFit {
    pub slope_b: f64,
    pub slope_w: f64,
    /// Residuals vanish identically (e.g. a₀ ≡ 0); slopes are NaN.
    pub degenerate: bool,
}

/// Least-squares slope of log(y) against log(x).
pub fn log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let k = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / k;
    let my = ly.iter().sum::<f64>() / k;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Fits the decay of ‖b₀(τ) − Σ_{j≤J} τ^{γj}a_j‖ and ‖w₀(τ) − Σ_{j≤J} τ^{γj−1}v_j‖.
pub fn verify_expansion_order(base: &Trajectory, table: &ExpansionTable, j: usize, tau_samples: &[f64]) -> Result<OrderFit> {
    if tau_samples.len() < 4 {
        return Err(Error::InvalidArgument(format!("need at least 4 samples, got {}", tau_samples.len())));
    }
    if j > table.j_max {
        return Err(Error::InvalidArgument(format!("J = {j} exceeds table order {}", table.j_max)));
    }
    let mut rb = Vec::new();
    let mut rw = Vec::new();
    for &t in tau_samples {
        let s = base.at(t)?;
        rb.push(s.a.sub(&table.amplitude_sum(t, j)).l2());
        rw.push(s.v.sub(&table.velocity_sum(t, j)).l2());
    }
    if rb.iter().chain(&rw).all(|&r| r == 0.0) {
        return Ok(OrderFit { slope_b: f64::NAN, slope_w: f64::NAN, degenerate: true });
    }
    Ok(OrderFit { slope_b: log_slope(tau_samples, &rb), slope_w: log_slope(tau_samples, &rw), degenerate: false })
}
