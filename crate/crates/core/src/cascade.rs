//! WKB approximants, (t,x) ↔ (τ,y) coordinates, approximation errors and
//! ε-sweeps.
//!
//! Everything is evaluated in the rescaled variables τ = ε^{α/γ}/(1−t),
//! y = x/(1−t). Under this change of variables
//! u^ε e^{−iΦ^ε} − (1−t)^{−n/2}A^ε e^{i|x|²/2ε(t−1)}
//! becomes (1−t)^{−n/2} e^{i|x|²/2ε(t−1)} (ψ^h e^{−iΦ/h} − A)(τ, y), with
//! Φ/h = ε^{α/γ−1}·(phase sum). The prefactor has modulus (1−t)^{−n/2},
//! which the L²(dx) → L²(dy) Jacobian (1−t)^n cancels, and |J^ε|^s conjugates
//! the quadratic phase away and becomes |(1−t)∇_x|^s = |∇_y|^s. The error is
//! therefore the plain weighted norm of D_y^s(ψ^h e^{−iΦ/h} − A) on the y grid.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expansion::{expand, ExpansionTable};
use crate::grid::{ComplexField, Parity, RealField};
use crate::hydro::{solve_correction_hierarchy, HierarchyVariant, solve_equ, solve_full, solve_full_from, solve_limit, Corrections, HydroOptions, HydroState, Trajectory};
use crate::nls::{evolve, NlsOptions, WaveField};
use crate::params::ModelParams;
use crate::potential::RieszKernel;
use crate::pset::{build_pset, PSet};

/// τ = ε^{α/γ}/(1−t).
pub fn tau_of_t(eps: f64, alpha: f64, gamma: f64, t: f64) -> f64 {
    eps.powf(alpha / gamma) / (1.0 - t)
}

/// t = 1 − ε^{α/γ}/τ.
pub fn t_of_tau(eps: f64, alpha: f64, gamma: f64, tau: f64) -> f64 {
    1.0 - eps.powf(alpha / gamma) / tau
}

/// ε-independent parts of an approximant.
#[derive(Debug)]
pub struct WkbParts {
    pub base: Trajectory,
    pub table: ExpansionTable,
    pub pset: PSet,
    /// None for well-prepared data.
    pub hierarchy: Option<Corrections>,
    /// The equ pair (also stored in `hierarchy` when present).
    pub equ: Trajectory,
    pub prepared: bool,
}

#[derive(Clone, Debug)]
pub struct WkbApproximant {
    pub params: ModelParams,
    pub parts: Arc<WkbParts>,
}

#[derive(Clone, Copy, Debug)]
pub struct ApproxOptions {
    /// Final rescaled time T.
    pub t_end: f64,
    pub dt: f64,
    /// Order of the expansion table (raised automatically if the initial-data
    /// rule needs more).
    pub j_max: usize,
    pub hydro: HydroOptions,
    pub variant: HierarchyVariant,
}

/// Builds base, expansion table, exponent set, hierarchy and equ pair.
/// With `prepared`, the hierarchy is skipped and the equ pair starts from
/// zero data.
pub fn build_approximant(params: &ModelParams, a0: &ComplexField, kernel: &RieszKernel, opts: ApproxOptions, prepared: bool) -> Result<WkbApproximant> {
    let base = solve_limit(params, a0, kernel, opts.t_end, opts.dt, opts.hydro)?;
    let pset = build_pset(params);
    let j_max = opts.j_max.max(crate::hydro::required_order(&pset));
    let table = expand(a0, params, kernel, j_max)?;
    let (hierarchy, equ) = if prepared {
        let zero = HydroState::zeros(&a0.grid, 0.0);
        (None, solve_equ(params, &base, &zero, kernel, opts.t_end, opts.dt, opts.hydro)?)
    } else {
        let c = solve_correction_hierarchy(params, &base, &pset, &table, kernel, opts.t_end, opts.dt, opts.hydro, opts.variant)?;
        let equ = c.equ.clone();
        (Some(c), equ)
    };
    Ok(WkbApproximant { params: *params, parts: Arc::new(WkbParts { base, table, pset, hierarchy, equ, prepared }) })
}

impl WkbApproximant {
    /// The same approximant for another ε.
    pub fn at_eps(&self, eps: f64) -> Result<WkbApproximant> {
        Ok(WkbApproximant { params: self.params.with_eps(eps)?, parts: self.parts.clone() })
    }

    fn h(&self) -> Result<f64> {
        if self.params.h > 0.0 {
            Ok(self.params.h)
        } else {
            Err(Error::InvalidParams("approximant needs eps or h to be set".into()))
        }
    }

    /// φ₀(τ) + Σ_j h^{p_j} φ_j(τ − τ₀): h times the WKB phase.
    pub fn phase_sum(&self, tau: f64) -> Result<RealField> {
        let h = self.h()?;
        let mut out = self.parts.base.at(tau)?.phi;
        if let Some(c) = &self.parts.hierarchy {
            let shifted = tau - self.params.tau0();
            for (entry, traj) in self.parts.pset.entries[1..].iter().zip(&c.corrections) {
                let w = h.powf(entry.p.value);
                let phi = traj.at(shifted)?.phi;
                for (o, x) in out.values.iter_mut().zip(&phi.values) {
                    *o += w * x;
                }
            }
        }
        Ok(out)
    }

    /// Φ^ε(t, ·) on the y grid.
    pub fn assemble_phase(&self, t: f64) -> Result<RealField> {
        let eps = self.params.eps.ok_or_else(|| Error::InvalidParams("assemble_phase needs eps".into()))?;
        let (a, g) = (self.params.alpha(), self.params.gamma());
        let t_max = 1.0 - eps.powf(a / g) / self.parts.base.end();
        if !(0.0..=t_max + 1e-14).contains(&t) {
            return Err(Error::OutOfWindow { t, start: 0.0, end: t_max });
        }
        let tau = tau_of_t(eps, a, g, t);
        Ok(self.phase_sum(tau)?.scaled(1.0 / self.h()?))
    }

    /// A = b₀(τ) e^{iφ_equ(τ)}.
    pub fn amplitude(&self, tau: f64) -> Result<ComplexField> {
        let b0 = self.parts.base.at(tau)?.a;
        let pe = self.parts.equ.at(tau)?.phi;
        let values = b0.values.iter().zip(&pe.values).map(|(b, p)| b * Complex64::from_polar(1.0, *p)).collect();
        Ok(ComplexField { grid: b0.grid.clone(), values, parity: Parity::Even })
    }
}

/// Source of ψ^h for error evaluation.
pub enum PsiTrajectory<'a> {
    /// Direct NLS snapshots; errors are only evaluated at stored times.
    Nls(&'a [WaveField]),
    /// Grenier variables (a^h, φ^h); ψ = a^h e^{iφ^h/h}.
    Grenier(&'a Trajectory),
}

impl PsiTrajectory<'_> {
    /// ψ e^{−i·phase/h}, computed without forming e^{iφ^h/h} when possible.
    fn demodulated(&self, tau: f64, phase: &RealField, h: f64) -> Result<ComplexField> {
        match self {
            PsiTrajectory::Nls(snaps) => {
                let s = snaps
                    .iter()
                    .find(|s| (s.tau - tau).abs() <= 1e-9 * (1.0 + tau))
                    .ok_or_else(|| Error::InvalidArgument(format!("no NLS snapshot at tau = {tau}")))?;
                if s.params.h != h {
                    return Err(Error::InvalidArgument(format!("NLS run has h = {}, approximant h = {h}", s.params.h)));
                }
                let values = s.psi.values.iter().zip(&phase.values).map(|(z, p)| z * Complex64::from_polar(1.0, -p / h)).collect();
                Ok(ComplexField { grid: s.psi.grid.clone(), values, parity: Parity::Even })
            }
            PsiTrajectory::Grenier(tr) => {
                let s = tr.at(tau)?;
                let values = s.a.values.iter().zip(&s.phi.values).zip(&phase.values).map(|((a, f), p)| a * Complex64::from_polar(1.0, (f - p) / h)).collect();
                Ok(ComplexField { grid: s.a.grid.clone(), values, parity: Parity::Even })
            }
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ErrorPoint {
    pub eps: f64,
    pub h: f64,
    pub tau: f64,
    pub t: f64,
    pub s: usize,
    pub error: f64,
}

/// ‖D_y^s(ψ^h e^{−iΦ/h} − A)‖ at each rescaled time in `tau_samples`.
pub fn wkb_error(w: &WkbApproximant, psi: &PsiTrajectory, s: usize, tau_samples: &[f64]) -> Result<Vec<ErrorPoint>> {
    if s > 2 {
        return Err(Error::InvalidArgument(format!("derivative order s = {s} not in 0..=2")));
    }
    let h = w.h()?;
    let eps = w.params.eps.unwrap_or(f64::NAN);
    let (a, g) = (w.params.alpha(), w.params.gamma());
    tau_samples
        .iter()
        .map(|&tau| {
            let phase = w.phase_sum(tau)?;
            let diff = psi.demodulated(tau, &phase, h)?.sub(&w.amplitude(tau)?);
            if !diff.grid.same_as(&w.parts.base.grid().clone()) {
                return Err(Error::GridMismatch("psi and approximant grids differ".into()));
            }
            Ok(ErrorPoint { eps, h, tau, t: t_of_tau(eps, a, g, tau), s, error: diff.weighted_norm(s)? })
        })
        .collect()
}

/// Well-prepared data (b₀(τ₀), w₀(τ₀), φ₀(τ₀)) at τ₀ = h^{α/(γ−α)}.
pub fn well_prepared_initial(params: &ModelParams, base: &Trajectory) -> Result<HydroState> {
    base.at(params.tau0())
}

/// First sample time at which the error exceeds `ceiling`.
pub fn breakdown_time(curve: &[ErrorPoint], ceiling: f64) -> Option<f64> {
    curve.iter().find(|p| p.error > ceiling).map(|p| p.tau)
}

pub fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

#[derive(Clone, Debug)]
pub struct SweepSpec {
    pub eps: Vec<f64>,
    pub tau_samples: Vec<f64>,
    pub s: usize,
    pub dt: f64,
    pub hydro: HydroOptions,
}

/// Runs the Grenier system for every ε (in parallel) and evaluates the WKB
/// error against `w`. For a prepared approximant the runs start from the
/// well-prepared data. Sample times before τ₀(ε) are skipped.
pub fn sweep(w: &WkbApproximant, a0: &ComplexField, kernel: &RieszKernel, spec: &SweepSpec) -> Result<Vec<Vec<ErrorPoint>>> {
    let t_end = spec.tau_samples.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    spec.eps
        .par_iter()
        .map(|&eps| {
            let wa = w.at_eps(eps)?;
            let p = wa.params;
            let run = if w.parts.prepared {
                solve_full_from(&p, &well_prepared_initial(&p, &w.parts.base)?, kernel, t_end, spec.dt, spec.hydro)?
            } else {
                solve_full(&p, a0, kernel, t_end, spec.dt, spec.hydro)?
            };
            log::info!("eps = {eps:e}: grenier run done ({} states)", run.states.len());
            wkb_error(&wa, &PsiTrajectory::Grenier(&run), spec.s, &samples_after(&spec.tau_samples, p.tau0()))
        })
        .collect()
}

fn samples_after(tau: &[f64], tau0: f64) -> Vec<f64> {
    tau.iter().copied().filter(|&t| t >= tau0).collect()
}

/// Like [`sweep`] with direct NLS runs (step ≤ min(`nls_dt`, h)) as the ψ
/// source, stopped exactly at each sample time.
pub fn sweep_nls(w: &WkbApproximant, a0: &ComplexField, kernel: &RieszKernel, spec: &SweepSpec, nls_dt: f64) -> Result<Vec<Vec<ErrorPoint>>> {
    spec.eps
        .par_iter()
        .map(|&eps| {
            let wa = w.at_eps(eps)?;
            let p = wa.params;
            let mut samples = samples_after(&spec.tau_samples, p.tau0());
            samples.sort_by(f64::total_cmp);
            let psi0 = if w.parts.prepared { well_prepared_initial(&p, &w.parts.base)?.reconstruct(p.h) } else { a0.clone() };
            let mut cur = WaveField::initial(psi0, p);
            let opts = NlsOptions { stride: usize::MAX, ..NlsOptions::default() };
            let mut snaps = Vec::with_capacity(samples.len());
            for &tau in &samples {
                cur = evolve(&cur, tau, nls_dt.min(p.h), kernel, opts)?.pop().expect("evolve returns the initial state at least");
                snaps.push(cur.clone());
            }
            log::info!("eps = {eps:e}: NLS run done");
            wkb_error(&wa, &PsiTrajectory::Nls(&snaps), spec.s, &samples_after(&spec.tau_samples, p.tau0()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coordinate_round_trip() {
        for &t in &[0.0, 0.3, 0.9, 0.999] {
            let tau = tau_of_t(1e-3, 1.0 / 3.0, 2.0, t);
            assert!((t_of_tau(1e-3, 1.0 / 3.0, 2.0, tau) - t).abs() < 1e-14);
        }
    }
}
