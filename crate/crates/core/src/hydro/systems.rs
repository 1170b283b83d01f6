//! Concrete instances of the generic system: the Grenier system, its limit,
//! the equ correction and the supercritical correction hierarchy.

use num_complex::Complex64;

use super::{integrate, GenericSystemSpec, HydroOptions, HydroState, SourceFn, SourceTerms, TimeWeight, Trajectory};
use crate::error::{Error, Result};
use crate::expansion::ExpansionTable;
use crate::grid::{laplacian, ComplexField};
use crate::params::ModelParams;
use crate::potential::RieszKernel;
use crate::pset::{PSet, Tag};

fn spec<'a>(p: &ModelParams, kernel: &'a RieszKernel, c: f64, r_coef: f64) -> GenericSystemSpec<'a> {
    GenericSystemSpec {
        c1: Complex64::new(c, 0.0),
        c2: c,
        r_coef,
        weight: TimeWeight::hartree(p.gamma()),
        lambda: p.lambda,
        kernel,
        b1: None,
        b2: None,
        w1: None,
        w2: None,
        source: None,
    }
}

/// ∂a + ∇φ·∇a + ½aΔφ = i(h/2)Δa, ∂φ + ½|∇φ|² + λτ^{γ−2}K∗|a|² = 0.
pub fn full_system<'a>(p: &ModelParams, kernel: &'a RieszKernel) -> GenericSystemSpec<'a> {
    spec(p, kernel, 1.0, 0.5 * p.h)
}

/// The h = 0 hydrodynamical system.
pub fn limit_system<'a>(p: &ModelParams, kernel: &'a RieszKernel) -> GenericSystemSpec<'a> {
    spec(p, kernel, 1.0, 0.0)
}

/// Grenier system from (a₀, 0) at τ₀ = h^{α/(γ−α)}.
pub fn solve_full(p: &ModelParams, a0: &ComplexField, kernel: &RieszKernel, t_end: f64, dt: f64, opts: HydroOptions) -> Result<Trajectory> {
    if p.h <= 0.0 {
        return Err(Error::InvalidParams("the Grenier system needs h > 0".into()));
    }
    integrate(&full_system(p, kernel), &HydroState::from_amplitude(a0.clone(), p.tau0()), t_end, dt, opts)
}

/// Grenier system from arbitrary data (e.g. well-prepared) at its own time.
pub fn solve_full_from(p: &ModelParams, init: &HydroState, kernel: &RieszKernel, t_end: f64, dt: f64, opts: HydroOptions) -> Result<Trajectory> {
    integrate(&full_system(p, kernel), init, t_end, dt, opts)
}

/// Limit system from (a₀, 0) at τ = 0.
pub fn solve_limit(p: &ModelParams, a0: &ComplexField, kernel: &RieszKernel, t_end: f64, dt: f64, opts: HydroOptions) -> Result<Trajectory> {
    integrate(&limit_system(p, kernel), &HydroState::from_amplitude(a0.clone(), 0.0), t_end, dt, opts)
}

/// Linearisation around the base (b₀, w₀) plus an optional external source.
pub fn linearised_system<'a>(p: &ModelParams, kernel: &'a RieszKernel, base: &'a Trajectory, source: Option<SourceFn<'a>>) -> GenericSystemSpec<'a> {
    let mut s = spec(p, kernel, 0.0, 0.0);
    s.b1 = Some(base);
    s.b2 = Some(base);
    s.w1 = Some(base);
    s.w2 = Some(base);
    s.source = source;
    s
}

/// How the interaction sums of the hierarchy enter.
///
/// The corrections are evaluated at the shifted time τ − τ₀ but linearised
/// around b₀ at their own time. When the limit system is autonomous (γ = 2)
/// the exact solution started at τ₀ is b₀(τ − τ₀), and matching its Taylor
/// expansion in τ₀ term by term requires the interaction sums with the
/// opposite sign to the one written; with the written sign the construction
/// is consistent only to first order.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HierarchyVariant {
    #[default]
    AsWritten,
    ShiftConsistent,
}

impl HierarchyVariant {
    fn sign(self) -> f64 {
        match self {
            HierarchyVariant::AsWritten => 1.0,
            HierarchyVariant::ShiftConsistent => -1.0,
        }
    }
}

/// Q-sums over ordered pairs of already computed corrections (scaled by
/// `sign`), plus an optional (i/2)Δb₀ forcing.
fn interaction_source<'a>(
    base: &'a Trajectory,
    done: &'a [Trajectory],
    pairs: Vec<(usize, usize)>,
    sign: f64,
    lambda: f64,
    kernel: &'a RieszKernel,
    with_equation_force: bool,
) -> Option<SourceFn<'a>> {
    if pairs.is_empty() && !with_equation_force {
        return None;
    }
    Some(Box::new(move |t: f64| -> Result<SourceTerms> {
        let g = base.grid().clone();
        let m = g.m;
        let mut amp = vec![Complex64::default(); m];
        let mut phase = vec![0.0; m];
        let mut rho = vec![0.0; m];
        if !pairs.is_empty() {
            let mut states: Vec<Option<HydroState>> = vec![None; done.len()];
            for &(j, k) in &pairs {
                for i in [j, k] {
                    if states[i - 1].is_none() {
                        states[i - 1] = Some(done[i - 1].at(t)?);
                    }
                }
            }
            for &(j, k) in &pairs {
                let (sj, sk) = (states[j - 1].as_ref().unwrap(), states[k - 1].as_ref().unwrap());
                let q = super::q1(&sj.a, &sk.v)?;
                for i in 0..m {
                    amp[i] += sign * q.values[i];
                    phase[i] -= sign * 0.5 * sj.v.values[i] * sk.v.values[i];
                    rho[i] += sign * (sj.a.values[i] * sk.a.values[i].conj()).re;
                }
            }
        }
        let phase_weighted = if rho.iter().any(|&x| x != 0.0) {
            kernel.apply_slice(&rho).into_iter().map(|x| -lambda * x).collect()
        } else {
            vec![0.0; m]
        };
        if with_equation_force {
            let b0 = base.at(t)?.a;
            for (a, l) in amp.iter_mut().zip(laplacian(&g, &b0.values)) {
                *a += Complex64::new(0.0, 0.5) * l;
            }
        }
        Ok(SourceTerms { amp, phase, phase_weighted })
    }))
}

/// Initial (b, w, φ) from the pha/amp tags: b = −a_l, (w, φ) = −(v_l, φ_l).
fn tagged_initial(table: &ExpansionTable, tags: &[Tag]) -> Result<HydroState> {
    let g = table.a[0].grid.clone();
    let mut s = HydroState::zeros(&g, 0.0);
    for t in tags {
        match *t {
            Tag::Amp(l) => {
                let a = table.a.get(l).ok_or_else(|| Error::InvalidArgument(format!("expansion table lacks a_{l}")))?;
                s.a = a.scaled(-1.0);
            }
            Tag::Pha(l) => {
                let v = table.v.get(l).ok_or_else(|| Error::InvalidArgument(format!("expansion table lacks v_{l}")))?;
                s.v = v.scaled(-1.0);
                s.phi = table.phi[l].scaled(-1.0);
            }
            Tag::Int => {}
        }
    }
    Ok(s)
}

/// Highest l referenced by the initial-data rule.
pub fn required_order(pset: &PSet) -> usize {
    pset.entries
        .iter()
        .flat_map(|e| e.tags.iter())
        .chain(&pset.equ_tags)
        .filter_map(|t| match t {
            Tag::Pha(l) | Tag::Amp(l) => Some(*l),
            Tag::Int => None,
        })
        .max()
        .unwrap_or(1)
}

#[derive(Clone, Debug)]
pub struct Corrections {
    /// corrections[i−1] is (b_i, w_i, φ_i) for p_i, i = 1..N, in its own
    /// (shifted) time starting at 0.
    pub corrections: Vec<Trajectory>,
    pub equ: Trajectory,
}

/// Solves the correction hierarchy in increasing p_i, then the equ pair.
/// For α ≥ 1 the set is trivial and only the equ pair is computed, from
/// zero data (α > 1) or w = −v₁, φ = −φ₁ (α = 1).
#[allow(clippy::too_many_arguments)]
pub fn solve_correction_hierarchy(
    params: &ModelParams,
    base: &Trajectory,
    pset: &PSet,
    table: &ExpansionTable,
    kernel: &RieszKernel,
    t_end: f64,
    dt: f64,
    opts: HydroOptions,
    variant: HierarchyVariant,
) -> Result<Corrections> {
    if base.start() > 1e-14 {
        return Err(Error::InvalidArgument(format!("base trajectory starts at {} instead of 0", base.start())));
    }
    if base.end() < t_end * (1.0 - 1e-12) {
        return Err(Error::OutOfWindow { t: t_end, start: base.start(), end: base.end() });
    }
    if !table.a[0].grid.same_as(base.grid()) {
        return Err(Error::GridMismatch("expansion table and base trajectory grids differ".into()));
    }
    if required_order(pset) > table.j_max {
        return Err(Error::InvalidArgument(format!("expansion table of order {} is too short; need {}", table.j_max, required_order(pset))));
    }
    let mut corrections: Vec<Trajectory> = Vec::with_capacity(pset.n);
    for i in 1..=pset.n {
        let entry = &pset.entries[i];
        let init = tagged_initial(table, &entry.tags)?;
        let pairs = pset.pairs_summing_to(&entry.p);
        let traj = {
            let src = interaction_source(base, &corrections, pairs, variant.sign(), params.lambda, kernel, false);
            integrate(&linearised_system(params, kernel, base, src), &init, t_end, dt, opts)?
        };
        log::debug!("correction p_{i} = {:.6} done", entry.p.value);
        corrections.push(traj);
    }
    let pairs = pset.pairs_summing_to(&pset.one());
    let init = tagged_initial(table, &pset.equ_tags)?;
    let equ = {
        let src = interaction_source(base, &corrections, pairs, variant.sign(), params.lambda, kernel, true);
        integrate(&linearised_system(params, kernel, base, src), &init, t_end, dt, opts)?
    };
    Ok(Corrections { corrections, equ })
}

/// The equ pair alone from explicit initial data.
pub fn solve_equ(params: &ModelParams, base: &Trajectory, init: &HydroState, kernel: &RieszKernel, t_end: f64, dt: f64, opts: HydroOptions) -> Result<Trajectory> {
    let src = interaction_source(base, &[], Vec::new(), 1.0, params.lambda, kernel, true);
    integrate(&linearised_system(params, kernel, base, src), init, t_end, dt, opts)
}

/// The phase-only correction w = −v₁, φ = −φ₁ with no forcing.
pub fn solve_pha1(params: &ModelParams, base: &Trajectory, table: &ExpansionTable, kernel: &RieszKernel, t_end: f64, dt: f64, opts: HydroOptions) -> Result<Trajectory> {
    let init = tagged_initial(table, &[Tag::Pha(1)])?;
    integrate(&linearised_system(params, kernel, base, None), &init, t_end, dt, opts)
}
