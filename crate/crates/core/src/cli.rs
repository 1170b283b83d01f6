//! Batch commands behind the `hartree-cascade` binary. Each command reads a
//! [`RunConfig`], writes `<command>.json` (result plus resolved config and
//! version) and CSV tables into the output directory, and returns an exit
//! code: 0 success, 1 scientific failure (breakdown detected, trend
//! violated). Errors map to 2 (usage/config) or 3 (numerical abort).

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::cascade::{breakdown_time, build_approximant, strictly_decreasing, sweep, sweep_nls, ApproxOptions, ErrorPoint, SweepSpec};
use crate::config::{Oracle, RunConfig, SystemKind};
use crate::error::{Error, Result};
use crate::euler_poisson::{blowup_report, closed_form_n4, density_along, log_radii, BlowupReport, BlowupStatus, InitialMass};
use crate::expansion::{expand, phi2_closed_form, verify_expansion_order, OrderFit};
use crate::hydro::{solve_full, solve_limit, HydroOptions, Trajectory};
use crate::io::{write_csv, write_json};
use crate::nls::{evolve, NlsOptions, WaveField};
use crate::pset::{build_pset, layer_schedule, LayerTable, PSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Pset,
    Layers,
    Expand,
    Hydro,
    Nls,
    Compare,
    Blowup,
    Sweep,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Pset => "pset",
            Command::Layers => "layers",
            Command::Expand => "expand",
            Command::Hydro => "hydro",
            Command::Nls => "nls",
            Command::Compare => "compare",
            Command::Blowup => "blowup",
            Command::Sweep => "sweep",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub code: i32,
    pub files: Vec<PathBuf>,
    /// One-line human summary.
    pub summary: String,
}

/// Exit code for an error: 3 for numerical aborts, 2 otherwise.
pub fn error_code(e: &Error) -> i32 {
    if e.is_numerical() {
        3
    } else {
        2
    }
}

pub fn run(cmd: Command, cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    cfg.validate()?;
    std::fs::create_dir_all(out)?;
    match cmd {
        Command::Pset => cmd_pset(cfg, out),
        Command::Layers => cmd_layers(cfg, out),
        Command::Expand => cmd_expand(cfg, out),
        Command::Hydro => cmd_hydro(cfg, out),
        Command::Nls => cmd_nls(cfg, out),
        Command::Compare => cmd_compare(cfg, out),
        Command::Blowup => cmd_blowup(cfg, out),
        Command::Sweep => cmd_sweep(cfg, out),
    }
}

fn done(code: i32, files: Vec<PathBuf>, summary: String) -> Result<Outcome> {
    Ok(Outcome { code, files, summary })
}

#[derive(Serialize)]
struct PsetResult<'a> {
    exponents: Vec<f64>,
    n: usize,
    closure_violations: Vec<(usize, usize)>,
    pset: &'a PSet,
}

fn cmd_pset(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    let p = build_pset(&cfg.params()?);
    let res = PsetResult { exponents: p.exponents(), n: p.n, closure_violations: p.closure_violations(), pset: &p };
    let path = out.join("pset.json");
    write_json(&path, "pset", cfg, &res)?;
    done(0, vec![path], format!("N = {}, P = {:?}", p.n, res.exponents))
}

fn cmd_layers(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    let t: LayerTable = layer_schedule(&cfg.params()?, cfg.layers.j_max);
    let path = out.join("layers.json");
    write_json(&path, "layers", cfg, &t)?;
    done(0, vec![path], format!("{} layers, first {:.6}, final {:.6}", t.rows.len(), t.first_layer, t.final_layer))
}

#[derive(Serialize)]
struct FitRow {
    j: usize,
    expected_b: f64,
    expected_w: f64,
    fit: OrderFit,
}

#[derive(Serialize)]
struct ExpandResult {
    j_max: usize,
    gradient_mismatch: f64,
    /// Relative L² distance between φ₂ and its closed form (J ≥ 2).
    phi2_closed_form_error: Option<f64>,
    fits: Vec<FitRow>,
}

fn cmd_expand(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    let p = cfg.params()?;
    let g = cfg.grid()?;
    let kernel = cfg.kernel(&g)?;
    let a0 = cfg.initial(&g)?;
    let e = &cfg.expand;
    let table = expand(&a0, &p, &kernel, e.j_max)?;
    let t_end = e.tau_samples.iter().cloned().fold(0.0, f64::max);
    let base = solve_limit(&p, &a0, &kernel, t_end, e.dt, HydroOptions::default())?;
    let gam = p.gamma();
    let fits = e
        .fit_orders
        .iter()
        .map(|&j| {
            let fit = verify_expansion_order(&base, &table, j, &e.tau_samples)?;
            let jf = (j + 1) as f64;
            Ok(FitRow { j, expected_b: gam * jf, expected_w: gam * jf - 1.0, fit })
        })
        .collect::<Result<Vec<_>>>()?;
    let phi2_closed_form_error = if e.j_max >= 2 {
        let c = phi2_closed_form(&a0, &p, &kernel)?;
        let scale = c.l2();
        Some(if scale > 0.0 { table.phi[2].sub(&c).l2() / scale } else { table.phi[2].l2() })
    } else {
        None
    };
    let res = ExpandResult { j_max: e.j_max, gradient_mismatch: table.gradient_mismatch(), phi2_closed_form_error, fits };
    let json = out.join("expand.json");
    write_json(&json, "expand", cfg, &res)?;
    let csv = out.join("expand.csv");
    let r = g.nodes();
    write_csv(
        &csv,
        &["j", "r", "re_a", "im_a", "v", "phi"],
        (0..=e.j_max).flat_map(|j| {
            let t = &table;
            (0..g.m).map(move |i| vec![j.into(), r[i].into(), t.a[j].values[i].re.into(), t.a[j].values[i].im.into(), t.v[j].values[i].into(), t.phi[j].values[i].into()])
        }),
    )?;
    let slopes: Vec<String> = res.fits.iter().map(|f| format!("J={}: b {:.3} (want {}), w {:.3} (want {})", f.j, f.fit.slope_b, f.expected_b, f.fit.slope_w, f.expected_w)).collect();
    done(0, vec![json, csv], slopes.join("; "))
}

fn trajectory_csv(path: &Path, tr: &Trajectory) -> Result<()> {
    let r = tr.grid().nodes().to_vec();
    write_csv(
        path,
        &["tau", "r", "re_a", "im_a", "v", "phi"],
        tr.states.iter().flat_map(|s| {
            let r = r.clone();
            (0..r.len()).map(move |i| vec![s.tau.into(), r[i].into(), s.a.values[i].re.into(), s.a.values[i].im.into(), s.v.values[i].into(), s.phi.values[i].into()])
        }),
    )
}

#[derive(Serialize)]
struct HydroResult {
    system: SystemKind,
    tau_start: f64,
    tau_end: f64,
    stored_states: usize,
    max_gradient_residual: f64,
    max_courant: f64,
    final_max_da: f64,
    mass_start: f64,
    mass_end: f64,
}

fn cmd_hydro(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    let p = cfg.params()?;
    let g = cfg.grid()?;
    let kernel = cfg.kernel(&g)?;
    let a0 = cfg.initial(&g)?;
    let h = &cfg.hydro;
    let opts = h.options(h.stride);
    let tr = match h.system {
        SystemKind::Limit => solve_limit(&p, &a0, &kernel, h.t_end, h.dt, opts)?,
        SystemKind::Full => {
            if p.h <= 0.0 {
                return Err(Error::Config("hydro.system = \"full\" needs model.eps or model.h".into()));
            }
            solve_full(&p, &a0, &kernel, h.t_end, h.dt, opts)?
        }
    };
    let res = HydroResult {
        system: h.system,
        tau_start: tr.start(),
        tau_end: tr.end(),
        stored_states: tr.states.len(),
        max_gradient_residual: tr.max_gradient_residual(),
        max_courant: tr.diagnostics.iter().map(|d| d.courant).fold(0.0, f64::max),
        final_max_da: tr.diagnostics.last().map_or(0.0, |d| d.max_da),
        mass_start: tr.states[0].a.l2(),
        mass_end: tr.last().a.l2(),
    };
    let json = out.join("hydro.json");
    write_json(&json, "hydro", cfg, &res)?;
    let csv = out.join("hydro.csv");
    trajectory_csv(&csv, &tr)?;
    let diag = out.join("hydro_diagnostics.csv");
    write_csv(
        &diag,
        &["tau", "courant", "gradient_residual", "max_da"],
        tr.diagnostics.iter().map(|d| vec![d.tau.into(), d.courant.into(), d.gradient_residual.into(), d.max_da.into()]),
    )?;
    done(0, vec![json, csv, diag], format!("{:?} system to tau = {:.4}, max |d_r a| = {:.4e}", h.system, res.tau_end, res.final_max_da))
}

#[derive(Serialize)]
struct NlsResult {
    h: f64,
    tau0: f64,
    tau_end: f64,
    stored_states: usize,
    /// max_k |‖ψ_k‖ − ‖ψ₀‖| / ‖ψ₀‖ over stored states.
    mass_drift: f64,
    /// ‖ψ − a^h e^{iφ^h/h}‖ / ‖ψ‖ at τ_end.
    grenier_distance: Option<f64>,
}

fn cmd_nls(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    let p = cfg.params()?;
    if p.h <= 0.0 {
        return Err(Error::Config("nls needs model.eps or model.h".into()));
    }
    let g = cfg.grid()?;
    let kernel = cfg.kernel(&g)?;
    let a0 = cfg.initial(&g)?;
    let c = &cfg.nls;
    let psi0 = WaveField::initial(a0.clone(), p);
    let tau_end = psi0.tau + c.duration;
    let opts = NlsOptions { safety: c.safety, stride: c.stride.max(1), mass_tol: c.mass_tol };
    let snaps = evolve(&psi0, tau_end, c.dt, &kernel, opts)?;
    let m0 = psi0.mass();
    let mass_drift = if m0 > 0.0 { snaps.iter().map(|s| (s.mass() - m0).abs() / m0).fold(0.0, f64::max) } else { 0.0 };
    let last = snaps.last().expect("evolve keeps the initial state");
    let grenier_distance = if c.compare_grenier {
        let tr = solve_full(&p, &a0, &kernel, tau_end, c.grenier_dt, HydroOptions { stride: usize::MAX, ..HydroOptions::default() })?;
        let rec = tr.last().reconstruct(p.h);
        let norm = last.psi.l2();
        Some(last.psi.sub(&rec).l2() / if norm > 0.0 { norm } else { 1.0 })
    } else {
        None
    };
    let res = NlsResult { h: p.h, tau0: psi0.tau, tau_end, stored_states: snaps.len(), mass_drift, grenier_distance };
    let json = out.join("nls.json");
    write_json(&json, "nls", cfg, &res)?;
    let csv = out.join("nls.csv");
    let r = g.nodes();
    write_csv(
        &csv,
        &["tau", "r", "re_psi", "im_psi"],
        snaps.iter().flat_map(|s| (0..g.m).map(move |i| vec![s.tau.into(), r[i].into(), s.psi.values[i].re.into(), s.psi.values[i].im.into()])),
    )?;
    done(0, vec![json, csv], format!("mass drift {:.3e}, Grenier distance {:?}", mass_drift, grenier_distance))
}

/// Approximant plus one error curve per ε.
fn cascade_curves(cfg: &RunConfig) -> Result<Vec<Vec<ErrorPoint>>> {
    let p = cfg.params()?;
    let g = cfg.grid()?;
    let kernel = cfg.kernel(&g)?;
    let a0 = cfg.initial(&g)?;
    let c = &cfg.cascade;
    let t_end = c.tau.iter().cloned().fold(0.0, f64::max);
    let hydro = HydroOptions { stride: 1, ..HydroOptions::default() };
    let w = build_approximant(&p, &a0, &kernel, ApproxOptions { t_end, dt: c.dt, j_max: c.j_max, hydro, variant: c.variant }, c.prepared)?;
    let spec = SweepSpec { eps: c.eps.clone(), tau_samples: c.tau.clone(), s: c.s, dt: c.dt, hydro };
    match c.oracle {
        Oracle::Grenier => sweep(&w, &a0, &kernel, &spec),
        Oracle::Nls => sweep_nls(&w, &a0, &kernel, &spec, c.nls_dt),
    }
}

fn curves_csv(path: &Path, curves: &[Vec<ErrorPoint>]) -> Result<()> {
    write_csv(
        path,
        &["eps", "h", "tau", "t", "s", "error"],
        curves.iter().flatten().map(|p| vec![p.eps.into(), p.h.into(), p.tau.into(), p.t.into(), p.s.into(), p.error.into()]),
    )
}

#[derive(Serialize)]
struct Trend {
    tau: f64,
    eps: Vec<f64>,
    errors: Vec<f64>,
    decreasing: bool,
}

#[derive(Serialize)]
struct CompareResult {
    trends: Vec<Trend>,
    all_decreasing: bool,
}

fn cmd_compare(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    let curves = cascade_curves(cfg)?;
    if let Some(c) = curves.iter().find(|c| c.len() != cfg.cascade.tau.len()) {
        let eps = c.first().map_or(f64::NAN, |p| p.eps);
        return Err(Error::Config(format!("a cascade.tau sample precedes the initial time tau0 for eps = {eps:e}")));
    }
    let trends: Vec<Trend> = cfg
        .cascade
        .tau
        .iter()
        .enumerate()
        .map(|(k, &tau)| {
            let errors: Vec<f64> = curves.iter().map(|c| c[k].error).collect();
            Trend { tau, eps: cfg.cascade.eps.clone(), decreasing: strictly_decreasing(&errors), errors }
        })
        .collect();
    let all_decreasing = trends.iter().all(|t| t.decreasing);
    let res = CompareResult { trends, all_decreasing };
    let json = out.join("compare.json");
    write_json(&json, "compare", cfg, &res)?;
    let csv = out.join("compare.csv");
    curves_csv(&csv, &curves)?;
    let summary = res.trends.iter().map(|t| format!("tau = {}: {:?} ({})", t.tau, t.errors, if t.decreasing { "decreasing" } else { "NOT decreasing" })).collect::<Vec<_>>().join("; ");
    done(if all_decreasing { 0 } else { 1 }, vec![json, csv], summary)
}

#[derive(Serialize)]
struct SweepRow {
    eps: f64,
    h: f64,
    /// First sample time with error above the ceiling.
    breakdown_tau: Option<f64>,
    max_error: f64,
}

fn cmd_sweep(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    let curves = cascade_curves(cfg)?;
    let rows: Vec<SweepRow> = curves
        .iter()
        .zip(&cfg.cascade.eps)
        .map(|(c, &eps)| SweepRow {
            eps,
            h: cfg.params().map_or(f64::NAN, |p| p.with_eps(eps).map_or(f64::NAN, |q| q.h)),
            breakdown_tau: breakdown_time(c, cfg.cascade.ceiling),
            max_error: c.iter().map(|p| p.error).fold(0.0, f64::max),
        })
        .collect();
    let json = out.join("sweep.json");
    write_json(&json, "sweep", cfg, &rows)?;
    let csv = out.join("sweep.csv");
    curves_csv(&csv, &curves)?;
    let summary = rows.iter().map(|r| format!("eps = {:e}: max error {:.3e}, breakdown {:?}", r.eps, r.max_error, r.breakdown_tau)).collect::<Vec<_>>().join("; ");
    done(0, vec![json, csv], summary)
}

#[derive(Serialize)]
struct BlowupResult {
    report: BlowupReport,
    launch_radii: usize,
    /// n = 4: max relative deviation of traced X and Γ from the closed form.
    closed_form_max_rel_x: Option<f64>,
    closed_form_max_abs_gamma: Option<f64>,
}

fn cmd_blowup(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    let g = cfg.grid()?;
    let a0 = cfg.initial(&g)?;
    let lambda = cfg.model.lambda;
    let b = &cfg.blowup;
    let mass = match cfg.data.closed_form_density() {
        Some(rho) => InitialMass::from_density(g.n, move |r| rho(r)),
        None => InitialMass::from_field(&a0)?,
    };
    let radii = match b.count {
        Some(k) => log_radii(b.r_lo, b.r_hi, k),
        None => g.nodes().to_vec(),
    };
    let (report, tr) = blowup_report(&a0, &mass, &radii, lambda, b.tau_end, b.dt, b.stride)?;
    let (mut rel_x, mut abs_g) = (None, None);
    if g.n == 4 {
        let (mut ex, mut eg) = (0.0f64, 0.0f64);
        for s in &tr.snapshots {
            for i in 0..s.r.len() {
                if let Some(cf) = closed_form_n4(s.r[i], s.tau, lambda, s.m0[i], s.rho0[i]) {
                    ex = ex.max((s.x[i] - cf.x).abs() / cf.x);
                    eg = eg.max((s.gamma[i] - cf.gamma).abs());
                }
            }
        }
        rel_x = Some(ex);
        abs_g = Some(eg);
    }
    let code = if report.status == BlowupStatus::Blowup { 1 } else { 0 };
    let summary = format!("{:?}: tau* = {:?}, R* = {:?}, tau_c (closed form) = {:?}", report.status, report.tau_star, report.r_star, report.tau_c_closed);
    let res = BlowupResult { report, launch_radii: radii.len(), closed_form_max_rel_x: rel_x, closed_form_max_abs_gamma: abs_g };
    let json = out.join("blowup.json");
    write_json(&json, "blowup", cfg, &res)?;
    let csv = out.join("characteristics.csv");
    let mut rows = Vec::new();
    for s in &tr.snapshots {
        for p in density_along(s)? {
            rows.push(vec![s.tau.into(), p.r.into(), p.x.into(), p.v.into(), p.gamma.into(), p.rho.into()]);
        }
    }
    write_csv(&csv, &["tau", "R", "X", "Xdot", "Gamma", "rho"], rows)?;
    done(code, vec![json, csv], summary)
}
