//! One PASS/FAIL line per acceptance criterion. Lines listed in `EXPECTED_FAIL`
//! are known to be unattainable as stated; any other FAIL exits non-zero.

use std::time::Instant;

use hartree_cascade::cascade::{build_approximant, strictly_decreasing, sweep, ApproxOptions, SweepSpec};
use hartree_cascade::euler_poisson::{blowup_report, closed_form_n4, density_along, log_radii, mass_along, trace, InitialMass};
use hartree_cascade::expansion::{expand, phi2_closed_form, verify_expansion_order};
use hartree_cascade::hydro::{solve_equ, solve_full, solve_limit, solve_pha1, HierarchyVariant, HydroOptions, HydroState, Trajectory};
use hartree_cascade::nls::{evolve, NlsOptions, WaveField};
use hartree_cascade::params::{ModelParams, Real};
use hartree_cascade::potential::build_kernel;
use hartree_cascade::pset::build_pset;
use hartree_cascade::{ComplexField, Parity, RadialGrid};
use num_complex::Complex64;
use num_rational::Rational64;

type R<T> = hartree_cascade::Result<T>;

/// The printed τ_c has exponent 3(7−√17)/32 (inconsistent with its own
/// definition); the recursion for γ = √3, α = √3/4 closes with six exponents;
/// the hierarchy with +Q interaction sums does not converge for α = 1/3.
const EXPECTED_FAIL: &[&str] = &["1b", "3b", "6c"];

struct Report {
    lines: Vec<(String, bool)>,
}

impl Report {
    fn check(&mut self, id: &str, ok: bool, what: String) {
        println!("{} {id}: {what}", if ok { "PASS" } else { "FAIL" });
        self.lines.push((id.to_owned(), ok));
    }

    fn error(&mut self, id: &str, e: hartree_cascade::Error) {
        self.check(id, false, format!("error: {e}"));
    }
}

fn gaussian(grid: &std::sync::Arc<RadialGrid>) -> ComplexField {
    ComplexField::from_fn(grid, Parity::Even, |r| Complex64::new((-r * r).exp(), 0.0))
}

fn criterion1_2(rep: &mut Report) -> R<()> {
    let t0 = Instant::now();
    let lambda = 1.0;
    let grid = RadialGrid::new(8.0, 8000, 4)?;
    let a0 = ComplexField::from_fn(&grid, Parity::Even, |r| Complex64::new(r.powf(-2.5) * (-0.5 / r).exp(), 0.0));
    let rho0 = |r: f64| r.powi(-5) * (-1.0 / r).exp();
    let mass = InitialMass::from_density(4, rho0);
    let radii = log_radii(0.05, 7.5, 64);
    let (br, tr) = blowup_report(&a0, &mass, &radii, lambda, 2.0, 1e-3, 10)?;
    let s17 = 17f64.sqrt();
    let r_exact = (7.0 + s17) / 16.0;
    let r_c = br.r_c.unwrap_or(f64::NAN);
    rep.check("1a", (r_c - r_exact).abs() <= 1e-6, format!("maximiser {r_c:.12} vs (7+sqrt17)/16 = {r_exact:.12}"));

    let tau_c = br.tau_c_closed.unwrap_or(f64::NAN);
    let printed = ((3405.0 + 827.0 * s17) / 8192.0).sqrt() * (3.0 * (7.0 - s17) / 32.0).exp();
    let corrected = ((3405.0 + 827.0 * s17) / 8192.0).sqrt() * ((7.0 - s17) / 4.0).exp();
    let rel = (tau_c - printed).abs() / printed;
    rep.check(
        "1b",
        rel <= 1e-6,
        format!("tau_c {tau_c:.12} vs printed closed form {printed:.12} (rel {rel:.2e}); with exponent (7-sqrt17)/4: {corrected:.12} (rel {:.2e})", (tau_c - corrected).abs() / corrected),
    );

    let tau_star = br.tau_star.unwrap_or(f64::NAN);
    rep.check("1c", (tau_star - tau_c).abs() <= 1e-4, format!("first Gamma-crossing {tau_star:.12} at R = {:.9} vs tau_c {tau_c:.12}", br.r_star.unwrap_or(f64::NAN)));

    let (mut worst_rho, mut worst_x) = (0.0f64, 0.0f64);
    for snap in tr.snapshots.iter().filter(|s| s.tau <= 0.9 * tau_c) {
        for (i, p) in density_along(snap)?.iter().enumerate() {
            let (r, tau) = (p.r, snap.tau);
            let exact = 2.0 * r * r / (p.x * p.x * (2.0 * r.powi(5) * (1.0 / r).exp() - lambda * (2.0 * r - 1.0) * tau * tau));
            worst_rho = worst_rho.max((p.rho - exact).abs() / exact);
            let cf = closed_form_n4(r, tau, lambda, snap.m0[i], snap.rho0[i]).expect("closed form before breakdown");
            worst_x = worst_x.max((p.x - cf.x).abs() / cf.x);
        }
    }
    let el = t0.elapsed().as_secs_f64();
    rep.check("1d", worst_rho <= 1e-6 && el <= 10.0, format!("density along characteristics, max rel {worst_rho:.2e} for tau <= 0.9 tau_c; runtime {el:.2} s"));

    let t1 = Instant::now();
    let tr = trace(&mass, &radii, lambda, 0.9 * tau_c, 1e-3, 1)?;
    for snap in &tr.snapshots {
        for i in 0..snap.r.len() {
            let cf = closed_form_n4(snap.r[i], snap.tau, lambda, snap.m0[i], snap.rho0[i]).expect("closed form before breakdown");
            worst_x = worst_x.max((snap.x[i] - cf.x).abs() / cf.x);
        }
    }
    let el = t1.elapsed().as_secs_f64();
    rep.check("2", worst_x <= 1e-8 && el <= 5.0, format!("RK4 vs closed-form characteristics, 64 radii, max rel {worst_x:.2e}; runtime {el:.2} s"));
    Ok(())
}

fn criterion3(rep: &mut Report) -> R<()> {
    let p = build_pset(&ModelParams::new(4, Real::ratio(2, 1), Real::ratio(1, 3), 1.0)?);
    let got: Vec<Option<Rational64>> = p.entries[1..].iter().map(|e| e.p.exact).collect();
    let want: Vec<Option<Rational64>> = (1..=4).map(|k| Some(Rational64::new(k, 5))).collect();
    rep.check("3a", p.exact && p.n == 4 && got == want && p.closure_violations().is_empty(), format!("gamma = 2, alpha = 1/3: N = {}, P = {{{}}}, closed = {}", p.n, got.iter().map(|q| q.map_or("inexact".into(), |q| q.to_string())).collect::<Vec<_>>().join(", "), p.closure_violations().is_empty()));

    let s3 = 3f64.sqrt();
    let p = build_pset(&ModelParams::new(4, s3, s3 / 4.0, 1.0)?);
    let listed = [(s3 - 1.0) / 3.0, 2.0 * (s3 - 1.0) / 3.0, s3 / 3.0, s3 - 1.0, (2.0 * s3 - 1.0) / 3.0];
    let e = p.exponents();
    let found = listed.iter().all(|l| e.iter().any(|x| (x - l).abs() <= 1e-12));
    let extra: Vec<f64> = e[1..].iter().copied().filter(|x| listed.iter().all(|l| (x - l).abs() > 1e-12)).collect();
    rep.check("3b", p.n == 5 && found, format!("gamma = sqrt3, alpha = sqrt3/4: N = {} (want 5), listed exponents found = {found}, extra {extra:?}", p.n));
    rep.check("3c", found && p.closure_violations().is_empty(), format!("gamma = sqrt3: listed exponents reproduced within 1e-12 and the set is closed ({} violations)", p.closure_violations().len()));
    Ok(())
}

fn criterion4(rep: &mut Report) -> R<()> {
    let p = ModelParams::new(4, Real::ratio(2, 1), Real::ratio(1, 3), 1.0)?;
    let grid = RadialGrid::new(6.0, 600, 4)?;
    let kernel = build_kernel(&grid, 4, p.gamma(), 32)?;
    let a0 = gaussian(&grid);
    let table = expand(&a0, &p, &kernel, 3)?;
    let taus: Vec<f64> = (0..8).map(|k| 1e-3 * 100f64.powf(k as f64 / 7.0)).collect();
    let base = solve_limit(&p, &a0, &kernel, 0.1, 1e-4, HydroOptions::default())?;
    let mut ok = true;
    let mut msg = Vec::new();
    for j in 0..=1 {
        let f = verify_expansion_order(&base, &table, j, &taus)?;
        let wb = p.gamma() * (j + 1) as f64;
        let ww = wb - 1.0;
        ok &= (f.slope_b - wb).abs() <= 0.15 * wb && (f.slope_w - ww).abs() <= 0.15 * ww;
        msg.push(format!("J = {j}: b {:.4} (want {wb}), w {:.4} (want {ww})", f.slope_b, f.slope_w));
    }
    rep.check("4a", ok, format!("expansion residual slopes over tau in [1e-3, 1e-1]: {}", msg.join(", ")));
    let c = phi2_closed_form(&a0, &p, &kernel)?;
    let d = table.phi[2].sub(&c).l2() / c.l2();
    rep.check("4b", d <= 1e-6, format!("phi_2 vs closed form, rel L2 {d:.2e}"));
    Ok(())
}

/// Weighted L² distance between NLS and a^h e^{iφ^h/h} after τ₀ + 0.3, and the NLS mass drift.
fn nls_vs_grenier(m: usize, dt: f64) -> R<(f64, f64)> {
    let p = ModelParams::new(4, Real::ratio(2, 1), Real::ratio(1, 3), 1.0)?.with_h(0.05)?;
    let grid = RadialGrid::new(6.0, m, 4)?;
    let kernel = build_kernel(&grid, 4, p.gamma(), 32)?;
    let a0 = gaussian(&grid);
    let psi0 = WaveField::initial(a0.clone(), p);
    let tau_end = psi0.tau + 0.3;
    let snaps = evolve(&psi0, tau_end, dt, &kernel, NlsOptions { stride: 1, ..NlsOptions::default() })?;
    let drift = snaps.iter().map(|s| (s.mass() - psi0.mass()).abs() / psi0.mass()).fold(0.0, f64::max);
    let psi = &snaps.last().expect("final state").psi;
    let tr = solve_full(&p, &a0, &kernel, tau_end, dt, HydroOptions { stride: usize::MAX, ..HydroOptions::default() })?;
    Ok((psi.sub(&tr.last().reconstruct(p.h)).l2() / psi.l2(), drift))
}

fn criterion5_7a(rep: &mut Report) -> R<()> {
    let runs = [(300, 2e-3), (600, 1e-3), (1200, 5e-4)];
    let res = runs.iter().map(|&(m, dt)| nls_vs_grenier(m, dt)).collect::<R<Vec<_>>>()?;
    let d: Vec<f64> = res.iter().map(|r| r.0).collect();
    rep.check(
        "5",
        d[1] <= 5e-3 && strictly_decreasing(&d),
        format!("h = 0.05 NLS vs Grenier at tau0 + 0.3: {:.3e} (m = 600, dt = 1e-3); refinement {:.3e} -> {:.3e} -> {:.3e}", d[1], d[0], d[1], d[2]),
    );
    let drift = res.iter().map(|r| r.1).fold(0.0, f64::max);
    rep.check("7a", drift <= 1e-8, format!("NLS mass drift, max over three runs {drift:.2e}"));
    Ok(())
}

fn criterion6(rep: &mut Report) -> R<()> {
    let t0 = Instant::now();
    let cases = [
        ("6a", "alpha = 2 (n = 5, gamma = 3)", 5, Real::ratio(3, 1), Real::ratio(2, 1)),
        ("6b", "alpha = 1 (n = 4, gamma = 2)", 4, Real::ratio(2, 1), Real::ratio(1, 1)),
        ("6c", "alpha = 1/3 (n = 4, gamma = 2)", 4, Real::ratio(2, 1), Real::ratio(1, 3)),
    ];
    for (id, name, n, gamma, alpha) in cases {
        let p = ModelParams::new(n, gamma, alpha, 1.0)?;
        let grid = RadialGrid::new(6.0, 600, n)?;
        let kernel = build_kernel(&grid, n, p.gamma(), 32)?;
        let a0 = gaussian(&grid);
        let hydro = HydroOptions::default();
        let w = build_approximant(&p, &a0, &kernel, ApproxOptions { t_end: 0.5, dt: 2e-3, j_max: 3, hydro, variant: HierarchyVariant::AsWritten }, false)?;
        let spec = SweepSpec { eps: vec![1e-2, 1e-3, 1e-4], tau_samples: vec![0.5], s: 0, dt: 2e-3, hydro };
        let errs: Vec<f64> = sweep(&w, &a0, &kernel, &spec)?.iter().map(|c| c[0].error).collect();
        let el = t0.elapsed().as_secs_f64();
        rep.check(id, strictly_decreasing(&errs) && el <= 300.0, format!("WKB error at tau = 0.5, eps = 1e-2, 1e-3, 1e-4, {name}: {errs:.4?}; cumulative runtime {el:.1} s"));
    }
    Ok(())
}

fn relative_gradient_residual(tr: &Trajectory) -> f64 {
    tr.states
        .iter()
        .filter(|s| s.v.l2() > 0.0)
        .map(|s| s.gradient_residual() / s.v.l2())
        .fold(0.0, f64::max)
}

fn criterion7bc(rep: &mut Report) -> R<()> {
    let mass = InitialMass::from_density(4, |r| (-r * r).exp());
    let radii: Vec<f64> = (0..1024).map(|i| 0.02 + 5.0 * i as f64 / 1023.0).collect();
    let mut worst = 0.0f64;
    for lambda in [1.0, -1.0] {
        let tr = trace(&mass, &radii, lambda, 1.0, 1e-3, 50)?;
        let total = *tr.snapshots[0].m0.last().expect("radii");
        for s in &tr.snapshots {
            let m = mass_along(s)?;
            worst = worst.max(m.iter().zip(&s.m0).map(|(a, b)| (a - b).abs() / total).fold(0.0, f64::max));
        }
    }
    rep.check("7b", worst <= 1e-8, format!("characteristic mass constancy (1024 rays, lambda = +-1, tau <= 1), max |m - m0| / M = {worst:.2e}"));

    let p = ModelParams::new(4, Real::ratio(2, 1), Real::ratio(1, 3), 1.0)?.with_h(0.05)?;
    let grid = RadialGrid::new(6.0, 600, 4)?;
    let kernel = build_kernel(&grid, 4, p.gamma(), 32)?;
    let a0 = gaussian(&grid);
    let opts = HydroOptions { stride: 10, ..HydroOptions::default() };
    let lim = relative_gradient_residual(&solve_limit(&p, &a0, &kernel, 1.0, 1e-3, opts)?);
    let full = relative_gradient_residual(&solve_full(&p, &a0, &kernel, 1.0, 1e-3, opts)?);
    rep.check("7c", lim.max(full) <= 1e-5, format!("gradient consistency |d_r phi - v| / |v|: limit {lim:.2e}, full {full:.2e}"));
    Ok(())
}

fn criterion8(rep: &mut Report) -> R<()> {
    let p = ModelParams::new(4, Real::ratio(2, 1), Real::ratio(1, 1), 1.0)?;
    let grid = RadialGrid::new(6.0, 600, 4)?;
    let kernel = build_kernel(&grid, 4, p.gamma(), 32)?;
    let a0 = gaussian(&grid);
    let hydro = HydroOptions::default();
    let base = solve_limit(&p, &a0, &kernel, 0.5, 2e-3, hydro)?;
    let table = expand(&a0, &p, &kernel, 1)?;
    let mut init = HydroState::zeros(&grid, 0.0);
    init.v = table.v[1].scaled(-1.0);
    init.phi = table.phi[1].scaled(-1.0);
    let tilde = solve_equ(&p, &base, &init, &kernel, 0.5, 2e-3, hydro)?;
    let plain = solve_equ(&p, &base, &HydroState::zeros(&grid, 0.0), &kernel, 0.5, 2e-3, hydro)?;
    let pha = solve_pha1(&p, &base, &table, &kernel, 0.5, 2e-3, hydro)?;
    let mut worst = 0.0f64;
    for ((x, y), z) in tilde.states.iter().zip(&plain.states).zip(&pha.states) {
        let scale = x.phi.weighted_norm(0)?;
        if scale > 0.0 {
            worst = worst.max(x.phi.sub(&y.phi).sub(&z.phi).weighted_norm(0)? / scale);
        }
        let scale = x.a.weighted_norm(0)?;
        if scale > 0.0 {
            worst = worst.max(x.a.sub(&y.a).sub(&z.a).weighted_norm(0)? / scale);
        }
    }
    rep.check("8", worst <= 1e-6, format!("alpha = 1 equ superposition (phase and amplitude, tau <= 0.5), max rel weighted L2 {worst:.2e}"));
    Ok(())
}

fn main() {
    let mut rep = Report { lines: Vec::new() };
    let steps: [(&str, fn(&mut Report) -> R<()>); 7] = [
        ("1", criterion1_2),
        ("3", criterion3),
        ("4", criterion4),
        ("5", criterion5_7a),
        ("6", criterion6),
        ("7", criterion7bc),
        ("8", criterion8),
    ];
    for (id, f) in steps {
        if let Err(e) = f(&mut rep) {
            rep.error(id, e);
        }
    }
    let unexpected: Vec<&str> = rep.lines.iter().filter(|(id, ok)| !ok && !EXPECTED_FAIL.contains(&id.as_str())).map(|(id, _)| id.as_str()).collect();
    let passed = rep.lines.iter().filter(|l| l.1).count();
    println!("{passed}/{} criteria pass; expected failures {EXPECTED_FAIL:?}; unexpected failures {unexpected:?}", rep.lines.len());
    if !unexpected.is_empty() {
        std::process::exit(1);
    }
}
