//! Direct radial Hartree–Schrödinger run against a^h e^{iφ^h/h} from the
//! Grenier system, under dt and Δr refinement (h = 0.05, γ = 2, α = 1/3).

use hartree_cascade::hydro::{solve_full, HydroOptions};
use hartree_cascade::nls::{evolve, NlsOptions, WaveField};
use hartree_cascade::params::{ModelParams, Real};
use hartree_cascade::potential::build_kernel;
use hartree_cascade::{ComplexField, Parity, RadialGrid};
use num_complex::Complex64;

fn distance(m: usize, dt: f64) -> hartree_cascade::Result<(f64, f64)> {
    let p = ModelParams::new(4, Real::ratio(2, 1), Real::ratio(1, 3), 1.0)?.with_h(0.05)?;
    let grid = RadialGrid::new(6.0, m, 4)?;
    let kernel = build_kernel(&grid, 4, p.gamma(), 32)?;
    let a0 = ComplexField::from_fn(&grid, Parity::Even, |r| Complex64::new((-r * r).exp(), 0.0));
    let psi0 = WaveField::initial(a0.clone(), p);
    let tau_end = psi0.tau + 0.3;
    let snaps = evolve(&psi0, tau_end, dt, &kernel, NlsOptions { stride: usize::MAX, ..NlsOptions::default() })?;
    let psi = &snaps.last().unwrap().psi;
    let drift = snaps.iter().map(|s| (s.mass() - psi0.mass()).abs() / psi0.mass()).fold(0.0, f64::max);
    let tr = solve_full(&p, &a0, &kernel, tau_end, dt, HydroOptions { stride: usize::MAX, ..HydroOptions::default() })?;
    Ok((psi.sub(&tr.last().reconstruct(p.h)).l2() / psi.l2(), drift))
}

fn main() -> hartree_cascade::Result<()> {
    for (m, dt) in [(300, 2e-3), (600, 1e-3), (1200, 5e-4)] {
        let (d, drift) = distance(m, dt)?;
        println!("m = {m:5}, dt = {dt:.0e}: distance {d:.3e}, mass drift {drift:.1e}");
    }
    Ok(())
}
