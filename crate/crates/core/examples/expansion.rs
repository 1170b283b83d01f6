//! Small-τ expansion of the limit system for γ = 2 and a Gaussian amplitude:
//! residual slopes after J terms and the closed form of φ₂.

use hartree_cascade::expansion::{expand, phi2_closed_form, verify_expansion_order};
use hartree_cascade::hydro::{solve_limit, HydroOptions};
use hartree_cascade::params::{ModelParams, Real};
use hartree_cascade::potential::build_kernel;
use hartree_cascade::{ComplexField, Parity, RadialGrid};
use num_complex::Complex64;

fn main() -> hartree_cascade::Result<()> {
    let p = ModelParams::new(4, Real::ratio(2, 1), Real::ratio(1, 3), 1.0)?;
    let grid = RadialGrid::new(6.0, 600, 4)?;
    let kernel = build_kernel(&grid, 4, p.gamma(), 32)?;
    let a0 = ComplexField::from_fn(&grid, Parity::Even, |r| Complex64::new((-r * r).exp(), 0.0));
    let table = expand(&a0, &p, &kernel, 3)?;
    let taus: Vec<f64> = (0..8).map(|k| 1e-3 * 100f64.powf(k as f64 / 7.0)).collect();
    let base = solve_limit(&p, &a0, &kernel, 0.1, 1e-4, HydroOptions::default())?;
    for j in 0..=1 {
        let f = verify_expansion_order(&base, &table, j, &taus)?;
        let want = p.gamma() * (j + 1) as f64;
        println!("J = {j}: slope b {:.4} (want {want}), slope w {:.4} (want {})", f.slope_b, f.slope_w, want - 1.0);
    }
    let c = phi2_closed_form(&a0, &p, &kernel)?;
    println!("phi_2 vs closed form: rel. L2 {:.2e}", table.phi[2].sub(&c).l2() / c.l2());
    println!("max |d_r phi_j - v_j| = {:.2e}", table.gradient_mismatch());
    Ok(())
}
