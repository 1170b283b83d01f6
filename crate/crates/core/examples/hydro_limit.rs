//! Limit and full Grenier systems from the same Gaussian amplitude:
//! Courant numbers, gradient consistency ∂_rφ = v and the amplitude norm.

use hartree_cascade::hydro::{solve_full, solve_limit, HydroOptions};
use hartree_cascade::params::{ModelParams, Real};
use hartree_cascade::potential::build_kernel;
use hartree_cascade::{ComplexField, Parity, RadialGrid};
use num_complex::Complex64;

fn main() -> hartree_cascade::Result<()> {
    let p = ModelParams::new(4, Real::ratio(2, 1), Real::ratio(1, 3), 1.0)?.with_h(0.05)?;
    let grid = RadialGrid::new(6.0, 600, 4)?;
    let kernel = build_kernel(&grid, 4, p.gamma(), 32)?;
    let a0 = ComplexField::from_fn(&grid, Parity::Even, |r| Complex64::new((-r * r).exp(), 0.0));
    let opts = HydroOptions { stride: 100, ..HydroOptions::default() };
    for (name, tr) in [("limit", solve_limit(&p, &a0, &kernel, 1.0, 1e-3, opts)?), ("full", solve_full(&p, &a0, &kernel, 1.0, 1e-3, opts)?)] {
        let courant = tr.diagnostics.iter().map(|d| d.courant).fold(0.0, f64::max);
        println!("{name}: tau {:.4} -> {:.4}, max courant {courant:.3}, max grad residual {:.2e}", tr.start(), tr.end(), tr.max_gradient_residual());
        for s in &tr.states {
            println!("  tau {:.3}  |a| {:.6}  max|v| {:.4}", s.tau, s.a.l2(), s.v.max_abs());
        }
    }
    Ok(())
}
