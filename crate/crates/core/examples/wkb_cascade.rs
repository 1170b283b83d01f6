//! WKB error at τ = 0.5 across ε for linear (α = 2), critical (α = 1) and
//! supercritical (α = 1/3) regimes; the supercritical case is shown with both
//! hierarchy variants.

use hartree_cascade::cascade::{build_approximant, strictly_decreasing, sweep, ApproxOptions, SweepSpec};
use hartree_cascade::hydro::{HierarchyVariant, HydroOptions};
use hartree_cascade::params::{ModelParams, Real};
use hartree_cascade::potential::build_kernel;
use hartree_cascade::{ComplexField, Parity, RadialGrid};
use num_complex::Complex64;

fn main() -> hartree_cascade::Result<()> {
    let cases = [
        ("alpha = 2, n = 5, gamma = 3", 5, Real::ratio(3, 1), Real::ratio(2, 1), 1.0, HierarchyVariant::AsWritten),
        ("alpha = 1", 4, Real::ratio(2, 1), Real::ratio(1, 1), 1.0, HierarchyVariant::AsWritten),
        ("alpha = 1/3", 4, Real::ratio(2, 1), Real::ratio(1, 3), 1.0, HierarchyVariant::AsWritten),
        ("alpha = 1/3, lambda = 0.1", 4, Real::ratio(2, 1), Real::ratio(1, 3), 0.1, HierarchyVariant::AsWritten),
        ("alpha = 1/3, lambda = 0.1, shift-consistent", 4, Real::ratio(2, 1), Real::ratio(1, 3), 0.1, HierarchyVariant::ShiftConsistent),
    ];
    let eps = vec![1e-2, 1e-3, 1e-4];
    for (name, n, gamma, alpha, lambda, variant) in cases {
        let p = ModelParams::new(n, gamma, alpha, lambda)?;
        let grid = RadialGrid::new(6.0, 600, n)?;
        let kernel = build_kernel(&grid, n, p.gamma(), 32)?;
        let a0 = ComplexField::from_fn(&grid, Parity::Even, |r| Complex64::new((-r * r).exp(), 0.0));
        let hydro = HydroOptions::default();
        let w = build_approximant(&p, &a0, &kernel, ApproxOptions { t_end: 0.5, dt: 2e-3, j_max: 3, hydro, variant }, false)?;
        let spec = SweepSpec { eps: eps.clone(), tau_samples: vec![0.5], s: 0, dt: 2e-3, hydro };
        let errs: Vec<f64> = sweep(&w, &a0, &kernel, &spec)?.iter().map(|c| (c[0].error * 1e4).round() / 1e4).collect();
        println!("{name}: {errs:?} decreasing = {}", strictly_decreasing(&errs));
    }
    Ok(())
}
