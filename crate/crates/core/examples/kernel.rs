//! Riesz kernel on a radial grid: the Newtonian case γ = n − 2 reduces to the
//! enclosed-mass formula ∂_r V = c·m₀/r^{n−1}; the measured c is the factor
//! linking Hartree and Euler–Poisson couplings.

use hartree_cascade::potential::{build_kernel, calibrate_newtonian, sphere_area};
use hartree_cascade::{Parity, RadialGrid, RealField};

fn main() -> hartree_cascade::Result<()> {
    for n in [3usize, 4, 5] {
        let grid = RadialGrid::new(8.0, 400, n)?;
        let kernel = build_kernel(&grid, n, n as f64 - 2.0, 32)?;
        let rho = RealField::from_fn(&grid, Parity::Even, |r| (-r * r).exp());
        let cal = calibrate_newtonian(&kernel, &rho, 0.5, 4.0)?;
        // shell weights omit |S^{n-1}|, so c should be (n−2)·|S^{n−1}|
        let want = (n as f64 - 2.0) * sphere_area(n - 1);
        println!("n = {n}: c = {:.6} (expect {want:.6}), spread {:.2e}", -cal.constant, cal.spread);
    }
    let grid = RadialGrid::new(8.0, 400, 4)?;
    let kernel = build_kernel(&grid, 4, 1.0, 32)?;
    let rho = RealField::from_fn(&grid, Parity::Even, |r| (-r * r).exp());
    let v = kernel.apply(&rho)?;
    println!("gamma = 1, n = 4: V(0) = {:.6}, V(r_max) = {:.6}", v.values[0], v.values[grid.m - 1]);
    Ok(())
}
