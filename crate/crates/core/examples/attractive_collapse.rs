//! Attractive Euler–Poisson flow (λ < 0, n = 4): the a-priori bound T* on the
//! breakdown time against the traced collapse, and the outward velocity that
//! keeps the flow global.

use hartree_cascade::euler_poisson::{attractive_bound, autonomous_global_velocity, blowup_report, log_radii, InitialMass};
use hartree_cascade::{ComplexField, Parity, RadialGrid};
use num_complex::Complex64;

fn main() -> hartree_cascade::Result<()> {
    let lambda = -1.0;
    let grid = RadialGrid::new(6.0, 1200, 4)?;
    let a0 = ComplexField::from_fn(&grid, Parity::Even, |r| Complex64::new(2.0 * (-r * r).exp(), 0.0));
    let bound = attractive_bound(&a0, lambda)?;
    let mass = InitialMass::from_field(&a0)?;
    let (rep, _) = blowup_report(&a0, &mass, &log_radii(0.05, 5.0, 64), lambda, 1.5 * bound, 1e-3, 50)?;
    println!("T* bound {bound:.6}");
    println!("status {:?}: tau* = {:?} at R = {:?} ({:?})", rep.status, rep.tau_star, rep.r_star, rep.event);
    let v = autonomous_global_velocity(&a0.abs2_field(), lambda)?;
    for r in [0.5, 1.0, 2.0, 4.0] {
        println!("  escape velocity at r = {r}: {:.6}", v.values[grid.index_of(r)]);
    }
    Ok(())
}
