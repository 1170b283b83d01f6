use hartree_cascade::euler_poisson::{attractive_bound, autonomous_global_velocity, log_radii, mass_along, mean_mass, trace, InitialMass};
use hartree_cascade::{ComplexField, Parity, RadialGrid, RealField};
use num_complex::Complex64;

fn flat_core() -> InitialMass {
    InitialMass::from_density(4, |r| r.powi(-5) * (-1.0 / r).exp())
}

#[test]
fn characteristics_stay_ordered_before_breakdown() {
    let radii = log_radii(0.1, 6.0, 48);
    let tr = trace(&flat_core(), &radii, 1.0, 1.7, 1e-3, 100).unwrap();
    assert!(tr.first_event.is_none());
    for s in &tr.snapshots {
        assert!(s.x.windows(2).all(|w| w[1] > w[0]), "tau = {}", s.tau);
        assert!(s.gamma.iter().all(|&g| g > 0.0));
    }
}

#[test]
fn mass_is_carried_by_the_flow() {
    let mass = InitialMass::from_density(4, |r| (-r * r).exp());
    let radii: Vec<f64> = (0..1024).map(|i| 0.02 + 5.0 * i as f64 / 1023.0).collect();
    for lambda in [1.0, -1.0] {
        let tr = trace(&mass, &radii, lambda, 1.0, 1e-3, 100).unwrap();
        let total = *tr.snapshots[0].m0.last().unwrap();
        for s in &tr.snapshots {
            let m = mass_along(s).unwrap();
            let worst = m.iter().zip(&s.m0).map(|(a, b)| (a - b).abs() / total).fold(0.0, f64::max);
            assert!(worst < 1e-8, "lambda = {lambda}, tau = {}: {worst:e}", s.tau);
        }
    }
}

#[test]
fn gamma_matches_finite_difference_of_x() {
    let radii: Vec<f64> = (0..201).map(|k| 0.5 + 0.005 * k as f64).collect();
    let tr = trace(&flat_core(), &radii, 1.0, 1.5, 1e-3, 500).unwrap();
    let s = tr.last();
    for i in 1..radii.len() - 1 {
        let fd = (s.x[i + 1] - s.x[i - 1]) / (radii[i + 1] - radii[i - 1]);
        assert!((fd - s.gamma[i]).abs() < 1e-3 * s.gamma[i].abs().max(1.0), "R = {}", radii[i]);
    }
}

#[test]
fn mean_mass_at_origin_is_quarter_density() {
    let g = RadialGrid::new(4.0, 800, 4).unwrap();
    let a0 = ComplexField::from_fn(&g, Parity::Even, |r| Complex64::new((-r * r).exp(), 0.0));
    let m = mean_mass(&a0);
    assert!((m[0] - 0.25).abs() < 1e-4, "{}", m[0]);
}

#[test]
fn constant_density_velocity_and_bound() {
    let g = RadialGrid::new(4.0, 400, 4).unwrap();
    let rho = RealField::from_fn(&g, Parity::Even, |_| 1.0);
    let v = autonomous_global_velocity(&rho, -1.0).unwrap();
    for (v, r) in v.values.iter().zip(g.nodes()) {
        assert!((v - r / 2.0).abs() < 1e-10 * r.max(1.0), "r = {r}");
    }
    let a0 = ComplexField::from_fn(&g, Parity::Even, |_| Complex64::new(1.0, 0.0));
    let t = attractive_bound(&a0, -1.0).unwrap();
    assert!((t - 8f64.sqrt()).abs() < 1e-8, "{t}");
}

#[test]
fn tracing_rejects_low_dimension() {
    let m = InitialMass::from_density(3, |r| (-r * r).exp());
    assert!(trace(&m, &[0.5, 1.0, 1.5, 2.0], 1.0, 1.0, 1e-2, 1).is_err());
}
