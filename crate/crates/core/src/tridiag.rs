//! Crank–Nicolson flows for ∂_t u = i·κ·L u with L the finite-volume radial
//! Laplacian. The system (I − iκdt/2 L) is factored once per step size.

use num_complex::Complex64;

use crate::grid::{laplacian_bands, RadialGrid};

pub struct CrankNicolson {
    lo: Vec<Complex64>,
    // explicit half
    e_lo: Vec<Complex64>,
    e_diag: Vec<Complex64>,
    e_hi: Vec<Complex64>,
    // Thomas factors
    c_prime: Vec<Complex64>,
    denom: Vec<Complex64>,
}

impl CrankNicolson {
    /// One step of length `dt` for ∂_t u = iκ L u. Returns `None` if the
    /// factorisation hits a zero pivot.
    pub fn new(grid: &RadialGrid, kappa: f64, dt: f64) -> Option<Self> {
        let (l, d, u) = laplacian_bands(grid);
        let z = Complex64::new(0.0, 0.5 * kappa * dt);
        let one = Complex64::new(1.0, 0.0);
        let lo: Vec<Complex64> = l.iter().map(|&x| -z * x).collect();
        let hi: Vec<Complex64> = u.iter().map(|&x| -z * x).collect();
        let diag: Vec<Complex64> = d.iter().map(|&x| one - z * x).collect();
        let e_lo = l.iter().map(|&x| z * x).collect();
        let e_hi = u.iter().map(|&x| z * x).collect();
        let e_diag = d.iter().map(|&x| one + z * x).collect();
        let m = d.len();
        let mut c_prime = vec![Complex64::default(); m];
        let mut denom = vec![Complex64::default(); m];
        let mut prev_c = Complex64::default();
        for j in 0..m {
            let den = if j == 0 { diag[0] } else { diag[j] - lo[j] * prev_c };
            if den.norm() < 1e-300 {
                return None;
            }
            denom[j] = den;
            c_prime[j] = hi[j] / den;
            prev_c = c_prime[j];
        }
        Some(CrankNicolson { lo, e_lo, e_diag, e_hi, c_prime, denom })
    }

    pub fn step(&self, u: &mut [Complex64]) {
        let m = u.len();
        let mut rhs = vec![Complex64::default(); m];
        for j in 0..m {
            let mut acc = self.e_diag[j] * u[j];
            if j > 0 {
                acc += self.e_lo[j] * u[j - 1];
            }
            if j + 1 < m {
                acc += self.e_hi[j] * u[j + 1];
            }
            rhs[j] = acc;
        }
        // forward sweep
        let mut y = vec![Complex64::default(); m];
        for j in 0..m {
            let prev = if j == 0 { Complex64::default() } else { self.lo[j] * y[j - 1] };
            y[j] = (rhs[j] - prev) / self.denom[j];
        }
        for j in (0..m - 1).rev() {
            y[j] = y[j] - self.c_prime[j] * y[j + 1];
        }
        u.copy_from_slice(&y);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{inner, ComplexField, Parity};

    #[test]
    fn unitary_and_reversible() {
        let g = RadialGrid::new(8.0, 200, 4).unwrap();
        let f = ComplexField::from_fn(&g, Parity::Even, |r| Complex64::new((-r * r).exp(), 0.3 * r * (-r * r).exp()));
        let norm0 = inner(&f, &f).re;
        let fwd = CrankNicolson::new(&g, 0.05, 0.01).unwrap();
        let back = CrankNicolson::new(&g, 0.05, -0.01).unwrap();
        let mut u = f.values.clone();
        for _ in 0..100 {
            fwd.step(&mut u);
        }
        let moved = ComplexField::new(g.clone(), u.clone(), Parity::Even).unwrap();
        assert!((inner(&moved, &moved).re / norm0 - 1.0).abs() < 1e-12);
        for _ in 0..100 {
            back.step(&mut u);
        }
        let err = u.iter().zip(&f.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-12, "{err}");
    }
}
