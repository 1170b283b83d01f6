//! Radial Riesz potential (|x|^{−γ} ∗ ρ)(r), mass profiles and the Poisson
//! gradient m₀(r)/r^{n−1}.
//!
//! For radial ρ the convolution reduces to
//! ∫₀^∞ K(r,s) ρ(s) s^{n−1} ds with
//! K(r,s) = |S^{n−2}| ∫₀^π ((r−s)² + 4rs sin²(θ/2))^{−γ/2} sin^{n−2}θ dθ.
//! The angular integral is done by composite Gauss–Legendre on panels that
//! shrink geometrically towards θ = 0, stopping once the panel is narrower than
//! the near-diagonal scale |r−s|/√(rs); the last panel [0, θ_L] is then smooth.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{Parity, RadialField, RadialGrid, RealField, Scalar};
use crate::quadrature::{gauss_legendre, mapped};

/// Geometric ratio between successive angular panels.
const PANEL_RATIO: f64 = 0.25;
/// Deepest panel level; π·4^{−24} ≈ 1e−14.
const MAX_LEVEL: usize = 24;

/// Surface area of the unit k-sphere S^k ⊂ ℝ^{k+1}.
pub fn sphere_area(k: usize) -> f64 {
    match k {
        0 => 2.0,
        1 => 2.0 * PI,
        _ => 2.0 * PI / (k as f64 - 1.0) * sphere_area(k - 2),
    }
}

/// x^{−γ/2}, with fast paths for integer γ.
#[inline]
fn inv_pow_half(x: f64, gamma: f64) -> f64 {
    if gamma.fract() == 0.0 && gamma <= 16.0 {
        let k = gamma as i32;
        if k % 2 == 0 {
            1.0 / x.powi(k / 2)
        } else {
            1.0 / (x.powi(k / 2) * x.sqrt())
        }
    } else {
        x.powf(-0.5 * gamma)
    }
}

/// Precomputed angular nodes: for each level L the panel [θ_{L+1}, θ_L]
/// and the tail [0, θ_{L+1}], as (sin²(θ/2), weight·sin^{n−2}θ) pairs.
struct AngularRule {
    panels: Vec<Vec<(f64, f64)>>,
    tails: Vec<Vec<(f64, f64)>>,
    edges: Vec<f64>,
}

impl AngularRule {
    fn new(n: usize, points: usize) -> Self {
        let (x, w) = gauss_legendre(points);
        let edges: Vec<f64> = (0..=MAX_LEVEL + 1).map(|l| PI * PANEL_RATIO.powi(l as i32)).collect();
        let node = |(t, wt): (f64, f64)| ((0.5 * t).sin().powi(2), wt * t.sin().powi(n as i32 - 2));
        let panels = (0..=MAX_LEVEL).map(|l| mapped(&x, &w, edges[l + 1], edges[l]).map(node).collect()).collect();
        let tails = (0..=MAX_LEVEL).map(|l| mapped(&x, &w, 0.0, edges[l + 1]).map(node).collect()).collect();
        AngularRule { panels, tails, edges }
    }

    fn integrate(&self, r: f64, s: f64, gamma: f64) -> f64 {
        let diff2 = (r - s) * (r - s);
        let four_rs = 4.0 * r * s;
        let theta_star = (r - s).abs() / (r * s).sqrt();
        let mut level = 0;
        while level < MAX_LEVEL && self.edges[level + 1] > 0.25 * theta_star {
            level += 1;
        }
        let f = |&(sh2, wt): &(f64, f64)| wt * inv_pow_half(diff2 + four_rs * sh2, gamma);
        let mut acc: f64 = self.tails[level].iter().map(f).sum();
        for panel in &self.panels[..=level] {
            acc += panel.iter().map(f).sum::<f64>();
        }
        acc
    }
}

#[derive(Debug)]
pub struct RieszKernel {
    pub grid: Arc<RadialGrid>,
    pub gamma: f64,
    pub n: usize,
    matrix: Vec<f64>,
}

impl RieszKernel {
    pub fn matrix(&self) -> &[f64] {
        &self.matrix
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.matrix[i * self.grid.m + j]
    }

    pub fn check_field<T: Scalar>(&self, f: &RadialField<T>) -> Result<()> {
        if self.grid.same_as(&f.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!("kernel built for m = {}, field has m = {}", self.grid.m, f.grid.m)))
        }
    }

    /// Potential on the grid; even parity.
    pub fn apply<T: Scalar>(&self, rho: &RadialField<T>) -> Result<RadialField<T>> {
        self.check_field(rho)?;
        Ok(RadialField { grid: rho.grid.clone(), values: self.apply_slice(&rho.values), parity: Parity::Even })
    }

    pub(crate) fn apply_slice<T: Scalar>(&self, rho: &[T]) -> Vec<T> {
        let m = self.grid.m;
        let rw: Vec<T> = rho.iter().zip(self.grid.weights()).map(|(&v, &w)| v * w).collect();
        self.matrix
            .chunks_exact(m)
            .map(|row| row.iter().zip(&rw).fold(T::default(), |acc, (&k, &v)| acc + v * k))
            .collect()
    }
}

pub fn build_kernel(grid: &Arc<RadialGrid>, n: usize, gamma: f64, quad_points: usize) -> Result<RieszKernel> {
    if !(gamma > 0.0 && gamma < n as f64 - 1.0) {
        return Err(Error::InvalidArgument(format!("kernel needs 0 < gamma < n-1, got gamma = {gamma}, n = {n}")));
    }
    if n < 2 {
        return Err(Error::InvalidArgument(format!("kernel needs n >= 2, got {n}")));
    }
    if quad_points < 32 {
        return Err(Error::InvalidArgument(format!("quad_points = {quad_points} < 32")));
    }
    if grid.n != n {
        return Err(Error::GridMismatch(format!("grid dimension {} vs kernel dimension {n}", grid.n)));
    }
    let m = grid.m;
    let rule = AngularRule::new(n, quad_points);
    let c = sphere_area(n - 2);
    let r = grid.nodes();
    // upper triangle row by row, then mirror
    let upper: Vec<Vec<f64>> = (0..m)
        .into_par_iter()
        .map(|i| (i..m).map(|j| c * rule.integrate(r[i], r[j], gamma)).collect())
        .collect();
    let mut matrix = vec![0.0; m * m];
    for (i, row) in upper.iter().enumerate() {
        for (off, &k) in row.iter().enumerate() {
            let j = i + off;
            matrix[i * m + j] = k;
            matrix[j * m + i] = k;
        }
    }
    Ok(RieszKernel { grid: grid.clone(), gamma, n, matrix })
}

#[derive(Clone, Debug)]
pub struct MassProfile {
    pub grid: Arc<RadialGrid>,
    pub m0: Vec<f64>,
    pub mean: Vec<f64>,
}

/// Cumulative trapezoid of ρ s^{n−1} from s = 0 (where the integrand
/// vanishes) and the mean mass M₀ = m₀/rⁿ.
pub fn mass_profile(rho: &RealField) -> MassProfile {
    let g = &rho.grid;
    let r = g.nodes();
    let n = g.n as i32;
    let integrand: Vec<f64> = rho.values.iter().zip(r).map(|(v, r)| v * r.powi(n - 1)).collect();
    let mut m0 = Vec::with_capacity(g.m);
    let mut acc = 0.5 * r[0] * integrand[0];
    m0.push(acc);
    for j in 1..g.m {
        acc += 0.5 * g.dr * (integrand[j - 1] + integrand[j]);
        m0.push(acc);
    }
    let mean = m0.iter().zip(r).map(|(m, r)| m / r.powi(n)).collect();
    MassProfile { grid: g.clone(), m0, mean }
}

/// ∂_r V_p = m₀(r)/r^{n−1}, odd parity.
pub fn poisson_gradient(mp: &MassProfile) -> RealField {
    let n = mp.grid.n as i32;
    let values = mp.m0.iter().zip(mp.grid.nodes()).map(|(m, r)| m / r.powi(n - 1)).collect();
    RadialField { grid: mp.grid.clone(), values, parity: Parity::Odd }
}

#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct Calibration {
    /// Median of ∂_r(K∗ρ) / (m₀/r^{n−1}) over the sampled window.
    pub constant: f64,
    /// Max relative deviation of the ratio field from `constant` in the window.
    pub spread: f64,
}

/// Measures the constant c with ∂_r(|x|^{2−n} ∗ ρ) = c·m₀/r^{n−1}, the
/// "change of λ" linking the Hartree coupling to the Euler–Poisson one.
/// Only meaningful for γ = n − 2.
pub fn calibrate_newtonian(kernel: &RieszKernel, rho: &RealField, r_lo: f64, r_hi: f64) -> Result<Calibration> {
    if (kernel.gamma - (kernel.n as f64 - 2.0)).abs() > 1e-12 {
        return Err(Error::InvalidArgument(format!("calibration needs gamma = n-2, got {}", kernel.gamma)));
    }
    let grad = kernel.apply(rho)?.derivative(1)?;
    let pg = poisson_gradient(&mass_profile(rho));
    let mut ratios: Vec<f64> = grad
        .values
        .iter()
        .zip(&pg.values)
        .zip(rho.grid.nodes())
        .filter(|&(_, &r)| r >= r_lo && r <= r_hi)
        .map(|((a, b), _)| a / b)
        .collect();
    if ratios.is_empty() {
        return Err(Error::InvalidArgument("empty calibration window".into()));
    }
    ratios.sort_by(f64::total_cmp);
    let constant = ratios[ratios.len() / 2];
    let spread = ratios.iter().map(|x| ((x - constant) / constant).abs()).fold(0.0, f64::max);
    Ok(Calibration { constant, spread })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_areas() {
        assert!((sphere_area(2) - 4.0 * PI).abs() < 1e-14);
        assert!((sphere_area(3) - 2.0 * PI * PI).abs() < 1e-13);
        assert!((sphere_area(4) - 8.0 * PI * PI / 3.0).abs() < 1e-13);
    }

    #[test]
    fn angular_rule_matches_shell_theorem() {
        // γ = n−2: K(r,s) = |S^{n−1}| max(r,s)^{2−n}
        for n in [4usize, 5] {
            let rule = AngularRule::new(n, 32);
            let c = sphere_area(n - 2);
            for &(r, s) in &[(1.0, 0.5), (0.5, 1.0), (1.0, 1.0), (1.0, 1.0005), (0.0123, 3.0), (2.0, 1.999)] {
                let k = c * rule.integrate(r, s, n as f64 - 2.0);
                let exact = sphere_area(n - 1) * f64::max(r, s).powi(2 - n as i32);
                assert!((k / exact - 1.0).abs() < 1e-11, "n={n} r={r} s={s}: {k} vs {exact}");
            }
        }
    }

    #[test]
    fn rejects_bad_gamma() {
        let g = RadialGrid::new(1.0, 8, 4).unwrap();
        assert!(build_kernel(&g, 4, 3.0, 32).is_err());
        assert!(build_kernel(&g, 4, 0.0, 32).is_err());
        assert!(build_kernel(&g, 4, 2.0, 16).is_err());
        assert!(build_kernel(&g, 5, 2.0, 32).is_err());
    }

    #[test]
    fn constant_density_mass() {
        let g = RadialGrid::new(2.0, 400, 4).unwrap();
        let one = RealField::from_fn(&g, Parity::Even, |_| 1.0);
        let mp = mass_profile(&one);
        for ((m, mm), r) in mp.m0.iter().zip(&mp.mean).zip(g.nodes()) {
            assert!((m - r.powi(4) / 4.0).abs() < 1e-4 * r.powi(2));
            assert!((mm * r.powi(4) - m).abs() <= 1e-15 * m.abs());
        }
        let pg = poisson_gradient(&mp);
        assert!((pg.values[300] - g.nodes()[300] / 4.0).abs() < 1e-5);
    }
}
