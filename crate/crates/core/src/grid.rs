//! Cell-centred radial mesh, sampled fields and the finite-difference stencils
//! shared by every solver.
//!
//! Nodes sit at r_j = (j + ½)Δr so that nothing is ever evaluated at r = 0.
//! Behaviour at the origin is restored through a parity ghost cell
//! f₋₁ = ±f₀. Quadrature weights are the exact shell volumes
//! (r_{j+½}ⁿ − r_{j−½}ⁿ)/n (the |S^{n−1}| factor is left out), which agree
//! with r_j^{n−1}Δr up to O(Δr²) but make the finite-volume Laplacian exact
//! on quadratics including the first cell.

use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Scalars a field may carry.
pub trait Scalar:
    Copy
    + Send
    + Sync
    + Default
    + std::fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Neg<Output = Self>
    + Mul<f64, Output = Self>
{
    fn abs2(self) -> f64;
    fn is_finite(self) -> bool;
}

impl Scalar for f64 {
    fn abs2(self) -> f64 {
        self * self
    }
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
}

impl Scalar for Complex64 {
    fn abs2(self) -> f64 {
        self.norm_sqr()
    }
    fn is_finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn flip(self) -> Self {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }

    fn sign(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }
}

#[derive(Debug, PartialEq)]
pub struct RadialGrid {
    pub r_max: f64,
    pub m: usize,
    pub n: usize,
    pub dr: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    /// r_{j+½}^{n−1} for j = 0..m−1 (face areas, |S^{n−1}| omitted).
    faces: Vec<f64>,
}

impl RadialGrid {
    pub fn new(r_max: f64, m: usize, n: usize) -> Result<Arc<Self>> {
        if m < 4 {
            return Err(Error::InvalidArgument(format!("need at least 4 cells, got {m}")));
        }
        if !(r_max > 0.0 && r_max.is_finite()) {
            return Err(Error::InvalidArgument(format!("r_max must be positive, got {r_max}")));
        }
        if n < 1 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        let dr = r_max / m as f64;
        let nf = n as i32;
        let nodes: Vec<f64> = (0..m).map(|j| (j as f64 + 0.5) * dr).collect();
        let weights = (0..m)
            .map(|j| {
                let (lo, hi) = (j as f64 * dr, (j + 1) as f64 * dr);
                (hi.powi(nf) - lo.powi(nf)) / n as f64
            })
            .collect();
        let faces = (0..m).map(|j| ((j + 1) as f64 * dr).powi(nf - 1)).collect();
        Ok(Arc::new(RadialGrid { r_max, m, n, dr, nodes, weights, faces }))
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub(crate) fn faces(&self) -> &[f64] {
        &self.faces
    }

    pub fn same_as(&self, other: &RadialGrid) -> bool {
        std::ptr::eq(self, other) || (self.m == other.m && self.n == other.n && self.r_max == other.r_max)
    }

    /// Index of the node nearest to `r` (clamped).
    pub fn index_of(&self, r: f64) -> usize {
        ((r / self.dr - 0.5).round().max(0.0) as usize).min(self.m - 1)
    }
}

#[derive(Clone, Debug)]
pub struct RadialField<T: Scalar> {
    pub grid: Arc<RadialGrid>,
    pub values: Vec<T>,
    pub parity: Parity,
}

pub type RealField = RadialField<f64>;
pub type ComplexField = RadialField<Complex64>;

impl<T: Scalar> RadialField<T> {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<T>, parity: Parity) -> Result<Self> {
        if values.len() != grid.m {
            return Err(Error::GridMismatch(format!("{} values for {} cells", values.len(), grid.m)));
        }
        Ok(RadialField { grid, values, parity })
    }

    pub fn zeros(grid: &Arc<RadialGrid>, parity: Parity) -> Self {
        RadialField { grid: grid.clone(), values: vec![T::default(); grid.m], parity }
    }

    pub fn from_fn(grid: &Arc<RadialGrid>, parity: Parity, f: impl Fn(f64) -> T) -> Self {
        let values = grid.nodes().iter().map(|&r| f(r)).collect();
        RadialField { grid: grid.clone(), values, parity }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn map<U: Scalar>(&self, parity: Parity, f: impl Fn(T) -> U) -> RadialField<U> {
        RadialField { grid: self.grid.clone(), values: self.values.iter().map(|&v| f(v)).collect(), parity }
    }

    pub fn check_grid<U: Scalar>(&self, other: &RadialField<U>) -> Result<()> {
        if self.grid.same_as(&other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!("m = {} vs m = {}", self.grid.m, other.grid.m)))
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        self.map(self.parity, |v| v * c)
    }

    /// `self + c·other`.
    pub fn axpy(&self, c: f64, other: &Self) -> Self {
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| a + b * c).collect();
        RadialField { grid: self.grid.clone(), values, parity: self.parity }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.axpy(-1.0, other)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.abs2()).fold(0.0, f64::max).sqrt()
    }

    /// sqrt(Σ |f_j|² w_j).
    pub fn l2(&self) -> f64 {
        self.values.iter().zip(self.grid.weights()).map(|(v, w)| v.abs2() * w).sum::<f64>().sqrt()
    }

    pub fn derivative(&self, order: usize) -> Result<Self> {
        match order {
            1 => Ok(RadialField { grid: self.grid.clone(), values: d1(&self.values, self.parity, self.grid.dr), parity: self.parity.flip() }),
            2 => Ok(RadialField { grid: self.grid.clone(), values: d2(&self.values, self.parity, self.grid.dr), parity: self.parity }),
            _ => Err(Error::InvalidArgument(format!("derivative order {order} not in {{1, 2}}"))),
        }
    }

    /// Discrete H^s-type norm: sqrt(Σ_{k≤s} ‖∂_r^k f‖²).
    pub fn weighted_norm(&self, s: usize) -> Result<f64> {
        if s > 2 {
            return Err(Error::InvalidArgument(format!("derivative order s = {s} not in {{0, 1, 2}}")));
        }
        let mut total = self.l2().powi(2);
        for k in 1..=s {
            total += self.derivative(k)?.l2().powi(2);
        }
        Ok(total.sqrt())
    }
}

impl RealField {
    pub fn to_complex(&self) -> ComplexField {
        self.map(self.parity, |v| Complex64::new(v, 0.0))
    }
}

impl ComplexField {
    pub fn re(&self) -> RealField {
        self.map(self.parity, |v| v.re)
    }

    pub fn abs2_field(&self) -> RealField {
        self.map(Parity::Even, |v| v.norm_sqr())
    }
}

/// Weighted inner product Σ f ḡ w.
pub fn inner(f: &ComplexField, g: &ComplexField) -> Complex64 {
    f.values.iter().zip(&g.values).zip(f.grid.weights()).map(|((a, b), w)| a * b.conj() * w).sum()
}

/// Centred first derivative; parity ghost at the origin, one-sided
/// second-order stencil in the last cell.
pub fn d1<T: Scalar>(f: &[T], parity: Parity, dr: f64) -> Vec<T> {
    let m = f.len();
    let c = 0.5 / dr;
    let mut out = vec![T::default(); m];
    let ghost = f[0] * parity.sign();
    out[0] = (f[1] - ghost) * c;
    for j in 1..m - 1 {
        out[j] = (f[j + 1] - f[j - 1]) * c;
    }
    out[m - 1] = (f[m - 1] * 3.0 - f[m - 2] * 4.0 + f[m - 3]) * c;
    out
}

/// Centred second derivative ∂_r² (not the Laplacian).
pub fn d2<T: Scalar>(f: &[T], parity: Parity, dr: f64) -> Vec<T> {
    let m = f.len();
    let c = 1.0 / (dr * dr);
    let mut out = vec![T::default(); m];
    let ghost = f[0] * parity.sign();
    out[0] = (f[1] - f[0] * 2.0 + ghost) * c;
    for j in 1..m - 1 {
        out[j] = (f[j + 1] - f[j] * 2.0 + f[j - 1]) * c;
    }
    out[m - 1] = (f[m - 1] * 2.0 - f[m - 2] * 5.0 + f[m - 3] * 4.0 - f[m - 4]) * c;
    out
}

/// Finite-volume radial Laplacian of an even field with a homogeneous
/// Dirichlet ghost beyond r_max. Symmetric in the weighted inner product,
/// so the Crank–Nicolson flows built from it are exactly unitary.
pub fn laplacian<T: Scalar>(grid: &RadialGrid, f: &[T]) -> Vec<T> {
    let (lo, diag, hi) = laplacian_bands(grid);
    let m = f.len();
    let mut out = vec![T::default(); m];
    for j in 0..m {
        let mut acc = f[j] * diag[j];
        if j > 0 {
            acc = acc + f[j - 1] * lo[j];
        }
        if j + 1 < m {
            acc = acc + f[j + 1] * hi[j];
        }
        out[j] = acc;
    }
    out
}

/// Tridiagonal bands (sub, main, super) of the finite-volume Laplacian.
pub fn laplacian_bands(grid: &RadialGrid) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let m = grid.m;
    let (w, a, dr) = (grid.weights(), grid.faces(), grid.dr);
    let mut lo = vec![0.0; m];
    let mut diag = vec![0.0; m];
    let mut hi = vec![0.0; m];
    for j in 0..m {
        let inner_face = if j == 0 { 0.0 } else { a[j - 1] };
        let scale = 1.0 / (w[j] * dr);
        lo[j] = inner_face * scale;
        hi[j] = if j + 1 < m { a[j] * scale } else { 0.0 };
        diag[j] = -(inner_face + a[j]) * scale;
    }
    (lo, diag, hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_ball_volume() {
        let g = RadialGrid::new(1.0, 50, 4).unwrap();
        let one = RealField::from_fn(&g, Parity::Even, |_| 1.0);
        assert!((one.weighted_norm(0).unwrap() - 0.5).abs() < 1e-14);
        assert_eq!(RealField::zeros(&g, Parity::Even).weighted_norm(2).unwrap(), 0.0);
    }

    #[test]
    fn odd_linear_field_h1_norm() {
        let g = RadialGrid::new(1.0, 200, 4).unwrap();
        let f = RealField::from_fn(&g, Parity::Odd, |r| r);
        // ∫₀¹ (r² + 1) r³ dr = 1/6 + 1/4
        let exact = (1.0f64 / 6.0 + 0.25).sqrt();
        assert!((f.weighted_norm(1).unwrap() - exact).abs() < 1e-4);
    }

    #[test]
    fn quadratic_is_differentiated_exactly() {
        let g = RadialGrid::new(2.0, 40, 3).unwrap();
        let f = RealField::from_fn(&g, Parity::Even, |r| r * r);
        let df = f.derivative(1).unwrap();
        for (r, d) in g.nodes().iter().zip(&df.values) {
            assert!((d - 2.0 * r).abs() < 1e-12);
        }
        let c = RealField::from_fn(&g, Parity::Even, |_| 3.5);
        assert!(c.derivative(2).unwrap().values.iter().all(|v| v.abs() < 1e-10));
        assert!(c.derivative(3).is_err());
        assert!(c.weighted_norm(3).is_err());
    }

    #[test]
    fn laplacian_exact_on_r_squared() {
        for n in 2..6 {
            let g = RadialGrid::new(1.0, 30, n).unwrap();
            let f: Vec<f64> = g.nodes().iter().map(|r| r * r).collect();
            let lf = laplacian(&g, &f);
            // the Dirichlet ghost only touches the last cell
            for v in &lf[..g.m - 1] {
                assert!((v - 2.0 * n as f64).abs() < 1e-9, "n={n}: {v}");
            }
        }
    }

    #[test]
    fn laplacian_is_weighted_symmetric() {
        let g = RadialGrid::new(3.0, 25, 4).unwrap();
        let (lo, _, hi) = laplacian_bands(&g);
        let w = g.weights();
        for j in 0..g.m - 1 {
            assert!((w[j] * hi[j] - w[j + 1] * lo[j + 1]).abs() < 1e-12 * w[j + 1]);
        }
    }
}
