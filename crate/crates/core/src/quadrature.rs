//! Gauss–Legendre rules.

/// Nodes and weights of the `k`-point Gauss–Legendre rule on [-1, 1],
/// by Newton iteration on P_k from the Tricomi initial guesses.
pub fn gauss_legendre(k: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(k >= 1, "rule needs at least one node");
    let mut x = vec![0.0; k];
    let mut w = vec![0.0; k];
    let kf = k as f64;
    for i in 0..k.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (kf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for j in 2..=k {
                let jf = j as f64;
                let p2 = ((2.0 * jf - 1.0) * z * p1 - (jf - 1.0) * p0) / jf;
                p0 = p1;
                p1 = p2;
            }
            dp = kf * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[k - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[k - 1 - i] = w[i];
    }
    (x, w)
}

/// Rule mapped to [a, b].
pub fn mapped<'a>(x: &'a [f64], w: &'a [f64], a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + 'a {
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    x.iter().zip(w).map(move |(&xi, &wi)| (c + h * xi, h * wi))
}

/// ∫_a^b of the cubic through (x_k, f_k), k = 0..3.
pub fn cubic_segment(x: [f64; 4], f: [f64; 4], a: f64, b: f64) -> f64 {
    // 3-point Gauss is exact for the cubic
    let g = (0.6f64).sqrt();
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    [(-g, 5.0 / 9.0), (0.0, 8.0 / 9.0), (g, 5.0 / 9.0)]
        .iter()
        .map(|&(t, w)| w * h * lagrange4(&x, &f, c + h * t))
        .sum()
}

/// Value at `t` of the cubic through four points.
pub fn lagrange4(x: &[f64; 4], f: &[f64; 4], t: f64) -> f64 {
    (0..4)
        .map(|i| {
            let l: f64 = (0..4).filter(|&j| j != i).map(|j| (t - x[j]) / (x[i] - x[j])).product();
            l * f[i]
        })
        .sum()
}

/// Running integral of f over sorted, possibly nonuniform nodes, starting at
/// `start`; each interval uses the cubic through the nearest four nodes.
pub fn cumulative_cubic(x: &[f64], f: &[f64], start: f64) -> Vec<f64> {
    assert!(x.len() == f.len() && x.len() >= 4, "need at least four nodes");
    let mut out = Vec::with_capacity(x.len());
    let mut acc = start;
    out.push(acc);
    for i in 0..x.len() - 1 {
        let s = i.saturating_sub(1).min(x.len() - 4);
        let xs = [x[s], x[s + 1], x[s + 2], x[s + 3]];
        let fs = [f[s], f[s + 1], f[s + 2], f[s + 3]];
        acc += cubic_segment(xs, fs, x[i], x[i + 1]);
        out.push(acc);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_exactly() {
        for k in [1, 2, 5, 32, 64] {
            let (x, w) = gauss_legendre(k);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13);
            let deg = 2 * k - 1;
            let s: f64 = mapped(&x, &w, 0.0, 1.0).map(|(t, wt)| wt * t.powi(deg as i32)).sum();
            assert!((s - 1.0 / (deg as f64 + 1.0)).abs() < 1e-13, "k={k}");
        }
    }

    #[test]
    fn cumulative_cubic_is_exact_on_cubics() {
        let x: Vec<f64> = (0..30).map(|i| (i as f64 * 0.37).powf(1.3)).collect();
        let f: Vec<f64> = x.iter().map(|t| 1.0 - 2.0 * t + t * t * t).collect();
        let c = cumulative_cubic(&x, &f, 0.5);
        for (t, v) in x.iter().zip(&c) {
            let exact = 0.5 + (t - t * t + t.powi(4) / 4.0) - (x[0] - x[0] * x[0] + x[0].powi(4) / 4.0);
            assert!((v - exact).abs() < 1e-10 * (1.0 + exact.abs()));
        }
    }
}
