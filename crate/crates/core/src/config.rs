//! Run configuration: one TOML table per pipeline, unknown keys rejected,
//! parameters validated before any computation.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{ComplexField, Parity, RadialGrid};
use crate::hydro::{HierarchyVariant, HydroOptions};
use crate::params::{ModelParams, Real};
use crate::potential::{build_kernel, RieszKernel};

/// A real given as a TOML number or as text such as "1/3" or "sqrt(3)/4".
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RealSpec {
    Number(f64),
    Text(String),
}

impl RealSpec {
    pub fn resolve(&self) -> Result<Real> {
        match self {
            RealSpec::Number(x) if x.fract() == 0.0 && x.abs() < 1e9 => Ok(Real::ratio(*x as i64, 1)),
            RealSpec::Number(x) => Ok(Real::float(*x)),
            RealSpec::Text(s) => s.parse(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    pub n: usize,
    pub gamma: RealSpec,
    pub alpha: RealSpec,
    pub lambda: f64,
    /// Semiclassical parameter; `h` is derived from it.
    pub eps: Option<f64>,
    /// Alternative to `eps`.
    pub h: Option<f64>,
}

impl Default for ModelSection {
    fn default() -> Self {
        ModelSection { n: 4, gamma: RealSpec::Number(2.0), alpha: RealSpec::Text("1/3".into()), lambda: 1.0, eps: None, h: None }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub r_max: f64,
    pub m: usize,
    /// Angular Gauss points of the Riesz kernel.
    pub quad_points: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection { r_max: 6.0, m: 600, quad_points: 32 }
    }
}

/// Initial amplitude a₀.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialData {
    /// r^{−5/2} e^{−1/(2r)}.
    FlatCore,
    /// A e^{−r²/σ²}.
    Gaussian {
        #[serde(default = "one")]
        sigma: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// a₀ ≡ √c, i.e. |a₀|² ≡ c.
    Constant { c: f64 },
    Zero,
    /// Text file with columns `r re [im]` (header lines starting with a
    /// letter or '#' are skipped), linearly interpolated onto the grid and
    /// zero beyond its last radius.
    File { path: PathBuf },
}

fn one() -> f64 {
    1.0
}

impl Default for InitialData {
    fn default() -> Self {
        InitialData::Gaussian { sigma: 1.0, amplitude: 1.0 }
    }
}

impl InitialData {
    pub fn sample(&self, grid: &Arc<RadialGrid>, base: &Path) -> Result<ComplexField> {
        let real = |f: &dyn Fn(f64) -> f64| ComplexField::from_fn(grid, Parity::Even, |r| Complex64::new(f(r), 0.0));
        Ok(match self {
            InitialData::FlatCore => real(&|r| r.powf(-2.5) * (-0.5 / r).exp()),
            InitialData::Gaussian { sigma, amplitude } => {
                if !(*sigma > 0.0) {
                    return Err(Error::Config(format!("gaussian sigma must be positive, got {sigma}")));
                }
                real(&|r| amplitude * (-(r / sigma).powi(2)).exp())
            }
            InitialData::Constant { c } => {
                if *c < 0.0 {
                    return Err(Error::Config(format!("constant density must be non-negative, got {c}")));
                }
                real(&|_| c.sqrt())
            }
            InitialData::Zero => real(&|_| 0.0),
            InitialData::File { path } => {
                let p = if path.is_absolute() { path.clone() } else { base.join(path) };
                let text = std::fs::read_to_string(&p).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?;
                let rows = parse_profile(&text).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?;
                let values = grid.nodes().iter().map(|&r| interp_rows(&rows, r)).collect();
                ComplexField::new(grid.clone(), values, Parity::Even)?
            }
        })
    }

    /// ρ₀ = |a₀|² in closed form, when available.
    pub fn closed_form_density(&self) -> Option<Arc<dyn Fn(f64) -> f64 + Send + Sync>> {
        match *self {
            InitialData::FlatCore => Some(Arc::new(|r: f64| r.powi(-5) * (-1.0 / r).exp())),
            InitialData::Gaussian { sigma, amplitude } => Some(Arc::new(move |r: f64| amplitude * amplitude * (-2.0 * (r / sigma).powi(2)).exp())),
            InitialData::Constant { c } => Some(Arc::new(move |_| c)),
            InitialData::Zero | InitialData::File { .. } => None,
        }
    }
}

fn parse_profile(text: &str) -> std::result::Result<Vec<(f64, Complex64)>, String> {
    let mut rows = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with(|c: char| c.is_ascii_alphabetic()) {
            continue;
        }
        let cols: Vec<f64> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<f64>().map_err(|e| format!("line {}: {e}", k + 1)))
            .collect::<std::result::Result<_, _>>()?;
        match cols.as_slice() {
            [r, re] => rows.push((*r, Complex64::new(*re, 0.0))),
            [r, re, im] => rows.push((*r, Complex64::new(*re, *im))),
            _ => return Err(format!("line {}: expected 2 or 3 columns", k + 1)),
        }
    }
    if rows.len() < 2 || rows.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err("need at least two rows with increasing r".into());
    }
    Ok(rows)
}

fn interp_rows(rows: &[(f64, Complex64)], r: f64) -> Complex64 {
    if r <= rows[0].0 {
        return rows[0].1;
    }
    if r > rows[rows.len() - 1].0 {
        return Complex64::default();
    }
    let k = rows.partition_point(|(x, _)| *x < r).max(1);
    let ((x0, y0), (x1, y1)) = (rows[k - 1], rows[k]);
    y0 + (y1 - y0) * ((r - x0) / (x1 - x0))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemKind {
    /// h = 0 limit system from τ = 0.
    Limit,
    /// Grenier system (needs eps or h) from τ₀.
    Full,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HydroSection {
    pub system: SystemKind,
    pub t_end: f64,
    pub dt: f64,
    pub stride: usize,
    pub cfl_max: f64,
    pub upwind: bool,
}

impl Default for HydroSection {
    fn default() -> Self {
        HydroSection { system: SystemKind::Limit, t_end: 1.0, dt: 1e-3, stride: 50, cfl_max: 0.5, upwind: false }
    }
}

impl HydroSection {
    pub fn options(&self, stride: usize) -> HydroOptions {
        HydroOptions { stride, cfl_max: self.cfl_max, upwind: self.upwind }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NlsSection {
    /// Elapsed rescaled time after τ₀.
    pub duration: f64,
    pub dt: f64,
    pub stride: usize,
    pub mass_tol: f64,
    /// dt ≤ safety·h.
    pub safety: f64,
    /// Also run the Grenier system and report the distance to a^h e^{iφ^h/h}.
    pub compare_grenier: bool,
    /// Grenier time step.
    pub grenier_dt: f64,
}

impl Default for NlsSection {
    fn default() -> Self {
        NlsSection { duration: 0.3, dt: 1e-3, stride: 50, mass_tol: 1e-8, safety: 1.0, compare_grenier: true, grenier_dt: 1e-3 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExpandSection {
    pub j_max: usize,
    /// Truncation orders J whose residual slopes are fitted.
    pub fit_orders: Vec<usize>,
    pub tau_samples: Vec<f64>,
    /// Step of the reference limit-system run.
    pub dt: f64,
}

impl Default for ExpandSection {
    fn default() -> Self {
        let tau_samples = (0..8).map(|k| 10f64.powf(-3.0 + 2.0 * k as f64 / 7.0)).collect();
        ExpandSection { j_max: 3, fit_orders: vec![0, 1], tau_samples, dt: 1e-4 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LayersSection {
    pub j_max: usize,
}

impl Default for LayersSection {
    fn default() -> Self {
        LayersSection { j_max: 6 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Oracle {
    /// a^h e^{iφ^h/h} from the Grenier system.
    Grenier,
    /// Direct split-step integration of ψ^h.
    Nls,
}

/// Shared by `compare` and `sweep`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CascadeSection {
    pub eps: Vec<f64>,
    /// Rescaled times at which errors are evaluated.
    pub tau: Vec<f64>,
    /// Derivative order of the error norm (0, 1 or 2).
    pub s: usize,
    pub dt: f64,
    pub j_max: usize,
    pub variant: HierarchyVariant,
    /// Well-prepared data: no hierarchy, Grenier runs start from the limit
    /// solution at τ₀.
    pub prepared: bool,
    pub oracle: Oracle,
    /// NLS step (oracle = "nls").
    pub nls_dt: f64,
    /// Error level regarded as breakdown in `sweep`.
    pub ceiling: f64,
}

impl Default for CascadeSection {
    fn default() -> Self {
        CascadeSection {
            eps: vec![1e-2, 1e-3, 1e-4],
            tau: vec![0.5],
            s: 0,
            dt: 2e-3,
            j_max: 3,
            variant: HierarchyVariant::AsWritten,
            prepared: false,
            oracle: Oracle::Grenier,
            nls_dt: 1e-3,
            ceiling: 0.5,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BlowupSection {
    pub tau_end: f64,
    pub dt: f64,
    pub stride: usize,
    /// Log-spaced launch radii; the dynamics grid is used when `count` is
    /// absent.
    pub r_lo: f64,
    pub r_hi: f64,
    pub count: Option<usize>,
}

impl Default for BlowupSection {
    fn default() -> Self {
        BlowupSection { tau_end: 2.0, dt: 1e-3, stride: 10, r_lo: 0.05, r_hi: 5.0, count: None }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    /// Worker threads (overridden by --jobs).
    pub jobs: Option<usize>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub model: ModelSection,
    pub grid: GridSection,
    pub data: InitialData,
    pub hydro: HydroSection,
    pub nls: NlsSection,
    pub expand: ExpandSection,
    pub layers: LayersSection,
    pub cascade: CascadeSection,
    pub blowup: BlowupSection,
    pub run: RunSection,
    /// Directory relative data paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    /// Range checks shared by all commands.
    pub fn validate(&self) -> Result<()> {
        self.params()?;
        let g = &self.grid;
        if g.m < 4 || !(g.r_max > 0.0) {
            return Err(Error::Config(format!("grid needs m >= 4 and r_max > 0, got m = {}, r_max = {}", g.m, g.r_max)));
        }
        let pos = |name: &str, x: f64| if x > 0.0 && x.is_finite() { Ok(()) } else { Err(Error::Config(format!("{name} must be positive, got {x}"))) };
        pos("hydro.dt", self.hydro.dt)?;
        pos("hydro.t_end", self.hydro.t_end)?;
        pos("nls.dt", self.nls.dt)?;
        pos("nls.duration", self.nls.duration)?;
        pos("nls.grenier_dt", self.nls.grenier_dt)?;
        pos("expand.dt", self.expand.dt)?;
        pos("cascade.dt", self.cascade.dt)?;
        pos("cascade.nls_dt", self.cascade.nls_dt)?;
        pos("blowup.dt", self.blowup.dt)?;
        pos("blowup.tau_end", self.blowup.tau_end)?;
        if self.cascade.eps.iter().any(|e| !(*e > 0.0 && *e < 1.0)) {
            return Err(Error::Config("cascade.eps values must lie in (0, 1)".into()));
        }
        if self.cascade.tau.is_empty() || self.cascade.tau.iter().any(|t| !(*t > 0.0)) {
            return Err(Error::Config("cascade.tau needs positive sample times".into()));
        }
        if self.cascade.s > 2 {
            return Err(Error::Config(format!("cascade.s = {} not in 0..=2", self.cascade.s)));
        }
        if self.expand.j_max == 0 || self.expand.fit_orders.iter().any(|&j| j > self.expand.j_max) {
            return Err(Error::Config("expand.fit_orders must not exceed expand.j_max (>= 1)".into()));
        }
        if self.blowup.count.is_some_and(|c| c < 4) || !(self.blowup.r_lo > 0.0 && self.blowup.r_hi > self.blowup.r_lo) {
            return Err(Error::Config("blowup radii need count >= 4 and 0 < r_lo < r_hi".into()));
        }
        if self.run.jobs == Some(0) {
            return Err(Error::Config("run.jobs must be positive".into()));
        }
        Ok(())
    }

    /// Model parameters with eps/h attached when configured.
    pub fn params(&self) -> Result<ModelParams> {
        let m = &self.model;
        let p = ModelParams::new(m.n, m.gamma.resolve()?, m.alpha.resolve()?, m.lambda).map_err(|e| Error::Config(e.to_string()))?;
        let p = match (m.eps, m.h) {
            (Some(_), Some(_)) => return Err(Error::Config("give either model.eps or model.h, not both".into())),
            (Some(e), None) => p.with_eps(e),
            (None, Some(h)) => p.with_h(h),
            (None, None) => Ok(p),
        };
        p.map_err(|e| Error::Config(e.to_string()))
    }

    pub fn grid(&self) -> Result<Arc<RadialGrid>> {
        RadialGrid::new(self.grid.r_max, self.grid.m, self.model.n)
    }

    pub fn kernel(&self, grid: &Arc<RadialGrid>) -> Result<RieszKernel> {
        build_kernel(grid, self.model.n, self.params()?.gamma(), self.grid.quad_points).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn initial(&self, grid: &Arc<RadialGrid>) -> Result<ComplexField> {
        self.data.sample(grid, &self.base_dir)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections_and_rejects_unknown_keys() {
        let cfg = RunConfig::from_toml("[model]\nalpha = \"sqrt(3)/4\"\ngamma = \"sqrt(3)\"\n[data]\nkind = \"constant\"\nc = 2.0\n").unwrap();
        assert!((cfg.params().unwrap().alpha() - 3f64.sqrt() / 4.0).abs() < 1e-15);
        assert!(cfg.params().unwrap().gamma.exact().is_none());
        assert!(RunConfig::default().params().unwrap().gamma.exact().is_some());
        assert_eq!(cfg.data, InitialData::Constant { c: 2.0 });
        assert!(RunConfig::from_toml("[model]\nbeta = 1\n").is_err());
        assert!(RunConfig::from_toml("[data]\nkind = \"gaussian\"\nwidth = 1\n").is_err());
        assert!(RunConfig::from_toml("[model]\nalpha = 3\n").is_err());
    }

    #[test]
    fn profile_file_rows() {
        let rows = parse_profile("r re im\n0 1 0\n1 0 1\n").unwrap();
        let z = interp_rows(&rows, 0.25);
        assert!((z - Complex64::new(0.75, 0.25)).norm() < 1e-15);
        assert_eq!(interp_rows(&rows, 2.0), Complex64::default());
    }
}
