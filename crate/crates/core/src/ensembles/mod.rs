//! Ensemble statistics of concurrence and ESD times.
//!
//! [`analytic`] holds the densities over Haar pure states, [`empirical`] the
//! Monte Carlo side (histograms, KS distances, ensemble statistics) and
//! [`identities`] the relations tying the two together.

pub mod analytic;
pub mod empirical;
pub mod identities;

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use analytic::{
    cdf_qs, entangled_probability, esd_domain, joint_ad, joint_pd_sr, p_c, p_c0, p_qs, separable_probability,
    EsdDensity,
};
pub use empirical::{empirical_density, ensemble_stats, esd_outcomes, ks_distance, outcome_density, Evolve};
pub use identities::{density_from_survival, esd_density_from_concurrence, mixed_scaling_fit};

/// Default number of grid points for tabulated curves.
pub const DEFAULT_GRID_POINTS: usize = 512;
/// Allowed slack in `∫values + Σweights = 1`.
pub const NORMALIZATION_TOL: f64 = 2e-3;

/// Provenance attached to a curve when it is written out.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CurveMeta {
    pub kind: Option<String>,
    pub q: Option<f64>,
    pub n: Option<usize>,
    pub seed: Option<u64>,
}

/// Tabulated probability density with optional point masses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityCurve {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    #[serde(rename = "masses")]
    pub point_masses: Vec<(f64, f64)>,
    pub domain: (f64, f64),
    #[serde(default)]
    pub meta: CurveMeta,
}

impl DensityCurve {
    /// Checks shape, ordering, finiteness and sign; normalization is checked
    /// separately by [`DensityCurve::check_normalized`].
    pub fn new(grid: Vec<f64>, values: Vec<f64>, point_masses: Vec<(f64, f64)>, domain: (f64, f64)) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::InvalidInput(format!("{} grid points but {} values", grid.len(), values.len())));
        }
        if !(domain.0.is_finite() && domain.1.is_finite() && domain.0 <= domain.1) {
            return Err(Error::InvalidInput(format!("bad domain {domain:?}")));
        }
        if grid.windows(2).any(|w| !(w[0] < w[1])) || grid.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("grid must be finite and strictly ascending".into()));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidInput("density values must be finite and non-negative".into()));
        }
        if point_masses.iter().any(|(x, w)| !x.is_finite() || !(0.0..=1.0).contains(w)) {
            return Err(Error::InvalidInput("point-mass weights must lie in [0, 1]".into()));
        }
        Ok(DensityCurve { grid, values, point_masses, domain, meta: CurveMeta::default() })
    }

    pub fn with_meta(mut self, meta: CurveMeta) -> Self {
        self.meta = meta;
        self
    }

    /// Trapezoid integral of the continuous part.
    pub fn integral(&self) -> f64 {
        self.grid.windows(2).zip(self.values.windows(2)).map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1])).sum()
    }

    pub fn mass_total(&self) -> f64 {
        self.point_masses.iter().map(|(_, w)| w).sum()
    }

    pub fn total(&self) -> f64 {
        self.integral() + self.mass_total()
    }

    pub fn check_normalized(&self, tol: f64) -> Result<()> {
        let total = self.total();
        if (total - 1.0).abs() > tol {
            return Err(Error::InvalidState(format!("curve integrates to {total}, expected 1 ± {tol}")));
        }
        Ok(())
    }

    /// Linear interpolation of the continuous part, zero outside the grid.
    pub fn interpolate(&self, x: f64) -> f64 {
        let g = &self.grid;
        if g.is_empty() || x < g[0] || x > g[g.len() - 1] {
            return 0.0;
        }
        let i = g.partition_point(|&v| v <= x);
        if i == 0 {
            return self.values[0];
        }
        if i == g.len() {
            return self.values[g.len() - 1];
        }
        let (x0, x1) = (g[i - 1], g[i]);
        let t = (x - x0) / (x1 - x0);
        self.values[i - 1] * (1.0 - t) + self.values[i] * t
    }

    /// Grid location of the largest density value.
    pub fn argmax(&self) -> Option<f64> {
        self.values
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| self.grid[i])
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        write_meta(&mut out, &self.meta);
        let _ = writeln!(out, "# domain,{},{}", self.domain.0, self.domain.1);
        out.push_str("x,density\n");
        for (x, v) in self.grid.iter().zip(&self.values) {
            let _ = writeln!(out, "{x},{v}");
        }
        for (x, w) in &self.point_masses {
            let _ = writeln!(out, "# mass,{x},{w}");
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut grid = Vec::new();
        let mut values = Vec::new();
        let mut masses = Vec::new();
        let mut meta = CurveMeta::default();
        let mut domain = None;
        let mut header_seen = false;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let bad = || Error::InvalidInput(format!("line {}: cannot parse {line:?}", lineno + 1));
            if let Some(rest) = line.strip_prefix('#') {
                let fields: Vec<&str> = rest.trim().split(',').collect();
                match fields.as_slice() {
                    ["mass", x, w] => masses.push((x.parse().map_err(|_| bad())?, w.parse().map_err(|_| bad())?)),
                    ["domain", lo, hi] => domain = Some((lo.parse().map_err(|_| bad())?, hi.parse().map_err(|_| bad())?)),
                    ["kind", v] => meta.kind = Some(v.to_string()),
                    ["q", v] => meta.q = Some(v.parse().map_err(|_| bad())?),
                    ["n", v] => meta.n = Some(v.parse().map_err(|_| bad())?),
                    ["seed", v] => meta.seed = Some(v.parse().map_err(|_| bad())?),
                    _ => {}
                }
                continue;
            }
            if !header_seen {
                header_seen = true;
                if line.starts_with("x,") {
                    continue;
                }
            }
            let mut parts = line.split(',');
            let x: f64 = parts.next().ok_or_else(bad)?.trim().parse().map_err(|_| bad())?;
            let v: f64 = parts.next().ok_or_else(bad)?.trim().parse().map_err(|_| bad())?;
            grid.push(x);
            values.push(v);
        }
        let domain = domain.unwrap_or_else(|| match (grid.first(), grid.last()) {
            (Some(&a), Some(&b)) => (a, b),
            _ => (0.0, 1.0),
        });
        Ok(DensityCurve::new(grid, values, masses, domain)?.with_meta(meta))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: DensityCurve = serde_json::from_str(text)?;
        DensityCurve::new(c.grid, c.values, c.point_masses, c.domain).map(|v| v.with_meta(c.meta))
    }
}

pub(crate) fn write_meta(out: &mut String, meta: &CurveMeta) {
    let _ = writeln!(out, "# version,{}", env!("CARGO_PKG_VERSION"));
    if let Some(k) = &meta.kind {
        let _ = writeln!(out, "# kind,{k}");
    }
    if let Some(q) = meta.q {
        let _ = writeln!(out, "# q,{q}");
    }
    if let Some(n) = meta.n {
        let _ = writeln!(out, "# n,{n}");
    }
    if let Some(s) = meta.seed {
        let _ = writeln!(out, "# seed,{s}");
    }
}

/// Mean, spread and separable fraction of evolved concurrences.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStats {
    pub mean: f64,
    pub std: f64,
    pub separable_fraction: f64,
    pub max_seen: f64,
    pub n: usize,
}

/// `n` points spread evenly over `[lo, hi]`, endpoints included.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// Cell midpoints of `n` equal cells on `[lo, hi]`.
pub fn midpoints(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * (i as f64 + 0.5) / n as f64).collect()
}
