//! Transform surfaces over (sigma_V, delta) and the pseudo-quantization check.
//!
//! The sigma_V axis is the optimality probability of a single sigmoid that
//! spans the whole value range (`L = 1` with the same `lambda`), so rows for
//! different level counts share the same value positions:
//! `v = (lo + hi) / 2 + logit(sigma_V) / lambda_1`. The axis samples
//! `(i + 0.5) / N`, and delta runs over `[-(hi - lo) / 2, (hi - lo) / 2]`.

use std::fmt::Write as _;

use pqac_core::transforms::{decompose, decompose_mixture, transform};
use pqac_core::{OptimalityConfig, TransformKind};

use crate::error::{HarnessError, Result};

pub const CONTOUR_VERSION: &str = "pqac-contour v1";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourSpec {
    pub kind: TransformKind,
    pub lambda: f64,
    pub levels: usize,
    pub lo: f64,
    pub hi: f64,
    pub grid: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourRow {
    pub sigma_v: f64,
    pub delta: f64,
    pub transform: f64,
    /// Level mean of the weight factor; absent for the linear rule.
    pub weight: Option<f64>,
    pub error: Option<f64>,
}

impl ContourSpec {
    fn optimality(&self) -> Result<OptimalityConfig> {
        if self.grid == 0 {
            return Err(HarnessError::Usage("--grid must be at least 1".into()));
        }
        Ok(OptimalityConfig::new(self.lambda, self.levels, self.lo, self.hi)?)
    }

    /// Value whose whole-range optimality probability is `sigma_v`.
    pub fn value_at(&self, sigma_v: f64) -> f64 {
        let lambda_1 = 2.0 * self.lambda / (self.hi - self.lo);
        0.5 * (self.lo + self.hi) + (sigma_v / (1.0 - sigma_v)).ln() / lambda_1
    }

    pub fn sigma_axis(&self) -> Vec<f64> {
        (0..self.grid).map(|i| (i as f64 + 0.5) / self.grid as f64).collect()
    }

    pub fn delta_axis(&self) -> Vec<f64> {
        let half = 0.5 * (self.hi - self.lo);
        if self.grid == 1 {
            return vec![0.0];
        }
        (0..self.grid)
            .map(|j| -half + (self.hi - self.lo) * j as f64 / (self.grid - 1) as f64)
            .collect()
    }
}

/// Row-major grid: sigma_V outer, delta inner.
pub fn contour(spec: &ContourSpec) -> Result<Vec<ContourRow>> {
    let cfg = spec.optimality()?;
    let lambda_o = cfg.sharpness_scale();
    let centers = cfg.level_centers();
    let deltas = spec.delta_axis();
    let mut rows = Vec::with_capacity(spec.grid * spec.grid);
    for sigma_v in spec.sigma_axis() {
        let v = spec.value_at(sigma_v);
        for &delta in &deltas {
            let parts: Option<Vec<_>> = match spec.kind {
                TransformKind::Linear => None,
                TransformKind::Jeffreys => Some(centers.iter().map(|&mu| decompose_mixture(delta, v, mu, lambda_o)).collect()),
                kind => Some(
                    centers
                        .iter()
                        .map(|&mu| decompose(kind, delta, v, mu, lambda_o))
                        .collect::<Result<_, _>>()?,
                ),
            };
            let n = centers.len() as f64;
            rows.push(ContourRow {
                sigma_v,
                delta,
                transform: transform(spec.kind, delta, v, &cfg),
                weight: parts.as_ref().map(|p| p.iter().map(|d| d.weight).sum::<f64>() / n),
                error: parts.as_ref().map(|p| p.iter().map(|d| d.error).sum::<f64>() / n),
            });
        }
    }
    Ok(rows)
}

pub fn render_contour(spec: &ContourSpec, rows: &[ContourRow]) -> String {
    let mut out = format!(
        "# {CONTOUR_VERSION} kind={} lambda={:?} levels={} lo={:?} hi={:?} grid={}\nsigma_v,delta,transform,weight,error\n",
        spec.kind, spec.lambda, spec.levels, spec.lo, spec.hi, spec.grid
    );
    let opt = |x: Option<f64>| x.map(|v| format!("{v:?}")).unwrap_or_default();
    for r in rows {
        writeln!(
            out,
            "{:?},{:?},{:?},{},{}",
            r.sigma_v,
            r.delta,
            r.transform,
            opt(r.weight),
            opt(r.error)
        )
        .expect("writing to a String");
    }
    out
}

/// Parse the body emitted by [`render_contour`].
pub fn parse_contour(text: &str) -> Result<Vec<ContourRow>> {
    let bad = |m: String| HarnessError::format("<contour>", m);
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    if lines.next() != Some("sigma_v,delta,transform,weight,error") {
        return Err(bad("missing column header".into()));
    }
    lines
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 5 {
                return Err(bad(format!("expected 5 fields: {line}")));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|_| bad(format!("not a number: {s}")));
            let opt = |s: &str| if s.is_empty() { Ok(None) } else { num(s).map(Some) };
            Ok(ContourRow {
                sigma_v: num(f[0])?,
                delta: num(f[1])?,
                transform: num(f[2])?,
                weight: opt(f[3])?,
                error: opt(f[4])?,
            })
        })
        .collect()
}

/// Slopes of the summed transform along delta, taken where `v + delta` sits
/// on a level center or halfway between two adjacent centers.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveReport {
    pub centers: Vec<f64>,
    pub center_slopes: Vec<f64>,
    pub boundaries: Vec<f64>,
    pub boundary_slopes: Vec<f64>,
}

impl WaveReport {
    /// `slope(p)` is evaluated at every center and boundary position `p`.
    pub fn measure(cfg: &OptimalityConfig, mut slope: impl FnMut(f64) -> Result<f64>) -> Result<Self> {
        let centers = cfg.level_centers();
        let boundaries: Vec<f64> = centers.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        Ok(Self {
            center_slopes: centers.iter().map(|&p| slope(p)).collect::<Result<_>>()?,
            boundary_slopes: boundaries.iter().map(|&p| slope(p)).collect::<Result<_>>()?,
            centers,
            boundaries,
        })
    }

    /// Central differences of the analytic transform at value `v`.
    pub fn from_transform(kind: TransformKind, cfg: &OptimalityConfig, v: f64, h: f64) -> Result<Self> {
        Self::measure(cfg, |p| {
            let d = p - v;
            Ok((transform(kind, d + h, v, cfg) - transform(kind, d - h, v, cfg)) / (2.0 * h))
        })
    }

    /// Central differences read off a contour dump, along the row whose
    /// sigma_V is closest to 1/2.
    pub fn from_contour(spec: &ContourSpec, rows: &[ContourRow]) -> Result<Self> {
        let cfg = spec.optimality()?;
        let sigma = rows
            .iter()
            .map(|r| r.sigma_v)
            .min_by(|a, b| (a - 0.5).abs().total_cmp(&(b - 0.5).abs()))
            .ok_or_else(|| HarnessError::format("<contour>", "empty grid"))?;
        let line: Vec<&ContourRow> = rows.iter().filter(|r| r.sigma_v == sigma).collect();
        let v = spec.value_at(sigma);
        Self::measure(&cfg, |p| {
            let target = p - v;
            let j = line
                .iter()
                .enumerate()
                .min_by(|a, b| (a.1.delta - target).abs().total_cmp(&(b.1.delta - target).abs()))
                .map(|(j, _)| j)
                .unwrap_or(0);
            if j == 0 || j + 1 >= line.len() {
                return Err(HarnessError::Usage(format!("grid too coarse to difference around delta = {target}")));
            }
            Ok((line[j + 1].transform - line[j - 1].transform) / (line[j + 1].delta - line[j - 1].delta))
        })
    }

    /// Boundaries whose slope is not strictly below both neighbouring centers.
    pub fn violations(&self) -> Vec<usize> {
        (0..self.boundaries.len())
            .filter(|&b| !(self.boundary_slopes[b] < self.center_slopes[b] && self.boundary_slopes[b] < self.center_slopes[b + 1]))
            .collect()
    }

    pub fn holds(&self) -> bool {
        !self.boundaries.is_empty() && self.violations().is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(kind: TransformKind, lambda: f64, levels: usize, grid: usize) -> ContourSpec {
        ContourSpec {
            kind,
            lambda,
            levels,
            lo: 0.0,
            hi: 1.0,
            grid,
        }
    }

    #[test]
    fn linear_transform_column_is_delta() {
        let s = spec(TransformKind::Linear, 4.0, 4, 9);
        for r in contour(&s).unwrap() {
            assert_eq!(r.transform, r.delta);
            assert_eq!(r.weight, None);
        }
    }

    #[test]
    fn rkl_reference_row() {
        // L = 1 on [0, 1] with lambda = 2 gives lambda_O = 4.
        let s = spec(TransformKind::Rkl, 2.0, 1, 11);
        let rows = contour(&s).unwrap();
        let r = rows
            .iter()
            .find(|r| r.sigma_v == 0.5 && (r.delta - 0.1).abs() < 1e-12)
            .unwrap();
        assert!((r.transform - 0.1).abs() < 1e-12);
        assert!((r.weight.unwrap() - 1.0).abs() < 1e-12);
        assert!((r.error.unwrap() - 0.1).abs() < 1e-12);
    }

    #[test]
    fn value_axis_is_centered() {
        let s = spec(TransformKind::Fkl, 4.0, 4, 5);
        assert_eq!(s.value_at(0.5), 0.5);
        assert_eq!(s.sigma_axis(), vec![0.1, 0.3, 0.5, 0.7, 0.9]);
        assert_eq!(s.delta_axis(), vec![-0.5, -0.25, 0.0, 0.25, 0.5]);
    }

    #[test]
    fn zero_grid_is_rejected() {
        assert!(contour(&spec(TransformKind::Js, 4.0, 4, 0)).is_err());
    }

    #[test]
    fn dump_round_trips() {
        let s = spec(TransformKind::Jeffreys, 4.0, 2, 4);
        let rows = contour(&s).unwrap();
        assert_eq!(parse_contour(&render_contour(&s, &rows)).unwrap(), rows);
    }

    #[test]
    fn fkl_dump_shows_the_wave() {
        let s = spec(TransformKind::Fkl, 4.0, 4, 101);
        let rows = contour(&s).unwrap();
        let report = WaveReport::from_contour(&s, &rows).unwrap();
        assert!(report.holds(), "{report:?}");
        let flat = spec(TransformKind::Fkl, 1.0, 4, 101);
        assert!(!WaveReport::from_contour(&flat, &contour(&flat).unwrap()).unwrap().holds());
    }
}
