//! Volume growth curves `s -> ln #B_x(e^s)`, their smoothed derivative, and
//! local dimension estimates.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cloud::{euclid, PointCloud};
use super::neighbors::knn_distances;
use super::DetectError;

/// Per-point features, one row per point.
pub type FeatureMatrix = PointCloud;

pub const DEFAULT_GRID_POINTS: usize = 64;
/// Relative factor applied to data-derived grid endpoints.
const ENDPOINT_NUDGE: f64 = 1.0 + 1e-9;
/// Default smoothing bandwidth, in grid steps of log-radius.
pub const DEFAULT_BANDWIDTH_STEPS: f64 = 3.0;
/// Default fit window for [`local_dim_ls`], as fractions of the log-radius
/// range of the grid.
pub const DEFAULT_WINDOW: (f64, f64) = (0.125, 0.5);
/// Radii whose median ball count is below this carry mostly counting noise
/// and are dropped from clustering features.
pub const DEFAULT_MIN_MEDIAN_COUNT: f64 = 20.0;

/// Strictly increasing positive radii.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiusGrid {
    radii: Vec<f64>,
}

impl RadiusGrid {
    pub fn new(radii: Vec<f64>) -> Result<Self, DetectError> {
        if radii.is_empty() {
            return Err(DetectError::EmptyGrid);
        }
        if radii.iter().any(|r| !(r.is_finite() && *r > 0.0)) || radii.windows(2).any(|w| w[1] <= w[0]) {
            return Err(DetectError::BadParameters("radius grid must be positive and strictly increasing".into()));
        }
        Ok(RadiusGrid { radii })
    }

    /// `m` radii spaced evenly in log from `lo` to `hi`, endpoints exact.
    pub fn geometric(lo: f64, hi: f64, m: usize) -> Result<Self, DetectError> {
        if m == 0 {
            return Err(DetectError::EmptyGrid);
        }
        if m == 1 {
            return Self::new(vec![lo]);
        }
        let (a, b) = (lo.ln(), hi.ln());
        let mut radii: Vec<f64> = (0..m).map(|i| (a + (b - a) * i as f64 / (m - 1) as f64).exp()).collect();
        radii[0] = lo;
        radii[m - 1] = hi;
        Self::new(radii)
    }

    /// Default grid: from the median third-neighbour distance to the
    /// diameter.
    pub fn for_cloud(pc: &PointCloud) -> Self {
        Self::for_cloud_with(pc, DEFAULT_GRID_POINTS)
    }

    pub fn for_cloud_with(pc: &PointCloud, m: usize) -> Self {
        let diam = pc.diameter();
        let m = m.max(2);
        if diam <= 0.0 {
            return Self::geometric(1e-3, 1.0, m).expect("fixed grid");
        }
        let lo = if pc.len() >= 4 {
            let mut third: Vec<f64> = (0..pc.len()).into_par_iter().map(|i| knn_distances(pc, i, 3)[2]).collect();
            third.sort_by(f64::total_cmp);
            third[(third.len() - 1) / 2]
        } else {
            0.0
        };
        let lo = if lo > 0.0 && lo < diam { lo } else { diam / 100.0 };
        // Endpoints are pairwise distances; nudge them so open balls hold
        // their defining point regardless of rounding.
        Self::geometric(lo * ENDPOINT_NUDGE, diam * ENDPOINT_NUDGE, m).expect("positive increasing endpoints")
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }

    /// Mean spacing in log-radius.
    pub fn log_step(&self) -> f64 {
        let m = self.radii.len();
        if m < 2 {
            return 1.0;
        }
        (self.radii[m - 1] / self.radii[0]).ln() / (m - 1) as f64
    }

    /// Radii at fractions `(lo, hi)` of the grid's log range.
    pub fn window_fraction(&self, lo: f64, hi: f64) -> (f64, f64) {
        let (a, b) = (self.radii[0].ln(), self.radii[self.radii.len() - 1].ln());
        ((a + (b - a) * lo).exp(), (a + (b - a) * hi).exp())
    }

    pub fn default_window(&self) -> (f64, f64) {
        self.window_fraction(DEFAULT_WINDOW.0, DEFAULT_WINDOW.1)
    }

    pub fn default_bandwidth(&self) -> f64 {
        DEFAULT_BANDWIDTH_STEPS * self.log_step()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VgtCurve {
    pub log_radii: Vec<f64>,
    pub log_counts: Vec<f64>,
}

impl VgtCurve {
    /// Least-squares slope over samples with radius in `[lo, hi]`.
    pub fn slope_in(&self, lo: f64, hi: f64) -> Result<f64, DetectError> {
        let (a, b) = (lo.ln() - 1e-12, hi.ln() + 1e-12);
        let idx: Vec<usize> = (0..self.log_radii.len()).filter(|&i| self.log_radii[i] >= a && self.log_radii[i] <= b).collect();
        if idx.len() < 2 {
            return Err(DetectError::DegenerateWindow(format!("{} grid points in [{lo}, {hi}]", idx.len())));
        }
        let xs: Vec<f64> = idx.iter().map(|&i| self.log_radii[i]).collect();
        let ys: Vec<f64> = idx.iter().map(|&i| self.log_counts[i]).collect();
        ols_slope(&xs, &ys).ok_or_else(|| DetectError::DegenerateWindow("no spread in log-radius".into()))
    }
}

fn ols_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Counts `#{y : d(x, y) < r}` for every grid radius, by one pass over the
/// cloud.
fn ball_counts(pc: &PointCloud, center: usize, radii: &[f64]) -> Vec<usize> {
    let c = pc.point(center);
    let mut hist = vec![0usize; radii.len() + 1];
    for p in pc.points() {
        let d = euclid(c, p);
        hist[radii.partition_point(|&r| r <= d)] += 1;
    }
    let mut acc = 0;
    hist[..radii.len()]
        .iter()
        .map(|h| {
            acc += h;
            acc
        })
        .collect()
}

pub fn vgt(pc: &PointCloud, center: usize, grid: &RadiusGrid) -> Result<VgtCurve, DetectError> {
    pc.check_index(center)?;
    let counts = ball_counts(pc, center, grid.radii());
    let curve = VgtCurve {
        log_radii: grid.radii().iter().map(|r| r.ln()).collect(),
        log_counts: counts.iter().map(|&c| (c as f64).ln()).collect(),
    };
    debug_assert!(curve.log_counts.windows(2).all(|w| w[0] <= w[1]));
    Ok(curve)
}

/// Curves for every point, computed in parallel.
pub fn vgt_all(pc: &PointCloud, grid: &RadiusGrid) -> Vec<VgtCurve> {
    (0..pc.len()).into_par_iter().map(|i| vgt(pc, i, grid).expect("index in range")).collect()
}

/// Gaussian-weighted local-linear fit evaluated at each `x`; reproduces
/// straight lines exactly, including at the ends.
pub fn smooth_local_linear(xs: &[f64], ys: &[f64], bandwidth: f64) -> Vec<f64> {
    let inv = 1.0 / (2.0 * bandwidth * bandwidth);
    xs.iter()
        .map(|&x0| {
            let (mut s0, mut s1, mut s2, mut t0, mut t1) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for (&x, &y) in xs.iter().zip(ys) {
                let dx = x - x0;
                let w = (-dx * dx * inv).exp();
                s0 += w;
                s1 += w * dx;
                s2 += w * dx * dx;
                t0 += w * y;
                t1 += w * dx * y;
            }
            let det = s0 * s2 - s1 * s1;
            if det.abs() <= 1e-12 * s0 * s2.max(f64::MIN_POSITIVE) {
                t0 / s0
            } else {
                (s2 * t0 - s1 * t1) / det
            }
        })
        .collect()
}

/// Central differences, one-sided at the ends.
pub fn derivative(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let m = xs.len();
    (0..m)
        .map(|i| {
            let (a, b) = (i.saturating_sub(1), (i + 1).min(m - 1));
            (ys[b] - ys[a]) / (xs[b] - xs[a])
        })
        .collect()
}

/// Derivative of the smoothed curve; `bandwidth` is in log-radius units.
pub fn vgt_dot(curve: &VgtCurve, bandwidth: f64) -> Result<Vec<f64>, DetectError> {
    if curve.log_radii.len() < 5 {
        return Err(DetectError::CurveTooShort(curve.log_radii.len()));
    }
    if !(bandwidth > 0.0) {
        return Err(DetectError::BadParameters(format!("bandwidth must be positive, got {bandwidth}")));
    }
    let smooth = smooth_local_linear(&curve.log_radii, &curve.log_counts, bandwidth);
    Ok(derivative(&curve.log_radii, &smooth))
}

/// VGT-dot rows for every point.
pub fn vgt_dot_features(pc: &PointCloud, grid: &RadiusGrid, bandwidth: f64) -> Result<FeatureMatrix, DetectError> {
    let rows = (0..pc.len())
        .into_par_iter()
        .map(|i| vgt_dot(&vgt(pc, i, grid)?, bandwidth))
        .collect::<Result<Vec<_>, _>>()?;
    PointCloud::from_rows(&rows)
}

/// First grid index whose median ball count over all centers reaches
/// `min_count`, capped so that at least five radii remain.
pub fn informative_start(curves: &[VgtCurve], min_count: f64) -> usize {
    let m = curves.first().map_or(0, |c| c.log_counts.len());
    let cap = m.saturating_sub(5);
    let threshold = min_count.max(1.0).ln();
    let mut col = vec![0.0; curves.len()];
    for j in 0..cap {
        for (v, c) in col.iter_mut().zip(curves) {
            *v = c.log_counts[j];
        }
        col.sort_by(f64::total_cmp);
        if col[(col.len() - 1) / 2] >= threshold {
            return j;
        }
    }
    cap
}

/// VGT-dot rows restricted to radii where the median ball holds at least
/// `min_count` points. Returns the features and the first radius index kept.
pub fn vgt_dot_features_trimmed(
    pc: &PointCloud,
    grid: &RadiusGrid,
    bandwidth: f64,
    min_count: f64,
) -> Result<(FeatureMatrix, usize), DetectError> {
    let curves = vgt_all(pc, grid);
    let start = informative_start(&curves, min_count);
    let rows = curves
        .par_iter()
        .map(|c| vgt_dot(c, bandwidth).map(|d| d[start..].to_vec()))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((PointCloud::from_rows(&rows)?, start))
}

/// Least-squares slope of the VGT of `center` over radii in `window`.
pub fn local_dim_ls(pc: &PointCloud, center: usize, grid: &RadiusGrid, window: (f64, f64)) -> Result<f64, DetectError> {
    vgt(pc, center, grid)?.slope_in(window.0, window.1)
}

pub fn local_dims(pc: &PointCloud, grid: &RadiusGrid, window: (f64, f64)) -> Result<Vec<f64>, DetectError> {
    (0..pc.len()).into_par_iter().map(|i| local_dim_ls(pc, i, grid, window)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoNn {
    pub estimate: f64,
    /// `ln(r2 / r1)` per point.
    pub log_ratios: Vec<f64>,
}

/// Maximum-likelihood two-nearest-neighbour dimension `N / sum ln(r2/r1)`.
pub fn two_nn_dim(pc: &PointCloud) -> Result<TwoNn, DetectError> {
    if pc.len() < 3 {
        return Err(DetectError::NotEnoughPoints { need: 3, got: pc.len() });
    }
    let pairs: Vec<(f64, f64)> = (0..pc.len())
        .into_par_iter()
        .map(|i| {
            let d = knn_distances(pc, i, 2);
            (d[0], d[1])
        })
        .collect();
    if let Some(i) = pairs.iter().position(|p| p.0 == 0.0) {
        return Err(DetectError::DuplicatePoints(i));
    }
    let log_ratios: Vec<f64> = pairs.iter().map(|(r1, r2)| (r2 / r1).ln()).collect();
    let total: f64 = log_ratios.iter().sum();
    Ok(TwoNn { estimate: pc.len() as f64 / total, log_ratios })
}

/// `(local dimension, ln #B_x(r_density))` per point.
pub fn dic_feature(pc: &PointCloud, grid: &RadiusGrid, r_density: f64) -> Result<FeatureMatrix, DetectError> {
    if !(r_density > 0.0) {
        return Err(DetectError::BadParameters(format!("density radius must be positive, got {r_density}")));
    }
    let window = grid.default_window();
    let rows = (0..pc.len())
        .into_par_iter()
        .map(|i| {
            let dim = local_dim_ls(pc, i, grid, window)?;
            let count = ball_counts(pc, i, &[r_density])[0];
            Ok(vec![dim, (count as f64).ln()])
        })
        .collect::<Result<Vec<_>, DetectError>>()?;
    PointCloud::from_rows(&rows)
}
