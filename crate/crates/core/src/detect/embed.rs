//! Geodesic embeddings (k-NN graph distances + classical scaling) and
//! cosine-basis projections.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::cloud::PointCloud;
use super::neighbors::knn;
use super::DetectError;

/// Clouds larger than this embed through landmarks.
pub const LANDMARK_THRESHOLD: usize = 1000;
pub const DEFAULT_LANDMARKS: usize = 300;

#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    /// N x d coordinates.
    pub coords: PointCloud,
    /// `1 - corr^2` between graph geodesics and embedded distances.
    pub residual: f64,
    pub eigenvalues: Vec<f64>,
    /// Rows used as landmarks (all rows for small clouds).
    pub landmarks: Vec<usize>,
}

impl Embedding {
    pub fn to_csv_string(&self) -> String {
        let mut out = format!("# residual={}\n", self.residual);
        let d = self.coords.dim();
        out.push_str(&(1..=d).map(|k| format!("c{k}")).collect::<Vec<_>>().join(","));
        out.push('\n');
        for p in self.coords.points() {
            out.push_str(&p.iter().map(f64::to_string).collect::<Vec<_>>().join(","));
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Symmetrized k-NN graph as adjacency lists.
pub fn knn_graph(pc: &PointCloud, k: usize) -> Vec<Vec<(usize, f64)>> {
    let n = pc.len();
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for i in 0..n {
        for (j, d) in knn(pc, i, k) {
            adj[i].push((j, d));
            adj[j].push((i, d));
        }
    }
    for row in &mut adj {
        row.sort_by(|a, b| a.0.cmp(&b.0));
        row.dedup_by_key(|e| e.0);
    }
    adj
}

fn components(adj: &[Vec<(usize, f64)>]) -> usize {
    let mut seen = vec![false; adj.len()];
    let mut count = 0;
    for s in 0..adj.len() {
        if seen[s] {
            continue;
        }
        count += 1;
        let mut stack = vec![s];
        seen[s] = true;
        while let Some(u) = stack.pop() {
            for &(v, _) in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
    }
    count
}

pub fn dijkstra(adj: &[Vec<(usize, f64)>], source: usize) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; adj.len()];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(Entry(0.0, source));
    while let Some(Entry(d, u)) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        for &(v, w) in &adj[u] {
            let nd = d + w;
            if nd < dist[v] {
                dist[v] = nd;
                heap.push(Entry(nd, v));
            }
        }
    }
    dist
}

/// Leading eigenpairs of a symmetric matrix by power iteration with
/// deflation. Negative eigenvalues met on the way are deflated and dropped.
pub fn top_eigenpairs(b: &[Vec<f64>], count: usize) -> Vec<(f64, Vec<f64>)> {
    let n = b.len();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut found: Vec<(f64, Vec<f64>)> = Vec::new();
    let mut kept = Vec::new();
    let matvec = |v: &[f64], found: &[(f64, Vec<f64>)]| -> Vec<f64> {
        let mut w: Vec<f64> = b.iter().map(|row| row.iter().zip(v).map(|(a, x)| a * x).sum()).collect();
        for (lam, u) in found {
            let dot: f64 = u.iter().zip(v).map(|(a, x)| a * x).sum();
            w.iter_mut().zip(u).for_each(|(wi, ui)| *wi -= lam * dot * ui);
        }
        w
    };
    while kept.len() < count && found.len() < n.min(count + 16) {
        let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        normalize(&mut v);
        let mut lam = 0.0;
        for _ in 0..10_000 {
            let mut w = matvec(&v, &found);
            lam = w.iter().zip(&v).map(|(a, x)| a * x).sum();
            if normalize(&mut w) == 0.0 {
                lam = 0.0;
                break;
            }
            let s = if lam < 0.0 { -1.0 } else { 1.0 };
            let diff: f64 = w.iter().zip(&v).map(|(a, x)| (a - s * x) * (a - s * x)).sum::<f64>().sqrt();
            v = w;
            if diff < 1e-12 {
                break;
            }
        }
        if lam.abs() <= 1e-12 {
            break;
        }
        found.push((lam, v.clone()));
        if lam > 0.0 {
            kept.push((lam, v));
        }
    }
    kept
}

fn normalize(v: &mut [f64]) -> f64 {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}

fn pearson(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return 0.0;
    }
    sxy / (sxx * syy).sqrt()
}

/// Pearson correlation, exposed for diagnostics.
pub fn correlation(xs: &[f64], ys: &[f64]) -> f64 {
    pearson(xs, ys)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IsomapParams {
    pub k_neighbors: usize,
    pub d_out: usize,
    /// Landmark count for clouds above [`LANDMARK_THRESHOLD`].
    pub landmarks: usize,
}

pub fn isomap_lite(pc: &PointCloud, k_neighbors: usize, d_out: usize) -> Result<Embedding, DetectError> {
    isomap_with(pc, IsomapParams { k_neighbors, d_out, landmarks: DEFAULT_LANDMARKS })
}

/// k-NN graph geodesics embedded by classical scaling on landmarks chosen by
/// farthest-point sampling, other rows placed by distance triangulation.
pub fn isomap_with(pc: &PointCloud, params: IsomapParams) -> Result<Embedding, DetectError> {
    let IsomapParams { k_neighbors: k, d_out, landmarks } = params;
    let n = pc.len();
    if d_out == 0 || d_out > 3 || d_out > pc.dim() {
        return Err(DetectError::DOutTooLarge { d_out, dim: pc.dim().min(3) });
    }
    if k == 0 || k >= n {
        return Err(DetectError::BadParameters(format!("need 1 <= k_neighbors < N, got k = {k}")));
    }
    let adj = knn_graph(pc, k);
    let comps = components(&adj);
    if comps > 1 {
        return Err(DetectError::GraphDisconnected { components: comps });
    }
    if k < d_out + 1 {
        return Err(DetectError::BadParameters(format!("need k_neighbors >= d_out + 1, got k = {k}")));
    }
    let m = if n <= LANDMARK_THRESHOLD { n } else { landmarks.clamp(d_out + 1, n) };
    let mut marks = Vec::with_capacity(m);
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(m);
    if m == n {
        marks.extend(0..n);
        rows.extend((0..n).map(|s| dijkstra(&adj, s)));
    } else {
        let mut nearest = vec![f64::INFINITY; n];
        let mut next = 0;
        for _ in 0..m {
            marks.push(next);
            let row = dijkstra(&adj, next);
            nearest.iter_mut().zip(&row).for_each(|(a, b)| *a = a.min(*b));
            rows.push(row);
            next = (0..n).max_by(|&a, &b| nearest[a].total_cmp(&nearest[b]).then(b.cmp(&a))).expect("n > 0");
        }
    }
    // squared landmark geodesics, double centered
    let d2: Vec<Vec<f64>> = (0..m).map(|i| marks.iter().map(|&j| rows[i][j] * rows[i][j]).collect()).collect();
    let col_mean: Vec<f64> = (0..m).map(|j| d2.iter().map(|r| r[j]).sum::<f64>() / m as f64).collect();
    let grand = col_mean.iter().sum::<f64>() / m as f64;
    let b: Vec<Vec<f64>> =
        (0..m).map(|i| (0..m).map(|j| -0.5 * (d2[i][j] - col_mean[i] - col_mean[j] + grand)).collect()).collect();
    let pairs = top_eigenpairs(&b, d_out);
    if pairs.len() < d_out {
        return Err(DetectError::BadParameters(format!("only {} positive eigenvalues", pairs.len())));
    }
    let mut coords = vec![0.0; n * d_out];
    for a in 0..n {
        for (c, (lam, v)) in pairs.iter().enumerate() {
            let s: f64 = (0..m).map(|l| v[l] * (rows[l][a] * rows[l][a] - col_mean[l])).sum();
            coords[a * d_out + c] = -0.5 * s / lam.sqrt();
        }
    }
    let coords = PointCloud::new(n, d_out, coords)?;
    let mut geo = Vec::new();
    let mut emb = Vec::new();
    for (l, &p) in marks.iter().enumerate() {
        for a in 0..n {
            if a != p && (m < n || a > p) {
                geo.push(rows[l][a]);
                emb.push(coords.dist(p, a));
            }
        }
    }
    let r = pearson(&geo, &emb);
    Ok(Embedding { coords, residual: 1.0 - r * r, eigenvalues: pairs.iter().map(|p| p.0).collect(), landmarks: marks })
}

/// First `d_out` rows of the orthonormal DCT-II matrix.
pub fn dct_matrix(d_out: usize, d: usize) -> Vec<Vec<f64>> {
    (0..d_out)
        .map(|k| {
            let s = if k == 0 { (1.0 / d as f64).sqrt() } else { (2.0 / d as f64).sqrt() };
            (0..d).map(|j| s * (std::f64::consts::PI * (j as f64 + 0.5) * k as f64 / d as f64).cos()).collect()
        })
        .collect()
}

/// Keeps the first `d_out` orthonormal DCT-II coefficients, scaled by
/// `sqrt(D / d_out)` so squared distances are preserved in expectation.
/// With `d_out = D` this is an orthogonal map.
pub fn dct_project(pc: &PointCloud, d_out: usize) -> Result<PointCloud, DetectError> {
    if d_out == 0 || d_out > pc.dim() {
        return Err(DetectError::DOutTooLarge { d_out, dim: pc.dim() });
    }
    let scale = (pc.dim() as f64 / d_out as f64).sqrt();
    let basis = dct_matrix(d_out, pc.dim());
    pc.map_points(|p| basis.iter().map(|row| scale * row.iter().zip(p).map(|(a, x)| a * x).sum::<f64>()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_cloud(n: usize, d: usize, seed: u64) -> PointCloud {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        PointCloud::from_rows(&rows).unwrap()
    }

    #[test]
    fn line_in_space_is_recovered() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let ts: Vec<f64> = (0..300).map(|_| rng.gen_range(0.0..5.0)).collect();
        let rows: Vec<Vec<f64>> = ts.iter().map(|t| vec![1.0 + 0.6 * t, -0.8 * t, 2.0]).collect();
        let pc = PointCloud::from_rows(&rows).unwrap();
        let e = isomap_lite(&pc, 6, 1).unwrap();
        let x: Vec<f64> = e.coords.points().map(|p| p[0]).collect();
        assert!(pearson(&x, &ts).abs() >= 0.999);
        assert!(e.residual < 1e-6);
    }

    #[test]
    fn one_neighbour_graphs_fall_apart() {
        let pc = random_cloud(200, 2, 1);
        assert!(matches!(isomap_lite(&pc, 1, 1), Err(DetectError::GraphDisconnected { components }) if components > 1));
        assert!(matches!(isomap_lite(&pc, 190, 3), Err(DetectError::DOutTooLarge { .. })));
    }

    #[test]
    fn eigenpairs_of_a_diagonal() {
        let b = vec![vec![3.0, 0.0, 0.0], vec![0.0, -5.0, 0.0], vec![0.0, 0.0, 1.0]];
        let pairs = top_eigenpairs(&b, 2);
        assert!((pairs[0].0 - 3.0).abs() < 1e-9 && (pairs[1].0 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn full_dct_is_orthogonal() {
        let pc = random_cloud(40, 16, 2);
        let q = dct_project(&pc, 16).unwrap();
        for i in 0..40 {
            for j in 0..40 {
                assert!((pc.dist(i, j) - q.dist(i, j)).abs() < 1e-9);
            }
        }
        let c = PointCloud::from_rows(&[vec![2.0; 16]]).unwrap();
        let p = dct_project(&c, 16).unwrap();
        assert!((p.point(0)[0] - 2.0 * 4.0).abs() < 1e-12);
        assert!(p.point(0)[1..].iter().all(|v| v.abs() < 1e-12));
        assert!(matches!(dct_project(&pc, 17), Err(DetectError::DOutTooLarge { .. })));
    }

    #[test]
    fn dct_compression_keeps_distances_roughly() {
        let pc = random_cloud(80, 256, 3);
        let q = dct_project(&pc, 100).unwrap();
        let mut err = Vec::new();
        for i in 0..80 {
            for j in i + 1..80 {
                err.push((1.0 - q.dist(i, j) / pc.dist(i, j)).abs());
            }
        }
        err.sort_by(f64::total_cmp);
        assert!(err[err.len() / 2] < 0.15, "median distortion {}", err[err.len() / 2]);
    }
}
