//! Ball counts, nearest neighbours and a uniform-grid index.

use std::collections::HashMap;

use super::cloud::{euclid, PointCloud};
use super::DetectError;

/// Number of points at distance strictly below `r` from point `center`,
/// the center included. Brute force.
pub fn ball_count(pc: &PointCloud, center: usize, r: f64) -> Result<usize, DetectError> {
    pc.check_index(center)?;
    if !(r > 0.0) {
        return Err(DetectError::BadParameters(format!("radius must be positive, got {r}")));
    }
    let c = pc.point(center);
    Ok(pc.points().filter(|p| euclid(c, p) < r).count())
}

/// Distances from `center` to its `k` nearest other points, ascending.
pub fn knn_distances(pc: &PointCloud, center: usize, k: usize) -> Vec<f64> {
    knn(pc, center, k).into_iter().map(|(_, d)| d).collect()
}

/// The `k` nearest other points as `(index, distance)`, ascending by
/// distance then index.
pub fn knn(pc: &PointCloud, center: usize, k: usize) -> Vec<(usize, f64)> {
    let c = pc.point(center);
    let mut best: Vec<(usize, f64)> = Vec::with_capacity(k + 1);
    for j in 0..pc.len() {
        if j == center {
            continue;
        }
        let d = euclid(c, pc.point(j));
        if best.len() == k && d >= best[k - 1].1 {
            continue;
        }
        let pos = best.partition_point(|&(_, e)| e <= d);
        best.insert(pos, (j, d));
        best.truncate(k);
    }
    best
}

/// Uniform grid of cubic cells for radius queries in low dimension.
#[derive(Debug, Clone)]
pub struct GridIndex<'a> {
    pc: &'a PointCloud,
    cell: f64,
    origin: Vec<f64>,
    cells: HashMap<Vec<i64>, Vec<usize>>,
}

impl<'a> GridIndex<'a> {
    /// Supports D <= 3.
    pub fn new(pc: &'a PointCloud, cell: f64) -> Result<Self, DetectError> {
        if !(cell > 0.0) || pc.dim() > 3 {
            return Err(DetectError::BadParameters(format!("grid index needs cell > 0 and D <= 3 (cell {cell}, D {})", pc.dim())));
        }
        let mut origin = vec![f64::INFINITY; pc.dim()];
        for p in pc.points() {
            origin.iter_mut().zip(p).for_each(|(o, v)| *o = o.min(*v));
        }
        let mut cells: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
        for (i, p) in pc.points().enumerate() {
            cells.entry(Self::key_of(&origin, cell, p)).or_default().push(i);
        }
        Ok(GridIndex { pc, cell, origin, cells })
    }

    fn key_of(origin: &[f64], cell: f64, p: &[f64]) -> Vec<i64> {
        p.iter().zip(origin).map(|(v, o)| ((v - o) / cell).floor() as i64).collect()
    }

    /// Same count as [`ball_count`].
    pub fn ball_count(&self, center: usize, r: f64) -> Result<usize, DetectError> {
        self.pc.check_index(center)?;
        let c = self.pc.point(center);
        let key = Self::key_of(&self.origin, self.cell, c);
        let reach = (r / self.cell).ceil() as i64;
        let d = key.len();
        let side = (2 * reach + 1) as usize;
        let mut count = 0;
        let mut probe = vec![0i64; d];
        for code in 0..side.pow(d as u32) {
            let mut rest = code;
            for k in 0..d {
                probe[k] = key[k] + (rest % side) as i64 - reach;
                rest /= side;
            }
            if let Some(members) = self.cells.get(&probe) {
                count += members.iter().filter(|&&j| euclid(c, self.pc.point(j)) < r).count();
            }
        }
        Ok(count)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn small_counts() {
        let one = PointCloud::from_rows(&[vec![0.3, 0.3]]).unwrap();
        assert_eq!(ball_count(&one, 0, 0.01).unwrap(), 1);
        let line = PointCloud::from_rows(&[vec![0.0], vec![1.0], vec![2.0]]).unwrap();
        assert_eq!(ball_count(&line, 1, 1.5).unwrap(), 3);
        assert_eq!(ball_count(&line, 1, 1.0).unwrap(), 1);
        assert!(matches!(ball_count(&line, 3, 1.0), Err(DetectError::IndexOutOfRange { .. })));
    }

    #[test]
    fn lattice_count_matches_recount() {
        let rows: Vec<Vec<f64>> =
            (0..=10).flat_map(|i| (0..=10).map(move |j| vec![i as f64 * 0.1, j as f64 * 0.1])).collect();
        let pc = PointCloud::from_rows(&rows).unwrap();
        let center = 5 * 11 + 5;
        let mut manual = 0;
        for i in 0..=10i32 {
            for j in 0..=10i32 {
                let (dx, dy) = ((i - 5) as f64 * 0.1, (j - 5) as f64 * 0.1);
                if (dx * dx + dy * dy).sqrt() < 0.25 {
                    manual += 1;
                }
            }
        }
        assert_eq!(manual, 21);
        assert_eq!(ball_count(&pc, center, 0.25).unwrap(), manual);
        let idx = GridIndex::new(&pc, 0.1).unwrap();
        assert_eq!(idx.ball_count(center, 0.25).unwrap(), manual);
    }

    #[test]
    fn grid_index_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for d in 1..=3 {
            let rows: Vec<Vec<f64>> = (0..400).map(|_| (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
            let pc = PointCloud::from_rows(&rows).unwrap();
            for cell in [0.05, 0.2, 0.7] {
                let idx = GridIndex::new(&pc, cell).unwrap();
                for c in (0..400).step_by(37) {
                    for r in [0.01, 0.1, 0.33, 1.5] {
                        assert_eq!(idx.ball_count(c, r).unwrap(), ball_count(&pc, c, r).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn nearest_neighbours() {
        let line = PointCloud::from_rows(&[vec![0.0], vec![1.0], vec![3.0], vec![7.0]]).unwrap();
        assert_eq!(knn(&line, 0, 2), vec![(1, 1.0), (2, 3.0)]);
        assert_eq!(knn_distances(&line, 3, 5), vec![4.0, 6.0, 7.0]);
    }
}
