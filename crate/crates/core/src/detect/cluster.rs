//! k-means and average-linkage agglomerative clustering of feature rows.

use std::collections::HashMap;
use std::hash::Hash;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::cloud::PointCloud;
use super::DetectError;

/// Restarts tried by [`kmeans`]; the lowest-inertia run wins.
pub const DEFAULT_KMEANS_RESTARTS: usize = 8;
pub const KMEANS_MAX_ITER: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct KMeans {
    pub labels: Vec<usize>,
    pub centers: Vec<Vec<f64>>,
    pub inertia: f64,
    pub iterations: usize,
}

fn sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Renumbers labels by first appearance.
pub fn canonical_labels(labels: &[usize]) -> Vec<usize> {
    let mut map = HashMap::new();
    labels
        .iter()
        .map(|l| {
            let next = map.len();
            *map.entry(*l).or_insert(next)
        })
        .collect()
}

fn check_k(n: usize, k: usize) -> Result<(), DetectError> {
    if k == 0 || k > n {
        return Err(DetectError::KTooLarge { k, n });
    }
    Ok(())
}

pub fn kmeans(features: &PointCloud, k: usize, seed: u64) -> Result<KMeans, DetectError> {
    kmeans_with(features, k, seed, DEFAULT_KMEANS_RESTARTS)
}

/// Lloyd's algorithm from k-means++ seeds, `restarts` times from one seeded
/// stream.
pub fn kmeans_with(features: &PointCloud, k: usize, seed: u64, restarts: usize) -> Result<KMeans, DetectError> {
    check_k(features.len(), k)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<KMeans> = None;
    for _ in 0..restarts.max(1) {
        let run = lloyd(features, seeds_plus_plus(features, k, &mut rng));
        if best.as_ref().is_none_or(|b| run.inertia < b.inertia) {
            best = Some(run);
        }
    }
    let mut best = best.expect("at least one run");
    // relabel by first appearance, carrying the centers along
    let canon = canonical_labels(&best.labels);
    let mut centers = vec![Vec::new(); k];
    for (old, new) in best.labels.iter().zip(&canon) {
        if centers[*new].is_empty() {
            centers[*new] = best.centers[*old].clone();
        }
    }
    best.labels = canon;
    best.centers = centers;
    Ok(best)
}

/// D^2-weighted seeding; falls back to the first unchosen row when every
/// remaining point coincides with a center.
fn seeds_plus_plus(x: &PointCloud, k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut chosen = vec![rng.gen_range(0..n)];
    let mut d2: Vec<f64> = (0..n).map(|i| sq(x.point(i), x.point(chosen[0]))).collect();
    while chosen.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.gen::<f64>() * total;
            let mut pick = n - 1;
            for (i, w) in d2.iter().enumerate() {
                if *w > 0.0 && target < *w {
                    pick = i;
                    break;
                }
                target -= w;
            }
            if d2[pick] == 0.0 {
                d2.iter().rposition(|w| *w > 0.0).expect("positive mass")
            } else {
                pick
            }
        } else {
            (0..n).find(|i| !chosen.contains(i)).expect("k <= n")
        };
        chosen.push(next);
        for i in 0..n {
            d2[i] = d2[i].min(sq(x.point(i), x.point(next)));
        }
    }
    chosen.into_iter().map(|i| x.point(i).to_vec()).collect()
}

fn lloyd(x: &PointCloud, mut centers: Vec<Vec<f64>>) -> KMeans {
    let (n, d, k) = (x.len(), x.dim(), centers.len());
    let mut labels = vec![usize::MAX; n];
    let mut iterations = 0;
    loop {
        let mut changed = false;
        for i in 0..n {
            let p = x.point(i);
            let mut best = (0, f64::INFINITY);
            for (c, ctr) in centers.iter().enumerate() {
                let v = sq(p, ctr);
                if v < best.1 {
                    best = (c, v);
                }
            }
            if labels[i] != best.0 {
                labels[i] = best.0;
                changed = true;
            }
        }
        if !changed || iterations == KMEANS_MAX_ITER {
            break;
        }
        iterations += 1;
        let mut sums = vec![vec![0.0; d]; k];
        let mut counts = vec![0usize; k];
        for i in 0..n {
            counts[labels[i]] += 1;
            sums[labels[i]].iter_mut().zip(x.point(i)).for_each(|(s, v)| *s += v);
        }
        for c in 0..k {
            if counts[c] > 0 {
                centers[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            } else {
                // reseed an empty cluster at the worst-fit point
                let far = (0..n)
                    .max_by(|&a, &b| sq(x.point(a), &centers[labels[a]]).total_cmp(&sq(x.point(b), &centers[labels[b]])))
                    .expect("n >= 1");
                centers[c] = x.point(far).to_vec();
            }
        }
    }
    let inertia = (0..n).map(|i| sq(x.point(i), &centers[labels[i]])).sum();
    KMeans { labels, centers, inertia, iterations }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Linkage {
    Average,
}

/// One merge of the dendrogram: the clusters holding points `a` and `b`
/// join at `height`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Merge {
    pub a: usize,
    pub b: usize,
    pub height: f64,
}

pub const AGGLOMERATIVE_MAX_POINTS: usize = 20_000;

/// Average-linkage dendrogram by the nearest-neighbour-chain algorithm,
/// merges sorted by height.
pub fn dendrogram(features: &PointCloud) -> Result<Vec<Merge>, DetectError> {
    let n = features.len();
    if n > AGGLOMERATIVE_MAX_POINTS {
        return Err(DetectError::BadParameters(format!("agglomerative clustering takes at most {AGGLOMERATIVE_MAX_POINTS} rows")));
    }
    // condensed upper triangle, single precision to bound memory
    let at = |i: usize, j: usize| {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        n * i - i * (i + 1) / 2 + (j - i - 1)
    };
    let mut dist = vec![0f32; n * (n.saturating_sub(1)) / 2];
    for i in 0..n {
        for j in i + 1..n {
            dist[at(i, j)] = sq(features.point(i), features.point(j)).sqrt() as f32;
        }
    }
    let mut size = vec![1usize; n];
    let mut active = vec![true; n];
    let mut merges = Vec::with_capacity(n.saturating_sub(1));
    let mut chain: Vec<usize> = Vec::new();
    while merges.len() + 1 < n {
        if chain.is_empty() {
            chain.push(active.iter().position(|&a| a).expect("two active clusters"));
        }
        let (a, b) = loop {
            let a = *chain.last().expect("nonempty chain");
            let prev = chain.len().checked_sub(2).map(|i| chain[i]);
            let mut best = prev;
            let mut best_d = prev.map_or(f32::INFINITY, |p| dist[at(a, p)]);
            for c in 0..n {
                if c != a && active[c] && dist[at(a, c)] < best_d {
                    best = Some(c);
                    best_d = dist[at(a, c)];
                }
            }
            let b = best.expect("another active cluster");
            if Some(b) == prev {
                chain.truncate(chain.len() - 2);
                break (a.min(b), a.max(b));
            }
            chain.push(b);
        };
        merges.push(Merge { a, b, height: dist[at(a, b)] as f64 });
        // cluster b folds into slot a
        let (na, nb) = (size[a] as f64, size[b] as f64);
        for c in 0..n {
            if active[c] && c != a && c != b {
                let v = (na * dist[at(a, c)] as f64 + nb * dist[at(b, c)] as f64) / (na + nb);
                dist[at(a, c)] = v as f32;
            }
        }
        size[a] += size[b];
        active[b] = false;
    }
    merges.sort_by(|x, y| x.height.total_cmp(&y.height));
    Ok(merges)
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Cuts the dendrogram at `k` clusters.
pub fn cut(n: usize, merges: &[Merge], k: usize) -> Result<Vec<usize>, DetectError> {
    check_k(n, k)?;
    let mut parent: Vec<usize> = (0..n).collect();
    for m in &merges[..n - k] {
        let (ra, rb) = (find(&mut parent, m.a), find(&mut parent, m.b));
        parent[ra.max(rb)] = ra.min(rb);
    }
    let roots: Vec<usize> = (0..n).map(|i| find(&mut parent, i)).collect();
    Ok(canonical_labels(&roots))
}

pub fn agglomerative(features: &PointCloud, k: usize, linkage: Linkage) -> Result<Vec<usize>, DetectError> {
    check_k(features.len(), k)?;
    match linkage {
        Linkage::Average => cut(features.len(), &dendrogram(features)?, k),
    }
}

/// Fraction of points whose cluster's majority class is their own class.
pub fn purity<T: Eq + Hash>(labels: &[usize], truth: &[T]) -> f64 {
    let mut table: HashMap<usize, HashMap<&T, usize>> = HashMap::new();
    for (l, t) in labels.iter().zip(truth) {
        *table.entry(*l).or_default().entry(t).or_default() += 1;
    }
    let hits: usize = table.values().map(|m| m.values().copied().max().unwrap_or(0)).sum();
    hits as f64 / labels.len().max(1) as f64
}

/// Most frequent label among `indices`, ties to the smaller label.
pub fn majority(labels: &[usize], indices: impl IntoIterator<Item = usize>) -> Option<usize> {
    let mut counts: HashMap<usize, usize> = HashMap::new();
    for i in indices {
        *counts.entry(labels[i]).or_default() += 1;
    }
    counts.into_iter().max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0))).map(|(l, _)| l)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::{Distribution, Normal};

    fn blobs(seed: u64) -> (PointCloud, Vec<usize>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = Normal::new(0.0, 1.0).unwrap();
        let mut rows = Vec::new();
        let mut truth = Vec::new();
        for (c, cx) in [(0usize, 0.0), (1, 10.0)] {
            for _ in 0..100 {
                rows.push(vec![cx + g.sample(&mut rng), g.sample(&mut rng)]);
                truth.push(c);
            }
        }
        (PointCloud::from_rows(&rows).unwrap(), truth)
    }

    #[test]
    fn kmeans_separates_blobs() {
        let (pc, truth) = blobs(1);
        let km = kmeans(&pc, 2, 7).unwrap();
        assert_eq!(purity(&km.labels, &truth), 1.0);
        assert_eq!(kmeans(&pc, 2, 7).unwrap(), km);
        assert!(kmeans(&pc, 1, 0).unwrap().labels.iter().all(|&l| l == 0));
        let small = PointCloud::from_rows(&[vec![0.0], vec![1.0], vec![5.0]]).unwrap();
        let all = kmeans(&small, 3, 3).unwrap();
        assert_eq!(all.labels, vec![0, 1, 2]);
        assert_eq!(all.inertia, 0.0);
        assert!(matches!(kmeans(&small, 4, 0), Err(DetectError::KTooLarge { k: 4, n: 3 })));
    }

    #[test]
    fn agglomerative_separates_blobs() {
        let (pc, truth) = blobs(2);
        let labels = agglomerative(&pc, 2, Linkage::Average).unwrap();
        assert_eq!(purity(&labels, &truth), 1.0);
        let small = PointCloud::from_rows(&[vec![0.0], vec![1.0], vec![5.0]]).unwrap();
        assert_eq!(agglomerative(&small, 3, Linkage::Average).unwrap(), vec![0, 1, 2]);
    }

    #[test]
    fn identical_rows_merge_first() {
        let pc = PointCloud::from_rows(&[vec![0.0], vec![3.0], vec![7.0], vec![3.0]]).unwrap();
        let m = dendrogram(&pc).unwrap();
        assert_eq!((m[0].a, m[0].b, m[0].height), (1, 3, 0.0));
    }

    #[test]
    fn average_linkage_matches_naive() {
        // naive O(n^3) average linkage on a small random set
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rows: Vec<Vec<f64>> = (0..25).map(|_| vec![rng.gen::<f64>(), rng.gen::<f64>()]).collect();
        let pc = PointCloud::from_rows(&rows).unwrap();
        let mut clusters: Vec<Vec<usize>> = (0..25).map(|i| vec![i]).collect();
        let mut heights = Vec::new();
        while clusters.len() > 1 {
            let mut best = (0, 0, f64::INFINITY);
            for i in 0..clusters.len() {
                for j in i + 1..clusters.len() {
                    let mut s = 0.0;
                    for &p in &clusters[i] {
                        for &q in &clusters[j] {
                            s += pc.dist(p, q);
                        }
                    }
                    let avg = s / (clusters[i].len() * clusters[j].len()) as f64;
                    if avg < best.2 {
                        best = (i, j, avg);
                    }
                }
            }
            heights.push(best.2);
            let merged = clusters.remove(best.1);
            clusters[best.0].extend(merged);
        }
        let fast: Vec<f64> = dendrogram(&pc).unwrap().iter().map(|m| m.height).collect();
        for (a, b) in heights.iter().zip(&fast) {
            assert!((a - b).abs() < 1e-5, "{heights:?} vs {fast:?}");
        }
    }
}
