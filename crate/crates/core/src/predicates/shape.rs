//! Compact shapes with exact Euclidean distance, analytic reach and tube
//! volumes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::PredicateError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Shape {
    Point { at: Vec<f64> },
    Segment { a: Vec<f64>, b: Vec<f64> },
    /// Closed ball.
    Disk { center: Vec<f64>, radius: f64 },
    /// Sphere (the circle in the plane).
    Circle { center: Vec<f64>, radius: f64 },
    /// Closed axis-aligned box.
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Union { members: Vec<Shape> },
}

fn norm(v: impl Iterator<Item = f64>) -> f64 {
    v.map(|d| d * d).sum::<f64>().sqrt()
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    norm(a.iter().zip(b).map(|(x, y)| x - y))
}

impl Shape {
    pub fn point(at: &[f64]) -> Self {
        Shape::Point { at: at.to_vec() }
    }

    pub fn segment(a: &[f64], b: &[f64]) -> Self {
        Shape::Segment { a: a.to_vec(), b: b.to_vec() }
    }

    pub fn disk(center: &[f64], radius: f64) -> Self {
        Shape::Disk { center: center.to_vec(), radius }
    }

    pub fn circle(center: &[f64], radius: f64) -> Self {
        Shape::Circle { center: center.to_vec(), radius }
    }

    pub fn boxed(lo: &[f64], hi: &[f64]) -> Self {
        Shape::Box { lo: lo.to_vec(), hi: hi.to_vec() }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Shape::Point { .. } => "point",
            Shape::Segment { .. } => "segment",
            Shape::Disk { .. } => "disk",
            Shape::Circle { .. } => "circle",
            Shape::Box { .. } => "box",
            Shape::Union { .. } => "union",
        }
    }

    /// Ambient dimension. For a union, that of its first member.
    pub fn dim(&self) -> usize {
        match self {
            Shape::Point { at } => at.len(),
            Shape::Segment { a, .. } => a.len(),
            Shape::Disk { center, .. } | Shape::Circle { center, .. } => center.len(),
            Shape::Box { lo, .. } => lo.len(),
            Shape::Union { members } => members.first().map_or(0, Shape::dim),
        }
    }

    pub fn validate(&self) -> Result<(), PredicateError> {
        let bad = |msg: String| Err(PredicateError::InvalidShape(msg));
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        match self {
            Shape::Point { at } if at.is_empty() || !finite(at) => bad("point needs finite coordinates".into()),
            Shape::Segment { a, b } if a.is_empty() || a.len() != b.len() || !finite(a) || !finite(b) => {
                bad("segment endpoints must be finite and of equal dimension".into())
            }
            Shape::Disk { center, radius } | Shape::Circle { center, radius }
                if center.is_empty() || !finite(center) || !(*radius > 0.0 && radius.is_finite()) =>
            {
                bad(format!("{} needs a finite center and positive radius", self.kind()))
            }
            Shape::Box { lo, hi }
                if lo.is_empty() || lo.len() != hi.len() || !finite(lo) || !finite(hi) || lo.iter().zip(hi).any(|(l, h)| l >= h) =>
            {
                bad("box needs lo < hi in every coordinate".into())
            }
            Shape::Union { members } => {
                if members.is_empty() {
                    return bad("empty union".into());
                }
                let d = members[0].dim();
                for m in members {
                    m.validate()?;
                    if m.dim() != d {
                        return bad("union members differ in dimension".into());
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Euclidean distance from `x` to the shape.
    pub fn dist(&self, x: &[f64]) -> Result<f64, PredicateError> {
        if x.len() != self.dim() {
            return Err(PredicateError::DimensionMismatch { expected: self.dim(), got: x.len() });
        }
        Ok(self.dist_unchecked(x))
    }

    pub(crate) fn dist_unchecked(&self, x: &[f64]) -> f64 {
        match self {
            Shape::Point { at } => euclid(at, x),
            Shape::Segment { a, b } => {
                let ab: Vec<f64> = a.iter().zip(b).map(|(p, q)| q - p).collect();
                let len2: f64 = ab.iter().map(|d| d * d).sum();
                let t = if len2 > 0.0 {
                    (ab.iter().zip(x.iter().zip(a)).map(|(d, (xi, ai))| d * (xi - ai)).sum::<f64>() / len2).clamp(0.0, 1.0)
                } else {
                    0.0
                };
                norm(x.iter().zip(a.iter().zip(&ab)).map(|(xi, (ai, d))| xi - (ai + t * d)))
            }
            Shape::Disk { center, radius } => (euclid(center, x) - radius).max(0.0),
            Shape::Circle { center, radius } => (euclid(center, x) - radius).abs(),
            Shape::Box { lo, hi } => norm(x.iter().zip(lo.iter().zip(hi)).map(|(v, (l, h))| (l - v).max(v - h).max(0.0))),
            Shape::Union { members } => members.iter().map(|m| m.dist_unchecked(x)).fold(f64::INFINITY, f64::min),
        }
    }

    /// Squared distance, the rug function of the shape.
    pub fn rug(&self, x: &[f64]) -> Result<f64, PredicateError> {
        self.dist(x).map(|d| d * d)
    }

    /// First critical value of the squared distance. Convex shapes have
    /// infinite reach; a circle's is its radius.
    pub fn reach(&self) -> Result<f64, PredicateError> {
        match self {
            Shape::Circle { radius, .. } => Ok(*radius),
            Shape::Union { .. } => Err(PredicateError::UnsupportedShape("reach of a union".into())),
            _ => Ok(f64::INFINITY),
        }
    }

    /// Axis-aligned bounding box `(lo, hi)`.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            Shape::Point { at } => (at.clone(), at.clone()),
            Shape::Segment { a, b } => {
                (a.iter().zip(b).map(|(p, q)| p.min(*q)).collect(), a.iter().zip(b).map(|(p, q)| p.max(*q)).collect())
            }
            Shape::Disk { center, radius } | Shape::Circle { center, radius } => {
                (center.iter().map(|c| c - radius).collect(), center.iter().map(|c| c + radius).collect())
            }
            Shape::Box { lo, hi } => (lo.clone(), hi.clone()),
            Shape::Union { members } => {
                let (mut lo, mut hi) = members[0].bounding_box();
                for m in &members[1..] {
                    let (l, h) = m.bounding_box();
                    lo.iter_mut().zip(&l).for_each(|(a, b)| *a = a.min(*b));
                    hi.iter_mut().zip(&h).for_each(|(a, b)| *a = a.max(*b));
                }
                (lo, hi)
            }
        }
    }

    /// Roughly `k` points lying on the shape, deterministic.
    pub fn sample_points(&self, k: usize) -> Vec<Vec<f64>> {
        let k = k.max(2);
        let lerp = |t: f64, a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| p + t * (q - p)).collect::<Vec<f64>>();
        match self {
            Shape::Point { at } => vec![at.clone()],
            Shape::Segment { a, b } => (0..k).map(|i| lerp(i as f64 / (k - 1) as f64, a, b)).collect(),
            Shape::Circle { center, radius } | Shape::Disk { center, radius } => {
                let rings: Vec<f64> = if matches!(self, Shape::Circle { .. }) {
                    vec![*radius]
                } else {
                    let m = (k as f64).sqrt().ceil() as usize;
                    (0..=m).map(|i| radius * i as f64 / m as f64).collect()
                };
                let per = (k / rings.len()).max(4);
                let mut out = Vec::new();
                for r in rings {
                    for i in 0..per {
                        let th = std::f64::consts::TAU * i as f64 / per as f64;
                        let mut p = center.clone();
                        p[0] += r * th.cos();
                        if p.len() > 1 {
                            p[1] += r * th.sin();
                        }
                        out.push(p);
                    }
                }
                out
            }
            Shape::Box { lo, hi } => {
                let d = lo.len();
                let m = ((k as f64).powf(1.0 / d as f64).ceil() as usize).max(2);
                let total = m.pow(d as u32);
                (0..total)
                    .map(|mut idx| {
                        (0..d)
                            .map(|j| {
                                let i = idx % m;
                                idx /= m;
                                lo[j] + (hi[j] - lo[j]) * i as f64 / (m - 1) as f64
                            })
                            .collect()
                    })
                    .collect()
            }
            Shape::Union { members } => members.iter().flat_map(|s| s.sample_points(k / members.len())).collect(),
        }
    }
}

/// Area of the radius-`r` tube around a planar segment of length `len`.
pub fn tube_volume_exact(len: f64, r: f64) -> f64 {
    2.0 * r * len + std::f64::consts::PI * r * r
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VolumeEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub samples: usize,
    pub hits: usize,
}

const MC_BATCH: usize = 1 << 16;

/// Rejection-sampling estimate of the volume of `{x : d(S, x) <= r}`.
/// Batches draw from per-batch ChaCha streams of `seed`, so the result does
/// not depend on the thread count.
pub fn tube_volume_mc(shape: &Shape, r: f64, n: usize, seed: u64) -> Result<VolumeEstimate, PredicateError> {
    shape.validate()?;
    if !(r > 0.0 && r.is_finite()) || n == 0 {
        return Err(PredicateError::InvalidArgument(format!("need r > 0 and n >= 1, got r = {r}, n = {n}")));
    }
    let (mut lo, mut hi) = shape.bounding_box();
    lo.iter_mut().for_each(|v| *v -= r);
    hi.iter_mut().for_each(|v| *v += r);
    if lo.iter().chain(&hi).any(|v| !v.is_finite()) {
        return Err(PredicateError::UnboundedShape);
    }
    let box_vol: f64 = lo.iter().zip(&hi).map(|(l, h)| h - l).product();
    let batches = n.div_ceil(MC_BATCH);
    let hits: usize = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b as u64);
            let count = MC_BATCH.min(n - b * MC_BATCH);
            let mut x = vec![0.0; lo.len()];
            (0..count)
                .filter(|_| {
                    x.iter_mut().zip(lo.iter().zip(&hi)).for_each(|(v, (l, h))| *v = rng.gen_range(*l..*h));
                    shape.dist_unchecked(&x) <= r
                })
                .count()
        })
        .sum();
    let p = hits as f64 / n as f64;
    let std_error = box_vol * (p * (1.0 - p) / n as f64).sqrt();
    Ok(VolumeEstimate { estimate: box_vol * p, std_error, samples: n, hits })
}
