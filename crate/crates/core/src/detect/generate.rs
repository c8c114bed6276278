//! Synthetic stratified spaces with ground-truth strata and probe points.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::cloud::{LabeledCloud, PointCloud};
use super::DetectError;

/// Share of room-corridor samples drawn from the room.
pub const ROOM_SHARE: f64 = 0.6;
/// Hourglass points within this distance of the junction form the neck.
pub const NECK_RADIUS: f64 = 0.1;
/// Room-corridor points within this distance of the junction are labelled
/// `junction`.
pub const JUNCTION_RADIUS: f64 = 0.1;

fn check_n(n: usize) -> Result<(), DetectError> {
    if n < 10 {
        return Err(DetectError::BadParameters(format!("need n >= 10, got {n}")));
    }
    Ok(())
}

struct Builder {
    rows: Vec<Vec<f64>>,
    labels: Vec<String>,
    dims: Vec<u8>,
    probes: Vec<(String, usize)>,
    intrinsic: Vec<f64>,
}

impl Builder {
    fn new() -> Self {
        Builder { rows: Vec::new(), labels: Vec::new(), dims: Vec::new(), probes: Vec::new(), intrinsic: Vec::new() }
    }

    fn push(&mut self, p: Vec<f64>, label: &str, dim: u8) {
        self.rows.push(p);
        self.labels.push(label.to_string());
        self.dims.push(dim);
    }

    fn probe(&mut self, name: &str, p: Vec<f64>, label: &str, dim: u8) {
        self.probes.push((name.to_string(), self.rows.len()));
        self.push(p, label, dim);
    }

    fn finish(self) -> LabeledCloud {
        LabeledCloud {
            cloud: PointCloud::from_rows(&self.rows).expect("generated points are finite"),
            labels: self.labels,
            dims: self.dims,
            probes: self.probes,
            intrinsic: self.intrinsic,
        }
    }
}

/// Uniform on the unit square.
pub fn gen_square(n: usize, seed: u64) -> Result<LabeledCloud, DetectError> {
    check_n(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = Builder::new();
    for _ in 0..n {
        b.push(vec![rng.gen(), rng.gen()], "square", 2);
    }
    Ok(b.finish())
}

/// Uniform on the unit circle; the intrinsic coordinate is the angle.
pub fn gen_circle(n: usize, seed: u64) -> Result<LabeledCloud, DetectError> {
    check_n(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = Builder::new();
    for _ in 0..n {
        let th = rng.gen_range(0.0..2.0 * PI);
        b.push(vec![th.cos(), th.sin()], "circle", 1);
        b.intrinsic.push(th);
    }
    Ok(b.finish())
}

/// Uniform in the radius-`r` tube around the segment `(0,0)-(len,0)`; with
/// `r = 0`, uniform on the segment itself. The intrinsic coordinate is the
/// first coordinate.
pub fn gen_segment_tube(n: usize, len: f64, r: f64, seed: u64) -> Result<LabeledCloud, DetectError> {
    check_n(n)?;
    if !(len > 0.0 && r >= 0.0 && len.is_finite() && r.is_finite()) {
        return Err(DetectError::BadParameters(format!("need len > 0 and r >= 0, got len = {len}, r = {r}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = Builder::new();
    while b.rows.len() < n {
        if r == 0.0 {
            let x = rng.gen_range(0.0..len);
            b.push(vec![x, 0.0], "segment", 1);
            b.intrinsic.push(x);
            continue;
        }
        let x = rng.gen_range(-r..len + r);
        let y = rng.gen_range(-r..r);
        let d = if x < 0.0 { x.hypot(y) } else if x > len { (x - len).hypot(y) } else { y.abs() };
        if d <= r {
            b.push(vec![x, y], "tube", 2);
            b.intrinsic.push(x);
        }
    }
    Ok(b.finish())
}

/// Two filled triangles `(0,0),(-1,1),(-1,-1)` and `(0,0),(1,1),(1,-1)`
/// meeting at the origin. Probes `neck` (the origin), `left` and `right`
/// (the lobe centroids) are the first rows.
pub fn gen_hourglass(n: usize, seed: u64) -> Result<LabeledCloud, DetectError> {
    check_n(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = Builder::new();
    b.probe("neck", vec![0.0, 0.0], "neck", 0);
    b.probe("left", vec![-2.0 / 3.0, 0.0], "left", 2);
    b.probe("right", vec![2.0 / 3.0, 0.0], "right", 2);
    while b.rows.len() < n {
        // uniform in the square [-1,1]^2, kept inside the bow tie |y| <= |x|
        let x: f64 = rng.gen_range(-1.0..1.0);
        let y: f64 = rng.gen_range(-1.0..1.0);
        if y.abs() > x.abs() {
            continue;
        }
        let label = if x.hypot(y) <= NECK_RADIUS {
            "neck"
        } else if x < 0.0 {
            "left"
        } else {
            "right"
        };
        b.push(vec![x, y], label, 2);
    }
    Ok(b.finish())
}

/// Corridor centerline `y = 1 + 0.5 sin(3 pi x)` for `x` in `[2, 6]`.
pub fn corridor_y(x: f64) -> f64 {
    1.0 + 0.5 * (3.0 * PI * x).sin()
}

/// Room `[0,2]^2` joined at `a = (2,1)` to the corridor curve. Probes come
/// first: `a` (junction), `b = (1,1)` (room center), `c = (2.5, 0.5)` (the
/// corridor minimum nearest the room). Non-probe points get Gaussian jitter
/// of standard deviation `noise`.
pub fn gen_room_corridor(n: usize, noise: f64, seed: u64) -> Result<LabeledCloud, DetectError> {
    check_n(n)?;
    if !(noise >= 0.0 && noise.is_finite()) {
        return Err(DetectError::BadParameters(format!("noise must be >= 0, got {noise}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let jitter = Normal::new(0.0, noise.max(f64::MIN_POSITIVE)).expect("valid sigma");
    let mut b = Builder::new();
    b.probe("a", vec![2.0, 1.0], "junction", 0);
    b.probe("b", vec![1.0, 1.0], "room", 2);
    b.probe("c", vec![2.5, corridor_y(2.5)], "corridor", 1);
    // arc-length table for uniform sampling along the curve
    let steps = 20_000;
    let xs: Vec<f64> = (0..=steps).map(|i| 2.0 + 4.0 * i as f64 / steps as f64).collect();
    let mut arc = vec![0.0; xs.len()];
    for i in 1..xs.len() {
        arc[i] = arc[i - 1] + (xs[i] - xs[i - 1]).hypot(corridor_y(xs[i]) - corridor_y(xs[i - 1]));
    }
    let total = arc[steps];
    let remaining = n - b.rows.len();
    let room_n = (remaining as f64 * ROOM_SHARE).round() as usize;
    for k in 0..remaining {
        let mut p = if k < room_n {
            vec![rng.gen_range(0.0..2.0), rng.gen_range(0.0..2.0)]
        } else {
            let s = rng.gen_range(0.0..total);
            let i = arc.partition_point(|&a| a < s).clamp(1, steps);
            let w = (s - arc[i - 1]) / (arc[i] - arc[i - 1]);
            let x = xs[i - 1] + w * (xs[i] - xs[i - 1]);
            vec![x, corridor_y(x)]
        };
        if noise > 0.0 {
            p.iter_mut().for_each(|v| *v += jitter.sample(&mut rng));
        }
        let near_a = (p[0] - 2.0).hypot(p[1] - 1.0) <= JUNCTION_RADIUS;
        let (label, dim) = match (near_a, k < room_n) {
            (true, _) => ("junction", 0),
            (false, true) => ("room", 2),
            (false, false) => ("corridor", 1),
        };
        b.push(p, label, dim);
    }
    Ok(b.finish())
}

/// Half cylinder `(cos t, sin t, z)`, `t` in `[0, pi]`, `z` in `[0, height]`.
/// The intrinsic coordinate is the arc length `t`.
pub fn gen_half_cylinder(n: usize, height: f64, seed: u64) -> Result<LabeledCloud, DetectError> {
    check_n(n)?;
    if !(height > 0.0) {
        return Err(DetectError::BadParameters(format!("height must be positive, got {height}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = Builder::new();
    for _ in 0..n {
        let t = rng.gen_range(0.0..PI);
        let z = rng.gen_range(0.0..height);
        b.push(vec![t.cos(), t.sin(), z], "strip", 2);
        b.intrinsic.push(t);
    }
    Ok(b.finish())
}

/// Uniform on a segment of length 5 in R^3; intrinsic coordinate is arc
/// length.
pub fn gen_line3d(n: usize, seed: u64) -> Result<LabeledCloud, DetectError> {
    check_n(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dir = [2.0 / 3.0, -2.0 / 3.0, 1.0 / 3.0];
    let mut b = Builder::new();
    for _ in 0..n {
        let t = rng.gen_range(0.0..5.0);
        b.push(dir.iter().map(|d| 0.5 + d * t).collect(), "line", 1);
        b.intrinsic.push(t);
    }
    Ok(b.finish())
}

/// Names accepted by [`generate`].
pub const GENERATORS: [&str; 8] =
    ["room-corridor", "hourglass", "segment", "segment-tube", "circle", "square", "half-cylinder", "line3d"];

/// Dispatch by name with default shape parameters.
pub fn generate(name: &str, n: usize, seed: u64) -> Result<LabeledCloud, DetectError> {
    match name {
        "room-corridor" => gen_room_corridor(n, DEFAULT_NOISE, seed),
        "hourglass" => gen_hourglass(n, seed),
        "segment" => gen_segment_tube(n, 1.0, 0.0, seed),
        "segment-tube" => gen_segment_tube(n, 1.0, 0.25, seed),
        "circle" => gen_circle(n, seed),
        "square" => gen_square(n, seed),
        "half-cylinder" => gen_half_cylinder(n, 1.0, seed),
        "line3d" => gen_line3d(n, seed),
        _ => Err(DetectError::BadParameters(format!("unknown generator `{name}`"))),
    }
}

/// Jitter used by [`generate`] for the room-corridor space.
pub const DEFAULT_NOISE: f64 = 0.0;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes_labels_and_probes() {
        let sq = gen_square(100, 1).unwrap();
        assert_eq!(sq.cloud.len(), 100);
        assert!(sq.dims.iter().all(|&d| d == 2));
        let rc = gen_room_corridor(500, 0.0, 1).unwrap();
        assert_eq!(rc.cloud.len(), 500);
        assert_eq!(rc.cloud.point(rc.probe("c").unwrap()), &[2.5, 0.5]);
        assert!(rc.labels.iter().any(|l| l == "corridor") && rc.labels.iter().any(|l| l == "room"));
        let hg = gen_hourglass(400, 2).unwrap();
        assert!(hg.cloud.points().all(|p| p[1].abs() <= p[0].abs()));
        assert!(hg.labels.iter().filter(|l| *l == "neck").count() >= 1);
        assert!(gen_square(5, 0).is_err());
    }

    #[test]
    fn corridor_points_lie_on_the_curve() {
        let rc = gen_room_corridor(300, 0.0, 4).unwrap();
        for (p, l) in rc.cloud.points().zip(&rc.labels) {
            if l == "corridor" {
                assert!((p[1] - corridor_y(p[0])).abs() < 1e-9);
            } else if l == "room" {
                assert!((0.0..=2.0).contains(&p[0]) && (0.0..=2.0).contains(&p[1]));
            }
        }
    }

    #[test]
    fn generators_are_seeded() {
        for name in GENERATORS {
            let a = generate(name, 50, 9).unwrap();
            let b = generate(name, 50, 9).unwrap();
            assert_eq!(a.cloud, b.cloud);
            assert_ne!(generate(name, 50, 10).unwrap().cloud, a.cloud);
        }
    }
}
