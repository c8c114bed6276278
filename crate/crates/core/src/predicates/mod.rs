//! Close-to / away-from predicates for strata given as compact shapes, and
//! stratum membership decided by their conjunction.

mod shape;

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use shape::{tube_volume_exact, tube_volume_mc, Shape, VolumeEstimate};

use crate::poset::{Poset, PosetError};
use crate::stl::{Formula, FunctionRegistry};

#[derive(Debug, Error)]
pub enum PredicateError {
    #[error("dimension-mismatch: shape lives in R^{expected}, point has {got} coordinates")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("unsupported-shape: {0}")]
    UnsupportedShape(String),
    #[error("invalid-shape: {0}")]
    InvalidShape(String),
    #[error("invalid-spec: {0}")]
    InvalidSpec(String),
    #[error("unknown-stratum: {0}")]
    UnknownStratum(String),
    #[error("unbounded-shape")]
    UnboundedShape,
    #[error("invalid-argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Poset(#[from] PosetError),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// Axis-aligned box `[lo, hi]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

/// A stratum's shape with its tube radius `mu`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StratumSpec {
    pub id: String,
    pub shape: Shape,
    pub mu: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bbox: Option<BoundingBox>,
}

/// Distance from a set with bounding box `(slo, shi)` inside `b` to the box
/// boundary.
fn box_clearance(slo: &[f64], shi: &[f64], b: &BoundingBox) -> f64 {
    (0..slo.len()).map(|i| (slo[i] - b.lo[i]).min(b.hi[i] - shi[i])).fold(f64::INFINITY, f64::min)
}

impl StratumSpec {
    /// Spec whose `mu` is the reach, capped by the clearance to `bbox`.
    pub fn with_default_mu(id: impl Into<String>, shape: Shape, bbox: BoundingBox) -> Result<Self, PredicateError> {
        let (slo, shi) = shape.bounding_box();
        let reach = shape.reach().unwrap_or(f64::INFINITY);
        let mu = reach.min(box_clearance(&slo, &shi, &bbox));
        let spec = StratumSpec { id: id.into(), shape, mu, bbox: Some(bbox) };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), PredicateError> {
        let bad = |m: String| Err(PredicateError::InvalidSpec(format!("{}: {m}", self.id)));
        self.shape.validate()?;
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return bad(format!("mu must be positive, got {}", self.mu));
        }
        if let Ok(reach) = self.shape.reach() {
            if self.mu > reach + 1e-12 {
                return bad(format!("mu {} exceeds reach {reach}", self.mu));
            }
        }
        if let Some(b) = &self.bbox {
            let d = self.shape.dim();
            if b.lo.len() != d || b.hi.len() != d {
                return bad("bounding box dimension differs from the shape's".into());
            }
            let (slo, shi) = self.shape.bounding_box();
            let clearance = box_clearance(&slo, &shi, b);
            if clearance < 0.0 {
                return bad("shape leaves its bounding box".into());
            }
            if self.mu > clearance + 1e-12 {
                return bad(format!("mu {} exceeds box clearance {clearance}", self.mu));
            }
        }
        Ok(())
    }

    /// Name of the registered distance function.
    pub fn dist_id(&self) -> String {
        format!("d_{}", self.id)
    }

    pub fn register(&self, reg: &mut FunctionRegistry) {
        let shape = self.shape.clone();
        reg.register_fn(self.dist_id(), move |x| shape.dist_unchecked(x));
    }
}

/// `d(S, x) <= mu`; registers `d_<id>`.
pub fn close_to(spec: &StratumSpec, reg: &mut FunctionRegistry) -> Result<Formula, PredicateError> {
    spec.validate()?;
    spec.register(reg);
    Ok(Formula::le(spec.dist_id(), spec.mu))
}

/// `d(S, x) >= 0`; registers `d_<id>`.
pub fn away_from(spec: &StratumSpec, reg: &mut FunctionRegistry) -> Result<Formula, PredicateError> {
    spec.validate()?;
    spec.register(reg);
    Ok(Formula::ge(spec.dist_id(), 0.0))
}

/// Strata with their frontier order: `j < i` when `S_j` lies in the closure
/// of `S_i`.
#[derive(Debug, Clone)]
pub struct StratifiedFamily {
    pub strata: Vec<StratumSpec>,
    pub frontier: Poset,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct FrontierFile {
    #[serde(default)]
    covers: Vec<(String, String)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct FamilyFile {
    strata: Vec<StratumSpec>,
    frontier: FrontierFile,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub member: bool,
    pub robustness: f64,
}

impl StratifiedFamily {
    /// `covers` are `(lower, upper)` pairs of stratum ids.
    pub fn new(strata: Vec<StratumSpec>, covers: Vec<(String, String)>) -> Result<Self, PredicateError> {
        for s in &strata {
            s.validate()?;
        }
        let ids: Vec<String> = strata.iter().map(|s| s.id.clone()).collect();
        let frontier = Poset::new(ids, covers)?;
        if let Some(s) = strata.iter().find(|s| s.shape.dim() != strata[0].shape.dim()) {
            return Err(PredicateError::InvalidSpec(format!("{}: dimension differs from the family's", s.id)));
        }
        Ok(StratifiedFamily { strata, frontier })
    }

    pub fn from_json(text: &str) -> Result<Self, PredicateError> {
        let f: FamilyFile = serde_json::from_str(text)?;
        Self::new(f.strata, f.frontier.covers)
    }

    pub fn read_json<P: AsRef<Path>>(path: P) -> Result<Self, PredicateError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        let f = FamilyFile { strata: self.strata.clone(), frontier: FrontierFile { covers: self.frontier.to_data().covers } };
        serde_json::to_string_pretty(&f).expect("family serializes")
    }

    pub fn dim(&self) -> usize {
        self.strata.first().map_or(0, |s| s.shape.dim())
    }

    pub fn index_of(&self, id: &str) -> Result<usize, PredicateError> {
        self.frontier.index_of(id).map_err(|_| PredicateError::UnknownStratum(id.to_string()))
    }

    /// Indices strictly below `i` in the frontier order.
    fn below(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.strata.len()).filter(move |&j| j != i && self.frontier.leq_idx(j, i))
    }

    /// `alpha_i & (& over j < i of beta_j)`, registering every distance.
    pub fn membership_formula(&self, id: &str, reg: &mut FunctionRegistry) -> Result<Formula, PredicateError> {
        let i = self.index_of(id)?;
        let mut f = close_to(&self.strata[i], reg)?;
        for j in self.below(i) {
            f = f.and(away_from(&self.strata[j], reg)?);
        }
        Ok(f)
    }

    pub fn registry(&self) -> FunctionRegistry {
        let mut reg = FunctionRegistry::new();
        self.strata.iter().for_each(|s| s.register(&mut reg));
        reg
    }

    fn decide_idx(&self, i: usize, x: &[f64]) -> f64 {
        let s = &self.strata[i];
        self.below(i).map(|j| self.strata[j].shape.dist_unchecked(x)).fold(s.mu - s.shape.dist_unchecked(x), f64::min)
    }

    fn check_dim(&self, x: &[f64]) -> Result<(), PredicateError> {
        if x.len() != self.dim() {
            return Err(PredicateError::DimensionMismatch { expected: self.dim(), got: x.len() });
        }
        Ok(())
    }

    /// Robustness `min(mu_i - d(S_i, x), min_{j<i} d(S_j, x))`; member iff
    /// strictly positive.
    pub fn decide_stratum(&self, id: &str, x: &[f64]) -> Result<Decision, PredicateError> {
        let i = self.index_of(id)?;
        self.check_dim(x)?;
        let robustness = self.decide_idx(i, x);
        Ok(Decision { member: robustness > 0.0, robustness })
    }

    /// The stratum `x` belongs to: among strata deciding membership, one that
    /// is maximal in the frontier order, ties going to higher robustness and
    /// then to declaration order. `None` outside every tube.
    pub fn classify(&self, x: &[f64]) -> Result<Option<(String, f64)>, PredicateError> {
        self.check_dim(x)?;
        let rob: Vec<f64> = (0..self.strata.len()).map(|i| self.decide_idx(i, x)).collect();
        let members: Vec<usize> = (0..rob.len()).filter(|&i| rob[i] > 0.0).collect();
        let best = members
            .iter()
            .copied()
            .filter(|&i| !members.iter().any(|&k| k != i && self.frontier.leq_idx(i, k)))
            .fold(None, |acc: Option<usize>, i| match acc {
                Some(b) if rob[b] >= rob[i] => Some(b),
                _ => Some(i),
            });
        Ok(best.map(|i| (self.strata[i].id.clone(), rob[i])))
    }

    /// Union of the strata's tubes, boxed.
    pub fn support_box(&self) -> BoundingBox {
        let d = self.dim();
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for s in &self.strata {
            let (l, h) = s.shape.bounding_box();
            for k in 0..d {
                lo[k] = lo[k].min(l[k] - s.mu);
                hi[k] = hi[k].max(h[k] + s.mu);
            }
        }
        BoundingBox { lo, hi }
    }

    /// Checks `S_j` lies in the closure of `S_i` for each `j < i`, on
    /// `samples` points per stratum. Returns the first offending pair.
    pub fn check_frontier_axiom(&self, samples: usize) -> Result<(), (String, String, Vec<f64>)> {
        for i in 0..self.strata.len() {
            for j in self.below(i) {
                for p in self.strata[j].shape.sample_points(samples) {
                    if self.strata[i].shape.dist_unchecked(&p) > 1e-9 {
                        return Err((self.strata[j].id.clone(), self.strata[i].id.clone(), p));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Outcome of [`predicate_poset_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct PosetCheck {
    pub ok: bool,
    /// `(lower id, upper id, point)`: the point satisfies the lower stratum's
    /// close-to predicate but not the upper one's.
    pub witness: Option<(String, String, Vec<f64>)>,
    pub samples: usize,
}

/// Sample density used when none is given: points per unit volume.
pub const DEFAULT_SAMPLE_DENSITY: f64 = 1e3;

pub fn predicate_poset_check(fam: &StratifiedFamily) -> PosetCheck {
    let d = fam.dim().max(1) as f64;
    predicate_poset_check_with(fam, DEFAULT_SAMPLE_DENSITY.powf(-1.0 / d))
}

/// Grid-samples the tubes' support at `spacing` and checks that whenever
/// `j < i`, every sample satisfying `alpha_j` also satisfies `alpha_i`, so
/// the satisfaction regions are ordered like the frontier poset.
pub fn predicate_poset_check_with(fam: &StratifiedFamily, spacing: f64) -> PosetCheck {
    let pairs: Vec<(usize, usize)> = (0..fam.strata.len()).flat_map(|i| fam.below(i).map(move |j| (j, i))).collect();
    if pairs.is_empty() {
        return PosetCheck { ok: true, witness: None, samples: 0 };
    }
    let b = fam.support_box();
    let counts: Vec<usize> = b.lo.iter().zip(&b.hi).map(|(l, h)| ((h - l) / spacing).floor() as usize + 1).collect();
    let total: usize = counts.iter().product();
    let point = |mut idx: usize| -> Vec<f64> {
        (0..counts.len())
            .map(|k| {
                let i = idx % counts[k];
                idx /= counts[k];
                b.lo[k] + spacing * i as f64
            })
            .collect()
    };
    let witness = (0..total).into_par_iter().find_first(|&idx| {
        let x = point(idx);
        pairs.iter().any(|&(j, i)| {
            let (sj, si) = (&fam.strata[j], &fam.strata[i]);
            sj.shape.dist_unchecked(&x) <= sj.mu && si.shape.dist_unchecked(&x) > si.mu
        })
    });
    let witness = witness.map(|idx| {
        let x = point(idx);
        let &(j, i) = pairs
            .iter()
            .find(|&&(j, i)| {
                let (sj, si) = (&fam.strata[j], &fam.strata[i]);
                sj.shape.dist_unchecked(&x) <= sj.mu && si.shape.dist_unchecked(&x) > si.mu
            })
            .expect("witness pair");
        (fam.strata[j].id.clone(), fam.strata[i].id.clone(), x)
    });
    PosetCheck { ok: witness.is_none(), witness, samples: total }
}

/// Open unit segment with its two endpoints, mu = 0.4 throughout.
pub fn interval_with_endpoints() -> StratifiedFamily {
    let bbox = BoundingBox { lo: vec![-0.4, -0.4], hi: vec![1.4, 0.4] };
    let spec = |id: &str, shape: Shape| StratumSpec { id: id.into(), shape, mu: 0.4, bbox: Some(bbox.clone()) };
    StratifiedFamily::new(
        vec![
            spec("a", Shape::point(&[0.0, 0.0])),
            spec("b", Shape::point(&[1.0, 0.0])),
            spec("ab", Shape::segment(&[0.0, 0.0], &[1.0, 0.0])),
        ],
        vec![("a".into(), "ab".into()), ("b".into(), "ab".into())],
    )
    .expect("valid family")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stl::robustness;
    use crate::trace::Trace;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn one_sample(x: &[f64]) -> Trace {
        Trace::uniform(0.0, 1.0, vec![x.to_vec()]).unwrap()
    }

    #[test]
    fn close_and_away_robustness() {
        let spec = StratumSpec { id: "c".into(), shape: Shape::circle(&[0.0, 0.0], 1.0), mu: 1.0, bbox: None };
        let mut reg = FunctionRegistry::new();
        let alpha = close_to(&spec, &mut reg).unwrap();
        let beta = away_from(&spec, &mut reg).unwrap();
        assert_eq!(alpha.to_string(), "d_c <= 1");
        assert_eq!(robustness(&alpha, &one_sample(&[0.0, 0.0]), 0, &reg).unwrap(), 0.0);
        assert_eq!(robustness(&alpha, &one_sample(&[1.0, 0.0]), 0, &reg).unwrap(), 1.0);
        assert_eq!(robustness(&alpha, &one_sample(&[2.0, 0.0]), 0, &reg).unwrap(), 0.0);
        assert!((robustness(&beta, &one_sample(&[0.0, 1.7]), 0, &reg).unwrap() - 0.7).abs() < 1e-15);

        let seg = StratumSpec { id: "s".into(), shape: Shape::segment(&[0.0, 0.0], &[1.0, 0.0]), mu: 0.3, bbox: None };
        let mut reg = FunctionRegistry::new();
        let alpha = close_to(&seg, &mut reg).unwrap();
        let beta = away_from(&seg, &mut reg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            let x = [rng.gen_range(-1.0..2.0), rng.gen_range(-1.0..1.0)];
            let d = seg.shape.dist(&x).unwrap();
            let b = robustness(&beta, &one_sample(&x), 0, &reg).unwrap();
            assert_eq!(b, d);
            if d <= seg.mu {
                let a = robustness(&alpha, &one_sample(&x), 0, &reg).unwrap();
                assert!((a + b - seg.mu).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn spec_validation() {
        let circle = Shape::circle(&[0.0, 0.0], 1.0);
        let too_big = StratumSpec { id: "c".into(), shape: circle.clone(), mu: 1.5, bbox: None };
        assert!(matches!(too_big.validate(), Err(PredicateError::InvalidSpec(_))));
        let b = BoundingBox { lo: vec![-3.0, -3.0], hi: vec![3.0, 2.5] };
        let s = StratumSpec::with_default_mu("c", circle, b.clone()).unwrap();
        assert_eq!(s.mu, 1.0);
        let s = StratumSpec::with_default_mu("s", Shape::segment(&[0.0, 0.0], &[1.0, 0.0]), b).unwrap();
        assert_eq!(s.mu, 2.0);
        let outside = StratumSpec {
            id: "p".into(),
            shape: Shape::point(&[5.0, 0.0]),
            mu: 0.1,
            bbox: Some(BoundingBox { lo: vec![0.0, 0.0], hi: vec![1.0, 1.0] }),
        };
        assert!(outside.validate().is_err());
    }

    #[test]
    fn decisions_on_the_interval() {
        let fam = interval_with_endpoints();
        let mid = fam.decide_stratum("ab", &[0.5, 0.0]).unwrap();
        assert!(mid.member);
        assert!((mid.robustness - 0.4).abs() < 1e-15);
        let at_a = fam.decide_stratum("ab", &[0.0, 0.0]).unwrap();
        assert_eq!(at_a, Decision { member: false, robustness: 0.0 });
        assert!(fam.decide_stratum("a", &[0.0, 0.0]).unwrap().member);
        let far = [5.0, 5.0];
        for id in ["a", "b", "ab"] {
            let d = fam.decide_stratum(id, &far).unwrap();
            assert!(!d.member && d.robustness < 0.0);
        }
        assert_eq!(fam.classify(&far).unwrap(), None);
        assert!(matches!(fam.decide_stratum("zz", &far), Err(PredicateError::UnknownStratum(_))));
    }

    #[test]
    fn decision_matches_stl_formula() {
        let fam = interval_with_endpoints();
        let mut reg = FunctionRegistry::new();
        let f = fam.membership_formula("ab", &mut reg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..200 {
            let x = [rng.gen_range(-0.5..1.5), rng.gen_range(-0.5..0.5)];
            let via_stl = robustness(&f, &one_sample(&x), 0, &reg).unwrap();
            assert_eq!(via_stl, fam.decide_stratum("ab", &x).unwrap().robustness);
        }
    }

    #[test]
    fn points_of_each_stratum_are_classified_to_it() {
        let fam = interval_with_endpoints();
        assert_eq!(fam.classify(&[0.0, 0.0]).unwrap().unwrap().0, "a");
        assert_eq!(fam.classify(&[1.0, 0.0]).unwrap().unwrap().0, "b");
        for k in 1..1000 {
            let x = [k as f64 / 1000.0, 0.0];
            assert_eq!(fam.classify(&x).unwrap().unwrap().0, "ab", "{x:?}");
        }
    }

    #[test]
    fn poset_checks() {
        let fam = interval_with_endpoints();
        let check = predicate_poset_check_with(&fam, 1e-3);
        assert!(check.ok, "{check:?}");
        assert!(check.samples > 1_000_000);
        assert!(predicate_poset_check(&fam).ok);
        assert!(fam.check_frontier_axiom(100).is_ok());

        let single = StratifiedFamily::new(vec![fam.strata[2].clone()], vec![]).unwrap();
        assert!(predicate_poset_check(&single).ok);

        let far = StratumSpec { id: "far".into(), shape: Shape::point(&[10.0, 10.0]), mu: 0.4, bbox: None };
        let bad = StratifiedFamily::new(vec![far, fam.strata[2].clone()], vec![("far".into(), "ab".into())]).unwrap();
        let check = predicate_poset_check(&bad);
        assert!(!check.ok);
        let (lo, hi, x) = check.witness.unwrap();
        assert_eq!((lo.as_str(), hi.as_str()), ("far", "ab"));
        assert!(bad.strata[0].shape.dist(&x).unwrap() <= 0.4);
        assert!(bad.check_frontier_axiom(10).is_err());
    }

    #[test]
    fn family_json_roundtrip() {
        let fam = interval_with_endpoints();
        let back = StratifiedFamily::from_json(&fam.to_json()).unwrap();
        assert_eq!(back.strata, fam.strata);
        assert_eq!(back.frontier.to_data().covers, fam.frontier.to_data().covers);
        let text = r#"{"strata":[{"id":"c","shape":{"kind":"circle","center":[0,0],"radius":1},"mu":0.5}],
                       "frontier":{"covers":[]}}"#;
        assert_eq!(StratifiedFamily::from_json(text).unwrap().strata.len(), 1);
    }
}
