//! Space-time coin collection game under the light-cone order.
//!
//! `(t, y) <= (t', y')` iff `t <= t'` and `|y' - y| <= t' - t`. In the
//! light-cone coordinates `u = t + y`, `v = t - y` this is the product order,
//! so joins are componentwise maxima and every nonempty intersection of
//! future cones is again a future cone.

use std::collections::BTreeSet;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::SpacesError;
use crate::poset::{MonotoneMap, Poset};

/// Coordinate slack for cone membership and apex comparisons.
pub const CONE_EPS: f64 = 1e-9;

/// Label of the implicit start point `S = (0, 0)`.
pub const START_LABEL: &str = "S";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpaceTimePoint {
    pub t: f64,
    pub y: f64,
}

impl SpaceTimePoint {
    pub const START: SpaceTimePoint = SpaceTimePoint { t: 0.0, y: 0.0 };

    pub fn new(t: f64, y: f64) -> Self {
        SpaceTimePoint { t, y }
    }

    fn uv(self) -> (f64, f64) {
        (self.t + self.y, self.t - self.y)
    }

    fn from_uv(u: f64, v: f64) -> Self {
        SpaceTimePoint { t: 0.5 * (u + v), y: 0.5 * (u - v) }
    }

    /// Inside the reachable cone of the start point.
    pub fn in_start_cone(self) -> bool {
        lightcone_leq(Self::START, self)
    }
}

/// `p <= q` in the light-cone order (closed cones, `CONE_EPS` slack).
pub fn lightcone_leq(p: SpaceTimePoint, q: SpaceTimePoint) -> bool {
    let dt = q.t - p.t;
    dt >= -CONE_EPS && (q.y - p.y).abs() <= dt + CONE_EPS
}

/// Least common upper bound of two points.
pub fn cone_join(p: SpaceTimePoint, q: SpaceTimePoint) -> SpaceTimePoint {
    if lightcone_leq(p, q) {
        return q;
    }
    if lightcone_leq(q, p) {
        return p;
    }
    let (pu, pv) = p.uv();
    let (qu, qv) = q.uv();
    SpaceTimePoint::from_uv(pu.max(qu), pv.max(qv))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coin {
    pub label: String,
    pub t: f64,
    pub y: f64,
}

impl Coin {
    pub fn point(&self) -> SpaceTimePoint {
        SpaceTimePoint::new(self.t, self.y)
    }
}

/// Coins plus the time horizon that bounds the playing field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoinConfig {
    pub coins: Vec<Coin>,
    pub horizon: f64,
}

/// Enumerating label subsets is exponential; cap the number of coins.
pub const MAX_COINS: usize = 12;

const DEFAULT5_JSON: &str = include_str!("../../data/default5.json");

impl CoinConfig {
    pub fn new(coins: Vec<Coin>, horizon: f64) -> Result<Self, SpacesError> {
        let cfg = CoinConfig { coins, horizon };
        cfg.validate()?;
        Ok(cfg)
    }

    /// The frozen five-coin configuration shipped in `data/default5.json`
    /// (found by `examples/coin_config_search.rs`).
    pub fn default5() -> Self {
        serde_json::from_str(DEFAULT5_JSON).expect("bundled config parses")
    }

    pub fn from_json(text: &str) -> Result<Self, SpacesError> {
        let cfg: CoinConfig =
            serde_json::from_str(text).map_err(|e| SpacesError::ConfigInvalid(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn read_json<P: AsRef<Path>>(path: P) -> Result<Self, SpacesError> {
        let text = std::fs::read_to_string(path).map_err(|e| SpacesError::ConfigInvalid(e.to_string()))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), SpacesError> {
        let bad = |m: String| Err(SpacesError::ConfigInvalid(m));
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return bad(format!("horizon {} must be positive", self.horizon));
        }
        if self.coins.len() > MAX_COINS {
            return bad(format!("{} coins exceeds the limit of {MAX_COINS}", self.coins.len()));
        }
        let mut seen = BTreeSet::new();
        for c in &self.coins {
            if c.label == START_LABEL || c.label.is_empty() || c.label.contains([',', '{', '}']) {
                return bad(format!("coin label {:?} is reserved or malformed", c.label));
            }
            if !seen.insert(c.label.as_str()) {
                return bad(format!("duplicate coin label {}", c.label));
            }
            if !(c.t.is_finite() && c.y.is_finite()) {
                return bad(format!("coin {} has non-finite coordinates", c.label));
            }
            if !(c.t > 0.0 && c.t < self.horizon) {
                return bad(format!("coin {} time {} outside (0, {})", c.label, c.t, self.horizon));
            }
            if !c.point().in_start_cone() {
                return bad(format!("coin {} lies outside the start cone", c.label));
            }
        }
        Ok(())
    }

    pub fn labels(&self) -> Vec<&str> {
        self.coins.iter().map(|c| c.label.as_str()).collect()
    }

    /// Bitmask of coins below `p`.
    pub fn below_mask(&self, p: SpaceTimePoint) -> u32 {
        self.coins
            .iter()
            .enumerate()
            .filter(|(_, c)| lightcone_leq(c.point(), p))
            .fold(0, |m, (i, _)| m | 1 << i)
    }

    /// Iterated join of the start point and the masked coins.
    pub fn apex(&self, mask: u32) -> SpaceTimePoint {
        self.coins
            .iter()
            .enumerate()
            .filter(|&(i, _)| mask >> i & 1 == 1)
            .fold(SpaceTimePoint::START, |acc, (_, c)| cone_join(acc, c.point()))
    }

    /// Name of a label set, always including the start: `{S,A,C}`.
    pub fn label_name(&self, mask: u32) -> String {
        let mut parts = vec![START_LABEL];
        parts.extend(self.coins.iter().enumerate().filter(|&(i, _)| mask >> i & 1 == 1).map(|(_, c)| c.label.as_str()));
        format!("{{{}}}", parts.join(","))
    }

    /// Coins that can all be collected by one speed-limited trajectory form a
    /// chain; this returns the longest chain length.
    pub fn max_jointly_collectible(&self) -> usize {
        let n = self.coins.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| self.coins[a].t.total_cmp(&self.coins[b].t));
        let mut best = vec![1usize; n];
        for (k, &i) in order.iter().enumerate() {
            for &j in &order[..k] {
                if lightcone_leq(self.coins[j].point(), self.coins[i].point()) {
                    best[i] = best[i].max(best[j] + 1);
                }
            }
        }
        best.into_iter().max().unwrap_or(0)
    }

    /// Collection poset: coins under the light-cone order (the opposite of
    /// inclusion of their future cones).
    pub fn collection_poset(&self) -> Poset {
        let names = self.coins.iter().map(|c| c.label.clone()).collect();
        Poset::from_order(names, |i, j| lightcone_leq(self.coins[i].point(), self.coins[j].point()))
            .expect("light-cone order on distinct coins is a partial order")
    }
}

/// Overlap poset with the apex (join point) of each element.
#[derive(Debug, Clone)]
pub struct OverlapPoset {
    pub poset: Poset,
    /// Coin bitmask per poset element (start always implied).
    pub masks: Vec<u32>,
    pub apexes: Vec<SpaceTimePoint>,
}

impl OverlapPoset {
    fn from_masks(cfg: &CoinConfig, mut masks: Vec<u32>) -> Self {
        masks.sort_by_key(|m| (m.count_ones(), *m));
        masks.dedup();
        let names = masks.iter().map(|&m| cfg.label_name(m)).collect();
        let poset = Poset::from_order(names, |i, j| masks[i] & masks[j] == masks[i])
            .expect("subset inclusion is a partial order");
        let apexes = masks.iter().map(|&m| cfg.apex(m)).collect();
        OverlapPoset { poset, masks, apexes }
    }

    pub fn len(&self) -> usize {
        self.masks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masks.is_empty()
    }

    pub fn element_names(&self) -> BTreeSet<String> {
        self.poset.elements().iter().cloned().collect()
    }

    pub fn position(&self, mask: u32) -> Option<usize> {
        self.masks.iter().position(|&m| m == mask)
    }
}

/// Label subsets whose future-cone intersection is nonempty within the
/// horizon and strictly shrinks when any further coin is added.
pub fn overlap_poset(cfg: &CoinConfig) -> Result<OverlapPoset, SpacesError> {
    cfg.validate()?;
    let n = cfg.coins.len();
    let masks = (0u32..1 << n)
        .filter(|&mask| {
            let apex = cfg.apex(mask);
            // a strict superset with the same cone exists iff some other coin
            // already lies below the apex
            apex.t <= cfg.horizon + CONE_EPS && cfg.below_mask(apex) == mask
        })
        .collect();
    Ok(OverlapPoset::from_masks(cfg, masks))
}

/// Smallest gap between distinct light-cone coordinates of the start and the
/// coins; the brute-force grid must resolve it.
pub fn coin_spacing(cfg: &CoinConfig) -> f64 {
    let gap = |mut vals: Vec<f64>| {
        vals.sort_by(f64::total_cmp);
        vals.dedup_by(|a, b| (*a - *b).abs() <= CONE_EPS);
        vals.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
    };
    let pts: Vec<SpaceTimePoint> =
        std::iter::once(SpaceTimePoint::START).chain(cfg.coins.iter().map(Coin::point)).collect();
    let us = pts.iter().map(|p| p.t + p.y).collect();
    let vs = pts.iter().map(|p| p.t - p.y).collect();
    gap(us).min(gap(vs))
}

/// Grid oracle for [`overlap_poset`]: labels every grid point of the playing
/// field directly with [`lightcone_leq`] and keeps the realized label sets.
///
/// The grid is laid out in light-cone coordinates with the given step.
pub fn overlap_poset_bruteforce(cfg: &CoinConfig, resolution: f64) -> Result<OverlapPoset, SpacesError> {
    cfg.validate()?;
    if !(resolution > 0.0 && resolution.is_finite()) {
        return Err(SpacesError::ResolutionTooCoarse(format!("resolution {resolution} must be positive")));
    }
    let spacing = coin_spacing(cfg);
    if spacing.is_finite() && spacing / resolution < 10.0 {
        return Err(SpacesError::ResolutionTooCoarse(format!(
            "{:.3} grid points per coin spacing {spacing}, need at least 10",
            spacing / resolution
        )));
    }
    let reach = 2.0 * cfg.horizon;
    let steps = ((reach + CONE_EPS) / resolution).floor() as usize;
    let masks: BTreeSet<u32> = (0..=steps)
        .into_par_iter()
        .map(|i| {
            let u = i as f64 * resolution;
            let mut local = BTreeSet::new();
            for j in 0..=steps {
                let v = j as f64 * resolution;
                let p = SpaceTimePoint::from_uv(u, v);
                if p.t > cfg.horizon + CONE_EPS {
                    break;
                }
                local.insert(cfg.below_mask(p));
            }
            local
        })
        .reduce(BTreeSet::new, |mut a, b| {
            a.extend(b);
            a
        });
    Ok(OverlapPoset::from_masks(cfg, masks.into_iter().collect()))
}

/// Overlap-poset element of a point: the coins below it, plus the start.
pub fn strat_label(cfg: &CoinConfig, p: SpaceTimePoint) -> Result<String, SpacesError> {
    strat_label_mask(cfg, p).map(|m| cfg.label_name(m))
}

pub fn strat_label_mask(cfg: &CoinConfig, p: SpaceTimePoint) -> Result<u32, SpacesError> {
    if !p.in_start_cone() || p.t > cfg.horizon + CONE_EPS {
        return Err(SpacesError::PointOutsideDomain { t: p.t, y: p.y });
    }
    Ok(cfg.below_mask(p))
}

/// Attempts to stratify a finite set of points by the collection poset,
/// sending each point to `choose(label_mask)` (a coin index). Returns the map
/// so callers can run [`MonotoneMap::is_monotone`] on it.
pub fn collection_map<F>(cfg: &CoinConfig, points: &[(String, SpaceTimePoint)], choose: F) -> MonotoneMap
where
    F: Fn(u32) -> usize,
{
    let source = Poset::from_order(points.iter().map(|(n, _)| n.clone()).collect(), |i, j| {
        lightcone_leq(points[i].1, points[j].1)
    })
    .expect("distinct points form a partial order");
    let assignment = points.iter().map(|(_, p)| choose(cfg.below_mask(*p))).collect();
    MonotoneMap::from_indices(source, cfg.collection_poset(), assignment)
}
