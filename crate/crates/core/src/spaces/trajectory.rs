//! Stratifying sampled trajectories by when they visit a closed target set,
//! and labelling coin-game traces by the chain of coins they collect.

use serde::{Deserialize, Serialize};

use super::coin::{lightcone_leq, CoinConfig, SpaceTimePoint, CONE_EPS};
use super::SpacesError;
use crate::poset::Poset;
use crate::trace::Trace;

/// A closed set of target states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TargetSet {
    Everything,
    Nothing,
    /// Closed Euclidean ball.
    Ball { center: Vec<f64>, radius: f64 },
    /// Closed axis-aligned box.
    Box { lo: Vec<f64>, hi: Vec<f64> },
    /// Finite set of states, matched coordinate-wise within `tol`.
    States { states: Vec<Vec<f64>>, tol: f64 },
}

impl TargetSet {
    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            TargetSet::Everything => true,
            TargetSet::Nothing => false,
            TargetSet::Ball { center, radius } => {
                center.iter().zip(x).map(|(c, v)| (c - v) * (c - v)).sum::<f64>().sqrt() <= *radius
            }
            TargetSet::Box { lo, hi } => x.iter().zip(lo.iter().zip(hi)).all(|(v, (l, h))| *l <= *v && *v <= *h),
            TargetSet::States { states, tol } => {
                states.iter().any(|s| s.len() == x.len() && s.iter().zip(x).all(|(a, b)| (a - b).abs() <= *tol))
            }
        }
    }
}

/// Sorted sample times at which a trace sits in the target.
pub type TimeSet = Vec<f64>;

pub fn time_set_name(set: &[f64]) -> String {
    let parts: Vec<String> = set.iter().map(|t| t.to_string()).collect();
    format!("{{{}}}", parts.join(","))
}

fn is_superset(big: &[f64], small: &[f64]) -> bool {
    small.iter().all(|t| big.binary_search_by(|b| b.total_cmp(t)).is_ok())
}

/// Per-trace labels `{t_k : trace(t_k) in target}` and the realized labels
/// ordered by reverse inclusion.
#[derive(Debug, Clone)]
pub struct TrajectoryStratification {
    pub labels: Vec<TimeSet>,
    pub poset: Poset,
    /// Index into `poset` for each trace.
    pub element_of: Vec<usize>,
}

pub fn traj_label(trace: &Trace, target: &TargetSet) -> TimeSet {
    trace
        .times()
        .iter()
        .zip(trace.states())
        .filter(|(_, s)| target.contains(s))
        .map(|(t, _)| *t)
        .collect()
}

pub fn traj_stratify(traces: &[Trace], target: &TargetSet) -> Result<TrajectoryStratification, SpacesError> {
    if traces.is_empty() {
        return Err(SpacesError::NoTraces);
    }
    let labels: Vec<TimeSet> = traces.iter().map(|tr| traj_label(tr, target)).collect();
    let mut distinct: Vec<TimeSet> = labels.clone();
    distinct.sort_by(|a, b| {
        let lex = a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne());
        a.len().cmp(&b.len()).then(lex.unwrap_or(std::cmp::Ordering::Equal))
    });
    distinct.dedup();
    let names = distinct.iter().map(|s| time_set_name(s)).collect();
    // Z <= Z' iff Z contains Z'
    let poset = Poset::from_order(names, |i, j| is_superset(&distinct[i], &distinct[j]))
        .expect("reverse inclusion is a partial order");
    let element_of = labels.iter().map(|l| distinct.iter().position(|d| d == l).expect("label realized")).collect();
    Ok(TrajectoryStratification { labels, poset, element_of })
}

/// Coins collected by a speed-limited trace, in collection order. The trace
/// state is the position `y`; its sample times are `t`.
pub fn traj_chain(cfg: &CoinConfig, trace: &Trace) -> Result<Vec<String>, SpacesError> {
    if trace.dim() != 1 {
        return Err(SpacesError::BadTrace(format!("expected one position channel, got {}", trace.dim())));
    }
    let times = trace.times();
    let ys: Vec<f64> = trace.states().iter().map(|s| s[0]).collect();
    for k in 1..times.len() {
        let dt = times[k] - times[k - 1];
        if (ys[k] - ys[k - 1]).abs() > dt + CONE_EPS {
            return Err(SpacesError::SpeedViolation { step: k, dy: ys[k] - ys[k - 1], dt });
        }
    }
    let mut hits: Vec<(f64, &str, SpaceTimePoint)> = Vec::new();
    for coin in &cfg.coins {
        let seg = (1..times.len()).find(|&k| times[k - 1] <= coin.t + CONE_EPS && coin.t <= times[k] + CONE_EPS);
        let y_at = match seg {
            Some(k) => {
                let w = ((coin.t - times[k - 1]) / (times[k] - times[k - 1])).clamp(0.0, 1.0);
                ys[k - 1] + w * (ys[k] - ys[k - 1])
            }
            None if times.len() == 1 && (times[0] - coin.t).abs() <= CONE_EPS => ys[0],
            None => continue,
        };
        if (y_at - coin.y).abs() <= CONE_EPS {
            hits.push((coin.t, coin.label.as_str(), coin.point()));
        }
    }
    hits.sort_by(|a, b| a.0.total_cmp(&b.0));
    debug_assert!(hits.windows(2).all(|w| lightcone_leq(w[0].2, w[1].2)));
    Ok(hits.into_iter().map(|(_, l, _)| l.to_string()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn whole_space_and_empty_targets() {
        let traces = vec![Trace::scalar(&[0.0, 1.0, 2.0]).unwrap(), Trace::scalar(&[5.0, 4.0, 3.0]).unwrap()];
        let all = traj_stratify(&traces, &TargetSet::Everything).unwrap();
        assert_eq!(all.poset.len(), 1);
        assert_eq!(all.labels[0], vec![0.0, 1.0, 2.0]);
        let none = traj_stratify(&traces, &TargetSet::Nothing).unwrap();
        assert!(none.labels.iter().all(Vec::is_empty));
        assert_eq!(none.poset.len(), 1);
        assert!(matches!(traj_stratify(&[], &TargetSet::Everything), Err(SpacesError::NoTraces)));
    }

    #[test]
    fn green_cell_label_from_step_four() {
        // (row, col) walk on a 3x3 grid reaching the green cell (2,0) at step 4
        let path = [(0, 2), (0, 1), (0, 0), (1, 0), (2, 0), (2, 0), (2, 0), (2, 0)];
        let states = path.iter().map(|&(r, c)| vec![r as f64, c as f64]).collect();
        let tr = Trace::uniform(0.0, 1.0, states).unwrap();
        let green = TargetSet::States { states: vec![vec![2.0, 0.0]], tol: 0.0 };
        assert_eq!(traj_label(&tr, &green), vec![4.0, 5.0, 6.0, 7.0]);
    }

    #[test]
    fn reverse_inclusion_order() {
        let t = |v: &[f64]| Trace::scalar(v).unwrap();
        let traces = vec![t(&[1.0, 1.0, 1.0]), t(&[1.0, 0.0, 1.0]), t(&[0.0, 0.0, 0.0])];
        let s = traj_stratify(&traces, &TargetSet::Box { lo: vec![0.5], hi: vec![1.5] }).unwrap();
        assert_eq!(s.poset.len(), 3);
        // more visits = lower stratum
        assert!(s.poset.leq("{0,1,2}", "{0,2}").unwrap());
        assert!(s.poset.leq("{0,2}", "{}").unwrap());
        assert_eq!(s.poset.maximal_elements(), vec![s.poset.index_of("{}").unwrap()]);
    }

    #[test]
    fn chains_of_collected_coins() {
        let cfg = CoinConfig::default5();
        let idle = Trace::new(vec![0.0, 1.0], vec![vec![0.0], vec![1.0]], vec!["y".into()]).unwrap();
        // straight up the cone edge, no coins on it in the default layout
        let chain = traj_chain(&cfg, &idle).unwrap();
        assert!(chain.is_empty());

        let fast = Trace::new(vec![0.0, 1.0], vec![vec![0.0], vec![1.5]], vec!["y".into()]).unwrap();
        assert!(matches!(traj_chain(&cfg, &fast), Err(SpacesError::SpeedViolation { step: 1, .. })));
    }

    #[test]
    fn chain_through_a_then_c() {
        let cfg = CoinConfig::default5();
        let a = cfg.coins.iter().find(|c| c.label == "A").unwrap().point();
        let c = cfg.coins.iter().find(|c| c.label == "C").unwrap().point();
        // S -> A -> C by straight segments, then coast
        let pts = [SpaceTimePoint::START, a, c, SpaceTimePoint::new(cfg.horizon, c.y)];
        let times = pts.iter().map(|p| p.t).collect();
        let states = pts.iter().map(|p| vec![p.y]).collect();
        let tr = Trace::new(times, states, vec!["y".into()]).unwrap();
        assert_eq!(traj_chain(&cfg, &tr).unwrap(), vec!["A", "C"]);
    }
}
