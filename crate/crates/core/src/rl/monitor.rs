//! Online robustness monitor for formulas whose temporal operators apply to
//! state predicates only. Its memory is a short vector of running extrema,
//! so a state, its step, and that memory make the terminal robustness
//! Markov.

use super::RlError;
use crate::stl::{robustness_signal, Formula, FunctionRegistry, Interval, DEFAULT_BIG};
use crate::trace::Trace;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Agg {
    /// Max of predicate over the window (`F`; also plain predicates at 0).
    Max { window: Interval, pred: usize, slot: usize },
    /// Min of predicate over the window (`G`).
    Min { window: Interval, pred: usize, slot: usize },
    /// `hold U goal`; slots hold the prefix min of `hold` and the best value.
    Until { window: Interval, hold: usize, goal: usize, slot: usize },
}

#[derive(Debug, Clone, PartialEq)]
enum Skel {
    True,
    Leaf(usize),
    Not(Box<Skel>),
    And(Box<Skel>, Box<Skel>),
    Or(Box<Skel>, Box<Skel>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Monitor {
    preds: Vec<Formula>,
    aggs: Vec<Agg>,
    skel: Skel,
    init: Vec<f64>,
}

fn is_temporal(f: &Formula) -> bool {
    matches!(f, Formula::Until(..) | Formula::Eventually(..) | Formula::Always(..)) || f.children().into_iter().any(is_temporal)
}

fn in_window(w: &Interval, step: usize) -> bool {
    let t = step as f64;
    t >= w.a - 1e-9 && t <= w.b + 1e-9
}

impl Monitor {
    pub fn new(formula: &Formula) -> Result<Self, RlError> {
        let mut m = Monitor { preds: Vec::new(), aggs: Vec::new(), skel: Skel::True, init: Vec::new() };
        m.skel = m.build(formula)?;
        Ok(m)
    }

    fn pred(&mut self, f: &Formula) -> usize {
        match self.preds.iter().position(|p| p == f) {
            Some(i) => i,
            None => {
                self.preds.push(f.clone());
                self.preds.len() - 1
            }
        }
    }

    fn leaf(&mut self, agg: Agg, init: &[f64]) -> Skel {
        self.aggs.push(agg);
        self.init.extend_from_slice(init);
        Skel::Leaf(self.aggs.len() - 1)
    }

    fn state_pred(&mut self, f: &Formula) -> Result<usize, RlError> {
        if is_temporal(f) {
            return Err(RlError::UnsupportedFormula(format!(
                "nested temporal operator in `{f}`; only state predicates may sit under F, G and U"
            )));
        }
        Ok(self.pred(f))
    }

    fn build(&mut self, f: &Formula) -> Result<Skel, RlError> {
        let slot = self.init.len();
        Ok(match f {
            Formula::True => Skel::True,
            _ if !is_temporal(f) => {
                let pred = self.pred(f);
                self.leaf(Agg::Max { window: Interval { a: 0.0, b: 0.0 }, pred, slot }, &[-DEFAULT_BIG])
            }
            Formula::Not(g) => Skel::Not(Box::new(self.build(g)?)),
            Formula::And(l, r) => Skel::And(Box::new(self.build(l)?), Box::new(self.build(r)?)),
            Formula::Or(l, r) => Skel::Or(Box::new(self.build(l)?), Box::new(self.build(r)?)),
            Formula::Eventually(window, g) => {
                let pred = self.state_pred(g)?;
                self.leaf(Agg::Max { window: *window, pred, slot }, &[-DEFAULT_BIG])
            }
            Formula::Always(window, g) => {
                let pred = self.state_pred(g)?;
                self.leaf(Agg::Min { window: *window, pred, slot }, &[DEFAULT_BIG])
            }
            Formula::Until(window, l, r) => {
                let hold = self.state_pred(l)?;
                let goal = self.state_pred(r)?;
                self.leaf(Agg::Until { window: *window, hold, goal, slot }, &[DEFAULT_BIG, -DEFAULT_BIG])
            }
            Formula::Atom { .. } => unreachable!("atoms are state predicates"),
        })
    }

    /// Distinct state predicates; [`Monitor::update`] takes their values in
    /// this order.
    pub fn predicates(&self) -> &[Formula] {
        &self.preds
    }

    /// Robustness of each state predicate on a single channel vector.
    pub fn predicate_values(&self, channels: &[String], values: &[f64], reg: &FunctionRegistry) -> Vec<f64> {
        let tr = Trace::new(vec![0.0], vec![values.to_vec()], channels.to_vec()).expect("one finite sample");
        self.preds.iter().map(|p| robustness_signal(p, &tr, reg).expect("predicate resolves")[0]).collect()
    }

    /// Memory before any sample.
    pub fn initial(&self) -> Vec<f64> {
        self.init.clone()
    }

    /// Folds the sample at `step` (predicate values `pv`) into `mem`.
    pub fn update(&self, mem: &mut [f64], step: usize, pv: &[f64]) {
        for agg in &self.aggs {
            match *agg {
                Agg::Max { window, pred, slot } if in_window(&window, step) => mem[slot] = mem[slot].max(pv[pred]),
                Agg::Min { window, pred, slot } if in_window(&window, step) => mem[slot] = mem[slot].min(pv[pred]),
                Agg::Until { window, hold, goal, slot } if (step as f64) <= window.b + 1e-9 => {
                    mem[slot] = mem[slot].min(pv[hold]);
                    if in_window(&window, step) {
                        mem[slot + 1] = mem[slot + 1].max(pv[goal].min(mem[slot]));
                    }
                }
                _ => {}
            }
        }
    }

    /// Robustness at time 0 of everything folded so far. Once the last
    /// sample has been folded this equals the batch robustness.
    pub fn value(&self, mem: &[f64]) -> f64 {
        self.eval(&self.skel, mem)
    }

    fn eval(&self, s: &Skel, mem: &[f64]) -> f64 {
        match s {
            Skel::True => DEFAULT_BIG,
            Skel::Leaf(i) => match self.aggs[*i] {
                Agg::Max { slot, .. } | Agg::Min { slot, .. } => mem[slot],
                Agg::Until { slot, .. } => mem[slot + 1],
            },
            Skel::Not(g) => -self.eval(g, mem),
            Skel::And(l, r) => self.eval(l, mem).min(self.eval(r, mem)),
            Skel::Or(l, r) => self.eval(l, mem).max(self.eval(r, mem)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stl::{parse, robustness};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn run(m: &Monitor, tr: &Trace, reg: &FunctionRegistry) -> f64 {
        let mut mem = m.initial();
        for k in 0..tr.len() {
            let pv = m.predicate_values(tr.channels(), tr.state(k), reg);
            m.update(&mut mem, k, &pv);
        }
        m.value(&mem)
    }

    #[test]
    fn matches_batch_robustness() {
        let formulas = [
            "F[2,5] (x1 >= 0.2)",
            "G[0,3] (x1 <= 0.5) & F[1,8] (x2 >= 0)",
            "!(F[0,4] (x1 >= 0.3 | x2 <= -0.1))",
            "(x1 >= 0) | G[1,2] (x2 >= -0.5)",
            "(x1 >= -0.5) U[1,4] (x2 >= 0.5)",
            "G[12,15] (x1 >= 0)",
            "true & (x1 >= 0.1) U[0,6] (!(x2 >= 0.3))",
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let ch = vec!["x1".to_string(), "x2".to_string()];
        let reg = FunctionRegistry::for_channels(&ch);
        for text in formulas {
            let phi = parse(text).unwrap();
            let m = Monitor::new(&phi).unwrap();
            for _ in 0..50 {
                let len = rng.gen_range(1..12);
                let states = (0..len).map(|_| vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]).collect();
                let tr = Trace::uniform(0.0, 1.0, states).unwrap();
                assert_eq!(run(&m, &tr, &reg), robustness(&phi, &tr, 0, &reg).unwrap(), "{text}");
            }
        }
    }

    #[test]
    fn nested_temporal_is_unsupported() {
        let phi = parse("F[0,2] (G[0,1] (x1 >= 0))").unwrap();
        assert!(matches!(Monitor::new(&phi), Err(RlError::UnsupportedFormula(_))));
    }
}
