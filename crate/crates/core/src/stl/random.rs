//! Random formulas and traces for property tests and fuzzing.

use rand::Rng;

use super::{Cmp, Formula, Interval};
use crate::trace::{default_channels, Trace};

/// Knobs for [`random_formula`].
#[derive(Debug, Clone)]
pub struct FormulaGen {
    pub channels: Vec<String>,
    pub allow_not: bool,
    /// Interval starts are drawn from `[0, max_start]`, lengths from `[0, max_len]`.
    pub max_start: f64,
    pub max_len: f64,
    /// Atom thresholds are drawn from `[-mu_range, mu_range]`.
    pub mu_range: f64,
}

impl Default for FormulaGen {
    fn default() -> Self {
        FormulaGen { channels: default_channels(2), allow_not: true, max_start: 6.0, max_len: 8.0, mu_range: 1.0 }
    }
}

impl FormulaGen {
    /// Endpoints on a half-unit lattice, so some fall between samples.
    pub fn interval<R: Rng>(&self, rng: &mut R) -> Interval {
        let a = (rng.gen_range(0.0..=self.max_start) * 2.0).round() / 2.0;
        let len = (rng.gen_range(0.0..=self.max_len) * 2.0).round() / 2.0;
        Interval { a, b: a + len }
    }

    fn atom<R: Rng>(&self, rng: &mut R) -> Formula {
        let func = self.channels[rng.gen_range(0..self.channels.len())].clone();
        let cmp = if rng.gen_bool(0.5) { Cmp::Ge } else { Cmp::Le };
        Formula::Atom { func, cmp, mu: rng.gen_range(-self.mu_range..=self.mu_range) }
    }
}

/// Formula of depth at most `depth` (an atom has depth 1).
pub fn random_formula<R: Rng>(rng: &mut R, gen: &FormulaGen, depth: usize) -> Formula {
    if depth <= 1 || rng.gen_bool(0.2) {
        return if rng.gen_bool(0.05) { Formula::True } else { gen.atom(rng) };
    }
    let sub = |rng: &mut R| random_formula(rng, gen, depth - 1);
    let kinds = if gen.allow_not { 6 } else { 5 };
    match rng.gen_range(0..kinds) {
        0 => sub(rng).and(sub(rng)),
        1 => sub(rng).or(sub(rng)),
        2 => {
            let i = gen.interval(rng);
            sub(rng).until(i, sub(rng))
        }
        3 => Formula::eventually(gen.interval(rng), sub(rng)),
        4 => Formula::always(gen.interval(rng), sub(rng)),
        _ => sub(rng).not(),
    }
}

/// Unit-step trace with `dim` channels `x1..` uniform in [-1, 1].
pub fn random_trace<R: Rng>(rng: &mut R, len: usize, dim: usize) -> Trace {
    let states = (0..len).map(|_| (0..dim).map(|_| rng.gen_range(-1.0..=1.0)).collect()).collect();
    Trace::uniform(0.0, 1.0, states).expect("finite samples")
}

/// Adds `delta` to every `>=` threshold.
pub fn shift_ge_thresholds(f: &Formula, delta: f64) -> Formula {
    let go = |g: &Formula| Box::new(shift_ge_thresholds(g, delta));
    match f {
        Formula::Atom { func, cmp: Cmp::Ge, mu } => Formula::Atom { func: func.clone(), cmp: Cmp::Ge, mu: mu + delta },
        Formula::True | Formula::Atom { .. } => f.clone(),
        Formula::Not(g) => Formula::Not(go(g)),
        Formula::And(l, r) => Formula::And(go(l), go(r)),
        Formula::Or(l, r) => Formula::Or(go(l), go(r)),
        Formula::Until(i, l, r) => Formula::Until(*i, go(l), go(r)),
        Formula::Eventually(i, g) => Formula::Eventually(*i, go(g)),
        Formula::Always(i, g) => Formula::Always(*i, go(g)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stl::parse;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn arb_interval() -> impl Strategy<Value = Interval> {
        (0.0..50.0f64, 0.0..50.0f64).prop_map(|(a, l)| Interval { a, b: a + l })
    }

    fn arb_formula() -> impl Strategy<Value = Formula> {
        let leaf = prop_oneof![
            Just(Formula::True),
            ("[a-z][a-z0-9_]{0,6}", any::<bool>(), -1e6..1e6f64).prop_filter_map("keyword", |(name, ge, mu)| {
                (name != "true").then(|| Formula::atom(name, if ge { Cmp::Ge } else { Cmp::Le }, mu))
            }),
        ];
        leaf.prop_recursive(5, 48, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(Formula::not),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a.and(b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a.or(b)),
                (arb_interval(), inner.clone(), inner.clone()).prop_map(|(i, a, b)| a.until(i, b)),
                (arb_interval(), inner.clone()).prop_map(|(i, a)| Formula::eventually(i, a)),
                (arb_interval(), inner).prop_map(|(i, a)| Formula::always(i, a)),
            ]
        })
    }

    proptest! {
        #[test]
        fn print_then_parse_is_identity(f in arb_formula()) {
            let text = f.to_string();
            prop_assert_eq!(parse(&text).unwrap(), f);
        }
    }

    #[test]
    fn depth_is_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let gen = FormulaGen::default();
        for _ in 0..500 {
            assert!(random_formula(&mut rng, &gen, 4).depth() <= 4);
        }
    }
}
