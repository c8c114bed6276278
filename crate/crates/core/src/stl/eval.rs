//! Quantitative robustness, computed as whole signals bottom-up, and the
//! boolean reference semantics used to cross-check it.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use super::{Cmp, Formula, Interval, StlError};
use crate::trace::Trace;

/// Saturation bound for robustness values and empty-window sentinels.
pub const DEFAULT_BIG: f64 = 1e9;

pub type ScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Named scalar functions of the state vector. Atoms resolve here first and
/// then against the trace's own channel names.
#[derive(Clone, Default)]
pub struct FunctionRegistry {
    funcs: BTreeMap<String, ScalarFn>,
}

impl fmt::Debug for FunctionRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.funcs.keys()).finish()
    }
}

impl FunctionRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Projections named after each channel, plus `x[i]` (0-based).
    pub fn for_channels(channels: &[String]) -> Self {
        let mut reg = Self::new();
        for (i, name) in channels.iter().enumerate() {
            reg.projection(name.clone(), i);
            reg.projection(format!("x[{i}]"), i);
        }
        reg
    }

    pub fn register(&mut self, name: impl Into<String>, f: ScalarFn) -> &mut Self {
        self.funcs.insert(name.into(), f);
        self
    }

    pub fn register_fn<F>(&mut self, name: impl Into<String>, f: F) -> &mut Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        self.register(name, Arc::new(f))
    }

    pub fn projection(&mut self, name: impl Into<String>, index: usize) -> &mut Self {
        self.register_fn(name, move |x| x[index])
    }

    /// `offset + sum_i coeffs[i] * x[i]`.
    pub fn affine(&mut self, name: impl Into<String>, coeffs: Vec<f64>, offset: f64) -> &mut Self {
        self.register_fn(name, move |x| offset + coeffs.iter().zip(x).map(|(c, v)| c * v).sum::<f64>())
    }

    pub fn get(&self, name: &str) -> Option<&ScalarFn> {
        self.funcs.get(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.funcs.contains_key(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.funcs.keys().map(String::as_str)
    }

    /// Values of `name` along the trace.
    fn values(&self, name: &str, trace: &Trace) -> Result<Vec<f64>, StlError> {
        if let Some(f) = self.funcs.get(name) {
            return Ok(trace.states().iter().map(|s| f(s)).collect());
        }
        match trace.channels().iter().position(|c| c == name) {
            Some(i) => Ok(trace.states().iter().map(|s| s[i]).collect()),
            None => Err(StlError::UnresolvedFunction(name.to_string())),
        }
    }
}

/// Robustness of `phi` at every sample index.
pub fn robustness_signal(phi: &Formula, trace: &Trace, reg: &FunctionRegistry) -> Result<Vec<f64>, StlError> {
    robustness_signal_with(phi, trace, reg, DEFAULT_BIG)
}

pub fn robustness_signal_with(
    phi: &Formula,
    trace: &Trace,
    reg: &FunctionRegistry,
    big: f64,
) -> Result<Vec<f64>, StlError> {
    let n = trace.len();
    let clamp = |v: f64| v.clamp(-big, big);
    Ok(match phi {
        Formula::True => vec![big; n],
        Formula::Atom { func, cmp, mu } => {
            let vals = reg.values(func, trace)?;
            vals.into_iter()
                .map(|v| clamp(if *cmp == Cmp::Ge { v - mu } else { mu - v }))
                .collect()
        }
        Formula::Not(f) => robustness_signal_with(f, trace, reg, big)?.into_iter().map(|v| -v).collect(),
        Formula::And(l, r) | Formula::Or(l, r) => {
            let ls = robustness_signal_with(l, trace, reg, big)?;
            let rs = robustness_signal_with(r, trace, reg, big)?;
            let and = matches!(phi, Formula::And(..));
            ls.iter().zip(&rs).map(|(a, b)| if and { a.min(*b) } else { a.max(*b) }).collect()
        }
        Formula::Eventually(i, f) | Formula::Always(i, f) => {
            let s = robustness_signal_with(f, trace, reg, big)?;
            let ev = matches!(phi, Formula::Eventually(..));
            (0..n)
                .map(|k| {
                    let w = &s[trace.window(k, i.a, i.b)];
                    if ev {
                        w.iter().copied().fold(-big, f64::max)
                    } else {
                        w.iter().copied().fold(big, f64::min)
                    }
                })
                .collect()
        }
        Formula::Until(i, l, r) => {
            let s1 = robustness_signal_with(l, trace, reg, big)?;
            let s2 = robustness_signal_with(r, trace, reg, big)?;
            (0..n)
                .map(|k| {
                    let w = trace.window(k, i.a, i.b);
                    // running min of s1 over [k, t']
                    let mut guard = s1[k..w.start].iter().copied().fold(big, f64::min);
                    let mut best = -big;
                    for t in w {
                        guard = guard.min(s1[t]);
                        best = best.max(s2[t].min(guard));
                    }
                    best
                })
                .collect()
        }
    })
}

/// Robustness of `phi` on `trace` at sample `t_index`.
pub fn robustness(phi: &Formula, trace: &Trace, t_index: usize, reg: &FunctionRegistry) -> Result<f64, StlError> {
    robustness_with(phi, trace, t_index, reg, DEFAULT_BIG)
}

pub fn robustness_with(
    phi: &Formula,
    trace: &Trace,
    t_index: usize,
    reg: &FunctionRegistry,
    big: f64,
) -> Result<f64, StlError> {
    if t_index >= trace.len() {
        return Err(StlError::IndexOutOfRange { index: t_index, len: trace.len() });
    }
    Ok(robustness_signal_with(phi, trace, reg, big)?[t_index])
}

/// Sample indices `j >= k` with `t_j - t_k` in `[a, b]`, by linear scan.
fn oracle_window(trace: &Trace, k: usize, i: &Interval) -> Vec<usize> {
    let t = trace.times();
    (k..t.len()).filter(|&j| t[j] - t[k] >= i.a - 1e-9 && t[j] - t[k] <= i.b + 1e-9).collect()
}

fn oracle_signal(phi: &Formula, trace: &Trace, reg: &FunctionRegistry) -> Result<Vec<bool>, StlError> {
    let n = trace.len();
    Ok(match phi {
        Formula::True => vec![true; n],
        Formula::Atom { func, cmp, mu } => reg
            .values(func, trace)?
            .into_iter()
            .map(|v| match cmp {
                Cmp::Ge => v >= *mu,
                Cmp::Le => v <= *mu,
            })
            .collect(),
        Formula::Not(f) => oracle_signal(f, trace, reg)?.into_iter().map(|b| !b).collect(),
        Formula::And(l, r) => {
            let (a, b) = (oracle_signal(l, trace, reg)?, oracle_signal(r, trace, reg)?);
            (0..n).map(|k| a[k] && b[k]).collect()
        }
        Formula::Or(l, r) => {
            let (a, b) = (oracle_signal(l, trace, reg)?, oracle_signal(r, trace, reg)?);
            (0..n).map(|k| a[k] || b[k]).collect()
        }
        Formula::Eventually(i, f) => {
            let s = oracle_signal(f, trace, reg)?;
            (0..n).map(|k| oracle_window(trace, k, i).into_iter().any(|j| s[j])).collect()
        }
        Formula::Always(i, f) => {
            let s = oracle_signal(f, trace, reg)?;
            (0..n).map(|k| oracle_window(trace, k, i).into_iter().all(|j| s[j])).collect()
        }
        Formula::Until(i, l, r) => {
            let (hold, goal) = (oracle_signal(l, trace, reg)?, oracle_signal(r, trace, reg)?);
            (0..n)
                .map(|k| oracle_window(trace, k, i).into_iter().any(|j| goal[j] && (k..=j).all(|m| hold[m])))
                .collect()
        }
    })
}

/// Boolean satisfaction with the same window rules as [`robustness`].
pub fn robustness_bool_oracle(
    phi: &Formula,
    trace: &Trace,
    t_index: usize,
    reg: &FunctionRegistry,
) -> Result<bool, StlError> {
    if t_index >= trace.len() {
        return Err(StlError::IndexOutOfRange { index: t_index, len: trace.len() });
    }
    Ok(oracle_signal(phi, trace, reg)?[t_index])
}

/// `clamp(rho / scale, -1, 1)`.
pub fn normalize(rho: f64, scale: f64) -> Result<f64, StlError> {
    if !(scale > 0.0) {
        return Err(StlError::NonpositiveScale(scale));
    }
    Ok((rho / scale).clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stl::parse;
    use crate::stl::random::{random_formula, random_trace, FormulaGen};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ramp() -> Trace {
        Trace::scalar(&[0.0, 1.0, 2.0, 3.0, 4.0]).unwrap()
    }

    #[test]
    fn worked_values() {
        let reg = FunctionRegistry::new();
        let five = Trace::scalar(&[5.0; 4]).unwrap();
        for k in 0..4 {
            assert_eq!(robustness(&parse("x1 >= 3").unwrap(), &five, k, &reg).unwrap(), 2.0);
        }
        let f = parse("F[0,2] (x1 >= 3)").unwrap();
        assert_eq!(robustness(&f, &ramp(), 0, &reg).unwrap(), -1.0);
        let g = parse("G[0,4] (x1 >= 0)").unwrap();
        assert!(robustness_bool_oracle(&g, &ramp(), 0, &reg).unwrap());
        assert!(robustness_bool_oracle(&parse("x1 >= 3").unwrap(), &five, 0, &reg).unwrap());
    }

    #[test]
    fn empty_windows_saturate() {
        let reg = FunctionRegistry::new();
        let tr = ramp();
        let ev = parse("F[1,2] x1 >= 0").unwrap();
        let al = parse("G[1,2] x1 >= 0").unwrap();
        let un = parse("true U[1,2] x1 >= 0").unwrap();
        assert_eq!(robustness(&ev, &tr, 4, &reg).unwrap(), -DEFAULT_BIG);
        assert_eq!(robustness(&al, &tr, 4, &reg).unwrap(), DEFAULT_BIG);
        assert_eq!(robustness(&un, &tr, 4, &reg).unwrap(), -DEFAULT_BIG);
        // truncated, not empty
        assert_eq!(robustness(&ev, &tr, 3, &reg).unwrap(), 4.0);
        assert_eq!(robustness_with(&ev, &tr, 4, &reg, 7.0).unwrap(), -7.0);
    }

    #[test]
    fn until_guard_includes_both_ends() {
        let reg = FunctionRegistry::new();
        let tr = Trace::uniform(0.0, 1.0, vec![vec![1.0, 0.0], vec![1.0, 0.0], vec![-1.0, 5.0]]).unwrap();
        let f = parse("x1 >= 0 U[0,2] x2 >= 1").unwrap();
        // x2 only holds at t=2 where x1 fails
        assert_eq!(robustness(&f, &tr, 0, &reg).unwrap(), -1.0);
        assert!(!robustness_bool_oracle(&f, &tr, 0, &reg).unwrap());
    }

    #[test]
    fn errors() {
        let reg = FunctionRegistry::new();
        let f = parse("y >= 0").unwrap();
        assert_eq!(robustness(&f, &ramp(), 0, &reg), Err(StlError::UnresolvedFunction("y".into())));
        assert_eq!(
            robustness(&parse("x1 >= 0").unwrap(), &ramp(), 5, &reg),
            Err(StlError::IndexOutOfRange { index: 5, len: 5 })
        );
        assert_eq!(normalize(1.0, 0.0), Err(StlError::NonpositiveScale(0.0)));
    }

    #[test]
    fn normalization() {
        assert_eq!(normalize(2.0, 4.0).unwrap(), 0.5);
        assert_eq!(normalize(-10.0, 4.0).unwrap(), -1.0);
        assert_eq!(normalize(DEFAULT_BIG, 1e12).unwrap(), 1e-3);
        assert_eq!(normalize(DEFAULT_BIG, 4.0).unwrap(), 1.0);
    }

    #[test]
    fn registry_functions() {
        let mut reg = FunctionRegistry::for_channels(&["a".into(), "b".into()]);
        reg.affine("sum", vec![1.0, 1.0], -1.0);
        let tr = Trace::new(vec![0.0], vec![vec![2.0, 3.0]], vec!["a".into(), "b".into()]).unwrap();
        assert_eq!(robustness(&parse("sum >= 0").unwrap(), &tr, 0, &reg).unwrap(), 4.0);
        assert_eq!(robustness(&parse("b <= 0").unwrap(), &tr, 0, &reg).unwrap(), -3.0);
        assert_eq!(robustness(&Formula::ge("x[0]", 0.0), &tr, 0, &reg).unwrap(), 2.0);
    }

    #[test]
    fn not_negates_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let reg = FunctionRegistry::new();
        let gen = FormulaGen::default();
        for _ in 0..200 {
            let f = random_formula(&mut rng, &gen, 3);
            let tr = random_trace(&mut rng, 20, gen.channels.len());
            let a = robustness_signal(&f, &tr, &reg).unwrap();
            let b = robustness_signal(&f.clone().not(), &tr, &reg).unwrap();
            assert!(a.iter().zip(&b).all(|(x, y)| *x == -*y));
        }
    }

    #[test]
    fn soundness_small() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let reg = FunctionRegistry::new();
        let gen = FormulaGen::default();
        for _ in 0..200 {
            let f = random_formula(&mut rng, &gen, 4);
            let tr = random_trace(&mut rng, 30, gen.channels.len());
            let rho = robustness_signal(&f, &tr, &reg).unwrap();
            for (k, r) in rho.iter().enumerate() {
                if r.abs() > 1e-9 {
                    assert_eq!(robustness_bool_oracle(&f, &tr, k, &reg).unwrap(), *r > 0.0, "{f} at {k}");
                }
            }
        }
    }

    #[test]
    fn derived_operators() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let reg = FunctionRegistry::new();
        let gen = FormulaGen::default();
        for _ in 0..200 {
            let f = random_formula(&mut rng, &gen, 2);
            let i = gen.interval(&mut rng);
            let tr = random_trace(&mut rng, 25, gen.channels.len());
            let ev = robustness_signal(&Formula::eventually(i, f.clone()), &tr, &reg).unwrap();
            let tu = robustness_signal(&Formula::True.until(i, f.clone()), &tr, &reg).unwrap();
            assert_eq!(ev, tu);
            let al = robustness_signal(&Formula::always(i, f.clone()), &tr, &reg).unwrap();
            let nen = robustness_signal(&Formula::eventually(i, f.clone().not()).not(), &tr, &reg).unwrap();
            assert_eq!(al, nen);
        }
    }

    #[test]
    fn raising_a_positive_threshold_never_helps() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let reg = FunctionRegistry::new();
        let gen = FormulaGen { allow_not: false, ..FormulaGen::default() };
        for _ in 0..200 {
            let f = random_formula(&mut rng, &gen, 4);
            let tr = random_trace(&mut rng, 25, gen.channels.len());
            let raised = crate::stl::random::shift_ge_thresholds(&f, 0.3);
            let lo = robustness_signal(&f, &tr, &reg).unwrap();
            let hi = robustness_signal(&raised, &tr, &reg).unwrap();
            assert!(lo.iter().zip(&hi).all(|(a, b)| b <= a), "{f}");
        }
    }
}
