//! Planning and learning on the product of a grid MDP with the reward
//! formula's online monitor, plus rollouts and policy trees.

use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::env::{Action, GridEnv};
use super::monitor::Monitor;
use super::RlError;
use crate::spaces::{policy_tree, FacePolicy, PolicyTree};
use crate::trace::Trace;

/// A state at a step, with the monitor memory accumulated up to and
/// including that step (stored as `f64` bit patterns).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeKey {
    pub state: usize,
    pub step: usize,
    pub memory: Vec<u64>,
}

fn bits(mem: &[f64]) -> Vec<u64> {
    mem.iter().map(|v| v.to_bits()).collect()
}

/// Tracks monitor memory along a rollout.
struct Tracker<'a> {
    env: &'a GridEnv,
    monitor: Monitor,
    channels: Vec<String>,
}

impl<'a> Tracker<'a> {
    fn new(env: &'a GridEnv) -> Result<Self, RlError> {
        Ok(Tracker { env, monitor: Monitor::new(&env.formula)?, channels: env.channels() })
    }

    fn observe(&self, mem: &mut [f64], state: usize, step: usize) {
        let pv = self.monitor.predicate_values(&self.channels, &self.env.observe(state, step), self.env.registry());
        self.monitor.update(mem, step, &pv);
    }

    fn start(&self, state: usize) -> Vec<f64> {
        let mut mem = self.monitor.initial();
        self.observe(&mut mem, state, 0);
        mem
    }
}

/// Reachable product nodes from every start state, grouped by step.
pub struct Product<'a> {
    pub env: &'a GridEnv,
    pub nodes: Vec<NodeKey>,
    /// `succ[n][a]`; empty at the horizon.
    pub succ: Vec<Vec<usize>>,
    /// Normalized robustness of everything observed so far.
    pub estimate: Vec<f64>,
    /// Node index of each start state (by env state index).
    pub start: HashMap<usize, usize>,
}

impl<'a> Product<'a> {
    pub fn build(env: &'a GridEnv) -> Result<Self, RlError> {
        let tr = Tracker::new(env)?;
        let h = env.horizon();
        let mdp = env.mdp();
        let mut nodes: Vec<NodeKey> = Vec::new();
        let mut mems: Vec<Vec<f64>> = Vec::new();
        let mut index: HashMap<NodeKey, usize> = HashMap::new();
        let mut intern = |key: NodeKey, mem: Vec<f64>, nodes: &mut Vec<NodeKey>, mems: &mut Vec<Vec<f64>>| {
            *index.entry(key.clone()).or_insert_with(|| {
                nodes.push(key);
                mems.push(mem);
                nodes.len() - 1
            })
        };
        let mut start = HashMap::new();
        for s in 0..env.n_states() {
            let mem = tr.start(s);
            let key = NodeKey { state: s, step: 0, memory: bits(&mem) };
            start.insert(s, intern(key, mem, &mut nodes, &mut mems));
        }
        let mut succ: Vec<Vec<usize>> = Vec::new();
        let mut n = 0;
        while n < nodes.len() {
            let NodeKey { state, step, .. } = nodes[n];
            if step == h {
                succ.push(Vec::new());
            } else {
                let mut row = Vec::with_capacity(mdp.actions.len());
                for a in 0..mdp.actions.len() {
                    let next = mdp.step(state, a);
                    let mut mem = mems[n].clone();
                    tr.observe(&mut mem, next, step + 1);
                    let key = NodeKey { state: next, step: step + 1, memory: bits(&mem) };
                    row.push(intern(key, mem, &mut nodes, &mut mems));
                }
                succ.push(row);
            }
            n += 1;
        }
        let estimate = mems.iter().map(|m| (tr.monitor.value(m) / env.scale).clamp(-1.0, 1.0)).collect();
        Ok(Product { env, nodes, succ, estimate, start })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn is_terminal(&self, n: usize) -> bool {
        self.succ[n].is_empty()
    }

    fn timed_policy(&self, choose: impl Fn(usize) -> usize) -> Policy {
        let actions = &self.env.mdp().actions;
        let table = (0..self.len())
            .filter(|&n| !self.is_terminal(n))
            .map(|n| (self.nodes[n].clone(), actions[choose(n)]))
            .collect();
        Policy::Timed(table)
    }
}

/// A stationary table over env states, or a table over product nodes.
#[derive(Debug, Clone, PartialEq)]
pub enum Policy {
    Stationary(Vec<Action>),
    Timed(BTreeMap<NodeKey, Action>),
}

#[derive(Serialize, Deserialize)]
struct TimedEntry {
    state: String,
    step: usize,
    memory: Vec<f64>,
    action: Action,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum PolicyFile {
    Stationary { table: BTreeMap<String, Action> },
    Timed { entries: Vec<TimedEntry> },
}

impl Policy {
    /// The same action everywhere.
    pub fn constant(env: &GridEnv, a: Action) -> Self {
        Policy::Stationary(vec![a; env.n_states()])
    }

    /// JSON keyed by state names (`row,col` or `row,col,heading`).
    pub fn to_json(&self, env: &GridEnv) -> String {
        let file = match self {
            Policy::Stationary(t) => {
                PolicyFile::Stationary { table: t.iter().enumerate().map(|(s, a)| (env.state(s).to_string(), *a)).collect() }
            }
            Policy::Timed(t) => PolicyFile::Timed {
                entries: t
                    .iter()
                    .map(|(k, a)| TimedEntry {
                        state: env.state(k.state).to_string(),
                        step: k.step,
                        memory: k.memory.iter().map(|b| f64::from_bits(*b)).collect(),
                        action: *a,
                    })
                    .collect(),
            },
        };
        serde_json::to_string_pretty(&file).expect("policy serializes")
    }

    pub fn from_json(env: &GridEnv, text: &str) -> Result<Self, RlError> {
        let names: HashMap<String, usize> = (0..env.n_states()).map(|s| (env.state(s).to_string(), s)).collect();
        let lookup = |name: &str| names.get(name).copied().ok_or_else(|| RlError::BadPolicy(format!("unknown state {name}")));
        let allowed = |a: Action| {
            if env.mdp().actions.contains(&a) {
                Ok(a)
            } else {
                Err(RlError::BadPolicy(format!("action {a:?} not available")))
            }
        };
        Ok(match serde_json::from_str::<PolicyFile>(text)? {
            PolicyFile::Stationary { table } => {
                let mut t = vec![None; env.n_states()];
                for (name, a) in table {
                    t[lookup(&name)?] = Some(allowed(a)?);
                }
                let t = t
                    .into_iter()
                    .enumerate()
                    .map(|(s, a)| a.ok_or_else(|| RlError::BadPolicy(format!("no action for {}", env.state(s)))))
                    .collect::<Result<_, _>>()?;
                Policy::Stationary(t)
            }
            PolicyFile::Timed { entries } => {
                let mut t = BTreeMap::new();
                for e in entries {
                    let key = NodeKey { state: lookup(&e.state)?, step: e.step, memory: bits(&e.memory) };
                    t.insert(key, allowed(e.action)?);
                }
                Policy::Timed(t)
            }
        })
    }
}

/// One episode: states, actions, channel trace and terminal reward.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeTrace {
    pub states: Vec<usize>,
    pub actions: Vec<Action>,
    pub trace: Trace,
    pub robustness: f64,
    /// `robustness / scale` clamped to `[-1, 1]`.
    pub reward: f64,
}

/// Follows `policy` for `horizon` steps from `start`. Timed policies fall
/// back to the first action on nodes they do not list.
pub fn rollout(env: &GridEnv, policy: &Policy, start: usize) -> Result<EpisodeTrace, RlError> {
    if start >= env.n_states() {
        return Err(RlError::BadParameters(format!("start state {start} out of range")));
    }
    let mdp = env.mdp();
    let tracker = match policy {
        Policy::Timed(_) => Some(Tracker::new(env)?),
        Policy::Stationary(t) if t.len() != env.n_states() => {
            return Err(RlError::BadPolicy(format!("{} entries for {} states", t.len(), env.n_states())))
        }
        Policy::Stationary(_) => None,
    };
    let mut mem = tracker.as_ref().map(|t| t.start(start)).unwrap_or_default();
    let mut states = vec![start];
    let mut actions = Vec::with_capacity(env.horizon());
    let mut s = start;
    for step in 0..env.horizon() {
        let a = match policy {
            Policy::Stationary(t) => t[s],
            Policy::Timed(t) => {
                let key = NodeKey { state: s, step, memory: bits(&mem) };
                t.get(&key).copied().unwrap_or(mdp.actions[0])
            }
        };
        let ai = mdp.actions.iter().position(|&x| x == a).ok_or_else(|| RlError::BadPolicy(format!("action {a:?} not available")))?;
        s = mdp.step(s, ai);
        if let Some(t) = &tracker {
            t.observe(&mut mem, s, step + 1);
        }
        states.push(s);
        actions.push(a);
    }
    let (robustness, reward) = env.score(&states);
    Ok(EpisodeTrace { trace: env.trace_of(&states), states, actions, robustness, reward })
}

/// Greedy policy and the value of each start state.
#[derive(Debug, Clone)]
pub struct Plan {
    pub policy: Policy,
    /// Optimal normalized reward from each env state at step 0.
    pub value: Vec<f64>,
}

/// Backward induction on the product graph. Among actions with the best
/// terminal reward it prefers the one whose running robustness is higher
/// summed over the remaining steps (reach good states sooner, stay longer),
/// then the first in enumeration order.
pub fn value_iteration(env: &GridEnv) -> Result<Plan, RlError> {
    let p = Product::build(env)?;
    let n = p.len();
    let mut v1 = vec![0.0; n];
    let mut v2 = vec![0.0; n];
    let mut choice = vec![0usize; n];
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(p.nodes[i].step));
    for i in order {
        if p.is_terminal(i) {
            v1[i] = p.estimate[i];
            v2[i] = p.estimate[i];
            continue;
        }
        let kids = &p.succ[i];
        let best1 = kids.iter().map(|&c| v1[c]).fold(f64::NEG_INFINITY, f64::max);
        let best2 = kids.iter().filter(|&&c| v1[c] == best1).map(|&c| v2[c]).fold(f64::NEG_INFINITY, f64::max);
        let a = kids.iter().position(|&c| v1[c] == best1 && v2[c] >= best2 - 1e-9).expect("some action attains the max");
        choice[i] = a;
        v1[i] = best1;
        v2[i] = p.estimate[i] + v2[kids[a]];
    }
    let value = (0..env.n_states()).map(|s| v1[p.start[&s]]).collect();
    Ok(Plan { policy: p.timed_policy(|i| choice[i]), value })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QParams {
    pub alpha: f64,
    pub gamma: f64,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    /// Fraction of episodes over which epsilon decays linearly.
    pub decay_fraction: f64,
    pub episodes: usize,
}

impl Default for QParams {
    fn default() -> Self {
        QParams { alpha: 0.1, gamma: 0.99, epsilon_start: 1.0, epsilon_end: 0.05, decay_fraction: 0.8, episodes: 1000 }
    }
}

impl QParams {
    pub fn validate(&self) -> Result<(), RlError> {
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        if !(self.alpha > 0.0 && self.alpha <= 1.0) || !unit(self.gamma) {
            return Err(RlError::BadParameters(format!("alpha {} / gamma {}", self.alpha, self.gamma)));
        }
        if !unit(self.epsilon_start) || !unit(self.epsilon_end) || !unit(self.decay_fraction) {
            return Err(RlError::BadParameters("epsilon schedule values must lie in [0, 1]".into()));
        }
        if self.episodes == 0 {
            return Err(RlError::BadParameters("episodes must be at least 1".into()));
        }
        Ok(())
    }

    pub fn epsilon(&self, episode: usize) -> f64 {
        let span = (self.decay_fraction * self.episodes as f64).floor();
        if span <= 0.0 || episode as f64 >= span {
            return self.epsilon_end;
        }
        self.epsilon_start + (self.epsilon_end - self.epsilon_start) * episode as f64 / span
    }
}

#[derive(Debug, Clone)]
pub struct Learned {
    pub policy: Policy,
    /// Terminal normalized reward of each training episode.
    pub curve: Vec<f64>,
    pub steps: usize,
}

/// Epsilon-greedy tabular Q-learning on the product graph. Only the final
/// transition of an episode carries reward. Start states are drawn
/// uniformly from [`GridEnv::start_states`].
pub fn q_learning(env: &GridEnv, params: &QParams, seed: u64) -> Result<Learned, RlError> {
    params.validate()?;
    let p = Product::build(env)?;
    let na = env.mdp().actions.len();
    let starts = env.start_states();
    if starts.is_empty() {
        return Err(RlError::BadSpec("every state is red".into()));
    }
    let mut q = vec![0.0; p.len() * na];
    let greedy = |q: &[f64], n: usize| -> usize {
        let row = &q[n * na..(n + 1) * na];
        let mut best = 0;
        for a in 1..na {
            if row[a] > row[best] {
                best = a;
            }
        }
        best
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut curve = Vec::with_capacity(params.episodes);
    let mut steps = 0;
    for e in 0..params.episodes {
        let eps = params.epsilon(e);
        let mut n = p.start[&starts[rng.gen_range(0..starts.len())]];
        while !p.is_terminal(n) {
            let a = if rng.gen::<f64>() < eps { rng.gen_range(0..na) } else { greedy(&q, n) };
            let next = p.succ[n][a];
            let target = if p.is_terminal(next) {
                p.estimate[next]
            } else {
                params.gamma * q[next * na + greedy(&q, next)]
            };
            let cell = &mut q[n * na + a];
            *cell += params.alpha * (target - *cell);
            n = next;
            steps += 1;
        }
        curve.push(p.estimate[n]);
    }
    Ok(Learned { policy: p.timed_policy(|n| greedy(&q, n)), curve, steps })
}

/// Action of each state at step 0, i.e. with only its own sample observed.
pub fn first_step_actions(env: &GridEnv, policy: &Policy) -> Result<Vec<Action>, RlError> {
    match policy {
        Policy::Stationary(t) => Ok(t.clone()),
        Policy::Timed(t) => {
            let tr = Tracker::new(env)?;
            Ok((0..env.n_states())
                .map(|s| {
                    let key = NodeKey { state: s, step: 0, memory: bits(&tr.start(s)) };
                    t.get(&key).copied().unwrap_or(env.mdp().actions[0])
                })
                .collect())
        }
    }
}

/// The step-0 flow of a no-rotation, wall-free policy as a face policy.
pub fn face_policy(env: &GridEnv, policy: &Policy) -> Result<FacePolicy, RlError> {
    if env.spec.rotation {
        return Err(RlError::BadSpec("policy trees need the no-rotation game".into()));
    }
    if !env.spec.forbidden.is_empty() {
        return Err(RlError::BadSpec("policy trees need a grid without walls".into()));
    }
    let moves = first_step_actions(env, policy)?
        .into_iter()
        .map(|a| a.as_move().expect("no-rotation actions are moves"))
        .collect();
    Ok(FacePolicy::new(env.spec.rows, env.spec.cols, env.spec.goal, moves)?)
}

/// Tree rooted at the goal with edges `s -> Phi(s)`, or the witness of a
/// cycle or a cell that never reaches the goal.
pub fn policy_to_tree(env: &GridEnv, policy: &Policy) -> Result<PolicyTree, RlError> {
    Ok(policy_tree(&face_policy(env, policy)?)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rl::env::EnvSpec;
    use crate::spaces::tree_stratification;
    use std::collections::VecDeque;

    fn env(spec: EnvSpec) -> GridEnv {
        GridEnv::build(spec).unwrap()
    }

    fn bfs(env: &GridEnv, from: usize) -> Vec<Option<usize>> {
        let m = env.mdp();
        let mut d = vec![None; env.n_states()];
        d[from] = Some(0);
        let mut q = VecDeque::from([from]);
        while let Some(s) = q.pop_front() {
            for a in 0..m.actions.len() {
                let t = m.step(s, a);
                if d[t].is_none() {
                    d[t] = Some(d[s].unwrap() + 1);
                    q.push_back(t);
                }
            }
        }
        d
    }

    #[test]
    fn idle_policy_rewards() {
        let e = env(EnvSpec::empty(3, 3, (2, 0), 6));
        let idle = Policy::constant(&e, Action::None);
        assert!(rollout(&e, &idle, e.cell_index(0, 2).unwrap()).unwrap().reward < 0.0);
        let at_goal = rollout(&e, &idle, e.cell_index(2, 0).unwrap()).unwrap();
        assert!(at_goal.reward > 0.0);
        assert_eq!(at_goal.trace.len(), 7);
    }

    #[test]
    fn greedy_path_is_shortest() {
        let e = env(EnvSpec::empty(3, 3, (2, 0), 8));
        let plan = value_iteration(&e).unwrap();
        let ep = rollout(&e, &plan.policy, e.cell_index(0, 2).unwrap()).unwrap();
        assert_eq!(ep.states.iter().position(|&s| e.is_goal(s)), Some(4));
        assert!(ep.states[4..].iter().all(|&s| e.is_goal(s)));
        let g = e.cell_index(2, 0).unwrap();
        let held = rollout(&e, &plan.policy, g).unwrap();
        assert!(held.actions.iter().all(|&a| a == Action::None));
    }

    #[test]
    fn optimal_reward_matches_bfs_oracle() {
        let mut spec = EnvSpec::empty(4, 5, (3, 0), 7).with_formula("F[2,5] (in_green >= 0.5)");
        spec.forbidden = vec![(1, 1), (2, 1), (1, 3), (2, 3), (3, 3)];
        let e = env(spec);
        let plan = value_iteration(&e).unwrap();
        let dist = bfs(&e, e.cell_index(3, 0).unwrap());
        for s in 0..e.n_states() {
            let reachable = dist[s].is_some_and(|d| d <= 5);
            let ep = rollout(&e, &plan.policy, s).unwrap();
            assert_eq!(ep.reward > 0.0, reachable, "state {}", e.state(s));
            assert_eq!(ep.reward, plan.value[s]);
        }
    }

    #[test]
    fn red_cell_blocking_the_corridor() {
        let mut spec = EnvSpec::empty(1, 5, (0, 0), 10).with_formula("F[0,10] (in_green >= 0.5) & G[0,10] (in_red <= 0.5)");
        spec.red = vec![(0, 2)];
        let e = env(spec);
        let plan = value_iteration(&e).unwrap();
        assert!(plan.value[e.cell_index(0, 4).unwrap()] <= 0.0);
        assert!(plan.value[e.cell_index(0, 3).unwrap()] <= 0.0);
        assert!(plan.value[e.cell_index(0, 1).unwrap()] > 0.0);
    }

    #[test]
    fn time_augmentation_is_necessary() {
        // be at the goal during [3,4] but not before
        let e = env(EnvSpec::empty(1, 3, (0, 0), 5).with_formula("F[3,4] (in_green >= 0.5) & G[0,2] (in_green <= 0.5)"));
        let n = e.n_states();
        let mean = |rewards: Vec<f64>| rewards.iter().sum::<f64>() / rewards.len() as f64;
        let plan = value_iteration(&e).unwrap();
        let timed = mean((0..n).map(|s| rollout(&e, &plan.policy, s).unwrap().reward).collect());
        let mut best_stationary = f64::NEG_INFINITY;
        for code in 0..5usize.pow(n as u32) {
            let table = (0..n).map(|s| Action::MOVES[code / 5usize.pow(s as u32) % 5]).collect();
            let pol = Policy::Stationary(table);
            best_stationary = best_stationary.max(mean((0..n).map(|s| rollout(&e, &pol, s).unwrap().reward).collect()));
        }
        assert!(timed > best_stationary, "{timed} vs {best_stationary}");
    }

    #[test]
    fn value_iteration_policy_is_a_tree() {
        let e = env(EnvSpec::empty(3, 3, (2, 0), 8));
        let plan = value_iteration(&e).unwrap();
        let tree = policy_to_tree(&e, &plan.policy).unwrap();
        assert_eq!(tree.tree.len(), 9);
        assert!(tree_stratification(&face_policy(&e, &plan.policy).unwrap()).is_ok());
    }

    #[test]
    fn broken_policies_have_witnesses() {
        let e = env(EnvSpec::empty(3, 3, (2, 0), 8));
        let mut table = first_step_actions(&e, &value_iteration(&e).unwrap().policy).unwrap();
        table[e.cell_index(0, 0).unwrap()] = Action::Right;
        table[e.cell_index(0, 1).unwrap()] = Action::Left;
        let cyc = Policy::Stationary(table);
        assert!(matches!(policy_to_tree(&e, &cyc), Err(RlError::Spaces(w)) if w.to_string().contains("cycle")));
        assert!(tree_stratification(&face_policy(&e, &cyc).unwrap()).is_err());
        let idle = Policy::constant(&e, Action::None);
        assert!(matches!(policy_to_tree(&e, &idle), Err(RlError::Spaces(w)) if w.to_string().contains("never reaches")));
    }

    #[test]
    fn q_learning_edge_cases() {
        let e = env(EnvSpec::empty(3, 3, (2, 0), 6));
        let one = q_learning(&e, &QParams { episodes: 1, ..QParams::default() }, 0).unwrap();
        assert_eq!(one.curve.len(), 1);
        assert!(rollout(&e, &one.policy, 0).is_ok());
        let greedy_only = QParams { epsilon_start: 0.0, epsilon_end: 0.0, episodes: 50, ..QParams::default() };
        assert_eq!(q_learning(&e, &greedy_only, 0).unwrap().curve.len(), 50);
        assert!(q_learning(&e, &QParams { episodes: 0, ..QParams::default() }, 0).is_err());
        assert!(q_learning(&e, &QParams { alpha: 0.0, ..QParams::default() }, 0).is_err());
    }

    #[test]
    fn q_learning_is_deterministic_and_dominated() {
        let e = env(EnvSpec::empty(4, 4, (3, 0), 12).with_formula("F[4,9] (in_green >= 0.5)"));
        let params = QParams { episodes: 3000, ..QParams::default() };
        let a = q_learning(&e, &params, 5).unwrap();
        let b = q_learning(&e, &params, 5).unwrap();
        assert_eq!(a.curve, b.curve);
        assert_eq!(a.policy, b.policy);
        let plan = value_iteration(&e).unwrap();
        for s in e.start_states() {
            assert!(plan.value[s] >= rollout(&e, &a.policy, s).unwrap().reward);
        }
    }

    #[test]
    fn policy_json_roundtrip() {
        let e = env(EnvSpec::empty(2, 2, (1, 0), 3));
        let plan = value_iteration(&e).unwrap();
        assert_eq!(Policy::from_json(&e, &plan.policy.to_json(&e)).unwrap(), plan.policy);
        let st = Policy::Stationary(first_step_actions(&e, &plan.policy).unwrap());
        assert_eq!(Policy::from_json(&e, &st.to_json(&e)).unwrap(), st);
        assert!(Policy::from_json(&e, r#"{"kind":"stationary","table":{"0,0":"None"}}"#).is_err());
    }

    #[test]
    fn epsilon_schedule() {
        let p = QParams { episodes: 10, ..QParams::default() };
        assert_eq!(p.epsilon(0), 1.0);
        assert!((p.epsilon(4) - (1.0 - 0.95 * 0.5)).abs() < 1e-12);
        assert_eq!(p.epsilon(8), 0.05);
        assert_eq!(p.epsilon(9), 0.05);
    }
}
