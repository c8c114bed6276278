//! Hand-built state encodings standing in for a learned token space.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::env::GridEnv;
use super::plan::{rollout, Policy};
use super::RlError;
use crate::detect::PointCloud;

/// Weight of the window cue channel relative to the one-hot cell block.
pub const CUE_WEIGHT: f64 = 1.0;

/// Deduplicated encoded states with the step and cue of their first visit.
#[derive(Debug, Clone)]
pub struct TokenCloud {
    pub cloud: PointCloud,
    pub window_active: Vec<bool>,
    pub steps: Vec<usize>,
    pub states: Vec<usize>,
}

/// One-hot cell, one-hot heading (rotation games), step phase `k/H`,
/// `in_green`, `in_red`, and the window cue.
pub fn encode_state(env: &GridEnv, s: usize, step: usize) -> Vec<f64> {
    let (rows, cols) = (env.spec.rows, env.spec.cols);
    let st = env.state(s);
    let mut v = vec![0.0; rows * cols];
    v[st.row * cols + st.col] = 1.0;
    if let Some(h) = st.heading {
        let mut hv = [0.0; 4];
        hv[h as usize] = 1.0;
        v.extend(hv);
    }
    let obs = env.observe(s, step);
    let n = obs.len();
    v.push(step as f64 / env.horizon() as f64);
    v.push(obs[n - 2]);
    v.push(obs[n - 1]);
    v.push(if env.window_active(step) { CUE_WEIGHT } else { 0.0 });
    v
}

/// Rolls out `n_trajectories` episodes from uniformly drawn start states,
/// each under a uniformly drawn policy from `policies`, and keeps every
/// distinct encoded state.
pub fn sample_token_states(
    env: &GridEnv,
    policies: &[Policy],
    n_trajectories: usize,
    seed: u64,
) -> Result<TokenCloud, RlError> {
    if n_trajectories == 0 || policies.is_empty() {
        return Err(RlError::BadParameters("need at least one trajectory and one policy".into()));
    }
    let starts = env.start_states();
    if starts.is_empty() {
        return Err(RlError::BadSpec("every state is red".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = HashSet::new();
    let (mut rows, mut window_active, mut steps, mut states) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for _ in 0..n_trajectories {
        let policy = &policies[rng.gen_range(0..policies.len())];
        let start = starts[rng.gen_range(0..starts.len())];
        let ep = rollout(env, policy, start)?;
        for (k, &s) in ep.states.iter().enumerate() {
            let row = encode_state(env, s, k);
            if seen.insert(row.iter().map(|v| v.to_bits()).collect::<Vec<u64>>()) {
                rows.push(row);
                window_active.push(env.window_active(k));
                steps.push(k);
                states.push(s);
            }
        }
    }
    Ok(TokenCloud { cloud: PointCloud::from_rows(&rows)?, window_active, steps, states })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rl::env::{Action, EnvSpec};
    use crate::rl::plan::value_iteration;

    #[test]
    fn one_trajectory_bounds() {
        let env = GridEnv::build(EnvSpec::empty(3, 3, (2, 0), 6)).unwrap();
        let plan = value_iteration(&env).unwrap();
        let tc = sample_token_states(&env, &[plan.policy], 1, 3).unwrap();
        assert!(tc.cloud.len() <= 7);
        let idle = Policy::constant(&env, Action::None);
        let many = sample_token_states(&env, &[idle], 200, 3).unwrap();
        assert!(many.cloud.len() <= env.n_states() * 7);
        // idle rollouts differ only by start cell and step
        assert_eq!(many.cloud.len(), env.n_states() * 7);
        assert!(sample_token_states(&env, &[], 1, 0).is_err());
    }
}
