//! Learns a 5x5 grid task whose only reward is the normalized robustness of
//! `F[15,25] (in_green >= 0.5)` at the end of the episode, then samples the
//! visited states as a token cloud.

use stratkit::detect::{kmeans, purity};
use stratkit::rl::{
    policy_to_tree, q_learning, rollout, sample_token_states, value_iteration, EnvSpec, GridEnv, QParams,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = EnvSpec::empty(5, 5, (4, 0), 30).with_formula("F[15,25] (in_green >= 0.5)");
    let env = GridEnv::build(spec)?;
    let params = QParams { episodes: 6666, ..QParams::default() };
    let learned = q_learning(&env, &params, 0)?;
    let tail = &learned.curve[learned.curve.len() - 500..];
    println!("{} steps, mean reward over the last 500 episodes {:.3}", learned.steps, tail.iter().sum::<f64>() / 500.0);

    let plan = value_iteration(&env)?;
    let starts = env.start_states();
    let wins = |p| starts.iter().filter(|&&s| rollout(&env, p, s).map(|e| e.reward > 0.0).unwrap_or(false)).count();
    println!("greedy Q policy wins from {}/{} starts, VI from {}/{}", wins(&learned.policy), starts.len(), wins(&plan.policy), starts.len());

    let path = rollout(&env, &plan.policy, env.cell_index(0, 4).expect("cell exists"))?;
    let cells: Vec<String> = path.states.iter().map(|&s| env.state(s).to_string()).collect();
    println!("VI path from (0,4): {}", cells.join(" "));
    // without a window the optimal policy heads straight for the goal and its
    // step-0 slice is a spanning tree
    let reach = GridEnv::build(EnvSpec::empty(3, 3, (2, 0), 6))?;
    let tree = policy_to_tree(&reach, &value_iteration(&reach)?.policy)?;
    println!("3x3 reach policy tree: {} nodes, root {}", tree.tree.len(), tree.tree.name(tree.tree.minimal_elements()[0]));

    let tokens = sample_token_states(&env, &[plan.policy], 250, 0)?;
    let km = kmeans(&tokens.cloud, 2, 0)?;
    println!("{} token states, 2-means purity vs window cue {:.3}", tokens.cloud.len(), purity(&km.labels, &tokens.window_active));
    Ok(())
}
