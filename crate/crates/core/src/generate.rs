//! Seeded instance, policy and approximator generators.
//!
//! Random rewards and tables are drawn uniformly from a dyadic grid with
//! spacing 2^-16. Every sum of at most a few dozen such values is exact in
//! `f64`, so equalities between different summation orders (DP against
//! brute force, ADP against greedy) hold bit for bit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::control::{ControlInstance, Policy};
use crate::error::{Error, Result};

const GRID: f64 = 65_536.0;

/// Largest dimensions drawn by [`corpus_instance`].
pub const CORPUS_MAX_STATES: usize = 4;
pub const CORPUS_MAX_ACTIONS: usize = 3;
pub const CORPUS_MAX_HORIZON: usize = 6;
pub const CORPUS_REWARD_RANGE: (f64, f64) = (0.5, 10.0);

/// The two-state, two-action, two-stage worked example.
///
/// `h_k(x, a) = a`, `x_1 = 0`, `r_1 = [[1, 2], [1, 1]]`, `r_2 = [[5, 1], [1, 1]]`
/// indexed `[state][action]`.
pub fn builtin_tiny() -> ControlInstance {
    ControlInstance::new(
        2,
        2,
        2,
        0,
        vec![vec![vec![1.0, 2.0], vec![1.0, 1.0]], vec![vec![5.0, 1.0], vec![1.0, 1.0]]],
        vec![vec![vec![0, 1], vec![0, 1]]],
    )
    .expect("tiny instance is valid")
}

fn grid_value(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    let lo_i = (lo * GRID).ceil() as i64;
    let hi_i = (hi * GRID).floor() as i64;
    rng.gen_range(lo_i..=hi_i) as f64 / GRID
}

/// Rewards uniform on the grid within `reward_range`, transitions uniform over states,
/// `x_1 = 0`. Deterministic in `seed`.
pub fn gen_random_instance(
    seed: u64,
    state_count: usize,
    action_count: usize,
    horizon: usize,
    reward_range: (f64, f64),
) -> Result<ControlInstance> {
    let (lo, hi) = reward_range;
    if !(lo > 0.0 && lo.is_finite() && hi.is_finite()) {
        return Err(Error::InvalidArgument(format!("reward range lower bound must be positive, got {lo}")));
    }
    if (lo * GRID).ceil() > (hi * GRID).floor() {
        return Err(Error::InvalidArgument(format!("reward range ({lo}, {hi}) is empty")));
    }
    if state_count == 0 || action_count == 0 || horizon == 0 {
        return Err(Error::InvalidArgument("state_count, action_count and horizon must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rewards = (0..horizon)
        .map(|_| (0..state_count).map(|_| (0..action_count).map(|_| grid_value(&mut rng, lo, hi)).collect()).collect())
        .collect();
    let transitions = (1..horizon)
        .map(|_| (0..state_count).map(|_| (0..action_count).map(|_| rng.gen_range(0..state_count)).collect()).collect())
        .collect();
    ControlInstance::new(horizon, state_count, action_count, 0, rewards, transitions)
}

/// A corpus instance whose dimensions are also drawn from `seed`:
/// up to 4 states, 3 actions and horizon 6.
pub fn corpus_instance(seed: u64) -> ControlInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let states = rng.gen_range(1..=CORPUS_MAX_STATES);
    let actions = rng.gen_range(1..=CORPUS_MAX_ACTIONS);
    let horizon = rng.gen_range(1..=CORPUS_MAX_HORIZON);
    gen_random_instance(seed, states, actions, horizon, CORPUS_REWARD_RANGE).expect("corpus parameters are valid")
}

/// A stage-dependent policy with every entry uniform over actions.
pub fn random_policy(seed: u64, inst: &ControlInstance) -> Policy {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x2545_f491_4f6c_dd1d) ^ 0xb0b);
    let actions = (0..inst.horizon())
        .map(|_| (0..inst.state_count()).map(|_| Some(rng.gen_range(0..inst.action_count()))).collect())
        .collect();
    Policy::new(inst, actions).expect("random policy matches instance")
}

/// `W_{k+1}(x, a)` uniform on the grid in `[0, scale · (K - k)]`, for `k = 1..K-1`.
pub fn random_vtg_table(seed: u64, inst: &ControlInstance, scale: f64) -> Vec<Vec<Vec<f64>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e37_79b9) ^ 0x7ab1e);
    let big_k = inst.horizon();
    (1..big_k)
        .map(|k| {
            let hi = scale * (big_k - k) as f64;
            (0..inst.state_count())
                .map(|_| (0..inst.action_count()).map(|_| grid_value(&mut rng, 0.0, hi)).collect())
                .collect()
        })
        .collect()
}
