//! Finite-horizon deterministic optimal control over tabular dynamics.
//!
//! An instance fixes a horizon `K`, an initial state `x_1`, per-stage rewards
//! `r_k(x, a) > 0` for `k = 1..=K` and transitions `x_{k+1} = h_k(x_k, a_k)`
//! for `k = 1..K`. Totals are always summed in stage order `1 → K`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::greedy::argmax_first;
use crate::string::{enumerate_strings_within, ActionString};
use crate::DEFAULT_ENUMERATION_BUDGET;

#[derive(Clone, Debug, PartialEq)]
pub struct ControlInstance {
    horizon: usize,
    state_count: usize,
    action_count: usize,
    initial_state: usize,
    /// `[stage][state][action]`, `K` stages.
    rewards: Vec<Vec<Vec<f64>>>,
    /// `[stage][state][action]`, `K - 1` stages.
    transitions: Vec<Vec<Vec<usize>>>,
}

impl ControlInstance {
    /// Validates shapes, positivity of rewards and range of transitions.
    pub fn new(
        horizon: usize,
        state_count: usize,
        action_count: usize,
        initial_state: usize,
        rewards: Vec<Vec<Vec<f64>>>,
        transitions: Vec<Vec<Vec<usize>>>,
    ) -> Result<Self> {
        if horizon == 0 {
            return Err(Error::validation("horizon", "must be at least 1"));
        }
        if state_count == 0 {
            return Err(Error::validation("state_count", "must be at least 1"));
        }
        if action_count == 0 {
            return Err(Error::validation("action_count", "must be at least 1"));
        }
        if initial_state >= state_count {
            return Err(Error::validation("initial_state", format!("{initial_state} is not below state_count {state_count}")));
        }
        check_shape("rewards", &rewards, horizon, state_count, action_count)?;
        check_shape("transitions", &transitions, horizon - 1, state_count, action_count)?;
        for (k, stage) in rewards.iter().enumerate() {
            for (x, row) in stage.iter().enumerate() {
                for (a, &r) in row.iter().enumerate() {
                    if !(r.is_finite() && r > 0.0) {
                        return Err(Error::validation(format!("rewards[{k}][{x}][{a}]"), format!("must be a positive finite number, got {r}")));
                    }
                }
            }
        }
        for (k, stage) in transitions.iter().enumerate() {
            for (x, row) in stage.iter().enumerate() {
                for (a, &y) in row.iter().enumerate() {
                    if y >= state_count {
                        return Err(Error::validation(format!("transitions[{k}][{x}][{a}]"), format!("state {y} is not below state_count {state_count}")));
                    }
                }
            }
        }
        Ok(ControlInstance { horizon, state_count, action_count, initial_state, rewards, transitions })
    }

    /// Materialises procedural reward and transition functions into tables.
    /// Both closures receive 1-based stages.
    pub fn from_fns<R, H>(horizon: usize, state_count: usize, action_count: usize, initial_state: usize, reward: R, transition: H) -> Result<Self>
    where
        R: Fn(usize, usize, usize) -> f64,
        H: Fn(usize, usize, usize) -> usize,
    {
        let rewards = (1..=horizon)
            .map(|k| (0..state_count).map(|x| (0..action_count).map(|a| reward(k, x, a)).collect()).collect())
            .collect();
        let transitions = (1..horizon)
            .map(|k| (0..state_count).map(|x| (0..action_count).map(|a| transition(k, x, a)).collect()).collect())
            .collect();
        ControlInstance::new(horizon, state_count, action_count, initial_state, rewards, transitions)
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn state_count(&self) -> usize {
        self.state_count
    }

    pub fn action_count(&self) -> usize {
        self.action_count
    }

    pub fn initial_state(&self) -> usize {
        self.initial_state
    }

    pub fn rewards(&self) -> &[Vec<Vec<f64>>] {
        &self.rewards
    }

    pub fn transitions(&self) -> &[Vec<Vec<usize>>] {
        &self.transitions
    }

    /// `r_k(x, a)` for `k` in `1..=K`.
    #[inline]
    pub fn reward(&self, k: usize, x: usize, a: usize) -> f64 {
        self.rewards[k - 1][x][a]
    }

    /// `h_k(x, a)` for `k` in `1..K`.
    #[inline]
    pub fn next_state(&self, k: usize, x: usize, a: usize) -> usize {
        self.transitions[k - 1][x][a]
    }

    /// States reachable at each stage `1..=K` from `x_1`.
    pub fn reachable(&self) -> Vec<Vec<bool>> {
        let mut out = vec![vec![false; self.state_count]; self.horizon];
        out[0][self.initial_state] = true;
        for k in 1..self.horizon {
            for x in 0..self.state_count {
                if out[k - 1][x] {
                    for a in 0..self.action_count {
                        out[k][self.next_state(k, x, a)] = true;
                    }
                }
            }
        }
        out
    }
}

fn check_shape<T>(name: &str, table: &[Vec<Vec<T>>], stages: usize, states: usize, actions: usize) -> Result<()> {
    if table.len() != stages {
        return Err(Error::validation(name, format!("expected {stages} stages, got {}", table.len())));
    }
    for (k, stage) in table.iter().enumerate() {
        if stage.len() != states {
            return Err(Error::validation(format!("{name}[{k}]"), format!("expected {states} states, got {}", stage.len())));
        }
        for (x, row) in stage.iter().enumerate() {
            if row.len() != actions {
                return Err(Error::validation(format!("{name}[{k}][{x}]"), format!("expected {actions} actions, got {}", row.len())));
            }
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub total: f64,
    /// `x_1, ..., x_n` for a string of `n` actions.
    pub states: Vec<usize>,
    pub stage_rewards: Vec<f64>,
}

/// Applies `actions` from `x_1`. Strings shorter than `K` give partial sums.
pub fn evaluate_trajectory(inst: &ControlInstance, actions: &[usize]) -> Result<Trajectory> {
    if actions.len() > inst.horizon {
        return Err(Error::StringTooLong { len: actions.len(), horizon: inst.horizon });
    }
    let mut x = inst.initial_state;
    let mut total = 0.0;
    let mut states = Vec::with_capacity(actions.len());
    let mut stage_rewards = Vec::with_capacity(actions.len());
    for (i, &a) in actions.iter().enumerate() {
        let k = i + 1;
        check_action(inst, a)?;
        states.push(x);
        let r = inst.reward(k, x, a);
        stage_rewards.push(r);
        total += r;
        if k < inst.horizon {
            x = inst.next_state(k, x, a);
        }
    }
    Ok(Trajectory { total, states, stage_rewards })
}

fn check_action(inst: &ControlInstance, a: usize) -> Result<()> {
    if a >= inst.action_count {
        return Err(Error::InvalidArgument(format!("action {a} is not below action_count {}", inst.action_count)));
    }
    Ok(())
}

/// `V_k(x, (a_k, ..., a_K))`; the tail must have exactly `K - k + 1` actions.
/// `k = K + 1` with an empty tail gives 0.
pub fn value_to_go(inst: &ControlInstance, k: usize, x: usize, tail: &[usize]) -> Result<f64> {
    if k == 0 || k > inst.horizon + 1 {
        return Err(Error::InvalidArgument(format!("stage {k} outside 1..={}", inst.horizon + 1)));
    }
    let expected = inst.horizon + 1 - k;
    if tail.len() != expected {
        return Err(Error::WrongTailLength { stage: k, expected, got: tail.len() });
    }
    if x >= inst.state_count {
        return Err(Error::InvalidArgument(format!("state {x} is not below state_count {}", inst.state_count)));
    }
    let mut x = x;
    let mut total = 0.0;
    for (i, &a) in tail.iter().enumerate() {
        let stage = k + i;
        check_action(inst, a)?;
        total += inst.reward(stage, x, a);
        if stage < inst.horizon {
            x = inst.next_state(stage, x, a);
        }
    }
    Ok(total)
}

/// Optimal values-to-go and a smallest-index optimal policy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValueTable {
    /// `values[k-1][x] = V_k(x)` for `k = 1..=K+1`.
    values: Vec<Vec<f64>>,
    /// `policy[k-1][x]` for `k = 1..=K`.
    policy: Vec<Vec<usize>>,
}

impl ValueTable {
    /// `V_k(x)` for `k` in `1..=K+1`.
    pub fn value(&self, k: usize, x: usize) -> f64 {
        self.values[k - 1][x]
    }

    /// Smallest optimal action at stage `k`, state `x`.
    pub fn action(&self, k: usize, x: usize) -> usize {
        self.policy[k - 1][x]
    }

    pub fn horizon(&self) -> usize {
        self.policy.len()
    }

    /// Follows the table forward from `x_1`. With smallest-index tie-breaking
    /// this is the lexicographically first optimal string.
    pub fn optimal_string(&self, inst: &ControlInstance) -> (ActionString, f64) {
        let mut x = inst.initial_state();
        let mut actions = ActionString::empty();
        for k in 1..=inst.horizon() {
            let a = self.action(k, x);
            actions.push(a);
            if k < inst.horizon() {
                x = inst.next_state(k, x, a);
            }
        }
        (actions, self.value(1, inst.initial_state()))
    }

    pub fn as_policy(&self) -> Policy {
        Policy { actions: self.policy.iter().map(|row| row.iter().map(|&a| Some(a)).collect()).collect() }
    }
}

/// Backward recursion `V_k(x) = max_a { r_k(x,a) + V_{k+1}(h_k(x,a)) }`, `V_{K+1} ≡ 0`.
pub fn solve_exact_dp(inst: &ControlInstance) -> ValueTable {
    let big_k = inst.horizon;
    let mut values = vec![vec![0.0; inst.state_count]; big_k + 1];
    let mut policy = vec![vec![0; inst.state_count]; big_k];
    for k in (1..=big_k).rev() {
        for x in 0..inst.state_count {
            let q = (0..inst.action_count).map(|a| {
                let future = if k < big_k { values[k][inst.next_state(k, x, a)] } else { 0.0 };
                inst.reward(k, x, a) + future
            });
            let (a, v, _) = argmax_first(q.collect::<Vec<_>>()).expect("action_count >= 1");
            values[k - 1][x] = v;
            policy[k - 1][x] = a;
        }
    }
    ValueTable { values, policy }
}

/// Lexicographically first maximiser of the total reward over all `|A|^K` strings.
pub fn brute_force_optimal(inst: &ControlInstance) -> Result<(ActionString, f64)> {
    brute_force_optimal_within(inst, DEFAULT_ENUMERATION_BUDGET)
}

pub fn brute_force_optimal_within(inst: &ControlInstance, budget: u64) -> Result<(ActionString, f64)> {
    let mut best: Option<(ActionString, f64)> = None;
    for s in enumerate_strings_within(inst.action_count, inst.horizon, budget)? {
        let v = evaluate_trajectory(inst, &s)?.total;
        if best.as_ref().is_none_or(|(_, bv)| v > *bv) {
            best = Some((s, v));
        }
    }
    Ok(best.expect("at least one string"))
}

/// A stage-dependent policy `π(k, x)`. Entries may be undefined.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Policy {
    /// `actions[k-1][x]`.
    actions: Vec<Vec<Option<usize>>>,
}

impl Policy {
    pub fn new(inst: &ControlInstance, actions: Vec<Vec<Option<usize>>>) -> Result<Self> {
        if actions.len() != inst.horizon {
            return Err(Error::validation("policy", format!("expected {} stages, got {}", inst.horizon, actions.len())));
        }
        for (k, row) in actions.iter().enumerate() {
            if row.len() != inst.state_count {
                return Err(Error::validation(format!("policy[{k}]"), format!("expected {} states, got {}", inst.state_count, row.len())));
            }
            for (x, a) in row.iter().enumerate() {
                if let Some(a) = *a {
                    if a >= inst.action_count {
                        return Err(Error::validation(format!("policy[{k}][{x}]"), format!("action {a} is not below action_count {}", inst.action_count)));
                    }
                }
            }
        }
        Ok(Policy { actions })
    }

    /// Always takes `action`.
    pub fn constant(inst: &ControlInstance, action: usize) -> Result<Self> {
        Policy::new(inst, vec![vec![Some(action); inst.state_count]; inst.horizon])
    }

    /// Per-stage reward argmax, smallest index on ties.
    pub fn myopic(inst: &ControlInstance) -> Self {
        let actions = (1..=inst.horizon)
            .map(|k| {
                (0..inst.state_count)
                    .map(|x| argmax_first((0..inst.action_count).map(|a| inst.reward(k, x, a)).collect::<Vec<_>>()).map(|(a, _, _)| a))
                    .collect()
            })
            .collect();
        Policy { actions }
    }

    /// `π(k, x)` for `k` in `1..=K`.
    pub fn get(&self, k: usize, x: usize) -> Option<usize> {
        self.actions.get(k - 1).and_then(|row| row.get(x)).copied().flatten()
    }

    pub fn require(&self, k: usize, x: usize) -> Result<usize> {
        self.get(k, x).ok_or(Error::PolicyUndefined { stage: k, state: x })
    }

    pub fn table(&self) -> &[Vec<Option<usize>>] {
        &self.actions
    }

    /// Reward collected by following the policy from `(k, x)` through stage `K`.
    pub fn tail_value(&self, inst: &ControlInstance, k: usize, x: usize) -> Result<f64> {
        let mut x = x;
        let mut total = 0.0;
        for stage in k..=inst.horizon {
            let a = self.require(stage, x)?;
            total += inst.reward(stage, x, a);
            if stage < inst.horizon {
                x = inst.next_state(stage, x, a);
            }
        }
        Ok(total)
    }
}

/// Runs `policy` forward from `x_1`.
pub fn simulate_policy(inst: &ControlInstance, policy: &Policy) -> Result<(ActionString, f64)> {
    let mut x = inst.initial_state;
    let mut actions = ActionString::empty();
    let mut total = 0.0;
    for k in 1..=inst.horizon {
        let a = policy.require(k, x)?;
        actions.push(a);
        total += inst.reward(k, x, a);
        if k < inst.horizon {
            x = inst.next_state(k, x, a);
        }
    }
    Ok((actions, total))
}
