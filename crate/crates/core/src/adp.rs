//! Approximate dynamic programming: value-to-go (VTG) approximators, the ADP
//! forward pass, and the string function an instance and approximator induce.
//!
//! An approximator supplies `W_{k+1}(x_k, a)` for `k = 1..=K`, with
//! `W_{K+1} ≡ 0`. The ADP pass picks, at every stage, the action maximising
//! `r_k(x_k, a) + W_{k+1}(x_k, a)`; this is exactly the greedy string of the
//! induced function `f((a_1..a_k)) = Σ_{i≤k} r_i(x_i, a_i) + W_{k+1}(x_k, a_k)`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::control::{solve_exact_dp, ControlInstance, Policy};
use crate::error::{Error, Result};
use crate::greedy::{argmax_first, GreedyTrace};
use crate::string::{ActionString, StringFunction};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VtgKind {
    Myopic,
    Rollout,
    Optimal,
    Table,
}

impl fmt::Display for VtgKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            VtgKind::Myopic => "myopic",
            VtgKind::Rollout => "rollout",
            VtgKind::Optimal => "optimal",
            VtgKind::Table => "table",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VtgApproximator {
    kind: VtgKind,
    /// Base policy, for rollout approximators.
    base: Option<Policy>,
    /// `table[k-1][x][a] = W_{k+1}(x, a)` for `k = 1..K-1`; absent means `W ≡ 0`.
    table: Option<Vec<Vec<Vec<f64>>>>,
}

impl VtgApproximator {
    pub fn kind(&self) -> VtgKind {
        self.kind
    }

    pub fn base_policy(&self) -> Option<&Policy> {
        self.base.as_ref()
    }

    pub fn table(&self) -> Option<&[Vec<Vec<f64>>]> {
        self.table.as_deref()
    }

    /// `W_{k+1}(x, a)`. Zero at `k = K` and beyond.
    #[inline]
    pub fn w(&self, k: usize, x: usize, a: usize) -> f64 {
        match &self.table {
            Some(t) if k >= 1 && k <= t.len() => t[k - 1][x][a],
            _ => 0.0,
        }
    }
}

/// `W ≡ 0`: the ADP pass maximises the immediate reward only.
pub fn myopic_vtg() -> VtgApproximator {
    VtgApproximator { kind: VtgKind::Myopic, base: None, table: None }
}

/// `W_{k+1}(x, a)`: the reward of following `base` from stage `k + 1` at
/// `h_k(x, a)` through stage `K`.
///
/// The base must be defined wherever it is reached from a reachable
/// `(k, x)`; entries reached only from unreachable states are stored as NaN.
pub fn rollout_vtg(inst: &ControlInstance, base: &Policy) -> Result<VtgApproximator> {
    let reachable = inst.reachable();
    let mut table = Vec::with_capacity(inst.horizon().saturating_sub(1));
    for k in 1..inst.horizon() {
        let mut stage = Vec::with_capacity(inst.state_count());
        for (x, &live) in reachable[k - 1].iter().enumerate() {
            let mut row = Vec::with_capacity(inst.action_count());
            for a in 0..inst.action_count() {
                let tail = base.tail_value(inst, k + 1, inst.next_state(k, x, a));
                row.push(match tail {
                    Ok(v) => v,
                    Err(e) if live => return Err(e),
                    Err(_) => f64::NAN,
                });
            }
            stage.push(row);
        }
        table.push(stage);
    }
    Ok(VtgApproximator { kind: VtgKind::Rollout, base: Some(base.clone()), table: Some(table) })
}

/// The exact value-to-go `W_{k+1}(x, a) = V_{k+1}(h_k(x, a))`.
pub fn optimal_vtg(inst: &ControlInstance) -> VtgApproximator {
    let vt = solve_exact_dp(inst);
    let table = (1..inst.horizon())
        .map(|k| {
            (0..inst.state_count())
                .map(|x| (0..inst.action_count()).map(|a| vt.value(k + 1, inst.next_state(k, x, a))).collect())
                .collect()
        })
        .collect();
    VtgApproximator { kind: VtgKind::Optimal, base: Some(vt.as_policy()), table: Some(table) }
}

/// A user-supplied table `[k-1][x][a] = W_{k+1}(x, a)` for `k = 1..K-1`.
/// Values may be negative; [`induced_f`] shifts them if needed.
pub fn table_vtg(inst: &ControlInstance, values: Vec<Vec<Vec<f64>>>) -> Result<VtgApproximator> {
    let stages = inst.horizon() - 1;
    if values.len() != stages {
        return Err(Error::validation("vtg_table", format!("expected {stages} stages, got {}", values.len())));
    }
    for (k, stage) in values.iter().enumerate() {
        if stage.len() != inst.state_count() {
            return Err(Error::validation(format!("vtg_table[{k}]"), format!("expected {} states, got {}", inst.state_count(), stage.len())));
        }
        for (x, row) in stage.iter().enumerate() {
            if row.len() != inst.action_count() {
                return Err(Error::validation(format!("vtg_table[{k}][{x}]"), format!("expected {} actions, got {}", inst.action_count(), row.len())));
            }
            if let Some(a) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::validation(format!("vtg_table[{k}][{x}][{a}]"), "must be finite"));
            }
        }
    }
    Ok(VtgApproximator { kind: VtgKind::Table, base: None, table: Some(values) })
}

/// The string function induced by an instance and an approximator, defined on
/// strings of length at most `K`.
///
/// `shift` is a constant added to every `W_{k+1}` with `k < K` so that the
/// function is nonnegative. It is zero for positive rewards with any
/// nonnegative approximator; since curvatures depend on it, it is reported.
#[derive(Clone, Copy, Debug)]
pub struct InducedStringFunction<'a> {
    inst: &'a ControlInstance,
    vtg: &'a VtgApproximator,
    shift: f64,
}

pub fn induced_f<'a>(inst: &'a ControlInstance, vtg: &'a VtgApproximator) -> InducedStringFunction<'a> {
    let lowest = lowest_prefix_value(inst, vtg);
    let shift = if lowest < 0.0 { -lowest } else { 0.0 };
    InducedStringFunction { inst, vtg, shift }
}

/// Minimum of `Σ_{i≤k} r_i + W_{k+1}` over reachable prefixes with `1 ≤ k < K`.
fn lowest_prefix_value(inst: &ControlInstance, vtg: &VtgApproximator) -> f64 {
    let mut cheapest: Vec<Option<f64>> = vec![None; inst.state_count()];
    cheapest[inst.initial_state()] = Some(0.0);
    let mut lowest = f64::INFINITY;
    for k in 1..inst.horizon() {
        let mut next: Vec<Option<f64>> = vec![None; inst.state_count()];
        for (x, m) in cheapest.iter().enumerate() {
            let Some(m) = *m else { continue };
            for a in 0..inst.action_count() {
                let reached = m + inst.reward(k, x, a);
                lowest = lowest.min(reached + vtg.w(k, x, a));
                let y = inst.next_state(k, x, a);
                next[y] = Some(next[y].map_or(reached, |v: f64| v.min(reached)));
            }
        }
        cheapest = next;
    }
    lowest
}

impl<'a> InducedStringFunction<'a> {
    pub fn instance(&self) -> &'a ControlInstance {
        self.inst
    }

    pub fn vtg(&self) -> &'a VtgApproximator {
        self.vtg
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    /// `W_{k+1}(x, a)` including the nonnegativity shift; zero at `k = K`.
    #[inline]
    pub fn w_shifted(&self, k: usize, x: usize, a: usize) -> f64 {
        if k < self.inst.horizon() {
            self.vtg.w(k, x, a) + self.shift
        } else {
            0.0
        }
    }
}

impl StringFunction for InducedStringFunction<'_> {
    fn action_count(&self) -> usize {
        self.inst.action_count()
    }

    fn max_len(&self) -> usize {
        self.inst.horizon()
    }

    fn eval(&self, s: &[usize]) -> f64 {
        let n = s.len();
        assert!(n <= self.inst.horizon(), "string of length {n} exceeds horizon {}", self.inst.horizon());
        let mut x = self.inst.initial_state();
        let mut total = 0.0;
        for (i, &a) in s.iter().enumerate() {
            let k = i + 1;
            total += self.inst.reward(k, x, a);
            if k == n {
                return total + self.w_shifted(k, x, a);
            }
            x = self.inst.next_state(k, x, a);
        }
        0.0
    }
}

/// The ADP forward pass: `â_k ∈ argmax_a { r_k(x̂_k, a) + W_{k+1}(x̂_k, a) }`,
/// smallest index on ties.
///
/// `values[k-1]` is the unshifted running objective `Σ_{i≤k} r_i + W_{k+1}`,
/// which equals the induced function on `G_k` whenever its shift is zero.
pub fn run_adp(inst: &ControlInstance, vtg: &VtgApproximator) -> GreedyTrace {
    let mut x = inst.initial_state();
    let mut running = 0.0;
    let mut actions = ActionString::empty();
    let mut values = Vec::with_capacity(inst.horizon());
    let mut ties = Vec::with_capacity(inst.horizon());
    for k in 1..=inst.horizon() {
        let scores: Vec<f64> = (0..inst.action_count()).map(|a| inst.reward(k, x, a) + vtg.w(k, x, a)).collect();
        let (g, _, n) = argmax_first(scores).expect("action_count >= 1");
        running += inst.reward(k, x, g);
        values.push(running + vtg.w(k, x, g));
        actions.push(g);
        ties.push(n);
        if k < inst.horizon() {
            x = inst.next_state(k, x, g);
        }
    }
    GreedyTrace { actions, values, ties }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::{simulate_policy, solve_exact_dp};
    use crate::generate::{builtin_tiny, gen_random_instance, random_policy, random_vtg_table};
    use crate::greedy::greedy_string;
    use proptest::prelude::*;

    #[test]
    fn induced_examples() {
        let tiny = builtin_tiny();
        let myopic = myopic_vtg();
        let f = induced_f(&tiny, &myopic);
        assert_eq!(f.eval(&[1]), 2.0);
        assert_eq!(f.eval(&[]), 0.0);

        let rollout = rollout_vtg(&tiny, &Policy::constant(&tiny, 0).unwrap()).unwrap();
        let f = induced_f(&tiny, &rollout);
        assert_eq!(f.eval(&[1]), 3.0);
        assert_eq!(f.eval(&[0, 0]), 6.0);

        let opt = optimal_vtg(&tiny);
        assert_eq!(induced_f(&tiny, &opt).eval(&[0, 0]), 6.0);
        assert_eq!(induced_f(&tiny, &myopic).eval(&[0, 0]), 6.0);
    }

    #[test]
    fn adp_examples() {
        let tiny = builtin_tiny();
        let t = run_adp(&tiny, &myopic_vtg());
        assert_eq!(t.actions, ActionString::from([1, 0]));
        assert_eq!(t.final_value(), 3.0);

        let rollout = rollout_vtg(&tiny, &Policy::constant(&tiny, 0).unwrap()).unwrap();
        let t = run_adp(&tiny, &rollout);
        assert_eq!(t.actions, ActionString::from([0, 0]));
        assert_eq!(t.final_value(), 6.0);

        let t = run_adp(&tiny, &optimal_vtg(&tiny));
        assert_eq!(t.actions, ActionString::from([0, 0]));
        assert_eq!(t.final_value(), 6.0);
    }

    #[test]
    fn rollout_and_optimal_tables() {
        let tiny = builtin_tiny();
        let rollout = rollout_vtg(&tiny, &Policy::constant(&tiny, 0).unwrap()).unwrap();
        assert_eq!(rollout.w(1, 0, 0), 5.0);
        assert_eq!(rollout.w(1, 0, 1), 1.0);
        assert_eq!(rollout.w(2, 1, 1), 0.0);

        let opt = optimal_vtg(&tiny);
        assert_eq!(opt.w(1, 0, 0), 5.0);
        assert_eq!(opt.w(1, 0, 1), 1.0);
        assert_eq!(opt.w(2, 0, 0), 0.0);

        let m = myopic_vtg();
        assert_eq!(m.w(1, 0, 0), 0.0);
        assert_eq!(m.w(7, 3, 2), 0.0);
    }

    #[test]
    fn rollout_requires_reachable_base() {
        let tiny = builtin_tiny();
        let partial = Policy::new(&tiny, vec![vec![Some(0), Some(0)], vec![Some(0), None]]).unwrap();
        assert!(matches!(rollout_vtg(&tiny, &partial), Err(Error::PolicyUndefined { stage: 2, state: 1 })));
    }

    #[test]
    fn negative_table_is_shifted() {
        let tiny = builtin_tiny();
        let vtg = table_vtg(&tiny, vec![vec![vec![-4.0, 0.0], vec![0.0, 0.0]]]).unwrap();
        let f = induced_f(&tiny, &vtg);
        assert_eq!(f.shift(), 3.0);
        assert_eq!(f.eval(&[0]), 0.0);
        assert_eq!(f.eval(&[1]), 5.0);
        assert_eq!(f.eval(&[0, 0]), 6.0);
        assert!(table_vtg(&tiny, vec![]).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(96))]

        #[test]
        fn adp_is_greedy_on_induced_function(seed in 0u64..100_000, s in 1usize..5, a in 1usize..4, k in 1usize..7) {
            let inst = gen_random_instance(seed, s, a, k, (0.5, 10.0)).unwrap();
            let vtgs = [
                myopic_vtg(),
                optimal_vtg(&inst),
                rollout_vtg(&inst, &random_policy(seed, &inst)).unwrap(),
                table_vtg(&inst, random_vtg_table(seed, &inst, 10.0)).unwrap(),
            ];
            for vtg in &vtgs {
                let f = induced_f(&inst, vtg);
                let adp = run_adp(&inst, vtg);
                let greedy = greedy_string(&f, k).unwrap();
                prop_assert_eq!(&adp.actions, &greedy.actions);
                prop_assert_eq!(&adp.values, &greedy.values);
            }
            let opt = run_adp(&inst, &vtgs[1]);
            prop_assert_eq!(opt.final_value(), solve_exact_dp(&inst).value(1, inst.initial_state()));
        }

        #[test]
        fn rollout_improves_on_base(seed in 0u64..100_000, s in 1usize..5, a in 1usize..4, k in 1usize..7) {
            let inst = gen_random_instance(seed, s, a, k, (0.5, 10.0)).unwrap();
            let base = random_policy(seed ^ 0x5eed, &inst);
            let vtg = rollout_vtg(&inst, &base).unwrap();
            let f = induced_f(&inst, &vtg);
            let trace = run_adp(&inst, &vtg);
            let mut prev = 0.0;
            for g in 0..=k {
                let v = f.eval(trace.prefix(g));
                prop_assert!(v >= prev - 1e-9);
                prev = v;
            }
            prop_assert!(trace.final_value() >= simulate_policy(&inst, &base).unwrap().1);
        }
    }
}
