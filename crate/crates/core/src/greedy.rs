//! Greedy strings, brute-force optima, and the greedy approximation floors
//! for string-submodular maximisation under a length constraint.

use serde::{Deserialize, Serialize};

use crate::curvature::{CurvatureProbe, SubmodularityReport};
use crate::error::{Error, Result};
use crate::string::{enumerate_strings_within, ActionString, StringFunction};
use crate::{DEFAULT_ENUMERATION_BUDGET, DEFAULT_TOLERANCE};

/// A greedy string `G_K` together with `f(G_1), ..., f(G_K)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GreedyTrace {
    pub actions: ActionString,
    pub values: Vec<f64>,
    /// Number of actions attaining the maximum at each step.
    pub ties: Vec<usize>,
}

impl GreedyTrace {
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    /// `G_k`, for `k` in `0..=len`.
    pub fn prefix(&self, k: usize) -> &[usize] {
        &self.actions[..k]
    }

    pub fn prefixes(&self) -> impl Iterator<Item = &[usize]> {
        (1..=self.len()).map(move |k| self.prefix(k))
    }

    /// `f(G_K)`, or 0 for an empty trace.
    pub fn final_value(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }
}

/// Index of the largest value, smallest index on ties, plus the tie count.
pub(crate) fn argmax_first(values: impl IntoIterator<Item = f64>) -> Option<(usize, f64, usize)> {
    let mut best: Option<(usize, f64, usize)> = None;
    for (i, v) in values.into_iter().enumerate() {
        best = match best {
            None => Some((i, v, 1)),
            Some((_, bv, _)) if v > bv => Some((i, v, 1)),
            Some((bi, bv, n)) if v == bv => Some((bi, bv, n + 1)),
            keep => keep,
        };
    }
    best
}

/// Builds `G_K` by appending, at each step, the action that maximises `f` of the
/// extended prefix. Ties go to the smallest action index.
pub fn greedy_string<F: StringFunction + ?Sized>(f: &F, horizon: usize) -> Result<GreedyTrace> {
    f.require_len(horizon)?;
    let mut actions = ActionString::empty();
    let mut values = Vec::with_capacity(horizon);
    let mut ties = Vec::with_capacity(horizon);
    let mut candidate = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        candidate.clear();
        candidate.extend_from_slice(&actions);
        candidate.push(0);
        let last = candidate.len() - 1;
        let scores = (0..f.action_count()).map(|g| {
            candidate[last] = g;
            f.eval(&candidate)
        });
        let (g, v, n) = argmax_first(scores.collect::<Vec<_>>())
            .ok_or_else(|| Error::InvalidArgument("string function has no actions".into()))?;
        actions.push(g);
        values.push(v);
        ties.push(n);
    }
    Ok(GreedyTrace { actions, values, ties })
}

/// Lexicographically first string of exactly `horizon` actions maximising `f`.
pub fn brute_force_optimum<F: StringFunction + ?Sized>(f: &F, horizon: usize) -> Result<(ActionString, f64)> {
    brute_force_optimum_within(f, horizon, DEFAULT_ENUMERATION_BUDGET)
}

pub fn brute_force_optimum_within<F: StringFunction + ?Sized>(
    f: &F,
    horizon: usize,
    budget: u64,
) -> Result<(ActionString, f64)> {
    f.require_len(horizon)?;
    let mut best: Option<(ActionString, f64)> = None;
    for s in enumerate_strings_within(f.action_count(), horizon, budget)? {
        let v = f.eval(&s);
        if best.as_ref().is_none_or(|(_, bv)| v > *bv) {
            best = Some((s, v));
        }
    }
    best.ok_or_else(|| Error::InvalidArgument("no strings to search".into()))
}

/// Every string of exactly `horizon` actions attaining the maximum, in lexicographic order.
pub fn brute_force_optima<F: StringFunction + ?Sized>(f: &F, horizon: usize, budget: u64) -> Result<(Vec<ActionString>, f64)> {
    f.require_len(horizon)?;
    let mut best = f64::NEG_INFINITY;
    let mut all = Vec::new();
    for s in enumerate_strings_within(f.action_count(), horizon, budget)? {
        let v = f.eval(&s);
        if v > best {
            best = v;
            all.clear();
            all.push(s);
        } else if v == best {
            all.push(s);
        }
    }
    Ok((all, best))
}

/// Floor from the total backward curvature with respect to the optimum:
/// `(1/σ)(1 - (1 - σ/K)^K)`.
pub fn bound_thm1_i(sigma_o: f64, horizon: usize) -> Result<f64> {
    if sigma_o.is_nan() || sigma_o <= 0.0 {
        return Err(Error::NonpositiveCurvature(sigma_o));
    }
    let k = horizon as f64;
    Ok((1.0 - (1.0 - sigma_o / k).powi(horizon as i32)) / sigma_o)
}

/// The horizon-free limit `(1/σ)(1 - e^{-σ})` of [`bound_thm1_i`].
pub fn bound_thm1_i_limit(sigma: f64) -> Result<f64> {
    if sigma.is_nan() || sigma <= 0.0 {
        return Err(Error::NonpositiveCurvature(sigma));
    }
    Ok(-(-sigma).exp_m1() / sigma)
}

/// Floor from forward curvatures along the greedy prefixes: `1 - max ε(G_i)`.
pub fn bound_thm1_ii(epsilons: &[f64]) -> Result<f64> {
    epsilons
        .iter()
        .copied()
        .reduce(f64::max)
        .map(|m| 1.0 - m)
        .ok_or_else(|| Error::InvalidArgument("forward curvature list is empty".into()))
}

/// `K_η = (1 - η^K)/(1 - η)`, or `K` when `η` is within tolerance of 1.
pub fn k_eta(eta: f64, horizon: usize) -> f64 {
    if (eta - 1.0).abs() <= DEFAULT_TOLERANCE {
        horizon as f64
    } else {
        (1.0 - eta.powi(horizon as i32)) / (1.0 - eta)
    }
}

/// Floor from the elemental forward curvature: `1 - (1 - 1/K_η)^K`.
pub fn bound_thm2(eta: f64, horizon: usize) -> f64 {
    1.0 - (1.0 - 1.0 / k_eta(eta, horizon)).powi(horizon as i32)
}

/// `1 - e^{-1}`.
pub fn universal_floor() -> f64 {
    -(-1f64).exp_m1()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum BoundStatus {
    Holds { floor: f64, margin: f64 },
    Violated { floor: f64, margin: f64 },
    NotApplicable { reason: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub name: String,
    #[serde(flatten)]
    pub status: BoundStatus,
}

impl BoundCheck {
    fn floor(name: &str, floor: f64, ratio: f64, tol: f64) -> Self {
        let margin = ratio - floor;
        let status = if margin >= -tol {
            BoundStatus::Holds { floor, margin }
        } else {
            BoundStatus::Violated { floor, margin }
        };
        BoundCheck { name: name.into(), status }
    }

    fn strict(name: &str, floor: f64, ratio: f64) -> Self {
        let margin = ratio - floor;
        let status = if margin > 0.0 { BoundStatus::Holds { floor, margin } } else { BoundStatus::Violated { floor, margin } };
        BoundCheck { name: name.into(), status }
    }

    fn not_applicable(name: &str, reason: impl Into<String>) -> Self {
        BoundCheck { name: name.into(), status: BoundStatus::NotApplicable { reason: reason.into() } }
    }

    pub fn is_violated(&self) -> bool {
        matches!(self.status, BoundStatus::Violated { .. })
    }

    pub fn is_applicable(&self) -> bool {
        !matches!(self.status, BoundStatus::NotApplicable { .. })
    }
}

/// Everything [`verify_greedy_bounds`] measured.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCertificate {
    pub greedy: GreedyTrace,
    pub optimum: ActionString,
    pub greedy_value: f64,
    pub optimal_value: f64,
    pub ratio: f64,
    pub submodularity: SubmodularityReport,
    pub backward_monotone: bool,
    pub sigma_o: Option<f64>,
    /// `ε(G_i)` for `i = 1..K-1`.
    pub greedy_epsilons: Option<Vec<f64>>,
    pub sigma: Option<f64>,
    pub epsilon: Option<f64>,
    pub eta: Option<f64>,
    /// Whether `f(G_i ⊕ O) ≥ f(O)` for `i = 1..K-1`.
    pub prefix_hypothesis: Option<bool>,
    pub bounds: Vec<BoundCheck>,
}

impl BoundCertificate {
    pub fn holds(&self) -> bool {
        !self.bounds.iter().any(BoundCheck::is_violated)
    }
}

/// Compares the greedy string with the brute-force optimum and evaluates
/// every greedy floor whose hypotheses hold. Hypothesis failures are reported
/// as not applicable, never as violations.
///
/// `cap` bounds the strings explored by the submodularity checks and the
/// global curvatures. Quantities whose domain exceeds `f.max_len()` are
/// reported as not applicable.
pub fn verify_greedy_bounds<F: StringFunction + ?Sized>(f: &F, horizon: usize, cap: usize) -> Result<BoundCertificate> {
    if horizon == 0 {
        return Err(Error::InvalidArgument("horizon must be at least 1".into()));
    }
    let probe = CurvatureProbe::default();
    let tol = probe.tolerance;
    let greedy = greedy_string(f, horizon)?;
    let (optimum, optimal_value) = brute_force_optimum(f, horizon)?;
    let greedy_value = greedy.final_value();
    if optimal_value.is_nan() || optimal_value <= tol {
        return Err(Error::zero_denominator("optimal value f(O)"));
    }
    let ratio = greedy_value / optimal_value;

    let cap = cap.min(f.max_len().saturating_sub(1));
    let submodularity = probe.check_string_submodular(f, cap)?;
    let backward_monotone = probe.backward_monotone_counterexample(f, cap)?.is_none();
    let submodular = submodularity.is_string_submodular();

    let sigma_o = probe.total_backward_wrt(f, &optimum, horizon);
    let greedy_epsilons: Result<Vec<f64>> =
        (1..horizon).map(|i| probe.total_forward_wrt(f, greedy.prefix(i), horizon)).collect();
    let sigma = probe.total_backward(f, cap);
    let epsilon = probe.total_forward(f, cap);
    let eta = probe.elemental_forward(f, cap.min(f.max_len().saturating_sub(2)));
    let prefix_hypothesis: Result<bool> = (1..horizon)
        .map(|i| {
            let joined = greedy.actions.prefix(i).concat(&optimum);
            f.require_len(joined.len())?;
            Ok(f.eval(&joined) >= optimal_value - tol)
        })
        .try_fold(true, |acc, ok: Result<bool>| ok.map(|b| acc && b));

    let mut bounds = Vec::new();
    let not_submodular = "string-submodularity check failed";

    // total backward curvature with respect to O
    bounds.push(match (&sigma_o, submodular) {
        (_, false) => BoundCheck::not_applicable("backward_curvature", not_submodular),
        (Err(e), _) => BoundCheck::not_applicable("backward_curvature", e.to_string()),
        (Ok(s), _) => match bound_thm1_i(*s, horizon) {
            Ok(floor) => BoundCheck::floor("backward_curvature", floor, ratio, tol),
            Err(e) => BoundCheck::not_applicable("backward_curvature", e.to_string()),
        },
    });
    bounds.push(match (&sigma_o, submodular) {
        (Ok(s), true) if *s > 0.0 => BoundCheck::strict("backward_curvature_limit", bound_thm1_i_limit(*s)?, ratio),
        (_, false) => BoundCheck::not_applicable("backward_curvature_limit", not_submodular),
        (Err(e), _) => BoundCheck::not_applicable("backward_curvature_limit", e.to_string()),
        (Ok(s), _) => BoundCheck::not_applicable("backward_curvature_limit", Error::NonpositiveCurvature(*s).to_string()),
    });

    bounds.push(match (&greedy_epsilons, submodular) {
        (_, false) => BoundCheck::not_applicable("forward_curvature", not_submodular),
        (Err(e), _) => BoundCheck::not_applicable("forward_curvature", e.to_string()),
        (Ok(eps), _) if eps.is_empty() => BoundCheck::not_applicable("forward_curvature", "index range 1..K-1 is empty"),
        (Ok(eps), _) => BoundCheck::floor("forward_curvature", bound_thm1_ii(eps)?, ratio, tol),
    });

    // global total curvatures need backward monotonicity as well
    let corollary_ok = submodular && backward_monotone;
    let corollary_reason = if submodular { "backward monotonicity check failed" } else { not_submodular };
    bounds.push(match (&sigma, corollary_ok) {
        (_, false) => BoundCheck::not_applicable("global_backward_curvature", corollary_reason),
        (Err(e), _) => BoundCheck::not_applicable("global_backward_curvature", e.to_string()),
        (Ok(s), _) => match bound_thm1_i(*s, horizon) {
            Ok(floor) => BoundCheck::floor("global_backward_curvature", floor, ratio, tol),
            Err(e) => BoundCheck::not_applicable("global_backward_curvature", e.to_string()),
        },
    });
    bounds.push(match (&epsilon, corollary_ok) {
        (_, false) => BoundCheck::not_applicable("global_forward_curvature", corollary_reason),
        (Err(e), _) => BoundCheck::not_applicable("global_forward_curvature", e.to_string()),
        (Ok(e), _) => BoundCheck::floor("global_forward_curvature", 1.0 - e, ratio, tol),
    });

    let elemental = "elemental_curvature";
    bounds.push(if !submodularity.forward_monotone {
        BoundCheck::not_applicable(elemental, "forward monotonicity check failed")
    } else {
        match (&eta, &prefix_hypothesis) {
            (Err(e), _) | (_, Err(e)) => BoundCheck::not_applicable(elemental, e.to_string()),
            (_, Ok(false)) => BoundCheck::not_applicable(elemental, "f(G_i ⊕ O) ≥ f(O) fails for some i"),
            (Ok(eta), Ok(true)) => BoundCheck::floor(elemental, bound_thm2(*eta, horizon), ratio, tol),
        }
    });

    let universal_ok = submodular && (backward_monotone || matches!(prefix_hypothesis, Ok(true)));
    bounds.push(if universal_ok {
        BoundCheck::strict("universal", universal_floor(), ratio)
    } else {
        BoundCheck::not_applicable("universal", "requires string-submodularity plus backward monotonicity or the prefix hypothesis")
    });

    Ok(BoundCertificate {
        greedy,
        optimum,
        greedy_value,
        optimal_value,
        ratio,
        submodularity,
        backward_monotone,
        sigma_o: sigma_o.ok(),
        greedy_epsilons: greedy_epsilons.ok(),
        sigma: sigma.ok(),
        epsilon: epsilon.ok(),
        eta: eta.ok(),
        prefix_hypothesis: prefix_hypothesis.ok(),
        bounds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{additive, coverage_example, exponential_length, random_coverage};
    use proptest::prelude::*;

    #[test]
    fn greedy_examples() {
        let g = greedy_string(&additive(2, 4), 2).unwrap();
        assert_eq!(g.actions, ActionString::from([0, 0]));
        assert_eq!(g.values, vec![1.0, 2.0]);
        assert_eq!(g.ties, vec![2, 2]);

        let g = greedy_string(&coverage_example(4), 2).unwrap();
        assert_eq!(g.actions, ActionString::from([1, 0]));
        assert_eq!(g.values, vec![2.0, 2.0]);

        let g = greedy_string(&additive(2, 4), 0).unwrap();
        assert!(g.is_empty());
        assert_eq!(g.final_value(), 0.0);
    }

    #[test]
    fn greedy_rejects_long_horizon() {
        assert!(matches!(greedy_string(&additive(2, 2), 3), Err(Error::DomainTooSmall { .. })));
    }

    #[test]
    fn brute_force_examples() {
        assert_eq!(brute_force_optimum(&additive(2, 2), 2).unwrap(), (ActionString::from([0, 0]), 2.0));
        assert_eq!(brute_force_optimum(&coverage_example(2), 2).unwrap(), (ActionString::from([0, 1]), 2.0));
        assert_eq!(brute_force_optimum(&coverage_example(2), 1).unwrap(), (ActionString::from([1]), 2.0));
        let (all, best) = brute_force_optima(&coverage_example(2), 2, 100).unwrap();
        assert_eq!(best, 2.0);
        assert_eq!(all.len(), 3);
        assert!(matches!(
            brute_force_optimum_within(&additive(4, 20), 20, 1000),
            Err(Error::EnumerationBudgetExceeded { .. })
        ));
    }

    #[test]
    fn backward_floor_closed_forms() {
        assert!((bound_thm1_i(1.0, 2).unwrap() - 0.75).abs() < 1e-15);
        assert!((bound_thm1_i(0.5, 2).unwrap() - 0.875).abs() < 1e-15);
        let large = bound_thm1_i(1.0, 100_000).unwrap();
        assert!(large > universal_floor());
        assert!(large - universal_floor() < 1e-5);
        assert!(matches!(bound_thm1_i(0.0, 3), Err(Error::NonpositiveCurvature(_))));
    }

    #[test]
    fn forward_floor_examples() {
        assert_eq!(bound_thm1_ii(&[0.0, 0.0]).unwrap(), 1.0);
        assert!((bound_thm1_ii(&[0.3, 0.1]).unwrap() - 0.7).abs() < 1e-15);
        assert_eq!(bound_thm1_ii(&[1.0]).unwrap(), 0.0);
        assert!(bound_thm1_ii(&[]).is_err());
    }

    #[test]
    fn k_eta_and_elemental_floor() {
        assert_eq!(k_eta(1.0, 5), 5.0);
        assert!((k_eta(0.5, 2) - 1.5).abs() < 1e-15);
        assert!((k_eta(2.0, 2) - 3.0).abs() < 1e-15);
        assert_eq!(bound_thm2(1.0, 1), 1.0);
        assert!((bound_thm2(1.0, 2) - 0.75).abs() < 1e-15);
        let large = bound_thm2(1.0, 100_000);
        assert!(large > universal_floor() && large - universal_floor() < 1e-5);
    }

    #[test]
    fn certificate_additive() {
        let c = verify_greedy_bounds(&additive(2, 6), 2, 3).unwrap();
        assert_eq!(c.ratio, 1.0);
        assert!(c.holds());
        assert!(c.submodularity.is_string_submodular());
    }

    #[test]
    fn certificate_coverage() {
        let c = verify_greedy_bounds(&coverage_example(6), 2, 3).unwrap();
        assert_eq!(c.greedy_value, 2.0);
        assert_eq!(c.optimal_value, 2.0);
        assert_eq!(c.ratio, 1.0);
        assert!(c.holds());
        assert!(c.bounds.iter().filter(|b| b.is_applicable()).count() >= 4);
    }

    #[test]
    fn certificate_exponential_not_applicable() {
        let c = verify_greedy_bounds(&exponential_length(2, 6), 2, 3).unwrap();
        assert!(!c.submodularity.diminishing_returns);
        for name in ["backward_curvature", "forward_curvature", "global_backward_curvature", "global_forward_curvature", "universal"] {
            let b = c.bounds.iter().find(|b| b.name == name).unwrap();
            assert!(!b.is_applicable(), "{name} should be not applicable");
        }
        assert!(c.holds());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn backward_floor_decreasing_in_horizon(sigma in 0.01f64..=1.0, k in 1usize..40) {
            let a = bound_thm1_i(sigma, k).unwrap();
            let b = bound_thm1_i(sigma, k + 1).unwrap();
            prop_assert!(b < a);
            prop_assert!(b > bound_thm1_i_limit(sigma).unwrap());
        }

        #[test]
        fn greedy_matches_brute_force_at_horizon_one(seed in 0u64..5000, c in 1usize..5) {
            let f = random_coverage(seed, c, 6, 3).unwrap();
            let g = greedy_string(&f, 1).unwrap();
            let (_, best) = brute_force_optimum(&f, 1).unwrap();
            prop_assert_eq!(g.final_value(), best);
        }
    }
}
