//! Global curvatures of a string function and string-submodularity checks.
//!
//! The curvatures are maxima over every string of actions. Only strings up to
//! a caller-chosen length (`cap`) are explored, so each returned value is a
//! certified lower bound on the true curvature; [`GlobalCurvatures::exhaustive`]
//! records whether the cap reached the whole domain of the function.
//!
//! Zero denominators follow one rule everywhere: the total curvatures require
//! every singleton gain `f((a)) - f(∅)` to exceed the tolerance, while the
//! elemental curvature skips `0/0` pairs and rejects `x/0` with `x > 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::string::{concat, enumerate_strings_within, enumerate_up_to, ActionString, StringFunction};
use crate::{DEFAULT_ENUMERATION_BUDGET, DEFAULT_TOLERANCE};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlobalCurvatures {
    /// Total backward curvature.
    pub sigma: f64,
    /// Total forward curvature.
    pub epsilon: f64,
    /// Elemental forward curvature.
    pub eta: f64,
    /// Total backward curvature with respect to the reference string, if one was given.
    pub sigma_wrt: Option<f64>,
    /// Total forward curvature with respect to the reference string, if one was given.
    pub epsilon_wrt: Option<f64>,
    /// Longest prefix string `M` explored.
    pub search_cap: usize,
    pub exhaustive: bool,
}

/// Outcome of [`CurvatureProbe::check_string_submodular`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubmodularityReport {
    pub forward_monotone: bool,
    pub diminishing_returns: bool,
    /// First `(M, N)` with `M ⪯ N` and `f(M) > f(N)`.
    pub monotone_counterexample: Option<(ActionString, ActionString)>,
    /// First `(M, N, a)` with `M ⪯ N` whose gain from appending `a` grows.
    pub diminishing_counterexample: Option<(ActionString, ActionString, usize)>,
    pub cap: usize,
}

impl SubmodularityReport {
    pub fn is_string_submodular(&self) -> bool {
        self.forward_monotone && self.diminishing_returns
    }
}

/// Curvature calculator with an explicit tolerance and enumeration budget.
#[derive(Clone, Copy, Debug)]
pub struct CurvatureProbe {
    pub tolerance: f64,
    pub budget: u64,
}

impl Default for CurvatureProbe {
    fn default() -> Self {
        CurvatureProbe { tolerance: DEFAULT_TOLERANCE, budget: DEFAULT_ENUMERATION_BUDGET }
    }
}

impl CurvatureProbe {
    fn singleton_gains<F: StringFunction + ?Sized>(&self, f: &F) -> Result<Vec<f64>> {
        let base = f.eval(&[]);
        (0..f.action_count())
            .map(|a| {
                let gain = f.eval(&[a]) - base;
                if gain > self.tolerance {
                    Ok(gain)
                } else {
                    Err(Error::zero_denominator(format!("f(({a})) - f(∅) = {gain}")))
                }
            })
            .collect()
    }

    /// `max_{a, |M| ≤ cap} 1 - (f((a) ⊕ M) - f(M)) / (f((a)) - f(∅))`.
    pub fn total_backward<F: StringFunction + ?Sized>(&self, f: &F, cap: usize) -> Result<f64> {
        f.require_len(cap + 1)?;
        let gains = self.singleton_gains(f)?;
        let mut best = f64::NEG_INFINITY;
        for m in enumerate_up_to(f.action_count(), cap, self.budget)? {
            let fm = f.eval(&m);
            for (a, gain) in gains.iter().enumerate() {
                let v = 1.0 - (f.eval(&concat(&[a], &m)) - fm) / gain;
                best = best.max(v);
            }
        }
        Ok(best)
    }

    /// `max_{a, |M| ≤ cap} 1 - (f(M ⊕ (a)) - f(M)) / (f((a)) - f(∅))`.
    pub fn total_forward<F: StringFunction + ?Sized>(&self, f: &F, cap: usize) -> Result<f64> {
        f.require_len(cap + 1)?;
        let gains = self.singleton_gains(f)?;
        let mut best = f64::NEG_INFINITY;
        for m in enumerate_up_to(f.action_count(), cap, self.budget)? {
            let fm = f.eval(&m);
            for (a, gain) in gains.iter().enumerate() {
                let v = 1.0 - (f.eval(&m.concat(&[a])) - fm) / gain;
                best = best.max(v);
            }
        }
        Ok(best)
    }

    /// `max_{0 < |N| ≤ k_max} 1 - (f(N ⊕ M) - f(M)) / (f(N) - f(∅))`.
    pub fn total_backward_wrt<F: StringFunction + ?Sized>(&self, f: &F, m: &[usize], k_max: usize) -> Result<f64> {
        self.wrt(f, m, k_max, concat)
    }

    /// `max_{0 < |N| ≤ k_max} 1 - (f(M ⊕ N) - f(M)) / (f(N) - f(∅))`.
    pub fn total_forward_wrt<F: StringFunction + ?Sized>(&self, f: &F, m: &[usize], k_max: usize) -> Result<f64> {
        self.wrt(f, m, k_max, |n, m| concat(m, n))
    }

    fn wrt<F, J>(&self, f: &F, m: &[usize], k_max: usize, join: J) -> Result<f64>
    where
        F: StringFunction + ?Sized,
        J: Fn(&[usize], &[usize]) -> ActionString,
    {
        if k_max == 0 {
            return Err(Error::InvalidArgument("k_max must be at least 1".into()));
        }
        f.require_len(k_max + m.len())?;
        let base = f.eval(&[]);
        let fm = f.eval(m);
        let mut best = f64::NEG_INFINITY;
        for len in 1..=k_max {
            for n in enumerate_strings_within(f.action_count(), len, self.budget)? {
                let denom = f.eval(&n) - base;
                if denom <= self.tolerance {
                    return Err(Error::zero_denominator(format!("f({n}) - f(∅) = {denom}")));
                }
                let v = 1.0 - (f.eval(&join(&n, m)) - fm) / denom;
                best = best.max(v);
            }
        }
        Ok(best)
    }

    /// `max_{a_i, a_j, |M| ≤ cap} (f(M⊕(a_i)⊕(a_j)) - f(M⊕(a_i))) / (f(M⊕(a_j)) - f(M))`.
    pub fn elemental_forward<F: StringFunction + ?Sized>(&self, f: &F, cap: usize) -> Result<f64> {
        f.require_len(cap + 2)?;
        let c = f.action_count();
        let tol = self.tolerance;
        let mut best: Option<f64> = None;
        for m in enumerate_up_to(c, cap, self.budget)? {
            let fm = f.eval(&m);
            let one: Vec<f64> = (0..c).map(|a| f.eval(&m.concat(&[a]))).collect();
            for ai in 0..c {
                for aj in 0..c {
                    let num = f.eval(&m.concat(&[ai, aj])) - one[ai];
                    let den = one[aj] - fm;
                    if den <= tol {
                        if num <= tol {
                            continue;
                        }
                        return Err(Error::InfiniteCurvature {
                            context: format!("M={m}, a_i={ai}, a_j={aj}: numerator {num} over denominator {den}"),
                        });
                    }
                    let r = num / den;
                    best = Some(best.map_or(r, |b| b.max(r)));
                }
            }
        }
        best.ok_or_else(|| Error::zero_denominator("every elemental ratio is 0/0"))
    }

    /// Checks forward monotonicity over strings up to `cap + 1` and diminishing
    /// returns over `M ⪯ N` with `|N| ≤ cap`.
    pub fn check_string_submodular<F: StringFunction + ?Sized>(&self, f: &F, cap: usize) -> Result<SubmodularityReport> {
        f.require_len(cap + 1)?;
        let c = f.action_count();
        let tol = self.tolerance;

        let mut monotone_counterexample = None;
        'mono: for n in enumerate_up_to(c, cap + 1, self.budget)? {
            let fn_ = f.eval(&n);
            for l in 0..n.len() {
                if f.eval(&n[..l]) > fn_ + tol {
                    monotone_counterexample = Some((n.prefix(l), n.clone()));
                    break 'mono;
                }
            }
        }

        let mut diminishing_counterexample = None;
        'dr: for n in enumerate_up_to(c, cap, self.budget)? {
            let fn_ = f.eval(&n);
            let gains_n: Vec<f64> = (0..c).map(|a| f.eval(&n.concat(&[a])) - fn_).collect();
            for l in 0..n.len() {
                let m = n.prefix(l);
                let fm = f.eval(&m);
                for (a, gn) in gains_n.iter().enumerate() {
                    let gm = f.eval(&m.concat(&[a])) - fm;
                    if gm < gn - tol {
                        diminishing_counterexample = Some((m, n.clone(), a));
                        break 'dr;
                    }
                }
            }
        }

        Ok(SubmodularityReport {
            forward_monotone: monotone_counterexample.is_none(),
            diminishing_returns: diminishing_counterexample.is_none(),
            monotone_counterexample,
            diminishing_counterexample,
            cap,
        })
    }

    /// First `(M, N)` with `|M| + |N| ≤ cap + 1` and `f(M ⊕ N) < f(N)`, if any.
    pub fn backward_monotone_counterexample<F: StringFunction + ?Sized>(
        &self,
        f: &F,
        cap: usize,
    ) -> Result<Option<(ActionString, ActionString)>> {
        f.require_len(cap + 1)?;
        for joined in enumerate_up_to(f.action_count(), cap + 1, self.budget)? {
            let fj = f.eval(&joined);
            for split in 1..joined.len() {
                let tail = &joined[split..];
                if fj < f.eval(tail) - self.tolerance {
                    return Ok(Some((joined.prefix(split), ActionString::from(tail))));
                }
            }
        }
        Ok(None)
    }

    /// All three global curvatures, plus the `wrt` variants for `reference`
    /// (bounded by `k_max`) when given. The cap is clamped to the function's domain.
    pub fn global<F: StringFunction + ?Sized>(
        &self,
        f: &F,
        cap: usize,
        reference: Option<(&[usize], usize)>,
    ) -> Result<GlobalCurvatures> {
        let max_len = f.max_len();
        if max_len < 2 {
            return Err(Error::DomainTooSmall { needed: 2, max_len });
        }
        let cap_total = cap.min(max_len - 1);
        let cap_elemental = cap.min(max_len - 2);
        let (sigma_wrt, epsilon_wrt) = match reference {
            Some((m, k_max)) => {
                (Some(self.total_backward_wrt(f, m, k_max)?), Some(self.total_forward_wrt(f, m, k_max)?))
            }
            None => (None, None),
        };
        Ok(GlobalCurvatures {
            sigma: self.total_backward(f, cap_total)?,
            epsilon: self.total_forward(f, cap_total)?,
            eta: self.elemental_forward(f, cap_elemental)?,
            sigma_wrt,
            epsilon_wrt,
            search_cap: cap_total,
            exhaustive: cap_total + 1 >= max_len,
        })
    }
}

pub fn total_backward_curvature<F: StringFunction + ?Sized>(f: &F, cap: usize) -> Result<f64> {
    CurvatureProbe::default().total_backward(f, cap)
}

pub fn total_backward_wrt<F: StringFunction + ?Sized>(f: &F, m: &[usize], k_max: usize) -> Result<f64> {
    CurvatureProbe::default().total_backward_wrt(f, m, k_max)
}

pub fn total_forward_curvature<F: StringFunction + ?Sized>(f: &F, cap: usize) -> Result<f64> {
    CurvatureProbe::default().total_forward(f, cap)
}

pub fn total_forward_wrt<F: StringFunction + ?Sized>(f: &F, m: &[usize], k_max: usize) -> Result<f64> {
    CurvatureProbe::default().total_forward_wrt(f, m, k_max)
}

pub fn elemental_forward_curvature<F: StringFunction + ?Sized>(f: &F, cap: usize) -> Result<f64> {
    CurvatureProbe::default().elemental_forward(f, cap)
}

pub fn check_string_submodular<F: StringFunction + ?Sized>(f: &F, cap: usize) -> Result<SubmodularityReport> {
    CurvatureProbe::default().check_string_submodular(f, cap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{additive, coverage_example, exponential_length, random_coverage, random_discounted};
    use proptest::prelude::*;

    #[test]
    fn total_backward_examples() {
        assert_eq!(total_backward_curvature(&additive(2, 3), 2).unwrap(), 0.0);
        assert_eq!(total_backward_curvature(&coverage_example(3), 2).unwrap(), 1.0);
        assert_eq!(total_backward_curvature(&additive(3, 2), 1).unwrap(), 0.0);
    }

    #[test]
    fn total_backward_errors() {
        assert!(matches!(total_backward_curvature(&additive(2, 2), 2), Err(Error::DomainTooSmall { .. })));
        let flat = crate::string::FnStringFunction::new("flat", 2, 4, |m| if m.first() == Some(&1) { 1.0 } else { 0.0 });
        assert!(matches!(total_backward_curvature(&flat, 1), Err(Error::ZeroDenominator { .. })));
    }

    #[test]
    fn wrt_examples() {
        let cov = coverage_example(4);
        assert_eq!(total_backward_wrt(&cov, &[], 1).unwrap(), 0.0);
        assert_eq!(total_backward_wrt(&additive(2, 4), &[1, 0], 2).unwrap(), 0.0);
        assert_eq!(total_backward_wrt(&cov, &[1], 1).unwrap(), 1.0);

        assert_eq!(total_forward_wrt(&cov, &[], 2).unwrap(), 0.0);
        assert_eq!(total_forward_wrt(&additive(2, 4), &[0, 1], 2).unwrap(), 0.0);
        assert_eq!(total_forward_wrt(&cov, &[1], 1).unwrap(), 1.0);
        assert!(matches!(total_forward_wrt(&cov, &[1, 1, 1, 1], 1), Err(Error::DomainTooSmall { .. })));
    }

    #[test]
    fn total_forward_examples() {
        assert_eq!(total_forward_curvature(&additive(2, 3), 2).unwrap(), 0.0);
        assert_eq!(total_forward_curvature(&coverage_example(3), 2).unwrap(), 1.0);
        let weird = crate::string::FnStringFunction::new("sq", 2, 1, |m| m.iter().map(|a| (a + 1) * (a + 1)).sum::<usize>() as f64 + 3.0);
        assert_eq!(total_forward_curvature(&weird, 0).unwrap(), 0.0);
    }

    #[test]
    fn elemental_examples() {
        assert_eq!(elemental_forward_curvature(&additive(2, 3), 1).unwrap(), 1.0);
        assert_eq!(elemental_forward_curvature(&coverage_example(3), 1).unwrap(), 1.0);
        assert_eq!(elemental_forward_curvature(&exponential_length(1, 3), 1).unwrap(), 2.0);
        assert!(matches!(elemental_forward_curvature(&additive(2, 2), 1), Err(Error::DomainTooSmall { .. })));
    }

    #[test]
    fn elemental_infinite() {
        // appending 1 gains nothing at first but something after a 0
        let f = crate::string::FnStringFunction::new("gate", 2, 3, |m| {
            let mut v = 0.0;
            let mut opened = false;
            for &a in m {
                if a == 0 {
                    opened = true;
                    v += 1.0;
                } else if opened {
                    v += 1.0;
                }
            }
            v
        });
        assert!(matches!(elemental_forward_curvature(&f, 1), Err(Error::InfiniteCurvature { .. })));
    }

    #[test]
    fn submodularity_examples() {
        let r = check_string_submodular(&additive(2, 4), 3).unwrap();
        assert!(r.is_string_submodular());
        let r = check_string_submodular(&coverage_example(4), 3).unwrap();
        assert!(r.is_string_submodular());

        let r = check_string_submodular(&exponential_length(1, 4), 3).unwrap();
        assert!(r.forward_monotone);
        assert!(!r.diminishing_returns);
        assert_eq!(r.diminishing_counterexample, Some((ActionString::empty(), ActionString::from([0]), 0)));
    }

    #[test]
    fn non_monotone_counterexample() {
        let f = crate::string::FnStringFunction::new("peak", 2, 3, |m| if m.len() == 1 { 2.0 } else { m.len() as f64 * 0.5 });
        let r = check_string_submodular(&f, 2).unwrap();
        assert!(!r.forward_monotone);
        assert_eq!(r.monotone_counterexample, Some((ActionString::from([0]), ActionString::from([0, 0]))));
    }

    #[test]
    fn backward_monotone() {
        let p = CurvatureProbe::default();
        assert_eq!(p.backward_monotone_counterexample(&coverage_example(4), 3).unwrap(), None);
        // the second action is worth less than when it comes first
        let f = crate::string::FnStringFunction::new("front", 2, 3, |m| m.iter().enumerate().map(|(i, &a)| if i == 0 { 1.0 + a as f64 * 9.0 } else { 1.0 }).sum());
        assert!(p.backward_monotone_counterexample(&f, 1).unwrap().is_some());
    }

    #[test]
    fn global_reports_truncation() {
        let g = CurvatureProbe::default().global(&coverage_example(3), 5, Some((&[1], 1))).unwrap();
        assert!(g.exhaustive);
        assert_eq!(g.search_cap, 2);
        assert_eq!(g.sigma_wrt, Some(1.0));
        let g = CurvatureProbe::default().global(&coverage_example(10), 2, None).unwrap();
        assert!(!g.exhaustive);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn submodular_functions_have_eta_at_most_one(seed in 0u64..10_000, c in 1usize..4, coverage in any::<bool>()) {
            let f = if coverage { random_coverage(seed, c, 5, 5).unwrap() } else { random_discounted(seed, c, 5) };
            let r = check_string_submodular(&f, 3).unwrap();
            prop_assume!(r.is_string_submodular());
            let eta = elemental_forward_curvature(&f, 3).unwrap();
            prop_assert!(eta <= 1.0 + DEFAULT_TOLERANCE);
        }

        #[test]
        fn raising_cap_never_lowers_curvature(seed in 0u64..10_000, c in 1usize..4) {
            let f = random_coverage(seed, c, 4, 5).unwrap();
            for cap in 0..3 {
                prop_assert!(total_backward_curvature(&f, cap + 1).unwrap() >= total_backward_curvature(&f, cap).unwrap());
                prop_assert!(total_forward_curvature(&f, cap + 1).unwrap() >= total_forward_curvature(&f, cap).unwrap());
            }
            if let (Ok(lo), Ok(hi)) = (elemental_forward_curvature(&f, 1), elemental_forward_curvature(&f, 2)) {
                prop_assert!(hi >= lo);
            }
        }

        #[test]
        fn wrt_empty_is_zero(seed in 0u64..10_000, c in 1usize..4, k in 1usize..3) {
            let f = random_discounted(seed, c, 4);
            prop_assert_eq!(total_forward_wrt(&f, &[], k).unwrap(), 0.0);
            prop_assert_eq!(total_backward_wrt(&f, &[], k).unwrap(), 0.0);
        }
    }
}
