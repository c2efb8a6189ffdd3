//! Built-in string-function families used by tests, the acceptance suite and
//! the `submodular` subcommand.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::string::FnStringFunction;

/// `f(M) = |M|`.
pub fn additive(action_count: usize, max_len: usize) -> FnStringFunction {
    FnStringFunction::new("additive", action_count, max_len, |m| m.len() as f64)
}

/// `f(M) = 2^|M| - 1`; forward monotone but without diminishing returns.
pub fn exponential_length(action_count: usize, max_len: usize) -> FnStringFunction {
    FnStringFunction::new("exponential", action_count, max_len, |m| 2f64.powi(m.len() as i32) - 1.0)
}

/// Weighted coverage lifted to strings: the value of a string is the total
/// weight of the union of the sets its actions select. Order-insensitive.
pub fn weighted_coverage(sets: Vec<Vec<usize>>, weights: Vec<f64>, max_len: usize) -> Result<FnStringFunction> {
    if weights.len() > 64 {
        return Err(Error::InvalidArgument("coverage universe is limited to 64 elements".into()));
    }
    if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(Error::InvalidArgument("coverage weights must be finite and nonnegative".into()));
    }
    let mut masks = Vec::with_capacity(sets.len());
    for (a, set) in sets.iter().enumerate() {
        let mut mask = 0u64;
        for &e in set {
            if e >= weights.len() {
                return Err(Error::InvalidArgument(format!("set {a} contains element {e} outside the universe")));
            }
            mask |= 1 << e;
        }
        masks.push(mask);
    }
    let action_count = masks.len();
    Ok(FnStringFunction::new("coverage", action_count, max_len, move |m| {
        let covered = m.iter().fold(0u64, |acc, &a| acc | masks[a]);
        // fixed element order keeps the sum reproducible
        weights.iter().enumerate().filter(|(e, _)| covered >> e & 1 == 1).map(|(_, w)| w).sum()
    }))
}

/// The two-action coverage example: `S_0 = {1}`, `S_1 = {1, 2}`, unit weights.
pub fn coverage_example(max_len: usize) -> FnStringFunction {
    weighted_coverage(vec![vec![0], vec![0, 1]], vec![1.0, 1.0], max_len).expect("static example is valid")
}

/// Random weighted coverage with nonempty sets and weights on a 1/64 grid in `[0.25, 4]`.
pub fn random_coverage(seed: u64, action_count: usize, universe: usize, max_len: usize) -> Result<FnStringFunction> {
    if universe == 0 || universe > 64 {
        return Err(Error::InvalidArgument("universe must be in 1..=64".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights: Vec<f64> = (0..universe).map(|_| rng.gen_range(16..=256) as f64 / 64.0).collect();
    let sets = (0..action_count)
        .map(|_| {
            let mut set: Vec<usize> = (0..universe).filter(|_| rng.gen_bool(0.4)).collect();
            if set.is_empty() {
                set.push(rng.gen_range(0..universe));
            }
            set
        })
        .collect();
    weighted_coverage(sets, weights, max_len)
}

/// `f(M) = Σ_i gamma^(i-1) · values[m_i]`: additive with a stage discount.
/// String-submodular whenever `0 < gamma ≤ 1` and all values are positive.
pub fn discounted_additive(values: Vec<f64>, gamma: f64, max_len: usize) -> FnStringFunction {
    let action_count = values.len();
    FnStringFunction::new("discounted", action_count, max_len, move |m| {
        let mut total = 0.0;
        let mut scale = 1.0;
        for &a in m {
            total += scale * values[a];
            scale *= gamma;
        }
        total
    })
}

pub fn random_discounted(seed: u64, action_count: usize, max_len: usize) -> FnStringFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..action_count).map(|_| rng.gen_range(16..=256) as f64 / 64.0).collect();
    let gamma = rng.gen_range(8..=16) as f64 / 16.0;
    discounted_additive(values, gamma, max_len)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::string::StringFunction;

    #[test]
    fn coverage_example_values() {
        let f = coverage_example(4);
        assert_eq!(f.eval(&[0]), 1.0);
        assert_eq!(f.eval(&[1]), 2.0);
        assert_eq!(f.eval(&[0, 1]), 2.0);
        assert_eq!(f.eval(&[1, 0, 0]), 2.0);
    }

    #[test]
    fn exponential_is_marginalised() {
        let f = exponential_length(1, 4);
        assert_eq!(f.eval(&[]), 0.0);
        assert_eq!(f.eval(&[0, 0, 0]), 7.0);
    }

    #[test]
    fn coverage_rejects_out_of_universe() {
        assert!(weighted_coverage(vec![vec![3]], vec![1.0; 2], 2).is_err());
    }

    #[test]
    fn random_coverage_is_deterministic() {
        let a = random_coverage(7, 3, 5, 4).unwrap();
        let b = random_coverage(7, 3, 5, 4).unwrap();
        for s in [[0usize, 1].as_slice(), &[2], &[1, 2, 0]] {
            assert_eq!(a.eval(s), b.eval(s));
        }
        assert!((0..3).all(|x| a.eval(&[x]) > 0.0));
    }

    #[test]
    fn discounted_values() {
        let f = discounted_additive(vec![1.0, 2.0], 0.5, 3);
        assert_eq!(f.eval(&[1, 1, 0]), 2.0 + 1.0 + 0.25);
    }
}
