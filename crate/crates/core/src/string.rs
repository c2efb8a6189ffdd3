//! Strings of actions and functions defined on them.
//!
//! Actions are dense indices `0..action_count`. A string is an ordered
//! sequence of actions; order matters, so `(0, 1)` and `(1, 0)` are distinct.

use std::fmt;
use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::DEFAULT_ENUMERATION_BUDGET;

/// An ordered, finite sequence of action indices.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ActionString(Vec<usize>);

impl ActionString {
    /// The empty string.
    pub fn empty() -> Self {
        ActionString(Vec::new())
    }

    pub fn new(actions: Vec<usize>) -> Self {
        ActionString(actions)
    }

    pub fn single(action: usize) -> Self {
        ActionString(vec![action])
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }

    pub fn push(&mut self, action: usize) {
        self.0.push(action);
    }

    /// `self ⊕ other`.
    pub fn concat(&self, other: &[usize]) -> ActionString {
        let mut out = Vec::with_capacity(self.0.len() + other.len());
        out.extend_from_slice(&self.0);
        out.extend_from_slice(other);
        ActionString(out)
    }

    /// The first `len` actions. Panics if `len > self.len()`.
    pub fn prefix(&self, len: usize) -> ActionString {
        ActionString(self.0[..len].to_vec())
    }

    pub fn is_prefix_of(&self, other: &[usize]) -> bool {
        is_prefix(&self.0, other)
    }

    /// True when every action is below `action_count`.
    pub fn fits(&self, action_count: usize) -> bool {
        self.0.iter().all(|&a| a < action_count)
    }
}

impl Deref for ActionString {
    type Target = [usize];

    fn deref(&self) -> &[usize] {
        &self.0
    }
}

impl From<Vec<usize>> for ActionString {
    fn from(v: Vec<usize>) -> Self {
        ActionString(v)
    }
}

impl From<&[usize]> for ActionString {
    fn from(v: &[usize]) -> Self {
        ActionString(v.to_vec())
    }
}

impl<const N: usize> From<[usize; N]> for ActionString {
    fn from(v: [usize; N]) -> Self {
        ActionString(v.to_vec())
    }
}

impl fmt::Display for ActionString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "()");
        }
        write!(f, "(")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

/// `m ⊕ n`.
pub fn concat(m: &[usize], n: &[usize]) -> ActionString {
    let mut out = Vec::with_capacity(m.len() + n.len());
    out.extend_from_slice(m);
    out.extend_from_slice(n);
    ActionString(out)
}

/// True iff `n = m ⊕ l` for some string `l`.
pub fn is_prefix(m: &[usize], n: &[usize]) -> bool {
    m.len() <= n.len() && n[..m.len()] == *m
}

/// Number of strings of exactly `length` over `action_count` actions, if it fits in `u128`.
pub fn string_count(action_count: usize, length: usize) -> Option<u128> {
    let length = u32::try_from(length).ok()?;
    (action_count as u128).checked_pow(length)
}

/// Lazily yields every string of a fixed length in lexicographic order.
#[derive(Clone, Debug)]
pub struct StringEnumerator {
    action_count: usize,
    current: Vec<usize>,
    done: bool,
}

impl Iterator for StringEnumerator {
    type Item = ActionString;

    fn next(&mut self) -> Option<ActionString> {
        if self.done {
            return None;
        }
        let out = ActionString(self.current.clone());
        // odometer increment, last position fastest
        let mut i = self.current.len();
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            self.current[i] += 1;
            if self.current[i] < self.action_count {
                break;
            }
            self.current[i] = 0;
        }
        Some(out)
    }
}

/// All `action_count^length` strings of exactly `length`, lexicographically,
/// under the default enumeration budget.
pub fn enumerate_strings(action_count: usize, length: usize) -> Result<StringEnumerator> {
    enumerate_strings_within(action_count, length, DEFAULT_ENUMERATION_BUDGET)
}

pub fn enumerate_strings_within(action_count: usize, length: usize, budget: u64) -> Result<StringEnumerator> {
    if action_count == 0 {
        return Err(Error::InvalidArgument("action_count must be at least 1".into()));
    }
    check_budget(string_count(action_count, length), budget)?;
    Ok(StringEnumerator { action_count, current: vec![0; length], done: false })
}

/// Every string with length in `0..=max_len`, shortest first, lexicographic within a length.
pub fn enumerate_up_to(action_count: usize, max_len: usize, budget: u64) -> Result<impl Iterator<Item = ActionString>> {
    if action_count == 0 {
        return Err(Error::InvalidArgument("action_count must be at least 1".into()));
    }
    let total = (0..=max_len).try_fold(0u128, |acc, len| string_count(action_count, len).and_then(|c| acc.checked_add(c)));
    check_budget(total, budget)?;
    Ok((0..=max_len).flat_map(move |len| StringEnumerator { action_count, current: vec![0; len], done: false }))
}

fn check_budget(count: Option<u128>, budget: u64) -> Result<()> {
    match count {
        Some(c) if c <= budget as u128 => Ok(()),
        Some(c) => Err(Error::EnumerationBudgetExceeded { count: c, budget }),
        None => Err(Error::EnumerationBudgetExceeded { count: u128::MAX, budget }),
    }
}

/// A real-valued function on action strings of bounded length.
///
/// Implementations must return `0.0` on the empty string and be deterministic.
pub trait StringFunction {
    fn action_count(&self) -> usize;

    /// Longest string `eval` accepts.
    fn max_len(&self) -> usize;

    fn eval(&self, s: &[usize]) -> f64;

    fn require_len(&self, needed: usize) -> Result<()> {
        if needed > self.max_len() {
            Err(Error::DomainTooSmall { needed, max_len: self.max_len() })
        } else {
            Ok(())
        }
    }
}

impl<F: StringFunction + ?Sized> StringFunction for &F {
    fn action_count(&self) -> usize {
        (**self).action_count()
    }
    fn max_len(&self) -> usize {
        (**self).max_len()
    }
    fn eval(&self, s: &[usize]) -> f64 {
        (**self).eval(s)
    }
}

type EvalFn = dyn Fn(&[usize]) -> f64 + Send + Sync;

/// A [`StringFunction`] backed by a closure, marginalised so that `f(∅) = 0`.
pub struct FnStringFunction {
    name: String,
    action_count: usize,
    max_len: usize,
    offset: f64,
    func: Box<EvalFn>,
}

impl FnStringFunction {
    /// Wraps `func`, subtracting `func(∅)` from every value.
    pub fn new<F>(name: impl Into<String>, action_count: usize, max_len: usize, func: F) -> Self
    where
        F: Fn(&[usize]) -> f64 + Send + Sync + 'static,
    {
        let offset = func(&[]);
        FnStringFunction { name: name.into(), action_count, max_len, offset, func: Box::new(func) }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// The raw value at the empty string that was subtracted.
    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn with_max_len(mut self, max_len: usize) -> Self {
        self.max_len = max_len;
        self
    }
}

impl fmt::Debug for FnStringFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnStringFunction")
            .field("name", &self.name)
            .field("action_count", &self.action_count)
            .field("max_len", &self.max_len)
            .field("offset", &self.offset)
            .finish()
    }
}

impl StringFunction for FnStringFunction {
    fn action_count(&self) -> usize {
        self.action_count
    }

    fn max_len(&self) -> usize {
        self.max_len
    }

    fn eval(&self, s: &[usize]) -> f64 {
        if s.is_empty() {
            return 0.0;
        }
        (self.func)(s) - self.offset
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn s(v: &[usize]) -> ActionString {
        ActionString::from(v)
    }

    #[test]
    fn concat_examples() {
        assert_eq!(concat(&[], &[1, 2]), s(&[1, 2]));
        assert_eq!(concat(&[1], &[2, 1]), s(&[1, 2, 1]));
        assert_eq!(concat(&[0, 1], &[]), s(&[0, 1]));
    }

    #[test]
    fn prefix_examples() {
        assert!(is_prefix(&[1], &[1, 2]));
        assert!(is_prefix(&[], &[0]));
        assert!(!is_prefix(&[2], &[1, 2]));
        assert!(!is_prefix(&[1, 2, 3], &[1, 2]));
    }

    #[test]
    fn enumeration_examples() {
        let e: Vec<_> = enumerate_strings(2, 0).unwrap().collect();
        assert_eq!(e, vec![ActionString::empty()]);

        let e: Vec<_> = enumerate_strings(2, 2).unwrap().collect();
        assert_eq!(e, vec![s(&[0, 0]), s(&[0, 1]), s(&[1, 0]), s(&[1, 1])]);

        let e: Vec<_> = enumerate_strings(3, 2).unwrap().collect();
        assert_eq!(e.len(), 9);
        assert_eq!(e[0], s(&[0, 0]));
        assert_eq!(e[8], s(&[2, 2]));
    }

    #[test]
    fn enumeration_budget() {
        assert!(matches!(enumerate_strings(10, 8), Err(Error::EnumerationBudgetExceeded { .. })));
        assert!(enumerate_strings(10, 7).is_ok());
        assert!(matches!(enumerate_strings(3, 1000), Err(Error::EnumerationBudgetExceeded { .. })));
        assert!(matches!(enumerate_strings(0, 1), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn enumerate_up_to_orders_by_length() {
        let e: Vec<_> = enumerate_up_to(2, 2, 100).unwrap().collect();
        assert_eq!(e.len(), 7);
        assert_eq!(e[0], ActionString::empty());
        assert_eq!(e[1], s(&[0]));
        assert_eq!(e[3], s(&[0, 0]));
    }

    #[test]
    fn marginalisation() {
        let f = FnStringFunction::new("plus3", 2, 4, |m| m.len() as f64 + 3.0);
        assert_eq!(f.eval(&[]), 0.0);
        assert_eq!(f.eval(&[1, 0]), 2.0);
        assert_eq!(f.offset(), 3.0);
    }

    #[test]
    fn display() {
        assert_eq!(ActionString::empty().to_string(), "()");
        assert_eq!(s(&[1, 0, 2]).to_string(), "(1,0,2)");
    }

    fn small_string() -> impl Strategy<Value = Vec<usize>> {
        prop::collection::vec(0usize..3, 0..5)
    }

    proptest! {
        #[test]
        fn concat_is_associative(a in small_string(), b in small_string(), c in small_string()) {
            let left = concat(&concat(&a, &b), &c);
            let right = concat(&a, &concat(&b, &c));
            prop_assert_eq!(left, right);
        }

        #[test]
        fn mutual_prefix_iff_equal(a in small_string(), b in small_string()) {
            prop_assert_eq!(is_prefix(&a, &b) && is_prefix(&b, &a), a == b);
        }

        #[test]
        fn enumeration_is_complete_and_distinct(c in 1usize..4, len in 0usize..5) {
            let all: Vec<_> = enumerate_strings(c, len).unwrap().collect();
            prop_assert_eq!(all.len() as u128, string_count(c, len).unwrap());
            prop_assert!(all.windows(2).all(|w| w[0] < w[1]));
        }
    }
}
