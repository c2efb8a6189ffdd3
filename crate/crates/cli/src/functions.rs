//! Built-in string-function specs for the `submodular` command.

use anyhow::{bail, Context, Result};

use adp_core::families::{additive, coverage_example, exponential_length, random_coverage, random_discounted};
use adp_core::FnStringFunction;

fn number(part: Option<&str>, default: usize, what: &str) -> Result<usize> {
    match part {
        None => Ok(default),
        Some(p) => p.parse().with_context(|| format!("bad {what} {p:?}")),
    }
}

/// Builds the function named by `spec`, defined on strings up to `max_len`.
pub fn build(spec: &str, max_len: usize, seed: u64) -> Result<FnStringFunction> {
    let mut parts = spec.split(':');
    let head = parts.next().unwrap_or_default();
    let f = match head {
        "additive" => additive(number(parts.next(), 2, "action count")?, max_len),
        "exp" => exponential_length(number(parts.next(), 1, "action count")?, max_len),
        "coverage" => match parts.next() {
            None => coverage_example(max_len),
            Some("random") => {
                let c = number(parts.next(), 3, "action count")?;
                let universe = number(parts.next(), 6, "universe size")?;
                random_coverage(seed, c, universe, max_len)?
            }
            Some(other) => bail!("unknown coverage variant {other:?}"),
        },
        "discounted" => match parts.next() {
            Some("random") => random_discounted(seed, number(parts.next(), 3, "action count")?, max_len),
            _ => bail!("expected discounted:random[:<c>]"),
        },
        _ => bail!("unknown function {spec:?}"),
    };
    if parts.next().is_some() {
        bail!("trailing fields in {spec:?}");
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use adp_core::StringFunction;

    #[test]
    fn specs() {
        assert_eq!(build("additive:3", 4, 0).unwrap().action_count(), 3);
        assert_eq!(build("exp", 4, 0).unwrap().eval(&[0, 0]), 3.0);
        assert_eq!(build("coverage", 4, 0).unwrap().eval(&[1]), 2.0);
        assert_eq!(build("coverage:random:4:5", 4, 1).unwrap().action_count(), 4);
        assert!(build("discounted:random", 4, 0).is_ok());
        assert!(build("nope", 4, 0).is_err());
        assert!(build("additive:2:9", 4, 0).is_err());
    }
}
