//! Textual ADP scheme specs, as accepted on the command line.
//!
//! ```text
//! myopic
//! optimal
//! rollout:const<k> | rollout:myopic | rollout:table:<file> | rollout:random
//! table | table:<file> | table:random
//! ```
//!
//! `table` alone uses the `vtg_table` embedded in the instance file. The
//! `random` variants draw from the run seed.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::adp::{myopic_vtg, optimal_vtg, rollout_vtg, table_vtg, VtgApproximator};
use crate::control::{ControlInstance, Policy};
use crate::error::{Error, Result};
use crate::generate::{random_policy, random_vtg_table};
use crate::instance::{load_policy, load_vtg_table};

/// Upper end of a random table entry per remaining stage.
pub const RANDOM_TABLE_SCALE: f64 = 10.0;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BaseSpec {
    Const(usize),
    Myopic,
    Table(PathBuf),
    Random,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TableSource {
    Embedded,
    File(PathBuf),
    Random,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SchemeSpec {
    Myopic,
    Optimal,
    Rollout(BaseSpec),
    Table(TableSource),
}

impl FromStr for BaseSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "myopic" => Ok(BaseSpec::Myopic),
            "random" => Ok(BaseSpec::Random),
            _ => {
                if let Some(path) = s.strip_prefix("table:") {
                    return nonempty(path).map(|p| BaseSpec::Table(p.into()));
                }
                if let Some(k) = s.strip_prefix("const") {
                    return k
                        .parse()
                        .map(BaseSpec::Const)
                        .map_err(|_| Error::InvalidArgument(format!("bad constant base policy {s:?}")));
                }
                Err(Error::InvalidArgument(format!("unknown base policy {s:?}; expected const<k>, myopic, table:<file> or random")))
            }
        }
    }
}

impl FromStr for SchemeSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "myopic" => Ok(SchemeSpec::Myopic),
            "optimal" => Ok(SchemeSpec::Optimal),
            "table" => Ok(SchemeSpec::Table(TableSource::Embedded)),
            "table:random" => Ok(SchemeSpec::Table(TableSource::Random)),
            _ => {
                if let Some(base) = s.strip_prefix("rollout:") {
                    return base.parse().map(SchemeSpec::Rollout);
                }
                if let Some(path) = s.strip_prefix("table:") {
                    return nonempty(path).map(|p| SchemeSpec::Table(TableSource::File(p.into())));
                }
                Err(Error::InvalidArgument(format!("unknown scheme {s:?}; expected myopic, rollout:<base>, optimal or table[:<file>]")))
            }
        }
    }
}

fn nonempty(path: &str) -> Result<&str> {
    if path.is_empty() {
        Err(Error::InvalidArgument("empty file path".into()))
    } else {
        Ok(path)
    }
}

impl fmt::Display for BaseSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BaseSpec::Const(k) => write!(f, "const{k}"),
            BaseSpec::Myopic => f.write_str("myopic"),
            BaseSpec::Table(p) => write!(f, "table:{}", p.display()),
            BaseSpec::Random => f.write_str("random"),
        }
    }
}

impl fmt::Display for SchemeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SchemeSpec::Myopic => f.write_str("myopic"),
            SchemeSpec::Optimal => f.write_str("optimal"),
            SchemeSpec::Rollout(b) => write!(f, "rollout:{b}"),
            SchemeSpec::Table(TableSource::Embedded) => f.write_str("table"),
            SchemeSpec::Table(TableSource::File(p)) => write!(f, "table:{}", p.display()),
            SchemeSpec::Table(TableSource::Random) => f.write_str("table:random"),
        }
    }
}

impl BaseSpec {
    pub fn build(&self, inst: &ControlInstance, seed: u64) -> Result<Policy> {
        match self {
            BaseSpec::Const(k) => Policy::constant(inst, *k),
            BaseSpec::Myopic => Ok(Policy::myopic(inst)),
            BaseSpec::Table(path) => load_policy(path, inst),
            BaseSpec::Random => Ok(random_policy(seed, inst)),
        }
    }
}

impl SchemeSpec {
    /// Builds the approximator for `inst`. `embedded` is the instance file's
    /// own `vtg_table`, if any.
    pub fn build(&self, inst: &ControlInstance, embedded: Option<&[Vec<Vec<f64>>]>, seed: u64) -> Result<VtgApproximator> {
        match self {
            SchemeSpec::Myopic => Ok(myopic_vtg()),
            SchemeSpec::Optimal => Ok(optimal_vtg(inst)),
            SchemeSpec::Rollout(base) => rollout_vtg(inst, &base.build(inst, seed)?),
            SchemeSpec::Table(TableSource::Embedded) => match embedded {
                Some(t) => table_vtg(inst, t.to_vec()),
                None => Err(Error::InvalidArgument("scheme `table` needs a vtg_table in the instance file".into())),
            },
            SchemeSpec::Table(TableSource::File(path)) => table_vtg(inst, load_vtg_table(path)?),
            SchemeSpec::Table(TableSource::Random) => table_vtg(inst, random_vtg_table(seed, inst, RANDOM_TABLE_SCALE)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adp::VtgKind;
    use crate::generate::builtin_tiny;

    #[test]
    fn parse_and_display_round_trip() {
        for s in ["myopic", "optimal", "rollout:const0", "rollout:const12", "rollout:myopic", "rollout:random", "rollout:table:p.json", "table", "table:w.json", "table:random"] {
            let spec: SchemeSpec = s.parse().unwrap();
            assert_eq!(spec.to_string(), s);
        }
    }

    #[test]
    fn rejects_garbage() {
        for s in ["", "greedy", "rollout:", "rollout:constx", "rollout:table:", "table:"] {
            assert!(s.parse::<SchemeSpec>().is_err(), "{s}");
        }
    }

    #[test]
    fn builds_each_kind() {
        let tiny = builtin_tiny();
        let kind = |s: &str| s.parse::<SchemeSpec>().unwrap().build(&tiny, None, 1).unwrap().kind();
        assert_eq!(kind("myopic"), VtgKind::Myopic);
        assert_eq!(kind("optimal"), VtgKind::Optimal);
        assert_eq!(kind("rollout:const1"), VtgKind::Rollout);
        assert_eq!(kind("table:random"), VtgKind::Table);
        assert!("rollout:const5".parse::<SchemeSpec>().unwrap().build(&tiny, None, 1).is_err());
        assert!("table".parse::<SchemeSpec>().unwrap().build(&tiny, None, 1).is_err());
    }
}
