//! Strategy-proof social choice on a line when voters are single-peaked or
//! single-dipped: generalized median rules with double quotas, their
//! coalition-system counterparts, conversions between the two, and
//! brute-force audits of strategy-proofness and type-anonymity.

pub mod audit;
pub mod cli;
pub mod coalition;
pub mod coalitions;
pub mod domain;
pub mod error;
pub mod io;
pub mod median;
pub mod rule;
pub mod transform;
pub mod validation;

pub use coalition::{CoalitionFamily, CoalitionRule, DecisiveFamily, DecisiveSets, LeftCoalitionSystem, RangeSpec};
pub use coalitions::Coalition;
pub use domain::{AgentPartition, AlternativeSpace, ExtElem, PreferenceType, Profile, Ranking, Rational, Side};
pub use error::{Error, Result};
pub use median::{DoubleQuota, MedianRule, PhantomVector, QuotaSet, Trace};
pub use rule::Rule;
pub use validation::{ValidationReport, Violation, ViolationCode};
