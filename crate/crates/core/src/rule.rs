//! A rule in either representation.

use crate::coalition::CoalitionRule;
use crate::domain::{AgentPartition, AlternativeSpace, Profile};
use crate::error::Result;
use crate::median::{MedianRule, Trace};
use crate::validation::ValidationReport;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Rule {
    Median(MedianRule),
    Coalition(CoalitionRule),
}

impl Rule {
    pub fn space(&self) -> &AlternativeSpace {
        match self {
            Rule::Median(r) => r.space(),
            Rule::Coalition(r) => r.space(),
        }
    }

    pub fn partition(&self) -> AgentPartition {
        match self {
            Rule::Median(r) => r.partition(),
            Rule::Coalition(r) => r.partition(),
        }
    }

    pub fn eval(&self, profile: &Profile) -> Result<usize> {
        match self {
            Rule::Median(r) => r.eval(profile),
            Rule::Coalition(r) => r.eval(profile),
        }
    }

    /// Outcome for a profile already known to fit the rule.
    pub fn outcome(&self, profile: &Profile) -> usize {
        match self {
            Rule::Median(r) => r.outcome(profile),
            Rule::Coalition(r) => r.outcome(profile),
        }
    }

    pub fn trace(&self, profile: &Profile) -> Result<Trace> {
        match self {
            Rule::Median(r) => r.trace(profile),
            Rule::Coalition(r) => r.trace(profile),
        }
    }

    pub fn validate(&self) -> ValidationReport {
        match self {
            Rule::Median(r) => r.validate(),
            Rule::Coalition(r) => r.validate(),
        }
    }

    pub fn representation(&self) -> &'static str {
        match self {
            Rule::Median(_) => "median",
            Rule::Coalition(_) => "coalition",
        }
    }
}

impl From<MedianRule> for Rule {
    fn from(r: MedianRule) -> Self {
        Rule::Median(r)
    }
}

impl From<CoalitionRule> for Rule {
    fn from(r: CoalitionRule) -> Self {
        Rule::Coalition(r)
    }
}
