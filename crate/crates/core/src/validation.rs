//! Machine-readable validation findings shared by both rule representations.

use std::fmt;

use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ViolationCode {
    /// Number of phantoms differs from `a + 1`.
    PhantomCount,
    /// Smallest phantom is neither the smallest point nor the smallest pair.
    LowestPhantom,
    /// Largest phantom is neither the largest point nor the largest pair.
    HighestPhantom,
    /// A pair phantom appears although there are no single-dipped agents.
    PairPhantomWithoutDipped,
    /// A quota set is keyed by a pair outside the reachable pairs, or one is missing.
    QuotaKeys,
    /// Quota bounds: `qA <= a` and `1 <= qD <= d`.
    QuotaBounds,
    /// Quotas of one pair are not pairwise incomparable.
    QuotaAntichain,
    /// No quota carries the minimal peaked-agent count for its pair.
    QuotaMinimalPeaked,
    /// More quotas than phantoms sitting at the pair.
    QuotaCount,
    /// The first-step range misses both the smallest point and smallest pair.
    RangeLow,
    /// The first-step range misses both the largest point and largest pair.
    RangeHigh,
    /// An interior point is missing from the first-step range.
    RangeInterior,
    /// Empty family, threshold above `a`, or a coalition with a non-peaked agent.
    CoalitionBounds,
    /// Left coalition families shrink from left to right.
    CoalitionMonotone,
    /// The empty coalition wins below the top of the range, or fails to win
    /// at the top when the largest point is outside the range.
    EmptyCoalition,
    /// A family is not closed under same-size replacement.
    CoalitionSizeClosure,
    /// The full set of peaked agents is not winning at the top of the range.
    NotWellDefined,
    /// Decisive sets are keyed by a pair outside the range, or one is missing.
    DecisiveKeys,
    /// A decisive coalition contains no single-dipped agent.
    DecisiveNoDipped,
    /// A minimal coalition of the step-one difference is not matched by a decisive set.
    DecisiveCoverage,
    /// Decisive sets are not pairwise incomparable.
    DecisiveAntichain,
    /// Decisive sets are not closed under same-count replacement.
    DecisiveCountClosure,
}

impl ViolationCode {
    /// Stable identifier used in reports and by the command-line tool.
    pub fn code(self) -> &'static str {
        use ViolationCode::*;
        match self {
            PhantomCount => "DEF1_COUNT",
            LowestPhantom => "DEF1_I",
            HighestPhantom => "DEF1_II",
            PairPhantomWithoutDipped => "DEF1_D_EMPTY",
            QuotaKeys => "DEF2_KEYS",
            QuotaBounds => "DEF2_I",
            QuotaAntichain => "DEF2_II",
            QuotaMinimalPeaked => "DEF2_III",
            QuotaCount => "DEF2_BOUND",
            RangeLow => "RANGE_I",
            RangeHigh => "RANGE_II",
            RangeInterior => "RANGE_III",
            CoalitionBounds => "DEF4_BOUNDS",
            CoalitionMonotone => "DEF4_II",
            EmptyCoalition => "DEF4_IV",
            CoalitionSizeClosure => "DEF4_V",
            NotWellDefined => "DEF4_WELL_DEFINED",
            DecisiveKeys => "DEF6_KEYS",
            DecisiveNoDipped => "DEF6_I",
            DecisiveCoverage => "DEF6_II",
            DecisiveAntichain => "DEF6_III",
            DecisiveCountClosure => "DEF6_IV",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    #[serde(serialize_with = "ser_code")]
    pub code: ViolationCode,
    pub detail: String,
}

fn ser_code<S: serde::Serializer>(code: &ViolationCode, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(code.code())
}

impl Violation {
    pub fn new(code: ViolationCode, detail: impl Into<String>) -> Self {
        Violation {
            code,
            detail: detail.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.code.code(), self.detail)
    }
}

/// Result of validating a rule. Warnings never make a rule invalid.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub warnings: Vec<String>,
    /// Identity-dependence findings for rules that do not claim type-anonymity.
    pub anonymity_notes: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, code: ViolationCode) -> bool {
        self.violations.iter().any(|v| v.code == code)
    }
}
