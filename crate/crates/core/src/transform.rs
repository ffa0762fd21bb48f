//! Conversions between the median form and the coalition form of a rule.
//!
//! Median to coalition always succeeds for a valid rule: the left coalition
//! at `α` is every set of at least `(a+1) - M̲(α)` peaked agents, where
//! `M̲(α)` counts phantoms at or below `α`, and quotas become decisive
//! member counts. The reverse direction needs the counting form; a rule
//! whose coalitions depend on agent identities is reported as inexpressible.

use crate::coalition::{CoalitionRule, DecisiveFamily, DecisiveSets, LeftCoalitionSystem};
use crate::domain::ExtElem;
use crate::error::{Error, Result};
use crate::median::{DoubleQuota, MedianRule, QuotaSet};
use crate::rule::Rule;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Representation {
    Median,
    Coalition,
}

impl std::str::FromStr for Representation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "median" => Ok(Representation::Median),
            "coalition" => Ok(Representation::Coalition),
            other => Err(Error::Malformed(format!("unknown representation {other:?}"))),
        }
    }
}

/// What a conversion did beyond the mechanical translation.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConversionReport {
    pub notes: Vec<String>,
}

/// Thresholds of the left coalition system induced by a phantom vector.
pub fn phantoms_to_thresholds(rule: &MedianRule) -> Vec<(ExtElem, usize)> {
    let a = rule.partition().peaked();
    let range = rule.first_step_range();
    let top = *range.last().expect("a valid rule has a non-empty range");
    range
        .into_iter()
        .map(|alpha| {
            let k = if alpha != top {
                (a + 1).saturating_sub(rule.count_phantoms_at(alpha).1)
            } else if alpha.is_pair() || a == 0 {
                0
            } else {
                1
            };
            (alpha, k)
        })
        .collect()
}

/// Phantom vector induced by thresholds listed in increasing order.
pub fn thresholds_to_phantoms(a: usize, thresholds: &[(ExtElem, usize)]) -> Vec<ExtElem> {
    let mut phantoms = Vec::with_capacity(a + 1);
    let mut placed = 0;
    let last = thresholds.len().saturating_sub(1);
    for (i, &(alpha, k)) in thresholds.iter().enumerate() {
        let target = if i == last {
            a + 1
        } else {
            (a + 1).saturating_sub(k).max(placed)
        };
        phantoms.extend(std::iter::repeat_n(alpha, target - placed));
        placed = target;
    }
    phantoms
}

pub fn median_to_coalition(rule: &MedianRule) -> Result<(CoalitionRule, ConversionReport)> {
    let lcs = LeftCoalitionSystem::from_thresholds(phantoms_to_thresholds(rule))?;
    let entries = rule
        .quota_sets()
        .map(|qs| (qs.pair(), DecisiveFamily::counts(qs.quotas().to_vec())))
        .collect();
    let decisive = DecisiveSets::new(entries, true)?;
    let out = CoalitionRule::new(rule.space().clone(), rule.partition(), lcs, decisive)?;
    Ok((out, ConversionReport::default()))
}

pub fn coalition_to_median(rule: &CoalitionRule) -> Result<(MedianRule, ConversionReport)> {
    let sp = rule.space();
    let partition = rule.partition();
    let a = partition.peaked();
    let mut report = ConversionReport::default();

    let thresholds = rule
        .lcs()
        .thresholds(a)
        .ok_or_else(|| Error::Inexpressible("left coalitions depend on the identities of peaked agents".into()))?;
    let phantoms = thresholds_to_phantoms(a, &thresholds);

    let mut quota_sets = Vec::new();
    for (pair, family) in rule.decisive().entries() {
        let counts = family.count_pairs(partition).ok_or_else(|| {
            Error::Inexpressible(format!(
                "decisive sets at {} depend on agent identities",
                sp.display(pair)
            ))
        })?;
        if !phantoms.contains(&pair) {
            report
                .notes
                .push(format!("dropped {}: the first step never selects it", sp.display(pair)));
            continue;
        }
        // With the first step at (x, x+1), fewer than n_x peaked agents sit
        // at or left of x, so larger peaked counts can never be met.
        let at_left = rule
            .lcs()
            .family(ExtElem::Single(pair.left()))
            .and_then(|f| f.smallest_size(a))
            .unwrap_or(a + 1);
        let cap = at_left - 1;
        let (kept, pruned): (Vec<DoubleQuota>, Vec<DoubleQuota>) = counts.into_iter().partition(|q| q.peaked <= cap);
        for q in pruned {
            report.notes.push(format!(
                "pruned ({},{}) at {}: at most {cap} peaked agents can support the left point",
                q.peaked,
                q.dipped,
                sp.display(pair)
            ));
        }
        quota_sets.push(QuotaSet::new(pair, kept)?);
    }

    let out = MedianRule::from_parts(sp.clone(), partition, phantoms, quota_sets)?;
    let check = out.validate();
    if !check.is_ok() {
        let codes: Vec<String> = check.violations.iter().map(|v| v.to_string()).collect();
        return Err(Error::Inexpressible(format!(
            "translated rule is not a valid median rule: {}",
            codes.join("; ")
        )));
    }
    Ok((out, report))
}

pub fn convert(rule: &Rule, to: Representation) -> Result<(Rule, ConversionReport)> {
    match (rule, to) {
        (Rule::Median(r), Representation::Coalition) => {
            median_to_coalition(r).map(|(r, rep)| (Rule::Coalition(r), rep))
        }
        (Rule::Coalition(r), Representation::Median) => coalition_to_median(r).map(|(r, rep)| (Rule::Median(r), rep)),
        (same, _) => Ok((same.clone(), ConversionReport::default())),
    }
}
