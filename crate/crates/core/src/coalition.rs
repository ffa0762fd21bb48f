//! Two-step rules built from a left coalition system (a generalized median
//! voter function over the peaked agents) followed by voting with collections
//! of left-decisive sets.
//!
//! Families of coalitions come in two forms. The counting form stores a size
//! threshold (for left coalitions) or minimal `(peaked, dipped)` counts (for
//! decisive sets); it is type-anonymous by construction. The explicit form
//! stores inclusion-minimal coalitions and can express rules that depend on
//! agent identities.

use std::collections::BTreeMap;

use crate::coalitions::{binomial, is_antichain, minimize, subsets_of_size, Coalition};
use crate::domain::{pair_preference, AgentPartition, AlternativeSpace, ExtElem, PreferenceType, Profile, Side};
use crate::error::{Error, Result};
use crate::median::{DoubleQuota, Trace};
use crate::validation::{ValidationReport, Violation, ViolationCode};

/// Largest number of peaked agents for which `2^A` is enumerated.
pub const COALITION_GUARD: usize = 20;

/// Largest number of peak vectors examined for reachability warnings.
pub const REACHABILITY_BUDGET: u128 = 1_000_000;

/// Ordered, duplicate-free set of first-step outcomes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RangeSpec(Vec<ExtElem>);

impl RangeSpec {
    pub fn new(mut elements: Vec<ExtElem>) -> Self {
        elements.sort();
        elements.dedup();
        RangeSpec(elements)
    }

    pub fn elements(&self) -> &[ExtElem] {
        &self.0
    }

    pub fn contains(&self, e: ExtElem) -> bool {
        self.0.binary_search(&e).is_ok()
    }

    pub fn position(&self, e: ExtElem) -> Option<usize> {
        self.0.binary_search(&e).ok()
    }

    pub fn max(&self) -> Option<ExtElem> {
        self.0.last().copied()
    }

    pub fn min(&self) -> Option<ExtElem> {
        self.0.first().copied()
    }
}

/// A superset-closed family of coalitions of peaked agents.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CoalitionFamily {
    /// Every coalition with at least this many members. Valid thresholds
    /// run from 0 to `a`.
    AtLeast(usize),
    /// Every superset of one of these inclusion-minimal coalitions.
    Minimal(Vec<Coalition>),
}

impl CoalitionFamily {
    pub fn minimal(coalitions: Vec<Coalition>) -> Self {
        CoalitionFamily::Minimal(minimize(&coalitions))
    }

    pub fn contains(&self, s: Coalition) -> bool {
        match self {
            CoalitionFamily::AtLeast(k) => s.len() >= *k,
            CoalitionFamily::Minimal(ms) => ms.iter().any(|m| m.is_subset(s)),
        }
    }

    pub fn contains_empty(&self) -> bool {
        self.contains(Coalition::EMPTY)
    }

    /// Size of the smallest member, or `None` for the empty family.
    pub fn smallest_size(&self, a: usize) -> Option<usize> {
        match self {
            CoalitionFamily::AtLeast(k) => (*k <= a).then_some(*k),
            CoalitionFamily::Minimal(ms) => ms.iter().map(|m| m.len()).min(),
        }
    }

    /// Threshold describing this family, if it is closed under same-size
    /// replacement. The empty family maps to `a + 1`.
    pub fn threshold(&self, a: usize) -> Option<usize> {
        match self {
            CoalitionFamily::AtLeast(k) => Some((*k).min(a + 1)),
            CoalitionFamily::Minimal(ms) => {
                let Some(k) = self.smallest_size(a) else {
                    return Some(a + 1);
                };
                let closed = ms.iter().all(|m| m.len() == k) && ms.len() as u128 == binomial(a, k);
                closed.then_some(k)
            }
        }
    }

    pub fn minimal_coalitions(&self, a: usize) -> Vec<Coalition> {
        match self {
            CoalitionFamily::AtLeast(k) => subsets_of_size(a, *k).collect(),
            CoalitionFamily::Minimal(ms) => ms.clone(),
        }
    }

    fn is_subfamily_of(&self, other: &CoalitionFamily, a: usize) -> bool {
        match (self, other) {
            (CoalitionFamily::AtLeast(k), CoalitionFamily::AtLeast(j)) => k >= j || *k > a,
            _ => self.minimal_coalitions(a).iter().all(|&m| other.contains(m)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LeftCoalitionSystem {
    range: RangeSpec,
    families: Vec<CoalitionFamily>,
    type_anonymous: bool,
}

impl LeftCoalitionSystem {
    /// `entries` pairs each first-step outcome with its winning family.
    pub fn new(entries: Vec<(ExtElem, CoalitionFamily)>, type_anonymous: bool) -> Result<Self> {
        let mut entries = entries;
        entries.sort_by_key(|(e, _)| *e);
        if entries.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::Malformed("left coalition system lists an element twice".into()));
        }
        if entries.is_empty() {
            return Err(Error::Malformed("empty first-step range".into()));
        }
        let (range, families): (Vec<_>, Vec<_>) = entries.into_iter().unzip();
        Ok(LeftCoalitionSystem {
            range: RangeSpec(range),
            families,
            type_anonymous,
        })
    }

    /// Counting form from `(element, threshold)` pairs.
    pub fn from_thresholds(thresholds: Vec<(ExtElem, usize)>) -> Result<Self> {
        Self::new(
            thresholds
                .into_iter()
                .map(|(e, k)| (e, CoalitionFamily::AtLeast(k)))
                .collect(),
            true,
        )
    }

    pub fn range(&self) -> &RangeSpec {
        &self.range
    }

    pub fn type_anonymous(&self) -> bool {
        self.type_anonymous
    }

    pub fn entries(&self) -> impl Iterator<Item = (ExtElem, &CoalitionFamily)> {
        self.range.0.iter().copied().zip(&self.families)
    }

    pub fn family(&self, e: ExtElem) -> Option<&CoalitionFamily> {
        self.range.position(e).map(|i| &self.families[i])
    }

    /// Thresholds per range element, when every family is size-closed.
    pub fn thresholds(&self, a: usize) -> Option<Vec<(ExtElem, usize)>> {
        self.entries().map(|(e, f)| f.threshold(a).map(|k| (e, k))).collect()
    }

    /// Smallest range element whose support coalition is winning. Falls back
    /// to the top of the range when no element wins (invalid systems only).
    pub fn first_step(&self, peaks: &[usize]) -> ExtElem {
        for (alpha, family) in self.entries() {
            let support: Coalition = peaks
                .iter()
                .enumerate()
                .filter(|(_, &p)| 2 * p <= alpha.key())
                .map(|(i, _)| i)
                .collect();
            if family.contains(support) {
                return alpha;
            }
        }
        *self.range.0.last().expect("range is non-empty")
    }

    /// Inclusion-minimal coalitions winning at `pair` but not at its left
    /// point. A left point outside the range counts as the empty family.
    pub fn minimal_coalitions_of_difference(&self, a: usize, pair: ExtElem) -> Result<Vec<Coalition>> {
        if a > COALITION_GUARD {
            return Err(Error::GuardExceeded {
                agents: a,
                guard: COALITION_GUARD,
            });
        }
        let Some(at_pair) = self.family(pair) else {
            return Ok(Vec::new());
        };
        let at_left = self.family(ExtElem::Single(pair.left()));
        let diff: Vec<Coalition> = (0..1u64 << a)
            .map(Coalition::from_bits)
            .filter(|&s| at_pair.contains(s) && !at_left.is_some_and(|f| f.contains(s)))
            .collect();
        Ok(minimize(&diff))
    }
}

/// Decisive coalitions for one pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DecisiveFamily {
    /// Every coalition with exactly these `(peaked, dipped)` member counts.
    Counts(Vec<DoubleQuota>),
    /// Coalitions over the whole society (peaked agents first).
    Coalitions(Vec<Coalition>),
}

impl DecisiveFamily {
    pub fn counts(mut counts: Vec<DoubleQuota>) -> Self {
        counts.sort();
        counts.dedup();
        DecisiveFamily::Counts(counts)
    }

    pub fn coalitions(mut coalitions: Vec<Coalition>) -> Self {
        coalitions.sort();
        coalitions.dedup();
        DecisiveFamily::Coalitions(coalitions)
    }

    /// Whether the left supporters contain a decisive coalition.
    pub fn is_decisive(&self, supporters: Coalition, partition: AgentPartition) -> bool {
        match self {
            DecisiveFamily::Counts(cs) => {
                let (ca, cd) = split_counts(supporters, partition);
                cs.iter().any(|q| q.is_met_by(ca, cd))
            }
            DecisiveFamily::Coalitions(ws) => ws.iter().any(|w| w.is_subset(supporters)),
        }
    }

    /// Explicit coalitions.
    pub fn expand(&self, partition: AgentPartition) -> Vec<Coalition> {
        match self {
            DecisiveFamily::Coalitions(ws) => ws.clone(),
            DecisiveFamily::Counts(cs) => {
                let (a, d) = (partition.peaked(), partition.dipped());
                let mut out = Vec::new();
                for q in cs {
                    for pa in subsets_of_size(a, q.peaked) {
                        for pd in subsets_of_size(d, q.dipped) {
                            out.push(pa.union(Coalition::from_bits(pd.bits() << a)));
                        }
                    }
                }
                out.sort();
                out
            }
        }
    }

    /// Distinct member counts, if the family is closed under same-count
    /// replacement.
    pub fn count_pairs(&self, partition: AgentPartition) -> Option<Vec<DoubleQuota>> {
        match self {
            DecisiveFamily::Counts(cs) => Some(cs.clone()),
            DecisiveFamily::Coalitions(ws) => {
                let mut groups: BTreeMap<DoubleQuota, u128> = BTreeMap::new();
                for &w in ws {
                    let (ca, cd) = split_counts(w, partition);
                    *groups.entry(DoubleQuota::new(ca, cd)).or_default() += 1;
                }
                let closed = groups.iter().all(|(q, &count)| {
                    count == binomial(partition.peaked(), q.peaked) * binomial(partition.dipped(), q.dipped)
                });
                closed.then(|| groups.into_keys().collect())
            }
        }
    }
}

fn split_counts(s: Coalition, partition: AgentPartition) -> (usize, usize) {
    let a = partition.peaked();
    let ca = s.intersect(Coalition::first(a)).len();
    (ca, s.len() - ca)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecisiveSets {
    entries: BTreeMap<ExtElem, DecisiveFamily>,
    type_anonymous: bool,
}

impl DecisiveSets {
    pub fn new(entries: Vec<(ExtElem, DecisiveFamily)>, type_anonymous: bool) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (pair, fam) in entries {
            if !pair.is_pair() {
                return Err(Error::Malformed("decisive sets keyed by a single point".into()));
            }
            if map.insert(pair, fam).is_some() {
                return Err(Error::Malformed("decisive sets list a pair twice".into()));
            }
        }
        Ok(DecisiveSets {
            entries: map,
            type_anonymous,
        })
    }

    pub fn type_anonymous(&self) -> bool {
        self.type_anonymous
    }

    pub fn get(&self, pair: ExtElem) -> Option<&DecisiveFamily> {
        self.entries.get(&pair)
    }

    pub fn entries(&self) -> impl Iterator<Item = (ExtElem, &DecisiveFamily)> {
        self.entries.iter().map(|(k, v)| (*k, v))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoalitionRule {
    space: AlternativeSpace,
    partition: AgentPartition,
    lcs: LeftCoalitionSystem,
    decisive: DecisiveSets,
}

impl CoalitionRule {
    /// Builds a rule and rejects it unless validation finds no violation.
    pub fn new(
        space: AlternativeSpace,
        partition: AgentPartition,
        lcs: LeftCoalitionSystem,
        decisive: DecisiveSets,
    ) -> Result<Self> {
        let rule = Self::from_parts(space, partition, lcs, decisive)?;
        let report = rule.validate();
        if report.is_ok() {
            Ok(rule)
        } else {
            Err(Error::Invalid(report.violations))
        }
    }

    /// Builds a rule checking only that every element exists in the space.
    pub fn from_parts(
        space: AlternativeSpace,
        partition: AgentPartition,
        lcs: LeftCoalitionSystem,
        decisive: DecisiveSets,
    ) -> Result<Self> {
        for &e in lcs.range.elements() {
            if !space.contains(e) {
                return Err(Error::UnknownElement(format!("range element {e:?}")));
            }
        }
        for (pair, _) in decisive.entries() {
            if !space.contains(pair) {
                return Err(Error::UnknownElement(format!("decisive pair {pair:?}")));
            }
        }
        Ok(CoalitionRule {
            space,
            partition,
            lcs,
            decisive,
        })
    }

    pub fn space(&self) -> &AlternativeSpace {
        &self.space
    }

    pub fn partition(&self) -> AgentPartition {
        self.partition
    }

    pub fn lcs(&self) -> &LeftCoalitionSystem {
        &self.lcs
    }

    pub fn decisive(&self) -> &DecisiveSets {
        &self.decisive
    }

    pub fn omega_eval(&self, peaks: &[usize]) -> ExtElem {
        self.lcs.first_step(peaks)
    }

    /// Agents preferring the left point of `pair`.
    pub fn left_supporters(&self, profile: &Profile, pair: ExtElem) -> Coalition {
        let a = self.partition.peaked();
        let peaked = profile
            .peaks
            .iter()
            .enumerate()
            .filter(|(_, &p)| pair_preference(PreferenceType::Peaked, p, pair.left()) == Side::Left)
            .map(|(i, _)| i);
        let dipped = profile
            .dips
            .iter()
            .enumerate()
            .filter(|(_, &q)| pair_preference(PreferenceType::Dipped, q, pair.left()) == Side::Left)
            .map(|(j, _)| a + j);
        peaked.chain(dipped).collect()
    }

    /// Second step on `pair`. A pair without decisive sets yields `Right`.
    pub fn g_eval(&self, profile: &Profile, pair: ExtElem) -> Side {
        let supporters = self.left_supporters(profile, pair);
        match self.decisive.get(pair) {
            Some(fam) if fam.is_decisive(supporters, self.partition) => Side::Left,
            _ => Side::Right,
        }
    }

    pub fn eval(&self, profile: &Profile) -> Result<usize> {
        profile.check(&self.space, self.partition)?;
        Ok(self.outcome(profile))
    }

    pub fn outcome(&self, profile: &Profile) -> usize {
        self.trace_unchecked(profile).outcome
    }

    pub fn trace(&self, profile: &Profile) -> Result<Trace> {
        profile.check(&self.space, self.partition)?;
        Ok(self.trace_unchecked(profile))
    }

    fn trace_unchecked(&self, profile: &Profile) -> Trace {
        let first_step = self.omega_eval(&profile.peaks);
        match first_step {
            ExtElem::Single(x) => Trace {
                first_step,
                counts: None,
                outcome: x,
            },
            ExtElem::Pair(x) => {
                let supporters = self.left_supporters(profile, first_step);
                let counts = split_counts(supporters, self.partition);
                let left = self
                    .decisive
                    .get(first_step)
                    .is_some_and(|f| f.is_decisive(supporters, self.partition));
                Trace {
                    first_step,
                    counts: Some(counts),
                    outcome: if left { x } else { x + 1 },
                }
            }
        }
    }

    /// Whether every family is closed under same-size / same-count
    /// replacement, regardless of the declared flags.
    pub fn is_type_anonymous_form(&self) -> bool {
        let a = self.partition.peaked();
        self.lcs.families.iter().all(|f| f.threshold(a).is_some())
            && self
                .decisive
                .entries
                .values()
                .all(|f| f.count_pairs(self.partition).is_some())
    }

    /// Equivalent rule in counting form, if the families allow it.
    pub fn to_counting_form(&self) -> Option<CoalitionRule> {
        let a = self.partition.peaked();
        let lcs = LeftCoalitionSystem::from_thresholds(self.lcs.thresholds(a)?).ok()?;
        let entries = self
            .decisive
            .entries()
            .map(|(p, f)| f.count_pairs(self.partition).map(|c| (p, DecisiveFamily::counts(c))))
            .collect::<Option<Vec<_>>>()?;
        let decisive = DecisiveSets::new(entries, true).ok()?;
        Some(CoalitionRule {
            space: self.space.clone(),
            partition: self.partition,
            lcs,
            decisive,
        })
    }

    /// Equivalent rule with every family listed coalition by coalition.
    pub fn to_explicit_form(&self) -> CoalitionRule {
        let a = self.partition.peaked();
        let families = self
            .lcs
            .families
            .iter()
            .map(|f| CoalitionFamily::Minimal(f.minimal_coalitions(a)))
            .collect();
        let entries = self
            .decisive
            .entries
            .iter()
            .map(|(p, f)| (*p, DecisiveFamily::coalitions(f.expand(self.partition))))
            .collect();
        CoalitionRule {
            space: self.space.clone(),
            partition: self.partition,
            lcs: LeftCoalitionSystem {
                range: self.lcs.range.clone(),
                families,
                type_anonymous: self.lcs.type_anonymous,
            },
            decisive: DecisiveSets {
                entries,
                type_anonymous: self.decisive.type_anonymous,
            },
        }
    }

    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        self.check_range(&mut report);
        self.check_left_system(&mut report);
        self.check_decisive(&mut report);
        self.check_reachability(&mut report);
        report
    }

    fn check_range(&self, report: &mut ValidationReport) {
        let sp = &self.space;
        let r = &self.lcs.range;
        let has = |e: Option<ExtElem>| e.is_some_and(|e| r.contains(e));
        if !has(Some(sp.min_single())) && !has(sp.min_pair()) {
            report.violations.push(Violation::new(
                ViolationCode::RangeLow,
                "range contains neither the minimum point nor the minimum pair",
            ));
        }
        if !has(Some(sp.max_single())) && !has(sp.max_pair()) {
            report.violations.push(Violation::new(
                ViolationCode::RangeHigh,
                "range contains neither the maximum point nor the maximum pair",
            ));
        }
        for x in sp.interior() {
            if !r.contains(x) {
                report.violations.push(Violation::new(
                    ViolationCode::RangeInterior,
                    format!("interior point {} missing from the range", sp.display(x)),
                ));
            }
        }
    }

    fn check_left_system(&self, report: &mut ValidationReport) {
        let sp = &self.space;
        let a = self.partition.peaked();
        let all_a = Coalition::first(a);
        let entries: Vec<(ExtElem, &CoalitionFamily)> = self.lcs.entries().collect();

        for &(e, fam) in &entries {
            let bad = match fam {
                CoalitionFamily::AtLeast(k) => *k > a,
                CoalitionFamily::Minimal(ms) => ms.is_empty() || ms.iter().any(|m| !m.is_subset(all_a)),
            };
            if bad {
                report.violations.push(Violation::new(
                    ViolationCode::CoalitionBounds,
                    format!(
                        "family at {} is empty or refers to agents outside the peaked group",
                        sp.display(e)
                    ),
                ));
            }
        }

        for w in entries.windows(2) {
            let ((lo, f_lo), (hi, f_hi)) = (w[0], w[1]);
            if !f_lo.is_subfamily_of(f_hi, a) {
                report.violations.push(Violation::new(
                    ViolationCode::CoalitionMonotone,
                    format!(
                        "a coalition winning at {} does not win at {}",
                        sp.display(lo),
                        sp.display(hi)
                    ),
                ));
            }
        }

        let (top, top_family) = *entries.last().expect("range is non-empty");
        if !self.lcs.range.contains(sp.max_single()) && !top_family.contains_empty() {
            report.violations.push(Violation::new(
                ViolationCode::EmptyCoalition,
                format!(
                    "maximum point outside the range but the empty coalition does not win at {}",
                    sp.display(top)
                ),
            ));
        }
        // An empty winner below the top would cut off everything above it.
        for &(e, fam) in &entries[..entries.len() - 1] {
            if fam.contains_empty() {
                report.violations.push(Violation::new(
                    ViolationCode::EmptyCoalition,
                    format!("empty coalition wins at {} below the top of the range", sp.display(e)),
                ));
            }
        }

        if !top_family.contains(all_a) {
            report.violations.push(Violation::new(
                ViolationCode::NotWellDefined,
                format!("the full peaked group does not win at {}", sp.display(top)),
            ));
        }

        for &(e, fam) in &entries {
            if fam.threshold(a).is_none() {
                let v = Violation::new(
                    ViolationCode::CoalitionSizeClosure,
                    format!("family at {} depends on agent identities", sp.display(e)),
                );
                if self.lcs.type_anonymous {
                    report.violations.push(v);
                } else {
                    report.anonymity_notes.push(v);
                }
            }
        }
    }

    fn check_decisive(&self, report: &mut ValidationReport) {
        let sp = &self.space;
        let (a, d) = (self.partition.peaked(), self.partition.dipped());
        let everyone = Coalition::first(a + d);
        let dipped = Coalition::range(a, d);
        let pairs: Vec<ExtElem> = self
            .lcs
            .range
            .elements()
            .iter()
            .copied()
            .filter(|e| e.is_pair())
            .collect();

        for &p in &pairs {
            if self.decisive.get(p).is_none() {
                report.violations.push(Violation::new(
                    ViolationCode::DecisiveKeys,
                    format!("no decisive sets for range pair {}", sp.display(p)),
                ));
            }
        }

        for (pair, fam) in self.decisive.entries() {
            let shown = sp.display(pair);
            if !pairs.contains(&pair) {
                report.violations.push(Violation::new(
                    ViolationCode::DecisiveKeys,
                    format!("decisive sets for {shown}, which is not in the range"),
                ));
                continue;
            }

            match fam {
                DecisiveFamily::Counts(cs) => {
                    for q in cs {
                        if q.dipped == 0 || q.dipped > d || q.peaked > a {
                            report.violations.push(Violation::new(
                                ViolationCode::DecisiveNoDipped,
                                format!(
                                    "count pair ({},{}) at {shown} needs 0..={a} peaked and 1..={d} dipped",
                                    q.peaked, q.dipped
                                ),
                            ));
                        }
                    }
                    let comparable = cs
                        .iter()
                        .enumerate()
                        .any(|(i, x)| cs.iter().enumerate().any(|(j, y)| i != j && x.dominates(*y)));
                    if comparable {
                        report.violations.push(Violation::new(
                            ViolationCode::DecisiveAntichain,
                            format!("count pairs at {shown} are comparable"),
                        ));
                    }
                }
                DecisiveFamily::Coalitions(ws) => {
                    for w in ws {
                        if !w.is_subset(everyone) || w.intersect(dipped).is_empty() {
                            report.violations.push(Violation::new(
                                ViolationCode::DecisiveNoDipped,
                                format!("decisive coalition {w} at {shown} has no dipped agent"),
                            ));
                        }
                    }
                    if !is_antichain(ws) {
                        report.violations.push(Violation::new(
                            ViolationCode::DecisiveAntichain,
                            format!("decisive coalitions at {shown} are nested"),
                        ));
                    }
                    if fam.count_pairs(self.partition).is_none() {
                        let v = Violation::new(
                            ViolationCode::DecisiveCountClosure,
                            format!("decisive coalitions at {shown} depend on agent identities"),
                        );
                        if self.decisive.type_anonymous {
                            report.violations.push(v);
                        } else {
                            report.anonymity_notes.push(v);
                        }
                    }
                }
            }

            match self.lcs.minimal_coalitions_of_difference(a, pair) {
                Ok(bs) => {
                    for b in bs {
                        let covered = match fam {
                            DecisiveFamily::Counts(cs) => cs.iter().any(|q| q.peaked == b.len()),
                            DecisiveFamily::Coalitions(ws) => ws.iter().any(|w| w.intersect(Coalition::first(a)) == b),
                        };
                        if !covered {
                            report.violations.push(Violation::new(
                                ViolationCode::DecisiveCoverage,
                                format!("no decisive set at {shown} has peaked part {b}"),
                            ));
                        }
                    }
                }
                Err(e) => report.warnings.push(format!("coverage of {shown} not checked: {e}")),
            }
        }
    }

    fn check_reachability(&self, report: &mut ValidationReport) {
        let m = self.space.len();
        let a = self.partition.peaked();
        let Some(total) = (m as u128).checked_pow(a as u32).filter(|&t| t <= REACHABILITY_BUDGET) else {
            report.warnings.push(format!(
                "reachability not checked: {m}^{a} peak vectors exceed the budget"
            ));
            return;
        };
        let mut seen = vec![false; 2 * m - 1];
        let mut peaks = vec![0; a];
        for idx in 0..total as usize {
            let mut rest = idx;
            for slot in peaks.iter_mut().rev() {
                *slot = rest % m;
                rest /= m;
            }
            seen[self.omega_eval(&peaks).key()] = true;
        }
        for &e in self.lcs.range.elements() {
            if !seen[e.key()] {
                report.warnings.push(format!(
                    "range element {} is never selected by the first step",
                    self.space.display(e)
                ));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::ExtElem::{Pair, Single};

    fn c(members: &[usize]) -> Coalition {
        members.iter().copied().collect()
    }

    fn space() -> AlternativeSpace {
        AlternativeSpace::from_integers(1..=4).unwrap()
    }

    fn worked_rule() -> CoalitionRule {
        let lcs =
            LeftCoalitionSystem::from_thresholds(vec![(Single(0), 3), (Single(1), 2), (Single(2), 2), (Pair(2), 0)])
                .unwrap();
        let decisive = DecisiveSets::new(
            vec![(
                Pair(2),
                DecisiveFamily::counts(vec![DoubleQuota::new(0, 2), DoubleQuota::new(1, 1)]),
            )],
            true,
        )
        .unwrap();
        CoalitionRule::new(space(), AgentPartition::new(3, 3).unwrap(), lcs, decisive).unwrap()
    }

    fn identity_rule() -> CoalitionRule {
        // Agents i1,i2,i3 are 0,1,2; j1,j2,j3 are 3,4,5.
        let mid = CoalitionFamily::minimal(vec![c(&[0, 2]), c(&[1, 2])]);
        let lcs = LeftCoalitionSystem::new(
            vec![
                (Single(0), CoalitionFamily::minimal(vec![c(&[0, 1, 2])])),
                (Single(1), mid.clone()),
                (Single(2), mid),
                (Pair(2), CoalitionFamily::minimal(vec![Coalition::EMPTY])),
            ],
            false,
        )
        .unwrap();
        let w = vec![c(&[3, 4]), c(&[3, 5]), c(&[4, 5]), c(&[1, 3])];
        let decisive = DecisiveSets::new(vec![(Pair(2), DecisiveFamily::coalitions(w))], false).unwrap();
        CoalitionRule::new(space(), AgentPartition::new(3, 3).unwrap(), lcs, decisive).unwrap()
    }

    fn idx(values: &[usize]) -> Vec<usize> {
        values.iter().map(|v| v - 1).collect()
    }

    #[test]
    fn first_step_matches_worked_profiles() {
        let r = worked_rule();
        assert_eq!(r.omega_eval(&idx(&[1, 2, 2])), Single(1));
        assert_eq!(r.omega_eval(&idx(&[1, 4, 4])), Pair(2));
    }

    #[test]
    fn first_step_without_peaked_agents() {
        let s = AlternativeSpace::from_integers([1, 2]).unwrap();
        let lcs = LeftCoalitionSystem::from_thresholds(vec![(Pair(0), 0)]).unwrap();
        let dec = DecisiveSets::new(
            vec![(Pair(0), DecisiveFamily::counts(vec![DoubleQuota::new(0, 1)]))],
            true,
        )
        .unwrap();
        let r = CoalitionRule::new(s, AgentPartition::new(0, 2).unwrap(), lcs, dec).unwrap();
        assert_eq!(r.omega_eval(&[]), Pair(0));
    }

    #[test]
    fn second_step_matches_worked_profiles() {
        let r = worked_rule();
        assert_eq!(
            r.g_eval(&Profile::new(idx(&[1, 4, 4]), idx(&[2, 2, 1])), Pair(2)),
            Side::Right
        );
        assert_eq!(
            r.g_eval(&Profile::new(idx(&[1, 4, 4]), idx(&[2, 2, 4])), Pair(2)),
            Side::Left
        );

        let e = r.to_explicit_form();
        assert_eq!(
            e.g_eval(&Profile::new(idx(&[1, 4, 4]), idx(&[2, 2, 4])), Pair(2)),
            Side::Left
        );
        assert_eq!(
            e.left_supporters(&Profile::new(idx(&[1, 4, 4]), idx(&[2, 2, 4])), Pair(2)),
            c(&[0, 5])
        );
    }

    #[test]
    fn singletons_of_dipped_agents_with_no_supporters() {
        let s = AlternativeSpace::from_integers([1, 2]).unwrap();
        let part = AgentPartition::new(1, 2).unwrap();
        let lcs = LeftCoalitionSystem::from_thresholds(vec![(Pair(0), 0)]).unwrap();
        let dec = DecisiveSets::new(
            vec![(Pair(0), DecisiveFamily::coalitions(vec![c(&[1]), c(&[2])]))],
            true,
        )
        .unwrap();
        let r = CoalitionRule::from_parts(s, part, lcs, dec).unwrap();
        // Everyone prefers 2: peak at 2, dips at 1.
        assert_eq!(r.g_eval(&Profile::new(vec![1], vec![0, 0]), Pair(0)), Side::Right);
    }

    #[test]
    fn evaluation_matches_worked_profiles() {
        let r = worked_rule();
        assert_eq!(r.eval(&Profile::new(idx(&[1, 2, 2]), idx(&[3, 3, 3]))).unwrap(), 1);
        assert_eq!(r.eval(&Profile::new(idx(&[1, 4, 4]), idx(&[2, 2, 1]))).unwrap(), 3);
        assert_eq!(r.eval(&Profile::new(idx(&[1, 4, 4]), idx(&[2, 2, 4]))).unwrap(), 2);
        assert!(r.eval(&Profile::new(idx(&[1, 4]), idx(&[2, 2, 4]))).is_err());

        let x = identity_rule();
        assert_eq!(x.eval(&Profile::new(idx(&[2, 1, 4]), idx(&[4, 2, 2]))).unwrap(), 2);
        assert_eq!(x.eval(&Profile::new(idx(&[2, 1, 4]), idx(&[2, 2, 4]))).unwrap(), 3);
    }

    #[test]
    fn minimal_coalitions_of_the_difference() {
        let x = identity_rule();
        assert_eq!(
            x.lcs().minimal_coalitions_of_difference(3, Pair(2)).unwrap(),
            vec![Coalition::EMPTY]
        );

        let same = LeftCoalitionSystem::from_thresholds(vec![(Single(0), 2), (Pair(0), 2), (Single(1), 0)]).unwrap();
        assert!(same.minimal_coalitions_of_difference(3, Pair(0)).unwrap().is_empty());

        let step = LeftCoalitionSystem::from_thresholds(vec![(Single(0), 2), (Pair(0), 1), (Single(1), 0)]).unwrap();
        assert_eq!(
            step.minimal_coalitions_of_difference(3, Pair(0)).unwrap(),
            vec![c(&[0]), c(&[1]), c(&[2])]
        );
        assert!(matches!(
            step.minimal_coalitions_of_difference(21, Pair(0)),
            Err(Error::GuardExceeded { .. })
        ));
    }

    #[test]
    fn validation_accepts_worked_rules() {
        let report = worked_rule().validate();
        assert!(report.is_ok(), "{report:?}");
        assert!(report.warnings.is_empty(), "{report:?}");
        assert!(worked_rule().to_explicit_form().validate().is_ok());

        let report = identity_rule().validate();
        assert!(report.is_ok(), "{report:?}");
        let notes: Vec<_> = report.anonymity_notes.iter().map(|v| v.code).collect();
        assert!(notes.contains(&ViolationCode::CoalitionSizeClosure));
        assert!(notes.contains(&ViolationCode::DecisiveCountClosure));
        assert!(!identity_rule().is_type_anonymous_form());
        assert!(identity_rule().to_counting_form().is_none());
    }

    #[test]
    fn identity_rule_flagged_anonymous_is_rejected() {
        let x = identity_rule();
        let lcs = LeftCoalitionSystem::new(x.lcs().entries().map(|(e, f)| (e, f.clone())).collect(), true).unwrap();
        let dec = DecisiveSets::new(x.decisive().entries().map(|(e, f)| (e, f.clone())).collect(), true).unwrap();
        let r = CoalitionRule::from_parts(space(), x.partition(), lcs, dec).unwrap();
        let report = r.validate();
        assert!(report.has(ViolationCode::CoalitionSizeClosure));
        assert!(report.has(ViolationCode::DecisiveCountClosure));
    }

    #[test]
    fn validation_flags_broken_systems() {
        let part = AgentPartition::new(3, 3).unwrap();
        let dec = || {
            DecisiveSets::new(
                vec![(
                    Pair(2),
                    DecisiveFamily::counts(vec![DoubleQuota::new(0, 2), DoubleQuota::new(1, 1)]),
                )],
                true,
            )
            .unwrap()
        };
        let build = |t: Vec<(ExtElem, usize)>, d: DecisiveSets| {
            CoalitionRule::from_parts(space(), part, LeftCoalitionSystem::from_thresholds(t).unwrap(), d)
                .unwrap()
                .validate()
        };

        let r = build(
            vec![(Single(0), 3), (Single(1), 1), (Single(2), 2), (Pair(2), 0)],
            dec(),
        );
        assert!(r.has(ViolationCode::CoalitionMonotone));

        let r = build(
            vec![(Single(0), 3), (Single(1), 2), (Single(2), 2), (Pair(2), 1)],
            dec(),
        );
        assert!(r.has(ViolationCode::EmptyCoalition));

        let r = build(
            vec![(Single(0), 3), (Single(1), 0), (Single(2), 0), (Pair(2), 0)],
            dec(),
        );
        assert!(r.has(ViolationCode::EmptyCoalition));

        let top_point = build(
            vec![(Single(0), 3), (Single(1), 0), (Single(2), 0), (Single(3), 0)],
            DecisiveSets::new(vec![], true).unwrap(),
        );
        assert!(top_point.has(ViolationCode::EmptyCoalition));

        let r = build(vec![(Single(1), 2), (Single(2), 2), (Pair(2), 0)], dec());
        assert!(r.has(ViolationCode::RangeLow));

        let r = build(vec![(Single(0), 3), (Single(2), 2), (Pair(2), 0)], dec());
        assert!(r.has(ViolationCode::RangeInterior));

        let r = build(
            vec![(Single(0), 4), (Single(1), 4), (Single(2), 4)],
            DecisiveSets::new(vec![], true).unwrap(),
        );
        assert!(r.has(ViolationCode::RangeHigh));
        assert!(r.has(ViolationCode::NotWellDefined));

        let r = build(
            vec![(Single(0), 3), (Single(1), 2), (Single(2), 2), (Pair(2), 0)],
            DecisiveSets::new(vec![], true).unwrap(),
        );
        assert!(r.has(ViolationCode::DecisiveKeys));

        let zero = DecisiveSets::new(
            vec![(Pair(2), DecisiveFamily::counts(vec![DoubleQuota::new(0, 0)]))],
            true,
        )
        .unwrap();
        let r = build(vec![(Single(0), 3), (Single(1), 2), (Single(2), 2), (Pair(2), 0)], zero);
        assert!(r.has(ViolationCode::DecisiveNoDipped));

        let uncovered = DecisiveSets::new(
            vec![(Pair(2), DecisiveFamily::counts(vec![DoubleQuota::new(1, 1)]))],
            true,
        )
        .unwrap();
        let r = build(
            vec![(Single(0), 3), (Single(1), 2), (Single(2), 2), (Pair(2), 0)],
            uncovered,
        );
        assert!(r.has(ViolationCode::DecisiveCoverage));

        let nested = DecisiveSets::new(
            vec![(
                Pair(2),
                DecisiveFamily::counts(vec![DoubleQuota::new(0, 1), DoubleQuota::new(1, 1)]),
            )],
            true,
        )
        .unwrap();
        let r = build(
            vec![(Single(0), 3), (Single(1), 2), (Single(2), 2), (Pair(2), 0)],
            nested,
        );
        assert!(r.has(ViolationCode::DecisiveAntichain));

        let r = build(
            vec![(Single(0), 5), (Single(1), 2), (Single(2), 2), (Pair(2), 0)],
            dec(),
        );
        assert!(r.has(ViolationCode::CoalitionBounds));
    }

    #[test]
    fn unreachable_pair_is_a_warning() {
        let part = AgentPartition::new(2, 1).unwrap();
        let lcs = LeftCoalitionSystem::from_thresholds(vec![
            (Single(0), 2),
            (Pair(0), 2),
            (Single(1), 1),
            (Single(2), 1),
            (Single(3), 1),
        ])
        .unwrap();
        let dec = DecisiveSets::new(
            vec![(Pair(0), DecisiveFamily::counts(vec![DoubleQuota::new(0, 1)]))],
            true,
        )
        .unwrap();
        let report = CoalitionRule::from_parts(space(), part, lcs, dec).unwrap().validate();
        assert!(report.is_ok(), "{report:?}");
        assert!(report.warnings.iter().any(|w| w.contains("(1,2)")), "{report:?}");
    }

    #[test]
    fn counting_and_explicit_forms_agree() {
        let r = worked_rule();
        let e = r.to_explicit_form();
        assert!(e.is_type_anonymous_form());
        assert_eq!(e.to_counting_form().unwrap(), r);
        let m = 4usize;
        for i in 0..m.pow(6) {
            let p = Profile::from_index(i, m, r.partition());
            assert_eq!(r.outcome(&p), e.outcome(&p));
        }
    }
}
