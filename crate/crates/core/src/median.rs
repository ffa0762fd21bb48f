//! Two-step rules built from a mixed median over peaks and phantoms, followed
//! by a double-quota majority vote whenever the median lands on a pair.

use std::collections::BTreeMap;

use crate::domain::{pair_preference, AgentPartition, AlternativeSpace, ExtElem, Profile, Side};
use crate::error::{Error, Result};
use crate::validation::{ValidationReport, Violation, ViolationCode};

/// Fixed ballots entering the median, kept sorted in interleaved order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhantomVector(Vec<ExtElem>);

impl PhantomVector {
    pub fn new(mut phantoms: Vec<ExtElem>) -> Self {
        phantoms.sort();
        PhantomVector(phantoms)
    }

    pub fn as_slice(&self) -> &[ExtElem] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Phantoms equal to `e`, and phantoms at or left of `e`.
    pub fn count_at(&self, e: ExtElem) -> (usize, usize) {
        let at = self.0.iter().filter(|&&g| g == e).count();
        let upto = self.0.partition_point(|&g| g <= e);
        (at, upto)
    }
}

/// Minimum numbers of supporting single-peaked and single-dipped agents
/// needed to select the left point of a pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DoubleQuota {
    pub peaked: usize,
    pub dipped: usize,
}

impl DoubleQuota {
    pub fn new(peaked: usize, dipped: usize) -> Self {
        DoubleQuota { peaked, dipped }
    }

    pub fn is_met_by(self, peaked: usize, dipped: usize) -> bool {
        peaked >= self.peaked && dipped >= self.dipped
    }

    /// Componentwise `>=`.
    pub fn dominates(self, other: DoubleQuota) -> bool {
        self.peaked >= other.peaked && self.dipped >= other.dipped
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuotaSet {
    pair: ExtElem,
    quotas: Vec<DoubleQuota>,
}

impl QuotaSet {
    pub fn new(pair: ExtElem, mut quotas: Vec<DoubleQuota>) -> Result<Self> {
        if !pair.is_pair() {
            return Err(Error::Malformed("quota set keyed by a single point".into()));
        }
        quotas.sort();
        quotas.dedup();
        Ok(QuotaSet { pair, quotas })
    }

    pub fn pair(&self) -> ExtElem {
        self.pair
    }

    pub fn quotas(&self) -> &[DoubleQuota] {
        &self.quotas
    }

    /// Double-quota majority method on supporter counts.
    pub fn decide(&self, peaked: usize, dipped: usize) -> Side {
        if self.quotas.iter().any(|q| q.is_met_by(peaked, dipped)) {
            Side::Left
        } else {
            Side::Right
        }
    }
}

/// Step-by-step account of one evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Trace {
    pub first_step: ExtElem,
    /// Supporters of the left point among peaked and dipped agents, when the
    /// first step returned a pair.
    pub counts: Option<(usize, usize)>,
    pub outcome: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MedianRule {
    space: AlternativeSpace,
    partition: AgentPartition,
    phantoms: PhantomVector,
    quota_sets: BTreeMap<ExtElem, QuotaSet>,
}

impl MedianRule {
    /// Builds a rule and rejects it unless it passes [`MedianRule::validate`].
    pub fn new(
        space: AlternativeSpace,
        partition: AgentPartition,
        phantoms: Vec<ExtElem>,
        quota_sets: Vec<QuotaSet>,
    ) -> Result<Self> {
        let rule = Self::from_parts(space, partition, phantoms, quota_sets)?;
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
        phantoms: Vec<ExtElem>,
        quota_sets: Vec<QuotaSet>,
    ) -> Result<Self> {
        for &g in &phantoms {
            if !space.contains(g) {
                return Err(Error::UnknownElement(format!("phantom {g:?}")));
            }
        }
        let mut map = BTreeMap::new();
        for qs in quota_sets {
            if !space.contains(qs.pair) {
                return Err(Error::UnknownElement(format!("quota pair {:?}", qs.pair)));
            }
            if map.insert(qs.pair, qs).is_some() {
                return Err(Error::Malformed("duplicate quota set for one pair".into()));
            }
        }
        Ok(MedianRule {
            space,
            partition,
            phantoms: PhantomVector::new(phantoms),
            quota_sets: map,
        })
    }

    pub fn space(&self) -> &AlternativeSpace {
        &self.space
    }

    pub fn partition(&self) -> AgentPartition {
        self.partition
    }

    pub fn phantoms(&self) -> &PhantomVector {
        &self.phantoms
    }

    pub fn quota_sets(&self) -> impl Iterator<Item = &QuotaSet> {
        self.quota_sets.values()
    }

    pub fn quota_set(&self, pair: ExtElem) -> Option<&QuotaSet> {
        self.quota_sets.get(&pair)
    }

    /// Elements the first step can return: interior points and phantom values.
    pub fn first_step_range(&self) -> Vec<ExtElem> {
        let mut r: Vec<ExtElem> = self
            .space
            .interior()
            .chain(self.phantoms.as_slice().iter().copied())
            .collect();
        r.sort();
        r.dedup();
        r
    }

    pub fn count_phantoms_at(&self, e: ExtElem) -> (usize, usize) {
        self.phantoms.count_at(e)
    }

    /// Median of the peaks (as points) and the phantoms.
    pub fn mixed_median(&self, peaks: &[usize]) -> ExtElem {
        let mut keys: Vec<usize> = peaks
            .iter()
            .map(|&p| 2 * p)
            .chain(self.phantoms.as_slice().iter().map(|g| g.key()))
            .collect();
        let mid = peaks.len();
        let (_, median, _) = keys.select_nth_unstable(mid);
        ExtElem::from_key(*median)
    }

    /// Numbers of peaked and dipped agents preferring the left point of `pair`.
    pub fn second_step_counts(&self, profile: &Profile, pair: ExtElem) -> (usize, usize) {
        supporter_counts(profile, pair.left())
    }

    pub fn eval(&self, profile: &Profile) -> Result<usize> {
        profile.check(&self.space, self.partition)?;
        Ok(self.outcome(profile))
    }

    /// Evaluation without dimension checks. A pair without a quota set
    /// always yields its right point.
    pub fn outcome(&self, profile: &Profile) -> usize {
        self.trace_unchecked(profile).outcome
    }

    pub fn trace(&self, profile: &Profile) -> Result<Trace> {
        profile.check(&self.space, self.partition)?;
        Ok(self.trace_unchecked(profile))
    }

    fn trace_unchecked(&self, profile: &Profile) -> Trace {
        let first_step = self.mixed_median(&profile.peaks);
        match first_step {
            ExtElem::Single(x) => Trace {
                first_step,
                counts: None,
                outcome: x,
            },
            ExtElem::Pair(x) => {
                let (ca, cd) = self.second_step_counts(profile, first_step);
                let side = self
                    .quota_sets
                    .get(&first_step)
                    .map_or(Side::Right, |qs| qs.decide(ca, cd));
                Trace {
                    first_step,
                    counts: Some((ca, cd)),
                    outcome: if side == Side::Left { x } else { x + 1 },
                }
            }
        }
    }

    pub fn validate(&self) -> ValidationReport {
        let mut out = Vec::new();
        let a = self.partition.peaked();
        let d = self.partition.dipped();
        let sp = &self.space;
        let ph = self.phantoms.as_slice();

        if ph.len() != a + 1 {
            out.push(Violation::new(
                ViolationCode::PhantomCount,
                format!("{} phantoms for {} peaked agents, expected {}", ph.len(), a, a + 1),
            ));
        }
        if let (Some(&lo), Some(&hi)) = (ph.first(), ph.last()) {
            if lo != sp.min_single() && Some(lo) != sp.min_pair() {
                out.push(Violation::new(
                    ViolationCode::LowestPhantom,
                    format!("smallest phantom {} is not the minimum point or pair", sp.display(lo)),
                ));
            }
            if hi != sp.max_single() && Some(hi) != sp.max_pair() {
                out.push(Violation::new(
                    ViolationCode::HighestPhantom,
                    format!("largest phantom {} is not the maximum point or pair", sp.display(hi)),
                ));
            }
        }
        if d == 0 {
            if let Some(&g) = ph.iter().find(|g| g.is_pair()) {
                out.push(Violation::new(
                    ViolationCode::PairPhantomWithoutDipped,
                    format!("pair phantom {} with no single-dipped agents", sp.display(g)),
                ));
            }
        }

        let reachable: Vec<ExtElem> = self.first_step_range().into_iter().filter(|e| e.is_pair()).collect();
        for &pair in &reachable {
            if !self.quota_sets.contains_key(&pair) {
                out.push(Violation::new(
                    ViolationCode::QuotaKeys,
                    format!("no quota set for reachable pair {}", sp.display(pair)),
                ));
            }
        }
        for (&pair, qs) in &self.quota_sets {
            let shown = sp.display(pair);
            if !reachable.contains(&pair) {
                out.push(Violation::new(
                    ViolationCode::QuotaKeys,
                    format!("quota set for {shown}, which the median never returns"),
                ));
                continue;
            }
            for q in &qs.quotas {
                if q.peaked > a || q.dipped == 0 || q.dipped > d {
                    out.push(Violation::new(
                        ViolationCode::QuotaBounds,
                        format!("quota ({},{}) at {shown} outside 0..={a} x 1..={d}", q.peaked, q.dipped),
                    ));
                }
            }
            for (i, x) in qs.quotas.iter().enumerate() {
                for y in &qs.quotas[i + 1..] {
                    if x.dominates(*y) || y.dominates(*x) {
                        out.push(Violation::new(
                            ViolationCode::QuotaAntichain,
                            format!(
                                "quotas ({},{}) and ({},{}) at {shown} are comparable",
                                x.peaked, x.dipped, y.peaked, y.dipped
                            ),
                        ));
                    }
                }
            }
            let (at, upto) = self.count_phantoms_at(pair);
            let minimal = (a + 1).saturating_sub(upto);
            if !qs.quotas.iter().any(|q| q.peaked == minimal) {
                out.push(Violation::new(
                    ViolationCode::QuotaMinimalPeaked,
                    format!("no quota at {shown} has peaked count {minimal}"),
                ));
            }
            if qs.quotas.len() > at {
                out.push(Violation::new(
                    ViolationCode::QuotaCount,
                    format!("{} quotas at {shown} but only {at} phantoms there", qs.quotas.len()),
                ));
            }
        }

        ValidationReport {
            violations: out,
            ..Default::default()
        }
    }
}

/// Supporters of the left point of the pair with left index `left`.
pub(crate) fn supporter_counts(profile: &Profile, left: usize) -> (usize, usize) {
    use crate::domain::PreferenceType::{Dipped, Peaked};
    let ca = profile
        .peaks
        .iter()
        .filter(|&&p| pair_preference(Peaked, p, left) == Side::Left)
        .count();
    let cd = profile
        .dips
        .iter()
        .filter(|&&q| pair_preference(Dipped, q, left) == Side::Left)
        .count();
    (ca, cd)
}
