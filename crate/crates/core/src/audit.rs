//! Brute-force audits over the profile space.
//!
//! Rules only look at restricted peaks and dips, so a profile is a vector of
//! locations and a manipulation is a misreported location. Whether the
//! misreport helps still depends on the deviator's full ranking; the search
//! walks rankings in [`enumerate_rankings`] order and reports the first one
//! that gains.
//!
//! Profile spaces up to `max_exhaustive` profiles are searched completely;
//! larger ones fall back to `samples` profiles drawn from ChaCha8
//! (`rand_chacha::ChaCha8Rng::seed_from_u64(seed)`, each location drawn with
//! `gen_range(0..m)`, peaks before dips). Searches run in parallel but always
//! report the first witness in the fixed search order.
//!
//! [`enumerate_rankings`]: crate::domain::enumerate_rankings

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::coalition::{CoalitionRule, DecisiveFamily, DecisiveSets, LeftCoalitionSystem};
use crate::coalitions::{subsets_of_size, Coalition};
use crate::domain::{
    can_prefer, first_ranking_preferring, profile_count, AgentPartition, AlternativeSpace, ExtElem, PreferenceType,
    Profile,
};
use crate::error::{Error, Result};
use crate::median::{DoubleQuota, MedianRule, QuotaSet};
use crate::rule::Rule;
use crate::transform::Representation;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AuditBudget {
    pub max_exhaustive: u64,
    pub samples: u64,
    pub seed: u64,
    /// Largest coalition tried by the group search.
    pub coalition_cap: usize,
}

impl Default for AuditBudget {
    fn default() -> Self {
        AuditBudget {
            max_exhaustive: 1_000_000,
            samples: 100_000,
            seed: 0,
            coalition_cap: 4,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Coverage {
    Exhaustive,
    Sampled { seed: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Witness,
    PartialCoverage,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Witness => "witness",
            Status::PartialCoverage => "partial-coverage",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Witness {
    Manipulation {
        agent: usize,
        kind: PreferenceType,
        profile: Profile,
        true_ranking: Vec<usize>,
        misreport: usize,
        truthful: usize,
        manipulated: usize,
    },
    GroupManipulation {
        coalition: Vec<usize>,
        profile: Profile,
        true_rankings: Vec<Vec<usize>>,
        misreports: Vec<usize>,
        truthful: usize,
        manipulated: usize,
    },
    AnonymityViolation {
        kind: PreferenceType,
        agents: (usize, usize),
        profile: Profile,
        permuted: Profile,
        outcome: usize,
        permuted_outcome: usize,
    },
    EquivalenceCounterexample {
        profile: Profile,
        left: usize,
        right: usize,
    },
}

fn ranks_above(order: &[usize], x: usize, y: usize) -> bool {
    let pos = |v| order.iter().position(|&o| o == v);
    matches!((pos(x), pos(y)), (Some(px), Some(py)) if px < py)
}

impl Witness {
    pub fn kind(&self) -> &'static str {
        match self {
            Witness::Manipulation { .. } => "manipulation",
            Witness::GroupManipulation { .. } => "group-manipulation",
            Witness::AnonymityViolation { .. } => "anonymity-violation",
            Witness::EquivalenceCounterexample { .. } => "equivalence-counterexample",
        }
    }

    /// Re-evaluates `rule` on the recorded inputs and checks both the
    /// recorded outcomes and the improvement condition.
    pub fn replay(&self, rule: &Rule) -> bool {
        match self {
            Witness::Manipulation {
                agent,
                profile,
                true_ranking,
                misreport,
                truthful,
                manipulated,
                ..
            } => {
                let mut dev = profile.clone();
                dev.set_location(*agent, *misreport);
                rule.eval(profile).ok() == Some(*truthful)
                    && rule.eval(&dev).ok() == Some(*manipulated)
                    && ranking_matches(rule, *agent, profile, true_ranking)
                    && ranks_above(true_ranking, *manipulated, *truthful)
            }
            Witness::GroupManipulation {
                coalition,
                profile,
                true_rankings,
                misreports,
                truthful,
                manipulated,
            } => {
                let mut dev = profile.clone();
                for (&i, &x) in coalition.iter().zip(misreports) {
                    dev.set_location(i, x);
                }
                rule.eval(profile).ok() == Some(*truthful)
                    && rule.eval(&dev).ok() == Some(*manipulated)
                    && coalition.len() == true_rankings.len()
                    && coalition
                        .iter()
                        .zip(true_rankings)
                        .all(|(&i, r)| ranking_matches(rule, i, profile, r) && ranks_above(r, *manipulated, *truthful))
            }
            Witness::AnonymityViolation {
                kind,
                agents: (i, j),
                profile,
                permuted,
                outcome,
                permuted_outcome,
            } => {
                let partition = rule.partition();
                let mut swapped = profile.clone();
                swapped.swap_agents(*i, *j);
                partition.kind_of(*i) == *kind
                    && partition.kind_of(*j) == *kind
                    && swapped == *permuted
                    && outcome != permuted_outcome
                    && rule.eval(profile).ok() == Some(*outcome)
                    && rule.eval(permuted).ok() == Some(*permuted_outcome)
            }
            Witness::EquivalenceCounterexample { .. } => false,
        }
    }

    /// Replays an equivalence counterexample against the two compared rules.
    pub fn replay_pair(&self, x: &Rule, y: &Rule) -> bool {
        match self {
            Witness::EquivalenceCounterexample { profile, left, right } => {
                left != right && x.eval(profile).ok() == Some(*left) && y.eval(profile).ok() == Some(*right)
            }
            _ => false,
        }
    }
}

fn ranking_matches(rule: &Rule, agent: usize, profile: &Profile, order: &[usize]) -> bool {
    let kind = rule.partition().kind_of(agent);
    match crate::domain::Ranking::new(kind, order.to_vec()) {
        Ok(r) => r.order().len() == rule.space().len() && r.restricted_extremum() == profile.location(agent),
        Err(_) => false,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Audit {
    pub check: &'static str,
    pub coverage: Coverage,
    /// Profiles enumerated or sampled.
    pub profiles: u64,
    pub witness: Option<Witness>,
}

impl Audit {
    pub fn status(&self) -> Status {
        match (&self.witness, self.coverage) {
            (Some(_), _) => Status::Witness,
            (None, Coverage::Exhaustive) => Status::Pass,
            (None, Coverage::Sampled { .. }) => Status::PartialCoverage,
        }
    }
}

/// Outcomes of every profile, in lexicographic `(peaks, dips)` order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OutcomeTable {
    m: usize,
    partition: AgentPartition,
    outcomes: Vec<usize>,
}

impl OutcomeTable {
    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn get(&self, profile: &Profile) -> usize {
        self.outcomes[profile.index(self.m)]
    }

    pub fn outcomes(&self) -> &[usize] {
        &self.outcomes
    }

    pub fn iter(&self) -> impl Iterator<Item = (Profile, usize)> + '_ {
        self.outcomes
            .iter()
            .enumerate()
            .map(|(i, &o)| (Profile::from_index(i, self.m, self.partition), o))
    }
}

fn exhaustive_size(rule: &Rule, budget: &AuditBudget) -> Option<usize> {
    profile_count(rule.space().len(), rule.partition())
        .filter(|&c| c <= budget.max_exhaustive as u128)
        .map(|c| c as usize)
}

pub fn tabulate(rule: &Rule, budget: &AuditBudget) -> Result<OutcomeTable> {
    let m = rule.space().len();
    let partition = rule.partition();
    let total = exhaustive_size(rule, budget).ok_or_else(|| Error::BudgetExceeded {
        needed: profile_count(m, partition).unwrap_or(u128::MAX),
        budget: budget.max_exhaustive,
    })?;
    let outcomes = (0..total)
        .into_par_iter()
        .map(|i| rule.outcome(&Profile::from_index(i, m, partition)))
        .collect();
    Ok(OutcomeTable { m, partition, outcomes })
}

pub fn random_profile<R: Rng>(rng: &mut R, m: usize, partition: AgentPartition) -> Profile {
    let peaks = (0..partition.peaked()).map(|_| rng.gen_range(0..m)).collect();
    let dips = (0..partition.dipped()).map(|_| rng.gen_range(0..m)).collect();
    Profile::new(peaks, dips)
}

fn sample_profiles(m: usize, partition: AgentPartition, budget: &AuditBudget) -> Vec<Profile> {
    let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
    (0..budget.samples)
        .map(|_| random_profile(&mut rng, m, partition))
        .collect()
}

/// Where the profiles come from: the full table, or a sample evaluated on
/// demand.
enum Space {
    Table(OutcomeTable),
    Sample(Vec<Profile>),
}

impl Space {
    fn new(rule: &Rule, budget: &AuditBudget) -> Self {
        match tabulate(rule, budget) {
            Ok(t) => Space::Table(t),
            Err(_) => Space::Sample(sample_profiles(rule.space().len(), rule.partition(), budget)),
        }
    }

    fn outcome(&self, rule: &Rule, p: &Profile) -> usize {
        match self {
            Space::Table(t) => t.get(p),
            Space::Sample(_) => rule.outcome(p),
        }
    }

    fn coverage(&self, budget: &AuditBudget) -> (Coverage, u64) {
        match self {
            Space::Table(t) => (Coverage::Exhaustive, t.len() as u64),
            Space::Sample(s) => (Coverage::Sampled { seed: budget.seed }, s.len() as u64),
        }
    }

    /// Profiles with the agents in `fixed` at location 0, in lexicographic
    /// order of the remaining agents (all samples when sampling).
    fn bases(&self, m: usize, partition: AgentPartition, fixed: Coalition) -> Vec<Profile> {
        match self {
            Space::Sample(s) => s.clone(),
            Space::Table(t) => (0..t.len())
                .map(|i| Profile::from_index(i, m, partition))
                .filter(|p| fixed.members().all(|a| p.location(a) == 0))
                .collect(),
        }
    }

    fn all(&self, m: usize, partition: AgentPartition) -> Vec<Profile> {
        self.bases(m, partition, Coalition::EMPTY)
    }
}

/// First single-agent manipulation, searching agents, then the other
/// agents' locations, then the deviator's true ranking, then its misreport.
pub fn find_manipulation(rule: &Rule, budget: &AuditBudget) -> Audit {
    let m = rule.space().len();
    let partition = rule.partition();
    let space = Space::new(rule, budget);
    let mut witness = None;
    for agent in 0..partition.n() {
        let kind = partition.kind_of(agent);
        let bases = space.bases(m, partition, Coalition::from_iter([agent]));
        witness = bases.par_iter().find_map_first(|base| {
            let mut p = base.clone();
            let out: Vec<usize> = (0..m)
                .map(|x| {
                    p.set_location(agent, x);
                    space.outcome(rule, &p)
                })
                .collect();
            (0..m).find_map(|e| {
                let truthful = out[e];
                let ranking = first_ranking_preferring(m, kind, e, &out, truthful)?;
                let misreport = (0..m).find(|&x| ranking.prefers(out[x], truthful))?;
                let mut profile = base.clone();
                profile.set_location(agent, e);
                Some(Witness::Manipulation {
                    agent,
                    kind,
                    profile,
                    true_ranking: ranking.order().to_vec(),
                    misreport,
                    truthful,
                    manipulated: out[misreport],
                })
            })
        });
        if witness.is_some() {
            break;
        }
    }
    let (coverage, profiles) = space.coverage(budget);
    Audit {
        check: "sp",
        coverage,
        profiles,
        witness,
    }
}

/// First coalition manipulation in which every member strictly gains.
/// Coalitions are tried by size, then lexicographically; within a coalition
/// the search runs over the others' locations, the members' true locations
/// and their joint misreport.
pub fn find_group_manipulation(rule: &Rule, budget: &AuditBudget) -> Audit {
    let m = rule.space().len();
    let partition = rule.partition();
    let n = partition.n();
    let space = Space::new(rule, budget);
    let mut witness = None;
    'sizes: for k in 1..=budget.coalition_cap.min(n) {
        for coalition in subsets_of_size(n, k) {
            let members: Vec<usize> = coalition.members().collect();
            let bases = space.bases(m, partition, coalition);
            witness = bases
                .par_iter()
                .find_map_first(|base| group_witness(rule, &space, base, &members, m));
            if witness.is_some() {
                break 'sizes;
            }
        }
    }
    let (coverage, profiles) = space.coverage(budget);
    Audit {
        check: "gsp",
        coverage,
        profiles,
        witness,
    }
}

fn joint_locations(m: usize, k: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = m.pow(k as u32);
    (0..total).map(move |mut idx| {
        let mut v = vec![0; k];
        for slot in v.iter_mut().rev() {
            *slot = idx % m;
            idx /= m;
        }
        v
    })
}

fn group_witness(rule: &Rule, space: &Space, base: &Profile, members: &[usize], m: usize) -> Option<Witness> {
    let partition = rule.partition();
    let k = members.len();
    let with = |locs: &[usize]| {
        let mut p = base.clone();
        for (&i, &x) in members.iter().zip(locs) {
            p.set_location(i, x);
        }
        p
    };
    let outcomes: Vec<usize> = joint_locations(m, k).map(|l| space.outcome(rule, &with(&l))).collect();
    for (ti, truth) in joint_locations(m, k).enumerate() {
        let truthful = outcomes[ti];
        let mut gains: Vec<Option<bool>> = vec![None; m];
        for (mi, &manipulated) in outcomes.iter().enumerate() {
            let all_gain = *gains[manipulated].get_or_insert_with(|| {
                members
                    .iter()
                    .zip(&truth)
                    .all(|(&i, &e)| can_prefer(partition.kind_of(i), e, manipulated, truthful))
            });
            if !all_gain {
                continue;
            }
            let true_rankings = members
                .iter()
                .zip(&truth)
                .map(|(&i, &e)| {
                    first_ranking_preferring(m, partition.kind_of(i), e, &[manipulated], truthful)
                        .expect("feasibility checked")
                        .order()
                        .to_vec()
                })
                .collect();
            return Some(Witness::GroupManipulation {
                coalition: members.to_vec(),
                profile: with(&truth),
                true_rankings,
                misreports: joint_locations(m, k).nth(mi).expect("index within range"),
                truthful,
                manipulated,
            });
        }
    }
    None
}

/// First profile and within-type transposition that changes the outcome.
/// Transpositions among single-dipped agents are checked over the whole
/// space before those among single-peaked agents.
pub fn check_type_anonymity(rule: &Rule, budget: &AuditBudget) -> Audit {
    let m = rule.space().len();
    let partition = rule.partition();
    let space = Space::new(rule, budget);
    let profiles = space.all(m, partition);
    let mut witness = None;
    for kind in [PreferenceType::Dipped, PreferenceType::Peaked] {
        witness = profiles
            .par_iter()
            .find_map_first(|p| transposition_witness(rule, &space, p, kind));
        if witness.is_some() {
            break;
        }
    }
    let (coverage, count) = space.coverage(budget);
    Audit {
        check: "anonymity",
        coverage,
        profiles: count,
        witness,
    }
}

/// Within-type transpositions at a single profile, dipped agents first.
pub fn check_type_anonymity_at(rule: &Rule, profile: &Profile) -> Result<Option<Witness>> {
    profile.check(rule.space(), rule.partition())?;
    let space = Space::Sample(Vec::new());
    Ok([PreferenceType::Dipped, PreferenceType::Peaked]
        .into_iter()
        .find_map(|kind| transposition_witness(rule, &space, profile, kind)))
}

fn transposition_witness(rule: &Rule, space: &Space, p: &Profile, kind: PreferenceType) -> Option<Witness> {
    let partition = rule.partition();
    let agents: Vec<usize> = match kind {
        PreferenceType::Peaked => (0..partition.peaked()).collect(),
        PreferenceType::Dipped => (partition.peaked()..partition.n()).collect(),
    };
    let outcome = space.outcome(rule, p);
    for (x, &i) in agents.iter().enumerate() {
        for &j in &agents[x + 1..] {
            if p.location(i) == p.location(j) {
                continue;
            }
            let mut permuted = p.clone();
            permuted.swap_agents(i, j);
            let permuted_outcome = space.outcome(rule, &permuted);
            if permuted_outcome != outcome {
                return Some(Witness::AnonymityViolation {
                    kind,
                    agents: (i, j),
                    profile: p.clone(),
                    permuted,
                    outcome,
                    permuted_outcome,
                });
            }
        }
    }
    None
}

/// First profile on which the two rules disagree.
pub fn check_equivalence(x: &Rule, y: &Rule, budget: &AuditBudget) -> Result<Audit> {
    if x.space() != y.space() {
        return Err(Error::DimensionMismatch {
            what: "alternative space size",
            expected: x.space().len(),
            found: y.space().len(),
        });
    }
    if x.partition() != y.partition() {
        return Err(Error::DimensionMismatch {
            what: "number of agents",
            expected: x.partition().n(),
            found: y.partition().n(),
        });
    }
    let m = x.space().len();
    let partition = x.partition();
    let (profiles, coverage): (Box<dyn Fn(usize) -> Profile + Sync>, _) = match exhaustive_size(x, budget) {
        Some(total) => (
            Box::new(move |i| Profile::from_index(i, m, partition)),
            (Coverage::Exhaustive, total),
        ),
        None => {
            let s = sample_profiles(m, partition, budget);
            let len = s.len();
            (
                Box::new(move |i| s[i].clone()),
                (Coverage::Sampled { seed: budget.seed }, len),
            )
        }
    };
    let witness = (0..coverage.1).into_par_iter().find_map_first(|i| {
        let profile = profiles(i);
        let (left, right) = (x.outcome(&profile), y.outcome(&profile));
        (left != right).then_some(Witness::EquivalenceCounterexample { profile, left, right })
    });
    Ok(Audit {
        check: "equivalence",
        coverage: coverage.0,
        profiles: coverage.1 as u64,
        witness,
    })
}

/// A random rule passing validation, reproducible from `seed`.
pub fn random_valid_rule(
    space: &AlternativeSpace,
    partition: AgentPartition,
    seed: u64,
    representation: Representation,
) -> Result<Rule> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match representation {
        Representation::Median => random_median_rule(space, partition, &mut rng).map(Rule::Median),
        Representation::Coalition => random_coalition_rule(space, partition, &mut rng).map(Rule::Coalition),
    }
}

fn lone_phantom(space: &AlternativeSpace, partition: AgentPartition) -> Result<ExtElem> {
    match space.len() {
        1 => Ok(ExtElem::Single(0)),
        2 if partition.dipped() > 0 => Ok(ExtElem::Pair(0)),
        m => Err(Error::Unsatisfiable(format!(
            "without single-peaked agents the lone phantom must be both lowest and highest, impossible with {m} points{}",
            if partition.dipped() == 0 { " and no single-dipped agents" } else { "" }
        ))),
    }
}

fn pick<R: Rng, T: Copy>(rng: &mut R, options: &[T]) -> T {
    options[rng.gen_range(0..options.len())]
}

/// An antichain of count pairs whose smallest peaked count is `min_peaked`,
/// with extra peaked counts up to `max_peaked` and at most `limit` entries.
fn random_counts<R: Rng>(
    rng: &mut R,
    min_peaked: usize,
    max_peaked: usize,
    d: usize,
    limit: usize,
) -> Vec<DoubleQuota> {
    let mut extra: Vec<usize> = (min_peaked + 1..=max_peaked).filter(|_| rng.gen_bool(0.5)).collect();
    extra.truncate(limit.saturating_sub(1).min(d - 1));
    let mut peaked = vec![min_peaked];
    peaked.extend(extra);
    let mut dipped: Vec<usize> = (1..=d).collect();
    for i in 0..peaked.len() {
        let j = rng.gen_range(i..dipped.len());
        dipped.swap(i, j);
    }
    dipped.truncate(peaked.len());
    dipped.sort_unstable_by(|a, b| b.cmp(a));
    peaked
        .into_iter()
        .zip(dipped)
        .map(|(p, d)| DoubleQuota::new(p, d))
        .collect()
}

pub fn random_median_rule<R: Rng>(
    space: &AlternativeSpace,
    partition: AgentPartition,
    rng: &mut R,
) -> Result<MedianRule> {
    let (a, d, m) = (partition.peaked(), partition.dipped(), space.len());
    let phantoms = if a == 0 {
        vec![lone_phantom(space, partition)?]
    } else {
        let pairs_allowed = d > 0 && m >= 2;
        let mut low = vec![space.min_single()];
        let mut high = vec![space.max_single()];
        if pairs_allowed {
            low.extend(space.min_pair());
            high.extend(space.max_pair());
        }
        let lo = pick(rng, &low);
        let hi = pick(rng, &high);
        let middle: Vec<ExtElem> = (lo.key()..=hi.key())
            .map(ExtElem::from_key)
            .filter(|e| pairs_allowed || !e.is_pair())
            .collect();
        let mut ph = vec![lo, hi];
        ph.extend((1..a).map(|_| pick(rng, &middle)));
        ph
    };

    let skeleton = MedianRule::from_parts(space.clone(), partition, phantoms.clone(), Vec::new())?;
    let mut quota_sets = Vec::new();
    for pair in skeleton.first_step_range().into_iter().filter(|e| e.is_pair()) {
        let (at, upto) = skeleton.count_phantoms_at(pair);
        let min_peaked = a + 1 - upto;
        let counts = random_counts(rng, min_peaked, a.min(min_peaked + at - 1), d, at);
        quota_sets.push(QuotaSet::new(pair, counts)?);
    }
    MedianRule::new(space.clone(), partition, phantoms, quota_sets)
}

pub fn random_coalition_rule<R: Rng>(
    space: &AlternativeSpace,
    partition: AgentPartition,
    rng: &mut R,
) -> Result<CoalitionRule> {
    let (a, d, m) = (partition.peaked(), partition.dipped(), space.len());
    let pairs_allowed = d > 0 && m >= 2;
    let range: Vec<ExtElem> = if a == 0 {
        vec![lone_phantom(space, partition)?]
    } else {
        let mut r: Vec<ExtElem> = space.interior().collect();
        let ends = [
            (space.min_single(), space.min_pair()),
            (space.max_single(), space.max_pair()),
        ];
        for (point, pair) in ends {
            match pair.filter(|_| pairs_allowed) {
                None => r.push(point),
                Some(pair) => match rng.gen_range(0..3) {
                    0 => r.push(point),
                    1 => r.push(pair),
                    _ => r.extend([point, pair]),
                },
            }
        }
        if pairs_allowed {
            r.extend(space.pairs().filter(|_| rng.gen_bool(0.5)));
        }
        r.sort();
        r.dedup();
        r
    };

    let top_is_point = range.contains(&space.max_single());
    let mut thresholds = Vec::with_capacity(range.len());
    let mut prev = a;
    for (i, &alpha) in range.iter().enumerate() {
        let k = if i + 1 == range.len() {
            if top_is_point {
                rng.gen_range(0..=prev)
            } else {
                0
            }
        } else {
            rng.gen_range(1.min(prev)..=prev)
        };
        thresholds.push((alpha, k));
        prev = k;
    }

    let lcs = LeftCoalitionSystem::from_thresholds(thresholds.clone())?;
    let mut decisive = Vec::new();
    for &(pair, k) in thresholds.iter().filter(|(e, _)| e.is_pair()) {
        let at_left = thresholds
            .iter()
            .find(|(e, _)| *e == ExtElem::Single(pair.left()))
            .map_or(a + 1, |&(_, n)| n);
        let min_peaked = if k < at_left { k } else { rng.gen_range(0..=a) };
        let counts = random_counts(rng, min_peaked, a, d, a + 1);
        decisive.push((pair, DecisiveFamily::counts(counts)));
    }
    let decisive = DecisiveSets::new(decisive, true)?;
    CoalitionRule::new(space.clone(), partition, lcs, decisive)
}
