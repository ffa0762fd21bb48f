//! JSON rule and profile files.
//!
//! Alternatives are written as integers or `"p/q"` strings and must be
//! members of `omega`. Extended elements are `{"single": v}` or
//! `{"pair": [v, w]}` with `v`, `w` adjacent in `omega`. Agents are numbered
//! from zero, single-peaked agents first: in a society with `a` peaked and
//! `d` dipped agents, agent `a + j` is the `j`-th dipped agent.

use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::audit::{Audit, Coverage, Witness};
use crate::coalition::{CoalitionFamily, CoalitionRule, DecisiveFamily, DecisiveSets, LeftCoalitionSystem};
use crate::coalitions::Coalition;
use crate::domain::{AgentPartition, AlternativeSpace, ExtElem, Profile, Rational};
use crate::error::{Error, Result};
use crate::median::{DoubleQuota, MedianRule, QuotaSet};
use crate::rule::Rule;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum Num {
    Int(i64),
    Text(String),
}

impl Num {
    fn value(&self) -> Result<Rational> {
        match self {
            Num::Int(v) => Ok(Rational::from_integer(*v)),
            Num::Text(s) => Rational::from_str(s.trim())
                .map_err(|_| Error::Malformed(format!("{s:?} is not an integer or p/q rational"))),
        }
    }

    fn from_value(r: Rational) -> Self {
        if r.is_integer() {
            Num::Int(r.to_integer())
        } else {
            Num::Text(format!("{}/{}", r.numer(), r.denom()))
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
enum Elem {
    Single(Num),
    Pair([Num; 2]),
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Agents {
    a: usize,
    d: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct QuotaEntry {
    pair: [Num; 2],
    quotas: Vec<[usize; 2]>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LeftEntry {
    element: Elem,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    threshold: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    minimal: Option<Vec<Vec<usize>>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DecisiveEntry {
    pair: [Num; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    counts: Option<Vec<[usize; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    coalitions: Option<Vec<Vec<usize>>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "representation", rename_all = "lowercase", deny_unknown_fields)]
enum RuleFile {
    Median {
        omega: Vec<Num>,
        agents: Agents,
        phantoms: Vec<Elem>,
        #[serde(default)]
        quotas: Vec<QuotaEntry>,
    },
    Coalition {
        omega: Vec<Num>,
        agents: Agents,
        #[serde(default = "yes")]
        type_anonymous: bool,
        left_coalitions: Vec<LeftEntry>,
        #[serde(default)]
        decisive: Vec<DecisiveEntry>,
    },
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileFile {
    peaks: Vec<Num>,
    dips: Vec<Num>,
}

fn from_json<'a, T: Deserialize<'a>>(text: &'a str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

fn point(space: &AlternativeSpace, v: &Num, at: &str) -> Result<usize> {
    let value = v.value()?;
    space
        .index_of(&value)
        .ok_or_else(|| Error::UnknownElement(format!("{at}: {value}")))
}

fn pair(space: &AlternativeSpace, [v, w]: &[Num; 2], at: &str) -> Result<ExtElem> {
    let (i, j) = (point(space, v, at)?, point(space, w, at)?);
    if j != i + 1 {
        return Err(Error::Malformed(format!(
            "{at}: non-adjacent pair ({},{})",
            space.point(i),
            space.point(j)
        )));
    }
    Ok(ExtElem::Pair(i))
}

fn elem(space: &AlternativeSpace, e: &Elem, at: &str) -> Result<ExtElem> {
    match e {
        Elem::Single(v) => point(space, v, at).map(ExtElem::Single),
        Elem::Pair(p) => pair(space, p, at),
    }
}

fn space_of(omega: &[Num]) -> Result<AlternativeSpace> {
    AlternativeSpace::new(omega.iter().map(Num::value).collect::<Result<_>>()?)
}

fn coalition(members: &[usize], limit: usize, at: &str) -> Result<Coalition> {
    if let Some(bad) = members.iter().find(|&&i| i >= limit) {
        return Err(Error::Malformed(format!("{at}: agent {bad} out of range 0..{limit}")));
    }
    Ok(members.iter().copied().collect())
}

fn quotas(list: &[[usize; 2]]) -> Vec<DoubleQuota> {
    list.iter().map(|&[p, d]| DoubleQuota::new(p, d)).collect()
}

/// Parses a rule file, checking structure but not the rule conditions.
pub fn parse_rule(text: &str) -> Result<Rule> {
    match from_json::<RuleFile>(text)? {
        RuleFile::Median {
            omega,
            agents,
            phantoms,
            quotas: qs,
        } => {
            let space = space_of(&omega)?;
            let partition = AgentPartition::new(agents.a, agents.d)?;
            let phantoms = phantoms
                .iter()
                .enumerate()
                .map(|(i, e)| elem(&space, e, &format!("phantoms[{i}]")))
                .collect::<Result<Vec<_>>>()?;
            let quota_sets = qs
                .iter()
                .enumerate()
                .map(|(i, q)| QuotaSet::new(pair(&space, &q.pair, &format!("quotas[{i}]"))?, quotas(&q.quotas)))
                .collect::<Result<Vec<_>>>()?;
            Ok(Rule::Median(MedianRule::from_parts(
                space, partition, phantoms, quota_sets,
            )?))
        }
        RuleFile::Coalition {
            omega,
            agents,
            type_anonymous,
            left_coalitions,
            decisive,
        } => {
            let space = space_of(&omega)?;
            let partition = AgentPartition::new(agents.a, agents.d)?;
            let mut entries = Vec::new();
            for (i, entry) in left_coalitions.iter().enumerate() {
                let at = format!("left_coalitions[{i}]");
                let e = elem(&space, &entry.element, &at)?;
                let family = match (&entry.threshold, &entry.minimal) {
                    (Some(k), None) => CoalitionFamily::AtLeast(*k),
                    (None, Some(ms)) => {
                        CoalitionFamily::minimal(ms.iter().map(|m| coalition(m, agents.a, &at)).collect::<Result<_>>()?)
                    }
                    _ => {
                        return Err(Error::Malformed(format!(
                            "{at}: give exactly one of \"threshold\" and \"minimal\""
                        )))
                    }
                };
                entries.push((e, family));
            }
            let lcs = LeftCoalitionSystem::new(entries, type_anonymous)?;
            let mut families = Vec::new();
            for (i, entry) in decisive.iter().enumerate() {
                let at = format!("decisive[{i}]");
                let p = pair(&space, &entry.pair, &at)?;
                let family = match (&entry.counts, &entry.coalitions) {
                    (Some(cs), None) => DecisiveFamily::counts(quotas(cs)),
                    (None, Some(ws)) => DecisiveFamily::coalitions(
                        ws.iter()
                            .map(|w| coalition(w, partition.n(), &at))
                            .collect::<Result<_>>()?,
                    ),
                    _ => {
                        return Err(Error::Malformed(format!(
                            "{at}: give exactly one of \"counts\" and \"coalitions\""
                        )))
                    }
                };
                families.push((p, family));
            }
            let decisive = DecisiveSets::new(families, type_anonymous)?;
            Ok(Rule::Coalition(CoalitionRule::from_parts(
                space, partition, lcs, decisive,
            )?))
        }
    }
}

pub fn parse_profile(text: &str, rule: &Rule) -> Result<Profile> {
    let file: ProfileFile = from_json(text)?;
    let space = rule.space();
    let locate = |vs: &[Num], what: &str| {
        vs.iter()
            .enumerate()
            .map(|(i, v)| point(space, v, &format!("{what}[{i}]")))
            .collect::<Result<Vec<_>>>()
    };
    let profile = Profile::new(locate(&file.peaks, "peaks")?, locate(&file.dips, "dips")?);
    profile.check(space, rule.partition())?;
    Ok(profile)
}

fn write_elem(space: &AlternativeSpace, e: ExtElem) -> Elem {
    match e {
        ExtElem::Single(i) => Elem::Single(Num::from_value(space.point(i))),
        ExtElem::Pair(_) => Elem::Pair(write_pair(space, e).expect("pair")),
    }
}

fn write_pair(space: &AlternativeSpace, e: ExtElem) -> Option<[Num; 2]> {
    e.is_pair().then(|| {
        [
            Num::from_value(space.point(e.left())),
            Num::from_value(space.point(e.right())),
        ]
    })
}

fn members(c: Coalition) -> Vec<usize> {
    c.members().collect()
}

/// Serializes a rule in the file format, pretty-printed with a trailing newline.
pub fn rule_to_json(rule: &Rule) -> String {
    let space = rule.space();
    let partition = rule.partition();
    let omega = space.points().iter().map(|&p| Num::from_value(p)).collect();
    let agents = Agents {
        a: partition.peaked(),
        d: partition.dipped(),
    };
    let file = match rule {
        Rule::Median(r) => RuleFile::Median {
            omega,
            agents,
            phantoms: r.phantoms().as_slice().iter().map(|&g| write_elem(space, g)).collect(),
            quotas: r
                .quota_sets()
                .map(|qs| QuotaEntry {
                    pair: write_pair(space, qs.pair()).expect("quota sets are keyed by pairs"),
                    quotas: qs.quotas().iter().map(|q| [q.peaked, q.dipped]).collect(),
                })
                .collect(),
        },
        Rule::Coalition(r) => RuleFile::Coalition {
            omega,
            agents,
            type_anonymous: r.lcs().type_anonymous(),
            left_coalitions: r
                .lcs()
                .entries()
                .map(|(e, f)| {
                    let (threshold, minimal) = match f {
                        CoalitionFamily::AtLeast(k) => (Some(*k), None),
                        CoalitionFamily::Minimal(ms) => (None, Some(ms.iter().map(|&m| members(m)).collect())),
                    };
                    LeftEntry {
                        element: write_elem(space, e),
                        threshold,
                        minimal,
                    }
                })
                .collect(),
            decisive: r
                .decisive()
                .entries()
                .map(|(p, f)| {
                    let (counts, coalitions) = match f {
                        DecisiveFamily::Counts(cs) => (Some(cs.iter().map(|q| [q.peaked, q.dipped]).collect()), None),
                        DecisiveFamily::Coalitions(ws) => (None, Some(ws.iter().map(|&w| members(w)).collect())),
                    };
                    DecisiveEntry {
                        pair: write_pair(space, p).expect("decisive sets are keyed by pairs"),
                        counts,
                        coalitions,
                    }
                })
                .collect(),
        },
    };
    let mut text = serde_json::to_string_pretty(&file).expect("rule files always serialize");
    text.push('\n');
    text
}

pub fn show_point(space: &AlternativeSpace, i: usize) -> String {
    let p = space.point(i);
    if p.is_integer() {
        p.to_integer().to_string()
    } else {
        format!("{}/{}", p.numer(), p.denom())
    }
}

fn point_value(space: &AlternativeSpace, i: usize) -> Value {
    serde_json::to_value(Num::from_value(space.point(i))).expect("numbers serialize")
}

fn points_value(space: &AlternativeSpace, xs: &[usize]) -> Value {
    Value::Array(xs.iter().map(|&i| point_value(space, i)).collect())
}

/// `[1,1,4]`-style rendering of locations.
pub fn show_points(space: &AlternativeSpace, xs: &[usize]) -> String {
    let shown: Vec<String> = xs.iter().map(|&i| show_point(space, i)).collect();
    format!("[{}]", shown.join(","))
}

pub fn profile_json(space: &AlternativeSpace, p: &Profile) -> Value {
    json!({ "peaks": points_value(space, &p.peaks), "dips": points_value(space, &p.dips) })
}

pub fn witness_json(space: &AlternativeSpace, w: &Witness) -> Value {
    let pt = |i: usize| point_value(space, i);
    match w {
        Witness::Manipulation {
            agent,
            kind,
            profile,
            true_ranking,
            misreport,
            truthful,
            manipulated,
        } => json!({
            "kind": w.kind(),
            "agent": agent,
            "type": kind.to_string(),
            "profile": profile_json(space, profile),
            "true_ranking": points_value(space, true_ranking),
            "misreport": pt(*misreport),
            "truthful_outcome": pt(*truthful),
            "manipulated_outcome": pt(*manipulated),
        }),
        Witness::GroupManipulation {
            coalition,
            profile,
            true_rankings,
            misreports,
            truthful,
            manipulated,
        } => json!({
            "kind": w.kind(),
            "coalition": coalition,
            "profile": profile_json(space, profile),
            "true_rankings": true_rankings.iter().map(|r| points_value(space, r)).collect::<Vec<_>>(),
            "misreports": points_value(space, misreports),
            "truthful_outcome": pt(*truthful),
            "manipulated_outcome": pt(*manipulated),
        }),
        Witness::AnonymityViolation {
            kind,
            agents,
            profile,
            permuted,
            outcome,
            permuted_outcome,
        } => json!({
            "kind": w.kind(),
            "type": kind.to_string(),
            "transposed": [agents.0, agents.1],
            "profile": profile_json(space, profile),
            "permuted": profile_json(space, permuted),
            "outcome": pt(*outcome),
            "permuted_outcome": pt(*permuted_outcome),
        }),
        Witness::EquivalenceCounterexample { profile, left, right } => json!({
            "kind": w.kind(),
            "profile": profile_json(space, profile),
            "left_outcome": pt(*left),
            "right_outcome": pt(*right),
        }),
    }
}

/// One audit record. `elapsed_ms` is included only when given, so reports
/// without it are reproducible byte for byte.
pub fn audit_json(space: &AlternativeSpace, audit: &Audit, elapsed_ms: Option<u128>) -> Value {
    let mut record = serde_json::Map::new();
    record.insert("check".into(), json!(audit.check));
    record.insert("status".into(), json!(audit.status().as_str()));
    let coverage = match audit.coverage {
        Coverage::Exhaustive => json!("exhaustive"),
        Coverage::Sampled { seed } => json!({ "sampled": { "seed": seed } }),
    };
    record.insert("coverage".into(), coverage);
    record.insert("profiles_examined".into(), json!(audit.profiles));
    if let Some(w) = &audit.witness {
        record.insert("witness".into(), witness_json(space, w));
    }
    if let Some(ms) = elapsed_ms {
        record.insert("elapsed_ms".into(), json!(ms));
    }
    Value::Object(record)
}
