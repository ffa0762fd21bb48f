//! Acceptance checks shared by the acceptance runner and the ordinary test
//! targets. Each returns a one-line summary or a description of the failure.

use std::process::Command;

use num_rational::Rational64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use peakdip::audit::{
    check_equivalence, check_type_anonymity, check_type_anonymity_at, find_group_manipulation, find_manipulation,
    random_valid_rule, tabulate, AuditBudget, Coverage, Status, Witness,
};
use peakdip::coalition::DecisiveFamily;
use peakdip::domain::profile_count;
use peakdip::io::parse_rule;
use peakdip::transform::{convert, Representation};
use peakdip::ExtElem::{Pair, Single};
use peakdip::{AgentPartition, AlternativeSpace, DoubleQuota, Error, ExtElem, MedianRule, Profile, QuotaSet, Rule};

use super::{fixture, fixture_path, moulin_median, profile, quota_vote};

pub type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_peakdip")
}

fn run(args: &[&str]) -> Result<(i32, Vec<u8>), String> {
    let out = Command::new(bin()).args(args).output().map_err(|e| e.to_string())?;
    Ok((out.status.code().unwrap_or(-1), out.stdout))
}

/// Worked outcomes, in both representations.
pub fn example_fidelity() -> Outcome {
    let cases = [
        (profile(&[1, 2, 2], &[1, 1, 1]), 2),
        (profile(&[1, 2, 2], &[3, 1, 4]), 2),
        (profile(&[1, 4, 4], &[2, 2, 1]), 4),
        (profile(&[1, 4, 4], &[2, 2, 4]), 3),
    ];
    for name in ["example12_median.json", "example34_coalition.json"] {
        let rule = fixture(name);
        ensure!(rule.validate().is_ok(), "{name} does not validate");
        for (p, want) in &cases {
            let got = rule.eval(p).map_err(|e| e.to_string())? + 1;
            ensure!(got == *want, "{name} at {p:?}: got {got}, expected {want}");
        }
        // Every profile with peaks (1,2,2) ends at 2 whatever the dips.
        let table = tabulate(&rule, &AuditBudget::default()).map_err(|e| e.to_string())?;
        for (p, o) in table.iter() {
            if p.peaks == [0, 1, 1] {
                ensure!(o == 1, "{name} at {p:?}: got {}, expected 2", o + 1);
            }
        }
    }
    Ok("both representations reproduce 2, 4, 3".into())
}

/// Converting the median rule yields the coalition rule, and back.
pub fn equivalence() -> Outcome {
    let (code, stdout) = run(&["convert", &fixture_path("example12_median.json"), "--to", "coalition"])?;
    ensure!(code == 0, "convert exited with {code}");
    let converted = parse_rule(&String::from_utf8_lossy(&stdout)).map_err(|e| e.to_string())?;
    let Rule::Coalition(c) = &converted else {
        return Err("convert did not produce a coalition rule".into());
    };
    let thresholds: Vec<usize> = c
        .lcs()
        .thresholds(3)
        .ok_or("converted left coalitions are not size-closed")?
        .into_iter()
        .map(|(_, k)| k)
        .collect();
    ensure!(thresholds == [3, 2, 2, 0], "thresholds {thresholds:?}");
    let counts = match c.decisive().get(Pair(2)) {
        Some(DecisiveFamily::Counts(q)) => q.clone(),
        other => return Err(format!("decisive sets at (3,4): {other:?}")),
    };
    ensure!(
        counts == [DoubleQuota::new(0, 2), DoubleQuota::new(1, 1)],
        "count pairs {counts:?}"
    );
    ensure!(
        converted == fixture("example34_coalition.json"),
        "converted rule differs from the worked coalition rule"
    );

    let median = fixture("example12_median.json");
    let check = check_equivalence(&median, &converted, &AuditBudget::default()).map_err(|e| e.to_string())?;
    ensure!(check.witness.is_none(), "difference: {:?}", check.witness);
    ensure!(
        check.coverage == Coverage::Exhaustive && check.profiles == 4096,
        "covered {} profiles",
        check.profiles
    );
    let (back, _) = convert(&converted, Representation::Median).map_err(|e| e.to_string())?;
    ensure!(back == median, "round trip changed the median rule");
    Ok("thresholds (3,2,2,0), counts {(0,2),(1,1)}, equal on 4096 profiles".into())
}

/// Sizes drawn per seed: m ≤ 4, a ≤ 3, d ≤ 3, at least one agent, and a
/// combination that admits a valid rule.
pub fn seeded_rule(seed: u64, max_agents: usize, rep: Representation) -> Rule {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    loop {
        let m = rng.gen_range(1..=4);
        let a = rng.gen_range(0..=3);
        let d = rng.gen_range(0..=3);
        if a + d == 0 || a + d > max_agents {
            continue;
        }
        let space = AlternativeSpace::from_integers(1..=m as i64).unwrap();
        let partition = AgentPartition::new(a, d).unwrap();
        match random_valid_rule(&space, partition, seed, rep) {
            Ok(rule) => return rule,
            Err(Error::Unsatisfiable(_)) => continue,
            Err(e) => panic!("seed {seed}: {e}"),
        }
    }
}

fn describe(rule: &Rule) -> String {
    format!(
        "m={} a={} d={}",
        rule.space().len(),
        rule.partition().peaked(),
        rule.partition().dipped()
    )
}

/// Seeded valid rules are strategy-proof, type-anonymous and convert
/// without changing behaviour.
pub fn property_suite(seeds: u64) -> Outcome {
    let budget = AuditBudget::default();
    let mut profiles = 0u64;
    for rep in [Representation::Median, Representation::Coalition] {
        for seed in 0..seeds {
            let rule = seeded_rule(seed, 6, rep);
            let tag = format!("{rep:?} seed {seed} ({})", describe(&rule));
            ensure!(rule.validate().is_ok(), "{tag}: invalid");
            let sp = find_manipulation(&rule, &budget);
            ensure!(
                sp.status() == Status::Pass,
                "{tag}: sp {:?} {:?}",
                sp.status(),
                sp.witness
            );
            let anon = check_type_anonymity(&rule, &budget);
            ensure!(
                anon.status() == Status::Pass,
                "{tag}: anonymity {:?} {:?}",
                anon.status(),
                anon.witness
            );
            let other = match rep {
                Representation::Median => Representation::Coalition,
                Representation::Coalition => Representation::Median,
            };
            let (converted, _) = convert(&rule, other).map_err(|e| format!("{tag}: {e}"))?;
            ensure!(converted.validate().is_ok(), "{tag}: converted rule invalid");
            let eq = check_equivalence(&rule, &converted, &budget).map_err(|e| e.to_string())?;
            ensure!(
                eq.status() == Status::Pass,
                "{tag}: conversion differs {:?}",
                eq.witness
            );
            profiles += sp.profiles;
        }
    }
    Ok(format!("{} rules, {profiles} profiles audited", 2 * seeds))
}

/// Exhaustive group search over small societies.
pub fn group_spot_check(rules: u64) -> Outcome {
    let mut coalitions_of_two = 0;
    for seed in 0..rules {
        let rep = if seed % 2 == 0 {
            Representation::Median
        } else {
            Representation::Coalition
        };
        let rule = seeded_rule(1000 + seed, 4, rep);
        let n = rule.partition().n();
        coalitions_of_two += usize::from(n >= 2);
        let budget = AuditBudget {
            coalition_cap: n,
            ..Default::default()
        };
        let gsp = find_group_manipulation(&rule, &budget);
        ensure!(
            gsp.status() == Status::Pass,
            "{rep:?} seed {} ({}): {:?} {:?}",
            1000 + seed,
            describe(&rule),
            gsp.status(),
            gsp.witness
        );
    }
    Ok(format!(
        "{rules} rules, {coalitions_of_two} with more than one agent, no witness"
    ))
}

/// The identity-dependent rule and the hand-broken rules.
pub fn negative_controls() -> Outcome {
    let budget = AuditBudget::default();
    let x = fixture("example5_coalition.json");
    ensure!(x.validate().is_ok(), "identity-dependent rule should validate");
    ensure!(
        find_manipulation(&x, &budget).status() == Status::Pass,
        "identity-dependent rule is manipulable"
    );
    let anon = check_type_anonymity(&x, &budget);
    ensure!(anon.status() == Status::Witness, "no global anonymity witness");
    ensure!(
        anon.witness.as_ref().is_some_and(|w| w.replay(&x)),
        "global witness does not replay"
    );
    let at = check_type_anonymity_at(&x, &profile(&[2, 1, 4], &[2, 2, 4])).map_err(|e| e.to_string())?;
    match at {
        Some(Witness::AnonymityViolation {
            permuted,
            outcome,
            permuted_outcome,
            ..
        }) => {
            ensure!(permuted.dips == [3, 1, 1], "permuted dips {:?}", permuted.dips);
            ensure!(
                (outcome, permuted_outcome) == (3, 2),
                "outcomes {} vs {}",
                outcome + 1,
                permuted_outcome + 1
            );
        }
        other => return Err(format!("expected a witness at (2,1,4 | 2,2,4), got {other:?}")),
    }

    let mut caught = Vec::new();
    for name in [
        "mutant_zero_dipped_quota.json",
        "mutant_minimal_quota.json",
        "mutant_monotone.json",
    ] {
        let rule = fixture(name);
        let rejected = !rule.validate().is_ok();
        let witness = find_manipulation(&rule, &budget).witness;
        if let Some(w) = &witness {
            ensure!(w.replay(&rule), "{name}: witness does not replay");
        }
        ensure!(rejected || witness.is_some(), "{name} slipped through");
        caught.push(name);
    }
    let parse = std::fs::read_to_string(fixture_path("mutant_nonadjacent_pair.json")).unwrap();
    ensure!(parse_rule(&parse).is_err(), "non-adjacent pair accepted");
    Ok(format!(
        "dips (2,2,4)->(4,2,2) gives 4 vs 3; {} mutants rejected",
        caught.len() + 1
    ))
}

/// All phantom vectors without pairs that validate, for `a` peaked agents.
fn moulin_rules(space: &AlternativeSpace, a: usize) -> Vec<MedianRule> {
    let m = space.len();
    let mut out = Vec::new();
    let mut ph = vec![0usize; a + 1];
    loop {
        let phantoms: Vec<ExtElem> = ph.iter().map(|&i| Single(i)).collect();
        if let Ok(rule) = MedianRule::new(space.clone(), AgentPartition::new(a, 0).unwrap(), phantoms, vec![]) {
            out.push(rule);
        }
        // Next non-decreasing vector.
        let Some(i) = (0..=a).rev().find(|&i| ph[i] + 1 < m) else {
            return out;
        };
        let v = ph[i] + 1;
        ph[i..].iter_mut().for_each(|x| *x = v);
    }
}

/// Without dipped agents the rule is a median of peaks and phantoms; with
/// only dipped agents and two points it is a quota vote.
pub fn degenerate_reductions() -> Outcome {
    let r = Rational64::new;
    let mut checked = 0u64;
    for m in 1..=5 {
        let uneven = [r(-5, 2), r(-1, 1), r(0, 1), r(1, 3), r(4, 1)];
        let space = AlternativeSpace::new(uneven[..m].to_vec()).unwrap();
        for a in 0..=4 {
            let partition = AgentPartition::new(a, 0);
            let Ok(partition) = partition else { continue };
            let rules = moulin_rules(&space, a);
            ensure!(m > 1 || a > 0 || !rules.is_empty(), "no rule for m=1 a=0");
            for rule in rules {
                let values: Vec<Rational64> = rule
                    .phantoms()
                    .as_slice()
                    .iter()
                    .map(|e| space.point(e.left()))
                    .collect();
                let as_coalition = convert(&rule.clone().into(), Representation::Coalition)
                    .map_err(|e| e.to_string())?
                    .0;
                let count = profile_count(m, partition).unwrap() as usize;
                for i in 0..count {
                    let p = Profile::from_index(i, m, partition);
                    let want = moulin_median(space.points(), &p.peaks, &values);
                    let got = space.point(rule.outcome(&p));
                    ensure!(
                        got == want,
                        "m={m} phantoms {values:?} peaks {:?}: {got} vs {want}",
                        p.peaks
                    );
                    ensure!(
                        space.point(as_coalition.outcome(&p)) == want,
                        "coalition form differs at m={m} peaks {:?}",
                        p.peaks
                    );
                    checked += 1;
                }
            }
        }
    }

    let two = AlternativeSpace::new(vec![r(1, 2), r(7, 3)]).unwrap();
    let mut votes = 0u64;
    for d in 1..=6 {
        let partition = AgentPartition::new(0, d).unwrap();
        for q in 1..=d {
            let rule = MedianRule::new(
                two.clone(),
                partition,
                vec![Pair(0)],
                vec![QuotaSet::new(Pair(0), vec![DoubleQuota::new(0, q)]).unwrap()],
            )
            .map_err(|e| e.to_string())?;
            let as_coalition = convert(&rule.clone().into(), Representation::Coalition)
                .map_err(|e| e.to_string())?
                .0;
            for i in 0..1usize << d {
                let p = Profile::from_index(i, 2, partition);
                let want = quota_vote(&p.dips, q);
                ensure!(rule.outcome(&p) == want, "d={d} quota {q} dips {:?}", p.dips);
                ensure!(
                    as_coalition.outcome(&p) == want,
                    "coalition form, d={d} quota {q} dips {:?}",
                    p.dips
                );
                votes += 1;
            }
        }
    }
    Ok(format!("{checked} median profiles, {votes} quota profiles"))
}

/// Two audit runs with the same flags print the same bytes.
pub fn determinism() -> Outcome {
    let sets: [&[&str]; 2] = [
        &["--checks", "sp,gsp,anon"],
        &[
            "--checks",
            "sp,anon,gsp",
            "--seed",
            "17",
            "--max-exhaustive",
            "100",
            "--samples",
            "300",
            "--coalition-cap",
            "2",
        ],
    ];
    for (rule, flags) in [("example12_median.json", sets[0]), ("example5_coalition.json", sets[1])] {
        let path = fixture_path(rule);
        let mut args = vec!["audit", path.as_str()];
        args.extend_from_slice(flags);
        let first = run(&args)?;
        let second = run(&args)?;
        ensure!(!first.1.is_empty(), "{rule}: empty report");
        ensure!(first == second, "{rule}: runs differ");
        let threaded = {
            let mut a = args.clone();
            a.extend(["--jobs", "3"]);
            run(&a)?
        };
        ensure!(threaded == first, "{rule}: --jobs changes the report");
    }
    Ok("identical reports, exhaustive and sampled, with 1 or 3 threads".into())
}
