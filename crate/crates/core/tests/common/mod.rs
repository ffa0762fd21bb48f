#![allow(dead_code)]

use num_rational::Rational64;
use peakdip::io::parse_rule;
use peakdip::{Profile, Rule};

pub fn fixture_text(name: &str) -> String {
    let path = format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(path).unwrap()
}

pub fn fixture(name: &str) -> Rule {
    parse_rule(&fixture_text(name)).unwrap()
}

pub fn fixture_path(name: &str) -> String {
    format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

/// Profile over {1,..,m} written with the alternatives themselves.
pub fn profile(peaks: &[usize], dips: &[usize]) -> Profile {
    Profile::new(
        peaks.iter().map(|v| v - 1).collect(),
        dips.iter().map(|v| v - 1).collect(),
    )
}

/// Median of peaks and phantom points computed on the alternatives
/// themselves, with no reference to the interleaved order.
pub fn moulin_median(points: &[Rational64], peaks: &[usize], phantoms: &[Rational64]) -> Rational64 {
    let mut values: Vec<Rational64> = peaks
        .iter()
        .map(|&p| points[p])
        .chain(phantoms.iter().copied())
        .collect();
    values.sort();
    values[peaks.len()]
}

/// Two alternatives, no single-peaked agents: choose the lower one when at
/// least `quota` dipped agents have their dip on the higher one.
pub fn quota_vote(dips: &[usize], quota: usize) -> usize {
    let prefer_low = dips.iter().filter(|&&q| q == 1).count();
    if prefer_low >= quota {
        0
    } else {
        1
    }
}

pub mod criteria;
