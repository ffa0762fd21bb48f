//! Alternatives on a line, the interleaved order over points and contiguous
//! pairs, the two-type society, profiles of restricted peaks and dips, and
//! full single-peaked / single-dipped rankings.

use std::cmp::Ordering;
use std::fmt;

use num_rational::Rational64;

use crate::error::{Error, Result};

pub type Rational = Rational64;

/// The finite, strictly increasing set of feasible outcomes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlternativeSpace {
    points: Vec<Rational>,
}

impl AlternativeSpace {
    pub fn new(points: Vec<Rational>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidSpace("no points".into()));
        }
        if let Some(w) = points.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::InvalidSpace(format!("{} is not strictly below {}", w[0], w[1])));
        }
        Ok(AlternativeSpace { points })
    }

    pub fn from_integers<I: IntoIterator<Item = i64>>(values: I) -> Result<Self> {
        Self::new(values.into_iter().map(Rational::from_integer).collect())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn points(&self) -> &[Rational] {
        &self.points
    }

    pub fn point(&self, index: usize) -> Rational {
        self.points[index]
    }

    pub fn index_of(&self, value: &Rational) -> Option<usize> {
        self.points.binary_search(value).ok()
    }

    pub fn contains(&self, e: ExtElem) -> bool {
        match e {
            ExtElem::Single(i) => i < self.len(),
            ExtElem::Pair(i) => i + 1 < self.len(),
        }
    }

    pub fn min_single(&self) -> ExtElem {
        ExtElem::Single(0)
    }

    pub fn max_single(&self) -> ExtElem {
        ExtElem::Single(self.len() - 1)
    }

    /// The contiguous pair containing the smallest point, if any pair exists.
    pub fn min_pair(&self) -> Option<ExtElem> {
        (self.len() >= 2).then_some(ExtElem::Pair(0))
    }

    pub fn max_pair(&self) -> Option<ExtElem> {
        (self.len() >= 2).then(|| ExtElem::Pair(self.len() - 2))
    }

    /// Points strictly between the extremes.
    pub fn interior(&self) -> impl Iterator<Item = ExtElem> {
        (1..self.len().saturating_sub(1)).map(ExtElem::Single)
    }

    pub fn pairs(&self) -> impl Iterator<Item = ExtElem> {
        (0..self.len().saturating_sub(1)).map(ExtElem::Pair)
    }

    /// Every point and contiguous pair, in interleaved order.
    pub fn extended_elements(&self) -> Vec<ExtElem> {
        (0..2 * self.len() - 1).map(ExtElem::from_key).collect()
    }

    pub fn display(&self, e: ExtElem) -> String {
        match e {
            ExtElem::Single(i) => self.points[i].to_string(),
            ExtElem::Pair(i) => format!("({},{})", self.points[i], self.points[i + 1]),
        }
    }
}

/// A point of the space or a contiguous pair of points, identified by
/// indices into [`AlternativeSpace`]. A pair sits strictly between its two
/// endpoints in the interleaved order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ExtElem {
    Single(usize),
    /// The pair `(points[i], points[i + 1])`.
    Pair(usize),
}

impl ExtElem {
    pub fn key(self) -> usize {
        match self {
            ExtElem::Single(i) => 2 * i,
            ExtElem::Pair(i) => 2 * i + 1,
        }
    }

    pub fn from_key(key: usize) -> Self {
        if key.is_multiple_of(2) {
            ExtElem::Single(key / 2)
        } else {
            ExtElem::Pair(key / 2)
        }
    }

    pub fn is_pair(self) -> bool {
        matches!(self, ExtElem::Pair(_))
    }

    /// Left endpoint of a pair, or the point itself.
    pub fn left(self) -> usize {
        match self {
            ExtElem::Single(i) | ExtElem::Pair(i) => i,
        }
    }

    /// Right endpoint of a pair, or the point itself.
    pub fn right(self) -> usize {
        match self {
            ExtElem::Single(i) => i,
            ExtElem::Pair(i) => i + 1,
        }
    }
}

impl Ord for ExtElem {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

impl PartialOrd for ExtElem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Which endpoint of a contiguous pair is chosen or preferred.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PreferenceType {
    Peaked,
    Dipped,
}

impl fmt::Display for PreferenceType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PreferenceType::Peaked => f.write_str("peaked"),
            PreferenceType::Dipped => f.write_str("dipped"),
        }
    }
}

/// Preference of an agent over the contiguous pair whose left point has
/// index `left`, given the agent's restricted peak or dip.
///
/// No point of the space lies strictly inside a contiguous pair, so the
/// comparison is always strict.
pub fn pair_preference(kind: PreferenceType, location: usize, left: usize) -> Side {
    let prefers_left = match kind {
        PreferenceType::Peaked => location <= left,
        PreferenceType::Dipped => location > left,
    };
    if prefers_left {
        Side::Left
    } else {
        Side::Right
    }
}

/// Single-peaked agents come first (indices `0..a`), then single-dipped
/// agents (`a..a + d`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct AgentPartition {
    a: usize,
    d: usize,
}

impl AgentPartition {
    pub fn new(a: usize, d: usize) -> Result<Self> {
        if a + d == 0 {
            return Err(Error::EmptySociety);
        }
        if a + d > 64 {
            return Err(Error::TooManyAgents(a + d));
        }
        Ok(AgentPartition { a, d })
    }

    pub fn peaked(&self) -> usize {
        self.a
    }

    pub fn dipped(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.a + self.d
    }

    pub fn kind_of(&self, agent: usize) -> PreferenceType {
        if agent < self.a {
            PreferenceType::Peaked
        } else {
            PreferenceType::Dipped
        }
    }
}

/// Restricted peaks of the single-peaked agents and restricted dips of the
/// single-dipped agents, as indices into the alternative space.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Profile {
    pub peaks: Vec<usize>,
    pub dips: Vec<usize>,
}

impl Profile {
    pub fn new(peaks: Vec<usize>, dips: Vec<usize>) -> Self {
        Profile { peaks, dips }
    }

    pub fn check(&self, space: &AlternativeSpace, partition: AgentPartition) -> Result<()> {
        if self.peaks.len() != partition.peaked() {
            return Err(Error::DimensionMismatch {
                what: "number of peaks",
                expected: partition.peaked(),
                found: self.peaks.len(),
            });
        }
        if self.dips.len() != partition.dipped() {
            return Err(Error::DimensionMismatch {
                what: "number of dips",
                expected: partition.dipped(),
                found: self.dips.len(),
            });
        }
        if let Some(&bad) = self.peaks.iter().chain(&self.dips).find(|&&v| v >= space.len()) {
            return Err(Error::UnknownElement(format!("index {bad}")));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.peaks.len() + self.dips.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Peak or dip of agent `agent` under the global agent numbering.
    pub fn location(&self, agent: usize) -> usize {
        let a = self.peaks.len();
        if agent < a {
            self.peaks[agent]
        } else {
            self.dips[agent - a]
        }
    }

    pub fn set_location(&mut self, agent: usize, value: usize) {
        let a = self.peaks.len();
        if agent < a {
            self.peaks[agent] = value;
        } else {
            self.dips[agent - a] = value;
        }
    }

    pub fn swap_agents(&mut self, i: usize, j: usize) {
        let (li, lj) = (self.location(i), self.location(j));
        self.set_location(i, lj);
        self.set_location(j, li);
    }

    /// Position of this profile in the lexicographic enumeration over
    /// `(peaks, dips)` with `m` alternatives.
    pub fn index(&self, m: usize) -> usize {
        self.peaks.iter().chain(&self.dips).fold(0, |acc, &v| acc * m + v)
    }

    pub fn from_index(mut index: usize, m: usize, partition: AgentPartition) -> Self {
        let n = partition.n();
        let mut digits = vec![0; n];
        for slot in digits.iter_mut().rev() {
            *slot = index % m;
            index /= m;
        }
        let dips = digits.split_off(partition.peaked());
        Profile { peaks: digits, dips }
    }
}

/// Number of profiles `m^n`, or `None` on overflow.
pub fn profile_count(m: usize, partition: AgentPartition) -> Option<u128> {
    (m as u128).checked_pow(partition.n() as u32)
}

/// A complete strict order over the space, most preferred first.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Ranking {
    kind: PreferenceType,
    order: Vec<usize>,
    position: Vec<usize>,
}

impl Ranking {
    pub fn new(kind: PreferenceType, order: Vec<usize>) -> Result<Self> {
        let m = order.len();
        let mut position = vec![usize::MAX; m];
        for (pos, &x) in order.iter().enumerate() {
            if x >= m || position[x] != usize::MAX {
                return Err(Error::InvalidRanking(format!("{order:?} is not a permutation")));
            }
            position[x] = pos;
        }
        let peaked_positions: Vec<usize> = match kind {
            PreferenceType::Peaked => position.clone(),
            PreferenceType::Dipped => position.iter().map(|&p| m - 1 - p).collect(),
        };
        if !is_single_peaked(&peaked_positions) {
            return Err(Error::InvalidRanking(format!("{order:?} is not {kind}")));
        }
        Ok(Ranking { kind, order, position })
    }

    pub fn kind(&self) -> PreferenceType {
        self.kind
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Peak of a single-peaked ranking, dip of a single-dipped one.
    pub fn restricted_extremum(&self) -> usize {
        match self.kind {
            PreferenceType::Peaked => self.order[0],
            PreferenceType::Dipped => self.order[self.order.len() - 1],
        }
    }

    /// Strict preference of `x` over `y`.
    pub fn prefers(&self, x: usize, y: usize) -> bool {
        self.position[x] < self.position[y]
    }
}

// Positions must strictly increase when walking away from the top element.
fn is_single_peaked(position: &[usize]) -> bool {
    let Some(peak) = position.iter().position(|&p| p == 0) else {
        return false;
    };
    position[..=peak].windows(2).all(|w| w[0] > w[1]) && position[peak..].windows(2).all(|w| w[0] < w[1])
}

/// All `2^(m-1)` rankings of the given type, grouped by extremum in
/// increasing order of location.
pub fn enumerate_rankings(space: &AlternativeSpace, kind: PreferenceType) -> Vec<Ranking> {
    let m = space.len();
    let mut orders = Vec::with_capacity(1 << (m - 1));
    for peak in 0..m {
        let mut order = vec![peak];
        grow(&mut order, peak, peak, m, &mut orders);
    }
    orders
        .into_iter()
        .map(|mut order| {
            if kind == PreferenceType::Dipped {
                order.reverse();
            }
            let position = invert(&order);
            Ranking { kind, order, position }
        })
        .collect()
}

fn grow(order: &mut Vec<usize>, lo: usize, hi: usize, m: usize, out: &mut Vec<Vec<usize>>) {
    if order.len() == m {
        out.push(order.clone());
        return;
    }
    if lo > 0 {
        order.push(lo - 1);
        grow(order, lo - 1, hi, m, out);
        order.pop();
    }
    if hi + 1 < m {
        order.push(hi + 1);
        grow(order, lo, hi + 1, m, out);
        order.pop();
    }
}

/// Whether some ranking of `kind` with extremum `e` strictly prefers `x` to `y`.
pub fn can_prefer(kind: PreferenceType, e: usize, x: usize, y: usize) -> bool {
    if x == y {
        return false;
    }
    // A peaked agent always prefers the nearer of two points on the same
    // side; a dipped agent always prefers the farther one.
    let (near, far) = match kind {
        PreferenceType::Peaked => (y, x),
        PreferenceType::Dipped => (x, y),
    };
    !(e <= near && near < far || far < near && near <= e)
}

/// First ranking, in [`enumerate_rankings`] order, of type `kind` with
/// extremum `e` that strictly prefers some element of `better` to `worse`.
pub fn first_ranking_preferring(
    m: usize,
    kind: PreferenceType,
    e: usize,
    better: &[usize],
    worse: usize,
) -> Option<Ranking> {
    // Work on the single-peaked order; a dipped ranking is its reverse.
    let pairs: Vec<(usize, usize)> = better
        .iter()
        .filter(|&&t| t != worse)
        .map(|&t| match kind {
            PreferenceType::Peaked => (t, worse),
            PreferenceType::Dipped => (worse, t),
        })
        .collect();
    let mut order = vec![e];
    if !search_first(&mut order, e, e, m, &pairs) {
        return None;
    }
    if kind == PreferenceType::Dipped {
        order.reverse();
    }
    let position = invert(&order);
    Some(Ranking { kind, order, position })
}

enum Status {
    Found,
    Dead,
    Open,
}

// Status of "some `a` is ranked above its `b`" once `[lo, hi]` is placed.
fn status(lo: usize, hi: usize, pairs: &[(usize, usize)]) -> Status {
    let placed = |x: usize| lo <= x && x <= hi;
    let mut open = false;
    for &(a, b) in pairs {
        match (placed(a), placed(b)) {
            (true, false) => return Status::Found,
            (_, true) => {}
            (false, false) => {
                let blocked = a < lo && a < b && b < lo || a > hi && hi < b && b < a;
                open |= !blocked;
            }
        }
    }
    if open {
        Status::Open
    } else {
        Status::Dead
    }
}

fn search_first(order: &mut Vec<usize>, lo: usize, hi: usize, m: usize, pairs: &[(usize, usize)]) -> bool {
    match status(lo, hi, pairs) {
        Status::Dead => false,
        Status::Found => {
            let (mut lo, mut hi) = (lo, hi);
            while order.len() < m {
                if lo > 0 {
                    lo -= 1;
                    order.push(lo);
                } else {
                    hi += 1;
                    order.push(hi);
                }
            }
            true
        }
        Status::Open => {
            if lo > 0 {
                order.push(lo - 1);
                if search_first(order, lo - 1, hi, m, pairs) {
                    return true;
                }
                order.pop();
            }
            if hi + 1 < m {
                order.push(hi + 1);
                if search_first(order, lo, hi + 1, m, pairs) {
                    return true;
                }
                order.pop();
            }
            false
        }
    }
}

fn invert(order: &[usize]) -> Vec<usize> {
    let mut position = vec![0; order.len()];
    for (pos, &x) in order.iter().enumerate() {
        position[x] = pos;
    }
    position
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space(m: i64) -> AlternativeSpace {
        AlternativeSpace::from_integers(1..=m).unwrap()
    }

    #[test]
    fn preference_search_agrees_with_enumeration() {
        for m in 1..=6 {
            let s = space(m as i64);
            for kind in [PreferenceType::Peaked, PreferenceType::Dipped] {
                let all = enumerate_rankings(&s, kind);
                for e in 0..m {
                    for worse in 0..m {
                        for mask in 0u32..1 << m {
                            let better: Vec<usize> = (0..m).filter(|b| mask >> b & 1 == 1).collect();
                            let expected = all
                                .iter()
                                .find(|r| r.restricted_extremum() == e && better.iter().any(|&b| r.prefers(b, worse)));
                            let found = first_ranking_preferring(m, kind, e, &better, worse);
                            assert_eq!(found.as_ref(), expected, "m={m} {kind} e={e} {better:?} over {worse}");
                            if better.len() == 1 {
                                assert_eq!(can_prefer(kind, e, better[0], worse), expected.is_some());
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn extended_order_interleaves_pairs() {
        let s = space(3);
        let shown: Vec<String> = s.extended_elements().into_iter().map(|e| s.display(e)).collect();
        assert_eq!(shown, ["1", "(1,2)", "2", "(2,3)", "3"]);

        let s = AlternativeSpace::from_integers([5]).unwrap();
        assert_eq!(s.extended_elements(), vec![ExtElem::Single(0)]);

        let s = space(4);
        let all = s.extended_elements();
        assert_eq!(all.len(), 7);
        assert_eq!(&all[5..], &[ExtElem::Pair(2), ExtElem::Single(3)]);
    }

    #[test]
    fn interleaved_order_is_total_and_strict() {
        let all = space(5).extended_elements();
        for (i, x) in all.iter().enumerate() {
            for (j, y) in all.iter().enumerate() {
                assert_eq!(x < y, i < j);
                assert_eq!(x == y, i == j);
            }
        }
    }

    #[test]
    fn space_rejects_bad_points() {
        assert!(AlternativeSpace::from_integers([]).is_err());
        assert!(AlternativeSpace::from_integers([1, 1]).is_err());
        assert!(AlternativeSpace::from_integers([2, 1]).is_err());
        let s = AlternativeSpace::new(vec![Rational::new(1, 2), Rational::new(3, 2)]).unwrap();
        assert_eq!(s.display(ExtElem::Pair(0)), "(1/2,3/2)");
    }

    #[test]
    fn pair_preferences_match_worked_profiles() {
        // Indices are zero-based: point 3 is index 2, pair (3,4) has left index 2.
        assert_eq!(pair_preference(PreferenceType::Peaked, 0, 2), Side::Left);
        assert_eq!(pair_preference(PreferenceType::Dipped, 1, 2), Side::Right);
        assert_eq!(pair_preference(PreferenceType::Dipped, 3, 2), Side::Left);
        assert_eq!(pair_preference(PreferenceType::Peaked, 3, 2), Side::Right);
    }

    #[test]
    fn rankings_for_three_points() {
        let s = space(3);
        let peaked: Vec<Vec<usize>> = enumerate_rankings(&s, PreferenceType::Peaked)
            .iter()
            .map(|r| r.order().to_vec())
            .collect();
        assert_eq!(peaked, vec![vec![0, 1, 2], vec![1, 0, 2], vec![1, 2, 0], vec![2, 1, 0]]);

        let dipped = enumerate_rankings(&s, PreferenceType::Dipped);
        assert_eq!(dipped.len(), 4);
        for (d, p) in dipped.iter().zip(&peaked) {
            let mut rev = p.clone();
            rev.reverse();
            assert_eq!(d.order(), rev.as_slice());
            assert_eq!(d.restricted_extremum(), p[0]);
        }
        assert_eq!(enumerate_rankings(&space(1), PreferenceType::Peaked).len(), 1);
    }

    #[test]
    fn extremum_of_explicit_rankings() {
        let r = Ranking::new(PreferenceType::Peaked, vec![1, 2, 0]).unwrap();
        assert_eq!(r.restricted_extremum(), 1);
        let r = Ranking::new(PreferenceType::Dipped, vec![0, 2, 1]).unwrap();
        assert_eq!(r.restricted_extremum(), 1);
        assert!(Ranking::new(PreferenceType::Peaked, vec![0, 2, 1]).is_err());
        assert!(Ranking::new(PreferenceType::Dipped, vec![1, 0, 2]).is_err());
        assert!(Ranking::new(PreferenceType::Peaked, vec![0, 0, 1]).is_err());
    }

    #[test]
    fn profile_index_round_trips_lexicographically() {
        let p = AgentPartition::new(2, 1).unwrap();
        let profiles: Vec<Profile> = (0..27).map(|i| Profile::from_index(i, 3, p)).collect();
        assert_eq!(profiles[0], Profile::new(vec![0, 0], vec![0]));
        assert_eq!(profiles[1], Profile::new(vec![0, 0], vec![1]));
        assert_eq!(profiles[26], Profile::new(vec![2, 2], vec![2]));
        assert!(profiles.windows(2).all(|w| w[0] < w[1]));
        for (i, prof) in profiles.iter().enumerate() {
            assert_eq!(prof.index(3), i);
        }
    }

    #[test]
    fn partition_bounds() {
        assert!(AgentPartition::new(0, 0).is_err());
        assert!(AgentPartition::new(40, 30).is_err());
        let p = AgentPartition::new(2, 3).unwrap();
        assert_eq!(p.kind_of(1), PreferenceType::Peaked);
        assert_eq!(p.kind_of(2), PreferenceType::Dipped);
    }
}
