//! Bitset coalitions and the antichain helpers shared by both rule
//! representations.

use std::fmt;

/// A set of agents, bit `i` standing for agent `i`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Coalition(u64);

impl Coalition {
    pub const EMPTY: Coalition = Coalition(0);

    pub fn from_bits(bits: u64) -> Self {
        Coalition(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    /// Agents `0..k`.
    pub fn first(k: usize) -> Self {
        if k >= 64 {
            Coalition(u64::MAX)
        } else {
            Coalition((1u64 << k) - 1)
        }
    }

    /// Agents `start..start + k`.
    pub fn range(start: usize, k: usize) -> Self {
        Coalition(Self::first(k).0 << start)
    }

    pub fn contains(self, agent: usize) -> bool {
        self.0 >> agent & 1 == 1
    }

    pub fn insert(&mut self, agent: usize) {
        self.0 |= 1 << agent;
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_subset(self, other: Coalition) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn intersect(self, other: Coalition) -> Coalition {
        Coalition(self.0 & other.0)
    }

    pub fn union(self, other: Coalition) -> Coalition {
        Coalition(self.0 | other.0)
    }

    pub fn members(self) -> impl Iterator<Item = usize> {
        let bits = self.0;
        (0..64).filter(move |i| bits >> i & 1 == 1)
    }
}

impl FromIterator<usize> for Coalition {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut c = Coalition::EMPTY;
        for i in iter {
            c.insert(i);
        }
        c
    }
}

impl fmt::Display for Coalition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let members: Vec<String> = self.members().map(|m| m.to_string()).collect();
        write!(f, "{{{}}}", members.join(","))
    }
}

/// Inclusion-minimal members of `family`, sorted and deduplicated.
pub fn minimize(family: &[Coalition]) -> Vec<Coalition> {
    let mut sorted = family.to_vec();
    sorted.sort_by_key(|c| (c.len(), *c));
    sorted.dedup();
    let mut minimal: Vec<Coalition> = Vec::new();
    for c in sorted {
        if !minimal.iter().any(|m| m.is_subset(c)) {
            minimal.push(c);
        }
    }
    minimal.sort();
    minimal
}

pub fn is_antichain(family: &[Coalition]) -> bool {
    family
        .iter()
        .enumerate()
        .all(|(i, x)| family.iter().enumerate().all(|(j, y)| i == j || !x.is_subset(*y)))
}

/// All subsets of `{0..n}` of size `k`, in increasing bit order.
pub fn subsets_of_size(n: usize, k: usize) -> impl Iterator<Item = Coalition> {
    let limit: u64 = if n >= 64 { u64::MAX } else { 1u64 << n };
    let start = if k > n { None } else { Some(Coalition::first(k).0) };
    let mut next = start;
    std::iter::from_fn(move || {
        let cur = next?;
        if k == 0 {
            next = None;
            return Some(Coalition(0));
        }
        if n < 64 && cur >= limit {
            return None;
        }
        // Gosper's hack
        let c = cur & cur.wrapping_neg();
        let r = cur.wrapping_add(c);
        next = if r == 0 { None } else { Some((((r ^ cur) >> 2) / c) | r) };
        Some(Coalition(cur))
    })
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}
