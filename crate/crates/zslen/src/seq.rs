//! Multiset sequences over a finite abelian group.
//!
//! A sequence `S = g_1 ... g_l` is an unordered multiset, stored as an
//! ordered map from element to multiplicity. This module carries the basic
//! functionals: length `|S|`, support, multiplicity `v_g(S)`, sum `sigma(S)`,
//! subsequence sums `Sigma(S)`, negation `-S`, divisibility, and the g-norm.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_rational::Ratio;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{GroupElement, GroupSpec};

/// Default cap on `|S|` for subsequence-sum style computations.
pub const DEFAULT_SEQUENCE_LIMIT: u64 = 64;

/// A finite multiset over a group; multiplicities are always >= 1.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sequence {
    group: GroupSpec,
    entries: BTreeMap<GroupElement, u32>,
}

impl Sequence {
    pub fn empty(group: &GroupSpec) -> Sequence {
        Sequence { group: group.clone(), entries: BTreeMap::new() }
    }

    pub fn from_elements<I>(group: &GroupSpec, elems: I) -> Result<Sequence>
    where
        I: IntoIterator<Item = GroupElement>,
    {
        let mut s = Sequence::empty(group);
        for e in elems {
            s.push(&e, 1)?;
        }
        Ok(s)
    }

    /// Adds `mult` copies of `e`.
    pub fn push(&mut self, e: &GroupElement, mult: u32) -> Result<()> {
        if e.group() != &self.group {
            return Err(Error::GroupMismatch(
                self.group.descriptor(),
                e.group().descriptor(),
            ));
        }
        if mult == 0 {
            return Ok(());
        }
        let v = self.entries.entry(e.clone()).or_insert(0);
        *v = v.checked_add(mult).ok_or(Error::LengthLimitExceeded {
            len: u32::MAX as u64,
            limit: u32::MAX as u64,
        })?;
        Ok(())
    }

    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    /// `|S|`, counted with multiplicity.
    pub fn len(&self) -> u64 {
        self.entries.values().map(|&m| m as u64).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `supp(S)` in lexicographic element order.
    pub fn support(&self) -> impl Iterator<Item = &GroupElement> {
        self.entries.keys()
    }

    /// `v_g(S)`.
    pub fn multiplicity(&self, g: &GroupElement) -> u32 {
        self.entries.get(g).copied().unwrap_or(0)
    }

    /// `(element, multiplicity)` pairs in lexicographic element order.
    pub fn entries(&self) -> impl Iterator<Item = (&GroupElement, u32)> {
        self.entries.iter().map(|(g, &m)| (g, m))
    }

    /// Elements with multiplicity expanded, in lexicographic order.
    pub fn elements(&self) -> impl Iterator<Item = &GroupElement> {
        self.entries
            .iter()
            .flat_map(|(g, &m)| std::iter::repeat(g).take(m as usize))
    }

    /// `sigma(S)`, the sum of all entries; the empty sequence sums to 0.
    pub fn sigma(&self) -> GroupElement {
        let mut acc = self.group.zero();
        for (g, m) in self.entries() {
            acc = acc.add(&g.scale(m as u64)).expect("same group");
        }
        acc
    }

    /// `Sigma(S) = { sigma(T) : T nonempty subsequence of S }`, by reachable-sum
    /// dynamic programming rather than subset enumeration.
    pub fn subsequence_sums(&self) -> Result<BTreeSet<GroupElement>> {
        self.subsequence_sums_capped(DEFAULT_SEQUENCE_LIMIT)
    }

    pub fn subsequence_sums_capped(&self, limit: u64) -> Result<BTreeSet<GroupElement>> {
        if self.len() > limit {
            return Err(Error::LengthLimitExceeded { len: self.len(), limit });
        }
        let mut sums: BTreeSet<GroupElement> = BTreeSet::new();
        for g in self.elements() {
            let mut next = sums.clone();
            next.insert(g.clone());
            for s in &sums {
                next.insert(s.add(g).expect("same group"));
            }
            sums = next;
        }
        Ok(sums)
    }

    pub fn is_zero_sum(&self) -> bool {
        self.sigma().is_zero()
    }

    /// True iff `0` is not a subsequence sum; the empty sequence is zero-sum free.
    pub fn is_zero_sum_free(&self) -> Result<bool> {
        Ok(!self.subsequence_sums()?.contains(&self.group.zero()))
    }

    /// True iff `S` is an atom: nonempty, `sigma(S) = 0`, and every proper
    /// nonempty subsequence is zero-sum free. A proper subsequence omits some
    /// instance of some supported element, so it suffices to check `S g^{-1}`
    /// for each `g` in the support.
    pub fn is_minimal_zero_sum(&self) -> Result<bool> {
        if self.is_empty() || !self.is_zero_sum() {
            return Ok(false);
        }
        for g in self.support() {
            let rest = self.divide(&Sequence::from_elements(&self.group, [g.clone()])?)?;
            if !rest.is_zero_sum_free()? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// `||S||_g`: writing each entry as `n_i * g` with `n_i` in `[1, ord(g)]`,
    /// the value `(n_1 + ... + n_l) / ord(g)`. Requires `ord(g) >= 2` and
    /// `supp(S)` inside the cyclic group generated by `g`.
    pub fn g_norm(&self, g: &GroupElement) -> Result<Ratio<u64>> {
        if g.group() != &self.group {
            return Err(Error::GroupMismatch(
                self.group.descriptor(),
                g.group().descriptor(),
            ));
        }
        let n = g.order();
        if n < 2 {
            return Err(Error::InvalidParameter(
                "g-norm needs an element of order at least 2".into(),
            ));
        }
        // k*g for k in 1..=n covers <g> exactly once, with 0 at k = n.
        let mut multiple_of: BTreeMap<GroupElement, u64> = BTreeMap::new();
        for k in 1..=n {
            multiple_of.insert(g.scale(k), k);
        }
        let mut total: u64 = 0;
        for (h, m) in self.entries() {
            let k = *multiple_of
                .get(h)
                .ok_or_else(|| Error::OutsideCyclicSpan(h.to_string(), g.to_string()))?;
            total += k * m as u64;
        }
        Ok(Ratio::new(total, n))
    }

    /// `-S`, negating every entry.
    pub fn negate(&self) -> Sequence {
        let mut s = Sequence::empty(&self.group);
        for (g, m) in self.entries() {
            s.push(&g.negate(), m).expect("same group");
        }
        s
    }

    /// `S * T`, adding multiplicities.
    pub fn multiply(&self, other: &Sequence) -> Result<Sequence> {
        if other.group != self.group {
            return Err(Error::GroupMismatch(
                self.group.descriptor(),
                other.group.descriptor(),
            ));
        }
        let mut s = self.clone();
        for (g, m) in other.entries() {
            s.push(g, m)?;
        }
        Ok(s)
    }

    /// True iff `self` divides `other` (multiset containment).
    pub fn divides(&self, other: &Sequence) -> bool {
        self.group == other.group
            && self
                .entries()
                .all(|(g, m)| other.multiplicity(g) >= m)
    }

    /// `S T^{-1}`, subtracting multiplicities; errors unless `T` divides `S`.
    pub fn divide(&self, other: &Sequence) -> Result<Sequence> {
        if !other.divides(self) {
            return Err(Error::NotDivisible(other.to_string(), self.to_string()));
        }
        let mut s = Sequence::empty(&self.group);
        for (g, m) in self.entries() {
            s.push(g, m - other.multiplicity(g))?;
        }
        Ok(s)
    }

    /// Parses the text format `"[1]^6 [2]"`: whitespace-separated terms, each a
    /// bracketed coordinate vector with an optional `^multiplicity`.
    pub fn parse(group: &GroupSpec, text: &str) -> Result<Sequence> {
        let bad = |msg: &str| Error::BadSequenceDescriptor(text.to_string(), msg.to_string());
        let mut s = Sequence::empty(group);
        for term in text.split_whitespace() {
            let (elem_str, mult_str) = match term.split_once('^') {
                Some((e, m)) => (e, Some(m)),
                None => (term, None),
            };
            let inner = elem_str
                .strip_prefix('[')
                .and_then(|t| t.strip_suffix(']'))
                .ok_or_else(|| bad("each term must look like [a,b,...]^k"))?;
            let coords: Vec<i64> = inner
                .split(',')
                .map(|c| c.trim().parse().map_err(|_| bad("bad coordinate")))
                .collect::<Result<_>>()?;
            let elem = group
                .element(&coords)
                .map_err(|e| bad(&e.to_string()))?;
            let mult: u32 = match mult_str {
                Some(m) => m.parse().map_err(|_| bad("bad multiplicity"))?,
                None => 1,
            };
            if mult == 0 {
                return Err(bad("multiplicity must be >= 1"));
            }
            s.push(&elem, mult)?;
        }
        Ok(s)
    }
}

/// Writes `"[1]^6 [2]^1"`; the empty sequence prints as `"()"` (and parses
/// back from the empty string).
impl fmt::Display for Sequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("()");
        }
        let mut first = true;
        for (g, m) in self.entries() {
            if !first {
                f.write_str(" ")?;
            }
            first = false;
            write!(f, "{g}^{m}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Sequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Sequence({} over {})", self, self.group)
    }
}

// Serializes as the text format; deserialization needs a group, so documents
// store the string and call `Sequence::parse` with their group.
impl Serialize for Sequence {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        ser.serialize_str(&self.to_string())
    }
}
