//! Finite abelian groups given as direct sums of cyclic groups.
//!
//! A group is described by its factor list `C_{n_1} x ... x C_{n_r}` and is
//! kept exactly as given: `C2xC4` and `C8` stay distinct objects, and the
//! canonical invariant-factor chain is computed on demand.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap for [`GroupSpec::enumerate_elements`].
pub const DEFAULT_ELEMENT_LIMIT: u64 = 1_000_000;
/// Default cap (group order) for [`GroupSpec::enumerate_automorphisms`].
pub const DEFAULT_AUTOMORPHISM_LIMIT: u64 = 81;

/// A finite abelian group `C_{n_1} x ... x C_{n_r}`, factors in the order given.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupSpec {
    factors: Arc<Vec<u64>>,
}

/// An element of a [`GroupSpec`], stored as a residue vector.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GroupElement {
    group: GroupSpec,
    coords: Vec<u64>,
}

/// Group invariants per the canonical decomposition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupInvariants {
    pub exponent: u64,
    pub rank: u32,
    /// `(p, r_p(G))` for each prime dividing the order.
    pub p_ranks: Vec<(u64, u32)>,
    /// Divisor chain `1 < m_1 | m_2 | ... | m_s` (trivial group: empty).
    pub invariant_factors: Vec<u64>,
}

impl GroupSpec {
    pub fn new(factors: Vec<u64>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidParameter("group needs at least one factor".into()));
        }
        let mut order: u128 = 1;
        for &n in &factors {
            if n == 0 {
                return Err(Error::InvalidParameter("cyclic factor must be >= 1".into()));
            }
            order *= n as u128;
            if order > u64::MAX as u128 {
                return Err(Error::OrderLimitExceeded { order, limit: u64::MAX });
            }
        }
        Ok(GroupSpec { factors: Arc::new(factors) })
    }

    pub fn cyclic(n: u64) -> Self {
        GroupSpec::new(vec![n]).expect("cyclic group")
    }

    pub fn factors(&self) -> &[u64] {
        &self.factors
    }

    pub fn order(&self) -> u64 {
        self.factors.iter().product()
    }

    pub fn zero(&self) -> GroupElement {
        GroupElement { group: self.clone(), coords: vec![0; self.factors.len()] }
    }

    /// Builds an element, reducing each coordinate mod its factor.
    pub fn element(&self, coords: &[i64]) -> Result<GroupElement> {
        if coords.len() != self.factors.len() {
            return Err(Error::InvalidParameter(format!(
                "expected {} coordinates, got {}",
                self.factors.len(),
                coords.len()
            )));
        }
        let coords = coords
            .iter()
            .zip(self.factors.iter())
            .map(|(&c, &n)| c.rem_euclid(n as i64) as u64)
            .collect();
        Ok(GroupElement { group: self.clone(), coords })
    }

    /// All `|G|` elements in lexicographic coordinate order. Every piece of
    /// downstream determinism depends on this order.
    pub fn enumerate_elements(&self) -> Result<Vec<GroupElement>> {
        self.enumerate_elements_capped(DEFAULT_ELEMENT_LIMIT)
    }

    pub fn enumerate_elements_capped(&self, limit: u64) -> Result<Vec<GroupElement>> {
        let order = self.order();
        if order > limit {
            return Err(Error::OrderLimitExceeded { order: order as u128, limit });
        }
        let mut out = Vec::with_capacity(order as usize);
        for idx in 0..order {
            out.push(self.element_from_index(idx));
        }
        Ok(out)
    }

    /// Mixed-radix index of an element; inverse of [`Self::element_from_index`].
    /// Indices follow lexicographic coordinate order.
    pub fn element_index(&self, a: &GroupElement) -> u64 {
        debug_assert_eq!(self.factors, a.group.factors);
        let mut idx = 0u64;
        for (c, &n) in a.coords.iter().zip(self.factors.iter()) {
            idx = idx * n + c;
        }
        idx
    }

    pub fn element_from_index(&self, mut idx: u64) -> GroupElement {
        let mut coords = vec![0u64; self.factors.len()];
        for i in (0..self.factors.len()).rev() {
            let n = self.factors[i];
            coords[i] = idx % n;
            idx /= n;
        }
        GroupElement { group: self.clone(), coords }
    }

    pub fn invariants(&self) -> GroupInvariants {
        // Collect prime-power components of every factor.
        let mut by_prime: std::collections::BTreeMap<u64, Vec<u32>> = Default::default();
        for &n in self.factors.iter() {
            let mut m = n;
            let mut p = 2u64;
            while p * p <= m {
                if m % p == 0 {
                    let mut e = 0;
                    while m % p == 0 {
                        m /= p;
                        e += 1;
                    }
                    by_prime.entry(p).or_default().push(e);
                }
                p += 1;
            }
            if m > 1 {
                by_prime.entry(m).or_default().push(1);
            }
        }
        let mut p_ranks = Vec::new();
        let mut max_rank = 0usize;
        for (&p, exps) in by_prime.iter_mut() {
            exps.sort_unstable_by(|a, b| b.cmp(a));
            p_ranks.push((p, exps.len() as u32));
            max_rank = max_rank.max(exps.len());
        }
        // The i-th largest invariant factor is the product of the i-th largest
        // prime-power component over all primes.
        let mut invariant_factors = Vec::new();
        for i in 0..max_rank {
            let mut m = 1u64;
            for (&p, exps) in by_prime.iter() {
                if let Some(&e) = exps.get(i) {
                    m *= p.pow(e);
                }
            }
            invariant_factors.push(m);
        }
        invariant_factors.reverse(); // ascending divisor chain
        let exponent = self.factors.iter().fold(1u64, |acc, &n| acc.lcm(&n));
        GroupInvariants {
            exponent,
            rank: max_rank as u32,
            p_ranks,
            invariant_factors,
        }
    }

    /// True iff the elements are all nonzero and generate `G` as an internal
    /// direct sum of the cyclic groups they span.
    pub fn is_basis(&self, elems: &[GroupElement]) -> bool {
        if elems.iter().any(|e| e.is_zero() || e.group != *self) {
            return false;
        }
        let mut prod: u128 = 1;
        for e in elems {
            prod *= e.order() as u128;
        }
        if prod != self.order() as u128 {
            return false;
        }
        // Direct sum of the right total size iff the span is all of G.
        self.span_size(elems) == self.order()
    }

    fn span_size(&self, elems: &[GroupElement]) -> u64 {
        let order = self.order() as usize;
        let mut seen = vec![false; order];
        seen[0] = true;
        let mut frontier = vec![self.zero()];
        let mut count = 1u64;
        while let Some(x) = frontier.pop() {
            for e in elems {
                let y = x.add(e).expect("same group");
                let idx = self.element_index(&y) as usize;
                if !seen[idx] {
                    seen[idx] = true;
                    count += 1;
                    frontier.push(y);
                }
            }
        }
        count
    }

    /// All automorphisms of `G`, as permutations of [`Self::enumerate_elements`]
    /// indices, via exhaustive generator-image search.
    pub fn enumerate_automorphisms(&self) -> Result<Vec<Vec<u32>>> {
        self.enumerate_automorphisms_capped(DEFAULT_AUTOMORPHISM_LIMIT)
    }

    pub fn enumerate_automorphisms_capped(&self, limit: u64) -> Result<Vec<Vec<u32>>> {
        let order = self.order();
        if order > limit {
            return Err(Error::OrderLimitExceeded { order: order as u128, limit });
        }
        let order = order as usize;
        let r = self.factors.len();
        let table = SmallGroup::new(self)?;
        // Candidate images of generator e_i: all g with n_i * g = 0.
        let mut candidates: Vec<Vec<u32>> = Vec::with_capacity(r);
        for i in 0..r {
            let n_i = self.factors[i];
            let mut c = Vec::new();
            for g in 0..order as u32 {
                if table.scale(g, n_i) == 0 {
                    c.push(g);
                }
            }
            candidates.push(c);
        }
        let mut out = Vec::new();
        let mut images = vec![0u32; r];
        self.aut_rec(&table, &candidates, 0, &mut images, &mut out);
        Ok(out)
    }

    fn aut_rec(
        &self,
        table: &SmallGroup,
        candidates: &[Vec<u32>],
        i: usize,
        images: &mut Vec<u32>,
        out: &mut Vec<Vec<u32>>,
    ) {
        if i == candidates.len() {
            let perm = SmallGroup::hom_with_spec(self, table, images);
            if is_permutation(&perm) {
                out.push(perm);
            }
            return;
        }
        for &g in &candidates[i] {
            images[i] = g;
            self.aut_rec(table, candidates, i + 1, images, out);
        }
    }

    /// Text descriptor like `C6`, `C2xC4`, `C3^3`.
    pub fn descriptor(&self) -> String {
        let mut parts: Vec<String> = Vec::new();
        let mut i = 0;
        while i < self.factors.len() {
            let n = self.factors[i];
            let mut j = i;
            while j < self.factors.len() && self.factors[j] == n {
                j += 1;
            }
            if j - i > 1 {
                parts.push(format!("C{}^{}", n, j - i));
            } else {
                parts.push(format!("C{n}"));
            }
            i = j;
        }
        parts.join("x")
    }
}

fn is_permutation(perm: &[u32]) -> bool {
    let mut seen = vec![false; perm.len()];
    for &x in perm {
        if seen[x as usize] {
            return false;
        }
        seen[x as usize] = true;
    }
    true
}

impl fmt::Debug for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GroupSpec({})", self.descriptor())
    }
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.descriptor())
    }
}

impl FromStr for GroupSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |msg: &str| Error::BadGroupDescriptor(s.to_string(), msg.to_string());
        let mut factors = Vec::new();
        for part in s.split(['x', 'X']) {
            let part = part.trim();
            let rest = part
                .strip_prefix('C')
                .or_else(|| part.strip_prefix('c'))
                .ok_or_else(|| bad("each factor must look like C<n> or C<n>^<k>"))?;
            let (n_str, k_str) = match rest.split_once('^') {
                Some((n, k)) => (n, Some(k)),
                None => (rest, None),
            };
            let n: u64 = n_str.parse().map_err(|_| bad("bad cyclic order"))?;
            if n == 0 {
                return Err(bad("cyclic order must be >= 1"));
            }
            let k: u32 = match k_str {
                Some(k) => k.parse().map_err(|_| bad("bad repeat count"))?,
                None => 1,
            };
            if k == 0 {
                return Err(bad("repeat count must be >= 1"));
            }
            for _ in 0..k {
                factors.push(n);
            }
        }
        GroupSpec::new(factors)
    }
}

impl GroupElement {
    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    pub fn coords(&self) -> &[u64] {
        &self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }

    fn check_same_group(&self, other: &GroupElement) -> Result<()> {
        if self.group != other.group {
            return Err(Error::GroupMismatch(
                self.group.descriptor(),
                other.group.descriptor(),
            ));
        }
        Ok(())
    }

    pub fn add(&self, other: &GroupElement) -> Result<GroupElement> {
        self.check_same_group(other)?;
        let coords = self
            .coords
            .iter()
            .zip(other.coords.iter())
            .zip(self.group.factors.iter())
            .map(|((&a, &b), &n)| (a + b) % n)
            .collect();
        Ok(GroupElement { group: self.group.clone(), coords })
    }

    pub fn negate(&self) -> GroupElement {
        let coords = self
            .coords
            .iter()
            .zip(self.group.factors.iter())
            .map(|(&a, &n)| if a == 0 { 0 } else { n - a })
            .collect();
        GroupElement { group: self.group.clone(), coords }
    }

    pub fn scale(&self, k: u64) -> GroupElement {
        let coords = self
            .coords
            .iter()
            .zip(self.group.factors.iter())
            .map(|(&a, &n)| (a as u128 * k as u128 % n as u128) as u64)
            .collect();
        GroupElement { group: self.group.clone(), coords }
    }

    /// Least `k >= 1` with `k * a = 0`.
    pub fn order(&self) -> u64 {
        self.coords
            .iter()
            .zip(self.group.factors.iter())
            .fold(1u64, |acc, (&a, &n)| {
                let ord = n / n.gcd(&a.max(1));
                let ord = if a == 0 { 1 } else { ord };
                acc.lcm(&ord)
            })
    }
}

impl PartialOrd for GroupElement {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for GroupElement {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.coords
            .cmp(&other.coords)
            .then_with(|| self.group.factors.cmp(&other.group.factors))
    }
}

impl fmt::Debug for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let strs: Vec<String> = self.coords.iter().map(|c| c.to_string()).collect();
        write!(f, "[{}]", strs.join(","))
    }
}

/// Index-based arithmetic tables for groups small enough to enumerate.
/// All hot loops (atom search, length-set recursion) run on element indices.
pub(crate) struct SmallGroup {
    pub order: u32,
    add: Vec<u32>, // add[a * order + b]
    pub neg: Vec<u32>,
}

pub(crate) const SMALL_GROUP_LIMIT: u64 = 4096;

impl SmallGroup {
    pub fn new(spec: &GroupSpec) -> Result<SmallGroup> {
        let order = spec.order();
        if order > SMALL_GROUP_LIMIT {
            return Err(Error::OrderLimitExceeded { order: order as u128, limit: SMALL_GROUP_LIMIT });
        }
        let order = order as u32;
        let elems = spec.enumerate_elements_capped(order as u64)?;
        let mut add = vec![0u32; (order as usize) * (order as usize)];
        let mut neg = vec![0u32; order as usize];
        for (i, a) in elems.iter().enumerate() {
            neg[i] = spec.element_index(&a.negate()) as u32;
            for (j, b) in elems.iter().enumerate() {
                add[i * order as usize + j] = spec.element_index(&a.add(b).unwrap()) as u32;
            }
        }
        Ok(SmallGroup { order, add, neg })
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        self.add[a as usize * self.order as usize + b as usize]
    }

    pub fn scale(&self, a: u32, k: u64) -> u32 {
        let mut acc = 0u32;
        for _ in 0..k {
            acc = self.add(acc, a);
        }
        acc
    }

    /// The homomorphism determined by generator images, as an index map.
    /// `images[i]` is the image of the i-th standard generator of `spec`.
    pub(crate) fn hom_with_spec(
        spec: &GroupSpec,
        table: &SmallGroup,
        images: &[u32],
    ) -> Vec<u32> {
        let order = table.order as usize;
        let factors = spec.factors();
        let mut perm = vec![0u32; order];
        for idx in 0..order {
            // decode coords of idx
            let mut rem = idx as u64;
            let mut img = 0u32;
            for i in (0..factors.len()).rev() {
                let c = rem % factors[i];
                rem /= factors[i];
                if c != 0 {
                    img = table.add(img, table.scale(images[i], c));
                }
            }
            perm[idx] = img;
        }
        perm
    }
}
