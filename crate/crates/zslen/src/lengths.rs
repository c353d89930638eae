//! Sets of factorization lengths and derived invariants.
//!
//! For a zero-sum sequence `A` over a support `G_0`, `Z(A)` is the set of
//! factorizations of `A` into atoms and `L(A) = { |z| : z in Z(A) }` the set
//! of lengths. On top of `L(A)` sit the distance set `Delta(L)`, the
//! elasticity `rho(L) = max L / min L`, the `rho_k` invariants, and bounded
//! approximations of the distance sets `Delta(G)` and `Delta*(G)`.
//!
//! `L(A)` is computed by memoized recursion on the residual multiset:
//! `L(R) = union over atoms U dividing R of 1 + L(R U^{-1})`, with length
//! sets carried as bitmasks. Zeros are stripped first (`L(0^m A) = m + L(A)`),
//! so every atom in the recursion has length at least 2 and the mask width
//! suffices for any input below the length cap.

use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeSet, HashMap};
use std::hash::{Hash, Hasher};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::RwLock;

use num_rational::Ratio;
use rayon::prelude::*;
use serde::Serialize;

use crate::atoms::{enumerate_atoms, AtomSet};
use crate::error::{Error, Result};
use crate::group::{GroupElement, GroupSpec};
use crate::seq::Sequence;

/// Cap on `|A|` for length-set computations; keeps every length below the
/// 128-bit mask width with room to spare.
pub const MAX_SEQUENCE_LEN: u64 = 254;

/// Budget knobs for the length-set recursion.
#[derive(Clone, Debug, Default)]
pub struct LengthConfig {
    /// Cap on recursion nodes; `None` is unbounded.
    pub node_budget: Option<u64>,
    /// Approximate cap on memo-table bytes; least-recently-used halves of
    /// each shard are evicted when exceeded. `None` is unbounded.
    pub memo_bytes: Option<u64>,
}

/// A finite set of nonnegative integers, usually a set of lengths `L(A)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct LengthSet {
    values: BTreeSet<u64>,
}

impl LengthSet {
    pub fn new(values: impl IntoIterator<Item = u64>) -> LengthSet {
        LengthSet { values: values.into_iter().collect() }
    }

    /// The interval `[a, b]` (empty when `b < a`).
    pub fn interval(a: u64, b: u64) -> LengthSet {
        LengthSet { values: (a..=b).collect() }
    }

    pub fn values(&self) -> impl Iterator<Item = u64> + '_ {
        self.values.iter().copied()
    }

    pub fn to_vec(&self) -> Vec<u64> {
        self.values.iter().copied().collect()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn contains(&self, v: u64) -> bool {
        self.values.contains(&v)
    }

    pub fn min_value(&self) -> Option<u64> {
        self.values.first().copied()
    }

    pub fn max_value(&self) -> Option<u64> {
        self.values.last().copied()
    }

    /// `Delta(L)`: the set of distances between successive elements.
    pub fn delta(&self) -> BTreeSet<u64> {
        let v: Vec<u64> = self.to_vec();
        v.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// `rho(L) = sup L / min L`, with `rho({0}) = 1`; `None` for the empty set.
    pub fn elasticity(&self) -> Option<Ratio<u64>> {
        let (min, max) = (self.min_value()?, self.max_value()?);
        if min == 0 {
            return Some(Ratio::from_integer(1)); // only L = {0} has min 0
        }
        Some(Ratio::new(max, min))
    }

    /// Elementwise sumset `L1 + L2`.
    pub fn sumset(&self, other: &LengthSet) -> LengthSet {
        let mut values = BTreeSet::new();
        for a in &self.values {
            for b in &other.values {
                values.insert(a + b);
            }
        }
        LengthSet { values }
    }

    /// Dilation `k * L = { k*a : a in L }`.
    pub fn dilate(&self, k: u64) -> LengthSet {
        LengthSet { values: self.values.iter().map(|a| k * a).collect() }
    }

    /// Translation `y + L`.
    pub fn shift(&self, y: u64) -> LengthSet {
        LengthSet { values: self.values.iter().map(|a| y + a).collect() }
    }
}

impl FromIterator<u64> for LengthSet {
    fn from_iter<I: IntoIterator<Item = u64>>(iter: I) -> LengthSet {
        LengthSet::new(iter)
    }
}

impl Serialize for LengthSet {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        ser.collect_seq(self.values.iter())
    }
}

impl std::fmt::Display for LengthSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let strs: Vec<String> = self.values.iter().map(|v| v.to_string()).collect();
        write!(f, "{{{}}}", strs.join(","))
    }
}

/// One factorization `z in Z(A)`: atom indices into an [`AtomSet`], sorted
/// non-increasing. `|z|` is the number of parts.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Factorization {
    parts: Vec<usize>,
}

impl Factorization {
    pub fn new(mut parts: Vec<usize>) -> Factorization {
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Factorization { parts }
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// The product of the referenced atoms.
    pub fn product(&self, atoms: &AtomSet) -> Result<Sequence> {
        let mut s = Sequence::empty(atoms.group());
        for &i in &self.parts {
            let atom = atoms
                .atoms()
                .get(i)
                .ok_or_else(|| Error::InvalidParameter(format!("atom index {i} out of range")))?;
            s = s.multiply(atom)?;
        }
        Ok(s)
    }
}

/// All factorizations of `A`, possibly truncated at a count limit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactorizationList {
    pub factorizations: Vec<Factorization>,
    /// True iff the limit cut the enumeration short.
    pub truncated: bool,
}

// ---- the length-set engine -------------------------------------------------

/// `A` over the positions of its own support, plus the atoms that divide it.
struct Engine<'a> {
    /// Sparse atoms as (position, multiplicity) over supp(A), only those
    /// dividing the zero-free part of `A`; paired with their original index.
    atoms: Vec<(usize, Vec<(usize, u16)>)>,
    memo: Memo,
    nodes: &'a AtomicU64,
    budget: u64,
}

const MEMO_SHARDS: usize = 64;

struct Memo {
    shards: Vec<RwLock<HashMap<Box<[u16]>, (u128, u64)>>>,
    bytes_per_shard: u64,
    tick: AtomicU64,
}

impl Memo {
    fn new(byte_budget: Option<u64>) -> Memo {
        Memo {
            shards: (0..MEMO_SHARDS).map(|_| RwLock::new(HashMap::new())).collect(),
            bytes_per_shard: byte_budget.unwrap_or(u64::MAX) / MEMO_SHARDS as u64,
            tick: AtomicU64::new(0),
        }
    }

    fn shard(&self, key: &[u16]) -> usize {
        let mut h = DefaultHasher::new();
        key.hash(&mut h);
        (h.finish() % MEMO_SHARDS as u64) as usize
    }

    fn get(&self, key: &[u16]) -> Option<u128> {
        let shard = self.shards[self.shard(key)].read().unwrap();
        shard.get(key).map(|&(mask, _)| mask)
    }

    fn insert(&self, key: Box<[u16]>, mask: u128, entry_bytes: u64) {
        let tick = self.tick.fetch_add(1, Ordering::Relaxed);
        let mut shard = self.shards[self.shard(&key)].write().unwrap();
        shard.insert(key, (mask, tick));
        if shard.len() as u64 * entry_bytes > self.bytes_per_shard {
            // evict the least-recently-inserted half
            let mut ticks: Vec<u64> = shard.values().map(|&(_, t)| t).collect();
            ticks.sort_unstable();
            let cutoff = ticks[ticks.len() / 2];
            shard.retain(|_, &mut (_, t)| t >= cutoff);
        }
    }
}

impl Engine<'_> {
    /// Bitmask of factorization lengths of the residual `counts`.
    fn solve(&self, counts: &[u16]) -> Result<u128> {
        if counts.iter().all(|&c| c == 0) {
            return Ok(1);
        }
        if let Some(mask) = self.memo.get(counts) {
            return Ok(mask);
        }
        if self.nodes.fetch_add(1, Ordering::Relaxed) >= self.budget {
            return Err(Error::BudgetExhausted(
                format!("length-set recursion node budget {} hit", self.budget),
            ));
        }
        let mut mask = 0u128;
        let mut rest = counts.to_vec();
        for (_, atom) in &self.atoms {
            if atom.iter().all(|&(p, m)| counts[p] >= m) {
                rest.copy_from_slice(counts);
                for &(p, m) in atom {
                    rest[p] -= m;
                }
                mask |= self.solve(&rest)? << 1;
            }
        }
        let entry_bytes = (counts.len() * 2 + 48) as u64;
        self.memo.insert(counts.to_vec().into_boxed_slice(), mask, entry_bytes);
        Ok(mask)
    }

    /// Like [`Self::solve`] but parallel over the top-level atom choice.
    fn solve_top(&self, counts: &[u16]) -> Result<u128> {
        if counts.iter().all(|&c| c == 0) {
            return Ok(1);
        }
        let divisors: Vec<&Vec<(usize, u16)>> = self
            .atoms
            .iter()
            .filter(|(_, atom)| atom.iter().all(|&(p, m)| counts[p] >= m))
            .map(|(_, atom)| atom)
            .collect();
        let masks: Vec<Result<u128>> = divisors
            .par_iter()
            .map(|atom| {
                let mut rest = counts.to_vec();
                for &(p, m) in atom.iter() {
                    rest[p] -= m;
                }
                self.solve(&rest)
            })
            .collect();
        let mut mask = 0u128;
        for m in masks {
            mask |= m? << 1;
        }
        Ok(mask)
    }
}

/// Splits `A` into its zero part and a zero-free rest, mapped onto support
/// positions; also restricts and reindexes the atoms to divisors of the rest.
fn prepare<'a>(
    a: &'a Sequence,
    atoms: &AtomSet,
) -> Result<(u64, Vec<u16>, Vec<(usize, Vec<(usize, u16)>)>, Vec<&'a GroupElement>)> {
    if a.group() != atoms.group() {
        return Err(Error::GroupMismatch(
            a.group().descriptor(),
            atoms.group().descriptor(),
        ));
    }
    if !a.is_zero_sum() {
        return Err(Error::NotZeroSum(a.sigma().to_string()));
    }
    if a.len() > MAX_SEQUENCE_LEN {
        return Err(Error::LengthLimitExceeded { len: a.len(), limit: MAX_SEQUENCE_LEN });
    }
    let support_set: BTreeSet<&GroupElement> = atoms.support().iter().collect();
    let mut zeros = 0u64;
    let mut elems: Vec<&GroupElement> = Vec::new();
    let mut counts: Vec<u16> = Vec::new();
    for (g, m) in a.entries() {
        if !support_set.contains(g) {
            return Err(Error::SupportNotContained(format!(
                "{g} outside the atom support"
            )));
        }
        if g.is_zero() {
            zeros = m as u64;
        } else {
            elems.push(g);
            counts.push(m as u16);
        }
    }
    let pos: HashMap<&GroupElement, usize> =
        elems.iter().enumerate().map(|(i, &g)| (g, i)).collect();
    let mut sparse_atoms = Vec::new();
    'outer: for (i, atom) in atoms.atoms().iter().enumerate() {
        let mut sparse = Vec::new();
        for (g, m) in atom.entries() {
            match pos.get(g) {
                Some(&p) if counts[p] >= m as u16 => sparse.push((p, m as u16)),
                _ => continue 'outer,
            }
        }
        if !sparse.is_empty() {
            sparse_atoms.push((i, sparse));
        }
    }
    Ok((zeros, counts, sparse_atoms, elems))
}

/// `L(A)`, the set of factorization lengths of `A` over the given atoms.
pub fn set_of_lengths(a: &Sequence, atoms: &AtomSet) -> Result<LengthSet> {
    set_of_lengths_with(a, atoms, &LengthConfig::default())
}

pub fn set_of_lengths_with(
    a: &Sequence,
    atoms: &AtomSet,
    config: &LengthConfig,
) -> Result<LengthSet> {
    let (zeros, counts, sparse_atoms, _) = prepare(a, atoms)?;
    let nodes = AtomicU64::new(0);
    let engine = Engine {
        atoms: sparse_atoms,
        memo: Memo::new(config.memo_bytes),
        nodes: &nodes,
        budget: config.node_budget.unwrap_or(u64::MAX),
    };
    let mask = engine.solve_top(&counts)?;
    let set: LengthSet = (0..128)
        .filter(|&i| mask >> i & 1 == 1)
        .map(|i| zeros + i as u64)
        .collect();
    // every zero-sum sequence over the support factors into atoms
    assert!(!set.is_empty(), "no factorization found for a zero-sum input");
    if !a.is_empty() {
        let (min, max) = (set.min_value().unwrap(), set.max_value().unwrap());
        assert!(
            min * atoms.davenport() >= a.len() && max * atoms.min_len() <= a.len(),
            "length bounds |A|/D <= min L <= max L <= |A|/d violated"
        );
    }
    Ok(set)
}

/// All factorizations of `A`, each exactly once, in deterministic order;
/// enumeration stops (with the flag set) once `limit` are collected.
pub fn enumerate_factorizations(
    a: &Sequence,
    atoms: &AtomSet,
    limit: usize,
) -> Result<FactorizationList> {
    let (zeros, counts, sparse_atoms, _) = prepare(a, atoms)?;
    let zero_atom_idx = if zeros > 0 {
        // the atom "0" must be present to absorb the zero part
        let idx = atoms
            .atoms()
            .iter()
            .position(|u| u.len() == 1 && u.sigma().is_zero());
        Some(idx.ok_or_else(|| {
            Error::SupportNotContained("0 in A but the zero atom is missing".into())
        })?)
    } else {
        None
    };
    let mut out = Vec::new();
    let mut truncated = false;
    let mut parts: Vec<usize> = Vec::new();
    let mut rest = counts.clone();
    factorize_rec(
        &sparse_atoms,
        0,
        &mut rest,
        &mut parts,
        &mut |parts| {
            if out.len() >= limit {
                truncated = true;
                return false;
            }
            let mut all = parts.to_vec();
            if let Some(z) = zero_atom_idx {
                all.extend(std::iter::repeat(z).take(zeros as usize));
            }
            out.push(Factorization::new(all));
            true
        },
    );
    Ok(FactorizationList { factorizations: out, truncated })
}

/// Canonical DFS: atom indices non-decreasing along the path, so each
/// factorization appears exactly once. `emit` returns false to stop.
fn factorize_rec(
    atoms: &[(usize, Vec<(usize, u16)>)],
    from: usize,
    rest: &mut [u16],
    parts: &mut Vec<usize>,
    emit: &mut impl FnMut(&[usize]) -> bool,
) -> bool {
    if rest.iter().all(|&c| c == 0) {
        return emit(parts);
    }
    for k in from..atoms.len() {
        let (orig, atom) = &atoms[k];
        if atom.iter().all(|&(p, m)| rest[p] >= m) {
            for &(p, m) in atom {
                rest[p] -= m;
            }
            parts.push(*orig);
            let keep_going = factorize_rec(atoms, k, rest, parts, emit);
            parts.pop();
            for &(p, m) in atom {
                rest[p] += m;
            }
            if !keep_going {
                return false;
            }
        }
    }
    true
}

/// The closed form for `A = g^{kn+r} (-g)^{ln+r}` over a cyclic group of
/// order `n`: `L(A) = (r + k + l) + (n-2) * [0, min(k, l)]`.
pub fn closed_form_basic(n: u64, k: u64, l: u64, r: u64) -> Result<LengthSet> {
    if n < 2 {
        return Err(Error::InvalidParameter("n must be at least 2".into()));
    }
    if r >= n {
        return Err(Error::InvalidParameter("r must lie in [0, n-1]".into()));
    }
    Ok(LengthSet::interval(0, k.min(l))
        .dilate(n - 2)
        .shift(r + k + l))
}

/// `rho_k(G)`: the largest `sup L(A)` over products `A` of `k` atoms.
/// Complete because any such `A` has `|A| <= k * D(G)`; candidates are
/// deduplicated under `Aut(G)`.
pub fn rho_k(group: &GroupSpec, k: u64) -> Result<u64> {
    if k < 2 {
        return Err(Error::InvalidParameter("rho_k needs k >= 2".into()));
    }
    let nonzero: Vec<GroupElement> = group
        .enumerate_elements()?
        .into_iter()
        .filter(|e| !e.is_zero())
        .collect();
    if nonzero.is_empty() {
        return Ok(k); // trivial group: only the zero atom, L(0^k) = {k}
    }
    let atoms = enumerate_atoms(group, &nonzero)?;
    let auts = group.enumerate_automorphisms()?;
    let order = group.order() as usize;

    // unordered k-tuples of atom indices, as products, deduplicated by the
    // lexicographically-least automorphism image of the count vector
    let mut products: BTreeSet<Vec<u16>> = BTreeSet::new();
    let mut tuple = vec![0usize; k as usize];
    collect_products(&atoms, group, &auts, order, &mut tuple, 0, 0, &mut products);

    let results: Vec<Result<u64>> = products
        .into_par_iter()
        .map(|counts| {
            let mut a = Sequence::empty(group);
            for (i, &m) in counts.iter().enumerate() {
                if m > 0 {
                    a.push(&group.element_from_index(i as u64), m as u32)?;
                }
            }
            Ok(set_of_lengths(&a, &atoms)?.max_value().unwrap())
        })
        .collect();
    let mut best = 0;
    for r in results {
        best = best.max(r?);
    }
    Ok(best)
}

fn collect_products(
    atoms: &AtomSet,
    group: &GroupSpec,
    auts: &[Vec<u32>],
    order: usize,
    tuple: &mut Vec<usize>,
    depth: usize,
    from: usize,
    out: &mut BTreeSet<Vec<u16>>,
) {
    if depth == tuple.len() {
        let mut counts = vec![0u16; order];
        for &i in tuple.iter() {
            for (g, m) in atoms.atoms()[i].entries() {
                counts[group.element_index(g) as usize] += m as u16;
            }
        }
        let canon = auts
            .iter()
            .map(|perm| {
                let mut c = vec![0u16; order];
                for (i, &m) in counts.iter().enumerate() {
                    c[perm[i] as usize] = m;
                }
                c
            })
            .min()
            .unwrap_or(counts);
        out.insert(canon);
        return;
    }
    for i in from..atoms.atoms().len() {
        tuple[depth] = i;
        collect_products(atoms, group, auts, order, tuple, depth + 1, i, out);
    }
}

// ---- bounded distance-set sweeps -------------------------------------------

/// One zero-free zero-sum sequence in the bottom-up table: its packed key
/// (sorted element indices, `bits` bits each, first index in the low bits),
/// its support bitmask (bit `i` is element index `i + 1`), and its length
/// set as a bitmask.
pub(crate) struct TableEntry {
    pub key: u128,
    pub supp: u32,
    pub mask: u64,
}

/// Length sets of every zero-free zero-sum sequence of length at most
/// `bound`, built bottom-up in size order; layer `s` holds the sequences of
/// length `s`, sorted by key. Shared by the distance-set sweeps and the
/// system enumeration.
pub(crate) struct ZeroSumTable {
    pub layers: Vec<Vec<TableEntry>>,
}

pub(crate) fn zero_sum_length_table(group: &GroupSpec, bound: u64) -> Result<ZeroSumTable> {
    let order = group.order();
    let bits = (64 - (order - 1).leading_zeros().min(63)) as u64;
    if bits * bound > 128 {
        return Err(Error::InvalidParameter(format!(
            "size bound {bound} over {} needs more than 128 key bits",
            group.descriptor()
        )));
    }
    if order > 33 {
        return Err(Error::UnsupportedGroup(format!(
            "{}: support bitmask limited to 32 nonzero elements",
            group.descriptor()
        )));
    }
    if bound > 127 {
        return Err(Error::InvalidParameter("size bound exceeds 127".into()));
    }
    let nonzero: Vec<GroupElement> = group
        .enumerate_elements()?
        .into_iter()
        .filter(|e| !e.is_zero())
        .collect();
    let atoms = enumerate_atoms(group, &nonzero)?;
    let table = crate::group::SmallGroup::new(group)?;

    // atoms as sparse count vectors over element indices, with support masks
    // and packed keys for fast divisibility and residual-key subtraction
    struct SparseAtom {
        entries: Vec<(u32, u16)>,
        supp: u32,
        len: usize,
    }
    let sparse_atoms: Vec<SparseAtom> = atoms
        .atoms()
        .iter()
        .map(|u| {
            let entries: Vec<(u32, u16)> = u
                .entries()
                .map(|(g, m)| (group.element_index(g) as u32, m as u16))
                .collect();
            let supp = entries.iter().fold(0u32, |s, &(e, _)| s | 1 << (e - 1));
            SparseAtom { entries, supp, len: u.len() as usize }
        })
        .collect();

    // enumerate all zero-sum multisets of size <= bound, grouped by size
    let mut layers: Vec<Vec<TableEntry>> = (0..=bound as usize).map(|_| Vec::new()).collect();
    layers[0].push(TableEntry { key: 0, supp: 0, mask: 1 });
    enumerate_zero_sum(&table, bits, bound, 1, 0, 0, 0, &mut |key, size| {
        layers[size as usize].push(TableEntry { key, supp: 0, mask: 0 })
    });

    for size in 1..=bound as usize {
        let (done, layer) = layers.split_at_mut(size);
        layer[0].par_iter_mut().for_each(|entry| {
            let (counts, supp) = unpack_key(entry.key, bits, order as usize);
            entry.supp = supp;
            let mut mask = 0u64;
            for atom in &sparse_atoms {
                if atom.supp & !supp == 0
                    && atom.len <= size
                    && atom.entries.iter().all(|&(e, m)| counts[e as usize] >= m)
                {
                    let mut rest = counts.clone();
                    for &(e, m) in &atom.entries {
                        rest[e as usize] -= m;
                    }
                    let rest_key = pack_counts(&rest, bits);
                    let smaller = &done[size - atom.len];
                    let at = smaller
                        .binary_search_by_key(&rest_key, |e| e.key)
                        .expect("residual zero-sum sequence missing from its layer");
                    mask |= smaller[at].mask << 1;
                }
            }
            entry.mask = mask;
        });
        // DFS emits keys out of numeric order; sort for binary search
        layer[0].sort_unstable_by_key(|e| e.key);
    }
    Ok(ZeroSumTable { layers })
}

fn pack_counts(counts: &[u16], bits: u64) -> u128 {
    let mut key = 0u128;
    let mut shift = 0u64;
    for (e, &c) in counts.iter().enumerate() {
        for _ in 0..c {
            key |= (e as u128) << shift;
            shift += bits;
        }
    }
    key
}

fn unpack_key(key: u128, bits: u64, order: usize) -> (Vec<u16>, u32) {
    let mut counts = vec![0u16; order];
    let mut supp = 0u32;
    let mut k = key;
    while k != 0 {
        let e = (k & ((1 << bits) - 1)) as usize;
        counts[e] += 1;
        supp |= 1 << (e - 1);
        k >>= bits;
    }
    (counts, supp)
}

#[allow(clippy::too_many_arguments)]
fn enumerate_zero_sum(
    table: &crate::group::SmallGroup,
    bits: u64,
    bound: u64,
    from: u32,
    sigma: u32,
    key: u128,
    size: u64,
    record: &mut impl FnMut(u128, u64),
) {
    if sigma == 0 && size > 0 {
        record(key, size);
    }
    if size == bound {
        return;
    }
    for e in from..table.order {
        enumerate_zero_sum(
            table,
            bits,
            bound,
            e,
            table.add(sigma, e),
            key | (e as u128) << (size * bits),
            size + 1,
            record,
        );
    }
}

fn mask_to_delta(mask: u64) -> u64 {
    // distance mask: bit d set iff two successive lengths differ by d
    let mut delta = 0u64;
    let mut prev: Option<u32> = None;
    for i in 0..64 {
        if mask >> i & 1 == 1 {
            if let Some(p) = prev {
                delta |= 1 << (i - p);
            }
            prev = Some(i);
        }
    }
    delta
}

/// The union of `Delta(L(A))` over all zero-sum `A` with `|A| <= size_bound`:
/// a lower approximation of `Delta(G)`, monotone in the bound.
pub fn delta_g_bounded(group: &GroupSpec, size_bound: u64) -> Result<BTreeSet<u64>> {
    let table = zero_sum_length_table(group, size_bound)?;
    let mut delta_mask = 0u64;
    for layer in &table.layers {
        for entry in layer {
            delta_mask |= mask_to_delta(entry.mask);
        }
    }
    Ok((1..64).filter(|&d| delta_mask >> d & 1 == 1).collect())
}

/// `{ min Delta(G_0) : G_0 subset of G with Delta(G_0) nonempty }`, with every
/// `Delta(G_0)` taken at the given size bound: a bounded approximation of
/// `Delta*(G)`.
pub fn delta_star_bounded(group: &GroupSpec, size_bound: u64) -> Result<BTreeSet<u64>> {
    if group.order() > 17 {
        return Err(Error::UnsupportedGroup(format!(
            "{}: the subset sweep covers groups of order at most 17",
            group.descriptor()
        )));
    }
    let table = zero_sum_length_table(group, size_bound)?;
    let n = group.order() as usize - 1; // nonzero elements
    // distances reached by sequences with exactly this support
    let mut by_supp = vec![0u64; 1 << n];
    for layer in &table.layers {
        for entry in layer {
            by_supp[entry.supp as usize] |= mask_to_delta(entry.mask);
        }
    }
    // subset-sum (zeta) transform: distances reached within each subset
    for bit in 0..n {
        for m in 0..by_supp.len() {
            if m >> bit & 1 == 1 {
                by_supp[m] |= by_supp[m ^ (1 << bit)];
            }
        }
    }
    // adding 0 to a support never changes its distance set, so sweeping the
    // zero-free subsets covers all of them
    Ok(by_supp
        .iter()
        .filter(|&&d| d != 0)
        .map(|&d| d.trailing_zeros() as u64)
        .collect())
}

/// A witness factorization of `A` of maximal length that is divisible by the
/// given multiset `x` of length-2 atoms. Existence is guaranteed; a failed
/// search reports a defect, not a user error.
pub fn max_length_factorization_containing(
    a: &Sequence,
    atoms: &AtomSet,
    x: &[usize],
) -> Result<Factorization> {
    for &i in x {
        let atom = atoms
            .atoms()
            .get(i)
            .ok_or_else(|| Error::InvalidParameter(format!("atom index {i} out of range")))?;
        if atom.len() != 2 {
            return Err(Error::InvalidParameter(format!(
                "x must consist of length-2 atoms; atom {i} has length {}",
                atom.len()
            )));
        }
    }
    let max_len = set_of_lengths(a, atoms)?.max_value().unwrap();
    let mut rest = a.clone();
    for &i in x {
        rest = rest.divide(&atoms.atoms()[i])?; // errors if x does not divide A
    }
    let (zeros, counts, sparse_atoms, _) = prepare(&rest, atoms)?;
    let nodes = AtomicU64::new(0);
    let engine = Engine {
        atoms: sparse_atoms,
        memo: Memo::new(None),
        nodes: &nodes,
        budget: u64::MAX,
    };
    let need = max_len
        .checked_sub(x.len() as u64 + zeros)
        .and_then(|n| u32::try_from(n).ok())
        .ok_or_else(|| Error::WitnessDefect("residual target length underflow".into()))?;
    let mut parts: Vec<usize> = x.to_vec();
    if zeros > 0 {
        let zero_idx = atoms
            .atoms()
            .iter()
            .position(|u| u.len() == 1 && u.sigma().is_zero())
            .ok_or_else(|| Error::WitnessDefect("zero atom missing".into()))?;
        parts.extend(std::iter::repeat(zero_idx).take(zeros as usize));
    }
    let mut residual = counts;
    let mut need = need;
    while need > 0 {
        let mut advanced = false;
        for (orig, atom) in &engine.atoms {
            if atom.iter().all(|&(p, m)| residual[p] >= m) {
                let mut rest = residual.clone();
                for &(p, m) in atom {
                    rest[p] -= m;
                }
                if engine.solve(&rest)? >> (need - 1) & 1 == 1 {
                    parts.push(*orig);
                    residual = rest;
                    need -= 1;
                    advanced = true;
                    break;
                }
            }
        }
        if !advanced {
            return Err(Error::WitnessDefect(format!(
                "no maximal-length factorization of {a} extends the given parts"
            )));
        }
    }
    if residual.iter().any(|&c| c != 0) {
        return Err(Error::WitnessDefect("residual not exhausted".into()));
    }
    Ok(Factorization::new(parts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn g(desc: &str) -> GroupSpec {
        desc.parse().unwrap()
    }

    fn seq(group: &GroupSpec, text: &str) -> Sequence {
        Sequence::parse(group, text).unwrap()
    }

    fn full_atoms(group: &GroupSpec) -> AtomSet {
        let all = group.enumerate_elements().unwrap();
        enumerate_atoms(group, &all).unwrap()
    }

    fn lengths(group: &GroupSpec, text: &str) -> LengthSet {
        set_of_lengths(&seq(group, text), &full_atoms(group)).unwrap()
    }

    #[test]
    fn length_set_basics() {
        let l = LengthSet::new([2, 4, 5]);
        assert_eq!(l.delta(), BTreeSet::from([1, 2]));
        assert_eq!(
            LengthSet::new([2, 5]).elasticity().unwrap(),
            Ratio::new(5, 2)
        );
        assert_eq!(LengthSet::new([0]).elasticity().unwrap(), Ratio::from_integer(1));
        assert!(LengthSet::default().elasticity().is_none());
        assert_eq!(LengthSet::interval(0, 3).dilate(2), LengthSet::new([0, 2, 4, 6]));
        assert_eq!(
            LengthSet::new([1, 2]).sumset(&LengthSet::new([1, 3])),
            LengthSet::new([2, 3, 4, 5])
        );
        assert_eq!(LengthSet::new([1, 2]).to_string(), "{1,2}");
    }

    #[test]
    fn set_of_lengths_small_examples() {
        let c3 = g("C3");
        assert_eq!(lengths(&c3, ""), LengthSet::new([0]));
        assert_eq!(lengths(&c3, "[1]^3 [2]^3"), LengthSet::new([2, 3]));
        let c6 = g("C6");
        assert_eq!(lengths(&c6, "[1]^6 [5]^6"), LengthSet::new([2, 6]));
        // zeros shift: L(0^m A) = m + L(A)
        assert_eq!(lengths(&c6, "[0]^3 [1]^6 [5]^6"), LengthSet::new([5, 9]));
        assert_eq!(lengths(&c6, "[0]^4"), LengthSet::new([4]));
    }

    #[test]
    fn set_of_lengths_rejects_bad_input() {
        let c6 = g("C6");
        let atoms = full_atoms(&c6);
        assert!(matches!(
            set_of_lengths(&seq(&c6, "[1]^2"), &atoms),
            Err(Error::NotZeroSum(_))
        ));
        let restricted = enumerate_atoms(&c6, &[c6.element(&[2]).unwrap()]).unwrap();
        assert!(matches!(
            set_of_lengths(&seq(&c6, "[3]^2"), &restricted),
            Err(Error::SupportNotContained(_))
        ));
        let tiny = LengthConfig { node_budget: Some(1), memo_bytes: None };
        assert!(matches!(
            set_of_lengths_with(&seq(&c6, "[1]^6 [5]^6"), &atoms, &tiny),
            Err(Error::BudgetExhausted(_))
        ));
    }

    #[test]
    fn proof_step_set_over_c2_4() {
        // U4 = e0 e1 e2 e3 e4 with e0 the full sum; U2 = e1 e2 (e1+e2)
        let c = g("C2^4");
        let a = seq(
            &c,
            "[1,1,1,1]^2 [1,0,0,0]^3 [0,1,0,0]^3 [0,0,1,0]^2 [0,0,0,1]^2 [1,1,0,0]^1",
        );
        assert_eq!(a.len(), 13);
        let atoms = full_atoms(&c);
        assert_eq!(set_of_lengths(&a, &atoms).unwrap(), LengthSet::new([3, 4, 6]));
    }

    #[test]
    fn factorizations_are_exact_and_canonical() {
        let c6 = g("C6");
        let atoms = full_atoms(&c6);
        let a = seq(&c6, "[1]^2 [5]^2");
        let z = enumerate_factorizations(&a, &atoms, 100).unwrap();
        assert_eq!(z.factorizations.len(), 1); // only (g(-g))^2
        assert!(!z.truncated);
        assert_eq!(z.factorizations[0].len(), 2);
        for f in &z.factorizations {
            assert_eq!(f.product(&atoms).unwrap(), a);
        }

        let empty = enumerate_factorizations(&Sequence::empty(&c6), &atoms, 10).unwrap();
        assert_eq!(empty.factorizations, vec![Factorization::new(vec![])]);

        // lengths of Z(A) reproduce L(A)
        let a = seq(&c6, "[1]^6 [5]^6");
        let z = enumerate_factorizations(&a, &atoms, 1000).unwrap();
        assert!(!z.truncated);
        let from_z: LengthSet = z.factorizations.iter().map(|f| f.len() as u64).collect();
        assert_eq!(from_z, set_of_lengths(&a, &atoms).unwrap());
        for f in &z.factorizations {
            assert_eq!(f.product(&atoms).unwrap(), a);
            assert!(f.parts().windows(2).all(|w| w[0] >= w[1]));
        }
        let truncated = enumerate_factorizations(&a, &atoms, 1).unwrap();
        assert!(truncated.truncated);
        assert_eq!(truncated.factorizations.len(), 1);

        // zeros are carried by the zero atom
        let z = enumerate_factorizations(&seq(&c6, "[0]^2 [1] [5]"), &atoms, 10).unwrap();
        assert_eq!(z.factorizations.len(), 1);
        assert_eq!(z.factorizations[0].len(), 3);
    }

    #[test]
    fn closed_form_basic_examples() {
        assert_eq!(closed_form_basic(4, 1, 1, 0).unwrap(), LengthSet::new([2, 4]));
        assert_eq!(closed_form_basic(5, 2, 1, 1).unwrap(), LengthSet::new([4, 7]));
        assert_eq!(closed_form_basic(3, 0, 0, 0).unwrap(), LengthSet::new([0]));
        assert!(closed_form_basic(1, 1, 1, 0).is_err());
        assert!(closed_form_basic(4, 1, 1, 4).is_err());
    }

    #[test]
    fn closed_form_matches_search_on_a_sample() {
        // the full n in [2,7] sweep runs in the acceptance suite
        for n in [2u64, 3, 5] {
            let group = GroupSpec::cyclic(n);
            let atoms = full_atoms(&group);
            for k in 0..=2u64 {
                for l in 0..=2u64 {
                    for r in 0..n {
                        let mut a = Sequence::empty(&group);
                        a.push(&group.element(&[1]).unwrap(), (k * n + r) as u32).unwrap();
                        a.push(&group.element(&[-1]).unwrap(), (l * n + r) as u32).unwrap();
                        assert_eq!(
                            set_of_lengths(&a, &atoms).unwrap(),
                            closed_form_basic(n, k, l, r).unwrap(),
                            "n={n} k={k} l={l} r={r}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn rho_k_examples() {
        assert_eq!(rho_k(&g("C5"), 2).unwrap(), 5);
        assert_eq!(rho_k(&g("C2^2"), 2).unwrap(), 3);
        assert_eq!(rho_k(&g("C4"), 3).unwrap(), 5);
        assert!(rho_k(&g("C5"), 1).is_err());
        assert_eq!(rho_k(&g("C1"), 4).unwrap(), 4);
    }

    #[test]
    fn delta_g_bounded_examples() {
        assert_eq!(delta_g_bounded(&g("C3"), 12).unwrap(), BTreeSet::from([1]));
        assert_eq!(delta_g_bounded(&g("C4"), 8).unwrap(), BTreeSet::from([1, 2]));
        assert_eq!(delta_g_bounded(&g("C6"), 12).unwrap(), BTreeSet::from([1, 2, 3, 4]));
        // monotone in the bound
        let small = delta_g_bounded(&g("C6"), 8).unwrap();
        assert!(small.is_subset(&delta_g_bounded(&g("C6"), 10).unwrap()));
    }

    #[test]
    fn delta_star_bounded_examples() {
        assert_eq!(delta_star_bounded(&g("C5"), 12).unwrap(), BTreeSet::from([1, 3]));
        assert_eq!(delta_star_bounded(&g("C2^3"), 10).unwrap(), BTreeSet::from([1, 2]));
        assert!(delta_star_bounded(&g("C2"), 10).unwrap().is_empty());
        assert!(matches!(
            delta_star_bounded(&g("C2xC4^2"), 10),
            Err(Error::UnsupportedGroup(_))
        ));
    }

    #[test]
    fn max_length_witness_examples() {
        let c6 = g("C6");
        let atoms = full_atoms(&c6);
        let pair = atoms
            .atoms()
            .iter()
            .position(|u| *u == seq(&c6, "[1] [5]"))
            .unwrap();

        let a = seq(&c6, "[1]^2 [5]^2");
        let z = max_length_factorization_containing(&a, &atoms, &[pair, pair]).unwrap();
        assert_eq!(z.len(), 2);
        assert_eq!(z.product(&atoms).unwrap(), a);

        let a = seq(&c6, "[1]^6 [5]^6");
        let z = max_length_factorization_containing(&a, &atoms, &[pair]).unwrap();
        assert_eq!(z.len(), 6);
        assert_eq!(z.product(&atoms).unwrap(), a);

        // empty x: plain maximal-length factorization
        let z = max_length_factorization_containing(&a, &atoms, &[]).unwrap();
        assert_eq!(z.len(), 6);

        // x must divide A
        let a = seq(&c6, "[2]^3");
        assert!(max_length_factorization_containing(&a, &atoms, &[pair]).is_err());
        // x must consist of length-2 atoms
        let g6 = atoms.atoms().iter().position(|u| u.len() == 6).unwrap();
        assert!(matches!(
            max_length_factorization_containing(&a, &atoms, &[g6]),
            Err(Error::InvalidParameter(_))
        ));
    }

    fn arb_zero_sum(desc: &'static str) -> impl Strategy<Value = Sequence> {
        proptest::collection::vec(0i64..6, 0..6).prop_map(move |coords| {
            let group: GroupSpec = desc.parse().unwrap();
            let mut s = Sequence::empty(&group);
            for c in coords {
                s.push(&group.element(&[c]).unwrap(), 1).unwrap();
            }
            let balance = s.sigma().negate();
            if !balance.is_zero() {
                s.push(&balance, 1).unwrap();
            }
            s
        })
    }

    proptest! {
        #[test]
        fn sumset_containment(b in arb_zero_sum("C6"), c in arb_zero_sum("C6")) {
            let group = b.group().clone();
            let atoms = full_atoms(&group);
            let lb = set_of_lengths(&b, &atoms).unwrap();
            let lc = set_of_lengths(&c, &atoms).unwrap();
            let lbc = set_of_lengths(&b.multiply(&c).unwrap(), &atoms).unwrap();
            for v in lb.sumset(&lc).values() {
                prop_assert!(lbc.contains(v), "missing {v} in L(BC)");
            }
        }

        #[test]
        fn g_norm_bounds_min_max(a in arb_zero_sum("C5")) {
            // supp(A) inside <g>: ||A||_g / (n-1) <= min L <= max L <= ||A||_g
            let group = a.group().clone();
            let atoms = full_atoms(&group);
            let l = set_of_lengths(&a, &atoms).unwrap();
            if !a.is_empty() && a.multiplicity(&group.zero()) == 0 {
                let gen = group.element(&[1]).unwrap();
                let norm = a.g_norm(&gen).unwrap();
                prop_assert!(norm.is_integer());
                let norm = *norm.numer() / *norm.denom();
                prop_assert!(norm <= l.min_value().unwrap() * 4);
                prop_assert!(l.max_value().unwrap() <= norm);
            }
        }

        #[test]
        fn lengths_match_brute_force_factorizations(a in arb_zero_sum("C4")) {
            let group = a.group().clone();
            let atoms = full_atoms(&group);
            let z = enumerate_factorizations(&a, &atoms, 100_000).unwrap();
            prop_assert!(!z.truncated);
            let from_z: LengthSet =
                z.factorizations.iter().map(|f| f.len() as u64).collect();
            prop_assert_eq!(from_z, set_of_lengths(&a, &atoms).unwrap());
        }
    }
}
