//! Enumeration of atoms (minimal zero-sum sequences) over a support set.
//!
//! The search is a depth-first walk over multiplicity vectors: elements of
//! the support are appended in non-decreasing order, and each path carries
//! its running sum and the set of proper-subsequence sums. A path dies as
//! soon as it stops being zero-sum free, which caps the depth at the
//! Davenport constant without knowing it in advance.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::group::{GroupElement, GroupSpec, SmallGroup};
use crate::seq::Sequence;

/// Environment variable naming the cache root directory.
pub const CACHE_DIR_ENV: &str = "ZSLEN_CACHE_DIR";

const CACHE_FORMAT: &str = "zslen-atoms v1";

/// Knobs for [`enumerate_atoms_with`].
#[derive(Clone, Debug, Default)]
pub struct AtomSearchConfig {
    /// Hard cap on atom length; `None` uses `|G|`, which bounds every
    /// minimal zero-sum sequence (the partial sums of an atom are pairwise
    /// distinct). The zero-sum-free pruning keeps the effective depth at
    /// the Davenport constant regardless.
    pub max_len: Option<u64>,
    /// Cap on visited search nodes; exceeding it aborts with the number of
    /// atoms found so far, returning no partial result.
    pub node_budget: Option<u64>,
}

/// The complete set of atoms over a support `G_0`, in canonical order:
/// by length, then lexicographically on the multiplicity vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AtomSet {
    group: GroupSpec,
    support: Vec<GroupElement>,
    atoms: Vec<Sequence>,
    davenport: u64,
    min_len: u64,
}

impl AtomSet {
    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    /// The support `G_0`, sorted, deduplicated.
    pub fn support(&self) -> &[GroupElement] {
        &self.support
    }

    pub fn atoms(&self) -> &[Sequence] {
        &self.atoms
    }

    /// `D(G_0)`, the maximal atom length (0 for an empty support).
    pub fn davenport(&self) -> u64 {
        self.davenport
    }

    /// The minimal atom length, the lower companion of `D(G_0)`.
    pub fn min_len(&self) -> u64 {
        self.min_len
    }
}

/// Enumerates all atoms over `support` with default limits.
pub fn enumerate_atoms(group: &GroupSpec, support: &[GroupElement]) -> Result<AtomSet> {
    enumerate_atoms_with(group, support, &AtomSearchConfig::default())
}

pub fn enumerate_atoms_with(
    group: &GroupSpec,
    support: &[GroupElement],
    config: &AtomSearchConfig,
) -> Result<AtomSet> {
    for e in support {
        if e.group() != group {
            return Err(Error::GroupMismatch(
                group.descriptor(),
                e.group().descriptor(),
            ));
        }
    }
    let table = SmallGroup::new(group)?;
    let mut idxs: Vec<u32> = support
        .iter()
        .map(|e| group.element_index(e) as u32)
        .collect();
    idxs.sort_unstable();
    idxs.dedup();

    let mut atoms: Vec<Vec<u32>> = Vec::new(); // multiplicity vectors over idxs
    let has_zero = idxs.first() == Some(&0);
    let search_idxs: &[u32] = if has_zero { &idxs[1..] } else { &idxs };
    if has_zero {
        // 0 alone is an atom; 0 never appears in any other atom.
        let mut m = vec![0u32; idxs.len()];
        m[0] = 1;
        atoms.push(m);
    }

    let max_len = config.max_len.unwrap_or(group.order());
    let budget = config.node_budget.unwrap_or(u64::MAX);
    let nodes = AtomicU64::new(0);

    // Each top-level branch fixes the first (smallest) support element.
    let branch_results: Vec<Result<Vec<Vec<u32>>>> = (0..search_idxs.len())
        .into_par_iter()
        .map(|first| {
            let mut found = Vec::new();
            let mut state = DfsState {
                table: &table,
                idxs: search_idxs,
                zero_offset: usize::from(has_zero),
                max_len,
                budget,
                nodes: &nodes,
                mults: vec![0u32; idxs.len()],
                proper: Bitset::new(table.order as usize),
            };
            state.extend(first, 0, 0, &mut found)?;
            Ok(found)
        })
        .collect();
    for r in branch_results {
        atoms.extend(r?);
    }

    // Canonical order: length, then multiplicity vector.
    atoms.sort_unstable_by(|a, b| {
        let la: u64 = a.iter().map(|&m| m as u64).sum();
        let lb: u64 = b.iter().map(|&m| m as u64).sum();
        la.cmp(&lb).then_with(|| a.cmp(b))
    });

    let elems: Vec<GroupElement> = idxs
        .iter()
        .map(|&i| group.element_from_index(i as u64))
        .collect();
    let mut seqs = Vec::with_capacity(atoms.len());
    for mults in &atoms {
        let mut s = Sequence::empty(group);
        for (e, &m) in elems.iter().zip(mults.iter()) {
            s.push(e, m)?;
        }
        seqs.push(s);
    }
    let davenport = seqs.iter().map(|a| a.len()).max().unwrap_or(0);
    let min_len = seqs.iter().map(|a| a.len()).min().unwrap_or(0);
    Ok(AtomSet {
        group: group.clone(),
        support: elems,
        atoms: seqs,
        davenport,
        min_len,
    })
}

/// `D(G)`: the Davenport constant of the full group.
pub fn davenport(group: &GroupSpec) -> Result<u64> {
    let all = group.enumerate_elements()?;
    Ok(enumerate_atoms(group, &all)?.davenport())
}

struct DfsState<'a> {
    table: &'a SmallGroup,
    idxs: &'a [u32],
    zero_offset: usize,
    max_len: u64,
    budget: u64,
    nodes: &'a AtomicU64,
    mults: Vec<u32>,
    proper: Bitset,
}

impl DfsState<'_> {
    /// Tries to append `idxs[pos]` to the current zero-sum-free path with
    /// running sum `sigma` and length `len`, then recurses over `pos..`.
    fn extend(
        &mut self,
        pos: usize,
        sigma: u32,
        len: u64,
        found: &mut Vec<Vec<u32>>,
    ) -> Result<()> {
        if self.nodes.fetch_add(1, Ordering::Relaxed) >= self.budget {
            return Err(Error::BudgetExhausted(format!(
                "atom search node budget {} hit after {} atoms in this branch",
                self.budget,
                found.len()
            )));
        }
        let g = self.idxs[pos];
        let new_sigma = self.table.add(sigma, g);
        // Appending g keeps all proper subsequences zero-sum free iff
        // -g is not a proper-subsequence sum of the current path.
        if len > 0 && self.proper.contains(self.table.neg[g as usize]) {
            return Ok(());
        }
        self.mults[pos + self.zero_offset] += 1;
        if new_sigma == 0 {
            // Minimal zero-sum reached; no extension of it can be minimal.
            found.push(self.mults.clone());
        } else if len + 1 < self.max_len {
            // proper(S g) = proper(S) + {sigma(S)} + (proper(S) + g) + {g},
            // with the first two terms absent while S is empty.
            let saved = self.proper.clone();
            if len > 0 {
                let shifted: Vec<u32> = self.proper.iter().collect();
                self.proper.insert(sigma);
                for p in shifted {
                    self.proper.insert(self.table.add(p, g));
                }
                self.proper.insert(g);
            }
            for next in pos..self.idxs.len() {
                self.extend(next, new_sigma, len + 1, found)?;
            }
            self.proper = saved;
        }
        self.mults[pos + self.zero_offset] -= 1;
        Ok(())
    }
}

#[derive(Clone)]
struct Bitset {
    words: Vec<u64>,
}

impl Bitset {
    fn new(bits: usize) -> Bitset {
        Bitset { words: vec![0; bits.div_ceil(64)] }
    }

    #[inline]
    fn insert(&mut self, i: u32) {
        self.words[(i / 64) as usize] |= 1 << (i % 64);
    }

    #[inline]
    fn contains(&self, i: u32) -> bool {
        self.words[(i / 64) as usize] & (1 << (i % 64)) != 0
    }

    fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        self.words.iter().enumerate().flat_map(|(w, &bits)| {
            let mut rest = bits;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let b = rest.trailing_zeros();
                rest &= rest - 1;
                Some(w as u32 * 64 + b)
            })
        })
    }
}

// ---- persistent cache ----------------------------------------------------

/// Hash identifying a (group, support) pair; first 16 hex digits of SHA-256
/// over the descriptor and the canonical support listing.
fn support_hash(group: &GroupSpec, support: &[GroupElement]) -> String {
    let mut sorted: Vec<&GroupElement> = support.iter().collect();
    sorted.sort();
    sorted.dedup();
    let mut hasher = Sha256::new();
    hasher.update(group.descriptor().as_bytes());
    for e in sorted {
        hasher.update(b"|");
        hasher.update(e.to_string().as_bytes());
    }
    let digest = hasher.finalize();
    let mut hex = String::new();
    for b in &digest[..8] {
        write!(hex, "{b:02x}").unwrap();
    }
    hex
}

fn cache_dir(explicit: Option<&Path>) -> Result<PathBuf> {
    if let Some(dir) = explicit {
        return Ok(dir.to_path_buf());
    }
    match std::env::var_os(CACHE_DIR_ENV) {
        Some(dir) => Ok(PathBuf::from(dir)),
        None => Err(Error::InvalidParameter(format!(
            "no cache directory: pass one or set {CACHE_DIR_ENV}"
        ))),
    }
}

fn cache_path(dir: &Path, group: &GroupSpec, support: &[GroupElement]) -> PathBuf {
    dir.join(format!(
        "{}-{}.atoms",
        group.descriptor(),
        support_hash(group, support)
    ))
}

fn checksum(body: &str) -> String {
    let digest = Sha256::digest(body.as_bytes());
    let mut hex = String::new();
    for b in digest {
        write!(hex, "{b:02x}").unwrap();
    }
    hex
}

/// Writes an atom set to the cache, atomically (temp file + rename).
/// Returns the file path.
pub fn cache_store(set: &AtomSet, dir: Option<&Path>) -> Result<PathBuf> {
    let dir = cache_dir(dir)?;
    std::fs::create_dir_all(&dir)?;
    let path = cache_path(&dir, &set.group, &set.support);
    let mut body = format!(
        "{CACHE_FORMAT} {} {}\n",
        set.group.descriptor(),
        support_hash(&set.group, &set.support)
    );
    for atom in &set.atoms {
        writeln!(body, "{atom}").unwrap();
    }
    let mut tmp = tempfile::NamedTempFile::new_in(&dir)?;
    tmp.write_all(body.as_bytes())?;
    writeln!(tmp, "sha256:{}", checksum(&body))?;
    tmp.persist(&path).map_err(|e| Error::Io(e.error))?;
    Ok(path)
}

/// Loads a cached atom set for the given key; `Ok(None)` means no entry.
/// Stale format versions and checksum mismatches are errors, never reused.
pub fn cache_load(
    group: &GroupSpec,
    support: &[GroupElement],
    dir: Option<&Path>,
) -> Result<Option<AtomSet>> {
    let dir = cache_dir(dir)?;
    let path = cache_path(&dir, group, support);
    let text = match std::fs::read_to_string(&path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(e.into()),
    };
    let (body, last) = text
        .trim_end_matches('\n')
        .rsplit_once('\n')
        .ok_or_else(|| Error::CacheCorrupt("missing checksum line".into()))?;
    let body = format!("{body}\n");
    let found = last
        .strip_prefix("sha256:")
        .ok_or_else(|| Error::CacheCorrupt("malformed checksum line".into()))?;
    let expected = checksum(&body);
    if found != expected {
        return Err(Error::CacheChecksum {
            expected,
            found: found.to_string(),
        });
    }
    let mut lines = body.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::CacheCorrupt("empty file".into()))?;
    let rest = match header.strip_prefix(CACHE_FORMAT) {
        Some(rest) => rest,
        None => {
            let version = header.split_whitespace().take(2).collect::<Vec<_>>().join(" ");
            return Err(Error::CacheVersion(version, CACHE_FORMAT.to_string()));
        }
    };
    let mut parts = rest.split_whitespace();
    let (hdr_group, hdr_hash) = (parts.next(), parts.next());
    if hdr_group != Some(group.descriptor().as_str())
        || hdr_hash != Some(support_hash(group, support).as_str())
    {
        return Err(Error::CacheCorrupt("header key does not match request".into()));
    }
    let mut atoms = Vec::new();
    for line in lines {
        atoms.push(Sequence::parse(group, line)?);
    }
    let support_set: BTreeSet<GroupElement> = support.iter().cloned().collect();
    let davenport = atoms.iter().map(|a| a.len()).max().unwrap_or(0);
    let min_len = atoms.iter().map(|a| a.len()).min().unwrap_or(0);
    Ok(Some(AtomSet {
        group: group.clone(),
        support: support_set.into_iter().collect(),
        atoms,
        davenport,
        min_len,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(desc: &str) -> GroupSpec {
        desc.parse().unwrap()
    }

    fn elems(group: &GroupSpec, coords: &[&[i64]]) -> Vec<GroupElement> {
        coords.iter().map(|c| group.element(c).unwrap()).collect()
    }

    fn nonzero(group: &GroupSpec) -> Vec<GroupElement> {
        group
            .enumerate_elements()
            .unwrap()
            .into_iter()
            .filter(|e| !e.is_zero())
            .collect()
    }

    #[test]
    fn atoms_over_g_2g_neg_g_in_c6() {
        let c6 = g("C6");
        let set = enumerate_atoms(&c6, &elems(&c6, &[&[1], &[2], &[5]])).unwrap();
        let expected: Vec<Sequence> = [
            "[1] [5]",
            "[2]^3",
            "[2] [5]^2",
            "[1]^4 [2]",
            "[1]^2 [2]^2",
            "[1]^6",
            "[5]^6",
        ]
        .iter()
        .map(|t| Sequence::parse(&c6, t).unwrap())
        .collect();
        let mut expected_sorted = expected.clone();
        expected_sorted.sort_by_key(|a| a.len());
        assert_eq!(set.atoms().len(), 7);
        for a in &expected {
            assert!(set.atoms().contains(a), "missing {a}");
        }
        assert_eq!(set.davenport(), 6);
        assert_eq!(set.min_len(), 2);
    }

    #[test]
    fn atom_counts_on_small_supports() {
        let c5 = g("C5");
        assert_eq!(
            enumerate_atoms(&c5, &elems(&c5, &[&[1], &[2], &[4]]))
                .unwrap()
                .atoms()
                .len(),
            8
        );
        let c6 = g("C6");
        assert_eq!(
            enumerate_atoms(&c6, &elems(&c6, &[&[1], &[3], &[4]]))
                .unwrap()
                .atoms()
                .len(),
            6
        );
    }

    #[test]
    fn davenport_constants() {
        for (desc, d) in [
            ("C1", 1),
            ("C5", 5),
            ("C6", 6),
            ("C2^2", 3),
            ("C2^3", 4),
            ("C2xC4", 5),
            ("C3^2", 5),
        ] {
            assert_eq!(davenport(&g(desc)).unwrap(), d, "D({desc})");
        }
    }

    #[test]
    fn full_group_atom_counts() {
        for (desc, count) in [("C5", 14), ("C6", 19), ("C2xC4", 38), ("C2^3", 21), ("C3^2", 68)] {
            let group = g(desc);
            let set = enumerate_atoms(&group, &nonzero(&group)).unwrap();
            assert_eq!(set.atoms().len(), count, "atom count over {desc}");
        }
    }

    #[test]
    fn zero_in_support_gives_the_zero_atom() {
        let c4 = g("C4");
        let set = enumerate_atoms(&c4, &c4.enumerate_elements().unwrap()).unwrap();
        let zero_atom = Sequence::parse(&c4, "[0]").unwrap();
        assert!(set.atoms().contains(&zero_atom));
        assert_eq!(set.min_len(), 1);
        // 0 appears in no other atom
        for a in set.atoms() {
            if a.multiplicity(&c4.zero()) > 0 {
                assert_eq!(a, &zero_atom);
            }
        }
        // same enumeration without 0, plus the zero atom
        let without = enumerate_atoms(&c4, &nonzero(&c4)).unwrap();
        assert_eq!(set.atoms().len(), without.atoms().len() + 1);
    }

    #[test]
    fn empty_support() {
        let c4 = g("C4");
        let set = enumerate_atoms(&c4, &[]).unwrap();
        assert!(set.atoms().is_empty());
        assert_eq!(set.davenport(), 0);
        assert_eq!(set.min_len(), 0);
    }

    #[test]
    fn enumeration_matches_brute_force() {
        // brute force: all sequences over the support up to length D,
        // filtered by is_minimal_zero_sum
        for (desc, support) in [
            ("C4", vec![vec![1i64], vec![2], vec![3]]),
            ("C2^2", vec![vec![1, 0], vec![0, 1], vec![1, 1]]),
            ("C6", vec![vec![2], vec![3]]),
        ] {
            let group: GroupSpec = desc.parse().unwrap();
            let support: Vec<GroupElement> =
                support.iter().map(|c| group.element(c).unwrap()).collect();
            let set = enumerate_atoms(&group, &support).unwrap();
            let d = set.davenport();
            let mut brute = Vec::new();
            let mut stack = vec![(Sequence::empty(&group), 0usize)];
            while let Some((s, start)) = stack.pop() {
                if s.is_minimal_zero_sum().unwrap() {
                    brute.push(s.clone());
                    continue;
                }
                if s.len() >= d {
                    continue;
                }
                for (i, e) in support.iter().enumerate().skip(start) {
                    let mut t = s.clone();
                    t.push(e, 1).unwrap();
                    stack.push((t, i));
                }
            }
            brute.sort();
            brute.dedup();
            let mut got: Vec<Sequence> = set.atoms().to_vec();
            got.sort();
            assert_eq!(got, brute, "atoms over {desc}");
        }
    }

    #[test]
    fn atoms_closed_under_negation_for_symmetric_support() {
        let c6 = g("C6");
        let set = enumerate_atoms(&c6, &nonzero(&c6)).unwrap();
        for a in set.atoms() {
            assert!(set.atoms().contains(&a.negate()), "missing -({a})");
        }
    }

    #[test]
    fn canonical_order_is_length_then_lex() {
        let c6 = g("C6");
        let set = enumerate_atoms(&c6, &nonzero(&c6)).unwrap();
        let key = |a: &Sequence| -> (u64, Vec<u32>) {
            let mults = set.support().iter().map(|e| a.multiplicity(e)).collect();
            (a.len(), mults)
        };
        for w in set.atoms().windows(2) {
            assert!(key(&w[0]) < key(&w[1]));
        }
    }

    #[test]
    fn node_budget_aborts_without_partial_result() {
        let c6 = g("C6");
        let config = AtomSearchConfig { max_len: None, node_budget: Some(3) };
        assert!(matches!(
            enumerate_atoms_with(&c6, &nonzero(&c6), &config),
            Err(Error::BudgetExhausted(_))
        ));
    }

    #[test]
    fn cache_round_trip_is_identity() {
        let dir = tempfile::tempdir().unwrap();
        let c6 = g("C6");
        let support = elems(&c6, &[&[1], &[2], &[5]]);
        let set = enumerate_atoms(&c6, &support).unwrap();
        cache_store(&set, Some(dir.path())).unwrap();
        let loaded = cache_load(&c6, &support, Some(dir.path())).unwrap().unwrap();
        assert_eq!(loaded, set);
        // unordered/duplicated support keys hit the same entry
        let shuffled = elems(&c6, &[&[5], &[1], &[2], &[1]]);
        assert!(cache_load(&c6, &shuffled, Some(dir.path())).unwrap().is_some());
        // missing key is not an error
        let other = elems(&c6, &[&[1], &[3]]);
        assert!(cache_load(&c6, &other, Some(dir.path())).unwrap().is_none());
    }

    #[test]
    fn cache_rejects_stale_version_and_bad_checksum() {
        let dir = tempfile::tempdir().unwrap();
        let c6 = g("C6");
        let support = elems(&c6, &[&[1], &[5]]);
        let set = enumerate_atoms(&c6, &support).unwrap();
        let path = cache_store(&set, Some(dir.path())).unwrap();

        let text = std::fs::read_to_string(&path).unwrap();
        std::fs::write(&path, text.replace("zslen-atoms v1", "zslen-atoms v0")).unwrap();
        assert!(matches!(
            cache_load(&c6, &support, Some(dir.path())),
            Err(Error::CacheChecksum { .. }) // version edit also breaks the checksum
        ));

        // flip one atom line, keep the old checksum
        let tampered = text.replace("[1]^1 [5]^1", "[1]^2 [5]^2");
        assert_ne!(tampered, text);
        std::fs::write(&path, tampered).unwrap();
        assert!(matches!(
            cache_load(&c6, &support, Some(dir.path())),
            Err(Error::CacheChecksum { .. })
        ));

        // a genuinely stale version with a valid checksum reports the version
        let body = text.rsplit_once("sha256:").unwrap().0;
        let stale_body = body.replace("zslen-atoms v1", "zslen-atoms v0");
        let stale = format!("{stale_body}sha256:{}\n", checksum(&stale_body));
        std::fs::write(&path, stale).unwrap();
        assert!(matches!(
            cache_load(&c6, &support, Some(dir.path())),
            Err(Error::CacheVersion(_, _))
        ));
    }
}
