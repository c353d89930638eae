//! Catalogued families, closed-form membership oracles, and verification
//! suites.
//!
//! For six small groups the full system of sets of lengths
//! `L(G) = { L(A) : A zero-sum over G }` has a closed form;
//! [`system_membership_oracle`] decides membership in it.
//! [`system_enumerate`] computes the bounded system `{ L(A) : |A| <= B }` by
//! exhaustive search, so oracle and search can be played against each other
//! in both directions. [`family_generator`] and [`expected_length_set`]
//! produce catalogued sequence families together with the closed forms of
//! their length sets, and [`verify_suite`] runs named suites (stable ids,
//! see [`suite_ids`]) that compare closed forms, structural classifications,
//! and search results case by case. A suite passes only on exact equality.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::Serialize;

use crate::atoms::{davenport, enumerate_atoms};
use crate::error::{Error, Result};
use crate::group::{GroupElement, GroupSpec, SmallGroup};
use crate::lengths::{
    delta_star_bounded, rho_k, set_of_lengths_with, zero_sum_length_table,
    max_length_factorization_containing, LengthConfig, LengthSet,
};
use crate::seq::Sequence;
use crate::structure::{classify_amp, is_ap, minimal_aap_bound};

/// Decides `L ∈ L(G)` by closed form, for `G` among `C1`, `C2`, `C3`,
/// `C2^2`, `C4`, `C2^3`, and `C3^2`.
pub fn system_membership_oracle(group: &GroupSpec, l: &LengthSet) -> Result<bool> {
    let (min, max) = match (l.min_value(), l.max_value()) {
        (Some(min), Some(max)) => (min, max),
        _ => return Ok(false),
    };
    let span = max - min;
    let interval = l.len() as u64 == span + 1;
    let ap2 = is_ap(l, 2);
    let verdict = match group.descriptor().as_str() {
        // singletons only
        "C1" | "C2" => min == max,
        // y + 2k + [0,k]
        "C3" | "C2^2" => interval && min >= 2 * span,
        // y + (k+1) + [0,k]  or  y + 2k + 2*[0,k]
        "C4" => (interval && min >= span + 1) || (ap2 && min >= span),
        // y + (k+1) + [0,k] for k <= 2,  y + k + [0,k] for k >= 3,  or
        // y + 2k + 2*[0,k]
        "C2^3" => {
            (interval && span <= 2 && min >= span + 1)
                || (interval && span >= 3 && min >= span)
                || (ap2 && min >= span)
        }
        // [2k, l] with l <= 5k,  [2k+1, l] with k >= 1 and l <= 5k+2,  or {1}
        "C3^2" => {
            if !interval {
                false
            } else if min % 2 == 0 {
                max <= 5 * (min / 2)
            } else if min >= 3 {
                max <= 5 * ((min - 1) / 2) + 2
            } else {
                l.len() == 1 // min == 1
            }
        }
        other => {
            return Err(Error::UnsupportedGroup(format!(
                "{other}: no closed form for the full system"
            )))
        }
    };
    Ok(verdict)
}

/// The bounded system `{ L(A) : A zero-sum over G, |A| <= max_len }`.
pub fn system_enumerate(group: &GroupSpec, max_len: u64) -> Result<BTreeSet<LengthSet>> {
    if max_len > 63 {
        return Err(Error::InvalidParameter("system bound exceeds 63".into()));
    }
    let mask_to_set =
        |mask: u64| -> LengthSet { (0..64).filter(|&i| mask >> i & 1 == 1).collect() };
    if group.order() == 1 {
        // only 0^m, so exactly the singletons
        return Ok((0..=max_len).map(|m| LengthSet::new([m])).collect());
    }
    let table = zero_sum_length_table(group, max_len)?;
    let mut masks = BTreeSet::new();
    for (size, layer) in table.layers.iter().enumerate() {
        // 0^m A shifts L(A) by m and costs m of the length budget
        for entry in layer {
            for m in 0..=(max_len - size as u64) {
                masks.insert(entry.mask << m);
            }
        }
    }
    Ok(masks.into_iter().map(mask_to_set).collect())
}

/// Outcome of comparing two bounded systems at the same bound.
#[derive(Clone, Debug, Serialize)]
pub struct SystemComparison {
    pub bound: u64,
    pub equal: bool,
    /// Smallest length set in the symmetric difference, when unequal.
    pub witness: Option<LengthSet>,
    /// Descriptor of the group whose system contains the witness.
    pub witness_in: Option<String>,
}

/// Compares `system_enumerate(g, max_len)` with `system_enumerate(h, max_len)`.
pub fn compare_systems(g: &GroupSpec, h: &GroupSpec, max_len: u64) -> Result<SystemComparison> {
    let sys_g = system_enumerate(g, max_len)?;
    let sys_h = system_enumerate(h, max_len)?;
    if sys_g == sys_h {
        return Ok(SystemComparison { bound: max_len, equal: true, witness: None, witness_in: None });
    }
    let witness = sys_g
        .symmetric_difference(&sys_h)
        .min()
        .cloned()
        .expect("unequal sets have a nonempty symmetric difference");
    let witness_in = if sys_g.contains(&witness) { g } else { h };
    Ok(SystemComparison {
        bound: max_len,
        equal: false,
        witness_in: Some(witness_in.descriptor()),
        witness: Some(witness),
    })
}

fn sequence_from(group: &GroupSpec, parts: &[(&[i64], u64)]) -> Result<Sequence> {
    let mut a = Sequence::empty(group);
    for &(coords, mult) in parts {
        if mult > 0 {
            a.push(&group.element(coords)?, mult as u32)?;
        }
    }
    Ok(a)
}

/// The catalogued sequence family `id` at the given parameters, together
/// with its ambient group. `n` is only meaningful for the families over
/// cyclic factors (`prop3.2`, `prop3.5`).
pub fn family_generator(id: &str, n: Option<u64>, k: u64) -> Result<(GroupSpec, Sequence)> {
    if k < 1 {
        return Err(Error::InvalidParameter(format!("family {id} needs k >= 1")));
    }
    match id {
        "prop3.2" => {
            let n = n.unwrap_or(7);
            if n < 7 {
                return Err(Error::InvalidParameter("prop3.2 needs n >= 7".into()));
            }
            let group = GroupSpec::cyclic(n);
            // g^{nk} (-g)^{nk} (2g)^n, with an odd-order variant
            let a = if n % 2 == 0 {
                sequence_from(&group, &[(&[1], n * k), (&[-1], n * k), (&[2], n)])?
            } else {
                sequence_from(&group, &[(&[1], n * k + 2), (&[-1], n * k), (&[2], n - 1)])?
            };
            Ok((group, a))
        }
        "prop3.5" => {
            let n = n.unwrap_or(4);
            if n < 4 {
                return Err(Error::InvalidParameter("prop3.5 needs n >= 4".into()));
            }
            let group: GroupSpec = format!("C2xC{n}").parse()?;
            // U (-U) (e2 (-e2))^{kn} with U = (e1+e2)(-e1)e2^{n-1}
            let a = sequence_from(
                &group,
                &[
                    (&[1, 1], 1),
                    (&[1, -1], 1),
                    (&[1, 0], 2),
                    (&[0, 1], n - 1 + k * n),
                    (&[0, -1], n - 1 + k * n),
                ],
            )?;
            Ok((group, a))
        }
        "prop3.6.1" => {
            let group: GroupSpec = "C2^4".parse()?;
            // (U3 U4)^{2k}
            let a = sequence_from(
                &group,
                &[
                    (&[1, 0, 0, 0], 4 * k),
                    (&[0, 1, 0, 0], 4 * k),
                    (&[0, 0, 1, 0], 4 * k),
                    (&[0, 0, 0, 1], 2 * k),
                    (&[1, 1, 1, 1], 2 * k),
                    (&[1, 1, 1, 0], 2 * k),
                ],
            )?;
            Ok((group, a))
        }
        "prop3.6.2" => {
            let group: GroupSpec = "C2^4".parse()?;
            // U4^{2k} U2
            let a = sequence_from(
                &group,
                &[
                    (&[1, 0, 0, 0], 2 * k + 1),
                    (&[0, 1, 0, 0], 2 * k + 1),
                    (&[0, 0, 1, 0], 2 * k),
                    (&[0, 0, 0, 1], 2 * k),
                    (&[1, 1, 1, 1], 2 * k),
                    (&[1, 1, 0, 0], 1),
                ],
            )?;
            Ok((group, a))
        }
        "prop3.7.1" => {
            let group: GroupSpec = "C3^3".parse()?;
            // U^{6k+1} (-U) with U = (e1 e2 e3)^2 e0
            let m = 6 * k + 1;
            let a = sequence_from(
                &group,
                &[
                    (&[1, 0, 0], 2 * m),
                    (&[0, 1, 0], 2 * m),
                    (&[0, 0, 1], 2 * m),
                    (&[1, 1, 1], m),
                    (&[-1, 0, 0], 2),
                    (&[0, -1, 0], 2),
                    (&[0, 0, -1], 2),
                    (&[-1, -1, -1], 1),
                ],
            )?;
            Ok((group, a))
        }
        "prop3.7.2" => {
            let group: GroupSpec = "C3^4".parse()?;
            // U^{3k} V1 with U = (e1 e2 e3 e4)^2 e0 and V1 = e1^2 e2^2 (e1+e2)
            let a = sequence_from(
                &group,
                &[
                    (&[1, 0, 0, 0], 6 * k + 2),
                    (&[0, 1, 0, 0], 6 * k + 2),
                    (&[0, 0, 1, 0], 6 * k),
                    (&[0, 0, 0, 1], 6 * k),
                    (&[1, 1, 1, 1], 3 * k),
                    (&[1, 1, 0, 0], 1),
                ],
            )?;
            Ok((group, a))
        }
        other => Err(Error::UnknownId(format!("unknown family '{other}'"))),
    }
}

/// The closed-form length set of family `id` at the given parameters.
pub fn expected_length_set(id: &str, n: Option<u64>, k: u64) -> Result<LengthSet> {
    if k < 1 {
        return Err(Error::InvalidParameter(format!("family {id} needs k >= 1")));
    }
    match id {
        // {2, n, n+1} + 2k + (n-2)*[0,k]
        "prop3.5" => {
            let n = n.unwrap_or(4);
            if n < 4 {
                return Err(Error::InvalidParameter("prop3.5 needs n >= 4".into()));
            }
            Ok(LengthSet::new([2, n, n + 1])
                .sumset(&LengthSet::interval(0, k).dilate(n - 2))
                .shift(2 * k))
        }
        // {4k} ∪ [4k+2, 9k]
        "prop3.6.1" => {
            Ok(LengthSet::new(LengthSet::interval(4 * k + 2, 9 * k).values().chain([4 * k])))
        }
        // (2k+1) + {0,1,3} + 3*[0,k-1]
        "prop3.6.2" => Ok(LengthSet::new([0, 1, 3])
            .sumset(&LengthSet::interval(0, k - 1).dilate(3))
            .shift(2 * k + 1)),
        // [6k+2, 14k+5] ∪ {14k+7}
        "prop3.7.1" => Ok(LengthSet::new(
            LengthSet::interval(6 * k + 2, 14 * k + 5).values().chain([14 * k + 7]),
        )),
        // (3k+1) + {0,1,3} + 3*[0,2k-1]
        "prop3.7.2" => Ok(LengthSet::new([0, 1, 3])
            .sumset(&LengthSet::interval(0, 2 * k - 1).dilate(3))
            .shift(3 * k + 1)),
        other => Err(Error::UnknownId(format!("no closed form for '{other}'"))),
    }
}

// ---- verification suites -----------------------------------------------------

/// Parameters of a [`verify_suite`] run; unset fields fall back to the
/// suite's documented defaults.
#[derive(Clone, Debug, Default)]
pub struct SuiteConfig {
    /// Cyclic order for the families that take one.
    pub n: Option<u64>,
    /// Largest family index k to check.
    pub k: Option<u64>,
    /// Size or length bound of the sweep, depending on the suite.
    pub bound: Option<u64>,
    /// Seed echoed into the report (sweeps here are exhaustive).
    pub seed: u64,
    /// Budgets for the underlying length-set searches.
    pub length: LengthConfig,
}

/// One compared case inside a suite.
#[derive(Clone, Debug, Serialize)]
pub struct CaseReport {
    pub id: String,
    pub expected: String,
    pub computed: String,
    pub pass: bool,
}

/// Echo of the budgets a suite ran under.
#[derive(Clone, Debug, Serialize)]
pub struct BudgetReport {
    pub node_budget: Option<u64>,
    pub memo_bytes: Option<u64>,
}

/// Outcome of a verification suite: per-case verdicts, sorted by case id,
/// and an overall pass that requires every case to match exactly.
#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub params: BTreeMap<String, String>,
    pub cases: Vec<CaseReport>,
    pub pass: bool,
    pub budget: BudgetReport,
}

impl SuiteReport {
    fn assemble(
        suite: &str,
        params: BTreeMap<String, String>,
        mut cases: Vec<CaseReport>,
        cfg: &SuiteConfig,
    ) -> SuiteReport {
        cases.sort_by(|a, b| a.id.cmp(&b.id));
        let pass = !cases.is_empty() && cases.iter().all(|c| c.pass);
        SuiteReport {
            suite: suite.to_string(),
            params,
            cases,
            pass,
            budget: BudgetReport {
                node_budget: cfg.length.node_budget,
                memo_bytes: cfg.length.memo_bytes,
            },
        }
    }
}

fn case(id: impl Into<String>, expected: impl ToString, computed: impl ToString) -> CaseReport {
    let expected = expected.to_string();
    let computed = computed.to_string();
    CaseReport { id: id.into(), pass: expected == computed, expected, computed }
}

fn check(id: impl Into<String>, expected: impl ToString, ok: bool) -> CaseReport {
    let expected = expected.to_string();
    CaseReport {
        id: id.into(),
        computed: if ok { expected.clone() } else { format!("not ({expected})") },
        expected,
        pass: ok,
    }
}

/// `L(A)` with the atoms enumerated over `supp(A)` only.
fn lengths_of(a: &Sequence, cfg: &SuiteConfig) -> Result<LengthSet> {
    let support: Vec<GroupElement> = a.support().cloned().collect();
    let atoms = enumerate_atoms(a.group(), &support)?;
    set_of_lengths_with(a, &atoms, &cfg.length)
}

/// The stable suite identifiers accepted by [`verify_suite`].
pub fn suite_ids() -> Vec<&'static str> {
    let mut ids = vec![
        "prop2.3", "prop2.4", "prop3.2", "prop3.3", "prop3.4", "prop3.5", "prop3.6.1",
        "prop3.6.2", "prop3.7.1", "prop3.7.2", "thm1.1.1c", "wichtig-0", "wichtig-1",
        "wichtig-2", "wichtig-2A", "wichtig-3", "wichtig-4",
    ];
    for g in ORACLE_GROUPS {
        ids.push(match g {
            "C1" => "prop3.1-C1",
            "C2" => "prop3.1-C2",
            "C3" => "prop3.1-C3",
            "C2^2" => "prop3.1-C2^2",
            "C4" => "prop3.1-C4",
            "C2^3" => "prop3.1-C2^3",
            _ => "prop3.1-C3^2",
        });
    }
    ids.sort_unstable();
    ids
}

const ORACLE_GROUPS: [&str; 7] = ["C1", "C2", "C3", "C2^2", "C4", "C2^3", "C3^2"];

/// Runs the named verification suite. Unknown ids list the available ones;
/// budget exhaustion fails the affected case rather than the whole run.
pub fn verify_suite(id: &str, cfg: &SuiteConfig) -> Result<SuiteReport> {
    match id {
        _ if id.starts_with("prop3.1-") => suite_oracle(id, &id["prop3.1-".len()..], cfg),
        "prop3.2" => suite_aap_family(cfg),
        "prop3.3" => suite_form_sweep("prop3.3", "C6", &[1, 2, 4], 4, C6_PERIODS, cfg),
        "prop3.4" => suite_form_sweep("prop3.4", "C5", &[1, 3], 3, C5_PERIODS, cfg),
        "prop3.5" => suite_family(id, &[4, 5], 2, cfg),
        "prop3.6.1" | "prop3.6.2" => suite_family(id, &[0], 2, cfg),
        "prop3.7.1" | "prop3.7.2" => suite_family(id, &[0], 1, cfg),
        "prop2.3" => suite_distance_star(cfg),
        "prop2.4" => suite_elasticities(cfg),
        "thm1.1.1c" => suite_sumset_closure(cfg),
        "wichtig-0" => suite_witness_search(cfg),
        "wichtig-1" => suite_support_sweep("wichtig-1", &[1, 2, 3, 5], cfg, |a, l| {
            check(format!("ap-d1 {a}"), "AP with difference 1", is_ap(l, 1))
        }),
        "wichtig-2" => suite_support_sweep("wichtig-2", &[1, 2, 3, 4], cfg, |a, l| {
            check(format!("ap-d1 {a}"), "AP with difference 1", is_ap(l, 1))
        }),
        "wichtig-2A" => suite_support_sweep("wichtig-2A", &[1, 3, 4], cfg, |a, l| {
            check(format!("ap-d1 {a}"), "AP with difference 1", is_ap(l, 1))
        }),
        "wichtig-3" => suite_support_sweep("wichtig-3", &[1, 2, 5], cfg, |a, l| {
            let two_g = a.group().element(&[2]).expect("2g exists in C6");
            match a.multiplicity(&two_g) {
                v if v >= 3 => {
                    check(format!("ap-d1 {a}"), "AP with difference 1", is_ap(l, 1))
                }
                2 => check(
                    format!("amp-3part {a}"),
                    "AP d1 or AMP d4 with a 4-element period",
                    is_ap(l, 1) || has_amp_period(l, 4, C6_PERIODS_V2),
                ),
                _ => check(
                    format!("amp-2part {a}"),
                    "AP d1 or AMP d4 with a 3-element period",
                    is_ap(l, 1) || has_amp_period(l, 4, C6_PERIODS_V1),
                ),
            }
        }),
        "wichtig-4" => suite_support_sweep("wichtig-4", &[1, 2, 4, 5], cfg, |a, l| {
            let g2 = a.group().element(&[2]).expect("2g exists in C6");
            let g4 = a.group().element(&[4]).expect("4g exists in C6");
            if a.multiplicity(&g2) + a.multiplicity(&g4) >= 3 {
                check(format!("ap-d1 {a}"), "AP with difference 1", is_ap(l, 1))
            } else {
                check(
                    format!("amp-3part {a}"),
                    "AP d1 or AMP d4 with a 4-element period",
                    is_ap(l, 1) || has_amp_period(l, 4, C6_PERIODS_V2),
                )
            }
        }),
        other => Err(Error::UnknownId(format!(
            "unknown suite '{other}'; available: {}",
            suite_ids().join(", ")
        ))),
    }
}

const C6_PERIODS_V1: &[&[u64]] = &[&[0, 1, 4], &[0, 3, 4]];
const C6_PERIODS_V2: &[&[u64]] = &[&[0, 1, 2, 4], &[0, 1, 3, 4], &[0, 2, 3, 4]];
const C6_PERIODS: &[&[u64]] =
    &[&[0, 1, 4], &[0, 3, 4], &[0, 1, 2, 4], &[0, 1, 3, 4], &[0, 2, 3, 4]];
const C5_PERIODS: &[&[u64]] = &[&[0, 2, 3], &[0, 1, 3]];

/// True iff `L` is an AMP with difference `d` whose offsets form a subset of
/// one of the allowed periods (degenerate spans realize sub-periods).
fn has_amp_period(l: &LengthSet, d: u64, allowed: &[&[u64]]) -> bool {
    match classify_amp(l, d) {
        Some((period, _)) => allowed.iter().any(|p| {
            period.offsets().iter().all(|o| p.contains(o))
        }),
        None => false,
    }
}

/// Double inclusion between the bounded system and the closed-form oracle.
fn suite_oracle(suite: &str, desc: &str, cfg: &SuiteConfig) -> Result<SuiteReport> {
    let group: GroupSpec = desc.parse()?;
    let bound = cfg.bound.unwrap_or(12); // cap on max L for the completeness sweep
    let search_bound = cfg.k.unwrap_or(2 * bound); // cap on |A| for the search
    if bound > 20 {
        return Err(Error::InvalidParameter("oracle sweep bound exceeds 20".into()));
    }
    let system = system_enumerate(&group, search_bound)?;
    let mut cases = Vec::new();

    // soundness: everything the search finds is accepted by the closed form
    let rejected: Vec<&LengthSet> = system
        .iter()
        .filter(|l| !system_membership_oracle(&group, l).unwrap_or(false))
        .collect();
    cases.push(check(
        "soundness",
        format!("all {} enumerated length sets accepted", system.len()),
        rejected.is_empty(),
    ));
    if let Some(first) = rejected.first() {
        cases.push(check(format!("soundness-witness {first}"), "accepted", false));
    }

    // completeness: every accepted subset of [0, bound] is realized by a
    // sequence of length at most search_bound
    let mut missing = Vec::new();
    let mut accepted = 0u64;
    for mask in 1u64..(1 << (bound + 1)) {
        let l: LengthSet = (0..=bound).filter(|&i| mask >> i & 1 == 1).collect();
        if system_membership_oracle(&group, &l)? {
            accepted += 1;
            if !system.contains(&l) {
                missing.push(l);
            }
        }
    }
    cases.push(check(
        "completeness",
        format!("all {accepted} accepted sets with max <= {bound} realized at |A| <= {search_bound}"),
        missing.is_empty(),
    ));
    if let Some(first) = missing.first() {
        cases.push(check(format!("completeness-witness {first}"), "realized", false));
    }

    let params = BTreeMap::from([
        ("group".to_string(), desc.to_string()),
        ("bound".to_string(), bound.to_string()),
        ("search_bound".to_string(), search_bound.to_string()),
    ]);
    Ok(SuiteReport::assemble(suite, params, cases, cfg))
}

/// The family `prop3.2`: min L, the gap above it, and the AAP-but-not-AP
/// verdict with difference 1.
fn suite_aap_family(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let n = cfg.n.unwrap_or(7);
    let k = cfg.k.unwrap_or(6);
    let (_, a) = family_generator("prop3.2", Some(n), k)?;
    let l = lengths_of(&a, cfg)?;
    let cases = vec![
        case("min", 2 * k + 2, l.min_value().unwrap_or(0)),
        check("gap", format!("{} not in L", 2 * k + 3), !l.contains(2 * k + 3)),
        check("aap-d1", "AAP with difference 1", minimal_aap_bound(&l, 1).is_some()),
        check("not-ap-d1", "not an AP with difference 1", !is_ap(&l, 1)),
    ];
    let params = BTreeMap::from([
        ("n".to_string(), n.to_string()),
        ("k".to_string(), k.to_string()),
    ]);
    Ok(SuiteReport::assemble("prop3.2", params, cases, cfg))
}

/// Exact-equality suites for the catalogued families.
fn suite_family(id: &str, ns: &[u64], default_k: u64, cfg: &SuiteConfig) -> Result<SuiteReport> {
    let k_max = cfg.k.unwrap_or(default_k);
    let ns: Vec<Option<u64>> = if ns == [0] {
        vec![None]
    } else {
        match cfg.n {
            Some(n) => vec![Some(n)],
            None => ns.iter().map(|&n| Some(n)).collect(),
        }
    };
    let mut cases = Vec::new();
    for &n in &ns {
        for k in 1..=k_max {
            let label = match n {
                Some(n) => format!("n={n} k={k}"),
                None => format!("k={k}"),
            };
            let expected = expected_length_set(id, n, k)?;
            let (_, a) = family_generator(id, n, k)?;
            cases.push(match lengths_of(&a, cfg) {
                Ok(computed) => case(label, &expected, &computed),
                Err(Error::BudgetExhausted(what)) => CaseReport {
                    id: label,
                    expected: expected.to_string(),
                    computed: format!("budget exhausted: {what}"),
                    pass: false,
                },
                Err(e) => return Err(e),
            });
        }
    }
    let params = BTreeMap::from([("k_max".to_string(), k_max.to_string())]);
    Ok(SuiteReport::assemble(id, params, cases, cfg))
}

/// All zero-sum sequences over `C6` with the given exact support and
/// per-element multiplicities in `[1, bound]`, checked case by case.
fn suite_support_sweep(
    suite: &str,
    support_coords: &[i64],
    cfg: &SuiteConfig,
    verdict: impl Fn(&Sequence, &LengthSet) -> CaseReport + Sync,
) -> Result<SuiteReport> {
    let group = GroupSpec::cyclic(6);
    let bound = cfg.bound.unwrap_or(6) as u32;
    let support: Vec<GroupElement> =
        support_coords.iter().map(|&c| group.element(&[c])).collect::<Result<_>>()?;
    let atoms = enumerate_atoms(&group, &support)?;

    // all multiplicity vectors with every entry in [1, bound]
    let mut sequences = Vec::new();
    let mut mults = vec![1u32; support.len()];
    loop {
        let mut a = Sequence::empty(&group);
        for (e, &m) in support.iter().zip(&mults) {
            a.push(e, m)?;
        }
        if a.is_zero_sum() {
            sequences.push(a);
        }
        let mut i = 0;
        loop {
            if i == mults.len() {
                break;
            }
            mults[i] += 1;
            if mults[i] <= bound {
                break;
            }
            mults[i] = 1;
            i += 1;
        }
        if i == mults.len() {
            break;
        }
    }

    let cases: Vec<CaseReport> = sequences
        .par_iter()
        .map(|a| -> Result<CaseReport> {
            let l = set_of_lengths_with(a, &atoms, &cfg.length)?;
            Ok(verdict(a, &l))
        })
        .collect::<Result<_>>()?;
    let params = BTreeMap::from([
        ("group".to_string(), "C6".to_string()),
        ("multiplicity_bound".to_string(), bound.to_string()),
        ("sequences".to_string(), cases.len().to_string()),
    ]);
    Ok(SuiteReport::assemble(suite, params, cases, cfg))
}

/// Every `L(A)` over the group at `|A| <= bound` (zero-free `A`, deduplicated
/// under automorphisms) must be an AP with one of the allowed differences or
/// an AMP with difference `amp_d` and one of the allowed periods.
fn suite_form_sweep(
    suite: &str,
    desc: &str,
    ap_ds: &[u64],
    amp_d: u64,
    periods: &[&[u64]],
    cfg: &SuiteConfig,
) -> Result<SuiteReport> {
    let group: GroupSpec = desc.parse()?;
    let bound = cfg.bound.unwrap_or(14);
    let nonzero: Vec<GroupElement> = group
        .enumerate_elements()?
        .into_iter()
        .filter(|e| !e.is_zero())
        .collect();
    let atoms = enumerate_atoms(&group, &nonzero)?;
    let auts = group.enumerate_automorphisms()?;
    let table = SmallGroup::new(&group)?;

    // canonical zero-sum multiplicity vectors over the nonzero elements
    let mut vectors: BTreeSet<Vec<u32>> = BTreeSet::new();
    collect_zero_sum_vectors(&table, bound, 1, 0, &mut vec![0; group.order() as usize], &mut |counts| {
        let canonical = auts
            .iter()
            .map(|perm| {
                let mut image = vec![0u32; counts.len()];
                for (e, &m) in counts.iter().enumerate() {
                    image[perm[e] as usize] = m;
                }
                image
            })
            .min()
            .expect("identity automorphism is always present");
        vectors.insert(canonical);
    });

    let failures: Vec<String> = vectors
        .par_iter()
        .map(|counts| -> Result<Option<String>> {
            let mut a = Sequence::empty(&group);
            for (e, &m) in counts.iter().enumerate() {
                if m > 0 {
                    a.push(&nonzero[e - 1], m)?;
                }
            }
            let l = set_of_lengths_with(&a, &atoms, &cfg.length)?;
            let ok = ap_ds.iter().any(|&d| is_ap(&l, d)) || has_amp_period(&l, amp_d, periods);
            Ok(if ok { None } else { Some(format!("{a} -> {l}")) })
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();

    let mut cases = vec![check(
        "forms",
        format!("all {} length sets match the catalogued forms", vectors.len()),
        failures.is_empty(),
    )];
    for f in failures.iter().take(3) {
        cases.push(check(format!("forms-witness {f}"), "a catalogued form", false));
    }
    let params = BTreeMap::from([
        ("group".to_string(), desc.to_string()),
        ("bound".to_string(), bound.to_string()),
        ("sequences".to_string(), vectors.len().to_string()),
    ]);
    Ok(SuiteReport::assemble(suite, params, cases, cfg))
}

/// DFS over zero-free multisets of nonzero element indices in non-decreasing
/// order, emitting the zero-sum ones.
fn collect_zero_sum_vectors(
    table: &SmallGroup,
    bound: u64,
    from: u32,
    sigma: u32,
    counts: &mut Vec<u32>,
    emit: &mut impl FnMut(&[u32]),
) {
    if sigma == 0 && counts.iter().any(|&m| m > 0) {
        emit(counts);
    }
    if bound == 0 {
        return;
    }
    for e in from..table.order {
        counts[e as usize] += 1;
        collect_zero_sum_vectors(table, bound - 1, e, table.add(sigma, e), counts, emit);
        counts[e as usize] -= 1;
    }
}

/// Bounded distance-set sweep: the maximum of the starred distance set must
/// match `max(exp(G) - 2, r(G) - 1)` on every group of order 3 to 9.
fn suite_distance_star(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let groups = ["C3", "C4", "C2^2", "C5", "C6", "C7", "C8", "C2xC4", "C2^3", "C9", "C3^2"];
    let cases: Vec<CaseReport> = groups
        .par_iter()
        .map(|desc| -> Result<Vec<CaseReport>> {
            let group: GroupSpec = desc.parse()?;
            let inv = group.invariants();
            // realizing supports need |A| up to 2 D(G), not just 2 exp(G)
            let bound = match cfg.bound {
                Some(b) => b,
                None => 2 * davenport(&group)?.max(inv.exponent),
            };
            let star = delta_star_bounded(&group, bound)?;
            let expected = std::cmp::max(inv.exponent - 2, inv.rank as u64 - 1);
            Ok(vec![
                case(
                    format!("max {desc}"),
                    expected,
                    star.iter().max().copied().unwrap_or(0),
                ),
                check(format!("contains-1 {desc}"), "1 in the set", star.contains(&1)),
            ])
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let params = BTreeMap::from([("groups".to_string(), groups.join(","))]);
    Ok(SuiteReport::assemble("prop2.3", params, cases, cfg))
}

/// `rho_2(G) = D(G)` on groups of order 3 to 9, and `rho_3(C_n) = n + 1`
/// for n in [4, 7].
fn suite_elasticities(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let groups = ["C3", "C4", "C2^2", "C5", "C6", "C7", "C8", "C2xC4", "C2^3", "C9", "C3^2"];
    let mut cases: Vec<CaseReport> = groups
        .par_iter()
        .map(|desc| -> Result<CaseReport> {
            let group: GroupSpec = desc.parse()?;
            Ok(case(format!("rho2 {desc}"), davenport(&group)?, rho_k(&group, 2)?))
        })
        .collect::<Result<_>>()?;
    let rho3: Vec<CaseReport> = [4u64, 5, 6, 7]
        .par_iter()
        .map(|&n| -> Result<CaseReport> {
            Ok(case(format!("rho3 C{n}"), n + 1, rho_k(&GroupSpec::cyclic(n), 3)?))
        })
        .collect::<Result<_>>()?;
    cases.extend(rho3);
    let params = BTreeMap::from([("groups".to_string(), groups.join(","))]);
    Ok(SuiteReport::assemble("prop2.4", params, cases, cfg))
}

/// Sumset closure on the groups whose system has a closed form: for every
/// pair in the bounded system, the sumset is accepted by the oracle.
fn suite_sumset_closure(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let bound = cfg.bound.unwrap_or(8);
    let mut cases = Vec::new();
    for desc in ORACLE_GROUPS {
        let group: GroupSpec = desc.parse()?;
        let system = system_enumerate(&group, bound)?;
        let mut rejected = None;
        let mut pairs = 0u64;
        for l1 in &system {
            for l2 in &system {
                pairs += 1;
                let sum = l1.sumset(l2);
                if !system_membership_oracle(&group, &sum)? {
                    rejected.get_or_insert_with(|| format!("{l1} + {l2} = {sum}"));
                }
            }
        }
        cases.push(check(
            format!("closure {desc}"),
            format!("all {pairs} sumsets in the system"),
            rejected.is_none(),
        ));
        if let Some(w) = rejected {
            cases.push(check(format!("closure-witness {desc} {w}"), "in the system", false));
        }
    }
    let params = BTreeMap::from([("bound".to_string(), bound.to_string())]);
    Ok(SuiteReport::assemble("thm1.1.1c", params, cases, cfg))
}

/// Witness search: over every group of order at most 8, every zero-sum `A`
/// with `|A| <= bound`, and every multiset `x` of length-2 atoms dividing
/// `A`, a maximal-length factorization of `A` divisible by `x` exists.
fn suite_witness_search(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let groups = ["C2", "C3", "C4", "C2^2", "C5", "C6", "C7", "C2xC4", "C2^3", "C8"];
    let bound = cfg.bound.unwrap_or(12);
    let mut cases = Vec::new();
    for desc in groups {
        let group: GroupSpec = desc.parse()?;
        let nonzero: Vec<GroupElement> = group
            .enumerate_elements()?
            .into_iter()
            .filter(|e| !e.is_zero())
            .collect();
        let atoms = enumerate_atoms(&group, &nonzero)?;
        let pair_atoms: Vec<usize> = atoms
            .atoms()
            .iter()
            .enumerate()
            .filter(|(_, u)| u.len() == 2)
            .map(|(i, _)| i)
            .collect();
        let auts = group.enumerate_automorphisms()?;
        let table = SmallGroup::new(&group)?;
        let mut vectors: BTreeSet<Vec<u32>> = BTreeSet::new();
        collect_zero_sum_vectors(
            &table,
            bound,
            1,
            0,
            &mut vec![0; group.order() as usize],
            &mut |counts| {
                let canonical = auts
                    .iter()
                    .map(|perm| {
                        let mut image = vec![0u32; counts.len()];
                        for (e, &m) in counts.iter().enumerate() {
                            image[perm[e] as usize] = m;
                        }
                        image
                    })
                    .min()
                    .expect("identity automorphism is always present");
                vectors.insert(canonical);
            },
        );

        let outcomes: Vec<(u64, Option<String>)> = vectors
            .par_iter()
            .map(|counts| -> Result<(u64, Option<String>)> {
                let mut a = Sequence::empty(&group);
                for (e, &m) in counts.iter().enumerate() {
                    if m > 0 {
                        a.push(&nonzero[e - 1], m)?;
                    }
                }
                let max_l = set_of_lengths_with(&a, &atoms, &cfg.length)?
                    .max_value()
                    .expect("nonempty length set");
                let mut checked = 0u64;
                let mut failure = None;
                // all admissible x: multisets of length-2 atoms dividing A
                let mut stack = vec![(0usize, Vec::new())];
                while let Some((from, x)) = stack.pop() {
                    checked += 1;
                    match max_length_factorization_containing(&a, &atoms, &x) {
                        Ok(z) if z.len() as u64 == max_l => {}
                        Ok(z) => {
                            failure.get_or_insert(format!(
                                "{a}: witness length {} below max {max_l}",
                                z.len()
                            ));
                        }
                        Err(e) => {
                            failure.get_or_insert(format!("{a}: {e}"));
                        }
                    }
                    for (j, &i) in pair_atoms.iter().enumerate().skip(from) {
                        let mut bigger = x.clone();
                        bigger.push(i);
                        let mut product = Sequence::empty(&group);
                        for &idx in &bigger {
                            product = product.multiply(&atoms.atoms()[idx])?;
                        }
                        if product.divides(&a) {
                            stack.push((j, bigger));
                        }
                    }
                }
                Ok((checked, failure))
            })
            .collect::<Result<_>>()?;

        let total: u64 = outcomes.iter().map(|(n, _)| n).sum();
        let first_failure = outcomes.iter().find_map(|(_, f)| f.clone());
        cases.push(check(
            format!("witness {desc}"),
            format!("all {total} (A, x) instances have a maximal witness"),
            first_failure.is_none(),
        ));
        if let Some(f) = first_failure {
            cases.push(check(format!("witness-failure {desc} {f}"), "a maximal witness", false));
        }
    }
    let params = BTreeMap::from([
        ("bound".to_string(), bound.to_string()),
        ("seed".to_string(), cfg.seed.to_string()),
    ]);
    Ok(SuiteReport::assemble("wichtig-0", params, cases, cfg))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(desc: &str) -> GroupSpec {
        desc.parse().unwrap()
    }

    fn ls(values: impl IntoIterator<Item = u64>) -> LengthSet {
        LengthSet::new(values)
    }

    #[test]
    fn oracle_examples() {
        assert!(system_membership_oracle(&g("C3"), &ls([2, 3])).unwrap());
        assert!(system_membership_oracle(&g("C4"), &ls([2, 4])).unwrap());
        assert!(!system_membership_oracle(&g("C2"), &ls([2, 3])).unwrap());
        assert!(system_membership_oracle(&g("C2"), &ls([7])).unwrap());
        assert!(!system_membership_oracle(&g("C3"), &ls([2, 3, 5])).unwrap());
        assert!(!system_membership_oracle(&g("C4"), &ls([2, 4, 5])).unwrap());
        assert!(system_membership_oracle(&g("C3^2"), &ls([0])).unwrap());
        assert!(system_membership_oracle(&g("C3^2"), &ls([1])).unwrap());
        assert!(!system_membership_oracle(&g("C3^2"), &ls([1, 2])).unwrap());
        assert!(system_membership_oracle(&g("C3^2"), &ls(4..=10)).unwrap());
        assert!(!system_membership_oracle(&g("C3^2"), &ls(4..=11)).unwrap());
        assert!(matches!(
            system_membership_oracle(&g("C5"), &ls([1])),
            Err(Error::UnsupportedGroup(_))
        ));
    }

    #[test]
    fn system_enumeration_basics() {
        let c1 = system_enumerate(&g("C1"), 6).unwrap();
        assert_eq!(c1, (0..=6).map(|m| ls([m])).collect());
        // C2: only singletons, realized by 0^a (g^2)^b
        let c2 = system_enumerate(&g("C2"), 8).unwrap();
        assert_eq!(c2, (0..=8).map(|m| ls([m])).collect());
        // a non-AP set appears over C5
        let c5 = system_enumerate(&g("C5"), 14).unwrap();
        assert!(c5.iter().any(|l| l.delta().len() > 1));
    }

    #[test]
    fn system_comparisons() {
        let r = compare_systems(&g("C1"), &g("C2"), 8).unwrap();
        assert!(r.equal);
        let r = compare_systems(&g("C3"), &g("C2^2"), 12).unwrap();
        assert!(r.equal);
        let r = compare_systems(&g("C2"), &g("C3"), 12).unwrap();
        assert!(!r.equal);
        let w = r.witness.unwrap();
        assert!(system_enumerate(&g(&r.witness_in.unwrap()), 12).unwrap().contains(&w));
    }

    #[test]
    fn family_generators_are_zero_sum() {
        for (id, n) in [
            ("prop3.2", Some(7)),
            ("prop3.5", Some(4)),
            ("prop3.6.1", None),
            ("prop3.6.2", None),
            ("prop3.7.1", None),
            ("prop3.7.2", None),
        ] {
            let (group, a) = family_generator(id, n, 1).unwrap();
            assert_eq!(a.group(), &group, "{id}");
            assert!(a.is_zero_sum(), "{id}");
        }
        assert_eq!(family_generator("prop3.5", Some(4), 1).unwrap().1.len(), 18);
        assert_eq!(family_generator("prop3.6.1", None, 1).unwrap().1.len(), 18);
        assert_eq!(family_generator("prop3.2", Some(7), 6).unwrap().1.len(), 92);
        assert_eq!(family_generator("prop3.7.1", None, 1).unwrap().1.len(), 56);
        assert!(matches!(family_generator("nope", None, 1), Err(Error::UnknownId(_))));
        assert!(family_generator("prop3.5", Some(3), 1).is_err());
        assert!(family_generator("prop3.6.1", None, 0).is_err());
    }

    #[test]
    fn expected_sets_match_engine_on_small_instances() {
        assert_eq!(expected_length_set("prop3.5", Some(4), 1).unwrap(), ls([4, 6, 7, 8, 9]));
        assert_eq!(
            expected_length_set("prop3.6.1", None, 1).unwrap(),
            ls([4, 6, 7, 8, 9])
        );
        assert_eq!(expected_length_set("prop3.6.2", None, 1).unwrap(), ls([3, 4, 6]));
        assert_eq!(expected_length_set("prop3.7.2", None, 1).unwrap(), ls([4, 5, 7, 8, 10]));
        let cfg = SuiteConfig::default();
        for (id, n) in [("prop3.5", Some(4)), ("prop3.6.2", None)] {
            let (_, a) = family_generator(id, n, 1).unwrap();
            assert_eq!(
                lengths_of(&a, &cfg).unwrap(),
                expected_length_set(id, n, 1).unwrap(),
                "{id}"
            );
        }
    }

    #[test]
    fn oracle_suites_pass_at_small_bounds() {
        for desc in ["C1", "C2", "C3", "C2^2", "C4"] {
            let cfg = SuiteConfig { bound: Some(6), k: Some(12), ..Default::default() };
            let report = verify_suite(&format!("prop3.1-{desc}"), &cfg).unwrap();
            assert!(report.pass, "{desc}: {:?}", report.cases);
        }
    }

    #[test]
    fn named_suites_smoke() {
        let fast = SuiteConfig { bound: Some(4), ..Default::default() };
        let report = verify_suite("wichtig-2A", &fast).unwrap();
        assert!(report.pass, "{:?}", report.cases);

        let report =
            verify_suite("prop3.6.2", &SuiteConfig { k: Some(1), ..Default::default() }).unwrap();
        assert!(report.pass, "{:?}", report.cases);

        let report =
            verify_suite("prop3.4", &SuiteConfig { bound: Some(8), ..Default::default() }).unwrap();
        assert!(report.pass, "{:?}", report.cases);

        let report =
            verify_suite("thm1.1.1c", &SuiteConfig { bound: Some(6), ..Default::default() })
                .unwrap();
        assert!(report.pass, "{:?}", report.cases);

        let report = verify_suite(
            "prop3.2",
            &SuiteConfig { n: Some(7), k: Some(2), ..Default::default() },
        )
        .unwrap();
        assert!(report.pass, "{:?}", report.cases);

        assert!(matches!(
            verify_suite("nope", &SuiteConfig::default()),
            Err(Error::UnknownId(_))
        ));
    }

    #[test]
    fn witness_suite_smoke() {
        let cfg = SuiteConfig { bound: Some(6), ..Default::default() };
        let report = verify_suite("wichtig-0", &cfg).unwrap();
        assert!(report.pass, "{:?}", report.cases);
    }

    #[test]
    fn report_serialization_schema() {
        let report =
            verify_suite("prop3.6.2", &SuiteConfig { k: Some(1), ..Default::default() }).unwrap();
        let json = serde_json::to_value(&report).unwrap();
        assert_eq!(json["suite"], "prop3.6.2");
        assert!(json["pass"].as_bool().unwrap());
        assert!(json["cases"].as_array().unwrap().iter().all(|c| {
            c.get("id").is_some()
                && c.get("expected").is_some()
                && c.get("computed").is_some()
                && c.get("pass").is_some()
        }));
        assert!(json["budget"].get("node_budget").is_some());
    }
}
