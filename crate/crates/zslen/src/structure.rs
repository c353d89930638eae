//! Classification of finite sets of lengths as (almost) arithmetical
//! (multi)progressions.
//!
//! A set `L` is an AP with difference `d` if `L = min L + d*[0,k]`; an AMP
//! with period `D` (where `{0,d} ⊆ D ⊆ [0,d]`) if `L` is an interval of
//! `min L + D + dZ`; and an AAMP with bound `M` if `L = y + (L' ∪ L* ∪ L'')`
//! with central part `L*` an AMP of difference `d` and period `D` starting
//! at 0, initial part `L' ⊆ [-M,-1]`, and end part `L'' ⊆ max L* + [1,M]`,
//! all inside `y + D + dZ`.
//! An AAP is an AAMP with period `{0,d}`.
//!
//! Verdicts are deterministic: differences are tried in ascending order,
//! periods in lexicographic order of their offset lists, witnesses with the
//! anchor `y` ascending and the central span descending. Every positive
//! verdict carries a witness that reconstructs the set exactly.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lengths::LengthSet;

/// A period `D` for multiprogressions: offsets within `[0, d]` that always
/// include both endpoints.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Period {
    d: u64,
    offsets: BTreeSet<u64>,
}

impl Period {
    pub fn new(d: u64, offsets: impl IntoIterator<Item = u64>) -> Result<Period> {
        let offsets: BTreeSet<u64> = offsets.into_iter().collect();
        if d == 0 {
            return Err(Error::InvalidParameter("period difference must be positive".into()));
        }
        if !offsets.contains(&0) || !offsets.contains(&d) {
            return Err(Error::InvalidParameter(format!(
                "period offsets must contain 0 and {d}"
            )));
        }
        if offsets.iter().any(|&o| o > d) {
            return Err(Error::InvalidParameter(format!(
                "period offsets must lie in [0, {d}]"
            )));
        }
        Ok(Period { d, offsets })
    }

    /// The plain-progression period `{0, d}`.
    pub fn ap(d: u64) -> Result<Period> {
        Period::new(d, [0, d])
    }

    pub fn d(&self) -> u64 {
        self.d
    }

    pub fn offsets(&self) -> &BTreeSet<u64> {
        &self.offsets
    }

    /// Membership of `v` in `D + dZ` (for `v >= 0`).
    fn pattern_contains(&self, v: u64) -> bool {
        self.offsets.contains(&(v % self.d)) || v % self.d == 0
    }

    /// `(D + dZ) ∩ [0, hi]`.
    fn pattern_up_to(&self, hi: u64) -> BTreeSet<u64> {
        let mut out = BTreeSet::new();
        let mut base = 0u64;
        loop {
            for &o in &self.offsets {
                let v = base + o;
                if v <= hi {
                    out.insert(v);
                }
            }
            base += self.d;
            if base > hi {
                return out;
            }
        }
    }

    /// All periods with difference `d`, in lexicographic order of their
    /// sorted offset lists.
    fn all_with_difference(d: u64) -> Vec<Period> {
        assert!(d >= 1 && d <= 24, "period enumeration is for small d");
        let interior: Vec<u64> = (1..d).collect();
        let mut out = Vec::new();
        for mask in 0..(1u64 << interior.len()) {
            let mut offsets = BTreeSet::from([0, d]);
            for (i, &o) in interior.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    offsets.insert(o);
                }
            }
            out.push(Period { d, offsets });
        }
        out.sort_by(|a, b| a.offsets.iter().cmp(b.offsets.iter()));
        out
    }
}

/// Witness decomposition `L = y + (L' ∪ L* ∪ L'')` for an AAMP verdict.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AampWitness {
    /// Anchor: `L*` starts at `y`.
    pub y: u64,
    /// Initial part, inside `[-M, -1]`.
    pub initial: Vec<i64>,
    /// Central part `(D + dZ) ∩ [0, max L*]`.
    pub central: Vec<u64>,
    /// End part, inside `max L* + [1, M]`.
    pub end: Vec<u64>,
    /// Central length: the largest `l` with `l*d <= max L*`.
    pub length: u64,
}

impl AampWitness {
    /// The set the witness describes: `y + (L' ∪ L* ∪ L'')`.
    pub fn reconstruct(&self) -> LengthSet {
        let y = self.y as i64;
        self.initial
            .iter()
            .copied()
            .chain(self.central.iter().map(|&v| v as i64))
            .chain(self.end.iter().map(|&v| v as i64))
            .map(|v| (y + v) as u64)
            .collect()
    }
}

/// The classification verdict with its parameters and witness.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "variant")]
pub enum ProgressionForm {
    Singleton { value: u64 },
    #[serde(rename = "AP")]
    Ap { d: u64, length: u64 },
    #[serde(rename = "AMP")]
    Amp { d: u64, offsets: Vec<u64>, length: u64 },
    #[serde(rename = "AAP")]
    Aap { d: u64, bound: u64, length: u64, witness: AampWitness },
    #[serde(rename = "AAMP")]
    Aamp { d: u64, offsets: Vec<u64>, bound: u64, length: u64, witness: AampWitness },
}

/// True iff `L = min L + d*[0, k]` for some `k >= 0`.
///
/// Singletons are APs for every difference; the empty set is not.
pub fn is_ap(l: &LengthSet, d: u64) -> bool {
    let (min, max) = match (l.min_value(), l.max_value()) {
        (Some(min), Some(max)) => (min, max),
        _ => return false,
    };
    if d == 0 {
        return min == max;
    }
    (max - min) % d == 0 && l.values().all(|v| (v - min) % d == 0) && {
        let k = (max - min) / d;
        l.len() as u64 == k + 1
    }
}

/// If `L` is an AMP with difference `d`, its unique period and central
/// length; `None` otherwise.
///
/// The period's offsets are `{(x - min L) mod d : x in L} ∪ {d}` and the
/// verdict holds iff `L = (min L + D + dZ) ∩ [min L, max L]`.
pub fn classify_amp(l: &LengthSet, d: u64) -> Option<(Period, u64)> {
    let min = l.min_value()?;
    let max = l.max_value()?;
    if d == 0 {
        return None;
    }
    let mut offsets: BTreeSet<u64> = l.values().map(|v| (v - min) % d).collect();
    offsets.insert(d);
    let period = Period { d, offsets };
    let expected: BTreeSet<u64> = period.pattern_up_to(max - min);
    if expected != l.values().map(|v| v - min).collect() {
        return None;
    }
    let length = (0..)
        .take_while(|k| l.contains(min + k * d))
        .last()
        .unwrap_or(0);
    Some((period, length))
}

/// Searches for an AAMP witness of `L` with difference `d`, period `period`,
/// and bound `bound`.
///
/// Anchors `y in L` are tried in ascending order and central spans `[y, b]`
/// with `b in L` in descending order of `b`; the first valid decomposition
/// wins.
pub fn is_aamp(l: &LengthSet, period: &Period, bound: u64) -> Option<AampWitness> {
    let d = period.d;
    l.min_value()?;
    // global congruence constraint: L ⊆ y + D + dZ for the anchor tried
    for y in l.values() {
        if !l
            .values()
            .all(|v| period.pattern_contains((v + d * (y / d + 1)) - y))
        {
            continue;
        }
        let spans: Vec<u64> = l.values().filter(|&b| b >= y).collect();
        for &b in spans.iter().rev() {
            let span = b - y;
            let central = period.pattern_up_to(span);
            let actual: BTreeSet<u64> = l
                .values()
                .filter(|&v| v >= y && v <= b)
                .map(|v| v - y)
                .collect();
            if actual != central {
                continue;
            }
            let initial: Vec<i64> = l
                .values()
                .filter(|&v| v < y)
                .map(|v| v as i64 - y as i64)
                .collect();
            if initial.iter().any(|&v| v < -(bound as i64)) {
                continue;
            }
            let end: Vec<u64> = l.values().filter(|&v| v > b).map(|v| v - y).collect();
            if end.iter().any(|&v| v > span + bound) {
                continue;
            }
            let witness = AampWitness {
                y,
                initial,
                central: central.into_iter().collect(),
                end,
                length: span / d,
            };
            debug_assert_eq!(&witness.reconstruct(), l);
            return Some(witness);
        }
    }
    None
}

/// The least `M` such that `L` is an AAP (period `{0, d}`) with bound `M`,
/// or `None` when `L` does not fit `y + dZ` for any anchor.
pub fn minimal_aap_bound(l: &LengthSet, d: u64) -> Option<(u64, AampWitness)> {
    if d == 0 || l.is_empty() {
        return None;
    }
    let period = Period::ap(d).ok()?;
    let span = l.max_value()? - l.min_value()?;
    (0..=span).find_map(|m| is_aamp(l, &period, m).map(|w| (m, w)))
}

/// Classifies `L` against the allowed differences, with precedence
/// Singleton > AP > AMP > AAP > AAMP and ties broken by smaller difference,
/// then lexicographically smaller period, then smaller bound.
pub fn classify(l: &LengthSet, allowed_d: &BTreeSet<u64>) -> Result<ProgressionForm> {
    if allowed_d.is_empty() || allowed_d.contains(&0) {
        return Err(Error::InvalidParameter(
            "allowed differences must be a nonempty set of positive integers".into(),
        ));
    }
    let (min, max) = match (l.min_value(), l.max_value()) {
        (Some(min), Some(max)) => (min, max),
        _ => return Err(Error::InvalidParameter("cannot classify the empty set".into())),
    };
    if min == max {
        return Ok(ProgressionForm::Singleton { value: min });
    }
    for &d in allowed_d {
        if is_ap(l, d) {
            return Ok(ProgressionForm::Ap { d, length: (max - min) / d });
        }
    }
    for &d in allowed_d {
        if let Some((period, length)) = classify_amp(l, d) {
            return Ok(ProgressionForm::Amp {
                d,
                offsets: period.offsets.into_iter().collect(),
                length,
            });
        }
    }
    for &d in allowed_d {
        if let Some((bound, witness)) = minimal_aap_bound(l, d) {
            let length = witness.length;
            return Ok(ProgressionForm::Aap { d, bound, length, witness });
        }
    }
    // the full period [0, d] always admits a witness, so this terminates
    let span = max - min;
    for &d in allowed_d {
        for period in Period::all_with_difference(d) {
            if let Some((bound, witness)) =
                (0..=span).find_map(|m| is_aamp(l, &period, m).map(|w| (m, w)))
            {
                let length = witness.length;
                return Ok(ProgressionForm::Aamp {
                    d,
                    offsets: period.offsets.into_iter().collect(),
                    bound,
                    length,
                    witness,
                });
            }
        }
    }
    unreachable!("full period admits a witness for every nonempty set")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ls(values: impl IntoIterator<Item = u64>) -> LengthSet {
        LengthSet::new(values)
    }

    #[test]
    fn period_validation() {
        assert!(Period::new(3, [0, 1, 3]).is_ok());
        assert!(Period::new(0, [0]).is_err());
        assert!(Period::new(3, [0, 1]).is_err()); // missing d
        assert!(Period::new(3, [1, 3]).is_err()); // missing 0
        assert!(Period::new(3, [0, 3, 4]).is_err()); // offset above d
    }

    #[test]
    fn ap_detection() {
        assert!(is_ap(&ls([2, 4, 6]), 2));
        assert!(is_ap(&ls([2, 3]), 1));
        assert!(!is_ap(&ls([2, 4, 5]), 1));
        assert!(!is_ap(&ls([2, 4, 6]), 4));
        assert!(is_ap(&ls([7]), 5)); // singletons are APs for every d
        assert!(!is_ap(&LengthSet::default(), 1));
    }

    #[test]
    fn amp_detection() {
        let (p, l) = classify_amp(&ls([3, 4, 5, 7]), 4).unwrap();
        assert_eq!(p, Period::new(4, [0, 1, 2, 4]).unwrap());
        assert_eq!(l, 1);

        let (p, l) = classify_amp(&ls([2, 5]), 3).unwrap();
        assert_eq!(p, Period::new(3, [0, 3]).unwrap());
        assert_eq!(l, 1);

        assert!(classify_amp(&ls([2, 4, 5]), 1).is_none());
        // AP is an AMP with period {0,d}
        let (p, l) = classify_amp(&ls([2, 4, 6]), 2).unwrap();
        assert_eq!(p, Period::ap(2).unwrap());
        assert_eq!(l, 2);
    }

    #[test]
    fn aamp_witness_search() {
        let period = Period::new(1, [0, 1]).unwrap();
        assert!(is_aamp(&ls([0, 1, 3]), &period, 1).is_none());
        let w = is_aamp(&ls([0, 1, 3]), &period, 2).unwrap();
        assert_eq!(w.y, 0);
        assert_eq!(w.central, vec![0, 1]);
        assert_eq!(w.end, vec![3]);
        assert_eq!(w.reconstruct(), ls([0, 1, 3]));

        // an AP is an AAMP with bound 0
        let w = is_aamp(&ls([5, 7, 9]), &Period::ap(2).unwrap(), 0).unwrap();
        assert_eq!(w.y, 5);
        assert!(w.initial.is_empty() && w.end.is_empty());
    }

    #[test]
    fn minimal_bound_search() {
        assert_eq!(minimal_aap_bound(&ls([2, 4, 6]), 2).unwrap().0, 0);
        assert_eq!(minimal_aap_bound(&ls([2, 5]), 1).unwrap().0, 3);
        // 2 and 5 are in different residue classes mod 2
        assert!(minimal_aap_bound(&ls([2, 5]), 2).is_none());
    }

    #[test]
    fn classify_examples() {
        let any = BTreeSet::from([1u64, 2, 3, 4]);
        assert_eq!(
            classify(&ls([7]), &any).unwrap(),
            ProgressionForm::Singleton { value: 7 }
        );
        assert_eq!(
            classify(&ls([2, 4, 6]), &any).unwrap(),
            ProgressionForm::Ap { d: 2, length: 2 }
        );
        assert_eq!(
            classify(&ls([3, 4, 6]), &BTreeSet::from([1, 2, 3])).unwrap(),
            ProgressionForm::Amp { d: 3, offsets: vec![0, 1, 3], length: 1 }
        );
        // no admissible d gives an AP or AMP; falls through to AAP
        match classify(&ls([2, 3, 4, 6]), &BTreeSet::from([1])).unwrap() {
            ProgressionForm::Aap { d: 1, bound, witness, .. } => {
                assert_eq!(bound, 2);
                assert_eq!(witness.reconstruct(), ls([2, 3, 4, 6]));
            }
            other => panic!("unexpected verdict {other:?}"),
        }
        assert!(classify(&ls([1, 2]), &BTreeSet::new()).is_err());
        assert!(classify(&LengthSet::default(), &any).is_err());
    }

    #[test]
    fn classify_json_shape() {
        let form = classify(&ls([3, 4, 6]), &BTreeSet::from([1, 2, 3])).unwrap();
        let json = serde_json::to_value(&form).unwrap();
        assert_eq!(json["variant"], "AMP");
        assert_eq!(json["d"], 3);
        assert_eq!(json["offsets"], serde_json::json!([0, 1, 3]));
        assert_eq!(json["length"], 1);
    }

    fn arb_period(max_d: u64) -> impl Strategy<Value = Period> {
        (1..=max_d).prop_flat_map(|d| {
            proptest::collection::btree_set(1..d.max(2), 0..=(d as usize).saturating_sub(1))
                .prop_map(move |mut interior| {
                    interior.insert(0);
                    interior.insert(d);
                    interior.retain(|&o| o <= d);
                    Period { d, offsets: interior }
                })
        })
    }

    proptest! {
        #[test]
        fn generator_round_trip(
            period in arb_period(5),
            y in 0u64..20,
            l in 0u64..5,
            bound in 0u64..4,
            init_mask in 0u64..16,
            end_mask in 0u64..16,
        ) {
            // build a set per the definition and check acceptance
            let d = period.d();
            // residues of D + dZ, for keeping the extras congruent
            let residues: BTreeSet<u64> = period.offsets().iter().map(|&o| o % d).collect();
            let mut values: BTreeSet<u64> = period
                .pattern_up_to(l * d)
                .into_iter()
                .map(|v| y + bound + v)
                .collect();
            for i in 0..bound.min(4) {
                if init_mask >> i & 1 == 1 && residues.contains(&((d - (1 + i) % d) % d)) {
                    values.insert(y + bound - 1 - i);
                }
                if end_mask >> i & 1 == 1 && residues.contains(&((1 + i) % d)) {
                    values.insert(y + bound + l * d + 1 + i);
                }
            }
            let set = LengthSet::new(values);
            let w = is_aamp(&set, &period, bound);
            prop_assert!(w.is_some(), "constructed AAMP rejected: {set} d={d}");
            prop_assert_eq!(w.unwrap().reconstruct(), set);
        }

        #[test]
        fn hierarchy_monotonicity(
            values in proptest::collection::btree_set(0u64..30, 1..8),
            d in 1u64..6,
        ) {
            let set = LengthSet::new(values);
            let span = set.max_value().unwrap() - set.min_value().unwrap();
            if is_ap(&set, d) {
                let amp = classify_amp(&set, d);
                prop_assert!(amp.is_some());
                prop_assert_eq!(amp.unwrap().0, Period::ap(d).unwrap());
                prop_assert_eq!(minimal_aap_bound(&set, d).map(|(m, _)| m), Some(0));
            }
            if let Some((period, _)) = classify_amp(&set, d) {
                prop_assert!(is_aamp(&set, &period, 0).is_some());
            }
            if let Some((m, _)) = minimal_aap_bound(&set, d) {
                prop_assert!(is_aamp(&set, &Period::ap(d).unwrap(), m).is_some());
                prop_assert!(is_aamp(&set, &Period::ap(d).unwrap(), m + span + 1).is_some());
            }
        }

        #[test]
        fn classify_shift_invariant(
            values in proptest::collection::btree_set(0u64..20, 1..6),
            shift in 0u64..10,
        ) {
            let set = LengthSet::new(values);
            let shifted = set.shift(shift);
            let allowed = BTreeSet::from([1u64, 2, 3]);
            let a = classify(&set, &allowed).unwrap();
            let b = classify(&shifted, &allowed).unwrap();
            let tag = |f: &ProgressionForm| match f {
                ProgressionForm::Singleton { .. } => (0u8, 0, vec![], 0),
                ProgressionForm::Ap { d, .. } => (1, *d, vec![], 0),
                ProgressionForm::Amp { d, offsets, .. } => (2, *d, offsets.clone(), 0),
                ProgressionForm::Aap { d, bound, .. } => (3, *d, vec![], *bound),
                ProgressionForm::Aamp { d, offsets, bound, .. } => {
                    (4, *d, offsets.clone(), *bound)
                }
            };
            prop_assert_eq!(tag(&a), tag(&b));
        }
    }
}
