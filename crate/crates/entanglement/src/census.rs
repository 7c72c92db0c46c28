//! Exhaustive search over all sets of six witness settings.

use itertools::Itertools;
use rayon::prelude::*;
use serde::Serialize;

use crate::weyl::{rank_of, weyl_coefficients, observables_for_setting, ComplementList, ObservableMatrix, WitnessSetting};

/// A six-setting set whose 18×15 observable matrix has full rank.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IcSet {
    pub settings: [WitnessSetting; 6],
    pub rank: usize,
    pub singular_values: Vec<f64>,
    /// Index into [`IcCensus::classes`].
    pub class: usize,
}

/// Sets sharing one singular-value multiset.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IcClass {
    pub singular_values: Vec<f64>,
    pub members: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IcCensus {
    pub candidates: usize,
    pub ic_sets: Vec<IcSet>,
    /// Ordered by increasing membership.
    pub classes: Vec<IcClass>,
}

/// Singular values are grouped after rounding to this resolution.
pub const CLASS_RESOLUTION: f64 = 1e-8;

fn class_key(sv: &[f64]) -> Vec<i64> {
    sv.iter().map(|s| (s / CLASS_RESOLUTION).round() as i64).collect()
}

/// Census with the canonical complementary list {X, iXZ, Z}.
pub fn enumerate_ic_sets() -> IcCensus {
    enumerate_ic_sets_with(&ComplementList::CANONICAL)
}

/// Rank and singular values of one six-setting candidate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CandidateRank {
    pub settings: [WitnessSetting; 6],
    pub rank: usize,
    pub singular_values: Vec<f64>,
}

/// Singular values of every C(18,6) candidate, in lexicographic index order.
fn scan(list: &ComplementList) -> Vec<([WitnessSetting; 6], Vec<f64>)> {
    let settings = WitnessSetting::all();
    let rows: Vec<[[f64; 15]; 3]> =
        settings.iter().map(|s| observables_for_setting(s, list).map(|o| weyl_coefficients(&o))).collect();
    let combos: Vec<Vec<usize>> = (0..settings.len()).combinations(6).collect();
    combos
        .par_iter()
        .map(|c| {
            let coeffs: Vec<[f64; 15]> = c.iter().flat_map(|&i| rows[i]).collect();
            (std::array::from_fn(|k| settings[c[k]]), ObservableMatrix::from_rows(&coeffs).singular_values())
        })
        .collect()
}

/// Scans all C(18,6) sets of distinct settings and keeps those of rank 15.
pub fn enumerate_ic_sets_with(list: &ComplementList) -> IcCensus {
    census_with_ranks(list).0
}

/// The census together with the rank of every candidate, in lexicographic
/// order of setting indices.
pub fn census_with_ranks(list: &ComplementList) -> (IcCensus, Vec<CandidateRank>) {
    let all = scan(list);
    let candidates = all.len();
    let ranks: Vec<CandidateRank> = all.iter().map(|(s, sv)| CandidateRank { settings: *s, rank: rank_of(sv), singular_values: sv.clone() }).collect();
    let mut found: Vec<([WitnessSetting; 6], Vec<f64>)> = all.into_iter().filter(|(_, sv)| rank_of(sv) == 15).collect();
    found.sort_by(|a, b| a.0.cmp(&b.0));

    let mut keys: Vec<(Vec<i64>, Vec<f64>, usize)> = Vec::new();
    let mut labels = Vec::with_capacity(found.len());
    for (_, sv) in &found {
        let key = class_key(sv);
        let idx = match keys.iter().position(|(k, _, _)| *k == key) {
            Some(i) => i,
            None => {
                keys.push((key, sv.clone(), 0));
                keys.len() - 1
            }
        };
        keys[idx].2 += 1;
        labels.push(idx);
    }
    // Relabel classes by increasing size, ties broken by the leading singular value.
    let mut order: Vec<usize> = (0..keys.len()).collect();
    order.sort_by(|&a, &b| keys[a].2.cmp(&keys[b].2).then(keys[b].1[0].total_cmp(&keys[a].1[0])));
    let mut relabel = vec![0; keys.len()];
    for (new, &old) in order.iter().enumerate() {
        relabel[old] = new;
    }
    let classes = order.iter().map(|&i| IcClass { singular_values: keys[i].1.clone(), members: keys[i].2 }).collect();
    let ic_sets = found
        .into_iter()
        .zip(labels)
        .map(|((settings, singular_values), l)| IcSet { settings, rank: 15, singular_values, class: relabel[l] })
        .collect();
    (IcCensus { candidates, ic_sets, classes }, ranks)
}
