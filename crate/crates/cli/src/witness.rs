use std::collections::HashMap;

use entanglement::{census_with_ranks, ComplementList};
use serde::Deserialize;

use crate::io::{csv_bytes, emit, load_or_default, summary};
use crate::{CliError, Common};

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ScanRun {
    /// Operators V₁, V₂, V₃ as Weyl names, e.g. ["X", "Y", "Z"] with Y = iXZ.
    complement: ComplementList,
}

/// Census CSV, one row per six-setting candidate in lexicographic order:
/// index, s1..s6 as (u₁,u₂,a), rank, ic, class (empty unless IC), sv1..sv15.
/// Singular values are printed to 12 decimals so the file is byte-stable.
pub(crate) fn run(common: &Common) -> Result<(), CliError> {
    let cfg: ScanRun = load_or_default(common.config.as_deref())?;
    let (census, ranks) = census_with_ranks(&cfg.complement);
    let class_of: HashMap<_, _> = census.ic_sets.iter().map(|s| (s.settings, s.class)).collect();

    let mut head: Vec<String> = vec!["index".into()];
    head.extend((1..=6).map(|k| format!("s{k}")));
    head.extend(["rank", "ic", "class"].map(String::from));
    head.extend((1..=15).map(|k| format!("sv{k}")));
    let rows = ranks.iter().enumerate().map(|(i, c)| {
        let mut row = vec![i.to_string()];
        row.extend(c.settings.iter().map(|s| s.to_string()));
        row.push(c.rank.to_string());
        row.push((c.rank == 15).to_string());
        row.push(class_of.get(&c.settings).map_or(String::new(), |k| k.to_string()));
        row.extend(c.singular_values.iter().map(|v| format!("{v:.12}")));
        row
    });
    emit(common.out.as_deref(), &csv_bytes(&head, rows)?)?;
    let sizes: Vec<String> = census.classes.iter().map(|c| c.members.to_string()).collect();
    summary(&format!(
        "candidates={} ic_sets={} classes={} class_sizes={}",
        census.candidates,
        census.ic_sets.len(),
        census.classes.len(),
        sizes.join(",")
    ));
    Ok(())
}
