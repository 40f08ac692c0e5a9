//! Polytopes shipped with the tool, all in reflexive position.

use toricak_core::DelzantPolytope;

use crate::format::parse_polytope;
use crate::CliError;

const ENTRIES: &[(&str, &str)] = &[
    ("interval", include_str!("../catalog/interval.json")),
    ("CP2", include_str!("../catalog/CP2.json")),
    ("CP3", include_str!("../catalog/CP3.json")),
    ("cube", include_str!("../catalog/cube.json")),
    ("CP1xCP1", include_str!("../catalog/CP1xCP1.json")),
    ("Bl1CP2", include_str!("../catalog/Bl1CP2.json")),
    ("Bl2CP2", include_str!("../catalog/Bl2CP2.json")),
    ("Bl3CP2", include_str!("../catalog/Bl3CP2.json")),
];

/// The five smooth reflexive polygons.
pub const SMOOTH_REFLEXIVE_POLYGONS: [&str; 5] = ["CP2", "CP1xCP1", "Bl1CP2", "Bl2CP2", "Bl3CP2"];

pub fn names() -> impl Iterator<Item = &'static str> {
    ENTRIES.iter().map(|(n, _)| *n)
}

/// Loads a catalog entry and checks that it is Delzant and reflexive.
pub fn load(name: &str) -> Result<DelzantPolytope, CliError> {
    let key = if name == "CP1" { "interval" } else { name };
    let (_, text) = ENTRIES
        .iter()
        .find(|(n, _)| *n == key)
        .ok_or_else(|| CliError::Input(format!("unknown polytope `{name}`; see `toricak catalog`")))?;
    let p = parse_polytope(text)?;
    if !p.is_delzant().is_delzant || !p.is_reflexive() {
        return Err(CliError::Input(format!("catalog entry `{key}` failed validation")));
    }
    Ok(p)
}

pub fn all() -> Vec<DelzantPolytope> {
    names().map(|n| load(n).expect("catalog entries are valid")).collect()
}
