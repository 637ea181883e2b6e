//! Canonical worked scenarios, shipped as scenario files under
//! `crates/core/scenarios/`.

use crate::scm::{Assignment, CausalGraph, Scenario};

pub const HIKER: &str = include_str!("../scenarios/hiker.json");
pub const ROCKS: &str = include_str!("../scenarios/rocks.json");
pub const BILLIARDS: &str = include_str!("../scenarios/billiards.json");
pub const SUZY_FIRST: &str = include_str!("../scenarios/suzy_first.json");

fn load(text: &str) -> (CausalGraph, Assignment) {
    Scenario::load(text).expect("bundled scenario is valid")
}

/// Boulder `A`, duck `B := A`, survive `C := ¬A ∨ B`.
pub fn hiker() -> (CausalGraph, Assignment) {
    load(HIKER)
}

/// Two simultaneous throws, `B := A1 ∨ A2`.
pub fn rocks() -> (CausalGraph, Assignment) {
    load(ROCKS)
}

/// `B := A`, `C := B`.
pub fn billiards() -> (CausalGraph, Assignment) {
    load(BILLIARDS)
}

/// Suzy's rock lands first: `SH := A1`, `BH := A2 ∧ ¬SH`, `B := SH ∨ BH`.
pub fn suzy_first() -> (CausalGraph, Assignment) {
    load(SUZY_FIRST)
}

/// Look a bundled scenario up by file stem.
pub fn by_name(name: &str) -> Option<&'static str> {
    match name {
        "hiker" => Some(HIKER),
        "rocks" => Some(ROCKS),
        "billiards" => Some(BILLIARDS),
        "suzy_first" => Some(SUZY_FIRST),
        _ => None,
    }
}
