//! Static catalog of elementary quantum Borel kinematics.
//!
//! The topological data (π₁(M), H₁(M,Z), H²(M,Z) and the resulting
//! topological quantum numbers) are shipped as an embedded JSON resource. The
//! Chern class and the character of π₁ live only here; no operator in the
//! crate depends on them.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The embedded resource, byte for byte.
pub const CATALOG_JSON: &str = include_str!("catalog.json");

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuantumNumber {
    pub symbol: String,
    pub domain: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub system: String,
    /// Configuration space M.
    pub configuration_space: String,
    /// Fundamental group π₁(M).
    pub pi1: String,
    /// First homology H₁(M,Z).
    pub h1: String,
    /// Second cohomology H²(M,Z).
    pub h2: String,
    pub quantum_numbers: Vec<QuantumNumber>,
}

static CATALOG: OnceLock<Vec<CatalogEntry>> = OnceLock::new();

pub fn catalog_list() -> &'static [CatalogEntry] {
    CATALOG.get_or_init(|| serde_json::from_str(CATALOG_JSON).expect("embedded catalog is valid JSON"))
}

fn normalize(name: &str) -> String {
    name.chars()
        .map(|c| match c {
            '–' | '—' | '‐' => '-',
            '’' => '\'',
            c => c,
        })
        .collect::<String>()
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

/// Look an entry up by system name. Matching ignores case, repeated
/// whitespace and the dash/apostrophe variant used.
pub fn catalog_lookup(name: &str) -> Result<&'static CatalogEntry> {
    let key = normalize(name);
    catalog_list()
        .iter()
        .find(|e| normalize(&e.system) == key)
        .ok_or_else(|| Error::UnknownCatalogEntry {
            name: name.to_string(),
            valid: catalog_list().iter().map(|e| e.system.clone()).collect(),
        })
}

/// Entry names closest to `name`, best first.
pub fn suggestions(name: &str, max: usize) -> Vec<&'static str> {
    let key = normalize(name);
    let mut scored: Vec<(f64, &'static str)> = catalog_list()
        .iter()
        .map(|e| (strsim::jaro_winkler(&key, &normalize(&e.system)), e.system.as_str()))
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0));
    scored.into_iter().take(max).map(|(_, s)| s).collect()
}

impl CatalogEntry {
    pub fn quantum_numbers_text(&self) -> String {
        if self.quantum_numbers.is_empty() {
            return "none".into();
        }
        self.quantum_numbers
            .iter()
            .map(|q| format!("{} ∈ {}", q.symbol, q.domain))
            .collect::<Vec<_>>()
            .join(", ")
    }
}
