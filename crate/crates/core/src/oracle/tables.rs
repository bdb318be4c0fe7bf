//! Affinity, synonym, and co-occurrence tables that parameterize the mock
//! oracle. Loadable from JSON (see docs/formats.md); the built-in default
//! covers the fixture scenes.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::OracleError;

pub const TABLES_FORMAT: &str = "oracle-tables";
pub const TABLES_VERSION: u32 = 1;

/// Symmetric label-to-term affinity.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AffinityEntry {
    pub a: String,
    pub b: String,
    pub score: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleTables {
    pub format: String,
    pub version: u32,
    /// Labels the mock parser recognizes in instructions.
    pub vocabulary: BTreeSet<String>,
    #[serde(default)]
    pub affinity: Vec<AffinityEntry>,
    /// label -> labels commonly found nearby.
    #[serde(default)]
    pub cooccurrence: BTreeMap<String, BTreeSet<String>>,
}

impl Default for OracleTables {
    fn default() -> Self {
        let vocabulary: BTreeSet<String> = [
            "bed",
            "nightstand",
            "pillow",
            "wardrobe",
            "chair",
            "table",
            "sofa",
            "tv",
            "plant",
            "sink",
            "toilet",
            "towel",
            "fridge",
            "oven",
            "cup",
            "fire extinguisher",
            "door sign",
        ]
        .into_iter()
        .map(String::from)
        .collect();

        let affinity = vec![
            entry("chair", "table", 0.6),
            entry("nightstand", "bed", 0.75),
            entry("pillow", "bed", 0.7),
            entry("wardrobe", "bed", 0.6),
            entry("sofa", "tv", 0.7),
            entry("towel", "sink", 0.6),
            entry("towel", "toilet", 0.5),
            entry("oven", "fridge", 0.7),
            entry("cup", "table", 0.5),
            entry("cup", "sink", 0.4),
        ];

        let mut cooccurrence: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        let mut co = |k: &str, vs: &[&str]| {
            cooccurrence.insert(k.into(), vs.iter().map(|s| s.to_string()).collect());
        };
        co("bed", &["nightstand", "pillow"]);
        co("table", &["chair"]);
        co("tv", &["sofa"]);
        co("toilet", &["sink", "towel"]);
        co("fridge", &["oven"]);

        OracleTables {
            format: TABLES_FORMAT.to_string(),
            version: TABLES_VERSION,
            vocabulary,
            affinity,
            cooccurrence,
        }
    }
}

fn entry(a: &str, b: &str, score: f64) -> AffinityEntry {
    AffinityEntry {
        a: a.into(),
        b: b.into(),
        score,
    }
}

impl OracleTables {
    pub fn load(path: &Path) -> Result<OracleTables, OracleError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| OracleError::Retryable(format!("tables io: {e}")))?;
        let tables: OracleTables = serde_json::from_str(&text)
            .map_err(|e| OracleError::Retryable(format!("tables parse: {e}")))?;
        tables.validate()?;
        Ok(tables)
    }

    pub fn validate(&self) -> Result<(), OracleError> {
        if self.format != TABLES_FORMAT || self.version != TABLES_VERSION {
            return Err(OracleError::Retryable(format!(
                "unsupported tables header {}/{}",
                self.format, self.version
            )));
        }
        for e in &self.affinity {
            if !(0.0..=1.0).contains(&e.score) {
                return Err(OracleError::Retryable(format!(
                    "affinity({}, {}) = {} out of [0, 1]",
                    e.a, e.b, e.score
                )));
            }
        }
        Ok(())
    }

    /// Symmetric affinity lookup; 0 when absent.
    pub fn affinity(&self, a: &str, b: &str) -> f64 {
        self.affinity
            .iter()
            .filter(|e| (e.a == a && e.b == b) || (e.a == b && e.b == a))
            .map(|e| e.score)
            .fold(0.0, f64::max)
    }

    pub fn related_to(&self, label: &str) -> BTreeSet<String> {
        self.cooccurrence.get(label).cloned().unwrap_or_default()
    }
}
