pub mod compact;
pub mod dump_graph;
pub mod heatmap;
pub mod run;
pub mod solve;

use std::path::Path;
use std::sync::Arc;
use std::time::Duration;

use semnav_core::oracle::{MockOracle, OracleTables, RemoteOracle, SemanticOracle};

use crate::CliError;

/// Build the oracle backend selected on the command line.
pub fn make_oracle(
    kind: &str,
    tables: Option<&Path>,
    visibility_threshold: f64,
) -> Result<Arc<dyn SemanticOracle>, CliError> {
    match kind {
        "mock" => {
            let tables = match tables {
                Some(p) => OracleTables::load(p)
                    .map_err(|e| CliError::Usage(format!("tables {}: {e}", p.display())))?,
                None => OracleTables::default(),
            };
            Ok(Arc::new(MockOracle::new(tables, visibility_threshold)))
        }
        "remote" => {
            let url = std::env::var(semnav_core::oracle::ENV_URL)
                .map_err(|_| CliError::Usage(format!("{} not set", semnav_core::oracle::ENV_URL)))?;
            let timeout_ms: u64 = std::env::var(semnav_core::oracle::ENV_TIMEOUT_MS)
                .ok()
                .and_then(|v| v.parse().ok())
                .unwrap_or(10_000);
            Ok(Arc::new(RemoteOracle::new(
                &url,
                Duration::from_millis(timeout_ms),
            )))
        }
        other => Err(CliError::Usage(format!(
            "unknown oracle {other:?}; expected mock or remote"
        ))),
    }
}
