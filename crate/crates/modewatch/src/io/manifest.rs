//! Run manifest: provenance record written next to benchmark outputs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Provenance of one benchmark run. The recorded digest must match a
/// recomputation over the stored config copy.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_digest: String,
    pub tool_version: String,
    pub schema_version: u32,
    pub master_seed: u64,
    /// Unix seconds. Honors `SOURCE_DATE_EPOCH` so reruns can be
    /// byte-identical; falls back to the wall clock.
    pub created_unix: u64,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(
        config_digest: String,
        master_seed: u64,
        schema_version: u32,
        outputs: Vec<String>,
    ) -> Self {
        Self {
            config_digest,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            schema_version,
            master_seed,
            created_unix: current_timestamp(),
            outputs,
        }
    }

    /// Checks the recorded digest against the stored config bytes.
    pub fn verify_digest(&self, config_bytes: &[u8]) -> Result<()> {
        let recomputed = super::sha256_hex(config_bytes);
        if recomputed != self.config_digest {
            return Err(Error::Internal(format!(
                "config digest mismatch: manifest has {}, stored config hashes to {recomputed}",
                self.config_digest
            )));
        }
        Ok(())
    }
}

/// `SOURCE_DATE_EPOCH` when set (reproducible-output convention), else the
/// current wall clock.
pub fn current_timestamp() -> u64 {
    if let Ok(epoch) = std::env::var("SOURCE_DATE_EPOCH") {
        if let Ok(seconds) = epoch.trim().parse::<u64>() {
            return seconds;
        }
    }
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}
