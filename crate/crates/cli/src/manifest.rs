use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

/// What produced an output file. A digest of it is embedded in the CSV; the
/// full record goes to the `--manifest` sidecar.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: &'static str,
    pub rng_seed: Option<u64>,
    pub config: serde_json::Value,
    pub config_sha256: String,
    /// Unix seconds. `SOURCE_DATE_EPOCH` pins both when set.
    pub started_at: u64,
    pub finished_at: u64,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn now() -> u64 {
    if let Some(epoch) = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.trim().parse().ok())
    {
        return epoch;
    }
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

impl RunManifest {
    pub fn new(command: &str, rng_seed: Option<u64>, config: serde_json::Value) -> Self {
        let canonical = serde_json::to_vec(&config).expect("json value serializes");
        RunManifest {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION"),
            rng_seed,
            config_sha256: sha256_hex(&canonical),
            config,
            started_at: now(),
            finished_at: 0,
        }
    }

    /// Comment lines embedded at the top of the CSV. Timestamps are left
    /// out so reruns stay byte-identical.
    pub fn comment_lines(&self) -> Vec<String> {
        let mut lines = vec![
            format!("gpremium {}", self.version),
            format!("command: {}", self.command),
        ];
        if let Some(seed) = self.rng_seed {
            lines.push(format!("seed: {seed}"));
        }
        lines.push(format!("config-sha256: {}", self.config_sha256));
        lines
    }
}
