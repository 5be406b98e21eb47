use std::io::Read;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

/// What every command prints on stdout.
#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    /// `sha256:<hex>` over the input files, in argument order.
    pub input_digest: Option<String>,
    pub seed: Option<u64>,
    pub profile: Option<String>,
    pub passes: u64,
    pub peak_words: u64,
    /// Seconds; only present with `--timing` so reports stay reproducible.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time: Option<f64>,
    pub certified: Option<bool>,
    pub result: serde_json::Value,
}

pub fn digest_files(paths: &[&Path]) -> std::io::Result<String> {
    let mut h = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    for p in paths {
        let mut f = std::fs::File::open(p)
            .map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", p.display())))?;
        loop {
            let k = f.read(&mut buf)?;
            if k == 0 {
                break;
            }
            h.update(&buf[..k]);
        }
    }
    let out = h.finalize();
    let hex: String = out.iter().map(|b| format!("{b:02x}")).collect();
    Ok(format!("sha256:{hex}"))
}
