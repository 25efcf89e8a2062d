//! File-backed calibration cache keyed by the full parameter tuple.

use std::collections::BTreeMap;
use std::path::Path;

use sinrsched_core::{calibrate_gamma, Error, Result};

fn key(alpha: f64, m: usize, delta: f64, tau: f64, beta: f64) -> String {
    format!("alpha={alpha},m={m},delta={delta},tau={tau},beta={beta}")
}

fn load(path: &Path) -> Result<BTreeMap<String, f64>> {
    if !path.exists() {
        return Ok(BTreeMap::new());
    }
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("calibration cache: {e}")))
}

/// Returns the cached gamma for the tuple, calibrating and persisting it on a
/// miss (or always, with `recalibrate`).
#[allow(clippy::too_many_arguments)]
pub fn cached_gamma(
    path: &Path,
    alpha: f64,
    m: usize,
    delta: f64,
    tau: f64,
    beta: f64,
    trials: u64,
    seed: u64,
    recalibrate: bool,
) -> Result<f64> {
    let mut entries = load(path)?;
    let k = key(alpha, m, delta, tau, beta);
    if !recalibrate {
        if let Some(&g) = entries.get(&k) {
            return Ok(g);
        }
    }
    let g = calibrate_gamma(alpha, m, delta, tau, beta, trials, seed)?;
    entries.insert(k, g);
    std::fs::write(path, serde_json::to_string_pretty(&entries).expect("cache serialization"))?;
    Ok(g)
}
