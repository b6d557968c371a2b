//! Experiment configuration: TOML file plus command-line overrides.

use ddcore::lti::{self, StateSpace};
use ddcore::matpoly::Matrix;
use serde::Deserialize;

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// One of "msd", "pendulum", "submarine", or "custom".
    pub plant: Option<String>,
    /// Sampling period for discretizing the named continuous plants.
    pub ts: Option<f64>,
    /// Number of samples in the identification record.
    pub data_len: Option<usize>,
    /// Past-window length.
    pub n: Option<usize>,
    /// Window sweep "A:B" for sweep commands.
    pub n_sweep: Option<String>,
    /// Estimation delay for inversion commands.
    pub l: Option<usize>,
    pub noise_sigma: Option<f64>,
    pub noise_seed: Option<u64>,
    pub data_seed: Option<u64>,
    /// Excitation amplitude for the seeded uniform input.
    pub amplitude: Option<f64>,
    pub q: Option<f64>,
    pub r: Option<f64>,
    /// "pinv" (default) or "ginverse".
    pub method: Option<String>,
    /// Number of independently seeded records averaged per fit.
    pub averaging: Option<usize>,
    /// Truncation tolerance; absent means the per-matrix default.
    pub tol: Option<f64>,
    /// Steps for simulation commands.
    pub steps: Option<usize>,
    /// State-space literal used when plant = "custom" (discrete time).
    pub custom: Option<CustomPlant>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomPlant {
    pub states: usize,
    pub inputs: usize,
    pub outputs: usize,
    /// Row-major entries.
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub d: Option<Vec<f64>>,
}

impl ExperimentConfig {
    pub fn load(path: &std::path::Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("config '{}': {e}", path.display()))?;
        toml::from_str(&text).map_err(|e| format!("config '{}': {e}", path.display()))
    }

    pub fn plant(&self) -> Result<StateSpace, String> {
        let name = self.plant.as_deref().unwrap_or("msd");
        let ts = self.ts.unwrap_or(lti::BENCH_TS);
        let cont = match name {
            "msd" => lti::msd().0,
            "pendulum" => lti::inverted_pendulum().0,
            "submarine" => lti::submarine().0,
            "custom" => {
                let c = self
                    .custom
                    .as_ref()
                    .ok_or("plant = \"custom\" requires a [custom] table")?;
                let (n, m, p) = (c.states, c.inputs, c.outputs);
                if c.a.len() != n * n || c.b.len() != n * m || c.c.len() != p * n {
                    return Err("custom plant entry counts do not match dimensions".into());
                }
                let d = match &c.d {
                    Some(d) if d.len() == p * m => Matrix::from_row_slice(p, m, d),
                    Some(_) => return Err("custom plant d has wrong entry count".into()),
                    None => Matrix::zeros(p, m),
                };
                // the literal is already discrete; return as is
                return StateSpace::new(
                    Matrix::from_row_slice(n, n, &c.a),
                    Matrix::from_row_slice(n, m, &c.b),
                    Matrix::from_row_slice(p, n, &c.c),
                    d,
                )
                .map_err(|e| e.to_string());
            }
            other => return Err(format!("unknown plant '{other}'")),
        };
        lti::zoh_plant(&cont, ts).map_err(|e| e.to_string())
    }

    pub fn merge_cli(
        &mut self,
        n: Option<&str>,
        l: Option<usize>,
        tol: Option<&str>,
        seed: Option<u64>,
    ) -> Result<(), String> {
        if let Some(nstr) = n {
            if nstr.contains(':') {
                self.n_sweep = Some(nstr.to_string());
            } else {
                self.n = Some(nstr.parse().map_err(|e| format!("--N: {e}"))?);
            }
        }
        if let Some(l) = l {
            self.l = Some(l);
        }
        if let Some(t) = tol {
            if t != "auto" {
                self.tol = Some(t.parse().map_err(|e| format!("--tol: {e}"))?);
            }
        }
        if let Some(s) = seed {
            self.data_seed = Some(s);
        }
        Ok(())
    }

    pub fn sweep_range(&self) -> Result<(usize, usize), String> {
        let s = self
            .n_sweep
            .as_deref()
            .ok_or("a window sweep 'A:B' is required (--N A:B)")?;
        let (a, b) = s.split_once(':').ok_or("sweep must look like A:B")?;
        let a: usize = a.parse().map_err(|e| format!("sweep start: {e}"))?;
        let b: usize = b.parse().map_err(|e| format!("sweep end: {e}"))?;
        if a == 0 || b < a {
            return Err("sweep must satisfy 1 <= A <= B".into());
        }
        Ok((a, b))
    }
}

/// FNV-1a hash of the resolved run parameters, recorded in the manifest.
pub fn fnv1a(text: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in text.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x1000_0000_01b3);
    }
    h
}
