//! Flat run-configuration format: `key = value` lines grouped under
//! `[section]` headers, `#` comments. Chosen over nested formats so golden
//! files diff line-by-line.
//!
//! Schema (all keys optional unless a subcommand requires them):
//!
//! ```text
//! [simulate]
//! gamma = 2.0          # adiabatic exponent (> 1)
//! kappa = 1.0          # pressure constant (> 0)
//! rho_max = 4.0        # working density bound
//! x_min = -4.0
//! x_max = 4.0
//! n_cells = 512
//! t_end = 0.5
//! n_frames = 9
//! cfl = 0.45
//! flux = rusanov       # rusanov | hll
//! limiter = none       # none | minmod
//! ic = riemann         # riemann | bump
//! rho_l = 1.0          # riemann initial states
//! u_l = -1.0
//! rho_r = 1.0
//! u_r = 1.0
//! bump_base = 1.0      # bump initial data: rho = base + amp*(1-(x/w)^2)_+^2
//! bump_amp = 0.5
//! bump_width = 1.0
//! u_slope = 0.0        # u = u_slope * x
//!
//! [commutator]
//! alpha1 = 0.8
//! alpha2 = 0.8
//! q = 4.0
//! n_cells = 4096
//! eps = 0.0625,0.03125,0.015625,0.0078125,0.00390625
//! nonlinearity = product   # product | pressure | affine
//! gamma = 2.0              # pressure nonlinearity parameters
//! kappa = 1.0
//!
//! [example4]
//! radius = 1.0
//! n_profile = 2
//! theta = 0.25
//! s_reg = 2.5
//! t_end = 1.0
//! n_cells = 1024
//! n_frames = 33
//! r_max = 2.5
//! gamma = 3.0
//! kappa = 1.0
//! delta_seq = 0.04,0.02,0.01
//! eps_seq = 0.2,0.1,0.05,0.025
//! kernel_m = 2.0
//! ```

use std::collections::BTreeMap;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default)]
pub struct Config {
    sections: BTreeMap<String, BTreeMap<String, String>>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Config> {
        let mut sections: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
        let mut current = String::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if line.starts_with('[') {
                if !line.ends_with(']') || line.len() < 3 {
                    return Err(Error::Config(format!(
                        "line {}: malformed section header {line}",
                        lineno + 1
                    )));
                }
                current = line[1..line.len() - 1].trim().to_string();
                sections.entry(current.clone()).or_default();
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key = value, got {line}", lineno + 1))
            })?;
            if current.is_empty() {
                return Err(Error::Config(format!(
                    "line {}: key outside any [section]",
                    lineno + 1
                )));
            }
            sections
                .get_mut(&current)
                .expect("section exists")
                .insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(Config { sections })
    }

    pub fn load(path: &std::path::Path) -> Result<Config> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn has_section(&self, section: &str) -> bool {
        self.sections.contains_key(section)
    }

    fn raw(&self, section: &str, key: &str) -> Result<&str> {
        self.sections
            .get(section)
            .and_then(|s| s.get(key))
            .map(|s| s.as_str())
            .ok_or_else(|| Error::Config(format!("missing field [{section}] {key}")))
    }

    pub fn get_str(&self, section: &str, key: &str) -> Result<String> {
        Ok(self.raw(section, key)?.to_string())
    }

    pub fn get_str_or(&self, section: &str, key: &str, default: &str) -> String {
        self.raw(section, key)
            .map(|s| s.to_string())
            .unwrap_or_else(|_| default.to_string())
    }

    pub fn get_f64(&self, section: &str, key: &str) -> Result<f64> {
        let raw = self.raw(section, key)?;
        raw.parse()
            .map_err(|_| Error::Config(format!("field [{section}] {key}: not a number: {raw}")))
    }

    pub fn get_f64_or(&self, section: &str, key: &str, default: f64) -> Result<f64> {
        match self.raw(section, key) {
            Ok(raw) => raw.parse().map_err(|_| {
                Error::Config(format!("field [{section}] {key}: not a number: {raw}"))
            }),
            Err(_) => Ok(default),
        }
    }

    pub fn get_usize(&self, section: &str, key: &str) -> Result<usize> {
        let raw = self.raw(section, key)?;
        raw.parse()
            .map_err(|_| Error::Config(format!("field [{section}] {key}: not an integer: {raw}")))
    }

    pub fn get_usize_or(&self, section: &str, key: &str, default: usize) -> Result<usize> {
        match self.raw(section, key) {
            Ok(raw) => raw.parse().map_err(|_| {
                Error::Config(format!("field [{section}] {key}: not an integer: {raw}"))
            }),
            Err(_) => Ok(default),
        }
    }

    /// Comma-separated float list.
    pub fn get_list_f64(&self, section: &str, key: &str) -> Result<Vec<f64>> {
        let raw = self.raw(section, key)?;
        raw.split(',')
            .map(|s| {
                s.trim().parse().map_err(|_| {
                    Error::Config(format!("field [{section}] {key}: bad list entry: {s}"))
                })
            })
            .collect()
    }
}
