//! Flat `key = value` run configuration.
//!
//! One text file drives a whole run: problem parameters, iteration
//! controls, diagnostic windows and the sweep table. Each line holds one
//! `key = value` pair, `#` starts a comment, blank lines are skipped.
//! Parsing starts from the defaults, so a config file only needs the keys
//! it changes. Unknown and duplicate keys are rejected by name so typos
//! surface instead of silently running the defaults.
//!
//! The sweep table uses two keys: `sweep` lists the parameter names being
//! varied (comma separated) and `pairs` lists one value tuple per run,
//! tuples separated by commas and values inside a tuple by colons, so
//! `sweep = mu,alpha` with `pairs = 0:0.5,0:1,1:2` describes three runs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::ProblemSpec;
use crate::solver::SolveConfig;

/// Every key `parse` accepts, in the order `to_text` writes them.
pub const KEYS: [&str; 29] = [
    "lambda",
    "Lambda",
    "dim",
    "B",
    "b",
    "d",
    "c0",
    "mu",
    "alpha",
    "M",
    "C1",
    "C2",
    "rho",
    "R",
    "L",
    "delta0",
    "delta_steps",
    "inner_tol",
    "max_inner",
    "policy_tol",
    "window_lo",
    "window_hi",
    "scales",
    "nu",
    "p",
    "output_dir",
    "nodes",
    "sweep",
    "pairs",
];

/// Full description of one run: problem, iteration controls, diagnostic
/// windows, output location and the sweep table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub spec: ProblemSpec,
    pub solve: SolveConfig,
    /// Distance window for the boundary-rate fits, measured from the inner
    /// edge.
    pub window_lo: f64,
    pub window_hi: f64,
    /// Number of dyadic scales the Harnack diagnostic visits.
    pub scales: usize,
    /// Oscillation cushion exponent.
    pub nu: f64,
    /// Averaging power of the Harnack numerator.
    pub p: f64,
    pub output_dir: String,
    /// Grid size for the solve.
    pub nodes: usize,
    /// Parameter names varied by the sweep table.
    pub sweep: Vec<String>,
    /// One value tuple per sweep run, each as long as `sweep`.
    pub pairs: Vec<Vec<f64>>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            spec: ProblemSpec::default(),
            solve: SolveConfig::default(),
            window_lo: 1e-5,
            window_hi: 1e-2,
            scales: 6,
            nu: 0.5,
            p: 2.0,
            output_dir: "out".to_string(),
            nodes: 2049,
            sweep: vec!["mu".to_string(), "alpha".to_string()],
            pairs: Vec::new(),
        }
    }
}

fn parse_f64(key: &str, value: &str) -> Result<f64> {
    value
        .trim()
        .parse::<f64>()
        .map_err(|_| Error::Parse(format!("key {key}: `{value}` is not a number")))
}

fn parse_usize(key: &str, value: &str) -> Result<usize> {
    value
        .trim()
        .parse::<usize>()
        .map_err(|_| Error::Parse(format!("key {key}: `{value}` is not a nonnegative integer")))
}

impl RunConfig {
    /// Set one key from its text value. The key names match [`KEYS`].
    pub fn set_key(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "lambda" => self.spec.ell.lambda = parse_f64(key, value)?,
            "Lambda" => self.spec.ell.Lambda = parse_f64(key, value)?,
            "dim" => self.spec.dim = parse_usize(key, value)?,
            "B" => self.spec.growth.B = parse_f64(key, value)?,
            "b" => self.spec.growth.b = parse_f64(key, value)?,
            "d" => self.spec.growth.d = parse_f64(key, value)?,
            "c0" => self.spec.growth.c0 = parse_f64(key, value)?,
            "mu" => self.spec.forcing.mu = parse_f64(key, value)?,
            "alpha" => self.spec.forcing.alpha = parse_f64(key, value)?,
            "M" => self.spec.forcing.M = parse_f64(key, value)?,
            "C1" => self.spec.forcing.C1 = parse_f64(key, value)?,
            "C2" => self.spec.forcing.C2 = parse_f64(key, value)?,
            "rho" => self.spec.geometry.rho = parse_f64(key, value)?,
            "R" => self.spec.geometry.R = parse_f64(key, value)?,
            "L" => self.spec.geometry.L = parse_f64(key, value)?,
            "delta0" => self.solve.delta0 = parse_f64(key, value)?,
            "delta_steps" => self.solve.delta_steps = parse_usize(key, value)?,
            "inner_tol" => self.solve.inner_tol = parse_f64(key, value)?,
            "max_inner" => self.solve.max_inner = parse_usize(key, value)?,
            "policy_tol" => self.solve.policy_tol = parse_f64(key, value)?,
            "window_lo" => self.window_lo = parse_f64(key, value)?,
            "window_hi" => self.window_hi = parse_f64(key, value)?,
            "scales" => self.scales = parse_usize(key, value)?,
            "nu" => self.nu = parse_f64(key, value)?,
            "p" => self.p = parse_f64(key, value)?,
            "output_dir" => self.output_dir = value.trim().to_string(),
            "nodes" => self.nodes = parse_usize(key, value)?,
            "sweep" => {
                self.sweep = value
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(str::to_string)
                    .collect();
            }
            "pairs" => {
                let mut pairs = Vec::new();
                for entry in value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                    let tuple: Result<Vec<f64>> =
                        entry.split(':').map(|v| parse_f64(key, v)).collect();
                    pairs.push(tuple?);
                }
                self.pairs = pairs;
            }
            _ => {
                return Err(Error::Validation(format!("unknown config key `{key}`")));
            }
        }
        Ok(())
    }

    fn value_text(&self, key: &str) -> String {
        match key {
            "lambda" => self.spec.ell.lambda.to_string(),
            "Lambda" => self.spec.ell.Lambda.to_string(),
            "dim" => self.spec.dim.to_string(),
            "B" => self.spec.growth.B.to_string(),
            "b" => self.spec.growth.b.to_string(),
            "d" => self.spec.growth.d.to_string(),
            "c0" => self.spec.growth.c0.to_string(),
            "mu" => self.spec.forcing.mu.to_string(),
            "alpha" => self.spec.forcing.alpha.to_string(),
            "M" => self.spec.forcing.M.to_string(),
            "C1" => self.spec.forcing.C1.to_string(),
            "C2" => self.spec.forcing.C2.to_string(),
            "rho" => self.spec.geometry.rho.to_string(),
            "R" => self.spec.geometry.R.to_string(),
            "L" => self.spec.geometry.L.to_string(),
            "delta0" => self.solve.delta0.to_string(),
            "delta_steps" => self.solve.delta_steps.to_string(),
            "inner_tol" => self.solve.inner_tol.to_string(),
            "max_inner" => self.solve.max_inner.to_string(),
            "policy_tol" => self.solve.policy_tol.to_string(),
            "window_lo" => self.window_lo.to_string(),
            "window_hi" => self.window_hi.to_string(),
            "scales" => self.scales.to_string(),
            "nu" => self.nu.to_string(),
            "p" => self.p.to_string(),
            "output_dir" => self.output_dir.clone(),
            "nodes" => self.nodes.to_string(),
            "sweep" => self.sweep.join(","),
            "pairs" => self
                .pairs
                .iter()
                .map(|tuple| {
                    tuple
                        .iter()
                        .map(|v| v.to_string())
                        .collect::<Vec<_>>()
                        .join(":")
                })
                .collect::<Vec<_>>()
                .join(","),
            _ => unreachable!("value_text called with a key outside KEYS"),
        }
    }

    /// Render every key in canonical order. `parse` inverts this exactly.
    pub fn to_text(&self) -> String {
        let mut out = String::from("# run configuration (key = value)\n");
        for key in KEYS {
            out.push_str(key);
            out.push_str(" = ");
            out.push_str(&self.value_text(key));
            out.push('\n');
        }
        out
    }

    /// Parse config text on top of the defaults.
    pub fn parse(text: &str) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        let mut seen = Vec::new();
        for (line_no, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Parse(format!(
                    "line {}: expected `key = value`, got `{line}`",
                    line_no + 1
                )));
            };
            let key = key.trim();
            if seen.contains(&key.to_string()) {
                return Err(Error::Validation(format!("duplicate config key `{key}`")));
            }
            seen.push(key.to_string());
            cfg.set_key(key, value)?;
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        self.solve.validate()?;
        if !(self.window_lo > 0.0 && self.window_hi > self.window_lo && self.window_hi.is_finite())
        {
            return Err(Error::Validation(format!(
                "rate window must satisfy 0 < window_lo < window_hi (got ({}, {}))",
                self.window_lo, self.window_hi
            )));
        }
        if self.scales == 0 || self.scales > 16 {
            return Err(Error::Validation(format!(
                "scales must lie in 1..=16 (key scales, got {})",
                self.scales
            )));
        }
        if !(self.nu >= 0.0 && self.nu < 1.0) {
            return Err(Error::Validation(format!(
                "nu must lie in [0, 1) (key nu, got {})",
                self.nu
            )));
        }
        if !(self.p > 0.0 && self.p.is_finite()) {
            return Err(Error::Validation(format!(
                "p must be positive (key p, got {})",
                self.p
            )));
        }
        if self.nodes < 9 {
            return Err(Error::Validation(format!(
                "nodes must be at least 9 (key nodes, got {})",
                self.nodes
            )));
        }
        if self.output_dir.is_empty() {
            return Err(Error::Validation(
                "output_dir must not be empty".to_string(),
            ));
        }
        for name in &self.sweep {
            let known = KEYS.contains(&name.as_str());
            let structural = matches!(name.as_str(), "sweep" | "pairs" | "output_dir");
            if !known || structural {
                return Err(Error::Validation(format!(
                    "sweep names unknown or unsweepable key `{name}`"
                )));
            }
        }
        for (i, tuple) in self.pairs.iter().enumerate() {
            if tuple.len() != self.sweep.len() {
                return Err(Error::Validation(format!(
                    "pairs entry {} has {} values but sweep lists {} keys",
                    i + 1,
                    tuple.len(),
                    self.sweep.len()
                )));
            }
            if tuple.iter().any(|v| !v.is_finite()) {
                return Err(Error::Validation(format!(
                    "pairs entry {} holds a non finite value",
                    i + 1
                )));
            }
        }
        Ok(())
    }
}
