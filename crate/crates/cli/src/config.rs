//! Validated run configuration shared by every subcommand: domain
//! parameters, the slice lattice, the headline tolerance, and output
//! routing. Validation happens before any computation and failures name the
//! violated invariant; the caller maps them to the usage exit status.
//!
//! The lattice is `rows x cols` points `(y, z)` evenly spaced over
//! `[0.05, 0.95]^2`, so the default `10x10` is exactly the comparison grid
//! `{0.05 + 0.1 k}^2` used throughout the library tests. Cells whose
//! boundary parameter `delta = y^2 / (1 - z^2)^lambda` exceeds `delta_cap`
//! are skipped, never fatal; the cap itself may not pass `0.999`, the
//! conditioning limit for kernel evaluation.

use std::path::PathBuf;

use serde::Serialize;
use thiserror::Error;

#[derive(Error, Debug)]
pub enum ConfigError {
    #[error("p must be positive and finite, got {0}")]
    BadP(f64),
    #[error("lambda must be positive and finite, got {0}")]
    BadLambda(f64),
    #[error("grid must be ROWSxCOLS, for example 10x10, got `{0}`")]
    BadGridSyntax(String),
    #[error("grid counts must both be at least 2, got {0}x{1}")]
    BadGridCounts(usize, usize),
    #[error("delta cap must lie in (0, 0.999], got {0}")]
    BadDeltaCap(f64),
    #[error("tolerance must be positive and finite, got {0}")]
    BadTolerance(f64),
    #[error("every inequality exponent must be at least 2, got {0}")]
    BadPList(f64),
    #[error("inequality exponent list must not be empty")]
    EmptyPList,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Everything a subcommand needs to run, already validated.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub p: f64,
    pub lambda: f64,
    pub rows: usize,
    pub cols: usize,
    pub delta_cap: f64,
    pub tol: f64,
    pub format: OutputFormat,
    pub out: Option<PathBuf>,
    pub seed: u64,
}

impl RunConfig {
    /// Validate raw flag values. `delta_cap` and `tol` fall back to the
    /// subcommand's defaults when the flags are absent.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        p: f64,
        lambda: f64,
        grid: &str,
        delta_cap: Option<f64>,
        default_delta_cap: f64,
        tol: Option<f64>,
        default_tol: f64,
        format: OutputFormat,
        out: Option<PathBuf>,
        seed: u64,
    ) -> Result<Self, ConfigError> {
        if !(p > 0.0 && p.is_finite()) {
            return Err(ConfigError::BadP(p));
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(ConfigError::BadLambda(lambda));
        }
        let (rows, cols) = parse_grid(grid)?;
        let delta_cap = delta_cap.unwrap_or(default_delta_cap);
        if !(delta_cap > 0.0 && delta_cap <= 1.0 - 1e-3) {
            return Err(ConfigError::BadDeltaCap(delta_cap));
        }
        let tol = tol.unwrap_or(default_tol);
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(ConfigError::BadTolerance(tol));
        }
        Ok(RunConfig { p, lambda, rows, cols, delta_cap, tol, format, out, seed })
    }

    pub fn y_values(&self) -> Vec<f64> {
        linspace(0.05, 0.95, self.rows)
    }

    pub fn z_values(&self) -> Vec<f64> {
        linspace(0.05, 0.95, self.cols)
    }

    /// Row-major `(y, z)` cells, the deterministic output order.
    pub fn cells(&self) -> Vec<(f64, f64)> {
        let zs = self.z_values();
        self.y_values()
            .iter()
            .flat_map(|&y| zs.iter().map(move |&z| (y, z)))
            .collect()
    }

    /// The configuration echo embedded in JSON output (and logged for CSV).
    pub fn echo(&self, command: &str, ke: Option<bool>, p_list: Option<&[f64]>) -> serde_json::Value {
        #[derive(Serialize)]
        struct Echo<'a> {
            command: &'a str,
            p: f64,
            lambda: f64,
            grid: String,
            delta_cap: f64,
            tol: f64,
            format: OutputFormat,
            seed: u64,
            #[serde(skip_serializing_if = "Option::is_none")]
            ke: Option<bool>,
            #[serde(skip_serializing_if = "Option::is_none")]
            p_list: Option<Vec<f64>>,
        }
        serde_json::to_value(Echo {
            command,
            p: self.p,
            lambda: self.lambda,
            grid: format!("{}x{}", self.rows, self.cols),
            delta_cap: self.delta_cap,
            tol: self.tol,
            format: self.format,
            seed: self.seed,
            ke,
            p_list: p_list.map(<[f64]>::to_vec),
        })
        .expect("configuration echo serializes")
    }
}

pub fn validate_p_list(p_list: &[f64]) -> Result<(), ConfigError> {
    if p_list.is_empty() {
        return Err(ConfigError::EmptyPList);
    }
    for &p in p_list {
        if !(p >= 2.0 && p.is_finite()) {
            return Err(ConfigError::BadPList(p));
        }
    }
    Ok(())
}

fn parse_grid(grid: &str) -> Result<(usize, usize), ConfigError> {
    let mut parts = grid.split('x');
    let syntax = || ConfigError::BadGridSyntax(grid.to_string());
    let rows: usize = parts.next().ok_or_else(syntax)?.parse().map_err(|_| syntax())?;
    let cols: usize = parts.next().ok_or_else(syntax)?.parse().map_err(|_| syntax())?;
    if parts.next().is_some() {
        return Err(syntax());
    }
    if rows < 2 || cols < 2 {
        return Err(ConfigError::BadGridCounts(rows, cols));
    }
    Ok((rows, cols))
}

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| a + (b - a) * k as f64 / (n - 1) as f64)
        .collect()
}
