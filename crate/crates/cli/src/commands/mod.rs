//! The five batch operations behind the subcommands. Each one builds a
//! [`CommandResult`](crate::output::CommandResult): a table whose rows carry
//! the computed quantities plus the three provenance columns
//! (`formula_source`, `error_estimate`, `tolerance`), a `pass` flag per row,
//! and a summary object with the worst residual per check family.
//!
//! Cells that cannot be evaluated (past the `delta` cap, outside the
//! domain, or too close to the boundary) are flagged, never fatal: their
//! numeric fields render empty and they do not gate the exit status.
//! Evaluation may fan out over worker threads; assembly is single threaded
//! in grid order, so output bytes are independent of the worker count.

pub mod curvature;
pub mod disk;
pub mod hsc;
pub mod kernel;
pub mod metric;

use bergman_core::curvature::CurvatureError;
use bergman_core::diskbounds::DiskError;
use bergman_core::domain::{DomainError, NuPoint};
use bergman_core::frame::FrameError;
use rand::Rng;
use thiserror::Error;

use crate::config::ConfigError;

#[derive(Error, Debug)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("kernel evaluation failed: {0}")]
    Domain(#[from] DomainError),
    #[error("curvature evaluation failed: {0}")]
    Curvature(#[from] CurvatureError),
    #[error("frame computation failed: {0}")]
    Frame(#[from] FrameError),
    #[error("disk computation failed: {0}")]
    Disk(#[from] DiskError),
    #[error("writing output failed: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// Usage errors (invalid configuration) exit with 2, runtime failures
    /// with 1; check failures are not errors and are handled by the caller.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }
}

/// Boundary parameter of the lattice cell `(y, z)`; infinite once `z`
/// reaches the unit circle, so the cap comparison always skips such cells.
pub fn cell_delta(lambda: f64, y: f64, z: f64) -> f64 {
    let a = 1.0 - z * z;
    if a > 0.0 {
        y * y / a.powf(lambda)
    } else {
        f64::INFINITY
    }
}

/// Draw an interior `nu` point clear of the near-boundary guard bands:
/// `nu_3` stays below 0.9 and the fiber fractions below 0.99, which keeps
/// `b = (1 - nu_3)^lambda - nu_2` and the slack `c` above the evaluation
/// floors for every positive `(p, lambda)`.
pub fn sample_interior(rng: &mut impl Rng, p: f64, lambda: f64) -> NuPoint {
    let s3: f64 = rng.gen_range(0.0..0.9);
    let f: f64 = rng.gen_range(0.0..0.99);
    let g: f64 = rng.gen_range(0.0..0.99);
    let w = (1.0 - s3).powf(lambda);
    let nu2 = f * w;
    let nu1 = ((w - nu2) * g).powf(1.0 / p);
    NuPoint::new(nu1, nu2, s3).expect("construction keeps nu inside the domain")
}

/// The extrapolation ladder used by every boundary-limit summary:
/// `delta = 1 - eps` with `eps = 0.2 * 2^-k`.
pub fn boundary_ladder() -> Vec<f64> {
    (0..7).map(|k| 0.2 * 0.5f64.powi(k)).collect()
}

/// Fixed slice coordinate for the boundary-limit ladders.
pub const LADDER_Z: f64 = 0.45;

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sampler_stays_clear_of_guards() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for &(p, lambda) in &[(0.2, 5.0), (5.0, 0.2), (1.0, 1.0)] {
            let params = bergman_core::DomainParams::new(p, lambda).unwrap();
            for _ in 0..200 {
                let nu = sample_interior(&mut rng, p, lambda);
                assert!(params.bergman_kernel(&nu).unwrap() > 0.0);
            }
        }
    }

    #[test]
    fn delta_matches_slice_bookkeeping() {
        let params = bergman_core::DomainParams::new(0.7, 1.3).unwrap();
        let sp = bergman_core::domain::SlicePoint::new(&params, 0.4, 0.3).unwrap();
        assert!((cell_delta(1.3, 0.4, 0.3) - sp.delta).abs() < 1e-15);
        assert!(cell_delta(2.0, 0.5, 1.0).is_infinite());
    }
}
