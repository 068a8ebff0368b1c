//! Metric subcommand: on every lattice cell, the closed metric factors and
//! matrix entries, the closed inverse check, the two determinant
//! identities, and the finite-difference cross-check of the closed matrix.
//! The summary extrapolates the metric factors to the boundary and compares
//! them with their closed limits.

use bergman_core::diffengine::DiffConfig;
use bergman_core::domain::SlicePoint;
use bergman_core::{metric, DomainParams};
use rayon::prelude::*;
use serde_json::json;

use crate::commands::{boundary_ladder, cell_delta, CliError, LADDER_Z};
use crate::config::RunConfig;
use crate::output::{CommandResult, Field, Table};

/// Fixed gates for the closed-form consistency checks; `--tol` gates the
/// finite-difference comparison only.
const INVERSE_TOL: f64 = 1e-10;
const DET_IDENTITY_TOL: f64 = 1e-10;
const DET_RATIO_TOL: f64 = 1e-8;
/// Gate for the boundary-limit extrapolation in the summary.
const LIMIT_TOL: f64 = 1e-4;

const HEADER: [&str; 22] = [
    "y",
    "z",
    "delta",
    "a1",
    "a2",
    "a3",
    "a4",
    "g11",
    "g22",
    "g33",
    "g23",
    "inverse_residual",
    "det_identity_residual",
    "det_ratio",
    "det_ratio_residual",
    "numeric_rel_err",
    "offpattern_ratio",
    "formula_source",
    "error_estimate",
    "tolerance",
    "pass",
    "flag",
];

struct Cell {
    y: f64,
    z: f64,
    delta: f64,
    body: Option<Body>,
}

struct Body {
    a: [f64; 4],
    g: [f64; 4],
    inverse_residual: f64,
    det_identity_residual: f64,
    det_ratio: f64,
    det_ratio_residual: f64,
    numeric_rel_err: f64,
    offpattern_ratio: f64,
    error_estimate: f64,
}

fn evaluate(params: &DomainParams, y: f64, z: f64, delta_cap: f64) -> Cell {
    let delta = cell_delta(params.lambda(), y, z);
    let skipped = Cell { y, z, delta, body: None };
    if delta > delta_cap {
        return skipped;
    }
    let Ok(sp) = SlicePoint::new(params, y, z) else {
        return skipped;
    };
    let af = metric::a_factors(params, &sp);
    let g = metric::metric_closed(params, &sp);
    let inv = metric::inverse_metric_closed(params, &sp);
    let Ok(det_ratio_residual) = metric::det_ratio_residual(params, &sp) else {
        return skipped;
    };
    let Ok((gn, _, error_estimate)) = metric::metric_numeric(params, sp.point(), DiffConfig::default())
    else {
        return skipped;
    };
    // The closed matrix is nonzero exactly on the diagonal and the (2, 3)
    // pair; compare those relatively and measure everything else against
    // the trace.
    let mut numeric_rel_err = 0.0f64;
    for (i, j) in [(0, 0), (1, 1), (2, 2), (1, 2)] {
        let closed = g.get(i, j);
        let rel = (gn.get(i, j) - closed).norm() / closed.norm().max(f64::MIN_POSITIVE);
        numeric_rel_err = numeric_rel_err.max(rel);
    }
    let trace = g.trace();
    let offpattern_ratio =
        gn.get(0, 1).norm().max(gn.get(0, 2).norm()) / trace.max(f64::MIN_POSITIVE);
    Cell {
        y,
        z,
        delta,
        body: Some(Body {
            a: [af.a1, af.a2, af.a3, af.a4],
            g: [g.get(0, 0).re, g.get(1, 1).re, g.get(2, 2).re, g.get(1, 2).re],
            inverse_residual: g.product_identity_residual(&inv),
            det_identity_residual: metric::det_identity_residual(params, &sp),
            det_ratio: metric::det_ratio(params, &sp),
            det_ratio_residual,
            numeric_rel_err,
            offpattern_ratio,
            error_estimate,
        }),
    }
}

pub fn run(cfg: &RunConfig) -> Result<CommandResult, CliError> {
    let params = DomainParams::new(cfg.p, cfg.lambda)?;
    let cells: Vec<Cell> = cfg
        .cells()
        .par_iter()
        .map(|&(y, z)| evaluate(&params, y, z, cfg.delta_cap))
        .collect();

    let mut table = Table::new(HEADER.to_vec());
    let mut evaluated = 0usize;
    let mut flagged = 0usize;
    let mut failed = 0usize;
    let mut worst = [0.0f64; 5];
    for cell in &cells {
        match &cell.body {
            Some(b) => {
                evaluated += 1;
                let pass = b.numeric_rel_err <= cfg.tol
                    && b.offpattern_ratio <= cfg.tol
                    && b.inverse_residual <= INVERSE_TOL
                    && b.det_identity_residual <= DET_IDENTITY_TOL
                    && b.det_ratio_residual <= DET_RATIO_TOL;
                failed += usize::from(!pass);
                for (w, v) in worst.iter_mut().zip([
                    b.numeric_rel_err,
                    b.offpattern_ratio,
                    b.inverse_residual,
                    b.det_identity_residual,
                    b.det_ratio_residual,
                ]) {
                    *w = w.max(v);
                }
                table.push(vec![
                    Field::Float(cell.y),
                    Field::Float(cell.z),
                    Field::Float(cell.delta),
                    Field::Float(b.a[0]),
                    Field::Float(b.a[1]),
                    Field::Float(b.a[2]),
                    Field::Float(b.a[3]),
                    Field::Float(b.g[0]),
                    Field::Float(b.g[1]),
                    Field::Float(b.g[2]),
                    Field::Float(b.g[3]),
                    Field::finite(b.inverse_residual),
                    Field::finite(b.det_identity_residual),
                    Field::finite(b.det_ratio),
                    Field::finite(b.det_ratio_residual),
                    Field::finite(b.numeric_rel_err),
                    Field::finite(b.offpattern_ratio),
                    Field::text("closed+numeric"),
                    Field::finite(b.error_estimate),
                    Field::Float(cfg.tol),
                    Field::Bool(pass),
                    Field::Empty,
                ]);
            }
            None => {
                flagged += 1;
                let mut row = vec![
                    Field::Float(cell.y),
                    Field::Float(cell.z),
                    Field::finite(cell.delta),
                ];
                row.extend((3..17).map(|_| Field::Empty));
                row.extend([
                    Field::text("closed+numeric"),
                    Field::Empty,
                    Field::Float(cfg.tol),
                    Field::Empty,
                    Field::text("skipped"),
                ]);
                table.push(row);
            }
        }
    }

    // Boundary limits of the metric factors, extrapolated along the ladder
    // and compared with the closed limits.
    let limits = metric::a_limits(&params);
    let closed = [limits.a1, limits.a2, limits.a4];
    let ladder = boundary_ladder();
    let (limit_values, limit_errors, limit_residual, limits_pass, limits_flag) =
        match metric::extrapolated_a_limits(&params, LADDER_Z, &ladder) {
            Ok((values, errors)) => {
                let residual = values
                    .iter()
                    .zip(closed)
                    .map(|(v, c)| (v - c).abs() / c.abs().max(1.0))
                    .fold(0.0f64, f64::max);
                (Some(values), Some(errors), Some(residual), residual <= LIMIT_TOL, "")
            }
            Err(_) => (None, None, None, true, "skipped"),
        };

    let all_pass = failed == 0 && limits_pass;
    let summary = json!({
        "rows_evaluated": evaluated,
        "rows_flagged": flagged,
        "rows_failed": failed,
        "max_numeric_rel_err": worst[0],
        "max_offpattern_ratio": worst[1],
        "max_inverse_residual": worst[2],
        "max_det_identity_residual": worst[3],
        "max_det_ratio_residual": worst[4],
        "inverse_tolerance": INVERSE_TOL,
        "det_identity_tolerance": DET_IDENTITY_TOL,
        "det_ratio_tolerance": DET_RATIO_TOL,
        "det_ratio_limit": metric::det_ratio_limit(&params),
        "a_limits_closed": closed,
        "a_limits_extrapolated": limit_values,
        "a_limits_error_estimates": limit_errors,
        "a_limits_residual": limit_residual,
        "a_limits_tolerance": LIMIT_TOL,
        "a_limits_pass": limits_pass,
        "a_limits_flag": limits_flag,
    });
    Ok(CommandResult { echo: cfg.echo("metric", None, None), table, summary, all_pass })
}
