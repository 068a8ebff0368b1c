//! Holomorphic-sectional-curvature subcommand: the frame curvature report
//! (three sectional values, three bisectional pair values, and the
//! vanishing-contraction residual) over the lattice, with the boundary cap
//! pushed out to `delta = 0.999` by default so the scan probes the
//! boundedness statement. With `--ke`, the summary adds the best-fit
//! Einstein constant and the worst relative Kähler-Einstein residual over
//! the canonical sample set.

use bergman_core::frame::{boundary_scan, ke_residual, ScanSpec, KE_SAMPLES};
use bergman_core::DomainParams;
use serde_json::json;

use crate::commands::CliError;
use crate::config::RunConfig;
use crate::output::{CommandResult, Field, Table};

const HEADER: [&str; 15] = [
    "y",
    "z",
    "delta",
    "hx",
    "hy",
    "hz",
    "bxy",
    "bxz",
    "byz",
    "zero_residuals",
    "formula_source",
    "error_estimate",
    "tolerance",
    "pass",
    "flag",
];

pub fn run(cfg: &RunConfig, ke: bool) -> Result<CommandResult, CliError> {
    let params = DomainParams::new(cfg.p, cfg.lambda)?;
    let spec = ScanSpec {
        y_values: cfg.y_values(),
        z_values: cfg.z_values(),
        delta_cap: cfg.delta_cap,
    };
    let rows = boundary_scan(&params, &spec);

    let mut table = Table::new(HEADER.to_vec());
    let mut evaluated = 0usize;
    let mut flagged = 0usize;
    let mut failed = 0usize;
    let mut max_zero = 0.0f64;
    let mut sup_component = 0.0f64;
    for row in &rows {
        match row.report {
            Some(r) => {
                evaluated += 1;
                let components = [r.hx, r.hy, r.hz, r.bxy, r.bxz, r.byz];
                let scale = components.iter().fold(1.0f64, |m, v| m.max(v.abs()));
                let normalized = r.zero_residuals / scale;
                let pass = components.iter().all(|v| v.is_finite()) && normalized <= cfg.tol;
                failed += usize::from(!pass);
                max_zero = max_zero.max(normalized);
                sup_component =
                    components.iter().fold(sup_component, |m, v| m.max(v.abs()));
                table.push(vec![
                    Field::Float(row.y),
                    Field::Float(row.z),
                    Field::Float(row.delta),
                    Field::finite(r.hx),
                    Field::finite(r.hy),
                    Field::finite(r.hz),
                    Field::finite(r.bxy),
                    Field::finite(r.bxz),
                    Field::finite(r.byz),
                    Field::finite(r.zero_residuals),
                    Field::text("closed"),
                    Field::finite(normalized),
                    Field::Float(cfg.tol),
                    Field::Bool(pass),
                    Field::Empty,
                ]);
            }
            None => {
                flagged += 1;
                table.push(vec![
                    Field::Float(row.y),
                    Field::Float(row.z),
                    Field::finite(row.delta),
                    Field::Empty,
                    Field::Empty,
                    Field::Empty,
                    Field::Empty,
                    Field::Empty,
                    Field::Empty,
                    Field::Empty,
                    Field::text("closed"),
                    Field::Empty,
                    Field::Float(cfg.tol),
                    Field::Empty,
                    Field::text("skipped"),
                ]);
            }
        }
    }

    let mut summary = json!({
        "rows_evaluated": evaluated,
        "rows_flagged": flagged,
        "rows_failed": failed,
        "max_zero_residual": max_zero,
        "sup_abs_component": sup_component,
    });
    if ke {
        // Informational: the fit never gates the exit status, since only
        // special parameters are Kähler-Einstein.
        match ke_residual(&params, &KE_SAMPLES) {
            Ok((constant, residual)) => {
                summary["einstein_constant"] = json!(constant);
                summary["ke_residual"] = json!(residual);
            }
            Err(_) => {
                summary["einstein_constant"] = json!(null);
                summary["ke_residual"] = json!(null);
                summary["ke_flag"] = json!("skipped");
            }
        }
    }

    let all_pass = failed == 0;
    Ok(CommandResult { echo: cfg.echo("hsc", Some(ke), None), table, summary, all_pass })
}
