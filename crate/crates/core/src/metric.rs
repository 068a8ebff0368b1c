//! The invariant Kähler metric `g_{i jbar} = d_i dbar_j log B` on the real
//! slice `x = 0`, `y, z` real.
//!
//! On the slice the metric is block diagonal (the `x` direction decouples)
//! and every entry factors into an explicit power prefactor in `(a, b, c)`
//! and a bounded factor `A_i(delta, z)`:
//!
//! ```text
//!   g_11 = A_1 / c,    g_22 = (a^l / b^2) A_2,
//!   g_23 = (l y z / (a^(1-l) b^2)) A_2,    g_33 = A_3 / (a^(2-2l) b^2),
//! ```
//!
//! with `delta = y^2 / a^lambda` the boundary parameter: `delta -> 1` at the
//! boundary of the slice, and every `A_i` has a finite limit there, which is
//! what makes boundary behavior controllable. `A_4 := (A_3 - l^2 delta z^2
//! A_2) / (1 - delta)` carries the 2x2 block determinant.
//!
//! Everything here is validated against the finite-difference route
//! ([`metric_numeric`]) — the closed forms never feed their own test oracle.

use num_complex::Complex64;

use crate::diffengine::{wirtinger_combine, DerivRequest, DiffConfig, DiffEngine};
use crate::domain::{DomainError, DomainParams, SlicePoint};
use crate::extrapolate;
use crate::hermitian::{Hermitian3, MatrixRole};

/// The four bounded metric factors at a slice point.
#[derive(Clone, Copy, Debug)]
pub struct AFactors {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a4: f64,
}

/// Boundary limits (`delta -> 1`) of the factors that possess them.
#[derive(Clone, Copy, Debug)]
pub struct ALimits {
    pub a1: f64,
    pub a2: f64,
    pub a4: f64,
}

pub fn a_factors(params: &DomainParams, sp: &SlicePoint) -> AFactors {
    let (p, l) = (params.p(), params.lambda());
    let u = params.u_constants();
    let (u3, u4, u5, u6) = (u.u3, u.u4, u.u5, u.u6);
    let d = sp.delta;
    let z2 = sp.z * sp.z;
    let denom = u3 + u4 * d;
    let a1 = (u5 + u6 * d) / denom + 4.0;
    let a2 = 1.0 / p + 3.0 + u3 * u4 * (1.0 - d) * (1.0 - d) / (denom * denom);
    let a3 = (1.0 + d * (l * z2 - 1.0)) * (l / p)
        + d * d * (2.0 - 2.0 * l)
        + d * (2.0 * l * l * z2 - 4.0)
        + l
        + 2.0
        + l * d
            * (u3 * u4 * (1.0 + d * d) * (1.0 + l * z2)
                + u4 * u4 * d * (1.0 + (l * z2 - 1.0) * d + d * d)
                + u3 * u3 * (1.0 + l * z2))
            / (denom * denom);
    let a4 = (a3 - l * l * d * z2 * a2) / (1.0 - d);
    AFactors { a1, a2, a3, a4 }
}

/// Independent rational form of `A_4` (numerator/denominator polynomial in
/// `p`, `lambda`, `delta`), kept as a cross-check against the defining
/// quotient, whose `1 - delta` division it avoids.
pub fn a4_rational(params: &DomainParams, delta: f64) -> f64 {
    let (p, r) = (params.p(), params.lambda());
    let num = delta * delta * p * p * (r - 2.0) * (r - 1.0)
        + delta * p * (r - 1.0) * (4.0 * p * r + 4.0 * p + 3.0 * r)
        + p * p * r * r
        + 3.0 * p * p * r
        + 2.0 * p * p
        + 2.0 * p * r * r
        + 3.0 * p * r
        + r * r;
    let den = p * (delta * p * (r - 1.0) + p * r + p + r);
    num / den
}

pub fn a_limits(params: &DomainParams) -> ALimits {
    let (p, l) = (params.p(), params.lambda());
    ALimits {
        a1: 4.0 * (2.0 + p) / (1.0 + 2.0 * p),
        a2: 3.0 + 1.0 / p,
        a4: l * (3.0 + 1.0 / p),
    }
}

/// The metric at a slice point, assembled from the closed factors. Entries
/// are real there; the matrix is diagonal except for `g_23`.
pub fn metric_closed(params: &DomainParams, sp: &SlicePoint) -> Hermitian3 {
    let l = params.lambda();
    let f = a_factors(params, sp);
    let (a, b, c) = (sp.a, sp.b, sp.c);
    let g11 = f.a1 / c;
    let g22 = a.powf(l) / (b * b) * f.a2;
    let g23 = l * sp.y * sp.z / (a.powf(1.0 - l) * b * b) * f.a2;
    let g33 = f.a3 / (a.powf(2.0 - 2.0 * l) * b * b);
    Hermitian3::from_upper(
        [g11, g22, g33],
        [
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(g23, 0.0),
        ],
        MatrixRole::Metric,
    )
}

/// The closed-form inverse; `1 - delta = b / a^lambda` absorbs the division
/// the raw block inverse would perform.
pub fn inverse_metric_closed(params: &DomainParams, sp: &SlicePoint) -> Hermitian3 {
    let l = params.lambda();
    let f = a_factors(params, sp);
    let (a, b, c) = (sp.a, sp.b, sp.c);
    let i11 = c / f.a1;
    let i22 = b * f.a3 / (f.a2 * f.a4);
    let i23 = -l * sp.y * sp.z * a.powf(1.0 - l) * b / f.a4;
    let i33 = a.powf(2.0 - l) * b / f.a4;
    Hermitian3::from_upper(
        [i11, i22, i33],
        [
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(i23, 0.0),
        ],
        MatrixRole::InverseMetric,
    )
}

/// Relative residual of the 2x2 block determinant identity
/// `g_22 g_33 - g_23 g_32 = A_2 A_4 / (a^(2-2l) b^3)`.
pub fn det_identity_residual(params: &DomainParams, sp: &SlicePoint) -> f64 {
    let l = params.lambda();
    let f = a_factors(params, sp);
    let g = metric_closed(params, sp);
    let minor = (g.get(1, 1) * g.get(2, 2) - g.get(1, 2) * g.get(2, 1)).re;
    let rhs = f.a2 * f.a4 / (sp.a.powf(2.0 - 2.0 * l) * sp.b.powi(3));
    (minor - rhs).abs() / rhs.abs().max(f64::MIN_POSITIVE)
}

/// Closed form of `det g / B`:
/// `pi^3 p^2 A_1 A_2 A_4 / ((p+1)((l + l p + p) + (l - 1) p delta))`.
pub fn det_ratio(params: &DomainParams, sp: &SlicePoint) -> f64 {
    let (p, l) = (params.p(), params.lambda());
    let f = a_factors(params, sp);
    std::f64::consts::PI.powi(3) * p * p * f.a1 * f.a2 * f.a4
        / ((p + 1.0) * ((l + l * p + p) + (l - 1.0) * p * sp.delta))
}

/// `delta -> 1` limit of the determinant ratio:
/// `4 pi^3 (2+p) (3p+1)^2 / ((p+1) (1+2p)^2)`. Independent of `lambda`
/// (the `lambda`s in `A_4` and the denominator cancel).
pub fn det_ratio_limit(params: &DomainParams) -> f64 {
    let p = params.p();
    4.0 * std::f64::consts::PI.powi(3) * (2.0 + p) * (3.0 * p + 1.0) * (3.0 * p + 1.0)
        / ((p + 1.0) * (1.0 + 2.0 * p) * (1.0 + 2.0 * p))
}

/// Relative residual of `det(g) = B * det_ratio`, with `det(g)` taken from
/// the assembled matrix and `B` from the kernel module. This checks the
/// ratio's closed form against two independently computed quantities.
pub fn det_ratio_residual(params: &DomainParams, sp: &SlicePoint) -> Result<f64, DomainError> {
    let det = metric_closed(params, sp).det();
    let b = params.bergman_kernel(&sp.nu())?;
    let rhs = b * det_ratio(params, sp);
    Ok((det - rhs).abs() / rhs.abs().max(f64::MIN_POSITIVE))
}

/// Finite-difference metric at an arbitrary interior point: the oracle route.
/// Returns the Hermitized matrix, its Hermitian-symmetry residual, and the
/// engine's worst error estimate.
pub fn metric_numeric(
    params: &DomainParams,
    at: [Complex64; 3],
    cfg: DiffConfig,
) -> Result<(Hermitian3, f64, f64), DomainError> {
    let field = params.log_kernel_field();
    let engine = DiffEngine::new(&field, cfg);
    let nu = [at[0].norm_sqr(), at[1].norm_sqr(), at[2].norm_sqr()];
    let mut raw = [[Complex64::new(0.0, 0.0); 3]; 3];
    let mut err = 0.0f64;
    match cfg.mode {
        crate::diffengine::DiffMode::Reinhardt => {
            let (table, e) = engine.nu_derivative_table(nu, [2, 2, 2], 2)?;
            err = e;
            for i in 0..3 {
                for j in 0..3 {
                    raw[i][j] = wirtinger_combine(&table, at, &DerivRequest::metric(i, j));
                }
            }
        }
        crate::diffengine::DiffMode::Real6 => {
            for i in 0..3 {
                for j in 0..3 {
                    let r = engine.derivative(at, &DerivRequest::metric(i, j))?;
                    raw[i][j] = r.value;
                    err = err.max(r.error_estimate);
                }
            }
        }
    }
    let (g, sym) = Hermitian3::from_general(raw, MatrixRole::Metric);
    Ok((g, sym, err))
}

/// Extrapolate `(A_1, A_2, A_4)` to the boundary `delta -> 1` at fixed `z`
/// along the ladder `delta = 1 - eps_k`, by Neville extrapolation in `eps`.
/// Returns the extrapolated values and their tableau error estimates.
pub fn extrapolated_a_limits(
    params: &DomainParams,
    z: f64,
    eps_ladder: &[f64],
) -> Result<([f64; 3], [f64; 3]), DomainError> {
    let l = params.lambda();
    let mut samples: [Vec<(f64, f64)>; 3] = [Vec::new(), Vec::new(), Vec::new()];
    for &eps in eps_ladder {
        let delta = 1.0 - eps;
        let a = 1.0 - z * z;
        let y = (delta * a.powf(l)).sqrt();
        let sp = SlicePoint::new(params, y, z)?;
        let f = a_factors(params, &sp);
        samples[0].push((eps, f.a1));
        samples[1].push((eps, f.a2));
        samples[2].push((eps, f.a4));
    }
    let mut vals = [0.0; 3];
    let mut errs = [0.0; 3];
    for k in 0..3 {
        let (v, e) = extrapolate::to_zero(&samples[k]);
        vals[k] = v;
        errs[k] = e;
    }
    Ok((vals, errs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn setup(p: f64, l: f64, y: f64, z: f64) -> (DomainParams, SlicePoint) {
        let params = DomainParams::new(p, l).unwrap();
        let sp = SlicePoint::new(&params, y, z).unwrap();
        (params, sp)
    }

    #[test]
    fn ball_metric_is_conformal() {
        // p = lambda = 1: g_11 = 4/(1 - y^2 - z^2), g_22 = 4a/b^2, etc.
        let (params, sp) = setup(1.0, 1.0, 0.2, 0.3);
        let g = metric_closed(&params, &sp);
        let b = 1.0 - 0.04 - 0.09;
        assert_relative_eq!(g.get(0, 0).re, 4.0 / b, max_relative = 1e-14);
        assert_relative_eq!(g.get(1, 1).re, 4.0 * sp.a / (b * b), max_relative = 1e-14);
        assert_relative_eq!(g.get(1, 2).re, 4.0 * 0.06 / (b * b), max_relative = 1e-14);
        assert_relative_eq!(
            g.get(2, 2).re,
            4.0 * (1.0 - 0.04) / (b * b),
            max_relative = 1e-14
        );
    }

    #[test]
    fn oracle_frozen_values() {
        // Reference values from an independent high-precision evaluation of
        // d_i dbar_j log B.
        let (params, sp) = setup(2.0, 1.0, 0.3, 0.4);
        let g = metric_closed(&params, &sp);
        assert_relative_eq!(g.get(0, 0).re, 3.6950417228136048, max_relative = 1e-13);
        assert_relative_eq!(g.get(1, 1).re, 5.226666666666667, max_relative = 1e-13);
        assert_relative_eq!(g.get(1, 2).re, 0.7466666666666667, max_relative = 1e-13);
        assert_relative_eq!(g.get(2, 2).re, 5.662222222222222, max_relative = 1e-13);

        let (params, sp) = setup(0.5, 2.0, 0.35, 0.25);
        let g = metric_closed(&params, &sp);
        assert_relative_eq!(g.get(0, 0).re, 9.090109140010588, max_relative = 1e-13);
        assert_relative_eq!(g.get(1, 1).re, 7.836982492190754, max_relative = 1e-13);
        assert_relative_eq!(g.get(1, 2).re, 1.462903398542274, max_relative = 1e-13);
        assert_relative_eq!(g.get(2, 2).re, 11.262353054196602, max_relative = 1e-13);
    }

    #[test]
    fn closed_inverse_inverts() {
        for (p, l, y, z) in [
            (1.0, 1.0, 0.2, 0.3),
            (2.0, 1.0, 0.3, 0.4),
            (0.5, 2.0, 0.35, 0.25),
            (5.0, 0.2, 0.6, 0.55),
            (0.2, 5.0, 0.15, 0.45),
        ] {
            let (params, sp) = setup(p, l, y, z);
            let g = metric_closed(&params, &sp);
            let gi = inverse_metric_closed(&params, &sp);
            let r = g.product_identity_residual(&gi);
            assert!(r < 1e-12, "p={p} l={l}: residual {r}");
            // And against brute-force adjugate inversion.
            let brute = g.inverse().unwrap();
            let dev = gi.sub(&brute).frobenius_norm() / brute.frobenius_norm();
            assert!(dev < 1e-12, "p={p} l={l}: inverse deviation {dev}");
        }
    }

    #[test]
    fn a4_rational_matches_quotient() {
        for (p, l, y, z) in [
            (1.0, 1.0, 0.2, 0.3),
            (1.7, 0.6, 0.5, 0.35),
            (0.5, 2.0, 0.35, 0.25),
            (3.0, 4.0, 0.25, 0.5),
        ] {
            let (params, sp) = setup(p, l, y, z);
            let f = a_factors(&params, &sp);
            assert_relative_eq!(
                f.a4,
                a4_rational(&params, sp.delta),
                max_relative = 1e-11
            );
        }
    }

    #[test]
    fn det_identity_and_ratio() {
        for (p, l, y, z) in [
            (1.0, 1.0, 0.2, 0.3),
            (2.0, 1.0, 0.45, 0.3),
            (0.5, 2.0, 0.35, 0.25),
            (5.0, 5.0, 0.2, 0.35),
        ] {
            let (params, sp) = setup(p, l, y, z);
            let minor = det_identity_residual(&params, &sp);
            assert!(minor < 1e-12, "p={p} l={l}: 2x2 minor residual {minor}");
            let r = det_ratio_residual(&params, &sp).unwrap();
            assert!(r < 1e-11, "p={p} l={l}: det ratio residual {r}");
        }
        // Unit ball: det g / B = 32 pi^3 / 3 everywhere, which is also the
        // delta -> 1 limit.
        let (params, sp) = setup(1.0, 1.0, 0.3, 0.4);
        let expect = 32.0 * std::f64::consts::PI.powi(3) / 3.0;
        assert_relative_eq!(det_ratio(&params, &sp), expect, max_relative = 1e-13);
        assert_relative_eq!(det_ratio_limit(&params), expect, max_relative = 1e-14);
    }

    #[test]
    fn ratio_limit_reached_along_ladder() {
        let params = DomainParams::new(2.5, 0.7).unwrap();
        let z: f64 = 0.4;
        let lim = det_ratio_limit(&params);
        let samples: Vec<(f64, f64)> = (0..6)
            .map(|k| {
                let eps = 0.2 * 0.5f64.powi(k);
                let y = ((1.0 - eps) * (1.0 - z * z).powf(params.lambda())).sqrt();
                let sp = SlicePoint::new(&params, y, z).unwrap();
                (eps, det_ratio(&params, &sp))
            })
            .collect();
        let (v, _) = crate::extrapolate::to_zero(&samples);
        assert_relative_eq!(v, lim, max_relative = 1e-6);
    }

    #[test]
    fn limits_match_extrapolation() {
        for (p, l) in [(1.0, 1.5), (0.2, 1.0), (5.0, 0.3), (2.0, 2.0)] {
            let params = DomainParams::new(p, l).unwrap();
            let lim = a_limits(&params);
            let ladder: Vec<f64> = (0..7).map(|k| 0.2 * 0.5f64.powi(k)).collect();
            let (vals, _) = extrapolated_a_limits(&params, 0.45, &ladder).unwrap();
            assert_relative_eq!(vals[0], lim.a1, max_relative = 1e-6);
            assert_relative_eq!(vals[1], lim.a2, max_relative = 1e-6);
            assert_relative_eq!(vals[2], lim.a4, max_relative = 1e-6);
        }
    }

    #[test]
    fn numeric_route_confirms_closed_route() {
        for (p, l, y, z) in [(2.0, 1.0, 0.3, 0.4), (0.5, 2.0, 0.35, 0.25)] {
            let (params, sp) = setup(p, l, y, z);
            let closed = metric_closed(&params, &sp);
            let (num, sym, _) =
                metric_numeric(&params, sp.point(), DiffConfig::default()).unwrap();
            assert!(sym < 1e-9);
            for i in 0..3 {
                for j in 0..3 {
                    let c = closed.get(i, j);
                    let n = num.get(i, j);
                    let scale = closed.trace();
                    assert!(
                        (c - n).norm() <= 1e-7 * scale,
                        "entry ({i},{j}): closed {c} vs numeric {n}"
                    );
                }
            }
        }
    }
}
