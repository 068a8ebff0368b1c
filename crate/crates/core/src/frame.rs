//! Orthonormal frames, sectional and bisectional curvature reports, boundary
//! scans, and the Ricci / Kähler-Einstein residual machinery.
//!
//! On the slice `x = 0`, `y, z` real, the metric has `g_{2 1bar} = 0` and
//! `g_{3 1bar} = 0`, so the Gram-Schmidt frame built from `(d_1, d_2, d_3)`
//! takes the shape
//!
//! ```text
//!   X = k_1 d_1,    Y = t_2 d_2,    Z = s_2 d_2 + s_3 d_3,
//! ```
//!
//! and the curvature of the frame directions collapses to six ratios of the
//! bounded factor families:
//!
//! ```text
//!   H(X) = Htilde_1 / A_1^2,     B(X,Y) = Htilde_2 / (A_1 A_2),
//!   H(Y) = Htilde_5 / A_2^2,     B(X,Z) = Ftilde_1 / (A_1 A_4),
//!   H(Z) = Ftilde_3 / A_4^2,     B(Y,Z) = Ftilde_2 / (A_2 A_4),
//! ```
//!
//! with every other frame contraction vanishing identically (twelve such
//! combinations; their numerical size is a residual check). The ratios stay
//! bounded as `delta -> 1`, which is the quantitative form of "bounded
//! curvature near the boundary", and a scan over a near-boundary lattice
//! makes that sup visible.
//!
//! The Ricci tensor comes from the Kähler identity
//! `Ric_{i jbar} = -d_i dbar_j log det g`. In the rotation-invariant
//! coordinates `nu_i = |z_i|^2` the determinant expands over principal
//! minors,
//!
//! ```text
//!   det g = sum_{S subset {1,2,3}}  prod_{i not in S} phi_i
//!           . prod_{i in S} nu_i  . det (phi_{ij})_{S x S},
//! ```
//!
//! where `phi = log B` and subscripts are `nu`-partials; running the
//! expansion in truncated Taylor arithmetic gives `log det g` as an exact
//! jet, and a finite-difference route over the same expansion confirms it.
//! The metric solves `Ric = c g` only for the ball parameters
//! `p = lambda = 1` (with `c = -1`); [`ke_residual`] quantifies the failure
//! elsewhere by the best-fit `c` and the worst normalized deviation over a
//! sample of slice points.

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::curvature::{
    curvature_closed_slice, curvature_numeric_with_metric, CurvatureError, CurvatureTensor,
};
use crate::diffengine::{
    wirtinger_combine, DerivRequest, DiffConfig, DiffEngine, DiffError, DiffMode, ScalarField,
};
use crate::domain::{DomainError, DomainParams, NuPoint, SlicePoint};
use crate::hermitian::{Hermitian3, LinalgError, MatrixRole};
use crate::jets::Jet3;
use crate::metric::metric_closed;

/// Relative floor for Gram-Schmidt pivots: a projected vector whose squared
/// norm falls below this fraction of the squared norm of the basis vector it
/// came from is treated as degenerate rather than normalized into noise.
/// The reference must be per-vector, not global (trace): near the boundary
/// the metric diagonal legitimately spans many orders of magnitude.
const PIVOT_FLOOR: f64 = 1e-13;

#[derive(Error, Debug)]
pub enum FrameError {
    #[error("Gram-Schmidt pivot is degenerate (squared norm {pivot:.3e})")]
    Degenerate { pivot: f64 },
    #[error("direction vector is zero")]
    ZeroVector,
    #[error(transparent)]
    Curvature(#[from] CurvatureError),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Diff(#[from] DiffError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Coefficients of the Gram-Schmidt frame `X = k_1 d_1`,
/// `Y = t_1 d_1 + t_2 d_2`, `Z = s_1 d_1 + s_2 d_2 + s_3 d_3`, orthonormal
/// for the metric it was built from.
#[derive(Clone, Copy, Debug)]
pub struct OrthonormalFrame {
    pub k1: f64,
    pub t1: Complex64,
    pub t2: Complex64,
    pub s1: Complex64,
    pub s2: Complex64,
    pub s3: Complex64,
}

impl OrthonormalFrame {
    pub fn x(&self) -> [Complex64; 3] {
        [
            Complex64::new(self.k1, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
        ]
    }

    pub fn y(&self) -> [Complex64; 3] {
        [self.t1, self.t2, Complex64::new(0.0, 0.0)]
    }

    pub fn z(&self) -> [Complex64; 3] {
        [self.s1, self.s2, self.s3]
    }

    /// Largest deviation of the six pairings from `g(V_i, Vbar_j) = delta_ij`.
    pub fn orthonormality_residual(&self, metric: &Hermitian3) -> f64 {
        let v = [self.x(), self.y(), self.z()];
        let mut worst = 0.0f64;
        for i in 0..3 {
            for j in i..3 {
                let target = if i == j { 1.0 } else { 0.0 };
                let dev = (metric.pairing(v[i], v[j]) - target).norm();
                worst = worst.max(dev);
            }
        }
        worst
    }
}

/// Gram-Schmidt orthonormalization of `(d_1, d_2, d_3)` against `metric`:
/// normalize `d_1`, project it out of `d_2` and normalize, project both out
/// of `d_3` and normalize.
pub fn gram_schmidt(metric: &Hermitian3) -> Result<OrthonormalFrame, FrameError> {
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    // `reference` is the squared norm of the unprojected basis vector; the
    // `!(..)` form also rejects NaN and nonpositive pivots.
    let normalize = |v: [Complex64; 3], reference: f64| -> Result<[Complex64; 3], FrameError> {
        let nsq = metric.pairing(v, v).re;
        if !(nsq > PIVOT_FLOOR * reference) {
            return Err(FrameError::Degenerate { pivot: nsq });
        }
        let inv = 1.0 / nsq.sqrt();
        Ok([v[0] * inv, v[1] * inv, v[2] * inv])
    };

    let x = normalize([one, zero, zero], metric.get(0, 0).re)?;
    let e2 = [zero, one, zero];
    let c2 = metric.pairing(e2, x);
    let y = normalize(
        [e2[0] - c2 * x[0], e2[1] - c2 * x[1], e2[2] - c2 * x[2]],
        metric.get(1, 1).re,
    )?;
    let e3 = [zero, zero, one];
    let c3x = metric.pairing(e3, x);
    let c3y = metric.pairing(e3, y);
    let z = normalize(
        [
            e3[0] - c3x * x[0] - c3y * y[0],
            e3[1] - c3x * x[1] - c3y * y[1],
            e3[2] - c3x * x[2] - c3y * y[2],
        ],
        metric.get(2, 2).re,
    )?;

    Ok(OrthonormalFrame {
        k1: x[0].re,
        t1: y[0],
        t2: y[1],
        s1: z[0],
        s2: z[1],
        s3: z[2],
    })
}

/// Which route produces the curvature data behind a report.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HscSource {
    /// Closed factor ratios on the slice (exact-jet factor extraction).
    Closed,
    /// Finite-difference tensor contracted against a finite-difference frame.
    Numeric,
}

/// Holomorphic sectional curvatures of the frame directions, the three
/// bisectional pair values, and the size of the twelve contractions that
/// must vanish.
#[derive(Clone, Copy, Debug)]
pub struct HSCReport {
    pub hx: f64,
    pub hy: f64,
    pub hz: f64,
    pub bxy: f64,
    pub bxz: f64,
    pub byz: f64,
    /// Max modulus over the twelve vanishing combinations.
    pub zero_residuals: f64,
}

/// The twelve frame contractions forced to vanish on the slice, as index
/// quadruples `(i, j, k, l)` into `(X, Y, Z) = (0, 1, 2)` for
/// `R(V_i, conj V_j, V_k, conj V_l)`.
const VANISHING: [[usize; 4]; 12] = [
    [0, 0, 0, 1],
    [1, 1, 1, 0],
    [2, 2, 2, 1],
    [1, 0, 1, 0],
    [0, 0, 0, 2],
    [1, 1, 1, 2],
    [2, 2, 2, 0],
    [2, 0, 2, 0],
    [0, 0, 1, 2],
    [1, 1, 0, 2],
    [2, 2, 0, 1],
    [2, 1, 2, 1],
];

/// Contract a curvature tensor against a frame: the six report values plus
/// the twelve vanishing residuals.
fn contract_report(tensor: &CurvatureTensor, frame: &OrthonormalFrame) -> HSCReport {
    let v = [frame.x(), frame.y(), frame.z()];
    let pair = |i: usize, j: usize, k: usize, l: usize| tensor.pair(v[i], v[j], v[k], v[l]);
    let mut zero = 0.0f64;
    for q in VANISHING {
        zero = zero.max(pair(q[0], q[1], q[2], q[3]).norm());
    }
    HSCReport {
        hx: pair(0, 0, 0, 0).re,
        hy: pair(1, 1, 1, 1).re,
        hz: pair(2, 2, 2, 2).re,
        bxy: pair(0, 0, 1, 1).re,
        bxz: pair(0, 0, 2, 2).re,
        byz: pair(1, 1, 2, 2).re,
        zero_residuals: zero,
    }
}

/// Frame curvature report at a slice point.
///
/// With [`HscSource::Closed`] the six values are the factor ratios
/// (`H(X) = Htilde_1 / A_1^2` and so on) and the vanishing residuals come
/// from contracting the closed component tensor with the Gram-Schmidt frame
/// of the closed metric. With [`HscSource::Numeric`] everything is a
/// contraction of the finite-difference tensor against the Gram-Schmidt
/// frame of the finite-difference metric: one fully independent route.
pub fn hsc_report(
    params: &DomainParams,
    sp: &SlicePoint,
    source: HscSource,
) -> Result<HSCReport, FrameError> {
    match source {
        HscSource::Closed => {
            let (tensor, tables) = curvature_closed_slice(params, sp)?;
            let frame = gram_schmidt(&metric_closed(params, sp))?;
            let contracted = contract_report(&tensor, &frame);
            let a = tables.a;
            Ok(HSCReport {
                hx: tables.htilde[0] / (a.a1 * a.a1),
                bxy: tables.htilde[1] / (a.a1 * a.a2),
                hy: tables.htilde[4] / (a.a2 * a.a2),
                bxz: tables.ftilde1 / (a.a1 * a.a4),
                byz: tables.ftilde2 / (a.a2 * a.a4),
                hz: tables.ftilde3 / (a.a4 * a.a4),
                zero_residuals: contracted.zero_residuals,
            })
        }
        HscSource::Numeric => {
            let (tensor, metric) =
                curvature_numeric_with_metric(params, sp.point(), DiffConfig::default())?;
            let frame = gram_schmidt(&metric)?;
            Ok(contract_report(&tensor, &frame))
        }
    }
}

/// Holomorphic sectional curvature in the direction `v` at `at`:
/// `R(v, vbar, v, vbar) / g(v, vbar)^2`, with both tensor and metric from
/// the finite-difference route. Scale invariant in `v`.
pub fn hsc_direction(
    params: &DomainParams,
    at: [Complex64; 3],
    v: [Complex64; 3],
) -> Result<f64, FrameError> {
    if v.iter().map(|w| w.norm_sqr()).sum::<f64>() == 0.0 {
        return Err(FrameError::ZeroVector);
    }
    let (tensor, metric) = curvature_numeric_with_metric(params, at, DiffConfig::default())?;
    let nsq = metric.pairing(v, v).re;
    if nsq <= 0.0 {
        return Err(FrameError::ZeroVector);
    }
    Ok(tensor.pair(v, v, v, v).re / (nsq * nsq))
}

/// Lattice for [`boundary_scan`]: the row-major product of `y_values` and
/// `z_values`, with cells whose boundary parameter `delta` exceeds
/// `delta_cap` skipped.
#[derive(Clone, Debug)]
pub struct ScanSpec {
    pub y_values: Vec<f64>,
    pub z_values: Vec<f64>,
    pub delta_cap: f64,
}

impl ScanSpec {
    /// The default lattice `{0.05 + 0.1 k}` in both coordinates.
    pub fn lattice(rows: usize, cols: usize, delta_cap: f64) -> ScanSpec {
        ScanSpec {
            y_values: (0..rows).map(|k| 0.05 + 0.1 * k as f64).collect(),
            z_values: (0..cols).map(|k| 0.05 + 0.1 * k as f64).collect(),
            delta_cap,
        }
    }
}

/// One scan cell: the report is `None` when the cell was skipped (past the
/// `delta` cap, inside the axis exclusion band, or too close to the
/// boundary to evaluate).
#[derive(Clone, Copy, Debug)]
pub struct ScanRow {
    pub y: f64,
    pub z: f64,
    pub delta: f64,
    pub report: Option<HSCReport>,
}

fn scan_cell(params: &DomainParams, y: f64, z: f64, delta_cap: f64) -> ScanRow {
    let a = 1.0 - z * z;
    let delta = if a > 0.0 {
        y * y / a.powf(params.lambda())
    } else {
        f64::INFINITY
    };
    let report = if delta <= delta_cap {
        SlicePoint::new(params, y, z)
            .ok()
            .and_then(|sp| hsc_report(params, &sp, HscSource::Closed).ok())
    } else {
        None
    };
    ScanRow {
        y,
        z,
        delta,
        report,
    }
}

/// Curvature report over a slice lattice, `y`-major, deterministic row
/// order. Skipped cells keep their `(y, z, delta)` coordinates with
/// `report = None` as the flag; the scan itself never fails.
pub fn boundary_scan(params: &DomainParams, spec: &ScanSpec) -> Vec<ScanRow> {
    let cells: Vec<(f64, f64)> = spec
        .y_values
        .iter()
        .flat_map(|&y| spec.z_values.iter().map(move |&z| (y, z)))
        .collect();
    cells
        .par_iter()
        .map(|&(y, z)| scan_cell(params, y, z, spec.delta_cap))
        .collect()
}

/// Supremum of the six report magnitudes over a `(delta, z)` lattice: for
/// each pair the slice point with exactly that boundary parameter is
/// `y = sqrt(delta a^lambda)`. The bounded-curvature statement says this
/// stays finite as the `delta` lattice pushes toward 1.
pub fn hsc_sup(
    params: &DomainParams,
    deltas: &[f64],
    z_values: &[f64],
) -> Result<f64, FrameError> {
    let mut sup = 0.0f64;
    for &delta in deltas {
        for &z in z_values {
            let a = 1.0 - z * z;
            let y = (delta * a.powf(params.lambda())).sqrt();
            let sp = SlicePoint::new(params, y, z)?;
            let r = hsc_report(params, &sp, HscSource::Closed)?;
            for v in [r.hx, r.hy, r.hz, r.bxy, r.bxz, r.byz] {
                sup = sup.max(v.abs());
            }
        }
    }
    Ok(sup)
}

/// `log det g` as an exact jet at `nu`, via the principal-minor expansion.
/// The factors `phi_i`, `phi_ij` are derivative jets of the degree-4 kernel
/// jet, so the expansion is exact through total degree 2: enough for every
/// second derivative of `log det g`, which is all the Ricci tensor reads.
fn log_det_g_jet(params: &DomainParams, nu: &NuPoint) -> Result<Jet3, DomainError> {
    let phi = params.log_kernel_jet(nu)?;
    let f = [phi.partial_jet(0), phi.partial_jet(1), phi.partial_jet(2)];
    let mut pm = [[Jet3::constant(0.0); 3]; 3];
    for i in 0..3 {
        for j in i..3 {
            let d = f[i].partial_jet(j);
            pm[i][j] = d;
            pm[j][i] = d;
        }
    }
    let nuv = [
        Jet3::var(nu.nu1, 0),
        Jet3::var(nu.nu2, 1),
        Jet3::var(nu.nu3, 2),
    ];

    let mut det = f[0].mul(&f[1]).mul(&f[2]);
    for i in 0..3 {
        let j = (i + 1) % 3;
        let k = (i + 2) % 3;
        det = det.add(&nuv[i].mul(&pm[i][i]).mul(&f[j]).mul(&f[k]));
    }
    for i in 0..3 {
        for j in (i + 1)..3 {
            let k = 3 - i - j;
            let minor = pm[i][i].mul(&pm[j][j]).sub(&pm[i][j].mul(&pm[i][j]));
            det = det.add(&nuv[i].mul(&nuv[j]).mul(&minor).mul(&f[k]));
        }
    }
    let det3 = pm[0][0]
        .mul(&pm[1][1].mul(&pm[2][2]).sub(&pm[1][2].mul(&pm[1][2])))
        .sub(&pm[0][1].mul(&pm[0][1].mul(&pm[2][2]).sub(&pm[1][2].mul(&pm[0][2]))))
        .add(&pm[0][2].mul(&pm[0][1].mul(&pm[1][2]).sub(&pm[1][1].mul(&pm[0][2]))));
    det = det.add(&nuv[0].mul(&nuv[1]).mul(&nuv[2]).mul(&det3));
    Ok(det.ln()?)
}

/// Ricci tensor `Ric_{i jbar} = -d_i dbar_j log det g` at an interior
/// point, from the exact jet of `log det g`.
pub fn ricci(params: &DomainParams, at: [Complex64; 3]) -> Result<Hermitian3, FrameError> {
    let nu = NuPoint::new(at[0].norm_sqr(), at[1].norm_sqr(), at[2].norm_sqr())?;
    // Only entries of total order <= 2 are read below, which is exactly the
    // validity range of the log-det jet.
    let table = log_det_g_jet(params, &nu)?.derivative_table();
    let mut raw = [[Complex64::new(0.0, 0.0); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            raw[i][j] = -wirtinger_combine(&table, at, &DerivRequest::metric(i, j));
        }
    }
    let (ric, _) = Hermitian3::from_general(raw, MatrixRole::Ricci);
    Ok(ric)
}

/// `log det g` as a stencil field: each evaluation reads the metric's
/// determinant off the exact kernel jet at the displaced point, through the
/// same principal-minor expansion as the jet route but at value level.
/// Rotation invariant like the kernel itself.
struct LogDetGField {
    params: DomainParams,
}

impl LogDetGField {
    fn det_g(&self, nu: [f64; 3]) -> Option<f64> {
        let phi = self.params.log_kernel_jet_raw(nu)?;
        let f = [
            phi.partial(1, 0, 0),
            phi.partial(0, 1, 0),
            phi.partial(0, 0, 1),
        ];
        let mut pm = [[0.0f64; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let mut o = [0usize; 3];
                o[i] += 1;
                o[j] += 1;
                pm[i][j] = phi.partial(o[0], o[1], o[2]);
            }
        }
        let mut det = f[0] * f[1] * f[2];
        for i in 0..3 {
            let j = (i + 1) % 3;
            let k = (i + 2) % 3;
            det += nu[i] * pm[i][i] * f[j] * f[k];
        }
        for i in 0..3 {
            for j in (i + 1)..3 {
                let k = 3 - i - j;
                det += nu[i] * nu[j] * (pm[i][i] * pm[j][j] - pm[i][j] * pm[i][j]) * f[k];
            }
        }
        let det3 = pm[0][0] * (pm[1][1] * pm[2][2] - pm[1][2] * pm[1][2])
            - pm[0][1] * (pm[0][1] * pm[2][2] - pm[1][2] * pm[0][2])
            + pm[0][2] * (pm[0][1] * pm[1][2] - pm[1][1] * pm[0][2]);
        det += nu[0] * nu[1] * nu[2] * det3;
        (det > 0.0).then_some(det)
    }
}

impl ScalarField for LogDetGField {
    fn eval(&self, z: [Complex64; 3]) -> Option<f64> {
        self.eval_nu([z[0].norm_sqr(), z[1].norm_sqr(), z[2].norm_sqr()])
    }

    fn eval_nu(&self, nu: [f64; 3]) -> Option<f64> {
        self.det_g(nu).map(f64::ln)
    }

    fn rotation_invariant(&self) -> bool {
        true
    }

    fn step_bound_nu_axes(&self, nu: [f64; 3]) -> [f64; 3] {
        self.params.log_kernel_field().step_bound_nu_axes(nu)
    }

    fn step_bound_z(&self, z: [Complex64; 3]) -> f64 {
        self.params.log_kernel_field().step_bound_z(z)
    }
}

/// Ricci tensor with the derivatives of `log det g` produced by the
/// finite-difference engine: the independent confirmation of [`ricci`].
pub fn ricci_numeric(
    params: &DomainParams,
    at: [Complex64; 3],
    cfg: DiffConfig,
) -> Result<Hermitian3, FrameError> {
    let field = LogDetGField { params: *params };
    let nu = [at[0].norm_sqr(), at[1].norm_sqr(), at[2].norm_sqr()];
    // The field is rotation invariant, so one shared table serves either
    // requested mode (step policy still follows `cfg`).
    let mut cfg2 = DiffConfig::with_mode(DiffMode::Reinhardt);
    cfg2.base_step = cfg.base_step;
    cfg2.levels = cfg.levels;
    let engine = DiffEngine::new(&field, cfg2);
    let (table, _) = engine.nu_derivative_table(nu, [2, 2, 2], 2)?;
    let mut raw = [[Complex64::new(0.0, 0.0); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            raw[i][j] = -wirtinger_combine(&table, at, &DerivRequest::metric(i, j));
        }
    }
    let (ric, _) = Hermitian3::from_general(raw, MatrixRole::Ricci);
    Ok(ric)
}

/// Canonical slice sample `(y, z)` pairs for the Kähler-Einstein residual.
pub const KE_SAMPLES: [(f64, f64); 5] = [
    (0.2, 0.3),
    (0.4, 0.2),
    (0.1, 0.5),
    (0.3, 0.4),
    (0.25, 0.15),
];

/// Best-fit Einstein constant and the residual it leaves: `c_best` solves
/// the least-squares problem over all matrix entries of the sample, and the
/// residual is the worst `||Ric - c g||_F / ||g||_F` over the sample. Zero
/// (to rounding) exactly when the metric is Kähler-Einstein.
pub fn ke_residual(
    params: &DomainParams,
    samples: &[(f64, f64)],
) -> Result<(f64, f64), FrameError> {
    let mut pairs = Vec::with_capacity(samples.len());
    for &(y, z) in samples {
        let sp = SlicePoint::new(params, y, z)?;
        let ric = ricci(params, sp.point())?;
        let g = metric_closed(params, &sp);
        pairs.push((ric, g));
    }
    let mut num = 0.0f64;
    let mut den = 0.0f64;
    for (ric, g) in &pairs {
        for i in 0..3 {
            for j in 0..3 {
                num += (ric.get(i, j) * g.get(i, j).conj()).re;
                den += g.get(i, j).norm_sqr();
            }
        }
    }
    if den == 0.0 {
        return Ok((0.0, 0.0));
    }
    let c = num / den;
    let mut residual = 0.0f64;
    for (ric, g) in &pairs {
        residual = residual.max(ric.sub(&g.scale(c)).frobenius_norm() / g.frobenius_norm());
    }
    Ok((c, residual))
}
