//! Potential theory on the unit disk: the positive Green's function, the
//! radial profile it induces against the weight `(1 - |y|^2)^2`, an
//! integrated gradient-bound inequality, the hyperbolic heat-kernel lower
//! bound, and the spectral constants of pinched-curvature comparison.
//!
//! The Green's function with positive sign convention is
//!
//! ```text
//!   G(x, y) = (1/4 pi) ln( |x|^2 |y - x/|x|^2|^2 / |x - y|^2 ),
//! ```
//!
//! with limit `G(0, y) = -(1/2 pi) ln |y|`. Its average over the circle
//! `|y| = r` depends only on `max(ln r, ln |x|)` (the ring identity
//! `I(a, b) = 4 pi max(ln a, ln b)`), which collapses the radial profile
//!
//! ```text
//!   phi(R) = int_D G((R, 0), y) (1 - |y|^2)^2 dA(y)
//!          = -int_0^1 r (1 - r^2)^2 max(ln r, ln R) dr
//!          = (1 - R^2)(2 R^4 - 7 R^2 + 11) / 72,
//! ```
//!
//! the closed form coming from termwise antiderivatives of `r^k ln r` (all
//! `ln R` terms cancel; the factored form makes `phi(1) = 0` exact). The
//! integrated inequality bounds `2 pi int_0^1 phi(R)^p R dR` by
//! `p^p int_D |y|^p gamma(y)^{p/2} dA`, where the gradient normalization
//! `gamma` is evaluated under both readings (`1` and `(1 - |y|^2)`) since
//! the two circulate interchangeably; the margin is orders of magnitude
//! under either.
//!
//! Everything quadrature-based runs on an adaptive Gauss-Kronrod 7/15 rule
//! with panels pre-split at the known singular corners, so the logarithmic
//! singularities sit at panel endpoints that the open nodes never touch.

use num_complex::Complex64;
use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum DiskError {
    #[error("Green's function pole: the two points coincide")]
    Coincident,
    #[error("|w| = {modulus} is not inside the unit disk")]
    OutsideDisk { modulus: f64 },
    #[error("constant requires dimension n >= 2 (division by n - 1)")]
    DimensionTooSmall,
    #[error("invalid parameters: {what}")]
    BadParams { what: &'static str },
}

/// A point of the open unit disk.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiskPoint {
    w: Complex64,
}

impl DiskPoint {
    pub fn new(w: Complex64) -> Result<DiskPoint, DiskError> {
        if w.norm() < 1.0 {
            Ok(DiskPoint { w })
        } else {
            Err(DiskError::OutsideDisk { modulus: w.norm() })
        }
    }

    pub fn coords(&self) -> Complex64 {
        self.w
    }
}

// ---------------------------------------------------------------------------
// Adaptive Gauss-Kronrod 7/15 quadrature.
// ---------------------------------------------------------------------------

/// Kronrod-15 abscissae (positive half; even indices are the embedded
/// Gauss-7 nodes) and weights, with the Gauss-7 weights alongside.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_2,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One Gauss-Kronrod 7/15 panel: returns `(kronrod value, |K - G| error
/// estimate)`, both already scaled by the panel half-width. Summation order
/// is fixed (outermost pair inward), so results are bitwise deterministic.
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for i in 0..7 {
        let pair = f(c - h * XGK[i]) + f(c + h * XGK[i]);
        k += WGK[i] * pair;
        if i % 2 == 1 {
            g += WG[i / 2] * pair;
        }
    }
    (k * h, (k - g).abs() * h)
}

const MAX_DEPTH: u32 = 52;

fn adaptive<F: Fn(f64) -> f64 + Sync>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let (value, err) = gk15(f, a, b);
    if err <= tol || depth >= MAX_DEPTH {
        return value;
    }
    let m = 0.5 * (a + b);
    if depth < 3 {
        // Parallel panels; the `left + right` combination order is fixed, so
        // the sum does not depend on scheduling.
        let (l, r) = rayon::join(
            || adaptive(f, a, m, 0.5 * tol, depth + 1),
            || adaptive(f, m, b, 0.5 * tol, depth + 1),
        );
        l + r
    } else {
        adaptive(f, a, m, 0.5 * tol, depth + 1) + adaptive(f, m, b, 0.5 * tol, depth + 1)
    }
}

/// Adaptive quadrature over consecutive panels `[breaks[0], breaks[1]], ...`
/// to absolute tolerance `tol`. Callers place known singular points on the
/// breakpoints: the rule's nodes are interior, so a singular corner is never
/// evaluated, and bisection resolves the integrable blowup next to it.
pub(crate) fn integrate<F: Fn(f64) -> f64 + Sync>(f: &F, breaks: &[f64], tol: f64) -> f64 {
    let total: f64 = breaks[breaks.len() - 1] - breaks[0];
    let mut sum = 0.0;
    for w in breaks.windows(2) {
        let share = tol * ((w[1] - w[0]) / total).max(f64::MIN_POSITIVE);
        sum += adaptive(f, w[0], w[1], share, 0);
    }
    sum
}

// ---------------------------------------------------------------------------
// Green's function and the ring identity.
// ---------------------------------------------------------------------------

/// Positive Green's function of the unit disk. Zero boundary values,
/// symmetric, with the logarithmic pole at `x = y` reported as an error.
pub fn green_disk(x: DiskPoint, y: DiskPoint) -> Result<f64, DiskError> {
    if x.w == y.w {
        return Err(DiskError::Coincident);
    }
    let r = x.w.norm();
    if r == 0.0 {
        // Limit form: the reflected point runs off to infinity but the
        // product |x|^2 |y - x/|x|^2|^2 tends to 1.
        return Ok(-y.w.norm().ln() / (2.0 * std::f64::consts::PI));
    }
    let reflected = x.w / (r * r);
    let num = r * r * (y.w - reflected).norm_sqr();
    let den = (x.w - y.w).norm_sqr();
    Ok((num / den).ln() / (4.0 * std::f64::consts::PI))
}

/// `I(a, b) = int_0^{2 pi} ln(a^2 + b^2 - 2 a b cos t) dt` by quadrature;
/// equals `4 pi max(ln a, ln b)`. The integrand is written as
/// `(a - b)^2 + 4 a b sin^2(t/2)` to avoid cancellation, and the panels
/// split at `t = pi` so the `a = b` singularity sits on panel corners.
pub fn ring_integral(aa: f64, bb: f64) -> f64 {
    let pi = std::f64::consts::PI;
    let f = |t: f64| {
        let s = (0.5 * t).sin();
        ((aa - bb) * (aa - bb) + 4.0 * aa * bb * s * s).ln()
    };
    integrate(&f, &[0.0, pi, 2.0 * pi], 1e-9)
}

// ---------------------------------------------------------------------------
// The radial profile phi, three ways.
// ---------------------------------------------------------------------------

/// The shipped closed form `phi(R) = (1 - R^2)(2 R^4 - 7 R^2 + 11) / 72`,
/// validated against both quadrature routes; `phi(1) = 0` is exact by the
/// factoring.
pub fn phi(r: f64) -> f64 {
    let u = r * r;
    (1.0 - u) * ((2.0 * u - 7.0) * u + 11.0) / 72.0
}

/// The 1D reduction `-int_0^1 r (1 - r^2)^2 max(ln r, ln R) dr` by
/// quadrature, panels split at the kink `r = R`.
pub fn phi_quad_1d(big_r: f64) -> f64 {
    if big_r == 0.0 {
        let f = |r: f64| -r * (1.0 - r * r) * (1.0 - r * r) * r.ln();
        return integrate(&f, &[0.0, 1.0], 1e-10);
    }
    let lnr = big_r.ln();
    let f = move |r: f64| -r * (1.0 - r * r) * (1.0 - r * r) * r.ln().max(lnr);
    integrate(&f, &[0.0, big_r, 1.0], 1e-10)
}

/// The ring average of the Green's function at radii `(big_r, s)`: the inner
/// angular integral of the 2D route, with the stable split
/// `|1 - s R e^{it}|^2 = (1 - s R)^2 + 4 s R sin^2(t/2)`.
fn green_ring(big_r: f64, s: f64) -> f64 {
    let pi = std::f64::consts::PI;
    if big_r == 0.0 {
        // 2 pi times the constant ring value -ln(s)/(2 pi).
        return -s.ln();
    }
    let f = move |t: f64| {
        let halfsin = (0.5 * t).sin();
        let cross = 4.0 * s * big_r * halfsin * halfsin;
        let num = (1.0 - s * big_r) * (1.0 - s * big_r) + cross;
        let den = (s - big_r) * (s - big_r) + cross;
        (num / den).ln() / (4.0 * pi)
    };
    // Half circle, doubled by symmetry; the t = 0 singular corner (when
    // s = R) is a panel endpoint.
    2.0 * integrate(&f, &[0.0, pi], 1e-10)
}

/// Direct 2D quadrature of `int_D G((R,0), y) (1 - |y|^2)^2 dA(y)` in polar
/// coordinates: the slowest route and the one with no algebra shared with
/// the others.
pub fn phi_quad_2d(big_r: f64) -> f64 {
    let f = move |s: f64| s * (1.0 - s * s) * (1.0 - s * s) * green_ring(big_r, s);
    if big_r == 0.0 || big_r >= 1.0 {
        integrate(&f, &[0.0, 1.0], 1e-9)
    } else {
        integrate(&f, &[0.0, big_r, 1.0], 1e-9)
    }
}

/// A log-bearing closed expression that circulates for the same profile:
/// `1/6 - (R^2/2) ln R - (R^4/8)(4 ln R - 1) - (R^6/36)(6 ln R - 1)`.
/// It fails the forced boundary value (`23/72` at `R = 1` instead of `0`),
/// so it is carried only so the deviation can be reported; it is never an
/// anchor. See [`phi`] for the validated form.
pub fn phi_display_variant(r: f64) -> f64 {
    if r == 0.0 {
        return 1.0 / 6.0;
    }
    let u = r * r;
    let lnr = r.ln();
    1.0 / 6.0 - u / 2.0 * lnr - u * u / 8.0 * (4.0 * lnr - 1.0)
        - u * u * u / 36.0 * (6.0 * lnr - 1.0)
}

// ---------------------------------------------------------------------------
// The integrated inequality.
// ---------------------------------------------------------------------------

/// Which reading of the gradient normalization `gamma(y; grad y)` the
/// right-hand side uses; the inequality must hold under both.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GradientConvention {
    /// `gamma = 1`: rhs is `p^p 2 pi / (p + 2)`.
    GradUnit,
    /// `gamma = 1 - |y|^2`: rhs is `p^p 2 pi int_0^1 s^{p+1}(1-s^2)^{p/2} ds`.
    GradSq,
}

#[derive(Clone, Copy, Debug)]
pub struct InequalityReport {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// The integrated bound `2 pi int_0^1 phi(R)^p R dR <= p^p int_D |y|^p
/// gamma^{p/2} dA` for one exponent and one gradient convention.
pub fn disk_inequality(
    p: f64,
    convention: GradientConvention,
) -> Result<InequalityReport, DiskError> {
    if !(p >= 2.0) {
        return Err(DiskError::BadParams { what: "exponent p must be >= 2" });
    }
    let pi = std::f64::consts::PI;
    let lhs_f = move |r: f64| phi(r).powf(p) * r;
    let lhs = 2.0 * pi * integrate(&lhs_f, &[0.0, 1.0], 1e-12);
    let rhs = match convention {
        GradientConvention::GradUnit => p.powf(p) * 2.0 * pi / (p + 2.0),
        GradientConvention::GradSq => {
            let f = move |s: f64| s.powf(p + 1.0) * (1.0 - s * s).powf(0.5 * p);
            p.powf(p) * 2.0 * pi * integrate(&f, &[0.0, 1.0], 1e-12)
        }
    };
    Ok(InequalityReport { lhs, rhs, holds: lhs <= rhs })
}

// ---------------------------------------------------------------------------
// Heat-kernel lower bound and pinched-curvature constants.
// ---------------------------------------------------------------------------

/// Parameters of the comparison bounds: dimension `n`, curvature pinches
/// `-b^2 <= k <= -a^2`, integrability exponent `p`, heat time `t`, geodesic
/// distance `r`.
#[derive(Clone, Copy, Debug)]
pub struct BoundsParams {
    pub n: u32,
    pub a: f64,
    pub b: f64,
    pub p: f64,
    pub t: f64,
    pub r: f64,
}

impl BoundsParams {
    pub fn new(n: u32, a: f64, b: f64, p: f64, t: f64, r: f64) -> Result<Self, DiskError> {
        if n < 1 {
            return Err(DiskError::BadParams { what: "dimension n must be >= 1" });
        }
        if !(a > 0.0) || !(b > 0.0) {
            return Err(DiskError::BadParams { what: "pinches a, b must be positive" });
        }
        if !(p >= 2.0) {
            return Err(DiskError::BadParams { what: "exponent p must be >= 2" });
        }
        if !(t > 0.0) {
            return Err(DiskError::BadParams { what: "heat time t must be positive" });
        }
        if !(r >= 0.0) {
            return Err(DiskError::BadParams { what: "distance r must be nonnegative" });
        }
        Ok(BoundsParams { n, a, b, p, t, r })
    }
}

/// Heat-kernel lower bound on a manifold with `k >= -b^2`:
///
/// ```text
///   h(t, r) = (2 pi t)^{-n} exp[ -r^2/2t - (2n-1)^2 b^2 t / 8 - (2n-1) b r / 2 ]
///             . (1 + b r + b^2 t / 2)^{(2n-1)/2 - 1} (1 + b r),
/// ```
///
/// evaluated in log space so extreme arguments underflow to `0` (or
/// overflow to infinity for `t -> 0`) instead of producing NaN.
pub fn heat_lower_bound(params: &BoundsParams) -> f64 {
    let n = f64::from(params.n);
    let (b, t, r) = (params.b, params.t, params.r);
    let m = 2.0 * n - 1.0;
    let log_h = -n * (2.0 * std::f64::consts::PI * t).ln()
        + (-r * r / (2.0 * t) - m * m * b * b * t / 8.0 - m * b * r / 2.0)
        + (0.5 * m - 1.0) * (1.0 + b * r + b * b * t / 2.0).ln()
        + (1.0 + b * r).ln();
    log_h.exp()
}

/// The four displayed constants of the pinched-curvature comparisons.
#[derive(Clone, Copy, Debug)]
pub struct PinchedConstants {
    pub poincare: f64,
    pub mckean_lambda1: f64,
    pub cheng_cp: f64,
    pub thm_constant: f64,
}

/// Poincaré constant `4 / ((n-1)^2 a^2)` under `k <= -a^2`; requires
/// `n >= 2`.
pub fn poincare_constant(n: u32, a: f64) -> Result<f64, DiskError> {
    if n < 2 {
        return Err(DiskError::DimensionTooSmall);
    }
    if !(a > 0.0) {
        return Err(DiskError::BadParams { what: "pinch a must be positive" });
    }
    let m = f64::from(n) - 1.0;
    Ok(4.0 / (m * m * a * a))
}

/// McKean spectral bound `lambda_1 >= (n-1)^2 a^2 / 4`; requires `n >= 2`.
pub fn mckean_lambda1(n: u32, a: f64) -> Result<f64, DiskError> {
    if n < 2 {
        return Err(DiskError::DimensionTooSmall);
    }
    if !(a > 0.0) {
        return Err(DiskError::BadParams { what: "pinch a must be positive" });
    }
    let m = f64::from(n) - 1.0;
    Ok(m * m * a * a / 4.0)
}

/// The `L^p` spectral constant `C_p = (p^2 / (4 lambda_1))^{p/2}`, inverse
/// to the bound `(4 lambda_1 / p^2)^{p/2} int |u|^p <= int |grad u|^p`.
pub fn cheng_cp(p: f64, lambda1: f64) -> Result<f64, DiskError> {
    if !(p >= 2.0) {
        return Err(DiskError::BadParams { what: "exponent p must be >= 2" });
    }
    if !(lambda1 > 0.0) {
        return Err(DiskError::BadParams { what: "lambda_1 must be positive" });
    }
    Ok((p * p / (4.0 * lambda1)).powf(0.5 * p))
}

/// The main-theorem constant `(p / ((2n-1) a))^p`; meaningful for every
/// `n >= 1`.
pub fn thm_constant(n: u32, a: f64, p: f64) -> Result<f64, DiskError> {
    if n < 1 {
        return Err(DiskError::BadParams { what: "dimension n must be >= 1" });
    }
    if !(a > 0.0) {
        return Err(DiskError::BadParams { what: "pinch a must be positive" });
    }
    if !(p >= 2.0) {
        return Err(DiskError::BadParams { what: "exponent p must be >= 2" });
    }
    Ok((p / ((2.0 * f64::from(n) - 1.0) * a)).powf(p))
}

/// All four constants at once; `n = 1` is rejected because the Poincaré and
/// McKean displays divide by `n - 1` (use [`thm_constant`] directly for
/// the `n = 1` theorem constant).
pub fn constants(n: u32, a: f64, p: f64) -> Result<PinchedConstants, DiskError> {
    let poincare = poincare_constant(n, a)?;
    let lambda1 = mckean_lambda1(n, a)?;
    Ok(PinchedConstants {
        poincare,
        mckean_lambda1: lambda1,
        cheng_cp: cheng_cp(p, lambda1)?,
        thm_constant: thm_constant(n, a, p)?,
    })
}
