//! The domain family and its Bergman kernel.
//!
//! ```text
//!   E = { (x, y, z) in C^3 : (|x|^(2p) + |y|^2)^(1/lambda) + |z|^2 < 1 }
//! ```
//!
//! with `p, lambda > 0`. The kernel `B` is an explicit rational expression in
//! the rotation-invariant coordinates `nu_i = |z_i|^2` built from
//!
//! ```text
//!   a = 1 - nu_3,   b = a^lambda - nu_2,   c = b^(1/p) - nu_1,
//! ```
//!
//! six monomials `N_i` and six polynomial coefficients `u_i(p, lambda)`. Two
//! independent evaluation paths are provided: the four-term expanded display
//! ([`DomainParams::bergman_kernel`]) and the factored `N/(pi^3 p^2 D)` form
//! ([`DomainParams::kernel_factored`]); their agreement is a standing test.
//!
//! All real powers act on strictly positive bases (`a, b > 0` on the
//! interior), so no branch cuts arise.

use num_complex::Complex64;
use thiserror::Error;

use crate::diffengine::{self, DiffConfig, ScalarField};
use crate::hermitian::{Hermitian3, MatrixRole};
use crate::jets::{Jet3, JetError};

/// Evaluations are refused when `b` or `c` drops below this: `b^(1/p - 3)`
/// overflows and the formula loses all significance.
pub const BOUNDARY_FLOOR: f64 = 1e-12;

/// Hyperplane exclusion radius for plurisubharmonicity probes: the proof's
/// potentials carry log |x|, log |y| singularities.
pub const SINGULAR_RADIUS: f64 = 1e-3;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum DomainError {
    #[error("parameters must be positive finite reals, got p = {p}, lambda = {lambda}")]
    BadParams { p: f64, lambda: f64 },
    #[error("point lies outside the domain (membership defect {defect:.3e})")]
    OutsideDomain { defect: f64 },
    #[error("too close to the boundary for reliable evaluation (b = {b:.3e}, c = {c:.3e})")]
    NearBoundary { b: f64, c: f64 },
    #[error("point within {SINGULAR_RADIUS:.0e} of the singular locus {{{locus} = 0}}")]
    SingularLocus { locus: &'static str },
    #[error("negative nu coordinate {0:.3e}")]
    NegativeNu(f64),
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error(transparent)]
    Diff(#[from] diffengine::DiffError),
}

/// The shape parameters `(p, lambda)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DomainParams {
    p: f64,
    lambda: f64,
}

/// The six kernel coefficients, polynomial in `(p, lambda)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UConstants {
    pub u1: f64,
    pub u2: f64,
    pub u3: f64,
    pub u4: f64,
    pub u5: f64,
    pub u6: f64,
}

impl UConstants {
    pub fn as_array(&self) -> [f64; 6] {
        [self.u1, self.u2, self.u3, self.u4, self.u5, self.u6]
    }

    /// Residuals of the two sum identities `u1+u3+u5 = 6 lambda` and
    /// `u2+u4+u6 = 0`, each normalized by `max(1, sum of |terms|)`. The even
    /// identity sums to exactly zero and the odd one cancels catastrophically
    /// for extreme parameters, so plain relative error against the target is
    /// not meaningful; normalizing by the term magnitudes is.
    pub fn sum_residuals(&self, lambda: f64) -> (f64, f64) {
        let odd = (self.u1 + self.u3 + self.u5 - 6.0 * lambda).abs()
            / (self.u1.abs() + self.u3.abs() + self.u5.abs()).max(1.0);
        let even = (self.u2 + self.u4 + self.u6).abs()
            / (self.u2.abs() + self.u4.abs() + self.u6.abs()).max(1.0);
        (odd, even)
    }
}

/// A point `nu = (|x|^2, |y|^2, |z|^2)` in the Reinhardt shadow.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NuPoint {
    pub nu1: f64,
    pub nu2: f64,
    pub nu3: f64,
}

impl NuPoint {
    pub fn new(nu1: f64, nu2: f64, nu3: f64) -> Result<Self, DomainError> {
        for v in [nu1, nu2, nu3] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(DomainError::NegativeNu(v));
            }
        }
        Ok(NuPoint { nu1, nu2, nu3 })
    }

    pub fn from_point(z: [Complex64; 3]) -> Self {
        NuPoint { nu1: z[0].norm_sqr(), nu2: z[1].norm_sqr(), nu3: z[2].norm_sqr() }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.nu1, self.nu2, self.nu3]
    }
}

/// A point of the real 2-dimensional slice `x = 0`, `y, z` real and
/// nonnegative, carrying the derived boundary quantities. On this slice
/// `nu_1 = 0`, so `c = b^(1/p)`.
#[derive(Clone, Copy, Debug)]
pub struct SlicePoint {
    pub y: f64,
    pub z: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub delta: f64,
}

impl SlicePoint {
    pub fn new(params: &DomainParams, y: f64, z: f64) -> Result<Self, DomainError> {
        if !(0.0..1.0).contains(&y) || !(0.0..1.0).contains(&z) {
            return Err(DomainError::OutsideDomain { defect: (y * y + z * z) - 1.0 });
        }
        let a = 1.0 - z * z;
        let al = a.powf(params.lambda);
        let b = al - y * y;
        let delta = y * y / al;
        if b <= 0.0 {
            return Err(DomainError::OutsideDomain { defect: -b });
        }
        if b < BOUNDARY_FLOOR {
            return Err(DomainError::NearBoundary { b, c: b.powf(1.0 / params.p) });
        }
        let c = b.powf(1.0 / params.p);
        Ok(SlicePoint { y, z, a, b, c, delta })
    }

    /// The complex point this slice point represents.
    pub fn point(&self) -> [Complex64; 3] {
        [
            Complex64::new(0.0, 0.0),
            Complex64::new(self.y, 0.0),
            Complex64::new(self.z, 0.0),
        ]
    }

    pub fn nu(&self) -> NuPoint {
        NuPoint { nu1: 0.0, nu2: self.y * self.y, nu3: self.z * self.z }
    }
}

/// Scratch for the kernel building blocks at a `nu` point.
#[derive(Clone, Copy, Debug)]
struct Abc {
    a: f64,
    b: f64,
    c: f64,
}

impl DomainParams {
    pub fn new(p: f64, lambda: f64) -> Result<Self, DomainError> {
        if p > 0.0 && lambda > 0.0 && p.is_finite() && lambda.is_finite() {
            Ok(DomainParams { p, lambda })
        } else {
            Err(DomainError::BadParams { p, lambda })
        }
    }

    #[inline]
    pub fn p(&self) -> f64 {
        self.p
    }

    #[inline]
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// `(|x|^(2p) + |y|^2)^(1/lambda) + |z|^2 - 1`; negative iff interior.
    pub fn membership_defect(&self, z: [Complex64; 3]) -> f64 {
        self.membership_defect_nu(&NuPoint::from_point(z))
    }

    pub fn membership_defect_nu(&self, nu: &NuPoint) -> f64 {
        (nu.nu1.powf(self.p) + nu.nu2).powf(1.0 / self.lambda) + nu.nu3 - 1.0
    }

    pub fn contains(&self, z: [Complex64; 3]) -> bool {
        self.membership_defect(z) < 0.0
    }

    pub fn u_constants(&self) -> UConstants {
        let (p, l) = (self.p, self.lambda);
        UConstants {
            u1: (p - 1.0) * (l * (p - 1.0) + p),
            u2: p * (p - 1.0) * (l - 1.0),
            u3: (p + 1.0) * (l + l * p + p),
            u4: p * (p + 1.0) * (l - 1.0),
            u5: -2.0 * (l * (p * p - 2.0) + p * p),
            u6: -2.0 * (l - 1.0) * p * p,
        }
    }

    fn abc(&self, nu: &NuPoint) -> Result<Abc, DomainError> {
        let a = 1.0 - nu.nu3;
        if a <= 0.0 {
            return Err(DomainError::OutsideDomain { defect: self.membership_defect_nu(nu) });
        }
        let b = a.powf(self.lambda) - nu.nu2;
        if b <= 0.0 {
            return Err(DomainError::OutsideDomain { defect: self.membership_defect_nu(nu) });
        }
        let t = b.powf(1.0 / self.p);
        let c = t - nu.nu1;
        if c <= 0.0 {
            return Err(DomainError::OutsideDomain { defect: self.membership_defect_nu(nu) });
        }
        // b is a difference of order-one quantities, so an absolute floor
        // caps its cancellation error; c cancels against t, so its floor is
        // relative (on the slice nu_1 = 0 and c = t is exact however small).
        if b < BOUNDARY_FLOOR || c < BOUNDARY_FLOOR * t {
            return Err(DomainError::NearBoundary { b, c });
        }
        Ok(Abc { a, b, c })
    }

    /// Bergman kernel via the four-term expanded display. Each term carries
    /// its own powers of `a, b, c`, exactly as printed; this is one of the
    /// two independent evaluation paths.
    pub fn bergman_kernel(&self, nu: &NuPoint) -> Result<f64, DomainError> {
        let (p, l) = (self.p, self.lambda);
        let Abc { a, b, c, .. } = self.abc(nu)?;
        let pi3p2 = std::f64::consts::PI.powi(3) * p * p;
        let c4 = c.powi(4);
        let n1 = nu.nu1 * nu.nu1;
        let t1 = b.powf(1.0 / p - 3.0) * n1 * (p - 1.0) * (l * (p - 1.0) + p)
            / (a.powf(2.0 - 2.0 * l) * pi3p2 * c4);
        let t2 = a.powf(l - 2.0) * b.powf(1.0 / p - 3.0) * n1 * (p - 1.0) * (l - 1.0) * nu.nu2 * p
            / (pi3p2 * c4);
        let t3 = b.powf(3.0 / p - 3.0)
            * (p + 1.0)
            * (a.powf(l) * (l + l * p + p) + (l - 1.0) * nu.nu2 * p)
            / (a.powf(2.0 - l) * pi3p2 * c4);
        let t4 = b.powf(2.0 / p - 3.0)
            * 2.0
            * nu.nu1
            * (a.powf(l) * (l * (p * p - 2.0) + p * p) + (l - 1.0) * nu.nu2 * p * p)
            / (a.powf(2.0 - l) * pi3p2 * c4);
        Ok(t1 + t2 + t3 - t4)
    }

    /// The six monomials `N_i`; every odd-indexed one carries a `nu_1`
    /// factor, so they vanish on the slice `x = 0`.
    pub fn kernel_monomials(&self, nu: &NuPoint) -> Result<[f64; 6], DomainError> {
        let p = self.p;
        let l = self.lambda;
        let Abc { a, b, .. } = self.abc(nu)?;
        let al = a.powf(l);
        let a2l = a.powf(2.0 * l);
        let b13 = b.powf(1.0 / p - 3.0);
        let b33 = b.powf(3.0 / p - 3.0);
        let b23 = b.powf(2.0 / p - 3.0);
        let n1sq = nu.nu1 * nu.nu1;
        Ok([
            a2l * b13 * n1sq,
            al * b13 * n1sq * nu.nu2,
            a2l * b33,
            al * b33 * nu.nu2,
            a2l * b23 * nu.nu1,
            al * b23 * nu.nu1 * nu.nu2,
        ])
    }

    /// Factored kernel `B = N / (pi^3 p^2 D)` with `N = sum u_i N_i` and
    /// `D = a^2 c^4`. Returns `(N, D, B)`.
    pub fn kernel_factored(&self, nu: &NuPoint) -> Result<(f64, f64, f64), DomainError> {
        let Abc { a, c, .. } = self.abc(nu)?;
        let u = self.u_constants().as_array();
        let m = self.kernel_monomials(nu)?;
        let n: f64 = (0..6).map(|i| u[i] * m[i]).sum();
        let d = a * a * c.powi(4);
        Ok((n, d, n / (std::f64::consts::PI.powi(3) * self.p * self.p * d)))
    }

    /// Degree-4 Taylor jet of `log B` in the `nu` variables at `nu`: the
    /// exact-derivative backbone for the metric, curvature, and Ricci
    /// closed routes. Built by running the factored kernel formula in
    /// truncated Taylor arithmetic.
    pub fn log_kernel_jet(&self, nu: &NuPoint) -> Result<Jet3, DomainError> {
        self.abc(nu)?; // interior + conditioning guard
        self.kernel_jet_unguarded([nu.nu1, nu.nu2, nu.nu3])
    }

    /// Jet of `log B` at a raw `nu` triple whose entries may be slightly
    /// negative, extending the jet route real-analytically across `nu_i = 0`
    /// exactly as [`LogKernelField`] does for values. `None` outside the
    /// continued domain; used by stencil fields that straddle the slice.
    pub(crate) fn log_kernel_jet_raw(&self, nu: [f64; 3]) -> Option<Jet3> {
        self.log_kernel_field().eval_nu(nu)?;
        self.kernel_jet_unguarded(nu).ok()
    }

    fn kernel_jet_unguarded(&self, nu: [f64; 3]) -> Result<Jet3, DomainError> {
        let (p, l) = (self.p, self.lambda);
        let u = self.u_constants().as_array();
        let n1 = Jet3::var(nu[0], 0);
        let n2 = Jet3::var(nu[1], 1);
        let n3 = Jet3::var(nu[2], 2);
        let a = n3.neg().add_scalar(1.0);
        let al = a.powf(l)?;
        let a2l = al.mul(&al);
        let b = al.sub(&n2);
        let t = b.powf(1.0 / p)?;
        let c = t.sub(&n1);
        let b13 = b.powf(1.0 / p - 3.0)?;
        let b23 = b13.mul(&t);
        let b33 = b23.mul(&t);
        let n1sq = n1.mul(&n1);
        let monos = [
            a2l.mul(&b13).mul(&n1sq),
            al.mul(&b13).mul(&n1sq).mul(&n2),
            a2l.mul(&b33),
            al.mul(&b33).mul(&n2),
            a2l.mul(&b23).mul(&n1),
            al.mul(&b23).mul(&n1).mul(&n2),
        ];
        let mut n = Jet3::constant(0.0);
        for (ui, mi) in u.iter().zip(&monos) {
            n = n.add(&mi.scale(*ui));
        }
        let d = a.mul(&a).mul(&c.powi(2)).mul(&c.powi(2));
        let log_b = n
            .ln()?
            .sub(&d.ln()?)
            .add_scalar(-(std::f64::consts::PI.powi(3) * p * p).ln());
        Ok(log_b)
    }

    /// The scalar field `(x,y,z) -> log B(|x|^2, |y|^2, |z|^2)`: the
    /// differentiation target for every metric/curvature oracle.
    pub fn log_kernel_field(&self) -> LogKernelField {
        LogKernelField { params: *self }
    }

    /// Smallest eigenvalue of the complex Hessian of the exhaustion
    /// `u = (|x|^(2p) + |y|^2)^(1/lambda) + |z|^2` at `pt`, computed with the
    /// finite-difference engine. Pseudoconvexity predicts this is >= 0
    /// wherever `u` is smooth; the coordinate hyperplanes `x = 0`, `y = 0`
    /// are excluded (the exhaustion is continuous but not smooth there).
    pub fn psh_defect(&self, pt: [Complex64; 3], cfg: DiffConfig) -> Result<f64, DomainError> {
        if pt[0].norm() < SINGULAR_RADIUS {
            return Err(DomainError::SingularLocus { locus: "x" });
        }
        if pt[1].norm() < SINGULAR_RADIUS {
            return Err(DomainError::SingularLocus { locus: "y" });
        }
        let field = ExhaustionField { params: *self };
        let mut raw = [[Complex64::new(0.0, 0.0); 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let r = diffengine::wirtinger(
                    &field,
                    pt,
                    &diffengine::DerivRequest::metric(i, j),
                    cfg,
                )?;
                raw[i][j] = r.value;
            }
        }
        let (hess, _) = Hermitian3::from_general(raw, MatrixRole::Metric);
        Ok(hess.min_eigenvalue())
    }
}

/// `log B` as a differentiable scalar field. Rotation invariant, so the
/// Reinhardt mode applies; the `nu` representation extends real-analytically
/// across `nu_i = 0` (the formula is a composition of real powers of `a, b`,
/// both bounded away from 0 there), which is what lets centered stencils
/// straddle the slice.
#[derive(Clone, Copy, Debug)]
pub struct LogKernelField {
    params: DomainParams,
}

impl LogKernelField {
    pub fn params(&self) -> &DomainParams {
        &self.params
    }

    fn log_kernel_nu(&self, nu: [f64; 3]) -> Option<f64> {
        // Continuation-friendly evaluation: nu entries may be slightly
        // negative (stencils crossing 0). Only a, b, c, N > 0 matter.
        let (p, l) = (self.params.p, self.params.lambda);
        let a = 1.0 - nu[2];
        if a <= 0.0 {
            return None;
        }
        let b = a.powf(l) - nu[1];
        if b <= BOUNDARY_FLOOR {
            return None;
        }
        let t = b.powf(1.0 / p);
        let c = t - nu[0];
        // The hazard for c is cancellation against t, not small magnitude:
        // on the slice nu_1 = 0 the difference is exact however tiny c is.
        if c <= BOUNDARY_FLOOR * t {
            return None;
        }
        let u = self.params.u_constants().as_array();
        let al = a.powf(l);
        let a2l = al * al;
        let b13 = b.powf(1.0 / p - 3.0);
        let b23 = b13 * t;
        let b33 = b23 * t;
        let n1sq = nu[0] * nu[0];
        let n = u[0] * a2l * b13 * n1sq
            + u[1] * al * b13 * n1sq * nu[1]
            + u[2] * a2l * b33
            + u[3] * al * b33 * nu[1]
            + u[4] * a2l * b23 * nu[0]
            + u[5] * al * b23 * nu[0] * nu[1];
        if n <= 0.0 {
            return None;
        }
        let d = a * a * c.powi(4);
        Some(n.ln() - d.ln() - (std::f64::consts::PI.powi(3) * p * p).ln())
    }

    /// Per-axis safe travel in `nu`: the linearized distance each `nu_i`
    /// may move (toward the boundary) before one of `a`, `b`, `c` is fully
    /// consumed. Axis 1 only touches `c`; axis 2 drains `b` directly and
    /// `c` through `t = b^(1/p)`; axis 3 drains all three through `a`.
    fn nu_travels(&self, nu: [f64; 3]) -> [f64; 3] {
        let (p, l) = (self.params.p, self.params.lambda);
        let a = 1.0 - nu[2];
        if a <= 0.0 {
            return [0.0; 3];
        }
        let b = a.powf(l) - nu[1];
        if b <= 0.0 {
            return [0.0; 3];
        }
        let t = b.powf(1.0 / p);
        let c = t - nu[0];
        if c <= 0.0 {
            return [0.0; 3];
        }
        // |db/dnu_3| = s3 = lambda a^(lambda-1); |dc/db| = t/(p b).
        let s3 = l * a.powf(l - 1.0);
        let dcdb = t / (p * b);
        [
            c,
            b.min(c / dcdb),
            a.min(b / s3).min(c / (dcdb * s3)),
        ]
    }

    fn nu_margin(&self, nu: [f64; 3]) -> f64 {
        let t = self.nu_travels(nu);
        t[0].min(t[1]).min(t[2]) / 4.0
    }
}

impl ScalarField for LogKernelField {
    fn eval(&self, z: [Complex64; 3]) -> Option<f64> {
        self.eval_nu([z[0].norm_sqr(), z[1].norm_sqr(), z[2].norm_sqr()])
    }

    fn eval_nu(&self, nu: [f64; 3]) -> Option<f64> {
        self.log_kernel_nu(nu)
    }

    fn rotation_invariant(&self) -> bool {
        true
    }

    fn step_bound_nu_axes(&self, nu: [f64; 3]) -> [f64; 3] {
        self.nu_travels(nu)
    }

    fn step_bound_z(&self, z: [Complex64; 3]) -> f64 {
        // A coordinate excursion e moves nu_j by at most e(2|z_j| + e);
        // invert that against the nu margin.
        let m = self.nu_margin([z[0].norm_sqr(), z[1].norm_sqr(), z[2].norm_sqr()]);
        if m <= 0.0 {
            return 0.0;
        }
        let r = z.iter().map(|w| w.norm()).fold(0.0f64, f64::max);
        (r * r + m).sqrt() - r
    }
}

/// The exhaustion `u = (|x|^(2p) + |y|^2)^(1/lambda) + |z|^2` as a field,
/// used by the plurisubharmonicity probe. Smooth away from `x = 0`, `y = 0`.
#[derive(Clone, Copy, Debug)]
struct ExhaustionField {
    params: DomainParams,
}

impl ScalarField for ExhaustionField {
    fn eval(&self, z: [Complex64; 3]) -> Option<f64> {
        let w = z[0].norm_sqr().powf(self.params.p) + z[1].norm_sqr();
        Some(w.powf(1.0 / self.params.lambda) + z[2].norm_sqr())
    }

    fn step_bound_z(&self, z: [Complex64; 3]) -> f64 {
        // Keep stencils clear of the singular hyperplanes.
        0.4 * z[0].norm().min(z[1].norm())
    }
}
