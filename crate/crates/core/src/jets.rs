//! Truncated Taylor arithmetic in three real variables, degree <= 4.
//!
//! A [`Jet3`] carries the Taylor coefficients of a smooth function at a base
//! point, so arithmetic on jets propagates *exact* derivatives (up to f64
//! rounding) through any composition of `+`, `*`, `1/x`, `ln`, and real
//! powers. That is all the kernel formula needs, and fourth order is exactly
//! the derivative depth the curvature tensor consumes.
//!
//! Truncation is closed under these operations, so unlike finite differences
//! there is no step-size tuning and no truncation error; results are bit-for-
//! bit deterministic.

use thiserror::Error;

/// Maximum total degree carried by a jet.
pub const DEG: usize = 4;
/// Number of trivariate monomials of total degree <= 4.
pub const LEN: usize = 35;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum JetError {
    #[error("analytic operation on non-positive base value {0:.3e}")]
    NonPositiveBase(f64),
}

/// Monomial exponents in a fixed order: total degree major, then
/// lexicographic in (i, j, k).
pub const MONOMIALS: [(u8, u8, u8); LEN] = build_monomials();

const fn build_monomials() -> [(u8, u8, u8); LEN] {
    let mut out = [(0u8, 0u8, 0u8); LEN];
    let mut n = 0;
    let mut d = 0usize;
    while d <= DEG {
        let mut i = 0usize;
        while i <= d {
            let mut j = 0usize;
            while i + j <= d {
                let k = d - i - j;
                out[n] = (i as u8, j as u8, k as u8);
                n += 1;
                j += 1;
            }
            i += 1;
        }
        d += 1;
    }
    out
}

/// Reverse lookup: exponents -> coefficient slot.
const INDEX: [[[usize; DEG + 1]; DEG + 1]; DEG + 1] = build_index();

const fn build_index() -> [[[usize; DEG + 1]; DEG + 1]; DEG + 1] {
    let mut table = [[[usize::MAX; DEG + 1]; DEG + 1]; DEG + 1];
    let mut n = 0;
    while n < LEN {
        let (i, j, k) = MONOMIALS[n];
        table[i as usize][j as usize][k as usize] = n;
        n += 1;
    }
    table
}

#[inline]
pub fn index_of(i: usize, j: usize, k: usize) -> usize {
    INDEX[i][j][k]
}

const FACTORIAL: [f64; DEG + 1] = [1.0, 1.0, 2.0, 6.0, 24.0];

/// Degree-4 Taylor jet of a function of three variables.
#[derive(Clone, Copy, Debug)]
pub struct Jet3 {
    c: [f64; LEN],
}

impl Jet3 {
    pub fn constant(v: f64) -> Self {
        let mut c = [0.0; LEN];
        c[0] = v;
        Jet3 { c }
    }

    /// The coordinate function `value + t_axis`.
    pub fn var(value: f64, axis: usize) -> Self {
        assert!(axis < 3);
        let mut c = [0.0; LEN];
        c[0] = value;
        let e = match axis {
            0 => index_of(1, 0, 0),
            1 => index_of(0, 1, 0),
            _ => index_of(0, 0, 1),
        };
        c[e] = 1.0;
        Jet3 { c }
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.c[0]
    }

    #[inline]
    pub fn coeff(&self, i: usize, j: usize, k: usize) -> f64 {
        self.c[index_of(i, j, k)]
    }

    /// Partial derivative `d^(i+j+k) f / dx^i dy^j dz^k` at the base point.
    #[inline]
    pub fn partial(&self, i: usize, j: usize, k: usize) -> f64 {
        self.c[index_of(i, j, k)] * FACTORIAL[i] * FACTORIAL[j] * FACTORIAL[k]
    }

    /// All partial derivatives, indexed like the coefficients.
    pub fn derivative_table(&self) -> NuDerivatives {
        let mut d = [0.0; LEN];
        for (n, &(i, j, k)) in MONOMIALS.iter().enumerate() {
            d[n] = self.c[n] * FACTORIAL[i as usize] * FACTORIAL[j as usize] * FACTORIAL[k as usize];
        }
        NuDerivatives { d }
    }

    /// The jet of the partial derivative along one axis. The result is one
    /// degree shorter: its top-degree coefficients are zeros, so only use
    /// it where total degree `DEG - 1` suffices.
    pub fn partial_jet(&self, axis: usize) -> Jet3 {
        let mut out = [0.0; LEN];
        for (n, &(i, j, k)) in MONOMIALS.iter().enumerate() {
            let mut e = [i as usize, j as usize, k as usize];
            if e[axis] == 0 {
                continue;
            }
            let factor = e[axis] as f64;
            e[axis] -= 1;
            out[index_of(e[0], e[1], e[2])] = self.c[n] * factor;
        }
        Jet3 { c: out }
    }

    pub fn add(&self, o: &Jet3) -> Jet3 {
        let mut c = self.c;
        for n in 0..LEN {
            c[n] += o.c[n];
        }
        Jet3 { c }
    }

    pub fn sub(&self, o: &Jet3) -> Jet3 {
        let mut c = self.c;
        for n in 0..LEN {
            c[n] -= o.c[n];
        }
        Jet3 { c }
    }

    pub fn neg(&self) -> Jet3 {
        let mut c = self.c;
        for e in &mut c {
            *e = -*e;
        }
        Jet3 { c }
    }

    pub fn scale(&self, s: f64) -> Jet3 {
        let mut c = self.c;
        for e in &mut c {
            *e *= s;
        }
        Jet3 { c }
    }

    pub fn add_scalar(&self, s: f64) -> Jet3 {
        let mut c = self.c;
        c[0] += s;
        Jet3 { c }
    }

    pub fn mul(&self, o: &Jet3) -> Jet3 {
        let mut c = [0.0; LEN];
        for (na, &(i1, j1, k1)) in MONOMIALS.iter().enumerate() {
            let a = self.c[na];
            if a == 0.0 {
                continue;
            }
            for (nb, &(i2, j2, k2)) in MONOMIALS.iter().enumerate() {
                let (i, j, k) = ((i1 + i2) as usize, (j1 + j2) as usize, (k1 + k2) as usize);
                if i + j + k <= DEG {
                    c[INDEX[i][j][k]] += a * o.c[nb];
                }
            }
        }
        Jet3 { c }
    }

    pub fn powi(&self, n: u32) -> Jet3 {
        let mut acc = Jet3::constant(1.0);
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    /// Compose with an analytic `f`, given `coeffs[m] = f^(m)(value)/m!`.
    /// Horner evaluation in the zero-constant part of the jet.
    fn compose(&self, coeffs: [f64; DEG + 1]) -> Jet3 {
        let mut e = *self;
        e.c[0] = 0.0;
        let mut r = Jet3::constant(coeffs[DEG]);
        for m in (0..DEG).rev() {
            r = r.mul(&e).add_scalar(coeffs[m]);
        }
        r
    }

    pub fn recip(&self) -> Result<Jet3, JetError> {
        let u = self.c[0];
        if u == 0.0 || !u.is_finite() {
            return Err(JetError::NonPositiveBase(u));
        }
        let mut coeffs = [0.0; DEG + 1];
        let mut t = 1.0 / u;
        for c in &mut coeffs {
            *c = t;
            t *= -1.0 / u;
        }
        Ok(self.compose(coeffs))
    }

    pub fn ln(&self) -> Result<Jet3, JetError> {
        let u = self.c[0];
        if u <= 0.0 || !u.is_finite() {
            return Err(JetError::NonPositiveBase(u));
        }
        let mut coeffs = [0.0; DEG + 1];
        coeffs[0] = u.ln();
        for (m, c) in coeffs.iter_mut().enumerate().skip(1) {
            // f^(m)/m! = (-1)^(m+1) / (m u^m)
            let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
            *c = sign / (m as f64 * u.powi(m as i32));
        }
        Ok(self.compose(coeffs))
    }

    /// Real power `u^alpha` with `u > 0`.
    pub fn powf(&self, alpha: f64) -> Result<Jet3, JetError> {
        let u = self.c[0];
        if u <= 0.0 || !u.is_finite() {
            return Err(JetError::NonPositiveBase(u));
        }
        let mut coeffs = [0.0; DEG + 1];
        // coeffs[m] = binom(alpha, m) * u^(alpha - m)
        let mut binom = 1.0;
        for (m, c) in coeffs.iter_mut().enumerate() {
            *c = binom * u.powf(alpha - m as f64);
            binom *= (alpha - m as f64) / (m as f64 + 1.0);
        }
        Ok(self.compose(coeffs))
    }

    pub fn exp(&self) -> Jet3 {
        let e0 = self.c[0].exp();
        let mut coeffs = [0.0; DEG + 1];
        for (m, c) in coeffs.iter_mut().enumerate() {
            *c = e0 / FACTORIAL[m];
        }
        self.compose(coeffs)
    }
}

/// A table of partial derivatives at a point, in the monomial order of
/// [`MONOMIALS`]. Produced either exactly (from a [`Jet3`]) or numerically
/// (finite differences); consumed by the Wirtinger chain rule.
#[derive(Clone, Copy, Debug)]
pub struct NuDerivatives {
    d: [f64; LEN],
}

impl NuDerivatives {
    pub fn from_table(d: [f64; LEN]) -> Self {
        NuDerivatives { d }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.d[index_of(i, j, k)]
    }

    pub fn table(&self) -> &[f64; LEN] {
        &self.d
    }
}
