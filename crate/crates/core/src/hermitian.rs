//! Dense 3x3 complex Hermitian matrices.
//!
//! Everything the toolkit needs from linear algebra lives here: determinants,
//! adjugate inverses, eigenvalues of Hermitian matrices via the trigonometric
//! solution of the (real) characteristic cubic, and the sesquilinear pairing
//! `<v, w> = sum_{i,j} m[i][j] v_i conj(w_j)`. Sizes are fixed at 3, so the
//! closed forms are both faster and easier to audit than a general solver.

use num_complex::Complex64;
use thiserror::Error;

/// What a matrix means to the caller. Purely a bookkeeping tag: it travels
/// through [`Hermitian3::inverse`] (Metric <-> InverseMetric) and shows up in
/// debug output, but never changes numerics.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatrixRole {
    Metric,
    InverseMetric,
    Ricci,
}

#[derive(Error, Debug, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix is numerically singular (det = {det:.3e})")]
    Singular { det: f64 },
    #[error("matrix is not positive definite (leading minors {minors:?})")]
    NotPositiveDefinite { minors: [f64; 3] },
}

/// Hermitian 3x3 matrix. Invariant: `m[j][i] == conj(m[i][j])` and the
/// diagonal is real; both are enforced by construction.
#[derive(Clone, Copy, Debug)]
pub struct Hermitian3 {
    m: [[Complex64; 3]; 3],
    pub role: MatrixRole,
}

impl Hermitian3 {
    /// Build from the real diagonal and the strict upper triangle
    /// `upper = (m01, m02, m12)`; the lower triangle is conjugated in.
    pub fn from_upper(diag: [f64; 3], upper: [Complex64; 3], role: MatrixRole) -> Self {
        let [d0, d1, d2] = diag;
        let [u01, u02, u12] = upper;
        let m = [
            [Complex64::new(d0, 0.0), u01, u02],
            [u01.conj(), Complex64::new(d1, 0.0), u12],
            [u02.conj(), u12.conj(), Complex64::new(d2, 0.0)],
        ];
        Hermitian3 { m, role }
    }

    /// Hermitize a general matrix as `(a + a^H)/2` and report the largest
    /// entrywise deviation `max |a - a^H|` (useful as a symmetry residual for
    /// matrices assembled entry by entry from independent computations).
    pub fn from_general(a: [[Complex64; 3]; 3], role: MatrixRole) -> (Self, f64) {
        let mut m = [[Complex64::new(0.0, 0.0); 3]; 3];
        let mut residual = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                let sym = 0.5 * (a[i][j] + a[j][i].conj());
                residual = residual.max((a[i][j] - a[j][i].conj()).norm());
                m[i][j] = sym;
            }
        }
        // Force exactly-real diagonal; deviation is already in `residual`.
        for i in 0..3 {
            m[i][i] = Complex64::new(m[i][i].re, 0.0);
        }
        (Hermitian3 { m, role }, residual)
    }

    pub fn zero(role: MatrixRole) -> Self {
        Hermitian3 { m: [[Complex64::new(0.0, 0.0); 3]; 3], role }
    }

    pub fn identity(role: MatrixRole) -> Self {
        Self::from_upper([1.0; 3], [Complex64::new(0.0, 0.0); 3], role)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.m[i][j]
    }

    #[inline]
    pub fn diag(&self) -> [f64; 3] {
        [self.m[0][0].re, self.m[1][1].re, self.m[2][2].re]
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut m = self.m;
        for row in &mut m {
            for e in row {
                *e *= s;
            }
        }
        Hermitian3 { m, role: self.role }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut m = self.m;
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] -= other.m[i][j];
            }
        }
        Hermitian3 { m, role: self.role }
    }

    /// Determinant. Exactly real for Hermitian input, so the imaginary part
    /// of the cofactor expansion is dropped.
    pub fn det(&self) -> f64 {
        let m = &self.m;
        let c0 = m[1][1] * m[2][2] - m[1][2] * m[2][1];
        let c1 = m[1][0] * m[2][2] - m[1][2] * m[2][0];
        let c2 = m[1][0] * m[2][1] - m[1][1] * m[2][0];
        (m[0][0] * c0 - m[0][1] * c1 + m[0][2] * c2).re
    }

    pub fn trace(&self) -> f64 {
        (self.m[0][0] + self.m[1][1] + self.m[2][2]).re
    }

    pub fn frobenius_norm(&self) -> f64 {
        let mut s = 0.0;
        for row in &self.m {
            for e in row {
                s += e.norm_sqr();
            }
        }
        s.sqrt()
    }

    /// Adjugate inverse. The role tag flips between Metric and InverseMetric.
    pub fn inverse(&self) -> Result<Hermitian3, LinalgError> {
        let det = self.det();
        let scale = self.frobenius_norm().max(1.0);
        if det.abs() < 1e-300 * scale {
            return Err(LinalgError::Singular { det });
        }
        let m = &self.m;
        let mut adj = [[Complex64::new(0.0, 0.0); 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                // adj[j][i] = (-1)^(i+j) * minor(i, j)
                let r = [(i + 1) % 3, (i + 2) % 3];
                let c = [(j + 1) % 3, (j + 2) % 3];
                // Using cyclic index pairs keeps the sign baked in.
                adj[j][i] = m[r[0]][c[0]] * m[r[1]][c[1]] - m[r[0]][c[1]] * m[r[1]][c[0]];
            }
        }
        let role = match self.role {
            MatrixRole::Metric => MatrixRole::InverseMetric,
            MatrixRole::InverseMetric => MatrixRole::Metric,
            MatrixRole::Ricci => MatrixRole::Ricci,
        };
        let mut inv = [[Complex64::new(0.0, 0.0); 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                inv[i][j] = adj[i][j] / det;
            }
        }
        // The adjugate of a Hermitian matrix is Hermitian up to rounding;
        // re-symmetrize so the invariant holds exactly.
        let (out, _) = Hermitian3::from_general(inv, role);
        Ok(out)
    }

    /// Matrix product (not Hermitian in general, so returns raw entries).
    pub fn mul_raw(&self, other: &Self) -> [[Complex64; 3]; 3] {
        let mut out = [[Complex64::new(0.0, 0.0); 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let mut s = Complex64::new(0.0, 0.0);
                for k in 0..3 {
                    s += self.m[i][k] * other.m[k][j];
                }
                out[i][j] = s;
            }
        }
        out
    }

    /// `max_ij |(self * other - I)_ij|`, the natural residual for checking
    /// an inverse pair.
    pub fn product_identity_residual(&self, other: &Self) -> f64 {
        let prod = self.mul_raw(other);
        let mut r = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                let target = if i == j { 1.0 } else { 0.0 };
                r = r.max((prod[i][j] - Complex64::new(target, 0.0)).norm());
            }
        }
        r
    }

    pub fn mul_vec(&self, v: [Complex64; 3]) -> [Complex64; 3] {
        let mut out = [Complex64::new(0.0, 0.0); 3];
        for i in 0..3 {
            for j in 0..3 {
                out[i] += self.m[i][j] * v[j];
            }
        }
        out
    }

    /// Sesquilinear pairing `sum_{i,j} m[i][j] v_i conj(w_j)`. With the
    /// Metric role this is the Hermitian inner product `<v, w>`.
    pub fn pairing(&self, v: [Complex64; 3], w: [Complex64; 3]) -> Complex64 {
        let mut s = Complex64::new(0.0, 0.0);
        for i in 0..3 {
            for j in 0..3 {
                s += self.m[i][j] * v[i] * w[j].conj();
            }
        }
        s
    }

    /// Eigenvalues in ascending order, via the trigonometric solution of the
    /// characteristic cubic (real for Hermitian matrices).
    pub fn eigenvalues(&self) -> [f64; 3] {
        let m = &self.m;
        let p1 = m[0][1].norm_sqr() + m[0][2].norm_sqr() + m[1][2].norm_sqr();
        let q = self.trace() / 3.0;
        let d = [m[0][0].re - q, m[1][1].re - q, m[2][2].re - q];
        let p2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2] + 2.0 * p1;
        if p2 <= 0.0 {
            // Scalar matrix.
            return [q, q, q];
        }
        let p = (p2 / 6.0).sqrt();
        let b = {
            let mut b = *self;
            for i in 0..3 {
                b.m[i][i] -= Complex64::new(q, 0.0);
            }
            b.scale(1.0 / p)
        };
        let r = (b.det() / 2.0).clamp(-1.0, 1.0);
        let phi = r.acos() / 3.0;
        let hi = q + 2.0 * p * phi.cos();
        let lo = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
        let mid = 3.0 * q - hi - lo;
        [lo, mid, hi]
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// Sylvester criterion; returns the three leading principal minors on
    /// failure so callers can report how PD-ness broke.
    pub fn positive_definite(&self) -> Result<(), LinalgError> {
        let m = &self.m;
        let m1 = m[0][0].re;
        let m2 = (m[0][0] * m[1][1] - m[0][1] * m[1][0]).re;
        let m3 = self.det();
        if m1 > 0.0 && m2 > 0.0 && m3 > 0.0 {
            Ok(())
        } else {
            Err(LinalgError::NotPositiveDefinite { minors: [m1, m2, m3] })
        }
    }
}
