//! Finite-difference Wirtinger derivatives of scalar fields on C^3.
//!
//! The engine computes mixed holomorphic/antiholomorphic derivatives
//! `d^h/dz^h  d^a/dzbar^a` (multi-orders `h`, `a`, total order <= 4) of a
//! real scalar field, by one of two routes:
//!
//! * **Real6**: the field is seen as a function of six real coordinates
//!   `z_j = u_j + i v_j`; Wirtinger operators are expanded binomially into
//!   real mixed partials, each evaluated with central stencils.
//! * **Reinhardt**: for rotation-invariant fields `f(z) = F(|z_1|^2, |z_2|^2,
//!   |z_3|^2)` the differentiation happens in the three `nu` variables and is
//!   converted to Wirtinger form by the chain rule in [`wirtinger_combine`].
//!   Much cheaper and better conditioned; stencils may legitimately cross
//!   `nu = 0` because such fields extend real-analytically in `nu` there.
//!
//! Every stencil has an even-power error expansion in the step `h`, so
//! Richardson extrapolation with ratio 4 per level applies; the returned
//! error estimate is ten times the last Richardson correction. Stencil steps
//! are capped by the field's advertised distance to its domain boundary, and
//! any node falling outside the domain aborts with [`DiffError::DomainEscape`]
//! rather than silently degrading.
//!
//! The engine knows nothing about any particular field. Closed-form modules
//! are validated against it, never the other way around.

use num_complex::Complex64;
use std::collections::HashMap;
use thiserror::Error;

use crate::jets::{NuDerivatives, DEG, LEN, MONOMIALS};

/// Differentiation route. See the module docs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiffMode {
    Real6,
    Reinhardt,
}

#[derive(Clone, Copy, Debug)]
pub struct DiffConfig {
    pub mode: DiffMode,
    /// Coarsest stencil step before boundary capping.
    pub base_step: f64,
    /// Richardson levels (1 = no extrapolation). Valid range 1..=4.
    pub levels: usize,
}

impl Default for DiffConfig {
    fn default() -> Self {
        DiffConfig { mode: DiffMode::Reinhardt, base_step: 1e-2, levels: 4 }
    }
}

impl DiffConfig {
    pub fn with_mode(mode: DiffMode) -> Self {
        DiffConfig { mode, ..Default::default() }
    }

    fn validate(&self) -> Result<(), DiffError> {
        if !(1..=4).contains(&self.levels) {
            return Err(DiffError::BadLevels(self.levels));
        }
        if !(self.base_step > 0.0 && self.base_step.is_finite()) {
            return Err(DiffError::BadStep(self.base_step));
        }
        Ok(())
    }
}

#[derive(Error, Debug, Clone, PartialEq)]
pub enum DiffError {
    #[error("stencil node left the field's domain near nu = ({0:.4}, {1:.4}, {2:.4})", .nu[0], .nu[1], .nu[2])]
    DomainEscape { nu: [f64; 3] },
    #[error("derivative order {0} exceeds the supported maximum {DEG}")]
    OrderTooHigh(usize),
    #[error("Reinhardt mode requires a rotation-invariant field")]
    NotRotationInvariant,
    #[error("Richardson levels must lie in 1..=4, got {0}")]
    BadLevels(usize),
    #[error("base step must be positive and finite, got {0}")]
    BadStep(f64),
    #[error("extrapolation step {0:.3e} fell below numeric precision")]
    StepUnderflow(f64),
}

/// Smallest usable stencil step; below this, central differences are pure
/// rounding noise in f64.
const MIN_STEP: f64 = 1e-13;

/// A mixed Wirtinger derivative request: `holo[j]` holomorphic and `anti[j]`
/// antiholomorphic differentiations in coordinate `j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct DerivRequest {
    pub holo: [u8; 3],
    pub anti: [u8; 3],
}

impl DerivRequest {
    pub fn new(holo: [u8; 3], anti: [u8; 3]) -> Self {
        DerivRequest { holo, anti }
    }

    /// The request whose value is the metric entry `g_{i jbar}` of `log B`.
    pub fn metric(i: usize, j: usize) -> Self {
        let mut holo = [0u8; 3];
        let mut anti = [0u8; 3];
        holo[i] += 1;
        anti[j] += 1;
        DerivRequest { holo, anti }
    }

    /// The fourth-order request `d_i d_k dbar_j dbar_l` appearing in the
    /// curvature tensor.
    pub fn curvature(i: usize, j: usize, k: usize, l: usize) -> Self {
        let mut holo = [0u8; 3];
        let mut anti = [0u8; 3];
        holo[i] += 1;
        holo[k] += 1;
        anti[j] += 1;
        anti[l] += 1;
        DerivRequest { holo, anti }
    }

    pub fn order(&self) -> usize {
        (self.holo.iter().sum::<u8>() + self.anti.iter().sum::<u8>()) as usize
    }

    fn validate(&self) -> Result<(), DiffError> {
        if self.order() > DEG {
            return Err(DiffError::OrderTooHigh(self.order()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug)]
pub struct DerivResult {
    pub value: Complex64,
    /// Ten times the last Richardson correction (infinite when levels = 1).
    pub error_estimate: f64,
}

/// A real scalar field the engine can differentiate.
pub trait ScalarField: Sync {
    /// Value at a point of C^3, or `None` outside the field's domain.
    fn eval(&self, z: [Complex64; 3]) -> Option<f64>;

    /// Rotation-invariant representation `F(nu)` with `nu_j = |z_j|^2`, if
    /// the field has one. Must accept the real-analytic continuation to
    /// slightly negative `nu` where the defining formula allows it.
    fn eval_nu(&self, _nu: [f64; 3]) -> Option<f64> {
        None
    }

    fn rotation_invariant(&self) -> bool {
        false
    }

    /// Largest per-coordinate excursion (max-norm, real coordinates) that is
    /// guaranteed to stay well inside the domain.
    fn step_bound_z(&self, _z: [Complex64; 3]) -> f64 {
        f64::INFINITY
    }

    /// Per-axis safe travel in `nu` coordinates: how far `nu_i` may move
    /// before the field leaves its domain, with the field's own sensitivity
    /// to that axis folded in. The engine derates these by [`AXIS_SAFETY`]
    /// so that simultaneous excursions along all three axes (mixed-partial
    /// stencil corners) still stay interior.
    fn step_bound_nu_axes(&self, _nu: [f64; 3]) -> [f64; 3] {
        [f64::INFINITY; 3]
    }
}

/// Central stencils for d^m/dt^m, m = 0..=4, all with O(h^2) leading error
/// and purely even error expansions. Weights are relative to step 1; the
/// caller divides by h^m.
const STENCILS: [&[(i32, f64)]; 5] = [
    &[(0, 1.0)],
    &[(-1, -0.5), (1, 0.5)],
    &[(-1, 1.0), (0, -2.0), (1, 1.0)],
    &[(-2, -0.5), (-1, 1.0), (1, -1.0), (2, 0.5)],
    &[(-2, 1.0), (-1, -4.0), (0, 6.0), (1, -4.0), (2, 1.0)],
];

/// Maximum node offset (in units of h) any stencil reaches.
const STENCIL_REACH: f64 = 2.0;

/// Fraction of a per-axis safe-travel bound the coarsest stencil node may
/// consume. With reach 2 the farthest node sits at `2 h0 <= (2/9) bound`,
/// so even if all three axes are excursed at once (mixed-partial corners)
/// the combined drain on any one boundary function stays below 2/3 of its
/// distance. Oversized steps are the main rounding hazard for high-order
/// differences, but undersized ones are worse: an order-4 difference
/// divides by h^4, so halving h costs a factor 16 in noise.
const AXIS_SAFETY: f64 = 1.0 / 9.0;

/// Step inflation per total derivative order. An order-d difference divides
/// by h^d, so rounding noise grows like eps/h^d while the (Richardson-
/// accelerated) truncation error shrinks like h^8: the optimum step grows
/// with d. Balancing the two for f64 gives roughly these multipliers on
/// `base_step`.
const ORDER_SCALE: [f64; DEG + 1] = [1.0, 1.0, 2.5, 5.0, 7.0];

fn binom(n: u8, k: u8) -> f64 {
    let mut v = 1.0;
    for t in 0..k {
        v = v * (n - t) as f64 / (t + 1) as f64;
    }
    v
}

fn falling(a: u8, m: u8) -> f64 {
    let mut v = 1.0;
    for t in 0..m {
        v *= (a - t) as f64;
    }
    v
}

fn i_pow(k: u8) -> Complex64 {
    match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// Chain rule from a table of `nu`-partials of `F` to the Wirtinger
/// derivative of `f(z) = F(|z_1|^2, |z_2|^2, |z_3|^2)`:
///
/// ```text
/// d^h dbar^a f = sum_{m_j} prod_j [ C(h_j, m_j) (a_j)_{m_j}
///                 z_j^(a_j - m_j) zbar_j^(h_j - m_j) ]
///                 * F^{(h_1+a_1-m_1, h_2+a_2-m_2, h_3+a_3-m_3)}
/// ```
///
/// with `(a)_m` the falling factorial. The same combiner serves the
/// finite-difference table and the exact Taylor-jet table.
pub fn wirtinger_combine(table: &NuDerivatives, z: [Complex64; 3], req: &DerivRequest) -> Complex64 {
    let mut axis_terms: [Vec<(usize, Complex64)>; 3] =
        [Vec::new(), Vec::new(), Vec::new()];
    for j in 0..3 {
        let (h, a) = (req.holo[j], req.anti[j]);
        for m in 0..=h.min(a) {
            let w = binom(h, m)
                * falling(a, m)
                * z[j].powu((a - m) as u32)
                * z[j].conj().powu((h - m) as u32);
            axis_terms[j].push(((h + a - m) as usize, w));
        }
    }
    let mut total = Complex64::new(0.0, 0.0);
    for &(d1, w1) in &axis_terms[0] {
        for &(d2, w2) in &axis_terms[1] {
            for &(d3, w3) in &axis_terms[2] {
                total += w1 * w2 * w3 * table.get(d1, d2, d3);
            }
        }
    }
    total
}

pub struct DiffEngine<'a, F: ScalarField + ?Sized> {
    field: &'a F,
    pub config: DiffConfig,
}

impl<'a, F: ScalarField + ?Sized> DiffEngine<'a, F> {
    pub fn new(field: &'a F, config: DiffConfig) -> Self {
        DiffEngine { field, config }
    }

    /// Mixed Wirtinger derivative at `at`, routed per the configured mode.
    pub fn derivative(&self, at: [Complex64; 3], req: &DerivRequest) -> Result<DerivResult, DiffError> {
        self.config.validate()?;
        req.validate()?;
        match self.config.mode {
            DiffMode::Reinhardt => self.derivative_reinhardt(at, req),
            DiffMode::Real6 => self.derivative_real6(at, req),
        }
    }

    /// All `nu`-partials of a rotation-invariant field up to `total` order,
    /// with per-axis order caps, sharing one evaluation cache. Entries
    /// outside the caps are zero. Also returns the worst per-partial error
    /// estimate.
    pub fn nu_derivative_table(
        &self,
        nu: [f64; 3],
        caps: [usize; 3],
        total: usize,
    ) -> Result<(NuDerivatives, f64), DiffError> {
        self.config.validate()?;
        if total > DEG || caps.iter().any(|&c| c > DEG) {
            return Err(DiffError::OrderTooHigh(total.max(*caps.iter().max().unwrap())));
        }
        if !self.field.rotation_invariant() {
            return Err(DiffError::NotRotationInvariant);
        }
        let mut table = [0.0; LEN];
        let mut worst = 0.0f64;
        table[0] = self.field.eval_nu(nu).ok_or(DiffError::DomainEscape { nu })?;
        // Partials of equal total order share steps (and therefore a node
        // cache); different orders want different steps.
        for d in 1..=total {
            let h0 = self.nu_steps(nu, d)?;
            let mut memo: HashMap<[i32; 3], f64> = HashMap::new();
            for (slot, &(i, j, k)) in MONOMIALS.iter().enumerate() {
                let orders = [i as usize, j as usize, k as usize];
                if orders.iter().sum::<usize>() != d
                    || orders.iter().zip(&caps).any(|(o, c)| o > c)
                {
                    continue;
                }
                let (v, e) = self.nu_partial_with(&mut memo, nu, orders, h0)?;
                table[slot] = v;
                worst = worst.max(e);
            }
        }
        Ok((NuDerivatives::from_table(table), worst))
    }

    /// Single `nu`-partial of a rotation-invariant field.
    pub fn nu_partial(&self, nu: [f64; 3], orders: [usize; 3]) -> Result<(f64, f64), DiffError> {
        self.config.validate()?;
        let d = orders.iter().sum::<usize>();
        if d > DEG {
            return Err(DiffError::OrderTooHigh(d));
        }
        if !self.field.rotation_invariant() {
            return Err(DiffError::NotRotationInvariant);
        }
        let h0 = self.nu_steps(nu, d)?;
        let mut memo: HashMap<[i32; 3], f64> = HashMap::new();
        self.nu_partial_with(&mut memo, nu, orders, h0)
    }

    /// Per-axis coarsest steps for partials of one total order: the wanted
    /// step for this order, derated axis by axis to the field's safe-travel
    /// bounds. Axes are independent so a tight boundary in one direction
    /// does not ruin the conditioning of the others.
    fn nu_steps(&self, nu: [f64; 3], order: usize) -> Result<[f64; 3], DiffError> {
        let bounds = self.field.step_bound_nu_axes(nu);
        let want = self.config.base_step * ORDER_SCALE[order.min(DEG)];
        let mut h0 = [0.0; 3];
        for i in 0..3 {
            if !(bounds[i] > 0.0) {
                return Err(DiffError::DomainEscape { nu });
            }
            h0[i] = want.min(bounds[i] * AXIS_SAFETY);
            if h0[i] / ((1 << (self.config.levels - 1)) as f64) < MIN_STEP {
                return Err(DiffError::StepUnderflow(h0[i]));
            }
        }
        Ok(h0)
    }

    /// Tensor central stencil + Richardson for one `nu`-partial. Node values
    /// are cached on the finest dyadic grid so coarser levels reuse them;
    /// every axis halves together through the levels, so the combined error
    /// expansion stays even in the level scale and the standard Richardson
    /// tableau applies unchanged to the anisotropic steps.
    fn nu_partial_with(
        &self,
        memo: &mut HashMap<[i32; 3], f64>,
        nu: [f64; 3],
        orders: [usize; 3],
        h0: [f64; 3],
    ) -> Result<(f64, f64), DiffError> {
        let levels = self.config.levels;
        let fine = 1i32 << (levels - 1);
        let hf = [
            h0[0] / fine as f64,
            h0[1] / fine as f64,
            h0[2] / fine as f64,
        ];
        let mut seq = Vec::with_capacity(levels);
        for l in 0..levels {
            let stride = 1i32 << (levels - 1 - l);
            let mut scale = 1.0;
            for i in 0..3 {
                scale *= (hf[i] * stride as f64).powi(orders[i] as i32);
            }
            let mut acc = 0.0;
            for &(o1, w1) in STENCILS[orders[0]] {
                for &(o2, w2) in STENCILS[orders[1]] {
                    for &(o3, w3) in STENCILS[orders[2]] {
                        let key = [o1 * stride, o2 * stride, o3 * stride];
                        let v = self
                            .eval_nu_indexed(memo, nu, hf, key)
                            .ok_or(DiffError::DomainEscape { nu })?;
                        acc += w1 * w2 * w3 * v;
                    }
                }
            }
            seq.push(acc / scale);
        }
        Ok(richardson(&seq))
    }

    fn eval_nu_indexed(
        &self,
        memo: &mut HashMap<[i32; 3], f64>,
        nu: [f64; 3],
        hf: [f64; 3],
        key: [i32; 3],
    ) -> Option<f64> {
        if let Some(&v) = memo.get(&key) {
            return Some(v);
        }
        let p = [
            nu[0] + key[0] as f64 * hf[0],
            nu[1] + key[1] as f64 * hf[1],
            nu[2] + key[2] as f64 * hf[2],
        ];
        let v = self.field.eval_nu(p)?;
        memo.insert(key, v);
        Some(v)
    }

    fn derivative_reinhardt(&self, at: [Complex64; 3], req: &DerivRequest) -> Result<DerivResult, DiffError> {
        let nu = [at[0].norm_sqr(), at[1].norm_sqr(), at[2].norm_sqr()];
        let caps = [
            (req.holo[0] + req.anti[0]) as usize,
            (req.holo[1] + req.anti[1]) as usize,
            (req.holo[2] + req.anti[2]) as usize,
        ];
        let (table, err) = self.nu_derivative_table(nu, caps, req.order())?;
        // Scale the per-partial error by the chain-rule weight mass.
        let mut weight = 1.0;
        for j in 0..3 {
            let (h, a) = (req.holo[j], req.anti[j]);
            let mut axis = 0.0;
            let r = at[j].norm();
            for m in 0..=h.min(a) {
                axis += binom(h, m) * falling(a, m) * r.powi((a + h - 2 * m) as i32);
            }
            weight *= axis.max(1.0);
        }
        Ok(DerivResult {
            value: wirtinger_combine(&table, at, req),
            error_estimate: err * weight,
        })
    }

    fn derivative_real6(&self, at: [Complex64; 3], req: &DerivRequest) -> Result<DerivResult, DiffError> {
        let mut memo: HashMap<[i32; 6], f64> = HashMap::new();
        self.derivative_real6_with(&mut memo, at, req)
    }

    fn derivative_real6_with(
        &self,
        memo: &mut HashMap<[i32; 6], f64>,
        at: [Complex64; 3],
        req: &DerivRequest,
    ) -> Result<DerivResult, DiffError> {
        // Expand each coordinate's Wirtinger power into real partials:
        // d_z = (d_u - i d_v)/2, d_zbar = (d_u + i d_v)/2, so
        // d_z^h d_zbar^a = 2^-(h+a) sum_{r<=h, s<=a} C(h,r) C(a,s)
        //                  (-i)^(h-r) i^(a-s) d_u^(r+s) d_v^(h+a-r-s).
        let mut axis_terms: [Vec<(usize, usize, Complex64)>; 3] =
            [Vec::new(), Vec::new(), Vec::new()];
        for j in 0..3 {
            let (h, a) = (req.holo[j], req.anti[j]);
            let scale = 0.5f64.powi((h + a) as i32);
            for r in 0..=h {
                for s in 0..=a {
                    let w = scale
                        * binom(h, r)
                        * binom(a, s)
                        * i_pow(h - r).conj()
                        * i_pow(a - s);
                    axis_terms[j].push(((r + s) as usize, (h + a - r - s) as usize, w));
                }
            }
        }
        let bound = self.field.step_bound_z(at);
        let nu = [at[0].norm_sqr(), at[1].norm_sqr(), at[2].norm_sqr()];
        if !(bound > 0.0) {
            return Err(DiffError::DomainEscape { nu });
        }
        // Every real partial in the expansion has total order req.order().
        let h0 = (self.config.base_step * ORDER_SCALE[req.order().min(DEG)])
            .min(bound / (2.0 * STENCIL_REACH));
        if h0 / ((1 << (self.config.levels - 1)) as f64) < MIN_STEP {
            return Err(DiffError::StepUnderflow(h0));
        }
        let mut value = Complex64::new(0.0, 0.0);
        let mut err = 0.0f64;
        for &(du1, dv1, w1) in &axis_terms[0] {
            for &(du2, dv2, w2) in &axis_terms[1] {
                for &(du3, dv3, w3) in &axis_terms[2] {
                    let w = w1 * w2 * w3;
                    if w.norm() == 0.0 {
                        continue;
                    }
                    let orders = [du1, dv1, du2, dv2, du3, dv3];
                    let (v, e) = self.real_partial_with(memo, at, orders, h0, nu)?;
                    value += w * v;
                    err += w.norm() * e;
                }
            }
        }
        Ok(DerivResult { value, error_estimate: err })
    }

    fn real_partial_with(
        &self,
        memo: &mut HashMap<[i32; 6], f64>,
        at: [Complex64; 3],
        orders: [usize; 6],
        h0: f64,
        nu: [f64; 3],
    ) -> Result<(f64, f64), DiffError> {
        let levels = self.config.levels;
        let fine = 1i32 << (levels - 1);
        let hf = h0 / fine as f64;
        let d_total = orders.iter().sum::<usize>() as i32;
        let mut seq = Vec::with_capacity(levels);
        for l in 0..levels {
            let stride = 1i32 << (levels - 1 - l);
            let h = hf * stride as f64;
            let mut acc = 0.0;
            // Six nested stencil axes, flattened iteratively.
            let mut stack: Vec<(usize, [i32; 6], f64)> = vec![(0, [0; 6], 1.0)];
            while let Some((axis, key, w)) = stack.pop() {
                if axis == 6 {
                    let v = self
                        .eval_z_indexed(memo, at, hf, key)
                        .ok_or(DiffError::DomainEscape { nu })?;
                    acc += w * v;
                    continue;
                }
                for &(o, wo) in STENCILS[orders[axis]] {
                    let mut k2 = key;
                    k2[axis] = o * stride;
                    stack.push((axis + 1, k2, w * wo));
                }
            }
            seq.push(acc / h.powi(d_total));
        }
        Ok(richardson(&seq))
    }

    fn eval_z_indexed(
        &self,
        memo: &mut HashMap<[i32; 6], f64>,
        at: [Complex64; 3],
        hf: f64,
        key: [i32; 6],
    ) -> Option<f64> {
        if let Some(&v) = memo.get(&key) {
            return Some(v);
        }
        let mut z = at;
        for j in 0..3 {
            z[j] += Complex64::new(key[2 * j] as f64 * hf, key[2 * j + 1] as f64 * hf);
        }
        let v = self.field.eval(z)?;
        memo.insert(key, v);
        Some(v)
    }
}

/// One mixed Wirtinger derivative of a scalar field: the module's main entry
/// point for single requests.
pub fn wirtinger<F: ScalarField + ?Sized>(
    field: &F,
    at: [Complex64; 3],
    req: &DerivRequest,
    cfg: DiffConfig,
) -> Result<DerivResult, DiffError> {
    DiffEngine::new(field, cfg).derivative(at, req)
}

/// All mixed Wirtinger derivatives of total order <= `max_order`, amortizing
/// shared stencil evaluations across requests.
#[derive(Clone, Debug, Default)]
pub struct WirtingerJet {
    table: HashMap<DerivRequest, DerivResult>,
}

impl WirtingerJet {
    pub fn get(&self, req: &DerivRequest) -> Option<&DerivResult> {
        self.table.get(req)
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }
}

fn requests_up_to(max_order: usize) -> Vec<DerivRequest> {
    let cap = max_order as u8;
    let mut out = Vec::new();
    for h1 in 0..=cap {
        for h2 in 0..=cap {
            for h3 in 0..=cap {
                for a1 in 0..=cap {
                    for a2 in 0..=cap {
                        for a3 in 0..=cap {
                            if h1 + h2 + h3 + a1 + a2 + a3 <= cap {
                                out.push(DerivRequest::new([h1, h2, h3], [a1, a2, a3]));
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

pub fn wirtinger_jet<F: ScalarField + ?Sized>(
    field: &F,
    at: [Complex64; 3],
    max_order: usize,
    cfg: DiffConfig,
) -> Result<WirtingerJet, DiffError> {
    if max_order > DEG {
        return Err(DiffError::OrderTooHigh(max_order));
    }
    let engine = DiffEngine::new(field, cfg);
    engine.config.validate()?;
    let mut jet = WirtingerJet::default();
    match cfg.mode {
        DiffMode::Reinhardt => {
            let nu = [at[0].norm_sqr(), at[1].norm_sqr(), at[2].norm_sqr()];
            let caps = [max_order.min(DEG); 3];
            let (table, err) = engine.nu_derivative_table(nu, caps, max_order)?;
            for req in requests_up_to(max_order) {
                jet.table.insert(
                    req,
                    DerivResult {
                        value: wirtinger_combine(&table, at, &req),
                        error_estimate: err,
                    },
                );
            }
        }
        DiffMode::Real6 => {
            // Requests of equal order share a stencil step, hence a cache.
            let mut memos: HashMap<usize, HashMap<[i32; 6], f64>> = HashMap::new();
            for req in requests_up_to(max_order) {
                let memo = memos.entry(req.order()).or_default();
                let r = engine.derivative_real6_with(memo, at, &req)?;
                jet.table.insert(req, r);
            }
        }
    }
    Ok(jet)
}

/// Richardson tableau for a sequence sampled at steps h, h/2, h/4, ...
/// assuming an even-power error expansion (ratio 4 per column). Returns the
/// extrapolated value and ten times the last correction.
fn richardson(seq: &[f64]) -> (f64, f64) {
    let n = seq.len();
    let mut t = seq.to_vec();
    if n == 1 {
        return (t[0], f64::INFINITY);
    }
    let mut last = 0.0;
    for m in 1..n {
        let f = 4f64.powi(m as i32) - 1.0;
        for l in (m..n).rev() {
            let corr = (t[l] - t[l - 1]) / f;
            if l == n - 1 {
                last = corr;
            }
            t[l] += corr;
        }
    }
    (t[n - 1], 10.0 * last.abs())
}
