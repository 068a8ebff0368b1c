//! Polynomial extrapolation of sampled one-parameter families.
//!
//! Used to push boundary-distance ladders (`eps -> 0`) to their limits and to
//! accelerate finite-difference step refinement. Neville's scheme is chosen
//! over explicit Lagrange weights because the tableau yields a built-in error
//! estimate (the size of the final correction).

/// Value at `target` of the polynomial interpolating `(xs[i], ys[i])`,
/// together with an error estimate (magnitude of the last tableau
/// correction). Panics if the node lists are empty or of mismatched length.
pub fn neville(xs: &[f64], ys: &[f64], target: f64) -> (f64, f64) {
    assert_eq!(xs.len(), ys.len());
    assert!(!xs.is_empty());
    let n = xs.len();
    let mut t = ys.to_vec();
    let mut correction = f64::INFINITY;
    for m in 1..n {
        for i in 0..n - m {
            let denom = xs[i] - xs[i + m];
            t[i] = ((target - xs[i + m]) * t[i] - (target - xs[i]) * t[i + 1]) / denom;
        }
        correction = (t[0] - t[1]).abs();
    }
    if n == 1 {
        correction = f64::INFINITY;
    }
    (t[0], correction)
}

/// Convenience: extrapolate samples `(eps_i, f(eps_i))` to `eps = 0`.
pub fn to_zero(samples: &[(f64, f64)]) -> (f64, f64) {
    let xs: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.1).collect();
    neville(&xs, &ys, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exact_on_polynomials() {
        // f(x) = 3 - 2x + 5x^3 through 4 nodes is reproduced exactly; the
        // error estimate (last correction, i.e. the cubic term the 3-node
        // column missed) stays conservative.
        let f = |x: f64| 3.0 - 2.0 * x + 5.0 * x * x * x;
        let xs = [0.4, 0.2, 0.1, 0.05];
        let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
        let (v, err) = neville(&xs, &ys, 0.0);
        assert_relative_eq!(v, 3.0, max_relative = 1e-13);
        assert!(err >= (v - 3.0).abs());
        assert!(err < 0.1);
    }

    #[test]
    fn geometric_ladder_converges_for_rational_targets() {
        // f(eps) = 1/(1 + eps) -> 1; a 6-node geometric ladder gets ~1e-9.
        let samples: Vec<(f64, f64)> = (0..6)
            .map(|k| {
                let e = 0.2 * 0.5f64.powi(k);
                (e, 1.0 / (1.0 + e))
            })
            .collect();
        let (v, err) = to_zero(&samples);
        assert!((v - 1.0).abs() < 1e-8, "value {v}");
        assert!(err < 1e-5);
    }

    #[test]
    fn single_node_reports_unknown_error() {
        let (v, err) = neville(&[0.1], &[2.5], 0.0);
        assert_eq!(v, 2.5);
        assert!(err.is_infinite());
    }
}
