use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};

/// Arithmetic–geometric mean of two non-negative numbers.
pub fn agm(a: f64, b: f64) -> f64 {
    let (mut a, mut b) = (a, b);
    for _ in 0..64 {
        if (a - b).abs() <= 1e-16 * a.abs().max(b.abs()) {
            break;
        }
        let next = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = next;
    }
    0.5 * (a + b)
}

/// Complete elliptic integral of the first kind in parameter form,
///
/// ```text
/// K(m) = ∫₀^{π/2} dθ / √(1 − m sin²θ),   m = k² < 1,
/// ```
///
/// evaluated as `π / (2·agm(1, √(1−m)))`. Negative `m` is allowed.
pub fn elliptic_k(m: f64) -> Result<f64> {
    if m.is_nan() || m >= 1.0 {
        return Err(Error::Domain(format!("K(m) requires m < 1, got {m}")));
    }
    elliptic_k_complement(1.0 - m)
}

/// `K` expressed through the complementary parameter `mc = 1 − m`.
///
/// Callers that know `1 − m` in closed form should use this entry point to
/// avoid the cancellation in `1 − m` near the logarithmic singularity.
pub fn elliptic_k_complement(mc: f64) -> Result<f64> {
    if mc.is_nan() || mc <= 0.0 {
        return Err(Error::Domain(format!("K requires 1 - m > 0, got {mc}")));
    }
    if mc.is_infinite() {
        return Ok(0.0);
    }
    Ok(FRAC_PI_2 / agm(1.0, mc.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_value() {
        assert!((elliptic_k(0.0).unwrap() - FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn reference_values() {
        // direct quadrature of the defining integral, see tests/special_functions.rs
        assert!((elliptic_k(0.5).unwrap() - 1.854_074_677_301_372).abs() < 1e-12);
        assert!((elliptic_k(-1.0).unwrap() - 1.311_028_777_146_06).abs() < 1e-12);
    }

    #[test]
    fn singular_parameter_rejected() {
        assert!(matches!(elliptic_k(1.0), Err(Error::Domain(_))));
        assert!(matches!(elliptic_k(1.5), Err(Error::Domain(_))));
        assert!(elliptic_k(1.0 - 1e-15).unwrap().is_finite());
    }

    #[test]
    fn complement_agrees() {
        for &m in &[-3.0, -0.2, 0.0, 0.3, 0.9, 0.999] {
            let a = elliptic_k(m).unwrap();
            let b = elliptic_k_complement(1.0 - m).unwrap();
            assert!((a - b).abs() < 1e-14 * a);
        }
    }
}
