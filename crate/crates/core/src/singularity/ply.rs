//! The inequality `q_inf (1 + ((arg lambda - 2 pi p / q) / log|lambda|)^2) <= 2 log d / log|lambda|`.

use num_complex::Complex64;
use serde::Serialize;

use super::arc::reduced_angle;
use crate::error::{Error, Result};

/// Rounding slack below which `lhs > rhs` is not called a violation.
pub const VIOLATION_SLACK: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PlyReport {
    pub q_inf: usize,
    /// Filled in when the report comes from a basin analysis.
    pub p_inf: Option<usize>,
    pub m_inf: Option<usize>,
    pub q: usize,
    pub p: usize,
    /// The branch of `arg lambda` closest to `2 pi p / q`.
    pub arg_branch: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    /// Heuristic verdict on the condition under which the inequality is claimed.
    pub el: Option<bool>,
    pub violation: bool,
}

/// `period` is the period of the base point, so `rhs = 2 period log d / log|lambda|`.
pub fn ply_check(q_inf: usize, p: usize, q: usize, lambda: Complex64, d: usize, period: usize) -> Result<PlyReport> {
    if q_inf == 0 || q == 0 {
        return Err(Error::Precondition("q_inf and q must be positive".into()));
    }
    let log_mod = lambda.norm().ln();
    if log_mod <= 0.0 {
        return Err(Error::NotRepelling { modulus: lambda.norm() });
    }
    let target = std::f64::consts::TAU * p as f64 / q as f64;
    let offset = reduced_angle(lambda.arg() - target);
    let lhs = q_inf as f64 * (1.0 + (offset / log_mod).powi(2));
    let rhs = 2.0 * period as f64 * (d as f64).ln() / log_mod;
    Ok(PlyReport {
        q_inf,
        p_inf: None,
        m_inf: None,
        q,
        p,
        arg_branch: target + offset,
        lhs,
        rhs,
        slack: rhs - lhs,
        el: None,
        violation: lhs > rhs + VIOLATION_SLACK,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_case() {
        let r = ply_check(1, 0, 1, Complex64::new(2.0, 0.0), 2, 1).unwrap();
        assert_eq!((r.lhs, r.rhs, r.slack), (1.0, 2.0, 1.0));
        assert!(!r.violation);
    }

    #[test]
    fn quarter_rotation_has_no_spiral_term() {
        let r = ply_check(1, 1, 4, Complex64::new(0.0, 2.0), 2, 1).unwrap();
        assert!((r.lhs - 1.0).abs() < 1e-12);
        assert!((r.arg_branch - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn rhs_is_twice_the_order() {
        let lambda = Complex64::new(1.3, 0.9);
        let r = ply_check(1, 0, 1, lambda, 2, 1).unwrap();
        let rho = crate::growth::valiron_order(2, 1, lambda).unwrap();
        assert!((r.rhs - 2.0 * rho).abs() < 1e-14);
    }
}
