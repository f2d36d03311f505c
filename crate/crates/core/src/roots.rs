//! Simultaneous all-roots iteration (Aberth–Ehrlich) for complex polynomials.
//!
//! Each sweep updates every approximation `z_k` by
//!
//! ```text
//! z_k <- z_k - r_k / (1 - r_k * sum_{j != k} 1/(z_k - z_j)),   r_k = p(z_k)/p'(z_k)
//! ```
//!
//! For `|z| > 1` the Newton ratio is evaluated through the reversed polynomial so
//! that high degrees do not overflow. A root is frozen once its residual is at
//! the level of the rounding error of Horner's scheme, which also terminates
//! multiple roots (they stall near `eps^(1/m)`).

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::poly::Poly;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

#[derive(Clone, Debug)]
pub struct RootOptions {
    pub max_iterations: usize,
    /// Multiplier on the Horner rounding bound used as the stopping residual.
    pub residual_factor: f64,
}

impl Default for RootOptions {
    fn default() -> Self {
        RootOptions {
            max_iterations: 2000,
            residual_factor: 64.0,
        }
    }
}

/// Finds all `degree()` roots of `p` (repeated according to multiplicity).
///
/// Leading coefficients must already be trimmed by the caller; exact zero
/// roots are split off before iterating.
pub fn all_roots(p: &Poly, opts: &RootOptions) -> Result<Vec<Complex64>> {
    let mut coeffs: Vec<Complex64> = p.coeffs().to_vec();
    let mut roots = Vec::new();
    let lead = coeffs.iter().position(|c| *c != ZERO).unwrap_or(coeffs.len());
    roots.extend(std::iter::repeat(ZERO).take(lead));
    coeffs.drain(..lead);
    if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::BudgetExceeded {
            degree: p.degree(),
            limit: crate::dynamics::MAX_SOLVER_DEGREE,
        });
    }
    let q = Poly::new(coeffs);
    let n = q.degree();
    match n {
        0 => return Ok(roots),
        1 => {
            roots.push(-q.coeff(0) / q.coeff(1));
            return Ok(roots);
        }
        _ => {}
    }

    let rev = q.reversed(n);
    let abs_q = Poly::new(q.coeffs().iter().map(|c| Complex64::new(c.norm(), 0.0)).collect());
    let abs_rev = abs_q.reversed(n);

    let mut z = initial_guesses(&q);
    let mut done = vec![false; n];
    let tol_factor = opts.residual_factor * f64::EPSILON * (n as f64);
    let mut iterations = 0;

    while iterations < opts.max_iterations && done.iter().any(|d| !d) {
        iterations += 1;
        for k in 0..n {
            if done[k] {
                continue;
            }
            let (ratio, small) = newton_ratio(&q, &rev, &abs_q, &abs_rev, z[k], tol_factor);
            if small {
                done[k] = true;
                continue;
            }
            let mut s = ZERO;
            for (j, &zj) in z.iter().enumerate() {
                if j != k {
                    let diff = z[k] - zj;
                    if diff != ZERO {
                        s += diff.inv();
                    }
                }
            }
            let denom = Complex64::new(1.0, 0.0) - ratio * s;
            let step = if denom.norm() > 0.0 { ratio / denom } else { ratio };
            if !step.re.is_finite() || !step.im.is_finite() {
                continue;
            }
            z[k] -= step;
            if step.norm() <= 4.0 * f64::EPSILON * (1.0 + z[k].norm()) {
                done[k] = true;
            }
        }
    }

    if done.iter().any(|d| !d) {
        let residuals: Vec<f64> = z.iter().map(|&zk| relative_residual(&q, &abs_q, zk)).collect();
        let max_residual = residuals.iter().copied().fold(0.0, f64::max);
        // Roots that stalled at a tiny residual are still accepted.
        if max_residual > 1e-6 {
            return Err(Error::RootsNotConverged {
                iterations,
                max_residual,
                residuals,
            });
        }
    }
    roots.extend(z);
    Ok(roots)
}

/// `|p(z)| / sum |a_k| |z|^k`: backward-error style residual.
pub fn relative_residual(p: &Poly, abs_p: &Poly, z: Complex64) -> f64 {
    let r = Complex64::new(z.norm(), 0.0);
    if z.norm() <= 1.0 {
        p.eval(z).norm() / abs_p.eval(r).re.max(f64::MIN_POSITIVE)
    } else {
        let n = p.degree();
        let u = z.inv();
        p.reversed(n).eval(u).norm() / abs_p.reversed(n).eval(r.inv()).re.max(f64::MIN_POSITIVE)
    }
}

fn newton_ratio(q: &Poly, rev: &Poly, abs_q: &Poly, abs_rev: &Poly, z: Complex64, tol: f64) -> (Complex64, bool) {
    let n = q.degree() as f64;
    if z.norm() <= 1.0 {
        let (v, d) = q.eval_with_derivative(z);
        let bound = abs_q.eval(Complex64::new(z.norm(), 0.0)).re;
        (v / d, v.norm() <= tol * bound)
    } else {
        // p(z) = z^n r(u), p'(z) = z^(n-1) (n r(u) - u r'(u)), u = 1/z
        let u = z.inv();
        let (v, d) = rev.eval_with_derivative(u);
        let bound = abs_rev.eval(Complex64::new(u.norm(), 0.0)).re;
        let ratio = z * v / (v * n - u * d);
        (ratio, v.norm() <= tol * bound)
    }
}

fn initial_guesses(q: &Poly) -> Vec<Complex64> {
    let n = q.degree();
    let lead = q.leading().norm();
    // Geometric mean of the root moduli, clamped by the Cauchy-type bound.
    let gm = (q.coeff(0).norm() / lead).powf(1.0 / n as f64);
    let bound = (0..n)
        .map(|k| (q.coeff(k).norm() / lead).powf(1.0 / (n - k) as f64))
        .fold(0.0, f64::max);
    let radius = if gm > 0.0 { gm.min(2.0 * bound) } else { bound.max(1e-3) };
    let radius = if radius > 0.0 && radius.is_finite() { radius } else { 1.0 };
    (0..n)
        .map(|k| {
            let theta = std::f64::consts::TAU * (k as f64) / (n as f64) + 0.4;
            Complex64::from_polar(radius, theta)
        })
        .collect()
}

/// Groups approximations closer than `tol * (1 + |z|)` and returns the
/// cluster means with their multiplicities, in first-seen order.
pub fn cluster_roots(roots: &[Complex64], tol: f64) -> Vec<(Complex64, usize)> {
    let n = roots.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while parent[r] != r {
            r = parent[r];
        }
        let mut c = i;
        while parent[c] != r {
            let next = parent[c];
            parent[c] = r;
            c = next;
        }
        r
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let scale = 1.0 + roots[i].norm().min(roots[j].norm());
            if (roots[i] - roots[j]).norm() < tol * scale {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[b.max(a)] = a.min(b);
                }
            }
        }
    }
    let mut out: Vec<(usize, Complex64, usize)> = Vec::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        match out.iter_mut().find(|(root, _, _)| *root == r) {
            Some(entry) => {
                entry.1 += roots[i];
                entry.2 += 1;
            }
            None => out.push((r, roots[i], 1)),
        }
    }
    out.into_iter().map(|(_, sum, m)| (sum / m as f64, m)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap().then(a.im.partial_cmp(&b.im).unwrap()));
        v
    }

    #[test]
    fn quadratic_roots() {
        let p = Poly::from_real(&[-2.0, 0.0, 1.0]);
        let r = sorted(all_roots(&p, &RootOptions::default()).unwrap());
        assert!((r[0].re + 2f64.sqrt()).abs() < 1e-14);
        assert!((r[1].re - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn roots_of_unity_degree_64() {
        let mut c = vec![Complex64::new(0.0, 0.0); 65];
        c[0] = Complex64::new(-1.0, 0.0);
        c[64] = Complex64::new(1.0, 0.0);
        let r = all_roots(&Poly::new(c), &RootOptions::default()).unwrap();
        assert_eq!(r.len(), 64);
        for z in &r {
            assert!((z.powu(64) - 1.0).norm() < 1e-12);
        }
        assert_eq!(cluster_roots(&r, 1e-6).len(), 64);
    }

    #[test]
    fn exact_zero_roots_split_off() {
        let p = Poly::from_real(&[0.0, 0.0, 0.0, 1.0]);
        let r = all_roots(&p, &RootOptions::default()).unwrap();
        assert_eq!(r, vec![Complex64::new(0.0, 0.0); 3]);
    }

    #[test]
    fn multiple_root_clusters() {
        // (z - 1)^3 (z + 2)
        let p = &Poly::from_real(&[-1.0, 1.0]).pow(3) * &Poly::from_real(&[2.0, 1.0]);
        let r = all_roots(&p, &RootOptions::default()).unwrap();
        let clusters = cluster_roots(&r, 1e-3);
        assert_eq!(clusters.len(), 2);
        let triple = clusters.iter().find(|(_, m)| *m == 3).unwrap();
        assert!((triple.0 - 1.0).norm() < 1e-5);
    }

    #[test]
    fn large_roots_do_not_overflow() {
        // roots 1e3 * k
        let mut p = Poly::one();
        for k in 1..=6 {
            p = &p * &Poly::from_real(&[-1e3 * k as f64, 1.0]);
        }
        let r = sorted(all_roots(&p, &RootOptions::default()).unwrap());
        for (k, z) in r.iter().enumerate() {
            assert!((z.re - 1e3 * (k + 1) as f64).abs() < 1e-6, "{z}");
        }
    }
}
