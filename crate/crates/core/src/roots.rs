//! Aberth-Ehrlich simultaneous root iteration for complex polynomials.
//!
//! Initial guesses come from the Newton polygon of the coefficient
//! moduli, so iterates start at the actual root magnitudes. The update is
//! the Newton step corrected by the pairwise repulsion term. Outside the
//! unit disc all evaluations go through the reversed polynomial at
//! w = 1/z, which keeps the Horner intermediates bounded no matter how
//! far out the roots sit (binomially scaled ensembles routinely put
//! roots at |z| in the hundreds with degree above 100, where a direct
//! evaluation would overflow).
//!
//! Roots lock individually: either their correction falls below
//! `REL_TOL`, or the residual reaches the floating-point noise floor of
//! the evaluation, the plateau where multiple roots stop improving.

use crate::error::{Error, Result};
use num_complex::Complex64;

/// Relative convergence tolerance of the iteration.
pub const REL_TOL: f64 = 1e-13;
/// Iteration cap.
pub const MAX_ITER: usize = 500;

#[derive(Debug, Clone)]
pub struct AberthResult {
    pub roots: Vec<Complex64>,
    pub iterations: usize,
}

/// Complex division scaled to avoid overflow in `|b|^2` when the
/// operands are huge.
fn robust_div(a: Complex64, b: Complex64) -> Complex64 {
    let m = a
        .re
        .abs()
        .max(a.im.abs())
        .max(b.re.abs())
        .max(b.im.abs());
    if m == 0.0 || !m.is_finite() {
        return a / b;
    }
    (a / m) / (b / m)
}

/// `sum_k |c_k| r^k`, the magnitude scale of the Horner evaluation at
/// radius r.
fn condition_sum(coeffs: &[Complex64], r: f64) -> f64 {
    let mut acc = 0.0;
    for c in coeffs.iter().rev() {
        acc = acc * r + c.norm();
    }
    acc
}

/// Evaluate p and p' at z by a joint Horner pass; `coeffs[k]` multiplies
/// `z^k`.
pub fn eval_poly_and_derivative(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// A polynomial with its reversal, for chart-stable evaluation.
struct PolyPair {
    fwd: Vec<Complex64>,
    rev: Vec<Complex64>,
}

impl PolyPair {
    fn new(coeffs: &[Complex64]) -> Self {
        let mut rev: Vec<Complex64> = coeffs.to_vec();
        rev.reverse();
        Self {
            fwd: coeffs.to_vec(),
            rev,
        }
    }

    fn degree(&self) -> usize {
        self.fwd.len() - 1
    }

    /// Newton correction p/p' at z plus a noise-floor flag, evaluated in
    /// whichever of z, 1/z lies in the unit disc. With w = 1/z and
    /// q(w) = w^d p(1/w): p/p' = z q / (d q - w q').
    fn newton_with_noise(&self, z: Complex64) -> (Complex64, bool) {
        let d = self.degree() as f64;
        // classical backward-error bound of the Horner scheme:
        // |fl(p) - p| <= 2n u sum |c_k| |z|^k
        let noise_factor = 2.0 * (d + 1.0) * f64::EPSILON;
        if z.norm_sqr() <= 1.0 {
            let (p, dp) = eval_poly_and_derivative(&self.fwd, z);
            let noise = noise_factor * condition_sum(&self.fwd, z.norm());
            if p.norm() <= noise {
                return (Complex64::new(0.0, 0.0), true);
            }
            (robust_div(p, dp), false)
        } else {
            let w = robust_div(Complex64::new(1.0, 0.0), z);
            let (q, dq) = eval_poly_and_derivative(&self.rev, w);
            let noise = noise_factor * condition_sum(&self.rev, w.norm());
            if q.norm() <= noise {
                return (Complex64::new(0.0, 0.0), true);
            }
            let denom = q * d - w * dq;
            (z * robust_div(q, denom), false)
        }
    }

    /// Relative residual margin for the acceptance test: the k for which
    /// |p(z)| = k * scale(z), where scale is `(1 + |coordinate|)^d` in
    /// the evaluation chart.
    fn residual_ratio_ln(&self, z: Complex64) -> f64 {
        let d = self.degree() as f64;
        if z.norm_sqr() <= 1.0 {
            let (p, _) = eval_poly_and_derivative(&self.fwd, z);
            if p.norm() == 0.0 {
                return f64::NEG_INFINITY;
            }
            p.norm().ln() - d * (1.0 + z.norm()).ln()
        } else {
            let w = robust_div(Complex64::new(1.0, 0.0), z);
            let (q, _) = eval_poly_and_derivative(&self.rev, w);
            if q.norm() == 0.0 {
                return f64::NEG_INFINITY;
            }
            q.norm().ln() - d * (1.0 + w.norm()).ln()
        }
    }
}

/// All roots of the polynomial with coefficients `coeffs` (ascending
/// powers, nonzero leading and trailing coefficients expected). Retries
/// with rotated initial configurations before giving up.
pub fn aberth(coeffs: &[Complex64]) -> Result<AberthResult> {
    let mut last = Err(Error::InvalidParameter("empty polynomial".into()));
    for attempt in 0..3 {
        last = aberth_attempt(coeffs, attempt as f64 * 0.2157);
        if last.is_ok() {
            return last;
        }
    }
    last
}

/// Residual of a computed root of `coeffs` relative to the size scale
/// `(1 + |root|)^degree * max|coeffs|`, evaluated in the chart where it
/// does not overflow.
pub fn residual_ratio(coeffs: &[Complex64], root: Complex64) -> f64 {
    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let normalized: Vec<Complex64> = coeffs.iter().map(|c| c / scale).collect();
    let pair = PolyPair::new(&normalized);
    pair.residual_ratio_ln(root).exp()
}

/// Residual acceptance for a computed root.
pub fn residual_ok(coeffs: &[Complex64], root: Complex64, tol: f64) -> bool {
    residual_ratio(coeffs, root) <= tol
}

fn aberth_attempt(coeffs: &[Complex64], rotation: f64) -> Result<AberthResult> {
    let degree = coeffs.len() - 1;
    if degree == 0 {
        return Ok(AberthResult {
            roots: vec![],
            iterations: 0,
        });
    }
    // scale so the iteration arithmetic is size-independent
    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let coeffs: Vec<Complex64> = coeffs.iter().map(|c| c / scale).collect();
    if degree == 1 {
        return Ok(AberthResult {
            roots: vec![robust_div(-coeffs[0], coeffs[1])],
            iterations: 0,
        });
    }
    let pair = PolyPair::new(&coeffs);
    let spin = Complex64::from_polar(1.0, rotation);
    let mut z: Vec<Complex64> = initial_guesses(&coeffs)
        .into_iter()
        .map(|g| g * spin)
        .collect();
    // roots lock individually once their own correction is below
    // tolerance; they keep contributing to the repulsion sum
    let mut locked = vec![false; degree];
    for iter in 0..MAX_ITER {
        let mut all_locked = true;
        for i in 0..degree {
            if locked[i] {
                continue;
            }
            let (newton, at_noise_floor) = pair.newton_with_noise(z[i]);
            if at_noise_floor {
                locked[i] = true;
                continue;
            }
            if !newton.is_finite() {
                z[i] *= 0.5;
                all_locked = false;
                continue;
            }
            let mut repulsion = Complex64::new(0.0, 0.0);
            for (j, zj) in z.iter().enumerate() {
                if j != i {
                    repulsion += robust_div(Complex64::new(1.0, 0.0), z[i] - zj);
                }
            }
            let denom = Complex64::new(1.0, 0.0) - newton * repulsion;
            let mut step = if denom.norm() == 0.0 {
                newton
            } else {
                robust_div(newton, denom)
            };
            if !step.is_finite() {
                all_locked = false;
                continue;
            }
            // cap the step so colliding iterates cannot teleport
            let cap = 0.5 * (1.0 + z[i].norm());
            if step.norm() > cap {
                step *= cap / step.norm();
            }
            z[i] -= step;
            if step.norm() <= REL_TOL * (1.0 + z[i].norm()) {
                locked[i] = true;
            } else {
                all_locked = false;
            }
        }
        if all_locked {
            return Ok(AberthResult {
                roots: z,
                iterations: iter + 1,
            });
        }
    }
    let worst_residual = z
        .iter()
        .map(|&zi| pair.residual_ratio_ln(zi).exp())
        .fold(0.0, f64::max);
    Err(Error::RootsDidNotConverge {
        iterations: MAX_ITER,
        worst_residual,
        best: z,
    })
}

/// Initial guesses from the Newton polygon of the coefficient moduli:
/// each upper-hull segment from k1 to k2 contributes k2 - k1 guesses on
/// the circle of radius `(|c_k1|/|c_k2|)^(1/(k2-k1))`, which tracks the
/// actual root magnitudes. Angular offsets break coefficient symmetries.
fn initial_guesses(coeffs: &[Complex64]) -> Vec<Complex64> {
    let n = coeffs.len() - 1;
    let log_abs: Vec<f64> = coeffs
        .iter()
        .map(|c| {
            if c.norm() > 0.0 {
                c.norm().ln()
            } else {
                f64::NEG_INFINITY
            }
        })
        .collect();
    // upper convex hull of (j, log|c_j|), left to right
    let mut hull: Vec<usize> = Vec::new();
    for j in 0..=n {
        if log_abs[j] == f64::NEG_INFINITY {
            continue;
        }
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            let cross = (b as f64 - a as f64) * (log_abs[j] - log_abs[a])
                - (j as f64 - a as f64) * (log_abs[b] - log_abs[a]);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(j);
    }
    let mut guesses = Vec::with_capacity(n);
    for (seg, pairs) in hull.windows(2).enumerate() {
        let (k1, k2) = (pairs[0], pairs[1]);
        let count = k2 - k1;
        let radius = ((log_abs[k1] - log_abs[k2]) / count as f64).exp();
        for i in 0..count {
            let angle = 2.0 * std::f64::consts::PI * (i as f64 + 0.3618) / count as f64
                + 0.5377 * seg as f64;
            guesses.push(Complex64::from_polar(radius, angle));
        }
    }
    guesses
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{complex_standard_normal, stream_rng};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sort_by_arg(mut roots: Vec<Complex64>) -> Vec<Complex64> {
        roots.sort_by(|a, b| a.arg().partial_cmp(&b.arg()).unwrap());
        roots
    }

    #[test]
    fn cube_roots_of_unity() {
        let res = aberth(&[c(-1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        let roots = sort_by_arg(res.roots);
        let expect = [
            Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI / 3.0),
            c(1.0, 0.0),
            Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0),
        ];
        for (r, e) in roots.iter().zip(&expect) {
            assert!((r - e).norm() < 1e-12, "{r} vs {e}");
        }
    }

    #[test]
    fn double_root_converges() {
        // (z - 1)^2 = 1 - 2z + z^2
        let res = aberth(&[c(1.0, 0.0), c(-2.0, 0.0), c(1.0, 0.0)]).unwrap();
        for r in &res.roots {
            assert!((r - c(1.0, 0.0)).norm() < 1e-6);
        }
    }

    #[test]
    fn random_polynomials_have_small_residuals() {
        let mut rng = stream_rng(80, 0);
        for degree in [5usize, 20, 60] {
            let coeffs: Vec<Complex64> = (0..=degree)
                .map(|_| complex_standard_normal(&mut rng))
                .collect();
            let res = aberth(&coeffs).unwrap();
            assert_eq!(res.roots.len(), degree);
            for &r in &res.roots {
                assert!(residual_ok(&coeffs, r, 1e-9), "degree {degree}");
            }
        }
    }

    #[test]
    fn far_roots_resolved_through_reversal() {
        // (z - R)(z + 1/R) scaled: roots far beyond the naive overflow
        // horizon of a high-degree evaluation
        let r_big = 1e8;
        // p(z) = (z^2 - (R - 1/R) z - 1) has roots R and -1/R
        let coeffs = [c(-1.0, 0.0), c(-(r_big - 1.0 / r_big), 0.0), c(1.0, 0.0)];
        let res = aberth(&coeffs).unwrap();
        let mut moduli: Vec<f64> = res.roots.iter().map(|z| z.norm()).collect();
        moduli.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((moduli[0] - 1.0 / r_big).abs() < 1e-12);
        assert!((moduli[1] - r_big).abs() / r_big < 1e-12);
        // degree-80 polynomial with a tiny leading block: far roots at
        // ~1e4 where z^80 would overflow
        let mut rng = stream_rng(81, 0);
        let degree = 80;
        let mut coeffs: Vec<Complex64> = (0..=degree)
            .map(|_| complex_standard_normal(&mut rng))
            .collect();
        for k in 76..=degree {
            coeffs[k] *= 1e-16;
        }
        let res = aberth(&coeffs).unwrap();
        assert_eq!(res.roots.len(), degree);
        for &r in &res.roots {
            assert!(residual_ok(&coeffs, r, 1e-9), "|z| = {}", r.norm());
        }
        let far = res.roots.iter().filter(|z| z.norm() > 100.0).count();
        assert!(far >= 3, "expected several far roots, got {far}");
    }

    #[test]
    fn linear_and_constant() {
        let res = aberth(&[c(2.0, -2.0), c(1.0, 1.0)]).unwrap();
        assert_eq!(res.roots.len(), 1);
        assert!((res.roots[0] - c(0.0, 2.0)).norm() < 1e-14);
        assert!(aberth(&[c(3.0, 0.0)]).unwrap().roots.is_empty());
    }
}
