//! Zero sets of sections and pairings of the normalized zero current
//! against test functions.
//!
//! On CP^1 the zero current of a degree-N section is the sum of point
//! masses at its roots; homogeneity puts N - deg(chart polynomial) of
//! them at infinity, so the multiplicities always add up to exactly N.
//! The pairing `(Z_s/N, psi)` is evaluated two independent ways: from the
//! roots directly, and through the Poincare-Lelong formula as a Monte
//! Carlo integral of `log ||s||` against the Laplacian of the test
//! function plus the exact curvature term. Cross-validating the two is
//! one of the library's standing checks.

use crate::bergman::MetricModel;
use crate::error::{Error, Result};
use crate::projective::{cp1_quadrature, sample_fs_uniform, ProjectivePoint};
use crate::roots::{aberth, residual_ratio};
use crate::sections::Section;
use crate::testfn::{SpherePoly, TestFunction};
use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

/// Threshold below which trailing/leading coefficients are treated as
/// identically zero, relative to the largest one. Only true zeros and
/// subnormal garbage are stripped: binomially scaled ensembles carry
/// meaningful coefficients 1e-60 below the peak at degrees in the
/// hundreds, and their roots sit at finite positions, not at infinity.
pub const COEFF_TRIM_TOL: f64 = 1e-280;
/// Chordal clustering radius for multiplicity detection.
pub const CLUSTER_RADIUS: f64 = 1e-7;
/// Relative residual bound accepted for a computed root.
pub const RESIDUAL_TOL: f64 = 1e-9;

/// Roots with multiplicity of a degree-N section on CP^1.
#[derive(Debug, Clone)]
pub struct ZeroSet {
    n: usize,
    points: Vec<(ProjectivePoint, usize)>,
}

impl ZeroSet {
    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn points(&self) -> &[(ProjectivePoint, usize)] {
        &self.points
    }

    /// Total multiplicity; equal to the degree by construction.
    pub fn total_multiplicity(&self) -> usize {
        self.points.iter().map(|(_, m)| m).sum()
    }

    /// JSON fixture form: a list of {point, mult}.
    pub fn to_json_value(&self) -> serde_json::Value {
        let points: Vec<_> = self
            .points
            .iter()
            .map(|(p, mult)| {
                serde_json::json!({
                    "point": p
                        .homogeneous()
                        .iter()
                        .map(|c| [c.re, c.im])
                        .collect::<Vec<_>>(),
                    "mult": mult,
                })
            })
            .collect();
        serde_json::Value::Array(points)
    }
}

/// A pairing value with its Monte Carlo uncertainty. `std_error` is zero
/// exactly when the evaluation was deterministic.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PairingEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n_samples: usize,
    /// Draws rejected because they landed on the zero set (counted, then
    /// redrawn).
    pub resamples: usize,
}

/// All N roots of a degree-N section on CP^1, with multiplicity.
pub fn roots_cp1(s: &Section) -> Result<ZeroSet> {
    assert_eq!(s.m(), 1, "roots_cp1 requires m = 1");
    let n = s.degree();
    let coeffs = s.cp1_monomial_coeffs();
    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Err(Error::ZeroSection);
    }
    // k = degree of the chart-0 polynomial, l = order of vanishing at 0
    let k = coeffs
        .iter()
        .rposition(|c| c.norm() > COEFF_TRIM_TOL * scale)
        .expect("scale is positive");
    let l = coeffs
        .iter()
        .position(|c| c.norm() > COEFF_TRIM_TOL * scale)
        .expect("scale is positive");
    let finite = if k > l {
        let trimmed: Vec<Complex64> = coeffs[l..=k].iter().map(|c| c / scale).collect();
        let result = aberth(&trimmed)?;
        let worst = result
            .roots
            .iter()
            .map(|&root| residual_ratio(&trimmed, root))
            .fold(0.0, f64::max);
        if worst > RESIDUAL_TOL {
            return Err(Error::RootsDidNotConverge {
                iterations: result.iterations,
                worst_residual: worst,
                best: result.roots,
            });
        }
        result.roots
    } else {
        vec![]
    };

    let one = Complex64::new(1.0, 0.0);
    let mut points: Vec<(ProjectivePoint, usize)> = Vec::new();
    if l > 0 {
        points.push((ProjectivePoint::normalize(&[one, Complex64::new(0.0, 0.0)])?, l));
    }
    for root in finite {
        // represent far roots through the other chart so |root|^2 cannot
        // overflow the normalization
        let p = if root.norm_sqr() <= 1.0 {
            ProjectivePoint::normalize(&[one, root])?
        } else {
            ProjectivePoint::normalize(&[one / root, one])?
        };
        match points
            .iter_mut()
            .find(|(q, _)| q.chordal_distance(&p) < CLUSTER_RADIUS)
        {
            Some((_, mult)) => *mult += 1,
            None => points.push((p, 1)),
        }
    }
    if k < n {
        let infinity = ProjectivePoint::normalize(&[Complex64::new(0.0, 0.0), one])?;
        match points
            .iter_mut()
            .find(|(q, _)| q.chordal_distance(&infinity) < CLUSTER_RADIUS)
        {
            Some((_, mult)) => *mult += n - k,
            None => points.push((infinity, n - k)),
        }
    }
    Ok(ZeroSet { n, points })
}

/// Deterministic pairing `(Z_s/N, psi)` from the roots.
pub fn pair_roots(zs: &ZeroSet, psi: &SpherePoly) -> PairingEstimate {
    let total: f64 = zs
        .points
        .iter()
        .map(|(p, mult)| *mult as f64 * psi.eval(p))
        .sum();
    PairingEstimate {
        value: total / zs.n as f64,
        std_error: 0.0,
        n_samples: 0,
        resamples: 0,
    }
}

/// Monte Carlo pairing through the Poincare-Lelong formula. The
/// `ddbar` is moved onto the test function, so the estimator averages
/// `log ||s||` times a Laplacian weight and adds the exact curvature
/// term (by quadrature for m = 1, folded into the sample mean for
/// m = 2).
pub fn pair_pl<R: Rng + ?Sized>(
    s: &Section,
    psi: &TestFunction,
    metric: &MetricModel,
    n_mc: usize,
    rng: &mut R,
) -> Result<PairingEstimate> {
    if psi.m() != s.m() || metric.m() != s.m() {
        return Err(Error::MetricDimensionMismatch);
    }
    if s.norm() == 0.0 {
        return Err(Error::ZeroSection);
    }
    match psi {
        TestFunction::Sphere(poly) => pair_pl_cp1(s, poly, metric, n_mc, rng),
        TestFunction::Moment(poly) => {
            if !metric.is_fubini_study() {
                return Err(Error::MetricDimensionMismatch);
            }
            pair_pl_cp2(s, poly, n_mc, rng)
        }
    }
}

fn pair_pl_cp1<R: Rng + ?Sized>(
    s: &Section,
    psi: &SpherePoly,
    metric: &MetricModel,
    n_mc: usize,
    rng: &mut R,
) -> Result<PairingEstimate> {
    let n = s.degree();
    // exact term: int psi d(curvature) by quadrature; the integrand is a
    // sphere polynomial of degree deg(psi) + deg(rho)
    let rule = cp1_quadrature((psi.degree() + metric.rho_degree()) as usize + 6);
    let exact = rule.integrate(|node| {
        let p = node.to_projective();
        psi.eval(&p) * metric.volume_density(&p)
    });
    let mut st = crate::stats::RunningStats::new();
    let mut resamples = 0;
    let mut taken = 0;
    while taken < n_mc {
        let p = sample_fs_uniform(1, rng);
        let log_norm = s.log_eval_norm(&p, metric)?;
        if !log_norm.is_finite() {
            resamples += 1;
            continue;
        }
        // (i/pi) ddbar psi = 2 Lap_{S^2} psi dV
        let weight = 2.0 * psi.laplacian_sphere(&p);
        st.push(log_norm * weight / n as f64);
        taken += 1;
    }
    let se = st.std_error();
    Ok(PairingEstimate {
        value: st.mean() + exact,
        std_error: if se.is_nan() { 0.0 } else { se },
        n_samples: n_mc,
        resamples,
    })
}

fn pair_pl_cp2<R: Rng + ?Sized>(
    s: &Section,
    psi: &crate::testfn::MomentPoly,
    n_mc: usize,
    rng: &mut R,
) -> Result<PairingEstimate> {
    let n = s.degree();
    let fs = MetricModel::fubini_study(2);
    let mut st = crate::stats::RunningStats::new();
    let mut resamples = 0;
    let mut taken = 0;
    while taken < n_mc {
        let p = sample_fs_uniform(2, rng);
        let log_norm = s.log_eval_norm(&p, &fs)?;
        if !log_norm.is_finite() {
            resamples += 1;
            continue;
        }
        let sample = log_norm * psi.pl_weight(&p) / n as f64 + psi.eval(&p);
        st.push(sample);
        taken += 1;
    }
    let se = st.std_error();
    Ok(PairingEstimate {
        value: st.mean(),
        std_error: if se.is_nan() { 0.0 } else { se },
        n_samples: n_mc,
        resamples,
    })
}
