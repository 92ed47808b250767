//! Toeplitz matrices of multiplication operators compressed to the
//! degree-N sections, Szego-type traces, Haar unitaries, orbit integrals
//! and the diagonal-spread Y statistic.
//!
//! The matrix of the compression is built directly on the section space
//! with its L^2 inner product: entry (j, k) is the quadrature value of
//! `<psi S_k, S_j>` in the metric's orthonormal basis. Conjugation by a
//! Haar unitary then realizes the change to a random orthonormal basis.

use crate::bergman::{bergman_basis, MetricModel};
use crate::error::{Error, Result};
use crate::projective::QuadratureRule;
use crate::rng::complex_standard_normal;
use crate::sections::dim_h0;
use crate::stats::RunningStats;
use crate::testfn::SpherePoly;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

/// Hermitian matrix of the multiplication-by-psi operator compressed to
/// degree-N sections, in the metric's orthonormal basis.
#[derive(Debug, Clone)]
pub struct ToeplitzMatrix {
    n: usize,
    psi: SpherePoly,
    entries: DMatrix<Complex64>,
    hermitian_defect: f64,
}

impl ToeplitzMatrix {
    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn psi(&self) -> &SpherePoly {
        &self.psi
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    /// Frobenius deviation from Hermitian symmetry before symmetrization.
    pub fn hermitian_defect(&self) -> f64 {
        self.hermitian_defect
    }

    /// Row-major serialization as [re, im] pairs, for fixture reuse.
    pub fn to_flat(&self) -> Vec<[f64; 2]> {
        let d = self.dim();
        let mut out = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                let z = self.entries[(i, j)];
                out.push([z.re, z.im]);
            }
        }
        out
    }
}

/// Build the compression matrix by quadrature. The rule must resolve
/// products of two degree-N sections against `psi`.
pub fn toeplitz_build(
    psi: &SpherePoly,
    n: usize,
    metric: &MetricModel,
    rule: &QuadratureRule,
) -> Result<ToeplitzMatrix> {
    let required = 2 * n + psi.degree() as usize + metric.rho_degree() as usize;
    if rule.degree() < required {
        return Err(Error::RuleTooCoarse {
            degree: rule.degree(),
            required,
        });
    }
    let d = dim_h0(1, n);
    let basis = if metric.is_fubini_study() {
        None
    } else {
        Some(bergman_basis(metric, n)?)
    };
    let mut raw = DMatrix::<Complex64>::zeros(d, d);
    for (node, &wt) in rule.nodes().iter().zip(rule.weights()) {
        let p = node.to_projective();
        let amps = match &basis {
            None => fs_amp_vector(n, &p),
            Some(b) => b.fs_amplitudes(&p),
        };
        let weight = wt
            * psi.eval(&p)
            * metric.volume_density(&p)
            * (-(n as f64) * metric.rho_at(&p)).exp();
        for j in 0..d {
            for k in 0..d {
                raw[(j, k)] += weight * amps[j] * amps[k].conj();
            }
        }
    }
    let defect = (&raw - raw.adjoint()).norm();
    let entries = (&raw + raw.adjoint()) * Complex64::new(0.5, 0.0);
    Ok(ToeplitzMatrix {
        n,
        psi: psi.clone(),
        entries,
        hermitian_defect: defect,
    })
}

fn fs_amp_vector(n: usize, p: &crate::projective::ProjectivePoint) -> Vec<Complex64> {
    let w = p.homogeneous();
    let scales = crate::sections::onb_scales(1, n);
    let mut pow0 = vec![Complex64::new(1.0, 0.0); n + 1];
    let mut pow1 = vec![Complex64::new(1.0, 0.0); n + 1];
    for k in 1..=n {
        pow0[k] = pow0[k - 1] * w[0];
        pow1[k] = pow1[k - 1] * w[1];
    }
    (0..=n)
        .map(|j| scales[j] * pow0[n - j] * pow1[j])
        .collect()
}

/// Normalized trace of the k-th power, `(1/d) Tr T^k`.
pub fn szego_trace(t: &ToeplitzMatrix, k: u32) -> f64 {
    assert!(k >= 1, "power must be positive");
    let mut power = t.entries.clone();
    for _ in 1..k {
        power *= &t.entries;
    }
    let d = t.dim();
    let trace: Complex64 = (0..d).map(|i| power[(i, i)]).sum();
    trace.re / d as f64
}

/// Sorted spectrum of a compression matrix with its power sums.
#[derive(Debug, Clone)]
pub struct SpectrumSummary {
    eigenvalues: Vec<f64>,
}

impl SpectrumSummary {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Power sum S_k of the eigenvalues.
    pub fn power_sum(&self, k: u32) -> f64 {
        self.eigenvalues.iter().map(|l| l.powi(k as i32)).sum()
    }
}

pub fn spectrum(t: &ToeplitzMatrix) -> SpectrumSummary {
    let eig = nalgebra::SymmetricEigen::new(t.entries.clone());
    let mut eigenvalues: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    eigenvalues.sort_by(|a, b| a.partial_cmp(b).unwrap());
    SpectrumSummary { eigenvalues }
}

/// Uniform point of the unit sphere of C^d.
pub fn sphere_point<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<Complex64> {
    loop {
        let v: Vec<Complex64> = (0..d).map(|_| complex_standard_normal(rng)).collect();
        let norm: f64 = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.0 {
            return v.iter().map(|c| c / norm).collect();
        }
    }
}

/// Haar-distributed unitary: QR of a complex Ginibre matrix with the
/// diagonal of R rephased positive, the standard correction that makes
/// the Q factor Haar.
pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DMatrix<Complex64> {
    let ginibre = DMatrix::from_fn(d, d, |_, _| complex_standard_normal(rng));
    let qr = ginibre.qr();
    let r = qr.r();
    let mut q = qr.q();
    for i in 0..d {
        let rii = r[(i, i)];
        let phase = if rii.norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            rii / rii.norm()
        };
        for k in 0..d {
            q[(k, i)] *= phase;
        }
    }
    q
}

/// Squared deviation of the diagonal of `U^H D(lambda) U` from the
/// all-ones diagonal scaled by the mean of `lambda`.
pub fn orbit_functional(u: &DMatrix<Complex64>, lambda: &[f64]) -> f64 {
    let d = lambda.len();
    assert_eq!(u.nrows(), d, "dimension mismatch");
    let mean = lambda.iter().sum::<f64>() / d as f64;
    let mut total = 0.0;
    for j in 0..d {
        let diag: f64 = (0..d).map(|i| lambda[i] * u[(i, j)].norm_sqr()).sum();
        total += (diag - mean) * (diag - mean);
    }
    total
}

/// Closed form of the Haar average of `orbit_functional`:
/// `S_2/(d+1) - S_1^2/(d(d+1))`. Exact at every finite d.
pub fn orbit_closed_form(lambda: &[f64], d: usize) -> f64 {
    assert_eq!(lambda.len(), d, "dimension mismatch");
    let s1: f64 = lambda.iter().sum();
    let s2: f64 = lambda.iter().map(|l| l * l).sum();
    s2 / (d as f64 + 1.0) - s1 * s1 / (d as f64 * (d as f64 + 1.0))
}

/// Monte Carlo estimate of the fourth moment `E|a_1|^4` of a
/// sphere-uniform unit vector; returns (mean, standard error).
pub fn sphere_moment4<R: Rng + ?Sized>(d: usize, trials: usize, rng: &mut R) -> (f64, f64) {
    let mut st = RunningStats::new();
    for _ in 0..trials {
        let a = sphere_point(d, rng);
        st.push(a[0].norm_sqr().powi(2));
    }
    let se = st.std_error();
    (st.mean(), if se.is_nan() { 0.0 } else { se })
}

/// The diagonal-spread statistic `sum_j |(U^H T U)_jj - Tr T / d|^2`;
/// equal to the orbit functional of the spectrum after conjugating T into
/// its eigenbasis.
pub fn y_statistic(u: &DMatrix<Complex64>, t: &ToeplitzMatrix) -> f64 {
    let d = t.dim();
    assert_eq!(u.nrows(), d, "dimension mismatch");
    let trace: f64 = (0..d).map(|i| t.entries[(i, i)].re).sum();
    let mean = trace / d as f64;
    let tu = &t.entries * u;
    let mut total = 0.0;
    for j in 0..d {
        let mut diag = Complex64::new(0.0, 0.0);
        for i in 0..d {
            diag += u[(i, j)].conj() * tu[(i, j)];
        }
        total += (diag.re - mean) * (diag.re - mean);
    }
    total
}

/// Per-pair estimate of the sphere log-log correlation
/// `G(x, y) = E log|<x, a>| log|<y, a>|`; returns (mean, standard error).
pub fn gn_pair_estimate<R: Rng + ?Sized>(
    x: &[Complex64],
    y: &[Complex64],
    trials_inner: usize,
    rng: &mut R,
) -> (f64, f64) {
    let d = x.len();
    let mut st = RunningStats::new();
    let mut taken = 0;
    while taken < trials_inner {
        let a = sphere_point(d, rng);
        let ip_x: Complex64 = x.iter().zip(&a).map(|(xi, ai)| xi.conj() * ai).sum();
        let ip_y: Complex64 = y.iter().zip(&a).map(|(yi, ai)| yi.conj() * ai).sum();
        if ip_x.norm() == 0.0 || ip_y.norm() == 0.0 {
            continue; // probability-zero degenerate draw
        }
        st.push(ip_x.norm().ln() * ip_y.norm().ln());
        taken += 1;
    }
    (st.mean(), st.std_error())
}

/// Monte Carlo scan of `G(x, y)` over random pairs on the sphere of C^d.
#[derive(Debug, Clone)]
pub struct GnSpreadReport {
    /// Per-pair estimates of G.
    pub values: Vec<f64>,
    /// max - min over the pairs.
    pub spread: f64,
    /// Average inner standard error of the pair estimates.
    pub mean_std_error: f64,
    /// Set when the inner sample is too small for the spread to be
    /// meaningful.
    pub noisy: bool,
}

pub fn gn_spread<R: Rng + ?Sized>(
    d: usize,
    trials_outer: usize,
    trials_inner: usize,
    rng: &mut R,
) -> GnSpreadReport {
    assert!(d >= 2, "gn_spread requires d >= 2");
    let mut values = Vec::with_capacity(trials_outer);
    let mut se_sum = 0.0;
    for _ in 0..trials_outer {
        let x = sphere_point(d, rng);
        let y = sphere_point(d, rng);
        let (mean, se) = gn_pair_estimate(&x, &y, trials_inner, rng);
        values.push(mean);
        se_sum += se;
    }
    let spread = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - values.iter().cloned().fold(f64::INFINITY, f64::min);
    let mean_std_error = se_sum / trials_outer as f64;
    let noisy = !mean_std_error.is_finite() || mean_std_error > 0.5 * spread.max(1e-3);
    GnSpreadReport {
        values,
        spread,
        mean_std_error,
        noisy,
    }
}
