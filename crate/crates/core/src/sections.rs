//! The spaces of degree-N polynomial sections on CP^m: monomial
//! orthonormal bases, closed-form norms, pointwise section norms, and the
//! random models (Gaussian coefficients, sphere-uniform, Haar orthonormal
//! basis).
//!
//! Coefficients are always stored against the orthonormal monomial basis
//! `S_J = monomial_norm_sq(J)^{-1/2} z^J`, so `|s|^2 = sum |a_J|^2`
//! exactly. The Gaussian-coefficient model then has the same zero
//! distribution as the classical unitarily invariant polynomial ensemble,
//! whose coefficient convention differs only by an overall constant.
//!
//! Multi-indices are enumerated in graded-lexicographic order
//! (descending lexicographic within fixed total degree), which for m = 1
//! lists `z^0, z^1, ..., z^N`. This fixed order is what identifies the
//! set of orthonormal bases with the unitary group U(d_N).

use crate::bergman::MetricModel;
use crate::error::{Error, Result};
use crate::projective::{ProjectivePoint, QuadratureRule};
use crate::rng::complex_standard_normal;
use crate::testfn::SpherePoly;
use crate::toeplitz::haar_unitary;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Exponent vector of a degree-N monomial in m+1 variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    pub fn new(entries: Vec<usize>) -> Self {
        Self(entries)
    }

    pub fn entries(&self) -> &[usize] {
        &self.0
    }

    /// Total degree |J|.
    pub fn weight(&self) -> usize {
        self.0.iter().sum()
    }
}

/// All multi-indices of weight `n` in `m + 1` variables, in descending
/// lexicographic order: (N,0,...,0), (N-1,1,0,...), ..., (0,...,0,N).
pub fn multi_indices(m: usize, n: usize) -> Vec<MultiIndex> {
    let mut out = Vec::with_capacity(dim_h0(m, n));
    let mut current = vec![0usize; m + 1];
    current[0] = n;
    loop {
        out.push(MultiIndex(current.clone()));
        // find the rightmost entry (except the last) that is positive
        let mut i = m;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if current[i] > 0 {
                break;
            }
        }
        if i == m {
            return out;
        }
        // decrement it, move everything to its right onto position i+1
        let tail: usize = current[i + 1..].iter().sum();
        current[i] -= 1;
        for c in current[i + 1..].iter_mut() {
            *c = 0;
        }
        current[i + 1] = tail + 1;
    }
}

/// dim H^0(CP^m, O(N)) = C(N + m, m).
pub fn dim_h0(m: usize, n: usize) -> usize {
    let mut acc: usize = 1;
    for k in 1..=m {
        acc = acc * (n + k) / k;
    }
    acc
}

/// ln(n!).
pub fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Squared L^2 norm of the monomial z^J of degree N on CP^m:
/// `m! j_0! ... j_m! / (N + m)!`, evaluated in log space so it stays
/// accurate for N up to a few hundred.
pub fn monomial_norm_sq(m: usize, n: usize, j: &MultiIndex) -> Result<f64> {
    if j.entries().len() != m + 1 {
        return Err(Error::InvalidParameter(format!(
            "multi-index has {} entries for m = {m}",
            j.entries().len()
        )));
    }
    if j.weight() != n {
        return Err(Error::DegreeMismatch {
            expected: n,
            got: j.weight(),
        });
    }
    let ln = ln_factorial(m) + j.entries().iter().map(|&ji| ln_factorial(ji)).sum::<f64>()
        - ln_factorial(n + m);
    Ok(ln.exp())
}

/// `monomial_norm_sq(J)^{-1/2}` for every J in enumeration order: the
/// scaling taking raw monomial coefficients to orthonormal ones.
pub fn onb_scales(m: usize, n: usize) -> Vec<f64> {
    multi_indices(m, n)
        .iter()
        .map(|j| {
            monomial_norm_sq(m, n, j)
                .expect("enumerated index has the right weight")
                .powf(-0.5)
        })
        .collect()
}

/// A holomorphic section of O(N) on CP^m, stored as coefficients against
/// the orthonormal monomial basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    m: usize,
    n: usize,
    coeffs: Vec<Complex64>,
}

impl Section {
    pub fn new(m: usize, n: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        let d = dim_h0(m, n);
        if coeffs.len() != d {
            return Err(Error::InvalidParameter(format!(
                "expected {d} coefficients for (m, N) = ({m}, {n}), got {}",
                coeffs.len()
            )));
        }
        Ok(Self { m, n, coeffs })
    }

    /// The monomial basis element with index `k` in enumeration order.
    pub fn basis_element(m: usize, n: usize, k: usize) -> Self {
        let d = dim_h0(m, n);
        let mut coeffs = vec![Complex64::new(0.0, 0.0); d];
        coeffs[k] = Complex64::new(1.0, 0.0);
        Self { m, n, coeffs }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// L^2 norm; the coefficients are orthonormal-basis ones.
    pub fn norm(&self) -> f64 {
        self.coeffs
            .iter()
            .map(|c| c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self {
            m: self.m,
            n: self.n,
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
    }

    /// Value of the degree-N polynomial with orthonormalized coefficients
    /// at the homogeneous vector `w`. For a unit representative this is
    /// the Fubini-Study pointwise norm up to phase.
    pub fn amplitude(&self, w: &[Complex64]) -> Complex64 {
        debug_assert_eq!(w.len(), self.m + 1);
        if self.m == 1 {
            return cp1_amplitude(&self.cp1_monomial_coeffs(), w[0], w[1]);
        }
        let scales = onb_scales(self.m, self.n);
        // power tables per coordinate
        let pows: Vec<Vec<Complex64>> = w
            .iter()
            .map(|&wi| {
                let mut col = Vec::with_capacity(self.n + 1);
                let mut acc = Complex64::new(1.0, 0.0);
                for _ in 0..=self.n {
                    col.push(acc);
                    acc *= wi;
                }
                col
            })
            .collect();
        let mut total = Complex64::new(0.0, 0.0);
        for ((a, j), scale) in self
            .coeffs
            .iter()
            .zip(multi_indices(self.m, self.n))
            .zip(&scales)
        {
            let mut term = a * scale;
            for (i, &ji) in j.entries().iter().enumerate() {
                term *= pows[i][ji];
            }
            total += term;
        }
        total
    }

    /// Monomial coefficients in chart 0 for m = 1: the polynomial
    /// `sum_j a_j sqrt((N+1) C(N,j)) z^j`.
    pub fn cp1_monomial_coeffs(&self) -> Vec<Complex64> {
        assert_eq!(self.m, 1);
        let scales = onb_scales(1, self.n);
        self.coeffs
            .iter()
            .zip(&scales)
            .map(|(a, s)| a * s)
            .collect()
    }

    /// Pointwise norm of the section in the metric `h_N`.
    pub fn eval_norm(&self, p: &ProjectivePoint, metric: &MetricModel) -> Result<f64> {
        Ok(self.log_eval_norm(p, metric)?.exp())
    }

    /// Natural log of the pointwise norm; `-inf` on the zero divisor.
    pub fn log_eval_norm(&self, p: &ProjectivePoint, metric: &MetricModel) -> Result<f64> {
        if p.m() != self.m || metric.m() != self.m {
            return Err(Error::MetricDimensionMismatch);
        }
        let w = p.homogeneous();
        let log_fs = if self.m == 1 {
            cp1_log_abs_amplitude(&self.cp1_monomial_coeffs(), w[0], w[1])
        } else {
            self.amplitude(w).norm().ln()
        };
        Ok(log_fs - 0.5 * self.n as f64 * metric.rho_at(p))
    }
}

impl Serialize for Section {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            m: usize,
            #[serde(rename = "N")]
            n: usize,
            coeffs: Vec<[f64; 2]>,
        }
        Repr {
            m: self.m,
            n: self.n,
            coeffs: self.coeffs.iter().map(|c| [c.re, c.im]).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Section {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            m: usize,
            #[serde(rename = "N")]
            n: usize,
            coeffs: Vec<[f64; 2]>,
        }
        let repr = Repr::deserialize(deserializer)?;
        let coeffs = repr
            .coeffs
            .iter()
            .map(|c| Complex64::new(c[0], c[1]))
            .collect();
        Section::new(repr.m, repr.n, coeffs).map_err(D::Error::custom)
    }
}

/// Evaluate `sum_j b_j w0^(n-j) w1^j` for the homogenization of the
/// chart-0 polynomial with coefficients `b`, using a Horner scheme in the
/// smaller coordinate ratio.
pub fn cp1_amplitude(b: &[Complex64], w0: Complex64, w1: Complex64) -> Complex64 {
    let n = b.len() - 1;
    if w0.norm_sqr() >= w1.norm_sqr() {
        let t = w1 / w0;
        let mut acc = Complex64::new(0.0, 0.0);
        for coeff in b.iter().rev() {
            acc = acc * t + coeff;
        }
        acc * w0.powu(n as u32)
    } else {
        let t = w0 / w1;
        let mut acc = Complex64::new(0.0, 0.0);
        for coeff in b.iter() {
            acc = acc * t + coeff;
        }
        acc * w1.powu(n as u32)
    }
}

/// ln |amplitude|, organized so the power of the dominant coordinate never
/// underflows; returns `-inf` on zeros.
pub fn cp1_log_abs_amplitude(b: &[Complex64], w0: Complex64, w1: Complex64) -> f64 {
    let n = b.len() - 1;
    let (t, lead) = if w0.norm_sqr() >= w1.norm_sqr() {
        (w1 / w0, w0)
    } else {
        (w0 / w1, w1)
    };
    let mut acc = Complex64::new(0.0, 0.0);
    if w0.norm_sqr() >= w1.norm_sqr() {
        for coeff in b.iter().rev() {
            acc = acc * t + coeff;
        }
    } else {
        for coeff in b.iter() {
            acc = acc * t + coeff;
        }
    }
    n as f64 * lead.norm().ln() + acc.norm().ln()
}

/// Sum of squared pointwise norms of the orthonormal basis at `p`
/// (Fubini-Study metric). Identically C(N + m, m); computed by summation
/// as a consistency check, in log space per term.
pub fn sum_squares(m: usize, n: usize, p: &ProjectivePoint) -> f64 {
    let w = p.homogeneous();
    let log_abs: Vec<f64> = w.iter().map(|c| c.norm().ln()).collect();
    let mut total = 0.0;
    for j in multi_indices(m, n) {
        let mut ln = -(ln_factorial(m)
            + j.entries().iter().map(|&ji| ln_factorial(ji)).sum::<f64>()
            - ln_factorial(n + m));
        let mut vanishes = false;
        for (i, &ji) in j.entries().iter().enumerate() {
            if ji > 0 {
                if w[i].norm_sqr() == 0.0 {
                    vanishes = true;
                    break;
                }
                ln += 2.0 * ji as f64 * log_abs[i];
            }
        }
        if !vanishes {
            total += ln.exp();
        }
    }
    total
}

/// Section with iid standard complex Gaussian orthonormal-basis
/// coefficients.
pub fn sample_gaussian<R: Rng + ?Sized>(m: usize, n: usize, rng: &mut R) -> Section {
    let d = dim_h0(m, n);
    Section {
        m,
        n,
        coeffs: (0..d).map(|_| complex_standard_normal(rng)).collect(),
    }
}

/// Uniform point of the unit sphere of H^0: a Gaussian sample normalized
/// to unit L^2 norm.
pub fn sample_sphere<R: Rng + ?Sized>(m: usize, n: usize, rng: &mut R) -> Section {
    loop {
        let s = sample_gaussian(m, n, rng);
        let norm = s.norm();
        if norm > 0.0 {
            return s.scaled(Complex64::new(1.0 / norm, 0.0));
        }
    }
}

/// A Haar-random orthonormal basis of H^0, identified with a Haar
/// unitary matrix relative to the reference monomial basis.
#[derive(Debug, Clone)]
pub struct OrthonormalBasisSample {
    m: usize,
    n: usize,
    unitary: DMatrix<Complex64>,
}

impl OrthonormalBasisSample {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    /// Columns are the coefficient vectors of the sampled basis.
    pub fn unitary(&self) -> &DMatrix<Complex64> {
        &self.unitary
    }

    pub fn column_section(&self, j: usize) -> Section {
        Section {
            m: self.m,
            n: self.n,
            coeffs: self.unitary.column(j).iter().copied().collect(),
        }
    }

    /// The fixed monomial basis (identity matrix), the negative control
    /// for the random-basis experiments.
    pub fn fixed_monomial(m: usize, n: usize) -> Self {
        let d = dim_h0(m, n);
        Self {
            m,
            n,
            unitary: DMatrix::identity(d, d),
        }
    }
}

/// Draw an orthonormal basis from Haar measure on U(d_N).
pub fn sample_haar_onb<R: Rng + ?Sized>(m: usize, n: usize, rng: &mut R) -> OrthonormalBasisSample {
    let d = dim_h0(m, n);
    OrthonormalBasisSample {
        m,
        n,
        unitary: haar_unitary(d, rng),
    }
}

/// `int psi |s|^2_{h_N} dV` by quadrature on CP^1; `dV` is the normalized
/// volume of the metric's curvature form.
pub fn mass_integral(
    s: &Section,
    psi: &SpherePoly,
    metric: &MetricModel,
    rule: &QuadratureRule,
) -> Result<f64> {
    if s.m() != 1 || metric.m() != 1 {
        return Err(Error::MetricDimensionMismatch);
    }
    let required = 2 * s.degree() + psi.degree() as usize;
    if rule.degree() < required {
        return Err(Error::RuleTooCoarse {
            degree: rule.degree(),
            required,
        });
    }
    let b = s.cp1_monomial_coeffs();
    let n = s.degree() as i32;
    let one = Complex64::new(1.0, 0.0);
    Ok(rule.integrate(|node| {
        let z = node.affine[0];
        let t = z.norm_sqr();
        let fs_sq = cp1_amplitude(&b, one, z).norm_sqr() / (1.0 + t).powi(n);
        let point = node.to_projective();
        let weight = psi.eval_pair(one, z) * metric.volume_density(&point);
        weight * fs_sq * (-(n as f64) * metric.rho_at(&point)).exp()
    }))
}

/// Monte Carlo version of the mass integral for m >= 2 (Fubini-Study
/// metric); returns (value, standard error).
pub fn mass_integral_mc<R: Rng + ?Sized>(
    s: &Section,
    psi: &crate::testfn::MomentPoly,
    samples: usize,
    rng: &mut R,
) -> (f64, f64) {
    let mut st = crate::stats::RunningStats::new();
    for _ in 0..samples {
        let p = crate::projective::sample_fs_uniform(s.m(), rng);
        let amp_sq = s.amplitude(p.homogeneous()).norm_sqr();
        st.push(psi.eval(&p) * amp_sq);
    }
    (st.mean(), st.std_error())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bergman::MetricModel;
    use crate::projective::{cp1_quadrature, normalize_point, sample_fs_uniform};
    use crate::rng::stream_rng;
    use crate::stats::{ks_uniform_p, RunningStats};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn dims() {
        assert_eq!(dim_h0(1, 5), 6);
        assert_eq!(dim_h0(2, 2), 6);
        assert_eq!(dim_h0(3, 0), 1);
        assert_eq!(dim_h0(7, 0), 1);
    }

    #[test]
    fn enumeration_is_graded_lex() {
        let idx = multi_indices(1, 3);
        let entries: Vec<&[usize]> = idx.iter().map(|j| j.entries()).collect();
        assert_eq!(entries, vec![&[3, 0], &[2, 1], &[1, 2], &[0, 3]]);
        let idx = multi_indices(2, 2);
        let entries: Vec<&[usize]> = idx.iter().map(|j| j.entries()).collect();
        assert_eq!(
            entries,
            vec![
                &[2, 0, 0],
                &[1, 1, 0],
                &[1, 0, 1],
                &[0, 2, 0],
                &[0, 1, 1],
                &[0, 0, 2]
            ]
        );
        assert_eq!(idx.len(), dim_h0(2, 2));
    }

    #[test]
    fn monomial_norms_closed_form() {
        // 1/((N+1) C(N,j)) for m = 1
        let v = monomial_norm_sq(1, 2, &MultiIndex::new(vec![1, 1])).unwrap();
        assert!((v - 1.0 / 6.0).abs() < 1e-15);
        let v = monomial_norm_sq(1, 7, &MultiIndex::new(vec![7, 0])).unwrap();
        assert!((v - 1.0 / 8.0).abs() < 1e-15);
        // m! j0! j1! j2! / (N+m)! for m = 2
        let v = monomial_norm_sq(2, 2, &MultiIndex::new(vec![1, 1, 0])).unwrap();
        assert!((v - 1.0 / 12.0).abs() < 1e-15);
        assert!(monomial_norm_sq(1, 3, &MultiIndex::new(vec![1, 1])).is_err());
    }

    #[test]
    fn monomial_norms_large_degree_stay_finite() {
        for n in [100usize, 200, 300] {
            let j = MultiIndex::new(vec![n / 2, n - n / 2]);
            let v = monomial_norm_sq(1, n, &j).unwrap();
            assert!(v.is_finite() && v > 0.0);
        }
    }

    #[test]
    fn eval_norm_examples() {
        let fs = MetricModel::fubini_study(1);
        // S^N_(N,0) = sqrt(N+1) z0^N has norm sqrt(N+1) at [1:0]
        for n in [1usize, 5, 9] {
            let s = Section::basis_element(1, n, 0);
            let origin = normalize_point(&[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
            let v = s.eval_norm(&origin, &fs).unwrap();
            assert!((v - ((n + 1) as f64).sqrt()).abs() < 1e-12);
        }
        // vanishes on the zero divisor
        let s = Section::new(1, 2, vec![c(-1.0, 0.0), c(0.0, 0.0), c(3.0f64.sqrt(), 0.0)])
            .unwrap();
        // monomial coeffs: p(z) = -sqrt(3) + 3 z^2, zero at z = 3^(-1/4)
        let z = normalize_point(&[c(1.0, 0.0), c(3.0f64.powf(-0.25), 0.0)]).unwrap();
        assert!(s.eval_norm(&z, &fs).unwrap() < 1e-12);
        // unit vectors integrate to one
        let s = Section::basis_element(1, 5, 0);
        let rule = cp1_quadrature(2 * 5 + 4);
        let one = SpherePoly::constant(1.0);
        let mass = mass_integral(&s, &one, &fs, &rule).unwrap();
        assert!((mass - 1.0).abs() < 1e-9);
    }

    #[test]
    fn eval_norm_scale_equivariance() {
        let mut rng = stream_rng(9, 0);
        let fs = MetricModel::fubini_study(1);
        let s = sample_gaussian(1, 12, &mut rng);
        let scaled = s.scaled(c(-2.5, 1.0));
        let factor = c(-2.5, 1.0).norm();
        for _ in 0..20 {
            let p = sample_fs_uniform(1, &mut rng);
            let a = s.eval_norm(&p, &fs).unwrap();
            let b = scaled.eval_norm(&p, &fs).unwrap();
            assert!((b - factor * a).abs() <= 1e-12 * b.abs().max(1.0));
        }
    }

    #[test]
    fn sum_squares_is_constant() {
        let mut rng = stream_rng(21, 0);
        for (m, n, expect) in [(1usize, 5usize, 6.0), (2, 2, 6.0), (1, 0, 1.0)] {
            for _ in 0..20 {
                let p = sample_fs_uniform(m, &mut rng);
                let v = sum_squares(m, n, &p);
                assert!(
                    (v - expect).abs() < 1e-9 * expect,
                    "m={m} N={n}: {v} vs {expect}"
                );
            }
        }
        // relative sd over 100 random points, m in {1,2}
        for (m, n, tol) in [(1usize, 13usize, 1e-9), (2, 7, 1e-8)] {
            let mut st = RunningStats::new();
            for _ in 0..100 {
                let p = sample_fs_uniform(m, &mut rng);
                st.push(sum_squares(m, n, &p));
            }
            let rel = st.variance().sqrt() / st.mean();
            assert!(rel < tol, "m={m}: relative sd {rel}");
        }
    }

    #[test]
    fn gaussian_moments() {
        let mut rng = stream_rng(33, 0);
        let trials = 100_000;
        // E|s|^2 = d_N: sum of d_N unit-variance moduli squared
        let mut norm_sq = RunningStats::new();
        let mut re_first = RunningStats::new();
        let mut cov_re = RunningStats::new();
        for _ in 0..trials {
            let s = sample_gaussian(1, 5, &mut rng);
            norm_sq.push(s.norm().powi(2));
            re_first.push(s.coeffs()[0].re);
            cov_re.push((s.coeffs()[1] * s.coeffs()[3].conj()).re);
        }
        assert!((norm_sq.mean() - 6.0).abs() < 3.0 * norm_sq.std_error());
        assert!(re_first.mean().abs() < 3.0 * re_first.std_error());
        assert!(cov_re.mean().abs() < 3.0 * cov_re.std_error());
    }

    #[test]
    fn sphere_model_statistics() {
        let mut rng = stream_rng(34, 0);
        let trials = 100_000;
        let d = dim_h0(1, 4);
        let mut coeff_sq = RunningStats::new();
        let mut phases = Vec::with_capacity(trials);
        for _ in 0..trials {
            let s = sample_sphere(1, 4, &mut rng);
            assert!((s.norm() - 1.0).abs() < 1e-12);
            coeff_sq.push(s.coeffs()[2].norm_sqr());
            let ph = s.coeffs()[0].arg();
            phases.push(ph / (2.0 * std::f64::consts::PI) + 0.5);
        }
        // E|a_J|^2 = 1/d by symmetry
        assert!((coeff_sq.mean() - 1.0 / d as f64).abs() < 3.0 * coeff_sq.std_error());
        // coefficient phases are uniform (KS at 1%)
        assert!(ks_uniform_p(&phases) > 0.01);
    }

    #[test]
    fn haar_onb_is_unitary_with_unit_columns() {
        let mut rng = stream_rng(35, 0);
        let onb = sample_haar_onb(1, 7, &mut rng);
        let u = onb.unitary();
        let gram = u.adjoint() * u;
        let d = dim_h0(1, 7);
        let eye = DMatrix::<Complex64>::identity(d, d);
        assert!((gram - eye).norm() < 1e-10);
        for j in 0..d {
            assert!((onb.column_section(j).norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn haar_u11_fourth_moment() {
        // E|U_11|^4 = 2/(d(d+1)) = 1/3 at d = 2
        let mut rng = stream_rng(36, 0);
        let mut st = RunningStats::new();
        for _ in 0..100_000 {
            let u = haar_unitary(2, &mut rng);
            st.push(u[(0, 0)].norm_sqr().powi(2));
        }
        assert!((st.mean() - 1.0 / 3.0).abs() < 4.0 * st.std_error());
    }

    #[test]
    fn gram_matrix_of_reference_basis_is_identity() {
        // every (m, N) with d_N <= 36: quadrature for m = 1
        for n in 0..=35usize {
            let d = dim_h0(1, n);
            let rule = cp1_quadrature((2 * n).max(1) + 4);
            let scales = onb_scales(1, n);
            let mut worst: f64 = 0.0;
            // gram via quadrature of pairwise products
            let mut gram = DMatrix::<Complex64>::zeros(d, d);
            for (node, wt) in rule.nodes().iter().zip(rule.weights()) {
                let z = node.affine[0];
                let t = z.norm_sqr();
                let damp = (1.0 + t).powi(-(n as i32));
                let vals: Vec<Complex64> = (0..d)
                    .map(|j| scales[j] * z.powu(j as u32))
                    .collect();
                for a in 0..d {
                    for b in 0..d {
                        gram[(a, b)] += wt * damp * vals[a] * vals[b].conj();
                    }
                }
            }
            for a in 0..d {
                for b in 0..d {
                    let want = if a == b { 1.0 } else { 0.0 };
                    worst = worst.max((gram[(a, b)] - c(want, 0.0)).norm());
                }
            }
            assert!(worst < 1e-8, "N={n}: deviation {worst}");
        }
    }

    #[test]
    fn gram_matrix_m2_monte_carlo() {
        // m = 2, d_N <= 36 means N <= 6; check at N = 6 within 4 sigma
        let n = 6usize;
        let d = dim_h0(2, n);
        assert!(d <= 36);
        let scales = onb_scales(2, n);
        let indices = multi_indices(2, n);
        let mut rng = stream_rng(37, 0);
        let samples = 100_000;
        let mut mean = DMatrix::<Complex64>::zeros(d, d);
        let mut var_acc = DMatrix::<f64>::zeros(d, d);
        for _ in 0..samples {
            let p = sample_fs_uniform(2, &mut rng);
            let w = p.homogeneous();
            let vals: Vec<Complex64> = indices
                .iter()
                .zip(&scales)
                .map(|(j, s)| {
                    let mut acc = Complex64::new(*s, 0.0);
                    for (i, &ji) in j.entries().iter().enumerate() {
                        acc *= w[i].powu(ji as u32);
                    }
                    acc
                })
                .collect();
            for a in 0..d {
                for b in 0..d {
                    let x = vals[a] * vals[b].conj();
                    mean[(a, b)] += x;
                    var_acc[(a, b)] += x.norm_sqr();
                }
            }
        }
        let samples_f = samples as f64;
        for a in 0..d {
            for b in 0..d {
                let mu = mean[(a, b)] / samples_f;
                let second = var_acc[(a, b)] / samples_f;
                let sigma = ((second - mu.norm_sqr()).max(0.0) / samples_f).sqrt();
                let want = if a == b { 1.0 } else { 0.0 };
                assert!(
                    (mu - c(want, 0.0)).norm() <= 4.0 * sigma + 1e-12,
                    "({a},{b}): {mu} vs {want}, sigma {sigma}"
                );
            }
        }
    }

    #[test]
    fn mass_integral_examples() {
        let fs = MetricModel::fubini_study(1);
        let mut rng = stream_rng(40, 0);
        // psi = 1 returns |s|^2
        let s = sample_gaussian(1, 8, &mut rng);
        let rule = cp1_quadrature(2 * 8 + 4);
        let one = SpherePoly::constant(1.0);
        let v = mass_integral(&s, &one, &fs, &rule).unwrap();
        assert!((v - s.norm().powi(2)).abs() < 1e-9 * s.norm().powi(2));
        // psi = u against S^5_(5,0): Beta-integral oracle
        // int u |S|^2 dV = (N+1) * [B(1, N+2) - B(2, N+1)] = (N - 2j)/(N + 2), j = 0
        let n = 5usize;
        let s = Section::basis_element(1, n, 0);
        let u = SpherePoly::monomial(1, 0, 0, 1.0);
        let rule = cp1_quadrature(2 * n + 4 + 1);
        let oracle = {
            let beta = |a: f64, b: f64| {
                (ln_factorial(a as usize - 1) + ln_factorial(b as usize - 1)
                    - ln_factorial((a + b) as usize - 1))
                .exp()
            };
            let np1 = (n + 1) as f64;
            np1 * (beta(1.0, (n + 2) as f64) - beta(2.0, (n + 1) as f64))
        };
        assert!((oracle - 5.0 / 7.0).abs() < 1e-12);
        let v = mass_integral(&s, &u, &fs, &rule).unwrap();
        assert!((v - oracle).abs() < 1e-10);
        // sphere-uniform sections average to zero for psi = u
        let mut st = RunningStats::new();
        for _ in 0..10_000 {
            let s = sample_sphere(1, 5, &mut rng);
            st.push(mass_integral(&s, &u, &fs, &rule).unwrap());
        }
        assert!(st.mean().abs() < 3.0 * st.std_error());
        // coarse rule is rejected
        let coarse = cp1_quadrature(3);
        assert!(matches!(
            mass_integral(&s, &u, &fs, &coarse),
            Err(Error::RuleTooCoarse { .. })
        ));
    }

    #[test]
    fn mass_integral_mc_matches_moment_oracle() {
        // <m00 S_J, S_J> for J = (N, 0, 0): the ratio of adjacent
        // monomial norms gives (j0 + 1)/(N + 3) on CP^2
        let n = 5usize;
        let s = Section::basis_element(2, n, 0);
        let psi = crate::testfn::MomentPoly::monomial(0, 1, 1.0).unwrap();
        let oracle = (n as f64 + 1.0) / (n as f64 + 3.0);
        let mut rng = stream_rng(52, 0);
        let (value, se) = mass_integral_mc(&s, &psi, 60_000, &mut rng);
        assert!(
            (value - oracle).abs() <= 3.0 * se,
            "{value} vs {oracle} (se {se})"
        );
    }

    #[test]
    fn section_json_round_trip() {
        let mut rng = stream_rng(50, 0);
        let s = sample_gaussian(2, 3, &mut rng);
        let json = serde_json::to_string(&s).unwrap();
        assert!(json.contains("\"m\":2") && json.contains("\"N\":3"));
        let back: Section = serde_json::from_str(&json).unwrap();
        assert_eq!(s, back);
    }

    #[test]
    fn unitary_invariance_of_sphere_model() {
        // pushforward of the sphere measure by a fixed Haar unitary has
        // the same first two moments of the mass functional
        let mut rng = stream_rng(51, 0);
        let n = 6usize;
        let d = dim_h0(1, n);
        let u = haar_unitary(d, &mut rng);
        let fs = MetricModel::fubini_study(1);
        let upoly = SpherePoly::monomial(1, 0, 0, 1.0);
        let rule = cp1_quadrature(2 * n + 4 + 1);
        let mut plain = RunningStats::new();
        let mut pushed = RunningStats::new();
        let mut plain2 = RunningStats::new();
        let mut pushed2 = RunningStats::new();
        for _ in 0..20_000 {
            let s = sample_sphere(1, n, &mut rng);
            let v = mass_integral(&s, &upoly, &fs, &rule).unwrap();
            plain.push(v);
            plain2.push(v * v);
            let coeffs = DMatrix::from_column_slice(d, 1, s.coeffs());
            let rotated = &u * coeffs;
            let s2 = Section::new(1, n, rotated.column(0).iter().copied().collect()).unwrap();
            let v2 = mass_integral(&s2, &upoly, &fs, &rule).unwrap();
            pushed.push(v2);
            pushed2.push(v2 * v2);
        }
        let se1 = plain.std_error().hypot(pushed.std_error());
        assert!((plain.mean() - pushed.mean()).abs() < 4.0 * se1);
        let se2 = plain2.std_error().hypot(pushed2.std_error());
        assert!((plain2.mean() - pushed2.mean()).abs() < 4.0 * se2);
    }
}
