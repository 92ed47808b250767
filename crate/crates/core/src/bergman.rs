//! Hermitian metrics on O(1) over CP^1 and their numerical Bergman
//! orthonormal bases.
//!
//! A metric is either Fubini-Study or Fubini-Study times `exp(-rho)` with
//! `rho` a polynomial in the sphere coordinates (degree <= 4, coefficients
//! <= 1/2, curvature checked positive on a grid at construction). The
//! curvature form of the perturbed metric has density
//! `1 + Lap_{S^2} rho` against the Fubini-Study volume; since the total
//! curvature mass on CP^1 is one, that same density is the normalized
//! volume of the perturbed metric.
//!
//! The Bergman basis is obtained by Cholesky-orthonormalizing the
//! reference monomial basis against the perturbed inner product, which is
//! Gram-Schmidt in the monomial order. Densities built from it (the
//! Bergman density and the normalized Kodaira pullback) are the
//! quantities whose large-N behaviour the experiments track.

use crate::error::{Error, Result};
use crate::projective::{cp1_quadrature, ChartPoint, ProjectivePoint, QuadratureRule};
use crate::sections::{dim_h0, onb_scales};
use crate::testfn::{SpherePoly, SphereTerm, FD_STEP};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Largest allowed degree of the perturbation polynomial.
pub const MAX_RHO_DEGREE: u32 = 4;
/// Largest allowed coefficient magnitude of the perturbation polynomial.
pub const MAX_RHO_COEFF: f64 = 0.5;
/// Grid degree for the construction-time curvature positivity check.
pub const CURVATURE_GRID_DEGREE: usize = 64;

/// A Hermitian metric on O(1): Fubini-Study, or Fubini-Study times
/// `exp(-rho)` on CP^1.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricModel {
    m: usize,
    rho: Option<SpherePoly>,
    /// sup |rho| over the check grid; 0 for Fubini-Study.
    rho_sup: f64,
}

impl MetricModel {
    pub fn fubini_study(m: usize) -> Self {
        Self {
            m,
            rho: None,
            rho_sup: 0.0,
        }
    }

    /// The perturbed metric `h_FS e^{-rho}` on CP^1.
    pub fn perturbed(rho: SpherePoly) -> Result<Self> {
        if rho.degree() > MAX_RHO_DEGREE {
            return Err(Error::InvalidMetric(format!(
                "perturbation degree {} exceeds {MAX_RHO_DEGREE}",
                rho.degree()
            )));
        }
        if rho.max_abs_coeff() > MAX_RHO_COEFF {
            return Err(Error::InvalidMetric(format!(
                "perturbation coefficient {} exceeds {MAX_RHO_COEFF}",
                rho.max_abs_coeff()
            )));
        }
        let metric = Self {
            m: 1,
            rho_sup: 0.0,
            rho: Some(rho),
        };
        // curvature positivity on the check grid
        let grid = cp1_quadrature(CURVATURE_GRID_DEGREE);
        let mut min_curv = f64::INFINITY;
        let mut sup_rho: f64 = 0.0;
        for node in grid.nodes() {
            let p = node.to_projective();
            min_curv = min_curv.min(metric.volume_density(&p));
            sup_rho = sup_rho.max(metric.rho_at(&p).abs());
        }
        if min_curv <= 0.0 {
            return Err(Error::InvalidMetric(format!(
                "curvature not positive (grid minimum {min_curv:.3e})"
            )));
        }
        Ok(Self {
            rho_sup: sup_rho,
            ..metric
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn is_fubini_study(&self) -> bool {
        self.rho.is_none()
    }

    pub fn rho(&self) -> Option<&SpherePoly> {
        self.rho.as_ref()
    }

    pub fn rho_degree(&self) -> u32 {
        self.rho.as_ref().map_or(0, |r| r.degree())
    }

    /// `rho` at a point; 0 for Fubini-Study.
    pub fn rho_at(&self, p: &ProjectivePoint) -> f64 {
        match &self.rho {
            None => 0.0,
            Some(rho) => rho.eval(p),
        }
    }

    /// Density of the curvature form against the Fubini-Study volume,
    /// `1 + Lap_{S^2} rho`. Because the curvature has unit total mass on
    /// CP^1, this is also the density of the normalized volume of the
    /// perturbed metric.
    pub fn volume_density(&self, p: &ProjectivePoint) -> f64 {
        match &self.rho {
            None => 1.0,
            Some(rho) => 1.0 + rho.laplacian_sphere(p),
        }
    }

    /// Curvature density at a chart point. Points deep in a chart are
    /// re-expressed through the max-modulus chart internally, so this
    /// never fails near the chart boundary.
    pub fn curvature_density(&self, p: &ChartPoint) -> f64 {
        self.volume_density(&p.to_projective())
    }

    /// Quadrature degree that resolves Gram integrands at degree `n` with
    /// an extra polynomial factor of degree `extra`: `2n + deg(rho) +
    /// extra` plus a margin for the `exp(-n rho)` factor.
    pub fn gram_rule_degree(&self, n: usize, extra: u32) -> usize {
        let exp_margin = (n as f64 * self.rho_sup).ceil() as usize;
        2 * n + self.rho_degree() as usize + extra as usize + exp_margin + 16
    }
}

impl Serialize for MetricModel {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            kind: &'a str,
            rho: Vec<SphereTerm>,
        }
        let repr = match &self.rho {
            None => Repr {
                kind: "fs",
                rho: vec![],
            },
            Some(rho) => Repr {
                kind: "perturbed",
                rho: rho.terms().to_vec(),
            },
        };
        repr.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for MetricModel {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            kind: String,
            #[serde(default)]
            rho: Vec<SphereTerm>,
            #[serde(default)]
            m: Option<usize>,
        }
        let repr = Repr::deserialize(deserializer)?;
        match repr.kind.as_str() {
            "fs" => Ok(MetricModel::fubini_study(repr.m.unwrap_or(1))),
            "perturbed" => MetricModel::perturbed(SpherePoly::new(repr.rho))
                .map_err(D::Error::custom),
            other => Err(D::Error::custom(format!("unknown metric kind `{other}`"))),
        }
    }
}

/// Fubini-Study amplitudes of the reference orthonormal basis at the
/// unit representative `(w0, w1)`.
fn fs_onb_amplitudes(n: usize, w0: Complex64, w1: Complex64) -> Vec<Complex64> {
    let scales = onb_scales(1, n);
    let mut pow0 = vec![Complex64::new(1.0, 0.0); n + 1];
    let mut pow1 = vec![Complex64::new(1.0, 0.0); n + 1];
    for k in 1..=n {
        pow0[k] = pow0[k - 1] * w0;
        pow1[k] = pow1[k - 1] * w1;
    }
    (0..=n)
        .map(|j| scales[j] * pow0[n - j] * pow1[j])
        .collect()
}

/// Gram matrix of the reference monomial orthonormal basis under the
/// perturbed inner product, by quadrature.
pub fn gram_matrix(
    metric: &MetricModel,
    n: usize,
    rule: &QuadratureRule,
) -> Result<DMatrix<Complex64>> {
    let required = 2 * n + metric.rho_degree() as usize;
    if rule.degree() < required {
        return Err(Error::RuleTooCoarse {
            degree: rule.degree(),
            required,
        });
    }
    let d = dim_h0(1, n);
    let mut gram = DMatrix::<Complex64>::zeros(d, d);
    for (node, &wt) in rule.nodes().iter().zip(rule.weights()) {
        let p = node.to_projective();
        let w = p.homogeneous();
        let amps = fs_onb_amplitudes(n, w[0], w[1]);
        let weight = wt
            * metric.volume_density(&p)
            * (-(n as f64) * metric.rho_at(&p)).exp();
        for a in 0..d {
            for b in a..d {
                gram[(a, b)] += weight * amps[a] * amps[b].conj();
            }
        }
    }
    // fill the lower triangle and symmetrize
    for a in 0..d {
        for b in 0..a {
            gram[(a, b)] = gram[(b, a)].conj();
        }
    }
    let eig = nalgebra::SymmetricEigen::new(gram.clone());
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &ev in eig.eigenvalues.iter() {
        lo = lo.min(ev);
        hi = hi.max(ev);
    }
    if lo <= 0.0 || hi / lo > 1e12 {
        return Err(Error::IllConditionedGram {
            cond: if lo > 0.0 { hi / lo } else { f64::INFINITY },
        });
    }
    Ok(gram)
}

/// An orthonormal basis of degree-N sections for a perturbed metric,
/// stored as a triangular change of basis from the reference monomial
/// orthonormal basis.
#[derive(Debug, Clone)]
pub struct BergmanBasis {
    metric: MetricModel,
    n: usize,
    /// Lower-triangular with positive real diagonal; row k holds the
    /// reference-basis coefficients of the k-th orthonormalized section,
    /// so the map is Gram-Schmidt on monomials.
    transform: DMatrix<Complex64>,
    rule_degree: usize,
}

impl BergmanBasis {
    pub fn metric(&self) -> &MetricModel {
        &self.metric
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn transform(&self) -> &DMatrix<Complex64> {
        &self.transform
    }

    pub fn dim(&self) -> usize {
        self.transform.nrows()
    }

    /// Degree of the quadrature rule used for the construction.
    pub fn rule_degree(&self) -> usize {
        self.rule_degree
    }

    /// Fubini-Study amplitudes of the orthonormalized basis at the unit
    /// representative of `p` (the metric factor `e^{-n rho/2}` excluded).
    pub fn fs_amplitudes(&self, p: &ProjectivePoint) -> Vec<Complex64> {
        let w = p.homogeneous();
        let monomial = DMatrix::from_column_slice(
            self.dim(),
            1,
            &fs_onb_amplitudes(self.n, w[0], w[1]),
        );
        (&self.transform * monomial).column(0).iter().copied().collect()
    }
}

/// Orthonormalize the reference basis against the perturbed inner
/// product: the transform is the inverse Cholesky factor of the Gram
/// matrix.
pub fn bergman_basis(metric: &MetricModel, n: usize) -> Result<BergmanBasis> {
    if metric.m() != 1 {
        return Err(Error::MetricDimensionMismatch);
    }
    let rule_degree = metric.gram_rule_degree(n, 0);
    let rule = cp1_quadrature(rule_degree);
    let gram = gram_matrix(metric, n, &rule)?;
    let chol = nalgebra::Cholesky::new(gram).ok_or(Error::GramNotPositiveDefinite)?;
    let d = dim_h0(1, n);
    let transform = chol
        .l()
        .solve_lower_triangular(&DMatrix::<Complex64>::identity(d, d))
        .ok_or(Error::GramNotPositiveDefinite)?;
    Ok(BergmanBasis {
        metric: metric.clone(),
        n,
        transform,
        rule_degree,
    })
}

/// Bergman density: the sum of squared pointwise norms of the
/// orthonormal basis at `p` in the metric `h_N`.
pub fn bergman_density(basis: &BergmanBasis, p: &ProjectivePoint) -> f64 {
    let amps = basis.fs_amplitudes(p);
    let fs_sum: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
    fs_sum * (-(basis.n as f64) * basis.metric.rho_at(p)).exp()
}

/// Density against the Fubini-Study volume of the normalized pullback of
/// the Fubini-Study form under the basis embedding:
/// `(1 + |z|^2)^2 / (4N) * Lap log sum_j |f_j|^2` in the max-modulus
/// chart, by finite differences with Richardson extrapolation.
pub fn kodaira_pullback_density(basis: &BergmanBasis, p: &ProjectivePoint) -> Result<f64> {
    let chart = p.preferred_chart();
    let z = p.to_chart(chart).expect("preferred chart is valid").affine[0];
    let n = basis.n;
    let d = basis.dim();
    let scales = onb_scales(1, n);
    // chart representation of the monomial basis: z^j in chart 0,
    // z^(n-j) in chart 1
    let monomials = |z: Complex64| -> DMatrix<Complex64> {
        let mut pows = vec![Complex64::new(1.0, 0.0); n + 1];
        for k in 1..=n {
            pows[k] = pows[k - 1] * z;
        }
        DMatrix::from_fn(d, 1, |j, _| {
            scales[j]
                * if chart == 0 {
                    pows[j]
                } else {
                    pows[n - j]
                }
        })
    };
    let log_f = |z: Complex64| -> f64 {
        let amps = &basis.transform * monomials(z);
        let total: f64 = amps.column(0).iter().map(|a| a.norm_sqr()).sum();
        total.ln()
    };
    // base-locus guard at the point itself
    let amps = &basis.transform * monomials(z);
    let total: f64 = amps.column(0).iter().map(|a| a.norm_sqr()).sum();
    if total < 1e-280 {
        return Err(Error::BaseLocus);
    }
    let stencil = |h: f64| -> f64 {
        (log_f(z + Complex64::new(h, 0.0))
            + log_f(z - Complex64::new(h, 0.0))
            + log_f(z + Complex64::new(0.0, h))
            + log_f(z - Complex64::new(0.0, h))
            - 4.0 * log_f(z))
            / (h * h)
    };
    let lap = (4.0 * stencil(FD_STEP / 2.0) - stencil(FD_STEP)) / 3.0;
    let s = 1.0 + z.norm_sqr();
    Ok(s * s * lap / (4.0 * n as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::projective::{normalize_point, sample_fs_uniform};
    use crate::rng::stream_rng;

    fn rho_03u() -> SpherePoly {
        SpherePoly::monomial(1, 0, 0, 0.3)
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn metric_construction_limits() {
        assert!(MetricModel::perturbed(rho_03u()).is_ok());
        assert!(MetricModel::perturbed(SpherePoly::monomial(5, 0, 0, 0.1)).is_err());
        assert!(MetricModel::perturbed(SpherePoly::monomial(1, 0, 0, 0.7)).is_err());
    }

    #[test]
    fn curvature_density_examples() {
        let fs = MetricModel::fubini_study(1);
        let mut rng = stream_rng(60, 0);
        for _ in 0..10 {
            let p = sample_fs_uniform(1, &mut rng);
            assert_eq!(fs.volume_density(&p), 1.0);
        }
        let pert = MetricModel::perturbed(rho_03u()).unwrap();
        // at z = 0: 1 + 0.3 * Lap_{S^2} u (Y_1 eigenvalue -2 at u = 1)
        let origin = normalize_point(&[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert!((pert.volume_density(&origin) - 0.4).abs() < 1e-7);
        // brute-force second differences at two step sizes agree O(h^2)
        let lap_fd = |h: f64| -> f64 {
            let rho = |z: Complex64| rho_03u().eval_pair(c(1.0, 0.0), z);
            (rho(c(h, 0.0)) + rho(c(-h, 0.0)) + rho(c(0.0, h)) + rho(c(0.0, -h))
                - 4.0 * rho(c(0.0, 0.0)))
                / (h * h)
        };
        let exact = -2.4; // Lap_chart(0.3 u) at 0 = 0.3 * (-8)
        let coarse = lap_fd(1e-2);
        let fine = lap_fd(1e-3);
        assert!((coarse - exact).abs() < 1e-3);
        assert!((fine - exact).abs() < 1e-5);
        assert!((fine - exact).abs() < (coarse - exact).abs());
        // density from the chart Laplacian: 1 + (1+t)^2/4 * Lap(rho)
        assert!((1.0 + fine / 4.0 - pert.volume_density(&origin)).abs() < 1e-5);
        // total curvature mass is 1 (the ddbar term integrates to zero)
        let rule = cp1_quadrature(16);
        let total = rule.integrate(|node| pert.curvature_density(node));
        assert!((total - 1.0).abs() < 1e-6, "total {total}");
    }

    #[test]
    fn curvature_density_switches_chart_near_infinity() {
        let pert = MetricModel::perturbed(rho_03u()).unwrap();
        // 0.3u has curvature density 1 - 0.6u; at infinity u = -1 -> 1.6
        let far = ChartPoint::new(vec![c(1e7, 0.0)], 0);
        let v = pert.curvature_density(&far);
        assert!((v - 1.6).abs() < 1e-6, "{v}");
    }

    #[test]
    fn gram_fs_is_identity() {
        let fs = MetricModel::fubini_study(1);
        let n = 9;
        let rule = cp1_quadrature(2 * n + 4);
        let gram = gram_matrix(&fs, n, &rule).unwrap();
        let d = dim_h0(1, n);
        let eye = DMatrix::<Complex64>::identity(d, d);
        assert!((gram - eye).norm() < 1e-10);
    }

    #[test]
    fn gram_perturbed_axisymmetric_is_diagonal() {
        // rotation about the u-axis couples no distinct monomials
        let pert = MetricModel::perturbed(rho_03u()).unwrap();
        let n = 6;
        let rule = cp1_quadrature(pert.gram_rule_degree(n, 0));
        let gram = gram_matrix(&pert, n, &rule).unwrap();
        let mut max_off: f64 = 0.0;
        let mut herm: f64 = 0.0;
        for a in 0..=n {
            for b in 0..=n {
                if a != b {
                    max_off = max_off.max(gram[(a, b)].norm());
                }
                herm = herm.max((gram[(a, b)] - gram[(b, a)].conj()).norm());
            }
        }
        assert!(max_off < 1e-10, "off-diagonal {max_off}");
        assert!(herm < 1e-12);
        assert!(matches!(
            gram_matrix(&pert, n, &cp1_quadrature(3)),
            Err(Error::RuleTooCoarse { .. })
        ));
    }

    #[test]
    fn bergman_basis_orthonormalizes() {
        let pert = MetricModel::perturbed(rho_03u()).unwrap();
        let n = 8;
        let basis = bergman_basis(&pert, n).unwrap();
        // FS gives the identity transform
        let fs_basis = bergman_basis(&MetricModel::fubini_study(1), n).unwrap();
        let d = dim_h0(1, n);
        let eye = DMatrix::<Complex64>::identity(d, d);
        assert!((fs_basis.transform() - &eye).norm() < 1e-9);
        // re-Gram the transformed basis: M G M^H = I
        let rule = cp1_quadrature(basis.rule_degree());
        let gram = gram_matrix(&pert, n, &rule).unwrap();
        let m = basis.transform();
        let regram = m * gram * m.adjoint();
        assert!((regram - eye).norm() < 1e-8);
        // triangular with positive real determinant
        let mut det = c(1.0, 0.0);
        for k in 0..d {
            det *= m[(k, k)];
            for j in (k + 1)..d {
                assert!(m[(k, j)].norm() < 1e-14, "upper part not zero");
            }
        }
        assert!(det.im.abs() < 1e-12 && det.re > 0.0);
    }

    #[test]
    fn bergman_density_fs_is_constant() {
        let fs = MetricModel::fubini_study(1);
        let basis = bergman_basis(&fs, 5).unwrap();
        let mut rng = stream_rng(61, 0);
        for _ in 0..20 {
            let p = sample_fs_uniform(1, &mut rng);
            assert!((bergman_density(&basis, &p) - 6.0).abs() < 1e-9);
        }
    }

    #[test]
    fn bergman_density_integrates_to_dimension() {
        // a second, non-axisymmetric perturbation exercises the generic
        // (dense-Gram) path
        let tilted = MetricModel::perturbed(SpherePoly::new(vec![
            SphereTerm {
                pow_u: 0,
                pow_v: 1,
                pow_w: 0,
                coeff: 0.2,
            },
            SphereTerm {
                pow_u: 1,
                pow_v: 0,
                pow_w: 1,
                coeff: 0.1,
            },
        ]))
        .unwrap();
        // N is capped by conditioning: the perturbed norms of the
        // pole-concentrated monomials differ by e^(2 N sup|rho|), so at
        // rho = 0.3u the Gram passes the 1e12 condition guard only up to
        // N ~ 46; 64 must be rejected rather than silently lose the
        // Cholesky digits
        let steep = MetricModel::perturbed(rho_03u()).unwrap();
        assert!(matches!(
            bergman_basis(&steep, 64),
            Err(Error::IllConditionedGram { .. })
        ));
        for (metric, degrees) in [
            (steep, vec![4usize, 16, 40]),
            (tilted, vec![6usize, 24]),
        ] {
            for n in degrees {
                let basis = bergman_basis(&metric, n).unwrap();
                let rule = cp1_quadrature(metric.gram_rule_degree(n, 0));
                let total = rule.integrate(|node| {
                    let p = node.to_projective();
                    bergman_density(&basis, &p) * metric.volume_density(&p)
                });
                let d = dim_h0(1, n) as f64;
                assert!((total - d).abs() < 1e-6 * d, "N={n}: {total} vs {d}");
                // positivity on a sample of points
                let mut rng = stream_rng(62, 0);
                for _ in 0..50 {
                    let p = sample_fs_uniform(1, &mut rng);
                    assert!(bergman_density(&basis, &p) > 0.0);
                }
            }
        }
    }

    #[test]
    fn tian_leading_term_contracts() {
        // sup |density/N - 1| decreases when N doubles, two doublings
        let pert = MetricModel::perturbed(rho_03u()).unwrap();
        let mut rng = stream_rng(63, 0);
        let points: Vec<_> = (0..200).map(|_| sample_fs_uniform(1, &mut rng)).collect();
        let sup_dev = |n: usize| -> f64 {
            let basis = bergman_basis(&pert, n).unwrap();
            points
                .iter()
                .map(|p| (bergman_density(&basis, p) / n as f64 - 1.0).abs())
                .fold(0.0, f64::max)
        };
        let d8 = sup_dev(8);
        let d16 = sup_dev(16);
        let d32 = sup_dev(32);
        assert!(d16 < d8, "{d8} -> {d16}");
        assert!(d32 < d16, "{d16} -> {d32}");
    }

    #[test]
    fn kodaira_density_fs_is_one() {
        let fs = MetricModel::fubini_study(1);
        let mut rng = stream_rng(64, 0);
        for n in [4usize, 12] {
            let basis = bergman_basis(&fs, n).unwrap();
            for _ in 0..25 {
                let p = sample_fs_uniform(1, &mut rng);
                let v = kodaira_pullback_density(&basis, &p).unwrap();
                assert!((v - 1.0).abs() < 5e-6, "N={n}: {v}");
            }
        }
    }

    #[test]
    fn kodaira_density_tracks_curvature_and_integrates_to_one() {
        let pert = MetricModel::perturbed(rho_03u()).unwrap();
        let mut rng = stream_rng(65, 0);
        let points: Vec<_> = (0..100).map(|_| sample_fs_uniform(1, &mut rng)).collect();
        let sup_dev = |n: usize| -> f64 {
            let basis = bergman_basis(&pert, n).unwrap();
            points
                .iter()
                .map(|p| {
                    let v = kodaira_pullback_density(&basis, p).unwrap();
                    assert!(v >= 0.0, "pullback density must be nonnegative");
                    (v - pert.volume_density(p)).abs()
                })
                .fold(0.0, f64::max)
        };
        let d16 = sup_dev(16);
        let d32 = sup_dev(32);
        // the deviation roughly halves; allow +-30% around a factor 2
        assert!(
            d32 <= 0.65 * d16 && d32 >= 0.35 * d16 / 2.0,
            "{d16} -> {d32}"
        );
        // cohomology: the pullback density integrates to one
        let n = 16;
        let basis = bergman_basis(&pert, n).unwrap();
        let rule = cp1_quadrature(pert.gram_rule_degree(n, 0));
        let total = rule.integrate(|node| {
            kodaira_pullback_density(&basis, &node.to_projective()).unwrap()
        });
        assert!((total - 1.0).abs() < 1e-5, "total {total}");
    }

    #[test]
    fn metric_json_round_trip() {
        let pert = MetricModel::perturbed(rho_03u()).unwrap();
        let json = serde_json::to_string(&pert).unwrap();
        assert!(json.contains("perturbed"));
        let back: MetricModel = serde_json::from_str(&json).unwrap();
        assert_eq!(pert, back);
        let fs: MetricModel = serde_json::from_str(r#"{"kind":"fs"}"#).unwrap();
        assert!(fs.is_fubini_study());
        assert!(serde_json::from_str::<MetricModel>(r#"{"kind":"bogus"}"#).is_err());
    }
}
