//! Test functions paired against zero currents.
//!
//! On CP^1 a test function is a real polynomial in the sphere coordinates
//! (u, v, w), degree at most 6. On CP^2 it is a real polynomial of degree
//! at most 4 in the real and imaginary parts of the moment coordinates
//! `w_i conj(w_j) / |w|^2`. Both families are smooth and bounded with
//! bounded chart Laplacians, and both are closed under the derivative
//! stencils used by the Poincare-Lelong pairing.
//!
//! Chart Laplacians are evaluated with a 5-point finite-difference stencil
//! at steps h and h/2 combined by Richardson extrapolation (error model
//! O(h^4), h = 1e-3).

use crate::error::{Error, Result};
use crate::projective::{uvw_from_pair, ChartPoint, ProjectivePoint, QuadratureRule};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Finite-difference step for chart Laplacians.
pub const FD_STEP: f64 = 1e-3;

/// One monomial `coeff * u^pow_u * v^pow_v * w^pow_w`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphereTerm {
    pub pow_u: u32,
    pub pow_v: u32,
    pub pow_w: u32,
    pub coeff: f64,
}

impl SphereTerm {
    pub fn degree(&self) -> u32 {
        self.pow_u + self.pow_v + self.pow_w
    }
}

/// Real polynomial in the sphere coordinates of CP^1.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SpherePoly {
    terms: Vec<SphereTerm>,
}

impl SpherePoly {
    pub fn new(terms: Vec<SphereTerm>) -> Self {
        Self { terms }
    }

    pub fn zero() -> Self {
        Self { terms: vec![] }
    }

    pub fn constant(c: f64) -> Self {
        Self {
            terms: vec![SphereTerm {
                pow_u: 0,
                pow_v: 0,
                pow_w: 0,
                coeff: c,
            }],
        }
    }

    /// The coordinate monomials.
    pub fn monomial(pow_u: u32, pow_v: u32, pow_w: u32, coeff: f64) -> Self {
        Self {
            terms: vec![SphereTerm {
                pow_u,
                pow_v,
                pow_w,
                coeff,
            }],
        }
    }

    pub fn terms(&self) -> &[SphereTerm] {
        &self.terms
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().map(|t| t.degree()).max().unwrap_or(0)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.iter().map(|t| t.coeff.abs()).fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.coeff == 0.0)
    }

    /// True when no term depends on (u, v, w).
    pub fn is_constant(&self) -> bool {
        self.terms.iter().all(|t| t.degree() == 0 || t.coeff == 0.0)
    }

    pub fn eval_uvw(&self, u: f64, v: f64, w: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                t.coeff
                    * u.powi(t.pow_u as i32)
                    * v.powi(t.pow_v as i32)
                    * w.powi(t.pow_w as i32)
            })
            .sum()
    }

    pub fn eval(&self, p: &ProjectivePoint) -> f64 {
        let (u, v, w) = p.sphere_coords();
        self.eval_uvw(u, v, w)
    }

    /// Evaluate at the point `[w0 : w1]` (not necessarily normalized).
    pub fn eval_pair(&self, w0: Complex64, w1: Complex64) -> f64 {
        let (u, v, w) = uvw_from_pair(w0, w1);
        self.eval_uvw(u, v, w)
    }

    pub fn eval_chart(&self, p: &ChartPoint) -> f64 {
        match p.chart_index {
            0 => self.eval_pair(Complex64::new(1.0, 0.0), p.affine[0]),
            _ => self.eval_pair(p.affine[0], Complex64::new(1.0, 0.0)),
        }
    }

    /// Spherical Laplacian at `p`, computed in the max-modulus chart as
    /// `(1 + |z|^2)^2 / 4` times the flat chart Laplacian.
    pub fn laplacian_sphere(&self, p: &ProjectivePoint) -> f64 {
        if self.is_constant() {
            return 0.0;
        }
        let chart = p.preferred_chart();
        let z = p.to_chart(chart).expect("preferred chart is valid").affine[0];
        let g = |z: Complex64| match chart {
            0 => self.eval_pair(Complex64::new(1.0, 0.0), z),
            _ => self.eval_pair(z, Complex64::new(1.0, 0.0)),
        };
        let lap = richardson_laplacian_2d(g, z, FD_STEP);
        let s = 1.0 + z.norm_sqr();
        0.25 * s * s * lap
    }

    /// Mean value against the normalized volume.
    pub fn mean(&self, rule: &QuadratureRule) -> f64 {
        rule.integrate(|p| self.eval_chart(p))
    }

    /// Parse a tiny polynomial syntax: a sum of terms like `1`, `-2/3`,
    /// `0.5u^2v`, `uv`, `w^3`, `u^2 - 1/3`.
    pub fn parse(src: &str) -> Result<SpherePoly> {
        let compact: String = src.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(Error::InvalidParameter("empty test function".into()));
        }
        let bytes = compact.as_bytes();
        let mut terms = Vec::new();
        let mut i = 0;
        while i < bytes.len() {
            let mut sign = 1.0;
            while i < bytes.len() && (bytes[i] == b'+' || bytes[i] == b'-') {
                if bytes[i] == b'-' {
                    sign = -sign;
                }
                i += 1;
            }
            if i >= bytes.len() {
                return Err(Error::InvalidParameter(format!(
                    "dangling sign in test function `{src}`"
                )));
            }
            // optional numeric factor, possibly a fraction a/b
            let mut coeff = sign;
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i > start {
                let num: f64 = compact[start..i].parse().map_err(|_| {
                    Error::InvalidParameter(format!("bad number in test function `{src}`"))
                })?;
                coeff *= num;
                if i < bytes.len() && bytes[i] == b'/' {
                    i += 1;
                    let dstart = i;
                    while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                        i += 1;
                    }
                    let den: f64 = compact[dstart..i].parse().map_err(|_| {
                        Error::InvalidParameter(format!(
                            "bad denominator in test function `{src}`"
                        ))
                    })?;
                    coeff /= den;
                }
            }
            // variable factors
            let mut pows = [0u32; 3];
            let mut saw_var = false;
            while i < bytes.len() && matches!(bytes[i], b'u' | b'v' | b'w') {
                saw_var = true;
                let slot = match bytes[i] {
                    b'u' => 0,
                    b'v' => 1,
                    _ => 2,
                };
                i += 1;
                let mut pow = 1u32;
                if i < bytes.len() && bytes[i] == b'^' {
                    i += 1;
                    let pstart = i;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                    pow = compact[pstart..i].parse().map_err(|_| {
                        Error::InvalidParameter(format!("bad exponent in test function `{src}`"))
                    })?;
                }
                pows[slot] += pow;
            }
            if !saw_var && i == start && coeff == sign {
                return Err(Error::InvalidParameter(format!(
                    "unexpected character `{}` in test function `{src}`",
                    compact[i..].chars().next().unwrap()
                )));
            }
            terms.push(SphereTerm {
                pow_u: pows[0],
                pow_v: pows[1],
                pow_w: pows[2],
                coeff,
            });
        }
        Ok(SpherePoly { terms })
    }
}

/// 5-point Laplacian with Richardson extrapolation of the (h, h/2) pair.
fn richardson_laplacian_2d<F: Fn(Complex64) -> f64>(f: F, z: Complex64, h: f64) -> f64 {
    let stencil = |h: f64| -> f64 {
        let c = f(z);
        let xp = f(z + Complex64::new(h, 0.0));
        let xm = f(z - Complex64::new(h, 0.0));
        let yp = f(z + Complex64::new(0.0, h));
        let ym = f(z - Complex64::new(0.0, h));
        (xp + xm + yp + ym - 4.0 * c) / (h * h)
    };
    let full = stencil(h);
    let half = stencil(h / 2.0);
    (4.0 * half - full) / 3.0
}

/// Index layout of the nine real moment variables on CP^2:
/// `[m00, m11, m22, Re m01, Im m01, Re m02, Im m02, Re m12, Im m12]`
/// where `m_ij = w_i conj(w_j) / |w|^2`.
pub const MOMENT_VARS: usize = 9;

/// One monomial in the moment variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentTerm {
    pub exponents: [u32; MOMENT_VARS],
    pub coeff: f64,
}

impl MomentTerm {
    pub fn degree(&self) -> u32 {
        self.exponents.iter().sum()
    }
}

/// Real polynomial in the moment coordinates of CP^2, degree at most 4.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MomentPoly {
    terms: Vec<MomentTerm>,
}

impl MomentPoly {
    pub fn new(terms: Vec<MomentTerm>) -> Result<Self> {
        let poly = Self { terms };
        if poly.degree() > 4 {
            return Err(Error::InvalidParameter(
                "moment polynomial degree exceeds 4".into(),
            ));
        }
        Ok(poly)
    }

    pub fn constant(c: f64) -> Self {
        Self {
            terms: vec![MomentTerm {
                exponents: [0; MOMENT_VARS],
                coeff: c,
            }],
        }
    }

    /// The monomial in a single moment variable.
    pub fn monomial(var: usize, pow: u32, coeff: f64) -> Result<Self> {
        let mut exponents = [0u32; MOMENT_VARS];
        exponents[var] = pow;
        Self::new(vec![MomentTerm { exponents, coeff }])
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().map(|t| t.degree()).max().unwrap_or(0)
    }

    pub fn is_constant(&self) -> bool {
        self.terms.iter().all(|t| t.degree() == 0 || t.coeff == 0.0)
    }

    fn moment_vars(w: &[Complex64]) -> [f64; MOMENT_VARS] {
        let norm: f64 = w.iter().map(|c| c.norm_sqr()).sum();
        let m01 = w[0] * w[1].conj() / norm;
        let m02 = w[0] * w[2].conj() / norm;
        let m12 = w[1] * w[2].conj() / norm;
        [
            w[0].norm_sqr() / norm,
            w[1].norm_sqr() / norm,
            w[2].norm_sqr() / norm,
            m01.re,
            m01.im,
            m02.re,
            m02.im,
            m12.re,
            m12.im,
        ]
    }

    pub fn eval_homogeneous(&self, w: &[Complex64]) -> f64 {
        let vars = Self::moment_vars(w);
        self.terms
            .iter()
            .map(|t| {
                let mut acc = t.coeff;
                for (x, &e) in vars.iter().zip(&t.exponents) {
                    if e > 0 {
                        acc *= x.powi(e as i32);
                    }
                }
                acc
            })
            .sum()
    }

    pub fn eval(&self, p: &ProjectivePoint) -> f64 {
        assert_eq!(p.m(), 2, "moment polynomials live on CP^2");
        self.eval_homogeneous(p.homogeneous())
    }

    fn eval_chart(&self, chart: usize, z: [Complex64; 2]) -> f64 {
        let mut w = [Complex64::new(0.0, 0.0); 3];
        let mut k = 0;
        for (i, slot) in w.iter_mut().enumerate() {
            if i == chart {
                *slot = Complex64::new(1.0, 0.0);
            } else {
                *slot = z[k];
                k += 1;
            }
        }
        self.eval_homogeneous(&w)
    }

    /// Weight of the Poincare-Lelong pairing on CP^2: the density of
    /// `(i/pi) ddbar(psi) ^ omega_FS` against `dV`, evaluated in the
    /// max-modulus chart by finite differences with Richardson
    /// extrapolation. For the Fubini-Study metric `h_jk` below is the
    /// chart Hessian of `log(1 + |z|^2)`.
    pub fn pl_weight(&self, p: &ProjectivePoint) -> f64 {
        if self.is_constant() {
            return 0.0;
        }
        let chart = p.preferred_chart();
        let cp = p.to_chart(chart).expect("preferred chart is valid");
        let z = [cp.affine[0], cp.affine[1]];
        let weight_at = |h: f64| -> f64 {
            let psi = |x: [Complex64; 2]| self.eval_chart(chart, x);
            let hess = complex_hessian(psi, z, h);
            let t = 1.0 + z[0].norm_sqr() + z[1].norm_sqr();
            // FS chart metric h_jk = d_j dbar_k log(1 + |z|^2)
            let h11 = (1.0 + z[1].norm_sqr()) / (t * t);
            let h22 = (1.0 + z[0].norm_sqr()) / (t * t);
            let h12 = -(z[0].conj() * z[1]) / (t * t);
            let h21 = h12.conj();
            let mix = hess[0][0] * h22 + hess[1][1] * h11 - hess[0][1] * h21 - hess[1][0] * h12;
            mix.re * t * t * t
        };
        let full = weight_at(FD_STEP);
        let half = weight_at(FD_STEP / 2.0);
        (4.0 * half - full) / 3.0
    }
}

/// Complex Hessian `d^2 psi / dz_j dzbar_k` of a real function of two
/// complex variables, by central differences at step `h`.
fn complex_hessian<F: Fn([Complex64; 2]) -> f64>(
    f: F,
    z: [Complex64; 2],
    h: f64,
) -> [[Complex64; 2]; 2] {
    // real coordinates: (x0, y0, x1, y1)
    let shift = |z: [Complex64; 2], axis: usize, delta: f64| -> [Complex64; 2] {
        let mut out = z;
        match axis {
            0 => out[0] += Complex64::new(delta, 0.0),
            1 => out[0] += Complex64::new(0.0, delta),
            2 => out[1] += Complex64::new(delta, 0.0),
            _ => out[1] += Complex64::new(0.0, delta),
        }
        out
    };
    let second = |a: usize, b: usize| -> f64 {
        if a == b {
            (f(shift(z, a, h)) - 2.0 * f(z) + f(shift(z, a, -h))) / (h * h)
        } else {
            (f(shift(shift(z, a, h), b, h)) - f(shift(shift(z, a, h), b, -h))
                - f(shift(shift(z, a, -h), b, h))
                + f(shift(shift(z, a, -h), b, -h)))
                / (4.0 * h * h)
        }
    };
    let mut hess = [[Complex64::new(0.0, 0.0); 2]; 2];
    for j in 0..2 {
        for k in 0..2 {
            let (xj, yj) = (2 * j, 2 * j + 1);
            let (xk, yk) = (2 * k, 2 * k + 1);
            let re = 0.25 * (second(xj, xk) + second(yj, yk));
            let im = 0.25 * (second(xj, yk) - second(yj, xk));
            hess[j][k] = Complex64::new(re, im);
        }
    }
    hess
}

/// A test form on CP^m, restricted to `psi * omega_FS^(m-1)` with `psi`
/// polynomial in sphere or moment coordinates.
#[derive(Debug, Clone, PartialEq)]
pub enum TestFunction {
    Sphere(SpherePoly),
    Moment(MomentPoly),
}

impl TestFunction {
    pub fn sphere(poly: SpherePoly) -> Result<Self> {
        if poly.degree() > 6 {
            return Err(Error::InvalidParameter(
                "sphere test function degree exceeds 6".into(),
            ));
        }
        Ok(TestFunction::Sphere(poly))
    }

    pub fn moment(poly: MomentPoly) -> Self {
        TestFunction::Moment(poly)
    }

    pub fn m(&self) -> usize {
        match self {
            TestFunction::Sphere(_) => 1,
            TestFunction::Moment(_) => 2,
        }
    }

    pub fn degree(&self) -> u32 {
        match self {
            TestFunction::Sphere(p) => p.degree(),
            TestFunction::Moment(p) => p.degree(),
        }
    }

    pub fn eval(&self, p: &ProjectivePoint) -> f64 {
        match self {
            TestFunction::Sphere(poly) => poly.eval(p),
            TestFunction::Moment(poly) => poly.eval(p),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::projective::{cp1_quadrature, normalize_point, sample_fs_uniform};
    use crate::rng::stream_rng;

    fn u() -> SpherePoly {
        SpherePoly::monomial(1, 0, 0, 1.0)
    }

    #[test]
    fn parse_round_trips() {
        let cases = [
            ("1", vec![(0, 0, 0, 1.0)]),
            ("u", vec![(1, 0, 0, 1.0)]),
            ("uv", vec![(1, 1, 0, 1.0)]),
            ("u^2-1/3", vec![(2, 0, 0, 1.0), (0, 0, 0, -1.0 / 3.0)]),
            ("-0.5w^3 + 2v", vec![(0, 0, 3, -0.5), (0, 1, 0, 2.0)]),
        ];
        for (src, want) in cases {
            let poly = SpherePoly::parse(src).unwrap();
            assert_eq!(poly.terms().len(), want.len(), "{src}");
            for (term, (pu, pv, pw, c)) in poly.terms().iter().zip(&want) {
                assert_eq!(term.pow_u, *pu);
                assert_eq!(term.pow_v, *pv);
                assert_eq!(term.pow_w, *pw);
                assert!((term.coeff - c).abs() < 1e-15);
            }
        }
        assert!(SpherePoly::parse("").is_err());
        assert!(SpherePoly::parse("x+1").is_err());
        assert!(SpherePoly::parse("2*u").is_err());
    }

    #[test]
    fn laplacian_matches_spherical_harmonics() {
        // degree-l spherical harmonics are eigenfunctions with -l(l+1)
        let mut rng = stream_rng(11, 0);
        let y1 = u();
        let y2 = SpherePoly::parse("u^2-1/3").unwrap();
        let y1v = SpherePoly::monomial(0, 1, 0, 1.0);
        for _ in 0..50 {
            let p = sample_fs_uniform(1, &mut rng);
            let (uu, vv, _) = p.sphere_coords();
            assert!(
                (y1.laplacian_sphere(&p) + 2.0 * uu).abs() < 1e-7,
                "Y1 at u={uu}"
            );
            assert!((y1v.laplacian_sphere(&p) + 2.0 * vv).abs() < 1e-7);
            let want = -6.0 * (uu * uu - 1.0 / 3.0);
            assert!((y2.laplacian_sphere(&p) - want).abs() < 1e-7);
        }
    }

    #[test]
    fn laplacian_near_infinity_switches_chart() {
        let far = normalize_point(&[Complex64::new(1e-9, 0.0), Complex64::new(1.0, 0.0)]).unwrap();
        let val = u().laplacian_sphere(&far);
        // u = -1 there, so the Laplacian is +2
        assert!((val - 2.0).abs() < 1e-6);
    }

    #[test]
    fn means_by_quadrature() {
        let rule = cp1_quadrature(10);
        assert!(u().mean(&rule).abs() < 1e-12);
        let u2 = SpherePoly::monomial(2, 0, 0, 1.0);
        assert!((u2.mean(&rule) - 1.0 / 3.0).abs() < 1e-12);
        let v2 = SpherePoly::monomial(0, 2, 0, 1.0);
        assert!((v2.mean(&rule) - 1.0 / 3.0).abs() < 1e-12);
        let uv = SpherePoly::parse("uv").unwrap();
        assert!(uv.mean(&rule).abs() < 1e-12);
    }

    #[test]
    fn moment_poly_on_landmarks() {
        // m00 at [1:0:0] is 1; at [0:1:0] is 0
        let m00 = MomentPoly::monomial(0, 1, 1.0).unwrap();
        let e0 = normalize_point(&[
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
        ])
        .unwrap();
        let e1 = normalize_point(&[
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
        ])
        .unwrap();
        assert!((m00.eval(&e0) - 1.0).abs() < 1e-15);
        assert!(m00.eval(&e1).abs() < 1e-15);
        assert!(MomentPoly::monomial(0, 5, 1.0).is_err());
    }

    #[test]
    fn pl_weight_of_constant_vanishes() {
        let mut rng = stream_rng(3, 0);
        let c = MomentPoly::constant(2.5);
        for _ in 0..10 {
            let p = sample_fs_uniform(2, &mut rng);
            assert_eq!(c.pl_weight(&p), 0.0);
        }
    }

    #[test]
    fn pl_weight_integrates_to_zero() {
        // (i/pi) ddbar(psi) ^ omega is exact, so its total mass vanishes;
        // Monte Carlo mean of the weight must be 0 within 3 sigma.
        let mut rng = stream_rng(17, 0);
        let psi = MomentPoly::monomial(0, 2, 1.0).unwrap();
        let mut st = crate::stats::RunningStats::new();
        for _ in 0..20_000 {
            let p = sample_fs_uniform(2, &mut rng);
            st.push(psi.pl_weight(&p));
        }
        assert!(
            st.mean().abs() < 3.0 * st.std_error(),
            "mean {} se {}",
            st.mean(),
            st.std_error()
        );
    }
}
