//! Points, charts, volume forms, uniform sampling and quadrature on
//! complex projective space.
//!
//! A point of CP^m is stored as its canonical-gauge unit representative in
//! C^{m+1}: the homogeneous vector has Euclidean norm one and its
//! largest-modulus coordinate (lowest index on ties) is real and
//! nonnegative. The canonical gauge stabilises chart selection near the
//! coordinate hyperplanes.
//!
//! The normalized volume `dV` assigns CP^m total mass one; in an affine
//! chart its density against Lebesgue measure is
//! `(m!/pi^m) (1 + |z|^2)^{-(m+1)}`.
//!
//! On CP^1 the identification with the unit sphere uses
//! `u = (1 - |z|^2)/(1 + |z|^2)`, `v = 2 Re z/(1 + |z|^2)`,
//! `w = 2 Im z/(1 + |z|^2)`, under which `dV` becomes `du dphi / 4 pi`.
//! Quadrature rules are therefore tensor products of Gauss-Legendre in `u`
//! and the trapezoid rule in longitude.

use crate::error::{Error, Result};
use crate::rng::complex_standard_normal;
use num_complex::Complex64;
use rand::Rng;
use std::f64::consts::PI;

/// Gauge tolerance used by invariant checks.
pub const GAUGE_TOL: f64 = 1e-12;

/// A point of CP^m in canonical gauge.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectivePoint {
    coords: Vec<Complex64>,
}

impl ProjectivePoint {
    /// Canonical-gauge unit representative of the line through `w`.
    pub fn normalize(w: &[Complex64]) -> Result<Self> {
        if w.len() < 2 {
            return Err(Error::NotAProjectivePoint);
        }
        let norm_sqr: f64 = w.iter().map(|c| c.norm_sqr()).sum();
        if norm_sqr == 0.0 || !norm_sqr.is_finite() {
            return Err(Error::NotAProjectivePoint);
        }
        let lead = Self::lead_index(w);
        // remove the phase of the leading coordinate, then the scale
        let phase = w[lead] / w[lead].norm();
        let scale = norm_sqr.sqrt();
        let coords = w.iter().map(|c| c / (phase * scale)).collect();
        Ok(Self { coords })
    }

    fn lead_index(w: &[Complex64]) -> usize {
        let mut lead = 0;
        let mut best = w[0].norm_sqr();
        for (i, c) in w.iter().enumerate().skip(1) {
            let n = c.norm_sqr();
            if n > best {
                best = n;
                lead = i;
            }
        }
        lead
    }

    /// Complex dimension of the ambient projective space.
    pub fn m(&self) -> usize {
        self.coords.len() - 1
    }

    pub fn homogeneous(&self) -> &[Complex64] {
        &self.coords
    }

    /// Index of the largest-modulus coordinate; the preferred affine chart.
    pub fn preferred_chart(&self) -> usize {
        Self::lead_index(&self.coords)
    }

    /// Affine coordinates in the given chart; `None` when the chart
    /// coordinate vanishes.
    pub fn to_chart(&self, chart_index: usize) -> Option<ChartPoint> {
        let pivot = self.coords[chart_index];
        if pivot.norm_sqr() == 0.0 {
            return None;
        }
        let affine = self
            .coords
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != chart_index)
            .map(|(_, c)| c / pivot)
            .collect();
        Some(ChartPoint {
            affine,
            chart_index,
        })
    }

    /// Chordal (Fubini-Study) distance, `sqrt(1 - |<a, b>|^2)` for unit
    /// representatives, computed as the norm of the wedge product so it
    /// stays accurate near zero. Chart-free, so it has no bias near
    /// infinity.
    pub fn chordal_distance(&self, other: &ProjectivePoint) -> f64 {
        let a = &self.coords;
        let b = &other.coords;
        let mut wedge_sq = 0.0;
        for i in 0..a.len() {
            for j in (i + 1)..a.len() {
                wedge_sq += (a[i] * b[j] - a[j] * b[i]).norm_sqr();
            }
        }
        wedge_sq.sqrt().min(1.0)
    }

    /// Sphere coordinates (u, v, w) of a point of CP^1.
    pub fn sphere_coords(&self) -> (f64, f64, f64) {
        assert_eq!(self.m(), 1, "sphere_coords requires m = 1");
        uvw_from_pair(self.coords[0], self.coords[1])
    }
}

/// Sphere coordinates of `[w0 : w1]`; the pair need not be normalized.
pub fn uvw_from_pair(w0: Complex64, w1: Complex64) -> (f64, f64, f64) {
    let n0 = w0.norm_sqr();
    let n1 = w1.norm_sqr();
    let cross = w0.conj() * w1;
    let total = n0 + n1;
    ((n0 - n1) / total, 2.0 * cross.re / total, 2.0 * cross.im / total)
}

/// A point of CP^m in an affine chart.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartPoint {
    /// The m affine coordinates (the chart coordinate, set to one, is
    /// omitted).
    pub affine: Vec<Complex64>,
    /// Which homogeneous coordinate equals one.
    pub chart_index: usize,
}

impl ChartPoint {
    pub fn new(affine: Vec<Complex64>, chart_index: usize) -> Self {
        Self {
            affine,
            chart_index,
        }
    }

    pub fn m(&self) -> usize {
        self.affine.len()
    }

    /// Squared Euclidean norm of the affine coordinates.
    pub fn norm_sqr(&self) -> f64 {
        self.affine.iter().map(|c| c.norm_sqr()).sum()
    }

    /// The projective point this chart point represents.
    pub fn to_projective(&self) -> ProjectivePoint {
        let mut w = Vec::with_capacity(self.affine.len() + 1);
        for (i, c) in self.affine.iter().enumerate() {
            if i == self.chart_index {
                w.push(Complex64::new(1.0, 0.0));
            }
            w.push(*c);
        }
        if self.chart_index == self.affine.len() {
            w.push(Complex64::new(1.0, 0.0));
        }
        ProjectivePoint::normalize(&w).expect("chart point is never the zero vector")
    }
}

/// Canonical-gauge unit representative of `[w]`.
pub fn normalize_point(w: &[Complex64]) -> Result<ProjectivePoint> {
    ProjectivePoint::normalize(w)
}

/// Density of the normalized volume `dV` against Lebesgue measure in an
/// affine chart: `(m!/pi^m) (1 + |z|^2)^{-(m+1)}`.
pub fn fs_volume_density(m: usize, p: &ChartPoint) -> f64 {
    debug_assert_eq!(p.m(), m);
    let mut m_fact = 1.0;
    for k in 2..=m {
        m_fact *= k as f64;
    }
    m_fact / PI.powi(m as i32) * (1.0 + p.norm_sqr()).powi(-(m as i32) - 1)
}

/// Draw a point of CP^m distributed by `dV`: normalize a vector of m+1
/// independent standard complex Gaussians.
pub fn sample_fs_uniform<R: Rng + ?Sized>(m: usize, rng: &mut R) -> ProjectivePoint {
    loop {
        let w: Vec<Complex64> = (0..=m).map(|_| complex_standard_normal(rng)).collect();
        if let Ok(p) = ProjectivePoint::normalize(&w) {
            return p;
        }
    }
}

/// Sphere coordinates of a point of CP^1.
pub fn sphere_coords(p: &ProjectivePoint) -> (f64, f64, f64) {
    p.sphere_coords()
}

/// Tensor quadrature rule on CP^1 integrating against the normalized
/// volume `dV`.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    degree: usize,
    nodes: Vec<ChartPoint>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn nodes(&self) -> &[ChartPoint] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Integrate `f` against `dV`.
    pub fn integrate<F: FnMut(&ChartPoint) -> f64>(&self, mut f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(node, w)| w * f(node))
            .sum()
    }
}

/// Gauss-Legendre (latitude) x trapezoid (longitude) rule on CP^1, exact
/// for all integrands `|z|^{2j} (1 + |z|^2)^{-N}` with `N <= degree`
/// (and more generally for sphere polynomials times such kernels, up to
/// the declared degree). Node count is `degree + 2` per axis.
pub fn cp1_quadrature(degree: usize) -> QuadratureRule {
    assert!(degree >= 1, "degree must be at least 1");
    let n = degree + 2;
    let (gl_nodes, gl_weights) = gauss_legendre(n);
    let mut nodes = Vec::with_capacity(n * n);
    let mut weights = Vec::with_capacity(n * n);
    for (&u, &wu) in gl_nodes.iter().zip(&gl_weights) {
        // u = cos(theta); r = |z| from u = (1 - r^2)/(1 + r^2)
        let r = ((1.0 - u) / (1.0 + u)).sqrt();
        for k in 0..n {
            let phi = 2.0 * PI * k as f64 / n as f64;
            let z = Complex64::from_polar(r, phi);
            nodes.push(ChartPoint::new(vec![z], 0));
            // dV = du dphi / (4 pi); GL weights sum to 2, trapezoid to n
            weights.push(wu / (2.0 * n as f64));
        }
    }
    QuadratureRule {
        degree,
        nodes,
        weights,
    }
}

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi-style initial guess, then Newton on P_n
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_and_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        weights[i] = w;
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        let mid = n / 2;
        nodes[mid] = 0.0;
        let (_, d) = legendre_and_derivative(n, 0.0);
        weights[mid] = 2.0 / (d * d);
    }
    (nodes, weights)
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}
