//! Simultaneous zeros of pairs of sections on CP^2.
//!
//! Two generic degree-N curves meet in exactly N^2 points (Bezout). The
//! solver dehomogenizes into an affine chart, eliminates one variable
//! through the Sylvester resultant (evaluated on a circle of sample
//! points and interpolated), extracts the candidate first coordinates
//! with the Aberth iteration, matches second coordinates by pairing the
//! root sets of the two restricted univariate polynomials, and polishes
//! every candidate with a 2x2 Newton iteration. The whole procedure runs
//! in all three charts and deduplicates in the chordal metric, which
//! covers intersection points on every coordinate line.

use crate::error::{Error, Result};
use crate::projective::ProjectivePoint;
use crate::roots::aberth;
use crate::sections::{dim_h0, multi_indices, onb_scales, Section};
use num_complex::Complex64;

/// Largest degree accepted by the resultant path.
pub const MAX_DEGREE: usize = 8;
/// Relative threshold for discarding numerically zero coefficients.
const TRIM_TOL: f64 = 1e-10;
/// Matching tolerance for candidate second coordinates.
const MATCH_TOL: f64 = 1e-6;
/// Chordal deduplication radius on CP^2.
const DEDUP_RADIUS: f64 = 1e-7;
/// Residual acceptance for polished points, relative to coefficient
/// scale and point size.
const RESIDUAL_TOL: f64 = 1e-9;

/// Bivariate polynomial as a dense coefficient grid: `coeff[i][j]`
/// multiplies x^i y^j.
#[derive(Debug, Clone)]
struct BiPoly {
    coeff: Vec<Vec<Complex64>>,
    degree: usize,
}

impl BiPoly {
    fn zero(degree: usize) -> Self {
        Self {
            coeff: vec![vec![Complex64::new(0.0, 0.0); degree + 1]; degree + 1],
            degree,
        }
    }

    /// Chart representation of a section: the two affine variables are
    /// the non-chart coordinates in index order.
    fn from_section(s: &Section, chart: usize) -> Self {
        let n = s.degree();
        let mut out = Self::zero(n);
        let scales = onb_scales(2, n);
        for ((a, j), scale) in s
            .coeffs()
            .iter()
            .zip(multi_indices(2, n))
            .zip(&scales)
        {
            let e = j.entries();
            let (i, k) = match chart {
                0 => (e[1], e[2]),
                1 => (e[0], e[2]),
                _ => (e[0], e[1]),
            };
            out.coeff[i][k] += a * scale;
        }
        out
    }

    fn max_abs(&self) -> f64 {
        self.coeff
            .iter()
            .flatten()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }

    fn scale(&mut self, factor: f64) {
        for row in self.coeff.iter_mut() {
            for c in row.iter_mut() {
                *c *= factor;
            }
        }
    }

    fn eval(&self, x: Complex64, y: Complex64) -> Complex64 {
        // Horner in x of Horner in y
        let mut acc = Complex64::new(0.0, 0.0);
        for row in self.coeff.iter().rev() {
            let mut inner = Complex64::new(0.0, 0.0);
            for c in row.iter().rev() {
                inner = inner * y + c;
            }
            acc = acc * x + inner;
        }
        acc
    }

    fn dx(&self) -> BiPoly {
        let mut out = BiPoly::zero(self.degree);
        for i in 1..=self.degree {
            for j in 0..=self.degree {
                out.coeff[i - 1][j] = self.coeff[i][j] * i as f64;
            }
        }
        out
    }

    fn dy(&self) -> BiPoly {
        let mut out = BiPoly::zero(self.degree);
        for i in 0..=self.degree {
            for j in 1..=self.degree {
                out.coeff[i][j - 1] = self.coeff[i][j] * j as f64;
            }
        }
        out
    }

    /// Coefficients in y of the restriction to x = x0, ascending powers,
    /// trimmed of a numerically zero tail.
    fn restrict_x(&self, x0: Complex64, tol: f64) -> Vec<Complex64> {
        let mut pow = Complex64::new(1.0, 0.0);
        let mut out = vec![Complex64::new(0.0, 0.0); self.degree + 1];
        for row in self.coeff.iter() {
            for (j, c) in row.iter().enumerate() {
                out[j] += c * pow;
            }
            pow *= x0;
        }
        let scale = out.iter().map(|c| c.norm()).fold(0.0, f64::max);
        while out.len() > 1 && out.last().unwrap().norm() <= tol * scale.max(1.0) {
            out.pop();
        }
        out
    }

    /// Degree in y (largest j with a significant coefficient).
    fn y_degree(&self) -> usize {
        let scale = self.max_abs();
        let mut best = 0;
        for row in self.coeff.iter() {
            for (j, c) in row.iter().enumerate() {
                if c.norm() > TRIM_TOL * scale {
                    best = best.max(j);
                }
            }
        }
        best
    }
}

/// Determinant of the Sylvester matrix in y of (p, q) at the sample
/// point x: entries are the y-coefficient lists of the restrictions.
fn sylvester_det(py: &[Complex64], qy: &[Complex64], np: usize, nq: usize) -> Complex64 {
    let size = np + nq;
    let mut mat = nalgebra::DMatrix::<Complex64>::zeros(size, size);
    for row in 0..nq {
        for (k, c) in py.iter().enumerate() {
            // descending order: column row + (np - k)
            mat[(row, row + np - k)] = *c;
        }
    }
    for row in 0..np {
        for (k, c) in qy.iter().enumerate() {
            mat[(nq + row, row + nq - k)] = *c;
        }
    }
    mat.lu().determinant()
}

/// Resultant of p and q in y as a polynomial in x, by evaluation on a
/// circle of K points and inverse discrete Fourier interpolation.
fn resultant_in_x(p: &BiPoly, q: &BiPoly, np: usize, nq: usize) -> Vec<Complex64> {
    let n = p.degree;
    let bound = np * q.degree + nq * p.degree;
    let k_count = bound.max(n) + 1;
    let radius = 1.0;
    let mut values = Vec::with_capacity(k_count);
    for t in 0..k_count {
        let angle = 2.0 * std::f64::consts::PI * t as f64 / k_count as f64;
        let x = Complex64::from_polar(radius, angle);
        // restrictions padded to fixed y-degrees np, nq
        let mut py = p.restrict_x(x, 0.0);
        py.resize(np + 1, Complex64::new(0.0, 0.0));
        let mut qy = q.restrict_x(x, 0.0);
        qy.resize(nq + 1, Complex64::new(0.0, 0.0));
        values.push(sylvester_det(&py, &qy, np, nq));
    }
    // c_k = (1/(K r^k)) sum_t v_t w^(-kt)
    let mut coeffs = Vec::with_capacity(k_count);
    for k in 0..k_count {
        let mut acc = Complex64::new(0.0, 0.0);
        for (t, v) in values.iter().enumerate() {
            let angle = -2.0 * std::f64::consts::PI * (k * t % k_count) as f64 / k_count as f64;
            acc += v * Complex64::from_polar(1.0, angle);
        }
        coeffs.push(acc / (k_count as f64 * radius.powi(k as i32)));
    }
    coeffs
}

/// Newton-polish a candidate common zero; returns the refined point when
/// the residual passes.
fn polish(
    p: &BiPoly,
    q: &BiPoly,
    px: &BiPoly,
    py: &BiPoly,
    qx: &BiPoly,
    qy: &BiPoly,
    mut x: Complex64,
    mut y: Complex64,
) -> Option<(Complex64, Complex64)> {
    for _ in 0..60 {
        let f = p.eval(x, y);
        let g = q.eval(x, y);
        let j11 = px.eval(x, y);
        let j12 = py.eval(x, y);
        let j21 = qx.eval(x, y);
        let j22 = qy.eval(x, y);
        let det = j11 * j22 - j12 * j21;
        if det.norm() == 0.0 {
            break;
        }
        let dx = (f * j22 - g * j12) / det;
        let dy = (g * j11 - f * j21) / det;
        if !dx.is_finite() || !dy.is_finite() {
            break;
        }
        x -= dx;
        y -= dy;
        if dx.norm() + dy.norm() < 1e-14 * (1.0 + x.norm() + y.norm()) {
            break;
        }
    }
    let size = 1.0 + x.norm().max(y.norm());
    let bound = RESIDUAL_TOL * size.powi(p.degree as i32);
    if p.eval(x, y).norm() <= bound && q.eval(x, y).norm() <= bound {
        Some((x, y))
    } else {
        None
    }
}

/// Cluster the roots of a univariate solve into (value, multiplicity)
/// pairs.
fn cluster_roots(roots: &[Complex64], tol: f64) -> Vec<(Complex64, usize)> {
    let mut clusters: Vec<(Complex64, usize)> = Vec::new();
    for &r in roots {
        match clusters
            .iter_mut()
            .find(|(c, _)| (*c - r).norm() <= tol * (1.0 + r.norm()))
        {
            Some((_, count)) => *count += 1,
            None => clusters.push((r, 1)),
        }
    }
    clusters
}

fn chart_point(chart: usize, x: Complex64, y: Complex64) -> Result<ProjectivePoint> {
    let one = Complex64::new(1.0, 0.0);
    let w = match chart {
        0 => [one, x, y],
        1 => [x, one, y],
        _ => [x, y, one],
    };
    ProjectivePoint::normalize(&w)
}

/// All common zeros of a chart pair, as projective points with
/// multiplicity.
fn common_zeros_chart(
    s1: &Section,
    s2: &Section,
    chart: usize,
) -> Result<Vec<(ProjectivePoint, usize)>> {
    let mut p = BiPoly::from_section(s1, chart);
    let mut q = BiPoly::from_section(s2, chart);
    let sp = p.max_abs();
    let sq = q.max_abs();
    if sp == 0.0 || sq == 0.0 {
        return Err(Error::ZeroSection);
    }
    p.scale(1.0 / sp);
    q.scale(1.0 / sq);
    let np = p.y_degree();
    let nq = q.y_degree();

    let (px, py) = (p.dx(), p.dy());
    let (qx, qy) = (q.dx(), q.dy());

    let x_clusters: Vec<(Complex64, usize)> = if np == 0 && nq == 0 {
        // both independent of y: a common x-root would be a whole line
        let pc: Vec<Complex64> = {
            let mut v = p.restrict_x(Complex64::new(0.0, 0.0), 0.0);
            v.clear();
            for i in 0..=p.degree {
                v.push(p.coeff[i][0]);
            }
            let scale = v.iter().map(|c| c.norm()).fold(0.0, f64::max);
            while v.len() > 1 && v.last().unwrap().norm() <= TRIM_TOL * scale {
                v.pop();
            }
            v
        };
        let roots = if pc.len() > 1 {
            aberth(&pc)?.roots
        } else {
            vec![]
        };
        for r in &roots {
            let qv = q.eval(*r, Complex64::new(0.0, 0.0));
            if qv.norm() <= 1e-8 {
                return Err(Error::DegeneratePair);
            }
        }
        return Ok(vec![]);
    } else {
        let res = resultant_in_x(&p, &q, np.max(1), nq.max(1));
        let scale = res.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if scale <= 1e-9 {
            // resultant vanishes identically: shared y-dependent factor
            return Err(Error::DegeneratePair);
        }
        let mut trimmed: Vec<Complex64> = res;
        while trimmed.len() > 1 && trimmed.last().unwrap().norm() <= TRIM_TOL * scale {
            trimmed.pop();
        }
        if trimmed.len() == 1 {
            vec![]
        } else {
            cluster_roots(&aberth(&trimmed)?.roots, 1e-6)
        }
    };

    let mut found: Vec<(ProjectivePoint, usize)> = Vec::new();
    for (x0, x_mult) in x_clusters {
        let pc = p.restrict_x(x0, TRIM_TOL);
        let qc = q.restrict_x(x0, TRIM_TOL);
        // x0 is only as accurate as the resultant roots, so a fiber
        // restriction that should vanish identically evaluates at the
        // root-error scale; candidates admitted here still have to pass
        // the Newton residual gate
        let fiber_tol = 3e-6 * (1.0 + x0.norm()).powi(p.degree as i32);
        let p_vanishes = pc.iter().all(|c| c.norm() <= fiber_tol);
        let q_vanishes = qc.iter().all(|c| c.norm() <= fiber_tol);
        if p_vanishes && q_vanishes {
            // common vertical line through x0
            return Err(Error::DegeneratePair);
        }
        let candidates: Vec<Complex64> = if p_vanishes {
            if qc.len() > 1 {
                aberth(&qc)?.roots
            } else {
                vec![]
            }
        } else if q_vanishes {
            if pc.len() > 1 {
                aberth(&pc)?.roots
            } else {
                vec![]
            }
        } else {
            let pr = if pc.len() > 1 { aberth(&pc)?.roots } else { vec![] };
            let qr = if qc.len() > 1 { aberth(&qc)?.roots } else { vec![] };
            // match y-roots of the two restrictions
            let mut matched = Vec::new();
            for &yp in &pr {
                if qr
                    .iter()
                    .any(|&yq| (yp - yq).norm() <= MATCH_TOL * (1.0 + yp.norm()))
                {
                    matched.push(yp);
                }
            }
            cluster_roots(&matched, MATCH_TOL)
                .into_iter()
                .map(|(y, _)| y)
                .collect()
        };
        if candidates.is_empty() {
            continue;
        }
        let mut polished: Vec<(Complex64, Complex64)> = Vec::new();
        for y0 in candidates {
            if let Some(pt) = polish(&p, &q, &px, &py, &qx, &qy, x0, y0) {
                polished.push(pt);
            }
        }
        // deduplicate within this fiber, then split the x-multiplicity
        let mut distinct: Vec<(Complex64, Complex64)> = Vec::new();
        for (x, y) in polished {
            if !distinct
                .iter()
                .any(|(a, b)| (a - x).norm() + (b - y).norm() <= MATCH_TOL * (1.0 + x.norm()))
            {
                distinct.push((x, y));
            }
        }
        if distinct.is_empty() {
            continue;
        }
        // the resultant multiplicity distributes over the fiber points;
        // remainders (non-generic tangencies across distinct points) go
        // to the earliest points in deterministic order
        let base = x_mult / distinct.len();
        let mut rem = x_mult % distinct.len();
        for (x, y) in distinct {
            let mut mult = base;
            if rem > 0 {
                mult += 1;
                rem -= 1;
            }
            if mult == 0 {
                continue;
            }
            found.push((chart_point(chart, x, y)?, mult));
        }
    }
    Ok(found)
}

/// All N^2 common zeros (with multiplicity, Bezout) of a generic pair of
/// degree-N sections on CP^2, for N <= 8.
pub fn common_zeros_cp2(s1: &Section, s2: &Section) -> Result<Vec<(ProjectivePoint, usize)>> {
    if s1.m() != 2 || s2.m() != 2 {
        return Err(Error::MetricDimensionMismatch);
    }
    if s1.degree() != s2.degree() {
        return Err(Error::DegreeMismatch {
            expected: s1.degree(),
            got: s2.degree(),
        });
    }
    if s1.degree() > MAX_DEGREE {
        return Err(Error::InvalidParameter(format!(
            "resultant path supports N <= {MAX_DEGREE}, got {}",
            s1.degree()
        )));
    }
    debug_assert_eq!(s1.coeffs().len(), dim_h0(2, s1.degree()));
    let mut all: Vec<(ProjectivePoint, usize)> = Vec::new();
    for chart in 0..3 {
        for (p, mult) in common_zeros_chart(s1, s2, chart)? {
            if !all
                .iter()
                .any(|(q, _)| q.chordal_distance(&p) < DEDUP_RADIUS)
            {
                all.push((p, mult));
            }
        }
    }
    Ok(all)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::projective::normalize_point;
    use crate::rng::stream_rng;
    use crate::sections::{sample_gaussian, Section};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Section with prescribed raw monomial coefficients (z0^j0 z1^j1
    /// z2^j2 ordered as multi_indices).
    fn from_monomials(n: usize, entries: &[(usize, usize, usize, f64)]) -> Section {
        let scales = onb_scales(2, n);
        let idx = multi_indices(2, n);
        let mut coeffs = vec![c(0.0, 0.0); idx.len()];
        for &(j0, j1, j2, v) in entries {
            let pos = idx
                .iter()
                .position(|j| j.entries() == [j0, j1, j2])
                .unwrap();
            coeffs[pos] = c(v, 0.0) / scales[pos];
        }
        Section::new(2, n, coeffs).unwrap()
    }

    #[test]
    fn four_symmetric_points() {
        // z1^2 - z0^2 and z2^2 - z0^2 meet at [1 : +-1 : +-1]
        let s1 = from_monomials(2, &[(0, 2, 0, 1.0), (2, 0, 0, -1.0)]);
        let s2 = from_monomials(2, &[(0, 0, 2, 1.0), (2, 0, 0, -1.0)]);
        let zeros = common_zeros_cp2(&s1, &s2).unwrap();
        assert_eq!(zeros.iter().map(|(_, m)| m).sum::<usize>(), 4);
        assert_eq!(zeros.len(), 4);
        for (sx, sy) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
            let target = normalize_point(&[c(1.0, 0.0), c(sx, 0.0), c(sy, 0.0)]).unwrap();
            let hit = zeros
                .iter()
                .any(|(p, m)| p.chordal_distance(&target) < 1e-9 && *m == 1);
            assert!(hit, "missing [1:{sx}:{sy}]");
        }
    }

    #[test]
    fn degenerate_pair_is_detected() {
        // z1 z0 and z1 z2 share the line z1 = 0
        let s1 = from_monomials(2, &[(1, 1, 0, 1.0)]);
        let s2 = from_monomials(2, &[(0, 1, 1, 1.0)]);
        assert!(matches!(
            common_zeros_cp2(&s1, &s2),
            Err(Error::DegeneratePair)
        ));
    }

    #[test]
    fn bezout_count_for_random_pairs() {
        let mut rng = stream_rng(100, 0);
        let n = 4;
        for trial in 0..100 {
            let s1 = sample_gaussian(2, n, &mut rng);
            let s2 = sample_gaussian(2, n, &mut rng);
            let zeros = common_zeros_cp2(&s1, &s2).unwrap();
            let total: usize = zeros.iter().map(|(_, m)| m).sum();
            assert_eq!(total, n * n, "trial {trial}: {total} zeros");
        }
    }

    #[test]
    fn points_at_infinity_are_found() {
        // z1^2 - z0 z1 = z1 (z1 - z0) and z2^2 - z0^2: N = 2, but the
        // first factors; use an irreducible pair with a zero on the line
        // z0 = 0 instead: p = z1^2 - z0 z2, q = z2^2 - z0 z1 meet at
        // [0:0:1]? p(0,z1,z2) = z1^2, q = z2^2 -> [0:0:1] is not on both
        // ... p(0,0,1) = 0, q(0,0,1) = 1. Take p = z1^2 - z0 z2,
        // q = z1 z2 - z0^2: at z0 = 0: p = z1^2, q = z1 z2, common
        // [0:0:1].
        let s1 = from_monomials(2, &[(0, 2, 0, 1.0), (1, 0, 1, -1.0)]);
        let s2 = from_monomials(2, &[(0, 1, 1, 1.0), (2, 0, 0, -1.0)]);
        let zeros = common_zeros_cp2(&s1, &s2).unwrap();
        let total: usize = zeros.iter().map(|(_, m)| m).sum();
        assert_eq!(total, 4);
        let far = normalize_point(&[c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert!(
            zeros.iter().any(|(p, _)| p.chordal_distance(&far) < 1e-7),
            "missing the intersection on the line z0 = 0"
        );
        // residual check at every reported zero
        for (p, _) in &zeros {
            let w = p.homogeneous();
            assert!(s1.amplitude(w).norm() < 1e-8);
            assert!(s2.amplitude(w).norm() < 1e-8);
        }
    }

    #[test]
    fn zeros_of_random_pairs_are_on_both_curves() {
        let mut rng = stream_rng(101, 0);
        for n in [2usize, 3, 6] {
            let s1 = sample_gaussian(2, n, &mut rng);
            let s2 = sample_gaussian(2, n, &mut rng);
            let zeros = common_zeros_cp2(&s1, &s2).unwrap();
            let total: usize = zeros.iter().map(|(_, m)| m).sum();
            assert_eq!(total, n * n);
            for (p, _) in &zeros {
                let w = p.homogeneous();
                let r1 = s1.amplitude(w).norm();
                let r2 = s2.amplitude(w).norm();
                assert!(r1 < 1e-7 && r2 < 1e-7, "N={n}: residuals {r1} {r2}");
            }
        }
    }

    #[test]
    fn degree_cap_enforced() {
        let mut rng = stream_rng(102, 0);
        let s1 = sample_gaussian(2, 9, &mut rng);
        let s2 = sample_gaussian(2, 9, &mut rng);
        assert!(matches!(
            common_zeros_cp2(&s1, &s2),
            Err(Error::InvalidParameter(_))
        ));
    }
}
