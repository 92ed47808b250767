//! The statistical experiments: expected zero distribution, variance
//! decay, almost-sure sequences, orthonormal-basis averages, the Cesaro
//! ergodic statistic, and density-one subsequence extraction.
//!
//! Every experiment consumes an explicit seed and splits its Monte Carlo
//! work into fixed-size blocks with derived random streams, reduced in
//! block order, so reports are reproducible bit-for-bit from
//! `(seed, block size)` regardless of the worker count.

use crate::bergman::{bergman_basis, BergmanBasis, MetricModel};
use crate::error::{Error, Result};
use crate::projective::cp1_quadrature;
use crate::rng::{map_blocks, stream_rng, DEFAULT_BLOCK_SIZE};
use crate::sections::{dim_h0, sample_gaussian, Section};
use crate::stats::{least_squares, spearman_negative, RunningStats};
use crate::testfn::SpherePoly;
use crate::toeplitz::{haar_unitary, toeplitz_build};
use crate::zeros::{pair_roots, roots_cp1};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

/// Random model for a single section draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    /// iid standard complex Gaussian coefficients.
    Gaussian,
    /// Gaussian normalized to the unit sphere of H^0.
    Sphere,
    /// First element of a Haar-random orthonormal basis.
    HaarOnb,
    /// The deterministic control `z^N` (all zeros at one point).
    ZPower,
}

/// Which orthonormal basis the basis-average experiments draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OnbSource {
    Haar,
    FixedMonomial,
}

/// Common configuration of the section-ensemble experiments (m = 1).
#[derive(Debug, Clone)]
pub struct EnsembleSpec {
    pub metric: MetricModel,
    pub model: Model,
    pub psi: SpherePoly,
    pub trials: usize,
    pub seed: u64,
    pub block_size: usize,
}

impl EnsembleSpec {
    pub fn new(metric: MetricModel, model: Model, psi: SpherePoly, trials: usize, seed: u64) -> Result<Self> {
        if trials == 0 {
            return Err(Error::InvalidParameter("trials must be at least 1".into()));
        }
        if metric.m() != 1 {
            return Err(Error::MetricDimensionMismatch);
        }
        Ok(Self {
            metric,
            model,
            psi,
            trials,
            seed,
            block_size: DEFAULT_BLOCK_SIZE,
        })
    }
}

/// One labelled scalar of an experiment report.
#[derive(Debug, Clone, Serialize)]
pub struct ReportRow {
    pub n: u64,
    pub statistic: String,
    pub value: f64,
    pub std_error: f64,
    pub samples: u64,
}

/// A fitted summary quantity (exponent, correlation, ...).
#[derive(Debug, Clone, Serialize)]
pub struct FitSummary {
    pub name: String,
    pub value: f64,
    pub std_error: f64,
}

/// Rows plus fits; reproducible from `(seed, block_size)`.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub rows: Vec<ReportRow>,
    pub fits: Vec<FitSummary>,
    pub seed: u64,
    pub block_size: u64,
    /// Wall time of the run in seconds. Not part of the deterministic
    /// payload.
    pub wall_time: f64,
}

impl ExperimentReport {
    fn new(seed: u64, block_size: usize) -> Self {
        Self {
            rows: vec![],
            fits: vec![],
            seed,
            block_size: block_size as u64,
            wall_time: 0.0,
        }
    }

    fn row(&mut self, n: usize, statistic: &str, value: f64, std_error: f64, samples: u64) {
        self.rows.push(ReportRow {
            n: n as u64,
            statistic: statistic.to_string(),
            value,
            std_error,
            samples,
        });
    }

    fn fit(&mut self, name: &str, value: f64, std_error: f64) {
        self.fits.push(FitSummary {
            name: name.to_string(),
            value,
            std_error,
        });
    }

    pub fn find_row(&self, n: usize, statistic: &str) -> Option<&ReportRow> {
        self.rows
            .iter()
            .find(|r| r.n == n as u64 && r.statistic == statistic)
    }

    pub fn find_fit(&self, name: &str) -> Option<&FitSummary> {
        self.fits.iter().find(|f| f.name == name)
    }
}

/// Sampler for one section draw under the given model and metric. The
/// perturbed metric reweights the Gaussian ensemble through the Bergman
/// orthonormal basis, which is exactly the Gaussian measure of its inner
/// product.
struct SectionSampler {
    n: usize,
    model: Model,
    basis: Option<BergmanBasis>,
}

impl SectionSampler {
    fn new(metric: &MetricModel, model: Model, n: usize) -> Result<Self> {
        let basis = if metric.is_fubini_study() {
            None
        } else {
            Some(bergman_basis(metric, n)?)
        };
        Ok(Self { n, model, basis })
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Section {
        let n = self.n;
        match self.model {
            Model::ZPower => Section::basis_element(1, n, n),
            _ => {
                let mut s = match &self.basis {
                    None => sample_gaussian(1, n, rng),
                    Some(basis) => {
                        let a: Vec<Complex64> = (0..=n)
                            .map(|_| crate::rng::complex_standard_normal(rng))
                            .collect();
                        let a = DMatrix::from_column_slice(n + 1, 1, &a);
                        let coeffs = basis.transform().transpose() * a;
                        Section::new(1, n, coeffs.column(0).iter().copied().collect())
                            .expect("coefficient count matches")
                    }
                };
                if matches!(self.model, Model::Sphere | Model::HaarOnb) {
                    // a normalized Gaussian is sphere-uniform, which is
                    // also the law of any single Haar basis column
                    let norm = s.norm();
                    if norm > 0.0 {
                        s = s.scaled(Complex64::new(1.0 / norm, 0.0));
                    }
                }
                s
            }
        }
    }
}

/// Quadrature reference value `int psi d(curvature)`; for Fubini-Study
/// this is the mean of psi.
pub fn pairing_reference(metric: &MetricModel, psi: &SpherePoly) -> f64 {
    let rule = cp1_quadrature((psi.degree() + metric.rho_degree()) as usize + 6);
    rule.integrate(|node| {
        let p = node.to_projective();
        psi.eval(&p) * metric.volume_density(&p)
    })
}

/// Monte Carlo mean of the root pairing `(Z_s/N, psi)` at each degree,
/// against the quadrature reference.
pub fn expected_pairing(spec: &EnsembleSpec, degrees: &[usize]) -> Result<ExperimentReport> {
    let t0 = std::time::Instant::now();
    let mut report = ExperimentReport::new(spec.seed, spec.block_size);
    let reference = pairing_reference(&spec.metric, &spec.psi);
    for (slot, &n) in degrees.iter().enumerate() {
        let sampler = SectionSampler::new(&spec.metric, spec.model, n)?;
        let blocks: Vec<Result<RunningStats>> = map_blocks(
            spec.seed,
            slot as u64,
            spec.trials,
            spec.block_size,
            |rng, range| {
                let mut st = RunningStats::new();
                for _ in range {
                    let s = sampler.draw(rng);
                    let zs = roots_cp1(&s)?;
                    st.push(pair_roots(&zs, &spec.psi).value);
                }
                Ok(st)
            },
        );
        let mut total = RunningStats::new();
        for block in blocks {
            total.merge(&block?);
        }
        let std_error = if spec.trials > 1 { total.std_error() } else { 0.0 };
        report.row(n, "mean", total.mean(), std_error, total.count());
        report.row(n, "reference", reference, 0.0, 0);
        let z = if std_error > 0.0 {
            (total.mean() - reference).abs() / std_error
        } else if (total.mean() - reference).abs() < 1e-12 {
            0.0
        } else {
            f64::INFINITY
        };
        report.row(n, "z_score", z, 0.0, 0);
    }
    report.wall_time = t0.elapsed().as_secs_f64();
    Ok(report)
}

/// Per-degree sample variance of the pairing and the log-log slope of
/// variance against degree.
pub fn variance_sweep(spec: &EnsembleSpec, degrees: &[usize]) -> Result<ExperimentReport> {
    if degrees.len() < 4 {
        return Err(Error::CannotFitSlope {
            required: 4,
            got: degrees.len(),
        });
    }
    if !spec.metric.is_fubini_study() {
        return Err(Error::InvalidMetric(
            "variance sweep isolates the Fubini-Study bound".into(),
        ));
    }
    let t0 = std::time::Instant::now();
    let mut report = ExperimentReport::new(spec.seed, spec.block_size);
    let mut log_n = Vec::with_capacity(degrees.len());
    let mut log_var = Vec::with_capacity(degrees.len());
    for (slot, &n) in degrees.iter().enumerate() {
        let sampler = SectionSampler::new(&spec.metric, spec.model, n)?;
        let blocks: Vec<Result<RunningStats>> = map_blocks(
            spec.seed,
            slot as u64,
            spec.trials,
            spec.block_size,
            |rng, range| {
                let mut st = RunningStats::new();
                for _ in range {
                    let s = sampler.draw(rng);
                    let zs = roots_cp1(&s)?;
                    st.push(pair_roots(&zs, &spec.psi).value);
                }
                Ok(st)
            },
        );
        let mut total = RunningStats::new();
        for block in blocks {
            total.merge(&block?);
        }
        let variance = total.variance();
        report.row(n, "variance", variance, total.variance_std_error(), total.count());
        if variance > 0.0 {
            log_n.push((n as f64).ln());
            log_var.push(variance.ln());
        }
    }
    if log_var.len() == degrees.len() {
        let fit = least_squares(&log_n, &log_var);
        report.fit("slope", fit.slope, fit.slope_std_error);
        report.fit("intercept", fit.intercept, 0.0);
    } else {
        // constant test functions have identically zero variance
        report.fit("slope", f64::NEG_INFINITY, 0.0);
    }
    report.wall_time = t0.elapsed().as_secs_f64();
    Ok(report)
}

/// One independent draw per degree N = 1..n_max (a single point of the
/// product probability space): records the pairing errors
/// `e_N = |(Z/N, psi) - reference|`, their rank correlation with N, and
/// the largest `e_N N^0.4` over the top three quarters of the range.
pub fn sequence_convergence(spec: &EnsembleSpec, n_max: usize) -> Result<ExperimentReport> {
    let t0 = std::time::Instant::now();
    let mut report = ExperimentReport::new(spec.seed, spec.block_size);
    let reference = pairing_reference(&spec.metric, &spec.psi);
    let errors: Vec<Result<f64>> = (1..=n_max)
        .into_par_iter()
        .map(|n| {
            let sampler = SectionSampler::new(&spec.metric, spec.model, n)?;
            let mut rng = stream_rng(spec.seed, n as u64);
            let s = sampler.draw(&mut rng);
            let zs = roots_cp1(&s)?;
            Ok((pair_roots(&zs, &spec.psi).value - reference).abs())
        })
        .collect();
    let mut e = Vec::with_capacity(n_max);
    for (n, err) in errors.into_iter().enumerate() {
        let err = err?;
        report.row(n + 1, "e", err, 0.0, 1);
        e.push(err);
    }
    let lo = (n_max / 4).max(1);
    let max_weighted = (lo..=n_max)
        .map(|n| e[n - 1] * (n as f64).powf(0.4))
        .fold(0.0, f64::max);
    report.fit("max_weighted", max_weighted, 0.0);
    let ns: Vec<f64> = (1..=n_max).map(|n| n as f64).collect();
    let (rho, p) = spearman_negative(&ns, &e);
    report.fit("spearman_rho", rho, 0.0);
    report.fit("p_negative", p, 0.0);
    report.wall_time = t0.elapsed().as_secs_f64();
    Ok(report)
}

/// For each degree, draw one orthonormal basis and average the squared
/// pairing deviations over all of its elements; fit the decay exponent.
pub fn onb_zero_average(
    source: OnbSource,
    psi: &SpherePoly,
    degrees: &[usize],
    seed: u64,
) -> Result<ExperimentReport> {
    let t0 = std::time::Instant::now();
    let mut report = ExperimentReport::new(seed, DEFAULT_BLOCK_SIZE);
    let fs = MetricModel::fubini_study(1);
    let reference = pairing_reference(&fs, psi);
    let values: Vec<Result<(usize, f64)>> = degrees
        .par_iter()
        .map(|&n| {
            let d = dim_h0(1, n);
            let mut rng = stream_rng(seed, n as u64);
            let unitary = match source {
                OnbSource::Haar => haar_unitary(d, &mut rng),
                OnbSource::FixedMonomial => DMatrix::identity(d, d),
            };
            let mut acc = 0.0;
            for j in 0..d {
                let s = Section::new(1, n, unitary.column(j).iter().copied().collect())?;
                let zs = roots_cp1(&s)?;
                let dev = pair_roots(&zs, psi).value - reference;
                acc += dev * dev;
            }
            Ok((n, acc / d as f64))
        })
        .collect();
    let mut log_n = Vec::new();
    let mut log_v = Vec::new();
    for item in values {
        let (n, v) = item?;
        report.row(n, "avg_sq_dev", v, 0.0, dim_h0(1, n) as u64);
        if v > 0.0 {
            log_n.push((n as f64).ln());
            log_v.push(v.ln());
        }
    }
    if log_v.len() >= 2 {
        let fit = least_squares(&log_n, &log_v);
        report.fit("decay_exponent", fit.slope, fit.slope_std_error);
    } else {
        report.fit("decay_exponent", f64::NEG_INFINITY, 0.0);
    }
    report.wall_time = t0.elapsed().as_secs_f64();
    Ok(report)
}

/// The Cesaro ergodic statistic through n_max: the running average over
/// n of the basis-mean squared deviation of the mass integrals
/// `int psi |S^n_j|^2 dV` from the space average of psi. One Haar draw
/// per degree for the random source; the fixed monomial basis is the
/// negative control.
pub fn ep_cesaro(
    source: OnbSource,
    psi: &SpherePoly,
    n_max: usize,
    seed: u64,
) -> Result<ExperimentReport> {
    let t0 = std::time::Instant::now();
    let mut report = ExperimentReport::new(seed, DEFAULT_BLOCK_SIZE);
    let fs = MetricModel::fubini_study(1);
    let psi_mean = pairing_reference(&fs, psi);
    let per_n: Vec<Result<f64>> = (1..=n_max)
        .into_par_iter()
        .map(|n| {
            let d = dim_h0(1, n);
            let rule = cp1_quadrature(2 * n + psi.degree() as usize + 4);
            let t = toeplitz_build(psi, n, &fs, &rule)?;
            // mass integrals of the basis elements are the diagonal of
            // U^H T U in the rotated basis
            let masses: Vec<f64> = match source {
                OnbSource::FixedMonomial => (0..d).map(|j| t.entries()[(j, j)].re).collect(),
                OnbSource::Haar => {
                    let mut rng = stream_rng(seed, n as u64);
                    let u = haar_unitary(d, &mut rng);
                    let tu = t.entries() * &u;
                    (0..d)
                        .map(|j| {
                            let mut diag = Complex64::new(0.0, 0.0);
                            for i in 0..d {
                                diag += u[(i, j)].conj() * tu[(i, j)];
                            }
                            diag.re
                        })
                        .collect()
                }
            };
            let avg: f64 = masses
                .iter()
                .map(|mass| (mass - psi_mean) * (mass - psi_mean))
                .sum::<f64>()
                / d as f64;
            Ok(avg)
        })
        .collect();
    let mut running = 0.0;
    for (idx, item) in per_n.into_iter().enumerate() {
        let n = idx + 1;
        let a_n = item?;
        running += a_n;
        report.row(n, "per_n", a_n, 0.0, dim_h0(1, n) as u64);
        report.row(n, "cesaro", running / n as f64, 0.0, n as u64);
    }
    report.wall_time = t0.elapsed().as_secs_f64();
    Ok(report)
}

/// Extract a subsequence of weighted counting density one on which the
/// values tend to zero, given that their weighted Cesaro means do.
///
/// Levels `eps_k = 2^-k` are certified at the first index where the
/// running Cesaro tail supremum drops below `eps_k^2`; index n is kept
/// when its value is at most the certified level threshold, with a grace
/// threshold of 1.5 times the Cesaro tail just after n so that honestly
/// decaying sequences are never trimmed. Fails when level 1 never
/// certifies on the prefix.
pub fn density_one_extract(values: &[f64], weights: &[usize]) -> Result<Vec<usize>> {
    if values.len() != weights.len() {
        return Err(Error::InvalidParameter(
            "values and weights must have equal length".into(),
        ));
    }
    if values.is_empty() {
        return Err(Error::NoDensityOneSubsequence);
    }
    if values.iter().any(|&v| !(v >= 0.0)) {
        return Err(Error::InvalidParameter(
            "values must be nonnegative".into(),
        ));
    }
    if weights.iter().any(|&w| w == 0) {
        return Err(Error::InvalidParameter(
            "weights must be positive".into(),
        ));
    }
    let len = values.len();
    // weighted Cesaro means and their suffix maxima
    let mut cesaro = Vec::with_capacity(len);
    let mut value_sum = 0.0;
    let mut weight_sum = 0.0;
    for (v, &w) in values.iter().zip(weights) {
        value_sum += v * w as f64;
        weight_sum += w as f64;
        cesaro.push(value_sum / weight_sum);
    }
    let mut tail = vec![0.0; len];
    let mut running = f64::NEG_INFINITY;
    for i in (0..len).rev() {
        running = running.max(cesaro[i]);
        tail[i] = running;
    }
    // certification points of the level thresholds
    let mut switch_points = Vec::new();
    let mut level = 1u32;
    for (i, &t) in tail.iter().enumerate() {
        while t <= 0.25f64.powi(level as i32) {
            switch_points.push(i);
            level += 1;
            if level > 60 {
                break;
            }
        }
        if level > 60 {
            break;
        }
    }
    if switch_points.is_empty() {
        return Err(Error::NoDensityOneSubsequence);
    }
    let mut out = Vec::new();
    let mut current = 0usize; // number of certified levels up to n
    for n in 0..len {
        while current < switch_points.len() && switch_points[current] <= n {
            current += 1;
        }
        let level_threshold = 0.5f64.powi(current.max(1) as i32);
        let grace = 1.5 * tail[(n + 1).min(len - 1)];
        if values[n] <= level_threshold.max(grace) {
            out.push(n);
        }
    }
    Ok(out)
}
