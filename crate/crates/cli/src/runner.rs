//! Experiment dispatch: maps a validated configuration onto the library
//! calls and collects labelled rows and fits.

use crate::config::RunConfig;
use equizero_core::bergman::{
    bergman_basis, bergman_density, gram_matrix, kodaira_pullback_density, MetricModel,
};
use equizero_core::cp2::common_zeros_cp2;
use equizero_core::experiments::{
    ep_cesaro, expected_pairing, onb_zero_average, sequence_convergence, variance_sweep,
    EnsembleSpec, ExperimentReport, FitSummary, Model, OnbSource, ReportRow,
};
use equizero_core::projective::{cp1_quadrature, sample_fs_uniform};
use equizero_core::rng::{stream_rng, DEFAULT_BLOCK_SIZE};
use equizero_core::sections::sample_gaussian;
use equizero_core::stats::RunningStats;
use equizero_core::testfn::SpherePoly;
use equizero_core::toeplitz::{
    gn_spread, haar_unitary, orbit_closed_form, orbit_functional, sphere_moment4, szego_trace,
    toeplitz_build,
};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

pub struct RunOutput {
    pub rows: Vec<ReportRow>,
    pub fits: Vec<FitSummary>,
    pub block_size: usize,
}

fn row(n: usize, statistic: &str, value: f64, std_error: f64, samples: u64) -> ReportRow {
    ReportRow {
        n: n as u64,
        statistic: statistic.to_string(),
        value,
        std_error,
        samples,
    }
}

fn fit(name: &str, value: f64, std_error: f64) -> FitSummary {
    FitSummary {
        name: name.to_string(),
        value,
        std_error,
    }
}

fn need<T: Clone>(opt: &Option<T>, what: &str) -> Result<T, String> {
    opt.clone().ok_or_else(|| format!("config: `{what}` is required for this experiment"))
}

fn parse_psi(config: &RunConfig) -> Result<SpherePoly, String> {
    let text = need(&config.psi, "psi")?;
    SpherePoly::parse(&text).map_err(|e| e.to_string())
}

fn parse_model(config: &RunConfig) -> Result<Model, String> {
    match config.model.as_deref().unwrap_or("sphere") {
        "gaussian" => Ok(Model::Gaussian),
        "sphere" => Ok(Model::Sphere),
        "haar-onb" => Ok(Model::HaarOnb),
        "z-power" => Ok(Model::ZPower),
        other => Err(format!("config: unknown model `{other}`")),
    }
}

fn parse_source(config: &RunConfig) -> Result<OnbSource, String> {
    match config.source.as_deref().unwrap_or("haar") {
        "haar" => Ok(OnbSource::Haar),
        "monomial" => Ok(OnbSource::FixedMonomial),
        other => Err(format!("config: unknown basis source `{other}`")),
    }
}

fn metric_of(config: &RunConfig) -> MetricModel {
    config
        .metric
        .clone()
        .unwrap_or_else(|| MetricModel::fubini_study(1))
}

fn degrees_of(config: &RunConfig) -> Result<Vec<usize>, String> {
    if let Some(list) = &config.n_list {
        if list.is_empty() {
            return Err("config: `n_list` must not be empty".into());
        }
        return Ok(list.clone());
    }
    config
        .n
        .map(|n| vec![n])
        .ok_or_else(|| "config: `n` or `n_list` is required".into())
}

fn ensemble_spec(config: &RunConfig, seed: u64) -> Result<EnsembleSpec, String> {
    let mut spec = EnsembleSpec::new(
        metric_of(config),
        parse_model(config)?,
        parse_psi(config)?,
        config.trials.unwrap_or(1000),
        seed,
    )
    .map_err(|e| e.to_string())?;
    if let Some(block) = config.block_size {
        if block == 0 {
            return Err("config: `block_size` must be positive".into());
        }
        spec.block_size = block;
    }
    Ok(spec)
}

fn from_core(report: ExperimentReport) -> RunOutput {
    RunOutput {
        rows: report.rows,
        fits: report.fits,
        block_size: report.block_size as usize,
    }
}

pub fn run(config: &RunConfig, seed: u64) -> Result<RunOutput, String> {
    let block_size = config.block_size.unwrap_or(DEFAULT_BLOCK_SIZE);
    match config.experiment.as_str() {
        "expected-pairing" => {
            let spec = ensemble_spec(config, seed)?;
            let degrees = degrees_of(config)?;
            expected_pairing(&spec, &degrees)
                .map(from_core)
                .map_err(|e| e.to_string())
        }
        "variance-sweep" => {
            let spec = ensemble_spec(config, seed)?;
            let degrees = degrees_of(config)?;
            variance_sweep(&spec, &degrees)
                .map(from_core)
                .map_err(|e| e.to_string())
        }
        "sequence" => {
            let spec = ensemble_spec(config, seed)?;
            let n_max = need(&config.n_max, "n_max")?;
            sequence_convergence(&spec, n_max)
                .map(from_core)
                .map_err(|e| e.to_string())
        }
        "onb-average" => {
            let psi = parse_psi(config)?;
            let source = parse_source(config)?;
            let degrees = degrees_of(config)?;
            onb_zero_average(source, &psi, &degrees, seed)
                .map(from_core)
                .map_err(|e| e.to_string())
        }
        "ep-cesaro" => {
            let psi = parse_psi(config)?;
            let source = parse_source(config)?;
            let n_max = need(&config.n_max, "n_max")?;
            ep_cesaro(source, &psi, n_max, seed)
                .map(from_core)
                .map_err(|e| e.to_string())
        }
        "szego" => run_szego(config, block_size),
        "orbit-check" => run_orbit_check(config, seed, block_size),
        "moment4" => run_moment4(config, seed, block_size),
        "gn-spread" => run_gn_spread(config, seed, block_size),
        "bergman-check" => run_bergman_check(config, seed, block_size),
        "common-zeros" => run_common_zeros(config, seed, block_size),
        other => Err(format!("config: unknown experiment `{other}`")),
    }
}

fn run_szego(config: &RunConfig, block_size: usize) -> Result<RunOutput, String> {
    let psi = parse_psi(config)?;
    let metric = metric_of(config);
    let degrees = degrees_of(config)?;
    let ks = config.k_list.clone().unwrap_or_else(|| vec![1, 2, 3]);
    if ks.iter().any(|&k| k == 0 || k > 6) {
        return Err("config: `k_list` entries must lie in 1..=6".into());
    }
    let quad = cp1_quadrature(6 * psi.degree().max(1) as usize + 8);
    let mut out = RunOutput {
        rows: vec![],
        fits: vec![],
        block_size,
    };
    for &k in &ks {
        // mean of psi^k against the metric's normalized volume
        let limit = quad.integrate(|node| {
            let p = node.to_projective();
            psi.eval(&p).powi(k as i32) * metric.volume_density(&p)
        });
        for &n in &degrees {
            let rule = cp1_quadrature(metric.gram_rule_degree(n, psi.degree()));
            let t = toeplitz_build(&psi, n, &metric, &rule).map_err(|e| e.to_string())?;
            let trace = szego_trace(&t, k);
            out.rows.push(row(n, &format!("trace_k{k}"), trace, 0.0, 0));
            out.rows
                .push(row(n, &format!("error_k{k}"), (trace - limit).abs(), 0.0, 0));
        }
        out.fits.push(fit(&format!("limit_k{k}"), limit, 0.0));
    }
    Ok(out)
}

fn run_orbit_check(config: &RunConfig, seed: u64, block_size: usize) -> Result<RunOutput, String> {
    let d = need(&config.d, "d")?;
    if d == 0 {
        return Err("config: `d` must be positive".into());
    }
    let trials = config.trials.unwrap_or(100_000);
    let mut rng = stream_rng(seed, 0);
    let lambdas: Vec<Vec<f64>> = match &config.lambda {
        Some(l) => {
            if l.len() != d {
                return Err(format!("config: `lambda` must have {d} entries"));
            }
            vec![l.clone()]
        }
        None => {
            let count = config.lambda_count.unwrap_or(3);
            (0..count)
                .map(|_| (0..d).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect())
                .collect()
        }
    };
    let mut out = RunOutput {
        rows: vec![],
        fits: vec![],
        block_size,
    };
    for (slot, lambda) in lambdas.iter().enumerate() {
        let closed = orbit_closed_form(lambda, d);
        let mut st = RunningStats::new();
        let mut inner = stream_rng(seed, slot as u64 + 1);
        for _ in 0..trials {
            let u = haar_unitary(d, &mut inner);
            st.push(orbit_functional(&u, lambda));
        }
        let z = (st.mean() - closed).abs() / st.std_error();
        out.rows
            .push(row(slot, "mc_mean", st.mean(), st.std_error(), st.count()));
        out.rows.push(row(slot, "closed_form", closed, 0.0, 0));
        out.rows.push(row(slot, "z_score", z, 0.0, 0));
    }
    Ok(out)
}

fn run_moment4(config: &RunConfig, seed: u64, block_size: usize) -> Result<RunOutput, String> {
    let ds = config
        .d_list
        .clone()
        .or_else(|| config.d.map(|d| vec![d]))
        .ok_or("config: `d` or `d_list` is required")?;
    let trials = config.trials.unwrap_or(100_000);
    let mut out = RunOutput {
        rows: vec![],
        fits: vec![],
        block_size,
    };
    for (slot, &d) in ds.iter().enumerate() {
        if d == 0 {
            return Err("config: dimensions must be positive".into());
        }
        let mut rng = stream_rng(seed, slot as u64);
        let (mean, se) = sphere_moment4(d, trials, &mut rng);
        let reference = 2.0 / (d as f64 * (d as f64 + 1.0));
        out.rows.push(row(d, "mc_mean", mean, se, trials as u64));
        out.rows.push(row(d, "reference", reference, 0.0, 0));
        let z = if se > 0.0 {
            (mean - reference).abs() / se
        } else if (mean - reference).abs() < 1e-12 {
            0.0
        } else {
            f64::INFINITY
        };
        out.rows.push(row(d, "z_score", z, 0.0, 0));
    }
    Ok(out)
}

fn run_gn_spread(config: &RunConfig, seed: u64, block_size: usize) -> Result<RunOutput, String> {
    let ds = config
        .d_list
        .clone()
        .or_else(|| config.d.map(|d| vec![d]))
        .ok_or("config: `d` or `d_list` is required")?;
    let outer = config.trials_outer.unwrap_or(24);
    let inner = config.trials_inner.unwrap_or(20_000);
    let mut out = RunOutput {
        rows: vec![],
        fits: vec![],
        block_size,
    };
    for (slot, &d) in ds.iter().enumerate() {
        if d < 2 {
            return Err("config: gn-spread requires d >= 2".into());
        }
        let mut rng = stream_rng(seed, slot as u64);
        let report = gn_spread(d, outer, inner, &mut rng);
        out.rows.push(row(d, "spread", report.spread, 0.0, outer as u64));
        out.rows.push(row(
            d,
            "mean_std_error",
            report.mean_std_error,
            0.0,
            inner as u64,
        ));
        out.rows
            .push(row(d, "noisy", if report.noisy { 1.0 } else { 0.0 }, 0.0, 0));
    }
    Ok(out)
}

fn run_bergman_check(config: &RunConfig, seed: u64, block_size: usize) -> Result<RunOutput, String> {
    let metric = metric_of(config);
    let degrees = degrees_of(config)?;
    let points = 200;
    let mut rng = stream_rng(seed, 0);
    let test_points: Vec<_> = (0..points).map(|_| sample_fs_uniform(1, &mut rng)).collect();
    let mut out = RunOutput {
        rows: vec![],
        fits: vec![],
        block_size,
    };
    for &n in &degrees {
        let basis = bergman_basis(&metric, n).map_err(|e| e.to_string())?;
        let rule = cp1_quadrature(basis.rule_degree());
        let gram = gram_matrix(&metric, n, &rule).map_err(|e| e.to_string())?;
        let m = basis.transform();
        let d = basis.dim();
        let eye = DMatrix::<Complex64>::identity(d, d);
        let gram_err = (m * gram * m.adjoint() - eye).norm();
        let density_dev = test_points
            .iter()
            .map(|p| (bergman_density(&basis, p) / n as f64 - 1.0).abs())
            .fold(0.0, f64::max);
        let kodaira_dev = test_points
            .iter()
            .map(|p| {
                kodaira_pullback_density(&basis, p)
                    .map(|v| (v - metric.volume_density(p)).abs())
                    .unwrap_or(f64::INFINITY)
            })
            .fold(0.0, f64::max);
        out.rows.push(row(n, "gram_identity_error", gram_err, 0.0, 0));
        out.rows
            .push(row(n, "density_sup_dev", density_dev, 0.0, points as u64));
        out.rows
            .push(row(n, "kodaira_sup_dev", kodaira_dev, 0.0, points as u64));
    }
    Ok(out)
}

fn run_common_zeros(config: &RunConfig, seed: u64, block_size: usize) -> Result<RunOutput, String> {
    let n = config.n.unwrap_or(4);
    let pairs = config.pairs.unwrap_or(100);
    let threshold = config.region_threshold.unwrap_or(0.5);
    if !(0.0..=1.0).contains(&threshold) {
        return Err("config: `region_threshold` must lie in [0, 1]".into());
    }
    let mut rng = stream_rng(seed, 0);
    let mut in_region = 0usize;
    let mut total = 0usize;
    let mut exact_count = 0usize;
    for _ in 0..pairs {
        let s1 = sample_gaussian(2, n, &mut rng);
        let s2 = sample_gaussian(2, n, &mut rng);
        let zeros = common_zeros_cp2(&s1, &s2).map_err(|e| e.to_string())?;
        let count: usize = zeros.iter().map(|(_, m)| m).sum();
        if count == n * n {
            exact_count += 1;
        }
        for (p, mult) in &zeros {
            total += mult;
            if p.homogeneous()[0].norm_sqr() <= threshold {
                in_region += mult;
            }
        }
    }
    let volume = 1.0 - (1.0 - threshold) * (1.0 - threshold);
    let frac = in_region as f64 / total as f64;
    let sigma = (volume * (1.0 - volume) / total as f64).sqrt();
    let mut out = RunOutput {
        rows: vec![],
        fits: vec![],
        block_size,
    };
    out.rows
        .push(row(n, "pairs_with_full_count", exact_count as f64, 0.0, pairs as u64));
    out.rows
        .push(row(n, "region_fraction", frac, sigma, total as u64));
    out.rows.push(row(n, "region_volume", volume, 0.0, 0));
    out.rows.push(row(
        n,
        "z_score",
        (frac - volume).abs() / sigma,
        0.0,
        0,
    ));
    Ok(out)
}
