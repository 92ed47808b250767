//! Reproducible experiment runner. Usage:
//!
//! ```text
//! equizero --config run.json [--outdir DIR] [--threads K] [--seed S]
//! ```
//!
//! Writes `<outdir>/report.csv` and `<outdir>/report.json`. Exit codes:
//! 0 on success, 2 when a statistical acceptance bound embedded in the
//! configuration is violated (for CI gating), 1 on operational errors.

mod config;
mod hash;
mod report;
mod runner;

use config::RunConfig;
use std::path::PathBuf;
use std::process::ExitCode;

struct Args {
    config: PathBuf,
    outdir: Option<PathBuf>,
    threads: Option<usize>,
    seed: Option<u64>,
}

fn parse_args() -> Result<Args, String> {
    let mut config = None;
    let mut outdir = None;
    let mut threads = None;
    let mut seed = None;
    let mut it = std::env::args().skip(1);
    while let Some(arg) = it.next() {
        let mut value = |name: &str| {
            it.next()
                .ok_or_else(|| format!("missing value for {name}"))
        };
        match arg.as_str() {
            "--config" => config = Some(PathBuf::from(value("--config")?)),
            "--outdir" => outdir = Some(PathBuf::from(value("--outdir")?)),
            "--threads" => {
                threads = Some(
                    value("--threads")?
                        .parse::<usize>()
                        .map_err(|e| format!("--threads: {e}"))?,
                )
            }
            "--seed" => {
                seed = Some(
                    value("--seed")?
                        .parse::<u64>()
                        .map_err(|e| format!("--seed: {e}"))?,
                )
            }
            "--help" | "-h" => {
                println!("usage: equizero --config run.json [--outdir DIR] [--threads K] [--seed S]");
                std::process::exit(0);
            }
            other => return Err(format!("unknown flag `{other}`")),
        }
    }
    Ok(Args {
        config: config.ok_or("`--config PATH` is required")?,
        outdir,
        threads,
        seed,
    })
}

fn run() -> Result<ExitCode, String> {
    let args = parse_args()?;
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| format!("{}: {e}", args.config.display()))?;
    let mut config = RunConfig::parse(&text)?;
    // the seed flag overrides the config; one of them must exist
    if let Some(seed) = args.seed {
        config.seed = Some(seed);
    }
    let seed = config
        .seed
        .ok_or("config: `seed` is required (set it in the file or with --seed)")?;
    if let Some(threads) = args.threads {
        config.threads = Some(threads);
    }
    let threads = config.threads.unwrap_or(1).max(1);
    let outdir = args
        .outdir
        .or_else(|| config.output_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&outdir).map_err(|e| format!("{}: {e}", outdir.display()))?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| format!("thread pool: {e}"))?;
    let started = std::time::Instant::now();
    let output = pool.install(|| runner::run(&config, seed))?;
    let wall_time_s = started.elapsed().as_secs_f64();

    let verdicts = match &config.bounds {
        Some(bounds) => report::check_bounds(bounds, &output.rows, &output.fits)?,
        None => vec![],
    };
    let violated = verdicts.iter().any(|v| !v.ok);

    let resolved = serde_json::to_string(&config).expect("config serialization");
    let sidecar = report::Sidecar {
        schema: 1,
        experiment: &config.experiment,
        config: &config,
        seed,
        threads,
        block_size: output.block_size,
        version: env!("CARGO_PKG_VERSION"),
        input_hash: hash::sha256_hex(resolved.as_bytes()),
        wall_time_s,
        rows: &output.rows,
        fits: &output.fits,
        bounds: verdicts,
        bounds_violated: violated,
    };
    let csv_path = outdir.join("report.csv");
    report::write_csv(&csv_path, &config.experiment, &output.rows)
        .map_err(|e| format!("{}: {e}", csv_path.display()))?;
    let json_path = outdir.join("report.json");
    report::write_json(&json_path, &sidecar).map_err(|e| format!("{}: {e}", json_path.display()))?;

    for v in &sidecar.bounds {
        eprintln!(
            "bound {}: value {:.6e} -> {}",
            v.description,
            v.value,
            if v.ok { "ok" } else { "VIOLATED" }
        );
    }
    eprintln!(
        "{}: {} rows, {} fits -> {}",
        config.experiment,
        output.rows.len(),
        output.fits.len(),
        outdir.display()
    );
    Ok(if violated {
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    })
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
    }
}
