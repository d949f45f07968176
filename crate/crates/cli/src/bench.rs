use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use covert_core::search::Variant;
use rayon::prelude::*;

use crate::args::{BenchArgs, ParamArgs};
use crate::load::{apply_search, config, load, Loaded};
use crate::plan::solve;
use crate::EXIT_OK;

pub const THREADS_ENV: &str = "COVERT_PLANNER_THREADS";

struct Job {
    problem: PathBuf,
    domain: String,
    variant: Variant,
    loaded: std::sync::Arc<Loaded>,
}

#[derive(Default)]
struct Row {
    times: Vec<f64>,
    trace_lens: Vec<f64>,
    failed: usize,
}

enum Outcome {
    Solved { seconds: f64, trace_len: usize },
    Dnf { reason: String },
}

/// Problem files of a suite, sorted by name.
pub fn suite_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).with_context(|| format!("cannot list {}", dir.display()))? {
        let path = entry?.path();
        let ext = path.extension().and_then(|e| e.to_str());
        if path.is_file() && matches!(ext, Some("txt") | Some("problem")) {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn display_name(p: &Path) -> String {
    p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
}

pub fn run(args: BenchArgs) -> Result<ExitCode> {
    let files = suite_files(&args.suite)?;
    let mut jobs = Vec::new();
    let mut dnf: Vec<(String, String, String, String)> = Vec::new();
    for file in &files {
        let loaded = match load(file, None, None) {
            Ok(l) => std::sync::Arc::new(l),
            Err(e) => {
                dnf.push(("-".into(), "-".into(), display_name(file), format!("{e:#}")));
                continue;
            }
        };
        let variants = if !args.variants.is_empty() {
            args.variants.clone()
        } else if let Some(v) = loaded.spec.params.variant {
            vec![v]
        } else {
            Variant::ALL.to_vec()
        };
        let domain = if loaded.domain.name().is_empty() { "-".to_string() } else { loaded.domain.name().to_string() };
        for variant in variants {
            jobs.push(Job { problem: file.clone(), domain: domain.clone(), variant, loaded: loaded.clone() });
        }
    }

    let threads = std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok()).unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build()?;
    let outcomes: Vec<Outcome> = pool.install(|| {
        jobs.par_iter()
            .map(|job| {
                let mut c = config(job.variant, &ParamArgs::default(), &job.loaded.spec);
                c.noops = args.noops;
                if let Err(e) = apply_search(&mut c, &args.search) {
                    return Outcome::Dnf { reason: e.to_string() };
                }
                match solve(&job.loaded, &c) {
                    Ok(r) => Outcome::Solved { seconds: r.stats.elapsed.as_secs_f64(), trace_len: r.trace.len() },
                    Err(e) => Outcome::Dnf { reason: format!("{}: {e}", e.kind()) },
                }
            })
            .collect()
    });

    // Keyed by domain and variant position.
    let mut rows: BTreeMap<(String, usize), Row> = BTreeMap::new();
    for (job, outcome) in jobs.iter().zip(outcomes) {
        let order = Variant::ALL.iter().position(|v| *v == job.variant).expect("listed");
        let row = rows.entry((job.domain.clone(), order)).or_default();
        match outcome {
            Outcome::Solved { seconds, trace_len } => {
                row.times.push(seconds);
                row.trace_lens.push(trace_len as f64);
            }
            Outcome::Dnf { reason } => {
                row.failed += 1;
                dnf.push((job.domain.clone(), job.variant.name().into(), display_name(&job.problem), reason));
            }
        }
    }

    println!(
        "{:<20} {:<7} {:>7} {:>4} {:>10} {:>10} {:>11}",
        "domain", "variant", "samples", "dnf", "avg_time", "sd_time", "avg_obs_len"
    );
    for ((domain, order), Row { times, trace_lens, failed }) in &rows {
        let samples = times.len() + failed;
        let variant = Variant::ALL[*order].name();
        if times.is_empty() {
            println!("{domain:<20} {variant:<7} {samples:>7} {failed:>4} {:>10} {:>10} {:>11}", "-", "-", "-");
        } else {
            let (t, sd) = mean_sd(times);
            let (len, _) = mean_sd(trace_lens);
            println!("{domain:<20} {variant:<7} {samples:>7} {failed:>4} {t:>10.4} {sd:>10.4} {len:>11.2}");
        }
    }
    for (domain, variant, problem, reason) in &dnf {
        println!("DNF {domain} {variant} {problem}: {reason}");
    }
    Ok(ExitCode::from(EXIT_OK))
}
