//! Configuration ingestion, sweep orchestration and CSV emission for the
//! bridge simulator.

// `!(x > 0.0)` style checks are deliberate: they reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod output;
pub mod targets;

use std::path::{Path, PathBuf};

use thiserror::Error;

pub use config::{parse_config, ConfigError, SweepConfig, Target};
use output::{sibling, write_file};
use targets::{run_target, TargetOutput};

/// Directory prepended to relative output paths when set.
pub const OUTPUT_DIR_ENV: &str = "QWB_OUTPUT_DIR";

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error)]
pub enum RunError {
    #[error("config: {0}")]
    Config(#[from] ConfigError),
    #[error("solver: {0}")]
    Solver(#[from] qwb_core::QwbError),
    #[error("thread pool: {0}")]
    Pool(String),
    #[error("io: {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Solver(_) | RunError::Pool(_) | RunError::Io { .. } => 3,
        }
    }
}

/// Files written by one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub csv: PathBuf,
    pub summary: Option<PathBuf>,
    pub plot: Option<PathBuf>,
    pub rows: usize,
    pub failed_rows: usize,
}

/// The `#` block at the top of every CSV: version, target, seed and the
/// resolved parameter set.
pub fn header_lines(cfg: &SweepConfig, notes: &[String]) -> Vec<String> {
    let mut h = vec![format!("qwb {VERSION}"), format!("target = {}", cfg.target), format!("seed = {}", cfg.seed)];
    match cfg.target {
        Target::Circuit => {
            let c = &cfg.circuit;
            h.push(format!("C = {:?} F", c.c));
            h.push(format!(
                "C12 = {:e}, C13 = {:e}, C23 = {:e}, C24 = {:e}, C34 = {:e} F",
                c.c12, c.c13, c.c23, c.c24, c.c34
            ));
            h.push(format!("E = {:?} J, E_C = {:e} J, L4 = {:e} H", c.e, c.e_c, c.l4));
            h.push(format!("gamma1 = {:e} 1/s, gamma4 = {:e} 1/s, n = {}", c.gamma1, c.gamma4, c.n));
            h.push(format!("trunc = {:?}, quartic = {}, equalize_qubit3 = {}", c.trunc, c.quartic, c.equalize_qubit3));
        }
        Target::NFunction => {}
        _ => {
            let p = &cfg.params;
            let kv: Vec<String> =
                qwb_core::model::QwbParams::NAMES.iter().zip(p.values()).map(|(k, v)| format!("{k} = {v}")).collect();
            h.push(format!("params: {}", kv.join(", ")));
            if !cfg.overrides.is_empty() {
                h.push(format!("overrides: {}", cfg.overrides.join(", ")));
            }
            if cfg.noise.enabled {
                h.push(format!("noise: T = {}", cfg.noise.coherence_time));
            } else {
                h.push("noise: off".to_string());
            }
        }
    }
    if cfg.target == Target::Robustness {
        let d = &cfg.disorder;
        h.push(format!(
            "disorder: sigma_coupling = {}, sigma_field = {}, sigma_bath_rate = {}, sigma_n = {}, samples = {}",
            d.sigma_coupling, d.sigma_field, d.sigma_bath_rate, d.sigma_n, d.samples
        ));
        h.push(format!("window: half_width = {}, points = {}", cfg.window.half_width, cfg.window.points));
    }
    for (k, g) in &cfg.grids {
        h.push(format!("grid {k} = {}, {}, {}", g.start, g.stop, g.points));
    }
    if let Some((key, _)) = cfg.target.series() {
        let vals: Vec<String> = cfg.series.iter().map(|v| v.to_string()).collect();
        h.push(format!("{key} = {}", vals.join(", ")));
    }
    h.extend(notes.iter().map(|n| format!("warning: {n}")));
    h
}

/// Applies [`OUTPUT_DIR_ENV`] to a relative path.
pub fn resolve_output(path: &Path, env_dir: Option<&Path>) -> PathBuf {
    match env_dir {
        Some(dir) if path.is_relative() => dir.join(path),
        _ => path.to_path_buf(),
    }
}

/// Evaluates the target without touching the filesystem.
pub fn compute(cfg: &SweepConfig) -> Result<TargetOutput, RunError> {
    let pool =
        rayon::ThreadPoolBuilder::new().num_threads(cfg.threads).build().map_err(|e| RunError::Pool(e.to_string()))?;
    Ok(run_target(cfg, &pool)?)
}

/// Runs the sweep and writes the CSV, plus summary and plot-data files.
pub fn run_sweep(cfg: &SweepConfig, out: &Path, plot: bool) -> Result<RunReport, RunError> {
    let result = compute(cfg)?;
    let header = header_lines(cfg, &result.notes);
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| RunError::Io { path, source }
    };
    write_file(out, &result.table.to_csv(&header)).map_err(io(out))?;
    let summary = match &result.summary {
        Some(s) => {
            let p = sibling(out, "summary.csv");
            write_file(&p, &s.to_csv(&header)).map_err(io(&p))?;
            Some(p)
        }
        None => None,
    };
    let plot = if plot {
        let p = sibling(out, "plot.dat");
        let source = result.plot_source.as_ref().unwrap_or(&result.table);
        write_file(&p, &result.plot.render(source)).map_err(io(&p))?;
        Some(p)
    } else {
        None
    };
    Ok(RunReport {
        csv: out.to_path_buf(),
        summary,
        plot,
        rows: result.table.rows.len(),
        failed_rows: result.table.failures(),
    })
}
