//! Command-line entry points.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use lle_spectra::lle::{build_w_with, spectrum_lle_with, SpectrumOptions};
use lle_spectra::matching::{appendix_divergence_demo, SpectralSolver};
use lle_spectra::sampling::neighborhoods_with;
use lle_spectra::{Domain, Execution};

use crate::compare::{analytic_pairs, run_compare, write_report, REPORT_HEADER};
use crate::config::{parse_config, ExperimentConfig};
use crate::output::{csv_string, num, OutputDir};
use crate::verify::run_all;
use crate::{HarnessError, Result, Stage};

#[derive(Debug, Parser)]
#[command(name = "lle-harness", version, about = "LLE spectra against the analytic limiting spectrum")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Emit the grid point cloud.
    Sample(Common),
    /// Emit the sparse LLE weight matrix as triplets.
    BuildW(Common),
    /// Smallest eigenvalues of (I - W) / eps^2.
    LleSpectrum(Common),
    /// Eigenvalues of the limiting operator.
    AnalyticSpectrum(Common),
    /// LLE against analytic spectra, with CSV and SVG reports.
    Compare(Common),
    /// Truncated pairing functional near the degenerate point.
    AppendixDemo(Demo),
    /// Run the invariant suites; nonzero exit if any fails.
    Verify,
}

#[derive(Debug, Args)]
struct Common {
    /// interval or disc
    #[arg(long)]
    domain: Option<String>,
    #[arg(long)]
    epsilon: Option<f64>,
    /// Interval point counts, comma separated.
    #[arg(long)]
    n: Option<String>,
    /// Disc lattice sides, comma separated.
    #[arg(long)]
    m: Option<String>,
    /// Number of eigenvalues.
    #[arg(long)]
    k: Option<usize>,
    /// dense, symmetrized or sparse
    #[arg(long)]
    mode: Option<String>,
    /// neumann or dirichlet
    #[arg(long)]
    kind: Option<String>,
    #[arg(long)]
    nu_max: Option<u32>,
    #[arg(long)]
    lambda_max: Option<f64>,
    /// Output directory; without it results go to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    allow_subcritical: bool,
    /// Overrides the default LLE regularizer.
    #[arg(long)]
    regularizer: Option<f64>,
    /// Also write aligned eigenvectors (compare only).
    #[arg(long)]
    vectors: bool,
    /// `key = value` file; flags given here win.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct Demo {
    /// Mix angle between the Neumann and Dirichlet solutions.
    #[arg(long, default_value_t = 0.0)]
    beta: f64,
    /// Derivative order, at least 3.
    #[arg(long, default_value_t = 3)]
    order: u32,
    /// Power of the model coefficient.
    #[arg(long, default_value_t = 0.0)]
    exponent: f64,
    #[arg(long, default_value_t = 0.05)]
    epsilon: f64,
    /// Defaults to the first positive Neumann eigenvalue.
    #[arg(long)]
    lambda: Option<f64>,
    /// Decreasing cutoffs, comma separated.
    #[arg(long, default_value = "1e-3,1e-4,1e-5,1e-6")]
    deltas: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

impl Common {
    /// Config file first, then flags on top.
    fn config(&self) -> Result<(ExperimentConfig, bool)> {
        let mut map = match &self.config {
            Some(p) => parse_config(&std::fs::read_to_string(p)?)?,
            None => Default::default(),
        };
        let mut set = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                map.insert(k.to_string(), v);
            }
        };
        set("domain", self.domain.clone());
        set("epsilon", self.epsilon.map(|v| v.to_string()));
        set("k", self.k.map(|v| v.to_string()));
        set("mode", self.mode.clone());
        set("kind", self.kind.clone());
        set("nu_max", self.nu_max.map(|v| v.to_string()));
        set("lambda_max", self.lambda_max.map(|v| v.to_string()));
        set("out", self.out.as_ref().map(|p| p.display().to_string()));
        set("seed", self.seed.map(|v| v.to_string()));
        set("regularizer", self.regularizer.map(|v| v.to_string()));
        if self.allow_subcritical {
            set("allow_subcritical", Some("true".into()));
        }
        if self.vectors {
            set("vectors", Some("true".into()));
        }
        if map.contains_key("epsilon") {
            map.remove("eps");
        }
        let mut cfg = ExperimentConfig::from_map(&map)?;
        match (&self.n, &self.m, cfg.domain) {
            (Some(_), _, Domain::Disc) => return Err(HarnessError::Config("--n is for the interval; use --m".into())),
            (_, Some(_), Domain::Interval) => return Err(HarnessError::Config("--m is for the disc; use --n".into())),
            (Some(v), _, _) | (_, Some(v), _) => cfg.apply("n", v)?,
            _ => {}
        }
        Ok((cfg, map.contains_key("out")))
    }
}

fn emit(out: Option<&ExperimentConfig>, name: &str, text: &str) -> Result<()> {
    match out {
        Some(cfg) => {
            let mut dir = OutputDir::create(&cfg.out)?;
            let path = dir.write_text(name, text)?;
            eprintln!("wrote {}", path.display());
        }
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn single_size(cfg: &ExperimentConfig) -> Result<usize> {
    match cfg.sizes().as_slice() {
        [s] => Ok(*s),
        _ => Err(HarnessError::Config(format!("give a single --{}", cfg.size_name()))),
    }
}

fn dispatch(cmd: Command) -> Result<i32> {
    let exec = Execution::default();
    match cmd {
        Command::Sample(c) => {
            let (cfg, to_dir) = c.config()?;
            cfg.validate()?;
            let cloud = cfg.cloud(single_size(&cfg)?)?;
            let header: &[&str] = match cfg.domain {
                Domain::Interval => &["x"],
                Domain::Disc => &["x", "y"],
            };
            let rows: Vec<Vec<String>> = cloud.points().map(|p| p.iter().map(|v| num(*v)).collect()).collect();
            emit(to_dir.then_some(&cfg), "points.csv", &csv_string(header, &rows)?)?;
        }
        Command::BuildW(c) => {
            let (cfg, to_dir) = c.config()?;
            cfg.validate()?;
            let cloud = cfg.cloud(single_size(&cfg)?)?;
            let nbrs = neighborhoods_with(&cloud, cfg.eps, exec).stage("neighborhoods")?;
            let w = build_w_with(&cloud, &nbrs, cfg.regularizer, exec).stage("build_w")?;
            let mut buf = Vec::new();
            w.write_triplets(&mut buf)?;
            emit(to_dir.then_some(&cfg), "w.txt", &String::from_utf8(buf).expect("ascii triplets"))?;
        }
        Command::LleSpectrum(c) => {
            let (cfg, to_dir) = c.config()?;
            cfg.validate()?;
            let mut rows = Vec::new();
            for size in cfg.sizes() {
                let cloud = cfg.cloud(size)?;
                let nbrs = neighborhoods_with(&cloud, cfg.eps, exec).stage("neighborhoods")?;
                let w = build_w_with(&cloud, &nbrs, cfg.regularizer, exec).stage("build_w")?;
                let opts = SpectrumOptions { mode: cfg.mode, seed: cfg.seed, ..Default::default() };
                let res = spectrum_lle_with(&w, cfg.k(), &opts).stage("spectrum")?;
                for (j, (l, im)) in res.eigenvalues.iter().zip(&res.imaginary).enumerate() {
                    rows.push(vec![size.to_string(), (j + 1).to_string(), num(*l), num(*im)]);
                }
            }
            let text = csv_string(&["size", "j", "lambda", "imaginary"], &rows)?;
            emit(to_dir.then_some(&cfg), "lle_spectrum.csv", &text)?;
        }
        Command::AnalyticSpectrum(c) => {
            let (cfg, to_dir) = c.config()?;
            let solver = SpectralSolver::new(cfg.domain, cfg.eps).stage("analytic")?;
            let spectrum = match cfg.lambda_max {
                Some(lm) => solver
                    .find_eigenvalues(cfg.kind, cfg.nu_max.unwrap_or(lle_spectra::matching::DEFAULT_NU_MAX), lm, exec)
                    .stage("analytic")?,
                None => solver.lowest(cfg.kind, cfg.k(), exec).stage("analytic")?,
            };
            if let Some(w) = &spectrum.warning {
                eprintln!("warning: {w}");
            }
            let rows: Vec<Vec<String>> = spectrum
                .eigenvalues
                .iter()
                .take(if cfg.lambda_max.is_some() { cfg.k.unwrap_or(usize::MAX) } else { usize::MAX })
                .enumerate()
                .map(|(j, e)| {
                    vec![
                        (j + 1).to_string(),
                        num(e.lambda),
                        e.nu.to_string(),
                        e.phase.to_string(),
                        e.kind.to_string(),
                        num(e.residual),
                    ]
                })
                .collect();
            let text = csv_string(&["j", "lambda", "nu", "phase", "kind", "residual"], &rows)?;
            emit(to_dir.then_some(&cfg), "analytic_spectrum.csv", &text)?;
        }
        Command::Compare(c) => {
            let (cfg, to_dir) = c.config()?;
            let report = run_compare(&cfg)?;
            if let Some(w) = &report.warning {
                eprintln!("warning: {w}");
            }
            for r in &report.runs {
                eprintln!("{} = {}: {} points, {} in {:.2} s", cfg.size_name(), r.size, r.points, r.mode, r.seconds);
            }
            if to_dir {
                for p in write_report(&report, &cfg)? {
                    eprintln!("wrote {}", p.display());
                }
            } else {
                let text = csv_string(&REPORT_HEADER, &crate::compare::report_rows(&report))?;
                std::io::stdout().write_all(text.as_bytes())?;
            }
        }
        Command::AppendixDemo(d) => {
            let deltas: Vec<f64> = d
                .deltas
                .split(',')
                .map(|s| s.trim().parse().map_err(|_| HarnessError::Config(format!("bad cutoff `{s}`"))))
                .collect::<Result<_>>()?;
            let lambda = match d.lambda {
                Some(l) => l,
                None => {
                    let cfg = ExperimentConfig { eps: d.epsilon, k: Some(2), ..Default::default() };
                    analytic_pairs(&cfg, exec)?.0[1].lambda()
                }
            };
            let demo =
                appendix_divergence_demo(d.beta, d.order, d.exponent, d.epsilon, lambda, &deltas).stage("appendix")?;
            if !demo.within_window() {
                eprintln!("note: exponent {} is outside the window (max {:.6})", demo.exponent, demo.window);
            }
            let rows: Vec<Vec<String>> = demo
                .deltas
                .iter()
                .zip(&demo.values)
                .enumerate()
                .map(|(i, (dl, v))| {
                    let slope = if i == 0 { String::new() } else { num(demo.slopes[i - 1]) };
                    vec![num(*dl), num(*v), slope]
                })
                .collect();
            let text = csv_string(&["delta", "value", "slope"], &rows)?;
            match d.out {
                Some(out) => {
                    let cfg = ExperimentConfig { out, ..Default::default() };
                    emit(Some(&cfg), "appendix.csv", &text)?;
                }
                None => emit(None, "", &text)?,
            }
        }
        Command::Verify => {
            let checks = run_all(exec);
            let mut failed = 0;
            for c in &checks {
                println!("{} {:<40} {:>7.2}s  {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.seconds, c.detail);
                failed += usize::from(!c.passed);
            }
            println!("{} of {} suites passed", checks.len() - failed, checks.len());
            return Ok(i32::from(failed > 0));
        }
    }
    Ok(0)
}
