//! LLE spectra against the analytic spectrum, paired by sorted order.

use std::time::Instant;

use lle_spectra::frobenius::BoundaryKind;
use lle_spectra::lle::{build_w_with, spectrum_lle_with, SolverMode, SpectrumOptions};
use lle_spectra::matching::{align, AnalyticEigenpair, AnalyticEigenvalue, Phase, SpectralSolver, DEFAULT_NU_MAX};
use lle_spectra::sampling::{neighborhoods_with, supercriticality};
use lle_spectra::{Domain, Execution};

use crate::config::ExperimentConfig;
use crate::output::{num, OutputDir};
use crate::plot::{emit_plot, PlotStyle, Series};
use crate::{HarnessError, Result, Stage};

pub const REPORT_HEADER: [&str; 11] = [
    "size",
    "points",
    "j",
    "nu",
    "phase",
    "lambda_analytic",
    "lambda_lle",
    "abs_error",
    "rel_error",
    "weighted_error",
    "eigvec_sup_error",
];
pub const EIGENVALUE_HEADER: [&str; 3] = ["j", "lambda", "imaginary"];
pub const RUNS_HEADER: [&str; 9] =
    ["size", "points", "epsilon", "regularizer", "supercriticality", "asymmetry", "imag_max", "mode", "restarts"];

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub size: usize,
    pub points: usize,
    /// 1-based position in the sorted spectrum.
    pub j: usize,
    pub nu: u32,
    pub phase: Phase,
    pub lambda_analytic: f64,
    pub lambda_lle: f64,
    pub abs_error: f64,
    /// Relative error, or the absolute error for the zero eigenvalue.
    pub rel_error: f64,
    /// `|dl| lambda^-3/2` on the interval, the relative error on the disc;
    /// absolute for the zero eigenvalue.
    pub weighted_error: f64,
    pub sup_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub size: usize,
    pub points: usize,
    pub regularizer: f64,
    pub supercriticality: f64,
    pub asymmetry: f64,
    pub imag_max: f64,
    pub mode: SolverMode,
    pub restarts: usize,
    pub eigenvalues: Vec<f64>,
    pub imaginary: Vec<f64>,
    pub seconds: f64,
}

/// Sup-normalized eigenvectors on the largest grid, for `eigvec_<j>.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorTable {
    pub points: Vec<Vec<f64>>,
    pub hyperbolic: Vec<bool>,
    /// Per eigenvalue: (aligned LLE vector, analytic values).
    pub columns: Vec<(Vec<f64>, Vec<f64>)>,
}

#[derive(Debug, Clone)]
pub struct ComparisonReport {
    pub domain: Domain,
    pub eps: f64,
    pub kind: BoundaryKind,
    pub analytic: Vec<AnalyticEigenvalue>,
    pub rows: Vec<ComparisonRow>,
    pub runs: Vec<RunSummary>,
    pub vectors: Option<VectorTable>,
    pub warning: Option<String>,
    pub analytic_seconds: f64,
}

impl ComparisonReport {
    pub fn rows_for(&self, size: usize) -> impl Iterator<Item = &ComparisonRow> {
        self.rows.iter().filter(move |r| r.size == size)
    }
}

/// Analytic eigenpairs for the configuration.
pub fn analytic_pairs(cfg: &ExperimentConfig, exec: Execution) -> Result<(Vec<AnalyticEigenpair>, Option<String>)> {
    let solver = SpectralSolver::new(cfg.domain, cfg.eps).stage("analytic")?;
    let k = cfg.k();
    let mut spectrum = match cfg.lambda_max {
        Some(lm) => {
            let nu = cfg.nu_max.unwrap_or(DEFAULT_NU_MAX);
            let mut s = solver.find_eigenvalues(cfg.kind, nu, lm, exec).stage("analytic")?;
            if s.eigenvalues.len() < k && s.warning.is_none() {
                s.warning = Some(format!("only {} of {k} eigenvalues below {lm}", s.eigenvalues.len()));
            }
            s
        }
        None => solver.lowest(cfg.kind, k, exec).stage("analytic")?,
    };
    spectrum.eigenvalues.truncate(k);
    let pairs = solver.assemble_all(&spectrum.eigenvalues, exec).stage("assemble")?;
    Ok((pairs, spectrum.warning))
}

fn error_columns(domain: Domain, j: usize, an: f64, lle: f64) -> (f64, f64, f64) {
    let abs = (lle - an).abs();
    if j == 1 || an == 0.0 {
        return (abs, abs, abs);
    }
    let rel = abs / an.abs();
    let weighted = match domain {
        Domain::Interval => abs * an.abs().powf(-1.5),
        Domain::Disc => rel,
    };
    (abs, rel, weighted)
}

/// Runs sampling, `W`, the LLE spectrum and the analytic spectrum for every size.
pub fn run_compare(cfg: &ExperimentConfig) -> Result<ComparisonReport> {
    cfg.validate()?;
    let exec = Execution::default();
    let t0 = Instant::now();
    let (pairs, warning) = analytic_pairs(cfg, exec)?;
    let analytic_seconds = t0.elapsed().as_secs_f64();
    let k = pairs.len();
    if k == 0 {
        return Err(HarnessError::Invalid("no analytic eigenvalues in range".into()));
    }
    let mut rows = Vec::new();
    let mut runs = Vec::new();
    let mut vectors = None;
    let sizes = cfg.sizes();
    let largest = *sizes.iter().max().expect("at least one size");
    for &size in &sizes {
        let t = Instant::now();
        let cloud = cfg.cloud(size)?;
        let nbrs = neighborhoods_with(&cloud, cfg.eps, exec).stage("neighborhoods")?;
        let w = build_w_with(&cloud, &nbrs, cfg.regularizer, exec).stage("build_w")?;
        let opts = SpectrumOptions { mode: cfg.mode, vectors: true, seed: cfg.seed, ..Default::default() };
        let res = spectrum_lle_with(&w, k, &opts).stage("spectrum")?;
        let seconds = t.elapsed().as_secs_f64();
        let points: Vec<Vec<f64>> = cloud.points().map(|p| p.to_vec()).collect();
        let vecs = res.eigenvectors.as_ref().expect("vectors requested");

        let order = pair_order(&pairs, &points, vecs)?;
        let mut aligned_cols = Vec::new();
        for (idx, pair) in pairs.iter().enumerate() {
            let li = order[idx];
            let f = &pair.eigenfunction;
            let a = align(f, &points, &vecs[li]).stage("align")?;
            let j = idx + 1;
            let an = pair.lambda();
            let lle = res.eigenvalues[li];
            let (abs_error, rel_error, weighted_error) = error_columns(cfg.domain, j, an, lle);
            rows.push(ComparisonRow {
                size,
                points: cloud.len(),
                j,
                nu: pair.eigenvalue.nu,
                phase: pair.eigenvalue.phase,
                lambda_analytic: an,
                lambda_lle: lle,
                abs_error,
                rel_error,
                weighted_error,
                sup_error: a.sup_error,
            });
            if cfg.vectors && size == largest {
                aligned_cols.push(aligned_columns(pair, &points, &vecs[li], a.sign, a.rotation)?);
            }
        }
        if cfg.vectors && size == largest {
            let hyperbolic = points.iter().map(|p| pairs[0].eigenfunction.is_hyperbolic(p)).collect();
            vectors = Some(VectorTable { points: points.clone(), hyperbolic, columns: aligned_cols });
        }
        runs.push(RunSummary {
            size,
            points: cloud.len(),
            regularizer: w.regularizer(),
            supercriticality: supercriticality(cloud.len(), cfg.eps, cfg.domain.dim()),
            asymmetry: res.asymmetry,
            imag_max: res.imag_max,
            mode: res.mode,
            restarts: res.restarts,
            eigenvalues: res.eigenvalues.clone(),
            imaginary: res.imaginary.clone(),
            seconds,
        });
    }
    Ok(ComparisonReport {
        domain: cfg.domain,
        eps: cfg.eps,
        kind: cfg.kind,
        analytic: pairs.iter().map(|p| p.eigenvalue).collect(),
        rows,
        runs,
        vectors,
        warning,
        analytic_seconds,
    })
}

/// LLE index for each analytic index: sorted order, except that the two
/// members of a degenerate disc pair take whichever assignment has the
/// smaller combined alignment error.
fn pair_order(pairs: &[AnalyticEigenpair], points: &[Vec<f64>], vecs: &[Vec<f64>]) -> Result<Vec<usize>> {
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    let mut i = 0;
    while i + 1 < pairs.len() {
        let (a, b) = (&pairs[i].eigenvalue, &pairs[i + 1].eigenvalue);
        if a.nu > 0 && a.nu == b.nu && a.lambda == b.lambda {
            let err = |p: usize, v: usize| align(&pairs[p].eigenfunction, points, &vecs[v]).map(|x| x.sup_error);
            let straight = err(i, i).stage("align")? + err(i + 1, i + 1).stage("align")?;
            let swapped = err(i, i + 1).stage("align")? + err(i + 1, i).stage("align")?;
            if swapped < straight {
                order.swap(i, i + 1);
            }
            i += 2;
        } else {
            i += 1;
        }
    }
    Ok(order)
}

fn aligned_columns(
    pair: &AnalyticEigenpair,
    points: &[Vec<f64>],
    v: &[f64],
    sign: f64,
    rotation: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let f = &pair.eigenfunction;
    let nu = f.nu() as f64;
    let an: Vec<f64> = points
        .iter()
        .map(|p| {
            if f.domain() == Domain::Disc && f.nu() > 0 {
                let (r, t) = (p[0].hypot(p[1]).min(1.0), p[1].atan2(p[0]));
                f.profile(r).map(|u| u.0 * (nu * (t - rotation)).cos())
            } else {
                f.value(p)
            }
        })
        .collect::<lle_spectra::Result<_>>()
        .stage("align")?;
    let amax = an.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let vmax = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let an = an.iter().map(|x| sign * x / amax).collect();
    let v = v.iter().map(|x| x / vmax).collect();
    Ok((v, an))
}

pub fn report_rows(report: &ComparisonReport) -> Vec<Vec<String>> {
    report
        .rows
        .iter()
        .map(|r| {
            vec![
                r.size.to_string(),
                r.points.to_string(),
                r.j.to_string(),
                r.nu.to_string(),
                r.phase.to_string(),
                num(r.lambda_analytic),
                num(r.lambda_lle),
                num(r.abs_error),
                num(r.rel_error),
                num(r.weighted_error),
                num(r.sup_error),
            ]
        })
        .collect()
}

fn plots(report: &ComparisonReport) -> Result<(String, String)> {
    let mut conv = vec![Series::new(
        "analytic",
        report.analytic.iter().enumerate().map(|(i, e)| ((i + 1) as f64, e.lambda)).collect(),
    )];
    let mut errs = Vec::new();
    for run in &report.runs {
        let rows: Vec<&ComparisonRow> = report.rows_for(run.size).collect();
        conv.push(Series::new(format!("size {}", run.size), rows.iter().map(|r| (r.j as f64, r.lambda_lle)).collect()));
        let pts: Vec<(f64, f64)> =
            rows.iter().filter(|r| r.j > 1 && r.weighted_error > 0.0).map(|r| (r.j as f64, r.weighted_error)).collect();
        if !pts.is_empty() {
            errs.push(Series::new(format!("size {}", run.size), pts));
        }
    }
    let conv_svg = emit_plot(
        &conv,
        &PlotStyle {
            title: format!("{} eigenvalues, eps = {}", report.domain, report.eps),
            x_label: "j".into(),
            y_label: "lambda_j".into(),
            ..Default::default()
        },
    )?;
    let err_label = match report.domain {
        Domain::Interval => "|dl| lambda^-3/2",
        Domain::Disc => "relative error",
    };
    let err_svg = if errs.is_empty() {
        emit_plot(&[Series::new("none", vec![(1.0, 1.0)])], &PlotStyle::default())?
    } else {
        emit_plot(
            &errs,
            &PlotStyle {
                title: format!("{} eigenvalue errors, eps = {}", report.domain, report.eps),
                x_label: "j".into(),
                y_label: err_label.into(),
                log_y: true,
                ..Default::default()
            },
        )?
    };
    Ok((conv_svg, err_svg))
}

fn write_all(report: &ComparisonReport, out: &mut OutputDir) -> Result<()> {
    out.write_csv("report.csv", &REPORT_HEADER, &report_rows(report))?;
    let mut runs = Vec::new();
    for run in &report.runs {
        let rows: Vec<Vec<String>> = run
            .eigenvalues
            .iter()
            .zip(&run.imaginary)
            .enumerate()
            .map(|(i, (l, im))| vec![(i + 1).to_string(), num(*l), num(*im)])
            .collect();
        out.write_csv(&format!("eigenvalues_{}.csv", run.size), &EIGENVALUE_HEADER, &rows)?;
        runs.push(vec![
            run.size.to_string(),
            run.points.to_string(),
            num(report.eps),
            num(run.regularizer),
            num(run.supercriticality),
            num(run.asymmetry),
            num(run.imag_max),
            run.mode.to_string(),
            run.restarts.to_string(),
        ]);
    }
    out.write_csv("runs.csv", &RUNS_HEADER, &runs)?;
    if let Some(v) = &report.vectors {
        let coords: &[&str] = match report.domain {
            Domain::Interval => &["x"],
            Domain::Disc => &["x", "y"],
        };
        let mut header: Vec<&str> = coords.to_vec();
        header.extend(["hyperbolic", "lle", "analytic"]);
        for (j, (lle, an)) in v.columns.iter().enumerate() {
            let rows: Vec<Vec<String>> = v
                .points
                .iter()
                .enumerate()
                .map(|(i, p)| {
                    let mut r: Vec<String> = p.iter().map(|c| num(*c)).collect();
                    r.push(u8::from(v.hyperbolic[i]).to_string());
                    r.push(num(lle[i]));
                    r.push(num(an[i]));
                    r
                })
                .collect();
            out.write_csv(&format!("eigvec_{}.csv", j + 1), &header, &rows)?;
        }
    }
    let (conv, err) = plots(report)?;
    out.write_text("convergence.svg", &conv)?;
    out.write_text("errors.svg", &err)?;
    let mut timing = format!("analytic {:.3}\n", report.analytic_seconds);
    for run in &report.runs {
        timing.push_str(&format!("{} {:.3}\n", run.size, run.seconds));
    }
    out.write_text("timing.txt", &timing)?;
    Ok(())
}

/// Writes the report files; on failure everything written is removed again.
pub fn write_report(report: &ComparisonReport, cfg: &ExperimentConfig) -> Result<Vec<std::path::PathBuf>> {
    let mut out = OutputDir::create(&cfg.out)?;
    match write_all(report, &mut out) {
        Ok(()) => Ok(out.written().to_vec()),
        Err(e) => {
            out.discard();
            Err(e)
        }
    }
}
