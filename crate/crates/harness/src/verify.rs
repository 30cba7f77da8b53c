//! Invariant suites run by `lle-harness verify`.

use std::time::Instant;

use lle_spectra::bessel::bessel_sequence;
use lle_spectra::coefficients::{
    phi_disc, phi_interval, taylor_jet, CoefficientModel, CoefficientSelector, DiscModel, IntervalModel,
};
use lle_spectra::frobenius::{BoundaryKind, LayerSolver};
use lle_spectra::lle::build_w_with;
use lle_spectra::matching::{rayleigh_quotient, SpectralSolver, SCAN_STEP};
use lle_spectra::sampling::{grid_disc, grid_interval, neighborhoods_brute_force, neighborhoods_with, PointCloud};
use lle_spectra::{Domain, Execution};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

type Outcome = lle_spectra::Result<(bool, String)>;

fn check(name: &'static str, f: impl FnOnce() -> Outcome) -> Check {
    let t = Instant::now();
    let (passed, detail) = match f() {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    Check { name, passed, detail, seconds: t.elapsed().as_secs_f64() }
}

fn clouds() -> lle_spectra::Result<Vec<(PointCloud, f64)>> {
    Ok(vec![(grid_interval(600)?, 0.05), (grid_disc(61)?, 0.1)])
}

fn neighborhoods_check(exec: Execution) -> Outcome {
    let mut worst = 0.0f64;
    for (cloud, eps) in clouds()? {
        let fast = neighborhoods_with(&cloud, eps, exec)?;
        if !fast.is_symmetric() {
            return Ok((false, format!("{} neighborhoods not symmetric", cloud.domain())));
        }
        if fast != neighborhoods_brute_force(&cloud, eps)? {
            return Ok((false, format!("{} grid search differs from brute force", cloud.domain())));
        }
        for i in 0..cloud.len() {
            for &j in fast.neighbors(i) {
                let d: f64 =
                    cloud.point(i).iter().zip(cloud.point(j)).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                worst = worst.max(d / eps);
            }
        }
    }
    Ok((worst <= 1.0, format!("max distance / eps = {worst:.6}")))
}

fn stochastic_check(exec: Execution) -> Outcome {
    let (mut rows, mut kernel) = (0.0f64, 0.0f64);
    for (cloud, eps) in clouds()? {
        let nbrs = neighborhoods_with(&cloud, eps, exec)?;
        let w = build_w_with(&cloud, &nbrs, None, exec)?;
        rows = rows.max(w.row_sum_defect());
        kernel = kernel.max(w.kernel_residual());
    }
    Ok((rows < 1e-10 && kernel < 1e-12, format!("row-sum defect {rows:.3e}, kernel residual {kernel:.3e}")))
}

fn branch_check() -> Outcome {
    let mut worst = 0.0f64;
    for eps in [0.01, 0.05, 0.1] {
        let m = IntervalModel::new(eps)?;
        for x in [eps, 1.0 - eps] {
            let h = 1e-13;
            let (a, b) = (phi_interval(x - h, eps), phi_interval(x + h, eps));
            worst = worst.max((a.0 - b.0).abs()).max((a.1 - b.1).abs());
            worst = worst.max((m.p(x - h) - m.p(x + h)).abs());
        }
        let d = DiscModel::new(eps)?;
        let below = d.p_offset(eps - d.r0() - 1e-13)?;
        let above = d.p_offset(eps - d.r0())?;
        worst = worst.max((below - above).abs() / above.abs());
    }
    Ok((worst < 1e-9, format!("max jump {worst:.3e}")))
}

fn symmetry_check() -> Outcome {
    let eps = 0.05;
    let m = IntervalModel::new(eps)?;
    let mut worst = 0.0f64;
    for i in 0..=1000 {
        let x = i as f64 / 1000.0;
        let (a, b) = (phi_interval(x, eps), phi_interval(1.0 - x, eps));
        worst = worst.max((a.1 - b.1).abs()).max((a.0 + b.0).abs());
        if (x - m.x0()).abs() > 1e-9 && (1.0 - x - m.x0()).abs() > 1e-9 {
            worst = worst.max((m.p(x) - m.p(1.0 - x)).abs());
        }
    }
    Ok((worst < 1e-14, format!("max asymmetry {worst:.3e}")))
}

fn jet_check() -> Outcome {
    let eps = 0.05;
    let d = DiscModel::new(eps)?;
    let mut worst = 0.0f64;
    for center in [d.r0(), 0.5 * eps, 0.2 * eps] {
        let jet = taylor_jet(CoefficientSelector::Phi22, center, eps, 8)?;
        let h = 1e-5 * eps;
        let f = |k: f64| phi_disc(center + k * h, eps).map(|v| v.1);
        let (fm, f0, fp) = (f(-1.0)?, f(0.0)?, f(1.0)?);
        worst = worst.max((jet.value() - f0).abs() / f0.abs().max(1e-300).max(1.0));
        let d1 = (fp - fm) / (2.0 * h);
        let d2 = (fp - 2.0 * f0 + fm) / (h * h);
        worst = worst.max((jet.derivative(1) - d1).abs() / d1.abs());
        worst = worst.max((jet.derivative(2) - d2).abs() / d2.abs());
    }
    Ok((worst < 1e-4, format!("max relative difference {worst:.3e}")))
}

fn bessel_check() -> Outcome {
    let mut worst = 0.0f64;
    for nu in 1..=20u32 {
        for i in 0..=200 {
            let x = 0.1 + i as f64 * (49.9 / 200.0);
            let s = bessel_sequence(nu + 1, x);
            let n = nu as usize;
            worst = worst.max((s[n - 1] + s[n + 1] - 2.0 * nu as f64 / x * s[n]).abs());
        }
    }
    Ok((worst < 1e-11, format!("max recurrence residual {worst:.3e}")))
}

fn indicial_check() -> Outcome {
    let mut worst = 0.0f64;
    for domain in [Domain::Interval, Domain::Disc] {
        for eps in [0.01, 0.05] {
            let layer = LayerSolver::new(CoefficientModel::new(domain, eps)?, 12)?;
            let nus: &[u32] = if domain == Domain::Disc { &[0, 1, 5] } else { &[0] };
            for &nu in nus {
                for lambda in [0.5, 3.0, 20.0] {
                    worst = worst.max(layer.problem(lambda, nu)?.indicial_residual()?);
                }
            }
        }
    }
    Ok((worst < 1e-12, format!("max |P(alpha)| / |a1| = {worst:.3e}")))
}

fn secular_check(exec: Execution) -> Outcome {
    let s = SpectralSolver::new(Domain::Interval, 0.05)?;
    let spectrum = s.lowest(BoundaryKind::Neumann, 8, exec)?;
    let pairs = s.assemble_all(&spectrum.eigenvalues, exec)?;
    let (mut res, mut rq) = (0.0f64, 0.0f64);
    for p in &pairs {
        res = res.max(p.diagnostics.secular_residual.abs());
        let r = rayleigh_quotient(p)?;
        rq = rq.max((r.value - p.lambda()).abs() / p.lambda().max(1.0));
    }
    Ok((pairs.len() == 8 && res < 1e-9 && rq < 1e-5, format!("secular {res:.3e}, Rayleigh {rq:.3e}")))
}

fn dirichlet_check(exec: Execution) -> Outcome {
    let mut first = Vec::new();
    for domain in [Domain::Interval, Domain::Disc] {
        let s = SpectralSolver::new(domain, 0.05)?;
        first.push(s.lowest(BoundaryKind::Dirichlet, 1, exec)?.eigenvalues[0].lambda);
    }
    Ok((first.iter().all(|&l| l > 0.0), format!("smallest {first:?}")))
}

fn parity_check(exec: Execution) -> Outcome {
    let s = SpectralSolver::new(Domain::Interval, 0.05)?;
    let pairs = s.assemble_all(&s.lowest(BoundaryKind::Neumann, 8, exec)?.eigenvalues, exec)?;
    let mut worst = 0.0f64;
    for (j, p) in pairs.iter().enumerate() {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        for i in 0..=200 {
            let x = i as f64 / 200.0;
            let f = &p.eigenfunction;
            worst = worst.max((f.value(&[x])? - sign * f.value(&[1.0 - x])?).abs());
        }
    }
    Ok((worst < 1e-6, format!("max parity defect {worst:.3e}")))
}

fn rescan_check(exec: Execution) -> Outcome {
    let mut worst = 0.0f64;
    for (domain, nu) in [(Domain::Interval, 0), (Domain::Disc, 0), (Domain::Disc, 2)] {
        let s = SpectralSolver::new(domain, 0.05)?;
        let coarse: Vec<f64> = s.scan(nu, BoundaryKind::Neumann, 40.0, exec)?.iter().map(|r| r.0).collect();
        let fine = scan_with_step(&s, nu, 40.0, 0.5 * SCAN_STEP)?;
        if coarse.len() != fine.len() {
            return Ok((false, format!("{domain} nu={nu}: {} roots vs {}", coarse.len(), fine.len())));
        }
        for (a, b) in coarse.iter().zip(&fine) {
            worst = worst.max((a - b).abs());
        }
    }
    Ok((worst < 1e-8, format!("max root shift {worst:.3e}")))
}

/// Bracketed roots of the secular residual on a uniform grid in the frequency variable.
fn scan_with_step(s: &SpectralSolver, nu: u32, lambda_max: f64, step: f64) -> lle_spectra::Result<Vec<f64>> {
    let c = lle_spectra::matching::frequency_factor(s.domain());
    let top = (c * lambda_max).sqrt();
    let n = (top / step).ceil() as usize;
    let f = |l: f64| s.residual(l, nu, BoundaryKind::Neumann);
    let lam = |i: usize| (i as f64 * step).powi(2) / c;
    let mut roots = Vec::new();
    let mut prev = f(lam(1))?;
    for i in 2..=n {
        let cur = f(lam(i))?;
        if prev == 0.0 || prev.signum() != cur.signum() {
            let r = lle_spectra::roots::bisect(f, lam(i - 1), lam(i), prev, 1e-12)?;
            if r <= lambda_max {
                roots.push(r);
            }
        }
        prev = cur;
    }
    Ok(roots)
}

fn truncation_check() -> Outcome {
    let mut worst = 0.0f64;
    for domain in [Domain::Interval, Domain::Disc] {
        let a = LayerSolver::new(CoefficientModel::new(domain, 0.05)?, 12)?;
        let b = LayerSolver::new(CoefficientModel::new(domain, 0.05)?, 16)?;
        for kind in [BoundaryKind::Neumann, BoundaryKind::Dirichlet] {
            for lambda in [1.0, 10.0, 40.0] {
                let (u1, d1) = a.edge_values(lambda, 0, kind)?;
                let (u2, d2) = b.edge_values(lambda, 0, kind)?;
                let scale = u1.abs().max(d1.abs()).max(1.0);
                worst = worst.max((u1 - u2).abs() / scale).max((d1 - d2).abs() / scale);
            }
        }
    }
    Ok((worst < 1e-10, format!("max edge-value change {worst:.3e}")))
}

fn quasi_derivative_check(exec: Execution) -> Outcome {
    let mut detail = Vec::new();
    let mut ok = true;
    for (domain, k) in [(Domain::Interval, 8), (Domain::Disc, 6)] {
        let s = SpectralSolver::new(domain, 0.05)?;
        let pairs = s.assemble_all(&s.lowest(BoundaryKind::Neumann, k, exec)?.eigenvalues, exec)?;
        let mut worst = 0.0f64;
        for p in pairs.iter().filter(|p| p.lambda() > 0.0) {
            let q: Vec<f64> = [1e-2, 1e-4, 1e-6]
                .iter()
                .map(|&d| p.eigenfunction.quasi_derivative(d).map(f64::abs))
                .collect::<lle_spectra::Result<_>>()?;
            ok &= q.windows(2).all(|w| w[1] < w[0]);
            worst = worst.max(q[2] / q[1]);
        }
        detail.push(format!("{domain} max ratio {worst:.3}"));
    }
    Ok((ok, detail.join(", ")))
}

/// Runs every suite. Errors inside a suite count as failures.
pub fn run_all(exec: Execution) -> Vec<Check> {
    vec![
        check("neighborhood symmetry and radius", || neighborhoods_check(exec)),
        check("row-stochastic weights and kernel", || stochastic_check(exec)),
        check("coefficient branch continuity", branch_check),
        check("interval coefficient symmetry", symmetry_check),
        check("jet vs finite differences", jet_check),
        check("Bessel recurrence", bessel_check),
        check("indicial residuals", indicial_check),
        check("secular and Rayleigh agreement", || secular_check(exec)),
        check("Dirichlet smallest eigenvalue positive", || dirichlet_check(exec)),
        check("interval parity", || parity_check(exec)),
        check("half-step rescan", || rescan_check(exec)),
        check("truncation independence", truncation_check),
        check("Neumann quasi-derivative decreasing", || quasi_derivative_check(exec)),
    ]
}
