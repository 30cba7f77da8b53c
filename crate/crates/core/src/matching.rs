//! Secular equations, glued eigenfunctions and weighted quadrature for the
//! analytic spectrum.
//!
//! Away from the boundary layer the operator is a multiple of the Laplacian,
//! so an eigenfunction is a sine/cosine pair (interval) or `J_nu` (disc) glued
//! in `C^1` to the layer solution selected by [`BoundaryKind`]. The gluing
//! conditions form a small linear system whose determinant is the secular
//! residual.

use std::f64::consts::PI;
use std::sync::Arc;

use faer::Mat;

use crate::bessel::bessel_j;
use crate::coefficients::{CoefficientModel, IntervalModel, SQRT3};
use crate::error::{invalid, Error, Result};
use crate::exec::{map_range, try_map_range, Execution};
use crate::frobenius::{BoundaryKind, LayerSolution, LayerSolver, DEFAULT_TRUNCATION};
use crate::quadrature::{tanh_sinh_rule, CompositeGauss};
use crate::roots::{bisect, sign_changes};
use crate::Domain;

/// Scan step in the frequency variable `s = sqrt(c lambda)`.
pub const SCAN_STEP: f64 = 0.02;
pub const DEFAULT_NU_MAX: u32 = 12;
pub const DEFAULT_LAMBDA_MAX: f64 = 60.0;
/// Rotations tried when aligning a disc eigenfunction with a sampled vector.
pub const ALIGN_ROTATIONS: usize = 720;

const LAYER_STEP: f64 = 1.0 / 32.0;
const BULK_PANELS: usize = 48;
const BULK_ORDER: usize = 16;
const SINGULAR_RATIO_MAX: f64 = 1e-7;
const MIN_NORM: f64 = 1e-8;
const QUAD_TOL: f64 = 1e-8;
const DEDUP_TOL: f64 = 1e-9;

/// `c` in `s = sqrt(c lambda)`: 6 on the interval, 8 on the disc.
pub fn frequency_factor(domain: Domain) -> f64 {
    match domain {
        Domain::Interval => 6.0,
        Domain::Disc => 8.0,
    }
}

/// Limiting secular residual on the interval as `eps -> 0`.
pub fn est1_residual(lambda: f64) -> f64 {
    let s = (6.0 * lambda).sqrt();
    s.sin() * ((21.0 - 12.0 * SQRT3) * lambda - 6.0) + 2.0 * s * (3.0 - 2.0 * SQRT3) * s.cos()
}

/// Roots of [`est1_residual`] up to `lambda_max`, starting with 0.
pub fn est1_roots(lambda_max: f64, step: f64) -> Vec<f64> {
    let n = ((6.0 * lambda_max).sqrt() / step).ceil() as usize;
    let lams: Vec<f64> = (1..=n).map(|i| (i as f64 * step).powi(2) / 6.0).collect();
    let vals: Vec<f64> = lams.iter().map(|&l| est1_residual(l)).collect();
    let mut out = vec![0.0];
    for i in sign_changes(&vals) {
        let r = bisect(|l| Ok(est1_residual(l)), lams[i], lams[i + 1], vals[i], 0.0).unwrap_or(lams[i]);
        if r <= lambda_max {
            out.push(r);
        }
    }
    out
}

/// Angular factor of a disc eigenfunction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Phase {
    /// No angular dependence (`nu = 0`, and every interval eigenfunction).
    Constant,
    Cos,
    Sin,
}

impl Phase {
    fn factor(self, nu: u32, theta: f64) -> f64 {
        match self {
            Phase::Constant => 1.0,
            Phase::Cos => (nu as f64 * theta).cos(),
            Phase::Sin => (nu as f64 * theta).sin(),
        }
    }
}

impl std::fmt::Display for Phase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Phase::Constant => "const",
            Phase::Cos => "cos",
            Phase::Sin => "sin",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticEigenvalue {
    pub lambda: f64,
    pub nu: u32,
    pub kind: BoundaryKind,
    pub phase: Phase,
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct AnalyticSpectrum {
    pub eigenvalues: Vec<AnalyticEigenvalue>,
    pub lambda_max: f64,
    pub warning: Option<String>,
}

impl AnalyticSpectrum {
    pub fn lambdas(&self) -> Vec<f64> {
        self.eigenvalues.iter().map(|e| e.lambda).collect()
    }
}

#[derive(Debug, Clone, Copy)]
enum Site {
    /// Left interval layer, offset from `x0`.
    Left(f64),
    Middle(f64),
    /// Right interval layer, offset from `1 - x0` toward the center.
    Right(f64),
    Interior(f64),
    /// Disc layer, depth offset from `r0`.
    Layer(f64),
}

#[derive(Debug, Clone, Copy)]
struct Node {
    site: Site,
    weight: f64,
    coarse: f64,
    p: f64,
    q: f64,
    w: f64,
}

/// Quadrature nodes over the elliptic region with the Sturm–Liouville
/// coefficients cached at each node.
#[derive(Debug, Clone)]
pub struct WeightedGrid {
    domain: Domain,
    nodes: Vec<Node>,
}

impl WeightedGrid {
    fn new(model: &CoefficientModel, edge: f64) -> Result<Self> {
        let rule = tanh_sinh_rule(0.0, edge, LAYER_STEP);
        let coarse = |index: i64, weight: f64| if index % 2 == 0 { 2.0 * weight } else { 0.0 };
        let mut nodes = Vec::new();
        match model {
            CoefficientModel::Interval(m) => {
                for n in &rule {
                    let (p, w) = (m.p_offset(n.x), m.w_offset(n.x)?);
                    let c = coarse(n.index, n.weight);
                    for site in [Site::Left(n.x), Site::Right(n.x)] {
                        nodes.push(Node { site, weight: n.weight, coarse: c, p, q: 0.0, w });
                    }
                }
                let eps = m.eps();
                let g = CompositeGauss::new(eps, 1.0 - eps, BULK_PANELS, BULK_ORDER);
                for (&x, &wt) in g.nodes().iter().zip(g.weights()) {
                    nodes.push(Node { site: Site::Middle(x), weight: wt, coarse: wt, p: 1.0 / 6.0, q: 0.0, w: 1.0 });
                }
            }
            CoefficientModel::Disc(m) => {
                for n in &rule {
                    let (p, q, w) = m.sturm_liouville_offset(n.x)?;
                    let c = coarse(n.index, n.weight);
                    nodes.push(Node { site: Site::Layer(n.x), weight: n.weight, coarse: c, p, q, w });
                }
                let g = CompositeGauss::new(0.0, 1.0 - m.eps(), BULK_PANELS, BULK_ORDER);
                for (&r, &wt) in g.nodes().iter().zip(g.weights()) {
                    nodes.push(Node {
                        site: Site::Interior(r),
                        weight: wt,
                        coarse: wt,
                        p: r / 8.0,
                        q: -1.0 / (8.0 * r),
                        w: r,
                    });
                }
            }
        }
        Ok(WeightedGrid { domain: model.domain(), nodes })
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `int w` over the elliptic region (radial part only on the disc).
    pub fn total_weight(&self) -> f64 {
        self.nodes.iter().map(|n| n.weight * n.w).sum()
    }
}

/// Glued eigenfunction.
///
/// Interval: `c_L u_L(x - x0)` on the left layer, `A sin(s(x-eps)) + B cos(s(x-eps))`
/// in the middle, `c_R u_L(1 - x - x0)` on the right layer. Disc:
/// `s_I J_nu(k r)` inside, `s_O u_O(1 - r - r0)` in the layer, times the
/// angular factor.
#[derive(Debug, Clone)]
pub struct Eigenfunction {
    domain: Domain,
    eps: f64,
    center: f64,
    lambda: f64,
    nu: u32,
    phase: Phase,
    freq: f64,
    layer: LayerSolution,
    coeffs: Vec<f64>,
    grid: Arc<WeightedGrid>,
}

impl Eigenfunction {
    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn nu(&self) -> u32 {
        self.nu
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn kind(&self) -> BoundaryKind {
        self.layer.kind()
    }

    /// `[c_L, A, B, c_R]` on the interval, `[s_I, s_O]` on the disc.
    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    /// `int |Y|^2` over the circle for the angular factor `Y`.
    pub fn angular_norm(&self) -> f64 {
        match (self.domain, self.phase) {
            (Domain::Interval, _) => 1.0,
            (Domain::Disc, Phase::Constant) => 2.0 * PI,
            (Domain::Disc, _) => PI,
        }
    }

    fn layer_eval(&self, tau: f64) -> Result<(f64, f64)> {
        if tau < 0.0 && self.kind() == BoundaryKind::Dirichlet {
            return Ok((0.0, 0.0));
        }
        Ok((self.layer.eval(tau, 0)?, self.layer.eval(tau, 1)?))
    }

    /// Value and derivative at a quadrature site; layer derivatives are in the offset.
    fn at_site(&self, site: Site) -> Result<(f64, f64)> {
        let c = &self.coeffs;
        match site {
            Site::Left(t) => {
                let (u, du) = self.layer_eval(t)?;
                Ok((c[0] * u, c[0] * du))
            }
            Site::Right(t) => {
                let (u, du) = self.layer_eval(t)?;
                Ok((c[3] * u, c[3] * du))
            }
            Site::Middle(x) => {
                let (sn, cs) = (self.freq * (x - self.eps)).sin_cos();
                Ok((c[1] * sn + c[2] * cs, self.freq * (c[1] * cs - c[2] * sn)))
            }
            Site::Interior(r) => {
                let (j, dj) = bessel_j(self.nu, self.freq * r)?;
                Ok((c[0] * j, c[0] * self.freq * dj))
            }
            Site::Layer(t) => {
                let (u, du) = self.layer_eval(t)?;
                Ok((c[1] * u, c[1] * du))
            }
        }
    }

    /// Value and derivative in `x` (interval) or of the radial profile in `r` (disc).
    /// On the hyperbolic side the Neumann solution is continued through the
    /// degenerate point; the Dirichlet solution is clipped to zero there.
    pub fn profile(&self, x: f64) -> Result<(f64, f64)> {
        match self.domain {
            Domain::Interval => {
                if !(0.0..=1.0).contains(&x) {
                    return Err(Error::DomainError(format!("x = {x} outside [0, 1]")));
                }
                if x <= self.eps {
                    self.at_site(Site::Left(x - self.center))
                } else if x >= 1.0 - self.eps {
                    let (u, du) = self.at_site(Site::Right(1.0 - x - self.center))?;
                    Ok((u, -du))
                } else {
                    self.at_site(Site::Middle(x))
                }
            }
            Domain::Disc => {
                if !(0.0..=1.0).contains(&x) {
                    return Err(Error::DomainError(format!("r = {x} outside [0, 1]")));
                }
                if x <= 1.0 - self.eps {
                    self.at_site(Site::Interior(x))
                } else {
                    let (u, du) = self.at_site(Site::Layer(1.0 - x - self.center))?;
                    Ok((u, -du))
                }
            }
        }
    }

    /// Value at a point of the domain (`[x]` or `[x, y]`).
    pub fn value(&self, point: &[f64]) -> Result<f64> {
        match self.domain {
            Domain::Interval => Ok(self.profile(point[0])?.0),
            Domain::Disc => {
                let r = point[0].hypot(point[1]).min(1.0);
                let theta = point[1].atan2(point[0]);
                Ok(self.profile(r)?.0 * self.phase.factor(self.nu, theta))
            }
        }
    }

    /// Whether `point` lies in the hyperbolic region.
    pub fn is_hyperbolic(&self, point: &[f64]) -> bool {
        match self.domain {
            Domain::Interval => point[0] < self.center || point[0] > 1.0 - self.center,
            Domain::Disc => point[0].hypot(point[1]) > 1.0 - self.center,
        }
    }

    /// `p u'` at `offset` from the degenerate point on the elliptic side
    /// (left end on the interval), derivative in `x` or `r`.
    pub fn quasi_derivative(&self, offset: f64) -> Result<f64> {
        let c = match self.domain {
            Domain::Interval => self.coeffs[0],
            Domain::Disc => self.coeffs[1],
        };
        Ok(c * self.layer.quasi_derivative(offset)?)
    }

    fn samples(&self) -> Result<Vec<(f64, f64)>> {
        self.grid.nodes.iter().map(|n| self.at_site(n.site)).collect()
    }

    fn radial_norm2(&self) -> Result<f64> {
        let s = self.samples()?;
        Ok(self.grid.nodes.iter().zip(&s).map(|(n, (u, _))| n.weight * n.w * u * u).sum())
    }

    fn scale(&mut self, f: f64) {
        self.coeffs.iter_mut().for_each(|c| *c *= f);
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagnostics {
    pub secular_residual: f64,
    /// Smallest over largest singular value of the matching matrix.
    pub singular_ratio: f64,
    /// Largest value jump at the glue points, after normalization.
    pub c0_mismatch: f64,
    /// Largest derivative jump at the glue points, after normalization.
    pub c1_mismatch: f64,
    /// Weighted norm of the null vector's function before normalization.
    pub norm_before: f64,
}

#[derive(Debug, Clone)]
pub struct AnalyticEigenpair {
    pub eigenvalue: AnalyticEigenvalue,
    pub eigenfunction: Eigenfunction,
    pub diagnostics: Diagnostics,
}

impl AnalyticEigenpair {
    pub fn lambda(&self) -> f64 {
        self.eigenvalue.lambda
    }
}

/// Layer solver and quadrature grid for one domain, `eps` and truncation.
#[derive(Debug, Clone)]
pub struct SpectralSolver {
    layer: LayerSolver,
    grid: Arc<WeightedGrid>,
}

impl SpectralSolver {
    pub fn new(domain: Domain, eps: f64) -> Result<Self> {
        Self::with_truncation(domain, eps, DEFAULT_TRUNCATION)
    }

    pub fn with_truncation(domain: Domain, eps: f64, truncation: usize) -> Result<Self> {
        Self::from_model(CoefficientModel::new(domain, eps)?, truncation)
    }

    pub fn from_model(model: CoefficientModel, truncation: usize) -> Result<Self> {
        let layer = LayerSolver::new(model, truncation)?;
        let grid = Arc::new(WeightedGrid::new(layer.model(), layer.edge_offset())?);
        Ok(SpectralSolver { layer, grid })
    }

    pub fn domain(&self) -> Domain {
        self.layer.model().domain()
    }

    pub fn eps(&self) -> f64 {
        self.layer.model().eps()
    }

    pub fn layer(&self) -> &LayerSolver {
        &self.layer
    }

    pub fn grid(&self) -> &WeightedGrid {
        &self.grid
    }

    fn check_nu(&self, nu: u32) -> Result<()> {
        if self.domain() == Domain::Interval && nu != 0 {
            return invalid("the interval has no angular index");
        }
        Ok(())
    }

    fn frequency(&self, lambda: f64) -> f64 {
        (frequency_factor(self.domain()) * lambda).sqrt()
    }

    /// Edge values of the layer solution, derivative in `x` or `r`.
    fn edge(&self, lambda: f64, nu: u32, kind: BoundaryKind) -> Result<(f64, f64)> {
        let (u, du) = self.layer.edge_values(lambda, nu, kind)?;
        Ok(match self.domain() {
            Domain::Interval => (u, du),
            Domain::Disc => (u, -du),
        })
    }

    /// Secular residual; its zeros in `lambda > 0` are the eigenvalues.
    pub fn residual(&self, lambda: f64, nu: u32, kind: BoundaryKind) -> Result<f64> {
        self.check_nu(nu)?;
        if !(lambda >= 0.0) {
            return invalid(format!("lambda = {lambda} must be nonnegative"));
        }
        if lambda == 0.0 {
            return Ok(0.0);
        }
        let s = self.frequency(lambda);
        let (u, du) = self.edge(lambda, nu, kind)?;
        match self.domain() {
            Domain::Interval => {
                let (sn, cs) = (s * (1.0 - 2.0 * self.eps())).sin_cos();
                Ok(sn * (du * du - s * s * u * u) + 2.0 * s * cs * u * du)
            }
            Domain::Disc => {
                let (j, dj) = bessel_j(nu, s * (1.0 - self.eps()))?;
                Ok(j * du - s * dj * u)
            }
        }
    }

    /// Gluing conditions as a matrix acting on the coefficient vector of
    /// [`Eigenfunction::coefficients`].
    pub fn matching_matrix(&self, lambda: f64, nu: u32, kind: BoundaryKind) -> Result<Mat<f64>> {
        self.check_nu(nu)?;
        let s = self.frequency(lambda);
        let (u, du) = self.edge(lambda, nu, kind)?;
        Ok(match self.domain() {
            Domain::Interval => {
                let (sn, cs) = (s * (1.0 - 2.0 * self.eps())).sin_cos();
                let rows = [[u, 0.0, -1.0, 0.0], [du, -s, 0.0, 0.0], [0.0, sn, cs, -u], [0.0, s * cs, -s * sn, du]];
                Mat::from_fn(4, 4, |i, j| rows[i][j])
            }
            Domain::Disc => {
                let (j, dj) = bessel_j(nu, s * (1.0 - self.eps()))?;
                let rows = [[j, -u], [s * dj, -du]];
                Mat::from_fn(2, 2, |i, k| rows[i][k])
            }
        })
    }

    /// Roots of the residual for one `nu` in `(0, lambda_max]`.
    pub fn scan(&self, nu: u32, kind: BoundaryKind, lambda_max: f64, exec: Execution) -> Result<Vec<(f64, f64)>> {
        self.check_nu(nu)?;
        let c = frequency_factor(self.domain());
        let n = ((c * lambda_max).sqrt() / SCAN_STEP).ceil() as usize;
        let lams: Vec<f64> = (1..=n).map(|i| (i as f64 * SCAN_STEP).powi(2) / c).collect();
        let vals = try_map_range(exec, n, |i| self.residual(lams[i], nu, kind))?;
        let brackets = sign_changes(&vals);
        let roots = try_map_range(exec, brackets.len(), |b| {
            let i = brackets[b];
            let lam = if vals[i + 1] == 0.0 {
                lams[i + 1]
            } else {
                bisect(|l| self.residual(l, nu, kind), lams[i], lams[i + 1], vals[i], 0.0)?
            };
            Ok::<_, Error>((lam, self.residual(lam, nu, kind)?))
        })?;
        let mut out: Vec<(f64, f64)> = Vec::new();
        for (lam, res) in roots {
            if lam > lambda_max {
                continue;
            }
            if out.last().is_some_and(|&(prev, _)| lam - prev < DEDUP_TOL) {
                continue;
            }
            out.push((lam, res));
        }
        Ok(out)
    }

    fn emit(&self, out: &mut Vec<AnalyticEigenvalue>, lambda: f64, nu: u32, kind: BoundaryKind, residual: f64) {
        let mut push = |phase| out.push(AnalyticEigenvalue { lambda, nu, kind, phase, residual });
        if nu == 0 {
            push(Phase::Constant);
        } else {
            push(Phase::Cos);
            push(Phase::Sin);
        }
    }

    /// All eigenvalues up to `lambda_max` for `nu = 0..=nu_max`, ascending.
    /// Disc eigenvalues with `nu >= 1` appear twice (cos and sin factors).
    pub fn find_eigenvalues(
        &self,
        kind: BoundaryKind,
        nu_max: u32,
        lambda_max: f64,
        exec: Execution,
    ) -> Result<AnalyticSpectrum> {
        if !(lambda_max > 0.0) {
            return invalid("lambda_max must be positive");
        }
        let nu_max = if self.domain() == Domain::Interval { 0 } else { nu_max };
        let mut out = Vec::new();
        let mut warning = None;
        if kind == BoundaryKind::Neumann {
            self.emit(&mut out, 0.0, 0, kind, 0.0);
        }
        for nu in 0..=nu_max {
            let roots = self.scan(nu, kind, lambda_max, exec)?;
            if nu == nu_max && nu > 0 && !roots.is_empty() {
                warning =
                    Some(format!("nu = {nu_max} still has eigenvalues below {lambda_max}; higher nu may be missing"));
            }
            for (lam, res) in roots {
                self.emit(&mut out, lam, nu, kind, res);
            }
        }
        out.sort_by(|a, b| a.lambda.total_cmp(&b.lambda).then(a.nu.cmp(&b.nu)).then(a.phase.cmp(&b.phase)));
        let e2 = lambda_max * self.eps() * self.eps();
        if e2 > 1.0 && warning.is_none() {
            warning = Some(format!("lambda_max eps^2 = {e2:.3} is not small"));
        }
        Ok(AnalyticSpectrum { eigenvalues: out, lambda_max, warning })
    }

    /// The `count` smallest eigenvalues (with multiplicity), growing the scan
    /// range and the angular index until the list is complete.
    pub fn lowest(&self, kind: BoundaryKind, count: usize, exec: Execution) -> Result<AnalyticSpectrum> {
        let mut lambda_max = match self.domain() {
            Domain::Interval => 10.0 * count.max(1) as f64,
            Domain::Disc => 4.0 * count.max(1) as f64,
        };
        let limit = 1.0 / (self.eps() * self.eps());
        loop {
            let spectrum = match self.domain() {
                Domain::Interval => self.find_eigenvalues(kind, 0, lambda_max, exec)?,
                Domain::Disc => {
                    let mut nu_max = 0;
                    loop {
                        if self.scan(nu_max + 1, kind, lambda_max, exec)?.is_empty() {
                            break;
                        }
                        nu_max += 1;
                    }
                    self.find_eigenvalues(kind, nu_max, lambda_max, exec)?
                }
            };
            if spectrum.eigenvalues.len() >= count {
                let mut spectrum = spectrum;
                spectrum.eigenvalues.truncate(count);
                return Ok(spectrum);
            }
            if lambda_max >= limit {
                let found = spectrum.eigenvalues.len();
                return Ok(AnalyticSpectrum {
                    warning: Some(format!("only {found} of {count} eigenvalues below {lambda_max}")),
                    ..spectrum
                });
            }
            lambda_max = (2.0 * lambda_max).min(limit);
        }
    }

    /// Glues, normalizes and checks the eigenfunction for a secular root.
    pub fn assemble(&self, ev: &AnalyticEigenvalue) -> Result<AnalyticEigenpair> {
        self.check_nu(ev.nu)?;
        let domain = self.domain();
        let lambda = ev.lambda;
        if lambda == 0.0 && (ev.kind == BoundaryKind::Dirichlet || ev.nu > 0) {
            return Err(Error::NotAnEigenvalue("the zero root glues to the trivial function".into()));
        }
        let (coeffs, singular_ratio) = if lambda == 0.0 {
            let c = match domain {
                Domain::Interval => vec![1.0, 0.0, 1.0, 1.0],
                Domain::Disc => vec![1.0, 1.0],
            };
            (c, 0.0)
        } else {
            null_vector(&self.matching_matrix(lambda, ev.nu, ev.kind)?)?
        };
        if singular_ratio > SINGULAR_RATIO_MAX {
            return Err(Error::NotAnEigenvalue(format!(
                "lambda = {lambda}: matching matrix has singular value ratio {singular_ratio:e}"
            )));
        }
        let center = match self.layer.model() {
            CoefficientModel::Interval(m) => m.x0(),
            CoefficientModel::Disc(m) => m.r0(),
        };
        let mut f = Eigenfunction {
            domain,
            eps: self.eps(),
            center,
            lambda,
            nu: ev.nu,
            phase: ev.phase,
            freq: self.frequency(lambda),
            layer: self.layer.solve(lambda, ev.nu, ev.kind)?,
            coeffs,
            grid: Arc::clone(&self.grid),
        };
        let norm_before = (f.radial_norm2()? * f.angular_norm()).sqrt();
        if !(norm_before > MIN_NORM) {
            return Err(Error::NotAnEigenvalue(format!("lambda = {lambda}: glued function has norm {norm_before:e}")));
        }
        let lead = match domain {
            Domain::Interval => f.coeffs[0],
            Domain::Disc => f.coeffs[1],
        };
        f.scale(lead.signum() / norm_before);
        let (c0_mismatch, c1_mismatch) = glue_mismatch(&f)?;
        let secular_residual = if lambda == 0.0 { 0.0 } else { self.residual(lambda, ev.nu, ev.kind)? };
        Ok(AnalyticEigenpair {
            eigenvalue: *ev,
            eigenfunction: f,
            diagnostics: Diagnostics { secular_residual, singular_ratio, c0_mismatch, c1_mismatch, norm_before },
        })
    }

    pub fn assemble_all(&self, evs: &[AnalyticEigenvalue], exec: Execution) -> Result<Vec<AnalyticEigenpair>> {
        try_map_range(exec, evs.len(), |i| self.assemble(&evs[i]))
    }
}

/// Unit null vector (smallest right singular vector) and `sigma_min / sigma_max`.
fn null_vector(m: &Mat<f64>) -> Result<(Vec<f64>, f64)> {
    let svd = m.svd().map_err(|e| Error::NumericalFailure(format!("SVD of matching matrix: {e:?}")))?;
    let s = svd.S();
    let n = m.ncols();
    let (mut imin, mut imax) = (0, 0);
    for i in 1..n {
        if s[i] < s[imin] {
            imin = i;
        }
        if s[i] > s[imax] {
            imax = i;
        }
    }
    let v = svd.V();
    let ratio = if s[imax] > 0.0 { s[imin] / s[imax] } else { 0.0 };
    Ok(((0..n).map(|i| v[(i, imin)]).collect(), ratio))
}

fn glue_mismatch(f: &Eigenfunction) -> Result<(f64, f64)> {
    let points: Vec<f64> = match f.domain {
        Domain::Interval => vec![f.eps, 1.0 - f.eps],
        Domain::Disc => vec![1.0 - f.eps],
    };
    let mut c0 = 0.0f64;
    let mut c1 = 0.0f64;
    for x in points {
        let outer_site = match f.domain {
            Domain::Interval if x < 0.5 => Site::Left(x - f.center),
            Domain::Interval => Site::Right(1.0 - x - f.center),
            Domain::Disc => Site::Layer(1.0 - x - f.center),
        };
        let inner_site = match f.domain {
            Domain::Interval => Site::Middle(x),
            Domain::Disc => Site::Interior(x),
        };
        let (uo, duo) = f.at_site(outer_site)?;
        let duo = if x < 0.5 && f.domain == Domain::Interval { duo } else { -duo };
        let (ui, dui) = f.at_site(inner_site)?;
        c0 = c0.max((uo - ui).abs());
        c1 = c1.max((duo - dui).abs());
    }
    Ok((c0, c1))
}

/// Secular residual on the interval.
pub fn secular_interval(lambda: f64, eps: f64, kind: BoundaryKind) -> Result<f64> {
    SpectralSolver::new(Domain::Interval, eps)?.residual(lambda, 0, kind)
}

/// Secular residual on the disc for angular index `nu`.
pub fn secular_disc(lambda: f64, nu: u32, eps: f64, kind: BoundaryKind) -> Result<f64> {
    SpectralSolver::new(Domain::Disc, eps)?.residual(lambda, nu, kind)
}

pub fn find_eigenvalues(
    domain: Domain,
    eps: f64,
    kind: BoundaryKind,
    nu_max: u32,
    lambda_max: f64,
) -> Result<AnalyticSpectrum> {
    SpectralSolver::new(domain, eps)?.find_eigenvalues(kind, nu_max, lambda_max, Execution::default())
}

/// Assembles the eigenfunction for a known root; disc functions with `nu >= 1`
/// get the cosine factor.
pub fn assemble_eigenfunction(
    lambda: f64,
    nu: u32,
    eps: f64,
    domain: Domain,
    kind: BoundaryKind,
) -> Result<AnalyticEigenpair> {
    let solver = SpectralSolver::new(domain, eps)?;
    let phase = if nu == 0 { Phase::Constant } else { Phase::Cos };
    let residual = if lambda == 0.0 { 0.0 } else { solver.residual(lambda, nu, kind)? };
    solver.assemble(&AnalyticEigenvalue { lambda, nu, kind, phase, residual })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayleighQuotient {
    pub value: f64,
    pub numerator: f64,
    pub denominator: f64,
    /// Difference from the same quotient with the layer step doubled.
    pub error_estimate: f64,
    pub converged: bool,
}

/// Energy over weighted mass of the radial profile on the elliptic region.
pub fn rayleigh_quotient(pair: &AnalyticEigenpair) -> Result<RayleighQuotient> {
    let f = &pair.eigenfunction;
    let nu2 = (f.nu as f64).powi(2);
    let s = f.samples()?;
    let (mut num, mut den, mut num_c, mut den_c) = (0.0, 0.0, 0.0, 0.0);
    for (n, &(u, du)) in f.grid.nodes.iter().zip(&s) {
        let e = n.p * du * du - nu2 * n.q * u * u;
        let m = n.w * u * u;
        num += n.weight * e;
        den += n.weight * m;
        num_c += n.coarse * e;
        den_c += n.coarse * m;
    }
    if !(den > 0.0) {
        return Err(Error::NumericalFailure("zero weighted mass".into()));
    }
    let value = num / den;
    let error_estimate = (value - num_c / den_c).abs();
    Ok(RayleighQuotient {
        value,
        numerator: num,
        denominator: den,
        error_estimate,
        converged: error_estimate <= QUAD_TOL * value.abs().max(1.0),
    })
}

/// Weighted inner products of assembled eigenfunctions.
pub fn gram_matrix(pairs: &[AnalyticEigenpair]) -> Result<Vec<Vec<f64>>> {
    let k = pairs.len();
    if k == 0 {
        return Ok(Vec::new());
    }
    let grid = &pairs[0].eigenfunction.grid;
    for p in pairs {
        if !Arc::ptr_eq(&p.eigenfunction.grid, grid) && p.eigenfunction.grid.len() != grid.len() {
            return invalid("eigenpairs come from different solvers");
        }
    }
    let samples = pairs.iter().map(|p| p.eigenfunction.samples()).collect::<Result<Vec<_>>>()?;
    let mut g = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in i..k {
            let (fi, fj) = (&pairs[i].eigenfunction, &pairs[j].eigenfunction);
            if fi.domain == Domain::Disc && (fi.nu != fj.nu || fi.phase != fj.phase) {
                continue;
            }
            let radial: f64 = grid
                .nodes
                .iter()
                .zip(samples[i].iter().zip(&samples[j]))
                .map(|(n, (a, b))| n.weight * n.w * a.0 * b.0)
                .sum();
            g[i][j] = radial * fi.angular_norm();
            g[j][i] = g[i][j];
        }
    }
    Ok(g)
}

/// Sampled vector matched to an eigenfunction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Alignment {
    /// Sup-norm error after both are scaled to unit sup-norm.
    pub sup_error: f64,
    pub sign: f64,
    /// Rotation applied to the eigenfunction (disc only).
    pub rotation: f64,
}

/// Aligns `vector`, sampled at `points`, with the eigenfunction over a global
/// sign and, on the disc, [`ALIGN_ROTATIONS`] rotations.
pub fn align(f: &Eigenfunction, points: &[Vec<f64>], vector: &[f64]) -> Result<Alignment> {
    if points.len() != vector.len() || points.is_empty() {
        return invalid("points and vector must be nonempty and of equal length");
    }
    let vmax = vector.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if vmax == 0.0 {
        return invalid("vector is zero");
    }
    let v: Vec<f64> = vector.iter().map(|x| x / vmax).collect();
    let (radial, theta): (Vec<f64>, Vec<f64>) = match f.domain {
        Domain::Interval => (points.iter().map(|p| f.profile(p[0]).map(|r| r.0)).collect::<Result<_>>()?, vec![]),
        Domain::Disc => {
            let r = points.iter().map(|p| f.profile(p[0].hypot(p[1]).min(1.0)).map(|r| r.0)).collect::<Result<_>>()?;
            (r, points.iter().map(|p| p[1].atan2(p[0])).collect())
        }
    };
    let rotations = if f.domain == Domain::Disc && f.nu > 0 { ALIGN_ROTATIONS } else { 1 };
    let best = map_range(Execution::default(), rotations, |k| {
        let rot = 2.0 * PI * k as f64 / rotations as f64;
        let vals: Vec<f64> = if theta.is_empty() || f.nu == 0 {
            radial.clone()
        } else {
            radial.iter().zip(&theta).map(|(r, t)| r * (f.nu as f64 * (t - rot)).cos()).collect()
        };
        let fmax = vals.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let mut out = Alignment { sup_error: f64::INFINITY, sign: 1.0, rotation: rot };
        if fmax == 0.0 {
            return out;
        }
        for sign in [1.0, -1.0] {
            let e = vals.iter().zip(&v).fold(0.0f64, |m, (a, b)| m.max((sign * a / fmax - b).abs()));
            if e < out.sup_error {
                out.sup_error = e;
                out.sign = sign;
            }
        }
        out
    });
    Ok(best.into_iter().fold(Alignment { sup_error: f64::INFINITY, sign: 1.0, rotation: 0.0 }, |a, b| {
        if b.sup_error < a.sup_error {
            b
        } else {
            a
        }
    }))
}

/// Truncated pairing `I(delta)` for each cutoff, with log-log slopes between
/// consecutive cutoffs.
#[derive(Debug, Clone, PartialEq)]
pub struct DivergenceDemo {
    pub beta: f64,
    pub order: u32,
    pub exponent: f64,
    /// Largest admissible exponent `j - 2 + gamma`.
    pub window: f64,
    pub deltas: Vec<f64>,
    pub values: Vec<f64>,
    pub slopes: Vec<f64>,
}

impl DivergenceDemo {
    pub fn within_window(&self) -> bool {
        self.exponent <= self.window
    }

    /// `|I(a) - I(b)| / |I(b)|` for the cutoffs closest to `a` and `b`.
    pub fn cauchy_gap(&self, a: f64, b: f64) -> f64 {
        let pick = |d: f64| {
            (0..self.deltas.len())
                .min_by(|&i, &j| (self.deltas[i] / d).ln().abs().total_cmp(&(self.deltas[j] / d).ln().abs()))
                .unwrap()
        };
        let (ia, ib) = (pick(a), pick(b));
        (self.values[ia] - self.values[ib]).abs() / self.values[ib].abs()
    }
}

/// `C^inf` step: 1 below `a`, 0 above `b`.
fn smooth_cutoff(x: f64, a: f64, b: f64) -> f64 {
    if x <= a {
        return 1.0;
    }
    if x >= b {
        return 0.0;
    }
    let t = (x - a) / (b - a);
    let g = |y: f64| (-1.0 / y).exp();
    g(1.0 - t) / (g(1.0 - t) + g(t))
}

/// Integrates `w phi_j f^(j) f` from `x0 + delta` with
/// `f = sin(beta) u_Dir + cos(beta) u_Neu` and `phi_j = (x - x0)^k` cut off
/// smoothly before the layer edge.
pub fn appendix_divergence_demo(
    beta: f64,
    order: u32,
    exponent: f64,
    eps: f64,
    lambda: f64,
    deltas: &[f64],
) -> Result<DivergenceDemo> {
    if order < 3 {
        return invalid("derivative order must be at least 3");
    }
    if !(exponent >= 0.0) {
        return invalid("exponent must be nonnegative");
    }
    if deltas.is_empty() || deltas.iter().any(|d| !(*d > 0.0)) || deltas.windows(2).any(|w| w[1] >= w[0]) {
        return invalid("cutoffs must be positive and strictly decreasing");
    }
    let model = IntervalModel::new(eps)?;
    let window = order as f64 - 2.0 + model.gamma();
    let solver = LayerSolver::new(CoefficientModel::Interval(model.clone()), DEFAULT_TRUNCATION)?;
    let edge = solver.edge_offset();
    if deltas[0] >= 0.5 * edge {
        return invalid(format!("cutoff {} reaches into the taper (edge offset {edge})", deltas[0]));
    }
    let neu = solver.solve(lambda, 0, BoundaryKind::Neumann)?;
    let dir = solver.solve(lambda, 0, BoundaryKind::Dirichlet)?;
    let (sb, cb) = beta.sin_cos();
    let f = |t: f64, k: usize| -> Result<f64> {
        let mut v = 0.0;
        if sb != 0.0 {
            v += sb * dir.eval(t, k)?;
        }
        if cb != 0.0 {
            v += cb * neu.eval(t, k)?;
        }
        Ok(v)
    };
    let integrand = |t: f64| -> Result<f64> {
        let chi = smooth_cutoff(t, 0.5 * edge, edge);
        if chi == 0.0 {
            return Ok(0.0);
        }
        Ok(model.w_offset(t)? * t.powf(exponent) * chi * f(t, order as usize)? * f(t, 0)?)
    };
    let mut values = Vec::with_capacity(deltas.len());
    for &d in deltas {
        let g = CompositeGauss::graded(d, edge, d, 20);
        let mut err = None;
        let v = g.integrate(|t| {
            integrand(t).unwrap_or_else(|e| {
                err.get_or_insert(e);
                0.0
            })
        });
        if let Some(e) = err {
            return Err(e);
        }
        values.push(v);
    }
    let slopes = deltas
        .windows(2)
        .zip(values.windows(2))
        .map(|(d, v)| (v[1].abs().ln() - v[0].abs().ln()) / (d[1].ln() - d[0].ln()))
        .collect();
    Ok(DivergenceDemo { beta, order, exponent, window, deltas: deltas.to_vec(), values, slopes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn interval() -> SpectralSolver {
        SpectralSolver::new(Domain::Interval, 0.05).unwrap()
    }

    fn disc() -> SpectralSolver {
        SpectralSolver::new(Domain::Disc, 0.05).unwrap()
    }

    #[test]
    fn est1_zero_and_asymptotics() {
        assert_eq!(est1_residual(0.0), 0.0);
        let roots = est1_roots(2000.0, 1e-3);
        assert_eq!(roots[0], 0.0);
        let gaps: Vec<f64> = roots[1..]
            .iter()
            .enumerate()
            .map(|(k, &r)| ((r - ((k + 1) as f64 * PI).powi(2) / 6.0) / r).abs())
            .collect();
        assert!(gaps.len() > 20);
        assert!(gaps[20] < gaps[2] && gaps[2] < gaps[0], "{gaps:?}");
    }

    #[test]
    fn zero_residuals() {
        let s = interval();
        assert_eq!(s.residual(0.0, 0, BoundaryKind::Neumann).unwrap(), 0.0);
        assert_eq!(disc().residual(0.0, 3, BoundaryKind::Neumann).unwrap(), 0.0);
        assert!(s.residual(1.0, 1, BoundaryKind::Neumann).is_err());
    }

    #[test]
    fn sign_change_between_limit_roots() {
        // each gap between consecutive limit roots holds a secular root
        let s = interval();
        let limit = est1_roots(200.0, 1e-3);
        let roots: Vec<f64> =
            s.scan(0, BoundaryKind::Neumann, 200.0, Execution::Sequential).unwrap().iter().map(|r| r.0).collect();
        for w in limit[1..].windows(2) {
            assert!(roots.iter().any(|&r| r > w[0] && r < w[1]), "no root in {w:?}");
        }
    }

    #[test]
    fn interval_first_eight() {
        let s = interval();
        let spectrum = s.lowest(BoundaryKind::Neumann, 8, Execution::default()).unwrap();
        let lams = spectrum.lambdas();
        assert_eq!(lams.len(), 8);
        assert_eq!(lams[0], 0.0);
        assert!(lams.windows(2).all(|w| w[1] - w[0] > 1e-9));
        let pairs = s.assemble_all(&spectrum.eigenvalues, Execution::default()).unwrap();
        for p in &pairs {
            let d = p.diagnostics;
            assert!(d.secular_residual.abs() < 1e-9, "{d:?}");
            assert!(d.c0_mismatch < 1e-8 && d.c1_mismatch < 1e-8, "{d:?}");
            let rq = rayleigh_quotient(p).unwrap();
            assert!((rq.value - p.lambda()).abs() / p.lambda().max(1.0) < 1e-5, "{} vs {rq:?}", p.lambda());
            assert!(rq.value >= 0.0);
        }
        let g = gram_matrix(&pairs).unwrap();
        for i in 0..8 {
            for j in 0..8 {
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((g[i][j] - target).abs() < 1e-6, "G[{i}][{j}] = {}", g[i][j]);
            }
        }
    }

    #[test]
    fn constant_eigenfunction() {
        let s = interval();
        let ev = AnalyticEigenvalue {
            lambda: 0.0,
            nu: 0,
            kind: BoundaryKind::Neumann,
            phase: Phase::Constant,
            residual: 0.0,
        };
        let p = s.assemble(&ev).unwrap();
        let c = 1.0 / s.grid().total_weight().sqrt();
        for x in [0.01, 0.3, 0.5, 0.97] {
            assert_relative_eq!(p.eigenfunction.value(&[x]).unwrap(), c, max_relative = 1e-12);
        }
        assert_eq!(rayleigh_quotient(&p).unwrap().value, 0.0);
        assert_eq!(gram_matrix(&[p]).unwrap().len(), 1);
    }

    #[test]
    fn parity_about_center() {
        let s = interval();
        let spectrum = s.lowest(BoundaryKind::Neumann, 5, Execution::default()).unwrap();
        for p in s.assemble_all(&spectrum.eigenvalues, Execution::default()).unwrap() {
            let f = &p.eigenfunction;
            let (a, b) = (f.value(&[0.2]).unwrap(), f.value(&[0.8]).unwrap());
            let sign = if (a - b).abs() < (a + b).abs() { 1.0 } else { -1.0 };
            for x in [0.01, 0.04, 0.2, 0.37, 0.49] {
                let (u, v) = (f.value(&[x]).unwrap(), f.value(&[1.0 - x]).unwrap());
                assert!((u - sign * v).abs() < 1e-6, "lambda {} x {x}: {u} vs {v}", p.lambda());
            }
        }
    }

    #[test]
    fn dirichlet_has_no_zero_mode() {
        let s = interval();
        let spectrum = s.lowest(BoundaryKind::Dirichlet, 3, Execution::default()).unwrap();
        assert!(spectrum.eigenvalues[0].lambda > 0.0);
        let ev = AnalyticEigenvalue { lambda: 0.0, ..spectrum.eigenvalues[0] };
        assert!(matches!(s.assemble(&ev), Err(Error::NotAnEigenvalue(_))));
    }

    #[test]
    fn disc_zero_root_rejected_for_nu_positive() {
        let ev =
            AnalyticEigenvalue { lambda: 0.0, nu: 2, kind: BoundaryKind::Neumann, phase: Phase::Cos, residual: 0.0 };
        assert!(matches!(disc().assemble(&ev), Err(Error::NotAnEigenvalue(_))));
    }

    #[test]
    fn non_root_rejected() {
        let s = interval();
        let ev = AnalyticEigenvalue {
            lambda: 3.3,
            nu: 0,
            kind: BoundaryKind::Neumann,
            phase: Phase::Constant,
            residual: 1.0,
        };
        assert!(matches!(s.assemble(&ev), Err(Error::NotAnEigenvalue(_))));
    }

    #[test]
    fn disc_first_twelve() {
        let s = disc();
        let spectrum = s.lowest(BoundaryKind::Neumann, 12, Execution::default()).unwrap();
        assert_eq!(spectrum.eigenvalues[0].lambda, 0.0);
        let pairs = s.assemble_all(&spectrum.eigenvalues, Execution::default()).unwrap();
        for p in &pairs {
            let rq = rayleigh_quotient(p).unwrap();
            assert!((rq.value - p.lambda()).abs() / p.lambda().max(1.0) < 1e-5, "{:?} vs {rq:?}", p.eigenvalue);
            assert!(p.diagnostics.c0_mismatch < 1e-8 && p.diagnostics.c1_mismatch < 1e-8);
        }
        let g = gram_matrix(&pairs).unwrap();
        for i in 0..pairs.len() {
            for j in 0..pairs.len() {
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((g[i][j] - target).abs() < 1e-6, "G[{i}][{j}] = {}", g[i][j]);
            }
        }
        // multiplicity pairs are adjacent
        for e in spectrum.eigenvalues.iter().filter(|e| e.nu > 0 && e.phase == Phase::Cos) {
            assert!(spectrum.eigenvalues.iter().any(|f| f.lambda == e.lambda && f.phase == Phase::Sin));
        }
    }

    #[test]
    fn distinct_nu_orthogonal_exactly() {
        let s = disc();
        let a = s.scan(1, BoundaryKind::Neumann, 20.0, Execution::Sequential).unwrap()[0];
        let b = s.scan(2, BoundaryKind::Neumann, 20.0, Execution::Sequential).unwrap()[0];
        let mk = |lambda, nu| AnalyticEigenvalue {
            lambda,
            nu,
            kind: BoundaryKind::Neumann,
            phase: Phase::Cos,
            residual: 0.0,
        };
        let pairs = vec![s.assemble(&mk(a.0, 1)).unwrap(), s.assemble(&mk(b.0, 2)).unwrap()];
        assert_eq!(gram_matrix(&pairs).unwrap()[0][1], 0.0);
    }

    #[test]
    fn alignment_recovers_sign_and_rotation() {
        let s = disc();
        let lam = s.scan(2, BoundaryKind::Neumann, 20.0, Execution::Sequential).unwrap()[0].0;
        let ev =
            AnalyticEigenvalue { lambda: lam, nu: 2, kind: BoundaryKind::Neumann, phase: Phase::Cos, residual: 0.0 };
        let p = s.assemble(&ev).unwrap();
        let pts: Vec<Vec<f64>> = (0..200)
            .map(|i| {
                let (r, t) = (0.9 * (i as f64 / 200.0).sqrt(), i as f64 * 2.399);
                vec![r * t.cos(), r * t.sin()]
            })
            .collect();
        let rot = 2.0 * PI * 37.0 / 720.0;
        let v: Vec<f64> = pts
            .iter()
            .map(|q| {
                let (r, t) = (q[0].hypot(q[1]), q[1].atan2(q[0]));
                -3.0 * p.eigenfunction.profile(r).unwrap().0 * (2.0 * (t - rot)).cos()
            })
            .collect();
        let a = align(&p.eigenfunction, &pts, &v).unwrap();
        assert!(a.sup_error < 1e-12, "{a:?}");
        assert_eq!(a.sign, -1.0);
    }

    #[test]
    fn appendix_neumann_converges_dirichlet_diverges() {
        let lam = interval().scan(0, BoundaryKind::Neumann, 30.0, Execution::Sequential).unwrap()[0].0;
        let deltas = [1e-3, 1e-4, 1e-5, 1e-6];
        let dir = appendix_divergence_demo(PI / 2.0, 3, 0.0, 0.05, lam, &deltas).unwrap();
        assert!(dir.slopes.iter().all(|&s| s <= -0.5), "{dir:?}");
        let outside = appendix_divergence_demo(PI / 2.0, 3, dir.window + 1.0, 0.05, lam, &deltas).unwrap();
        assert!(!outside.within_window());
        assert!(outside.slopes.iter().all(|&s| s > -0.05), "{outside:?}");
        let neu = appendix_divergence_demo(0.0, 3, 0.0, 0.05, lam, &deltas).unwrap();
        assert!(neu.slopes.iter().all(|&s| s.abs() < 0.5), "{neu:?}");
    }
}
