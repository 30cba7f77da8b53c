//! Local solutions of the degenerate radial/interval ODE at its regular singular point.
//!
//! In the offset `tau` from the degenerate point (positive toward the elliptic
//! side) the equation reads `A(tau) u'' + B(tau) u' - nu^2 D(tau) u = lambda u`
//! with `A(0) = 0`. Frobenius series give the two local solutions; a chain of
//! regular-point Taylor steps carries them out to the layer edge and back to
//! the outer boundary, so the series never has to be summed near its radius of
//! convergence.

use crate::coefficients::{interval_jets, CoefficientModel, DiscJets, DiscModel, IntervalModel};
use crate::error::{Error, Result};
use crate::Domain;

pub const DEFAULT_TRUNCATION: usize = 12;
pub const MAX_TRUNCATION: usize = 60;

/// Series evaluation is refused beyond this fraction of the convergence radius.
pub const GUARD_FRACTION: f64 = 0.95;

/// Order of the regular-point Taylor steps.
const STEP_ORDER: usize = 36;
/// Jet coefficients grow like `dist^-k`; the order is capped to keep them finite.
fn step_order(dist: f64) -> usize {
    let digits = -dist.log10();
    if digits <= 1.0 {
        STEP_ORDER
    } else {
        ((250.0 / digits) as usize).clamp(8, STEP_ORDER)
    }
}
/// Each Taylor step covers this fraction of the distance to the nearest singularity.
const STEP_FRACTION: f64 = 0.4;
/// The disc chain stops this close (relative to eps) to the non-analytic layer edge.
const EDGE_GAP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryKind {
    Neumann,
    Dirichlet,
}

impl std::str::FromStr for BoundaryKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "neumann" => Ok(BoundaryKind::Neumann),
            "dirichlet" | "clipped" => Ok(BoundaryKind::Dirichlet),
            _ => Err(Error::InvalidArgument(format!("unknown boundary kind `{s}`"))),
        }
    }
}

impl std::fmt::Display for BoundaryKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BoundaryKind::Neumann => "neumann",
            BoundaryKind::Dirichlet => "dirichlet",
        })
    }
}

/// Coefficient series about the degenerate point, independent of `lambda` and `nu`.
#[derive(Debug, Clone)]
pub struct LocalSeries {
    pub domain: Domain,
    pub eps: f64,
    /// Degenerate point in the layer coordinate (`x` on the interval, `t = 1 - r` on the disc).
    pub center: f64,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub d: Vec<f64>,
    /// Distance from the center to the nearest other singularity of the coefficients.
    pub radius: f64,
}

impl LocalSeries {
    pub fn new(model: &CoefficientModel, order: usize) -> Result<Self> {
        match model {
            CoefficientModel::Interval(m) => Ok(Self::interval(m, order)),
            CoefficientModel::Disc(m) => Self::disc(m, order),
        }
    }

    /// Closed-form series: `a` has two nonzero terms and `d` vanishes.
    pub fn interval(m: &IntervalModel, order: usize) -> Self {
        let mut a = vec![0.0; order + 2];
        let s = m.series_a();
        a[1] = s[1];
        a[2] = s[2];
        LocalSeries {
            domain: Domain::Interval,
            eps: m.eps(),
            center: m.x0(),
            a,
            b: m.series_b(order + 1),
            d: vec![0.0; order + 2],
            radius: singular_distance(&CoefficientModel::Interval(m.clone()), m.x0()),
        }
    }

    pub fn disc(m: &DiscModel, order: usize) -> Result<Self> {
        let jets = DiscJets::new(m.r0(), m.eps(), order + 1)?;
        let mut a = jets.phi22.coeffs().to_vec();
        a[0] = 0.0;
        let b = jets.first_order()?.coeffs().iter().map(|v| -v).collect();
        let d = jets.zeroth_order()?.into_coeffs();
        Ok(LocalSeries { domain: Domain::Disc, eps: m.eps(), center: m.r0(), a, b, d, radius: m.eps() - m.r0() })
    }

    pub fn order(&self) -> usize {
        self.a.len() - 2
    }
}

/// Distance from layer coordinate `s` to the nearest coefficient singularity
/// (including the degenerate point itself unless `s` is that point).
fn singular_distance(model: &CoefficientModel, s: f64) -> f64 {
    let pts: [f64; 3] = match model {
        CoefficientModel::Interval(m) => [m.x0(), 4.0 * m.eps() - m.x0(), -m.eps()],
        CoefficientModel::Disc(m) => [m.r0(), m.eps(), -m.eps()],
    };
    pts.iter().map(|p| (s - p).abs()).filter(|d| *d > 0.0).fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone)]
pub struct FrobeniusProblem {
    pub series: LocalSeries,
    pub lambda: f64,
    pub nu: u32,
}

impl FrobeniusProblem {
    pub fn new(series: LocalSeries, lambda: f64, nu: u32) -> Result<Self> {
        if !(lambda >= 0.0) {
            return Err(Error::InvalidArgument(format!("spectral parameter {lambda} must be >= 0")));
        }
        if series.domain == Domain::Interval && nu != 0 {
            return Err(Error::InvalidArgument("the interval has no angular mode".into()));
        }
        Ok(FrobeniusProblem { series, lambda, nu })
    }

    /// Indicial polynomial `a1 alpha (alpha - 1) + b0 alpha`.
    pub fn indicial(&self, alpha: f64) -> f64 {
        self.series.a[1] * alpha * (alpha - 1.0) + self.series.b[0] * alpha
    }

    /// `max |P(alpha)| / |a1|` over both indicial roots.
    pub fn indicial_residual(&self) -> Result<f64> {
        let (a0, a2) = indicial_roots(self)?;
        Ok(self.indicial(a0).abs().max(self.indicial(a2).abs()) / self.series.a[1].abs())
    }
}

/// The two indicial exponents `(0, alpha2)` with `alpha2 = 1 - b0/a1`.
pub fn indicial_roots(problem: &FrobeniusProblem) -> Result<(f64, f64)> {
    let s = &problem.series;
    let alpha2 = 1.0 - s.b[0] / s.a[1];
    if (alpha2 - alpha2.round()).abs() < 1e-8 {
        return Err(Error::Resonance(format!("exponents 0 and {alpha2} differ by an integer")));
    }
    Ok((0.0, alpha2))
}

/// `c_0 = 1, c_1, ..., c_J` from the general recurrence.
pub fn series_coefficients(problem: &FrobeniusProblem, alpha: f64, truncation: usize) -> Result<Vec<f64>> {
    let s = &problem.series;
    if truncation > s.order() {
        return Err(Error::InvalidArgument(format!(
            "truncation {truncation} exceeds the coefficient series order {}",
            s.order()
        )));
    }
    let nu2 = (problem.nu as f64).powi(2);
    let mut c = vec![0.0; truncation + 1];
    c[0] = 1.0;
    for j in 1..=truncation {
        let pj = problem.indicial(alpha + j as f64);
        if pj.abs() < 1e-300 {
            return Err(Error::Resonance(format!("P(alpha + {j}) vanishes")));
        }
        let mut rhs = problem.lambda * c[j - 1];
        for k in 0..j {
            let ka = k as f64 + alpha;
            let mut t = ka * (ka - 1.0) * s.a[j - k + 1] + ka * s.b[j - k];
            t -= nu2 * s.d[j - k - 1];
            rhs -= c[k] * t;
        }
        c[j] = rhs / pj;
    }
    Ok(c)
}

/// The two-term interval recurrence written out directly.
pub fn interval_recurrence(m: &IntervalModel, lambda: f64, alpha: f64, truncation: usize) -> Vec<f64> {
    let [_, a1, a2] = m.series_a();
    let b = m.series_b(truncation);
    let p = |x: f64| a1 * x * (x - 1.0) + b[0] * x;
    let mut c = vec![0.0; truncation + 1];
    c[0] = 1.0;
    for j in 1..=truncation {
        let x = alpha + j as f64;
        let mut rhs = (lambda - a2 * (x - 1.0) * (x - 2.0)) * c[j - 1];
        for k in 0..j {
            rhs -= c[k] * (k as f64 + alpha) * b[j - k];
        }
        c[j] = rhs / p(x);
    }
    c
}

#[derive(Debug, Clone)]
pub struct FrobeniusSolution {
    pub domain: Domain,
    pub kind: BoundaryKind,
    pub alpha: f64,
    pub coeffs: Vec<f64>,
    pub scale: f64,
    pub center: f64,
    pub guard: f64,
    pub lambda: f64,
    pub nu: u32,
}

impl FrobeniusSolution {
    /// Builds the series for `kind`. Dirichlet solutions are scaled so that the
    /// quasi-derivative tends to 1 at the degenerate point.
    pub fn new(
        model: &CoefficientModel,
        problem: &FrobeniusProblem,
        kind: BoundaryKind,
        truncation: usize,
    ) -> Result<Self> {
        let (_, alpha2) = indicial_roots(problem)?;
        let alpha = match kind {
            BoundaryKind::Neumann => 0.0,
            BoundaryKind::Dirichlet => alpha2,
        };
        let coeffs = series_coefficients(problem, alpha, truncation)?;
        let scale = match kind {
            BoundaryKind::Neumann => 1.0,
            BoundaryKind::Dirichlet => dirichlet_scale(model, alpha2),
        };
        Ok(FrobeniusSolution {
            domain: problem.series.domain,
            kind,
            alpha,
            coeffs,
            scale,
            center: problem.series.center,
            guard: GUARD_FRACTION * problem.series.radius,
            lambda: problem.lambda,
            nu: problem.nu,
        })
    }

    pub fn truncation(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// `k`-th derivative at offset `tau` from the center, without the guard check.
    fn eval_offset(&self, tau: f64, k: usize) -> Result<f64> {
        if self.alpha == 0.0 {
            let mut acc = 0.0;
            for j in (k..self.coeffs.len()).rev() {
                acc = acc * tau + self.coeffs[j] * falling(j as f64, k);
            }
            return Ok(self.scale * acc);
        }
        if tau < 0.0 {
            return Err(Error::DomainError("the Dirichlet solution is not real on the hyperbolic side".into()));
        }
        if tau == 0.0 {
            if k == 0 {
                return Ok(0.0);
            }
            return Err(Error::SingularPoint("Dirichlet derivative is unbounded at the center".into()));
        }
        let mut acc = 0.0;
        for j in (0..self.coeffs.len()).rev() {
            acc = acc * tau + self.coeffs[j] * falling(j as f64 + self.alpha, k);
        }
        Ok(self.scale * acc * tau.powf(self.alpha - k as f64))
    }

    fn check_guard(&self, tau: f64) -> Result<()> {
        if tau.abs() > self.guard {
            return Err(Error::DivergenceRisk { offset: tau.abs(), guard: self.guard });
        }
        Ok(())
    }
}

/// `x (x-1) ... (x-k+1)`.
fn falling(x: f64, k: usize) -> f64 {
    (0..k).map(|i| x - i as f64).product()
}

fn dirichlet_scale(model: &CoefficientModel, alpha2: f64) -> f64 {
    match model {
        CoefficientModel::Interval(m) => 1.0 / (m.dirichlet_constant() * alpha2),
        // d/dr = -d/dt
        CoefficientModel::Disc(m) => -1.0 / (m.dirichlet_constant() * alpha2),
    }
}

/// Series value (`deriv = 0`) or derivative (`deriv = 1`) at layer coordinate `s`.
pub fn eval_series(sol: &FrobeniusSolution, s: f64, deriv: usize) -> Result<f64> {
    if deriv > 1 {
        return Err(Error::InvalidArgument("only value and first derivative are exposed".into()));
    }
    let tau = s - sol.center;
    sol.check_guard(tau)?;
    sol.eval_offset(tau, deriv)
}

/// `p * u'` at layer coordinate `s`, with the derivative taken in `x` on the
/// interval and in `r` on the disc.
pub fn quasi_derivative(sol: &FrobeniusSolution, model: &CoefficientModel, s: f64) -> Result<f64> {
    let tau = s - sol.center;
    sol.check_guard(tau)?;
    let du = sol.eval_offset(tau, 1)?;
    match model {
        CoefficientModel::Interval(m) => Ok(m.p_offset(tau) * du),
        CoefficientModel::Disc(m) => Ok(-m.p_offset(tau)? * du),
    }
}

/// Residual `A u'' + B u' - nu^2 D u - lambda u` of the truncated series at offset `tau`.
pub fn series_residual(sol: &FrobeniusSolution, model: &CoefficientModel, tau: f64) -> Result<f64> {
    let u = sol.eval_offset(tau, 0)?;
    let du = sol.eval_offset(tau, 1)?;
    let d2u = sol.eval_offset(tau, 2)?;
    let (a, b, d) = match model {
        CoefficientModel::Interval(m) => {
            let (phi1, phi2) = m.phi(m.x0() + tau);
            (phi2, phi1, 0.0)
        }
        CoefficientModel::Disc(m) => {
            let t = m.r0() + tau;
            let (p11, p22, p2) = m.phi(t)?;
            (p22, -(p11 / (1.0 - t) + p2), p11 / ((1.0 - t) * (1.0 - t)))
        }
    };
    Ok(a * d2u + b * du - (sol.nu as f64).powi(2) * d * u - sol.lambda * u)
}

// ---------------------------------------------------------------------------
// Continuation
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
struct StepPlan {
    start: f64,
    len: f64,
    a: Vec<f64>,
    b: Vec<f64>,
    d: Vec<f64>,
}

impl StepPlan {
    fn new(model: &CoefficientModel, start: f64, len: f64, order: usize) -> Result<Self> {
        let (a, b, d) = ode_jets(model, start, order)?;
        Ok(StepPlan { start, len, a, b, d })
    }

    /// Taylor coefficients of the solution about `start` given value and slope there.
    fn solve_into(&self, lambda: f64, nu2: f64, u: f64, du: f64, e: &mut Vec<f64>) {
        let n = self.a.len() - 1;
        e.clear();
        e.resize(n + 1, 0.0);
        e[0] = u;
        if n >= 1 {
            e[1] = du;
        }
        for m in 0..n.saturating_sub(1) {
            let mut acc = 0.0;
            for i in 1..=m {
                let k = m - i + 2;
                acc += self.a[i] * (k * (k - 1)) as f64 * e[k];
            }
            for i in 0..=m {
                let k = m - i + 1;
                acc += self.b[i] * k as f64 * e[k];
                acc -= nu2 * self.d[i] * e[m - i];
            }
            acc -= lambda * e[m];
            e[m + 2] = -acc / (self.a[0] * ((m + 2) * (m + 1)) as f64);
        }
    }
}

/// Jets `(A, B, D)` of the layer equation about offset `tau`.
fn ode_jets(model: &CoefficientModel, tau: f64, order: usize) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    match model {
        CoefficientModel::Interval(m) => {
            let (phi1, phi2) = interval_jets(m.x0() + tau, m.eps(), order)?;
            Ok((phi2.into_coeffs(), phi1.into_coeffs(), vec![0.0; order + 1]))
        }
        CoefficientModel::Disc(m) => {
            let j = DiscJets::new(m.r0() + tau, m.eps(), order)?;
            let b = j.first_order()?.coeffs().iter().map(|v| -v).collect();
            let d = j.zeroth_order()?.into_coeffs();
            Ok((j.phi22.into_coeffs(), b, d))
        }
    }
}

#[derive(Debug, Clone)]
struct Patch {
    start: f64,
    len: f64,
    coeffs: Vec<f64>,
}

impl Patch {
    fn contains(&self, tau: f64) -> bool {
        let (lo, hi) =
            if self.len >= 0.0 { (self.start, self.start + self.len) } else { (self.start + self.len, self.start) };
        tau >= lo && tau <= hi
    }

    fn eval(&self, tau: f64, k: usize) -> f64 {
        let h = tau - self.start;
        let mut acc = 0.0;
        for j in (k..self.coeffs.len()).rev() {
            acc = acc * h + self.coeffs[j] * falling(j as f64, k);
        }
        acc
    }
}

/// Cached series data and continuation steps for one model and truncation.
#[derive(Debug, Clone)]
pub struct LayerSolver {
    model: CoefficientModel,
    series: LocalSeries,
    truncation: usize,
    rho: f64,
    edge: f64,
    boundary: f64,
    outward: Vec<StepPlan>,
    inward: Vec<StepPlan>,
}

impl LayerSolver {
    pub fn new(model: CoefficientModel, truncation: usize) -> Result<Self> {
        if truncation == 0 || truncation > MAX_TRUNCATION {
            return Err(Error::InvalidArgument(format!("truncation {truncation} outside 1..={MAX_TRUNCATION}")));
        }
        let series = LocalSeries::new(&model, truncation.max(2))?;
        let radius = series.radius;
        let rho = radius * 10f64.powf(-14.0 / (truncation as f64 + 1.0)).min(0.5);
        let center = series.center;
        let edge = model.eps() - center;
        let boundary = -center;
        let eps = model.eps();

        let mut outward = Vec::new();
        let mut tau = rho;
        while tau < edge {
            let r = singular_distance(&model, center + tau);
            let remaining = edge - tau;
            if model.domain() == Domain::Disc && remaining <= EDGE_GAP * eps {
                outward.push(StepPlan::new(&model, tau, remaining, 2)?);
                break;
            }
            let h = (STEP_FRACTION * r).min(remaining);
            outward.push(StepPlan::new(&model, tau, h, step_order(r))?);
            tau = if h == remaining { edge } else { tau + h };
        }

        let mut inward = Vec::new();
        let mut tau = -rho.min(-boundary);
        while tau > boundary {
            let r = singular_distance(&model, center + tau);
            let h = (STEP_FRACTION * r).min(tau - boundary);
            inward.push(StepPlan::new(&model, tau, -h, step_order(r))?);
            tau = if h == tau - boundary { boundary } else { tau - h };
        }

        Ok(LayerSolver { model, series, truncation, rho, edge, boundary, outward, inward })
    }

    pub fn model(&self) -> &CoefficientModel {
        &self.model
    }

    pub fn series(&self) -> &LocalSeries {
        &self.series
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    /// Offset at which the series hands over to Taylor steps.
    pub fn series_radius(&self) -> f64 {
        self.rho
    }

    /// Offset of the layer edge (`x = eps` or `t = eps`) from the center.
    pub fn edge_offset(&self) -> f64 {
        self.edge
    }

    /// Offset of the outer boundary (`x = 0` or `r = 1`) from the center.
    pub fn boundary_offset(&self) -> f64 {
        self.boundary
    }

    pub fn problem(&self, lambda: f64, nu: u32) -> Result<FrobeniusProblem> {
        FrobeniusProblem::new(self.series.clone(), lambda, nu)
    }

    pub fn frobenius(&self, lambda: f64, nu: u32, kind: BoundaryKind) -> Result<FrobeniusSolution> {
        let p = self.problem(lambda, nu)?;
        FrobeniusSolution::new(&self.model, &p, kind, self.truncation)
    }

    /// `(u, du/dtau)` at the layer edge, with `tau` the layer coordinate.
    pub fn edge_values(&self, lambda: f64, nu: u32, kind: BoundaryKind) -> Result<(f64, f64)> {
        let sol = self.frobenius(lambda, nu, kind)?;
        let mut u = sol.eval_offset(self.rho, 0)?;
        let mut du = sol.eval_offset(self.rho, 1)?;
        let nu2 = (nu as f64).powi(2);
        let mut e = Vec::with_capacity(STEP_ORDER + 1);
        for step in &self.outward {
            step.solve_into(lambda, nu2, u, du, &mut e);
            let p = Patch { start: step.start, len: step.len, coeffs: std::mem::take(&mut e) };
            u = p.eval(step.start + step.len, 0);
            du = p.eval(step.start + step.len, 1);
            e = p.coeffs;
        }
        Ok((u, du))
    }

    /// Full piecewise representation of the local solution across the layer.
    pub fn solve(&self, lambda: f64, nu: u32, kind: BoundaryKind) -> Result<LayerSolution> {
        let sol = self.frobenius(lambda, nu, kind)?;
        let nu2 = (nu as f64).powi(2);
        let chain = |plans: &[StepPlan], start: f64| -> Result<Vec<Patch>> {
            let mut u = sol.eval_offset(start, 0)?;
            let mut du = sol.eval_offset(start, 1)?;
            let mut out = Vec::with_capacity(plans.len());
            for step in plans {
                let mut e = Vec::new();
                step.solve_into(lambda, nu2, u, du, &mut e);
                let p = Patch { start: step.start, len: step.len, coeffs: e };
                u = p.eval(step.start + step.len, 0);
                du = p.eval(step.start + step.len, 1);
                out.push(p);
            }
            Ok(out)
        };
        let outward = chain(&self.outward, self.rho)?;
        let inward = match kind {
            BoundaryKind::Neumann => chain(&self.inward, -self.rho.min(-self.boundary))?,
            BoundaryKind::Dirichlet => Vec::new(),
        };
        Ok(LayerSolution {
            model: self.model.clone(),
            series: sol,
            rho: self.rho,
            edge: self.edge,
            boundary: self.boundary,
            outward,
            inward,
        })
    }
}

/// Local solution on the whole layer, from the outer boundary to the layer edge.
#[derive(Debug, Clone)]
pub struct LayerSolution {
    model: CoefficientModel,
    series: FrobeniusSolution,
    rho: f64,
    edge: f64,
    boundary: f64,
    outward: Vec<Patch>,
    inward: Vec<Patch>,
}

impl LayerSolution {
    pub fn frobenius(&self) -> &FrobeniusSolution {
        &self.series
    }

    pub fn kind(&self) -> BoundaryKind {
        self.series.kind
    }

    pub fn center(&self) -> f64 {
        self.series.center
    }

    pub fn edge_offset(&self) -> f64 {
        self.edge
    }

    pub fn boundary_offset(&self) -> f64 {
        self.boundary
    }

    /// `k`-th derivative in the layer coordinate at offset `tau`.
    pub fn eval(&self, tau: f64, k: usize) -> Result<f64> {
        if tau.abs() <= self.rho {
            return self.series.eval_offset(tau, k);
        }
        if tau > self.edge * (1.0 + 1e-14) || tau < self.boundary * (1.0 + 1e-14) {
            return Err(Error::DomainError(format!("offset {tau} lies outside the layer")));
        }
        let patches = if tau > 0.0 { &self.outward } else { &self.inward };
        if patches.is_empty() {
            return Err(Error::DomainError("the Dirichlet solution is not continued into the hyperbolic side".into()));
        }
        let p = patches.iter().find(|p| p.contains(tau)).unwrap_or_else(|| patches.last().unwrap());
        Ok(p.eval(tau, k))
    }

    pub fn value(&self, tau: f64) -> Result<f64> {
        self.eval(tau, 0)
    }

    pub fn derivative(&self, tau: f64) -> Result<f64> {
        self.eval(tau, 1)
    }

    pub fn edge_values(&self) -> (f64, f64) {
        let p = self.outward.last().expect("layer has at least one step");
        let end = p.start + p.len;
        (p.eval(end, 0), p.eval(end, 1))
    }

    /// `p * u'` at offset `tau`, derivative in `x` (interval) or `r` (disc).
    pub fn quasi_derivative(&self, tau: f64) -> Result<f64> {
        let du = self.eval(tau, 1)?;
        match &self.model {
            CoefficientModel::Interval(m) => Ok(m.p_offset(tau) * du),
            CoefficientModel::Disc(m) => Ok(-m.p_offset(tau)? * du),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn interval(eps: f64) -> CoefficientModel {
        CoefficientModel::Interval(IntervalModel::new(eps).unwrap())
    }

    fn disc(eps: f64) -> CoefficientModel {
        CoefficientModel::Disc(DiscModel::new(eps).unwrap())
    }

    #[test]
    fn interval_alpha2() {
        let s = LayerSolver::new(interval(0.05), 12).unwrap();
        let (a0, a2) = indicial_roots(&s.problem(1.0, 0).unwrap()).unwrap();
        assert_eq!(a0, 0.0);
        assert_relative_eq!(a2, 0.626_794_919_243_112_3, max_relative = 1e-13);
    }

    #[test]
    fn indicial_residuals() {
        for model in [interval(0.05), disc(0.05)] {
            let s = LayerSolver::new(model, 12).unwrap();
            let p = s.problem(3.0, 1).or_else(|_| s.problem(3.0, 0)).unwrap();
            let (_, a2) = indicial_roots(&p).unwrap();
            assert!(p.indicial(a2).abs() < 1e-12 * p.series.a[1].abs());
        }
    }

    #[test]
    fn first_neumann_coefficient() {
        let s = LayerSolver::new(interval(0.05), 12).unwrap();
        let lam = 7.5;
        let c = series_coefficients(&s.problem(lam, 0).unwrap(), 0.0, 12).unwrap();
        assert_relative_eq!(c[1], (3.0 - 2.0 * 3f64.sqrt()) * lam, max_relative = 1e-12);
    }

    #[test]
    fn zero_lambda_gives_constant() {
        for model in [interval(0.05), disc(0.05)] {
            let s = LayerSolver::new(model, 12).unwrap();
            let c = series_coefficients(&s.problem(0.0, 0).unwrap(), 0.0, 12).unwrap();
            assert_eq!(c[0], 1.0);
            assert!(c[1..].iter().all(|&v| v == 0.0));
            let (u, du) = s.edge_values(0.0, 0, BoundaryKind::Neumann).unwrap();
            assert_eq!((u, du), (1.0, 0.0));
        }
    }

    #[test]
    fn general_recurrence_reproduces_interval_recurrence() {
        let m = IntervalModel::new(0.05).unwrap();
        let s = LayerSolver::new(CoefficientModel::Interval(m.clone()), 16).unwrap();
        let p = s.problem(12.0, 0).unwrap();
        let (_, a2) = indicial_roots(&p).unwrap();
        for alpha in [0.0, a2] {
            let g = series_coefficients(&p, alpha, 16).unwrap();
            let r = interval_recurrence(&m, 12.0, alpha, 16);
            for (x, y) in g.iter().zip(&r) {
                assert!((x - y).abs() <= 1e-12 * x.abs().max(1e-300), "{x} vs {y}");
            }
        }
    }

    #[test]
    fn truncated_series_residual_is_small() {
        let s = LayerSolver::new(interval(0.05), 12).unwrap();
        let sol = s.frobenius(10.0, 0, BoundaryKind::Neumann).unwrap();
        let tau = 0.3 * 0.05;
        let res = series_residual(&sol, s.model(), tau).unwrap();
        let lead = 10.0 * sol.eval_offset(tau, 0).unwrap();
        assert!(res.abs() < 1e-6 * lead.abs(), "{res} vs {lead}");
    }

    #[test]
    fn continuation_is_independent_of_truncation() {
        for model in [interval(0.05), disc(0.05)] {
            let a = LayerSolver::new(model.clone(), 12).unwrap();
            let b = LayerSolver::new(model, 20).unwrap();
            for kind in [BoundaryKind::Neumann, BoundaryKind::Dirichlet] {
                let nu = if a.series.domain == Domain::Disc { 2 } else { 0 };
                let (u1, d1) = a.edge_values(40.0, nu, kind).unwrap();
                let (u2, d2) = b.edge_values(40.0, nu, kind).unwrap();
                assert_relative_eq!(u1, u2, max_relative = 1e-11);
                assert_relative_eq!(d1, d2, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn continuation_matches_series_inside_guard() {
        for j in [20, 30] {
            let s = LayerSolver::new(interval(0.05), j).unwrap();
            let sol = s.solve(25.0, 0, BoundaryKind::Neumann).unwrap();
            // just past the handover, where the series is still far below rounding
            let tau = 1.1 * s.series_radius();
            let direct = sol.frobenius().eval_offset(tau, 0).unwrap();
            assert_relative_eq!(sol.value(tau).unwrap(), direct, max_relative = 1e-12);
            let tau = -1.1 * s.series_radius();
            if tau <= s.boundary_offset() {
                continue;
            }
            let direct = sol.frobenius().eval_offset(tau, 1).unwrap();
            assert_relative_eq!(sol.derivative(tau).unwrap(), direct, max_relative = 1e-10);
        }
    }

    #[test]
    fn guard_is_enforced() {
        let s = LayerSolver::new(interval(0.05), 12).unwrap();
        let sol = s.frobenius(1.0, 0, BoundaryKind::Neumann).unwrap();
        assert!(matches!(eval_series(&sol, sol.center + 2.0 * sol.guard, 0), Err(Error::DivergenceRisk { .. })));
        let dir = s.frobenius(1.0, 0, BoundaryKind::Dirichlet).unwrap();
        assert!(matches!(eval_series(&dir, dir.center, 1), Err(Error::SingularPoint(_))));
        assert_eq!(eval_series(&dir, dir.center, 0).unwrap(), 0.0);
        assert_eq!(eval_series(&sol, sol.center, 0).unwrap(), 1.0);
    }

    #[test]
    fn dirichlet_quasi_derivative_tends_to_one() {
        for model in [interval(0.05), disc(0.05)] {
            let s = LayerSolver::new(model.clone(), 12).unwrap();
            let sol = s.frobenius(5.0, 0, BoundaryKind::Dirichlet).unwrap();
            let v = quasi_derivative(&sol, &model, sol.center + 1e-8).unwrap();
            assert!((v - 1.0).abs() < 1e-6, "{v}");
        }
    }

    #[test]
    fn neumann_quasi_derivative_decays() {
        let model = interval(0.05);
        let s = LayerSolver::new(model.clone(), 12).unwrap();
        let sol = s.frobenius(5.0, 0, BoundaryKind::Neumann).unwrap();
        let vals: Vec<f64> =
            [1e-4, 1e-6, 1e-8].iter().map(|o| quasi_derivative(&sol, &model, sol.center + o).unwrap().abs()).collect();
        assert!(vals[0] > vals[1] && vals[1] > vals[2]);
        let zero = s.frobenius(0.0, 0, BoundaryKind::Neumann).unwrap();
        assert_eq!(quasi_derivative(&zero, &model, zero.center + 1e-4).unwrap(), 0.0);
    }

    #[test]
    fn disc_series_coefficients_scale_like_inverse_eps() {
        let s = LayerSolver::new(disc(0.05), 12).unwrap();
        let ser = s.series();
        for j in 1..10 {
            let scaled = ser.a[j] * 0.05f64.powi(j as i32);
            assert!(scaled.abs() < 50.0, "a_{j} eps^j = {scaled}");
        }
        let (_, a2) = indicial_roots(&s.problem(1.0, 0).unwrap()).unwrap();
        assert!((a2 - 1.0).abs() < 10.0 * 0.05);
    }
}
