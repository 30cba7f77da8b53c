//! Coefficients of the limiting operator on the interval and on the disc.
//!
//! Interval: `phi2 u'' + phi1 u' = lambda u` on `[0, 1]`, degenerate at `x0` and `1 - x0`.
//! Disc: radial equation written in the depth variable `t = 1 - r`,
//! `phi22 u_tt - b u_t - nu^2 d u = lambda u` with `b = phi11/(1-t) + phi2`
//! and `d = phi11/(1-t)^2`, degenerate at `t = r0`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_8, PI};

use crate::error::{Error, Result};
use crate::jet::TaylorJet;
use crate::quadrature::{adaptive_gk, tanh_sinh};
use crate::roots::bisect;
use crate::Domain;

pub const SQRT3: f64 = 1.732_050_807_568_877_2;
pub const DEFAULT_EPS_MAX: f64 = 0.1;

/// Largest jet order accepted by [`taylor_jet`].
pub const MAX_JET_ORDER: usize = 60;

fn check_eps(eps: f64, eps_max: f64) -> Result<()> {
    if !(eps > 0.0 && eps <= eps_max) {
        return Err(Error::ModelError(format!("epsilon {eps} outside (0, {eps_max}]")));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Interval
// ---------------------------------------------------------------------------

/// `(phi1(x), phi2(x))` on `[0, 1]`.
pub fn phi_interval(x: f64, eps: f64) -> (f64, f64) {
    let left = |y: f64| (-6.0 * (1.0 - y) / (1.0 + y).powi(3), (1.0 - 4.0 * y + y * y) / 12.0);
    if x <= eps {
        left(x / eps)
    } else if x >= 1.0 - eps {
        let (p1, p2) = left((1.0 - x) / eps);
        (-p1, p2)
    } else {
        (0.0, -1.0 / 6.0)
    }
}

/// Jets of `(phi1, phi2)` from the left-layer formulas.
pub fn interval_jets(center: f64, eps: f64, order: usize) -> Result<(TaylorJet, TaylorJet)> {
    let y = TaylorJet::affine(center, order, center / eps, 1.0 / eps);
    let phi2 = (&(&y * &y) - &y.scale(4.0)).add_scalar(1.0).scale(1.0 / 12.0);
    let one_plus = y.add_scalar(1.0);
    let phi1 = (-&y).add_scalar(1.0).scale(-6.0).checked_div(&one_plus.powi(3))?;
    Ok((phi1, phi2))
}

#[derive(Debug, Clone)]
pub struct IntervalModel {
    eps: f64,
    x0: f64,
    gamma: f64,
    log_g_eps: f64,
    log_dirichlet: f64,
}

impl IntervalModel {
    pub fn new(eps: f64) -> Result<Self> {
        Self::with_eps_max(eps, DEFAULT_EPS_MAX)
    }

    pub fn with_eps_max(eps: f64, eps_max: f64) -> Result<Self> {
        check_eps(eps, eps_max)?;
        let x0 = (2.0 - SQRT3) * eps;
        let gamma = (4.0 + 2.0 * SQRT3) * eps;
        if gamma >= 1.0 {
            return Err(Error::ModelError(format!("degeneracy exponent {gamma} is not below 1; epsilon too large")));
        }
        let mut m = IntervalModel { eps, x0, gamma, log_g_eps: 0.0, log_dirichlet: 0.0 };
        m.log_g_eps = m.log_abs_g(eps);
        m.log_dirichlet = m.log_g_regular(x0) - m.log_g_eps - 6f64.ln();
        Ok(m)
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    /// Exponent `(4 + 2 sqrt 3) eps` of `p` at the degenerate points.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn phi(&self, x: f64) -> (f64, f64) {
        phi_interval(x, self.eps)
    }

    /// `phi2(x0 + s)` in left-layer form, accurate for small `s`.
    pub fn phi2_offset(&self, s: f64) -> f64 {
        s * (s - 2.0 * SQRT3 * self.eps) / (12.0 * self.eps * self.eps)
    }

    /// `log|g| - gamma log|x - x0|`, analytic near `x0`.
    fn log_g_regular(&self, x: f64) -> f64 {
        let e = self.eps;
        let u = e + x;
        (4.0 - 2.0 * SQRT3) * e * (x - 4.0 * e + self.x0).abs().ln() - 8.0 * e * u.ln()
            + 12.0 * e * e * e / (u * u)
            + 12.0 * e * e / u
    }

    fn log_abs_g(&self, x: f64) -> f64 {
        self.gamma * (x - self.x0).abs().ln() + self.log_g_regular(x)
    }

    /// Limit constant `K` in `p(x0 + s) ~ K s^gamma`.
    pub fn dirichlet_constant(&self) -> f64 {
        self.log_dirichlet.exp()
    }

    /// `p(x0 + s)` for the left layer, `s` in `[-x0, eps - x0]`.
    pub fn p_offset(&self, s: f64) -> f64 {
        if s == 0.0 {
            return 0.0;
        }
        let x = self.x0 + s;
        let lg = self.gamma * s.abs().ln() + self.log_g_regular(x) - self.log_g_eps;
        s.signum() * lg.exp() / 6.0
    }

    /// `w(x0 + s)` for the left layer.
    pub fn w_offset(&self, s: f64) -> Result<f64> {
        if s == 0.0 {
            return Err(Error::SingularPoint(format!("w is unbounded at x0 = {}", self.x0)));
        }
        Ok(-self.p_offset(s) / self.phi2_offset(s))
    }

    fn to_left(&self, x: f64) -> Option<f64> {
        if x <= self.eps {
            Some(x)
        } else if x >= 1.0 - self.eps {
            Some(1.0 - x)
        } else {
            None
        }
    }

    pub fn p(&self, x: f64) -> f64 {
        match self.to_left(x) {
            Some(y) => self.p_offset(y - self.x0),
            None => 1.0 / 6.0,
        }
    }

    /// `(p(x), w(x))`.
    pub fn sturm_liouville(&self, x: f64) -> Result<(f64, f64)> {
        match self.to_left(x) {
            Some(y) => {
                let s = y - self.x0;
                Ok((self.p_offset(s), self.w_offset(s)?))
            }
            None => Ok((1.0 / 6.0, 1.0)),
        }
    }

    /// Coefficients of `phi2` about `x0`: `[0, a1, a2]`.
    pub fn series_a(&self) -> [f64; 3] {
        let e = self.eps;
        [0.0, -1.0 / (12f64.sqrt() * e), 1.0 / (12.0 * e * e)]
    }

    /// Coefficients `b_0..=b_order` of `phi1` about `x0`.
    pub fn series_b(&self, order: usize) -> Vec<f64> {
        let k = 3.0 - SQRT3;
        (0..=order)
            .map(|j| {
                let jf = j as f64;
                let sign = if j % 2 == 0 { -1.0 } else { 1.0 };
                6.0 * sign * self.eps.powi(-(j as i32)) * (jf * jf + SQRT3 * jf + SQRT3 - 1.0) / k.powi(j as i32 + 3)
            })
            .collect()
    }
}

/// `(p(x), w(x))` on the interval.
pub fn sturm_liouville_interval(x: f64, eps: f64) -> Result<(f64, f64)> {
    IntervalModel::new(eps)?.sturm_liouville(x)
}

// ---------------------------------------------------------------------------
// Disc
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sigmas {
    pub s0: f64,
    pub s12: f64,
    pub s2: f64,
    pub s22: f64,
    pub s3: f64,
    pub s32: f64,
}

impl Sigmas {
    const OUTSIDE: Sigmas = Sigmas { s0: PI, s12: 0.0, s2: FRAC_PI_4, s22: FRAC_PI_4, s3: 0.0, s32: 0.0 };

    /// `(phi11, phi22, phi2)` and the shared denominator.
    fn phis(&self) -> ((f64, f64, f64), f64) {
        let den = self.s12 * self.s12 - self.s22 * self.s0;
        let p11 = 0.5 * (self.s22 * self.s2 - self.s3 * self.s12) / den;
        let p22 = 0.5 * (self.s22 * self.s22 - self.s32 * self.s12) / den;
        ((p11, p22, self.s12 / den), den)
    }
}

/// Sigma functions at depth `t`; they depend on `t / eps` only.
pub fn sigma(t: f64, eps: f64) -> Sigmas {
    if t >= eps {
        return Sigmas::OUTSIDE;
    }
    let y = t / eps;
    // 1 - y^2 formed from (eps - t) to keep precision next to the layer edge
    let om = (eps - t) / eps;
    let q = om * (2.0 - om);
    let sq = q.sqrt();
    let asn = y.asin();
    let y2 = y * y;
    Sigmas {
        s0: FRAC_PI_2 + y * sq + asn,
        s12: -2.0 / 3.0 * q * sq,
        s2: FRAC_PI_8 + (y * sq * (5.0 - 2.0 * y2) + 3.0 * asn) / 12.0,
        s22: FRAC_PI_8 + (y * sq * (2.0 * y2 - 1.0) + asn) / 4.0,
        s3: -2.0 / 15.0 * q * q * sq,
        s32: -2.0 / 15.0 * (2.0 + 3.0 * y2) * q * sq,
    }
}

/// `(phi11(t), phi22(t), phi2(t))`.
pub fn phi_disc(t: f64, eps: f64) -> Result<(f64, f64, f64)> {
    let (phis, den) = sigma(t, eps).phis();
    if den == 0.0 || !den.is_finite() {
        return Err(Error::NumericalFailure(format!("sigma denominator vanishes at t = {t}")));
    }
    Ok(phis)
}

fn phi_disc_raw(t: f64, eps: f64) -> (f64, f64, f64) {
    sigma(t, eps).phis().0
}

#[derive(Debug, Clone)]
pub struct SigmaJets {
    pub s0: TaylorJet,
    pub s12: TaylorJet,
    pub s2: TaylorJet,
    pub s22: TaylorJet,
    pub s3: TaylorJet,
    pub s32: TaylorJet,
}

/// Jets of the sigma functions at `center`, which must satisfy `|center| < eps`.
pub fn sigma_jets(center: f64, eps: f64, order: usize) -> Result<SigmaJets> {
    if !(center.abs() < eps) {
        return Err(Error::DomainError(format!("sigma jets need |t/eps| < 1, got t/eps = {}", center / eps)));
    }
    let y = TaylorJet::affine(center, order, center / eps, 1.0 / eps);
    let om = TaylorJet::affine(center, order, (eps - center) / eps, -1.0 / eps);
    let q = &om * &(-&om).add_scalar(2.0);
    let sq = q.sqrt()?;
    let asn = y.asin_with(&q)?;
    let y2 = &y * &y;
    let ysq = &y * &sq;
    let qsq = &q * &sq;
    Ok(SigmaJets {
        s0: (&ysq + &asn).add_scalar(FRAC_PI_2),
        s12: qsq.scale(-2.0 / 3.0),
        s2: (&(&ysq * &y2.scale(-2.0).add_scalar(5.0)) + &asn.scale(3.0)).scale(1.0 / 12.0).add_scalar(FRAC_PI_8),
        s22: (&(&ysq * &y2.scale(2.0).add_scalar(-1.0)) + &asn).scale(0.25).add_scalar(FRAC_PI_8),
        s3: (&q * &qsq).scale(-2.0 / 15.0),
        s32: (&y2.scale(3.0).add_scalar(2.0) * &qsq).scale(-2.0 / 15.0),
    })
}

#[derive(Debug, Clone)]
pub struct DiscJets {
    pub phi11: TaylorJet,
    pub phi22: TaylorJet,
    pub phi2: TaylorJet,
}

impl DiscJets {
    pub fn new(center: f64, eps: f64, order: usize) -> Result<Self> {
        let s = sigma_jets(center, eps, order)?;
        let den = &(&s.s12 * &s.s12) - &(&s.s22 * &s.s0);
        let phi11 = (&(&s.s22 * &s.s2) - &(&s.s3 * &s.s12)).scale(0.5).checked_div(&den)?;
        let phi22 = (&(&s.s22 * &s.s22) - &(&s.s32 * &s.s12)).scale(0.5).checked_div(&den)?;
        let phi2 = s.s12.checked_div(&den)?;
        Ok(DiscJets { phi11, phi22, phi2 })
    }

    /// `phi11/(1-t) + phi2`.
    pub fn first_order(&self) -> Result<TaylorJet> {
        let c = self.phi11.center();
        let one_minus = TaylorJet::affine(c, self.phi11.order(), 1.0 - c, -1.0);
        Ok(&self.phi11.checked_div(&one_minus)? + &self.phi2)
    }

    /// `phi11/(1-t)^2`.
    pub fn zeroth_order(&self) -> Result<TaylorJet> {
        let c = self.phi11.center();
        let one_minus = TaylorJet::affine(c, self.phi11.order(), 1.0 - c, -1.0);
        self.phi11.checked_div(&(&one_minus * &one_minus))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoefficientSelector {
    Phi11,
    Phi22,
    Phi2,
    /// `phi11/(1-t) + phi2`
    FirstOrder,
    /// `phi11/(1-t)^2`
    ZerothOrder,
}

/// Jet of a disc coefficient about `center` in the depth variable.
pub fn taylor_jet(sel: CoefficientSelector, center: f64, eps: f64, order: usize) -> Result<TaylorJet> {
    if order > MAX_JET_ORDER {
        return Err(Error::InvalidArgument(format!("jet order {order} above {MAX_JET_ORDER}")));
    }
    let j = DiscJets::new(center, eps, order)?;
    Ok(match sel {
        CoefficientSelector::Phi11 => j.phi11,
        CoefficientSelector::Phi22 => j.phi22,
        CoefficientSelector::Phi2 => j.phi2,
        CoefficientSelector::FirstOrder => j.first_order()?,
        CoefficientSelector::ZerothOrder => j.zeroth_order()?,
    })
}

/// Root of `phi22` expressed as `r0 / eps`, identical for every `eps`.
pub fn r0_over_eps() -> Result<f64> {
    let f = |y: f64| phi_disc_raw(y, 1.0).1;
    let (lo, hi) = (0.0, 1.0 - 1e-12);
    let (flo, fhi) = (f(lo), f(hi));
    if !(flo > 0.0 && fhi < 0.0) {
        return Err(Error::ModelError(format!(
            "phi22 has no sign change on the layer: phi22(0) = {flo}, phi22(eps) = {fhi}"
        )));
    }
    let mut y = bisect(|y| Ok(f(y)), lo, hi, flo, 0.0)?;
    // Newton polish from jets
    for _ in 0..3 {
        let j = DiscJets::new(y, 1.0, 1)?.phi22;
        let step = j.coeffs()[0] / j.coeffs()[1];
        if !step.is_finite() || step.abs() > 1e-10 {
            break;
        }
        y -= step;
    }
    Ok(y)
}

/// `(r0, phi22'(r0), zeta)` where `zeta` is the exponent of `p` at the degenerate circle.
pub fn find_r0(eps: f64) -> Result<(f64, f64, f64)> {
    let m = DiscModel::new(eps)?;
    Ok((m.r0, m.a1, m.zeta))
}

const H_JET_ORDER: usize = 44;

#[derive(Debug, Clone)]
pub struct DiscModel {
    eps: f64,
    r0: f64,
    a1: f64,
    b0: f64,
    zeta: f64,
    /// Regular part of `b/phi22` about `r0`: `b/phi22 = -zeta/(t-r0) + h(t)`.
    h_jet: TaylorJet,
    /// Jet of `phi22/(t - r0)` about `r0`.
    phi22_over_tau: TaylorJet,
    jet_radius: f64,
    /// `int_{r0}^{eps} h`
    h_integral: f64,
}

impl DiscModel {
    pub fn new(eps: f64) -> Result<Self> {
        Self::with_eps_max(eps, DEFAULT_EPS_MAX)
    }

    pub fn with_eps_max(eps: f64, eps_max: f64) -> Result<Self> {
        check_eps(eps, eps_max)?;
        let r0 = r0_over_eps()? * eps;
        let jets = DiscJets::new(r0, eps, H_JET_ORDER + 2)?;
        let a1 = jets.phi22.coeffs()[1];
        let b = jets.first_order()?;
        let b0 = b.value();
        if a1 == 0.0 || b0 == 0.0 {
            return Err(Error::ModelError("degenerate circle is not a simple root".into()));
        }
        let phi22_over_tau = TaylorJet::from_coeffs(r0, jets.phi22.coeffs()[1..].to_vec());
        let quotient = b.truncate(phi22_over_tau.order()).checked_div(&phi22_over_tau)?;
        let zeta = -quotient.value();
        let h_jet = TaylorJet::from_coeffs(r0, quotient.coeffs()[1..].to_vec());
        if !(zeta > 0.0 && zeta < 1.0) {
            return Err(Error::ModelError(format!("exponent of p at r0 is {zeta}, outside (0, 1)")));
        }
        let mut m =
            DiscModel { eps, r0, a1, b0, zeta, h_jet, phi22_over_tau, jet_radius: 0.25 * (eps - r0), h_integral: 0.0 };
        m.h_integral = m.h_tail(r0 + m.jet_radius)? + m.h_jet_integral(m.jet_radius);
        m.check_layer()?;
        Ok(m)
    }

    fn check_layer(&self) -> Result<()> {
        for i in 0..=400 {
            let t = self.eps * i as f64 / 400.0;
            let s = sigma(t, self.eps);
            let ((p11, _, p2), den) = s.phis();
            if !(den < 0.0) {
                return Err(Error::ModelError(format!("sigma denominator {den} at t = {t}")));
            }
            if !(p11 < 0.0) || p2 < 0.0 {
                return Err(Error::ModelError(format!(
                    "coefficient signs violated at t = {t}: phi11 = {p11}, phi2 = {p2}"
                )));
            }
        }
        Ok(())
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// Degenerate depth `r0` (the degenerate circle has radius `1 - r0`).
    pub fn r0(&self) -> f64 {
        self.r0
    }

    /// `phi22'(r0)` in the depth variable.
    pub fn a1(&self) -> f64 {
        self.a1
    }

    /// `phi11(r0)/(1-r0) + phi2(r0)`.
    pub fn b0(&self) -> f64 {
        self.b0
    }

    /// Exponent of `p` at the degenerate circle: `p ~ sgn(t-r0) |t-r0|^zeta`.
    pub fn zeta(&self) -> f64 {
        self.zeta
    }

    pub fn phi(&self, t: f64) -> Result<(f64, f64, f64)> {
        phi_disc(t, self.eps)
    }

    /// `phi22(r0 + tau)` with no cancellation near `tau = 0`.
    pub fn phi22_offset(&self, tau: f64) -> f64 {
        if tau.abs() <= self.jet_radius {
            tau * crate::jet::horner(self.phi22_over_tau.coeffs(), tau)
        } else {
            phi_disc_raw(self.r0 + tau, self.eps).1
        }
    }

    fn h_direct(&self, t: f64) -> f64 {
        let (p11, p22, p2) = phi_disc_raw(t, self.eps);
        (p11 / (1.0 - t) + p2) / p22 + self.zeta / (t - self.r0)
    }

    fn h_jet_integral(&self, tau: f64) -> f64 {
        self.h_jet.integrate(0.0).eval(self.r0 + tau)
    }

    /// `int_t^eps h` for `t` right of the jet window.
    fn h_tail(&self, t: f64) -> Result<f64> {
        if t >= self.eps {
            return Ok(0.0);
        }
        let q = tanh_sinh(|x, _, _| self.h_direct(x), t, self.eps, 1e-15, 1e-14);
        if !q.converged {
            return Err(Error::SingularPoint(format!("integrating factor quadrature reached only {:e}", q.error)));
        }
        Ok(q.value)
    }

    /// `int_t^eps b/phi22 + zeta log(|t - r0| / (eps - r0))`, which is regular at `r0`.
    fn log_factor(&self, tau: f64) -> Result<f64> {
        let rho = self.jet_radius;
        if tau.abs() <= rho {
            Ok(self.h_integral - self.h_jet_integral(tau))
        } else if tau > rho {
            self.h_tail(self.r0 + tau)
        } else {
            let a = self.r0 + tau;
            let q = adaptive_gk(|x| self.h_direct(x), a, self.r0 - rho, 1e-15, 1e-14);
            if !q.converged {
                return Err(Error::SingularPoint(format!("integrating factor quadrature reached only {:e}", q.error)));
            }
            Ok(self.h_integral - self.h_jet_integral(-rho) + q.value)
        }
    }

    /// `p(1 - r)` at depth `t = r0 + tau`, layer side (`t < eps`).
    pub fn p_offset(&self, tau: f64) -> Result<f64> {
        let t = self.r0 + tau;
        if t >= self.eps {
            return Ok((1.0 - t) / 8.0);
        }
        if tau == 0.0 {
            return Ok(0.0);
        }
        let lf = self.log_factor(tau)?;
        let log_abs = ((1.0 - self.eps) / 8.0).ln() + lf + self.zeta * (tau.abs() / (self.eps - self.r0)).ln();
        Ok(tau.signum() * log_abs.exp())
    }

    /// Limit constant `K` in `p ~ K |t - r0|^zeta`.
    pub fn dirichlet_constant(&self) -> f64 {
        (1.0 - self.eps) / 8.0 * (self.h_integral - self.zeta * (self.eps - self.r0).ln()).exp()
    }

    /// `(p, q, w)` at depth `t = r0 + tau`.
    pub fn sturm_liouville_offset(&self, tau: f64) -> Result<(f64, f64, f64)> {
        let t = self.r0 + tau;
        if t >= self.eps {
            let r = 1.0 - t;
            return Ok((r / 8.0, -1.0 / (8.0 * r), r));
        }
        if tau == 0.0 {
            return Err(Error::SingularPoint(format!("q and w are unbounded at r = 1 - r0 = {}", 1.0 - self.r0)));
        }
        let p = self.p_offset(tau)?;
        let p22 = self.phi22_offset(tau);
        let p11 = phi_disc_raw(t, self.eps).0;
        let w = -p / p22;
        let q = w * p11 / ((1.0 - t) * (1.0 - t));
        Ok((p, q, w))
    }

    /// `(p(1-r), q(1-r), w(1-r))`.
    pub fn sturm_liouville(&self, r: f64) -> Result<(f64, f64, f64)> {
        if !(r > 0.0 && r <= 1.0) {
            return Err(Error::DomainError(format!("radius {r} outside (0, 1]")));
        }
        self.sturm_liouville_offset(1.0 - r - self.r0)
    }

    /// The exponent as given by the closed expression
    /// `(phi11(r0) + (1-r0) phi2(r0)) / ((1-r0) phi22'(r0))`, with the derivative
    /// taken in the depth variable. It equals `-zeta`.
    pub fn zeta_closed_form(&self) -> f64 {
        self.b0 / self.a1
    }
}

/// `(p(1-r), q(1-r), w(1-r))` on the disc.
pub fn sturm_liouville_disc(r: f64, eps: f64) -> Result<(f64, f64, f64)> {
    DiscModel::new(eps)?.sturm_liouville(r)
}

#[derive(Debug, Clone)]
pub enum CoefficientModel {
    Interval(IntervalModel),
    Disc(DiscModel),
}

impl CoefficientModel {
    pub fn new(domain: Domain, eps: f64) -> Result<Self> {
        Ok(match domain {
            Domain::Interval => CoefficientModel::Interval(IntervalModel::new(eps)?),
            Domain::Disc => CoefficientModel::Disc(DiscModel::new(eps)?),
        })
    }

    pub fn domain(&self) -> Domain {
        match self {
            CoefficientModel::Interval(_) => Domain::Interval,
            CoefficientModel::Disc(_) => Domain::Disc,
        }
    }

    pub fn eps(&self) -> f64 {
        match self {
            CoefficientModel::Interval(m) => m.eps(),
            CoefficientModel::Disc(m) => m.eps(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn interval_formula_values() {
        let e = 0.05;
        let (p1, p2) = phi_interval(0.0, e);
        assert_eq!((p1, p2), (-6.0, 1.0 / 12.0));
        let (p1, p2) = phi_interval(e, e);
        assert_eq!(p1, 0.0);
        assert!((p2 + 1.0 / 6.0).abs() < 1e-16);
        assert!(phi_interval((2.0 - SQRT3) * e, e).1.abs() < 1e-16);
    }

    #[test]
    fn interval_series_match_jets() {
        let m = IntervalModel::new(0.05).unwrap();
        let (phi1, phi2) = interval_jets(m.x0(), m.eps(), 10).unwrap();
        let a = m.series_a();
        for j in 0..3 {
            assert!((phi2.coeffs()[j] - a[j]).abs() < 1e-12 * a[2]);
        }
        for (j, b) in m.series_b(10).iter().enumerate() {
            assert_relative_eq!(phi1.coeffs()[j], *b, max_relative = 1e-11);
        }
        let b = m.series_b(0)[0];
        assert_relative_eq!(b / a[1], m.gamma(), max_relative = 1e-14);
    }

    #[test]
    fn integrating_factor_solves_its_ode() {
        // g'/g = phi1/phi2
        let m = IntervalModel::new(0.05).unwrap();
        for &x in &[0.001, 0.02, 0.03, 0.045] {
            let h = 1e-7;
            let d = (m.p(x + h).abs().ln() - m.p(x - h).abs().ln()) / (2.0 * h);
            let (p1, p2) = m.phi(x);
            assert_relative_eq!(d, p1 / p2, max_relative = 1e-6);
        }
    }

    #[test]
    fn interval_p_is_continuous_and_signed() {
        let m = IntervalModel::new(0.05).unwrap();
        assert!((m.p(0.05) - 1.0 / 6.0).abs() < 1e-15);
        assert!((m.p(0.95) - 1.0 / 6.0).abs() < 1e-15);
        assert!(m.p(0.5 * m.x0()) < 0.0);
        assert!(m.p(0.02) > 0.0);
        assert_eq!(m.p(m.x0()), 0.0);
        assert!(m.sturm_liouville(m.x0()).is_err());
        let (p, w) = m.sturm_liouville(0.3).unwrap();
        assert_eq!((p, w), (1.0 / 6.0, 1.0));
    }

    #[test]
    fn interval_local_exponent() {
        let m = IntervalModel::new(0.05).unwrap();
        let (s1, s2) = (1e-9, 1e-11);
        let slope = (m.p_offset(s1).ln() - m.p_offset(s2).ln()) / (s1.ln() - s2.ln());
        assert_relative_eq!(slope, m.gamma(), max_relative = 1e-6);
        let k = m.dirichlet_constant();
        assert_relative_eq!(m.p_offset(1e-10) / 1e-10f64.powf(m.gamma()), k, max_relative = 1e-8);
    }

    #[test]
    fn sigma_edge_values() {
        let e = 0.05;
        let s = sigma(0.0, e);
        assert!((s.s0 - FRAC_PI_2).abs() < 1e-15);
        assert!((s.s12 + 2.0 / 3.0).abs() < 1e-15);
        let s = sigma(e * (1.0 - 1e-15), e);
        assert!((s.s2 - FRAC_PI_4).abs() < 1e-6);
        assert!((s.s22 - FRAC_PI_4).abs() < 1e-6);
        assert!(s.s3.abs() < 1e-6);
        assert_eq!(sigma(e, e), Sigmas::OUTSIDE);
    }

    #[test]
    fn disc_phi_properties() {
        let e = 0.05;
        assert_eq!(phi_disc(0.06, e).unwrap(), (-0.125, -0.125, 0.0));
        assert!(phi_disc(0.0, e).unwrap().1 > 0.0);
        let (p11, p22, p2) = phi_disc(0.5 * e, e).unwrap();
        assert_relative_eq!(p11, -0.14710151, max_relative = 1e-7);
        assert_relative_eq!(p22, -0.058695465, max_relative = 1e-7);
        assert_relative_eq!(p2, 0.43342547, max_relative = 1e-7);
    }

    #[test]
    fn r0_is_scale_invariant_and_simple() {
        let (r1, a1, z1) = find_r0(0.05).unwrap();
        let (r2, _, z2) = find_r0(0.01).unwrap();
        assert!((r1 / 0.05 - r2 / 0.01).abs() < 1e-12);
        assert!(phi_disc(r1, 0.05).unwrap().1.abs() < 1e-14);
        assert!(a1 < 0.0);
        assert_relative_eq!(r1 / 0.05, 0.2410526878817631, max_relative = 1e-12);
        assert_relative_eq!(z1, 0.2306101824, max_relative = 1e-8);
        // the exponent is close to, but not exactly, linear in eps
        assert_relative_eq!(z1 / 0.05, z2 / 0.01, max_relative = 1e-2);
        assert!(z1 / 0.05 != z2 / 0.01);
    }

    #[test]
    fn jets_match_direct_evaluation() {
        let e = 0.05;
        for &c in &[0.0, 0.3 * e, 0.9 * e] {
            let j = DiscJets::new(c, e, 6).unwrap();
            let (p11, p22, p2) = phi_disc(c, e).unwrap();
            assert!((j.phi11.value() - p11).abs() < 1e-14);
            assert!((j.phi22.value() - p22).abs() < 1e-14);
            assert!((j.phi2.value() - p2).abs() < 1e-14 * (1.0 + p2.abs()));
        }
    }

    #[test]
    fn phi22_jet_against_finite_differences() {
        let e = 0.05;
        let (r0, _, _) = find_r0(e).unwrap();
        let jet = taylor_jet(CoefficientSelector::Phi22, r0, e, 8).unwrap();
        let h = 1e-5 * e;
        let f = |k: i32| phi_disc(r0 + k as f64 * h, e).unwrap().1;
        let d1 = (f(1) - f(-1)) / (2.0 * h);
        let d2 = (f(1) - 2.0 * f(0) + f(-1)) / (h * h);
        assert_relative_eq!(jet.derivative(1), d1, max_relative = 1e-8);
        assert_relative_eq!(jet.derivative(2), d2, max_relative = 1e-4);
    }

    #[test]
    fn disc_p_outside_layer_is_closed_form() {
        let m = DiscModel::new(0.05).unwrap();
        let (p, q, w) = m.sturm_liouville(0.5).unwrap();
        assert_relative_eq!(p, 0.5 / 8.0, max_relative = 1e-15);
        assert_relative_eq!(q, -1.0 / 4.0, max_relative = 1e-15);
        assert_relative_eq!(w, 0.5, max_relative = 1e-15);
        // continuity of p at the layer edge
        let inside = m.p_offset(m.eps() - m.r0() - 1e-12).unwrap();
        assert_relative_eq!(inside, (1.0 - m.eps()) / 8.0, max_relative = 1e-9);
    }

    #[test]
    fn disc_p_signs_and_exponent() {
        let m = DiscModel::new(0.05).unwrap();
        let r0 = m.r0();
        assert!(m.sturm_liouville(1.0 - 0.5 * r0).unwrap().0 < 0.0);
        let (p, q, w) = m.sturm_liouville(1.0 - 0.5 * (r0 + 0.05)).unwrap();
        assert!(p > 0.0 && q < 0.0 && w > 0.0);
        let (s1, s2) = (1e-9, 1e-11);
        let slope = (m.p_offset(s1).unwrap().ln() - m.p_offset(s2).unwrap().ln()) / (s1.ln() - s2.ln());
        assert_relative_eq!(slope, m.zeta(), max_relative = 1e-5);
        assert_relative_eq!(m.zeta_closed_form(), -m.zeta(), max_relative = 1e-12);
    }

    #[test]
    fn disc_log_factor_consistent_across_windows() {
        // the three evaluation branches must agree where they meet; across the
        // seam the factor moves by -h dt to first order
        let m = DiscModel::new(0.05).unwrap();
        let rho = 0.25 * (m.eps() - m.r0());
        for tau in [rho * (1.0 - 1e-9), -rho * (1.0 - 1e-9)] {
            let dt = tau * 2e-9;
            let a = m.log_factor(tau).unwrap();
            let b = m.log_factor(tau + dt).unwrap();
            let expect = -m.h_direct(m.r0() + tau) * dt;
            assert!((b - a - expect).abs() < 1e-13, "{a} {b} {expect}");
        }
    }
}
