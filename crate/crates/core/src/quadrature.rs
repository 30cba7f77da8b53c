//! Quadrature rules: tanh-sinh for endpoint singularities, adaptive
//! Gauss–Kronrod (7/15) and fixed Gauss–Legendre panels for smooth integrands.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::FRAC_PI_2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quad {
    pub value: f64,
    pub error: f64,
    pub evals: usize,
    pub converged: bool,
}

const TS_TMAX: f64 = 6.0;
const TS_MAX_LEVEL: usize = 12;

/// Tanh-sinh rule on `[a, b]`.
///
/// The integrand receives `(x, x - a, b - x)` with both distances computed
/// without cancellation, so it can resolve algebraic endpoint singularities.
pub fn tanh_sinh<F>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Quad
where
    F: Fn(f64, f64, f64) -> f64,
{
    let len = b - a;
    let half = 0.5 * len;
    let mut evals = 0usize;
    let mut eval_at = |t: f64| -> f64 {
        let u = FRAC_PI_2 * t.sinh();
        let da = len / (1.0 + (-2.0 * u).exp());
        let db = len / (1.0 + (2.0 * u).exp());
        let ch = u.cosh();
        let w = half * FRAC_PI_2 * t.cosh() / (ch * ch);
        if w == 0.0 || da == 0.0 || db == 0.0 {
            return 0.0;
        }
        let x = if t < 0.0 { a + da } else { b - db };
        evals += 1;
        w * f(x, da, db)
    };

    let mut h = 1.0;
    let mut sum = eval_at(0.0);
    let n0 = TS_TMAX as i64;
    for k in 1..=n0 {
        sum += eval_at(k as f64) + eval_at(-(k as f64));
    }
    let mut value = sum * h;
    let mut error = f64::INFINITY;
    for _level in 1..=TS_MAX_LEVEL {
        h *= 0.5;
        let m = (TS_TMAX / h) as i64;
        let mut k = 1;
        while k <= m {
            let t = k as f64 * h;
            sum += eval_at(t) + eval_at(-t);
            k += 2;
        }
        let next = sum * h;
        error = (next - value).abs();
        value = next;
        if error <= abs_tol.max(rel_tol * value.abs()) {
            return Quad { value, error, evals, converged: true };
        }
    }
    Quad { value, error, evals, converged: false }
}

/// Node of a fixed tanh-sinh rule: position, distances to both ends, weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TanhSinhNode {
    pub x: f64,
    pub da: f64,
    pub db: f64,
    pub weight: f64,
    /// Index `k` of the abscissa `t = k h`; even indices form the rule with step `2h`.
    pub index: i64,
}

/// Fixed tanh-sinh rule on `[a, b]` with step `h`, for reuse across many integrands.
pub fn tanh_sinh_rule(a: f64, b: f64, h: f64) -> Vec<TanhSinhNode> {
    let len = b - a;
    let half = 0.5 * len;
    let m = (TS_TMAX / h).round() as i64;
    let mut out = Vec::with_capacity(2 * m as usize + 1);
    for k in -m..=m {
        let t = k as f64 * h;
        let u = FRAC_PI_2 * t.sinh();
        let da = len / (1.0 + (-2.0 * u).exp());
        let db = len / (1.0 + (2.0 * u).exp());
        let ch = u.cosh();
        let weight = h * half * FRAC_PI_2 * t.cosh() / (ch * ch);
        if weight == 0.0 || da < 1e-300 || db < 1e-300 {
            continue;
        }
        let x = if t < 0.0 { a + da } else { b - db };
        out.push(TanhSinhNode { x, da, db, weight, index: k });
    }
    out
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

/// One Gauss–Kronrod 7/15 panel: (Kronrod estimate, |Kronrod - Gauss|).
pub fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for i in 0..7 {
        let x = h * XGK[i];
        let s = f(c - x) + f(c + x);
        k += WGK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, o: &Self) -> bool {
        self.error == o.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Segment {
    fn cmp(&self, o: &Self) -> Ordering {
        self.error.total_cmp(&o.error)
    }
}

/// Globally adaptive Gauss–Kronrod quadrature.
pub fn adaptive_gk<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Quad {
    const MAX_SEGMENTS: usize = 4000;
    let (v, e) = gk15(&f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value: v, error: e });
    let (mut total, mut err) = (v, e);
    let mut evals = 15;
    while err > abs_tol.max(rel_tol * total.abs()) {
        if heap.len() >= MAX_SEGMENTS {
            return Quad { value: total, error: err, evals, converged: false };
        }
        let s = heap.pop().expect("nonempty heap");
        let m = 0.5 * (s.a + s.b);
        if m <= s.a || m >= s.b {
            heap.push(s);
            return Quad { value: total, error: err, evals, converged: false };
        }
        let (v1, e1) = gk15(&f, s.a, m);
        let (v2, e2) = gk15(&f, m, s.b);
        evals += 30;
        total += v1 + v2 - s.value;
        err += e1 + e2 - s.error;
        heap.push(Segment { a: s.a, b: m, value: v1, error: e1 });
        heap.push(Segment { a: m, b: s.b, value: v2, error: e2 });
    }
    // Resum to shed accumulated rounding from the running updates.
    let value = heap.iter().map(|s| s.value).sum();
    let error = heap.iter().map(|s| s.error).sum();
    Quad { value, error, evals, converged: true }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        dp = if d != 0.0 { d } else { dp };
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Fixed composite Gauss–Legendre rule with `panels` equal panels.
#[derive(Debug, Clone)]
pub struct CompositeGauss {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl CompositeGauss {
    pub fn new(a: f64, b: f64, panels: usize, order: usize) -> Self {
        let (x, w) = gauss_legendre(order);
        let h = (b - a) / panels as f64;
        let mut nodes = Vec::with_capacity(panels * order);
        let mut weights = Vec::with_capacity(panels * order);
        for p in 0..panels {
            let c = a + (p as f64 + 0.5) * h;
            for (xi, wi) in x.iter().zip(&w) {
                nodes.push(c + 0.5 * h * xi);
                weights.push(0.5 * h * wi);
            }
        }
        CompositeGauss { nodes, weights }
    }

    /// Panels whose widths grow geometrically from `a` (ratio 2), for power-law integrands.
    pub fn graded(a: f64, b: f64, first: f64, order: usize) -> Self {
        let (x, w) = gauss_legendre(order);
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        let mut lo = a;
        let mut width = first.min(b - a);
        while lo < b {
            let hi = (lo + width).min(b);
            let (c, h) = (0.5 * (lo + hi), hi - lo);
            for (xi, wi) in x.iter().zip(&w) {
                nodes.push(c + 0.5 * h * xi);
                weights.push(0.5 * h * wi);
            }
            lo = hi;
            width *= 2.0;
        }
        CompositeGauss { nodes, weights }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_exact_for_polynomials() {
        let (x, w) = gauss_legendre(7);
        for deg in 0..=13 {
            let q: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(deg)).sum();
            let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
            assert!((q - exact).abs() < 1e-14, "degree {deg}: {q} vs {exact}");
        }
    }

    #[test]
    fn gk15_exact_to_degree_22() {
        for deg in 0..=22 {
            let (v, _) = gk15(&|x: f64| x.powi(deg), 0.0, 1.0);
            assert!((v - 1.0 / (deg as f64 + 1.0)).abs() < 1e-14, "degree {deg}");
        }
    }

    #[test]
    fn gauss_embedded_exact_to_degree_13() {
        for deg in 0..=13 {
            let (_, e) = gk15(&|x: f64| x.powi(deg), -1.0, 1.0);
            assert!(e < 1e-14, "degree {deg}: {e}");
        }
    }

    #[test]
    fn adaptive_handles_peaks() {
        let q = adaptive_gk(|x| 1.0 / (1e-4 + (x - 0.3) * (x - 0.3)), 0.0, 1.0, 1e-12, 1e-13);
        let exact = (0.7f64 / 1e-2).atan() / 1e-2 + (0.3f64 / 1e-2).atan() / 1e-2;
        assert!(q.converged);
        assert!((q.value - exact).abs() < 1e-9 * exact);
    }

    #[test]
    fn tanh_sinh_endpoint_singularity() {
        // int_0^1 x^{-0.77} dx = 1/0.23
        let q = tanh_sinh(|_, da, _| da.powf(-0.77), 0.0, 1.0, 1e-13, 1e-13);
        assert!(q.converged, "{q:?}");
        assert!((q.value - 1.0 / 0.23).abs() < 1e-10, "{}", q.value);
    }

    #[test]
    fn tanh_sinh_both_endpoints() {
        // int_0^1 1/sqrt(x(1-x)) = pi
        let q = tanh_sinh(|_, da, db| 1.0 / (da * db).sqrt(), 0.0, 1.0, 1e-13, 1e-14);
        assert!((q.value - std::f64::consts::PI).abs() < 1e-11, "{}", q.value);
    }

    #[test]
    fn graded_panels_power_law() {
        let g = CompositeGauss::graded(1e-6, 1.0, 1e-6, 20);
        let v = g.integrate(|x| x.powf(-1.5));
        let exact = 2.0 * (1e-3f64.recip() - 1.0);
        assert!((v - exact).abs() < 1e-10 * exact);
    }

    #[test]
    fn fixed_rule_matches_adaptive() {
        let rule = tanh_sinh_rule(0.0, 0.3, 1.0 / 32.0);
        let v: f64 = rule.iter().map(|n| n.weight * n.da.powf(-0.627) * (3.0 * n.x).cos()).sum();
        let q = tanh_sinh(|x, da, _| da.powf(-0.627) * (3.0 * x).cos(), 0.0, 0.3, 1e-14, 1e-14);
        assert!((v - q.value).abs() < 1e-12 * q.value.abs(), "{v} vs {}", q.value);
    }
}
