//! Regularized LLE weights and the bottom spectrum of `(I - W) / eps^2`.

use std::io::{BufRead, Write};
use std::str::FromStr;

use faer::Side;

use crate::error::{invalid, Error, Result};
use crate::exec::{try_map_range, Execution};
use crate::krylov::{largest_magnitude, KrylovOptions, ShiftInvert, DEFAULT_SEED};
use crate::sampling::{neighborhoods_with, NeighborhoodIndex, PointCloud};
use crate::sparse::CsrMatrix;
use crate::Domain;

/// Point counts above this use the sparse solver by default.
pub const DENSE_LIMIT: usize = 4000;

/// Barycentric weights of point `j` from its neighbors, regularized by `c`.
///
/// Solves `(G^T G + c I) z = 1` through the `d x d` system of the Woodbury identity,
/// `z = (1 - G^T (c I + G G^T)^{-1} G 1) / c`, then rescales to unit sum.
pub fn local_weights(cloud: &PointCloud, nbrs: &NeighborhoodIndex, j: usize, c: f64) -> Result<Vec<f64>> {
    let idx = nbrs.neighbors(j);
    if idx.is_empty() {
        return Err(Error::IsolatedPoint { index: j });
    }
    if !(c > 0.0) {
        return invalid(format!("regularizer must be positive, got {c}"));
    }
    let d = cloud.dim();
    let xj = cloud.point(j);
    let mut small = [[0.0; 2]; 2];
    let mut g1 = [0.0; 2];
    for &i in idx {
        let xi = cloud.point(i);
        for a in 0..d {
            let ga = xi[a] - xj[a];
            g1[a] += ga;
            for b in 0..d {
                small[a][b] += ga * (xi[b] - xj[b]);
            }
        }
    }
    for (a, row) in small.iter_mut().enumerate().take(d) {
        row[a] += c;
    }
    let y =
        solve_spd_small(&small, &g1, d).ok_or_else(|| Error::NumericalFailure(format!("local system at point {j}")))?;
    let mut w: Vec<f64> = idx
        .iter()
        .map(|&i| {
            let xi = cloud.point(i);
            let gy: f64 = (0..d).map(|a| (xi[a] - xj[a]) * y[a]).sum();
            (1.0 - gy) / c
        })
        .collect();
    let total: f64 = w.iter().sum();
    if !(total.is_finite() && total != 0.0) {
        return Err(Error::NumericalFailure(format!("weights at point {j} do not normalize")));
    }
    w.iter_mut().for_each(|v| *v /= total);
    // push the rounding defect into the largest weight
    let defect = 1.0 - w.iter().sum::<f64>();
    let big = (0..w.len()).max_by(|&a, &b| w[a].abs().total_cmp(&w[b].abs())).unwrap();
    w[big] += defect;
    Ok(w)
}

/// Cholesky solve of a 1x1 or 2x2 symmetric positive definite system.
fn solve_spd_small(m: &[[f64; 2]; 2], rhs: &[f64; 2], d: usize) -> Option<[f64; 2]> {
    match d {
        1 => (m[0][0] > 0.0).then(|| [rhs[0] / m[0][0], 0.0]),
        2 => {
            let l11 = m[0][0].sqrt();
            let l21 = m[1][0] / l11;
            let s = m[1][1] - l21 * l21;
            if !(l11 > 0.0 && s > 0.0) {
                return None;
            }
            let l22 = s.sqrt();
            let y0 = rhs[0] / l11;
            let y1 = (rhs[1] - l21 * y0) / l22;
            let x1 = y1 / l22;
            let x0 = (y0 - l21 * x1) / l11;
            Some([x0, x1])
        }
        _ => None,
    }
}

/// Default regularizer `n * eps^(d + 3)`.
pub fn default_regularizer(n: usize, eps: f64, dim: usize) -> f64 {
    n as f64 * eps.powi(dim as i32 + 3)
}

/// Row-stochastic LLE matrix.
#[derive(Clone, Debug)]
pub struct WeightMatrix {
    w: CsrMatrix,
    eps: f64,
    c: f64,
    domain: Domain,
}

impl WeightMatrix {
    pub fn new(w: CsrMatrix, eps: f64, c: f64, domain: Domain) -> Result<Self> {
        if w.nrows() != w.ncols() {
            return invalid("weight matrix must be square");
        }
        Ok(Self { w, eps, c, domain })
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.w
    }

    pub fn n(&self) -> usize {
        self.w.nrows()
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn regularizer(&self) -> f64 {
        self.c
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    /// `max_j |sum_i W_ji - 1|`
    pub fn row_sum_defect(&self) -> f64 {
        (0..self.n()).map(|j| (self.w.row(j).1.iter().sum::<f64>() - 1.0).abs()).fold(0.0, f64::max)
    }

    /// `||(I - W) 1||_inf`
    pub fn kernel_residual(&self) -> f64 {
        let ones = vec![1.0; self.n()];
        let mut y = vec![0.0; self.n()];
        self.w.matvec(&ones, &mut y);
        y.iter().map(|v| (1.0 - v).abs()).fold(0.0, f64::max)
    }

    /// `||W - W^T||_F / ||W||_F`
    pub fn asymmetry(&self) -> f64 {
        self.w.asymmetry()
    }

    /// `I - W`
    pub fn laplacian(&self) -> CsrMatrix {
        self.w.shifted(1.0, -1.0)
    }

    /// Writes the header `n nnz epsilon c` and one `row col value` line per entry.
    pub fn write_triplets<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{} {} {:.16e} {:.16e}", self.n(), self.w.nnz(), self.eps, self.c)?;
        for (i, j, v) in self.w.triplets() {
            writeln!(out, "{i} {j} {v:.16e}")?;
        }
        Ok(())
    }

    pub fn read_triplets<R: BufRead>(input: R, domain: Domain) -> Result<Self> {
        let mut lines = input.lines();
        let bad = |m: &str| Error::InvalidArgument(format!("triplet file: {m}"));
        let header = lines.next().ok_or_else(|| bad("missing header"))?.map_err(|e| bad(&e.to_string()))?;
        let h: Vec<&str> = header.split_whitespace().collect();
        if h.len() != 4 {
            return Err(bad("header must be `n nnz epsilon c`"));
        }
        let n: usize = parse(h[0])?;
        let nnz: usize = parse(h[1])?;
        let eps: f64 = parse(h[2])?;
        let c: f64 = parse(h[3])?;
        let mut rows = vec![Vec::new(); n];
        let mut count = 0;
        for line in lines {
            let line = line.map_err(|e| bad(&e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 3 {
                return Err(bad(&format!("malformed entry `{line}`")));
            }
            let (i, j, v): (usize, usize, f64) = (parse(f[0])?, parse(f[1])?, parse(f[2])?);
            if i >= n || j >= n {
                return Err(bad(&format!("entry ({i}, {j}) outside {n} x {n}")));
            }
            rows[i].push((j, v));
            count += 1;
        }
        if count != nnz {
            return Err(bad(&format!("header promises {nnz} entries, found {count}")));
        }
        Self::new(CsrMatrix::from_rows(n, rows)?, eps, c, domain)
    }
}

fn parse<T: FromStr>(s: &str) -> Result<T> {
    s.parse().map_err(|_| Error::InvalidArgument(format!("cannot parse `{s}`")))
}

/// LLE matrix with the default neighborhoods and regularizer.
pub fn build_w(cloud: &PointCloud, eps: f64) -> Result<WeightMatrix> {
    let nbrs = neighborhoods_with(cloud, eps, Execution::default())?;
    build_w_with(cloud, &nbrs, None, Execution::default())
}

/// LLE matrix on precomputed neighborhoods; `c` overrides the default regularizer.
pub fn build_w_with(
    cloud: &PointCloud,
    nbrs: &NeighborhoodIndex,
    c: Option<f64>,
    exec: Execution,
) -> Result<WeightMatrix> {
    let n = cloud.len();
    if nbrs.len() != n {
        return invalid("neighborhood index and cloud differ in size");
    }
    let eps = nbrs.radius();
    let c = c.unwrap_or_else(|| default_regularizer(n, eps, cloud.dim()));
    let rows = try_map_range(exec, n, |j| local_weights(cloud, nbrs, j, c))?;
    let values: Vec<f64> = rows.into_iter().flatten().collect();
    let w = CsrMatrix::new(n, n, nbrs.offsets().to_vec(), nbrs.indices().to_vec(), values)?;
    WeightMatrix::new(w, eps, c, cloud.domain())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverMode {
    /// Full eigendecomposition of `I - W`.
    DenseNonsymmetric,
    /// Shift-invert block Lanczos on `(I - W + (I - W)^T) / 2`.
    SymmetrizedIterative,
    /// Shift-invert block Arnoldi on `I - W`.
    SparseNonsymmetric,
}

impl SolverMode {
    pub fn default_for(n: usize) -> Self {
        if n <= DENSE_LIMIT {
            SolverMode::DenseNonsymmetric
        } else {
            SolverMode::SparseNonsymmetric
        }
    }
}

impl FromStr for SolverMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "dense" | "dense-nonsymmetric" => Ok(SolverMode::DenseNonsymmetric),
            "symmetrized" | "symmetrized-iterative" => Ok(SolverMode::SymmetrizedIterative),
            "sparse" | "sparse-nonsymmetric" => Ok(SolverMode::SparseNonsymmetric),
            _ => invalid(format!("unknown solver mode `{s}`")),
        }
    }
}

impl std::fmt::Display for SolverMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SolverMode::DenseNonsymmetric => "dense-nonsymmetric",
            SolverMode::SymmetrizedIterative => "symmetrized-iterative",
            SolverMode::SparseNonsymmetric => "sparse-nonsymmetric",
        })
    }
}

#[derive(Debug, Clone)]
pub struct SpectrumOptions {
    pub mode: Option<SolverMode>,
    pub vectors: bool,
    /// Shift for the iterative modes, in units of `eps^2`.
    pub shift: f64,
    pub tol: f64,
    pub max_restarts: usize,
    pub seed: u64,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        Self { mode: None, vectors: false, shift: -1.0, tol: 1e-10, max_restarts: 300, seed: DEFAULT_SEED }
    }
}

#[derive(Debug, Clone)]
pub struct SpectrumResult {
    /// Real parts of the eigenvalues of `(I - W) / eps^2`, ascending.
    pub eigenvalues: Vec<f64>,
    /// Matching imaginary parts, scaled the same way.
    pub imaginary: Vec<f64>,
    /// Unit eigenvectors (real parts), one per eigenvalue.
    pub eigenvectors: Option<Vec<Vec<f64>>>,
    pub imag_max: f64,
    pub asymmetry: f64,
    pub mode: SolverMode,
    /// Krylov restarts, zero for the dense mode.
    pub restarts: usize,
}

pub fn spectrum_lle(w: &WeightMatrix, k: usize, mode: SolverMode) -> Result<SpectrumResult> {
    spectrum_lle_with(w, k, &SpectrumOptions { mode: Some(mode), ..Default::default() })
}

pub fn spectrum_lle_with(w: &WeightMatrix, k: usize, opts: &SpectrumOptions) -> Result<SpectrumResult> {
    let n = w.n();
    if k == 0 || k > n {
        return invalid(format!("need 1 <= k <= n = {n}, got k = {k}"));
    }
    let mode = opts.mode.unwrap_or_else(|| SolverMode::default_for(n));
    let scale = 1.0 / (w.eps() * w.eps());
    let asymmetry = w.asymmetry();
    let lap = w.laplacian();
    let krylov = |nev: usize, symmetric: bool| {
        let mut o = KrylovOptions::new(nev).symmetric(symmetric);
        o.tol = opts.tol;
        o.max_restarts = opts.max_restarts;
        o.seed = opts.seed;
        o
    };
    let fits = |o: &KrylovOptions| o.block * (o.depth + 1) <= n;

    let (mut pairs, restarts): (Vec<(f64, f64, Option<Vec<f64>>)>, usize) = match mode {
        SolverMode::DenseNonsymmetric => (dense_nonsymmetric(&lap, opts.vectors)?, 0),
        SolverMode::SymmetrizedIterative | SolverMode::SparseNonsymmetric => {
            let symmetric = mode == SolverMode::SymmetrizedIterative;
            let target = if symmetric { lap.symmetric_part() } else { lap };
            let ko = krylov(k, symmetric);
            if !fits(&ko) {
                if symmetric {
                    (dense_symmetric(&target, opts.vectors)?, 0)
                } else {
                    (dense_nonsymmetric(&target, opts.vectors)?, 0)
                }
            } else {
                let sigma = opts.shift / scale;
                let op = ShiftInvert::new(&target.to_faer_shifted(-sigma, 1.0)?)?;
                let out = largest_magnitude(&op, &ko, &[])?;
                let pairs = out
                    .pairs
                    .into_iter()
                    .map(|p| {
                        let inv = 1.0 / p.value;
                        let v = opts.vectors.then(|| unit(p.re));
                        (sigma + inv.re, inv.im, v)
                    })
                    .collect();
                (pairs, out.restarts)
            }
        }
    };
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    pairs.truncate(k);
    let eigenvalues: Vec<f64> = pairs.iter().map(|p| p.0 * scale).collect();
    let imaginary: Vec<f64> = pairs.iter().map(|p| p.1 * scale).collect();
    let imag_max = imaginary.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let eigenvectors = opts.vectors.then(|| pairs.into_iter().map(|p| p.2.unwrap()).collect());
    Ok(SpectrumResult { eigenvalues, imaginary, eigenvectors, imag_max, asymmetry, mode, restarts })
}

fn unit(mut v: Vec<f64>) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    v
}

type Pair = (f64, f64, Option<Vec<f64>>);

fn dense_nonsymmetric(a: &CsrMatrix, vectors: bool) -> Result<Vec<Pair>> {
    let m = a.to_dense_shifted(0.0, 1.0);
    let fail = |e| Error::NumericalFailure(format!("dense eigensolver: {e:?}"));
    if !vectors {
        let vals = m.eigenvalues().map_err(fail)?;
        return Ok(vals.into_iter().map(|z| (z.re, z.im, None)).collect());
    }
    let evd = m.eigen().map_err(fail)?;
    let (s, u) = (evd.S(), evd.U());
    let n = m.nrows();
    Ok((0..n)
        .map(|j| {
            let re: Vec<f64> = (0..n).map(|i| u[(i, j)].re).collect();
            let im: Vec<f64> = (0..n).map(|i| u[(i, j)].im).collect();
            // pick the better-conditioned real part of the complex vector
            let nre: f64 = re.iter().map(|x| x * x).sum();
            let nim: f64 = im.iter().map(|x| x * x).sum();
            let v = if nre >= nim { re } else { im };
            (s[j].re, s[j].im, Some(unit(v)))
        })
        .collect())
}

fn dense_symmetric(a: &CsrMatrix, vectors: bool) -> Result<Vec<Pair>> {
    let m = a.to_dense_shifted(0.0, 1.0);
    let evd =
        m.self_adjoint_eigen(Side::Lower).map_err(|e| Error::NumericalFailure(format!("dense eigensolver: {e:?}")))?;
    let (s, u) = (evd.S(), evd.U());
    let n = m.nrows();
    Ok((0..n).map(|j| (s[j], 0.0, vectors.then(|| (0..n).map(|i| u[(i, j)]).collect()))).collect())
}

/// Embedding from the `d2` eigenvectors of `(I - W)^T (I - W)` with smallest eigenvalues
/// on the complement of the constant vector. Returns `d2` unit columns of length `n`.
pub fn embed(w: &WeightMatrix, d2: usize) -> Result<Vec<Vec<f64>>> {
    let n = w.n();
    if d2 == 0 || d2 + 1 > n {
        return invalid(format!("embedding dimension {d2} needs 1 <= d2 < n = {n}"));
    }
    let gram = w.laplacian().gram();
    let constant = vec![1.0 / (n as f64).sqrt(); n];
    let mut opts = KrylovOptions::new(d2).symmetric(true);
    let mut cols: Vec<Vec<f64>> = if opts.block * (opts.depth + 1) + 1 <= n && n > 1500 {
        let e4 = w.eps().powi(4);
        let op = ShiftInvert::new(&gram.to_faer_shifted(e4, 1.0)?)?;
        opts.tol = 1e-10;
        let out = largest_magnitude(&op, &opts, std::slice::from_ref(&constant))?;
        out.pairs.into_iter().map(|p| p.re).collect()
    } else {
        let m = gram.to_dense_shifted(0.0, 1.0);
        let evd = m
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::NumericalFailure(format!("dense eigensolver: {e:?}")))?;
        let u = evd.U();
        let overlap = |j: usize| (0..n).map(|i| u[(i, j)] * constant[i]).sum::<f64>().abs();
        let skip = (0..=d2).max_by(|&a, &b| overlap(a).total_cmp(&overlap(b))).unwrap();
        (0..=d2).filter(|&j| j != skip).map(|j| (0..n).map(|i| u[(i, j)]).collect()).collect()
    };
    for c in cols.iter_mut() {
        let proj: f64 = c.iter().zip(&constant).map(|(a, b)| a * b).sum();
        c.iter_mut().zip(&constant).for_each(|(a, b)| *a -= proj * b);
        *c = unit(std::mem::take(c));
    }
    Ok(cols)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{grid_disc, grid_interval, neighborhoods, neighborhoods_brute_force};
    use faer::Mat;

    /// Cholesky solve of the full `k x k` local system, as an oracle for the Woodbury path.
    fn cholesky_weights(cloud: &PointCloud, nbrs: &NeighborhoodIndex, j: usize, c: f64) -> Vec<f64> {
        let idx = nbrs.neighbors(j);
        let k = idx.len();
        let xj = cloud.point(j);
        let g: Vec<Vec<f64>> =
            idx.iter().map(|&i| cloud.point(i).iter().zip(xj).map(|(a, b)| a - b).collect()).collect();
        let m = Mat::<f64>::from_fn(k, k, |a, b| {
            g[a].iter().zip(&g[b]).map(|(x, y)| x * y).sum::<f64>() + if a == b { c } else { 0.0 }
        });
        let llt = m.llt(Side::Lower).unwrap();
        let mut rhs = Mat::<f64>::from_fn(k, 1, |_, _| 1.0);
        use faer::linalg::solvers::Solve;
        llt.solve_in_place(&mut rhs);
        let z: Vec<f64> = (0..k).map(|i| rhs[(i, 0)]).collect();
        let s: f64 = z.iter().sum();
        z.iter().map(|v| v / s).collect()
    }

    fn line(points: &[f64], eps: f64) -> (PointCloud, NeighborhoodIndex) {
        let cloud = PointCloud::from_coords(Domain::Interval, points.to_vec(), 0.1).unwrap();
        let nbrs = neighborhoods_brute_force(&cloud, eps).unwrap();
        (cloud, nbrs)
    }

    #[test]
    fn single_neighbor_gets_full_weight() {
        let (cloud, nbrs) = line(&[0.0, 0.1], 0.15);
        assert_eq!(local_weights(&cloud, &nbrs, 0, 1e-6).unwrap(), vec![1.0]);
    }

    #[test]
    fn symmetric_neighbors_split_evenly() {
        let (cloud, nbrs) = line(&[0.4, 0.5, 0.6], 0.15);
        let w = local_weights(&cloud, &nbrs, 1, 1e-6).unwrap();
        assert!((w[0] - 0.5).abs() < 1e-14 && (w[1] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn two_by_two_explicit_solve() {
        let c = 1e-6;
        let (cloud, nbrs) = line(&[0.4, 0.5, 0.7], 0.25);
        let w = local_weights(&cloud, &nbrs, 1, c).unwrap();
        // [[0.01 + c, -0.02], [-0.02, 0.04 + c]] z = 1 by Cramer's rule
        let (a, b, d) = (0.01 + c, -0.02, 0.04 + c);
        let det = a * d - b * b;
        let z = [(d - b) / det, (a - b) / det];
        let s = z[0] + z[1];
        assert!((w[0] - z[0] / s).abs() < 1e-9, "{w:?}");
        assert!((w[1] - z[1] / s).abs() < 1e-9);
    }

    #[test]
    fn woodbury_matches_cholesky() {
        let cloud = grid_disc(41).unwrap();
        let eps = 0.2;
        let nbrs = neighborhoods(&cloud, eps).unwrap();
        let c = default_regularizer(cloud.len(), eps, 2);
        for j in (0..cloud.len()).step_by(37) {
            let a = local_weights(&cloud, &nbrs, j, c).unwrap();
            let b = cholesky_weights(&cloud, &nbrs, j, c);
            let scale = b.iter().map(|v| v.abs()).fold(0.0, f64::max);
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() < 1e-9 * scale, "point {j}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn regularizer_formula() {
        let c = default_regularizer(101, 0.05, 1);
        assert!((c - 6.3125e-4).abs() < 1e-17);
    }

    #[test]
    fn interval_rows_are_stochastic() {
        let cloud = grid_interval(101).unwrap();
        let w = build_w(&cloud, 0.05).unwrap();
        assert!((w.regularizer() - 6.3125e-4).abs() < 1e-17);
        assert!(w.row_sum_defect() < 1e-12);
        assert!(w.kernel_residual() < 1e-12);
    }

    #[test]
    fn disc_pattern_matches_brute_force() {
        let cloud = grid_disc(61).unwrap();
        let eps = 0.1;
        let w = build_w(&cloud, eps).unwrap();
        let brute = neighborhoods_brute_force(&cloud, eps).unwrap();
        for j in 0..cloud.len() {
            assert_eq!(w.matrix().row(j).0, brute.neighbors(j));
        }
        assert!(w.kernel_residual() < 1e-12);
    }

    #[test]
    fn sequential_and_parallel_rows_agree() {
        let cloud = grid_disc(51).unwrap();
        let nbrs = neighborhoods(&cloud, 0.12).unwrap();
        let a = build_w_with(&cloud, &nbrs, None, Execution::Sequential).unwrap();
        let b = build_w_with(&cloud, &nbrs, None, Execution::Parallel).unwrap();
        assert_eq!(a.matrix(), b.matrix());
    }

    #[test]
    fn triplet_round_trip() {
        let cloud = grid_interval(60).unwrap();
        let w = build_w(&cloud, 0.1).unwrap();
        let mut buf = Vec::new();
        w.write_triplets(&mut buf).unwrap();
        let back = WeightMatrix::read_triplets(std::io::Cursor::new(buf), Domain::Interval).unwrap();
        assert_eq!(back.matrix(), w.matrix());
        assert_eq!(back.eps(), w.eps());
        assert_eq!(back.regularizer(), w.regularizer());
        assert!(WeightMatrix::read_triplets(std::io::Cursor::new("2 1 0.1 0.1\n"), Domain::Interval).is_err());
    }

    #[test]
    fn dense_spectrum_has_constant_kernel() {
        let cloud = grid_interval(300).unwrap();
        let w = build_w(&cloud, 0.05).unwrap();
        let s = spectrum_lle_with(&w, 4, &SpectrumOptions { vectors: true, ..Default::default() }).unwrap();
        assert_eq!(s.mode, SolverMode::DenseNonsymmetric);
        assert!(s.eigenvalues[0].abs() < 1e-10 / (0.05 * 0.05));
        let v = &s.eigenvectors.as_ref().unwrap()[0];
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        let sd = (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / v.len() as f64).sqrt();
        assert!(sd / mean.abs() < 1e-8);
        assert!(s.eigenvalues.windows(2).all(|p| p[0] <= p[1]));
    }

    #[test]
    fn sparse_and_dense_modes_agree() {
        let cloud = grid_interval(400).unwrap();
        let w = build_w(&cloud, 0.05).unwrap();
        let d = spectrum_lle(&w, 6, SolverMode::DenseNonsymmetric).unwrap();
        let s = spectrum_lle(&w, 6, SolverMode::SparseNonsymmetric).unwrap();
        for (a, b) in d.eigenvalues.iter().zip(&s.eigenvalues) {
            assert!((a - b).abs() < 1e-7 * a.abs().max(1.0), "{a} vs {b}");
        }
    }

    #[test]
    fn symmetrized_modes_agree() {
        let cloud = grid_interval(400).unwrap();
        let w = build_w(&cloud, 0.05).unwrap();
        let it = spectrum_lle(&w, 6, SolverMode::SymmetrizedIterative).unwrap();
        let sym = w.laplacian().symmetric_part();
        let mut dense: Vec<f64> = dense_symmetric(&sym, false).unwrap().into_iter().map(|p| p.0 / 0.0025).collect();
        dense.sort_by(f64::total_cmp);
        for (a, b) in it.eigenvalues.iter().zip(&dense) {
            assert!((a - b).abs() < 1e-7 * a.abs().max(1.0), "{a} vs {b}");
        }
        assert!(it.asymmetry > 0.0);
    }

    #[test]
    fn bad_k_is_rejected() {
        let w = build_w(&grid_interval(50).unwrap(), 0.1).unwrap();
        assert!(spectrum_lle(&w, 0, SolverMode::DenseNonsymmetric).is_err());
        assert!(spectrum_lle(&w, 51, SolverMode::DenseNonsymmetric).is_err());
    }

    #[test]
    fn interval_embedding_is_monotone() {
        let cloud = grid_interval(400).unwrap();
        let w = build_w(&cloud, 0.05).unwrap();
        let e = embed(&w, 1).unwrap();
        let mut c = e[0].clone();
        if c[0] > c[c.len() - 1] {
            c.iter_mut().for_each(|v| *v = -*v);
        }
        assert!(c.windows(2).all(|p| p[1] > p[0]));
        let dot: f64 = c.iter().sum::<f64>() / (c.len() as f64).sqrt();
        assert!(dot.abs() < 1e-8);
        assert!(embed(&w, 400).is_err());
    }
}
