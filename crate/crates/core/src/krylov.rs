//! Restarted block Krylov eigensolver for the largest-magnitude eigenvalues of an operator.
//!
//! Paired with shift-invert this finds the eigenvalues of a sparse matrix closest to a shift.
//! Each cycle grows a block Krylov basis with two-pass classical Gram-Schmidt, forms the
//! projected matrix `V^T (T V)` explicitly and restarts from the wanted Ritz vectors.

use faer::linalg::solvers::SolveCore;
use faer::sparse::linalg::solvers::Lu;
use faer::sparse::SparseColMat;
use faer::{c64, Conj, Mat, MatMut, Side};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};

pub const DEFAULT_SEED: u64 = 0x11e5_eed5;

/// A linear map applied to a column-major block of `cols` vectors of length `dim()`.
pub trait BlockOperator {
    fn dim(&self) -> usize;
    fn apply(&self, block: &mut [f64], cols: usize) -> Result<()>;
}

/// `(A - sigma I)^{-1}` through a sparse LU factorization.
pub struct ShiftInvert {
    n: usize,
    lu: Lu<usize, f64>,
}

impl ShiftInvert {
    /// Factorizes `shifted`, which must already hold `A - sigma I`.
    pub fn new(shifted: &SparseColMat<usize, f64>) -> Result<Self> {
        if shifted.nrows() != shifted.ncols() {
            return invalid("shift-invert needs a square matrix");
        }
        let lu = shifted.sp_lu().map_err(|e| Error::NumericalFailure(format!("sparse LU: {e:?}")))?;
        Ok(Self { n: shifted.nrows(), lu })
    }
}

impl BlockOperator for ShiftInvert {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, block: &mut [f64], cols: usize) -> Result<()> {
        let rhs = MatMut::from_column_major_slice_mut(block, self.n, cols);
        self.lu.solve_in_place_with_conj(Conj::No, rhs);
        if block.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::NumericalFailure("shift-invert produced non-finite values".into()))
        }
    }
}

/// Solver settings. `block` Ritz vectors are carried between restarts, of which `nev` are
/// required to converge.
#[derive(Clone, Debug)]
pub struct KrylovOptions {
    pub nev: usize,
    pub block: usize,
    pub depth: usize,
    pub tol: f64,
    pub max_restarts: usize,
    pub seed: u64,
    pub symmetric: bool,
}

impl KrylovOptions {
    pub fn new(nev: usize) -> Self {
        Self {
            nev,
            block: nev + (nev / 2).max(4),
            depth: 3,
            tol: 1e-10,
            max_restarts: 300,
            seed: DEFAULT_SEED,
            symmetric: false,
        }
    }

    pub fn symmetric(mut self, yes: bool) -> Self {
        self.symmetric = yes;
        self
    }
}

/// Ritz value `theta` with the real and imaginary parts of its unit Ritz vector.
#[derive(Clone, Debug)]
pub struct RitzPair {
    pub value: c64,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
    pub residual: f64,
}

#[derive(Clone, Debug)]
pub struct KrylovOutcome {
    pub pairs: Vec<RitzPair>,
    pub restarts: usize,
    pub applications: usize,
    /// Largest relative residual among the wanted pairs after each cycle.
    pub log: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Orthogonalizes `z` against `basis` and `locked` twice, then normalizes.
/// Returns `false` when `z` is numerically in their span.
fn orthonormalize_against(z: &mut [f64], basis: &[Vec<f64>], locked: &[Vec<f64>]) -> bool {
    let before = norm(z);
    if before == 0.0 {
        return false;
    }
    for _ in 0..2 {
        for q in locked.iter().chain(basis) {
            let c = dot(q, z);
            axpy(-c, q, z);
        }
    }
    let after = norm(z);
    if after <= 1e-10 * before {
        return false;
    }
    z.iter_mut().for_each(|v| *v /= after);
    true
}

fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

/// Appends the columns of `block` to `basis` after orthonormalization, replacing
/// dependent columns with fresh random directions.
fn extend_basis(basis: &mut Vec<Vec<f64>>, block: Vec<Vec<f64>>, locked: &[Vec<f64>], rng: &mut ChaCha8Rng, n: usize) {
    for mut z in block {
        let mut tries = 0;
        while !orthonormalize_against(&mut z, basis, locked) {
            tries += 1;
            assert!(tries < 50, "cannot extend Krylov basis");
            z = random_vector(rng, n);
        }
        basis.push(z);
    }
}

/// Largest-magnitude eigenpairs of `op`, restricted to the orthogonal complement of the
/// orthonormal vectors in `locked`.
pub fn largest_magnitude<O: BlockOperator + ?Sized>(
    op: &O,
    opts: &KrylovOptions,
    locked: &[Vec<f64>],
) -> Result<KrylovOutcome> {
    let n = op.dim();
    if opts.nev == 0 || opts.block < opts.nev || opts.depth == 0 {
        return invalid("Krylov options need 1 <= nev <= block and depth >= 1");
    }
    let room = n.saturating_sub(locked.len());
    if opts.block * (opts.depth + 1) > room {
        return invalid(format!(
            "basis of {} vectors does not fit dimension {room}; use a dense solver",
            opts.block * (opts.depth + 1)
        ));
    }
    let b = opts.block;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut start: Vec<Vec<f64>> = (0..b).map(|_| random_vector(&mut rng, n)).collect();
    let mut log = Vec::new();
    let mut applications = 0;

    for restart in 0..opts.max_restarts {
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(b * (opts.depth + 1));
        let mut images: Vec<Vec<f64>> = Vec::with_capacity(b * (opts.depth + 1));
        extend_basis(&mut basis, std::mem::take(&mut start), locked, &mut rng, n);
        let mut lo = 0;
        for level in 0..=opts.depth {
            let hi = basis.len();
            let cols = hi - lo;
            let mut buf = Vec::with_capacity(n * cols);
            for q in &basis[lo..hi] {
                buf.extend_from_slice(q);
            }
            op.apply(&mut buf, cols)?;
            applications += cols;
            let block: Vec<Vec<f64>> = buf.chunks_exact(n).map(|c| c.to_vec()).collect();
            images.extend(block.iter().cloned());
            if level < opts.depth {
                extend_basis(&mut basis, block, locked, &mut rng, n);
            }
            lo = hi;
        }

        let m = basis.len();
        let h = Mat::<f64>::from_fn(m, m, |i, j| dot(&basis[i], &images[j]));
        let (values, vectors) = small_eigen(&h, opts.symmetric)?;
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&i, &j| values[j].norm().total_cmp(&values[i].norm()).then(i.cmp(&j)));

        let mut pairs = Vec::with_capacity(b);
        for &k in order.iter().take(b) {
            let theta = values[k];
            let mut yr = vec![0.0; n];
            let mut yi = vec![0.0; n];
            let mut tr = vec![0.0; n];
            let mut ti = vec![0.0; n];
            for j in 0..m {
                let s = vectors[(j, k)];
                axpy(s.re, &basis[j], &mut yr);
                axpy(s.im, &basis[j], &mut yi);
                axpy(s.re, &images[j], &mut tr);
                axpy(s.im, &images[j], &mut ti);
            }
            let ny = (dot(&yr, &yr) + dot(&yi, &yi)).sqrt();
            // (T - theta) y with complex theta
            let mut rr = 0.0;
            for i in 0..n {
                let er = tr[i] - (theta.re * yr[i] - theta.im * yi[i]);
                let ei = ti[i] - (theta.re * yi[i] + theta.im * yr[i]);
                rr += er * er + ei * ei;
            }
            let residual = rr.sqrt() / (theta.norm() * ny).max(f64::MIN_POSITIVE);
            yr.iter_mut().chain(yi.iter_mut()).for_each(|v| *v /= ny);
            pairs.push(RitzPair { value: theta, re: yr, im: yi, residual });
        }
        let worst = pairs[..opts.nev].iter().map(|p| p.residual).fold(0.0, f64::max);
        log.push(worst);
        if worst <= opts.tol {
            pairs.truncate(opts.nev);
            return Ok(KrylovOutcome { pairs, restarts: restart, applications, log });
        }
        for p in &pairs {
            if start.len() == b {
                break;
            }
            if p.value.im < 0.0 {
                // the conjugate partner contributes both parts
                continue;
            }
            start.push(p.re.clone());
            if p.value.im > 0.0 && start.len() < b {
                start.push(p.im.clone());
            }
        }
        while start.len() < b {
            start.push(random_vector(&mut rng, n));
        }
    }
    Err(Error::ConvergenceFailure { iterations: opts.max_restarts, log })
}

/// Eigenvalues and eigenvectors (columns) of a small dense matrix.
fn small_eigen(h: &Mat<f64>, symmetric: bool) -> Result<(Vec<c64>, Mat<c64>)> {
    let m = h.nrows();
    if symmetric {
        let s = Mat::<f64>::from_fn(m, m, |i, j| 0.5 * (h[(i, j)] + h[(j, i)]));
        let evd = s
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::NumericalFailure(format!("projected eigenproblem: {e:?}")))?;
        let vals = (0..m).map(|i| c64::new(evd.S()[i], 0.0)).collect();
        let u = evd.U();
        Ok((vals, Mat::from_fn(m, m, |i, j| c64::new(u[(i, j)], 0.0))))
    } else {
        let evd = h.eigen().map_err(|e| Error::NumericalFailure(format!("projected eigenproblem: {e:?}")))?;
        let vals = (0..m).map(|i| evd.S()[i]).collect();
        Ok((vals, evd.U().to_owned()))
    }
}
