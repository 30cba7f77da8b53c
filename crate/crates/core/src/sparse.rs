//! Compressed sparse row storage and the handful of kernels the spectral code needs.

use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;

use crate::error::{invalid, Error, Result};

/// Row-major sparse matrix with sorted column indices in each row.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    offsets: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    pub fn new(nrows: usize, ncols: usize, offsets: Vec<usize>, indices: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        if offsets.len() != nrows + 1 || offsets[0] != 0 || offsets[nrows] != indices.len() {
            return invalid("row offsets do not describe the index array");
        }
        if indices.len() != values.len() {
            return invalid("index and value arrays differ in length");
        }
        for i in 0..nrows {
            if offsets[i] > offsets[i + 1] {
                return invalid("row offsets decrease");
            }
            let row = &indices[offsets[i]..offsets[i + 1]];
            if row.windows(2).any(|w| w[0] >= w[1]) || row.last().is_some_and(|&c| c >= ncols) {
                return invalid(format!("row {i} has unsorted or out-of-range columns"));
            }
        }
        Ok(Self { nrows, ncols, offsets, indices, values })
    }

    /// Builds from per-row `(column, value)` lists; columns are sorted, duplicates summed.
    pub fn from_rows(ncols: usize, rows: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        let nrows = rows.len();
        let mut offsets = Vec::with_capacity(nrows + 1);
        offsets.push(0);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        for mut row in rows {
            row.sort_by_key(|e| e.0);
            for (c, v) in row {
                if indices.len() > *offsets.last().unwrap() && indices.last() == Some(&c) {
                    *values.last_mut().unwrap() += v;
                } else {
                    indices.push(c);
                    values.push(v);
                }
            }
            offsets.push(indices.len());
        }
        Self::new(nrows, ncols, offsets, indices, values)
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.offsets[i]..self.offsets[i + 1];
        (&self.indices[r.clone()], &self.values[r])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        cols.binary_search(&j).map_or(0.0, |k| vals[k])
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |i| {
            let (c, v) = self.row(i);
            c.iter().zip(v).map(move |(&j, &x)| (i, j, x))
        })
    }

    /// `y = A x`
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(y.len(), self.nrows);
        for (i, yi) in y.iter_mut().enumerate() {
            let (c, v) = self.row(i);
            *yi = c.iter().zip(v).map(|(&j, &a)| a * x[j]).sum();
        }
    }

    /// `y = A^T x`
    pub fn matvec_transpose(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.nrows);
        assert_eq!(y.len(), self.ncols);
        y.fill(0.0);
        for (i, &xi) in x.iter().enumerate() {
            let (c, v) = self.row(i);
            for (&j, &a) in c.iter().zip(v) {
                y[j] += a * xi;
            }
        }
    }

    pub fn transpose(&self) -> Self {
        let mut counts = vec![0usize; self.ncols + 1];
        for &j in &self.indices {
            counts[j + 1] += 1;
        }
        for j in 0..self.ncols {
            counts[j + 1] += counts[j];
        }
        let offsets = counts.clone();
        let mut next = counts;
        let mut indices = vec![0; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for (i, j, v) in self.triplets() {
            let slot = next[j];
            indices[slot] = i;
            values[slot] = v;
            next[j] += 1;
        }
        Self { nrows: self.ncols, ncols: self.nrows, offsets, indices, values }
    }

    /// `A^T A`, accumulated row by row of `A`.
    pub fn gram(&self) -> Self {
        let n = self.ncols;
        let t = self.transpose();
        let mut acc = vec![0.0; n];
        let mut mark = vec![usize::MAX; n];
        let mut rows = Vec::with_capacity(n);
        for j in 0..n {
            // row j of A^T A = sum over rows i of A containing column j
            let mut touched = Vec::new();
            let (ti, tv) = t.row(j);
            for (&i, &aij) in ti.iter().zip(tv) {
                let (c, v) = self.row(i);
                for (&k, &aik) in c.iter().zip(v) {
                    if mark[k] != j {
                        mark[k] = j;
                        acc[k] = 0.0;
                        touched.push(k);
                    }
                    acc[k] += aij * aik;
                }
            }
            touched.sort_unstable();
            rows.push(touched.iter().map(|&k| (k, acc[k])).collect());
        }
        Self::from_rows(n, rows).expect("gram pattern is well formed")
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// `||A - A^T||_F / ||A||_F`
    pub fn asymmetry(&self) -> f64 {
        let norm = self.frobenius_norm();
        if norm == 0.0 {
            return 0.0;
        }
        let mut s = 0.0;
        for (i, j, v) in self.triplets() {
            let d = v - self.get(j, i);
            s += d * d;
        }
        // entries present only in the transpose pattern
        let t = self.transpose();
        for (i, j, v) in t.triplets() {
            if self.row(i).0.binary_search(&j).is_err() {
                s += v * v;
            }
        }
        s.sqrt() / norm
    }

    /// `alpha I + beta A` as a dense matrix.
    pub fn to_dense_shifted(&self, alpha: f64, beta: f64) -> Mat<f64> {
        let mut m = Mat::<f64>::zeros(self.nrows, self.ncols);
        for i in 0..self.nrows.min(self.ncols) {
            m[(i, i)] = alpha;
        }
        for (i, j, v) in self.triplets() {
            m[(i, j)] += beta * v;
        }
        m
    }

    /// `alpha I + beta A` in compressed sparse column form.
    pub fn to_faer_shifted(&self, alpha: f64, beta: f64) -> Result<SparseColMat<usize, f64>> {
        let mut trip: Vec<Triplet<usize, usize, f64>> =
            self.triplets().map(|(i, j, v)| Triplet::new(i, j, beta * v)).collect();
        if alpha != 0.0 {
            trip.extend((0..self.nrows.min(self.ncols)).map(|i| Triplet::new(i, i, alpha)));
        }
        SparseColMat::try_new_from_triplets(self.nrows, self.ncols, &trip)
            .map_err(|e| Error::NumericalFailure(format!("sparse assembly: {e:?}")))
    }

    /// `(A + A^T) / 2`
    pub fn symmetric_part(&self) -> Self {
        let t = self.transpose();
        let rows = (0..self.nrows)
            .map(|i| {
                let (c, v) = self.row(i);
                let (ct, vt) = t.row(i);
                c.iter().zip(v).chain(ct.iter().zip(vt)).map(|(&j, &x)| (j, 0.5 * x)).collect()
            })
            .collect();
        Self::from_rows(self.ncols, rows).expect("symmetric part pattern is well formed")
    }

    /// `alpha I + beta A` in this storage.
    pub fn shifted(&self, alpha: f64, beta: f64) -> Self {
        let rows = (0..self.nrows)
            .map(|i| {
                let (c, v) = self.row(i);
                let mut r: Vec<(usize, f64)> = c.iter().zip(v).map(|(&j, &x)| (j, beta * x)).collect();
                if i < self.ncols {
                    r.push((i, alpha));
                }
                r
            })
            .collect();
        Self::from_rows(self.ncols, rows).expect("shifted pattern is well formed")
    }
}
