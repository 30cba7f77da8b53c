//! Uniform grids on the unit interval and unit disc, and fixed-radius neighborhoods.

use crate::error::{invalid, Error, Result};
use crate::exec::{map_range, Execution};
use crate::Domain;

/// Pairs closer than this fraction of `eps^2` in squared distance are neighbors.
/// Lattice pairs at exactly `eps` are excluded even when rounding puts them a
/// hair inside.
const TIE_FRACTION: f64 = 1.0 - 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    domain: Domain,
    coords: Vec<f64>,
    spacing: f64,
}

impl PointCloud {
    pub fn from_coords(domain: Domain, coords: Vec<f64>, spacing: f64) -> Result<Self> {
        if coords.len() % domain.dim() != 0 {
            return invalid("coordinate count is not a multiple of the dimension");
        }
        Ok(PointCloud { domain, coords, spacing })
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn point(&self, i: usize) -> &[f64] {
        let d = self.dim();
        &self.coords[i * d..(i + 1) * d]
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim())
    }
}

/// `n` equally spaced points on `[0, 1]`, endpoints included.
pub fn grid_interval(n: usize) -> Result<PointCloud> {
    if n < 2 {
        return invalid(format!("interval grid needs n >= 2, got {n}"));
    }
    let m = (n - 1) as f64;
    let coords = (0..n).map(|i| i as f64 / m).collect();
    Ok(PointCloud { domain: Domain::Interval, coords, spacing: 1.0 / m })
}

/// Points of the `m x m` lattice on `[-1, 1]^2` inside the closed unit disc.
pub fn grid_disc(m: usize) -> Result<PointCloud> {
    if m < 2 {
        return invalid(format!("disc grid needs m >= 2, got {m}"));
    }
    let k = (m - 1) as i64;
    let kf = k as f64;
    let mut coords = Vec::new();
    for i in 0..m as i64 {
        let a = 2 * i - k;
        for j in 0..m as i64 {
            let b = 2 * j - k;
            // exact integer membership test: |(a, b)| <= k
            if a * a + b * b <= k * k {
                coords.push(a as f64 / kf);
                coords.push(b as f64 / kf);
            }
        }
    }
    Ok(PointCloud { domain: Domain::Disc, coords, spacing: 2.0 / kf })
}

/// Symmetric fixed-radius adjacency in compressed row form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeighborhoodIndex {
    offsets: Vec<usize>,
    indices: Vec<usize>,
    radius_bits: u64,
}

impl NeighborhoodIndex {
    fn from_lists(lists: Vec<Vec<usize>>, radius: f64) -> Self {
        let mut offsets = Vec::with_capacity(lists.len() + 1);
        offsets.push(0);
        let mut indices = Vec::with_capacity(lists.iter().map(Vec::len).sum());
        for l in lists {
            indices.extend_from_slice(&l);
            offsets.push(indices.len());
        }
        NeighborhoodIndex { offsets, indices, radius_bits: radius.to_bits() }
    }

    pub fn radius(&self) -> f64 {
        f64::from_bits(self.radius_bits)
    }

    pub fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Sorted neighbor indices of point `i`.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.indices[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn total_pairs(&self) -> usize {
        self.indices.len()
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    /// Checks `i in N(j) <=> j in N(i)`.
    pub fn is_symmetric(&self) -> bool {
        (0..self.len()).all(|i| self.neighbors(i).iter().all(|&j| self.neighbors(j).binary_search(&i).is_ok()))
    }
}

fn within(a: &[f64], b: &[f64], r2: f64) -> bool {
    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    d2 > 0.0 && d2 < r2
}

fn check_radius(cloud: &PointCloud, eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return invalid(format!("radius {eps} outside (0, 1)"));
    }
    if cloud.is_empty() {
        return invalid("empty point cloud");
    }
    Ok(())
}

fn finish(lists: Vec<Vec<usize>>, eps: f64) -> Result<NeighborhoodIndex> {
    if let Some(i) = lists.iter().position(Vec::is_empty) {
        return Err(Error::IsolatedPoint { index: i });
    }
    Ok(NeighborhoodIndex::from_lists(lists, eps))
}

pub fn neighborhoods(cloud: &PointCloud, eps: f64) -> Result<NeighborhoodIndex> {
    neighborhoods_with(cloud, eps, Execution::default())
}

/// Uniform-bucket search with cell size `eps`.
pub fn neighborhoods_with(cloud: &PointCloud, eps: f64, exec: Execution) -> Result<NeighborhoodIndex> {
    check_radius(cloud, eps)?;
    let dim = cloud.dim();
    let (lo, hi) = bounds(cloud);
    let cells: Vec<usize> = (0..dim).map(|k| ((hi[k] - lo[k]) / eps).floor() as usize + 1).collect();
    let cell_of = |p: &[f64]| -> Vec<usize> {
        (0..dim).map(|k| (((p[k] - lo[k]) / eps).floor() as usize).min(cells[k] - 1)).collect()
    };
    let flat = |c: &[usize]| -> usize { c.iter().zip(&cells).fold(0, |acc, (ci, n)| acc * n + ci) };
    let ncell: usize = cells.iter().product();

    // counting sort of points by cell
    let mut start = vec![0usize; ncell + 1];
    let keys: Vec<usize> = cloud.points().map(|p| flat(&cell_of(p))).collect();
    for &k in &keys {
        start[k + 1] += 1;
    }
    for c in 0..ncell {
        start[c + 1] += start[c];
    }
    let mut fill = start.clone();
    let mut order = vec![0usize; keys.len()];
    for (i, &k) in keys.iter().enumerate() {
        order[fill[k]] = i;
        fill[k] += 1;
    }

    let r2 = eps * eps * TIE_FRACTION;
    let lists = map_range(exec, cloud.len(), |i| {
        let p = cloud.point(i);
        let c = cell_of(p);
        let mut out = Vec::new();
        let mut visit = |cc: &[usize]| {
            let k = flat(cc);
            for &j in &order[start[k]..start[k + 1]] {
                if within(p, cloud.point(j), r2) {
                    out.push(j);
                }
            }
        };
        match dim {
            1 => {
                for a in c[0].saturating_sub(1)..=(c[0] + 1).min(cells[0] - 1) {
                    visit(&[a]);
                }
            }
            _ => {
                for a in c[0].saturating_sub(1)..=(c[0] + 1).min(cells[0] - 1) {
                    for b in c[1].saturating_sub(1)..=(c[1] + 1).min(cells[1] - 1) {
                        visit(&[a, b]);
                    }
                }
            }
        }
        out.sort_unstable();
        out
    });
    finish(lists, eps)
}

fn bounds(cloud: &PointCloud) -> (Vec<f64>, Vec<f64>) {
    let dim = cloud.dim();
    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    for p in cloud.points() {
        for k in 0..dim {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    (lo, hi)
}

/// All-pairs reference search, quadratic in the point count.
pub fn neighborhoods_brute_force(cloud: &PointCloud, eps: f64) -> Result<NeighborhoodIndex> {
    check_radius(cloud, eps)?;
    let r2 = eps * eps * TIE_FRACTION;
    let lists = (0..cloud.len())
        .map(|i| (0..cloud.len()).filter(|&j| within(cloud.point(i), cloud.point(j), r2)).collect())
        .collect();
    finish(lists, eps)
}

/// `n * eps^dim`; neighborhoods stay populated only when this is large.
pub fn supercriticality(n: usize, eps: f64, dim: usize) -> f64 {
    n as f64 * eps.powi(dim as i32)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_grids() {
        assert_eq!(grid_interval(2).unwrap().coords(), &[0.0, 1.0]);
        assert_eq!(grid_interval(3).unwrap().coords(), &[0.0, 0.5, 1.0]);
        let g = grid_interval(5).unwrap();
        assert_eq!(g.coords(), &[0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(g.spacing(), 0.25);
        assert!(matches!(grid_interval(1), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn disc_grids() {
        assert_eq!(grid_disc(3).unwrap().len(), 5);
        assert_eq!(grid_disc(2).unwrap().len(), 0);
        assert!(grid_disc(1).is_err());
        let g = grid_disc(401).unwrap();
        // direct enumeration with floating coordinates
        let h = 2.0 / 400.0;
        let mut count = 0;
        for i in 0..401 {
            for j in 0..401 {
                let (x, y) = (-1.0 + i as f64 * h, -1.0 + j as f64 * h);
                if x * x + y * y <= 1.0 + 1e-12 {
                    count += 1;
                }
            }
        }
        assert_eq!(g.len(), count);
        let expect = std::f64::consts::PI * 401.0 * 401.0 / 4.0;
        assert!((g.len() as f64 - expect).abs() < 0.01 * expect);
        assert!(g.points().all(|p| p[0] * p[0] + p[1] * p[1] <= 1.0 + 1e-15));
    }

    #[test]
    fn interval_neighbors() {
        let g = grid_interval(11).unwrap();
        let nb = neighborhoods(&g, 0.15).unwrap();
        assert_eq!(nb.neighbors(5), &[4, 6]);
        assert_eq!(nb.neighbors(0), &[1]);
    }

    #[test]
    fn interior_neighbor_count() {
        let g = grid_interval(101).unwrap();
        let nb = neighborhoods(&g, 0.055).unwrap();
        assert_eq!(nb.neighbors(50).len(), 2 * 5);
    }

    #[test]
    fn exact_ties_excluded() {
        let g = grid_interval(21).unwrap();
        let nb = neighborhoods(&g, 0.1).unwrap();
        assert_eq!(nb.neighbors(10), &[9, 11]);
    }

    #[test]
    fn disc_matches_brute_force() {
        let g = grid_disc(41).unwrap();
        let a = neighborhoods(&g, 0.12).unwrap();
        let b = neighborhoods_brute_force(&g, 0.12).unwrap();
        assert_eq!(a, b);
        assert!(a.is_symmetric());
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let g = grid_disc(61).unwrap();
        let a = neighborhoods_with(&g, 0.1, Execution::Sequential).unwrap();
        let b = neighborhoods_with(&g, 0.1, Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn isolated_point_reported() {
        let g = grid_interval(5).unwrap();
        assert!(matches!(neighborhoods(&g, 0.2), Err(Error::IsolatedPoint { index: 0 })));
        assert!(neighborhoods(&g, 0.0).is_err());
    }

    #[test]
    fn supercriticality_value() {
        assert!((supercriticality(2000, 0.05, 1) - 100.0).abs() < 1e-12);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(24))]
            #[test]
            fn bucket_equals_brute_force(m in 5usize..40, eps in 0.08f64..0.6) {
                let g = grid_disc(m).unwrap();
                let a = neighborhoods(&g, eps);
                let b = neighborhoods_brute_force(&g, eps);
                prop_assert_eq!(a.clone(), b);
                if let Ok(nb) = a {
                    prop_assert!(nb.is_symmetric());
                    for i in 0..nb.len() {
                        for &j in nb.neighbors(i) {
                            let d: f64 = g.point(i).iter().zip(g.point(j)).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
                            prop_assert!(d > 0.0 && d < eps);
                        }
                    }
                }
            }

            #[test]
            fn interval_symmetry(n in 3usize..300, eps in 0.01f64..0.9) {
                let g = grid_interval(n).unwrap();
                if let Ok(nb) = neighborhoods(&g, eps) {
                    prop_assert!(nb.is_symmetric());
                }
            }
        }
    }
}
