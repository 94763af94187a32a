//! Problem definitions shared by the experiments and their tests.

use crate::densities::{GaussianSpec, RadarSpec};
use crate::error::{Error, Result};
use crate::grids::{make_equidistant_grid, sample_function, DenseTensor, Grid};
use crate::linalg::Matrix;

/// Default spacing of the radar and Gaussian grids.
pub const DEFAULT_STEP: f64 = 0.2;
/// Radar grid extent: `x1` in `[-5, 8]`, `x2` in `[0, 8]`.
pub const RADAR_BOX: [(f64, f64); 2] = [(-5.0, 8.0), (0.0, 8.0)];
/// Half width of the 4-D Gaussian grid `[-4, 4]^4`.
pub const GAUSS_HALF_WIDTH: f64 = 4.0;
/// Correlation coefficient used for every coupled pair.
pub const GAUSS_CORRELATION: f64 = 0.5;
/// Decorrelated grid `[-3, 3]^2` with step 0.1.
pub const TARGET_HALF_WIDTH: f64 = 3.0;
pub const TARGET_STEP: f64 = 0.1;

/// Quadratic-form cases: label and 1-based coupled pairs.
pub const QUADRATIC_CASES: [(&str, &[(usize, usize)]); 9] = [
    ("∅", &[]),
    ("(2,3)", &[(2, 3)]),
    ("(1,2)", &[(1, 2)]),
    ("(1,3)", &[(1, 3)]),
    ("(1,4)", &[(1, 4)]),
    ("(1,2), (3,4)", &[(1, 2), (3, 4)]),
    ("(1,3), (2,4)", &[(1, 3), (2, 4)]),
    ("(1,4), (2,3)", &[(1, 4), (2, 3)]),
    ("full", &[(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)]),
];

/// Expected squeezed ranks for [`QUADRATIC_CASES`].
pub const QUADRATIC_RANKS: [[usize; 5]; 9] = [
    [1, 2, 2, 2, 1],
    [1, 2, 3, 2, 1],
    [1, 3, 2, 2, 1],
    [1, 3, 3, 2, 1],
    [1, 3, 3, 3, 1],
    [1, 3, 2, 3, 1],
    [1, 3, 4, 3, 1],
    [1, 3, 4, 3, 1],
    [1, 3, 4, 3, 1],
];

/// Gaussian cases: the quadratic cases without the fully coupled one.
pub fn gauss_cases() -> &'static [(&'static str, &'static [(usize, usize)])] {
    &QUADRATIC_CASES[..8]
}

/// Expected TT ranks and negative percentages for [`gauss_cases`].
pub const GAUSS_RANKS: [[usize; 5]; 8] = [
    [1, 1, 1, 1, 1],
    [1, 1, 10, 1, 1],
    [1, 10, 1, 1, 1],
    [1, 10, 10, 1, 1],
    [1, 10, 10, 10, 1],
    [1, 10, 1, 10, 1],
    [1, 10, 55, 10, 1],
    [1, 10, 55, 10, 1],
];
pub const GAUSS_NEGATIVE_PERCENT: [f64; 8] = [0.0, 6.42, 6.42, 6.42, 6.42, 12.02, 16.59, 16.59];

/// Number of points of `lo:step:hi`, requiring `step` to divide the range.
pub fn axis_count(lo: f64, hi: f64, step: f64) -> Result<usize> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::InvalidGrid(format!("step {step} must be positive")));
    }
    let cells = (hi - lo) / step;
    let n = cells.round();
    if (cells - n).abs() > 1e-9 * cells.max(1.0) || n < 1.0 {
        return Err(Error::InvalidGrid(format!(
            "step {step} does not divide [{lo}, {hi}]"
        )));
    }
    Ok(n as usize + 1)
}

fn box_grid(bounds: &[(f64, f64)], step: f64) -> Result<Grid> {
    let starts: Vec<f64> = bounds.iter().map(|b| b.0).collect();
    let counts = bounds
        .iter()
        .map(|&(lo, hi)| axis_count(lo, hi, step))
        .collect::<Result<Vec<_>>>()?;
    make_equidistant_grid(&starts, &vec![step; bounds.len()], &counts)
}

pub fn radar_grid(step: f64) -> Result<Grid> {
    box_grid(&RADAR_BOX, step)
}

pub fn gauss_grid(step: f64) -> Result<Grid> {
    box_grid(&[(-GAUSS_HALF_WIDTH, GAUSS_HALF_WIDTH); 4], step)
}

pub fn target_grid(step: f64, half_width: f64) -> Result<Grid> {
    box_grid(&[(-half_width, half_width); 2], step)
}

/// Radar density sampled on its grid. The grid contains the origin, where
/// the bearing is taken as zero.
pub fn radar_tensor(spec: &RadarSpec, grid: &Grid) -> Result<DenseTensor> {
    spec.validate()?;
    sample_function(grid, |x| spec.density(x[0], x[1]))
}

/// Unit-variance covariance with `rho` on the given 1-based pairs.
pub fn pair_covariance(d: usize, pairs: &[(usize, usize)], rho: f64) -> Result<Matrix> {
    let mut q = Matrix::identity(d, d);
    for &(a, b) in pairs {
        if a == 0 || b == 0 || a > d || b > d || a == b {
            return Err(Error::InvalidArgument(format!(
                "pair ({a},{b}) invalid for {d} axes"
            )));
        }
        q[(a - 1, b - 1)] = rho;
        q[(b - 1, a - 1)] = rho;
    }
    Ok(q)
}

/// Zero-mean Gaussian with unit variances and correlation `rho` on `pairs`.
pub fn gaussian_tensor(grid: &Grid, pairs: &[(usize, usize)], rho: f64) -> Result<DenseTensor> {
    let spec = GaussianSpec::centered(pair_covariance(grid.ndim(), pairs, rho)?)?;
    sample_function(grid, |x| spec.density(x))
}

/// 2-D correlated Gaussian on axes `pair` (1-based), constant along all other axes.
pub fn pair_factor_tensor(grid: &Grid, pair: (usize, usize), rho: f64) -> Result<DenseTensor> {
    let spec = GaussianSpec::centered(pair_covariance(2, &[(1, 2)], rho)?)?;
    let (a, b) = (pair.0 - 1, pair.1 - 1);
    if a >= grid.ndim() || b >= grid.ndim() {
        return Err(Error::InvalidArgument(format!(
            "pair {pair:?} outside {} axes",
            grid.ndim()
        )));
    }
    sample_function(grid, |x| spec.density(&[x[a], x[b]]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_shapes() {
        assert_eq!(radar_grid(DEFAULT_STEP).unwrap().shape(), vec![66, 41]);
        assert_eq!(gauss_grid(DEFAULT_STEP).unwrap().shape(), vec![41; 4]);
        assert_eq!(
            target_grid(TARGET_STEP, TARGET_HALF_WIDTH).unwrap().shape(),
            vec![61, 61]
        );
        assert_eq!(radar_grid(0.5).unwrap().shape(), vec![27, 17]);
        assert!(radar_grid(0.3).is_err());
        assert!(radar_grid(-0.2).is_err());
    }

    #[test]
    fn covariance_from_pairs() {
        let q = pair_covariance(3, &[(1, 3)], 0.5).unwrap();
        assert_eq!(q[(0, 2)], 0.5);
        assert_eq!(q[(2, 0)], 0.5);
        assert_eq!(q[(0, 1)], 0.0);
        assert!(pair_covariance(3, &[(0, 1)], 0.5).is_err());
        assert!(pair_covariance(3, &[(2, 2)], 0.5).is_err());
    }
}
