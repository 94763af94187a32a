//! Decorrelating change of coordinates `y = R^{-1}(x - m)` and resampling of
//! gridded densities onto a grid laid out in the new coordinates.

use std::fmt;
use std::str::FromStr;

use nalgebra::{Cholesky, SymmetricEigen};

use crate::error::{Error, Result};
use crate::grids::{estimate_moments, for_each_index, DenseTensor, Grid, MomentEstimate};
use crate::linalg::{condition_number, is_symmetric, singular_values, Matrix};

/// Maps whose root is worse conditioned than this are rejected.
pub const MAX_MAP_CONDITION: f64 = 1e12;

/// Which factor `R` with `R R^T = Q` to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SquareRootKind {
    /// The unique symmetric positive-definite root.
    Symmetric,
    /// Lower-triangular Cholesky factor.
    Cholesky,
    /// Eigenvectors scaled by root eigenvalues, eigenvalues descending.
    Eigen,
}

impl SquareRootKind {
    pub const ALL: [SquareRootKind; 3] = [
        SquareRootKind::Symmetric,
        SquareRootKind::Cholesky,
        SquareRootKind::Eigen,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SquareRootKind::Symmetric => "symmetric",
            SquareRootKind::Cholesky => "cholesky",
            SquareRootKind::Eigen => "eigen",
        }
    }
}

impl fmt::Display for SquareRootKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SquareRootKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "symmetric" => Ok(SquareRootKind::Symmetric),
            "cholesky" => Ok(SquareRootKind::Cholesky),
            "eigen" => Ok(SquareRootKind::Eigen),
            other => Err(Error::InvalidArgument(format!(
                "unknown square root kind '{other}'"
            ))),
        }
    }
}

/// Eigenpairs sorted by descending eigenvalue.
fn sorted_eigen(q: &Matrix) -> (Vec<f64>, Matrix) {
    let eig = SymmetricEigen::new(q.clone());
    let mut order: Vec<usize> = (0..q.nrows()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = eig.eigenvectors.select_columns(order.iter());
    (values, vectors)
}

/// A factor `R` with `R R^T = Q` for a symmetric positive-definite `Q`.
pub fn covariance_square_root(q: &Matrix, kind: SquareRootKind) -> Result<Matrix> {
    if !q.is_square() || q.nrows() == 0 {
        return Err(Error::NotPositiveDefinite(format!("shape {:?}", q.shape())));
    }
    if !is_symmetric(q, 1e-12) {
        return Err(Error::NotPositiveDefinite("matrix is not symmetric".into()));
    }
    let chol = Cholesky::new(q.clone())
        .ok_or_else(|| Error::NotPositiveDefinite("Cholesky failed".into()))?;
    match kind {
        SquareRootKind::Cholesky => Ok(chol.l()),
        SquareRootKind::Symmetric | SquareRootKind::Eigen => {
            let (values, mut vectors) = sorted_eigen(q);
            if values.iter().any(|&v| !(v > 0.0)) {
                return Err(Error::NotPositiveDefinite(format!(
                    "eigenvalues {values:?}"
                )));
            }
            for (j, &lambda) in values.iter().enumerate() {
                let mut col = vectors.column_mut(j);
                let sign = if col[col.iamax()] < 0.0 { -1.0 } else { 1.0 };
                col *= sign * lambda.sqrt();
            }
            if kind == SquareRootKind::Eigen {
                return Ok(vectors);
            }
            // vectors now holds V diag(sqrt(l)); V diag(sqrt(l)) V^T needs the unit V once more.
            let mut unit = vectors.clone();
            for (j, &lambda) in values.iter().enumerate() {
                unit.column_mut(j).unscale_mut(lambda.sqrt());
            }
            let r = &vectors * unit.transpose();
            Ok((&r + r.transpose()) * 0.5)
        }
    }
}

/// Affine map between grid coordinates: `x = m + R y`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridMap {
    mean: Vec<f64>,
    root: Matrix,
    inverse: Matrix,
}

impl GridMap {
    pub fn new(mean: Vec<f64>, root: Matrix) -> Result<Self> {
        let d = mean.len();
        if root.shape() != (d, d) {
            return Err(Error::ShapeMismatch(format!(
                "root {:?} for mean of length {d}",
                root.shape()
            )));
        }
        let cond = condition_number(&root)?;
        if !(cond < MAX_MAP_CONDITION) {
            return Err(Error::Singular(cond));
        }
        let inverse = root.clone().try_inverse().ok_or(Error::Singular(cond))?;
        Ok(GridMap {
            mean,
            root,
            inverse,
        })
    }

    pub fn identity(d: usize) -> Self {
        GridMap {
            mean: vec![0.0; d],
            root: Matrix::identity(d, d),
            inverse: Matrix::identity(d, d),
        }
    }

    /// Map decorrelating a density with the given moments.
    pub fn from_moments(moments: &MomentEstimate, kind: SquareRootKind) -> Result<Self> {
        GridMap::new(
            moments.mean.clone(),
            covariance_square_root(&moments.covariance, kind)?,
        )
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn root(&self) -> &Matrix {
        &self.root
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// `x = m + R y`, written into `x`.
    pub fn to_source_into(&self, y: &[f64], x: &mut [f64]) {
        for (j, xj) in x.iter_mut().enumerate() {
            let mut acc = self.mean[j];
            for (k, &yk) in y.iter().enumerate() {
                acc += self.root[(j, k)] * yk;
            }
            *xj = acc;
        }
    }

    pub fn to_source(&self, y: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.dim()];
        self.to_source_into(y, &mut x);
        x
    }

    /// `y = R^{-1} (x - m)`.
    pub fn to_target(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dim())
            .map(|j| {
                (0..self.dim())
                    .map(|k| self.inverse[(j, k)] * (x[k] - self.mean[k]))
                    .sum()
            })
            .collect()
    }
}

/// Lower cell index and fractional position of `x` on a sorted axis,
/// clamped to the axis ends.
fn locate(axis: &[f64], x: f64) -> (usize, f64) {
    let n = axis.len();
    if !(x > axis[0]) {
        return (0, 0.0);
    }
    if x >= axis[n - 1] {
        return (n - 2, 1.0);
    }
    let i = axis.partition_point(|&a| a <= x) - 1;
    (i, (x - axis[i]) / (axis[i + 1] - axis[i]))
}

/// Resamples `source` onto `target_grid`, whose points are interpreted as
/// `y` coordinates mapped to the source frame by `map`.
///
/// Inside the source bounding box values are multilinear interpolants;
/// outside, each coordinate is clamped to the nearest axis end, which picks
/// the nearest source node in the max-norm sense.
pub fn interpolate_to_grid(
    source: &DenseTensor,
    source_grid: &Grid,
    target_grid: &Grid,
    map: &GridMap,
) -> Result<DenseTensor> {
    let d = source_grid.ndim();
    if source.shape() != source_grid.shape().as_slice() {
        return Err(Error::ShapeMismatch(format!(
            "source shape {:?} vs grid {:?}",
            source.shape(),
            source_grid.shape()
        )));
    }
    if target_grid.ndim() != d || map.dim() != d {
        return Err(Error::ShapeMismatch(format!(
            "dimensions: source {d}, target {}, map {}",
            target_grid.ndim(),
            map.dim()
        )));
    }
    let src_shape = source.shape();
    let values = source.values();
    let mut strides = vec![1usize; d];
    for k in (0..d.saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * src_shape[k + 1];
    }

    let target_shape = target_grid.shape();
    let mut out = Vec::with_capacity(target_grid.len());
    let mut y = vec![0.0; d];
    let mut x = vec![0.0; d];
    let mut cells = vec![(0usize, 0.0f64); d];
    for_each_index(&target_shape, |_, idx| {
        for k in 0..d {
            y[k] = target_grid.axis(k)[idx[k]];
        }
        map.to_source_into(&y, &mut x);
        for k in 0..d {
            cells[k] = locate(source_grid.axis(k), x[k]);
        }
        let mut acc = 0.0;
        for corner in 0..(1usize << d) {
            let mut w = 1.0;
            let mut flat = 0;
            for (k, &(i, t)) in cells.iter().enumerate() {
                let upper = (corner >> (d - 1 - k)) & 1 == 1;
                w *= if upper { t } else { 1.0 - t };
                flat += (i + upper as usize) * strides[k];
            }
            if w != 0.0 {
                acc += w * values[flat];
            }
        }
        out.push(acc);
    });
    DenseTensor::new(target_shape, out)
}

/// Closed-form density in source coordinates.
pub type ExactDensity<'a> = &'a dyn Fn(&[f64]) -> f64;

/// Rescales a density so its rectangle-rule mass is one.
pub fn normalize(t: &DenseTensor, grid: &Grid) -> Result<DenseTensor> {
    if t.shape() != grid.shape().as_slice() {
        return Err(Error::ShapeMismatch(format!(
            "tensor {:?} vs grid {:?}",
            t.shape(),
            grid.shape()
        )));
    }
    let mass = t.values().iter().sum::<f64>() * grid.cell_volume()?;
    if !(mass > 0.0) {
        return Err(Error::NonPositiveMass(mass));
    }
    Ok(t.scaled(1.0 / mass))
}

/// Singular spectra of a 2-D density before and after a change of grid.
#[derive(Debug, Clone)]
pub struct SpectrumComparison {
    /// Normalized density on its original grid.
    pub original: Vec<f64>,
    /// Density re-sampled exactly on the new grid, when a closed form is known.
    pub exact_resample: Option<Vec<f64>>,
    /// Density interpolated from the original grid onto the new grid.
    pub interpolated: Vec<f64>,
    pub moments: MomentEstimate,
    pub map: GridMap,
    /// The interpolated (normalized) tensor on the new grid.
    pub interpolated_tensor: DenseTensor,
}

/// Decorrelates `density` with its own estimated moments and compares spectra.
pub fn spectrum_comparison(
    density: &DenseTensor,
    grid: &Grid,
    kind: SquareRootKind,
    target_grid: &Grid,
    exact_f: Option<ExactDensity<'_>>,
) -> Result<SpectrumComparison> {
    let normalized = normalize(density, grid)?;
    let moments = estimate_moments(&normalized, grid)?;
    let map = GridMap::from_moments(&moments, kind)?;
    compare_with_map(
        density,
        &normalized,
        grid,
        map,
        moments,
        target_grid,
        exact_f,
    )
}

/// Same as [`spectrum_comparison`] with an explicitly chosen map.
pub fn spectrum_comparison_with_map(
    density: &DenseTensor,
    grid: &Grid,
    map: GridMap,
    target_grid: &Grid,
    exact_f: Option<ExactDensity<'_>>,
) -> Result<SpectrumComparison> {
    let normalized = normalize(density, grid)?;
    let moments = estimate_moments(&normalized, grid)?;
    compare_with_map(
        density,
        &normalized,
        grid,
        map,
        moments,
        target_grid,
        exact_f,
    )
}

fn compare_with_map(
    density: &DenseTensor,
    normalized: &DenseTensor,
    grid: &Grid,
    map: GridMap,
    moments: MomentEstimate,
    target_grid: &Grid,
    exact_f: Option<ExactDensity<'_>>,
) -> Result<SpectrumComparison> {
    if grid.ndim() != 2 || target_grid.ndim() != 2 {
        return Err(Error::InvalidArgument(
            "spectrum comparison needs 2-D grids".into(),
        ));
    }
    let original = singular_values(&normalized.to_matrix()?)?;

    let exact_resample = match exact_f {
        Some(f) => {
            let resampled = crate::grids::sample_function(target_grid, |y| f(&map.to_source(y)))?;
            let resampled = normalize(&resampled, target_grid)?;
            Some(singular_values(&resampled.to_matrix()?)?)
        }
        None => None,
    };

    // Interpolating before normalizing keeps coincident nodes bit-identical
    // to an exact re-sample; the result is the same up to rounding.
    let interpolated_tensor = normalize(
        &interpolate_to_grid(density, grid, target_grid, &map)?,
        target_grid,
    )?;
    let interpolated = singular_values(&interpolated_tensor.to_matrix()?)?;
    Ok(SpectrumComparison {
        original,
        exact_resample,
        interpolated,
        moments,
        map,
        interpolated_tensor,
    })
}
