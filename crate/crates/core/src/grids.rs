//! Regular product grids, dense sampled tensors and rectangle-rule moments.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Relative tolerance used to decide whether an axis is equidistant.
const EQUIDISTANT_RTOL: f64 = 1e-9;

/// Negative values above `-NEGATIVE_TOLERANCE * max` pass moment estimation silently.
const NEGATIVE_TOLERANCE: f64 = 1e-9;

/// Product grid given by one strictly increasing coordinate vector per axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridRepr")]
pub struct Grid {
    axes: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
struct GridRepr {
    axes: Vec<Vec<f64>>,
}

impl TryFrom<GridRepr> for Grid {
    type Error = Error;

    fn try_from(repr: GridRepr) -> Result<Self> {
        Grid::new(repr.axes)
    }
}

impl Grid {
    pub fn new(axes: Vec<Vec<f64>>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::InvalidGrid("grid needs at least one axis".into()));
        }
        for (j, axis) in axes.iter().enumerate() {
            if axis.len() < 2 {
                return Err(Error::InvalidGrid(format!(
                    "axis {j} has fewer than 2 points"
                )));
            }
            if axis.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidGrid(format!(
                    "axis {j} has non-finite coordinates"
                )));
            }
            if axis.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::InvalidGrid(format!(
                    "axis {j} is not strictly increasing"
                )));
            }
        }
        let shape: Vec<usize> = axes.iter().map(Vec::len).collect();
        checked_len(&shape)
            .ok_or_else(|| Error::InvalidGrid("total point count overflows".into()))?;
        Ok(Grid { axes })
    }

    pub fn ndim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Vec<f64>] {
        &self.axes
    }

    pub fn axis(&self, j: usize) -> &[f64] {
        &self.axes[j]
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(Vec::len).collect()
    }

    /// Total number of grid points.
    pub fn len(&self) -> usize {
        self.axes.iter().map(Vec::len).product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Coordinates of the grid point with the given multi-index.
    pub fn point(&self, idx: &[usize]) -> Vec<f64> {
        idx.iter()
            .zip(&self.axes)
            .map(|(&i, axis)| axis[i])
            .collect()
    }

    /// Spacing of axis `j`, or an error if the axis is not equidistant.
    pub fn step(&self, j: usize) -> Result<f64> {
        let axis = &self.axes[j];
        let n = axis.len();
        let step = (axis[n - 1] - axis[0]) / (n - 1) as f64;
        let uniform = axis
            .windows(2)
            .all(|w| ((w[1] - w[0]) - step).abs() <= EQUIDISTANT_RTOL * step.abs());
        if uniform {
            Ok(step)
        } else {
            Err(Error::NotEquidistant(j))
        }
    }

    /// Product of the axis spacings.
    pub fn cell_volume(&self) -> Result<f64> {
        (0..self.ndim()).map(|j| self.step(j)).product()
    }
}

/// Equidistant grid with `counts[j]` points on axis `j`, starting at `starts[j]`.
pub fn make_equidistant_grid(starts: &[f64], steps: &[f64], counts: &[usize]) -> Result<Grid> {
    if starts.len() != steps.len() || starts.len() != counts.len() {
        return Err(Error::InvalidGrid(format!(
            "starts, steps and counts have lengths {}, {}, {}",
            starts.len(),
            steps.len(),
            counts.len()
        )));
    }
    let mut axes = Vec::with_capacity(starts.len());
    for (j, ((&start, &step), &count)) in starts.iter().zip(steps).zip(counts).enumerate() {
        if !(step > 0.0) || !step.is_finite() {
            return Err(Error::InvalidGrid(format!(
                "axis {j} has non-positive step {step}"
            )));
        }
        if count < 2 {
            return Err(Error::InvalidGrid(format!(
                "axis {j} has count {count} < 2"
            )));
        }
        axes.push((0..count).map(|i| start + i as f64 * step).collect());
    }
    Grid::new(axes)
}

/// Number of elements for `shape`, or `None` on overflow.
pub(crate) fn checked_len(shape: &[usize]) -> Option<usize> {
    shape.iter().try_fold(1usize, |acc, &n| acc.checked_mul(n))
}

/// Calls `f(flat, multi_index)` for every index of `shape` in row-major order.
pub(crate) fn for_each_index(shape: &[usize], mut f: impl FnMut(usize, &[usize])) {
    let total: usize = shape.iter().product();
    let mut idx = vec![0usize; shape.len()];
    for flat in 0..total {
        f(flat, &idx);
        for k in (0..shape.len()).rev() {
            idx[k] += 1;
            if idx[k] < shape[k] {
                break;
            }
            idx[k] = 0;
        }
    }
}

/// d-dimensional array stored row-major (last index fastest).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DenseRepr")]
pub struct DenseTensor {
    shape: Vec<usize>,
    values: Vec<f64>,
}

#[derive(Deserialize)]
struct DenseRepr {
    shape: Vec<usize>,
    values: Vec<f64>,
}

impl TryFrom<DenseRepr> for DenseTensor {
    type Error = Error;

    fn try_from(repr: DenseRepr) -> Result<Self> {
        DenseTensor::new(repr.shape, repr.values)
    }
}

impl DenseTensor {
    pub fn new(shape: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        if shape.is_empty() || shape.contains(&0) {
            return Err(Error::ShapeMismatch(format!(
                "invalid tensor shape {shape:?}"
            )));
        }
        let len = checked_len(&shape)
            .ok_or_else(|| Error::ShapeMismatch(format!("shape {shape:?} overflows")))?;
        if len != values.len() {
            return Err(Error::ShapeMismatch(format!(
                "shape {shape:?} needs {len} values, got {}",
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                index: unravel(&shape, pos),
                value: values[pos],
            });
        }
        Ok(DenseTensor { shape, values })
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn ndim(&self) -> usize {
        self.shape.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, idx: &[usize]) -> Result<f64> {
        Ok(self.values[flat_index(&self.shape, idx)?])
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, factor: f64) -> DenseTensor {
        DenseTensor {
            shape: self.shape.clone(),
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }

    /// Views a 2-D tensor as a matrix (rows follow the first axis).
    pub fn to_matrix(&self) -> Result<Matrix> {
        match self.shape[..] {
            [rows, cols] => Ok(Matrix::from_row_slice(rows, cols, &self.values)),
            _ => Err(Error::ShapeMismatch(format!(
                "expected 2-D tensor, got shape {:?}",
                self.shape
            ))),
        }
    }

    pub fn from_matrix(m: &Matrix) -> Result<Self> {
        DenseTensor::new(vec![m.nrows(), m.ncols()], crate::linalg::to_row_major(m))
    }
}

pub(crate) fn flat_index(shape: &[usize], idx: &[usize]) -> Result<usize> {
    if idx.len() != shape.len() || idx.iter().zip(shape).any(|(&i, &n)| i >= n) {
        return Err(Error::IndexOutOfBounds {
            index: idx.to_vec(),
            shape: shape.to_vec(),
        });
    }
    Ok(idx.iter().zip(shape).fold(0, |acc, (&i, &n)| acc * n + i))
}

pub(crate) fn unravel(shape: &[usize], mut flat: usize) -> Vec<usize> {
    let mut idx = vec![0; shape.len()];
    for k in (0..shape.len()).rev() {
        idx[k] = flat % shape[k];
        flat /= shape[k];
    }
    idx
}

/// Samples `f` at every grid point.
pub fn sample_function<F>(grid: &Grid, f: F) -> Result<DenseTensor>
where
    F: Fn(&[f64]) -> f64,
{
    let shape = grid.shape();
    let mut values = Vec::with_capacity(grid.len());
    let mut point = vec![0.0; grid.ndim()];
    let mut bad = None;
    for_each_index(&shape, |_, idx| {
        if bad.is_some() {
            return;
        }
        for (k, &i) in idx.iter().enumerate() {
            point[k] = grid.axes[k][i];
        }
        let v = f(&point);
        if !v.is_finite() {
            bad = Some((idx.to_vec(), v));
        }
        values.push(v);
    });
    if let Some((index, value)) = bad {
        return Err(Error::NonFinite { index, value });
    }
    Ok(DenseTensor { shape, values })
}

/// Rectangle-rule mass, mean and covariance of a gridded density.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentEstimate {
    pub mean: Vec<f64>,
    pub covariance: Matrix,
    pub mass: f64,
}

pub fn estimate_moments(t: &DenseTensor, grid: &Grid) -> Result<MomentEstimate> {
    if t.shape() != grid.shape().as_slice() {
        return Err(Error::ShapeMismatch(format!(
            "tensor shape {:?} does not match grid shape {:?}",
            t.shape(),
            grid.shape()
        )));
    }
    let cell = grid.cell_volume()?;
    let d = grid.ndim();

    let max = t.values.iter().fold(0.0_f64, |m, &v| m.max(v));
    let min = t.values.iter().fold(f64::INFINITY, |m, &v| m.min(v));
    if min < -NEGATIVE_TOLERANCE * max {
        log::warn!("density has negative values down to {min:e} (max {max:e})");
    }

    let mass = t.values.iter().sum::<f64>() * cell;
    if !(mass > 0.0) {
        return Err(Error::NonPositiveMass(mass));
    }

    let mut first = vec![0.0; d];
    for_each_index(&t.shape, |flat, idx| {
        let w = t.values[flat];
        for k in 0..d {
            first[k] += grid.axes[k][idx[k]] * w;
        }
    });
    let mean: Vec<f64> = first.iter().map(|s| s * cell / mass).collect();

    let mut second = vec![0.0; d * d];
    let mut centered = vec![0.0; d];
    for_each_index(&t.shape, |flat, idx| {
        let w = t.values[flat];
        for k in 0..d {
            centered[k] = grid.axes[k][idx[k]] - mean[k];
        }
        for a in 0..d {
            for b in a..d {
                second[a * d + b] += centered[a] * centered[b] * w;
            }
        }
    });
    let covariance = Matrix::from_fn(d, d, |a, b| {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        second[lo * d + hi] * cell / mass
    });
    Ok(MomentEstimate {
        mean,
        covariance,
        mass,
    })
}
