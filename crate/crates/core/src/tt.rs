//! Tensor trains: construction by sequential truncated SVD, evaluation,
//! densification, rounding, element-wise products and sign statistics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grids::{checked_len, flat_index, DenseTensor, Grid};
use crate::linalg::{from_row_major, thin_svd, to_row_major, Matrix};
use crate::matdecomp::{cross_reconstruct, CrossFactorization, TruncatedSvd};

/// Densification refuses tensors with more elements than this.
pub const MAX_DENSE_ELEMENTS: usize = 100_000_000;

/// Order-3 core of shape `left x size x right`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct TtCore {
    left: usize,
    size: usize,
    right: usize,
    data: Vec<f64>,
}

impl TtCore {
    pub fn new(left: usize, size: usize, right: usize, data: Vec<f64>) -> Result<Self> {
        if left == 0 || size == 0 || right == 0 || data.len() != left * size * right {
            return Err(Error::ShapeMismatch(format!(
                "core {left}x{size}x{right} with {} values",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("core has non-finite entries".into()));
        }
        Ok(TtCore {
            left,
            size,
            right,
            data,
        })
    }

    pub fn left_rank(&self) -> usize {
        self.left
    }

    pub fn mode_size(&self) -> usize {
        self.size
    }

    pub fn right_rank(&self) -> usize {
        self.right
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn at(&self, a: usize, i: usize, b: usize) -> f64 {
        self.data[(a * self.size + i) * self.right + b]
    }

    /// The `left x right` matrix selected by mode index `i`.
    pub fn slice(&self, i: usize) -> Matrix {
        Matrix::from_fn(self.left, self.right, |a, b| self.at(a, i, b))
    }

    /// `(left * size) x right` unfolding.
    fn left_unfolding(&self) -> Matrix {
        from_row_major(self.left * self.size, self.right, &self.data)
    }

    /// `left x (size * right)` unfolding.
    fn right_unfolding(&self) -> Matrix {
        from_row_major(self.left, self.size * self.right, &self.data)
    }
}

/// Chain of cores `G_1 ... G_d` with boundary ranks `r_0 = r_d = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TtRepr", into = "TtRepr")]
pub struct TensorTrain {
    cores: Vec<TtCore>,
}

#[derive(Serialize, Deserialize)]
struct TtRepr {
    shape: Vec<usize>,
    ranks: Vec<usize>,
    cores: Vec<Vec<f64>>,
}

impl TryFrom<TtRepr> for TensorTrain {
    type Error = Error;

    fn try_from(repr: TtRepr) -> Result<Self> {
        let d = repr.shape.len();
        if repr.ranks.len() != d + 1 || repr.cores.len() != d {
            return Err(Error::ShapeMismatch(format!(
                "{d} modes need {} ranks and {d} cores, got {} and {}",
                d + 1,
                repr.ranks.len(),
                repr.cores.len()
            )));
        }
        let cores = repr
            .cores
            .into_iter()
            .enumerate()
            .map(|(j, data)| TtCore::new(repr.ranks[j], repr.shape[j], repr.ranks[j + 1], data))
            .collect::<Result<Vec<_>>>()?;
        TensorTrain::new(cores)
    }
}

impl From<TensorTrain> for TtRepr {
    fn from(tt: TensorTrain) -> Self {
        TtRepr {
            shape: tt.shape(),
            ranks: tt.ranks(),
            cores: tt.cores.into_iter().map(|c| c.data).collect(),
        }
    }
}

impl TensorTrain {
    pub fn new(cores: Vec<TtCore>) -> Result<Self> {
        let (first, last) = match (cores.first(), cores.last()) {
            (Some(f), Some(l)) => (f, l),
            _ => {
                return Err(Error::ShapeMismatch(
                    "tensor train needs at least one core".into(),
                ))
            }
        };
        if first.left != 1 || last.right != 1 {
            return Err(Error::ShapeMismatch("boundary ranks must be 1".into()));
        }
        if let Some(j) = cores.windows(2).position(|w| w[0].right != w[1].left) {
            return Err(Error::ShapeMismatch(format!(
                "rank mismatch between cores {j} and {}: {} vs {}",
                j + 1,
                cores[j].right,
                cores[j + 1].left
            )));
        }
        Ok(TensorTrain { cores })
    }

    /// Rank-1 train `u_1 o u_2 o ... o u_d`.
    pub fn rank_one(vectors: Vec<Vec<f64>>) -> Result<Self> {
        let cores = vectors
            .into_iter()
            .map(|v| TtCore::new(1, v.len(), 1, v))
            .collect::<Result<Vec<_>>>()?;
        TensorTrain::new(cores)
    }

    /// All-ones tensor of the given shape.
    pub fn ones(shape: &[usize]) -> Result<Self> {
        TensorTrain::rank_one(shape.iter().map(|&n| vec![1.0; n]).collect())
    }

    pub fn cores(&self) -> &[TtCore] {
        &self.cores
    }

    pub fn ndim(&self) -> usize {
        self.cores.len()
    }

    pub fn shape(&self) -> Vec<usize> {
        self.cores.iter().map(|c| c.size).collect()
    }

    /// `[r_0, r_1, ..., r_d]`.
    pub fn ranks(&self) -> Vec<usize> {
        std::iter::once(1)
            .chain(self.cores.iter().map(|c| c.right))
            .collect()
    }

    /// Number of stored core entries.
    pub fn storage(&self) -> usize {
        self.cores.iter().map(|c| c.data.len()).sum()
    }

    /// Frobenius norm, contracted core by core without densifying.
    pub fn norm(&self) -> f64 {
        let mut gram = vec![1.0];
        let mut r = 1;
        for core in &self.cores {
            let rn = core.right;
            let mut next = vec![0.0; rn * rn];
            for a in 0..r {
                for a2 in 0..r {
                    let w = gram[a * r + a2];
                    if w == 0.0 {
                        continue;
                    }
                    for i in 0..core.size {
                        for b in 0..rn {
                            let g = w * core.at(a, i, b);
                            for b2 in 0..rn {
                                next[b * rn + b2] += g * core.at(a2, i, b2);
                            }
                        }
                    }
                }
            }
            gram = next;
            r = rn;
        }
        gram[0].max(0.0).sqrt()
    }
}

/// Value of the train at a multi-index: the product of the selected core slices.
pub fn tt_eval(tt: &TensorTrain, idx: &[usize]) -> Result<f64> {
    let shape = tt.shape();
    flat_index(&shape, idx)?;
    let mut v = vec![1.0];
    for (core, &i) in tt.cores.iter().zip(idx) {
        let mut next = vec![0.0; core.right];
        for (a, &va) in v.iter().enumerate() {
            let row = &core.data[(a * core.size + i) * core.right..][..core.right];
            for (n, &g) in next.iter_mut().zip(row) {
                *n += va * g;
            }
        }
        v = next;
    }
    Ok(v[0])
}

/// Materializes every element of the train.
pub fn tt_dense(tt: &TensorTrain) -> Result<DenseTensor> {
    let shape = tt.shape();
    let total = shape.iter().map(|&n| n as u128).product::<u128>();
    if total > MAX_DENSE_ELEMENTS as u128 {
        return Err(Error::TooLarge {
            elements: total,
            limit: MAX_DENSE_ELEMENTS,
        });
    }
    // prefix holds the contraction of the first cores as (points x rank), row-major.
    let mut prefix = vec![1.0];
    let mut points = 1;
    for core in &tt.cores {
        let (r, n, rn) = (core.left, core.size, core.right);
        let mut next = vec![0.0; points * n * rn];
        for p in 0..points {
            let src = &prefix[p * r..][..r];
            let dst = &mut next[p * n * rn..][..n * rn];
            for (a, &w) in src.iter().enumerate() {
                if w == 0.0 {
                    continue;
                }
                let block = &core.data[a * n * rn..][..n * rn];
                for (d, &g) in dst.iter_mut().zip(block) {
                    *d += w * g;
                }
            }
        }
        prefix = next;
        points *= n;
    }
    DenseTensor::new(shape, prefix)
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "precision {eps} outside (0, 1)"
        )))
    }
}

/// Smallest rank whose discarded tail energy `sqrt(sum_{i>=r} s_i^2)` is at most `delta`.
pub fn truncation_rank(s: &[f64], delta: f64) -> usize {
    let mut tail = 0.0;
    let mut r = s.len();
    while r > 1 {
        let next = tail + s[r - 1] * s[r - 1];
        if next.sqrt() > delta {
            break;
        }
        tail = next;
        r -= 1;
    }
    r
}

fn per_step_threshold(eps: f64, norm: f64, d: usize) -> f64 {
    if d > 1 {
        eps * norm / ((d - 1) as f64).sqrt()
    } else {
        0.0
    }
}

/// TT-SVD: left-to-right sweep of unfoldings, each truncated at
/// `eps * ||t|| / sqrt(d - 1)`, so that `||t - tt|| <= eps * ||t||`.
pub fn tt_svd(t: &DenseTensor, eps: f64) -> Result<TensorTrain> {
    check_eps(eps)?;
    let shape = t.shape().to_vec();
    let d = shape.len();
    let delta = per_step_threshold(eps, t.norm(), d);

    let mut cores = Vec::with_capacity(d);
    let mut rest = t.values().to_vec();
    let mut r_prev = 1;
    for &n in &shape[..d - 1] {
        let rows = r_prev * n;
        let cols = rest.len() / rows;
        let svd = thin_svd(&from_row_major(rows, cols, &rest))?;
        let r = truncation_rank(&svd.s, delta);
        let u = svd.u.columns(0, r).into_owned();
        cores.push(TtCore::new(r_prev, n, r, to_row_major(&u))?);
        let mut carry = svd.vt.rows(0, r).into_owned();
        for (k, mut row) in carry.row_iter_mut().enumerate() {
            row *= svd.s[k];
        }
        rest = to_row_major(&carry);
        r_prev = r;
    }
    cores.push(TtCore::new(r_prev, shape[d - 1], 1, rest)?);
    TensorTrain::new(cores)
}

/// Right-to-left orthogonalization: every core but the first gets
/// orthonormal rows in its `left x (size * right)` unfolding.
fn right_orthogonalize(cores: &mut [TtCore]) -> Result<()> {
    for k in (1..cores.len()).rev() {
        let core = &cores[k];
        let (n, rn) = (core.size, core.right);
        let qr = core.right_unfolding().transpose().qr();
        let q = qr.q();
        let rfac = qr.r();
        let new_left = q.ncols();
        cores[k] = TtCore::new(new_left, n, rn, to_row_major(&q.transpose()))?;
        let prev = &cores[k - 1];
        let (pl, pn) = (prev.left, prev.size);
        let merged = prev.left_unfolding() * rfac.transpose();
        cores[k - 1] = TtCore::new(pl, pn, new_left, to_row_major(&merged))?;
    }
    Ok(())
}

/// Recompresses a train to the smallest ranks meeting `eps * ||tt||`.
pub fn tt_round(tt: &TensorTrain, eps: f64) -> Result<TensorTrain> {
    check_eps(eps)?;
    let mut cores = tt.cores.clone();
    let d = cores.len();
    right_orthogonalize(&mut cores)?;
    // With cores 2..d right-orthogonal, the norm lives in the first core.
    let norm = cores[0].data.iter().map(|v| v * v).sum::<f64>().sqrt();
    let delta = per_step_threshold(eps, norm, d);

    for k in 0..d.saturating_sub(1) {
        let core = &cores[k];
        let (l, n) = (core.left, core.size);
        let svd = thin_svd(&core.left_unfolding())?;
        let r = truncation_rank(&svd.s, delta);
        let u = svd.u.columns(0, r).into_owned();
        cores[k] = TtCore::new(l, n, r, to_row_major(&u))?;
        let mut carry = svd.vt.rows(0, r).into_owned();
        for (i, mut row) in carry.row_iter_mut().enumerate() {
            row *= svd.s[i];
        }
        let next = &cores[k + 1];
        let (nn, nr) = (next.size, next.right);
        let merged = carry * next.right_unfolding();
        cores[k + 1] = TtCore::new(r, nn, nr, to_row_major(&merged))?;
    }
    TensorTrain::new(cores)
}

/// Element-wise product; core slices are Kronecker products so ranks multiply.
pub fn tt_hadamard(a: &TensorTrain, b: &TensorTrain) -> Result<TensorTrain> {
    if a.shape() != b.shape() {
        return Err(Error::ShapeMismatch(format!(
            "hadamard of shapes {:?} and {:?}",
            a.shape(),
            b.shape()
        )));
    }
    let cores = a
        .cores
        .iter()
        .zip(&b.cores)
        .map(|(x, y)| {
            let (l, n, r) = (x.left * y.left, x.size, x.right * y.right);
            let mut data = vec![0.0; l * n * r];
            for xa in 0..x.left {
                for ya in 0..y.left {
                    let row = xa * y.left + ya;
                    for i in 0..n {
                        for xb in 0..x.right {
                            let xv = x.at(xa, i, xb);
                            for yb in 0..y.right {
                                data[(row * n + i) * r + xb * y.right + yb] = xv * y.at(ya, i, yb);
                            }
                        }
                    }
                }
            }
            TtCore::new(l, n, r, data)
        })
        .collect::<Result<Vec<_>>>()?;
    TensorTrain::new(cores)
}

/// Strictly negative entries of a tensor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NegativityStats {
    pub count: usize,
    /// `count / total` as a ratio in `[0, 1]`.
    pub fraction: f64,
    pub min_value: f64,
}

impl NegativityStats {
    pub fn percent(&self) -> f64 {
        100.0 * self.fraction
    }
}

pub fn negativity_stats(t: &DenseTensor) -> NegativityStats {
    let count = t.values().iter().filter(|&&v| v < 0.0).count();
    let min_value = t.values().iter().copied().fold(f64::INFINITY, f64::min);
    NegativityStats {
        count,
        fraction: count as f64 / t.len() as f64,
        min_value,
    }
}

/// Rank-`r` factorization `P ~ left * right` of a two-variable density
/// (`left` is `n_k x r`, `right` is `r x n_l`).
#[derive(Debug, Clone)]
pub struct PairFactors {
    pub left: Matrix,
    pub right: Matrix,
}

impl PairFactors {
    pub fn new(left: Matrix, right: Matrix) -> Result<Self> {
        if left.ncols() != right.nrows() || left.ncols() == 0 {
            return Err(Error::ShapeMismatch(format!(
                "pair factors {:?} and {:?}",
                left.shape(),
                right.shape()
            )));
        }
        Ok(PairFactors { left, right })
    }

    /// `left = U S`, `right = V^T`.
    pub fn from_svd(svd: &TruncatedSvd) -> Self {
        let mut left = svd.u.clone();
        for (j, mut col) in left.column_iter_mut().enumerate() {
            col *= svd.s[j];
        }
        PairFactors {
            left,
            right: svd.v.transpose(),
        }
    }

    /// `left = C`, `right = B^{-1} R`.
    pub fn from_cross(cross: &CrossFactorization) -> Result<Self> {
        // Reuse the reconstruction's conditioning checks before solving.
        cross_reconstruct(cross)?;
        let right = cross
            .b
            .clone()
            .lu()
            .solve(&cross.r)
            .ok_or(Error::Singular(f64::INFINITY))?;
        PairFactors::new(cross.c.clone(), right)
    }

    pub fn rank(&self) -> usize {
        self.left.ncols()
    }
}

/// Train for a density in which only axes `pair.0 < pair.1` are coupled.
///
/// `marginals` lists the 1-D marginal values of every other axis in axis
/// order. Cores strictly between the pair carry `I_r` scaled by their
/// marginal, so ranks equal `r` on bonds `pair.0 .. pair.1 - 1`.
pub fn tt_from_pair_decomposition(
    grid: &Grid,
    marginals: &[Vec<f64>],
    pair: (usize, usize),
    factors: &PairFactors,
) -> Result<TensorTrain> {
    let shape = grid.shape();
    let d = shape.len();
    let (k, l) = pair;
    if k >= l || l >= d {
        return Err(Error::InvalidArgument(format!(
            "pair {pair:?} invalid for {d} axes"
        )));
    }
    if marginals.len() != d - 2 {
        return Err(Error::ShapeMismatch(format!(
            "expected {} marginals, got {}",
            d - 2,
            marginals.len()
        )));
    }
    if factors.left.nrows() != shape[k] || factors.right.ncols() != shape[l] {
        return Err(Error::ShapeMismatch(format!(
            "pair factors {:?}/{:?} do not fit axes of length {} and {}",
            factors.left.shape(),
            factors.right.shape(),
            shape[k],
            shape[l]
        )));
    }
    let r = factors.rank();
    let mut rest = marginals.iter();
    let mut cores = Vec::with_capacity(d);
    for (j, &n) in shape.iter().enumerate() {
        let core = if j == k {
            TtCore::new(1, n, r, to_row_major(&factors.left))?
        } else if j == l {
            // right is r x n_l; the core is r x n_l x 1, same row-major layout.
            TtCore::new(r, n, 1, to_row_major(&factors.right))?
        } else {
            let m = rest.next().expect("marginal count checked above");
            if m.len() != n {
                return Err(Error::ShapeMismatch(format!(
                    "marginal for axis {j} has length {}",
                    m.len()
                )));
            }
            if j > k && j < l {
                let mut data = vec![0.0; r * n * r];
                for a in 0..r {
                    for (i, &v) in m.iter().enumerate() {
                        data[(a * n + i) * r + a] = v;
                    }
                }
                TtCore::new(r, n, r, data)?
            } else {
                TtCore::new(1, n, 1, m.clone())?
            }
        };
        cores.push(core);
    }
    TensorTrain::new(cores)
}

/// Guard used before densifying a train of the given shape.
pub fn dense_size_ok(shape: &[usize]) -> bool {
    checked_len(shape).is_some_and(|n| n <= MAX_DENSE_ELEMENTS)
}
