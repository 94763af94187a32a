//! Rank-r matrix approximations: truncated SVD and greedy cross
//! (pseudoskeleton) factorization, plus the rank-by-rank update anatomy.

use std::io::Write;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{condition_number, thin_svd, Matrix};

/// Intersection matrices worse conditioned than this are rejected.
pub const MAX_CROSS_CONDITION: f64 = 1e12;

/// Residual pivots below `RANK_TOL * max|M|` count as zero.
const RANK_TOL: f64 = 1e-14;

/// Alternating row/column searches stop after this many sweeps.
const MAX_ALTERNATIONS: usize = 64;

/// Leading `r` singular triplets of a matrix.
#[derive(Debug, Clone)]
pub struct TruncatedSvd {
    /// `n_rows x r`, orthonormal columns.
    pub u: Matrix,
    /// Descending, nonnegative.
    pub s: Vec<f64>,
    /// `n_cols x r`, orthonormal columns.
    pub v: Matrix,
}

impl TruncatedSvd {
    pub fn rank(&self) -> usize {
        self.s.len()
    }

    /// `U diag(S) V^T`.
    pub fn reconstruct(&self) -> Matrix {
        self.partial(self.rank())
    }

    /// Reconstruction from the leading `r` triplets only.
    pub fn partial(&self, r: usize) -> Matrix {
        let u = self.u.columns(0, r);
        let v = self.v.columns(0, r);
        let s = Matrix::from_diagonal(&DVector::from_column_slice(&self.s[..r]));
        u * s * v.transpose()
    }
}

fn check_rank(m: &Matrix, r: usize) -> Result<()> {
    let max = m.nrows().min(m.ncols());
    if r == 0 || r > max {
        return Err(Error::RankOutOfRange { rank: r, max });
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(
            "matrix has non-finite entries".into(),
        ));
    }
    Ok(())
}

/// Frobenius-optimal rank-`r` approximation.
///
/// Each left singular vector is signed so that its largest-magnitude entry
/// is positive.
pub fn truncated_svd(m: &Matrix, r: usize) -> Result<TruncatedSvd> {
    check_rank(m, r)?;
    let svd = thin_svd(m)?;
    Ok(TruncatedSvd {
        u: svd.u.columns(0, r).into_owned(),
        s: svd.s[..r].to_vec(),
        v: svd.vt.rows(0, r).transpose(),
    })
}

/// Pivot search strategy for [`cross_greedy`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PivotMode {
    /// Scan the whole residual for its largest entry at every step.
    #[default]
    FullPivot,
    /// Start from a random column and alternate column/row maxima of the
    /// residual until the pivot stops moving.
    Stochastic,
}

impl std::str::FromStr for PivotMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(PivotMode::FullPivot),
            "stochastic" => Ok(PivotMode::Stochastic),
            other => Err(Error::InvalidArgument(format!(
                "unknown pivot mode '{other}'"
            ))),
        }
    }
}

impl PivotMode {
    pub fn name(&self) -> &'static str {
        match self {
            PivotMode::FullPivot => "full",
            PivotMode::Stochastic => "stochastic",
        }
    }
}

/// `M ~ C B^{-1} R` with `C`, `R`, `B` copied from `M`.
#[derive(Debug, Clone)]
pub struct CrossFactorization {
    /// Selected rows, in pivot order.
    pub row_indices: Vec<usize>,
    /// Selected columns, in pivot order.
    pub col_indices: Vec<usize>,
    /// `M[:, col_indices]`.
    pub c: Matrix,
    /// `M[row_indices, col_indices]`.
    pub b: Matrix,
    /// `M[row_indices, :]`.
    pub r: Matrix,
    /// Set when the residual vanished before the requested rank was reached.
    pub rank_deficient: bool,
}

impl CrossFactorization {
    pub fn rank(&self) -> usize {
        self.row_indices.len()
    }

    /// Factorization built from the first `r` pivots, which is exactly what
    /// the greedy search would have returned for rank `r`.
    pub fn prefix(&self, r: usize) -> CrossFactorization {
        let r = r.min(self.rank());
        CrossFactorization {
            row_indices: self.row_indices[..r].to_vec(),
            col_indices: self.col_indices[..r].to_vec(),
            c: self.c.columns(0, r).into_owned(),
            b: self.b.view((0, 0), (r, r)).into_owned(),
            r: self.r.rows(0, r).into_owned(),
            rank_deficient: self.rank_deficient,
        }
    }

    fn from_indices(m: &Matrix, rows: Vec<usize>, cols: Vec<usize>, rank_deficient: bool) -> Self {
        let c = m.select_columns(cols.iter());
        let r = m.select_rows(rows.iter());
        let b = c.select_rows(rows.iter());
        CrossFactorization {
            row_indices: rows,
            col_indices: cols,
            c,
            b,
            r,
            rank_deficient,
        }
    }
}

fn argmax_abs(values: impl Iterator<Item = f64>, skip: &[usize]) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in values.enumerate() {
        if skip.contains(&i) {
            continue;
        }
        if best.is_none_or(|(_, b)| v.abs() > b) {
            best = Some((i, v.abs()));
        }
    }
    best
}

fn full_pivot(e: &Matrix) -> (usize, usize, f64) {
    let (mut k, mut l, mut best) = (0, 0, -1.0);
    for j in 0..e.ncols() {
        for i in 0..e.nrows() {
            let v = e[(i, j)].abs();
            if v > best {
                (k, l, best) = (i, j, v);
            }
        }
    }
    (k, l, best)
}

fn alternating_pivot(
    e: &Matrix,
    start_col: usize,
    rows: &[usize],
    cols: &[usize],
) -> (usize, usize, f64) {
    let mut l = start_col;
    let mut k = 0;
    for _ in 0..MAX_ALTERNATIONS {
        k = argmax_abs(e.column(l).iter().copied(), rows).map_or(0, |(i, _)| i);
        let next = argmax_abs(e.row(k).iter().copied(), cols).map_or(l, |(j, _)| j);
        if next == l {
            break;
        }
        l = next;
    }
    (k, l, e[(k, l)].abs())
}

/// Greedy rank-incrementing cross approximation.
///
/// Each step picks a pivot of large magnitude in the residual `M - A_t` and
/// removes the corresponding rank-1 skeleton from it. The returned
/// factorization may have fewer than `r` pivots when the residual vanishes
/// first; `rank_deficient` is then set.
pub fn cross_greedy(
    m: &Matrix,
    r: usize,
    seed: u64,
    mode: PivotMode,
) -> Result<CrossFactorization> {
    check_rank(m, r)?;
    let (nk, nl) = m.shape();
    let tol = RANK_TOL * m.amax();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut e = m.clone();
    let mut rows = Vec::with_capacity(r);
    let mut cols = Vec::with_capacity(r);
    let mut deficient = false;

    while rows.len() < r {
        let (k, l, value) = match mode {
            PivotMode::FullPivot => full_pivot(&e),
            PivotMode::Stochastic => {
                let free: Vec<usize> = (0..nl).filter(|j| !cols.contains(j)).collect();
                let start = free[rng.random_range(0..free.len())];
                let found = alternating_pivot(&e, start, &rows, &cols);
                if found.2 > tol {
                    found
                } else {
                    // The sampled column carries no residual; confirm with a full scan.
                    full_pivot(&e)
                }
            }
        };
        if !(value > tol) {
            deficient = true;
            break;
        }
        let pivot = e[(k, l)];
        let col = e.column(l).into_owned();
        let row = e.row(k).into_owned();
        e -= col * row / pivot;
        // Exact zeros on the eliminated cross keep later pivots off it.
        e.column_mut(l).fill(0.0);
        e.row_mut(k).fill(0.0);
        rows.push(k);
        cols.push(l);
    }
    debug_assert!(rows.len() <= nk.min(nl));

    let f = CrossFactorization::from_indices(m, rows, cols, deficient);
    if f.rank() > 0 {
        let cond = condition_number(&f.b)?;
        if !(cond <= MAX_CROSS_CONDITION) {
            return Err(Error::DegradedPivot(cond));
        }
    }
    Ok(f)
}

/// `C B^{-1} R`, computed by solving against `B` rather than inverting it.
pub fn cross_reconstruct(f: &CrossFactorization) -> Result<Matrix> {
    let (nk, nl) = (f.c.nrows(), f.r.ncols());
    if f.rank() == 0 {
        return Ok(Matrix::zeros(nk, nl));
    }
    let cond = condition_number(&f.b)?;
    if !(cond <= MAX_CROSS_CONDITION) {
        return Err(Error::Singular(cond));
    }
    let x =
        f.b.clone()
            .lu()
            .solve(&f.r)
            .ok_or(Error::Singular(f64::INFINITY))?;
    Ok(&f.c * x)
}

/// Approximation method for [`update_anatomy`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Svd,
    Cross { seed: u64, mode: PivotMode },
}

/// Count of strictly negative entries and the minimum entry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignStats {
    pub negative_count: usize,
    pub min_value: f64,
}

impl SignStats {
    pub fn of(m: &Matrix) -> Self {
        SignStats {
            negative_count: m.iter().filter(|&&v| v < 0.0).count(),
            min_value: m.min(),
        }
    }
}

/// Approximation `A_r`, update `A_r - A_{r-1}` and error `M - A_r` for one rank.
#[derive(Debug, Clone)]
pub struct AnatomyStep {
    pub rank: usize,
    pub approximation: Matrix,
    pub update: Matrix,
    pub error: Matrix,
    pub approximation_stats: SignStats,
    pub update_stats: SignStats,
    pub error_stats: SignStats,
    /// Pivot `(row, column)` added at this rank, cross only.
    pub pivot: Option<(usize, usize)>,
}

pub fn update_anatomy(m: &Matrix, method: Method, r_max: usize) -> Result<Vec<AnatomyStep>> {
    check_rank(m, r_max)?;
    let approximations: Vec<(Matrix, Option<(usize, usize)>)> = match method {
        Method::Svd => {
            let svd = truncated_svd(m, r_max)?;
            (1..=r_max).map(|r| (svd.partial(r), None)).collect()
        }
        Method::Cross { seed, mode } => {
            let cross = cross_greedy(m, r_max, seed, mode)?;
            (1..=cross.rank())
                .map(|r| {
                    let a = cross_reconstruct(&cross.prefix(r))?;
                    Ok((
                        a,
                        Some((cross.row_indices[r - 1], cross.col_indices[r - 1])),
                    ))
                })
                .collect::<Result<_>>()?
        }
    };

    let mut previous = Matrix::zeros(m.nrows(), m.ncols());
    let mut steps = Vec::with_capacity(approximations.len());
    for (i, (approximation, pivot)) in approximations.into_iter().enumerate() {
        let update = &approximation - &previous;
        let error = m - &approximation;
        steps.push(AnatomyStep {
            rank: i + 1,
            approximation_stats: SignStats::of(&approximation),
            update_stats: SignStats::of(&update),
            error_stats: SignStats::of(&error),
            approximation: approximation.clone(),
            update,
            error,
            pivot,
        });
        previous = approximation;
    }
    Ok(steps)
}

/// Formats a value with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes one CSV line per matrix row.
pub fn write_matrix_csv<W: Write>(out: W, m: &Matrix) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    for i in 0..m.nrows() {
        w.write_record(m.row(i).iter().map(|&v| fmt_f64(v)))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn outer(u: &[f64], v: &[f64]) -> Matrix {
        Matrix::from_fn(u.len(), v.len(), |i, j| u[i] * v[j])
    }

    #[test]
    fn svd_of_diagonal() {
        let m = Matrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 1.0]);
        let t = truncated_svd(&m, 1).unwrap();
        let a = t.reconstruct();
        assert!((a - Matrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.0])).norm() < 1e-15);
        assert!(matches!(
            truncated_svd(&m, 3),
            Err(Error::RankOutOfRange { .. })
        ));
        assert!(matches!(
            truncated_svd(&m, 0),
            Err(Error::RankOutOfRange { .. })
        ));
    }

    #[test]
    fn svd_recovers_exact_low_rank() {
        let a = Matrix::from_fn(10, 3, |i, j| ((i * 3 + j) as f64).sin());
        let b = Matrix::from_fn(3, 7, |i, j| ((i + 2 * j) as f64).cos());
        let m = &a * &b;
        let t = truncated_svd(&m, 3).unwrap();
        assert!((t.reconstruct() - &m).norm() <= 1e-10 * m.norm());
    }

    #[test]
    fn cross_rank_one_is_exact() {
        let m = outer(&[1.0, 2.0, 0.5, 3.0], &[0.2, 1.0, 4.0]);
        for mode in [PivotMode::FullPivot, PivotMode::Stochastic] {
            let f = cross_greedy(&m, 1, 3, mode).unwrap();
            let a = cross_reconstruct(&f).unwrap();
            assert!((a - &m).norm() <= 1e-12 * m.norm());
        }
    }

    #[test]
    fn cross_identity_full_rank() {
        let m = Matrix::identity(3, 3);
        let f = cross_greedy(&m, 3, 0, PivotMode::FullPivot).unwrap();
        assert_eq!(cross_reconstruct(&f).unwrap(), m);
    }

    #[test]
    fn cross_two_by_two_inverse() {
        let (a, b) = (2.0, 1.0);
        let m = Matrix::from_row_slice(2, 2, &[a, b, b, a]);
        let f = cross_greedy(&m, 2, 0, PivotMode::FullPivot).unwrap();
        assert!((cross_reconstruct(&f).unwrap() - &m).norm() < 1e-15);
        // Solving against B reproduces the closed-form inverse.
        let inv = f.b.clone().lu().solve(&Matrix::identity(2, 2)).unwrap();
        let closed = Matrix::from_row_slice(2, 2, &[a, -b, -b, a]) / (a * a - b * b);
        let expected = closed
            .select_rows(f.col_indices.iter())
            .select_columns(f.row_indices.iter());
        assert!((inv - expected).norm() < 1e-15);
    }

    #[test]
    fn cross_stops_on_rank_deficiency() {
        let m = outer(&[1.0, 2.0, 3.0], &[1.0, -1.0, 2.0]);
        let f = cross_greedy(&m, 3, 7, PivotMode::FullPivot).unwrap();
        assert_eq!(f.rank(), 1);
        assert!(f.rank_deficient);
        let f = cross_greedy(&m, 2, 7, PivotMode::Stochastic).unwrap();
        assert_eq!(f.rank(), 1);
        assert!(f.rank_deficient);

        let zero = Matrix::zeros(2, 3);
        let f = cross_greedy(&zero, 1, 0, PivotMode::FullPivot).unwrap();
        assert_eq!(f.rank(), 0);
        assert_eq!(cross_reconstruct(&f).unwrap(), zero);
    }

    #[test]
    fn cross_error_not_below_svd() {
        let m = &outer(&[1.0, 0.5, 2.0, 1.5], &[1.0, 2.0, 0.3])
            + &outer(&[0.2, -1.0, 0.4, 0.9], &[0.5, -0.1, 1.0]);
        let svd_err = (truncated_svd(&m, 1).unwrap().reconstruct() - &m).norm();
        let f = cross_greedy(&m, 1, 0, PivotMode::FullPivot).unwrap();
        let cross_err = (cross_reconstruct(&f).unwrap() - &m).norm();
        assert!(cross_err >= svd_err - 1e-12);
    }

    #[test]
    fn singular_intersection_rejected() {
        let f = CrossFactorization {
            row_indices: vec![0, 1],
            col_indices: vec![0, 1],
            c: Matrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]),
            b: Matrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]),
            r: Matrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]),
            rank_deficient: false,
        };
        assert!(matches!(cross_reconstruct(&f), Err(Error::Singular(_))));
    }

    #[test]
    fn anatomy_svd_first_update_single_signed() {
        let m = Matrix::from_fn(12, 9, |i, j| {
            (-(((i as f64) - 5.0).powi(2) + ((j as f64) - 4.0 - 0.3 * i as f64).powi(2)) / 8.0)
                .exp()
        });
        let steps = update_anatomy(&m, Method::Svd, 3).unwrap();
        assert_eq!(steps.len(), 3);
        assert_eq!(steps[0].update_stats.negative_count, 0);
        assert_eq!(steps[0].approximation, steps[0].update);
        let total = &steps[2].approximation + &steps[2].error;
        assert!((total - &m).norm() < 1e-14);
        assert!(steps.iter().all(|s| s.pivot.is_none()));
    }

    #[test]
    fn anatomy_cross_updates_vanish_on_previous_cross() {
        let m = Matrix::from_fn(15, 11, |i, j| {
            1.0 / (1.0 + (i as f64 - 0.7 * j as f64).powi(2))
        });
        let steps = update_anatomy(
            &m,
            Method::Cross {
                seed: 1,
                mode: PivotMode::FullPivot,
            },
            4,
        )
        .unwrap();
        let scale = m.amax();
        let mut seen: Vec<(usize, usize)> = Vec::new();
        for s in &steps {
            for &(k, l) in &seen {
                assert!(s.update.row(k).amax() <= 1e-9 * scale);
                assert!(s.update.column(l).amax() <= 1e-9 * scale);
            }
            seen.push(s.pivot.unwrap());
        }
    }

    #[test]
    fn matrix_csv_has_seventeen_digits() {
        let m = Matrix::from_row_slice(2, 2, &[0.1, 1.0 / 3.0, -2.0, 1e-300]);
        let mut buf = Vec::new();
        write_matrix_csv(&mut buf, &m).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], "1.0000000000000001e-1,3.3333333333333331e-1");
        for (field, v) in text
            .split([',', '\n'])
            .filter(|s| !s.is_empty())
            .zip(m.transpose().iter())
        {
            assert_eq!(field.parse::<f64>().unwrap(), *v);
        }
    }
}
