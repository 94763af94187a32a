//! Thin wrappers over nalgebra used throughout the crate.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub type Matrix = DMatrix<f64>;

/// Economy SVD `M = U diag(s) Vt` with singular values in descending order.
///
/// Columns of `U` are sign-normalised so that their largest-magnitude entry
/// is positive; the matching rows of `Vt` are flipped with them.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: Matrix,
    pub s: Vec<f64>,
    pub vt: Matrix,
}

// The decompositions run on faer: nalgebra's bidiagonal QR iteration returns
// wrong factors for some exactly rank-deficient inputs, which are common here.
fn to_faer(m: &Matrix) -> faer::Mat<f64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn check_finite(m: &Matrix) -> Result<()> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::SvdFailed)
    }
}

/// Economy SVD of an arbitrary finite matrix.
pub fn thin_svd(m: &Matrix) -> Result<Svd> {
    check_finite(m)?;
    let (rows, cols) = m.shape();
    let k = rows.min(cols);
    if k == 0 {
        return Ok(Svd {
            u: Matrix::zeros(rows, 0),
            s: Vec::new(),
            vt: Matrix::zeros(0, cols),
        });
    }
    let svd = to_faer(m).thin_svd().map_err(|_| Error::SvdFailed)?;
    let (fu, fs, fv) = (svd.U(), svd.S().column_vector(), svd.V());
    let mut out = Svd {
        u: Matrix::from_fn(rows, k, |i, j| fu[(i, j)]),
        s: (0..k).map(|i| fs[i]).collect(),
        vt: Matrix::from_fn(k, cols, |i, j| fv[(j, i)]),
    };
    normalize_signs(&mut out);
    Ok(out)
}

fn normalize_signs(svd: &mut Svd) {
    for j in 0..svd.u.ncols() {
        let col = svd.u.column(j);
        let mut best = 0.0_f64;
        let mut sign = 1.0;
        for &v in col.iter() {
            if v.abs() > best {
                best = v.abs();
                sign = if v < 0.0 { -1.0 } else { 1.0 };
            }
        }
        if sign < 0.0 {
            svd.u.column_mut(j).neg_mut();
            svd.vt.row_mut(j).neg_mut();
        }
    }
}

/// Singular values in descending order.
pub fn singular_values(m: &Matrix) -> Result<Vec<f64>> {
    check_finite(m)?;
    if m.is_empty() {
        return Ok(Vec::new());
    }
    to_faer(m).singular_values().map_err(|_| Error::SvdFailed)
}

/// 2-norm condition number; infinite for singular input.
pub fn condition_number(m: &Matrix) -> Result<f64> {
    let s = singular_values(m)?;
    if s.is_empty() {
        return Err(Error::InvalidArgument("empty matrix".into()));
    }
    let (max, min) = (s[0], s[s.len() - 1]);
    Ok(if min == 0.0 { f64::INFINITY } else { max / min })
}

/// Builds a matrix from a row-major buffer.
pub fn from_row_major(rows: usize, cols: usize, data: &[f64]) -> Matrix {
    Matrix::from_row_slice(rows, cols, data)
}

/// Copies a matrix out into a row-major buffer.
pub fn to_row_major(m: &Matrix) -> Vec<f64> {
    let (rows, cols) = m.shape();
    let mut out = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        for j in 0..cols {
            out.push(m[(i, j)]);
        }
    }
    out
}

pub(crate) fn is_symmetric(m: &Matrix, rel_tol: f64) -> bool {
    if !m.is_square() {
        return false;
    }
    let scale = m.amax().max(f64::MIN_POSITIVE);
    let n = m.nrows();
    (0..n).all(|i| (0..i).all(|j| (m[(i, j)] - m[(j, i)]).abs() <= rel_tol * scale))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check(m: &Matrix) {
        let svd = thin_svd(m).unwrap();
        let k = svd.s.len();
        assert_eq!(k, m.nrows().min(m.ncols()));
        assert!(svd.s.windows(2).all(|w| w[0] >= w[1]));
        let rebuilt =
            &svd.u * Matrix::from_diagonal(&nalgebra::DVector::from_vec(svd.s.clone())) * &svd.vt;
        assert!((rebuilt - m).norm() <= 1e-12 * m.norm().max(1.0));
        let utu = svd.u.transpose() * &svd.u;
        assert!((utu - Matrix::identity(k, k)).norm() < 1e-12);
        let vvt = &svd.vt * svd.vt.transpose();
        assert!((vvt - Matrix::identity(k, k)).norm() < 1e-12);
    }

    #[test]
    fn thin_svd_square_wide_and_tall() {
        let sq = Matrix::from_fn(5, 5, |i, j| ((i * 7 + j * 3) % 11) as f64 - 4.0);
        let wide = Matrix::from_fn(3, 20, |i, j| {
            ((i + 1) as f64 * (j as f64).sin()) + 0.1 * j as f64
        });
        check(&sq);
        check(&wide);
        check(&wide.transpose());
    }

    #[test]
    fn rank_deficient_product() {
        let a = Matrix::from_fn(10, 3, |i, j| ((i * 3 + j) as f64).sin());
        let b = Matrix::from_fn(3, 7, |i, j| ((i + 2 * j) as f64).cos());
        check(&(a * b));
    }

    #[test]
    fn signs_make_largest_entry_positive() {
        let m = Matrix::from_row_slice(2, 2, &[-3.0, 0.0, 0.0, -1.0]);
        let svd = thin_svd(&m).unwrap();
        for j in 0..2 {
            let col = svd.u.column(j);
            let imax = col.iamax();
            assert!(col[imax] > 0.0);
        }
    }

    #[test]
    fn row_major_round_trip() {
        let data = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let m = from_row_major(2, 3, &data);
        assert_eq!(m[(0, 2)], 3.0);
        assert_eq!(to_row_major(&m), data.to_vec());
    }

    #[test]
    fn non_finite_rejected() {
        let m = Matrix::from_row_slice(1, 2, &[1.0, f64::NAN]);
        assert!(thin_svd(&m).is_err());
    }
}
