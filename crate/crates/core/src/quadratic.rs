//! Exact functional tensor trains of quadratic forms `x^T Q x`.
//!
//! Every core entry is a polynomial of degree at most two in the core's own
//! variable, so zero rows and columns can be detected symbolically and
//! squeezed out without touching the represented function.

use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{is_symmetric, Matrix};

/// `c0 + c1 x + c2 x^2`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Poly2 {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
}

impl Poly2 {
    pub const ZERO: Poly2 = Poly2 {
        c0: 0.0,
        c1: 0.0,
        c2: 0.0,
    };
    pub const ONE: Poly2 = Poly2 {
        c0: 1.0,
        c1: 0.0,
        c2: 0.0,
    };

    pub fn constant(c: f64) -> Self {
        Poly2 {
            c0: c,
            ..Poly2::ZERO
        }
    }

    pub fn linear(c: f64) -> Self {
        Poly2 {
            c1: c,
            ..Poly2::ZERO
        }
    }

    pub fn quadratic(c: f64) -> Self {
        Poly2 {
            c2: c,
            ..Poly2::ZERO
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.c0 + x * (self.c1 + x * self.c2)
    }

    /// Exactly zero in every coefficient.
    pub fn is_zero(&self) -> bool {
        self.c0 == 0.0 && self.c1 == 0.0 && self.c2 == 0.0
    }

    fn mul_add(self, k: f64, rhs: Poly2) -> Poly2 {
        Poly2 {
            c0: self.c0 + k * rhs.c0,
            c1: self.c1 + k * rhs.c1,
            c2: self.c2 + k * rhs.c2,
        }
    }
}

impl fmt::Display for Poly2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = [(self.c0, ""), (self.c1, "x"), (self.c2, "x^2")]
            .iter()
            .filter(|(c, _)| *c != 0.0)
            .map(|(c, t)| {
                if t.is_empty() {
                    format!("{c}")
                } else {
                    format!("{c}{t}")
                }
            })
            .collect();
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join(" + "))
        }
    }
}

/// Matrix of univariate polynomials, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Poly2>,
}

impl PolyMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        PolyMatrix {
            rows,
            cols,
            entries: vec![Poly2::ZERO; rows * cols],
        }
    }

    pub fn from_rows(rows: Vec<Vec<Poly2>>) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(
            rows.iter().all(|r| r.len() == cols),
            "ragged polynomial matrix"
        );
        PolyMatrix {
            rows: rows.len(),
            cols,
            entries: rows.into_iter().flatten().collect(),
        }
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> Poly2 {
        self.entries[i * self.cols + j]
    }

    fn set(&mut self, i: usize, j: usize, p: Poly2) {
        self.entries[i * self.cols + j] = p;
    }

    fn row_is_zero(&self, i: usize) -> bool {
        (0..self.cols).all(|j| self.get(i, j).is_zero())
    }

    fn col_is_zero(&self, j: usize) -> bool {
        (0..self.rows).all(|i| self.get(i, j).is_zero())
    }

    fn remove_row(&mut self, i: usize) {
        self.entries.drain(i * self.cols..(i + 1) * self.cols);
        self.rows -= 1;
    }

    fn remove_col(&mut self, j: usize) {
        let cols = self.cols;
        let mut k = 0;
        self.entries.retain(|_| {
            let keep = k % cols != j;
            k += 1;
            keep
        });
        self.cols -= 1;
    }

    /// Product with a constant matrix on the right; degrees do not grow.
    fn mul_const(&self, m: &Matrix) -> PolyMatrix {
        assert_eq!(self.cols, m.nrows());
        let mut out = PolyMatrix::zeros(self.rows, m.ncols());
        for i in 0..self.rows {
            for j in 0..m.ncols() {
                let mut acc = Poly2::ZERO;
                for k in 0..self.cols {
                    let c = m[(k, j)];
                    if c != 0.0 {
                        acc = acc.mul_add(c, self.get(i, k));
                    }
                }
                out.set(i, j, acc);
            }
        }
        out
    }

    /// Numeric matrix at `x`.
    pub fn eval(&self, x: f64) -> Matrix {
        Matrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j).eval(x))
    }
}

/// Symmetric coefficient matrix of a quadratic form.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricQ(Matrix);

impl SymmetricQ {
    pub fn new(q: Matrix) -> Result<Self> {
        if !q.is_square() || q.nrows() == 0 {
            return Err(Error::ShapeMismatch(format!(
                "Q must be square, got {:?}",
                q.shape()
            )));
        }
        if q.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("Q has non-finite entries".into()));
        }
        if !is_symmetric(&q, 0.0) {
            return Err(Error::InvalidArgument("Q is not symmetric".into()));
        }
        Ok(SymmetricQ(q))
    }

    /// Diagonal `diag` with the listed symmetric off-diagonal entries;
    /// pairs are 1-based `(k, l)`.
    pub fn with_pairs(d: usize, diag: f64, off: f64, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut q = Matrix::identity(d, d) * diag;
        for &(k, l) in pairs {
            if k == 0 || l == 0 || k > d || l > d || k == l {
                return Err(Error::InvalidArgument(format!(
                    "pair ({k},{l}) invalid for d={d}"
                )));
            }
            q[(k - 1, l - 1)] = off;
            q[(l - 1, k - 1)] = off;
        }
        SymmetricQ::new(q)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    /// `x^T Q x` evaluated directly.
    pub fn form(&self, x: &[f64]) -> f64 {
        let d = self.dim();
        let mut s = 0.0;
        for i in 0..d {
            for j in 0..d {
                s += x[i] * self.0[(i, j)] * x[j];
            }
        }
        s
    }
}

/// Functional train `g_1(x_1) g_2(x_2) ... g_d(x_d)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticCores {
    cores: Vec<PolyMatrix>,
}

impl QuadraticCores {
    pub fn cores(&self) -> &[PolyMatrix] {
        &self.cores
    }

    pub fn dim(&self) -> usize {
        self.cores.len()
    }

    /// `[r_0, r_1, ..., r_d]`.
    pub fn ranks(&self) -> Vec<usize> {
        std::iter::once(self.cores[0].rows)
            .chain(self.cores.iter().map(|c| c.cols))
            .collect()
    }
}

/// Builds the unsqueezed cores of `x^T Q x`.
///
/// Left cores accumulate `[1, x_a, x_a^T Q_aa x_a]`, right cores accumulate
/// `[x_c^T Q_cc x_c, x_c, 1]`. Odd `d` places the coupling block in the
/// middle core; even `d` multiplies the correction `D` into core `d/2`.
pub fn build_quadratic_cores(q: &SymmetricQ) -> Result<QuadraticCores> {
    let d = q.dim();
    if d < 2 {
        return Err(Error::InvalidArgument(format!(
            "quadratic trains need d >= 2, got {d}"
        )));
    }
    // 1-based access keeps the index bookkeeping readable.
    let qq = |a: usize, b: usize| q.matrix()[(a - 1, b - 1)];
    let c = Poly2::constant;
    let lin = Poly2::linear;
    let quad = Poly2::quadratic;
    let odd_middle = (d % 2 == 1).then_some(d.div_ceil(2));

    let mut cores = Vec::with_capacity(d);
    for j in 1..=d {
        let core = if j == 1 {
            PolyMatrix::from_rows(vec![vec![Poly2::ONE, lin(1.0), quad(qq(1, 1))]])
        } else if j == d {
            PolyMatrix::from_rows(vec![vec![quad(qq(d, d))], vec![lin(1.0)], vec![Poly2::ONE]])
        } else if Some(j) == odd_middle {
            let w = d - j + 2;
            let mut m = PolyMatrix::zeros(j + 1, w);
            m.set(0, 0, Poly2::ONE);
            for t in 1..=d - j {
                m.set(0, t, lin(2.0 * qq(j, j + t)));
            }
            m.set(0, w - 1, quad(qq(j, j)));
            for i in 1..j {
                for t in 1..=d - j {
                    m.set(i, t, c(2.0 * qq(i, j + t)));
                }
                m.set(i, w - 1, lin(2.0 * qq(i, j)));
            }
            m.set(j, w - 1, Poly2::ONE);
            m
        } else if 2 * j <= d {
            let mut m = PolyMatrix::zeros(j + 1, j + 2);
            m.set(0, 0, Poly2::ONE);
            m.set(0, j, lin(1.0));
            m.set(0, j + 1, quad(qq(j, j)));
            for i in 1..j {
                m.set(i, i, Poly2::ONE);
                m.set(i, j + 1, lin(2.0 * qq(i, j)));
            }
            m.set(j, j + 1, Poly2::ONE);
            m
        } else {
            let w = d - j + 2;
            let mut m = PolyMatrix::zeros(d - j + 3, w);
            m.set(0, 0, Poly2::ONE);
            for t in 1..=d - j {
                m.set(0, t, lin(2.0 * qq(j, j + t)));
                m.set(1 + t, t, Poly2::ONE);
            }
            m.set(0, w - 1, quad(qq(j, j)));
            m.set(1, w - 1, lin(1.0));
            m.set(d - j + 2, w - 1, Poly2::ONE);
            m
        };
        cores.push(core);
    }

    if d.is_multiple_of(2) {
        let h = d / 2;
        let mut dmat = Matrix::zeros(h + 2, h + 2);
        dmat[(0, 0)] = 1.0;
        dmat[(h + 1, h + 1)] = 1.0;
        for a in 1..=h {
            for b in 1..=h {
                dmat[(a, b)] = 2.0 * qq(a, h + b);
            }
        }
        cores[h - 1] = cores[h - 1].mul_const(&dmat);
    }
    Ok(QuadraticCores { cores })
}

/// Drops identically-zero columns of each core together with the matching
/// rows of the next core (and vice versa) until nothing changes.
pub fn squeeze_cores(c: &QuadraticCores) -> QuadraticCores {
    let mut cores = c.cores.clone();
    loop {
        let mut changed = false;
        for b in 0..cores.len() - 1 {
            let mut t = 0;
            while t < cores[b].cols {
                if cores[b].col_is_zero(t) || cores[b + 1].row_is_zero(t) {
                    cores[b].remove_col(t);
                    cores[b + 1].remove_row(t);
                    changed = true;
                } else {
                    t += 1;
                }
            }
        }
        if !changed {
            break;
        }
    }
    QuadraticCores { cores }
}

/// Multiplies the core matrices evaluated at `x`.
pub fn eval_quadratic_cores(c: &QuadraticCores, x: &[f64]) -> Result<f64> {
    if x.len() != c.dim() {
        return Err(Error::ShapeMismatch(format!(
            "point of length {} for {} cores",
            x.len(),
            c.dim()
        )));
    }
    let mut v = vec![1.0];
    for (core, &xj) in c.cores.iter().zip(x) {
        let mut next = vec![0.0; core.cols];
        for (i, &vi) in v.iter().enumerate() {
            if vi == 0.0 {
                continue;
            }
            for (j, n) in next.iter_mut().enumerate() {
                *n += vi * core.get(i, j).eval(xj);
            }
        }
        v = next;
    }
    Ok(v[0])
}

/// Ranks of the squeezed train of `x^T Q x`.
pub fn quadratic_rank_report(q: &SymmetricQ) -> Result<Vec<usize>> {
    Ok(squeeze_cores(&build_quadratic_cores(q)?).ranks())
}
