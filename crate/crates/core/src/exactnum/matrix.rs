use std::fmt;

use serde::{Deserialize, Serialize};

use super::{ExactError, Field, QuadExt};

/// Dense row-major matrix over a [`Field`].
#[derive(Clone, PartialEq, Debug)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

/// Square matrix over ℚ(√5).
pub type ExactMatrix = Matrix<QuadExt>;

impl<T: Field> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self, ExactError> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(ExactError::Shape("ragged rows".into()));
        }
        Ok(Matrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    /// Builds a symmetric matrix from a row-major upper triangle: row `i`
    /// holds entries `(i, i..n)`.
    pub fn from_upper(upper: Vec<Vec<T>>) -> Result<Self, ExactError> {
        let n = upper.len();
        let mut m = Self::zeros(n, n);
        for (i, row) in upper.into_iter().enumerate() {
            if row.len() != n - i {
                return Err(ExactError::Shape(format!(
                    "upper-triangle row {} has {} entries, expected {}",
                    i + 1,
                    row.len(),
                    n - i
                )));
            }
            for (k, v) in row.into_iter().enumerate() {
                m.set_sym(i, i + k, v);
            }
        }
        Ok(m)
    }

    pub fn diagonal(diag: Vec<T>) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, v) in diag.into_iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn set_sym(&mut self, i: usize, j: usize, v: T) {
        self[(j, i)] = v.clone();
        self[(i, j)] = v;
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    /// First off-diagonal position (1-based, upper triangle) where symmetry fails.
    pub fn asymmetry(&self) -> Option<(usize, usize)> {
        (0..self.rows)
            .flat_map(|i| (i + 1..self.cols).map(move |j| (i, j)))
            .find(|&(i, j)| self[(i, j)] != self[(j, i)])
            .map(|(i, j)| (i + 1, j + 1))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(T::is_zero)
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn map<U: Field>(&self, f: impl Fn(&T) -> U) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn to_f64(&self) -> Matrix<f64> {
        self.map(T::to_f64)
    }

    pub fn scale(&self, s: &T) -> Self {
        self.map(|v| v.clone() * s.clone())
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
        }
    }

    /// `self += s · other`
    pub fn add_scaled(&mut self, s: &T, other: &Self) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        if s.is_zero() {
            return;
        }
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            if !b.is_zero() {
                *a = a.clone() + s.clone() * b.clone();
            }
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows);
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] = out[(i, j)].clone() + a.clone() * b.clone();
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| dot(self.row(i), v))
            .collect()
    }

    /// Frobenius inner product `⟨A, B⟩ = Σ A_ij B_ij`.
    pub fn inner(&self, other: &Self) -> T {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        dot(&self.data, &other.data)
    }

    /// `vᵀ M v`
    pub fn quad_form(&self, v: &[T]) -> T {
        dot(v, &self.mul_vec(v))
    }

    pub fn trace(&self) -> T {
        (0..self.rows.min(self.cols)).fold(T::zero(), |acc, i| acc + self[(i, i)].clone())
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }
}

pub fn dot<T: Field>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (x, y)| {
        if x.is_zero() || y.is_zero() {
            acc
        } else {
            acc + x.clone() * y.clone()
        }
    })
}

/// `v v^T`
pub fn outer<T: Field>(v: &[T]) -> Matrix<T> {
    let n = v.len();
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = v[i].clone() * v[j].clone();
        }
    }
    m
}

impl<T> std::ops::Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

impl<T: Field> fmt::Display for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cells: Vec<String> = self.data.iter().map(|v| v.to_string()).collect();
        let w = cells.iter().map(String::len).max().unwrap_or(1);
        for i in 0..self.rows {
            let line: Vec<String> = (0..self.cols)
                .map(|j| format!("{:>w$}", cells[i * self.cols + j]))
                .collect();
            writeln!(f, "[ {} ]", line.join("  "))?;
        }
        Ok(())
    }
}

/// A vector `v` with `vᵀ M v < 0`, produced when an exact PSD test fails.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PsdWitness {
    /// 1-based pivot index at which elimination stopped.
    pub index: usize,
    #[serde(with = "crate::exactnum::serde_vec")]
    pub vector: Vec<QuadExt>,
    /// The (negative) value of `vᵀ M v`.
    #[serde(with = "crate::exactnum::serde_scalar")]
    pub value: QuadExt,
}

#[derive(Clone, Debug, PartialEq)]
pub enum PsdVerdict {
    Psd,
    NotPsd(PsdWitness),
}

impl PsdVerdict {
    pub fn is_psd(&self) -> bool {
        matches!(self, PsdVerdict::Psd)
    }
}

/// Exact positive-semidefiniteness test by symmetric Gaussian elimination.
///
/// The matrix is reduced by congruences `A ← E A Eᵀ`; the accumulated `T`
/// satisfies `A = T M Tᵀ`, so a violating direction `w` of the reduced matrix
/// lifts to `v = Tᵀ w` with the same quadratic form value.
pub fn psd_check_exact(m: &ExactMatrix) -> Result<PsdVerdict, ExactError> {
    if !m.is_square() {
        return Err(ExactError::Shape(format!("{}x{} matrix is not square", m.rows, m.cols)));
    }
    if let Some((i, j)) = m.asymmetry() {
        return Err(ExactError::NonSymmetric { row: i, col: j });
    }
    let n = m.rows;
    let mut a = m.clone();
    let mut t = ExactMatrix::identity(n);

    for k in 0..n {
        let pivot = a[(k, k)].clone();
        match pivot.sign() {
            -1 => {
                return Ok(PsdVerdict::NotPsd(PsdWitness {
                    index: k + 1,
                    vector: t.row(k).to_vec(),
                    value: pivot,
                }))
            }
            0 => {
                if let Some(j) = (k + 1..n).find(|&j| !a[(k, j)].is_zero()) {
                    // w = s·e_k − e_j gives wᵀAw = −2·s·a_kj + a_jj = −1.
                    let akj = a[(k, j)].clone();
                    let ajj = a[(j, j)].clone();
                    let s = (ajj + QuadExt::one()) / (QuadExt::from(2) * akj);
                    let vector: Vec<QuadExt> = (0..n)
                        .map(|c| s.clone() * t[(k, c)].clone() - t[(j, c)].clone())
                        .collect();
                    let value = m.quad_form(&vector);
                    return Ok(PsdVerdict::NotPsd(PsdWitness {
                        index: k + 1,
                        vector,
                        value,
                    }));
                }
            }
            _ => {
                // Schur complement update of the trailing block.
                let rowk: Vec<QuadExt> = a.row(k).to_vec();
                for i in k + 1..n {
                    if rowk[i].is_zero() {
                        continue;
                    }
                    let f = rowk[i].clone() / pivot.clone();
                    for j in k + 1..n {
                        if !rowk[j].is_zero() {
                            let v = a[(i, j)].clone() - f.clone() * rowk[j].clone();
                            a[(i, j)] = v;
                        }
                    }
                    for c in 0..n {
                        if !t[(k, c)].is_zero() {
                            let v = t[(i, c)].clone() - f.clone() * t[(k, c)].clone();
                            t[(i, c)] = v;
                        }
                    }
                    a[(i, k)] = QuadExt::zero();
                    a[(k, i)] = QuadExt::zero();
                }
            }
        }
    }
    Ok(PsdVerdict::Psd)
}

/// Strict positive definiteness: every pivot of the symmetric elimination is
/// positive.
pub fn is_positive_definite<T: Field>(m: &Matrix<T>) -> bool {
    if !m.is_square() || !m.is_symmetric() {
        return false;
    }
    let n = m.rows;
    let mut a = m.clone();
    for k in 0..n {
        let p = a[(k, k)].clone();
        if p.sign() <= 0 {
            return false;
        }
        for i in k + 1..n {
            let f = a[(i, k)].clone() / p.clone();
            if f.is_zero() {
                continue;
            }
            for c in k..n {
                let v = a[(i, c)].clone() - f.clone() * a[(k, c)].clone();
                a[(i, c)] = v;
            }
        }
    }
    true
}

/// Reduces `m` in place to reduced row echelon form, choosing pivot columns in
/// the priority order given by `col_order` (every column index exactly once).
/// Returns the pivot columns, one per nonzero row, in row order.
pub fn rref_in_order<T: Field>(m: &mut Matrix<T>, col_order: &[usize]) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for &c in col_order {
        if r == m.rows {
            break;
        }
        let Some(p) = (r..m.rows).find(|&i| !m[(i, c)].is_zero()) else {
            continue;
        };
        m.swap_rows(r, p);
        let inv = T::one() / m[(r, c)].clone();
        for j in 0..m.cols {
            if !m[(r, j)].is_zero() {
                m[(r, j)] = m[(r, j)].clone() * inv.clone();
            }
        }
        for i in 0..m.rows {
            if i == r || m[(i, c)].is_zero() {
                continue;
            }
            let f = m[(i, c)].clone();
            for j in 0..m.cols {
                if !m[(r, j)].is_zero() {
                    let v = m[(i, j)].clone() - f.clone() * m[(r, j)].clone();
                    m[(i, j)] = v;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Reduced row echelon form with left-to-right pivoting.
pub fn rref<T: Field>(m: &mut Matrix<T>) -> Vec<usize> {
    let order: Vec<usize> = (0..m.cols).collect();
    rref_in_order(m, &order)
}

pub fn rank<T: Field>(m: &Matrix<T>) -> usize {
    let mut w = m.clone();
    rref(&mut w).len()
}

/// Basis of `{v : M v = 0}` by exact row reduction; empty iff `M` has full
/// column rank.
pub fn kernel_basis_exact<T: Field>(m: &Matrix<T>) -> Vec<Vec<T>> {
    let mut w = m.clone();
    let pivots = rref(&mut w);
    let free: Vec<usize> = (0..m.cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![T::zero(); m.cols];
            v[f] = T::one();
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = -w[(row, f)].clone();
            }
            v
        })
        .collect()
}

/// Basis of the row space (the nonzero rows of the RREF).
pub fn row_space_basis<T: Field>(m: &Matrix<T>) -> Vec<Vec<T>> {
    let mut w = m.clone();
    let r = rref(&mut w).len();
    (0..r).map(|i| w.row(i).to_vec()).collect()
}

/// Whether two lists of vectors span the same subspace.
pub fn same_span<T: Field>(a: &[Vec<T>], b: &[Vec<T>]) -> bool {
    let stack = |vs: &[Vec<T>]| -> Option<Matrix<T>> {
        if vs.is_empty() {
            None
        } else {
            Matrix::from_rows(vs.to_vec()).ok()
        }
    };
    match (stack(a), stack(b)) {
        (None, None) => true,
        (Some(ma), Some(mb)) => {
            if ma.cols != mb.cols {
                return false;
            }
            let ra = rank(&ma);
            let rb = rank(&mb);
            let both = Matrix::from_rows(a.iter().chain(b).cloned().collect()).unwrap();
            ra == rb && rank(&both) == ra
        }
        (Some(m), None) | (None, Some(m)) => m.is_zero(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(v: i64) -> QuadExt {
        QuadExt::from(v)
    }

    #[test]
    fn identity_is_psd() {
        assert!(psd_check_exact(&ExactMatrix::identity(3)).unwrap().is_psd());
    }

    #[test]
    fn negative_diagonal_witness() {
        let m = ExactMatrix::diagonal(vec![q(0), q(-1)]);
        match psd_check_exact(&m).unwrap() {
            PsdVerdict::NotPsd(w) => {
                assert_eq!(w.index, 2);
                assert_eq!(m.quad_form(&w.vector), w.value);
                assert!(w.value < QuadExt::zero());
            }
            PsdVerdict::Psd => panic!("diag(0,-1) reported PSD"),
        }
    }

    #[test]
    fn zero_pivot_with_coupling_is_rejected() {
        // [[0, 1], [1, 5]] is indefinite even though the diagonal is nonnegative.
        let m = ExactMatrix::from_upper(vec![vec![q(0), q(1)], vec![q(5)]]).unwrap();
        let PsdVerdict::NotPsd(w) = psd_check_exact(&m).unwrap() else {
            panic!("expected NotPsd");
        };
        assert_eq!(w.index, 1);
        assert_eq!(m.quad_form(&w.vector), q(-1));
    }

    #[test]
    fn nonsymmetric_input_is_an_error() {
        let m = ExactMatrix::from_rows(vec![vec![q(1), q(2)], vec![q(3), q(1)]]).unwrap();
        assert!(matches!(
            psd_check_exact(&m),
            Err(ExactError::NonSymmetric { row: 1, col: 2 })
        ));
    }

    #[test]
    fn semidefinite_rank_one() {
        let v = vec![q(1), q(-2), QuadExt::sqrt5()];
        assert!(psd_check_exact(&outer(&v)).unwrap().is_psd());
        assert!(!is_positive_definite(&outer(&v)));
    }

    #[test]
    fn kernels() {
        assert!(kernel_basis_exact(&ExactMatrix::identity(4)).is_empty());
        assert_eq!(kernel_basis_exact(&ExactMatrix::zeros(2, 2)).len(), 2);
        let m = ExactMatrix::from_rows(vec![
            vec![q(1), q(2), q(3)],
            vec![q(2), q(4), q(6)],
            vec![q(0), q(1), q(1)],
        ])
        .unwrap();
        let k = kernel_basis_exact(&m);
        assert_eq!(k.len(), 1);
        assert!(m.mul_vec(&k[0]).iter().all(QuadExt::is_zero));
    }

    #[test]
    fn span_equality() {
        let a = vec![vec![q(1), q(0), q(1)], vec![q(0), q(1), q(0)]];
        let b = vec![vec![q(1), q(1), q(1)], vec![q(1), q(-1), q(1)]];
        let c = vec![vec![q(1), q(1), q(0)]];
        assert!(same_span(&a, &b));
        assert!(!same_span(&a, &c));
    }
}
