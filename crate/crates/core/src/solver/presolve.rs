use nalgebra::{DMatrix, SymmetricEigen};

use crate::exactnum::Matrix;
use crate::sdp::{MatrixPencil, SdpProblem};

/// Relative eigenvalue cutoff for the common kernel.
const KERNEL_TOL: f64 = 1e-10;

/// Orthonormal basis `Q` (n × k) of the complement of the common kernel of
/// `F0` and every `Fᵢ`, or `None` when that kernel is trivial.
///
/// A vector `v` with `Fᵢ v = 0` for all `i` lies in the kernel of every
/// slack matrix, and `X + t·vvᵀ` is primal feasible with unchanged objective
/// for all `t ≥ 0`. Compressing to `Qᵀ Fᵢ Q` removes both degeneracies
/// without changing the feasible set in `y` or either optimal value.
pub(crate) fn common_range(prob: &SdpProblem<f64>) -> Option<DMatrix<f64>> {
    let n = prob.dim();
    let mut s = DMatrix::<f64>::zeros(n, n);
    let mats = std::iter::once(&prob.pencil.constant).chain(prob.pencil.terms.iter().map(|t| &t.matrix));
    for m in mats {
        let f = DMatrix::from_fn(n, n, |i, j| m[(i, j)]);
        s += &f * &f;
    }
    let eig = SymmetricEigen::new(s);
    let top = eig.eigenvalues.max();
    if !(top > 0.0) {
        return None;
    }
    let keep: Vec<usize> = (0..n).filter(|&k| eig.eigenvalues[k] > KERNEL_TOL * top).collect();
    if keep.len() == n {
        return None;
    }
    Some(DMatrix::from_fn(n, keep.len(), |i, j| eig.eigenvectors[(i, keep[j])]))
}

pub(crate) fn compress(prob: &SdpProblem<f64>, q: &DMatrix<f64>) -> SdpProblem<f64> {
    let n = prob.dim();
    let k = q.ncols();
    let squeeze = |m: &Matrix<f64>| {
        let f = DMatrix::from_fn(n, n, |i, j| m[(i, j)]);
        let g = q.transpose() * f * q;
        let mut out = Matrix::zeros(k, k);
        for i in 0..k {
            for j in i..k {
                out.set_sym(i, j, 0.5 * (g[(i, j)] + g[(j, i)]));
            }
        }
        out
    };
    let mut pencil = MatrixPencil::new(squeeze(&prob.pencil.constant));
    for t in &prob.pencil.terms {
        pencil.push(t.name.clone(), squeeze(&t.matrix));
    }
    SdpProblem {
        pencil,
        ..prob.clone()
    }
}

/// `Q X Qᵀ`.
pub(crate) fn lift(x: &Matrix<f64>, q: &DMatrix<f64>) -> Matrix<f64> {
    let k = q.ncols();
    let xs = DMatrix::from_fn(k, k, |i, j| x[(i, j)]);
    let full = q * xs * q.transpose();
    let n = full.nrows();
    let mut out = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            out.set_sym(i, j, 0.5 * (full[(i, j)] + full[(j, i)]));
        }
    }
    out
}
