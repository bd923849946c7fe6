use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::{
    Diagnosis, FacialError, FacialOptions, ReducingCertificate, RoundingMethod, StrictFeasibility,
};
use crate::exactnum::{
    is_positive_definite, kernel_basis_exact, psd_check_exact, rank, reconstruct::reconstruct_rational_tol,
    reconstruct_quadext, reconstruct_rational, row_space_basis, ExactMatrix, Matrix, QuadExt,
};
use crate::sdp::{Form, MatrixPencil, SdpProblem, StatusTag};
use crate::solver::solve_sdp;

pub const TRACE_VAR: &str = "t_trace";
pub const CONST_VAR: &str = "t_const";

/// Feasibility problem whose primal reads
///
/// ```text
///     X ⪰ 0,  ⟨C, X⟩ = 0,  ⟨Γᵢ, X⟩ = 0 ∀i,  tr X = 1
/// ```
///
/// in the dual-form encoding: zero constant term, one variable per matrix
/// (`t_const`, `t_<name>`, `t_trace`) and objective `−t_trace`. Matrices that
/// are linear combinations of earlier ones add no constraint and are
/// skipped.
pub fn build_alternative_problem(prob: &SdpProblem<QuadExt>) -> Result<SdpProblem<QuadExt>, FacialError> {
    if prob.form != Form::DualForm {
        return Err(FacialError::InvalidProblem("expected a dual-form problem".into()));
    }
    let violations = prob.validate();
    if !violations.is_empty() {
        let text: Vec<String> = violations.iter().map(ToString::to_string).collect();
        return Err(FacialError::InvalidProblem(text.join("; ")));
    }
    let n = prob.dim();
    let mut pencil = MatrixPencil::new(Matrix::zeros(n, n));
    let mut kept: Vec<Vec<QuadExt>> = Vec::new();
    let candidates = std::iter::once((CONST_VAR.to_string(), &prob.pencil.constant)).chain(
        prob.pencil
            .terms
            .iter()
            .map(|t| (format!("t_{}", t.name), &t.matrix)),
    );
    for (name, mat) in candidates {
        let flat: Vec<QuadExt> = (0..n)
            .flat_map(|i| (i..n).map(move |j| (i, j)))
            .map(|(i, j)| mat[(i, j)].clone())
            .collect();
        kept.push(flat);
        let stacked = Matrix::from_rows(kept.clone()).expect("equal lengths");
        if rank(&stacked) < kept.len() {
            kept.pop();
            continue;
        }
        pencil.push(name, mat.clone());
    }
    pencil.push(TRACE_VAR, Matrix::identity(n));
    let mut objective = vec![QuadExt::zero(); pencil.terms.len()];
    *objective.last_mut().unwrap() = -QuadExt::one();
    Ok(SdpProblem::dual_form(format!("{}-alternative", prob.name), pencil, objective)
        .with_note(format!("theorem-of-the-alternative system for {}", prob.name)))
}

/// Exact check of the second alternative: `X ⪰ 0`, `X ≠ 0`, `⟨C,X⟩ = 0` and
/// `⟨Γᵢ,X⟩ = 0`. Returns the violated conditions.
pub fn alternative_violations(prob: &SdpProblem<QuadExt>, x: &ExactMatrix) -> Vec<String> {
    let mut out = Vec::new();
    if x.rows() != prob.dim() || !x.is_square() {
        out.push(format!("X is {}x{}, expected {}x{}", x.rows(), x.cols(), prob.dim(), prob.dim()));
        return out;
    }
    if x.is_zero() {
        out.push("X = 0".into());
    }
    match psd_check_exact(x) {
        Ok(v) if v.is_psd() => {}
        Ok(_) => out.push("X is not positive semidefinite".into()),
        Err(e) => out.push(e.to_string()),
    }
    let c = prob.pencil.constant.inner(x);
    if !c.is_zero() {
        out.push(format!("<C, X> = {c}"));
    }
    for t in &prob.pencil.terms {
        let v = t.matrix.inner(x);
        if !v.is_zero() {
            out.push(format!("<F_{}, X> = {v}", t.name));
        }
    }
    out
}

/// Solves the alternative system numerically and turns the solution into an
/// exact certificate, or reports that the problem looks strictly feasible.
pub fn find_reducing_certificate(
    prob: &SdpProblem<QuadExt>,
    opts: &FacialOptions,
) -> Result<Diagnosis, FacialError> {
    let alt = build_alternative_problem(prob)?;
    if identity_in_span(&alt) {
        // tr X is then a combination of ⟨C,X⟩ and ⟨Γᵢ,X⟩, so X = 0.
        return Ok(Diagnosis::StrictlyFeasible(StrictFeasibility {
            tolerance: 0.0,
            interior_point: None,
            min_eigenvalue: None,
            solver_message: "the identity is a combination of the pencil matrices; \
                             the second alternative is empty (exact)"
                .into(),
        }));
    }
    let res = solve_sdp(&alt.to_f64(), &opts.solver).map_err(|e| FacialError::SolverFailed(e.to_string()))?;

    if res.status.tag == StatusTag::PrimalInfeasible {
        let t = |name: &str| res.y.get(name).copied().unwrap_or(0.0);
        let scale = t(CONST_VAR);
        let point = (scale > 0.0).then(|| {
            prob.var_names()
                .iter()
                .map(|v| (v.to_string(), t(&format!("t_{v}")) / scale))
                .collect::<crate::sdp::Assignment<f64>>()
        });
        let min_eig = point.as_ref().and_then(|p| {
            let m = prob.to_f64().pencil.eval(p).ok()?;
            Some(min_eigenvalue(&m))
        });
        return Ok(Diagnosis::StrictlyFeasible(StrictFeasibility {
            tolerance: opts.solver.feas_tol,
            interior_point: point,
            min_eigenvalue: min_eig,
            solver_message: res.status.message,
        }));
    }

    let x = &res.x;
    if !x.to_f64_vec().iter().all(|v| v.is_finite()) {
        return Err(FacialError::SolverFailed(format!(
            "alternative solve ended with non-finite X ({})",
            res.status
        )));
    }
    round_certificate(prob, x, opts).ok_or_else(|| {
        FacialError::RoundingFailed(format!(
            "no exact certificate near the numerical solution (solver status {}, tried denominators {:?})",
            res.status, opts.max_dens
        ))
    })
    .map(Diagnosis::Reducible)
}

fn identity_in_span(alt: &SdpProblem<QuadExt>) -> bool {
    let n = alt.dim();
    let flat = |m: &ExactMatrix| -> Vec<QuadExt> {
        (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).map(|(i, j)| m[(i, j)].clone()).collect()
    };
    let rows: Vec<Vec<QuadExt>> = alt.pencil.terms.iter().map(|t| flat(&t.matrix)).collect();
    let m = rows.len();
    rank(&Matrix::from_rows(rows).expect("equal lengths")) < m
}

trait FlatF64 {
    fn to_f64_vec(&self) -> Vec<f64>;
}

impl FlatF64 for Matrix<f64> {
    fn to_f64_vec(&self) -> Vec<f64> {
        (0..self.rows()).flat_map(|i| self.row(i).to_vec()).collect()
    }
}

fn to_dm(m: &Matrix<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)])
}

fn min_eigenvalue(m: &Matrix<f64>) -> f64 {
    SymmetricEigen::new(to_dm(m)).eigenvalues.min()
}

fn certificate(prob: &SdpProblem<QuadExt>, x: ExactMatrix, method: RoundingMethod) -> Option<ReducingCertificate> {
    if !alternative_violations(prob, &x).is_empty() {
        return None;
    }
    let range_vectors = row_space_basis(&x);
    Some(ReducingCertificate {
        x,
        range_vectors,
        method,
    })
}

/// Rounding ladder: entrywise rationals at increasing denominators, then
/// entrywise ℚ(√5) values, then the range-subspace construction.
fn round_certificate(
    prob: &SdpProblem<QuadExt>,
    x: &Matrix<f64>,
    opts: &FacialOptions,
) -> Option<ReducingCertificate> {
    let n = x.rows();
    let entrywise = |f: &dyn Fn(f64) -> Option<QuadExt>| -> Option<ExactMatrix> {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                m.set_sym(i, j, f(0.5 * (x[(i, j)] + x[(j, i)]))?);
            }
        }
        Some(m)
    };
    for &d in &opts.max_dens {
        let cand = entrywise(&|v| reconstruct_rational(v, d).ok().map(QuadExt::from));
        if let Some(c) = cand.and_then(|m| certificate(prob, m, RoundingMethod::Rational { max_den: d })) {
            return Some(c);
        }
    }
    for &d in &opts.max_dens {
        if let Some(c) = subspace_certificate(prob, x, d, opts) {
            return Some(c);
        }
    }
    for &d in &opts.max_dens {
        let cand = entrywise(&|v| reconstruct_quadext(v, d).ok());
        if let Some(c) = cand.and_then(|m| certificate(prob, m, RoundingMethod::QuadExt { max_den: d })) {
            return Some(c);
        }
    }
    for &d in &opts.max_dens {
        if let Some(c) = subspace_certificate(prob, x, d, opts) {
            return Some(c);
        }
    }
    None
}

/// Row-reduces with complete pivoting so that noise-level entries never
/// become pivots. Each returned row has a unit entry in its own pivot column
/// and zeros in the other pivot columns.
fn numeric_rref(mut a: DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let (rows, cols) = a.shape();
    let mut used = vec![false; cols];
    for r in 0..rows {
        let mut best = (r, 0, -1.0f64);
        for i in r..rows {
            for (j, _) in used.iter().enumerate().filter(|(_, u)| !**u) {
                if a[(i, j)].abs() > best.2 {
                    best = (i, j, a[(i, j)].abs());
                }
            }
        }
        let (p, c, mag) = best;
        if mag <= tol {
            return a.rows(0, r).into_owned();
        }
        used[c] = true;
        a.swap_rows(r, p);
        let piv = a[(r, c)];
        for j in 0..cols {
            a[(r, j)] /= piv;
        }
        for i in 0..rows {
            if i != r {
                let f = a[(i, c)];
                for j in 0..cols {
                    a[(i, j)] -= f * a[(r, j)];
                }
            }
        }
    }
    a
}

/// Rational of smallest denominator bound `10ᵏ ≤ max_den` within `tol`.
fn simplest_rational(x: f64, max_den: u64, tol: f64) -> Option<crate::exactnum::Rational> {
    std::iter::successors(Some(1u64), |d| d.checked_mul(10))
        .take_while(|&d| d < max_den)
        .chain(std::iter::once(max_den))
        .find_map(|d| reconstruct_rational_tol(x, d, tol).ok())
}

/// Builds `X = Vᵀ W V` where the rows of `V` are an exact rational basis of
/// the numerical range of `x` and `W ≻ 0` solves the orthogonality
/// conditions exactly.
fn subspace_certificate(
    prob: &SdpProblem<QuadExt>,
    x: &Matrix<f64>,
    max_den: u64,
    opts: &FacialOptions,
) -> Option<ReducingCertificate> {
    let n = x.rows();
    let xs = to_dm(x);
    let xs = (&xs + xs.transpose()) * 0.5;
    let eig = SymmetricEigen::new(xs.clone());
    let lmax = eig.eigenvalues.max();
    if !(lmax > 0.0) {
        return None;
    }
    let keep: Vec<usize> = (0..n)
        .filter(|&k| eig.eigenvalues[k] >= opts.eig_threshold * lmax)
        .collect();
    let r = keep.len();
    let basis = DMatrix::from_fn(r, n, |i, j| eig.eigenvectors[(j, keep[i])]);
    let reduced = numeric_rref(basis, 1e-8);
    if reduced.nrows() != r {
        return None;
    }

    // Exact basis V (r × n).
    let mut rows = Vec::with_capacity(r);
    for i in 0..r {
        let mut row = Vec::with_capacity(n);
        for j in 0..n {
            let q = simplest_rational(reduced[(i, j)], max_den, opts.basis_tol)?;
            row.push(QuadExt::from(q));
        }
        rows.push(row);
    }
    let v = Matrix::from_rows(rows).ok()?;
    if rank(&v) != r {
        return None;
    }

    // Linear conditions ⟨V F Vᵀ, W⟩ = 0 on symmetric r × r matrices W,
    // coordinates W_ab for a ≤ b.
    let pairs: Vec<(usize, usize)> = (0..r).flat_map(|a| (a..r).map(move |b| (a, b))).collect();
    let vt = v.transpose();
    let mats = std::iter::once(&prob.pencil.constant).chain(prob.pencil.terms.iter().map(|t| &t.matrix));
    let cond_rows: Vec<Vec<QuadExt>> = mats
        .map(|f| {
            let g = v.mul(f).mul(&vt);
            pairs
                .iter()
                .map(|&(a, b)| if a == b { g[(a, a)].clone() } else { &g[(a, b)] + &g[(b, a)] })
                .collect()
        })
        .collect();
    let kernel = kernel_basis_exact(&Matrix::from_rows(cond_rows).ok()?);
    if kernel.is_empty() {
        return None;
    }

    // Numeric W from X ≈ Vᵀ W V, projected onto the kernel.
    let vf = DMatrix::from_fn(r, n, |i, j| v[(i, j)].to_f64());
    let gram_inv = (&vf * vf.transpose()).try_inverse()?;
    let w = &gram_inv * &vf * &xs * vf.transpose() * &gram_inv;
    let wvec = DVector::from_iterator(pairs.len(), pairs.iter().map(|&(a, b)| w[(a, b)]));
    let kmat = DMatrix::from_fn(pairs.len(), kernel.len(), |p, k| kernel[k][p].to_f64());
    let coeffs = (kmat.transpose() * &kmat).try_inverse()? * kmat.transpose() * wvec;

    for den in [16u64, 1 << 10, 1 << 20] {
        let mut wexact: ExactMatrix = Matrix::zeros(r, r);
        for (k, kv) in kernel.iter().enumerate() {
            let c = QuadExt::from(reconstruct_rational_tol(coeffs[k], den, f64::INFINITY).ok()?);
            for (p, &(a, b)) in pairs.iter().enumerate() {
                let val = &wexact[(a, b)] + &(&c * &kv[p]);
                wexact.set_sym(a, b, val);
            }
        }
        if !is_positive_definite(&wexact) {
            continue;
        }
        let xexact = vt.mul(&wexact).mul(&v);
        if let Some(cert) = certificate(prob, xexact, RoundingMethod::Subspace { max_den }) {
            return Some(cert);
        }
    }
    None
}
