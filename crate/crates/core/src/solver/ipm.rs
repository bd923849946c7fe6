use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::{Diagnostics, IterRecord, SolveError, SolveResult, SolverOptions};
use crate::exactnum::Matrix;
use crate::sdp::{Assignment, SdpProblem, SolveStatus, StatusTag};

type Mat = DMatrix<f64>;

/// Problem data in standard-form orientation: `C = F0`, `Aᵢ = −Fᵢ`.
struct Data {
    c: Mat,
    f: Vec<Mat>,
    b: DVector<f64>,
    n: usize,
    norm_b: f64,
    norm_c: f64,
}

impl Data {
    fn new(prob: &SdpProblem<f64>) -> Self {
        let c = to_dm(&prob.pencil.constant);
        let f: Vec<Mat> = prob.pencil.terms.iter().map(|t| to_dm(&t.matrix)).collect();
        let b = DVector::from_vec(prob.objective.clone());
        Data {
            n: c.nrows(),
            norm_b: b.norm(),
            norm_c: c.norm(),
            c,
            f,
            b,
        }
    }

    fn m(&self) -> usize {
        self.f.len()
    }

    fn pencil(&self, y: &DVector<f64>) -> Mat {
        let mut s = self.c.clone();
        for (fi, yi) in self.f.iter().zip(y.iter()) {
            s += fi * *yi;
        }
        s
    }

    fn homogeneous(&self, y: &DVector<f64>) -> Mat {
        let mut s = Mat::zeros(self.n, self.n);
        for (fi, yi) in self.f.iter().zip(y.iter()) {
            s += fi * *yi;
        }
        s
    }

    fn apply(&self, x: &Mat) -> DVector<f64> {
        DVector::from_iterator(self.m(), self.f.iter().map(|fi| fi.dot(x)))
    }
}

fn to_dm(m: &Matrix<f64>) -> Mat {
    DMatrix::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)])
}

fn from_dm(m: &Mat) -> Matrix<f64> {
    let rows = (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect();
    Matrix::from_rows(rows).expect("rectangular by construction")
}

fn sym(m: &Mat) -> Mat {
    (m + m.transpose()) * 0.5
}

fn min_eig(m: &Mat) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    SymmetricEigen::new(sym(m)).eigenvalues.min()
}

fn vmax(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0, |a, v| a.max(v.abs()))
}

fn max_abs(m: &Mat) -> f64 {
    m.iter().fold(0.0, |a, v| a.max(v.abs()))
}

/// Largest `α` with `P + α·D ⪰ 0`, given the lower Cholesky factor `l` of `P`.
fn step_to_boundary(l_inv: &Mat, d: &Mat) -> f64 {
    let e = min_eig(&(l_inv * d * l_inv.transpose()));
    if e < 0.0 {
        -1.0 / e
    } else {
        f64::INFINITY
    }
}

/// Nesterov-Todd scaling point `W = G Gᵀ` with `G⁻¹ X G⁻ᵀ = Gᵀ Z G = diag(λ)`.
struct Scaling {
    g: Mat,
    g_inv: Mat,
    lambda: DVector<f64>,
}

fn nt_scaling(lx: &Mat, lx_inv: &Mat, lz: &Mat) -> Option<Scaling> {
    let svd = (lz.transpose() * lx).svd(true, true);
    let v = svd.v_t.as_ref()?.transpose();
    let s = svd.singular_values.clone();
    if s.iter().any(|v| !(*v > 0.0)) {
        return None;
    }
    let inv_sqrt = Mat::from_diagonal(&s.map(|v| 1.0 / v.sqrt()));
    let sqrt = Mat::from_diagonal(&s.map(f64::sqrt));
    let g = lx * &v * inv_sqrt;
    let g_inv = sqrt * v.transpose() * lx_inv;
    Some(Scaling {
        g,
        g_inv,
        lambda: s,
    })
}

fn svec(m: &Mat) -> DVector<f64> {
    let n = m.nrows();
    let mut v = DVector::zeros(n * (n + 1) / 2);
    let mut r = 0;
    for i in 0..n {
        for j in i..n {
            v[r] = if i == j { m[(i, i)] } else { m[(i, j)] * std::f64::consts::SQRT_2 };
            r += 1;
        }
    }
    v
}

fn smat(v: &DVector<f64>, n: usize) -> Mat {
    let mut m = Mat::zeros(n, n);
    let mut r = 0;
    for i in 0..n {
        for j in i..n {
            let e = if i == j { v[r] } else { v[r] / std::f64::consts::SQRT_2 };
            m[(i, j)] = e;
            m[(j, i)] = e;
            r += 1;
        }
    }
    m
}

/// Thin QR factorization `ÃS = QR` of the scaled constraint operator, whose
/// column `i` is `svec(GᵀFᵢG)` and `S` equilibrates the columns. The Schur
/// complement is `ÃᵀÃ = S⁻¹RᵀRS⁻¹`; working with `Q` and `R` keeps errors
/// proportional to `cond(R)` rather than `cond(R)²`.
struct NewtonFactor {
    q: Mat,
    r: Mat,
    scale: DVector<f64>,
    /// Condition number of `R`.
    cond: f64,
}

impl NewtonFactor {
    fn new(f: &[Mat], g: &Mat) -> Self {
        let n = g.nrows();
        let m = f.len();
        let mut a = Mat::zeros(n * (n + 1) / 2, m);
        let mut scale = DVector::zeros(m);
        for (k, fk) in f.iter().enumerate() {
            let col = svec(&sym(&(g.transpose() * fk * g)));
            let norm = col.norm();
            scale[k] = if norm > 0.0 { 1.0 / norm } else { 0.0 };
            a.set_column(k, &(col * scale[k]));
        }
        let empty = |cond| NewtonFactor {
            q: Mat::zeros(a.nrows(), 0),
            r: Mat::zeros(0, 0),
            scale: scale.clone(),
            cond,
        };
        if m == 0 {
            return empty(1.0);
        }
        if a.nrows() < m || scale.iter().any(|s| *s == 0.0) {
            return empty(f64::INFINITY);
        }
        let qr = a.qr();
        let (q, r) = (qr.q(), qr.r());
        let sv = r.singular_values();
        let (lo, hi) = (sv.min(), sv.max());
        let cond = if lo > 0.0 && hi.is_finite() { hi / lo } else { f64::INFINITY };
        NewtonFactor { q, r, scale, cond }
    }
}

struct Direction {
    dx: Mat,
    dy: DVector<f64>,
    dz: Mat,
}

/// Solves the scaled Newton system for the complementarity right-hand side
/// `rc` (in the scaled space, where the linearization reads
/// `Λ(ΔX̃ + ΔZ̃) + (ΔX̃ + ΔZ̃)Λ = rc`).
///
/// With `u = svec(D − GᵀR_dG)`, `D = rc ⊘ (λᵢ + λⱼ)`, the primal step is
/// `ΔX̃ = u − Q(Qᵀu + R⁻ᵀS·rp)`, which meets `𝒜(ΔX) = −rp` by construction,
/// and `Δy = S·R⁻¹(Qᵀu + R⁻ᵀS·rp)`, `ΔZ = R_d + Σ Δyᵢ Fᵢ`.
fn direction(
    data: &Data,
    sc: &Scaling,
    nf: &NewtonFactor,
    rp: &DVector<f64>,
    rd: &Mat,
    rc: &Mat,
) -> Direction {
    let n = data.n;
    let lam = &sc.lambda;
    let d = Mat::from_fn(n, n, |i, j| rc[(i, j)] / (lam[i] + lam[j]));
    let u = svec(&sym(&(d - sc.g.transpose() * rd * &sc.g)));
    let (dy, dxs) = if data.m() == 0 {
        (DVector::zeros(0), u)
    } else {
        let w = nf
            .r
            .tr_solve_upper_triangular(&rp.component_mul(&nf.scale))
            .expect("nonsingular after the condition check");
        let c = nf.q.transpose() * &u + w;
        let t = nf.r.solve_upper_triangular(&c).expect("nonsingular after the condition check");
        (t.component_mul(&nf.scale), u - &nf.q * c)
    };
    let dz = sym(&(rd + data.homogeneous(&dy)));
    let dx = sym(&(&sc.g * smat(&dxs, n) * sc.g.transpose()));
    Direction { dx, dy, dz }
}

struct Outcome {
    tag: StatusTag,
    message: String,
}

pub(super) fn run(prob: &SdpProblem<f64>, opts: &SolverOptions) -> Result<SolveResult, SolveError> {
    let data = Data::new(prob);
    let (n, m) = (data.n, data.m());
    let offset = prob.offset;

    let sqrt_n = (n as f64).sqrt();
    let norm_f = data.f.iter().map(|f| f.norm()).fold(0.0, f64::max);
    let xi = data
        .f
        .iter()
        .zip(data.b.iter())
        .map(|(f, b)| n as f64 * (1.0 + b.abs()) / (1.0 + f.norm()))
        .fold(sqrt_n.max(10.0), f64::max);
    let zeta = sqrt_n.max(10.0).max(norm_f).max(data.norm_c);
    if !(xi.is_finite() && zeta.is_finite()) {
        return Err(SolveError::NoInteriorStartFound(format!(
            "initial scale is not finite (primal {xi}, dual {zeta})"
        )));
    }

    let mut x = Mat::identity(n, n) * xi;
    let mut z = Mat::identity(n, n) * zeta;
    let mut y = DVector::<f64>::zeros(m);

    let mut history = Vec::new();
    let mut cond = 0.0;
    let mut stalls = 0;
    let mut prev_steps = (1.0f64, 1.0f64);
    let mut iter = 0;

    let outcome = loop {
        let pobj = data.c.dot(&x) + offset;
        let dobj = data.b.dot(&y) + offset;
        let rp = &data.b + data.apply(&x);
        let rd = sym(&(data.pencil(&y) - &z));
        let pinf = rp.norm() / (1.0 + data.norm_b);
        let dinf = rd.norm() / (1.0 + data.norm_c);
        let mu = x.dot(&z) / n as f64;
        let magnitude = vmax(&y).max(max_abs(&x));
        history.push(IterRecord {
            iter,
            objective_primal: pobj,
            objective_dual: dobj,
            primal_infeasibility: pinf,
            dual_infeasibility: dinf,
            mu,
            step_primal: prev_steps.0,
            step_dual: prev_steps.1,
            max_abs_variable: magnitude,
        });

        if ![pobj, dobj, pinf, dinf, mu].iter().all(|v| v.is_finite()) {
            break Outcome {
                tag: StatusTag::NumericalTrouble,
                message: "iterates became non-finite".into(),
            };
        }

        let gap_ok = (pobj - dobj).abs() <= opts.gap_tol * (1.0 + pobj.abs());
        if gap_ok && pinf <= opts.feas_tol && dinf <= opts.feas_tol {
            let slack = min_eig(&data.pencil(&y));
            if slack >= -opts.feas_tol {
                break Outcome {
                    tag: StatusTag::Optimal,
                    message: format!("converged in {iter} iterations"),
                };
            }
        }

        let by = data.b.dot(&y);
        if by > 0.0 && m > 0 {
            let ray = data.homogeneous(&(&y / by));
            if min_eig(&ray) >= -opts.feas_tol {
                break Outcome {
                    tag: StatusTag::PrimalInfeasible,
                    message: format!(
                        "y/⟨b,y⟩ is a ray of the pencil (⟨b,y⟩ = {by:.3e}); the primal has no feasible X"
                    ),
                };
            }
        }

        if magnitude > opts.var_bound {
            let rising = history.len() >= 4
                && history[history.len() - 4..]
                    .windows(2)
                    .all(|w| w[1].objective_dual > w[0].objective_dual);
            break if vmax(&y) > opts.var_bound && rising {
                Outcome {
                    tag: StatusTag::DualUnboundedSuspected,
                    message: format!(
                        "|y| reached {:.3e} while ⟨b,y⟩ kept increasing",
                        vmax(&y)
                    ),
                }
            } else {
                Outcome {
                    tag: StatusTag::NumericalTrouble,
                    message: format!(
                        "iterate magnitude {magnitude:.3e} exceeds bound {:.1e}",
                        opts.var_bound
                    ),
                }
            };
        }

        if iter >= opts.max_iter {
            break Outcome {
                tag: StatusTag::IterationLimit,
                message: format!("stopped after {iter} iterations"),
            };
        }

        let (Some(cx), Some(cz)) = (x.clone().cholesky(), z.clone().cholesky()) else {
            break Outcome {
                tag: StatusTag::NumericalTrouble,
                message: "iterate lost positive definiteness".into(),
            };
        };
        let lx = cx.l();
        let lz = cz.l();
        let id = Mat::identity(n, n);
        let (Some(lx_inv), Some(lz_inv)) = (
            lx.solve_lower_triangular(&id),
            lz.solve_lower_triangular(&id),
        ) else {
            break Outcome {
                tag: StatusTag::NumericalTrouble,
                message: "singular Cholesky factor".into(),
            };
        };
        let Some(sc) = nt_scaling(&lx, &lx_inv, &lz) else {
            break Outcome {
                tag: StatusTag::NumericalTrouble,
                message: "scaling point is singular".into(),
            };
        };

        let nf = NewtonFactor::new(&data.f, &sc.g);
        cond = nf.cond;
        if cond > opts.cond_limit {
            break Outcome {
                tag: StatusTag::NumericalTrouble,
                message: format!(
                    "Newton system condition estimate {cond:.3e} exceeds {:.1e}",
                    opts.cond_limit
                ),
            };
        }

        let lam = &sc.lambda;
        let lam2 = Mat::from_diagonal(&lam.map(|v| v * v));

        // Predictor.
        let rc_aff = &lam2 * -2.0;
        let aff = direction(&data, &sc, &nf, &rp, &rd, &rc_aff);
        let ap = step_to_boundary(&lx_inv, &aff.dx).min(1.0);
        let ad = step_to_boundary(&lz_inv, &aff.dz).min(1.0);
        let mu_aff = (&x + &aff.dx * ap).dot(&(&z + &aff.dz * ad)) / n as f64;
        let expon = (3.0 * ap.min(ad).powi(2)).max(1.0);
        let sigma = (mu_aff / mu).max(0.0).powf(expon).min(1.0);

        // Corrector.
        let dxs = &sc.g_inv * &aff.dx * sc.g_inv.transpose();
        let dzs = sc.g.transpose() * &aff.dz * &sc.g;
        let second = &dxs * &dzs + &dzs * &dxs;
        let rc = id * (2.0 * sigma * mu) - lam2 * 2.0 - second;
        let dir = direction(&data, &sc, &nf, &rp, &rd, &sym(&rc));

        let gamma = 0.9 + 0.09 * prev_steps.0.min(prev_steps.1);
        let ap = (gamma * step_to_boundary(&lx_inv, &dir.dx)).min(1.0);
        let ad = (gamma * step_to_boundary(&lz_inv, &dir.dz)).min(1.0);

        x = sym(&(&x + &dir.dx * ap));
        y += &dir.dy * ad;
        z = sym(&(&z + &dir.dz * ad));
        prev_steps = (ap, ad);
        iter += 1;

        if ap.min(ad) < opts.min_step {
            stalls += 1;
            if stalls >= opts.stall_iters {
                let last = history.last().unwrap();
                history.push(IterRecord {
                    iter,
                    step_primal: ap,
                    step_dual: ad,
                    ..last.clone()
                });
                break Outcome {
                    tag: StatusTag::NumericalTrouble,
                    message: format!(
                        "step length below {:.1e} for {stalls} consecutive iterations",
                        opts.min_step
                    ),
                };
            }
        } else {
            stalls = 0;
        }
    };

    let pobj = data.c.dot(&x) + offset;
    let dobj = data.b.dot(&y) + offset;
    let names = prob.pencil.var_names();
    let assignment: Assignment<f64> = names
        .iter()
        .zip(y.iter())
        .map(|(k, v)| (k.to_string(), *v))
        .collect();
    Ok(SolveResult {
        status: SolveStatus::new(outcome.tag, outcome.message),
        y: assignment,
        x: from_dm(&x),
        objective_primal: pobj,
        objective_dual: dobj,
        diagnostics: Diagnostics {
            iterations: iter,
            final_gap: (pobj - dobj).abs(),
            max_abs_variable: vmax(&y).max(max_abs(&x)),
            min_slack_eigenvalue_estimate: min_eig(&data.pencil(&y)),
            condition_estimate: cond,
            common_kernel_dim: 0,
            history,
        },
    })
}
