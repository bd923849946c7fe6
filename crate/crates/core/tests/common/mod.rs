#![allow(dead_code)]

pub mod reference;

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use strictfeas::bell::alpha;
use strictfeas::exactnum::{is_positive_definite, kernel_basis_exact, rank, ExactMatrix, Matrix, QuadExt, Rational};
use strictfeas::sdp::{MatrixPencil, SdpProblem};

/// Affine expression: variable name to coefficient, `""` for the constant.
pub type Lin = BTreeMap<String, QuadExt>;

/// Parses expressions such as `(4-mu)/6`, `mu/2 + 2*alpha*(1-mu)` or
/// `a01 - (1-mu)/6`. `alpha` and `sqrt5` are constants.
pub fn lin(src: &str) -> Lin {
    let toks = tokenize(src);
    let mut pos = 0;
    let v = expr(&toks, &mut pos);
    assert_eq!(pos, toks.len(), "trailing input in {src:?}");
    v.into_iter().filter(|(_, c)| !c.is_zero()).collect()
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(i64),
    Ident(String),
    Op(char),
}

fn tokenize(s: &str) -> Vec<Tok> {
    let cs: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < cs.len() {
        let c = cs[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let st = i;
            while i < cs.len() && cs[i].is_ascii_digit() {
                i += 1;
            }
            out.push(Tok::Num(cs[st..i].iter().collect::<String>().parse().unwrap()));
        } else if c.is_ascii_alphabetic() {
            let st = i;
            while i < cs.len() && (cs[i].is_ascii_alphanumeric() || cs[i] == '_') {
                i += 1;
            }
            out.push(Tok::Ident(cs[st..i].iter().collect()));
        } else {
            assert!("+-*/()".contains(c), "bad character {c:?} in {s:?}");
            out.push(Tok::Op(c));
            i += 1;
        }
    }
    out
}

fn constant(v: QuadExt) -> Lin {
    BTreeMap::from([(String::new(), v)])
}

fn as_constant(v: &Lin) -> Option<QuadExt> {
    match v.iter().filter(|(_, c)| !c.is_zero()).collect::<Vec<_>>().as_slice() {
        [] => Some(QuadExt::zero()),
        [(k, c)] if k.is_empty() => Some((*c).clone()),
        _ => None,
    }
}

fn add(mut a: Lin, b: &Lin, sign: i64) -> Lin {
    for (k, c) in b {
        let e = a.entry(k.clone()).or_insert_with(QuadExt::zero);
        *e = &*e + &(c * &QuadExt::from(sign));
    }
    a
}

fn scale(a: &Lin, s: &QuadExt) -> Lin {
    a.iter().map(|(k, c)| (k.clone(), c * s)).collect()
}

fn expr(t: &[Tok], pos: &mut usize) -> Lin {
    let mut acc = term(t, pos);
    while let Some(Tok::Op(op @ ('+' | '-'))) = t.get(*pos) {
        *pos += 1;
        let rhs = term(t, pos);
        acc = add(acc, &rhs, if *op == '+' { 1 } else { -1 });
    }
    acc
}

fn term(t: &[Tok], pos: &mut usize) -> Lin {
    let mut acc = factor(t, pos);
    while let Some(Tok::Op(op @ ('*' | '/'))) = t.get(*pos) {
        *pos += 1;
        let rhs = factor(t, pos);
        acc = if *op == '/' {
            let d = as_constant(&rhs).expect("division by a constant");
            scale(&acc, &d.recip().expect("nonzero divisor"))
        } else if let Some(c) = as_constant(&acc) {
            scale(&rhs, &c)
        } else {
            scale(&acc, &as_constant(&rhs).expect("product with a constant"))
        };
    }
    acc
}

fn factor(t: &[Tok], pos: &mut usize) -> Lin {
    let tok = t.get(*pos).cloned().expect("unexpected end of expression");
    *pos += 1;
    match tok {
        Tok::Num(n) => constant(QuadExt::from(n)),
        Tok::Ident(name) => match name.as_str() {
            "alpha" => constant(alpha()),
            "sqrt5" => constant(QuadExt::sqrt5()),
            _ => BTreeMap::from([(name, QuadExt::one())]),
        },
        Tok::Op('-') => scale(&factor(t, pos), &QuadExt::from(-1)),
        Tok::Op('(') => {
            let v = expr(t, pos);
            assert_eq!(t.get(*pos), Some(&Tok::Op(')')), "missing )");
            *pos += 1;
            v
        }
        other => panic!("unexpected token {other:?}"),
    }
}

/// Symmetric matrix of affine entries from upper-triangular rows, split into
/// one coefficient matrix per variable (`""` for the constant).
pub fn golden(upper: &[&[&str]]) -> BTreeMap<String, ExactMatrix> {
    let n = upper.len();
    let mut out: BTreeMap<String, ExactMatrix> = BTreeMap::new();
    out.insert(String::new(), Matrix::zeros(n, n));
    for (i, row) in upper.iter().enumerate() {
        assert_eq!(row.len(), n - i, "row {i} has the wrong length");
        for (k, s) in row.iter().enumerate() {
            let j = i + k;
            for (var, c) in lin(s) {
                out.entry(var)
                    .or_insert_with(|| Matrix::zeros(n, n))
                    .set_sym(i, j, c);
            }
        }
    }
    out
}

/// Describes the first mismatch between a pencil and a golden matrix.
pub fn compare_pencil(
    pencil: &MatrixPencil<QuadExt>,
    expected: &BTreeMap<String, ExactMatrix>,
) -> Result<(), String> {
    let mut actual: BTreeMap<String, &ExactMatrix> = BTreeMap::new();
    actual.insert(String::new(), &pencil.constant);
    for t in &pencil.terms {
        actual.insert(t.name.clone(), &t.matrix);
    }
    let names_a: BTreeSet<_> = actual.keys().collect();
    let names_e: BTreeSet<_> = expected.keys().collect();
    if names_a != names_e {
        return Err(format!("variables differ: pencil {names_a:?}, golden {names_e:?}"));
    }
    for (name, m) in expected {
        let a = actual[name];
        if a.rows() != m.rows() {
            return Err(format!("dimension {} vs {}", a.rows(), m.rows()));
        }
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                if a.row(i)[j] != m.row(i)[j] {
                    let label = if name.is_empty() { "constant" } else { name };
                    return Err(format!(
                        "{label} coefficient at ({}, {}): pencil {}, golden {}",
                        i + 1,
                        j + 1,
                        a.row(i)[j],
                        m.row(i)[j]
                    ));
                }
            }
        }
    }
    Ok(())
}

/// Objective as an affine form over variable names.
pub fn objective_of(prob: &SdpProblem<QuadExt>) -> Lin {
    let mut out: Lin = prob
        .pencil
        .terms
        .iter()
        .zip(&prob.objective)
        .filter(|(_, c)| !c.is_zero())
        .map(|(t, c)| (t.name.clone(), c.clone()))
        .collect();
    if !prob.offset.is_zero() {
        out.insert(String::new(), prob.offset.clone());
    }
    out
}

/// A random dual-form SDP with a known optimal pair and interior points on
/// both sides.
///
/// `S* = AAᵀ` and `X* = BBᵀ` with `range(B) = ker(Aᵀ)`, so `⟨S*,X*⟩ = 0`
/// and `S* + X* ≻ 0`. Every `Fᵢ` is orthogonal to `S*`, hence `X* + S*` is a
/// positive definite primal point; `F1` is `X*` plus a perturbation with
/// `S* + F1 ≻ 0`, hence `y* + e₁` is strictly feasible. `bᵢ = −⟨Fᵢ,X*⟩`
/// makes `X*` a bound certificate whose value `⟨F0,X*⟩ = ⟨b,y*⟩` is attained
/// at `y*`.
pub struct RandomSdp {
    pub problem: SdpProblem<QuadExt>,
    pub optimal_y: Vec<QuadExt>,
    pub interior_y: Vec<QuadExt>,
    pub interior_x: ExactMatrix,
    pub certificate: ExactMatrix,
    pub value: QuadExt,
}

fn int_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, lim: i64) -> ExactMatrix {
    let data = (0..rows)
        .map(|_| (0..cols).map(|_| QuadExt::from(rng.gen_range(-lim..=lim))).collect())
        .collect();
    Matrix::from_rows(data).unwrap()
}

fn random_symmetric(rng: &mut ChaCha8Rng, n: usize, lim: i64) -> ExactMatrix {
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            m.set_sym(i, j, QuadExt::from(rng.gen_range(-lim..=lim)));
        }
    }
    m
}

/// `G − (⟨G,S⟩/⟨S,S⟩) S`.
fn project_out(g: &ExactMatrix, s: &ExactMatrix) -> ExactMatrix {
    let c = &g.inner(s) / &s.inner(s);
    let mut out = g.clone();
    out.add_scaled(&-c, s);
    out
}

fn upper_vec(m: &ExactMatrix) -> Vec<QuadExt> {
    (0..m.rows()).flat_map(|i| m.row(i)[i..].to_vec()).collect()
}

pub fn random_sdp(seed: u64) -> RandomSdp {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..=6usize);
    let m = rng.gen_range(1..=6usize.min(n * (n + 1) / 2 - 1));
    let r = rng.gen_range(1..n);

    let a = loop {
        let a = int_matrix(&mut rng, n, r, 2);
        if rank(&a) == r {
            break a;
        }
    };
    let s_star = a.mul(&a.transpose());
    let kernel = kernel_basis_exact(&a.transpose());
    assert_eq!(kernel.len(), n - r);
    let b = Matrix::from_rows(kernel).unwrap().transpose();
    let x_star = b.mul(&b.transpose());

    let quarter = QuadExt::ratio(1, 4);
    let terms = loop {
        let f1 = x_star.add(&project_out(&random_symmetric(&mut rng, n, 1), &s_star).scale(&quarter));
        if !is_positive_definite(&s_star.add(&f1)) {
            continue;
        }
        let mut terms = vec![f1];
        for _ in 1..m {
            terms.push(project_out(&random_symmetric(&mut rng, n, 3), &s_star));
        }
        let vecs = Matrix::from_rows(terms.iter().map(upper_vec).collect()).unwrap();
        if rank(&vecs) == m {
            break terms;
        }
    };
    let y_star: Vec<QuadExt> = (0..m).map(|_| QuadExt::from(rng.gen_range(-2..=2i64))).collect();

    let mut f0 = s_star.clone();
    for (f, y) in terms.iter().zip(&y_star) {
        f0.add_scaled(&-y.clone(), f);
    }
    let mut pencil = MatrixPencil::new(f0);
    let mut objective = Vec::new();
    for (i, f) in terms.into_iter().enumerate() {
        objective.push(-f.inner(&x_star));
        pencil.push(format!("y{}", i + 1), f);
    }
    let problem = SdpProblem::dual_form(format!("random-{seed}"), pencil, objective);
    let value = problem.objective_value(&y_star);
    let mut interior_y = y_star.clone();
    interior_y[0] = &interior_y[0] + &QuadExt::one();
    RandomSdp {
        problem,
        optimal_y: y_star,
        interior_y,
        interior_x: x_star.add(&s_star),
        certificate: x_star,
        value,
    }
}

/// Smallest eigenvalue of a double symmetric matrix.
pub fn min_eigenvalue(m: &Matrix<f64>) -> f64 {
    let n = m.rows();
    let dm = nalgebra::DMatrix::from_fn(n, n, |i, j| m.row(i)[j]);
    dm.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
}

/// `⌊√5 · 10⁵⁰⌋`, from integer square root.
pub fn sqrt5_scaled() -> BigInt {
    (BigInt::from(5) * BigInt::from(10).pow(100)).sqrt()
}

/// Sign of `a + b√5` evaluated with a 50-digit decimal expansion of `√5`.
pub fn decimal_sign(x: &QuadExt, s: &BigInt) -> i32 {
    let (a, b) = parts(x);
    let scale = BigInt::from(10).pow(50);
    // a = p/q, b = r/t: sign of (p t 10⁵⁰ + r q S), with |error| < |r q|.
    let v = a.numer() * b.denom() * &scale + b.numer() * a.denom() * s;
    let err = (b.numer() * a.denom()).abs();
    assert!(v.is_zero() && err.is_zero() || v.abs() > err, "decimal precision insufficient");
    if v.is_zero() {
        0
    } else if v.is_positive() {
        1
    } else {
        -1
    }
}

fn parts(x: &QuadExt) -> (Rational, Rational) {
    let conj = x.conj();
    let two = QuadExt::from(2);
    let a = (x + &conj) / two.clone();
    let b = (x - &conj) / (&two * &QuadExt::sqrt5());
    (rational_of(&a), rational_of(&b))
}

fn rational_of(x: &QuadExt) -> Rational {
    assert!(x.is_rational());
    x.to_string().parse().unwrap()
}
