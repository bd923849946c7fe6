use super::*;
use crate::sdp::SdpProblem;

fn q(s: &str) -> QuadExt {
    s.parse().unwrap()
}

/// Entry (i, j) of the pencil as (constant, {var: coefficient}) with zero
/// coefficients dropped.
fn entry(prob: &SdpProblem<QuadExt>, i: usize, j: usize) -> (QuadExt, Vec<(String, QuadExt)>) {
    let c = prob.pencil.constant[(i, j)].clone();
    let terms = prob
        .pencil
        .terms
        .iter()
        .filter(|t| !t.matrix[(i, j)].is_zero())
        .map(|t| (t.name.clone(), t.matrix[(i, j)].clone()))
        .collect();
    (c, terms)
}

#[test]
fn builtin_values() {
    let b = builtin_points();
    assert_eq!(*b.p.p(1, 1), QuadExt::zero());
    assert_eq!(*b.l.p_a(1), QuadExt::ratio(2, 3));
    assert_eq!(*b.h.p(0, 1), q("9/38-1/38*sqrt5"));
    assert_eq!(b.alpha, q("9/38-1/38*sqrt5"));
}

#[test]
fn line_points() {
    let l1 = BehaviorLine::l1();
    assert_eq!(l1.at(&QuadExt::zero()).unwrap(), builtin_points().l);
    assert_eq!(l1.at(&QuadExt::one()).unwrap(), builtin_points().p);
    // p_A(1) along l1 is (4 − μ)/6.
    let mu = QuadExt::ratio(3, 7);
    let expect = &(&QuadExt::from(4) - &mu) / &QuadExt::from(6);
    assert_eq!(*l1.at(&mu).unwrap().p_a(1), expect);
    // p_B(1) along l2 is μ/2 + 2α(1 − μ).
    let a = alpha();
    let l2 = BehaviorLine::l2();
    let expect = &(&mu / &QuadExt::from(2)) + &(&(&a + &a) * &(&QuadExt::one() - &mu));
    assert_eq!(*l2.at(&mu).unwrap().p_b(1), expect);
    assert!(matches!(
        l1.at(&QuadExt::ratio(11, 10)),
        Err(BellError::ParameterOutOfRange(_))
    ));
    assert!(l1.at(&q("-1/100")).is_err());
}

#[test]
fn table_validation() {
    let mut e = builtin_points().l.entries;
    e[1][1] = QuadExt::ratio(2, 3); // p(0,0) > p_A(0)
    assert!(CollinsGisinTable::new(e).is_err());
    let mut e = builtin_points().l.entries;
    e[0][0] = QuadExt::zero();
    assert!(CollinsGisinTable::new(e).is_err());
}

#[test]
fn word_reduction() {
    let a0 = MomentLabel::new(&[0], &[]);
    assert_eq!(MomentLabel::product(&a0, &a0), a0);
    let u = MomentLabel::new(&[1], &[0]);
    let v = MomentLabel::new(&[0], &[0]);
    // (A1B0)†(A0B0) = A1A0 B0
    let w = MomentLabel::product(&u, &v);
    assert_eq!(w, MomentLabel::new(&[1, 0], &[0]));
    assert_eq!(w.canonical().var_name(), "c01_0");
    assert_eq!(MomentLabel::new(&[0, 1], &[1, 0]).var_name(), "c01_10");
    assert_eq!(MomentLabel::new(&[1, 0], &[0, 1]).canonical().var_name(), "c01_10");
    assert_eq!(MomentLabel::new(&[1, 0], &[1, 0]).canonical().var_name(), "c01_01");
}

#[test]
fn problem1_pencil_spot_entries() {
    let p = almost_quantum_pencil(&BehaviorLine::l1());
    assert_eq!(
        p.var_names(),
        ["mu", "a01", "b01", "c0_01", "c1_01", "c01_0", "c01_1", "c01_01", "c01_10"]
    );
    // (A0, A1B0) is c01,0.
    assert_eq!(entry(&p, 1, 7), (QuadExt::zero(), vec![("c01_0".into(), QuadExt::one())]));
    // (1, A1B1) is (1 − μ)/6.
    assert_eq!(
        entry(&p, 0, 8),
        (QuadExt::ratio(1, 6), vec![("mu".into(), QuadExt::ratio(-1, 6))])
    );
    assert_eq!(entry(&p, 5, 8).1, vec![("c01_01".to_string(), QuadExt::one())]);
    assert_eq!(entry(&p, 6, 7).1, vec![("c01_10".to_string(), QuadExt::one())]);
}

#[test]
fn problem2_pencil_spot_entries() {
    let p = almost_quantum_pencil(&BehaviorLine::l2());
    assert_eq!(entry(&p, 8, 8), (QuadExt::zero(), vec![]));
    assert_eq!(
        entry(&p, 5, 5),
        (QuadExt::zero(), vec![("mu".into(), QuadExt::ratio(1, 2))])
    );
}

#[test]
fn degenerate_line_has_no_mu_dependence() {
    let b = builtin_points();
    let line = BehaviorLine::new("flat", b.l.clone(), b.l);
    let p = almost_quantum_pencil(&line);
    assert!(p.pencil.term(MU).unwrap().is_zero());
}

#[test]
fn moment_consistency() {
    let labels = moment_matrix_labels(&AQ_BASIS);
    let b = builtin_points();
    let p = almost_quantum_pencil(&BehaviorLine::new("flat", b.l.clone(), b.l.clone()));
    for i in 0..9 {
        for j in 0..9 {
            assert_eq!(labels[i][j], labels[j][i]);
            for k in 0..9 {
                for l in 0..9 {
                    if labels[i][j] == labels[k][l] {
                        assert_eq!(entry(&p, i, j), entry(&p, k, l));
                    }
                }
            }
        }
    }
    // Marginals sit on the diagonal and in the first row.
    for x in 0..2 {
        assert_eq!(p.pencil.constant[(1 + x, 1 + x)], *b.l.p_a(x));
        assert_eq!(p.pencil.constant[(3 + x, 3 + x)], *b.l.p_b(x));
        for y in 0..2 {
            assert_eq!(p.pencil.constant[(1 + x, 3 + y)], *b.l.p(x, y));
        }
    }
}

#[test]
fn toy_layout() {
    let p = chsh_toy_pencil();
    assert_eq!(
        p.var_names(),
        ["pA0", "pA1", "a01", "b01", "p00", "p01", "p10", "p11"]
    );
    assert_eq!(p.pencil.constant[(0, 0)], QuadExt::one());
    assert_eq!(entry(&p, 3, 4).1, vec![("b01".to_string(), QuadExt::one())]);
    assert_eq!(entry(&p, 3, 3), (QuadExt::zero(), vec![]));
    assert_eq!(entry(&p, 4, 4), (QuadExt::zero(), vec![]));
    let obj: Vec<i64> = vec![-1, 0, 0, 0, 1, 1, 1, -1];
    let expect: Vec<QuadExt> = obj.into_iter().map(QuadExt::from).collect();
    assert_eq!(p.objective, expect);
    // Zero assignment gives e₁e₁ᵀ.
    let y = vec![QuadExt::zero(); 8];
    let m = p.pencil.eval_vec(&y).unwrap();
    for i in 0..5 {
        for j in 0..5 {
            let v = if i == 0 && j == 0 { QuadExt::one() } else { QuadExt::zero() };
            assert_eq!(m[(i, j)], v);
        }
    }
}
