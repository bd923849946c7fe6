use proptest::prelude::*;
use strictfeas::exactnum::{Matrix, QuadExt, Rational};
use strictfeas::sdp::json::{parse_problem, problem_to_string, AnyProblem};
use strictfeas::sdp::{MatrixPencil, SdpProblem};

fn q() -> impl Strategy<Value = QuadExt> {
    (-20i64..=20, 1i64..=6, -3i64..=3).prop_map(|(p, d, s)| QuadExt::new(Rational::new(p, d), Rational::new(s, d)))
}

fn sym(n: usize) -> impl Strategy<Value = Matrix<QuadExt>> {
    proptest::collection::vec(q(), n * (n + 1) / 2).prop_map(move |v| {
        let mut m = Matrix::zeros(n, n);
        let mut it = v.into_iter();
        for i in 0..n {
            for j in i..n {
                m.set_sym(i, j, it.next().unwrap());
            }
        }
        m
    })
}

fn problem() -> impl Strategy<Value = SdpProblem<QuadExt>> {
    (1usize..=4, 0usize..=4)
        .prop_flat_map(|(n, m)| (sym(n), proptest::collection::vec((sym(n), q()), m)))
        .prop_map(|(f0, terms)| {
            let mut p = MatrixPencil::new(f0);
            let mut b = Vec::new();
            for (i, (f, c)) in terms.into_iter().enumerate() {
                p.push(format!("x{i}"), f);
                b.push(c);
            }
            SdpProblem::dual_form("random", p, b)
        })
}

fn point(prob: &SdpProblem<QuadExt>) -> impl Strategy<Value = Vec<QuadExt>> {
    proptest::collection::vec(q(), prob.num_vars())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn evaluation_is_affine((prob, y1, y2) in problem().prop_flat_map(|p| (Just(p.clone()), point(&p), point(&p)))) {
        let e = |y: &[QuadExt]| prob.pencil.eval_vec(y).unwrap();
        let zero = vec![QuadExt::zero(); prob.num_vars()];
        let sum: Vec<QuadExt> = y1.iter().zip(&y2).map(|(a, b)| a + b).collect();
        let lhs = e(&y1).add(&e(&y2));
        let rhs = e(&zero).add(&e(&sum));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn inner_product_identity((prob, y, x) in problem().prop_flat_map(|p| {
        let n = p.dim();
        (Just(p.clone()), point(&p), sym(n))
    })) {
        let lhs = x.inner(&prob.pencil.eval_vec(&y).unwrap());
        let mut rhs = x.inner(&prob.pencil.constant);
        for (t, yi) in prob.pencil.terms.iter().zip(&y) {
            rhs = &rhs + &(yi * &x.inner(&t.matrix));
        }
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn dualize_is_an_involution(prob in problem()) {
        prop_assert_eq!(prob.dualize().dualize(), prob.clone());
        prop_assert_ne!(prob.dualize().form, prob.form);
    }

    #[test]
    fn json_roundtrip(prob in problem()) {
        let text = problem_to_string(&AnyProblem::Exact(prob.clone()));
        let back = parse_problem(&text).unwrap().to_exact();
        prop_assert_eq!(back, prob);
    }
}

#[test]
fn duplicate_variable_rejected() {
    let text = r#"{"name":"d","n":1,"scalar":"exact","F0":[[1,1,"1"]],
        "vars":[{"name":"y","b":"1","F":[[1,1,"1"]]},{"name":"y","b":"0","F":[[1,1,"-1"]]}]}"#;
    let err = parse_problem(text).unwrap_err().to_string();
    assert!(err.contains("\"y\""), "{err}");
}

#[test]
fn lower_triangle_index_rejected() {
    let text = r#"{"name":"d","n":2,"scalar":"double","F0":[[2,1,"1"]],"vars":[]}"#;
    assert!(parse_problem(text).is_err());
}
