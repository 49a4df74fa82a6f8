use proptest::prelude::*;

use super::{parse, BinaryOp, Expr, UnaryOp, Var};
use crate::config::FiniteDifference;

fn leaf(n: usize, m: usize) -> BoxedStrategy<Expr> {
    let vars: Vec<Expr> = (0..n).map(Expr::x).chain((0..m).map(Expr::y)).collect();
    prop_oneof![
        (-8i32..=8).prop_map(|k| Expr::Const(k as f64 / 4.0)),
        proptest::sample::select(vars),
    ]
    .boxed()
}

/// Polynomials of bounded degree in `x1..xn`, `y1..ym`.
pub(crate) fn polynomial(n: usize, m: usize) -> BoxedStrategy<Expr> {
    leaf(n, m)
        .prop_recursive(4, 24, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Binary(BinaryOp::Add, Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Binary(BinaryOp::Sub, Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Binary(BinaryOp::Mul, Box::new(a), Box::new(b))),
                (inner.clone(), 0u32..=3).prop_map(|(a, k)| Expr::Pow(Box::new(a), k)),
                inner.prop_map(|a| Expr::Unary(UnaryOp::Neg, Box::new(a))),
            ]
        })
        .boxed()
}

/// Smooth expressions: polynomials closed under `sin`, `cos` and a damped `exp`.
pub(crate) fn smooth(n: usize, m: usize) -> BoxedStrategy<Expr> {
    polynomial(n, m)
        .prop_recursive(2, 32, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(|a| Expr::Unary(UnaryOp::Sin, Box::new(a))),
                inner.clone().prop_map(|a| Expr::Unary(UnaryOp::Cos, Box::new(a))),
                inner.clone().prop_map(|a| {
                    let damped = Expr::Unary(UnaryOp::Sin, Box::new(a));
                    Expr::Unary(UnaryOp::Exp, Box::new(damped))
                }),
                (inner.clone(), inner).prop_map(|(a, b)| Expr::Binary(BinaryOp::Mul, Box::new(a), Box::new(b))),
            ]
        })
        .boxed()
}

pub(crate) fn point(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-1.5f64..1.5, dim)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn display_then_parse_is_identity(e in smooth(2, 2)) {
        let text = e.to_string();
        let back = parse(&text, 2, 2).unwrap();
        prop_assert_eq!(&back, &e, "{}", text);
        prop_assert_eq!(back.to_string(), text);
    }

    #[test]
    fn gradient_matches_central_differences(e in polynomial(2, 2), p in point(4)) {
        let fd = FiniteDifference::default();
        let Ok(_) = e.evaluate_joint(2, &p) else { return Ok(()) };
        for j in 0..4 {
            let d = e.differentiate(Var::from_joint(j, 2));
            let exact = d.evaluate_joint(2, &p).unwrap();
            let approx = FiniteDifference::central(&p, j, |q| e.evaluate_joint(2, q)).unwrap();
            prop_assert!(fd.agrees(exact, approx), "∂{} of {}: {} vs {}", j, e, exact, approx);
        }
    }

    #[test]
    fn mixed_partials_commute(e in smooth(2, 2), p in point(4)) {
        for i in 0..4 {
            for j in 0..i {
                let (vi, vj) = (Var::from_joint(i, 2), Var::from_joint(j, 2));
                let a = e.differentiate(vi).differentiate(vj).evaluate_joint(2, &p).unwrap();
                let b = e.differentiate(vj).differentiate(vi).evaluate_joint(2, &p).unwrap();
                prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0), "{}: {} vs {}", e, a, b);
            }
        }
    }

    #[test]
    fn exact_and_float_evaluation_agree_on_polynomials(e in polynomial(2, 2), p in point(4)) {
        use num_rational::BigRational;
        use num_traits::ToPrimitive;
        let q: Vec<BigRational> = p.iter().map(|&v| BigRational::from_float(v).unwrap()).collect();
        let exact = e.evaluate_exact(&q[..2], &q[2..]).unwrap().unwrap().to_f64().unwrap();
        let float = e.evaluate_joint(2, &p).unwrap();
        prop_assert!((exact - float).abs() <= 1e-9 * exact.abs().max(1.0));
    }
}
