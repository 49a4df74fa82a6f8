use proptest::prelude::*;

use super::*;
use crate::calculus::derivative_bundle;
use crate::expr::parse;
use crate::model::{BoxSet, LowerSet, SmoothFunction};

fn quarter() -> impl Strategy<Value = f64> {
    (-8i32..=8).prop_map(|k| k as f64 / 4.0)
}

/// `f = ½ Σ (y_i − c_i x1 − d_i)²` on `[0, 1]^m`, so the lower-level
/// solution is the clamp of `c x1 + d`; `F` is a random quadratic.
fn instance() -> impl Strategy<Value = (BilevelProblem, Candidate)> {
    (1usize..=2).prop_flat_map(|m| {
        (
            proptest::collection::vec((quarter(), quarter()), m),
            proptest::collection::vec(quarter(), 2 * m + 2),
            quarter(),
        )
            .prop_map(move |(cd, coef, x)| {
                let lower = cd
                    .iter()
                    .enumerate()
                    .map(|(i, (c, d))| format!("(y{} - ({c})*x1 - ({d}))^2/2", i + 1))
                    .collect::<Vec<_>>()
                    .join(" + ");
                let mut upper = format!("({})*x1^2 + ({})*x1", coef[0], coef[1]);
                for i in 0..m {
                    upper += &format!(
                        " + ({})*y{} + ({})*y{}^2",
                        coef[2 + 2 * i],
                        i + 1,
                        coef[3 + 2 * i],
                        i + 1
                    );
                }
                let problem = BilevelProblem {
                    n: 1,
                    m,
                    upper: SmoothFunction::scalar(1, m, parse(&upper, 1, m).unwrap()),
                    lower: SmoothFunction::scalar(1, m, parse(&lower, 1, m).unwrap()),
                    omega: Polyhedron::whole_space(1),
                    k: LowerSet::Box(BoxSet::new(vec![0.0; m], vec![1.0; m]).unwrap()),
                };
                let y: Vec<f64> = cd.iter().map(|(c, d)| (c * x + d).clamp(0.0, 1.0)).collect();
                let cand = Candidate::new(&problem, vec![x], y).unwrap();
                (problem, cand)
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bilevel_and_mpec_paths_agree((p, c) in instance()) {
        let opts = StationarityOptions::default();
        let direct = check_m_stationarity(&p, &c, &opts).unwrap();
        let mpec = p.to_mpec();
        let mc = Candidate::for_mpec(&mpec, c.x.clone(), c.y.clone()).unwrap();
        let via_mpec = check_mpec_stationarity(&mpec, &mc, &opts).unwrap();
        prop_assert_eq!(direct.certificate().is_some(), via_mpec.certificate().is_some());
        if let (Some(a), Some(b)) = (direct.certificate(), via_mpec.certificate()) {
            prop_assert_eq!(&a.branch, &b.branch);
            prop_assert_eq!(&a.exact, &b.exact);
        }
    }

    #[test]
    fn certificates_survive_recomputation((p, c) in instance()) {
        let opts = StationarityOptions::default();
        if let StationarityOutcome::Stationary(cert) = check_m_stationarity(&p, &c, &opts).unwrap() {
            let bundle = derivative_bundle(&p, &c).unwrap();
            let r = explain_certificate(&p, &c, &cert, &bundle, &opts.tolerances, opts.caps).unwrap();
            prop_assert!(r.equation_residual() <= 1e-9 && r.cone_margin <= 1e-9);
        }
    }

    #[test]
    fn rational_runs_are_repeatable((p, c) in instance()) {
        let opts = StationarityOptions::default();
        prop_assert_eq!(check_m_stationarity(&p, &c, &opts).unwrap(), check_m_stationarity(&p, &c, &opts).unwrap());
        prop_assert_eq!(check_qualification(&p, &c, &opts).unwrap(), check_qualification(&p, &c, &opts).unwrap());
    }

    #[test]
    fn float_mode_finds_a_certificate_whenever_rational_does((p, c) in instance()) {
        let rational = check_m_stationarity(&p, &c, &StationarityOptions::default()).unwrap();
        let float_opts = StationarityOptions { mode: Mode::Float, ..Default::default() };
        let float = check_m_stationarity(&p, &c, &float_opts).unwrap();
        prop_assert_eq!(rational.certificate().is_some(), float.certificate().is_some());
    }

    #[test]
    fn strictly_convex_lower_level_satisfies_the_qualification((p, c) in instance()) {
        // ∇_{yy} f = I, so y* = z* and the branch forces z* = 0
        let q = check_qualification(&p, &c, &StationarityOptions::default()).unwrap();
        prop_assert!(q.holds, "{:?}", q);
    }
}
