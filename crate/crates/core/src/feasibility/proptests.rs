use proptest::prelude::*;

use super::*;

fn int_rows(rows: usize, cols: usize) -> impl Strategy<Value = Vec<Vec<i32>>> {
    proptest::collection::vec(proptest::collection::vec(-4i32..=4, cols), rows)
}

/// Rows `a_i`, a point `p` and slacks `s_i ≥ 0`; `{a_i·v ≤ a_i·p + s_i}`
/// contains `p` by construction.
fn feasible_instance() -> impl Strategy<Value = (Vec<Vec<i32>>, Vec<i32>, Vec<u8>, Vec<bool>)> {
    (1usize..=4, 1usize..=6).prop_flat_map(|(d, r)| {
        (
            int_rows(r, d),
            proptest::collection::vec(-3i32..=3, d),
            proptest::collection::vec(0u8..=3, r),
            proptest::collection::vec(any::<bool>(), r),
        )
    })
}

fn build(rows: &[Vec<i32>], p: &[i32], slack: &[u8], eq: &[bool]) -> LinearSystem<f64> {
    let mut sys = LinearSystem::new(p.len());
    for ((r, &s), &is_eq) in rows.iter().zip(slack).zip(eq) {
        let row: Vec<f64> = r.iter().map(|&a| a as f64).collect();
        let at_p: f64 = r.iter().zip(p).map(|(a, b)| (a * b) as f64).sum();
        if is_eq {
            sys.add_eq(row, at_p).unwrap();
        } else {
            sys.add_le(row, at_p + s as f64).unwrap();
        }
    }
    sys
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn constructed_feasible_systems_are_feasible((rows, p, slack, eq) in feasible_instance()) {
        let sys = build(&rows, &p, &slack, &eq);
        for mode in [Mode::Rational, Mode::Float] {
            let f = feasible_with_mode(&sys, mode).unwrap();
            let point = f.point().expect("feasible by construction");
            prop_assert!(sys.violation(point) <= 1e-9);
        }
    }

    #[test]
    fn contradictory_row_makes_system_infeasible((rows, p, slack, eq) in feasible_instance(), k in 0usize..6) {
        let mut sys = build(&rows, &p, &slack, &eq);
        let r = &rows[k % rows.len()];
        prop_assume!(r.iter().any(|&a| a != 0));
        let row: Vec<f64> = r.iter().map(|&a| a as f64).collect();
        // a·v ≥ 1 and a·v ≤ 0 cannot both hold
        sys.add_ge(row.clone(), 1.0).unwrap();
        sys.add_le(row, 0.0).unwrap();
        for mode in [Mode::Rational, Mode::Float] {
            prop_assert!(!feasible_with_mode(&sys, mode).unwrap().is_feasible());
        }
    }

    #[test]
    fn modes_agree_on_integer_systems(rows in int_rows(4, 3), rhs in proptest::collection::vec(-3i32..=3, 4)) {
        let mut sys = LinearSystem::new(3);
        for (r, b) in rows.iter().zip(&rhs) {
            sys.add_le(r.iter().map(|&a| a as f64).collect(), *b as f64).unwrap();
        }
        sys.set_nonneg(0);
        let exact = feasible_with_mode(&sys, Mode::Rational).unwrap().is_feasible();
        let float = feasible_with_mode(&sys, Mode::Float).unwrap().is_feasible();
        prop_assert_eq!(exact, float);
    }

    #[test]
    fn nonzero_witness_solves_homogeneous_system(rows in int_rows(3, 3)) {
        let mut sys = LinearSystem::new(3);
        for r in &rows {
            sys.add_le(r.iter().map(|&a| a as f64).collect(), 0.0).unwrap();
        }
        match cone_nonzero(&sys.to_rational(), None).unwrap() {
            ConeVerdict::Nonzero { witness, .. } => {
                let norm = witness.iter().map(|v| v * v).sum::<f64>().sqrt();
                prop_assert!((norm - 1.0).abs() < 1e-12);
                prop_assert!(sys.violation(&witness) <= 1e-12);
            }
            // only zero: no direction of a dense sample satisfies every row
            ConeVerdict::OnlyZero => {
                for i in 0..200 {
                    let t = i as f64 * 0.7;
                    let u = [t.sin() * (1.3 * t).cos(), t.sin() * (1.3 * t).sin(), t.cos()];
                    prop_assert!(sys.violation(&u) > 0.0);
                }
            }
        }
    }
}
