use proptest::prelude::*;

use super::*;
use crate::model::BoxSet;

const CLASSES: [PointClass; 6] = [
    PointClass::Interior,
    PointClass::LowerStrict,
    PointClass::LowerCorner,
    PointClass::UpperStrict,
    PointClass::UpperCorner,
    PointClass::Fixed,
];

/// A box point of the requested class per coordinate: `(lower, upper, y, z)`.
fn realize(classes: &[PointClass], strength: &[f64]) -> (BoxSet, Vec<f64>, Vec<f64>) {
    let (mut l, mut u, mut y, mut z) = (vec![], vec![], vec![], vec![]);
    for (c, &s) in classes.iter().zip(strength) {
        let (li, ui, yi, zi) = match c {
            PointClass::Interior => (0.0, 1.0, 0.25 + 0.5 * s, 0.0),
            PointClass::LowerStrict => (0.0, 1.0, 0.0, -0.5 - s),
            PointClass::LowerCorner => (0.0, 1.0, 0.0, 0.0),
            PointClass::UpperStrict => (0.0, 1.0, 1.0, 0.5 + s),
            PointClass::UpperCorner => (0.0, 1.0, 1.0, 0.0),
            PointClass::Fixed => (1.0, 1.0, 1.0, 2.0 * s - 1.0),
        };
        l.push(li);
        u.push(ui);
        y.push(yi);
        z.push(zi);
    }
    (BoxSet::new(l, u).unwrap(), y, z)
}

fn box_point(max_m: usize) -> impl Strategy<Value = (Vec<PointClass>, Vec<f64>)> {
    (1..=max_m).prop_flat_map(|m| {
        (
            proptest::collection::vec(proptest::sample::select(CLASSES.to_vec()), m),
            proptest::collection::vec(0.0f64..1.0, m),
        )
    })
}

/// A vector of the piece in the `(y*_i, z*_i)` plane and one just outside it.
fn inside_and_outside(p: GraphPiece, t: f64) -> ((f64, f64), (f64, f64)) {
    match p {
        GraphPiece::Horizontal => ((0.0, t - 0.5), (1.0, t)),
        GraphPiece::Vertical => ((t - 0.5, 0.0), (t, 1.0)),
        GraphPiece::MixedLower => ((-t, t), (1.0, 1.0)),
        GraphPiece::MixedUpper => ((t, -t), (-1.0, -1.0)),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn classification_and_branch_count((classes, s) in box_point(4)) {
        let (b, y, z) = realize(&classes, &s);
        prop_assert_eq!(classify_box(&b, &y, &z, 1e-9).unwrap(), classes.clone());
        let g = limiting_normal_cone_gph_box(&b, &y, &z, 1e-9, GraphCaps::default()).unwrap();
        let expected: usize = classes.iter().map(|c| c.pieces().len()).product();
        prop_assert_eq!(g.len(), expected);
        let mut labels: Vec<String> = g.branches().map(|br| br.label).collect();
        labels.sort();
        labels.dedup();
        prop_assert_eq!(labels.len(), expected);
    }

    #[test]
    fn branches_are_products_of_pieces((classes, s) in box_point(3), t in 0.0f64..1.0, k in 0usize..3) {
        let (b, y, z) = realize(&classes, &s);
        let m = classes.len();
        let g = limiting_normal_cone_gph_box(&b, &y, &z, 1e-9, GraphCaps::default()).unwrap();
        for br in g.branches() {
            let BranchPattern::Box(pattern) = &br.pattern else { unreachable!() };
            let mut v = vec![0.0; 2 * m];
            for (i, (_, piece)) in pattern.iter().enumerate() {
                let ((a, c), _) = inside_and_outside(*piece, t);
                v[i] = a;
                v[m + i] = c;
            }
            prop_assert!(br.cone.contains(&v, 1e-9).unwrap().contained, "{} {:?}", br.label, v);
            let i = k % m;
            let (_, (a, c)) = inside_and_outside(pattern[i].1, t);
            v[i] = a;
            v[m + i] = c;
            prop_assert!(!br.cone.contains(&v, 1e-9).unwrap().contained, "{} {:?}", br.label, v);
        }
    }

    #[test]
    fn inequality_form_gives_the_same_union((classes, s) in box_point(2)) {
        let (b, y, z) = realize(&classes, &s);
        let boxed = limiting_normal_cone_gph_box(&b, &y, &z, 1e-9, GraphCaps::default()).unwrap().to_union();
        let general = limiting_normal_cone_gph_polyhedron(&b.to_polyhedron(), &y, &z, 1e-9, GraphCaps::default())
            .unwrap()
            .to_union();
        prop_assert!(boxed.same_as(&general).unwrap());
    }

    #[test]
    fn normal_cone_generators_are_active_rows(
        rows in proptest::collection::vec(proptest::collection::vec(-3i32..=3, 2), 1..=4),
        active in proptest::collection::vec(any::<bool>(), 4),
    ) {
        // all rows pass through or above the origin
        let a: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|&v| v as f64).collect()).collect();
        let b: Vec<f64> = (0..a.len()).map(|i| if active[i] { 0.0 } else { 1.0 }).collect();
        let p = crate::model::Polyhedron::new(2, a.clone(), b).unwrap();
        let cone = normal_cone_polyhedron(&p, &[0.0, 0.0], 1e-9).unwrap();
        let sum = (0..a.len())
            .filter(|&i| active[i])
            .fold(vec![0.0, 0.0], |acc, i| vec![acc[0] + a[i][0], acc[1] + a[i][1]]);
        prop_assert!(cone.contains(&sum, 1e-9).unwrap().contained);
        for i in (0..a.len()).filter(|&i| active[i]) {
            prop_assert!(cone.contains(&a[i], 1e-9).unwrap().contained);
        }
        prop_assert!(cone.forms_agree().unwrap_or(true));
    }
}
