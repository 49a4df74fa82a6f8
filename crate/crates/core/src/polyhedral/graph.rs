//! Limiting normal cone to the graph of `N_K` for a fixed polyhedral `K`.
//!
//! Coordinates of the ambient space are `(y*_1, …, y*_m, z*_1, …, z*_m)`.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use super::cone::{generator_distance, ConeError, ConeForm, Generators, Halfspaces, PolyhedralCone};
use crate::config::{DEFAULT_ACTIVE_ROW_CAP, DEFAULT_BRANCH_CAP};
use crate::feasibility::{feasible, LinearSystem, LpError};
use crate::model::{BoxSet, LowerSet, Polyhedron};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("expected points of dimension {expected}, got y of {y} and z of {z}")]
    Dimension { expected: usize, y: usize, z: usize },
    #[error("y is not in K (violation {violation:e})")]
    NotInSet { violation: f64 },
    #[error("z is not a normal to K at y (distance {distance:e})")]
    OffGraph { distance: f64 },
    #[error("{count} branches exceed the cap of {cap}")]
    BranchCap { count: usize, cap: usize },
    #[error("{active} active rows exceed the cap of {cap}; describe K as a box to use the coordinatewise enumeration")]
    RowCap { active: usize, cap: usize },
    #[error(transparent)]
    Lp(#[from] LpError),
}

impl From<ConeError> for GraphError {
    fn from(e: ConeError) -> Self {
        match e {
            ConeError::Lp(e) => GraphError::Lp(e),
            // cones built here always match their systems
            other => unreachable!("{other}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GraphCaps {
    pub branches: usize,
    pub active_rows: usize,
}

impl Default for GraphCaps {
    fn default() -> Self {
        Self {
            branches: DEFAULT_BRANCH_CAP,
            active_rows: DEFAULT_ACTIVE_ROW_CAP,
        }
    }
}

/// Position of `(y_i, z_i)` on the graph of the normal cone to `[l_i, u_i]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum PointClass {
    Interior,
    /// `y_i = l_i`, `z_i < 0`.
    LowerStrict,
    /// `y_i = l_i`, `z_i = 0`.
    LowerCorner,
    /// `y_i = u_i`, `z_i > 0`.
    UpperStrict,
    /// `y_i = u_i`, `z_i = 0`.
    UpperCorner,
    /// `l_i = u_i`.
    Fixed,
}

/// One convex piece of the limiting normal cone in the `(y*_i, z*_i)` plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum GraphPiece {
    /// `{0} × R`
    Horizontal,
    /// `R × {0}`
    Vertical,
    /// `R_- × R_+`
    MixedLower,
    /// `R_+ × R_-`
    MixedUpper,
}

impl PointClass {
    pub fn pieces(self) -> &'static [GraphPiece] {
        use GraphPiece::*;
        match self {
            PointClass::Interior => &[Horizontal],
            PointClass::LowerStrict | PointClass::UpperStrict | PointClass::Fixed => &[Vertical],
            PointClass::LowerCorner => &[Horizontal, Vertical, MixedLower],
            PointClass::UpperCorner => &[Horizontal, Vertical, MixedUpper],
        }
    }

    pub fn describe(self) -> &'static str {
        match self {
            PointClass::Interior => "interior",
            PointClass::LowerStrict => "lower bound, strict",
            PointClass::LowerCorner => "lower-corner",
            PointClass::UpperStrict => "upper bound, strict",
            PointClass::UpperCorner => "upper-corner",
            PointClass::Fixed => "fixed",
        }
    }
}

impl GraphPiece {
    pub fn tag(self) -> &'static str {
        match self {
            GraphPiece::Horizontal => "H",
            GraphPiece::Vertical => "V",
            GraphPiece::MixedLower => "ML",
            GraphPiece::MixedUpper => "MU",
        }
    }

    pub fn describe(self) -> &'static str {
        match self {
            GraphPiece::Horizontal => "horizontal branch {0}×R",
            GraphPiece::Vertical => "vertical branch R×{0}",
            GraphPiece::MixedLower => "mixed branch R_−×R_+",
            GraphPiece::MixedUpper => "mixed branch R_+×R_−",
        }
    }

    /// Adds this piece for coordinate `i` to both descriptions.
    fn embed(self, i: usize, m: usize, g: &mut Generators, h: &mut Halfspaces) {
        let e = |k: usize, s: f64| {
            let mut v = vec![0.0; 2 * m];
            v[k] = s;
            v
        };
        let (y, z) = (i, m + i);
        match self {
            GraphPiece::Horizontal => {
                g.lines.push(e(z, 1.0));
                h.equalities.push(e(y, 1.0));
            }
            GraphPiece::Vertical => {
                g.lines.push(e(y, 1.0));
                h.equalities.push(e(z, 1.0));
            }
            GraphPiece::MixedLower => {
                g.rays.push(e(y, -1.0));
                g.rays.push(e(z, 1.0));
                h.inequalities.push(e(y, 1.0));
                h.inequalities.push(e(z, -1.0));
            }
            GraphPiece::MixedUpper => {
                g.rays.push(e(y, 1.0));
                g.rays.push(e(z, -1.0));
                h.inequalities.push(e(y, -1.0));
                h.inequalities.push(e(z, 1.0));
            }
        }
    }
}

/// Index of a branch within the union.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BranchPattern {
    /// Point class and chosen piece per coordinate of a box.
    Box(Vec<(PointClass, GraphPiece)>),
    /// Face pair of the critical cone of a general polyhedron: rows held at
    /// equality and rows relaxed to inequality (zero-based).
    Faces { equal: Vec<usize>, relaxed: Vec<usize> },
}

impl BranchPattern {
    pub fn label(&self) -> String {
        match self {
            BranchPattern::Box(p) => p.iter().map(|(_, piece)| piece.tag()).collect::<Vec<_>>().join("."),
            BranchPattern::Faces { equal, relaxed } => {
                format!("F[{}]/[{}]", one_based(equal), one_based(relaxed))
            }
        }
    }

    /// Human-readable description, one line per coordinate or row group.
    pub fn describe(&self) -> Vec<String> {
        match self {
            BranchPattern::Box(p) => p
                .iter()
                .enumerate()
                .map(|(i, (class, piece))| format!("coordinate {}: {}, {}", i + 1, class.describe(), piece.describe()))
                .collect(),
            BranchPattern::Faces { equal, relaxed } => vec![
                format!("rows held at equality: [{}]", one_based(equal)),
                format!("rows relaxed to inequality: [{}]", one_based(relaxed)),
            ],
        }
    }
}

fn one_based(rows: &[usize]) -> String {
    rows.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(",")
}

#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub label: String,
    pub pattern: BranchPattern,
    pub cone: PolyhedralCone,
}

/// The limiting normal cone to `gph N_K` at a point, as a finite union of
/// convex polyhedral cones enumerated in a fixed order.
#[derive(Debug, Clone, PartialEq)]
pub enum GraphNormalCone {
    /// Branches are generated lazily from the per-coordinate classes.
    Box {
        classes: Vec<PointClass>,
    },
    Faces {
        m: usize,
        branches: Vec<Branch>,
    },
}

impl GraphNormalCone {
    pub fn m(&self) -> usize {
        match self {
            GraphNormalCone::Box { classes } => classes.len(),
            GraphNormalCone::Faces { m, .. } => *m,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            GraphNormalCone::Box { classes } => box_branch_count(classes).unwrap_or(usize::MAX),
            GraphNormalCone::Faces { branches, .. } => branches.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn branches(&self) -> Box<dyn Iterator<Item = Branch> + '_> {
        match self {
            GraphNormalCone::Box { classes } => Box::new(BoxBranches {
                classes,
                counter: Some(vec![0; classes.len()]),
            }),
            GraphNormalCone::Faces { branches, .. } => Box::new(branches.iter().cloned()),
        }
    }

    pub fn branch(&self, label: &str) -> Option<Branch> {
        self.branches().find(|b| b.label == label)
    }

    pub fn to_union(&self) -> ConeUnion {
        ConeUnion {
            branches: self.branches().collect(),
        }
    }
}

fn box_branch_count(classes: &[PointClass]) -> Option<usize> {
    classes
        .iter()
        .try_fold(1usize, |acc, c| acc.checked_mul(c.pieces().len()))
}

struct BoxBranches<'a> {
    classes: &'a [PointClass],
    counter: Option<Vec<usize>>,
}

impl Iterator for BoxBranches<'_> {
    type Item = Branch;

    fn next(&mut self) -> Option<Branch> {
        let counter = self.counter.as_mut()?;
        let m = self.classes.len();
        let pattern: Vec<(PointClass, GraphPiece)> = self
            .classes
            .iter()
            .zip(counter.iter())
            .map(|(c, &k)| (*c, c.pieces()[k]))
            .collect();
        // mixed-radix increment, last coordinate fastest
        let mut i = m;
        loop {
            if i == 0 {
                self.counter = None;
                break;
            }
            i -= 1;
            counter[i] += 1;
            if counter[i] < self.classes[i].pieces().len() {
                break;
            }
            counter[i] = 0;
        }
        let mut g = Generators::default();
        let mut h = Halfspaces::default();
        for (i, (_, piece)) in pattern.iter().enumerate() {
            piece.embed(i, m, &mut g, &mut h);
        }
        let pattern = BranchPattern::Box(pattern);
        Some(Branch {
            label: pattern.label(),
            pattern,
            cone: PolyhedralCone::new(2 * m, ConeForm::Both(g, h)),
        })
    }
}

/// Finite union of labeled polyhedral cones.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeUnion {
    pub branches: Vec<Branch>,
}

impl ConeUnion {
    /// Label of the first branch containing `v` within `margin`.
    pub fn containing_branch(&self, v: &[f64], margin: f64) -> Result<Option<&str>, ConeError> {
        for b in &self.branches {
            if b.cone.contains(v, margin)?.contained {
                return Ok(Some(&b.label));
            }
        }
        Ok(None)
    }

    pub fn contains(&self, v: &[f64], margin: f64) -> Result<bool, ConeError> {
        Ok(self.containing_branch(v, margin)?.is_some())
    }

    /// Every branch of `self` lies inside some branch of `other`.
    pub fn branchwise_subset_of(&self, other: &ConeUnion) -> Result<bool, ConeError> {
        for a in &self.branches {
            let mut found = false;
            for b in &other.branches {
                if a.cone.is_subset_of(&b.cone)? {
                    found = true;
                    break;
                }
            }
            if !found {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Mutual branchwise containment, which implies equality of the unions.
    pub fn same_as(&self, other: &ConeUnion) -> Result<bool, ConeError> {
        Ok(self.branchwise_subset_of(other)? && other.branchwise_subset_of(self)?)
    }
}

impl fmt::Display for ConeUnion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let labels: Vec<&str> = self.branches.iter().map(|b| b.label.as_str()).collect();
        write!(f, "{}", labels.join(" ∪ "))
    }
}

fn check_dims(m: usize, y: &[f64], z: &[f64]) -> Result<(), GraphError> {
    if y.len() != m || z.len() != m {
        return Err(GraphError::Dimension {
            expected: m,
            y: y.len(),
            z: z.len(),
        });
    }
    Ok(())
}

/// Coordinatewise classification of `(y, z)` on `gph N_B`.
pub fn classify_box(b: &BoxSet, y: &[f64], z: &[f64], tol: f64) -> Result<Vec<PointClass>, GraphError> {
    let m = b.dim();
    check_dims(m, y, z)?;
    let mut classes = Vec::with_capacity(m);
    for i in 0..m {
        let (l, u) = (b.lower()[i], b.upper()[i]);
        let violation = (l - y[i]).max(y[i] - u);
        if violation > tol {
            return Err(GraphError::NotInSet { violation });
        }
        let at_lower = y[i] <= l + tol;
        let at_upper = y[i] >= u - tol;
        let class = if l == u {
            PointClass::Fixed
        } else if at_lower {
            if z[i] > tol {
                return Err(GraphError::OffGraph { distance: z[i] });
            }
            if z[i] < -tol {
                PointClass::LowerStrict
            } else {
                PointClass::LowerCorner
            }
        } else if at_upper {
            if z[i] < -tol {
                return Err(GraphError::OffGraph { distance: -z[i] });
            }
            if z[i] > tol {
                PointClass::UpperStrict
            } else {
                PointClass::UpperCorner
            }
        } else {
            if z[i].abs() > tol {
                return Err(GraphError::OffGraph { distance: z[i].abs() });
            }
            PointClass::Interior
        };
        classes.push(class);
    }
    Ok(classes)
}

pub fn limiting_normal_cone_gph_box(
    b: &BoxSet,
    y: &[f64],
    z: &[f64],
    tol: f64,
    caps: GraphCaps,
) -> Result<GraphNormalCone, GraphError> {
    let classes = classify_box(b, y, z, tol)?;
    match box_branch_count(&classes) {
        Some(count) if count <= caps.branches => Ok(GraphNormalCone::Box { classes }),
        count => Err(GraphError::BranchCap {
            count: count.unwrap_or(usize::MAX),
            cap: caps.branches,
        }),
    }
}

/// Union over pairs of faces of the critical cone
/// `C = {w : a_i·w ≤ 0 (i active), z·w = 0}`. A pair is given by the rows
/// vanishing on the larger face (`equal`) and the extra rows vanishing on
/// the smaller one (`relaxed`); its branch is `D° × D` with
/// `D = {a_i·w = 0 (equal), a_i·w ≤ 0 (relaxed), z·w = 0}`.
pub fn limiting_normal_cone_gph_polyhedron(
    k: &Polyhedron,
    y: &[f64],
    z: &[f64],
    tol: f64,
    caps: GraphCaps,
) -> Result<GraphNormalCone, GraphError> {
    let m = k.dim();
    check_dims(m, y, z)?;
    let violation = k.violation(y);
    if violation > tol {
        return Err(GraphError::NotInSet { violation });
    }
    let active: Vec<usize> = k.active_set(y, tol).indices().to_vec();
    if active.len() > caps.active_rows {
        return Err(GraphError::RowCap {
            active: active.len(),
            cap: caps.active_rows,
        });
    }
    let normals = Generators {
        rays: active.iter().map(|&i| k.rows()[i].clone()).collect(),
        lines: Vec::new(),
    };
    let distance = generator_distance(&normals, z)?;
    if distance > tol {
        return Err(GraphError::OffGraph { distance });
    }
    let z_clean: Vec<f64> = z.iter().map(|&v| if v.abs() <= tol { 0.0 } else { v }).collect();
    let z_nonzero = z_clean.iter().any(|&v| v != 0.0);

    let mut critical = LinearSystem::new(m);
    for &i in &active {
        critical.add_le(k.rows()[i].clone(), 0.0)?;
    }
    if z_nonzero {
        critical.add_eq(z_clean.clone(), 0.0)?;
    }

    // Faces of C are indexed by their sets of vanishing rows ("closures").
    let mut faces: BTreeSet<Vec<usize>> = BTreeSet::new();
    for mask in 0u64..(1u64 << active.len()) {
        let held: Vec<usize> = (0..active.len())
            .filter(|b| mask >> b & 1 == 1)
            .map(|b| active[b])
            .collect();
        let mut face = critical.clone();
        for &i in &held {
            face.add_eq(k.rows()[i].clone(), 0.0)?;
        }
        let mut closure = held.clone();
        for &i in &active {
            if held.contains(&i) {
                continue;
            }
            let mut probe = face.clone();
            probe.add_le(k.rows()[i].clone(), -1.0)?;
            if !feasible(&probe.to_rational())?.is_feasible() {
                closure.push(i);
            }
        }
        closure.sort_unstable();
        faces.insert(closure);
    }

    let mut pairs: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
    for equal in &faces {
        for bigger in &faces {
            if equal.iter().all(|i| bigger.contains(i)) {
                let relaxed: Vec<usize> = bigger.iter().copied().filter(|i| !equal.contains(i)).collect();
                pairs.push((equal.clone(), relaxed));
            }
        }
    }
    pairs.sort_by(|a, b| (a.1.len(), a.0.len(), &a.0, &a.1).cmp(&(b.1.len(), b.0.len(), &b.0, &b.1)));
    if pairs.len() > caps.branches {
        return Err(GraphError::BranchCap {
            count: pairs.len(),
            cap: caps.branches,
        });
    }

    let lift = |r: &[f64], upper: bool| {
        let mut v = vec![0.0; 2 * m];
        let off = if upper { m } else { 0 };
        v[off..off + m].copy_from_slice(r);
        v
    };
    let branches = pairs
        .into_iter()
        .map(|(equal, relaxed)| {
            let mut g = Generators::default();
            let mut h = Halfspaces::default();
            for &i in &equal {
                g.lines.push(lift(&k.rows()[i], false));
                h.equalities.push(lift(&k.rows()[i], true));
            }
            if z_nonzero {
                g.lines.push(lift(&z_clean, false));
                h.equalities.push(lift(&z_clean, true));
            }
            for &i in &relaxed {
                g.rays.push(lift(&k.rows()[i], false));
                h.inequalities.push(lift(&k.rows()[i], true));
            }
            for j in 0..m {
                let mut e = vec![0.0; m];
                e[j] = 1.0;
                g.lines.push(lift(&e, true));
            }
            let pattern = BranchPattern::Faces { equal, relaxed };
            Branch {
                label: pattern.label(),
                pattern,
                cone: PolyhedralCone::new(2 * m, ConeForm::Intersection(g, h)),
            }
        })
        .collect();
    Ok(GraphNormalCone::Faces { m, branches })
}

pub fn limiting_normal_cone_gph(
    k: &LowerSet,
    y: &[f64],
    z: &[f64],
    tol: f64,
    caps: GraphCaps,
) -> Result<GraphNormalCone, GraphError> {
    match k {
        LowerSet::Box(b) => limiting_normal_cone_gph_box(b, y, z, tol, caps),
        LowerSet::Polyhedron(p) => limiting_normal_cone_gph_polyhedron(p, y, z, tol, caps),
    }
}
