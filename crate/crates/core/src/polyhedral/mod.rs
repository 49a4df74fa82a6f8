//! Exact normal cones to polyhedra, boxes, and the graph of `N_K`.

mod cone;
mod convert;
mod graph;
mod normal;
#[cfg(test)]
mod proptests;

pub use cone::{ConeError, ConeForm, ConeMembership, Generators, Halfspaces, PolyhedralCone};
pub use convert::MAX_CONVERSION_ROWS;
pub use graph::{
    classify_box, limiting_normal_cone_gph, limiting_normal_cone_gph_box, limiting_normal_cone_gph_polyhedron, Branch,
    BranchPattern, ConeUnion, GraphCaps, GraphError, GraphNormalCone, GraphPiece, PointClass,
};
pub use normal::{normal_cone_box, normal_cone_polyhedron, NormalConeError};
