//! Rigorous crossing certificates for polynomial hypersurfaces on
//! axis-aligned cells, and a Hough-transform curve recognizer built on
//! them.
//!
//! The decision problem: given `f` in n real variables and a cell around
//! a point `p`, does the hypersurface `f = 0` cross the cell? Point
//! evaluation alone cannot answer this — `|f(p)|` can be small far from
//! the zero set and large near it. The certificates here combine `|f(p)|`
//! with gradient and Hessian information:
//!
//! * `|f(p)| > B1` certifies the cell is *not* crossed;
//! * `|f(p)| < B2` certifies it *is* crossed (via a convergent
//!   normal-flow iterate inside the cell);
//! * otherwise the verdict is `Unknown`, and the cell can be subdivided.
//!
//! Cheaper first-order variants B1'/B2' trade rigor for point-only
//! Hessian evaluations. The region quantities feeding the bounds are
//! certified upper bounds computed by interval arithmetic, so a definite
//! verdict is trustworthy even though everything runs in f64.
//!
//! On top of this sits curve recognition: the Hough transform of each
//! image point votes for the parameter cells its transform certifiably
//! crosses, and the accumulator peak identifies the curve.

// index loops over small matrices read better than iterator chains here
#![allow(clippy::needless_range_loop)]

pub mod bounds;
pub mod crossing;
pub mod hough;
pub mod interval;
pub mod norms;
pub mod oracle;
pub mod parse;
pub mod poly;
pub mod report;

pub use bounds::{
    bound_b1, bound_b1_prime, bound_b2, bound_b2_prime, feasible_radius, hessian_sup_norm,
    hessian_sup_norm_quadratic, jac_pinv_sup, theta, BoundContext, BoundError, CertMode,
};
pub use crossing::{
    crossing_area, crossing_area_refined, crossing_cell, discretize, normal_flow, subdivide_refine,
    Cell, CellReport, CrossError, CrossingChecker, Discretization, FlowResult, FlowStatus,
    RadiusPolicy, Verdict, VerdictGrid,
};
pub use hough::{
    builtin_families, detect, family_by_name, hough_transform, sample_family, vote, Accumulator,
    CurveFamily, Detection, HoughError, PointSet, Sampler,
};
pub use oracle::{
    bisect_root_on_segment, grid_sign_oracle, OracleError, OracleResult, OracleVerdict,
};
pub use parse::parse_poly;
pub use poly::{MultiPoly, PolyError, VarSpace};
