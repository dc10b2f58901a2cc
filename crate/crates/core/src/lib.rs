//! CR-curvature residuals of Levi-degenerate tube hypersurfaces in C^3,
//! the rank-one Monge-Ampere solution families built from conics, and
//! seeded grid campaigns that check them.
//!
//! Kernels are generic over [`Scalar`]; the `f64` aliases below are what the
//! harness and command line use.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod conic;
pub mod error;
pub mod expr;
pub mod finite_diff;
pub mod flatfamily;
pub mod harness;
pub mod jet;
pub mod parametrize;
pub mod quadrature;
pub mod scalar;
pub mod selftest;
pub mod surface;
pub mod univariate;

pub use conic::{final1_from_conics, monge1d_residual, p_from_conic, pq_identity_residuals, q_from_conic, ConicPoly};
pub use error::{Error, Result};
pub use expr::{parse, Expression, Params};
pub use flatfamily::{example31, CounterexampleSpec, Example31};
pub use harness::{
    run_report, verify_counterexample, verify_prop32, verify_theorem21, Family, GridSpec, ReportConfig, ResidualReport,
    Tolerances,
};
pub use jet::{Axis, Jet, Jet1, Jet2, JetError};
pub use parametrize::{PqFamily, VwPoint};
pub use scalar::Scalar;
pub use surface::{
    check_rank_conditions, monge_ampere_residual, monge_residual_t1, theta21_residual, PointQuantities, Residual,
    SurfacePoint,
};
pub use univariate::{ExprFn, UnivariateFn};

pub type Jet1f = Jet1<f64>;
pub type Jet2f = Jet2<f64>;
pub type SurfacePointf = SurfacePoint<f64>;
pub type Residualf = Residual<f64>;
pub type PointQuantitiesf = PointQuantities<f64>;
pub type ConicPolyf = ConicPoly<f64>;
