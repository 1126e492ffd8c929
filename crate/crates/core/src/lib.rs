//! Exact-arithmetic symbolic engine for graded computations in
//! Drinfeld-Kohno algebras and truncated quasi-Hopf deformations of
//! universal enveloping algebras.
//!
//! Everything is computed over the rationals with explicit truncation
//! orders; there is no floating point anywhere. The main entry points:
//!
//! - [`series`]: sparse graded noncommutative series (the universal carrier)
//!   with `exp`/`log`/`inverse` in the augmentation-complete setting.
//! - [`freelie`]: Lyndon-word bases of free Lie algebras, PBW decomposition,
//!   Lie-part extraction.
//! - [`dk`]: the algebras `t_n`/`T_n` with infinitesimal-braid relations:
//!   normal forms, insertion-coproduct morphisms, the co-Hochschild
//!   differential, alternation.
//! - [`cbh`]: the universal Campbell-Baker-Hausdorff series over a pluggable
//!   bracket.
//! - [`associator`]: pentagon/hexagon residuals, twisting, and the
//!   degree-by-degree algorithm twisting any pentagon solution into one with
//!   Lie logarithm.
//! - [`tree`], [`qhque`], [`treecalc`]: planar binary trees, truncated
//!   quasi-Hopf instances, the tree-coproduct calculus, filtration evidence,
//!   coherence elements, and the admissibilizing twist iteration.
//! - [`poisson`]: truncated symmetric algebras with the Kostant-Kirillov
//!   bracket, star-pentagon checks, twist equalization, and classical
//!   reduction.
//! - [`api`]: the JSON request runner shared by the CLI and the C ABI.

pub mod alphabet;
pub mod api;
pub mod associator;
pub mod cbh;
pub mod dk;
pub mod error;
pub mod freelie;
pub mod linalg;
pub mod poisson;
pub mod qhque;
pub mod sample;
pub mod scalar;
pub mod series;
pub mod tree;
pub mod treecalc;

pub use error::{Error, Result};

#[cfg(test)]
mod concurrency_contract {
    //! Values are immutable after construction and shared freely across
    //! threads; caches are write-once-per-key behind locks.

    fn assert_send_sync<T: Send + Sync>() {}

    #[test]
    fn core_types_are_send_and_sync() {
        assert_send_sync::<crate::series::GradedSeries>();
        assert_send_sync::<crate::freelie::LieElement>();
        assert_send_sync::<crate::freelie::FreeLieOps>();
        assert_send_sync::<crate::dk::DkAlgebra>();
        assert_send_sync::<crate::dk::TnElement>();
        assert_send_sync::<crate::dk::GroupLikeTn>();
        assert_send_sync::<crate::qhque::QhqueInstance>();
        assert_send_sync::<crate::qhque::Tensor>();
        assert_send_sync::<crate::poisson::SymTensor>();
        assert_send_sync::<crate::treecalc::DeltaEvaluator>();
    }
}
