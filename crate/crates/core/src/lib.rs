//! Numerical toolkit for the invariant-metric geometry of the domains
//!
//! ```text
//!   E = { (x, y, z) in C^3 : (|x|^(2p) + |y|^2)^(1/lambda) + |z|^2 < 1 },    p, lambda > 0,
//! ```
//!
//! whose Bergman kernel is known in closed form, together with a small
//! potential-theory module for Green-function bounds on the unit disk.
//!
//! The crate is organized around two independent computational routes for
//! every geometric quantity:
//!
//! * closed-form evaluation (kernel factorization, metric factors, curvature
//!   factor tables), propagated where derivatives are needed by exact
//!   truncated-Taylor jets in the rotation-invariant coordinates
//!   `nu_i = |z_i|^2`;
//! * finite-difference differentiation of scalar fields ([`diffengine`]),
//!   which knows nothing about the closed forms and serves as the oracle.
//!
//! Agreement between the routes, at tolerances pinned in the test suite, is
//! the correctness story.

pub mod curvature;
pub mod diffengine;
pub mod diskbounds;
pub mod domain;
pub mod extrapolate;
pub mod frame;
pub mod hermitian;
pub mod jets;
pub mod metric;

pub use domain::DomainParams;
pub use hermitian::Hermitian3;
