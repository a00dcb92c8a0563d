//! Exact-arithmetic machinery for Jacobian groups of finite graphs, Galois
//! covering towers built from voltage data, and the Iwasawa-style invariants
//! (lambda, mu, nu) of such towers, including the ramification-corrected
//! lambda identity relating a `Z_p x G`-tower to its `Z_p`-quotient tower.
//!
//! Everything here is integer arithmetic: Laplacians and their Smith normal
//! forms are computed over arbitrary-precision integers, spanning-tree counts
//! are exact, and invariant fitting is an exact rational solve followed by an
//! integrality check. No floating point is used anywhere.
//!
//! Module map:
//! - [`linalg`]: dense big-integer matrices, Smith normal form, determinants.
//! - [`groups`]: finite abelian p-group layers of `Z_p x G`, subgroup images,
//!   cosets, intersections and stabilized limit quantities.
//! - [`graph`]: Serre-formalism multigraphs, divisors, Laplacians, Picard and
//!   Jacobian groups, spanning-tree counts, covering morphisms.
//! - [`voltage`]: voltage graphs with inertia, derived graphs at each layer,
//!   coverings between layers, the group-ring Laplacian cross-check, and
//!   voltage extraction from an abstract Galois covering.
//! - [`iwasawa`]: tower reports, exact invariant fitting, limit ramification
//!   data, the ramification-corrected lambda identity, and the canonical
//!   cycle-graph example family.

pub mod error;
pub mod graph;
pub mod groups;
pub mod iwasawa;
pub mod linalg;
pub mod voltage;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
