//! Combinatorial models of three genus-zero moduli spaces: the space of
//! multiscale differentials `B_n` (the wonderful variety `Y_n` of the braid
//! arrangement), the space of multiscale lines `A_n`, and `M_{0,n+1}`.
//!
//! * [`partitions`] — the lattice `L_n` of set partitions of `{1..n}`.
//! * [`arrangements`] — polydiagonal arrangements, building sets, blowup
//!   plans and a Betti-number oracle based on blowup accounting.
//! * [`strata`] — boundary strata as chains of partitions and their dual
//!   rooted level trees.
//! * [`chow`] — graded Chow ring presentations with exact linear algebra.
//!
//! Order convention: for partitions `a <= b` means `b` refines `a`. The
//! one-block partition `bottom` is the minimum and the all-singletons
//! partition `top` is the maximum. Flats of the graphic matroid `M(K_n)`
//! are ordered the other way round.

pub mod arrangements;
pub mod chow;
pub mod error;
pub mod partitions;
pub mod strata;

pub use error::{Error, Result};
pub use partitions::SetPartition;
