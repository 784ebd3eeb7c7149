//! Exact combinatorics of `d`-type plane forests.
//!
//! The crate provides:
//!
//! * [`forest`] — ordered plane forests whose vertices carry a color in
//!   `1..=d`, with breadth-first labeling, typed subforests and the
//!   collapse of monochromatic subtrees;
//! * [`coding`] — the encoding of a forest into `d` integer-vector paths,
//!   the inverse reconstruction, and the smallest-solution solver for the
//!   associated balance equations;
//! * [`cyclic`] — componentwise cyclic shifts of coding sequences, the
//!   brute-force count of shifts whose endpoint is the smallest solution,
//!   and the determinant / elementary-forest identities that predict it;
//! * [`branching`] — finite-support multitype offspring laws with exact
//!   rational weights, criticality classification, and closed forms for
//!   the joint law of the total progeny;
//! * [`simulate`] — seeded generation-by-generation sampling of branching
//!   forests plus the statistics used to cross-check the closed forms;
//! * [`enumeration`] — closed-form counts of forests by degrees together
//!   with exhaustive brute-force generators for the same classes;
//! * [`lagrange`] — truncated multivariate power series with exact
//!   rational coefficients and the arborescent inversion formula for
//!   coefficients of implicit generating functions;
//! * [`verify`] — the oracle suite behind the `verify` CLI subcommand.
//!
//! All identity checks are exact: integer and rational arithmetic is
//! arbitrary precision, floating point only appears in spectral-radius
//! estimates and in simulation statistics.

pub mod branching;
pub mod coding;
pub mod cyclic;
pub mod enumeration;
pub mod error;
pub mod exact;
pub mod forest;
pub mod lagrange;
pub mod rng;
pub mod schema;
pub mod simulate;
pub mod verify;

pub use branching::OffspringLaw;
pub use coding::CodingSequence;
pub use error::{Error, Result};
pub use forest::{Signature, TreeNode, TypedForest};
