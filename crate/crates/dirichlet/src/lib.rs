//! Approximate Dirichlet domains for Kleinian groups, ball coverings by
//! their translates, and verified length spectra.
//!
//! Given generators of a discrete torsion-free subgroup of PSL(2, C), the
//! crate builds the Dirichlet domain at a basepoint as an incremental
//! intersection of bisector half-spaces (combinatorics in the Klein ball,
//! metric in the hyperboloid model), optionally moves the basepoint to
//! minimize the spine radius, covers a ball by face-neighbor expansion,
//! cross-checks the covering against exhaustive word enumeration, and
//! reduces the resulting big list to the length spectrum below a cutoff
//! with multiplicities.
//!
//! Discreteness of the input group is assumed, not verified.

pub mod domain;
pub mod formats;
pub mod minkowski;
pub mod moebius;
pub mod optimizer;
pub mod pipeline;
pub mod polyhedron;
pub mod spectrum;
pub mod tiling;
pub mod tolerance;
pub mod volume;
pub mod wordprob;

pub use domain::{build_domain, BuildOptions, BuildResult, DomainStats};
pub use minkowski::{dist, KleinPoint, MinkowskiPoint};
pub use moebius::{ComplexLength, MoebiusElement, Word};
pub use polyhedron::{bisector_halfspace, DirichletPolyhedron, HalfSpace};
pub use tolerance::Tolerance;
