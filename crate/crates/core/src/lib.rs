//! Holomorphic disks with boundary on a docile surface `N` in CP2, and the
//! Zoll projective structure on the 2-sphere they determine.
//!
//! - [`projcore`]: points of CP1/CP2, the branched cover, conic and tangent lines.
//! - [`surface`]: docile surfaces in normal form `phi = psi . a . psi^-1`.
//! - [`rhsolver`]: the nonlinear Riemann-Hilbert problem for one disk.
//! - [`moduli`]: sweeps over the moduli space, geodesics and the Lagrangian test.
//! - [`io`]: text file formats.

pub mod error;
pub mod lattice;
pub mod projcore;
pub mod surface;
pub mod rhsolver;
pub mod moduli;
pub mod io;

pub use error::{Result, ZollError};
pub use projcore::{Chart, P1Point, P2Point, TangentFrame2, TangentLine};
pub use rhsolver::{DiskSolution, SolverOptions};
pub use surface::{SphereField, SurfaceSpec};
