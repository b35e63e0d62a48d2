//! Orthogonal Chebyshev-Frolov lattices, exact enumeration of their points in
//! the unit cube, and Frolov cubature.
//!
//! The pipeline for one dimension `d` and scaling parameter `n`:
//!
//! 1. [`ChebyshevSystem::new`] builds the Vandermonde basis `T` of the scaled
//!    Chebyshev roots, the unimodular reduction `S`, the orthogonal basis
//!    `T~ = T S` and its factorization `T~ = Q D`.
//! 2. [`covering_ellipsoid`] gives the axis-aligned ellipsoid `K_n` of integer
//!    vectors whose image can land in `[-1/2, 1/2]^d`.
//! 3. [`enumerate_nodes`] streams `K_n` and keeps the vectors mapped into the
//!    cube, producing the node set `X_n`; [`count_nodes`] only counts.
//! 4. [`frolov_quadrature`] averages an integrand over `X_n` with weight `1/n`.
//!
//! ```
//! use frolov_core::{count_nodes, ChebyshevSystem, EnumerationOptions};
//!
//! let system = ChebyshevSystem::new(2).unwrap();
//! let stats = count_nodes(&system, 64, &EnumerationOptions::default()).unwrap();
//! assert_eq!((stats.cube_points, stats.ellipsoid_points), (65, 101));
//! ```

pub mod cubature;
pub mod ellipsoid;
pub mod error;
pub mod lattice;
pub mod matrix;
pub mod nodes;

pub use cubature::{
    builtin_integrand, builtin_integrands, convergence_study, frolov_quadrature, frolov_quadrature_with,
    quadrature_on_nodes, CompensatedSum, CubatureResult, Integrand, BUILTIN_NAMES,
};
pub use ellipsoid::{lp_ball_volume, unit_volume, IntegerPointStream, PEllipsoid};
pub use error::{FrolovError, Result};
pub use lattice::{
    admissibility_witness, chebyshev_roots, column_reduction_coeffs, dual_basis, orthogonal_basis, qd_decomposition,
    reduction_matrix, vandermonde_basis, ChebyshevSystem, ColumnReduction, LatticeBasis,
};
pub use matrix::{IntMatrix, Matrix};
pub use nodes::{
    count_nodes, covering_ellipsoid, enumerate_nodes, enumerate_nodes_with, kn_bounds, overhead_limit, scaled_basis,
    CoveringStats, EnumerationOptions, KnBounds, NodeSet, OverheadLimit, ScaledBasis,
};
