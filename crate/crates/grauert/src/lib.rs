//! Numerical laboratory for complexified spectral kernels on the boundary of a
//! Grauert tube over the flat torus.
//!
//! The crate has two halves that are kept deliberately independent so that one
//! can be checked against the other:
//!
//! * an *exact* side ([`spectra`]): lattice sums over torus Laplacian modes
//!   evaluate the tempered, isotype-restricted Poisson kernels and Weyl sums
//!   on the tube boundary `X^tau` without any asymptotic input;
//! * a *predicted* side ([`symplectic`], [`gaussian`], [`geometry`],
//!   [`validator`]): leading-order asymptotic formulas built from symplectic
//!   linear algebra, metaplectic Gaussian kernels, closed-form complex
//!   Gaussian integrals and the linearized geodesic flow.
//!
//! The [`validator`] experiments compare the two sides on ladders of the
//! spectral parameter and emit machine-readable reports; the `grauert-lab`
//! binary and the `examples/` directory drive them from config files.
//!
//! Everything is deterministic given a config and a seed: mode sums are
//! compensated in a fixed enumeration order, and parallelism never changes
//! the reduction tree.

pub mod config;
pub mod csvio;
pub mod fit;
pub mod gaussian;
pub mod geometry;
pub mod linalg;
pub mod report;
pub mod runner;
pub mod spectra;
pub mod symplectic;
pub mod validator;

