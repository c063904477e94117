//! Factorization of real univariate polynomials into linear factors and
//! quadratic factors with negative discriminant, computed with real
//! arithmetic only.
//!
//! The pipeline builds the companion matrix of a monic polynomial, finds a
//! *true pair* `(alpha, beta)` with a nonzero vector `v` such that
//! `((A - alpha I)^2 + beta^2 I) v = 0`, and uses it to peel either a
//! quadratic factor `(t - alpha)^2 + beta^2` or a linear factor off the
//! polynomial. True pairs of even-dimensional operators are found by lifting
//! to the space of symmetric matrices, where the two commuting operators
//! `X -> AX + XA^t` and `X -> AXA^t` act on a space whose dimension has one
//! fewer factor of two.
//!
//! Modules:
//! - [`poly`]: dense polynomial arithmetic, odd-degree root bracketing and
//!   quartic splitting.
//! - [`matrix`]: dense matrix kernels (companion, shifted determinants,
//!   null/range bases, restriction, the symmetric lift).
//! - [`truepair`]: the true-pair recursion.
//! - [`factorizer`]: peeling, full factorization, polishing and verification.
//! - [`oracle`]: an independent Bairstow factorizer and a corpus generator.
//! - [`textio`]: expression parser, JSON documents and the CLI.

pub mod config;
pub mod error;
pub mod factorizer;
pub mod matrix;
pub mod oracle;
pub mod poly;
pub mod textio;
pub mod truepair;

pub use config::Config;
pub use error::{Error, Result};
pub use factorizer::{factor, peel, refine, verify, Factorization};
pub use matrix::Matrix;
pub use poly::Polynomial;
pub use truepair::{true_pair, TruePair};
