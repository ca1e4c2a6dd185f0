//! Exact arithmetic for the extended microsymplectic category.
//!
//! Objects are cotangent microbundles `[T*R^n, R^n]`, morphisms are
//! symplectic micromorphisms stored as generating functions in normal form,
//! and composition, tensor product, symmetry and the lagrangian operads are
//! computed exactly over the rationals.

pub mod error;
pub mod jetalg;
pub mod linsympl;
pub mod matrix;
pub mod micro;
pub mod operad;
pub mod sample;
pub mod selfcheck;
pub mod text;

pub use error::{Error, Result};
pub use jetalg::{frac, rat, Block, FiberGradedPoly, Monomial, Rational};
pub use linsympl::{LinCanonicalRelation, Splitting};
pub use matrix::Matrix;
pub use micro::{CoreMap, MicroObject, Micromorphism, SymplectoGerm};
pub use operad::OperadElement;
pub use sample::Sampler;
pub use selfcheck::SelfCheckReport;
