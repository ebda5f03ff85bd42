//! p-adic Schottky uniformization of hyperelliptic Whittaker curves.
//!
//! The crate is organised bottom-up: [`padic`] arithmetic, the projective
//! line and Mobius maps in [`projline`], reduced words of the free product
//! of involutions in [`freegroup`], reduction trees and configurations in
//! [`redtree`], and theta products with the fixed-point to branch-point
//! map in [`theta`].

pub mod padic;
mod padic_parse;

pub use padic::{Field, FieldElement, FieldSpec, NotSquareKind, PadicError, Residue, ResidueField};

pub mod error;
pub mod freegroup;
pub mod projline;

pub use error::{Error, Result};
pub use projline::{Mobius, ProjPoint};
pub mod catalog;
pub mod poly;
pub mod redtree;
pub mod registry;
pub use redtree::{ReductionTree, Skeleton};
pub mod theta;
