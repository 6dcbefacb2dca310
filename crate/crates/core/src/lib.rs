//! Exact-arithmetic Koszul cohomology for products of two projective
//! spaces under Segre-Veronese embeddings.
//!
//! The crate computes graded Betti numbers of `P^{n1} x P^{n2}` embedded by
//! `O(d1, d2)`, working over a word-sized prime field or exact rationals.
//! It builds the diagonal regular sequence, reduces Koszul strands modulo
//! it, computes ranks blockwise along two auxiliary gradings, constructs
//! explicit witness cocycles for non-vanishing, and ships grid verification
//! suites behind the `syz` command-line tool.
//!
//! See the guide under `book/` for a narrative walk-through; its code
//! samples run as doctests.

pub mod comb;
pub mod error;
pub mod field;
pub mod ideal;
pub mod koszul;
pub mod matrix;
pub mod monomial;
pub mod poly;
pub mod regularity;
pub mod setting;
pub mod verify;
pub mod witness;

mod guide;

pub use error::{Error, Result};
pub use field::{Field, PrimeField, Rationals};
pub use monomial::{BiDegree, ModularDegree, Monomial};
pub use setting::Setting;
