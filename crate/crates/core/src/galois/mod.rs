//! Prime-field arithmetic and the dense linear algebra the codes are built on.

mod field;
mod matrix;

pub use field::{is_prime, next_prime, Elem, Field};
pub use matrix::{solve_right, vandermonde, Mat};
