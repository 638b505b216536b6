//! Exact polynomial arithmetic: univariate over the rationals, modular
//! images, bivariate elimination, and gcds over products of number fields.

pub mod bipoly;
pub mod fp;
pub mod tower;
mod upoly;

pub use bipoly::BiPoly;
pub use upoly::QPoly;
