//! Decision procedures for one-dimensional group cellular automata.

pub mod abelian;
pub mod corpus;
pub mod decompose;
pub mod gca;
pub mod group;
pub mod io;
pub mod oracle;
pub mod properties;
pub mod simple_product;
pub mod verdict;
