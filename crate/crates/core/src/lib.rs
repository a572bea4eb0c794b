//! Computational tools for subgroups of free groups and splittings built
//! from them: Stallings subgroup graphs, metric small-cancellation
//! certification, Magnus–Moldavanskii rewriting of one-relator groups,
//! Brown's finite-generation criterion for character kernels, and
//! path-stabilizer sampling in Bass–Serre trees of graphs of free groups.

pub mod bassserre;
pub mod bns;
pub mod onerelator;
pub mod smallcancel;
pub mod stallings;
pub mod words;

pub use words::{Alphabet, CyclicWord, Letter, Word, WordError};
