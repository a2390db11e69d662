//! Lattice-graded multimodal logic: grades drawn from the free distributive
//! lattice over a finite poset, a Hilbert-style proof checker, finite
//! Kripke-style interpretations with countermodel search, and graded forward
//! chaining with checkable proof traces.

pub mod cli;
pub mod engine;
pub mod files;
pub mod formulas;
pub mod grades;
pub mod kripke;
pub mod lexer;
pub mod proofs;
