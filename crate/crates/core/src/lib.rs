pub mod cellset;
pub mod cli;
pub mod constructions;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod extremal;
pub mod lattice;
pub mod symmetry;
pub mod witness;
