//! Flag-and-fallback syndrome extraction for the [[7,1,3]] Steane code.

pub mod canonical;
pub mod circuit;
pub mod code;
pub mod decoder;
pub mod faults;
pub mod montecarlo;
pub mod pauli;
pub mod protocol;
pub mod search;
pub mod sim;
pub mod stabilizer;
