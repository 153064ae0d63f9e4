pub mod approx;
pub mod artifact;
pub mod reconstruct;
pub mod sense;
pub mod subspace;
