pub mod cli;
pub mod discrete;
pub mod ends;
pub mod graph;
pub mod orbits;
pub mod spectrum;
pub mod trace;
