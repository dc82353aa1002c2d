pub mod combiner;
pub mod experiment;
pub mod features;
pub mod lp;
pub mod netgen;
pub mod network;
pub mod orchestrator;
pub mod pairing;
pub mod vgae;
