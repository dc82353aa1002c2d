//! Brute-force reference implementations.
//!
//! Everything here works on plain data (index lists, tuples, scalars) and is
//! written for obviousness rather than speed, so it can serve as an
//! independent check on the solvers in `crewpair-core`. Instance sizes must
//! stay tiny: the LP oracle enumerates bases, the IP oracle enumerates column
//! subsets and the pairing oracle enumerates flight subsets.

pub mod cover;
pub mod crew;
pub mod gae;
pub mod graph;
pub mod roc;
