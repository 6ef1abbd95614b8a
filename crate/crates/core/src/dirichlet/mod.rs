//! Minimisation of `p`-Dirichlet energies on balls: capacities,
//! parabolicity scans, harmonic extensions and the Royden split.

mod capacity;
mod royden;
mod solver;

pub use capacity::{
    capacity, loglog_fit, null_sequence, parabolicity_scan, CapacityEntry, CapacityScan,
    NullSequence, NullTerm, ParabolicityVerdict, Thresholds,
};
pub use royden::{
    harmonic_extension, maximum_principle_check, royden_split, MaxPrinciple, RoydenEntry,
    RoydenSource, RoydenTrend, RoydenVerdict,
};
pub use solver::{EnergyProblem, SolveReport, SolverKind, SolverOptions};
