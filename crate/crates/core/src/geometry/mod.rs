//! Isoperimetric profiles, empirical Sobolev constants and the inequalities
//! relating them.

mod iso;
mod sobolev;

pub use iso::{
    check_isd, isoperimetric_profile, Cutoff, IsdCheck, IsoperimetricProfile, IsoperimetricRecord,
    Strategy, Trend, DEFAULT_BUDGET, EXHAUSTIVE_MAX, GROWTH_SLOPE, HEURISTIC_MAX,
};
pub use sobolev::{
    exponent_identity_defect, indicator_bridge_defect, is_equivalence_probe, lemma61_check,
    mean_value_step, p2_constant, sobolev_constant, sobolev_p2, BridgeRow, EquivalenceProbe,
    FamilyTrend, Lemma61Report, Maximizer, P2Options, SobolevOptions, SobolevP2, SobolevReport,
};
