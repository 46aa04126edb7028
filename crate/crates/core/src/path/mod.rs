//! Distinguished-path selection through the tree of thinned fractals.

mod effective;
mod stage;
mod witness;

pub use effective::{
    choose_d_effective, effective_initial, effective_stage, gap_clear, EffectiveParams, EffectiveReport,
    EffectiveState, DEFAULT_SUBSTAGES,
};
pub use stage::{
    bad_fraction_tests, candidate_branches, certify, choose_d, classical_stage, endpoint_hits, run_classical,
    select_branch, stage_data, CandidateEval, PathContext, PathState, StageCertificate, StageData, StageReport,
    TestValue, Tri, DEFAULT_CANDIDATE_CAP, ESCALATIONS, ESCALATION_BITS,
};
pub use witness::{code_bits, code_length_witness, WitnessRecord};

#[cfg(test)]
mod tests;
