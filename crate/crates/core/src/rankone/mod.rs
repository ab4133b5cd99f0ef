//! Rank-one cutting-and-stacking transformations.

mod chacon;
mod nonrec;
mod tower;

pub use chacon::{
    chacon_all_ones_check, chacon_height, chacon_nonrecurrence_check, chacon_shift_check, chacon_word, parse_rle, rle,
    ChaconSummary, ChaconWord, MAX_CHACON_INDEX,
};
pub use nonrec::{nonrecurrent_set_from_rigidity, CyclicSystem, NonrecurrentSet, Selected};
pub use tower::{
    build, build_with_budget, delta_at, delta_mass, preset_chacon, preset_concatenation, preset_infrankone,
    preset_specialinfrankone, rigidity_bound_check, DeltaBracket, MeasureEvidence, RankOneSpec, RigidityBoundCheck,
    SpacerGroup, Stage, TowerState, TowerSummary, MAX_LEVELS,
};
