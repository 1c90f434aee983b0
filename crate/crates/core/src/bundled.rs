//! Small regression models shipped with the crate, with the sentences they
//! are meant to be checked against.

use crate::model::{parse_model, Dtmc};

pub const REACHABILITY_MODEL: &str = include_str!("../models/reachability.dtmc");
pub const REACHABILITY_SENTENCE: &str = include_str!("../models/reachability.hpctl");
pub const SCHEDULER_MODEL: &str = include_str!("../models/scheduler.dtmc");
pub const SCHEDULER_SENTENCE: &str = include_str!("../models/scheduler_noninterference.hpctl");
pub const RANDOMIZED_RESPONSE_MODEL: &str = include_str!("../models/randomized_response.dtmc");
pub const RANDOMIZED_RESPONSE_SENTENCE: &str =
    include_str!("../models/randomized_response_dp.hpctl");
pub const TWO_STATE_MODEL: &str = include_str!("../models/two_state.dtmc");

/// Every bundled model by file stem.
pub const MODELS: [(&str, &str); 4] = [
    ("reachability", REACHABILITY_MODEL),
    ("scheduler", SCHEDULER_MODEL),
    ("randomized_response", RANDOMIZED_RESPONSE_MODEL),
    ("two_state", TWO_STATE_MODEL),
];

pub fn load(text: &str) -> Dtmc {
    parse_model(text).expect("bundled models are valid")
}
