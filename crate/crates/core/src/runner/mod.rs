//! Scenario engine: the sampled-data simulation loop, config-driven
//! scenarios and the per-lemma verdict suites.

mod lemmas;
mod scenario;
mod simulate;

pub use lemmas::{fmt_real, run_lemma, Check, LemmaParams, LemmaWhich, Verdict};
pub use scenario::{run_scenario, ScenarioConfig, Summary};
pub use simulate::{simulate, SimOptions};
pub(crate) use simulate::hash_hex;
