//! Scenario configs, the bundled corpus and the runner behind the `ffspec` binary.

mod config;
mod corpus;
mod run;

pub use config::{
    ResolvedTolerances, ScattererEntry, ScenarioConfig, Task, TaskOptions, Tolerances,
};
pub use corpus::corpus;
pub use run::{
    default_output_dir, run_config_file, run_corpus, run_scenario, Check, Relation, RunReport,
    Status, TaskReport, EXIT_CONFIG, EXIT_OK, EXIT_TASK_FAILURE,
};
