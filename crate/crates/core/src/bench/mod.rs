//! Experiment harness: real-data replications, Monte Carlo coverage
//! studies and summary tables.

mod crime;
mod experiment;
mod simulate;
mod summary;

pub use crime::{
    load_crime_dataset, load_crime_reader, CrimeOptions, CRIME_CATEGORICAL, CRIME_FEATURES, CRIME_RAW_COLUMNS,
    CRIME_RESPONSE,
};
pub use experiment::{run_experiment, run_experiment_on, write_records_csv, ExperimentConfig, Method, RepRecord};
pub use simulate::{
    nominal_std_error, simulate_coverage, CoverageEstimate, LinearGaussianDgp, SimMethod, SIM_RIDGE_FACTOR,
};
pub use summary::{summarize, summary_json, type7_quantile, write_summary_csv, SixNumber, SummaryRow};
