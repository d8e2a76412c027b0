//! Experiment harness: bisection over population size, sweeps over problem
//! size, slope fits and configuration.

pub mod bisect;
pub mod config;
pub mod fit;
pub mod sweep;

pub use bisect::{bisect, bisect_min_popsize, BisectOutcome, BisectionConfig};
pub use config::{ExperimentConfig, HeightPlan, InitPlan, Scale};
pub use fit::{fit_loglog_slope, LogLogFit};
pub use sweep::{predict, read_csv, sweep, SweepRecord, CSV_HEADER};
