//! Verification harness: series-coefficient extraction from the exact
//! solvers, certification sweeps, and lookup-table generation.

mod series;
mod table;
mod verify;

pub use series::{
    check_schedule, default_rho_schedule, extract_count_series_with, extract_series,
    extract_series_with, extrapolate_at_infinity, CountLadder, CountSeriesEstimate, RhoLadder,
    SeriesEstimate,
};
pub use table::{generate_table, Method, OutputFormat, TableRow, TableSpec};
pub use verify::{
    enumerate_count_queries, verify_sweep, verify_sweep_perturbed, CheckReport, EntryReport,
    SigmaPerturbation, SweepReport, VerifyOptions,
};
