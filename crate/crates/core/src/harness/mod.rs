//! Experiment drivers behind the command-line tool. Every table is
//! deterministic in its inputs and seed, independent of the thread count.

mod hmatrix;
mod link;
mod montecarlo;
mod output;
mod selftest;
mod sense;
mod sweep;

pub use hmatrix::{hmatrix_rows, HRow, HMATRIX_HEADER};
pub use link::{link_rows, run_link, LinkRow, LinkRun, PointingSource, LINK_HEADER};
pub use montecarlo::{draw_target, run_mc, McRow, McSpec, MC_HEADER};
pub use output::{fingerprint, render_csv, run_fingerprint, write_csv, write_records};
pub use selftest::{
    check_channel_diagonalization, check_code_orthogonality, check_coupling_closed_form, check_distance_approximation,
    check_matched_decode, selftest, Check, Fault,
};
pub use sense::{
    estimate_rows, run_sense, sense_profiles, spectrum_rows, trace_rows, EstimateRow, SenseRun, SpectrumRow,
    ESTIMATE_HEADER, SPECTRUM_HEADER,
};
pub use sweep::{run_sweep, run_sweep_trials, SweepCell, SweepRow, SweepSpec, SweepTrial, SWEEP_HEADER};
