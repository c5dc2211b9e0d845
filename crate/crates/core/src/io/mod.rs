//! File formats: trajectories, surrogate records, result tables, run
//! manifests and reports.

pub mod manifest;
pub mod points;
pub mod records;
pub mod report;
pub mod table;
pub mod trajectory;

pub use manifest::{machine_descriptor, spec_hash, RunManifest, TrajectoryRef, TOOLKIT_VERSION};
pub use points::parse_scaling_points;
pub use records::{load_records, parse_records_csv, parse_records_json, records_csv, records_json};
pub use report::{emit_report, frontier_csv, result_table, ReportFormat};
pub use table::{emit_table, parse_table, ResultTable, TableRow};
pub use trajectory::{
    decode_trajectory, encode_trajectory, read_trajectory, sha256_file, write_trajectory, Dtype, TrajectoryMeta,
};

/// Shortest decimal text that parses back to the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}
