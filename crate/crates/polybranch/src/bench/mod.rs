//! Instance I/O, random generation, benchmark execution, metric aggregation
//! and performance profiles.

pub mod format;
pub mod gen;
pub mod harness;
pub mod metrics;
pub mod profile;
pub mod report;
pub mod trace;

pub use format::{parse_problem, write_problem, FormatError};
pub use gen::{gen_instance, GenError, GenParams};
pub use harness::{
    parse_approach, parse_approaches, run_bench, ApproachKind, ApproachSpec, BenchOptions,
    BenchOutcome, HarnessError,
};
pub use metrics::{aggregate, geo_mean, pace_lb, MetricTable, MetricsError, RunRow};
pub use profile::{performance_profile, profile_report, ProfileCurve, ProfileMetric};
pub use report::{read_report, write_profile, write_report, ReportError, REPORT_HEADER};
pub use trace::{read_trace, write_trace, TraceData, TraceError, TraceNode};
