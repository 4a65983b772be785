//! Command implementations behind the `atw` binary.

pub mod animate;
pub mod bench;
pub mod commands;
pub mod frame;
pub mod report;
pub mod synthetic;

pub use animate::{run_animation, AnimationJob, AnimationOutcome, FieldSource};
pub use bench::{run_bench, BenchRow};
pub use commands::{cmd_decompose, cmd_mockgen, cmd_reswarp, ReswarpJob, ReswarpSource};
pub use report::SelfCheckFailed;
