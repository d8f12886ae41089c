//! The partitioning method: level schedules on `[η, u]`, per-box tolerance
//! allocation, covers of uniformly bounded boxes and the reductions that
//! assemble them into a cover of `C_p(I, B)`.

pub mod cover;
pub mod pipeline;
pub mod plan;
pub mod reduce;
pub mod schedule;

pub use cover::{combine_covers, quantized_box_cover, BoxCover, FiniteCover, ProductCover, QuantizedBoxCover};
pub use pipeline::{dyadic_growth, pipeline_cover, DyadicGrowth, PipelineCover, Validation};
pub use plan::{build_plan, doubling_check, doubling_diagnostics, level_sum, DoublingOutcome, DoublingReport, PartitionPlan};
pub use reduce::{reduce_boundary, reflect, scale_to_unit, symmetry_split, tail_mass, BoundaryReduction};
pub use schedule::{dyadic_schedule, geometric_schedule, EtaSchedule, ScheduleKind};
