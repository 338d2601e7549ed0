//! Rescaled count vectors and their Gaussian limits, the boundary
//! processes of finite-volume packing, and cone-tail experiments.

mod boundary;
mod cones;
mod gauss;
mod rescaled;

pub use boundary::{boundary_processes, boundary_scaling, boundary_split, BoundaryOutcome, BoundaryRow, BoundaryScaling, ScalingFit};
pub use cones::{cone_needed_radius, cone_tail, cone_tail_sweep, default_beta, ConeTailReport, ConeTailRow};
pub use gauss::{gaussianity_report, BoxNormality, GaussianityOptions, GaussianityReport, GaussianityThresholds};
pub(crate) use rescaled::{check_boxes, to_f64_boxes};
pub use rescaled::{raw_counts, rescaled_samples, Mode, RescaledVectorSample};
