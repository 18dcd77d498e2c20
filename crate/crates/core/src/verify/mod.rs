//! Sampling-based checks of the inequalities satisfied by the smallest
//! singular value function, plus distance estimation and exponent fitting.
//!
//! Every check draws its points from per-sample random streams derived from
//! the plan seed, so a report depends only on its inputs and never on the
//! number of worker threads.

mod distance;
mod global;
mod local;
mod plan;
mod pool;
mod region;
mod report;

pub use distance::{estimate_distance_to_intersection, estimate_distance_to_zero_set, DistanceEstimate, ZeroSet};
pub use global::{
    check_good_at_infinity, compact_tail_view, verify_global, verify_global_separation, verify_holder_global,
    GoodnessReport, SphereMinimum, GOODNESS_FLOOR, GOODNESS_PROBES,
};
pub use local::{
    fit_empirical_exponent, verify_error_bound, verify_gradient_inequality, ExponentFit, VANISHING, ZERO_DISTANCE,
};
pub use plan::{default_global_radii, default_radii, DistanceOptions, SamplePlan};
pub use region::{verify_factorization, verify_separation, F_FLOOR, INCLUSION_TOL};
pub use report::{
    decay_warning, Form, Inequality, RadiusSummary, SampleRecord, VerificationReport, Verdict,
    STABILITY_DECAY_PER_DECADE,
};
