//! Fixtures shared by the benchmarks.

use orbiglue::ale_library::{eguchi_hanson_profile, warped_curvature, RadialMetric};
use orbiglue::cone_geometry::make_group;
use orbiglue::gluing_lab::norms::{log_grid, RadialField};
use orbiglue::{GroupAction, GroupSpec};

pub fn z2() -> GroupAction {
    make_group(&GroupSpec::CyclicSu2 { n: 2 }).expect("Z2 acts freely")
}

pub fn eguchi_hanson() -> RadialMetric {
    eguchi_hanson_profile(1.0).expect("positive scale")
}

/// Ricci tensor of `m` sampled on `n` log-spaced radii in `[0.05, 3]`.
pub fn ricci_field(m: &RadialMetric, n: usize) -> RadialField {
    RadialField::from_fn(m, log_grid(0.05, 3.0, n), |x| x, 2.0, |x| warped_curvature(m, x).ricci.as_slice().to_vec())
        .expect("finite samples")
}
