//! Landmark shape space: kernel metric, geodesic shooting, and random walks
//! on closed curves.

mod curve;
mod distance;
mod kernel;
mod landmarks;

pub use curve::{render_curves, shape_random_walk, Canvas, RandomWalk, ShapeCurve, StepLaw, WalkOptions, WalkStop};
pub use distance::{geodesic_distance, GeodesicMatch, ShootingOptions};
pub use kernel::KernelSpec;
pub use landmarks::{
    cometric, geodesic_shoot, kinetic_energy, metric_form, momenta_for_velocities, shoot_endpoint, velocities,
    LandmarkState, Trajectory, MIN_SEPARATION,
};
