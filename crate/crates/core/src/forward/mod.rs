//! Synthetic boundary data: finite elements on a ring mesh, centred-disk
//! transmission oracles, point-source traces and multiplicative noise.

pub mod analytic;
pub mod fem;
pub mod medium;
pub mod mesh;
pub mod noise;
pub mod sources;

pub use analytic::{
    analytic_transmission, bounded_transmission, bounded_transmission_trace, decoupling_ratio,
    homogeneous_solution, neumann_to_incident_scale, small_inclusion_gradient_ratio,
};
pub use fem::{fem_background, fem_solve, scattered_field, scattered_trace};
pub use medium::{
    build_medium, BackgroundSpec, ForwardConfig, Inclusion, InclusionKind, InclusionSpec, InclusionTag, Influx, InfluxForm,
    MediumConfig, MeshSpec, NoiseSpec, ProbesSpec,
};
pub use mesh::{mesh_disk, Mesh};
pub use noise::add_noise;
pub use sources::{point_source_trace, Dipole, Monopole, PointSourceConfig};
