//! Kernels `K_{t1,t2}`, their standard and Carleson estimates, and `Θ_{t1,t2}`.

mod apply;
mod spec;
mod verify;

pub use apply::{apply_theta, apply_theta_direct, weight_field, ThetaBank};
pub use spec::{
    annihilating_profile, holder_profile, make_builtin, read_tabulated, size_profile,
    tabulated_kernel, write_tabulated, BuiltinKind, BuiltinParams, FactorKernel, KernelBody,
    KernelSpec,
};
pub use verify::{
    carleson_box_lhs, carleson_box_nodes, verify_carleson_assumptions, verify_estimates,
    CarlesonMode, CarlesonPlan, EstimateMode, Exterior, Orientation, SamplePlan,
};
