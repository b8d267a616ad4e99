//! `b`-adapted Haar systems and bi-parameter transforms.

mod envelope;
mod function;
mod ordering;
mod system;
mod xi;

pub use envelope::{calibrate_envelope, haar_envelope, Envelope, Range};
pub use function::{haar_function, scaling_function, HaarFunction, HaarIndex};
pub(crate) use ordering::cube_integrals;
pub use ordering::{accretivity_slack, order_children, ChildOrdering};
pub use system::{forward_transform, reconstruct, relative_l2_error, BiParamCoefficients, HaarSystem};
pub use xi::{xi_decomposition, XiDecomposition};
