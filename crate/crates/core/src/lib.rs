//! Galerkin solver for coupled two-species reaction-diffusion systems on an
//! interval, using modified Bernstein polynomials as trial functions.
//!
//! The pipeline is [`basis`] and [`quadrature`] feeding [`assembly`], the
//! Picard/theta time loop in [`stepper`] and post-processing in [`norms`].
//! [`fd_oracle`] is an independent finite-difference reference and
//! [`golden`] checks runs against tabulated values.

pub mod assembly;
pub mod basis;
pub mod dense_solve;
pub mod fd_oracle;
pub mod golden;
pub mod norms;
pub mod problem;
pub mod quadrature;
pub mod stepper;
