//! Mild formulation of the (linearised) Navier-Stokes system
//!
//! ```text
//! u' - Delta u + div F + grad P = 0,   div u = 0,   u(0) = f
//! ```
//!
//! on the periodic box. The Leray projection removes `P`, leaving the
//! Duhamel equation `u(t) = e^{t Delta} f - int_0^t div e^{(t-s) Delta} P F(s) ds`,
//! which the solver discretises with an exponential trapezoid rule closed by
//! Picard iteration.

mod flux;
mod mild;
mod residual;
mod trajectory;

pub use flux::{flux_divergence_projected, nonlinear_flux, pressure_from_flux};
pub use mild::{flux_history, mild_rhs, solve_mild, FluxHistory, Model, SolverConfig};
pub use residual::{
    general_battery, projected_residual, residuals, solenoidal_battery, very_weak_residual, weak_residual, Formulation,
    Residual, TemporalProfile, TestFunction,
};
pub use trajectory::Trajectory;
