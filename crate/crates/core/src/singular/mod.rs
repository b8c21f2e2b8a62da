//! Fourier multipliers and real-space kernels: Riesz transforms, the Leray
//! projection, the heat semigroup, the Calderon-Zygmund decomposition and a
//! Bogovskii-type solenoidal truncation.

mod cz;
mod heat;
mod riesz;
mod solenoidal;

pub use cz::{cz_decompose, weak11_constant, weak11_sweep, CZCheck, CZDecomposition, Cube};
pub use heat::{heat_kernel, heat_kernel_sample, heat_semigroup, kernel_convolve, HeatKernelSample, Multiplied};
pub use riesz::{
    leray_project, leray_project_spectral, riesz, riesz_pair, riesz_vector, truncated_riesz, truncated_riesz_direct,
};
pub use solenoidal::{solenoidal_truncate, solenoidal_truncate_with, TruncationQuadrature};
