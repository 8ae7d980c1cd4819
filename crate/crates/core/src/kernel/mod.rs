//! Spectrum kernels over feature sequences.
//!
//! Two sequences are compared by summing, for every length `p`, the product
//! kernels of all pairs of contiguous length-`p` subsequences. The per-length
//! sums are produced together by one dynamic program, weighted, and
//! optionally normalized by the self-kernels.

mod config;
mod gram;
pub mod oracle;
mod spectrum;

pub use config::{KernelConfig, Weighting};
pub use gram::{gram, gram_matrix, stacked_gram, SpectrumTable};
pub use spectrum::{
    atomic_kernel, normalized_kernel, self_kernel, spectrum_kernel_all_p,
    spectrum_kernel_all_p_with, stacked_gaussian_kernel, weighted_kernel, AtomicKernel, Gaussian,
};
