//! Numerical laboratory for finite sections of Gabor systems.
//!
//! A Gabor system G(g, Λ) collects the time-frequency shifts
//! π(λ)g(t) = e^{2πi λ₂·t} g(t - λ₁) of a window g over a point set Λ in
//! the time-frequency plane. Truncating Λ to a ball of radius n gives a
//! finite section whose lower Riesz bound A_n — the smallest eigenvalue of
//! the section's Gram matrix — measures how far the finite family is from
//! numerical linear dependence. This crate builds those sections, tracks
//! A_n as the radius grows, compares the collapse against the
//! weight-function tail bounds that govern it, and extracts near-kernel
//! vectors through Riesz-calculus contour projections of the resolvent.
//!
//! Module map:
//! - [`tf`]: points z = (x, ξ) in ℝ^{2d}
//! - [`window`]: windows, the ambiguity function, modulation/amalgam norms
//! - [`pointset`]: ball-truncated lattices and clouds with nesting masks
//! - [`weight`]: weight families, their conditions, and the tail bounds
//! - [`gram`]: Gram sections and off-diagonal-decay diagnostics
//! - [`spectrum`]: Hermitian eigensolves, Riesz-bound sweeps, gap detection
//! - [`kernel`]: contour projections, near-kernel vectors, the tail lemma
//! - [`report`]: decay fits, bound comparisons, JSON reports
//! - [`config`]: TOML run configuration
//! - [`selftest`]: the built-in check suite behind `gabor-sections selftest`

pub mod config;
pub mod gram;
pub mod kernel;
pub mod pointset;
pub mod report;
pub mod selftest;
pub mod spectrum;
pub mod tf;
pub mod weight;
pub mod window;

pub use config::RunConfig;
pub use gram::{assemble_gram, GramSection};
pub use kernel::{contour_projection, decay_fit, kernel_vector, lemma_bound_check, ContourSpec};
pub use pointset::{enumerate_lattice_in_ball, relative_separation, LatticeSpec, PointSet};
pub use spectrum::{detect_gap, eigs_hermitian, riesz_sweep, GapReport, RieszBounds};
pub use tf::TfPoint;
pub use weight::{bound_sum, bound_sup, WeightSpec};
pub use window::{gaussian_ambiguity, numeric_ambiguity, WindowSpec};

/// Environment variable overriding the rayon worker count.
pub const THREADS_ENV: &str = "GABOR_SECTIONS_THREADS";

/// Builds the global rayon pool honoring `--workers` / GABOR_SECTIONS_THREADS.
/// Results are deterministic regardless of the worker count: every parallel
/// region reduces in a fixed order.
pub fn init_thread_pool(workers: Option<usize>) -> Result<(), rayon::ThreadPoolBuildError> {
    let from_env = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&n| n > 0);
    let n = workers.or(from_env);
    match n {
        Some(n) => rayon::ThreadPoolBuilder::new().num_threads(n).build_global(),
        None => Ok(()),
    }
}
