//! User knobs for the stippling pipeline.

use crate::cvt::{Backend, LloydParams};

/// Lloyd stopping rules shared by every frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Convergence {
    /// Displacement-sum threshold per 1000 sites, scaled linearly with the site count.
    pub displacement_per_1000: f64,
    /// `(window, tolerance)` for the Poisson-radius stability rule; `None` disables it.
    pub radius_window: Option<(usize, f64)>,
    pub max_iter: usize,
}

impl Default for Convergence {
    fn default() -> Self {
        Convergence {
            displacement_per_1000: 0.5,
            radius_window: Some((3, 0.01)),
            max_iter: 60,
        }
    }
}

impl Convergence {
    pub fn lloyd_params(&self, n_sites: usize, domain: (f64, f64), backend: Backend) -> LloydParams {
        let threshold = (self.displacement_per_1000 * n_sites as f64 / 1000.0).max(1e-9);
        let mut p = LloydParams::new(threshold, self.max_iter.max(1), domain);
        p.radius_window = self.radius_window;
        p.backend = backend;
        p
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StippleConfig {
    /// Tone sites at the first frame.
    pub n_sites: usize,
    /// Support points per site.
    pub alpha: usize,
    /// Use the rescaled difference operators that complete fades.
    pub fading: bool,
    /// Frequency sites at the first frame; 0 disables the edge layer.
    pub freq_sites: usize,
    /// Sobel magnitude cutoff on the unnormalized scale.
    pub freq_threshold: f64,
    pub primary_colors: bool,
    /// Store a gradient orientation on frequency sites.
    pub patterns: bool,
    pub seed: u64,
    /// Suppress/add/relocate passes per frame before the final Lloyd loop.
    pub correction_passes: usize,
    pub convergence: Convergence,
    pub backend: Backend,
}

impl Default for StippleConfig {
    fn default() -> Self {
        StippleConfig {
            n_sites: 1000,
            alpha: 10,
            fading: true,
            freq_sites: 0,
            freq_threshold: 128.0,
            primary_colors: false,
            patterns: false,
            seed: 0,
            correction_passes: 2,
            convergence: Convergence::default(),
            backend: Backend::Grid,
        }
    }
}

impl StippleConfig {
    pub fn with_sites(n_sites: usize) -> Self {
        StippleConfig {
            n_sites,
            ..Default::default()
        }
    }
}
