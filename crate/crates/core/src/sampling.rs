//! Density-adapted rejection sampling and point-budget arithmetic.

use rand::Rng;
use thiserror::Error;

use crate::cvt::Point;
use crate::raster::{luma, DensityMap, Rgb};

/// Integer pixel location of a support sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PixelPoint {
    pub x: u32,
    pub y: u32,
}

impl PixelPoint {
    pub fn new(x: u32, y: u32) -> Self {
        PixelPoint { x, y }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SiteKind {
    /// Sampled from image darkness.
    Tone,
    /// Sampled from thresholded gradient magnitude, reinforcing edges.
    Frequency,
}

impl SiteKind {
    pub fn tag(self) -> &'static str {
        match self {
            SiteKind::Tone => "tone",
            SiteKind::Frequency => "freq",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        match tag {
            "tone" => Some(SiteKind::Tone),
            "freq" => Some(SiteKind::Frequency),
            _ => None,
        }
    }
}

/// A stipple: one Voronoi generator with its render attributes for the current frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Site {
    pub id: u64,
    pub kind: SiteKind,
    pub pos: Point,
    pub color: Rgb,
    pub orientation: Option<f64>,
}

impl Site {
    pub fn darkness(&self) -> u8 {
        255 - luma(self.color)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SamplingError {
    #[error("density map has zero mass, rejection sampling cannot terminate")]
    ZeroDensity,
}

/// Mean darkness normalized to `[0, 1]`.
pub fn global_density(dm: &DensityMap) -> f64 {
    dm.total() as f64 / (255.0 * dm.data().len() as f64)
}

/// Rejection sampler over a darkness map.
///
/// A candidate `(x, y, m)` is drawn uniformly with `m` in `0..=255` and accepted
/// when `m > 255 - darkness(x, y)`, so each trial accepts with probability
/// `darkness / 256`; pure black is accepted 255 times out of 256.
pub struct RejectionSampler<'a> {
    dm: &'a DensityMap,
    trials: u64,
}

impl<'a> RejectionSampler<'a> {
    pub fn new(dm: &'a DensityMap) -> Result<Self, SamplingError> {
        if dm.is_empty_mass() {
            return Err(SamplingError::ZeroDensity);
        }
        Ok(RejectionSampler { dm, trials: 0 })
    }

    /// Candidates drawn so far, accepted or not.
    pub fn trials(&self) -> u64 {
        self.trials
    }

    pub fn next_point<R: Rng + ?Sized>(&mut self, rng: &mut R) -> PixelPoint {
        let (w, h) = (self.dm.width() as u32, self.dm.height() as u32);
        loop {
            self.trials += 1;
            let x = rng.random_range(0..w);
            let y = rng.random_range(0..h);
            let m: u8 = rng.random();
            if m as u16 > 255 - self.dm.get(x as usize, y as usize) as u16 {
                return PixelPoint { x, y };
            }
        }
    }

    pub fn take<R: Rng + ?Sized>(&mut self, count: usize, rng: &mut R) -> Vec<PixelPoint> {
        (0..count).map(|_| self.next_point(rng)).collect()
    }
}

/// Exactly `count` accepted points, in acceptance order.
pub fn rejection_sample<R: Rng + ?Sized>(
    dm: &DensityMap,
    count: usize,
    rng: &mut R,
) -> Result<Vec<PixelPoint>, SamplingError> {
    if count == 0 {
        return Ok(Vec::new());
    }
    Ok(RejectionSampler::new(dm)?.take(count, rng))
}

/// Reference ratio between point counts and image density, fixed at the first frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Budget {
    pub n_sites_ref: usize,
    pub d_ref: f64,
    pub alpha: usize,
}

impl Budget {
    pub fn new(n_sites_ref: usize, d_ref: f64, alpha: usize) -> Self {
        assert!(d_ref > 0.0, "reference density must be positive");
        assert!(alpha >= 1, "support multiplier must be at least 1");
        Budget {
            n_sites_ref,
            d_ref,
            alpha,
        }
    }

    /// Site count preserving the reference ratio at density `d_now`.
    pub fn sites_for(&self, d_now: f64) -> usize {
        assert!(d_now >= 0.0);
        (self.n_sites_ref as f64 * d_now / self.d_ref).round() as usize
    }

    /// `(n_sites, n_support)` for density `d_now`.
    pub fn required_counts(&self, d_now: f64) -> (usize, usize) {
        let n = self.sites_for(d_now);
        (n, n * self.alpha)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Layer, Purpose};

    fn rng() -> rand_chacha::ChaCha8Rng {
        stream(42, 0, Layer::Tone, Purpose::SupportInit, 0)
    }

    #[test]
    fn density_examples() {
        assert_eq!(global_density(&DensityMap::filled(4, 4, 255)), 1.0);
        assert_eq!(global_density(&DensityMap::filled(4, 4, 0)), 0.0);
        let half = DensityMap::new(2, 1, vec![255, 0]).unwrap();
        assert_eq!(global_density(&half), 0.5);
    }

    #[test]
    fn black_map_accepts_nearly_every_candidate() {
        let dm = DensityMap::filled(16, 16, 255);
        let mut r = rng();
        let mut sampler = RejectionSampler::new(&dm).unwrap();
        let pts = sampler.take(100, &mut r);
        assert_eq!(pts.len(), 100);
        // a rejection needs m == 0, probability 1/256 per candidate
        assert!(sampler.trials() <= 104, "trials = {}", sampler.trials());
    }

    #[test]
    fn black_map_rejects_only_zero_draws() {
        // replay the candidate stream by hand: every candidate with m > 0 is taken
        let dm = DensityMap::filled(8, 8, 255);
        let pts = rejection_sample(&dm, 300, &mut rng()).unwrap();
        let mut r = rng();
        let mut expected = Vec::new();
        while expected.len() < 300 {
            let x = r.random_range(0..8u32);
            let y = r.random_range(0..8u32);
            let m: u8 = r.random();
            if m > 0 {
                expected.push(PixelPoint { x, y });
            }
        }
        assert_eq!(pts, expected);
    }

    #[test]
    fn zero_count_and_zero_mass() {
        assert!(rejection_sample(&DensityMap::filled(3, 3, 9), 0, &mut rng())
            .unwrap()
            .is_empty());
        assert_eq!(
            rejection_sample(&DensityMap::filled(3, 3, 0), 5, &mut rng()),
            Err(SamplingError::ZeroDensity)
        );
        assert!(rejection_sample(&DensityMap::filled(3, 3, 0), 0, &mut rng()).is_ok());
    }

    #[test]
    fn points_respect_zero_pixels() {
        let dm = DensityMap::new(4, 1, vec![0, 255, 0, 10]).unwrap();
        let pts = rejection_sample(&dm, 500, &mut rng()).unwrap();
        assert!(pts.iter().all(|p| p.x == 1 || p.x == 3));
    }

    #[test]
    fn deterministic_given_seed() {
        let dm = DensityMap::new(3, 2, vec![10, 200, 30, 40, 50, 255]).unwrap();
        let a = rejection_sample(&dm, 64, &mut rng()).unwrap();
        let b = rejection_sample(&dm, 64, &mut rng()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn budget_examples() {
        let b = Budget::new(3000, 0.30, 10);
        assert_eq!(b.required_counts(0.30), (3000, 30000));
        assert_eq!(b.required_counts(0.15), (1500, 15000));
        assert_eq!(b.required_counts(0.0), (0, 0));
    }
}
