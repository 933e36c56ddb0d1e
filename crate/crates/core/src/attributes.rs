//! Per-site render attributes: size from darkness and contrast, the edge-reinforcing
//! frequency layer, pattern orientation, primary-color quantization, and cell-area
//! intensity normalization.

use rand::Rng;

use crate::config::StippleConfig;
use crate::cvt::{Assignment, LloydStats};
use crate::error::Result;
use crate::raster::{gradient_angle, DensityMap, GradientField, Image, Rgb};
use crate::sampling::{Site, SiteKind};
use crate::temporal::PointLayer;

/// Frequency sites are drawn a third smaller than tone sites.
pub const FREQUENCY_SIZE_FACTOR: f64 = 2.0 / 3.0;

/// Sobel magnitude of a full-contrast step edge; maps to density 255.
const FULL_STEP_RESPONSE: f64 = 4.0 * 255.0;

/// Clamp range for [`area_normalization`].
pub const NORMALIZATION_RANGE: (f64, f64) = (0.5, 2.0);

#[derive(Debug, Clone, PartialEq)]
pub struct RenderAttributes {
    pub color: Rgb,
    pub darkness: f64,
    pub size_factor: f64,
    pub orientation: Option<f64>,
    pub normalization: f64,
}

impl RenderAttributes {
    pub fn for_site(site: &Site, contrast: f64) -> Self {
        let darkness = site.darkness() as f64;
        RenderAttributes {
            color: site.color,
            darkness,
            size_factor: kind_size(site.kind, darkness, contrast),
            orientation: site.orientation,
            normalization: 1.0,
        }
    }

    pub fn with_normalization(mut self, factor: f64) -> Self {
        assert!(factor > 0.0);
        self.normalization = factor;
        self
    }

    /// Final radius multiplier.
    pub fn scaled_size(&self) -> f64 {
        self.size_factor * self.normalization
    }
}

/// `(darkness / 255) * contrast`: white sites vanish, black sites are largest.
pub fn site_size(darkness: f64, contrast: f64) -> f64 {
    assert!(contrast > 0.0, "contrast must be positive");
    darkness / 255.0 * contrast
}

/// [`site_size`] with the frequency-layer reduction applied.
pub fn kind_size(kind: SiteKind, darkness: f64, contrast: f64) -> f64 {
    let s = site_size(darkness, contrast);
    match kind {
        SiteKind::Tone => s,
        SiteKind::Frequency => s * FREQUENCY_SIZE_FACTOR,
    }
}

/// Thresholded gradient magnitude rescaled to a darkness map.
pub fn frequency_density(field: &GradientField) -> DensityMap {
    let data = field
        .magnitudes()
        .iter()
        .map(|&m| (m * 255.0 / FULL_STEP_RESPONSE).round().clamp(0.0, 255.0) as u8)
        .collect();
    DensityMap::new(field.width(), field.height(), data).expect("field dimensions")
}

/// Runs the sampling and relaxation pipeline on the edge density.
///
/// The returned layer's sites carry `SiteKind::Frequency` and ids starting at
/// `*next_id`; they are meant to be merged next to the tone sites.
pub fn frequency_sites(
    img: &Image,
    field: &GradientField,
    count: usize,
    cfg: &StippleConfig,
    frame: u64,
    next_id: &mut u64,
) -> Result<(PointLayer, LloydStats)> {
    let density = frequency_density(field);
    if count > 0 && density.is_empty_mass() {
        return Err(crate::Error::ZeroFrequencyMass(count));
    }
    let (mut layer, stats) = PointLayer::initialize(SiteKind::Frequency, density, count, cfg, frame, next_id)?;
    layer.paint(img, Some(field), cfg);
    Ok((layer, stats))
}

/// Gradient angle at the pixel under each site, `None` where the thresholded
/// gradient vanishes (such sites render as dots).
pub fn orient_patterns(sites: &mut [Site], field: &GradientField) {
    for s in sites {
        let (x, y) = crate::temporal::nearest_pixel(s.pos, field.width(), field.height());
        s.orientation = if field.magnitude(x, y) > 0.0 {
            gradient_angle(field.gx(x, y) as f64, field.gy(x, y) as f64).ok()
        } else {
            None
        };
    }
}

/// Pattern segment length: four times the dot size, kept clear of the nearest
/// oriented neighbour.
pub fn pattern_length(size: f64, nearest_neighbor: f64) -> f64 {
    (4.0 * size).min(0.9 * nearest_neighbor)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Quantized {
    pub color: Rgb,
    /// The input was black and the primary was chosen uniformly.
    pub fallback: bool,
}

pub const PRIMARIES: [Rgb; 3] = [[255, 0, 0], [0, 255, 0], [0, 0, 255]];

/// Picks red, green or blue with probability proportional to the channel value.
pub fn primary_color_quantize<R: Rng + ?Sized>(color: Rgb, rng: &mut R) -> Quantized {
    let total: u32 = color.iter().map(|&c| c as u32).sum();
    if total == 0 {
        return Quantized {
            color: PRIMARIES[rng.random_range(0..3)],
            fallback: true,
        };
    }
    let mut pick = rng.random_range(0..total);
    for (c, primary) in color.iter().zip(PRIMARIES) {
        if pick < *c as u32 {
            return Quantized {
                color: primary,
                fallback: false,
            };
        }
        pick -= *c as u32;
    }
    unreachable!("pick below channel total")
}

/// `mean_count / count_i` per site before clamping; `None` for empty cells.
pub fn area_normalization_raw(assignment: &Assignment) -> Vec<Option<f64>> {
    let counts = assignment.member_counts();
    let total: usize = counts.iter().sum();
    let mean = total as f64 / counts.len().max(1) as f64;
    counts
        .iter()
        .map(|&c| (c > 0).then(|| mean / c as f64))
        .collect()
}

/// Intensity normalization: smaller cells get larger factors, clamped to
/// [`NORMALIZATION_RANGE`]. Member counts stand in for cell areas.
pub fn area_normalization(assignment: &Assignment) -> Vec<f64> {
    let (lo, hi) = NORMALIZATION_RANGE;
    area_normalization_raw(assignment)
        .into_iter()
        .map(|f| f.map_or(hi, |v| v.clamp(lo, hi)))
        .collect()
}
