//! Image ingestion, darkness conversion, frame difference operators and Sobel gradients.
//!
//! All density math works in darkness space: 255 is black, 0 is white.

pub mod pnm;
mod sobel;

pub use pnm::{load_image, save_image, PnmError, PnmHeader};
pub use sobel::{gradient_angle, sobel, GradientField, ZeroGradient};

use thiserror::Error;

pub type Rgb = [u8; 3];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channels {
    Gray,
    Rgb,
}

impl Channels {
    pub fn count(self) -> usize {
        match self {
            Channels::Gray => 1,
            Channels::Rgb => 3,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RasterError {
    #[error("image buffer holds {found} bytes, expected {expected}")]
    BadLength { expected: usize, found: usize },
    #[error("image dimensions must be at least 1x1, got {0}x{1}")]
    EmptyImage(usize, usize),
    #[error("dimension mismatch: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),
}

/// Row-major 8-bit raster, gray or RGB.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Image {
    width: usize,
    height: usize,
    channels: Channels,
    data: Vec<u8>,
}

impl Image {
    pub fn new(
        width: usize,
        height: usize,
        channels: Channels,
        data: Vec<u8>,
    ) -> Result<Self, RasterError> {
        if width == 0 || height == 0 {
            return Err(RasterError::EmptyImage(width, height));
        }
        let expected = width * height * channels.count();
        if data.len() != expected {
            return Err(RasterError::BadLength {
                expected,
                found: data.len(),
            });
        }
        Ok(Image {
            width,
            height,
            channels,
            data,
        })
    }

    pub fn filled_gray(width: usize, height: usize, value: u8) -> Self {
        Image::new(width, height, Channels::Gray, vec![value; width * height]).unwrap()
    }

    pub fn filled_rgb(width: usize, height: usize, color: Rgb) -> Self {
        let data = color.iter().copied().cycle().take(width * height * 3).collect();
        Image::new(width, height, Channels::Rgb, data).unwrap()
    }

    /// Gray image from a per-pixel function.
    pub fn from_fn_gray(width: usize, height: usize, f: impl Fn(usize, usize) -> u8) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Image::new(width, height, Channels::Gray, data).unwrap()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> Channels {
        self.channels
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [u8] {
        &mut self.data
    }

    pub fn rgb_at(&self, x: usize, y: usize) -> Rgb {
        let i = y * self.width + x;
        match self.channels {
            Channels::Gray => {
                let g = self.data[i];
                [g, g, g]
            }
            Channels::Rgb => [self.data[3 * i], self.data[3 * i + 1], self.data[3 * i + 2]],
        }
    }

    pub fn luma_at(&self, x: usize, y: usize) -> u8 {
        match self.channels {
            Channels::Gray => self.data[y * self.width + x],
            Channels::Rgb => luma(self.rgb_at(x, y)),
        }
    }

    /// Grayscale copy (Rec.601 luma for RGB input).
    pub fn to_gray(&self) -> Image {
        match self.channels {
            Channels::Gray => self.clone(),
            Channels::Rgb => {
                let data = self
                    .data
                    .chunks_exact(3)
                    .map(|c| luma([c[0], c[1], c[2]]))
                    .collect();
                Image::new(self.width, self.height, Channels::Gray, data).unwrap()
            }
        }
    }

    pub fn set_rgb(&mut self, x: usize, y: usize, color: Rgb) {
        let i = y * self.width + x;
        match self.channels {
            Channels::Gray => self.data[i] = luma(color),
            Channels::Rgb => self.data[3 * i..3 * i + 3].copy_from_slice(&color),
        }
    }
}

/// Rec.601 luma, rounded half-up, computed exactly in integers.
pub fn luma(c: Rgb) -> u8 {
    let weighted = 299 * c[0] as u32 + 587 * c[1] as u32 + 114 * c[2] as u32;
    ((weighted + 500) / 1000) as u8
}

/// Per-pixel darkness field, 255 = black.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DensityMap {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl DensityMap {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self, RasterError> {
        if width == 0 || height == 0 {
            return Err(RasterError::EmptyImage(width, height));
        }
        if data.len() != width * height {
            return Err(RasterError::BadLength {
                expected: width * height,
                found: data.len(),
            });
        }
        Ok(DensityMap {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        DensityMap::new(width, height, vec![value; width * height]).unwrap()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    pub fn total(&self) -> u64 {
        self.data.iter().map(|&v| v as u64).sum()
    }

    pub fn is_empty_mass(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    fn check_same_size(&self, other: &DensityMap) -> Result<(), RasterError> {
        if self.width != other.width || self.height != other.height {
            return Err(RasterError::DimensionMismatch(
                self.width,
                self.height,
                other.width,
                other.height,
            ));
        }
        Ok(())
    }
}

/// `255 - luma` for every pixel.
pub fn darkness(img: &Image) -> DensityMap {
    let mut data = Vec::with_capacity(img.width() * img.height());
    for y in 0..img.height() {
        for x in 0..img.width() {
            data.push(255 - img.luma_at(x, y));
        }
    }
    DensityMap::new(img.width(), img.height(), data).unwrap()
}

/// Removal and addition maps between two consecutive frames.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameDiff {
    pub removal: DensityMap,
    pub addition: DensityMap,
}

/// Plain clamped differences.
pub fn diff_simple(prev: &DensityMap, next: &DensityMap) -> Result<FrameDiff, RasterError> {
    prev.check_same_size(next)?;
    let removal = prev
        .data
        .iter()
        .zip(&next.data)
        .map(|(&p, &n)| p.saturating_sub(n))
        .collect();
    let addition = prev
        .data
        .iter()
        .zip(&next.data)
        .map(|(&p, &n)| n.saturating_sub(p))
        .collect();
    Ok(FrameDiff {
        removal: DensityMap::new(prev.width, prev.height, removal)?,
        addition: DensityMap::new(prev.width, prev.height, addition)?,
    })
}

/// `num * 255 / den`, rounded half-up.
fn scaled_ratio(num: u32, den: u32) -> u8 {
    debug_assert!(num <= den && den > 0);
    ((2 * num * 255 + den) / (2 * den)) as u8
}

/// Differences rescaled so that a fade to white removes with probability one.
///
/// Removal is the lost darkness relative to what the pixel had; addition is the
/// gained darkness relative to the headroom that was left.
pub fn diff_fading(prev: &DensityMap, next: &DensityMap) -> Result<FrameDiff, RasterError> {
    prev.check_same_size(next)?;
    let n = prev.data.len();
    let mut removal = vec![0u8; n];
    let mut addition = vec![0u8; n];
    for i in 0..n {
        let (p, q) = (prev.data[i] as u32, next.data[i] as u32);
        if p > q {
            assert!(p > 0);
            removal[i] = scaled_ratio(p - q, p);
        } else if q > p {
            assert!(p < 255);
            addition[i] = scaled_ratio(q - p, 255 - p);
        }
    }
    Ok(FrameDiff {
        removal: DensityMap::new(prev.width, prev.height, removal)?,
        addition: DensityMap::new(prev.width, prev.height, addition)?,
    })
}
