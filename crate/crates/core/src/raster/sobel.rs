use std::f64::consts::{FRAC_PI_2, PI};

use thiserror::Error;

use super::Image;

/// Sobel responses of a grayscale image.
///
/// `gx` is right minus left, `gy` is bottom minus top (image rows grow downward).
/// Border pixels carry zero response.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientField {
    width: usize,
    height: usize,
    gx: Vec<i32>,
    gy: Vec<i32>,
    magnitude: Vec<f64>,
    threshold: f64,
}

impl GradientField {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn gx(&self, x: usize, y: usize) -> i32 {
        self.gx[y * self.width + x]
    }

    pub fn gy(&self, x: usize, y: usize) -> i32 {
        self.gy[y * self.width + x]
    }

    /// Thresholded magnitude; zero below the threshold.
    pub fn magnitude(&self, x: usize, y: usize) -> f64 {
        self.magnitude[y * self.width + x]
    }

    pub fn magnitudes(&self) -> &[f64] {
        &self.magnitude
    }
}

/// 3x3 Sobel on the luma of `img`, magnitudes below `threshold` set to zero.
pub fn sobel(img: &Image, threshold: f64) -> GradientField {
    assert!(threshold >= 0.0, "sobel threshold must be non-negative");
    let (w, h) = (img.width(), img.height());
    let gray = img.to_gray();
    let px = |x: usize, y: usize| gray.data()[y * w + x] as i32;
    let mut gx = vec![0i32; w * h];
    let mut gy = vec![0i32; w * h];
    let mut magnitude = vec![0.0f64; w * h];
    if w >= 3 && h >= 3 {
        for y in 1..h - 1 {
            for x in 1..w - 1 {
                let dx = (px(x + 1, y - 1) + 2 * px(x + 1, y) + px(x + 1, y + 1))
                    - (px(x - 1, y - 1) + 2 * px(x - 1, y) + px(x - 1, y + 1));
                let dy = (px(x - 1, y + 1) + 2 * px(x, y + 1) + px(x + 1, y + 1))
                    - (px(x - 1, y - 1) + 2 * px(x, y - 1) + px(x + 1, y - 1));
                let i = y * w + x;
                gx[i] = dx;
                gy[i] = dy;
                let m = ((dx as f64).powi(2) + (dy as f64).powi(2)).sqrt();
                magnitude[i] = if m < threshold { 0.0 } else { m };
            }
        }
    }
    GradientField {
        width: w,
        height: h,
        gx,
        gy,
        magnitude,
        threshold,
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("gradient angle undefined for a zero gradient")]
pub struct ZeroGradient;

/// `atan2(gx, gy)` folded into `(-pi/2, pi/2]`.
///
/// Read as a counter-clockwise angle in a y-up frame, a segment at this angle
/// (pixel direction `(cos t, -sin t)`) runs perpendicular to `(gx, gy)`.
pub fn gradient_angle(gx: f64, gy: f64) -> Result<f64, ZeroGradient> {
    if gx == 0.0 && gy == 0.0 {
        return Err(ZeroGradient);
    }
    let mut theta = gx.atan2(gy);
    if theta > FRAC_PI_2 {
        theta -= PI;
    } else if theta <= -FRAC_PI_2 {
        theta += PI;
    }
    Ok(theta)
}
