//! Synthetic frame sequences used by tests, benchmarks and the CLI `synth` command.

use std::path::Path;

use crate::error::{Error, Result};
use crate::raster::{save_image, Image};

/// Gray frame: `ink` (darkness) inside `inside`, white elsewhere.
fn shape(w: usize, h: usize, ink: u8, inside: impl Fn(f64, f64) -> bool) -> Image {
    Image::from_fn_gray(w, h, |x, y| {
        if inside(x as f64 + 0.5, y as f64 + 0.5) {
            255 - ink
        } else {
            255
        }
    })
}

pub fn disk(w: usize, h: usize, radius: f64) -> Image {
    let (cx, cy) = (w as f64 / 2.0, h as f64 / 2.0);
    shape(w, h, 255, |x, y| (x - cx).powi(2) + (y - cy).powi(2) <= radius * radius)
}

/// Centered black disk whose radius shrinks by `factor` every frame.
pub fn shrinking_disk(w: usize, h: usize, frames: usize, r0: f64, factor: f64) -> Vec<Image> {
    (0..frames).map(|k| disk(w, h, r0 * factor.powi(k as i32))).collect()
}

/// The benchmark toy video: radius 0.4 of the short side, shrinking 10% per frame.
pub fn toy_video(size: usize, frames: usize) -> Vec<Image> {
    shrinking_disk(size, size, frames, 0.4 * size as f64, 0.9)
}

/// Axis-aligned square of darkness `ink` with its top-left corner at `(x0, y0)`.
pub fn square(w: usize, h: usize, x0: f64, y0: f64, side: f64, ink: u8) -> Image {
    shape(w, h, ink, |x, y| x >= x0 && x < x0 + side && y >= y0 && y < y0 + side)
}

/// Square fading linearly to white over `frames` frames, next to a static
/// black bar that keeps every frame non-white.
pub fn fading_square(w: usize, h: usize, frames: usize) -> Vec<Image> {
    assert!(frames >= 2);
    let side = w as f64 * 0.4;
    (0..frames)
        .map(|k| {
            let ink = (255.0 * (1.0 - k as f64 / (frames - 1) as f64)).round() as u8;
            Image::from_fn_gray(w, h, |x, y| {
                let (fx, fy) = (x as f64 + 0.5, y as f64 + 0.5);
                if fx >= 0.05 * w as f64 && fx < 0.05 * w as f64 + side && fy >= 0.3 * h as f64 && fy < 0.3 * h as f64 + side {
                    255 - ink
                } else if fx >= 0.7 * w as f64 && fx < 0.9 * w as f64 && fy >= 0.1 * h as f64 && fy < 0.9 * h as f64 {
                    0
                } else {
                    255
                }
            })
        })
        .collect()
}

/// Writes `frame_<index>.pgm` (or `.ppm` for RGB frames) into `dir`.
pub fn write_sequence(dir: &Path, frames: &[Image]) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let digits = frames.len().saturating_sub(1).to_string().len().max(3);
    for (i, img) in frames.iter().enumerate() {
        let ext = match img.channels() {
            crate::raster::Channels::Gray => "pgm",
            crate::raster::Channels::Rgb => "ppm",
        };
        let path = dir.join(format!("frame_{i:0digits$}.{ext}"));
        save_image(img, &path).map_err(|source| Error::Image { path, source })?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::darkness;
    use crate::sampling::global_density;

    #[test]
    fn toy_video_density_shrinks_geometrically() {
        let v = toy_video(128, 10);
        let d: Vec<f64> = v.iter().map(|f| global_density(&darkness(f))).collect();
        for k in 1..d.len() {
            // area ratio 0.81 up to pixelization
            let r = d[k] / d[k - 1];
            assert!((r - 0.81).abs() < 0.05, "frame {k}: {r}");
        }
    }

    #[test]
    fn fading_square_ends_white_with_the_bar_left() {
        let v = fading_square(40, 40, 4);
        assert_eq!(v[0].luma_at(5, 15), 0);
        assert_eq!(v[1].luma_at(5, 15), 85);
        assert_eq!(v[3].luma_at(5, 15), 255);
        assert_eq!(v[3].luma_at(32, 20), 0);
    }
}
