//! Temporal interpolation of a document and offline rasterization.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::attributes::{kind_size, pattern_length};
use crate::cvt::{nearest_neighbor_distances, Point};
use crate::error::{Error, Result};
use crate::format::{Sample, SiteTrack, StippleDocument};
use crate::raster::{luma, Channels, Image, Rgb};
use crate::sampling::SiteKind;

/// A site as drawn at some time position.
#[derive(Debug, Clone, PartialEq)]
pub struct RenderPoint {
    pub id: u64,
    pub kind: SiteKind,
    pub x: f64,
    pub y: f64,
    pub color: Rgb,
    /// Blended darkness before rounding.
    pub darkness: f64,
    /// Radius in source pixels.
    pub size: f64,
    pub orientation: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct InterpolateOptions {
    /// Fade sites in over the frame before their birth and out over the frame
    /// after their death instead of popping at integer frames.
    pub soft_birth: bool,
}

fn lerp(a: f64, b: f64, w: f64) -> f64 {
    a * (1.0 - w) + b * w
}

fn fold_angle(mut t: f64) -> f64 {
    while t <= -FRAC_PI_2 {
        t += PI;
    }
    while t > FRAC_PI_2 {
        t -= PI;
    }
    t
}

/// Angle blend modulo pi (segments are undirected).
fn blend_angle(a: Option<f64>, b: Option<f64>, w: f64) -> Option<f64> {
    match (a, b) {
        (Some(a), Some(b)) => {
            let d = fold_angle(b - a);
            Some(fold_angle(a + w * d))
        }
        (Some(a), None) if w < 0.5 => Some(a),
        (None, Some(b)) if w >= 0.5 => Some(b),
        _ => None,
    }
}

fn darkness_of(c: Rgb) -> f64 {
    (255 - luma(c)) as f64
}

fn point_from(track: &SiteTrack, s: &Sample, contrast: f64, size_scale: f64) -> RenderPoint {
    let darkness = darkness_of(s.color);
    RenderPoint {
        id: track.id,
        kind: track.kind,
        x: s.x,
        y: s.y,
        color: s.color,
        darkness,
        size: kind_size(track.kind, darkness, contrast) * size_scale,
        orientation: s.orientation,
    }
}

/// Sites visible at frame position `t`, linearly blended between the two
/// neighbouring stored frames.
pub fn interpolate(doc: &StippleDocument, t: f64, contrast: f64, opts: InterpolateOptions) -> Result<Vec<RenderPoint>> {
    let last = doc.frame_count as f64 - 1.0;
    if !(t >= 0.0 && t <= last) {
        return Err(Error::FrameOutOfRange { t, last });
    }
    let f0 = t.floor() as u64;
    let w = t - f0 as f64;
    let f1 = if w > 0.0 { f0 + 1 } else { f0 };

    let mut out = Vec::new();
    for track in &doc.tracks {
        match (track.sample_at(f0), track.sample_at(f1)) {
            (Some(a), Some(b)) => {
                let color = [0, 1, 2].map(|c| lerp(a.color[c] as f64, b.color[c] as f64, w).round() as u8);
                let darkness = lerp(darkness_of(a.color), darkness_of(b.color), w);
                out.push(RenderPoint {
                    id: track.id,
                    kind: track.kind,
                    x: lerp(a.x, b.x, w),
                    y: lerp(a.y, b.y, w),
                    color,
                    darkness,
                    size: kind_size(track.kind, darkness, contrast),
                    orientation: blend_angle(a.orientation, b.orientation, w),
                });
            }
            (Some(a), None) if opts.soft_birth => out.push(point_from(track, a, contrast, 1.0 - w)),
            (None, Some(b)) if opts.soft_birth => out.push(point_from(track, b, contrast, w)),
            _ => {}
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ColorMode {
    #[default]
    Color,
    Grayscale,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RasterOptions {
    pub mode: ColorMode,
    /// Draw oriented sites as segments instead of dots.
    pub patterns: bool,
}

/// Pixel footprint of a shape: calls `hit` for every covered pixel centre.
fn cover(w: usize, h: usize, lo: Point, hi: Point, inside: impl Fn(f64, f64) -> bool, mut hit: impl FnMut(usize, usize)) {
    let x0 = (lo.x - 0.5).ceil().max(0.0) as usize;
    let y0 = (lo.y - 0.5).ceil().max(0.0) as usize;
    let x1 = ((hi.x - 0.5).floor().min(w as f64 - 1.0)).max(-1.0);
    let y1 = ((hi.y - 0.5).floor().min(h as f64 - 1.0)).max(-1.0);
    if x1 < 0.0 || y1 < 0.0 {
        return;
    }
    for py in y0..=y1 as usize {
        for px in x0..=x1 as usize {
            if inside(px as f64 + 0.5, py as f64 + 0.5) {
                hit(px, py);
            }
        }
    }
}

/// Draws points on a white canvas of `round(width * scale) x round(height * scale)`.
///
/// Dots cover pixel centres within `size * scale` of the scaled position.
/// With patterns enabled, oriented points become capsules of width `size` and
/// length `4 * size`, shortened to 0.9 of the distance to the nearest oriented
/// neighbour, running along `(cos theta, -sin theta)`.
pub fn rasterize(points: &[RenderPoint], width: usize, height: usize, scale: f64, opts: RasterOptions) -> Image {
    assert!(scale > 0.0, "scale must be positive");
    let w = ((width as f64 * scale).round() as usize).max(1);
    let h = ((height as f64 * scale).round() as usize).max(1);
    let channels = match opts.mode {
        ColorMode::Color => Channels::Rgb,
        ColorMode::Grayscale => Channels::Gray,
    };
    let mut img = match channels {
        Channels::Rgb => Image::filled_rgb(w, h, [255, 255, 255]),
        Channels::Gray => Image::filled_gray(w, h, 255),
    };

    let oriented: Vec<usize> = if opts.patterns {
        (0..points.len()).filter(|&i| points[i].orientation.is_some()).collect()
    } else {
        Vec::new()
    };
    let neighbour = nearest_neighbor_distances(
        &oriented.iter().map(|&i| Point::new(points[i].x, points[i].y)).collect::<Vec<_>>(),
    );
    let mut segment_len = vec![None; points.len()];
    for (k, &i) in oriented.iter().enumerate() {
        segment_len[i] = Some(pattern_length(points[i].size, neighbour[k]));
    }

    for (i, p) in points.iter().enumerate() {
        if p.size <= 0.0 {
            continue;
        }
        let ink = match opts.mode {
            ColorMode::Color => p.color,
            ColorMode::Grayscale => [luma(p.color); 3],
        };
        let c = Point::new(p.x * scale, p.y * scale);
        let mut paint = |x: usize, y: usize| img.set_rgb(x, y, ink);
        match (segment_len[i], p.orientation) {
            (Some(len), Some(theta)) => {
                let half = len * scale / 2.0;
                let r = p.size * scale / 2.0;
                let (dx, dy) = (theta.cos(), -theta.sin());
                let a = Point::new(c.x - dx * half, c.y - dy * half);
                let b = Point::new(c.x + dx * half, c.y + dy * half);
                let lo = Point::new(a.x.min(b.x) - r, a.y.min(b.y) - r);
                let hi = Point::new(a.x.max(b.x) + r, a.y.max(b.y) + r);
                cover(w, h, lo, hi, |x, y| segment_distance(Point::new(x, y), a, b) <= r, &mut paint);
            }
            _ => {
                let r = p.size * scale;
                let lo = Point::new(c.x - r, c.y - r);
                let hi = Point::new(c.x + r, c.y + r);
                cover(w, h, lo, hi, |x, y| (x - c.x).powi(2) + (y - c.y).powi(2) <= r * r, &mut paint);
            }
        }
    }
    img
}

fn segment_distance(q: Point, a: Point, b: Point) -> f64 {
    let (abx, aby) = (b.x - a.x, b.y - a.y);
    let len2 = abx * abx + aby * aby;
    let t = if len2 > 0.0 {
        (((q.x - a.x) * abx + (q.y - a.y) * aby) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    q.distance(Point::new(a.x + t * abx, a.y + t * aby))
}

/// Renders stored frame `frame` at `scale`.
pub fn render_frame(doc: &StippleDocument, frame: f64, contrast: f64, scale: f64, opts: RasterOptions) -> Result<Image> {
    let pts = interpolate(doc, frame, contrast, InterpolateOptions::default())?;
    Ok(rasterize(&pts, doc.width, doc.height, scale, opts))
}
