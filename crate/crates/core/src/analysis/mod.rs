//! Point-distribution analysis: radially averaged periodograms and rank statistics.

pub mod bench;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::cvt::Point;
use crate::error::{Error, Result};

/// Side of the periodogram grid.
pub const GRID: usize = 256;
pub const DEFAULT_BINS: usize = 64;
const MIN_POINTS: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct RadialSpectrum {
    /// Outer radius of each annulus, in cycles per domain.
    pub radii: Vec<f64>,
    /// Mean normalized power per annulus.
    pub power: Vec<f64>,
}

impl RadialSpectrum {
    /// Annulus holding the highest mean power.
    pub fn peak(&self) -> usize {
        let mut best = 0;
        for (i, &p) in self.power.iter().enumerate() {
            if p > self.power[best] {
                best = i;
            }
        }
        best
    }

    pub fn mean(&self) -> f64 {
        self.power.iter().sum::<f64>() / self.power.len() as f64
    }

    /// Mean power of the lowest `fraction` of annuli (at least one).
    pub fn low_band_mean(&self, fraction: f64) -> f64 {
        let k = ((self.power.len() as f64 * fraction).round() as usize).max(1);
        self.power[..k].iter().sum::<f64>() / k as f64
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("annulus,radius,power\n");
        for (i, (r, p)) in self.radii.iter().zip(&self.power).enumerate() {
            s.push_str(&format!("{i},{r},{p}\n"));
        }
        s
    }
}

/// Periodogram of the point measure binned on a `GRID x GRID` torus over the
/// domain, radially averaged into `bins` annuli covering `(0, GRID/2]`. DC is
/// excluded and power is divided by the point count, so a Poisson process has
/// an expected flat profile near 1.
pub fn radial_spectrum(points: &[Point], domain: (f64, f64), bins: usize) -> Result<RadialSpectrum> {
    if points.len() < MIN_POINTS {
        return Err(Error::TooFewPoints(points.len()));
    }
    assert!(bins >= 1 && domain.0 > 0.0 && domain.1 > 0.0);
    let g = GRID;
    let mut field = vec![Complex::new(0.0f64, 0.0); g * g];
    for p in points {
        let cx = ((p.x / domain.0 * g as f64).floor() as i64).rem_euclid(g as i64) as usize;
        let cy = ((p.y / domain.1 * g as f64).floor() as i64).rem_euclid(g as i64) as usize;
        field[cy * g + cx].re += 1.0;
    }

    let fft = FftPlanner::new().plan_fft_forward(g);
    for row in field.chunks_exact_mut(g) {
        fft.process(row);
    }
    let mut col = vec![Complex::new(0.0, 0.0); g];
    for x in 0..g {
        for y in 0..g {
            col[y] = field[y * g + x];
        }
        fft.process(&mut col);
        for y in 0..g {
            field[y * g + x] = col[y];
        }
    }

    let n = points.len() as f64;
    let half = (g / 2) as f64;
    let mut sums = vec![0.0f64; bins];
    let mut counts = vec![0usize; bins];
    for ky in 0..g {
        let fy = if ky < g / 2 { ky as f64 } else { ky as f64 - g as f64 };
        for kx in 0..g {
            let fx = if kx < g / 2 { kx as f64 } else { kx as f64 - g as f64 };
            let r = (fx * fx + fy * fy).sqrt();
            if r == 0.0 || r > half {
                continue;
            }
            let b = ((r / half * bins as f64).ceil() as usize).clamp(1, bins) - 1;
            sums[b] += field[ky * g + kx].norm_sqr() / n;
            counts[b] += 1;
        }
    }
    let power = sums
        .iter()
        .zip(&counts)
        .map(|(&s, &c)| if c > 0 { s / c as f64 } else { 0.0 })
        .collect();
    let radii = (1..=bins).map(|i| i as f64 * half / bins as f64).collect();
    Ok(RadialSpectrum { radii, power })
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut r = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        // ties share their mean rank
        let mean = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            r[k] = mean;
        }
        i = j + 1;
    }
    r
}

/// Spearman rank correlation (Pearson on average ranks).
pub fn spearman(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    assert!(a.len() >= 2);
    let (ra, rb) = (ranks(a), ranks(b));
    let n = a.len() as f64;
    let ma = ra.iter().sum::<f64>() / n;
    let mb = rb.iter().sum::<f64>() / n;
    let (mut cov, mut va, mut vb) = (0.0, 0.0, 0.0);
    for (x, y) in ra.iter().zip(&rb) {
        cov += (x - ma) * (y - mb);
        va += (x - ma) * (x - ma);
        vb += (y - mb) * (y - mb);
    }
    cov / (va * vb).sqrt()
}
