//! Back-of-envelope size estimates for a stippled shot.

use std::io::Write;

use flate2::write::DeflateEncoder;
use flate2::Compression;

use super::StippleDocument;

/// Compressed bytes per frame per 1000 live sites.
pub const BYTES_PER_FRAME_PER_1000_SITES: f64 = 200.0;

/// Distinct sites over a shot: the initial population plus every frame's
/// additions, each converted to sites at the initial site/density ratio.
pub fn estimate_total_sites(n_initial: usize, d_initial: f64, diff_densities: &[f64]) -> u64 {
    assert!(d_initial > 0.0, "initial density must be positive");
    let ratio = n_initial as f64 / d_initial;
    let added: f64 = diff_densities.iter().map(|d| d * ratio).sum();
    (n_initial as f64 + added).round() as u64
}

/// Compressed size in bytes for `frames` frames averaging `mean_live_sites`.
pub fn estimate_file_size(frames: u64, mean_live_sites: f64) -> f64 {
    BYTES_PER_FRAME_PER_1000_SITES * frames as f64 * mean_live_sites / 1000.0
}

pub fn estimate_document_size(doc: &StippleDocument) -> f64 {
    estimate_file_size(doc.frame_count, doc.mean_live_sites())
}

/// Raw deflate stream length at the default level (the ZIP payload size).
pub fn deflated_size(bytes: &[u8]) -> usize {
    let mut enc = DeflateEncoder::new(Vec::new(), Compression::default());
    enc.write_all(bytes).expect("in-memory write");
    enc.finish().expect("in-memory write").len()
}
