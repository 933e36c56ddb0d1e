//! Timing harness over the shrinking-disk toy video.
//!
//! Each site count is run forward (shrinking disk) and reversed (growing disk).
//! Reversed runs scale the first-frame site count so the largest frame holds
//! the requested count, making both directions visit the same budgets.

use std::time::Instant;

use crate::config::StippleConfig;
use crate::cvt::Backend;
use crate::error::Result;
use crate::raster::{darkness, Image};
use crate::sampling::global_density;
use crate::synth;
use crate::temporal::{advance_frame, stipple_first_frame};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Reversed,
}

impl Direction {
    pub fn label(self) -> &'static str {
        match self {
            Direction::Forward => "forward",
            Direction::Reversed => "reversed",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub n_sites: usize,
    pub direction: Direction,
    pub frame: usize,
    pub live_sites: usize,
    pub lloyd_iterations: usize,
    pub seconds: f64,
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub site_counts: Vec<usize>,
    pub size: usize,
    pub frames: usize,
    pub backend: Backend,
    pub alpha: usize,
    pub seed: u64,
    pub directions: Vec<Direction>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            site_counts: vec![1000, 2000],
            size: 128,
            frames: 10,
            backend: Backend::BruteForce,
            alpha: 10,
            seed: 0,
            directions: vec![Direction::Forward, Direction::Reversed],
        }
    }
}

/// Times one direction of the video; one row per frame.
pub fn time_sequence(frames: &[Image], cfg: &StippleConfig, direction: Direction, n_sites: usize) -> Result<Vec<BenchRow>> {
    let mut rows = Vec::with_capacity(frames.len());
    let start = Instant::now();
    let (mut state, report) = stipple_first_frame(&frames[0], cfg)?;
    rows.push(BenchRow {
        n_sites,
        direction,
        frame: 0,
        live_sites: state.site_count(),
        lloyd_iterations: report.tone.lloyd.iterations,
        seconds: start.elapsed().as_secs_f64(),
    });
    for (k, img) in frames.iter().enumerate().skip(1) {
        let start = Instant::now();
        let (next, report) = advance_frame(&state, img, cfg)?;
        rows.push(BenchRow {
            n_sites,
            direction,
            frame: k,
            live_sites: next.site_count(),
            lloyd_iterations: report.tone.lloyd.iterations,
            seconds: start.elapsed().as_secs_f64(),
        });
        state = next;
    }
    Ok(rows)
}

pub fn bench_pipeline(bench: &BenchConfig) -> Result<Vec<BenchRow>> {
    let forward = synth::toy_video(bench.size, bench.frames);
    let densities: Vec<f64> = forward.iter().map(|f| global_density(&darkness(f))).collect();
    let mut rows = Vec::new();
    for &n in &bench.site_counts {
        for &dir in &bench.directions {
            let mut cfg = StippleConfig::with_sites(n);
            cfg.alpha = bench.alpha;
            cfg.seed = bench.seed;
            cfg.backend = bench.backend;
            let frames: Vec<Image> = match dir {
                Direction::Forward => forward.clone(),
                Direction::Reversed => {
                    let smallest = *densities.last().expect("non-empty video");
                    cfg.n_sites = ((n as f64 * smallest / densities[0]).round() as usize).max(1);
                    forward.iter().rev().cloned().collect()
                }
            };
            rows.extend(time_sequence(&frames, &cfg, dir, n)?);
        }
    }
    Ok(rows)
}

pub fn total_seconds(rows: &[BenchRow], n_sites: usize, direction: Direction) -> f64 {
    rows.iter()
        .filter(|r| r.n_sites == n_sites && r.direction == direction)
        .map(|r| r.seconds)
        .sum()
}

pub fn to_csv(rows: &[BenchRow]) -> String {
    let mut s = String::from("n_sites,direction,frame,live_sites,lloyd_iterations,seconds\n");
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{},{},{:.6}\n",
            r.n_sites,
            r.direction.label(),
            r.frame,
            r.live_sites,
            r.lloyd_iterations,
            r.seconds
        ));
    }
    s
}
