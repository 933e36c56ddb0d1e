//! Discrete centroidal Voronoi tessellation over a support point set.
//!
//! Sites are relaxed with Lloyd's method: assign every support point to its
//! nearest site, then move every site to the unweighted mean of its members.

mod grid;

pub use grid::{min_pairwise_distance, nearest_neighbor_distances};

use rayon::prelude::*;
use thiserror::Error;

use grid::{dist2, SiteGrid};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        dist2(self, other).sqrt()
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CvtError {
    #[error("cannot assign support points to an empty site list")]
    NoSites,
    #[error("poisson disk radius needs at least two sites, got {0}")]
    TooFewSites(usize),
}

/// Nearest-site search strategy. Both produce identical assignments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Backend {
    /// Exhaustive O(points x sites) scan.
    BruteForce,
    /// Uniform bucket grid with exact ring search.
    #[default]
    Grid,
}

/// Owner site index for every support point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    owner: Vec<u32>,
    counts: Vec<usize>,
}

impl Assignment {
    pub fn owner(&self, point: usize) -> usize {
        self.owner[point] as usize
    }

    pub fn owners(&self) -> impl Iterator<Item = usize> + '_ {
        self.owner.iter().map(|&o| o as usize)
    }

    pub fn site_count(&self) -> usize {
        self.counts.len()
    }

    /// Number of support points owned by each site.
    pub fn member_counts(&self) -> &[usize] {
        &self.counts
    }

    /// Member point indices per site, ascending.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut lists: Vec<Vec<usize>> =
            self.counts.iter().map(|&c| Vec::with_capacity(c)).collect();
        for (i, &o) in self.owner.iter().enumerate() {
            lists[o as usize].push(i);
        }
        lists
    }
}

fn brute_nearest(q: Point, sites: &[Point]) -> usize {
    let mut best = 0usize;
    let mut best_d = dist2(q, sites[0]);
    for (j, &s) in sites.iter().enumerate().skip(1) {
        let d = dist2(q, s);
        if d < best_d {
            best_d = d;
            best = j;
        }
    }
    best
}

/// Maps every support point to its nearest site; ties go to the lowest index.
pub fn assign(support: &[Point], sites: &[Point], backend: Backend) -> Result<Assignment, CvtError> {
    if sites.is_empty() {
        return Err(CvtError::NoSites);
    }
    let owner: Vec<u32> = match backend {
        Backend::BruteForce => support
            .par_iter()
            .map(|&q| brute_nearest(q, sites) as u32)
            .collect(),
        Backend::Grid => {
            let grid = SiteGrid::new(sites);
            support
                .par_iter()
                .map(|&q| grid.nearest(q, None).expect("non-empty grid").0 as u32)
                .collect()
        }
    };
    let mut counts = vec![0usize; sites.len()];
    for &o in &owner {
        counts[o as usize] += 1;
    }
    Ok(Assignment { owner, counts })
}

/// Result of one centroid relocation.
#[derive(Debug, Clone, PartialEq)]
pub struct Relocation {
    pub positions: Vec<Point>,
    /// Sites whose region held no support point; they keep their position.
    pub empty: Vec<bool>,
}

impl Relocation {
    pub fn displacement_from(&self, old: &[Point]) -> f64 {
        self.positions
            .iter()
            .zip(old)
            .map(|(&a, &b)| a.distance(b))
            .sum()
    }
}

/// Moves each site to the arithmetic mean of its members.
pub fn relocate(assignment: &Assignment, support: &[Point], sites: &[Point]) -> Relocation {
    assert_eq!(assignment.site_count(), sites.len());
    let mut sums = vec![(0.0f64, 0.0f64); sites.len()];
    for (p, o) in support.iter().zip(assignment.owners()) {
        sums[o].0 += p.x;
        sums[o].1 += p.y;
    }
    let mut positions = Vec::with_capacity(sites.len());
    let mut empty = Vec::with_capacity(sites.len());
    for (i, &(sx, sy)) in sums.iter().enumerate() {
        let n = assignment.counts[i];
        if n == 0 {
            positions.push(sites[i]);
            empty.push(true);
        } else {
            positions.push(Point::new(sx / n as f64, sy / n as f64));
            empty.push(false);
        }
    }
    Relocation { positions, empty }
}

/// Quantization energy: sum of squared distances from points to their owners.
pub fn energy(assignment: &Assignment, support: &[Point], sites: &[Point]) -> f64 {
    support
        .iter()
        .zip(assignment.owners())
        .map(|(&p, o)| dist2(p, sites[o]))
        .sum()
}

/// Normalized Poisson disk radius in `[0, 1]`.
///
/// Half the minimum pairwise distance divided by the packing radius of `n`
/// points on a hexagonal lattice covering the same area.
pub fn poisson_disk_radius(sites: &[Point], width: f64, height: f64) -> Result<f64, CvtError> {
    if sites.len() < 2 {
        return Err(CvtError::TooFewSites(sites.len()));
    }
    let r_max = (width * height / (2.0 * 3f64.sqrt() * sites.len() as f64)).sqrt();
    let r = min_pairwise_distance(sites) / 2.0 / r_max;
    Ok(r.clamp(0.0, 1.0))
}

/// Termination knobs for [`lloyd`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LloydParams {
    /// Stop once the summed site displacement of an iteration drops below this (pixels).
    pub threshold: f64,
    pub max_iter: usize,
    /// Stop once the Poisson radius varied by at most `.1` over the last `.0` iterations.
    pub radius_window: Option<(usize, f64)>,
    /// Domain used to normalize the Poisson radius.
    pub domain: (f64, f64),
    pub backend: Backend,
}

impl LloydParams {
    pub fn new(threshold: f64, max_iter: usize, domain: (f64, f64)) -> Self {
        assert!(threshold > 0.0 && max_iter >= 1);
        LloydParams {
            threshold,
            max_iter,
            radius_window: None,
            domain,
            backend: Backend::Grid,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LloydStats {
    pub iterations: usize,
    /// Summed site displacement, one entry per iteration.
    pub displacement: Vec<f64>,
    /// Energy of the assignment computed at the start of each iteration.
    pub energy: Vec<f64>,
    pub poisson_radius: Option<f64>,
    /// Sites that were empty at the last relocation.
    pub empty: Vec<bool>,
}

/// Alternates assignment and relocation until a stopping rule fires.
pub fn lloyd(
    support: &[Point],
    sites: &[Point],
    params: &LloydParams,
) -> Result<(Vec<Point>, LloydStats), CvtError> {
    let mut current = sites.to_vec();
    let mut stats = LloydStats::default();
    let mut radii: Vec<f64> = Vec::new();
    let (w, h) = params.domain;
    for _ in 0..params.max_iter {
        let a = assign(support, &current, params.backend)?;
        stats.energy.push(energy(&a, support, &current));
        let moved = relocate(&a, support, &current);
        let disp = moved.displacement_from(&current);
        current = moved.positions;
        stats.empty = moved.empty;
        stats.iterations += 1;
        stats.displacement.push(disp);
        if disp < params.threshold {
            break;
        }
        if let Some((window, tol)) = params.radius_window {
            if current.len() >= 2 {
                radii.push(poisson_disk_radius(&current, w, h)?);
                if radii.len() >= window {
                    let tail = &radii[radii.len() - window..];
                    let hi = tail.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                    let lo = tail.iter().cloned().fold(f64::INFINITY, f64::min);
                    if hi - lo <= tol {
                        break;
                    }
                }
            }
        }
    }
    if current.len() >= 2 {
        stats.poisson_radius = Some(poisson_disk_radius(&current, w, h)?);
    }
    Ok((current, stats))
}
