//! Uniform bucket grid over site positions for exact nearest-neighbour queries.

use super::Point;

pub(crate) struct SiteGrid<'a> {
    sites: &'a [Point],
    min_x: f64,
    min_y: f64,
    cell: f64,
    cols: i64,
    rows: i64,
    /// CSR layout: sites of cell `c` are `entries[starts[c]..starts[c + 1]]`, ascending.
    starts: Vec<usize>,
    entries: Vec<u32>,
}

#[inline]
pub(crate) fn dist2(a: Point, b: Point) -> f64 {
    let dx = a.x - b.x;
    let dy = a.y - b.y;
    dx * dx + dy * dy
}

impl<'a> SiteGrid<'a> {
    /// Builds a grid averaging about two sites per cell. `sites` must be non-empty.
    pub(crate) fn new(sites: &'a [Point]) -> Self {
        assert!(!sites.is_empty());
        let (mut min_x, mut min_y) = (f64::INFINITY, f64::INFINITY);
        let (mut max_x, mut max_y) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in sites {
            min_x = min_x.min(p.x);
            min_y = min_y.min(p.y);
            max_x = max_x.max(p.x);
            max_y = max_y.max(p.y);
        }
        let span_x = (max_x - min_x).max(1e-9);
        let span_y = (max_y - min_y).max(1e-9);
        let mut cell = (span_x * span_y * 2.0 / sites.len() as f64).sqrt();
        if !(cell.is_finite() && cell > 0.0) {
            cell = span_x.max(span_y);
        }
        // keep the grid bounded for degenerate (collinear) layouts
        cell = cell.max(span_x.max(span_y) / 2048.0);
        let cols = ((span_x / cell).floor() as i64 + 1).max(1);
        let rows = ((span_y / cell).floor() as i64 + 1).max(1);

        let mut grid = SiteGrid {
            sites,
            min_x,
            min_y,
            cell,
            cols,
            rows,
            starts: Vec::new(),
            entries: Vec::new(),
        };
        let ncell = (cols * rows) as usize;
        let mut counts = vec![0usize; ncell + 1];
        let cell_of: Vec<usize> = sites
            .iter()
            .map(|&p| {
                let (cx, cy) = grid.cell_coords(p);
                (cy.clamp(0, rows - 1) * cols + cx.clamp(0, cols - 1)) as usize
            })
            .collect();
        for &c in &cell_of {
            counts[c + 1] += 1;
        }
        for i in 0..ncell {
            counts[i + 1] += counts[i];
        }
        let mut fill = counts.clone();
        let mut entries = vec![0u32; sites.len()];
        for (i, &c) in cell_of.iter().enumerate() {
            entries[fill[c]] = i as u32;
            fill[c] += 1;
        }
        grid.starts = counts;
        grid.entries = entries;
        grid
    }

    fn cell_coords(&self, p: Point) -> (i64, i64) {
        (
            ((p.x - self.min_x) / self.cell).floor() as i64,
            ((p.y - self.min_y) / self.cell).floor() as i64,
        )
    }

    fn cell_sites(&self, cx: i64, cy: i64) -> &[u32] {
        let c = (cy * self.cols + cx) as usize;
        &self.entries[self.starts[c]..self.starts[c + 1]]
    }

    /// Nearest site to `q`, lowest index on ties, skipping index `exclude`.
    ///
    /// A site in a cell at Chebyshev ring distance `k` from the query cell is
    /// strictly farther than `(k - 1) * cell`, so once rings `< r` are done the
    /// search stops if the best candidate beats `(r - 1) * cell`.
    pub(crate) fn nearest(&self, q: Point, exclude: Option<usize>) -> Option<(usize, f64)> {
        let (qx, qy) = self.cell_coords(q);
        let clamp_x = qx.clamp(0, self.cols - 1);
        let clamp_y = qy.clamp(0, self.rows - 1);
        // first ring that can touch the grid
        let r0 = (qx - clamp_x).abs().max((qy - clamp_y).abs());
        let r_max = [
            qx.abs(),
            (qx - (self.cols - 1)).abs(),
            qy.abs(),
            (qy - (self.rows - 1)).abs(),
        ]
        .into_iter()
        .max()
        .unwrap();

        let mut best: Option<(usize, f64)> = None;
        let consider = |i: usize, best: &mut Option<(usize, f64)>| {
            if Some(i) == exclude {
                return;
            }
            let d = dist2(q, self.sites[i]);
            match *best {
                Some((bi, bd)) if d > bd || (d == bd && i > bi) => {}
                _ => *best = Some((i, d)),
            }
        };

        for r in r0..=r_max {
            if let Some((_, bd)) = best {
                let bound = (r - 1) as f64 * self.cell;
                if r > 1 && bd < bound * bound * (1.0 - 1e-9) {
                    break;
                }
            }
            let y_lo = (qy - r).max(0);
            let y_hi = (qy + r).min(self.rows - 1);
            for cy in y_lo..=y_hi {
                if (cy - qy).abs() == r {
                    let x_lo = (qx - r).max(0);
                    let x_hi = (qx + r).min(self.cols - 1);
                    for cx in x_lo..=x_hi {
                        for &i in self.cell_sites(cx, cy) {
                            consider(i as usize, &mut best);
                        }
                    }
                } else {
                    for cx in [qx - r, qx + r] {
                        if (0..self.cols).contains(&cx) {
                            for &i in self.cell_sites(cx, cy) {
                                consider(i as usize, &mut best);
                            }
                        }
                    }
                }
            }
        }
        best
    }
}

/// Distance from every site to its nearest other site (infinite for a lone site).
pub fn nearest_neighbor_distances(sites: &[Point]) -> Vec<f64> {
    if sites.is_empty() {
        return Vec::new();
    }
    let grid = SiteGrid::new(sites);
    sites
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            grid.nearest(p, Some(i))
                .map_or(f64::INFINITY, |(_, d2)| d2.sqrt())
        })
        .collect()
}

pub fn min_pairwise_distance(sites: &[Point]) -> f64 {
    nearest_neighbor_distances(sites)
        .into_iter()
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn nn_distances_match_pairwise_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in [2usize, 3, 17, 200] {
            let pts: Vec<Point> = (0..n)
                .map(|_| Point::new(rng.random_range(0.0..50.0), rng.random_range(0.0..20.0)))
                .collect();
            let fast = nearest_neighbor_distances(&pts);
            for i in 0..n {
                let slow = (0..n)
                    .filter(|&j| j != i)
                    .map(|j| dist2(pts[i], pts[j]).sqrt())
                    .fold(f64::INFINITY, f64::min);
                assert_eq!(fast[i], slow);
            }
        }
    }

    #[test]
    fn collinear_and_coincident_sites() {
        let pts = vec![Point::new(1.0, 1.0); 4];
        assert_eq!(min_pairwise_distance(&pts), 0.0);
        let line: Vec<Point> = (0..10).map(|i| Point::new(i as f64 * 3.0, 2.0)).collect();
        assert_eq!(min_pairwise_distance(&line), 3.0);
        assert_eq!(nearest_neighbor_distances(&[Point::new(0.0, 0.0)]), vec![f64::INFINITY]);
    }
}
