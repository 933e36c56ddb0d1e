//! Frame-to-frame evolution of the stipple set.
//!
//! A frame is derived from the previous one by deleting support points and sites
//! where the image got lighter, adding them where it got darker, and relaxing
//! the result. Surviving sites keep their ids, which is what makes the output
//! temporally coherent.

pub mod checkpoint;

use rand::seq::index;
use rand::Rng;

use crate::attributes::{self, primary_color_quantize};
use crate::config::StippleConfig;
use crate::cvt::{lloyd, relocate, assign, LloydStats, Point};
use crate::error::{Error, Result};
use crate::raster::{darkness, diff_fading, diff_simple, sobel, DensityMap, FrameDiff, GradientField, Image};
use crate::rng::{site_stream, stream, Layer, Purpose};
use crate::sampling::{global_density, rejection_sample, Budget, PixelPoint, Site, SiteKind};

/// Pixel under a continuous position.
pub fn nearest_pixel(pos: Point, width: usize, height: usize) -> (usize, usize) {
    let x = (pos.x.floor().max(0.0) as usize).min(width - 1);
    let y = (pos.y.floor().max(0.0) as usize).min(height - 1);
    (x, y)
}

fn pixel_center(p: PixelPoint) -> Point {
    Point::new(p.x as f64 + 0.5, p.y as f64 + 0.5)
}

fn rng_layer(kind: SiteKind) -> Layer {
    match kind {
        SiteKind::Tone => Layer::Tone,
        SiteKind::Frequency => Layer::Frequency,
    }
}

/// Each point dies independently with probability `removal / 255` at its pixel.
pub fn suppress<R: Rng + ?Sized>(points: &[PixelPoint], removal: &DensityMap, rng: &mut R) -> Vec<PixelPoint> {
    points
        .iter()
        .copied()
        .filter(|p| !dies(removal.get(p.x as usize, p.y as usize), rng))
        .collect()
}

fn dies<R: Rng + ?Sized>(removal: u8, rng: &mut R) -> bool {
    rng.random_range(0..255u32) < removal as u32
}

/// One population of points (tone or frequency) with its own density and budget.
#[derive(Debug, Clone, PartialEq)]
pub struct PointLayer {
    pub kind: SiteKind,
    pub budget: Budget,
    pub d_now: f64,
    /// Density of the frame this layer was last fitted to.
    pub density: DensityMap,
    pub support: Vec<PixelPoint>,
    pub sites: Vec<Site>,
}

/// What happened to a layer during one frame.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LayerReport {
    pub births: usize,
    pub deaths: usize,
    pub target_sites: usize,
    pub lloyd: LloydStats,
}

impl PointLayer {
    /// Samples `count` sites and `count * alpha` support points from `density`
    /// and relaxes them; the layer's budget is anchored to this frame.
    pub fn initialize(
        kind: SiteKind,
        density: DensityMap,
        count: usize,
        cfg: &StippleConfig,
        frame: u64,
        next_id: &mut u64,
    ) -> Result<(Self, LloydStats)> {
        assert!(count >= 1, "a layer needs at least one site");
        let d = global_density(&density);
        if d == 0.0 {
            return Err(match kind {
                SiteKind::Tone => Error::AllWhite,
                SiteKind::Frequency => Error::ZeroFrequencyMass(count),
            });
        }
        let layer = rng_layer(kind);
        let budget = Budget::new(count, d, cfg.alpha);
        let support = rejection_sample(
            &density,
            count * cfg.alpha,
            &mut stream(cfg.seed, frame, layer, Purpose::SupportInit, 0),
        )?;
        let seeds = rejection_sample(&density, count, &mut stream(cfg.seed, frame, layer, Purpose::SiteInit, 0))?;
        let mut jitter = stream(cfg.seed, frame, layer, Purpose::SiteJitter, 0);
        let sites = seeds
            .into_iter()
            .map(|p| {
                let pos = Point::new(p.x as f64 + jitter.random::<f64>(), p.y as f64 + jitter.random::<f64>());
                let id = *next_id;
                *next_id += 1;
                Site {
                    id,
                    kind,
                    pos,
                    color: [0, 0, 0],
                    orientation: None,
                }
            })
            .collect();
        let mut layer = PointLayer {
            kind,
            budget,
            d_now: d,
            density,
            support,
            sites,
        };
        let stats = layer.relax(cfg)?;
        Ok((layer, stats))
    }

    pub fn width(&self) -> usize {
        self.density.width()
    }

    pub fn height(&self) -> usize {
        self.density.height()
    }

    fn support_centers(&self) -> Vec<Point> {
        self.support.iter().map(|&p| pixel_center(p)).collect()
    }

    fn positions(&self) -> Vec<Point> {
        self.sites.iter().map(|s| s.pos).collect()
    }

    /// Lloyd to convergence.
    fn relax(&mut self, cfg: &StippleConfig) -> Result<LloydStats> {
        if self.sites.is_empty() {
            return Ok(LloydStats::default());
        }
        let params = cfg.convergence.lloyd_params(
            self.sites.len(),
            (self.width() as f64, self.height() as f64),
            cfg.backend,
        );
        let (moved, stats) = lloyd(&self.support_centers(), &self.positions(), &params)?;
        for (s, p) in self.sites.iter_mut().zip(moved) {
            s.pos = p;
        }
        Ok(stats)
    }

    /// One assignment and relocation; returns which sites had an empty region.
    fn relocate_once(&mut self, cfg: &StippleConfig) -> Result<Vec<bool>> {
        if self.sites.is_empty() {
            return Ok(Vec::new());
        }
        let support = self.support_centers();
        let sites = self.positions();
        let a = assign(&support, &sites, cfg.backend)?;
        let moved = relocate(&a, &support, &sites);
        for (s, p) in self.sites.iter_mut().zip(moved.positions) {
            s.pos = p;
        }
        Ok(moved.empty)
    }

    /// Moves the layer to the next frame's density.
    pub fn advance(
        &mut self,
        next: DensityMap,
        cfg: &StippleConfig,
        frame: u64,
        next_id: &mut u64,
    ) -> Result<LayerReport> {
        let diff = if cfg.fading {
            diff_fading(&self.density, &next)?
        } else {
            diff_simple(&self.density, &next)?
        };
        let changed = !diff.removal.is_empty_mass() || !diff.addition.is_empty_mass();
        let d_now = global_density(&next);
        let (n_target, s_target) = self.budget.required_counts(d_now);
        let mut site_supply = self.budget.sites_for(global_density(&diff.addition));
        let mut support_supply = site_supply * self.budget.alpha;

        let layer = rng_layer(self.kind);
        let (w, h) = (self.width(), self.height());
        let mut report = LayerReport {
            target_sites: n_target,
            ..Default::default()
        };
        // pixel each site was last tested against; None until first tested
        let mut tested: Vec<Option<(usize, usize)>> = vec![None; self.sites.len()];
        let mut empty: Vec<bool> = Vec::new();

        for pass in 0..cfg.correction_passes.max(1) {
            let p8 = pass as u8;
            if pass == 0 {
                let mut rng = stream(cfg.seed, frame, layer, Purpose::SupportSuppress, 0);
                self.support = suppress(&self.support, &diff.removal, &mut rng);
            }

            // site suppression against the pixel each site now stands on
            let mut rng = stream(cfg.seed, frame, layer, Purpose::SiteSuppress, p8);
            let mut keep = Vec::with_capacity(self.sites.len());
            for (i, s) in self.sites.iter().enumerate() {
                let px = nearest_pixel(s.pos, w, h);
                let mut alive = true;
                if tested[i] != Some(px) {
                    alive = !dies(diff.removal.get(px.0, px.1), &mut rng);
                }
                if alive && pass > 0 && changed && empty.get(i).copied().unwrap_or(false) {
                    alive = false;
                }
                keep.push((alive, px));
            }
            let mut kept_tested = Vec::with_capacity(keep.len());
            let mut idx = 0;
            self.sites.retain(|_| {
                let (alive, px) = keep[idx];
                idx += 1;
                if alive {
                    kept_tested.push(Some(px));
                }
                alive
            });
            report.deaths += keep.len() - self.sites.len();
            tested = kept_tested;

            // trim excess uniformly
            if self.sites.len() > n_target {
                let mut rng = stream(cfg.seed, frame, layer, Purpose::SiteTrim, p8);
                let drop = index::sample(&mut rng, self.sites.len(), self.sites.len() - n_target);
                let mut gone = vec![false; self.sites.len()];
                for i in drop.iter() {
                    gone[i] = true;
                }
                let mut i = 0;
                self.sites.retain(|_| {
                    i += 1;
                    !gone[i - 1]
                });
                let mut j = 0;
                tested.retain(|_| {
                    j += 1;
                    !gone[j - 1]
                });
                report.deaths += gone.iter().filter(|&&g| g).count();
            }
            if self.support.len() > s_target {
                let mut rng = stream(cfg.seed, frame, layer, Purpose::SupportTrim, p8);
                let drop = index::sample(&mut rng, self.support.len(), self.support.len() - s_target);
                let mut gone = vec![false; self.support.len()];
                for i in drop.iter() {
                    gone[i] = true;
                }
                let mut i = 0;
                self.support.retain(|_| {
                    i += 1;
                    !gone[i - 1]
                });
            }

            // additions: from the addition map while it has supply, then from the frame
            let missing = n_target.saturating_sub(self.sites.len());
            if missing > 0 {
                let mut rng = stream(cfg.seed, frame, layer, Purpose::SiteAdd, p8);
                let born = draw_additions(&diff, &next, missing, &mut site_supply, &mut rng)?;
                let mut jitter = stream(cfg.seed, frame, layer, Purpose::SiteJitter, p8);
                for p in born {
                    let pos = Point::new(p.x as f64 + jitter.random::<f64>(), p.y as f64 + jitter.random::<f64>());
                    self.sites.push(Site {
                        id: *next_id,
                        kind: self.kind,
                        pos,
                        color: [0, 0, 0],
                        orientation: None,
                    });
                    *next_id += 1;
                    tested.push(Some((p.x as usize, p.y as usize)));
                }
                report.births += missing;
            }
            let missing = s_target.saturating_sub(self.support.len());
            if missing > 0 {
                let mut rng = stream(cfg.seed, frame, layer, Purpose::SupportAdd, p8);
                let born = draw_additions(&diff, &next, missing, &mut support_supply, &mut rng)?;
                self.support.extend(born);
            }

            empty = self.relocate_once(cfg)?;
        }

        self.density = next;
        self.d_now = d_now;
        report.lloyd = self.relax(cfg)?;
        if self.sites.len() != n_target {
            return Err(Error::Invariant(format!(
                "layer holds {} sites, budget requires {n_target}",
                self.sites.len()
            )));
        }
        Ok(report)
    }

    /// Colors (and orientations for frequency sites) from the current image.
    pub fn paint(&mut self, img: &Image, field: Option<&GradientField>, cfg: &StippleConfig) {
        let (w, h) = (img.width(), img.height());
        for s in &mut self.sites {
            let (x, y) = nearest_pixel(s.pos, w, h);
            let c = img.rgb_at(x, y);
            s.color = if cfg.primary_colors {
                primary_color_quantize(c, &mut site_stream(cfg.seed, s.id, Purpose::PrimaryColor)).color
            } else {
                c
            };
            s.orientation = None;
        }
        if let (SiteKind::Frequency, true, Some(field)) = (self.kind, cfg.patterns, field) {
            attributes::orient_patterns(&mut self.sites, field);
        }
    }
}

/// `count` pixels, taking at most `*supply` from the addition map and the rest
/// from the target frame's own darkness.
fn draw_additions<R: Rng + ?Sized>(
    diff: &FrameDiff,
    next: &DensityMap,
    count: usize,
    supply: &mut usize,
    rng: &mut R,
) -> Result<Vec<PixelPoint>> {
    let from_diff = count.min(*supply);
    *supply -= from_diff;
    let mut pts = if from_diff > 0 && !diff.addition.is_empty_mass() {
        rejection_sample(&diff.addition, from_diff, rng)?
    } else {
        Vec::new()
    };
    let rest = count - pts.len();
    pts.extend(rejection_sample(next, rest, rng)?);
    Ok(pts)
}

/// Full solver state after one frame; the checkpoint unit.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameState {
    pub frame_index: u64,
    /// Next id to hand out; ids are never reused.
    pub next_site_id: u64,
    pub tone: PointLayer,
    pub frequency: Option<PointLayer>,
}

/// Per-frame summary for progress output.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FrameReport {
    pub frame_index: u64,
    pub d_now: f64,
    pub tone: LayerReport,
    pub frequency: Option<LayerReport>,
}

impl FrameReport {
    pub fn live_sites(&self) -> usize {
        self.tone.target_sites + self.frequency.as_ref().map_or(0, |f| f.target_sites)
    }
}

impl FrameState {
    pub fn width(&self) -> usize {
        self.tone.width()
    }

    pub fn height(&self) -> usize {
        self.tone.height()
    }

    /// All live sites, tone first.
    pub fn sites(&self) -> impl Iterator<Item = &Site> {
        self.tone
            .sites
            .iter()
            .chain(self.frequency.iter().flat_map(|f| f.sites.iter()))
    }

    pub fn site_count(&self) -> usize {
        self.tone.sites.len() + self.frequency.as_ref().map_or(0, |f| f.sites.len())
    }
}

fn check_dimensions(img: &Image, width: usize, height: usize, index: usize) -> Result<()> {
    if img.width() != width || img.height() != height {
        return Err(Error::FrameDimensions {
            index,
            width,
            height,
            found_w: img.width(),
            found_h: img.height(),
        });
    }
    Ok(())
}

/// Stipples the first frame from scratch and anchors the budgets.
pub fn stipple_first_frame(img: &Image, cfg: &StippleConfig) -> Result<(FrameState, FrameReport)> {
    assert!(cfg.n_sites >= 1, "need at least one site");
    let mut next_id = 0;
    let dm = darkness(img);
    let (mut tone, tone_stats) = PointLayer::initialize(SiteKind::Tone, dm, cfg.n_sites, cfg, 0, &mut next_id)?;
    tone.paint(img, None, cfg);
    let (frequency, freq_stats) = if cfg.freq_sites > 0 {
        let field = sobel(img, cfg.freq_threshold);
        let (layer, stats) = attributes::frequency_sites(img, &field, cfg.freq_sites, cfg, 0, &mut next_id)?;
        (Some(layer), stats)
    } else {
        (None, LloydStats::default())
    };
    let report = FrameReport {
        frame_index: 0,
        d_now: tone.d_now,
        tone: LayerReport {
            births: tone.sites.len(),
            deaths: 0,
            target_sites: tone.sites.len(),
            lloyd: tone_stats,
        },
        frequency: frequency.as_ref().map(|f| LayerReport {
            births: f.sites.len(),
            deaths: 0,
            target_sites: f.sites.len(),
            lloyd: freq_stats.clone(),
        }),
    };
    let state = FrameState {
        frame_index: 0,
        next_site_id: next_id,
        tone,
        frequency,
    };
    Ok((state, report))
}

/// Derives the next frame's state from `prev`.
pub fn advance_frame(prev: &FrameState, img: &Image, cfg: &StippleConfig) -> Result<(FrameState, FrameReport)> {
    let frame = prev.frame_index + 1;
    check_dimensions(img, prev.width(), prev.height(), frame as usize)?;
    let mut next = prev.clone();
    next.frame_index = frame;
    let mut next_id = prev.next_site_id;

    let tone_report = next.tone.advance(darkness(img), cfg, frame, &mut next_id)?;
    next.tone.paint(img, None, cfg);

    let freq_report = match next.frequency.as_mut() {
        Some(layer) => {
            let field = sobel(img, cfg.freq_threshold);
            let r = layer.advance(attributes::frequency_density(&field), cfg, frame, &mut next_id)?;
            layer.paint(img, Some(&field), cfg);
            Some(r)
        }
        None => None,
    };
    next.next_site_id = next_id;
    let report = FrameReport {
        frame_index: frame,
        d_now: next.tone.d_now,
        tone: tone_report,
        frequency: freq_report,
    };
    Ok((next, report))
}
