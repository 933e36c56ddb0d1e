//! End-to-end orchestration: frame sources, checkpointed runs, document assembly.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use crate::config::StippleConfig;
use crate::error::{Error, Result};
use crate::format::estimate::{estimate_file_size, estimate_total_sites};
use crate::format::{DocumentBuilder, StippleDocument};
use crate::raster::{darkness, diff_fading, diff_simple, load_image, pnm::read_header, Image};
use crate::sampling::{global_density, Budget};
use crate::temporal::{advance_frame, checkpoint, stipple_first_frame, FrameReport, FrameState};

/// Random-access frames of one shot, all the same size.
pub trait FrameSource {
    fn len(&self) -> usize;
    fn dimensions(&self) -> (usize, usize);
    fn frame(&self, index: usize) -> Result<Image>;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl FrameSource for [Image] {
    fn len(&self) -> usize {
        <[Image]>::len(self)
    }

    fn dimensions(&self) -> (usize, usize) {
        self.first().map_or((0, 0), |f| (f.width(), f.height()))
    }

    fn frame(&self, index: usize) -> Result<Image> {
        let img = self[index].clone();
        let (w, h) = FrameSource::dimensions(self);
        if (img.width(), img.height()) != (w, h) {
            return Err(Error::FrameDimensions {
                index,
                width: w,
                height: h,
                found_w: img.width(),
                found_h: img.height(),
            });
        }
        Ok(img)
    }
}

/// `frame_<index>.ppm|pgm` files in a directory, contiguous from 0.
#[derive(Debug, Clone)]
pub struct FrameSequence {
    dir: PathBuf,
    paths: Vec<PathBuf>,
    width: usize,
    height: usize,
}

fn frame_index(name: &str) -> Option<usize> {
    let stem = name.strip_prefix("frame_")?;
    let digits = stem.strip_suffix(".ppm").or_else(|| stem.strip_suffix(".pgm"))?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok()
}

impl FrameSequence {
    /// Scans `dir` and checks every header against the first frame.
    pub fn open(dir: &Path) -> Result<Self> {
        let mut found: BTreeMap<usize, PathBuf> = BTreeMap::new();
        for entry in fs::read_dir(dir)? {
            let entry = entry?;
            let name = entry.file_name();
            if let Some(i) = frame_index(&name.to_string_lossy()) {
                if let Some(prev) = found.insert(i, entry.path()) {
                    return Err(Error::DuplicateFrame {
                        index: i,
                        first: prev,
                        second: entry.path(),
                    });
                }
            }
        }
        if found.is_empty() {
            return Err(Error::NoFrames(dir.to_path_buf()));
        }
        let mut paths = Vec::with_capacity(found.len());
        for (expected, (i, p)) in found.into_iter().enumerate() {
            if i != expected {
                return Err(Error::MissingFrame {
                    dir: dir.to_path_buf(),
                    index: expected,
                });
            }
            paths.push(p);
        }
        let mut dims = None;
        for (index, p) in paths.iter().enumerate() {
            let h = read_header(p).map_err(|source| Error::Image {
                path: p.clone(),
                source,
            })?;
            let (w0, h0) = *dims.get_or_insert((h.width, h.height));
            if (h.width, h.height) != (w0, h0) {
                return Err(Error::FrameDimensions {
                    index,
                    width: w0,
                    height: h0,
                    found_w: h.width,
                    found_h: h.height,
                });
            }
        }
        let (width, height) = dims.expect("at least one frame");
        Ok(FrameSequence {
            dir: dir.to_path_buf(),
            paths,
            width,
            height,
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path(&self, index: usize) -> &Path {
        &self.paths[index]
    }
}

impl FrameSource for FrameSequence {
    fn len(&self) -> usize {
        self.paths.len()
    }

    fn dimensions(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    fn frame(&self, index: usize) -> Result<Image> {
        let path = &self.paths[index];
        let img = load_image(path).map_err(|source| Error::Image {
            path: path.clone(),
            source,
        })?;
        if (img.width(), img.height()) != (self.width, self.height) {
            return Err(Error::FrameDimensions {
                index,
                width: self.width,
                height: self.height,
                found_w: img.width(),
                found_h: img.height(),
            });
        }
        Ok(img)
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Write `frame_<k>.ckpt` after every frame.
    pub checkpoint_dir: Option<PathBuf>,
    /// Continue from the latest checkpoint in `checkpoint_dir`.
    pub resume: bool,
    /// Stop after this frame index, as if the run had been interrupted.
    pub stop_after: Option<u64>,
    pub fps: f64,
}

impl RunOptions {
    pub fn new(fps: f64) -> Self {
        RunOptions {
            fps,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    /// `None` when the run stopped early.
    pub document: Option<StippleDocument>,
    /// Reports for the frames computed in this invocation.
    pub reports: Vec<FrameReport>,
    /// First frame computed in this invocation (non-zero after a resume).
    pub resumed_from: u64,
}

const RUN_MANIFEST: &str = "run.cfg";

fn manifest(cfg: &StippleConfig, frames: usize, dims: (usize, usize)) -> String {
    format!("frames {frames}\nsize {} {}\n{cfg:?}\n", dims.0, dims.1)
}

/// Stipples every frame of `source` in order.
pub fn run(
    source: &(impl FrameSource + ?Sized),
    cfg: &StippleConfig,
    opts: &RunOptions,
    mut progress: impl FnMut(&FrameReport),
) -> Result<RunOutcome> {
    let n = source.len();
    if n == 0 {
        return Err(Error::NoFrames(PathBuf::new()));
    }
    let dims = source.dimensions();
    let mut builder = DocumentBuilder::new(dims.0, dims.1, opts.fps);
    let mut reports = Vec::new();

    let mut state: Option<FrameState> = None;
    if let Some(dir) = &opts.checkpoint_dir {
        let manifest_path = dir.join(RUN_MANIFEST);
        let expected = manifest(cfg, n, dims);
        if opts.resume {
            if let Some(last) = checkpoint::latest(dir)? {
                let found = fs::read_to_string(&manifest_path).unwrap_or_default();
                if found != expected {
                    return Err(Error::Checkpoint {
                        path: manifest_path,
                        msg: "checkpoints were written with different settings or input".into(),
                    });
                }
                if last as usize >= n {
                    return Err(Error::Checkpoint {
                        path: checkpoint::checkpoint_path(dir, last),
                        msg: format!("frame {last} is beyond the {n}-frame input"),
                    });
                }
                // replay stored frames into the document
                for k in 0..=last {
                    let s = checkpoint::load(dir, k)?;
                    builder.push_frame(s.sites())?;
                    state = Some(s);
                }
            }
        } else {
            fs::create_dir_all(dir)?;
            // stale checkpoints from another run must not be picked up later
            if let Some(last) = checkpoint::latest(dir)? {
                for k in 0..=last {
                    let p = checkpoint::checkpoint_path(dir, k);
                    if p.exists() {
                        fs::remove_file(p)?;
                    }
                }
            }
        }
        fs::create_dir_all(dir)?;
        fs::write(&manifest_path, expected)?;
    }

    let resumed_from = state.as_ref().map_or(0, |s| s.frame_index + 1);
    for k in resumed_from as usize..n {
        let img = source.frame(k)?;
        let (next, report) = match &state {
            None => stipple_first_frame(&img, cfg)?,
            Some(prev) => advance_frame(prev, &img, cfg)?,
        };
        if let Some(dir) = &opts.checkpoint_dir {
            checkpoint::save(&next, dir)?;
        }
        builder.push_frame(next.sites())?;
        progress(&report);
        reports.push(report);
        state = Some(next);
        if opts.stop_after == Some(k as u64) && k + 1 < n {
            return Ok(RunOutcome {
                document: None,
                reports,
                resumed_from,
            });
        }
    }
    Ok(RunOutcome {
        document: Some(builder.finish()),
        reports,
        resumed_from,
    })
}

/// Convenience wrapper for in-memory frames without checkpoints.
pub fn stipple_frames(frames: &[Image], cfg: &StippleConfig, fps: f64) -> Result<(StippleDocument, Vec<FrameReport>)> {
    let out = run(frames, cfg, &RunOptions::new(fps), |_| {})?;
    Ok((out.document.expect("uninterrupted run"), out.reports))
}

/// Up-front size prediction for a shot, computed from the frames alone.
#[derive(Debug, Clone, PartialEq)]
pub struct ShotEstimate {
    pub frames: u64,
    pub d_initial: f64,
    /// Global density of each frame's addition map, frames `1..`.
    pub addition_densities: Vec<f64>,
    pub total_sites: u64,
    /// Mean of the per-frame budgets.
    pub mean_live_sites: f64,
    pub file_bytes: f64,
}

/// Tone-layer estimate for `n_sites` initial sites.
pub fn estimate_shot(source: &(impl FrameSource + ?Sized), n_sites: usize, fading: bool) -> Result<ShotEstimate> {
    if source.is_empty() {
        return Err(Error::NoFrames(PathBuf::new()));
    }
    let mut prev = darkness(&source.frame(0)?);
    let d_initial = global_density(&prev);
    if d_initial == 0.0 {
        return Err(Error::AllWhite);
    }
    let budget = Budget::new(n_sites, d_initial, 1);
    let mut live = budget.sites_for(d_initial) as f64;
    let mut additions = Vec::with_capacity(source.len() - 1);
    for k in 1..source.len() {
        let next = darkness(&source.frame(k)?);
        let diff = if fading { diff_fading(&prev, &next)? } else { diff_simple(&prev, &next)? };
        additions.push(global_density(&diff.addition));
        live += budget.sites_for(global_density(&next)) as f64;
        prev = next;
    }
    let frames = source.len() as u64;
    let mean_live_sites = live / frames as f64;
    Ok(ShotEstimate {
        frames,
        d_initial,
        total_sites: estimate_total_sites(n_sites, d_initial, &additions),
        addition_densities: additions,
        mean_live_sites,
        file_bytes: estimate_file_size(frames, mean_live_sites),
    })
}
