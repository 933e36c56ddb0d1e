//! Plain-text frame checkpoints, `frame_<index>.ckpt`.
//!
//! Reals are written in shortest round-trip form so a loaded state is
//! bit-identical to the saved one. Random streams are derived from
//! `(seed, frame, ...)` on demand, so no generator state needs saving.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::cvt::Point;
use crate::error::{Error, Result};
use crate::raster::DensityMap;
use crate::sampling::{Budget, PixelPoint, Site, SiteKind};

use super::{FrameState, PointLayer};

const MAGIC: &str = "STPLCKPT 1";

pub fn checkpoint_path(dir: &Path, frame: u64) -> PathBuf {
    dir.join(format!("frame_{frame}.ckpt"))
}

pub fn encode(state: &FrameState) -> String {
    let mut out = String::new();
    writeln!(out, "{MAGIC}").unwrap();
    writeln!(out, "frame {} next_id {}", state.frame_index, state.next_site_id).unwrap();
    encode_layer(&mut out, &state.tone);
    if let Some(f) = &state.frequency {
        encode_layer(&mut out, f);
    }
    out.push_str("end\n");
    out
}

fn encode_layer(out: &mut String, layer: &PointLayer) {
    let b = &layer.budget;
    writeln!(out, "layer {}", layer.kind.tag()).unwrap();
    writeln!(out, "budget {} {} {}", b.n_sites_ref, b.d_ref, b.alpha).unwrap();
    writeln!(out, "d_now {}", layer.d_now).unwrap();
    let (w, h) = (layer.density.width(), layer.density.height());
    writeln!(out, "density {w} {h}").unwrap();
    for row in layer.density.data().chunks(w) {
        for v in row {
            write!(out, "{v:02x}").unwrap();
        }
        out.push('\n');
    }
    writeln!(out, "support {}", layer.support.len()).unwrap();
    for p in &layer.support {
        writeln!(out, "{} {}", p.x, p.y).unwrap();
    }
    writeln!(out, "sites {}", layer.sites.len()).unwrap();
    for s in &layer.sites {
        let [r, g, b] = s.color;
        write!(out, "{} {} {} {r} {g} {b}", s.id, s.pos.x, s.pos.y).unwrap();
        if let Some(t) = s.orientation {
            write!(out, " {t}").unwrap();
        }
        out.push('\n');
    }
}

struct Lines<'a> {
    path: &'a Path,
    iter: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn err(&self, msg: impl Into<String>) -> Error {
        Error::CorruptCheckpoint {
            path: self.path.to_path_buf(),
            line: self.line,
            msg: msg.into(),
        }
    }

    fn next(&mut self) -> Result<&'a str> {
        match self.iter.next() {
            Some((i, l)) => {
                self.line = i + 1;
                Ok(l)
            }
            None => {
                self.line += 1;
                Err(self.err("unexpected end of file"))
            }
        }
    }

    /// Next line split on spaces, its first token required to be `key`.
    fn keyed(&mut self, key: &str) -> Result<Vec<&'a str>> {
        let l = self.next()?;
        let mut toks: Vec<&str> = l.split(' ').collect();
        if toks.first() != Some(&key) {
            return Err(self.err(format!("expected `{key}`")));
        }
        toks.remove(0);
        Ok(toks)
    }

    /// `key <value>` line.
    fn single<T: std::str::FromStr>(&mut self, key: &str) -> Result<T> {
        let toks = self.keyed(key)?;
        if toks.len() != 1 {
            return Err(self.err(format!("`{key}` takes one value")));
        }
        self.parse(toks.first())
    }

    fn parse<T: std::str::FromStr>(&self, tok: Option<&&str>) -> Result<T> {
        tok.and_then(|t| t.parse().ok())
            .ok_or_else(|| self.err("malformed value"))
    }
}

pub fn decode(text: &str, path: &Path) -> Result<FrameState> {
    let mut lines = Lines {
        path,
        iter: text.lines().enumerate(),
        line: 0,
    };
    if lines.next()? != MAGIC {
        return Err(lines.err("not a checkpoint (bad magic)"));
    }
    let head = lines.keyed("frame")?;
    if head.len() != 3 || head[1] != "next_id" {
        return Err(lines.err("malformed frame line"));
    }
    let frame_index = lines.parse(head.first())?;
    let next_site_id = lines.parse(head.get(2))?;

    let mut tone = None;
    let mut frequency = None;
    loop {
        let l = lines.next()?;
        match l {
            "end" => break,
            "layer tone" if tone.is_none() => tone = Some(decode_layer(&mut lines, SiteKind::Tone)?),
            "layer freq" if tone.is_some() && frequency.is_none() => {
                frequency = Some(decode_layer(&mut lines, SiteKind::Frequency)?)
            }
            _ => return Err(lines.err(format!("unexpected line `{l}`"))),
        }
    }
    let tone = tone.ok_or_else(|| lines.err("missing tone layer"))?;
    Ok(FrameState {
        frame_index,
        next_site_id,
        tone,
        frequency,
    })
}

fn decode_layer(lines: &mut Lines<'_>, kind: SiteKind) -> Result<PointLayer> {
    let b = lines.keyed("budget")?;
    if b.len() != 3 {
        return Err(lines.err("budget needs 3 values"));
    }
    let n_sites_ref = lines.parse(b.first())?;
    let d_ref: f64 = lines.parse(b.get(1))?;
    let alpha: usize = lines.parse(b.get(2))?;
    if d_ref.is_nan() || d_ref <= 0.0 || alpha < 1 {
        return Err(lines.err("budget out of range"));
    }
    let budget = Budget::new(n_sites_ref, d_ref, alpha);
    let d_now: f64 = lines.single("d_now")?;

    let dims = lines.keyed("density")?;
    let w: usize = lines.parse(dims.first())?;
    let h: usize = lines.parse(dims.get(1))?;
    let mut data = Vec::with_capacity(w * h);
    for _ in 0..h {
        let row = lines.next()?.as_bytes();
        if row.len() != 2 * w {
            return Err(lines.err(format!("density row must hold {w} hex bytes")));
        }
        for pair in row.chunks(2) {
            let s = std::str::from_utf8(pair).map_err(|_| lines.err("bad hex"))?;
            data.push(u8::from_str_radix(s, 16).map_err(|_| lines.err("bad hex"))?);
        }
    }
    let density = DensityMap::new(w, h, data).map_err(|e| lines.err(e.to_string()))?;

    let n: usize = lines.single("support")?;
    let mut support = Vec::with_capacity(n);
    for _ in 0..n {
        let l = lines.next()?;
        let t: Vec<&str> = l.split(' ').collect();
        if t.len() != 2 {
            return Err(lines.err("support line needs x y"));
        }
        let p = PixelPoint::new(lines.parse(t.first())?, lines.parse(t.get(1))?);
        if p.x as usize >= w || p.y as usize >= h {
            return Err(lines.err("support point outside the image"));
        }
        support.push(p);
    }

    let n: usize = lines.single("sites")?;
    let mut sites = Vec::with_capacity(n);
    for _ in 0..n {
        let l = lines.next()?;
        let t: Vec<&str> = l.split(' ').collect();
        if t.len() != 6 && t.len() != 7 {
            return Err(lines.err("site line needs id x y r g b [theta]"));
        }
        let orientation = match t.get(6) {
            Some(_) => Some(lines.parse(t.get(6))?),
            None => None,
        };
        sites.push(Site {
            id: lines.parse(t.first())?,
            kind,
            pos: Point::new(lines.parse(t.get(1))?, lines.parse(t.get(2))?),
            color: [lines.parse(t.get(3))?, lines.parse(t.get(4))?, lines.parse(t.get(5))?],
            orientation,
        });
    }
    Ok(PointLayer {
        kind,
        budget,
        d_now,
        density,
        support,
        sites,
    })
}

pub fn save(state: &FrameState, dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = checkpoint_path(dir, state.frame_index);
    // write then rename so a killed run never leaves a half-written checkpoint
    let tmp = path.with_extension("ckpt.tmp");
    fs::write(&tmp, encode(state))?;
    fs::rename(&tmp, &path)?;
    Ok(path)
}

pub fn load(dir: &Path, frame: u64) -> Result<FrameState> {
    let path = checkpoint_path(dir, frame);
    let text = fs::read_to_string(&path).map_err(|e| Error::Checkpoint {
        path: path.clone(),
        msg: e.to_string(),
    })?;
    let state = decode(&text, &path)?;
    if state.frame_index != frame {
        return Err(Error::Checkpoint {
            path,
            msg: format!("holds frame {} instead", state.frame_index),
        });
    }
    Ok(state)
}

/// Highest frame index with a checkpoint in `dir`.
pub fn latest(dir: &Path) -> Result<Option<u64>> {
    if !dir.exists() {
        return Ok(None);
    }
    let mut best = None;
    for entry in fs::read_dir(dir)? {
        let name = entry?.file_name();
        let name = name.to_string_lossy();
        if let Some(k) = name
            .strip_prefix("frame_")
            .and_then(|r| r.strip_suffix(".ckpt"))
            .and_then(|k| k.parse::<u64>().ok())
        {
            best = best.max(Some(k));
        }
    }
    Ok(best)
}
