//! STPL v1: the plain-text vector video container.
//!
//! ```text
//! STPL 1
//! size <W> <H> frames <F> fps <fps> sites <S>
//! site <id> kind <tone|freq> birth <f0> death <f1>
//! <x> <y> <r> <g> <b>[ <theta>]        (f1 - f0 lines)
//! ```
//!
//! Coordinates carry exactly two decimals and angles four. Samples are
//! quantized on construction so that `read(write(doc)) == doc`.

pub mod estimate;

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;
use std::io::{self, BufRead, Write};

use thiserror::Error;

use crate::raster::{luma, Rgb};
use crate::sampling::{Site, SiteKind};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("line {line}: unsupported format `{found}`, expected `STPL 1`")]
    Version { line: usize, found: String },
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("line {line}: duplicate site id {id}")]
    DuplicateId { line: usize, id: u64 },
    #[error("line {line}: site id {id} not greater than previous id {prev}")]
    IdOrder { line: usize, id: u64, prev: u64 },
    #[error("line {line}: site {id} expects {expected} samples, found {found}")]
    SampleCount {
        line: usize,
        id: u64,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: site {id} dies at frame {death} but the document has {frames} frames")]
    DeathBeyondFrames {
        line: usize,
        id: u64,
        death: u64,
        frames: u64,
    },
    #[error("header declares {declared} sites but {found} tracks follow")]
    SiteCount { declared: usize, found: usize },
    #[error("invalid document: {0}")]
    Invalid(String),
}

impl FormatError {
    /// 1-based input line the error points at, when it has one.
    pub fn line(&self) -> Option<usize> {
        match self {
            FormatError::Version { line, .. }
            | FormatError::Malformed { line, .. }
            | FormatError::DuplicateId { line, .. }
            | FormatError::IdOrder { line, .. }
            | FormatError::SampleCount { line, .. }
            | FormatError::DeathBeyondFrames { line, .. } => Some(*line),
            _ => None,
        }
    }
}

type Result<T> = std::result::Result<T, FormatError>;

fn quantize(v: f64, scale: f64) -> f64 {
    // + 0.0 folds negative zero so it prints without a sign
    (v * scale).round() / scale + 0.0
}

/// Largest four-decimal angle inside `(-pi/2, pi/2]`.
#[allow(clippy::approx_constant)]
const MAX_STORED_ANGLE: f64 = 1.5707;

/// Four decimals, kept inside the orientation interval: rounding pi/2 up to
/// 1.5708 would leave it, so both ends of the line map to 1.5707.
fn quantize_angle(t: f64) -> f64 {
    let q = quantize(t, 10_000.0);
    if q > FRAC_PI_2 || q <= -FRAC_PI_2 {
        MAX_STORED_ANGLE
    } else {
        q
    }
}

/// One frame of a site's life.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub x: f64,
    pub y: f64,
    pub color: Rgb,
    pub orientation: Option<f64>,
}

impl Sample {
    /// Quantizes to the stored precision.
    pub fn new(x: f64, y: f64, color: Rgb, orientation: Option<f64>) -> Self {
        Sample {
            x: quantize(x, 100.0),
            y: quantize(y, 100.0),
            color,
            orientation: orientation.map(quantize_angle),
        }
    }

    pub fn from_site(site: &Site) -> Self {
        Sample::new(site.pos.x, site.pos.y, site.color, site.orientation)
    }

    pub fn darkness(&self) -> u8 {
        255 - luma(self.color)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SiteTrack {
    pub id: u64,
    pub kind: SiteKind,
    pub birth: u64,
    /// One sample per frame in `birth..death`.
    pub samples: Vec<Sample>,
}

impl SiteTrack {
    /// Exclusive end frame.
    pub fn death(&self) -> u64 {
        self.birth + self.samples.len() as u64
    }

    pub fn alive_at(&self, frame: u64) -> bool {
        frame >= self.birth && frame < self.death()
    }

    pub fn sample_at(&self, frame: u64) -> Option<&Sample> {
        if self.alive_at(frame) {
            self.samples.get((frame - self.birth) as usize)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StippleDocument {
    pub width: usize,
    pub height: usize,
    pub frame_count: u64,
    pub fps: f64,
    /// Sorted by strictly increasing id.
    pub tracks: Vec<SiteTrack>,
}

impl StippleDocument {
    pub fn empty(width: usize, height: usize, fps: f64) -> Self {
        StippleDocument {
            width,
            height,
            frame_count: 0,
            fps,
            tracks: Vec::new(),
        }
    }

    /// Distinct site ids over the whole shot.
    pub fn total_sites(&self) -> usize {
        self.tracks.len()
    }

    pub fn live_count(&self, frame: u64) -> usize {
        self.tracks.iter().filter(|t| t.alive_at(frame)).count()
    }

    /// Average live sites per frame.
    pub fn mean_live_sites(&self) -> f64 {
        if self.frame_count == 0 {
            return 0.0;
        }
        let samples: usize = self.tracks.iter().map(|t| t.samples.len()).sum();
        samples as f64 / self.frame_count as f64
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fps.is_finite() && self.fps > 0.0) {
            return Err(FormatError::Invalid(format!("fps {} must be positive", self.fps)));
        }
        let mut prev: Option<u64> = None;
        for t in &self.tracks {
            if let Some(p) = prev {
                if t.id <= p {
                    return Err(FormatError::Invalid(format!("site id {} follows {p}", t.id)));
                }
            }
            prev = Some(t.id);
            if t.samples.is_empty() {
                return Err(FormatError::Invalid(format!("site {} has no samples", t.id)));
            }
            if t.death() > self.frame_count {
                return Err(FormatError::Invalid(format!(
                    "site {} dies at {} past frame count {}",
                    t.id,
                    t.death(),
                    self.frame_count
                )));
            }
        }
        Ok(())
    }

    pub fn write_to<W: Write>(&self, sink: &mut W) -> Result<()> {
        self.validate()?;
        writeln!(sink, "STPL 1")?;
        writeln!(
            sink,
            "size {} {} frames {} fps {} sites {}",
            self.width,
            self.height,
            self.frame_count,
            self.fps,
            self.tracks.len()
        )?;
        for t in &self.tracks {
            writeln!(
                sink,
                "site {} kind {} birth {} death {}",
                t.id,
                t.kind.tag(),
                t.birth,
                t.death()
            )?;
            for s in &t.samples {
                let [r, g, b] = s.color;
                write!(sink, "{:.2} {:.2} {r} {g} {b}", s.x, s.y)?;
                if let Some(theta) = s.orientation {
                    write!(sink, " {theta:.4}")?;
                }
                sink.write_all(b"\n")?;
            }
        }
        Ok(())
    }

    pub fn to_text(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_to(&mut buf)?;
        Ok(String::from_utf8(buf).expect("writer emits ASCII"))
    }

    pub fn read_from<R: BufRead>(source: R) -> Result<Self> {
        Reader::new(source).document()
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::read_from(text.as_bytes())
    }
}

struct Reader<R> {
    lines: io::Lines<R>,
    line: usize,
}

impl<R: BufRead> Reader<R> {
    fn new(source: R) -> Self {
        Reader {
            lines: source.lines(),
            line: 0,
        }
    }

    fn malformed(&self, msg: impl Into<String>) -> FormatError {
        FormatError::Malformed {
            line: self.line,
            msg: msg.into(),
        }
    }

    fn next_line(&mut self) -> Result<Option<String>> {
        match self.lines.next() {
            Some(l) => {
                self.line += 1;
                Ok(Some(l?))
            }
            None => {
                // errors at end of input point just past the last line
                self.line += 1;
                Ok(None)
            }
        }
    }

    fn num<T: std::str::FromStr>(&self, tok: Option<&str>, what: &str) -> Result<T> {
        tok.and_then(|t| t.parse().ok())
            .ok_or_else(|| self.malformed(format!("bad or missing {what}")))
    }

    /// `key value key value ...` with fixed keys.
    fn fields<'a>(&self, line: &'a str, keys: &[&str]) -> Result<Vec<&'a str>> {
        let toks: Vec<&str> = line.split(' ').collect();
        if toks.len() != 2 * keys.len() {
            return Err(self.malformed(format!("expected `{}`", keys.join(" <> "))));
        }
        let mut vals = Vec::with_capacity(keys.len());
        for (pair, key) in toks.chunks(2).zip(keys) {
            if pair[0] != *key {
                return Err(self.malformed(format!("expected `{key}`, found `{}`", pair[0])));
            }
            vals.push(pair[1]);
        }
        Ok(vals)
    }

    fn sample(&self, line: &str) -> Result<Sample> {
        let t: Vec<&str> = line.split(' ').collect();
        if t.len() != 5 && t.len() != 6 {
            return Err(self.malformed("sample needs `x y r g b [theta]`"));
        }
        let x: f64 = self.num(Some(t[0]), "x")?;
        let y: f64 = self.num(Some(t[1]), "y")?;
        if !x.is_finite() || !y.is_finite() {
            return Err(self.malformed("non-finite coordinate"));
        }
        let color = [
            self.num(Some(t[2]), "red")?,
            self.num(Some(t[3]), "green")?,
            self.num(Some(t[4]), "blue")?,
        ];
        let orientation = match t.get(5) {
            Some(s) => Some(self.num::<f64>(Some(s), "theta")?),
            None => None,
        };
        Ok(Sample::new(x, y, color, orientation))
    }

    fn document(mut self) -> Result<StippleDocument> {
        let first = self.next_line()?.unwrap_or_default();
        if first != "STPL 1" {
            return Err(FormatError::Version { line: 1, found: first });
        }
        let header = self
            .next_line()?
            .ok_or_else(|| self.malformed("missing size header"))?;
        let toks: Vec<&str> = header.split(' ').collect();
        if toks.len() != 9 || toks[0] != "size" || toks[3] != "frames" || toks[5] != "fps" || toks[7] != "sites" {
            return Err(self.malformed("expected `size <W> <H> frames <F> fps <fps> sites <S>`"));
        }
        let width: usize = self.num(Some(toks[1]), "width")?;
        let height: usize = self.num(Some(toks[2]), "height")?;
        let frame_count: u64 = self.num(Some(toks[4]), "frame count")?;
        let fps: f64 = self.num(Some(toks[6]), "fps")?;
        let declared: usize = self.num(Some(toks[8]), "site count")?;
        if !(fps.is_finite() && fps > 0.0) {
            return Err(self.malformed("fps must be positive"));
        }

        let mut tracks: Vec<SiteTrack> = Vec::new();
        let mut pending: Option<(SiteTrack, u64, usize)> = None;
        let mut seen: BTreeMap<u64, usize> = BTreeMap::new();
        loop {
            let line = self.next_line()?;
            let is_site = line.as_deref().is_some_and(|l| l.starts_with("site "));
            if line.is_none() || is_site {
                if let Some((t, death, at)) = pending.take() {
                    let expected = (death - t.birth) as usize;
                    if t.samples.len() != expected {
                        return Err(FormatError::SampleCount {
                            line: at,
                            id: t.id,
                            expected,
                            found: t.samples.len(),
                        });
                    }
                    tracks.push(t);
                }
            }
            let Some(line) = line else { break };
            if is_site {
                let v = self.fields(&line, &["site", "kind", "birth", "death"])?;
                let id: u64 = self.num(Some(v[0]), "id")?;
                let kind = SiteKind::from_tag(v[1]).ok_or_else(|| self.malformed(format!("unknown kind `{}`", v[1])))?;
                let birth: u64 = self.num(Some(v[2]), "birth")?;
                let death: u64 = self.num(Some(v[3]), "death")?;
                if seen.contains_key(&id) {
                    return Err(FormatError::DuplicateId { line: self.line, id });
                }
                if let Some(prev) = tracks.last().map(|t| t.id) {
                    if id < prev {
                        return Err(FormatError::IdOrder {
                            line: self.line,
                            id,
                            prev,
                        });
                    }
                }
                if death <= birth {
                    return Err(self.malformed(format!("site {id} has death {death} not after birth {birth}")));
                }
                if death > frame_count {
                    return Err(FormatError::DeathBeyondFrames {
                        line: self.line,
                        id,
                        death,
                        frames: frame_count,
                    });
                }
                seen.insert(id, self.line);
                pending = Some((
                    SiteTrack {
                        id,
                        kind,
                        birth,
                        samples: Vec::with_capacity((death - birth) as usize),
                    },
                    death,
                    self.line,
                ));
            } else {
                let sample = self.sample(&line)?;
                match pending.as_mut() {
                    Some((t, _, _)) => t.samples.push(sample),
                    None => return Err(self.malformed("sample line before any site line")),
                }
            }
        }
        if tracks.len() != declared {
            return Err(FormatError::SiteCount {
                declared,
                found: tracks.len(),
            });
        }
        Ok(StippleDocument {
            width,
            height,
            frame_count,
            fps,
            tracks,
        })
    }
}

/// Accumulates per-frame site lists into tracks.
#[derive(Debug, Clone)]
pub struct DocumentBuilder {
    width: usize,
    height: usize,
    fps: f64,
    frames: u64,
    open: BTreeMap<u64, SiteTrack>,
    closed: Vec<SiteTrack>,
}

impl DocumentBuilder {
    pub fn new(width: usize, height: usize, fps: f64) -> Self {
        DocumentBuilder {
            width,
            height,
            fps,
            frames: 0,
            open: BTreeMap::new(),
            closed: Vec::new(),
        }
    }

    pub fn frames(&self) -> u64 {
        self.frames
    }

    /// Appends the next frame. Sites absent from `sites` end their track here;
    /// an id may not come back once its track ended.
    pub fn push_frame<'a>(&mut self, sites: impl IntoIterator<Item = &'a Site>) -> Result<()> {
        let frame = self.frames;
        let mut next: BTreeMap<u64, SiteTrack> = BTreeMap::new();
        for s in sites {
            let sample = Sample::from_site(s);
            if next.contains_key(&s.id) {
                return Err(FormatError::Invalid(format!("site {} twice in frame {frame}", s.id)));
            }
            let track = match self.open.remove(&s.id) {
                Some(mut t) => {
                    t.samples.push(sample);
                    t
                }
                None => {
                    if self.closed.iter().any(|t| t.id == s.id) {
                        return Err(FormatError::Invalid(format!("site {} reappears in frame {frame}", s.id)));
                    }
                    SiteTrack {
                        id: s.id,
                        kind: s.kind,
                        birth: frame,
                        samples: vec![sample],
                    }
                }
            };
            next.insert(s.id, track);
        }
        self.closed.extend(std::mem::replace(&mut self.open, next).into_values());
        self.frames += 1;
        Ok(())
    }

    pub fn finish(mut self) -> StippleDocument {
        let mut tracks = self.closed;
        tracks.extend(std::mem::take(&mut self.open).into_values());
        tracks.sort_by_key(|t| t.id);
        StippleDocument {
            width: self.width,
            height: self.height,
            frame_count: self.frames,
            fps: self.fps,
            tracks,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cvt::Point;

    #[test]
    fn stored_angles_stay_in_the_half_open_interval() {
        let q = |t| Sample::new(0.0, 0.0, [0; 3], Some(t)).orientation.unwrap();
        assert_eq!(q(FRAC_PI_2), MAX_STORED_ANGLE);
        assert_eq!(q(-FRAC_PI_2 + 1e-6), MAX_STORED_ANGLE);
        assert_eq!(q(0.123456), 0.1235);
        assert_eq!(q(-MAX_STORED_ANGLE), -MAX_STORED_ANGLE);
        assert_eq!(q(-0.00001), 0.0);
    }

    fn one_site_doc() -> StippleDocument {
        StippleDocument {
            width: 4,
            height: 4,
            frame_count: 1,
            fps: 25.0,
            tracks: vec![SiteTrack {
                id: 0,
                kind: SiteKind::Tone,
                birth: 0,
                samples: vec![Sample::new(1.5, 2.25, [10, 20, 30], None)],
            }],
        }
    }

    #[test]
    fn empty_document_is_header_only() {
        let text = StippleDocument::empty(0, 0, 25.0).to_text().unwrap();
        assert_eq!(text, "STPL 1\nsize 0 0 frames 0 fps 25 sites 0\n");
        assert_eq!(StippleDocument::parse(&text).unwrap(), StippleDocument::empty(0, 0, 25.0));
    }

    #[test]
    fn single_sample_line() {
        let text = one_site_doc().to_text().unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[2], "site 0 kind tone birth 0 death 1");
        assert_eq!(lines[3], "1.50 2.25 10 20 30");
        assert_eq!(lines.len(), 4);
    }

    #[test]
    fn round_trip() {
        let mut doc = one_site_doc();
        doc.frame_count = 3;
        doc.tracks.push(SiteTrack {
            id: 7,
            kind: SiteKind::Frequency,
            birth: 1,
            samples: vec![
                Sample::new(0.004, 3.999, [1, 2, 3], Some(-0.00001)),
                Sample::new(2.0, 1.0, [255, 0, 9], Some(FRAC_PI_2 - 1e-7)),
            ],
        });
        let text = doc.to_text().unwrap();
        assert!(text.contains("0.00 4.00 1 2 3 0.0000\n"));
        let back = StippleDocument::parse(&text).unwrap();
        assert_eq!(back, doc);
        assert_eq!(back.to_text().unwrap(), text);
    }

    #[test]
    fn duplicate_id_is_named() {
        let text = "STPL 1\nsize 2 2 frames 1 fps 1 sites 2\nsite 3 kind tone birth 0 death 1\n0.00 0.00 0 0 0\nsite 3 kind tone birth 0 death 1\n0.00 0.00 0 0 0\n";
        let err = StippleDocument::parse(text).unwrap_err();
        assert!(matches!(err, FormatError::DuplicateId { id: 3, line: 5 }));
        assert!(err.to_string().contains("id 3"));
    }

    #[test]
    fn sample_count_mismatch_has_line() {
        let text = "STPL 1\nsize 2 2 frames 3 fps 1 sites 1\nsite 0 kind tone birth 0 death 2\n0.00 0.00 0 0 0\n";
        assert!(matches!(
            StippleDocument::parse(text).unwrap_err(),
            FormatError::SampleCount { line: 3, id: 0, expected: 2, found: 1 }
        ));
    }

    #[test]
    fn other_reader_errors() {
        assert!(matches!(StippleDocument::parse("STPL 2\n"), Err(FormatError::Version { line: 1, .. })));
        let late = "STPL 1\nsize 2 2 frames 1 fps 1 sites 1\nsite 0 kind tone birth 0 death 2\n";
        assert!(matches!(StippleDocument::parse(late), Err(FormatError::DeathBeyondFrames { id: 0, .. })));
        let order = "STPL 1\nsize 2 2 frames 1 fps 1 sites 2\nsite 5 kind tone birth 0 death 1\n0.00 0.00 0 0 0\nsite 2 kind tone birth 0 death 1\n0.00 0.00 0 0 0\n";
        assert!(matches!(StippleDocument::parse(order), Err(FormatError::IdOrder { id: 2, prev: 5, .. })));
        let count = "STPL 1\nsize 2 2 frames 1 fps 1 sites 2\n";
        assert!(matches!(StippleDocument::parse(count), Err(FormatError::SiteCount { declared: 2, found: 0 })));
        let junk = "STPL 1\nsize 2 2 frames 1 fps 1 sites 1\nsite 0 kind tone birth 0 death 1\n0.00 zero 0 0 0\n";
        assert!(matches!(StippleDocument::parse(junk), Err(FormatError::Malformed { line: 4, .. })));
    }

    fn site(id: u64, x: f64) -> Site {
        Site {
            id,
            kind: SiteKind::Tone,
            pos: Point::new(x, 1.0),
            color: [0, 0, 0],
            orientation: None,
        }
    }

    #[test]
    fn builder_tracks_lifetimes() {
        let mut b = DocumentBuilder::new(10, 10, 25.0);
        b.push_frame(&[site(0, 1.0), site(1, 2.0)]).unwrap();
        b.push_frame(&[site(1, 2.5), site(2, 3.0)]).unwrap();
        b.push_frame(&[site(2, 3.5)]).unwrap();
        let doc = b.finish();
        assert_eq!(doc.frame_count, 3);
        let spans: Vec<(u64, u64, u64)> = doc.tracks.iter().map(|t| (t.id, t.birth, t.death())).collect();
        assert_eq!(spans, vec![(0, 0, 1), (1, 0, 2), (2, 1, 3)]);
        assert_eq!(doc.tracks[1].samples[1].x, 2.5);
        assert_eq!(doc.live_count(1), 2);
        assert!((doc.mean_live_sites() - 5.0 / 3.0).abs() < 1e-12);
        doc.validate().unwrap();
    }

    #[test]
    fn builder_rejects_resurrection() {
        let mut b = DocumentBuilder::new(10, 10, 25.0);
        b.push_frame(&[site(0, 1.0)]).unwrap();
        b.push_frame(&[]).unwrap();
        assert!(b.push_frame(&[site(0, 1.0)]).is_err());
    }

    #[test]
    fn output_is_plain_ascii_lf() {
        let text = one_site_doc().to_text().unwrap();
        assert!(!text.contains('\r'));
        assert!(text.lines().all(|l| !l.ends_with(' ')));
        assert!(text.is_ascii());
    }
}
