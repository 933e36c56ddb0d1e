//! Shared conformance suite for independent STPL readers and players.
//!
//! Two artifacts are produced: `interpolation.json`, expected render points for
//! a set of documents and frame positions, and `stpl/`, small valid and invalid
//! documents with a `manifest.json` of expected reader outcomes. Expected
//! values are computed here directly from the blend formulas, track by track,
//! without going through [`crate::render`], so the suite also checks it.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::attributes::FREQUENCY_SIZE_FACTOR;
use crate::config::StippleConfig;
use crate::error::Result;
use crate::format::{Sample, SiteTrack, StippleDocument};
use crate::pipeline::stipple_frames;
use crate::raster::{luma, Rgb};
use crate::sampling::SiteKind;
use crate::synth;

pub const SUITE_VERSION: u64 = 1;
pub const TOLERANCE: f64 = 1e-9;

const FORMULAS: &[&str] = &[
    "n = floor(t), w = t - n; a = sample at frame n, b = sample at frame n + 1 (b = a when w = 0)",
    "x = a.x * (1 - w) + b.x * w, same for y",
    "color[c] = round_half_up(a.color[c] * (1 - w) + b.color[c] * w)",
    "luma(c) = (299 r + 587 g + 114 b + 500) div 1000; darkness = 255 - luma, blended like x",
    "size = darkness / 255 * contrast, times 2/3 for kind freq",
    "theta: d = fold(b - a), theta = fold(a + w d), fold into (-pi/2, pi/2]; if only one side has theta, keep it on its half of the interval",
    "a track is drawn only when alive at both n and n + 1, unless soft_birth: then a track alive at one end only is drawn with size scaled by its weight (1 - w at n, w at n + 1)",
];

fn fold(mut t: f64) -> f64 {
    while t <= -FRAC_PI_2 {
        t += PI;
    }
    while t > FRAC_PI_2 {
        t -= PI;
    }
    t
}

fn size_of(kind: SiteKind, darkness: f64, contrast: f64) -> f64 {
    let s = darkness / 255.0 * contrast;
    match kind {
        SiteKind::Tone => s,
        SiteKind::Frequency => s * FREQUENCY_SIZE_FACTOR,
    }
}

fn point_json(track: &SiteTrack, x: f64, y: f64, color: Rgb, darkness: f64, size: f64, theta: Option<f64>) -> Value {
    json!({
        "id": track.id,
        "kind": track.kind.tag(),
        "x": x,
        "y": y,
        "color": color,
        "darkness": darkness,
        "size": size,
        "orientation": theta,
    })
}

/// Expected points at `t`, in id order.
pub fn reference_points(doc: &StippleDocument, t: f64, contrast: f64, soft_birth: bool) -> Vec<Value> {
    let n = t.floor() as u64;
    let w = t - n as f64;
    let m = if w > 0.0 { n + 1 } else { n };
    let mut out = Vec::new();
    for track in &doc.tracks {
        let at = |f: u64| {
            (f >= track.birth && f < track.death()).then(|| track.samples[(f - track.birth) as usize])
        };
        let dark = |s: &Sample| (255 - luma(s.color)) as f64;
        match (at(n), at(m)) {
            (Some(a), Some(b)) => {
                let mix = |p: f64, q: f64| p * (1.0 - w) + q * w;
                let color: Rgb = std::array::from_fn(|c| (mix(a.color[c] as f64, b.color[c] as f64) + 0.5).floor() as u8);
                let darkness = mix(dark(&a), dark(&b));
                let theta = match (a.orientation, b.orientation) {
                    (Some(p), Some(q)) => Some(fold(p + w * fold(q - p))),
                    (Some(p), None) if w < 0.5 => Some(p),
                    (None, Some(q)) if w >= 0.5 => Some(q),
                    _ => None,
                };
                out.push(point_json(
                    track,
                    mix(a.x, b.x),
                    mix(a.y, b.y),
                    color,
                    darkness,
                    size_of(track.kind, darkness, contrast),
                    theta,
                ));
            }
            (Some(s), None) | (None, Some(s)) if soft_birth => {
                let weight = if at(n).is_some() { 1.0 - w } else { w };
                let d = dark(&s);
                out.push(point_json(
                    track,
                    s.x,
                    s.y,
                    s.color,
                    d,
                    size_of(track.kind, d, contrast) * weight,
                    s.orientation,
                ));
            }
            _ => {}
        }
    }
    out
}

fn track(id: u64, kind: SiteKind, birth: u64, samples: Vec<Sample>) -> SiteTrack {
    SiteTrack {
        id,
        kind,
        birth,
        samples,
    }
}

fn doc(width: usize, height: usize, frames: u64, tracks: Vec<SiteTrack>) -> StippleDocument {
    StippleDocument {
        width,
        height,
        frame_count: frames,
        fps: 25.0,
        tracks,
    }
}

/// Hand-built documents covering each formula in isolation.
fn handmade() -> Vec<(&'static str, StippleDocument)> {
    let s = Sample::new;
    let black = [0, 0, 0];
    let white = [255, 255, 255];
    let linear = doc(
        20,
        10,
        5,
        vec![track(
            0,
            SiteKind::Tone,
            0,
            vec![
                s(1.0, 1.0, black, None),
                s(2.0, 1.0, black, None),
                s(4.0, 2.0, black, None),
                s(0.0, 5.0, black, None),
                s(10.0, 5.0, white, None),
            ],
        )],
    );
    let lifetimes = doc(
        10,
        10,
        6,
        vec![
            track(0, SiteKind::Tone, 0, vec![s(2.0, 2.0, black, None); 6]),
            track(3, SiteKind::Tone, 2, vec![s(5.0, 5.0, [128, 64, 32], None); 2]),
            track(7, SiteKind::Tone, 0, vec![s(8.0, 1.0, [10, 200, 30], None); 3]),
        ],
    );
    let angles = doc(
        10,
        10,
        4,
        vec![
            track(
                1,
                SiteKind::Frequency,
                0,
                vec![
                    s(3.0, 3.0, black, Some(1.5)),
                    s(3.0, 4.0, black, Some(-1.5)),
                    s(3.0, 5.0, black, Some(0.25)),
                    s(3.0, 6.0, black, None),
                ],
            ),
            track(2, SiteKind::Tone, 1, vec![s(6.0, 6.0, [90, 90, 90], None); 3]),
        ],
    );
    vec![("linear", linear), ("lifetimes", lifetimes), ("angles", angles)]
}

fn random_doc(seed: u64) -> StippleDocument {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (w, h, frames) = (rng.random_range(8..60), rng.random_range(8..60), rng.random_range(2..8u64));
    let mut tracks = Vec::new();
    let mut id = 0;
    for _ in 0..rng.random_range(1..25) {
        id += rng.random_range(1..4);
        let birth = rng.random_range(0..frames);
        let len = rng.random_range(1..=frames - birth);
        let kind = if rng.random_bool(0.3) { SiteKind::Frequency } else { SiteKind::Tone };
        let samples = (0..len)
            .map(|_| {
                let theta = (kind == SiteKind::Frequency && rng.random_bool(0.8))
                    .then(|| rng.random_range(-FRAC_PI_2 + 1e-3..FRAC_PI_2));
                Sample::new(
                    rng.random_range(0.0..w as f64),
                    rng.random_range(0.0..h as f64),
                    rng.random(),
                    theta,
                )
            })
            .collect();
        tracks.push(track(id, kind, birth, samples));
    }
    doc(w, h, frames, tracks)
}

fn pipeline_doc() -> Result<StippleDocument> {
    let frames = synth::shrinking_disk(24, 24, 3, 9.0, 0.85);
    let mut cfg = StippleConfig::with_sites(25);
    cfg.freq_sites = 8;
    cfg.freq_threshold = 64.0;
    cfg.patterns = true;
    Ok(stipple_frames(&frames, &cfg, 25.0)?.0)
}

fn documents() -> Result<Vec<(String, StippleDocument)>> {
    let mut docs: Vec<(String, StippleDocument)> =
        handmade().into_iter().map(|(n, d)| (n.to_string(), d)).collect();
    for seed in 0..4 {
        docs.push((format!("random_{seed}"), random_doc(seed)));
    }
    docs.push(("pipeline".into(), pipeline_doc()?));
    Ok(docs)
}

fn query_times(doc: &StippleDocument, seed: u64) -> Vec<f64> {
    let last = doc.frame_count - 1;
    let mut ts: Vec<f64> = (0..=last).map(|k| k as f64).collect();
    ts.extend((0..last).flat_map(|k| [k as f64 + 0.25, k as f64 + 0.5]));
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    ts.extend((0..3).map(|_| rng.random_range(0.0..last as f64)));
    ts
}

/// The interpolation vector suite.
pub fn interpolation_suite() -> Result<Value> {
    let mut cases = Vec::new();
    for (i, (name, d)) in documents()?.into_iter().enumerate() {
        for (contrast, soft_birth) in [(1.0, false), (2.5, false), (1.0, true)] {
            let queries: Vec<Value> = query_times(&d, i as u64)
                .into_iter()
                .map(|t| json!({ "t": t, "points": reference_points(&d, t, contrast, soft_birth) }))
                .collect();
            cases.push(json!({
                "name": format!("{name}/contrast_{contrast}{}", if soft_birth { "/soft_birth" } else { "" }),
                "document": d.to_text()?,
                "contrast": contrast,
                "soft_birth": soft_birth,
                "queries": queries,
            }));
        }
    }
    Ok(json!({
        "version": SUITE_VERSION,
        "tolerance": TOLERANCE,
        "formulas": FORMULAS,
        "cases": cases,
    }))
}

/// Expected reader outcome for one sample file.
#[derive(Debug, Clone, PartialEq)]
pub enum Expect {
    Valid { frames: u64, sites: usize },
    /// Rejected; `line` is where the error is reported, if anywhere.
    Invalid { line: Option<usize> },
}

#[derive(Debug, Clone)]
pub struct StplSample {
    pub name: &'static str,
    pub text: String,
    pub expect: Expect,
}

fn valid(name: &'static str, d: &StippleDocument) -> Result<StplSample> {
    Ok(StplSample {
        name,
        text: d.to_text()?,
        expect: Expect::Valid {
            frames: d.frame_count,
            sites: d.total_sites(),
        },
    })
}

fn invalid(name: &'static str, text: String, line: Option<usize>) -> StplSample {
    StplSample {
        name,
        text,
        expect: Expect::Invalid { line },
    }
}

/// Valid and corrupt documents for reader conformance.
pub fn stpl_samples() -> Result<Vec<StplSample>> {
    let pipeline = pipeline_doc()?;
    let lifetimes = handmade().swap_remove(1).1;
    let base = lifetimes.to_text()?;
    // line 3 is the first `site` line, line 4 its first sample
    let lines: Vec<&str> = base.lines().collect();
    let with = |f: &dyn Fn(&mut Vec<&str>)| {
        let mut l = lines.clone();
        f(&mut l);
        l.join("\n") + "\n"
    };
    let samples = vec![
        valid("empty.stpl", &StippleDocument::empty(16, 9, 25.0))?,
        valid("lifetimes.stpl", &lifetimes)?,
        valid("angles.stpl", &handmade().swap_remove(2).1)?,
        valid("pipeline.stpl", &pipeline)?,
        invalid("bad_version.stpl", base.replacen("STPL 1", "STPL 2", 1), Some(1)),
        invalid("bad_header.stpl", with(&|l| l[1] = "size 10 10 frames six fps 25 sites 3"), Some(2)),
        invalid("bad_number.stpl", with(&|l| l[3] = "2.00 x 0 0 0"), Some(4)),
        invalid("short_track.stpl", with(&|l| {
            l.remove(4);
        }), Some(3)),
        invalid("duplicate_id.stpl", base.replacen("site 3 ", "site 0 ", 1), Some(10)),
        invalid("id_order.stpl", base.replacen("site 7 ", "site 2 ", 1), Some(13)),
        invalid(
            "death_beyond_frames.stpl",
            base.replacen("frames 6", "frames 3", 1),
            Some(3),
        ),
        invalid("site_count.stpl", base.replacen("sites 3", "sites 4", 1), None),
    ];
    Ok(samples)
}

fn manifest(samples: &[StplSample]) -> Value {
    let entries: Vec<Value> = samples
        .iter()
        .map(|s| match &s.expect {
            Expect::Valid { frames, sites } => json!({ "file": s.name, "valid": true, "frames": frames, "sites": sites }),
            Expect::Invalid { line } => json!({ "file": s.name, "valid": false, "error_line": line }),
        })
        .collect();
    json!({ "version": SUITE_VERSION, "files": entries })
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("json values always serialize") + "\n"
}

fn compact(v: &Value) -> String {
    serde_json::to_string(v).expect("json values always serialize") + "\n"
}

/// Every file of the suite as `(relative path, contents)`.
pub fn suite_files() -> Result<Vec<(String, String)>> {
    let samples = stpl_samples()?;
    let mut files = vec![
        ("interpolation.json".to_string(), compact(&interpolation_suite()?)),
        ("stpl/manifest.json".to_string(), pretty(&manifest(&samples))),
    ];
    files.extend(samples.into_iter().map(|s| (format!("stpl/{}", s.name), s.text)));
    Ok(files)
}

pub fn write_suite(dir: &Path) -> Result<usize> {
    let files = suite_files()?;
    for (rel, text) in &files {
        let path = dir.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(path, text)?;
    }
    Ok(files.len())
}
