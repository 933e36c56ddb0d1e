use std::f64::consts::FRAC_PI_2;

use proptest::prelude::*;

use stipple::format::FormatError;
use stipple::{Sample, SiteKind, SiteTrack, StippleDocument};

fn sample(frequency: bool) -> impl Strategy<Value = Sample> {
    let theta = if frequency {
        proptest::option::of(-FRAC_PI_2..=FRAC_PI_2).boxed()
    } else {
        Just(None).boxed()
    };
    (-5.0..300.0f64, -5.0..300.0f64, any::<[u8; 3]>(), theta).prop_map(|(x, y, c, t)| Sample::new(x, y, c, t))
}

fn document() -> impl Strategy<Value = StippleDocument> {
    (1usize..400, 1usize..400, 1u64..12, 1.0..120.0f64).prop_flat_map(|(w, h, frames, fps)| {
        let track = (0..frames, any::<bool>(), 1u64..4).prop_flat_map(move |(birth, freq, gap)| {
            let len = 1..=(frames - birth) as usize;
            (Just(birth), Just(freq), Just(gap), proptest::collection::vec(sample(freq), len))
        });
        proptest::collection::vec(track, 0..30).prop_map(move |raw| {
            let mut id = 0;
            let tracks = raw
                .into_iter()
                .map(|(birth, freq, gap, samples)| {
                    id += gap;
                    SiteTrack {
                        id,
                        kind: if freq { SiteKind::Frequency } else { SiteKind::Tone },
                        birth,
                        samples,
                    }
                })
                .collect();
            StippleDocument {
                width: w,
                height: h,
                frame_count: frames,
                fps: (fps * 1000.0).round() / 1000.0,
                tracks,
            }
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn write_read_write_is_byte_identical(doc in document()) {
        let text = doc.to_text().unwrap();
        let back = StippleDocument::parse(&text).unwrap();
        prop_assert_eq!(&back, &doc);
        prop_assert_eq!(back.to_text().unwrap(), text);
    }

    #[test]
    fn truncation_is_reported_with_a_line(doc in document(), cut in 0.0..1.0f64) {
        let text = doc.to_text().unwrap();
        let lines: Vec<&str> = text.lines().collect();
        prop_assume!(lines.len() > 2);
        // drop one sample line somewhere after the header
        let k = 2 + ((lines.len() - 2) as f64 * cut) as usize;
        prop_assume!(!lines[k].starts_with("site "));
        let mut shorter = lines.clone();
        shorter.remove(k);
        match StippleDocument::parse(&(shorter.join("\n") + "\n")) {
            Err(e) => prop_assert!(e.line().is_some() || matches!(e, FormatError::SiteCount { .. }), "{}", e),
            Ok(d) => prop_assert!(false, "accepted a truncated document: {:?}", d.tracks.len()),
        }
    }
}

#[test]
fn header_fields_are_checked() {
    for (text, line) in [
        ("", 1),
        ("STPL 1\n", 2),
        ("STPL 1\nsize 1 1 frames 1 fps 0 sites 0\n", 2),
        ("STPL 1\nsize 1 1 frames 1 fps 25 sites 1\nsite 0 kind edge birth 0 death 1\n0 0 0 0 0\n", 3),
        ("STPL 1\nsize 1 1 frames 1 fps 25 sites 1\nsite 0 kind tone birth 0 death 1\n0 0 0 0 300\n", 4),
    ] {
        let e = StippleDocument::parse(text).unwrap_err();
        assert_eq!(e.line(), Some(line), "{text:?}: {e}");
    }
}
