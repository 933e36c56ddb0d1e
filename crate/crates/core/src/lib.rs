//! Temporally coherent stippled video.
//!
//! An image sequence is turned into a time-varying set of colored, sized and
//! optionally oriented points. Every frame is a discrete centroidal Voronoi
//! tessellation of a density-adapted support point set; consecutive frames are
//! linked by probabilistic deletion and addition driven by difference images,
//! so surviving stipples keep their identity across the shot.

pub mod analysis;
pub mod attributes;
pub mod config;
pub mod conformance;
pub mod cvt;
pub mod error;
pub mod format;
pub mod pipeline;
pub mod raster;
pub mod render;
pub mod rng;
pub mod sampling;
pub mod synth;
pub mod temporal;

pub use config::{Convergence, StippleConfig};
pub use cvt::{Backend, Point};
pub use error::{Error, Result};
pub use format::{DocumentBuilder, Sample, SiteTrack, StippleDocument};
pub use raster::{DensityMap, Image};
pub use sampling::{Site, SiteKind};
pub use temporal::{advance_frame, stipple_first_frame, FrameState};
