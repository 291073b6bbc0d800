//! Depth sonification and point-cloud segmentation.
//!
//! - [`cloud`]: point clouds, depth frames, PLY and raw depth readers,
//!   synthetic scenes.
//! - [`segment`]: chunk-cache floodfill segmentation and the brute-force
//!   reference it is checked against.
//! - [`sonify`]: depth frames to panned, timed MIDI notes.
//! - [`midi`]: Standard MIDI File writer and a WAV preview renderer.
//! - [`metrics`]: Pearson correlation and detection accuracy.
//! - [`bench`]: operation-count benchmark of the segmenters.

pub mod bench;
pub mod cloud;
pub mod metrics;
pub mod midi;
pub mod segment;
pub mod sonify;
