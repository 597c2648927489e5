//! Headless, deterministic household simulation: scenes plus vision, audio, semantics and
//! physics engines behind a single episode API.

pub mod geom;
pub mod scene;
pub mod render;
pub mod acoustics;
pub mod semantics;
pub mod physics;
pub mod env;
