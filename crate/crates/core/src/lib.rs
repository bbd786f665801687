//! Deterministic dataset stages for full-body selfie generation.
//!
//! - [`volumesh`]: density volumes to textured meshes.
//! - [`renderer`]: pinhole rasterization with Phong shading and distance series.
//! - [`warp`]: homography estimation, image warping and selfie simulation.
//! - [`segmap`]: semantic-map label sets, pose ranking, masks, edge targets, face alignment.
//! - [`schedule`]: forward noising and soft latent blending.
//! - [`augment`]: fine-tune composites and zero-padded resize sets.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod augment;
pub mod error;
pub mod raster;
pub mod renderer;
pub mod schedule;
pub mod segmap;
pub mod volumesh;
pub mod warp;

pub use error::{Error, Result};
