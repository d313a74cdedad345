//! Physics-based noise model for CMOS raw sensors.
//!
//! The noise on a raw pixel is the sum of four independent terms:
//!
//! ```text
//! D = black + K (I + Np) + Nread + Nrow + Nq
//! ```
//!
//! * `K (I + Np)`: photon shot noise, Poisson in the electron domain, scaled by the system gain `K`.
//! * `Nread`: Tukey lambda read noise with shape `λ`, per-channel location `μc` and scale `σTL`.
//! * `Nrow`: a zero-mean Gaussian offset `N(0, σr)` shared by every pixel in a row.
//! * `Nq`: uniform quantization noise on `[-q/2, q/2]`.
//!
//! The crate calibrates these parameters from flat-field and bias frames ([`calibrate`]),
//! fits their joint distribution across ISO settings and samples from it ([`model`]),
//! and synthesizes low-light raw frames ([`synth`]). [`vcam`] is a virtual camera that
//! produces calibration data from known ground truth.
//!
//! The crate is `no_std` (with `alloc`) when built without default features. The
//! `parallel` feature (default) enables rayon; results do not depend on the thread count.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod calibrate;
mod error;
pub mod fitlab;
pub mod frame;
pub mod model;
mod par;
pub mod rng;
pub mod statdist;
pub mod synth;
pub mod vcam;

pub use error::{Error, Result, Stage};
pub use frame::{CfaLayout, ChannelStats, RawFrame, SensorMeta};
pub use model::{CameraProfile, NoiseParams};
pub use rng::RandomSource;
