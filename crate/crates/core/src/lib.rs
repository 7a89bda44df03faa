//! Spectral decoupling toolkit for ultra-high-definition image restoration.
//!
//! The crate is organised around an orthonormal 2-D DCT ([`spectral`]) and
//! builds on it:
//!
//! * [`analysis`]: zero-frequency swap and progressive band-fill experiments;
//! * [`metrics`]: PSNR, SSIM, zero-frequency PSNR and band-limited L1 losses;
//! * [`kernels`]: adaptive pooling prior, gated fusion, SimpleGate, rational
//!   activations and the frequency-windowed KAN pipeline;
//! * [`curation`]: corpus screening and selection for UHD training sets;
//! * [`degrade`]: Gaussian-noise and JPEG benchmark synthesis;
//! * [`imgio`]: planar images, PNG/PNM I/O, resize and stitch strategies.
//!
//! The `spectradec` binary exposes all of it through [`cli`].

pub mod analysis;
pub mod cli;
pub mod curation;
pub mod degrade;
mod error;
pub mod imgio;
pub mod kernels;
pub mod metrics;
mod serde_inf;
pub mod spectral;

pub use error::{Error, Result};
pub use imgio::{ColorSpace, PlanarImage};
pub use spectral::{dct2, idct2, BandMask, Spectrum};
