//! Frequency-domain simulation of radio-frequency wave fields in 2D scenes.
//!
//! The simulator works entirely with complex phasors: every wave quantity is
//! the complex amplitude of a single-frequency signal, with the carrier factor
//! e^{i2πft} carried implicitly and never stored. A simulation run proceeds
//! through five stages:
//!
//! 1. [`emitter`] — source models (continuous wave, discrete tones, pulses)
//!    and their decomposition into per-frequency components,
//! 2. [`wavefield`] — free-space spherical propagation,
//! 3. [`geometry`] — scenes of reflecting segments discretized into
//!    sub-wavelength patches that re-radiate as wavelet sources,
//! 4. [`wavefield::solve_multibounce`] — the iterative patch-to-patch
//!    exchange for multiply-reflected fields,
//! 5. [`receiver`] — antenna arrays and demodulation into complex images,
//!    analyzed by [`imaging`] (beamforming, range profiles, resolution laws).
//!
//! All operations are pure functions over immutable data; parallel kernels
//! use fixed accumulation orders so results are identical for any thread
//! count.
//!
//! ```
//! use rfsim_core::emitter::{Emitter, Modulation};
//! use rfsim_core::geometry::{NormalSide, Phasor, Scene, Segment, Vec2};
//! use rfsim_core::receiver::{capture, AntennaArray, CaptureOptions};
//!
//! // A half-meter reflector three meters above a small receiving array,
//! // lit by a 2.4 GHz continuous wave.
//! let wall = Segment::new(
//!     Vec2::new(-0.25, 3.0),
//!     Vec2::new(0.25, 3.0),
//!     Phasor::new(0.9, 0.0),
//!     NormalSide::Right,
//! )?;
//! let scene = Scene::new(vec![wall], 0.0124)?;
//! let emitter = Emitter::new(
//!     Vec2::new(-0.6, 0.0),
//!     2.4e9,
//!     Phasor::new(1.0, 0.0),
//!     Modulation::ContinuousWave,
//! )?;
//! let array = AntennaArray::linear(Vec2::new(-0.2, 0.0), Vec2::new(0.05, 0.0), 9, 1e-6)?;
//! let image = capture(&scene, &emitter, &array, &CaptureOptions::default())?;
//! assert_eq!(image.freqs_hz, vec![2.4e9]);
//! assert!(image.at(0, 0).norm() > 0.0);
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

// Validation deliberately writes `!(x > 0.0)` so NaN fails the check too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod emitter;
pub mod geometry;
pub mod imaging;
pub mod receiver;
pub mod wavefield;

pub use emitter::{Emitter, FrequencyComponent, Modulation, Tone};
pub use geometry::{
    discretize_segment, emission_cosine, visible, NormalSide, Patch, Phasor, Scene, Segment, Vec2,
    SPEED_OF_LIGHT,
};
pub use receiver::{AntennaArray, PhaseMode, RfImage};
pub use wavefield::{FieldMap, GridSpec, PatchField};

/// Wavelength in meters for a frequency in Hz, using the exact speed of light.
pub fn wavelength(freq_hz: f64) -> f64 {
    geometry::SPEED_OF_LIGHT / freq_hz
}
