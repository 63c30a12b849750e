//! Beamforming reconstruction and resolution analysis for captured images.
//!
//! Antennas have no lens, so angle information is recovered computationally:
//! delay-and-sum beamforming turns an image column into power versus arrival
//! angle, and an inverse transform across the frequency axis turns an image
//! row into power versus propagation delay. The closed-form resolution laws
//! (λ/aperture, λ/10 surface limit, 1/bandwidth) live here too, together
//! with the monostatic object-size experiment.

use num_complex::Complex;
use std::f64::consts::TAU;
use thiserror::Error;

use crate::geometry::{NormalSide, Scene, Segment, Vec2};
use crate::receiver::{AntennaArray, RfImage};
use crate::wavefield::{
    direct_at_patches, field_at_point, solve_multibounce, unit_phase, FieldError,
};
use crate::wavelength;

#[derive(Debug, Error)]
pub enum ImagingError {
    #[error("image holds no component at {0} Hz")]
    FrequencyNotFound(f64),
    #[error("array has {array} antennas, image has {image}")]
    ArrayMismatch { array: usize, image: usize },
    #[error("range profile needs at least two frequencies")]
    TooFewFrequencies,
    #[error("image frequencies are not a uniform ascending grid")]
    NonUniformGrid,
    #[error("{0}")]
    InvalidParameter(&'static str),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Beamformed power versus steering angle at one frequency.
#[derive(Debug, Clone)]
pub struct AngularSpectrum {
    pub angles_rad: Vec<f64>,
    /// |beamformed|², normalized so the maximum is 1 (when nonzero).
    pub power: Vec<f64>,
    pub freq_hz: f64,
}

/// Power versus propagation delay for one antenna.
#[derive(Debug, Clone)]
pub struct RangeProfile {
    pub delays_s: Vec<f64>,
    pub power: Vec<f64>,
}

/// One row of the object-size experiment.
#[derive(Debug, Clone, Copy)]
pub struct SizeAngleAmplitude {
    pub size_m: f64,
    pub angle_rad: f64,
    pub amplitude: f64,
}

/// True when adjacent antennas sit farther apart than half the wavelength,
/// which aliases the angular spectrum.
pub fn spacing_aliases(array: &AntennaArray, freq_hz: f64) -> bool {
    array.max_adjacent_spacing() > wavelength(freq_hz) / 2.0 * (1.0 + 1e-12)
}

/// Delay-and-sum beamformer with far-field (plane-wave) steering.
///
/// Angles are measured from the +y axis, positive toward +x, so the steering
/// direction is u(θ) = (sinθ, cosθ) and each antenna at p contributes with
/// its plane-wave phase compensated: B(θ) = |Σ_k I(k,f)·e^{-i2π(p_k·u)/λ}|²,
/// normalized to a maximum of 1. A λ/2-violating array aliases; see
/// [`spacing_aliases`].
pub fn delay_and_sum(
    image: &RfImage,
    array: &AntennaArray,
    angles_rad: &[f64],
    freq_hz: f64,
) -> Result<AngularSpectrum, ImagingError> {
    if array.positions.len() != image.antenna_count {
        return Err(ImagingError::ArrayMismatch {
            array: array.positions.len(),
            image: image.antenna_count,
        });
    }
    let fi = image
        .freqs_hz
        .iter()
        .position(|&f| f == freq_hz)
        .ok_or(ImagingError::FrequencyNotFound(freq_hz))?;
    let lambda = wavelength(freq_hz);
    let mut power: Vec<f64> = angles_rad
        .iter()
        .map(|&theta| {
            let u = Vec2::new(theta.sin(), theta.cos());
            let mut acc = Complex::new(0.0, 0.0);
            for (k, &p) in array.positions.iter().enumerate() {
                acc += image.at(k, fi) * unit_phase(p.dot(u) / lambda);
            }
            acc.norm_sqr()
        })
        .collect();
    normalize_max(&mut power);
    Ok(AngularSpectrum {
        angles_rad: angles_rad.to_vec(),
        power,
        freq_hz,
    })
}

/// Angular resolution of an aperture: λ / aperture, in radians.
pub fn angular_resolution(wavelength_m: f64, aperture_m: f64) -> f64 {
    debug_assert!(wavelength_m > 0.0 && aperture_m > 0.0);
    wavelength_m / aperture_m
}

/// Smallest surface feature distinguishable at a frequency: λ/10, the width
/// below which a uniform patch is indistinguishable from a point source.
pub fn surface_feature_limit(freq_hz: f64) -> f64 {
    debug_assert!(freq_hz > 0.0);
    wavelength(freq_hz) / 10.0
}

/// Time-of-flight resolution for a measurement bandwidth: Δt = 1/B.
///
/// Mapping to range is a convention choice (c/B one-way, c/(2B) round-trip);
/// this returns the delay resolution itself.
pub fn tof_resolution(bandwidth_hz: f64) -> f64 {
    debug_assert!(bandwidth_hz > 0.0);
    1.0 / bandwidth_hz
}

/// Power versus delay for one antenna: inverse DFT of I(k, ·) across a
/// uniform frequency grid. Delay bins step by 1/(N·Δf) and span the
/// unambiguous window 1/Δf; power is normalized to a maximum of 1.
pub fn range_profile(image: &RfImage, antenna_index: usize) -> Result<RangeProfile, ImagingError> {
    let n = image.freqs_hz.len();
    if n < 2 {
        return Err(ImagingError::TooFewFrequencies);
    }
    let df = image.freqs_hz[1] - image.freqs_hz[0];
    if !(df > 0.0) {
        return Err(ImagingError::NonUniformGrid);
    }
    for w in image.freqs_hz.windows(2) {
        if ((w[1] - w[0]) - df).abs() > 1e-6 * df {
            return Err(ImagingError::NonUniformGrid);
        }
    }
    let bin = 1.0 / (n as f64 * df);
    let delays_s: Vec<f64> = (0..n).map(|m| m as f64 * bin).collect();
    let mut power: Vec<f64> = (0..n)
        .map(|m| {
            let mut acc = Complex::new(0.0, 0.0);
            for i in 0..n {
                // e^{+i2π·n·m/N}; the common e^{i2πf₀τ} factor drops out of
                // the magnitude.
                let angle = TAU * (i as f64) * (m as f64) / n as f64;
                acc += image.at(antenna_index, i) * Complex::from_polar(1.0, angle);
            }
            acc.norm_sqr()
        })
        .collect();
    normalize_max(&mut power);
    Ok(RangeProfile { delays_s, power })
}

/// Monostatic object-size experiment: a flat reflector parallel to the
/// array plane, `standoff_m` away, illuminated and observed from the array
/// midpoint at the origin. The object's "angle" positions it along its own
/// plane; each run records the magnitude of the single-bounce reflected
/// field back at the origin.
pub fn object_size_sweep(
    sizes_m: &[f64],
    angles_rad: &[f64],
    freq_hz: f64,
    standoff_m: f64,
) -> Result<Vec<SizeAngleAmplitude>, ImagingError> {
    if !(freq_hz > 0.0) {
        return Err(ImagingError::InvalidParameter("frequency must be positive"));
    }
    if !(standoff_m > 0.0) {
        return Err(ImagingError::InvalidParameter("standoff must be positive"));
    }
    let lambda = wavelength(freq_hz);
    let origin = Vec2::new(0.0, 0.0);
    let mut rows = Vec::with_capacity(sizes_m.len() * angles_rad.len());
    for &angle in angles_rad {
        if angle.abs() >= std::f64::consts::FRAC_PI_2 {
            return Err(ImagingError::InvalidParameter(
                "object angle must lie strictly inside ±90°",
            ));
        }
        for &size in sizes_m {
            if !(size > 0.0) {
                return Err(ImagingError::InvalidParameter("object size must be positive"));
            }
            let mid_x = standoff_m * angle.tan();
            let seg = Segment::new(
                Vec2::new(mid_x - size / 2.0, standoff_m),
                Vec2::new(mid_x + size / 2.0, standoff_m),
                Complex::new(1.0, 0.0),
                NormalSide::Right, // outward normal faces the array plane
            )
            .expect("non-degenerate by construction");
            let scene = Scene::new(vec![seg], lambda / 10.0)
                .expect("valid discretization by construction");
            let group = vec![(origin, Complex::new(1.0, 0.0))];
            let direct = direct_at_patches(&scene, freq_hz, &group);
            let pf = solve_multibounce(&scene, &direct, freq_hz, 0, 0.0)?;
            let field = field_at_point(&scene, freq_hz, &group, &pf, origin, false)
                .expect("origin is never a patch midpoint");
            rows.push(SizeAngleAmplitude {
                size_m: size,
                angle_rad: angle,
                amplitude: field.norm(),
            });
        }
    }
    Ok(rows)
}

/// Indices of strict local maxima with power at or above `floor`.
/// Endpoints count when they dominate their single neighbor.
pub fn local_maxima(power: &[f64], floor: f64) -> Vec<usize> {
    let n = power.len();
    let mut out = Vec::new();
    for i in 0..n {
        if power[i] < floor {
            continue;
        }
        let left_ok = i == 0 || power[i] > power[i - 1];
        let right_ok = i + 1 == n || power[i] > power[i + 1];
        if left_ok && right_ok {
            out.push(i);
        }
    }
    out
}

fn normalize_max(values: &mut [f64]) {
    let max = values.iter().copied().fold(0.0, f64::max);
    if max > 0.0 {
        values.iter_mut().for_each(|v| *v /= max);
    }
}
