//! RF source models and their decomposition into per-frequency phasors.
//!
//! Every emitter produces A · e^{i2πf_c t} · x(t): a complex carrier
//! amplitude, a carrier frequency, and a modulating signal. Because the
//! scene contains nothing that shifts frequency, each Fourier component of
//! the modulation propagates independently; the rest of the simulator only
//! ever sees [`FrequencyComponent`]s.

use num_complex::Complex;
use std::f64::consts::TAU;
use thiserror::Error;

use crate::geometry::{Phasor, Vec2, SPEED_OF_LIGHT};

/// Lowest legal carrier, Hz.
pub const CARRIER_MIN_HZ: f64 = 3e3;
/// Highest legal carrier, Hz.
pub const CARRIER_MAX_HZ: f64 = 300e9;
/// Resource guard for pulse spectra.
pub const MAX_PULSE_SAMPLES: usize = 1 << 24;

#[derive(Debug, Error, PartialEq)]
pub enum EmitterError {
    #[error("carrier {0} Hz outside the RF band [3 kHz, 300 GHz]")]
    CarrierOutOfBand(f64),
    #[error("discrete-tone emitter needs at least one tone")]
    NoTones,
    #[error("pulse sample rate must be positive")]
    BadSampleRate,
    #[error("pulse has no samples")]
    EmptyPulse,
    #[error("pulse of {0} samples exceeds the {MAX_PULSE_SAMPLES}-sample limit")]
    PulseTooLong(usize),
    #[error("component frequency {0} Hz is not positive")]
    NonPositiveFrequency(f64),
    #[error("amplitude or offset is not finite")]
    NonFinite,
}

/// One tone of a discrete-frequency emitter, offset relative to the carrier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tone {
    pub offset_hz: f64,
    pub amplitude: Phasor,
}

/// The modulating signal x(t).
#[derive(Debug, Clone, PartialEq)]
pub enum Modulation {
    /// x(t) = 1: a single frequency at the carrier.
    ContinuousWave,
    /// x(t) = Σ amp_k · e^{i2π offset_k t}.
    DiscreteTones(Vec<Tone>),
    /// Sampled complex baseband pulse, held at the nearest sample and zero
    /// outside the sampled support.
    Pulse {
        samples: Vec<Phasor>,
        sample_rate_hz: f64,
    },
}

/// An RF source at a fixed position.
#[derive(Debug, Clone, PartialEq)]
pub struct Emitter {
    pub position: Vec2,
    pub carrier_hz: f64,
    pub amplitude: Phasor,
    pub modulation: Modulation,
}

/// A single frequency of the emitted signal with its share of the amplitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyComponent {
    pub freq_hz: f64,
    pub amplitude: Phasor,
    pub wavelength_m: f64,
}

impl FrequencyComponent {
    pub fn new(freq_hz: f64, amplitude: Phasor) -> Result<Self, EmitterError> {
        if !(freq_hz > 0.0) {
            return Err(EmitterError::NonPositiveFrequency(freq_hz));
        }
        Ok(Self {
            freq_hz,
            amplitude,
            wavelength_m: SPEED_OF_LIGHT / freq_hz,
        })
    }
}

impl Emitter {
    pub fn new(
        position: Vec2,
        carrier_hz: f64,
        amplitude: Phasor,
        modulation: Modulation,
    ) -> Result<Self, EmitterError> {
        if !position.is_finite() || !amplitude.re.is_finite() || !amplitude.im.is_finite() {
            return Err(EmitterError::NonFinite);
        }
        if !(CARRIER_MIN_HZ..=CARRIER_MAX_HZ).contains(&carrier_hz) {
            return Err(EmitterError::CarrierOutOfBand(carrier_hz));
        }
        match &modulation {
            Modulation::ContinuousWave => {}
            Modulation::DiscreteTones(tones) => {
                if tones.is_empty() {
                    return Err(EmitterError::NoTones);
                }
                for t in tones {
                    if !t.offset_hz.is_finite()
                        || !t.amplitude.re.is_finite()
                        || !t.amplitude.im.is_finite()
                    {
                        return Err(EmitterError::NonFinite);
                    }
                }
            }
            Modulation::Pulse {
                samples,
                sample_rate_hz,
            } => {
                if samples.is_empty() {
                    return Err(EmitterError::EmptyPulse);
                }
                if !(*sample_rate_hz > 0.0) {
                    return Err(EmitterError::BadSampleRate);
                }
            }
        }
        Ok(Self {
            position,
            carrier_hz,
            amplitude,
            modulation,
        })
    }

    /// The time-domain signal A · e^{i2πf_c t} · x(t).
    pub fn emitted_signal(&self, t: f64) -> Phasor {
        let carrier = Complex::from_polar(1.0, TAU * self.carrier_hz * t);
        let x = match &self.modulation {
            Modulation::ContinuousWave => Complex::new(1.0, 0.0),
            Modulation::DiscreteTones(tones) => tones
                .iter()
                .map(|tone| tone.amplitude * Complex::from_polar(1.0, TAU * tone.offset_hz * t))
                .sum(),
            Modulation::Pulse {
                samples,
                sample_rate_hz,
            } => {
                let idx = (t * sample_rate_hz).round();
                if idx >= 0.0 && (idx as usize) < samples.len() {
                    samples[idx as usize]
                } else {
                    Complex::new(0.0, 0.0)
                }
            }
        };
        self.amplitude * carrier * x
    }

    /// Fourier decomposition of the emitted signal, sorted by frequency.
    ///
    /// A continuous wave yields one component at the carrier; discrete tones
    /// yield one component per tone at carrier + offset; a pulse yields one
    /// component per sample at carrier + k·(rate/N) for k in the signed
    /// baseband range, scaled so that inverse synthesis reproduces the
    /// samples.
    pub fn frequency_components(&self) -> Result<Vec<FrequencyComponent>, EmitterError> {
        let mut out = match &self.modulation {
            Modulation::ContinuousWave => {
                vec![FrequencyComponent::new(self.carrier_hz, self.amplitude)?]
            }
            Modulation::DiscreteTones(tones) => tones
                .iter()
                .map(|t| {
                    FrequencyComponent::new(
                        self.carrier_hz + t.offset_hz,
                        self.amplitude * t.amplitude,
                    )
                })
                .collect::<Result<Vec<_>, _>>()?,
            Modulation::Pulse {
                samples,
                sample_rate_hz,
            } => {
                if samples.len() > MAX_PULSE_SAMPLES {
                    return Err(EmitterError::PulseTooLong(samples.len()));
                }
                let n = samples.len();
                let spectrum = dft_forward(samples);
                let df = sample_rate_hz / n as f64;
                spectrum
                    .into_iter()
                    .enumerate()
                    .map(|(k, amp)| {
                        // Map bin k to the signed baseband frequency.
                        let k_signed = if k < n.div_ceil(2) {
                            k as i64
                        } else {
                            k as i64 - n as i64
                        };
                        FrequencyComponent::new(
                            self.carrier_hz + k_signed as f64 * df,
                            self.amplitude * amp,
                        )
                    })
                    .collect::<Result<Vec<_>, _>>()?
            }
        };
        out.sort_by(|a, b| a.freq_hz.total_cmp(&b.freq_hz));
        Ok(out)
    }
}

/// Forward DFT normalized by 1/N: X_k = (1/N) Σ_n x_n e^{-i2πkn/N}.
///
/// Radix-2 when the length is a power of two, direct evaluation otherwise
/// (pulse test vectors are short; the emitter constructor caps the length).
fn dft_forward(samples: &[Phasor]) -> Vec<Phasor> {
    let n = samples.len();
    let scale = 1.0 / n as f64;
    if n.is_power_of_two() && n > 1 {
        let mut buf = samples.to_vec();
        fft_radix2(&mut buf, -1.0);
        buf.iter_mut().for_each(|v| *v *= scale);
        buf
    } else {
        (0..n)
            .map(|k| {
                let mut acc = Complex::new(0.0, 0.0);
                for (i, &x) in samples.iter().enumerate() {
                    let angle = -TAU * (k as f64) * (i as f64) / n as f64;
                    acc += x * Complex::from_polar(1.0, angle);
                }
                acc * scale
            })
            .collect()
    }
}

/// In-place iterative radix-2 FFT; `sign` is -1 for forward, +1 for inverse.
fn fft_radix2(buf: &mut [Phasor], sign: f64) {
    let n = buf.len();
    debug_assert!(n.is_power_of_two());
    // Bit-reversal permutation.
    let mut j = 0usize;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            buf.swap(i, j);
        }
    }
    let mut len = 2;
    while len <= n {
        let ang = sign * TAU / len as f64;
        let w_len = Complex::from_polar(1.0, ang);
        for chunk in buf.chunks_mut(len) {
            let mut w = Complex::new(1.0, 0.0);
            let half = len / 2;
            for i in 0..half {
                let u = chunk[i];
                let v = chunk[i + half] * w;
                chunk[i] = u + v;
                chunk[i + half] = u - v;
                w *= w_len;
            }
        }
        len <<= 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const F24: f64 = 2.4e9;

    fn cw(amplitude: Phasor) -> Emitter {
        Emitter::new(
            Vec2::new(0.0, 0.0),
            F24,
            amplitude,
            Modulation::ContinuousWave,
        )
        .unwrap()
    }

    #[test]
    fn cw_signal_at_zero_and_quarter_period() {
        let e = cw(Phasor::new(1.0, 0.0));
        let v0 = e.emitted_signal(0.0);
        assert!((v0 - Phasor::new(1.0, 0.0)).norm() < 1e-12);
        let v_quarter = e.emitted_signal(1.0 / (4.0 * F24));
        assert!((v_quarter - Phasor::new(0.0, 1.0)).norm() < 1e-9);
    }

    #[test]
    fn tone_sum_cancels_at_half_period() {
        // Tones at 0 Hz and 10 MHz offsets, evaluated 50 ns in: the second
        // tone sits at e^{iπ} and cancels the first regardless of carrier.
        let e = Emitter::new(
            Vec2::new(0.0, 0.0),
            F24,
            Phasor::new(1.0, 0.0),
            Modulation::DiscreteTones(vec![
                Tone {
                    offset_hz: 0.0,
                    amplitude: Phasor::new(1.0, 0.0),
                },
                Tone {
                    offset_hz: 10.0e6,
                    amplitude: Phasor::new(1.0, 0.0),
                },
            ]),
        )
        .unwrap();
        let t = 50.0e-9;
        let v = e.emitted_signal(t);
        assert!(v.norm() < 1e-9, "tone pair should cancel, got {v}");
    }

    #[test]
    fn pulse_nearest_sample_hold_and_support() {
        let samples = vec![
            Phasor::new(1.0, 0.0),
            Phasor::new(2.0, 0.0),
            Phasor::new(0.0, -1.0),
        ];
        let rate = 1.0e9;
        let e = Emitter::new(
            Vec2::new(0.0, 0.0),
            F24,
            Phasor::new(1.0, 0.0),
            Modulation::Pulse {
                samples: samples.clone(),
                sample_rate_hz: rate,
            },
        )
        .unwrap();
        // At exact sample instants the carrier phase is f_c/rate cycles per
        // sample; divide it off to recover the raw samples.
        for (i, &s) in samples.iter().enumerate() {
            let t = i as f64 / rate;
            let carrier = Complex::from_polar(1.0, TAU * F24 * t);
            let v = e.emitted_signal(t) / carrier;
            assert!((v - s).norm() < 1e-9);
        }
        // Outside the support x(t) = 0.
        assert_eq!(e.emitted_signal(10.0 / rate).norm(), 0.0);
        assert_eq!(e.emitted_signal(-1.0 / rate).norm(), 0.0);
    }

    #[test]
    fn cw_component_matches_expected_wavelength() {
        let comps = cw(Phasor::new(1.0, 0.0)).frequency_components().unwrap();
        assert_eq!(comps.len(), 1);
        assert_eq!(comps[0].freq_hz, F24);
        // c / 2.4 GHz = 0.12492... m, commonly quoted as 12.5 cm.
        assert!((comps[0].wavelength_m - 0.124_913_524_166_666_67).abs() < 1e-12);
        assert!(
            (comps[0].wavelength_m * comps[0].freq_hz - SPEED_OF_LIGHT).abs() / SPEED_OF_LIGHT
                < 1e-9
        );
    }

    #[test]
    fn tone_components_scale_with_carrier_amplitude() {
        let a = Phasor::new(0.5, -1.5);
        let tones = vec![
            Tone {
                offset_hz: -5e6,
                amplitude: Phasor::new(1.0, 0.0),
            },
            Tone {
                offset_hz: 0.0,
                amplitude: Phasor::new(0.0, 2.0),
            },
            Tone {
                offset_hz: 5e6,
                amplitude: Phasor::new(-1.0, 1.0),
            },
        ];
        let e = Emitter::new(
            Vec2::new(0.0, 0.0),
            F24,
            a,
            Modulation::DiscreteTones(tones.clone()),
        )
        .unwrap();
        let comps = e.frequency_components().unwrap();
        assert_eq!(comps.len(), 3);
        for (c, t) in comps.iter().zip(&tones) {
            assert_eq!(c.freq_hz, F24 + t.offset_hz);
            assert!((c.amplitude - a * t.amplitude).norm() < 1e-12);
        }
    }

    #[test]
    fn impulse_pulse_has_flat_spectrum() {
        let mut samples = vec![Phasor::new(0.0, 0.0); 8];
        samples[0] = Phasor::new(1.0, 0.0);
        let e = Emitter::new(
            Vec2::new(0.0, 0.0),
            F24,
            Phasor::new(2.0, 0.0),
            Modulation::Pulse {
                samples,
                sample_rate_hz: 1e8,
            },
        )
        .unwrap();
        let comps = e.frequency_components().unwrap();
        assert_eq!(comps.len(), 8);
        for c in &comps {
            assert!((c.amplitude - Phasor::new(0.25, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn pulse_spectrum_round_trips_to_samples() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for &n in &[5usize, 8, 16, 21] {
            let samples: Vec<Phasor> = (0..n)
                .map(|_| Phasor::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let rate = 2.0e8;
            let e = Emitter::new(
                Vec2::new(0.0, 0.0),
                F24,
                Phasor::new(1.0, 0.0),
                Modulation::Pulse {
                    samples: samples.clone(),
                    sample_rate_hz: rate,
                },
            )
            .unwrap();
            let comps = e.frequency_components().unwrap();
            assert_eq!(comps.len(), n);
            // Inverse synthesis at the sample instants must reproduce
            // emitted_signal(t) / e^{i2πf_c t}.
            for (i, &sample) in samples.iter().enumerate() {
                let t = i as f64 / rate;
                let synth: Phasor = comps
                    .iter()
                    .map(|c| {
                        c.amplitude * Complex::from_polar(1.0, TAU * (c.freq_hz - F24) * t)
                    })
                    .sum();
                assert!(
                    (synth - sample).norm() < 1e-9,
                    "n={n} sample {i}: {synth} vs {sample:?}"
                );
            }
        }
    }

    #[test]
    fn components_are_linear_in_amplitude() {
        let k = Phasor::new(-0.3, 2.0);
        let base = cw(Phasor::new(1.0, 0.0)).frequency_components().unwrap();
        let scaled = cw(k).frequency_components().unwrap();
        assert!((scaled[0].amplitude - base[0].amplitude * k).norm() < 1e-15);
    }

    #[test]
    fn carrier_band_is_enforced() {
        let make = |f| {
            Emitter::new(
                Vec2::new(0.0, 0.0),
                f,
                Phasor::new(1.0, 0.0),
                Modulation::ContinuousWave,
            )
        };
        assert!(make(2.9e3).is_err());
        assert!(make(3e3).is_ok());
        assert!(make(300e9).is_ok());
        assert!(make(301e9).is_err());
    }

    #[test]
    fn oversized_pulse_is_rejected_before_any_transform() {
        let e = Emitter::new(
            Vec2::new(0.0, 0.0),
            F24,
            Phasor::new(1.0, 0.0),
            Modulation::Pulse {
                samples: vec![Phasor::new(0.0, 0.0); MAX_PULSE_SAMPLES + 1],
                sample_rate_hz: 1e9,
            },
        )
        .unwrap();
        assert_eq!(
            e.frequency_components(),
            Err(EmitterError::PulseTooLong(MAX_PULSE_SAMPLES + 1))
        );
    }

    #[test]
    fn component_count_matches_modulation() {
        assert_eq!(
            cw(Phasor::new(1.0, 0.0))
                .frequency_components()
                .unwrap()
                .len(),
            1
        );
        let tones: Vec<Tone> = (0..7)
            .map(|i| Tone {
                offset_hz: i as f64 * 1e6,
                amplitude: Phasor::new(1.0, 0.0),
            })
            .collect();
        let e = Emitter::new(
            Vec2::new(0.0, 0.0),
            F24,
            Phasor::new(1.0, 0.0),
            Modulation::DiscreteTones(tones),
        )
        .unwrap();
        assert_eq!(e.frequency_components().unwrap().len(), 7);
        let e = Emitter::new(
            Vec2::new(0.0, 0.0),
            F24,
            Phasor::new(1.0, 0.0),
            Modulation::Pulse {
                samples: vec![Phasor::new(1.0, 0.0); 12],
                sample_rate_hz: 1e8,
            },
        )
        .unwrap();
        assert_eq!(e.frequency_components().unwrap().len(), 12);
    }
}
