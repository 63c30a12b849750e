//! Scene-file schema, validation, and conversion into simulator types.
//!
//! A scene file is one TOML document. Validation runs all structural checks
//! before any computation and reports failures with the path of the
//! offending field. Patch widths must respect the λ/10 wavelet criterion at
//! the highest emitted frequency unless `run.allow_wide_patches` is set.

use serde::{Deserialize, Serialize};

use rfsim_core::emitter::{Emitter, Modulation, Tone};
use rfsim_core::geometry::{NormalSide, Phasor, Scene, Segment, Vec2};
use rfsim_core::receiver::{AntennaArray, PhaseMode};
use rfsim_core::wavefield::GridSpec;
use rfsim_core::wavelength;

#[derive(Debug)]
pub struct ConfigError {
    /// Dotted path of the field that failed validation.
    pub path: String,
    pub reason: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.path, self.reason)
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(path: impl Into<String>, reason: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError {
        path: path.into(),
        reason: reason.into(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneConfig {
    pub emitter: EmitterConfig,
    #[serde(default)]
    pub segments: Vec<SegmentConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub array: Option<ArrayConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
    #[serde(default)]
    pub run: RunConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beamform: Option<BeamformConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmitterConfig {
    pub position: [f64; 2],
    pub carrier_hz: f64,
    /// Complex carrier amplitude as [re, im].
    pub amplitude: [f64; 2],
    pub modulation: ModulationConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ModulationConfig {
    Cw,
    /// Each tone is [offset_hz, re, im].
    Tones { tones: Vec<[f64; 3]> },
    /// Samples are [re, im] pairs on a uniform grid.
    Pulse {
        samples: Vec<[f64; 2]>,
        sample_rate_hz: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentConfig {
    pub a: [f64; 2],
    pub b: [f64; 2],
    /// Material coefficient as [re, im].
    pub alpha: [f64; 2],
    /// Which side of a→b the outward normal points: "left" is the 90°
    /// counter-clockwise rotation of (b − a).
    pub normal_side: SideConfig,
    /// Maximum patch width in meters; defaults to λ/10 at the highest
    /// emitted frequency.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_patch_width: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SideConfig {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ArrayConfig {
    Linear {
        start: [f64; 2],
        step: [f64; 2],
        count: usize,
        exposure_s: f64,
    },
    Explicit {
        positions: Vec<[f64; 2]>,
        exposure_s: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub origin: [f64; 2],
    pub dx: f64,
    pub dy: f64,
    pub nx: usize,
    pub ny: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub max_bounces: usize,
    pub tol: f64,
    pub mode: ModeConfig,
    pub rng_seed: u64,
    pub include_direct: bool,
    /// Accept patches wider than λ/10; the run report counts them.
    pub allow_wide_patches: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            max_bounces: 1,
            tol: 0.0,
            mode: ModeConfig::Radar,
            rng_seed: 0,
            include_direct: true,
            allow_wide_patches: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeConfig {
    Radar,
    Wifi,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BeamformConfig {
    pub angle_start_deg: f64,
    pub angle_stop_deg: f64,
    pub angle_step_deg: f64,
}

impl Default for BeamformConfig {
    fn default() -> Self {
        Self {
            angle_start_deg: -90.0,
            angle_stop_deg: 90.0,
            angle_step_deg: 0.5,
        }
    }
}

/// Everything a run needs, converted and validated.
#[derive(Debug)]
pub struct BuiltScene {
    pub scene: Scene,
    pub emitter: Emitter,
    pub array: Option<AntennaArray>,
    pub grid: Option<GridSpec>,
    /// Count of segments whose patches exceed λ/10 (only nonzero when the
    /// override flag allowed them through).
    pub wide_patch_overrides: usize,
}

fn vec2(v: [f64; 2]) -> Vec2 {
    Vec2::new(v[0], v[1])
}

fn phasor(v: [f64; 2]) -> Phasor {
    Phasor::new(v[0], v[1])
}

impl SceneConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError {
            path: "<document>".into(),
            reason: e.to_string(),
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Validate every field and build the simulator objects.
    pub fn build(&self) -> Result<BuiltScene, ConfigError> {
        let modulation = match &self.emitter.modulation {
            ModulationConfig::Cw => Modulation::ContinuousWave,
            ModulationConfig::Tones { tones } => Modulation::DiscreteTones(
                tones
                    .iter()
                    .map(|t| Tone {
                        offset_hz: t[0],
                        amplitude: Phasor::new(t[1], t[2]),
                    })
                    .collect(),
            ),
            ModulationConfig::Pulse {
                samples,
                sample_rate_hz,
            } => Modulation::Pulse {
                samples: samples.iter().map(|s| phasor(*s)).collect(),
                sample_rate_hz: *sample_rate_hz,
            },
        };
        let emitter = Emitter::new(
            vec2(self.emitter.position),
            self.emitter.carrier_hz,
            phasor(self.emitter.amplitude),
            modulation,
        )
        .map_err(|e| ConfigError {
            path: "emitter".into(),
            reason: e.to_string(),
        })?;
        let components = emitter.frequency_components().map_err(|e| ConfigError {
            path: "emitter.modulation".into(),
            reason: e.to_string(),
        })?;
        let max_freq = components
            .iter()
            .map(|c| c.freq_hz)
            .fold(f64::NEG_INFINITY, f64::max);
        let wavelet_limit = wavelength(max_freq) / 10.0;

        let mut segments = Vec::with_capacity(self.segments.len());
        let mut widths = Vec::with_capacity(self.segments.len());
        let mut overrides = 0usize;
        for (i, sc) in self.segments.iter().enumerate() {
            let side = match sc.normal_side {
                SideConfig::Left => NormalSide::Left,
                SideConfig::Right => NormalSide::Right,
            };
            let seg = Segment::new(vec2(sc.a), vec2(sc.b), phasor(sc.alpha), side).map_err(
                |e| ConfigError {
                    path: format!("segments[{i}]"),
                    reason: e.to_string(),
                },
            )?;
            let width = sc.max_patch_width.unwrap_or(wavelet_limit);
            if !(width > 0.0) {
                return err(
                    format!("segments[{i}].max_patch_width"),
                    "must be positive",
                );
            }
            if width > wavelet_limit * (1.0 + 1e-12) {
                if self.run.allow_wide_patches {
                    overrides += 1;
                } else {
                    return err(
                        format!("segments[{i}].max_patch_width"),
                        format!(
                            "{width} m exceeds the wavelet limit λ/10 = {wavelet_limit:.6} m \
                             at {max_freq} Hz; set run.allow_wide_patches = true to override"
                        ),
                    );
                }
            }
            segments.push(seg);
            widths.push(width);
        }
        let scene = Scene::with_patch_widths(segments, &widths).map_err(|e| ConfigError {
            path: "segments".into(),
            reason: e.to_string(),
        })?;

        let array = match &self.array {
            None => None,
            Some(ArrayConfig::Linear {
                start,
                step,
                count,
                exposure_s,
            }) => Some(
                AntennaArray::linear(vec2(*start), vec2(*step), *count, *exposure_s).map_err(
                    |e| ConfigError {
                        path: "array".into(),
                        reason: e.to_string(),
                    },
                )?,
            ),
            Some(ArrayConfig::Explicit {
                positions,
                exposure_s,
            }) => Some(
                AntennaArray::new(positions.iter().map(|p| vec2(*p)).collect(), *exposure_s)
                    .map_err(|e| ConfigError {
                        path: "array".into(),
                        reason: e.to_string(),
                    })?,
            ),
        };

        let grid = match &self.grid {
            None => None,
            Some(g) => {
                if !(g.dx > 0.0) || !(g.dy > 0.0) {
                    return err("grid", "dx and dy must be positive");
                }
                if g.nx == 0 || g.ny == 0 {
                    return err("grid", "nx and ny must be at least 1");
                }
                Some(GridSpec {
                    origin: vec2(g.origin),
                    dx: g.dx,
                    dy: g.dy,
                    nx: g.nx,
                    ny: g.ny,
                })
            }
        };

        if !(self.run.tol >= 0.0) {
            return err("run.tol", "must be non-negative");
        }
        if let Some(b) = &self.beamform {
            if !(b.angle_step_deg > 0.0) {
                return err("beamform.angle_step_deg", "must be positive");
            }
            if b.angle_stop_deg < b.angle_start_deg {
                return err("beamform", "angle_stop_deg is below angle_start_deg");
            }
        }

        Ok(BuiltScene {
            scene,
            emitter,
            array,
            grid,
            wide_patch_overrides: overrides,
        })
    }

    pub fn phase_mode(&self) -> PhaseMode {
        match self.run.mode {
            ModeConfig::Radar => PhaseMode::Radar,
            ModeConfig::Wifi => PhaseMode::Wifi,
        }
    }
}
