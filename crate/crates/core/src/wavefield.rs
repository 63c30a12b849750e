//! Free-space propagation, wavelet-patch response, superposition rendering,
//! and the iterative multi-bounce solve.
//!
//! Everything here is per frequency and in phasor form. Propagation over a
//! distance r multiplies a phasor by (1/r)·e^{-i2πr/λ}; a patch re-emits the
//! field incident on it weighted by α·S·cosθ toward each target. Fields on a
//! grid are plain phasor sums over sources and patches, which is what makes
//! reflection, diffraction and interference come out of the same few lines.
//!
//! Determinism: grid points, antennas and exchange rows may be evaluated in
//! parallel, but each individual sum always runs in the same sequential
//! order, so outputs are bit-identical for any thread count.

use num_complex::Complex;
use rayon::prelude::*;
use std::f64::consts::TAU;
use thiserror::Error;

use crate::emitter::FrequencyComponent;
use crate::geometry::{emission_cosine, visible, Patch, Phasor, Scene, Vec2};
use crate::wavelength;

/// Points closer than this to a source or patch midpoint are singular.
const SINGULAR_EPS: f64 = 1e-9;

/// Largest patch count for which the exchange matrix is materialized; above
/// this the bounce products are accumulated matrix-free.
const DENSE_PATCH_LIMIT: usize = 4096;

/// Bounce terms larger than this multiple of the direct field abort the
/// Neumann iteration.
const DIVERGENCE_FACTOR: f64 = 1e6;

#[derive(Debug, Error, PartialEq)]
pub enum FieldError {
    #[error("source and target coincide")]
    SingularPoint,
    #[error("frequency must be positive, got {0}")]
    BadFrequency(f64),
    #[error("direct field has {got} entries, scene has {want} patches")]
    PatchCountMismatch { got: usize, want: usize },
    #[error("multi-bounce series diverged after {bounces} bounces (term {magnitude:.3e})")]
    Diverged { bounces: usize, magnitude: f64 },
    #[error("grid is empty")]
    EmptyGrid,
    #[error("grid spacing must be positive")]
    BadGridSpacing,
}

/// e^{-i2π·cycles}, with the integer cycles removed before the
/// trigonometry so large path lengths keep full phase precision.
#[inline]
pub(crate) fn unit_phase(cycles: f64) -> Phasor {
    let (s, c) = (TAU * cycles.fract()).sin_cos();
    Complex::new(c, -s)
}

/// Spherical spreading of a phasor from `source` to `target`: amplitude
/// falls off as 1/r and the phase advances by -2πr/λ.
pub fn propagate(
    amplitude: Phasor,
    source: Vec2,
    target: Vec2,
    freq_hz: f64,
) -> Result<Phasor, FieldError> {
    if !(freq_hz > 0.0) {
        return Err(FieldError::BadFrequency(freq_hz));
    }
    let r = source.distance_to(target);
    if r <= SINGULAR_EPS {
        return Err(FieldError::SingularPoint);
    }
    let lambda = wavelength(freq_hz);
    Ok(amplitude * unit_phase(r / lambda) * (1.0 / r))
}

/// Field contributed at `target` by a wavelet patch holding aggregate
/// incident amplitude `incident`: incident · α · S · cosθ · (1/R)·e^{-i2πR/λ},
/// with cosθ clamped to the front hemisphere.
pub fn patch_response(
    patch: &Patch,
    incident: Phasor,
    target: Vec2,
    freq_hz: f64,
) -> Result<Phasor, FieldError> {
    if !(freq_hz > 0.0) {
        return Err(FieldError::BadFrequency(freq_hz));
    }
    let r = patch.midpoint.distance_to(target);
    if r <= SINGULAR_EPS {
        return Err(FieldError::SingularPoint);
    }
    let cos = emission_cosine(patch, target).map_err(|_| FieldError::SingularPoint)?;
    if cos == 0.0 {
        return Ok(Complex::new(0.0, 0.0));
    }
    let lambda = wavelength(freq_hz);
    Ok(incident * patch.alpha * patch.width * cos * unit_phase(r / lambda) * (1.0 / r))
}

/// Numerically integrate e^{i2πs·sinθ/λ} over a patch of the given width.
///
/// This is the exact finite-width aperture factor whose flat-patch limit is
/// the wavelet approximation; the closed form is W·sinc(πW·sinθ/λ). Used as
/// a validation oracle for the λ/10 patch-size criterion. Composite 4-point
/// Gauss-Legendre with at least `quadrature_points` evaluations.
pub fn exact_patch_integral(
    width: f64,
    theta: f64,
    freq_hz: f64,
    quadrature_points: usize,
) -> Phasor {
    debug_assert!(quadrature_points >= 2);
    // 4-point Gauss-Legendre nodes and weights on [-1, 1].
    const NODES: [f64; 4] = [
        -0.861_136_311_594_052_6,
        -0.339_981_043_584_856_3,
        0.339_981_043_584_856_3,
        0.861_136_311_594_052_6,
    ];
    const WEIGHTS: [f64; 4] = [
        0.347_854_845_137_453_86,
        0.652_145_154_862_546_1,
        0.652_145_154_862_546_1,
        0.347_854_845_137_453_86,
    ];
    let k = TAU * theta.sin() / wavelength(freq_hz);
    let subdivisions = quadrature_points.div_ceil(4).max(1);
    let h = width / subdivisions as f64;
    let mut acc = Complex::new(0.0, 0.0);
    for i in 0..subdivisions {
        let center = -width / 2.0 + (i as f64 + 0.5) * h;
        for (node, weight) in NODES.iter().zip(WEIGHTS) {
            let s = center + 0.5 * h * node;
            acc += Complex::from_polar(1.0, k * s) * weight;
        }
    }
    acc * (0.5 * h)
}

/// Per-patch field state at one frequency: the aggregate incident amplitude
/// and the re-emission strength α·S·incident (the source term before the
/// cosθ directivity is applied toward a particular target).
#[derive(Debug, Clone)]
pub struct PatchField {
    pub freq_hz: f64,
    pub incident: Vec<Phasor>,
    pub emitted: Vec<Phasor>,
}

/// Patch-to-patch coupling at one frequency.
///
/// Entry (k, j) is the factor mapping the field incident on patch j to the
/// contribution it sends to patch k: g·ρ·e^{-i2πd/λ} with g = 1/d when k is
/// visible from j (else 0) and ρ = α_j·S_j·cosθ_kj, the cosine measured at
/// the emitting patch j and clamped to its front hemisphere. The diagonal is
/// zero.
#[derive(Debug, Clone)]
pub struct ExchangeMatrix {
    pub freq_hz: f64,
    n: usize,
    entries: Vec<Phasor>,
}

impl ExchangeMatrix {
    pub fn build(scene: &Scene, freq_hz: f64) -> Result<Self, FieldError> {
        if !(freq_hz > 0.0) {
            return Err(FieldError::BadFrequency(freq_hz));
        }
        let n = scene.patches.len();
        let entries: Vec<Phasor> = (0..n)
            .into_par_iter()
            .flat_map_iter(|k| (0..n).map(move |j| (k, j)))
            .map(|(k, j)| coupling(scene, freq_hz, k, j))
            .collect();
        Ok(Self {
            freq_hz,
            n,
            entries,
        })
    }

    pub fn patch_count(&self) -> usize {
        self.n
    }

    pub fn entry(&self, k: usize, j: usize) -> Phasor {
        self.entries[k * self.n + j]
    }

    /// One exchange application: out[k] = Σ_j entry(k,j)·field[j].
    fn apply(&self, field: &[Phasor]) -> Vec<Phasor> {
        (0..self.n)
            .into_par_iter()
            .map(|k| {
                let row = &self.entries[k * self.n..(k + 1) * self.n];
                let mut acc = Complex::new(0.0, 0.0);
                for (e, f) in row.iter().zip(field) {
                    acc += e * f;
                }
                acc
            })
            .collect()
    }
}

/// Coupling factor from patch j to patch k (0 on the diagonal, when j does
/// not see k, or when k lies behind j).
fn coupling(scene: &Scene, freq_hz: f64, k: usize, j: usize) -> Phasor {
    if k == j {
        return Complex::new(0.0, 0.0);
    }
    let pk = &scene.patches[k];
    let pj = &scene.patches[j];
    let d = pj.midpoint.distance_to(pk.midpoint);
    if d <= SINGULAR_EPS {
        return Complex::new(0.0, 0.0);
    }
    let cos = match emission_cosine(pj, pk.midpoint) {
        Ok(c) => c,
        Err(_) => return Complex::new(0.0, 0.0),
    };
    if cos == 0.0 || !visible(scene, pj.midpoint, pk.midpoint) {
        return Complex::new(0.0, 0.0);
    }
    pj.alpha * pj.width * cos * unit_phase(d / wavelength(freq_hz)) * (1.0 / d)
}

/// Matrix-free version of one exchange application, used above the dense
/// size limit.
fn apply_matrix_free(scene: &Scene, freq_hz: f64, field: &[Phasor]) -> Vec<Phasor> {
    let n = scene.patches.len();
    (0..n)
        .into_par_iter()
        .map(|k| {
            let mut acc = Complex::new(0.0, 0.0);
            for (j, f) in field.iter().enumerate() {
                if f.re == 0.0 && f.im == 0.0 {
                    continue;
                }
                acc += coupling(scene, freq_hz, k, j) * f;
            }
            acc
        })
        .collect()
}

/// Resolve multiply-reflected fields by summing the exchange series
/// L = E + M·E + M²·E + … starting from the direct illumination E.
///
/// The series stops after `max_bounces` terms or as soon as an added term's
/// largest magnitude drops below `tol`, whichever happens first. If a term
/// grows beyond 10⁶ times the direct field the series is declared divergent.
pub fn solve_multibounce(
    scene: &Scene,
    direct: &[Phasor],
    freq_hz: f64,
    max_bounces: usize,
    tol: f64,
) -> Result<PatchField, FieldError> {
    if !(freq_hz > 0.0) {
        return Err(FieldError::BadFrequency(freq_hz));
    }
    if direct.len() != scene.patches.len() {
        return Err(FieldError::PatchCountMismatch {
            got: direct.len(),
            want: scene.patches.len(),
        });
    }
    let n = scene.patches.len();
    let mut incident = direct.to_vec();
    if max_bounces > 0 && n > 0 {
        let dense = if n <= DENSE_PATCH_LIMIT {
            Some(ExchangeMatrix::build(scene, freq_hz)?)
        } else {
            None
        };
        let direct_scale = direct.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let mut term = direct.to_vec();
        for bounce in 1..=max_bounces {
            term = match &dense {
                Some(m) => m.apply(&term),
                None => apply_matrix_free(scene, freq_hz, &term),
            };
            let magnitude = term.iter().map(|v| v.norm()).fold(0.0, f64::max);
            if magnitude > DIVERGENCE_FACTOR * direct_scale {
                return Err(FieldError::Diverged {
                    bounces: bounce,
                    magnitude,
                });
            }
            for (acc, t) in incident.iter_mut().zip(&term) {
                *acc += t;
            }
            if magnitude < tol {
                break;
            }
        }
    }
    let emitted = incident
        .iter()
        .zip(&scene.patches)
        .map(|(l, p)| l * p.alpha * p.width)
        .collect();
    Ok(PatchField {
        freq_hz,
        incident,
        emitted,
    })
}

/// Rectangular observation grid. Point (ix, iy) sits at
/// origin + (ix·dx, iy·dy).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub origin: Vec2,
    pub dx: f64,
    pub dy: f64,
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    pub fn point(&self, ix: usize, iy: usize) -> Vec2 {
        self.origin + Vec2::new(ix as f64 * self.dx, iy as f64 * self.dy)
    }
}

/// Complex field sampled on a grid at one frequency. Values are stored
/// row-major: index iy·nx + ix.
#[derive(Debug, Clone)]
pub struct FieldMap {
    pub origin: Vec2,
    pub dx: f64,
    pub dy: f64,
    pub nx: usize,
    pub ny: usize,
    pub freq_hz: f64,
    pub values: Vec<Phasor>,
}

impl FieldMap {
    pub fn at(&self, ix: usize, iy: usize) -> Phasor {
        self.values[iy * self.nx + ix]
    }

    pub fn point(&self, ix: usize, iy: usize) -> Vec2 {
        self.origin + Vec2::new(ix as f64 * self.dx, iy as f64 * self.dy)
    }
}

/// Knobs shared by the rendering and capture paths.
#[derive(Debug, Clone, Copy)]
pub struct RenderOptions {
    pub max_bounces: usize,
    pub tol: f64,
    /// Add the un-reflected source term at observation points. Turn off to
    /// look at reflected fields only, e.g. for monostatic setups where the
    /// receiver sits at the source.
    pub include_direct: bool,
}

impl Default for RenderOptions {
    fn default() -> Self {
        Self {
            max_bounces: 1,
            tol: 0.0,
            include_direct: true,
        }
    }
}

/// Issues encountered while rendering; counts, not errors, so maps stay
/// usable.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RenderWarnings {
    /// Grid points coinciding with a source or patch midpoint; their value
    /// is written as zero.
    pub singular_grid_points: usize,
    /// Patches wider than λ/10 at some rendered frequency.
    pub oversized_patches: usize,
}

/// Field maps for every frequency of a render plus accumulated warnings.
#[derive(Debug, Clone)]
pub struct RenderOutput {
    pub maps: Vec<FieldMap>,
    pub warnings: RenderWarnings,
}

/// A source position paired with one frequency component it radiates.
pub type SourceComponent = (Vec2, FrequencyComponent);

/// Group source components by exact frequency, preserving first-appearance
/// order.
pub(crate) fn group_by_frequency(
    sources: &[SourceComponent],
) -> Vec<(f64, Vec<(Vec2, Phasor)>)> {
    let mut groups: Vec<(f64, Vec<(Vec2, Phasor)>)> = Vec::new();
    for (pos, comp) in sources {
        match groups.iter_mut().find(|(f, _)| *f == comp.freq_hz) {
            Some((_, list)) => list.push((*pos, comp.amplitude)),
            None => groups.push((comp.freq_hz, vec![(*pos, comp.amplitude)])),
        }
    }
    groups
}

/// Direct illumination of every patch: the phasor sum over sources that are
/// visible from the patch midpoint.
pub(crate) fn direct_at_patches(
    scene: &Scene,
    freq_hz: f64,
    sources: &[(Vec2, Phasor)],
) -> Vec<Phasor> {
    scene
        .patches
        .par_iter()
        .map(|patch| {
            let mut acc = Complex::new(0.0, 0.0);
            for &(pos, amp) in sources {
                if pos.distance_to(patch.midpoint) <= SINGULAR_EPS {
                    continue;
                }
                if visible(scene, pos, patch.midpoint) {
                    acc += propagate(amp, pos, patch.midpoint, freq_hz)
                        .expect("distance checked above");
                }
            }
            acc
        })
        .collect()
}

/// Field at a single observation point; `None` when the point coincides
/// with a source or a patch midpoint.
pub(crate) fn field_at_point(
    scene: &Scene,
    freq_hz: f64,
    sources: &[(Vec2, Phasor)],
    patch_field: &PatchField,
    p: Vec2,
    include_direct: bool,
) -> Option<Phasor> {
    if include_direct {
        for &(pos, _) in sources {
            if pos.distance_to(p) <= SINGULAR_EPS {
                return None;
            }
        }
    }
    for patch in &scene.patches {
        if patch.midpoint.distance_to(p) <= SINGULAR_EPS {
            return None;
        }
    }
    let mut acc = Complex::new(0.0, 0.0);
    if include_direct {
        for &(pos, amp) in sources {
            if visible(scene, pos, p) {
                acc += propagate(amp, pos, p, freq_hz).expect("singularity checked above");
            }
        }
    }
    for (patch, &incident) in scene.patches.iter().zip(&patch_field.incident) {
        if incident.re == 0.0 && incident.im == 0.0 {
            continue;
        }
        if visible(scene, patch.midpoint, p) {
            acc += patch_response(patch, incident, p, freq_hz)
                .expect("singularity checked above");
        }
    }
    Some(acc)
}

/// Render the complex field on a grid, one map per distinct frequency.
///
/// Per frequency the pipeline is: direct illumination of the patches,
/// multi-bounce solve, then a phasor sum of (optionally) the direct source
/// terms plus every patch's re-emission at each grid point, with occlusion
/// applied to all legs.
pub fn render_field(
    scene: &Scene,
    sources: &[SourceComponent],
    grid: &GridSpec,
    opts: &RenderOptions,
) -> Result<RenderOutput, FieldError> {
    if grid.nx == 0 || grid.ny == 0 {
        return Err(FieldError::EmptyGrid);
    }
    if !(grid.dx > 0.0) || !(grid.dy > 0.0) {
        return Err(FieldError::BadGridSpacing);
    }
    let mut warnings = RenderWarnings::default();
    let mut maps = Vec::new();
    for (freq_hz, group) in group_by_frequency(sources) {
        let lambda = wavelength(freq_hz);
        warnings.oversized_patches += scene
            .patches
            .iter()
            .filter(|p| p.width > lambda / 10.0 * (1.0 + 1e-12))
            .count();
        let direct = direct_at_patches(scene, freq_hz, &group);
        let patch_field = solve_multibounce(scene, &direct, freq_hz, opts.max_bounces, opts.tol)?;
        let cells: Vec<Option<Phasor>> = (0..grid.nx * grid.ny)
            .into_par_iter()
            .map(|idx| {
                let p = grid.point(idx % grid.nx, idx / grid.nx);
                field_at_point(scene, freq_hz, &group, &patch_field, p, opts.include_direct)
            })
            .collect();
        let mut values = Vec::with_capacity(cells.len());
        for cell in cells {
            match cell {
                Some(v) => values.push(v),
                None => {
                    warnings.singular_grid_points += 1;
                    values.push(Complex::new(0.0, 0.0));
                }
            }
        }
        maps.push(FieldMap {
            origin: grid.origin,
            dx: grid.dx,
            dy: grid.dy,
            nx: grid.nx,
            ny: grid.ny,
            freq_hz,
            values,
        });
    }
    Ok(RenderOutput { maps, warnings })
}
