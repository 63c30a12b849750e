//! 2D scene geometry: vectors, reflecting segments, sub-wavelength patches,
//! and inter-patch visibility.
//!
//! Scenes are built from straight segments. Each segment carries a complex
//! material coefficient `alpha` and an outward-normal orientation, and is
//! discretized into equal-width patches. A patch narrower than one tenth of
//! the wavelength behaves as an ideal wavelet source, which is the regime the
//! wave-field solver assumes.

use num_complex::Complex;
use thiserror::Error;

/// Complex amplitude of a single-frequency wave sample. The time factor
/// e^{i2πft} is implicit everywhere.
pub type Phasor = Complex<f64>;

/// Speed of light in vacuum, m/s (exact).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Distance below which two points are treated as coincident (meters).
const COINCIDENT_EPS: f64 = 1e-12;

/// Parametric tolerance used by the segment-intersection test.
const PARAM_EPS: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("segment endpoints coincide")]
    DegenerateSegment,
    #[error("patch width must be positive")]
    InvalidWidth,
    #[error("coordinate or coefficient is not finite")]
    NonFinite,
    #[error("target coincides with the patch midpoint")]
    SingularTarget,
    #[error("patch {patch} references segment {segment}, scene has {count}")]
    BadParentIndex {
        patch: usize,
        segment: usize,
        count: usize,
    },
}

/// 2D point or direction, components in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3D cross product; positive when `other` is
    /// counter-clockwise from `self`.
    pub fn cross(self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn unit(self) -> Vec2 {
        let n = self.norm();
        Vec2::new(self.x / n, self.y / n)
    }

    pub fn distance_to(self, other: Vec2) -> f64 {
        (other - self).norm()
    }

    /// 90° counter-clockwise rotation.
    pub fn perp_ccw(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl std::ops::Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl std::ops::Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl std::ops::Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, rhs: f64) -> Vec2 {
        Vec2::new(self.x * rhs, self.y * rhs)
    }
}

impl std::ops::Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Which side of the directed segment a→b the outward normal points to.
///
/// `Left` is the 90° counter-clockwise rotation of (b − a); `Right` is the
/// clockwise one. Scene files state this explicitly for every segment since
/// free-standing reflectors have no implied interior.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormalSide {
    Left,
    Right,
}

/// A straight reflecting (or diffracting) surface.
#[derive(Debug, Clone)]
pub struct Segment {
    pub a: Vec2,
    pub b: Vec2,
    /// Material weighting factor applied per interaction, in a per-meter
    /// reflectivity sense: the re-emitted amplitude carries alpha × width.
    pub alpha: Phasor,
    pub side: NormalSide,
}

impl Segment {
    pub fn new(a: Vec2, b: Vec2, alpha: Phasor, side: NormalSide) -> Result<Self, GeometryError> {
        if !a.is_finite() || !b.is_finite() || !alpha.re.is_finite() || !alpha.im.is_finite() {
            return Err(GeometryError::NonFinite);
        }
        if a.distance_to(b) <= COINCIDENT_EPS {
            return Err(GeometryError::DegenerateSegment);
        }
        Ok(Self { a, b, alpha, side })
    }

    pub fn length(&self) -> f64 {
        self.a.distance_to(self.b)
    }

    pub fn direction(&self) -> Vec2 {
        (self.b - self.a).unit()
    }

    /// Unit outward normal according to `side`.
    pub fn normal(&self) -> Vec2 {
        let left = self.direction().perp_ccw();
        match self.side {
            NormalSide::Left => left,
            NormalSide::Right => -left,
        }
    }
}

/// A sub-wavelength scene element acting as a wavelet source.
#[derive(Debug, Clone, PartialEq)]
pub struct Patch {
    pub midpoint: Vec2,
    /// Unit outward normal; emission is clamped to the front hemisphere.
    pub normal: Vec2,
    /// Width in meters. Must stay at or below λ/10 for the wavelet-source
    /// approximation to hold.
    pub width: f64,
    pub alpha: Phasor,
    pub parent_segment: usize,
}

/// Segments plus their patch discretization.
///
/// All fields are immutable after construction; the scene can be shared
/// freely across threads.
#[derive(Debug, Clone, Default)]
pub struct Scene {
    pub segments: Vec<Segment>,
    pub patches: Vec<Patch>,
}

impl Scene {
    /// Scene with no geometry at all: every visibility query is true and
    /// only direct propagation contributes to fields.
    pub fn empty() -> Self {
        Self::default()
    }

    /// Discretize every segment with the same maximum patch width.
    pub fn new(segments: Vec<Segment>, max_patch_width: f64) -> Result<Self, GeometryError> {
        let widths = vec![max_patch_width; segments.len()];
        Self::with_patch_widths(segments, &widths)
    }

    /// Discretize with a per-segment maximum patch width.
    pub fn with_patch_widths(
        segments: Vec<Segment>,
        max_widths: &[f64],
    ) -> Result<Self, GeometryError> {
        assert_eq!(segments.len(), max_widths.len());
        let mut patches = Vec::new();
        for (idx, (seg, &w)) in segments.iter().zip(max_widths).enumerate() {
            patches.extend(discretize_segment(seg, idx, w)?);
        }
        let scene = Self { segments, patches };
        scene.validate()?;
        Ok(scene)
    }

    fn validate(&self) -> Result<(), GeometryError> {
        for (i, p) in self.patches.iter().enumerate() {
            if p.parent_segment >= self.segments.len() {
                return Err(GeometryError::BadParentIndex {
                    patch: i,
                    segment: p.parent_segment,
                    count: self.segments.len(),
                });
            }
        }
        Ok(())
    }

    /// Largest patch width in the scene, 0.0 when empty.
    pub fn max_patch_width(&self) -> f64 {
        self.patches.iter().map(|p| p.width).fold(0.0, f64::max)
    }
}

/// Split a segment into equal-width patches no wider than `max_width`.
///
/// The count is ⌈length / max_width⌉ so the patches tile the segment end to
/// end with a single uniform width. `parent_segment` is the index the patches
/// record; use the segment's position in its scene.
pub fn discretize_segment(
    segment: &Segment,
    parent_segment: usize,
    max_width: f64,
) -> Result<Vec<Patch>, GeometryError> {
    if !(max_width > 0.0) {
        return Err(GeometryError::InvalidWidth);
    }
    let length = segment.length();
    if length <= COINCIDENT_EPS {
        return Err(GeometryError::DegenerateSegment);
    }
    // The (1 - 1e-12) factor keeps an exact integer ratio from picking up one
    // extra patch through floating-point round-up.
    let count = ((length / max_width) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    let width = length / count as f64;
    let dir = segment.direction();
    let normal = segment.normal();
    Ok((0..count)
        .map(|i| Patch {
            midpoint: segment.a + dir * (width * (i as f64 + 0.5)),
            normal,
            width,
            alpha: segment.alpha,
            parent_segment,
        })
        .collect())
}

/// True when the open segment (p, q) crosses no scene segment.
///
/// Intersections at p or q themselves do not count, so a ray starting on a
/// patch midpoint is never blocked by the patch's own parent segment.
/// Symmetric in its arguments.
pub fn visible(scene: &Scene, p: Vec2, q: Vec2) -> bool {
    debug_assert!(p.distance_to(q) > COINCIDENT_EPS, "visible() needs p != q");
    let d = q - p;
    for seg in &scene.segments {
        let e = seg.b - seg.a;
        let denom = d.cross(e);
        if denom.abs() <= 1e-12 * d.norm() * e.norm() {
            // Parallel or collinear: no proper crossing.
            continue;
        }
        let w = seg.a - p;
        let t = w.cross(e) / denom; // along p→q
        let u = w.cross(d) / denom; // along a→b
        if t > PARAM_EPS && t < 1.0 - PARAM_EPS && (-PARAM_EPS..=1.0 + PARAM_EPS).contains(&u) {
            return false;
        }
    }
    true
}

/// Cosine of the angle between the patch normal and the direction toward
/// `target`, clamped at zero: a patch radiates only away from its interior,
/// so nothing is emitted into the back hemisphere.
pub fn emission_cosine(patch: &Patch, target: Vec2) -> Result<f64, GeometryError> {
    let to_target = target - patch.midpoint;
    if to_target.norm_sq() <= COINCIDENT_EPS * COINCIDENT_EPS {
        return Err(GeometryError::SingularTarget);
    }
    Ok(patch.normal.dot(to_target.unit()).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seg(a: (f64, f64), b: (f64, f64)) -> Segment {
        Segment::new(
            Vec2::new(a.0, a.1),
            Vec2::new(b.0, b.1),
            Phasor::new(1.0, 0.0),
            NormalSide::Left,
        )
        .unwrap()
    }

    #[test]
    fn discretize_four_meter_reflector_into_centimeter_patches() {
        let s = seg((0.0, 0.0), (4.0, 0.0));
        let patches = discretize_segment(&s, 0, 0.01).unwrap();
        assert_eq!(patches.len(), 400);
        for p in &patches {
            assert!((p.width - 0.01).abs() < 1e-15);
        }
    }

    #[test]
    fn discretize_single_piece() {
        let s = seg((0.0, 0.0), (1.0, 0.0));
        let patches = discretize_segment(&s, 3, 1.0).unwrap();
        assert_eq!(patches.len(), 1);
        assert!((patches[0].width - 1.0).abs() < 1e-15);
        assert!((patches[0].midpoint.x - 0.5).abs() < 1e-15);
        assert_eq!(patches[0].midpoint.y, 0.0);
        assert_eq!(patches[0].parent_segment, 3);
    }

    #[test]
    fn discretize_rounds_up_to_equal_pieces() {
        // ceil(0.035 / 0.01) = 4 equal pieces of 0.00875 m.
        let s = seg((0.0, 0.0), (0.035, 0.0));
        let patches = discretize_segment(&s, 0, 0.01).unwrap();
        assert_eq!(patches.len(), 4);
        for p in &patches {
            assert!((p.width - 0.00875).abs() < 1e-15);
        }
    }

    #[test]
    fn discretize_rejects_degenerate_and_bad_width() {
        let s = Segment {
            a: Vec2::new(1.0, 1.0),
            b: Vec2::new(1.0, 1.0),
            alpha: Phasor::new(1.0, 0.0),
            side: NormalSide::Left,
        };
        assert_eq!(
            discretize_segment(&s, 0, 0.1),
            Err(GeometryError::DegenerateSegment)
        );
        let ok = seg((0.0, 0.0), (1.0, 0.0));
        assert_eq!(
            discretize_segment(&ok, 0, 0.0),
            Err(GeometryError::InvalidWidth)
        );
    }

    #[test]
    fn patches_tile_without_gaps() {
        for (len, w) in [(4.0, 0.01), (0.035, 0.01), (2.5, 0.3), (1.0, 1.0)] {
            let s = seg((0.2, -1.0), (0.2 + len, -1.0));
            let patches = discretize_segment(&s, 0, w).unwrap();
            let total: f64 = patches.iter().map(|p| p.width).sum();
            assert!((total - len).abs() / len < 1e-9, "len {len} w {w}");
            for pair in patches.windows(2) {
                let step = pair[1].midpoint - pair[0].midpoint;
                assert!((step.norm() - pair[0].width).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn halving_width_doubles_count_for_integer_ratios() {
        let s = seg((0.0, 0.0), (3.0, 0.0));
        for w in [1.0, 0.5, 0.25, 0.125] {
            let n = discretize_segment(&s, 0, w).unwrap().len();
            let n_half = discretize_segment(&s, 0, w / 2.0).unwrap().len();
            assert_eq!(n_half, 2 * n);
        }
    }

    #[test]
    fn normal_side_orientation() {
        let left = Segment::new(
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Phasor::new(1.0, 0.0),
            NormalSide::Left,
        )
        .unwrap();
        assert!((left.normal() - Vec2::new(0.0, 1.0)).norm() < 1e-12);
        let right = Segment::new(
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Phasor::new(1.0, 0.0),
            NormalSide::Right,
        )
        .unwrap();
        assert!((right.normal() - Vec2::new(0.0, -1.0)).norm() < 1e-12);
        // Patches inherit the segment normal exactly.
        let patches = discretize_segment(&right, 0, 0.25).unwrap();
        for p in &patches {
            assert!((p.normal - Vec2::new(0.0, -1.0)).norm() < 1e-12);
            assert!((p.normal.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn visibility_in_empty_scene() {
        let scene = Scene::empty();
        assert!(visible(&scene, Vec2::new(0.0, 0.0), Vec2::new(0.0, 4.0)));
        assert!(visible(&scene, Vec2::new(-3.0, 2.0), Vec2::new(7.0, -1.0)));
    }

    #[test]
    fn visibility_blocked_by_crossing_segment() {
        let scene = Scene::new(vec![seg((-1.0, 2.0), (1.0, 2.0))], 10.0).unwrap();
        assert!(!visible(&scene, Vec2::new(0.0, 0.0), Vec2::new(0.0, 4.0)));
    }

    #[test]
    fn visibility_misses_offset_segment() {
        let scene = Scene::new(vec![seg((1.0, 2.0), (2.0, 2.0))], 10.0).unwrap();
        assert!(visible(&scene, Vec2::new(0.0, 0.0), Vec2::new(0.0, 4.0)));
    }

    #[test]
    fn visibility_is_symmetric() {
        let scene = Scene::new(
            vec![seg((-1.0, 2.0), (1.0, 2.0)), seg((0.5, -1.0), (0.5, 1.0))],
            10.0,
        )
        .unwrap();
        let pts = [
            Vec2::new(0.0, 0.0),
            Vec2::new(0.0, 4.0),
            Vec2::new(2.0, 2.0),
            Vec2::new(-2.0, -2.0),
            Vec2::new(0.7, 0.0),
            Vec2::new(0.3, 0.5),
        ];
        for &p in &pts {
            for &q in &pts {
                if p.distance_to(q) > 1e-9 {
                    assert_eq!(visible(&scene, p, q), visible(&scene, q, p));
                }
            }
        }
    }

    #[test]
    fn ray_starting_on_a_segment_is_not_self_blocked() {
        let scene = Scene::new(vec![seg((-2.0, 0.0), (2.0, 0.0))], 0.5).unwrap();
        let mid = scene.patches[3].midpoint;
        // Leaving the parent segment toward either half plane is fine.
        assert!(visible(&scene, mid, Vec2::new(0.0, 3.0)));
        assert!(visible(&scene, Vec2::new(0.0, -3.0), mid));
    }

    #[test]
    fn emission_cosine_examples() {
        let patch = Patch {
            midpoint: Vec2::new(0.0, 0.0),
            normal: Vec2::new(0.0, 1.0),
            width: 0.01,
            alpha: Phasor::new(1.0, 0.0),
            parent_segment: 0,
        };
        // On the normal ray.
        assert!((emission_cosine(&patch, Vec2::new(0.0, 2.0)).unwrap() - 1.0).abs() < 1e-12);
        // 90 degrees off.
        assert!(emission_cosine(&patch, Vec2::new(5.0, 0.0)).unwrap().abs() < 1e-12);
        // Behind the patch at 135 degrees: clamped to zero, not -sqrt(2)/2.
        assert_eq!(emission_cosine(&patch, Vec2::new(1.0, -1.0)).unwrap(), 0.0);
        // Singular target.
        assert_eq!(
            emission_cosine(&patch, Vec2::new(0.0, 0.0)),
            Err(GeometryError::SingularTarget)
        );
    }

    #[test]
    fn emission_cosine_stays_in_unit_interval() {
        let patch = Patch {
            midpoint: Vec2::new(0.3, -0.7),
            normal: Vec2::new(0.6, 0.8),
            width: 0.01,
            alpha: Phasor::new(1.0, 0.0),
            parent_segment: 0,
        };
        for k in 0..360 {
            let a = k as f64 * std::f64::consts::PI / 180.0;
            let target = patch.midpoint + Vec2::new(a.cos(), a.sin()) * 2.0;
            let c = emission_cosine(&patch, target).unwrap();
            assert!((0.0..=1.0).contains(&c));
        }
    }
}
