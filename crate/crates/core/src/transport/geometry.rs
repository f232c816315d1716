use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};

use rand::Rng;

use crate::error::{Error, Result};

/// Tolerance used when deciding whether a point lies inside the copper shell.
pub const CONTAINMENT_TOLERANCE_CM: f64 = 1e-9;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    /// Distance from the cylinder (z) axis.
    pub fn radial(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn azimuth(self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn isotropic<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let cos_theta = 2.0 * rng.random::<f64>() - 1.0;
        let phi = 2.0 * PI * rng.random::<f64>();
        let sin_theta = (1.0 - cos_theta * cos_theta).max(0.0).sqrt();
        Vec3::new(sin_theta * phi.cos(), sin_theta * phi.sin(), cos_theta)
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

/// Copper target shell and the ring of CCD panels facing it.
///
/// The target is an open-ended cylindrical shell with its axis on z,
/// occupying `z ∈ [0, height]` and `r ∈ [radius − thickness, radius]`.
/// Panel `k` is a flat rectangle whose normal points along azimuth
/// `2πk / panel_count`, at distance `radius + standoff` from the axis and
/// vertically centred on the target. Each panel stacks `chips_per_panel`
/// chips without gaps; chip `c` of panel `k` has index
/// `k × chips_per_panel + c` in `live_chips`.
#[derive(Clone, Debug, PartialEq)]
pub struct DetectorGeometry {
    pub cylinder_radius_cm: f64,
    pub cylinder_thickness_cm: f64,
    pub cylinder_height_cm: f64,
    pub ccd_standoff_cm: f64,
    pub ccd_panel_count: u32,
    pub ccd_chip_width_cm: f64,
    pub ccd_chip_height_cm: f64,
    pub chips_per_panel: u32,
    pub live_chips: Vec<bool>,
}

impl Default for DetectorGeometry {
    fn default() -> Self {
        // 16 CCDs as 8 stacked pairs; one pair is not read out.
        let mut live_chips = vec![true; 16];
        live_chips[14] = false;
        live_chips[15] = false;
        Self {
            cylinder_radius_cm: 4.5,
            cylinder_thickness_cm: 50e-4,
            cylinder_height_cm: 8.8,
            ccd_standoff_cm: 2.3,
            ccd_panel_count: 8,
            ccd_chip_width_cm: DEFAULT_CHIP_WIDTH_CM,
            ccd_chip_height_cm: DEFAULT_CHIP_HEIGHT_CM,
            chips_per_panel: 2,
            live_chips,
        }
    }
}

/// Chip active area is not published with the setup; 2.7 cm is close to
/// the CCD-55 imaging area.
pub const DEFAULT_CHIP_WIDTH_CM: f64 = 2.7;
pub const DEFAULT_CHIP_HEIGHT_CM: f64 = 2.7;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Panel {
    pub index: u32,
    /// Outward unit normal (horizontal).
    pub normal: Vec3,
    /// Horizontal in-plane unit vector.
    pub tangent: Vec3,
    /// Distance of the panel plane from the axis.
    pub distance: f64,
    pub half_width: f64,
    pub z_lo: f64,
    pub z_hi: f64,
    pub chip_height: f64,
    pub chips: u32,
}

/// Where a ray meets a panel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PanelHit {
    pub panel: u32,
    /// Chip within the panel, counted from the bottom.
    pub chip: u32,
    pub point: Vec3,
    /// Ray parameter (distance from the origin) at the hit.
    pub distance: f64,
}

impl Panel {
    /// Intersection of the ray with this panel's rectangle, if any.
    pub fn intersect(&self, origin: Vec3, dir: Vec3) -> Option<PanelHit> {
        let denom = dir.dot(self.normal);
        if denom <= 0.0 {
            return None;
        }
        let s = (self.distance - origin.dot(self.normal)) / denom;
        if s <= 0.0 {
            return None;
        }
        let p = origin + dir * s;
        if p.dot(self.tangent).abs() > self.half_width || p.z < self.z_lo || p.z > self.z_hi {
            return None;
        }
        let chip = (((p.z - self.z_lo) / self.chip_height) as u32).min(self.chips - 1);
        Some(PanelHit {
            panel: self.index,
            chip,
            point: p,
            distance: s,
        })
    }
}

/// Up to two disjoint ray intervals `[start, end]` inside copper, ordered.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CopperSegments {
    buf: [(f64, f64); 2],
    len: usize,
}

impl CopperSegments {
    fn push(&mut self, lo: f64, hi: f64) {
        if hi > lo {
            self.buf[self.len] = (lo, hi);
            self.len += 1;
        }
    }

    pub fn as_slice(&self) -> &[(f64, f64)] {
        &self.buf[..self.len]
    }

    pub fn total_length(&self) -> f64 {
        self.as_slice().iter().map(|(a, b)| b - a).sum()
    }
}

impl DetectorGeometry {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("cylinder radius", self.cylinder_radius_cm),
            ("cylinder thickness", self.cylinder_thickness_cm),
            ("cylinder height", self.cylinder_height_cm),
            ("CCD standoff", self.ccd_standoff_cm),
            ("chip width", self.ccd_chip_width_cm),
            ("chip height", self.ccd_chip_height_cm),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::domain(format!("{name} must be > 0 cm, got {v}")));
            }
        }
        if self.cylinder_thickness_cm >= self.cylinder_radius_cm {
            return Err(Error::domain("cylinder thickness must be smaller than its radius"));
        }
        if self.ccd_panel_count == 0 || self.chips_per_panel == 0 {
            return Err(Error::domain("need at least one panel and one chip per panel"));
        }
        if self.live_chips.len() != self.chip_count() {
            return Err(Error::domain(format!(
                "live chip mask has {} entries for {} chips",
                self.live_chips.len(),
                self.chip_count()
            )));
        }
        Ok(())
    }

    pub fn inner_radius(&self) -> f64 {
        self.cylinder_radius_cm - self.cylinder_thickness_cm
    }

    pub fn chip_count(&self) -> usize {
        self.ccd_panel_count as usize * self.chips_per_panel as usize
    }

    pub fn live_chip_count(&self) -> usize {
        self.live_chips.iter().filter(|&&l| l).count()
    }

    pub fn chip_index(&self, panel: u32, chip: u32) -> usize {
        panel as usize * self.chips_per_panel as usize + chip as usize
    }

    pub fn is_live(&self, panel: u32, chip: u32) -> bool {
        self.live_chips[self.chip_index(panel, chip)]
    }

    /// Sets every chip of `panel` live or dead.
    pub fn set_panel_live(&mut self, panel: u32, live: bool) {
        for c in 0..self.chips_per_panel {
            let i = self.chip_index(panel, c);
            self.live_chips[i] = live;
        }
    }

    pub fn panel(&self, index: u32) -> Panel {
        let phi = 2.0 * PI * f64::from(index) / f64::from(self.ccd_panel_count);
        let (s, c) = phi.sin_cos();
        let stack = self.ccd_chip_height_cm * f64::from(self.chips_per_panel);
        let zc = 0.5 * self.cylinder_height_cm;
        Panel {
            index,
            normal: Vec3::new(c, s, 0.0),
            tangent: Vec3::new(-s, c, 0.0),
            distance: self.cylinder_radius_cm + self.ccd_standoff_cm,
            half_width: 0.5 * self.ccd_chip_width_cm,
            z_lo: zc - 0.5 * stack,
            z_hi: zc + 0.5 * stack,
            chip_height: self.ccd_chip_height_cm,
            chips: self.chips_per_panel,
        }
    }

    pub fn panels(&self) -> Vec<Panel> {
        (0..self.ccd_panel_count).map(|k| self.panel(k)).collect()
    }

    pub fn contains(&self, p: Vec3) -> bool {
        let r = p.radial();
        let tol = CONTAINMENT_TOLERANCE_CM;
        r >= self.inner_radius() - tol
            && r <= self.cylinder_radius_cm + tol
            && p.z >= -tol
            && p.z <= self.cylinder_height_cm + tol
    }

    /// Ray intervals (s ≥ 0) spent inside the copper shell, along the whole ray.
    pub fn copper_segments(&self, origin: Vec3, dir: Vec3) -> CopperSegments {
        let mut out = CopperSegments::default();

        // Axial slab.
        let (z_lo, z_hi) = if dir.z == 0.0 {
            if origin.z < 0.0 || origin.z > self.cylinder_height_cm {
                return out;
            }
            (f64::NEG_INFINITY, f64::INFINITY)
        } else {
            let a = (0.0 - origin.z) / dir.z;
            let b = (self.cylinder_height_cm - origin.z) / dir.z;
            (a.min(b), a.max(b))
        };
        let lo = z_lo.max(0.0);
        let hi = z_hi;
        if hi <= lo {
            return out;
        }

        let a = dir.x * dir.x + dir.y * dir.y;
        let b = origin.x * dir.x + origin.y * dir.y;
        let rho2 = origin.x * origin.x + origin.y * origin.y;
        let outer = radial_interval(a, b, rho2, self.cylinder_radius_cm);
        let inner = radial_interval(a, b, rho2, self.inner_radius());

        let Some((o1, o2)) = outer else {
            return out;
        };
        match inner {
            None => out.push(o1.max(lo), o2.min(hi)),
            Some((i1, i2)) => {
                out.push(o1.max(lo), i1.min(hi));
                out.push(i2.max(lo), o2.min(hi));
            }
        }
        out
    }

    /// Copper traversed from `point` until the ray first leaves the shell.
    pub fn path_length_in_copper(&self, point: Vec3, dir: Vec3) -> Result<f64> {
        if !self.contains(point) {
            return Err(Error::domain(format!(
                "point ({}, {}, {}) is outside the copper shell",
                point.x, point.y, point.z
            )));
        }
        if (dir.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::domain(format!("direction must be a unit vector, |d| = {}", dir.norm())));
        }
        Ok(self
            .copper_segments(point, dir)
            .as_slice()
            .first()
            .filter(|(start, _)| *start <= 0.0)
            .map_or(0.0, |(start, end)| end - start))
    }

    /// Copper traversed along the whole ray, including any re-entry through
    /// the far side of the shell.
    pub fn total_copper_path(&self, point: Vec3, dir: Vec3) -> f64 {
        self.copper_segments(point, dir).total_length()
    }

    /// Uniform point in the shell volume.
    pub fn sample_emission_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec3 {
        let phi = 2.0 * PI * rng.random::<f64>();
        let z = self.cylinder_height_cm * rng.random::<f64>();
        let ri = self.inner_radius();
        let ro = self.cylinder_radius_cm;
        let u: f64 = rng.random();
        let r = (ri * ri + u * (ro * ro - ri * ri)).sqrt().clamp(ri, ro);
        let (s, c) = phi.sin_cos();
        Vec3::new(r * c, r * s, z)
    }
}

/// Ray parameters where the horizontal distance from the axis is within
/// `radius`: solves a s² + 2 b s + (rho2 − radius²) ≤ 0.
fn radial_interval(a: f64, b: f64, rho2: f64, radius: f64) -> Option<(f64, f64)> {
    let c = rho2 - radius * radius;
    if a == 0.0 {
        return (c <= 0.0).then_some((f64::NEG_INFINITY, f64::INFINITY));
    }
    let disc = b * b - a * c;
    if disc < 0.0 {
        return None;
    }
    let q = -(b + b.signum() * disc.sqrt());
    if q == 0.0 {
        // b = 0 and c = 0: the ray is tangent at its origin.
        return Some((0.0, 0.0));
    }
    let r1 = q / a;
    let r2 = c / q;
    Some((r1.min(r2), r1.max(r2)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeedTree;
    use approx::assert_abs_diff_eq;

    fn mid_thickness_point(g: &DetectorGeometry) -> Vec3 {
        Vec3::new(g.cylinder_radius_cm - 0.5 * g.cylinder_thickness_cm, 0.0, 4.4)
    }

    #[test]
    fn default_geometry() {
        let g = DetectorGeometry::default();
        g.validate().unwrap();
        assert_eq!(g.chip_count(), 16);
        assert_eq!(g.live_chip_count(), 14);
        assert_abs_diff_eq!(g.cylinder_thickness_cm, 0.005, epsilon = 1e-15);
    }

    #[test]
    fn radial_rays_cross_half_the_wall() {
        let g = DetectorGeometry::default();
        let p = mid_thickness_point(&g);
        let out = g.path_length_in_copper(p, Vec3::new(1.0, 0.0, 0.0)).unwrap();
        let inw = g.path_length_in_copper(p, Vec3::new(-1.0, 0.0, 0.0)).unwrap();
        assert_abs_diff_eq!(out, 25e-4, epsilon = 1e-12);
        assert_abs_diff_eq!(inw, 25e-4, epsilon = 1e-12);
        // Inward, the ray crosses the whole far wall as well.
        assert_abs_diff_eq!(g.total_copper_path(p, Vec3::new(-1.0, 0.0, 0.0)), 75e-4, epsilon = 1e-12);
    }

    #[test]
    fn vertical_ray_runs_to_the_rim() {
        let g = DetectorGeometry::default();
        let p = mid_thickness_point(&g);
        let up = g.path_length_in_copper(p, Vec3::new(0.0, 0.0, 1.0)).unwrap();
        assert_abs_diff_eq!(up, 4.4, epsilon = 1e-12);
    }

    #[test]
    fn outside_point_is_rejected() {
        let g = DetectorGeometry::default();
        let err = g.path_length_in_copper(Vec3::new(1.0, 0.0, 1.0), Vec3::new(1.0, 0.0, 0.0));
        assert!(matches!(err, Err(Error::Domain(_))));
        let not_unit = g.path_length_in_copper(mid_thickness_point(&g), Vec3::new(2.0, 0.0, 0.0));
        assert!(not_unit.is_err());
    }

    #[test]
    fn emission_points_are_contained() {
        let g = DetectorGeometry::default();
        let mut rng = SeedTree::new(7).stream("test", 0);
        for _ in 0..10_000 {
            let p = g.sample_emission_point(&mut rng);
            let r = p.radial();
            assert!((4.5 - 0.005 - 1e-12..=4.5 + 1e-12).contains(&r), "{r}");
            assert!((0.0..=8.8).contains(&p.z));
        }
    }

    #[test]
    fn thin_shell_limit_puts_points_on_the_surface() {
        let g = DetectorGeometry {
            cylinder_thickness_cm: 1e-12,
            ..DetectorGeometry::default()
        };
        let mut rng = SeedTree::new(8).stream("test", 0);
        for _ in 0..1000 {
            assert_abs_diff_eq!(g.sample_emission_point(&mut rng).radial(), 4.5, epsilon = 1e-11);
        }
    }

    #[test]
    fn panel_hit_at_normal_incidence() {
        let g = DetectorGeometry::default();
        let p = mid_thickness_point(&g);
        let hit = g.panel(0).intersect(p, Vec3::new(1.0, 0.0, 0.0)).unwrap();
        assert_abs_diff_eq!(hit.point.x, 6.8, epsilon = 1e-12);
        let low = Vec3::new(p.x, p.y, 3.0);
        assert_eq!(g.panel(0).intersect(low, Vec3::new(1.0, 0.0, 0.0)).unwrap().chip, 0);
        let high = Vec3::new(p.x, p.y, 6.0);
        assert_eq!(g.panel(0).intersect(high, Vec3::new(1.0, 0.0, 0.0)).unwrap().chip, 1);
        assert!(g.panel(4).intersect(p, Vec3::new(1.0, 0.0, 0.0)).is_none());
    }
}
