//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use pepsim::transport::{DetectorGeometry, Vec3};

/// Distance to the first exit from the shell found by marching in `step`
/// increments and bisecting the last step down to 1e-12 cm.
pub fn ray_march_exit(g: &DetectorGeometry, p: Vec3, d: Vec3, step: f64) -> f64 {
    let inside = |t: f64| {
        let q = p + d * t;
        let r = q.x.hypot(q.y);
        r >= g.inner_radius() && r <= g.cylinder_radius_cm && (0.0..=g.cylinder_height_cm).contains(&q.z)
    };
    let mut t = 0.0;
    while inside(t + step) {
        t += step;
    }
    let (mut lo, mut hi) = (t, t + step);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if inside(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Solid angle of a w × h rectangle seen from a point at distance `d` on
/// its central normal.
pub fn rectangle_solid_angle(w: f64, h: f64, d: f64) -> f64 {
    let (a, b) = (0.5 * w, 0.5 * h);
    4.0 * (a * b / (d * (d * d + a * a + b * b).sqrt())).atan()
}

/// Copper crossed along the whole ray, from circle and slab intersections.
pub fn copper_path(g: &DetectorGeometry, p: Vec3, d: Vec3) -> f64 {
    let (tz0, tz1) = if d.z.abs() < 1e-300 {
        if (0.0..=g.cylinder_height_cm).contains(&p.z) {
            (f64::NEG_INFINITY, f64::INFINITY)
        } else {
            return 0.0;
        }
    } else {
        let a = -p.z / d.z;
        let b = (g.cylinder_height_cm - p.z) / d.z;
        (a.min(b), a.max(b))
    };
    let within = |radius: f64| -> Option<(f64, f64)> {
        let a = d.x * d.x + d.y * d.y;
        if a == 0.0 {
            return (p.x.hypot(p.y) <= radius).then_some((f64::NEG_INFINITY, f64::INFINITY));
        }
        let b = p.x * d.x + p.y * d.y;
        let c = p.x * p.x + p.y * p.y - radius * radius;
        let disc = b * b - a * c;
        (disc > 0.0).then(|| ((-b - disc.sqrt()) / a, (-b + disc.sqrt()) / a))
    };
    let clip = |(s0, s1): (f64, f64)| -> f64 { (s1.min(tz1) - s0.max(tz0).max(0.0)).max(0.0) };
    let outer = within(g.cylinder_radius_cm).map_or(0.0, |iv| clip((iv.0, iv.1)));
    let inner = within(g.inner_radius()).map_or(0.0, |iv| clip((iv.0, iv.1)));
    outer - inner
}

/// Whether the ray's nearest panel-plane crossing lands on a live chip,
/// from plane equations written out independently of the library.
pub fn hits_live_chip(g: &DetectorGeometry, p: Vec3, d: Vec3) -> bool {
    let distance = g.cylinder_radius_cm + g.ccd_standoff_cm;
    let stack = g.ccd_chip_height_cm * f64::from(g.chips_per_panel);
    let z_lo = 0.5 * (g.cylinder_height_cm - stack);
    let mut best: Option<(f64, bool)> = None;
    for k in 0..g.ccd_panel_count {
        let phi = 2.0 * PI * f64::from(k) / f64::from(g.ccd_panel_count);
        let n = Vec3::new(phi.cos(), phi.sin(), 0.0);
        let tan = Vec3::new(-phi.sin(), phi.cos(), 0.0);
        let dn = d.dot(n);
        if dn <= 0.0 {
            continue;
        }
        let t = (distance - p.dot(n)) / dn;
        if t <= 0.0 {
            continue;
        }
        let q = p + d * t;
        let u = q.dot(tan);
        let z = q.z - z_lo;
        if u.abs() > 0.5 * g.ccd_chip_width_cm || !(0.0..=stack).contains(&z) {
            continue;
        }
        let chip = ((z / g.ccd_chip_height_cm) as u32).min(g.chips_per_panel - 1);
        let live = g.live_chips[(k * g.chips_per_panel + chip) as usize];
        if best.is_none_or(|(bt, _)| t < bt) {
            best = Some((t, live));
        }
    }
    best.is_some_and(|(_, live)| live)
}

/// Detection probability for a point source, averaged over a spherical
/// Fibonacci lattice of `n` directions with survival from the analytic
/// copper path. A product grid in (cos θ, φ) of the same size is several
/// percent off because of the panel edges.
pub fn point_source_fibonacci(g: &DetectorGeometry, p: Vec3, attenuation_length: f64, n: usize) -> f64 {
    let golden = PI * (3.0 - 5f64.sqrt());
    let mut sum = 0.0;
    for i in 0..n {
        let cz = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
        let sz = (1.0 - cz * cz).sqrt();
        let phi = golden * i as f64;
        let d = Vec3::new(sz * phi.cos(), sz * phi.sin(), cz);
        if hits_live_chip(g, p, d) {
            sum += (-copper_path(g, p, d) / attenuation_length).exp();
        }
    }
    sum / n as f64
}

/// A shell small enough to act as a point source for one panel of
/// `w × h` at `distance` from the axis.
pub fn point_like_single_panel(w: f64, h: f64, distance: f64) -> DetectorGeometry {
    let radius = 1e-4;
    DetectorGeometry {
        cylinder_radius_cm: radius,
        cylinder_thickness_cm: 0.5 * radius,
        cylinder_height_cm: 1e-4,
        ccd_standoff_cm: distance - radius,
        ccd_panel_count: 1,
        ccd_chip_width_cm: w,
        ccd_chip_height_cm: h,
        chips_per_panel: 1,
        live_chips: vec![true],
    }
}
