use std::collections::VecDeque;

use super::frame::{EnergyCalibration, Frame};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ClusterClass {
    AcceptedXRay,
    RejectedTrack,
    RejectedNoise,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ClusterPixel {
    pub x: u32,
    pub y: u32,
    pub adc: u16,
}

/// A 4-connected group of above-threshold pixels.
#[derive(Clone, Debug, PartialEq)]
pub struct Cluster {
    pub pixels: Vec<ClusterPixel>,
    pub summed_adc: u64,
    pub classification: ClusterClass,
}

impl Cluster {
    fn new(pixels: Vec<ClusterPixel>) -> Self {
        let summed_adc = pixels.iter().map(|p| u64::from(p.adc)).sum();
        let classification = classify_pixel_count(pixels.len());
        Self {
            pixels,
            summed_adc,
            classification,
        }
    }

    pub fn pixel_count(&self) -> usize {
        self.pixels.len()
    }

    /// ADC-weighted centroid.
    pub fn centroid(&self) -> (f64, f64) {
        let total = self.summed_adc as f64;
        let (sx, sy) = self.pixels.iter().fold((0.0, 0.0), |(sx, sy), p| {
            let a = f64::from(p.adc);
            (sx + a * f64::from(p.x), sy + a * f64::from(p.y))
        });
        (sx / total, sy / total)
    }
}

/// Cluster-finding thresholds, in units of the pixel noise sigma.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClusterThresholds {
    pub seed_sigma: f64,
    pub neighbor_sigma: f64,
}

impl Default for ClusterThresholds {
    fn default() -> Self {
        Self {
            seed_sigma: 5.0,
            neighbor_sigma: 3.0,
        }
    }
}

/// Seeded 4-connected region growing.
///
/// Every pixel strictly above `seed_sigma × noise` starts a cluster unless
/// already claimed; clusters grow over 4-neighbours strictly above
/// `neighbor_sigma × noise`. Seeds are visited in raster order, so the
/// output is deterministic.
pub fn find_clusters(frame: &Frame, thresholds: &ClusterThresholds, noise_sigma_adc: f64) -> Vec<Cluster> {
    let seed_cut = thresholds.seed_sigma * noise_sigma_adc;
    let grow_cut = (thresholds.neighbor_sigma * noise_sigma_adc).min(seed_cut);
    let (w, h) = (frame.width as usize, frame.height as usize);
    let mut claimed = vec![false; w * h];
    let mut clusters = Vec::new();
    let mut queue = VecDeque::new();

    for start in 0..w * h {
        if claimed[start] || f64::from(frame.pixels[start]) <= seed_cut {
            continue;
        }
        claimed[start] = true;
        queue.push_back(start);
        let mut members = Vec::new();
        while let Some(i) = queue.pop_front() {
            let (x, y) = (i % w, i / w);
            members.push(ClusterPixel {
                x: x as u32,
                y: y as u32,
                adc: frame.pixels[i],
            });
            let mut visit = |j: usize| {
                if !claimed[j] && f64::from(frame.pixels[j]) > grow_cut {
                    claimed[j] = true;
                    queue.push_back(j);
                }
            };
            if x > 0 {
                visit(i - 1);
            }
            if x + 1 < w {
                visit(i + 1);
            }
            if y > 0 {
                visit(i - w);
            }
            if y + 1 < h {
                visit(i + w);
            }
        }
        clusters.push(Cluster::new(members));
    }
    clusters
}

/// Single and two-pixel clusters are X-rays; four or more pixels are
/// charged-particle tracks; three-pixel blobs are rejected as noise.
pub fn classify_cluster(cluster: &Cluster) -> ClusterClass {
    classify_pixel_count(cluster.pixel_count())
}

fn classify_pixel_count(n: usize) -> ClusterClass {
    match n {
        0..=2 => ClusterClass::AcceptedXRay,
        3 => ClusterClass::RejectedNoise,
        _ => ClusterClass::RejectedTrack,
    }
}

/// Cluster energy in keV.
pub fn calibrate(cluster: &Cluster, calibration: &EnergyCalibration) -> f64 {
    calibration.energy_kev(cluster.summed_adc as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn frame_with(points: &[(u32, u32, u16)]) -> Frame {
        let mut f = Frame::zeros(16, 16, 0, 10.0);
        for &(x, y, v) in points {
            f.set(x, y, v);
        }
        f
    }

    #[test]
    fn empty_frame_has_no_clusters() {
        assert!(find_clusters(&Frame::zeros(16, 16, 0, 10.0), &ClusterThresholds::default(), 10.0).is_empty());
    }

    #[test]
    fn single_bright_pixel() {
        let c = find_clusters(&frame_with(&[(3, 4, 1000)]), &ClusterThresholds::default(), 10.0);
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].pixel_count(), 1);
        assert_eq!(c[0].summed_adc, 1000);
        assert_eq!(c[0].classification, ClusterClass::AcceptedXRay);
        assert_eq!(c[0].centroid(), (3.0, 4.0));
    }

    #[test]
    fn neighbours_need_a_seed() {
        // Above the growth cut but below the seed cut: no cluster.
        assert!(find_clusters(&frame_with(&[(3, 4, 40)]), &ClusterThresholds::default(), 10.0).is_empty());
        // Attached to a seed: absorbed.
        let c = find_clusters(&frame_with(&[(3, 4, 40), (4, 4, 100)]), &ClusterThresholds::default(), 10.0);
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].pixel_count(), 2);
    }

    #[test]
    fn diagonal_pixels_are_separate() {
        let c = find_clusters(&frame_with(&[(3, 3, 500), (4, 4, 500)]), &ClusterThresholds::default(), 10.0);
        assert_eq!(c.len(), 2);
    }

    #[test]
    fn classification_rules() {
        let line: Vec<_> = (0..8).map(|x| (x + 2, 5, 300)).collect();
        let c = find_clusters(&frame_with(&line), &ClusterThresholds::default(), 10.0);
        assert_eq!(c.len(), 1);
        assert_eq!(classify_cluster(&c[0]), ClusterClass::RejectedTrack);
        let l3 = find_clusters(&frame_with(&[(1, 1, 99), (2, 1, 99), (2, 2, 99)]), &ClusterThresholds::default(), 10.0);
        assert_eq!(classify_cluster(&l3[0]), ClusterClass::RejectedNoise);
        let two = find_clusters(&frame_with(&[(1, 1, 99), (2, 1, 99)]), &ClusterThresholds::default(), 10.0);
        assert_eq!(classify_cluster(&two[0]), ClusterClass::AcceptedXRay);
    }

    #[test]
    fn calibration_is_linear() {
        let c = find_clusters(&frame_with(&[(3, 4, 8040)]), &ClusterThresholds::default(), 10.0);
        let unit = EnergyCalibration::default();
        assert!((calibrate(&c[0], &unit) - 8.040).abs() < 1e-12);
        let shifted = EnergyCalibration {
            offset_ev: 50.0,
            ..unit
        };
        assert!((calibrate(&c[0], &shifted) - calibrate(&c[0], &unit) - 0.050).abs() < 1e-12);
    }

    fn arb_frame() -> impl Strategy<Value = Frame> {
        proptest::collection::vec(prop_oneof![6 => Just(0u16), 2 => 0u16..60, 1 => 50u16..2000], 20 * 20).prop_map(
            |pixels| Frame {
                width: 20,
                height: 20,
                panel_id: 0,
                exposure_min: 10.0,
                pixels,
            },
        )
    }

    proptest! {
        #[test]
        fn clusters_partition_the_seeded_pixels(frame in arb_frame()) {
            let t = ClusterThresholds::default();
            let noise = 10.0;
            let clusters = find_clusters(&frame, &t, noise);
            let mut owner = vec![usize::MAX; 400];
            for (k, c) in clusters.iter().enumerate() {
                for p in &c.pixels {
                    let i = (p.y * 20 + p.x) as usize;
                    prop_assert_eq!(owner[i], usize::MAX, "pixel in two clusters");
                    prop_assert!(f64::from(p.adc) > t.neighbor_sigma * noise);
                    owner[i] = k;
                }
            }
            for i in 0..400 {
                let v = f64::from(frame.pixels[i]);
                if v > t.seed_sigma * noise {
                    prop_assert!(owner[i] != usize::MAX, "seed pixel unclaimed");
                }
                // Closure: an above-threshold neighbour of a cluster pixel is in that cluster.
                if owner[i] != usize::MAX {
                    let (x, y) = (i % 20, i / 20);
                    let mut nbrs = vec![];
                    if x > 0 { nbrs.push(i - 1); }
                    if x < 19 { nbrs.push(i + 1); }
                    if y > 0 { nbrs.push(i - 20); }
                    if y < 19 { nbrs.push(i + 20); }
                    for j in nbrs {
                        if f64::from(frame.pixels[j]) > t.neighbor_sigma * noise {
                            prop_assert_eq!(owner[j], owner[i]);
                        }
                    }
                }
            }
        }

        #[test]
        fn clustering_is_translation_equivariant(frame in arb_frame(), dx in -3i64..=3, dy in -3i64..=3) {
            // Keep content away from the borders so nothing is shifted off.
            let mut inner = frame.clone();
            for y in 0..20u32 {
                for x in 0..20u32 {
                    if x < 4 || y < 4 || x >= 16 || y >= 16 {
                        inner.set(x, y, 0);
                    }
                }
            }
            let t = ClusterThresholds::default();
            let a = find_clusters(&inner, &t, 10.0);
            let b = find_clusters(&inner.shifted(dx, dy), &t, 10.0);
            prop_assert_eq!(a.len(), b.len());
            let mut ca: Vec<_> = a.iter().map(|c| { let (x, y) = c.centroid(); (x + dx as f64, y + dy as f64, c.summed_adc) }).collect();
            let mut cb: Vec<_> = b.iter().map(|c| { let (x, y) = c.centroid(); (x, y, c.summed_adc) }).collect();
            ca.sort_by(|p, q| p.partial_cmp(q).unwrap());
            cb.sort_by(|p, q| p.partial_cmp(q).unwrap());
            for (p, q) in ca.iter().zip(&cb) {
                prop_assert!((p.0 - q.0).abs() < 1e-9 && (p.1 - q.1).abs() < 1e-9 && p.2 == q.2);
            }
        }
    }
}
