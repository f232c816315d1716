use std::io::{Read, Write};

use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};

use crate::error::{Error, Result};

/// Linear ADC-to-energy conversion.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyCalibration {
    pub gain_ev_per_adc: f64,
    pub offset_ev: f64,
}

impl Default for EnergyCalibration {
    fn default() -> Self {
        Self {
            gain_ev_per_adc: 1.0,
            offset_ev: 0.0,
        }
    }
}

impl EnergyCalibration {
    pub fn validate(&self) -> Result<()> {
        if !(self.gain_ev_per_adc > 0.0 && self.gain_ev_per_adc.is_finite()) {
            return Err(Error::domain(format!("gain must be > 0 eV/ADC, got {}", self.gain_ev_per_adc)));
        }
        Ok(())
    }

    pub fn energy_kev(&self, adc: f64) -> f64 {
        (self.gain_ev_per_adc * adc + self.offset_ev) * 1e-3
    }

    pub fn adc(&self, energy_kev: f64) -> f64 {
        (energy_kev * 1e3 - self.offset_ev) / self.gain_ev_per_adc
    }
}

/// One CCD read-out.
#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    pub width: u32,
    pub height: u32,
    pub panel_id: u32,
    pub exposure_min: f32,
    /// Row-major ADC values.
    pub pixels: Vec<u16>,
}

pub const DEFAULT_FRAME_SIZE: u32 = 256;
pub const DEFAULT_EXPOSURE_MIN: f32 = 10.0;
const HEADER_BYTES: usize = 16;

impl Frame {
    pub fn zeros(width: u32, height: u32, panel_id: u32, exposure_min: f32) -> Self {
        Self {
            width,
            height,
            panel_id,
            exposure_min,
            pixels: vec![0; width as usize * height as usize],
        }
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> u16 {
        self.pixels[y as usize * self.width as usize + x as usize]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, v: u16) {
        let w = self.width as usize;
        self.pixels[y as usize * w + x as usize] = v;
    }

    pub fn sum(&self) -> u64 {
        self.pixels.iter().map(|&v| u64::from(v)).sum()
    }

    /// Content moved by `(dx, dy)`; pixels shifted off the edge are lost.
    pub fn shifted(&self, dx: i64, dy: i64) -> Frame {
        let mut out = Frame::zeros(self.width, self.height, self.panel_id, self.exposure_min);
        for y in 0..self.height {
            for x in 0..self.width {
                let (nx, ny) = (i64::from(x) + dx, i64::from(y) + dy);
                if nx >= 0 && ny >= 0 && nx < i64::from(self.width) && ny < i64::from(self.height) {
                    out.set(nx as u32, ny as u32, self.get(x, y));
                }
            }
        }
        out
    }

    /// Flat little-endian dump: a 16-byte header (`width: u32`,
    /// `height: u32`, `panel_id: u32`, `exposure_min: f32`) followed by
    /// `width × height` row-major `u16` values.
    pub fn write_binary<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(&self.width.to_le_bytes())?;
        w.write_all(&self.height.to_le_bytes())?;
        w.write_all(&self.panel_id.to_le_bytes())?;
        w.write_all(&self.exposure_min.to_le_bytes())?;
        let mut buf = Vec::with_capacity(self.pixels.len() * 2);
        for v in &self.pixels {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&buf)
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Frame> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)
            .map_err(|e| Error::format("frame", 0, format!("read failed: {e}")))?;
        if bytes.len() < HEADER_BYTES {
            return Err(Error::format("frame", bytes.len(), "truncated header"));
        }
        let word = |i: usize| [bytes[i], bytes[i + 1], bytes[i + 2], bytes[i + 3]];
        let width = u32::from_le_bytes(word(0));
        let height = u32::from_le_bytes(word(4));
        let panel_id = u32::from_le_bytes(word(8));
        let exposure_min = f32::from_le_bytes(word(12));
        let n = width as usize * height as usize;
        let expected = HEADER_BYTES + 2 * n;
        if bytes.len() != expected {
            return Err(Error::format(
                "frame",
                bytes.len().min(expected),
                format!("expected {expected} bytes, found {}", bytes.len()),
            ));
        }
        let pixels = bytes[HEADER_BYTES..]
            .chunks_exact(2)
            .map(|c| u16::from_le_bytes([c[0], c[1]]))
            .collect();
        Ok(Frame {
            width,
            height,
            panel_id,
            exposure_min,
            pixels,
        })
    }

    /// Plain-text grid, one image row per line.
    pub fn write_csv_grid<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(
            w,
            "# width={} height={} panel_id={} exposure_min={}",
            self.width, self.height, self.panel_id, self.exposure_min
        )?;
        for row in self.pixels.chunks(self.width as usize) {
            let line: Vec<String> = row.iter().map(u16::to_string).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }
}

/// An X-ray absorbed at a pixel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Hit {
    pub x: u32,
    pub y: u32,
    pub energy_kev: f64,
}

/// Settings for synthetic read-outs.
///
/// The 85/15 single/split charge sharing is a convention of the synthetic
/// corpus, not a measured property of the detector.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrameSynthesis {
    pub width: u32,
    pub height: u32,
    pub panel_id: u32,
    pub exposure_min: f32,
    pub noise_sigma_adc: f64,
    /// Mean number of charged-particle tracks per frame.
    pub track_rate: f64,
    pub calibration: EnergyCalibration,
    pub split_probability: f64,
    pub min_track_pixels: u32,
    pub max_track_pixels: u32,
    /// Energy deposited per track pixel, keV (uniform in this range).
    pub track_pixel_energy_kev: (f64, f64),
}

impl Default for FrameSynthesis {
    fn default() -> Self {
        Self {
            width: DEFAULT_FRAME_SIZE,
            height: DEFAULT_FRAME_SIZE,
            panel_id: 0,
            exposure_min: DEFAULT_EXPOSURE_MIN,
            noise_sigma_adc: 10.0,
            track_rate: 0.0,
            calibration: EnergyCalibration::default(),
            split_probability: 0.15,
            min_track_pixels: 4,
            max_track_pixels: 24,
            track_pixel_energy_kev: (1.0, 4.0),
        }
    }
}

/// A synthesized frame together with what was put into it.
#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticFrame {
    pub frame: Frame,
    /// Pixels of each injected track, in walking order.
    pub tracks: Vec<Vec<(u32, u32)>>,
    pub split_hits: usize,
}

pub fn synthesize_frame<R: Rng + ?Sized>(
    hits: &[Hit],
    settings: &FrameSynthesis,
    rng: &mut R,
) -> Result<SyntheticFrame> {
    settings.calibration.validate()?;
    if settings.width == 0 || settings.height == 0 {
        return Err(Error::domain("frame dimensions must be positive"));
    }
    if !(settings.noise_sigma_adc >= 0.0) || !(settings.track_rate >= 0.0) {
        return Err(Error::domain("noise sigma and track rate must be >= 0"));
    }
    if settings.min_track_pixels < 2 || settings.max_track_pixels < settings.min_track_pixels {
        return Err(Error::domain("track length range is invalid"));
    }
    if let Some(h) = hits.iter().find(|h| h.x >= settings.width || h.y >= settings.height) {
        return Err(Error::domain(format!(
            "hit at ({}, {}) outside {}x{} frame",
            h.x, h.y, settings.width, settings.height
        )));
    }

    let (w, h) = (settings.width, settings.height);
    let mut charge = vec![0.0f64; w as usize * h as usize];
    let idx = |x: u32, y: u32| y as usize * w as usize + x as usize;
    let cal = &settings.calibration;

    let mut split_hits = 0;
    for hit in hits {
        let adc = cal.adc(hit.energy_kev).max(0.0);
        if rng.random::<f64>() < settings.split_probability {
            let neighbours = four_neighbours(hit.x, hit.y, w, h);
            let (nx, ny) = neighbours[rng.random_range(0..neighbours.len())];
            let share = rng.random_range(0.1..0.5);
            charge[idx(hit.x, hit.y)] += adc * (1.0 - share);
            charge[idx(nx, ny)] += adc * share;
            split_hits += 1;
        } else {
            charge[idx(hit.x, hit.y)] += adc;
        }
    }

    let track_count = if settings.track_rate > 0.0 {
        Poisson::new(settings.track_rate)
            .map_err(|e| Error::domain(format!("track rate: {e}")))?
            .sample(rng) as usize
    } else {
        0
    };
    let mut tracks = Vec::with_capacity(track_count);
    for _ in 0..track_count {
        let pixels = random_track(settings, rng);
        let (lo, hi) = settings.track_pixel_energy_kev;
        for &(x, y) in &pixels {
            charge[idx(x, y)] += cal.adc(rng.random_range(lo..=hi)).max(0.0);
        }
        tracks.push(pixels);
    }

    let mut frame = Frame::zeros(w, h, settings.panel_id, settings.exposure_min);
    for (px, q) in frame.pixels.iter_mut().zip(&charge) {
        let noisy = if settings.noise_sigma_adc > 0.0 {
            let z: f64 = StandardNormal.sample(rng);
            q + settings.noise_sigma_adc * z
        } else {
            *q
        };
        *px = noisy.round().clamp(0.0, f64::from(u16::MAX)) as u16;
    }
    Ok(SyntheticFrame {
        frame,
        tracks,
        split_hits,
    })
}

fn four_neighbours(x: u32, y: u32, w: u32, h: u32) -> Vec<(u32, u32)> {
    let mut out = Vec::with_capacity(4);
    if x > 0 {
        out.push((x - 1, y));
    }
    if x + 1 < w {
        out.push((x + 1, y));
    }
    if y > 0 {
        out.push((x, y - 1));
    }
    if y + 1 < h {
        out.push((x, y + 1));
    }
    if out.is_empty() {
        out.push((x, y));
    }
    out
}

/// A straight, 4-connected run of pixels that fits inside the frame.
fn random_track<R: Rng + ?Sized>(s: &FrameSynthesis, rng: &mut R) -> Vec<(u32, u32)> {
    let max_len = s.max_track_pixels.min(s.width + s.height - 1);
    let len = rng.random_range(s.min_track_pixels.min(max_len)..=max_len);
    let angle = rng.random_range(0.0..std::f64::consts::TAU);
    let (sin, cos) = angle.sin_cos();
    let steps = len - 1;
    let mut nx = ((f64::from(steps) * cos.abs() / (cos.abs() + sin.abs())).round() as u32).min(s.width - 1);
    let mut ny = steps - nx;
    if ny > s.height - 1 {
        ny = s.height - 1;
        nx = steps - ny;
    }
    let sx: i64 = if cos < 0.0 { -1 } else { 1 };
    let sy: i64 = if sin < 0.0 { -1 } else { 1 };

    let x_range = s.width - nx;
    let y_range = s.height - ny;
    let mut x = i64::from(rng.random_range(0..x_range)) + if sx < 0 { i64::from(nx) } else { 0 };
    let mut y = i64::from(rng.random_range(0..y_range)) + if sy < 0 { i64::from(ny) } else { 0 };

    let mut pixels = Vec::with_capacity(len as usize);
    pixels.push((x as u32, y as u32));
    let (mut ix, mut iy) = (0u32, 0u32);
    while ix + iy < steps {
        // Step along whichever axis lags further behind the ideal line.
        let px = if nx == 0 { f64::INFINITY } else { (f64::from(ix) + 0.5) / f64::from(nx) };
        let py = if ny == 0 { f64::INFINITY } else { (f64::from(iy) + 0.5) / f64::from(ny) };
        if px <= py {
            x += sx;
            ix += 1;
        } else {
            y += sy;
            iy += 1;
        }
        pixels.push((x as u32, y as u32));
    }
    pixels
}
