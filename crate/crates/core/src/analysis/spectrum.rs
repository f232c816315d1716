use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SpectrumLabel {
    CurrentOn,
    CurrentOff,
    Difference,
}

impl fmt::Display for SpectrumLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SpectrumLabel::CurrentOn => "CurrentOn",
            SpectrumLabel::CurrentOff => "CurrentOff",
            SpectrumLabel::Difference => "Difference",
        })
    }
}

impl FromStr for SpectrumLabel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "CurrentOn" => Ok(SpectrumLabel::CurrentOn),
            "CurrentOff" => Ok(SpectrumLabel::CurrentOff),
            "Difference" => Ok(SpectrumLabel::Difference),
            other => Err(format!("unknown spectrum label `{other}`")),
        }
    }
}

/// Uniformly binned energy histogram. Bin `i` covers
/// `[bin_lo + i·w, bin_lo + (i+1)·w)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub bin_lo_kev: f64,
    pub bin_width_kev: f64,
    pub counts: Vec<f64>,
    pub errors: Vec<f64>,
    pub live_time_min: f64,
    pub label: SpectrumLabel,
    /// Entries below the first bin when the spectrum was filled.
    pub underflow: u64,
    /// Entries at or above the last bin edge.
    pub overflow: u64,
}

/// A count with its one-sigma uncertainty.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Counted {
    pub value: f64,
    pub error: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegionOfInterest {
    pub lo_kev: f64,
    pub hi_kev: f64,
}

impl Default for RegionOfInterest {
    /// One FWHM (320 eV) plus 10 eV around the 7.729 keV line.
    fn default() -> Self {
        Self {
            lo_kev: 7.564,
            hi_kev: 7.894,
        }
    }
}

impl RegionOfInterest {
    pub fn new(lo_kev: f64, hi_kev: f64) -> Result<Self> {
        if !(lo_kev < hi_kev) {
            return Err(Error::domain(format!("ROI needs lo < hi, got [{lo_kev}, {hi_kev}]")));
        }
        Ok(Self { lo_kev, hi_kev })
    }

    pub fn width(&self) -> f64 {
        self.hi_kev - self.lo_kev
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.lo_kev + self.hi_kev)
    }

    pub fn contains(&self, e: f64) -> bool {
        e >= self.lo_kev && e < self.hi_kev
    }
}

impl Spectrum {
    /// Spectrum from explicit per-bin counts and errors.
    pub fn from_parts(
        bin_lo_kev: f64,
        bin_width_kev: f64,
        counts: Vec<f64>,
        errors: Vec<f64>,
        live_time_min: f64,
        label: SpectrumLabel,
    ) -> Result<Self> {
        if !(bin_width_kev > 0.0) || !bin_lo_kev.is_finite() {
            return Err(Error::domain("bin width must be > 0 and the lower edge finite"));
        }
        if counts.is_empty() || counts.len() != errors.len() {
            return Err(Error::domain("spectrum needs matching, non-empty count and error arrays"));
        }
        Ok(Self {
            bin_lo_kev,
            bin_width_kev,
            counts,
            errors,
            live_time_min,
            label,
            underflow: 0,
            overflow: 0,
        })
    }

    /// Poisson errors, √counts.
    pub fn from_counts(
        bin_lo_kev: f64,
        bin_width_kev: f64,
        counts: Vec<f64>,
        live_time_min: f64,
        label: SpectrumLabel,
    ) -> Result<Self> {
        let errors = counts.iter().map(|c| c.max(0.0).sqrt()).collect();
        Self::from_parts(bin_lo_kev, bin_width_kev, counts, errors, live_time_min, label)
    }

    pub fn bin_count(&self) -> usize {
        self.counts.len()
    }

    pub fn edge(&self, i: usize) -> f64 {
        self.bin_lo_kev + i as f64 * self.bin_width_kev
    }

    pub fn center(&self, i: usize) -> f64 {
        self.bin_lo_kev + (i as f64 + 0.5) * self.bin_width_kev
    }

    pub fn bin_hi_kev(&self) -> f64 {
        self.edge(self.bin_count())
    }

    pub fn total(&self) -> f64 {
        self.counts.iter().sum()
    }

    /// Bin holding `e`, using the same edges that [`Spectrum::edge`] reports.
    pub fn bin_of(&self, e: f64) -> Option<usize> {
        bin_index(self.bin_lo_kev, self.bin_width_kev, self.bin_count(), e)
    }

    pub fn same_binning(&self, other: &Spectrum) -> bool {
        self.bin_count() == other.bin_count()
            && self.bin_lo_kev == other.bin_lo_kev
            && self.bin_width_kev == other.bin_width_kev
    }

    /// Copy restricted to bins whose centres lie in `[lo, hi)`.
    pub fn window(&self, lo_kev: f64, hi_kev: f64) -> Spectrum {
        let keep: Vec<usize> = (0..self.bin_count())
            .filter(|&i| self.center(i) >= lo_kev && self.center(i) < hi_kev)
            .collect();
        let first = keep.first().copied().unwrap_or(0);
        Spectrum {
            bin_lo_kev: self.edge(first),
            counts: keep.iter().map(|&i| self.counts[i]).collect(),
            errors: keep.iter().map(|&i| self.errors[i]).collect(),
            underflow: 0,
            overflow: 0,
            ..self.clone()
        }
    }
}

fn bin_index(lo: f64, width: f64, n: usize, e: f64) -> Option<usize> {
    let edge = |i: i64| lo + i as f64 * width;
    let mut i = ((e - lo) / width).floor() as i64;
    if e >= edge(i + 1) {
        i += 1;
    } else if e < edge(i) {
        i -= 1;
    }
    (i >= 0 && (i as usize) < n && e.is_finite()).then_some(i as usize)
}

pub fn build_spectrum(
    energies: &[f64],
    bin_lo_kev: f64,
    bin_width_kev: f64,
    bin_count: usize,
    live_time_min: f64,
    label: SpectrumLabel,
) -> Result<Spectrum> {
    if bin_count == 0 {
        return Err(Error::domain("need at least one bin"));
    }
    let mut spectrum = Spectrum::from_counts(bin_lo_kev, bin_width_kev, vec![0.0; bin_count], live_time_min, label)?;
    for &e in energies {
        match spectrum.bin_of(e) {
            Some(i) => spectrum.counts[i] += 1.0,
            None if e < bin_lo_kev => spectrum.underflow += 1,
            None => spectrum.overflow += 1,
        }
    }
    for (err, c) in spectrum.errors.iter_mut().zip(&spectrum.counts) {
        *err = c.sqrt();
    }
    Ok(spectrum)
}

/// Current-on minus live-time-normalised current-off, errors in quadrature.
pub fn subtract_spectra(on: &Spectrum, off: &Spectrum) -> Result<Spectrum> {
    if !on.same_binning(off) {
        return Err(Error::domain(format!(
            "binning mismatch: {} bins from {} keV step {} vs {} bins from {} keV step {}",
            on.bin_count(),
            on.bin_lo_kev,
            on.bin_width_kev,
            off.bin_count(),
            off.bin_lo_kev,
            off.bin_width_kev
        )));
    }
    if !(off.live_time_min > 0.0) || !(on.live_time_min > 0.0) {
        return Err(Error::domain("both spectra need a positive live time"));
    }
    let norm = on.live_time_min / off.live_time_min;
    let counts = on.counts.iter().zip(&off.counts).map(|(a, b)| a - norm * b).collect();
    let errors = on
        .errors
        .iter()
        .zip(&off.errors)
        .map(|(a, b)| a.hypot(norm * b))
        .collect();
    Spectrum::from_parts(
        on.bin_lo_kev,
        on.bin_width_kev,
        counts,
        errors,
        on.live_time_min,
        SpectrumLabel::Difference,
    )
}

/// Sum over bins whose centres fall in the ROI; errors add in quadrature.
pub fn roi_counts(spectrum: &Spectrum, roi: &RegionOfInterest) -> Result<Counted> {
    if roi.lo_kev < spectrum.bin_lo_kev || roi.hi_kev > spectrum.bin_hi_kev() {
        return Err(Error::domain(format!(
            "ROI [{}, {}] keV outside spectrum span [{}, {}] keV",
            roi.lo_kev,
            roi.hi_kev,
            spectrum.bin_lo_kev,
            spectrum.bin_hi_kev()
        )));
    }
    let (value, var) = (0..spectrum.bin_count())
        .filter(|&i| roi.contains(spectrum.center(i)))
        .fold((0.0, 0.0), |(v, s2), i| {
            (v + spectrum.counts[i], s2 + spectrum.errors[i] * spectrum.errors[i])
        });
    Ok(Counted {
        value,
        error: var.sqrt(),
    })
}

const CSV_HEADER: &str = "bin_lo_keV,bin_hi_keV,counts,error";

impl Spectrum {
    /// CSV with a `# live_time_min=… label=…` line, a `# binning …` line
    /// carrying the exact bin parameters, the column header, and one row
    /// per bin.
    pub fn to_csv(&self) -> String {
        let mut s = format!("# live_time_min={} label={}\n", self.live_time_min, self.label);
        s.push_str(&format!(
            "# binning bin_lo_keV={} bin_width_keV={} bin_count={} underflow={} overflow={}\n",
            self.bin_lo_kev,
            self.bin_width_kev,
            self.bin_count(),
            self.underflow,
            self.overflow
        ));
        s.push_str(CSV_HEADER);
        s.push('\n');
        for i in 0..self.bin_count() {
            s.push_str(&format!(
                "{},{},{},{}\n",
                self.edge(i),
                self.edge(i + 1),
                self.counts[i],
                self.errors[i]
            ));
        }
        s
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Spectrum> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Spectrum::parse_csv(&text, &path.display().to_string())
    }

    pub fn parse_csv(text: &str, what: &str) -> Result<Spectrum> {
        let bad = |at: usize, msg: String| Error::format(what, at, msg);
        let mut live_time = None;
        let mut label = None;
        let mut binning: Option<(f64, f64, usize, u64, u64)> = None;
        let mut header_seen = false;
        let mut rows: Vec<(f64, f64, f64, f64)> = Vec::new();
        let mut offset = 0;

        for raw in text.split_inclusive('\n') {
            let at = offset;
            offset += raw.len();
            if !raw.ends_with('\n') {
                return Err(bad(at, "truncated line (no newline)".into()));
            }
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                let comment = comment.trim();
                let fields = key_values(comment);
                if let Some(rest) = comment.strip_prefix("binning") {
                    let kv = key_values(rest);
                    let get = |k: &str| {
                        kv.iter()
                            .find(|(key, _)| *key == k)
                            .map(|(_, v)| *v)
                            .ok_or_else(|| bad(at, format!("binning line lacks `{k}`")))
                    };
                    let num = |k: &str| -> Result<f64> {
                        get(k)?.parse().map_err(|e| bad(at, format!("`{k}`: {e}")))
                    };
                    let int = |k: &str| -> Result<u64> {
                        get(k)?.parse().map_err(|e| bad(at, format!("`{k}`: {e}")))
                    };
                    binning = Some((
                        num("bin_lo_keV")?,
                        num("bin_width_keV")?,
                        int("bin_count")? as usize,
                        int("underflow").unwrap_or(0),
                        int("overflow").unwrap_or(0),
                    ));
                } else if fields.iter().any(|(k, _)| *k == "live_time_min") {
                    for (k, v) in fields {
                        match k {
                            "live_time_min" => {
                                live_time = Some(v.parse::<f64>().map_err(|e| bad(at, format!("live time: {e}")))?)
                            }
                            "label" => label = Some(v.parse::<SpectrumLabel>().map_err(|e| bad(at, e))?),
                            _ => {}
                        }
                    }
                }
                continue;
            }
            if !header_seen {
                if line != CSV_HEADER {
                    return Err(bad(at, format!("expected header `{CSV_HEADER}`")));
                }
                header_seen = true;
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 4 {
                return Err(bad(at, format!("expected 4 fields, found {}", fields.len())));
            }
            let mut v = [0.0; 4];
            for (slot, f) in v.iter_mut().zip(&fields) {
                *slot = f.trim().parse().map_err(|e| bad(at, format!("bad number `{f}`: {e}")))?;
            }
            rows.push((v[0], v[1], v[2], v[3]));
        }

        let live_time = live_time.ok_or_else(|| bad(0, "missing `# live_time_min=… label=…` line".into()))?;
        let label = label.ok_or_else(|| bad(0, "missing spectrum label".into()))?;
        if !header_seen {
            return Err(bad(offset, "missing column header".into()));
        }
        if rows.is_empty() {
            return Err(bad(offset, "no bins".into()));
        }
        let (lo, width, n, underflow, overflow) = match binning {
            Some(b) => b,
            None => (rows[0].0, rows[0].1 - rows[0].0, rows.len(), 0, 0),
        };
        if rows.len() != n {
            return Err(bad(offset, format!("expected {n} bins, found {} (file truncated?)", rows.len())));
        }
        let tol = 1e-9 * width.abs().max(1.0);
        for (i, r) in rows.iter().enumerate() {
            let (e0, e1) = (lo + i as f64 * width, lo + (i + 1) as f64 * width);
            if (r.0 - e0).abs() > tol || (r.1 - e1).abs() > tol {
                return Err(bad(0, format!("bin {i} edges [{}, {}] are not uniform", r.0, r.1)));
            }
        }
        let mut s = Spectrum::from_parts(
            lo,
            width,
            rows.iter().map(|r| r.2).collect(),
            rows.iter().map(|r| r.3).collect(),
            live_time,
            label,
        )?;
        s.underflow = underflow;
        s.overflow = overflow;
        Ok(s)
    }
}

fn key_values(s: &str) -> Vec<(&str, &str)> {
    s.split_whitespace().filter_map(|tok| tok.split_once('=')).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn single_bin(count: f64, error: f64, label: SpectrumLabel) -> Spectrum {
        Spectrum::from_parts(7.564, 0.330, vec![count], vec![error], 14510.0, label).unwrap()
    }

    #[test]
    fn empty_input_gives_zero_counts() {
        let s = build_spectrum(&[], 0.0, 0.01, 10, 1.0, SpectrumLabel::CurrentOn).unwrap();
        assert!(s.counts.iter().all(|&c| c == 0.0));
        assert!(s.errors.iter().all(|&c| c == 0.0));
    }

    #[test]
    fn interior_edge_goes_up() {
        let s = build_spectrum(&[0.004 + 0.01 * 756.0], 0.004, 0.01, 2000, 1.0, SpectrumLabel::CurrentOn).unwrap();
        let i = s.counts.iter().position(|&c| c == 1.0).unwrap();
        assert_eq!(s.edge(i), 0.004 + 0.01 * 756.0);
        let t = build_spectrum(&[1.0], 0.0, 0.5, 4, 1.0, SpectrumLabel::CurrentOn).unwrap();
        assert_eq!(t.counts, vec![0.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn under_and_overflow() {
        let s = build_spectrum(&[-1.0, 0.0, 1.99, 2.0, 5.0], 0.0, 0.5, 4, 1.0, SpectrumLabel::CurrentOn).unwrap();
        assert_eq!(s.underflow, 1);
        assert_eq!(s.overflow, 2);
        assert_eq!(s.total(), 2.0);
    }

    #[test]
    fn lnf_subtraction() {
        let on = single_bin(2721.0, 52.0, SpectrumLabel::CurrentOn);
        let off = single_bin(2742.0, 52.0, SpectrumLabel::CurrentOff);
        let d = subtract_spectra(&on, &off).unwrap();
        assert_eq!(d.counts[0], -21.0);
        assert!((d.errors[0] - 73.539).abs() < 1e-3, "{}", d.errors[0]);
        assert_eq!(d.label, SpectrumLabel::Difference);
    }

    #[test]
    fn identical_spectra_cancel() {
        let s = build_spectrum(&[1.0, 1.2, 1.2, 3.0], 0.0, 0.5, 8, 10.0, SpectrumLabel::CurrentOn).unwrap();
        let d = subtract_spectra(&s, &s).unwrap();
        assert!(d.counts.iter().all(|&c| c == 0.0));
        for (e, c) in d.errors.iter().zip(&s.counts) {
            assert!((e - (2.0 * c).sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn live_time_normalisation() {
        let on = Spectrum::from_parts(0.0, 1.0, vec![10.0, 7.0], vec![3.0, 2.0], 20.0, SpectrumLabel::CurrentOn).unwrap();
        let off = Spectrum::from_parts(0.0, 1.0, vec![4.0, 1.0], vec![0.0, 0.0], 10.0, SpectrumLabel::CurrentOff).unwrap();
        let d = subtract_spectra(&on, &off).unwrap();
        assert_eq!(d.counts, vec![2.0, 5.0]);
        assert_eq!(d.errors, vec![3.0, 2.0]);
    }

    #[test]
    fn binning_mismatch() {
        let a = build_spectrum(&[], 0.0, 0.5, 4, 1.0, SpectrumLabel::CurrentOn).unwrap();
        let b = build_spectrum(&[], 0.0, 0.5, 5, 1.0, SpectrumLabel::CurrentOff).unwrap();
        assert!(matches!(subtract_spectra(&a, &b), Err(Error::Domain(_))));
    }

    #[test]
    fn roi_sums() {
        let empty = build_spectrum(&[], 0.004, 0.01, 2000, 1.0, SpectrumLabel::CurrentOn).unwrap();
        let r = roi_counts(&empty, &RegionOfInterest::default()).unwrap();
        assert_eq!((r.value, r.error), (0.0, 0.0));

        let energies: Vec<f64> = (0..100).map(|i| 0.1 + 0.19 * i as f64).collect();
        let s = build_spectrum(&energies, 0.0, 0.5, 40, 1.0, SpectrumLabel::CurrentOn).unwrap();
        let all = roi_counts(&s, &RegionOfInterest::new(0.0, 20.0).unwrap()).unwrap();
        assert_eq!(all.value, s.total());
        assert!((all.error - s.total().sqrt()).abs() < 1e-12);

        assert!(roi_counts(&s, &RegionOfInterest::new(-1.0, 2.0).unwrap()).is_err());
        assert!(RegionOfInterest::new(2.0, 1.0).is_err());
    }

    #[test]
    fn default_roi_covers_33_ten_ev_bins() {
        let s = Spectrum::from_counts(0.004, 0.01, vec![1.0; 2000], 1.0, SpectrumLabel::CurrentOn).unwrap();
        let r = roi_counts(&s, &RegionOfInterest::default()).unwrap();
        assert_eq!(r.value, 33.0);
        let roi = RegionOfInterest::default();
        assert!((roi.width() - 0.330).abs() < 1e-12);
        assert!((roi.center() - 7.729).abs() < 1e-12);
    }

    #[test]
    fn truncated_csv_names_offset() {
        let s = build_spectrum(&[1.0, 2.0], 0.0, 0.5, 6, 1.0, SpectrumLabel::CurrentOn).unwrap();
        let text = s.to_csv();
        let cut = &text[..text.len() - 5];
        let err = Spectrum::parse_csv(cut, "s").unwrap_err();
        let Error::Format { offset, .. } = err else { panic!("{err}") };
        let last_line_start = cut.rfind('\n').unwrap() + 1;
        assert_eq!(offset, last_line_start);
        // Whole rows missing.
        let lines: Vec<&str> = text.lines().collect();
        let short = lines[..lines.len() - 2].join("\n") + "\n";
        assert!(matches!(Spectrum::parse_csv(&short, "s"), Err(Error::Format { .. })));
    }

    proptest! {
        #[test]
        fn csv_round_trips(energies in proptest::collection::vec(-1.0f64..25.0, 0..300), live in 1.0f64..1e5) {
            let s = build_spectrum(&energies, 0.004, 0.01, 2000, live, SpectrumLabel::CurrentOff).unwrap();
            prop_assert_eq!(Spectrum::parse_csv(&s.to_csv(), "s").unwrap(), s);
        }

        #[test]
        fn fill_conserves_entries(energies in proptest::collection::vec(-5.0f64..30.0, 0..500)) {
            let s = build_spectrum(&energies, 0.004, 0.01, 2000, 1.0, SpectrumLabel::CurrentOn).unwrap();
            prop_assert_eq!(s.total() as u64 + s.underflow + s.overflow, energies.len() as u64);
            for &e in &energies {
                if let Some(i) = s.bin_of(e) {
                    prop_assert!(s.edge(i) <= e && e < s.edge(i + 1));
                }
            }
        }
    }
}
