//! Run configuration.
//!
//! The file is INI-style text: `[section]` headers, `key = value` lines,
//! `#` comments (whole-line or trailing after whitespace). Every key is
//! validated; unknown sections and keys are rejected. Relative paths are
//! resolved against the directory holding the config file.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::analysis::RegionOfInterest;
use crate::ccd::{ClusterThresholds, EnergyCalibration, FrameSynthesis, ResolutionModel, ResolutionScaling};
use crate::physics::{ConductorSpec, RunSummary, MAX_CCD_COUNT};
use crate::transport::DetectorGeometry;

/// Environment variable that overrides the configured output directory.
pub const OUTPUT_DIR_ENV: &str = "PEPSIM_OUT_DIR";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("config error [missing-file]: {} not found", path.display())]
    NotFound { path: PathBuf },
    #[error("config error [unreadable]: {}: {message}", path.display())]
    Unreadable { path: PathBuf, message: String },
    #[error("config error [syntax] line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("config error [duplicate-key] `{key}` set on line {first_line} and again on line {second_line}")]
    DuplicateKey {
        key: String,
        first_line: usize,
        second_line: usize,
    },
    #[error("config error [unknown-section] line {line}: `[{section}]`")]
    UnknownSection { section: String, line: usize },
    #[error("config error [unknown-key] line {line}: `{key}`")]
    UnknownKey { key: String, line: usize },
    #[error("config error [missing-keys] required keys missing: {}", keys.join(", "))]
    MissingKeys { keys: Vec<String> },
    #[error("config error [invalid-value] line {line}: `{key}`: {message}")]
    InvalidValue { key: String, line: usize, message: String },
    #[error(
        "config error [missing-geometric-factor] no geometric factor available: run `pepsim geom-factor` and pass its \
         report with --geom-factor (or `[limit] geometric_factor_report`), or set `[limit] geometric_factor = 0.01008` \
         (2.1% survival x acceptance times 48% CCD efficiency)"
    )]
    MissingGeometricFactor,
}

impl ConfigError {
    pub fn code(&self) -> &'static str {
        match self {
            ConfigError::NotFound { .. } => "missing-file",
            ConfigError::Unreadable { .. } => "unreadable",
            ConfigError::Syntax { .. } => "syntax",
            ConfigError::DuplicateKey { .. } => "duplicate-key",
            ConfigError::UnknownSection { .. } => "unknown-section",
            ConfigError::UnknownKey { .. } => "unknown-key",
            ConfigError::MissingKeys { .. } => "missing-keys",
            ConfigError::InvalidValue { .. } => "invalid-value",
            ConfigError::MissingGeometricFactor => "missing-geometric-factor",
        }
    }
}

type ConfigResult<T> = std::result::Result<T, ConfigError>;

/// Spectral shape of the simulated background.
#[derive(Clone, Debug, PartialEq)]
pub enum BackgroundShape {
    Flat,
    /// Piecewise-linear density through `(energy keV, relative density)` nodes.
    Table(Vec<(f64, f64)>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct BackgroundModel {
    /// Mean events per keV per chip read-out, averaged over the spectrum range.
    pub rate_per_kev_per_frame: f64,
    pub shape: BackgroundShape,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunPlan {
    pub current_a: f64,
    pub on_duration_min: f64,
    pub off_duration_min: f64,
    pub readout_cadence_min: f64,
    pub live_ccd_count: u32,
}

impl RunPlan {
    pub fn current_on(&self) -> RunSummary {
        RunSummary::constant_current(
            self.current_a,
            self.on_duration_min,
            self.readout_cadence_min,
            self.live_ccd_count,
        )
        .expect("validated run plan")
    }

    pub fn current_off(&self) -> RunSummary {
        RunSummary::constant_current(0.0, self.off_duration_min, self.readout_cadence_min, self.live_ccd_count)
            .expect("validated run plan")
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Binning {
    pub lo_kev: f64,
    pub width_kev: f64,
    pub count: usize,
}

impl Binning {
    pub fn hi_kev(&self) -> f64 {
        self.lo_kev + self.count as f64 * self.width_kev
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransportSettings {
    pub energy_kev: f64,
    pub ccd_efficiency: f64,
    pub sample_count: u64,
    pub attenuation_table: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LimitSettings {
    pub geometric_factor: Option<f64>,
    pub geometric_factor_report: Option<PathBuf>,
    pub n_sigma: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CcdSettings {
    /// Route simulated events through frame synthesis and clustering.
    pub reconstruct: bool,
    pub synthesis: FrameSynthesis,
    pub thresholds: ClusterThresholds,
    pub corpus_frames: u64,
    pub hits_per_frame: u32,
    pub dump_frames: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub run: RunPlan,
    pub conductor: ConductorSpec,
    pub geometry: DetectorGeometry,
    pub transport: TransportSettings,
    pub limit: LimitSettings,
    pub beta2_over_2: f64,
    pub background: BackgroundModel,
    pub resolution: ResolutionModel,
    pub binning: Binning,
    pub roi: RegionOfInterest,
    pub ccd: CcdSettings,
    pub seed: u64,
    pub output_dir: PathBuf,
    /// SHA-256 of the config text, hex.
    pub source_sha256: String,
}

impl RunConfig {
    pub fn load(path: impl AsRef<Path>) -> ConfigResult<Self> {
        let path = path.as_ref();
        let text = match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                return Err(ConfigError::NotFound { path: path.into() })
            }
            Err(e) => {
                return Err(ConfigError::Unreadable {
                    path: path.into(),
                    message: e.to_string(),
                })
            }
        };
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, &base)
    }

    /// Parses config text; relative paths resolve against `base_dir`.
    pub fn parse(text: &str, base_dir: &Path) -> ConfigResult<Self> {
        let raw = RawConfig::parse(text)?;
        let mut v = Values {
            raw,
            base_dir: base_dir.to_path_buf(),
        };
        let cfg = build(&mut v)?;
        Ok(RunConfig {
            source_sha256: hex::encode(Sha256::digest(text.as_bytes())),
            ..cfg
        })
    }

    /// Output directory: explicit override, then `$PEPSIM_OUT_DIR`, then the config.
    pub fn resolve_output_dir(&self, cli_override: Option<&Path>) -> PathBuf {
        if let Some(p) = cli_override {
            return p.to_path_buf();
        }
        match std::env::var_os(OUTPUT_DIR_ENV) {
            Some(v) if !v.is_empty() => PathBuf::from(v),
            _ => self.output_dir.clone(),
        }
    }
}

/// Known keys per section, with whether each is required.
const SCHEMA: &[(&str, &[(&str, bool)])] = &[
    (
        "run",
        &[
            ("current_a", true),
            ("duration_min", true),
            ("off_duration_min", false),
            ("readout_cadence_min", true),
            ("live_ccd_count", true),
        ],
    ),
    (
        "conductor",
        &[
            ("length_cm", false),
            ("mean_free_path_cm", false),
            ("capture_to_scatter_floor", false),
        ],
    ),
    (
        "geometry",
        &[
            ("cylinder_radius_cm", false),
            ("cylinder_thickness_cm", false),
            ("cylinder_height_cm", false),
            ("ccd_standoff_cm", false),
            ("panel_count", false),
            ("chips_per_panel", false),
            ("chip_width_cm", false),
            ("chip_height_cm", false),
            ("dead_chips", false),
        ],
    ),
    (
        "transport",
        &[
            ("energy_kev", false),
            ("ccd_efficiency", false),
            ("sample_count", false),
            ("attenuation_table", false),
        ],
    ),
    (
        "limit",
        &[
            ("geometric_factor", false),
            ("geometric_factor_report", false),
            ("n_sigma", false),
        ],
    ),
    ("signal", &[("beta2_over_2", false)]),
    (
        "background",
        &[("rate_per_kev_per_frame", false), ("shape", false), ("table", false)],
    ),
    (
        "resolution",
        &[("fwhm_kev", false), ("ref_energy_kev", false), ("scaling", false)],
    ),
    ("binning", &[("lo_kev", false), ("width_kev", false), ("count", false)]),
    ("roi", &[("lo_kev", false), ("hi_kev", false)]),
    (
        "ccd",
        &[
            ("reconstruct", false),
            ("frame_size", false),
            ("noise_sigma_adc", false),
            ("track_rate", false),
            ("gain_ev_per_adc", false),
            ("offset_ev", false),
            ("seed_sigma", false),
            ("neighbor_sigma", false),
            ("corpus_frames", false),
            ("hits_per_frame", false),
            ("dump_frames", false),
        ],
    ),
    ("output", &[("seed", true), ("dir", false)]),
];

/// `section.key → (value, line)` after syntax and schema checks.
struct RawConfig {
    values: BTreeMap<String, (String, usize)>,
}

impl RawConfig {
    fn parse(text: &str) -> ConfigResult<Self> {
        let mut values: BTreeMap<String, (String, usize)> = BTreeMap::new();
        let mut section: Option<&'static [(&'static str, bool)]> = None;
        let mut section_name = String::new();
        for (i, raw_line) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = strip_comment(raw_line).trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let Some(name) = rest.strip_suffix(']') else {
                    return Err(ConfigError::Syntax {
                        line: line_no,
                        message: format!("unterminated section header `{line}`"),
                    });
                };
                let name = name.trim();
                let Some((_, keys)) = SCHEMA.iter().find(|(s, _)| *s == name) else {
                    return Err(ConfigError::UnknownSection {
                        section: name.to_owned(),
                        line: line_no,
                    });
                };
                section = Some(keys);
                section_name = name.to_owned();
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError::Syntax {
                    line: line_no,
                    message: format!("expected `key = value`, got `{line}`"),
                });
            };
            let key = key.trim();
            let value = value.trim();
            let Some(keys) = section else {
                return Err(ConfigError::Syntax {
                    line: line_no,
                    message: format!("`{key}` appears before any [section] header"),
                });
            };
            if key.is_empty() || value.is_empty() {
                return Err(ConfigError::Syntax {
                    line: line_no,
                    message: "empty key or value".into(),
                });
            }
            let full = format!("{section_name}.{key}");
            if !keys.iter().any(|(k, _)| *k == key) {
                return Err(ConfigError::UnknownKey { key: full, line: line_no });
            }
            if let Some((_, first)) = values.get(&full) {
                return Err(ConfigError::DuplicateKey {
                    key: full,
                    first_line: *first,
                    second_line: line_no,
                });
            }
            values.insert(full, (value.to_owned(), line_no));
        }
        let missing: Vec<String> = SCHEMA
            .iter()
            .flat_map(|(s, keys)| keys.iter().filter(|(_, req)| *req).map(move |(k, _)| format!("{s}.{k}")))
            .filter(|k| !values.contains_key(k))
            .collect();
        if !missing.is_empty() {
            return Err(ConfigError::MissingKeys { keys: missing });
        }
        Ok(Self { values })
    }
}

fn strip_comment(line: &str) -> &str {
    let trimmed = line.trim_start();
    if trimmed.starts_with('#') || trimmed.starts_with(';') {
        return "";
    }
    match line.find(" #").or_else(|| line.find("\t#")) {
        Some(i) => &line[..i],
        None => line,
    }
}

struct Values {
    raw: RawConfig,
    base_dir: PathBuf,
}

impl Values {
    fn get(&self, key: &str) -> Option<&(String, usize)> {
        self.raw.values.get(key)
    }

    fn line(&self, key: &str) -> usize {
        self.get(key).map_or(0, |v| v.1)
    }

    fn invalid(&self, key: &str, message: impl fmt::Display) -> ConfigError {
        ConfigError::InvalidValue {
            key: key.to_owned(),
            line: self.line(key),
            message: message.to_string(),
        }
    }

    fn parsed<T: std::str::FromStr>(&self, key: &str, default: T) -> ConfigResult<T>
    where
        T::Err: fmt::Display,
    {
        match self.get(key) {
            None => Ok(default),
            Some((v, _)) => v.parse().map_err(|e| self.invalid(key, format!("`{v}`: {e}"))),
        }
    }

    fn optional<T: std::str::FromStr>(&self, key: &str) -> ConfigResult<Option<T>>
    where
        T::Err: fmt::Display,
    {
        match self.get(key) {
            None => Ok(None),
            Some((v, _)) => v.parse().map(Some).map_err(|e| self.invalid(key, format!("`{v}`: {e}"))),
        }
    }

    fn positive(&self, key: &str, default: f64) -> ConfigResult<f64> {
        let v = self.parsed(key, default)?;
        if !(v > 0.0 && v.is_finite()) {
            return Err(self.invalid(key, format!("must be > 0, got {v}")));
        }
        Ok(v)
    }

    fn non_negative(&self, key: &str, default: f64) -> ConfigResult<f64> {
        let v = self.parsed(key, default)?;
        if !(v >= 0.0 && v.is_finite()) {
            return Err(self.invalid(key, format!("must be >= 0, got {v}")));
        }
        Ok(v)
    }

    /// Accepts `1e6`-style integers as well as plain digits.
    fn count(&self, key: &str, default: u64) -> ConfigResult<u64> {
        match self.get(key) {
            None => Ok(default),
            Some((v, _)) => {
                if let Ok(n) = v.parse::<u64>() {
                    return Ok(n);
                }
                match v.parse::<f64>() {
                    Ok(f) if f >= 0.0 && f.fract() == 0.0 && f <= 2f64.powi(53) => Ok(f as u64),
                    _ => Err(self.invalid(key, format!("expected a non-negative integer, got `{v}`"))),
                }
            }
        }
    }

    fn path(&self, key: &str) -> Option<PathBuf> {
        self.get(key).map(|(v, _)| {
            let p = PathBuf::from(v);
            if p.is_absolute() {
                p
            } else {
                self.base_dir.join(p)
            }
        })
    }

    fn bool(&self, key: &str, default: bool) -> ConfigResult<bool> {
        match self.get(key).map(|(v, _)| v.as_str()) {
            None => Ok(default),
            Some("true" | "yes" | "on" | "1") => Ok(true),
            Some("false" | "no" | "off" | "0") => Ok(false),
            Some(v) => Err(self.invalid(key, format!("expected true/false, got `{v}`"))),
        }
    }
}

fn build(v: &mut Values) -> ConfigResult<RunConfig> {
    let on_duration = v.non_negative("run.duration_min", 0.0)?;
    let live_ccd_count = v.count("run.live_ccd_count", 0)?;
    if live_ccd_count > u64::from(MAX_CCD_COUNT) {
        return Err(v.invalid("run.live_ccd_count", format!("at most {MAX_CCD_COUNT} CCDs")));
    }
    let run = RunPlan {
        current_a: v.non_negative("run.current_a", 0.0)?,
        on_duration_min: on_duration,
        off_duration_min: v.non_negative("run.off_duration_min", on_duration)?,
        readout_cadence_min: v.positive("run.readout_cadence_min", 10.0)?,
        live_ccd_count: live_ccd_count as u32,
    };

    let dc = ConductorSpec::default();
    let conductor = ConductorSpec {
        length_cm: v.positive("conductor.length_cm", dc.length_cm)?,
        mean_free_path_cm: v.positive("conductor.mean_free_path_cm", dc.mean_free_path_cm)?,
        capture_to_scatter_floor: v.positive("conductor.capture_to_scatter_floor", dc.capture_to_scatter_floor)?,
    };
    if conductor.capture_to_scatter_floor > 1.0 {
        return Err(v.invalid("conductor.capture_to_scatter_floor", "must be <= 1"));
    }

    let dg = DetectorGeometry::default();
    let panel_count = v.count("geometry.panel_count", u64::from(dg.ccd_panel_count))? as u32;
    let chips_per_panel = v.count("geometry.chips_per_panel", u64::from(dg.chips_per_panel))? as u32;
    let chip_total = panel_count as usize * chips_per_panel as usize;
    let mut live_chips = vec![true; chip_total];
    let dead_default = if v.get("geometry.dead_chips").is_none() && chip_total == dg.chip_count() {
        dg.live_chips.iter().map(|l| !l).collect()
    } else {
        vec![false; chip_total]
    };
    match v.get("geometry.dead_chips").map(|(s, _)| s.clone()) {
        None => {
            for (l, d) in live_chips.iter_mut().zip(dead_default) {
                *l = !d;
            }
        }
        Some(list) if list == "none" => {}
        Some(list) => {
            for tok in list.split(',') {
                let idx: usize = tok
                    .trim()
                    .parse()
                    .map_err(|e| v.invalid("geometry.dead_chips", format!("`{tok}`: {e}")))?;
                if idx >= chip_total {
                    return Err(v.invalid(
                        "geometry.dead_chips",
                        format!("chip {idx} does not exist ({chip_total} chips)"),
                    ));
                }
                live_chips[idx] = false;
            }
        }
    }
    let geometry = DetectorGeometry {
        cylinder_radius_cm: v.positive("geometry.cylinder_radius_cm", dg.cylinder_radius_cm)?,
        cylinder_thickness_cm: v.positive("geometry.cylinder_thickness_cm", dg.cylinder_thickness_cm)?,
        cylinder_height_cm: v.positive("geometry.cylinder_height_cm", dg.cylinder_height_cm)?,
        ccd_standoff_cm: v.positive("geometry.ccd_standoff_cm", dg.ccd_standoff_cm)?,
        ccd_panel_count: panel_count,
        ccd_chip_width_cm: v.positive("geometry.chip_width_cm", dg.ccd_chip_width_cm)?,
        ccd_chip_height_cm: v.positive("geometry.chip_height_cm", dg.ccd_chip_height_cm)?,
        chips_per_panel,
        live_chips,
    };
    if let Err(e) = geometry.validate() {
        return Err(v.invalid("geometry", e));
    }
    if geometry.live_chip_count() != run.live_ccd_count as usize {
        return Err(v.invalid(
            "run.live_ccd_count",
            format!(
                "{} live CCDs declared but the geometry has {} live chips",
                run.live_ccd_count,
                geometry.live_chip_count()
            ),
        ));
    }

    let ccd_efficiency = v.positive("transport.ccd_efficiency", 0.48)?;
    if ccd_efficiency > 1.0 {
        return Err(v.invalid("transport.ccd_efficiency", "must be <= 1"));
    }
    let transport = TransportSettings {
        energy_kev: v.positive("transport.energy_kev", 7.729)?,
        ccd_efficiency,
        sample_count: v.count("transport.sample_count", 1_000_000)?,
        attenuation_table: v.path("transport.attenuation_table"),
    };
    if transport.sample_count < crate::transport::MIN_SAMPLE_COUNT {
        return Err(v.invalid(
            "transport.sample_count",
            format!("at least {} photons", crate::transport::MIN_SAMPLE_COUNT),
        ));
    }

    let geometric_factor: Option<f64> = v.optional("limit.geometric_factor")?;
    if let Some(g) = geometric_factor {
        if !(g > 0.0 && g < 1.0) {
            return Err(v.invalid("limit.geometric_factor", format!("must lie in (0, 1), got {g}")));
        }
    }
    let limit = LimitSettings {
        geometric_factor,
        geometric_factor_report: v.path("limit.geometric_factor_report"),
        n_sigma: v.positive("limit.n_sigma", 3.0)?,
    };

    let beta2_over_2 = v.non_negative("signal.beta2_over_2", 0.0)?;
    if beta2_over_2 > 1.0 {
        return Err(v.invalid("signal.beta2_over_2", "must lie in [0, 1]"));
    }

    let shape = match v.get("background.shape").map(|(s, _)| s.as_str()).unwrap_or("flat") {
        "flat" => BackgroundShape::Flat,
        "table" => {
            let path = v
                .path("background.table")
                .ok_or_else(|| v.invalid("background.shape", "`table` needs `background.table = <path>`"))?;
            BackgroundShape::Table(load_background_table(&path).map_err(|m| v.invalid("background.table", m))?)
        }
        other => return Err(v.invalid("background.shape", format!("expected flat or table, got `{other}`"))),
    };
    let background = BackgroundModel {
        rate_per_kev_per_frame: v.non_negative("background.rate_per_kev_per_frame", DEFAULT_BACKGROUND_RATE)?,
        shape,
    };

    let dr = ResolutionModel::default();
    let resolution = ResolutionModel {
        fwhm_at_ref_kev: v.non_negative("resolution.fwhm_kev", dr.fwhm_at_ref_kev)?,
        ref_energy_kev: v.positive("resolution.ref_energy_kev", dr.ref_energy_kev)?,
        scaling: match v.get("resolution.scaling").map(|(s, _)| s.as_str()).unwrap_or("constant") {
            "constant" => ResolutionScaling::Constant,
            "sqrt" => ResolutionScaling::SqrtEnergy,
            other => return Err(v.invalid("resolution.scaling", format!("expected constant or sqrt, got `{other}`"))),
        },
    };

    let binning = Binning {
        lo_kev: v.parsed("binning.lo_kev", 0.004)?,
        width_kev: v.positive("binning.width_kev", 0.010)?,
        count: v.count("binning.count", 2000)? as usize,
    };
    if binning.count == 0 {
        return Err(v.invalid("binning.count", "need at least one bin"));
    }
    if !(binning.hi_kev() > 0.0) {
        return Err(v.invalid("binning.lo_kev", "spectrum must reach positive energies"));
    }

    let droi = RegionOfInterest::default();
    let roi_lo = v.parsed("roi.lo_kev", droi.lo_kev)?;
    let roi_hi = v.parsed("roi.hi_kev", droi.hi_kev)?;
    let roi = RegionOfInterest::new(roi_lo, roi_hi).map_err(|e| v.invalid("roi.lo_kev", e))?;
    if roi.lo_kev < binning.lo_kev || roi.hi_kev > binning.hi_kev() {
        return Err(v.invalid("roi.lo_kev", "ROI must lie inside the binned range"));
    }

    let ds = FrameSynthesis::default();
    let dt = ClusterThresholds::default();
    let frame_size = v.count("ccd.frame_size", u64::from(ds.width))?;
    if !(1..=4096).contains(&frame_size) {
        return Err(v.invalid("ccd.frame_size", "must lie in 1..=4096"));
    }
    let calibration = EnergyCalibration {
        gain_ev_per_adc: v.positive("ccd.gain_ev_per_adc", 1.0)?,
        offset_ev: v.parsed("ccd.offset_ev", 0.0)?,
    };
    let ccd = CcdSettings {
        reconstruct: v.bool("ccd.reconstruct", false)?,
        synthesis: FrameSynthesis {
            width: frame_size as u32,
            height: frame_size as u32,
            exposure_min: run.readout_cadence_min as f32,
            noise_sigma_adc: v.non_negative("ccd.noise_sigma_adc", ds.noise_sigma_adc)?,
            track_rate: v.non_negative("ccd.track_rate", ds.track_rate)?,
            calibration,
            ..ds
        },
        thresholds: ClusterThresholds {
            seed_sigma: v.positive("ccd.seed_sigma", dt.seed_sigma)?,
            neighbor_sigma: v.positive("ccd.neighbor_sigma", dt.neighbor_sigma)?,
        },
        corpus_frames: v.count("ccd.corpus_frames", 1000)?,
        hits_per_frame: v.count("ccd.hits_per_frame", 5)? as u32,
        dump_frames: v.count("ccd.dump_frames", 0)?,
    };

    let seed = v.count("output.seed", 0)?;
    let output_dir = v.path("output.dir").unwrap_or_else(|| v.base_dir.join("pepsim-out"));

    Ok(RunConfig {
        run,
        conductor,
        geometry,
        transport,
        limit,
        beta2_over_2,
        background,
        resolution,
        binning,
        roi,
        ccd,
        seed,
        output_dir,
        source_sha256: String::new(),
    })
}

/// Flat background rate giving about 2730 counts in the default ROI over
/// 14510 min of 10-minute read-outs of 14 CCDs.
pub const DEFAULT_BACKGROUND_RATE: f64 = 0.4072;

fn load_background_table(path: &Path) -> std::result::Result<Vec<(f64, f64)>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut nodes = Vec::new();
    let mut header = false;
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !header {
            if line != "energy_keV,density" {
                return Err(format!("line {}: expected header `energy_keV,density`", i + 1));
            }
            header = true;
            continue;
        }
        let (e, d) = line.split_once(',').ok_or_else(|| format!("line {}: expected two fields", i + 1))?;
        let e: f64 = e.trim().parse().map_err(|err| format!("line {}: {err}", i + 1))?;
        let d: f64 = d.trim().parse().map_err(|err| format!("line {}: {err}", i + 1))?;
        if !(d >= 0.0) {
            return Err(format!("line {}: density must be >= 0", i + 1));
        }
        if let Some(&(prev, _)) = nodes.last() {
            if !(e > prev) {
                return Err(format!("line {}: energies must increase", i + 1));
            }
        }
        nodes.push((e, d));
    }
    if nodes.len() < 2 || nodes.iter().all(|n| n.1 == 0.0) {
        return Err("background table needs at least two nodes and some positive density".into());
    }
    Ok(nodes)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[run]\ncurrent_a = 40\nduration_min = 14510\nreadout_cadence_min = 10\nlive_ccd_count = 14\n[output]\nseed = 1\n";

    fn parse(text: &str) -> ConfigResult<RunConfig> {
        RunConfig::parse(text, Path::new("/tmp"))
    }

    #[test]
    fn minimal_config_takes_defaults() {
        let c = parse(MINIMAL).unwrap();
        assert_eq!(c.run.off_duration_min, 14510.0);
        assert_eq!(c.geometry, DetectorGeometry::default());
        assert_eq!(c.roi, RegionOfInterest::default());
        assert!((c.run.current_on().integrated_charge_c - 34.824e6).abs() < 1e-3);
        assert_eq!(c.run.current_off().integrated_charge_c, 0.0);
        assert_eq!(c.output_dir, PathBuf::from("/tmp/pepsim-out"));
    }

    #[test]
    fn empty_file_lists_required_keys() {
        let err = parse("").unwrap_err();
        assert_eq!(err.code(), "missing-keys");
        let ConfigError::MissingKeys { keys } = err else { unreachable!() };
        assert!(keys.contains(&"output.seed".to_string()));
        assert!(keys.contains(&"run.current_a".to_string()));
    }

    #[test]
    fn duplicate_key_names_both_lines() {
        let text = format!("{MINIMAL}[run]\n# again\ncurrent_a = 41\n");
        let err = parse(&text).unwrap_err();
        assert_eq!(
            err,
            ConfigError::DuplicateKey {
                key: "run.current_a".into(),
                first_line: 2,
                second_line: 10
            }
        );
        let msg = err.to_string();
        assert!(msg.contains("run.current_a") && msg.contains("line 2") && msg.contains("line 10"), "{msg}");
    }

    #[test]
    fn unknown_keys_and_sections() {
        let err = parse(&format!("{MINIMAL}[run]\ncurent_a = 1\n")).unwrap_err();
        assert_eq!(err, ConfigError::UnknownKey { key: "run.curent_a".into(), line: 9 });
        let err = parse(&format!("{MINIMAL}[bogus]\n")).unwrap_err();
        assert_eq!(err.code(), "unknown-section");
    }

    #[test]
    fn syntax_errors_carry_lines() {
        assert_eq!(
            parse("[run\n").unwrap_err(),
            ConfigError::Syntax { line: 1, message: "unterminated section header `[run`".into() }
        );
        let err = parse("[run]\ncurrent_a 40\n").unwrap_err();
        assert!(matches!(err, ConfigError::Syntax { line: 2, .. }));
        let err = parse("current_a = 40\n").unwrap_err();
        assert!(matches!(err, ConfigError::Syntax { line: 1, .. }));
    }

    #[test]
    fn invariant_violations() {
        let bad_floor = format!("{MINIMAL}[conductor]\ncapture_to_scatter_floor = 2\n");
        let err = parse(&bad_floor).unwrap_err();
        assert!(matches!(err, ConfigError::InvalidValue { line: 9, .. }), "{err}");
        let bad_ccds = MINIMAL.replace("live_ccd_count = 14", "live_ccd_count = 12");
        assert_eq!(parse(&bad_ccds).unwrap_err().code(), "invalid-value");
        let bad_num = MINIMAL.replace("current_a = 40", "current_a = forty");
        assert!(matches!(parse(&bad_num).unwrap_err(), ConfigError::InvalidValue { line: 2, .. }));
        let bad_gf = format!("{MINIMAL}[limit]\ngeometric_factor = 1.5\n");
        assert_eq!(parse(&bad_gf).unwrap_err().code(), "invalid-value");
        let roi_outside = format!("{MINIMAL}[roi]\nlo_kev = 30\nhi_kev = 31\n");
        assert_eq!(parse(&roi_outside).unwrap_err().code(), "invalid-value");
    }

    #[test]
    fn comments_and_counts() {
        let text = format!("{MINIMAL}[transport]\nsample_count = 1e7   # ten million\n[geometry]\ndead_chips = none\n");
        let err = parse(&text).unwrap_err();
        // 16 live chips conflict with 14 live CCDs.
        assert_eq!(err.code(), "invalid-value");
        let text = text.replace("live_ccd_count = 14", "live_ccd_count = 16");
        let c = parse(&text).unwrap();
        assert_eq!(c.transport.sample_count, 10_000_000);
        assert_eq!(c.geometry.live_chip_count(), 16);
    }

    #[test]
    fn missing_file() {
        let err = RunConfig::load("/nonexistent/pepsim.cfg").unwrap_err();
        assert_eq!(err.code(), "missing-file");
    }

    #[test]
    fn hash_tracks_the_text() {
        let a = parse(MINIMAL).unwrap();
        let b = parse(&format!("{MINIMAL}# trailing comment\n")).unwrap();
        assert_eq!(a.source_sha256.len(), 64);
        assert_ne!(a.source_sha256, b.source_sha256);
    }
}
