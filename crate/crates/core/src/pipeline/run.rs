use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;

use super::config::{BackgroundShape, ConfigError, RunConfig};
use crate::analysis::{
    build_spectrum, compute_limit, project_sensitivity, roi_counts, subtract_spectra, Counted, LimitResult,
    Projection, RegionOfInterest, SensitivityScales, Spectrum, SpectrumLabel,
};
use crate::ccd::{
    reconstruct_energies, run_corpus, smear_energy, synthesize_frame, CorpusSpec, CorpusStats, FrameSynthesis, Hit,
};
use crate::error::{Error, Result};
use crate::kv::{KvReport, Num};
use crate::physics::{
    expected_signal_counts, internal_scatter_count, new_electron_count, signal_coefficient, RunSummary,
    TransitionLine,
};
use crate::rng::SeedTree;
use crate::transport::{estimate_geometric_factor, AttenuationTable, GeometricFactorEstimate};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const SPECTRUM_ON_FILE: &str = "spectrum_on.csv";
pub const SPECTRUM_OFF_FILE: &str = "spectrum_off.csv";
pub const SPECTRUM_DIFF_FILE: &str = "spectrum_diff.csv";
pub const SPECTRUM_DIFF_ROI_FILE: &str = "spectrum_diff_roi.csv";
pub const SIMULATE_PROVENANCE_FILE: &str = "simulate_provenance.txt";
pub const ANALYSIS_FILE: &str = "analysis.txt";
pub const LIMIT_FILE: &str = "limit.txt";
pub const PROJECTION_FILE: &str = "projection.txt";
pub const GEOM_FACTOR_FILE: &str = "geom_factor.txt";
pub const FRAMES_FILE: &str = "frames.txt";

/// Half-width of the zoomed difference spectrum around the ROI, keV.
pub const ROI_ZOOM_MARGIN_KEV: f64 = 0.5;

/// Where a geometric factor came from.
#[derive(Clone, Debug, PartialEq)]
pub struct GeometricFactor {
    pub value: f64,
    pub source: String,
}

/// Geometric factor to use: an explicit report, then the configured
/// report, then the configured value.
pub fn resolve_geometric_factor(config: &RunConfig, report: Option<&Path>) -> Result<Option<GeometricFactor>> {
    if let Some(path) = report.or(config.limit.geometric_factor_report.as_deref()) {
        let r = KvReport::load(path)?;
        let value = r.f64("geometric_factor")?;
        if !(value > 0.0 && value < 1.0) {
            return Err(Error::format(
                path.display().to_string(),
                0,
                format!("geometric_factor {value} outside (0, 1)"),
            ));
        }
        let name = path.file_name().map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into());
        return Ok(Some(GeometricFactor {
            value,
            source: format!("report {name}"),
        }));
    }
    Ok(config.limit.geometric_factor.map(|value| GeometricFactor {
        value,
        source: "config".into(),
    }))
}

fn require_geometric_factor(config: &RunConfig, report: Option<&Path>) -> Result<GeometricFactor> {
    resolve_geometric_factor(config, report)?.ok_or_else(|| ConfigError::MissingGeometricFactor.into())
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn provenance(r: &mut KvReport, command: &str, config: &RunConfig) {
    r.push("command", command)
        .push("version", VERSION)
        .push("config_sha256", &config.source_sha256)
        .push("seed", config.seed);
}

/// Energy sampler for the configured background shape over the binned range.
#[derive(Clone, Debug)]
struct BackgroundSampler {
    /// (lo, hi, density at lo, density at hi, cumulative area up to hi)
    segments: Vec<(f64, f64, f64, f64, f64)>,
}

impl BackgroundSampler {
    fn new(shape: &BackgroundShape, lo: f64, hi: f64) -> Result<Self> {
        let nodes = match shape {
            BackgroundShape::Flat => vec![(lo, 1.0), (hi, 1.0)],
            BackgroundShape::Table(nodes) => nodes.clone(),
        };
        let interp = |e: f64, (e0, d0): (f64, f64), (e1, d1): (f64, f64)| d0 + (d1 - d0) * (e - e0) / (e1 - e0);
        let mut segments = Vec::new();
        let mut total = 0.0;
        for w in nodes.windows(2) {
            let (a, b) = (w[0].0.max(lo), w[1].0.min(hi));
            if !(b > a) {
                continue;
            }
            let (da, db) = (interp(a, w[0], w[1]), interp(b, w[0], w[1]));
            total += 0.5 * (da + db) * (b - a);
            segments.push((a, b, da, db, total));
        }
        if !(total > 0.0) {
            return Err(Error::domain("background shape has no density inside the binned range"));
        }
        Ok(Self { segments })
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let total = self.segments.last().expect("non-empty").4;
        let target = rng.random::<f64>() * total;
        let k = self.segments.partition_point(|s| s.4 <= target).min(self.segments.len() - 1);
        let (a, b, d0, d1, cum) = self.segments[k];
        let area = 0.5 * (d0 + d1) * (b - a);
        let rest = (target - (cum - area)).max(0.0);
        // Inverse of the trapezoid CDF, in the form stable for d1 == d0.
        let s = (d1 - d0) / (b - a);
        let den = d0 + (d0 * d0 + 2.0 * s * rest).max(0.0).sqrt();
        let t = if rest > 0.0 && den > 0.0 { 2.0 * rest / den } else { 0.0 };
        (a + t).min(b.next_down())
    }
}

/// Both simulated spectra plus the bookkeeping behind them.
#[derive(Clone, Debug, PartialEq)]
pub struct SimulationOutput {
    pub on: Spectrum,
    pub off: Spectrum,
    pub coefficient_k: Option<f64>,
    pub geometric_factor: Option<GeometricFactor>,
    pub expected_signal_counts: f64,
    pub injected_signal_counts: u64,
    pub background_events_on: u64,
    pub background_events_off: u64,
}

impl SimulationOutput {
    pub fn provenance_report(&self, config: &RunConfig) -> KvReport {
        let mut r = KvReport::new("pepsim simulate");
        provenance(&mut r, "simulate", config);
        r.push("mode", if config.ccd.reconstruct { "reconstruct" } else { "direct" })
            .push("beta2_over_2", config.beta2_over_2)
            .push(
                "geometric_factor",
                self.geometric_factor.as_ref().map_or("none".into(), |g| g.value.to_string()),
            )
            .push("coefficient_k", self.coefficient_k.map_or("none".into(), |k| Num(k).to_string()))
            .push("expected_signal_counts", self.expected_signal_counts)
            .push("injected_signal_counts", self.injected_signal_counts)
            .push("background_events_on", self.background_events_on)
            .push("background_events_off", self.background_events_off)
            .push("background_rate_per_kev_per_frame", config.background.rate_per_kev_per_frame)
            .push("live_time_on_min", self.on.live_time_min)
            .push("live_time_off_min", self.off.live_time_min);
        r
    }
}

struct FrameEvents {
    energies: Vec<f64>,
    background: u64,
    signal: u64,
}

/// Per-read-out exposure fractions: whole cadences, then any remainder.
fn readout_fractions(run: &RunSummary) -> Vec<f64> {
    let readouts = run.readouts();
    let whole = readouts.floor() as usize;
    let mut v = vec![1.0; whole];
    let rest = readouts - whole as f64;
    if rest > 1e-12 {
        v.push(rest);
    }
    v
}

fn simulate_run(
    config: &RunConfig,
    run: &RunSummary,
    stage: &str,
    signal_mean_per_frame: f64,
    sampler: &BackgroundSampler,
) -> Result<(Spectrum, u64, u64)> {
    let seeds = SeedTree::new(config.seed);
    let live = run.ccd_live_count as usize;
    let fractions = readout_fractions(run);
    let range = config.binning.hi_kev() - config.binning.lo_kev;
    let bg_mean = config.background.rate_per_kev_per_frame * range;
    let line = TransitionLine::pep_violating_k_alpha();
    let live_panels: Vec<u32> = (0..config.geometry.chip_count() as u32)
        .filter(|&c| config.geometry.live_chips[c as usize])
        .collect();

    let frames: Vec<FrameEvents> = (0..fractions.len() * live)
        .into_par_iter()
        .map(|index| {
            let mut rng = seeds.stream(stage, index as u64);
            let fraction = fractions[index / live];
            let n_bg = poisson(bg_mean * fraction, &mut rng)?;
            let n_sig = poisson(signal_mean_per_frame * fraction, &mut rng)?;
            let mut energies = Vec::with_capacity((n_bg + n_sig) as usize);
            energies.extend((0..n_bg).map(|_| sampler.sample(&mut rng)));
            for _ in 0..n_sig {
                energies.push(smear_energy(line.energy, &config.resolution, &mut rng)?);
            }
            if config.ccd.reconstruct {
                let synthesis = FrameSynthesis {
                    panel_id: live_panels.get(index % live).copied().unwrap_or(0),
                    exposure_min: (config.run.readout_cadence_min * fraction) as f32,
                    ..config.ccd.synthesis
                };
                let hits: Vec<Hit> = energies
                    .iter()
                    .map(|&energy_kev| Hit {
                        x: rng.random_range(0..synthesis.width),
                        y: rng.random_range(0..synthesis.height),
                        energy_kev,
                    })
                    .collect();
                let frame = synthesize_frame(&hits, &synthesis, &mut rng)?.frame;
                energies = reconstruct_energies(&frame, &config.ccd.thresholds, &synthesis);
            }
            Ok(FrameEvents {
                energies,
                background: n_bg,
                signal: n_sig,
            })
        })
        .collect::<Result<_>>()?;

    let label = if stage.ends_with("on") {
        SpectrumLabel::CurrentOn
    } else {
        SpectrumLabel::CurrentOff
    };
    let energies: Vec<f64> = frames.iter().flat_map(|f| f.energies.iter().copied()).collect();
    let b = &config.binning;
    let spectrum = build_spectrum(&energies, b.lo_kev, b.width_kev, b.count, run.live_time_min, label)?;
    let background = frames.iter().map(|f| f.background).sum();
    let signal = frames.iter().map(|f| f.signal).sum();
    Ok((spectrum, background, signal))
}

fn poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> Result<u64> {
    if mean <= 0.0 {
        return Ok(0);
    }
    let d = Poisson::new(mean).map_err(|e| Error::domain(format!("Poisson mean {mean}: {e}")))?;
    Ok(d.sample(rng) as u64)
}

/// Simulates the current-on and current-off campaigns.
///
/// Every live chip read-out is one frame with its own substream, so the
/// spectra do not depend on the thread count. Violating-line events are
/// added to the current-on run only.
pub fn simulate(config: &RunConfig) -> Result<SimulationOutput> {
    simulate_with(config, None)
}

pub fn simulate_with(config: &RunConfig, geom_factor_report: Option<&Path>) -> Result<SimulationOutput> {
    config.resolution.validate()?;
    let run_on = config.run.current_on();
    let run_off = config.run.current_off();
    let b = &config.binning;
    let sampler = BackgroundSampler::new(&config.background.shape, b.lo_kev, b.hi_kev())?;

    let (geometric_factor, coefficient_k, expected) = if config.beta2_over_2 > 0.0 {
        let gf = require_geometric_factor(config, geom_factor_report)?;
        let k = signal_coefficient(&run_on, &config.conductor, gf.value)?;
        let expected = expected_signal_counts(config.beta2_over_2, k)?;
        (Some(gf), Some(k), expected)
    } else {
        (resolve_geometric_factor(config, geom_factor_report)?, None, 0.0)
    };
    let exposures = run_on.frame_exposures();
    let signal_per_frame = if exposures > 0.0 { expected / exposures } else { 0.0 };

    let (on, bg_on, injected) = simulate_run(config, &run_on, "simulate-on", signal_per_frame, &sampler)?;
    let (off, bg_off, _) = simulate_run(config, &run_off, "simulate-off", 0.0, &sampler)?;
    Ok(SimulationOutput {
        on,
        off,
        coefficient_k,
        geometric_factor,
        expected_signal_counts: expected,
        injected_signal_counts: injected,
        background_events_on: bg_on,
        background_events_off: bg_off,
    })
}

/// `simulate`: writes both spectra and the provenance sidecar.
pub fn run_simulate(config: &RunConfig, out: &Path, geom_factor_report: Option<&Path>) -> Result<SimulationOutput> {
    let sim = simulate_with(config, geom_factor_report)?;
    ensure_dir(out)?;
    sim.on.save(out.join(SPECTRUM_ON_FILE))?;
    sim.off.save(out.join(SPECTRUM_OFF_FILE))?;
    sim.provenance_report(config).save(out.join(SIMULATE_PROVENANCE_FILE))?;
    Ok(sim)
}

/// ROI bookkeeping for one on/off pair.
#[derive(Clone, Debug, PartialEq)]
pub struct Analysis {
    pub difference: Spectrum,
    pub roi: RegionOfInterest,
    pub normalization: f64,
    pub n_on: Counted,
    pub n_off: Counted,
    pub delta: Counted,
}

impl Analysis {
    pub fn to_report(&self, config: Option<&RunConfig>) -> KvReport {
        let mut r = KvReport::new("pepsim analysis");
        if let Some(c) = config {
            provenance(&mut r, "analyze", c);
        }
        r.push("roi_lo_kev", self.roi.lo_kev)
            .push("roi_hi_kev", self.roi.hi_kev)
            .push("normalization", self.normalization)
            .push("n_on", self.n_on.value)
            .push("n_on_error", self.n_on.error)
            .push("n_off", self.n_off.value)
            .push("n_off_error", self.n_off.error)
            .push("delta_counts", self.delta.value)
            .push("delta_error", self.delta.error)
            .push(
                "summary",
                format!(
                    "N_on = {:.0} ± {:.1}, N_off = {:.0} ± {:.1}, dN = {:.0} ± {:.1}",
                    self.n_on.value, self.n_on.error, self.n_off.value, self.n_off.error, self.delta.value,
                    self.delta.error
                ),
            );
        r
    }
}

/// Subtracts the live-time-normalised off spectrum and counts the ROI.
pub fn analyze(on: &Spectrum, off: &Spectrum, roi: &RegionOfInterest) -> Result<Analysis> {
    let difference = subtract_spectra(on, off)?;
    let normalization = on.live_time_min / off.live_time_min;
    let n_on = roi_counts(on, roi)?;
    let n_off_raw = roi_counts(off, roi)?;
    let n_off = Counted {
        value: normalization * n_off_raw.value,
        error: normalization * n_off_raw.error,
    };
    let delta = roi_counts(&difference, roi)?;
    Ok(Analysis {
        difference,
        roi: *roi,
        normalization,
        n_on,
        n_off,
        delta,
    })
}

/// `analyze`: difference spectrum, its ROI zoom, and the ROI report.
pub fn run_analyze(config: &RunConfig, on_file: &Path, off_file: &Path, out: &Path) -> Result<Analysis> {
    let on = Spectrum::load(on_file)?;
    let off = Spectrum::load(off_file)?;
    let analysis = analyze(&on, &off, &config.roi)?;
    ensure_dir(out)?;
    analysis.difference.save(out.join(SPECTRUM_DIFF_FILE))?;
    let roi = &config.roi;
    analysis
        .difference
        .window(roi.lo_kev - ROI_ZOOM_MARGIN_KEV, roi.hi_kev + ROI_ZOOM_MARGIN_KEV)
        .save(out.join(SPECTRUM_DIFF_ROI_FILE))?;
    analysis.to_report(Some(config)).save(out.join(ANALYSIS_FILE))?;
    Ok(analysis)
}

/// A limit with every intermediate quantity.
#[derive(Clone, Debug, PartialEq)]
pub struct LimitReport {
    pub run: RunSummary,
    pub n_new: f64,
    pub n_int: f64,
    pub capture_to_scatter_floor: f64,
    pub geometric_factor: GeometricFactor,
    pub result: LimitResult,
}

impl LimitReport {
    pub fn to_report(&self, config: Option<&RunConfig>) -> KvReport {
        let mut r = KvReport::new("pepsim limit");
        if let Some(c) = config {
            provenance(&mut r, "limit", c);
        }
        r.push("current_a", self.run.current_a)
            .push("live_time_min", self.run.live_time_min)
            .push("integrated_charge_c", Num(self.run.integrated_charge_c))
            .push("n_new", Num(self.n_new))
            .push("n_int", self.n_int)
            .push("capture_to_scatter_floor", self.capture_to_scatter_floor)
            .push("geometric_factor", self.geometric_factor.value)
            .push("geometric_factor_source", &self.geometric_factor.source);
        self.result.write_into(&mut r);
        r.push("beta2_over_2_limit_2sig", format!("{:.1e}", self.result.beta2_over_2_limit));
        r
    }
}

/// Limit from an analysis report: K from the configured run and conductor,
/// then n_sigma × ΔN error / K.
pub fn limit_from_analysis(
    analysis: &KvReport,
    config: &RunConfig,
    geom_factor_report: Option<&Path>,
    n_sigma: Option<f64>,
) -> Result<LimitReport> {
    let gf = require_geometric_factor(config, geom_factor_report)?;
    let run = config.run.current_on();
    let k = signal_coefficient(&run, &config.conductor, gf.value)?;
    let result = compute_limit(
        analysis.f64("delta_counts")?,
        analysis.f64("delta_error")?,
        k,
        n_sigma.unwrap_or(config.limit.n_sigma),
    )?;
    Ok(LimitReport {
        run,
        n_new: new_electron_count(run.integrated_charge_c)?,
        n_int: internal_scatter_count(&config.conductor)?,
        capture_to_scatter_floor: config.conductor.capture_to_scatter_floor,
        geometric_factor: gf,
        result,
    })
}

/// `limit`: reads the analysis report and writes the limit report.
pub fn run_limit(
    config: &RunConfig,
    analysis_file: &Path,
    geom_factor_report: Option<&Path>,
    n_sigma: Option<f64>,
    out: &Path,
) -> Result<LimitReport> {
    let analysis = KvReport::load(analysis_file)?;
    let report = limit_from_analysis(&analysis, config, geom_factor_report, n_sigma)?;
    ensure_dir(out)?;
    let mut kv = report.to_report(Some(config));
    for key in ["roi_lo_kev", "roi_hi_kev", "n_on", "n_on_error", "n_off", "n_off_error"] {
        if let Some(v) = analysis.get(key) {
            kv.push(key, v);
        }
    }
    kv.save(out.join(LIMIT_FILE))?;
    Ok(report)
}

/// `project`: rescales the limit in a limit report.
pub fn run_project(config: &RunConfig, limit_file: &Path, scales: SensitivityScales, out: &Path) -> Result<Projection> {
    let base = KvReport::load(limit_file)?.f64("beta2_over_2_limit")?;
    let projection = project_sensitivity(base, scales)?;
    ensure_dir(out)?;
    let mut r = projection.to_report();
    provenance(&mut r, "project", config);
    r.save(out.join(PROJECTION_FILE))?;
    Ok(projection)
}

pub fn attenuation_table(config: &RunConfig) -> Result<AttenuationTable> {
    match &config.transport.attenuation_table {
        Some(p) => AttenuationTable::load(p),
        None => Ok(AttenuationTable::copper()),
    }
}

/// Monte Carlo geometric factor for the configured geometry.
pub fn geometric_factor(config: &RunConfig, sample_count: Option<u64>) -> Result<GeometricFactorEstimate> {
    let t = &config.transport;
    estimate_geometric_factor(
        &config.geometry,
        &attenuation_table(config)?,
        t.energy_kev,
        t.ccd_efficiency,
        sample_count.unwrap_or(t.sample_count),
        config.seed,
    )
}

pub fn geometric_factor_report(estimate: &GeometricFactorEstimate, config: &RunConfig) -> KvReport {
    let g = &config.geometry;
    let mut r = KvReport::new("pepsim geometric factor");
    provenance(&mut r, "geom-factor", config);
    r.push("geometric_factor", estimate.total_factor)
        .push("survival_times_acceptance", estimate.survival_times_acceptance)
        .push("statistical_error", estimate.statistical_error)
        .push("relative_error", estimate.relative_error())
        .push("ccd_efficiency", estimate.ccd_efficiency_applied)
        .push("energy_kev", estimate.energy_kev)
        .push("sample_count", estimate.sample_count)
        .push("hit_panel", estimate.counts.hit)
        .push("absorbed_in_copper", estimate.counts.absorbed)
        .push("escaped", estimate.counts.escaped)
        .push("panel_count", g.ccd_panel_count)
        .push("chips_per_panel", g.chips_per_panel)
        .push("live_chips", g.live_chip_count())
        .push("chip_width_cm", g.ccd_chip_width_cm)
        .push("chip_height_cm", g.ccd_chip_height_cm);
    r
}

/// `geom-factor`: runs the transport Monte Carlo and writes its report.
pub fn run_geom_factor(config: &RunConfig, sample_count: Option<u64>, out: &Path) -> Result<GeometricFactorEstimate> {
    let estimate = geometric_factor(config, sample_count)?;
    ensure_dir(out)?;
    geometric_factor_report(&estimate, config).save(out.join(GEOM_FACTOR_FILE))?;
    Ok(estimate)
}

pub fn corpus_spec(config: &RunConfig, frames: Option<u64>) -> CorpusSpec {
    CorpusSpec {
        frames: frames.unwrap_or(config.ccd.corpus_frames),
        hits_per_frame: config.ccd.hits_per_frame,
        hit_energy_kev: config.transport.energy_kev,
        synthesis: config.ccd.synthesis,
        thresholds: config.ccd.thresholds,
        seed: config.seed,
    }
}

pub fn corpus_report(stats: &CorpusStats, spec: &CorpusSpec, config: &RunConfig) -> KvReport {
    let mut r = KvReport::new("pepsim frames");
    provenance(&mut r, "frames", config);
    let (mean, sem) = if stats.hits_accepted > 1 {
        stats.matched_energy(&spec.synthesis.calibration)
    } else {
        (f64::NAN, f64::NAN)
    };
    r.push("frames", stats.frames)
        .push("frame_width", spec.synthesis.width)
        .push("frame_height", spec.synthesis.height)
        .push("noise_sigma_adc", spec.synthesis.noise_sigma_adc)
        .push("track_rate", spec.synthesis.track_rate)
        .push("hit_energy_kev", spec.hit_energy_kev)
        .push("hits_injected", stats.hits_injected)
        .push("hits_accepted", stats.hits_accepted)
        .push("xray_acceptance", stats.xray_acceptance())
        .push("tracks_injected", stats.tracks_injected)
        .push("tracks_rejected", stats.tracks_rejected)
        .push("track_rejection", stats.track_rejection())
        .push("clusters_accepted", stats.clusters_accepted)
        .push("clusters_rejected_track", stats.clusters_track)
        .push("clusters_rejected_noise", stats.clusters_noise)
        .push("matched_energy_mean_kev", mean)
        .push("matched_energy_sem_kev", sem);
    r
}

/// File stem of dumped frame `i`.
pub fn frame_dump_stem(i: u64) -> String {
    format!("frame_{i:05}")
}

/// `frames`: synthetic corpus statistics, plus binary and CSV dumps of the
/// first `dump_frames` frames.
pub fn run_frames(config: &RunConfig, frames: Option<u64>, out: &Path) -> Result<CorpusStats> {
    let spec = corpus_spec(config, frames);
    let stats = run_corpus(&spec)?;
    ensure_dir(out)?;
    corpus_report(&stats, &spec, config).save(out.join(FRAMES_FILE))?;
    for i in 0..config.ccd.dump_frames.min(spec.frames) {
        let frame = crate::ccd::corpus_frame(&spec, i)?.0.frame;
        let stem = out.join(frame_dump_stem(i));
        let bin = stem.with_extension("bin");
        let f = fs::File::create(&bin).map_err(|e| Error::io(&bin, e))?;
        frame.write_binary(BufWriter::new(f)).map_err(|e| Error::io(&bin, e))?;
        let csv = stem.with_extension("csv");
        let f = fs::File::create(&csv).map_err(|e| Error::io(&csv, e))?;
        frame.write_csv_grid(BufWriter::new(f)).map_err(|e| Error::io(&csv, e))?;
    }
    Ok(stats)
}

/// Files written by [`run_all`], relative to the output directory.
#[derive(Clone, Debug, PartialEq)]
pub struct PipelineOutput {
    pub simulation: SimulationOutput,
    pub analysis: Analysis,
    pub limit: LimitReport,
    pub projection: Projection,
    pub files: Vec<PathBuf>,
}

/// simulate → analyze → limit → project in one go, with the geometric
/// factor taken from the config.
pub fn run_all(config: &RunConfig, out: &Path, scales: SensitivityScales) -> Result<PipelineOutput> {
    let simulation = run_simulate(config, out, None)?;
    let analysis = run_analyze(config, &out.join(SPECTRUM_ON_FILE), &out.join(SPECTRUM_OFF_FILE), out)?;
    let limit = run_limit(config, &out.join(ANALYSIS_FILE), None, None, out)?;
    let projection = run_project(config, &out.join(LIMIT_FILE), scales, out)?;
    let files = [
        SPECTRUM_ON_FILE,
        SPECTRUM_OFF_FILE,
        SIMULATE_PROVENANCE_FILE,
        SPECTRUM_DIFF_FILE,
        SPECTRUM_DIFF_ROI_FILE,
        ANALYSIS_FILE,
        LIMIT_FILE,
        PROJECTION_FILE,
    ]
    .iter()
    .map(PathBuf::from)
    .collect();
    Ok(PipelineOutput {
        simulation,
        analysis,
        limit,
        projection,
        files,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn flat_sampler_is_uniform_on_range() {
        let s = BackgroundSampler::new(&BackgroundShape::Flat, 1.0, 3.0).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let xs: Vec<f64> = (0..20000).map(|_| s.sample(&mut rng)).collect();
        assert!(xs.iter().all(|&x| (1.0..3.0).contains(&x)));
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        assert!((mean - 2.0).abs() < 0.02, "{mean}");
    }

    #[test]
    fn ramp_sampler_matches_linear_density() {
        // Density ∝ x on [0, 2]: mean 4/3, clipped to [0.5, 2] → mean 1.4.
        let shape = BackgroundShape::Table(vec![(0.0, 0.0), (2.0, 2.0)]);
        let s = BackgroundSampler::new(&shape, 0.5, 2.0).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let n = 100_000;
        let xs: Vec<f64> = (0..n).map(|_| s.sample(&mut rng)).collect();
        assert!(xs.iter().all(|&x| (0.5..2.0).contains(&x)));
        let mean = xs.iter().sum::<f64>() / n as f64;
        // E[x] on [0.5,2] with density ∝ x = (8/3 - 1/24)/(2 - 1/8) = 1.4
        assert!((mean - 1.4).abs() < 0.005, "{mean}");
        let s0 = BackgroundSampler::new(&shape, 0.0, 2.0).unwrap();
        let m0 = (0..n).map(|_| s0.sample(&mut rng)).sum::<f64>() / n as f64;
        assert!((m0 - 4.0 / 3.0).abs() < 0.005, "{m0}");
    }

    #[test]
    fn sampler_rejects_empty_overlap() {
        let shape = BackgroundShape::Table(vec![(30.0, 1.0), (40.0, 1.0)]);
        assert!(BackgroundSampler::new(&shape, 0.0, 20.0).is_err());
    }

    #[test]
    fn fractional_readouts() {
        let run = RunSummary::constant_current(40.0, 145.1, 10.0, 14).unwrap();
        let f = readout_fractions(&run);
        assert_eq!(f.len(), 15);
        assert!((f.iter().sum::<f64>() - 14.51).abs() < 1e-9);
    }
}
