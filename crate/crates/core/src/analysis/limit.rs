use statrs::function::erf::erf;

use crate::error::{Error, Result};
use crate::kv::{KvReport, Num};

/// Upper bound on β²/2 from a measured count difference.
#[derive(Clone, Debug, PartialEq)]
pub struct LimitResult {
    pub delta_counts: f64,
    pub delta_error: f64,
    pub n_sigma: f64,
    pub coefficient_k: f64,
    pub beta2_over_2_limit: f64,
    /// (1 + q)/2 for the quon parameter q; equal to β²/2.
    pub quon_half_1_plus_q: f64,
    pub confidence_label: String,
}

impl LimitResult {
    /// 1 + q. Reported as an offset from the fermion value q = −1 because
    /// −1 + 10⁻²⁷ is not representable in `f64`.
    pub fn quon_q_offset_from_fermion(&self) -> f64 {
        2.0 * self.quon_half_1_plus_q
    }

    pub fn to_report(&self) -> KvReport {
        let mut r = KvReport::new("pepsim limit");
        self.write_into(&mut r);
        r
    }

    pub fn write_into(&self, r: &mut KvReport) {
        r.push("delta_counts", self.delta_counts)
            .push("delta_error", self.delta_error)
            .push("n_sigma", self.n_sigma)
            .push("confidence_label", &self.confidence_label)
            .push("coefficient_k", Num(self.coefficient_k))
            .push("beta2_over_2_limit", Num(self.beta2_over_2_limit))
            .push("quon_half_1_plus_q", Num(self.quon_half_1_plus_q))
            .push("quon_q", format!("-1 + {:e}", self.quon_q_offset_from_fermion()));
    }

    pub fn from_report(r: &KvReport) -> Result<Self> {
        Ok(Self {
            delta_counts: r.f64("delta_counts")?,
            delta_error: r.f64("delta_error")?,
            n_sigma: r.f64("n_sigma")?,
            coefficient_k: r.f64("coefficient_k")?,
            beta2_over_2_limit: r.f64("beta2_over_2_limit")?,
            quon_half_1_plus_q: r.f64("quon_half_1_plus_q")?,
            confidence_label: r.require("confidence_label")?.to_owned(),
        })
    }
}

/// Two-sided Gaussian coverage of ±`n_sigma`, e.g. `"99.7% CL"` for 3.
pub fn confidence_label(n_sigma: f64) -> String {
    let coverage = 100.0 * erf(n_sigma / std::f64::consts::SQRT_2);
    for decimals in 1..=9 {
        let text = format!("{coverage:.decimals$}");
        if text != "100" && !text.starts_with("100.") {
            return format!("{text}% CL");
        }
    }
    format!("{n_sigma} sigma")
}

/// β²/2 ≤ n_sigma × σ(ΔN) / K.
///
/// Only the error of the difference enters, not its central value; a
/// negative excess does not tighten the bound.
pub fn compute_limit(delta_counts: f64, delta_error: f64, coefficient_k: f64, n_sigma: f64) -> Result<LimitResult> {
    if !(delta_error > 0.0) || !delta_error.is_finite() {
        return Err(Error::domain(format!("error on the difference must be > 0, got {delta_error}")));
    }
    if !(coefficient_k > 0.0) || !coefficient_k.is_finite() {
        return Err(Error::domain(format!("signal coefficient must be > 0, got {coefficient_k}")));
    }
    if !(n_sigma > 0.0) || !n_sigma.is_finite() {
        return Err(Error::domain(format!("n_sigma must be > 0, got {n_sigma}")));
    }
    let limit = n_sigma * delta_error / coefficient_k;
    Ok(LimitResult {
        delta_counts,
        delta_error,
        n_sigma,
        coefficient_k,
        beta2_over_2_limit: limit,
        quon_half_1_plus_q: limit,
        confidence_label: confidence_label(n_sigma),
    })
}

/// How a limit scales to a different campaign.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SensitivityScales {
    /// Background rate relative to the base campaign.
    pub background: f64,
    pub live_time: f64,
    pub current: f64,
}

impl Default for SensitivityScales {
    fn default() -> Self {
        Self {
            background: 1.0,
            live_time: 1.0,
            current: 1.0,
        }
    }
}

pub const PROJECTION_MODEL: &str =
    "limit x sqrt(background_scale * live_time_scale) / (current_scale * live_time_scale): error ~ sqrt(B*T), coefficient ~ I*T";

#[derive(Clone, Debug, PartialEq)]
pub struct Projection {
    pub base_limit: f64,
    pub scales: SensitivityScales,
    pub projected_limit: f64,
    pub model: &'static str,
}

impl Projection {
    pub fn to_report(&self) -> KvReport {
        let mut r = KvReport::new("pepsim projection");
        r.push("base_beta2_over_2_limit", Num(self.base_limit))
            .push("background_scale", self.scales.background)
            .push("live_time_scale", self.scales.live_time)
            .push("current_scale", self.scales.current)
            .push("projected_beta2_over_2_limit", Num(self.projected_limit))
            .push("model", self.model);
        r
    }
}

/// Scales the statistical error of the difference as √(B·T) and the
/// signal coefficient as I·T.
pub fn project_sensitivity(base_limit: f64, scales: SensitivityScales) -> Result<Projection> {
    let SensitivityScales {
        background,
        live_time,
        current,
    } = scales;
    for (name, v) in [("background", background), ("live time", live_time), ("current", current)] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::domain(format!("{name} scale must be > 0, got {v}")));
        }
    }
    if !(base_limit > 0.0) {
        return Err(Error::domain(format!("base limit must be > 0, got {base_limit}")));
    }
    Ok(Projection {
        base_limit,
        scales,
        projected_limit: base_limit * (background * live_time).sqrt() / (current * live_time),
        model: PROJECTION_MODEL,
    })
}
