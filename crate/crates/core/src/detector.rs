//! Gm-APD single-photon detector model: temperature-dependent dark counts,
//! quantum efficiency, non-paralyzable dead-time saturation and timing
//! jitter.
//!
//! Dark counts follow the fitted exponential
//! `max(0, a * exp((T - 273.15K) * b) + c)`; the fit goes negative below
//! roughly 234.5 K, where the clamp applies. Saturation uses the standard
//! non-paralyzable model `r / (1 + r * tau_dead)`. Jitter does not reduce
//! efficiency here - it only widens the effective coincidence window used by
//! the accidental-rate estimate.

use thiserror::Error;

// ---------------------------------------------------------------------------
// Constants
// ---------------------------------------------------------------------------

/// Dark-count fit constant `a`, cps.
pub const DEFAULT_DARK_FIT_A_CPS: f64 = 1790.0;

/// Dark-count fit constant `b`, 1/K.
pub const DEFAULT_DARK_FIT_B_PER_K: f64 = 0.08;

/// Dark-count fit constant `c`, cps.
pub const DEFAULT_DARK_FIT_C_CPS: f64 = -81.0;

/// Jitter-capture multiplier `k_j` for the effective coincidence window
/// (+/- 3 sigma on the combined two-detector jitter).
pub const JITTER_WINDOW_SIGMAS: f64 = 6.0;

/// Detectors in one quad polarization analyzer; their dark counts aggregate
/// into one effective receiver in the coincidence model.
pub const DETECTORS_PER_RECEIVER: u32 = 4;

/// Validation band for the dark-count fit's temperature input, K.
pub const MIN_TEMPERATURE_K: f64 = 200.0;
pub const MAX_TEMPERATURE_K: f64 = 330.0;

/// Validation errors for detector parameters.
#[derive(Debug, Error, PartialEq)]
pub enum DetectorError {
    #[error("efficiency must lie in (0, 1], got {0}")]
    EfficiencyOutOfRange(f64),
    #[error("temperature must lie in [{MIN_TEMPERATURE_K}, {MAX_TEMPERATURE_K}] K, got {0}")]
    TemperatureOutOfRange(f64),
    #[error("{name} must be finite and >= 0, got {value}")]
    Negative { name: &'static str, value: f64 },
    #[error("dark fit constant {name} must be finite, got {value}")]
    NonFiniteFit { name: &'static str, value: f64 },
}

// ---------------------------------------------------------------------------
// DetectorParams
// ---------------------------------------------------------------------------

/// One physical detector (or one aggregated quad receiver - aggregation is
/// applied by the coincidence model, not here).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorParams {
    /// Quantum efficiency, fraction in (0, 1].
    pub efficiency: f64,
    /// Dark-count fit `a`, cps.
    pub dark_fit_a: f64,
    /// Dark-count fit `b`, 1/K.
    pub dark_fit_b: f64,
    /// Dark-count fit `c`, cps.
    pub dark_fit_c: f64,
    /// Dead time per detection, seconds (0 disables saturation).
    pub dead_time_s: f64,
    /// Timing jitter, seconds rms.
    pub jitter_rms_s: f64,
    /// Operating temperature, K.
    pub temperature_k: f64,
}

impl DetectorParams {
    /// A detector with the fitted dark-count constants, 50% efficiency,
    /// no dead time and 0.5 ns jitter at the given temperature.
    pub fn with_defaults(temperature_k: f64) -> Self {
        Self {
            efficiency: 0.5,
            dark_fit_a: DEFAULT_DARK_FIT_A_CPS,
            dark_fit_b: DEFAULT_DARK_FIT_B_PER_K,
            dark_fit_c: DEFAULT_DARK_FIT_C_CPS,
            dead_time_s: 0.0,
            jitter_rms_s: 0.5e-9,
            temperature_k,
        }
    }

    /// Validates the parameter set.
    pub fn validate(&self) -> Result<(), DetectorError> {
        if !self.efficiency.is_finite() || self.efficiency <= 0.0 || self.efficiency > 1.0 {
            return Err(DetectorError::EfficiencyOutOfRange(self.efficiency));
        }
        if !self.temperature_k.is_finite()
            || !(MIN_TEMPERATURE_K..=MAX_TEMPERATURE_K).contains(&self.temperature_k)
        {
            return Err(DetectorError::TemperatureOutOfRange(self.temperature_k));
        }
        for (name, v) in [
            ("dead_time", self.dead_time_s),
            ("jitter_rms", self.jitter_rms_s),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(DetectorError::Negative { name, value: v });
            }
        }
        for (name, v) in [
            ("a", self.dark_fit_a),
            ("b", self.dark_fit_b),
            ("c", self.dark_fit_c),
        ] {
            if !v.is_finite() {
                return Err(DetectorError::NonFiniteFit { name, value: v });
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// Dark counts of a single detector at its operating temperature, cps:
/// `max(0, a * exp((T - 273.15) * b) + c)`.
pub fn dark_count_rate(params: &DetectorParams) -> f64 {
    let fitted = params.dark_fit_a * ((params.temperature_k - 273.15) * params.dark_fit_b).exp()
        + params.dark_fit_c;
    fitted.max(0.0)
}

/// Applies non-paralyzable dead time to a raw rate: `r / (1 + r * tau)`.
pub fn saturate(rate_cps: f64, dead_time_s: f64) -> f64 {
    rate_cps / (1.0 + rate_cps * dead_time_s)
}

/// Registered count rate for a given incident photon rate, cps:
/// efficiency-thinned signal plus dark counts, then dead-time saturation.
pub fn detected_rate(incident_rate_cps: f64, params: &DetectorParams) -> f64 {
    let raw = params.efficiency * incident_rate_cps + dark_count_rate(params);
    saturate(raw, params.dead_time_s)
}

/// Coincidence window widened by detector timing jitter, seconds:
/// `max(window, k_j * sqrt(jitter_a^2 + jitter_b^2))` with `k_j` =
/// [`JITTER_WINDOW_SIGMAS`].
pub fn effective_coincidence_window(window_s: f64, jitter_a_s: f64, jitter_b_s: f64) -> f64 {
    window_s.max(JITTER_WINDOW_SIGMAS * jitter_a_s.hypot(jitter_b_s))
}
