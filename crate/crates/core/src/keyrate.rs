//! Asymptotic secure-key fraction and rate, classical-communication
//! overhead, and pass-integrated key yield.
//!
//! The secure fraction of the sifted key is `1 - (1 + f_ec) * h2(e)` with
//! `h2` the binary entropy and `f_ec >= 1` the reconciliation inefficiency:
//! one `h2` pays for error correction, the other for privacy amplification.
//! At `f_ec = 1` the fraction hits zero at e = 11.0%, the familiar BB84
//! hard cutoff. Rates are asymptotic - no finite-key penalty.
//!
//! Classical overhead counts timetag exchange for coincidence search (per
//! registered single), basis reconciliation (per sifted bit, both
//! directions), and error-correction syndrome traffic (`f_ec * h2(e)` per
//! sifted bit), inflated by a framing factor.

use crate::link::{total_link_loss, LinkError, LinkScenario};
use crate::orbit::PassProfile;
use crate::qber::{Bbm92Setup, QberError, QberPoint};
use thiserror::Error;

// ---------------------------------------------------------------------------
// Constants
// ---------------------------------------------------------------------------

/// Timetag bits exchanged per registered detection, after delta compression
/// of the raw 64-bit tags. Calibrated once against the reference operating
/// point (55 kbps secure / 7.5 Mbps classical at a 6.4 dB LEO downlink).
pub const DEFAULT_TIMETAG_BITS: f64 = 6.0;

/// Basis bits announced per sifted detection (each side announces one).
pub const DEFAULT_BASIS_BITS: f64 = 1.0;

/// Default reconciliation inefficiency (ideal error correction).
pub const DEFAULT_EC_EFFICIENCY: f64 = 1.0;

/// Default protocol framing overhead fraction.
pub const DEFAULT_FRAMING_OVERHEAD: f64 = 0.05;

/// Errors raised by key-rate evaluation.
#[derive(Debug, Error, PartialEq)]
pub enum KeyRateError {
    #[error("binary entropy argument must lie in [0, 1], got {0}")]
    EntropyDomain(f64),
    #[error("{name} must be finite and >= 0, got {value}")]
    Negative { name: &'static str, value: f64 },
    #[error("error-correction efficiency must be finite and >= 1, got {0}")]
    EcEfficiencyOutOfRange(f64),
    #[error("pass profile must contain at least one sample")]
    EmptyProfile,
    #[error(transparent)]
    Link(#[from] LinkError),
    #[error(transparent)]
    Qber(#[from] QberError),
}

// ---------------------------------------------------------------------------
// Types
// ---------------------------------------------------------------------------

/// Classical-communication cost model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverheadParams {
    /// Bits exchanged per registered single for timetag alignment.
    pub timetag_bits_per_event: f64,
    /// Bits announced per sifted detection per side.
    pub basis_bits_per_sifted: f64,
    /// Reconciliation inefficiency `f_ec >= 1`.
    pub ec_efficiency: f64,
    /// Fractional framing/protocol overhead on the total.
    pub framing_overhead: f64,
}

impl Default for OverheadParams {
    fn default() -> Self {
        Self {
            timetag_bits_per_event: DEFAULT_TIMETAG_BITS,
            basis_bits_per_sifted: DEFAULT_BASIS_BITS,
            ec_efficiency: DEFAULT_EC_EFFICIENCY,
            framing_overhead: DEFAULT_FRAMING_OVERHEAD,
        }
    }
}

impl OverheadParams {
    pub fn validate(&self) -> Result<(), KeyRateError> {
        for (name, v) in [
            ("timetag_bits_per_event", self.timetag_bits_per_event),
            ("basis_bits_per_sifted", self.basis_bits_per_sifted),
            ("framing_overhead", self.framing_overhead),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(KeyRateError::Negative { name, value: v });
            }
        }
        if !self.ec_efficiency.is_finite() || self.ec_efficiency < 1.0 {
            return Err(KeyRateError::EcEfficiencyOutOfRange(self.ec_efficiency));
        }
        Ok(())
    }
}

/// Key-rate evaluation at one operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeyRateResult {
    pub sifted_rate_bps: f64,
    pub qber: f64,
    pub key_fraction: f64,
    pub secure_rate_bps: f64,
    pub classical_overhead_bps: f64,
    /// True iff a positive secure fraction survives at this QBER.
    pub feasible: bool,
}

// ---------------------------------------------------------------------------
// Entropy and fractions
// ---------------------------------------------------------------------------

/// Unchecked binary entropy; 0 at both boundaries.
fn h2(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        0.0
    } else {
        -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
    }
}

/// Binary entropy in bits, defined on `[0, 1]` with `h2(0) = h2(1) = 0`.
pub fn binary_entropy(p: f64) -> Result<f64, KeyRateError> {
    if !p.is_finite() || !(0.0..=1.0).contains(&p) {
        return Err(KeyRateError::EntropyDomain(p));
    }
    Ok(h2(p))
}

/// Secure fraction of the sifted key: `max(0, 1 - (1 + f_ec) * h2(qber))`.
///
/// Callers must supply `qber` in `[0, 0.5]` and `f_ec >= 1`; the fraction
/// vanishes at 11.0% QBER when `f_ec = 1`.
pub fn secure_key_fraction(qber: f64, ec_efficiency: f64) -> f64 {
    debug_assert!((0.0..=0.5).contains(&qber), "qber {qber} outside [0, 0.5]");
    debug_assert!(ec_efficiency >= 1.0, "f_ec {ec_efficiency} < 1");
    (1.0 - (1.0 + ec_efficiency) * h2(qber)).max(0.0)
}

// ---------------------------------------------------------------------------
// Rates and overhead
// ---------------------------------------------------------------------------

/// Classical traffic in bps needed to run the protocol at the given
/// operating point: timetags for every registered single, basis
/// announcements from both sides per sifted bit, and EC syndrome bits,
/// all inflated by framing.
pub fn classical_overhead(
    singles_a_cps: f64,
    singles_b_cps: f64,
    sifted_rate_bps: f64,
    qber: f64,
    overhead: &OverheadParams,
) -> f64 {
    let timetags = overhead.timetag_bits_per_event * (singles_a_cps + singles_b_cps);
    let basis = overhead.basis_bits_per_sifted * 2.0 * sifted_rate_bps;
    let syndrome = overhead.ec_efficiency * h2(qber) * sifted_rate_bps;
    (timetags + basis + syndrome) * (1.0 + overhead.framing_overhead)
}

/// Full key-rate evaluation from a coincidence rate and the singles that
/// accompany it. Sifting keeps half the coincidences (two-basis passive
/// choice).
pub fn secure_key_rate(
    coincidence_rate_cps: f64,
    qber: f64,
    singles_a_cps: f64,
    singles_b_cps: f64,
    overhead: &OverheadParams,
) -> KeyRateResult {
    let sifted_rate_bps = 0.5 * coincidence_rate_cps;
    let key_fraction = secure_key_fraction(qber, overhead.ec_efficiency);
    KeyRateResult {
        sifted_rate_bps,
        qber,
        key_fraction,
        secure_rate_bps: sifted_rate_bps * key_fraction,
        classical_overhead_bps: classical_overhead(
            singles_a_cps,
            singles_b_cps,
            sifted_rate_bps,
            qber,
            overhead,
        ),
        feasible: key_fraction > 0.0,
    }
}

/// Key rate at an evaluated QBER operating point.
pub fn key_rate_from_point(point: &QberPoint, overhead: &OverheadParams) -> KeyRateResult {
    secure_key_rate(
        point.true_cps + point.accidental_cps,
        point.qber,
        point.singles_a_cps,
        point.singles_b_cps,
        overhead,
    )
}

// ---------------------------------------------------------------------------
// Pass integration
// ---------------------------------------------------------------------------

/// One pass sample with its link loss and key-rate evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PassSampleResult {
    pub t_s: f64,
    pub elevation_deg: f64,
    pub slant_range_m: f64,
    pub loss_db: f64,
    pub key: KeyRateResult,
}

/// Integrated yield of one pass.
#[derive(Debug, Clone, PartialEq)]
pub struct PassYield {
    /// Integral of the secure rate over the pass, bits.
    pub total_secure_bits: f64,
    /// Store-and-forward classical budget: integral of the classical rate
    /// over the feasible samples, bits.
    pub classical_total_bits: f64,
    /// Steady-state requirement: highest classical rate of any feasible
    /// sample, bps.
    pub peak_classical_bps: f64,
    pub timestep_s: f64,
    pub samples: Vec<PassSampleResult>,
}

/// Evaluates the link, QBER and key rate at every sample of a pass and
/// integrates `secure_rate * timestep`.
///
/// The scenario template's range and elevation are overwritten per sample;
/// infeasible samples contribute nothing to any total.
pub fn pass_key_yield(
    profile: &PassProfile,
    scenario_template: &LinkScenario,
    bench: &Bbm92Setup,
    temperature_k: f64,
    overhead: &OverheadParams,
) -> Result<PassYield, KeyRateError> {
    if profile.samples.is_empty() {
        return Err(KeyRateError::EmptyProfile);
    }
    overhead.validate()?;

    let mut samples = Vec::with_capacity(profile.samples.len());
    let mut total_secure_bits = 0.0;
    let mut classical_total_bits = 0.0;
    let mut peak_classical_bps = 0.0_f64;
    for s in &profile.samples {
        let scenario = scenario_template.at_geometry(s.slant_range_m, Some(s.elevation_deg));
        let loss_db = total_link_loss(&scenario)?.total_db;
        let point = bench.qber_at(loss_db, temperature_k)?;
        let key = key_rate_from_point(&point, overhead);
        if key.feasible {
            total_secure_bits += key.secure_rate_bps * profile.timestep_s;
            classical_total_bits += key.classical_overhead_bps * profile.timestep_s;
            peak_classical_bps = peak_classical_bps.max(key.classical_overhead_bps);
        }
        samples.push(PassSampleResult {
            t_s: s.t_s,
            elevation_deg: s.elevation_deg,
            slant_range_m: s.slant_range_m,
            loss_db,
            key,
        });
    }
    Ok(PassYield {
        total_secure_bits,
        classical_total_bits,
        peak_classical_bps,
        timestep_s: profile.timestep_s,
        samples,
    })
}
