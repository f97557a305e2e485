//! Analytic coincidence statistics and QBER for entanglement-based BBM92
//! links, plus a simplified weak-coherent-pulse BB84 estimate.
//!
//! The BBM92 model tracks, per receiver arm, the photon-caused registered
//! rate `P` and the noise registered rate `N` (aggregated dark counts of the
//! four analyzer detectors plus efficiency-thinned stray light). Singles are
//! dead-time saturated, and the surviving live-time fraction thins both the
//! true-coincidence rate and the accidental channels, so the analytic model
//! and the photon-level Monte Carlo agree in expectation:
//!
//! * `C_true = R_pair * t_A*eta_A * t_B*eta_B * live_A * live_B`
//! * `C_acc  = 2*W * (P'_A*N'_B + N'_A*P'_B + N'_A*N'_B)` with `X' = X*live`
//!
//! Accidentals count the channels in which at least one side registered
//! noise; two *paired* photons landing in one window are the true
//! coincidence itself, not an accidental, so the photon-photon product is
//! deliberately absent - this keeps a noise-free link at exactly the
//! intrinsic error rate. Accidental coincidences are uncorrelated and
//! contribute an error of 1/2; hence
//!
//! `QBER = (e_int*C_true + 0.5*C_acc) / (C_true + C_acc)`.

use crate::detector::{
    dark_count_rate, effective_coincidence_window, saturate, DetectorError, DetectorParams,
    DETECTORS_PER_RECEIVER,
};
use crate::units::db_to_eta;
use thiserror::Error;

// ---------------------------------------------------------------------------
// Constants
// ---------------------------------------------------------------------------

/// QBER above which no secure key can be distilled (asymptotic BB84/BBM92
/// bound with one-way post-processing).
pub const DEFAULT_QBER_THRESHOLD: f64 = 0.11;

/// Upper edge of the bisection window used by [`max_tolerable_loss`], dB.
pub const MAX_SWEEP_LOSS_DB: f64 = 100.0;

/// Errors raised by source validation and QBER evaluation.
#[derive(Debug, Error, PartialEq)]
pub enum QberError {
    #[error(transparent)]
    Detector(#[from] DetectorError),
    #[error("{name} must be finite and > 0, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("{name} must be finite and >= 0, got {value}")]
    Negative { name: &'static str, value: f64 },
    #[error("intrinsic QBER must lie in [0, 0.5), got {0}")]
    IntrinsicQberOutOfRange(f64),
    #[error("decoy intensity must satisfy 0 < decoy < signal <= 1.5, got signal {signal}, decoy {decoy}")]
    MeanPhotonOrdering { signal: f64, decoy: f64 },
    #[error("signal fraction must lie in (0, 1], got {0}")]
    SignalFractionOutOfRange(f64),
    #[error("qber threshold must lie in (0, 0.5), got {0}")]
    ThresholdOutOfRange(f64),
    #[error("sweep grids must be non-empty")]
    EmptyGrid,
    #[error("qber {qber} already exceeds threshold {threshold} at zero link loss")]
    InfeasibleAtZeroLoss { qber: f64, threshold: f64 },
}

// ---------------------------------------------------------------------------
// Parameter types
// ---------------------------------------------------------------------------

/// Entangled-pair source feeding a BBM92 link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntangledSourceParams {
    /// Locally registered pair rate, pairs/s.
    pub pair_rate_cps: f64,
    /// Polarization-correlation error at full transmission, fraction.
    pub intrinsic_qber: f64,
    /// Internal (non-link) loss of arm A, dB.
    pub arm_loss_a_db: f64,
    /// Internal (non-link) loss of arm B, dB.
    pub arm_loss_b_db: f64,
}

impl EntangledSourceParams {
    pub fn validate(&self) -> Result<(), QberError> {
        if !self.pair_rate_cps.is_finite() || self.pair_rate_cps <= 0.0 {
            return Err(QberError::NonPositive {
                name: "pair_rate",
                value: self.pair_rate_cps,
            });
        }
        if !self.intrinsic_qber.is_finite() || !(0.0..0.5).contains(&self.intrinsic_qber) {
            return Err(QberError::IntrinsicQberOutOfRange(self.intrinsic_qber));
        }
        for (name, v) in [
            ("arm_loss_a", self.arm_loss_a_db),
            ("arm_loss_b", self.arm_loss_b_db),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(QberError::Negative { name, value: v });
            }
        }
        Ok(())
    }
}

/// Weak-coherent-pulse source for the simplified BB84 estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WcpSourceParams {
    pub pulse_rate_hz: f64,
    /// Mean photon number of signal pulses (mu).
    pub mean_photon_signal: f64,
    /// Mean photon number of decoy pulses (nu).
    pub mean_photon_decoy: f64,
    /// Fraction of pulses sent at signal intensity.
    pub signal_fraction: f64,
}

impl WcpSourceParams {
    pub fn validate(&self) -> Result<(), QberError> {
        if !self.pulse_rate_hz.is_finite() || self.pulse_rate_hz <= 0.0 {
            return Err(QberError::NonPositive {
                name: "pulse_rate",
                value: self.pulse_rate_hz,
            });
        }
        let (mu, nu) = (self.mean_photon_signal, self.mean_photon_decoy);
        if !mu.is_finite() || !nu.is_finite() || nu <= 0.0 || nu >= mu || mu > 1.5 {
            return Err(QberError::MeanPhotonOrdering {
                signal: mu,
                decoy: nu,
            });
        }
        if !self.signal_fraction.is_finite()
            || self.signal_fraction <= 0.0
            || self.signal_fraction > 1.0
        {
            return Err(QberError::SignalFractionOutOfRange(self.signal_fraction));
        }
        Ok(())
    }
}

/// Uncorrelated background light entering one receiver.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BackgroundLight {
    /// Stray photon rate incident on the receiver, cps.
    pub stray_rate_cps: f64,
}

impl BackgroundLight {
    pub const NONE: Self = Self {
        stray_rate_cps: 0.0,
    };

    pub fn validate(&self) -> Result<(), QberError> {
        if !self.stray_rate_cps.is_finite() || self.stray_rate_cps < 0.0 {
            return Err(QberError::Negative {
                name: "stray_rate",
                value: self.stray_rate_cps,
            });
        }
        Ok(())
    }
}

/// One evaluated operating point of the coincidence model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QberPoint {
    /// Total swept link loss (sum of both arms' link losses), dB.
    pub link_loss_db: f64,
    /// Operating temperature of the receivers, K (detector B's if they differ).
    pub temperature_k: f64,
    pub singles_a_cps: f64,
    pub singles_b_cps: f64,
    pub true_cps: f64,
    pub accidental_cps: f64,
    pub qber: f64,
}

// ---------------------------------------------------------------------------
// Elementary rates
// ---------------------------------------------------------------------------

/// Accidental coincidence rate between two uncorrelated singles streams:
/// `s1 * s2 * window`, doubled when either detector may fire first.
pub fn accidental_rate(s1_cps: f64, s2_cps: f64, window_s: f64, either_first: bool) -> f64 {
    let factor = if either_first { 2.0 } else { 1.0 };
    factor * s1_cps * s2_cps * window_s
}

/// QBER of a coincidence mixture: true pairs err at the intrinsic rate,
/// accidentals at 1/2. With no coincidences at all the intrinsic rate is
/// returned (the limit of a vanishing but noise-free signal).
pub fn coincidence_qber(intrinsic_qber: f64, true_cps: f64, accidental_cps: f64) -> f64 {
    let total = true_cps + accidental_cps;
    if total <= 0.0 {
        intrinsic_qber
    } else {
        (intrinsic_qber * true_cps + 0.5 * accidental_cps) / total
    }
}

/// Per-arm registered rates before coincidence matching.
struct ArmRates {
    /// Photon-caused registered rate (pre-saturation), cps.
    photon: f64,
    /// Noise registered rate (4x dark + thinned stray, pre-saturation), cps.
    noise: f64,
    /// Saturated singles actually counted, cps.
    singles: f64,
    /// Live-time fraction `singles / (photon + noise)`, 1 when idle.
    live: f64,
}

fn arm_rates(
    pair_rate_cps: f64,
    link_loss_db: f64,
    arm_loss_db: f64,
    det: &DetectorParams,
    bg: &BackgroundLight,
) -> ArmRates {
    let transmittance = db_to_eta(link_loss_db + arm_loss_db);
    let photon = pair_rate_cps * transmittance * det.efficiency;
    let noise = f64::from(DETECTORS_PER_RECEIVER) * dark_count_rate(det)
        + det.efficiency * bg.stray_rate_cps;
    let raw = photon + noise;
    let singles = saturate(raw, det.dead_time_s);
    let live = if raw > 0.0 { singles / raw } else { 1.0 };
    ArmRates {
        photon,
        noise,
        singles,
        live,
    }
}

// ---------------------------------------------------------------------------
// BBM92
// ---------------------------------------------------------------------------

/// Evaluates the analytic BBM92 operating point for the given per-arm link
/// losses. See the module docs for the rate model.
#[allow(clippy::too_many_arguments)]
pub fn bbm92_qber(
    source: &EntangledSourceParams,
    det_a: &DetectorParams,
    det_b: &DetectorParams,
    link_loss_a_db: f64,
    link_loss_b_db: f64,
    bg_a: &BackgroundLight,
    bg_b: &BackgroundLight,
    window_s: f64,
) -> Result<QberPoint, QberError> {
    source.validate()?;
    det_a.validate()?;
    det_b.validate()?;
    bg_a.validate()?;
    bg_b.validate()?;
    for (name, v) in [
        ("window", window_s),
        ("link_loss_a", link_loss_a_db),
        ("link_loss_b", link_loss_b_db),
    ] {
        if !v.is_finite() || v < 0.0 {
            return Err(QberError::Negative { name, value: v });
        }
    }

    let a = arm_rates(
        source.pair_rate_cps,
        link_loss_a_db,
        source.arm_loss_a_db,
        det_a,
        bg_a,
    );
    let b = arm_rates(
        source.pair_rate_cps,
        link_loss_b_db,
        source.arm_loss_b_db,
        det_b,
        bg_b,
    );

    // Paired detections must survive both arms and both live-time gates.
    let true_cps = source.pair_rate_cps
        * db_to_eta(link_loss_a_db + source.arm_loss_a_db)
        * det_a.efficiency
        * db_to_eta(link_loss_b_db + source.arm_loss_b_db)
        * det_b.efficiency
        * a.live
        * b.live;

    let window = effective_coincidence_window(window_s, det_a.jitter_rms_s, det_b.jitter_rms_s);
    let w_acc = 2.0 * window; // either side may fire first
    let accidental_cps = w_acc
        * (a.photon * a.live * b.noise * b.live
            + a.noise * a.live * b.photon * b.live
            + a.noise * a.live * b.noise * b.live);

    Ok(QberPoint {
        link_loss_db: link_loss_a_db + link_loss_b_db,
        temperature_k: det_b.temperature_k,
        singles_a_cps: a.singles,
        singles_b_cps: b.singles,
        true_cps,
        accidental_cps,
        qber: coincidence_qber(source.intrinsic_qber, true_cps, accidental_cps),
    })
}

// ---------------------------------------------------------------------------
// BB84 (simplified WCP estimate)
// ---------------------------------------------------------------------------

/// Detection probability per signal pulse: `1 - exp(-mu * eta_total)`.
pub fn bb84_signal_probability(mean_photon: f64, eta_total: f64) -> f64 {
    1.0 - (-mean_photon * eta_total).exp()
}

/// Simplified BB84 operating point for a weak-coherent-pulse source.
///
/// `eta_total` is the link transmittance times the detector efficiency; the
/// background probability per pulse is `(dark + stray) * window` with both
/// rates taken as registered counts (no decoy-state yield bounds, no
/// saturation - the estimate targets the linear regime).
///
/// Field mapping in the returned point: `true_cps`/`accidental_cps` are the
/// signal- and background-caused detection rates, `singles_a_cps` is the
/// sent pulse rate and `singles_b_cps` the total registered rate.
pub fn bb84_qber(
    source: &WcpSourceParams,
    det: &DetectorParams,
    link_loss_db: f64,
    bg: &BackgroundLight,
    window_s: f64,
    intrinsic_error: f64,
) -> Result<QberPoint, QberError> {
    source.validate()?;
    det.validate()?;
    bg.validate()?;
    for (name, v) in [("window", window_s), ("link_loss", link_loss_db)] {
        if !v.is_finite() || v < 0.0 {
            return Err(QberError::Negative { name, value: v });
        }
    }
    if !intrinsic_error.is_finite() || !(0.0..0.5).contains(&intrinsic_error) {
        return Err(QberError::IntrinsicQberOutOfRange(intrinsic_error));
    }

    let eta_total = db_to_eta(link_loss_db) * det.efficiency;
    let p_sig = bb84_signal_probability(source.mean_photon_signal, eta_total);
    let p_bg = (dark_count_rate(det) + bg.stray_rate_cps) * window_s;
    Ok(QberPoint {
        link_loss_db,
        temperature_k: det.temperature_k,
        singles_a_cps: source.pulse_rate_hz,
        singles_b_cps: source.pulse_rate_hz * (p_sig + p_bg),
        true_cps: source.pulse_rate_hz * p_sig,
        accidental_cps: source.pulse_rate_hz * p_bg,
        qber: coincidence_qber(intrinsic_error, p_sig, p_bg),
    })
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

/// Which arm absorbs the swept link loss.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepLossArm {
    A,
    B,
    /// Half the swept loss on each arm.
    SymmetricSplit,
}

impl SweepLossArm {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "a" => Some(Self::A),
            "b" => Some(Self::B),
            "split" => Some(Self::SymmetricSplit),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::A => "a",
            Self::B => "b",
            Self::SymmetricSplit => "split",
        }
    }
}

/// A complete BBM92 bench: source, receivers, backgrounds, window, and the
/// convention for applying a swept link loss.
#[derive(Debug, Clone, PartialEq)]
pub struct Bbm92Setup {
    pub source: EntangledSourceParams,
    pub detector_a: DetectorParams,
    pub detector_b: DetectorParams,
    pub background_a: BackgroundLight,
    pub background_b: BackgroundLight,
    pub coincidence_window_s: f64,
    pub loss_arm: SweepLossArm,
}

impl Bbm92Setup {
    pub fn validate(&self) -> Result<(), QberError> {
        self.source.validate()?;
        self.detector_a.validate()?;
        self.detector_b.validate()?;
        self.background_a.validate()?;
        self.background_b.validate()?;
        if !self.coincidence_window_s.is_finite() || self.coincidence_window_s < 0.0 {
            return Err(QberError::Negative {
                name: "coincidence_window",
                value: self.coincidence_window_s,
            });
        }
        Ok(())
    }

    /// Splits a swept total link loss onto the two arms.
    pub fn split_loss(&self, total_loss_db: f64) -> (f64, f64) {
        match self.loss_arm {
            SweepLossArm::A => (total_loss_db, 0.0),
            SweepLossArm::B => (0.0, total_loss_db),
            SweepLossArm::SymmetricSplit => (0.5 * total_loss_db, 0.5 * total_loss_db),
        }
    }

    /// Evaluates the bench at one swept loss, with both receivers at the
    /// given temperature.
    pub fn qber_at(&self, total_loss_db: f64, temperature_k: f64) -> Result<QberPoint, QberError> {
        let det_a = DetectorParams {
            temperature_k,
            ..self.detector_a
        };
        let det_b = DetectorParams {
            temperature_k,
            ..self.detector_b
        };
        let (loss_a, loss_b) = self.split_loss(total_loss_db);
        bbm92_qber(
            &self.source,
            &det_a,
            &det_b,
            loss_a,
            loss_b,
            &self.background_a,
            &self.background_b,
            self.coincidence_window_s,
        )
    }
}

/// Cartesian sweep of [`Bbm92Setup::qber_at`] ordered by (temperature, loss).
pub fn qber_vs_loss_sweep(
    setup: &Bbm92Setup,
    temperatures_k: &[f64],
    loss_grid_db: &[f64],
) -> Result<Vec<QberPoint>, QberError> {
    setup.validate()?;
    if temperatures_k.is_empty() || loss_grid_db.is_empty() {
        return Err(QberError::EmptyGrid);
    }
    let mut points = Vec::with_capacity(temperatures_k.len() * loss_grid_db.len());
    for &t in temperatures_k {
        for &loss in loss_grid_db {
            points.push(setup.qber_at(loss, t)?);
        }
    }
    Ok(points)
}

/// Result of the tolerable-loss bisection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxTolerableLoss {
    pub loss_db: f64,
    /// True when the QBER never reached the threshold inside the bisection
    /// window, so `loss_db` is the window cap rather than a crossing.
    pub capped: bool,
}

/// Largest swept link loss at which the QBER stays below `threshold`,
/// found by bisection over `[0, 100]` dB.
///
/// QBER is monotone in loss (accidentals gain on true coincidences), so the
/// crossing is unique when it exists. Errors when the link is already above
/// threshold at zero loss; returns the 100 dB cap with `capped = true` when
/// there is no noise floor to cross.
pub fn max_tolerable_loss(
    setup: &Bbm92Setup,
    temperature_k: f64,
    qber_threshold: f64,
) -> Result<MaxTolerableLoss, QberError> {
    if !qber_threshold.is_finite() || qber_threshold <= 0.0 || qber_threshold >= 0.5 {
        return Err(QberError::ThresholdOutOfRange(qber_threshold));
    }
    let q0 = setup.qber_at(0.0, temperature_k)?.qber;
    if q0 >= qber_threshold {
        return Err(QberError::InfeasibleAtZeroLoss {
            qber: q0,
            threshold: qber_threshold,
        });
    }
    if setup.qber_at(MAX_SWEEP_LOSS_DB, temperature_k)?.qber < qber_threshold {
        return Ok(MaxTolerableLoss {
            loss_db: MAX_SWEEP_LOSS_DB,
            capped: true,
        });
    }
    let (mut lo, mut hi) = (0.0_f64, MAX_SWEEP_LOSS_DB);
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if setup.qber_at(mid, temperature_k)?.qber < qber_threshold {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(MaxTolerableLoss {
        loss_db: 0.5 * (lo + hi),
        capped: false,
    })
}

#[cfg(test)]
// Frozen reference values are quoted at full round-trip precision.
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;

    fn approx_eq(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    /// Heralded-source bench: 1 Mcps locally registered pairs, so arm A has
    /// unit efficiency with the detector folded in, and arm B carries the
    /// swept link in front of a 50% receiver. 2 ns window, no jitter, no
    /// dead time, no stray light.
    fn fig5_setup() -> Bbm92Setup {
        let det = |efficiency| DetectorParams {
            efficiency,
            jitter_rms_s: 0.0,
            ..DetectorParams::with_defaults(288.15)
        };
        Bbm92Setup {
            source: EntangledSourceParams {
                pair_rate_cps: 1e6,
                intrinsic_qber: 0.015,
                arm_loss_a_db: 0.0,
                arm_loss_b_db: 0.0,
            },
            detector_a: det(1.0),
            detector_b: det(0.5),
            background_a: BackgroundLight::NONE,
            background_b: BackgroundLight::NONE,
            coincidence_window_s: 2e-9,
            loss_arm: SweepLossArm::B,
        }
    }

    // --- accidental rate ---

    #[test]
    fn accidental_rate_examples() {
        assert!(approx_eq(
            accidental_rate(1000.0, 1000.0, 2e-9, true),
            4.0e-3,
            1e-15
        ));
        assert_eq!(accidental_rate(1e9, 1e9, 0.0, true), 0.0);
        assert_eq!(accidental_rate(1000.0, 1000.0, 2e-9, false), 2.0e-3);
        let dark = 5862.00929169842; // dark rate at 288.15 K
        assert!(approx_eq(
            accidental_rate(dark, dark, 2e-9, true),
            0.13745261174383445,
            1e-12
        ));
    }

    // --- coincidence mixture ---

    #[test]
    fn qber_floor_and_degenerate_cases() {
        // Pure accidentals are random: exactly 1/2.
        assert_eq!(coincidence_qber(0.015, 0.0, 123.0), 0.5);
        // No coincidences at all: the intrinsic rate.
        assert_eq!(coincidence_qber(0.015, 0.0, 0.0), 0.015);
        // Pure signal: the intrinsic rate.
        assert!(approx_eq(coincidence_qber(0.015, 1e5, 0.0), 0.015, 1e-12));
    }

    // --- BBM92 ---

    #[test]
    fn noise_free_link_sits_at_intrinsic_qber() {
        let mut setup = fig5_setup();
        setup.detector_a.dark_fit_a = 0.0;
        setup.detector_a.dark_fit_c = 0.0;
        setup.detector_b.dark_fit_a = 0.0;
        setup.detector_b.dark_fit_c = 0.0;
        let p = setup.qber_at(0.0, 288.15).unwrap();
        assert_eq!(p.accidental_cps, 0.0);
        assert!(approx_eq(p.qber, 0.015, 1e-12), "qber = {}", p.qber);
    }

    #[test]
    fn fig5_zero_loss_frozen_point() {
        let p = fig5_setup().qber_at(0.0, 288.15).unwrap();
        assert!(
            approx_eq(p.qber, 0.015138561243515396, 1e-12),
            "qber = {}",
            p.qber
        );
    }

    #[test]
    fn fig6_operating_point_frozen() {
        let p = fig5_setup().qber_at(6.4, 288.15).unwrap();
        assert!(
            approx_eq(p.singles_a_cps, 1023448.0371667937, 1e-6),
            "S_a = {}",
            p.singles_a_cps
        );
        assert!(
            approx_eq(p.singles_b_cps, 137991.41980518233, 1e-6),
            "S_b = {}",
            p.singles_b_cps
        );
        assert!(
            approx_eq(p.true_cps, 114543.38263838865, 1e-6),
            "C_true = {}",
            p.true_cps
        );
        assert!(
            approx_eq(p.accidental_cps, 106.7346604283369, 1e-9),
            "C_acc = {}",
            p.accidental_cps
        );
        assert!(
            approx_eq(p.qber, 0.015451515545970379, 1e-12),
            "qber = {}",
            p.qber
        );
    }

    #[test]
    fn accidentals_dominate_at_extreme_loss() {
        let p = fig5_setup().qber_at(300.0, 288.15).unwrap();
        assert!(p.qber > 0.49, "qber = {}", p.qber);
        assert!(p.qber <= 0.5);
    }

    #[test]
    fn qber_stays_within_bounds_across_grid() {
        let setup = fig5_setup();
        for t in [250.0, 270.0, 288.15, 310.0] {
            for loss in [0.0, 10.0, 25.0, 40.0, 60.0, 90.0] {
                let q = setup.qber_at(loss, t).unwrap().qber;
                assert!(
                    (0.015..=0.5).contains(&q),
                    "qber {q} out of [e_int, 0.5] at {t} K, {loss} dB"
                );
            }
        }
    }

    #[test]
    fn swapping_arms_leaves_qber_unchanged() {
        let setup = fig5_setup();
        let swapped = Bbm92Setup {
            source: EntangledSourceParams {
                arm_loss_a_db: setup.source.arm_loss_b_db,
                arm_loss_b_db: setup.source.arm_loss_a_db,
                ..setup.source
            },
            detector_a: setup.detector_b,
            detector_b: setup.detector_a,
            background_a: setup.background_b,
            background_b: setup.background_a,
            loss_arm: SweepLossArm::A,
            ..setup.clone()
        };
        for loss in [0.0, 6.4, 20.0, 45.0] {
            let q1 = setup.qber_at(loss, 288.15).unwrap().qber;
            let q2 = swapped.qber_at(loss, 288.15).unwrap().qber;
            assert!(
                approx_eq(q1, q2, 1e-15),
                "asymmetric at {loss} dB: {q1} vs {q2}"
            );
        }
    }

    #[test]
    fn saturation_thins_trues_through_live_time() {
        let mut setup = fig5_setup();
        setup.detector_b.dead_time_s = 26e-9;
        let saturated = setup.qber_at(0.0, 288.15).unwrap();
        let linear = fig5_setup().qber_at(0.0, 288.15).unwrap();
        assert!(saturated.singles_b_cps < linear.singles_b_cps);
        assert!(saturated.true_cps < linear.true_cps);
        // Live fraction applies equally to trues and the dominant P*N
        // accidental channels, and the invariant formula still holds.
        let q = coincidence_qber(0.015, saturated.true_cps, saturated.accidental_cps);
        assert!(approx_eq(saturated.qber, q, 1e-12));
    }

    // --- sweep ---

    #[test]
    fn sweep_ordering_cardinality_and_monotonicity() {
        let setup = fig5_setup();
        let temps = [263.15, 288.15, 300.15];
        let losses = [0.0, 10.0, 20.0, 30.0, 40.0];
        let rows = qber_vs_loss_sweep(&setup, &temps, &losses).unwrap();
        assert_eq!(rows.len(), 15);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.temperature_k, temps[i / losses.len()]);
            assert_eq!(row.link_loss_db, losses[i % losses.len()]);
        }
        // QBER non-decreasing along each temperature row...
        for row in rows.chunks(losses.len()) {
            for w in row.windows(2) {
                assert!(w[1].qber >= w[0].qber);
            }
        }
        // ... and down each loss column.
        for j in 0..losses.len() {
            assert!(rows[j + losses.len()].qber >= rows[j].qber);
            assert!(rows[j + 2 * losses.len()].qber >= rows[j + losses.len()].qber);
        }
    }

    #[test]
    fn sweep_rejects_empty_grids() {
        assert_eq!(
            qber_vs_loss_sweep(&fig5_setup(), &[], &[1.0]).unwrap_err(),
            QberError::EmptyGrid
        );
    }

    // --- max tolerable loss ---

    #[test]
    fn tolerable_loss_frozen_values() {
        let setup = fig5_setup();
        let cases = [
            (250.0, 45.803604012475868),
            (270.0, 37.61841254984086),
            (288.15, 31.032294664531059),
            (300.0, 26.719320213209118),
        ];
        for (t, expected) in cases {
            let r = max_tolerable_loss(&setup, t, DEFAULT_QBER_THRESHOLD).unwrap();
            assert!(!r.capped);
            assert!(
                approx_eq(r.loss_db, expected, 1e-8),
                "L*({t}) = {}",
                r.loss_db
            );
        }
    }

    #[test]
    fn tolerable_loss_is_self_consistent() {
        let setup = fig5_setup();
        let r = max_tolerable_loss(&setup, 288.15, 0.11).unwrap();
        let q = setup.qber_at(r.loss_db, 288.15).unwrap().qber;
        assert!(approx_eq(q, 0.11, 1e-5), "qber at L* = {q}");
    }

    #[test]
    fn cooling_ten_kelvin_buys_a_few_db() {
        let setup = fig5_setup();
        let warm = max_tolerable_loss(&setup, 288.15, 0.11).unwrap().loss_db;
        let cool = max_tolerable_loss(&setup, 278.15, 0.11).unwrap().loss_db;
        let gain = cool - warm;
        assert!(approx_eq(gain, 3.6053715151990565, 1e-8), "gain = {gain}");
        assert!(
            (3.0..=7.0).contains(&gain),
            "10 K of cooling bought {gain} dB"
        );
    }

    #[test]
    fn tolerable_loss_caps_without_noise_floor() {
        let mut setup = fig5_setup();
        for det in [&mut setup.detector_a, &mut setup.detector_b] {
            det.dark_fit_a = 0.0;
            det.dark_fit_c = 0.0;
        }
        let r = max_tolerable_loss(&setup, 288.15, 0.11).unwrap();
        assert!(r.capped);
        assert_eq!(r.loss_db, MAX_SWEEP_LOSS_DB);
    }

    #[test]
    fn tolerable_loss_rejects_infeasible_start() {
        let mut setup = fig5_setup();
        setup.source.intrinsic_qber = 0.12;
        assert!(matches!(
            max_tolerable_loss(&setup, 288.15, 0.11).unwrap_err(),
            QberError::InfeasibleAtZeroLoss { .. }
        ));
    }

    // --- BB84 ---

    #[test]
    fn bb84_gain_frozen() {
        assert!(approx_eq(
            bb84_signal_probability(0.5, 1.0),
            0.39346934028736658,
            1e-15
        ));
    }

    fn wcp() -> WcpSourceParams {
        WcpSourceParams {
            pulse_rate_hz: 100e6,
            mean_photon_signal: 0.5,
            mean_photon_decoy: 0.1,
            signal_fraction: 1.0,
        }
    }

    #[test]
    fn bb84_worked_example() {
        // 6.4 dB link, detector folded into eta_total, p_bg = 1e-6 via
        // 1 kcps of registered background in a 1 ns window.
        let det = DetectorParams {
            efficiency: 1.0,
            dark_fit_a: 0.0,
            dark_fit_c: 0.0,
            jitter_rms_s: 0.0,
            ..DetectorParams::with_defaults(288.15)
        };
        let bg = BackgroundLight {
            stray_rate_cps: 1000.0,
        };
        let p = bb84_qber(&wcp(), &det, 6.4, &bg, 1e-9, 0.01).unwrap();
        assert!(
            approx_eq(p.qber, 0.010004527489488269, 1e-12),
            "qber = {}",
            p.qber
        );
        assert!(
            approx_eq(p.qber, 0.01, 1e-4),
            "background must stay negligible"
        );
    }

    #[test]
    fn bb84_limits() {
        let det = DetectorParams {
            efficiency: 0.5,
            dark_fit_a: 0.0,
            dark_fit_c: 0.0,
            ..DetectorParams::with_defaults(288.15)
        };
        // No background: exactly the intrinsic error.
        let p = bb84_qber(&wcp(), &det, 10.0, &BackgroundLight::NONE, 2e-9, 0.01).unwrap();
        assert_eq!(p.qber, 0.01);
        // Signal extinguished, background present: exactly 1/2.
        let bg = BackgroundLight {
            stray_rate_cps: 1000.0,
        };
        let p = bb84_qber(&wcp(), &det, 4000.0, &bg, 2e-9, 0.01).unwrap();
        assert_eq!(p.qber, 0.5);
    }

    #[test]
    fn source_validation() {
        let mut s = fig5_setup().source;
        s.intrinsic_qber = 0.5;
        assert_eq!(
            s.validate().unwrap_err(),
            QberError::IntrinsicQberOutOfRange(0.5)
        );
        let mut s = fig5_setup().source;
        s.pair_rate_cps = 0.0;
        assert!(s.validate().is_err());
        let mut w = wcp();
        w.mean_photon_decoy = 0.6;
        assert!(matches!(
            w.validate().unwrap_err(),
            QberError::MeanPhotonOrdering { .. }
        ));
        let mut w = wcp();
        w.signal_fraction = 0.0;
        assert!(w.validate().is_err());
        assert!(wcp().validate().is_ok());
    }
}
