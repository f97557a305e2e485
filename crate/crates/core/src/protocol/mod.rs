//! Seeded photon-level Monte Carlo of BBM92 and BB84, plus sifting and
//! error estimation. The simulation is the brute-force oracle for the
//! analytic QBER model: expectations match [`crate::qber`] by construction.
//!
//! # Slot model
//!
//! Simulation is slot-discretized: one slot per emitted pair (BBM92) or
//! pulse (BB84). Noise (aggregated dark counts plus thinned stray light) is
//! injected per slot with probability `N * 2 * W_eff` - the probability
//! that a noise count lands within the coincidence window of that slot, with
//! the factor two because either side may fire first. Slots containing both
//! a photon detection and a noise count classify as photon detections.
//! Detector dead time is *not* simulated (slots are assumed longer than the
//! recovery); the analytic model's live-time correction covers it.
//!
//! # Determinism
//!
//! Every subsystem (source, each channel, each detector, the error-
//! estimation sampler, the relay demo's key material) owns an independent
//! ChaCha12 stream derived from the run seed, and every per-slot decision
//! consumes a fixed number of draws from its stream, so results are
//! bit-identical for a given seed and configuration regardless of how the
//! surrounding code evolves between runs.

pub mod relay;

use crate::detector::{
    dark_count_rate, effective_coincidence_window, DetectorParams, DETECTORS_PER_RECEIVER,
};
use crate::qber::{BackgroundLight, Bbm92Setup, QberError, WcpSourceParams};
use rand::distr::{Bernoulli, Distribution};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::Poisson;
use thiserror::Error;

// ---------------------------------------------------------------------------
// RNG streams
// ---------------------------------------------------------------------------

/// Independent random streams, one per physical subsystem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Source = 0,
    ChannelA = 1,
    ChannelB = 2,
    DetectorA = 3,
    DetectorB = 4,
    Sampling = 5,
    Relay = 6,
}

/// The generator for one subsystem of one seeded run.
pub fn subsystem_rng(seed: u64, stream: Stream) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

/// Errors raised by simulation and post-processing.
#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error(transparent)]
    Qber(#[from] QberError),
    #[error("simulation requires at least one slot")]
    ZeroSlots,
    #[error("party records must have equal length, got {a} and {b}")]
    RecordLengthMismatch { a: usize, b: usize },
    #[error("sifted keys are not aligned (lengths {a} and {b} or differing slot indices)")]
    MisalignedKeys { a: usize, b: usize },
    #[error("sample fraction must lie in (0, 1), got {0}")]
    SampleFractionOutOfRange(f64),
    #[error("error-estimation sample is empty (sifted length {0})")]
    EmptySample(usize),
}

// ---------------------------------------------------------------------------
// Records
// ---------------------------------------------------------------------------

/// Per-slot measurement record of one party.
#[derive(Debug, Clone, PartialEq)]
pub struct PartyRecord {
    /// Basis choice per slot (false = Z, true = X).
    pub bases: Vec<bool>,
    /// Measured bit per slot (filler false where nothing was detected).
    pub bits: Vec<bool>,
    /// Which slots produced a detection.
    pub detected_flags: Vec<bool>,
    /// Slot pitch, seconds; slot `i` begins at `i * slot_period_s`.
    pub slot_period_s: f64,
}

impl PartyRecord {
    fn with_capacity(n: usize, slot_period_s: f64) -> Self {
        Self {
            bases: Vec::with_capacity(n),
            bits: Vec::with_capacity(n),
            detected_flags: Vec::with_capacity(n),
            slot_period_s,
        }
    }

    fn push(&mut self, basis: bool, bit: bool, detected: bool) {
        self.bases.push(basis);
        self.bits.push(bit);
        self.detected_flags.push(detected);
    }

    pub fn len(&self) -> usize {
        self.bases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bases.is_empty()
    }

    /// Timestamp of a slot, seconds from the start of the run.
    pub fn timestamp_s(&self, slot: usize) -> f64 {
        slot as f64 * self.slot_period_s
    }
}

/// Key bits surviving basis sifting, with their originating slots.
#[derive(Debug, Clone, PartialEq)]
pub struct SiftedKey {
    pub bits: Vec<bool>,
    /// Strictly increasing slot indices the bits came from.
    pub source_indices: Vec<usize>,
}

impl SiftedKey {
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }
}

/// Detection probability per pulse, by source intensity (BB84 only).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerIntensityGain {
    pub signal_mean_photon: f64,
    pub signal_gain: f64,
    pub decoy_mean_photon: f64,
    pub decoy_gain: f64,
}

/// Aggregated outcome of one simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub n_slots: u64,
    pub detections_a: u64,
    pub detections_b: u64,
    /// Slots in which both parties registered a detection.
    pub coincidences: u64,
    pub sifted_length: u64,
    /// Mismatch fraction across the full sifted keys (0 when empty).
    pub measured_qber: f64,
    pub per_intensity_gain: Option<PerIntensityGain>,
    pub seed: u64,
}

/// A finished BBM92 run.
#[derive(Debug, Clone, PartialEq)]
pub struct Bbm92Run {
    pub report: RunReport,
    pub alice: PartyRecord,
    pub bob: PartyRecord,
}

/// A finished BB84 run (`alice` is the sender; her flags are all true).
#[derive(Debug, Clone, PartialEq)]
pub struct Bb84Run {
    pub report: RunReport,
    pub alice: PartyRecord,
    pub bob: PartyRecord,
}

// ---------------------------------------------------------------------------
// BBM92
// ---------------------------------------------------------------------------

/// Fixed per-slot draws of one receiver arm, in stream order.
struct ArmDraw {
    thin: bool,
    noise: bool,
    basis: bool,
    noise_bit: bool,
    mismatch_bit: bool,
}

struct ArmDice {
    thin: Bernoulli,
    noise: Bernoulli,
    half: Bernoulli,
}

impl ArmDice {
    fn new(det: &DetectorParams, bg: &BackgroundLight, window_acc_s: f64) -> Self {
        let noise_rate = f64::from(DETECTORS_PER_RECEIVER) * dark_count_rate(det)
            + det.efficiency * bg.stray_rate_cps;
        Self {
            thin: Bernoulli::new(det.efficiency).unwrap(),
            noise: Bernoulli::new((noise_rate * window_acc_s).min(1.0)).unwrap(),
            half: Bernoulli::new(0.5).unwrap(),
        }
    }

    fn draw(&self, rng: &mut ChaCha12Rng) -> ArmDraw {
        ArmDraw {
            thin: self.thin.sample(rng),
            noise: self.noise.sample(rng),
            basis: self.half.sample(rng),
            noise_bit: self.half.sample(rng),
            mismatch_bit: self.half.sample(rng),
        }
    }
}

/// Runs a photon-level BBM92 simulation of `n_pairs` source emissions over
/// the given bench, with the swept link loss split per the bench convention
/// and both receivers at `temperature_k`.
pub fn simulate_bbm92(
    n_pairs: u64,
    bench: &Bbm92Setup,
    total_loss_db: f64,
    temperature_k: f64,
    seed: u64,
) -> Result<Bbm92Run, SimError> {
    if n_pairs == 0 {
        return Err(SimError::ZeroSlots);
    }
    bench.validate()?;
    let det_a = DetectorParams {
        temperature_k,
        ..bench.detector_a
    };
    let det_b = DetectorParams {
        temperature_k,
        ..bench.detector_b
    };
    det_a.validate().map_err(QberError::from)?;
    det_b.validate().map_err(QberError::from)?;
    for (name, v) in [("link_loss", total_loss_db)] {
        if !v.is_finite() || v < 0.0 {
            return Err(QberError::Negative { name, value: v }.into());
        }
    }

    let (loss_a_db, loss_b_db) = bench.split_loss(total_loss_db);
    let t_a = crate::units::db_to_eta(loss_a_db + bench.source.arm_loss_a_db);
    let t_b = crate::units::db_to_eta(loss_b_db + bench.source.arm_loss_b_db);
    let w_eff = effective_coincidence_window(
        bench.coincidence_window_s,
        det_a.jitter_rms_s,
        det_b.jitter_rms_s,
    );
    let w_acc = 2.0 * w_eff;

    let mut src = subsystem_rng(seed, Stream::Source);
    let mut ch_a = subsystem_rng(seed, Stream::ChannelA);
    let mut ch_b = subsystem_rng(seed, Stream::ChannelB);
    let mut rx_a = subsystem_rng(seed, Stream::DetectorA);
    let mut rx_b = subsystem_rng(seed, Stream::DetectorB);

    let half = Bernoulli::new(0.5).unwrap();
    let flip = Bernoulli::new(bench.source.intrinsic_qber).unwrap();
    let survive_a = Bernoulli::new(t_a).unwrap();
    let survive_b = Bernoulli::new(t_b).unwrap();
    let dice_a = ArmDice::new(&det_a, &bench.background_a, w_acc);
    let dice_b = ArmDice::new(&det_b, &bench.background_b, w_acc);

    let slot_period_s = 1.0 / bench.source.pair_rate_cps;
    let n = n_pairs as usize;
    let mut alice = PartyRecord::with_capacity(n, slot_period_s);
    let mut bob = PartyRecord::with_capacity(n, slot_period_s);
    let (mut detections_a, mut detections_b, mut coincidences) = (0u64, 0u64, 0u64);
    let (mut sifted, mut errors) = (0u64, 0u64);

    for _ in 0..n_pairs {
        // Source: correlated pair value and the intrinsic-error flip.
        let pair_bit = half.sample(&mut src);
        let flipped = flip.sample(&mut src);
        // Channels: independent per-arm survival.
        let arrive_a = survive_a.sample(&mut ch_a);
        let arrive_b = survive_b.sample(&mut ch_b);
        // Receivers: fixed draw block per arm.
        let a = dice_a.draw(&mut rx_a);
        let b = dice_b.draw(&mut rx_b);

        let photon_a = arrive_a && a.thin;
        let photon_b = arrive_b && b.thin;
        let detected_a = photon_a || a.noise;
        let detected_b = photon_b || b.noise;
        let bases_match = a.basis == b.basis;

        let bit_a = if photon_a { pair_bit } else { a.noise_bit };
        let bit_b = if photon_b {
            if bases_match {
                pair_bit ^ flipped
            } else {
                b.mismatch_bit
            }
        } else {
            b.noise_bit
        };

        detections_a += u64::from(detected_a);
        detections_b += u64::from(detected_b);
        if detected_a && detected_b {
            coincidences += 1;
            if bases_match {
                sifted += 1;
                errors += u64::from(bit_a != bit_b);
            }
        }
        alice.push(a.basis, bit_a, detected_a);
        bob.push(b.basis, bit_b, detected_b);
    }

    let measured_qber = if sifted > 0 {
        errors as f64 / sifted as f64
    } else {
        0.0
    };
    Ok(Bbm92Run {
        report: RunReport {
            n_slots: n_pairs,
            detections_a,
            detections_b,
            coincidences,
            sifted_length: sifted,
            measured_qber,
            per_intensity_gain: None,
            seed,
        },
        alice,
        bob,
    })
}

// ---------------------------------------------------------------------------
// BB84
// ---------------------------------------------------------------------------

/// Runs a photon-level decoy-capable BB84 simulation of `n_pulses` weak
/// coherent pulses over a single channel into one receiver.
///
/// Per pulse: intensity choice, Poisson photon number, independent survival
/// per photon, efficiency thinning per arriving photon, background injection
/// with probability `(dark + stray) * window`, and an intrinsic flip of
/// photon-caused outcomes with probability `intrinsic_error`. Alice's record
/// marks every slot as detected (she is the sender).
#[allow(clippy::too_many_arguments)] // a flat list of physical knobs, by design
pub fn simulate_bb84(
    n_pulses: u64,
    source: &WcpSourceParams,
    det: &DetectorParams,
    link_loss_db: f64,
    bg: &BackgroundLight,
    window_s: f64,
    intrinsic_error: f64,
    seed: u64,
) -> Result<Bb84Run, SimError> {
    if n_pulses == 0 {
        return Err(SimError::ZeroSlots);
    }
    source.validate()?;
    det.validate().map_err(QberError::from)?;
    bg.validate()?;
    for (name, v) in [("window", window_s), ("link_loss", link_loss_db)] {
        if !v.is_finite() || v < 0.0 {
            return Err(QberError::Negative { name, value: v }.into());
        }
    }
    if !intrinsic_error.is_finite() || !(0.0..0.5).contains(&intrinsic_error) {
        return Err(SimError::Qber(QberError::IntrinsicQberOutOfRange(
            intrinsic_error,
        )));
    }

    let transmittance = crate::units::db_to_eta(link_loss_db);
    let p_bg = ((dark_count_rate(det) + bg.stray_rate_cps) * window_s).min(1.0);

    let mut src = subsystem_rng(seed, Stream::Source);
    let mut channel = subsystem_rng(seed, Stream::ChannelB);
    let mut receiver = subsystem_rng(seed, Stream::DetectorB);

    let half = Bernoulli::new(0.5).unwrap();
    let pick_signal = Bernoulli::new(source.signal_fraction).unwrap();
    let poisson_signal = Poisson::new(source.mean_photon_signal).unwrap();
    let poisson_decoy = Poisson::new(source.mean_photon_decoy).unwrap();
    let survive = Bernoulli::new(transmittance).unwrap();
    let thin = Bernoulli::new(det.efficiency).unwrap();
    let background = Bernoulli::new(p_bg).unwrap();
    let flip = Bernoulli::new(intrinsic_error).unwrap();

    let slot_period_s = 1.0 / source.pulse_rate_hz;
    let n = n_pulses as usize;
    let mut alice = PartyRecord::with_capacity(n, slot_period_s);
    let mut bob = PartyRecord::with_capacity(n, slot_period_s);
    let (mut detections_b, mut coincidences) = (0u64, 0u64);
    let (mut sifted, mut errors) = (0u64, 0u64);
    let (mut signal_pulses, mut signal_hits) = (0u64, 0u64);
    let (mut decoy_pulses, mut decoy_hits) = (0u64, 0u64);

    for _ in 0..n_pulses {
        // Source: intensity, photon number, bit and basis.
        let is_signal = pick_signal.sample(&mut src);
        let poisson = if is_signal {
            &poisson_signal
        } else {
            &poisson_decoy
        };
        let n_photons = poisson.sample(&mut src) as u64;
        let alice_bit = half.sample(&mut src);
        let alice_basis = half.sample(&mut src);

        // Channel: independent survival per photon.
        let mut arrived = 0u64;
        for _ in 0..n_photons {
            arrived += u64::from(survive.sample(&mut channel));
        }

        // Receiver: per-photon thinning, then the fixed draw block.
        let mut photon_hit = false;
        for _ in 0..arrived {
            photon_hit |= thin.sample(&mut receiver);
        }
        let bg_hit = background.sample(&mut receiver);
        let bob_basis = half.sample(&mut receiver);
        let bg_bit = half.sample(&mut receiver);
        let mismatch_bit = half.sample(&mut receiver);
        let flipped = flip.sample(&mut receiver);

        let detected = photon_hit || bg_hit;
        let bases_match = alice_basis == bob_basis;
        let bob_bit = if photon_hit {
            if bases_match {
                alice_bit ^ flipped
            } else {
                mismatch_bit
            }
        } else {
            bg_bit
        };

        if is_signal {
            signal_pulses += 1;
            signal_hits += u64::from(detected);
        } else {
            decoy_pulses += 1;
            decoy_hits += u64::from(detected);
        }
        detections_b += u64::from(detected);
        if detected {
            coincidences += 1;
            if bases_match {
                sifted += 1;
                errors += u64::from(alice_bit != bob_bit);
            }
        }
        alice.push(alice_basis, alice_bit, true);
        bob.push(bob_basis, bob_bit, detected);
    }

    let gain = |hits: u64, pulses: u64| {
        if pulses > 0 {
            hits as f64 / pulses as f64
        } else {
            0.0
        }
    };
    let measured_qber = if sifted > 0 {
        errors as f64 / sifted as f64
    } else {
        0.0
    };
    Ok(Bb84Run {
        report: RunReport {
            n_slots: n_pulses,
            detections_a: n_pulses,
            detections_b,
            coincidences,
            sifted_length: sifted,
            measured_qber,
            per_intensity_gain: Some(PerIntensityGain {
                signal_mean_photon: source.mean_photon_signal,
                signal_gain: gain(signal_hits, signal_pulses),
                decoy_mean_photon: source.mean_photon_decoy,
                decoy_gain: gain(decoy_hits, decoy_pulses),
            }),
            seed,
        },
        alice,
        bob,
    })
}

// ---------------------------------------------------------------------------
// Sifting and error estimation
// ---------------------------------------------------------------------------

/// Keeps the slots in which both parties detected and chose the same basis;
/// the two outputs are aligned slot-for-slot.
pub fn sift(a: &PartyRecord, b: &PartyRecord) -> Result<(SiftedKey, SiftedKey), SimError> {
    if a.len() != b.len() {
        return Err(SimError::RecordLengthMismatch {
            a: a.len(),
            b: b.len(),
        });
    }
    let mut key_a = SiftedKey {
        bits: Vec::new(),
        source_indices: Vec::new(),
    };
    let mut key_b = SiftedKey {
        bits: Vec::new(),
        source_indices: Vec::new(),
    };
    for i in 0..a.len() {
        if a.detected_flags[i] && b.detected_flags[i] && a.bases[i] == b.bases[i] {
            key_a.bits.push(a.bits[i]);
            key_a.source_indices.push(i);
            key_b.bits.push(b.bits[i]);
            key_b.source_indices.push(i);
        }
    }
    Ok((key_a, key_b))
}

/// Outcome of [`estimate_qber`]: the public estimate and the surviving keys.
#[derive(Debug, Clone, PartialEq)]
pub struct QberEstimate {
    pub estimate: f64,
    pub sample_size: usize,
    pub remaining_a: SiftedKey,
    pub remaining_b: SiftedKey,
}

/// Compares a random disjoint sample of the sifted keys and removes it.
///
/// The sample indices come from the run-seed's sampling stream, so the
/// estimate is reproducible. The sacrificed bits are deleted from both keys,
/// which remain aligned.
pub fn estimate_qber(
    key_a: &SiftedKey,
    key_b: &SiftedKey,
    sample_fraction: f64,
    seed: u64,
) -> Result<QberEstimate, SimError> {
    if key_a.len() != key_b.len() || key_a.source_indices != key_b.source_indices {
        return Err(SimError::MisalignedKeys {
            a: key_a.len(),
            b: key_b.len(),
        });
    }
    if !sample_fraction.is_finite() || sample_fraction <= 0.0 || sample_fraction >= 1.0 {
        return Err(SimError::SampleFractionOutOfRange(sample_fraction));
    }
    let n = key_a.len();
    let sample_size = ((n as f64) * sample_fraction).round() as usize;
    if sample_size == 0 {
        return Err(SimError::EmptySample(n));
    }

    let mut rng = subsystem_rng(seed, Stream::Sampling);
    let mut sampled = vec![false; n];
    for i in rand::seq::index::sample(&mut rng, n, sample_size) {
        sampled[i] = true;
    }

    let mut mismatches = 0usize;
    let mut remaining_a = SiftedKey {
        bits: Vec::new(),
        source_indices: Vec::new(),
    };
    let mut remaining_b = SiftedKey {
        bits: Vec::new(),
        source_indices: Vec::new(),
    };
    for (i, &in_sample) in sampled.iter().enumerate() {
        if in_sample {
            mismatches += usize::from(key_a.bits[i] != key_b.bits[i]);
        } else {
            remaining_a.bits.push(key_a.bits[i]);
            remaining_a.source_indices.push(key_a.source_indices[i]);
            remaining_b.bits.push(key_b.bits[i]);
            remaining_b.source_indices.push(key_b.source_indices[i]);
        }
    }
    Ok(QberEstimate {
        estimate: mismatches as f64 / sample_size as f64,
        sample_size,
        remaining_a,
        remaining_b,
    })
}
