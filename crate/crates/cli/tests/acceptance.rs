//! Acceptance gate: one test per release criterion, each printing a single
//! PASS/FAIL line with the measured values and the pinned tolerance.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see every
//! verdict line; a FAIL also carries the same line in its panic message.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use satqkd_core::detector::{dark_count_rate, DetectorParams};
use satqkd_core::keyrate::{
    key_rate_from_point, pass_key_yield, secure_key_fraction, OverheadParams,
};
use satqkd_core::link::{table1_scenarios, total_link_loss, LinkScenario};
use satqkd_core::orbit::{pass_profile, CircularOrbit};
use satqkd_core::protocol::relay::{xor_keys, TrustedNodeStore};
use satqkd_core::protocol::simulate_bbm92;
use satqkd_core::qber::{
    max_tolerable_loss, BackgroundLight, Bbm92Setup, EntangledSourceParams, SweepLossArm,
};
use satqkd_core::units::{db_to_transmittance, Decibels};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

/// Prints the verdict line for one criterion and fails the test on FAIL.
fn verdict(criterion: u32, pass: bool, detail: &str) {
    let line = format!(
        "ACCEPTANCE C{criterion} {} - {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    println!("{line}");
    assert!(pass, "{line}");
}

/// The heralded reference bench: ideal heralding arm, one lossy arm.
fn reference_bench() -> Bbm92Setup {
    let mut det_a = DetectorParams::with_defaults(288.15);
    det_a.efficiency = 1.0;
    det_a.jitter_rms_s = 0.0;
    let mut det_b = DetectorParams::with_defaults(288.15);
    det_b.jitter_rms_s = 0.0;
    Bbm92Setup {
        source: EntangledSourceParams {
            pair_rate_cps: 1e6,
            intrinsic_qber: 0.015,
            arm_loss_a_db: 0.0,
            arm_loss_b_db: 0.0,
        },
        detector_a: det_a,
        detector_b: det_b,
        background_a: BackgroundLight::NONE,
        background_b: BackgroundLight::NONE,
        coincidence_window_s: 2e-9,
        loss_arm: SweepLossArm::B,
    }
}

// ---------------------------------------------------------------------------
// C1: link-budget calibration
// ---------------------------------------------------------------------------

/// Every built-in reference scenario reproduced within +/- 3 dB, in < 1 s.
#[test]
fn c1_link_budget_matches_all_reference_scenarios() {
    let start = Instant::now();
    let mut worst_delta = 0.0_f64;
    let mut worst_name = "";
    let scenarios = table1_scenarios();
    for reference in &scenarios {
        let budget = total_link_loss(&reference.scenario).unwrap();
        let delta = budget.total_db - reference.reference_db;
        if delta.abs() > worst_delta.abs() {
            worst_delta = delta;
            worst_name = reference.name;
        }
    }
    let elapsed = start.elapsed();
    verdict(
        1,
        scenarios.len() == 8 && worst_delta.abs() <= 3.0 && elapsed.as_secs_f64() < 1.0,
        &format!(
            "{} scenarios, worst delta {worst_delta:.3} dB ({worst_name}), \
             gate +/- 3 dB, computed in {:.1} ms (budget 1 s)",
            scenarios.len(),
            elapsed.as_secs_f64() * 1e3
        ),
    );
}

// ---------------------------------------------------------------------------
// C2: dB conversion exactness
// ---------------------------------------------------------------------------

/// 180 dB converts to a transmittance of exactly 1e-18.
#[test]
fn c2_db_conversion_is_exact_at_180_db() {
    let eta = db_to_transmittance(Decibels::new(180.0).unwrap())
        .unwrap()
        .value();
    verdict(
        2,
        eta == 1e-18,
        &format!("180 dB -> transmittance {eta:e}, required exactly 1e-18"),
    );
}

// ---------------------------------------------------------------------------
// C3: dark-count calibration
// ---------------------------------------------------------------------------

/// The dark-count fit returns 1709 cps exactly at 273.15 K and 5862 +/- 1
/// cps at 288.15 K.
#[test]
fn c3_dark_count_fit_hits_both_anchor_temperatures() {
    let at_zero_c = dark_count_rate(&DetectorParams::with_defaults(273.15));
    let at_15_c = dark_count_rate(&DetectorParams::with_defaults(288.15));
    verdict(
        3,
        at_zero_c == 1709.0 && (at_15_c - 5862.0).abs() <= 1.0,
        &format!(
            "dark rate {at_zero_c} cps at 273.15 K (required exactly 1709), \
             {at_15_c:.3} cps at 288.15 K (required 5862 +/- 1)"
        ),
    );
}

// ---------------------------------------------------------------------------
// C4: secure-fraction cutoff
// ---------------------------------------------------------------------------

/// The QBER at which the ideal-EC secure fraction vanishes lies in
/// [0.109, 0.112].
#[test]
fn c4_key_fraction_cutoff_is_near_11_percent() {
    // Bisect the boundary of {q : fraction(q) > 0} on [0.05, 0.2].
    let (mut lo, mut hi) = (0.05_f64, 0.2_f64);
    assert!(secure_key_fraction(lo, 1.0) > 0.0);
    assert!(secure_key_fraction(hi, 1.0) == 0.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if secure_key_fraction(mid, 1.0) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let e_star = 0.5 * (lo + hi);
    verdict(
        4,
        (0.109..=0.112).contains(&e_star),
        &format!("secure fraction vanishes at QBER {e_star:.6}, gate [0.109, 0.112]"),
    );
}

// ---------------------------------------------------------------------------
// C5: tolerable-loss temperature slope
// ---------------------------------------------------------------------------

/// Least-squares slope of the maximum tolerable loss over 250..300 K is
/// -0.5 +/- 0.2 dB/K, solved in < 10 s.
#[test]
fn c5_tolerable_loss_slope_over_temperature() {
    let start = Instant::now();
    let bench = reference_bench();
    let temperatures: Vec<f64> = (0..6).map(|i| 250.0 + 10.0 * i as f64).collect();
    let losses: Vec<f64> = temperatures
        .iter()
        .map(|&t| max_tolerable_loss(&bench, t, 0.11).unwrap().loss_db)
        .collect();

    let t_mean = temperatures.iter().sum::<f64>() / temperatures.len() as f64;
    let l_mean = losses.iter().sum::<f64>() / losses.len() as f64;
    let mut num = 0.0;
    let mut den = 0.0;
    for (t, l) in temperatures.iter().zip(&losses) {
        num += (t - t_mean) * (l - l_mean);
        den += (t - t_mean) * (t - t_mean);
    }
    let slope = num / den;
    let elapsed = start.elapsed();
    verdict(
        5,
        (-0.7..=-0.3).contains(&slope) && elapsed.as_secs_f64() < 10.0,
        &format!(
            "L* slope {slope:.4} dB/K over [250, 300] K, gate -0.5 +/- 0.2, \
             solved in {:.1} ms (budget 10 s)",
            elapsed.as_secs_f64() * 1e3
        ),
    );
}

// ---------------------------------------------------------------------------
// C6: key and overhead rates at the reference operating point
// ---------------------------------------------------------------------------

/// At 6.4 dB link loss and 288.15 K the secure rate lands in
/// [27.5, 110] kbps and the classical overhead in [3.75, 15] Mbps.
#[test]
fn c6_reference_operating_point_rates() {
    let bench = reference_bench();
    let point = bench.qber_at(6.4, 288.15).unwrap();
    let key = key_rate_from_point(&point, &OverheadParams::default());
    let secure_ok = (27.5e3..=110e3).contains(&key.secure_rate_bps);
    let classical_ok = (3.75e6..=15e6).contains(&key.classical_overhead_bps);
    verdict(
        6,
        secure_ok && classical_ok,
        &format!(
            "secure {:.1} bps (gate [27.5e3, 110e3]), classical {:.0} bps \
             (gate [3.75e6, 15e6]) at 6.4 dB / 288.15 K",
            key.secure_rate_bps, key.classical_overhead_bps
        ),
    );
}

// ---------------------------------------------------------------------------
// C7: Monte Carlo vs analytic model
// ---------------------------------------------------------------------------

/// One-million-pair BBM92 runs match the analytic coincidence rate and QBER
/// within three standard errors on a 5 x 2 loss/temperature grid, in < 60 s.
#[test]
fn c7_monte_carlo_agrees_with_analytic_model_on_grid() {
    let start = Instant::now();
    let bench = reference_bench();
    let n_pairs: u64 = 1_000_000;
    let total_time_s = n_pairs as f64 / bench.source.pair_rate_cps;

    let mut worst_coincidence_z = 0.0_f64;
    let mut worst_qber_z = 0.0_f64;
    let mut cells = 0;
    for (i, &loss_db) in [0.0, 5.0, 10.0, 15.0, 20.0].iter().enumerate() {
        for (j, &temperature_k) in [263.15, 288.15].iter().enumerate() {
            let point = bench.qber_at(loss_db, temperature_k).unwrap();
            let seed = 2000 + (i * 2 + j) as u64;
            let run = simulate_bbm92(n_pairs, &bench, loss_db, temperature_k, seed).unwrap();

            let expected = (point.true_cps + point.accidental_cps) * total_time_s;
            let coincidence_z = (run.report.coincidences as f64 - expected).abs() / expected.sqrt();
            worst_coincidence_z = worst_coincidence_z.max(coincidence_z);

            let sifted = run.report.sifted_length as f64;
            let se = (point.qber * (1.0 - point.qber) / sifted).sqrt();
            let qber_z = (run.report.measured_qber - point.qber).abs() / se;
            worst_qber_z = worst_qber_z.max(qber_z);
            cells += 1;
        }
    }
    let elapsed = start.elapsed();
    verdict(
        7,
        cells == 10
            && worst_coincidence_z <= 3.0
            && worst_qber_z <= 3.0
            && elapsed.as_secs_f64() < 60.0,
        &format!(
            "{cells} grid cells at 1e6 pairs: worst coincidence deviation \
             {worst_coincidence_z:.2} SE, worst QBER deviation {worst_qber_z:.2} SE \
             (gate 3 SE), ran in {:.1} s (budget 60 s)",
            elapsed.as_secs_f64()
        ),
    );
}

// ---------------------------------------------------------------------------
// C8: relay correctness and parity balance
// ---------------------------------------------------------------------------

/// Ten thousand randomized establish/recover round trips are all exact and
/// the announced parities show a monobit bias below 5e-3 over 1e5 bits.
#[test]
fn c8_relay_round_trips_exactly_and_parity_is_balanced() {
    let mut rng = ChaCha12Rng::seed_from_u64(0xACCE55);
    let mut store = TrustedNodeStore::new();
    let mut mirror_a: Vec<bool> = Vec::new();
    let mut mirror_b: Vec<bool> = Vec::new();
    let mut consumed = 0usize;
    let mut parity_bits: Vec<bool> = Vec::new();

    let trials = 10_000;
    let mut exact = 0;
    for _ in 0..trials {
        let n = rng.random_range(8..=24);
        // Keep both stations topped up with fresh random key material.
        for (mirror, station) in [(&mut mirror_a, "alpha"), (&mut mirror_b, "beta")] {
            let deficit = (consumed + n).saturating_sub(mirror.len());
            let fresh: Vec<bool> = (0..deficit + rng.random_range(0..16))
                .map(|_| rng.random())
                .collect();
            store.deposit(station, fresh.iter().copied());
            mirror.extend(fresh);
        }

        let parity = store.establish_shared("alpha", "beta", n).unwrap();
        let recovered = xor_keys(&parity, &mirror_b[consumed..consumed + n]).unwrap();
        if recovered == mirror_a[consumed..consumed + n] {
            exact += 1;
        }
        parity_bits.extend(parity);
        consumed += n;
    }

    let sample = &parity_bits[..100_000];
    let ones = sample.iter().filter(|&&b| b).count();
    let bias = (ones as f64 / sample.len() as f64 - 0.5).abs();
    verdict(
        8,
        exact == trials && bias < 5e-3,
        &format!(
            "{exact}/{trials} randomized round trips exact, parity monobit bias \
             {bias:.2e} over 1e5 bits (gate 5e-3)"
        ),
    );
}

// ---------------------------------------------------------------------------
// C9: reference orbital pass
// ---------------------------------------------------------------------------

/// The 500 km zenith pass yields between 1e5 and 1e7 secure bits, the
/// zenith slant range equals the altitude bit-for-bit, and the visibility
/// window above 10 degrees lasts 442 +/- 5 s.
#[test]
fn c9_reference_pass_yield_geometry_and_duration() {
    let orbit = CircularOrbit::new(500_000.0).unwrap();
    let zenith_slant = orbit.slant_range_m(90.0).unwrap();
    let profile = pass_profile(&orbit, 90.0, 10.0, 1.0).unwrap();
    let pass = pass_key_yield(
        &profile,
        &LinkScenario::default(),
        &reference_bench(),
        288.15,
        &OverheadParams::default(),
    )
    .unwrap();

    let slant_exact = zenith_slant == 500_000.0;
    let duration_ok = (profile.duration_s - 442.0).abs() <= 5.0;
    let yield_ok = (1e5..=1e7).contains(&pass.total_secure_bits);
    verdict(
        9,
        slant_exact && duration_ok && yield_ok,
        &format!(
            "zenith slant {zenith_slant} m (required exactly 500000), visibility \
             {:.2} s (gate 442 +/- 5), {:.0} secure bits per pass (gate [1e5, 1e7])",
            profile.duration_s, pass.total_secure_bits
        ),
    );
}

// ---------------------------------------------------------------------------
// C10: CLI reproducibility
// ---------------------------------------------------------------------------

fn run_cli(config: &Path, out: &Path) {
    let status = Command::new(env!("CARGO_BIN_EXE_satqkd"))
        .args(["protocol-mc", "--config"])
        .arg(config)
        .arg("--out")
        .arg(out)
        .status()
        .unwrap();
    assert!(status.success(), "protocol-mc run failed");
}

/// Rerunning the CLI with an identical config and seed reproduces every
/// output file byte for byte.
#[test]
fn c10_cli_reruns_are_byte_identical() {
    let config = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/protocol_bbm92.ini");
    let dirs: Vec<PathBuf> = ["a", "b"]
        .iter()
        .map(|tag| {
            let d = std::env::temp_dir().join(format!("satqkd-acceptance-c10-{tag}"));
            let _ = std::fs::remove_dir_all(&d);
            d
        })
        .collect();
    for dir in &dirs {
        run_cli(&config, dir);
    }

    let mut names: Vec<String> = std::fs::read_dir(&dirs[0])
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    let mut total_bytes = 0usize;
    let mut identical = true;
    for name in &names {
        let first = std::fs::read(dirs[0].join(name)).unwrap();
        let second = std::fs::read(dirs[1].join(name)).unwrap();
        identical &= first == second;
        total_bytes += first.len();
    }
    verdict(
        10,
        !names.is_empty() && identical,
        &format!(
            "{} output files ({total_bytes} bytes) byte-identical across reruns: {}",
            names.len(),
            names.join(", ")
        ),
    );
}
