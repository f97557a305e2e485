//! `satqkd pass-sim`: link, QBER and key rate sampled over one orbital
//! pass, integrated to a per-pass key yield.

use crate::commands::bench_temperature;
use crate::error::CliError;
use crate::report::{num, Csv, OutputWriter};
use satqkd_core::config::ScenarioConfig;
use satqkd_core::keyrate::pass_key_yield;
use satqkd_core::orbit::{pass_profile, CircularOrbit};
use std::fmt::Write as _;
use std::path::Path;

pub fn run(cfg: &mut ScenarioConfig, out: &Path) -> Result<(), CliError> {
    let seed = cfg.seed()?;
    let bench = cfg.bench()?;
    let overhead = cfg.overhead()?;
    let template = cfg.link_template()?;
    let geometry = cfg.orbit_pass()?;
    let temperature_k = bench_temperature(&bench)?;
    let writer = OutputWriter::new(out, &cfg.echo(), seed)?;

    let orbit =
        CircularOrbit::new(geometry.altitude_m).map_err(|e| CliError::Config(e.to_string()))?;
    let profile = pass_profile(
        &orbit,
        geometry.max_elevation_deg,
        geometry.min_elevation_deg,
        geometry.timestep_s,
    )
    .map_err(|e| CliError::Config(e.to_string()))?;
    let pass = pass_key_yield(&profile, &template, &bench, temperature_k, &overhead)
        .map_err(|e| CliError::Config(e.to_string()))?;

    let mut csv = Csv::new(&[
        "t_s",
        "elevation_deg",
        "slant_range_m",
        "loss_db",
        "qber",
        "sifted_bps",
        "secure_bps",
        "classical_bps",
        "feasible",
    ]);
    for s in &pass.samples {
        csv.row(&[
            num(s.t_s),
            num(s.elevation_deg),
            num(s.slant_range_m),
            num(s.loss_db),
            num(s.key.qber),
            num(s.key.sifted_rate_bps),
            num(s.key.secure_rate_bps),
            num(s.key.classical_overhead_bps),
            s.key.feasible.to_string(),
        ]);
    }
    writer.write("pass_sim.csv", &csv.finish())?;

    let culmination = &pass.samples[pass.samples.len() / 2];
    let mut summary = String::new();
    let _ = writeln!(
        summary,
        "pass: {} km altitude, culmination {} deg, cutoff {} deg",
        geometry.altitude_m / 1e3,
        geometry.max_elevation_deg,
        geometry.min_elevation_deg
    );
    let _ = writeln!(
        summary,
        "visibility {:.1} s, {} samples at {} s steps",
        profile.duration_s,
        pass.samples.len(),
        pass.timestep_s
    );
    let _ = writeln!(
        summary,
        "culmination: slant {:.0} m, loss {:.3} dB, qber {:.5}, secure {:.1} bps",
        culmination.slant_range_m,
        culmination.loss_db,
        culmination.key.qber,
        culmination.key.secure_rate_bps
    );
    let _ = writeln!(
        summary,
        "secure key per pass: {:.0} bits",
        pass.total_secure_bits
    );
    let _ = writeln!(
        summary,
        "classical budget per pass: {:.0} bits (peak {:.0} bps)",
        pass.classical_total_bits, pass.peak_classical_bps
    );
    writer.write("summary.txt", &summary)?;
    Ok(())
}
