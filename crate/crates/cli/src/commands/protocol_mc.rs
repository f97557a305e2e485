//! `satqkd protocol-mc`: one photon-level Monte Carlo run (BBM92 or BB84),
//! sifting, a sacrificial QBER estimate, and the analytic prediction it
//! should match.

use crate::commands::bench_temperature;
use crate::error::CliError;
use crate::report::{num, OutputWriter};
use satqkd_core::config::{ProtocolKind, ScenarioConfig};
use satqkd_core::protocol::{
    estimate_qber, sift, simulate_bb84, simulate_bbm92, QberEstimate, RunReport, SiftedKey,
};
use satqkd_core::qber::{bb84_qber, bb84_signal_probability, QberPoint};
use satqkd_core::units::{db_to_transmittance, Decibels};
use std::fmt::Write as _;
use std::path::Path;

pub fn run(cfg: &mut ScenarioConfig, out: &Path, dump_keys: bool) -> Result<(), CliError> {
    let seed = cfg.seed()?;
    let protocol = cfg.protocol()?;

    match protocol.kind {
        ProtocolKind::Bbm92 => {
            let bench = cfg.bench()?;
            let temperature_k = bench_temperature(&bench)?;
            let writer = OutputWriter::new(out, &cfg.echo(), seed)?;

            let run = simulate_bbm92(
                protocol.n_slots,
                &bench,
                protocol.loss_db,
                temperature_k,
                seed,
            )
            .map_err(|e| CliError::Config(e.to_string()))?;
            let analytic = bench
                .qber_at(protocol.loss_db, temperature_k)
                .map_err(|e| CliError::Config(e.to_string()))?;
            let (key_a, key_b) =
                sift(&run.alice, &run.bob).map_err(|e| CliError::Config(e.to_string()))?;
            let estimate = estimate_qber(&key_a, &key_b, protocol.sample_fraction, seed)
                .map_err(|e| CliError::Config(e.to_string()))?;

            let body = report_body(
                "bbm92",
                &run.report,
                &analytic,
                &estimate,
                protocol.loss_db,
                temperature_k,
                &[],
            );
            writer.write("run_report.txt", &body)?;
            finish(
                &writer,
                "bbm92",
                &run.report,
                &analytic,
                &estimate,
                dump_keys,
            )
        }
        ProtocolKind::Bb84 => {
            let (source, intrinsic_error) = cfg.wcp_source()?;
            let bench = cfg.bench()?; // receiver = detector_b, stray = background b
            let detector = bench.detector_b;
            let background = bench.background_b;
            let window_s = bench.coincidence_window_s;
            let writer = OutputWriter::new(out, &cfg.echo(), seed)?;

            let run = simulate_bb84(
                protocol.n_slots,
                &source,
                &detector,
                protocol.loss_db,
                &background,
                window_s,
                intrinsic_error,
                seed,
            )
            .map_err(|e| CliError::Config(e.to_string()))?;
            let analytic = bb84_qber(
                &source,
                &detector,
                protocol.loss_db,
                &background,
                window_s,
                intrinsic_error,
            )
            .map_err(|e| CliError::Config(e.to_string()))?;
            let (key_a, key_b) =
                sift(&run.alice, &run.bob).map_err(|e| CliError::Config(e.to_string()))?;
            let estimate = estimate_qber(&key_a, &key_b, protocol.sample_fraction, seed)
                .map_err(|e| CliError::Config(e.to_string()))?;

            // Photon-only analytic gains for the decoy comparison.
            let eta_link = db_to_transmittance(
                Decibels::new(protocol.loss_db).map_err(|e| CliError::Config(e.to_string()))?,
            )
            .map_err(|e| CliError::Config(e.to_string()))?
            .value();
            let eta_total = eta_link * detector.efficiency;
            let mut gain_lines = Vec::new();
            if let Some(g) = &run.report.per_intensity_gain {
                gain_lines.push(format!(
                    "signal gain (mu = {}): {} measured, {} analytic photon-only",
                    g.signal_mean_photon,
                    num(g.signal_gain),
                    num(bb84_signal_probability(g.signal_mean_photon, eta_total))
                ));
                gain_lines.push(format!(
                    "decoy gain (mu = {}): {} measured, {} analytic photon-only",
                    g.decoy_mean_photon,
                    num(g.decoy_gain),
                    num(bb84_signal_probability(g.decoy_mean_photon, eta_total))
                ));
            }
            let body = report_body(
                "bb84",
                &run.report,
                &analytic,
                &estimate,
                protocol.loss_db,
                detector.temperature_k,
                &gain_lines,
            );
            writer.write("run_report.txt", &body)?;
            finish(
                &writer,
                "bb84",
                &run.report,
                &analytic,
                &estimate,
                dump_keys,
            )
        }
    }
}

fn report_body(
    protocol: &str,
    report: &RunReport,
    analytic: &QberPoint,
    estimate: &QberEstimate,
    loss_db: f64,
    temperature_k: f64,
    extra_lines: &[String],
) -> String {
    let mut b = String::new();
    let _ = writeln!(b, "protocol = {protocol}");
    let _ = writeln!(b, "n_slots = {}", report.n_slots);
    let _ = writeln!(b, "loss_db = {}", num(loss_db));
    let _ = writeln!(b, "temperature_K = {}", num(temperature_k));
    let _ = writeln!(b, "detections_a = {}", report.detections_a);
    let _ = writeln!(b, "detections_b = {}", report.detections_b);
    let _ = writeln!(b, "coincidences = {}", report.coincidences);
    let _ = writeln!(b, "sifted_length = {}", report.sifted_length);
    let _ = writeln!(b, "measured_qber = {}", num(report.measured_qber));
    let _ = writeln!(b, "analytic_qber = {}", num(analytic.qber));
    let _ = writeln!(b, "estimated_qber = {}", num(estimate.estimate));
    let _ = writeln!(b, "estimate_sample_bits = {}", estimate.sample_size);
    let _ = writeln!(b, "final_key_bits = {}", estimate.remaining_a.len());
    for line in extra_lines {
        let _ = writeln!(b, "{line}");
    }
    b
}

fn key_line(key: &SiftedKey) -> String {
    let mut line: String = key
        .bits
        .iter()
        .map(|&b| if b { '1' } else { '0' })
        .collect();
    line.push('\n');
    line
}

fn finish(
    writer: &OutputWriter,
    protocol: &str,
    report: &RunReport,
    analytic: &QberPoint,
    estimate: &QberEstimate,
    dump_keys: bool,
) -> Result<(), CliError> {
    if dump_keys {
        writer.write("keys_a.txt", &key_line(&estimate.remaining_a))?;
        writer.write("keys_b.txt", &key_line(&estimate.remaining_b))?;
    }
    let mut summary = String::new();
    let _ = writeln!(
        summary,
        "{protocol} run: {} slots -> {} sifted bits, {} kept after estimation",
        report.n_slots,
        report.sifted_length,
        estimate.remaining_a.len()
    );
    let _ = writeln!(
        summary,
        "qber: measured {}, estimated {}, analytic {}",
        num(report.measured_qber),
        num(estimate.estimate),
        num(analytic.qber)
    );
    writer.write("summary.txt", &summary)
}
