//! `satqkd keyrate-sweep`: secure key and classical-coordination rates
//! across a loss grid at one operating temperature.

use crate::commands::bench_temperature;
use crate::error::CliError;
use crate::report::{num, Csv, OutputWriter};
use satqkd_core::config::ScenarioConfig;
use satqkd_core::keyrate::key_rate_from_point;
use std::fmt::Write as _;
use std::path::Path;

pub fn run(cfg: &mut ScenarioConfig, out: &Path) -> Result<(), CliError> {
    let seed = cfg.seed()?;
    let bench = cfg.bench()?;
    let overhead = cfg.overhead()?;
    let grids = cfg.sweep_grids()?;
    let temperature_k = match grids.temperatures_k.as_slice() {
        [t] => *t,
        list => {
            return Err(CliError::Config(format!(
                "keyrate-sweep needs exactly one temperature in [sweep] temperatures_K, \
                 got {}",
                list.len()
            )))
        }
    };
    bench_temperature(&bench)?; // a split-temperature bench is ambiguous here too
    let writer = OutputWriter::new(out, &cfg.echo(), seed)?;

    let mut csv = Csv::new(&[
        "loss_db",
        "qber",
        "sifted_bps",
        "key_fraction",
        "secure_bps",
        "classical_bps",
        "feasible",
    ]);
    let mut best_secure = 0.0_f64;
    let mut best_loss = f64::NAN;
    let mut cutoff_loss: Option<f64> = None;
    for &loss_db in &grids.loss_db {
        let point = bench
            .qber_at(loss_db, temperature_k)
            .map_err(|e| CliError::Config(e.to_string()))?;
        let key = key_rate_from_point(&point, &overhead);
        csv.row(&[
            num(loss_db),
            num(key.qber),
            num(key.sifted_rate_bps),
            num(key.key_fraction),
            num(key.secure_rate_bps),
            num(key.classical_overhead_bps),
            key.feasible.to_string(),
        ]);
        if key.secure_rate_bps > best_secure {
            best_secure = key.secure_rate_bps;
            best_loss = loss_db;
        }
        if key.feasible {
            cutoff_loss = Some(loss_db);
        }
    }
    writer.write("keyrate_sweep.csv", &csv.finish())?;

    let mut summary = String::new();
    let _ = writeln!(
        summary,
        "key-rate sweep at T = {temperature_k} K over {} loss points",
        grids.loss_db.len()
    );
    let _ = writeln!(
        summary,
        "peak secure rate: {best_secure:.1} bps at {best_loss} dB"
    );
    match cutoff_loss {
        Some(l) => {
            let _ = writeln!(summary, "last feasible loss on the grid: {l} dB");
        }
        None => {
            let _ = writeln!(summary, "no feasible point on the grid");
        }
    }
    writer.write("summary.txt", &summary)?;
    Ok(())
}
