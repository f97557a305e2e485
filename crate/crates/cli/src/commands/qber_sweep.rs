//! `satqkd qber-sweep`: detector-limited QBER across loss/temperature grids,
//! with optional maximum-tolerable-loss solves.

use crate::error::CliError;
use crate::report::{num, Csv, OutputWriter};
use satqkd_core::config::ScenarioConfig;
use satqkd_core::qber::{max_tolerable_loss, qber_vs_loss_sweep, QberError};
use std::fmt::Write as _;
use std::path::Path;

pub fn run(cfg: &mut ScenarioConfig, out: &Path) -> Result<(), CliError> {
    let seed = cfg.seed()?;
    let bench = cfg.bench()?;
    let grids = cfg.sweep_grids()?;
    let writer = OutputWriter::new(out, &cfg.echo(), seed)?;

    let points = qber_vs_loss_sweep(&bench, &grids.temperatures_k, &grids.loss_db)
        .map_err(|e| CliError::Config(e.to_string()))?;

    let mut csv = Csv::new(&[
        "temperature_K",
        "loss_db",
        "singles_a_cps",
        "singles_b_cps",
        "true_cps",
        "accidental_cps",
        "qber",
    ]);
    for p in &points {
        csv.row(&[
            num(p.temperature_k),
            num(p.link_loss_db),
            num(p.singles_a_cps),
            num(p.singles_b_cps),
            num(p.true_cps),
            num(p.accidental_cps),
            num(p.qber),
        ]);
    }
    writer.write("qber_sweep.csv", &csv.finish())?;

    let mut summary = String::new();
    let _ = writeln!(
        summary,
        "qber sweep: {} temperatures x {} loss points",
        grids.temperatures_k.len(),
        grids.loss_db.len()
    );
    for &t in &grids.temperatures_k {
        let at_t: Vec<_> = points.iter().filter(|p| p.temperature_k == t).collect();
        let first = at_t.first().expect("non-empty grid");
        let last = at_t.last().expect("non-empty grid");
        let _ = writeln!(
            summary,
            "T = {t} K: qber {:.6} at {} dB -> {:.6} at {} dB",
            first.qber, first.link_loss_db, last.qber, last.link_loss_db
        );
    }

    if let Some(threshold) = grids.qber_threshold {
        for &t in &grids.temperatures_k {
            let solved = max_tolerable_loss(&bench, t, threshold).map_err(|e| match e {
                QberError::InfeasibleAtZeroLoss { .. } => CliError::Quantitative(e.to_string()),
                other => CliError::Config(other.to_string()),
            })?;
            let note = if solved.capped {
                " (capped at the 100 dB search ceiling)"
            } else {
                ""
            };
            let _ = writeln!(
                summary,
                "L*(T = {t} K) = {:.6} dB at qber threshold {threshold}{note}",
                solved.loss_db
            );
        }
    }
    writer.write("summary.txt", &summary)?;
    Ok(())
}
