//! `satqkd table1`: the calibrated link-budget model against the built-in
//! reference scenarios.

use crate::error::CliError;
use crate::report::{num, Csv, OutputWriter};
use satqkd_core::config::ScenarioConfig;
use satqkd_core::link::{table1_scenarios, total_link_loss};
use std::fmt::Write as _;
use std::path::Path;

/// Largest acceptable model-vs-reference disagreement, dB.
const MAX_DELTA_DB: f64 = 3.0;

pub fn run(cfg: &mut ScenarioConfig, out: &Path) -> Result<(), CliError> {
    let seed = cfg.seed()?;
    let writer = OutputWriter::new(out, &cfg.echo(), seed)?;

    let mut csv = Csv::new(&[
        "name",
        "range_km",
        "model_total_db",
        "reference_db",
        "delta_db",
    ]);
    let mut worst_delta = 0.0_f64;
    let mut worst_name = "";
    for reference in table1_scenarios() {
        let budget =
            total_link_loss(&reference.scenario).map_err(|e| CliError::Config(e.to_string()))?;
        let delta = budget.total_db - reference.reference_db;
        csv.row(&[
            reference.name.to_string(),
            num(reference.scenario.range_m / 1e3),
            num(budget.total_db),
            num(reference.reference_db),
            num(delta),
        ]);
        if delta.abs() > worst_delta.abs() {
            worst_delta = delta;
            worst_name = reference.name;
        }
    }
    writer.write("table1.csv", &csv.finish())?;

    let mut summary = String::new();
    let _ = writeln!(
        summary,
        "reference link budgets: {} scenarios",
        table1_scenarios().len()
    );
    let _ = writeln!(
        summary,
        "worst disagreement: {worst_delta:.3} dB ({worst_name}), gate +/- {MAX_DELTA_DB} dB"
    );
    let verdict = if worst_delta.abs() <= MAX_DELTA_DB {
        "within gate"
    } else {
        "OUTSIDE GATE"
    };
    let _ = writeln!(summary, "verdict: {verdict}");
    writer.write("summary.txt", &summary)?;

    if worst_delta.abs() > MAX_DELTA_DB {
        return Err(CliError::Quantitative(format!(
            "link budget for {worst_name} misses its reference by {worst_delta:.3} dB \
             (gate +/- {MAX_DELTA_DB} dB)"
        )));
    }
    Ok(())
}
