//! One module per subcommand.

pub mod keyrate_sweep;
pub mod pass_sim;
pub mod protocol_mc;
pub mod qber_sweep;
pub mod relay_demo;
pub mod table1;

use crate::error::CliError;
use satqkd_core::qber::Bbm92Setup;

/// Commands that run the bench at a single operating point take the common
/// detector temperature; a split-temperature bench has no single answer.
pub fn bench_temperature(bench: &Bbm92Setup) -> Result<f64, CliError> {
    let (ta, tb) = (
        bench.detector_a.temperature_k,
        bench.detector_b.temperature_k,
    );
    if ta == tb {
        Ok(ta)
    } else {
        Err(CliError::Config(format!(
            "this command needs one operating temperature, but detector_a is at {ta} K \
             and detector_b at {tb} K"
        )))
    }
}
