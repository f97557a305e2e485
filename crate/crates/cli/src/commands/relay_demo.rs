//! `satqkd relay-demo`: two simulated QKD passes feed a trusted-node store,
//! which announces an XOR parity that lets the second station recover the
//! first station's key.

use crate::commands::bench_temperature;
use crate::error::CliError;
use crate::report::{num, OutputWriter};
use satqkd_core::config::ScenarioConfig;
use satqkd_core::protocol::relay::{xor_keys, RelayError, TrustedNodeStore};
use satqkd_core::protocol::{sift, simulate_bbm92};
use std::fmt::Write as _;
use std::path::Path;

pub fn run(cfg: &mut ScenarioConfig, out: &Path) -> Result<(), CliError> {
    let seed = cfg.seed()?;
    let relay = cfg.relay()?;
    if relay.key_length_bits == 0 {
        return Err(CliError::Config(
            "[relay] key_length_bits must be positive".into(),
        ));
    }
    let bench = cfg.bench()?;
    let temperature_k = bench_temperature(&bench)?;
    let writer = OutputWriter::new(out, &cfg.echo(), seed)?;

    let mut transcript = String::new();
    let mut store = TrustedNodeStore::new();

    // One pass per station; the satellite-side (alice) sifted bits are the
    // canonical post-reconciliation keys. Pass B runs on the next seed so
    // the two keys are independent.
    let mut ground_keys = Vec::new();
    for (station, loss_db, pass_seed) in [
        (&relay.station_a, relay.loss_a_db, seed),
        (&relay.station_b, relay.loss_b_db, seed.wrapping_add(1)),
    ] {
        let run = simulate_bbm92(relay.n_pairs, &bench, loss_db, temperature_k, pass_seed)
            .map_err(|e| CliError::Config(e.to_string()))?;
        let (key_sat, _key_ground) =
            sift(&run.alice, &run.bob).map_err(|e| CliError::Config(e.to_string()))?;
        let _ = writeln!(
            transcript,
            "pass over {station}: {} pairs at {} dB -> {} sifted bits \
             (measured qber {})",
            relay.n_pairs,
            num(loss_db),
            key_sat.len(),
            num(run.report.measured_qber)
        );
        store.deposit(station, key_sat.bits.iter().copied());
        ground_keys.push(key_sat.bits);
        let _ = writeln!(
            transcript,
            "deposited {} bits for {station}",
            store.deposited(station).expect("station just deposited")
        );
    }

    let n = relay.key_length_bits;
    let _ = writeln!(
        transcript,
        "establishing a {n}-bit shared key between {} and {}",
        relay.station_a, relay.station_b
    );
    let parity = match store.establish_shared(&relay.station_a, &relay.station_b, n) {
        Ok(p) => p,
        Err(e @ RelayError::KeyDepletion { .. }) => {
            let _ = writeln!(transcript, "FAILED: {e}");
            writer.write("transcript.txt", &transcript)?;
            writer.write("summary.txt", &format!("relay failed: {e}\n"))?;
            return Err(CliError::Quantitative(e.to_string()));
        }
        Err(e) => return Err(CliError::Config(e.to_string())),
    };
    let _ = writeln!(transcript, "announced parity of {} bits", parity.len());

    // Station B recovers station A's key from the public parity.
    let recovered =
        xor_keys(&parity, &ground_keys[1][..n]).map_err(|e| CliError::Config(e.to_string()))?;
    if recovered != ground_keys[0][..n] {
        let _ = writeln!(transcript, "FAILED: recovered key does not match");
        writer.write("transcript.txt", &transcript)?;
        return Err(CliError::Quantitative("relay recovery mismatch".into()));
    }
    let _ = writeln!(
        transcript,
        "recovery check: {} exactly recovers {}'s key from the parity",
        relay.station_b, relay.station_a
    );

    let ones = parity.iter().filter(|&&b| b).count();
    let bias = (ones as f64 / n as f64 - 0.5).abs();
    let _ = writeln!(transcript, "parity monobit bias = {}", num(bias));
    for station in [&relay.station_a, &relay.station_b] {
        let _ = writeln!(
            transcript,
            "{station}: consumed {} of {} deposited bits, {} remaining",
            store.consumed(station).expect("known station"),
            store.deposited(station).expect("known station"),
            store.remaining(station).expect("known station")
        );
    }
    writer.write("transcript.txt", &transcript)?;

    let mut summary = String::new();
    let _ = writeln!(
        summary,
        "shared {n}-bit key established between {} and {}",
        relay.station_a, relay.station_b
    );
    let _ = writeln!(summary, "parity monobit bias = {}", num(bias));
    writer.write("summary.txt", &summary)?;
    Ok(())
}
