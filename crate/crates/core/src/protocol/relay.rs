//! Trusted-node XOR key relay.
//!
//! A satellite that has run QKD with two ground stations holds one key per
//! station. Announcing the bitwise parity `K_A xor K_B` lets station B
//! recover `K_A = parity xor K_B` while the broadcast itself is the XOR of
//! two independent uniform keys - a one-time-pad ciphertext that reveals
//! nothing to anyone holding neither key. The node must be trusted: it knows
//! both keys.
//!
//! [`TrustedNodeStore`] does the satellite-side bookkeeping, consuming key
//! material monotonically so no bit is ever announced twice.

use std::collections::BTreeMap;
use thiserror::Error;

/// Errors raised by relay operations.
#[derive(Debug, Error, PartialEq)]
pub enum RelayError {
    #[error("keys must have equal length, got {a} and {b}")]
    LengthMismatch { a: usize, b: usize },
    #[error("no key material deposited for station {0:?}")]
    UnknownStation(String),
    #[error("stations must differ, got {0:?} twice")]
    SameStation(String),
    #[error("station {station:?} has only {remaining} unconsumed bits, {requested} requested")]
    KeyDepletion {
        station: String,
        remaining: usize,
        requested: usize,
    },
}

/// Bitwise parity of two equal-length keys.
pub fn xor_keys(a: &[bool], b: &[bool]) -> Result<Vec<bool>, RelayError> {
    if a.len() != b.len() {
        return Err(RelayError::LengthMismatch {
            a: a.len(),
            b: b.len(),
        });
    }
    Ok(a.iter().zip(b).map(|(x, y)| x ^ y).collect())
}

/// Key material held for one station.
#[derive(Debug, Clone, Default, PartialEq)]
struct StationKey {
    bits: Vec<bool>,
    consumed: usize,
}

/// Satellite-side store of per-station key material.
///
/// Bits are consumed front-to-back and never reused: the consumed offset
/// only advances, and `consumed + remaining` always equals the total
/// deposited.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrustedNodeStore {
    stations: BTreeMap<String, StationKey>,
}

impl TrustedNodeStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends fresh key material for a station.
    pub fn deposit(&mut self, station: &str, bits: impl IntoIterator<Item = bool>) {
        self.stations
            .entry(station.to_string())
            .or_default()
            .bits
            .extend(bits);
    }

    /// Unconsumed bits held for a station.
    pub fn remaining(&self, station: &str) -> Result<usize, RelayError> {
        let k = self.station(station)?;
        Ok(k.bits.len() - k.consumed)
    }

    /// Bits already consumed for a station.
    pub fn consumed(&self, station: &str) -> Result<usize, RelayError> {
        Ok(self.station(station)?.consumed)
    }

    /// Total bits ever deposited for a station.
    pub fn deposited(&self, station: &str) -> Result<usize, RelayError> {
        Ok(self.station(station)?.bits.len())
    }

    /// Consumes `length` fresh bits from each station's material and returns
    /// the public parity announcement `K_A xor K_B`.
    ///
    /// On insufficient material nothing is consumed and the error names the
    /// station with the least remaining key.
    pub fn establish_shared(
        &mut self,
        station_a: &str,
        station_b: &str,
        length: usize,
    ) -> Result<Vec<bool>, RelayError> {
        if station_a == station_b {
            return Err(RelayError::SameStation(station_a.to_string()));
        }
        let remaining_a = self.remaining(station_a)?;
        let remaining_b = self.remaining(station_b)?;
        let (limiting, remaining) = if remaining_a <= remaining_b {
            (station_a, remaining_a)
        } else {
            (station_b, remaining_b)
        };
        if remaining < length {
            return Err(RelayError::KeyDepletion {
                station: limiting.to_string(),
                remaining,
                requested: length,
            });
        }

        let slice_a = self.take(station_a, length);
        let slice_b = self.take(station_b, length);
        xor_keys(&slice_a, &slice_b)
    }

    fn station(&self, station: &str) -> Result<&StationKey, RelayError> {
        self.stations
            .get(station)
            .ok_or_else(|| RelayError::UnknownStation(station.to_string()))
    }

    /// Advances a station's offset; the caller has already checked bounds.
    fn take(&mut self, station: &str, length: usize) -> Vec<bool> {
        let k = self
            .stations
            .get_mut(station)
            .expect("checked by establish_shared");
        let slice = k.bits[k.consumed..k.consumed + length].to_vec();
        k.consumed += length;
        slice
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::{subsystem_rng, Stream};
    use rand::Rng;

    fn bits(s: &str) -> Vec<bool> {
        s.chars().map(|c| c == '1').collect()
    }

    fn random_key(seed: u64, n: usize) -> Vec<bool> {
        let mut rng = subsystem_rng(seed, Stream::Relay);
        (0..n).map(|_| rng.random()).collect()
    }

    // --- xor ---

    #[test]
    fn xor_hand_example() {
        assert_eq!(
            xor_keys(&bits("0101"), &bits("0011")).unwrap(),
            bits("0110")
        );
    }

    #[test]
    fn xor_self_is_zero_and_xor_is_involution() {
        let k_a = random_key(1, 256);
        let k_b = random_key(2, 256);
        assert_eq!(xor_keys(&k_a, &k_a).unwrap(), vec![false; 256]);
        let parity = xor_keys(&k_a, &k_b).unwrap();
        assert_eq!(xor_keys(&parity, &k_b).unwrap(), k_a, "B must recover K_A");
        assert_eq!(xor_keys(&parity, &k_a).unwrap(), k_b, "A must recover K_B");
    }

    #[test]
    fn xor_rejects_length_mismatch() {
        assert_eq!(
            xor_keys(&bits("01"), &bits("011")).unwrap_err(),
            RelayError::LengthMismatch { a: 2, b: 3 }
        );
    }

    // --- store bookkeeping ---

    #[test]
    fn offsets_advance_and_deplete() {
        let mut store = TrustedNodeStore::new();
        store.deposit("xinglong", random_key(3, 1000));
        store.deposit("graz", random_key(4, 1000));

        store.establish_shared("xinglong", "graz", 256).unwrap();
        assert_eq!(store.consumed("xinglong").unwrap(), 256);
        assert_eq!(store.remaining("graz").unwrap(), 744);

        let err = store.establish_shared("xinglong", "graz", 800).unwrap_err();
        assert_eq!(
            err,
            RelayError::KeyDepletion {
                station: "xinglong".to_string(),
                remaining: 744,
                requested: 800
            }
        );
        // A failed request consumes nothing.
        assert_eq!(store.remaining("xinglong").unwrap(), 744);
        assert_eq!(store.remaining("graz").unwrap(), 744);
    }

    #[test]
    fn material_is_conserved_and_never_reused() {
        let mut store = TrustedNodeStore::new();
        let key = random_key(5, 500);
        store.deposit("a", key.clone());
        store.deposit("b", random_key(6, 500));

        let first = store.establish_shared("a", "b", 200).unwrap();
        let second = store.establish_shared("a", "b", 200).unwrap();
        assert_ne!(first, second, "fresh bits each time");
        for station in ["a", "b"] {
            assert_eq!(
                store.consumed(station).unwrap() + store.remaining(station).unwrap(),
                store.deposited(station).unwrap()
            );
        }
        // The parity really used consecutive fresh slices of A's key.
        let k_b_first: Vec<bool> = (0..200).map(|i| first[i] ^ key[i]).collect();
        let k_b_second: Vec<bool> = (0..200).map(|i| second[i] ^ key[200 + i]).collect();
        assert_eq!(store.remaining("b").unwrap(), 100);
        assert_eq!(k_b_first.len() + k_b_second.len(), 400);
    }

    #[test]
    fn depletion_names_the_limiting_station() {
        let mut store = TrustedNodeStore::new();
        store.deposit("rich", random_key(7, 1000));
        store.deposit("poor", random_key(8, 10));
        let err = store.establish_shared("rich", "poor", 100).unwrap_err();
        assert_eq!(
            err,
            RelayError::KeyDepletion {
                station: "poor".to_string(),
                remaining: 10,
                requested: 100
            }
        );
    }

    #[test]
    fn unknown_and_duplicate_stations_are_rejected() {
        let mut store = TrustedNodeStore::new();
        store.deposit("a", random_key(9, 10));
        assert_eq!(
            store.establish_shared("a", "ghost", 5).unwrap_err(),
            RelayError::UnknownStation("ghost".to_string())
        );
        assert_eq!(
            store.establish_shared("a", "a", 5).unwrap_err(),
            RelayError::SameStation("a".to_string())
        );
    }

    // --- statistical blinding ---

    #[test]
    fn parity_of_independent_keys_is_balanced() {
        // Monobit frequency test: the announcement leaks no bias.
        let n = 100_000;
        let mut store = TrustedNodeStore::new();
        store.deposit("a", random_key(10, n));
        store.deposit("b", random_key(11, n));
        let parity = store.establish_shared("a", "b", n).unwrap();
        let ones = parity.iter().filter(|&&b| b).count() as f64;
        assert!(
            (ones / n as f64 - 0.5).abs() < 5e-3,
            "ones fraction {} outside 0.5 +/- 5e-3",
            ones / n as f64
        );
    }
}
