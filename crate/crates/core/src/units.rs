//! Optical-power units shared by every model in this crate.
//!
//! Link budgets are accumulated in decibels and converted to a linear
//! transmittance exactly once, at the point where photon rates are computed.
//! The two directions are
//!
//! ```text
//! eta  = 10^(-L/10)          (decibels -> transmittance)
//! L    = -10 * log10(eta)    (transmittance -> decibels)
//! ```
//!
//! # Example
//!
//! ```
//! use satqkd_core::units::{db_to_transmittance, Decibels};
//!
//! let eta = db_to_transmittance(Decibels::new(3.0103).unwrap()).unwrap();
//! assert!((eta.value() - 0.5).abs() < 1e-4);
//! ```

use thiserror::Error;

/// Shortest wavelength accepted for a configured scenario, metres (deep UV
/// limit well below every practical QKD band).
pub const MIN_WAVELENGTH_M: f64 = 300e-9;

/// Longest wavelength accepted for a configured scenario, metres.
pub const MAX_WAVELENGTH_M: f64 = 2000e-9;

/// Errors produced by unit constructors and conversions.
#[derive(Debug, Error, PartialEq)]
pub enum UnitsError {
    /// A value that must be finite was NaN or infinite.
    #[error("{name} must be finite, got {value}")]
    NonFinite { name: &'static str, value: f64 },
    /// A loss in dB was negative where only attenuation makes sense.
    #[error("loss must be >= 0 dB, got {0} dB")]
    NegativeLoss(f64),
    /// A transmittance outside the physical [0, 1] interval.
    #[error("transmittance must lie in [0, 1], got {0}")]
    TransmittanceOutOfRange(f64),
    /// A transmittance of exactly zero has no finite dB representation.
    #[error("transmittance of 0 corresponds to infinite loss")]
    TotalBlockage,
    /// A wavelength outside the supported optical band.
    #[error("wavelength {0} m outside supported band [{MIN_WAVELENGTH_M}, {MAX_WAVELENGTH_M}] m")]
    WavelengthOutOfBand(f64),
}

// ---------------------------------------------------------------------------
// Newtypes
// ---------------------------------------------------------------------------

/// A finite decibel quantity. Positive values attenuate; loss breakdowns
/// additionally guarantee non-negativity at the point of construction.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Decibels(f64);

impl Decibels {
    /// Wraps a finite dB value.
    pub fn new(db: f64) -> Result<Self, UnitsError> {
        if !db.is_finite() {
            return Err(UnitsError::NonFinite {
                name: "decibels",
                value: db,
            });
        }
        Ok(Self(db))
    }

    /// The raw dB value.
    pub fn value(self) -> f64 {
        self.0
    }
}

impl std::fmt::Display for Decibels {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} dB", self.0)
    }
}

/// A linear power transmittance in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Transmittance(f64);

impl Transmittance {
    /// Wraps a transmittance, rejecting values outside [0, 1] (and NaN).
    pub fn new(eta: f64) -> Result<Self, UnitsError> {
        if !eta.is_finite() {
            return Err(UnitsError::NonFinite {
                name: "transmittance",
                value: eta,
            });
        }
        if !(0.0..=1.0).contains(&eta) {
            return Err(UnitsError::TransmittanceOutOfRange(eta));
        }
        Ok(Self(eta))
    }

    /// The raw linear value.
    pub fn value(self) -> f64 {
        self.0
    }
}

/// An optical wavelength restricted to the band this toolkit models.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Wavelength(f64);

impl Wavelength {
    /// Wraps a wavelength in metres, rejecting values outside
    /// [`MIN_WAVELENGTH_M`], [`MAX_WAVELENGTH_M`].
    pub fn new(metres: f64) -> Result<Self, UnitsError> {
        if !metres.is_finite() {
            return Err(UnitsError::NonFinite {
                name: "wavelength",
                value: metres,
            });
        }
        if !(MIN_WAVELENGTH_M..=MAX_WAVELENGTH_M).contains(&metres) {
            return Err(UnitsError::WavelengthOutOfBand(metres));
        }
        Ok(Self(metres))
    }

    /// The wavelength in metres.
    pub fn metres(self) -> f64 {
        self.0
    }
}

// ---------------------------------------------------------------------------
// Conversions
// ---------------------------------------------------------------------------

/// Converts an attenuation in dB to a linear transmittance, `10^(-L/10)`.
///
/// Only non-negative losses are accepted: a negative loss would denote gain,
/// which has no place in a passive link budget.
pub fn db_to_transmittance(loss: Decibels) -> Result<Transmittance, UnitsError> {
    if loss.value() < 0.0 {
        return Err(UnitsError::NegativeLoss(loss.value()));
    }
    Transmittance::new(10f64.powf(-loss.value() / 10.0))
}

/// Converts a linear transmittance to an attenuation in dB, `-10*log10(eta)`.
///
/// A transmittance of exactly zero signals total blockage and is rejected;
/// callers treat that case as infinite loss.
pub fn transmittance_to_db(eta: Transmittance) -> Result<Decibels, UnitsError> {
    if eta.value() == 0.0 {
        return Err(UnitsError::TotalBlockage);
    }
    Decibels::new(-10.0 * eta.value().log10())
}

/// Unchecked dB -> linear helper for internal hot paths where the loss is
/// already validated non-negative.
pub(crate) fn db_to_eta(loss_db: f64) -> f64 {
    10f64.powf(-loss_db / 10.0)
}
