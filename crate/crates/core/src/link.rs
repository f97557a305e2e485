//! Free-space optical link budgets for satellite QKD geometries.
//!
//! The budget is assembled from four loss mechanisms, each returned in dB so
//! that scenarios compose by addition:
//!
//! * **Diffraction** - a transmit aperture `D_tx` produces a far-field beam
//!   of full-angle divergence `theta = k_div * lambda / D_tx`; at range `L`
//!   the beam diameter is `W = theta * L` and a receive aperture `D_rx`
//!   captures `min(1, (D_rx / W)^2)` of the power.
//! * **Atmosphere** - a configured zenith attenuation `A_z` scaled by the
//!   airmass `1 / sin(elevation)`, capped at 38 airmasses near the horizon.
//!   Space-to-space paths see no atmosphere.
//! * **Turbulence** - uplinks pay a flat configured penalty (beam wander and
//!   scintillation from turbulence encountered at the start of the path);
//!   downlinks traverse turbulence only in the last few kilometres and carry
//!   a configurable residual that defaults to zero.
//! * **Pointing** - Gaussian jitter of rms `sigma` against a beam of
//!   divergence `theta` costs `10*log10(1 + k_p*(2*sigma/theta)^2)`. On an
//!   uplink the effective divergence is widened by turbulence to
//!   `lambda / min(D_tx, r0)` (Fried parameter `r0`), which is why large
//!   ground apertures buy little on uplinks.
//!
//! Static optics losses of the two terminals are added on top. A
//! retroreflected double pass is the exact sum of its up and down legs.

use crate::units::{UnitsError, Wavelength};
use thiserror::Error;

// ---------------------------------------------------------------------------
// Constants
// ---------------------------------------------------------------------------

/// Airmass cap applied as elevation approaches the horizon.
pub const MAX_AIRMASS: f64 = 38.0;

/// Default divergence constant `k_div` (ideal flat-top aperture).
pub const DEFAULT_DIVERGENCE_FACTOR: f64 = 1.0;

/// Default pointing constant `k_p`, calibrated so that 2 urad of jitter on a
/// 20 cm transmitter at 785 nm costs about 2.9 dB on a downlink while the
/// same jitter stays under 1 dB on a turbulence-broadened uplink.
pub const DEFAULT_POINTING_CONSTANT: f64 = 0.9;

/// Default Fried parameter `r0` in metres (moderate astronomical seeing).
pub const DEFAULT_FRIED_PARAMETER_M: f64 = 0.1;

/// Default one-way zenith attenuation of a clear atmosphere, dB.
pub const DEFAULT_ZENITH_ATTENUATION_DB: f64 = 3.0;

/// Default flat uplink turbulence penalty, dB.
pub const DEFAULT_UPLINK_TURBULENCE_DB: f64 = 21.0;

/// Errors for scenario validation and budget evaluation.
#[derive(Debug, Error, PartialEq)]
pub enum LinkError {
    #[error(transparent)]
    Units(#[from] UnitsError),
    #[error("{name} must be finite and > 0, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("{name} must be finite and >= 0, got {value}")]
    Negative { name: &'static str, value: f64 },
    #[error("elevation must lie in (0, 90] degrees for ground-terminated links, got {0}")]
    ElevationOutOfRange(f64),
    #[error("a ground-terminated link requires an elevation")]
    MissingElevation,
}

// ---------------------------------------------------------------------------
// Scenario types
// ---------------------------------------------------------------------------

/// One end of an optical link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpticalTerminal {
    /// Clear aperture diameter, metres.
    pub aperture_m: f64,
    /// Pointing jitter, radians rms.
    pub pointing_jitter_rad: f64,
    /// Static optics loss of this terminal (telescope, analyzer, coupling), dB.
    pub optics_loss_db: f64,
}

impl OpticalTerminal {
    /// Validates the terminal's fields.
    pub fn validate(&self) -> Result<(), LinkError> {
        if !self.aperture_m.is_finite() || self.aperture_m <= 0.0 {
            return Err(LinkError::NonPositive {
                name: "aperture",
                value: self.aperture_m,
            });
        }
        if !self.pointing_jitter_rad.is_finite() || self.pointing_jitter_rad < 0.0 {
            return Err(LinkError::Negative {
                name: "pointing_jitter",
                value: self.pointing_jitter_rad,
            });
        }
        if !self.optics_loss_db.is_finite() || self.optics_loss_db < 0.0 {
            return Err(LinkError::Negative {
                name: "optics_loss",
                value: self.optics_loss_db,
            });
        }
        Ok(())
    }
}

/// Direction of the path with respect to the atmosphere.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkKind {
    /// Space to ground: transmitter above the atmosphere.
    Downlink,
    /// Ground to space: transmitter below the atmosphere.
    Uplink,
    /// Space to space: no atmosphere on the path.
    Intersatellite,
    /// Ground -> retroreflector -> ground: the exact sum of an uplink leg to
    /// the reflector and a downlink leg back.
    DoublePass,
}

impl LinkKind {
    /// Parses the config-file spelling of the kind.
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "downlink" => Some(Self::Downlink),
            "uplink" => Some(Self::Uplink),
            "intersatellite" => Some(Self::Intersatellite),
            "double_pass" => Some(Self::DoublePass),
            _ => None,
        }
    }

    /// The config-file spelling.
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Downlink => "downlink",
            Self::Uplink => "uplink",
            Self::Intersatellite => "intersatellite",
            Self::DoublePass => "double_pass",
        }
    }
}

/// A fully specified link geometry plus the model calibration constants.
///
/// For `DoublePass`, `tx` is the ground terminal and `rx` the satellite
/// retroreflector; the up and down legs are derived from those two terminals.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkScenario {
    pub kind: LinkKind,
    pub tx: OpticalTerminal,
    pub rx: OpticalTerminal,
    pub wavelength: Wavelength,
    /// One-way path length, metres.
    pub range_m: f64,
    /// Elevation above the horizon in degrees; required when either end is on
    /// the ground, ignored for intersatellite paths.
    pub elevation_deg: Option<f64>,
    /// One-way zenith attenuation of the atmosphere, dB.
    pub zenith_attenuation_db: f64,
    /// Flat turbulence penalty charged to uplinks, dB.
    pub uplink_turbulence_penalty_db: f64,
    /// Residual turbulence charged to downlinks, dB.
    pub downlink_turbulence_db: f64,
    /// Divergence constant `k_div`.
    pub divergence_factor: f64,
    /// Pointing constant `k_p`.
    pub pointing_constant: f64,
    /// Fried parameter `r0` bounding the useful uplink transmit aperture, metres.
    pub fried_parameter_m: f64,
}

impl Default for LinkScenario {
    /// The calibrated reference downlink: a 30 cm satellite transmitter to a
    /// 1 m ground telescope at 800 nm, 500 km slant range at zenith, with the
    /// default atmosphere, turbulence and pointing constants.
    fn default() -> Self {
        Self {
            kind: LinkKind::Downlink,
            tx: OpticalTerminal {
                aperture_m: 0.3,
                pointing_jitter_rad: 1e-6,
                optics_loss_db: 0.0,
            },
            rx: OpticalTerminal {
                aperture_m: 1.0,
                pointing_jitter_rad: 1e-6,
                optics_loss_db: 0.0,
            },
            wavelength: Wavelength::new(800e-9).expect("default wavelength is in band"),
            range_m: 500e3,
            elevation_deg: Some(90.0),
            zenith_attenuation_db: DEFAULT_ZENITH_ATTENUATION_DB,
            uplink_turbulence_penalty_db: DEFAULT_UPLINK_TURBULENCE_DB,
            downlink_turbulence_db: 0.0,
            divergence_factor: DEFAULT_DIVERGENCE_FACTOR,
            pointing_constant: DEFAULT_POINTING_CONSTANT,
            fried_parameter_m: DEFAULT_FRIED_PARAMETER_M,
        }
    }
}

impl LinkScenario {
    /// Validates every field of the scenario.
    pub fn validate(&self) -> Result<(), LinkError> {
        self.tx.validate()?;
        self.rx.validate()?;
        if !self.range_m.is_finite() || self.range_m <= 0.0 {
            return Err(LinkError::NonPositive {
                name: "range",
                value: self.range_m,
            });
        }
        for (name, v) in [
            ("zenith_attenuation_db", self.zenith_attenuation_db),
            (
                "uplink_turbulence_penalty_db",
                self.uplink_turbulence_penalty_db,
            ),
            ("downlink_turbulence_db", self.downlink_turbulence_db),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(LinkError::Negative { name, value: v });
            }
        }
        for (name, v) in [
            ("divergence_factor", self.divergence_factor),
            ("pointing_constant", self.pointing_constant),
            ("fried_parameter_m", self.fried_parameter_m),
        ] {
            if !v.is_finite() || v <= 0.0 {
                return Err(LinkError::NonPositive { name, value: v });
            }
        }
        if self.kind != LinkKind::Intersatellite {
            let e = self.elevation_deg.ok_or(LinkError::MissingElevation)?;
            if !e.is_finite() || e <= 0.0 || e > 90.0 {
                return Err(LinkError::ElevationOutOfRange(e));
            }
        }
        Ok(())
    }

    /// Returns a copy with range (and, when given, elevation) replaced;
    /// used when sweeping a scenario template along a pass.
    pub fn at_geometry(&self, range_m: f64, elevation_deg: Option<f64>) -> Self {
        let mut s = self.clone();
        s.range_m = range_m;
        if elevation_deg.is_some() {
            s.elevation_deg = elevation_deg;
        }
        s
    }
}

/// Per-mechanism losses of one evaluated scenario, all in dB.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossBreakdown {
    pub diffraction_db: f64,
    pub atmospheric_db: f64,
    pub turbulence_db: f64,
    pub pointing_db: f64,
    pub optics_db: f64,
    /// Sum of the five components above.
    pub total_db: f64,
}

impl LossBreakdown {
    fn from_components(
        diffraction_db: f64,
        atmospheric_db: f64,
        turbulence_db: f64,
        pointing_db: f64,
        optics_db: f64,
    ) -> Self {
        Self {
            diffraction_db,
            atmospheric_db,
            turbulence_db,
            pointing_db,
            optics_db,
            total_db: diffraction_db + atmospheric_db + turbulence_db + pointing_db + optics_db,
        }
    }

    fn sum(a: &Self, b: &Self) -> Self {
        Self::from_components(
            a.diffraction_db + b.diffraction_db,
            a.atmospheric_db + b.atmospheric_db,
            a.turbulence_db + b.turbulence_db,
            a.pointing_db + b.pointing_db,
            a.optics_db + b.optics_db,
        )
    }
}

// ---------------------------------------------------------------------------
// Loss mechanisms
// ---------------------------------------------------------------------------

/// Diffraction (geometric beam-spread) loss in dB.
///
/// `theta = k_div * lambda / d_tx`, beam diameter `W = theta * range`, and
/// the captured fraction is `min(1, (d_rx / W)^2)` - zero loss whenever the
/// receive aperture swallows the whole beam.
pub fn diffraction_loss(
    tx_aperture_m: f64,
    rx_aperture_m: f64,
    range_m: f64,
    wavelength: Wavelength,
    divergence_factor: f64,
) -> f64 {
    let theta = divergence_factor * wavelength.metres() / tx_aperture_m;
    let beam_diameter = theta * range_m;
    let captured = (rx_aperture_m / beam_diameter).powi(2).min(1.0);
    -10.0 * captured.log10()
}

/// Atmospheric attenuation in dB for a ground-terminated path at the given
/// elevation: zenith attenuation times the airmass `1 / sin(elevation)`,
/// capped at [`MAX_AIRMASS`].
pub fn atmospheric_loss(zenith_attenuation_db: f64, elevation_deg: f64) -> f64 {
    let airmass = (1.0 / elevation_deg.to_radians().sin()).min(MAX_AIRMASS);
    zenith_attenuation_db * airmass
}

/// Turbulence penalty in dB by link direction.
pub fn turbulence_penalty(
    kind: LinkKind,
    uplink_penalty_db: f64,
    downlink_residual_db: f64,
) -> f64 {
    match kind {
        LinkKind::Uplink => uplink_penalty_db,
        LinkKind::Downlink => downlink_residual_db,
        LinkKind::Intersatellite => 0.0,
        // Double passes are charged per leg; see total_link_loss.
        LinkKind::DoublePass => uplink_penalty_db + downlink_residual_db,
    }
}

/// Mean pointing loss in dB for Gaussian jitter of rms `sigma` against a
/// beam of full-angle divergence `theta`:
/// `10*log10(1 + k_p * (2*sigma/theta)^2)`.
pub fn pointing_loss(jitter_rms_rad: f64, divergence_rad: f64, pointing_constant: f64) -> f64 {
    let ratio = 2.0 * jitter_rms_rad / divergence_rad;
    10.0 * (1.0 + pointing_constant * ratio * ratio).log10()
}

/// The beam divergence seen by the pointing model. Uplinks are broadened by
/// turbulence: apertures larger than the Fried parameter `r0` do not narrow
/// the beam any further, so the effective divergence is
/// `k_div * lambda / min(d_tx, r0)`.
pub fn effective_pointing_divergence(
    kind: LinkKind,
    tx_aperture_m: f64,
    wavelength: Wavelength,
    divergence_factor: f64,
    fried_parameter_m: f64,
) -> f64 {
    let d_eff = match kind {
        LinkKind::Uplink | LinkKind::DoublePass => tx_aperture_m.min(fried_parameter_m),
        LinkKind::Downlink | LinkKind::Intersatellite => tx_aperture_m,
    };
    divergence_factor * wavelength.metres() / d_eff
}

// ---------------------------------------------------------------------------
// Scenario evaluation
// ---------------------------------------------------------------------------

/// Evaluates the full loss budget of a scenario.
///
/// Double passes are decomposed into an uplink leg to the retroreflector and
/// a downlink leg back; the reported breakdown is the component-wise sum of
/// the two legs, so `total_db` is exactly `up.total_db + down.total_db`.
pub fn total_link_loss(scenario: &LinkScenario) -> Result<LossBreakdown, LinkError> {
    scenario.validate()?;
    match scenario.kind {
        LinkKind::DoublePass => {
            let up = LinkScenario {
                kind: LinkKind::Uplink,
                ..scenario.clone()
            };
            let down = LinkScenario {
                kind: LinkKind::Downlink,
                tx: scenario.rx,
                rx: scenario.tx,
                ..scenario.clone()
            };
            Ok(LossBreakdown::sum(
                &single_leg_loss(&up),
                &single_leg_loss(&down),
            ))
        }
        _ => Ok(single_leg_loss(scenario)),
    }
}

/// One leg of an already validated scenario (kind != DoublePass).
fn single_leg_loss(scenario: &LinkScenario) -> LossBreakdown {
    let diffraction = diffraction_loss(
        scenario.tx.aperture_m,
        scenario.rx.aperture_m,
        scenario.range_m,
        scenario.wavelength,
        scenario.divergence_factor,
    );
    let atmospheric = match scenario.kind {
        LinkKind::Intersatellite => 0.0,
        // validate() guarantees the elevation is present for ground links.
        _ => atmospheric_loss(
            scenario.zenith_attenuation_db,
            scenario.elevation_deg.unwrap(),
        ),
    };
    let turbulence = turbulence_penalty(
        scenario.kind,
        scenario.uplink_turbulence_penalty_db,
        scenario.downlink_turbulence_db,
    );
    let pointing = pointing_loss(
        scenario.tx.pointing_jitter_rad,
        effective_pointing_divergence(
            scenario.kind,
            scenario.tx.aperture_m,
            scenario.wavelength,
            scenario.divergence_factor,
            scenario.fried_parameter_m,
        ),
        scenario.pointing_constant,
    );
    let optics = scenario.tx.optics_loss_db + scenario.rx.optics_loss_db;
    LossBreakdown::from_components(diffraction, atmospheric, turbulence, pointing, optics)
}

// ---------------------------------------------------------------------------
// Reference scenario table
// ---------------------------------------------------------------------------

/// A named reference scenario with its published total-loss figure.
#[derive(Debug, Clone)]
pub struct ReferenceScenario {
    pub name: &'static str,
    pub scenario: LinkScenario,
    /// Published total loss for this geometry, dB.
    pub reference_db: f64,
}

/// The eight canonical pairwise geometries (1 m ground stations, 30 cm
/// satellite terminals, 800 nm) with published loss figures, used to check
/// the calibration of the whole budget model.
pub fn table1_scenarios() -> Vec<ReferenceScenario> {
    const GROUND: OpticalTerminal = OpticalTerminal {
        aperture_m: 1.0,
        pointing_jitter_rad: 1e-6,
        optics_loss_db: 0.0,
    };
    const SAT: OpticalTerminal = OpticalTerminal {
        aperture_m: 0.3,
        pointing_jitter_rad: 1e-6,
        optics_loss_db: 0.0,
    };

    let base = |kind, tx, rx, range_km: f64| LinkScenario {
        kind,
        tx,
        rx,
        wavelength: Wavelength::new(800e-9).unwrap(),
        range_m: range_km * 1e3,
        elevation_deg: Some(90.0),
        zenith_attenuation_db: DEFAULT_ZENITH_ATTENUATION_DB,
        uplink_turbulence_penalty_db: DEFAULT_UPLINK_TURBULENCE_DB,
        downlink_turbulence_db: 0.0,
        divergence_factor: DEFAULT_DIVERGENCE_FACTOR,
        pointing_constant: DEFAULT_POINTING_CONSTANT,
        fried_parameter_m: DEFAULT_FRIED_PARAMETER_M,
    };

    use LinkKind::*;
    vec![
        ReferenceScenario {
            name: "ground->LEO",
            scenario: base(Uplink, GROUND, SAT, 500.0),
            reference_db: 27.4,
        },
        ReferenceScenario {
            name: "ground->GEO",
            scenario: base(Uplink, GROUND, SAT, 36000.0),
            reference_db: 64.5,
        },
        ReferenceScenario {
            name: "LEO->ground",
            scenario: base(Downlink, SAT, GROUND, 500.0),
            reference_db: 6.4,
        },
        ReferenceScenario {
            name: "LEO->LEO",
            scenario: base(Intersatellite, SAT, SAT, 2000.0),
            reference_db: 28.5,
        },
        ReferenceScenario {
            name: "LEO->GEO",
            scenario: base(Intersatellite, SAT, SAT, 35000.0),
            reference_db: 52.9,
        },
        ReferenceScenario {
            name: "GEO->ground",
            scenario: base(Downlink, SAT, GROUND, 36000.0),
            reference_db: 43.6,
        },
        ReferenceScenario {
            name: "GEO->LEO",
            scenario: base(Intersatellite, SAT, SAT, 35000.0),
            reference_db: 52.9,
        },
        ReferenceScenario {
            name: "GEO->GEO",
            scenario: base(Intersatellite, SAT, SAT, 40000.0),
            reference_db: 53.9,
        },
    ]
}
