//! Scenario configuration: a flat INI-like text format with unit-suffixed
//! quantities, strict schema validation, and a canonical echo that
//! reproduces every run bit-exactly.
//!
//! # Format
//!
//! ```text
//! # comment lines start with '#'
//! [coincidence]
//! window_ns = 2              # bare numbers use the unit named by the key
//! loss_arm = b
//!
//! [sweep]
//! temperatures_K = 250:5:300  # inclusive range lo:step:hi
//! loss_db = 0, 3.2, 6.4       # or an explicit list
//! ```
//!
//! Values are `number [unit]` with the unit optional; a bare number is read
//! in the canonical unit embedded in the key name (`window_ns = 2` is 2 ns,
//! `window_ns = 0.002 us` the same). Unknown sections, unknown keys and
//! duplicates are rejected - a config either means exactly what it says or
//! it does not parse.
//!
//! # Echo and reproducibility
//!
//! Resolution injects schema defaults *as raw strings* into the parsed
//! table, and [`ScenarioConfig::echo`] serializes the table back in
//! canonical order. The echo is a fixed point (`parse(echo(c))` echoes to
//! the same bytes) and contains every value a run used, so re-running a
//! tool against the echoed config reproduces its outputs byte-for-byte.

use crate::detector::DetectorParams;
use crate::keyrate::OverheadParams;
use crate::link::{LinkKind, LinkScenario, OpticalTerminal};
use crate::qber::{
    BackgroundLight, Bbm92Setup, EntangledSourceParams, SweepLossArm, WcpSourceParams,
};
use crate::units::Wavelength;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use thiserror::Error;

/// Longest list a range expression may expand to.
pub const MAX_LIST_LEN: usize = 100_000;

/// Errors raised while parsing or resolving a configuration.
#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value` or `[section]`, got {content:?}")]
    Malformed { line: usize, content: String },
    #[error("line {line}: key {key:?} appears before any [section] header")]
    KeyOutsideSection { line: usize, key: String },
    #[error("line {line}: unknown section {name:?}")]
    UnknownSection { line: usize, name: String },
    #[error("line {line}: duplicate section {name:?}")]
    DuplicateSection { line: usize, name: String },
    #[error("line {line}: unknown key {key:?} in section [{section}]")]
    UnknownKey {
        line: usize,
        section: String,
        key: String,
    },
    #[error("line {line}: duplicate key {key:?} in section [{section}]")]
    DuplicateKey {
        line: usize,
        section: String,
        key: String,
    },
    #[error("missing required section [{0}]")]
    MissingSection(&'static str),
    #[error("missing required key {key:?} in section [{section}]")]
    MissingKey {
        section: &'static str,
        key: &'static str,
    },
    #[error("invalid value for [{section}] {key}: {reason}")]
    InvalidValue {
        section: &'static str,
        key: &'static str,
        reason: String,
    },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

// ---------------------------------------------------------------------------
// Units
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Dimension {
    Length,
    Time,
    Rate,
    Angle,
    Temperature,
    Loss,
}

/// Factor from `unit` to the dimension's pivot (m, s, cps, rad, K, dB).
fn unit_factor(dim: Dimension, unit: &str) -> Option<f64> {
    let f = match (dim, unit) {
        (Dimension::Length, "m") => 1.0,
        (Dimension::Length, "km") => 1e3,
        (Dimension::Length, "cm") => 1e-2,
        (Dimension::Length, "mm") => 1e-3,
        (Dimension::Length, "um") => 1e-6,
        (Dimension::Length, "nm") => 1e-9,
        (Dimension::Time, "s") => 1.0,
        (Dimension::Time, "ms") => 1e-3,
        (Dimension::Time, "us") => 1e-6,
        (Dimension::Time, "ns") => 1e-9,
        (Dimension::Rate, "cps") | (Dimension::Rate, "Hz") => 1.0,
        (Dimension::Rate, "kcps") | (Dimension::Rate, "kHz") => 1e3,
        (Dimension::Rate, "Mcps") | (Dimension::Rate, "MHz") => 1e6,
        (Dimension::Rate, "GHz") => 1e9,
        (Dimension::Angle, "rad") => 1.0,
        (Dimension::Angle, "mrad") => 1e-3,
        (Dimension::Angle, "urad") => 1e-6,
        (Dimension::Angle, "deg") => std::f64::consts::PI / 180.0,
        (Dimension::Temperature, "K") => 1.0,
        (Dimension::Loss, "dB") => 1.0,
        _ => return None,
    };
    Some(f)
}

fn parse_f64(token: &str) -> Result<f64, String> {
    let v: f64 = token
        .parse()
        .map_err(|_| format!("not a number: {token:?}"))?;
    if !v.is_finite() {
        return Err(format!("not finite: {token:?}"));
    }
    Ok(v)
}

/// Parses `number [unit]` into the key's target unit. A bare number is read
/// in `bare`; a value already in `target` passes through without arithmetic,
/// so exact inputs stay exact.
fn parse_quantity(raw: &str, dim: Dimension, bare: &str, target: &str) -> Result<f64, String> {
    let mut parts = raw.split_whitespace();
    let number = parts.next().ok_or("empty value")?;
    let unit = parts.next().unwrap_or(bare);
    if parts.next().is_some() {
        return Err(format!("expected `number [unit]`, got {raw:?}"));
    }
    let n = parse_f64(number)?;
    if unit == target {
        return Ok(n);
    }
    let f_unit = unit_factor(dim, unit).ok_or_else(|| format!("unknown unit {unit:?}"))?;
    let f_target = unit_factor(dim, target).expect("schema target units are valid");
    Ok(n * f_unit / f_target)
}

/// Parses a list (`a, b, c`), a range (`lo:step:hi`, bare-unit numbers,
/// inclusive of `hi`), or a single quantity.
fn parse_list(raw: &str, dim: Dimension, bare: &str, target: &str) -> Result<Vec<f64>, String> {
    if raw.contains(':') {
        let parts: Vec<&str> = raw.split(':').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(format!("range must be lo:step:hi, got {raw:?}"));
        }
        let lo = parse_f64(parts[0])?;
        let step = parse_f64(parts[1])?;
        let hi = parse_f64(parts[2])?;
        if step <= 0.0 {
            return Err(format!("range step must be > 0, got {step}"));
        }
        if hi < lo {
            return Err(format!("range end {hi} below start {lo}"));
        }
        let n = ((hi - lo) / step + 1e-9).floor();
        if !(0.0..=MAX_LIST_LEN as f64).contains(&n) {
            return Err(format!("range expands to more than {MAX_LIST_LEN} values"));
        }
        let scale = if bare == target {
            1.0
        } else {
            unit_factor(dim, bare).expect("schema bare units are valid")
                / unit_factor(dim, target).expect("schema target units are valid")
        };
        return Ok((0..=n as u64)
            .map(|i| (lo + i as f64 * step) * scale)
            .collect());
    }
    raw.split(',')
        .map(|item| parse_quantity(item.trim(), dim, bare, target))
        .collect()
}

// ---------------------------------------------------------------------------
// Schema
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
enum ValueKind {
    /// Bare finite number, no unit allowed.
    Number,
    /// Unsigned integer (seeds, counts).
    UInt,
    /// `number [unit]`; bare numbers in `bare`, result in `target`.
    Quantity {
        dim: Dimension,
        bare: &'static str,
        target: &'static str,
    },
    /// List or range of quantities.
    List {
        dim: Dimension,
        bare: &'static str,
        target: &'static str,
    },
    /// One of a fixed token set.
    Token(&'static [&'static str]),
    /// Free identifier (station names): `[A-Za-z0-9_-]+`.
    Name,
}

struct KeySpec {
    name: &'static str,
    kind: ValueKind,
    /// Raw default injected at resolution; `None` marks required or
    /// optional-without-default keys.
    default: Option<&'static str>,
}

struct SectionSpec {
    name: &'static str,
    keys: &'static [KeySpec],
}

const fn quantity(
    name: &'static str,
    dim: Dimension,
    bare: &'static str,
    target: &'static str,
    default: Option<&'static str>,
) -> KeySpec {
    KeySpec {
        name,
        kind: ValueKind::Quantity { dim, bare, target },
        default,
    }
}

const fn number(name: &'static str, default: Option<&'static str>) -> KeySpec {
    KeySpec {
        name,
        kind: ValueKind::Number,
        default,
    }
}

static SCHEMA: &[SectionSpec] = &[
    SectionSpec {
        name: "run",
        keys: &[KeySpec {
            name: "seed",
            kind: ValueKind::UInt,
            default: Some("0"),
        }],
    },
    SectionSpec {
        name: "link",
        keys: &[
            KeySpec {
                name: "kind",
                kind: ValueKind::Token(&["downlink", "uplink", "intersatellite", "double_pass"]),
                default: Some("downlink"),
            },
            quantity("tx_aperture_m", Dimension::Length, "m", "m", Some("0.3")),
            quantity("rx_aperture_m", Dimension::Length, "m", "m", Some("1.0")),
            quantity("tx_jitter_urad", Dimension::Angle, "urad", "rad", Some("1")),
            quantity("rx_jitter_urad", Dimension::Angle, "urad", "rad", Some("1")),
            quantity("tx_optics_db", Dimension::Loss, "dB", "dB", Some("0")),
            quantity("rx_optics_db", Dimension::Loss, "dB", "dB", Some("0")),
            quantity("wavelength_nm", Dimension::Length, "nm", "m", Some("800")),
            quantity("range_km", Dimension::Length, "km", "m", Some("500")),
            quantity("elevation_deg", Dimension::Angle, "deg", "deg", Some("90")),
            quantity(
                "zenith_attenuation_db",
                Dimension::Loss,
                "dB",
                "dB",
                Some("3"),
            ),
            quantity(
                "uplink_turbulence_db",
                Dimension::Loss,
                "dB",
                "dB",
                Some("21"),
            ),
            quantity(
                "downlink_turbulence_db",
                Dimension::Loss,
                "dB",
                "dB",
                Some("0"),
            ),
            number("divergence_factor", Some("1")),
            number("pointing_constant", Some("0.9")),
            quantity(
                "fried_parameter_m",
                Dimension::Length,
                "m",
                "m",
                Some("0.1"),
            ),
        ],
    },
    SectionSpec {
        name: "orbit",
        keys: &[quantity("altitude_km", Dimension::Length, "km", "m", None)],
    },
    SectionSpec {
        name: "pass",
        keys: &[
            quantity("max_elevation_deg", Dimension::Angle, "deg", "deg", None),
            quantity("min_elevation_deg", Dimension::Angle, "deg", "deg", None),
            quantity("timestep_s", Dimension::Time, "s", "s", Some("1")),
        ],
    },
    SectionSpec {
        name: "source",
        keys: &[
            quantity(
                "pair_rate_cps",
                Dimension::Rate,
                "cps",
                "cps",
                Some("1 Mcps"),
            ),
            number("intrinsic_qber", Some("0.015")),
            quantity("arm_loss_a_db", Dimension::Loss, "dB", "dB", Some("0")),
            quantity("arm_loss_b_db", Dimension::Loss, "dB", "dB", Some("0")),
        ],
    },
    SectionSpec {
        name: "wcp_source",
        keys: &[
            quantity(
                "pulse_rate_hz",
                Dimension::Rate,
                "Hz",
                "cps",
                Some("100 MHz"),
            ),
            number("mean_photon_signal", Some("0.5")),
            number("mean_photon_decoy", Some("0.1")),
            number("signal_fraction", Some("0.7")),
            number("intrinsic_error", Some("0.01")),
        ],
    },
    SectionSpec {
        name: "detector_a",
        keys: DETECTOR_KEYS,
    },
    SectionSpec {
        name: "detector_b",
        keys: DETECTOR_KEYS,
    },
    SectionSpec {
        name: "background",
        keys: &[
            quantity("stray_a_cps", Dimension::Rate, "cps", "cps", Some("0")),
            quantity("stray_b_cps", Dimension::Rate, "cps", "cps", Some("0")),
        ],
    },
    SectionSpec {
        name: "coincidence",
        keys: &[
            quantity("window_ns", Dimension::Time, "ns", "s", Some("2")),
            KeySpec {
                name: "loss_arm",
                kind: ValueKind::Token(&["a", "b", "split"]),
                default: Some("b"),
            },
        ],
    },
    SectionSpec {
        name: "overhead",
        keys: &[
            number("timetag_bits", Some("6")),
            number("basis_bits", Some("1")),
            number("ec_efficiency", Some("1.0")),
            number("framing_overhead", Some("0.05")),
        ],
    },
    SectionSpec {
        name: "sweep",
        keys: &[
            KeySpec {
                name: "temperatures_K",
                kind: ValueKind::List {
                    dim: Dimension::Temperature,
                    bare: "K",
                    target: "K",
                },
                default: None,
            },
            KeySpec {
                name: "loss_db",
                kind: ValueKind::List {
                    dim: Dimension::Loss,
                    bare: "dB",
                    target: "dB",
                },
                default: None,
            },
            number("qber_threshold", None), // optional: enables L*(T) reporting
        ],
    },
    SectionSpec {
        name: "protocol",
        keys: &[
            KeySpec {
                name: "protocol",
                kind: ValueKind::Token(&["bbm92", "bb84"]),
                default: None,
            },
            KeySpec {
                name: "n_slots",
                kind: ValueKind::UInt,
                default: Some("1000000"),
            },
            quantity("loss_db", Dimension::Loss, "dB", "dB", Some("0")),
            number("sample_fraction", Some("0.2")),
        ],
    },
    SectionSpec {
        name: "relay",
        keys: &[
            KeySpec {
                name: "station_a",
                kind: ValueKind::Name,
                default: Some("xinglong"),
            },
            KeySpec {
                name: "station_b",
                kind: ValueKind::Name,
                default: Some("nanshan"),
            },
            KeySpec {
                name: "key_length_bits",
                kind: ValueKind::UInt,
                default: Some("256"),
            },
            KeySpec {
                name: "n_pairs",
                kind: ValueKind::UInt,
                default: Some("200000"),
            },
            quantity("loss_a_db", Dimension::Loss, "dB", "dB", Some("6.4")),
            quantity("loss_b_db", Dimension::Loss, "dB", "dB", Some("6.4")),
        ],
    },
];

static DETECTOR_KEYS: &[KeySpec] = &[
    number("efficiency", Some("0.5")),
    quantity("dark_a_cps", Dimension::Rate, "cps", "cps", Some("1790")),
    number("dark_b_per_K", Some("0.08")),
    quantity("dark_c_cps", Dimension::Rate, "cps", "cps", Some("-81")),
    quantity("dead_time_ns", Dimension::Time, "ns", "s", Some("0")),
    quantity("jitter_ns", Dimension::Time, "ns", "s", Some("0.5")),
    quantity(
        "temperature_K",
        Dimension::Temperature,
        "K",
        "K",
        Some("288.15"),
    ),
];

fn section_spec(name: &str) -> Option<&'static SectionSpec> {
    SCHEMA.iter().find(|s| s.name == name)
}

fn key_spec(section: &'static SectionSpec, key: &str) -> Option<&'static KeySpec> {
    section.keys.iter().find(|k| k.name == key)
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

/// A parsed (and progressively resolved) scenario configuration.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScenarioConfig {
    sections: BTreeMap<String, BTreeMap<String, String>>,
}

impl ScenarioConfig {
    /// Parses configuration text, validating sections, keys and duplicates
    /// against the schema. Values stay raw until typed resolution.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        let mut current: Option<&'static SectionSpec> = None;
        for (i, raw_line) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw_line.trim();
            if content.is_empty() || content.starts_with('#') {
                continue;
            }
            if let Some(inner) = content.strip_prefix('[') {
                let name = inner
                    .strip_suffix(']')
                    .ok_or_else(|| ConfigError::Malformed {
                        line,
                        content: content.to_string(),
                    })?;
                let spec = section_spec(name).ok_or_else(|| ConfigError::UnknownSection {
                    line,
                    name: name.to_string(),
                })?;
                if cfg.sections.contains_key(name) {
                    return Err(ConfigError::DuplicateSection {
                        line,
                        name: name.to_string(),
                    });
                }
                cfg.sections.insert(name.to_string(), BTreeMap::new());
                current = Some(spec);
            } else if let Some((key, value)) = content.split_once('=') {
                let key = key.trim();
                let value = value.trim();
                let section = current.ok_or_else(|| ConfigError::KeyOutsideSection {
                    line,
                    key: key.to_string(),
                })?;
                if key_spec(section, key).is_none() {
                    return Err(ConfigError::UnknownKey {
                        line,
                        section: section.name.to_string(),
                        key: key.to_string(),
                    });
                }
                let table = cfg
                    .sections
                    .get_mut(section.name)
                    .expect("section inserted above");
                if table.contains_key(key) {
                    return Err(ConfigError::DuplicateKey {
                        line,
                        section: section.name.to_string(),
                        key: key.to_string(),
                    });
                }
                table.insert(key.to_string(), value.to_string());
            } else {
                return Err(ConfigError::Malformed {
                    line,
                    content: content.to_string(),
                });
            }
        }
        Ok(cfg)
    }

    /// Overrides one value (used for `--seed`); the section/key must exist
    /// in the schema.
    pub fn set(&mut self, section: &str, key: &str, raw: &str) -> Result<(), ConfigError> {
        let spec = section_spec(section).ok_or_else(|| ConfigError::UnknownSection {
            line: 0,
            name: section.to_string(),
        })?;
        if key_spec(spec, key).is_none() {
            return Err(ConfigError::UnknownKey {
                line: 0,
                section: section.to_string(),
                key: key.to_string(),
            });
        }
        self.sections
            .entry(section.to_string())
            .or_default()
            .insert(key.to_string(), raw.trim().to_string());
        Ok(())
    }

    /// Serializes the current (raw) table in canonical schema order. This is
    /// a fixed point: parsing the echo and echoing again yields identical
    /// bytes.
    pub fn echo(&self) -> String {
        let mut out = String::new();
        let mut first = true;
        for section in SCHEMA {
            let Some(table) = self.sections.get(section.name) else {
                continue;
            };
            if !first {
                out.push('\n');
            }
            first = false;
            let _ = writeln!(out, "[{}]", section.name);
            for key in section.keys {
                if let Some(raw) = table.get(key.name) {
                    let _ = writeln!(out, "{} = {}", key.name, raw);
                }
            }
        }
        out
    }

    // -- raw access and defaults --

    fn ensure_default(&mut self, section: &'static str, key: &'static str) {
        let spec = section_spec(section).expect("schema section");
        let kspec = key_spec(spec, key).expect("schema key");
        let table = self.sections.entry(section.to_string()).or_default();
        if !table.contains_key(key) {
            if let Some(default) = kspec.default {
                table.insert(key.to_string(), default.to_string());
            }
        }
    }

    fn raw(&self, section: &str, key: &str) -> Option<&str> {
        self.sections
            .get(section)
            .and_then(|t| t.get(key))
            .map(String::as_str)
    }

    fn require_section(&self, section: &'static str) -> Result<(), ConfigError> {
        if self.sections.contains_key(section) {
            Ok(())
        } else {
            Err(ConfigError::MissingSection(section))
        }
    }

    /// Resolved raw string of a key, injecting the schema default first.
    fn resolved(&mut self, section: &'static str, key: &'static str) -> Result<&str, ConfigError> {
        self.ensure_default(section, key);
        self.raw(section, key)
            .ok_or(ConfigError::MissingKey { section, key })
    }

    fn invalid(section: &'static str, key: &'static str, reason: String) -> ConfigError {
        ConfigError::InvalidValue {
            section,
            key,
            reason,
        }
    }

    // -- typed scalar readers --

    fn quantity_value(
        &mut self,
        section: &'static str,
        key: &'static str,
    ) -> Result<f64, ConfigError> {
        let spec =
            key_spec(section_spec(section).expect("schema section"), key).expect("schema key");
        let ValueKind::Quantity { dim, bare, target } = spec.kind else {
            unreachable!("{section}.{key} is not a quantity")
        };
        let raw = self.resolved(section, key)?.to_string();
        parse_quantity(&raw, dim, bare, target).map_err(|e| Self::invalid(section, key, e))
    }

    fn number_value(
        &mut self,
        section: &'static str,
        key: &'static str,
    ) -> Result<f64, ConfigError> {
        let raw = self.resolved(section, key)?.to_string();
        let mut parts = raw.split_whitespace();
        let token = parts
            .next()
            .ok_or_else(|| Self::invalid(section, key, "empty value".into()))?;
        if parts.next().is_some() {
            return Err(Self::invalid(
                section,
                key,
                format!("expected a bare number, got {raw:?}"),
            ));
        }
        parse_f64(token).map_err(|e| Self::invalid(section, key, e))
    }

    fn optional_number(
        &mut self,
        section: &'static str,
        key: &'static str,
    ) -> Result<Option<f64>, ConfigError> {
        if self.raw(section, key).is_none() {
            return Ok(None);
        }
        self.number_value(section, key).map(Some)
    }

    fn uint_value(&mut self, section: &'static str, key: &'static str) -> Result<u64, ConfigError> {
        let raw = self.resolved(section, key)?;
        raw.parse::<u64>()
            .map_err(|_| Self::invalid(section, key, format!("not an unsigned integer: {raw:?}")))
    }

    fn token_value(
        &mut self,
        section: &'static str,
        key: &'static str,
    ) -> Result<String, ConfigError> {
        let spec =
            key_spec(section_spec(section).expect("schema section"), key).expect("schema key");
        let ValueKind::Token(allowed) = spec.kind else {
            unreachable!("{section}.{key} is not a token")
        };
        let raw = self.resolved(section, key)?;
        if allowed.contains(&raw) {
            Ok(raw.to_string())
        } else {
            Err(Self::invalid(
                section,
                key,
                format!("expected one of {allowed:?}, got {raw:?}"),
            ))
        }
    }

    fn name_value(
        &mut self,
        section: &'static str,
        key: &'static str,
    ) -> Result<String, ConfigError> {
        let raw = self.resolved(section, key)?;
        let ok = !raw.is_empty()
            && raw.len() <= 64
            && raw
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-');
        if ok {
            Ok(raw.to_string())
        } else {
            Err(Self::invalid(
                section,
                key,
                format!("not a valid identifier: {raw:?}"),
            ))
        }
    }

    fn list_value(
        &mut self,
        section: &'static str,
        key: &'static str,
    ) -> Result<Vec<f64>, ConfigError> {
        let spec =
            key_spec(section_spec(section).expect("schema section"), key).expect("schema key");
        let ValueKind::List { dim, bare, target } = spec.kind else {
            unreachable!("{section}.{key} is not a list")
        };
        let raw = self
            .raw(section, key)
            .ok_or(ConfigError::MissingKey { section, key })?
            .to_string();
        parse_list(&raw, dim, bare, target).map_err(|e| Self::invalid(section, key, e))
    }

    // ------------------------------------------------------------------
    // Typed views
    // ------------------------------------------------------------------

    /// Run seed ([run] seed, default 0).
    pub fn seed(&mut self) -> Result<u64, ConfigError> {
        self.uint_value("run", "seed")
    }

    /// The BBM92 bench: source, receivers, backgrounds, window, loss split.
    /// Every key has a default, so this never requires sections to exist.
    pub fn bench(&mut self) -> Result<Bbm92Setup, ConfigError> {
        let source = EntangledSourceParams {
            pair_rate_cps: self.quantity_value("source", "pair_rate_cps")?,
            intrinsic_qber: self.number_value("source", "intrinsic_qber")?,
            arm_loss_a_db: self.quantity_value("source", "arm_loss_a_db")?,
            arm_loss_b_db: self.quantity_value("source", "arm_loss_b_db")?,
        };
        let detector_a = self.detector("detector_a")?;
        let detector_b = self.detector("detector_b")?;
        let background_a = BackgroundLight {
            stray_rate_cps: self.quantity_value("background", "stray_a_cps")?,
        };
        let background_b = BackgroundLight {
            stray_rate_cps: self.quantity_value("background", "stray_b_cps")?,
        };
        let coincidence_window_s = self.quantity_value("coincidence", "window_ns")?;
        let loss_arm = SweepLossArm::parse(&self.token_value("coincidence", "loss_arm")?)
            .expect("token set matches SweepLossArm");
        let setup = Bbm92Setup {
            source,
            detector_a,
            detector_b,
            background_a,
            background_b,
            coincidence_window_s,
            loss_arm,
        };
        setup
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(setup)
    }

    fn detector(&mut self, section: &'static str) -> Result<DetectorParams, ConfigError> {
        let params = DetectorParams {
            efficiency: self.number_value(section, "efficiency")?,
            dark_fit_a: self.quantity_value(section, "dark_a_cps")?,
            dark_fit_b: self.number_value(section, "dark_b_per_K")?,
            dark_fit_c: self.quantity_value(section, "dark_c_cps")?,
            dead_time_s: self.quantity_value(section, "dead_time_ns")?,
            jitter_rms_s: self.quantity_value(section, "jitter_ns")?,
            temperature_k: self.quantity_value(section, "temperature_K")?,
        };
        params
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(params)
    }

    /// Classical-overhead cost model ([overhead], fully defaulted).
    pub fn overhead(&mut self) -> Result<OverheadParams, ConfigError> {
        let params = OverheadParams {
            timetag_bits_per_event: self.number_value("overhead", "timetag_bits")?,
            basis_bits_per_sifted: self.number_value("overhead", "basis_bits")?,
            ec_efficiency: self.number_value("overhead", "ec_efficiency")?,
            framing_overhead: self.number_value("overhead", "framing_overhead")?,
        };
        params
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(params)
    }

    /// The optical-link template ([link], fully defaulted).
    pub fn link_template(&mut self) -> Result<LinkScenario, ConfigError> {
        let kind = LinkKind::parse(&self.token_value("link", "kind")?)
            .expect("token set matches LinkKind");
        let wavelength_m = self.quantity_value("link", "wavelength_nm")?;
        let wavelength =
            Wavelength::new(wavelength_m).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        let scenario = LinkScenario {
            kind,
            tx: OpticalTerminal {
                aperture_m: self.quantity_value("link", "tx_aperture_m")?,
                pointing_jitter_rad: self.quantity_value("link", "tx_jitter_urad")?,
                optics_loss_db: self.quantity_value("link", "tx_optics_db")?,
            },
            rx: OpticalTerminal {
                aperture_m: self.quantity_value("link", "rx_aperture_m")?,
                pointing_jitter_rad: self.quantity_value("link", "rx_jitter_urad")?,
                optics_loss_db: self.quantity_value("link", "rx_optics_db")?,
            },
            wavelength,
            range_m: self.quantity_value("link", "range_km")?,
            elevation_deg: Some(self.quantity_value("link", "elevation_deg")?),
            zenith_attenuation_db: self.quantity_value("link", "zenith_attenuation_db")?,
            uplink_turbulence_penalty_db: self.quantity_value("link", "uplink_turbulence_db")?,
            downlink_turbulence_db: self.quantity_value("link", "downlink_turbulence_db")?,
            divergence_factor: self.number_value("link", "divergence_factor")?,
            pointing_constant: self.number_value("link", "pointing_constant")?,
            fried_parameter_m: self.quantity_value("link", "fried_parameter_m")?,
        };
        scenario
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(scenario)
    }

    /// Orbit and pass window ([orbit] and [pass] are required sections).
    pub fn orbit_pass(&mut self) -> Result<OrbitPassConfig, ConfigError> {
        self.require_section("orbit")?;
        self.require_section("pass")?;
        Ok(OrbitPassConfig {
            altitude_m: self.quantity_value("orbit", "altitude_km")?,
            max_elevation_deg: self.quantity_value("pass", "max_elevation_deg")?,
            min_elevation_deg: self.quantity_value("pass", "min_elevation_deg")?,
            timestep_s: self.quantity_value("pass", "timestep_s")?,
        })
    }

    /// Sweep grids ([sweep] is a required section).
    pub fn sweep_grids(&mut self) -> Result<SweepGrids, ConfigError> {
        self.require_section("sweep")?;
        Ok(SweepGrids {
            temperatures_k: self.list_value("sweep", "temperatures_K")?,
            loss_db: self.list_value("sweep", "loss_db")?,
            qber_threshold: self.optional_number("sweep", "qber_threshold")?,
        })
    }

    /// Monte Carlo run parameters ([protocol] is a required section).
    pub fn protocol(&mut self) -> Result<ProtocolConfig, ConfigError> {
        self.require_section("protocol")?;
        let kind = match self.token_value("protocol", "protocol")?.as_str() {
            "bbm92" => ProtocolKind::Bbm92,
            _ => ProtocolKind::Bb84,
        };
        Ok(ProtocolConfig {
            kind,
            n_slots: self.uint_value("protocol", "n_slots")?,
            loss_db: self.quantity_value("protocol", "loss_db")?,
            sample_fraction: self.number_value("protocol", "sample_fraction")?,
        })
    }

    /// Weak-coherent-pulse source plus its intrinsic error
    /// ([wcp_source], fully defaulted).
    pub fn wcp_source(&mut self) -> Result<(WcpSourceParams, f64), ConfigError> {
        let params = WcpSourceParams {
            pulse_rate_hz: self.quantity_value("wcp_source", "pulse_rate_hz")?,
            mean_photon_signal: self.number_value("wcp_source", "mean_photon_signal")?,
            mean_photon_decoy: self.number_value("wcp_source", "mean_photon_decoy")?,
            signal_fraction: self.number_value("wcp_source", "signal_fraction")?,
        };
        params
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        let intrinsic = self.number_value("wcp_source", "intrinsic_error")?;
        Ok((params, intrinsic))
    }

    /// Relay-demo parameters ([relay], fully defaulted).
    pub fn relay(&mut self) -> Result<RelayDemoConfig, ConfigError> {
        let station_a = self.name_value("relay", "station_a")?;
        let station_b = self.name_value("relay", "station_b")?;
        if station_a == station_b {
            return Err(ConfigError::Invalid(format!(
                "relay stations must differ, got {station_a:?} twice"
            )));
        }
        Ok(RelayDemoConfig {
            station_a,
            station_b,
            key_length_bits: self.uint_value("relay", "key_length_bits")? as usize,
            n_pairs: self.uint_value("relay", "n_pairs")?,
            loss_a_db: self.quantity_value("relay", "loss_a_db")?,
            loss_b_db: self.quantity_value("relay", "loss_b_db")?,
        })
    }
}

/// Orbit/pass parameters read from a config.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitPassConfig {
    pub altitude_m: f64,
    pub max_elevation_deg: f64,
    pub min_elevation_deg: f64,
    pub timestep_s: f64,
}

/// Sweep grids read from a config.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrids {
    pub temperatures_k: Vec<f64>,
    pub loss_db: Vec<f64>,
    pub qber_threshold: Option<f64>,
}

/// Which protocol a Monte Carlo run simulates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProtocolKind {
    Bbm92,
    Bb84,
}

/// Monte Carlo run parameters read from a config.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolConfig {
    pub kind: ProtocolKind,
    pub n_slots: u64,
    pub loss_db: f64,
    pub sample_fraction: f64,
}

/// Relay-demo parameters read from a config.
#[derive(Debug, Clone, PartialEq)]
pub struct RelayDemoConfig {
    pub station_a: String,
    pub station_b: String,
    pub key_length_bits: usize,
    pub n_pairs: u64,
    pub loss_a_db: f64,
    pub loss_b_db: f64,
}
