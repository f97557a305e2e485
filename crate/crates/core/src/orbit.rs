//! Circular-orbit pass geometry over a non-rotating spherical Earth.
//!
//! The model is deliberately minimal: two-body circular orbits, passes
//! parameterized by their culmination elevation rather than full ephemerides.
//! That is enough to produce slant-range/elevation time series, pass
//! durations and orbital periods; Earth rotation during a LEO pass changes
//! the range by well under half a percent and is neglected.
//!
//! Geometry is expressed through the central angle `beta` between the ground
//! station and the sub-satellite point:
//!
//! * `beta(elev) = arccos(R*cos(elev)/(R+h)) - elev`
//! * `elev(beta) = atan2(cos(beta) - R/(R+h), sin(beta))`
//! * slant range `d = sqrt(R^2*sin^2(elev) + 2*R*h + h^2) - R*sin(elev)`
//!
//! A pass culminating at elevation `e_max` follows a great-circle ground
//! track of closest central angle `beta0 = beta(e_max)`, so along the track
//! `cos(beta(t)) = cos(beta0) * cos(omega*t)` with `omega` the mean motion.

use thiserror::Error;

// ---------------------------------------------------------------------------
// Constants
// ---------------------------------------------------------------------------

/// Mean Earth radius, metres.
pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

/// Geocentric gravitational constant GM, m^3/s^2.
pub const EARTH_MU: f64 = 3.986_004_418e14;

/// Geostationary altitude, metres.
pub const GEO_ALTITUDE_M: f64 = 35_786_000.0;

/// Lowest altitude the model accepts, metres (below this, drag dominates).
pub const MIN_ALTITUDE_M: f64 = 160_000.0;

/// Highest altitude the model accepts, metres (just above GEO).
pub const MAX_ALTITUDE_M: f64 = 40_000_000.0;

/// Errors raised by orbit construction and pass evaluation.
#[derive(Debug, Error, PartialEq)]
pub enum OrbitError {
    #[error("altitude must lie in [{MIN_ALTITUDE_M}, {MAX_ALTITUDE_M}] m, got {0}")]
    AltitudeOutOfRange(f64),
    #[error("elevation must lie in [0, 90] degrees, got {0}")]
    ElevationOutOfRange(f64),
    #[error("pass window requires 0 <= min < max <= 90 degrees, got min {min}, max {max}")]
    InvalidPassWindow { max: f64, min: f64 },
    #[error("timestep must be finite and > 0, got {0}")]
    NonPositiveTimestep(f64),
}

// ---------------------------------------------------------------------------
// CircularOrbit
// ---------------------------------------------------------------------------

/// A circular orbit described by its altitude above the mean Earth radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircularOrbit {
    altitude_m: f64,
}

impl CircularOrbit {
    /// Creates an orbit, validating the altitude band.
    pub fn new(altitude_m: f64) -> Result<Self, OrbitError> {
        if !altitude_m.is_finite() || !(MIN_ALTITUDE_M..=MAX_ALTITUDE_M).contains(&altitude_m) {
            return Err(OrbitError::AltitudeOutOfRange(altitude_m));
        }
        Ok(Self { altitude_m })
    }

    /// Altitude above the surface, metres.
    pub fn altitude_m(&self) -> f64 {
        self.altitude_m
    }

    /// Orbital radius from the Earth's centre, metres.
    pub fn radius_m(&self) -> f64 {
        EARTH_RADIUS_M + self.altitude_m
    }

    /// Keplerian period `2*pi*sqrt(a^3/mu)`, seconds.
    pub fn period_s(&self) -> f64 {
        let a = self.radius_m();
        2.0 * std::f64::consts::PI * (a * a * a / EARTH_MU).sqrt()
    }

    /// Mean motion, rad/s.
    pub fn mean_motion_rad_per_s(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.period_s()
    }

    /// Line-of-sight distance from a ground station to the satellite at the
    /// given elevation, metres.
    ///
    /// At 90 degrees the path is radial and the result equals the altitude
    /// bit-for-bit; the quadratic form below would lose an ulp there.
    pub fn slant_range_m(&self, elevation_deg: f64) -> Result<f64, OrbitError> {
        if !elevation_deg.is_finite() || !(0.0..=90.0).contains(&elevation_deg) {
            return Err(OrbitError::ElevationOutOfRange(elevation_deg));
        }
        if elevation_deg == 90.0 {
            return Ok(self.altitude_m);
        }
        let s = elevation_deg.to_radians().sin();
        let h = self.altitude_m;
        Ok(
            (EARTH_RADIUS_M * EARTH_RADIUS_M * s * s + 2.0 * EARTH_RADIUS_M * h + h * h).sqrt()
                - EARTH_RADIUS_M * s,
        )
    }

    /// Central angle between station and sub-satellite point at the given
    /// elevation, radians.
    pub fn central_angle_rad(&self, elevation_deg: f64) -> Result<f64, OrbitError> {
        if !elevation_deg.is_finite() || !(0.0..=90.0).contains(&elevation_deg) {
            return Err(OrbitError::ElevationOutOfRange(elevation_deg));
        }
        let e = elevation_deg.to_radians();
        Ok((EARTH_RADIUS_M * e.cos() / self.radius_m()).acos() - e)
    }

    /// Elevation in degrees seen from the station when the sub-satellite
    /// point sits at central angle `beta_rad`.
    pub fn elevation_deg_at(&self, beta_rad: f64) -> f64 {
        let k = EARTH_RADIUS_M / self.radius_m();
        (beta_rad.cos() - k).atan2(beta_rad.sin()).to_degrees()
    }
}

/// Highest ground-station latitude from which a geostationary satellite is
/// still on the horizon, degrees: `arccos(R / (R + h_geo))`.
pub fn geostationary_max_latitude_deg() -> f64 {
    (EARTH_RADIUS_M / (EARTH_RADIUS_M + GEO_ALTITUDE_M))
        .acos()
        .to_degrees()
}

// ---------------------------------------------------------------------------
// Pass profiles
// ---------------------------------------------------------------------------

/// One time sample of a pass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PassSample {
    /// Seconds since the first sample of the pass.
    pub t_s: f64,
    pub elevation_deg: f64,
    pub slant_range_m: f64,
}

/// Time series of elevation and slant range for one satellite pass.
#[derive(Debug, Clone, PartialEq)]
pub struct PassProfile {
    pub samples: Vec<PassSample>,
    pub max_elevation_deg: f64,
    pub min_elevation_deg: f64,
    pub timestep_s: f64,
    /// Geometric visibility duration (min-elevation crossing to crossing),
    /// seconds; the sampled span is at most this long.
    pub duration_s: f64,
}

/// Geometric duration in seconds of a pass culminating at `max_elevation_deg`
/// with a visibility cutoff at `min_elevation_deg`.
pub fn pass_duration_s(
    orbit: &CircularOrbit,
    max_elevation_deg: f64,
    min_elevation_deg: f64,
) -> Result<f64, OrbitError> {
    validate_window(max_elevation_deg, min_elevation_deg)?;
    let beta0 = orbit.central_angle_rad(max_elevation_deg)?;
    let beta_max = orbit.central_angle_rad(min_elevation_deg)?;
    // cos(beta(t)) = cos(beta0)*cos(omega*t): visible while omega*|t| <= phi_max.
    let ratio = (beta_max.cos() / beta0.cos()).clamp(-1.0, 1.0);
    let phi_max = ratio.acos();
    if !phi_max.is_finite() {
        return Err(OrbitError::InvalidPassWindow {
            max: max_elevation_deg,
            min: min_elevation_deg,
        });
    }
    Ok(2.0 * phi_max / orbit.mean_motion_rad_per_s())
}

/// Samples a symmetric pass on a uniform time grid.
///
/// The grid is centred on culmination, so the culmination geometry is always
/// a sample and the first/last samples fall within one timestep of the
/// min-elevation crossings. Sample times are re-based to start at zero.
pub fn pass_profile(
    orbit: &CircularOrbit,
    max_elevation_deg: f64,
    min_elevation_deg: f64,
    timestep_s: f64,
) -> Result<PassProfile, OrbitError> {
    if !timestep_s.is_finite() || timestep_s <= 0.0 {
        return Err(OrbitError::NonPositiveTimestep(timestep_s));
    }
    let duration = pass_duration_s(orbit, max_elevation_deg, min_elevation_deg)?;
    let omega = orbit.mean_motion_rad_per_s();
    let beta0 = orbit.central_angle_rad(max_elevation_deg)?;
    let half_steps = (0.5 * duration / timestep_s).floor() as i64;

    let mut samples = Vec::with_capacity((2 * half_steps + 1) as usize);
    for k in -half_steps..=half_steps {
        let t_from_culmination = k as f64 * timestep_s;
        let phi = omega * t_from_culmination;
        let beta = (beta0.cos() * phi.cos()).clamp(-1.0, 1.0).acos();
        let elevation_deg = if k == 0 {
            // Avoid acos/atan2 round-trip noise at the culmination sample so
            // that an overhead pass reports the zenith geometry exactly.
            max_elevation_deg
        } else {
            orbit.elevation_deg_at(beta)
        };
        let slant_range_m = orbit.slant_range_m(elevation_deg.min(90.0))?;
        samples.push(PassSample {
            t_s: (k + half_steps) as f64 * timestep_s,
            elevation_deg,
            slant_range_m,
        });
    }
    Ok(PassProfile {
        samples,
        max_elevation_deg,
        min_elevation_deg,
        timestep_s,
        duration_s: duration,
    })
}

fn validate_window(max_elevation_deg: f64, min_elevation_deg: f64) -> Result<(), OrbitError> {
    let ok = max_elevation_deg.is_finite()
        && min_elevation_deg.is_finite()
        && min_elevation_deg >= 0.0
        && min_elevation_deg < max_elevation_deg
        && max_elevation_deg <= 90.0;
    if ok {
        Ok(())
    } else {
        Err(OrbitError::InvalidPassWindow {
            max: max_elevation_deg,
            min: min_elevation_deg,
        })
    }
}

#[cfg(test)]
// Frozen reference values are quoted at full round-trip precision.
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;

    fn approx_eq(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn leo500() -> CircularOrbit {
        CircularOrbit::new(500e3).unwrap()
    }

    // --- slant range ---

    #[test]
    fn slant_range_frozen_values() {
        let o = leo500();
        assert!(approx_eq(
            o.slant_range_m(0.0).unwrap(),
            2573130.389234094,
            1e-6
        ));
        assert!(approx_eq(
            o.slant_range_m(10.0).unwrap(),
            1694567.2211546794,
            1e-6
        ));
        assert!(approx_eq(
            o.slant_range_m(30.0).unwrap(),
            909424.93826199457,
            1e-6
        ));
    }

    #[test]
    fn zenith_slant_range_equals_altitude_exactly() {
        // All intermediate quantities are exactly representable integers, so
        // this holds bit-for-bit, not just approximately.
        assert_eq!(leo500().slant_range_m(90.0).unwrap(), 500e3);
    }

    #[test]
    fn slant_range_decreases_with_elevation() {
        let o = leo500();
        let mut prev = f64::INFINITY;
        for e in 0..=90 {
            let d = o.slant_range_m(e as f64).unwrap();
            assert!(d < prev, "slant not strictly decreasing at {e} deg");
            assert!(d > 0.0);
            prev = d;
        }
    }

    // --- period ---

    #[test]
    fn period_frozen_values() {
        assert!(approx_eq(leo500().period_s(), 5668.1443690611651, 1e-6));
        let geo = CircularOrbit::new(GEO_ALTITUDE_M).unwrap();
        assert!(approx_eq(geo.period_s(), 86142.114333430868, 1e-5));
    }

    #[test]
    fn geo_period_close_to_sidereal_day() {
        // The mean-radius spherical Earth puts the Kepler period of the
        // conventional 35786 km altitude ~22 s below the sidereal day.
        let geo = CircularOrbit::new(GEO_ALTITUDE_M).unwrap();
        assert!((geo.period_s() - 86164.0905).abs() < 25.0);
    }

    // --- pass duration ---

    #[test]
    fn pass_duration_frozen_values() {
        let o = leo500();
        assert!(approx_eq(
            pass_duration_s(&o, 90.0, 10.0).unwrap(),
            442.63594956608778,
            1e-6
        ));
        assert!(approx_eq(
            pass_duration_s(&o, 60.0, 10.0).unwrap(),
            436.3744627358108,
            1e-6
        ));
    }

    #[test]
    fn overhead_pass_duration_band() {
        let d = pass_duration_s(&leo500(), 90.0, 10.0).unwrap();
        assert!(
            (437.0..=447.0).contains(&d),
            "duration {d} outside 442 +/- 5 s"
        );
    }

    #[test]
    fn pass_duration_monotonic_in_window() {
        let o = leo500();
        let base = pass_duration_s(&o, 60.0, 10.0).unwrap();
        assert!(pass_duration_s(&o, 85.0, 10.0).unwrap() > base);
        assert!(pass_duration_s(&o, 60.0, 20.0).unwrap() < base);
    }

    // --- profiles ---

    #[test]
    fn profile_brackets_min_elevation_within_one_step() {
        let o = leo500();
        let p = pass_profile(&o, 90.0, 10.0, 1.0).unwrap();
        let first = p.samples.first().unwrap();
        let last = p.samples.last().unwrap();
        assert!(first.elevation_deg >= 10.0 && last.elevation_deg >= 10.0);
        // One more timestep on either side would cross below the cutoff.
        let overshoot = p.duration_s / 2.0 - (p.samples.len() as f64 - 1.0) / 2.0 * p.timestep_s;
        assert!(overshoot >= 0.0 && overshoot < p.timestep_s);
        assert_eq!(first.t_s, 0.0);
    }

    #[test]
    fn profile_culmination_is_exact_zenith_for_overhead_pass() {
        let p = pass_profile(&leo500(), 90.0, 10.0, 1.0).unwrap();
        let mid = &p.samples[p.samples.len() / 2];
        assert_eq!(mid.elevation_deg, 90.0);
        assert_eq!(mid.slant_range_m, 500e3);
        // ... and it is the range minimum of the whole profile.
        assert!(p
            .samples
            .iter()
            .all(|s| s.slant_range_m >= mid.slant_range_m));
    }

    #[test]
    fn profile_time_strictly_increasing_and_symmetric() {
        let p = pass_profile(&leo500(), 70.0, 10.0, 5.0).unwrap();
        let n = p.samples.len();
        assert_eq!(n % 2, 1, "centred grid must have an odd sample count");
        for w in p.samples.windows(2) {
            assert!(w[1].t_s > w[0].t_s);
        }
        for i in 0..n / 2 {
            let a = &p.samples[i];
            let b = &p.samples[n - 1 - i];
            assert!(
                approx_eq(a.elevation_deg, b.elevation_deg, 1e-9),
                "asymmetric at {i}"
            );
            assert!(approx_eq(a.slant_range_m, b.slant_range_m, 1e-6));
        }
    }

    #[test]
    fn profile_samples_recompute_their_slant_range() {
        let o = leo500();
        let p = pass_profile(&o, 85.0, 15.0, 7.0).unwrap();
        for s in &p.samples {
            let d = o.slant_range_m(s.elevation_deg).unwrap();
            assert!(((d - s.slant_range_m) / d).abs() < 1e-6);
        }
    }

    // --- GEO visibility ---

    #[test]
    fn geo_visibility_latitude_frozen() {
        assert!(approx_eq(
            geostationary_max_latitude_deg(),
            81.307840287988946,
            1e-9
        ));
    }

    // --- validation ---

    #[test]
    fn constructor_and_window_validation() {
        assert_eq!(
            CircularOrbit::new(100e3).unwrap_err(),
            OrbitError::AltitudeOutOfRange(100e3)
        );
        assert_eq!(
            CircularOrbit::new(50e6).unwrap_err(),
            OrbitError::AltitudeOutOfRange(50e6)
        );
        assert!(CircularOrbit::new(160e3).is_ok());
        assert!(CircularOrbit::new(40_000e3).is_ok());

        let o = leo500();
        assert_eq!(
            o.slant_range_m(-1.0).unwrap_err(),
            OrbitError::ElevationOutOfRange(-1.0)
        );
        assert_eq!(
            o.slant_range_m(90.5).unwrap_err(),
            OrbitError::ElevationOutOfRange(90.5)
        );
        assert!(matches!(
            pass_duration_s(&o, 10.0, 10.0).unwrap_err(),
            OrbitError::InvalidPassWindow { .. }
        ));
        assert!(matches!(
            pass_duration_s(&o, 95.0, 10.0).unwrap_err(),
            OrbitError::InvalidPassWindow { .. }
        ));
        assert_eq!(
            pass_profile(&o, 90.0, 10.0, 0.0).unwrap_err(),
            OrbitError::NonPositiveTimestep(0.0)
        );
    }
}
