//! Two-ray path geometry.
//!
//! The scene is planar: a linear transmit array at the origin, a perfectly
//! conducting reflector a height `H` above it, one desired receiver, and a
//! ring of eavesdropper positions around that receiver. Every length is in
//! carrier wavelengths, so phase shifts reduce to fractional path lengths.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Scene description: reflector, desired receiver and eavesdropper ring.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioGeometry {
    /// Reflector height above the array, `H > 0` (wavelengths).
    pub reflector_height: f64,
    /// Line-of-sight distance from the array to the desired receiver, `D1`.
    pub desired_range: f64,
    /// Signed height of the desired receiver above the broadside axis, `h`.
    pub desired_height: f64,
    /// Distance at which the received signal has unity power, `D`.
    pub unity_power_distance: f64,
    /// Eavesdropper ring radius around the desired receiver (wavelengths).
    pub ring_radius: f64,
    /// Ring angles in degrees, each in `[0, 360)`.
    pub ring_angles_deg: Vec<f64>,
}

/// Per-position path quantities of the two-ray model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathParams {
    /// LOS transmission angle `theta` (radians).
    pub theta: f64,
    /// Reflected-path transmission angle `zeta` (radians).
    pub zeta: f64,
    /// LOS path length `D3` (wavelengths).
    pub los_length: f64,
    /// Total reflected path length `R1 + R2` (wavelengths).
    pub reflect_length: f64,
    /// LOS phase shift `psi` in `[0, 2*pi)`.
    pub los_phase: f64,
    /// Reflected-path phase shift `phi` in `[pi, 3*pi)`; the `pi` offset is
    /// the inversion at the reflecting surface.
    pub reflect_phase: f64,
    /// LOS attenuation ratio `nu = D / D3`.
    pub los_attenuation: f64,
    /// Reflected-path attenuation ratio `xi = D / (R1 + R2)`.
    pub reflect_attenuation: f64,
}

impl ScenarioGeometry {
    pub fn new(
        reflector_height: f64,
        desired_range: f64,
        desired_height: f64,
        unity_power_distance: f64,
        ring_radius: f64,
        ring_angles_deg: Vec<f64>,
    ) -> Result<Self> {
        let geo = Self {
            reflector_height,
            desired_range,
            desired_height,
            unity_power_distance,
            ring_radius,
            ring_angles_deg,
        };
        geo.validate()?;
        Ok(geo)
    }

    /// Ring angles sampled every `step_deg` degrees starting at 0.
    pub fn ring_angles_from_step(step_deg: f64) -> Result<Vec<f64>> {
        if !(step_deg > 0.0) || step_deg > 360.0 {
            return Err(Error::Geometry(format!(
                "ring_step_deg must be in (0, 360], got {step_deg}"
            )));
        }
        let count = (360.0 / step_deg).round() as usize;
        Ok((0..count).map(|k| k as f64 * step_deg).collect())
    }

    fn validate(&self) -> Result<()> {
        if !(self.reflector_height > 0.0) {
            return Err(Error::Geometry(format!(
                "reflector height H must be positive, got {}",
                self.reflector_height
            )));
        }
        if !(self.desired_range > self.desired_height.abs()) {
            return Err(Error::Geometry(format!(
                "degenerate geometry: D1 = {} must exceed |h| = {}",
                self.desired_range,
                self.desired_height.abs()
            )));
        }
        if !(self.unity_power_distance > 0.0) {
            return Err(Error::Geometry(format!(
                "unity-power distance D must be positive, got {}",
                self.unity_power_distance
            )));
        }
        if !(self.ring_radius >= 0.0) {
            return Err(Error::Geometry(format!(
                "ring radius must be non-negative, got {}",
                self.ring_radius
            )));
        }
        // every ring position must stay strictly below the reflector
        let worst = 2.0 * self.reflector_height - self.desired_height - self.ring_radius;
        if worst <= 0.0 {
            return Err(Error::Geometry(format!(
                "ring touches the reflector: 2H - h - r = {worst} must be positive"
            )));
        }
        // and strictly in front of the array
        if self.broadside_projection() <= self.ring_radius {
            return Err(Error::Geometry(
                "ring extends behind the array plane (D2 <= ring radius)".into(),
            ));
        }
        for &eta in &self.ring_angles_deg {
            if !(0.0..360.0).contains(&eta) {
                return Err(Error::Geometry(format!(
                    "ring angle {eta} deg outside [0, 360)"
                )));
            }
        }
        Ok(())
    }

    /// Projection of the desired range onto the broadside axis,
    /// `D2 = sqrt(D1^2 - h^2)`.
    pub fn broadside_projection(&self) -> f64 {
        (self.desired_range * self.desired_range - self.desired_height * self.desired_height)
            .sqrt()
    }
}

/// Non-negative remainder of `x` modulo one wavelength.
fn rem_unit(x: f64) -> f64 {
    let r = x - x.floor();
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Core path computation for a receiver offset `(h_off, l_off)` from the
/// desired point (vertical, horizontal). Both zero reproduces the desired
/// receiver bit-for-bit, with `D3 = D1` exactly.
fn paths_at_offset(geo: &ScenarioGeometry, h_off: f64, l_off: f64) -> Result<PathParams> {
    let h = geo.desired_height;
    let big_h = geo.reflector_height;
    let d2 = geo.broadside_projection();
    let horizontal = d2 + l_off;
    if horizontal <= 0.0 {
        return Err(Error::Geometry(
            "receiver position is behind the array plane".into(),
        ));
    }
    let clearance = 2.0 * big_h - h - h_off;
    if clearance <= 0.0 {
        return Err(Error::Geometry(format!(
            "receiver at or above the reflector image: 2H - h - h_offset = {clearance}"
        )));
    }
    let los_length = if h_off == 0.0 && l_off == 0.0 {
        geo.desired_range
    } else {
        (horizontal.powi(2) + (h + h_off).powi(2)).sqrt()
    };
    let theta = ((h + h_off) / horizontal).atan();
    let zeta = (clearance / horizontal).atan();
    let sin_zeta = zeta.sin();
    let r1 = big_h / sin_zeta;
    let r2 = (big_h - h - h_off) / sin_zeta;
    let reflect_length = r1 + r2;
    let (los_phase, reflect_phase) = phase_shifts_from_lengths(los_length, reflect_length);
    let los_attenuation = geo.unity_power_distance / los_length;
    let reflect_attenuation = geo.unity_power_distance / reflect_length;
    Ok(PathParams {
        theta,
        zeta,
        los_length,
        reflect_length,
        los_phase,
        reflect_phase,
        los_attenuation,
        reflect_attenuation,
    })
}

/// Path quantities to the desired receiver (offset zero).
pub fn desired_paths(geo: &ScenarioGeometry) -> Result<PathParams> {
    paths_at_offset(geo, 0.0, 0.0)
}

/// Path quantities to the ring position at angle `eta_deg` (degrees).
pub fn eavesdropper_paths(geo: &ScenarioGeometry, eta_deg: f64) -> Result<PathParams> {
    let eta = eta_deg.to_radians();
    let h_off = geo.ring_radius * eta.sin();
    let l_off = geo.ring_radius * eta.cos();
    paths_at_offset(geo, h_off, l_off)
}

fn phase_shifts_from_lengths(los_length: f64, reflect_length: f64) -> (f64, f64) {
    let psi = 2.0 * PI * rem_unit(los_length);
    let phi = PI + 2.0 * PI * rem_unit(reflect_length);
    (psi, phi)
}

/// Phase shifts `(psi, phi)` recomputed from the stored path lengths.
pub fn phase_shifts(pp: &PathParams) -> (f64, f64) {
    phase_shifts_from_lengths(pp.los_length, pp.reflect_length)
}

/// Attenuation ratios `(nu, xi)` recomputed from the stored path lengths.
pub fn attenuations(geo: &ScenarioGeometry, pp: &PathParams) -> (f64, f64) {
    (
        geo.unity_power_distance / pp.los_length,
        geo.unity_power_distance / pp.reflect_length,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn paper_geometry(ring_radius: f64) -> ScenarioGeometry {
        ScenarioGeometry::new(500.0, 1000.0, 0.0, 1000.0, ring_radius, vec![0.0]).unwrap()
    }

    #[test]
    fn desired_broadside_case() {
        let geo = paper_geometry(8.4);
        let pp = desired_paths(&geo).unwrap();
        assert_eq!(pp.theta, 0.0); // h = 0 forces broadside
        assert!((pp.zeta - PI / 4.0).abs() < 1e-15);
        assert!((pp.reflect_length - 1414.2136).abs() < 1e-3);
        // mirror-image cross-check of Eq-style reflected length
        let mirror = (1000.0_f64.powi(2) + 1000.0_f64.powi(2)).sqrt();
        assert!((pp.reflect_length - mirror).abs() / mirror < 1e-12);
        assert_eq!(pp.los_attenuation, 1.0);
        assert!((pp.reflect_attenuation - 0.70711).abs() < 1e-5);
        assert!((pp.reflect_phase - 4.4836).abs() < 1e-3);
    }

    #[test]
    fn eavesdropper_at_ninety_degrees() {
        let geo = paper_geometry(8.4);
        let pp = eavesdropper_paths(&geo, 90.0).unwrap();
        assert!((pp.theta.to_degrees() - 0.4813).abs() < 1e-3);
        assert!((pp.los_length - 1000.03528).abs() < 1e-4);
        assert!((pp.los_phase - 0.22169).abs() < 2e-4);
        assert!((pp.los_attenuation - 0.999965).abs() < 1e-6);
    }

    #[test]
    fn zero_radius_collapses_to_desired_exactly() {
        let mut geo = paper_geometry(0.0);
        geo.desired_height = -3.25;
        let want = desired_paths(&geo).unwrap();
        for eta in [0.0, 37.5, 90.0, 180.0, 271.25] {
            let got = eavesdropper_paths(&geo, eta).unwrap();
            assert_eq!(got, want, "eta = {eta}");
        }
    }

    #[test]
    fn phase_ranges_and_mirror_identity_random() {
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        let mut worst = 0.0_f64;
        for _ in 0..10_000 {
            let h_refl = 10.0 + 1990.0 * rng.random::<f64>();
            let d1 = 10.0 + 4990.0 * rng.random::<f64>();
            let h = (rng.random::<f64>() - 0.5) * 1.8 * d1;
            let d2 = (d1 * d1 - h * h).sqrt();
            let r = rng.random::<f64>() * 0.05 * d2;
            if 2.0 * h_refl - h - r <= 0.0 {
                continue;
            }
            let geo =
                ScenarioGeometry::new(h_refl, d1, h, 1000.0, r, vec![]).unwrap();
            let eta = rng.random::<f64>() * 360.0;
            let pp = eavesdropper_paths(&geo, eta).unwrap();
            assert!((0.0..2.0 * PI).contains(&pp.los_phase));
            assert!((PI..3.0 * PI).contains(&pp.reflect_phase));
            assert!(pp.theta.abs() < PI / 2.0);
            assert!(pp.zeta > 0.0 && pp.zeta <= PI / 2.0);
            // mirror identity
            let er = eta.to_radians();
            let (h_off, l_off) = (r * er.sin(), r * er.cos());
            let mirror = ((d2 + l_off).powi(2) + (2.0 * h_refl - h - h_off).powi(2)).sqrt();
            worst = worst.max((pp.reflect_length - mirror).abs() / mirror);
            // exact attenuation contracts
            assert_eq!(pp.los_attenuation, 1000.0 / pp.los_length);
            assert_eq!(pp.reflect_attenuation, 1000.0 / pp.reflect_length);
        }
        assert!(worst < 1e-9, "mirror identity worst rel err {worst}");
    }

    #[test]
    fn continuity_in_ring_angle() {
        let geo = paper_geometry(8.4);
        let mut prev = eavesdropper_paths(&geo, 0.0).unwrap();
        let step = 0.1;
        let mut k = 1;
        while (k as f64) * step < 360.0 {
            let cur = eavesdropper_paths(&geo, k as f64 * step).unwrap();
            assert!((cur.theta - prev.theta).abs() < 1e-4);
            assert!((cur.zeta - prev.zeta).abs() < 1e-4);
            assert!((cur.los_length - prev.los_length).abs() < 0.05);
            prev = cur;
            k += 1;
        }
    }

    #[test]
    fn integer_wavelength_gives_zero_los_phase() {
        let geo = paper_geometry(8.0);
        // D3 = 1008 exactly at eta = 0 (h = 0)
        let pp = eavesdropper_paths(&geo, 0.0).unwrap();
        assert_eq!(pp.los_length, 1008.0);
        assert_eq!(pp.los_phase, 0.0);
    }

    #[test]
    fn rejects_degenerate_inputs() {
        assert!(ScenarioGeometry::new(500.0, 10.0, 10.0, 1000.0, 1.0, vec![]).is_err());
        assert!(ScenarioGeometry::new(-1.0, 100.0, 0.0, 1000.0, 1.0, vec![]).is_err());
        assert!(ScenarioGeometry::new(5.0, 100.0, 0.0, 1000.0, 20.0, vec![]).is_err());
        assert!(ScenarioGeometry::new(500.0, 100.0, 0.0, 0.0, 1.0, vec![]).is_err());
        // ring angle domain
        assert!(ScenarioGeometry::new(500.0, 100.0, 0.0, 10.0, 1.0, vec![360.0]).is_err());
    }

    #[test]
    fn recomputed_shifts_match_stored() {
        let geo = paper_geometry(8.4);
        let pp = eavesdropper_paths(&geo, 123.0).unwrap();
        let (psi, phi) = phase_shifts(&pp);
        assert_eq!(psi, pp.los_phase);
        assert_eq!(phi, pp.reflect_phase);
        let (nu, xi) = attenuations(&geo, &pp);
        assert_eq!(nu, pp.los_attenuation);
        assert_eq!(xi, pp.reflect_attenuation);
    }
}
