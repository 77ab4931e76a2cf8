//! Antenna layouts and steering vectors.

use ndarray::{Array1, Array2};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::PathParams;
use crate::linalg::C64;

/// Ordered antenna offsets from the phase reference, in wavelengths.
///
/// Constructed layouts (uniform grids) start at offset zero. Sub-arrays
/// produced by pruning keep their absolute offsets so that the propagation
/// reference point, and with it every path phase, stays put.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayLayout {
    offsets: Vec<f64>,
}

impl ArrayLayout {
    pub fn new(offsets: Vec<f64>) -> Result<Self> {
        if offsets.is_empty() {
            return Err(Error::Array("layout needs at least one antenna".into()));
        }
        if offsets[0] < 0.0 {
            return Err(Error::Array(format!(
                "offsets must be non-negative, first is {}",
                offsets[0]
            )));
        }
        for pair in offsets.windows(2) {
            if !(pair[1] > pair[0]) {
                return Err(Error::Array(format!(
                    "offsets must be strictly increasing, got {} then {}",
                    pair[0], pair[1]
                )));
            }
        }
        Ok(Self { offsets })
    }

    /// Uniform layout with `n` elements spaced `spacing` apart, first at 0.
    pub fn uniform(n: usize, spacing: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Array("element count must be at least 1".into()));
        }
        if !(spacing > 0.0) {
            return Err(Error::Array(format!(
                "spacing must be positive, got {spacing}"
            )));
        }
        Ok(Self {
            offsets: (0..n).map(|k| k as f64 * spacing).collect(),
        })
    }

    /// Sub-array of the antennas at `indices` (ascending), absolute offsets.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let offsets = indices
            .iter()
            .map(|&i| {
                self.offsets
                    .get(i)
                    .copied()
                    .ok_or_else(|| Error::Array(format!("antenna index {i} out of range")))
            })
            .collect::<Result<Vec<_>>>()?;
        if offsets.is_empty() {
            return Err(Error::Array("subset needs at least one antenna".into()));
        }
        Self::new(offsets)
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    /// Distance between the first and last antenna.
    pub fn aperture(&self) -> f64 {
        self.offsets[self.offsets.len() - 1] - self.offsets[0]
    }

    /// `aperture / (N - 1)`; `None` for a single antenna.
    pub fn average_spacing(&self) -> Option<f64> {
        if self.offsets.len() < 2 {
            None
        } else {
            Some(self.aperture() / (self.offsets.len() - 1) as f64)
        }
    }
}

/// Steering vector for a transmission angle: entry `n` is
/// `exp(j 2 pi d_n sin(angle))` with `d_n` in wavelengths.
pub fn steering_vector(layout: &ArrayLayout, angle: f64) -> Array1<C64> {
    let s = angle.sin();
    Array1::from_iter(
        layout
            .offsets()
            .iter()
            .map(|&d| C64::from_polar(1.0, 2.0 * PI * d * s)),
    )
}

/// Steering matrices for the LOS (`theta`) and reflected (`zeta`) angles of
/// the desired receivers and the eavesdropper ring.
#[derive(Debug, Clone)]
pub struct SteeringSet {
    /// N x r, LOS angles of desired positions.
    pub s_l: Array2<C64>,
    /// N x (R - r), LOS angles of ring positions in increasing ring-angle order.
    pub s_e: Array2<C64>,
    /// N x r, reflected angles of desired positions.
    pub sh_l: Array2<C64>,
    /// N x (R - r), reflected angles of ring positions.
    pub sh_e: Array2<C64>,
}

/// Builds the four steering matrices. Ring columns come first in the overall
/// position indexing convention (increasing ring angle), desired columns
/// after them; an empty ring is rejected because the fixed-array design
/// needs at least one eavesdropper column.
pub fn build_steering_set(
    layout: &ArrayLayout,
    desired: &[PathParams],
    ring: &[PathParams],
) -> Result<SteeringSet> {
    if desired.is_empty() {
        return Err(Error::Array("steering set needs a desired position".into()));
    }
    if ring.is_empty() {
        return Err(Error::Array(
            "steering set needs at least one eavesdropper position".into(),
        ));
    }
    let column_stack = |angles: Vec<f64>| -> Array2<C64> {
        let n = layout.len();
        let mut m = Array2::zeros((n, angles.len()));
        for (j, a) in angles.iter().enumerate() {
            m.column_mut(j).assign(&steering_vector(layout, *a));
        }
        m
    };
    Ok(SteeringSet {
        s_l: column_stack(desired.iter().map(|p| p.theta).collect()),
        s_e: column_stack(ring.iter().map(|p| p.theta).collect()),
        sh_l: column_stack(desired.iter().map(|p| p.zeta).collect()),
        sh_e: column_stack(ring.iter().map(|p| p.zeta).collect()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{desired_paths, eavesdropper_paths, ScenarioGeometry};

    #[test]
    fn uniform_layout_matches_expected_apertures() {
        let ula = ArrayLayout::uniform(30, 0.5).unwrap();
        assert_eq!(ula.len(), 30);
        assert!((ula.aperture() - 14.5).abs() < 1e-15);
        assert_eq!(ula.average_spacing(), Some(0.5));

        let grid = ArrayLayout::uniform(401, 0.05).unwrap();
        assert!((grid.aperture() - 20.0).abs() < 1e-12);

        let single = ArrayLayout::uniform(1, 0.5).unwrap();
        assert_eq!(single.offsets(), &[0.0]);
        assert_eq!(single.aperture(), 0.0);
        assert_eq!(single.average_spacing(), None);
    }

    #[test]
    fn layout_validation() {
        assert!(ArrayLayout::new(vec![]).is_err());
        assert!(ArrayLayout::new(vec![0.0, 0.5, 0.5]).is_err());
        assert!(ArrayLayout::new(vec![-0.1, 0.5]).is_err());
        assert!(ArrayLayout::uniform(0, 0.5).is_err());
        assert!(ArrayLayout::uniform(4, 0.0).is_err());
    }

    #[test]
    fn steering_at_broadside_is_all_ones() {
        let layout = ArrayLayout::uniform(7, 0.37).unwrap();
        let s = steering_vector(&layout, 0.0);
        for v in s.iter() {
            assert_eq!(*v, C64::new(1.0, 0.0));
        }
    }

    #[test]
    fn steering_half_wavelength_thirty_degrees() {
        // d = [0, 0.5], 30 deg -> [1, exp(j pi/2)] = [1, j]
        let layout = ArrayLayout::new(vec![0.0, 0.5]).unwrap();
        let s = steering_vector(&layout, 30.0_f64.to_radians());
        assert!((s[0] - C64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((s[1] - C64::new(0.0, 1.0)).norm() < 1e-12);
        // opposite angle conjugates
        let sm = steering_vector(&layout, (-30.0_f64).to_radians());
        assert!((sm[1] - C64::new(0.0, -1.0)).norm() < 1e-12);
    }

    #[test]
    fn steering_entries_unit_modulus_and_conjugate_symmetry() {
        let layout = ArrayLayout::uniform(16, 0.43).unwrap();
        for k in 0..50 {
            let angle = -1.5 + 3.0 * (k as f64) / 49.0;
            let s = steering_vector(&layout, angle);
            let sc = steering_vector(&layout, -angle);
            for (a, b) in s.iter().zip(sc.iter()) {
                assert!((a.norm() - 1.0).abs() < 1e-12);
                assert!((a.conj() - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn steering_set_dimensions_and_reference_row() {
        let geo =
            ScenarioGeometry::new(500.0, 1000.0, 0.0, 1000.0, 8.4, vec![]).unwrap();
        let desired = desired_paths(&geo).unwrap();
        let ring: Vec<_> = (0..360)
            .map(|k| eavesdropper_paths(&geo, k as f64).unwrap())
            .collect();
        let layout = ArrayLayout::uniform(30, 0.5).unwrap();
        let set = build_steering_set(&layout, &[desired], &ring).unwrap();
        assert_eq!(set.s_e.dim(), (30, 360));
        assert_eq!(set.s_l.dim(), (30, 1));
        assert_eq!(set.sh_e.dim(), (30, 360));
        // row 0 is the reference element: all ones
        for m in [&set.s_l, &set.s_e, &set.sh_l, &set.sh_e] {
            for v in m.row(0).iter() {
                assert!((v - C64::new(1.0, 0.0)).norm() < 1e-15);
            }
            for v in m.iter() {
                assert!((v.norm() - 1.0).abs() < 1e-12);
            }
        }
        // a ring position sharing the desired LOS angle shares its column
        let same_theta = PathParams { ..desired };
        let set2 = build_steering_set(&layout, &[desired], &[same_theta]).unwrap();
        let diff = &set2.s_e.column(0) - &set2.s_l.column(0);
        assert!(diff.iter().map(|v| v.norm()).fold(0.0, f64::max) < 1e-15);
        // empty ring is rejected
        assert!(build_steering_set(&layout, &[desired], &[]).is_err());
        // single-antenna layout: every steering matrix is a row of ones
        let one = ArrayLayout::uniform(1, 0.5).unwrap();
        let set1 = build_steering_set(&one, &[desired], &ring).unwrap();
        assert!(set1.s_e.iter().all(|v| (v - C64::new(1.0, 0.0)).norm() < 1e-15));
    }
}
