//! Per-symbol desired array responses.
//!
//! The desired receiver gets the constellation itself; every ring position
//! gets a low-magnitude response with an independently drawn random phase so
//! that detection there degenerates to guessing. Randomness comes from a
//! named, platform-stable generator so that runs reproduce bit-for-bit.

use ndarray::Array2;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::C64;

/// Name of the random generator recorded in run metadata.
pub const RNG_ALGORITHM: &str = "ChaCha12";

/// Constellation description plus the scrambling parameters.
#[derive(Debug, Clone)]
pub struct ConstellationSpec {
    /// Symbol phases in radians; one per symbol.
    pub symbol_phases: Vec<f64>,
    /// Bit label of each symbol (Gray-coded for QPSK).
    pub bit_labels: Vec<u32>,
    /// Linear magnitude of the desired-location response.
    pub desired_magnitude: f64,
    /// Linear magnitude of the ring responses.
    pub eaves_magnitude: f64,
    /// Seed for the scrambling phases.
    pub rng_seed: u64,
}

impl ConstellationSpec {
    pub fn new(
        symbol_phases: Vec<f64>,
        bit_labels: Vec<u32>,
        desired_magnitude: f64,
        eaves_magnitude: f64,
        rng_seed: u64,
    ) -> Result<Self> {
        if symbol_phases.len() < 2 {
            return Err(Error::Targets("need at least two symbols".into()));
        }
        if bit_labels.len() != symbol_phases.len() {
            return Err(Error::Targets("one bit label per symbol required".into()));
        }
        if !(desired_magnitude > 0.0) {
            return Err(Error::Targets(format!(
                "desired magnitude must be positive, got {desired_magnitude}"
            )));
        }
        if !(eaves_magnitude >= 0.0) {
            return Err(Error::Targets(format!(
                "eavesdropper magnitude must be non-negative, got {eaves_magnitude}"
            )));
        }
        for i in 0..symbol_phases.len() {
            for j in i + 1..symbol_phases.len() {
                let mut diff = (symbol_phases[i] - symbol_phases[j]) % (2.0 * PI);
                if diff < 0.0 {
                    diff += 2.0 * PI;
                }
                if diff.min(2.0 * PI - diff) < 1e-12 {
                    return Err(Error::Targets(format!(
                        "symbol phases {i} and {j} coincide modulo 2 pi"
                    )));
                }
            }
        }
        Ok(Self {
            symbol_phases,
            bit_labels,
            desired_magnitude,
            eaves_magnitude,
            rng_seed,
        })
    }

    /// QPSK with Gray-coded bit pairs: 00 at 45 deg, 01 at 135 deg,
    /// 11 at -135 deg, 10 at -45 deg; unit desired magnitude and 0.1
    /// scrambled magnitude at the ring.
    pub fn qpsk(rng_seed: u64) -> Self {
        Self::new(
            vec![
                45.0_f64.to_radians(),
                135.0_f64.to_radians(),
                (-135.0_f64).to_radians(),
                (-45.0_f64).to_radians(),
            ],
            vec![0b00, 0b01, 0b11, 0b10],
            1.0,
            0.1,
            rng_seed,
        )
        .expect("qpsk spec is valid")
    }

    /// Number of symbols.
    pub fn symbol_count(&self) -> usize {
        self.symbol_phases.len()
    }

    /// Bits carried per symbol (log2 of the symbol count).
    pub fn bits_per_symbol(&self) -> u32 {
        (self.symbol_count() as f64).log2().round() as u32
    }

    /// Nominal constellation point of symbol `m`.
    pub fn constellation_point(&self, m: usize) -> C64 {
        C64::from_polar(self.desired_magnitude, self.symbol_phases[m])
    }
}

/// Desired responses: `p_l` is M x r (constellation replicated over the
/// desired positions), `p_e` is M x (R - r) (scrambled ring responses).
#[derive(Debug, Clone)]
pub struct TargetResponses {
    pub p_l: Array2<C64>,
    pub p_e: Array2<C64>,
}

/// Builds the target responses for `r` desired positions and `ring_size`
/// ring positions. Ring phases are drawn independently per symbol and per
/// position, row-major (all positions of symbol 0, then symbol 1, ...), from
/// a ChaCha12 stream seeded with `spec.rng_seed`.
pub fn build_targets(spec: &ConstellationSpec, r: usize, ring_size: usize) -> Result<TargetResponses> {
    if r == 0 || ring_size == 0 {
        return Err(Error::Targets(
            "need at least one desired and one ring position".into(),
        ));
    }
    let m_count = spec.symbol_count();
    let p_l = Array2::from_shape_fn((m_count, r), |(m, _)| spec.constellation_point(m));
    let mut rng = ChaCha12Rng::seed_from_u64(spec.rng_seed);
    let mut p_e = Array2::zeros((m_count, ring_size));
    for m in 0..m_count {
        for k in 0..ring_size {
            let phase = rng.random::<f64>() * 2.0 * PI;
            p_e[[m, k]] = C64::from_polar(spec.eaves_magnitude, phase);
        }
    }
    Ok(TargetResponses { p_l, p_e })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qpsk_mapping_matches_convention() {
        let spec = ConstellationSpec::qpsk(7);
        assert_eq!(spec.symbol_count(), 4);
        assert_eq!(spec.bits_per_symbol(), 2);
        // symbol `00` -> exp(j 45 deg), symbol `10` -> exp(-j 45 deg)
        let c00 = spec.constellation_point(0);
        assert!((c00 - C64::from_polar(1.0, PI / 4.0)).norm() < 1e-15);
        let idx10 = spec.bit_labels.iter().position(|&b| b == 0b10).unwrap();
        let c10 = spec.constellation_point(idx10);
        assert!((c10 - C64::from_polar(1.0, -PI / 4.0)).norm() < 1e-15);
        assert_eq!(spec.eaves_magnitude, 0.1);
        assert_eq!(spec.desired_magnitude, 1.0);
        // adjacent Gray labels differ in one bit around the circle
        for i in 0..4 {
            let a = spec.bit_labels[i];
            let b = spec.bit_labels[(i + 1) % 4];
            assert_eq!((a ^ b).count_ones(), 1);
        }
    }

    #[test]
    fn targets_dimensions_and_magnitudes() {
        let spec = ConstellationSpec::qpsk(1234);
        let t = build_targets(&spec, 1, 360).unwrap();
        assert_eq!(t.p_l.dim(), (4, 1));
        assert_eq!(t.p_e.dim(), (4, 360));
        for v in t.p_l.iter() {
            assert!((v.norm() - 1.0).abs() < 1e-12);
        }
        for v in t.p_e.iter() {
            assert!((v.norm() - 0.1).abs() < 1e-12);
        }
    }

    #[test]
    fn same_seed_reproduces_bit_identical_targets() {
        let spec = ConstellationSpec::qpsk(99);
        let a = build_targets(&spec, 1, 64).unwrap();
        let b = build_targets(&spec, 1, 64).unwrap();
        assert_eq!(a.p_e, b.p_e);
        let other = build_targets(&ConstellationSpec::qpsk(100), 1, 64).unwrap();
        assert_ne!(a.p_e, other.p_e);
    }

    #[test]
    fn zero_eaves_magnitude_gives_zero_matrix() {
        let spec = ConstellationSpec::new(
            vec![0.0, PI],
            vec![0, 1],
            1.0,
            0.0,
            5,
        )
        .unwrap();
        let t = build_targets(&spec, 1, 8).unwrap();
        assert!(t.p_e.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(ConstellationSpec::new(vec![0.0], vec![0], 1.0, 0.1, 1).is_err());
        assert!(ConstellationSpec::new(vec![0.0, 0.0], vec![0, 1], 1.0, 0.1, 1).is_err());
        assert!(
            ConstellationSpec::new(vec![0.0, 2.0 * PI], vec![0, 1], 1.0, 0.1, 1).is_err(),
            "phases equal modulo 2 pi"
        );
        assert!(ConstellationSpec::new(vec![0.0, 1.0], vec![0, 1], 0.0, 0.1, 1).is_err());
        assert!(ConstellationSpec::new(vec![0.0, 1.0], vec![0, 1], 1.0, -0.1, 1).is_err());
    }
}
