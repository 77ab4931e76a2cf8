//! Combined two-ray channel matrices.
//!
//! Each position contributes one column `nu e^{j psi} s(theta) +
//! xi e^{j phi} s(zeta)`; stacking the ring columns first (increasing ring
//! angle) and the desired columns after them fixes the position indexing
//! used everywhere downstream.

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::array::SteeringSet;
use crate::error::{Error, Result};
use crate::geometry::PathParams;
use crate::linalg::C64;

/// Which propagation paths the channel carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChannelMode {
    /// LOS plus the single reflected ray.
    #[serde(rename = "two-ray")]
    TwoRay,
    /// LOS only; the reflected term is dropped entirely.
    #[serde(rename = "los-only")]
    LosOnly,
}

impl std::fmt::Display for ChannelMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ChannelMode::TwoRay => write!(f, "two-ray"),
            ChannelMode::LosOnly => write!(f, "los-only"),
        }
    }
}

/// Complex path gains as diagonal entries: `k1 = nu_E e^{j psi_E}`,
/// `k2 = xi_E e^{j phi_E}` for the ring, `k3`/`k4` likewise for the
/// desired positions. LOS-only mode zeroes `k2` and `k4`.
#[derive(Debug, Clone)]
pub struct GainDiagonals {
    pub k1: Vec<C64>,
    pub k2: Vec<C64>,
    pub k3: Vec<C64>,
    pub k4: Vec<C64>,
}

impl GainDiagonals {
    pub fn from_paths(desired: &[PathParams], ring: &[PathParams], mode: ChannelMode) -> Self {
        let los = |p: &PathParams| C64::from_polar(p.los_attenuation, p.los_phase);
        let refl = |p: &PathParams| match mode {
            ChannelMode::TwoRay => C64::from_polar(p.reflect_attenuation, p.reflect_phase),
            ChannelMode::LosOnly => C64::new(0.0, 0.0),
        };
        Self {
            k1: ring.iter().map(los).collect(),
            k2: ring.iter().map(refl).collect(),
            k3: desired.iter().map(los).collect(),
            k4: desired.iter().map(refl).collect(),
        }
    }
}

/// Combined channel matrices `a_e = S_E K1 + Sh_E K2` (N x (R-r)) and
/// `a_l = S_L K3 + Sh_L K4` (N x r).
#[derive(Debug, Clone)]
pub struct CombinedChannel {
    pub a_e: Array2<C64>,
    pub a_l: Array2<C64>,
}

impl CombinedChannel {
    pub fn build(steering: &SteeringSet, gains: &GainDiagonals) -> Result<Self> {
        if gains.k1.len() != steering.s_e.ncols() || gains.k3.len() != steering.s_l.ncols() {
            return Err(Error::Array(
                "gain diagonal sizes do not match the steering matrices".into(),
            ));
        }
        Ok(Self {
            a_e: scale_columns(&steering.s_e, &gains.k1)
                + &scale_columns(&steering.sh_e, &gains.k2),
            a_l: scale_columns(&steering.s_l, &gains.k3)
                + &scale_columns(&steering.sh_l, &gains.k4),
        })
    }
}

fn scale_columns(m: &Array2<C64>, diag: &[C64]) -> Array2<C64> {
    let mut out = m.clone();
    for (j, &g) in diag.iter().enumerate() {
        out.column_mut(j).mapv_inplace(|v| v * g);
    }
    out
}

/// Responses of every column of `a` under the weight column `w`:
/// entry `k` is `w^H a_k`.
pub fn responses(a: &Array2<C64>, w: &Array1<C64>) -> Array1<C64> {
    let mut out = Array1::zeros(a.ncols());
    for (k, col) in a.columns().into_iter().enumerate() {
        out[k] = col
            .iter()
            .zip(w.iter())
            .map(|(av, wv)| wv.conj() * av)
            .sum();
    }
    out
}

/// Stacked eavesdropper mismatch over all symbols:
/// `sqrt(sum_m ||p_{m,E} - w_m^H A_E||^2)`, the error-norm figure reported
/// in the design summaries.
pub fn eaves_error_norm(a_e: &Array2<C64>, weights: &Array2<C64>, p_e: &Array2<C64>) -> f64 {
    per_symbol_error_norms(a_e, weights, p_e)
        .iter()
        .map(|e| e * e)
        .sum::<f64>()
        .sqrt()
}

/// Per-symbol eavesdropper mismatch norms `||p_{m,E} - w_m^H A_E||_2`.
pub fn per_symbol_error_norms(
    a_e: &Array2<C64>,
    weights: &Array2<C64>,
    p_e: &Array2<C64>,
) -> Vec<f64> {
    (0..weights.ncols())
        .map(|m| {
            let resp = responses(a_e, &weights.column(m).to_owned());
            resp.iter()
                .zip(p_e.row(m).iter())
                .map(|(r, t)| (r - t).norm_sqr())
                .sum::<f64>()
                .sqrt()
        })
        .collect()
}

/// Maximum absolute constraint defect over desired positions and symbols:
/// `max |w_m^H A_L - p_{m,L}|`.
pub fn desired_constraint_residual(
    a_l: &Array2<C64>,
    weights: &Array2<C64>,
    p_l: &Array2<C64>,
) -> f64 {
    let mut worst = 0.0_f64;
    for m in 0..weights.ncols() {
        let resp = responses(a_l, &weights.column(m).to_owned());
        for (r, t) in resp.iter().zip(p_l.row(m).iter()) {
            worst = worst.max((r - t).norm());
        }
    }
    worst
}
