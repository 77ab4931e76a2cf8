//! Per-symbol equality-constrained least-squares weight design.
//!
//! For each constellation symbol the weights minimize the mismatch to the
//! scrambled ring targets subject to reproducing the constellation exactly at
//! the desired positions. The production path solves the KKT system
//!
//! ```text
//! [ A_E A_E^H   A_L ] [ w ]   [ A_E p_E^H ]
//! [ A_L^H        0  ] [ l ] = [ p_L^H     ]
//! ```
//!
//! by dense LU with partial pivoting. Scenes whose ring positions all sit
//! within a fraction of a degree of the desired direction make `A_E A_E^H`
//! numerically rank-deficient; the solver then falls back to a truncated
//! Hermitian eigenexpansion, which returns the minimum-norm KKT point
//! instead of amplifying rounding noise along near-null directions. In both
//! cases the equality constraint is finished off by an exact projection.
//!
//! The literal closed-form expression published for this problem is
//! implemented alongside ([`solve_symbol_printed`]) and compared against the
//! KKT route, never trusted: its middle factors mix the direct and reflected
//! steering matrices in a way that disagrees with the Lagrangian derivation
//! (see [`compare_solutions`]).

use ndarray::{Array1, Array2};
use rayon::prelude::*;

use crate::array::{build_steering_set, ArrayLayout, SteeringSet};
use crate::channel::{
    desired_constraint_residual, eaves_error_norm, per_symbol_error_norms, responses,
    ChannelMode, CombinedChannel, GainDiagonals,
};
use crate::error::{Error, Result};
use crate::geometry::{desired_paths, eavesdropper_paths, ScenarioGeometry};
use crate::linalg::{adjoint, C64, LuFactors};
use crate::targets::{build_targets, ConstellationSpec, TargetResponses};

/// Pivot-ratio floor below which the KKT matrix is treated as rank deficient.
const PIVOT_RANK_TOL: f64 = 1e-10;
/// Relative eigenvalue cutoff of the spectral fallback.
const SPECTRAL_CUTOFF: f64 = 1e-10;
/// KKT residual the LU path must reach, relative to the right-hand side.
const KKT_RESIDUAL_TOL: f64 = 1e-9;

/// N x M weight matrix; column `m` drives symbol `m`.
#[derive(Debug, Clone)]
pub struct WeightMatrix {
    pub w: Array2<C64>,
}

impl WeightMatrix {
    pub fn antenna_count(&self) -> usize {
        self.w.nrows()
    }

    pub fn symbol_count(&self) -> usize {
        self.w.ncols()
    }

    pub fn column(&self, m: usize) -> Array1<C64> {
        self.w.column(m).to_owned()
    }

    /// Euclidean norm of the per-symbol coefficients of antenna `n`.
    pub fn group_norm(&self, n: usize) -> f64 {
        self.w
            .row(n)
            .iter()
            .map(|v| v.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn group_norms(&self) -> Vec<f64> {
        (0..self.antenna_count()).map(|n| self.group_norm(n)).collect()
    }
}

/// Per-symbol solver diagnostics.
#[derive(Debug, Clone)]
pub struct SymbolDiagnostics {
    /// min/max pivot magnitude ratio of the LU factorization (0 when the
    /// factorization failed outright).
    pub pivot_ratio: f64,
    /// Whether the truncated-eigenexpansion fallback produced the solution.
    pub spectral_fallback: bool,
    /// Relative residual of the full KKT system at the returned solution.
    pub kkt_residual: f64,
    /// Largest absolute defect of the desired-position equality constraint.
    pub constraint_residual: f64,
    /// Eavesdropper mismatch norm for this symbol.
    pub objective: f64,
}

/// Shared factorization state for solving all symbols of one scene.
pub struct KktSystem {
    a_e: Array2<C64>,
    a_l: Array2<C64>,
    kkt: Array2<C64>,
    lu: Option<LuFactors>,
    gram_l: LuFactors,
    n: usize,
    r: usize,
}

impl KktSystem {
    pub fn new(a_e: &Array2<C64>, a_l: &Array2<C64>) -> Result<Self> {
        let n = a_e.nrows();
        let r = a_l.ncols();
        if a_e.ncols() == 0 {
            return Err(Error::ClosedForm(
                "the closed form requires at least one eavesdropper column".into(),
            ));
        }
        if a_l.nrows() != n {
            return Err(Error::ClosedForm(
                "A_E and A_L must have the same number of antennas".into(),
            ));
        }
        let g = a_e.dot(&adjoint(a_e));
        let mut kkt = Array2::zeros((n + r, n + r));
        for i in 0..n {
            for j in 0..n {
                kkt[[i, j]] = g[[i, j]];
            }
        }
        for i in 0..n {
            for j in 0..r {
                kkt[[i, n + j]] = a_l[[i, j]];
                kkt[[n + j, i]] = a_l[[i, j]].conj();
            }
        }
        let gram = adjoint(a_l).dot(a_l);
        let gram_l = LuFactors::factor(&gram).map_err(|_| {
            Error::ClosedForm("desired-position steering columns are linearly dependent".into())
        })?;
        if gram_l.pivot_ratio() < 1e-12 {
            return Err(Error::ClosedForm(
                "desired-position steering columns are numerically dependent".into(),
            ));
        }
        let lu = LuFactors::factor(&kkt).ok();
        Ok(Self {
            a_e: a_e.clone(),
            a_l: a_l.clone(),
            kkt,
            lu,
            gram_l,
            n,
            r,
        })
    }

    /// Solve one symbol: `p_e` is the 1 x (R-r) target row, `p_l` the
    /// 1 x r desired row.
    pub fn solve_symbol(&self, p_e: &[C64], p_l: &[C64]) -> Result<(Array1<C64>, SymbolDiagnostics)> {
        let rhs = self.rhs(p_e, p_l);
        let rhs_norm = rhs.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt().max(1e-300);
        let mut spectral_fallback = false;
        let mut pivot_ratio = 0.0;
        let mut x = match &self.lu {
            Some(lu) if lu.pivot_ratio() > PIVOT_RANK_TOL => {
                pivot_ratio = lu.pivot_ratio();
                let x0 = lu.solve_vec(&rhs);
                let r0 = &rhs - &self.kkt.dot(&x0);
                let dx = lu.solve_vec(&r0);
                let x1 = &x0 + &dx;
                let n0 = r0.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
                let n1 = {
                    let r1 = &rhs - &self.kkt.dot(&x1);
                    r1.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
                };
                if n1 < n0 {
                    x1
                } else {
                    x0
                }
            }
            other => {
                if let Some(lu) = other {
                    pivot_ratio = lu.pivot_ratio();
                }
                spectral_fallback = true;
                crate::linalg::hermitian_pinv_solve(&self.kkt, &rhs, SPECTRAL_CUTOFF)?
            }
        };
        let mut kkt_residual = {
            let r = &rhs - &self.kkt.dot(&x);
            r.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt() / rhs_norm
        };
        if !spectral_fallback && kkt_residual > KKT_RESIDUAL_TOL {
            // LU could not deliver the contracted residual; the spectral
            // route is the deterministic fallback for near-singular systems.
            spectral_fallback = true;
            x = crate::linalg::hermitian_pinv_solve(&self.kkt, &rhs, SPECTRAL_CUTOFF)?;
            kkt_residual = {
                let r = &rhs - &self.kkt.dot(&x);
                r.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt() / rhs_norm
            };
        }
        let mut w = Array1::from_iter(x.iter().take(self.n).cloned());
        self.project_equality(&mut w, p_l);
        let constraint_residual = self.constraint_residual(&w, p_l);
        if constraint_residual > 1e-6 {
            return Err(Error::ClosedForm(format!(
                "inconsistent desired-position constraints (residual {constraint_residual:.3e})"
            )));
        }
        let objective = self.objective(&w, p_e);
        Ok((
            w,
            SymbolDiagnostics {
                pivot_ratio,
                spectral_fallback,
                kkt_residual,
                constraint_residual,
                objective,
            },
        ))
    }

    fn rhs(&self, p_e: &[C64], p_l: &[C64]) -> Array1<C64> {
        let mut rhs = Array1::zeros(self.n + self.r);
        for i in 0..self.n {
            let mut acc = C64::new(0.0, 0.0);
            for (k, t) in p_e.iter().enumerate() {
                acc += self.a_e[[i, k]] * t.conj();
            }
            rhs[i] = acc;
        }
        for (j, t) in p_l.iter().enumerate() {
            rhs[self.n + j] = t.conj();
        }
        rhs
    }

    /// Exact projection onto the affine set `A_L^H w = p_L^H`.
    fn project_equality(&self, w: &mut Array1<C64>, p_l: &[C64]) {
        let mut defect = Array1::zeros(self.r);
        for j in 0..self.r {
            let mut acc = C64::new(0.0, 0.0);
            for i in 0..self.n {
                acc += self.a_l[[i, j]].conj() * w[i];
            }
            defect[j] = acc - p_l[j].conj();
        }
        let correction = self.gram_l.solve_vec(&defect);
        for i in 0..self.n {
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..self.r {
                acc += self.a_l[[i, j]] * correction[j];
            }
            w[i] -= acc;
        }
    }

    fn constraint_residual(&self, w: &Array1<C64>, p_l: &[C64]) -> f64 {
        let resp = responses(&self.a_l, w);
        resp.iter()
            .zip(p_l.iter())
            .map(|(r, t)| (r - t).norm())
            .fold(0.0, f64::max)
    }

    fn objective(&self, w: &Array1<C64>, p_e: &[C64]) -> f64 {
        let resp = responses(&self.a_e, w);
        resp.iter()
            .zip(p_e.iter())
            .map(|(r, t)| (r - t).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

/// Minimizer of `||p_E - w^H A_E||` subject to `w^H A_L = p_L`.
pub fn solve_symbol_kkt(
    a_e: &Array2<C64>,
    a_l: &Array2<C64>,
    p_e: &[C64],
    p_l: &[C64],
) -> Result<(Array1<C64>, SymbolDiagnostics)> {
    KktSystem::new(a_e, a_l)?.solve_symbol(p_e, p_l)
}

/// Diagnostics of the literal printed-formula evaluation.
#[derive(Debug, Clone)]
pub struct PrintedDiagnostics {
    /// Largest absolute defect of the equality constraint at the printed w.
    pub constraint_residual: f64,
    /// Eavesdropper mismatch norm at the printed w.
    pub objective: f64,
    /// Frobenius norms of the four middle-factor terms, for term-by-term
    /// comparison when the printed route disagrees with the KKT route.
    pub k5_term_norms: [f64; 4],
}

/// Literal evaluation of the published closed-form weight expression.
///
/// The printed products are reproduced term by term, including the middle
/// factor whose second term carries `S_E ... S_E^H` where the Lagrangian
/// derivation produces `S_E ... Sh_E^H`, and the sign pattern of the final
/// assembly. Row-times-matrix products are taken in the unique
/// dimension-consistent order. The result is returned for comparison, not
/// used as the production design.
pub fn solve_symbol_printed(
    steering: &SteeringSet,
    gains: &GainDiagonals,
    p_e: &[C64],
    p_l: &[C64],
) -> Result<(Array1<C64>, PrintedDiagnostics)> {
    let s_e = &steering.s_e;
    let sh_e = &steering.sh_e;
    let s_l = &steering.s_l;
    let sh_l = &steering.sh_l;
    let n = s_e.nrows();
    let r = s_l.ncols();

    let scale = |m: &Array2<C64>, diag: &[C64]| -> Array2<C64> {
        let mut out = m.clone();
        for (j, &g) in diag.iter().enumerate() {
            out.column_mut(j).mapv_inplace(|v| v * g);
        }
        out
    };
    let k1k1h: Vec<C64> = gains.k1.iter().map(|g| g * g.conj()).collect();
    let k1k2h: Vec<C64> = gains.k1.iter().zip(&gains.k2).map(|(a, b)| a * b.conj()).collect();
    let k2k1h: Vec<C64> = gains.k2.iter().zip(&gains.k1).map(|(a, b)| a * b.conj()).collect();
    let k2k2h: Vec<C64> = gains.k2.iter().map(|g| g * g.conj()).collect();

    // K5 exactly as printed: the second term pairs S_E with S_E^H.
    let t1 = scale(s_e, &k1k1h).dot(&adjoint(s_e));
    let t2 = scale(s_e, &k1k2h).dot(&adjoint(s_e));
    let t3 = scale(sh_e, &k2k1h).dot(&adjoint(s_e));
    let t4 = scale(sh_e, &k2k2h).dot(&adjoint(sh_e));
    let k5_term_norms = [
        crate::linalg::fro_norm(&t1),
        crate::linalg::fro_norm(&t2),
        crate::linalg::fro_norm(&t3),
        crate::linalg::fro_norm(&t4),
    ];
    let k5 = &(&t1 + &t2) + &(&t3 + &t4);
    let k5_lu = LuFactors::factor(&k5)
        .map_err(|_| Error::ClosedForm("printed formula: K5 is singular".into()))?;
    if k5_lu.pivot_ratio() < 1e-12 {
        return Err(Error::ClosedForm(format!(
            "printed formula: K5 is numerically singular (pivot ratio {:.3e})",
            k5_lu.pivot_ratio()
        )));
    }
    let k5h_lu = LuFactors::factor(&adjoint(&k5))
        .map_err(|_| Error::ClosedForm("printed formula: K5^H is singular".into()))?;

    // helper: row' = row * diag(conj(k)) * X^H * K5^{-H} * Y * diag(ky)  (1 x r)
    let row_term = |kx: &[C64], x: &Array2<C64>, y: &Array2<C64>, ky: &[C64]| -> Array1<C64> {
        // v = X * diag(k) applied to conj-weighted p_e: first u = diag(conj(kx)) p_e^T
        let u: Array1<C64> = Array1::from_iter(
            p_e.iter()
                .zip(kx.iter())
                .map(|(p, k)| *p * k.conj()),
        );
        // t = X^H? careful: (1 x R-r) * ((R-r) x N) -> row of length N, then K5^{-H}
        let xr = adjoint(x);
        let mut row_n = Array1::<C64>::zeros(n);
        for i in 0..n {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..u.len() {
                acc += u[k] * xr[[k, i]];
            }
            row_n[i] = acc;
        }
        // row_n * K5^{-H}: solve (K5^{-H})^T applied from the right is
        // row * K5^{-H} = (K5^{-1} row^H)^H; use K5^H factors: z solves K5^H z = row^H
        let rhs = Array1::from_iter(row_n.iter().map(|v| v.conj()));
        let z = k5h_lu.solve_vec(&rhs);
        let zrow = Array1::from_iter(z.iter().map(|v| v.conj()));
        // * Y * diag(ky): (1 x N)(N x r) -> 1 x r
        let mut out = Array1::<C64>::zeros(r);
        for j in 0..r {
            let mut acc = C64::new(0.0, 0.0);
            for i in 0..n {
                acc += zrow[i] * y[[i, j]];
            }
            out[j] = acc * ky[j];
        }
        out
    };

    let f1 = row_term(&gains.k2, sh_e, s_l, &gains.k3);
    let f2 = row_term(&gains.k1, s_e, s_l, &gains.k3);
    let f3 = row_term(&gains.k2, sh_e, sh_l, &gains.k4);
    let f4 = row_term(&gains.k1, s_e, sh_l, &gains.k4);
    let mut first = Array1::<C64>::zeros(r);
    for j in 0..r {
        first[j] = f1[j] - f2[j] - f3[j] - f4[j] - p_l[j];
    }

    // middle r x r factor: all four terms positive, as printed
    let mid_term = |kx: &[C64], x: &Array2<C64>, y: &Array2<C64>, ky: &[C64]| -> Array2<C64> {
        // diag(kx)^H X^H K5^{-H} Y diag(ky)
        let xw = scale(x, kx); // X diag(kx)
        let yw = scale(y, ky); // Y diag(ky)
        // K5^{-H} * yw: solve K5^H Z = yw
        let z = k5h_lu.solve_mat(&yw);
        adjoint(&xw).dot(&z)
    };
    let m1 = mid_term(&gains.k3, s_l, s_l, &gains.k3);
    let m2 = mid_term(&gains.k4, sh_l, s_l, &gains.k3);
    let m3 = mid_term(&gains.k3, s_l, sh_l, &gains.k4);
    let m4 = mid_term(&gains.k4, sh_l, sh_l, &gains.k4);
    let mid = &(&m1 + &m2) + &(&m3 + &m4);
    let mid_lu = LuFactors::factor(&mid)
        .map_err(|_| Error::ClosedForm("printed formula: K6 middle factor singular".into()))?;
    // K6 = first * mid^{-1}  =>  K6^H = mid^{-H} first^H
    let first_conj = Array1::from_iter(first.iter().map(|v| v.conj()));
    let mid_h_lu = LuFactors::factor(&adjoint(&mid))
        .map_err(|_| Error::ClosedForm("printed formula: K6 middle factor singular".into()))?;
    let k6h = mid_h_lu.solve_vec(&first_conj);
    drop(mid_lu);

    // w = K5^{-1} ( Sh_E K2 p^H - S_E K1 p^H - S_L K3 K6^H - Sh_L K4 K6^H )
    let p_conj = Array1::from_iter(p_e.iter().map(|v| v.conj()));
    let mut rhs = Array1::<C64>::zeros(n);
    for i in 0..n {
        let mut acc = C64::new(0.0, 0.0);
        for k in 0..p_conj.len() {
            acc += sh_e[[i, k]] * gains.k2[k] * p_conj[k];
            acc -= s_e[[i, k]] * gains.k1[k] * p_conj[k];
        }
        for j in 0..r {
            acc -= s_l[[i, j]] * gains.k3[j] * k6h[j];
            acc -= sh_l[[i, j]] * gains.k4[j] * k6h[j];
        }
        rhs[i] = acc;
    }
    let w = k5_lu.solve_vec(&rhs);

    let a_e = &scale(s_e, &gains.k1) + &scale(sh_e, &gains.k2);
    let a_l = &scale(s_l, &gains.k3) + &scale(sh_l, &gains.k4);
    let resp_l = responses(&a_l, &w);
    let constraint_residual = resp_l
        .iter()
        .zip(p_l.iter())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    let resp_e = responses(&a_e, &w);
    let objective = resp_e
        .iter()
        .zip(p_e.iter())
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt();
    Ok((
        w,
        PrintedDiagnostics {
            constraint_residual,
            objective,
            k5_term_norms,
        },
    ))
}

/// Outcome of comparing the printed-formula solution with the KKT solution.
#[derive(Debug, Clone)]
pub struct Concordance {
    /// `||w_printed - w_kkt|| / max(1, ||w_kkt||)`.
    pub rel_difference: f64,
    /// True when the two routes agree to 1e-8 relative.
    pub agrees: bool,
    /// True when they disagree beyond 1e-6 relative.
    pub systematic_disagreement: bool,
    pub kkt_objective: f64,
    pub printed_objective: f64,
    pub printed_constraint_residual: f64,
}

/// Compares a printed-formula solution against the KKT solution.
pub fn compare_solutions(
    w_kkt: &Array1<C64>,
    kkt_diag: &SymbolDiagnostics,
    w_printed: &Array1<C64>,
    printed_diag: &PrintedDiagnostics,
) -> Concordance {
    let diff = (w_kkt - w_printed)
        .iter()
        .map(|v| v.norm_sqr())
        .sum::<f64>()
        .sqrt();
    let scale = w_kkt
        .iter()
        .map(|v| v.norm_sqr())
        .sum::<f64>()
        .sqrt()
        .max(1.0);
    let rel = diff / scale;
    Concordance {
        rel_difference: rel,
        agrees: rel <= 1e-8,
        systematic_disagreement: rel > 1e-6,
        kkt_objective: kkt_diag.objective,
        printed_objective: printed_diag.objective,
        printed_constraint_residual: printed_diag.constraint_residual,
    }
}

/// A fixed-array design with its diagnostics.
#[derive(Debug, Clone)]
pub struct FixedDesign {
    pub weights: WeightMatrix,
    pub layout: ArrayLayout,
    pub channel: CombinedChannel,
    pub targets: TargetResponses,
    pub mode: ChannelMode,
    pub per_symbol: Vec<SymbolDiagnostics>,
    /// Per-symbol eavesdropper mismatch norms.
    pub per_symbol_error_norms: Vec<f64>,
    /// Stacked error norm over all symbols (the summary-table figure and the
    /// sparse-design tolerance when `alpha_mode = from-ula`).
    pub error_norm: f64,
    /// Largest desired-position constraint defect over all symbols.
    pub constraint_residual: f64,
}

/// Designs weights for a fixed array layout in the given scene.
pub fn design_fixed_array(
    layout: &ArrayLayout,
    geo: &ScenarioGeometry,
    spec: &ConstellationSpec,
    mode: ChannelMode,
) -> Result<FixedDesign> {
    if geo.ring_angles_deg.is_empty() {
        return Err(Error::ClosedForm(
            "scenario has no eavesdropper ring angles; the design needs at least one".into(),
        ));
    }
    let desired = vec![desired_paths(geo)?];
    let ring = geo
        .ring_angles_deg
        .iter()
        .map(|&eta| eavesdropper_paths(geo, eta))
        .collect::<Result<Vec<_>>>()?;
    let steering = build_steering_set(layout, &desired, &ring)?;
    let gains = GainDiagonals::from_paths(&desired, &ring, mode);
    let channel = CombinedChannel::build(&steering, &gains)?;
    let targets = build_targets(spec, desired.len(), ring.len())?;
    let system = KktSystem::new(&channel.a_e, &channel.a_l)?;
    let m_count = spec.symbol_count();
    let solved: Vec<_> = (0..m_count)
        .into_par_iter()
        .map(|m| {
            let p_e: Vec<C64> = targets.p_e.row(m).to_vec();
            let p_l: Vec<C64> = targets.p_l.row(m).to_vec();
            system.solve_symbol(&p_e, &p_l)
        })
        .collect::<Result<Vec<_>>>()?;
    let n = layout.len();
    let mut w = Array2::zeros((n, m_count));
    let mut per_symbol = Vec::with_capacity(m_count);
    for (m, (col, diag)) in solved.into_iter().enumerate() {
        w.column_mut(m).assign(&col);
        per_symbol.push(diag);
    }
    let weights = WeightMatrix { w };
    let per_symbol_error_norms = per_symbol_error_norms(&channel.a_e, &weights.w, &targets.p_e);
    let error_norm = eaves_error_norm(&channel.a_e, &weights.w, &targets.p_e);
    let constraint_residual =
        desired_constraint_residual(&channel.a_l, &weights.w, &targets.p_l);
    Ok(FixedDesign {
        weights,
        layout: layout.clone(),
        channel,
        targets,
        mode,
        per_symbol,
        per_symbol_error_norms,
        error_norm,
        constraint_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn trivial_single_antenna_constraint_determines_weight() {
        // N=1, one desired, one eavesdropper, A_L=[1], A_E=[0], p_L=[1] -> w=[1]
        let a_e = array![[C64::new(0.0, 0.0)]];
        let a_l = array![[C64::new(1.0, 0.0)]];
        let (w, diag) =
            solve_symbol_kkt(&a_e, &a_l, &[C64::new(0.0, 0.0)], &[C64::new(1.0, 0.0)]).unwrap();
        assert!((w[0] - C64::new(1.0, 0.0)).norm() < 1e-12);
        assert!(diag.constraint_residual < 1e-12);
    }

    #[test]
    fn decoupled_two_antenna_instance() {
        // A_L=[1;0], A_E=[0;1], p_L=[1], p_E=[0] -> w=[1;0]
        let a_e = array![[C64::new(0.0, 0.0)], [C64::new(1.0, 0.0)]];
        let a_l = array![[C64::new(1.0, 0.0)], [C64::new(0.0, 0.0)]];
        let (w, diag) =
            solve_symbol_kkt(&a_e, &a_l, &[C64::new(0.0, 0.0)], &[C64::new(1.0, 0.0)]).unwrap();
        assert!((w[0] - C64::new(1.0, 0.0)).norm() < 1e-12);
        assert!(w[1].norm() < 1e-12);
        assert!(diag.objective < 1e-12);
    }

    #[test]
    fn scaling_covariance() {
        // scaling targets by complex c scales w by conj(c)
        let a_e = array![
            [C64::new(0.3, 0.1), C64::new(-0.2, 0.4), C64::new(0.0, 0.9)],
            [C64::new(-0.5, 0.2), C64::new(0.8, 0.0), C64::new(0.1, -0.3)],
            [C64::new(0.2, -0.6), C64::new(0.4, 0.4), C64::new(-0.7, 0.1)]
        ];
        let a_l = array![
            [C64::new(1.0, 0.2)],
            [C64::new(0.1, -0.4)],
            [C64::new(-0.3, 0.8)]
        ];
        let p_e = [C64::new(0.05, -0.02), C64::new(-0.03, 0.08), C64::new(0.01, 0.04)];
        let p_l = [C64::new(0.6, -0.8)];
        let (w, _) = solve_symbol_kkt(&a_e, &a_l, &p_e, &p_l).unwrap();
        let c = C64::new(1.3, -0.7);
        let p_e_s: Vec<C64> = p_e.iter().map(|v| v * c).collect();
        let p_l_s: Vec<C64> = p_l.iter().map(|v| v * c).collect();
        let (w_s, _) = solve_symbol_kkt(&a_e, &a_l, &p_e_s, &p_l_s).unwrap();
        for (a, b) in w.iter().zip(w_s.iter()) {
            assert!((a * c.conj() - b).norm() < 1e-10);
        }
    }

    #[test]
    fn rejects_missing_eavesdropper_columns() {
        let a_e: Array2<C64> = Array2::zeros((3, 0));
        let a_l = array![
            [C64::new(1.0, 0.0)],
            [C64::new(0.5, 0.0)],
            [C64::new(0.2, 0.0)]
        ];
        assert!(KktSystem::new(&a_e, &a_l).is_err());
    }

    #[test]
    fn printed_formula_matches_kkt_when_cross_terms_vanish() {
        // With nu_E = 0 (no LOS gain at eavesdroppers) and xi_L = 0 (no
        // reflected gain at the desired position) the printed expression
        // coincides with the Lagrangian solution. A synthetic wide-angle
        // steering set keeps everything well conditioned.
        use crate::array::{steering_vector, ArrayLayout};
        let layout = ArrayLayout::uniform(3, 0.5).unwrap();
        let angles_e = [-1.0, -0.3, 0.4, 0.9, 1.2];
        let zetas_e = [1.1, 0.5, -0.8, 0.2, -1.3];
        let mut s_e = Array2::zeros((3, 5));
        let mut sh_e = Array2::zeros((3, 5));
        for k in 0..5 {
            s_e.column_mut(k).assign(&steering_vector(&layout, angles_e[k]));
            sh_e.column_mut(k).assign(&steering_vector(&layout, zetas_e[k]));
        }
        let mut s_l = Array2::zeros((3, 1));
        let mut sh_l = Array2::zeros((3, 1));
        s_l.column_mut(0).assign(&steering_vector(&layout, 0.1));
        sh_l.column_mut(0).assign(&steering_vector(&layout, 0.7));
        let steering = SteeringSet { s_l, s_e, sh_l, sh_e };
        let gains = GainDiagonals {
            k1: vec![C64::new(0.0, 0.0); 5],
            k2: (0..5).map(|k| C64::from_polar(0.9, 1.1 * k as f64)).collect(),
            k3: vec![C64::from_polar(1.0, 0.3)],
            k4: vec![C64::new(0.0, 0.0)],
        };
        let channel = CombinedChannel::build(&steering, &gains).unwrap();
        let p_e: Vec<C64> = (0..5)
            .map(|k| C64::from_polar(0.1, 0.37 * k as f64))
            .collect();
        let p_l = [C64::from_polar(1.0, 0.25)];
        let (w_kkt, kd) = solve_symbol_kkt(&channel.a_e, &channel.a_l, &p_e, &p_l).unwrap();
        let (w_printed, pd) = solve_symbol_printed(&steering, &gains, &p_e, &p_l).unwrap();
        let conc = compare_solutions(&w_kkt, &kd, &w_printed, &pd);
        assert!(conc.agrees, "rel diff {}", conc.rel_difference);
        assert!(pd.constraint_residual < 1e-9);
    }

    #[test]
    fn printed_formula_disagrees_generically() {
        use crate::array::{build_steering_set, ArrayLayout};
        use crate::geometry::{desired_paths, eavesdropper_paths, ScenarioGeometry};
        let geo = ScenarioGeometry::new(50.0, 100.0, 3.0, 100.0, 5.0, vec![]).unwrap();
        let desired = vec![desired_paths(&geo).unwrap()];
        let ring: Vec<_> = (0..10)
            .map(|k| eavesdropper_paths(&geo, 36.0 * k as f64).unwrap())
            .collect();
        let layout = ArrayLayout::uniform(4, 0.5).unwrap();
        let steering = build_steering_set(&layout, &desired, &ring).unwrap();
        let gains = GainDiagonals::from_paths(&desired, &ring, ChannelMode::TwoRay);
        let channel = CombinedChannel::build(&steering, &gains).unwrap();
        let p_e: Vec<C64> = (0..10)
            .map(|k| C64::from_polar(0.1, 0.61 * k as f64))
            .collect();
        let p_l = [C64::from_polar(1.0, -0.4)];
        let (w_kkt, kd) = solve_symbol_kkt(&channel.a_e, &channel.a_l, &p_e, &p_l).unwrap();
        let (w_printed, pd) = solve_symbol_printed(&steering, &gains, &p_e, &p_l).unwrap();
        let conc = compare_solutions(&w_kkt, &kd, &w_printed, &pd);
        assert!(
            conc.systematic_disagreement,
            "expected systematic disagreement, rel diff {}",
            conc.rel_difference
        );
        // the printed route either violates the equality constraint or cannot
        // beat the constrained optimum
        assert!(
            pd.constraint_residual > 1e-8
                || conc.kkt_objective <= conc.printed_objective + 1e-9,
            "constraint residual {} kkt obj {} printed obj {}",
            pd.constraint_residual,
            conc.kkt_objective,
            conc.printed_objective
        );
    }
}
