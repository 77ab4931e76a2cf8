//! Dense complex linear algebra used by the design solvers.
//!
//! Two primitives carry the crate: LU factorization with partial pivoting
//! for the KKT systems, and a cyclic Jacobi eigendecomposition for Hermitian
//! matrices. The latter backs both the rank-revealing pseudo-inverse fallback
//! of the closed-form solver and the spectral compression inside the sparse
//! solver. Problem sizes stay in the low hundreds, so dense O(n³) methods are
//! the right tool.

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// LU factorization with partial pivoting of a square complex matrix.
pub struct LuFactors {
    lu: Array2<C64>,
    perm: Vec<usize>,
    min_pivot: f64,
    max_pivot: f64,
}

impl LuFactors {
    pub fn factor(a: &Array2<C64>) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::Linalg(format!(
                "LU requires a square matrix, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut min_pivot = f64::INFINITY;
        let mut max_pivot = 0.0_f64;
        for k in 0..n {
            let mut pivot_row = k;
            let mut pivot_mag = lu[[k, k]].norm();
            for i in k + 1..n {
                let mag = lu[[i, k]].norm();
                if mag > pivot_mag {
                    pivot_mag = mag;
                    pivot_row = i;
                }
            }
            if pivot_mag == 0.0 {
                return Err(Error::Linalg(format!(
                    "exactly singular matrix (zero pivot column {k} of {n})"
                )));
            }
            if pivot_row != k {
                for j in 0..n {
                    lu.swap([k, j], [pivot_row, j]);
                }
                perm.swap(k, pivot_row);
            }
            min_pivot = min_pivot.min(pivot_mag);
            max_pivot = max_pivot.max(pivot_mag);
            let pivot = lu[[k, k]];
            for i in k + 1..n {
                let factor = lu[[i, k]] / pivot;
                lu[[i, k]] = factor;
                if factor != C64::new(0.0, 0.0) {
                    for j in k + 1..n {
                        let val = lu[[k, j]];
                        lu[[i, j]] -= factor * val;
                    }
                }
            }
        }
        Ok(Self {
            lu,
            perm,
            min_pivot,
            max_pivot,
        })
    }

    /// Ratio of smallest to largest pivot magnitude; a crude rank-deficiency
    /// indicator (near zero means numerically singular).
    pub fn pivot_ratio(&self) -> f64 {
        if self.max_pivot == 0.0 {
            0.0
        } else {
            self.min_pivot / self.max_pivot
        }
    }

    /// Solve A x = b for a single right-hand side.
    pub fn solve_vec(&self, b: &Array1<C64>) -> Array1<C64> {
        let n = self.lu.nrows();
        let mut x = Array1::zeros(n);
        for i in 0..n {
            x[i] = b[self.perm[i]];
        }
        // forward substitution, unit lower triangle
        for i in 0..n {
            let mut acc = x[i];
            for j in 0..i {
                acc -= self.lu[[i, j]] * x[j];
            }
            x[i] = acc;
        }
        // back substitution
        for i in (0..n).rev() {
            let mut acc = x[i];
            for j in i + 1..n {
                acc -= self.lu[[i, j]] * x[j];
            }
            x[i] = acc / self.lu[[i, i]];
        }
        x
    }

    /// Solve A X = B column by column.
    pub fn solve_mat(&self, b: &Array2<C64>) -> Array2<C64> {
        let mut x = Array2::zeros(b.raw_dim());
        for (j, col) in b.columns().into_iter().enumerate() {
            let sol = self.solve_vec(&col.to_owned());
            x.column_mut(j).assign(&sol);
        }
        x
    }
}

/// Solve A x = b with one step of iterative refinement; the refined iterate
/// is kept only when it actually lowers the residual.
pub fn lu_solve_refined(a: &Array2<C64>, b: &Array1<C64>) -> Result<(Array1<C64>, f64)> {
    let factors = LuFactors::factor(a)?;
    let x0 = factors.solve_vec(b);
    let r0 = residual(a, &x0, b);
    let dx = factors.solve_vec(&r0);
    let x1 = &x0 + &dx;
    let n0 = r0.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    let r1 = residual(a, &x1, b);
    let n1 = r1.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    if n1 < n0 {
        Ok((x1, n1))
    } else {
        Ok((x0, n0))
    }
}

fn residual(a: &Array2<C64>, x: &Array1<C64>, b: &Array1<C64>) -> Array1<C64> {
    let ax = a.dot(x);
    b - &ax
}

/// Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues in ascending order with matching eigenvector columns.
/// The input is symmetrized conceptually: only the Hermitian part matters.
pub fn eigh(a: &Array2<C64>) -> Result<(Array1<f64>, Array2<C64>)> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::Linalg("eigh requires a square matrix".into()));
    }
    let mut m = a.clone();
    let mut v: Array2<C64> = Array2::eye(n);
    let fro: f64 = m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if fro == 0.0 {
        return Ok((Array1::zeros(n), v));
    }
    let tol = 1e-15 * fro;
    let max_sweeps = 60;
    for _sweep in 0..max_sweeps {
        let mut off = 0.0_f64;
        for p in 0..n {
            for q in p + 1..n {
                off += m[[p, q]].norm_sqr();
            }
        }
        if (2.0 * off).sqrt() <= tol {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let z = m[[p, q]];
                let zmag = z.norm();
                if zmag <= 1e-300 {
                    continue;
                }
                let x = m[[p, p]].re;
                let y = m[[q, q]].re;
                let omega = z / zmag;
                let mu = (x - y) / (2.0 * zmag);
                let t = if mu >= 0.0 {
                    -1.0 / (mu + (mu * mu + 1.0).sqrt())
                } else {
                    1.0 / (-mu + (mu * mu + 1.0).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = omega * (t * c);
                // column update: A <- A * U
                for i in 0..n {
                    let aip = m[[i, p]];
                    let aiq = m[[i, q]];
                    m[[i, p]] = aip * c - aiq * s.conj();
                    m[[i, q]] = aip * s + aiq * c;
                }
                // row update: A <- U^H * A
                for j in 0..n {
                    let apj = m[[p, j]];
                    let aqj = m[[q, j]];
                    m[[p, j]] = apj * c - aqj * s;
                    m[[q, j]] = apj * s.conj() + aqj * c;
                }
                m[[p, p]] = C64::new(m[[p, p]].re, 0.0);
                m[[q, q]] = C64::new(m[[q, q]].re, 0.0);
                m[[p, q]] = C64::new(0.0, 0.0);
                m[[q, p]] = C64::new(0.0, 0.0);
                // eigenvector accumulation: V <- V * U
                for i in 0..n {
                    let vip = v[[i, p]];
                    let viq = v[[i, q]];
                    v[[i, p]] = vip * c - viq * s.conj();
                    v[[i, q]] = vip * s + viq * c;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| m[[i, i]].re).collect();
    order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).unwrap());
    let evals = Array1::from_iter(order.iter().map(|&i| diag[i]));
    let mut evecs = Array2::zeros((n, n));
    for (dst, &src) in order.iter().enumerate() {
        evecs.column_mut(dst).assign(&v.column(src));
    }
    Ok((evals, evecs))
}

/// Minimum-norm solution of the (possibly singular) Hermitian system
/// `A x = b` through a truncated eigenexpansion: eigendirections with
/// |lambda| below `rel_cutoff * max|lambda|` are discarded.
pub fn hermitian_pinv_solve(
    a: &Array2<C64>,
    b: &Array1<C64>,
    rel_cutoff: f64,
) -> Result<Array1<C64>> {
    let (evals, evecs) = eigh(a)?;
    let max_abs = evals.iter().fold(0.0_f64, |acc, &l| acc.max(l.abs()));
    if max_abs == 0.0 {
        return Ok(Array1::zeros(b.len()));
    }
    let cutoff = rel_cutoff * max_abs;
    let n = b.len();
    let mut x = Array1::<C64>::zeros(n);
    for k in 0..n {
        let lambda = evals[k];
        if lambda.abs() <= cutoff {
            continue;
        }
        let uk = evecs.column(k);
        let coef: C64 = uk.iter().zip(b.iter()).map(|(u, bv)| u.conj() * bv).sum();
        let scaled = coef / lambda;
        for i in 0..n {
            x[i] += uk[i] * scaled;
        }
    }
    Ok(x)
}

/// Frobenius norm of a complex matrix.
pub fn fro_norm(a: &Array2<C64>) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Conjugate transpose.
pub fn adjoint(a: &Array2<C64>) -> Array2<C64> {
    let (r, c) = a.dim();
    Array2::from_shape_fn((c, r), |(i, j)| a[[j, i]].conj())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn random_complex_matrix(rng: &mut ChaCha12Rng, r: usize, c: usize) -> Array2<C64> {
        Array2::from_shape_fn((r, c), |_| {
            C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        })
    }

    #[test]
    fn lu_solves_known_system() {
        // [[2, i],[-i, 3]] x = [1, 1] ; solution via hand elimination
        let a = array![
            [C64::new(2.0, 0.0), C64::new(0.0, 1.0)],
            [C64::new(0.0, -1.0), C64::new(3.0, 0.0)]
        ];
        let b = array![C64::new(1.0, 0.0), C64::new(1.0, 0.0)];
        let f = LuFactors::factor(&a).unwrap();
        let x = f.solve_vec(&b);
        let r = &b - &a.dot(&x);
        assert!(r.iter().map(|v| v.norm()).fold(0.0, f64::max) < 1e-14);
    }

    #[test]
    fn lu_random_roundtrip() {
        let mut rng = ChaCha12Rng::seed_from_u64(42);
        for n in [1usize, 3, 8, 25] {
            let a = random_complex_matrix(&mut rng, n, n);
            let b = random_complex_matrix(&mut rng, n, 1).column(0).to_owned();
            let (x, res) = lu_solve_refined(&a, &b).unwrap();
            assert!(res < 1e-12, "n={n} residual {res}");
            let r = &b - &a.dot(&x);
            assert!(r.iter().map(|v| v.norm()).fold(0.0, f64::max) < 1e-12);
        }
    }

    #[test]
    fn lu_rejects_singular() {
        let a = array![
            [C64::new(1.0, 0.0), C64::new(2.0, 0.0)],
            [C64::new(2.0, 0.0), C64::new(4.0, 0.0)]
        ];
        assert!(LuFactors::factor(&a).is_err());
    }

    #[test]
    fn eigh_known_hermitian() {
        // [[2, i],[-i, 2]] has eigenvalues 1 and 3
        let a = array![
            [C64::new(2.0, 0.0), C64::new(0.0, 1.0)],
            [C64::new(0.0, -1.0), C64::new(2.0, 0.0)]
        ];
        let (evals, evecs) = eigh(&a).unwrap();
        assert!((evals[0] - 1.0).abs() < 1e-12);
        assert!((evals[1] - 3.0).abs() < 1e-12);
        // reconstruct
        let lam = Array2::from_diag(&evals.mapv(|l| C64::new(l, 0.0)));
        let rec = evecs.dot(&lam).dot(&adjoint(&evecs));
        assert!(fro_norm(&(&rec - &a)) < 1e-12);
    }

    #[test]
    fn eigh_random_hermitian_reconstruction() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        for n in [2usize, 5, 17, 40] {
            let g = random_complex_matrix(&mut rng, n, n);
            let a = g.dot(&adjoint(&g)); // Hermitian PSD
            let (evals, evecs) = eigh(&a).unwrap();
            assert!(evals.iter().all(|&l| l > -1e-10), "PSD eigenvalues");
            for k in 1..n {
                assert!(evals[k] >= evals[k - 1] - 1e-12, "ascending order");
            }
            let lam = Array2::from_diag(&evals.mapv(|l| C64::new(l, 0.0)));
            let rec = evecs.dot(&lam).dot(&adjoint(&evecs));
            let scale = fro_norm(&a).max(1.0);
            assert!(
                fro_norm(&(&rec - &a)) / scale < 1e-12,
                "n={n} reconstruction error"
            );
            // orthonormality of eigenvectors
            let gram = adjoint(&evecs).dot(&evecs);
            let eye: Array2<C64> = Array2::eye(n);
            assert!(fro_norm(&(&gram - &eye)) < 1e-12);
        }
    }

    #[test]
    fn pinv_solve_consistent_singular_system() {
        // rank-1 Hermitian: A = u u^H, b in range(A)
        let u = array![C64::new(1.0, 0.0), C64::new(0.0, 2.0), C64::new(-1.0, 1.0)];
        let n = u.len();
        let a = Array2::from_shape_fn((n, n), |(i, j)| u[i] * u[j].conj());
        let b = a.dot(&array![
            C64::new(0.3, 0.1),
            C64::new(-0.2, 0.0),
            C64::new(0.0, 0.5)
        ]);
        let x = hermitian_pinv_solve(&a, &b, 1e-10).unwrap();
        let r = &b - &a.dot(&x);
        assert!(r.iter().map(|v| v.norm()).fold(0.0, f64::max) < 1e-10);
    }
}
