//! Hermitian eigendecomposition via cyclic Jacobi rotations.
//!
//! Jacobi is chosen over faster factorizations because it is simple, fully
//! deterministic (no pivot heuristics, no platform-dependent branching) and
//! accurate to round-off for the tiny matrices this crate diagonalizes
//! (POVM elements are 4×4). Complex off-diagonal entries are absorbed into
//! the rotation phase, reducing each elimination to the classic real
//! symmetric 2×2 problem.

use num_complex::Complex64;

use crate::error::{Result, SimError};
use crate::qstate::DenseOperator;
use crate::tolerances::EPS_NORM;

const MAX_SWEEPS: usize = 64;

/// Eigenvalues (ascending) and matching orthonormal eigenvectors of a
/// Hermitian operator. `vectors` is column-major: eigenvector `k` occupies
/// `vectors[k*dim .. (k+1)*dim]`.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    vectors: Vec<Complex64>,
    dim: usize,
}

impl HermitianEigen {
    pub fn eigenvector(&self, k: usize) -> &[Complex64] {
        &self.vectors[k * self.dim..(k + 1) * self.dim]
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

/// Diagonalizes a Hermitian operator. Errors when the operator deviates from
/// Hermiticity by more than the norm tolerance.
pub fn hermitian_eigen(op: &DenseOperator) -> Result<HermitianEigen> {
    let dev = op.hermiticity_deviation();
    if dev > EPS_NORM {
        return Err(SimError::NotHermitian(dev));
    }
    let n = op.dim();
    let mut a: Vec<Complex64> = op.entries().to_vec();
    // Symmetrize exactly so round-off in the input cannot bias the sweep.
    for r in 0..n {
        for c in (r + 1)..n {
            let avg = (a[r * n + c] + a[c * n + r].conj()) * 0.5;
            a[r * n + c] = avg;
            a[c * n + r] = avg.conj();
        }
        a[r * n + r] = Complex64::new(a[r * n + r].re, 0.0);
    }
    let mut v = vec![Complex64::new(0.0, 0.0); n * n];
    for r in 0..n {
        v[r * n + r] = Complex64::new(1.0, 0.0);
    }

    let scale: f64 = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt().max(1.0);
    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|p| ((p + 1)..n).map(move |q| (p, q)))
            .map(|(p, q)| a[p * n + q].norm_sqr())
            .sum();
        if off.sqrt() <= 1e-15 * scale {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                let r = apq.norm();
                if r <= 1e-18 * scale {
                    continue;
                }
                // Phase that makes the pivot real, then the real rotation.
                let phase = apq / r;
                let app = a[p * n + p].re;
                let aqq = a[q * n + q].re;
                let tau = (aqq - app) / (2.0 * r);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let s_conj_phase = phase.conj() * s;
                let c_conj_phase = phase.conj() * c;
                // Columns: A ← A·J with J = [[c, s], [-s·e^{-iφ}, c·e^{-iφ}]]
                // in the (p,q) plane.
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = akp * c - akq * s_conj_phase;
                    a[k * n + q] = akp * s + akq * c_conj_phase;
                }
                // Rows: A ← J†·A.
                let s_phase = phase * s;
                let c_phase = phase * c;
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = apk * c - aqk * s_phase;
                    a[q * n + k] = apk * s + aqk * c_phase;
                }
                // Eigenvector accumulation: V ← V·J.
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = vkp * c - vkq * s_conj_phase;
                    v[k * n + q] = vkp * s + vkq * c_conj_phase;
                }
                // Pin the eliminated pair and diagonal to exact form.
                a[p * n + q] = Complex64::new(0.0, 0.0);
                a[q * n + p] = Complex64::new(0.0, 0.0);
                a[p * n + p] = Complex64::new(a[p * n + p].re, 0.0);
                a[q * n + q] = Complex64::new(a[q * n + q].re, 0.0);
            }
        }
    }
    if !converged {
        let off: f64 = (0..n)
            .flat_map(|p| ((p + 1)..n).map(move |q| (p, q)))
            .map(|(p, q)| a[p * n + q].norm_sqr())
            .sum();
        if off.sqrt() > 1e-12 * scale {
            return Err(SimError::EigenNoConvergence);
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a[i * n + i]
            .re
            .partial_cmp(&a[j * n + j].re)
            .expect("eigenvalues are finite")
    });
    let values: Vec<f64> = order.iter().map(|&i| a[i * n + i].re).collect();
    let mut vectors = Vec::with_capacity(n * n);
    for &col in &order {
        for row in 0..n {
            vectors.push(v[row * n + col]);
        }
    }
    Ok(HermitianEigen {
        values,
        vectors,
        dim: n,
    })
}
