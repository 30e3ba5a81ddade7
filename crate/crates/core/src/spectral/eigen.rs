//! Lowest eigenpairs of a symmetric pencil `A x = λ B x` with `B` positive
//! definite, by shift-and-invert Lanczos in the `B` inner product.

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::Llt;
use faer::{Mat, Side};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::sparse::CsrMatrix;
use crate::{Error, Result};

/// Required relative residual `‖Ax − λBx‖ / ‖Bx‖`.
pub const RESIDUAL_TOL: f64 = 1e-8;

/// Shifts tried in turn; `A − σB` must be positive definite.
const SHIFTS: [f64; 4] = [-0.1, -1.0, -10.0, -100.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    /// `B`-orthonormal eigenvectors.
    #[serde(skip)]
    pub vectors: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    pub shift: f64,
    pub krylov_dim: usize,
}

fn factor(a: &CsrMatrix, b: &CsrMatrix) -> Result<(f64, Llt<usize, f64>)> {
    let mut last = String::new();
    for &sigma in &SHIFTS {
        let shifted = CsrMatrix::combine(&[(1.0, a), (-sigma, b)]);
        match shifted.to_faer_lower()?.sp_cholesky(Side::Lower) {
            Ok(llt) => return Ok((sigma, llt)),
            Err(e) => last = format!("{e:?}"),
        }
    }
    Err(Error::Factorization(format!(
        "A − σB not positive definite for any shift in {SHIFTS:?}: {last}"
    )))
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

fn norm(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

/// Lanczos basis of dimension up to `m` for `(A − σB)⁻¹ B`, fully
/// re-orthogonalized. Returns the basis, its `B`-images and the
/// tridiagonal coefficients.
struct Krylov {
    q: Vec<Vec<f64>>,
    alpha: Vec<f64>,
    beta: Vec<f64>,
}

fn lanczos(llt: &Llt<usize, f64>, b: &CsrMatrix, m: usize, rng: &mut ChaCha8Rng) -> Krylov {
    let n = b.dim();
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut bq: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut alpha = Vec::with_capacity(m);
    let mut beta: Vec<f64> = Vec::with_capacity(m);

    let orthogonalize = |w: &mut Vec<f64>, q: &[Vec<f64>], bq: &[Vec<f64>]| {
        for _ in 0..2 {
            for (qi, bqi) in q.iter().zip(bq) {
                let c = dot(bqi, w);
                w.iter_mut().zip(qi).for_each(|(x, y)| *x -= c * y);
            }
        }
    };
    let random_start = |rng: &mut ChaCha8Rng, q: &[Vec<f64>], bq: &[Vec<f64>]| -> Option<(Vec<f64>, Vec<f64>)> {
        for _ in 0..5 {
            let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            orthogonalize(&mut v, q, bq);
            let bv = b.mul_vec(&v);
            let nrm = dot(&v, &bv).sqrt();
            if nrm > 1e-10 * norm(&v).max(1e-300) && nrm > 0.0 {
                return Some((v.iter().map(|x| x / nrm).collect(), bv.iter().map(|x| x / nrm).collect()));
            }
        }
        None
    };

    let Some((v0, bv0)) = random_start(rng, &q, &bq) else {
        return Krylov { q, alpha, beta };
    };
    q.push(v0);
    bq.push(bv0);
    let mut rhs = Mat::<f64>::zeros(n, 1);
    loop {
        let j = q.len() - 1;
        for i in 0..n {
            rhs[(i, 0)] = bq[j][i];
        }
        llt.solve_in_place(rhs.as_mut());
        let mut w: Vec<f64> = (0..n).map(|i| rhs[(i, 0)]).collect();
        let a = dot(&bq[j], &w);
        alpha.push(a);
        orthogonalize(&mut w, &q, &bq);
        if q.len() == m.min(n) {
            break;
        }
        let bw = b.mul_vec(&w);
        let bnorm = dot(&w, &bw).max(0.0).sqrt();
        if bnorm > 1e-12 * a.abs().max(1e-300) {
            beta.push(bnorm);
            q.push(w.iter().map(|x| x / bnorm).collect());
            bq.push(bw.iter().map(|x| x / bnorm).collect());
        } else {
            // invariant subspace found: continue in a fresh direction
            match random_start(rng, &q, &bq) {
                Some((v, bv)) => {
                    beta.push(0.0);
                    q.push(v);
                    bq.push(bv);
                }
                None => break,
            }
        }
    }
    Krylov { q, alpha, beta }
}

/// The `k` smallest eigenvalues of `A x = λ B x` with eigenvectors, each
/// satisfying [`RESIDUAL_TOL`].
pub fn solve_lowest(a: &CsrMatrix, b: &CsrMatrix, k: usize) -> Result<EigenPairs> {
    let n = a.dim();
    if b.dim() != n {
        return Err(Error::InvalidParameter("pencil matrices differ in size".into()));
    }
    if k == 0 || k > n {
        return Err(Error::InvalidParameter(format!("requested {k} eigenpairs of a {n}-dimensional pencil")));
    }
    let (sigma, llt) = factor(a, b)?;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut m = (2 * k + 20).max(40).min(n);
    let mut worst;
    loop {
        let kr = lanczos(&llt, b, m, &mut rng);
        let dim = kr.alpha.len();
        if dim < k {
            return Err(Error::NoConvergence(format!("Krylov space of dimension {dim} cannot hold {k} eigenpairs")));
        }
        let t = Mat::<f64>::from_fn(dim, dim, |i, j| {
            if i == j {
                kr.alpha[i]
            } else if i + 1 == j {
                kr.beta[i]
            } else if j + 1 == i {
                kr.beta[j]
            } else {
                0.0
            }
        });
        let evd = t
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::NoConvergence(format!("tridiagonal eigensolver failed: {e:?}")))?;
        let (u, s) = (evd.U(), evd.S());
        // largest θ = 1/(λ − σ) first
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&i, &j| s[j].total_cmp(&s[i]));

        let mut values = Vec::with_capacity(k);
        let mut vectors = Vec::with_capacity(k);
        let mut residuals = Vec::with_capacity(k);
        for &col in order.iter().take(k) {
            let theta = s[col];
            let lambda = sigma + 1.0 / theta;
            let mut x = vec![0.0; n];
            for (i, qi) in kr.q.iter().enumerate() {
                let c = u[(i, col)];
                x.iter_mut().zip(qi).for_each(|(xv, qv)| *xv += c * qv);
            }
            let bx = b.mul_vec(&x);
            let bn = dot(&x, &bx).sqrt();
            x.iter_mut().for_each(|v| *v /= bn);
            let ax = a.mul_vec(&x);
            let bx = b.mul_vec(&x);
            let r: Vec<f64> = ax.iter().zip(&bx).map(|(p, q)| p - lambda * q).collect();
            residuals.push(norm(&r) / norm(&bx));
            values.push(lambda);
            vectors.push(x);
        }
        worst = residuals.iter().copied().fold(0.0, f64::max);
        if worst <= RESIDUAL_TOL {
            return Ok(EigenPairs { values, vectors, residuals, shift: sigma, krylov_dim: dim });
        }
        if m == n {
            break;
        }
        m = (2 * m).min(n);
    }
    Err(Error::NoConvergence(format!(
        "relative residual {worst:.3e} above {RESIDUAL_TOL:e} with the full Krylov space"
    )))
}
